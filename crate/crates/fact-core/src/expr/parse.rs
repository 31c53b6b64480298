//! Recursive-descent parser for the canonical surface syntax.
//!
//! The grammar is LL(1) because every binary expression is fully
//! parenthesized. The parser is whitespace-tolerant between tokens, rejects
//! leading-zero literals, and enforces the root-only rule for `periodic`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use super::Expr;

/// Nesting bound; canonical corpus formulas are far shallower and the parser
/// recurses once per level.
const MAX_DEPTH: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
pub struct ParseError {
    /// Byte offset into the input where the offending token starts.
    pub offset: usize,
    /// The token classes that would have been accepted here.
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    DblStar,
    Percent,
    Comma,
    X,
    Pi,
    Prime,
    Sin,
    Cos,
    Periodic,
    Int(BigUint),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::DblStar => "`**`".into(),
            Tok::Percent => "`%`".into(),
            Tok::Comma => "`,`".into(),
            Tok::X => "`x`".into(),
            Tok::Pi => "`pi`".into(),
            Tok::Prime => "`prime`".into(),
            Tok::Sin => "`sin`".into(),
            Tok::Cos => "`cos`".into(),
            Tok::Periodic => "`periodic`".into(),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let tok = match c {
            b'(' => {
                pos += 1;
                Tok::LParen
            }
            b')' => {
                pos += 1;
                Tok::RParen
            }
            b'+' => {
                pos += 1;
                Tok::Plus
            }
            b'-' => {
                pos += 1;
                Tok::Minus
            }
            b'%' => {
                pos += 1;
                Tok::Percent
            }
            b',' => {
                pos += 1;
                Tok::Comma
            }
            b'*' => {
                if bytes.get(pos + 1) == Some(&b'*') {
                    pos += 2;
                    Tok::DblStar
                } else {
                    pos += 1;
                    Tok::Star
                }
            }
            b'0'..=b'9' => {
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let digits = &text[start..pos];
                if digits.len() > 1 && digits.starts_with('0') {
                    return Err(ParseError {
                        offset: start,
                        expected: vec!["integer literal without a leading zero"],
                        found: format!("`{digits}`"),
                    });
                }
                Tok::Int(digits.parse().expect("ascii digits"))
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                while pos < bytes.len() && bytes[pos].is_ascii_alphabetic() {
                    pos += 1;
                }
                match &text[start..pos] {
                    "x" => Tok::X,
                    "pi" => Tok::Pi,
                    "prime" => Tok::Prime,
                    "sin" => Tok::Sin,
                    "cos" => Tok::Cos,
                    "periodic" => Tok::Periodic,
                    other => {
                        return Err(ParseError {
                            offset: start,
                            expected: vec!["`x`", "`pi`", "`prime`", "`sin`", "`cos`", "`periodic`"],
                            found: format!("`{other}`"),
                        })
                    }
                }
            }
            other => {
                return Err(ParseError {
                    offset: start,
                    expected: vec!["a token"],
                    found: format!("byte {:?}", other as char),
                })
            }
        };
        toks.push((tok, start));
    }
    toks.push((Tok::Eof, bytes.len()));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

const EXPR_EXPECTED: [&str; 6] = ["`(`", "`prime`", "`sin`", "`cos`", "`x`", "integer literal"];

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, expected: Vec<&'static str>) -> ParseError {
        let (tok, offset) = self.peek();
        ParseError {
            offset: *offset,
            expected,
            found: tok.describe(),
        }
    }

    fn expect(&mut self, want: Tok, label: &'static str) -> Result<(), ParseError> {
        if self.peek().0 == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err(vec![label]))
        }
    }

    /// Top level: an optional root-only `periodic(body, k)`, else an expression.
    fn root(&mut self) -> Result<Expr, ParseError> {
        if self.peek().0 == Tok::Periodic {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let body = self.expr(1)?;
            self.expect(Tok::Comma, "`,`")?;
            let (tok, offset) = self.bump();
            let k = match tok {
                Tok::Int(v) => v,
                other => {
                    return Err(ParseError {
                        offset,
                        expected: vec!["integer period"],
                        found: other.describe(),
                    })
                }
            };
            let k = k.to_u64().filter(|&k| k >= 1).ok_or(ParseError {
                offset,
                expected: vec!["period in 1..=2^64-1"],
                found: format!("integer `{k}`"),
            })?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::PeriodicWrap(Box::new(body), k));
        }
        self.expr(1)
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(ParseError {
                offset: self.peek().1,
                expected: vec!["an expression nested at most 4096 levels deep"],
                found: "deeper nesting".into(),
            });
        }
        match self.peek().0.clone() {
            Tok::LParen => {
                self.bump();
                let left = self.expr(depth + 1)?;
                let op = self.bump();
                let make: fn(Box<Expr>, Box<Expr>) -> Expr = match op.0 {
                    Tok::Plus => Expr::Add,
                    Tok::Minus => Expr::Sub,
                    Tok::Star => Expr::Mult,
                    Tok::DblStar => Expr::Pow,
                    Tok::Percent => Expr::Mod,
                    other => {
                        return Err(ParseError {
                            offset: op.1,
                            expected: vec!["`+`", "`-`", "`*`", "`**`", "`%`"],
                            found: other.describe(),
                        })
                    }
                };
                let right = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(make(Box::new(left), Box::new(right)))
            }
            Tok::Prime => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let arg = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::PrimeIdx(Box::new(arg)))
            }
            Tok::Sin | Tok::Cos => {
                let head = self.bump().0;
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::Pi, "`pi`")?;
                self.expect(Tok::Star, "`*`")?;
                self.expect(Tok::LParen, "`(`")?;
                let arg = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(match head {
                    Tok::Sin => Expr::SinPi(Box::new(arg)),
                    _ => Expr::CosPi(Box::new(arg)),
                })
            }
            Tok::X => {
                self.bump();
                Ok(Expr::Var)
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::number(v))
            }
            Tok::Periodic => Err(self.err(vec![
                "`periodic` only at the root of a formula; one of `(`, `prime`, `sin`, `cos`, `x`, integer literal here",
            ])),
            _ => Err(self.err(EXPR_EXPECTED.to_vec())),
        }
    }
}

/// Parses the canonical surface syntax into an [`Expr`].
///
/// Inverse of rendering: `parse(&e.to_string()) == Ok(e)` for every valid
/// expression.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.root()?;
    if p.peek().0 != Tok::Eof {
        return Err(p.err(vec!["end of input"]));
    }
    Ok(e)
}
