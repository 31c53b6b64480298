//! Line-oriented JSONL I/O, digests, and the run manifest.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{CliError, ErrorKind};

pub fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(ErrorKind::Io, format!("{}: {e}", path.display()))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| {
            CliError::new(
                ErrorKind::Data,
                format!("{}:{}: {e}", path.display(), lineno + 1),
            )
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Calls `f` for every non-empty line. Streaming: the file is never held in
/// memory.
pub fn for_each_line(
    path: &Path,
    mut f: impl FnMut(usize, &str) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        f(lineno + 1, &line)?;
    }
    Ok(())
}

pub struct JsonlWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<JsonlWriter, CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        Ok(JsonlWriter { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn write<T: Serialize>(&mut self, item: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(item)
            .map_err(|e| CliError::new(ErrorKind::Data, format!("serialize: {e}")))?;
        self.out
            .write_all(line.as_bytes())
            .and_then(|_| self.out.write_all(b"\n"))
            .map_err(|e| io_err(&self.path, e))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(|e| io_err(&self.path, e))?;
        Ok(self.path)
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut w = JsonlWriter::create(path)?;
    for item in items {
        w.write(item)?;
    }
    w.finish()?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf).map_err(|e| io_err(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    tool_version: String,
    wall_ms: u128,
}

/// Collects run provenance and writes `<target>.manifest.json` (or
/// `manifest.json` inside a directory target). The manifest itself is the
/// only non-deterministic artifact of a run; everything it describes is
/// byte-reproducible from the recorded parameters.
pub struct ManifestBuilder {
    subcommand: &'static str,
    params: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &'static str, params: serde_json::Value, seed: Option<u64>) -> Self {
        ManifestBuilder { subcommand, params, seed, inputs: Vec::new(), started: Instant::now() }
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn write(self, manifest_path: &Path, outputs: &[&Path]) -> Result<(), CliError> {
        let digest = |p: &Path| -> Result<FileDigest, CliError> {
            Ok(FileDigest { path: p.display().to_string(), sha256: sha256_file(p)? })
        };
        let manifest = RunManifest {
            subcommand: self.subcommand.to_string(),
            params: self.params,
            seed: self.seed,
            inputs: self.inputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?,
            outputs: outputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_ms: self.started.elapsed().as_millis(),
        };
        let body = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::new(ErrorKind::Data, format!("manifest: {e}")))?;
        std::fs::write(manifest_path, body).map_err(|e| io_err(manifest_path, e))
    }
}

/// `<out>.manifest.json` next to the artifact.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}
