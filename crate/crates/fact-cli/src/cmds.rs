//! One function per subcommand.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde_json::json;

use fact_core::annotate::{annotate_corpus, default_annotators, parse_annotator_config, Annotator};
use fact_core::baselines::{BaselineError, DummyModel, KnnModel};
use fact_core::grammar::{generate, GenConfig, GenError};
use fact_core::metrics::{evaluate, MetricError, MetricReport};
use fact_core::oeis;
use fact_core::record::{Category, SequenceRecord, Source};
use fact_core::tasks::{
    build_continuation, build_multiclass, build_nspp, build_ovr, build_similarity,
    build_unmasking, split, GapPolicy, PredictionRecord, SplitSpec, TaskError, TaskInstance,
    TaskKind,
};

use crate::io::{
    for_each_line, manifest_path_for, read_jsonl, write_jsonl, JsonlWriter, ManifestBuilder,
};
use crate::{
    BaselineArgs, CliError, ErrorKind, EvalArgs, GenerateArgs, IngestArgs, IngestFormat,
    SplitArgs, TasksArgs,
};

fn config(msg: impl Into<String>) -> CliError {
    CliError::new(ErrorKind::Config, msg)
}

fn data(msg: impl Into<String>) -> CliError {
    CliError::new(ErrorKind::Data, msg)
}

fn from_gen_error(e: GenError) -> CliError {
    match e {
        GenError::GenerationStarved { .. } => CliError::new(ErrorKind::Starved, e.to_string()),
        GenError::MetaCategory(_) | GenError::InvalidConfig(_) | GenError::Grammar(_) => {
            config(e.to_string())
        }
    }
}

fn from_task_error(e: TaskError) -> CliError {
    match e {
        TaskError::BadRatios | TaskError::BadMaskProb(_) => config(e.to_string()),
        _ => data(e.to_string()),
    }
}

fn from_metric_error(e: MetricError) -> CliError {
    data(e.to_string())
}

fn from_baseline_error(e: BaselineError) -> CliError {
    match e {
        BaselineError::KTooLarge { .. } => config(e.to_string()),
        _ => data(e.to_string()),
    }
}

pub fn cmd_generate(args: &GenerateArgs, seed: u64) -> Result<(), CliError> {
    let category: Category = args.category.parse().map_err(config)?;
    let config = GenConfig {
        count: args.count,
        terms_per_sequence: args.terms,
        len_min: args.len_min,
        len_max: args.len_max,
        seed,
        ..GenConfig::default()
    };
    let generated = generate(category, &config).map_err(from_gen_error)?;
    write_jsonl(&args.out, &generated.records)?;
    let params = json!({
        "category": args.category,
        "count": args.count,
        "terms": args.terms,
        "len_min": args.len_min,
        "len_max": args.len_max,
        "skipped_slots": generated.skipped.len(),
        "out": args.out.display().to_string(),
    });
    ManifestBuilder::new("generate", params, Some(seed))
        .write(&manifest_path_for(&args.out), &[&args.out])
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<(), CliError> {
    let mut writer = JsonlWriter::create(&args.out)?;
    let mut ingested = 0usize;
    let mut skipped = 0usize;
    match args.format {
        IngestFormat::Stripped => {
            for_each_line(&args.input, |lineno, line| {
                if line.starts_with('#') {
                    return Ok(());
                }
                let (id, values) = oeis::parse_stripped(line)
                    .map_err(|e| data(format!("{}:{lineno}: {e}", args.input.display())))?;
                if values.is_empty() {
                    skipped += 1;
                    return Ok(());
                }
                let record = SequenceRecord {
                    id,
                    source: Source::Oeis,
                    values,
                    formula: None,
                    formula_length: None,
                    categories: Default::default(),
                    offset: 0,
                    bounded_by: None,
                };
                ingested += 1;
                writer.write(&record)
            })?;
        }
        IngestFormat::Jsonl => {
            for_each_line(&args.input, |lineno, line| {
                let entry = oeis::parse_entry_jsonl(line)
                    .map_err(|e| data(format!("{}:{lineno}: {e}", args.input.display())))?;
                match oeis::to_record(&entry) {
                    Ok(record) => {
                        ingested += 1;
                        writer.write(&record)
                    }
                    Err(_) => {
                        skipped += 1;
                        Ok(())
                    }
                }
            })?;
        }
    }
    writer.finish()?;
    let params = json!({
        "input": args.input.display().to_string(),
        "format": args.format.name(),
        "ingested": ingested,
        "skipped": skipped,
        "out": args.out.display().to_string(),
    });
    let mut m = ManifestBuilder::new("ingest-oeis", params, None);
    m.input(&args.input);
    m.write(&manifest_path_for(&args.out), &[&args.out])
}

pub fn cmd_annotate(args: &crate::AnnotateArgs) -> Result<(), CliError> {
    let annotators: Vec<Annotator> = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| crate::io::io_err(path, e))?;
            parse_annotator_config(&text).map_err(|e| config(e.to_string()))?
        }
        None => default_annotators(),
    };
    let mut records: Vec<SequenceRecord> = read_jsonl(&args.input)?;
    let entries: HashMap<String, oeis::OeisEntry> = match &args.entries {
        Some(path) => {
            let mut map = HashMap::new();
            for_each_line(path, |lineno, line| {
                let entry = oeis::parse_entry_jsonl(line)
                    .map_err(|e| data(format!("{}:{lineno}: {e}", path.display())))?;
                map.insert(entry.oeis_id.clone(), entry);
                Ok(())
            })?;
            map
        }
        None => HashMap::new(),
    };
    annotate_corpus(&mut records, &entries, &annotators);
    write_jsonl(&args.out, &records)?;
    let params = json!({
        "input": args.input.display().to_string(),
        "entries": args.entries.as_ref().map(|p| p.display().to_string()),
        "config": args.config.as_ref().map(|p| p.display().to_string()),
        "annotators": annotators.len(),
        "out": args.out.display().to_string(),
    });
    let mut m = ManifestBuilder::new("annotate", params, None);
    m.input(&args.input);
    if let Some(p) = &args.entries {
        m.input(p);
    }
    m.write(&manifest_path_for(&args.out), &[&args.out])
}

/// Three parts split synthetic records only; the fourth part requests the
/// organic test_oeis set as well.
fn parse_ratios(text: &str) -> Result<Vec<u32>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(config(format!("ratios must look like 9:1:1:1 or 9:1:1, got `{text}`")));
    }
    parts
        .into_iter()
        .map(|part| {
            part.parse()
                .map_err(|_| config(format!("ratio component `{part}` is not an integer")))
        })
        .collect()
}

pub fn cmd_split(args: &SplitArgs, seed: u64) -> Result<(), CliError> {
    let ratios = parse_ratios(&args.ratios)?;
    let mut records: Vec<SequenceRecord> = Vec::new();
    for input in &args.input {
        records.extend(read_jsonl::<SequenceRecord>(input)?);
    }
    let spec = SplitSpec { ratios, seed, stratify_by_category: !args.no_stratify };
    let out = split(records, &spec).map_err(from_task_error)?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| crate::io::io_err(&args.out_dir, e))?;
    let files = [
        ("train.jsonl", &out.train),
        ("val.jsonl", &out.val),
        ("test_synth.jsonl", &out.test_synth),
        ("test_oeis.jsonl", &out.test_oeis),
    ];
    let mut paths: Vec<PathBuf> = Vec::new();
    for (name, records) in files {
        let path = args.out_dir.join(name);
        write_jsonl(&path, records)?;
        paths.push(path);
    }
    let params = json!({
        "input": args.input.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "ratios": args.ratios,
        "stratify": !args.no_stratify,
        "out_dir": args.out_dir.display().to_string(),
        "sizes": {
            "train": out.train.len(),
            "val": out.val.len(),
            "test_synth": out.test_synth.len(),
            "test_oeis": out.test_oeis.len(),
        },
    });
    let mut m = ManifestBuilder::new("split", params, Some(seed));
    for input in &args.input {
        m.input(input);
    }
    let path_refs: Vec<&Path> = paths.iter().map(PathBuf::as_path).collect();
    m.write(&args.out_dir.join("manifest.json"), &path_refs)
}

fn parse_task(name: &str) -> Result<TaskKind, CliError> {
    TaskKind::ALL
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| {
            let names: Vec<&str> = TaskKind::ALL.iter().map(|k| k.name()).collect();
            config(format!("unknown task `{name}`; expected one of {}", names.join(", ")))
        })
}

pub fn cmd_tasks(args: &TasksArgs, seed: u64) -> Result<(), CliError> {
    let task = parse_task(&args.task)?;
    let mut records: Vec<SequenceRecord> = read_jsonl(&args.input)?;

    let scope_category: Option<Category> = match &args.scope_category {
        Some(name) => {
            if matches!(task, TaskKind::ClassifyOvr | TaskKind::ClassifyMulti) {
                return Err(config(format!(
                    "--scope-category does not apply to {}",
                    task.name()
                )));
            }
            Some(name.parse().map_err(config)?)
        }
        None => None,
    };
    if let Some(cat) = scope_category {
        records.retain(|r| r.level(cat) >= 3);
    }

    let instances: Vec<TaskInstance> = match task {
        TaskKind::ClassifyOvr => {
            let category: Category = args
                .category
                .as_ref()
                .ok_or_else(|| config("classify_ovr requires --category"))?
                .parse()
                .map_err(config)?;
            build_ovr(&records, category, args.window, args.per_side, seed)
                .map_err(from_task_error)?
        }
        TaskKind::ClassifyMulti => {
            let instances = build_multiclass(&records, args.window);
            if instances.is_empty() {
                return Err(data("no records produced multilabel instances"));
            }
            instances
        }
        TaskKind::Nspp => {
            let gap_policy = match args.gap_policy.as_str() {
                "aligned" => GapPolicy::Aligned,
                "random" => GapPolicy::Random,
                other => return Err(config(format!("unknown gap policy `{other}`"))),
            };
            build_nspp(&records, args.window, gap_policy, seed, scope_category)
                .map_err(from_task_error)?
        }
        TaskKind::Continuation => {
            build_continuation(&records, args.window, scope_category).map_err(from_task_error)?
        }
        TaskKind::Unmasking => {
            build_unmasking(&records, args.window, args.mask_prob, seed, scope_category)
                .map_err(from_task_error)?
        }
        TaskKind::Similarity => {
            build_similarity(&records, args.per_category, args.window, seed, scope_category)
                .map_err(from_task_error)?
        }
    };
    write_jsonl(&args.out, &instances)?;
    let params = json!({
        "task": task.name(),
        "input": args.input.display().to_string(),
        "window": args.window,
        "category": args.category,
        "scope_category": args.scope_category,
        "per_side": args.per_side,
        "gap_policy": args.gap_policy,
        "mask_prob": args.mask_prob,
        "per_category": args.per_category,
        "instances": instances.len(),
        "out": args.out.display().to_string(),
    });
    let mut m = ManifestBuilder::new("tasks", params, Some(seed));
    m.input(&args.input);
    m.write(&manifest_path_for(&args.out), &[&args.out])
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<(), CliError> {
    let train: Vec<TaskInstance> = read_jsonl(&args.train)?;
    let test: Vec<TaskInstance> = read_jsonl(&args.test)?;
    let preds: Vec<PredictionRecord> = match args.model.as_str() {
        "dummy" => {
            let mut model = DummyModel::new();
            model.fit(&train).map_err(from_baseline_error)?;
            model.predict(&test).map_err(from_baseline_error)?
        }
        "knn" => {
            let model = KnnModel::fit(&train, args.k).map_err(from_baseline_error)?;
            model.predict(&test).map_err(from_baseline_error)?
        }
        other => return Err(config(format!("unknown model `{other}`; expected dummy or knn"))),
    };
    write_jsonl(&args.out, &preds)?;
    let params = json!({
        "model": args.model,
        "train": args.train.display().to_string(),
        "test": args.test.display().to_string(),
        "k": args.k,
        "predictions": preds.len(),
        "out": args.out.display().to_string(),
    });
    let mut m = ManifestBuilder::new("baseline", params, None);
    m.input(&args.train);
    m.input(&args.test);
    m.write(&manifest_path_for(&args.out), &[&args.out])
}

/// Renders the table through one buffered write and ignores a closed pipe
/// (`fact eval ... | head` must not panic).
fn print_report_table(reports: &[MetricReport]) {
    use std::fmt::Write as _;
    let mut table = String::new();
    let _ = writeln!(table, "{:<24} {:>12} {:>8}", "metric", "value", "n");
    for report in reports {
        let _ = writeln!(table, "{:<24} {:>12.6} {:>8}", report.metric, report.value, report.n);
        if let Some(per_category) = &report.per_category {
            for (category, score) in per_category {
                let _ = writeln!(
                    table,
                    "  {:<22} {:>12.6} {:>8}",
                    category.name(),
                    score.value,
                    score.n
                );
            }
        }
    }
    let _ = std::io::Write::write_all(&mut std::io::stdout(), table.as_bytes());
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let instances: Vec<TaskInstance> = read_jsonl(&args.tasks)?;
    let preds: Vec<PredictionRecord> = read_jsonl(&args.preds)?;
    let reports = evaluate(&instances, &preds, args.k).map_err(from_metric_error)?;
    print_report_table(&reports);
    let body = serde_json::to_string_pretty(&reports)
        .map_err(|e| data(format!("serialize reports: {e}")))?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| crate::io::io_err(dir, e))?;
    }
    std::fs::write(&args.out, body).map_err(|e| crate::io::io_err(&args.out, e))?;
    let params = json!({
        "tasks": args.tasks.display().to_string(),
        "preds": args.preds.display().to_string(),
        "k": args.k,
        "out": args.out.display().to_string(),
    });
    let mut m = ManifestBuilder::new("eval", params, None);
    m.input(&args.tasks);
    m.input(&args.preds);
    m.write(&manifest_path_for(&args.out), &[&args.out])
}
