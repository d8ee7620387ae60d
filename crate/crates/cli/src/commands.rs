use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use femkit::augmentation::{
    export_review_sample, write_quarantine, AugmentError, Augmenter, CompletionCache, HttpClient, LlmClient,
    MockClient, PipelineOutput, PromptSet,
};
use femkit::corpus::{load_corpus, save_corpus, split_corpus, Article, Corpus, FrameElement, Splits};
use femkit::encoder::ElementMask;
use femkit::evalkit::fixtures::{self, case_study, SINGLE_ARTICLE_SIMILARITY};
use femkit::evalkit::report::{self as artifacts};
use femkit::evalkit::{
    case_compare, evaluate, plots, run_ablation, similarity_report, AblationPlan, AblationResults, ConfusionCounts,
    MetricSet, Representation, SimilarityCondition, SimilarityOptions, SimilarityReport,
};
use femkit::fem::{load_checkpoint, save_checkpoint, train, write_history_csv, FemError, FemModel};
use femkit::synthetic::{synthetic_config, synthetic_corpus};
use log::{info, warn};
use serde::Serialize;

use crate::cli::{Command, DataArgs, RepresentationArg};
use crate::config::{ClientKind, DataPaths, Overrides, RunConfig};
use crate::error::CliError;
use crate::manifest::{self, Manifest};

/// What one command run wrote, for the manifest.
struct Run<'a> {
    command: &'a str,
    config: &'a RunConfig,
    config_path: Option<&'a Path>,
    started_at: u64,
    inputs: Vec<PathBuf>,
    outputs: Vec<String>,
    note: Option<String>,
}

impl<'a> Run<'a> {
    fn new(command: &'a str, config: &'a RunConfig, config_path: Option<&'a Path>) -> Self {
        Run {
            command,
            config,
            config_path,
            started_at: manifest::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            note: None,
        }
    }

    fn dir(&self) -> &Path {
        &self.config.output
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir().join(name)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::internal(e.to_string()))?;
        fs::write(self.path(name), text + "\n")?;
        Ok(())
    }

    fn finish(self) -> Result<(), CliError> {
        let mut inputs: Vec<PathBuf> = self.config_path.map(Path::to_path_buf).into_iter().collect();
        inputs.extend(self.inputs);
        let m = Manifest {
            command: self.command,
            femkit_version: env!("CARGO_PKG_VERSION"),
            seed: self.config.seed,
            started_at: self.started_at,
            finished_at: manifest::now(),
            config: self.config,
            inputs: manifest::hash_inputs(&inputs)?,
            outputs: self.outputs,
            note: self.note,
        };
        manifest::write(&self.config.output, &m)
    }
}

pub fn run(command: Command, global: crate::cli::Global) -> Result<(), CliError> {
    if let Command::Report { run_dir } = &command {
        return report(run_dir);
    }
    let name = command.name();
    let mut data = DataPaths::default();
    match &command {
        Command::Augment { input, .. } => data.articles = input.clone(),
        Command::Train(d) | Command::Ablate { data: d, .. } => set_data(&mut data, d),
        Command::Evaluate { checkpoint, corpus, .. } | Command::Similarity { checkpoint, corpus, .. } => {
            data.checkpoint = checkpoint.clone();
            data.corpus = corpus.clone();
        }
        Command::Compare {
            checkpoint,
            article_a,
            article_b,
            ..
        } => {
            data.checkpoint = checkpoint.clone();
            for p in [article_a, article_b].into_iter().flatten() {
                if !p.exists() {
                    return Err(CliError::usage(format!("input path {} does not exist", p.display())));
                }
            }
        }
        Command::Synth | Command::Report { .. } => {}
    }
    let overrides = Overrides {
        seed: global.seed,
        output: global.output,
        client: global.client,
        data,
        default_output: PathBuf::from(format!("femkit-out/{name}")),
    };
    let config = RunConfig::load(global.config.as_deref(), overrides)?;
    let cfg_path = global.config.as_deref();
    match command {
        Command::Augment { review_fraction, .. } => augment(&config, cfg_path, review_fraction),
        Command::Synth => synth(&config, cfg_path),
        Command::Train(_) => train_cmd(&config, cfg_path),
        Command::Evaluate { corpus, mask, .. } => evaluate_cmd(&config, cfg_path, corpus, &mask),
        Command::Ablate { plan, fixtures, .. } => ablate(&config, cfg_path, &plan, fixtures.as_deref()),
        Command::Similarity {
            corpus,
            fixtures,
            representation,
            ..
        } => similarity(&config, cfg_path, corpus, fixtures.as_deref(), representation),
        Command::Compare {
            article_a,
            article_b,
            fixtures,
            ..
        } => compare(&config, cfg_path, article_a, article_b, fixtures.as_deref()),
        Command::Report { .. } => unreachable!("handled above"),
    }
}

fn set_data(data: &mut DataPaths, d: &DataArgs) {
    data.corpus = d.corpus.clone();
    data.train = d.train.clone();
    data.val = d.val.clone();
    data.test = d.test.clone();
}

fn build_client(config: &RunConfig) -> Result<Box<dyn LlmClient>, CliError> {
    match config.client {
        ClientKind::Mock => Ok(Box::new(MockClient::new(config.seed))),
        ClientKind::Http => HttpClient::from_env()
            .map(|c| Box::new(c) as Box<dyn LlmClient>)
            .map_err(|e| CliError::usage(format!("http client: {e}"))),
    }
}

fn create_output(config: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&config.output).map_err(|e| CliError::usage(format!("output {}: {e}", config.output.display())))
}

fn read_articles(path: &Path) -> Result<Vec<Article>, CliError> {
    let file = File::open(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let mut articles = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let article: Article =
            serde_json::from_str(&line).map_err(|e| CliError::usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        article
            .validate()
            .map_err(|e| CliError::usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        articles.push(article);
    }
    Ok(articles)
}

fn read_article(path: &Path) -> Result<Article, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let article: Article =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    article
        .validate()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(article)
}

fn augment(config: &RunConfig, cfg_path: Option<&Path>, review_fraction: Option<f64>) -> Result<(), CliError> {
    let input = config
        .data
        .articles
        .clone()
        .ok_or_else(|| CliError::usage("augment needs --input or [data] articles"))?;
    let review_fraction = review_fraction.or(config.review_fraction);
    if let Some(f) = review_fraction {
        if !(f > 0.0 && f <= 1.0) {
            return Err(CliError::usage(format!("review fraction {f} is outside (0, 1]")));
        }
    }
    let articles = read_articles(&input)?;
    let client = build_client(config)?;
    let prompts = match &config.prompts_dir {
        Some(dir) => PromptSet::load_dir(dir)?,
        None => PromptSet::default(),
    };
    let cache = match &config.cache_dir {
        Some(dir) => Some(CompletionCache::on_disk(dir)?),
        None => None,
    };
    let mut augmenter = Augmenter::new(client.as_ref(), config.augmentation.clone())?.with_prompts(prompts);
    if let Some(cache) = &cache {
        augmenter = augmenter.with_cache(cache);
    }

    let (output, degraded) = match augmenter.build_paired_corpus(&articles) {
        Ok(out) => (out, None),
        Err(AugmentError::BelowFloor { rate, floor, output }) => (
            *output,
            Some(format!(
                "only {:.1}% of articles were paired (floor {:.1}%)",
                rate * 100.0,
                floor * 100.0
            )),
        ),
        Err(e) => return Err(e.into()),
    };
    create_output(config)?;
    let mut run = Run::new("augment", config, cfg_path);
    run.inputs.push(input);
    write_augment_outputs(&mut run, &output, review_fraction)?;
    info!(
        "{} of {} articles paired, {} quarantined",
        output.paired,
        output.articles,
        output.quarantine.len()
    );
    run.note = degraded.clone();
    run.finish()?;
    println!(
        "{} samples, {} quarantined",
        output.corpus.len(),
        output.quarantine.len()
    );
    match degraded {
        Some(msg) => Err(CliError::degraded(msg)),
        None => Ok(()),
    }
}

fn write_augment_outputs(run: &mut Run, output: &PipelineOutput, review_fraction: Option<f64>) -> Result<(), CliError> {
    let corpus_path = run.path("corpus.jsonl");
    save_corpus(&output.corpus, &corpus_path)?;
    let sidecar = "corpus.meta.json";
    if run.dir().join(sidecar).exists() {
        run.outputs.push(sidecar.into());
    }
    let q = BufWriter::new(File::create(run.path("quarantine.jsonl"))?);
    write_quarantine(&output.quarantine, q)?;
    if let Some(fraction) = review_fraction {
        let altered = output.corpus.samples.iter().any(|s| s.derived_from.is_some());
        if altered {
            let file = BufWriter::new(File::create(run.path("review.md"))?);
            export_review_sample(&output.corpus, fraction, run.config.seed, file)?;
        } else {
            warn!("no altered samples to review");
        }
    }
    Ok(())
}

fn synth(config: &RunConfig, cfg_path: Option<&Path>) -> Result<(), CliError> {
    create_output(config)?;
    let mut run = Run::new("synth", config, cfg_path);
    let s = synthetic_corpus(config.seed);
    save_corpus(&s.corpus, run.path("corpus.jsonl"))?;
    if run.dir().join("corpus.meta.json").exists() {
        run.outputs.push("corpus.meta.json".into());
    }

    let mut fem =
        toml::Table::try_from(synthetic_config(config.seed)).map_err(|e| CliError::internal(e.to_string()))?;
    fem.remove("seed");
    let encoder = femkit::encoder::SegmentEncoder::spec(&s.encoder);
    let mut doc = toml::Table::new();
    doc.insert("schema_version".into(), crate::config::SCHEMA_VERSION.into());
    doc.insert("seed".into(), (config.seed as i64).into());
    let mut data = toml::Table::new();
    // The synthetic task is a fitting check: every split is the full corpus.
    for key in ["train", "val", "test"] {
        data.insert(key.into(), "corpus.jsonl".into());
    }
    doc.insert("data".into(), data.into());
    doc.insert(
        "encoder".into(),
        toml::Value::try_from(&encoder).map_err(|e| CliError::internal(e.to_string()))?,
    );
    doc.insert("fem".into(), fem.into());
    let text = toml::to_string(&doc).map_err(|e| CliError::internal(e.to_string()))?;
    fs::write(run.path("config.toml"), text)?;
    run.finish()?;
    println!("{}", config.output.join("config.toml").display());
    Ok(())
}

fn load(path: &Path) -> Result<Corpus, CliError> {
    Ok(load_corpus(path)?)
}

fn load_splits(config: &RunConfig) -> Result<(Splits, Vec<PathBuf>), CliError> {
    let d = &config.data;
    if let (Some(tr), Some(va), Some(te)) = (&d.train, &d.val, &d.test) {
        let splits = Splits {
            train: load(tr)?,
            val: load(va)?,
            test: load(te)?,
        };
        let mut inputs = vec![tr.clone()];
        for p in [va, te] {
            if !inputs.contains(p) {
                inputs.push(p.clone());
            }
        }
        return Ok((splits, inputs));
    }
    let path = d
        .corpus
        .clone()
        .ok_or_else(|| CliError::usage("no data: give --corpus or --train/--val/--test"))?;
    let corpus = load(&path)?;
    Ok((split_corpus(&corpus, &config.split)?, vec![path]))
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    #[serde(flatten)]
    metrics: &'a MetricSet,
    counts: &'a ConfusionCounts,
    mask: String,
    corpus: String,
    samples: usize,
}

fn write_metrics(
    run: &mut Run,
    corpus: &Corpus,
    mask: &ElementMask,
    counts: &ConfusionCounts,
    metrics: &MetricSet,
) -> Result<(), CliError> {
    run.write_json(
        artifacts::METRICS_JSON,
        &MetricsFile {
            metrics,
            counts,
            mask: mask.to_string(),
            corpus: corpus.name.clone(),
            samples: corpus.len(),
        },
    )
}

fn train_cmd(config: &RunConfig, cfg_path: Option<&Path>) -> Result<(), CliError> {
    let (splits, inputs) = load_splits(config)?;
    let encoder = config.encoder.build()?;
    create_output(config)?;
    let mut run = Run::new("train", config, cfg_path);
    run.inputs = inputs;
    let ckpt = config.output.join(artifacts::CHECKPOINT_DIR);

    match train(encoder, &splits.train, &splits.val, &config.fem) {
        Ok(out) => {
            save_checkpoint(&ckpt, &out.model, &config.fem, &out.history, out.best_epoch)?;
            run.outputs.push(artifacts::CHECKPOINT_DIR.into());
            write_history_csv(&out.history, File::create(run.path(artifacts::HISTORY_CSV))?)?;
            let trace = out.history.f1_trace();
            if !trace.is_empty() {
                let path = run.path(artifacts::F1_CURVE_SVG);
                plots::f1_curves(&path, "Validation F1", &[("validation".into(), trace)])?;
            }
            let mask = config.fem.element_mask;
            let (counts, metrics) = evaluate(&out.model, &splits.test, &mask)?;
            write_metrics(&mut run, &splits.test, &mask, &counts, &metrics)?;
            run.finish()?;
            println!(
                "best epoch {}, test F1 {:.4}",
                out.best_epoch.map_or("-".into(), |e| e.to_string()),
                metrics.f1
            );
            Ok(())
        }
        Err(FemError::Diverged {
            epoch,
            checkpoint,
            history,
        }) => {
            let best = history.epochs.last().map(|e| e.epoch);
            save_checkpoint(&ckpt, &checkpoint, &config.fem, &history, best)?;
            run.outputs.push(artifacts::CHECKPOINT_DIR.into());
            write_history_csv(&history, File::create(run.path(artifacts::HISTORY_CSV))?)?;
            let msg = format!("training diverged in epoch {epoch}; saved the last finite model");
            run.note = Some(msg.clone());
            run.finish()?;
            Err(CliError::degraded(msg))
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_mask(text: &str) -> Result<ElementMask, CliError> {
    let mask = match text {
        "all" => ElementMask::all(),
        "text-only" => ElementMask::text_only(),
        "frames-only" => ElementMask::frames_only(),
        bits if bits.len() == 5 && bits.chars().all(|c| c == '0' || c == '1') => {
            let mut m = [false; 5];
            for (slot, c) in m.iter_mut().zip(bits.chars()) {
                *slot = c == '1';
            }
            ElementMask(m)
        }
        other => {
            let without = other
                .strip_prefix("minus-")
                .and_then(|name| FrameElement::ALL.into_iter().find(|e| e.short_name() == name));
            match without {
                Some(e) => ElementMask::all().without(e),
                None => return Err(CliError::usage(format!("unknown mask `{other}`"))),
            }
        }
    };
    if !mask.0.iter().any(|&b| b) {
        return Err(CliError::usage("mask disables every segment"));
    }
    Ok(mask)
}

fn checkpoint_dir(config: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = config
        .data
        .checkpoint
        .clone()
        .ok_or_else(|| CliError::usage("a checkpoint is required (--checkpoint or [data] checkpoint)"))?;
    let nested = dir.join(artifacts::CHECKPOINT_DIR);
    Ok(if nested.join("config.json").is_file() {
        nested
    } else {
        dir
    })
}

fn load_model(config: &RunConfig) -> Result<(FemModel, PathBuf), CliError> {
    let dir = checkpoint_dir(config)?;
    let (model, _) = load_checkpoint(&dir)?;
    Ok((model, dir))
}

fn eval_corpus_path(config: &RunConfig, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
    flag.or_else(|| config.data.test.clone())
        .or_else(|| config.data.corpus.clone())
        .ok_or_else(|| CliError::usage("no corpus: give --corpus or [data] test/corpus"))
}

fn evaluate_cmd(
    config: &RunConfig,
    cfg_path: Option<&Path>,
    corpus: Option<PathBuf>,
    mask: &str,
) -> Result<(), CliError> {
    let mask = parse_mask(mask)?;
    let (model, ckpt) = load_model(config)?;
    let path = eval_corpus_path(config, corpus)?;
    let corpus = load(&path)?;
    let (counts, metrics) = evaluate(&model, &corpus, &mask)?;
    create_output(config)?;
    let mut run = Run::new("evaluate", config, cfg_path);
    run.inputs = vec![ckpt, path];
    write_metrics(&mut run, &corpus, &mask, &counts, &metrics)?;
    run.finish()?;
    println!(
        "accuracy {:.4} precision {:.4} recall {:.4} F1 {:.4}",
        metrics.accuracy, metrics.precision, metrics.recall, metrics.f1
    );
    Ok(())
}

fn ablate(config: &RunConfig, cfg_path: Option<&Path>, plan: &str, fixture: Option<&str>) -> Result<(), CliError> {
    let mut inputs = Vec::new();
    let results = match fixture.or(config.fixtures.then_some("table2")) {
        Some(key) => {
            let table = fixtures::results(key).ok_or_else(|| {
                CliError::usage(format!("unknown results fixture `{key}` (expected table2 to table5)"))
            })?;
            AblationResults::from_fixture(table)
        }
        None => {
            let plan = if plan == "default" {
                AblationPlan::default()
            } else {
                let text = fs::read_to_string(plan).map_err(|e| CliError::usage(format!("plan {plan}: {e}")))?;
                inputs.push(PathBuf::from(plan));
                serde_json::from_str(&text).map_err(|e| CliError::usage(format!("plan {plan}: {e}")))?
            };
            let (splits, data_inputs) = load_splits(config)?;
            inputs.extend(data_inputs);
            let encoder = config.encoder.build()?;
            run_ablation(encoder, &splits, &config.fem, &plan)?
        }
    };
    create_output(config)?;
    let mut run = Run::new("ablate", config, cfg_path);
    run.inputs = inputs;
    results.write_csv(File::create(run.path(artifacts::ABLATION_CSV))?)?;
    run.write_json(artifacts::ABLATION_JSON, &results)?;
    let traces: Vec<(String, Vec<f64>)> = results
        .rows
        .iter()
        .filter(|r| !r.f1_trace().is_empty())
        .map(|r| (r.name.clone(), r.f1_trace().to_vec()))
        .collect();
    if !traces.is_empty() {
        results.write_traces_csv(File::create(run.path(artifacts::ABLATION_TRACES_CSV))?)?;
        plots::f1_curves(
            &run.path(artifacts::ABLATION_SVG),
            "Validation F1 by configuration",
            &traces,
        )?;
    }
    let failed: Vec<&str> = results
        .rows
        .iter()
        .filter(|r| r.metrics().is_none())
        .map(|r| r.name.as_str())
        .collect();
    if !failed.is_empty() {
        run.note = Some(format!("failed configurations: {}", failed.join(", ")));
    }
    run.finish()?;
    for row in &results.rows {
        match row.metrics() {
            Some(m) => println!("{:<16} F1 {:.4}", row.name, m.f1),
            None => println!("{:<16} failed", row.name),
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::degraded(format!(
            "failed configurations: {}",
            failed.join(", ")
        )))
    }
}

fn similarity(
    config: &RunConfig,
    cfg_path: Option<&Path>,
    corpus: Option<PathBuf>,
    fixture: Option<&str>,
    representation: RepresentationArg,
) -> Result<(), CliError> {
    let mut inputs = Vec::new();
    let report = match fixture.or(config.fixtures.then_some("table6")) {
        Some("table6") => SimilarityReport::from_fixture("table6", &SINGLE_ARTICLE_SIMILARITY),
        Some(other) => {
            return Err(CliError::usage(format!(
                "unknown similarity fixture `{other}` (expected table6)"
            )))
        }
        None => {
            let (model, ckpt) = load_model(config)?;
            let path = eval_corpus_path(config, corpus)?;
            let corpus = load(&path)?;
            inputs = vec![ckpt, path];
            let options = SimilarityOptions {
                representation: match representation {
                    RepresentationArg::HiddenState => Representation::HiddenState,
                    RepresentationArg::SegmentEmbeddings => Representation::SegmentEmbeddings,
                },
                ..SimilarityOptions::default()
            };
            similarity_report(&model, &corpus, &SimilarityCondition::defaults(), &options)?
        }
    };
    create_output(config)?;
    let mut run = Run::new("similarity", config, cfg_path);
    run.inputs = inputs;
    run.write_json(artifacts::SIMILARITY_JSON, &report)?;
    report.write_csv(File::create(run.path(artifacts::SIMILARITY_CSV))?)?;
    let points: Vec<(String, f64, f64)> = report
        .rows
        .iter()
        .filter_map(|r| Some((r.condition.clone(), r.similarity?, r.f1?)))
        .collect();
    if !points.is_empty() {
        plots::similarity_scatter(
            &run.path(artifacts::SIMILARITY_SVG),
            "Pair similarity against F1",
            &points,
        )?;
    }
    run.finish()?;
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    for r in &report.rows {
        println!(
            "{:<24} similarity {:>8} F1 {:>8}",
            r.condition,
            fmt(r.similarity),
            fmt(r.f1)
        );
    }
    println!("spearman {}", fmt(report.spearman));
    Ok(())
}

#[derive(Serialize)]
struct CaseFixture {
    source: &'static str,
    article_similarity: f64,
    element_similarity: f64,
    political_problem: &'static str,
    satirical_problem: &'static str,
}

const CASE_FIXTURE: CaseFixture = CaseFixture {
    source: "case-study",
    article_similarity: case_study::ARTICLE_SIMILARITY,
    element_similarity: case_study::ELEMENT_SIMILARITY,
    political_problem: case_study::POLITICAL_PROBLEM,
    satirical_problem: case_study::SATIRICAL_PROBLEM,
};

fn fixture_markdown() -> String {
    let f = &CASE_FIXTURE;
    format!(
        "## Reference values\n\n| | political | satirical |\n|---|---|---|\n| problem definition | {} | {} |\n\n\
         | similarity | value |\n|---|---|\n| article text | {} |\n| frame elements | {} |\n",
        f.political_problem, f.satirical_problem, f.article_similarity, f.element_similarity
    )
}

fn compare(
    config: &RunConfig,
    cfg_path: Option<&Path>,
    article_a: Option<PathBuf>,
    article_b: Option<PathBuf>,
    fixture: Option<&str>,
) -> Result<(), CliError> {
    let fixture = match fixture {
        None => false,
        Some("case-study") => true,
        Some(other) => {
            return Err(CliError::usage(format!(
                "unknown compare fixture `{other}` (expected case-study)"
            )))
        }
    };
    let mut inputs = Vec::new();
    let articles = match (article_a, article_b) {
        (Some(a), Some(b)) => {
            let pair = (read_article(&a)?, read_article(&b)?);
            inputs = vec![a, b];
            Some(pair)
        }
        (None, None) if fixture => Some((
            Article::new("political", case_study::POLITICAL_EXCERPT).with_frame("political"),
            Article::new("satirical", case_study::SATIRICAL_EXCERPT).with_frame("semantic"),
        )),
        (None, None) => {
            return Err(CliError::usage(
                "compare needs --article-a and --article-b, or --fixtures case-study",
            ))
        }
        _ => return Err(CliError::usage("--article-a and --article-b go together")),
    };
    let computed = match (&articles, config.data.checkpoint.is_some()) {
        (Some((a, b)), true) => {
            let (model, ckpt) = load_model(config)?;
            inputs.push(ckpt);
            let client = build_client(config)?;
            Some(case_compare(a, b, &model, client.as_ref())?)
        }
        (_, false) if fixture => None,
        _ => {
            return Err(CliError::usage(
                "a checkpoint is required (--checkpoint or [data] checkpoint)",
            ))
        }
    };

    create_output(config)?;
    let mut run = Run::new("compare", config, cfg_path);
    run.inputs = inputs;
    let mut md = String::new();
    if let Some(report) = &computed {
        md.push_str(&report.to_markdown());
        run.write_json(artifacts::COMPARE_JSON, report)?;
    } else {
        md.push_str("# Case comparison: political vs satirical\n");
        run.write_json(artifacts::COMPARE_JSON, &CASE_FIXTURE)?;
    }
    if fixture {
        md.push('\n');
        md.push_str(&fixture_markdown());
    }
    fs::write(run.path(artifacts::COMPARE_MD), &md)?;
    run.finish()?;
    print!("{md}");
    Ok(())
}

fn report(run_dir: &Path) -> Result<(), CliError> {
    let text = artifacts::render_report(run_dir)?;
    let path = run_dir.join(artifacts::REPORT_MD);
    fs::write(&path, text)?;
    println!("{}", path.display());
    Ok(())
}
