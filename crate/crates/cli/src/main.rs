//! `onhold`: mine Java comments that wait on issue-tracker tickets, classify
//! them, and report the ones whose ticket is already resolved.
//!
//! Exit codes: 0 on success, 1 on a user error (bad flags, unreadable or
//! malformed input), 2 on an environment error (git, network, credentials,
//! unwritable output).

use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use onhold::config::{ProjectConfig, DEFAULT_SEED};
use onhold::dataset::{load_dataset, load_unlabeled, render_dataset, DatasetRow};
use onhold::its::{
    recommend, DiskCache, Gateway, IssueRecord, ItsError, OnHoldComment, Recommendation, TrackerEndpoint,
    UreqTransport, DEFAULT_CACHE_TTL,
};
use onhold::learner::Label;
use onhold::linker::{PatternSet, TrackerKind};
use onhold::miner::mine_repository;
use onhold::pipeline::{
    build_patterns, evaluate, prepare, render_comparisons_tsv, render_results_tsv, render_summary_tsv, Classifier,
    EvalConfig, LabeledComment, ProjectSpec, Variant, DEFAULT_VARIANTS,
};
use onhold::report::{render_report, ReportFormat};
use onhold::stats::{lifespan_stats, resolution_delay_stats, Distribution, RemovedOnHold, TimedLifecycle};
use onhold::text::{preprocess_all, Lemmatizer};

const MODEL_FORMAT: &str = "onhold-model/1";

#[derive(Parser)]
#[command(name = "onhold", version, about = "Find and check On-hold comments that wait on issue-tracker tickets")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Project config file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated `tracker[:key]` list, e.g. `jira:HADOOP,github`.
    /// Overrides the config's tracker and key.
    #[arg(long, global = true, value_delimiter = ',')]
    projects: Vec<String>,
    /// Lemma exception table (token TAB lemma) replacing the bundled one.
    #[arg(long, global = true)]
    lemma_table: Option<PathBuf>,
    /// Seed for every random choice. Defaults to the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Trace issue-referencing comments through a repository's history.
    Mine {
        #[arg(long)]
        repo: Option<PathBuf>,
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the issue references found in a dataset's comments.
    Detect {
        #[arg(long, required_unless_present = "dump_patterns")]
        dataset: Option<PathBuf>,
        /// Print the instantiated regular expressions and exit.
        #[arg(long)]
        dump_patterns: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a classifier on a labeled dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "ngram-auto")]
        variant: String,
        #[arg(long)]
        model: PathBuf,
    },
    /// Label a dataset's comments with a trained classifier.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Look up the issues of remaining On-hold comments.
    Check {
        /// Predictions or labeled dataset; OnHold rows not yet removed are checked.
        #[arg(long)]
        predictions: PathBuf,
        /// Read recorded responses named `{tracker}_{key}.json` instead of the network.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Cache directory for live lookups (overrides the config's).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Recommendations (JSON) destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the input rows with issue status columns filled in.
        #[arg(long)]
        annotate: Option<PathBuf>,
    },
    /// Cross-validate classifier variants and compare them.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_VARIANTS.map(String::from))]
        variants: Vec<String>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Build one vocabulary from the whole dataset instead of per fold.
        #[arg(long)]
        global_vocab: bool,
        /// Directory for results.tsv, summary.tsv and comparisons.tsv.
        /// Without it the summary goes to stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Summarize life spans and removal timing of labeled comments.
    Lifecycle {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render recommendations for maintainers.
    Report {
        #[arg(long)]
        recommendations: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    User(String),
    Env(String),
}

type Outcome<T> = Result<T, Failure>;

trait Classify<T> {
    fn user(self) -> Outcome<T>;
    fn env(self) -> Outcome<T>;
}

impl<T, E: Display> Classify<T> for Result<T, E> {
    fn user(self) -> Outcome<T> {
        self.map_err(|e| Failure::User(e.to_string()))
    }

    fn env(self) -> Outcome<T> {
        self.map_err(|e| Failure::Env(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    projects: Vec<ProjectSpec>,
    seed: u64,
    lemma_exceptions: Vec<(String, String)>,
    classifier: Classifier,
}

struct Context {
    config: Option<ProjectConfig>,
    projects: Vec<ProjectSpec>,
    lemmatizer: Lemmatizer,
    seed: u64,
}

impl Context {
    fn new(common: &Common) -> Outcome<Self> {
        let config = common.config.as_deref().map(ProjectConfig::load).transpose().user()?;
        let projects = if !common.projects.is_empty() {
            common.projects.iter().map(|p| p.parse()).collect::<Result<_, _>>().user()?
        } else if let Some(c) = &config {
            vec![ProjectSpec {
                tracker: c.tracker,
                key: c.project_key.clone(),
            }]
        } else {
            Vec::new()
        };
        let lemmatizer = match &common.lemma_table {
            Some(path) => Lemmatizer::from_file(path).user()?,
            None => Lemmatizer::default(),
        };
        let seed = common.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(DEFAULT_SEED);
        Ok(Self {
            config,
            projects,
            lemmatizer,
            seed,
        })
    }

    fn patterns(&self) -> Outcome<Vec<PatternSet>> {
        if self.projects.is_empty() {
            return Err(Failure::User("no project given; pass --projects or --config".into()));
        }
        build_patterns(&self.projects).user()
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Outcome<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())).env(),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_input(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::User(format!("{}: {e}", path.display())))
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn labeled_comments(rows: &[DatasetRow], ctx: &Context) -> Outcome<Vec<LabeledComment>> {
    let raw: Vec<(String, Label)> = rows
        .iter()
        .map(|r| (r.comment.clone(), r.label.expect("strict load requires labels")))
        .collect();
    let comments = prepare(&raw, &ctx.patterns()?, &ctx.lemmatizer);
    let on_hold = comments.iter().filter(|c| c.label == Label::OnHold).count();
    eprintln!(
        "{} OnHold / {} CrossReference ({} comments)",
        thousands(on_hold),
        thousands(comments.len() - on_hold),
        thousands(comments.len())
    );
    Ok(comments)
}

fn mine(ctx: &Context, repo: Option<PathBuf>, branch: Option<String>, out: Option<PathBuf>) -> Outcome<()> {
    let repo = repo
        .or_else(|| ctx.config.as_ref().map(|c| c.repo.clone()))
        .ok_or_else(|| Failure::User("no repository; pass --repo or --config".into()))?;
    let branch = branch
        .or_else(|| ctx.config.as_ref().map(|c| c.branch.clone()))
        .unwrap_or_else(|| "main".into());
    let patterns = ctx.patterns()?;
    let [patterns] = patterns.as_slice() else {
        return Err(Failure::User("mining takes exactly one project".into()));
    };
    let lifecycles = mine_repository(&repo, &branch, patterns).map_err(|e| match e {
        onhold::miner::MinerError::Git(m) => Failure::Env(m),
        other => Failure::User(other.to_string()),
    })?;
    log::info!("{} issue-referencing comments", lifecycles.len());
    let rows: Vec<DatasetRow> = lifecycles.iter().map(|lc| DatasetRow::from_lifecycle(lc, patterns)).collect();
    write_output(out.as_deref(), &render_dataset(&rows))
}

fn detect(ctx: &Context, dataset: Option<PathBuf>, dump_patterns: bool, out: Option<PathBuf>) -> Outcome<()> {
    let sets = ctx.patterns()?;
    let mut text = String::new();
    if dump_patterns {
        text.push_str("tracker\tproject_key\tkind\tpattern\n");
        for set in &sets {
            for p in set.detection_patterns() {
                let _ = writeln!(text, "{}\t{}\tdetection\t{p}", set.tracker(), set.project_key());
            }
            for (p, token) in set.abstraction_patterns() {
                let _ = writeln!(text, "{}\t{}\tabstraction:{token}\t{p}", set.tracker(), set.project_key());
            }
        }
        return write_output(out.as_deref(), &text);
    }
    let dataset = dataset.expect("clap requires --dataset");
    let rows = load_unlabeled(&dataset).user()?;
    text.push_str("file_path\tline\ttracker\tissue_key\tmatched_text\tstart\tend\n");
    for row in &rows {
        for set in &sets {
            for r in set.find_issue_references(&row.comment) {
                let _ = writeln!(
                    text,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    row.file_path,
                    row.line,
                    r.tracker,
                    r.key(),
                    r.matched_text,
                    r.span.0,
                    r.span.1
                );
            }
        }
    }
    write_output(out.as_deref(), &text)
}

fn train(ctx: &Context, dataset: PathBuf, variant: String, model: PathBuf) -> Outcome<()> {
    let variant: Variant = variant.parse().user()?;
    let rows = load_dataset(&dataset).user()?;
    let comments = labeled_comments(&rows, ctx)?;
    let refs: Vec<&LabeledComment> = comments.iter().collect();
    let config = EvalConfig {
        seed: ctx.seed,
        ..EvalConfig::default()
    };
    let source = dataset.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let classifier = Classifier::fit(&refs, &variant, &config, None, ctx.seed, &source).user()?;
    log::info!("trained {} with {} terms", classifier.variant, classifier.vocabulary.len());
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        projects: ctx.projects.clone(),
        seed: ctx.seed,
        lemma_exceptions: ctx.lemmatizer.exceptions().map(|(a, b)| (a.into(), b.into())).collect(),
        classifier,
    };
    let json = serde_json::to_string(&file).expect("model serializes");
    write_output(Some(&model), &json)
}

fn load_model(path: &Path) -> Outcome<(ModelFile, Lemmatizer)> {
    let file: ModelFile = serde_json::from_str(&read_input(path)?)
        .map_err(|e| Failure::User(format!("{}: not a model file: {e}", path.display())))?;
    if file.format != MODEL_FORMAT {
        return Err(Failure::User(format!("{}: unsupported model format {:?}", path.display(), file.format)));
    }
    let classifier = file.classifier.rebuild();
    if classifier.vocabulary.content_hash() != classifier.vocabulary_hash {
        return Err(Failure::User(format!("{}: vocabulary does not match its hash", path.display())));
    }
    let table: String = file.lemma_exceptions.iter().map(|(a, b)| format!("{a}\t{b}\n")).collect();
    let lemmatizer = Lemmatizer::from_table(&table).user()?;
    Ok((ModelFile { classifier, ..file }, lemmatizer))
}

fn classify(dataset: PathBuf, model: PathBuf, out: Option<PathBuf>) -> Outcome<()> {
    let (file, lemmatizer) = load_model(&model)?;
    let patterns = build_patterns(&file.projects).user()?;
    let mut rows = load_unlabeled(&dataset).user()?;
    for row in &mut rows {
        let tokens = preprocess_all(&row.comment, &patterns, &lemmatizer);
        let score = file.classifier.score(&tokens);
        row.label = Some(file.classifier.classify(&tokens));
        row.score = Some(score);
    }
    let on_hold = rows.iter().filter(|r| r.label == Some(Label::OnHold)).count();
    eprintln!("{} OnHold / {} CrossReference predicted", thousands(on_hold), thousands(rows.len() - on_hold));
    write_output(out.as_deref(), &render_dataset(&rows))
}

/// Which configured tracker a key belongs to: a Jira project whose key
/// prefixes it, otherwise the first Bugzilla or GitHub project.
fn tracker_for(key: &str, projects: &[ProjectSpec]) -> Option<TrackerKind> {
    let upper = key.to_ascii_uppercase();
    projects
        .iter()
        .find(|p| p.tracker == TrackerKind::Jira && upper.starts_with(&format!("{}-", p.key.to_ascii_uppercase())))
        .or_else(|| projects.iter().find(|p| p.tracker != TrackerKind::Jira))
        .map(|p| p.tracker)
}

fn gateway_for(ctx: &Context, tracker: TrackerKind, fixtures: Option<&Path>, cache_dir: Option<&Path>) -> Outcome<Gateway> {
    if let Some(dir) = fixtures {
        return Ok(Gateway::fixtures(tracker, dir));
    }
    let base_url = ctx
        .config
        .as_ref()
        .filter(|c| c.tracker == tracker)
        .and_then(|c| c.api_base_url.clone())
        .ok_or_else(|| Failure::Env(ItsError::MissingBaseUrl(tracker).to_string()))?;
    let mut gateway = Gateway::live(TrackerEndpoint { tracker, base_url }, Box::new(UreqTransport::default()));
    let cache = cache_dir.map(Path::to_path_buf).or_else(|| ctx.config.as_ref().and_then(|c| c.cache_dir.clone()));
    if let Some(dir) = cache {
        gateway = gateway.with_disk_cache(DiskCache::new(dir, DEFAULT_CACHE_TTL));
    }
    Ok(gateway)
}

fn check(
    ctx: &Context,
    predictions: PathBuf,
    fixtures: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    out: Option<PathBuf>,
    annotate: Option<PathBuf>,
) -> Outcome<()> {
    if ctx.projects.is_empty() {
        return Err(Failure::User("no project given; pass --projects or --config".into()));
    }
    let mut rows = load_unlabeled(&predictions).user()?;
    let comments: Vec<OnHoldComment> = rows
        .iter()
        .filter(|r| r.label == Some(Label::OnHold) && !r.is_removed())
        .map(|r| OnHoldComment {
            file_path: r.file_path.clone(),
            line: r.line,
            text: r.comment.clone(),
            issue_keys: r.issue_keys.clone(),
        })
        .collect();
    let mut by_tracker: BTreeMap<TrackerKind, Vec<String>> = BTreeMap::new();
    for row in &rows {
        for key in &row.issue_keys {
            match tracker_for(key, &ctx.projects) {
                Some(t) => {
                    let keys = by_tracker.entry(t).or_default();
                    if !keys.contains(key) {
                        keys.push(key.clone());
                    }
                }
                None => log::warn!("no configured tracker for issue {key}"),
            }
        }
    }
    let mut records: Vec<(String, Result<IssueRecord, ItsError>)> = Vec::new();
    for (tracker, keys) in by_tracker {
        let gateway = gateway_for(ctx, tracker, fixtures.as_deref(), cache_dir.as_deref())?;
        records.extend(gateway.fetch_all(&keys));
    }
    if let Some((_, Err(e))) = records.iter().find(|(_, r)| matches!(r, Err(e) if e.is_environmental())) {
        return Err(Failure::Env(e.to_string()));
    }
    let recs = recommend(&comments, &records);
    eprintln!(
        "{} On-hold comment(s) checked, {} ready to be removed",
        comments.len(),
        recs.iter().filter(|r| r.ready).count()
    );
    if let Some(path) = annotate {
        for row in &mut rows {
            let found = row
                .issue_keys
                .iter()
                .find_map(|k| records.iter().find(|(rk, _)| rk == k).and_then(|(_, r)| r.as_ref().ok()));
            if let Some(record) = found {
                row.issue_status = Some(record.raw_status.clone());
                row.issue_resolution = record.raw_resolution.clone();
                row.issue_resolved_date = record.resolved_date;
            }
        }
        write_output(Some(&path), &render_dataset(&rows))?;
    }
    let mut json = serde_json::to_string_pretty(&recs).expect("recommendations serialize");
    json.push('\n');
    write_output(out.as_deref(), &json)
}

fn run_evaluate(
    ctx: &Context,
    dataset: PathBuf,
    variants: Vec<String>,
    k: usize,
    global_vocab: bool,
    out_dir: Option<PathBuf>,
) -> Outcome<()> {
    let variants: Vec<Variant> = variants.iter().map(|v| v.parse()).collect::<Result<_, _>>().user()?;
    let rows = load_dataset(&dataset).user()?;
    let comments = labeled_comments(&rows, ctx)?;
    let config = EvalConfig {
        k,
        seed: ctx.seed,
        global_vocab,
        ..EvalConfig::default()
    };
    let eval = evaluate(&comments, &variants, &config).user()?;
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display())).env()?;
            write_output(Some(&dir.join("results.tsv")), &render_results_tsv(&eval))?;
            write_output(Some(&dir.join("summary.tsv")), &render_summary_tsv(&eval))?;
            write_output(Some(&dir.join("comparisons.tsv")), &render_comparisons_tsv(&eval))
        }
        None => write_output(None, &render_summary_tsv(&eval)),
    }
}

fn push_distribution(out: &mut String, name: &str, d: &Distribution) {
    let _ = writeln!(out, "{name}\tcount\t{}", d.count);
    for (stat, v) in [("min", d.min), ("q1", d.q1), ("median", d.median), ("q3", d.q3), ("max", d.max), ("mean", d.mean)] {
        let _ = writeln!(out, "{name}\t{stat}\t{v:.6}");
    }
}

fn lifecycle(dataset: PathBuf, out: Option<PathBuf>) -> Outcome<()> {
    let rows = load_dataset(&dataset).user()?;
    let timed: Vec<TimedLifecycle> = rows
        .iter()
        .filter_map(|r| {
            Some(TimedLifecycle {
                label: r.label?,
                introduced: r.introduced_date?,
                removed: r.removed_date,
            })
        })
        .collect();
    let spans = lifespan_stats(&timed);
    let removed: Vec<RemovedOnHold> = rows
        .iter()
        .filter(|r| r.label == Some(Label::OnHold))
        .filter_map(|r| {
            Some(RemovedOnHold {
                removed: r.removed_date?,
                issue: r.issue_outcome(),
            })
        })
        .collect();
    let delays = resolution_delay_stats(&removed);
    let mut text = String::from("section\tstatistic\tvalue\n");
    push_distribution(&mut text, "lifespan_days_on_hold", &spans.on_hold);
    push_distribution(&mut text, "lifespan_days_cross_reference", &spans.cross_reference);
    for (stat, v) in [
        ("total", delays.total),
        ("removed_after_resolution", delays.removed_after),
        ("removed_before_resolution", delays.removed_before),
        ("issue_open_or_wontfix", delays.open_or_wontfix),
        ("unknown", delays.unknown),
    ] {
        let _ = writeln!(text, "removed_on_hold\t{stat}\t{v}");
    }
    push_distribution(&mut text, "days_from_resolution_to_removal", &delays.delay_distribution);
    let _ = writeln!(text, "days_from_resolution_to_removal\tsame_day_fraction\t{:.6}", delays.same_day_fraction);
    let _ = writeln!(
        text,
        "days_from_resolution_to_removal\tover_one_year_fraction\t{:.6}",
        delays.over_one_year_fraction
    );
    write_output(out.as_deref(), &text)
}

fn report(recommendations: PathBuf, format: ReportFormat, out: Option<PathBuf>) -> Outcome<()> {
    let recs: Vec<Recommendation> = serde_json::from_str(&read_input(&recommendations)?)
        .map_err(|e| Failure::User(format!("{}: {e}", recommendations.display())))?;
    write_output(out.as_deref(), &render_report(&recs, format))
}

fn run(cli: Cli) -> Outcome<()> {
    let ctx = Context::new(&cli.common)?;
    match cli.command {
        Command::Mine { repo, branch, out } => mine(&ctx, repo, branch, out),
        Command::Detect {
            dataset,
            dump_patterns,
            out,
        } => detect(&ctx, dataset, dump_patterns, out),
        Command::Train { dataset, variant, model } => train(&ctx, dataset, variant, model),
        Command::Classify { model, dataset, out } => classify(dataset, model, out),
        Command::Check {
            predictions,
            fixtures,
            cache_dir,
            out,
            annotate,
        } => check(&ctx, predictions, fixtures, cache_dir, out, annotate),
        Command::Evaluate {
            dataset,
            variants,
            k,
            global_vocab,
            out_dir,
        } => run_evaluate(&ctx, dataset, variants, k, global_vocab, out_dir),
        Command::Lifecycle { dataset, out } => lifecycle(dataset, out),
        Command::Report {
            recommendations,
            format,
            out,
        } => report(recommendations, format, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.common.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Env(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
