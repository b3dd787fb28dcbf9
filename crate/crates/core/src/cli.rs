//! Command-line driver.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::adapter::{
    AdapterSpec, ChatAdapter, RemoteAdapter, ScriptedAdapter, TableAdapter,
};
use crate::engine::record::{load_overrides, RecordError, RunMeta, RunRecord, RunResults};
use crate::engine::{
    answer_table, grade_tasks, plan_tasks, replies_from_transcript, rulebook, run_memory_protocol,
    run_reasoning_protocol, scores_from_grades, EngineError, Exchange, Resources, RunInputs,
};
use crate::generator::{generate_task_graph, GenerationError};
use crate::naming::{assign_names, finalize_ordinals, load_surrogates, SurrogateLibrary};
use crate::oracle::lexicon::Lexicon;
use crate::render::{load_templates, TemplateSet};
use crate::schema::SchemaRegistry;

pub const DEFAULT_N: usize = 10;
pub const GENERATION_ATTEMPTS: u32 = 32;

#[derive(Debug, Parser)]
#[command(
    name = "rocar",
    version,
    about = "Randomised social-relation task graphs for chat-model evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph, rulebook and task list into a run directory.
    Gen(GenArgs),
    /// Run both protocols against an adapter, then grade and score.
    Run(RunArgs),
    /// Regrade stored replies, applying override.txt when present.
    Grade(DirArgs),
    /// Print the scores of a graded run.
    Score(DirArgs),
    /// Print the rulebook, edge prompts and questions of a run directory.
    Render(DirArgs),
    /// Tabulate scores of completed runs, sorted by adapter.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Prompt template file.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Surrogate name file.
    #[arg(long)]
    pub surrogates: Option<PathBuf>,
    /// Kinship lexicon file.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = DEFAULT_N)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Run the generated tasks immediately.
    #[arg(long)]
    pub one_shot: bool,
    /// Adapter for `--one-shot`.
    #[arg(long, default_value = "remote")]
    pub adapter: String,
    #[arg(long)]
    pub reinform: bool,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// `remote`, `scripted:PATH`, `oracle` or `always_wrong`.
    #[arg(long, default_value = "remote")]
    pub adapter: String,
    /// Resend the edge prompts before each reasoning question.
    #[arg(long)]
    pub reinform: bool,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct DirArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("{0}")]
    Io(String),
    #[error("adapter failure: {0}")]
    Adapter(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Generation(_) => 3,
            CliError::Io(_) => 4,
            CliError::Adapter(_) => 5,
        }
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> CliError {
        CliError::Config(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load_resources(data: &DataArgs) -> Result<Resources, CliError> {
    let registry = SchemaRegistry::shipped();
    let lexicon = match &data.lexicon {
        Some(p) => Lexicon::parse(&read_file(p)?).map_err(|e| CliError::Config(e.to_string()))?,
        None => Lexicon::shipped(),
    };
    let templates = match &data.templates {
        Some(p) => load_templates(&read_file(p)?, &registry)
            .map_err(|e| CliError::Config(e.to_string()))?,
        None => TemplateSet::shipped(&registry),
    };
    let surrogates = match &data.surrogates {
        Some(p) => load_surrogates(&read_file(p)?).map_err(|e| CliError::Config(e.to_string()))?,
        None => SurrogateLibrary::shipped(),
    };
    Ok(Resources::new(registry, lexicon, templates, surrogates))
}

/// Seed for the `attempt`-th regeneration; attempt 0 uses the seed as given.
pub fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    seed.wrapping_add(u64::from(attempt).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Generates, names and plans a task graph, regenerating with derived seeds
/// when the graph is exhausted or lacks a needed distance.
pub fn generate_record(res: &Resources, n: usize, seed: u64) -> Result<RunRecord, CliError> {
    if n == 0 {
        return Err(CliError::Config("--n must be at least 1".into()));
    }
    let mut last = String::new();
    for attempt in 0..GENERATION_ATTEMPTS {
        let s = attempt_seed(seed, attempt);
        let graph = match generate_task_graph(&res.registry, n, s) {
            Ok(g) => g,
            Err(
                e @ (GenerationError::GenerationExhausted { .. }
                | GenerationError::InfeasibleSplice(_)),
            ) => {
                last = e.to_string();
                continue;
            }
            Err(e) => return Err(CliError::Generation(e.to_string())),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let graph = finalize_ordinals(graph, &res.registry, &mut rng);
        let graph = assign_names(graph, &res.surrogates, &mut rng)
            .map_err(|e| CliError::Config(e.to_string()))?;
        match plan_tasks(&graph, res, &mut rng) {
            Ok(tasks) => {
                return Ok(RunRecord {
                    meta: RunMeta {
                        seed,
                        n,
                        attempt,
                        templates: res.templates.version().to_string(),
                        lexicon: res.lexicon.version().to_string(),
                        rubric: res.rubric.version().to_string(),
                        adapter: None,
                        reinform: false,
                    },
                    graph,
                    rulebook: rulebook(res),
                    tasks,
                    results: None,
                })
            }
            Err(EngineError::Generation(e)) => last = e.to_string(),
            Err(e) => return Err(e.into()),
        }
    }
    Err(CliError::Generation(format!(
        "{GENERATION_ATTEMPTS} attempts failed; last: {last}"
    )))
}

pub fn build_adapter(
    spec: &str,
    record: &RunRecord,
    res: &Resources,
) -> Result<Box<dyn ChatAdapter>, CliError> {
    let spec = AdapterSpec::parse(spec).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(match spec {
        AdapterSpec::Remote => {
            Box::new(RemoteAdapter::from_env().map_err(|e| CliError::Config(e.to_string()))?)
        }
        AdapterSpec::Scripted(path) => {
            let source = read_file(Path::new(&path))?;
            Box::new(
                ScriptedAdapter::parse(&path, &source)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            )
        }
        AdapterSpec::Oracle => Box::new(TableAdapter::new(
            "oracle",
            answer_table(&record.graph, res, &record.tasks, true)?,
        )),
        AdapterSpec::AlwaysWrong => Box::new(TableAdapter::new(
            "always_wrong",
            answer_table(&record.graph, res, &record.tasks, false)?,
        )),
    })
}

fn grade_and_score(
    record: &RunRecord,
    res: &Resources,
    dir: &Path,
    transcript: Vec<Exchange>,
    timestamps: Vec<u128>,
) -> Result<RunResults, CliError> {
    let overrides = load_overrides(dir)?;
    let replies = replies_from_transcript(&transcript);
    let grades = grade_tasks(&record.graph, res, &record.tasks, &replies, &overrides)?;
    let scores =
        scores_from_grades(&record.tasks, &grades).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(RunResults {
        transcript,
        timestamps,
        grades,
        scores,
    })
}

/// Runs both protocols on a stored record and persists the results. On
/// adapter failure the artifacts are still written before the error is
/// returned.
pub fn run_record(
    mut record: RunRecord,
    res: &Resources,
    dir: &Path,
    adapter: &dyn ChatAdapter,
    reinform: bool,
) -> Result<RunRecord, CliError> {
    let prompts = res
        .templates
        .render_graph(&record.graph)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let inputs = RunInputs {
        graph: &record.graph,
        rulebook: &record.rulebook,
        prompts: &prompts,
        tasks: &record.tasks,
    };
    let mut outcomes = run_reasoning_protocol(&inputs, adapter, reinform);
    outcomes.extend(
        run_memory_protocol(&inputs, adapter).map_err(|e| CliError::Config(e.to_string()))?,
    );
    let failed = outcomes.iter().find(|o| o.failed()).map(|o| o.id.clone());
    let mut transcript = Vec::new();
    let mut timestamps = Vec::new();
    for o in outcomes {
        transcript.extend(o.exchanges);
        timestamps.extend(o.timestamps);
    }
    let results = grade_and_score(&record, res, dir, transcript, timestamps)?;
    record.meta.adapter = Some(adapter.identity());
    record.meta.reinform = reinform;
    record.results = Some(results);
    record.persist(dir)?;
    match failed {
        Some(session) => Err(CliError::Adapter(format!(
            "session {session} did not complete"
        ))),
        None => Ok(record),
    }
}

fn scores_text(record: &RunRecord) -> Result<String, CliError> {
    let r = record
        .results
        .as_ref()
        .ok_or_else(|| CliError::Io("run directory has no results; use `run` first".into()))?;
    Ok(crate::scoring::render_scores(&r.scores.0, &r.scores.1))
}

/// Aligned adapter × score table, rows sorted by adapter name.
pub fn report_table(records: &[RunRecord]) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for rec in records {
        let r = rec
            .results
            .as_ref()
            .ok_or_else(|| CliError::Io("run directory has no results".into()))?;
        let adapter = rec.meta.adapter.clone().unwrap_or_default();
        rows.push((adapter, r.scores.0.to_string(), r.scores.1.to_string()));
    }
    rows.sort();
    let width = rows.iter().map(|r| r.0.len()).chain([7]).max().unwrap_or(7);
    let mut out = format!(
        "{:<width$}  {:>7}  {:>7}\n",
        "adapter", "score_r", "score_m"
    );
    for (a, r, m) in rows {
        out.push_str(&format!("{a:<width$}  {r:>7}  {m:>7}\n"));
    }
    Ok(out)
}

fn render_text(record: &RunRecord, res: &Resources) -> Result<String, CliError> {
    let prompts = res
        .templates
        .render_graph(&record.graph)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = String::from("## rulebook\n");
    for l in &record.rulebook {
        out.push_str(l);
        out.push('\n');
    }
    out.push_str("\n## prompts\n");
    for p in &prompts {
        out.push_str(p);
        out.push('\n');
    }
    out.push_str("\n## questions\n");
    for t in &record.tasks {
        out.push_str(&format!("{}: {}\n", t.id, t.question));
    }
    Ok(out)
}

fn load_graph_record(dir: &Path) -> Result<RunRecord, CliError> {
    Ok(RunRecord::load(dir)?)
}

/// Executes one command, writing human-readable output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut emit = |s: &str| {
        stdout
            .write_all(s.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))
    };
    match cli.command {
        Command::Gen(a) => {
            let seed = a
                .seed
                .ok_or_else(|| CliError::Config("gen requires --seed".into()))?;
            let res = load_resources(&a.data)?;
            let record = generate_record(&res, a.n, seed)?;
            record.persist(&a.out)?;
            if a.one_shot {
                let adapter = build_adapter(&a.adapter, &record, &res)?;
                let record = run_record(record, &res, &a.out, adapter.as_ref(), a.reinform)?;
                emit(&scores_text(&record)?)?;
            }
            Ok(())
        }
        Command::Run(a) => {
            let res = load_resources(&a.data)?;
            let record = load_graph_record(&a.out)?;
            let adapter = build_adapter(&a.adapter, &record, &res)?;
            let record = run_record(record, &res, &a.out, adapter.as_ref(), a.reinform)?;
            emit(&scores_text(&record)?)
        }
        Command::Grade(a) => {
            let res = load_resources(&a.data)?;
            let mut record = load_graph_record(&a.out)?;
            let prior = record.results.take().ok_or_else(|| {
                CliError::Io("run directory has no transcript; use `run` first".into())
            })?;
            record.results = Some(grade_and_score(
                &record,
                &res,
                &a.out,
                prior.transcript,
                prior.timestamps,
            )?);
            record.persist(&a.out)?;
            emit(&scores_text(&record)?)
        }
        Command::Score(a) => emit(&scores_text(&load_graph_record(&a.out)?)?),
        Command::Render(a) => {
            let res = load_resources(&a.data)?;
            emit(&render_text(&load_graph_record(&a.out)?, &res)?)
        }
        Command::Report(a) => {
            let records = a
                .runs
                .iter()
                .map(|d| load_graph_record(d))
                .collect::<Result<Vec<_>, _>>()?;
            emit(&report_table(&records)?)
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "rocar: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("rocar").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn gen_requires_seed() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(&["gen", "--out", out]).0, 2);
    }

    #[test]
    fn gen_with_one_edge_fails_generation() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(&["gen", "--n", "1", "--seed", "3", "--out", out]).0, 3);
    }

    #[test]
    fn report_needs_runs() {
        assert_eq!(run(&["report"]).0, 2);
    }

    #[test]
    fn unknown_adapter_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(&["gen", "--seed", "1", "--out", out]).0, 0);
        assert_eq!(run(&["run", "--out", out, "--adapter", "nope"]).0, 2);
    }

    #[test]
    fn missing_run_dir_is_io_error() {
        assert_eq!(run(&["score", "--out", "/nonexistent/rocar-run"]).0, 4);
    }

    #[test]
    fn attempt_zero_keeps_seed() {
        assert_eq!(attempt_seed(42, 0), 42);
        assert_ne!(attempt_seed(42, 1), 42);
    }
}
