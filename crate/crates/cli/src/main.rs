//! Batch operator surface for the benchtop pipeline: generate verified
//! datasets, run the closed-loop evaluation grid, replay stored records,
//! inspect dataset directories and dump the task catalog.
//!
//! Exit codes: 0 success, 1 usage/config, 2 planner/network, 3 attempt
//! budget exhausted, 4 integrity failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use benchtop_core::model::{Plan, TaskId};
use benchtop_core::prompt::{serialize_state, PromptTemplate};
use benchtop_core::tasks::{catalog, randomize, verifier_name};
use benchtop_core::{dsl, sim};
use benchtop_pipeline::collect::{
    collect_task, CollectError, EpisodeRunner, NoiseChannel, RunConfig, TaskCollection,
};
use benchtop_pipeline::dataset::{load_dataset, write_dataset, DatasetError};
use benchtop_pipeline::evaluate::{evaluate, EvalConfig};
use benchtop_pipeline::planner::{Planner, PlannerKind};
use benchtop_pipeline::recipe::TrainingRecipe;
use benchtop_pipeline::replay::replay_record;
use benchtop_pipeline::report::render_table;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

const EXIT_USAGE: i32 = 1;
const EXIT_PLANNER: i32 = 2;
const EXIT_BUDGET: i32 = 3;
const EXIT_INTEGRITY: i32 = 4;

#[derive(Parser)]
#[command(name = "benchtop", version, about = "Verified tabletop data bootstrap")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Collect verified episodes into a training dataset.
    Generate(GenerateArgs),
    /// Run the success-rate grid with a scripted or remote planner.
    Evaluate(EvaluateArgs),
    /// Re-execute stored records and check verdicts and digests.
    Replay(ReplayArgs),
    /// Summarize a dataset directory and verify its digests.
    Inspect(InspectArgs),
    /// Print the task catalog.
    Tasks(TasksArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Comma-separated task ids (default: all nine).
    #[arg(long, value_delimiter = ',')]
    tasks: Vec<String>,
    /// Master seed; omitted uses the config's, or draws one and prints it.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = machine default).
    #[arg(long)]
    parallel: Option<usize>,
    /// oracle | oracle-degraded:<rate> | remote
    #[arg(long)]
    planner: Option<String>,
    /// Planner input: ground truth or fused noisy observations.
    #[arg(long, value_parser = ["truth", "noisy"])]
    state: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Accepted records per task.
    #[arg(long)]
    n: Option<usize>,
    /// Output directory for dataset.jsonl, failures.jsonl and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated request sizes; writes one dataset per size under
    /// out/n<size>/.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Episodes per task.
    #[arg(long)]
    episodes: Option<usize>,
    /// Also write report.json and report.txt here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Dataset directory produced by `generate`.
    #[arg(long)]
    data: PathBuf,
    /// Replay a single record with step-by-step states.
    #[arg(long, conflicts_with = "all")]
    index: Option<usize>,
    /// Replay every record (the default).
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct InspectArgs {
    /// Dataset directory produced by `generate`.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct TasksArgs {
    /// Machine-readable catalog instead of the table.
    #[arg(long)]
    json: bool,
}

/// Mirrors the run configuration, plus the prompt template and recipe.
/// Unknown keys are rejected so typos fail loudly.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    template_path: Option<PathBuf>,
    run: RunConfig,
    recipe: TrainingRecipe,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

fn main() {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let outcome = match cli.command {
        Cmd::Generate(args) => cmd_generate(cli.config.as_deref(), args),
        Cmd::Evaluate(args) => cmd_evaluate(cli.config.as_deref(), args),
        Cmd::Replay(args) => cmd_replay(args),
        Cmd::Inspect(args) => cmd_inspect(args),
        Cmd::Tasks(args) => cmd_tasks(args),
    };
    if let Err(failure) = outcome {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}

// ---- configuration ------------------------------------------------------

fn load_config(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_task(name: &str) -> Result<TaskId, Failure> {
    TaskId::ALL
        .into_iter()
        .find(|t| t.as_str() == name)
        .ok_or_else(|| {
            let known: Vec<&str> = TaskId::ALL.iter().map(|t| t.as_str()).collect();
            Failure::usage(format!("unknown task '{name}' (known: {})", known.join(", ")))
        })
}

fn parse_planner(spec: &str) -> Result<(PlannerKind, Option<f64>), Failure> {
    match spec {
        "oracle" => Ok((PlannerKind::Oracle, None)),
        "remote" => Ok((PlannerKind::Remote, None)),
        other => {
            let rate = other
                .strip_prefix("oracle-degraded:")
                .and_then(|r| r.parse::<f64>().ok())
                .filter(|r| (0.0..=1.0).contains(r))
                .ok_or_else(|| {
                    Failure::usage(format!(
                        "bad --planner '{other}' (expected oracle, remote or oracle-degraded:<rate in [0,1]>)"
                    ))
                })?;
            Ok((PlannerKind::OracleDegraded, Some(rate)))
        }
    }
}

/// Apply flag overrides on top of the config file; flags win. Returns the
/// run config with the master seed resolved (drawn and printed when neither
/// a flag nor a config file supplied one).
fn resolve_run(
    config: &ConfigFile,
    common: &CommonArgs,
    had_config: bool,
) -> Result<RunConfig, Failure> {
    let mut run = config.run.clone();
    if !common.tasks.is_empty() {
        run.tasks = common
            .tasks
            .iter()
            .map(|t| parse_task(t))
            .collect::<Result<Vec<_>, _>>()?;
    }
    match common.seed {
        Some(seed) => run.master_seed = seed,
        None if !had_config => {
            run.master_seed = rand::random();
            println!("drew master seed {}", run.master_seed);
        }
        None => {}
    }
    if let Some(parallel) = common.parallel {
        run.parallelism = parallel;
    }
    if let Some(spec) = &common.planner {
        let (kind, rate) = parse_planner(spec)?;
        run.planner.kind = kind;
        if let Some(rate) = rate {
            run.planner.failure_rate = rate;
        }
    }
    match common.state.as_deref() {
        Some("truth") => run.noise = None,
        Some("noisy") => {
            if run.noise.is_none() {
                run.noise = Some(NoiseChannel::default());
            }
        }
        _ => {}
    }
    Ok(run)
}

fn load_template(config: &ConfigFile) -> Result<Option<PromptTemplate>, Failure> {
    let Some(path) = &config.template_path else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read template {}: {e}", path.display())))?;
    PromptTemplate::new(text)
        .map(Some)
        .map_err(|e| Failure::usage(format!("template {}: {e}", path.display())))
}

fn write_text_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let tmp = path.with_extension("tmp");
    let write = || -> std::io::Result<()> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(text.as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

// ---- generate -----------------------------------------------------------

fn cmd_generate(config_path: Option<&Path>, args: GenerateArgs) -> Result<(), Failure> {
    let config = load_config(config_path)?;
    let base = resolve_run(&config, &args.common, config_path.is_some())?;
    let template = load_template(&config)?;

    let sizes: Vec<Option<usize>> = if args.sweep.is_empty() {
        vec![args.n]
    } else {
        if args.n.is_some() {
            return Err(Failure::usage("--n and --sweep are mutually exclusive"));
        }
        args.sweep.iter().map(|&n| Some(n)).collect()
    };

    for size in sizes {
        let mut run = base.clone();
        if let Some(n) = size {
            run.n_per_task = n;
        }
        let dir = if args.sweep.is_empty() {
            args.out.clone()
        } else {
            args.out.join(format!("n{}", run.n_per_task))
        };
        generate_one(&run, &config.recipe, template.clone(), &dir)?;
    }
    Ok(())
}

fn generate_one(
    run: &RunConfig,
    recipe: &TrainingRecipe,
    template: Option<PromptTemplate>,
    dir: &Path,
) -> Result<(), Failure> {
    run.validate().map_err(Failure::usage)?;
    let planner = Planner::from_config(&run.planner).map_err(Failure::usage)?;
    let mut runner = EpisodeRunner::new(planner, run.sim.clone(), run.noise.clone());
    if let Some(template) = template {
        runner = runner.with_template(template);
    }
    let pool = rayon_pool(run.parallelism)?;

    let mut collections = Vec::new();
    let mut exhausted: Option<(TaskId, i32)> = None;
    for &task in &run.tasks {
        match collect_task(&runner, &pool, task, run) {
            Ok(collection) => collections.push(collection),
            Err(CollectError::Config(message)) => return Err(Failure::usage(message)),
            Err(CollectError::AttemptBudgetExhausted { task, attempts, partial, .. }) => {
                // keep what was collected so the partial dataset still ships
                let code = if partial.report.accepted == 0 && partial.report.planner_errors > 0 {
                    EXIT_PLANNER
                } else {
                    EXIT_BUDGET
                };
                eprintln!(
                    "warning: {task}: budget of {attempts} attempts exhausted with {} of {} records; emitting partial dataset",
                    partial.report.accepted, run.n_per_task
                );
                collections.push(*partial);
                exhausted = Some((task, code));
                break;
            }
        }
    }

    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let manifest = write_dataset(dir, &collections, run, recipe).map_err(|e| Failure {
        code: EXIT_INTEGRITY,
        message: e.to_string(),
    })?;

    let table = generation_table(&collections);
    print!("{table}");
    write_text_atomic(&dir.join("report.txt"), &table)?;
    println!(
        "wrote {} records to {} (dataset digest {})",
        manifest.total_records,
        dir.display(),
        &manifest.dataset_digest[..16]
    );

    match exhausted {
        Some((task, code)) => Err(Failure {
            code,
            message: format!("collection stopped at {task}: attempt budget exhausted"),
        }),
        None => Ok(()),
    }
}

fn rayon_pool(parallelism: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn generation_table(collections: &[TaskCollection]) -> String {
    let mut out = String::from(
        "task               requested  accepted  attempts  parse  exec  verify  planner  dup\n",
    );
    for c in collections {
        let r = &c.report;
        out.push_str(&format!(
            "{:<18} {:>9} {:>9} {:>9} {:>6} {:>5} {:>7} {:>8} {:>4}\n",
            r.task_id.as_str(),
            r.requested,
            r.accepted,
            r.attempts,
            r.parse_errors,
            r.execution_errors,
            r.verification_failures,
            r.planner_errors,
            r.duplicates,
        ));
    }
    out
}

// ---- evaluate -----------------------------------------------------------

fn cmd_evaluate(config_path: Option<&Path>, args: EvaluateArgs) -> Result<(), Failure> {
    let config = load_config(config_path)?;
    let run = resolve_run(&config, &args.common, config_path.is_some())?;
    let template = load_template(&config)?;

    let eval = EvalConfig {
        tasks: run.tasks.clone(),
        episodes_per_task: args.episodes.unwrap_or(EvalConfig::default().episodes_per_task),
        master_seed: run.master_seed,
        parallelism: run.parallelism,
        planner: run.planner.clone(),
        sim: run.sim.clone(),
        noise: run.noise.clone(),
    };

    let report = evaluate(&eval, template).map_err(|e| Failure::usage(e.to_string()))?;
    match &eval.noise {
        Some(channel) => println!(
            "observations: fused from {} noisy views (sigma_pos {} m, outlier rate {})",
            channel.views, channel.model.sigma_pos, channel.model.outlier_probability
        ),
        None => println!("observations: ground truth"),
    }
    let table = render_table(&report);
    print!("{table}");

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Failure::usage(e.to_string()))?;
        write_text_atomic(&dir.join("report.json"), &(json + "\n"))?;
        write_text_atomic(&dir.join("report.txt"), &table)?;
        println!("wrote report to {}", dir.display());
    }
    Ok(())
}

// ---- replay -------------------------------------------------------------

fn cmd_replay(args: ReplayArgs) -> Result<(), Failure> {
    let (manifest, records) = open_dataset(&args.data)?;
    if records.is_empty() {
        println!("dataset {} holds no records", args.data.display());
        return Ok(());
    }

    if let Some(index) = args.index {
        let record = records.get(index).ok_or_else(|| {
            Failure::usage(format!(
                "record index {index} out of range (dataset holds {})",
                records.len()
            ))
        })?;
        return replay_verbose(index, record, &manifest.run.sim);
    }

    let mut broken = Vec::new();
    for (index, record) in records.iter().enumerate() {
        let report = replay_record(record, &manifest.run.sim);
        if report.clean() {
            println!("ok     #{index} {} seed {}", record.task_id, record.seed);
        } else {
            println!(
                "BROKEN #{index} {} seed {}: {}",
                record.task_id, record.seed, report.detail
            );
            broken.push(index);
        }
    }
    if broken.is_empty() {
        println!("{} records replayed clean", records.len());
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INTEGRITY,
            message: format!(
                "{} of {} records failed replay (indices {:?})",
                broken.len(),
                records.len(),
                broken
            ),
        })
    }
}

fn replay_verbose(
    index: usize,
    record: &benchtop_core::model::SftRecord,
    sim_config: &sim::SimConfig,
) -> Result<(), Failure> {
    let integrity = |message: String| Failure { code: EXIT_INTEGRITY, message };
    let instance = randomize(record.task_id, record.seed)
        .map_err(|e| integrity(format!("record {index}: {e}")))?;
    let plan = dsl::parse(&record.completion).map_err(|diags| {
        let first = diags.first().map(|d| d.message.clone()).unwrap_or_default();
        integrity(format!("record {index}: completion no longer parses: {first}"))
    })?;
    let trace = sim::execute(&instance.initial_state, &plan, sim_config)
        .map_err(|e| integrity(format!("record {index}: {e}")))?;

    println!("record #{index}: {} seed {}", record.task_id, record.seed);
    println!("goal: {}", instance.description);
    println!("step 0 (initial)");
    print_state(&trace.initial);
    for (step_index, step) in trace.steps.iter().enumerate() {
        let line = dsl::pretty_print(&Plan::new(vec![step.command], "").expect("one command"));
        println!("step {}: {}", step_index + 1, line.trim_end());
        println!("  event: {:?}", step.event);
        print_state(&step.state);
    }

    let report = replay_record(record, sim_config);
    if report.clean() {
        println!("verdict: success, digest match");
        Ok(())
    } else {
        Err(integrity(format!("record {index}: {}", report.detail)))
    }
}

fn print_state(state: &benchtop_core::model::EnvState) {
    println!(
        "  gripper: ({:.4}, {:.4}, {:.4}), yaw {:.4}, {}",
        state.gripper_pose.x,
        state.gripper_pose.y,
        state.gripper_pose.z,
        state.gripper_pose.yaw,
        if state.gripper_open { "open" } else { "closed" }
    );
    for line in serialize_state(state).lines() {
        println!("  {line}");
    }
}

// ---- inspect ------------------------------------------------------------

fn cmd_inspect(args: InspectArgs) -> Result<(), Failure> {
    let (manifest, records) = open_dataset(&args.data)?;
    println!("dataset:        {}", args.data.display());
    println!("format version: {}", manifest.format_version);
    println!("master seed:    {}", manifest.master_seed);
    println!("records:        {}", manifest.total_records);
    println!("dataset digest: {}", manifest.dataset_digest);
    println!(
        "recipe:         {} epochs, batch {}, adapter rank {} (scaling {}), lr {}, {} schedule, {}",
        manifest.recipe.epochs,
        manifest.recipe.effective_batch_size,
        manifest.recipe.adapter_rank,
        manifest.recipe.adapter_scaling,
        manifest.recipe.learning_rate,
        manifest.recipe.schedule,
        manifest.recipe.objective,
    );
    if records.is_empty() {
        println!("warning: dataset is empty");
        return Ok(());
    }
    println!();
    println!("task               requested  accepted  attempts  rate   verifier");
    for task in &manifest.tasks {
        let r = &task.report;
        let rate = if r.attempts == 0 {
            0.0
        } else {
            r.accepted as f64 / r.attempts as f64
        };
        println!(
            "{:<18} {:>9} {:>9} {:>9}  {:.3}  {}",
            r.task_id.as_str(),
            r.requested,
            r.accepted,
            r.attempts,
            rate,
            task.verifier,
        );
    }
    let attempts: u64 = manifest.tasks.iter().map(|t| t.report.attempts).sum();
    let accepted: u64 = manifest.tasks.iter().map(|t| t.report.accepted as u64).sum();
    if attempts > 0 {
        println!();
        println!(
            "overall acceptance: {accepted}/{attempts} ({:.3})",
            accepted as f64 / attempts as f64
        );
    }
    Ok(())
}

fn open_dataset(
    dir: &Path,
) -> Result<(benchtop_pipeline::dataset::Manifest, Vec<benchtop_core::model::SftRecord>), Failure> {
    load_dataset(dir).map_err(|e| match e {
        DatasetError::Io(inner) => {
            Failure::usage(format!("cannot read dataset at {}: {inner}", dir.display()))
        }
        other => Failure { code: EXIT_INTEGRITY, message: other.to_string() },
    })
}

// ---- tasks --------------------------------------------------------------

#[derive(Serialize)]
struct CatalogEntry {
    task_id: TaskId,
    description: String,
    randomizer: benchtop_core::model::RandomizerParams,
    verifier: &'static str,
}

fn cmd_tasks(args: TasksArgs) -> Result<(), Failure> {
    let entries: Vec<CatalogEntry> = catalog()
        .into_iter()
        .map(|spec| CatalogEntry {
            task_id: spec.task_id,
            description: spec.description,
            randomizer: spec.randomizer,
            verifier: verifier_name(spec.task_id),
        })
        .collect();
    if args.json {
        let text = serde_json::to_string_pretty(&entries)
            .map_err(|e| Failure::usage(e.to_string()))?;
        println!("{text}");
    } else {
        println!("{:<18} {:<22} description", "task", "verifier");
        for entry in &entries {
            println!("{:<18} {:<22} {}", entry.task_id.as_str(), entry.verifier, entry.description);
        }
    }
    Ok(())
}
