//! Success-filtered episode collection.
//!
//! Episodes are keyed by `(master_seed, task, attempt index)` and processed
//! strictly in attempt order even though waves of them run in parallel, so a
//! run's output is a pure function of the config: wave size and thread count
//! cannot change which episodes land in the dataset.

use std::collections::HashSet;

use benchtop_core::dsl;
use benchtop_core::model::{EpisodeVerdict, SftRecord, StateDigest, TaskId};
use benchtop_core::perception::{fuse, observe, NoiseModel};
use benchtop_core::prompt::{build_prompt_with_state, PromptTemplate};
use benchtop_core::sim::{execute, SimConfig};
use benchtop_core::tasks::{randomize, verify};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::planner::{PlanContext, Planner, PlannerConfig};
use crate::seeds::{episode_seed, observation_seed, SeedDomain};

/// Multi-view perception in front of the planner: the prompt is rendered
/// from the fused estimate instead of the true scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseChannel {
    pub model: NoiseModel,
    pub views: usize,
}

impl Default for NoiseChannel {
    fn default() -> Self {
        Self {
            model: NoiseModel::default(),
            views: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tasks: Vec<TaskId>,
    /// Accepted demonstrations to collect per task.
    pub n_per_task: usize,
    /// Attempt budget per task, as a multiple of `n_per_task`.
    pub max_attempt_factor: usize,
    pub master_seed: u64,
    /// Worker threads; 0 picks a default from the machine.
    pub parallelism: usize,
    pub planner: PlannerConfig,
    pub sim: SimConfig,
    pub noise: Option<NoiseChannel>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tasks: TaskId::ALL.to_vec(),
            n_per_task: 2000,
            max_attempt_factor: 20,
            master_seed: 0,
            parallelism: 0,
            planner: PlannerConfig::default(),
            sim: SimConfig::default(),
            noise: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.tasks.is_empty() {
            return Err("tasks must not be empty".into());
        }
        let mut seen = HashSet::new();
        for task in &self.tasks {
            if !seen.insert(task) {
                return Err(format!("task {task} listed twice"));
            }
        }
        if self.n_per_task == 0 {
            return Err("n_per_task must be at least 1".into());
        }
        if self.max_attempt_factor == 0 {
            return Err("max_attempt_factor must be at least 1".into());
        }
        self.planner.validate()?;
        self.sim.validate()?;
        if let Some(noise) = &self.noise {
            noise.model.validate()?;
            if noise.views == 0 {
                return Err("noise.views must be at least 1".into());
            }
        }
        Ok(())
    }
}

/// Outcome of a single attempt, success or not.
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub task_id: TaskId,
    pub seed: u64,
    pub verdict: EpisodeVerdict,
    /// Failure reason or diagnostic; empty on success.
    pub detail: String,
    pub prompt: String,
    pub raw_completion: Option<String>,
    /// Pretty-printed plan, present whenever the completion parsed.
    pub canonical_completion: Option<String>,
    /// Digest of the end state, present whenever execution finished.
    pub final_digest: Option<StateDigest>,
}

impl EpisodeResult {
    fn failure(task_id: TaskId, seed: u64, verdict: EpisodeVerdict, detail: String) -> Self {
        Self {
            task_id,
            seed,
            verdict,
            detail,
            prompt: String::new(),
            raw_completion: None,
            canonical_completion: None,
            final_digest: None,
        }
    }
}

/// Runs one episode end to end: scene, observation, prompt, plan, execution,
/// verification.
pub struct EpisodeRunner {
    planner: Planner,
    sim: SimConfig,
    noise: Option<NoiseChannel>,
    template: PromptTemplate,
}

impl EpisodeRunner {
    pub fn new(planner: Planner, sim: SimConfig, noise: Option<NoiseChannel>) -> Self {
        Self {
            planner,
            sim,
            noise,
            template: PromptTemplate::builtin(),
        }
    }

    pub fn with_template(mut self, template: PromptTemplate) -> Self {
        self.template = template;
        self
    }

    pub fn run(&self, task: TaskId, seed: u64) -> EpisodeResult {
        let instance = match randomize(task, seed) {
            Ok(instance) => instance,
            Err(e) => {
                return EpisodeResult::failure(task, seed, EpisodeVerdict::ExecutionError, format!("randomizer: {e}"))
            }
        };
        let observed = match &self.noise {
            None => instance.initial_state.clone(),
            Some(channel) => {
                let views = observe(
                    &instance.initial_state,
                    &channel.model,
                    channel.views,
                    observation_seed(seed),
                );
                match fuse(&views, &instance.initial_state) {
                    Ok(state) => state,
                    Err(e) => {
                        return EpisodeResult::failure(
                            task,
                            seed,
                            EpisodeVerdict::ExecutionError,
                            format!("perception: {e}"),
                        )
                    }
                }
            }
        };
        let prompt = build_prompt_with_state(&self.template, &instance, &observed);
        let ctx = PlanContext {
            instance: &instance,
            observed: &observed,
            sim: &self.sim,
            episode_seed: seed,
        };
        let raw = match self.planner.complete(&prompt, &ctx) {
            Ok(raw) => raw,
            Err(e) => {
                let mut result =
                    EpisodeResult::failure(task, seed, EpisodeVerdict::Timeout, format!("planner: {e}"));
                result.prompt = prompt;
                return result;
            }
        };
        let mut result = EpisodeResult {
            task_id: task,
            seed,
            verdict: EpisodeVerdict::TaskFailure,
            detail: String::new(),
            prompt,
            raw_completion: Some(raw.clone()),
            canonical_completion: None,
            final_digest: None,
        };
        let plan = match dsl::parse(&raw) {
            Ok(plan) => plan,
            Err(diagnostics) => {
                result.verdict = EpisodeVerdict::ParseError;
                result.detail = diagnostics
                    .first()
                    .map(|d| d.to_string())
                    .unwrap_or_else(|| "unparseable completion".into());
                return result;
            }
        };
        result.canonical_completion = Some(dsl::pretty_print(&plan));
        let trace = match execute(&instance.initial_state, &plan, &self.sim) {
            Ok(trace) => trace,
            Err(e) => {
                result.verdict = EpisodeVerdict::ExecutionError;
                result.detail = e.to_string();
                return result;
            }
        };
        result.final_digest = Some(trace.final_digest());
        let states: Vec<_> = trace.states().cloned().collect();
        let verdict = verify(&instance, trace.final_state(), &states);
        if verdict.success {
            result.verdict = EpisodeVerdict::Success;
        } else {
            result.verdict = EpisodeVerdict::TaskFailure;
            result.detail = verdict.reason;
        }
        result
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub task_id: TaskId,
    pub seed: u64,
    pub verdict: EpisodeVerdict,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task_id: TaskId,
    pub requested: usize,
    pub accepted: usize,
    pub attempts: u64,
    pub parse_errors: u64,
    pub execution_errors: u64,
    pub verification_failures: u64,
    pub planner_errors: u64,
    /// Successes rejected because an identical (prompt, completion) pair was
    /// already kept. Not counted toward `accepted`.
    pub duplicates: u64,
}

impl TaskReport {
    fn new(task_id: TaskId, requested: usize) -> Self {
        Self {
            task_id,
            requested,
            accepted: 0,
            attempts: 0,
            parse_errors: 0,
            execution_errors: 0,
            verification_failures: 0,
            planner_errors: 0,
            duplicates: 0,
        }
    }
}

#[derive(Debug)]
pub struct TaskCollection {
    pub records: Vec<SftRecord>,
    pub failures: Vec<FailureRecord>,
    pub report: TaskReport,
}

#[derive(Debug, Error)]
pub enum CollectError {
    #[error("config: {0}")]
    Config(String),
    #[error("{task}: attempt budget exhausted at {attempts} attempts with {accepted}/{requested} accepted")]
    AttemptBudgetExhausted {
        task: TaskId,
        attempts: u64,
        accepted: usize,
        requested: usize,
        /// Everything collected before the budget ran out.
        partial: Box<TaskCollection>,
    },
}

/// Order-strict accounting of episode results: accepts successes up to the
/// request, rejects repeats, buckets failures.
struct Accumulator {
    records: Vec<SftRecord>,
    failures: Vec<FailureRecord>,
    report: TaskReport,
    seen: HashSet<[u8; 64]>,
}

fn dedup_key(prompt: &str, completion: &str) -> [u8; 64] {
    let mut key = [0u8; 64];
    key[..32].copy_from_slice(&Sha256::digest(prompt.as_bytes()));
    key[32..].copy_from_slice(&Sha256::digest(completion.as_bytes()));
    key
}

impl Accumulator {
    fn new(task_id: TaskId, requested: usize) -> Self {
        Self {
            records: Vec::with_capacity(requested),
            failures: Vec::new(),
            report: TaskReport::new(task_id, requested),
            seen: HashSet::new(),
        }
    }

    fn full(&self) -> bool {
        self.records.len() == self.report.requested
    }

    fn absorb(&mut self, result: EpisodeResult) {
        debug_assert!(!self.full());
        self.report.attempts += 1;
        match result.verdict {
            EpisodeVerdict::Success => {
                let completion = result
                    .canonical_completion
                    .expect("successful episodes carry a canonical plan");
                let digest = result
                    .final_digest
                    .expect("successful episodes carry a final digest");
                if self.seen.insert(dedup_key(&result.prompt, &completion)) {
                    self.records.push(SftRecord {
                        prompt: result.prompt,
                        completion,
                        task_id: result.task_id,
                        seed: result.seed,
                        verifier_digest: digest,
                    });
                    self.report.accepted += 1;
                } else {
                    self.report.duplicates += 1;
                }
            }
            verdict => {
                match verdict {
                    EpisodeVerdict::ParseError => self.report.parse_errors += 1,
                    EpisodeVerdict::ExecutionError => self.report.execution_errors += 1,
                    EpisodeVerdict::TaskFailure => self.report.verification_failures += 1,
                    EpisodeVerdict::Timeout => self.report.planner_errors += 1,
                    EpisodeVerdict::Success => unreachable!(),
                }
                self.failures.push(FailureRecord {
                    task_id: result.task_id,
                    seed: result.seed,
                    verdict,
                    detail: result.detail,
                });
            }
        }
    }

    fn finish(self) -> TaskCollection {
        TaskCollection {
            records: self.records,
            failures: self.failures,
            report: self.report,
        }
    }
}

/// Collect accepted episodes for one task until `n_per_task` are in hand or
/// the attempt budget runs out. Waves run in parallel; results are absorbed
/// in attempt order and the tail of the final wave is discarded uncounted.
pub fn collect_task(
    runner: &EpisodeRunner,
    pool: &rayon::ThreadPool,
    task: TaskId,
    run: &RunConfig,
) -> Result<TaskCollection, CollectError> {
    let budget = (run.n_per_task as u64) * (run.max_attempt_factor as u64);
    let wave = pool.current_num_threads().max(2) * 4;
    let mut acc = Accumulator::new(task, run.n_per_task);
    let mut next_index: u64 = 0;
    while !acc.full() {
        if acc.report.attempts >= budget {
            log::warn!(
                "{task}: budget of {budget} attempts exhausted with {} accepted",
                acc.report.accepted
            );
            let report = acc.report.clone();
            return Err(CollectError::AttemptBudgetExhausted {
                task,
                attempts: report.attempts,
                accepted: report.accepted,
                requested: report.requested,
                partial: Box::new(acc.finish()),
            });
        }
        let batch = wave.min((budget - acc.report.attempts) as usize);
        let seeds: Vec<u64> = (0..batch as u64)
            .map(|k| episode_seed(run.master_seed, SeedDomain::Collection, task, next_index + k))
            .collect();
        next_index += batch as u64;
        let results: Vec<EpisodeResult> =
            pool.install(|| seeds.par_iter().map(|&seed| runner.run(task, seed)).collect());
        for result in results {
            if acc.full() {
                break; // wave tail: never processed, never counted
            }
            acc.absorb(result);
        }
        log::debug!(
            "{task}: {}/{} accepted after {} attempts",
            acc.report.accepted,
            run.n_per_task,
            acc.report.attempts
        );
    }
    Ok(acc.finish())
}

/// Collect every task in `run.tasks`, in order. `template` defaults to the
/// builtin prompt.
pub fn collect_run(
    run: &RunConfig,
    template: Option<PromptTemplate>,
) -> Result<Vec<TaskCollection>, CollectError> {
    run.validate().map_err(CollectError::Config)?;
    let planner = Planner::from_config(&run.planner).map_err(CollectError::Config)?;
    let mut runner = EpisodeRunner::new(planner, run.sim.clone(), run.noise.clone());
    if let Some(template) = template {
        runner = runner.with_template(template);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.parallelism)
        .build()
        .map_err(|e| CollectError::Config(e.to_string()))?;
    run.tasks
        .iter()
        .map(|&task| collect_task(&runner, &pool, task, run))
        .collect()
}
