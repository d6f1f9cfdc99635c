//! Fixed-budget evaluation: run every episode in a disjoint seed domain from
//! collection, count successes, and report per-task rates with confidence
//! intervals. Unlike collection, nothing is filtered or retried; planner and
//! execution errors count as failures.

use std::time::Instant;

use benchtop_core::model::{EpisodeVerdict, TaskId};
use benchtop_core::prompt::PromptTemplate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collect::{EpisodeRunner, NoiseChannel, RunConfig};
use crate::planner::{Planner, PlannerConfig};
use crate::report::{EvalReport, TaskRow};
use crate::seeds::{episode_seed, SeedDomain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub tasks: Vec<TaskId>,
    pub episodes_per_task: usize,
    pub master_seed: u64,
    /// Worker threads; 0 picks a default from the machine.
    pub parallelism: usize,
    pub planner: PlannerConfig,
    pub sim: benchtop_core::sim::SimConfig,
    pub noise: Option<NoiseChannel>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tasks: TaskId::ALL.to_vec(),
            episodes_per_task: 200,
            master_seed: 0,
            parallelism: 0,
            planner: PlannerConfig::default(),
            sim: benchtop_core::sim::SimConfig::default(),
            noise: None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.episodes_per_task == 0 {
            return Err("episodes_per_task must be at least 1".into());
        }
        // identical structural rules as a collection run
        RunConfig {
            tasks: self.tasks.clone(),
            n_per_task: self.episodes_per_task,
            master_seed: self.master_seed,
            parallelism: self.parallelism,
            planner: self.planner.clone(),
            sim: self.sim.clone(),
            noise: self.noise.clone(),
            ..RunConfig::default()
        }
        .validate()
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("config: {0}")]
    Config(String),
}

/// Run the full grid and aggregate. Episode seeds live in the evaluation
/// domain, so no evaluation scene can collide with a collection scene drawn
/// from the same master seed.
pub fn evaluate(config: &EvalConfig, template: Option<PromptTemplate>) -> Result<EvalReport, EvalError> {
    config.validate().map_err(EvalError::Config)?;
    let planner = Planner::from_config(&config.planner).map_err(EvalError::Config)?;
    let mut runner = EpisodeRunner::new(planner, config.sim.clone(), config.noise.clone());
    if let Some(template) = template {
        runner = runner.with_template(template);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| EvalError::Config(e.to_string()))?;
    let started = Instant::now();
    let mut rows = Vec::with_capacity(config.tasks.len());
    for &task in &config.tasks {
        let seeds: Vec<u64> = (0..config.episodes_per_task as u64)
            .map(|i| episode_seed(config.master_seed, SeedDomain::Evaluation, task, i))
            .collect();
        let successes = pool.install(|| {
            seeds
                .par_iter()
                .filter(|&&seed| runner.run(task, seed).verdict == EpisodeVerdict::Success)
                .count()
        }) as u64;
        log::info!("{task}: {successes}/{} evaluation episodes succeeded", seeds.len());
        rows.push(TaskRow::new(task, successes, seeds.len() as u64));
    }
    Ok(EvalReport::from_rows(
        config.master_seed,
        config.noise.is_some(),
        started.elapsed().as_secs_f64(),
        rows,
    ))
}
