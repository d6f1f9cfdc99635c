//! Plan producers: a remote chat-completion endpoint, a scripted oracle
//! that solves tasks from the geometry it is shown, and a deliberately
//! degraded oracle for pipeline calibration.

mod oracle;
mod remote;

pub use oracle::OraclePlanner;
pub use remote::RemoteClient;

use benchtop_core::model::EnvState;
use benchtop_core::sim::SimConfig;
use benchtop_core::tasks::TaskInstance;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Remote,
    Oracle,
    /// Oracle that sabotages a configurable fraction of its own plans.
    OracleDegraded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryConfig {
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
}

impl Default for RetryConfig {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            backoff_base_ms: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub kind: PlannerKind,
    /// Chat-completions URL; required for the remote planner.
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    /// Fraction of plans the degraded oracle sabotages.
    pub failure_rate: f64,
    pub retry: RetryConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            kind: PlannerKind::Oracle,
            endpoint: None,
            model: None,
            temperature: 0.7,
            max_tokens: 1024,
            timeout_secs: 60,
            failure_rate: 0.0,
            retry: RetryConfig::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.kind == PlannerKind::Remote && self.endpoint.is_none() {
            return Err("remote planner needs an endpoint".into());
        }
        if !(0.0..=1.0).contains(&self.failure_rate) {
            return Err(format!("failure_rate must be in [0, 1], got {}", self.failure_rate));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(format!("temperature must be non-negative, got {}", self.temperature));
        }
        if self.retry.max_attempts == 0 {
            return Err("retry.max_attempts must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Network(String),
    #[error("server returned HTTP {0}")]
    HttpStatus(u16),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: Box<PlannerError> },
}

/// Everything a planner may look at besides the prompt text. `observed` is
/// what the prompt was rendered from: the ground-truth scene, or the fused
/// perception estimate when the noisy channel is on. The oracle plans from
/// it, never from the hidden true state.
pub struct PlanContext<'a> {
    pub instance: &'a TaskInstance,
    pub observed: &'a EnvState,
    pub sim: &'a SimConfig,
    pub episode_seed: u64,
}

pub enum Planner {
    Oracle(OraclePlanner),
    Remote(RemoteClient),
}

impl Planner {
    pub fn from_config(config: &PlannerConfig) -> Result<Self, String> {
        config.validate()?;
        match config.kind {
            PlannerKind::Oracle => Ok(Planner::Oracle(OraclePlanner::perfect())),
            PlannerKind::OracleDegraded => Ok(Planner::Oracle(OraclePlanner::degraded(config.failure_rate))),
            PlannerKind::Remote => Ok(Planner::Remote(RemoteClient::from_config(config)?)),
        }
    }

    /// Produce plan text for one episode.
    pub fn complete(&self, prompt: &str, ctx: &PlanContext<'_>) -> Result<String, PlannerError> {
        match self {
            Planner::Oracle(oracle) => Ok(oracle.plan(ctx)),
            Planner::Remote(client) => client.complete(prompt),
        }
    }
}
