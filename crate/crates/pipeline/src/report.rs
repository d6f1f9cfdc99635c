//! Success-rate reporting: Wilson score intervals and a fixed-width results
//! table, one row per task plus an average row.

use benchtop_core::model::TaskId;
use serde::{Deserialize, Serialize};

/// Two-sided 95% Wilson score interval for a binomial proportion. Returns
/// the vacuous `[0, 1]` when there are no trials.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    debug_assert!(successes <= trials);
    let z = 1.96_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - half) / denom).max(0.0),
        ((center + half) / denom).min(1.0),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub task_id: TaskId,
    pub episodes: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl TaskRow {
    pub fn new(task_id: TaskId, successes: u64, episodes: u64) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(successes, episodes);
        Self {
            task_id,
            episodes,
            successes,
            success_rate: if episodes == 0 {
                0.0
            } else {
                successes as f64 / episodes as f64
            },
            wilson_low,
            wilson_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub master_seed: u64,
    /// Whether the planner saw fused noisy observations instead of the truth.
    pub noisy: bool,
    pub wall_seconds: f64,
    pub rows: Vec<TaskRow>,
    /// Unweighted mean of the per-task success rates.
    pub average_rate: f64,
    pub total_episodes: u64,
    pub total_successes: u64,
    /// Wilson interval over all episodes pooled.
    pub pooled_low: f64,
    pub pooled_high: f64,
}

impl EvalReport {
    pub fn from_rows(master_seed: u64, noisy: bool, wall_seconds: f64, rows: Vec<TaskRow>) -> Self {
        let total_episodes: u64 = rows.iter().map(|r| r.episodes).sum();
        let total_successes: u64 = rows.iter().map(|r| r.successes).sum();
        let average_rate = if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(|r| r.success_rate).sum::<f64>() / rows.len() as f64
        };
        let (pooled_low, pooled_high) = wilson_interval(total_successes, total_episodes);
        Self {
            master_seed,
            noisy,
            wall_seconds,
            rows,
            average_rate,
            total_episodes,
            total_successes,
            pooled_low,
            pooled_high,
        }
    }

    pub fn row(&self, task: TaskId) -> Option<&TaskRow> {
        self.rows.iter().find(|r| r.task_id == task)
    }
}

/// Plain-text results table.
pub fn render_table(report: &EvalReport) -> String {
    let name_width = report
        .rows
        .iter()
        .map(|r| r.task_id.as_str().len())
        .chain(std::iter::once("average".len()))
        .max()
        .unwrap_or(7);
    let mut out = String::new();
    out.push_str(&format!(
        "{:<name_width$}  {:>8}  {:>9}  {:>6}  {:>16}\n",
        "task", "episodes", "successes", "rate", "95% interval"
    ));
    for row in &report.rows {
        out.push_str(&format!(
            "{:<name_width$}  {:>8}  {:>9}  {:>6.3}  [{:.3}, {:.3}]\n",
            row.task_id.as_str(),
            row.episodes,
            row.successes,
            row.success_rate,
            row.wilson_low,
            row.wilson_high,
        ));
    }
    out.push_str(&format!(
        "{:<name_width$}  {:>8}  {:>9}  {:>6.3}  [{:.3}, {:.3}]\n",
        "average",
        report.total_episodes,
        report.total_successes,
        report.average_rate,
        report.pooled_low,
        report.pooled_high,
    ));
    out
}
