//! Independent re-execution of stored records: rebuild the scene from the
//! seed, parse the stored plan, run it, and compare outcome and end-state
//! digest. A dataset is sound iff every record replays to a digest match.

use benchtop_core::dsl;
use benchtop_core::model::{SftRecord, TaskId};
use benchtop_core::sim::{execute, SimConfig};
use benchtop_core::tasks::{randomize, verify};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub task_id: TaskId,
    pub seed: u64,
    /// The replayed plan passed goal verification.
    pub success: bool,
    /// The replayed end state hashes to the stored digest.
    pub digest_match: bool,
    /// Empty when both checks pass.
    pub detail: String,
}

impl ReplayReport {
    pub fn clean(&self) -> bool {
        self.success && self.digest_match
    }

    fn broken(record: &SftRecord, detail: String) -> Self {
        Self {
            task_id: record.task_id,
            seed: record.seed,
            success: false,
            digest_match: false,
            detail,
        }
    }
}

pub fn replay_record(record: &SftRecord, sim: &SimConfig) -> ReplayReport {
    let instance = match randomize(record.task_id, record.seed) {
        Ok(instance) => instance,
        Err(e) => return ReplayReport::broken(record, format!("randomizer: {e}")),
    };
    let plan = match dsl::parse(&record.completion) {
        Ok(plan) => plan,
        Err(diags) => {
            let first = diags.first().map(|d| d.to_string()).unwrap_or_default();
            return ReplayReport::broken(record, format!("stored plan does not parse: {first}"));
        }
    };
    let trace = match execute(&instance.initial_state, &plan, sim) {
        Ok(trace) => trace,
        Err(e) => return ReplayReport::broken(record, format!("execution: {e}")),
    };
    let states: Vec<_> = trace.states().cloned().collect();
    let verdict = verify(&instance, trace.final_state(), &states);
    let digest_match = trace.final_digest() == record.verifier_digest;
    let mut detail = String::new();
    if !verdict.success {
        detail = verdict.reason.clone();
    } else if !digest_match {
        detail = "end state does not hash to the stored digest".into();
    }
    ReplayReport {
        task_id: record.task_id,
        seed: record.seed,
        success: verdict.success,
        digest_match,
        detail,
    }
}
