//! The nine tabletop tasks: scene randomization, goal bindings, and success
//! verification.
//!
//! `randomize` grows a scene by rejection sampling with slightly inflated
//! footprints, so spawned objects never touch. `verify` checks the task's
//! goal predicate against the final state (and, for the pass-through task,
//! against every intermediate state of the trace). Verification tolerances
//! live here, decoupled from the simulator's own contact tolerances.

mod scenes;
mod verify;

use std::collections::BTreeMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    resolve_description, EnvState, Pose, RandomizerParams, TaskId, TaskSpec, WorkspaceBounds,
};

/// Position tolerance of every goal predicate, meters.
pub const VERIFY_TOLERANCE: f64 = 0.005;

/// Colors drawn on for colored scene elements.
pub const COLOR_POOL: [&str; 8] = ["red", "green", "blue", "yellow", "purple", "orange", "teal", "maroon"];

/// Rejection-sampling budget per object.
pub(crate) const PLACEMENT_ATTEMPTS: usize = 1000;

/// Footprint inflation while sampling, so spawned objects keep a gap.
pub(crate) const SPAWN_INFLATION: f64 = 0.005;

/// Square spawn region half-extent for free-standing objects.
pub(crate) const SPAWN_HALF_EXTENT: f64 = 0.35;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RandomizeError {
    #[error("could not place an object after {attempts} attempts")]
    PlacementExhausted { attempts: usize },
}

pub(crate) type Bindings = BTreeMap<String, String>;

/// One concrete episode setup: the sampled scene plus resolved goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub spec: TaskSpec,
    pub seed: u64,
    pub initial_state: EnvState,
    /// Placeholder values and goal object ids chosen by the randomizer.
    pub goal_bindings: BTreeMap<String, String>,
    /// `spec.description` with placeholders resolved.
    pub description: String,
}

/// Outcome of goal verification. `reason` is non-empty exactly on failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub success: bool,
    pub reason: String,
}

impl Verdict {
    pub fn pass() -> Self {
        Self {
            success: true,
            reason: String::new(),
        }
    }

    pub fn fail(reason: impl Into<String>) -> Self {
        Self {
            success: false,
            reason: reason.into(),
        }
    }
}

fn colored_params(primary: (u32, u32), distractor: (u32, u32)) -> RandomizerParams {
    RandomizerParams {
        primary_count: primary,
        distractor_count: distractor,
        color_pool: COLOR_POOL.iter().map(|c| c.to_string()).collect(),
        spawn_half_extent: SPAWN_HALF_EXTENT,
    }
}

fn plain_params(primary: (u32, u32), distractor: (u32, u32)) -> RandomizerParams {
    RandomizerParams {
        primary_count: primary,
        distractor_count: distractor,
        color_pool: Vec::new(),
        spawn_half_extent: SPAWN_HALF_EXTENT,
    }
}

/// Static description of one task.
pub fn spec_for(task: TaskId) -> TaskSpec {
    let (description, randomizer) = match task {
        TaskId::BasketballInHoop => ("Put the basketball through the hoop.", plain_params((1, 1), (0, 0))),
        TaskId::CloseJar => ("Put the lid on the {color} jar.", colored_params((1, 1), (1, 1))),
        TaskId::EmptyContainer => (
            "Empty the large container into the {color} container.",
            colored_params((2, 4), (1, 1)),
        ),
        TaskId::InsertInPeg => ("Put the ring on the {color} peg.", colored_params((1, 1), (2, 2))),
        TaskId::MeatOffGrill => (
            "Take the {meat} off the grill and put it in the designated area.",
            plain_params((1, 1), (1, 1)),
        ),
        TaskId::OpenBottle => ("Take the cap off the wine bottle.", plain_params((1, 1), (0, 0))),
        TaskId::PutBlock => ("Put the block in the {color} target area.", colored_params((1, 1), (1, 1))),
        TaskId::RubbishInBin => ("Put the rubbish in the bin.", plain_params((1, 1), (2, 2))),
        TaskId::StackBlocks => (
            "Stack {count} {color} blocks on top of the {base_color} block.",
            colored_params((2, 3), (1, 2)),
        ),
    };
    TaskSpec::new(task, description, randomizer).expect("static descriptions are non-empty")
}

/// All nine task specs, in `TaskId::ALL` order.
pub fn catalog() -> Vec<TaskSpec> {
    TaskId::ALL.iter().map(|t| spec_for(*t)).collect()
}

/// Short name of the goal predicate used by `verify`, for manifests.
pub fn verifier_name(task: TaskId) -> &'static str {
    match task {
        TaskId::BasketballInHoop => "ball_through_hoop_band",
        TaskId::CloseJar => "lid_seated_on_target_jar",
        TaskId::EmptyContainer => "all_items_in_target_container",
        TaskId::InsertInPeg => "ring_threaded_on_target_peg",
        TaskId::MeatOffGrill => "target_meat_in_zone",
        TaskId::OpenBottle => "cap_displaced_from_mount",
        TaskId::PutBlock => "block_in_target_zone",
        TaskId::RubbishInBin => "rubbish_in_bin",
        TaskId::StackBlocks => "stack_chain_aligned",
    }
}

/// Sample a task instance. Deterministic in `(task, seed)`.
pub fn randomize(task: TaskId, seed: u64) -> Result<TaskInstance, RandomizeError> {
    let spec = spec_for(task);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (objects, goal_bindings) = match task {
        TaskId::BasketballInHoop => scenes::basketball_in_hoop(&mut rng, &spec.randomizer)?,
        TaskId::CloseJar => scenes::close_jar(&mut rng, &spec.randomizer)?,
        TaskId::EmptyContainer => scenes::empty_container(&mut rng, &spec.randomizer)?,
        TaskId::InsertInPeg => scenes::insert_in_peg(&mut rng, &spec.randomizer)?,
        TaskId::MeatOffGrill => scenes::meat_off_grill(&mut rng, &spec.randomizer)?,
        TaskId::OpenBottle => scenes::open_bottle(&mut rng, &spec.randomizer)?,
        TaskId::PutBlock => scenes::put_block(&mut rng, &spec.randomizer)?,
        TaskId::RubbishInBin => scenes::rubbish_in_bin(&mut rng, &spec.randomizer)?,
        TaskId::StackBlocks => scenes::stack_blocks(&mut rng, &spec.randomizer)?,
    };
    let gripper = Pose::new(0.0, 0.0, 0.35, 0.0).expect("fixed start pose");
    let initial_state = EnvState::new(objects, gripper, true, WorkspaceBounds::default())
        .expect("scene builders assign unique ids and no attachments");
    let description = resolve_description(&spec.description, &goal_bindings);
    Ok(TaskInstance {
        spec,
        seed,
        initial_state,
        goal_bindings,
        description,
    })
}

/// Check the instance's goal against the end of an execution. `trace_states`
/// should hold every state the execution passed through (initial state
/// included); tasks that care about transit, not just the end pose, scan it.
pub fn verify(instance: &TaskInstance, final_state: &EnvState, trace_states: &[EnvState]) -> Verdict {
    verify::verify_instance(instance, final_state, trace_states)
}
