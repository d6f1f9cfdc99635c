//! Deterministic kinematic simulator.
//!
//! Moves teleport the gripper along a straight segment (only the endpoints
//! matter, except that the swept minimum of a carried object's bottom is
//! checked against the table). Grasping is a geometric predicate; releasing
//! drops the carried object straight down onto the highest surface that can
//! hold it, else the table. Object-object interpenetration during transit is
//! not modeled: this is a plan-level simulator, not a physics engine.
//!
//! Support rules:
//! - a surface holds a dropped object when their footprints overlap by more
//!   than `placement_overlap_tolerance` of the smaller one and the surface
//!   top is at or below the falling object's bottom (within
//!   `contact_tolerance`);
//! - ring-category objects are hollow: they never act as a support surface,
//!   and a falling ring ignores pegs entirely, sliding over them.
//!
//! After any step that can strand an object in the air (carrying a support
//! away, releasing) a settle pass lowers unsupported objects, in id order,
//! until the scene reaches a fixpoint.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::overlap_fraction;
use crate::model::{
    normalize_yaw, Command, EnvState, ObjectCategory, ObjectId, ObjectState, Plan, Pose, StateDigest, TraceEntry,
};

/// Tolerances and limits of the kinematic world. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Widest object the jaws can close around.
    pub max_aperture: f64,
    /// How far the jaws reach below the gripper point.
    pub jaw_depth: f64,
    /// Horizontal slop allowed between gripper and object center at grasp.
    pub grasp_xy_tolerance: f64,
    /// Vertical slack treated as contact (table or object tops).
    pub contact_tolerance: f64,
    /// Minimum footprint overlap fraction for a surface to hold an object.
    pub placement_overlap_tolerance: f64,
    /// Execution refuses plans longer than this.
    pub max_commands_per_episode: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_aperture: 0.08,
            jaw_depth: 0.04,
            grasp_xy_tolerance: 0.015,
            contact_tolerance: 0.002,
            placement_overlap_tolerance: 0.25,
            max_commands_per_episode: 100,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (label, v) in [
            ("max_aperture", self.max_aperture),
            ("jaw_depth", self.jaw_depth),
            ("grasp_xy_tolerance", self.grasp_xy_tolerance),
            ("contact_tolerance", self.contact_tolerance),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{label} must be positive and finite, got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.placement_overlap_tolerance) || self.placement_overlap_tolerance <= 0.0 {
            return Err(format!(
                "placement_overlap_tolerance must be in (0, 1), got {}",
                self.placement_overlap_tolerance
            ));
        }
        if self.max_aperture <= self.grasp_xy_tolerance {
            return Err("max_aperture must exceed grasp_xy_tolerance".to_owned());
        }
        if self.max_commands_per_episode == 0 {
            return Err("max_commands_per_episode must be at least 1".to_owned());
        }
        Ok(())
    }
}

/// What one command did to the world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepEvent {
    Moved,
    Grasped(ObjectId),
    /// Jaws closed on air; the gripper still ends closed.
    GraspFailedEmpty,
    Released(ObjectId),
    ReleasedNothing,
    OpenedAlreadyOpen,
    ClosedAlreadyClosed,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("move target ({0:.4}, {1:.4}, {2:.4}) leaves the workspace", .target.x, .target.y, .target.z)]
    OutOfWorkspace { target: Pose },
    #[error("carried object {object} would sink {depth:.4} m below the table")]
    TablePenetration { object: ObjectId, depth: f64 },
    #[error("close_gripper matches several objects: {candidates:?}")]
    AmbiguousGrasp { candidates: Vec<ObjectId> },
    #[error("move target has a non-finite coordinate")]
    NonFiniteTarget,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error("plan has {len} commands, execution cap is {max}")]
    PlanTooLong { len: usize, max: usize },
    #[error("command {index} failed: {source}")]
    Step { index: usize, source: SimError },
}

/// Whether `surface` can hold `falling` at all (footprint and height checks
/// are separate). Encodes the hollow-ring rules.
pub fn can_support(surface: &ObjectState, falling: &ObjectState) -> bool {
    if surface.category == ObjectCategory::Ring {
        return false;
    }
    !(falling.category == ObjectCategory::Ring && surface.category == ObjectCategory::Peg)
}

/// Resting bottom height for `falling` dropped straight down at its current
/// xy: the highest qualifying surface top at or below it, else the table.
fn rest_bottom<'a>(
    falling: &ObjectState,
    others: impl Iterator<Item = &'a ObjectState>,
    config: &SimConfig,
) -> f64 {
    let fp = falling.footprint();
    let mut best = 0.0f64;
    for o in others {
        if !can_support(o, falling) {
            continue;
        }
        if o.top() > falling.bottom() + config.contact_tolerance {
            continue;
        }
        if overlap_fraction(&fp, &o.footprint()) > config.placement_overlap_tolerance {
            best = best.max(o.top());
        }
    }
    best
}

/// Lower every non-attached object to its resting height, repeating in id
/// order until nothing moves. Objects only ever move down, so a scene that
/// is already at rest is left untouched.
pub fn settle(state: &mut EnvState, config: &SimConfig) {
    let n = state.objects.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| state.objects[a].id.cmp(&state.objects[b].id));
    for _ in 0..=n {
        let mut changed = false;
        for &i in &order {
            if state.objects[i].attached {
                continue;
            }
            let falling = state.objects[i].clone();
            let others = state.objects.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o);
            let new_z = rest_bottom(&falling, others, config) + falling.height / 2.0;
            if new_z < state.objects[i].center.z - 1e-12 {
                state.objects[i].center.z = new_z;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Ids of non-attached objects that are neither on the table nor resting on
/// a qualifying surface. Empty means the support invariant holds.
pub fn unsupported_objects(state: &EnvState, config: &SimConfig) -> Vec<ObjectId> {
    let mut out = Vec::new();
    for (i, obj) in state.objects.iter().enumerate() {
        if obj.attached {
            continue;
        }
        if obj.bottom().abs() <= config.contact_tolerance {
            continue;
        }
        let fp = obj.footprint();
        let held = state.objects.iter().enumerate().any(|(j, s)| {
            j != i
                && can_support(s, obj)
                && (obj.bottom() - s.top()).abs() <= config.contact_tolerance
                && overlap_fraction(&fp, &s.footprint()) > config.placement_overlap_tolerance
        });
        if !held {
            out.push(obj.id.clone());
        }
    }
    out
}

fn move_gripper(state: &mut EnvState, target: Pose, config: &SimConfig) -> Result<StepEvent, SimError> {
    if !target.is_finite() {
        return Err(SimError::NonFiniteTarget);
    }
    let target = Pose::new(target.x, target.y, target.z, target.yaw).expect("checked finite");
    if !state.workspace.contains(&target) {
        return Err(SimError::OutOfWorkspace { target });
    }
    let old = state.gripper_pose;
    if let Some(idx) = state.attached_index() {
        let carried = &state.objects[idx];
        let off_z = carried.center.z - old.z;
        // z interpolates linearly along the segment, so the endpoint minimum
        // bounds the carried object's lowest point over the whole motion
        let lowest_bottom = old.z.min(target.z) + off_z - carried.height / 2.0;
        if lowest_bottom < -config.contact_tolerance {
            return Err(SimError::TablePenetration {
                object: carried.id.clone(),
                depth: -lowest_bottom,
            });
        }
        let dyaw = target.yaw - old.yaw;
        let (s, c) = dyaw.sin_cos();
        let (ox, oy) = (carried.center.x - old.x, carried.center.y - old.y);
        let carried = &mut state.objects[idx];
        carried.center.x = target.x + c * ox - s * oy;
        carried.center.y = target.y + s * ox + c * oy;
        carried.center.z = target.z + off_z;
        carried.center.yaw = normalize_yaw(carried.center.yaw + dyaw).expect("finite yaw");
        state.gripper_pose = target;
        // anything that was stacked on the carried object has lost its floor
        settle(state, config);
    } else {
        state.gripper_pose = target;
    }
    Ok(StepEvent::Moved)
}

fn close_gripper(state: &mut EnvState, config: &SimConfig) -> Result<StepEvent, SimError> {
    if !state.gripper_open {
        return Ok(StepEvent::ClosedAlreadyClosed);
    }
    let g = state.gripper_pose;
    let mut hits: Vec<usize> = Vec::new();
    for (i, o) in state.objects.iter().enumerate() {
        if !o.graspable {
            continue;
        }
        let within_xy = o.center.xy_distance(&g) <= config.grasp_xy_tolerance;
        let top = o.top();
        let within_jaws = top >= g.z - config.jaw_depth && top <= g.z;
        let fits_aperture = o.footprint().extent_across(g.yaw) <= config.max_aperture;
        if within_xy && within_jaws && fits_aperture {
            hits.push(i);
        }
    }
    match hits.as_slice() {
        [] => {
            state.gripper_open = false;
            Ok(StepEvent::GraspFailedEmpty)
        }
        [only] => {
            state.objects[*only].attached = true;
            state.gripper_open = false;
            Ok(StepEvent::Grasped(state.objects[*only].id.clone()))
        }
        many => Err(SimError::AmbiguousGrasp {
            candidates: many.iter().map(|&i| state.objects[i].id.clone()).collect(),
        }),
    }
}

fn open_gripper(state: &mut EnvState, config: &SimConfig) -> StepEvent {
    if state.gripper_open {
        return StepEvent::OpenedAlreadyOpen;
    }
    state.gripper_open = true;
    if let Some(idx) = state.attached_index() {
        state.objects[idx].attached = false;
        let falling = state.objects[idx].clone();
        let others = state.objects.iter().enumerate().filter(|(j, _)| *j != idx).map(|(_, o)| o);
        let bottom = rest_bottom(&falling, others, config);
        state.objects[idx].center.z = bottom + falling.height / 2.0;
        let id = state.objects[idx].id.clone();
        settle(state, config);
        StepEvent::Released(id)
    } else {
        StepEvent::ReleasedNothing
    }
}

/// Apply one command. Pure: the input state is untouched.
pub fn step(state: &EnvState, command: &Command, config: &SimConfig) -> Result<(EnvState, StepEvent), SimError> {
    let mut next = state.clone();
    let event = match command {
        Command::MoveGripper(target) => move_gripper(&mut next, *target, config)?,
        Command::CloseGripper => close_gripper(&mut next, config)?,
        Command::OpenGripper => open_gripper(&mut next, config),
    };
    Ok((next, event))
}

/// One executed command with the state it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub command: Command,
    pub event: StepEvent,
    pub state: EnvState,
}

/// Full history of one plan execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub initial: EnvState,
    pub steps: Vec<StepRecord>,
}

impl ExecutionTrace {
    pub fn final_state(&self) -> &EnvState {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.initial)
    }

    /// Initial state followed by every post-command state.
    pub fn states(&self) -> impl Iterator<Item = &EnvState> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.state))
    }

    /// Compact storage form: one digest per executed command.
    pub fn digests(&self) -> Vec<TraceEntry> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| TraceEntry {
                command_index: i,
                digest: crate::model::state_digest(&s.state),
            })
            .collect()
    }

    pub fn final_digest(&self) -> StateDigest {
        crate::model::state_digest(self.final_state())
    }
}

/// Run a whole plan, stopping at the first failing command.
pub fn execute(initial: &EnvState, plan: &Plan, config: &SimConfig) -> Result<ExecutionTrace, ExecError> {
    if plan.len() > config.max_commands_per_episode {
        return Err(ExecError::PlanTooLong {
            len: plan.len(),
            max: config.max_commands_per_episode,
        });
    }
    let mut current = initial.clone();
    let mut steps = Vec::with_capacity(plan.len());
    for (index, command) in plan.commands.iter().enumerate() {
        let (next, event) = step(&current, command, config).map_err(|source| ExecError::Step { index, source })?;
        steps.push(StepRecord {
            command: *command,
            event,
            state: next.clone(),
        });
        current = next;
    }
    Ok(ExecutionTrace {
        initial: initial.clone(),
        steps,
    })
}
