//! Shared domain types: poses, objects, scenes, plans, episodes and records.
//!
//! Everything here is an immutable value type after construction. Constructors
//! validate their invariants and return [`ModelError`] instead of clamping,
//! with the single documented exception of yaw normalization in [`Pose`].

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Hard cap on plan length, in commands.
pub const MAX_PLAN_COMMANDS: usize = 100;

/// Quantization step (meters / radians) used by [`state_digest`].
///
/// Below every tolerance used by the verifiers, so digest equality implies
/// verifier equivalence.
pub const DIGEST_QUANTUM: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite value in field {0}")]
    NonFinite(&'static str),
    #[error("dimension {0} must be positive, got {1}")]
    NonPositiveDimension(&'static str, f64),
    #[error("object category {0:?} is never graspable")]
    UngraspableCategory(ObjectCategory),
    #[error("duplicate object id {0}")]
    DuplicateObjectId(ObjectId),
    #[error("more than one object attached to the gripper")]
    MultipleAttachments,
    #[error("workspace bounds are inverted on axis {0}")]
    InvertedBounds(&'static str),
    #[error("plan has {0} commands, cap is {MAX_PLAN_COMMANDS}")]
    PlanTooLong(usize),
    #[error("task description is empty")]
    EmptyDescription,
    #[error("episode marked Success without a plan or complete trace")]
    IncompleteSuccess,
}

/// Reduce an angle into `[-pi, pi)` preserving its value mod 2*pi. Angles
/// already in range pass through bit-exactly.
pub fn normalize_yaw(angle: f64) -> Result<f64, ModelError> {
    if !angle.is_finite() {
        return Err(ModelError::NonFinite("yaw"));
    }
    if (-PI..PI).contains(&angle) {
        return Ok(angle);
    }
    let mut r = (angle + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= PI {
        r -= TAU;
    }
    Ok(r)
}

/// Gripper or object pose in the workspace frame. The table plane is z = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Rotation about the vertical axis, radians in `[-pi, pi)`.
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, z: f64, yaw: f64) -> Result<Self, ModelError> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(ModelError::NonFinite("position"));
        }
        let yaw = normalize_yaw(yaw)?;
        Ok(Self { x, y, z, yaw })
    }

    pub fn xy_distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.yaw.is_finite()
    }
}

/// Stable identifier for one object in a scene.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for ObjectId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectCategory {
    Block,
    Container,
    TargetZone,
    Lid,
    Peg,
    /// Hollow objects: never act as a support surface, exempt from
    /// interpenetration checks, and slide over pegs when dropped.
    Ring,
    Fixture,
}

impl ObjectCategory {
    /// Target zones and fixtures are scenery; the gripper never grasps them.
    pub fn forces_ungraspable(self) -> bool {
        matches!(self, ObjectCategory::TargetZone | ObjectCategory::Fixture)
    }
}

/// One object's pose and extent record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub id: ObjectId,
    /// Human-readable label used in prompts ("red block 1", "bin").
    pub name: String,
    pub center: Pose,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// Set while grasped; at most one object in a scene may be attached.
    pub attached: bool,
    pub graspable: bool,
    pub category: ObjectCategory,
}

impl ObjectState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<ObjectId>,
        name: impl Into<String>,
        center: Pose,
        length: f64,
        width: f64,
        height: f64,
        graspable: bool,
        category: ObjectCategory,
    ) -> Result<Self, ModelError> {
        for (label, v) in [("length", length), ("width", width), ("height", height)] {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(label));
            }
            if v <= 0.0 {
                return Err(ModelError::NonPositiveDimension(label, v));
            }
        }
        if graspable && category.forces_ungraspable() {
            return Err(ModelError::UngraspableCategory(category));
        }
        Ok(Self {
            id: id.into(),
            name: name.into(),
            center,
            length,
            width,
            height,
            attached: false,
            graspable,
            category,
        })
    }

    pub fn top(&self) -> f64 {
        self.center.z + self.height / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.center.z - self.height / 2.0
    }

    pub fn footprint(&self) -> crate::geom::Footprint {
        crate::geom::Footprint::new(self.center.x, self.center.y, self.center.yaw, self.length, self.width)
    }
}

/// Axis-aligned workspace bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceBounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl WorkspaceBounds {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self, ModelError> {
        for (axis, label) in [(0, "x"), (1, "y"), (2, "z")] {
            if !min[axis].is_finite() || !max[axis].is_finite() {
                return Err(ModelError::NonFinite("workspace"));
            }
            if min[axis] >= max[axis] {
                return Err(ModelError::InvertedBounds(label));
            }
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, pose: &Pose) -> bool {
        let p = [pose.x, pose.y, pose.z];
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }
}

impl Default for WorkspaceBounds {
    /// One-meter square table with 0.6 m of clearance above it.
    fn default() -> Self {
        Self {
            min: [-0.5, -0.5, 0.0],
            max: [0.5, 0.5, 0.6],
        }
    }
}

/// Full scene: the objects, the gripper, and the workspace box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub objects: Vec<ObjectState>,
    pub gripper_pose: Pose,
    pub gripper_open: bool,
    pub workspace: WorkspaceBounds,
}

impl EnvState {
    /// Validates id uniqueness and attachment exclusivity. Geometric
    /// invariants (support, interpenetration) depend on simulator tolerances
    /// and are checked by the simulator's own predicates.
    pub fn new(
        objects: Vec<ObjectState>,
        gripper_pose: Pose,
        gripper_open: bool,
        workspace: WorkspaceBounds,
    ) -> Result<Self, ModelError> {
        let mut seen = std::collections::BTreeSet::new();
        let mut attached = 0usize;
        for obj in &objects {
            if !seen.insert(obj.id.clone()) {
                return Err(ModelError::DuplicateObjectId(obj.id.clone()));
            }
            if obj.attached {
                attached += 1;
            }
        }
        if attached > 1 {
            return Err(ModelError::MultipleAttachments);
        }
        Ok(Self {
            objects,
            gripper_pose,
            gripper_open,
            workspace,
        })
    }

    pub fn object(&self, id: &ObjectId) -> Option<&ObjectState> {
        self.objects.iter().find(|o| &o.id == id)
    }

    pub fn attached_index(&self) -> Option<usize> {
        self.objects.iter().position(|o| o.attached)
    }
}

/// The nine tabletop tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    BasketballInHoop,
    CloseJar,
    EmptyContainer,
    InsertInPeg,
    MeatOffGrill,
    OpenBottle,
    PutBlock,
    RubbishInBin,
    StackBlocks,
}

impl TaskId {
    pub const ALL: [TaskId; 9] = [
        TaskId::BasketballInHoop,
        TaskId::CloseJar,
        TaskId::EmptyContainer,
        TaskId::InsertInPeg,
        TaskId::MeatOffGrill,
        TaskId::OpenBottle,
        TaskId::PutBlock,
        TaskId::RubbishInBin,
        TaskId::StackBlocks,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskId::BasketballInHoop => "basketball_in_hoop",
            TaskId::CloseJar => "close_jar",
            TaskId::EmptyContainer => "empty_container",
            TaskId::InsertInPeg => "insert_in_peg",
            TaskId::MeatOffGrill => "meat_off_grill",
            TaskId::OpenBottle => "open_bottle",
            TaskId::PutBlock => "put_block",
            TaskId::RubbishInBin => "rubbish_in_bin",
            TaskId::StackBlocks => "stack_blocks",
        }
    }

    pub fn ordinal(self) -> u64 {
        Self::ALL.iter().position(|t| *t == self).unwrap() as u64
    }
}

impl std::str::FromStr for TaskId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskId::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task id '{s}'"))
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-task randomization knobs. The meaning of `primary_count` is task
/// specific (blocks to stack, items to transfer, distractor pool size).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizerParams {
    pub primary_count: (u32, u32),
    pub distractor_count: (u32, u32),
    pub color_pool: Vec<String>,
    /// Square spawn region on the table, centered on the origin.
    pub spawn_half_extent: f64,
}

/// Static description of one task: id, description template and
/// randomization ranges. `description` may contain `{placeholder}` markers
/// resolved per instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: TaskId,
    pub description: String,
    pub randomizer: RandomizerParams,
}

impl TaskSpec {
    pub fn new(task_id: TaskId, description: impl Into<String>, randomizer: RandomizerParams) -> Result<Self, ModelError> {
        let description = description.into();
        if description.trim().is_empty() {
            return Err(ModelError::EmptyDescription);
        }
        Ok(Self {
            task_id,
            description,
            randomizer,
        })
    }
}

/// One executable gripper primitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    OpenGripper,
    CloseGripper,
    MoveGripper(Pose),
}

/// Parsed command sequence plus the text it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub commands: Vec<Command>,
    pub source_text: String,
}

impl Plan {
    pub fn new(commands: Vec<Command>, source_text: impl Into<String>) -> Result<Self, ModelError> {
        if commands.len() > MAX_PLAN_COMMANDS {
            return Err(ModelError::PlanTooLong(commands.len()));
        }
        Ok(Self {
            commands,
            source_text: source_text.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }
}

/// How one episode ended. `Timeout` covers every planner-side failure
/// (request timeout, HTTP error, retries exhausted): the episode never
/// obtained a completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeVerdict {
    Success,
    TaskFailure,
    ParseError,
    ExecutionError,
    Timeout,
}

/// Digest of one post-command state, the storage form of a trace step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub command_index: usize,
    pub digest: StateDigest,
}

/// One full randomize -> plan -> execute -> verify cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub task_id: TaskId,
    pub seed: u64,
    pub initial_state: EnvState,
    pub prompt: String,
    pub raw_completion: String,
    pub plan: Option<Plan>,
    pub trace: Vec<TraceEntry>,
    pub verdict: EpisodeVerdict,
    /// Verifier reason on failure; empty on success.
    pub failure_reason: String,
}

impl Episode {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.verdict == EpisodeVerdict::Success {
            match &self.plan {
                Some(plan) if self.trace.len() == plan.len() => {}
                _ => return Err(ModelError::IncompleteSuccess),
            }
        }
        Ok(())
    }
}

/// One prompt/completion pair of the bootstrap dataset, plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftRecord {
    pub prompt: String,
    /// Canonical DSL text; parses to a plan that replays to Success.
    pub completion: String,
    pub task_id: TaskId,
    pub seed: u64,
    pub verifier_digest: StateDigest,
}

/// Fixed-width digest of a quantized [`EnvState`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StateDigest(pub [u8; 32]);

impl StateDigest {
    pub fn to_hex(self) -> String {
        let mut s = String::with_capacity(64);
        for b in self.0 {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

impl fmt::Debug for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateDigest({})", self.to_hex())
    }
}

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl From<StateDigest> for String {
    fn from(d: StateDigest) -> String {
        d.to_hex()
    }
}

impl TryFrom<String> for StateDigest {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s.len() != 64 {
            return Err(format!("digest must be 64 hex chars, got {}", s.len()));
        }
        let mut out = [0u8; 32];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).map_err(|e| e.to_string())?;
        }
        Ok(StateDigest(out))
    }
}

fn hash_quantized(hasher: &mut Sha256, value: f64) {
    let q = (value / DIGEST_QUANTUM).round() as i64;
    hasher.update(q.to_le_bytes());
}

fn hash_str(hasher: &mut Sha256, s: &str) {
    hasher.update((s.len() as u64).to_le_bytes());
    hasher.update(s.as_bytes());
}

/// Digest of a scene with all scalar fields quantized to [`DIGEST_QUANTUM`]
/// and objects taken in id-sorted order, so digest equality is independent
/// of object list order.
pub fn state_digest(state: &EnvState) -> StateDigest {
    let mut hasher = Sha256::new();
    let mut order: Vec<usize> = (0..state.objects.len()).collect();
    order.sort_by(|&a, &b| state.objects[a].id.cmp(&state.objects[b].id));
    hasher.update((order.len() as u64).to_le_bytes());
    for idx in order {
        let o = &state.objects[idx];
        hash_str(&mut hasher, o.id.as_str());
        hash_str(&mut hasher, &o.name);
        hash_str(&mut hasher, &format!("{:?}", o.category));
        for v in [o.center.x, o.center.y, o.center.z, o.center.yaw, o.length, o.width, o.height] {
            hash_quantized(&mut hasher, v);
        }
        hasher.update([o.attached as u8, o.graspable as u8]);
    }
    for v in [
        state.gripper_pose.x,
        state.gripper_pose.y,
        state.gripper_pose.z,
        state.gripper_pose.yaw,
    ] {
        hash_quantized(&mut hasher, v);
    }
    hasher.update([state.gripper_open as u8]);
    for v in state.workspace.min.iter().chain(state.workspace.max.iter()) {
        hash_quantized(&mut hasher, *v);
    }
    StateDigest(hasher.finalize().into())
}

/// Resolve `{placeholder}` markers in a description template.
pub fn resolve_description(template: &str, bindings: &BTreeMap<String, String>) -> String {
    let mut out = template.to_owned();
    for (key, value) in bindings {
        out = out.replace(&format!("{{{key}}}"), value);
    }
    out
}
