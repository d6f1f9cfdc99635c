//! Scripted planner. It reads the same scene description the prompt was
//! rendered from and emits a pick-and-place plan per task, so it is exactly
//! as well-informed (and as noise-sensitive) as a language model would be.

use benchtop_core::dsl;
use benchtop_core::geom::{overlap_area, Footprint};
use benchtop_core::model::{Command, EnvState, ObjectState, Plan, Pose, TaskId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PlanContext;
use crate::seeds::sabotage_seed;

/// Cruise height for traverses, above every object the scenes can build.
const SAFE_Z: f64 = 0.25;
/// Release height above the landing surface.
const HOVER: f64 = 0.005;
/// Straight-down approach offset above the grasp height.
const APPROACH: f64 = 0.10;
/// How far a sabotaged grasp approach is shifted sideways.
const SABOTAGE_SHIFT: f64 = 0.10;

pub struct OraclePlanner {
    failure_rate: f64,
}

impl OraclePlanner {
    pub fn perfect() -> Self {
        Self { failure_rate: 0.0 }
    }

    /// Oracle that ruins roughly `failure_rate` of its plans, keyed off the
    /// episode seed so reruns make identical choices.
    pub fn degraded(failure_rate: f64) -> Self {
        Self { failure_rate }
    }

    pub fn plan(&self, ctx: &PlanContext<'_>) -> String {
        let mut commands = build(ctx).unwrap_or_else(|| vec![Command::OpenGripper]);
        if self.failure_rate > 0.0 {
            sabotage(&mut commands, ctx, self.failure_rate);
        }
        let plan = Plan::new(commands, String::new()).expect("oracle plans stay under the command cap");
        dsl::pretty_print(&plan)
    }
}

struct PlanBuilder {
    commands: Vec<Command>,
    jaw: f64,
}

impl PlanBuilder {
    fn new(jaw: f64) -> Self {
        Self { commands: Vec::new(), jaw }
    }

    fn mv(&mut self, x: f64, y: f64, z: f64, yaw: f64) {
        let pose = Pose::new(x, y, z, yaw).expect("oracle move targets are finite");
        self.commands.push(Command::MoveGripper(pose));
    }

    /// Approach from above, descend so the jaw window straddles the object
    /// top, close, lift back to cruise height.
    fn pick(&mut self, target: &ObjectState) {
        let (x, y, yaw) = (target.center.x, target.center.y, target.center.yaw);
        let grip = target.top() + self.jaw / 2.0;
        self.mv(x, y, grip + APPROACH, yaw);
        self.mv(x, y, grip, yaw);
        self.commands.push(Command::CloseGripper);
        self.mv(x, y, SAFE_Z, yaw);
    }

    /// Traverse at cruise height, then move so the held object's center ends
    /// at `center_z`, and release.
    fn carry_to(&mut self, held: &ObjectState, x: f64, y: f64, center_z: f64) {
        let yaw = held.center.yaw;
        self.mv(x, y, SAFE_Z, yaw);
        self.mv(x, y, center_z + held.height / 2.0 + self.jaw / 2.0, yaw);
        self.commands.push(Command::OpenGripper);
    }

    /// Release the held object just above `surface_top` so it settles onto
    /// whatever is there.
    fn place(&mut self, held: &ObjectState, x: f64, y: f64, surface_top: f64) {
        self.carry_to(held, x, y, surface_top + HOVER + held.height / 2.0);
    }
}

fn obj<'a>(state: &'a EnvState, id: &str) -> Option<&'a ObjectState> {
    state.object(&id.into())
}

fn build(ctx: &PlanContext<'_>) -> Option<Vec<Command>> {
    let state = ctx.observed;
    let bind = &ctx.instance.goal_bindings;
    let mut plan = PlanBuilder::new(ctx.sim.jaw_depth);
    match ctx.instance.spec.task_id {
        TaskId::PutBlock => {
            let block = obj(state, "block")?;
            let zone = obj(state, bind.get("target_zone")?)?;
            plan.pick(block);
            plan.place(block, zone.center.x, zone.center.y, zone.top());
        }
        TaskId::StackBlocks => {
            let count: usize = bind.get("count")?.parse().ok()?;
            let base = obj(state, bind.get("target_base")?)?;
            let mut surface = base.top();
            for i in 1..=count {
                let block = obj(state, &format!("stack_{i}"))?;
                plan.pick(block);
                plan.place(block, base.center.x, base.center.y, surface);
                surface += block.height;
            }
        }
        TaskId::RubbishInBin => {
            let rubbish = obj(state, "rubbish")?;
            let bin = obj(state, bind.get("target_bin")?)?;
            plan.pick(rubbish);
            plan.place(rubbish, bin.center.x, bin.center.y, bin.top());
        }
        TaskId::BasketballInHoop => {
            let ball = obj(state, "ball")?;
            let hoop = obj(state, bind.get("target_hoop")?)?;
            plan.pick(ball);
            // line the ball's center up with the hoop plane, then let go
            plan.carry_to(ball, hoop.center.x, hoop.center.y, hoop.center.z);
        }
        TaskId::CloseJar => {
            let lid = obj(state, "lid")?;
            let jar = obj(state, bind.get("target_jar")?)?;
            plan.pick(lid);
            plan.place(lid, jar.center.x, jar.center.y, jar.top());
        }
        TaskId::InsertInPeg => {
            let ring = obj(state, "ring")?;
            let peg = obj(state, bind.get("target_peg")?)?;
            plan.pick(ring);
            // the ring slides down the peg, so release above the table plane
            plan.place(ring, peg.center.x, peg.center.y, 0.0);
        }
        TaskId::MeatOffGrill => {
            let meat = obj(state, bind.get("target_meat")?)?;
            let zone = obj(state, bind.get("target_zone")?)?;
            plan.pick(meat);
            plan.place(meat, zone.center.x, zone.center.y, zone.top());
        }
        TaskId::OpenBottle => {
            let cap = obj(state, "cap")?;
            let (x, y) = clear_spot(state, cap);
            plan.pick(cap);
            plan.place(cap, x, y, 0.0);
        }
        TaskId::EmptyContainer => {
            let target = obj(state, bind.get("target_container")?)?;
            let mut items: Vec<&ObjectState> = state
                .objects
                .iter()
                .filter(|o| o.id.as_str().starts_with("item_"))
                .collect();
            items.sort_by(|a, b| a.id.cmp(&b.id));
            // corner slots in the container frame; up to four items fit
            const SLOTS: [(f64, f64); 4] = [(-0.035, -0.035), (-0.035, 0.035), (0.035, -0.035), (0.035, 0.035)];
            let (sin, cos) = target.center.yaw.sin_cos();
            for (item, (sx, sy)) in items.iter().zip(SLOTS) {
                let x = target.center.x + sx * cos - sy * sin;
                let y = target.center.y + sx * sin + sy * cos;
                plan.pick(item);
                plan.place(item, x, y, target.top());
            }
        }
    }
    Some(plan.commands)
}

/// Find a table spot near `cap` whose footprint touches nothing, scanning
/// rings of eight headings at growing radii.
fn clear_spot(state: &EnvState, cap: &ObjectState) -> (f64, f64) {
    let margin = 0.01;
    for radius in [0.12, 0.16, 0.20] {
        for step in 0..8 {
            let angle = step as f64 * std::f64::consts::FRAC_PI_4;
            let x = cap.center.x + radius * angle.cos();
            let y = cap.center.y + radius * angle.sin();
            if x.abs() > 0.4 || y.abs() > 0.4 {
                continue;
            }
            let candidate = Footprint::new(
                x,
                y,
                cap.center.yaw,
                cap.length / 2.0 + margin,
                cap.width / 2.0 + margin,
            );
            if state
                .objects
                .iter()
                .all(|o| overlap_area(&candidate, &o.footprint()) == 0.0)
            {
                return (x, y);
            }
        }
    }
    (cap.center.x + 0.12, cap.center.y)
}

/// With probability `failure_rate`, either shift the first grasp approach
/// sideways so the fingers close on air, or drop the first close entirely.
fn sabotage(commands: &mut Vec<Command>, ctx: &PlanContext<'_>, failure_rate: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(sabotage_seed(ctx.episode_seed));
    if rng.gen::<f64>() >= failure_rate {
        return;
    }
    let Some(close_idx) = commands.iter().position(|c| matches!(c, Command::CloseGripper)) else {
        return;
    };
    if rng.gen_range(0..2) == 0 && close_idx > 0 {
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let (dx, dy) = (SABOTAGE_SHIFT * angle.cos(), SABOTAGE_SHIFT * angle.sin());
        for cmd in &mut commands[..close_idx] {
            if let Command::MoveGripper(pose) = cmd {
                pose.x += dx;
                pose.y += dy;
            }
        }
    } else {
        commands.remove(close_idx);
    }
}
