//! Simulator invariants under random commands: no step may create or drop
//! an object, attach more than one object, or leave a detached object
//! hanging in the air without support.

use benchtop_core::model::{Command, EnvState, ObjectId, Pose, TaskId};
use benchtop_core::sim::{self, SimConfig};
use benchtop_core::tasks::randomize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: u64 = 100_000;
const STEPS_PER_SCENE: u32 = 25;

pub fn c8_simulator_invariants() -> Result<String, String> {
    let config = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    let mut executed = 0u64;
    let mut rejected = 0u64;
    let mut scenes = 0u64;

    while executed < STEPS {
        let task = TaskId::ALL[(scenes % TaskId::ALL.len() as u64) as usize];
        let instance =
            randomize(task, 0x00C8_0000 + scenes).map_err(|e| format!("scene {scenes}: {e}"))?;
        scenes += 1;
        let mut state = instance.initial_state;
        let mut expected_ids: Vec<ObjectId> =
            state.objects.iter().map(|o| o.id.clone()).collect();
        expected_ids.sort();

        for _ in 0..STEPS_PER_SCENE {
            let command = random_command(&mut rng, &state);
            match sim::step(&state, &command, &config) {
                Ok((next, _event)) => {
                    check_invariants(&next, &expected_ids, &config)
                        .map_err(|why| format!("scene {} after {:?}: {why}", scenes - 1, command))?;
                    state = next;
                    executed += 1;
                    if executed >= STEPS {
                        break;
                    }
                }
                Err(_) => {
                    // Rejected commands must not have touched the borrowed
                    // state; nothing to re-check on a pure function.
                    rejected += 1;
                }
            }
        }
    }

    Ok(format!(
        "{executed} executed steps across {scenes} scenes ({rejected} rejected commands), zero invariant violations"
    ))
}

fn check_invariants(
    state: &EnvState,
    expected_ids: &[ObjectId],
    config: &SimConfig,
) -> Result<(), String> {
    let mut ids: Vec<ObjectId> = state.objects.iter().map(|o| o.id.clone()).collect();
    ids.sort();
    if ids != expected_ids {
        return Err("object id set changed".into());
    }
    let attached = state.objects.iter().filter(|o| o.attached).count();
    if attached > 1 {
        return Err(format!("{attached} objects attached at once"));
    }
    if attached == 1 && state.gripper_open {
        return Err("object still attached while the gripper is open".into());
    }
    let floating = sim::unsupported_objects(state, config);
    if !floating.is_empty() {
        return Err(format!("unsupported objects after settle: {floating:?}"));
    }
    Ok(())
}

/// Mix of purposeful and wild commands: moves near object tops (so grasps
/// and stacks actually happen), moves anywhere including out of bounds
/// (rejection path), and open/close toggles.
fn random_command(rng: &mut ChaCha8Rng, state: &EnvState) -> Command {
    match rng.gen_range(0..10u8) {
        0..=3 => {
            let x = rng.gen_range(-0.55..0.55);
            let y = rng.gen_range(-0.55..0.55);
            let z = rng.gen_range(-0.05..0.5);
            let yaw = rng.gen_range(-4.0..4.0);
            Command::MoveGripper(Pose::new(x, y, z, yaw).expect("finite pose"))
        }
        4..=5 => {
            let target = &state.objects[rng.gen_range(0..state.objects.len())];
            let x = target.center.x + rng.gen_range(-0.02..0.02);
            let y = target.center.y + rng.gen_range(-0.02..0.02);
            let z = (target.top() + rng.gen_range(-0.01..0.04)).max(0.0);
            Command::MoveGripper(Pose::new(x, y, z, target.center.yaw).expect("finite pose"))
        }
        6..=7 => Command::CloseGripper,
        _ => Command::OpenGripper,
    }
}
