//! Goal predicates, one per task, all using [`super::VERIFY_TOLERANCE`].
//! Predicates read only object poses and extents; they never consult the
//! plan, events, or simulator tolerances.

use super::{TaskInstance, Verdict, VERIFY_TOLERANCE as EPS};
use crate::model::{EnvState, ObjectId, ObjectState, TaskId};

fn find<'a>(state: &'a EnvState, id: &str) -> Result<&'a ObjectState, Verdict> {
    state
        .object(&ObjectId::from(id))
        .ok_or_else(|| Verdict::fail(format!("object '{id}' is missing from the state")))
}

fn binding<'a>(instance: &'a TaskInstance, key: &str) -> Result<&'a str, Verdict> {
    instance
        .goal_bindings
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Verdict::fail(format!("goal binding '{key}' is missing")))
}

/// Containment in a zone, bin or open container: the item's center lies in
/// the carrier footprint, and the item sits no higher than the carrier top
/// (resting on a closed container's top counts) and no lower than its base.
fn contained_in(item: &ObjectState, carrier: &ObjectState) -> Result<(), String> {
    if !carrier.footprint().contains_point(item.center.x, item.center.y) {
        return Err(format!("{} center is outside the {} footprint", item.name, carrier.name));
    }
    if item.bottom() < carrier.bottom() - EPS {
        return Err(format!("{} sits below the {}", item.name, carrier.name));
    }
    if item.bottom() > carrier.top() + EPS {
        return Err(format!("{} floats above the {}", item.name, carrier.name));
    }
    Ok(())
}

fn verdict_from(check: Result<(), String>) -> Verdict {
    match check {
        Ok(()) => Verdict::pass(),
        Err(reason) => Verdict::fail(reason),
    }
}

fn put_block(instance: &TaskInstance, state: &EnvState) -> Result<Verdict, Verdict> {
    let block = find(state, "block")?;
    let zone = find(state, binding(instance, "target_zone")?)?;
    Ok(verdict_from(contained_in(block, zone)))
}

fn stack_blocks(instance: &TaskInstance, state: &EnvState) -> Result<Verdict, Verdict> {
    let expected: usize = binding(instance, "count")?
        .parse()
        .map_err(|_| Verdict::fail("count binding is not a number"))?;
    let base = find(state, binding(instance, "target_base")?)?;
    let mut stack: Vec<&ObjectState> = state
        .objects
        .iter()
        .filter(|o| o.id.as_str().starts_with("stack_"))
        .collect();
    if stack.len() != expected {
        return Ok(Verdict::fail(format!(
            "expected {expected} stack blocks, state has {}",
            stack.len()
        )));
    }
    stack.sort_by(|a, b| a.center.z.total_cmp(&b.center.z));
    let mut below = base;
    for block in stack {
        let reach = below.length.min(below.width) / 2.0 + EPS;
        let off = block.center.xy_distance(&below.center);
        if off > reach {
            return Ok(Verdict::fail(format!(
                "{} is {off:.3} m off {}'s center, limit {reach:.3}",
                block.name, below.name
            )));
        }
        if (block.bottom() - below.top()).abs() > EPS {
            return Ok(Verdict::fail(format!(
                "{} does not rest on {} (gap {:.3} m)",
                block.name,
                below.name,
                block.bottom() - below.top()
            )));
        }
        below = block;
    }
    Ok(Verdict::pass())
}

fn rubbish_in_bin(instance: &TaskInstance, state: &EnvState) -> Result<Verdict, Verdict> {
    let rubbish = find(state, "rubbish")?;
    let bin = find(state, binding(instance, "target_bin")?)?;
    Ok(verdict_from(contained_in(rubbish, bin)))
}

fn basketball_in_hoop(instance: &TaskInstance, trace_states: &[EnvState]) -> Result<Verdict, Verdict> {
    let hoop_id = binding(instance, "target_hoop")?;
    for state in trace_states {
        let (ball, hoop) = (find(state, "ball")?, find(state, hoop_id)?);
        let in_band = (ball.center.z - hoop.center.z).abs() <= hoop.height / 2.0 + EPS;
        if in_band && hoop.footprint().contains_point(ball.center.x, ball.center.y) {
            return Ok(Verdict::pass());
        }
    }
    Ok(Verdict::fail("the ball never passed through the hoop opening"))
}

fn close_jar(instance: &TaskInstance, state: &EnvState) -> Result<Verdict, Verdict> {
    let lid = find(state, "lid")?;
    let jar = find(state, binding(instance, "target_jar")?)?;
    let off = lid.center.xy_distance(&jar.center);
    if off > EPS {
        return Ok(Verdict::fail(format!(
            "lid is {off:.3} m off the {} center",
            jar.name
        )));
    }
    if (lid.bottom() - jar.top()).abs() > EPS {
        return Ok(Verdict::fail(format!(
            "lid underside is {:.3} m from the {} rim",
            lid.bottom() - jar.top(),
            jar.name
        )));
    }
    Ok(Verdict::pass())
}

fn insert_in_peg(instance: &TaskInstance, state: &EnvState) -> Result<Verdict, Verdict> {
    let ring = find(state, "ring")?;
    let peg = find(state, binding(instance, "target_peg")?)?;
    let off = ring.center.xy_distance(&peg.center);
    if off > EPS {
        return Ok(Verdict::fail(format!("ring is {off:.3} m off the {}", peg.name)));
    }
    if ring.bottom() > peg.top() - EPS {
        return Ok(Verdict::fail(format!("ring is not threaded down the {}", peg.name)));
    }
    Ok(Verdict::pass())
}

fn meat_off_grill(instance: &TaskInstance, state: &EnvState) -> Result<Verdict, Verdict> {
    let meat = find(state, binding(instance, "target_meat")?)?;
    let zone = find(state, binding(instance, "target_zone")?)?;
    Ok(verdict_from(contained_in(meat, zone)))
}

fn open_bottle(instance: &TaskInstance, state: &EnvState) -> Result<Verdict, Verdict> {
    let cap_id = binding(instance, "target_cap")?;
    let before = find(&instance.initial_state, cap_id)?;
    let after = find(state, cap_id)?;
    let (dx, dy, dz) = (
        after.center.x - before.center.x,
        after.center.y - before.center.y,
        after.center.z - before.center.z,
    );
    let moved = (dx * dx + dy * dy + dz * dz).sqrt();
    let required = 2.0 * after.height;
    if moved < required {
        return Ok(Verdict::fail(format!(
            "cap moved {moved:.3} m, needs at least {required:.3}"
        )));
    }
    Ok(Verdict::pass())
}

fn empty_container(instance: &TaskInstance, state: &EnvState) -> Result<Verdict, Verdict> {
    let target = find(state, binding(instance, "target_container")?)?;
    let items: Vec<&ObjectState> = state
        .objects
        .iter()
        .filter(|o| o.id.as_str().starts_with("item_"))
        .collect();
    if items.is_empty() {
        return Ok(Verdict::fail("no items found in the state"));
    }
    for item in items {
        if let Err(reason) = contained_in(item, target) {
            return Ok(Verdict::fail(reason));
        }
    }
    Ok(Verdict::pass())
}

pub(crate) fn verify_instance(instance: &TaskInstance, final_state: &EnvState, trace_states: &[EnvState]) -> Verdict {
    let result = match instance.spec.task_id {
        TaskId::BasketballInHoop => {
            // transit matters here: scan the whole trace, then the end state
            if trace_states.is_empty() {
                basketball_in_hoop(instance, std::slice::from_ref(final_state))
            } else {
                basketball_in_hoop(instance, trace_states)
            }
        }
        TaskId::CloseJar => close_jar(instance, final_state),
        TaskId::EmptyContainer => empty_container(instance, final_state),
        TaskId::InsertInPeg => insert_in_peg(instance, final_state),
        TaskId::MeatOffGrill => meat_off_grill(instance, final_state),
        TaskId::OpenBottle => open_bottle(instance, final_state),
        TaskId::PutBlock => put_block(instance, final_state),
        TaskId::RubbishInBin => rubbish_in_bin(instance, final_state),
        TaskId::StackBlocks => stack_blocks(instance, final_state),
    };
    match result {
        Ok(verdict) | Err(verdict) => verdict,
    }
}
