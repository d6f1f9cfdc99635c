//! Scene builders, one per task. Free-standing objects are rejection-sampled
//! into a square spawn region with inflated footprints so nothing touches;
//! mounted objects (meat on the grill, the cap on the bottle, the hoop on
//! its stand, fruit on the tray) are constructed in the carrier's local
//! frame and inherit its yaw where that matters.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Bindings, RandomizeError, PLACEMENT_ATTEMPTS, SPAWN_INFLATION};
use crate::geom::{overlap_area, Footprint};
use crate::model::{ObjectCategory, ObjectState, Pose, RandomizerParams};

fn inflated(cx: f64, cy: f64, yaw: f64, l: f64, w: f64) -> Footprint {
    Footprint {
        cx,
        cy,
        yaw,
        half_l: l / 2.0 + SPAWN_INFLATION,
        half_w: w / 2.0 + SPAWN_INFLATION,
    }
}

fn clear_of(fp: &Footprint, claimed: &[Footprint]) -> bool {
    claimed.iter().all(|c| overlap_area(fp, c) <= 1e-12)
}

/// Sample an (x, y, yaw) for an `l` by `w` footprint inside the centered
/// square of half-extent `half_range`, clear of everything claimed so far.
/// On success the spot is claimed.
fn place_free(
    rng: &mut ChaCha8Rng,
    claimed: &mut Vec<Footprint>,
    half_range: f64,
    l: f64,
    w: f64,
    random_yaw: bool,
) -> Result<(f64, f64, f64), RandomizeError> {
    for _ in 0..PLACEMENT_ATTEMPTS {
        let x = rng.gen_range(-half_range..=half_range);
        let y = rng.gen_range(-half_range..=half_range);
        let yaw = if random_yaw { rng.gen_range(-PI..PI) } else { 0.0 };
        let fp = inflated(x, y, yaw, l, w);
        if clear_of(&fp, claimed) {
            claimed.push(fp);
            return Ok((x, y, yaw));
        }
    }
    Err(RandomizeError::PlacementExhausted {
        attempts: PLACEMENT_ATTEMPTS,
    })
}

/// Sample a spot on top of a carrier surface: local offsets up to
/// `local_half` in the carrier frame, rotated out by the carrier yaw.
/// Claims go to a caller-owned list (the carrier already shields these
/// spots from free-standing objects).
fn place_on(
    rng: &mut ChaCha8Rng,
    claimed: &mut Vec<Footprint>,
    carrier_center: (f64, f64),
    carrier_yaw: f64,
    local_half: f64,
    l: f64,
    w: f64,
) -> Result<(f64, f64, f64), RandomizeError> {
    let (s, c) = carrier_yaw.sin_cos();
    for _ in 0..PLACEMENT_ATTEMPTS {
        let u = rng.gen_range(-local_half..=local_half);
        let v = rng.gen_range(-local_half..=local_half);
        let yaw = rng.gen_range(-PI..PI);
        let x = carrier_center.0 + c * u - s * v;
        let y = carrier_center.1 + s * u + c * v;
        let fp = inflated(x, y, yaw, l, w);
        if clear_of(&fp, claimed) {
            claimed.push(fp);
            return Ok((x, y, yaw));
        }
    }
    Err(RandomizeError::PlacementExhausted {
        attempts: PLACEMENT_ATTEMPTS,
    })
}

/// `n` distinct colors by partial shuffle of the pool.
fn pick_colors(rng: &mut ChaCha8Rng, pool: &[String], n: usize) -> Vec<String> {
    assert!(n <= pool.len(), "color pool too small: need {n}, have {}", pool.len());
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    for i in 0..n {
        let j = rng.gen_range(i..idx.len());
        idx.swap(i, j);
    }
    idx[..n].iter().map(|&i| pool[i].clone()).collect()
}

fn on_table(
    id: String,
    name: String,
    (x, y, yaw): (f64, f64, f64),
    l: f64,
    w: f64,
    h: f64,
    graspable: bool,
    category: ObjectCategory,
) -> ObjectState {
    let pose = Pose::new(x, y, h / 2.0, yaw).expect("sampled coordinates are finite");
    ObjectState::new(id, name, pose, l, w, h, graspable, category).expect("positive dimensions")
}

fn count_in(rng: &mut ChaCha8Rng, range: (u32, u32)) -> u32 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.gen_range(range.0..=range.1)
    }
}

pub(crate) fn put_block(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    let colors = pick_colors(rng, &p.color_pool, 2);
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    for color in &colors {
        let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.12, 0.12, true)?;
        objects.push(on_table(
            format!("zone_{color}"),
            format!("{color} target area"),
            spot,
            0.12,
            0.12,
            0.004,
            false,
            ObjectCategory::TargetZone,
        ));
    }
    let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.04, 0.04, true)?;
    objects.push(on_table("block".into(), "block".into(), spot, 0.04, 0.04, 0.04, true, ObjectCategory::Block));
    let mut bindings = Bindings::new();
    bindings.insert("color".into(), colors[0].clone());
    bindings.insert("target_zone".into(), format!("zone_{}", colors[0]));
    Ok((objects, bindings))
}

pub(crate) fn stack_blocks(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    let k = count_in(rng, p.primary_count) as usize;
    let d = count_in(rng, p.distractor_count) as usize;
    let colors = pick_colors(rng, &p.color_pool, 2 + d);
    let (stack_color, base_color) = (&colors[0], &colors[1]);
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.04, 0.04, true)?;
    objects.push(on_table(
        "base".into(),
        format!("{base_color} block"),
        spot,
        0.04,
        0.04,
        0.04,
        true,
        ObjectCategory::Block,
    ));
    for i in 1..=k {
        let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.04, 0.04, true)?;
        objects.push(on_table(
            format!("stack_{i}"),
            format!("{stack_color} block {i}"),
            spot,
            0.04,
            0.04,
            0.04,
            true,
            ObjectCategory::Block,
        ));
    }
    for (i, color) in colors[2..].iter().enumerate() {
        let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.04, 0.04, true)?;
        objects.push(on_table(
            format!("distractor_{}", i + 1),
            format!("{color} block"),
            spot,
            0.04,
            0.04,
            0.04,
            true,
            ObjectCategory::Block,
        ));
    }
    let mut bindings = Bindings::new();
    bindings.insert("count".into(), k.to_string());
    bindings.insert("color".into(), stack_color.clone());
    bindings.insert("base_color".into(), base_color.clone());
    bindings.insert("target_base".into(), "base".into());
    Ok((objects, bindings))
}

pub(crate) fn rubbish_in_bin(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.10, 0.10, true)?;
    objects.push(on_table("bin".into(), "bin".into(), spot, 0.10, 0.10, 0.12, false, ObjectCategory::Container));
    let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.025, 0.025, true)?;
    objects.push(on_table(
        "rubbish".into(),
        "rubbish".into(),
        spot,
        0.025,
        0.025,
        0.025,
        true,
        ObjectCategory::Block,
    ));
    let d = count_in(rng, p.distractor_count);
    for i in 1..=d {
        let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.035, 0.035, true)?;
        objects.push(on_table(
            format!("apple_{i}"),
            format!("apple {i}"),
            spot,
            0.035,
            0.035,
            0.035,
            true,
            ObjectCategory::Block,
        ));
    }
    let mut bindings = Bindings::new();
    bindings.insert("target_bin".into(), "bin".into());
    Ok((objects, bindings))
}

pub(crate) fn basketball_in_hoop(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    // keep the stand inboard so the offset hoop stays well inside the table
    let (sx, sy, syaw) = place_free(rng, &mut claimed, 0.28, 0.05, 0.05, true)?;
    objects.push(on_table(
        "stand".into(),
        "hoop stand".into(),
        (sx, sy, syaw),
        0.05,
        0.05,
        0.25,
        false,
        ObjectCategory::Fixture,
    ));
    // the hoop hangs off the stand top, overhanging along the stand's x axis
    let (s, c) = syaw.sin_cos();
    let (hx, hy) = (sx + 0.06 * c, sy + 0.06 * s);
    let hoop_pose = Pose::new(hx, hy, 0.25 + 0.01, syaw).expect("finite");
    objects.push(
        ObjectState::new("hoop", "hoop", hoop_pose, 0.10, 0.10, 0.02, false, ObjectCategory::Ring)
            .expect("positive dims"),
    );
    claimed.push(inflated(hx, hy, syaw, 0.10, 0.10));
    let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.04, 0.04, true)?;
    objects.push(on_table(
        "ball".into(),
        "basketball".into(),
        spot,
        0.04,
        0.04,
        0.04,
        true,
        ObjectCategory::Block,
    ));
    let mut bindings = Bindings::new();
    bindings.insert("target_hoop".into(), "hoop".into());
    Ok((objects, bindings))
}

pub(crate) fn close_jar(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    let colors = pick_colors(rng, &p.color_pool, 2);
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    for color in &colors {
        let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.06, 0.06, true)?;
        objects.push(on_table(
            format!("jar_{color}"),
            format!("{color} jar"),
            spot,
            0.06,
            0.06,
            0.08,
            false,
            ObjectCategory::Container,
        ));
    }
    let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.07, 0.07, true)?;
    objects.push(on_table("lid".into(), "lid".into(), spot, 0.07, 0.07, 0.015, true, ObjectCategory::Lid));
    let mut bindings = Bindings::new();
    bindings.insert("color".into(), colors[0].clone());
    bindings.insert("target_jar".into(), format!("jar_{}", colors[0]));
    Ok((objects, bindings))
}

pub(crate) fn insert_in_peg(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    let colors = pick_colors(rng, &p.color_pool, 3);
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    for color in &colors {
        let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.025, 0.025, true)?;
        objects.push(on_table(
            format!("peg_{color}"),
            format!("{color} peg"),
            spot,
            0.025,
            0.025,
            0.12,
            false,
            ObjectCategory::Peg,
        ));
    }
    let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.06, 0.06, true)?;
    objects.push(on_table("ring".into(), "ring".into(), spot, 0.06, 0.06, 0.02, true, ObjectCategory::Ring));
    let mut bindings = Bindings::new();
    bindings.insert("color".into(), colors[0].clone());
    bindings.insert("target_peg".into(), format!("peg_{}", colors[0]));
    Ok((objects, bindings))
}

pub(crate) fn meat_off_grill(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    let (gx, gy, gyaw) = place_free(rng, &mut claimed, 0.30, 0.12, 0.12, true)?;
    objects.push(on_table(
        "grill".into(),
        "grill".into(),
        (gx, gy, gyaw),
        0.12,
        0.12,
        0.04,
        false,
        ObjectCategory::Fixture,
    ));
    // two fixed slots along the grill's x axis, occupants shuffled
    let (s, c) = gyaw.sin_cos();
    let mut slots = [(-0.03f64, 0.0f64), (0.03, 0.0)];
    if rng.gen::<bool>() {
        slots.swap(0, 1);
    }
    for (name, (u, v)) in ["chicken", "steak"].iter().zip(slots) {
        let pose = Pose::new(gx + c * u - s * v, gy + s * u + c * v, 0.04 + 0.015, gyaw).expect("finite");
        objects.push(
            ObjectState::new(*name, *name, pose, 0.035, 0.035, 0.03, true, ObjectCategory::Block)
                .expect("positive dims"),
        );
    }
    let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.10, 0.10, true)?;
    objects.push(on_table(
        "zone".into(),
        "designated area".into(),
        spot,
        0.10,
        0.10,
        0.004,
        false,
        ObjectCategory::TargetZone,
    ));
    let target = if rng.gen::<bool>() { "chicken" } else { "steak" };
    let mut bindings = Bindings::new();
    bindings.insert("meat".into(), target.into());
    bindings.insert("target_meat".into(), target.into());
    bindings.insert("target_zone".into(), "zone".into());
    Ok((objects, bindings))
}

pub(crate) fn open_bottle(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    let (bx, by, byaw) = place_free(rng, &mut claimed, p.spawn_half_extent, 0.05, 0.05, true)?;
    objects.push(on_table(
        "bottle".into(),
        "wine bottle".into(),
        (bx, by, byaw),
        0.05,
        0.05,
        0.15,
        false,
        ObjectCategory::Fixture,
    ));
    let cap_pose = Pose::new(bx, by, 0.15 + 0.015, byaw).expect("finite");
    objects.push(
        ObjectState::new("cap", "bottle cap", cap_pose, 0.03, 0.03, 0.03, true, ObjectCategory::Lid)
            .expect("positive dims"),
    );
    let mut bindings = Bindings::new();
    bindings.insert("target_cap".into(), "cap".into());
    Ok((objects, bindings))
}

pub(crate) fn empty_container(rng: &mut ChaCha8Rng, p: &RandomizerParams) -> Result<(Vec<ObjectState>, Bindings), RandomizeError> {
    const ITEM_NAMES: [&str; 4] = ["apple", "pear", "plum", "lemon"];
    let colors = pick_colors(rng, &p.color_pool, 2);
    let mut claimed = Vec::new();
    let mut objects = Vec::new();
    let (tx, ty, tyaw) = place_free(rng, &mut claimed, 0.30, 0.16, 0.16, true)?;
    objects.push(on_table(
        "tray".into(),
        "large container".into(),
        (tx, ty, tyaw),
        0.16,
        0.16,
        0.03,
        false,
        ObjectCategory::Container,
    ));
    let n = count_in(rng, p.primary_count) as usize;
    let mut names: Vec<&str> = ITEM_NAMES.to_vec();
    for i in 0..n {
        let j = rng.gen_range(i..names.len());
        names.swap(i, j);
    }
    let mut tray_claims = Vec::new();
    for name in &names[..n] {
        let (x, y, yaw) = place_on(rng, &mut tray_claims, (tx, ty), tyaw, 0.055, 0.03, 0.03)?;
        let pose = Pose::new(x, y, 0.03 + 0.015, yaw).expect("finite");
        objects.push(
            ObjectState::new(format!("item_{name}"), *name, pose, 0.03, 0.03, 0.03, true, ObjectCategory::Block)
                .expect("positive dims"),
        );
    }
    for color in &colors {
        let spot = place_free(rng, &mut claimed, p.spawn_half_extent, 0.14, 0.14, true)?;
        objects.push(on_table(
            format!("container_{color}"),
            format!("{color} container"),
            spot,
            0.14,
            0.14,
            0.03,
            false,
            ObjectCategory::Container,
        ));
    }
    let mut bindings = Bindings::new();
    bindings.insert("color".into(), colors[0].clone());
    bindings.insert("target_container".into(), format!("container_{}", colors[0]));
    Ok((objects, bindings))
}
