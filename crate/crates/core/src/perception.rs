//! Noisy multi-view perception channel.
//!
//! `observe` renders K independent noisy views of the true scene: Gaussian
//! noise on every pose and dimension field, plus occasional gross outliers
//! that teleport an object's reported xy position. `fuse` combines the views
//! per object with a component-wise lower median, which tolerates up to
//! `(K - 1) / 2` corrupted views per component; yaw is fused on the circle
//! by unwrapping each view around the circular mean first.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{normalize_yaw, EnvState, ObjectId, Pose};

/// Noise parameters for one camera view. Units: meters and radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub sigma_pos: f64,
    pub sigma_dim: f64,
    pub sigma_yaw: f64,
    /// Per object, per view chance of a gross xy mislocalization.
    pub outlier_probability: f64,
    /// Outlier offsets are uniform in `[-range, range]` on x and y.
    pub outlier_offset_range: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_pos: 0.005,
            sigma_dim: 0.003,
            sigma_yaw: 0.035,
            outlier_probability: 0.1,
            outlier_offset_range: 0.2,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), String> {
        for (label, v) in [
            ("sigma_pos", self.sigma_pos),
            ("sigma_dim", self.sigma_dim),
            ("sigma_yaw", self.sigma_yaw),
            ("outlier_offset_range", self.outlier_offset_range),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("{label} must be finite and non-negative, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.outlier_probability) {
            return Err(format!(
                "outlier_probability must be in [0, 1], got {}",
                self.outlier_probability
            ));
        }
        Ok(())
    }
}

/// One object as reported by one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectEstimate {
    pub id: ObjectId,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// Ground-truth label: this view's xy was corrupted. Carried for
    /// diagnostics; `fuse` does not read it.
    pub is_outlier: bool,
}

/// One full view: an estimate per scene object, in scene order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEstimate {
    pub view_index: usize,
    pub estimates: Vec<ObjectEstimate>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuseError {
    #[error("no views to fuse")]
    NoViews,
    #[error("view {view} reports {got} objects, scene has {expected}")]
    ViewCountMismatch { view: usize, expected: usize, got: usize },
    #[error("view {view} estimate {index} is for object {got}, scene has {expected} there")]
    ObjectMismatch {
        view: usize,
        index: usize,
        expected: ObjectId,
        got: ObjectId,
    },
}

/// Render `views` noisy views of `state`. Deterministic in `seed`.
pub fn observe(state: &EnvState, model: &NoiseModel, views: usize, seed: u64) -> Vec<ViewEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = Normal::new(0.0, model.sigma_pos).expect("finite sigma");
    let dim = Normal::new(0.0, model.sigma_dim).expect("finite sigma");
    let yaw = Normal::new(0.0, model.sigma_yaw).expect("finite sigma");
    (0..views)
        .map(|view_index| {
            let estimates = state
                .objects
                .iter()
                .map(|o| {
                    let mut e = ObjectEstimate {
                        id: o.id.clone(),
                        x: o.center.x + pos.sample(&mut rng),
                        y: o.center.y + pos.sample(&mut rng),
                        z: o.center.z + pos.sample(&mut rng),
                        yaw: normalize_yaw(o.center.yaw + yaw.sample(&mut rng)).expect("finite"),
                        length: (o.length + dim.sample(&mut rng)).max(1e-6),
                        width: (o.width + dim.sample(&mut rng)).max(1e-6),
                        height: (o.height + dim.sample(&mut rng)).max(1e-6),
                        is_outlier: false,
                    };
                    // the offset draws happen unconditionally so the stream
                    // consumed per object does not depend on the coin flip
                    let corrupt = rng.gen::<f64>() < model.outlier_probability;
                    let r = model.outlier_offset_range;
                    let (dx, dy) = (rng.gen_range(-r..=r), rng.gen_range(-r..=r));
                    if corrupt {
                        e.x += dx;
                        e.y += dy;
                        e.is_outlier = true;
                    }
                    e
                })
                .collect();
            ViewEstimate { view_index, estimates }
        })
        .collect()
}

/// Lower median: for even counts, the smaller of the two middle values.
fn lower_median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

fn fuse_yaw(values: &[f64]) -> f64 {
    let (sin_sum, cos_sum) = values.iter().fold((0.0, 0.0), |(s, c), v| (s + v.sin(), c + v.cos()));
    let mean = sin_sum.atan2(cos_sum);
    let mut unwrapped: Vec<f64> = values
        .iter()
        .map(|&v| mean + normalize_yaw(v - mean).expect("finite"))
        .collect();
    normalize_yaw(lower_median(&mut unwrapped)).expect("finite")
}

/// Fuse views into a single estimated scene. `base` supplies everything the
/// views do not carry: identities, names, categories, flags, the gripper and
/// the workspace. Per-object scalar fields are fused independently.
pub fn fuse(views: &[ViewEstimate], base: &EnvState) -> Result<EnvState, FuseError> {
    if views.is_empty() {
        return Err(FuseError::NoViews);
    }
    for v in views {
        if v.estimates.len() != base.objects.len() {
            return Err(FuseError::ViewCountMismatch {
                view: v.view_index,
                expected: base.objects.len(),
                got: v.estimates.len(),
            });
        }
        for (i, (e, o)) in v.estimates.iter().zip(&base.objects).enumerate() {
            if e.id != o.id {
                return Err(FuseError::ObjectMismatch {
                    view: v.view_index,
                    index: i,
                    expected: o.id.clone(),
                    got: e.id.clone(),
                });
            }
        }
    }
    let mut fused = base.clone();
    for (i, obj) in fused.objects.iter_mut().enumerate() {
        let field = |f: fn(&ObjectEstimate) -> f64| -> f64 {
            let mut vals: Vec<f64> = views.iter().map(|v| f(&v.estimates[i])).collect();
            lower_median(&mut vals)
        };
        let yaws: Vec<f64> = views.iter().map(|v| v.estimates[i].yaw).collect();
        obj.center = Pose::new(field(|e| e.x), field(|e| e.y), field(|e| e.z), fuse_yaw(&yaws))
            .expect("fused fields are finite");
        obj.length = field(|e| e.length).max(1e-6);
        obj.width = field(|e| e.width).max(1e-6);
        obj.height = field(|e| e.height).max(1e-6);
    }
    Ok(fused)
}
