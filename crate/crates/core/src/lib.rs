//! Deterministic kinematic tabletop world: scene model, plan language,
//! simulator, task library, prompt construction and a noisy multi-view
//! perception channel.
//!
//! The simulator is intentionally kinematic. Moves teleport the gripper,
//! grasping is a geometric predicate, and releases drop the carried object
//! straight down onto whatever supports it. Every function is a pure map
//! from (state, inputs) to state, so identical seeds give identical bytes.

pub mod dsl;
pub mod geom;
pub mod model;
pub mod perception;
pub mod prompt;
pub mod sim;
pub mod tasks;
