//! Episode seed derivation.
//!
//! Every episode seed is a splitmix64 mix of (master seed, domain, task,
//! attempt index) with the top bit forced to the domain tag: collection
//! seeds always have bit 63 clear, evaluation seeds always have it set, so
//! the two families are disjoint by construction for any master seed.

use benchtop_core::model::TaskId;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedDomain {
    Collection = 0,
    Evaluation = 1,
}

/// splitmix64 step (Steele, Lea, Flood mix constants).
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for attempt `index` of `task` in `domain`.
pub fn episode_seed(master: u64, domain: SeedDomain, task: TaskId, index: u64) -> u64 {
    let mut x = splitmix64(master);
    x = splitmix64(x ^ (domain as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    x = splitmix64(x ^ task.ordinal().wrapping_mul(0xa076_1d64_78bd_642f));
    x = splitmix64(x ^ index.wrapping_mul(0xe703_7ed1_a0b4_28db));
    let tagged = (x & !(1u64 << 63)) | ((domain as u64) << 63);
    debug_assert_eq!(tagged >> 63, domain as u64);
    tagged
}

/// Seed for the perception channel of one episode, decorrelated from the
/// scene randomization driven by the episode seed itself.
pub fn observation_seed(episode_seed: u64) -> u64 {
    splitmix64(episode_seed ^ 0x0b5e_7a71_0a5e_edf3)
}

/// Seed for the degraded planner's sabotage draws.
pub fn sabotage_seed(episode_seed: u64) -> u64 {
    splitmix64(episode_seed ^ 0x5ab0_7a6e_5eed_0001)
}
