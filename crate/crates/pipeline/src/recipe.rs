//! Fine-tuning hyperparameters shipped with every dataset so a run is
//! reproducible end to end. These are the settings our reference adapter
//! training uses; downstream trainers may override them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingRecipe {
    pub epochs: u32,
    pub effective_batch_size: u32,
    /// Low-rank adapter dimension.
    pub adapter_rank: u32,
    /// Adapter scaling factor (often called alpha).
    pub adapter_scaling: u32,
    pub learning_rate: f64,
    pub schedule: String,
    pub objective: String,
}

impl Default for TrainingRecipe {
    fn default() -> Self {
        Self {
            epochs: 5,
            effective_batch_size: 24,
            adapter_rank: 64,
            adapter_scaling: 16,
            learning_rate: 2e-5,
            schedule: "cosine".into(),
            objective: "completion tokens only".into(),
        }
    }
}
