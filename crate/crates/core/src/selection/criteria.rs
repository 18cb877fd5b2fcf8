use serde::{Deserialize, Serialize};

use crate::survival::{AftModel, SurvivalDataset};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub bic: f64,
}

impl InformationCriteria {
    pub fn from_parts(k: usize, n: usize, log_likelihood: f64) -> Self {
        Self {
            aic: 2.0 * k as f64 - 2.0 * log_likelihood,
            bic: k as f64 * (n as f64).ln() - 2.0 * log_likelihood,
        }
    }
}

/// AIC and BIC of `model` on `data`, with `k` the model's parameter count.
pub fn information_criteria(model: &AftModel, data: &SurvivalDataset) -> Result<InformationCriteria> {
    let ll = model.log_likelihood_of(data)?;
    Ok(InformationCriteria::from_parts(model.n_params, data.len(), ll))
}
