//! Per-phase fresh inputs, scaled to `[0, 1]` by fixed bounds.
//!
//! | phase | fresh inputs                 | width   |
//! |-------|------------------------------|---------|
//! | I     | `p53_conc`, `mass_series`    | `W + 1` |
//! | II    | `max_mass`                   | 1       |
//! | III   | none                         | 0       |

use serde::{Deserialize, Serialize};

use super::{CohortConfig, PatientRecord, Result, SynthesisError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseId {
    /// Regression to the benign steady-state mass.
    I,
    /// Regression to the mass at malignancy detection.
    II,
    /// Binary metastasis (1) versus benign (0).
    III,
}

impl PhaseId {
    pub const ALL: [PhaseId; 3] = [PhaseId::I, PhaseId::II, PhaseId::III];

    pub fn name(self) -> &'static str {
        match self {
            PhaseId::I => "I",
            PhaseId::II => "II",
            PhaseId::III => "III",
        }
    }
}

impl std::fmt::Display for PhaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Scaling bounds shared by cohort features and the nested model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpace {
    pub window: usize,
    pub p53_max: f64,
    pub mass_max: f64,
}

impl FeatureSpace {
    pub fn from_config(config: &CohortConfig) -> Self {
        Self { window: config.window, p53_max: config.p53_max, mass_max: config.k }
    }

    pub fn fresh_width(&self, phase: PhaseId) -> usize {
        match phase {
            PhaseId::I => self.window + 1,
            PhaseId::II => 1,
            PhaseId::III => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.window == 0 || !positive(self.p53_max) || !positive(self.mass_max) {
            return Err(SynthesisError::InvalidConfig(format!("invalid feature space {self:?}")));
        }
        Ok(())
    }
}

fn scale(feature: &str, value: f64, bound: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=bound).contains(&value) {
        Ok(value / bound)
    } else {
        Err(SynthesisError::Scaling { feature: feature.to_string(), value, bound })
    }
}

pub fn to_feature_vector(record: &PatientRecord, phase: PhaseId, space: &FeatureSpace) -> Result<Vec<f64>> {
    match phase {
        PhaseId::I => {
            if record.mass_series.len() != space.window {
                return Err(SynthesisError::InvalidRecord {
                    id: record.id,
                    message: format!("mass series length {} != window {}", record.mass_series.len(), space.window),
                });
            }
            let mut v = Vec::with_capacity(space.window + 1);
            v.push(scale("p53_conc", record.p53_conc, space.p53_max)?);
            for (i, m) in record.mass_series.iter().enumerate() {
                v.push(scale(&format!("mass_{i}"), *m, space.mass_max)?);
            }
            Ok(v)
        }
        PhaseId::II => Ok(vec![scale("max_mass", record.max_mass, space.mass_max)?]),
        PhaseId::III => Ok(Vec::new()),
    }
}

/// Scaled training target of `record` for `phase`.
pub fn phase_target(record: &PatientRecord, phase: PhaseId, space: &FeatureSpace) -> Result<f64> {
    match phase {
        PhaseId::I => scale("steady_state_mass", record.steady_state_mass, space.mass_max),
        PhaseId::II => scale("detection_mass", record.detection_mass, space.mass_max),
        PhaseId::III => Ok(record.label.target()),
    }
}
