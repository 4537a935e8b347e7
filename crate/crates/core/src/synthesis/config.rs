use serde::{Deserialize, Serialize};

use super::{Result, SynthesisError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRange {
    pub min: usize,
    pub max: usize,
}

/// Lognormal distribution given by its median and the sd of `ln X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogNormalSpec {
    pub median: f64,
    pub log_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CohortConfig {
    pub n_benign: usize,
    pub n_malignant: usize,
    pub n_counter: usize,
    pub prior_b: f64,
    pub prior_m: f64,
    /// Observation window length W.
    pub window: usize,
    /// Total simulated steps.
    pub horizon: usize,
    pub noise_sigma: f64,
    /// Carrying capacity, also the upper mass bound for scaling.
    pub k: f64,
    /// Initial mass range.
    pub x0: MassRange,
    pub benign_r: RateRange,
    /// Growth-rate range reached after the drift ramp.
    pub malignant_r: RateRange,
    pub drift_time: StepRange,
    pub ramp_steps: usize,
    /// Relative deviation from the pre-drift steady state that counts as detection.
    pub detection_threshold: f64,
    pub p53_benign: LogNormalSpec,
    pub p53_malignant: LogNormalSpec,
    /// Upper scaling bound for p53; draws above it are clamped.
    pub p53_max: f64,
    /// Post-drift growth rates whose noise-free exponent falls below this are redrawn.
    pub min_post_drift_lyapunov: f64,
    pub max_retries: usize,
    pub master_seed: u64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            n_benign: 500,
            n_malignant: 500,
            n_counter: 0,
            prior_b: 0.5,
            prior_m: 0.5,
            window: 16,
            horizon: 512,
            noise_sigma: 0.01,
            k: 1.0,
            x0: MassRange { min: 0.02, max: 0.1 },
            benign_r: RateRange { min: 1.5, max: 2.8 },
            malignant_r: RateRange { min: 3.7, max: 4.0 },
            drift_time: StepRange { min: 64, max: 320 },
            ramp_steps: 64,
            detection_threshold: 0.1,
            p53_benign: LogNormalSpec { median: 1.0, log_sd: 0.4 },
            p53_malignant: LogNormalSpec { median: 3.0, log_sd: 0.4 },
            p53_max: 15.0,
            min_post_drift_lyapunov: 0.1,
            max_retries: 16,
            master_seed: 1,
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SynthesisError::InvalidConfig(msg.into()))
}

impl CohortConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !(self.prior_b >= 0.0 && self.prior_m >= 0.0) {
            return invalid("priors must be nonnegative");
        }
        if (self.prior_b + self.prior_m - 1.0).abs() > 1e-12 {
            return invalid(format!("priors {} + {} must sum to 1", self.prior_b, self.prior_m));
        }
        if self.window == 0 {
            return invalid("window must be at least 1");
        }
        if !finite_pos(self.k) {
            return invalid("k must be positive");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return invalid("noise_sigma must be nonnegative");
        }
        if !(self.x0.min > 0.0 && self.x0.min <= self.x0.max && self.x0.max < self.k) {
            return invalid("x0 range must satisfy 0 < min <= max < k");
        }
        let b = self.benign_r;
        if !(b.min > 1.0 && b.min <= b.max && b.max < 3.0) {
            return invalid("benign_r must lie inside (1, 3) with min <= max");
        }
        let m = self.malignant_r;
        if !(m.min > 3.57 && m.min <= m.max && m.max <= 4.0) {
            return invalid("malignant_r must lie inside (3.57, 4] with min <= max");
        }
        if self.drift_time.min == 0 || self.drift_time.min > self.drift_time.max {
            return invalid("drift_time must satisfy 1 <= min <= max");
        }
        if self.ramp_steps == 0 {
            return invalid("ramp_steps must be at least 1");
        }
        if self.drift_time.max + self.ramp_steps + self.window > self.horizon {
            return invalid(format!(
                "horizon {} too short: drift_time.max + ramp_steps + window = {}",
                self.horizon,
                self.drift_time.max + self.ramp_steps + self.window
            ));
        }
        if !finite_pos(self.detection_threshold) {
            return invalid("detection_threshold must be positive");
        }
        for (name, p) in [("p53_benign", self.p53_benign), ("p53_malignant", self.p53_malignant)] {
            if !(finite_pos(p.median) && p.log_sd.is_finite() && p.log_sd >= 0.0) {
                return invalid(format!("{name} needs a positive median and nonnegative log_sd"));
            }
        }
        if !finite_pos(self.p53_max) {
            return invalid("p53_max must be positive");
        }
        if !self.min_post_drift_lyapunov.is_finite() {
            return invalid("min_post_drift_lyapunov must be finite");
        }
        Ok(())
    }
}
