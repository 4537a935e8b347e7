//! Seeded synthetic cohorts.
//!
//! Benign records follow the logistic map with a growth rate in the stable
//! range and settle on the steady-state mass `k (1 - 1/r)`. Malignant records
//! start the same way, then at a sampled drift time the growth rate ramps
//! linearly into the chaotic range. Random counter-examples fill the feature
//! space uniformly and are flagged as synthetic.
//!
//! Per-record seeds are `seed::derive(master_seed, id)`, so a cohort is a pure
//! function of its [`CohortConfig`].

mod config;
mod features;
mod generate;
mod io;
mod split;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{CohortConfig, LogNormalSpec, MassRange, RateRange, StepRange};
pub use features::{phase_target, to_feature_vector, FeatureSpace, PhaseId};
pub use generate::{
    generate_benign, generate_cohort, generate_malignant, synthesize_counter_examples, trace_record, RecordTrace,
    COUNTER_STREAM,
};
pub use io::{
    load_cohort, read_cohort, save_cohort, sidecar_path, write_cohort_csv, write_sidecar, COHORT_FORMAT_VERSION,
};
pub use split::{holdout, split};

use crate::dynamics::DynamicsError;

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("invalid cohort config: {0}")]
    InvalidConfig(String),
    #[error("record {id}: no detection event after {attempts} attempts")]
    Generation { id: u64, attempts: usize },
    #[error("usage: {0}")]
    Usage(String),
    #[error("feature `{feature}` = {value} outside [0, {bound}]")]
    Scaling { feature: String, value: f64, bound: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported cohort format_version {0}")]
    Version(u64),
    #[error("invalid record {id}: {message}")]
    InvalidRecord { id: u64, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Sidecar { path: PathBuf, message: String },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub type Result<T> = std::result::Result<T, SynthesisError>;

/// Class label: benign (0) stays benign, malignant (1) metastasizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Benign,
    Malignant,
}

impl Label {
    pub fn bit(self) -> u8 {
        match self {
            Label::Benign => 0,
            Label::Malignant => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Label::Benign),
            1 => Some(Label::Malignant),
            _ => None,
        }
    }

    pub fn target(self) -> f64 {
        f64::from(self.bit())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub id: u64,
    pub label: Label,
    /// Random counter-example rather than a simulated growth.
    pub synthetic_counter: bool,
    /// p53-binding-protein concentration.
    pub p53_conc: f64,
    /// The last `window` observed masses of the simulated horizon.
    pub mass_series: Vec<f64>,
    /// Maximum mass over the whole simulated horizon.
    pub max_mass: f64,
    /// Phase-I target.
    pub steady_state_mass: f64,
    /// Phase-II target.
    pub detection_mass: f64,
    pub seed: u64,
}

impl PatientRecord {
    pub fn is_simulated_benign(&self) -> bool {
        self.label == Label::Benign && !self.synthetic_counter
    }

    /// Checks the record against a window length and mass bound. The
    /// `max_mass` dominance rule only applies to simulated records, since
    /// counter-examples draw every feature independently.
    pub fn validate(&self, window: usize, k: f64) -> Result<()> {
        let bad = |message: String| SynthesisError::InvalidRecord { id: self.id, message };
        if self.mass_series.len() != window {
            return Err(bad(format!("mass series has {} values, expected {window}", self.mass_series.len())));
        }
        let in_range = |v: f64| v.is_finite() && (0.0..=k).contains(&v);
        if let Some(m) = self.mass_series.iter().find(|m| !in_range(**m)) {
            return Err(bad(format!("mass {m} outside [0, {k}]")));
        }
        for (name, v) in [
            ("max_mass", self.max_mass),
            ("steady_state_mass", self.steady_state_mass),
            ("detection_mass", self.detection_mass),
        ] {
            if !in_range(v) {
                return Err(bad(format!("{name} = {v} outside [0, {k}]")));
            }
        }
        if !(self.p53_conc.is_finite() && self.p53_conc >= 0.0) {
            return Err(bad(format!("p53_conc = {} must be nonnegative", self.p53_conc)));
        }
        if !self.synthetic_counter && self.mass_series.iter().any(|m| *m > self.max_mass) {
            return Err(bad("max_mass below an observed mass".into()));
        }
        if self.synthetic_counter && self.label != Label::Malignant {
            return Err(bad("counter-examples must carry label 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub records: Vec<PatientRecord>,
    pub config: CohortConfig,
    pub format_version: u64,
}

impl Cohort {
    /// Builds a cohort whose config counts are rewritten to match `records`.
    pub fn from_records(mut records: Vec<PatientRecord>, template: &CohortConfig) -> Result<Self> {
        records.sort_by_key(|r| r.id);
        let mut config = template.clone();
        config.n_benign = records.iter().filter(|r| r.is_simulated_benign()).count();
        config.n_malignant = records.iter().filter(|r| r.label == Label::Malignant && !r.synthetic_counter).count();
        config.n_counter = records.iter().filter(|r| r.synthetic_counter).count();
        let cohort = Self { records, config, format_version: COHORT_FORMAT_VERSION };
        cohort.validate()?;
        Ok(cohort)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn feature_space(&self) -> FeatureSpace {
        FeatureSpace::from_config(&self.config)
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        let benign = self.records.iter().filter(|r| r.is_simulated_benign()).count();
        let malignant = self.records.iter().filter(|r| r.label == Label::Malignant && !r.synthetic_counter).count();
        let counter = self.records.iter().filter(|r| r.synthetic_counter).count();
        if (benign, malignant, counter) != (c.n_benign, c.n_malignant, c.n_counter) {
            return Err(SynthesisError::InvalidConfig(format!(
                "record counts {benign}/{malignant}/{counter} differ from config {}/{}/{}",
                c.n_benign, c.n_malignant, c.n_counter
            )));
        }
        let mut ids: Vec<u64> = self.records.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(SynthesisError::InvalidRecord { id: w[0], message: "duplicate id".into() });
        }
        for r in &self.records {
            r.validate(c.window, c.k)?;
        }
        Ok(())
    }
}
