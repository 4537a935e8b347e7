use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;

use super::{Cohort, CohortConfig, FeatureSpace, Label, LogNormalSpec, PatientRecord, Result, SynthesisError};
use crate::dynamics::{lyapunov_exponent, noisy_step, LogisticParams, NoiseStream, ORBIT_START_FRACTION};
use crate::seed;

/// Seed stream reserved for a cohort's counter-examples; record ids never reach it.
pub const COUNTER_STREAM: u64 = u64::MAX;

const MAX_RATE_DRAWS: usize = 64;

/// Full noise-aware history behind one generated record.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTrace {
    /// Masses at steps `0..=horizon`.
    pub masses: Vec<f64>,
    pub r_start: f64,
    pub r_end: f64,
    pub drift_time: Option<usize>,
    /// First step index whose successor is produced at `r_end`.
    pub ramp_end: Option<usize>,
    pub detection_time: Option<usize>,
}

fn draw_p53(spec: &LogNormalSpec, cap: f64, rng: &mut ChaCha8Rng) -> f64 {
    let value = if spec.log_sd == 0.0 {
        spec.median
    } else {
        LogNormal::new(spec.median.ln(), spec.log_sd).expect("validated lognormal parameters").sample(rng)
    };
    value.min(cap)
}

fn observe(config: &CohortConfig, masses: &[f64]) -> (Vec<f64>, f64) {
    let series = masses[masses.len() - config.window..].to_vec();
    let max_mass = masses.iter().copied().fold(0.0, f64::max);
    (series, max_mass)
}

fn benign_trace(config: &CohortConfig, derived_seed: u64) -> Result<(RecordTrace, f64)> {
    let mut rng = seed::rng(derived_seed);
    let r = rng.random_range(config.benign_r.min..=config.benign_r.max);
    let x0 = rng.random_range(config.x0.min..=config.x0.max);
    let p53 = draw_p53(&config.p53_benign, config.p53_max, &mut rng);
    let mut noise = NoiseStream::new(rng.random());

    let params = LogisticParams::new(r, config.k)?;
    let mut masses = Vec::with_capacity(config.horizon + 1);
    let mut x = x0;
    masses.push(x);
    for _ in 0..config.horizon {
        x = noisy_step(x, &params, config.noise_sigma, &mut noise);
        masses.push(x);
    }
    let trace = RecordTrace { masses, r_start: r, r_end: r, drift_time: None, ramp_end: None, detection_time: None };
    Ok((trace, p53))
}

pub fn generate_benign(config: &CohortConfig, id: u64, derived_seed: u64) -> Result<PatientRecord> {
    let (trace, p53) = benign_trace(config, derived_seed)?;
    let (mass_series, max_mass) = observe(config, &trace.masses);
    let steady = config.k * (1.0 - 1.0 / trace.r_start);
    Ok(PatientRecord {
        id,
        label: Label::Benign,
        synthetic_counter: false,
        p53_conc: p53,
        mass_series,
        max_mass,
        steady_state_mass: steady,
        detection_mass: steady,
        seed: derived_seed,
    })
}

// Post-drift rate whose noise-free exponent clears the configured margin, so
// periodic windows inside the chaotic range are never selected.
fn draw_chaotic_rate(config: &CohortConfig, rng: &mut ChaCha8Rng) -> Result<Option<f64>> {
    for _ in 0..MAX_RATE_DRAWS {
        let r = rng.random_range(config.malignant_r.min..=config.malignant_r.max);
        let params = LogisticParams::new(r, config.k)?;
        let lyap = lyapunov_exponent(&params, ORBIT_START_FRACTION * config.k, 500, 2000)?;
        if lyap >= config.min_post_drift_lyapunov {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

fn malignant_attempt(config: &CohortConfig, attempt_seed: u64) -> Result<Option<(RecordTrace, f64)>> {
    let mut rng = seed::rng(attempt_seed);
    let r_start = rng.random_range(config.benign_r.min..=config.benign_r.max);
    let Some(r_end) = draw_chaotic_rate(config, &mut rng)? else {
        return Ok(None);
    };
    let drift = rng.random_range(config.drift_time.min..=config.drift_time.max);
    let x0 = rng.random_range(config.x0.min..=config.x0.max);
    let p53 = draw_p53(&config.p53_malignant, config.p53_max, &mut rng);
    let mut noise = NoiseStream::new(rng.random());

    let ramp = config.ramp_steps;
    let rate_at = |t: usize| {
        if t < drift {
            r_start
        } else {
            let s = ((t - drift + 1) as f64 / ramp as f64).min(1.0);
            r_start + (r_end - r_start) * s
        }
    };
    let steady = config.k * (1.0 - 1.0 / r_start);
    let mut masses = Vec::with_capacity(config.horizon + 1);
    let mut x = x0;
    let mut detection = None;
    masses.push(x);
    for t in 0..config.horizon {
        let params = LogisticParams::new(rate_at(t), config.k)?;
        x = noisy_step(x, &params, config.noise_sigma, &mut noise);
        masses.push(x);
        let step = t + 1;
        if detection.is_none() && step > drift && ((x - steady).abs() / steady) > config.detection_threshold {
            detection = Some(step);
        }
    }
    if detection.is_none() {
        return Ok(None);
    }
    let trace = RecordTrace {
        masses,
        r_start,
        r_end,
        drift_time: Some(drift),
        ramp_end: Some(drift + ramp),
        detection_time: detection,
    };
    Ok(Some((trace, p53)))
}

fn malignant_trace(config: &CohortConfig, id: u64, derived_seed: u64) -> Result<(RecordTrace, f64)> {
    let attempts = config.max_retries + 1;
    for attempt in 0..attempts {
        if let Some(found) = malignant_attempt(config, seed::derive(derived_seed, attempt as u64))? {
            return Ok(found);
        }
    }
    Err(SynthesisError::Generation { id, attempts })
}

pub fn generate_malignant(config: &CohortConfig, id: u64, derived_seed: u64) -> Result<PatientRecord> {
    let (trace, p53) = malignant_trace(config, id, derived_seed)?;
    let (mass_series, max_mass) = observe(config, &trace.masses);
    let detection = trace.detection_time.expect("malignant traces carry a detection step");
    Ok(PatientRecord {
        id,
        label: Label::Malignant,
        synthetic_counter: false,
        p53_conc: p53,
        mass_series,
        max_mass,
        steady_state_mass: config.k * (1.0 - 1.0 / trace.r_start),
        detection_mass: trace.masses[detection],
        seed: derived_seed,
    })
}

/// Regenerates the record with the given id together with its full history.
/// Ids `< n_benign` are benign, the next `n_malignant` are malignant.
pub fn trace_record(config: &CohortConfig, id: u64) -> Result<(PatientRecord, RecordTrace)> {
    let derived = seed::derive(config.master_seed, id);
    if (id as usize) < config.n_benign {
        let record = generate_benign(config, id, derived)?;
        Ok((record, benign_trace(config, derived)?.0))
    } else if (id as usize) < config.n_benign + config.n_malignant {
        let record = generate_malignant(config, id, derived)?;
        Ok((record, malignant_trace(config, id, derived)?.0))
    } else {
        Err(SynthesisError::Usage(format!("id {id} is not a simulated record")))
    }
}

/// `n` records with every feature drawn uniformly from `space`, labeled 1
/// and flagged as synthetic counter-examples. Ids start at `first_id`.
pub fn synthesize_counter_examples(n: usize, space: &FeatureSpace, seed: u64, first_id: u64) -> Vec<PatientRecord> {
    (0..n)
        .map(|i| {
            let record_seed = seed::derive(seed, i as u64);
            let mut rng = seed::rng(record_seed);
            let p53_conc = rng.random_range(0.0..=space.p53_max);
            let mass_series = (0..space.window).map(|_| rng.random_range(0.0..=space.mass_max)).collect();
            let max_mass = rng.random_range(0.0..=space.mass_max);
            let steady_state_mass = rng.random_range(0.0..=space.mass_max);
            let detection_mass = rng.random_range(0.0..=space.mass_max);
            PatientRecord {
                id: first_id + i as u64,
                label: Label::Malignant,
                synthetic_counter: true,
                p53_conc,
                mass_series,
                max_mass,
                steady_state_mass,
                detection_mass,
                seed: record_seed,
            }
        })
        .collect()
}

/// Generates the full cohort described by `config`, ordered by id.
pub fn generate_cohort(config: &CohortConfig) -> Result<Cohort> {
    config.validate()?;
    if config.n_benign + config.n_malignant == 0 {
        return Err(SynthesisError::InvalidConfig("cohort needs at least one simulated record".into()));
    }
    let simulated = (config.n_benign + config.n_malignant) as u64;
    let mut records: Vec<PatientRecord> = (0..simulated)
        .into_par_iter()
        .map(|id| {
            let derived = seed::derive(config.master_seed, id);
            if (id as usize) < config.n_benign {
                generate_benign(config, id, derived)
            } else {
                generate_malignant(config, id, derived)
            }
        })
        .collect::<Result<_>>()?;
    let counter_seed = seed::derive(config.master_seed, COUNTER_STREAM);
    records.extend(synthesize_counter_examples(
        config.n_counter,
        &FeatureSpace::from_config(config),
        counter_seed,
        simulated,
    ));
    Cohort::from_records(records, config)
}
