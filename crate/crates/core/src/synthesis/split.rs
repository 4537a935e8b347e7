//! Stratified, seeded partitions. Each label stratum is shuffled with its own
//! derived seed; part sizes use round-half-up per stratum, leading parts
//! first, with the last part taking the remainder.

use rand::seq::SliceRandom;

use super::{Cohort, Label, PatientRecord, Result, SynthesisError};
use crate::seed;

fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor() as usize
}

fn partition(cohort: &Cohort, leading: &[f64], seed: u64) -> Result<Vec<Cohort>> {
    let parts = leading.len() + 1;
    let mut buckets: Vec<Vec<PatientRecord>> = vec![Vec::new(); parts];
    let mut any = false;
    for label in [Label::Benign, Label::Malignant] {
        let mut stratum: Vec<&PatientRecord> = cohort.records.iter().filter(|r| r.label == label).collect();
        if stratum.is_empty() {
            continue;
        }
        any = true;
        let n = stratum.len();
        stratum.shuffle(&mut seed::rng(seed::derive(seed, u64::from(label.bit()))));
        let mut sizes: Vec<usize> = leading.iter().map(|f| round_half_up(n as f64 * f)).collect();
        let used: usize = sizes.iter().sum();
        if used >= n || sizes.contains(&0) {
            return Err(SynthesisError::Usage(format!(
                "label {} stratum of {n} records cannot fill every part",
                label.bit()
            )));
        }
        sizes.push(n - used);
        let mut rest = &stratum[..];
        for (bucket, size) in buckets.iter_mut().zip(sizes) {
            let (head, tail) = rest.split_at(size);
            bucket.extend(head.iter().map(|r| (*r).clone()));
            rest = tail;
        }
    }
    if !any {
        return Err(SynthesisError::Usage("cannot split an empty cohort".into()));
    }
    buckets.into_iter().map(|records| Cohort::from_records(records, &cohort.config)).collect()
}

fn check_fraction(name: &str, f: f64) -> Result<()> {
    if f.is_finite() && f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(SynthesisError::Usage(format!("{name} = {f} must lie in (0, 1)")))
    }
}

/// Stratified train/validation/test partition.
pub fn split(cohort: &Cohort, train_frac: f64, val_frac: f64, seed: u64) -> Result<(Cohort, Cohort, Cohort)> {
    check_fraction("train_frac", train_frac)?;
    check_fraction("val_frac", val_frac)?;
    if train_frac + val_frac >= 1.0 {
        return Err(SynthesisError::Usage("train_frac + val_frac must be < 1".into()));
    }
    let mut parts = partition(cohort, &[train_frac, val_frac], seed)?.into_iter();
    let (train, val, test) = (parts.next(), parts.next(), parts.next());
    Ok((train.unwrap(), val.unwrap(), test.unwrap()))
}

/// Stratified two-way partition: `(train, holdout)` with the holdout taking
/// `holdout_frac` of each stratum.
pub fn holdout(cohort: &Cohort, holdout_frac: f64, seed: u64) -> Result<(Cohort, Cohort)> {
    check_fraction("holdout_frac", holdout_frac)?;
    let mut parts = partition(cohort, &[holdout_frac], seed)?.into_iter();
    let (held, train) = (parts.next().unwrap(), parts.next().unwrap());
    Ok((train, held))
}
