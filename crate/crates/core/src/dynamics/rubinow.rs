//! Literal transcription of the discretized maturity-structure balance into
//! logistic-style coefficients:
//!
//! `r = (2/dt)^-1`, `k = -[(2/dt) - 1 - (lambda + dv/dmu)]^-1`.
//!
//! The result is reported as printed, without admissibility repair; a
//! negative carrying capacity is common and flagged via
//! [`RubinowLogistic::admissible`].

use super::{DynamicsError, LogisticParams, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RubinowDiscretization {
    dt: f64,
    lambda: f64,
    dv_dmu: f64,
}

impl RubinowDiscretization {
    pub fn new(dt: f64, lambda: f64, dv_dmu: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(DynamicsError::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(DynamicsError::InvalidParameter(format!("loss rate lambda = {lambda} must be nonnegative")));
        }
        if !dv_dmu.is_finite() {
            return Err(DynamicsError::InvalidParameter("dv/dmu must be finite".into()));
        }
        Ok(Self { dt, lambda, dv_dmu })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dv_dmu(&self) -> f64 {
        self.dv_dmu
    }
}

/// Unvalidated `(r, k)` pair produced by [`rubinow_to_logistic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RubinowLogistic {
    pub r: f64,
    pub k: f64,
}

impl RubinowLogistic {
    /// Whether the pair satisfies the [`LogisticParams`] invariants.
    pub fn admissible(&self) -> bool {
        self.to_params().is_ok()
    }

    pub fn to_params(&self) -> Result<LogisticParams> {
        LogisticParams::new(self.r, self.k)
    }
}

pub fn rubinow_to_logistic(disc: &RubinowDiscretization) -> Result<RubinowLogistic> {
    let two_over_dt = 2.0 / disc.dt;
    let denom = two_over_dt - 1.0 - (disc.lambda + disc.dv_dmu);
    if denom == 0.0 {
        return Err(DynamicsError::Singular);
    }
    Ok(RubinowLogistic { r: 1.0 / two_over_dt, k: -1.0 / denom })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn convert(dt: f64, lambda: f64, dv: f64) -> Result<RubinowLogistic> {
        rubinow_to_logistic(&RubinowDiscretization::new(dt, lambda, dv).unwrap())
    }

    #[test]
    fn printed_formula_examples() {
        // 2/1 - 1 - 0.15 = 0.85 -> k = -1/0.85
        let a = convert(1.0, 0.1, 0.05).unwrap();
        assert_eq!(a.r, 0.5);
        assert!((a.k - (-1.0 / 0.85)).abs() < 1e-15);
        assert!((a.k + 1.1765).abs() < 1e-4);
        assert!(!a.admissible());

        // 2/0.5 - 1 - 0.3 = 2.7 -> k = -1/2.7
        let b = convert(0.5, 0.2, 0.1).unwrap();
        assert_eq!(b.r, 0.25);
        assert!((b.k + 0.3704).abs() < 1e-4);
    }

    #[test]
    fn singular_denominator() {
        assert_eq!(convert(2.0, 0.0, 0.0), Err(DynamicsError::Singular));
    }

    #[test]
    fn positive_k_is_admissible() {
        // 2/1 - 1 - 2 = -1 -> k = 1
        let c = convert(1.0, 1.5, 0.5).unwrap();
        assert_eq!(c.k, 1.0);
        assert!(c.admissible());
    }

    #[test]
    fn constructor_rejects_bad_inputs() {
        assert!(RubinowDiscretization::new(0.0, 0.1, 0.0).is_err());
        assert!(RubinowDiscretization::new(1.0, -0.1, 0.0).is_err());
    }
}
