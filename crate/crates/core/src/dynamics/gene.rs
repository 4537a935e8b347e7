//! Growth rate from a gene-activity signature. Oncogene and antiapoptotic
//! activity raise the rate; tumor-suppressor and proapoptotic activity lower
//! it. The functional form is `r_base · exp(bO·O + bAP·AP - bS·S - bP·P)`
//! clamped to `[0, 4]`.

use super::{DynamicsError, Result, R_MAX};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneActivitySignature {
    pub o: f64,
    pub s: f64,
    pub p: f64,
    pub ap: f64,
}

impl GeneActivitySignature {
    pub fn new(o: f64, s: f64, p: f64, ap: f64) -> Result<Self> {
        let sig = Self { o, s, p, ap };
        sig.validate()?;
        Ok(sig)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("o", self.o), ("s", self.s), ("p", self.p), ("ap", self.ap)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DynamicsError::InvalidParameter(format!("gene activity {name} = {v} must be nonnegative")));
            }
        }
        Ok(())
    }
}

/// Per-gene sensitivities, all nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneSensitivity {
    pub o: f64,
    pub s: f64,
    pub p: f64,
    pub ap: f64,
}

impl GeneSensitivity {
    pub fn uniform(beta: f64) -> Self {
        Self { o: beta, s: beta, p: beta, ap: beta }
    }
}

pub fn gene_activity_to_growth_rate(sig: &GeneActivitySignature, r_base: f64, beta: &GeneSensitivity) -> Result<f64> {
    sig.validate()?;
    if !(r_base > 0.0 && r_base <= R_MAX) {
        return Err(DynamicsError::InvalidParameter(format!("r_base = {r_base} must lie in (0, 4]")));
    }
    for v in [beta.o, beta.s, beta.p, beta.ap] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(DynamicsError::InvalidParameter("sensitivities must be nonnegative".into()));
        }
    }
    let exponent = beta.o * sig.o + beta.ap * sig.ap - beta.s * sig.s - beta.p * sig.p;
    Ok((r_base * exponent.exp()).clamp(0.0, R_MAX))
}
