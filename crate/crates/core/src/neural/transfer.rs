use serde::{Deserialize, Serialize};

// Largest double below 1. Saturated outputs are held here (and at the
// matching lower bounds) so every output stays inside its open range.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferKind {
    /// `1 / (1 + e^-z)`, range (0, 1).
    Sigmoid,
    /// `tanh z`, range (-1, 1).
    HyperTan,
    /// `e^(-z^2)`, range (0, 1].
    Gaussian,
}

impl TransferKind {
    pub const ALL: [TransferKind; 3] = [TransferKind::Sigmoid, TransferKind::HyperTan, TransferKind::Gaussian];

    pub fn name(self) -> &'static str {
        match self {
            TransferKind::Sigmoid => "sigmoid",
            TransferKind::HyperTan => "hypertan",
            TransferKind::Gaussian => "gaussian",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn apply(self, z: f64) -> f64 {
        match self {
            TransferKind::Sigmoid => (1.0 / (1.0 + (-z).exp())).clamp(f64::MIN_POSITIVE, BELOW_ONE),
            TransferKind::HyperTan => z.tanh().clamp(-BELOW_ONE, BELOW_ONE),
            TransferKind::Gaussian => (-z * z).exp().max(f64::MIN_POSITIVE),
        }
    }

    /// `df/dz` given the pre-activation `z` and the output `a = f(z)`.
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            TransferKind::Sigmoid => a * (1.0 - a),
            TransferKind::HyperTan => 1.0 - a * a,
            TransferKind::Gaussian => -2.0 * z * a,
        }
    }

    /// Open or half-open output range `(lo, hi)`; Gaussian attains `hi`.
    pub fn range(self) -> (f64, f64) {
        match self {
            TransferKind::Sigmoid | TransferKind::Gaussian => (0.0, 1.0),
            TransferKind::HyperTan => (-1.0, 1.0),
        }
    }

    pub fn in_range(self, a: f64) -> bool {
        let (lo, hi) = self.range();
        match self {
            TransferKind::Gaussian => a > lo && a <= hi,
            _ => a > lo && a < hi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(TransferKind::Sigmoid.apply(0.0), 0.5);
        assert_eq!(TransferKind::HyperTan.apply(0.0), 0.0);
        assert_eq!(TransferKind::Gaussian.apply(0.0), 1.0);
    }

    #[test]
    fn names_round_trip() {
        for t in TransferKind::ALL {
            assert_eq!(TransferKind::from_name(t.name()), Some(t));
        }
        assert_eq!(TransferKind::from_name("relu"), None);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for t in TransferKind::ALL {
            for z in [-2.0, -0.3, 0.0, 0.7, 1.9] {
                let h = 1e-6;
                let fd = (t.apply(z + h) - t.apply(z - h)) / (2.0 * h);
                let an = t.derivative(z, t.apply(z));
                assert!((fd - an).abs() < 1e-8, "{t:?} at {z}: {fd} vs {an}");
            }
        }
    }

    proptest! {
        #[test]
        fn outputs_stay_in_range(z in proptest::num::f64::NORMAL) {
            for t in TransferKind::ALL {
                prop_assert!(t.in_range(t.apply(z)), "{:?}({}) = {}", t, z, t.apply(z));
            }
        }
    }
}
