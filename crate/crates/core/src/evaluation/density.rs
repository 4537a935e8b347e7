use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as NormalDist};

use super::{EvalError, Result};

/// One-dimensional class-conditional density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// Uniform on the closed interval `[lo, hi]`.
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl Density {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Density::Gaussian { mean, sd } if mean.is_finite() && sd.is_finite() && sd > 0.0 => Ok(()),
            Density::Uniform { lo, hi } if lo.is_finite() && hi.is_finite() && lo < hi => Ok(()),
            other => Err(EvalError::InvalidDensity(format!("{other:?}"))),
        }
    }

    pub fn pdf(&self, k: f64) -> f64 {
        match *self {
            Density::Gaussian { mean, sd } => NormalDist::new(mean, sd).expect("validated").pdf(k),
            Density::Uniform { lo, hi } => {
                if (lo..=hi).contains(&k) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, k: f64) -> f64 {
        match *self {
            Density::Gaussian { mean, sd } => NormalDist::new(mean, sd).expect("validated").cdf(k),
            Density::Uniform { lo, hi } => ((k - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Probability mass inside `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.cdf(hi) - self.cdf(lo)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Density::Gaussian { mean, .. } => mean,
            Density::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            Density::Gaussian { sd, .. } => sd,
            Density::Uniform { lo, hi } => (hi - lo) / 12f64.sqrt(),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Density::Gaussian { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            Density::Uniform { lo, hi } => rng.random_range(lo..=hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassDensityPair {
    pub p_b: Density,
    pub p_m: Density,
    pub prior_b: f64,
    pub prior_m: f64,
}

impl ClassDensityPair {
    pub fn new(p_b: Density, p_m: Density, prior_m: f64) -> Result<Self> {
        p_b.validate()?;
        p_m.validate()?;
        if !(0.0..=1.0).contains(&prior_m) {
            return Err(EvalError::InvalidDensity(format!("prior_m {prior_m} outside [0, 1]")));
        }
        Ok(Self { p_b, p_m, prior_b: 1.0 - prior_m, prior_m })
    }

    /// `(P_B p_B(k), P_M p_M(k))`.
    pub fn weighted(&self, k: f64) -> (f64, f64) {
        (self.prior_b * self.p_b.pdf(k), self.prior_m * self.p_m.pdf(k))
    }

    /// 801 points spanning `mean ± 5 sd` of both densities.
    pub fn default_grid(&self) -> Grid {
        let lo = (self.p_b.mean() - 5.0 * self.p_b.sd()).min(self.p_m.mean() - 5.0 * self.p_m.sd());
        let hi = (self.p_b.mean() + 5.0 * self.p_b.sd()).max(self.p_m.mean() + 5.0 * self.p_m.sd());
        Grid::linspace(lo, hi, 801).expect("nonempty envelope")
    }
}

/// Increasing quadrature / evaluation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && n >= 2) {
            return Err(EvalError::Invalid(format!("grid [{lo}, {hi}] with {n} points")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        points[n - 1] = hi;
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Trapezoid rule over the grid; values summed in index order.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        self.points.windows(2).zip(values.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    }
}
