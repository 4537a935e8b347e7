//! Growth mathematics: the logistic difference equation with seeded
//! multiplicative noise, regime analysis, the gene-activity growth rate, and
//! a literal transcription of the discretized maturity-structure balance.

mod gene;
mod regime;
mod rubinow;

use std::io::{self, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::numfmt;
use crate::seed;

pub use gene::{gene_activity_to_growth_rate, GeneActivitySignature, GeneSensitivity};
pub use regime::{
    bifurcation_scan, classify_regime, lyapunov_exponent, write_bifurcation_csv, BifurcationRow, Regime, RegimeLabel,
    RegimeTolerances, ORBIT_START_FRACTION,
};
pub use rubinow::{rubinow_to_logistic, RubinowDiscretization, RubinowLogistic};

/// Largest growth rate for which the map keeps `[0, k]` invariant.
pub const R_MAX: f64 = 4.0;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mass {x} outside the domain [0, {k}]")]
    Domain { x: f64, k: f64 },
    #[error("singular discretization: (2/dt) - 1 - (lambda + dv/dmu) = 0")]
    Singular,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Growth rate `r` and carrying capacity `k` of `x' = r x (1 - x/k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    r: f64,
    k: f64,
}

impl LogisticParams {
    pub fn new(r: f64, k: f64) -> Result<Self> {
        if !r.is_finite() || !(0.0..=R_MAX).contains(&r) {
            return Err(DynamicsError::InvalidParameter(format!("growth rate r = {r} must lie in [0, {R_MAX}]")));
        }
        if !k.is_finite() || k <= 0.0 {
            return Err(DynamicsError::InvalidParameter(format!("carrying capacity k = {k} must be positive")));
        }
        Ok(Self { r, k })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Nonzero fixed point `k (1 - 1/r)`; only meaningful for `r > 1`.
    pub fn fixed_point(&self) -> f64 {
        self.k * (1.0 - 1.0 / self.r)
    }

    /// Derivative of the map at `x`.
    pub fn slope(&self, x: f64) -> f64 {
        self.r * (1.0 - 2.0 * x / self.k)
    }

    // Map without the domain check; callers guarantee `x` in `[0, k]`.
    pub(crate) fn apply(&self, x: f64) -> f64 {
        self.r * x * (1.0 - x / self.k)
    }

    pub(crate) fn check_mass(&self, x: f64) -> Result<()> {
        if x.is_finite() && (0.0..=self.k).contains(&x) {
            Ok(())
        } else {
            Err(DynamicsError::Domain { x, k: self.k })
        }
    }
}

/// One noise-free step of the logistic map.
pub fn logistic_step(x: f64, params: &LogisticParams) -> Result<f64> {
    params.check_mass(x)?;
    Ok(params.apply(x))
}

/// Seeded stream of standard-normal draws, one per simulated step.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: seed::rng(seed) }
    }

    pub fn next_standard(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Discards `n` draws, positioning the stream at step `n`.
    pub fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.next_standard();
        }
    }
}

/// `clamp(step(x) (1 + sigma z), 0, k)` with `z` the next standard normal.
pub fn noisy_step(x: f64, params: &LogisticParams, noise_sigma: f64, noise: &mut NoiseStream) -> f64 {
    let eta = noise_sigma * noise.next_standard();
    let next = params.apply(x) * (1.0 + eta);
    if next <= 0.0 || next.is_nan() {
        0.0
    } else {
        next.min(params.k)
    }
}

/// Simulated mass series together with everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub masses: Vec<f64>,
    pub params: LogisticParams,
    pub x0: f64,
    pub seed: u64,
    pub noise_sigma: f64,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,mass")?;
        for (t, m) in self.masses.iter().enumerate() {
            writeln!(out, "{t},{}", numfmt::exact(*m))?;
        }
        Ok(())
    }
}

fn check_noise(noise_sigma: f64) -> Result<()> {
    if noise_sigma.is_finite() && noise_sigma >= 0.0 {
        Ok(())
    } else {
        Err(DynamicsError::InvalidParameter(format!("noise sigma {noise_sigma} must be finite and nonnegative")))
    }
}

/// Continues an orbit from `x` for `steps` steps using an already positioned
/// noise stream. Returns the `steps` new masses (not including `x`).
pub fn simulate_from(
    params: &LogisticParams,
    x: f64,
    steps: usize,
    noise_sigma: f64,
    noise: &mut NoiseStream,
) -> Result<Vec<f64>> {
    params.check_mass(x)?;
    check_noise(noise_sigma)?;
    let mut out = Vec::with_capacity(steps);
    let mut current = x;
    for _ in 0..steps {
        current = noisy_step(current, params, noise_sigma, noise);
        out.push(current);
    }
    Ok(out)
}

/// Simulates `steps` steps from `x0`. Each mass depends only on the previous
/// mass and the next draw of the seeded noise stream.
pub fn simulate(params: LogisticParams, x0: f64, steps: usize, noise_sigma: f64, seed: u64) -> Result<Trajectory> {
    if steps == 0 {
        return Err(DynamicsError::InvalidParameter("steps must be at least 1".into()));
    }
    let mut noise = NoiseStream::new(seed);
    let tail = simulate_from(&params, x0, steps, noise_sigma, &mut noise)?;
    let mut masses = Vec::with_capacity(steps + 1);
    masses.push(x0);
    masses.extend(tail);
    Ok(Trajectory { masses, params, x0, seed, noise_sigma })
}
