use std::io::{self, Write};

use rand::seq::SliceRandom;

use super::{ClassDensityPair, EvalError, Grid, Result};
use crate::neural::{train, Network, NetworkSpec, Sample, TrainConfig, TransferKind};
use crate::{numfmt, seed};

/// Smallest fraction of each class density the grid must span before the
/// expected SSE is evaluated on it.
pub const MIN_GRID_COVERAGE: f64 = 0.999;

/// `P_M p_M(k) / (P_B p_B(k) + P_M p_M(k))`.
pub fn bayes_posterior_oracle(k: f64, densities: &ClassDensityPair) -> Result<f64> {
    let (b, m) = densities.weighted(k);
    let denom = b + m;
    if denom <= 0.0 {
        return Err(EvalError::Undefined(k));
    }
    Ok(m / denom)
}

/// Oracle on every grid point, `fill` where it is undefined.
pub fn tabulate_posterior(grid: &Grid, densities: &ClassDensityPair, fill: f64) -> Vec<f64> {
    grid.points().iter().map(|&k| bayes_posterior_oracle(k, densities).unwrap_or(fill)).collect()
}

fn check_coverage(grid: &Grid, densities: &ClassDensityPair) -> Result<()> {
    for d in [densities.p_b, densities.p_m] {
        let mass = d.mass_between(grid.lo(), grid.hi());
        if mass < MIN_GRID_COVERAGE {
            return Err(EvalError::Coverage { lo: grid.lo(), hi: grid.hi(), mass });
        }
    }
    Ok(())
}

/// Trapezoid quadrature of `P_B p_B (f - 0)² + P_M p_M (f - 1)²` for `f`
/// tabulated on `grid`.
pub fn expected_sse(grid: &Grid, f: &[f64], densities: &ClassDensityPair) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(EvalError::Dimension(format!("{} values on a {}-point grid", f.len(), grid.len())));
    }
    check_coverage(grid, densities)?;
    let integrand: Vec<f64> = grid
        .points()
        .iter()
        .zip(f)
        .map(|(&k, &fk)| {
            let (b, m) = densities.weighted(k);
            b * fk * fk + m * (fk - 1.0) * (fk - 1.0)
        })
        .collect();
    Ok(grid.trapezoid(&integrand))
}

/// Pointwise functional derivative `2 p_B P_B f + 2 p_M P_M f - 2 p_M P_M`.
pub fn sse_pointwise_derivative(grid: &Grid, f: &[f64], densities: &ClassDensityPair) -> Vec<f64> {
    grid.points()
        .iter()
        .zip(f)
        .map(|(&k, &fk)| {
            let (b, m) = densities.weighted(k);
            2.0 * b * fk + 2.0 * m * fk - 2.0 * m
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorReport {
    pub grid: Vec<f64>,
    pub f_net: Vec<f64>,
    /// Oracle values; `None` where both weighted densities vanish.
    pub f_star: Vec<Option<f64>>,
    pub mean_abs_dev: f64,
    pub max_abs_dev: f64,
    pub train_sse: Vec<f64>,
    pub net: Network,
}

impl PosteriorReport {
    /// Network output at the grid point nearest `k`.
    pub fn f_net_at(&self, k: f64) -> f64 {
        let i = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - k).abs().total_cmp(&(b.1 - k).abs()))
            .map(|(i, _)| i)
            .expect("nonempty grid");
        self.f_net[i]
    }

    /// CSV `k,f_net,f_star`; undefined oracle points are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,f_net,f_star")?;
        for ((k, f), s) in self.grid.iter().zip(&self.f_net).zip(&self.f_star) {
            let star = s.map(numfmt::exact).unwrap_or_default();
            writeln!(out, "{},{},{}", numfmt::exact(*k), numfmt::exact(*f), star)?;
        }
        Ok(())
    }
}

/// Samples a labeled training set from `densities` (class sizes follow the
/// priors over `2 · n_per_class` draws), trains a 1-input sigmoid-output
/// network on SSE with targets 0/1, and compares its output to the oracle
/// across `grid`.
pub fn posterior_convergence_experiment(
    densities: &ClassDensityPair,
    n_per_class: usize,
    spec: &NetworkSpec,
    config: &TrainConfig,
    grid: &Grid,
    sample_seed: u64,
) -> Result<PosteriorReport> {
    spec.validate()?;
    if spec.inputs() != 1 || spec.outputs() != 1 || spec.transfers.last() != Some(&TransferKind::Sigmoid) {
        return Err(EvalError::Invalid("experiment needs a 1-input, 1-output network with a sigmoid output".into()));
    }
    check_coverage(grid, densities)?;
    let total = 2 * n_per_class;
    let n_m = (total as f64 * densities.prior_m).round() as usize;
    let n_b = total - n_m;
    if n_m == 0 || n_b == 0 {
        return Err(EvalError::Invalid(format!("degenerate sample: {n_b} benign, {n_m} malignant")));
    }

    let mut rng = seed::rng(sample_seed);
    let mut samples: Vec<Sample> = Vec::with_capacity(total);
    samples.extend((0..n_b).map(|_| Sample::new(vec![densities.p_b.sample(&mut rng)], vec![0.0])));
    samples.extend((0..n_m).map(|_| Sample::new(vec![densities.p_m.sample(&mut rng)], vec![1.0])));
    samples.shuffle(&mut rng);

    let net = Network::init(spec.clone(), config.init_seed, config.init_scale)?;
    let (net, train_sse) = train(net, &samples, config)?;

    let mut f_net = Vec::with_capacity(grid.len());
    let mut f_star = Vec::with_capacity(grid.len());
    let (mut sum, mut max, mut n) = (0.0, 0.0f64, 0usize);
    for &k in grid.points() {
        let out = net.predict(&[k])?[0];
        let star = bayes_posterior_oracle(k, densities).ok();
        if let Some(s) = star {
            let dev = (out - s).abs();
            sum += dev;
            max = max.max(dev);
            n += 1;
        }
        f_net.push(out);
        f_star.push(star);
    }
    if n == 0 {
        return Err(EvalError::Invalid("oracle undefined on the whole grid".into()));
    }
    Ok(PosteriorReport {
        grid: grid.points().to_vec(),
        f_net,
        f_star,
        mean_abs_dev: sum / n as f64,
        max_abs_dev: max,
        train_sse,
        net,
    })
}
