//! Regime analysis of the noise-free map: Lyapunov exponents, fixed point /
//! cycle / chaos classification, and bifurcation-diagram sampling.

use std::io::{self, Write};

use rayon::prelude::*;

use super::{DynamicsError, LogisticParams, Result};
use crate::numfmt;

/// Orbits used for regime analysis start at this fraction of `k`. Kept away
/// from `k/2`, whose image is the top of the parabola and, at `r = 4`,
/// lands on the fixed point 0 in two steps.
pub const ORBIT_START_FRACTION: f64 = 0.2;

const MIN_LYAPUNOV_SAMPLES: usize = 1000;

/// Mean of `ln |r (1 - 2x/k)|` along `n` post-burn-in points of the orbit
/// from `x0`. Points where the slope is exactly zero are skipped.
pub fn lyapunov_exponent(params: &LogisticParams, x0: f64, burn_in: usize, n: usize) -> Result<f64> {
    if n < MIN_LYAPUNOV_SAMPLES {
        return Err(DynamicsError::InvalidParameter(format!(
            "lyapunov estimate needs n >= {MIN_LYAPUNOV_SAMPLES}, got {n}"
        )));
    }
    if !(x0 > 0.0 && x0 < params.k()) {
        return Err(DynamicsError::Domain { x: x0, k: params.k() });
    }
    lyapunov_along(params, x0, burn_in, n)
}

pub(crate) fn lyapunov_along(params: &LogisticParams, x0: f64, burn_in: usize, n: usize) -> Result<f64> {
    params.check_mass(x0)?;
    let mut x = x0;
    for _ in 0..burn_in {
        x = params.apply(x);
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for _ in 0..n {
        let slope = params.slope(x).abs();
        if slope > 0.0 {
            sum += slope.ln();
            used += 1;
        }
        x = params.apply(x);
    }
    if used == 0 {
        return Err(DynamicsError::Numerical("every orbit point had zero slope; lyapunov exponent undefined".into()));
    }
    Ok(sum / used as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeTolerances {
    /// Largest post-burn-in orbit diameter still called a fixed point.
    pub fixed_point: f64,
    /// Recurrence tolerance `|x_{t+p} - x_t|` for cycle detection.
    pub cycle: f64,
    pub max_period: usize,
    /// Lyapunov estimates above this are chaotic.
    pub chaos: f64,
}

impl Default for RegimeTolerances {
    fn default() -> Self {
        Self { fixed_point: 1e-6, cycle: 1e-6, max_period: 32, chaos: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    FixedPoint,
    Cycle {
        period: usize,
    },
    Chaotic,
    /// No rule fired: neither recurrence was detected nor was the exponent
    /// above the chaos threshold (typically a slowly converging orbit near a
    /// bifurcation point).
    Indeterminate,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::FixedPoint => write!(f, "fixed_point"),
            Regime::Cycle { period } => write!(f, "cycle{period}"),
            Regime::Chaotic => write!(f, "chaotic"),
            Regime::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub lyapunov: f64,
}

/// Classifies the long-run behavior of the noise-free orbit started at
/// [`ORBIT_START_FRACTION`]`·k`.
///
/// The exponent is evaluated first so that `Chaotic` holds exactly when the
/// estimate exceeds `tol.chaos`; fixed-point and cycle labels are only
/// assigned below that threshold.
pub fn classify_regime(
    params: &LogisticParams,
    burn_in: usize,
    window: usize,
    tol: &RegimeTolerances,
) -> Result<RegimeLabel> {
    if burn_in < 500 {
        return Err(DynamicsError::InvalidParameter(format!("burn_in {burn_in} < 500")));
    }
    if window < 256 {
        return Err(DynamicsError::InvalidParameter(format!("window {window} < 256")));
    }
    if tol.max_period < 2 {
        return Err(DynamicsError::InvalidParameter("max_period must be at least 2".into()));
    }
    let x0 = ORBIT_START_FRACTION * params.k();
    let lyapunov = lyapunov_along(params, x0, burn_in, window.max(2 * MIN_LYAPUNOV_SAMPLES))?;
    if lyapunov > tol.chaos {
        return Ok(RegimeLabel { regime: Regime::Chaotic, lyapunov });
    }

    let mut x = x0;
    for _ in 0..burn_in {
        x = params.apply(x);
    }
    let mut orbit = Vec::with_capacity(window + tol.max_period);
    for _ in 0..window + tol.max_period {
        orbit.push(x);
        x = params.apply(x);
    }

    let (lo, hi) =
        orbit[..window].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let regime = if hi - lo < tol.fixed_point {
        Regime::FixedPoint
    } else {
        (2..=tol.max_period)
            .find(|&p| (0..window).all(|t| (orbit[t + p] - orbit[t]).abs() < tol.cycle))
            .map_or(Regime::Indeterminate, |period| Regime::Cycle { period })
    };
    Ok(RegimeLabel { regime, lyapunov })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationRow {
    pub r: f64,
    pub sample: f64,
}

/// Samples `samples` post-burn-in attractor points for every `r` on the grid
/// `r_min, r_min + r_step, ... <= r_max`. Rows come out in grid order.
pub fn bifurcation_scan(
    r_min: f64,
    r_max: f64,
    r_step: f64,
    k: f64,
    burn_in: usize,
    samples: usize,
) -> Result<Vec<BifurcationRow>> {
    if !(r_min.is_finite() && r_max.is_finite()) || r_min < 0.0 || r_max > super::R_MAX {
        return Err(DynamicsError::InvalidParameter(format!(
            "r range [{r_min}, {r_max}] must lie within [0, {}]",
            super::R_MAX
        )));
    }
    if r_min >= r_max {
        return Err(DynamicsError::Usage(format!("empty grid: r_min {r_min} >= r_max {r_max}")));
    }
    if !(r_step.is_finite() && r_step > 0.0) {
        return Err(DynamicsError::Usage(format!("r_step {r_step} must be positive")));
    }
    if samples == 0 {
        return Err(DynamicsError::Usage("samples must be at least 1".into()));
    }
    // Guard against 3.0 - 2.5 = 0.49999... dropping the final grid point.
    let points = ((r_max - r_min) / r_step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..points).map(|i| (r_min + i as f64 * r_step).min(r_max)).collect();

    let per_r: Vec<Result<Vec<BifurcationRow>>> = grid
        .par_iter()
        .map(|&r| {
            let params = LogisticParams::new(r, k)?;
            let mut x = ORBIT_START_FRACTION * k;
            for _ in 0..burn_in {
                x = params.apply(x);
            }
            Ok((0..samples)
                .map(|_| {
                    let row = BifurcationRow { r, sample: x };
                    x = params.apply(x);
                    row
                })
                .collect())
        })
        .collect();

    let mut rows = Vec::with_capacity(points * samples);
    for chunk in per_r {
        rows.extend(chunk?);
    }
    Ok(rows)
}

pub fn write_bifurcation_csv<W: Write>(rows: &[BifurcationRow], mut out: W) -> io::Result<()> {
    writeln!(out, "r,sample")?;
    for row in rows {
        writeln!(out, "{},{}", numfmt::exact(row.r), numfmt::exact(row.sample))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(r: f64) -> LogisticParams {
        LogisticParams::new(r, 1.0).unwrap()
    }

    // Separation-of-nearby-orbits estimate: follows a companion orbit at
    // distance d0, renormalizing each step. Uses no derivative formula.
    fn separation_lyapunov(r: f64, x0: f64, burn_in: usize, n: usize) -> f64 {
        let f = |x: f64| r * x * (1.0 - x);
        let d0 = 1e-9;
        let mut x = x0;
        for _ in 0..burn_in {
            x = f(x);
        }
        let mut sum = 0.0;
        for _ in 0..n {
            let y = if x + d0 <= 1.0 { x + d0 } else { x - d0 };
            let (fx, fy) = (f(x), f(y));
            sum += ((fy - fx).abs() / d0).max(f64::MIN_POSITIVE).ln();
            x = fx;
        }
        sum / n as f64
    }

    // Distinct tail values of a long orbit, counted at 1e-9 resolution.
    fn brute_force_period(r: f64) -> usize {
        let f = |x: f64| r * x * (1.0 - x);
        let mut x = 0.2;
        for _ in 0..100_000 {
            x = f(x);
        }
        let mut seen: Vec<f64> = Vec::new();
        for _ in 0..512 {
            if !seen.iter().any(|s| (s - x).abs() < 1e-9) {
                seen.push(x);
            }
            x = f(x);
        }
        seen.len()
    }

    #[test]
    fn oracle_periods() {
        assert_eq!(brute_force_period(2.8), 1);
        assert_eq!(brute_force_period(3.2), 2);
        assert_eq!(brute_force_period(3.5), 4);
        assert!(brute_force_period(3.9) > 32);
    }

    #[test]
    fn lyapunov_at_full_chaos() {
        let oracle = separation_lyapunov(4.0, 0.2, 1000, 1_000_000);
        assert!((oracle - std::f64::consts::LN_2).abs() < 0.02, "oracle {oracle}");
        let est = lyapunov_exponent(&p(4.0), 0.2, 1000, 1_000_000).unwrap();
        assert!((est - std::f64::consts::LN_2).abs() < 0.02, "estimate {est}");
        assert!((est - oracle).abs() < 0.02);
    }

    #[test]
    fn lyapunov_at_stable_fixed_points() {
        let est = lyapunov_exponent(&p(2.5), 0.1, 1000, 5000).unwrap();
        assert!((est - 0.5f64.ln()).abs() < 1e-6, "estimate {est}");
        let est = lyapunov_exponent(&p(0.5), 0.3, 1000, 5000).unwrap();
        assert!((est - 0.5f64.ln()).abs() < 1e-6, "estimate {est}");
        let oracle = separation_lyapunov(2.5, 0.1, 1000, 5000);
        assert!((oracle - 0.5f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn lyapunov_preconditions() {
        assert!(lyapunov_exponent(&p(3.0), 0.2, 0, 999).is_err());
        assert!(lyapunov_exponent(&p(3.0), 0.0, 0, 1000).is_err());
        assert!(lyapunov_exponent(&p(3.0), 1.0, 0, 1000).is_err());
        // r = 2 from k/2 sits on the superstable point: every slope is 0.
        assert!(matches!(lyapunov_exponent(&p(2.0), 0.5, 0, 1000), Err(DynamicsError::Numerical(_))));
    }

    #[test]
    fn regime_examples() {
        let tol = RegimeTolerances::default();
        let label = |r| classify_regime(&p(r), 1000, 512, &tol).unwrap();
        assert_eq!(label(2.8).regime, Regime::FixedPoint);
        assert_eq!(label(3.2).regime, Regime::Cycle { period: 2 });
        assert_eq!(label(3.5).regime, Regime::Cycle { period: 4 });
        let chaos = label(3.9);
        assert_eq!(chaos.regime, Regime::Chaotic);
        assert!(chaos.lyapunov > 0.3);
        let oracle = separation_lyapunov(3.9, 0.2, 1000, 200_000);
        assert!(oracle > 0.3);
    }

    #[test]
    fn regime_reports_indeterminate_near_bifurcation() {
        // At r = 3 the fixed point is neutrally stable and convergence is
        // algebraic, so nothing fires within the window.
        let label = classify_regime(&p(3.0), 500, 256, &RegimeTolerances::default()).unwrap();
        assert_eq!(label.regime, Regime::Indeterminate);
    }

    #[test]
    fn regime_preconditions() {
        let tol = RegimeTolerances::default();
        assert!(classify_regime(&p(3.0), 499, 256, &tol).is_err());
        assert!(classify_regime(&p(3.0), 500, 255, &tol).is_err());
    }

    #[test]
    fn bifurcation_fixed_point_band() {
        let rows = bifurcation_scan(2.5, 2.9, 0.1, 1.0, 1000, 20).unwrap();
        assert_eq!(rows.len(), 5 * 20);
        for chunk in rows.chunks(20) {
            let target = 1.0 - 1.0 / chunk[0].r;
            assert!(chunk.iter().all(|row| (row.sample - target).abs() < 1e-6));
        }
    }

    #[test]
    fn bifurcation_period_two_band() {
        let rows = bifurcation_scan(3.1, 3.4, 0.05, 1.0, 2000, 16).unwrap();
        assert_eq!(rows.len(), 7 * 16);
        for chunk in rows.chunks(16) {
            let mut clusters: Vec<f64> = Vec::new();
            for row in chunk {
                if !clusters.iter().any(|c| (c - row.sample).abs() < 1e-4) {
                    clusters.push(row.sample);
                }
            }
            assert_eq!(clusters.len(), 2, "r = {}", chunk[0].r);
        }
    }

    #[test]
    fn bifurcation_empty_grid() {
        assert!(matches!(bifurcation_scan(3.0, 3.0, 0.1, 1.0, 100, 10), Err(DynamicsError::Usage(_))));
        assert!(bifurcation_scan(3.0, 4.5, 0.1, 1.0, 100, 10).is_err());
    }

    #[test]
    fn bifurcation_csv_header() {
        let rows = bifurcation_scan(2.5, 2.6, 0.1, 1.0, 10, 2).unwrap();
        let mut buf = Vec::new();
        write_bifurcation_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,sample\n2.5000000000000000,"));
        assert_eq!(text.lines().count(), 1 + 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn chaotic_iff_exponent_above_threshold(r in 2.5f64..=4.0) {
            let tol = RegimeTolerances::default();
            let label = classify_regime(&p(r), 500, 256, &tol).unwrap();
            prop_assert_eq!(label.regime == Regime::Chaotic, label.lyapunov > tol.chaos);
            if matches!(label.regime, Regime::FixedPoint | Regime::Cycle { .. }) {
                prop_assert!(label.lyapunov <= tol.chaos);
            }
        }
    }
}
