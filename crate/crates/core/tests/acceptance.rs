//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use rand::Rng;
use tumornet::dynamics::{
    classify_regime, lyapunov_exponent, rubinow_to_logistic, DynamicsError, LogisticParams, Regime, RegimeTolerances,
    RubinowDiscretization,
};
use tumornet::evaluation::{
    classification_metrics, expected_sse, posterior_convergence_experiment, regression_metrics, ClassDensityPair,
    Density, EvalReport,
};
use tumornet::nested::{train_nested, train_novelty, NestedConfig, NestedModel, TrainingLog};
use tumornet::neural::{backprop_gradients, sse_loss, Network, NetworkSpec, TrainConfig, TransferKind};
use tumornet::seed;
use tumornet::synthesis::{generate_cohort, phase_target, split, Cohort, CohortConfig, Label, PhaseId};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn regime_fidelity() -> Outcome {
    let start = Instant::now();
    let tol = RegimeTolerances::default();
    let expected = [
        (2.5, Regime::FixedPoint),
        (2.8, Regime::FixedPoint),
        (3.2, Regime::Cycle { period: 2 }),
        (3.5, Regime::Cycle { period: 4 }),
        (3.7, Regime::Chaotic),
        (3.9, Regime::Chaotic),
        (4.0, Regime::Chaotic),
    ];
    let mut wrong = Vec::new();
    for (r, want) in expected {
        let got = classify_regime(&LogisticParams::new(r, 1.0).unwrap(), 1000, 512, &tol).unwrap().regime;
        if got != want {
            wrong.push(format!("r={r}: {got} (want {want})"));
        }
    }
    let lyap = lyapunov_exponent(&LogisticParams::new(4.0, 1.0).unwrap(), 0.2, 1000, 1_000_000).unwrap();
    let ln2 = std::f64::consts::LN_2;
    let elapsed = start.elapsed();
    let pass = wrong.is_empty() && (lyap - ln2).abs() <= 0.02 && within(elapsed, 5);
    check(pass, format!("mismatches={wrong:?} lyapunov(r=4)={lyap:.5} (ln2={ln2:.5}) time={elapsed:.2?}"))
}

fn random_network(rng: &mut impl Rng, seed: u64) -> (Network, Vec<f64>, Vec<f64>) {
    let kinds = [TransferKind::Sigmoid, TransferKind::HyperTan, TransferKind::Gaussian];
    let depth = rng.random_range(2..=4);
    let mut sizes: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=8)).collect();
    *sizes.last_mut().unwrap() = rng.random_range(1..=2);
    let transfers = (1..depth).map(|_| kinds[rng.random_range(0..3)]).collect();
    let spec = NetworkSpec { layer_sizes: sizes.clone(), transfers, use_bias: rng.random_bool(0.5) };
    let net = Network::init(spec, seed, 1.0).unwrap();
    let input = (0..sizes[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
    let target = (0..sizes[depth - 1]).map(|_| rng.random_range(0.0..1.0)).collect();
    (net, input, target)
}

fn loss(net: &Network, input: &[f64], target: &[f64]) -> f64 {
    sse_loss(&net.predict(input).unwrap(), target).unwrap()
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(2024);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for n in 0..100u64 {
        let (net, input, target) = random_network(&mut rng, n);
        let grads = backprop_gradients(&net, &input, &target).unwrap();
        let mut compare = |analytic: f64, perturb: &dyn Fn(&mut Network, f64)| {
            let mut plus = net.clone();
            perturb(&mut plus, h);
            let mut minus = net.clone();
            perturb(&mut minus, -h);
            let numeric = (loss(&plus, &input, &target) - loss(&minus, &input, &target)) / (2.0 * h);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        };
        for l in 0..net.weights().len() {
            for i in 0..net.weights()[l].len() {
                compare(grads.weights[l][i], &|m, d| m.weights_mut()[l][i] += d);
            }
            for i in 0..net.biases()[l].len() {
                compare(grads.biases[l][i], &|m, d| m.biases_mut()[l][i] += d);
            }
        }
    }
    let elapsed = start.elapsed();
    check(worst < 1e-4 && within(elapsed, 30), format!("max relative error={worst:.3e} time={elapsed:.2?}"))
}

fn unit_gaussians() -> ClassDensityPair {
    ClassDensityPair::new(Density::Gaussian { mean: -1.0, sd: 1.0 }, Density::Gaussian { mean: 1.0, sd: 1.0 }, 0.5)
        .unwrap()
}

fn posterior_convergence() -> Outcome {
    let start = Instant::now();
    let d = unit_gaussians();
    let grid = d.default_grid();
    let spec = NetworkSpec::uniform(vec![1, 8, 1], TransferKind::Sigmoid, true);
    let cfg =
        TrainConfig { learning_rate: 0.002, epochs: 600, shuffle_seed: 11, init_seed: 12, ..TrainConfig::default() };
    let report = posterior_convergence_experiment(&d, 5000, &spec, &cfg, &grid, 13).unwrap();
    // N(-1,1) vs N(1,1), equal priors: f*(k) = 1 / (1 + exp(-2k)).
    let mad = grid
        .points()
        .iter()
        .map(|&k| (report.net.predict(&[k]).unwrap()[0] - 1.0 / (1.0 + (-2.0 * k).exp())).abs())
        .sum::<f64>()
        / grid.len() as f64;
    let f0 = report.net.predict(&[0.0]).unwrap()[0];
    let elapsed = start.elapsed();
    let pass = mad < 0.05 && (f0 - 0.5).abs() <= 0.03 && within(elapsed, 60);
    check(pass, format!("mean |f - f*|={mad:.4} (reported {:.4}) f(0)={f0:.4} time={elapsed:.2?}", report.mean_abs_dev))
}

fn optimality_of_posterior() -> Outcome {
    let start = Instant::now();
    let uniforms =
        ClassDensityPair::new(Density::Uniform { lo: -3.0, hi: -1.0 }, Density::Uniform { lo: 1.0, hi: 3.0 }, 0.5)
            .unwrap();
    type Case = (&'static str, ClassDensityPair, fn(f64) -> f64);
    let oracles: [Case; 2] = [
        ("gaussians", unit_gaussians(), |k| 1.0 / (1.0 + (-2.0 * k).exp())),
        ("uniforms", uniforms, |k| {
            if (1.0..=3.0).contains(&k) {
                1.0
            } else if (-3.0..=-1.0).contains(&k) {
                0.0
            } else {
                0.5
            }
        }),
    ];
    let mut rng = seed::rng(4);
    let mut failures = Vec::new();
    let mut gaps = Vec::new();
    for (name, d, oracle) in &oracles {
        let grid = d.default_grid();
        let f_star: Vec<f64> = grid.points().iter().map(|&k| oracle(k)).collect();
        let base = expected_sse(&grid, &f_star, d).unwrap();
        let mut min_gap = f64::INFINITY;
        for trial in 0..100 {
            let freq = rng.random_range(0.2..3.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let perturbed: Vec<f64> =
                grid.points().iter().zip(&f_star).map(|(&k, f)| f + 0.05 * (freq * k + phase).sin()).collect();
            let gap = expected_sse(&grid, &perturbed, d).unwrap() - base;
            min_gap = min_gap.min(gap);
            if gap <= 0.0 {
                failures.push(format!("{name}#{trial}"));
            }
        }
        gaps.push(format!("{name}: eps(f*)={base:.6} min gain={min_gap:.3e}"));
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && within(elapsed, 10),
        format!("{} failures={failures:?} time={elapsed:.2?}", gaps.join("; ")),
    )
}

fn linear_classifier_equivalence() -> Outcome {
    let mut rng = seed::rng(5);
    let dim = 4;
    let net = Network::init(NetworkSpec::uniform(vec![dim, 1], TransferKind::Sigmoid, true), 6, 1.0).unwrap();
    let (w, b) = (&net.weights()[0], net.biases()[0][0]);
    let mut agree = 0;
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let z = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() + b;
        let out = net.predict(&x).unwrap()[0] - 0.5;
        if out.signum() == z.signum() {
            agree += 1;
        }
    }
    check(agree == 10_000, format!("sign agreement {agree}/10000"))
}

struct PipelineRun {
    model_file: String,
    log_file: String,
    report_file: String,
}

fn log_bytes(log: &TrainingLog) -> String {
    let mut buf = Vec::new();
    log.write_csv(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn evaluate(model: &NestedModel, test: &Cohort) -> EvalReport {
    let preds: Vec<_> = test.records.iter().map(|r| model.predict(r).unwrap()).collect();
    let scores: Vec<f64> = preds.iter().map(|p| p.prob_m).collect();
    let labels: Vec<u8> = test.records.iter().map(|r| r.label.bit()).collect();
    let space = model.space();
    let (p1, t1): (Vec<f64>, Vec<f64>) = test
        .records
        .iter()
        .zip(&preds)
        .filter(|(r, _)| r.is_simulated_benign())
        .map(|(r, p)| (p.phase1, phase_target(r, PhaseId::I, space).unwrap()))
        .unzip();
    let (p2, t2): (Vec<f64>, Vec<f64>) = test
        .records
        .iter()
        .zip(&preds)
        .filter(|(r, _)| !r.synthetic_counter)
        .map(|(r, p)| (p.phase2, phase_target(r, PhaseId::II, space).unwrap()))
        .unzip();
    EvalReport {
        n: test.len(),
        threshold: model.threshold(),
        classification: classification_metrics(&scores, &labels, model.threshold()).unwrap(),
        rmse_phase1: regression_metrics(&p1, &t1).ok(),
        rmse_phase2: regression_metrics(&p2, &t2).ok(),
        posterior_mad: None,
    }
}

fn record_run(model: &NestedModel, log: &TrainingLog, report: &EvalReport) -> PipelineRun {
    PipelineRun { model_file: model.serialize(), log_file: log_bytes(log), report_file: report.to_json() }
}

const MASTER_SEED: u64 = 1;

fn default_split() -> (Cohort, Cohort, Cohort) {
    let cohort = generate_cohort(&CohortConfig { master_seed: MASTER_SEED, ..CohortConfig::default() }).unwrap();
    assert_eq!((cohort.count(Label::Benign), cohort.count(Label::Malignant)), (500, 500));
    split(&cohort, 0.7, 0.15, MASTER_SEED).unwrap()
}

fn nested_pipeline() -> (Outcome, PipelineRun) {
    let start = Instant::now();
    let (train, val, test) = default_split();
    let (model, log) = train_nested(&train, &val, &NestedConfig::default()).unwrap();
    let report = evaluate(&model, &test);
    let c = report.classification;
    let auc = c.auc.unwrap_or(0.0);
    let rmse1 = report.rmse_phase1.unwrap_or(f64::INFINITY);
    let elapsed = start.elapsed();
    let pass = c.accuracy >= 0.85 && auc >= 0.90 && rmse1 <= 0.05 && within(elapsed, 120);
    let detail = format!("accuracy={:.4} auc={auc:.4} phase I rmse={rmse1:.5} time={elapsed:.2?}", c.accuracy);
    (check(pass, detail), record_run(&model, &log, &report))
}

fn benign_only(c: &Cohort) -> Cohort {
    Cohort::from_records(c.records.iter().filter(|r| r.is_simulated_benign()).cloned().collect(), &c.config).unwrap()
}

fn novelty_mode() -> (Outcome, Vec<PipelineRun>) {
    let start = Instant::now();
    let (train, val, test) = default_split();
    let (train_b, val_b) = (benign_only(&train), benign_only(&val));
    let space = train.feature_space();
    let config = NestedConfig::default();
    let mut runs = Vec::new();

    let (model0, log0) = train_novelty(&train_b, &val_b, 0, &space, &config, MASTER_SEED).unwrap();
    let report0 = evaluate(&model0, &test);
    let c0 = report0.classification;
    let labeled_zero = (c0.tn + c0.fn_) as f64 / report0.n as f64;
    runs.push(record_run(&model0, &log0, &report0));

    let (model500, log500) = train_novelty(&train_b, &val_b, 500, &space, &config, MASTER_SEED).unwrap();
    let report500 = evaluate(&model500, &test);
    let c = report500.classification;
    let (recall, fpr) = (c.tpr.unwrap_or(0.0), c.fpr.unwrap_or(1.0));
    runs.push(record_run(&model500, &log500, &report500));

    let elapsed = start.elapsed();
    let pass = labeled_zero >= 0.99 && recall >= 0.75 && fpr <= 0.25 && within(elapsed, 120);
    let detail = format!(
        "n_counter=0: labeled 0 = {labeled_zero:.4}; n_counter=500: recall={recall:.4} fpr={fpr:.4} time={elapsed:.2?}"
    );
    (check(pass, detail), runs)
}

fn determinism(first: &[PipelineRun]) -> Outcome {
    let (_, again6) = nested_pipeline();
    let (_, again7) = novelty_mode();
    let again: Vec<&PipelineRun> = std::iter::once(&again6).chain(&again7).collect();
    let mut differing = Vec::new();
    for (i, (a, b)) in first.iter().zip(again).enumerate() {
        if a.model_file != b.model_file {
            differing.push(format!("run{i}:model"));
        }
        if a.log_file != b.log_file {
            differing.push(format!("run{i}:log"));
        }
        if a.report_file != b.report_file {
            differing.push(format!("run{i}:report"));
        }
    }
    let bytes: usize = first.iter().map(|r| r.model_file.len() + r.log_file.len() + r.report_file.len()).sum();
    check(differing.is_empty(), format!("compared {} runs ({bytes} bytes), differing={differing:?}", first.len()))
}

fn rubinow_transcription() -> Outcome {
    let mut wrong = Vec::new();
    for (dt, lambda, dv) in [(1.0, 0.1, 0.05), (0.5, 0.2, 0.1)] {
        let got = rubinow_to_logistic(&RubinowDiscretization::new(dt, lambda, dv).unwrap()).unwrap();
        let (r, k) = (dt / 2.0, -1.0 / ((2.0 / dt) - 1.0 - (lambda + dv)));
        if got.r != r || got.k != k {
            wrong.push(format!("({dt},{lambda},{dv}) -> r={} k={} want r={r} k={k}", got.r, got.k));
        }
    }
    let singular = rubinow_to_logistic(&RubinowDiscretization::new(2.0, 0.0, 0.0).unwrap());
    if !matches!(singular, Err(DynamicsError::Singular)) {
        wrong.push(format!("(2,0,0) -> {singular:?}, want singular"));
    }
    check(
        wrong.is_empty(),
        format!("r=0.5,k={:.6}; r=0.25,k={:.6}; singular at dt=2; mismatches={wrong:?}", -1.0 / 0.85, -1.0 / 2.7),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "regime fidelity", regime_fidelity()),
        (2, "gradient correctness", gradient_correctness()),
        (3, "posterior convergence", posterior_convergence()),
        (4, "optimality of f*", optimality_of_posterior()),
        (5, "linear-classifier equivalence", linear_classifier_equivalence()),
    ];
    let (o6, run6) = nested_pipeline();
    results.push((6, "end-to-end nested pipeline", o6));
    let (o7, runs7) = novelty_mode();
    results.push((7, "novelty mode", o7));
    let first: Vec<PipelineRun> = std::iter::once(run6).chain(runs7).collect();
    results.push((8, "determinism", determinism(&first)));
    results.push((9, "rubinow transcription", rubinow_transcription()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
