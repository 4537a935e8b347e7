use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{BifurcateArgs, CliError, EvalArgs, GenDataArgs, Mode, PosteriorArgs, SimulateArgs, Summary, TrainArgs};
use crate::dynamics::{
    bifurcation_scan, classify_regime, simulate as run_simulation, write_bifurcation_csv, LogisticParams,
    RegimeTolerances,
};
use crate::evaluation::{
    classification_metrics, posterior_convergence_experiment, regression_metrics, roc_curve, ClassDensityPair, Density,
    EvalReport,
};
use crate::nested::{train_nested, train_novelty, NestedConfig, NestedModel, PhaseId, TrainingLog};
use crate::neural::{NetworkSpec, TrainConfig, TransferKind};
use crate::synthesis::{
    generate_cohort, holdout, load_cohort, phase_target, save_cohort, sidecar_path, Cohort, CohortConfig, Label,
};
use crate::{fsio, numfmt, seed};

const SIDECAR_VERSION: u64 = 1;
const REGIME_BURN_IN: usize = 1000;
const REGIME_WINDOW: usize = 512;

type CmdResult = Result<Summary, CliError>;

fn write_file(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
    fsio::write_atomic(path, fill).map_err(|e| CliError::io(path, e))
}

/// Echoes the effective configuration next to `output`.
fn write_sidecar(output: &Path, command: &str, config: Value) -> Result<(), CliError> {
    let doc = json!({ "format_version": SIDECAR_VERSION, "command": command, "config": config });
    let mut text = serde_json::to_string_pretty(&doc).expect("sidecar serializes");
    text.push('\n');
    let path = sidecar_path(output);
    fsio::write_string_atomic(&path, &text).map_err(|e| CliError::io(&path, e))
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Reads a JSON config and layers it over `defaults`; unknown keys are
/// rejected when the merged value is decoded.
fn read_config<T: Serialize + for<'de> Deserialize<'de>>(path: Option<&Path>, defaults: T) -> Result<T, CliError> {
    let Some(path) = path else { return Ok(defaults) };
    let text = fsio::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let overlay: Value =
        serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let mut merged = serde_json::to_value(defaults).expect("config serializes");
    merge(&mut merged, overlay);
    serde_json::from_value(merged).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Compact float for the summary line.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub(super) fn simulate(a: SimulateArgs) -> CmdResult {
    let params = LogisticParams::new(a.r, a.k)?;
    if !(a.noise.is_finite() && a.noise >= 0.0) {
        return Err(CliError::invalid(format!("noise {} must be nonnegative", a.noise)));
    }
    let trajectory = run_simulation(params, a.x0, a.steps, a.noise, a.seed)?;
    let regime = classify_regime(&params, REGIME_BURN_IN, REGIME_WINDOW, &RegimeTolerances::default())?;
    write_file(&a.out, |w| trajectory.write_csv(w))?;
    write_sidecar(
        &a.out,
        "simulate",
        json!({ "r": a.r, "k": a.k, "x0": a.x0, "steps": a.steps, "noise": a.noise, "seed": a.seed }),
    )?;
    Ok(vec![
        ("rows", trajectory.masses.len().to_string()),
        ("regime", regime.regime.to_string()),
        ("lyapunov", num(regime.lyapunov)),
        ("out", display(&a.out)),
    ])
}

pub(super) fn bifurcate(a: BifurcateArgs) -> CmdResult {
    let rows = bifurcation_scan(a.r_min, a.r_max, a.r_step, a.k, a.burn_in, a.samples)?;
    write_file(&a.out, |w| write_bifurcation_csv(&rows, w))?;
    write_sidecar(
        &a.out,
        "bifurcate",
        json!({
            "r_min": a.r_min, "r_max": a.r_max, "r_step": a.r_step, "k": a.k,
            "burn_in": a.burn_in, "samples": a.samples,
        }),
    )?;
    Ok(vec![("rows", rows.len().to_string()), ("out", display(&a.out))])
}

pub(super) fn gen_data(a: GenDataArgs) -> CmdResult {
    let mut config = read_config(a.config.as_deref(), CohortConfig::default())?;
    if let Some(n) = a.benign {
        config.n_benign = n;
    }
    if let Some(n) = a.malignant {
        config.n_malignant = n;
    }
    if let Some(n) = a.counter_examples {
        config.n_counter = n;
    }
    if let Some(s) = a.seed {
        config.master_seed = s;
    }
    let cohort = generate_cohort(&config)?;
    save_cohort(&cohort, &a.out)?;
    Ok(vec![
        ("records", cohort.len().to_string()),
        ("benign", cohort.count(Label::Benign).to_string()),
        ("malignant", cohort.count(Label::Malignant).to_string()),
        ("out", display(&a.out)),
    ])
}

/// Settings of the `train` command; `seed` derives the validation split
/// and counter-example streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainRunConfig {
    pub model: NestedConfig,
    pub validation_fraction: f64,
    pub counter_examples: usize,
    pub seed: u64,
}

impl Default for TrainRunConfig {
    fn default() -> Self {
        Self { model: NestedConfig::default(), validation_fraction: 0.15, counter_examples: 500, seed: 0 }
    }
}

fn train_split(cohort: &Cohort, run: &TrainRunConfig) -> Result<(Cohort, Cohort), CliError> {
    let f = run.validation_fraction;
    if f == 0.0 {
        let empty = Cohort::from_records(Vec::new(), &cohort.config)?;
        return Ok((cohort.clone(), empty));
    }
    if !(f > 0.0 && f < 1.0) {
        return Err(CliError::invalid(format!("validation_fraction {f} outside [0, 1)")));
    }
    Ok(holdout(cohort, f, seed::derive(run.seed, 0))?)
}

pub(super) fn train(a: TrainArgs) -> CmdResult {
    let mut run = read_config(a.config.as_deref(), TrainRunConfig::default())?;
    if let Some(n) = a.counter_examples {
        run.counter_examples = n;
    }
    if let Some(s) = a.seed {
        run.seed = s;
    }
    run.model.validate()?;
    let cohort = load_cohort(&a.data)?;
    if a.mode == Mode::Novelty {
        if let Some(r) = cohort.records.iter().find(|r| !r.is_simulated_benign()) {
            return Err(CliError::invalid(format!(
                "novelty mode needs a benign-only cohort; {} has non-benign record {}",
                a.data.display(),
                r.id
            )));
        }
    }
    let (train_set, val_set) = train_split(&cohort, &run)?;
    let (model, log) = match a.mode {
        Mode::Nested => train_nested(&train_set, &val_set, &run.model)?,
        Mode::Novelty => train_novelty(
            &train_set,
            &val_set,
            run.counter_examples,
            &cohort.feature_space(),
            &run.model,
            seed::derive(run.seed, 1),
        )?,
    };
    let model_text = model.serialize();
    write_file(&a.model_out, |w| w.write_all(model_text.as_bytes()))?;
    let log_path = a.log_out.clone().unwrap_or_else(|| a.model_out.with_extension("log.csv"));
    write_file(&log_path, |w| log.write_csv(w))?;
    let effective = json!({
        "data": display(&a.data),
        "mode": a.mode.name(),
        "run": run,
    });
    write_sidecar(&a.model_out, "train", effective)?;
    Ok(train_summary(&log, a.mode, &a.model_out, &log_path, train_set.len(), val_set.len()))
}

fn train_summary(
    log: &TrainingLog,
    mode: Mode,
    model: &Path,
    log_path: &Path,
    n_train: usize,
    n_val: usize,
) -> Summary {
    let mut s: Summary =
        vec![("mode", mode.name().to_string()), ("train", n_train.to_string()), ("val", n_val.to_string())];
    for p in &log.phases {
        let key = match p.phase {
            PhaseId::I => "hidden_i",
            PhaseId::II => "hidden_ii",
            PhaseId::III => "hidden_iii",
        };
        s.push((key, p.hidden.to_string()));
    }
    s.push(("model", display(model)));
    s.push(("log", display(log_path)));
    s
}

pub(super) fn eval(a: EvalArgs) -> CmdResult {
    if let Some(t) = a.threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::usage(format!("--threshold {t} outside [0, 1]")));
        }
    }
    let cohort = load_cohort(&a.data)?;
    let text = fsio::read_to_string(&a.model).map_err(|e| CliError::io(&a.model, e))?;
    let model =
        NestedModel::deserialize(&text).map_err(|e| CliError::invalid(format!("{}: {e}", a.model.display())))?;
    let model = match a.threshold {
        Some(t) => model.with_threshold(t)?,
        None => model,
    };
    if *model.space() != cohort.feature_space() {
        return Err(CliError::invalid("cohort feature bounds differ from the model's"));
    }
    let predictions = cohort.records.iter().map(|r| model.predict(r)).collect::<Result<Vec<_>, _>>()?;
    let scores: Vec<f64> = predictions.iter().map(|p| p.prob_m).collect();
    let labels: Vec<u8> = cohort.records.iter().map(|r| r.label.bit()).collect();
    let classification = classification_metrics(&scores, &labels, model.threshold())?;

    let space = model.space();
    let rmse = |phase: PhaseId, keep: fn(&crate::synthesis::PatientRecord) -> bool| -> Result<Option<f64>, CliError> {
        let mut pred = Vec::new();
        let mut target = Vec::new();
        for (r, p) in cohort.records.iter().zip(&predictions) {
            if keep(r) {
                pred.push(if phase == PhaseId::I { p.phase1 } else { p.phase2 });
                target.push(phase_target(r, phase, space)?);
            }
        }
        Ok(if pred.is_empty() { None } else { Some(regression_metrics(&pred, &target)?) })
    };
    let report = EvalReport {
        n: cohort.len(),
        threshold: model.threshold(),
        classification,
        rmse_phase1: rmse(PhaseId::I, |r| r.is_simulated_benign())?,
        rmse_phase2: rmse(PhaseId::II, |r| !r.synthetic_counter)?,
        posterior_mad: None,
    };
    let roc = roc_curve(&scores, &labels)?;

    let report_json = report.to_json();
    write_file(&a.report, |w| w.write_all(report_json.as_bytes()))?;
    let csv_path = a.report.with_extension("csv");
    write_file(&csv_path, |w| report.write_csv(w))?;
    let pred_path = a.report.with_extension("predictions.csv");
    write_file(&pred_path, |w| {
        writeln!(w, "id,label,synthetic_counter,phase1,phase2,prob_m,predicted")?;
        for (r, p) in cohort.records.iter().zip(&predictions) {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.id,
                r.label.bit(),
                u8::from(r.synthetic_counter),
                numfmt::exact(p.phase1),
                numfmt::exact(p.phase2),
                numfmt::exact(p.prob_m),
                p.label.bit()
            )?;
        }
        Ok(())
    })?;
    let roc_path = a.report.with_extension("roc.csv");
    write_file(&roc_path, |w| {
        writeln!(w, "threshold,tpr,fpr")?;
        for p in &roc {
            let t = if p.threshold.is_finite() { numfmt::exact(p.threshold) } else { "inf".into() };
            writeln!(w, "{t},{},{}", numfmt::exact(p.tpr), numfmt::exact(p.fpr))?;
        }
        Ok(())
    })?;
    write_sidecar(
        &a.report,
        "eval",
        json!({ "data": display(&a.data), "model": display(&a.model), "threshold": model.threshold() }),
    )?;

    let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "absent".into());
    Ok(vec![
        ("n", report.n.to_string()),
        ("accuracy", num(classification.accuracy)),
        ("auc", opt(classification.auc)),
        ("tpr", opt(classification.tpr)),
        ("fpr", opt(classification.fpr)),
        ("report", display(&a.report)),
    ])
}

fn parse_layers(spec: &str) -> Result<Vec<usize>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("--spec `{spec}`: expected comma-separated sizes")))
        })
        .collect()
}

pub(super) fn posterior_check(a: PosteriorArgs) -> CmdResult {
    let layers = parse_layers(&a.spec)?;
    if layers.len() < 2 {
        return Err(CliError::usage(format!("--spec `{}` needs input and output sizes", a.spec)));
    }
    let densities = ClassDensityPair::new(
        Density::Gaussian { mean: a.mu_b, sd: a.sigma },
        Density::Gaussian { mean: a.mu_m, sd: a.sigma },
        a.prior_m,
    )?;
    if a.prior_m == 0.0 || a.prior_m == 1.0 {
        return Err(CliError::invalid(format!("prior_m {} leaves a single class", a.prior_m)));
    }
    let spec = NetworkSpec::uniform(layers, TransferKind::Sigmoid, true);
    let config = TrainConfig {
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        shuffle_seed: seed::derive(a.seed, 0),
        init_seed: seed::derive(a.seed, 1),
        ..TrainConfig::default()
    };
    let grid = densities.default_grid();
    let report = posterior_convergence_experiment(&densities, a.n, &spec, &config, &grid, seed::derive(a.seed, 2))?;
    write_file(&a.out, |w| report.write_csv(w))?;
    write_sidecar(
        &a.out,
        "posterior-check",
        json!({
            "mu_b": a.mu_b, "mu_m": a.mu_m, "sigma": a.sigma, "prior_m": a.prior_m, "n": a.n,
            "spec": a.spec, "train": config,
        }),
    )?;
    let midpoint = 0.5 * (a.mu_b + a.mu_m);
    Ok(vec![
        ("mean_abs_dev", num(report.mean_abs_dev)),
        ("max_abs_dev", num(report.max_abs_dev)),
        ("f_mid", num(report.f_net_at(midpoint))),
        ("out", display(&a.out)),
    ])
}
