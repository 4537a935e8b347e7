use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::model::{build_phase_input, NestedModel, DEFAULT_THRESHOLD};
use super::{NestedError, PhaseId, Result};
use crate::neural::{grow_hidden_until_adequate, GrowthOutcome, NetworkSpec, Sample, TrainConfig, TransferKind};
use crate::numfmt;
use crate::seed;
use crate::synthesis::{
    phase_target, synthesize_counter_examples, to_feature_vector, Cohort, FeatureSpace, Label, PatientRecord,
};

/// One phase's architecture and training settings. `hidden` is the starting
/// width for growth; the output neuron is always sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub hidden: usize,
    pub hidden_transfer: TransferKind,
    pub use_bias: bool,
    pub train: TrainConfig,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self { hidden: 4, hidden_transfer: TransferKind::Sigmoid, use_bias: true, train: TrainConfig::default() }
    }
}

impl PhaseConfig {
    fn spec(&self, inputs: usize) -> NetworkSpec {
        NetworkSpec {
            layer_sizes: vec![inputs, self.hidden, 1],
            transfers: vec![self.hidden_transfer, TransferKind::Sigmoid],
            use_bias: self.use_bias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NestedConfig {
    pub phase_i: PhaseConfig,
    pub phase_ii: PhaseConfig,
    pub phase_iii: PhaseConfig,
    pub threshold: f64,
}

impl Default for NestedConfig {
    fn default() -> Self {
        let phase = |n: u64, lr: f64, adequacy: f64| PhaseConfig {
            hidden: 4,
            train: TrainConfig {
                learning_rate: lr,
                epochs: 300,
                shuffle_seed: seed::derive(n, 0),
                init_seed: seed::derive(n, 1),
                adequacy_threshold: adequacy,
                max_hidden: 8,
                ..TrainConfig::default()
            },
            ..PhaseConfig::default()
        };
        Self {
            phase_i: phase(1, 0.05, 1e-4),
            phase_ii: phase(2, 0.05, 1e-3),
            phase_iii: PhaseConfig { hidden_transfer: TransferKind::Gaussian, ..phase(3, 0.05, 0.005) },
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl NestedConfig {
    pub fn phase(&self, phase: PhaseId) -> &PhaseConfig {
        match phase {
            PhaseId::I => &self.phase_i,
            PhaseId::II => &self.phase_ii,
            PhaseId::III => &self.phase_iii,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for phase in PhaseId::ALL {
            let c = self.phase(phase);
            if c.hidden == 0 {
                return Err(NestedError::Usage(format!("phase {phase}: hidden width must be at least 1")));
            }
            c.train.validate()?;
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(NestedError::Usage(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub phase: PhaseId,
    pub epoch: usize,
    pub train_sse: f64,
    pub val_sse: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub phase: PhaseId,
    pub hidden: usize,
    pub rounds: usize,
    pub adequate: bool,
    pub val_sse_per_sample: f64,
}

/// Loss histories of the selected network of each phase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
    pub phases: Vec<PhaseSummary>,
}

impl TrainingLog {
    fn record(&mut self, phase: PhaseId, outcome: &GrowthOutcome) {
        let best = &outcome.best;
        for (epoch, &train_sse) in best.train_sse.iter().enumerate() {
            self.rows.push(LogRow { phase, epoch, train_sse, val_sse: best.val_sse.get(epoch).copied() });
        }
        self.phases.push(PhaseSummary {
            phase,
            hidden: outcome.hidden,
            rounds: outcome.rounds,
            adequate: outcome.adequate,
            val_sse_per_sample: outcome.val_sse_per_sample,
        });
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "phase,epoch,train_sse,val_sse")?;
        for r in &self.rows {
            let val = r.val_sse.map(numfmt::exact).unwrap_or_default();
            writeln!(out, "{},{},{},{}", r.phase, r.epoch, numfmt::exact(r.train_sse), val)?;
        }
        Ok(())
    }
}

fn phase_one_inputs(records: &[&PatientRecord], space: &FeatureSpace) -> Result<Vec<Vec<f64>>> {
    records.iter().map(|r| build_phase_input(PhaseId::I, &[], &[], &to_feature_vector(r, PhaseId::I, space)?)).collect()
}

fn samples(
    records: &[&PatientRecord],
    inputs: Vec<Vec<f64>>,
    phase: PhaseId,
    space: &FeatureSpace,
) -> Result<Vec<Sample>> {
    records.iter().zip(inputs).map(|(r, x)| Ok(Sample::new(x, vec![phase_target(r, phase, space)?]))).collect()
}

fn grow(
    phase: PhaseId,
    config: &NestedConfig,
    inputs: usize,
    train: &[Sample],
    val: &[Sample],
) -> Result<GrowthOutcome> {
    let c = config.phase(phase);
    let base = c.spec(inputs);
    let mut train_cfg = c.train.clone();
    train_cfg.max_hidden = train_cfg.max_hidden.max(c.hidden);
    Ok(grow_hidden_until_adequate(&base, train, val, &train_cfg)?)
}

fn phase_three_samples(model: &NestedModel, records: &[&PatientRecord]) -> Result<Vec<Sample>> {
    let space = model.space();
    records
        .iter()
        .map(|r| {
            let p1 = to_feature_vector(r, PhaseId::I, space)?;
            let p2 = to_feature_vector(r, PhaseId::II, space)?;
            let (i2, _) = model.phase_two_input(&p1, &p2)?;
            let o2 = model.net(PhaseId::II).predict(&i2)?;
            let i3 = build_phase_input(PhaseId::III, &o2, &i2, &to_feature_vector(r, PhaseId::III, space)?)?;
            Ok(Sample::new(i3, vec![r.label.target()]))
        })
        .collect()
}

/// Phases I and II on the simulated records, with a placeholder phase III.
fn train_front(train: &Cohort, val: &Cohort, config: &NestedConfig, log: &mut TrainingLog) -> Result<NestedModel> {
    let space = train.feature_space();
    if val.feature_space() != space {
        return Err(NestedError::Usage("training and validation cohorts use different feature bounds".into()));
    }
    fn benign(c: &Cohort) -> Vec<&PatientRecord> {
        c.records.iter().filter(|r| r.is_simulated_benign()).collect()
    }
    fn simulated(c: &Cohort) -> Vec<&PatientRecord> {
        c.records.iter().filter(|r| !r.synthetic_counter).collect()
    }

    let (tr1, va1) = (benign(train), benign(val));
    if tr1.is_empty() {
        return Err(NestedError::Usage("phase I needs simulated benign training records".into()));
    }
    let s1 = samples(&tr1, phase_one_inputs(&tr1, &space)?, PhaseId::I, &space)?;
    let v1 = samples(&va1, phase_one_inputs(&va1, &space)?, PhaseId::I, &space)?;
    let g1 = grow(PhaseId::I, config, space.fresh_width(PhaseId::I), &s1, &v1)?;
    log.record(PhaseId::I, &g1);
    let net_i = g1.best.net;

    let (tr2, va2) = (simulated(train), simulated(val));
    let chain = |records: &[&PatientRecord]| -> Result<Vec<Vec<f64>>> {
        records
            .iter()
            .map(|r| {
                let i1 = to_feature_vector(r, PhaseId::I, &space)?;
                let o1 = net_i.predict(&i1)?;
                build_phase_input(PhaseId::II, &o1, &i1, &to_feature_vector(r, PhaseId::II, &space)?)
            })
            .collect()
    };
    let s2 = samples(&tr2, chain(&tr2)?, PhaseId::II, &space)?;
    let v2 = samples(&va2, chain(&va2)?, PhaseId::II, &space)?;
    let width_ii = net_i.outputs() + net_i.inputs() + space.fresh_width(PhaseId::II);
    let g2 = grow(PhaseId::II, config, width_ii, &s2, &v2)?;
    log.record(PhaseId::II, &g2);
    let net_ii = g2.best.net;

    let width_iii = net_ii.outputs() + net_ii.inputs() + space.fresh_width(PhaseId::III);
    let placeholder = crate::neural::Network::zeros(config.phase_iii.spec(width_iii))?;
    NestedModel::new(net_i, net_ii, placeholder, space, config.threshold)
}

fn fit_phase_three(
    front: &NestedModel,
    train: &[&PatientRecord],
    val: &[&PatientRecord],
    config: &NestedConfig,
    log: &mut TrainingLog,
) -> Result<NestedModel> {
    let s3 = phase_three_samples(front, train)?;
    let v3 = phase_three_samples(front, val)?;
    let g3 = grow(PhaseId::III, config, front.net(PhaseId::III).inputs(), &s3, &v3)?;
    log.record(PhaseId::III, &g3);
    front.replace_phase_three(g3.best.net)
}

/// Trains phase I on simulated benign records, phase II on all simulated
/// records and phase III on every record including counter-examples.
/// Phase III must see both labels.
pub fn train_nested(train: &Cohort, val: &Cohort, config: &NestedConfig) -> Result<(NestedModel, TrainingLog)> {
    config.validate()?;
    if train.is_empty() {
        return Err(NestedError::Usage("empty training cohort".into()));
    }
    if train.count(Label::Benign) == 0 || train.count(Label::Malignant) == 0 {
        return Err(NestedError::Usage("phase III needs both labels in the training cohort".into()));
    }
    let mut log = TrainingLog::default();
    let front = train_front(train, val, config, &mut log)?;
    let tr: Vec<&PatientRecord> = train.records.iter().collect();
    let va: Vec<&PatientRecord> = val.records.iter().collect();
    let model = fit_phase_three(&front, &tr, &va, config, &mut log)?;
    Ok((model, log))
}

/// One-class training: `train` and `val` must hold only simulated benign
/// records. Phase III additionally sees `n_counter` counter-examples drawn
/// from `space`; the validation set gets its own batch in proportion.
/// `n_counter = 0` is allowed and yields a model that labels everything 0.
pub fn train_novelty(
    train: &Cohort,
    val: &Cohort,
    n_counter: usize,
    space: &FeatureSpace,
    config: &NestedConfig,
    counter_seed: u64,
) -> Result<(NestedModel, TrainingLog)> {
    config.validate()?;
    if train.is_empty() {
        return Err(NestedError::Usage("empty training cohort".into()));
    }
    if let Some(r) = train.records.iter().chain(&val.records).find(|r| !r.is_simulated_benign()) {
        return Err(NestedError::Usage(format!("novelty training needs benign records only; record {} is not", r.id)));
    }
    if train.feature_space() != *space {
        return Err(NestedError::Usage("counter-example bounds differ from the cohort feature bounds".into()));
    }
    let mut log = TrainingLog::default();
    let front = train_front(train, val, config, &mut log)?;

    let first_id = train.records.iter().chain(&val.records).map(|r| r.id).max().unwrap_or(0) + 1;
    let n_val = (n_counter as f64 * val.len() as f64 / train.len() as f64).round() as usize;
    let train_counters = synthesize_counter_examples(n_counter, space, seed::derive(counter_seed, 0), first_id);
    let val_counters =
        synthesize_counter_examples(n_val, space, seed::derive(counter_seed, 1), first_id + n_counter as u64);
    let tr: Vec<&PatientRecord> = train.records.iter().chain(&train_counters).collect();
    let va: Vec<&PatientRecord> = val.records.iter().chain(&val_counters).collect();
    let model = fit_phase_three(&front, &tr, &va, config, &mut log)?;
    Ok((model, log))
}

/// Retrains only phase III; phases I and II are carried over unchanged.
pub fn retrain_phase_three(
    model: &NestedModel,
    train: &Cohort,
    val: &Cohort,
    config: &NestedConfig,
) -> Result<(NestedModel, TrainingLog)> {
    config.validate()?;
    let mut log = TrainingLog::default();
    let tr: Vec<&PatientRecord> = train.records.iter().collect();
    let va: Vec<&PatientRecord> = val.records.iter().collect();
    let model = fit_phase_three(model, &tr, &va, config, &mut log)?;
    Ok((model, log))
}
