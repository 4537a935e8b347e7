use serde_json::{json, Map, Value};

use super::{NestedError, PhaseId, Result};
use crate::neural::{self, Network, TransferKind};
use crate::synthesis::{to_feature_vector, FeatureSpace, Label, PatientRecord};

pub const NESTED_FORMAT_VERSION: u64 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Concatenates `[prev_output ∥ prev_input ∥ fresh]`. Phase I must have
/// empty predecessors.
pub fn build_phase_input(phase: PhaseId, prev_output: &[f64], prev_input: &[f64], fresh: &[f64]) -> Result<Vec<f64>> {
    if phase == PhaseId::I && !(prev_output.is_empty() && prev_input.is_empty()) {
        return Err(NestedError::Dimension("phase I has no predecessor".into()));
    }
    if phase != PhaseId::I && prev_output.is_empty() {
        return Err(NestedError::Dimension(format!("phase {phase} needs the previous phase output")));
    }
    let mut v = Vec::with_capacity(prev_output.len() + prev_input.len() + fresh.len());
    v.extend_from_slice(prev_output);
    v.extend_from_slice(prev_input);
    v.extend_from_slice(fresh);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub phase1: f64,
    pub phase2: f64,
    pub prob_m: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedModel {
    net_i: Network,
    net_ii: Network,
    net_iii: Network,
    space: FeatureSpace,
    threshold: f64,
}

impl NestedModel {
    /// Checks the chaining widths before assembling the model.
    pub fn new(net_i: Network, net_ii: Network, net_iii: Network, space: FeatureSpace, threshold: f64) -> Result<Self> {
        space.validate()?;
        let fresh_i = space.fresh_width(PhaseId::I);
        if net_i.inputs() != fresh_i {
            return Err(NestedError::Dimension(format!("net I takes {} inputs, expected {fresh_i}", net_i.inputs())));
        }
        for (phase, net) in [(PhaseId::I, &net_i), (PhaseId::II, &net_ii), (PhaseId::III, &net_iii)] {
            if net.outputs() != 1 {
                return Err(NestedError::Dimension(format!("net {phase} has {} outputs, expected 1", net.outputs())));
            }
        }
        let want_ii = net_i.outputs() + net_i.inputs() + space.fresh_width(PhaseId::II);
        if net_ii.inputs() != want_ii {
            return Err(NestedError::Dimension(format!("net II takes {} inputs, expected {want_ii}", net_ii.inputs())));
        }
        let want_iii = net_ii.outputs() + net_ii.inputs() + space.fresh_width(PhaseId::III);
        if net_iii.inputs() != want_iii {
            return Err(NestedError::Dimension(format!(
                "net III takes {} inputs, expected {want_iii}",
                net_iii.inputs()
            )));
        }
        if net_iii.spec().transfers.last() != Some(&TransferKind::Sigmoid) {
            return Err(NestedError::Dimension("net III output must be sigmoid".into()));
        }
        check_threshold(threshold)?;
        Ok(Self { net_i, net_ii, net_iii, space, threshold })
    }

    pub fn net(&self, phase: PhaseId) -> &Network {
        match phase {
            PhaseId::I => &self.net_i,
            PhaseId::II => &self.net_ii,
            PhaseId::III => &self.net_iii,
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        self.threshold = threshold;
        Ok(self)
    }

    pub(crate) fn replace_phase_three(&self, net_iii: Network) -> Result<Self> {
        Self::new(self.net_i.clone(), self.net_ii.clone(), net_iii, self.space, self.threshold)
    }

    /// Runs the chain on already scaled fresh inputs `p1` (width `W + 1`)
    /// and `p2` (width 1).
    pub fn predict_scaled(&self, p1: &[f64], p2: &[f64]) -> Result<Prediction> {
        let (i2, o1) = self.phase_two_input(p1, p2)?;
        let o2 = self.net_ii.predict(&i2)?[0];
        let i3 = build_phase_input(PhaseId::III, &[o2], &i2, &[])?;
        let prob_m = self.net_iii.predict(&i3)?[0];
        let label = if prob_m >= self.threshold { Label::Malignant } else { Label::Benign };
        Ok(Prediction { phase1: o1, phase2: o2, prob_m, label })
    }

    pub fn predict(&self, record: &PatientRecord) -> Result<Prediction> {
        let p1 = to_feature_vector(record, PhaseId::I, &self.space)?;
        let p2 = to_feature_vector(record, PhaseId::II, &self.space)?;
        self.predict_scaled(&p1, &p2)
    }

    /// Returns `(I_2, O_1)`.
    pub(crate) fn phase_two_input(&self, p1: &[f64], p2: &[f64]) -> Result<(Vec<f64>, f64)> {
        let i1 = build_phase_input(PhaseId::I, &[], &[], p1)?;
        let o1 = self.net_i.predict(&i1)?[0];
        Ok((build_phase_input(PhaseId::II, &[o1], &i1, p2)?, o1))
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "format_version": NESTED_FORMAT_VERSION,
            "threshold": self.threshold,
            "space": self.space,
            "phase_i": neural::to_json_value(&self.net_i),
            "phase_ii": neural::to_json_value(&self.net_ii),
            "phase_iii": neural::to_json_value(&self.net_iii),
        })
    }

    pub fn serialize(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_json_value()).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| schema("<root>", e))?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self> {
        const KEYS: [&str; 6] = ["format_version", "threshold", "space", "phase_i", "phase_ii", "phase_iii"];
        let obj = value.as_object().ok_or_else(|| schema("<root>", "expected an object"))?;
        if let Some(extra) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(schema(extra, "unknown field"));
        }
        let version =
            field(obj, "format_version")?.as_u64().ok_or_else(|| schema("format_version", "expected an integer"))?;
        if version != NESTED_FORMAT_VERSION {
            return Err(NestedError::Version(version));
        }
        let threshold = field(obj, "threshold")?.as_f64().ok_or_else(|| schema("threshold", "expected a number"))?;
        let space: FeatureSpace =
            serde_json::from_value(field(obj, "space")?.clone()).map_err(|e| schema("space", e))?;
        let net =
            |key: &str| -> Result<Network> { neural::from_json_value(field(obj, key)?).map_err(|e| schema(key, e)) };
        Self::new(net("phase_i")?, net("phase_ii")?, net("phase_iii")?, space, threshold)
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(NestedError::Usage(format!("threshold {threshold} outside [0, 1]")))
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(key, "missing"))
}

fn schema(field: &str, message: impl std::fmt::Display) -> NestedError {
    NestedError::Schema { field: field.to_string(), message: message.to_string() }
}
