//! JSON model files:
//!
//! ```json
//! { "format_version": 1, "layer_sizes": [2, 4, 1],
//!   "transfers": ["sigmoid", "sigmoid"], "use_bias": true,
//!   "weights": [[...], [...]], "biases": [[...], [...]] }
//! ```
//!
//! Weight arrays are row-major per layer (one row per receiving neuron).
//! Without biases each bias array is empty. Floats are written in shortest
//! round-trip form, so a reloaded network reproduces outputs bit-exactly.

use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use super::{Network, NetworkSpec, NeuralError, Result, TransferKind};

pub const MODEL_FORMAT_VERSION: u64 = 1;

pub fn to_json_value(net: &Network) -> Value {
    let spec = net.spec();
    json!({
        "format_version": MODEL_FORMAT_VERSION,
        "layer_sizes": spec.layer_sizes,
        "transfers": spec.transfers.iter().map(|t| t.name()).collect::<Vec<_>>(),
        "use_bias": spec.use_bias,
        "weights": net.weights(),
        "biases": net.biases(),
    })
}

pub fn serialize(net: &Network) -> String {
    let mut text = serde_json::to_string_pretty(&to_json_value(net)).expect("json values always serialize");
    text.push('\n');
    text
}

fn field<T: DeserializeOwned>(obj: &Map<String, Value>, name: &str) -> Result<T> {
    let value = obj.get(name).ok_or_else(|| NeuralError::Schema { field: name.into(), message: "missing".into() })?;
    serde_json::from_value(value.clone())
        .map_err(|e| NeuralError::Schema { field: name.into(), message: e.to_string() })
}

pub fn from_json_value(value: &Value) -> Result<Network> {
    let obj = value
        .as_object()
        .ok_or_else(|| NeuralError::Schema { field: "<root>".into(), message: "expected an object".into() })?;
    let version: u64 = field(obj, "format_version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(NeuralError::Version(version));
    }
    const KNOWN: [&str; 6] = ["format_version", "layer_sizes", "transfers", "use_bias", "weights", "biases"];
    if let Some(extra) = obj.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(NeuralError::Schema { field: extra.clone(), message: "unknown field".into() });
    }
    let layer_sizes: Vec<usize> = field(obj, "layer_sizes")?;
    let names: Vec<String> = field(obj, "transfers")?;
    let transfers = names
        .iter()
        .map(|n| {
            TransferKind::from_name(n).ok_or_else(|| NeuralError::Schema {
                field: "transfers".into(),
                message: format!("unknown transfer `{n}`"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let use_bias: bool = field(obj, "use_bias")?;
    let weights: Vec<Vec<f64>> = field(obj, "weights")?;
    let biases: Vec<Vec<f64>> = field(obj, "biases")?;
    let spec = NetworkSpec { layer_sizes, transfers, use_bias };
    spec.validate().map_err(|e| NeuralError::Schema { field: "layer_sizes".into(), message: e.to_string() })?;
    Network::from_parts(spec, weights, biases)
        .map_err(|e| NeuralError::Schema { field: "weights".into(), message: e.to_string() })
}

pub fn deserialize(text: &str) -> Result<Network> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| NeuralError::Schema { field: "<root>".into(), message: e.to_string() })?;
    from_json_value(&value)
}
