use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::run::{run, RunSummary};

/// Replaces the value at a dot-separated path (`rule.delta_override`,
/// `process.weights.0`) of a JSON document.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if path.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed parameter path `{path}`")));
    }
    let mut cur = doc;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), value);
                    return Ok(());
                }
                map.entry((*part).to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::Config(format!("`{part}` is not an array index in `{path}`")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| Error::Config(format!("index {idx} out of range ({len}) in `{path}`")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(Error::Config(format!(
                    "`{path}` descends into a scalar at `{part}`"
                )))
            }
        };
    }
    unreachable!("loop returns on the last path element")
}

/// Parses a sweep value: JSON when it parses, a bare string otherwise.
pub fn parse_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: Value,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub param: String,
    pub points: Vec<SweepPoint>,
}

/// The config with `param` set to `value`.
pub fn with_param(config: &ExperimentConfig, param: &str, value: Value) -> Result<ExperimentConfig> {
    let mut doc = serde_json::to_value(config)?;
    set_path(&mut doc, param, value)?;
    let out: ExperimentConfig = serde_json::from_value(doc)?;
    out.validate()?;
    Ok(out)
}

/// Runs the config once per value of `param`.
pub fn sweep(config: &ExperimentConfig, param: &str, values: &[Value]) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let points = values
        .iter()
        .map(|v| {
            let c = with_param(config, param, v.clone())?;
            Ok(SweepPoint {
                value: v.clone(),
                summary: run(&c)?.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        param: param.to_string(),
        points,
    })
}
