use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub struct Globals {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Globals {
    /// Takes `seed`, `out` and `format` out of the config object; flags win.
    pub fn resolve(
        file: &mut Map<String, Value>,
        seed: Option<u64>,
        out: Option<PathBuf>,
        format: Option<Format>,
    ) -> anyhow::Result<Self> {
        let take = |file: &mut Map<String, Value>, key: &str| file.remove(key).filter(|v| !v.is_null());
        let file_seed = take(file, "seed");
        let file_out = take(file, "out");
        let file_format = take(file, "format");
        Ok(Globals {
            seed: match (seed, file_seed) {
                (Some(s), _) => s,
                (None, Some(v)) => serde_json::from_value(v).context("config key `seed` must be a non-negative integer")?,
                (None, None) => 0,
            },
            out: match (out, file_out) {
                (Some(p), _) => Some(p),
                (None, Some(v)) => Some(serde_json::from_value(v).context("config key `out` must be a path string")?),
                (None, None) => None,
            },
            format: match (format, file_format) {
                (Some(f), _) => Some(f),
                (None, Some(v)) => Some(serde_json::from_value(v).context("config key `format` must be \"csv\" or \"json\"")?),
                (None, None) => None,
            },
        })
    }
}

pub fn load(path: Option<&Path>) -> anyhow::Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
    match serde_json::from_str(&text).with_context(|| format!("config file {} is not valid JSON", path.display()))? {
        Value::Object(map) => Ok(map),
        _ => bail!("config file {} must hold a JSON object", path.display()),
    }
}

/// Overlays the flags that were given onto the config object and parses the
/// result. Keys the command does not know are rejected.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: &Map<String, Value>) -> anyhow::Result<T> {
    let mut merged = file.clone();
    for (k, v) in as_object(flags)? {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    let parsed: T = serde_json::from_value(Value::Object(merged.clone())).context("invalid parameters")?;
    let known = as_object(&parsed)?;
    let unknown: Vec<&str> = merged.keys().filter(|k| !known.contains_key(*k)).map(String::as_str).collect();
    if !unknown.is_empty() {
        bail!("unknown config key(s) for this command: {}", unknown.join(", "));
    }
    Ok(parsed)
}

fn as_object<T: Serialize>(x: &T) -> anyhow::Result<Map<String, Value>> {
    match serde_json::to_value(x)? {
        Value::Object(map) => Ok(map),
        _ => bail!("parameters must serialize to an object"),
    }
}
