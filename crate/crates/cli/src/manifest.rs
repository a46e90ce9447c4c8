//! Run manifests embedded in every output document.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use minproj_core::report::round_sig;

/// Seed used when neither `--seed` nor `MINPROJ_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;

pub const SEED_ENV: &str = "MINPROJ_SEED";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub input_digests: Vec<InputDigest>,
    /// Seconds since the Unix epoch; left out of CSV headers so reruns stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, arguments: Vec<String>, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            arguments,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digests: Vec::new(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs()),
        }
    }

    pub fn add_input(&mut self, path: &str, contents: &[u8]) {
        self.input_digests.push(InputDigest {
            path: path.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
        });
    }

    /// Single `#` comment line for CSV outputs, without the timestamp.
    pub fn csv_comment(&self) -> String {
        let mut stable = self.clone();
        stable.timestamp = None;
        format!(
            "# minproj-manifest {}\n",
            serde_json::to_string(&stable).expect("manifest serializes")
        )
    }
}

/// Resolves the seed: explicit flag, then `MINPROJ_SEED`, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{SEED_ENV}={v:?} is not a 64-bit unsigned integer")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Rounds every non-integer number in a JSON tree to 12 significant digits.
pub fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().unwrap());
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON document `{"manifest": …, <key>: …}` with rounded numbers.
pub fn document(manifest: &RunManifest, parts: Vec<(&str, Value)>) -> String {
    let mut map = serde_json::Map::new();
    map.insert(
        "manifest".into(),
        serde_json::to_value(manifest).expect("manifest serializes"),
    );
    for (k, v) in parts {
        map.insert(k.to_string(), v);
    }
    let mut out = serde_json::to_string_pretty(&round_json(Value::Object(map))).expect("json");
    out.push('\n');
    out
}
