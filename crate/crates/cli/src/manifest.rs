//! Run manifest: provenance record written next to every command's outputs.
//!
//! The config digest hashes a canonical JSON rendering (recursively sorted
//! object keys), so reordering keys in the config file does not change it.
//! `wall_time_s` is the one field excluded from byte-determinism contracts.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub grid_points: Option<u64>,
    pub mc_samples: Option<u64>,
    pub threads: usize,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub pass: bool,
    pub outputs: Vec<String>,
}

/// Canonical JSON: objects stream their keys in sorted order.
fn canonicalize(value: &serde_json::Value, out: &mut String) {
    match value {
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push(':');
                canonicalize(&map[*k], out);
            }
            out.push('}');
        }
        serde_json::Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                canonicalize(item, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Digest of any serializable config, stable under key reordering.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    let mut canon = String::new();
    canonicalize(&value, &mut canon);
    let mut hasher = Sha256::new();
    hasher.update(canon.as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_under_key_reordering() {
        let a: serde_json::Value =
            serde_json::from_str(r#"{"x": 1, "y": {"b": 2, "a": [1, 2]}}"#).unwrap();
        let b: serde_json::Value =
            serde_json::from_str(r#"{"y": {"a": [1, 2], "b": 2}, "x": 1}"#).unwrap();
        assert_eq!(config_digest(&a), config_digest(&b));
        let c: serde_json::Value = serde_json::from_str(r#"{"x": 1, "y": {"b": 3}}"#).unwrap();
        assert_ne!(config_digest(&a), config_digest(&c));
    }
}
