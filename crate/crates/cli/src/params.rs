//! Flag/config parameter resolution.
//!
//! Physics flags take human-readable quantity strings ("7.45 GHz",
//! "-99.3 dBm", "58 mK"); a `--config` JSON object may supply any parameter
//! under the same snake_case key as the flag, with explicit flags taking
//! precedence. Config values may be bare numbers (base SI unit), quantity
//! strings, or `{ "value": x, "unit": "GHz" }` objects.

use std::path::Path;

use kipa_core::io::units::{parse_human, parse_quantity, Dimension};
use kipa_core::{Error, Result};
use serde_json::Value;

/// Merged view of a command's `--config` file.
#[derive(Debug)]
pub struct Params {
    map: serde_json::Map<String, Value>,
}

fn missing(key: &str) -> Error {
    Error::InvalidArgument(format!(
        "missing parameter `{key}`: pass --{} or set \"{key}\" in --config",
        key.replace('_', "-")
    ))
}

impl Params {
    /// Load the config file, or start empty when none was given.
    pub fn load(config: Option<&Path>) -> Result<Self> {
        let map = match config {
            None => serde_json::Map::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let value: Value = serde_json::from_str(&text).map_err(|e| Error::Schema {
                    field: "config".into(),
                    message: format!("{} is not valid JSON: {e}", path.display()),
                })?;
                match value {
                    Value::Object(map) => map,
                    _ => {
                        return Err(Error::Schema {
                            field: "config".into(),
                            message: "config root must be a JSON object".into(),
                        })
                    }
                }
            }
        };
        Ok(Params { map })
    }

    /// Dimensioned quantity: the flag string wins, then the config key.
    pub fn quantity(
        &self,
        key: &str,
        flag: Option<&str>,
        dimension: Dimension,
    ) -> Result<Option<f64>> {
        if let Some(text) = flag {
            return parse_human(key, text, dimension).map(Some);
        }
        match self.map.get(key) {
            Some(v) => parse_quantity(key, v, dimension).map(Some),
            None => Ok(None),
        }
    }

    pub fn require_quantity(
        &self,
        key: &str,
        flag: Option<&str>,
        dimension: Dimension,
    ) -> Result<f64> {
        self.quantity(key, flag, dimension)?
            .ok_or_else(|| missing(key))
    }

    /// Bare number (dB values, quanta, counts); no unit conversion.
    pub fn number(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            Some(Value::Number(n)) => Ok(Some(n.as_f64().ok_or_else(|| Error::Schema {
                field: key.to_string(),
                message: "number does not fit in an f64".into(),
            })?)),
            Some(_) => Err(Error::Schema {
                field: key.to_string(),
                message: "expected a plain JSON number".into(),
            }),
            None => Ok(None),
        }
    }

    pub fn require_number(&self, key: &str, flag: Option<f64>) -> Result<f64> {
        self.number(key, flag)?.ok_or_else(|| missing(key))
    }

    pub fn number_or(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        Ok(self.number(key, flag)?.unwrap_or(default))
    }

    /// Non-negative integer (seeds, point counts).
    pub fn integer(&self, key: &str, flag: Option<u64>) -> Result<Option<u64>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            Some(Value::Number(n)) => Ok(Some(n.as_u64().ok_or_else(|| Error::Schema {
                field: key.to_string(),
                message: "expected a non-negative integer".into(),
            })?)),
            Some(_) => Err(Error::Schema {
                field: key.to_string(),
                message: "expected a non-negative integer".into(),
            }),
            None => Ok(None),
        }
    }

    pub fn integer_or(&self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        Ok(self.integer(key, flag)?.unwrap_or(default))
    }

    /// Plain string (paths, mode switches).
    pub fn string(&self, key: &str, flag: Option<&str>) -> Result<Option<String>> {
        if let Some(s) = flag {
            return Ok(Some(s.to_string()));
        }
        match self.map.get(key) {
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(Error::Schema {
                field: key.to_string(),
                message: "expected a JSON string".into(),
            }),
            None => Ok(None),
        }
    }

    /// Quantity with a default used when neither flag nor config supply it.
    pub fn quantity_or(
        &self,
        key: &str,
        flag: Option<&str>,
        dimension: Dimension,
        default: f64,
    ) -> Result<f64> {
        Ok(self.quantity(key, flag, dimension)?.unwrap_or(default))
    }
}
