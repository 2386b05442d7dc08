//! Canonical JSON records for calibration and simulation outputs.
//!
//! Every persisted record is wrapped in an envelope carrying a schema
//! version, the producing tool, a record kind, and SHA-256 digests of the
//! input files it was derived from. Envelopes are rendered as *canonical*
//! JSON — object keys sorted, floats printed with fixed precision — so that
//! re-running a pipeline on identical inputs produces byte-identical files.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Render a JSON value deterministically: object keys sorted, no whitespace,
/// integers plain, floats as `{:.16e}` (17 significant digits, enough to
/// reproduce any f64 exactly on parse).
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().expect("JSON numbers are i64, u64, or f64");
                out.push_str(&format!("{f:.16e}"));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"))
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("strings always serialize"));
                out.push(':');
                write_canonical(&map[key.as_str()], out);
            }
            out.push('}');
        }
    }
}

/// SHA-256 of a byte slice, lowercase hex.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_string(&hasher.finalize())
}

/// SHA-256 of a file's contents (streamed), lowercase hex.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex_string(&hasher.finalize()))
}

fn hex_string(digest: &[u8]) -> String {
    let mut s = String::with_capacity(2 * digest.len());
    for byte in digest {
        s.push_str(&format!("{byte:02x}"));
    }
    s
}

/// Digest of one input file a record was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Producing tool, embedded in every record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

/// The persisted wrapper around any record payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEnvelope {
    pub schema_version: u32,
    pub tool: ToolInfo,
    /// Record kind, e.g. `"derived-circuit"`, `"reflection-fit"`.
    pub kind: String,
    /// Digests of the files this record was computed from.
    pub inputs: Vec<InputDigest>,
    pub record: Value,
}

pub const SCHEMA_VERSION: u32 = 1;

impl RecordEnvelope {
    pub fn new(tool: ToolInfo, kind: impl Into<String>, record: Value) -> Self {
        RecordEnvelope {
            schema_version: SCHEMA_VERSION,
            tool,
            kind: kind.into(),
            inputs: Vec::new(),
            record,
        }
    }

    /// Attach digests for the given input files (paths stored as given).
    pub fn with_inputs<P: AsRef<Path>>(mut self, paths: &[P]) -> Result<Self> {
        for p in paths {
            let path = p.as_ref();
            self.inputs.push(InputDigest {
                path: path.to_string_lossy().into_owned(),
                sha256: sha256_file(path)?,
            });
        }
        Ok(self)
    }
}

/// Write an envelope as canonical JSON with a trailing newline.
pub fn write_record(path: &Path, envelope: &RecordEnvelope) -> Result<()> {
    let value = serde_json::to_value(envelope).map_err(|e| {
        Error::Record(format!("record serialization failed: {e}"))
    })?;
    std::fs::write(path, canonical_json(&value) + "\n").map_err(|e| Error::io(path, e))
}

/// Read an envelope back (any JSON layout accepted, not just canonical).
pub fn read_record(path: &Path) -> Result<RecordEnvelope> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let envelope: RecordEnvelope = serde_json::from_str(&text).map_err(|e| Error::Parse {
        format: "record JSON",
        line: e.line(),
        message: e.to_string(),
    })?;
    if envelope.schema_version != SCHEMA_VERSION {
        return Err(Error::Record(format!(
            "unsupported schema_version {} (tool supports {})",
            envelope.schema_version, SCHEMA_VERSION
        )));
    }
    Ok(envelope)
}

/// Recompute every input digest (paths resolved as stored, i.e. relative to
/// the current directory when relative) and fail on any mismatch.
pub fn verify_input_checksums(envelope: &RecordEnvelope) -> Result<()> {
    for input in &envelope.inputs {
        let actual = sha256_file(Path::new(&input.path))?;
        if actual != input.sha256 {
            return Err(Error::Record(format!(
                "input `{}` changed since the record was written (expected sha256 {}, found {})",
                input.path, input.sha256, actual
            )));
        }
    }
    Ok(())
}
