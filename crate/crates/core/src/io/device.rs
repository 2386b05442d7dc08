//! Strict JSON reader for device descriptions.
//!
//! Layout (dimensioned fields take a bare number in the base unit or a
//! `{"value", "unit"}` object; frequencies/rates are cyclic in the file):
//!
//! ```json
//! {
//!   "film": {
//!     "sheet_inductance":         {"value": 179, "unit": "pH"},
//!     "thickness":                {"value": 4, "unit": "nm"},
//!     "dead_width_per_side":      {"value": 5, "unit": "nm"},
//!     "critical_current_density": {"value": 3.85e10, "unit": "A/m2"}
//!   },
//!   "geometry": {
//!     "width":  {"value": 23, "unit": "nm"},
//!     "length": {"value": 140, "unit": "nm"}
//!   },
//!   "circuit": {
//!     "shunt_capacitance":      {"value": 134.3, "unit": "fF"},
//!     "parasitic_inductance":   {"value": 1.47, "unit": "nH"},
//!     "external_coupling_rate": {"value": 57.0, "unit": "MHz"},
//!     "intrinsic_loss_rate":    {"value": 1.9, "unit": "MHz"}
//!   },
//!   "stated": {
//!     "resonant_frequency":       {"value": 7.45, "unit": "GHz"},
//!     "participation_ratio":      0.584,
//!     "impedance":                {"value": 88.7, "unit": "ohm"},
//!     "characteristic_current":   {"value": 2, "unit": "uA"},
//!     "reported_kerr_coefficient":{"value": 110, "unit": "kHz"}
//!   }
//! }
//! ```
//!
//! Unknown keys anywhere are schema errors, so typos fail loudly instead of
//! silently falling back to defaults.

use std::path::Path;

use serde_json::Value;

use crate::circuit::{
    DeviceSpec, FilmProperties, LumpedCircuit, NanobridgeGeometry, StatedParameters,
};
use crate::error::{Error, Result};
use crate::io::units::{json_type_name, parse_quantity, Dimension};

fn object<'v>(field: &str, v: &'v Value) -> Result<&'v serde_json::Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Schema {
        field: field.to_string(),
        message: format!("expected an object, found {}", json_type_name(v)),
    })
}

fn check_keys(
    field: &str,
    map: &serde_json::Map<String, Value>,
    allowed: &[&str],
) -> Result<()> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Schema {
                field: if field.is_empty() {
                    key.clone()
                } else {
                    format!("{field}.{key}")
                },
                message: format!("unknown key (expected one of: {})", allowed.join(", ")),
            });
        }
    }
    Ok(())
}

fn required<'v>(
    field: &str,
    map: &'v serde_json::Map<String, Value>,
    key: &str,
) -> Result<&'v Value> {
    map.get(key).ok_or_else(|| Error::Schema {
        field: format!("{field}.{key}"),
        message: "missing required field".into(),
    })
}

fn quantity(
    parent: &str,
    map: &serde_json::Map<String, Value>,
    key: &str,
    dimension: Dimension,
) -> Result<f64> {
    let path = format!("{parent}.{key}");
    parse_quantity(&path, required(parent, map, key)?, dimension)
}

fn optional_quantity(
    parent: &str,
    map: &serde_json::Map<String, Value>,
    key: &str,
    dimension: Dimension,
) -> Result<Option<f64>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let path = format!("{parent}.{key}");
            parse_quantity(&path, v, dimension).map(Some)
        }
    }
}

/// Parse a device description from a JSON value.
pub fn device_spec_from_value(root: &Value) -> Result<DeviceSpec> {
    let top = object("", root)?;
    check_keys("", top, &["film", "geometry", "circuit", "stated"])?;

    let film_map = object("film", required("", top, "film")?)?;
    check_keys(
        "film",
        film_map,
        &[
            "sheet_inductance",
            "thickness",
            "dead_width_per_side",
            "critical_current_density",
        ],
    )?;
    let film = FilmProperties {
        sheet_inductance: quantity("film", film_map, "sheet_inductance", Dimension::Inductance)?,
        thickness: quantity("film", film_map, "thickness", Dimension::Length)?,
        dead_width_per_side: quantity(
            "film",
            film_map,
            "dead_width_per_side",
            Dimension::Length,
        )?,
        critical_current_density: quantity(
            "film",
            film_map,
            "critical_current_density",
            Dimension::CurrentDensity,
        )?,
    };

    let geo_map = object("geometry", required("", top, "geometry")?)?;
    check_keys("geometry", geo_map, &["width", "length"])?;
    let geometry = NanobridgeGeometry {
        width: quantity("geometry", geo_map, "width", Dimension::Length)?,
        length: quantity("geometry", geo_map, "length", Dimension::Length)?,
    };

    let circuit_map = object("circuit", required("", top, "circuit")?)?;
    check_keys(
        "circuit",
        circuit_map,
        &[
            "shunt_capacitance",
            "parasitic_inductance",
            "external_coupling_rate",
            "intrinsic_loss_rate",
        ],
    )?;
    let circuit = LumpedCircuit {
        shunt_capacitance: quantity(
            "circuit",
            circuit_map,
            "shunt_capacitance",
            Dimension::Capacitance,
        )?,
        parasitic_inductance: quantity(
            "circuit",
            circuit_map,
            "parasitic_inductance",
            Dimension::Inductance,
        )?,
        external_coupling_rate: quantity(
            "circuit",
            circuit_map,
            "external_coupling_rate",
            Dimension::Frequency,
        )?,
        intrinsic_loss_rate: quantity(
            "circuit",
            circuit_map,
            "intrinsic_loss_rate",
            Dimension::Frequency,
        )?,
    };

    let stated = match top.get("stated") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let map = object("stated", v)?;
            check_keys(
                "stated",
                map,
                &[
                    "resonant_frequency",
                    "participation_ratio",
                    "impedance",
                    "characteristic_current",
                    "reported_kerr_coefficient",
                ],
            )?;
            Some(StatedParameters {
                resonant_frequency: optional_quantity(
                    "stated",
                    map,
                    "resonant_frequency",
                    Dimension::Frequency,
                )?,
                participation_ratio: optional_quantity(
                    "stated",
                    map,
                    "participation_ratio",
                    Dimension::Dimensionless,
                )?,
                impedance: optional_quantity("stated", map, "impedance", Dimension::Resistance)?,
                characteristic_current: optional_quantity(
                    "stated",
                    map,
                    "characteristic_current",
                    Dimension::Current,
                )?,
                reported_kerr_coefficient: optional_quantity(
                    "stated",
                    map,
                    "reported_kerr_coefficient",
                    Dimension::Frequency,
                )?,
            })
        }
    };

    let spec = DeviceSpec {
        film,
        geometry,
        circuit,
        stated,
    };
    spec.validate()?;
    Ok(spec)
}

/// Read and validate a device description file.
pub fn read_device_spec(path: &Path) -> Result<DeviceSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        format: "device JSON",
        line: e.line(),
        message: e.to_string(),
    })?;
    device_spec_from_value(&value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::TWO_PI;
    use serde_json::json;

    fn reference_json() -> Value {
        json!({
            "film": {
                "sheet_inductance": {"value": 179.0, "unit": "pH"},
                "thickness": {"value": 4.0, "unit": "nm"},
                "dead_width_per_side": {"value": 5.0, "unit": "nm"},
                "critical_current_density": {"value": 3.846_153_846_153_847e10, "unit": "A/m2"}
            },
            "geometry": {
                "width": {"value": 23.0, "unit": "nm"},
                "length": {"value": 140.0, "unit": "nm"}
            },
            "circuit": {
                "shunt_capacitance": {"value": 134.32092405, "unit": "fF"},
                "parasitic_inductance": {"value": 1.47, "unit": "nH"},
                "external_coupling_rate": {"value": 57.0375, "unit": "MHz"},
                "intrinsic_loss_rate": {"value": 1.8625, "unit": "MHz"}
            },
            "stated": {
                "resonant_frequency": {"value": 7.45, "unit": "GHz"},
                "participation_ratio": 0.584,
                "impedance": {"value": 88.7, "unit": "ohm"},
                "characteristic_current": {"value": 2.0, "unit": "uA"},
                "reported_kerr_coefficient": {"value": 110.0, "unit": "kHz"}
            }
        })
    }

    #[test]
    fn parses_reference_device_with_units() {
        let spec = device_spec_from_value(&reference_json()).unwrap();
        assert!((spec.film.sheet_inductance - 179e-12).abs() < 1e-24);
        assert!((spec.geometry.width - 23e-9).abs() < 1e-20);
        assert!(
            (spec.circuit.external_coupling_rate - TWO_PI * 57.0375e6).abs() < 1e-3
        );
        let stated = spec.stated.unwrap();
        assert!((stated.reported_kerr_coefficient.unwrap() - TWO_PI * 110e3).abs() < 1e-6);
        assert!((stated.participation_ratio.unwrap() - 0.584).abs() < 1e-15);
        // Round-trips through the geometric derivation.
        let derived = crate::circuit::derive_circuit(&spec).unwrap();
        assert!((derived.resonant_frequency - TWO_PI * 7.45e9).abs() / (TWO_PI * 7.45e9) < 1e-9);
    }

    #[test]
    fn stated_block_is_optional() {
        let mut v = reference_json();
        v.as_object_mut().unwrap().remove("stated");
        let spec = device_spec_from_value(&v).unwrap();
        assert!(spec.stated.is_none());
    }

    #[test]
    fn unknown_key_is_a_schema_error_with_path() {
        let mut v = reference_json();
        v["circuit"]["coupling"] = json!(1.0);
        match device_spec_from_value(&v).unwrap_err() {
            Error::Schema { field, .. } => assert_eq!(field, "circuit.coupling"),
            other => panic!("expected Schema error, got {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_a_schema_error_with_path() {
        let mut v = reference_json();
        v["film"].as_object_mut().unwrap().remove("thickness");
        match device_spec_from_value(&v).unwrap_err() {
            Error::Schema { field, .. } => assert_eq!(field, "film.thickness"),
            other => panic!("expected Schema error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_unit_is_a_unit_error_with_path() {
        let mut v = reference_json();
        v["geometry"]["width"] = json!({"value": 23.0, "unit": "GHz"});
        match device_spec_from_value(&v).unwrap_err() {
            Error::Unit { field, .. } => assert_eq!(field, "geometry.width"),
            other => panic!("expected Unit error, got {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("device.json");
        std::fs::write(&path, reference_json().to_string()).unwrap();
        let spec = read_device_spec(&path).unwrap();
        assert!((spec.film.thickness - 4e-9).abs() < 1e-20);

        let missing = read_device_spec(&dir.path().join("nope.json")).unwrap_err();
        assert!(matches!(missing, Error::Io { .. }));

        std::fs::write(&path, "{not json").unwrap();
        let bad = read_device_spec(&path).unwrap_err();
        assert!(matches!(bad, Error::Parse { .. }));
    }
}
