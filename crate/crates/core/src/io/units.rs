//! Dimension-checked unit parsing for JSON fields and CLI flags.
//!
//! Each [`Dimension`] owns a table of accepted unit symbols and their scale
//! to the dimension's base unit. Frequencies are special-cased: files and
//! flags carry cyclic frequencies (Hz family) while the crate works in
//! angular units, so frequency parsing multiplies by 2π. Powers accept dBm
//! alongside watt multiples.

use serde_json::Value;

use crate::consts::{dbm_to_watts, TWO_PI};
use crate::error::{Error, Result};

/// Physical dimension of a parsed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// File-facing Hz family; parsed into rad/s.
    Frequency,
    Inductance,
    Capacitance,
    Length,
    Current,
    CurrentDensity,
    /// Watt family plus dBm.
    Power,
    Temperature,
    /// Radians (or degrees).
    Phase,
    MagneticField,
    Resistance,
    Dimensionless,
}

impl Dimension {
    /// Accepted unit symbols and multiplicative factors to the base unit.
    /// dBm is handled separately in [`convert`].
    fn table(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Frequency => &[
                ("Hz", 1.0),
                ("kHz", 1e3),
                ("MHz", 1e6),
                ("GHz", 1e9),
            ],
            Dimension::Inductance => &[
                ("H", 1.0),
                ("uH", 1e-6),
                ("nH", 1e-9),
                ("pH", 1e-12),
            ],
            Dimension::Capacitance => &[
                ("F", 1.0),
                ("nF", 1e-9),
                ("pF", 1e-12),
                ("fF", 1e-15),
            ],
            Dimension::Length => &[
                ("m", 1.0),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("nm", 1e-9),
            ],
            Dimension::Current => &[
                ("A", 1.0),
                ("mA", 1e-3),
                ("uA", 1e-6),
                ("nA", 1e-9),
            ],
            Dimension::CurrentDensity => &[("A/m2", 1.0), ("A/m^2", 1.0)],
            Dimension::Power => &[
                ("W", 1.0),
                ("mW", 1e-3),
                ("uW", 1e-6),
                ("nW", 1e-9),
                ("pW", 1e-12),
                ("fW", 1e-15),
                ("aW", 1e-18),
            ],
            Dimension::Temperature => &[("K", 1.0), ("mK", 1e-3)],
            Dimension::Phase => &[
                ("rad", 1.0),
                ("deg", std::f64::consts::PI / 180.0),
            ],
            Dimension::MagneticField => &[("T", 1.0), ("mT", 1e-3), ("uT", 1e-6)],
            Dimension::Resistance => &[("ohm", 1.0), ("Ohm", 1.0), ("kohm", 1e3)],
            Dimension::Dimensionless => &[("", 1.0), ("1", 1.0)],
        }
    }

    /// The symbol assumed for bare numbers.
    pub fn base_unit(self) -> &'static str {
        match self {
            Dimension::Frequency => "Hz",
            Dimension::Inductance => "H",
            Dimension::Capacitance => "F",
            Dimension::Length => "m",
            Dimension::Current => "A",
            Dimension::CurrentDensity => "A/m2",
            Dimension::Power => "W",
            Dimension::Temperature => "K",
            Dimension::Phase => "rad",
            Dimension::MagneticField => "T",
            Dimension::Resistance => "ohm",
            Dimension::Dimensionless => "",
        }
    }

    fn allowed(self) -> String {
        let mut names: Vec<&str> = self.table().iter().map(|(n, _)| *n).collect();
        if self == Dimension::Power {
            names.push("dBm");
        }
        names.retain(|n| !n.is_empty());
        names.join(", ")
    }

    /// Convert `value` in `unit` to internal units (frequency → rad/s).
    pub fn convert(self, field: &str, value: f64, unit: &str) -> Result<f64> {
        if self == Dimension::Power && unit == "dBm" {
            return Ok(dbm_to_watts(value));
        }
        let factor = self
            .table()
            .iter()
            .find(|(name, _)| *name == unit)
            .map(|(_, f)| *f)
            .ok_or_else(|| Error::Unit {
                field: field.to_string(),
                message: format!(
                    "unknown unit `{unit}`; accepted: {}",
                    self.allowed()
                ),
            })?;
        let si = value * factor;
        Ok(if self == Dimension::Frequency {
            TWO_PI * si
        } else {
            si
        })
    }
}

/// Parse a JSON field that is a bare number (base unit), a quantity string
/// ("7.45 GHz"), or a `{"value": x, "unit": "..."}` object, returning
/// internal SI units.
pub fn parse_quantity(field: &str, value: &Value, dimension: Dimension) -> Result<f64> {
    match value {
        Value::String(text) => parse_human(field, text, dimension),
        Value::Number(n) => {
            let v = n.as_f64().ok_or_else(|| Error::Schema {
                field: field.to_string(),
                message: "number does not fit in an f64".into(),
            })?;
            dimension.convert(field, v, dimension.base_unit())
        }
        Value::Object(map) => {
            for key in map.keys() {
                if key != "value" && key != "unit" {
                    return Err(Error::Schema {
                        field: field.to_string(),
                        message: format!(
                            "unexpected key `{key}` in quantity object (only `value` and `unit`)"
                        ),
                    });
                }
            }
            let v = map
                .get("value")
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Schema {
                    field: field.to_string(),
                    message: "quantity object needs a numeric `value`".into(),
                })?;
            let unit = map
                .get("unit")
                .map(|u| {
                    u.as_str().ok_or_else(|| Error::Schema {
                        field: field.to_string(),
                        message: "`unit` must be a string".into(),
                    })
                })
                .transpose()?
                .unwrap_or_else(|| dimension.base_unit());
            dimension.convert(field, v, unit)
        }
        other => Err(Error::Schema {
            field: field.to_string(),
            message: format!(
                "expected a number or a {{value, unit}} object, found {}",
                json_type_name(other)
            ),
        }),
    }
}

pub(crate) fn json_type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Parse a human-entered quantity like `7.45GHz`, `-87 dBm`, `23nm` or a
/// bare number (base unit). Whitespace between number and unit is optional.
pub fn parse_human(field: &str, text: &str, dimension: Dimension) -> Result<f64> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Unit {
            field: field.to_string(),
            message: "empty value".into(),
        });
    }
    // Longest numeric prefix: sign, digits, decimal point, exponent.
    let mut split = s.len();
    for (i, ch) in s.char_indices() {
        let numeric = ch.is_ascii_digit()
            || ch == '.'
            || ch == '+'
            || ch == '-'
            || ch == 'e'
            || ch == 'E';
        // `e`/`E` only counts as numeric when followed by a digit or sign
        // (so the `m` of `1e-3m` ends the number but `5MHz` splits at `M`).
        if !numeric {
            split = i;
            break;
        }
        if (ch == 'e' || ch == 'E')
            && !s[i + ch.len_utf8()..]
                .chars()
                .next()
                .map(|c| c.is_ascii_digit() || c == '+' || c == '-')
                .unwrap_or(false)
        {
            split = i;
            break;
        }
    }
    let (num, unit) = s.split_at(split);
    let value: f64 = num.trim().parse().map_err(|_| Error::Unit {
        field: field.to_string(),
        message: format!("cannot parse `{num}` as a number"),
    })?;
    let unit = unit.trim();
    if unit.is_empty() {
        dimension.convert(field, value, dimension.base_unit())
    } else {
        dimension.convert(field, value, unit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn frequency_parsing_is_cyclic_to_angular() {
        let w = parse_quantity("f", &json!({"value": 7.45, "unit": "GHz"}), Dimension::Frequency)
            .unwrap();
        assert!((w - TWO_PI * 7.45e9).abs() < 1.0);
        // Bare numbers are Hz.
        let w = parse_quantity("f", &json!(1000.0), Dimension::Frequency).unwrap();
        assert!((w - TWO_PI * 1e3).abs() < 1e-9);
    }

    #[test]
    fn power_accepts_dbm_and_watt_multiples() {
        let p = parse_human("p", "-87dBm", Dimension::Power).unwrap();
        assert!((p - 10f64.powf(-8.7) * 1e-3).abs() / p < 1e-12);
        let p = parse_human("p", "2.5 pW", Dimension::Power).unwrap();
        assert!((p - 2.5e-12).abs() < 1e-24);
    }

    #[test]
    fn human_parsing_handles_exponents_and_signs() {
        let l = parse_human("w", "23nm", Dimension::Length).unwrap();
        assert!((l - 23e-9).abs() < 1e-20);
        let l = parse_human("w", "1e-3m", Dimension::Length).unwrap();
        assert!((l - 1e-3).abs() < 1e-15);
        let f = parse_human("df", "-133.5 MHz", Dimension::Frequency).unwrap();
        assert!((f + TWO_PI * 133.5e6).abs() < 1e-3);
        let j = parse_human("j", "3.85e10 A/m2", Dimension::CurrentDensity).unwrap();
        assert!((j - 3.85e10).abs() < 1.0);
    }

    #[test]
    fn unknown_units_name_the_field_and_choices() {
        let err = parse_quantity(
            "circuit.shunt_capacitance",
            &json!({"value": 1.0, "unit": "furlong"}),
            Dimension::Capacitance,
        )
        .unwrap_err();
        match err {
            Error::Unit { field, message } => {
                assert_eq!(field, "circuit.shunt_capacitance");
                assert!(message.contains("furlong"));
                assert!(message.contains("pF"));
            }
            other => panic!("expected Unit error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_quantity_objects_are_schema_errors() {
        assert!(matches!(
            parse_quantity("x", &json!({"value": 1.0, "units": "m"}), Dimension::Length),
            Err(Error::Schema { .. })
        ));
        assert!(matches!(
            parse_quantity("x", &json!({"unit": "m"}), Dimension::Length),
            Err(Error::Schema { .. })
        ));
        assert!(matches!(
            parse_quantity("x", &json!(true), Dimension::Length),
            Err(Error::Schema { .. })
        ));
        // Strings go through the human parser and fail on bad units there.
        assert!(parse_quantity("x", &json!("fast"), Dimension::Length).is_err());
        let v = parse_quantity("x", &json!("13 nm"), Dimension::Length).unwrap();
        assert!((v - 13e-9).abs() < 1e-24);
    }

    #[test]
    fn phase_degrees_convert() {
        let p = parse_human("phi", "90deg", Dimension::Phase).unwrap();
        assert!((p - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
