//! Minimal one-port Touchstone (.s1p, version 1) reader and writer.
//!
//! Supported subset:
//! * `!` comments (full-line or trailing);
//! * one option line `# <freq-unit> S <format> R <resistance>` with
//!   case-insensitive tokens, defaulting to `# GHZ S MA R 50` when absent
//!   (tokens may be omitted from the right, as the standard allows);
//! * data lines `f  a  b` for S11 in the declared format (MA: magnitude and
//!   angle in degrees; DB: dB magnitude and angle in degrees; RI: real and
//!   imaginary part);
//! * frequencies strictly increasing.
//!
//! Anything else — network parameters other than S, multi-port data widths,
//! non-monotone frequency columns — is rejected with the offending line
//! number. File frequencies are cyclic and are converted to rad/s on read.

use std::path::Path;

use num_complex::Complex;

use crate::calibration::ReflectionTrace;
use crate::consts::TWO_PI;
use crate::error::{Error, Result};

type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SFormat {
    MagnitudeAngle,
    DbAngle,
    RealImaginary,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        format: "Touchstone",
        line,
        message: message.into(),
    }
}

/// Parse one-port Touchstone text into a reflection trace (rad/s).
pub fn parse_one_port(text: &str) -> Result<ReflectionTrace> {
    let mut freq_scale = 1e9; // GHz default
    let mut format = SFormat::MagnitudeAngle;
    let mut saw_options = false;
    let mut frequencies: Vec<f64> = Vec::new();
    let mut values: Vec<C64> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('!') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if saw_options {
                return Err(parse_error(line_no, "multiple option lines"));
            }
            if !frequencies.is_empty() {
                return Err(parse_error(line_no, "option line after data"));
            }
            saw_options = true;
            let tokens: Vec<String> = rest
                .split_whitespace()
                .map(|t| t.to_ascii_uppercase())
                .collect();
            let mut i = 0;
            if i < tokens.len() {
                freq_scale = match tokens[i].as_str() {
                    "HZ" => 1.0,
                    "KHZ" => 1e3,
                    "MHZ" => 1e6,
                    "GHZ" => 1e9,
                    other => {
                        return Err(parse_error(
                            line_no,
                            format!("unknown frequency unit `{other}`"),
                        ))
                    }
                };
                i += 1;
            }
            if i < tokens.len() {
                if tokens[i] != "S" {
                    return Err(parse_error(
                        line_no,
                        format!("only S-parameters are supported, found `{}`", tokens[i]),
                    ));
                }
                i += 1;
            }
            if i < tokens.len() {
                format = match tokens[i].as_str() {
                    "MA" => SFormat::MagnitudeAngle,
                    "DB" => SFormat::DbAngle,
                    "RI" => SFormat::RealImaginary,
                    other => {
                        return Err(parse_error(line_no, format!("unknown format `{other}`")))
                    }
                };
                i += 1;
            }
            if i < tokens.len() {
                if tokens[i] != "R" {
                    return Err(parse_error(
                        line_no,
                        format!("expected `R <resistance>`, found `{}`", tokens[i]),
                    ));
                }
                i += 1;
                if i < tokens.len() {
                    tokens[i].parse::<f64>().map_err(|_| {
                        parse_error(line_no, format!("bad reference resistance `{}`", tokens[i]))
                    })?;
                    i += 1;
                } else {
                    return Err(parse_error(line_no, "`R` without a resistance value"));
                }
            }
            if i != tokens.len() {
                return Err(parse_error(line_no, "trailing tokens on option line"));
            }
            continue;
        }

        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(parse_error(
                line_no,
                format!(
                    "expected 3 columns (frequency and one S11 pair), found {}; only one-port data is supported",
                    cols.len()
                ),
            ));
        }
        let mut nums = [0.0f64; 3];
        for (k, c) in cols.iter().enumerate() {
            nums[k] = c
                .parse()
                .map_err(|_| parse_error(line_no, format!("cannot parse `{c}` as a number")))?;
            if !nums[k].is_finite() {
                return Err(parse_error(line_no, format!("non-finite value `{c}`")));
            }
        }
        let freq = TWO_PI * nums[0] * freq_scale;
        if let Some(&last) = frequencies.last() {
            if freq <= last {
                return Err(parse_error(
                    line_no,
                    "frequencies must be strictly increasing",
                ));
            }
        }
        let value = match format {
            SFormat::MagnitudeAngle => C64::from_polar(nums[1], nums[2].to_radians()),
            SFormat::DbAngle => {
                C64::from_polar(10f64.powf(nums[1] / 20.0), nums[2].to_radians())
            }
            SFormat::RealImaginary => C64::new(nums[1], nums[2]),
        };
        frequencies.push(freq);
        values.push(value);
    }
    if frequencies.is_empty() {
        return Err(parse_error(0, "no data lines"));
    }
    Ok(ReflectionTrace {
        frequencies,
        values,
        uncertainty: None,
    })
}

/// Read a one-port Touchstone file.
pub fn read_one_port(path: &Path) -> Result<ReflectionTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_one_port(&text)
}

/// Render a reflection trace as one-port Touchstone text
/// (`# HZ S RI R 50`, 18 significant digits, deterministic).
pub fn render_one_port(trace: &ReflectionTrace) -> String {
    let mut out = String::new();
    out.push_str("! one-port reflection trace\n");
    out.push_str("! columns: frequency_Hz  Re(S11)  Im(S11)\n");
    out.push_str("# HZ S RI R 50\n");
    for (f, v) in trace.frequencies.iter().zip(&trace.values) {
        out.push_str(&format!(
            "{:.17e} {:.17e} {:.17e}\n",
            f / TWO_PI,
            v.re,
            v.im
        ));
    }
    out
}

/// Write a one-port Touchstone file.
pub fn write_one_port(path: &Path, trace: &ReflectionTrace) -> Result<()> {
    std::fs::write(path, render_one_port(trace)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_default_options_as_ghz_ma() {
        let text = "! a comment\n0.5 0.9 0.0\n1.0 0.5 -90.0\n";
        let trace = parse_one_port(text).unwrap();
        assert_eq!(trace.frequencies.len(), 2);
        assert!((trace.frequencies[0] - TWO_PI * 0.5e9).abs() < 1e-3);
        assert!((trace.values[0] - C64::new(0.9, 0.0)).norm() < 1e-12);
        assert!((trace.values[1] - C64::new(0.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn parses_explicit_formats() {
        let ri = "# MHz S RI R 50\n10 0.1 -0.2\n20 0.3 0.4\n";
        let trace = parse_one_port(ri).unwrap();
        assert!((trace.frequencies[1] - TWO_PI * 20e6).abs() < 1e-6);
        assert!((trace.values[0] - C64::new(0.1, -0.2)).norm() < 1e-15);

        let db = "# HZ S DB\n100 -6.0205999132796239 0\n200 0 180\n";
        let trace = parse_one_port(db).unwrap();
        assert!((trace.values[0].norm() - 0.5).abs() < 1e-13);
        assert!((trace.values[1] - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trailing_comments_and_blank_lines_are_ignored()
    {
        let text = "# HZ S RI R 50\n\n1 0.5 0.5 ! near the dip\n\n2 0.6 0.4\n";
        let trace = parse_one_port(text).unwrap();
        assert_eq!(trace.frequencies.len(), 2);
    }

    #[test]
    fn rejects_non_monotone_and_multiport_and_bad_tokens() {
        let err = parse_one_port("# HZ S RI R 50\n2 0 0\n1 0 0\n").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("increasing"));
            }
            other => panic!("{other:?}"),
        }
        let err = parse_one_port("# HZ S RI R 50\n1 0 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_one_port("# HZ Y RI R 50\n1 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_one_port("# HZ S RI R 50\n1 zero 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_one_port("! nothing\n").is_err());
    }

    #[test]
    fn writer_reader_round_trip_is_exact() {
        let trace = ReflectionTrace {
            frequencies: vec![TWO_PI * 7.4e9, TWO_PI * 7.45e9, TWO_PI * 7.5e9],
            values: vec![
                C64::new(0.987_654_321_012_345_6, -0.00123456789012345),
                C64::new(-0.937, 0.001),
                C64::new(0.5, 0.5),
            ],
            uncertainty: None,
        };
        let text = render_one_port(&trace);
        let back = parse_one_port(&text).unwrap();
        for (a, b) in trace.frequencies.iter().zip(&back.frequencies) {
            assert!((a - b).abs() / a < 1e-16);
        }
        for (a, b) in trace.values.iter().zip(&back.values) {
            assert_eq!(a, b, "complex values must round-trip bit-exactly");
        }
        // Deterministic output: rendering twice gives identical bytes.
        assert_eq!(text, render_one_port(&trace));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.s1p");
        let trace = ReflectionTrace {
            frequencies: vec![TWO_PI * 1e9, TWO_PI * 2e9],
            values: vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            uncertainty: None,
        };
        write_one_port(&path, &trace).unwrap();
        let back = read_one_port(&path).unwrap();
        assert_eq!(back.values, trace.values);
    }
}
