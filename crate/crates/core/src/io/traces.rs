//! CSV trace formats and the noise-sweep metadata sidecar.
//!
//! All CSV columns carry fixed units, spelled out in the header:
//!
//! * reflection traces: `freq_Hz,re,im`
//! * noise sweeps: `T_K,psd_quanta` (optional third column `sigma`)
//! * field sweeps: `field_T,psd_quanta`
//! * gain spectra (write-only): `frequency_Hz,real,imag,gain_dB`
//! * phase sweeps (write-only): `phase_rad,real,imag,gain_dB`
//!
//! A noise-sweep CSV is accompanied by a JSON sidecar describing the
//! detection setup. Its frequency fields take bare Hz numbers or
//! `{"value", "unit"}` objects:
//!
//! ```json
//! {
//!   "detection_bandwidth": {"value": 1.0, "unit": "MHz"},
//!   "signal_frequency":    {"value": 7.3165, "unit": "GHz"},
//!   "pump1_frequency":     {"value": 7.374, "unit": "GHz"},
//!   "pump2_frequency":     {"value": 7.641, "unit": "GHz"}
//! }
//! ```
//!
//! The idler frequency may be given directly instead of the pump pair; when
//! both are present they must agree through ω_i = ω_p1 + ω_p2 − ω_s.

use std::path::Path;

use num_complex::Complex;
use serde_json::Value;

use crate::calibration::{FieldPoint, NoiseTrace, ReflectionTrace};
use crate::consts::TWO_PI;
use crate::dynamics::{GainSpectrum, PhaseSweep};
use crate::error::{Error, Result};
use crate::io::units::{parse_quantity, Dimension};

type C64 = Complex<f64>;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        format: "CSV",
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!("is_io_error() guarantees an Io kind"),
        }
    } else {
        let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
        parse_error(line, err.to_string())
    }
}

/// Parse a CSV with an exact expected header; returns rows of f64 columns.
/// `optional_last` permits one trailing optional column (e.g. `sigma`),
/// which must then be present on every row or on none.
fn read_numeric_csv(
    path: &Path,
    required_header: &[&str],
    optional_last: Option<&str>,
) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let cols: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let with_optional: Vec<&str> = required_header
        .iter()
        .copied()
        .chain(optional_last)
        .collect();
    let n_cols = if cols == required_header {
        required_header.len()
    } else if optional_last.is_some() && cols == with_optional {
        with_optional.len()
    } else {
        return Err(parse_error(
            1,
            format!(
                "unexpected header `{}`; expected `{}`{}",
                cols.join(","),
                required_header.join(","),
                optional_last
                    .map(|o| format!(" (optionally with `,{o}`)"))
                    .unwrap_or_default()
            ),
        ));
    };
    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| csv_error(path, e))?;
        let line_no = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != n_cols {
            return Err(parse_error(
                line_no,
                format!("expected {n_cols} columns, found {}", record.len()),
            ));
        }
        let mut row = Vec::with_capacity(n_cols);
        for f in record.iter() {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_error(line_no, format!("cannot parse `{f}` as a number")))?;
            if !v.is_finite() {
                return Err(parse_error(line_no, format!("non-finite value `{f}`")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(1, "no data rows"));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Reflection traces
// ---------------------------------------------------------------------------

/// Read `freq_Hz,re,im` into a reflection trace (frequencies → rad/s).
pub fn read_reflection_csv(path: &Path) -> Result<ReflectionTrace> {
    let rows = read_numeric_csv(path, &["freq_Hz", "re", "im"], None)?;
    let mut frequencies = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for row in rows {
        frequencies.push(TWO_PI * row[0]);
        values.push(C64::new(row[1], row[2]));
    }
    Ok(ReflectionTrace {
        frequencies,
        values,
        uncertainty: None,
    })
}

/// Write a reflection trace as `freq_Hz,re,im` (deterministic formatting).
pub fn write_reflection_csv(path: &Path, trace: &ReflectionTrace) -> Result<()> {
    let mut out = String::from("freq_Hz,re,im\n");
    for (f, v) in trace.frequencies.iter().zip(&trace.values) {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e}\n",
            f / TWO_PI,
            v.re,
            v.im
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Noise sweeps (CSV + JSON sidecar)
// ---------------------------------------------------------------------------

/// Detection setup accompanying a noise sweep. Frequencies in rad/s except
/// the cyclic detection bandwidth, matching [`NoiseTrace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMeta {
    /// Detection bandwidth (Hz, cyclic).
    pub detection_bandwidth: f64,
    /// Signal-band center (rad/s).
    pub signal_frequency: f64,
    /// Idler/image-band center (rad/s).
    pub idler_frequency: f64,
}

/// Parse the sidecar JSON. The idler may be given directly or through the
/// pump pair; both together must agree to within 1 ppm.
pub fn noise_meta_from_value(root: &Value) -> Result<NoiseMeta> {
    let map = root.as_object().ok_or_else(|| Error::Schema {
        field: String::new(),
        message: "noise metadata must be a JSON object".into(),
    })?;
    const ALLOWED: &[&str] = &[
        "detection_bandwidth",
        "signal_frequency",
        "idler_frequency",
        "pump1_frequency",
        "pump2_frequency",
    ];
    for key in map.keys() {
        if !ALLOWED.contains(&key.as_str()) {
            return Err(Error::Schema {
                field: key.clone(),
                message: format!("unknown key (expected one of: {})", ALLOWED.join(", ")),
            });
        }
    }
    let freq = |key: &str| -> Result<Option<f64>> {
        map.get(key)
            .map(|v| parse_quantity(key, v, Dimension::Frequency))
            .transpose()
    };
    let bandwidth = freq("detection_bandwidth")?.ok_or_else(|| Error::Schema {
        field: "detection_bandwidth".into(),
        message: "missing required field".into(),
    })? / TWO_PI; // stored cyclic
    let signal = freq("signal_frequency")?.ok_or_else(|| Error::Schema {
        field: "signal_frequency".into(),
        message: "missing required field".into(),
    })?;
    let idler_direct = freq("idler_frequency")?;
    let pump1 = freq("pump1_frequency")?;
    let pump2 = freq("pump2_frequency")?;
    let idler_from_pumps = match (pump1, pump2) {
        (Some(p1), Some(p2)) => Some(p1 + p2 - signal),
        (None, None) => None,
        _ => {
            return Err(Error::Schema {
                field: "pump1_frequency".into(),
                message: "pump frequencies must be given as a pair".into(),
            })
        }
    };
    let idler = match (idler_direct, idler_from_pumps) {
        (Some(direct), Some(derived)) => {
            if (direct - derived).abs() > 1e-6 * direct.abs() {
                return Err(Error::Schema {
                    field: "idler_frequency".into(),
                    message: format!(
                        "inconsistent with the pump pair: stated {:.9e} Hz, pumps imply {:.9e} Hz",
                        direct / TWO_PI,
                        derived / TWO_PI
                    ),
                });
            }
            direct
        }
        (Some(direct), None) => direct,
        (None, Some(derived)) => derived,
        (None, None) => {
            return Err(Error::Schema {
                field: "idler_frequency".into(),
                message: "give either idler_frequency or the pump pair".into(),
            })
        }
    };
    if !(bandwidth > 0.0) || !(signal > 0.0) || !(idler > 0.0) {
        return Err(Error::Schema {
            field: "detection_bandwidth".into(),
            message: "bandwidth and frequencies must be positive".into(),
        });
    }
    Ok(NoiseMeta {
        detection_bandwidth: bandwidth,
        signal_frequency: signal,
        idler_frequency: idler,
    })
}

/// Read a noise sweep: `T_K,psd_quanta[,sigma]` CSV plus its JSON sidecar.
pub fn read_noise_trace(csv_path: &Path, meta_path: &Path) -> Result<NoiseTrace> {
    let text = std::fs::read_to_string(meta_path).map_err(|e| Error::io(meta_path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        format: "noise metadata JSON",
        line: e.line(),
        message: e.to_string(),
    })?;
    let meta = noise_meta_from_value(&value)?;
    let rows = read_numeric_csv(csv_path, &["T_K", "psd_quanta"], Some("sigma"))?;
    let with_sigma = rows[0].len() == 3;
    let trace = NoiseTrace {
        temperatures: rows.iter().map(|r| r[0]).collect(),
        psd_quanta: rows.iter().map(|r| r[1]).collect(),
        sigma: with_sigma.then(|| rows.iter().map(|r| r[2]).collect()),
        detection_bandwidth: meta.detection_bandwidth,
        signal_frequency: meta.signal_frequency,
        idler_frequency: meta.idler_frequency,
    };
    trace.validate()?;
    Ok(trace)
}

/// Write a noise sweep CSV and its JSON sidecar.
pub fn write_noise_trace(csv_path: &Path, meta_path: &Path, trace: &NoiseTrace) -> Result<()> {
    trace.validate()?;
    let mut out = String::from(match &trace.sigma {
        Some(_) => "T_K,psd_quanta,sigma\n",
        None => "T_K,psd_quanta\n",
    });
    for (i, (t, p)) in trace
        .temperatures
        .iter()
        .zip(&trace.psd_quanta)
        .enumerate()
    {
        match &trace.sigma {
            Some(s) => out.push_str(&format!("{t:.17e},{p:.17e},{:.17e}\n", s[i])),
            None => out.push_str(&format!("{t:.17e},{p:.17e}\n")),
        }
    }
    std::fs::write(csv_path, out).map_err(|e| Error::io(csv_path, e))?;

    let meta = serde_json::json!({
        "detection_bandwidth": trace.detection_bandwidth,
        "signal_frequency": trace.signal_frequency / TWO_PI,
        "idler_frequency": trace.idler_frequency / TWO_PI,
    });
    std::fs::write(
        meta_path,
        crate::io::records::canonical_json(&meta) + "\n",
    )
    .map_err(|e| Error::io(meta_path, e))
}

// ---------------------------------------------------------------------------
// Field sweeps
// ---------------------------------------------------------------------------

/// Read `field_T,psd_quanta` rows.
pub fn read_field_sweep_csv(path: &Path) -> Result<Vec<FieldPoint>> {
    let rows = read_numeric_csv(path, &["field_T", "psd_quanta"], None)?;
    Ok(rows
        .iter()
        .map(|r| FieldPoint {
            field: r[0],
            psd_quanta: r[1],
        })
        .collect())
}

/// Write `field_T,psd_quanta` rows.
pub fn write_field_sweep_csv(path: &Path, points: &[FieldPoint]) -> Result<()> {
    let mut out = String::from("field_T,psd_quanta\n");
    for p in points {
        out.push_str(&format!("{:.17e},{:.17e}\n", p.field, p.psd_quanta));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Simulation outputs (write-only)
// ---------------------------------------------------------------------------

/// Write a gain spectrum as `frequency_Hz,real,imag,gain_dB`.
pub fn write_gain_spectrum_csv(path: &Path, spectrum: &GainSpectrum) -> Result<()> {
    let mut out = String::from("frequency_Hz,real,imag,gain_dB\n");
    for i in 0..spectrum.frequencies.len() {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e}\n",
            spectrum.frequencies[i] / TWO_PI,
            spectrum.signal[i].re,
            spectrum.signal[i].im,
            spectrum.gain_db[i]
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Write a phase sweep as `phase_rad,real,imag,gain_dB`.
pub fn write_phase_sweep_csv(path: &Path, sweep: &PhaseSweep) -> Result<()> {
    let mut out = String::from("phase_rad,real,imag,gain_dB\n");
    for i in 0..sweep.phases.len() {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.17e}\n",
            sweep.phases[i],
            sweep.amplitude[i].re,
            sweep.amplitude[i].im,
            sweep.gain_db[i]
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn reflection_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let trace = ReflectionTrace {
            frequencies: vec![TWO_PI * 7.4e9, TWO_PI * 7.45e9],
            values: vec![C64::new(0.93, -0.01), C64::new(-0.9376543210987654, 0.0)],
            uncertainty: None,
        };
        write_reflection_csv(&path, &trace).unwrap();
        let back = read_reflection_csv(&path).unwrap();
        assert_eq!(back.values, trace.values);
        for (a, b) in trace.frequencies.iter().zip(&back.frequencies) {
            assert!((a - b).abs() / a < 1e-15);
        }
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "freq_Hz,re,im\n1,0,0\n2,zero,0\n").unwrap();
        match read_reflection_csv(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(&path, "frequency,re,im\n1,0,0\n").unwrap();
        match read_reflection_csv(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        std::fs::write(&path, "freq_Hz,re,im\n1,0\n").unwrap();
        assert!(read_reflection_csv(&path).is_err());
    }

    #[test]
    fn noise_meta_accepts_pumps_or_idler() {
        let meta = noise_meta_from_value(&json!({
            "detection_bandwidth": {"value": 1.0, "unit": "MHz"},
            "signal_frequency": {"value": 7.3165, "unit": "GHz"},
            "pump1_frequency": {"value": 7.3165, "unit": "GHz"},
            "pump2_frequency": {"value": 7.7165, "unit": "GHz"}
        }))
        .unwrap();
        assert!((meta.detection_bandwidth - 1e6).abs() < 1e-6);
        assert!((meta.idler_frequency - TWO_PI * 7.7165e9).abs() < 1e-2);

        let meta = noise_meta_from_value(&json!({
            "detection_bandwidth": 1e6,
            "signal_frequency": 7.3165e9,
            "idler_frequency": 7.7165e9
        }))
        .unwrap();
        assert!((meta.signal_frequency - TWO_PI * 7.3165e9).abs() < 1e-2);
    }

    #[test]
    fn noise_meta_cross_checks_pumps_against_idler() {
        let err = noise_meta_from_value(&json!({
            "detection_bandwidth": 1e6,
            "signal_frequency": 7.3165e9,
            "idler_frequency": 7.70e9,
            "pump1_frequency": 7.3165e9,
            "pump2_frequency": 7.7165e9
        }))
        .unwrap_err();
        match err {
            Error::Schema { field, message } => {
                assert_eq!(field, "idler_frequency");
                assert!(message.contains("inconsistent"));
            }
            other => panic!("{other:?}"),
        }
        // Consistent pair passes.
        noise_meta_from_value(&json!({
            "detection_bandwidth": 1e6,
            "signal_frequency": 7.3165e9,
            "idler_frequency": 7.7165e9,
            "pump1_frequency": 7.3165e9,
            "pump2_frequency": 7.7165e9
        }))
        .unwrap();
    }

    #[test]
    fn noise_meta_rejects_incomplete_specs() {
        assert!(noise_meta_from_value(&json!({
            "detection_bandwidth": 1e6,
            "signal_frequency": 7.3e9
        }))
        .is_err());
        assert!(noise_meta_from_value(&json!({
            "detection_bandwidth": 1e6,
            "signal_frequency": 7.3e9,
            "pump1_frequency": 7.4e9
        }))
        .is_err());
        assert!(noise_meta_from_value(&json!({
            "detection_bandwidth": 1e6,
            "signal_frequency": 7.3e9,
            "idler_frequency": 7.7e9,
            "span": 2.0
        }))
        .is_err());
    }

    #[test]
    fn noise_trace_round_trip_with_sigma() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("noise.csv");
        let meta = dir.path().join("noise.meta.json");
        let trace = NoiseTrace {
            temperatures: vec![0.058, 0.108, 0.158, 0.208],
            psd_quanta: vec![101.0, 115.0, 131.0, 149.0],
            sigma: Some(vec![1.0, 1.1, 1.2, 1.3]),
            detection_bandwidth: 1e6,
            signal_frequency: TWO_PI * 7.3165e9,
            idler_frequency: TWO_PI * 7.7165e9,
        };
        write_noise_trace(&csv, &meta, &trace).unwrap();
        let back = read_noise_trace(&csv, &meta).unwrap();
        assert_eq!(back.temperatures, trace.temperatures);
        assert_eq!(back.psd_quanta, trace.psd_quanta);
        assert_eq!(back.sigma, trace.sigma);
        assert!((back.signal_frequency - trace.signal_frequency).abs() < 1e-2);
        assert!((back.detection_bandwidth - 1e6).abs() < 1e-9);
    }

    #[test]
    fn field_sweep_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let points = vec![
            FieldPoint {
                field: 0.0,
                psd_quanta: 120.0,
            },
            FieldPoint {
                field: 0.2135,
                psd_quanta: 123.5,
            },
        ];
        write_field_sweep_csv(&path, &points).unwrap();
        let back = read_field_sweep_csv(&path).unwrap();
        assert_eq!(back, points);
    }
}
