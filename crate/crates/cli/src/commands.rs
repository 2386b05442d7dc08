//! One handler per subcommand. Every handler reads its inputs, runs the
//! corresponding library stage, writes deterministic result files into
//! `--out`, and prints a short summary to stdout.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use kipa_core::calibration::{
    clamp_physical, device_added_noise, fit_noise_thermometry, fit_reflection,
    CalibrationRecord, Measurement,
};
use kipa_core::circuit::{
    derive_circuit, derive_report, design_bridge_for_kerr, AlphaSource, DerivedCircuit,
    DesignConstraints, DeviceSpec,
};
use kipa_core::consts::{watts_to_dbm, TWO_PI};
use kipa_core::dynamics::{
    center_gain_db, dressed_drive, drive_for_target_gain, gain_spectrum, half_power_bandwidth,
    phase_sensitive_gain, pump_steady_state, retune_for_field_shift, DriveConfig, OperatingPoint,
};
use kipa_core::io::device::read_device_spec;
use kipa_core::io::records::{write_record, RecordEnvelope, ToolInfo};
use kipa_core::io::touchstone;
use kipa_core::io::traces::{
    read_noise_trace, read_reflection_csv, write_field_sweep_csv, write_gain_spectrum_csv,
    write_noise_trace, write_phase_sweep_csv, write_reflection_csv,
};
use kipa_core::io::units::Dimension;
use kipa_core::synth;
use kipa_core::{Error, Result};

use crate::params::Params;

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// Flags every subcommand carries.
#[derive(Args, Debug)]
pub struct Common {
    /// JSON object with default parameter values; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for result files (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn tool() -> ToolInfo {
    ToolInfo {
        name: "kipa".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn to_value<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Record(format!("unserializable record: {e}")))
}

fn require_path(params: &Params, key: &str, flag: Option<&Path>) -> Result<PathBuf> {
    if let Some(p) = flag {
        return Ok(p.to_path_buf());
    }
    match params.string(key, None)? {
        Some(s) => Ok(PathBuf::from(s)),
        None => Err(Error::InvalidArgument(format!(
            "missing parameter `{key}`: pass --{key} or set \"{key}\" in --config"
        ))),
    }
}

fn load_circuit(device: &Path, alpha: AlphaSource) -> Result<(DeviceSpec, DerivedCircuit)> {
    let spec = read_device_spec(device)?;
    let circuit = kipa_core::circuit::derive_circuit_with(&spec, alpha)?;
    Ok((spec, circuit))
}

// ---------------------------------------------------------------------------
// derive
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct DeriveArgs {
    /// Device description JSON.
    #[arg(long)]
    pub device: Option<PathBuf>,
    /// Participation-ratio source: "geometry" (inductance split, default) or
    /// "stated" (take α from the device file's stated parameters).
    #[arg(long, default_value = "geometry")]
    pub alpha_from: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn derive(args: &DeriveArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let device = require_path(&params, "device", args.device.as_deref())?;
    let source = match args.alpha_from.as_str() {
        "geometry" => AlphaSource::FromInductances,
        "stated" | "file" => AlphaSource::Stated,
        other => {
            return Err(Error::InvalidArgument(format!(
                "--alpha-from must be `geometry` or `stated`, got `{other}`"
            )))
        }
    };
    let spec = read_device_spec(&device)?;
    let report = derive_report(&spec, source)?;

    ensure_out(&args.common.out)?;
    let envelope = RecordEnvelope::new(tool(), "derive-report", to_value(&report)?)
        .with_inputs(&[&device])?;
    write_record(&args.common.out.join("derive.json"), &envelope)?;

    let d = &report.derived;
    println!(
        "resonant frequency : {:.9} GHz",
        d.resonant_frequency / TWO_PI / 1e9
    );
    println!(
        "bridge inductance  : {:.6} nH (effective width {:.2} nm)",
        d.bridge_inductance * 1e9,
        d.effective_width * 1e9
    );
    println!(
        "participation ratio: {:.6} from inductances{}",
        report.alpha_from_inductances,
        match report.alpha_stated {
            Some(a) => format!(", {a:.6} stated"),
            None => String::new(),
        }
    );
    println!("impedance          : {:.4} ohm", d.impedance);
    println!(
        "Kerr coefficient   : 2pi x {:.4} kHz (form cross-check {:.2e} rel.)",
        d.kerr_coefficient / TWO_PI / 1e3,
        d.kerr_consistency_error()
    );
    if let Some(k) = report.kerr_from_stated {
        println!(
            "Kerr from stated parameter set: 2pi x {:.4} MHz",
            k / TWO_PI / 1e6
        );
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Drive resolution shared by simulate-gain / simulate-ps / compensate
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct DriveArgs {
    /// Device description JSON.
    #[arg(long)]
    pub device: Option<PathBuf>,
    /// Pump offset from the tone center (each tone sits at center ± offset),
    /// e.g. "133.5MHz".
    #[arg(long)]
    pub offset: Option<String>,
    /// Per-tone pump power, e.g. "-99.29dBm" or "120fW". Mutually exclusive
    /// with --target-gain.
    #[arg(long, allow_hyphen_values = true)]
    pub power: Option<String>,
    /// Solve the per-tone power for this center gain (dB).
    #[arg(long, allow_hyphen_values = true)]
    pub target_gain: Option<f64>,
    /// Tone-center frequency, e.g. "7.45GHz"; omit to track the dressed
    /// (power-shifted) resonance, which is where the gain lives.
    #[arg(long)]
    pub center: Option<String>,
    /// Lower-tone phase, e.g. "0.3rad" or "45deg".
    #[arg(long, allow_hyphen_values = true)]
    pub phase1: Option<String>,
    /// Upper-tone phase.
    #[arg(long, allow_hyphen_values = true)]
    pub phase2: Option<String>,
}

fn resolve_operating_point(
    circuit: &DerivedCircuit,
    params: &Params,
    args: &DriveArgs,
) -> Result<OperatingPoint> {
    let offset = params.require_quantity("offset", args.offset.as_deref(), Dimension::Frequency)?;
    let phase1 = params.quantity_or("phase1", args.phase1.as_deref(), Dimension::Phase, 0.0)?;
    let phase2 = params.quantity_or("phase2", args.phase2.as_deref(), Dimension::Phase, 0.0)?;
    let target = params.number("target_gain", args.target_gain)?;
    let power = params.quantity("power", args.power.as_deref(), Dimension::Power)?;
    let center = params.quantity("center", args.center.as_deref(), Dimension::Frequency)?;
    match (target, power) {
        (Some(_), Some(_)) => Err(Error::InvalidArgument(
            "--power and --target-gain are mutually exclusive".into(),
        )),
        (Some(gain_db), None) => {
            if center.is_some() {
                return Err(Error::InvalidArgument(
                    "--center cannot be combined with --target-gain; the gain solver centers the tones on the dressed resonance".into(),
                ));
            }
            drive_for_target_gain(circuit, offset, gain_db, phase1, phase2)
        }
        (None, Some(watts)) => match center {
            None => dressed_drive(circuit, offset, watts, phase1, phase2),
            Some(ctr) => {
                let drive = DriveConfig::symmetric(ctr, offset, watts, phase1, phase2);
                let pump = pump_steady_state(circuit, &drive)?;
                let gain_db = center_gain_db(circuit, &pump)?;
                Ok(OperatingPoint {
                    drive,
                    pump,
                    gain_db,
                })
            }
        },
        (None, None) => Err(Error::InvalidArgument(
            "one of --power or --target-gain is required".into(),
        )),
    }
}

fn operating_point_value(op: &OperatingPoint, circuit: &DerivedCircuit) -> Result<Value> {
    Ok(json!({
        "drive": to_value(&op.drive)?,
        "pump": to_value(&op.pump)?,
        "gain_db": op.gain_db,
        "per_tone_power_dbm": watts_to_dbm(op.drive.pump1_power),
        "threshold_ratio": op.pump.threshold_ratio(circuit),
    }))
}

// ---------------------------------------------------------------------------
// simulate-gain
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SimulateGainArgs {
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Number of spectrum points over ±κ_tot (default 2001).
    #[arg(long)]
    pub points: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn simulate_gain(args: &SimulateGainArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let device = require_path(&params, "device", args.drive.device.as_deref())?;
    let (_, circuit) = load_circuit(&device, AlphaSource::FromInductances)?;
    let op = resolve_operating_point(&circuit, &params, &args.drive)?;

    let points = params.integer("points", args.points)?;
    let offsets: Vec<f64> = match points {
        None => Vec::new(), // library default grid
        Some(n) if n < 2 => {
            return Err(Error::InvalidArgument(
                "--points must be at least 2".into(),
            ))
        }
        Some(n) => {
            let kappa = circuit.total_decay_rate();
            (0..n)
                .map(|i| -kappa + 2.0 * kappa * i as f64 / (n - 1) as f64)
                .collect()
        }
    };
    let spectrum = gain_spectrum(&circuit, &op.pump, &offsets)?;
    let bandwidth = half_power_bandwidth(&circuit, &op.pump).ok();

    ensure_out(&args.common.out)?;
    write_gain_spectrum_csv(&args.common.out.join("gain.csv"), &spectrum)?;
    let record = json!({
        "operating_point": operating_point_value(&op, &circuit)?,
        "half_power_bandwidth_hz": bandwidth.map(|b| b / TWO_PI),
        "points": spectrum.frequencies.len(),
    });
    let envelope =
        RecordEnvelope::new(tool(), "gain-spectrum", record).with_inputs(&[&device])?;
    write_record(&args.common.out.join("gain.json"), &envelope)?;

    println!(
        "center gain  : {:.4} dB at {:.9} GHz",
        op.gain_db,
        op.drive.center_frequency() / TWO_PI / 1e9
    );
    println!(
        "per-tone pump: {:.4} dBm at center ± {:.4} MHz",
        watts_to_dbm(op.drive.pump1_power),
        op.drive.pump_offset() / TWO_PI / 1e6
    );
    match bandwidth {
        Some(b) => println!("bandwidth    : {:.4} MHz full width at half power", b / TWO_PI / 1e6),
        None => println!("bandwidth    : n/a (center gain below 3 dB)"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate-ps
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SimulatePsArgs {
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Number of signal phases over [0, 2π) (default 361).
    #[arg(long)]
    pub phase_points: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn simulate_ps(args: &SimulatePsArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let device = require_path(&params, "device", args.drive.device.as_deref())?;
    let (_, circuit) = load_circuit(&device, AlphaSource::FromInductances)?;
    let op = resolve_operating_point(&circuit, &params, &args.drive)?;

    let n = params.integer_or("phase_points", args.phase_points, 361)?;
    if n < 2 {
        return Err(Error::InvalidArgument(
            "--phase-points must be at least 2".into(),
        ));
    }
    let phases: Vec<f64> = (0..n).map(|i| TWO_PI * i as f64 / n as f64).collect();
    let sweep = phase_sensitive_gain(&circuit, &op.pump, &phases)?;

    ensure_out(&args.common.out)?;
    write_phase_sweep_csv(&args.common.out.join("phase.csv"), &sweep)?;
    let record = json!({
        "operating_point": operating_point_value(&op, &circuit)?,
        "max_gain_db": sweep.max_gain_db,
        "min_gain_db": sweep.min_gain_db,
        "no_parametric_drive": sweep.no_parametric_drive,
        "phase_points": sweep.phases.len(),
    });
    let envelope = RecordEnvelope::new(tool(), "phase-sweep", record).with_inputs(&[&device])?;
    write_record(&args.common.out.join("phase.json"), &envelope)?;

    if sweep.no_parametric_drive {
        println!("no parametric drive: phase-independent response");
    }
    println!(
        "phase-sensitive gain: max {:.4} dB, min {:.4} dB (phase-preserving {:.4} dB)",
        sweep.max_gain_db, sweep.min_gain_db, op.gain_db
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// fit-s11
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct FitS11Args {
    /// Complex reflection trace: CSV (freq_Hz,re,im) or Touchstone .s1p.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Per-quadrature noise standard deviation of the trace; supplies
    /// absolute parameter uncertainties instead of scatter-scaled ones.
    #[arg(long)]
    pub uncertainty: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn fit_s11(args: &FitS11Args) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let trace_path = require_path(&params, "trace", args.trace.as_deref())?;
    let is_touchstone = trace_path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("s1p"))
        .unwrap_or(false);
    let mut trace = if is_touchstone {
        touchstone::read_one_port(&trace_path)?
    } else {
        read_reflection_csv(&trace_path)?
    };
    if let Some(sigma) = params.number("uncertainty", args.uncertainty)? {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(
                "--uncertainty must be positive and finite".into(),
            ));
        }
        trace.uncertainty = Some(sigma);
    }
    let fit = fit_reflection(&trace)?;
    let record = CalibrationRecord {
        reflection: Some(fit),
        ..CalibrationRecord::default()
    };

    ensure_out(&args.common.out)?;
    let envelope = RecordEnvelope::new(tool(), "calibration", to_value(&record)?)
        .with_inputs(&[&trace_path])?;
    write_record(&args.common.out.join("calibration.json"), &envelope)?;

    let f = &fit;
    println!(
        "resonant frequency: {:.9} ± {:.9} GHz",
        f.resonant_frequency.value / TWO_PI / 1e9,
        f.resonant_frequency.sigma / TWO_PI / 1e9
    );
    println!(
        "kappa_ext         : {:.6} ± {:.6} MHz",
        f.external_coupling_rate.value / TWO_PI / 1e6,
        f.external_coupling_rate.sigma / TWO_PI / 1e6
    );
    println!(
        "kappa_int         : {:.6} ± {:.6} MHz",
        f.intrinsic_loss_rate.value / TWO_PI / 1e6,
        f.intrinsic_loss_rate.sigma / TWO_PI / 1e6
    );
    println!("reduced chi-square: {:.4}", f.reduced_chi_square);
    Ok(())
}

// ---------------------------------------------------------------------------
// fit-noise
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct FitNoiseArgs {
    /// Noise sweep CSV: T_K,psd_quanta[,sigma].
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON sidecar with detection_bandwidth, signal_frequency and the idler
    /// (directly or via the pump pair).
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Source-line power transmission λ ∈ (0, 1] for the device back-out.
    #[arg(long)]
    pub transmission: Option<f64>,
    /// 1σ uncertainty of --transmission (default 0).
    #[arg(long)]
    pub transmission_sigma: Option<f64>,
    /// Readout-chain noise behind the device, quanta referred to its output.
    #[arg(long)]
    pub chain_noise: Option<f64>,
    /// 1σ uncertainty of --chain-noise (default 0).
    #[arg(long)]
    pub chain_noise_sigma: Option<f64>,
    /// Device power gain (dB) used to refer the chain noise to its input.
    #[arg(long, allow_hyphen_values = true)]
    pub device_gain_db: Option<f64>,
    /// 1σ uncertainty of --device-gain-db (default 0).
    #[arg(long)]
    pub device_gain_sigma_db: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn fit_noise(args: &FitNoiseArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let csv = require_path(&params, "csv", args.csv.as_deref())?;
    let meta = require_path(&params, "meta", args.meta.as_deref())?;
    let trace = read_noise_trace(&csv, &meta)?;
    let fit = fit_noise_thermometry(&trace)?;

    let mut record = CalibrationRecord {
        noise: Some(fit),
        ..CalibrationRecord::default()
    };

    let transmission = params.number("transmission", args.transmission)?;
    let chain = params.number("chain_noise", args.chain_noise)?;
    let gain_db = params.number("device_gain_db", args.device_gain_db)?;
    match (transmission, chain, gain_db) {
        (None, None, None) => {}
        (Some(lambda), Some(n_chain), Some(g_db)) => {
            let lambda_sigma = params.number_or("transmission_sigma", args.transmission_sigma, 0.0)?;
            let chain_sigma = params.number_or("chain_noise_sigma", args.chain_noise_sigma, 0.0)?;
            let g_sigma_db = params.number_or("device_gain_sigma_db", args.device_gain_sigma_db, 0.0)?;
            let g = kipa_core::consts::db_to_ratio(g_db);
            let g_sigma = g * f64::ln(10.0) / 10.0 * g_sigma_db;
            let device = device_added_noise(
                fit.system_noise,
                Measurement::new(lambda, lambda_sigma),
                Measurement::new(n_chain, chain_sigma),
                Measurement::new(g, g_sigma),
            )?;
            let (clamped, warning) = clamp_physical(device, "device added noise")?;
            record.device_noise = Some(clamped);
            record.warnings.extend(warning);
        }
        _ => {
            return Err(Error::InvalidArgument(
                "the device back-out needs all three of --transmission, --chain-noise and --device-gain-db".into(),
            ))
        }
    }

    ensure_out(&args.common.out)?;
    let envelope = RecordEnvelope::new(tool(), "calibration", to_value(&record)?)
        .with_inputs(&[&csv, &meta])?;
    write_record(&args.common.out.join("calibration.json"), &envelope)?;

    println!(
        "system gain : {:.4} ± {:.4} dB",
        10.0 * fit.system_gain.value.log10(),
        10.0 / f64::ln(10.0) * fit.system_gain.sigma / fit.system_gain.value
    );
    println!(
        "system noise: {:.4} ± {:.4} quanta (T→0 intercept {:.4} ± {:.4})",
        fit.system_noise.value,
        fit.system_noise.sigma,
        fit.vts_output_intercept.value,
        fit.vts_output_intercept.sigma
    );
    println!("reduced chi-square: {:.4}", fit.reduced_chi_square);
    if let Some(dev) = record.device_noise {
        println!(
            "device added noise: {:.4} ± {:.4} quanta",
            dev.value, dev.sigma
        );
    }
    for w in &record.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// compensate
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct CompensateArgs {
    #[command(flatten)]
    pub drive: DriveArgs,
    /// Bare-resonance shift to compensate, e.g. "-26MHz" for the usual
    /// downward field pull.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

pub fn compensate(args: &CompensateArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let device = require_path(&params, "device", args.drive.device.as_deref())?;
    let (_, circuit) = load_circuit(&device, AlphaSource::FromInductances)?;
    let shift = params.require_quantity("shift", args.shift.as_deref(), Dimension::Frequency)?;
    let original = resolve_operating_point(&circuit, &params, &args.drive)?;
    let retuned = retune_for_field_shift(&circuit, &original, shift)?;

    ensure_out(&args.common.out)?;
    let record = json!({
        "resonance_shift_hz": shift / TWO_PI,
        "original": operating_point_value(&original, &circuit)?,
        "retuned": operating_point_value(
            &retuned.operating_point,
            &circuit.with_resonant_frequency(circuit.resonant_frequency + shift),
        )?,
        "power_adjustment_db": retuned.power_adjustment_db,
        "center_shift_hz": retuned.center_shift / TWO_PI,
    });
    let envelope = RecordEnvelope::new(tool(), "retune", record).with_inputs(&[&device])?;
    write_record(&args.common.out.join("retune.json"), &envelope)?;

    let d = &retuned.operating_point.drive;
    println!(
        "retuned tones  : {:.9} / {:.9} GHz (center moved {:+.4} MHz)",
        d.pump1_frequency / TWO_PI / 1e9,
        d.pump2_frequency / TWO_PI / 1e9,
        retuned.center_shift / TWO_PI / 1e6
    );
    println!(
        "power adjusted : {:+.4} dB → {:.4} dBm per tone",
        retuned.power_adjustment_db,
        watts_to_dbm(d.pump1_power)
    );
    println!(
        "restored gain  : {:.4} dB (was {:.4} dB)",
        retuned.operating_point.gain_db, original.gain_db
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct DesignArgs {
    /// Device description JSON supplying the film and the linear circuit.
    #[arg(long)]
    pub device: Option<PathBuf>,
    /// Target Kerr coefficient as a cyclic frequency, e.g. "2.3MHz" or "110kHz".
    #[arg(long)]
    pub target_kerr: Option<String>,
    /// Target resonance, e.g. "7.45GHz".
    #[arg(long)]
    pub frequency: Option<String>,
    /// Smallest drawn bridge width to consider (default "12nm").
    #[arg(long)]
    pub min_width: Option<String>,
    /// Largest drawn bridge width to consider (default "2um").
    #[arg(long)]
    pub max_width: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

pub fn design(args: &DesignArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let device = require_path(&params, "device", args.device.as_deref())?;
    let spec = read_device_spec(&device)?;
    let target_kerr =
        params.require_quantity("target_kerr", args.target_kerr.as_deref(), Dimension::Frequency)?;
    let frequency =
        params.require_quantity("frequency", args.frequency.as_deref(), Dimension::Frequency)?;
    let min_width =
        params.quantity_or("min_width", args.min_width.as_deref(), Dimension::Length, 12e-9)?;
    let max_width =
        params.quantity_or("max_width", args.max_width.as_deref(), Dimension::Length, 2e-6)?;
    let constraints = DesignConstraints {
        shunt_capacitance: spec.circuit.shunt_capacitance,
        parasitic_inductance: spec.circuit.parasitic_inductance,
        min_width,
        max_width,
    };
    let geometry = design_bridge_for_kerr(&spec.film, &constraints, target_kerr, frequency)?;
    let realized = DeviceSpec {
        geometry,
        stated: None,
        ..spec
    };
    let derived = derive_circuit(&realized)?;

    ensure_out(&args.common.out)?;
    let record = json!({
        "target_kerr_hz": target_kerr / TWO_PI,
        "target_frequency_hz": frequency / TWO_PI,
        "constraints": to_value(&constraints)?,
        "geometry": to_value(&geometry)?,
        "derived": to_value(&derived)?,
    });
    let envelope = RecordEnvelope::new(tool(), "design", record).with_inputs(&[&device])?;
    write_record(&args.common.out.join("design.json"), &envelope)?;

    println!(
        "bridge geometry : {:.4} nm wide × {:.4} nm long",
        geometry.width * 1e9,
        geometry.length * 1e9
    );
    println!(
        "achieved Kerr   : 2pi x {:.6} kHz at {:.9} GHz (target 2pi x {:.6} kHz)",
        derived.kerr_coefficient / TWO_PI / 1e3,
        derived.resonant_frequency / TWO_PI / 1e9,
        target_kerr / TWO_PI / 1e3
    );
    println!(
        "characteristic current: {:.4} uA, participation {:.4}",
        derived.characteristic_current * 1e6,
        derived.participation_ratio
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

#[derive(clap::Subcommand, Debug)]
pub enum SynthModel {
    /// Complex S11 trace of a linear resonator.
    Reflection(SynthReflectionArgs),
    /// Output-noise PSD versus source temperature.
    Noise(SynthNoiseArgs),
    /// Output-noise PSD versus applied in-plane magnetic field.
    Field(SynthFieldArgs),
}

#[derive(Args, Debug)]
pub struct SynthReflectionArgs {
    /// e.g. "7.45GHz".
    #[arg(long)]
    pub resonant_frequency: Option<String>,
    /// e.g. "57.0375MHz".
    #[arg(long)]
    pub kappa_ext: Option<String>,
    /// e.g. "1.8625MHz".
    #[arg(long)]
    pub kappa_int: Option<String>,
    /// Number of frequency points (default 8001).
    #[arg(long)]
    pub points: Option<u64>,
    /// Full frequency span in units of κ_tot (default 3).
    #[arg(long)]
    pub span: Option<f64>,
    /// Additive per-quadrature noise standard deviation (default 0).
    #[arg(long)]
    pub noise_level: Option<f64>,
    /// RNG seed for the synthetic noise (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output format: "csv" (freq_Hz,re,im) or "touchstone" (.s1p).
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn synth_reflection(args: &SynthReflectionArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let truth = synth::ReflectionTruth {
        resonant_frequency: params.require_quantity(
            "resonant_frequency",
            args.resonant_frequency.as_deref(),
            Dimension::Frequency,
        )?,
        external_coupling_rate: params.require_quantity(
            "kappa_ext",
            args.kappa_ext.as_deref(),
            Dimension::Frequency,
        )?,
        intrinsic_loss_rate: params.require_quantity(
            "kappa_int",
            args.kappa_int.as_deref(),
            Dimension::Frequency,
        )?,
    };
    let points = params.integer_or("points", args.points, 8001)? as usize;
    let span = params.number_or("span", args.span, 3.0)?;
    let noise_level = params.number_or("noise_level", args.noise_level, 0.0)?;
    let seed = params.integer_or("seed", args.seed, 0)?;
    let trace = synth::reflection_trace(&truth, points, span, noise_level, seed)?;

    ensure_out(&args.common.out)?;
    let path = match args.format.as_str() {
        "csv" => {
            let path = args.common.out.join("reflection.csv");
            write_reflection_csv(&path, &trace)?;
            path
        }
        "touchstone" => {
            let path = args.common.out.join("reflection.s1p");
            touchstone::write_one_port(&path, &trace)?;
            path
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "--format must be `csv` or `touchstone`, got `{other}`"
            )))
        }
    };
    println!(
        "wrote {} ({} points, noise level {:.3e}, seed {})",
        path.display(),
        points,
        noise_level,
        seed
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct SynthNoiseArgs {
    /// System power gain (dB), source plane → detector.
    #[arg(long, allow_hyphen_values = true)]
    pub system_gain_db: Option<f64>,
    /// System added noise (quanta, source plane).
    #[arg(long)]
    pub system_noise: Option<f64>,
    /// Lowest source temperature, e.g. "58mK".
    #[arg(long)]
    pub t_min: Option<String>,
    /// Highest source temperature, e.g. "608mK".
    #[arg(long)]
    pub t_max: Option<String>,
    /// Number of temperatures (default 12).
    #[arg(long)]
    pub points: Option<u64>,
    /// e.g. "1MHz".
    #[arg(long)]
    pub detection_bandwidth: Option<String>,
    /// e.g. "7.45GHz".
    #[arg(long)]
    pub signal_frequency: Option<String>,
    /// e.g. "7.717GHz".
    #[arg(long)]
    pub idler_frequency: Option<String>,
    /// Multiplicative noise level (default 0).
    #[arg(long)]
    pub noise_level: Option<f64>,
    /// RNG seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn synth_noise(args: &SynthNoiseArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let gain_db = params.require_number("system_gain_db", args.system_gain_db)?;
    let truth = synth::NoiseSweepTruth {
        system_gain: kipa_core::consts::db_to_ratio(gain_db),
        system_noise: params.require_number("system_noise", args.system_noise)?,
        detection_bandwidth: params.require_quantity(
            "detection_bandwidth",
            args.detection_bandwidth.as_deref(),
            Dimension::Frequency,
        )? / TWO_PI,
        signal_frequency: params.require_quantity(
            "signal_frequency",
            args.signal_frequency.as_deref(),
            Dimension::Frequency,
        )?,
        idler_frequency: params.require_quantity(
            "idler_frequency",
            args.idler_frequency.as_deref(),
            Dimension::Frequency,
        )?,
    };
    let t_min = params.require_quantity("t_min", args.t_min.as_deref(), Dimension::Temperature)?;
    let t_max = params.require_quantity("t_max", args.t_max.as_deref(), Dimension::Temperature)?;
    let points = params.integer_or("points", args.points, 12)?;
    if points < 2 || t_max <= t_min {
        return Err(Error::InvalidArgument(
            "the temperature sweep needs at least 2 points with t_max > t_min".into(),
        ));
    }
    let temperatures: Vec<f64> = (0..points)
        .map(|i| t_min + (t_max - t_min) * i as f64 / (points - 1) as f64)
        .collect();
    let noise_level = params.number_or("noise_level", args.noise_level, 0.0)?;
    let seed = params.integer_or("seed", args.seed, 0)?;
    let trace = synth::noise_sweep(&truth, &temperatures, noise_level, seed)?;

    ensure_out(&args.common.out)?;
    let csv = args.common.out.join("noise.csv");
    let meta = args.common.out.join("noise_meta.json");
    write_noise_trace(&csv, &meta, &trace)?;
    println!(
        "wrote {} and {} ({} temperatures, noise level {:.3e}, seed {})",
        csv.display(),
        meta.display(),
        points,
        noise_level,
        seed
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct SynthFieldArgs {
    /// System power gain (dB), source plane → detector.
    #[arg(long, allow_hyphen_values = true)]
    pub system_gain_db: Option<f64>,
    /// Stage temperature during the sweep, e.g. "58mK".
    #[arg(long)]
    pub base_temperature: Option<String>,
    /// e.g. "7.45GHz".
    #[arg(long)]
    pub signal_frequency: Option<String>,
    /// e.g. "7.717GHz".
    #[arg(long)]
    pub idler_frequency: Option<String>,
    /// Device added noise at zero field (quanta).
    #[arg(long)]
    pub zero_field_noise: Option<f64>,
    /// Device added noise at --max-field (quanta).
    #[arg(long)]
    pub max_field_noise: Option<f64>,
    /// Largest applied field, e.g. "427mT".
    #[arg(long)]
    pub max_field: Option<String>,
    /// Number of field points from 0 to --max-field (default 25).
    #[arg(long)]
    pub points: Option<u64>,
    /// Multiplicative noise level (default 0).
    #[arg(long)]
    pub noise_level: Option<f64>,
    /// RNG seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn synth_field(args: &SynthFieldArgs) -> Result<()> {
    let params = Params::load(args.common.config.as_deref())?;
    let gain_db = params.require_number("system_gain_db", args.system_gain_db)?;
    let truth = synth::FieldSweepTruth {
        system_gain: kipa_core::consts::db_to_ratio(gain_db),
        base_temperature: params.require_quantity(
            "base_temperature",
            args.base_temperature.as_deref(),
            Dimension::Temperature,
        )?,
        signal_frequency: params.require_quantity(
            "signal_frequency",
            args.signal_frequency.as_deref(),
            Dimension::Frequency,
        )?,
        idler_frequency: params.require_quantity(
            "idler_frequency",
            args.idler_frequency.as_deref(),
            Dimension::Frequency,
        )?,
        zero_field_noise: params.require_number("zero_field_noise", args.zero_field_noise)?,
        max_field_noise: params.require_number("max_field_noise", args.max_field_noise)?,
        max_field: params.require_quantity(
            "max_field",
            args.max_field.as_deref(),
            Dimension::MagneticField,
        )?,
    };
    let points = params.integer_or("points", args.points, 25)?;
    if points < 2 {
        return Err(Error::InvalidArgument(
            "--points must be at least 2".into(),
        ));
    }
    let fields: Vec<f64> = (0..points)
        .map(|i| truth.max_field * i as f64 / (points - 1) as f64)
        .collect();
    let noise_level = params.number_or("noise_level", args.noise_level, 0.0)?;
    let seed = params.integer_or("seed", args.seed, 0)?;
    let sweep = synth::field_sweep(&truth, &fields, noise_level, seed)?;

    ensure_out(&args.common.out)?;
    let path = args.common.out.join("field_sweep.csv");
    write_field_sweep_csv(&path, &sweep)?;
    println!(
        "wrote {} ({} field points, noise level {:.3e}, seed {})",
        path.display(),
        points,
        noise_level,
        seed
    );
    Ok(())
}
