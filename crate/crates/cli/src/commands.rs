//! Command implementations. Each command is a pure function of
//! (config, seed): identical inputs produce byte-identical CSV outputs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use twpa_core::cme::{
    self, compression_curve, degenerate_quadrature_gains, gain_spectrum, oscillation_check,
    GainSpectrum, OperatingPoint,
};
use twpa_core::constants::ratio_to_db;
use twpa_core::dispersion::{bloch_dispersion, DispersionCurve};
use twpa_core::noise::quantum_limit;
use twpa_core::pipeline::{
    added_noise, calibrate, ingest_trace, run_y_factor, squeezing_analysis,
    synthesize_squeeze_measurements, CalibrationScale, DeviceResponse, NoiseTrace,
    SqueezeForwardPoint, TraceKind, TraceTimes,
};
use twpa_core::{Error, Result};

use crate::config::ExperimentConfig;

fn create(out_dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<fs::File>)> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    let file = fs::File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn biased_curve(config: &ExperimentConfig) -> Result<(twpa_core::device::DeviceGeometry, DispersionCurve)> {
    let geometry = config.geometry()?;
    let curve = bloch_dispersion(&config.dispersion_grid(), &geometry, config.operating_point.i_dc_a)?;
    Ok((geometry, curve))
}

/// Dispersion curve and bandgap list.
pub fn cmd_dispersion(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (geometry, curve) = biased_curve(config)?;

    let (csv_path, mut w) = create(out_dir, "dispersion.csv")?;
    curve.write_csv(&mut w)?;
    w.flush()?;

    let (gap_path, mut w) = create(out_dir, "bandgaps.csv")?;
    writeln!(w, "f_low_Hz,f_high_Hz")?;
    for &(lo, hi) in &curve.gaps {
        writeln!(w, "{lo:e},{hi:e}")?;
    }
    w.flush()?;

    println!(
        "stub resonance: {:.4} GHz (quarter-wave)",
        geometry.stub_resonance_freq() / 1e9
    );
    if curve.gaps.is_empty() {
        println!("no gaps detected on the grid");
    }
    for &(lo, hi) in &curve.gaps {
        println!(
            "bandgap: {:.4} GHz to {:.4} GHz (center {:.4} GHz, width {:.1} MHz)",
            lo / 1e9,
            hi / 1e9,
            (lo + hi) / 2e9,
            (hi - lo) / 1e6
        );
    }
    Ok(vec![csv_path, gap_path])
}

/// Small-signal gain spectrum with an oscillation-stability summary.
pub fn cmd_gain(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (geometry, curve) = biased_curve(config)?;
    let op = config.operating_point();
    let spectrum = gain_spectrum(&op, &curve, &geometry, &config.gain_grid())?;

    let (path, mut w) = create(out_dir, "gain_spectrum.csv")?;
    spectrum.write_csv(&mut w)?;
    w.flush()?;

    let (f_peak, g_peak) = spectrum.peak();
    let peak_db = ratio_to_db(g_peak);
    println!(
        "peak gain: {:.2} dB at {:.4} GHz; >=17 dB over {:.2} GHz; >=12 dB over {:.2} GHz",
        peak_db,
        f_peak / 1e9,
        spectrum.bandwidth_above_db(17.0) / 1e9,
        spectrum.bandwidth_above_db(12.0) / 1e9
    );
    let (status, margin) = oscillation_check(peak_db, config.chain.reflect_in_db, config.chain.reflect_out_db)?;
    println!("oscillation check at peak gain: {status:?}, margin {margin:.1} dB");
    Ok(vec![path])
}

/// Gain vs. input power and the 1 dB compression point.
pub fn cmd_compression(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (geometry, curve) = biased_curve(config)?;
    let op = config.operating_point();
    let comp = compression_curve(&op, &curve, &geometry, &config.compression_grid_w())?;

    let (path, mut w) = create(out_dir, "compression.csv")?;
    comp.write_csv(&mut w)?;
    w.flush()?;

    println!(
        "small-signal gain {:.2} dB at {:.4} GHz; P_1dB = {:.2} dBm",
        comp.small_signal_gain_db,
        op.f_signal / 1e9,
        comp.p_1db_dbm
    );
    Ok(vec![path])
}

/// Synthetic y-factor run: traces, calibration, added noise vs. the
/// quantum limit.
pub fn cmd_noise(config: &ExperimentConfig, out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let (geometry, curve) = biased_curve(config)?;
    let op = config.operating_point();
    let grid = config.noise_grid();
    let spectrum = gain_spectrum(&op, &curve, &geometry, &grid)?;
    let chain = config.chain_model(&geometry)?;
    let device = DeviceResponse {
        gain: &spectrum,
        added_noise_quanta: None,
        pump_excess_quanta: 0.0,
    };
    let times = TraceTimes {
        hot: config.timing.hot_min,
        cold: config.timing.cold_min,
        on: config.timing.on_min,
        off: config.timing.off_min,
    };
    let outcome = run_y_factor(&grid, &device, &chain, &times, CalibrationScale::Quanta, seed)?;

    let mut files = Vec::new();
    for (name, trace) in [
        ("trace_hot.csv", &outcome.hot),
        ("trace_cold.csv", &outcome.cold),
        ("trace_twpa_on.csv", &outcome.on),
        ("trace_twpa_off.csv", &outcome.off),
    ] {
        let (path, mut w) = create(out_dir, name)?;
        trace.write_csv(&mut w)?;
        w.flush()?;
        files.push(path);
    }

    // Gain on the same grid as the traces, so the file-based calibrate
    // path reproduces the in-memory analysis exactly.
    let (path, mut w) = create(out_dir, "gain_noise_band.csv")?;
    spectrum.write_csv(&mut w)?;
    w.flush()?;
    files.push(path);

    let (path, mut w) = create(out_dir, "added_noise.csv")?;
    writeln!(w, "f_Hz,added_noise_quanta,quantum_limit_quanta")?;
    let mut max_dev = 0.0f64;
    let mut sum_dev = 0.0;
    for (k, &f) in grid.iter().enumerate() {
        let ql = quantum_limit(spectrum.gain[k].max(1.0))?;
        writeln!(w, "{f:e},{:e},{ql:e}", outcome.added.added[k])?;
        let dev = (outcome.added.added[k] - ql).abs();
        max_dev = max_dev.max(dev);
        sum_dev += dev;
    }
    w.flush()?;
    files.push(path);

    println!(
        "added noise vs quantum limit: max |A - QL| = {:.4} quanta, mean |A - QL| = {:.4} quanta over {} points",
        max_dev,
        sum_dev / grid.len() as f64,
        grid.len()
    );
    Ok(files)
}

/// Pump-attenuation sweep: quadrature gains, system noise, and the
/// extracted vacuum squeezing level.
pub fn cmd_squeeze(config: &ExperimentConfig, out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let geometry = config.geometry()?;
    let curve = bloch_dispersion(&config.dispersion_grid(), &geometry, config.operating_point.i_dc_a)?;
    let f_pump = config.squeeze.f_pump_hz;
    let base = OperatingPoint {
        f_pump,
        f_signal: f_pump / 2.0,
        signal_power_w: 0.0,
        signal_phase: 0.0,
        ..config.operating_point()
    };
    let chain = config.amp_chain_params();

    let mut points = Vec::new();
    for atten_db in config.squeeze_attenuations_db() {
        let op = OperatingPoint {
            i_pump: base.i_pump * 10f64.powf(-atten_db / 20.0),
            ..base
        };
        let q = degenerate_quadrature_gains(&op, &curve, &geometry)?;
        points.push(SqueezeForwardPoint {
            atten_db,
            g_a: q.g_a,
            g_sq: q.g_sq,
            n_pa_true: config.amp_chain.n_pa_max_quanta * 10f64.powf(-atten_db / 10.0),
        });
    }
    let measurements = synthesize_squeeze_measurements(
        &points,
        &chain,
        config.amp_chain.n_a_quanta,
        config.amp_chain.n_hemt_quanta,
        config.squeeze.noise_sigma_quanta,
        seed,
    )?;
    let results = squeezing_analysis(&measurements, &chain)?;

    let (path, mut w) = create(out_dir, "squeeze.csv")?;
    writeln!(w, "atten_dB,G_a_dB,G_sq_dB,N_sys_quanta,squeezing_dB,ideal_dB")?;
    let mut best = &results[0];
    for r in &results {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            r.atten_db, r.g_a_db, r.g_sq_db, r.n_sys, r.squeezing_db, r.g_a_db
        )?;
        if r.squeezing_db > best.squeezing_db {
            best = r;
        }
    }
    w.flush()?;

    println!(
        "cascade fit: N_HEMT = {:.2}, N_a = {:.3} (rms residual {:.2e}); max squeezing {:.2} dB at G_a = {:.2} dB",
        results[0].n_hemt_fit, results[0].n_a_fit, results[0].residual, best.squeezing_db, best.g_a_db
    );
    Ok(vec![path])
}

/// Inputs of the file-based calibration command.
pub struct CalibrateArgs {
    pub hot: PathBuf,
    pub cold: PathBuf,
    pub on: PathBuf,
    pub off: PathBuf,
    pub gain: PathBuf,
    /// Hot/cold load temperatures of the calibration standards \[K\].
    pub t_hot_k: f64,
    pub t_cold_k: f64,
}

/// Y-factor analysis over ingested trace files.
pub fn cmd_calibrate(args: &CalibrateArgs, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let hot = expect_kind(ingest_trace(&args.hot)?, TraceKind::Hot, &args.hot)?;
    let cold = expect_kind(ingest_trace(&args.cold)?, TraceKind::Cold, &args.cold)?;
    let on = expect_kind(ingest_trace(&args.on)?, TraceKind::TwpaOn, &args.on)?;
    let off = expect_kind(ingest_trace(&args.off)?, TraceKind::TwpaOff, &args.off)?;

    for (name, path, trace) in [
        ("cold", &args.cold, &cold),
        ("on", &args.on, &on),
        ("off", &args.off, &off),
    ] {
        if trace.freqs != hot.freqs {
            return Err(Error::schema(format!(
                "frequency grids differ between {} and {} ({name} trace)",
                args.hot.display(),
                path.display()
            )));
        }
    }

    let gain = read_gain_csv(&args.gain)?;
    let cal = calibrate(&hot, &cold, args.t_hot_k, args.t_cold_k, CalibrationScale::Quanta)?;
    let result = added_noise(&on, &off, &cal, &gain)?;

    let (csv_path, mut w) = create(out_dir, "calibrated_added_noise.csv")?;
    writeln!(w, "f_Hz,added_noise_quanta,quantum_limit_quanta")?;
    let mut rows = Vec::new();
    for (k, &f) in result.freqs.iter().enumerate() {
        let g = gain.gain_at(f)?;
        let ql = quantum_limit(g.max(1.0))?;
        writeln!(w, "{f:e},{:e},{ql:e}", result.added[k])?;
        rows.push((g, result.added[k], ql));
    }
    w.flush()?;

    // High-gain band: within 3 dB of the peak gain.
    let peak_db = rows.iter().map(|r| ratio_to_db(r.0)).fold(f64::MIN, f64::max);
    let band: Vec<&(f64, f64, f64)> = rows
        .iter()
        .filter(|r| ratio_to_db(r.0) >= peak_db - 3.0)
        .collect();
    let mean_a = band.iter().map(|r| r.1).sum::<f64>() / band.len() as f64;
    let offset = band.iter().map(|r| r.1 - r.2).sum::<f64>() / band.len() as f64;

    let (json_path, mut w) = create(out_dir, "calibrate_summary.json")?;
    writeln!(w, "{{")?;
    writeln!(w, "  \"points\": {},", rows.len())?;
    writeln!(w, "  \"high_gain_points\": {},", band.len())?;
    writeln!(w, "  \"peak_gain_db\": {peak_db:e},")?;
    writeln!(w, "  \"mean_added_noise_quanta\": {mean_a:e},")?;
    writeln!(w, "  \"offset_from_quantum_limit_quanta\": {offset:e}")?;
    writeln!(w, "}}")?;
    w.flush()?;

    println!(
        "high-gain band ({} points within 3 dB of {:.2} dB peak): mean added noise {:.4} quanta, offset from quantum limit {:+.4} quanta",
        band.len(),
        peak_db,
        mean_a,
        offset
    );
    Ok(vec![csv_path, json_path])
}

fn expect_kind(trace: NoiseTrace, kind: TraceKind, path: &Path) -> Result<NoiseTrace> {
    if trace.kind != kind {
        return Err(Error::schema(format!(
            "{}: expected a {} trace, found {}",
            path.display(),
            kind.tag(),
            trace.kind.tag()
        )));
    }
    Ok(trace)
}

/// Read a `f_Hz,gain_dB` CSV back into a gain spectrum.
pub fn read_gain_csv(path: &Path) -> Result<GainSpectrum> {
    let text = fs::read_to_string(path).map_err(|e| Error::schema(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::schema("empty gain file"))?;
    if header.trim() != "f_Hz,gain_dB" {
        return Err(Error::schema(format!(
            "{}: expected header `f_Hz,gain_dB`, found `{header}`",
            path.display()
        )));
    }
    let mut freqs = Vec::new();
    let mut gain = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (f, g) = line
            .split_once(',')
            .ok_or_else(|| Error::schema(format!("{}: row {}: malformed", path.display(), idx + 2)))?;
        let f: f64 = f
            .trim()
            .parse()
            .map_err(|_| Error::schema(format!("{}: row {}: bad frequency", path.display(), idx + 2)))?;
        let g_db: f64 = g
            .trim()
            .parse()
            .map_err(|_| Error::schema(format!("{}: row {}: bad gain", path.display(), idx + 2)))?;
        if !f.is_finite() || !g_db.is_finite() {
            return Err(Error::schema(format!(
                "{}: row {}: non-finite value",
                path.display(),
                idx + 2
            )));
        }
        freqs.push(f);
        gain.push(10f64.powf(g_db / 10.0));
    }
    if freqs.len() < 2 {
        return Err(Error::schema("gain file needs at least two rows"));
    }
    Ok(GainSpectrum { freqs, gain })
}

/// Calibrate the pump current for the configured target peak gain; a
/// maintenance entry used to refresh the preset constant.
pub fn recalibrate_pump(config: &ExperimentConfig, target_peak_db: f64) -> Result<f64> {
    let (geometry, curve) = biased_curve(config)?;
    let op = config.operating_point();
    let probe: Vec<f64> = (0..23).map(|k| 3.0e9 + k as f64 * 0.25e9).collect();
    cme::calibrate_pump_current(&op, &curve, &geometry, &probe, target_peak_db)
}
