//! Acceptance suite: one test per criterion. Each test prints a
//! `ACCEPTANCE <n> ...: PASS` line with the measured values (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use twpa_core::cme::{
    analytic_undepleted_gain, compression_curve, degenerate_quadrature_gains, gain_spectrum,
    propagate_system, CmeSystem, OperatingPoint, RTOL,
};
use twpa_core::constants::{ratio_to_db, C_LIGHT};
use twpa_core::device::DeviceGeometry;
use twpa_core::dispersion::{
    bloch_dispersion, bloch_dispersion_with, BlochOptions, DispersionCurve, StubModel,
};
use twpa_core::noise::{pump_heating_excess, quantum_limit};
use twpa_core::pipeline::{
    fit_noise_model, run_y_factor, squeezing_analysis, synthesize_squeeze_measurements,
    CalibrationScale, DeviceResponse, SqueezeForwardPoint, TraceTimes,
};
use twpa_studio::config::ExperimentConfig;

fn preset() -> &'static ExperimentConfig {
    static CONFIG: OnceLock<ExperimentConfig> = OnceLock::new();
    CONFIG.get_or_init(ExperimentConfig::paper_device_preset)
}

/// Preset geometry and its biased dispersion curve on the preset grid.
fn preset_device() -> &'static (DeviceGeometry, DispersionCurve) {
    static DEVICE: OnceLock<(DeviceGeometry, DispersionCurve)> = OnceLock::new();
    DEVICE.get_or_init(|| {
        let config = preset();
        let geometry = config.geometry().expect("preset geometry");
        let curve = bloch_dispersion(
            &config.dispersion_grid(),
            &geometry,
            config.operating_point.i_dc_a,
        )
        .expect("preset dispersion");
        (geometry, curve)
    })
}

struct OracleRun {
    g: f64,
    delta_beta: f64,
    length: f64,
    solver_gain: f64,
    oracle_gain: f64,
    manley_rowe: f64,
}

/// Lossless, undepleted, fixed-mismatch solver runs shared by criteria
/// 1 and 2.
fn oracle_runs() -> &'static (Vec<OracleRun>, Duration) {
    static RUNS: OnceLock<(Vec<OracleRun>, Duration)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let beta = 15_000.0;
        let mut runs = Vec::new();
        for &length in &[0.05, 0.086] {
            for &gl in &[0.2, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.6, 4.2] {
                // Mismatch as a multiple of 2g, crossing the γ = 0 branch
                // point at exactly 1.
                for &ratio in &[0.0, 0.3, 0.7, 0.99, 1.0, 1.01, 1.5, 2.5, 5.0] {
                    let g = gl / length;
                    let delta_beta = ratio * 2.0 * g;
                    let system = CmeSystem {
                        beta_p: 2.0 * beta,
                        beta_s: beta,
                        beta_i: beta,
                        alpha_p: 0.0,
                        alpha_s: 0.0,
                        alpha_i: 0.0,
                        kappa: g / beta,
                        sigma: 0.0,
                        delta_beta0: delta_beta,
                    };
                    let seed = 1e-6;
                    let run = propagate_system(
                        &system,
                        Complex64::new(1.0, 0.0),
                        Complex64::new(seed, 0.0),
                        Complex64::new(0.0, 0.0),
                        length,
                        RTOL,
                    )
                    .expect("oracle propagation");
                    runs.push(OracleRun {
                        g,
                        delta_beta,
                        length,
                        solver_gain: run.output_signal().norm_sqr() / (seed * seed),
                        oracle_gain: analytic_undepleted_gain(g, delta_beta, length),
                        manley_rowe: run.manley_rowe_violation(),
                    });
                }
            }
        }
        (runs, start.elapsed())
    })
}

#[test]
fn acceptance_01_solver_matches_analytic_oracle() {
    let (runs, elapsed) = oracle_runs();
    assert!(runs.len() >= 100, "need at least 100 triples, got {}", runs.len());
    let mut worst = 0.0f64;
    let mut max_gain_db = 0.0f64;
    for r in runs {
        let rel = (r.solver_gain - r.oracle_gain).abs() / r.oracle_gain;
        assert!(
            rel < 1e-6,
            "triple (g={}, dB={}, L={}): solver {} vs oracle {} (rel {rel:.2e})",
            r.g,
            r.delta_beta,
            r.length,
            r.solver_gain,
            r.oracle_gain
        );
        worst = worst.max(rel);
        max_gain_db = max_gain_db.max(ratio_to_db(r.oracle_gain));
    }
    assert!(max_gain_db >= 30.0, "triples must span gains up to 30 dB");
    assert!(
        *elapsed < Duration::from_secs(10),
        "runtime {elapsed:?} exceeds 10 s"
    );
    println!(
        "ACCEPTANCE 1 (solver vs analytic oracle): PASS — {} triples to {max_gain_db:.1} dB, worst rel dev {worst:.2e}, {elapsed:?}",
        runs.len()
    );
}

#[test]
fn acceptance_02_manley_rowe_conservation() {
    let (runs, _) = oracle_runs();
    let mut worst = 0.0f64;
    for r in runs {
        assert!(
            r.manley_rowe < 1e-6,
            "photon-flux violation {:.2e} at (g={}, dB={}, L={})",
            r.manley_rowe,
            r.g,
            r.delta_beta,
            r.length
        );
        worst = worst.max(r.manley_rowe);
    }
    println!(
        "ACCEPTANCE 2 (Manley-Rowe conservation): PASS — worst violation {worst:.2e} over {} lossless runs",
        runs.len()
    );
}

#[test]
fn acceptance_03_quantum_limit_recovery() {
    let start = Instant::now();
    let config = preset();
    let (geometry, curve) = preset_device();
    let grid = config.noise_grid();
    let op = config.operating_point();
    let spectrum = gain_spectrum(&op, curve, geometry, &grid).expect("noise-band spectrum");
    let chain = config.chain_model(geometry).expect("chain model");
    let device = DeviceResponse {
        gain: &spectrum,
        added_noise_quanta: None,
        pump_excess_quanta: 0.0,
    };
    let outcome = run_y_factor(
        &grid,
        &device,
        &chain,
        &TraceTimes::default(),
        CalibrationScale::Quanta,
        config.seed,
    )
    .expect("y-factor run");

    let mut sum_dev = 0.0;
    for (k, &g) in spectrum.gain.iter().enumerate() {
        let ql = quantum_limit(g.max(1.0)).unwrap();
        sum_dev += (outcome.added.added[k] - ql).abs();
    }
    let mean_dev = sum_dev / grid.len() as f64;
    let elapsed = start.elapsed();
    assert!(
        mean_dev < 0.02,
        "mean |A - QL| = {mean_dev:.4} quanta exceeds 0.02"
    );
    assert!(
        elapsed < Duration::from_secs(60),
        "runtime {elapsed:?} exceeds 60 s"
    );
    println!(
        "ACCEPTANCE 3 (quantum-limit recovery): PASS — mean |A - QL| = {mean_dev:.2e} quanta over {} points, {elapsed:?}",
        grid.len()
    );
}

#[test]
fn acceptance_04_degenerate_product_law() {
    let config = preset();
    let (geometry, curve) = preset_device();
    let mut lossless = geometry.clone();
    lossless.loss_slope_db_per_ghz = 0.0;
    let f_pump = config.squeeze.f_pump_hz;
    let base = OperatingPoint {
        f_pump,
        f_signal: f_pump / 2.0,
        signal_power_w: 0.0,
        signal_phase: 0.0,
        ..config.operating_point()
    };
    let mut max_g_a_db = 0.0f64;
    let mut worst = 0.0f64;
    for frac in [0.02, 0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.75, 0.85, 0.95, 1.0] {
        let op = OperatingPoint {
            i_pump: base.i_pump * frac,
            ..base
        };
        let q = degenerate_quadrature_gains(&op, curve, &lossless).expect("degenerate gains");
        let g_a_db = ratio_to_db(q.g_a);
        let product = g_a_db + ratio_to_db(q.g_sq);
        if g_a_db <= 23.0 + 1e-9 {
            assert!(
                product.abs() < 0.01,
                "product {product:.4} dB at G_a = {g_a_db:.2} dB"
            );
        }
        worst = worst.max(product.abs());
        max_g_a_db = max_g_a_db.max(g_a_db);
    }
    assert!(
        max_g_a_db >= 23.0,
        "sweep only reached G_a = {max_g_a_db:.1} dB, need 23 dB"
    );
    println!(
        "ACCEPTANCE 4 (G_a·G_sq = 1, lossless): PASS — worst |G_a_dB + G_sq_dB| = {worst:.2e} dB up to G_a = {max_g_a_db:.1} dB"
    );
}

#[test]
fn acceptance_05_preset_gain_reproduction() {
    let start = Instant::now();
    let config = preset();
    let (geometry, curve) = preset_device();
    let op = config.operating_point();
    let grid = config.gain_grid();
    assert_eq!(grid.len(), 500);
    let spectrum = gain_spectrum(&op, curve, geometry, &grid).expect("preset spectrum");
    let (f_peak, g_peak) = spectrum.peak();
    let peak_db = ratio_to_db(g_peak);
    let bw17 = spectrum.bandwidth_above_db(17.0);
    let bw12 = spectrum.bandwidth_above_db(12.0);
    let elapsed = start.elapsed();
    assert!(
        (17.0..=23.0).contains(&peak_db),
        "peak {peak_db:.2} dB outside 20 ± 3 dB"
    );
    assert!(bw17 >= 2e9, "only {:.2} GHz above 17 dB", bw17 / 1e9);
    assert!(bw12 >= 3e9, "only {:.2} GHz above 12 dB", bw12 / 1e9);
    assert!(
        elapsed < Duration::from_secs(300),
        "runtime {elapsed:?} exceeds 5 min"
    );
    println!(
        "ACCEPTANCE 5 (preset gain): PASS — peak {peak_db:.2} dB at {:.3} GHz, {:.2} GHz >= 17 dB, {:.2} GHz >= 12 dB, {elapsed:?}",
        f_peak / 1e9,
        bw17 / 1e9,
        bw12 / 1e9
    );
}

#[test]
fn acceptance_06_bandgap_placement() {
    let config = preset();
    let (geometry, curve) = preset_device();
    assert!(!curve.gaps.is_empty(), "preset device must show a bandgap");
    let (lo, hi) = curve.gaps[0];
    let center = (lo + hi) / 2.0;
    assert!(
        (8e9..=11e9).contains(&center),
        "lowest gap center {:.3} GHz outside [8, 11] GHz",
        center / 1e9
    );

    // Bragg oracle with stub dispersion disabled, unbiased line.
    let grid: Vec<f64> = (9_000..12_000).map(|k| k as f64 * 1e6).collect();
    let options = BlochOptions {
        stub_model: StubModel::StaticCapacitance,
        ..Default::default()
    };
    let static_curve =
        bloch_dispersion_with(&grid, geometry, 0.0, &options).expect("static-stub dispersion");
    assert_eq!(static_curve.gaps.len(), 1);
    let (slo, shi) = static_curve.gaps[0];
    let static_center = (slo + shi) / 2.0;
    let f_bragg = 0.0078 * C_LIGHT / (2.0 * config.device.stub_modulation_wavelength_m);
    let rel = (static_center - f_bragg).abs() / f_bragg;
    assert!(
        rel < 0.01,
        "static-stub gap center {:.4} GHz vs Bragg {:.4} GHz (rel {rel:.3})",
        static_center / 1e9,
        f_bragg / 1e9
    );
    println!(
        "ACCEPTANCE 6 (bandgap placement): PASS — gap center {:.3} GHz in [8, 11]; Bragg oracle {:.4} vs {:.4} GHz (rel {rel:.1e})",
        center / 1e9,
        static_center / 1e9,
        f_bragg / 1e9
    );
}

#[test]
fn acceptance_07_compression_point() {
    let config = preset();
    let (geometry, curve) = preset_device();
    let op = config.operating_point();
    let comp = compression_curve(&op, curve, geometry, &config.compression_grid_w())
        .expect("compression curve");
    assert!(
        (-60.0..=-54.0).contains(&comp.p_1db_dbm),
        "P_1dB = {:.2} dBm outside -57 ± 3 dBm",
        comp.p_1db_dbm
    );
    // Gain monotone nonincreasing beyond the small-signal plateau.
    let peak_idx = comp
        .gains_db
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    for k in peak_idx + 1..comp.gains_db.len() {
        assert!(
            comp.gains_db[k] <= comp.gains_db[k - 1] + 1e-6,
            "gain not monotone at row {k}"
        );
    }
    println!(
        "ACCEPTANCE 7 (compression): PASS — P_1dB = {:.2} dBm, small-signal gain {:.2} dB, monotone beyond plateau",
        comp.p_1db_dbm, comp.small_signal_gain_db
    );
}

#[test]
fn acceptance_08_noise_model_fit() {
    // Noiseless recovery to 1e-9.
    let gains: Vec<f64> = (0..20).map(|k| 10f64.powf(k as f64 * 0.12)).collect();
    let clean: Vec<(f64, f64)> = gains.iter().map(|&g| (g, 0.27 + 30.81 / g)).collect();
    let fit = fit_noise_model(&clean).unwrap();
    assert!((fit.n_hemt - 30.81).abs() < 1e-9, "N_HEMT off by {:.2e}", (fit.n_hemt - 30.81).abs());
    assert!((fit.n_a - 0.27).abs() < 1e-9);

    // 100 seeded trials at σ = 0.05 quanta; both parameters within 3σ in
    // at least 95 trials.
    let mut ok = 0;
    for seed in 0..100u64 {
        let mut rng = twpa_core::pipeline::rng::Rng::new(0xACCE_0000 + seed);
        let pts: Vec<(f64, f64)> = gains
            .iter()
            .map(|&g| (g, 0.27 + 30.81 / g + 0.05 * rng.next_normal()))
            .collect();
        let fit = fit_noise_model(&pts).unwrap();
        if (fit.n_hemt - 30.81).abs() <= 3.0 * fit.n_hemt_sigma
            && (fit.n_a - 0.27).abs() <= 3.0 * fit.n_a_sigma
        {
            ok += 1;
        }
    }
    assert!(ok >= 95, "only {ok}/100 trials recovered within 3σ");
    println!(
        "ACCEPTANCE 8 (noise-model fit): PASS — noiseless recovery exact to 1e-9; {ok}/100 noisy trials within 3σ"
    );
}

#[test]
fn acceptance_09_squeezing_round_trip() {
    let config = preset();
    let (geometry, curve) = preset_device();
    let chain = config.amp_chain_params();
    let f_pump = config.squeeze.f_pump_hz;
    let base = OperatingPoint {
        f_pump,
        f_signal: f_pump / 2.0,
        signal_power_w: 0.0,
        signal_phase: 0.0,
        ..config.operating_point()
    };

    // Ideal chain: lossless device, no injected noise.
    let mut lossless = geometry.clone();
    lossless.loss_slope_db_per_ghz = 0.0;
    let attens: Vec<f64> = (0..11).map(|k| 2.0 * k as f64).collect();
    let mut ideal_points = Vec::new();
    for &a in &attens {
        let op = OperatingPoint {
            i_pump: base.i_pump * 10f64.powf(-a / 20.0),
            ..base
        };
        let q = degenerate_quadrature_gains(&op, curve, &lossless).unwrap();
        ideal_points.push(SqueezeForwardPoint {
            atten_db: a,
            g_a: q.g_a,
            g_sq: q.g_sq,
            n_pa_true: 0.0,
        });
    }
    let meas = synthesize_squeeze_measurements(&ideal_points, &chain, 0.27, 30.81, 0.0, 7).unwrap();
    let ideal = squeezing_analysis(&meas, &chain).unwrap();
    let mut worst = 0.0f64;
    for r in &ideal {
        let dev = (r.squeezing_db - r.g_a_db).abs();
        assert!(
            dev < 0.05,
            "ideal line broken: squeezing {:.3} dB vs G_a {:.3} dB",
            r.squeezing_db,
            r.g_a_db
        );
        worst = worst.max(dev);
    }

    // Injected pump-heating noise (0.16 quanta at max pump, linear in
    // pump power) caps the extracted squeezing on the lossy device.
    let mut noisy_points = Vec::new();
    for k in 0..41 {
        let a = 0.5 * k as f64;
        let op = OperatingPoint {
            i_pump: base.i_pump * 10f64.powf(-a / 20.0),
            ..base
        };
        let q = degenerate_quadrature_gains(&op, curve, geometry).unwrap();
        noisy_points.push(SqueezeForwardPoint {
            atten_db: a,
            g_a: q.g_a,
            g_sq: q.g_sq,
            n_pa_true: config.amp_chain.n_pa_max_quanta * 10f64.powf(-a / 10.0),
        });
    }
    let meas = synthesize_squeeze_measurements(&noisy_points, &chain, 0.27, 30.81, 0.0, 7).unwrap();
    let noisy = squeezing_analysis(&meas, &chain).unwrap();
    let mut rows: Vec<_> = noisy.iter().collect();
    rows.sort_by(|a, b| a.g_a_db.partial_cmp(&b.g_a_db).unwrap());
    for w in rows.windows(2) {
        let d0 = w[0].g_a_db - w[0].squeezing_db;
        let d1 = w[1].g_a_db - w[1].squeezing_db;
        assert!(
            d1 > d0 - 1e-9,
            "below-ideal deviation must increase with G_a ({d0:.3} -> {d1:.3})"
        );
    }
    let best = rows
        .iter()
        .max_by(|a, b| a.squeezing_db.partial_cmp(&b.squeezing_db).unwrap())
        .unwrap();
    assert!(
        (7.0..=9.5).contains(&best.squeezing_db),
        "squeezing cap {:.2} dB not near 8 dB",
        best.squeezing_db
    );
    assert!(
        (9.0..=14.0).contains(&best.g_a_db),
        "cap located at G_a = {:.2} dB",
        best.g_a_db
    );
    println!(
        "ACCEPTANCE 9 (squeezing round trip): PASS — ideal line within {worst:.2e} dB; injected 0.16 quanta caps squeezing at {:.2} dB near G_a = {:.2} dB, deviation monotone",
        best.squeezing_db, best.g_a_db
    );
}

#[test]
fn acceptance_10_systematics() {
    // Pump-heating anchor.
    assert_eq!(pump_heating_excess(-15.7), 0.077);

    // Drift between reference states: calibration pair at t = 0, on/off
    // 100 minutes later at 0.01 dB/100 min.
    let config = preset();
    let (geometry, curve) = preset_device();
    let grid = config.noise_grid();
    let op = config.operating_point();
    let spectrum = gain_spectrum(&op, curve, geometry, &grid).unwrap();
    let chain = config.chain_model(geometry).unwrap();
    assert_eq!(chain.drift_db_per_100min, 0.01);
    let device = DeviceResponse {
        gain: &spectrum,
        added_noise_quanta: None,
        pump_excess_quanta: 0.0,
    };
    let drifted = run_y_factor(
        &grid,
        &device,
        &chain,
        &TraceTimes {
            hot: 0.0,
            cold: 0.0,
            on: 100.0,
            off: 100.0,
        },
        CalibrationScale::Quanta,
        config.seed,
    )
    .unwrap();
    let baseline = run_y_factor(
        &grid,
        &device,
        &chain,
        &TraceTimes::default(),
        CalibrationScale::Quanta,
        config.seed,
    )
    .unwrap();
    let offsets: Vec<f64> = (0..grid.len())
        .map(|k| drifted.added.added[k] - baseline.added.added[k])
        .collect();
    let mean = offsets.iter().sum::<f64>() / offsets.len() as f64;
    let ptp = offsets.iter().cloned().fold(f64::MIN, f64::max)
        - offsets.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        (0.1..=0.4).contains(&mean.abs()),
        "drift offset {:.3} quanta outside [0.1, 0.4]",
        mean.abs()
    );
    assert!(
        ptp < 0.05 * mean.abs(),
        "offset not frequency-independent (peak-to-peak {ptp:.2e})"
    );
    println!(
        "ACCEPTANCE 10 (systematics): PASS — drift offset {:.3} quanta (peak-to-peak {ptp:.1e}); pump heating 0.077 quanta at -15.7 dBm",
        mean.abs()
    );
}

#[test]
fn acceptance_11_byte_identical_reruns() {
    let base = std::env::temp_dir().join(format!("twpa-acceptance-{}", std::process::id()));
    let config_path = base.join("scenario.toml");
    std::fs::create_dir_all(&base).unwrap();

    // A stochastic scenario: radiometer noise and ripple on, compact
    // grids to keep the run short.
    let text = twpa_studio::config::PAPER_DEVICE_PRESET
        .replace("radiometer_noise = false", "radiometer_noise = true")
        .replace("n_avg = 1000", "n_avg = 4000000")
        .replace("ripple_amplitude = 0.0", "ripple_amplitude = 0.002")
        .replace("dispersion_f_step_hz = 1e6", "dispersion_f_step_hz = 5e6")
        .replace("gain_points = 500", "gain_points = 48")
        .replace("noise_points = 450", "noise_points = 64")
        .replace("points = 21", "points = 9");
    std::fs::write(&config_path, text).unwrap();

    let bin = env!("CARGO_BIN_EXE_twpa-studio");
    let run = |cmd: &str, out: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args([
                cmd,
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .stdout(std::process::Stdio::null())
            .status()
            .expect("spawn twpa-studio");
        assert!(status.success(), "{cmd} run failed");
    };

    let mut compared = 0;
    for cmd in ["gain", "noise", "squeeze"] {
        let out_a = base.join(format!("{cmd}_a"));
        let out_b = base.join(format!("{cmd}_b"));
        run(cmd, &out_a);
        run(cmd, &out_b);
        for entry in std::fs::read_dir(&out_a).unwrap() {
            let name = entry.unwrap().file_name();
            let a = std::fs::read(out_a.join(&name)).unwrap();
            let b = std::fs::read(out_b.join(&name)).unwrap();
            assert_eq!(a, b, "{cmd}/{name:?} differs between identical runs");
            compared += 1;
        }
    }
    std::fs::remove_dir_all(&base).ok();
    println!(
        "ACCEPTANCE 11 (determinism): PASS — {compared} output files byte-identical across re-runs of gain/noise/squeeze"
    );
}
