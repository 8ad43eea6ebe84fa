//! Three-wave-mixing coupled-mode propagation along the nonlinear line.
//!
//! Pump, signal, and idler envelopes evolve as
//!
//! ```text
//! da_p/dz = i·β_p·[κ·a_s·a_i·e^{+iΔβ₀z} + σ·(|a_p|² + 2|a_s|² + 2|a_i|²)·a_p] − (α_p/2)·a_p
//! da_s/dz = i·β_s·[κ·a_p·a_i*·e^{−iΔβ₀z} + σ·(|a_s|² + 2|a_p|² + 2|a_i|²)·a_s] − (α_s/2)·a_s
//! da_i/dz = i·β_i·[κ·a_p·a_s*·e^{−iΔβ₀z} + σ·(|a_i|² + 2|a_p|² + 2|a_s|²)·a_i] − (α_i/2)·a_i
//! ```
//!
//! with `κ = I_DC/(2·I*²)` and `σ = 1/(8·I*²)` from the quadratic kinetic
//! inductance, `Δβ₀` the static phase mismatch from the dispersion curve,
//! and `α` the measured loss. In lossless runs the equations conserve the
//! photon fluxes `|a_m|²/β_m` (Manley–Rowe).

use num_complex::Complex64;

use crate::constants::{db_to_ratio, ratio_to_db, watts_to_dbm};
use crate::device::{dc_retuning, DeviceGeometry};
use crate::dispersion::{phase_mismatch, DispersionCurve};
use crate::{Error, Result};

mod rk;

/// Default relative tolerance of the adaptive integrator.
pub const RTOL: f64 = 1e-9;

/// Number of uniform z-output points of a propagation.
pub const DENSE_POINTS: usize = 1001;

/// Vacuum-scale small-signal seed: 120 dB below the pump power.
pub const SMALL_SIGNAL_SEED_DB: f64 = -120.0;

/// DC bias, pump tone, and probe signal defining a solver run.
#[derive(Debug, Clone, Copy)]
pub struct OperatingPoint {
    /// DC bias current \[A\].
    pub i_dc: f64,
    /// Pump frequency \[Hz\].
    pub f_pump: f64,
    /// Pump current amplitude at the device input \[A\].
    pub i_pump: f64,
    /// Signal frequency \[Hz\].
    pub f_signal: f64,
    /// Signal input power \[W\].
    pub signal_power_w: f64,
    /// Signal phase relative to the pump \[rad\]; matters in degenerate mode.
    pub signal_phase: f64,
}

impl OperatingPoint {
    /// Check the bias/pump headroom and pump placement.
    pub fn validate(&self, geometry: &DeviceGeometry, curve: &DispersionCurve) -> Result<()> {
        if self.i_dc.abs() + self.i_pump.abs() >= geometry.i_c {
            return Err(Error::domain(format!(
                "superconductivity broken: |I_DC| + |I_pump| = {:.3e} A exceeds I_c = {:.3e} A",
                self.i_dc.abs() + self.i_pump.abs(),
                geometry.i_c
            )));
        }
        if curve.frequency_in_gap(self.f_pump) {
            return Err(Error::domain(format!(
                "pump at {:.4e} Hz sits inside a bandgap",
                self.f_pump
            )));
        }
        if !(self.f_pump > 0.0) {
            return Err(Error::domain("pump frequency must be positive"));
        }
        if self.signal_power_w < 0.0 {
            return Err(Error::domain("signal power must be non-negative"));
        }
        Ok(())
    }

    /// Signal current amplitude from the input power and the biased
    /// loaded-line impedance, `P = |I|²·Z0/2`.
    pub fn signal_current(&self, geometry: &DeviceGeometry) -> Result<f64> {
        let z0 = dc_retuning(geometry, self.i_dc)?.z0;
        Ok((2.0 * self.signal_power_w / z0).sqrt())
    }
}

/// Coefficient-level description of one three-wave propagation.
///
/// [`propagate_3wm`] fills this from the physics; tests and oracles may
/// construct it directly (e.g. with `sigma = 0` for the undepleted
/// closed-form comparison).
#[derive(Debug, Clone, Copy)]
pub struct CmeSystem {
    pub beta_p: f64,
    pub beta_s: f64,
    pub beta_i: f64,
    /// Power attenuation rates \[nepers/m\].
    pub alpha_p: f64,
    pub alpha_s: f64,
    pub alpha_i: f64,
    /// Three-wave coupling `I_DC/(2·I*²)` \[1/A\].
    pub kappa: f64,
    /// Self/cross phase modulation `1/(8·I*²)` \[1/A²\].
    pub sigma: f64,
    /// Static phase mismatch `β_p − β_s − β_i` \[rad/m\].
    pub delta_beta0: f64,
}

impl CmeSystem {
    /// Assemble the coefficients for an operating point on a curve.
    pub fn from_physics(
        op: &OperatingPoint,
        curve: &DispersionCurve,
        geometry: &DeviceGeometry,
    ) -> Result<Self> {
        let f_idler = op.f_pump - op.f_signal;
        if !(op.f_signal > 0.0 && op.f_signal < op.f_pump) {
            return Err(Error::domain("signal frequency must lie in (0, f_pump)"));
        }
        let i_star2 = geometry.i_star * geometry.i_star;
        Ok(CmeSystem {
            beta_p: curve.re_beta_at(op.f_pump)?,
            beta_s: curve.re_beta_at(op.f_signal)?,
            beta_i: curve.re_beta_at(f_idler)?,
            alpha_p: geometry.attenuation_power_per_m(op.f_pump),
            alpha_s: geometry.attenuation_power_per_m(op.f_signal),
            alpha_i: geometry.attenuation_power_per_m(f_idler),
            kappa: op.i_dc / (2.0 * i_star2),
            sigma: 1.0 / (8.0 * i_star2),
            delta_beta0: phase_mismatch(op.f_signal, op.f_pump, curve)?,
        })
    }

    fn rhs(&self, z: f64, y: &[Complex64; 3]) -> [Complex64; 3] {
        let [ap, as_, ai] = *y;
        let i = Complex64::i();
        let phase = Complex64::from_polar(1.0, self.delta_beta0 * z);
        let p2 = ap.norm_sqr();
        let s2 = as_.norm_sqr();
        let i2 = ai.norm_sqr();
        let dap = i * self.beta_p * (self.kappa * as_ * ai * phase + self.sigma * (p2 + 2.0 * s2 + 2.0 * i2) * ap)
            - 0.5 * self.alpha_p * ap;
        let das = i * self.beta_s
            * (self.kappa * ap * ai.conj() * phase.conj() + self.sigma * (s2 + 2.0 * p2 + 2.0 * i2) * as_)
            - 0.5 * self.alpha_s * as_;
        let dai = i * self.beta_i
            * (self.kappa * ap * as_.conj() * phase.conj() + self.sigma * (i2 + 2.0 * p2 + 2.0 * s2) * ai)
            - 0.5 * self.alpha_i * ai;
        [dap, das, dai]
    }

    /// Degenerate reduction at `f_s = f_p/2`: signal and idler are one
    /// wave, so the pump source term carries a factor ½ (a single pump
    /// photon splits into two signal photons).
    fn rhs_degenerate(&self, z: f64, y: &[Complex64; 2]) -> [Complex64; 2] {
        let [ap, as_] = *y;
        let i = Complex64::i();
        let phase = Complex64::from_polar(1.0, self.delta_beta0 * z);
        let p2 = ap.norm_sqr();
        let s2 = as_.norm_sqr();
        let dap = i * self.beta_p * (0.5 * self.kappa * as_ * as_ * phase + self.sigma * (p2 + 2.0 * s2) * ap)
            - 0.5 * self.alpha_p * ap;
        let das = i * self.beta_s
            * (self.kappa * ap * as_.conj() * phase.conj() + self.sigma * (s2 + 2.0 * p2) * as_)
            - 0.5 * self.alpha_s * as_;
        [dap, das]
    }

}

/// Complex mode amplitudes along the line.
#[derive(Debug, Clone)]
pub struct ModeAmplitudes {
    pub z_grid: Vec<f64>,
    pub a_p: Vec<Complex64>,
    pub a_s: Vec<Complex64>,
    pub a_i: Vec<Complex64>,
    /// Coefficients the run was integrated with.
    pub system: CmeSystem,
}

impl ModeAmplitudes {
    pub fn output_signal(&self) -> Complex64 {
        *self.a_s.last().unwrap()
    }

    pub fn input_signal(&self) -> Complex64 {
        self.a_s[0]
    }

    /// Photon fluxes `|a|²/β` of (pump, signal, idler) at z index `k`.
    pub fn photon_fluxes(&self, k: usize) -> (f64, f64, f64) {
        (
            self.a_p[k].norm_sqr() / self.system.beta_p,
            self.a_s[k].norm_sqr() / self.system.beta_s,
            self.a_i[k].norm_sqr() / self.system.beta_i,
        )
    }

    /// Largest relative violation of the Manley–Rowe invariants
    /// `Φ_p + Φ_s`, `Φ_p + Φ_i` over the propagation (lossless runs).
    pub fn manley_rowe_violation(&self) -> f64 {
        let (p0, s0, i0) = self.photon_fluxes(0);
        let c1 = p0 + s0;
        let c2 = p0 + i0;
        let scale = c1.max(c2);
        let mut worst = 0.0f64;
        for k in 0..self.z_grid.len() {
            let (p, s, i) = self.photon_fluxes(k);
            worst = worst.max(((p + s) - c1).abs() / scale);
            worst = worst.max(((p + i) - c2).abs() / scale);
        }
        worst
    }
}

fn uniform_grid(length: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| length * k as f64 / (n - 1) as f64).collect()
}

/// Integrate a coefficient-level system from explicit seeds.
///
/// This is the entry the analytic oracle is checked against; the
/// physics-level [`propagate_3wm`] delegates here.
pub fn propagate_system(
    system: &CmeSystem,
    a_p0: Complex64,
    a_s0: Complex64,
    a_i0: Complex64,
    length: f64,
    rtol: f64,
) -> Result<ModeAmplitudes> {
    let z_grid = uniform_grid(length, DENSE_POINTS);
    let seeds = [a_p0, a_s0, a_i0];
    let scale = seeds.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let atol = rtol * scale * 1e-6 + 1e-300;
    let ys = rk::integrate_nodes(
        |z, y| system.rhs(z, y),
        seeds,
        &z_grid,
        rtol,
        atol,
        scale * 1e6,
    )?;
    Ok(ModeAmplitudes {
        z_grid,
        a_p: ys.iter().map(|y| y[0]).collect(),
        a_s: ys.iter().map(|y| y[1]).collect(),
        a_i: ys.iter().map(|y| y[2]).collect(),
        system: *system,
    })
}

/// Propagate pump, signal, and idler for an operating point.
pub fn propagate_3wm(
    op: &OperatingPoint,
    curve: &DispersionCurve,
    geometry: &DeviceGeometry,
) -> Result<ModeAmplitudes> {
    op.validate(geometry, curve)?;
    let system = CmeSystem::from_physics(op, curve, geometry)?;
    let a_p0 = Complex64::new(op.i_pump, 0.0);
    let a_s0 = Complex64::from_polar(op.signal_current(geometry)?, op.signal_phase);
    propagate_system(&system, a_p0, a_s0, Complex64::new(0.0, 0.0), geometry.line_length, RTOL)
}

/// Closed-form undepleted, lossless parametric gain:
/// `G = |cosh(γL) + (iΔβ/2γ)·sinh(γL)|²` with `γ = √(g² − (Δβ/2)²)`.
///
/// The `γ → 0` branch point is crossed continuously (series expansion of
/// `sinh(γL)/γ`).
pub fn analytic_undepleted_gain(g: f64, delta_beta: f64, length: f64) -> f64 {
    let gamma2 = Complex64::new(g * g - 0.25 * delta_beta * delta_beta, 0.0);
    let gamma = gamma2.sqrt();
    let gl = gamma * length;
    let sinhc = if gl.norm() < 1e-4 {
        // sinh(x)/x = 1 + x²/6 + x⁴/120 + ...
        let x2 = gl * gl;
        length * (1.0 + x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        gl.sinh() / gamma
    };
    let amp = gl.cosh() + Complex64::i() * (0.5 * delta_beta) * sinhc;
    amp.norm_sqr()
}

/// Gain spectrum over a signal-frequency grid.
#[derive(Debug, Clone)]
pub struct GainSpectrum {
    pub freqs: Vec<f64>,
    /// Power gain (on/off normalized), dimensionless ratio per point.
    pub gain: Vec<f64>,
}

impl GainSpectrum {
    pub fn gain_db(&self, k: usize) -> f64 {
        ratio_to_db(self.gain[k])
    }

    /// Peak gain and its frequency.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = (self.freqs[0], self.gain[0]);
        for k in 1..self.freqs.len() {
            if self.gain[k] > best.1 {
                best = (self.freqs[k], self.gain[k]);
            }
        }
        best
    }

    /// Total bandwidth (sum of grid intervals) with gain above `level_db`.
    pub fn bandwidth_above_db(&self, level_db: f64) -> f64 {
        let level = db_to_ratio(level_db);
        let mut bw = 0.0;
        for k in 1..self.freqs.len() {
            if self.gain[k] >= level && self.gain[k - 1] >= level {
                bw += self.freqs[k] - self.freqs[k - 1];
            }
        }
        bw
    }

    /// Linear interpolation of the gain at `f`.
    pub fn gain_at(&self, f: f64) -> Result<f64> {
        let first = *self.freqs.first().unwrap();
        let last = *self.freqs.last().unwrap();
        if !(f >= first && f <= last) {
            return Err(Error::domain(format!(
                "frequency {f:.4e} Hz outside gain spectrum [{first:.4e}, {last:.4e}]"
            )));
        }
        let idx = match self.freqs.binary_search_by(|p| p.partial_cmp(&f).unwrap()) {
            Ok(i) => return Ok(self.gain[i]),
            Err(i) => i,
        };
        let t = (f - self.freqs[idx - 1]) / (self.freqs[idx] - self.freqs[idx - 1]);
        Ok(self.gain[idx - 1] * (1.0 - t) + self.gain[idx] * t)
    }

    /// Export as CSV: `f_Hz,gain_dB`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "f_Hz,gain_dB")?;
        for k in 0..self.freqs.len() {
            writeln!(w, "{:e},{:e}", self.freqs[k], self.gain_db(k))?;
        }
        Ok(())
    }
}

/// On/off-normalized signal power gain of a finished run:
/// `G = |a_s(L)/a_s(0)|²·e^{+α_s·L}` (the passive pump-off transmission
/// is divided out, loss during amplification stays inside G).
fn on_off_gain(run: &ModeAmplitudes, length: f64) -> f64 {
    let ratio = run.output_signal().norm_sqr() / run.input_signal().norm_sqr();
    ratio * (run.system.alpha_s * length).exp()
}

/// Small-signal gain spectrum: one vacuum-seeded run per grid frequency.
pub fn gain_spectrum(
    op: &OperatingPoint,
    curve: &DispersionCurve,
    geometry: &DeviceGeometry,
    freq_grid: &[f64],
) -> Result<GainSpectrum> {
    if freq_grid.is_empty() {
        return Err(Error::domain("empty gain frequency grid"));
    }
    op.validate(geometry, curve)?;
    let seed_power = pump_power_w(op, geometry)? * db_to_ratio(SMALL_SIGNAL_SEED_DB);
    let mut gain = Vec::with_capacity(freq_grid.len());
    for &f_s in freq_grid {
        let point = OperatingPoint {
            f_signal: f_s,
            signal_power_w: seed_power,
            signal_phase: 0.0,
            ..*op
        };
        if curve.frequency_in_gap(f_s) || curve.frequency_in_gap(op.f_pump - f_s) {
            return Err(Error::domain(format!(
                "signal grid point {f_s:.4e} Hz (or its idler) falls inside a bandgap"
            )));
        }
        let run = propagate_3wm(&point, curve, geometry)
            .map_err(|e| Error::numerical(format!("gain point at {f_s:.4e} Hz: {e}")))?;
        gain.push(on_off_gain(&run, geometry.line_length));
    }
    Ok(GainSpectrum {
        freqs: freq_grid.to_vec(),
        gain,
    })
}

/// Pump power at the device input from its current amplitude.
pub fn pump_power_w(op: &OperatingPoint, geometry: &DeviceGeometry) -> Result<f64> {
    let z0 = dc_retuning(geometry, op.i_dc)?.z0;
    Ok(op.i_pump * op.i_pump * z0 / 2.0)
}

/// Quadrature gains of the degenerate (phase-sensitive) point.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureGains {
    /// Maximum of `G(φ)` over the signal phase.
    pub g_a: f64,
    /// Minimum of `G(φ)`.
    pub g_sq: f64,
    /// Signal phase of maximum gain \[rad\].
    pub phase_amplified: f64,
    /// Signal phase of minimum gain, π/2 from the amplified one \[rad\].
    pub phase_squeezed: f64,
    mu: Complex64,
    nu: Complex64,
}

impl QuadratureGains {
    /// Raw output/input power gain at signal phase `phi`.
    pub fn gain_at_phase(&self, phi: f64) -> f64 {
        let e = Complex64::from_polar(1.0, phi);
        (self.mu * e + self.nu * e.conj()).norm_sqr()
    }
}

/// Phase-sensitive gains at `f_s = f_p/2`.
///
/// The signal dynamics at vacuum-scale seeds are linear in `(a_s, a_s*)`,
/// so the full phase sweep is characterized by two propagations a quarter
/// period apart; `G(φ)` then has the exact form
/// `|μ·e^{iφ} + ν·e^{−iφ}|²` whose extrema are `(|μ| ± |ν|)²`.
/// Unlike the non-degenerate spectrum these are raw output/input ratios
/// (loss is not divided out), so `G_a·G_sq = e^{−2α_sL}` with loss and
/// exactly 1 without.
pub fn degenerate_quadrature_gains(
    op: &OperatingPoint,
    curve: &DispersionCurve,
    geometry: &DeviceGeometry,
) -> Result<QuadratureGains> {
    op.validate(geometry, curve)?;
    let f_half = op.f_pump / 2.0;
    if (op.f_signal - f_half).abs() > 1e-6 * f_half {
        return Err(Error::domain("degenerate mode requires f_signal = f_pump/2 exactly"));
    }
    let mut system = CmeSystem::from_physics(
        &OperatingPoint {
            f_signal: f_half,
            ..*op
        },
        curve,
        geometry,
    )?;
    system.beta_i = system.beta_s;
    system.alpha_i = system.alpha_s;

    let a_p0 = Complex64::new(op.i_pump, 0.0);
    let seed_ref = if op.i_pump > 0.0 {
        op.i_pump
    } else {
        geometry.i_c
    };
    let seed = seed_ref * db_to_ratio(SMALL_SIGNAL_SEED_DB).sqrt();
    let length = geometry.line_length;
    let mut outputs = [Complex64::default(); 2];
    for (k, phi) in [0.0, std::f64::consts::FRAC_PI_2].iter().enumerate() {
        let a_s0 = Complex64::from_polar(seed, *phi);
        let z_grid = uniform_grid(length, DENSE_POINTS);
        let scale = a_p0.norm().max(seed);
        let atol = RTOL * seed * 1e-3 + 1e-300;
        let ys = rk::integrate_nodes(
            |z, y| system.rhs_degenerate(z, y),
            [a_p0, a_s0],
            &z_grid,
            RTOL,
            atol,
            scale * 1e6,
        )?;
        outputs[k] = ys.last().unwrap()[1];
    }
    let mu = (outputs[0] - Complex64::i() * outputs[1]) / (2.0 * seed);
    let nu = (outputs[0] + Complex64::i() * outputs[1]) / (2.0 * seed);
    let g_a = (mu.norm() + nu.norm()).powi(2);
    let g_sq = (mu.norm() - nu.norm()).powi(2);
    // G(φ) = |μ|² + |ν|² + 2|μν|·cos(2φ + arg(μν̄)); maximum where the
    // cosine argument vanishes.
    let phase_amplified = if nu.norm() > 0.0 {
        (-(mu * nu.conj()).arg() / 2.0).rem_euclid(std::f64::consts::PI)
    } else {
        0.0
    };
    Ok(QuadratureGains {
        g_a,
        g_sq,
        phase_amplified,
        phase_squeezed: phase_amplified + std::f64::consts::FRAC_PI_2,
        mu,
        nu,
    })
}

/// Gain-compression sweep result.
#[derive(Debug, Clone)]
pub struct CompressionCurve {
    pub powers_dbm: Vec<f64>,
    pub gains_db: Vec<f64>,
    /// Input power where the gain is 1 dB below small-signal \[dBm\].
    pub p_1db_dbm: f64,
    pub small_signal_gain_db: f64,
}

impl CompressionCurve {
    /// Export as CSV: `P_dBm,gain_dB`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "P_dBm,gain_dB")?;
        for k in 0..self.powers_dbm.len() {
            writeln!(w, "{:e},{:e}", self.powers_dbm[k], self.gains_db[k])?;
        }
        Ok(())
    }
}

/// Full (pump-depleting) gain vs. signal input power, with the 1 dB
/// compression point log-interpolated on the grid.
pub fn compression_curve(
    op: &OperatingPoint,
    curve: &DispersionCurve,
    geometry: &DeviceGeometry,
    signal_powers_w: &[f64],
) -> Result<CompressionCurve> {
    if signal_powers_w.len() < 2 || !signal_powers_w.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::domain("signal power grid must be ascending with >= 2 points"));
    }
    op.validate(geometry, curve)?;
    // Small-signal reference from a vacuum-scale seed.
    let seed_power = pump_power_w(op, geometry)? * db_to_ratio(SMALL_SIGNAL_SEED_DB);
    let reference = OperatingPoint {
        signal_power_w: seed_power,
        ..*op
    };
    let run = propagate_3wm(&reference, curve, geometry)?;
    let g_ss_db = ratio_to_db(on_off_gain(&run, geometry.line_length));

    let mut powers_dbm = Vec::with_capacity(signal_powers_w.len());
    let mut gains_db = Vec::with_capacity(signal_powers_w.len());
    for &p in signal_powers_w {
        let point = OperatingPoint {
            signal_power_w: p,
            ..*op
        };
        let run = propagate_3wm(&point, curve, geometry)?;
        powers_dbm.push(watts_to_dbm(p));
        gains_db.push(ratio_to_db(on_off_gain(&run, geometry.line_length)));
    }

    let target = g_ss_db - 1.0;
    let mut p_1db = None;
    for k in 1..gains_db.len() {
        if gains_db[k - 1] > target && gains_db[k] <= target {
            let t = (gains_db[k - 1] - target) / (gains_db[k - 1] - gains_db[k]);
            p_1db = Some(powers_dbm[k - 1] + t * (powers_dbm[k] - powers_dbm[k - 1]));
            break;
        }
    }
    let p_1db_dbm = p_1db.ok_or_else(|| {
        Error::numerical(format!(
            "P_1dB not bracketed: gain stays above {target:.2} dB on the power grid"
        ))
    })?;
    Ok(CompressionCurve {
        powers_dbm,
        gains_db,
        p_1db_dbm,
        small_signal_gain_db: g_ss_db,
    })
}

/// Stability of the device against round-trip parametric oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscillationStatus {
    Stable,
    Oscillating,
}

/// Oscillation criterion: the device oscillates when gain exceeds the
/// round-trip reflection loss. Returns the status and the margin in dB
/// (round-trip loss minus gain, positive = stable).
pub fn oscillation_check(
    gain_db: f64,
    reflect_in_db: f64,
    reflect_out_db: f64,
) -> Result<(OscillationStatus, f64)> {
    if reflect_in_db > 0.0 || reflect_out_db > 0.0 {
        return Err(Error::domain("reflection magnitudes must be <= 0 dB"));
    }
    let round_trip_loss = reflect_in_db.abs() + reflect_out_db.abs();
    let margin = round_trip_loss - gain_db;
    let status = if gain_db > round_trip_loss {
        OscillationStatus::Oscillating
    } else {
        OscillationStatus::Stable
    };
    Ok((status, margin))
}

/// Calibrate the device-referred pump current so the small-signal gain
/// peaks at `target_peak_db` over `probe_freqs`. The gain is monotone in
/// pump current, so a bisection converges; fails if the target is not
/// reachable below the critical current.
pub fn calibrate_pump_current(
    op_template: &OperatingPoint,
    curve: &DispersionCurve,
    geometry: &DeviceGeometry,
    probe_freqs: &[f64],
    target_peak_db: f64,
) -> Result<f64> {
    let peak_db = |i_pump: f64| -> Result<f64> {
        let op = OperatingPoint {
            i_pump,
            ..*op_template
        };
        let spec = gain_spectrum(&op, curve, geometry, probe_freqs)?;
        Ok(ratio_to_db(spec.peak().1))
    };
    let mut hi = 0.999 * (geometry.i_c - op_template.i_dc.abs());
    if !(hi > 0.0) {
        return Err(Error::domain("no pump headroom below the critical current"));
    }
    if peak_db(hi)? < target_peak_db {
        return Err(Error::domain(format!(
            "target peak gain {target_peak_db} dB unreachable below I_c (got {:.2} dB)",
            peak_db(hi)?
        )));
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if peak_db(mid)? < target_peak_db {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-12 * geometry.i_c {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
