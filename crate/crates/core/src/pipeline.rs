//! Measurement-chain emulation and the y-factor analysis stack.
//!
//! Synthesizes spectrum-analyzer traces for the hot/cold/on/off switch
//! configurations with realistic systematics (standing-wave ripple, slow
//! gain drift, radiometer fluctuations), then runs the same calibration,
//! added-noise extraction, noise-model fitting, and squeezing analysis
//! that would be applied to real data. Externally measured traces in the
//! same CSV schema can be ingested and analyzed identically.

use std::io::BufRead;
use std::path::Path;

use crate::cme::GainSpectrum;
use crate::constants::PLANCK;
use crate::noise::{self, AmpChainParams};
use crate::{Error, Result};

pub mod rng;

/// Switch configuration a trace was measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Hot,
    Cold,
    TwpaOn,
    TwpaOff,
}

impl TraceKind {
    pub fn tag(&self) -> &'static str {
        match self {
            TraceKind::Hot => "HOT",
            TraceKind::Cold => "COLD",
            TraceKind::TwpaOn => "TWPA_ON",
            TraceKind::TwpaOff => "TWPA_OFF",
        }
    }

    fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "HOT" => Ok(TraceKind::Hot),
            "COLD" => Ok(TraceKind::Cold),
            "TWPA_ON" => Ok(TraceKind::TwpaOn),
            "TWPA_OFF" => Ok(TraceKind::TwpaOff),
            other => Err(Error::schema(format!("unknown trace config `{other}`"))),
        }
    }

    /// Ripple phase is tied to the cold-switch position: the hot load,
    /// the cold load, and the device path each see their own standing
    /// waves; on/off share the device path.
    fn switch_salt(&self) -> u64 {
        match self {
            TraceKind::Hot => 0x68F7_3C11,
            TraceKind::Cold => 0x2D99_A0B3,
            TraceKind::TwpaOn | TraceKind::TwpaOff => 0x51E0_94D7,
        }
    }

    fn stream_salt(&self) -> u64 {
        match self {
            TraceKind::Hot => 1,
            TraceKind::Cold => 2,
            TraceKind::TwpaOn => 3,
            TraceKind::TwpaOff => 4,
        }
    }
}

/// A spectrum-analyzer power trace (linear PSD in W/Hz).
#[derive(Debug, Clone)]
pub struct NoiseTrace {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub kind: TraceKind,
    /// Minutes since session start; drives the drift model.
    pub t_meas_min: f64,
    pub rbw_hz: f64,
    pub n_avg: u64,
}

/// Everything the synthesizer needs to know about the readout chain.
#[derive(Debug, Clone)]
pub struct ChainModel {
    /// Post-device (HEMT + room temperature) power gain, ratio.
    pub post_gain: f64,
    /// Post-chain noise referred to the calibration plane \[quanta\].
    pub post_noise_quanta: f64,
    pub t_hot_k: f64,
    pub t_cold_k: f64,
    /// TWPA input bath temperature \[K\].
    pub input_temp_k: f64,
    /// Fractional ripple amplitude ε.
    pub ripple_amplitude: f64,
    /// Unbiased ripple period \[Hz\].
    pub ripple_spacing_hz: f64,
    /// `v_ph(I_DC)/v_ph(0)`; rescales the ripple period on the device path.
    pub ripple_bias_scale: f64,
    pub drift_db_per_100min: f64,
    pub rbw_hz: f64,
    pub n_avg: u64,
    /// Draw multiplicative radiometer fluctuations.
    pub radiometer_noise: bool,
}

impl ChainModel {
    /// An ideal chain: no ripple, no drift, no radiometer noise.
    pub fn ideal(post_gain_db: f64, post_noise_quanta: f64) -> Self {
        ChainModel {
            post_gain: 10f64.powf(post_gain_db / 10.0),
            post_noise_quanta,
            t_hot_k: 3.38,
            t_cold_k: 0.02,
            input_temp_k: 0.02,
            ripple_amplitude: 0.0,
            ripple_spacing_hz: 8e6,
            ripple_bias_scale: 1.0,
            drift_db_per_100min: 0.0,
            rbw_hz: 1e6,
            n_avg: 1000,
            radiometer_noise: false,
        }
    }

    /// Relative radiometer fluctuation: `σ = 1/sqrt(rbw·τ_total)` with
    /// the default dwell `τ_total = n_avg/rbw`.
    pub fn radiometer_sigma(&self) -> f64 {
        let tau_total = self.n_avg as f64 / self.rbw_hz;
        1.0 / (self.rbw_hz * tau_total).sqrt()
    }
}

/// On-state device response seen by the synthesizer.
#[derive(Debug, Clone)]
pub struct DeviceResponse<'a> {
    pub gain: &'a GainSpectrum,
    /// Input-referred added noise per trace grid point; `None` means
    /// quantum limited, `½(1 − 1/G)`.
    pub added_noise_quanta: Option<&'a [f64]>,
    /// Frequency-independent pump-heating excess at the output plane.
    pub pump_excess_quanta: f64,
}

/// What to synthesize.
#[derive(Debug, Clone, Copy)]
pub struct TraceRequest {
    pub kind: TraceKind,
    pub t_meas_min: f64,
}

/// Synthesize one spectrum-analyzer trace.
///
/// `power(ν) = [occ(ν) + N_post]·hν·G_post·(1 + ripple)·drift·(1 + σ·ξ)`,
/// where the source occupancy depends on the switch configuration. Fixed
/// seeds give bit-identical traces.
pub fn synthesize_trace(
    req: &TraceRequest,
    freqs: &[f64],
    device: Option<&DeviceResponse<'_>>,
    chain: &ChainModel,
    seed: u64,
) -> Result<NoiseTrace> {
    if freqs.is_empty() || !freqs.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::domain("trace grid must be non-empty and ascending"));
    }
    let device = match req.kind {
        TraceKind::TwpaOn => Some(device.ok_or_else(|| {
            Error::config("TWPA_ON trace synthesis needs the device gain and added noise")
        })?),
        _ => None,
    };

    let mut stream = rng::Rng::new(seed ^ req.kind.switch_salt());
    let ripple_phase = std::f64::consts::TAU * stream.next_f64();
    let mut noise_stream = rng::Rng::new(seed.wrapping_mul(0x9E37_79B9).wrapping_add(req.kind.stream_salt()));

    let ripple_spacing = match req.kind {
        TraceKind::TwpaOn | TraceKind::TwpaOff => chain.ripple_spacing_hz * chain.ripple_bias_scale,
        _ => chain.ripple_spacing_hz,
    };
    let drift = 10f64.powf(chain.drift_db_per_100min * req.t_meas_min / 100.0 / 10.0);
    let sigma = chain.radiometer_sigma();

    let mut power = Vec::with_capacity(freqs.len());
    for (k, &f) in freqs.iter().enumerate() {
        let occ = match req.kind {
            TraceKind::Hot => noise::quanta(f, chain.t_hot_k)?,
            TraceKind::Cold => noise::quanta(f, chain.t_cold_k)?,
            TraceKind::TwpaOff => noise::quanta(f, chain.input_temp_k)?,
            TraceKind::TwpaOn => {
                let dev = device.unwrap();
                let g = dev.gain.gain_at(f)?;
                if !(g > 0.0) {
                    return Err(Error::domain(format!("non-positive gain at {f:.4e} Hz")));
                }
                let added = match dev.added_noise_quanta {
                    Some(a) => a
                        .get(k)
                        .copied()
                        .ok_or_else(|| Error::config("added-noise array shorter than trace grid"))?,
                    None => noise::quantum_limit(g.max(1.0))?,
                };
                g * (noise::quanta(f, chain.input_temp_k)? + added) + dev.pump_excess_quanta
            }
        };
        let mut p = (occ + chain.post_noise_quanta) * PLANCK * f * chain.post_gain;
        p *= 1.0 + chain.ripple_amplitude * (std::f64::consts::TAU * f / ripple_spacing + ripple_phase).sin();
        p *= drift;
        if chain.radiometer_noise {
            p *= (1.0 + sigma * noise_stream.next_normal()).max(1e-12);
        }
        power.push(p);
    }

    Ok(NoiseTrace {
        freqs: freqs.to_vec(),
        power,
        kind: req.kind,
        t_meas_min: req.t_meas_min,
        rbw_hz: chain.rbw_hz,
        n_avg: chain.n_avg,
    })
}

/// Which linearization the y-factor calibration runs on.
///
/// The power/temperature relation is nonlinear at millikelvin
/// temperatures, so the default calibrates against occupations
/// `n(ν, T)`; the temperature scale reproduces the printed relation with
/// its `k/hν` conversion and is exposed for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CalibrationScale {
    #[default]
    Quanta,
    Temperature,
}

/// Per-frequency y-factor slope and intercept.
#[derive(Debug, Clone)]
pub struct CalibrationConstants {
    pub freqs: Vec<f64>,
    /// Slope: (W/Hz) per quantum or per kelvin depending on the scale.
    pub slope: Vec<f64>,
    /// Intercept \[W/Hz\].
    pub intercept: Vec<f64>,
    pub scale: CalibrationScale,
}

fn grids_identical(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

/// Hot/cold y-factor calibration: per-point slope
/// `m = (P_H − P_C)/(x_H − x_C)` and intercept `y0 = P_C − m·x_C`, with
/// `x` either the occupation or the temperature.
pub fn calibrate(
    hot: &NoiseTrace,
    cold: &NoiseTrace,
    t_hot: f64,
    t_cold: f64,
    scale: CalibrationScale,
) -> Result<CalibrationConstants> {
    if !grids_identical(&hot.freqs, &cold.freqs) {
        return Err(Error::domain("hot and cold traces must share a frequency grid"));
    }
    if !(t_hot > t_cold) {
        return Err(Error::domain("calibration requires T_H > T_C"));
    }
    let mut slope = Vec::with_capacity(hot.freqs.len());
    let mut intercept = Vec::with_capacity(hot.freqs.len());
    for (k, &f) in hot.freqs.iter().enumerate() {
        let (x_h, x_c) = match scale {
            CalibrationScale::Quanta => (noise::quanta(f, t_hot)?, noise::quanta(f, t_cold)?),
            CalibrationScale::Temperature => (t_hot, t_cold),
        };
        let m = (hot.power[k] - cold.power[k]) / (x_h - x_c);
        if !(m > 0.0) {
            return Err(Error::numerical(format!(
                "non-positive calibration slope at {f:.4e} Hz; traces too noisy or swapped"
            )));
        }
        slope.push(m);
        intercept.push(cold.power[k] - m * x_c);
    }
    Ok(CalibrationConstants {
        freqs: hot.freqs.clone(),
        slope,
        intercept,
        scale,
    })
}

impl CalibrationConstants {
    /// Refer a measured power at grid index `k` back to the calibration
    /// scale (quanta or kelvin).
    pub fn refer(&self, k: usize, power: f64) -> f64 {
        (power - self.intercept[k]) / self.slope[k]
    }
}

/// Added-noise extraction output.
#[derive(Debug, Clone)]
pub struct AddedNoise {
    pub freqs: Vec<f64>,
    /// Input-referred on-state noise \[quanta\].
    pub n_on: Vec<f64>,
    /// Off-state noise \[quanta\].
    pub n_off: Vec<f64>,
    /// `A(ν) = N_on − N_off` \[quanta\].
    pub added: Vec<f64>,
}

/// Added noise of the device from on/off traces, the calibration, and the
/// gain spectrum: `N_on = refer(P_on)/G`, `N_off = refer(P_off)`,
/// `A = N_on − N_off`. On the temperature scale the referral is followed
/// by the printed `k/hν` conversion to quanta.
pub fn added_noise(
    on: &NoiseTrace,
    off: &NoiseTrace,
    cal: &CalibrationConstants,
    gain: &GainSpectrum,
) -> Result<AddedNoise> {
    if !grids_identical(&on.freqs, &off.freqs) || !grids_identical(&on.freqs, &cal.freqs) {
        return Err(Error::domain("on/off/calibration grids must be identical"));
    }
    let mut n_on = Vec::with_capacity(on.freqs.len());
    let mut n_off = Vec::with_capacity(on.freqs.len());
    let mut added = Vec::with_capacity(on.freqs.len());
    for (k, &f) in on.freqs.iter().enumerate() {
        let g = gain.gain_at(f)?;
        if !(g > 0.0) {
            return Err(Error::domain(format!("gain must be positive at {f:.4e} Hz")));
        }
        let to_quanta = match cal.scale {
            CalibrationScale::Quanta => 1.0,
            CalibrationScale::Temperature => crate::constants::BOLTZMANN / (PLANCK * f),
        };
        let on_q = cal.refer(k, on.power[k]) * to_quanta / g;
        let off_q = cal.refer(k, off.power[k]) * to_quanta;
        n_on.push(on_q);
        n_off.push(off_q);
        added.push(on_q - off_q);
    }
    Ok(AddedNoise {
        freqs: on.freqs.clone(),
        n_on,
        n_off,
        added,
    })
}

/// Least-squares fit of the cascade model `N_sys = N_a + N_HEMT/G_a`.
#[derive(Debug, Clone, Copy)]
pub struct NoiseFit {
    pub n_hemt: f64,
    pub n_a: f64,
    /// RMS residual \[quanta\].
    pub residual_rms: f64,
    /// One-sigma parameter uncertainties from the regression.
    pub n_hemt_sigma: f64,
    pub n_a_sigma: f64,
}

/// Fit `(G_a, N_sys)` points to the two-stage cascade model; linear in
/// `x = 1/G_a`.
pub fn fit_noise_model(points: &[(f64, f64)]) -> Result<NoiseFit> {
    if points.len() < 2 {
        return Err(Error::domain("noise-model fit needs at least two points"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(g, _)| 1.0 / g).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    if sxx < 1e-300 {
        return Err(Error::domain(
            "degenerate design matrix: all gains equal, cascade parameters not separable",
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let n_hemt = sxy / sxx;
    let n_a = y_mean - n_hemt * x_mean;

    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (n_a + n_hemt * x);
            r * r
        })
        .sum();
    let residual_rms = (ssr / n).sqrt();
    let (n_hemt_sigma, n_a_sigma) = if points.len() > 2 {
        let s2 = ssr / (n - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / n + x_mean * x_mean / sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(NoiseFit {
        n_hemt,
        n_a,
        residual_rms,
        n_hemt_sigma,
        n_a_sigma,
    })
}

/// Degenerate device output as seen by the IQ readout.
#[derive(Debug, Clone, Copy)]
pub struct DegenerateDeviceOutput {
    pub g_a: f64,
    pub g_sq: f64,
    /// Quadrature angle of maximum amplification \[rad\].
    pub amplified_phase: f64,
    /// Device-added noise in the squeezed path \[quanta\], isotropic.
    pub n_pa: f64,
}

impl DegenerateDeviceOutput {
    pub fn off() -> Self {
        DegenerateDeviceOutput {
            g_a: 1.0,
            g_sq: 1.0,
            amplified_phase: 0.0,
            n_pa: 0.0,
        }
    }
}

/// Noise spectral density in both quadratures after IQ mixing with an LO
/// at `f_p/2` and phase `lo_phase`; rotating the LO by π/2 swaps I and Q.
pub fn iq_quadrature_noise(
    dev: &DegenerateDeviceOutput,
    lo_phase: f64,
    chain: &AmpChainParams,
) -> (f64, f64) {
    let v = |theta: f64| -> f64 {
        let rel = theta - dev.amplified_phase;
        let out = chain.n_mk * (dev.g_a * rel.cos().powi(2) + dev.g_sq * rel.sin().powi(2)) + dev.n_pa;
        out * chain.a_att + chain.n_mk * (1.0 - chain.a_att) + chain.n_hemt
    };
    (v(lo_phase), v(lo_phase + std::f64::consts::FRAC_PI_2))
}

/// One pump-attenuation point of a squeezing run.
#[derive(Debug, Clone, Copy)]
pub struct SqueezeMeasurement {
    pub atten_db: f64,
    /// Tone-measured amplified-quadrature gain, power ratio.
    pub g_a: f64,
    /// System added noise from the amplified-quadrature y-factor \[quanta\].
    pub n_sys_measured: f64,
    /// Squeezed-quadrature on/off measured-noise ratio.
    pub squeezed_on_off_ratio: f64,
}

/// Per-point result of the squeezing analysis.
#[derive(Debug, Clone, Copy)]
pub struct SqueezeResult {
    pub atten_db: f64,
    pub g_a_db: f64,
    /// Extracted squeezed-quadrature gain \[dB\].
    pub g_sq_db: f64,
    /// Extracted vacuum squeezing level \[dB\], positive below vacuum.
    pub squeezing_db: f64,
    pub n_sys: f64,
    /// Cascade fit shared by the sweep.
    pub n_hemt_fit: f64,
    pub n_a_fit: f64,
    pub residual: f64,
}

/// Full squeezing analysis over a pump-attenuation sweep: fits the
/// cascade model to the amplified-quadrature system noise and inverts the
/// squeezed-quadrature on/off ratio for `G_sq` per point. The chain's
/// `n_pa` is the added noise ASSUMED by the extraction (zero for the
/// ideal-device analysis); injected excess noise in the data then shows
/// up as a squeezing deficit.
pub fn squeezing_analysis(
    measurements: &[SqueezeMeasurement],
    chain: &AmpChainParams,
) -> Result<Vec<SqueezeResult>> {
    if measurements.is_empty() {
        return Err(Error::domain("squeezing analysis needs at least one point"));
    }
    let points: Vec<(f64, f64)> = measurements.iter().map(|m| (m.g_a, m.n_sys_measured)).collect();
    let fit = fit_noise_model(&points)?;
    let mut results = Vec::with_capacity(measurements.len());
    for m in measurements {
        let extracted = noise::extract_squeezing(m.squeezed_on_off_ratio, chain)?;
        results.push(SqueezeResult {
            atten_db: m.atten_db,
            g_a_db: 10.0 * m.g_a.log10(),
            g_sq_db: 10.0 * extracted.g_sq.log10(),
            squeezing_db: extracted.squeezing_db,
            n_sys: m.n_sys_measured,
            n_hemt_fit: fit.n_hemt,
            n_a_fit: fit.n_a,
            residual: fit.residual_rms,
        });
    }
    Ok(results)
}

/// Forward-model a squeezing sweep into measurements.
///
/// `n_pa_true` is the device noise actually injected into the squeezed
/// path (e.g. pump heating); `noise_sigma_quanta` adds Gaussian scatter
/// to the system-noise points.
pub struct SqueezeForwardPoint {
    pub atten_db: f64,
    pub g_a: f64,
    pub g_sq: f64,
    pub n_pa_true: f64,
}

pub fn synthesize_squeeze_measurements(
    points: &[SqueezeForwardPoint],
    chain: &AmpChainParams,
    n_a_true: f64,
    n_hemt_true: f64,
    noise_sigma_quanta: f64,
    seed: u64,
) -> Result<Vec<SqueezeMeasurement>> {
    let mut stream = rng::Rng::new(seed ^ 0x5159_F00D);
    // LO aligned to the amplified quadrature: I carries G_a, Q the
    // squeezed vacuum.
    let (_, q_off) = iq_quadrature_noise(&DegenerateDeviceOutput::off(), 0.0, chain);
    points
        .iter()
        .map(|p| {
            let device = DegenerateDeviceOutput {
                g_a: p.g_a,
                g_sq: p.g_sq,
                amplified_phase: 0.0,
                n_pa: p.n_pa_true,
            };
            let (_, q_on) = iq_quadrature_noise(&device, 0.0, chain);
            let n_sys = n_a_true + n_hemt_true / p.g_a + noise_sigma_quanta * stream.next_normal();
            Ok(SqueezeMeasurement {
                atten_db: p.atten_db,
                g_a: p.g_a,
                n_sys_measured: n_sys,
                squeezed_on_off_ratio: q_on / q_off,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------
// Trace file schema
// ---------------------------------------------------------------------

/// Unit tag of a trace file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceUnit {
    WPerHz,
    Dbm,
}

impl TraceUnit {
    fn tag(&self) -> &'static str {
        match self {
            TraceUnit::WPerHz => "W_per_Hz",
            TraceUnit::Dbm => "dBm",
        }
    }
}

impl NoiseTrace {
    /// Write the trace in the v1 CSV schema (always in W/Hz).
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "# twpa-trace v1, config={}, unit={}, rbw_hz={:e}, t_min={:e}, n_avg={}",
            self.kind.tag(),
            TraceUnit::WPerHz.tag(),
            self.rbw_hz,
            self.t_meas_min,
            self.n_avg
        )?;
        writeln!(w, "freq_hz,power")?;
        for k in 0..self.freqs.len() {
            writeln!(w, "{:e},{:e}", self.freqs[k], self.power[k])?;
        }
        Ok(())
    }
}

/// Read and validate a trace file; dBm-in-RBW data is converted to W/Hz.
pub fn ingest_trace(path: &Path) -> Result<NoiseTrace> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::schema(format!("{}: {e}", path.display())))?;
    parse_trace(std::io::BufReader::new(file))
        .map_err(|e| Error::schema(format!("{}: {e}", path.display())))
}

/// Parse the v1 trace schema from any reader.
pub fn parse_trace<R: BufRead>(reader: R) -> Result<NoiseTrace> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::schema("empty file"))??;
    let rest = header
        .strip_prefix("# twpa-trace v1,")
        .ok_or_else(|| Error::schema("missing `# twpa-trace v1` header"))?;

    let mut kind = None;
    let mut unit = None;
    let mut rbw = None;
    let mut t_min = None;
    let mut n_avg = None;
    for field in rest.split(',') {
        let field = field.trim();
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::schema(format!("malformed header field `{field}`")))?;
        match key {
            "config" => kind = Some(TraceKind::from_tag(value)?),
            "unit" => {
                unit = Some(match value {
                    "W_per_Hz" => TraceUnit::WPerHz,
                    "dBm" => TraceUnit::Dbm,
                    other => return Err(Error::schema(format!("unknown unit tag `{other}`"))),
                })
            }
            "rbw_hz" => rbw = Some(parse_float(value, "rbw_hz")?),
            "t_min" => t_min = Some(parse_float(value, "t_min")?),
            "n_avg" => {
                n_avg = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| Error::schema(format!("bad n_avg `{value}`")))?,
                )
            }
            other => return Err(Error::schema(format!("unknown header key `{other}`"))),
        }
    }
    let kind = kind.ok_or_else(|| Error::schema("header missing config tag"))?;
    let unit = unit.ok_or_else(|| Error::schema("header missing unit tag"))?;
    let rbw_hz = rbw.ok_or_else(|| Error::schema("header missing rbw_hz"))?;
    let t_meas_min = t_min.ok_or_else(|| Error::schema("header missing t_min"))?;
    let n_avg = n_avg.ok_or_else(|| Error::schema("header missing n_avg"))?;

    let columns = lines
        .next()
        .ok_or_else(|| Error::schema("missing column header"))??;
    if columns.trim() != "freq_hz,power" {
        return Err(Error::schema(format!("unexpected column header `{columns}`")));
    }

    let mut freqs = Vec::new();
    let mut power = Vec::new();
    for (idx, line) in lines.enumerate() {
        let row = idx + 3; // 1-based, after two header lines
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (f_str, p_str) = line
            .split_once(',')
            .ok_or_else(|| Error::schema(format!("row {row}: expected `freq_hz,power`")))?;
        let f = parse_float(f_str.trim(), &format!("row {row} freq"))?;
        let p_raw = parse_float(p_str.trim(), &format!("row {row} power"))?;
        let p = match unit {
            TraceUnit::WPerHz => p_raw,
            // dBm within the resolution bandwidth → linear PSD.
            TraceUnit::Dbm => 10f64.powf((p_raw - 30.0) / 10.0) / rbw_hz,
        };
        if !(p > 0.0) {
            return Err(Error::schema(format!("row {row}: power must be positive")));
        }
        if let Some(&last) = freqs.last() {
            if f <= last {
                return Err(Error::schema(format!("row {row}: frequency grid not ascending")));
            }
        }
        freqs.push(f);
        power.push(p);
    }
    if freqs.is_empty() {
        return Err(Error::schema("trace contains no data rows"));
    }
    Ok(NoiseTrace {
        freqs,
        power,
        kind,
        t_meas_min,
        rbw_hz,
        n_avg,
    })
}

fn parse_float(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::schema(format!("{what}: cannot parse `{s}` as a number")))?;
    if !v.is_finite() {
        return Err(Error::schema(format!("{what}: non-finite value `{s}`")));
    }
    Ok(v)
}

// ---------------------------------------------------------------------
// End-to-end y-factor scenario
// ---------------------------------------------------------------------

/// Measurement times of the four switch configurations \[min\].
#[derive(Debug, Clone, Copy, Default)]
pub struct TraceTimes {
    pub hot: f64,
    pub cold: f64,
    pub on: f64,
    pub off: f64,
}

/// Synthesized four-trace run with its analysis products.
#[derive(Debug, Clone)]
pub struct YFactorOutcome {
    pub hot: NoiseTrace,
    pub cold: NoiseTrace,
    pub on: NoiseTrace,
    pub off: NoiseTrace,
    pub calibration: CalibrationConstants,
    pub added: AddedNoise,
}

/// Synthesize hot/cold/on/off, calibrate, and extract the added noise in
/// one deterministic pass.
pub fn run_y_factor(
    freqs: &[f64],
    device: &DeviceResponse<'_>,
    chain: &ChainModel,
    times: &TraceTimes,
    scale: CalibrationScale,
    seed: u64,
) -> Result<YFactorOutcome> {
    let make = |kind: TraceKind, t: f64| -> Result<NoiseTrace> {
        synthesize_trace(
            &TraceRequest {
                kind,
                t_meas_min: t,
            },
            freqs,
            Some(device),
            chain,
            seed,
        )
    };
    let hot = make(TraceKind::Hot, times.hot)?;
    let cold = make(TraceKind::Cold, times.cold)?;
    let on = make(TraceKind::TwpaOn, times.on)?;
    let off = make(TraceKind::TwpaOff, times.off)?;
    let calibration = calibrate(&hot, &cold, chain.t_hot_k, chain.t_cold_k, scale)?;
    let added = added_noise(&on, &off, &calibration, device.gain)?;
    Ok(YFactorOutcome {
        hot,
        cold,
        on,
        off,
        calibration,
        added,
    })
}
