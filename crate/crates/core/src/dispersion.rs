//! Floquet/Bloch dispersion of the stub-loaded, periodically modulated line.
//!
//! One supercell spans a full modulation period of the stub lengths. Its
//! ABCD matrix is cascaded from per-stub unit cells (half series segment,
//! shunt stub pair, half series segment) and the Bloch wavenumber follows
//! from `cos(β_B·Λ) = (A+D)/2`. Regions where `|(A+D)/2| > 1` are
//! photonic bandgaps with evanescent propagation.

use num_complex::Complex64;

use crate::device::{DeviceGeometry, LineConstants};
use crate::{Error, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Threshold on `|(A+D)/2|` above which a point counts as in-gap.
/// Slightly above 1 to avoid float chatter at band edges.
pub const GAP_THRESHOLD: f64 = 1.0 + 1e-9;

/// 2×2 complex transfer (ABCD) matrix of a reciprocal two-port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl AbcdMatrix {
    pub fn identity() -> Self {
        AbcdMatrix {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Lossless uniform line segment of electrical length `theta` and
    /// characteristic impedance `z0`.
    pub fn line_segment(theta: f64, z0: f64) -> Self {
        let (s, c) = theta.sin_cos();
        AbcdMatrix {
            a: Complex64::new(c, 0.0),
            b: Complex64::new(0.0, z0 * s),
            c: Complex64::new(0.0, s / z0),
            d: Complex64::new(c, 0.0),
        }
    }

    /// Shunt admittance element.
    pub fn shunt(y: Complex64) -> Self {
        AbcdMatrix {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: y,
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Cascade `self` followed by `other` (self is upstream).
    pub fn compose(&self, other: &AbcdMatrix) -> Self {
        AbcdMatrix {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }
}

/// One period of the stub loading: half series segment, two shunt stubs
/// (one per side), half series segment.
#[derive(Debug, Clone)]
pub struct UnitCell {
    /// Series segment length (= stub pitch) \[m\].
    pub series_segment_length: f64,
    /// Central-line constants, DC-biased.
    pub line_constants: LineConstants,
    /// This cell's stub length after sinusoidal modulation \[m\].
    pub stub_length: f64,
    /// Stub-line constants (stubs carry no DC, so unbiased).
    pub stub_line_constants: LineConstants,
}

/// How stub loading enters the unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StubModel {
    /// Open transmission-line stub: `Y = i·tan(β_s·ℓ)/Z_s` (dispersive).
    Dispersive,
    /// Static limit `Y = iω·C_s·ℓ`: disables stub dispersion. Used as a
    /// diagnostic to compare against the plain Bragg estimate.
    StaticCapacitance,
}

/// Input impedance of an open-circuited stub, `Z_in = −i·Z0s·cot(β_s·ℓ)`.
///
/// Returns the impedance and an antiresonance flag set where `ℓ = n·λ/2`
/// makes the cotangent diverge; the large-magnitude value is still
/// returned.
pub fn stub_input_impedance(
    f: f64,
    stub_length: f64,
    stub_line: &LineConstants,
) -> Result<(Complex64, bool)> {
    if !(f > 0.0) {
        return Err(Error::domain("stub impedance requires f > 0"));
    }
    let beta_l = TWO_PI * f / stub_line.v_ph * stub_length;
    let (s, c) = beta_l.sin_cos();
    let antiresonance = s.abs() < 1e-9;
    // cot(βℓ) = cos/sin; near antiresonance this is huge but finite.
    let z = Complex64::new(0.0, -stub_line.z0 * c / s);
    Ok((z, antiresonance))
}

/// Shunt admittance of one open stub (regular at antiresonance).
fn stub_admittance(f: f64, stub_length: f64, stub_line: &LineConstants, model: StubModel) -> Complex64 {
    match model {
        StubModel::Dispersive => {
            let beta_l = TWO_PI * f / stub_line.v_ph * stub_length;
            Complex64::new(0.0, beta_l.tan() / stub_line.z0)
        }
        StubModel::StaticCapacitance => {
            let c_total = stub_line.c_per_m * stub_length;
            Complex64::new(0.0, TWO_PI * f * c_total)
        }
    }
}

/// ABCD matrix of a unit cell with dispersive stubs.
pub fn unit_cell_abcd(f: f64, cell: &UnitCell) -> AbcdMatrix {
    unit_cell_abcd_with(f, cell, StubModel::Dispersive, 1)
}

fn unit_cell_abcd_with(f: f64, cell: &UnitCell, model: StubModel, segmentation: usize) -> AbcdMatrix {
    let lc = &cell.line_constants;
    let theta_half = TWO_PI * f / lc.v_ph * cell.series_segment_length / 2.0;
    let mut half = AbcdMatrix::identity();
    let piece = AbcdMatrix::line_segment(theta_half / segmentation as f64, lc.z0);
    for _ in 0..segmentation {
        half = half.compose(&piece);
    }
    if cell.stub_length == 0.0 {
        return half.compose(&half);
    }
    // Two stubs per cell, one on each side of the central line.
    let y = stub_admittance(f, cell.stub_length, &cell.stub_line_constants, model) * 2.0;
    half.compose(&AbcdMatrix::shunt(y)).compose(&half)
}

/// Complex Bloch propagation constant and impedance vs. frequency.
#[derive(Debug, Clone)]
pub struct DispersionCurve {
    /// Monotone ascending frequency grid \[Hz\].
    pub freqs: Vec<f64>,
    /// Unfolded Bloch wavenumber \[rad/m\]. The imaginary part carries the
    /// loss contribution plus, inside gaps, the evanescent decay.
    pub beta: Vec<Complex64>,
    /// Bloch impedance of the forward wave \[Ω\].
    pub bloch_impedance: Vec<Complex64>,
    /// Per-point in-gap flag (`|(A+D)/2|` criterion exceeded).
    pub in_gap: Vec<bool>,
    /// `|(A+D)/2|` of the supercell, used for gap-edge interpolation.
    pub half_trace_mag: Vec<f64>,
    /// Detected stopbands as `(f_low, f_high)` \[Hz\].
    pub gaps: Vec<(f64, f64)>,
    /// Supercell period Λ \[m\].
    pub period: f64,
}

/// Options for [`bloch_dispersion_with`].
#[derive(Debug, Clone)]
pub struct BlochOptions {
    pub stub_model: StubModel,
    /// Number of sub-segments per series half-segment (cascade refinement).
    pub segmentation: usize,
    /// Attach the frequency-linear loss to `Im(β)`.
    pub include_loss: bool,
}

impl Default for BlochOptions {
    fn default() -> Self {
        BlochOptions {
            stub_model: StubModel::Dispersive,
            segmentation: 1,
            include_loss: true,
        }
    }
}

/// Decompose the loaded-line aggregate into central-line and stub-line
/// constants under a DC bias.
///
/// The stub line shares the central strip's per-meter inductance (same
/// film and width) but carries no DC, so only the central line is biased.
/// The stubs' static capacitance per meter of line must not exceed the
/// loaded total.
pub fn decompose_loading(geometry: &DeviceGeometry, i_dc: f64) -> Result<(LineConstants, LineConstants)> {
    geometry.validate()?;
    let l0 = geometry.line_inductance_per_m;
    let v_s = geometry.stub_velocity();
    let c_stub_per_m = 1.0 / (l0 * v_s * v_s);
    let stub_line = LineConstants::from_lc(l0, c_stub_per_m)?;

    let c_loading = 2.0 * c_stub_per_m * geometry.stub_length_avg / geometry.stub_pitch;
    let c_line = geometry.line_capacitance_per_m - c_loading;
    if !(c_line > 0.0) {
        return Err(Error::config(format!(
            "static stub loading ({c_loading:.3e} F/m) exceeds the loaded-line capacitance \
             ({:.3e} F/m); check stub geometry or velocity",
            geometry.line_capacitance_per_m
        )));
    }
    let l_biased = crate::device::kinetic_inductance(i_dc, l0, geometry.i_star, geometry.i_c)?;
    let central = LineConstants::from_lc(l_biased, c_line)?;
    Ok((central, stub_line))
}

/// Stub lengths over one supercell (sinusoidal modulation sampled at the
/// cell centers).
pub fn modulation_profile(geometry: &DeviceGeometry) -> Result<Vec<f64>> {
    let ratio = geometry.stub_modulation_wavelength / geometry.stub_pitch;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 || n < 1.0 {
        return Err(Error::config(format!(
            "modulation wavelength must be an integer multiple of the stub pitch \
             (got ratio {ratio})"
        )));
    }
    let n = n as usize;
    Ok((0..n)
        .map(|j| {
            let phase = TWO_PI * (j as f64 + 0.5) / n as f64;
            geometry.stub_length_avg + geometry.stub_modulation_amplitude * phase.sin()
        })
        .collect())
}

/// Bloch dispersion of a device under DC bias, default options.
pub fn bloch_dispersion(freqs: &[f64], geometry: &DeviceGeometry, i_dc: f64) -> Result<DispersionCurve> {
    bloch_dispersion_with(freqs, geometry, i_dc, &BlochOptions::default())
}

/// Bloch dispersion with explicit stub model / segmentation / loss options.
pub fn bloch_dispersion_with(
    freqs: &[f64],
    geometry: &DeviceGeometry,
    i_dc: f64,
    options: &BlochOptions,
) -> Result<DispersionCurve> {
    let profile = modulation_profile(geometry)?;
    let (central, stub_line) = decompose_loading(geometry, i_dc)?;
    let loss = |f: f64| {
        if options.include_loss {
            geometry.attenuation_power_per_m(f) / 2.0
        } else {
            0.0
        }
    };
    bloch_dispersion_profile(
        freqs,
        &central,
        &stub_line,
        geometry.stub_pitch,
        &profile,
        options,
        loss,
    )
}

/// Core Floquet solver over an explicit stub-length profile.
///
/// Exposed separately so synthetic profiles (e.g. two-tone modulation)
/// can be analyzed with the same machinery.
pub fn bloch_dispersion_profile(
    freqs: &[f64],
    central: &LineConstants,
    stub_line: &LineConstants,
    pitch: f64,
    profile: &[f64],
    options: &BlochOptions,
    loss_im: impl Fn(f64) -> f64,
) -> Result<DispersionCurve> {
    if freqs.is_empty() {
        return Err(Error::domain("empty frequency grid"));
    }
    if !freqs.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::domain("frequency grid must be strictly ascending"));
    }
    if profile.is_empty() {
        return Err(Error::config("empty modulation profile"));
    }
    let period = pitch * profile.len() as f64;

    let n = freqs.len();
    let mut beta = Vec::with_capacity(n);
    let mut bloch_z = Vec::with_capacity(n);
    let mut in_gap = Vec::with_capacity(n);
    let mut half_trace = Vec::with_capacity(n);

    // Unfolded β·Λ of the previous point; the physical branch is the
    // nearest nondecreasing continuation.
    let mut prev_bl: Option<f64> = None;

    for &f in freqs {
        let mut m = AbcdMatrix::identity();
        for &len in profile {
            let cell = UnitCell {
                series_segment_length: pitch,
                line_constants: *central,
                stub_length: len,
                stub_line_constants: *stub_line,
            };
            m = m.compose(&unit_cell_abcd_with(f, &cell, options.stub_model, options.segmentation));
        }
        // Lossless cascade keeps (A+D)/2 exactly real.
        let x = (m.a.re + m.d.re) / 2.0;
        let gap = x.abs() > GAP_THRESHOLD;
        let theta = x.clamp(-1.0, 1.0).acos();

        let bl_re = match prev_bl {
            None => theta,
            Some(prev) => {
                if gap {
                    // Stalled at the band edge: nearest multiple of π.
                    (prev / std::f64::consts::PI).round() * std::f64::consts::PI
                } else {
                    unfold(prev, theta)
                }
            }
        };
        prev_bl = Some(bl_re);

        let evan = if gap { x.abs().acosh() / period } else { 0.0 };
        beta.push(Complex64::new(bl_re / period, loss_im(f) + evan));
        bloch_z.push(bloch_impedance(&m, x, gap));
        in_gap.push(gap);
        half_trace.push(x.abs());
    }

    let mut curve = DispersionCurve {
        freqs: freqs.to_vec(),
        beta,
        bloch_impedance: bloch_z,
        in_gap,
        half_trace_mag: half_trace,
        gaps: Vec::new(),
        period,
    };
    curve.gaps = find_bandgaps(&curve)?;
    Ok(curve)
}

/// Nearest nondecreasing continuation of β·Λ given the folded angle.
fn unfold(prev: f64, theta: f64) -> f64 {
    let base = (prev / TWO_PI).floor() * TWO_PI;
    let mut best = f64::INFINITY;
    for k in [-1.0, 0.0, 1.0] {
        let origin = base + k * TWO_PI;
        for cand in [origin + theta, origin + TWO_PI - theta] {
            if cand >= prev - 1e-9 && cand < best {
                best = cand;
            }
        }
    }
    best
}

/// Bloch impedance of the forward wave from the supercell matrix.
fn bloch_impedance(m: &AbcdMatrix, x: f64, gap: bool) -> Complex64 {
    let lambda = if gap {
        // Decaying forward wave: |λ| > 1 branch.
        Complex64::new(x + x.signum() * (x * x - 1.0).sqrt(), 0.0)
    } else {
        Complex64::new(x, (1.0 - x * x).sqrt())
    };
    let denom = lambda - m.a;
    if denom.norm() < 1e-300 {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    let z = m.b / denom;
    if z.re < 0.0 {
        -z
    } else {
        z
    }
}

/// Contiguous stopbands of a computed curve, edges linearly interpolated
/// on the `|(A+D)/2| = 1` crossing.
pub fn find_bandgaps(curve: &DispersionCurve) -> Result<Vec<(f64, f64)>> {
    if curve.freqs.is_empty() {
        return Err(Error::domain("empty dispersion curve"));
    }
    let mut gaps = Vec::new();
    let n = curve.freqs.len();
    let mut i = 0;
    while i < n {
        if curve.in_gap[i] {
            let start = i;
            while i < n && curve.in_gap[i] {
                i += 1;
            }
            let end = i - 1; // inclusive
            let f_low = if start == 0 {
                curve.freqs[0]
            } else {
                edge_crossing(curve, start - 1, start)
            };
            let f_high = if end == n - 1 {
                curve.freqs[n - 1]
            } else {
                edge_crossing(curve, end + 1, end)
            };
            gaps.push((f_low, f_high));
        } else {
            i += 1;
        }
    }
    Ok(gaps)
}

/// Interpolate the frequency where `|(A+D)/2|` crosses 1 between an
/// outside point and an in-gap point.
fn edge_crossing(curve: &DispersionCurve, outside: usize, inside: usize) -> f64 {
    let x_out = curve.half_trace_mag[outside];
    let x_in = curve.half_trace_mag[inside];
    let f_out = curve.freqs[outside];
    let f_in = curve.freqs[inside];
    if (x_in - x_out).abs() < 1e-300 {
        return (f_out + f_in) / 2.0;
    }
    let t = (1.0 - x_out) / (x_in - x_out);
    f_out + t.clamp(0.0, 1.0) * (f_in - f_out)
}

impl DispersionCurve {
    /// Real part of β at `f`, linear interpolation. Errors off-grid.
    pub fn re_beta_at(&self, f: f64) -> Result<f64> {
        self.interp(f, |i| self.beta[i].re)
    }

    /// Imaginary part of β at `f` (loss + evanescence), linear interpolation.
    pub fn im_beta_at(&self, f: f64) -> Result<f64> {
        self.interp(f, |i| self.beta[i].im)
    }

    /// True when `f` falls inside any detected gap.
    pub fn frequency_in_gap(&self, f: f64) -> bool {
        self.gaps.iter().any(|&(lo, hi)| f >= lo && f <= hi)
    }

    fn interp(&self, f: f64, value: impl Fn(usize) -> f64) -> Result<f64> {
        let first = *self.freqs.first().unwrap();
        let last = *self.freqs.last().unwrap();
        if !(f >= first && f <= last) {
            return Err(Error::domain(format!(
                "frequency {f:.6e} Hz outside dispersion grid [{first:.6e}, {last:.6e}]"
            )));
        }
        let idx = match self
            .freqs
            .binary_search_by(|probe| probe.partial_cmp(&f).unwrap())
        {
            Ok(i) => return Ok(value(i)),
            Err(i) => i,
        };
        let (i0, i1) = (idx - 1, idx);
        let t = (f - self.freqs[i0]) / (self.freqs[i1] - self.freqs[i0]);
        Ok(value(i0) * (1.0 - t) + value(i1) * t)
    }

    /// Export as CSV: `f_Hz,Re_beta,Im_beta,Re_Zbloch,in_gap`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "f_Hz,Re_beta,Im_beta,Re_Zbloch,in_gap")?;
        for i in 0..self.freqs.len() {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{}",
                self.freqs[i],
                self.beta[i].re,
                self.beta[i].im,
                self.bloch_impedance[i].re,
                u8::from(self.in_gap[i]),
            )?;
        }
        Ok(())
    }

    /// Synthetic curve from an explicit real dispersion relation; used by
    /// tests and by callers that want an idealized line.
    pub fn from_beta_fn(freqs: &[f64], beta_re: impl Fn(f64) -> f64) -> Self {
        let beta: Vec<Complex64> = freqs.iter().map(|&f| Complex64::new(beta_re(f), 0.0)).collect();
        let n = freqs.len();
        DispersionCurve {
            freqs: freqs.to_vec(),
            beta,
            bloch_impedance: vec![Complex64::new(50.0, 0.0); n],
            in_gap: vec![false; n],
            half_trace_mag: vec![0.0; n],
            gaps: Vec::new(),
            period: 0.0,
        }
    }
}

/// Three-wave phase mismatch `Δβ₀ = β(f_p) − β(f_s) − β(f_i)` (real parts)
/// with the idler at `f_i = f_p − f_s`.
pub fn phase_mismatch(f_signal: f64, f_pump: f64, curve: &DispersionCurve) -> Result<f64> {
    if !(f_signal > 0.0 && f_signal < f_pump) {
        return Err(Error::domain("phase mismatch requires 0 < f_signal < f_pump"));
    }
    let f_idler = f_pump - f_signal;
    Ok(curve.re_beta_at(f_pump)? - curve.re_beta_at(f_signal)? - curve.re_beta_at(f_idler)?)
}
