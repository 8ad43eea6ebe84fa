//! Physical device description and per-unit-length electrical parameters.
//!
//! The transmission line is characterized by its distributed inductance
//! `L` and capacitance `C`; the superconducting film contributes a
//! current-dependent kinetic inductance `L(I) = L0·(1 + (I/I*)²)` which is
//! the source of all wave mixing downstream.

use crate::constants::C_LIGHT;
use crate::{Error, Result};

/// Full physical description of the stub-loaded transmission line.
///
/// Lengths are SI meters, currents amperes. `line_inductance_per_m` and
/// `line_capacitance_per_m` describe the loaded line aggregate at zero
/// current (the stubs' static capacitance is folded in); the dispersion
/// engine decomposes them into central-line and stub contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceGeometry {
    pub line_length: f64,
    pub conductor_width: f64,
    pub conductor_thickness: f64,
    pub dielectric_thickness: f64,
    pub stub_length_avg: f64,
    pub stub_width: f64,
    /// Longitudinal separation between neighboring stubs on one side.
    pub stub_pitch: f64,
    pub stub_modulation_amplitude: f64,
    pub stub_modulation_wavelength: f64,
    /// Phase velocity on the unloaded stub line, as a fraction of c.
    pub bare_phase_velocity_stub: f64,
    /// Measured transmission-loss slope of the full line, dB per GHz.
    pub loss_slope_db_per_ghz: f64,
    /// Loaded-line series inductance per meter at zero current \[H/m\].
    pub line_inductance_per_m: f64,
    /// Loaded-line capacitance per meter (geometric, current-independent) \[F/m\].
    pub line_capacitance_per_m: f64,
    /// Kinetic-inductance nonlinearity scale \[A\].
    pub i_star: f64,
    /// Critical current; superconductivity breaks at or above it \[A\].
    pub i_c: f64,
}

impl DeviceGeometry {
    /// Validate the geometric and electrical invariants.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("line_length", self.line_length),
            ("conductor_width", self.conductor_width),
            ("conductor_thickness", self.conductor_thickness),
            ("dielectric_thickness", self.dielectric_thickness),
            ("stub_length_avg", self.stub_length_avg),
            ("stub_width", self.stub_width),
            ("stub_pitch", self.stub_pitch),
            ("stub_modulation_wavelength", self.stub_modulation_wavelength),
            ("bare_phase_velocity_stub", self.bare_phase_velocity_stub),
            ("line_inductance_per_m", self.line_inductance_per_m),
            ("line_capacitance_per_m", self.line_capacitance_per_m),
            ("i_star", self.i_star),
            ("i_c", self.i_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be strictly positive")));
            }
        }
        if self.stub_modulation_amplitude < 0.0 {
            return Err(Error::domain("stub_modulation_amplitude must be non-negative"));
        }
        if self.stub_modulation_amplitude >= self.stub_length_avg {
            return Err(Error::domain(
                "stub_modulation_amplitude must be smaller than stub_length_avg",
            ));
        }
        if self.stub_pitch >= self.stub_modulation_wavelength {
            return Err(Error::domain(
                "stub_pitch must be smaller than stub_modulation_wavelength",
            ));
        }
        Ok(())
    }

    /// Loaded-line constants at zero current.
    pub fn line_constants(&self) -> LineConstants {
        LineConstants::from_lc(self.line_inductance_per_m, self.line_capacitance_per_m)
            .expect("validated geometry has positive L and C")
    }

    /// Phase velocity on the unloaded stub line \[m/s\].
    pub fn stub_velocity(&self) -> f64 {
        self.bare_phase_velocity_stub * C_LIGHT
    }

    /// Frequency of the fundamental quarter-wave stub resonance \[Hz\].
    pub fn stub_resonance_freq(&self) -> f64 {
        self.stub_velocity() / (4.0 * self.stub_length_avg)
    }

    /// Power attenuation per meter at frequency `f`, in nepers/m.
    ///
    /// The loss slope is specified as total insertion loss of the full
    /// line in dB per GHz, so the per-meter rate divides by the length.
    pub fn attenuation_power_per_m(&self, f: f64) -> f64 {
        let db_total = self.loss_slope_db_per_ghz * f / 1e9;
        db_total / self.line_length * std::f64::consts::LN_10 / 10.0
    }
}

/// Per-unit-length electrical constants of a transmission line.
///
/// All four fields are kept mutually consistent by the constructors:
/// `Z0 = sqrt(L/C)` and `v_ph = 1/sqrt(L·C)` hold to machine precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineConstants {
    /// Series inductance per meter \[H/m\].
    pub l_per_m: f64,
    /// Shunt capacitance per meter \[F/m\].
    pub c_per_m: f64,
    /// Characteristic impedance \[Ω\].
    pub z0: f64,
    /// Phase velocity \[m/s\].
    pub v_ph: f64,
}

impl LineConstants {
    /// Build from distributed inductance and capacitance.
    pub fn from_lc(l_per_m: f64, c_per_m: f64) -> Result<Self> {
        if !(l_per_m > 0.0) || !(c_per_m > 0.0) {
            return Err(Error::domain("line constants must be strictly positive"));
        }
        Ok(LineConstants {
            l_per_m,
            c_per_m,
            z0: (l_per_m / c_per_m).sqrt(),
            v_ph: 1.0 / (l_per_m * c_per_m).sqrt(),
        })
    }
}

/// Invert the characteristic-impedance and phase-velocity formulas:
/// `L = Z0/v_ph`, `C = 1/(Z0·v_ph)`.
pub fn line_constants_from_targets(z0: f64, v_ph: f64) -> Result<LineConstants> {
    if !(z0 > 0.0) {
        return Err(Error::domain("Z0 must be strictly positive"));
    }
    if !(v_ph > 0.0 && v_ph < C_LIGHT) {
        return Err(Error::domain("v_ph must lie in (0, c)"));
    }
    let l = z0 / v_ph;
    let c = 1.0 / (z0 * v_ph);
    Ok(LineConstants {
        l_per_m: l,
        c_per_m: c,
        z0,
        v_ph,
    })
}

/// Current-dependent kinetic inductance `L(I) = L0·(1 + (I/I*)²)`.
///
/// Fails with a "superconductivity broken" error when `|I| >= i_c`.
pub fn kinetic_inductance(i: f64, l0: f64, i_star: f64, i_c: f64) -> Result<f64> {
    if !(i_star > 0.0) {
        return Err(Error::domain("I_star must be strictly positive"));
    }
    if i.abs() >= i_c {
        return Err(Error::domain(format!(
            "superconductivity broken: |I| = {:.3e} A exceeds I_c = {:.3e} A",
            i.abs(),
            i_c
        )));
    }
    let x = i / i_star;
    Ok(l0 * (1.0 + x * x))
}

/// Loaded-line constants under a DC bias current.
///
/// Only the series (kinetic) inductance responds to the bias; the
/// geometric capacitance is unchanged. Impedance and phase velocity are
/// recomputed from the biased `L`.
pub fn dc_retuning(geometry: &DeviceGeometry, i_dc: f64) -> Result<LineConstants> {
    let l_biased = kinetic_inductance(
        i_dc,
        geometry.line_inductance_per_m,
        geometry.i_star,
        geometry.i_c,
    )?;
    LineConstants::from_lc(l_biased, geometry.line_capacitance_per_m)
}

/// Total number of stubs loading the line (two per pitch, one each side).
pub fn stub_count(geometry: &DeviceGeometry) -> u64 {
    (geometry.line_length / geometry.stub_pitch).floor() as u64 * 2
}

#[cfg(test)]
pub(crate) fn reference_geometry() -> DeviceGeometry {
    // 50 Ω / 0.0078c loaded-line targets.
    let lc = line_constants_from_targets(50.0, 0.0078 * C_LIGHT).unwrap();
    DeviceGeometry {
        line_length: 86e-3,
        conductor_width: 250e-9,
        conductor_thickness: 35e-9,
        dielectric_thickness: 190e-9,
        stub_length_avg: 26e-6,
        stub_width: 250e-9,
        stub_pitch: 2e-6,
        stub_modulation_amplitude: 2e-6,
        stub_modulation_wavelength: 110e-6,
        bare_phase_velocity_stub: 0.052,
        loss_slope_db_per_ghz: 0.038,
        line_inductance_per_m: lc.l_per_m,
        line_capacitance_per_m: lc.c_per_m,
        i_star: 4.7e-3,
        i_c: 1.8e-3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_invert_reference_values() {
        // Z = 50 Ω, v = 0.0078c from the device description.
        let lc = line_constants_from_targets(50.0, 0.0078 * C_LIGHT).unwrap();
        assert!((lc.l_per_m - 2.138e-5).abs() / 2.138e-5 < 1e-3);
        assert!((lc.c_per_m - 8.553e-9).abs() / 8.553e-9 < 1e-3);
    }

    #[test]
    fn targets_symmetric_unit_case() {
        let lc = line_constants_from_targets(1.0, C_LIGHT * (1.0 - 1e-15)).unwrap();
        assert!((lc.l_per_m - 1.0 / C_LIGHT).abs() < 1e-20);
        assert!((lc.c_per_m - 1.0 / C_LIGHT).abs() < 1e-20);
    }

    #[test]
    fn targets_round_trip() {
        let lc = line_constants_from_targets(73.2, 4.1e6).unwrap();
        let rt = line_constants_from_targets(lc.z0, lc.v_ph).unwrap();
        assert!((rt.l_per_m - lc.l_per_m).abs() / lc.l_per_m < 1e-12);
        assert!((rt.c_per_m - lc.c_per_m).abs() / lc.c_per_m < 1e-12);
    }

    #[test]
    fn targets_reject_bad_inputs() {
        assert!(line_constants_from_targets(-1.0, 1e6).is_err());
        assert!(line_constants_from_targets(50.0, 0.0).is_err());
        assert!(line_constants_from_targets(50.0, 2.0 * C_LIGHT).is_err());
    }

    #[test]
    fn kinetic_inductance_reference_points() {
        let l0 = 2.1e-5;
        let i_star = 5e-3;
        let i_c = 4e-3;
        assert_eq!(kinetic_inductance(0.0, l0, i_star, i_c).unwrap(), l0);
        // I = I* doubles L (definition of I*); use a permissive I_c here.
        let l = kinetic_inductance(i_star, l0, i_star, 10e-3).unwrap();
        assert!((l - 2.0 * l0).abs() / l0 < 1e-15);
        let l = kinetic_inductance(0.1 * i_star, l0, i_star, i_c).unwrap();
        assert!((l - 1.01 * l0).abs() / l0 < 1e-15);
    }

    #[test]
    fn kinetic_inductance_breaks_above_critical() {
        let err = kinetic_inductance(2e-3, 2.1e-5, 5e-3, 1.8e-3).unwrap_err();
        assert!(err.to_string().contains("superconductivity broken"));
    }

    #[test]
    fn dc_retuning_identity_at_zero() {
        let g = reference_geometry();
        let lc0 = g.line_constants();
        let lc = dc_retuning(&g, 0.0).unwrap();
        assert_eq!(lc, lc0);
    }

    #[test]
    fn dc_retuning_at_i_star() {
        // (I/I*)² = 1 halves v_ph by √2 and raises Z0 by √2.
        let mut g = reference_geometry();
        g.i_c = 20e-3; // allow biasing all the way to I*
        let lc0 = g.line_constants();
        let lc = dc_retuning(&g, g.i_star).unwrap();
        assert!((lc.v_ph - lc0.v_ph / 2f64.sqrt()).abs() / lc0.v_ph < 1e-14);
        assert!((lc.z0 - lc0.z0 * 2f64.sqrt()).abs() / lc0.z0 < 1e-14);
    }

    #[test]
    fn dc_retuning_ripple_spacing_scales_with_velocity() {
        // A standing-wave ripple period scales proportionally to v_ph.
        let g = reference_geometry();
        let lc0 = g.line_constants();
        let lc = dc_retuning(&g, 0.579e-3).unwrap();
        let df0 = 8e6;
        let df_biased = df0 * lc.v_ph / lc0.v_ph;
        let expect = df0 / (1.0 + (0.579e-3 / g.i_star).powi(2)).sqrt();
        assert!((df_biased - expect).abs() / expect < 1e-14);
        assert!(df_biased < df0);
    }

    #[test]
    fn stub_count_reference_and_degenerate() {
        let g = reference_geometry();
        assert_eq!(stub_count(&g), 86_000);

        let mut g2 = g.clone();
        g2.line_length = 1e-3;
        g2.stub_pitch = 1e-6;
        assert_eq!(stub_count(&g2), 2_000);

        let mut g3 = g;
        g3.line_length = 1e-6;
        g3.stub_pitch = 2e-6;
        assert_eq!(stub_count(&g3), 0);
    }

    #[test]
    fn geometry_validation_catches_bad_modulation() {
        let mut g = reference_geometry();
        g.stub_modulation_amplitude = 30e-6;
        assert!(g.validate().is_err());
        let mut g = reference_geometry();
        g.stub_pitch = 200e-6;
        assert!(g.validate().is_err());
        assert!(reference_geometry().validate().is_ok());
    }

    #[test]
    fn attenuation_matches_loss_slope() {
        let g = reference_geometry();
        // 0.038 dB/GHz over the whole 86 mm line.
        let alpha = g.attenuation_power_per_m(10e9);
        let total_db = 10.0 * (alpha * g.line_length) / std::f64::consts::LN_10;
        assert!((total_db - 0.38).abs() < 1e-12);
    }
}
