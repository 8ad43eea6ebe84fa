//! Analytic quantum-noise relations: quanta conversion, the
//! phase-insensitive quantum limit, cascaded-amplifier system noise,
//! squeezed-quadrature output noise and its inversion, and the
//! pump-heating excess.
//!
//! All quantities are in units of quanta (photon occupation plus the
//! half-quantum zero-point floor).

use crate::constants::{BOLTZMANN, PLANCK};
use crate::{Error, Result};

/// Thermal occupation in quanta, `n = ½·coth(hν/2kT)`.
///
/// Stable in both limits: `hν ≫ kT` returns exactly ½ and `hν ≪ kT`
/// approaches the classical `kT/hν`. `T = 0` is accepted and returns the
/// zero-point ½ by limit.
pub fn quanta(f: f64, t: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::domain("quanta requires f > 0"));
    }
    if t < 0.0 {
        return Err(Error::domain("quanta requires T >= 0"));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let x = PLANCK * f / (2.0 * BOLTZMANN * t);
    Ok(0.5 / x.tanh())
}

/// Invert [`quanta`]: physical temperature from an occupation at `f`.
///
/// Requires `n > ½` (the zero-point floor has no finite temperature).
pub fn temperature_from_quanta(f: f64, n: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::domain("temperature_from_quanta requires f > 0"));
    }
    if !(n > 0.5) {
        return Err(Error::domain(
            "occupation at or below the zero-point floor has no finite temperature",
        ));
    }
    // n = ¹⁄₂coth(x) → x = atanh(1/2n)
    let x = (1.0 / (2.0 * n)).atanh();
    Ok(PLANCK * f / (2.0 * BOLTZMANN * x))
}

/// Quantum limit of the added noise of a phase-insensitive amplifier,
/// `A = ½(1 − 1/G)`.
pub fn quantum_limit(g: f64) -> Result<f64> {
    if !(g >= 1.0) {
        return Err(Error::domain("quantum limit defined for gain G >= 1"));
    }
    Ok(0.5 * (1.0 - 1.0 / g))
}

/// Orientation of the squeezed-vacuum term in the output-noise relation.
///
/// The printed relation divides the input vacuum by the squeezed-quadrature
/// gain, which with `G_sq < 1` would raise the noise; the physical intent
/// (squeezed vacuum below ½) multiplies instead. The physical orientation
/// is the default; the literal printed form is available behind this
/// switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SqueezeOrientation {
    /// Squeezed vacuum leaves the device as `N_mK·G_sq` with `G_sq ≤ 1`.
    #[default]
    VacuumTimesGsq,
    /// Literal printed form, `N_mK/G_sq`.
    LiteralPrinted,
}

/// Parameters of the amplifier/readout cascade.
#[derive(Debug, Clone, Copy)]
pub struct AmpChainParams {
    /// Amplified-quadrature (or phase-insensitive) TWPA gain, power ratio.
    pub g_a: f64,
    /// Squeezed-quadrature gain, power ratio ≤ 1.
    pub g_sq: f64,
    /// TWPA added noise, amplified path \[quanta\].
    pub n_a: f64,
    /// TWPA added noise, squeezed path \[quanta\].
    pub n_pa: f64,
    /// HEMT noise referred through the post-device attenuation \[quanta\].
    pub n_hemt: f64,
    /// TWPA→HEMT power attenuation, ratio in (0, 1].
    pub a_att: f64,
    /// Input bath occupation (≈ ½ at 20 mK) \[quanta\].
    pub n_mk: f64,
    pub orientation: SqueezeOrientation,
}

impl AmpChainParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_a > 0.0 && self.g_sq > 0.0) {
            return Err(Error::domain("chain gains must be positive"));
        }
        if !(self.a_att > 0.0 && self.a_att <= 1.0) {
            return Err(Error::domain("attenuation must lie in (0, 1]"));
        }
        if self.n_a < 0.0 || self.n_pa < 0.0 || self.n_hemt < 0.0 || self.n_mk < 0.0 {
            return Err(Error::domain("noise quanta must be non-negative"));
        }
        Ok(())
    }
}

/// System added noise of the TWPA + HEMT cascade, referred to the TWPA
/// input: `N_sys = N_a + N_HEMT/G_a`.
pub fn system_noise(params: &AmpChainParams) -> Result<f64> {
    params.validate()?;
    Ok(params.n_a + params.n_hemt / params.g_a)
}

/// Measured output noise of the squeezed quadrature:
/// `N_sq = (N_mK·G_sq + N_pa)·A + N_mK·(1 − A) + N_HEMT`
/// (or `N_mK/G_sq` under the literal orientation).
pub fn squeezed_output_noise(params: &AmpChainParams) -> Result<f64> {
    params.validate()?;
    let vacuum_out = match params.orientation {
        SqueezeOrientation::VacuumTimesGsq => params.n_mk * params.g_sq,
        SqueezeOrientation::LiteralPrinted => params.n_mk / params.g_sq,
    };
    Ok((vacuum_out + params.n_pa) * params.a_att + params.n_mk * (1.0 - params.a_att) + params.n_hemt)
}

/// Result of a squeezing extraction.
#[derive(Debug, Clone, Copy)]
pub struct ExtractedSqueezing {
    /// Squeezed-quadrature gain solving the output-noise relation.
    pub g_sq: f64,
    /// Squeezing level in dB, positive when the vacuum is squeezed.
    pub squeezing_db: f64,
}

/// Solve the squeezed-quadrature output noise for `G_sq` from the
/// measured on/off power ratio.
///
/// With the TWPA off the chain passes the bare vacuum, so
/// `N_off = N_mK + N_HEMT`; the on/off ratio then pins the squeezed
/// vacuum term. Ratios implying negative vacuum noise are rejected.
pub fn extract_squeezing(ratio_on_off: f64, params: &AmpChainParams) -> Result<ExtractedSqueezing> {
    params.validate()?;
    if !(ratio_on_off > 0.0 && ratio_on_off <= 1.0 + 1e-12) {
        return Err(Error::domain("on/off ratio must lie in (0, 1]"));
    }
    let n_off = params.n_mk + params.n_hemt;
    let vacuum_out = (ratio_on_off * n_off
        - params.n_mk * (1.0 - params.a_att)
        - params.n_hemt
        - params.n_pa * params.a_att)
        / params.a_att;
    if !(vacuum_out > 0.0) {
        return Err(Error::domain(format!(
            "unphysical ratio: implied squeezed vacuum noise {vacuum_out:.3e} quanta <= 0"
        )));
    }
    let g_sq = match params.orientation {
        SqueezeOrientation::VacuumTimesGsq => vacuum_out / params.n_mk,
        SqueezeOrientation::LiteralPrinted => params.n_mk / vacuum_out,
    };
    // Normalize to "dB below vacuum" regardless of orientation.
    let squeezing_db = match params.orientation {
        SqueezeOrientation::VacuumTimesGsq => -10.0 * g_sq.log10(),
        SqueezeOrientation::LiteralPrinted => 10.0 * g_sq.log10(),
    };
    Ok(ExtractedSqueezing { g_sq, squeezing_db })
}

/// Frequency-independent noise excess from pump heating of the cold
/// stage, linear in pump power and anchored at 0.077 quanta for a
/// −15.7 dBm pump.
pub fn pump_heating_excess(p_pump_dbm: f64) -> f64 {
    let excess = 0.077 * 10f64.powf((p_pump_dbm - (-15.7)) / 10.0);
    excess.max(0.0)
}
