//! Experiment configuration: a single TOML file with all physical
//! quantities in SI units (unit-suffixed keys; dBm only where the key
//! says so).

use serde::Deserialize;
use twpa_core::constants::C_LIGHT;
use twpa_core::device::{line_constants_from_targets, DeviceGeometry};
use twpa_core::noise::{AmpChainParams, SqueezeOrientation};
use twpa_core::pipeline::ChainModel;
use twpa_core::{cme, device, Error, Result};

/// Default bare stub-line velocity (fraction of c) when the config omits
/// it; fixed by the quarter-wave stub resonance placement.
pub const DEFAULT_STUB_VELOCITY_FRAC_C: f64 = 0.052;

pub const PAPER_DEVICE_PRESET: &str = include_str!("../presets/paper_device.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub device: DeviceConfig,
    pub operating_point: OperatingPointConfig,
    pub chain: ChainConfig,
    pub amp_chain: AmpChainConfig,
    pub grids: GridsConfig,
    pub squeeze: SqueezeConfig,
    #[serde(default)]
    pub timing: TimingConfig,
}

fn default_output_dir() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub line_length_m: f64,
    pub conductor_width_m: f64,
    pub conductor_thickness_m: f64,
    pub dielectric_thickness_m: f64,
    pub stub_length_avg_m: f64,
    pub stub_width_m: f64,
    pub stub_pitch_m: f64,
    pub stub_modulation_amplitude_m: f64,
    pub stub_modulation_wavelength_m: f64,
    /// Optional; defaults to 0.052c with a logged notice.
    pub bare_phase_velocity_stub_frac_c: Option<f64>,
    pub loss_slope_db_per_ghz: f64,
    pub i_star_a: f64,
    pub i_c_a: f64,
    pub electrical: ElectricalConfig,
}

/// Loaded-line electrical targets: either impedance/velocity or the
/// distributed constants directly.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectricalConfig {
    pub z0_ohm: Option<f64>,
    pub v_ph_frac_c: Option<f64>,
    pub l_per_m: Option<f64>,
    pub c_per_m: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPointConfig {
    pub i_dc_a: f64,
    pub f_pump_hz: f64,
    /// Device-referred pump current amplitude (a calibration constant).
    pub pump_current_a: f64,
    pub f_signal_hz: f64,
    pub signal_power_dbm: f64,
    #[serde(default)]
    pub signal_phase_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub post_gain_db: f64,
    pub post_noise_quanta: f64,
    pub t_hot_k: f64,
    pub t_cold_k: f64,
    /// TWPA input bath; defaults to the cold-load temperature.
    pub input_temp_k: Option<f64>,
    pub ripple_amplitude: f64,
    pub ripple_spacing_hz: f64,
    pub drift_db_per_100min: f64,
    pub rbw_hz: f64,
    pub n_avg: u64,
    pub radiometer_noise: bool,
    pub reflect_in_db: f64,
    pub reflect_out_db: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmpChainConfig {
    pub n_hemt_quanta: f64,
    pub n_a_quanta: f64,
    /// Squeezed-path excess at maximum pump; scales linearly with pump power.
    pub n_pa_max_quanta: f64,
    pub a_att_db: f64,
    pub n_mk_quanta: f64,
    /// "vacuum_times_gsq" (default) or "literal_printed".
    #[serde(default)]
    pub orientation: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsConfig {
    pub dispersion_f_start_hz: f64,
    pub dispersion_f_stop_hz: f64,
    pub dispersion_f_step_hz: f64,
    pub gain_f_start_hz: f64,
    pub gain_f_stop_hz: f64,
    pub gain_points: usize,
    pub noise_f_start_hz: f64,
    pub noise_f_stop_hz: f64,
    pub noise_points: usize,
    pub compression_p_start_dbm: f64,
    pub compression_p_stop_dbm: f64,
    pub compression_points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeConfig {
    pub f_pump_hz: f64,
    pub atten_max_db: f64,
    pub points: usize,
    #[serde(default)]
    pub noise_sigma_quanta: f64,
}

/// Trace measurement times in minutes (drift scenario control).
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TimingConfig {
    #[serde(default)]
    pub hot_min: f64,
    #[serde(default)]
    pub cold_min: f64,
    #[serde(default)]
    pub on_min: f64,
    #[serde(default)]
    pub off_min: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("parse failure: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn paper_device_preset() -> Self {
        Self::from_toml(PAPER_DEVICE_PRESET).expect("bundled preset must parse")
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("device.line_length_m", self.device.line_length_m),
            ("device.stub_pitch_m", self.device.stub_pitch_m),
            ("device.stub_length_avg_m", self.device.stub_length_avg_m),
            (
                "device.stub_modulation_wavelength_m",
                self.device.stub_modulation_wavelength_m,
            ),
            ("device.i_star_a", self.device.i_star_a),
            ("device.i_c_a", self.device.i_c_a),
            ("operating_point.f_pump_hz", self.operating_point.f_pump_hz),
            ("chain.rbw_hz", self.chain.rbw_hz),
            ("chain.ripple_spacing_hz", self.chain.ripple_spacing_hz),
            ("grids.dispersion_f_step_hz", self.grids.dispersion_f_step_hz),
            ("squeeze.f_pump_hz", self.squeeze.f_pump_hz),
        ];
        for (path, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("{path}: must be strictly positive")));
            }
        }
        if self.grids.gain_points < 2 || self.grids.noise_points < 2 || self.grids.compression_points < 2 {
            return Err(Error::config("grids: point counts must be at least 2"));
        }
        if self.squeeze.points < 2 {
            return Err(Error::config("squeeze.points: must be at least 2"));
        }
        if !(self.chain.t_hot_k > self.chain.t_cold_k) {
            return Err(Error::config("chain.t_hot_k: must exceed chain.t_cold_k"));
        }
        if self.chain.reflect_in_db > 0.0 || self.chain.reflect_out_db > 0.0 {
            return Err(Error::config("chain.reflect_*_db: reflection magnitudes must be <= 0 dB"));
        }
        let e = &self.device.electrical;
        let targets = e.z0_ohm.is_some() && e.v_ph_frac_c.is_some();
        let direct = e.l_per_m.is_some() && e.c_per_m.is_some();
        if targets == direct {
            return Err(Error::config(
                "device.electrical: provide exactly one of (z0_ohm, v_ph_frac_c) or (l_per_m, c_per_m)",
            ));
        }
        if let Some(o) = &self.amp_chain.orientation {
            if o != "vacuum_times_gsq" && o != "literal_printed" {
                return Err(Error::config(format!(
                    "amp_chain.orientation: unknown value `{o}`"
                )));
            }
        }
        self.geometry()?
            .validate()
            .map_err(|e| Error::config(format!("device: {e}")))?;
        Ok(())
    }

    /// Resolve the device description into core geometry. Emits a notice
    /// on stderr when the stub velocity falls back to its default.
    pub fn geometry(&self) -> Result<DeviceGeometry> {
        let d = &self.device;
        let (l, c) = match (&d.electrical.z0_ohm, &d.electrical.v_ph_frac_c) {
            (Some(z0), Some(frac)) => {
                let lc = line_constants_from_targets(*z0, frac * C_LIGHT)
                    .map_err(|e| Error::config(format!("device.electrical: {e}")))?;
                (lc.l_per_m, lc.c_per_m)
            }
            _ => (
                d.electrical.l_per_m.expect("validated"),
                d.electrical.c_per_m.expect("validated"),
            ),
        };
        let stub_velocity = match d.bare_phase_velocity_stub_frac_c {
            Some(v) => v,
            None => {
                eprintln!(
                    "notice: device.bare_phase_velocity_stub_frac_c not set; defaulting to {DEFAULT_STUB_VELOCITY_FRAC_C}c (quarter-wave stubs near 150 GHz)"
                );
                DEFAULT_STUB_VELOCITY_FRAC_C
            }
        };
        Ok(DeviceGeometry {
            line_length: d.line_length_m,
            conductor_width: d.conductor_width_m,
            conductor_thickness: d.conductor_thickness_m,
            dielectric_thickness: d.dielectric_thickness_m,
            stub_length_avg: d.stub_length_avg_m,
            stub_width: d.stub_width_m,
            stub_pitch: d.stub_pitch_m,
            stub_modulation_amplitude: d.stub_modulation_amplitude_m,
            stub_modulation_wavelength: d.stub_modulation_wavelength_m,
            bare_phase_velocity_stub: stub_velocity,
            loss_slope_db_per_ghz: d.loss_slope_db_per_ghz,
            line_inductance_per_m: l,
            line_capacitance_per_m: c,
            i_star: d.i_star_a,
            i_c: d.i_c_a,
        })
    }

    pub fn operating_point(&self) -> cme::OperatingPoint {
        let o = &self.operating_point;
        cme::OperatingPoint {
            i_dc: o.i_dc_a,
            f_pump: o.f_pump_hz,
            i_pump: o.pump_current_a,
            f_signal: o.f_signal_hz,
            signal_power_w: twpa_core::constants::dbm_to_watts(o.signal_power_dbm),
            signal_phase: o.signal_phase_rad,
        }
    }

    /// Chain model for trace synthesis; the ripple period is rescaled by
    /// the DC retuning of the phase velocity.
    pub fn chain_model(&self, geometry: &DeviceGeometry) -> Result<ChainModel> {
        let c = &self.chain;
        let biased = device::dc_retuning(geometry, self.operating_point.i_dc_a)?;
        let scale = biased.v_ph / geometry.line_constants().v_ph;
        Ok(ChainModel {
            post_gain: 10f64.powf(c.post_gain_db / 10.0),
            post_noise_quanta: c.post_noise_quanta,
            t_hot_k: c.t_hot_k,
            t_cold_k: c.t_cold_k,
            input_temp_k: c.input_temp_k.unwrap_or(c.t_cold_k),
            ripple_amplitude: c.ripple_amplitude,
            ripple_spacing_hz: c.ripple_spacing_hz,
            ripple_bias_scale: scale,
            drift_db_per_100min: c.drift_db_per_100min,
            rbw_hz: c.rbw_hz,
            n_avg: c.n_avg,
            radiometer_noise: c.radiometer_noise,
        })
    }

    /// Cascade parameters used by the squeezing analysis (gains filled
    /// per point by the caller).
    pub fn amp_chain_params(&self) -> AmpChainParams {
        let a = &self.amp_chain;
        AmpChainParams {
            g_a: 1.0,
            g_sq: 1.0,
            n_a: a.n_a_quanta,
            n_pa: 0.0,
            n_hemt: a.n_hemt_quanta,
            a_att: 10f64.powf(-a.a_att_db.abs() / 10.0),
            n_mk: a.n_mk_quanta,
            orientation: match a.orientation.as_deref() {
                Some("literal_printed") => SqueezeOrientation::LiteralPrinted,
                _ => SqueezeOrientation::VacuumTimesGsq,
            },
        }
    }

    pub fn dispersion_grid(&self) -> Vec<f64> {
        let g = &self.grids;
        let n = ((g.dispersion_f_stop_hz - g.dispersion_f_start_hz) / g.dispersion_f_step_hz).round() as usize;
        (0..=n)
            .map(|k| g.dispersion_f_start_hz + k as f64 * g.dispersion_f_step_hz)
            .collect()
    }

    pub fn gain_grid(&self) -> Vec<f64> {
        linspace(self.grids.gain_f_start_hz, self.grids.gain_f_stop_hz, self.grids.gain_points)
    }

    pub fn noise_grid(&self) -> Vec<f64> {
        linspace(self.grids.noise_f_start_hz, self.grids.noise_f_stop_hz, self.grids.noise_points)
    }

    pub fn compression_grid_w(&self) -> Vec<f64> {
        linspace(
            self.grids.compression_p_start_dbm,
            self.grids.compression_p_stop_dbm,
            self.grids.compression_points,
        )
        .into_iter()
        .map(twpa_core::constants::dbm_to_watts)
        .collect()
    }

    pub fn squeeze_attenuations_db(&self) -> Vec<f64> {
        linspace(0.0, self.squeeze.atten_max_db, self.squeeze.points)
    }
}

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parses_and_validates() {
        let config = ExperimentConfig::paper_device_preset();
        let g = config.geometry().unwrap();
        assert_eq!(g.line_length, 86e-3);
        assert!((g.line_inductance_per_m - 2.138e-5).abs() / 2.138e-5 < 1e-3);
        assert_eq!(twpa_core::device::stub_count(&g), 86_000);
    }

    #[test]
    fn electrical_targets_are_exclusive() {
        let mut text = PAPER_DEVICE_PRESET.to_string();
        text = text.replace("z0_ohm = 50.0", "z0_ohm = 50.0\nl_per_m = 1e-5\nc_per_m = 1e-8");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("device.electrical"));
    }

    #[test]
    fn bad_field_is_named() {
        let text = PAPER_DEVICE_PRESET.replace("stub_pitch_m = 2e-6", "stub_pitch_m = -2e-6");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("device.stub_pitch_m"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{PAPER_DEVICE_PRESET}\n[nonsense]\nfoo = 1\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
