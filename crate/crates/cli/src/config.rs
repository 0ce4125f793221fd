//! Strict run configuration: flat, typed key-value sections mirroring the
//! simulation modules. Unknown keys are rejected — silent typos in physics
//! configs are the dominant failure mode.
//!
//! Frequencies, Rabi amplitudes, detunings and linewidths are given in Hz
//! and converted to angular frequencies internally; incoherent pump rates
//! are plain rates in 1/s.

use anyhow::{bail, Context};
use serde::Deserialize;

use lwi_core::atom::{DriveField, DriveStrength, FieldName, LevelScheme, PumpSet};
use lwi_core::constants::hz_to_angular;
use lwi_core::response::{DopplerSettings, MediumResponse};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub drives: DrivesConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub pumps: PumpsConfig,
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default)]
    pub doppler: DopplerConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
    pub spectrum: Option<SpectrumConfig>,
    pub noise_sweep: Option<NoiseSweepConfig>,
    pub power: Option<PowerConfig>,
    pub threshold: Option<ThresholdConfig>,
    pub cavity_model: Option<CavityModelConfig>,
    pub gain3d: Option<Gain3dConfig>,
    pub ring: Option<RingConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    /// "mercury" (13 levels) or "four-level".
    pub kind: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivesConfig {
    pub strong_rabi_hz: Option<f64>,
    pub weak_rabi_hz: Option<f64>,
    pub repump_rabi_hz: Option<f64>,
    pub strong_power_w: Option<f64>,
    pub weak_power_w: Option<f64>,
    pub repump_power_w: Option<f64>,
    pub strong_waist_m: Option<f64>,
    pub weak_waist_m: Option<f64>,
    pub repump_waist_m: Option<f64>,
    #[serde(default)]
    pub strong_detuning_hz: f64,
    #[serde(default)]
    pub weak_detuning_hz: f64,
    #[serde(default)]
    pub repump_detuning_hz: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub strong_linewidth_hz: f64,
    #[serde(default)]
    pub weak_linewidth_hz: f64,
    #[serde(default)]
    pub repump_linewidth_hz: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpsConfig {
    /// Incoherent pump rate on the lasing transition (1/s).
    #[serde(default)]
    pub r: f64,
    /// Incoherent Δm = 0 pump rate between c and d (1/s).
    #[serde(default)]
    pub r_cd: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub temperature_k: f64,
    /// Number density override (1/m³); derived from the vapor pressure at
    /// `temperature_k` when omitted.
    pub density_per_m3: Option<f64>,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self { temperature_k: 300.0, density_per_m3: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DopplerConfig {
    pub enabled: bool,
    pub nodes_per_axis: usize,
    /// Model the repump as a running wave with its own Doppler shift instead
    /// of flooded light.
    pub repump_shifted: bool,
}

impl Default for DopplerConfig {
    fn default() -> Self {
        Self { enabled: false, nodes_per_axis: 24, repump_shifted: false }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub rabi_hz: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { rabi_hz: 1.0e3 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub min_detuning_hz: f64,
    pub max_detuning_hz: f64,
    pub points: usize,
    /// Optional list of pump rates r (1/s); one χ-column pair per entry.
    pub pump_rates: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweepConfig {
    /// "linewidth": ⟨χ″(0)⟩ against b_s = b_w = b for each temperature.
    /// "pump": ⟨χ″(0)⟩ against r for each linewidth b_s = b_w = b.
    pub mode: String,
    pub min_linewidth_hz: Option<f64>,
    pub max_linewidth_hz: Option<f64>,
    pub linewidth_points: Option<usize>,
    pub temperatures_k: Option<Vec<f64>>,
    pub min_pump_rate: Option<f64>,
    pub max_pump_rate: Option<f64>,
    pub pump_points: Option<usize>,
    pub linewidths_hz: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub min_pump_rate: f64,
    pub max_pump_rate: f64,
    pub points: usize,
    /// (b_s, b_w) pairs in Hz; one output file per pair.
    pub linewidth_sets_hz: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub b_s_grid_hz: Vec<f64>,
    pub b_w_grid_hz: Vec<f64>,
    /// Upper end of the pump-rate bisection window (1/s).
    pub max_pump_rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityModelConfig {
    pub quality_factor: f64,
    pub mode_volume_m3: f64,
    pub overlap_ratio: f64,
    pub waist_m: f64,
    pub pump_area_m2: f64,
    /// Spectral standard deviation of the pump light (Hz).
    pub pump_sigma_hz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gain3dConfig {
    pub waist_m: f64,
    pub strong_power_w: f64,
    pub weak_power_w: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub x_half_extent_m: f64,
    pub y_half_extent_m: f64,
    pub z_half_extent_m: f64,
    /// Susceptibility lookup-table resolution; 0 disables the table.
    pub table_nodes: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub arm_length_m: f64,
    pub mirror_radius_m: f64,
    pub aperture_m: f64,
    pub medium_length_m: f64,
    pub slices: usize,
    pub loss_factor: f64,
    pub grid_n: usize,
    /// Window side as a multiple of the aperture side.
    pub window_factor: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub modes: usize,
    /// Drive-beam waists (m) for the loaded sweep; empty = empty cavity only.
    #[serde(default)]
    pub waist_scan_m: Vec<f64>,
    /// Compute M² for this many leading modes.
    #[serde(default)]
    pub m2_modes: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: "out".into() }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = toml::from_str(text).context("config parse error")?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        match self.scheme.kind.as_str() {
            "mercury" | "four-level" => {}
            other => bail!("unknown scheme kind '{other}' (expected 'mercury' or 'four-level')"),
        }
        if self.pumps.r < 0.0 || self.pumps.r_cd < 0.0 {
            bail!("pump rates must be nonnegative");
        }
        if self.probe.rabi_hz <= 0.0 {
            bail!("probe Rabi frequency must be positive");
        }
        if self.medium.temperature_k <= 0.0 {
            bail!("temperature must be positive");
        }
        for b in [
            self.noise.strong_linewidth_hz,
            self.noise.weak_linewidth_hz,
            self.noise.repump_linewidth_hz,
        ] {
            if b < 0.0 {
                bail!("linewidths must be nonnegative");
            }
        }
        if let Some(s) = &self.spectrum {
            if s.points < 2 || s.max_detuning_hz <= s.min_detuning_hz {
                bail!("spectrum grid needs points >= 2 and an increasing detuning range");
            }
        }
        if let Some(c) = &self.cavity_model {
            if c.quality_factor <= 0.0 {
                bail!("cavity quality factor must be positive");
            }
        }
        Ok(())
    }

    pub fn scheme(&self) -> LevelScheme {
        match self.scheme.kind.as_str() {
            "mercury" => LevelScheme::mercury(),
            _ => LevelScheme::four_level(),
        }
    }

    fn drive(&self, name: FieldName) -> anyhow::Result<Option<DriveField>> {
        let d = &self.drives;
        let (rabi, power, waist, detuning, linewidth) = match name {
            FieldName::Strong => (
                d.strong_rabi_hz,
                d.strong_power_w,
                d.strong_waist_m,
                d.strong_detuning_hz,
                self.noise.strong_linewidth_hz,
            ),
            FieldName::Weak => (
                d.weak_rabi_hz,
                d.weak_power_w,
                d.weak_waist_m,
                d.weak_detuning_hz,
                self.noise.weak_linewidth_hz,
            ),
            FieldName::Repump => (
                d.repump_rabi_hz,
                d.repump_power_w,
                d.repump_waist_m,
                d.repump_detuning_hz,
                self.noise.repump_linewidth_hz,
            ),
            FieldName::Probe => bail!("the probe is configured through [probe]"),
        };
        let strength = match (rabi, power) {
            (Some(_), Some(_)) => {
                bail!("field '{}' has both a Rabi amplitude and a power", name.label())
            }
            (Some(hz), None) => Some(DriveStrength::ComponentMagnitude(hz_to_angular(hz))),
            (None, Some(w)) => {
                let waist = waist
                    .with_context(|| format!("field '{}' needs a waist with its power", name.label()))?;
                Some(DriveStrength::Power { watts: w, waist })
            }
            (None, None) => None,
        };
        Ok(strength.map(|s| {
            DriveField::new(name, s)
                .with_detuning(hz_to_angular(detuning))
                .with_linewidth(hz_to_angular(linewidth))
        }))
    }

    pub fn drive_fields(&self) -> anyhow::Result<Vec<DriveField>> {
        let mut out = Vec::new();
        for name in [FieldName::Strong, FieldName::Weak, FieldName::Repump] {
            if let Some(f) = self.drive(name)? {
                out.push(f);
            }
        }
        Ok(out)
    }

    pub fn pump_set(&self) -> PumpSet {
        PumpSet { r: self.pumps.r, r_cd: self.pumps.r_cd }
    }

    /// Assemble the medium-response engine, optionally overriding the
    /// Doppler and noise stages (the `--doppler` / `--noise` toggles).
    pub fn response(
        &self,
        doppler_override: Option<bool>,
        noise_override: Option<bool>,
    ) -> anyhow::Result<MediumResponse> {
        self.response_at(self.medium.temperature_k, doppler_override, noise_override)
    }

    /// Same, at an explicit vapor temperature (density follows the vapor
    /// pressure unless overridden in the config).
    pub fn response_at(
        &self,
        temperature_k: f64,
        doppler_override: Option<bool>,
        noise_override: Option<bool>,
    ) -> anyhow::Result<MediumResponse> {
        let mut drives = self.drive_fields()?;
        if noise_override == Some(false) {
            for d in &mut drives {
                d.linewidth = 0.0;
            }
        }
        let make_settings = || -> anyhow::Result<DopplerSettings> {
            Ok(DopplerSettings::mercury(temperature_k)?
                .with_nodes(self.doppler.nodes_per_axis)
                .with_repump_shift(self.doppler.repump_shifted))
        };
        let doppler = match doppler_override {
            Some(false) => None,
            Some(true) => Some(make_settings()?),
            None => {
                if self.doppler.enabled {
                    Some(make_settings()?)
                } else {
                    None
                }
            }
        };
        let density = match self.medium.density_per_m3 {
            Some(n) => n,
            None => lwi_core::doppler::vapor_density(temperature_k)?,
        };
        Ok(MediumResponse::builder(self.scheme())
            .drives(drives)
            .pumps(self.pump_set())
            .probe_rabi(hz_to_angular(self.probe.rabi_hz))
            .density(density)
            .doppler(doppler)
            .build()?)
    }

    /// Flat key=value echo of every parameter for output headers.
    pub fn echo(&self, raw: &str) -> Vec<(String, String)> {
        let mut out = vec![("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string())];
        for line in raw.lines() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            out.push(("config".to_string(), trimmed.to_string()));
        }
        out
    }
}
