//! Run configuration: one TOML file with named sections.
//!
//! Sections are optional at parse time; each command asks for the ones it
//! needs through [`RunConfig::section`], so a missing section is reported
//! by name before any computation starts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use purcellsim::cavity::{coupling_g, CouplingGeometry, Resonator};
use purcellsim::sequence::{PulseProfile, SpectralLine};
use purcellsim::spin::SpinSystem;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub spin_system: Option<SpinSystemConfig>,
    #[serde(default)]
    pub resonators: BTreeMap<String, ResonatorConfig>,
    pub coupling: Option<CouplingConfig>,
    pub line: Option<LineConfig>,
    pub relaxation: Option<RelaxationConfig>,
    pub transitions: Option<TransitionsConfig>,
    pub purcell: Option<PurcellConfig>,
    pub inversion: Option<InversionConfig>,
    pub saturation: Option<SaturationConfig>,
    pub rabi: Option<RabiConfig>,
    pub fieldsweep: Option<FieldSweepConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSystemConfig {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "A_Hz")]
    pub a_hz: f64,
    #[serde(rename = "gamma_e_Hz_per_T")]
    pub gamma_e: f64,
    #[serde(rename = "gamma_n_Hz_per_T")]
    pub gamma_n: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorConfig {
    #[serde(rename = "omega0_Hz")]
    pub omega0_hz: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "kappa1_Hz")]
    pub kappa1_hz: f64,
    #[serde(rename = "kappa2_Hz")]
    pub kappa2_hz: f64,
}

/// Either `g_Hz` directly or the field geometry plus a matrix element.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(rename = "dB1y_T", default)]
    pub db1y_t: f64,
    #[serde(rename = "dB1z_T", default)]
    pub db1z_t: f64,
    #[serde(default)]
    pub theta_rad: f64,
    pub matrix_element: Option<f64>,
    #[serde(rename = "g_Hz")]
    pub g_hz: Option<f64>,
}

/// Strain doublet; `center_Hz` is the doublet midpoint relative to the
/// resonator.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    #[serde(rename = "center_Hz")]
    pub center_hz: f64,
    #[serde(rename = "splitting_Hz")]
    pub splitting_hz: f64,
    #[serde(rename = "fwhm_Hz")]
    pub fwhm_hz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationConfig {
    pub gamma_nr_per_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionsConfig {
    #[serde(rename = "B0_T")]
    pub b0_t: f64,
    #[serde(default)]
    pub min_matrix_element: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurcellConfig {
    pub resonator: String,
    /// Falls back to 1/Γ_P(0) from the coupling.
    pub t1_resonant_s: Option<f64>,
    /// Rows follow a leading δ = 0 row.
    #[serde(rename = "detunings_Hz")]
    pub detunings: Sweep,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ProfileName {
    Rectangular,
    Filtered,
}

impl From<ProfileName> for PulseProfile {
    fn from(p: ProfileName) -> Self {
        match p {
            ProfileName::Rectangular => PulseProfile::Rectangular,
            ProfileName::Filtered => PulseProfile::CavityFiltered,
        }
    }
}

fn rectangular() -> ProfileName {
    ProfileName::Rectangular
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionConfig {
    pub resonator: String,
    pub t_invert_s: f64,
    #[serde(default = "rectangular")]
    pub invert_profile: ProfileName,
    pub t_pi_detect_s: f64,
    pub times_s: Sweep,
    #[serde(rename = "g_Hz")]
    pub g_hz: Option<f64>,
    #[serde(default)]
    pub noise_sigma: f64,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SaturationMode {
    Plain,
    Swept,
}

fn default_saturation_bw() -> f64 {
    purcellsim::sequence::DEFAULT_SATURATION_BANDWIDTH_HZ
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturationConfig {
    pub resonator: String,
    pub mode: SaturationMode,
    #[serde(rename = "bandwidth_Hz", default = "default_saturation_bw")]
    pub bandwidth_hz: f64,
    #[serde(rename = "carrier_offset_Hz", default)]
    pub carrier_offset_hz: f64,
    /// Swept mode only; derived from the line extent when absent.
    #[serde(rename = "field_steps_T")]
    pub field_steps_t: Option<Vec<f64>>,
    #[serde(rename = "dfdB_Hz_per_T")]
    pub dfdb_hz_per_t: f64,
    /// Plateau detuning of the field pulse; no pulse when absent.
    #[serde(rename = "pulse_detuning_Hz")]
    pub pulse_detuning_hz: Option<f64>,
    #[serde(rename = "coil_bandwidth_Hz", default = "one")]
    pub coil_bandwidth_hz: f64,
    #[serde(default = "one")]
    pub buffer_s: f64,
    pub t_pi_detect_s: f64,
    pub times_s: Sweep,
    #[serde(rename = "g_Hz")]
    pub g_hz: Option<f64>,
    #[serde(default)]
    pub noise_sigma: f64,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiConfig {
    pub resonator: String,
    pub pulse_s: f64,
    #[serde(rename = "powers_W")]
    pub powers: Sweep,
    #[serde(rename = "g_Hz")]
    pub g_hz: Option<f64>,
    #[serde(default)]
    pub noise_sigma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSweepConfig {
    pub resonator: String,
    #[serde(rename = "fields_T")]
    pub fields: Sweep,
}

/// An explicit list, or `{ start, stop, points, log }`.
#[derive(Debug, Deserialize, Clone)]
#[serde(untagged)]
pub enum Sweep {
    Values(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl Sweep {
    pub fn values(&self, what: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Sweep::Values(v) => v.clone(),
            Sweep::Range(r) => {
                if r.points == 0 {
                    return Err(CliError::config(format!("{what}: points must be positive")));
                }
                if r.log && !(r.start > 0.0 && r.stop > 0.0) {
                    return Err(CliError::config(format!("{what}: log range needs positive bounds")));
                }
                let (a, b) = if r.log {
                    (r.start.ln(), r.stop.ln())
                } else {
                    (r.start, r.stop)
                };
                let step = if r.points > 1 { (b - a) / (r.points - 1) as f64 } else { 0.0 };
                (0..r.points)
                    .map(|k| {
                        let x = a + step * k as f64;
                        if r.log {
                            x.exp()
                        } else {
                            x
                        }
                    })
                    .collect()
            }
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config(format!("{what}: need at least one finite value")));
        }
        Ok(v)
    }
}

/// Parsed configuration together with the hash of its source text.
pub struct Loaded {
    pub config: RunConfig,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config: RunConfig = toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    Ok(Loaded { config, sha256 })
}

impl RunConfig {
    pub fn section<'a, T>(&'a self, name: &str, value: &'a Option<T>) -> Result<&'a T, CliError> {
        value
            .as_ref()
            .ok_or_else(|| CliError::config(format!("missing [{name}] section")))
    }

    pub fn spin_system(&self) -> Result<SpinSystem, CliError> {
        let s = self.section("spin_system", &self.spin_system)?;
        SpinSystem::new(s.s, s.i, s.a_hz, s.gamma_e, s.gamma_n).map_err(|e| CliError::config(format!("[spin_system]: {e}")))
    }

    pub fn resonator(&self, name: &str) -> Result<Resonator, CliError> {
        let r = self
            .resonators
            .get(name)
            .ok_or_else(|| CliError::config(format!("missing [resonators.{name}] section")))?;
        Resonator::new(r.omega0_hz, r.q, r.kappa1_hz, r.kappa2_hz)
            .map_err(|e| CliError::config(format!("[resonators.{name}]: {e}")))
    }

    /// All resonators in name order.
    pub fn all_resonators(&self) -> Result<Vec<(String, Resonator)>, CliError> {
        if self.resonators.is_empty() {
            return Err(CliError::config("missing [resonators.*] section"));
        }
        self.resonators.keys().map(|k| Ok((k.clone(), self.resonator(k)?))).collect()
    }

    /// Coupling in Hz; a protocol-level `g_Hz` takes precedence.
    pub fn coupling_g(&self, override_hz: Option<f64>) -> Result<f64, CliError> {
        let g = match override_hz {
            Some(g) => g,
            None => {
                let c = self.section("coupling", &self.coupling)?;
                match (c.g_hz, c.matrix_element) {
                    (Some(g), _) => g,
                    (None, Some(me)) => {
                        let geom = CouplingGeometry::new(c.db1y_t, c.db1z_t, c.theta_rad, me)
                            .map_err(|e| CliError::config(format!("[coupling]: {e}")))?;
                        coupling_g(&geom, self.spin_system()?.gamma_e())
                    }
                    (None, None) => return Err(CliError::config("[coupling] needs g_Hz or matrix_element")),
                }
            }
        };
        if !(g > 0.0 && g.is_finite()) {
            return Err(CliError::config(format!("coupling g = {g} Hz must be positive")));
        }
        Ok(g)
    }

    pub fn line(&self) -> Result<SpectralLine, CliError> {
        let l = self.section("line", &self.line)?;
        SpectralLine::strain_doublet(l.center_hz, l.splitting_hz, l.fwhm_hz).map_err(|e| CliError::config(format!("[line]: {e}")))
    }

    pub fn gamma_nr(&self) -> Result<f64, CliError> {
        let g = self.section("relaxation", &self.relaxation)?.gamma_nr_per_s;
        if !(g >= 0.0 && g.is_finite()) {
            return Err(CliError::config(
                "[relaxation]: gamma_nr_per_s must be finite and non-negative",
            ));
        }
        Ok(g)
    }

    pub fn seed(&self, cli: Option<u64>) -> u64 {
        cli.or(self.seed).unwrap_or(0)
    }
}
