//! TOML scenario files. Every key has a documented default; unknown keys are errors.

use std::path::{Path, PathBuf};

use dce_core::bosonics::FockDims;
use dce_core::dressed_me::{DressingOptions, LiouvillianOptions, PairSelection};
use dce_core::evolve::PropagationOptions;
use dce_core::model::locate_resonance;
use dce_core::SystemParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Levels,
    Dynamics,
    Spectrum,
    Splitting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Ground,
    Gibbs,
    ProductThermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairs {
    All,
    Bandwidth,
    Secular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Reserved; every path is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub generator: GeneratorSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub splitting: SplittingSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub omega_m: f64,
    /// Cavity frequency; exclusive with `detuning`. With neither, the cavity sits at resonance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    /// `(omega_c - omega_r) / omega_m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub t_kappa: f64,
    pub t_gamma: f64,
    pub photon_levels: usize,
    pub phonon_levels: usize,
    pub include_dce: bool,
}

impl Default for SystemSection {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            omega_m: p.omega_m,
            omega_c: None,
            detuning: None,
            g: p.g,
            kappa: p.kappa,
            gamma: p.gamma,
            t_kappa: p.t_kappa,
            t_gamma: p.t_gamma,
            photon_levels: p.dims.n_photon_levels(),
            phonon_levels: p.dims.n_phonon_levels(),
            include_dce: p.include_dce,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorSection {
    pub pairs: Pairs,
    /// Cap on `|omega - omega'|` when `pairs = "bandwidth"`, units of `omega_m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    /// Frequency binning tolerance, units of `omega_m`.
    pub bin_tolerance: f64,
    /// Transitions at or below this frequency (units of `omega_m`) are dropped.
    pub omega_min: f64,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        let d = DressingOptions::default();
        Self { pairs: Pairs::All, bandwidth: None, bin_tolerance: d.bin_tol, omega_min: d.omega_min }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub omega_c_min: f64,
    pub omega_c_max: f64,
    pub points: usize,
    /// Number of excited levels written (`E1..EM`).
    pub levels: usize,
    /// Level pairs whose avoided crossing is summarized.
    pub tracked_pairs: Vec<[usize; 2]>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { omega_c_min: 0.9, omega_c_max: 1.15, points: 200, levels: 6, tracked_pairs: vec![[3, 5]] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub t_max: f64,
    pub dt: f64,
    pub initial_state: InitialState,
    /// Temperature of a thermal initial state; defaults to `t_kappa`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_temperature: Option<f64>,
    pub positivity_tolerance: f64,
    pub trace_tolerance: f64,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        let o = PropagationOptions::default();
        Self {
            t_max: 400.0,
            dt: 0.5,
            initial_state: InitialState::Ground,
            initial_temperature: None,
            positivity_tolerance: o.positivity_tol,
            trace_tolerance: o.trace_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// Delay window; defaults to `20 / Gamma_tot`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    pub tau_step: f64,
    /// Times the window may be doubled while the correlation has not decayed.
    pub max_window_doublings: u32,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub normalize: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            tau_max: None,
            tau_step: dce_core::evolve::DEFAULT_TAU_STEP,
            max_window_doublings: 0,
            omega_min: 0.8,
            omega_max: 1.2,
            points: 2048,
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplittingSection {
    pub etas: Vec<f64>,
    pub omega_c_min: f64,
    pub omega_c_max: f64,
    pub x_tolerance: f64,
}

impl Default for SplittingSection {
    fn default() -> Self {
        Self { etas: vec![0.0, 0.005, 0.01, 0.02, 0.05, 0.1], omega_c_min: 0.9, omega_c_max: 1.15, x_tolerance: 1e-10 }
    }
}

fn positive(key: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{key} must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{key} must be non-negative, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let s = &self.system;
        positive("system.omega_m", s.omega_m)?;
        if let Some(w) = s.omega_c {
            positive("system.omega_c", w)?;
        }
        if s.omega_c.is_some() && s.detuning.is_some() {
            return Err(CliError::Config("system.omega_c and system.detuning are exclusive".into()));
        }
        if let Some(d) = s.detuning {
            if !d.is_finite() {
                return Err(CliError::Config(format!("system.detuning must be finite, got {d}")));
            }
        }
        for (k, v) in [("system.g", s.g), ("system.kappa", s.kappa), ("system.gamma", s.gamma), ("system.t_kappa", s.t_kappa), ("system.t_gamma", s.t_gamma)] {
            non_negative(k, v)?;
        }
        if s.photon_levels < 2 || s.phonon_levels < 2 {
            return Err(CliError::Config("system.photon_levels and system.phonon_levels must be at least 2".into()));
        }

        let g = &self.generator;
        match (g.pairs, g.bandwidth) {
            (Pairs::Bandwidth, Some(w)) => positive("generator.bandwidth", w)?,
            (Pairs::Bandwidth, None) => return Err(CliError::Config("generator.pairs = \"bandwidth\" needs generator.bandwidth".into())),
            (_, Some(_)) => return Err(CliError::Config("generator.bandwidth is only used with pairs = \"bandwidth\"".into())),
            _ => {}
        }
        positive("generator.bin_tolerance", g.bin_tolerance)?;
        positive("generator.omega_min", g.omega_min)?;

        match self.scenario {
            Scenario::Levels => {
                let w = &self.sweep;
                positive("sweep.omega_c_min", w.omega_c_min)?;
                if !(w.omega_c_max > w.omega_c_min) || !w.omega_c_max.is_finite() {
                    return Err(CliError::Config("sweep.omega_c_max must exceed sweep.omega_c_min".into()));
                }
                if w.points < 3 {
                    return Err(CliError::Config("sweep.points must be at least 3".into()));
                }
                if w.levels == 0 {
                    return Err(CliError::Config("sweep.levels must be at least 1".into()));
                }
                if let Some(p) = w.tracked_pairs.iter().find(|p| p[0] == p[1] || p[0].max(p[1]) > w.levels) {
                    return Err(CliError::Config(format!("sweep.tracked_pairs entry {p:?} must name two distinct levels in 0..={}", w.levels)));
                }
            }
            Scenario::Dynamics => {
                let d = &self.dynamics;
                positive("dynamics.t_max", d.t_max)?;
                positive("dynamics.dt", d.dt)?;
                positive("dynamics.positivity_tolerance", d.positivity_tolerance)?;
                positive("dynamics.trace_tolerance", d.trace_tolerance)?;
                if let Some(t) = d.initial_temperature {
                    non_negative("dynamics.initial_temperature", t)?;
                }
            }
            Scenario::Spectrum => {
                let p = &self.spectrum;
                if let Some(t) = p.tau_max {
                    positive("spectrum.tau_max", t)?;
                } else if !(s.kappa + s.gamma > 0.0) {
                    return Err(CliError::Config("spectrum.tau_max is required when kappa + gamma = 0".into()));
                }
                positive("spectrum.tau_step", p.tau_step)?;
                positive("spectrum.omega_min", p.omega_min)?;
                if !(p.omega_max > p.omega_min) || !p.omega_max.is_finite() {
                    return Err(CliError::Config("spectrum.omega_max must exceed spectrum.omega_min".into()));
                }
                if p.points < 2 {
                    return Err(CliError::Config("spectrum.points must be at least 2".into()));
                }
            }
            Scenario::Splitting => {
                let p = &self.splitting;
                if p.etas.is_empty() {
                    return Err(CliError::Config("splitting.etas is empty".into()));
                }
                for &eta in &p.etas {
                    non_negative("splitting.etas", eta)?;
                }
                positive("splitting.omega_c_min", p.omega_c_min)?;
                if !(p.omega_c_max > p.omega_c_min) || !p.omega_c_max.is_finite() {
                    return Err(CliError::Config("splitting.omega_c_max must exceed splitting.omega_c_min".into()));
                }
                positive("splitting.x_tolerance", p.x_tolerance)?;
            }
        }
        Ok(())
    }

    /// Parameters with `omega_c` left at `omega_m` (the caller resolves it).
    fn base_params(&self) -> CliResult<SystemParams> {
        let s = &self.system;
        let dims = FockDims::new(s.photon_levels, s.phonon_levels)?;
        Ok(SystemParams {
            omega_m: s.omega_m,
            omega_c: s.omega_c.unwrap_or(s.omega_m),
            g: s.g,
            kappa: s.kappa,
            gamma: s.gamma,
            t_kappa: s.t_kappa,
            t_gamma: s.t_gamma,
            dims,
            include_dce: s.include_dce,
        })
    }

    /// Physical parameters with the cavity frequency resolved; also returns
    /// `omega_r / omega_m` when it had to be located.
    pub fn resolve(&self) -> CliResult<(SystemParams, Option<f64>)> {
        let mut p = self.base_params()?;
        if self.system.omega_c.is_some() {
            return Ok((p, None));
        }
        let omega_r = locate_resonance(&p)?.omega_r;
        p.omega_c = (omega_r + self.system.detuning.unwrap_or(0.0)) * p.omega_m;
        if !(p.omega_c > 0.0) {
            return Err(CliError::Config(format!("detuning puts omega_c at {}", p.omega_c)));
        }
        Ok((p, Some(omega_r)))
    }

    /// Parameters with an explicit cavity frequency, for commands that scan it.
    pub fn params_at(&self, omega_c: f64) -> CliResult<SystemParams> {
        Ok(self.base_params()?.with_omega_c(omega_c))
    }

    pub fn liouvillian_options(&self, params: &SystemParams) -> LiouvillianOptions {
        let g = &self.generator;
        let pairs = match g.pairs {
            Pairs::All => PairSelection::All,
            Pairs::Secular => PairSelection::Secular,
            Pairs::Bandwidth => PairSelection::Bandwidth(g.bandwidth.unwrap_or(f64::INFINITY) * params.omega_m),
        };
        let dressing = DressingOptions { bin_tol: g.bin_tolerance * params.omega_m, omega_min: g.omega_min * params.omega_m };
        LiouvillianOptions { pairs, dressing }
    }

    pub fn propagation_options(&self) -> PropagationOptions {
        PropagationOptions { positivity_tol: self.dynamics.positivity_tolerance, trace_tol: self.dynamics.trace_tolerance }
    }
}
