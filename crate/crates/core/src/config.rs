//! TOML run configuration for the half-space solver.
//!
//! Every section is optional and falls back to its documented default:
//! `c = 1`, `T∞ = 1` and `u∞1 = -2 c∞`, so an empty file describes a
//! supersonic inflow with no solvability conditions.

use crate::collision::KernelParams;
use crate::error::{Error, Result};
use crate::grid::MomentumGridSpec;
use crate::halfspace::{AssemblyQuad, BoundaryFamily, Method, SolverConfig};
use crate::juttner::MaxwellianParams;
use crate::macro5::sound_speed;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Mach number used when `physical.u1` is absent.
pub const DEFAULT_MACH: f64 = -2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalSection {
    pub c: f64,
    #[serde(alias = "T")]
    pub temperature: f64,
    /// Far-field bulk velocity along `x`; `None` means `DEFAULT_MACH · c∞`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u1: Option<f64>,
}

impl Default for PhysicalSection {
    fn default() -> Self {
        Self { c: 1.0, temperature: 1.0, u1: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub per_axis: usize,
    pub p_max: f64,
    pub stretch: f64,
    pub nx: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    pub x_stretch: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        let m = MomentumGridSpec::default();
        let s = SolverConfig::default();
        Self { per_axis: m.per_axis, p_max: m.p_max, stretch: m.stretch, nx: s.nx, x_max: s.x_max, x_stretch: s.x_stretch }
    }
}

/// Solver fields other than the `x` grid, which lives under `[grid]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub tau_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub gamma_ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_outer: usize,
    pub beta: f64,
    pub method: Method,
    pub restart: usize,
    pub fit_source: bool,
    pub smallness: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            tau: s.tau,
            tau_fraction: s.tau_fraction,
            gamma: s.gamma,
            gamma_ratio: s.gamma_ratio,
            tol: s.tol,
            max_iter: s.max_iter,
            max_outer: s.max_outer,
            beta: s.beta,
            method: s.method,
            restart: s.restart,
            fit_source: s.fit_source,
            smallness: s.smallness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Profile CSV; `--out` overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// JSON summary file in addition to stdout.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Where to write the effective configuration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_config: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub physical: PhysicalSection,
    pub kernel: KernelParams,
    pub grid: GridSection,
    pub quadrature: AssemblyQuad,
    pub solver: SolverSection,
    pub boundary: BoundaryFamily,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            physical: PhysicalSection::default(),
            kernel: KernelParams::default(),
            grid: GridSection::default(),
            quadrature: AssemblyQuad::default(),
            solver: SolverSection::default(),
            boundary: BoundaryFamily::MaxwellianBump { amplitude: 1e-3 },
            output: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let ph = &self.physical;
        if !(ph.c > 0.0 && ph.c.is_finite()) {
            return Err(Error::config("physical.c", format!("must be positive, got {}", ph.c)));
        }
        if !(ph.temperature > 0.0 && ph.temperature.is_finite()) {
            return Err(Error::config("physical.temperature", format!("must be positive, got {}", ph.temperature)));
        }
        if let Some(u1) = ph.u1 {
            if !u1.is_finite() {
                return Err(Error::config("physical.u1", "must be finite"));
            }
        }
        self.far_field()
            .map_err(|e| Error::config("physical", e.to_string()))?;
        self.kernel.validate()?;
        self.momentum_spec().validate()?;
        self.quadrature.validate()?;
        self.solver_config().validate().map_err(|e| match e {
            Error::Config { key, reason } if key == "solver.nx" || key == "solver.x_max" || key == "solver.x_stretch" => {
                Error::Config { key: key.replace("solver.", "grid."), reason }
            }
            other => other,
        })?;
        self.boundary.validate()
    }

    /// `u∞1`, resolving the default Mach number.
    pub fn u1(&self) -> Result<f64> {
        match self.physical.u1 {
            Some(u) => Ok(u),
            None => Ok(DEFAULT_MACH * sound_speed(self.physical.temperature, self.physical.c)?.c_inf),
        }
    }

    pub fn far_field(&self) -> Result<MaxwellianParams> {
        MaxwellianParams::far_field(self.u1()?, self.physical.temperature, self.physical.c)
    }

    pub fn momentum_spec(&self) -> MomentumGridSpec {
        MomentumGridSpec { per_axis: self.grid.per_axis, p_max: self.grid.p_max, stretch: self.grid.stretch }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            tau: s.tau,
            tau_fraction: s.tau_fraction,
            gamma: s.gamma,
            gamma_ratio: s.gamma_ratio,
            tol: s.tol,
            max_iter: s.max_iter,
            max_outer: s.max_outer,
            beta: s.beta,
            nx: self.grid.nx,
            x_max: self.grid.x_max,
            x_stretch: self.grid.x_stretch,
            method: s.method,
            restart: s.restart,
            fit_source: s.fit_source,
            smallness: s.smallness,
        }
    }

    /// Copy with every derived default written out, so reloading it
    /// reproduces the same run regardless of future default changes.
    pub fn effective(&self, tau: f64, gamma: f64, x_max: f64) -> Result<Self> {
        let mut out = self.clone();
        out.physical.u1 = Some(self.u1()?);
        out.solver.tau = Some(tau);
        out.solver.gamma = Some(gamma);
        out.grid.x_max = Some(x_max);
        Ok(out)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config("output.effective_config", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_supersonic_default() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        let s = sound_speed(1.0, 1.0).unwrap();
        assert!((cfg.u1().unwrap() / s.c_inf + 2.0).abs() < 1e-14);
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn round_trip_is_identical() {
        let cfg = RunConfig::from_toml_str(
            "[physical]\nT = 2.0\nu1 = -0.4\n[boundary]\nfamily = \"mode\"\namplitude = 0.01\nindex = 3\n[solver]\nmethod = \"picard\"\n",
        )
        .unwrap();
        let eff = cfg.effective(0.1, 0.5, 20.0).unwrap();
        let back = RunConfig::from_toml_str(&eff.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, eff);
        assert_eq!(back.solver_config(), eff.solver_config());
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("[physical]\nc = -1.0\n", "physical.c"),
            ("[physical]\ntemperature = 0.0\n", "physical.temperature"),
            ("[kernel]\nmodel = \"constant\"\nsigma0 = -1.0\na = 0.0\nb = 0.0\nvarsigma = 0.0\nc1 = 1.0\nc2 = 1.0\n", "kernel.sigma0"),
            ("[grid]\nnx = 1\n", "grid.nx"),
            ("[grid]\nper_axis = 1\n", "grid.per_axis"),
            ("[solver]\nbeta = 1.0\n", "solver.beta"),
            ("[quadrature]\nk_omega = 0\n", "quadrature.k_omega"),
            ("[boundary]\nfamily = \"mode\"\namplitude = 1e-3\nindex = 9\n", "boundary.index"),
        ];
        for (text, key) in cases {
            match RunConfig::from_toml_str(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: expected config error for {key}, got {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_name() {
        let err = RunConfig::from_toml_str("[solver]\ntoll = 1e-8\n").unwrap_err();
        assert!(err.to_string().contains("toll"), "{err}");
    }
}
