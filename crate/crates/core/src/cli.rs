//! Records behind the command-line subcommands. Everything here returns
//! plain serializable values; the binary only parses flags and prints.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::halfspace::{with_workers, DiscreteOperator, HalfSpace, NonlinearSolution};
use crate::juttner::{moment, moment_by_quadrature, MaxwellianParams, Moment};
use crate::macro5::{classify, sound_speed, thermal_coefficients, Classification};
use serde::Serialize;
use std::io::Write;

/// Bumped whenever a JSON key or CSV column changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// Fixed header of the profile CSV.
pub const CSV_HEADER: [&str; 12] = [
    "x", "chi_1", "chi_2", "chi_3", "chi_4", "chi_5", "norm_beta", "damp_1", "damp_2", "damp_3", "damp_4", "damp_5",
];

#[derive(Debug, Clone, Serialize)]
pub struct SoundSpeedRecord {
    pub schema_version: u32,
    pub c_inf: f64,
    pub c_hat_inf: f64,
    pub z: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

pub fn soundspeed_record(temperature: f64, c: f64) -> Result<SoundSpeedRecord> {
    let s = sound_speed(temperature, c)?;
    let z = c * c / temperature;
    let (a1, a2, a3) = thermal_coefficients(z)?;
    Ok(SoundSpeedRecord { schema_version: SCHEMA_VERSION, c_inf: s.c_inf, c_hat_inf: s.c_hat_inf, z, a1, a2, a3 })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyRecord {
    pub schema_version: u32,
    pub u1: f64,
    pub mach: f64,
    pub n_plus: usize,
    pub lambda: [f64; 5],
    pub eigen_check: f64,
}

pub fn classify_record(u1: f64, temperature: f64, c: f64) -> Result<ClassifyRecord> {
    let Classification { mach, n_plus, lambda, eigen_check, .. } = classify(u1, temperature, c)?;
    Ok(ClassifyRecord { schema_version: SCHEMA_VERSION, u1, mach, n_plus, lambda, eigen_check })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub kind: String,
    pub closed_form: f64,
    pub quadrature: Option<f64>,
    /// `|closed - quadrature| / ∫|factor| J`.
    pub rel_err: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentTable {
    pub schema_version: u32,
    pub u1: f64,
    pub temperature: f64,
    pub c: f64,
    pub rows: Vec<MomentRow>,
}

/// Tolerance applied by `moments --verify`.
pub const MOMENT_TOL: f64 = 1e-6;

pub fn moment_table(u1: f64, temperature: f64, c: f64, verify: bool) -> Result<MomentTable> {
    let params = MaxwellianParams::far_field(u1, temperature, c)?;
    let rule = verify.then(|| params.boosted_rule(16)).transpose()?;
    let rows = Moment::representatives()
        .into_iter()
        .map(|kind| {
            let closed_form = moment(kind, &params)?;
            let (quadrature, rel_err) = match &rule {
                Some(r) => {
                    let (q, scale) = moment_by_quadrature(kind, &params, r)?;
                    (Some(q), Some((closed_form - q).abs() / scale))
                }
                None => (None, None),
            };
            Ok(MomentRow { kind: kind.label(), closed_form, quadrature, rel_err })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTable { schema_version: SCHEMA_VERSION, u1, temperature, c, rows })
}

impl MomentTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.rel_err.is_none_or(|e| e <= MOMENT_TOL))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub schema_version: u32,
    pub failed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub u1: f64,
    pub mach: f64,
    pub n_plus: usize,
    pub tau: f64,
    pub gamma: f64,
    pub x_max: f64,
    pub rows: usize,
    /// Outer (nonlinear) iterations.
    pub iterations: usize,
    /// Inner linear iterations summed over all outer steps.
    pub inner_iterations: usize,
    /// `p0^β`-weighted sup of the discrete equation defect.
    pub residual: f64,
    pub tau_fit: f64,
    pub gamma_fit: Option<f64>,
    pub damping_deviation: f64,
    pub solvability: [f64; 5],
}

pub struct SolveOutcome {
    pub summary: SolveSummary,
    /// One row per `x` node, columns as in [`CSV_HEADER`].
    pub profile: Vec<[f64; 12]>,
    pub effective: RunConfig,
}

/// Assemble, solve the nonlinear damped problem and tabulate the profile.
/// Solver failures are reported inside the summary; only setup errors
/// (bad config, assembly) return `Err`.
pub fn run_solve(cfg: &RunConfig, workers: usize) -> Result<SolveOutcome> {
    cfg.validate()?;
    with_workers(workers, || solve_inner(cfg))?
}

fn solve_inner(cfg: &RunConfig) -> Result<SolveOutcome> {
    let far = cfg.far_field()?;
    let op = DiscreteOperator::assemble(cfg.kernel, far, cfg.momentum_spec(), cfg.quadrature)?;
    let hs = HalfSpace::new(op, cfg.solver_config())?;
    let a0 = cfg.boundary.evaluate(&hs.op)?;
    let x_max = *hs.grid.x_nodes.last().unwrap_or(&0.0);
    let effective = cfg.effective(hs.tau, hs.gamma, x_max)?;
    let classification = classify(far.u[0], far.temperature, far.c)?;
    let mut summary = SolveSummary {
        schema_version: SCHEMA_VERSION,
        failed: false,
        error: None,
        u1: far.u[0],
        mach: classification.mach,
        n_plus: hs.op.n_plus(),
        tau: hs.tau,
        gamma: hs.gamma,
        x_max,
        rows: 0,
        iterations: 0,
        inner_iterations: 0,
        residual: f64::NAN,
        tau_fit: f64::NAN,
        gamma_fit: None,
        damping_deviation: f64::NAN,
        solvability: [f64::NAN; 5],
    };
    let sol: NonlinearSolution = match hs.solve_nonlinear_damped(&a0) {
        Ok(s) => s,
        Err(e) => {
            summary.failed = true;
            summary.error = Some(e.to_string());
            if let Error::Divergence { iterations, .. } | Error::NotConverged { iterations, .. } = e {
                summary.iterations = iterations;
            }
            return Ok(SolveOutcome { summary, profile: Vec::new(), effective });
        }
    };
    summary.iterations = sol.history.len();
    summary.inner_iterations = sol.history.iter().map(|r| r.inner_iterations).sum();
    summary.residual = hs.equation_residual(&sol.h, &sol.zeta);
    let env = hs.envelope(&sol.f);
    summary.tau_fit = env.tau_fit;
    let damping = hs.damping_decay_check(&sol.f);
    summary.gamma_fit = damping.gamma_fit;
    summary.damping_deviation = damping.deviation;
    summary.solvability = hs.solvability_residual(&sol.f);
    let beta = hs.config.beta;
    let profile: Vec<[f64; 12]> = (0..hs.grid.nx1())
        .map(|ix| {
            let chi = hs.macro_coefficients(&sol.h, ix);
            let damp = hs.damping_components(&sol.f, ix);
            let mut row = [0.0; 12];
            row[0] = hs.grid.x_nodes[ix];
            row[1..6].copy_from_slice(&chi);
            row[6] = sol.h.sup_p_weighted(&hs.grid, ix, beta);
            row[7..12].copy_from_slice(&damp);
            row
        })
        .collect();
    summary.rows = profile.len();
    if !sol.f.is_finite() {
        summary.failed = true;
        summary.error = Some("non-finite values in the solution".into());
    }
    Ok(SolveOutcome { summary, profile, effective })
}

/// Comma-separated, header row, LF endings, full double precision.
pub fn write_profile_csv<W: Write>(mut out: W, profile: &[[f64; 12]]) -> Result<()> {
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for row in profile {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Six significant digits for human-readable tables.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}
