//! Damped half-space problem
//! `p̂1 ∂x h - τ p̂1 h - L h + γ P0⁺ p̂1 h = ζ` on `x > 0` with incoming data
//! `h(0, p) = a0(p)` for `p1 > 0`, solved in the fixed-point form
//! `h = ã + U(K̄ h + ζ)`.

mod gamma;
mod krylov;
mod operator;
mod sweep;

pub use gamma::gamma_field;
pub use krylov::{gmres, KrylovReport};
pub use operator::{with_workers, AssemblyQuad, DiscreteOperator};
pub use sweep::SweepPlan;

use crate::error::{Error, Result};
use crate::grid::MomentumGrid;
use crate::juttner::juttner_sqrt;
use crate::macro5::build_macro_model;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Restarted GMRES on `(I - U K̄) h = ã + U ζ`.
    Gmres,
    /// Plain source iteration `h ← ã + U(K̄ h + ζ)`.
    Picard,
}

/// Default `x` clustering.
pub const X_STRETCH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Decay rate `τ`; `None` picks `tau_fraction · min ν/|p̂1|`.
    pub tau: Option<f64>,
    pub tau_fraction: f64,
    /// Damping rate `γ`; `None` picks `gamma_ratio · τ`.
    pub gamma: Option<f64>,
    pub gamma_ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_outer: usize,
    pub beta: f64,
    /// Number of `x` cells.
    pub nx: usize,
    /// Domain length; `None` picks `10 / τ`.
    pub x_max: Option<f64>,
    /// Exponential clustering of `x` nodes toward the wall; 0 is uniform.
    pub x_stretch: f64,
    pub method: Method,
    pub restart: usize,
    /// Carry the damped mode `e^{-(γ-τ)x}` exactly in the sweep of `K̄h`.
    pub fit_source: bool,
    /// Largest admissible `‖a0‖_{L∞,p,β}` for the nonlinear solve.
    pub smallness: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: None,
            tau_fraction: 0.05,
            gamma: None,
            gamma_ratio: 4.0,
            tol: 1e-8,
            max_iter: 200,
            max_outer: 30,
            beta: 3.0,
            nx: 64,
            x_max: None,
            x_stretch: X_STRETCH,
            method: Method::Gmres,
            restart: 40,
            fit_source: true,
            smallness: 0.1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("solver.{key}"), format!("must be positive and finite, got {v}")))
            }
        };
        if let Some(t) = self.tau {
            pos("tau", t)?;
        }
        pos("tau_fraction", self.tau_fraction)?;
        pos("tol", self.tol)?;
        pos("smallness", self.smallness)?;
        if let Some(x) = self.x_max {
            pos("x_max", x)?;
        }
        if !(self.x_stretch >= 0.0 && self.x_stretch <= 50.0) {
            return Err(Error::config("solver.x_stretch", format!("must lie in [0, 50], got {}", self.x_stretch)));
        }
        if !(self.gamma_ratio > 2.0 && self.gamma_ratio.is_finite()) {
            return Err(Error::config("solver.gamma_ratio", format!("need gamma/tau > 2, got {}", self.gamma_ratio)));
        }
        if let (Some(g), Some(t)) = (self.gamma, self.tau) {
            if !(g / t > 2.0) {
                return Err(Error::config("solver.gamma", format!("need gamma/tau > 2, got {}", g / t)));
            }
        }
        if !(self.beta > 2.0 && self.beta.is_finite()) {
            return Err(Error::config("solver.beta", format!("need beta > 2, got {}", self.beta)));
        }
        if self.nx < 2 {
            return Err(Error::config("solver.nx", "need at least 2 cells"));
        }
        if self.max_iter == 0 || self.max_outer == 0 || self.restart == 0 {
            return Err(Error::config("solver.max_iter", "iteration limits must be at least 1"));
        }
        Ok(())
    }
}

/// Trace values below this fraction of their boundary value are left out of
/// decay-rate fits; there the iteration tolerance, not the decay law,
/// dominates.
const FIT_FLOOR: f64 = 1e-6;

/// `x` nodes together with the momentum grid.
#[derive(Debug, Clone)]
pub struct Grid {
    pub x_nodes: Vec<f64>,
    /// Trapezoidal weights on `x_nodes`.
    pub x_weights: Vec<f64>,
    pub momentum: MomentumGrid,
    /// `p0` at every momentum node.
    pub energy: Vec<f64>,
}

impl Grid {
    /// `x_i = x_max (e^{a i/nx} - 1) / (e^a - 1)` with `a = stretch`, so the
    /// cells grow geometrically away from the wall; `a = 0` is uniform.
    pub fn stretched(x_max: f64, nx: usize, stretch: f64, momentum: MomentumGrid, c: f64) -> Self {
        let x_nodes: Vec<f64> = (0..=nx)
            .map(|i| {
                let t = i as f64 / nx as f64;
                if stretch.abs() < 1e-12 {
                    x_max * t
                } else {
                    x_max * (stretch * t).exp_m1() / stretch.exp_m1()
                }
            })
            .collect();
        let x_weights = (0..=nx)
            .map(|i| {
                let left = if i > 0 { x_nodes[i] - x_nodes[i - 1] } else { 0.0 };
                let right = if i < nx { x_nodes[i + 1] - x_nodes[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect();
        let energy = momentum.points.iter().map(|p| crate::lorentz::energy(*p, c)).collect();
        Self { x_nodes, x_weights, momentum, energy }
    }

    pub fn nx1(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn np(&self) -> usize {
        self.momentum.len()
    }
}

/// Nodal values `values[ix * np + ip]` of a function of `(x, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    pub nx1: usize,
    pub np: usize,
    pub values: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { nx1: grid.nx1(), np: grid.np(), values: vec![0.0; grid.nx1() * grid.np()] }
    }

    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.np + ip]
    }

    pub fn slice(&self, ix: usize) -> &[f64] {
        &self.values[ix * self.np..(ix + 1) * self.np]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `sup_p p0^β |v(ix, p)|`.
    pub fn sup_p_weighted(&self, grid: &Grid, ix: usize, beta: f64) -> f64 {
        self.slice(ix).iter().zip(&grid.energy).map(|(v, e)| e.powf(beta) * v.abs()).fold(0.0, f64::max)
    }

    /// `‖v‖_{L∞,x,p,β}`.
    pub fn sup_weighted(&self, grid: &Grid, beta: f64) -> f64 {
        (0..self.nx1).map(|i| self.sup_p_weighted(grid, i, beta)).fold(0.0, f64::max)
    }

    /// `‖v‖_{L²}` over `(x, p)`.
    pub fn l2(&self, grid: &Grid) -> f64 {
        self.weighted_l2(grid, |_| 1.0)
    }

    /// `(∫∫ m(p) v² dp dx)^{1/2}` for a momentum weight `m`.
    pub fn weighted_l2<M: Fn(usize) -> f64>(&self, grid: &Grid, m: M) -> f64 {
        let mut acc = crate::quadrature::CompensatedSum::new();
        for (ix, wx) in grid.x_weights.iter().enumerate() {
            for (ip, wp) in grid.momentum.weights.iter().enumerate() {
                let v = self.at(ix, ip);
                acc.add(wx * wp * m(ip) * v * v);
            }
        }
        acc.value().max(0.0).sqrt()
    }

    /// `sup_{x,p} p0^β ν^{-1} |v|`.
    pub fn sup_weighted_scaled(&self, grid: &Grid, beta: f64, nu: &[f64]) -> f64 {
        let mut m: f64 = 0.0;
        for ix in 0..self.nx1 {
            for ip in 0..self.np {
                m = m.max(grid.energy[ip].powf(beta) * self.at(ix, ip).abs() / nu[ip]);
            }
        }
        m
    }
}

/// Boundary data families on the incoming half `p1 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundaryFamily {
    /// `a0 = ε W0 (1 - e^{-(p1/δ)^2})` with `δ = sqrt(T)`.
    MaxwellianBump { amplitude: f64 },
    /// `a0 = ε Ξ_i`, `i = 1..5` in ascending eigenvalue order.
    Mode { amplitude: f64, index: usize },
    Zero,
}

impl BoundaryFamily {
    pub fn amplitude(&self) -> f64 {
        match self {
            BoundaryFamily::MaxwellianBump { amplitude } | BoundaryFamily::Mode { amplitude, .. } => *amplitude,
            BoundaryFamily::Zero => 0.0,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        match self {
            BoundaryFamily::MaxwellianBump { .. } => BoundaryFamily::MaxwellianBump { amplitude },
            BoundaryFamily::Mode { index, .. } => BoundaryFamily::Mode { amplitude, index },
            BoundaryFamily::Zero => BoundaryFamily::Zero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude().is_finite() {
            return Err(Error::config("boundary.amplitude", "must be finite"));
        }
        if let BoundaryFamily::Mode { index, .. } = self {
            if !(1..=5).contains(index) {
                return Err(Error::config("boundary.index", format!("mode index must be 1..=5, got {index}")));
            }
        }
        Ok(())
    }

    /// Nodal boundary values; zero on nodes with `p1 < 0`.
    pub fn evaluate(&self, op: &DiscreteOperator) -> Result<Vec<f64>> {
        self.validate()?;
        let far = &op.far;
        let pts = &op.grid.points;
        let vals = match *self {
            BoundaryFamily::Zero => vec![0.0; pts.len()],
            BoundaryFamily::MaxwellianBump { amplitude } => {
                let d2 = far.temperature;
                pts.iter()
                    .map(|p| if p[0] > 0.0 { amplitude * juttner_sqrt(far, *p) * (1.0 - (-(p[0] * p[0]) / d2).exp()) } else { 0.0 })
                    .collect()
            }
            BoundaryFamily::Mode { amplitude, index } => {
                let model = build_macro_model(far.u[0], far.temperature, far.c)?;
                let v = model.eigenvectors.column(index - 1);
                pts.iter()
                    .map(|p| {
                        if p[0] > 0.0 {
                            let chi = op.macro_op.chi_all(*p);
                            amplitude * (0..5).map(|r| v[r] * chi[r]).sum::<f64>()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
        };
        Ok(vals)
    }
}

/// Per-iteration record of the nonlinear loop.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OuterRecord {
    pub iteration: usize,
    pub h_norm: f64,
    pub zeta_norm: f64,
    pub change: f64,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub h: DistributionField,
    pub iterations: usize,
    /// Weighted sup distance between the last two iterates.
    pub last_change: f64,
}

#[derive(Debug, Clone)]
pub struct NonlinearSolution {
    pub h: DistributionField,
    pub f: DistributionField,
    pub zeta: DistributionField,
    pub history: Vec<OuterRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DampingReport {
    /// `⟨Ξ_k, p̂1 f(x)⟩` per positive direction at every `x` node.
    pub trace: Vec<Vec<f64>>,
    /// `max_x max_k |v_k(x) - e^{-γx} v_k(0)| / max_k |v_k(0)|`.
    pub deviation: f64,
    /// Decay rate fitted to the dominant component.
    pub gamma_fit: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnvelopeReport {
    /// `-d ln ‖f(x)‖ / dx` fitted beyond the first quarter of the domain.
    pub tau_fit: f64,
    /// `max ‖f(x)‖ / (‖f(x_q)‖ e^{-τ(x - x_q)}) - 1` over `x >= x_q`.
    pub excess: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyReport {
    /// `⟨|p̂1| h(0), h(0)⟩₋ + (ν h, h)`.
    pub lhs: f64,
    pub zeta_l2_sq: f64,
    /// `⟨p̂1 a0, a0⟩₊`.
    pub boundary_flux: f64,
}

/// The assembled damped problem at fixed `(τ, γ)`.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    pub op: DiscreteOperator,
    pub config: SolverConfig,
    pub tau: f64,
    pub gamma: f64,
    pub grid: Grid,
    plan: SweepPlan,
    k_bar_t: DMatrix<f64>,
}

impl HalfSpace {
    pub fn new(op: DiscreteOperator, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let tau = config.tau.unwrap_or(config.tau_fraction * op.min_relaxation_rate());
        let gamma = config.gamma.unwrap_or(config.gamma_ratio * tau);
        if !(gamma / tau > 2.0) {
            return Err(Error::config("solver.gamma", format!("need gamma/tau > 2, got {}", gamma / tau)));
        }
        let x_max = config.x_max.unwrap_or(10.0 / tau);
        let grid = Grid::stretched(x_max, config.nx, config.x_stretch, op.grid.clone(), op.far.c);
        let kappa = if config.fit_source { gamma - tau } else { 0.0 };
        let plan = SweepPlan::fitted(&op.nu, &op.p_hat1, tau, &grid.x_nodes, kappa)?;
        let k_bar_t = op.k_bar(gamma).transpose();
        log::info!("half-space problem: tau = {tau:.4e}, gamma = {gamma:.4e}, x_max = {x_max:.4e}, n_plus = {}", op.n_plus());
        Ok(Self { op, config, tau, gamma, grid, plan, k_bar_t })
    }

    fn np(&self) -> usize {
        self.op.len()
    }

    fn nx1(&self) -> usize {
        self.config.nx + 1
    }

    /// Node-major scaled layout from a field.
    fn to_internal(&self, f: &DistributionField) -> Vec<f64> {
        let (np, nx1) = (self.np(), self.nx1());
        let mut out = vec![0.0; np * nx1];
        for ix in 0..nx1 {
            for ip in 0..np {
                out[ip * nx1 + ix] = self.op.sqrt_w[ip] * f.at(ix, ip);
            }
        }
        out
    }

    fn to_field(&self, v: &[f64]) -> DistributionField {
        let (np, nx1) = (self.np(), self.nx1());
        let mut values = vec![0.0; np * nx1];
        for ip in 0..np {
            for ix in 0..nx1 {
                values[ix * np + ip] = v[ip * nx1 + ix] / self.op.sqrt_w[ip];
            }
        }
        DistributionField { nx1, np, values }
    }

    /// `K̄ v` for node-major scaled `v`.
    fn apply_k_bar(&self, v: &[f64]) -> Vec<f64> {
        let vt = DMatrix::from_column_slice(self.nx1(), self.np(), v);
        let out = vt * &self.k_bar_t;
        out.as_slice().to_vec()
    }

    /// Sweep node-major scaled sources; `boundary` holds scaled values.
    fn sweep_internal(&self, fit: Option<&[f64]>, lin: Option<&[f64]>, boundary: Option<&[f64]>) -> Vec<f64> {
        let nx1 = self.nx1();
        let mut out = vec![0.0; self.np() * nx1];
        out.par_chunks_mut(nx1).enumerate().for_each(|(j, line)| {
            let start = boundary.map_or(0.0, |b| b[j]);
            let range = j * nx1..(j + 1) * nx1;
            self.plan.sweep_node(j, fit.map(|s| &s[range.clone()]), lin.map(|s| &s[range.clone()]), start, line);
        });
        out
    }

    /// `U(ζ)`: sweep of a source field with zero incoming data.
    pub fn sweep_u(&self, zeta: &DistributionField) -> DistributionField {
        let s = self.to_internal(zeta);
        self.to_field(&self.sweep_internal(None, Some(&s), None))
    }

    fn scaled_boundary(&self, a0: &[f64]) -> Vec<f64> {
        a0.iter().zip(&self.op.sqrt_w).zip(&self.op.p_hat1).map(|((a, s), ph)| if *ph > 0.0 { a * s } else { 0.0 }).collect()
    }

    /// Weighted sup norm of a node-major scaled vector.
    fn internal_norm(&self, v: &[f64]) -> f64 {
        let nx1 = self.nx1();
        let beta = self.config.beta;
        v.chunks(nx1)
            .enumerate()
            .map(|(j, line)| {
                let w = self.grid.energy[j].powf(beta) / self.op.sqrt_w[j];
                line.iter().fold(0.0f64, |m, x| m.max(x.abs())) * w
            })
            .fold(0.0, f64::max)
    }

    fn picard_step(&self, h: &[f64], zeta: &[f64], boundary: &[f64]) -> Vec<f64> {
        let s = self.apply_k_bar(h);
        self.sweep_internal(Some(&s), Some(zeta), Some(boundary))
    }

    fn solve_internal(&self, a0: &[f64], zeta: &[f64], guess: Option<Vec<f64>>) -> Result<(Vec<f64>, usize, f64)> {
        let boundary = self.scaled_boundary(a0);
        let tol = self.config.tol;
        let mut h = guess.unwrap_or_else(|| vec![0.0; zeta.len()]);
        match self.config.method {
            Method::Picard => {
                let mut history: Vec<f64> = Vec::new();
                let mut rising = 0;
                for it in 1..=self.config.max_iter {
                    let next = self.picard_step(&h, zeta, &boundary);
                    let d = self.internal_norm(&next.iter().zip(&h).map(|(a, b)| a - b).collect::<Vec<_>>());
                    h = next;
                    if !d.is_finite() {
                        return Err(Error::Divergence { iterations: it, growth: f64::INFINITY });
                    }
                    if d < tol {
                        return Ok((h, it, d));
                    }
                    if let Some(&prev) = history.last() {
                        rising = if d > prev { rising + 1 } else { 0 };
                    }
                    history.push(d);
                    if rising >= 5 {
                        let growth = d / history[history.len() - 6];
                        return Err(Error::Divergence { iterations: it, growth });
                    }
                }
                Err(Error::NotConverged { iterations: self.config.max_iter, last: *history.last().unwrap_or(&f64::NAN) })
            }
            Method::Gmres => {
                let rhs = self.sweep_internal(None, Some(zeta), Some(&boundary));
                let apply = |v: &[f64]| -> Vec<f64> {
                    let kv = self.apply_k_bar(v);
                    let u = self.sweep_internal(Some(&kv), None, None);
                    v.iter().zip(&u).map(|(a, b)| a - b).collect()
                };
                // one restart cycle per iteration, each followed by a sweep
                // so that progress is measured in the stopping norm; a
                // stagnating cycle length is doubled, at most four times
                let mut matvecs = 0;
                let mut last = f64::INFINITY;
                let mut best = f64::INFINITY;
                let mut stalled = 0;
                let mut restart = self.config.restart;
                for _ in 0..self.config.max_iter {
                    let rep = gmres(&apply, &rhs, &mut h, restart, 1e-15, restart + 1);
                    matvecs += rep.matvecs;
                    let next = self.picard_step(&h, zeta, &boundary);
                    last = self.internal_norm(&next.iter().zip(&h).map(|(a, b)| a - b).collect::<Vec<_>>());
                    h = next;
                    log::debug!("gmres cycle: {} matvecs, krylov residual {:.3e}, change {last:.3e}", rep.matvecs, rep.relative_residual);
                    if !last.is_finite() {
                        return Err(Error::Divergence { iterations: matvecs, growth: f64::INFINITY });
                    }
                    if last < tol {
                        return Ok((h, matvecs, last));
                    }
                    if last < 0.5 * best {
                        best = last;
                        stalled = 0;
                    } else {
                        stalled += 1;
                        if stalled >= 5 {
                            if restart >= 16 * self.config.restart {
                                break;
                            }
                            restart *= 2;
                            stalled = 0;
                            log::debug!("gmres stagnating, restart length now {restart}");
                        }
                    }
                }
                let used = matvecs;
                Err(Error::NotConverged { iterations: used, last })
            }
        }
    }

    fn finish(&self, internal: &[f64], a0: &[f64]) -> DistributionField {
        let mut h = self.to_field(internal);
        // the incoming trace is imposed, not computed
        for ip in 0..self.np() {
            if self.op.p_hat1[ip] > 0.0 {
                h.values[ip] = a0[ip];
            }
        }
        h
    }

    /// Solve the linear damped problem for boundary data `a0` (nodal values,
    /// only `p1 > 0` entries are used) and source `ζ`.
    pub fn solve_linear_damped(&self, a0: &[f64], zeta: &DistributionField) -> Result<LinearSolution> {
        self.check_inputs(a0, zeta)?;
        let z = self.to_internal(zeta);
        let (h, iterations, last_change) = self.solve_internal(a0, &z, None)?;
        Ok(LinearSolution { h: self.finish(&h, a0), iterations, last_change })
    }

    fn check_inputs(&self, a0: &[f64], zeta: &DistributionField) -> Result<()> {
        if a0.len() != self.np() || zeta.np != self.np() || zeta.nx1 != self.nx1() {
            return Err(Error::Domain("field shape does not match the grid".into()));
        }
        if !a0.iter().all(|v| v.is_finite()) || !zeta.is_finite() {
            return Err(Error::Domain("boundary data and source must be finite".into()));
        }
        Ok(())
    }

    /// `ζ = e^{-τx} P1 Γ(h, h)` in internal layout from internal `h`.
    fn nonlinear_source(&self, h: &[f64]) -> Vec<f64> {
        let (np, nx1) = (self.np(), self.nx1());
        let unscaled: Vec<f64> = h.chunks(nx1).enumerate().flat_map(|(j, l)| l.iter().map(move |v| v / self.op.sqrt_w[j])).collect();
        let g = gamma_field(&self.op, &unscaled, nx1);
        let mut zeta = vec![0.0; np * nx1];
        for ix in 0..nx1 {
            let mut col = nalgebra::DVector::from_fn(np, |j, _| self.op.sqrt_w[j] * g[j * nx1 + ix]);
            self.op.project_micro(&mut col);
            let damp = (-self.tau * self.grid.x_nodes[ix]).exp();
            for j in 0..np {
                zeta[j * nx1 + ix] = damp * col[j];
            }
        }
        zeta
    }

    /// Outer Picard loop on the quadratic source.
    pub fn solve_nonlinear_damped(&self, a0: &[f64]) -> Result<NonlinearSolution> {
        if a0.len() != self.np() {
            return Err(Error::Domain("boundary data does not match the grid".into()));
        }
        let a_norm = a0
            .iter()
            .zip(&self.grid.energy)
            .zip(&self.op.p_hat1)
            .filter(|(_, ph)| **ph > 0.0)
            .map(|((a, e), _)| e.powf(self.config.beta) * a.abs())
            .fold(0.0, f64::max);
        if !(a_norm < self.config.smallness) {
            return Err(Error::config("boundary.amplitude", format!("boundary norm {a_norm:.3e} exceeds smallness {}", self.config.smallness)));
        }
        let zero = vec![0.0; self.np() * self.nx1()];
        let (mut h, _, _) = self.solve_internal(a0, &zero, None)?;
        let mut history = Vec::new();
        let mut rising = 0;
        for k in 1..=self.config.max_outer {
            let zeta = self.nonlinear_source(&h);
            let (next, it, _) = self.solve_internal(a0, &zeta, Some(h.clone()))?;
            let change = self.internal_norm(&next.iter().zip(&h).map(|(a, b)| a - b).collect::<Vec<_>>());
            h = next;
            let rec = OuterRecord {
                iteration: k,
                h_norm: self.internal_norm(&h),
                zeta_norm: self.internal_norm(&zeta),
                change,
                inner_iterations: it,
            };
            log::debug!("outer iteration {k}: |h| = {:.3e}, change = {:.3e}", rec.h_norm, rec.change);
            if let Some(prev) = history.last().map(|r: &OuterRecord| r.change) {
                rising = if change > prev { rising + 1 } else { 0 };
            }
            history.push(rec);
            if !change.is_finite() || rising >= 3 {
                return Err(Error::Divergence { iterations: k, growth: rec.h_norm / history[0].h_norm.max(f64::MIN_POSITIVE) });
            }
            if change < self.config.tol {
                let hf = self.finish(&h, a0);
                let f = self.damped(&hf);
                return Ok(NonlinearSolution { h: hf, f, zeta: self.to_field(&zeta), history });
            }
        }
        Err(Error::NotConverged { iterations: self.config.max_outer, last: history.last().map_or(f64::NAN, |r| r.change) })
    }

    /// `f = e^{-τx} h`.
    pub fn damped(&self, h: &DistributionField) -> DistributionField {
        let mut f = h.clone();
        for ix in 0..h.nx1 {
            let d = (-self.tau * self.grid.x_nodes[ix]).exp();
            for v in &mut f.values[ix * h.np..(ix + 1) * h.np] {
                *v *= d;
            }
        }
        f
    }

    fn scaled_slice(&self, f: &DistributionField, ix: usize) -> Vec<f64> {
        f.slice(ix).iter().zip(&self.op.sqrt_w).map(|(v, s)| v * s).collect()
    }

    /// Trace of `P0⁺ p̂1 f` and its deviation from the `e^{-γx}` law.
    pub fn damping_decay_check(&self, f: &DistributionField) -> DampingReport {
        let trace: Vec<Vec<f64>> = (0..f.nx1).map(|ix| self.op.damping_trace(&self.scaled_slice(f, ix))).collect();
        if self.op.n_plus() == 0 {
            return DampingReport { trace, deviation: 0.0, gamma_fit: None };
        }
        let v0 = trace[0].clone();
        let scale = v0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut dev: f64 = 0.0;
        for (ix, v) in trace.iter().enumerate() {
            let e = (-self.gamma * self.grid.x_nodes[ix]).exp();
            for (a, b) in v.iter().zip(&v0) {
                dev = dev.max((a - e * b).abs());
            }
        }
        let deviation = if scale > 0.0 { dev / scale } else { dev };
        let k = (0..v0.len()).max_by(|&a, &b| v0[a].abs().total_cmp(&v0[b].abs())).unwrap_or(0);
        let pts: Vec<(f64, f64)> = trace
            .iter()
            .zip(&self.grid.x_nodes)
            .filter(|(v, _)| scale > 0.0 && v[k].abs() > FIT_FLOOR * scale)
            .map(|(v, x)| (*x, v[k].abs().ln()))
            .collect();
        let gamma_fit = linear_slope(&pts).map(|s| -s);
        DampingReport { trace, deviation, gamma_fit }
    }

    /// Components of `P0⁺ p̂1 f(0, ·)` along the five eigenvectors in
    /// ascending eigenvalue order; non-positive directions are zero.
    pub fn solvability_residual(&self, f: &DistributionField) -> [f64; 5] {
        self.damping_components(f, 0)
    }

    /// `P0⁺ p̂1 f(x_ix, ·)` along the five eigenvectors, zero for the
    /// non-positive ones.
    pub fn damping_components(&self, f: &DistributionField, ix: usize) -> [f64; 5] {
        let flux = self.op.macro_flux(&self.scaled_slice(f, ix));
        std::array::from_fn(|k| if self.op.eigenvalues[k] > 0.0 { flux[k] } else { 0.0 })
    }

    /// Sup norm, over interior `x` nodes, of
    /// `p̂1 ∂x h - τ p̂1 h - L h + γ P0⁺ p̂1 h - ζ`, weighted by `p0^β`. The
    /// `x` derivative is the exponentially fitted upwind difference that the
    /// sweep is exact for, so the residual measures the fixed-point defect
    /// rather than truncation error.
    pub fn equation_residual(&self, h: &DistributionField, zeta: &DistributionField) -> f64 {
        let hi = self.to_internal(h);
        let zi = self.to_internal(zeta);
        let ki = self.apply_k_bar(&hi);
        let nx1 = self.nx1();
        let mut worst: f64 = 0.0;
        for j in 0..self.np() {
            let range = j * nx1..(j + 1) * nx1;
            let w = self.grid.energy[j].powf(self.config.beta) / self.op.sqrt_w[j];
            for i in 1..nx1 - 1 {
                if let Some(d) = self.plan.source_defect(j, &hi[range.clone()], &ki[range.clone()], &zi[range.clone()], i) {
                    worst = worst.max(w * d.abs());
                }
            }
        }
        worst
    }

    /// Envelope of `‖f(x, ·)‖_{L∞,p,β}` against `e^{-τx}` beyond the first
    /// quarter of the domain.
    pub fn envelope(&self, f: &DistributionField) -> EnvelopeReport {
        let beta = self.config.beta;
        let q = f.nx1 / 4;
        let norms: Vec<f64> = (0..f.nx1).map(|i| f.sup_p_weighted(&self.grid, i, beta)).collect();
        let x = &self.grid.x_nodes;
        let base = norms[q];
        let mut excess: f64 = 0.0;
        let mut pts = Vec::new();
        for i in q..f.nx1 {
            if base > 0.0 {
                excess = excess.max(norms[i] / (base * (-self.tau * (x[i] - x[q])).exp()) - 1.0);
            }
            if norms[i] > 0.0 {
                pts.push((x[i], norms[i].ln()));
            }
        }
        EnvelopeReport { tau_fit: linear_slope(&pts).map_or(f64::NAN, |s| -s), excess }
    }

    /// Pieces of the `L²` energy estimate.
    pub fn energy_report(&self, h: &DistributionField, zeta: &DistributionField, a0: &[f64]) -> EnergyReport {
        let w = &self.grid.momentum.weights;
        let ph = &self.op.p_hat1;
        let trace: f64 = (0..self.np()).filter(|&i| ph[i] < 0.0).map(|i| w[i] * ph[i].abs() * h.at(0, i).powi(2)).sum();
        let nu_part = h.weighted_l2(&self.grid, |i| self.op.nu[i]).powi(2);
        let boundary_flux: f64 = (0..self.np()).filter(|&i| ph[i] > 0.0).map(|i| w[i] * ph[i] * a0[i] * a0[i]).sum();
        EnergyReport { lhs: trace + nu_part, zeta_l2_sq: zeta.l2(&self.grid).powi(2), boundary_flux }
    }

    /// Five macroscopic coefficients `⟨χ_i, v(x, ·)⟩` at node `ix`.
    pub fn macro_coefficients(&self, v: &DistributionField, ix: usize) -> [f64; 5] {
        self.op.chi_coefficients(v.slice(ix))
    }
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::KernelParams;
    use crate::grid::MomentumGridSpec;
    use crate::juttner::MaxwellianParams;
    use std::sync::OnceLock;

    const C_INF: f64 = 0.673_367_756_860_696;

    fn operator(mach: f64) -> DiscreteOperator {
        let far = MaxwellianParams::far_field(mach * C_INF, 1.0, 1.0).unwrap();
        let spec = MomentumGridSpec { per_axis: 6, p_max: 8.0, stretch: 2.0 };
        let quad = AssemblyQuad {
            k_panels: 2,
            k_angular: 3,
            k_omega: 3,
            nu_panels: 3,
            nu_angular: 4,
            gamma_panels: 1,
            gamma_angular: 2,
            gamma_omega: 2,
        };
        DiscreteOperator::assemble(KernelParams::constant(1.0), far, spec, quad).unwrap()
    }

    fn subsonic() -> &'static HalfSpace {
        static CELL: OnceLock<HalfSpace> = OnceLock::new();
        CELL.get_or_init(|| HalfSpace::new(operator(-0.5), SolverConfig { nx: 24, ..Default::default() }).unwrap())
    }

    fn supersonic() -> &'static HalfSpace {
        static CELL: OnceLock<HalfSpace> = OnceLock::new();
        CELL.get_or_init(|| HalfSpace::new(operator(-2.0), SolverConfig { nx: 24, ..Default::default() }).unwrap())
    }

    fn bump(hs: &HalfSpace, amp: f64) -> Vec<f64> {
        BoundaryFamily::MaxwellianBump { amplitude: amp }.evaluate(&hs.op).unwrap()
    }

    #[test]
    fn zero_data_gives_zero() {
        let hs = subsonic();
        let zero = DistributionField::zeros(&hs.grid);
        let sol = hs.solve_linear_damped(&vec![0.0; hs.op.len()], &zero).unwrap();
        assert!(sol.h.values.iter().all(|v| *v == 0.0));
        let nl = hs.solve_nonlinear_damped(&vec![0.0; hs.op.len()]).unwrap();
        assert!(nl.f.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn boundary_is_imposed_exactly_and_residual_is_small() {
        let hs = subsonic();
        let a0 = bump(hs, 1e-3);
        let zero = DistributionField::zeros(&hs.grid);
        let sol = hs.solve_linear_damped(&a0, &zero).unwrap();
        for ip in 0..hs.op.len() {
            if hs.op.p_hat1[ip] > 0.0 {
                assert_eq!(sol.h.at(0, ip).to_bits(), a0[ip].to_bits());
            }
        }
        assert!(hs.equation_residual(&sol.h, &zero) <= 10.0 * hs.config.tol);
        let beta = hs.config.beta;
        let far = sol.h.sup_p_weighted(&hs.grid, hs.config.nx, beta);
        let near = sol.h.sup_p_weighted(&hs.grid, 0, beta);
        assert!(far <= near * (-hs.tau * hs.grid.x_nodes[hs.config.nx] / 2.0).exp());
    }

    #[test]
    fn superposition_holds() {
        let hs = &HalfSpace::new(subsonic().op.clone(), SolverConfig { nx: 24, tol: 1e-15, ..Default::default() }).unwrap();
        let a = bump(hs, 1e-3);
        let b: Vec<f64> = BoundaryFamily::Mode { amplitude: 2e-3, index: 5 }.evaluate(&hs.op).unwrap();
        let mut za = DistributionField::zeros(&hs.grid);
        let np = hs.op.len();
        for (k, v) in za.values.iter_mut().enumerate() {
            let (ix, ip) = (k / np, k % np);
            let shape = juttner_sqrt(&hs.op.far, hs.op.grid.points[ip]);
            *v = 1e-4 * shape * ((k as f64) * 0.61).sin() * (-hs.tau * hs.grid.x_nodes[ix]).exp();
        }
        let zb = DistributionField::zeros(&hs.grid);
        let s = -1.7;
        let ha = hs.solve_linear_damped(&a, &za).unwrap().h;
        let hb = hs.solve_linear_damped(&b, &zb).unwrap().h;
        let mix_a: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let hm = hs.solve_linear_damped(&mix_a, &za).unwrap().h;
        // compare in the solver's own weighted sup norm
        let beta = hs.config.beta;
        let mut diff = hm.clone();
        for k in 0..diff.values.len() {
            diff.values[k] -= ha.values[k] + s * hb.values[k];
        }
        let d = diff.sup_weighted(&hs.grid, beta);
        let scale = hm.sup_weighted(&hs.grid, beta);
        assert!(d <= 1e-10 * scale, "{d:e} vs {scale:e}");
    }

    #[test]
    fn supersonic_inflow_has_no_damping_trace() {
        let hs = supersonic();
        assert_eq!(hs.op.n_plus(), 0);
        let zero = DistributionField::zeros(&hs.grid);
        let sol = hs.solve_linear_damped(&bump(hs, 1e-3), &zero).unwrap();
        let f = hs.damped(&sol.h);
        let rep = hs.damping_decay_check(&f);
        assert!(rep.trace.iter().all(|v| v.is_empty()));
        assert_eq!(hs.solvability_residual(&f), [0.0; 5]);
    }

    #[test]
    fn damping_trace_decays_at_gamma() {
        let hs = subsonic();
        let zero = DistributionField::zeros(&hs.grid);
        let sol = hs.solve_linear_damped(&bump(hs, 1e-3), &zero).unwrap();
        let rep = hs.damping_decay_check(&hs.damped(&sol.h));
        let fit = rep.gamma_fit.unwrap();
        assert!((fit - hs.gamma).abs() < 0.02 * hs.gamma, "{fit} vs {}", hs.gamma);
    }

    #[test]
    fn top_mode_boundary_leaves_a_solvability_residual() {
        let hs = subsonic();
        let a0 = BoundaryFamily::Mode { amplitude: 1e-3, index: 5 }.evaluate(&hs.op).unwrap();
        let sol = hs.solve_nonlinear_damped(&a0).unwrap();
        let r = hs.solvability_residual(&sol.f);
        assert!(r[4].abs() > 1e-6, "{r:?}");
        assert!(r[..4].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn large_boundary_data_is_rejected() {
        let hs = subsonic();
        let err = hs.solve_nonlinear_damped(&bump(hs, 1e3)).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let op = subsonic().op.clone();
        let hs = HalfSpace::new(op, SolverConfig { nx: 24, method: Method::Picard, max_iter: 3, ..Default::default() }).unwrap();
        let zero = DistributionField::zeros(&hs.grid);
        let err = hs.solve_linear_damped(&bump(&hs, 1e-3), &zero).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. } | Error::Divergence { .. }));
    }

    #[test]
    fn config_validation_names_keys() {
        let bad = SolverConfig { gamma_ratio: 1.5, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("solver.gamma_ratio"));
        let bad = SolverConfig { beta: 2.0, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("solver.beta"));
        let bad = SolverConfig { tau: Some(0.1), gamma: Some(0.15), ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("solver.gamma"));
    }

    #[test]
    fn oversized_tau_is_rejected() {
        let op = subsonic().op.clone();
        let err = HalfSpace::new(op, SolverConfig { tau: Some(1e3), gamma: Some(4e3), ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("tau too large"));
    }
}
