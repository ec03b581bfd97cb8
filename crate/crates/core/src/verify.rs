//! Self-checks grouped by module. Each check reports a measured value, the
//! threshold it must stay under and the verdict.

use crate::collision::{
    collision_frequency, collision_q_split, cos_theta_com, for_each_sample, frequency_rule, post_collision, CollisionQuad,
    KernelParams,
};
use crate::error::{Error, Result};
use crate::grid::MomentumGridSpec;
use crate::halfspace::{AssemblyQuad, BoundaryFamily, DiscreteOperator, DistributionField, HalfSpace, SolverConfig};
use crate::juttner::{juttner_eval, moment, JuttnerEvaluator, moment_by_quadrature, MaxwellianParams, Moment};
use crate::lorentz::{com_reduce, invariant_measure_check, lorentz_dot, norm3, rest_boost, FourVector, MeasureQuad};
use crate::macro5::{
    build_macro_model, classify, eigenvalue_root, macro_operator, sound_speed, thermal_coefficients, verify_b_by_quadrature,
    Branch,
};
use crate::quadrature::{CompensatedSum, MomentumRule};
use rayon::prelude::*;
use crate::special::{bessel_k_scaled, bessel_k_scaled_by_integral, recurrence_residual};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lorentz,
    Moments,
    Collision,
    Macro,
    Solver,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Lorentz, Suite::Moments, Suite::Collision, Suite::Macro, Suite::Solver];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lorentz => "lorentz",
            Suite::Moments => "moments",
            Suite::Collision => "collision",
            Suite::Macro => "macro",
            Suite::Solver => "solver",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::config("suite", format!("unknown suite `{s}`")))
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    fn measured(suite: Suite, name: &str, value: f64, threshold: f64) -> Self {
        Self {
            suite: suite.name(),
            name: name.to_string(),
            value,
            threshold,
            passed: value.is_finite() && value <= threshold,
            detail: None,
        }
    }

    fn from_result(suite: Suite, name: &str, threshold: f64, r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self::measured(suite, name, v, threshold),
            Err(e) => Self {
                suite: suite.name(),
                name: name.to_string(),
                value: f64::NAN,
                threshold,
                passed: false,
                detail: Some(e.to_string()),
            },
        }
    }
}

pub fn run_suite(suite: Suite) -> Vec<CheckRecord> {
    match suite {
        Suite::Lorentz => lorentz_checks(),
        Suite::Moments => moment_checks(),
        Suite::Collision => collision_checks(),
        Suite::Macro => macro_checks(),
        Suite::Solver => solver_checks(),
        Suite::All => Suite::ALL.into_iter().flat_map(run_suite).collect(),
    }
}

fn random_momentum(rng: &mut StdRng, scale: f64) -> [f64; 3] {
    std::array::from_fn(|_| scale * rng.random_range(-1.0..1.0))
}

fn random_unit(rng: &mut StdRng) -> [f64; 3] {
    loop {
        let v = random_momentum(rng, 1.0);
        let n = norm3(v);
        if n > 1e-3 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

fn lorentz_checks() -> Vec<CheckRecord> {
    let s = Suite::Lorentz;
    let c = 1.0;
    let mut rng = StdRng::seed_from_u64(11);
    let (mut metric, mut rest, mut inverse, mut com, mut pbar): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut err = None;
    for _ in 0..500 {
        let u = FourVector::on_shell(random_momentum(&mut rng, 5.0), c);
        let b = match rest_boost(&u) {
            Ok(b) => b,
            Err(e) => {
                err = Some(e);
                break;
            }
        };
        let g2 = b.lambda00().powi(2);
        metric = metric.max(b.metric_defect() / g2);
        rest = rest.max(norm3(b.apply(&u).spatial) / u.t_component);
        let id = b.compose(&b.inverse()).entries - nalgebra::Matrix4::identity();
        inverse = inverse.max(id.amax() / g2);

        let p = FourVector::on_shell(random_momentum(&mut rng, 5.0), c);
        let q = FourVector::on_shell(random_momentum(&mut rng, 5.0), c);
        match com_reduce(&p, &q, c) {
            Ok(f) => {
                let tot = f.boost.apply(&(p + q));
                com = com.max(norm3(tot.spatial) / (p.t_component + q.t_component));
                if f.g > 1e-6 {
                    pbar = pbar.max((norm3(f.p_bar) - 2.0 * f.g).abs() / (2.0 * f.g));
                }
            }
            Err(e) => err = Some(e),
        }
    }
    let mut out = vec![
        CheckRecord::measured(s, "boost_preserves_metric", metric, 1e-13),
        CheckRecord::measured(s, "boost_brings_u_to_rest", rest, 1e-13),
        CheckRecord::measured(s, "boost_inverse", inverse, 1e-13),
        CheckRecord::measured(s, "com_total_momentum_vanishes", com, 1e-12),
        CheckRecord::measured(s, "com_relative_momentum_is_2g", pbar, 1e-9),
    ];
    if let Some(e) = err {
        out.push(CheckRecord::from_result(s, "boost_construction", 0.0, Err(e)));
    }
    let measure = (|| {
        let b = rest_boost(&FourVector::on_shell([0.6, 0.3, -0.2], c))?;
        let phi = |p: [f64; 3]| (-((p[0] - 0.2).powi(2) + p[1] * p[1] + (p[2] + 0.1).powi(2))).exp();
        let quad = MeasureQuad { p_max: 12.0, panels: 8, per_panel: 12, angular_order: 16, tol: 1e-9 };
        let (lhs, rhs) = invariant_measure_check(phi, &b, c, &quad)?;
        Ok((lhs - rhs).abs() / lhs.abs())
    })();
    out.push(CheckRecord::from_result(s, "invariant_measure", 1e-8, measure));
    out
}

const MOMENT_PARAMS: [(f64, f64, f64); 4] = [(0.0, 1.0, 1.0), (0.3, 0.5, 1.0), (-0.5, 2.0, 1.0), (0.7, 1.0, 3.0)];

/// Largest `|closed - quadrature| / ∫|factor| J` over all thirteen kinds and
/// every index combination, for far field `(u1, T, c)`.
pub fn moment_identity_error(u1: f64, temperature: f64, c: f64) -> Result<f64> {
    let params = MaxwellianParams::far_field(u1, temperature, c)?;
    let rule = params.boosted_rule(16)?;
    let kinds = Moment::all();
    let mut value = vec![CompensatedSum::new(); kinds.len()];
    let mut scale = vec![CompensatedSum::new(); kinds.len()];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let wj = w * juttner_eval(&params, *p);
        for (k, kind) in kinds.iter().enumerate() {
            let f = kind.integrand_factor(*p, c);
            value[k].add(wj * f);
            scale[k].add(wj * f.abs());
        }
    }
    let mut worst: f64 = 0.0;
    for (k, kind) in kinds.iter().enumerate() {
        worst = worst.max((moment(*kind, &params)? - value[k].value()).abs() / scale[k].value());
    }
    Ok(worst)
}

fn moment_checks() -> Vec<CheckRecord> {
    let s = Suite::Moments;
    let mut out = Vec::new();
    let rec = (|| {
        let mut worst: f64 = 0.0;
        for n in 1..=3 {
            for z in [0.1, 1.0, 10.0, 100.0] {
                worst = worst.max(recurrence_residual(n, z)?);
            }
        }
        Ok(worst)
    })();
    out.push(CheckRecord::from_result(s, "bessel_recurrence", 1e-12, rec));
    let integral = (|| {
        let mut worst: f64 = 0.0;
        for n in 0..=4 {
            for z in [1e-3, 0.1, 1.0, 2.0, 10.0, 100.0, 1e4] {
                let want = bessel_k_scaled_by_integral(n, z)?;
                worst = worst.max((bessel_k_scaled(n, z)? - want).abs() / want);
            }
        }
        Ok(worst)
    })();
    out.push(CheckRecord::from_result(s, "bessel_vs_integral", 1e-10, integral));
    for (u1, t, c) in MOMENT_PARAMS {
        let name = format!("moment_identities_u{u1}_T{t}_c{c}");
        out.push(CheckRecord::from_result(s, &name, 1e-6, moment_identity_error(u1, t, c)));
    }
    let m2 = (|| {
        let p = MaxwellianParams::far_field(0.3, 0.5, 1.0)?;
        let rule = p.quadrature_rule(16);
        let (q, _) = moment_by_quadrature(Moment::M2(1), &p, &rule)?;
        Ok((q - 0.3).abs() / 0.3)
    })();
    out.push(CheckRecord::from_result(s, "m2_equals_u1_over_c", 1e-8, m2));
    let classical = thermal_coefficients(1e4).map(|(a1, a2, a3)| {
        let z = 1e4;
        ((z * a2 - a1) / (z * a3) / (5.0 / 3.0) - 1.0).abs()
    });
    out.push(CheckRecord::from_result(s, "classical_sound_speed_limit", 1e-3, classical));
    let ultra = sound_speed(1e3, 1.0).map(|ss| (ss.c_hat_inf - 1.0 / 3f64.sqrt()).abs());
    out.push(CheckRecord::from_result(s, "ultrarelativistic_sound_speed_limit", 1e-2, ultra));
    out
}

/// Largest conservation, mass-shell, invariance and scattering-angle
/// defects over `pairs` random collisions.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct KinematicsDefects {
    pub conservation: f64,
    pub mass_shell: f64,
    pub invariance: f64,
    pub angle: f64,
}

pub fn kinematics_defects(pairs: usize, seed: u64) -> Result<KinematicsDefects> {
    let c = 1.0;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut d = KinematicsDefects::default();
    for _ in 0..pairs {
        let scale = 10f64.powf(rng.random_range(-1.0..1.5));
        let p = FourVector::on_shell(random_momentum(&mut rng, scale), c);
        let q = FourVector::on_shell(random_momentum(&mut rng, scale), c);
        let omega = random_unit(&mut rng);
        let pair = post_collision(&p, &q, omega, c)?;
        let e = p.t_component + q.t_component;
        let before = p + q;
        let after = pair.p_post + pair.q_post;
        d.conservation = d.conservation.max((before.t_component - after.t_component).abs() / e);
        for k in 0..3 {
            d.conservation = d.conservation.max((before.spatial[k] - after.spatial[k]).abs() / e);
        }
        for v in [pair.p_post, pair.q_post] {
            d.mass_shell = d.mass_shell.max((lorentz_dot(&v, &v) - c * c).abs() / v.t_component.powi(2));
        }
        let s_post = lorentz_dot(&after, &after);
        d.invariance = d.invariance.max((s_post - pair.s).abs() / pair.s);
        let rel = pair.p_post - pair.q_post;
        let g_post = 0.5 * (-lorentz_dot(&rel, &rel)).max(0.0).sqrt();
        if pair.g > 1e-3 * c {
            d.invariance = d.invariance.max((g_post - pair.g).abs() / pair.g);
            let alt = cos_theta_com(&p, &q, omega, c)?;
            d.angle = d.angle.max((alt - pair.cos_theta).abs());
        }
    }
    Ok(d)
}

/// Relative defect of `ν(p) = (p̃0/p0) ν⁰(p̃)` where `p̃` is `p` seen from
/// the rest frame of the far field.
pub fn frequency_boost_defect(kernel: &KernelParams, far: &MaxwellianParams, p: [f64; 3], panels: usize, angular: usize) -> Result<f64> {
    let c = far.c;
    let rest = MaxwellianParams::at_rest(far.temperature, c)?;
    let boost = rest_boost(&far.four_velocity())?;
    let pv = FourVector::on_shell(p, c);
    let pt = boost.apply(&pv);
    let moving = collision_frequency(kernel, far, p, &frequency_rule(far, p, panels, angular));
    let at_rest = collision_frequency(kernel, &rest, pt.spatial, &frequency_rule(&rest, pt.spatial, panels, angular));
    let want = pt.t_component / pv.t_component * at_rest;
    Ok((moving - want).abs() / want)
}

/// `p`-integrated collision moments for the equilibrium `J` and the bumped
/// equilibrium `F = J (1 + bump e^{-|p|²})`.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct CollisionMoments {
    /// `∫ |Q(J, J)| dp` and the matching loss integral `∫ J(p) ∫∫ v σ J(q)`.
    pub equilibrium_l1: f64,
    pub equilibrium_loss_l1: f64,
    /// `⟨χ_i, Γ(h, h)⟩` with `h = F / J^{1/2}`, and `∫ |χ_i / J^{1/2}| (Q⁺ + Q⁻)`.
    pub gamma_chi: [f64; 5],
    pub gamma_scale: [f64; 5],
    /// `⟨φ_i, Q(F, F)⟩` for `φ = (1, p1, p2, p3, p0)`.
    pub invariants: [f64; 5],
    /// `∫ |Q(F, F)| dp`.
    pub q_l1: f64,
}

impl CollisionMoments {
    fn add(mut self, o: Self) -> Self {
        self.equilibrium_l1 += o.equilibrium_l1;
        self.equilibrium_loss_l1 += o.equilibrium_loss_l1;
        for i in 0..5 {
            self.gamma_chi[i] += o.gamma_chi[i];
            self.gamma_scale[i] += o.gamma_scale[i];
            self.invariants[i] += o.invariants[i];
        }
        self.q_l1 += o.q_l1;
        self
    }
}

/// Integrate the collision moments with `p_rule` for the outer variable and
/// `quad(p)` for `(q, ω)`. One pass over the samples serves both test
/// functions.
pub fn collision_moments<Q>(kernel: &KernelParams, far: &MaxwellianParams, p_rule: &MomentumRule, quad: Q, bump: f64) -> Result<CollisionMoments>
where
    Q: Fn([f64; 3]) -> CollisionQuad + Sync,
{
    kernel.validate()?;
    let c = far.c;
    let ops = macro_operator(far.u[0], far.temperature, c)?;
    let jt = JuttnerEvaluator::new(far);
    let j = |x: [f64; 3]| jt.value(x);
    let f = |x: [f64; 3]| jt.value(x) * (1.0 + bump * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp());
    let rows: Vec<CollisionMoments> = p_rule
        .points
        .par_iter()
        .zip(&p_rule.weights)
        .map(|(&p, &wp)| {
            let (mut gj, mut lj, mut gf, mut lf) = (0.0, 0.0, 0.0, 0.0);
            for_each_sample(kernel, p, c, &quad(p), |pp, qq, q, _, w| {
                gj += w * j(pp) * j(qq);
                lj += w * j(q);
                gf += w * f(pp) * f(qq);
                lf += w * f(q);
            });
            let q_eq = gj - j(p) * lj;
            let (gain, loss) = (gf, f(p) * lf);
            let q_f = gain - loss;
            let root = jt.sqrt(p);
            let phi = [1.0, p[0], p[1], p[2], crate::lorentz::energy(p, c)];
            let mut row = CollisionMoments {
                equilibrium_l1: wp * q_eq.abs(),
                equilibrium_loss_l1: wp * j(p) * lj,
                q_l1: wp * q_f.abs(),
                ..Default::default()
            };
            for i in 0..5 {
                let poly = if root > 0.0 { ops.chi(i, p) / root } else { 0.0 };
                row.gamma_chi[i] = wp * poly * q_f;
                row.gamma_scale[i] = wp * poly.abs() * (gain.abs() + loss.abs());
                row.invariants[i] = wp * phi[i] * q_f;
            }
            row
        })
        .collect();
    Ok(rows.into_iter().fold(CollisionMoments::default(), CollisionMoments::add))
}

fn collision_checks() -> Vec<CheckRecord> {
    let s = Suite::Collision;
    let mut out = Vec::new();
    match kinematics_defects(5000, 3) {
        Ok(d) => {
            out.push(CheckRecord::measured(s, "momentum_energy_conservation", d.conservation, 1e-12));
            out.push(CheckRecord::measured(s, "post_collision_mass_shell", d.mass_shell, 1e-12));
            out.push(CheckRecord::measured(s, "s_and_g_invariance", d.invariance, 1e-11));
            out.push(CheckRecord::measured(s, "scattering_angle_definitions_agree", d.angle, 1e-10));
        }
        Err(e) => out.push(CheckRecord::from_result(s, "kinematics", 0.0, Err(e))),
    }
    let annihilation = (|| {
        let far = MaxwellianParams::far_field(-0.4, 1.0, 1.0)?;
        let kernel = KernelParams::power_law(1.0, 0.5, 0.0);
        let mut worst: f64 = 0.0;
        for p in [[0.0, 0.0, 0.0], [1.0, -0.5, 0.3], [-2.0, 0.4, 1.5]] {
            let quad = CollisionQuad::centered(p, &far, 3, 6, 6);
            let j = |x: [f64; 3]| juttner_eval(&far, x);
            let (gain, loss) = collision_q_split(&kernel, 1.0, j, j, p, &quad);
            worst = worst.max((gain - loss).abs() / loss);
        }
        Ok(worst)
    })();
    out.push(CheckRecord::from_result(s, "equilibrium_annihilation", 1e-12, annihilation));
    let boost = (|| {
        let far = MaxwellianParams::far_field(0.8, 1.0, 1.0)?;
        let kernel = KernelParams::power_law(1.0, 1.0, 0.0);
        let mut worst: f64 = 0.0;
        for p in [[0.5, 0.2, -0.1], [3.0, -1.0, 0.5]] {
            worst = worst.max(frequency_boost_defect(&kernel, &far, p, 6, 12)?);
        }
        Ok(worst)
    })();
    out.push(CheckRecord::from_result(s, "frequency_boost_identity", 1e-5, boost));
    out
}

fn macro_checks() -> Vec<CheckRecord> {
    let s = Suite::Macro;
    let mut out = Vec::new();
    let b = (|| {
        let mut worst: f64 = 0.0;
        for (u1, t) in [(-0.5, 1.0), (1.2, 0.3), (0.2, 4.0), (-3.0, 1.0)] {
            let op = macro_operator(u1, t, 1.0)?;
            let r = verify_b_by_quadrature(&op, &op.far.boosted_rule(24)?);
            worst = worst.max(r.b_deviation).max(r.gram_deviation);
        }
        Ok(worst)
    })();
    out.push(CheckRecord::from_result(s, "b_closed_form_vs_quadrature", 1e-6, b));
    let eig = (|| {
        let (mut check, mut trace): (f64, f64) = (0.0, 0.0);
        for (u1, t) in [(-0.5, 1.0), (1.2, 0.3), (0.2, 4.0), (-3.0, 1.0)] {
            let m = build_macro_model(u1, t, 1.0)?;
            check = check.max(m.eigen_check());
            let sum: f64 = m.op.eigenvalues.iter().sum();
            trace = trace.max((m.op.b.trace() - sum).abs());
        }
        Ok((check, trace))
    })();
    match eig {
        Ok((check, trace)) => {
            out.push(CheckRecord::measured(s, "eigenvalues_closed_form_vs_solver", check, 1e-10));
            out.push(CheckRecord::measured(s, "trace_equals_eigenvalue_sum", trace, 1e-12));
        }
        Err(e) => out.push(CheckRecord::from_result(s, "eigen_decomposition", 0.0, Err(e))),
    }
    let mach = (|| {
        let mut worst: f64 = 0.0;
        for z in [0.5, 5.0, 50.0] {
            let t = 1.0 / z;
            let root = eigenvalue_root(Branch::Lowest, t, 1.0)?;
            let cs = sound_speed(t, 1.0)?.c_inf;
            worst = worst.max((root - cs).abs() / cs);
        }
        Ok(worst)
    })();
    out.push(CheckRecord::from_result(s, "sonic_root_equals_sound_speed", 1e-8, mach));
    let table = (|| {
        let cs = sound_speed(1.0, 1.0)?.c_inf;
        let mut wrong = 0.0;
        for (m, want) in [(-2.0, 0), (-0.5, 1), (0.5, 4), (2.0, 5)] {
            if classify(m * cs, 1.0, 1.0)?.n_plus != want {
                wrong += 1.0;
            }
        }
        Ok(wrong)
    })();
    out.push(CheckRecord::from_result(s, "n_plus_table", 0.0, table));
    out
}

/// A small operator for quick end-to-end solver checks.
pub fn desk_operator(mach: f64, per_axis: usize) -> Result<DiscreteOperator> {
    let cs = sound_speed(1.0, 1.0)?.c_inf;
    let far = MaxwellianParams::far_field(mach * cs, 1.0, 1.0)?;
    let spec = MomentumGridSpec { per_axis, p_max: 8.0, stretch: 2.0 };
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
    DiscreteOperator::assemble(KernelParams::constant(1.0), far, spec, quad)
}

fn solver_checks() -> Vec<CheckRecord> {
    let s = Suite::Solver;
    let mut out = Vec::new();
    let sub = (|| {
        let hs = HalfSpace::new(desk_operator(-0.5, 6)?, SolverConfig { nx: 24, ..Default::default() })?;
        let a0 = BoundaryFamily::MaxwellianBump { amplitude: 1e-3 }.evaluate(&hs.op)?;
        let zero = DistributionField::zeros(&hs.grid);
        let sol = hs.solve_linear_damped(&a0, &zero)?;
        let boundary = (0..hs.op.len())
            .filter(|&i| hs.op.p_hat1[i] > 0.0)
            .map(|i| (sol.h.at(0, i) - a0[i]).abs())
            .fold(0.0, f64::max);
        let residual = hs.equation_residual(&sol.h, &zero) / hs.config.tol;
        let report = hs.damping_decay_check(&hs.damped(&sol.h));
        let gamma = report.gamma_fit.map_or(f64::NAN, |g| (g / hs.gamma - 1.0).abs());
        Ok((boundary, residual, gamma))
    })();
    match sub {
        Ok((boundary, residual, gamma)) => {
            out.push(CheckRecord::measured(s, "boundary_data_imposed", boundary, 0.0));
            out.push(CheckRecord::measured(s, "equation_residual_over_tol", residual, 10.0));
            out.push(CheckRecord::measured(s, "damping_rate_fit", gamma, 0.02));
        }
        Err(e) => out.push(CheckRecord::from_result(s, "subsonic_solve", 0.0, Err(e))),
    }
    let sup = (|| {
        let hs = HalfSpace::new(desk_operator(-2.0, 6)?, SolverConfig { nx: 24, ..Default::default() })?;
        let a0 = BoundaryFamily::Mode { amplitude: 1e-3, index: 5 }.evaluate(&hs.op)?;
        let sol = hs.solve_linear_damped(&a0, &DistributionField::zeros(&hs.grid))?;
        let f = hs.damped(&sol.h);
        Ok(hs.solvability_residual(&f).iter().fold(0.0f64, |m, v| m.max(v.abs())))
    })();
    out.push(CheckRecord::from_result(s, "supersonic_has_no_conditions", 0.0, sup));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn lorentz_suite_passes() {
        for r in run_suite(Suite::Lorentz) {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn macro_suite_passes() {
        for r in run_suite(Suite::Macro) {
            assert!(r.passed, "{r:?}");
        }
    }
}
