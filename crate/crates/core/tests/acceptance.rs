//! End-to-end acceptance criteria. Each test prints one `PASS`/`FAIL` line
//! straight to stdout, so the lines survive output capture, and then asserts
//! the verdict together with its runtime budget.

use relkin::collision::{collision_frequency, frequency_rule, CollisionQuad, KernelParams};
use relkin::config::RunConfig;
use relkin::grid::{MomentumGrid, MomentumGridSpec};
use relkin::halfspace::{linear_slope, BoundaryFamily, DiscreteOperator, HalfSpace, NonlinearSolution};
use relkin::juttner::MaxwellianParams;
use relkin::lorentz::energy;
use relkin::macro5::{
    build_macro_model, classify, eigenvalue_root, macro_operator, sound_speed, thermal_coefficients, verify_b_by_quadrature,
    Branch,
};
use relkin::quadrature::{MomentumRule, SphereRule};
use relkin::special::{bessel_k, bessel_k_scaled, bessel_k_scaled_by_integral, recurrence_residual};
use relkin::verify::{collision_moments, frequency_boost_defect, kinematics_defects, moment_identity_error, CollisionMoments};
use std::io::Write;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

/// Criteria run one at a time so that each wall-clock budget measures only
/// its own work.
static SERIAL: Mutex<()> = Mutex::new(());

struct Run {
    id: u32,
    title: &'static str,
    budget: Option<Duration>,
    start: Instant,
    _guard: std::sync::MutexGuard<'static, ()>,
}

impl Run {
    fn start(id: u32, title: &'static str, budget_secs: Option<u64>) -> Self {
        let guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
        Self { id, title, budget: budget_secs.map(Duration::from_secs), start: Instant::now(), _guard: guard }
    }

    /// Print the verdict line and fail the test if a check or the budget failed.
    fn finish(self, checks: &[(String, bool)]) {
        let elapsed = self.start.elapsed();
        let in_time = self.budget.is_none_or(|b| elapsed <= b);
        let passed = in_time && checks.iter().all(|(_, ok)| *ok);
        let budget = self.budget.map_or(String::new(), |b| format!(" budget {}s", b.as_secs()));
        let detail: Vec<&str> = checks.iter().map(|(d, _)| d.as_str()).collect();
        let line = format!(
            "{} criterion {:>2} {}: {} [{:.2}s{budget}]\n",
            if passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            detail.join("; "),
            elapsed.as_secs_f64()
        );
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(line.as_bytes());
        let _ = out.flush();
        assert!(in_time, "criterion {} exceeded its budget: {elapsed:?}", self.id);
        for (d, ok) in checks {
            assert!(ok, "criterion {}: {d}", self.id);
        }
    }
}

fn at_most(name: &str, value: f64, limit: f64) -> (String, bool) {
    (format!("{name} {value:.3e} <= {limit:.0e}"), value.is_finite() && value <= limit)
}

fn c_inf() -> f64 {
    sound_speed(1.0, 1.0).unwrap().c_inf
}

#[test]
fn criterion_01_classical_sound_speed() {
    let run = Run::start(1, "classical sound-speed limit", Some(1));
    let z = 1e4;
    let (a1, a2, a3) = thermal_coefficients(z).unwrap();
    let ratio = (z * a2 - a1) / (z * a3);
    run.finish(&[at_most("|ratio/(5/3) - 1|", (ratio / (5.0 / 3.0) - 1.0).abs(), 1e-3)]);
}

#[test]
fn criterion_02_ultrarelativistic_sound_speed() {
    let run = Run::start(2, "ultrarelativistic sound-speed limit", Some(1));
    // z = c²/T = 1e-3
    let s = sound_speed(1e3, 1.0).unwrap();
    run.finish(&[at_most("|c_hat - 1/sqrt3|", (s.c_hat_inf - 1.0 / 3f64.sqrt()).abs(), 1e-2)]);
}

#[test]
fn criterion_03_bessel_functions() {
    let run = Run::start(3, "Bessel recurrence and integral", Some(5));
    let zs = [0.1, 1.0, 10.0, 100.0];
    let mut rec: f64 = 0.0;
    for n in 1..=3 {
        for z in zs {
            rec = rec.max(recurrence_residual(n, z).unwrap());
        }
    }
    let mut integral: f64 = 0.0;
    for n in 0..=4 {
        for z in zs {
            let want = bessel_k_scaled_by_integral(n, z).unwrap();
            integral = integral.max((bessel_k_scaled(n, z).unwrap() - want).abs() / want);
            // the unscaled value is the scaled one times e^{-z}
            let unscaled = bessel_k(n, z).unwrap();
            integral = integral.max((unscaled - want * (-z).exp()).abs() / (want * (-z).exp()));
        }
    }
    run.finish(&[at_most("recurrence", rec, 1e-12), at_most("vs integral", integral, 1e-10)]);
}

#[test]
fn criterion_04_moment_identities() {
    let run = Run::start(4, "Juttner moment identities", Some(120));
    let checks: Vec<_> = [(0.0, 1.0, 1.0), (0.3, 0.5, 1.0), (-0.5, 2.0, 1.0), (0.7, 1.0, 3.0)]
        .into_iter()
        .map(|(u1, t, c)| at_most(&format!("({u1},{t},{c})"), moment_identity_error(u1, t, c).unwrap(), 1e-6))
        .collect();
    run.finish(&checks);
}

#[test]
fn criterion_05_sonic_root() {
    let run = Run::start(5, "sonic root of the lowest eigenvalue", Some(10));
    let checks: Vec<_> = [0.5, 5.0, 50.0]
        .into_iter()
        .map(|z| {
            let t = 1.0 / z;
            let root = eigenvalue_root(Branch::Lowest, t, 1.0).unwrap();
            let cs = sound_speed(t, 1.0).unwrap().c_inf;
            at_most(&format!("z={z}"), (root - cs).abs() / cs, 1e-8)
        })
        .collect();
    run.finish(&checks);
}

#[test]
fn criterion_06_macro_matrix() {
    let run = Run::start(6, "closed-form B against quadrature", Some(60));
    let (mut dev, mut asym, mut eig, mut trace): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (u1, t) in [(-0.5, 1.0), (1.2, 0.3), (0.2, 4.0), (-3.0, 1.0)] {
        let op = macro_operator(u1, t, 1.0).unwrap();
        let r = verify_b_by_quadrature(&op, &op.far.boosted_rule(24).unwrap());
        dev = dev.max(r.b_deviation).max(r.gram_deviation);
        asym = asym.max(r.b_asymmetry);
        let m = build_macro_model(u1, t, 1.0).unwrap();
        eig = eig.max(m.eigen_check());
        trace = trace.max((m.op.b.trace() - m.op.eigenvalues.iter().sum::<f64>()).abs());
    }
    run.finish(&[
        at_most("B deviation", dev, 1e-6),
        at_most("B asymmetry", asym, 1e-9),
        at_most("eigenvalues", eig, 1e-10),
        at_most("trace", trace, 1e-12),
    ]);
}

#[test]
fn criterion_07_collision_kinematics() {
    let run = Run::start(7, "collision kinematics over 1e5 pairs", None);
    let d = kinematics_defects(100_000, 7).unwrap();
    run.finish(&[
        at_most("conservation", d.conservation, 1e-12),
        at_most("mass shell", d.mass_shell, 1e-12),
        at_most("s,g invariance", d.invariance, 1e-11),
        at_most("angle", d.angle, 1e-10),
    ]);
}

fn grid_rule(per_axis: usize) -> MomentumRule {
    let g = MomentumGrid::new(MomentumGridSpec { per_axis, ..Default::default() }).unwrap();
    MomentumRule { points: g.points, weights: g.weights, p_max: g.spec.p_max }
}

fn subsonic_far() -> MaxwellianParams {
    MaxwellianParams::far_field(-0.5 * c_inf(), 1.0, 1.0).unwrap()
}

/// Collision moments on the 16³ desk grid with an order-6 solid-angle rule,
/// and the same `p` nodes with a coarser `(q, ω)` rule for the error estimate.
fn desk_moments() -> &'static (CollisionMoments, CollisionMoments) {
    static CELL: OnceLock<(CollisionMoments, CollisionMoments)> = OnceLock::new();
    CELL.get_or_init(|| {
        let far = subsonic_far();
        let kernel = KernelParams::constant(1.0);
        let p_rule = grid_rule(16);
        let fine = CollisionQuad::new(p_rule.clone(), SphereRule::of_order(6));
        let coarse = CollisionQuad::new(grid_rule(12), SphereRule::of_order(4));
        (
            collision_moments(&kernel, &far, &p_rule, |_| fine.clone(), 0.1).unwrap(),
            collision_moments(&kernel, &far, &p_rule, |_| coarse.clone(), 0.1).unwrap(),
        )
    })
}

/// `|fine| <= 10 · max(|fine - coarse|, rounding)`, everything relative to `scale`.
fn within_error_estimate(name: &str, fine: f64, coarse: f64, scale: f64) -> (String, bool) {
    let rounding = 1e3 * f64::EPSILON;
    let value = fine.abs() / scale;
    let estimate = ((fine - coarse).abs() / scale).max(rounding);
    (format!("{name} {value:.2e} <= 10 x {estimate:.2e}"), value <= 10.0 * estimate)
}

#[test]
fn criterion_08_equilibrium_annihilation() {
    let run = Run::start(8, "equilibrium annihilation on the desk grid", Some(300));
    let (fine, coarse) = desk_moments();
    let mut checks = vec![within_error_estimate(
        "Q(J,J)",
        fine.equilibrium_l1,
        coarse.equilibrium_l1,
        fine.equilibrium_loss_l1,
    )];
    for i in 0..5 {
        checks.push(within_error_estimate(&format!("<chi_{i},G>"), fine.gamma_chi[i], coarse.gamma_chi[i], fine.gamma_scale[i]));
    }
    run.finish(&checks);
}

#[test]
fn criterion_09_collision_invariants() {
    let run = Run::start(9, "collision invariants of the bumped equilibrium", Some(300));
    let far = subsonic_far();
    // spherical rules about the bulk velocity resolve the thermal core in both variables
    let p_rule = MomentumRule::graded(far.tail_radius(), far.thermal_width(), 4, 8, &SphereRule::new(8, 16)).translated(far.u);
    let m = collision_moments(&KernelParams::constant(1.0), &far, &p_rule, |_| CollisionQuad::for_far_field(&far, 6, 6, 4), 0.1).unwrap();
    let checks: Vec<_> = (0..5).map(|i| at_most(&format!("phi_{i}"), m.invariants[i].abs() / m.q_l1, 1e-3)).collect();
    run.finish(&checks);
}

#[test]
fn criterion_10_collision_frequency_scaling() {
    let run = Run::start(10, "collision frequency growth and boost identity", Some(120));
    let far = subsonic_far();
    let kernel = KernelParams::power_law(1.0, 1.0, 0.0);
    let c = far.c;
    let pts: Vec<(f64, f64)> = (0..=12)
        .map(|k| {
            let p0 = 10.0 * 10f64.powf(k as f64 / 6.0);
            let p1 = (p0 * p0 - c * c).sqrt();
            let p = [p1 / 3f64.sqrt(), -p1 / 3f64.sqrt(), p1 / 3f64.sqrt()];
            let nu = collision_frequency(&kernel, &far, p, &frequency_rule(&far, p, 8, 16));
            (energy(p, c).ln(), nu.ln())
        })
        .collect();
    let slope = linear_slope(&pts).unwrap();
    let mut boost: f64 = 0.0;
    let moving = MaxwellianParams::far_field(0.8, 1.0, 1.0).unwrap();
    for p in [[0.5, 0.2, -0.1], [3.0, -1.0, 0.5], [-20.0, 5.0, 2.0]] {
        boost = boost.max(frequency_boost_defect(&kernel, &moving, p, 8, 16).unwrap());
    }
    run.finish(&[at_most("|slope - 1/2|", (slope - 0.5).abs(), 0.05), at_most("boost identity", boost, 1e-5)]);
}

/// The default run configuration at Mach -1/2 and its assembled operator.
fn default_subsonic() -> &'static (RunConfig, DiscreteOperator) {
    static CELL: OnceLock<(RunConfig, DiscreteOperator)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut cfg = RunConfig::default();
        cfg.physical.u1 = Some(-0.5 * c_inf());
        let op = DiscreteOperator::assemble(cfg.kernel, cfg.far_field().unwrap(), cfg.momentum_spec(), cfg.quadrature).unwrap();
        (cfg, op)
    })
}

fn solve_default(nx: usize, amplitude: f64) -> (HalfSpace, NonlinearSolution) {
    let (cfg, op) = default_subsonic();
    let mut sc = cfg.solver_config();
    sc.nx = nx;
    let hs = HalfSpace::new(op.clone(), sc).unwrap();
    let a0 = BoundaryFamily::MaxwellianBump { amplitude }.evaluate(&hs.op).unwrap();
    let sol = hs.solve_nonlinear_damped(&a0).unwrap();
    (hs, sol)
}

#[test]
fn criterion_11_damping_decay_law() {
    let run = Run::start(11, "damping trace decays at rate gamma", Some(600));
    let (hs, sol) = solve_default(64, 1e-3);
    assert!(hs.op.n_plus() > 0);
    let coarse = hs.damping_decay_check(&sol.f).deviation;
    let (hs2, sol2) = solve_default(128, 1e-3);
    let fine = hs2.damping_decay_check(&sol2.f).deviation;
    let ratio = coarse / fine;
    // at least halving: a higher convergence order also passes
    run.finish(&[
        at_most("deviation nx=64", coarse, 1e-3),
        (format!("refinement ratio {ratio:.2} >= 1.6"), ratio >= 1.6),
    ]);
}

#[test]
fn criterion_12_nonlinear_small_data() {
    let run = Run::start(12, "nonlinear small-data solve", Some(600));
    let (hs, sol) = solve_default(64, 1e-3);
    let outer = sol.history.len();
    let residual = hs.equation_residual(&sol.h, &sol.zeta) / hs.config.tol;
    let envelope = hs.envelope(&sol.f).excess;
    let (hs_half, half) = solve_default(64, 5e-4);
    let beta = hs.config.beta;
    let ratio = sol.f.sup_weighted(&hs.grid, beta) / half.f.sup_weighted(&hs_half.grid, beta);
    run.finish(&[
        (format!("outer iterations {outer} <= 20"), outer <= 20),
        at_most("residual/tol", residual, 10.0),
        at_most("envelope excess", envelope, 0.05),
        at_most("|norm ratio/2 - 1|", (ratio / 2.0 - 1.0).abs(), 0.1),
    ]);
}

#[test]
fn criterion_13_n_plus_table() {
    let run = Run::start(13, "n+ classification table", Some(1));
    let cs = c_inf();
    let checks: Vec<_> = [(-2.0, 0), (-0.5, 1), (0.5, 4), (2.0, 5)]
        .into_iter()
        .map(|(m, want)| {
            let got = classify(m * cs, 1.0, 1.0).unwrap().n_plus;
            (format!("M={m}: {got}"), got == want)
        })
        .collect();
    run.finish(&checks);
}
