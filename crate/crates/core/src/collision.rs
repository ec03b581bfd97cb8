//! Binary collision kinematics, the scattering cross section, and the
//! collision integrals built on them: `Q`, the collision frequency `ν`, the
//! compact part `K` of the linearized operator and the bilinear `Γ`.

use crate::error::{Error, Result};
use crate::juttner::{juttner_sqrt, JuttnerEvaluator, MaxwellianParams};
use crate::lorentz::{com_reduce, dot3, energy, lorentz_dot, norm3, FourVector};
use crate::quadrature::{compensated_sum, integrate_adaptive, CompensatedSum, MomentumRule, SphereRule};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Cross-section family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossSectionModel {
    /// `σ = σ0`.
    Constant,
    /// `σ = σ0 (g/c)^a sin^ς θ`.
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelParams {
    pub model: CrossSectionModel,
    pub sigma0: f64,
    pub a: f64,
    pub b: f64,
    pub varsigma: f64,
    /// Lower bound constant of the hard-potential bracket.
    pub c1: f64,
    /// Upper bound constant of the hard-potential bracket.
    pub c2: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

impl KernelParams {
    pub fn constant(sigma0: f64) -> Self {
        Self { model: CrossSectionModel::Constant, sigma0, a: 0.0, b: 0.0, varsigma: 0.0, c1: sigma0, c2: sigma0 }
    }

    pub fn power_law(sigma0: f64, a: f64, varsigma: f64) -> Self {
        Self { model: CrossSectionModel::PowerLaw, sigma0, a, b: 0.0, varsigma, c1: sigma0, c2: sigma0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::config(format!("kernel.{key}"), why));
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return bad("sigma0", "must be positive".into());
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return bad("c1", "bound constants must be positive".into());
        }
        if !(0.0..0.5).contains(&self.b) {
            return bad("b", format!("need 0 <= b < 1/2, got {}", self.b));
        }
        if !(self.a >= 0.0 && self.a < 2.0 - 2.0 * self.b) {
            return bad("a", format!("need 0 <= a < 2 - 2b, got {}", self.a));
        }
        if self.varsigma < 0.0 {
            let lim = (2.0 - self.a).min(0.5 - self.b).min((2.0 - 2.0 * self.b - self.a) / 3.0);
            if self.varsigma.abs() >= lim {
                return bad("varsigma", format!("negative varsigma needs |varsigma| < {lim}"));
            }
        }
        if self.model == CrossSectionModel::Constant && (self.a != 0.0 || self.varsigma != 0.0 || self.b != 0.0) {
            return bad("model", "the constant model has a = b = varsigma = 0".into());
        }
        let eta = self.eta();
        if !(eta > 0.0 && eta <= 1.0) {
            return bad("a", format!("derived eta = {eta} outside (0, 1]"));
        }
        Ok(())
    }

    /// `η = 1 - (3|ς| + a + 2b)/2`.
    pub fn eta(&self) -> f64 {
        1.0 - 0.5 * (3.0 * self.varsigma.abs() + self.a + 2.0 * self.b)
    }

    /// `∫_{S^2} sin^ς θ dω`; the solid-angle average of the angular factor.
    pub fn angular_mass(&self) -> f64 {
        if self.varsigma == 0.0 {
            return 4.0 * PI;
        }
        let s = self.varsigma;
        2.0 * PI
            * integrate_adaptive(|t: f64| t.sin().powf(s + 1.0), 0.0, PI, 1e-13, 0.0)
                .expect("smooth integrand on a finite interval")
    }

    /// Lower and upper hard-potential bounds on `σ(g, θ)`.
    pub fn bounds(&self, g: f64, cos_theta: f64, c: f64) -> (f64, f64) {
        let s = 4.0 * g * g + 4.0 * c * c;
        let ang = sin_power(cos_theta, self.varsigma);
        let gc = g / c;
        let lower = self.c1 * gc.powf(self.a + 1.0) / (s.sqrt() / c) * ang;
        let upper = self.c2 * (gc.powf(self.a) + gc.powf(-self.b)) * ang;
        (lower, upper)
    }
}

#[inline]
fn sin_power(cos_theta: f64, varsigma: f64) -> f64 {
    if varsigma == 0.0 {
        1.0
    } else {
        (1.0 - cos_theta * cos_theta).max(0.0).sqrt().powf(varsigma)
    }
}

/// `σ(g, θ)`.
#[inline]
pub fn sigma_eval(params: &KernelParams, g: f64, cos_theta: f64, c: f64) -> f64 {
    match params.model {
        CrossSectionModel::Constant => params.sigma0,
        CrossSectionModel::PowerLaw => {
            let radial = if params.a == 0.0 { 1.0 } else { (g / c).powf(params.a) };
            params.sigma0 * radial * sin_power(cos_theta, params.varsigma)
        }
    }
}

/// `∫ σ(g, θ) dω`, which depends on `g` only.
#[inline]
fn sigma_angular_integral(params: &KernelParams, angular_mass: f64, g: f64, c: f64) -> f64 {
    match params.model {
        CrossSectionModel::Constant => 4.0 * PI * params.sigma0,
        CrossSectionModel::PowerLaw => {
            let radial = if params.a == 0.0 { 1.0 } else { (g / c).powf(params.a) };
            params.sigma0 * radial * angular_mass
        }
    }
}

/// A collision `(P, Q, ω) -> (P', Q')` with its invariants.
#[derive(Debug, Clone, Copy)]
pub struct CollisionPair {
    pub p: FourVector,
    pub q: FourVector,
    pub omega: [f64; 3],
    pub s: f64,
    pub g: f64,
    /// `cos θ = -(P-Q).(P'-Q') / (4g^2)`; `1` when `g = 0`.
    pub cos_theta: f64,
    pub p_post: FourVector,
    pub q_post: FourVector,
    /// Møller velocity `(c/2) g sqrt(s) / (p0 q0)`.
    pub moller: f64,
}

/// Raw kinematics on arrays, shared by the public API and the hot loops.
/// Returns `(p', p0', q', q0', g, s)`.
#[inline]
fn kinematics(p: [f64; 3], p0: f64, q: [f64; 3], q0: f64, omega: [f64; 3], c: f64) -> ([f64; 3], f64, [f64; 3], f64, f64, f64) {
    let pq = p0 * q0 - dot3(p, q);
    let s = 2.0 * (pq + c * c);
    let g = 0.5 * (2.0 * (pq - c * c)).max(0.0).sqrt();
    let sum = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
    let e = p0 + q0;
    let sum2 = dot3(sum, sum);
    let rs = s.sqrt();
    let so = dot3(sum, omega);
    let shift = if sum2 < 1e-28 {
        omega.map(|w| g * w)
    } else {
        let gt = e / rs;
        let k = (gt - 1.0) * so / sum2;
        [g * (omega[0] + k * sum[0]), g * (omega[1] + k * sum[1]), g * (omega[2] + k * sum[2])]
    };
    let pp = [0.5 * sum[0] + shift[0], 0.5 * sum[1] + shift[1], 0.5 * sum[2] + shift[2]];
    let qq = [0.5 * sum[0] - shift[0], 0.5 * sum[1] - shift[1], 0.5 * sum[2] - shift[2]];
    let de = g / rs * so;
    (pp, 0.5 * e + de, qq, 0.5 * e - de, g, s)
}

pub fn post_collision(p: &FourVector, q: &FourVector, omega: [f64; 3], c: f64) -> Result<CollisionPair> {
    if (norm3(omega) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("omega must be a unit vector, |omega| = {}", norm3(omega))));
    }
    let (pp, pp0, qq, qq0, g, s) = kinematics(p.spatial, p.t_component, q.spatial, q.t_component, omega, c);
    let p_post = FourVector::new(pp0, pp);
    let q_post = FourVector::new(qq0, qq);
    let cos_theta = if g > 0.0 {
        (-lorentz_dot(&(*p - *q), &(p_post - q_post)) / (4.0 * g * g)).clamp(-1.0, 1.0)
    } else {
        1.0
    };
    Ok(CollisionPair {
        p: *p,
        q: *q,
        omega,
        s,
        g,
        cos_theta,
        p_post,
        q_post,
        moller: 0.5 * c * g * s.sqrt() / (p.t_component * q.t_component),
    })
}

/// `cos θ = p̄.ω / |p̄|` from the center-of-momentum reduction.
pub fn cos_theta_com(p: &FourVector, q: &FourVector, omega: [f64; 3], c: f64) -> Result<f64> {
    let frame = com_reduce(p, q, c)?;
    let n = norm3(frame.p_bar);
    if n == 0.0 {
        return Ok(1.0);
    }
    Ok(dot3(frame.p_bar, omega) / n)
}

/// Quadrature over `(q, ω)` for the collision integrals.
#[derive(Debug, Clone)]
pub struct CollisionQuad {
    pub q_rule: MomentumRule,
    pub sphere: SphereRule,
}

impl CollisionQuad {
    pub fn new(q_rule: MomentumRule, sphere: SphereRule) -> Self {
        Self { q_rule, sphere }
    }

    /// Spherical rule centered on the far-field bulk velocity.
    pub fn for_far_field(far: &MaxwellianParams, panels: usize, angular: usize, omega_order: usize) -> Self {
        let rule = MomentumRule::graded(far.tail_radius(), far.thermal_width(), panels, 8, &SphereRule::new(angular, 2 * angular));
        Self { q_rule: rule.translated(far.u), sphere: SphereRule::of_order(omega_order) }
    }

    /// Spherical rule centered on `center`, reaching past the far-field
    /// tail. Smooth in `q` for integrands whose only kink sits at `center`.
    pub fn centered(center: [f64; 3], far: &MaxwellianParams, panels: usize, angular: usize, omega_order: usize) -> Self {
        let reach = norm3([center[0] - far.u[0], center[1] - far.u[1], center[2] - far.u[2]]) + far.tail_radius();
        let rule = MomentumRule::graded(reach, far.thermal_width(), panels, 8, &SphereRule::new(angular, 2 * angular));
        Self { q_rule: rule.translated(center), sphere: SphereRule::of_order(omega_order) }
    }
}

/// Visit every `(q, ω)` node of `quad` for the row `p`, passing the
/// post-collision momenta, `q`, the index of `q` in the rule and the weight
/// `w_q w_ω v σ`.
pub(crate) fn for_each_sample<F>(kernel: &KernelParams, p: [f64; 3], c: f64, quad: &CollisionQuad, mut visit: F)
where
    F: FnMut([f64; 3], [f64; 3], [f64; 3], usize, f64),
{
    let p0 = energy(p, c);
    for (iq, (q, wq)) in quad.q_rule.points.iter().zip(&quad.q_rule.weights).enumerate() {
        let q0 = energy(*q, c);
        for (om, wo) in quad.sphere.directions.iter().zip(&quad.sphere.weights) {
            let (pp, pp0, qq, qq0, g, s) = kinematics(p, p0, *q, q0, *om, c);
            if g == 0.0 {
                continue;
            }
            let v = 0.5 * c * g * s.sqrt() / (p0 * q0);
            let ct = {
                let a = (p0 - q0) * (pp0 - qq0)
                    - ((p[0] - q[0]) * (pp[0] - qq[0]) + (p[1] - q[1]) * (pp[1] - qq[1]) + (p[2] - q[2]) * (pp[2] - qq[2]));
                (-a / (4.0 * g * g)).clamp(-1.0, 1.0)
            };
            visit(pp, qq, *q, iq, wq * wo * v * sigma_eval(kernel, g, ct, c));
        }
    }
}

/// Plain `(q, ω)` double sum of `v σ · integrand(p', q', q)`.
fn double_integral<F>(kernel: &KernelParams, p: [f64; 3], c: f64, quad: &CollisionQuad, integrand: F) -> f64
where
    F: Fn([f64; 3], [f64; 3], [f64; 3]) -> f64,
{
    let mut acc = CompensatedSum::new();
    let mut row = 0.0;
    let mut current = 0;
    for_each_sample(kernel, p, c, quad, |pp, qq, q, iq, w| {
        if iq != current {
            acc.add(row);
            row = 0.0;
            current = iq;
        }
        row += w * integrand(pp, qq, q);
    });
    acc.add(row);
    acc.value()
}

/// `Q(F1, F2)(p) = ∫∫ v σ [F1(p')F2(q') - F1(p)F2(q)] dω dq`.
pub fn collision_q<F1, F2>(kernel: &KernelParams, c: f64, f1: F1, f2: F2, p: [f64; 3], quad: &CollisionQuad) -> f64
where
    F1: Fn([f64; 3]) -> f64,
    F2: Fn([f64; 3]) -> f64,
{
    let fp = f1(p);
    double_integral(kernel, p, c, quad, |pp, qq, q| f1(pp) * f2(qq) - fp * f2(q))
}

/// Gain and loss parts `(Q+, Q-)` separately.
pub fn collision_q_split<F1, F2>(
    kernel: &KernelParams,
    c: f64,
    f1: F1,
    f2: F2,
    p: [f64; 3],
    quad: &CollisionQuad,
) -> (f64, f64)
where
    F1: Fn([f64; 3]) -> f64,
    F2: Fn([f64; 3]) -> f64,
{
    let gain = double_integral(kernel, p, c, quad, |pp, qq, _| f1(pp) * f2(qq));
    let fp = f1(p);
    let loss = fp * double_integral(kernel, p, c, quad, |_, _, q| f2(q));
    (gain, loss)
}

/// Collision frequency `ν(p) = ∫∫ v σ J(q) dω dq`. The solid-angle
/// integral of `σ` is done in closed form.
pub fn collision_frequency(kernel: &KernelParams, far: &MaxwellianParams, p: [f64; 3], rule: &MomentumRule) -> f64 {
    let c = far.c;
    let p0 = energy(p, c);
    let mass = kernel.angular_mass();
    let jt = JuttnerEvaluator::new(far);
    compensated_sum(rule.points.iter().zip(&rule.weights).map(|(q, w)| {
        let q0 = energy(*q, c);
        let pq = p0 * q0 - dot3(p, *q);
        let s = 2.0 * (pq + c * c);
        let g = 0.5 * (2.0 * (pq - c * c)).max(0.0).sqrt();
        let v = 0.5 * c * g * s.sqrt() / (p0 * q0);
        w * v * sigma_angular_integral(kernel, mass, g, c) * jt.value(*q)
    }))
}

/// A rule for [`collision_frequency`]. Centered on `p`, and so smooth across
/// the kink of the integrand at `q = p`, while `p` sits inside the thermal
/// core; centered on the bulk velocity otherwise, where the kink carries
/// little weight and a `p`-centered rule would miss the core.
pub fn frequency_rule(far: &MaxwellianParams, p: [f64; 3], panels: usize, angular: usize) -> MomentumRule {
    let sphere = SphereRule::new(angular, 2 * angular);
    let d = norm3([p[0] - far.u[0], p[1] - far.u[1], p[2] - far.u[2]]);
    let spread = (far.temperature * far.u0() / far.c).sqrt().max(far.temperature / far.c);
    if d <= 3.0 * spread {
        MomentumRule::graded(d + far.tail_radius(), far.thermal_width(), panels, 8, &sphere).translated(p)
    } else {
        MomentumRule::graded(far.tail_radius(), far.thermal_width(), panels, 8, &sphere).translated(far.u)
    }
}

/// `K f(p)` with `K f = ∫∫ v σ W0(q) [W0(q')f(p') + W0(p')f(q') - W0(p)f(q)]`.
pub fn apply_k<F>(kernel: &KernelParams, far: &MaxwellianParams, f: F, p: [f64; 3], quad: &CollisionQuad) -> f64
where
    F: Fn([f64; 3]) -> f64,
{
    let jt = JuttnerEvaluator::new(far);
    let w0p = jt.sqrt(p);
    double_integral(kernel, p, far.c, quad, |pp, qq, q| jt.sqrt(q) * (jt.sqrt(qq) * f(pp) + jt.sqrt(pp) * f(qq) - w0p * f(q)))
}

/// `L f(p) = -ν(p) f(p) + K f(p)` on a shared quadrature.
pub fn apply_l<F>(kernel: &KernelParams, far: &MaxwellianParams, f: F, p: [f64; 3], quad: &CollisionQuad) -> f64
where
    F: Fn([f64; 3]) -> f64,
{
    let nu = collision_frequency(kernel, far, p, &quad.q_rule);
    -nu * f(p) + apply_k(kernel, far, &f, p, quad)
}

/// `Γ(h1, h2)(p) = ∫∫ v σ W0(q) [h1(p')h2(q') - h1(p)h2(q)]`.
pub fn apply_gamma<F1, F2>(kernel: &KernelParams, far: &MaxwellianParams, h1: F1, h2: F2, p: [f64; 3], quad: &CollisionQuad) -> f64
where
    F1: Fn([f64; 3]) -> f64,
    F2: Fn([f64; 3]) -> f64,
{
    let h1p = h1(p);
    let jt = JuttnerEvaluator::new(far);
    double_integral(kernel, p, far.c, quad, |pp, qq, q| jt.sqrt(q) * (h1(pp) * h2(qq) - h1p * h2(q)))
}

/// The loss-part kernel `k1(p, q) = W0(p) W0(q) ∫ v σ dω` and the shape of
/// its pointwise bound with unit constant.
pub fn kernel_bound_check(kernel: &KernelParams, far: &MaxwellianParams, p: [f64; 3], q: [f64; 3]) -> Result<(f64, f64)> {
    let c = far.c;
    let diff = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    let dist = norm3(diff);
    if dist == 0.0 {
        return Err(Error::Domain("kernel bound is singular at p = q".into()));
    }
    let p0 = energy(p, c);
    let q0 = energy(q, c);
    let pq = p0 * q0 - dot3(p, q);
    let s = 2.0 * (pq + c * c);
    let g = 0.5 * (2.0 * (pq - c * c)).max(0.0).sqrt();
    let v = 0.5 * c * g * s.sqrt() / (p0 * q0);
    let k1 = juttner_sqrt(far, p) * juttner_sqrt(far, q) * v * sigma_angular_integral(kernel, kernel.angular_mass(), g, c);

    let cross = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
    let expo = 1.0 - kernel.eta();
    let decay_rate = (far.u0() - norm3(far.u)) / (4.0 * far.temperature);
    let bound = (c + norm3(q)).powf(expo) * (-decay_rate * dist).exp()
        / ((dot3(cross, cross) + c * c * dist * dist).sqrt() * dist.powf(kernel.b + kernel.varsigma.abs()));
    Ok((k1, bound))
}
