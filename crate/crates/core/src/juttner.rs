//! The Jüttner (relativistic Maxwellian) equilibrium, its closed-form
//! moments, and the momentum weights used by the half-space norms.

use crate::error::{Error, Result};
use crate::lorentz::{dot3, energy, norm3, rest_boost, FourVector};
use crate::quadrature::{MomentumRule, SphereRule};
use crate::special::{bessel_k_ratio, bessel_k_scaled};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters `(ρ, u, T, c)` of `J_[ρ,u,T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianParams {
    pub rho: f64,
    pub u: [f64; 3],
    pub temperature: f64,
    pub c: f64,
}

impl MaxwellianParams {
    pub fn new(rho: f64, u: [f64; 3], temperature: f64, c: f64) -> Result<Self> {
        let p = Self { rho, u, temperature, c };
        p.validate()?;
        Ok(p)
    }

    /// Unit-density far field moving along the first axis.
    pub fn far_field(u1: f64, temperature: f64, c: f64) -> Result<Self> {
        Self::new(1.0, [u1, 0.0, 0.0], temperature, c)
    }

    /// Unit-density equilibrium at rest.
    pub fn at_rest(temperature: f64, c: f64) -> Result<Self> {
        Self::new(1.0, [0.0; 3], temperature, c)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("rho", self.rho)?;
        positive("temperature", self.temperature)?;
        positive("c", self.c)?;
        if self.u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("bulk velocity must be finite".into()));
        }
        Ok(())
    }

    /// `z = c^2 / T`.
    pub fn z(&self) -> f64 {
        self.c * self.c / self.temperature
    }

    /// `u0 = sqrt(c^2 + |u|^2)`.
    pub fn u0(&self) -> f64 {
        energy(self.u, self.c)
    }

    pub fn four_velocity(&self) -> FourVector {
        FourVector::on_shell(self.u, self.c)
    }

    /// Radius beyond which `J` and polynomial moments up to degree four are
    /// negligible (below roughly `e^{-60}` of the peak).
    pub fn tail_radius(&self) -> f64 {
        let c2 = self.c * self.c;
        let gap = self.u0() - norm3(self.u);
        let thermal = (self.temperature * self.u0() / self.c).sqrt().max(self.temperature / self.c);
        (60.0 + self.z()) * c2 / (self.z() * gap) + norm3(self.u) + 10.0 * thermal
    }

    /// Momentum scale over which the distribution varies near its peak.
    pub fn thermal_width(&self) -> f64 {
        (self.temperature * self.u0() / self.c).sqrt().min(self.temperature / self.c).max(1e-300)
    }

    /// A tensor rule sized for integrals against this equilibrium.
    pub fn quadrature_rule(&self, angular_order: usize) -> MomentumRule {
        let p_max = self.tail_radius();
        let width = self.thermal_width();
        let panels = ((2.0 * p_max / width).ceil() as usize).clamp(16, 400);
        MomentumRule::new(p_max, panels, 12, &SphereRule::new(angular_order, angular_order))
    }

    /// The rest-frame rule carried to the lab frame by the boost to `u`.
    /// Integrands of a fast-moving equilibrium are elongated along `u`,
    /// which a sphere rule around `u` resolves poorly; after the boost
    /// they are isotropic again. Weights pick up `p0 / p0'` from the
    /// invariance of `d³p / p0`.
    pub fn boosted_rule(&self, angular_order: usize) -> Result<MomentumRule> {
        let rest = Self { u: [0.0; 3], ..*self };
        let mut rule = rest.quadrature_rule(angular_order);
        let boost = rest_boost(&FourVector::new(self.u0(), self.u))?.inverse();
        let mut reach: f64 = 0.0;
        for (p, w) in rule.points.iter_mut().zip(&mut rule.weights) {
            let rest_energy = energy(*p, self.c);
            let lab = boost.apply(&FourVector::new(rest_energy, *p));
            *w *= lab.t_component / rest_energy;
            *p = lab.spatial;
            reach = reach.max(norm3(*p));
        }
        rule.p_max = reach;
        Ok(rule)
    }
}

/// `J` with its normalization evaluated once, for hot loops.
#[derive(Debug, Clone, Copy)]
pub struct JuttnerEvaluator {
    norm: f64,
    z: f64,
    u0: f64,
    u: [f64; 3],
    c: f64,
}

impl JuttnerEvaluator {
    pub fn new(params: &MaxwellianParams) -> Self {
        let (c, z) = (params.c, params.z());
        // K_2 in scaled form; the matching e^{-z} is folded into the exponent
        let k2s = bessel_k_scaled(2, z).expect("z validated on construction");
        Self { norm: params.rho * z / (4.0 * PI * c.powi(3) * k2s), z, u0: params.u0(), u: params.u, c }
    }

    #[inline]
    fn exponent(&self, p: [f64; 3]) -> f64 {
        let pu = energy(p, self.c) * self.u0 - dot3(p, self.u);
        -self.z * (pu / (self.c * self.c) - 1.0)
    }

    #[inline]
    pub fn value(&self, p: [f64; 3]) -> f64 {
        self.norm * self.exponent(p).exp()
    }

    /// `J^{1/2}`, computed directly to avoid underflow at large momenta.
    #[inline]
    pub fn sqrt(&self, p: [f64; 3]) -> f64 {
        self.norm.sqrt() * (0.5 * self.exponent(p)).exp()
    }
}

/// `J_[ρ,u,T](p)`.
pub fn juttner_eval(params: &MaxwellianParams, p: [f64; 3]) -> f64 {
    JuttnerEvaluator::new(params).value(p)
}

/// `J^{1/2}`.
pub fn juttner_sqrt(params: &MaxwellianParams, p: [f64; 3]) -> f64 {
    JuttnerEvaluator::new(params).sqrt(p)
}

/// The thirteen closed-form moments of a unit-density Jüttner distribution.
///
/// Index `0` in the variants that admit it refers to the energy `p0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Moment {
    /// `∫ J / p0`
    M1,
    /// `∫ p_i / p0 J`, `i = 0..=3`
    M2(usize),
    /// `∫ p0 J`
    M3,
    /// `∫ p_i^2 / p0 J`
    M4(usize),
    /// `∫ p_i J`
    M5(usize),
    /// `∫ p_i p_j / p0 J`, `0 <= i != j <= 3`
    M6(usize, usize),
    /// `∫ p0^2 J`
    M7,
    /// `∫ p_i^3 / p0 J`
    M8(usize),
    /// `∫ p0 p_i J`
    M9(usize),
    /// `∫ p_i^2 J`
    M10(usize),
    /// `∫ p_i^2 p_j / p0 J`, `i != j`
    M11(usize, usize),
    /// `∫ p_i p_j J`, `i != j`
    M12(usize, usize),
    /// `∫ p1 p2 p3 / p0 J`
    M13,
}

impl Moment {
    /// One representative of each kind, using the first axis where an index
    /// is needed.
    pub fn representatives() -> [Moment; 13] {
        use Moment::*;
        [M1, M2(1), M3, M4(1), M5(1), M6(1, 2), M7, M8(1), M9(1), M10(1), M11(1, 2), M12(1, 2), M13]
    }

    /// Every index combination of every kind.
    pub fn all() -> Vec<Moment> {
        use Moment::*;
        let mut out = vec![M1, M3, M7, M13];
        for i in 0..4 {
            out.push(M2(i));
            for j in 0..4 {
                if i != j {
                    out.push(M6(i, j));
                }
            }
        }
        for i in 1..4 {
            out.extend([M4(i), M5(i), M8(i), M9(i), M10(i)]);
            for j in 1..4 {
                if i != j {
                    out.extend([M11(i, j), M12(i, j)]);
                }
            }
        }
        out
    }

    pub fn label(&self) -> String {
        match self {
            Moment::M1 => "M1".into(),
            Moment::M2(i) => format!("M2[{i}]"),
            Moment::M3 => "M3".into(),
            Moment::M4(i) => format!("M4[{i}]"),
            Moment::M5(i) => format!("M5[{i}]"),
            Moment::M6(i, j) => format!("M6[{i},{j}]"),
            Moment::M7 => "M7".into(),
            Moment::M8(i) => format!("M8[{i}]"),
            Moment::M9(i) => format!("M9[{i}]"),
            Moment::M10(i) => format!("M10[{i}]"),
            Moment::M11(i, j) => format!("M11[{i},{j}]"),
            Moment::M12(i, j) => format!("M12[{i},{j}]"),
            Moment::M13 => "M13".into(),
        }
    }

    fn check_indices(&self) -> Result<()> {
        let spatial = |i: usize| (1..=3).contains(&i);
        let ok = match *self {
            Moment::M1 | Moment::M3 | Moment::M7 | Moment::M13 => true,
            Moment::M2(i) => i <= 3,
            Moment::M6(i, j) => i <= 3 && j <= 3 && i != j,
            Moment::M4(i) | Moment::M5(i) | Moment::M8(i) | Moment::M9(i) | Moment::M10(i) => spatial(i),
            Moment::M11(i, j) | Moment::M12(i, j) => spatial(i) && spatial(j) && i != j,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid indices for moment {}", self.label())))
        }
    }

    /// The factor multiplying `J(p)` under the integral.
    pub fn integrand_factor(&self, p: [f64; 3], c: f64) -> f64 {
        let p0 = energy(p, c);
        let comp = |i: usize| if i == 0 { p0 } else { p[i - 1] };
        match *self {
            Moment::M1 => 1.0 / p0,
            Moment::M2(i) => comp(i) / p0,
            Moment::M3 => p0,
            Moment::M4(i) => comp(i).powi(2) / p0,
            Moment::M5(i) => comp(i),
            Moment::M6(i, j) => comp(i) * comp(j) / p0,
            Moment::M7 => p0 * p0,
            Moment::M8(i) => comp(i).powi(3) / p0,
            Moment::M9(i) => p0 * comp(i),
            Moment::M10(i) => comp(i).powi(2),
            Moment::M11(i, j) => comp(i).powi(2) * comp(j) / p0,
            Moment::M12(i, j) => comp(i) * comp(j),
            Moment::M13 => p[0] * p[1] * p[2] / p0,
        }
    }
}

/// Closed-form value of a moment, scaled linearly by `ρ`.
pub fn moment(kind: Moment, params: &MaxwellianParams) -> Result<f64> {
    kind.check_indices()?;
    let c = params.c;
    let c2 = c * c;
    let z = params.z();
    let t = params.temperature;
    let u0 = params.u0();
    let u2 = dot3(params.u, params.u);
    let comp = |i: usize| if i == 0 { u0 } else { params.u[i - 1] };
    let k32 = bessel_k_ratio(2, z)?;
    let k12 = 1.0 / bessel_k_ratio(1, z)?;
    let v = match kind {
        Moment::M1 => k12 / c,
        Moment::M2(i) => comp(i) / c,
        Moment::M3 => u0 * u0 / c * k32 - c / z,
        Moment::M4(i) => comp(i).powi(2) / c * k32 + c / z,
        Moment::M5(i) => u0 * comp(i) / c * k32,
        Moment::M6(i, j) => comp(i) * comp(j) / c * k32,
        Moment::M7 => u0 / c * (u0 * u0 + (3.0 * u0 * u0 + 3.0 * u2) / z * k32),
        Moment::M8(i) => {
            let ui = comp(i);
            ui / c * (ui * ui + (6.0 * ui * ui + 3.0 * c2) / z * k32)
        }
        Moment::M9(i) => comp(i) / c * (u0 * u0 + (6.0 * u0 * u0 - c2) / z * k32),
        Moment::M10(i) => {
            let ui = comp(i);
            u0 / c * (ui * ui + (6.0 * ui * ui + c2) / z * k32)
        }
        Moment::M11(i, j) => {
            let ui = comp(i);
            comp(j) / c * (ui * ui + (6.0 * ui * ui + c2) / z * k32)
        }
        Moment::M12(i, j) => u0 * comp(i) * comp(j) / c.powi(3) * (c2 + 6.0 * t * k32),
        Moment::M13 => params.u[0] * params.u[1] * params.u[2] / c.powi(3) * (c2 + 6.0 * t * k32),
    };
    Ok(params.rho * v)
}

/// Moment value and the matching absolute-moment scale from a tensor rule.
///
/// The scale `∫ |factor| J` is the natural yardstick for moments whose
/// closed form vanishes by symmetry.
pub fn moment_by_quadrature(kind: Moment, params: &MaxwellianParams, rule: &MomentumRule) -> Result<(f64, f64)> {
    kind.check_indices()?;
    let value = rule.integrate(|p| kind.integrand_factor(p, params.c) * juttner_eval(params, p));
    let scale = rule.integrate(|p| kind.integrand_factor(p, params.c).abs() * juttner_eval(params, p));
    Ok((value, scale))
}

/// Momentum weights of the weighted norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    /// `W_β(p) = p0^{-β} J_far^{1/2}(p)`.
    Energy { beta: f64, far: MaxwellianParams },
    /// `|p1|^{-ϱ} p0^α` for `|p1| < 1`, `p0^α` otherwise.
    Transverse { varrho: f64, alpha: f64, c: f64 },
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Energy { far, beta } => {
                far.validate()?;
                if !beta.is_finite() {
                    return Err(Error::Domain("beta must be finite".into()));
                }
            }
            WeightSpec::Transverse { varrho, alpha, c } => {
                if !(varrho > 0.0 && varrho < 1.0) {
                    return Err(Error::Domain(format!("varrho must lie in (0, 1), got {varrho}")));
                }
                if !alpha.is_finite() || !(c > 0.0) {
                    return Err(Error::Domain("alpha must be finite and c positive".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn weight_eval(spec: &WeightSpec, p: [f64; 3]) -> f64 {
    match *spec {
        WeightSpec::Energy { beta, far } => energy(p, far.c).powf(-beta) * juttner_sqrt(&far, p),
        WeightSpec::Transverse { varrho, alpha, c } => {
            let base = energy(p, c).powf(alpha);
            if p[0].abs() < 1.0 {
                p[0].abs().powf(-varrho) * base
            } else {
                base
            }
        }
    }
}
