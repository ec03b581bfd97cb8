//! Four-vectors, the Minkowski product and pure boosts.

use crate::error::{Error, Result};
use crate::quadrature::{MomentumRule, SphereRule};
use nalgebra::{Matrix4, Vector4};
use std::ops::{Add, Mul, Sub};

/// Below this fraction of `c` a velocity is treated as zero.
const REST_THRESHOLD: f64 = 1e-14;

/// A four-vector `(t, x, y, z)` with metric signature `(+, -, -, -)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourVector {
    pub t_component: f64,
    pub spatial: [f64; 3],
}

impl FourVector {
    pub const fn new(t_component: f64, spatial: [f64; 3]) -> Self {
        Self { t_component, spatial }
    }

    /// Mass-shell vector `(sqrt(c^2 + |p|^2), p)`.
    pub fn on_shell(p: [f64; 3], c: f64) -> Self {
        Self::new(energy(p, c), p)
    }

    pub fn rest(c: f64) -> Self {
        Self::new(c, [0.0; 3])
    }

    pub fn spatial_norm(&self) -> f64 {
        norm3(self.spatial)
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.t_component, self.spatial[0], self.spatial[1], self.spatial[2])
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], [v[1], v[2], v[3]])
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.t_component, self.spatial.map(|x| k * x))
    }
}

impl Add for FourVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.t_component + o.t_component,
            [self.spatial[0] + o.spatial[0], self.spatial[1] + o.spatial[1], self.spatial[2] + o.spatial[2]],
        )
    }
}

impl Sub for FourVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.t_component - o.t_component,
            [self.spatial[0] - o.spatial[0], self.spatial[1] - o.spatial[1], self.spatial[2] - o.spatial[2]],
        )
    }
}

/// `sqrt(c^2 + |p|^2)`.
#[inline]
pub fn energy(p: [f64; 3], c: f64) -> f64 {
    (c * c + dot3(p, p)).sqrt()
}

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Minkowski product `P.Q = p0 q0 - p.q`.
#[inline]
pub fn lorentz_dot(p: &FourVector, q: &FourVector) -> f64 {
    p.t_component * q.t_component - dot3(p.spatial, q.spatial)
}

/// A 4x4 Lorentz transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostMatrix {
    pub entries: Matrix4<f64>,
}

impl BoostMatrix {
    pub fn identity() -> Self {
        Self { entries: Matrix4::identity() }
    }

    pub fn from_matrix(entries: Matrix4<f64>) -> Self {
        Self { entries }
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        FourVector::from_vector(&(self.entries * v.to_vector()))
    }

    /// The inverse `D Λ^T D`, exact for Lorentz transformations.
    pub fn inverse(&self) -> Self {
        let d = minkowski_metric();
        Self { entries: d * self.entries.transpose() * d }
    }

    pub fn transpose(&self) -> Self {
        Self { entries: self.entries.transpose() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { entries: self.entries * other.entries }
    }

    /// Largest entrywise deviation of `Λ^T D Λ` from `D`.
    pub fn metric_defect(&self) -> f64 {
        let d = minkowski_metric();
        (self.entries.transpose() * d * self.entries - d).amax()
    }

    /// Time-time entry; bounds the energy distortion of the boost.
    pub fn lambda00(&self) -> f64 {
        self.entries[(0, 0)]
    }
}

impl Mul for BoostMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

pub fn minkowski_metric() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0))
}

/// The symmetric pure boost taking a timelike `U` to `(sqrt(U.U), 0, 0, 0)`.
pub fn rest_boost(u: &FourVector) -> Result<BoostMatrix> {
    let norm2 = lorentz_dot(u, u);
    if !(norm2 > 0.0) || u.t_component <= 0.0 {
        return Err(Error::Domain(format!(
            "rest_boost needs a future timelike vector, got U.U = {norm2}"
        )));
    }
    let m = norm2.sqrt();
    let speed = u.spatial_norm();
    if speed < REST_THRESHOLD * m {
        return Ok(BoostMatrix::identity());
    }
    let gamma = u.t_component / m;
    let n = u.spatial.map(|x| x / speed);
    let mut e = Matrix4::identity();
    e[(0, 0)] = gamma;
    for i in 0..3 {
        e[(0, i + 1)] = -u.spatial[i] / m;
        e[(i + 1, 0)] = -u.spatial[i] / m;
        for j in 0..3 {
            e[(i + 1, j + 1)] += (gamma - 1.0) * n[i] * n[j];
        }
    }
    Ok(BoostMatrix { entries: e })
}

/// Center-of-momentum data for a pair of mass-shell momenta.
#[derive(Debug, Clone, Copy)]
pub struct ComFrame {
    /// Squared total energy `s = 2(P.Q + c^2)`.
    pub s: f64,
    /// Relative momentum `g = sqrt(2(P.Q - c^2)) / 2`.
    pub g: f64,
    /// Boost to the frame where `P + Q` is at rest.
    pub boost: BoostMatrix,
    /// Spatial part of `Λ(P - Q)`; its length is `2g`.
    pub p_bar: [f64; 3],
}

pub fn com_reduce(p: &FourVector, q: &FourVector, c: f64) -> Result<ComFrame> {
    let pq = lorentz_dot(p, q);
    let s = 2.0 * (pq + c * c);
    let g = 0.5 * (2.0 * (pq - c * c)).max(0.0).sqrt();
    let boost = rest_boost(&(*p + *q))?;
    let p_bar = boost.apply(&(*p - *q)).spatial;
    Ok(ComFrame { s, g, boost, p_bar })
}

/// Resolution of the momentum-space rule used by [`invariant_measure_check`].
#[derive(Debug, Clone, Copy)]
pub struct MeasureQuad {
    pub p_max: f64,
    pub panels: usize,
    pub per_panel: usize,
    pub angular_order: usize,
    /// Relative agreement required between the rule and its refinement.
    pub tol: f64,
}

impl Default for MeasureQuad {
    fn default() -> Self {
        Self { p_max: 60.0, panels: 24, per_panel: 12, angular_order: 16, tol: 1e-8 }
    }
}

/// `∫ φ(p) dp/p0` and `∫ φ(Λp) dp/p0`, each certified against a refined rule.
///
/// Fails when `φ` is not negligible on the truncation sphere or when either
/// integral moves by more than `quad.tol` under refinement.
pub fn invariant_measure_check<F>(
    phi: F,
    boost: &BoostMatrix,
    c: f64,
    quad: &MeasureQuad,
) -> Result<(f64, f64)>
where
    F: Fn([f64; 3]) -> f64,
{
    let boosted = |p: [f64; 3]| phi(boost.apply(&FourVector::on_shell(p, c)).spatial);
    let edge = SphereRule::of_order(quad.angular_order);
    let peak = phi([0.0; 3]).abs().max(boosted([0.0; 3]).abs()).max(f64::MIN_POSITIVE);
    for d in &edge.directions {
        let p = d.map(|x| x * quad.p_max);
        if phi(p).abs().max(boosted(p).abs()) > 1e-12 * peak {
            return Err(Error::Domain(format!(
                "integrand not decaying: non-negligible on |p| = {}",
                quad.p_max
            )));
        }
    }
    let run = |panels: usize, order: usize| {
        let rule = MomentumRule::new(quad.p_max, panels, quad.per_panel, &SphereRule::of_order(order));
        let lhs = rule.integrate(|p| phi(p) / energy(p, c));
        let rhs = rule.integrate(|p| boosted(p) / energy(p, c));
        (lhs, rhs)
    };
    let (l1, r1) = run(quad.panels, quad.angular_order);
    let (l2, r2) = run(2 * quad.panels, 2 * quad.angular_order);
    for (a, b) in [(l1, l2), (r1, r2)] {
        if (a - b).abs() > quad.tol * b.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Quadrature(format!(
                "invariant measure integral unresolved: {a} vs refined {b}"
            )));
        }
    }
    Ok((l2, r2))
}
