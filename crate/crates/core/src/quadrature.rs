//! Quadrature building blocks: Gauss–Legendre rules, an adaptive
//! Gauss–Kronrod integrator, tensor rules over momentum space and the unit
//! sphere, and compensated summation.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Neumaier's improved Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    (x.iter().map(|t| m + h * t).collect(), w.iter().map(|v| v * h).collect())
}

// Kronrod 15 / Gauss 7 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Stops once the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    const MAX_INTERVALS: usize = 20_000;
    let (i0, e0) = gk15(&f, a, b);
    let mut segs = vec![(a, b, i0, e0)];
    loop {
        let total = compensated_sum(segs.iter().map(|s| s.2));
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if segs.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "adaptive rule on [{a}, {b}] stuck at error {err:.3e} after {MAX_INTERVALS} intervals"
            )));
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (lo, hi, _, _) = segs.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (il, el) = gk15(&f, lo, mid);
        let (ir, er) = gk15(&f, mid, hi);
        segs.push((lo, mid, il, el));
        segs.push((mid, hi, ir, er));
    }
}

/// Quadrature rule on the unit sphere: Gauss–Legendre in `cos θ` and
/// uniform (trapezoidal) in `φ`. The polar axis is the first coordinate.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n_polar: usize, n_azimuth: usize) -> Self {
        let (mu, wmu) = gauss_legendre(n_polar);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut directions = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (m, wm) in mu.iter().zip(&wmu) {
            let s = (1.0 - m * m).max(0.0).sqrt();
            for k in 0..n_azimuth {
                // half-step offset keeps directions off the coordinate planes
                let phi = (k as f64 + 0.5) * dphi;
                directions.push([*m, s * phi.cos(), s * phi.sin()]);
                weights.push(wm * dphi);
            }
        }
        Self { directions, weights }
    }

    /// Rule whose polar axis is `n_polar` Gauss points and azimuth `2 * n_polar`.
    pub fn of_order(order: usize) -> Self {
        Self::new(order, 2 * order)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate<F: Fn([f64; 3]) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.directions.iter().zip(&self.weights).map(|(d, w)| w * f(*d)))
    }
}

/// Tensor rule for integrals over momentum space in spherical coordinates:
/// composite Gauss–Legendre in `|p|` on `[0, p_max]` times a [`SphereRule`].
#[derive(Debug, Clone)]
pub struct MomentumRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub p_max: f64,
}

impl MomentumRule {
    pub fn new(p_max: f64, panels: usize, per_panel: usize, sphere: &SphereRule) -> Self {
        let mut radii = Vec::with_capacity(panels * per_panel);
        let mut rw = Vec::with_capacity(panels * per_panel);
        let h = p_max / panels as f64;
        for k in 0..panels {
            let (x, w) = gauss_legendre_on(per_panel, k as f64 * h, (k + 1) as f64 * h);
            radii.extend(x);
            rw.extend(w);
        }
        let mut points = Vec::with_capacity(radii.len() * sphere.len());
        let mut weights = Vec::with_capacity(radii.len() * sphere.len());
        for (r, w) in radii.iter().zip(&rw) {
            for (d, wd) in sphere.directions.iter().zip(&sphere.weights) {
                points.push([r * d[0], r * d[1], r * d[2]]);
                weights.push(w * r * r * wd);
            }
        }
        Self { points, weights, p_max }
    }

    /// Like [`MomentumRule::new`] but with radial panels growing
    /// geometrically from width `first`, so that a rule reaching far into a
    /// tail still resolves the core. Falls back to uniform panels when
    /// `panels · first >= p_max`.
    pub fn graded(p_max: f64, first: f64, panels: usize, per_panel: usize, sphere: &SphereRule) -> Self {
        if panels as f64 * first >= p_max || panels < 2 {
            return Self::new(p_max, panels, per_panel, sphere);
        }
        // ratio r > 1 with first (r^n - 1)/(r - 1) = p_max
        let total = |r: f64| first * (r.powi(panels as i32) - 1.0) / (r - 1.0);
        let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
        while total(hi) < p_max {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) < p_max {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        let mut edges = vec![0.0];
        let mut width = first;
        for k in 0..panels {
            let next = if k + 1 == panels { p_max } else { edges[k] + width };
            edges.push(next);
            width *= r;
        }
        Self::from_edges(&edges, per_panel, sphere)
    }

    fn from_edges(edges: &[f64], per_panel: usize, sphere: &SphereRule) -> Self {
        let mut points = Vec::with_capacity((edges.len() - 1) * per_panel * sphere.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for e in edges.windows(2) {
            let (x, w) = gauss_legendre_on(per_panel, e[0], e[1]);
            for (r, w) in x.iter().zip(&w) {
                for (d, wd) in sphere.directions.iter().zip(&sphere.weights) {
                    points.push([r * d[0], r * d[1], r * d[2]]);
                    weights.push(w * r * r * wd);
                }
            }
        }
        Self { points, weights, p_max: *edges.last().unwrap_or(&0.0) }
    }

    /// The same rule with every node shifted by `offset`.
    pub fn translated(mut self, offset: [f64; 3]) -> Self {
        for p in &mut self.points {
            for d in 0..3 {
                p[d] += offset[d];
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate<F: Fn([f64; 3]) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_rule_integrates_a_gaussian() {
        let sphere = SphereRule::new(4, 4);
        let rule = MomentumRule::graded(60.0, 0.5, 10, 12, &sphere);
        let got = rule.integrate(|p| (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])).exp());
        let want = std::f64::consts::PI.powf(1.5);
        assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
        assert_eq!(rule.p_max, 60.0);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "degree {deg}: {got} vs {want}");
        }
    }

    #[test]
    fn large_rules_have_positive_weights_summing_to_two() {
        for n in [1, 2, 16, 64, 200] {
            let (x, w) = gauss_legendre(n);
            assert!(w.iter().all(|&v| v > 0.0));
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let got = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 0.0).unwrap();
        let want = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((got - want).abs() / want < 1e-11);
    }

    #[test]
    fn sphere_rule_integrates_low_harmonics() {
        let rule = SphereRule::of_order(6);
        assert!((rule.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-13);
        assert!((rule.integrate(|d| d[1] * d[1]) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!(rule.integrate(|d| d[0] * d[2]).abs() < 1e-14);
    }

    #[test]
    fn momentum_rule_gaussian_volume() {
        let rule = MomentumRule::new(10.0, 8, 12, &SphereRule::of_order(4));
        let got = rule.integrate(|p| (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])).exp());
        assert!((got - PI.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
