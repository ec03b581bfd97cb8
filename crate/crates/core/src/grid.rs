//! Tensor momentum grid with sinh-stretched Gauss–Legendre axes, and
//! trilinear interpolation of nodal data.

use crate::error::{Error, Result};
use crate::lorentz::energy;
use crate::quadrature::gauss_legendre;
use serde::{Deserialize, Serialize};

/// Shape parameters of a [`MomentumGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumGridSpec {
    /// Nodes per axis; must be even so that no node sits on `p_i = 0`.
    pub per_axis: usize,
    pub p_max: f64,
    /// Stretching parameter `b` of `p = p_max sinh(b t) / sinh(b)`; zero
    /// gives plain Gauss–Legendre.
    pub stretch: f64,
}

impl Default for MomentumGridSpec {
    fn default() -> Self {
        Self { per_axis: 12, p_max: 12.0, stretch: 3.0 }
    }
}

impl MomentumGridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.per_axis < 2 || self.per_axis % 2 != 0 {
            return Err(Error::config("grid.per_axis", "must be an even number >= 2"));
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return Err(Error::config("grid.p_max", "must be positive"));
        }
        if !(self.stretch >= 0.0 && self.stretch.is_finite()) {
            return Err(Error::config("grid.stretch", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MomentumGrid {
    pub spec: MomentumGridSpec,
    pub axis: Vec<f64>,
    pub axis_weights: Vec<f64>,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(spec: MomentumGridSpec) -> Result<Self> {
        spec.validate()?;
        let (t, w) = gauss_legendre(spec.per_axis);
        let b = spec.stretch;
        let (axis, axis_weights): (Vec<f64>, Vec<f64>) = if b == 0.0 {
            (t.iter().map(|x| spec.p_max * x).collect(), w.iter().map(|v| spec.p_max * v).collect())
        } else {
            let sb = b.sinh();
            t.iter()
                .zip(&w)
                .map(|(x, v)| (spec.p_max * (b * x).sinh() / sb, spec.p_max * b * (b * x).cosh() / sb * v))
                .unzip()
        };
        let n = spec.per_axis;
        let mut points = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    points.push([axis[i], axis[j], axis[k]]);
                    weights.push(axis_weights[i] * axis_weights[j] * axis_weights[k]);
                }
            }
        }
        Ok(Self { spec, axis, axis_weights, points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.spec.per_axis;
        (i * n + j) * n + k
    }

    /// `c p1 / p0` at every node.
    pub fn p_hat1(&self, c: f64) -> Vec<f64> {
        self.points.iter().map(|p| c * p[0] / energy(*p, c)).collect()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        crate::quadrature::compensated_sum(values.iter().zip(&self.weights).map(|(v, w)| v * w))
    }

    /// Trilinear stencil `(node, weight)` at `p`, or `None` outside the
    /// hull of the nodes.
    pub fn stencil(&self, p: [f64; 3]) -> Option<[(usize, f64); 8]> {
        let mut lo = [0usize; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let (i, t) = locate(&self.axis, p[d])?;
            lo[d] = i;
            frac[d] = t;
        }
        let mut out = [(0usize, 0.0); 8];
        let mut m = 0;
        for di in 0..2 {
            let wi = if di == 0 { 1.0 - frac[0] } else { frac[0] };
            for dj in 0..2 {
                let wj = if dj == 0 { 1.0 - frac[1] } else { frac[1] };
                for dk in 0..2 {
                    let wk = if dk == 0 { 1.0 - frac[2] } else { frac[2] };
                    out[m] = (self.index(lo[0] + di, lo[1] + dj, lo[2] + dk), wi * wj * wk);
                    m += 1;
                }
            }
        }
        Some(out)
    }

    /// Trilinear interpolation of nodal values; zero outside the node hull.
    pub fn interpolate(&self, values: &[f64], p: [f64; 3]) -> f64 {
        match self.stencil(p) {
            Some(st) => st.iter().map(|&(i, w)| w * values[i]).sum(),
            None => 0.0,
        }
    }
}

// Cell index and fractional position of `x` on a sorted axis.
fn locate(axis: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = axis.len();
    if !(x >= axis[0] && x <= axis[n - 1]) {
        return None;
    }
    let i = axis.partition_point(|&a| a <= x).clamp(1, n - 1) - 1;
    let t = (x - axis[i]) / (axis[i + 1] - axis[i]);
    Some((i, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_node_count_rejected() {
        assert!(MomentumGrid::new(MomentumGridSpec { per_axis: 7, ..Default::default() }).is_err());
    }

    #[test]
    fn no_node_on_transverse_plane() {
        let g = MomentumGrid::new(MomentumGridSpec::default()).unwrap();
        assert!(g.points.iter().all(|p| p[0] != 0.0));
        assert!(g.p_hat1(1.0).iter().all(|v| v.abs() > 1e-3));
    }

    #[test]
    fn stretched_rule_integrates_gaussian() {
        let g = MomentumGrid::new(MomentumGridSpec { per_axis: 20, p_max: 6.0, stretch: 1.5 }).unwrap();
        let vals: Vec<f64> = g.points.iter().map(|p| (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])).exp()).collect();
        let want = std::f64::consts::PI.powf(1.5);
        assert!((g.integrate(&vals) - want).abs() < 1e-6 * want);
    }

    #[test]
    fn interpolation_reproduces_trilinear_functions() {
        let g = MomentumGrid::new(MomentumGridSpec { per_axis: 8, p_max: 4.0, stretch: 1.0 }).unwrap();
        let f = |p: [f64; 3]| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2] + 0.25 * p[0] * p[1] * p[2];
        let vals: Vec<f64> = g.points.iter().map(|p| f(*p)).collect();
        for p in [[0.1, -0.7, 1.3], [2.0, 2.0, -2.0], g.points[5]] {
            assert!((g.interpolate(&vals, p) - f(p)).abs() < 1e-12);
        }
        assert_eq!(g.interpolate(&vals, [4.5, 0.0, 0.0]), 0.0);
        let st = g.stencil([0.3, 0.2, 0.1]).unwrap();
        assert!((st.iter().map(|s| s.1).sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
