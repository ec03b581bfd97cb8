//! Exponential sweep along `x` for `p̂1 ∂x h + (ν - τ p̂1) h = S`.
//!
//! The source is split in two parts with different in-cell shapes: the
//! operator part `K̄h`, taken as `e^{-κx}` times a linear function so that the
//! slow damped mode `e^{-κx}` is carried exactly, and the external part `ζ`,
//! taken as piecewise linear.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct NodeCoeffs {
    /// Tail closures `h(x_N) = tail · S(x_N)`.
    tail: f64,
    fit_tail: f64,
    outgoing: bool,
}

#[derive(Debug, Clone, Copy)]
struct CellCoeffs {
    /// `e^{-μ d}`.
    decay: f64,
    /// Linear source weights at the updated node and at the node the update
    /// starts from.
    near: f64,
    far: f64,
    /// Same for the exponentially fitted source.
    fit_near: f64,
    fit_far: f64,
}

/// Per-node, per-cell sweep coefficients on an arbitrary increasing `x` grid.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    /// Number of cells; lines have `nx + 1` values.
    pub nx: usize,
    pub kappa: f64,
    nodes: Vec<NodeCoeffs>,
    /// `cells[j * nx + i]` covers `[x_i, x_{i+1}]` for node `j`.
    cells: Vec<CellCoeffs>,
}

/// `∫_0^d e^{-μ(d-s)} (s/d) ds` and `∫_0^d e^{-μ(d-s)} (1 - s/d) ds`.
fn cell_weights(mu: f64, d: f64) -> (f64, f64) {
    let t = mu * d;
    if t.abs() < 1e-3 {
        let near = d * (0.5 - t / 6.0 + t * t / 24.0 - t * t * t / 120.0);
        let far = d * (0.5 - t / 3.0 + t * t / 8.0 - t * t * t / 30.0);
        (near, far)
    } else {
        let e = (-t).exp();
        ((t - 1.0 + e) / (mu * mu * d), (1.0 - e - t * e) / (mu * mu * d))
    }
}

impl SweepPlan {
    /// Plan with fitted rate `κ = 0`, i.e. piecewise-linear sources only.
    pub fn new(nu: &[f64], p_hat1: &[f64], tau: f64, x_nodes: &[f64]) -> Result<Self> {
        Self::fitted(nu, p_hat1, tau, x_nodes, 0.0)
    }

    pub fn fitted(nu: &[f64], p_hat1: &[f64], tau: f64, x_nodes: &[f64], kappa: f64) -> Result<Self> {
        let widths: Vec<f64> = x_nodes.windows(2).map(|w| w[1] - w[0]).collect();
        if widths.is_empty() || !widths.iter().all(|d| *d > 0.0 && d.is_finite()) {
            return Err(Error::config("solver.nx", "x grid must be increasing with at least one cell"));
        }
        let nx = widths.len();
        let mut nodes = Vec::with_capacity(nu.len());
        let mut cells = Vec::with_capacity(nu.len() * nx);
        for (&v, &ph) in nu.iter().zip(p_hat1) {
            if ph == 0.0 {
                return Err(Error::Domain("momentum node on the plane p1 = 0".into()));
            }
            let a = ph.abs();
            if v - tau * a <= 0.0 {
                return Err(Error::config("solver.tau", format!("tau too large: nu - tau|p_hat1| = {:.3e} <= 0", v - tau * a)));
            }
            let outgoing = ph > 0.0;
            let mu = if outgoing { v / a - tau } else { v / a + tau };
            if outgoing && !(mu - kappa > 0.0) {
                log::warn!("fitted rate {kappa:.3e} exceeds the relaxation rate {mu:.3e} of an outgoing node");
            }
            for &d in &widths {
                let (near, far) = cell_weights(mu, d);
                // moving against the sweep direction the fitted source grows by e^{κ d}
                let (fit_near, fit_far) = if outgoing {
                    let (n, f) = cell_weights(mu - kappa, d);
                    (n, f * (-kappa * d).exp())
                } else {
                    let (n, f) = cell_weights(mu + kappa, d);
                    (n, f * (kappa * d).exp())
                };
                cells.push(CellCoeffs {
                    decay: (-mu * d).exp(),
                    near: near / a,
                    far: far / a,
                    fit_near: fit_near / a,
                    fit_far: fit_far / a,
                });
            }
            nodes.push(NodeCoeffs { tail: 1.0 / (v + tau * a), fit_tail: 1.0 / (v + tau * a + kappa * a), outgoing });
        }
        Ok(SweepPlan { nx, kappa, nodes, cells })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn outgoing(&self, j: usize) -> bool {
        self.nodes[j].outgoing
    }

    fn cell(&self, j: usize, i: usize) -> CellCoeffs {
        self.cells[j * self.nx + i]
    }

    /// Sweep node `j`. Either source may be absent. `start` is the
    /// boundary value for outgoing nodes and is ignored otherwise. Beyond
    /// the last node the linear source is held constant and the fitted one
    /// keeps decaying at `κ`.
    pub fn sweep_node(&self, j: usize, fit: Option<&[f64]>, lin: Option<&[f64]>, start: f64, out: &mut [f64]) {
        let node = self.nodes[j];
        let nx = self.nx;
        let f = |i: usize| fit.map_or(0.0, |s| s[i]);
        let l = |i: usize| lin.map_or(0.0, |s| s[i]);
        if node.outgoing {
            out[0] = start;
            for i in 0..nx {
                let c = self.cell(j, i);
                out[i + 1] = c.decay * out[i] + c.fit_far * f(i) + c.fit_near * f(i + 1) + c.far * l(i) + c.near * l(i + 1);
            }
        } else {
            out[nx] = node.fit_tail * f(nx) + node.tail * l(nx);
            for i in (0..nx).rev() {
                let c = self.cell(j, i);
                out[i] = c.decay * out[i + 1] + c.fit_near * f(i) + c.fit_far * f(i + 1) + c.near * l(i) + c.far * l(i + 1);
            }
        }
    }

    /// Defect of the fitted source at node `i`: the value of `fit[i]` implied
    /// by the sweep relation between `h[i]` and its upstream neighbour,
    /// minus the given one. Zero exactly when `h` is the sweep of the sources.
    /// `None` at the node where the sweep starts.
    pub fn source_defect(&self, j: usize, h: &[f64], fit: &[f64], lin: &[f64], i: usize) -> Option<f64> {
        let (up, cell) = if self.nodes[j].outgoing {
            let up = i.checked_sub(1)?;
            (up, up)
        } else {
            ((i < self.nx).then_some(i + 1)?, i)
        };
        let c = self.cell(j, cell);
        let implied = (h[i] - c.decay * h[up] - c.fit_far * fit[up] - c.far * lin[up] - c.near * lin[i]) / c.fit_near;
        Some(implied - fit[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;

    fn uniform(dx: f64, nx: usize) -> Vec<f64> {
        (0..=nx).map(|i| i as f64 * dx).collect()
    }

    #[test]
    fn weights_match_direct_integration() {
        for &(mu, d) in &[(1e-6, 0.3), (0.5, 0.2), (3.0, 1.0), (200.0, 0.5), (-0.7, 0.4)] {
            let (near, far) = cell_weights(mu, d);
            let a = integrate_adaptive(|s: f64| (-mu * (d - s)).exp() * s / d, 0.0, d, 1e-13, 0.0).unwrap();
            let b = integrate_adaptive(|s: f64| (-mu * (d - s)).exp() * (1.0 - s / d), 0.0, d, 1e-13, 0.0).unwrap();
            assert!((near - a).abs() < 1e-12 * d, "{mu} {d}: {near} {a}");
            assert!((far - b).abs() < 1e-12 * d, "{mu} {d}: {far} {b}");
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_the_switch() {
        // closed form just above the switch against the series it replaces
        let t = 1.001e-3;
        let (near, far) = cell_weights(t, 1.0);
        let sn = 0.5 - t / 6.0 + t * t / 24.0 - t * t * t / 120.0;
        let sf = 0.5 - t / 3.0 + t * t / 8.0 - t * t * t / 30.0;
        assert!((near - sn).abs() < 1e-9 && (far - sf).abs() < 1e-9);
    }

    #[test]
    fn constant_source_incoming_is_flat() {
        let plan = SweepPlan::new(&[2.0], &[-0.5], 0.1, &uniform(0.25, 40)).unwrap();
        let src = vec![3.0; 41];
        let mut out = vec![0.0; 41];
        plan.sweep_node(0, None, Some(&src), 0.0, &mut out);
        let want = 3.0 / (2.0 + 0.1 * 0.5);
        assert!(out.iter().all(|v| (v - want).abs() < 1e-13));
    }

    #[test]
    fn outgoing_relaxes_to_the_local_equilibrium() {
        let (nu, ph, tau) = (1.5, 0.8, 0.2);
        let plan = SweepPlan::new(&[nu], &[ph], tau, &uniform(0.1, 200)).unwrap();
        let src = vec![1.0; 201];
        let mut out = vec![0.0; 201];
        plan.sweep_node(0, None, Some(&src), 0.7, &mut out);
        let rate = nu - tau * ph;
        let mu = rate / ph;
        for (i, v) in out.iter().enumerate() {
            let x = 0.1 * i as f64;
            let exact = 1.0 / rate + (0.7 - 1.0 / rate) * (-mu * x).exp();
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn graded_grid_keeps_constant_source_exact() {
        let (nu, ph, tau) = (1.5, 0.8, 0.2);
        let x: Vec<f64> = (0..=40).map(|i| 0.01 * ((0.15 * i as f64).exp() - 1.0)).collect();
        let plan = SweepPlan::new(&[nu], &[ph], tau, &x).unwrap();
        let mut out = vec![0.0; 41];
        plan.sweep_node(0, None, Some(&[1.0; 41]), 0.7, &mut out);
        let rate = nu - tau * ph;
        for (xi, v) in x.iter().zip(&out) {
            let exact = 1.0 / rate + (0.7 - 1.0 / rate) * (-rate / ph * xi).exp();
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn fitted_source_is_exact_for_the_fitted_exponential() {
        let (nu, tau, kappa, dx) = (1.3, 0.05, 0.4, 0.37);
        for ph in [0.6, -0.6] {
            let plan = SweepPlan::fitted(&[nu], &[ph], tau, &uniform(dx, 50), kappa).unwrap();
            let src: Vec<f64> = (0..=50).map(|i| (-kappa * dx * i as f64).exp()).collect();
            let mut out = vec![0.0; 51];
            // the particular solution A e^{-κx} with A (ν - τp̂1 - κp̂1) = 1
            let amp = 1.0 / (nu - tau * ph - kappa * ph);
            plan.sweep_node(0, Some(&src), None, amp, &mut out);
            for (i, v) in out.iter().enumerate() {
                assert!((v - amp * src[i]).abs() < 1e-13, "p̂1 {ph} node {i}: {v} vs {}", amp * src[i]);
            }
        }
    }

    #[test]
    fn source_defect_vanishes_on_a_sweep() {
        let plan = SweepPlan::fitted(&[2.0, 2.0], &[0.4, -0.4], 0.1, &uniform(0.2, 10), 0.3).unwrap();
        let fit: Vec<f64> = (0..11).map(|i| (i as f64 * 0.3).sin()).collect();
        let lin: Vec<f64> = (0..11).map(|i| (i as f64 * 0.2).cos()).collect();
        for j in 0..2 {
            let mut h = vec![0.0; 11];
            plan.sweep_node(j, Some(&fit), Some(&lin), 0.5, &mut h);
            for i in 0..11 {
                if let Some(d) = plan.source_defect(j, &h, &fit, &lin, i) {
                    assert!(d.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tau_too_large_is_a_config_error() {
        let err = SweepPlan::new(&[0.1], &[0.5], 1.0, &uniform(0.1, 4)).unwrap_err();
        assert!(err.to_string().contains("tau too large"));
    }
}

#[cfg(test)]
mod bounds {
    use super::*;
    use proptest::prelude::*;

    fn uniform(dx: f64, nx: usize) -> Vec<f64> {
        (0..=nx).map(|i| i as f64 * dx).collect()
    }

    proptest! {
        #[test]
        fn sweep_is_bounded_by_the_inverse_frequency(
            nu in 0.5f64..5.0,
            ph in prop_oneof![-1.0f64..-0.05, 0.05f64..1.0],
            src in prop::collection::vec(-1.0f64..1.0, 33),
        ) {
            let tau = 0.04 * nu;
            let plan = SweepPlan::new(&[nu], &[ph], tau, &uniform(0.3, 32)).unwrap();
            let mut out = vec![0.0; 33];
            plan.sweep_node(0, None, Some(&src), 0.0, &mut out);
            let sup = src.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let bound = sup / (nu - tau * ph.abs());
            prop_assert!(out.iter().all(|v| v.abs() <= bound * (1.0 + 1e-12)));
        }

        #[test]
        fn sweep_is_linear(
            a in prop::collection::vec(-1.0f64..1.0, 17),
            b in prop::collection::vec(-1.0f64..1.0, 17),
            s in -3.0f64..3.0,
        ) {
            let plan = SweepPlan::fitted(&[1.2, 0.9], &[0.3, -0.7], 0.05, &uniform(0.5, 16), 0.1).unwrap();
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
            for j in 0..2 {
                let mut um = vec![0.0; 17];
                plan.sweep_node(j, Some(&mix), Some(&mix), 0.0, &mut um);
                let (mut pa, mut pb) = (vec![0.0; 17], vec![0.0; 17]);
                plan.sweep_node(j, Some(&a), Some(&a), 0.0, &mut pa);
                plan.sweep_node(j, Some(&b), Some(&b), 0.0, &mut pb);
                for i in 0..17 {
                    prop_assert!((um[i] - pa[i] - s * pb[i]).abs() < 1e-12);
                }
            }
        }
    }
}
