//! The bilinear collision term `Γ(h, h)` evaluated on every `x` node at once.

use super::operator::DiscreteOperator;
use crate::collision::{for_each_sample, CollisionQuad};
use crate::juttner::juttner_sqrt;
use rayon::prelude::*;

/// `Γ(h, h)` at every momentum node. `h` is node-major: `h[j * nx1 + i]`
/// is the unscaled value at momentum node `j` and `x` node `i`. The result
/// has the same layout.
pub fn gamma_field(op: &DiscreteOperator, h: &[f64], nx1: usize) -> Vec<f64> {
    let grid = &op.grid;
    let far = &op.far;
    let q = &op.quad;
    let rows: Vec<Vec<f64>> = grid
        .points
        .par_iter()
        .enumerate()
        .map(|(row, p)| {
            let cq = CollisionQuad::centered(*p, far, q.gamma_panels, q.gamma_angular, q.gamma_omega);
            let w0q: Vec<f64> = cq.q_rule.points.iter().map(|q| juttner_sqrt(far, *q)).collect();
            let hq: Vec<Option<Vec<f64>>> = cq.q_rule.points.iter().map(|q| interpolate_line(op, h, nx1, *q)).collect();
            let mut acc = vec![0.0; nx1];
            let mut loss = vec![0.0; cq.q_rule.len()];
            let mut a = vec![0.0; nx1];
            let mut b = vec![0.0; nx1];
            for_each_sample(&op.kernel, *p, far.c, &cq, |pp, qq, _, iq, w| {
                let coef = w * w0q[iq];
                if coef == 0.0 {
                    return;
                }
                loss[iq] += coef;
                if !(fill_line(op, h, nx1, pp, &mut a) && fill_line(op, h, nx1, qq, &mut b)) {
                    return;
                }
                for i in 0..nx1 {
                    acc[i] += coef * a[i] * b[i];
                }
            });
            let own = &h[row * nx1..(row + 1) * nx1];
            for (l, line) in loss.iter().zip(&hq) {
                if let Some(line) = line {
                    for i in 0..nx1 {
                        acc[i] -= l * own[i] * line[i];
                    }
                }
            }
            acc
        })
        .collect();
    rows.concat()
}

fn fill_line(op: &DiscreteOperator, h: &[f64], nx1: usize, at: [f64; 3], out: &mut [f64]) -> bool {
    match op.grid.stencil(at) {
        Some(st) => {
            out.iter_mut().for_each(|v| *v = 0.0);
            for (j, w) in st {
                if w == 0.0 {
                    continue;
                }
                let src = &h[j * nx1..(j + 1) * nx1];
                for (o, s) in out.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
            true
        }
        None => false,
    }
}

fn interpolate_line(op: &DiscreteOperator, h: &[f64], nx1: usize, at: [f64; 3]) -> Option<Vec<f64>> {
    let mut out = vec![0.0; nx1];
    fill_line(op, h, nx1, at, &mut out).then_some(out)
}
