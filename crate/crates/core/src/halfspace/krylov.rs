//! Restarted GMRES with modified Gram–Schmidt and Givens rotations.

/// Outcome of a [`gmres`] run.
#[derive(Debug, Clone, Copy)]
pub struct KrylovReport {
    pub matvecs: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` starting from `x`, stopping when `|b - A x| <= rel_tol |b|`
/// or after `max_matvecs` applications of `apply`.
pub fn gmres<F>(apply: F, b: &[f64], x: &mut [f64], restart: usize, rel_tol: f64, max_matvecs: usize) -> KrylovReport
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return KrylovReport { matvecs: 0, relative_residual: 0.0, converged: true };
    }
    let m = restart.max(1);
    let mut matvecs = 0;
    loop {
        let ax = apply(x);
        matvecs += 1;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= rel_tol || matvecs >= max_matvecs {
            return KrylovReport { matvecs, relative_residual: rel, converged: rel <= rel_tol };
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply(&basis[k]);
            matvecs += 1;
            for (j, v) in basis.iter().enumerate() {
                let hj = dot(&w, v);
                h[j][k] = hj;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hj * vi);
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let den = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / den;
            sn[k] = h[k + 1][k] / den;
            h[k][k] = den;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() / bnorm <= rel_tol || matvecs >= max_matvecs || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            for t in 0..n {
                x[t] += yi * v[t];
            }
        }
    }
}
