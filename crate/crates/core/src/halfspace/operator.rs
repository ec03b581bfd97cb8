//! The linearized collision operator on a fixed momentum grid, in
//! `√w`-scaled nodal coordinates where the grid inner product is Euclidean.

use crate::collision::{collision_frequency, for_each_sample, frequency_rule, CollisionQuad, KernelParams};
use crate::error::{Error, Result};
use crate::grid::{MomentumGrid, MomentumGridSpec};
use crate::juttner::{JuttnerEvaluator, MaxwellianParams};
use crate::lorentz::energy;
use crate::macro5::{macro_operator, MacroOperator};
use nalgebra::{DMatrix, DVector, Matrix5, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Quadrature sizes used when assembling operators on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssemblyQuad {
    /// Radial panels (8 Gauss points each) of the `q` rule for `K`.
    pub k_panels: usize,
    /// Polar order of the `q` directions for `K`.
    pub k_angular: usize,
    /// Polar order of the `ω` rule for `K`.
    pub k_omega: usize,
    pub nu_panels: usize,
    pub nu_angular: usize,
    pub gamma_panels: usize,
    pub gamma_angular: usize,
    pub gamma_omega: usize,
}

impl Default for AssemblyQuad {
    fn default() -> Self {
        Self { k_panels: 3, k_angular: 6, k_omega: 4, nu_panels: 4, nu_angular: 8, gamma_panels: 2, gamma_angular: 4, gamma_omega: 3 }
    }
}

impl AssemblyQuad {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_panels", self.k_panels),
            ("k_angular", self.k_angular),
            ("k_omega", self.k_omega),
            ("nu_panels", self.nu_panels),
            ("nu_angular", self.nu_angular),
            ("gamma_panels", self.gamma_panels),
            ("gamma_angular", self.gamma_angular),
            ("gamma_omega", self.gamma_omega),
        ];
        for (key, v) in fields {
            if v == 0 {
                return Err(Error::config(format!("quadrature.{key}"), "must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Discrete linearized operator and macroscopic structure on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: MomentumGrid,
    pub far: MaxwellianParams,
    pub kernel: KernelParams,
    pub quad: AssemblyQuad,
    pub macro_op: MacroOperator,
    pub nu: Vec<f64>,
    pub p_hat1: Vec<f64>,
    pub energy: Vec<f64>,
    pub sqrt_w: Vec<f64>,
    /// Symmetric, conservative `L` in scaled coordinates.
    pub l_hat: DMatrix<f64>,
    /// Orthonormal basis of the discrete null space (scaled `χ_i`).
    pub basis: DMatrix<f64>,
    /// `Qᵀ diag(p̂1) Q`.
    pub b_discrete: Matrix5<f64>,
    /// Ascending eigenvalues of `b_discrete`.
    pub eigenvalues: [f64; 5],
    /// Eigenvectors of `b_discrete` in basis coordinates, columns ordered
    /// like `eigenvalues`.
    pub eigenvectors: Matrix5<f64>,
    /// Scaled `Ξ_k` with positive eigenvalue, one column each.
    pub xi_plus: DMatrix<f64>,
    /// Fraction of interpolation weight that fell outside the grid while
    /// assembling `K`.
    pub dropped_weight: f64,
    /// `max |K̂ - K̂ᵀ| / max |K̂|` before symmetrization.
    pub asymmetry: f64,
    /// Largest `|χ_i` Gram entry - `δ_ij|` on the grid.
    pub gram_defect: f64,
}

/// Run `f` on a pool of `workers` threads (0 means rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    Ok(pool.install(f))
}

impl DiscreteOperator {
    pub fn assemble(kernel: KernelParams, far: MaxwellianParams, spec: MomentumGridSpec, quad: AssemblyQuad) -> Result<Self> {
        kernel.validate()?;
        quad.validate()?;
        let grid = MomentumGrid::new(spec)?;
        let c = far.c;
        let macro_op = macro_operator(far.u[0], far.temperature, c)?;
        let n = grid.len();
        let p_hat1 = grid.p_hat1(c);
        let energy_n: Vec<f64> = grid.points.iter().map(|p| energy(*p, c)).collect();
        let sqrt_w: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();

        let nu: Vec<f64> = grid
            .points
            .par_iter()
            .map(|p| collision_frequency(&kernel, &far, *p, &frequency_rule(&far, *p, quad.nu_panels, quad.nu_angular)))
            .collect();

        let rows: Vec<(Vec<f64>, f64, f64)> =
            grid.points.par_iter().map(|p| k_row(&grid, &kernel, &far, *p, &quad)).collect();
        let kept: f64 = rows.iter().map(|r| r.1).sum();
        let lost: f64 = rows.iter().map(|r| r.2).sum();
        let dropped_weight = if kept + lost > 0.0 { lost / (kept + lost) } else { 0.0 };
        if dropped_weight > 1e-6 {
            log::warn!("collision samples outside the momentum grid carry {:.2e} of the interpolation weight", dropped_weight);
        }

        let k_hat = DMatrix::from_fn(n, n, |i, j| sqrt_w[i] * rows[i].0[j] / sqrt_w[j]);
        let kmax = k_hat.amax();
        let asymmetry = if kmax > 0.0 { (&k_hat - k_hat.transpose()).amax() / kmax } else { 0.0 };
        let mut l = (&k_hat + k_hat.transpose()) * 0.5;
        for i in 0..n {
            l[(i, i)] -= nu[i];
        }

        // orthonormalize the scaled χ_i symmetrically so the basis stays
        // closest to the continuous one
        let x = DMatrix::from_fn(n, 5, |i, k| sqrt_w[i] * macro_op.chi(k, grid.points[i]));
        let gram = x.transpose() * &x;
        let gram_defect = (&gram - DMatrix::<f64>::identity(5, 5)).amax();
        let ge = SymmetricEigen::new(gram.clone());
        if ge.eigenvalues.min() <= 1e-8 * ge.eigenvalues.max() {
            return Err(Error::Domain("macroscopic basis is rank deficient on this grid".into()));
        }
        let inv_sqrt = &ge.eigenvectors
            * DMatrix::from_diagonal(&ge.eigenvalues.map(|v| 1.0 / v.sqrt()))
            * ge.eigenvectors.transpose();
        let basis = x * inv_sqrt;

        let lq = &l * &basis;
        let qlq = basis.transpose() * &lq;
        let mut l_hat = &l - &basis * lq.transpose() - &lq * basis.transpose() + &basis * qlq * basis.transpose();
        let l_sym = (&l_hat + l_hat.transpose()) * 0.5;
        l_hat = l_sym;

        let dq = DMatrix::from_fn(n, 5, |i, k| p_hat1[i] * basis[(i, k)]);
        let bd = basis.transpose() * dq;
        let b_discrete = Matrix5::from_fn(|r, k| 0.5 * (bd[(r, k)] + bd[(k, r)]));
        let eig = SymmetricEigen::new(b_discrete);
        let mut order: Vec<usize> = (0..5).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: [f64; 5] = std::array::from_fn(|k| eig.eigenvalues[order[k]]);
        let eigenvectors = Matrix5::from_fn(|r, k| eig.eigenvectors[(r, order[k])]);
        let plus: Vec<usize> = (0..5).filter(|&k| eigenvalues[k] > 0.0).collect();
        let xi_plus = DMatrix::from_fn(n, plus.len(), |i, m| (0..5).map(|r| basis[(i, r)] * eigenvectors[(r, plus[m])]).sum());

        Ok(Self {
            grid,
            far,
            kernel,
            quad,
            macro_op,
            nu,
            p_hat1,
            energy: energy_n,
            sqrt_w,
            l_hat,
            basis,
            b_discrete,
            eigenvalues,
            eigenvectors,
            xi_plus,
            dropped_weight,
            asymmetry,
            gram_defect,
        })
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn n_plus(&self) -> usize {
        self.xi_plus.ncols()
    }

    /// `K̄ = L + ν - γ P0⁺ p̂1` in scaled coordinates.
    pub fn k_bar(&self, gamma: f64) -> DMatrix<f64> {
        let mut k = self.l_hat.clone();
        for i in 0..self.len() {
            k[(i, i)] += self.nu[i];
        }
        if self.n_plus() > 0 && gamma != 0.0 {
            let dxi = DMatrix::from_fn(self.len(), self.n_plus(), |i, m| self.p_hat1[i] * self.xi_plus[(i, m)]);
            k -= &self.xi_plus * dxi.transpose() * gamma;
        }
        k
    }

    /// Remove the discrete null-space component of a scaled vector.
    pub fn project_micro(&self, v: &mut DVector<f64>) {
        let coeffs = self.basis.transpose() * &*v;
        *v -= &self.basis * coeffs;
    }

    /// `⟨Ξ_k, p̂1 v⟩` for each positive direction, `v` scaled.
    pub fn damping_trace(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n_plus())
            .map(|m| crate::quadrature::compensated_sum((0..self.len()).map(|i| self.xi_plus[(i, m)] * self.p_hat1[i] * v[i])))
            .collect()
    }

    /// Components of `P0 p̂1 v` along every eigenvector, ascending
    /// eigenvalue order, `v` scaled.
    pub fn macro_flux(&self, v: &[f64]) -> [f64; 5] {
        let coeffs: Vec<f64> = (0..5)
            .map(|r| crate::quadrature::compensated_sum((0..self.len()).map(|i| self.basis[(i, r)] * self.p_hat1[i] * v[i])))
            .collect();
        std::array::from_fn(|k| (0..5).map(|r| self.eigenvectors[(r, k)] * coeffs[r]).sum())
    }

    /// `⟨χ_i, v⟩` on the grid for unscaled nodal values `v`.
    pub fn chi_coefficients(&self, v: &[f64]) -> [f64; 5] {
        std::array::from_fn(|k| {
            crate::quadrature::compensated_sum(
                (0..self.len()).map(|i| self.grid.weights[i] * self.macro_op.chi(k, self.grid.points[i]) * v[i]),
            )
        })
    }

    /// `min ν/|p̂1|` over the grid.
    pub fn min_relaxation_rate(&self) -> f64 {
        self.nu.iter().zip(&self.p_hat1).map(|(n, p)| n / p.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|L Q|` entry; zero up to rounding by construction.
    pub fn null_space_defect(&self) -> f64 {
        (&self.l_hat * &self.basis).amax()
    }

    /// Largest eigenvalue of `L` restricted to the micro space.
    pub fn spectral_gap(&self) -> f64 {
        let eig = SymmetricEigen::new(self.l_hat.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        // the five largest are the null space
        -v[5]
    }
}

/// One row of the unscaled `K` and the kept / dropped interpolation weight.
fn k_row(grid: &MomentumGrid, kernel: &KernelParams, far: &MaxwellianParams, p: [f64; 3], quad: &AssemblyQuad) -> (Vec<f64>, f64, f64) {
    let n = grid.len();
    let mut row = vec![0.0; n];
    let cq = CollisionQuad::centered(p, far, quad.k_panels, quad.k_angular, quad.k_omega);
    let jt = JuttnerEvaluator::new(far);
    let w0p = jt.sqrt(p);
    let w0q: Vec<f64> = cq.q_rule.points.iter().map(|q| jt.sqrt(*q)).collect();
    let mut loss = vec![0.0; cq.q_rule.len()];
    let (mut kept, mut lost) = (0.0, 0.0);
    let mut scatter = |row: &mut [f64], at: [f64; 3], amount: f64| {
        if amount == 0.0 {
            return;
        }
        match grid.stencil(at) {
            Some(st) => {
                for (j, a) in st {
                    row[j] += amount * a;
                }
                kept += amount.abs();
            }
            None => lost += amount.abs(),
        }
    };
    for_each_sample(kernel, p, far.c, &cq, |pp, qq, _, iq, w| {
        let coef = w * w0q[iq];
        if coef == 0.0 {
            return;
        }
        scatter(&mut row, pp, coef * jt.sqrt(qq));
        scatter(&mut row, qq, coef * jt.sqrt(pp));
        loss[iq] += coef;
    });
    for (q, l) in cq.q_rule.points.iter().zip(&loss) {
        scatter(&mut row, *q, -w0p * l);
    }
    (row, kept, lost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DiscreteOperator {
        let far = MaxwellianParams::far_field(-0.3, 1.0, 1.0).unwrap();
        let spec = MomentumGridSpec { per_axis: 6, p_max: 8.0, stretch: 2.0 };
        let quad = AssemblyQuad { k_panels: 2, k_angular: 3, k_omega: 3, nu_panels: 3, nu_angular: 4, ..Default::default() };
        DiscreteOperator::assemble(KernelParams::constant(1.0), far, spec, quad).unwrap()
    }

    #[test]
    fn assembled_operator_is_symmetric_and_conservative() {
        let op = small();
        assert!((&op.l_hat - op.l_hat.transpose()).amax() < 1e-12);
        assert!(op.null_space_defect() < 1e-10 * op.l_hat.amax());
        assert!(op.spectral_gap() > 0.0);
        assert!(op.nu.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn discrete_b_tracks_the_closed_form() {
        let op = small();
        let mut cf = op.macro_op.eigenvalues;
        cf.sort_by(f64::total_cmp);
        for (a, b) in cf.iter().zip(&op.eigenvalues) {
            assert!((a - b).abs() < 0.1, "{cf:?} vs {:?}", op.eigenvalues);
        }
        // M∞ ∈ (-1, 0) has exactly one positive direction
        assert_eq!(op.n_plus(), 1);
    }

    #[test]
    fn damping_term_acts_only_on_the_positive_direction() {
        let op = small();
        let gamma = 0.3;
        let diff = op.k_bar(gamma) - op.k_bar(0.0);
        let v = DVector::from_fn(op.len(), |i, _| (i as f64 * 0.37).sin());
        let dv = &diff * &v;
        let want = &op.xi_plus * (op.xi_plus.transpose() * DVector::from_fn(op.len(), |i, _| op.p_hat1[i] * v[i])) * (-gamma);
        assert!((dv - want).amax() < 1e-12);
    }
}
