//! The five-dimensional macroscopic model around a far-field equilibrium
//! moving along the first axis: orthonormal null-space basis, the flux
//! matrix `B = P0 p̂1 P0`, its spectrum, the sound speed and the count of
//! positive characteristic speeds.

use crate::error::{Error, Result};
use crate::juttner::{juttner_sqrt, MaxwellianParams};
use crate::lorentz::energy;
use crate::quadrature::MomentumRule;
use crate::special::bessel_k_ratio;
use nalgebra::{Matrix5, SymmetricEigen, Vector5};
use serde::Serialize;

/// Smallest and largest `z` accepted by [`macro_coefficients`].
pub const Z_RANGE: (f64, f64) = (1e-4, 1e6);

/// Distance from `0` and `±1` below which a Mach number is degenerate.
pub const MACH_DEGENERACY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacroCoefficients {
    pub z: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub big_a1: f64,
    pub big_a2: f64,
    pub big_a3: f64,
    pub big_a4: f64,
}

/// The `z`-only coefficients `(a1, a2, a3)`.
pub fn thermal_coefficients(z: f64) -> Result<(f64, f64, f64)> {
    if !(Z_RANGE.0..=Z_RANGE.1).contains(&z) {
        return Err(Error::Domain(format!("z = {z} outside [{}, {}]", Z_RANGE.0, Z_RANGE.1)));
    }
    let a1 = bessel_k_ratio(2, z)?;
    let a2 = -a1 * a1 + 6.0 * a1 / z + 1.0;
    let a3 = -a1.powi(3) + 6.0 * a1 * a1 / z - 6.0 * a1 / (z * z) + a1 - 1.0 / z;
    Ok((a1, a2, a3))
}

/// All coefficients for far-field temperature `c^2/z` and velocity `u1`.
pub fn macro_coefficients(z: f64, u1_over_c: f64) -> Result<MacroCoefficients> {
    let (a1, a2, a3) = thermal_coefficients(z)?;
    let w2 = u1_over_c * u1_over_c;
    let u0_over_c = (1.0 + w2).sqrt();
    Ok(MacroCoefficients {
        z,
        a1,
        a2,
        a3,
        big_a1: u0_over_c * (a2 * w2 + a1 / z),
        big_a2: a3 * w2 + a3 + a2 / z - a1 / (z * z),
        big_a3: ((2.0 * a2 - 6.0 * a1 / z - 1.0) * w2 + a2 - 5.0 * a1 / z - 1.0) / z,
        big_a4: -a2 * (1.0 + w2) * u1_over_c,
    })
}

/// `(z a2 - a1) / (z a3)`, the squared sound speed in units of `T`.
pub fn sound_speed_factor(z: f64) -> Result<f64> {
    let (a1, a2, a3) = thermal_coefficients(z)?;
    Ok((z * a2 - a1) / (z * a3))
}

/// Far-field sound speed `c∞` (momentum units) and its relativistic
/// counterpart `ĉ∞ = c∞ c / sqrt(c^2 + c∞^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoundSpeed {
    pub c_inf: f64,
    pub c_hat_inf: f64,
}

pub fn sound_speed(temperature: f64, c: f64) -> Result<SoundSpeed> {
    if !(temperature > 0.0 && temperature.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("need T > 0 and c > 0, got T = {temperature}, c = {c}")));
    }
    let z = c * c / temperature;
    let c_inf = (temperature * sound_speed_factor(z)?).sqrt();
    Ok(SoundSpeed { c_inf, c_hat_inf: c_inf * c / (c * c + c_inf * c_inf).sqrt() })
}

/// Number of positive eigenvalues of `B` for a given far-field Mach number.
pub fn n_plus_for_mach(mach: f64) -> Result<usize> {
    if mach.abs() < MACH_DEGENERACY || (mach.abs() - 1.0).abs() < MACH_DEGENERACY {
        return Err(Error::DegenerateMach { mach });
    }
    Ok(match mach {
        m if m < -1.0 => 0,
        m if m < 0.0 => 1,
        m if m < 1.0 => 4,
        _ => 5,
    })
}

/// Closed-form `B` and its eigenvalues, valid for every `u1` including the
/// degenerate Mach numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroOperator {
    pub far: MaxwellianParams,
    pub coeffs: MacroCoefficients,
    pub b: Matrix5<f64>,
    /// `λ1 <= λ2 = λ3 = λ4`, `λ5` in the closed-form labelling.
    pub eigenvalues: [f64; 5],
}

pub fn macro_operator(u1: f64, temperature: f64, c: f64) -> Result<MacroOperator> {
    let far = MaxwellianParams::far_field(u1, temperature, c)?;
    let z = far.z();
    let coeffs = macro_coefficients(z, u1 / c)?;
    let t = temperature;
    let u0 = far.u0();
    let MacroCoefficients { a1, a2, a3, big_a1, big_a2, .. } = coeffs;

    let lam = c * u1 / u0;
    let b01 = t / (big_a1 * c * u0).sqrt();
    let b04 = (a1 - z * a2) * u1 * t * t / (big_a1 * big_a2 * c.powi(5) * u0 * t).sqrt();
    let b14 = t * t / (c * u0 * (t * big_a2).sqrt());
    let b44 = lam + 2.0 * u1 * t * t * (a1 - z * a2) / (c.powi(3) * u0 * big_a2);
    let mut b = Matrix5::from_diagonal_element(lam);
    b[(0, 1)] = b01;
    b[(1, 0)] = b01;
    b[(0, 4)] = b04;
    b[(4, 0)] = b04;
    b[(1, 4)] = b14;
    b[(4, 1)] = b14;
    b[(4, 4)] = b44;

    let m = ((a2 - a1 / z) * (a3 + a2 / z - a1 / (z * z)) / z).sqrt();
    let l1 = (a3 * u0 * u1 - c * c * m) / (c * big_a2);
    let l5 = (a3 * u0 * u1 + c * c * m) / (c * big_a2);
    Ok(MacroOperator { far, coeffs, b, eigenvalues: [l1, lam, lam, lam, l5] })
}

impl MacroOperator {
    /// `χ_i(p)`, orthonormal in `L^2(dp)`.
    pub fn chi(&self, i: usize, p: [f64; 3]) -> f64 {
        let MaxwellianParams { c, temperature: t, .. } = self.far;
        let u1 = self.far.u[0];
        let u0 = self.far.u0();
        let MacroCoefficients { a1, big_a1, big_a2, big_a3, big_a4, .. } = self.coeffs;
        let root = juttner_sqrt(&self.far, p);
        let poly = match i {
            0 => (c / u0).sqrt(),
            1 => (p[0] - a1 * u1) / (big_a1.sqrt() * c),
            2 => (c / (a1 * u0 * t)).sqrt() * p[1],
            3 => (c / (a1 * u0 * t)).sqrt() * p[2],
            4 => (big_a3 * c + big_a4 * p[0] + big_a1 * energy(p, c)) / (big_a1 * big_a2 * t).sqrt(),
            _ => panic!("chi index {i} out of range"),
        };
        poly * root
    }

    /// All five `χ_i(p)` at once.
    pub fn chi_all(&self, p: [f64; 3]) -> [f64; 5] {
        std::array::from_fn(|i| self.chi(i, p))
    }

    /// `p̂1 = c p1 / p0`.
    pub fn p_hat1(&self, p: [f64; 3]) -> f64 {
        self.far.c * p[0] / energy(p, self.far.c)
    }
}

/// The macroscopic model with a numerical eigenbasis and Mach data.
#[derive(Debug, Clone)]
pub struct MacroModel {
    pub op: MacroOperator,
    pub sound: SoundSpeed,
    pub mach: f64,
    pub n_plus: usize,
    /// Eigenvalues from the dense solver, ascending.
    pub numeric_eigenvalues: [f64; 5],
    /// Columns are orthonormal eigenvectors (`Ξ_i` in `χ` coordinates),
    /// ordered like `numeric_eigenvalues`.
    pub eigenvectors: Matrix5<f64>,
}

pub fn build_macro_model(u1: f64, temperature: f64, c: f64) -> Result<MacroModel> {
    let op = macro_operator(u1, temperature, c)?;
    let sound = sound_speed(temperature, c)?;
    let mach = u1 / sound.c_inf;
    let n_plus = n_plus_for_mach(mach)?;
    let eig = SymmetricEigen::new(op.b);
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let numeric_eigenvalues = std::array::from_fn(|k| eig.eigenvalues[order[k]]);
    let eigenvectors = Matrix5::from_fn(|r, k| eig.eigenvectors[(r, order[k])]);
    Ok(MacroModel { op, sound, mach, n_plus, numeric_eigenvalues, eigenvectors })
}

impl MacroModel {
    /// Closed-form eigenvalues sorted ascending.
    pub fn closed_form_sorted(&self) -> [f64; 5] {
        let mut v = self.op.eigenvalues;
        v.sort_by(f64::total_cmp);
        v
    }

    /// Largest deviation between the dense eigensolver and the closed form.
    pub fn eigen_check(&self) -> f64 {
        self.closed_form_sorted()
            .iter()
            .zip(&self.numeric_eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Number of positive eigenvalues found by the eigensolver.
    pub fn positive_count(&self) -> usize {
        self.numeric_eigenvalues.iter().filter(|&&l| l > 0.0).count()
    }

    /// Orthogonal projector onto the positive eigenspace, in `χ` coordinates.
    pub fn positive_projector(&self) -> Matrix5<f64> {
        let mut p = Matrix5::zeros();
        for k in 0..5 {
            if self.numeric_eigenvalues[k] > 0.0 {
                let v = self.eigenvectors.column(k);
                p += v * v.transpose();
            }
        }
        p
    }

    /// `P0 f` coefficients `⟨χ_i, f⟩`.
    pub fn project_p0<F: Fn([f64; 3]) -> f64>(&self, f: F, rule: &MomentumRule) -> Vector5<f64> {
        project_p0(&self.op, f, rule)
    }

    /// Coefficients of `P0⁺ f` along the positive eigenvectors, in ascending
    /// eigenvalue order, together with `P0⁺ f` in `χ` coordinates.
    pub fn project_p0_plus<F: Fn([f64; 3]) -> f64>(&self, f: F, rule: &MomentumRule) -> (Vec<f64>, Vector5<f64>) {
        let coeffs = self.project_p0(f, rule);
        self.split_positive(&coeffs)
    }

    /// Positive-eigenspace part of a vector given in `χ` coordinates.
    pub fn split_positive(&self, coeffs: &Vector5<f64>) -> (Vec<f64>, Vector5<f64>) {
        let mut along = Vec::new();
        let mut full = Vector5::zeros();
        for k in 0..5 {
            if self.numeric_eigenvalues[k] > 0.0 {
                let v = self.eigenvectors.column(k);
                let a = v.dot(coeffs);
                along.push(a);
                full += v * a;
            }
        }
        (along, full)
    }
}

/// `⟨χ_i, f⟩` by tensor quadrature.
pub fn project_p0<F: Fn([f64; 3]) -> f64>(op: &MacroOperator, f: F, rule: &MomentumRule) -> Vector5<f64> {
    let mut acc = [crate::quadrature::CompensatedSum::new(); 5];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let fv = f(*p);
        if fv == 0.0 {
            continue;
        }
        let chi = op.chi_all(*p);
        for i in 0..5 {
            acc[i].add(w * chi[i] * fv);
        }
    }
    Vector5::from_fn(|i, _| acc[i].value())
}

/// Deviations of the quadrature Gram matrix from the identity and of the
/// quadrature flux matrix from the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BQuadratureReport {
    pub gram_deviation: f64,
    pub b_deviation: f64,
    pub b_asymmetry: f64,
}

pub fn verify_b_by_quadrature(op: &MacroOperator, rule: &MomentumRule) -> BQuadratureReport {
    let mut gram = [[crate::quadrature::CompensatedSum::new(); 5]; 5];
    let mut flux = [[crate::quadrature::CompensatedSum::new(); 5]; 5];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let chi = op.chi_all(*p);
        let ph = op.p_hat1(*p);
        for i in 0..5 {
            for j in 0..5 {
                gram[i][j].add(w * chi[i] * chi[j]);
                flux[i][j].add(w * chi[i] * ph * chi[j]);
            }
        }
    }
    let g = Matrix5::from_fn(|i, j| gram[i][j].value());
    let bq = Matrix5::from_fn(|i, j| flux[i][j].value());
    BQuadratureReport {
        gram_deviation: (g - Matrix5::identity()).amax(),
        b_deviation: (bq - op.b).amax(),
        b_asymmetry: (bq - bq.transpose()).amax(),
    }
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub c_inf: f64,
    pub c_hat_inf: f64,
    pub mach: f64,
    pub n_plus: usize,
    pub lambda: [f64; 5],
    pub eigen_check: f64,
}

pub fn classify(u1: f64, temperature: f64, c: f64) -> Result<Classification> {
    let model = build_macro_model(u1, temperature, c)?;
    Ok(Classification {
        c_inf: model.sound.c_inf,
        c_hat_inf: model.sound.c_hat_inf,
        mach: model.mach,
        n_plus: model.n_plus,
        lambda: model.op.eigenvalues,
        eigen_check: model.eigen_check(),
    })
}

/// Which extreme eigenvalue to track in [`eigenvalue_root`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Lowest,
    Highest,
}

/// Root in `u1` of `λ1(u1) = 0` (lowest branch, positive root) or
/// `λ5(u1) = 0` (highest branch, negative root) by bisection.
pub fn eigenvalue_root(branch: Branch, temperature: f64, c: f64) -> Result<f64> {
    let lambda = |u1: f64| -> Result<f64> {
        let op = macro_operator(u1, temperature, c)?;
        Ok(match branch {
            Branch::Lowest => op.eigenvalues[0],
            Branch::Highest => op.eigenvalues[4],
        })
    };
    let sign = match branch {
        Branch::Lowest => 1.0,
        Branch::Highest => -1.0,
    };
    let mut lo = 0.0;
    let mut hi = sign * c;
    let mut grow = 0;
    while lambda(hi)?.signum() == lambda(lo)?.signum() {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::Domain("no sign change while bracketing eigenvalue root".into()));
        }
    }
    let f_lo = lambda(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = lambda(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
