//! Modified Bessel functions of the second kind for integer order.
//!
//! `K_0` and `K_1` are evaluated from the power series (small argument) or
//! Steed's continued fraction (large argument); higher orders follow from the
//! upward recurrence `K_{n+1}(z) = (2n/z) K_n(z) + K_{n-1}(z)`, which is stable
//! for `K`. All evaluation happens on the exponentially scaled function
//! `e^z K_n(z)` so that ratios such as `K_3/K_2` stay finite for very large
//! arguments.

use crate::error::{Error, Result};
use std::sync::atomic::{AtomicU64, Ordering};

/// Smallest argument accepted by [`bessel_k`].
pub const Z_MIN: f64 = 1e-6;
/// Largest argument accepted by [`bessel_k`].
pub const Z_MAX: f64 = 1e6;
/// Largest `|order|` supported.
pub const MAX_ORDER: i32 = 5;

// relative error injected into every series/continued-fraction value; only
// used to prove that the verification suites notice a wrong Bessel function
static PERTURBATION: AtomicU64 = AtomicU64::new(0);

#[doc(hidden)]
pub fn set_perturbation(relative: f64) {
    PERTURBATION.store(relative.to_bits(), Ordering::Relaxed);
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CUTOVER: f64 = 2.0;

/// A single evaluation `K_order(argument) = value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: i32,
    pub argument: f64,
    pub value: f64,
}

impl BesselEval {
    pub fn new(order: i32, argument: f64) -> Result<Self> {
        let value = bessel_k(order, argument)?;
        Ok(Self { order, argument, value })
    }
}

fn check_args(order: i32, z: f64) -> Result<()> {
    if !(Z_MIN..=Z_MAX).contains(&z) {
        return Err(Error::Domain(format!(
            "bessel_k argument {z} outside [{Z_MIN}, {Z_MAX}]"
        )));
    }
    if order.abs() > MAX_ORDER {
        return Err(Error::Domain(format!(
            "bessel_k order {order} outside [-{MAX_ORDER}, {MAX_ORDER}]"
        )));
    }
    Ok(())
}

/// `K_order(z)`. Underflows to `0.0` once `z` exceeds roughly 745; use
/// [`bessel_k_scaled`] when only ratios are needed.
pub fn bessel_k(order: i32, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(order, z)? * (-z).exp())
}

/// `e^z K_order(z)`.
pub fn bessel_k_scaled(order: i32, z: f64) -> Result<f64> {
    check_args(order, z)?;
    let n = order.unsigned_abs() as usize;
    let (k0, k1) = k0_k1_scaled(z);
    if n == 0 {
        return Ok(k0);
    }
    let (mut prev, mut cur) = (k0, k1);
    for m in 1..n {
        let next = (2.0 * m as f64 / z) * cur + prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Scaled `K_0..=K_max_order` in one pass of the recurrence.
pub fn bessel_k_scaled_all(max_order: usize, z: f64) -> Result<Vec<f64>> {
    check_args(max_order as i32, z)?;
    let (k0, k1) = k0_k1_scaled(z);
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(k0);
    if max_order >= 1 {
        out.push(k1);
    }
    for m in 1..max_order {
        let next = (2.0 * m as f64 / z) * out[m] + out[m - 1];
        out.push(next);
    }
    Ok(out)
}

/// `K_{n+1}(z) / K_n(z)` without over- or underflow.
pub fn bessel_k_ratio(n: i32, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(n + 1, z)? / bessel_k_scaled(n, z)?)
}

/// Relative residual of `K_{n+1} = K_{n-1} + (2n/z) K_n` at `z`.
pub fn recurrence_residual(n: i32, z: f64) -> Result<f64> {
    let lo = bessel_k_scaled(n - 1, z)?;
    let mid = bessel_k_scaled(n, z)?;
    let hi = bessel_k_scaled(n + 1, z)?;
    Ok((hi - lo - 2.0 * n as f64 / z * mid).abs() / hi)
}

/// `e^z K_order(z)` from the integral `∫_0^∞ e^{-z(cosh t - 1)} cosh(order t) dt`
/// by adaptive quadrature; independent of the series and continued fraction.
pub fn bessel_k_scaled_by_integral(order: i32, z: f64) -> Result<f64> {
    check_args(order, z)?;
    let a = order as f64;
    // beyond this the integrand is below e^{-740} relative to its peak
    let t_max = (1.0 + 740.0 / z).acosh() + 1.0;
    crate::quadrature::integrate_adaptive(|t: f64| (-z * (t.cosh() - 1.0)).exp() * (a * t).cosh(), 0.0, t_max, 1e-12, 0.0)
}

fn k0_k1_scaled(z: f64) -> (f64, f64) {
    let (k0, k1) = k0_k1_unperturbed(z);
    let eps = f64::from_bits(PERTURBATION.load(Ordering::Relaxed));
    if eps == 0.0 {
        (k0, k1)
    } else {
        (k0, k1 * (1.0 + eps))
    }
}

fn k0_k1_unperturbed(z: f64) -> (f64, f64) {
    if z < SERIES_CUTOVER {
        let (k0, k1) = k0_k1_series(z);
        let e = z.exp();
        (k0 * e, k1 * e)
    } else {
        k0_k1_steed(z)
    }
}

// K_0 from its ascending series, K_1 from the Wronskian I_0 K_1 + I_1 K_0 = 1/z.
fn k0_k1_series(z: f64) -> (f64, f64) {
    let y = 0.25 * z * z;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    let mut i1_term = 0.5 * z;
    let mut i1 = i1_term;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        i1_term *= y / (kf * (kf + 1.0));
        i1 += i1_term;
        if term < 1e-18 * i0 && i1_term < 1e-18 * i1 {
            break;
        }
    }
    let k0 = -((0.5 * z).ln() + EULER_GAMMA) * i0 + tail;
    let k1 = (1.0 / z - i1 * k0) / i0;
    (k0, k1)
}

// Steed's algorithm for the continued fraction CF2 (order 0); returns the
// scaled pair (e^z K_0, e^z K_1).
fn k0_k1_steed(z: f64) -> (f64, f64) {
    const EPS: f64 = 1e-17;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..100_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * z)).sqrt() / s;
    let k1 = k0 * (z + 0.5 - h) / z;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 9.8 / standard reference values
        let cases = [
            (0, 1.0, 0.421_024_438_240_708_3),
            (1, 1.0, 0.601_907_230_197_234_6),
            (2, 1.0, 1.624_838_898_635_177_4),
            (0, 2.0, 0.113_893_872_749_533_4),
            (1, 2.0, 0.139_865_881_816_522_4),
            (1, 0.1, 9.853_844_780_870_606),
            (0, 10.0, 1.778_006_231_616_765e-5),
        ];
        for (n, z, expect) in cases {
            let got = bessel_k(n, z).unwrap();
            assert!(((got - expect) / expect).abs() < 1e-13, "K_{n}({z}) = {got}, want {expect}");
        }
    }

    #[test]
    fn seam_is_continuous() {
        let below = bessel_k_scaled(1, SERIES_CUTOVER * (1.0 - 1e-12)).unwrap();
        let above = bessel_k_scaled(1, SERIES_CUTOVER).unwrap();
        assert!(((below - above) / above).abs() < 1e-11);
    }

    #[test]
    fn negative_order_mirrors_positive() {
        for z in [0.3, 4.0] {
            assert_eq!(bessel_k(-1, z).unwrap(), bessel_k(1, z).unwrap());
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(bessel_k(0, 0.0).is_err());
        assert!(bessel_k(0, 2e6).is_err());
        assert!(bessel_k(6, 1.0).is_err());
    }

    #[test]
    fn recurrence_holds_to_rounding() {
        for n in 1..=3 {
            for z in [0.1, 1.0, 10.0, 100.0] {
                assert!(recurrence_residual(n, z).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn agrees_with_the_defining_integral() {
        for n in 0..=4 {
            for z in [1e-3, 0.1, 1.0, 2.0, 10.0, 100.0, 1e4] {
                let want = bessel_k_scaled_by_integral(n, z).unwrap();
                let got = bessel_k_scaled(n, z).unwrap();
                assert!(((got - want) / want).abs() <= 1e-10, "K_{n}({z}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn decreasing_in_argument() {
        for n in 0..=5 {
            let mut last = f64::INFINITY;
            for k in 0..200 {
                let z = 1e-3 * 1.07f64.powi(k);
                let v = bessel_k(n, z).unwrap();
                assert!(v > 0.0 && v < last);
                last = v;
            }
        }
    }
}
