//! Heat kernels of `𝒜 = -½Δ - ⟨x, ∇⟩` and `𝒜̄ = 𝒜 - n`, their derivatives,
//! and the classical Gauss–Weierstrass kernel `W_t`.
//!
//! Every closed form is written as a Hermite polynomial times a single
//! exponential so that prefactors like `e^{|y|² - |x|²}` never overflow on
//! their own.

use crate::error::{Error, Result};
use crate::hermite::{hermite_poly, EnvelopedFunction};
use crate::multi_index::MultiIndex;
use crate::quadrature::gauss_hermite_rule;
use crate::special::{one_minus_exp_neg, pairwise_sum};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Evaluation point `(t, x, y)` of a heat kernel.
#[derive(Clone, Copy, Debug)]
pub struct KernelQuery<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

impl<'a> KernelQuery<'a> {
    pub fn new(t: f64, x: &'a [f64], y: &'a [f64]) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time must be positive and finite, got {t}")));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        if x.is_empty() {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(KernelQuery { t, x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

#[inline]
fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// `∏ H_{ℓ_i}(u_i)`.
#[inline]
pub(crate) fn hermite_product(l: &MultiIndex, u: &[f64]) -> f64 {
    l.components().iter().zip(u).map(|(&m, &z)| hermite_poly(m, z)).product()
}

/// `u = (a - e^{-t} b)/√s` together with `|u|²`, formed as `(a - b) + (1 - e^{-t}) b`
/// so that nearby points keep their relative accuracy at small `t`.
fn scaled_difference(a: &[f64], b: &[f64], t: f64, sqrt_s: f64) -> (Vec<f64>, f64) {
    let c = one_minus_exp_neg(t);
    let u: Vec<f64> = a.iter().zip(b).map(|(ai, bi)| ((ai - bi) + c * bi) / sqrt_s).collect();
    let n2 = norm_sq(&u);
    (u, n2)
}

/// Mehler kernel `T_t^𝒜(x, y) = e^{-nt} π^{-n/2} s^{-n/2} exp(-|x - e^{-t}y|²/s)`, `s = 1 - e^{-2t}`.
pub fn mehler_kernel(q: &KernelQuery) -> f64 {
    mehler_dx(&MultiIndex::zero(q.dim()), q)
}

/// `∂_x^ℓ T_t^𝒜(x, y) = (-1)^{|ℓ|} e^{-nt} π^{-n/2} s^{-(n+|ℓ|)/2} H̃_ℓ((x - e^{-t}y)/√s)`.
pub fn mehler_dx(l: &MultiIndex, q: &KernelQuery) -> f64 {
    let n = q.dim() as f64;
    let s = one_minus_exp_neg(2.0 * q.t);
    let (u, u2) = scaled_difference(q.x, q.y, q.t, s.sqrt());
    let ord = l.order() as f64;
    let sign = if l.order() % 2 == 0 { 1.0 } else { -1.0 };
    sign * hermite_product(l, &u) * (-n * q.t - u2 - 0.5 * (n + ord) * s.ln()).exp() * PI.powf(-0.5 * n)
}

/// `∂_t T_t^𝒜(x, y)`.
pub fn mehler_dt(q: &KernelQuery) -> f64 {
    let n = q.dim() as f64;
    let e2 = (-2.0 * q.t).exp();
    let s = one_minus_exp_neg(2.0 * q.t);
    let x2 = norm_sq(q.x);
    let y2 = norm_sq(q.y);
    let c = one_minus_exp_neg(q.t);
    let d2: f64 = q.x.iter().zip(q.y).map(|(a, b)| ((a - b) + c * b).powi(2)).sum();
    let factor = -n + e2 * (y2 - x2) - s * x2 + (1.0 + e2) / s * d2;
    factor * mehler_kernel(q) / s
}

/// `T_t^𝒜̄(x, y) = e^{nt} T_t^𝒜(x, y)`.
pub fn tbar_kernel(q: &KernelQuery) -> f64 {
    delta_dx_tbar(&MultiIndex::zero(q.dim()), q)
}

/// `δ_x^ℓ T_t^𝒜̄(x, y)` with `δ_i = -½ e^{-x_i²} ∂_{x_i} e^{x_i²}`:
/// `(-1)^{|ℓ|} e^{|y|² - |x|²} 2^{-|ℓ|} π^{-n/2} s^{-(n+|ℓ|)/2} e^{-|ℓ|t} H̃_ℓ((y - e^{-t}x)/√s)`.
pub fn delta_dx_tbar(l: &MultiIndex, q: &KernelQuery) -> f64 {
    let n = q.dim() as f64;
    let s = one_minus_exp_neg(2.0 * q.t);
    let (u, u2) = scaled_difference(q.y, q.x, q.t, s.sqrt());
    let ord = l.order() as f64;
    let sign = if l.order() % 2 == 0 { 1.0 } else { -1.0 };
    let expo = norm_sq(q.y) - norm_sq(q.x) - u2 - 0.5 * (n + ord) * s.ln() - ord * (q.t + 2f64.ln());
    sign * hermite_product(l, &u) * expo.exp() * PI.powf(-0.5 * n)
}

/// `∂^ℓ W_t(z)` for `W_t(z) = (2πt)^{-n/2} e^{-|z|²/(2t)}`:
/// `(-1)^{|ℓ|} π^{-n/2} (2t)^{-(n+|ℓ|)/2} H̃_ℓ(z/√(2t))`.
pub fn classical_heat(l: &MultiIndex, t: f64, z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let r = (2.0 * t).sqrt();
    let u: Vec<f64> = z.iter().map(|a| a / r).collect();
    let ord = l.order() as f64;
    let sign = if l.order() % 2 == 0 { 1.0 } else { -1.0 };
    sign * hermite_product(l, &u) * (-norm_sq(&u) - (n + ord) * r.ln()).exp() * PI.powf(-0.5 * n)
}

/// `∂_t W_t(z) = (-n + |z|²/t) W_t(z) / (2t)`.
pub fn classical_heat_dt(t: f64, z: &[f64]) -> f64 {
    let n = z.len() as f64;
    (-n + norm_sq(z) / t) * classical_heat(&MultiIndex::zero(z.len()), t, z) / (2.0 * t)
}

/// `T_t^𝒜 f(x) = ∫ T_t^𝒜(x, y) f(y) dy` for `f = g e^{-|y|²}`.
///
/// Completing the square gives `T_t(x,y) e^{-|y|²} = e^{-nt} π^{-n/2} s^{-n/2}
/// e^{-|x|²} e^{-|y - e^{-t}x|²/s}`, so after `y = e^{-t}x + √s u` the
/// integral is a Gauss–Hermite sum, exact for polynomial `g` of degree
/// `< 2·order`.
pub fn semigroup_apply(t: f64, x: &[f64], f: &EnvelopedFunction, order: usize) -> Result<Complex64> {
    let n = x.len();
    if f.dim() != n {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: n });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("time must be positive, got {t}")));
    }
    let rule = gauss_hermite_rule(order)?;
    let s = one_minus_exp_neg(2.0 * t);
    let rs = s.sqrt();
    let et = (-t).exp();
    let m = rule.nodes.len();
    let total = m.pow(n as u32);
    let mut terms = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    let mut y = vec![0.0; n];
    for _ in 0..total {
        let mut w = 1.0;
        for i in 0..n {
            y[i] = et * x[i] + rs * rule.nodes[idx[i]];
            w *= rule.weights[idx[i]];
        }
        terms.push(f.eval_g(&y) * w);
        for i in (0..n).rev() {
            idx[i] += 1;
            if idx[i] < m {
                break;
            }
            idx[i] = 0;
        }
    }
    let pref = (-(n as f64) * t - norm_sq(x)).exp() * PI.powf(-0.5 * n as f64);
    Ok(pairwise_sum(&terms) * pref)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_tilde, Term};
    use crate::quadrature::{adaptive, Tolerance};
    use approx::assert_relative_eq;

    fn q<'a>(t: f64, x: &'a [f64], y: &'a [f64]) -> KernelQuery<'a> {
        KernelQuery::new(t, x, y).unwrap()
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn mehler_examples() {
        let s = 1.0 - (-2.0f64).exp();
        let want = (-1.0f64).exp() / (PI * s).sqrt();
        assert_relative_eq!(mehler_kernel(&q(1.0, &[0.0], &[0.0])), want, max_relative = 1e-15);
        assert_relative_eq!(want, 0.223_206_435_949_775_6, max_relative = 1e-14);
        let far = mehler_kernel(&q(50.0, &[1.0], &[0.0]));
        assert_relative_eq!(far, (-51.0f64).exp() / PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn self_adjoint_in_inverse_gaussian_measure() {
        let (x, y) = ([1.0], [2.0]);
        let a = 1f64.exp() * mehler_kernel(&q(0.3, &x, &y));
        let b = 4f64.exp() * mehler_kernel(&q(0.3, &y, &x));
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn x_derivatives() {
        let v = mehler_dx(&mi(&[2]), &q(0.5, &[0.0], &[0.0]));
        let want = -2.0 * (-0.5f64).exp() / PI.sqrt() * (1.0 - (-1.0f64).exp()).powf(-1.5);
        assert_relative_eq!(v, want, max_relative = 1e-14);
        let h = 1e-4;
        let fd = (mehler_kernel(&q(0.5, &[0.3 + h], &[-0.2])) - mehler_kernel(&q(0.5, &[0.3 - h], &[-0.2]))) / (2.0 * h);
        assert_relative_eq!(mehler_dx(&mi(&[1]), &q(0.5, &[0.3], &[-0.2])), fd, max_relative = 1e-6);
    }

    #[test]
    fn time_derivative() {
        let t0 = mehler_kernel(&q(1.0, &[0.0], &[0.0]));
        let s = 1.0 - (-2.0f64).exp();
        assert_relative_eq!(mehler_dt(&q(1.0, &[0.0], &[0.0])), -t0 / s, max_relative = 1e-14);
        let h = 1e-4;
        let fd = (mehler_kernel(&q(0.7 + h, &[1.0], &[0.5])) - mehler_kernel(&q(0.7 - h, &[1.0], &[0.5]))) / (2.0 * h);
        assert_relative_eq!(mehler_dt(&q(0.7, &[1.0], &[0.5])), fd, max_relative = 1e-6);
    }

    #[test]
    fn time_derivative_against_ground_state() {
        let x = 0.4;
        let mut f = |y: f64| mehler_dt(&q(0.6, &[x], &[y])) * (-y * y).exp();
        let v = adaptive(&mut f, -12.0, 12.0, Tolerance::absolute(1e-13)).unwrap();
        assert_relative_eq!(v.value, -(-0.6f64).exp() * (-x * x).exp(), max_relative = 1e-9);
    }

    #[test]
    fn tbar_and_delta() {
        let (x, y) = ([0.3], [-0.8]);
        let k = q(0.4, &x, &y);
        assert_relative_eq!(tbar_kernel(&k), 0.4f64.exp() * mehler_kernel(&k), max_relative = 1e-13);
        let h = 1e-4;
        let g = |x1: f64| (x1 * x1).exp() * tbar_kernel(&q(0.4, &[x1], &y));
        let fd = -0.5 * (-0.09f64).exp() * (g(0.3 + h) - g(0.3 - h)) / (2.0 * h);
        assert_relative_eq!(delta_dx_tbar(&mi(&[1]), &k), fd, max_relative = 1e-6);
        let x = 0.25;
        let t = 0.8;
        let mut f = |y: f64| tbar_kernel(&q(t, &[x], &[y])) * hermite_tilde(&mi(&[1]), &[y]);
        let v = adaptive(&mut f, -12.0, 12.0, Tolerance::absolute(1e-13)).unwrap();
        assert_relative_eq!(v.value, (-t).exp() * hermite_tilde(&mi(&[1]), &[x]), max_relative = 1e-9);
    }

    #[test]
    fn classical_heat_examples() {
        assert_relative_eq!(classical_heat(&mi(&[0]), 1.0 / (2.0 * PI), &[0.0]), 1.0, max_relative = 1e-15);
        assert_eq!(classical_heat(&mi(&[1]), 0.3, &[0.0]), 0.0);
        let h = 1e-4;
        let w = |z: f64| classical_heat(&mi(&[0]), 0.4, &[z]);
        let fd = (w(0.7 + h) - 2.0 * w(0.7) + w(0.7 - h)) / (h * h);
        assert_relative_eq!(classical_heat(&mi(&[2]), 0.4, &[0.7]), fd, max_relative = 1e-6);
        let fdt = (classical_heat(&mi(&[0]), 0.4 + h, &[0.7]) - classical_heat(&mi(&[0]), 0.4 - h, &[0.7])) / (2.0 * h);
        assert_relative_eq!(classical_heat_dt(0.4, &[0.7]), fdt, max_relative = 1e-6);
    }

    #[test]
    fn chapman_kolmogorov() {
        for &(t, s) in &[(0.2, 0.7), (0.7, 0.2), (0.2, 0.2), (0.7, 0.7)] {
            for &(x, y) in &[(0.3, -0.5), (1.2, 0.4)] {
                let mut f = |z: f64| mehler_kernel(&q(t, &[x], &[z])) * mehler_kernel(&q(s, &[z], &[y]));
                let v = adaptive(&mut f, -15.0, 15.0, Tolerance::relative(1e-12)).unwrap();
                assert_relative_eq!(v.value, mehler_kernel(&q(t + s, &[x], &[y])), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn semigroup_apply_is_exact_on_hermite_functions() {
        let h2 = EnvelopedFunction::polynomial(
            1,
            vec![
                Term { exponents: vec![2], coeff_re: 4.0, coeff_im: 0.0 },
                Term { exponents: vec![0], coeff_re: -2.0, coeff_im: 0.0 },
            ],
        )
        .unwrap();
        let x = [0.6];
        let v = semigroup_apply(0.5, &x, &h2, 8).unwrap();
        assert_relative_eq!(v.re, (-1.5f64).exp() * hermite_tilde(&mi(&[2]), &x), max_relative = 1e-13);
    }
}
