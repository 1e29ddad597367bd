//! Time-integrated singular kernels: Riesz transforms `R_α`, `R̄_α`, negative
//! powers `M_β`, `K̄_β`, imaginary powers `K_γ^𝒜`, their Euclidean
//! counterparts, and the correction `α(ε)`.
//!
//! Near the diagonal (inside the local region `N_β`) every kernel is split
//! as a closed-form classical part plus a remainder
//!
//! ```text
//! ∫_{t_lo}^{t₀} (∂T - ∂W) + ∫_{t₀}^∞ ∂T - ∫_{t₀}^∞ ∂W,     t₀ = m(x),
//! ```
//!
//! where the last term is again closed form (lower incomplete Gamma). Below
//! `t_lo` both heat kernels are below `e^{-60}` of their peak and are dropped.
//! Outside `N_β` the time integral is evaluated directly.

use crate::error::{Error, Result};
use crate::hermite::hermite_poly_coeffs;
use crate::multi_index::MultiIndex;
use crate::quadrature::{adaptive, Integral, QuadValue, Tolerance};
use crate::regions::{m_fn, RegionSpec};
use crate::semigroup::{classical_heat, delta_dx_tbar, mehler_dt, mehler_dx, KernelQuery};
use crate::special::{cgamma, gamma, lower_gamma, one_minus_exp_neg, pairwise_sum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Accuracy and region settings shared by all kernel evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Relative accuracy requested from every time quadrature.
    pub rel_tol: f64,
    /// `β` of the local region `N_β` where the classical split is used.
    pub region_beta: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { rel_tol: 1e-11, region_beta: 4.0 / 3.0 }
    }
}

/// A kernel value split as `classical + remainder`.
///
/// `bare` is the homogeneous Euclidean kernel whose shell averages are known
/// in closed form; it equals `classical` except for `R̄_α`, where the
/// classical part carries the extra factor `e^{|y|²-|x|²}`. Outside the
/// local region `classical = bare = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParts<T> {
    pub classical: T,
    pub bare: T,
    pub remainder: T,
    pub error: f64,
}

impl<T: QuadValue> KernelParts<T> {
    pub fn total(&self) -> T {
        self.classical + self.remainder
    }

    fn direct(v: Integral<T>) -> Self {
        KernelParts { classical: T::default(), bare: T::default(), remainder: v.value, error: v.error }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let r = norm(&diff(x, y));
    if r == 0.0 {
        return Err(Error::Diagonal);
    }
    Ok(r)
}

fn check_alpha(alpha: &MultiIndex, n: usize) -> Result<()> {
    if alpha.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.dim() });
    }
    if alpha.is_zero() {
        return Err(Error::InvalidArgument("α must be nonzero".into()));
    }
    Ok(())
}

/// Lower time cut-off: below it `|a - e^{-t}b| ≥ r/2` and `s ≤ r²/240`, so both
/// heat kernels carry a factor `e^{-60}` or smaller.
fn time_floor(r: f64, moving: &[f64]) -> f64 {
    let m = norm(moving);
    let a = r * r / 480.0;
    if m > 0.0 {
        a.min(r / (2.0 * m))
    } else {
        a
    }
}

/// `∫_a^b f` after `t = e^u`.
fn log_segment<T: QuadValue>(f: &mut dyn FnMut(f64) -> T, a: f64, b: f64, tol: Tolerance) -> Result<Integral<T>> {
    if a >= b {
        return Ok(Integral { value: T::default(), error: 0.0, l1: 0.0, evaluations: 0 });
    }
    let mut g = |u: f64| {
        let t = u.exp();
        f(t) * t
    };
    adaptive(&mut g, a.ln(), b.ln(), tol)
}

/// `∫_lo^∞ f(t) dt` for `f` decaying like `e^{-λt}`: logarithmic variable on
/// `[lo, 1]`, linear beyond, cut where `|f(T)|/λ` is below a tenth of the
/// target accuracy. `min_cut` keeps the cut past any known late peak.
fn time_integral<T: QuadValue>(
    f: &mut dyn FnMut(f64) -> T,
    lo: f64,
    lambda: f64,
    min_cut: f64,
    tol: Tolerance,
) -> Result<Integral<T>> {
    let knee = lo.max(1.0);
    let half = Tolerance { abs: 0.5 * tol.abs, ..tol };
    let head = log_segment(f, lo, knee, half)?;
    let eff = tol.abs.max(tol.rel * head.value.magnitude()).max(tol.l1 * head.l1).max(f64::MIN_POSITIVE);
    let mut cut = (2.0 * knee).max(min_cut);
    let mut bound = f64::INFINITY;
    for _ in 0..80 {
        bound = f(cut).magnitude().max(f(0.9 * cut).magnitude()) / lambda;
        if bound <= 0.1 * eff {
            break;
        }
        cut *= 1.5;
    }
    if !(bound <= 0.1 * eff) {
        return Err(Error::NonConvergence(format!("time tail bound {bound:e} stays above {:e}", 0.1 * eff)));
    }
    let tail = adaptive(f, knee, cut, Tolerance { abs: 0.5 * eff, ..tol })?;
    let mut out = head.combine(tail);
    out.error += bound;
    Ok(out)
}

/// Time past which the Mehler kernel in `y` has peaked: `e^{-t} = ⟨x,y⟩/|y|²`.
fn late_peak(x: &[f64], y: &[f64]) -> f64 {
    let xy = dot(x, y);
    let y2 = dot(y, y);
    if xy > 0.0 && y2 > xy {
        2.0 * (y2 / xy).ln() + 1.0
    } else {
        0.0
    }
}

/// Tolerance for a remainder next to a classical part of size `scale`: relative
/// to the remainder itself, floored near the cancellation noise of `∂T - ∂W`.
fn tol_for(rel: f64, scale: f64) -> Tolerance {
    Tolerance { abs: 2e-13 * scale.abs(), rel, l1: rel }
}

/// Monomial coefficients (in `v`) of `∏ H_{α_i}(ω_i v)`.
fn hermite_direction_poly(alpha: &MultiIndex, omega: &[f64]) -> Vec<f64> {
    let mut acc = vec![1.0];
    for (&a, &w) in alpha.components().iter().zip(omega) {
        let c = hermite_poly_coeffs(a);
        let scaled: Vec<f64> = c.iter().enumerate().map(|(j, &cj)| cj * w.powi(j as i32)).collect();
        let mut next = vec![0.0; acc.len() + scaled.len() - 1];
        for (i, &p) in acc.iter().enumerate() {
            for (j, &q) in scaled.iter().enumerate() {
                next[i + j] += p * q;
            }
        }
        acc = next;
    }
    acc
}

fn classical_prefactor(alpha: &MultiIndex, n: usize, r: f64) -> f64 {
    let a = alpha.order() as f64;
    let sign = if alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
    sign * PI.powf(-0.5 * n as f64) * 2f64.powf(-0.5 * a) / gamma(0.5 * a) * r.powi(-(n as i32))
}

/// Closed form `ℝ_α(z) = (-1)^{|α|} π^{-n/2} 2^{-|α|/2} Γ(|α|/2)^{-1} |z|^{-n} Σ_j b_j Γ((n+j)/2)`,
/// where `b_j` are the coefficients of `∏ H_{α_i}(ω_i v)`, `ω = z/|z|`.
pub fn classical_riesz_closed(alpha: &MultiIndex, z: &[f64]) -> f64 {
    let n = z.len();
    let r = norm(z);
    let omega: Vec<f64> = z.iter().map(|a| a / r).collect();
    let b = hermite_direction_poly(alpha, &omega);
    let terms: Vec<f64> = b.iter().enumerate().map(|(j, &bj)| bj * gamma(0.5 * (n + j) as f64)).collect();
    classical_prefactor(alpha, n, r) * pairwise_sum(&terms)
}

/// `Γ(|α|/2)^{-1} ∫_0^∞ |∂^α W_t(z)| t^{|α|/2-1} dt` bounded above through `|b_j|`;
/// the size of the terms that cancel in `ℝ_α`.
fn classical_riesz_scale(alpha: &MultiIndex, z: &[f64]) -> f64 {
    let n = z.len();
    let r = norm(z);
    let omega: Vec<f64> = z.iter().map(|a| a / r).collect();
    let b = hermite_direction_poly(alpha, &omega);
    let terms: Vec<f64> = b.iter().enumerate().map(|(j, &bj)| bj.abs() * gamma(0.5 * (n + j) as f64)).collect();
    classical_prefactor(alpha, n, r).abs() * pairwise_sum(&terms)
}

/// `Γ(|α|/2)^{-1} ∫_{t₀}^∞ ∂^α W_t(z) t^{|α|/2-1} dt` in closed form.
fn classical_riesz_tail(alpha: &MultiIndex, z: &[f64], t0: f64) -> f64 {
    let n = z.len();
    let r = norm(z);
    let omega: Vec<f64> = z.iter().map(|a| a / r).collect();
    let b = hermite_direction_poly(alpha, &omega);
    let s0 = r * r / (2.0 * t0);
    let terms: Vec<f64> = b
        .iter()
        .enumerate()
        .map(|(j, &bj)| bj * lower_gamma(Complex64::new(0.5 * (n + j) as f64, 0.0), s0).re)
        .collect();
    classical_prefactor(alpha, n, r) * pairwise_sum(&terms)
}

/// Euclidean kernel `ℝ_α(x, y) = Γ(|α|/2)^{-1} ∫_0^∞ ∂^α W_t(x-y) t^{|α|/2-1} dt`
/// by quadrature in `s = |x-y|²/(2t)`.
pub fn classical_riesz_kernel(alpha: &MultiIndex, x: &[f64], y: &[f64]) -> Result<f64> {
    let r = check_pair(x, y)?;
    check_alpha(alpha, x.len())?;
    let n = x.len();
    let z = diff(x, y);
    let omega: Vec<f64> = z.iter().map(|a| a / r).collect();
    let b = hermite_direction_poly(alpha, &omega);
    let poly = |v: f64| b.iter().rev().fold(0.0, |acc, &c| acc * v + c);
    let spec = crate::quadrature::TimeIntegrandSpec::new(0.5, 1.0);
    let v = crate::quadrature::integrate_time(
        |s: f64| poly(s.sqrt()) * s.powf(0.5 * n as f64 - 1.0) * (-s).exp(),
        &spec,
        Tolerance::relative(1e-13).with_l1(1e-14),
    )?;
    Ok(classical_prefactor(alpha, n, r) * v.value)
}

/// First-order Euclidean Riesz kernel `-√2 Γ((n+1)/2) π^{-(n+1)/2} z_i / |z|^{n+1}`.
pub fn euclid_riesz_first(axis: usize, z: &[f64]) -> Result<f64> {
    let n = z.len();
    if axis >= n {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range for dimension {n}")));
    }
    let r = norm(z);
    if r == 0.0 {
        return Err(Error::Diagonal);
    }
    let nf = n as f64;
    Ok(-(2f64.sqrt()) * gamma(0.5 * (nf + 1.0)) * PI.powf(-0.5 * (nf + 1.0)) * z[axis] / r.powf(nf + 1.0))
}

/// Riesz kernel `R_α(x, y) = Γ(|α|/2)^{-1} ∫_0^∞ ∂_x^α T_t(x, y) t^{|α|/2-1} dt`.
pub fn riesz_kernel(alpha: &MultiIndex, x: &[f64], y: &[f64]) -> Result<f64> {
    riesz_parts(alpha, x, y, &KernelOptions::default()).map(|p| p.total())
}

pub fn riesz_kernel_with(alpha: &MultiIndex, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<f64> {
    riesz_parts(alpha, x, y, opts).map(|p| p.total())
}

pub fn riesz_parts(alpha: &MultiIndex, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<KernelParts<f64>> {
    let r = check_pair(x, y)?;
    let n = x.len();
    check_alpha(alpha, n)?;
    let a = 0.5 * alpha.order() as f64;
    let g = gamma(a);
    let lo = time_floor(r, y);
    let z = diff(x, y);
    let dt = |t: f64| mehler_dx(alpha, &KernelQuery { t, x, y }) * t.powf(a - 1.0) / g;
    let region = RegionSpec::new(opts.region_beta, n)?;
    if region.contains(x, y) {
        let t0 = m_fn(x);
        let classical = classical_riesz_closed(alpha, &z);
        let tol = tol_for(opts.rel_tol, classical_riesz_scale(alpha, &z));
        let mut dif = |t: f64| dt(t) - classical_heat(alpha, t, &z) * t.powf(a - 1.0) / g;
        let near = log_segment(&mut dif, lo, t0, tol)?;
        let mut full = dt;
        let far = time_integral(&mut full, t0, n as f64, late_peak(x, y), tol)?;
        let wtail = classical_riesz_tail(alpha, &z, t0);
        Ok(KernelParts {
            classical,
            bare: classical,
            remainder: near.value + far.value - wtail,
            error: near.error + far.error,
        })
    } else {
        let mut full = dt;
        let v = time_integral(&mut full, lo, n as f64, late_peak(x, y), tol_for(opts.rel_tol, 0.0))?;
        Ok(KernelParts::direct(v))
    }
}

/// `R_α(x, y) - ℝ_α(x - y)`.
pub fn riesz_difference(alpha: &MultiIndex, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<f64> {
    let p = riesz_parts(alpha, x, y, opts)?;
    if p.bare == 0.0 && p.classical == 0.0 {
        Ok(p.remainder - classical_riesz_closed(alpha, &diff(x, y)))
    } else {
        Ok(p.remainder)
    }
}

/// `R̄_α(x, y) - (-2)^{-|α|} e^{|y|²-|x|²} ℝ_α(x - y)`.
pub fn riesz_bar_difference(alpha: &MultiIndex, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<f64> {
    let p = riesz_bar_parts(alpha, x, y, opts)?;
    if p.bare == 0.0 && p.classical == 0.0 {
        let sign = if alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
        let j = sign * 2f64.powf(-(alpha.order() as f64)) * (dot(y, y) - dot(x, x)).exp() * classical_riesz_closed(alpha, &diff(x, y));
        Ok(p.remainder - j)
    } else {
        Ok(p.remainder)
    }
}

/// `R̄_α(x, y) = Γ(|α|/2)^{-1} ∫_0^∞ δ_x^α T̄_t(x, y) t^{|α|/2-1} dt`.
pub fn riesz_bar_kernel(alpha: &MultiIndex, x: &[f64], y: &[f64]) -> Result<f64> {
    riesz_bar_parts(alpha, x, y, &KernelOptions::default()).map(|p| p.total())
}

/// Near the diagonal `δ_x^α T̄_t ≈ 2^{-|α|} e^{|y|²-|x|²} (∂^α W_t)(y - x)`, so the
/// classical part is `(-2)^{-|α|} e^{|y|²-|x|²} ℝ_α(x - y)`.
pub fn riesz_bar_parts(alpha: &MultiIndex, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<KernelParts<f64>> {
    let r = check_pair(x, y)?;
    let n = x.len();
    check_alpha(alpha, n)?;
    let a = 0.5 * alpha.order() as f64;
    let g = gamma(a);
    let lo = time_floor(r, x);
    let z = diff(x, y);
    let zr: Vec<f64> = z.iter().map(|v| -v).collect();
    let lam = alpha.order() as f64;
    let dt = |t: f64| delta_dx_tbar(alpha, &KernelQuery { t, x, y }) * t.powf(a - 1.0) / g;
    let region = RegionSpec::new(opts.region_beta, n)?;
    let gauss = (dot(y, y) - dot(x, x)).exp();
    let scale = 2f64.powf(-lam);
    let peak = late_peak(y, x);
    if region.contains(x, y) {
        let t0 = m_fn(x);
        let sign = if alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
        let bare = sign * scale * classical_riesz_closed(alpha, &z);
        let classical = gauss * bare;
        let tol = tol_for(opts.rel_tol, gauss * scale * classical_riesz_scale(alpha, &z));
        let mut dif = |t: f64| dt(t) - scale * gauss * classical_heat(alpha, t, &zr) * t.powf(a - 1.0) / g;
        let near = log_segment(&mut dif, lo, t0, tol)?;
        let mut full = dt;
        let far = time_integral(&mut full, t0, lam, peak, tol)?;
        let wtail = sign * scale * gauss * classical_riesz_tail(alpha, &z, t0);
        Ok(KernelParts { classical, bare, remainder: near.value + far.value - wtail, error: near.error + far.error })
    } else {
        let mut full = dt;
        let v = time_integral(&mut full, lo, lam, peak, tol_for(opts.rel_tol, 0.0))?;
        Ok(KernelParts::direct(v))
    }
}

/// `M_β(x, y) = Γ(β)^{-1} ∫_0^∞ T_t(x, y) t^{β-1} dt`, evaluated after `s = 1 - e^{-2t}`:
/// `π^{-n/2} 2^{-β} Γ(β)^{-1} ∫_0^1 e^{-|x - y√(1-s)|²/s} s^{-n/2} (1-s)^{n/2-1} (-log(1-s))^{β-1} ds`.
///
/// The head `(0, 1/2]` is integrated in `log s`, the tail after `1 - s = w²`.
pub fn neg_power_kernel(beta: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    neg_power_kernel_with(beta, x, y, &KernelOptions::default())
}

pub fn neg_power_kernel_with(beta: f64, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("β must be positive, got {beta}")));
    }
    let n = x.len() as f64;
    let r = norm(&diff(x, y));
    let s_lo = if r == 0.0 {
        if beta <= 0.5 * n {
            return Err(Error::Diagonal);
        }
        1e-17f64.powf(1.0 / (beta - 0.5 * n))
    } else {
        (r * r / 240.0).min(r / (2.0 * norm(x).max(1e-300)))
    };
    let expo = |s: f64, q: f64| -> f64 {
        // |x - y q|² / s with q = √(1-s)
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - q * b).powi(2)).sum();
        -d2 / s
    };
    let tol = Tolerance { abs: 0.0, rel: opts.rel_tol, l1: opts.rel_tol };
    let mut head = |u: f64| {
        let s = u.exp();
        let q = (1.0 - s).sqrt();
        let lg = -(-s).ln_1p();
        (expo(s, q) - 0.5 * n * s.ln() + (0.5 * n - 1.0) * (-s).ln_1p() + (beta - 1.0) * lg.ln()).exp() * s
    };
    let h = if s_lo < 0.5 { adaptive(&mut head, s_lo.ln(), 0.5f64.ln(), tol)? } else { Integral { value: 0.0, error: 0.0, l1: 0.0, evaluations: 0 } };
    let w_hi = 0.5f64.sqrt();
    let mut tail = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let s = 1.0 - w * w;
        let lg = -2.0 * w.ln();
        2.0 * w.powf(n - 1.0) * (expo(s, w) - 0.5 * n * s.ln() + (beta - 1.0) * lg.ln()).exp()
    };
    let t = adaptive(&mut tail, 0.0, w_hi, Tolerance { abs: opts.rel_tol * h.value.abs(), ..tol })?;
    Ok(PI.powf(-0.5 * n) * 2f64.powf(-beta) / gamma(beta) * (h.value + t.value))
}

/// `K̄_β(x, y) = Γ(β)^{-1} ∫_0^∞ (T̄_t(x, y) - π^{-n/2} e^{-|x|²}) t^{β-1} dt`.
///
/// The subtracted ground-state term is `T̄_∞(x, y) = π^{-n/2} e^{-|x|²}`; the
/// difference is formed as `g₀ expm1(E)` to avoid cancellation at large `t`.
pub fn kbar_kernel(beta: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    kbar_kernel_with(beta, x, y, &KernelOptions::default())
}

pub fn kbar_kernel_with(beta: f64, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("β must be positive, got {beta}")));
    }
    let n = x.len() as f64;
    let r = norm(&diff(x, y));
    let lo = if r == 0.0 {
        if beta <= 0.5 * n {
            return Err(Error::Diagonal);
        }
        1e-17f64.powf(1.0 / (beta - 0.5 * n))
    } else {
        time_floor(r, x)
    };
    let x2 = dot(x, x);
    let y2 = dot(y, y);
    let xy = dot(x, y);
    let g0 = PI.powf(-0.5 * n) * (-x2).exp();
    let g = gamma(beta);
    let mut f = |t: f64| {
        let et = (-t).exp();
        let s = one_minus_exp_neg(2.0 * t);
        let e = et * (2.0 * xy - et * (x2 + y2)) / s - 0.5 * n * (-et * et).ln_1p();
        g0 * e.exp_m1() * t.powf(beta - 1.0) / g
    };
    let v = time_integral(&mut f, lo, 1.0, late_peak(y, x), tol_for(opts.rel_tol, 0.0))?;
    Ok(v.value - g0 * lo.powf(beta) / (beta * g))
}

/// `φ_γ(t) = t^{-iγ} / Γ(1 - iγ)`.
pub fn phi_gamma(gamma_: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -gamma_ * t.ln()) / cgamma(Complex64::new(1.0, -gamma_))
}

/// Euclidean imaginary-power kernel
/// `K_γ(z) = -iγ Γ(n/2 + iγ) / (Γ(1 - iγ) π^{n/2}) (|z|²/2)^{-iγ} |z|^{-n}`.
pub fn classical_imaginary_kernel(gamma_: f64, z: &[f64]) -> Complex64 {
    let n = z.len() as f64;
    let r = norm(z);
    let i = Complex64::i();
    let lead = -i * gamma_ * cgamma(Complex64::new(0.5 * n, gamma_)) / cgamma(Complex64::new(1.0, -gamma_));
    lead * PI.powf(-0.5 * n) * Complex64::from_polar(1.0, -gamma_ * (0.5 * r * r).ln()) * r.powf(-n)
}

/// `-∫_{t₀}^∞ φ_γ(t) ∂_t W_t(z) dt` in closed form.
fn classical_imaginary_tail(gamma_: f64, z: &[f64], t0: f64) -> Complex64 {
    let n = z.len() as f64;
    let r = norm(z);
    let s0 = r * r / (2.0 * t0);
    let a = Complex64::new(0.5 * n, gamma_);
    let bracket = lower_gamma(a, s0) * (-n) + lower_gamma(a + 1.0, s0) * 2.0;
    -0.5 * PI.powf(-0.5 * n) * r.powf(-n) * Complex64::from_polar(1.0, -gamma_ * (0.5 * r * r).ln()) * bracket
        / cgamma(Complex64::new(1.0, -gamma_))
}

/// `K_γ^𝒜(x, y) = -∫_0^∞ φ_γ(t) ∂_t T_t(x, y) dt`.
pub fn imaginary_kernel(gamma_: f64, x: &[f64], y: &[f64]) -> Result<Complex64> {
    imaginary_parts(gamma_, x, y, &KernelOptions::default()).map(|p| p.total())
}

pub fn imaginary_parts(gamma_: f64, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<KernelParts<Complex64>> {
    if gamma_ == 0.0 || !gamma_.is_finite() {
        return Err(Error::InvalidArgument(format!("γ must be nonzero and finite, got {gamma_}")));
    }
    let r = check_pair(x, y)?;
    let n = x.len();
    let lo = time_floor(r, y);
    let z = diff(x, y);
    let g1 = cgamma(Complex64::new(1.0, -gamma_));
    let phi = |t: f64| Complex64::from_polar(1.0, -gamma_ * t.ln()) / g1;
    let full = |t: f64| -phi(t) * mehler_dt(&KernelQuery { t, x, y });
    let region = RegionSpec::new(opts.region_beta, n)?;
    if region.contains(x, y) {
        let t0 = m_fn(x);
        let classical = classical_imaginary_kernel(gamma_, &z);
        let tol = tol_for(opts.rel_tol, classical.norm());
        let mut dif = |t: f64| -phi(t) * (mehler_dt(&KernelQuery { t, x, y }) - crate::semigroup::classical_heat_dt(t, &z));
        let near = log_segment(&mut dif, lo, t0, tol)?;
        let mut f = full;
        let far = time_integral(&mut f, t0, n as f64, late_peak(x, y), tol)?;
        let wtail = classical_imaginary_tail(gamma_, &z, t0);
        Ok(KernelParts {
            classical,
            bare: classical,
            remainder: near.value + far.value - wtail,
            error: near.error + far.error,
        })
    } else {
        let mut f = full;
        let v = time_integral(&mut f, lo, n as f64, late_peak(x, y), tol_for(opts.rel_tol, 0.0))?;
        Ok(KernelParts::direct(v))
    }
}

/// `K_γ^𝒜(x, y) - K_γ(x - y)`.
pub fn imaginary_difference(gamma_: f64, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<Complex64> {
    let p = imaginary_parts(gamma_, x, y, opts)?;
    if p.classical == Complex64::default() {
        Ok(p.remainder - classical_imaginary_kernel(gamma_, &diff(x, y)))
    } else {
        Ok(p.remainder)
    }
}

/// `∫_0^∞ |φ_γ(t)| |∂_t T_t(x, y)| dt`, the majorant of `|K_γ^𝒜|` used off the diagonal.
pub fn imaginary_majorant(gamma_: f64, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<f64> {
    let r = check_pair(x, y)?;
    let n = x.len() as f64;
    let lo = time_floor(r, y);
    let c = 1.0 / cgamma(Complex64::new(1.0, -gamma_)).norm();
    let mut f = |t: f64| c * mehler_dt(&KernelQuery { t, x, y }).abs();
    let v = time_integral(&mut f, lo, n, late_peak(x, y), tol_for(opts.rel_tol, 0.0))?;
    Ok(v.value)
}

/// Correction `α(ε) = Γ(n/2)^{-1} ∫_0^∞ φ_γ(ε²/(2u)) e^{-u} u^{n/2-1} du`
/// `= (ε²/2)^{-iγ} Γ(n/2 + iγ) / (Γ(n/2) Γ(1 - iγ))`.
///
/// This is the normalisation that matches `W_t(z) = (2πt)^{-n/2} e^{-|z|²/(2t)}`:
/// it equals `-∫_{|z|>ε} K_γ(z) dz`.
pub fn alpha_eps(gamma_: f64, n: usize, eps: f64) -> Result<Complex64> {
    alpha_eps_scaled(gamma_, n, eps, 2.0)
}

/// `α(ε)` with `φ_γ(ε²/(scale·u))`; `scale = 4` is the heat kernel of `Δ`.
pub fn alpha_eps_scaled(gamma_: f64, n: usize, eps: f64, scale: f64) -> Result<Complex64> {
    if gamma_ == 0.0 || !gamma_.is_finite() {
        return Err(Error::InvalidArgument(format!("γ must be nonzero and finite, got {gamma_}")));
    }
    if !(eps > 0.0) || n == 0 || !(scale > 0.0) {
        return Err(Error::InvalidArgument("α(ε) needs ε > 0, n ≥ 1 and a positive scale".into()));
    }
    let nh = 0.5 * n as f64;
    Ok(Complex64::from_polar(1.0, -gamma_ * (eps * eps / scale).ln()) * cgamma(Complex64::new(nh, gamma_))
        / (gamma(nh) * cgamma(Complex64::new(1.0, -gamma_))))
}

/// `α(ε)` by quadrature of its defining `u`-integral.
pub fn alpha_eps_quadrature(gamma_: f64, n: usize, eps: f64, scale: f64, tol: f64) -> Result<Complex64> {
    let nh = 0.5 * n as f64;
    let spec = crate::quadrature::TimeIntegrandSpec::new(nh, 1.0);
    let v = crate::quadrature::integrate_time(
        |u: f64| phi_gamma(gamma_, eps * eps / (scale * u)) * ((-u).exp() * u.powf(nh - 1.0)),
        &spec,
        Tolerance::absolute(tol).with_l1(tol),
    )?;
    Ok(v.value / gamma(nh))
}

/// Quantities used by the global bounds: `a = |x|²+|y|²`, `b = 2⟨x,y⟩`,
/// `s₀ = 2√(a²-b²)/(a+√(a²-b²))`, `u₀ = (|y|²-|x|²)/2 + |x+y||x-y|/2`, and the angle `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalBoundParams {
    pub a: f64,
    pub b: f64,
    pub s0: f64,
    pub u0: f64,
    pub theta: f64,
}

impl GlobalBoundParams {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let x2 = dot(x, x);
        let y2 = dot(y, y);
        let a = x2 + y2;
        let b = 2.0 * dot(x, y);
        let d = (a * a - b * b).max(0.0).sqrt();
        let s0 = if a > 0.0 { 2.0 * d / (a + d) } else { 0.0 };
        let sum: Vec<f64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
        let u0 = 0.5 * (y2 - x2) + 0.5 * norm(&sum) * norm(&diff(x, y));
        GlobalBoundParams { a, b, s0, u0, theta: crate::regions::angle(x, y) }
    }
}
