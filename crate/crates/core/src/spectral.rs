//! Operators acting diagonally (up to an index shift) on Hermite expansions.

use crate::error::{Error, Result};
use crate::hermite::HermiteExpansion;
use crate::multi_index::MultiIndex;
use crate::special::falling_factorial;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Spectral operators with their coefficient rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SpectralOp {
    /// `𝒜 H̃_k = (|k| + n) H̃_k`.
    Generator,
    /// `𝒜̄ H̃_k = |k| H̃_k`.
    GeneratorBar,
    /// `T_t^𝒜`.
    Heat { t: f64 },
    /// `𝒜^{-β}`.
    NegPower { beta: f64 },
    /// `R_α = ∂^α 𝒜^{-|α|/2}`.
    Riesz { alpha: MultiIndex },
    /// `∂_{x_i}`, which sends `H̃_k` to `-H̃_{k+e_i}`.
    Derivative { axis: usize },
    /// `δ_i = -½ e^{-x_i²} ∂_i e^{x_i²}`, which sends `H̃_k` to `-k_i H̃_{k-e_i}`.
    Delta { axis: usize },
    /// `R̄_α = δ^α 𝒜̄^{-|α|/2}` on `L²_0`.
    RieszBar { alpha: MultiIndex },
    /// `𝒜^{iγ}`.
    ImaginaryPower { gamma: f64 },
    /// `Π₀`, removing the `H̃_0` component.
    ProjectL0,
}

impl SpectralOp {
    pub fn apply(&self, e: &HermiteExpansion) -> Result<HermiteExpansion> {
        match self {
            SpectralOp::Generator => Ok(generator_apply(e)),
            SpectralOp::GeneratorBar => Ok(generator_bar_apply(e)),
            SpectralOp::Heat { t } => heat_apply(e, *t),
            SpectralOp::NegPower { beta } => neg_power_apply(e, *beta),
            SpectralOp::Riesz { alpha } => riesz_apply(e, alpha),
            SpectralOp::Derivative { axis } => derivative_apply(e, *axis),
            SpectralOp::Delta { axis } => delta_apply(e, *axis),
            SpectralOp::RieszBar { alpha } => riesz_bar_apply(e, alpha),
            SpectralOp::ImaginaryPower { gamma } => imaginary_power_apply(e, *gamma),
            SpectralOp::ProjectL0 => Ok(project_l0(e)),
        }
    }
}

fn diagonal(e: &HermiteExpansion, mult: impl Fn(&MultiIndex) -> Complex64) -> HermiteExpansion {
    let mut out = HermiteExpansion::zeros(e.dim(), e.degree_cap());
    for (k, c) in e.iter() {
        out.set(&k, c * mult(&k)).expect("same index set");
    }
    out
}

fn check_alpha(e: &HermiteExpansion, alpha: &MultiIndex) -> Result<()> {
    if alpha.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), got: alpha.dim() });
    }
    if alpha.is_zero() {
        return Err(Error::InvalidArgument("α must be nonzero".into()));
    }
    Ok(())
}

fn check_axis(e: &HermiteExpansion, axis: usize) -> Result<()> {
    if axis >= e.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range for dimension {}", e.dim())));
    }
    Ok(())
}

fn eigenvalue(k: &MultiIndex) -> f64 {
    (k.order() as usize + k.dim()) as f64
}

pub fn generator_apply(e: &HermiteExpansion) -> HermiteExpansion {
    diagonal(e, |k| Complex64::new(eigenvalue(k), 0.0))
}

pub fn generator_bar_apply(e: &HermiteExpansion) -> HermiteExpansion {
    diagonal(e, |k| Complex64::new(k.order() as f64, 0.0))
}

/// `c_k ↦ e^{-(|k|+n)t} c_k`.
pub fn heat_apply(e: &HermiteExpansion, t: f64) -> Result<HermiteExpansion> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    Ok(diagonal(e, |k| Complex64::new((-eigenvalue(k) * t).exp(), 0.0)))
}

/// `c_k ↦ (|k|+n)^{-β} c_k`.
pub fn neg_power_apply(e: &HermiteExpansion, beta: f64) -> Result<HermiteExpansion> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("β must be positive, got {beta}")));
    }
    Ok(diagonal(e, |k| Complex64::new(eigenvalue(k).powf(-beta), 0.0)))
}

/// `c_k ↦ (|k|+n)^{iγ} c_k`.
pub fn imaginary_power_apply(e: &HermiteExpansion, gamma: f64) -> Result<HermiteExpansion> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("γ must be nonzero and finite, got {gamma}")));
    }
    Ok(diagonal(e, |k| Complex64::from_polar(1.0, gamma * eigenvalue(k).ln())))
}

/// Sets `c_0 = 0`.
pub fn project_l0(e: &HermiteExpansion) -> HermiteExpansion {
    let mut out = e.clone();
    out.set(&MultiIndex::zero(e.dim()), Complex64::new(0.0, 0.0)).expect("zero index is always present");
    out
}

/// `∂_{x_i}`: `c_k H̃_k ↦ -c_k H̃_{k+e_i}`; the cap grows by one.
pub fn derivative_apply(e: &HermiteExpansion, axis: usize) -> Result<HermiteExpansion> {
    check_axis(e, axis)?;
    let unit = MultiIndex::unit(e.dim(), axis);
    let mut out = HermiteExpansion::zeros(e.dim(), e.degree_cap() + 1);
    for (k, c) in e.iter() {
        out.set(&k.add(&unit), -c)?;
    }
    Ok(out)
}

/// `R_α`: `c_k H̃_k ↦ (-1)^{|α|} (|k|+n)^{-|α|/2} c_k H̃_{k+α}`; the cap grows by `|α|`.
pub fn riesz_apply(e: &HermiteExpansion, alpha: &MultiIndex) -> Result<HermiteExpansion> {
    check_alpha(e, alpha)?;
    let a = alpha.order();
    let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = HermiteExpansion::zeros(e.dim(), e.degree_cap() + a);
    for (k, c) in e.iter() {
        out.set(&k.add(alpha), c * (sign * eigenvalue(&k).powf(-0.5 * a as f64)))?;
    }
    Ok(out)
}

/// `δ_i`: `c_k H̃_k ↦ -k_i c_k H̃_{k-e_i}`.
pub fn delta_apply(e: &HermiteExpansion, axis: usize) -> Result<HermiteExpansion> {
    check_axis(e, axis)?;
    let unit = MultiIndex::unit(e.dim(), axis);
    let mut out = HermiteExpansion::zeros(e.dim(), e.degree_cap().saturating_sub(1));
    for (k, c) in e.iter() {
        if let Some(j) = k.checked_sub(&unit) {
            out.set(&j, c * -(k.components()[axis] as f64))?;
        }
    }
    Ok(out)
}

/// `R̄_α`: for `k ≥ α`, `k ≠ 0`, `c_k H̃_k ↦ (-1)^{|α|} |k|^{-|α|/2} ∏ k_i!/(k_i - α_i)! · c_k H̃_{k-α}`;
/// every other term vanishes.
pub fn riesz_bar_apply(e: &HermiteExpansion, alpha: &MultiIndex) -> Result<HermiteExpansion> {
    check_alpha(e, alpha)?;
    let a = alpha.order();
    let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = HermiteExpansion::zeros(e.dim(), e.degree_cap().saturating_sub(a));
    for (k, c) in e.iter() {
        if k.is_zero() {
            continue;
        }
        if let Some(j) = k.checked_sub(alpha) {
            let ratio: f64 = k
                .components()
                .iter()
                .zip(alpha.components())
                .map(|(&ki, &ai)| falling_factorial(ki, ai))
                .product();
            let m = sign * (k.order() as f64).powf(-0.5 * a as f64) * ratio;
            out.set(&j, c * m)?;
        }
    }
    Ok(out)
}

/// `sup_{|k| ≤ K} ‖H̃_{k+α}‖ / ((|k|+n)^{|α|/2} ‖H̃_k‖)`, an `L²(γ₋₁)` bound for
/// `R_α` on expansions of degree at most `K`.
pub fn riesz_l2_bound(n: usize, alpha: &MultiIndex, cap: u32) -> f64 {
    use crate::hermite::hermite_tilde_norm_sq;
    crate::multi_index::graded_indices(n, cap)
        .iter()
        .map(|k| {
            let r = hermite_tilde_norm_sq(&k.add(alpha)) / (eigenvalue(k).powf(alpha.order() as f64) * hermite_tilde_norm_sq(k));
            r.sqrt()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{LN_2, PI};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn single(n: usize, k: &[u32], c: f64) -> HermiteExpansion {
        HermiteExpansion::from_real(n, &[(k, c)]).unwrap()
    }

    #[test]
    fn generator_examples() {
        assert_eq!(generator_apply(&single(1, &[0], 1.0)).coeff(&mi(&[0])).re, 1.0);
        let e = single(2, &[1, 1], 3.0);
        assert_eq!(generator_apply(&e).coeff(&mi(&[1, 1])).re, 12.0);
        assert_eq!(generator_bar_apply(&e).coeff(&mi(&[1, 1])).re, 6.0);
    }

    #[test]
    fn heat_examples() {
        let e = single(1, &[2], 1.0);
        assert_eq!(heat_apply(&e, 0.0).unwrap(), e);
        assert_relative_eq!(heat_apply(&e, LN_2).unwrap().coeff(&mi(&[2])).re, 0.125, max_relative = 1e-15);
        let e = HermiteExpansion::from_real(2, &[(&[0, 0], 1.0), (&[1, 2], -0.5), (&[3, 0], 2.0)]).unwrap();
        let h = heat_apply(&e, 0.3).unwrap();
        assert!(h.norm_sq().sqrt() <= (-0.6f64).exp() * e.norm_sq().sqrt());
    }

    #[test]
    fn neg_power_examples() {
        assert_eq!(neg_power_apply(&single(1, &[0], 1.0), 5.0).unwrap().coeff(&mi(&[0])).re, 1.0);
        assert_eq!(neg_power_apply(&single(1, &[1], 1.0), 2.0).unwrap().coeff(&mi(&[1])).re, 0.25);
        let e = HermiteExpansion::from_real(1, &[(&[0], 1.0), (&[3], 1.0)]).unwrap();
        let a = neg_power_apply(&neg_power_apply(&e, 0.5).unwrap(), 1.5).unwrap();
        let b = neg_power_apply(&e, 2.0).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-16);
        assert!(neg_power_apply(&e, 0.0).is_err());
    }

    #[test]
    fn riesz_examples() {
        let r = riesz_apply(&single(1, &[0], 1.0), &mi(&[1])).unwrap();
        assert_eq!(r.coeff(&mi(&[1])).re, -1.0);
        let r = riesz_apply(&single(2, &[0, 0], 1.0), &mi(&[1, 1])).unwrap();
        assert_eq!(r.coeff(&mi(&[1, 1])).re, 0.5);
        let r = riesz_apply(&single(2, &[1, 0], 1.0), &mi(&[2, 0])).unwrap();
        assert_relative_eq!(r.coeff(&mi(&[3, 0])).re, 1.0 / 3.0, max_relative = 1e-15);
        assert!(riesz_apply(&single(1, &[0], 1.0), &mi(&[0])).is_err());
    }

    #[test]
    fn delta_and_riesz_bar_examples() {
        let d = delta_apply(&single(1, &[2], 1.0), 0).unwrap();
        assert_eq!(d.coeff(&mi(&[1])).re, -2.0);
        let r = riesz_bar_apply(&single(1, &[3], 1.0), &mi(&[1])).unwrap();
        assert_relative_eq!(r.coeff(&mi(&[2])).re, -(3f64).sqrt(), max_relative = 1e-15);
        let r = riesz_bar_apply(&single(1, &[1], 1.0), &mi(&[2])).unwrap();
        assert_eq!(r.norm_sq(), 0.0);
    }

    #[test]
    fn imaginary_examples() {
        let e = HermiteExpansion::from_real(1, &[(&[0], 1.0), (&[1], 1.0), (&[5], 0.3)]).unwrap();
        let r = imaginary_power_apply(&e, PI / LN_2).unwrap();
        assert_relative_eq!(r.coeff(&mi(&[0])).re, 1.0, max_relative = 1e-15);
        assert!((r.coeff(&mi(&[1])) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert_relative_eq!(r.norm_sq(), e.norm_sq(), max_relative = 1e-14);
    }

    #[test]
    fn projection() {
        let e = HermiteExpansion::from_real(1, &[(&[0], 5.0), (&[1], 1.0)]).unwrap();
        let p = project_l0(&e);
        assert_eq!(p.coeff(&mi(&[0])).re, 0.0);
        assert_eq!(p.coeff(&mi(&[1])).re, 1.0);
        assert_eq!(project_l0(&p), p);
        let a = mi(&[1]);
        assert_eq!(riesz_bar_apply(&p, &a).unwrap(), riesz_bar_apply(&e, &a).unwrap());
    }

    #[test]
    fn op_enum_round_trips_through_json() {
        let op = SpectralOp::Riesz { alpha: mi(&[1, 1]) };
        let s = serde_json::to_string(&op).unwrap();
        assert_eq!(serde_json::from_str::<SpectralOp>(&s).unwrap(), op);
    }
}
