//! Hermite polynomials, the weighted functions `H̃_k(x) = e^{-|x|²} H_k(x)`,
//! their norms in `L²(γ₋₁)`, and the analysis/synthesis transform.
//!
//! `γ₋₁` has density `π^{n/2} e^{|x|²}`, so
//! `‖H̃_k‖² = πⁿ 2^{|k|} ∏ k_i!` and
//! `c_k(f) = π^{n/2} ‖H̃_k‖^{-2} ∫ f(y) H_k(y) dy`.

use crate::error::{Error, Result};
use crate::multi_index::{count_up_to, graded_indices, MultiIndex};
use crate::quadrature::gauss_hermite_rule;
use crate::special::{factorial, pairwise_sum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Physicists' Hermite polynomial `H_m(z)` by the three-term recurrence.
pub fn hermite_poly(m: u32, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * z);
    if m == 0 {
        return prev;
    }
    for j in 1..m {
        let next = 2.0 * z * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `h_j(z) = H_j(z) e^{-z²/2}` for `j = 0..=max` by the weighted recurrence.
pub fn hermite_weighted_table(max: u32, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    let h0 = (-0.5 * z * z).exp();
    out.push(h0);
    if max == 0 {
        return out;
    }
    out.push(2.0 * z * h0);
    for j in 1..max as usize {
        let next = 2.0 * z * out[j] - 2.0 * j as f64 * out[j - 1];
        out.push(next);
    }
    out
}

/// `H̃_j(z)` for `j = 0..=max`.
pub fn hermite_tilde_table(max: u32, z: f64) -> Vec<f64> {
    let env = (-0.5 * z * z).exp();
    let mut t = hermite_weighted_table(max, z);
    for v in &mut t {
        *v *= env;
    }
    t
}

/// One-dimensional `H̃_m(z) = e^{-z²} H_m(z)`.
pub fn hermite_tilde_1d(m: u32, z: f64) -> f64 {
    let h = hermite_weighted_table(m, z);
    h[m as usize] * (-0.5 * z * z).exp()
}

/// `H̃_k(x) = ∏ H̃_{k_i}(x_i)`.
pub fn hermite_tilde(k: &MultiIndex, x: &[f64]) -> f64 {
    assert_eq!(k.dim(), x.len(), "dimension mismatch");
    k.components()
        .iter()
        .zip(x)
        .map(|(&m, &z)| hermite_tilde_1d(m, z))
        .product()
}

/// Squared norm `‖H̃_k‖² = πⁿ 2^{|k|} ∏ k_i!` in `L²(γ₋₁)`.
pub fn hermite_tilde_norm_sq(k: &MultiIndex) -> f64 {
    let n = k.dim() as f64;
    let fact: f64 = k.components().iter().map(|&m| factorial(m)).product();
    PI.powf(n) * 2f64.powi(k.order() as i32) * fact
}

/// `‖H̃_k‖ = π^{n/2} 2^{|k|/2} (∏ k_i!)^{1/2}`.
pub fn hermite_tilde_norm(k: &MultiIndex) -> f64 {
    hermite_tilde_norm_sq(k).sqrt()
}

/// Growth envelope `2 √(j!) 2^{j/2} e^{z²/2}` dominating `|H_j(z)|`.
pub fn hermite_growth_bound(j: u32, z: f64) -> f64 {
    2.0 * factorial(j).sqrt() * 2f64.powf(j as f64 / 2.0) * (0.5 * z * z).exp()
}

/// Monomial coefficients of `H_m`, lowest degree first.
pub fn hermite_poly_coeffs(m: u32) -> Vec<f64> {
    let mut prev = vec![1.0];
    if m == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for j in 1..m as usize {
        let mut next = vec![0.0; j + 2];
        for (d, &c) in cur.iter().enumerate() {
            next[d + 1] += 2.0 * c;
        }
        for (d, &c) in prev.iter().enumerate() {
            next[d] -= 2.0 * j as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// One monomial term `coeff · ∏ x_i^{exponents_i}` of a polynomial payload.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff_re: f64,
    #[serde(default)]
    pub coeff_im: f64,
}

impl Term {
    pub fn coeff(&self) -> Complex64 {
        Complex64::new(self.coeff_re, self.coeff_im)
    }
}

type Sampler = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum Payload {
    Polynomial(Vec<Term>),
    Sampled(Sampler),
}

/// `f(x) = g(x) e^{-|x|²}` with `g` polynomial or sampled.
#[derive(Clone)]
pub struct EnvelopedFunction {
    dim: usize,
    payload: Payload,
}

impl fmt::Debug for EnvelopedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Polynomial(t) => write!(f, "EnvelopedFunction(dim={}, {} terms)", self.dim, t.len()),
            Payload::Sampled(_) => write!(f, "EnvelopedFunction(dim={}, sampled)", self.dim),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PolynomialJson {
    dim: usize,
    terms: Vec<Term>,
}

impl EnvelopedFunction {
    pub fn polynomial(dim: usize, terms: Vec<Term>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        for t in &terms {
            if t.exponents.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: t.exponents.len() });
            }
            if !t.coeff_re.is_finite() || !t.coeff_im.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
        }
        Ok(EnvelopedFunction { dim, payload: Payload::Polynomial(terms) })
    }

    /// `g` supplied as a callable; `f = g e^{-|x|²}`.
    pub fn sampled<F>(dim: usize, g: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        EnvelopedFunction { dim, payload: Payload::Sampled(Arc::new(g)) }
    }

    /// The function `Σ c_k H̃_k` written as `(Σ c_k H_k) e^{-|x|²}` in monomials.
    pub fn from_expansion(e: &HermiteExpansion) -> Self {
        let n = e.dim();
        let coeffs: Vec<Vec<f64>> = (0..=e.degree_cap()).map(hermite_poly_coeffs).collect();
        let mut acc: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (k, c) in e.iter() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), 1.0)];
            for &m in k.components() {
                let mut next = Vec::new();
                for (exps, w) in &partial {
                    for (d, &h) in coeffs[m as usize].iter().enumerate() {
                        if h != 0.0 {
                            let mut ex = exps.clone();
                            ex.push(d as u32);
                            next.push((ex, w * h));
                        }
                    }
                }
                partial = next;
            }
            for (ex, w) in partial {
                *acc.entry(ex).or_insert(Complex64::new(0.0, 0.0)) += c * w;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(exponents, c)| Term { exponents, coeff_re: c.re, coeff_im: c.im })
            .collect();
        EnvelopedFunction { dim: n, payload: Payload::Polynomial(terms) }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: PolynomialJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed function JSON: {e}")))?;
        Self::polynomial(p.dim, p.terms)
    }

    /// JSON form of a polynomial payload (`None` for sampled payloads).
    pub fn to_json(&self) -> Option<String> {
        match &self.payload {
            Payload::Polynomial(terms) => {
                serde_json::to_string(&PolynomialJson { dim: self.dim, terms: terms.clone() }).ok()
            }
            Payload::Sampled(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    /// Polynomial degree of `g`, when known.
    pub fn degree(&self) -> Option<u32> {
        match &self.payload {
            Payload::Polynomial(t) => Some(t.iter().map(|t| t.exponents.iter().sum::<u32>()).max().unwrap_or(0)),
            Payload::Sampled(_) => None,
        }
    }

    /// `g(x)`.
    pub fn eval_g(&self, x: &[f64]) -> Complex64 {
        match &self.payload {
            Payload::Polynomial(terms) => {
                let mut s = Complex64::new(0.0, 0.0);
                for t in terms {
                    let mono: f64 = t.exponents.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
                    s += t.coeff() * mono;
                }
                s
            }
            Payload::Sampled(g) => g(x),
        }
    }

    /// `f(x) = g(x) e^{-|x|²}`, envelope applied once.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.eval_g(x) * (-r2).exp()
    }
}

/// Finite expansion `Σ_{|k| ≤ K} c_k H̃_k` stored densely in graded lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteExpansion {
    dim: usize,
    cap: u32,
    coeffs: Vec<Complex64>,
}

impl HermiteExpansion {
    pub fn zeros(dim: usize, cap: u32) -> Self {
        HermiteExpansion { dim, cap, coeffs: vec![Complex64::new(0.0, 0.0); count_up_to(dim, cap as isize)] }
    }

    /// Build from explicit `(k, c_k)` pairs; the cap is the largest order seen
    /// unless `cap` is larger.
    pub fn from_pairs(dim: usize, cap: u32, pairs: &[(MultiIndex, Complex64)]) -> Result<Self> {
        let cap = pairs.iter().map(|(k, _)| k.order()).max().unwrap_or(0).max(cap);
        let mut e = Self::zeros(dim, cap);
        for (k, c) in pairs {
            e.set(k, *c)?;
        }
        Ok(e)
    }

    /// Convenience constructor for real coefficients.
    pub fn from_real(dim: usize, pairs: &[(&[u32], f64)]) -> Result<Self> {
        let p: Vec<(MultiIndex, Complex64)> = pairs
            .iter()
            .map(|(k, c)| (MultiIndex::new(k.to_vec()), Complex64::new(*c, 0.0)))
            .collect();
        Self::from_pairs(dim, 0, &p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree_cap(&self) -> u32 {
        self.cap
    }

    pub fn coeff(&self, k: &MultiIndex) -> Complex64 {
        if k.dim() != self.dim || k.order() > self.cap {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[k.rank()]
    }

    pub fn set(&mut self, k: &MultiIndex, c: Complex64) -> Result<()> {
        if k.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: k.dim() });
        }
        if k.order() > self.cap {
            return Err(Error::InvalidArgument(format!("index {k} exceeds degree cap {}", self.cap)));
        }
        let r = k.rank();
        self.coeffs[r] = c;
        Ok(())
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `(k, c_k)` in graded lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        graded_indices(self.dim, self.cap).into_iter().zip(self.coeffs.iter().copied())
    }

    /// Squared `L²(γ₋₁)` norm by Parseval.
    pub fn norm_sq(&self) -> f64 {
        let terms: Vec<f64> = self.iter().map(|(k, c)| c.norm_sqr() * hermite_tilde_norm_sq(&k)).collect();
        pairwise_sum(&terms)
    }

    /// Copy with a (possibly larger) cap.
    pub fn with_cap(&self, cap: u32) -> HermiteExpansion {
        let mut out = Self::zeros(self.dim, cap);
        for (k, c) in self.iter() {
            if k.order() <= cap {
                out.coeffs[k.rank()] = c;
            }
        }
        out
    }

    /// Largest `|k|` carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> u32 {
        self.iter().filter(|(_, c)| c.norm() > 0.0).map(|(k, _)| k.order()).max().unwrap_or(0)
    }

    pub fn max_abs_diff(&self, other: &HermiteExpansion) -> f64 {
        let cap = self.cap.max(other.cap);
        let a = self.with_cap(cap);
        let b = other.with_cap(cap);
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

/// Options for [`analyze_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyzeOptions {
    /// Gauss–Hermite order per axis; defaults to `K + 12`.
    pub order: Option<usize>,
    /// Fail when some `|c_k|` with `|k| = K` exceeds this value.
    pub tail_tolerance: Option<f64>,
}

/// Coefficients `c_k` for `|k| ≤ K` by tensor Gauss–Hermite quadrature.
pub fn analyze(f: &EnvelopedFunction, cap: u32) -> Result<HermiteExpansion> {
    analyze_with(f, cap, AnalyzeOptions::default())
}

pub fn analyze_with(f: &EnvelopedFunction, cap: u32, opts: AnalyzeOptions) -> Result<HermiteExpansion> {
    let n = f.dim();
    let order = opts.order.unwrap_or(cap as usize + 12);
    let rule = gauss_hermite_rule(order)?;
    let q = rule.nodes.len();
    let kk = cap as usize + 1;

    // Tensor samples of g at the nodes, axis 0 slowest.
    let total = q.pow(n as u32);
    let mut data = Vec::with_capacity(total);
    let mut point = vec![0.0; n];
    for flat in 0..total {
        let mut rem = flat;
        for axis in (0..n).rev() {
            point[axis] = rule.nodes[rem % q];
            rem /= q;
        }
        data.push(f.eval_g(&point));
    }

    // Contraction matrix M[k][j] = w_j H_k(y_j), evaluated as (w_j e^{y_j²/2}) h_k(y_j).
    let mut m = vec![0.0; kk * q];
    for j in 0..q {
        let y = rule.nodes[j];
        let scale = rule.weights[j] * (0.5 * y * y).exp();
        let h = hermite_weighted_table(cap, y);
        for k in 0..kk {
            m[k * q + j] = scale * h[k];
        }
    }

    let mut dims = vec![q; n];
    for axis in 0..n {
        data = contract_axis(&data, &dims, axis, &m, kk);
        dims[axis] = kk;
    }

    let mut e = HermiteExpansion::zeros(n, cap);
    let norm_pref = PI.powf(n as f64 / 2.0);
    for (slot, k) in graded_indices(n, cap).iter().enumerate() {
        let mut flat = 0;
        for &c in k.components() {
            flat = flat * kk + c as usize;
        }
        e.coeffs[slot] = data[flat] * (norm_pref / hermite_tilde_norm_sq(k));
    }

    if let Some(tol) = opts.tail_tolerance {
        let tail = e.iter().filter(|(k, _)| k.order() == cap).map(|(_, c)| c.norm()).fold(0.0, f64::max);
        if tail > tol {
            return Err(Error::TruncationTail { magnitude: tail, tolerance: tol });
        }
    }
    Ok(e)
}

fn contract_axis(data: &[Complex64], dims: &[usize], axis: usize, m: &[f64], kk: usize) -> Vec<Complex64> {
    let q = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * kk * inner];
    for o in 0..outer {
        for k in 0..kk {
            let row = &m[k * q..(k + 1) * q];
            for i in 0..inner {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &w) in row.iter().enumerate() {
                    acc += data[(o * q + j) * inner + i] * w;
                }
                out[(o * kk + k) * inner + i] = acc;
            }
        }
    }
    out
}

/// `Σ c_k H̃_k(x)`, summed pairwise in graded lexicographic order.
pub fn synthesize(e: &HermiteExpansion, x: &[f64]) -> Complex64 {
    assert_eq!(e.dim(), x.len(), "dimension mismatch");
    let tables: Vec<Vec<f64>> = x.iter().map(|&z| hermite_tilde_table(e.degree_cap(), z)).collect();
    let terms: Vec<Complex64> = e
        .iter()
        .map(|(k, c)| {
            let v: f64 = k.components().iter().enumerate().map(|(i, &m)| tables[i][m as usize]).product();
            c * v
        })
        .collect();
    pairwise_sum(&terms)
}
