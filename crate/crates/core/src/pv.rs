//! Principal-value application of the singular operators.
//!
//! With `h(r) = r^{n-1} ∫_{S^{n-1}} K(x, x+rω) f(x+rω) dω` the truncated
//! integrals are `S(ε) = ∫_ε^R h`. The limit is taken through the subtracted
//! integrand
//!
//! ```text
//! h̃(r) = r^{n-1} ∫ [K(x, y) f(y) - K₀(x - y) f(x)] dω,
//! ```
//!
//! where `K₀` is the homogeneous Euclidean kernel. For Riesz kernels `K₀` has
//! zero shell means, so `lim S(δ) = S(ε) + ∫_0^ε h̃`; for imaginary powers the
//! shell means of `K_γ` produce exactly the `α(ε)` correction. The geometric
//! ladder `ε_j = ε₀ 2^{-j}` is kept and extrapolated as an independent
//! cross-check.

use crate::error::{Error, Result};
use crate::hermite::{hermite_poly_coeffs, EnvelopedFunction};
use crate::kernels::{
    alpha_eps_scaled, imaginary_parts, neg_power_kernel_with, riesz_bar_parts, riesz_parts, KernelOptions,
    KernelParts,
};
use crate::multi_index::MultiIndex;
use crate::quadrature::{adaptive, gauss_legendre_rule, Integral, Tolerance};
use crate::regions::m_fn;
use crate::special::{gamma, pairwise_sum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

/// Singular kernels that can be applied as principal values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum PvKernel {
    Riesz { alpha: MultiIndex },
    RieszBar { alpha: MultiIndex },
    Imaginary { gamma: f64 },
    NegPower { beta: f64 },
}

impl PvKernel {
    fn check(&self, n: usize) -> Result<()> {
        match self {
            PvKernel::Riesz { alpha } | PvKernel::RieszBar { alpha } => {
                if alpha.dim() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: alpha.dim() });
                }
                if alpha.is_zero() {
                    return Err(Error::InvalidArgument("α must be nonzero".into()));
                }
            }
            PvKernel::Imaginary { gamma } => {
                if *gamma == 0.0 || !gamma.is_finite() {
                    return Err(Error::InvalidArgument(format!("γ must be nonzero and finite, got {gamma}")));
                }
            }
            PvKernel::NegPower { beta } => {
                if !(*beta > 0.0) {
                    return Err(Error::InvalidArgument(format!("β must be positive, got {beta}")));
                }
            }
        }
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidArgument(format!("principal values are implemented for n ≤ 3, got {n}")));
        }
        Ok(())
    }

    fn parts(&self, x: &[f64], y: &[f64], opts: &KernelOptions) -> Result<KernelParts<Complex64>> {
        let lift = |p: KernelParts<f64>| KernelParts {
            classical: Complex64::from(p.classical),
            bare: Complex64::from(p.bare),
            remainder: Complex64::from(p.remainder),
            error: p.error,
        };
        match self {
            PvKernel::Riesz { alpha } => riesz_parts(alpha, x, y, opts).map(lift),
            PvKernel::RieszBar { alpha } => riesz_bar_parts(alpha, x, y, opts).map(lift),
            PvKernel::Imaginary { gamma } => imaginary_parts(*gamma, x, y, opts),
            PvKernel::NegPower { beta } => {
                let v = neg_power_kernel_with(*beta, x, y, opts)?;
                Ok(KernelParts { classical: 0.0.into(), bare: 0.0.into(), remainder: v.into(), error: 0.0 })
            }
        }
    }

    /// Constant added to the principal value: `c_α`, `c̄_α`, or 0.
    pub fn constant(&self, n: usize) -> Result<f64> {
        match self {
            PvKernel::Riesz { alpha } => c_alpha(alpha, n),
            PvKernel::RieszBar { alpha } => c_alpha_bar(alpha, n),
            _ => Ok(0.0),
        }
    }

    /// Whether `∫ |K(x, y) f(y)| dy < ∞`, so that no principal value is needed.
    pub fn absolutely_convergent(&self, n: usize) -> bool {
        match self {
            PvKernel::Riesz { alpha } | PvKernel::RieszBar { alpha } => n == 1 && alpha.all_even(),
            PvKernel::NegPower { .. } => true,
            PvKernel::Imaginary { .. } => false,
        }
    }

    fn correction(&self, n: usize, eps: f64, scale: f64) -> Result<Complex64> {
        match self {
            PvKernel::Imaginary { gamma } => alpha_eps_scaled(*gamma, n, eps, scale),
            _ => Ok(Complex64::new(0.0, 0.0)),
        }
    }
}

/// Settings for principal-value evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PvOptions {
    /// Requested accuracy of the final value.
    pub tol: f64,
    pub kernel: KernelOptions,
    /// Number of halvings in the ε-ladder.
    pub depth: usize,
    /// Relative accuracy of the angular rule against the shell's `L¹` mass.
    pub angular_rel: f64,
    pub max_angular_nodes: usize,
    /// Outer radius is `|x| + outer_pad`.
    pub outer_pad: f64,
    /// Scale in `α(ε)`; see [`alpha_eps_scaled`].
    pub alpha_scale: f64,
}

impl Default for PvOptions {
    fn default() -> Self {
        PvOptions {
            tol: 1e-7,
            kernel: KernelOptions::default(),
            depth: 12,
            angular_rel: 1e-11,
            max_angular_nodes: 1024,
            outer_pad: 7.5,
            alpha_scale: 2.0,
        }
    }
}

/// Outcome of a principal-value evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PVResult {
    pub value: Complex64,
    /// `ε₀ > ε₁ > …`; empty when the integral converges absolutely.
    pub epsilon_sequence: Vec<f64>,
    /// `S(ε_j) = ∫_{ε_j < |x-y| < R} K(x, y) f(y) dy`.
    pub shell_values: Vec<Complex64>,
    /// `S(ε_j) + α(ε_j) f(x) + c f(x)`: the sequence whose limit is `value`.
    pub corrected_values: Vec<Complex64>,
    /// Iterated Aitken extrapolation of `corrected_values`.
    pub ladder_estimate: Option<Complex64>,
    /// Observed convergence order of the ladder, `log₂` of successive difference ratios.
    pub observed_order: Option<f64>,
    pub constant: f64,
    pub extrapolation_error: f64,
    pub converged: bool,
    pub kernel_evaluations: usize,
}

impl PVResult {
    /// Rows `ε, shell_re, shell_im, corrected_re, corrected_im`.
    pub fn convergence_rows(&self) -> Vec<[f64; 5]> {
        self.epsilon_sequence
            .iter()
            .zip(&self.shell_values)
            .zip(&self.corrected_values)
            .map(|((&e, s), c)| [e, s.re, s.im, c.re, c.im])
            .collect()
    }
}

/// Nodes and weights of a rule on `S^{n-1}`; nested in the azimuth.
struct Angular {
    n: usize,
    m: usize,
}

impl Angular {
    fn points(&self) -> Result<Vec<(Vec<f64>, f64)>> {
        Ok(match self.n {
            1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
            2 => (0..self.m)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / self.m as f64;
                    (vec![t.cos(), t.sin()], 2.0 * PI / self.m as f64)
                })
                .collect(),
            _ => {
                let gl = gauss_legendre_rule(self.m / 2)?;
                let mut out = Vec::with_capacity(self.m * self.m / 2);
                for (&c, &w) in gl.nodes.iter().zip(&gl.weights) {
                    let s = (1.0 - c * c).max(0.0).sqrt();
                    for k in 0..self.m {
                        let p = 2.0 * PI * k as f64 / self.m as f64;
                        out.push((vec![s * p.cos(), s * p.sin(), c], w * 2.0 * PI / self.m as f64));
                    }
                }
                out
            }
        })
    }
}

/// Evaluates `∫_{S^{n-1}} g(x + rω) dω` with node doubling until stable.
struct ShellEval<'a> {
    kernel: &'a PvKernel,
    f: &'a EnvelopedFunction,
    x: &'a [f64],
    fx: Complex64,
    opts: &'a PvOptions,
    evals: Cell<usize>,
    failure: RefCell<Option<Error>>,
}

impl<'a> ShellEval<'a> {
    /// `∫_{S^{n-1}} g(x + rω) dω` with `g = K f` or the subtracted integrand.
    fn shell(&self, r: f64, subtract: bool) -> Result<Complex64> {
        let n = self.x.len();
        let start = match n {
            1 => 2,
            2 => 16,
            _ => 8,
        };
        let mut m = start;
        let mut prev: Option<Complex64> = None;
        // Raw values of the previous pass; in the plane its nodes are the even ones of the next.
        let mut cache: Vec<(Complex64, f64)> = Vec::new();
        loop {
            let pts = Angular { n, m }.points()?;
            let mut raw = Vec::with_capacity(pts.len());
            for (k, (w, _)) in pts.iter().enumerate() {
                let v = if n == 2 && !cache.is_empty() && k % 2 == 0 {
                    cache[k / 2]
                } else {
                    let y: Vec<f64> = self.x.iter().zip(w).map(|(a, b)| a + r * b).collect();
                    let p = self.kernel.parts(self.x, &y, &self.opts.kernel)?;
                    self.evals.set(self.evals.get() + 1);
                    let fy = self.f.eval(&y);
                    let v = if subtract { p.total() * fy - p.bare * self.fx } else { p.total() * fy };
                    (v, p.error * fy.norm())
                };
                raw.push(v);
            }
            let weighted: Vec<Complex64> = raw.iter().zip(&pts).map(|((v, _), (_, wt))| v * *wt).collect();
            let l1: f64 = weighted.iter().map(|v| v.norm()).sum();
            // Kernel quadrature noise sets a floor below which node doubling cannot help.
            let noise: f64 = raw.iter().zip(&pts).map(|((_, e), (_, wt))| e * wt).sum();
            let total = pairwise_sum(&weighted);
            if n == 1 {
                return Ok(total);
            }
            if let Some(p) = prev {
                if (total - p).norm() <= self.opts.angular_rel * l1.max(f64::MIN_POSITIVE) + 4.0 * noise {
                    return Ok(total);
                }
            }
            if 2 * m > self.opts.max_angular_nodes {
                let d = prev.map(|p| (total - p).norm()).unwrap_or(f64::INFINITY);
                return Err(Error::NonConvergence(format!("angular rule at r = {r:e} changed by {d:e} with {m} nodes")));
            }
            prev = Some(total);
            if n == 2 {
                cache = raw;
            }
            m *= 2;
        }
    }

    /// `r^{n-1}` times the shell integral, with errors parked for later.
    fn radial(&self, r: f64, subtract: bool) -> Complex64 {
        if self.failure.borrow().is_some() {
            return Complex64::new(f64::NAN, 0.0);
        }
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match self.shell(r, subtract) {
            Ok(v) => v * r.powi(self.x.len() as i32 - 1),
            Err(e) => {
                *self.failure.borrow_mut() = Some(e);
                Complex64::new(f64::NAN, 0.0)
            }
        }
    }

    fn finish(&self, r: Result<Integral<Complex64>>) -> Result<Integral<Complex64>> {
        if let Some(e) = self.failure.borrow_mut().take() {
            return Err(e);
        }
        r
    }

    fn tol(&self) -> Tolerance {
        Tolerance { abs: 1e-2 * self.opts.tol, rel: 1e-12, l1: 1e-13 }
    }

    /// `∫_a^b h` in the variable `log r`.
    fn log_piece(&self, a: f64, b: f64, subtract: bool) -> Result<Integral<Complex64>> {
        let mut g = |u: f64| {
            let r = u.exp();
            self.radial(r, subtract) * r
        };
        let out = adaptive(&mut g, a.ln(), b.ln(), self.tol());
        self.finish(out)
    }

    fn linear_piece(&self, a: f64, b: f64) -> Result<Integral<Complex64>> {
        let mut g = |r: f64| self.radial(r, false);
        let out = adaptive(&mut g, a, b, self.tol());
        self.finish(out)
    }

    /// `∫_0^b h̃` after `r = b v²`.
    fn inner_piece(&self, b: f64, subtract: bool) -> Result<Integral<Complex64>> {
        let mut g = |v: f64| self.radial(b * v * v, subtract) * (2.0 * b * v);
        let out = adaptive(&mut g, 0.0, 1.0, self.tol());
        self.finish(out)
    }
}

fn check_point(f: &EnvelopedFunction, x: &[f64]) -> Result<()> {
    if f.dim() != x.len() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("evaluation point must be finite".into()));
    }
    Ok(())
}

struct Geometry {
    rho: f64,
    outer: f64,
    eps0: f64,
}

fn geometry(x: &[f64], opts: &PvOptions) -> Geometry {
    let n = x.len() as f64;
    let rho = opts.kernel.region_beta * n * m_fn(x).sqrt();
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let outer = (nx + opts.outer_pad).max(2.0 * rho);
    let eps0 = 1f64.min(m_fn(x).sqrt()).min(rho);
    Geometry { rho, outer, eps0 }
}

/// Iterated Aitken Δ² transform; `None` with fewer than three terms.
pub fn aitken(seq: &[Complex64]) -> Option<Complex64> {
    if seq.len() < 3 {
        return None;
    }
    let mut cur = seq.to_vec();
    while cur.len() >= 3 {
        let mut next = Vec::with_capacity(cur.len() - 2);
        for w in cur.windows(3) {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let den = d2 - d1;
            if den.norm() <= 1e-300 || d2.norm() <= 1e-15 * w[2].norm() {
                next.push(w[2]);
            } else {
                next.push(w[2] - d2 * d2 / den);
            }
        }
        cur = next;
    }
    cur.last().copied()
}

/// `PV ∫ K(x, y) f(y) dy + c f(x)` for Riesz, `R̄` and negative-power kernels.
pub fn pv_apply(kernel: &PvKernel, f: &EnvelopedFunction, x: &[f64], opts: &PvOptions) -> Result<PVResult> {
    check_point(f, x)?;
    let n = x.len();
    kernel.check(n)?;
    let g = geometry(x, opts);
    let fx = f.eval(x);
    let ev = ShellEval {
        kernel,
        f,
        x,
        fx,
        opts,
        evals: Cell::new(0),
        failure: RefCell::new(None),
    };
    let c = kernel.constant(n)?;

    if kernel.absolutely_convergent(n) {
        let near = ev.inner_piece(g.rho, false)?;
        let far = ev.linear_piece(g.rho, g.outer)?;
        let total = near.combine(far);
        let value = total.value + fx * c;
        return Ok(PVResult {
            value,
            epsilon_sequence: Vec::new(),
            shell_values: Vec::new(),
            corrected_values: Vec::new(),
            ladder_estimate: None,
            observed_order: None,
            constant: c,
            extrapolation_error: total.error,
            converged: total.error <= opts.tol,
            kernel_evaluations: ev.evals.get(),
        });
    }

    let depth = opts.depth.max(2);
    let eps: Vec<f64> = (0..=depth).map(|j| g.eps0 * 0.5f64.powi(j as i32)).collect();
    let far = ev.linear_piece(g.rho, g.outer)?;
    let mid = if g.eps0 < g.rho { ev.log_piece(g.eps0, g.rho, false)? } else { Integral { value: 0.0.into(), error: 0.0, l1: 0.0, evaluations: 0 } };
    let mut acc = far.combine(mid);
    let mut quad_err = acc.error;
    let mut shells = vec![acc.value];
    for j in 1..=depth {
        let piece = ev.log_piece(eps[j], eps[j - 1], false)?;
        quad_err += piece.error;
        acc = acc.combine(piece);
        shells.push(acc.value);
    }
    let corr: Vec<Complex64> = eps.iter().map(|&e| kernel.correction(n, e, opts.alpha_scale)).collect::<Result<_>>()?;
    let corrected: Vec<Complex64> = shells.iter().zip(&corr).map(|(s, a)| s + a * fx + fx * c).collect();

    let inner = ev.inner_piece(eps[depth], true)?;
    quad_err += inner.error;
    let value = corrected[depth] + inner.value;
    // Same limit with the subtracted integrand started one rung earlier.
    let bridge = ev.log_piece(eps[depth], eps[depth - 1], true)?;
    let alt = corrected[depth - 1] + inner.value + bridge.value;
    quad_err += bridge.error;
    let err = quad_err + (value - alt).norm();

    let d: Vec<f64> = corrected.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let observed_order = match d.as_slice() {
        [.., a, b] if *a > 0.0 && *b > 0.0 => Some((a / b).log2()),
        _ => None,
    };
    Ok(PVResult {
        value,
        epsilon_sequence: eps,
        shell_values: shells,
        corrected_values: corrected.clone(),
        ladder_estimate: aitken(&corrected),
        observed_order,
        constant: c,
        extrapolation_error: err,
        converged: err <= opts.tol,
        kernel_evaluations: ev.evals.get(),
    })
}

/// `lim (∫_{|x-y|>ε} K_γ^𝒜(x, y) f(y) dy + α(ε) f(x))`.
pub fn pv_apply_imaginary(gamma_: f64, f: &EnvelopedFunction, x: &[f64], opts: &PvOptions) -> Result<PVResult> {
    pv_apply(&PvKernel::Imaginary { gamma: gamma_ }, f, x, opts)
}

/// `max_{ε ∈ grid} |∫_{|x-y|>ε} K(x, y) f(y) dy|`, a lower bound for the maximal operator.
pub fn maximal_apply(kernel: &PvKernel, f: &EnvelopedFunction, x: &[f64], grid: &[f64], opts: &PvOptions) -> Result<f64> {
    check_point(f, x)?;
    kernel.check(x.len())?;
    if grid.is_empty() {
        return Err(Error::DegenerateGrid("maximal operator needs at least one ε".into()));
    }
    if grid.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::DegenerateGrid("ε values must be positive and finite".into()));
    }
    let g = geometry(x, opts);
    let mut sorted: Vec<f64> = grid.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();
    let ev = ShellEval {
        kernel,
        f,
        x,
        fx: f.eval(x),
        opts,
        evals: Cell::new(0),
        failure: RefCell::new(None),
    };
    // Walk inward from the outer radius, accumulating pieces.
    let mut acc = Complex64::new(0.0, 0.0);
    let mut edge = g.outer;
    let mut best = 0.0f64;
    for &e in &sorted {
        if e < edge {
            let piece = if e >= g.rho {
                ev.linear_piece(e, edge)?
            } else if edge > g.rho {
                let a = ev.linear_piece(g.rho, edge)?;
                a.combine(ev.log_piece(e, g.rho, false)?)
            } else {
                ev.log_piece(e, edge, false)?
            };
            acc += piece.value;
            edge = e;
        }
        best = best.max(acc.norm());
    }
    Ok(best)
}

/// `∫_{N_β} K f + c f(x)` (principal value) and `∫_{N_β^c} K f`.
pub fn split_apply(kernel: &PvKernel, f: &EnvelopedFunction, x: &[f64], opts: &PvOptions) -> Result<(Complex64, Complex64)> {
    check_point(f, x)?;
    let n = x.len();
    kernel.check(n)?;
    let g = geometry(x, opts);
    let fx = f.eval(x);
    let ev = ShellEval {
        kernel,
        f,
        x,
        fx,
        opts,
        evals: Cell::new(0),
        failure: RefCell::new(None),
    };
    let subtract = !kernel.absolutely_convergent(n);
    let local = ev.inner_piece(g.rho, subtract)?.value
        + fx * kernel.constant(n)?
        + if subtract { kernel.correction(n, g.rho, opts.alpha_scale)? * fx } else { 0.0.into() };
    let global = ev.linear_piece(g.rho, g.outer)?.value;
    Ok((local, global))
}

/// Monomial coefficients of `H_{α₁-1}(a v) ∏_{i≥2} H_{α_i}(z_i v)` in `v`.
fn c_alpha_poly(alpha: &[u32], a: f64, z: &[f64]) -> Vec<f64> {
    let mut acc: Vec<f64> = hermite_poly_coeffs(alpha[0] - 1)
        .iter()
        .enumerate()
        .map(|(j, &c)| c * a.powi(j as i32))
        .collect();
    for (&ai, &zi) in alpha[1..].iter().zip(z) {
        let h: Vec<f64> = hermite_poly_coeffs(ai).iter().enumerate().map(|(j, &c)| c * zi.powi(j as i32)).collect();
        let mut next = vec![0.0; acc.len() + h.len() - 1];
        for (i, &p) in acc.iter().enumerate() {
            for (j, &q) in h.iter().enumerate() {
                next[i + j] += p * q;
            }
        }
        acc = next;
    }
    acc
}

/// `∫_0^∞ P(√s) e^{-s} s^{(n-3)/2} ds` for `P` with zero constant term.
fn c_alpha_s_integral(poly: &[f64], n: usize) -> f64 {
    let terms: Vec<f64> = poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c * gamma(0.5 * (n - 1 + j) as f64))
        .collect();
    pairwise_sum(&terms)
}

/// Constant `c_α` of the principal-value representation of `R_α`.
///
/// Zero when some `α_i` is odd. Otherwise
/// `c_α = -(-1)^{|α|} / (Γ(|α|/2) 2^{|α|/2-1} π^{n/2}) ∫_{|z̄|<1} ∫_0^∞ H_{α₁-1}(√(s(1-|z̄|²))) ∏_{i≥2} H_{α_i}(z_i √s) e^{-s} s^{(n-3)/2} ds dz̄`,
/// with the `s`-integral in closed form and the ball integral by product quadrature.
pub fn c_alpha(alpha: &MultiIndex, n: usize) -> Result<f64> {
    if alpha.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.dim() });
    }
    if alpha.is_zero() {
        return Err(Error::InvalidArgument("α must be nonzero".into()));
    }
    if !alpha.all_even() {
        return Ok(0.0);
    }
    let mut comps = alpha.components().to_vec();
    let lead = comps.iter().position(|&a| a > 0).expect("α is nonzero");
    comps.swap(0, lead);
    let order = alpha.order() as f64;
    let pref = -1.0 / (gamma(0.5 * order) * 2f64.powf(0.5 * order - 1.0) * PI.powf(0.5 * n as f64));
    let ball = match n {
        1 => c_alpha_s_integral(&c_alpha_poly(&comps, 1.0, &[]), 1),
        2 => {
            // z₂ = sin θ
            let gl = gauss_legendre_rule(64)?;
            let terms: Vec<f64> = gl
                .nodes
                .iter()
                .zip(&gl.weights)
                .map(|(&u, &w)| {
                    let th = 0.5 * PI * u;
                    let (s, c) = th.sin_cos();
                    w * 0.5 * PI * c * c_alpha_s_integral(&c_alpha_poly(&comps, c, &[s]), 2)
                })
                .collect();
            pairwise_sum(&terms)
        }
        3 => {
            // z̄ = sin θ (cos φ, sin φ)
            let gl = gauss_legendre_rule(64)?;
            let m = 64;
            let mut terms = Vec::with_capacity(gl.nodes.len() * m);
            for (&u, &w) in gl.nodes.iter().zip(&gl.weights) {
                let th = 0.25 * PI * (u + 1.0);
                let (s, c) = th.sin_cos();
                for k in 0..m {
                    let p = 2.0 * PI * k as f64 / m as f64;
                    let z = [s * p.cos(), s * p.sin()];
                    let jac = 0.25 * PI * w * (2.0 * PI / m as f64) * s * c;
                    terms.push(jac * c_alpha_s_integral(&c_alpha_poly(&comps, c, &z), 3));
                }
            }
            pairwise_sum(&terms)
        }
        _ => return Err(Error::InvalidArgument(format!("c_α is implemented for n ≤ 3, got {n}"))),
    };
    Ok(pref * ball)
}

/// `c_α` from the Fourier symbol of the Euclidean kernel (all-even `α`):
/// `(-1)^{|α|/2} 2^{|α|/2} Γ(n/2) ∏ Γ((α_i+1)/2) / (Γ((n+|α|)/2) π^{n/2})`.
pub fn c_alpha_fourier(alpha: &MultiIndex) -> f64 {
    if !alpha.all_even() {
        return 0.0;
    }
    let n = alpha.dim() as f64;
    let a = alpha.order();
    let sign = if (a / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let prod: f64 = alpha.components().iter().map(|&ai| gamma(0.5 * (ai as f64 + 1.0))).product();
    sign * 2f64.powf(0.5 * a as f64) * gamma(0.5 * n) * prod / (gamma(0.5 * (n + a as f64)) * PI.powf(0.5 * n))
}

/// Constant of the principal-value representation of `R̄_α`: `2^{-|α|} c_α`.
pub fn c_alpha_bar(alpha: &MultiIndex, n: usize) -> Result<f64> {
    Ok(c_alpha(alpha, n)? * 0.5f64.powi(alpha.order() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_tilde, HermiteExpansion};
    use approx::assert_relative_eq;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn basis(k: &[u32]) -> EnvelopedFunction {
        EnvelopedFunction::from_expansion(&HermiteExpansion::from_real(k.len(), &[(k, 1.0)]).unwrap())
    }

    #[test]
    fn c_alpha_examples() {
        assert_eq!(c_alpha(&mi(&[1]), 1).unwrap(), 0.0);
        assert_relative_eq!(c_alpha(&mi(&[2]), 1).unwrap(), -2.0, max_relative = 1e-14);
        assert_eq!(c_alpha(&mi(&[1, 2]), 2).unwrap(), 0.0);
        assert!(c_alpha(&mi(&[0, 0]), 2).is_err());
    }

    #[test]
    fn c_alpha_matches_fourier_symbol() {
        for a in [vec![2], vec![4], vec![6], vec![2, 0], vec![0, 2], vec![2, 2], vec![4, 0], vec![4, 2], vec![2, 0, 0], vec![2, 2, 0], vec![0, 2, 2], vec![2, 2, 2]] {
            let alpha = MultiIndex::new(a.clone());
            let q = c_alpha(&alpha, a.len()).unwrap();
            let f = c_alpha_fourier(&alpha);
            assert!((q - f).abs() <= 1e-12 * f.abs().max(1.0), "{a:?}: {q} vs {f}");
        }
        assert_relative_eq!(c_alpha_fourier(&mi(&[2, 0])), -1.0, max_relative = 1e-14);
    }

    #[test]
    fn c_alpha_is_permutation_symmetric() {
        let a = c_alpha(&mi(&[4, 2]), 2).unwrap();
        let b = c_alpha(&mi(&[2, 4]), 2).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        let a = c_alpha(&mi(&[2, 0, 4]), 3).unwrap();
        let b = c_alpha(&mi(&[4, 2, 0]), 3).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn aitken_accelerates_geometric_sequences() {
        let lim = Complex64::new(1.0, -2.0);
        let one: Vec<Complex64> = (0..5).map(|j| lim + Complex64::new(0.3, 0.1) * 0.5f64.powi(j)).collect();
        assert!((aitken(&one).unwrap() - lim).norm() < 1e-12);
        let two: Vec<Complex64> = (0..9).map(|j| lim + 0.5f64.powi(j) + Complex64::i() * 0.25f64.powi(j)).collect();
        let d = (two[8] - lim).norm();
        assert!((aitken(&two).unwrap() - lim).norm() < 1e-3 * d);
        assert!(aitken(&one[..2]).is_none());
    }

    #[test]
    fn riesz_first_order_one_dimension() {
        let r = pv_apply(&PvKernel::Riesz { alpha: mi(&[1]) }, &basis(&[0]), &[0.5], &PvOptions::default()).unwrap();
        let want = -hermite_tilde(&mi(&[1]), &[0.5]);
        assert_relative_eq!(want, -0.778_800_783_071_404_9, max_relative = 1e-12);
        assert!((r.value.re - want).abs() < 1e-7, "{:?}", r);
        assert!(r.value.im.abs() < 1e-14);
        assert!(r.converged);
        assert_eq!(r.epsilon_sequence.len(), 13);
        let ladder = r.ladder_estimate.unwrap();
        assert!((ladder.re - want).abs() < 1e-3, "ladder {ladder}");
    }

    #[test]
    fn riesz_second_order_one_dimension_is_absolutely_convergent() {
        let r = pv_apply(&PvKernel::Riesz { alpha: mi(&[2]) }, &basis(&[0]), &[0.0], &PvOptions::default()).unwrap();
        assert!(r.epsilon_sequence.is_empty());
        assert_relative_eq!(r.constant, -2.0, max_relative = 1e-14);
        assert!((r.value.re + 2.0).abs() < 1e-7, "{:?}", r.value);
    }

    #[test]
    fn riesz_bar_first_order() {
        let r = pv_apply(&PvKernel::RieszBar { alpha: mi(&[1]) }, &basis(&[3]), &[0.5], &PvOptions::default()).unwrap();
        let want = -(3f64.sqrt()) * hermite_tilde(&mi(&[2]), &[0.5]);
        assert!((r.value.re - want).abs() < 1e-7, "{} vs {want}", r.value);
    }

    #[test]
    fn imaginary_power_eigenvalues() {
        let x = [0.3];
        let r = pv_apply_imaginary(1.0, &basis(&[0]), &x, &PvOptions::default()).unwrap();
        assert!((r.value - Complex64::from((-0.09f64).exp())).norm() < 1e-6, "{}", r.value);
        let r = pv_apply_imaginary(1.0, &basis(&[1]), &x, &PvOptions::default()).unwrap();
        let want = Complex64::from_polar(1.0, 2f64.ln()) * hermite_tilde(&mi(&[1]), &x);
        assert!((r.value - want).norm() < 1e-6, "{} vs {want}", r.value);
    }

    #[test]
    fn odd_kernel_shells_vanish_on_even_functions() {
        // H̃₀ shifted to be even about x: use x = 0.
        let r = pv_apply(&PvKernel::Riesz { alpha: mi(&[1]) }, &basis(&[0]), &[0.0], &PvOptions::default()).unwrap();
        for s in &r.shell_values {
            assert!(s.norm() < 1e-10, "{s}");
        }
    }

    #[test]
    fn split_is_additive() {
        let k = PvKernel::Riesz { alpha: mi(&[1]) };
        let f = basis(&[0]);
        let (l, g) = split_apply(&k, &f, &[0.5], &PvOptions::default()).unwrap();
        let v = pv_apply(&k, &f, &[0.5], &PvOptions::default()).unwrap().value;
        assert!((l + g - v).norm() < 1e-9);
    }

    #[test]
    fn maximal_dominates_and_is_monotone() {
        let k = PvKernel::Riesz { alpha: mi(&[1]) };
        let f = basis(&[0]);
        let o = PvOptions::default();
        let coarse = [1.0, 0.1, 0.01, 0.001];
        let fine = [1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001];
        let a = maximal_apply(&k, &f, &[0.5], &coarse, &o).unwrap();
        let b = maximal_apply(&k, &f, &[0.5], &fine, &o).unwrap();
        assert!(b >= a);
        let pv = pv_apply(&k, &f, &[0.5], &o).unwrap().value.norm();
        assert!(a.is_finite() && a <= 10.0 * pv && a > 0.0);
        assert!(maximal_apply(&k, &f, &[0.5], &[], &o).is_err());
    }
}
