//! Numerical integration: Gauss–Hermite and Gauss–Legendre rules built by a
//! symmetric tridiagonal eigensolve, globally adaptive Gauss–Kronrod (10/21),
//! improper time integrals on `(0, ∞)`, and truncated shell integrals.

use crate::error::{Error, Result};
use crate::special::pairwise_sum;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Default + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + 'static
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    #[inline]
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    #[inline]
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    GaussHermite,
    GaussLegendre,
    AdaptiveSegment,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl QuadratureRule {
    /// `Σ w_i f(x_i)`, summed pairwise.
    pub fn apply<T: QuadValue>(&self, mut f: impl FnMut(f64) -> T) -> T {
        let terms: Vec<T> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).collect();
        pairwise_sum(&terms)
    }
}

fn rule_cache() -> &'static Mutex<HashMap<(RuleKind, usize), Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(RuleKind, usize), Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(kind: RuleKind, order: usize, build: impl FnOnce() -> QuadratureRule) -> QuadratureRule {
    if let Some(r) = rule_cache().lock().unwrap().get(&(kind, order)) {
        return (**r).clone();
    }
    let r = build();
    rule_cache().lock().unwrap().insert((kind, order), Arc::new(r.clone()));
    r
}

fn jacobi_nodes(offdiag: &[f64]) -> Vec<f64> {
    let n = offdiag.len() + 1;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for (i, &b) in offdiag.iter().enumerate() {
        j[(i, i + 1)] = b;
        j[(i + 1, i)] = b;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(j).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes
}

/// Orthonormal Hermite functions `ψ_{m-1}(x), ψ_m(x)` (weight `e^{-x²}` folded in).
fn hermite_functions_pair(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..m {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// Gauss–Hermite rule for the weight `e^{-z²}` (Golub–Welsch, Newton-polished).
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if !(1..=256).contains(&order) {
        return Err(Error::OrderOutOfRange(order));
    }
    Ok(cached(RuleKind::GaussHermite, order, || {
        let off: Vec<f64> = (1..order).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let mut nodes = jacobi_nodes(&off);
        let nf = order as f64;
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (pm1, pm) = hermite_functions_pair(order, *x);
                if pm1 == 0.0 {
                    break;
                }
                *x -= pm / ((2.0 * nf).sqrt() * pm1);
            }
        }
        // Exact symmetry about the origin.
        for i in 0..order / 2 {
            let a = 0.5 * (nodes[order - 1 - i] - nodes[i]);
            nodes[i] = -a;
            nodes[order - 1 - i] = a;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        let weights = nodes
            .iter()
            .map(|&x| {
                let (pm1, _) = hermite_functions_pair(order, x);
                (-x * x).exp() / (nf * pm1 * pm1)
            })
            .collect();
        QuadratureRule { nodes, weights, kind: RuleKind::GaussHermite }
    }))
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_rule(order: usize) -> Result<QuadratureRule> {
    if !(1..=256).contains(&order) {
        return Err(Error::OrderOutOfRange(order));
    }
    Ok(cached(RuleKind::GaussLegendre, order, || {
        let off: Vec<f64> = (1..order)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        let mut nodes = jacobi_nodes(&off);
        let legendre = |x: f64| {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..order {
                let k = k as f64;
                let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            (p1, dp)
        };
        if order > 1 {
            for x in nodes.iter_mut() {
                for _ in 0..3 {
                    let (p, dp) = legendre(*x);
                    *x -= p / dp;
                }
            }
        } else {
            nodes[0] = 0.0;
        }
        for i in 0..order / 2 {
            let a = 0.5 * (nodes[order - 1 - i] - nodes[i]);
            nodes[i] = -a;
            nodes[order - 1 - i] = a;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        let weights = if order == 1 {
            vec![2.0]
        } else {
            nodes
                .iter()
                .map(|&x| {
                    let (_, dp) = legendre(x);
                    2.0 / ((1.0 - x * x) * dp * dp)
                })
                .collect()
        };
        QuadratureRule { nodes, weights, kind: RuleKind::GaussLegendre }
    }))
}

/// Stopping rule: `error ≤ max(abs, rel·|I|, l1·∫|f|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub l1: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0, l1: 0.0 }
    }

    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel, l1: 0.0 }
    }

    pub fn with_l1(mut self, l1: f64) -> Self {
        self.l1 = l1;
        self
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    fn target(&self, value: f64, l1: f64) -> f64 {
        self.abs.max(self.rel * value).max(self.l1 * l1)
    }
}

impl From<f64> for Tolerance {
    fn from(abs: f64) -> Self {
        Tolerance::absolute(abs)
    }
}

/// Result of an integration: value, error estimate, `∫|f|` estimate, and cost.
#[derive(Clone, Copy, Debug)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub l1: f64,
    pub evaluations: usize,
}

impl<T: QuadValue> Integral<T> {
    fn zero() -> Self {
        Integral { value: T::default(), error: 0.0, l1: 0.0, evaluations: 0 }
    }

    pub fn combine(self, other: Integral<T>) -> Integral<T> {
        Integral {
            value: self.value + other.value,
            error: self.error + other.error,
            l1: self.l1 + other.l1,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn scale(self, s: f64) -> Integral<T> {
        Integral { value: self.value * s, error: self.error * s.abs(), l1: self.l1 * s.abs(), evaluations: self.evaluations }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_097_830,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    l1: f64,
    depth: u32,
}

fn gk21<T: QuadValue>(f: &mut dyn FnMut(f64) -> T, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[10];
    let mut resabs = fc.magnitude() * WGK[10];
    let mut resg = T::default();
    let mut fv1 = [T::default(); 10];
    let mut fv2 = [T::default(); 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk = resk + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            resg = resg + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let ah = h.abs();
    let value = resk * h;
    resabs *= ah;
    resasc *= ah;
    let mut err = (resk - resg).magnitude() * ah;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err, resabs)
}

#[derive(PartialEq)]
struct HeapKey(f64, usize);
impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Limits for the adaptive driver.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveLimits {
    pub max_depth: u32,
    pub max_segments: usize,
}

impl Default for AdaptiveLimits {
    fn default() -> Self {
        AdaptiveLimits { max_depth: 64, max_segments: 4000 }
    }
}

/// Globally adaptive Gauss–Kronrod (10/21) on a finite interval.
pub fn adaptive<T: QuadValue>(
    f: &mut dyn FnMut(f64) -> T,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Integral<T>> {
    adaptive_with(f, a, b, tol, AdaptiveLimits::default())
}

pub fn adaptive_with<T: QuadValue>(
    f: &mut dyn FnMut(f64) -> T,
    a: f64,
    b: f64,
    tol: Tolerance,
    limits: AdaptiveLimits,
) -> Result<Integral<T>> {
    if a == b {
        return Ok(Integral::zero());
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("adaptive quadrature needs finite limits".into()));
    }
    let mut segs: Vec<Segment<T>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let (v, e, l) = gk21(f, a, b);
    let mut evals = 21;
    segs.push(Segment { a, b, value: v, error: e, l1: l, depth: 0 });
    heap.push(HeapKey(e, 0));
    let mut total_err = e;
    let mut total_val = v;
    let mut total_l1 = l;
    loop {
        if !total_err.is_finite() || !total_val.magnitude().is_finite() {
            return Err(Error::NonConvergence(format!("non-finite integrand on [{a}, {b}]")));
        }
        if total_err <= tol.target(total_val.magnitude(), total_l1) {
            break;
        }
        if segs.len() >= limits.max_segments {
            return Err(Error::NonConvergence(format!(
                "segment limit reached on [{a}, {b}]: error {total_err:e}, value {:e}",
                total_val.magnitude()
            )));
        }
        let HeapKey(_, idx) = heap.pop().expect("heap holds every active segment");
        let (sa, sb, sv, se, sl, depth) = {
            let s = &segs[idx];
            (s.a, s.b, s.value, s.error, s.l1, s.depth)
        };
        if depth >= limits.max_depth {
            return Err(Error::NonConvergence(format!(
                "refinement depth {} exceeded near [{sa:e}, {sb:e}]",
                limits.max_depth
            )));
        }
        let mid = 0.5 * (sa + sb);
        let (v1, e1, l1) = gk21(f, sa, mid);
        let (v2, e2, l2) = gk21(f, mid, sb);
        evals += 42;
        total_val = total_val - sv + v1 + v2;
        total_err = total_err - se + e1 + e2;
        total_l1 = total_l1 - sl + l1 + l2;
        segs[idx] = Segment { a: sa, b: mid, value: v1, error: e1, l1, depth: depth + 1 };
        heap.push(HeapKey(e1, idx));
        segs.push(Segment { a: mid, b: sb, value: v2, error: e2, l1: l2, depth: depth + 1 });
        heap.push(HeapKey(e2, segs.len() - 1));
    }
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let vals: Vec<T> = segs.iter().map(|s| s.value).collect();
    let errs: Vec<f64> = segs.iter().map(|s| s.error).collect();
    let l1s: Vec<f64> = segs.iter().map(|s| s.l1).collect();
    Ok(Integral { value: pairwise_sum(&vals), error: pairwise_sum(&errs), l1: pairwise_sum(&l1s), evaluations: evals })
}

/// How the head `(0, split]` of a time integral is parametrised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Substitution {
    /// `t = split · v^{1/p}`, flattening a `t^{p-1}` endpoint behaviour.
    None,
    /// `s = 1 - e^{-2t}`, then `s = s_split · v^{1/p}`.
    ExpS,
    /// `t = e^u` on `[floor, split]`; the caller certifies `(0, floor)` is negligible.
    Logarithmic { floor: f64 },
}

/// Declared behaviour of an integrand on `(0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeIntegrandSpec {
    /// `f(t) ~ t^{p-1}` as `t → 0⁺`.
    pub power_at_zero: f64,
    /// `f(t) ~ e^{-λ t}` as `t → ∞`.
    pub decay_rate: f64,
    pub split: Option<f64>,
    pub substitution: Substitution,
}

impl TimeIntegrandSpec {
    pub fn new(power_at_zero: f64, decay_rate: f64) -> Self {
        TimeIntegrandSpec { power_at_zero, decay_rate, split: None, substitution: Substitution::None }
    }

    pub fn split_at(mut self, split: f64) -> Self {
        self.split = Some(split);
        self
    }

    pub fn substitution(mut self, s: Substitution) -> Self {
        self.substitution = s;
        self
    }
}

/// `∫_0^∞ f(t) dt` for integrands declared by `spec`.
///
/// The head `(0, split]` is integrated after the declared substitution; the
/// tail `(split, T_cut]` is cut where `λ T_cut ≥ ln(10/tol) + ln(1 + |f(split)|)`
/// and the remaining mass bound `|f(T_cut)|/λ` is below `tol/10`.
pub fn integrate_time<T, F>(mut f: F, spec: &TimeIntegrandSpec, tol: impl Into<Tolerance>) -> Result<Integral<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let tol = tol.into();
    let p = spec.power_at_zero;
    let lambda = spec.decay_rate;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("decay rate must be positive, got {lambda}")));
    }
    if !matches!(spec.substitution, Substitution::Logarithmic { .. }) && !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("power at zero must be positive, got {p}")));
    }
    let split = spec.split.unwrap_or(1.0);
    if !(split > 0.0) {
        return Err(Error::InvalidArgument("split point must be positive".into()));
    }
    let half = Tolerance { abs: 0.5 * tol.abs, ..tol };

    let head = match spec.substitution {
        Substitution::None => {
            let mut g = |v: f64| {
                let t = split * v.powf(1.0 / p);
                f(t) * (split / p * v.powf(1.0 / p - 1.0))
            };
            adaptive(&mut g, 0.0, 1.0, half)?
        }
        Substitution::ExpS => {
            let s_split = -(-2.0 * split).exp_m1();
            let mut g = |v: f64| {
                let s = s_split * v.powf(1.0 / p);
                let t = -0.5 * (-s).ln_1p();
                let jac = s_split / p * v.powf(1.0 / p - 1.0) / (2.0 * (1.0 - s));
                f(t) * jac
            };
            adaptive(&mut g, 0.0, 1.0, half)?
        }
        Substitution::Logarithmic { floor } => {
            if floor < split {
                let mut g = |u: f64| {
                    let t = u.exp();
                    f(t) * t
                };
                adaptive(&mut g, floor.ln(), split.ln(), half)?
            } else {
                Integral::zero()
            }
        }
    };

    let fs = f(split).magnitude();
    let eff = tol.target(head.value.magnitude(), head.l1).max(f64::MIN_POSITIVE);
    let mut t_cut = (2.0 * split).max(((10.0 / eff).ln() + (1.0 + fs).ln()) / lambda);
    let mut bound = f64::INFINITY;
    for _ in 0..40 {
        bound = f(t_cut).magnitude().max(f(0.95 * t_cut).magnitude()) / lambda;
        if bound < eff / 10.0 {
            break;
        }
        t_cut *= 1.5;
    }
    if !(bound < eff / 10.0) {
        return Err(Error::NonConvergence(format!("tail bound {bound:e} does not fall below {:e}", eff / 10.0)));
    }
    let tail_tol = Tolerance { abs: 0.5 * tol.abs, rel: tol.rel, l1: tol.l1 };
    let tail = adaptive(&mut f, split, t_cut, tail_tol)?;
    let mut out = head.combine(tail);
    out.error += bound;
    out.evaluations += 3;
    Ok(out)
}

/// Angular node layout for shell integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellRule {
    pub radial: Tolerance,
    /// Trapezoid nodes on the circle (n = 2) or azimuthal nodes (n = 3).
    pub angular_nodes: usize,
}

impl Default for ShellRule {
    fn default() -> Self {
        ShellRule { radial: Tolerance::relative(1e-12).with_l1(1e-14), angular_nodes: 64 }
    }
}

pub const MIN_ANGULAR_NODES: usize = 8;

/// Directions and weights of a product rule on `S^{n-1}` (weights sum to its area).
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n: usize, nodes: usize) -> Result<SphereRule> {
        if nodes < MIN_ANGULAR_NODES && n > 1 {
            return Err(Error::InvalidArgument(format!(
                "angular density {nodes} below the minimum {MIN_ANGULAR_NODES}"
            )));
        }
        match n {
            1 => Ok(SphereRule { directions: vec![vec![1.0], vec![-1.0]], weights: vec![1.0, 1.0] }),
            2 => {
                let w = 2.0 * PI / nodes as f64;
                let directions = (0..nodes)
                    .map(|j| {
                        let th = 2.0 * PI * j as f64 / nodes as f64;
                        vec![th.cos(), th.sin()]
                    })
                    .collect();
                Ok(SphereRule { directions, weights: vec![w; nodes] })
            }
            3 => {
                let gl = gauss_legendre_rule((nodes / 2).max(2))?;
                let wphi = 2.0 * PI / nodes as f64;
                let mut directions = Vec::new();
                let mut weights = Vec::new();
                for (&c, &wc) in gl.nodes.iter().zip(&gl.weights) {
                    let s = (1.0 - c * c).sqrt();
                    for j in 0..nodes {
                        let ph = 2.0 * PI * j as f64 / nodes as f64;
                        directions.push(vec![s * ph.cos(), s * ph.sin(), c]);
                        weights.push(wc * wphi);
                    }
                }
                Ok(SphereRule { directions, weights })
            }
            _ => Err(Error::InvalidArgument(format!("shell integrals support n ≤ 3, got {n}"))),
        }
    }
}

/// `∫_{ε < |y - x| < R} f(y) dy` in polar coordinates about `x`.
pub fn shell_integral<F>(f: F, center: &[f64], eps: f64, outer: f64, rule: &ShellRule) -> Result<Integral<Complex64>>
where
    F: Fn(&[f64]) -> Complex64,
{
    let n = center.len();
    if !(0.0 < eps && eps < outer) {
        return Err(Error::InvalidArgument(format!("need 0 < ε < R, got ε = {eps}, R = {outer}")));
    }
    if n == 1 {
        let x = center[0];
        let mut right = |y: f64| f(&[y]);
        let r = adaptive(&mut right, x + eps, x + outer, rule.radial)?;
        let mut left = |y: f64| f(&[y]);
        let l = adaptive(&mut left, x - outer, x - eps, rule.radial)?;
        return Ok(l.combine(r));
    }
    let sphere = SphereRule::new(n, rule.angular_nodes)?;
    let mut y = vec![0.0; n];
    let mut radial = |r: f64| {
        let terms: Vec<Complex64> = sphere
            .directions
            .iter()
            .zip(&sphere.weights)
            .map(|(d, &w)| {
                for i in 0..n {
                    y[i] = center[i] + r * d[i];
                }
                f(&y) * w
            })
            .collect();
        pairwise_sum(&terms) * r.powi(n as i32 - 1)
    };
    adaptive(&mut radial, eps, outer, rule.radial)
}
