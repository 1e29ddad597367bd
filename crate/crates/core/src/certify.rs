//! Calibrate-then-verify checks of the displayed kernel estimates.
//!
//! Each estimate compares a kernel quantity (left side, from [`crate::kernels`])
//! with a closed-form envelope (right side). The constant `C` is set from a
//! coarse calibration grid with 5% headroom and then re-checked on a nested
//! grid at least ten times larger, plus seeded random samples.

use crate::error::{Error, Result};
use crate::kernels::{
    euclid_riesz_first, imaginary_difference, imaginary_majorant, neg_power_kernel_with, riesz_bar_difference,
    riesz_difference, riesz_kernel_with, KernelOptions,
};
use crate::multi_index::MultiIndex;
use crate::quadrature::{adaptive, Tolerance};
use crate::regions::{m_fn, RegionSpec};
use crate::semigroup::{mehler_dx, KernelQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub const DISCLAIMER: &str = "numerical evidence only";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateId {
    /// `M_β ≤ C·(Gaussian envelope)` off `N`.
    MbetaGlobal,
    /// `M_β` against the angular envelope `min{(1+|x|)ⁿ, (|x| sin θ)^{-n}} + …` off `N`.
    MbetaAngular,
    /// `|R_α| ≤ C·(envelope with η)` off `N_{1/η}`.
    RieszGlobal,
    /// `|R_α - ℝ_α| ≤ C √(1+|x|) / |x-y|^{n-1/2}` on `N_{1/η}`.
    RieszLocalDiff,
    /// Same bound for `R̄_α` minus its Euclidean part.
    RieszBarLocalDiff,
    /// First-order Riesz kernels: local difference and global size together.
    FirstOrderComparison,
    /// `sup_x ∫ M_β χ_N dy`.
    SchurLocal,
    /// `sup_x ∫ e^{(|x|²-|y|²)/q} M_β χ_{N^c} dy`.
    SchurGlobal,
    /// `|K_γ^𝒜 - K_γ| ≤ C √(1+|x|) / |x-y|^{n-1/2}` on `N_{1/η}`.
    ImaginaryLocalDiff,
    /// `∫|φ_γ||∂_t T_t| dt ≤ C·(Gaussian envelope)` off `N_{2(1+n)}`.
    ImaginaryGlobal,
    /// `|∂_x^ℓ T_t| ≤ C e^{-nt} e^{-c|x-e^{-t}y|²/s} / s^{(n+|ℓ|)/2}`.
    HeatDerivative,
}

impl EstimateId {
    pub const ALL: [EstimateId; 11] = [
        EstimateId::MbetaGlobal,
        EstimateId::MbetaAngular,
        EstimateId::RieszGlobal,
        EstimateId::RieszLocalDiff,
        EstimateId::RieszBarLocalDiff,
        EstimateId::FirstOrderComparison,
        EstimateId::SchurLocal,
        EstimateId::SchurGlobal,
        EstimateId::ImaginaryLocalDiff,
        EstimateId::ImaginaryGlobal,
        EstimateId::HeatDerivative,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateId::MbetaGlobal => "mbeta-global",
            EstimateId::MbetaAngular => "mbeta-angular",
            EstimateId::RieszGlobal => "riesz-global",
            EstimateId::RieszLocalDiff => "riesz-local-diff",
            EstimateId::RieszBarLocalDiff => "riesz-bar-local-diff",
            EstimateId::FirstOrderComparison => "first-order-comparison",
            EstimateId::SchurLocal => "schur-local",
            EstimateId::SchurGlobal => "schur-global",
            EstimateId::ImaginaryLocalDiff => "imaginary-local-diff",
            EstimateId::ImaginaryGlobal => "imaginary-global",
            EstimateId::HeatDerivative => "heat-derivative",
        }
    }

    pub fn region(&self) -> RegionKind {
        match self {
            EstimateId::MbetaGlobal
            | EstimateId::MbetaAngular
            | EstimateId::RieszGlobal
            | EstimateId::SchurGlobal
            | EstimateId::ImaginaryGlobal => RegionKind::Complement,
            EstimateId::RieszLocalDiff
            | EstimateId::RieszBarLocalDiff
            | EstimateId::SchurLocal
            | EstimateId::ImaginaryLocalDiff => RegionKind::Local,
            EstimateId::FirstOrderComparison => RegionKind::Both,
            EstimateId::HeatDerivative => RegionKind::Everywhere,
        }
    }

    /// `β` of the region the estimate lives on.
    pub fn default_region_beta(&self, n: usize, eta: f64) -> f64 {
        match self {
            EstimateId::MbetaGlobal | EstimateId::MbetaAngular | EstimateId::SchurLocal | EstimateId::SchurGlobal => 1.0,
            EstimateId::ImaginaryGlobal => 2.0 * (1.0 + n as f64),
            EstimateId::HeatDerivative => 1.0,
            _ => 1.0 / eta,
        }
    }
}

impl fmt::Display for EstimateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EstimateId::ALL.iter().copied().find(|e| e.as_str() == s).ok_or_else(|| Error::UnknownEstimate(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// Pairs in `N_β`.
    Local,
    /// Pairs outside `N_β`.
    Complement,
    /// Both, with a different envelope on each side.
    Both,
    Everywhere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Estimate parameters. The constants in the envelope exponents are only known to exist;
/// these are the values certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    pub dim: usize,
    /// Envelope exponent `η`; the Riesz region is `N_{1/η}`.
    pub eta: f64,
    /// Overrides the estimate's own region `β`.
    pub region_beta: Option<f64>,
    /// Gaussian constant `c` in `e^{-c|·|²}` factors.
    pub c: f64,
    /// Weight exponent `q` in the global Schur row.
    pub q: f64,
    /// Power `β` of `M_β = 𝒜^{-β}` kernels.
    pub power: f64,
    /// `α` for Riesz estimates, `ℓ` for the heat derivative; defaults to `e¹`.
    pub alpha: Option<Vec<u32>>,
    /// `γ` of the imaginary powers.
    pub gamma: f64,
    pub headroom: f64,
    /// Relative accuracy of each kernel evaluation.
    pub kernel_tol: f64,
}

impl CertifyParams {
    pub fn new(dim: usize) -> Self {
        CertifyParams {
            dim,
            eta: 0.75,
            region_beta: None,
            c: 0.5,
            q: 2.0,
            power: 1.0,
            alpha: None,
            gamma: 1.0,
            headroom: 1.05,
            kernel_tol: 1e-9,
        }
    }

    fn alpha_index(&self) -> Result<MultiIndex> {
        let a = match &self.alpha {
            Some(v) => MultiIndex::new(v.clone()),
            None => MultiIndex::unit(self.dim, 0),
        };
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.dim() });
        }
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::InvalidArgument(format!("certification grids cover n ∈ {{1, 2}}, got {}", self.dim)));
        }
        let positive = [("η", self.eta), ("c", self.c), ("q", self.q), ("power", self.power), ("headroom", self.headroom)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.q > 1.0) {
            return Err(Error::InvalidArgument(format!("q must exceed 1, got {}", self.q)));
        }
        if !(self.kernel_tol > 0.0 && self.kernel_tol < 1e-3) {
            return Err(Error::InvalidArgument(format!("kernel tolerance {} outside (0, 1e-3)", self.kernel_tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// All pairs `(x, y)` of a lattice on `[-L, L]ⁿ`.
    PairLattice,
    /// `y = x + ρω` around lattice points `x`, `ρ` log-spaced from the minimum
    /// separation up to the region radius.
    LocalShells,
    /// `y = x + ρω` with `ρ` log-spaced from the region radius out to radius + span.
    OuterShells,
    /// Local and outer shells together.
    Shells,
    /// Lattice points `x` alone (row integrals).
    RowLattice,
    /// Pair lattice times log-spaced `t`.
    TimedPairs,
}

/// A sampling plan. Refining keeps every point of the coarser plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub box_half: f64,
    pub per_axis: usize,
    pub radii: usize,
    pub directions: usize,
    pub times: usize,
    pub t_range: (f64, f64),
    /// Radial reach of outer shells beyond the region radius.
    pub span: f64,
    /// Also sample `y` on small circles about the origin, where `θ(x, y)` is undefined.
    pub origin_shells: bool,
    pub min_separation: f64,
    pub random_points: usize,
    pub seed: u64,
}

impl GridSpec {
    /// Every lattice dimension refined by `factor`; random points kept.
    pub fn refined(&self, factor: usize, random_points: usize) -> GridSpec {
        let up = |k: usize| if k <= 1 { k } else { (k - 1) * factor + 1 };
        GridSpec {
            per_axis: up(self.per_axis),
            radii: up(self.radii),
            directions: self.directions * factor,
            times: up(self.times),
            random_points,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub calibration: GridSpec,
    pub verification: GridSpec,
}

impl GridPlan {
    /// Default plan: the verification grid is a nested refinement with at least
    /// ten times as many samples.
    pub fn default_for(id: EstimateId, n: usize, seed: u64) -> GridPlan {
        // x-lattices keep 0 and ±1 (where m has its kink) as nodes
        let base = GridSpec {
            kind: GridKind::LocalShells,
            box_half: 4.0,
            per_axis: if n == 1 { 33 } else { 17 },
            radii: if n == 1 { 12 } else { 10 },
            directions: 16,
            times: 6,
            t_range: (1e-3, 5.0),
            span: 8.0,
            origin_shells: false,
            min_separation: 1e-3,
            random_points: 0,
            seed,
        };
        let (calibration, factor, random) = match id {
            EstimateId::SchurLocal | EstimateId::SchurGlobal => {
                let per_axis = if n == 1 { 17 } else { 5 };
                (GridSpec { kind: GridKind::RowLattice, per_axis, ..base }, if n == 1 { 10 } else { 4 }, if n == 1 { 16 } else { 8 })
            }
            EstimateId::HeatDerivative => {
                let per_axis = if n == 1 { 9 } else { 5 };
                (GridSpec { kind: GridKind::TimedPairs, per_axis, ..base }, if n == 1 { 3 } else { 2 }, 256)
            }
            _ => {
                let kind = match id.region() {
                    RegionKind::Local => GridKind::LocalShells,
                    RegionKind::Complement => GridKind::OuterShells,
                    _ => GridKind::Shells,
                };
                let origin_shells = id == EstimateId::MbetaAngular && n > 1;
                (GridSpec { kind, origin_shells, ..base }, if n == 1 { 4 } else { 2 }, 128)
            }
        };
        let verification = calibration.refined(factor, random);
        GridPlan { calibration, verification }
    }
}

/// One sampled configuration; `y` is empty for row integrals, `t` set only for time-dependent estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    #[serde(flatten)]
    pub spec: GridSpec,
    /// Samples actually evaluated (inside the estimate's region).
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub calibration: GridDescriptor,
    pub verification: GridDescriptor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub dim: usize,
    pub region_beta: f64,
    pub eta: f64,
    pub c: f64,
    pub q: f64,
    pub power: f64,
    pub alpha: Vec<u32>,
    pub gamma: f64,
    pub headroom: f64,
    pub kernel_tol: f64,
}

/// Outcome of checking one estimate. `verdict` is pass iff `worst_ratio ≤ calibrated_C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub estimate: String,
    pub region: RegionKind,
    pub params: ResolvedParams,
    #[serde(rename = "calibrated_C")]
    pub calibrated_c: f64,
    pub calibration_max_ratio: f64,
    pub worst_ratio: f64,
    pub worst_sample: Option<Sample>,
    pub grid: GridReport,
    pub seed: u64,
    pub verdict: Verdict,
    pub disclaimer: String,
}

impl BoundCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Off-diagonal Gaussian envelope: `e^{-η|x|²}` if `⟨x,y⟩ ≤ 0`, otherwise
/// `(|x+y|/|x-y|)^{n/2} exp(η((|y|²-|x|²)/2 - |x-y||x+y|/2))`.
pub fn gaussian_envelope(x: &[f64], y: &[f64], eta: f64) -> f64 {
    let n = x.len() as f64;
    let x2 = dot(x, x);
    if dot(x, y) <= 0.0 {
        return (-eta * x2).exp();
    }
    let y2 = dot(y, y);
    let plus: f64 = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
    let minus = dist(x, y);
    (plus / minus).powf(0.5 * n) * (eta * (0.5 * (y2 - x2) - 0.5 * minus * plus)).exp()
}

/// `e^{|y|²-|x|²}(min{(1+|x|)ⁿ, (|x| sin θ)^{-n}} + |x|^{1-n} + e^{-c|y⊥|²}|x|(|y|/|x|)^{n-1}χ_{|y|≤2|x|})`,
/// with `y⊥` the part of `y` orthogonal to `x`. In dimension one `θ = 0` and `y⊥ = 0`.
pub fn angular_envelope(x: &[f64], y: &[f64], c: f64) -> f64 {
    let n = x.len() as i32;
    let nx = norm(x);
    let ny = norm(y);
    let gauss = (ny * ny - nx * nx).exp();
    let sin = if n == 1 || nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        let cos = (dot(x, y) / (nx * ny)).clamp(-1.0, 1.0);
        (1.0 - cos * cos).sqrt()
    };
    let first = (1.0 + nx).powi(n).min((nx * sin).powi(-n));
    let second = if n == 1 { 1.0 } else { nx.powi(1 - n) };
    let third = if nx > 0.0 && ny <= 2.0 * nx {
        let proj = dot(x, y) / (nx * nx);
        let perp2: f64 = x.iter().zip(y).map(|(a, b)| (b - proj * a).powi(2)).sum();
        (-c * perp2).exp() * nx * (ny / nx).powi(n - 1)
    } else {
        0.0
    };
    gauss * (first + second + third)
}

/// `√(1+|x|) / |x-y|^{n-1/2}`.
pub fn local_envelope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    (1.0 + norm(x)).sqrt() / dist(x, y).powf(n - 0.5)
}

/// `e^{-nt} e^{-c|x-e^{-t}y|²/s} / s^{(n+|ℓ|)/2}`, `s = 1-e^{-2t}`.
pub fn heat_derivative_envelope(order: u32, x: &[f64], y: &[f64], t: f64, c: f64) -> f64 {
    let n = x.len() as f64;
    let et = (-t).exp();
    let s = -(-2.0 * t).exp_m1();
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - et * b).powi(2)).sum();
    (-n * t - c * d2 / s).exp() / s.powf(0.5 * (n + order as f64))
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

fn geomspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
}

fn lattice(n: usize, half: f64, k: usize) -> Vec<Vec<f64>> {
    let axis = linspace(-half, half, k);
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| axis.iter().map(move |&a| [p.clone(), vec![a]].concat())).collect();
    }
    out
}

/// Unit vectors at angles `2πk/count` from `x̂` (from `e¹` when `x = 0`).
fn directions(x: &[f64], count: usize) -> Vec<Vec<f64>> {
    if x.len() == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let r = norm(x);
    let phase = if r > 0.0 { x[1].atan2(x[0]) } else { 0.0 };
    let count = count.max(1);
    (0..count)
        .map(|k| {
            let a = phase + 2.0 * PI * k as f64 / count as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

fn local_radii(spec: &GridSpec, top: f64) -> Vec<f64> {
    geomspace(spec.min_separation, top * (1.0 - 1e-12), spec.radii)
}

fn outer_radii(spec: &GridSpec, top: f64) -> Vec<f64> {
    geomspace(top * (1.0 + 1e-9), top + spec.span, spec.radii)
}

fn shells(spec: &GridSpec, n: usize, region: &RegionSpec, inner: bool, outer: bool) -> Vec<Sample> {
    let mut out = Vec::new();
    for x in lattice(n, spec.box_half, spec.per_axis) {
        let top = region.radius(&x);
        let mut radii = Vec::new();
        if inner {
            radii.extend(local_radii(spec, top));
        }
        if outer {
            radii.extend(outer_radii(spec, top));
        }
        let dirs = directions(&x, spec.directions);
        for &rho in &radii {
            for w in &dirs {
                let y: Vec<f64> = x.iter().zip(w).map(|(a, b)| a + rho * b).collect();
                out.push(Sample { x: x.clone(), y, t: None });
            }
        }
        if spec.origin_shells {
            for rho in geomspace(spec.min_separation, 1.0, spec.radii) {
                for w in &dirs {
                    let y: Vec<f64> = w.iter().map(|b| rho * b).collect();
                    if dist(&x, &y) >= spec.min_separation {
                        out.push(Sample { x: x.clone(), y, t: None });
                    }
                }
            }
        }
    }
    out
}

fn pairs(spec: &GridSpec, n: usize) -> Vec<Sample> {
    let pts = lattice(n, spec.box_half, spec.per_axis);
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for x in &pts {
        for y in &pts {
            if dist(x, y) >= spec.min_separation {
                out.push(Sample { x: x.clone(), y: y.clone(), t: None });
            }
        }
    }
    out
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }];
    }
    let a = rng.gen_range(0.0..2.0 * PI);
    vec![a.cos(), a.sin()]
}

fn random_samples(spec: &GridSpec, n: usize, region: &RegionSpec) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let h = spec.box_half;
    let point = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-h..=h)).collect() };
    let mut out = Vec::with_capacity(spec.random_points);
    while out.len() < spec.random_points {
        let x = point(&mut rng);
        let top = region.radius(&x);
        let inner = match spec.kind {
            GridKind::LocalShells => Some(true),
            GridKind::OuterShells => Some(false),
            GridKind::Shells => Some(rng.gen::<bool>()),
            _ => None,
        };
        let s = match (spec.kind, inner) {
            (_, Some(inner)) => {
                let u = rng.gen::<f64>();
                let rho = if inner {
                    spec.min_separation * (top / spec.min_separation).powf(u)
                } else {
                    top * (1.0 + 1e-9) + spec.span * u * u
                };
                let w = random_unit(&mut rng, n);
                let y = x.iter().zip(&w).map(|(a, b)| a + rho * b).collect();
                Sample { x, y, t: None }
            }
            (GridKind::RowLattice, _) => Sample { x, y: vec![], t: None },
            (GridKind::TimedPairs, _) => {
                let y = point(&mut rng);
                let (lo, hi) = spec.t_range;
                let t = lo * (hi / lo).powf(rng.gen::<f64>());
                Sample { x, y, t: Some(t) }
            }
            _ => Sample { y: point(&mut rng), x, t: None },
        };
        if s.y.is_empty() || dist(&s.x, &s.y) >= spec.min_separation {
            out.push(s);
        }
    }
    out
}

/// The samples of a grid, in traversal order.
pub fn grid_samples(spec: &GridSpec, n: usize, region: &RegionSpec) -> Vec<Sample> {
    let mut out = match spec.kind {
        GridKind::PairLattice => pairs(spec, n),
        GridKind::LocalShells => shells(spec, n, region, true, false),
        GridKind::OuterShells => shells(spec, n, region, false, true),
        GridKind::Shells => shells(spec, n, region, true, true),
        GridKind::RowLattice => lattice(n, spec.box_half, spec.per_axis).into_iter().map(|x| Sample { x, y: vec![], t: None }).collect(),
        GridKind::TimedPairs => {
            let ts = geomspace(spec.t_range.0, spec.t_range.1, spec.times);
            pairs(spec, n)
                .into_iter()
                .flat_map(|s| ts.iter().map(move |&t| Sample { t: Some(t), ..s.clone() }))
                .collect()
        }
    };
    out.extend(random_samples(spec, n, region));
    out
}

struct Evaluator {
    id: EstimateId,
    region: RegionSpec,
    alpha: MultiIndex,
    p: ResolvedParams,
    opts: KernelOptions,
}

impl Evaluator {
    fn in_scope(&self, s: &Sample) -> bool {
        match self.id.region() {
            RegionKind::Local => s.y.is_empty() || self.region.contains(&s.x, &s.y),
            RegionKind::Complement => s.y.is_empty() || !self.region.contains(&s.x, &s.y),
            RegionKind::Both | RegionKind::Everywhere => true,
        }
    }

    fn ratio(lhs: f64, rhs: f64) -> f64 {
        if lhs == 0.0 {
            0.0
        } else {
            lhs / rhs
        }
    }

    fn eval(&self, s: &Sample) -> Result<f64> {
        let (x, y) = (&s.x[..], &s.y[..]);
        let p = &self.p;
        Ok(match self.id {
            EstimateId::MbetaGlobal => {
                Self::ratio(neg_power_kernel_with(p.power, x, y, &self.opts)?.abs(), gaussian_envelope(x, y, 1.0))
            }
            EstimateId::MbetaAngular => {
                Self::ratio(neg_power_kernel_with(p.power, x, y, &self.opts)?.abs(), angular_envelope(x, y, p.c))
            }
            EstimateId::RieszGlobal => {
                Self::ratio(riesz_kernel_with(&self.alpha, x, y, &self.opts)?.abs(), gaussian_envelope(x, y, p.eta))
            }
            EstimateId::RieszLocalDiff => {
                Self::ratio(riesz_difference(&self.alpha, x, y, &self.opts)?.abs(), local_envelope(x, y))
            }
            EstimateId::RieszBarLocalDiff => {
                Self::ratio(riesz_bar_difference(&self.alpha, x, y, &self.opts)?.abs(), local_envelope(x, y))
            }
            EstimateId::FirstOrderComparison => {
                let local = self.region.contains(x, y);
                let mut worst = 0.0f64;
                for i in 0..x.len() {
                    let e = MultiIndex::unit(x.len(), i);
                    let r = if local {
                        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                        let d = riesz_kernel_with(&e, x, y, &self.opts)? - euclid_riesz_first(i, &z)?;
                        Self::ratio(d.abs(), local_envelope(x, y))
                    } else {
                        Self::ratio(riesz_kernel_with(&e, x, y, &self.opts)?.abs(), gaussian_envelope(x, y, p.eta))
                    };
                    worst = worst.max(r);
                }
                worst
            }
            EstimateId::SchurLocal => self.row_integral(x, true)?,
            EstimateId::SchurGlobal => self.row_integral(x, false)?,
            EstimateId::ImaginaryLocalDiff => {
                Self::ratio(imaginary_difference(p.gamma, x, y, &self.opts)?.norm(), local_envelope(x, y))
            }
            EstimateId::ImaginaryGlobal => {
                Self::ratio(imaginary_majorant(p.gamma, x, y, &self.opts)?, gaussian_envelope(x, y, 1.0))
            }
            EstimateId::HeatDerivative => {
                let t = s.t.ok_or_else(|| Error::InvalidArgument("heat-derivative samples need a time".into()))?;
                let q = KernelQuery::new(t, x, y)?;
                Self::ratio(mehler_dx(&self.alpha, &q).abs(), heat_derivative_envelope(self.alpha.order(), x, y, t, p.c))
            }
        })
    }

    /// `∫ w(y) M_β(x, y) dy` over the local ball (weight 1) or its complement
    /// (weight `e^{(|x|²-|y|²)/q}`), in polar coordinates about `x`.
    fn row_integral(&self, x: &[f64], local: bool) -> Result<f64> {
        let n = x.len();
        let rho = self.region.radius(x);
        let x2 = dot(x, x);
        let tol = Tolerance { abs: 0.0, rel: 1e-7, l1: 1e-8 };
        let kernel = |y: &[f64]| -> Result<f64> {
            let k = neg_power_kernel_with(self.p.power, x, y, &self.opts)?;
            Ok(if local { k } else { k * ((x2 - dot(y, y)) / self.p.q).exp() })
        };
        let shell = |r: f64| -> Result<f64> {
            if r == 0.0 {
                return Ok(0.0);
            }
            if n == 1 {
                return Ok(kernel(&[x[0] + r])? + kernel(&[x[0] - r])?);
            }
            // periodic trapezoid, doubled until stable
            let mut m = 32;
            let mut prev = f64::NAN;
            let mut vals: Vec<f64> = Vec::new();
            loop {
                let h = 2.0 * PI / m as f64;
                let new: Vec<f64> = (0..m)
                    .filter(|k| vals.is_empty() || k % 2 == 1)
                    .map(|k| {
                        let a = k as f64 * h;
                        kernel(&[x[0] + r * a.cos(), x[1] + r * a.sin()])
                    })
                    .collect::<Result<_>>()?;
                vals.extend(new);
                let cur = vals.iter().sum::<f64>() * h * r;
                if (cur - prev).abs() <= 1e-8 * cur.abs() || m >= 1024 {
                    return Ok(cur);
                }
                prev = cur;
                m *= 2;
            }
        };
        let mut failure: Option<Error> = None;
        let mut f = |r: f64| match shell(r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let v = if local {
            // r = ρ v², absorbing the diagonal singularity
            let mut g = |v: f64| 2.0 * rho * v * f(rho * v * v);
            adaptive(&mut g, 0.0, 1.0, tol)?
        } else {
            let far = norm(x) + (24.0 * self.p.q).sqrt() + 1.0;
            let mut g = |u: f64| {
                let r = u.exp();
                f(r) * r
            };
            adaptive(&mut g, rho.ln(), far.max(2.0 * rho).ln(), tol)?
        };
        match failure {
            Some(e) => Err(e),
            None => Ok(v.value),
        }
    }
}

fn evaluate(ev: &Evaluator, samples: &[Sample]) -> Result<Vec<(usize, f64)>> {
    let scoped: Vec<usize> = (0..samples.len()).filter(|&i| ev.in_scope(&samples[i])).collect();
    scoped.par_iter().map(|&i| ev.eval(&samples[i]).map(|r| (i, r))).collect()
}

fn worst(ratios: &[(usize, f64)]) -> (f64, Option<usize>) {
    let mut best = (0.0f64, None);
    for &(i, r) in ratios {
        if r.is_nan() {
            return (f64::NAN, Some(i));
        }
        if best.1.is_none() || r > best.0 {
            best = (r, Some(i));
        }
    }
    best
}

/// Calibrates `C` on `grids.calibration` and verifies it on `grids.verification`.
pub fn certify(id: EstimateId, grids: &GridPlan, params: &CertifyParams) -> Result<BoundCertificate> {
    params.validate()?;
    let n = params.dim;
    let alpha = params.alpha_index()?;
    let region_beta = params.region_beta.unwrap_or_else(|| id.default_region_beta(n, params.eta));
    let region = RegionSpec::new(region_beta, n)?;
    let resolved = ResolvedParams {
        dim: n,
        region_beta,
        eta: params.eta,
        c: params.c,
        q: params.q,
        power: params.power,
        alpha: alpha.components().to_vec(),
        gamma: params.gamma,
        headroom: params.headroom,
        kernel_tol: params.kernel_tol,
    };
    let ev = Evaluator {
        id,
        region,
        alpha,
        p: resolved.clone(),
        opts: KernelOptions { rel_tol: params.kernel_tol, ..KernelOptions::default() },
    };
    let coarse = grid_samples(&grids.calibration, n, &region);
    let cal = evaluate(&ev, &coarse)?;
    if cal.is_empty() {
        return Err(Error::DegenerateGrid(format!("no calibration samples fall in the region of {id}")));
    }
    let (cal_max, _) = worst(&cal);
    if !cal_max.is_finite() {
        return Err(Error::DegenerateGrid(format!("calibration ratio for {id} is {cal_max}")));
    }
    let c = params.headroom * cal_max;
    let fine = grid_samples(&grids.verification, n, &region);
    let ver = evaluate(&ev, &fine)?;
    if ver.is_empty() {
        return Err(Error::DegenerateGrid(format!("no verification samples fall in the region of {id}")));
    }
    let (w, at) = worst(&ver);
    let verdict = if w <= c { Verdict::Pass } else { Verdict::Fail };
    Ok(BoundCertificate {
        estimate: id.as_str().to_string(),
        region: id.region(),
        params: resolved,
        calibrated_c: c,
        calibration_max_ratio: cal_max,
        worst_ratio: w,
        worst_sample: at.map(|i| fine[i].clone()),
        grid: GridReport {
            calibration: GridDescriptor { spec: grids.calibration.clone(), samples: cal.len() },
            verification: GridDescriptor { spec: grids.verification.clone(), samples: ver.len() },
        },
        seed: grids.verification.seed,
        verdict,
        disclaimer: DISCLAIMER.to_string(),
    })
}

/// [`certify`] with the default grid plan.
pub fn certify_default(id: EstimateId, params: &CertifyParams, seed: u64) -> Result<BoundCertificate> {
    certify(id, &GridPlan::default_for(id, params.dim, seed), params)
}

/// `m(x)`-scaled distance `|x-y| / √m(x)`, handy for reporting where a worst sample sits.
pub fn scaled_distance(x: &[f64], y: &[f64]) -> f64 {
    dist(x, y) / m_fn(x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in EstimateId::ALL {
            assert_eq!(id.as_str().parse::<EstimateId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.as_str()));
        }
        assert!(matches!("bogus".parse::<EstimateId>(), Err(Error::UnknownEstimate(_))));
    }

    #[test]
    fn refined_grids_nest_and_grow_tenfold() {
        for n in 1..=2 {
            for id in EstimateId::ALL {
                let plan = GridPlan::default_for(id, n, 7);
                let region = RegionSpec::new(id.default_region_beta(n, 0.75), n).unwrap();
                let coarse = grid_samples(&plan.calibration, n, &region);
                let fine = grid_samples(&plan.verification, n, &region);
                assert!(fine.len() >= 10 * coarse.len(), "{id} n={n}: {} vs {}", fine.len(), coarse.len());
                let key = |s: &Sample| format!("{:?}", (s.x.iter().chain(&s.y).map(|v| (v * 1e9).round() as i64).collect::<Vec<_>>(), s.t.map(|t| (t * 1e12).round() as i64)));
                let have: std::collections::HashSet<String> = fine.iter().map(key).collect();
                assert!(coarse.iter().all(|s| have.contains(&key(s))), "{id} n={n}: calibration not nested");
            }
        }
    }

    #[test]
    fn samples_avoid_the_diagonal() {
        let region = RegionSpec::new(4.0 / 3.0, 2).unwrap();
        let plan = GridPlan::default_for(EstimateId::RieszLocalDiff, 2, 3);
        for s in grid_samples(&plan.verification, 2, &region) {
            assert!(dist(&s.x, &s.y) >= 1e-3 * (1.0 - 1e-12));
            assert!(region.contains(&s.x, &s.y));
        }
    }

    #[test]
    fn random_samples_depend_on_seed_only() {
        let region = RegionSpec::new(1.0, 2).unwrap();
        let mut spec = GridPlan::default_for(EstimateId::MbetaGlobal, 2, 11).verification;
        spec.per_axis = 2;
        let a = grid_samples(&spec, 2, &region);
        let b = grid_samples(&spec, 2, &region);
        assert_eq!(a, b);
        spec.seed = 12;
        assert_ne!(a, grid_samples(&spec, 2, &region));
    }

    #[test]
    fn envelope_examples() {
        assert!((gaussian_envelope(&[1.0], &[-2.0], 0.75) - (-0.75f64).exp()).abs() < 1e-15);
        // x = y direction, |x+y|/|x-y| = 3 for x=1, y=2
        let v = gaussian_envelope(&[1.0], &[2.0], 1.0);
        assert!((v - 3f64.sqrt() * (1.5 - 1.5f64).exp()).abs() < 1e-14);
        assert!((local_envelope(&[3.0], &[3.25]) - 2.0 / 0.5).abs() < 1e-14);
        // n = 1: (1+|x|) + 1 + |x| χ_{|y| ≤ 2|x|}
        let a = angular_envelope(&[2.0], &[3.0], 0.5);
        assert!((a - 5f64.exp() * (3.0 + 1.0 + 2.0)).abs() < 1e-10 * a);
        let a = angular_envelope(&[2.0], &[5.0], 0.5);
        assert!((a - 21f64.exp() * 4.0).abs() < 1e-10 * a);
        // orthogonal y in 2D: sin θ = 1, y⊥ = y
        let a = angular_envelope(&[2.0, 0.0], &[0.0, 1.0], 0.5);
        let want = (-3f64).exp() * (0.25 + 0.5 + (-0.5f64).exp() * 2.0 * 0.5);
        assert!((a - want).abs() < 1e-14);
    }

    #[test]
    fn small_certificate_serializes_with_required_fields() {
        let params = CertifyParams::new(1);
        let mut plan = GridPlan::default_for(EstimateId::MbetaGlobal, 1, 5);
        plan.calibration.per_axis = 5;
        plan.verification = plan.calibration.refined(2, 4);
        let c = certify(EstimateId::MbetaGlobal, &plan, &params).unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        for key in ["estimate", "params", "calibrated_C", "worst_ratio", "grid", "verdict", "disclaimer", "seed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["disclaimer"], "numerical evidence only");
        assert_eq!(c.passed(), c.worst_ratio <= c.calibrated_c);
        assert!(c.calibrated_c > 0.0 && c.calibrated_c.is_finite());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let mut p = CertifyParams::new(3);
        assert!(certify_default(EstimateId::MbetaGlobal, &p, 1).is_err());
        p.dim = 1;
        p.eta = -1.0;
        assert!(certify_default(EstimateId::MbetaGlobal, &p, 1).is_err());
        let mut p = CertifyParams::new(1);
        p.alpha = Some(vec![1, 0]);
        assert!(matches!(certify_default(EstimateId::RieszGlobal, &p, 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn empty_region_is_degenerate() {
        let params = CertifyParams::new(1);
        let mut plan = GridPlan::default_for(EstimateId::MbetaGlobal, 1, 5);
        // A small pair lattice lies entirely inside N₁, where the global estimate is not asserted.
        plan.calibration.kind = GridKind::PairLattice;
        plan.calibration.box_half = 0.1;
        plan.calibration.per_axis = 3;
        plan.calibration.random_points = 0;
        plan.verification = plan.calibration.clone();
        assert!(matches!(certify(EstimateId::MbetaGlobal, &plan, &params), Err(Error::DegenerateGrid(_))));
    }
}
