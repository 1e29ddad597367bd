//! The subcommands, as functions returning the bytes they would write.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::ops::{multi_index, KernelId, Operator};
use igauss::certify::{certify_default, BoundCertificate, CertifyParams, EstimateId};
use igauss::hermite::{analyze, synthesize};
use igauss::kernels::{
    classical_riesz_kernel, imaginary_parts, kbar_kernel_with, neg_power_kernel_with, riesz_bar_parts, riesz_parts,
    KernelOptions,
};
use igauss::pv::{pv_apply, PvOptions};
use igauss::semigroup::{mehler_kernel, semigroup_apply, KernelQuery};
use igauss::EnvelopedFunction;
use num_complex::Complex64;

/// Output of one command: the artifact and whether it met its acceptance rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub body: Vec<u8>,
    pub ok: bool,
    /// Diagnostics for stderr.
    pub notes: Vec<String>,
}

fn function(cfg: &RunConfig, json: &str) -> CliResult<EnvelopedFunction> {
    let f = EnvelopedFunction::from_json(json).map_err(|e| CliError::Usage(e.to_string()))?;
    if f.dim() != cfg.dim {
        return Err(CliError::Usage(format!("input function has dimension {}, config says {}", f.dim(), cfg.dim)));
    }
    Ok(f)
}

/// Points as `[[x1, …, xn], …]`, or a flat list when `n = 1`.
pub fn parse_points(json: &str, dim: usize) -> CliResult<Vec<Vec<f64>>> {
    let v: serde_json::Value =
        serde_json::from_str(json).map_err(|e| CliError::Usage(format!("malformed points JSON: {e}")))?;
    let arr = v.as_array().ok_or_else(|| CliError::Usage("points JSON must be an array".into()))?;
    let mut out = Vec::with_capacity(arr.len());
    for p in arr {
        let point: Vec<f64> = match p {
            serde_json::Value::Number(x) if dim == 1 => vec![x.as_f64().unwrap_or(f64::NAN)],
            serde_json::Value::Array(xs) => xs.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect(),
            _ => return Err(CliError::Usage(format!("bad point entry `{p}`"))),
        };
        if point.len() != dim || point.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Usage(format!("point `{p}` is not a finite {dim}-vector")));
        }
        out.push(point);
    }
    if out.is_empty() {
        return Err(CliError::Usage("no points given".into()));
    }
    Ok(out)
}

/// A point given as `0.3` or `0.3,-0.2`.
pub fn parse_point(s: &str, dim: usize) -> CliResult<Vec<f64>> {
    let p: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let p = p.map_err(|_| CliError::Usage(format!("bad point `{s}`")))?;
    if p.len() != dim || p.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!("point `{s}` is not a finite {dim}-vector")));
    }
    Ok(p)
}

fn pv_options(cfg: &RunConfig) -> PvOptions {
    PvOptions {
        tol: (1e-2 * cfg.tol).min(1e-7),
        kernel: KernelOptions { region_beta: cfg.split_beta(), ..KernelOptions::default() },
        ..PvOptions::default()
    }
}

fn coordinate_headers(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> CliResult<Vec<u8>> {
    w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}

/// Spectral value and kernel-side value of an operator at each point.
pub fn cmd_apply(cfg: &RunConfig, op: &str, function_json: &str, points: &[Vec<f64>]) -> CliResult<Report> {
    let op = Operator::parse(op, cfg.dim)?;
    let f = function(cfg, function_json)?;
    if let Some(d) = f.degree() {
        if d > cfg.degree {
            return Err(CliError::Usage(format!("input degree {d} exceeds the degree cap {}", cfg.degree)));
        }
    }
    if let Some(p) = points.iter().find(|p| p.len() != cfg.dim) {
        return Err(CliError::Usage(format!("point {p:?} does not have dimension {}", cfg.dim)));
    }
    let image = op.spectral().apply(&analyze(&f, cfg.degree)?)?;
    let opts = pv_options(cfg);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = coordinate_headers("x", cfg.dim);
    header.extend(["spectral_re", "spectral_im", "pv_re", "pv_im", "abs_diff"].map(String::from));
    w.write_record(&header)?;
    let mut ok = true;
    let mut worst = 0.0f64;
    for x in points {
        let spectral = synthesize(&image, x);
        let kernel_side = match (&op, op.pv_kernel()) {
            (Operator::Heat(t), _) if *t == 0.0 => f.eval(x),
            (Operator::Heat(t), _) => semigroup_apply(*t, x, &f, cfg.order)?,
            (_, Some(k)) => pv_apply(&k, &f, x, &opts)?.value,
            (_, None) => unreachable!("only the heat semigroup lacks a kernel"),
        };
        let d = (spectral - kernel_side).norm();
        ok &= d <= cfg.tol;
        worst = worst.max(d);
        let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        for v in [spectral.re, spectral.im, kernel_side.re, kernel_side.im, d] {
            row.push(v.to_string());
        }
        w.write_record(&row)?;
    }
    Ok(Report {
        body: finish_csv(w)?,
        ok,
        notes: vec![format!("{} points, max |spectral - pv| = {worst:e} (tol {:e})", points.len(), cfg.tol)],
    })
}

/// Lattice `{lo + (hi-lo) i/(count-1)}ⁿ` used by [`cmd_kernel`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for KernelGrid {
    fn default() -> Self {
        KernelGrid { lo: -3.0, hi: 3.0, count: 21 }
    }
}

impl KernelGrid {
    fn points(&self, n: usize) -> CliResult<Vec<Vec<f64>>> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() || self.count < 2 {
            return Err(CliError::Usage(format!("grid needs lo < hi and count ≥ 2, got {self:?}")));
        }
        let axis: Vec<f64> =
            (0..self.count).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64).collect();
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out.into_iter().flat_map(|p: Vec<f64>| axis.iter().map(move |&a| [p.clone(), vec![a]].concat())).collect();
        }
        Ok(out)
    }
}

fn kernel_value(id: &KernelId, x: &[f64], y: &[f64], opts: &KernelOptions) -> igauss::Result<Complex64> {
    Ok(match id {
        KernelId::Mehler(t) => Complex64::from(mehler_kernel(&KernelQuery::new(*t, x, y)?)),
        KernelId::NegPower(b) => Complex64::from(neg_power_kernel_with(*b, x, y, opts)?),
        KernelId::Kbar(b) => Complex64::from(kbar_kernel_with(*b, x, y, opts)?),
        KernelId::Riesz(a) => Complex64::from(riesz_parts(a, x, y, opts)?.total()),
        KernelId::RieszBar(a) => Complex64::from(riesz_bar_parts(a, x, y, opts)?.total()),
        KernelId::ClassicalRiesz(a) => Complex64::from(classical_riesz_kernel(a, x, y)?),
        KernelId::Imaginary(g) => imaginary_parts(*g, x, y, opts)?.total(),
    })
}

/// Kernel values on all lattice pairs `(x, y)`, `x` outer, in lexicographic order.
pub fn cmd_kernel(cfg: &RunConfig, kernel: &str, grid: &KernelGrid) -> CliResult<Report> {
    let id = KernelId::parse(kernel, cfg.dim)?;
    let pts = grid.points(cfg.dim)?;
    let opts = KernelOptions { region_beta: cfg.split_beta(), ..KernelOptions::default() };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = coordinate_headers("x", cfg.dim);
    header.extend(coordinate_headers("y", cfg.dim));
    header.extend(["value_re", "value_im"].map(String::from));
    w.write_record(&header)?;
    let mut skipped = Vec::new();
    for x in &pts {
        for y in &pts {
            if id.skips_diagonal() && x == y {
                skipped.push(format!("{x:?}"));
                continue;
            }
            let v = kernel_value(&id, x, y, &opts)?;
            let row: Vec<String> = x.iter().chain(y).chain(&[v.re, v.im]).map(|a| a.to_string()).collect();
            w.write_record(&row)?;
        }
    }
    let mut notes = vec![format!("{} rows, {} diagonal points skipped", pts.len() * pts.len() - skipped.len(), skipped.len())];
    notes.extend(skipped.into_iter().map(|s| format!("skipped diagonal x = y = {s}")));
    Ok(Report { body: finish_csv(w)?, ok: true, notes })
}

/// Extra certification parameters beyond the run configuration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CertifyArgs {
    pub alpha: Option<String>,
    pub gamma: Option<f64>,
    pub power: Option<f64>,
    pub c: Option<f64>,
    pub q: Option<f64>,
}

pub fn cmd_certify(cfg: &RunConfig, estimate: &str, args: &CertifyArgs) -> CliResult<(Report, BoundCertificate)> {
    let id: EstimateId = estimate.parse()?;
    let mut p = CertifyParams::new(cfg.dim);
    p.eta = cfg.eta;
    p.region_beta = cfg.beta;
    if let Some(a) = &args.alpha {
        p.alpha = Some(multi_index(a, cfg.dim)?.components().to_vec());
    }
    if let Some(g) = args.gamma {
        p.gamma = g;
    }
    if let Some(b) = args.power {
        p.power = b;
    }
    if let Some(c) = args.c {
        p.c = c;
    }
    if let Some(q) = args.q {
        p.q = q;
    }
    let cert = certify_default(id, &p, cfg.seed)?;
    let mut body = serde_json::to_vec_pretty(&cert).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    body.push(b'\n');
    let note = format!(
        "{}: C = {:e}, worst verification ratio = {:e}, {:?}",
        cert.estimate, cert.calibrated_c, cert.worst_ratio, cert.verdict
    );
    Ok((Report { body, ok: cert.passed(), notes: vec![note] }, cert))
}

/// The ε-ladder of a principal value with a footer holding the final value.
pub fn cmd_pv_sweep(cfg: &RunConfig, op: &str, function_json: &str, point: &[f64]) -> CliResult<Report> {
    let op = Operator::parse(op, cfg.dim)?;
    let kernel = op.pv_kernel().ok_or_else(|| CliError::Usage("the heat semigroup has no principal value".into()))?;
    let f = function(cfg, function_json)?;
    if point.len() != cfg.dim {
        return Err(CliError::Usage(format!("point has dimension {}, config says {}", point.len(), cfg.dim)));
    }
    let r = pv_apply(&kernel, &f, point, &pv_options(cfg))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["eps", "shell_re", "shell_im", "corrected_re", "corrected_im"])?;
    for row in r.convergence_rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.write_record(["extrapolated".to_string(), String::new(), String::new(), r.value.re.to_string(), r.value.im.to_string()])?;
    let note = format!("value {} ± {:e} after {} kernel evaluations", r.value, r.extrapolation_error, r.kernel_evaluations);
    Ok(Report { body: finish_csv(w)?, ok: r.converged, notes: vec![note] })
}

pub fn cmd_show_config(cfg: &RunConfig) -> CliResult<Report> {
    let mut body = serde_json::to_vec_pretty(cfg).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    body.push(b'\n');
    Ok(Report { body, ok: true, notes: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;

    const H0: &str = r#"{"dim": 1, "terms": [{"exponents": [0], "coeff_re": 1.0}]}"#;

    #[test]
    fn points_accept_flat_and_nested_forms() {
        assert_eq!(parse_points("[0.1, 0.2]", 1).unwrap(), vec![vec![0.1], vec![0.2]]);
        assert_eq!(parse_points("[[0.1, 0.2]]", 2).unwrap(), vec![vec![0.1, 0.2]]);
        assert!(parse_points("[0.1]", 2).is_err());
        assert!(parse_points("[]", 1).is_err());
        assert!(parse_points("{", 1).is_err());
        assert_eq!(parse_point("0.3,-0.2", 2).unwrap(), vec![0.3, -0.2]);
        assert!(parse_point("0.3", 2).is_err());
    }

    #[test]
    fn heat_at_time_zero_is_the_identity() {
        let cfg = RunConfig::default();
        let r = cmd_apply(&cfg, "heat:0", H0, &[vec![0.2], vec![-1.0]]).unwrap();
        assert!(r.ok);
        let text = String::from_utf8(r.body).unwrap();
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert!(cols[5].parse::<f64>().unwrap() < 1e-13, "{line}");
        }
    }

    #[test]
    fn heat_matches_quadrature() {
        let cfg = RunConfig { tol: 1e-12, ..RunConfig::default() };
        let r = cmd_apply(&cfg, "heat:0.5", H0, &[vec![0.2], vec![1.5]]).unwrap();
        assert!(r.ok, "{:?}", r.notes);
    }

    #[test]
    fn kernel_grid_counts_rows() {
        let cfg = RunConfig::default();
        let r = cmd_kernel(&cfg, "mehler:0.5", &KernelGrid { lo: -1.0, hi: 1.0, count: 5 }).unwrap();
        assert_eq!(String::from_utf8(r.body).unwrap().lines().count(), 1 + 25);
        let r = cmd_kernel(&cfg, "classical-riesz:1", &KernelGrid { lo: -1.0, hi: 1.0, count: 5 }).unwrap();
        assert_eq!(String::from_utf8(r.body).unwrap().lines().count(), 1 + 20);
        assert!(r.notes[0].contains("5 diagonal points skipped"));
    }

    #[test]
    fn degree_above_cap_is_a_usage_error() {
        let cfg = RunConfig { degree: 2, ..RunConfig::default() };
        let f = r#"{"dim": 1, "terms": [{"exponents": [3], "coeff_re": 1.0}]}"#;
        assert!(matches!(cmd_apply(&cfg, "riesz:1", f, &[vec![0.0]]), Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_estimate_is_a_usage_error() {
        let e = cmd_certify(&RunConfig::default(), "bogus-id", &CertifyArgs::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
