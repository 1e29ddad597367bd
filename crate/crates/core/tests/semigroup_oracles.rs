mod common;

use common::{mi, random_point, rng};
use igauss::hermite::hermite_tilde;
use igauss::multi_index::graded_indices;
use igauss::semigroup::{delta_dx_tbar, mehler_dt, mehler_dx, mehler_kernel, semigroup_apply, KernelQuery};
use igauss::{EnvelopedFunction, HermiteExpansion, MultiIndex};
use rand::Rng;

const H: f64 = 1e-4;

/// Max over the sample points, relative to the largest exact value.
fn eigen_error(n: usize, k: &MultiIndex, t: f64, pts: &[Vec<f64>]) -> f64 {
    let f = EnvelopedFunction::from_expansion(&HermiteExpansion::from_real(n, &[(k.components(), 1.0)]).unwrap());
    let lam = (k.order() as usize + n) as f64;
    let exact: Vec<f64> = pts.iter().map(|x| (-lam * t).exp() * hermite_tilde(k, x)).collect();
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    pts.iter()
        .zip(&exact)
        .map(|(x, e)| (semigroup_apply(t, x, &f, 48).unwrap() - e).norm() / scale)
        .fold(0.0, f64::max)
}

#[test]
fn hermite_functions_are_eigenfunctions_of_the_semigroup() {
    let mut r = rng(11);
    for n in [1usize, 2] {
        let pts: Vec<Vec<f64>> = (0..25).map(|_| random_point(&mut r, n, 2.5)).collect();
        for k in graded_indices(n, 6) {
            for t in [0.1, 0.5, 1.0] {
                let e = eigen_error(n, &k, t, &pts);
                assert!(e <= 1e-8, "n={n} k={k:?} t={t}: {e:e}");
            }
        }
    }
}

fn q<'a>(t: f64, x: &'a [f64], y: &'a [f64]) -> KernelQuery<'a> {
    KernelQuery::new(t, x, y).unwrap()
}

fn shifted(x: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut v = x.to_vec();
    v[i] += h;
    v
}

/// Natural size of `∂^ℓ T_t` near `(x, y)`, used where the derivative itself crosses zero.
fn scale(l: &MultiIndex, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let s = 1.0 - (-2.0 * t).exp();
    mehler_kernel(&q(t, x, y)) * s.powf(-0.5 * l.order() as f64)
}

/// Fourth-order central difference `(g(-2h) - 8g(-h) + 8g(h) - g(2h)) / 12h`.
fn central(g: impl Fn(f64) -> f64) -> f64 {
    (g(-2.0 * H) - 8.0 * g(-H) + 8.0 * g(H) - g(2.0 * H)) / (12.0 * H)
}

fn lower(l: &MultiIndex) -> (usize, MultiIndex) {
    let i = l.components().iter().position(|&a| a > 0).unwrap();
    (i, l.checked_sub(&MultiIndex::unit(l.dim(), i)).unwrap())
}

#[test]
fn derivative_formulas_match_central_differences() {
    let mut r = rng(5);
    for n in [1usize, 2] {
        let ls: Vec<MultiIndex> = graded_indices(n, 3).into_iter().filter(|l| !l.is_zero()).collect();
        for _ in 0..50 {
            let x = random_point(&mut r, n, 2.0);
            let y = random_point(&mut r, n, 2.0);
            let t = 10f64.powf(r.gen_range(-2.0..0.5));
            for l in &ls {
                let (i, m) = lower(l);
                let a = mehler_dx(l, &q(t, &x, &y));
                let fd = central(|h| mehler_dx(&m, &q(t, &shifted(&x, i, h), &y)));
                let tol = 1e-6 * a.abs().max(scale(l, t, &x, &y));
                assert!((a - fd).abs() <= tol, "∂^{l:?} at x={x:?} y={y:?} t={t}: {a} vs {fd}");

                // δ_i = -½ e^{-x_i²} ∂_i e^{x_i²}
                let d = delta_dx_tbar(l, &q(t, &x, &y));
                let g = |h: f64| {
                    let xs = shifted(&x, i, h);
                    (xs[i] * xs[i]).exp() * delta_dx_tbar(&m, &q(t, &xs, &y))
                };
                let fd = -0.5 * (-x[i] * x[i]).exp() * central(g);
                let sc = (n as f64 * t).exp()
                    * (y.iter().map(|v| v * v).sum::<f64>() - x.iter().map(|v| v * v).sum::<f64>()).exp()
                    * scale(l, t, &y, &x);
                assert!((d - fd).abs() <= 1e-6 * d.abs().max(sc), "δ^{l:?} at x={x:?} y={y:?} t={t}: {d} vs {fd}");
            }
            // T > 0, so compare logarithmic derivatives; ln T stays smooth on the step scale deep in the tail.
            let a = mehler_dt(&q(t, &x, &y)) / mehler_kernel(&q(t, &x, &y));
            let fd = central(|h| mehler_kernel(&q(t + h, &x, &y)).ln());
            let s = 1.0 - (-2.0 * t).exp();
            assert!((a - fd).abs() <= 1e-6 * a.abs().max(1.0 / s), "∂_t at x={x:?} y={y:?} t={t}: {a} vs {fd}");
        }
    }
}

#[test]
fn first_derivative_has_the_hermite_form() {
    let (x, y, t) = ([0.4], [-0.3], 0.7f64);
    let s: f64 = 1.0 - (-2.0 * t).exp();
    let u = (x[0] - (-t).exp() * y[0]) / s.sqrt();
    let want = -mehler_kernel(&q(t, &x, &y)) * 2.0 * u / s.sqrt();
    let got = mehler_dx(&mi(&[1]), &q(t, &x, &y));
    assert!((got - want).abs() <= 1e-14 * want.abs());
}
