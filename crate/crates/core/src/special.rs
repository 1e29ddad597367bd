//! Special functions and small numeric primitives.
//!
//! The complex Gamma function uses the Lanczos approximation (g = 7, nine
//! coefficients) with reflection for `Re z < 1/2`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::Add;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex Gamma function.
pub fn cgamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::new(PI, 0.0) / (s * cgamma(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_P[0], 0.0);
    for (i, &p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += p / (z + i as f64);
    }
    let w = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * w.powc(z + 0.5) * (-w).exp() * acc
}

/// Real Gamma function. Exact factorials are used at small positive integers.
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 && x == x.floor() && x <= 171.0 {
        return factorial(x as u32 - 1);
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_P[0];
    for (i, &p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += p / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * acc
}

/// `m!` as a float (exact below 2^53, correctly rounded products above).
pub fn factorial(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, j| acc * j as f64)
}

/// Falling factorial `k (k-1) ... (k-a+1)` as an exact integer when it fits.
pub fn falling_factorial_exact(k: u32, a: u32) -> Option<u128> {
    if a > k {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for j in (k - a + 1)..=k {
        acc = acc.checked_mul(j as u128)?;
    }
    Some(acc)
}

/// Falling factorial as a float, routed through the exact integer product.
pub fn falling_factorial(k: u32, a: u32) -> f64 {
    match falling_factorial_exact(k, a) {
        Some(v) => v as f64,
        None => ((k - a + 1)..=k).fold(1.0, |acc, j| acc * j as f64),
    }
}

/// `1 - e^{-x}` without cancellation for small `x`.
#[inline]
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Lower incomplete Gamma `γ(a, x) = ∫_0^x s^{a-1} e^{-s} ds` by its power series.
///
/// Intended for `x ≲ 60`; the series is summed until terms drop below
/// `1e-17` of the running sum.
pub fn lower_gamma(a: Complex64, x: f64) -> Complex64 {
    if x <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut term = Complex64::new(1.0, 0.0) / a;
    let mut sum = term;
    for k in 1..2000 {
        term *= x / (a + k as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && (k as f64) > x {
            break;
        }
    }
    sum * (a * x.ln() - x).exp()
}

/// Pairwise (cascade) summation in the order given.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().fold(T::default(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Area of the unit sphere `S^{n-1}` in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}
