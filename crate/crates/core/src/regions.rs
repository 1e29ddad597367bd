//! Local/global geometry: `m(x)`, the regions `N_β`, and the angle `θ(x, y)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `m(x) = min{1, 1/|x|²}`.
pub fn m_fn(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|a| a * a).sum();
    if r2 <= 1.0 {
        1.0
    } else {
        1.0 / r2
    }
}

/// `N_β = {(x, y) : |x - y| ≤ β n min{1, 1/|x|}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub beta: f64,
    pub dim: usize,
}

impl RegionSpec {
    pub fn new(beta: f64, dim: usize) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("region β must be positive, got {beta}")));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(RegionSpec { beta, dim })
    }

    /// Radius of the slice `{y : (x, y) ∈ N_β}`.
    pub fn radius(&self, x: &[f64]) -> f64 {
        self.beta * self.dim as f64 * m_fn(x).sqrt()
    }

    pub fn contains(&self, x: &[f64], y: &[f64]) -> bool {
        let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        d <= self.radius(x)
    }
}

/// `(x, y) ∈ N_β`.
pub fn in_region(x: &[f64], y: &[f64], spec: &RegionSpec) -> Result<bool> {
    if x.len() != spec.dim || y.len() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: if x.len() != spec.dim { x.len() } else { y.len() } });
    }
    Ok(spec.contains(x, y))
}

/// Radius `β n min{1, 1/|x|}` of the local region around `x`.
pub fn region_radius(x: &[f64], beta: f64) -> f64 {
    beta * x.len() as f64 * m_fn(x).sqrt()
}

/// Angle in `[0, π]` between `x` and `y`; 0 in dimension one or when either vanishes.
pub fn angle(x: &[f64], y: &[f64]) -> f64 {
    if x.len() <= 1 {
        return 0.0;
    }
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    // 2 atan(|x̂ - ŷ| / |x̂ + ŷ|) stays accurate near 0 and π.
    let (mut d, mut s) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (u, v) = (a / nx, b / ny);
        d += (u - v) * (u - v);
        s += (u + v) * (u + v);
    }
    2.0 * d.sqrt().atan2(s.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn m_examples() {
        assert_eq!(m_fn(&[0.0]), 1.0);
        assert_eq!(m_fn(&[2.0]), 0.25);
        assert_eq!(m_fn(&[0.0, 2.0]), 0.25);
        assert_eq!(m_fn(&[0.5]), 1.0);
    }

    #[test]
    fn region_examples() {
        let s = RegionSpec::new(1.0, 1).unwrap();
        assert!(in_region(&[2.0], &[2.4], &s).unwrap());
        assert!(!in_region(&[3.0], &[4.0], &s).unwrap());
        assert!(in_region(&[0.0], &[1.0], &s).unwrap());
        assert!(in_region(&[0.0], &[-1.0], &s).unwrap());
        assert!(!in_region(&[0.0], &[1.0 + 1e-12], &s).unwrap());
        let s2 = RegionSpec::new(0.5, 2).unwrap();
        assert!(in_region(&[0.0, 0.0], &[0.6, 0.8], &s2).unwrap());
        assert!(in_region(&[0.0], &[0.0, 1.0], &s).is_err());
        assert!(RegionSpec::new(0.0, 1).is_err());
    }

    #[test]
    fn angle_examples() {
        assert!((angle(&[1.0, 0.0], &[0.0, 1.0]) - PI / 2.0).abs() < 1e-15);
        assert_eq!(angle(&[1.0], &[-3.0]), 0.0);
        assert_eq!(angle(&[2.0, 4.0], &[1.0, 2.0]), 0.0);
        assert!((angle(&[1.0, 0.0], &[-1.0, 0.0]) - PI).abs() < 1e-15);
    }

    fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-6.0f64..6.0, n)
    }

    proptest! {
        #[test]
        fn rescaling_keeps_pairs_outside(n in 1usize..=3, beta in 0.1f64..3.0, a in 0.01f64..0.999,
                                         x in point(3), y in point(3)) {
            let (x, y) = (&x[..n], &y[..n]);
            let s = RegionSpec::new(beta, n).unwrap();
            prop_assume!(!s.contains(x, y));
            let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
            let ay: Vec<f64> = y.iter().map(|v| a * v).collect();
            let s2 = RegionSpec::new(a * a * beta, n).unwrap();
            prop_assert!(!s2.contains(&ax, &ay));
        }

        #[test]
        fn sqrt_m_comparable_to_inverse_norm(x in point(3)) {
            let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            let v = (1.0 + r) * m_fn(&x).sqrt();
            prop_assert!((1.0..=2.0).contains(&v));
        }

        #[test]
        fn m_ratio_bounded_in_region(n in 1usize..=3, beta in 0.1f64..2.0, x in point(3), dir in point(3), t in 0.0f64..1.0) {
            let x = &x[..n];
            let d = &dir[..n];
            let dn = d.iter().map(|a| a * a).sum::<f64>().sqrt();
            prop_assume!(dn > 1e-6);
            let s = RegionSpec::new(beta, n).unwrap();
            let rad = t * s.radius(x);
            let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + rad * b / dn).collect();
            prop_assert!(s.contains(x, &y));
            let bound = 4.0 * (1.0 + beta * n as f64).powi(2);
            let q = m_fn(x) / m_fn(&y);
            prop_assert!(q <= bound * (1.0 + 1e-12) && q >= 1.0 / bound / (1.0 + 1e-12));
        }

        #[test]
        fn angle_in_range(x in point(3), y in point(3)) {
            let t = angle(&x, &y);
            prop_assert!((0.0..=PI).contains(&t));
        }
    }
}
