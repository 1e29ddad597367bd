#![allow(dead_code)]

use igauss::multi_index::graded_indices;
use igauss::{EnvelopedFunction, HermiteExpansion, MultiIndex};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex::new(v.to_vec())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real coefficients in `[-1, 1]` on all `|k| ≤ degree`.
pub fn random_expansion(rng: &mut ChaCha8Rng, n: usize, degree: u32) -> HermiteExpansion {
    let pairs: Vec<(MultiIndex, Complex64)> =
        graded_indices(n, degree).into_iter().map(|k| (k, Complex64::new(rng.gen_range(-1.0..1.0), 0.0))).collect();
    HermiteExpansion::from_pairs(n, degree, &pairs).unwrap()
}

pub fn random_function(rng: &mut ChaCha8Rng, n: usize, degree: u32) -> (HermiteExpansion, EnvelopedFunction) {
    let e = random_expansion(rng, n, degree);
    let f = EnvelopedFunction::from_expansion(&e);
    (e, f)
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..half)).collect()
}
