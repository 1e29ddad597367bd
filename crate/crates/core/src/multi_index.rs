//! Multi-indices in `N^n` and the graded lexicographic enumeration used for
//! dense coefficient tables.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A multi-index `k = (k_1, ..., k_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit multi-index `e^i` (zero-based axis).
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut v = vec![0; n];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|k| = k_1 + ... + k_n`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` when some component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn all_even(&self) -> bool {
        self.0.iter().all(|c| c % 2 == 0)
    }

    /// Position of this index in the graded lexicographic order of its dimension.
    pub fn rank(&self) -> usize {
        let n = self.dim();
        let d = self.order() as usize;
        count_up_to(n, d as isize - 1) + rank_within(&self.0, d)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Number of indices in dimension `n` with `|k| = d`.
fn count_exact(n: usize, d: usize) -> usize {
    if n == 0 {
        return usize::from(d == 0);
    }
    binomial(d + n - 1, n - 1)
}

/// Number of indices in dimension `n` with `|k| <= d` (0 when `d < 0`).
pub fn count_up_to(n: usize, d: isize) -> usize {
    if d < 0 {
        return 0;
    }
    binomial(d as usize + n, n)
}

fn rank_within(k: &[u32], d: usize) -> usize {
    if k.len() <= 1 {
        return 0;
    }
    let first = k[0] as usize;
    let rest = k.len() - 1;
    let skipped: usize = ((first + 1)..=d).map(|j| count_exact(rest, d - j)).sum();
    skipped + rank_within(&k[1..], d - first)
}

/// All indices of dimension `n` and order exactly `d`, first component descending.
pub fn indices_of_order(n: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fill(&mut cur, 0, d, &mut out);
    out
}

fn fill(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if pos + 1 == n {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v;
        fill(cur, pos + 1, remaining - v, out);
    }
}

/// Graded lexicographic enumeration of all `|k| <= cap`.
pub fn graded_indices(n: usize, cap: u32) -> Vec<MultiIndex> {
    (0..=cap).flat_map(|d| indices_of_order(n, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_agrees_with_enumeration() {
        for n in 1..=3 {
            let all = graded_indices(n, 7);
            assert_eq!(all.len(), count_up_to(n, 7));
            for (i, k) in all.iter().enumerate() {
                assert_eq!(k.rank(), i, "{k}");
            }
        }
    }

    #[test]
    fn order_two_in_two_dims() {
        let v = indices_of_order(2, 2);
        let c: Vec<Vec<u32>> = v.iter().map(|k| k.components().to_vec()).collect();
        assert_eq!(c, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn dominance_and_subtraction() {
        let k = MultiIndex::new(vec![3, 1]);
        let a = MultiIndex::new(vec![1, 1]);
        assert!(k.dominates(&a));
        assert_eq!(k.checked_sub(&a), Some(MultiIndex::new(vec![2, 0])));
        assert_eq!(a.checked_sub(&k), None);
        assert_eq!(k.order(), 4);
    }
}
