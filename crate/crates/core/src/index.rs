//! Multi-indices and the graded basis ordering.
//!
//! A `MultiIndex` α = (α₁, α₂, α₃) labels the tensor Hermite mode
//! Ψ_α(v) = ψ_{α₁}(v₁)ψ_{α₂}(v₂)ψ_{α₃}(v₃).  All matrices and coefficient
//! vectors in the crate use one canonical enumeration of {|α| ≤ D}:
//! degree-major, then lexicographic in (α₁, α₂, α₃).  The ordering is part of
//! every serialized artifact's provenance (`ORDERING_VERSION`).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Bumped only if the canonical enumeration ever changes.
pub const ORDERING_VERSION: u32 = 1;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, serde::Serialize, serde::Deserialize)]
pub struct MultiIndex(pub [usize; 3]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0, 0, 0]);

    pub fn new(a1: usize, a2: usize, a3: usize) -> Self {
        MultiIndex([a1, a2, a3])
    }

    /// |α| = α₁ + α₂ + α₃.
    pub fn degree(&self) -> usize {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// α! = α₁!·α₂!·α₃! as f64 (components stay small in practice).
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }

    /// α + e_j.
    pub fn raised(&self, j: usize) -> MultiIndex {
        let mut a = self.0;
        a[j] += 1;
        MultiIndex(a)
    }

    /// α − e_j, or None if α_j = 0.
    pub fn lowered(&self, j: usize) -> Option<MultiIndex> {
        if self.0[j] == 0 {
            return None;
        }
        let mut a = self.0;
        a[j] -= 1;
        Some(MultiIndex(a))
    }

    /// Componentwise β ≤ α.
    pub fn dominates(&self, beta: &MultiIndex) -> bool {
        (0..3).all(|j| beta.0[j] <= self.0[j])
    }

    /// α − β (caller guarantees β ≤ α).
    pub fn minus(&self, beta: &MultiIndex) -> MultiIndex {
        MultiIndex([
            self.0[0] - beta.0[0],
            self.0[1] - beta.0[1],
            self.0[2] - beta.0[2],
        ])
    }

    /// Binomial product C(α, β) = ∏ C(α_j, β_j).
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        (0..3).map(|j| binomial(self.0[j], beta.0[j])).product()
    }

    /// All β with β ≤ α componentwise, in deterministic order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for b1 in 0..=self.0[0] {
            for b2 in 0..=self.0[1] {
                for b3 in 0..=self.0[2] {
                    out.push(MultiIndex([b1, b2, b3]));
                }
            }
        }
        out
    }
}

pub fn factorial(n: usize) -> f64 {
    assert!(n <= 170, "factorial overflow in f64");
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    // numerically exact for the small n used here
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Enumerate {|α| ≤ d} in the canonical order: degree-major, then
/// lexicographic in (α₁, α₂, α₃).
pub fn enumerate_basis(d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(dimension(d));
    for deg in 0..=d {
        for a1 in 0..=deg {
            for a2 in 0..=(deg - a1) {
                out.push(MultiIndex([a1, a2, deg - a1 - a2]));
            }
        }
    }
    out
}

/// dim{|α| ≤ d} = C(d+3, 3).
pub fn dimension(d: usize) -> usize {
    (d + 1) * (d + 2) * (d + 3) / 6
}

/// Shared enumeration of {|α| ≤ cap} with O(1) index lookup.
///
/// The enumeration at a smaller cap is a strict prefix of the enumeration at a
/// larger cap, so coefficient vectors embed by zero-padding.
#[derive(Debug)]
pub struct BasisOrder {
    cap: usize,
    list: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl BasisOrder {
    fn new(cap: usize) -> Self {
        let list = enumerate_basis(cap);
        let lookup = list.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        BasisOrder { cap, list, lookup }
    }

    /// Cached shared instance for a given cap.
    pub fn shared(cap: usize) -> Arc<BasisOrder> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<BasisOrder>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard
            .entry(cap)
            .or_insert_with(|| Arc::new(BasisOrder::new(cap)))
            .clone()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.list
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_formula_matches_enumeration() {
        for d in 0..12 {
            assert_eq!(enumerate_basis(d).len(), dimension(d));
        }
        assert_eq!(dimension(10), 286);
        assert_eq!(dimension(20), 1771);
    }

    #[test]
    fn enumeration_is_prefix_stable() {
        let small = enumerate_basis(6);
        let large = enumerate_basis(13);
        assert_eq!(&large[..small.len()], &small[..]);
    }

    #[test]
    fn lookup_roundtrip() {
        let order = BasisOrder::shared(8);
        for (i, a) in order.indices().iter().enumerate() {
            assert_eq!(order.index_of(a), Some(i));
        }
        assert_eq!(order.index_of(&MultiIndex::new(9, 0, 0)), None);
    }

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(6), 720.0);
        assert_eq!(binomial(6, 2), 15.0);
        assert_eq!(MultiIndex::new(2, 1, 0).factorial(), 2.0);
        assert_eq!(
            MultiIndex::new(4, 2, 1).binomial(&MultiIndex::new(2, 1, 0)),
            12.0
        );
    }

    #[test]
    fn sub_indices_count() {
        let a = MultiIndex::new(2, 1, 3);
        assert_eq!(a.sub_indices().len(), 3 * 2 * 4);
        assert!(a.sub_indices().iter().all(|b| a.dominates(b)));
    }
}
