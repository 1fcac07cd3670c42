//! Density bounds for distinct tautologies, in exact rational arithmetic.
//!
//! Each support of size `i` may appear once and its subcube holds `2^(n-i)`
//! vertices, so a distinct tautology whose terms all have size at least `k`
//! needs `Σ_{i>=k} C(n,i) 2^(n-i) >= 2^n`. Dividing by `2^n` gives the tail
//! sums below. Restricting to a single size `m` gives `C(n,m) / 2^m >= 1`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// How a density value is compared against 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonMode {
    /// value >= 1
    #[default]
    Weak,
    /// value > 1
    Strict,
}

impl ComparisonMode {
    pub fn accepts(self, value: &BigRational) -> bool {
        let one = BigRational::one();
        match self {
            ComparisonMode::Weak => *value >= one,
            ComparisonMode::Strict => *value > one,
        }
    }
}

impl fmt::Display for ComparisonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComparisonMode::Weak => "weak",
            ComparisonMode::Strict => "strict",
        })
    }
}

/// Which bound a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    /// minimum term size of a distinct tautology
    A,
    /// common term size of a uniform distinct tautology
    B,
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn over_pow2(num: BigUint, exp: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(BigUint::one() << exp))
}

/// `Σ_{i=k}^{n} C(n,i) / 2^i`.
pub fn distinct_tail(n: usize, k: usize) -> BigRational {
    (k..=n).fold(BigRational::zero(), |acc, i| acc + over_pow2(binomial(n, i), i))
}

/// `C(n,m) / 2^m`.
pub fn uniform_density(n: usize, m: usize) -> BigRational {
    over_pow2(binomial(n, m), m)
}

/// Largest `k` in `[0, n]` whose tail clears 1 under `mode`; 0 if none does.
pub fn density_bound_a(n: usize, mode: ComparisonMode) -> usize {
    let mut tail = BigRational::zero();
    for k in (0..=n).rev() {
        tail += over_pow2(binomial(n, k), k);
        if mode.accepts(&tail) {
            return k;
        }
    }
    0
}

/// Largest `m` in `[0, n]` with `C(n,m)/2^m` clearing 1 under `mode`; 0 if none does.
pub fn density_bound_b(n: usize, mode: ComparisonMode) -> usize {
    (0..=n)
        .rev()
        .find(|&m| mode.accepts(&uniform_density(n, m)))
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub bound: usize,
    /// The density value at `bound` (the tail sum for A, the single ratio for B).
    #[serde(serialize_with = "serialize_ratio")]
    pub value: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundTable {
    pub kind: BoundKind,
    pub comparison_mode: ComparisonMode,
    pub rows: Vec<BoundRow>,
}

impl BoundTable {
    pub fn values(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.bound).collect()
    }
}

/// Bounds for `n = 1..=max_n`.
pub fn bound_table(kind: BoundKind, max_n: usize, mode: ComparisonMode) -> BoundTable {
    let rows = (1..=max_n)
        .map(|n| {
            let (bound, value) = match kind {
                BoundKind::A => {
                    let k = density_bound_a(n, mode);
                    (k, distinct_tail(n, k))
                }
                BoundKind::B => {
                    let m = density_bound_b(n, mode);
                    (m, uniform_density(n, m))
                }
            };
            BoundRow { n, bound, value }
        })
        .collect();
    BoundTable {
        kind,
        comparison_mode: mode,
        rows,
    }
}

pub(crate) fn serialize_ratio<S: serde::Serializer>(
    r: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(14, 7), BigUint::from(3432u32));
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }

    #[test]
    fn tails_at_small_n() {
        assert_eq!(distinct_tail(1, 1), ratio(1, 2));
        assert_eq!(distinct_tail(4, 2), ratio(33, 16));
        assert_eq!(uniform_density(2, 1), ratio(1, 1));
    }

    #[test]
    fn a_values() {
        assert_eq!(density_bound_a(4, ComparisonMode::Weak), 2);
        assert_eq!(density_bound_a(5, ComparisonMode::Weak), 3);
        assert_eq!(density_bound_a(14, ComparisonMode::Weak), 10);
        assert_eq!(density_bound_a(1, ComparisonMode::Weak), 0);
        assert_eq!(density_bound_a(1, ComparisonMode::Strict), 0);
    }

    #[test]
    fn b_values() {
        for mode in [ComparisonMode::Weak, ComparisonMode::Strict] {
            assert_eq!(density_bound_b(7, mode), 4);
            assert_eq!(density_bound_b(14, mode), 9);
            assert_eq!(density_bound_b(1, mode), 0);
        }
        assert_eq!(density_bound_b(2, ComparisonMode::Weak), 1);
        assert_eq!(density_bound_b(2, ComparisonMode::Strict), 0);
    }
}
