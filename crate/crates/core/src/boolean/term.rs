use std::cmp::Ordering;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Hard ceiling on the number of variables; supports and signs are `u32` masks.
pub const MAX_VARS: usize = 31;

/// A conjunction of literals over `n` variables, stored as a support mask and
/// a sign mask (bit `i` is variable `i + 1`; a set sign bit is a positive literal).
///
/// As a point set it is the subcube `{v : v & support == signs}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    n: u8,
    support: u32,
    signs: u32,
}

impl Term {
    pub fn new(n: usize, support: u32, signs: u32) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::Capacity(format!("{n} variables exceeds the limit of {MAX_VARS}")));
        }
        if (support as u64) >> n != 0 {
            return Err(Error::Domain(format!("support mask {support:#b} uses variables beyond x{n}")));
        }
        if signs & !support != 0 {
            return Err(Error::Domain("sign bits outside the support".into()));
        }
        Ok(Term {
            n: n as u8,
            support,
            signs,
        })
    }

    /// The empty conjunction (constant true).
    pub fn top(n: usize) -> Result<Self> {
        Term::new(n, 0, 0)
    }

    /// Builds a term from `(variable, positive)` literals with 1-based variables.
    pub fn from_literals(n: usize, literals: &[(usize, bool)]) -> Result<Self> {
        let mut support = 0u32;
        let mut signs = 0u32;
        for &(var, positive) in literals {
            if var == 0 || var > n {
                return Err(Error::Domain(format!("variable x{var} outside 1..={n}")));
            }
            let bit = 1u32 << (var - 1);
            if support & bit != 0 {
                return Err(Error::Domain(format!("variable x{var} repeated in one term")));
            }
            support |= bit;
            if positive {
                signs |= bit;
            }
        }
        Term::new(n, support, signs)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn support(&self) -> u32 {
        self.support
    }

    pub fn signs(&self) -> u32 {
        self.signs
    }

    pub fn size(&self) -> usize {
        self.support.count_ones() as usize
    }

    /// Participating variables, 1-based, ascending.
    pub fn variables(&self) -> Vec<usize> {
        (0..self.n as usize)
            .filter(|i| self.support >> i & 1 == 1)
            .map(|i| i + 1)
            .collect()
    }

    #[inline]
    pub fn contains(&self, vertex: u32) -> bool {
        vertex & self.support == self.signs
    }

    pub fn point_count(&self) -> u64 {
        1u64 << (self.n as usize - self.size())
    }

    pub fn is_disjoint_from(&self, other: &Term) -> bool {
        (self.support & other.support) & (self.signs ^ other.signs) != 0
    }

    /// Vertices of the subcube, ascending.
    pub fn points(&self) -> impl Iterator<Item = u32> {
        let full = ((1u64 << self.n) - 1) as u32;
        let free = full & !self.support;
        let signs = self.signs;
        let mut sub = 0u32;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let v = signs | sub;
            sub = sub.wrapping_sub(free) & free;
            if sub == 0 {
                done = true;
            }
            Some(v)
        })
    }
}

/// `true` if the sorted element list of `a` precedes that of `b` (same cardinality).
#[inline]
fn support_lex_less(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    diff != 0 && (diff & diff.wrapping_neg()) & a != 0
}

impl Ord for Term {
    /// Canonical order: size, then support lexicographic, then signs
    /// lexicographic along the support with negative before positive.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.size().cmp(&other.size()))
            .then_with(|| {
                if self.support == other.support {
                    Ordering::Equal
                } else if support_lex_less(self.support, other.support) {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            })
            .then_with(|| {
                let diff = self.signs ^ other.signs;
                if diff == 0 {
                    Ordering::Equal
                } else if (diff & diff.wrapping_neg()) & self.signs == 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    /// `!x1 & x3`; the empty conjunction prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for var in self.variables() {
            if !first {
                write!(f, " & ")?;
            }
            first = false;
            if self.signs >> (var - 1) & 1 == 0 {
                write!(f, "!")?;
            }
            write!(f, "x{var}")?;
        }
        Ok(())
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let vars = self.variables();
        let signs: Vec<u8> = vars.iter().map(|v| (self.signs >> (v - 1) & 1) as u8).collect();
        let mut st = serializer.serialize_struct("Term", 2)?;
        st.serialize_field("support", &vars)?;
        st.serialize_field("signs", &signs)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(n: usize, l: &[(usize, bool)]) -> Term {
        Term::from_literals(n, l).unwrap()
    }

    #[test]
    fn subcube_points() {
        let t = lits(2, &[(1, true)]);
        assert_eq!(t.points().collect::<Vec<_>>(), vec![0b01, 0b11]);
        let t = lits(3, &[(1, false), (2, false), (3, false)]);
        assert_eq!(t.points().collect::<Vec<_>>(), vec![0]);
        assert_eq!(Term::top(3).unwrap().points().count(), 8);
        assert_eq!(Term::top(0).unwrap().points().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(Term::new(2, 0b100, 0).is_err());
        assert!(Term::new(3, 0b001, 0b010).is_err());
        assert!(Term::from_literals(3, &[(1, true), (1, false)]).is_err());
        assert!(Term::from_literals(3, &[(4, true)]).is_err());
        assert!(Term::new(40, 0, 0).is_err());
    }

    #[test]
    fn canonical_order() {
        let a = lits(3, &[(1, true)]);
        let b = lits(3, &[(2, false)]);
        let c = lits(3, &[(1, false), (2, true)]);
        let d = lits(3, &[(1, false), (3, true)]);
        let e = lits(3, &[(1, true), (2, false)]);
        let mut v = vec![d, e, c, b, a, Term::top(3).unwrap()];
        v.sort();
        assert_eq!(v, vec![Term::top(3).unwrap(), a, b, c, e, d]);
    }

    #[test]
    fn display() {
        assert_eq!(lits(6, &[(1, false), (3, false), (4, true), (6, true)]).to_string(), "!x1 & !x3 & x4 & x6");
        assert_eq!(Term::top(2).unwrap().to_string(), "1");
    }
}
