use crate::bits::Bits;
use crate::{Error, Limits, Result};

use super::term::{Term, MAX_VARS};

/// A subset of the vertices of `{0,1}^n`.
///
/// Vertex `v` is the integer whose bit `i` is the value of variable `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    n: usize,
    bits: Bits,
}

fn check_dim(n: usize, limits: &Limits) -> Result<()> {
    if n > MAX_VARS || n > limits.max_dim() {
        return Err(Error::Capacity(format!(
            "dimension {n} needs 2^{n} points, above the point cap of {}",
            limits.point_cap
        )));
    }
    Ok(())
}

impl PointSet {
    pub fn empty(n: usize) -> Result<Self> {
        Self::empty_with(n, &Limits::default())
    }

    pub fn empty_with(n: usize, limits: &Limits) -> Result<Self> {
        check_dim(n, limits)?;
        Ok(PointSet {
            n,
            bits: Bits::zeros(1 << n),
        })
    }

    pub fn full(n: usize) -> Result<Self> {
        check_dim(n, &Limits::default())?;
        Ok(PointSet {
            n,
            bits: Bits::ones(1 << n),
        })
    }

    pub fn from_vertices(n: usize, vertices: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for v in vertices {
            if (v as u64) >> n != 0 {
                return Err(Error::Domain(format!("vertex {v} outside the {n}-cube")));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> u64 {
        1u64 << self.n
    }

    pub fn insert(&mut self, v: u32) {
        self.bits.set(v as usize);
    }

    pub fn contains(&self, v: u32) -> bool {
        self.bits.get(v as usize)
    }

    pub fn len(&self) -> u64 {
        self.bits.count_ones() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn add_term(&mut self, term: &Term) {
        debug_assert_eq!(term.n(), self.n);
        for v in term.points() {
            self.bits.set(v as usize);
        }
    }

    pub fn union_with(&mut self, other: &PointSet) {
        self.bits.union_with(&other.bits);
    }

    /// Members, ascending.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.iter_ones().map(|i| i as u32)
    }

    /// Non-members, ascending.
    pub fn iter_missing(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.iter_zeros().map(|i| i as u32)
    }
}

/// The subcube of a term as a point set.
pub fn term_points(term: &Term) -> Result<PointSet> {
    let mut s = PointSet::empty(term.n())?;
    s.add_term(term);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_point_counts() {
        for n in 0..=6 {
            for support in 0u32..(1 << n) {
                let t = Term::new(n, support, support & 0b1010_1010).unwrap();
                let s = term_points(&t).unwrap();
                assert_eq!(s.len(), 1 << (n - t.size()));
                assert!(s.iter().all(|v| t.contains(v)));
            }
        }
    }

    #[test]
    fn dimension_cap() {
        let limits = Limits {
            point_cap: 1 << 10,
            ..Limits::default()
        };
        assert!(PointSet::empty_with(10, &limits).is_ok());
        assert!(matches!(PointSet::empty_with(11, &limits), Err(Error::Capacity(_))));
        assert!(matches!(PointSet::empty(29), Err(Error::Capacity(_))));
    }

    #[test]
    fn missing_vertices() {
        let s = PointSet::from_vertices(3, [0, 5, 7]).unwrap();
        assert_eq!(s.iter_missing().collect::<Vec<_>>(), vec![1, 2, 3, 4, 6]);
        assert!(PointSet::from_vertices(2, [4]).is_err());
    }
}
