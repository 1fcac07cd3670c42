//! Covers of a mixed-radix discrete box by axis-aligned sub-boxes, and the
//! density test for covers whose sub-boxes are pairwise non-parallel.
//!
//! Coordinates are 0-based: coordinate `i` ranges over `[0, radix_i)`. Points
//! are indexed in mixed radix with coordinate 0 least significant, which for
//! an all-2 box is exactly the vertex numbering used by [`crate::boolean`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::boolean::{serialize_ratio, ComparisonMode, Term};
use crate::{Error, Limits, Result};

/// The box `[0, a_1) x ... x [0, a_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteBox {
    radices: Vec<u64>,
}

impl DiscreteBox {
    pub fn new(radices: Vec<u64>) -> Result<Self> {
        if let Some(r) = radices.iter().find(|&&r| r < 2) {
            return Err(Error::Domain(format!("every radix must be at least 2, got {r}")));
        }
        let mut count: u64 = 1;
        for &r in &radices {
            count = count
                .checked_mul(r)
                .ok_or_else(|| Error::Capacity("box point count overflows u64".into()))?;
        }
        Ok(DiscreteBox { radices })
    }

    /// The Boolean cube `{0,1}^n` as a box.
    pub fn cube(n: usize) -> Self {
        DiscreteBox { radices: vec![2; n] }
    }

    pub fn radices(&self) -> &[u64] {
        &self.radices
    }

    pub fn dim(&self) -> usize {
        self.radices.len()
    }

    pub fn point_count(&self) -> u64 {
        self.radices.iter().product()
    }

    fn check_cap(&self, limits: &Limits) -> Result<()> {
        let count = self.point_count();
        if count > limits.point_cap {
            return Err(Error::Capacity(format!(
                "box has {count} points, above the point cap of {}",
                limits.point_cap
            )));
        }
        Ok(())
    }

    /// Mixed-radix index of a point, coordinate 0 least significant.
    pub fn index_of(&self, coords: &[u64]) -> u64 {
        coords
            .iter()
            .zip(&self.radices)
            .rev()
            .fold(0, |acc, (&c, &r)| acc * r + c)
    }

    pub fn point_at(&self, mut index: u64) -> Vec<u64> {
        self.radices
            .iter()
            .map(|&r| {
                let c = index % r;
                index /= r;
                c
            })
            .collect()
    }
}

/// The points of a box whose coordinates in `fixed` take the given values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubBox {
    radices: Vec<u64>,
    fixed: BTreeMap<usize, u64>,
}

impl SubBox {
    pub fn new(container: &DiscreteBox, fixed: BTreeMap<usize, u64>) -> Result<Self> {
        for (&i, &v) in &fixed {
            let Some(&r) = container.radices.get(i) else {
                return Err(Error::Domain(format!(
                    "coordinate {i} outside a {}-dimensional box",
                    container.dim()
                )));
            };
            if v >= r {
                return Err(Error::Domain(format!("value {v} outside [0, {r}) at coordinate {i}")));
            }
        }
        Ok(SubBox {
            radices: container.radices.clone(),
            fixed,
        })
    }

    /// The whole box.
    pub fn full(container: &DiscreteBox) -> Self {
        SubBox {
            radices: container.radices.clone(),
            fixed: BTreeMap::new(),
        }
    }

    /// Translates a term over `{0,1}^n` into a sub-box of the cube.
    pub fn from_term(term: &Term) -> Self {
        let fixed = (0..term.n())
            .filter(|i| term.support() >> i & 1 == 1)
            .map(|i| (i, (term.signs() >> i & 1) as u64))
            .collect();
        SubBox {
            radices: vec![2; term.n()],
            fixed,
        }
    }

    /// Inverse of [`SubBox::from_term`]; fails unless the box is a cube.
    pub fn to_term(&self) -> Result<Term> {
        if self.radices.iter().any(|&r| r != 2) {
            return Err(Error::Domain("only sub-boxes of a radix-2 box are terms".into()));
        }
        let literals: Vec<(usize, bool)> = self.fixed.iter().map(|(&i, &v)| (i + 1, v == 1)).collect();
        Term::from_literals(self.radices.len(), &literals)
    }

    pub fn radices(&self) -> &[u64] {
        &self.radices
    }

    pub fn fixed(&self) -> &BTreeMap<usize, u64> {
        &self.fixed
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed.len()
    }

    pub fn dimension(&self) -> usize {
        self.radices.len() - self.fixed.len()
    }

    pub fn point_count(&self) -> u64 {
        self.radices
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.fixed.contains_key(i))
            .map(|(_, &r)| r)
            .product()
    }

    pub fn contains(&self, coords: &[u64]) -> bool {
        self.fixed.iter().all(|(&i, &v)| coords.get(i) == Some(&v))
    }

    /// Fixed coordinate indices, ascending.
    fn support_key(&self) -> Vec<usize> {
        self.fixed.keys().copied().collect()
    }

    /// Mixed-radix indices of the sub-box's points.
    fn for_each_index(&self, mut f: impl FnMut(u64)) {
        let mut strides = Vec::with_capacity(self.radices.len());
        let mut s = 1u64;
        for &r in &self.radices {
            strides.push(s);
            s *= r;
        }
        let base: u64 = self.fixed.iter().map(|(&i, &v)| v * strides[i]).sum();
        let free: Vec<usize> = (0..self.radices.len()).filter(|i| !self.fixed.contains_key(i)).collect();
        let mut counter = vec![0u64; free.len()];
        let mut offset = 0u64;
        loop {
            f(base + offset);
            let mut k = 0;
            loop {
                if k == free.len() {
                    return;
                }
                let c = free[k];
                counter[k] += 1;
                offset += strides[c];
                if counter[k] < self.radices[c] {
                    break;
                }
                offset -= counter[k] * strides[c];
                counter[k] = 0;
                k += 1;
            }
        }
    }
}

impl fmt::Display for SubBox {
    /// `fix i=v ...` with 1-based coordinates, the box-file line format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fix")?;
        for (i, v) in &self.fixed {
            write!(f, " {}={v}", i + 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxCoverReport {
    pub is_cover: bool,
    pub uncovered_count: u64,
    /// Index pairs of sub-boxes fixing the same coordinate set.
    pub parallel_violations: Vec<(usize, usize)>,
    /// Smallest number of fixed coordinates over the sub-boxes.
    pub min_fixed: Option<usize>,
}

impl BoxCoverReport {
    pub fn is_non_parallel(&self) -> bool {
        self.parallel_violations.is_empty()
    }
}

pub fn box_cover_check(container: &DiscreteBox, subboxes: &[SubBox]) -> Result<BoxCoverReport> {
    box_cover_check_with(container, subboxes, &Limits::default())
}

pub fn box_cover_check_with(container: &DiscreteBox, subboxes: &[SubBox], limits: &Limits) -> Result<BoxCoverReport> {
    container.check_cap(limits)?;
    if let Some(i) = subboxes.iter().position(|s| s.radices != container.radices) {
        return Err(Error::Domain(format!("sub-box {i} belongs to a different box")));
    }
    let total = container.point_count();
    let mut covered = Bits::zeros(total as usize);
    for s in subboxes {
        s.for_each_index(|i| covered.set(i as usize));
    }
    let uncovered_count = total - covered.count_ones() as u64;

    let mut parallel_violations = Vec::new();
    let keys: Vec<Vec<usize>> = subboxes.iter().map(SubBox::support_key).collect();
    for i in 0..keys.len() {
        for j in i + 1..keys.len() {
            if keys[i] == keys[j] {
                parallel_violations.push((i, j));
            }
        }
    }
    Ok(BoxCoverReport {
        is_cover: uncovered_count == 0,
        uncovered_count,
        parallel_violations,
        min_fixed: subboxes.iter().map(SubBox::fixed_count).min(),
    })
}

/// `e_0 .. e_n` of the given values, by the usual one-variable-at-a-time recurrence.
pub fn elementary_symmetric(values: &[BigRational]) -> Vec<BigRational> {
    let mut e = vec![BigRational::zero(); values.len() + 1];
    e[0] = BigRational::one();
    for (count, x) in values.iter().enumerate() {
        for j in (1..=count + 1).rev() {
            let add = &e[j - 1] * x;
            e[j] += add;
        }
    }
    e
}

fn reciprocals(radices: &[u64]) -> Vec<BigRational> {
    radices
        .iter()
        .map(|&r| BigRational::new(BigInt::one(), BigInt::from(r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailCheck {
    #[serde(serialize_with = "serialize_ratio")]
    pub value: BigRational,
    pub feasible: bool,
}

/// `Σ_{j=m}^{n} e_j(1/a_1, ..., 1/a_n)`: the largest fraction of the box that
/// non-parallel sub-boxes each fixing at least `m` coordinates can cover.
pub fn symmetric_tail(container: &DiscreteBox, m: usize, mode: ComparisonMode) -> Result<TailCheck> {
    if m > container.dim() {
        return Err(Error::Domain(format!(
            "codimension {m} exceeds box dimension {}",
            container.dim()
        )));
    }
    let e = elementary_symmetric(&reciprocals(&container.radices));
    let value = e[m..].iter().fold(BigRational::zero(), |acc, x| acc + x);
    let feasible = mode.accepts(&value);
    Ok(TailCheck { value, feasible })
}

/// Largest `m` for which [`symmetric_tail`] is feasible.
pub fn max_feasible_codimension(container: &DiscreteBox, mode: ComparisonMode) -> usize {
    let e = elementary_symmetric(&reciprocals(&container.radices));
    let mut tail = BigRational::zero();
    for m in (0..e.len()).rev() {
        tail += &e[m];
        if mode.accepts(&tail) {
            return m;
        }
    }
    0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReciprocalDiagnostics {
    /// `Σ 1/a_i`
    #[serde(serialize_with = "serialize_ratio")]
    pub sum: BigRational,
    /// `Π (1 + 1/a_i)`
    #[serde(serialize_with = "serialize_ratio")]
    pub product: BigRational,
}

pub fn reciprocal_diagnostics(radices: &[u64]) -> Result<ReciprocalDiagnostics> {
    if radices.contains(&0) {
        return Err(Error::Domain("radix 0 has no reciprocal".into()));
    }
    let recips = reciprocals(radices);
    let sum = recips.iter().fold(BigRational::zero(), |acc, x| acc + x);
    let product = recips
        .iter()
        .fold(BigRational::one(), |acc, x| acc * (BigRational::one() + x));
    Ok(ReciprocalDiagnostics { sum, product })
}

/// Parses a box file: `box: a1 a2 ...`, then `fix i=v ...` lines with 1-based coordinates.
pub fn parse_box_file(text: &str) -> Result<(DiscreteBox, Vec<SubBox>)> {
    let mut container: Option<DiscreteBox> = None;
    let mut subboxes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(b) = &container else {
            let rest = line
                .strip_prefix("box:")
                .ok_or_else(|| Error::parse(line_no, "expected header `box: a1 a2 ...`"))?;
            let radices = rest
                .split_whitespace()
                .map(|t| t.parse::<u64>().map_err(|_| Error::parse(line_no, format!("bad radix `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            container = Some(DiscreteBox::new(radices).map_err(|e| Error::parse(line_no, e.to_string()))?);
            continue;
        };
        let rest = line
            .strip_prefix("fix")
            .ok_or_else(|| Error::parse(line_no, format!("expected `fix i=v ...`, got `{line}`")))?;
        let mut fixed = BTreeMap::new();
        for tok in rest.split_whitespace() {
            let (i, v) = tok
                .split_once('=')
                .and_then(|(i, v)| Some((i.parse::<usize>().ok()?, v.parse::<u64>().ok()?)))
                .ok_or_else(|| Error::parse(line_no, format!("bad assignment `{tok}`")))?;
            if i == 0 {
                return Err(Error::parse(line_no, "coordinates are 1-based"));
            }
            if fixed.insert(i - 1, v).is_some() {
                return Err(Error::parse(line_no, format!("coordinate {i} fixed twice")));
            }
        }
        subboxes.push(SubBox::new(b, fixed).map_err(|e| Error::parse(line_no, e.to_string()))?);
    }
    let container = container.ok_or_else(|| Error::parse(0, "missing header `box: ...`"))?;
    Ok((container, subboxes))
}

pub fn format_box_file(container: &DiscreteBox, subboxes: &[SubBox]) -> String {
    let mut s = String::from("box:");
    for r in &container.radices {
        s.push_str(&format!(" {r}"));
    }
    s.push('\n');
    for b in subboxes {
        s.push_str(&b.to_string());
        s.push('\n');
    }
    s
}
