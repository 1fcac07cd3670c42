use std::fmt;

use serde::Serialize;

use crate::{Error, Limits, Result};

use super::points::PointSet;
use super::term::{Term, MAX_VARS};

/// A disjunction of terms over a common dimension `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DnfExpression {
    n: usize,
    terms: Vec<Term>,
}

impl DnfExpression {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::Capacity(format!("{n} variables exceeds the limit of {MAX_VARS}")));
        }
        if let Some(t) = terms.iter().find(|t| t.n() != n) {
            return Err(Error::Domain(format!(
                "term `{t}` has dimension {}, expected {n}",
                t.n()
            )));
        }
        Ok(DnfExpression { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_term_size(&self) -> Option<usize> {
        self.terms.iter().map(Term::size).min()
    }

    /// Same expression with terms in canonical order.
    pub fn sorted(&self) -> DnfExpression {
        let mut terms = self.terms.clone();
        terms.sort();
        DnfExpression { n: self.n, terms }
    }

    /// Evaluates the expression at one vertex.
    pub fn evaluate(&self, vertex: u32) -> bool {
        self.terms.iter().any(|t| t.contains(vertex))
    }

    /// Parses the line format: a `n = <dim>` header, then one term per line
    /// with literals `x<k>` / `!x<k>` joined by `&`. A line `1` is the empty term.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(dim) = n else {
                let rest = line
                    .strip_prefix('n')
                    .map(str::trim_start)
                    .and_then(|r| r.strip_prefix('='))
                    .ok_or_else(|| Error::parse(line_no, "expected header `n = <dim>`"))?;
                let dim: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad dimension `{}`", rest.trim())))?;
                if dim > MAX_VARS {
                    return Err(Error::parse(line_no, format!("dimension {dim} exceeds {MAX_VARS}")));
                }
                n = Some(dim);
                continue;
            };
            terms.push(parse_term(dim, line, line_no)?);
        }
        let n = n.ok_or_else(|| Error::parse(0, "missing header `n = <dim>`"))?;
        DnfExpression::new(n, terms)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("n = {}\n", self.n);
        for t in &self.terms {
            s.push_str(&t.to_string());
            s.push('\n');
        }
        s
    }
}

fn parse_term(n: usize, line: &str, line_no: usize) -> Result<Term> {
    if line == "1" {
        return Term::top(n).map_err(|e| Error::parse(line_no, e.to_string()));
    }
    let mut literals = Vec::new();
    for lit in line.split('&') {
        let lit = lit.trim();
        let (positive, body) = match lit.strip_prefix('!') {
            Some(rest) => (false, rest),
            None => (true, lit),
        };
        let var: usize = body
            .strip_prefix('x')
            .and_then(|k| k.parse().ok())
            .ok_or_else(|| Error::parse(line_no, format!("bad literal `{lit}`")))?;
        literals.push((var, positive));
    }
    Term::from_literals(n, &literals).map_err(|e| Error::parse(line_no, e.to_string()))
}

impl fmt::Display for DnfExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            if t.size() > 1 {
                write!(f, "({t})")?;
            } else {
                write!(f, "{t}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage {
    pub cover: PointSet,
    pub uncovered_count: u64,
}

pub fn dnf_coverage(dnf: &DnfExpression) -> Result<Coverage> {
    dnf_coverage_with(dnf, &Limits::default())
}

pub fn dnf_coverage_with(dnf: &DnfExpression, limits: &Limits) -> Result<Coverage> {
    let mut cover = PointSet::empty_with(dnf.n, limits)?;
    for t in &dnf.terms {
        cover.add_term(t);
    }
    let uncovered_count = cover.vertex_count() - cover.len();
    Ok(Coverage {
        cover,
        uncovered_count,
    })
}

pub fn is_tautology(dnf: &DnfExpression) -> Result<bool> {
    // a term of size 0 covers everything
    if dnf.terms.iter().any(|t| t.size() == 0) {
        return Ok(true);
    }
    Ok(dnf_coverage(dnf)?.uncovered_count == 0)
}

/// Pairwise-disjoint subcubes.
pub fn is_exact_dnf(dnf: &DnfExpression) -> bool {
    let ts = &dnf.terms;
    (0..ts.len()).all(|i| (i + 1..ts.len()).all(|j| ts[i].is_disjoint_from(&ts[j])))
}

/// Pairwise-different supports.
pub fn is_distinct_dnf(dnf: &DnfExpression) -> bool {
    let mut supports: Vec<u32> = dnf.terms.iter().map(Term::support).collect();
    supports.sort_unstable();
    supports.windows(2).all(|w| w[0] != w[1])
}

/// One full-support term per member vertex.
pub fn canonical_dnf(truth_set: &PointSet) -> DnfExpression {
    let n = truth_set.n();
    let full = ((1u64 << n) - 1) as u32;
    let mut terms: Vec<Term> = truth_set
        .iter()
        .map(|v| Term::new(n, full, v).expect("vertex inside the cube"))
        .collect();
    terms.sort();
    DnfExpression { n, terms }
}

/// All `k`-subsets of `{0..n}` as masks, in lexicographic order of their element lists.
pub(crate) fn subsets_lex(n: usize, k: usize) -> Vec<u32> {
    fn rec(start: usize, n: usize, k: usize, mask: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(mask);
            return;
        }
        for i in start..=n - k {
            rec(i + 1, n, k - 1, mask | 1 << i, out);
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, 0, &mut out);
    }
    out
}

/// Every vertex has at least `t` ones or at least `n - t` zeros, so the positive
/// `t`-conjunctions together with the negative `(n-t)`-conjunctions cover the cube.
pub fn pigeonhole_tautology(n: usize, t: usize) -> Result<DnfExpression> {
    if t == 0 || t > n {
        return Err(Error::Domain(format!("need 1 <= t <= n, got t = {t}, n = {n}")));
    }
    if 2 * t == n {
        return Err(Error::Domain(format!(
            "t = n/2 = {t} makes the positive and negative supports collide"
        )));
    }
    if n > MAX_VARS {
        return Err(Error::Capacity(format!("{n} variables exceeds the limit of {MAX_VARS}")));
    }
    let mut terms = Vec::new();
    for s in subsets_lex(n, t) {
        terms.push(Term::new(n, s, s)?);
    }
    for s in subsets_lex(n, n - t) {
        terms.push(Term::new(n, s, 0)?);
    }
    Ok(DnfExpression { n, terms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MndrCheck {
    pub max_size: usize,
    pub multiplicity: usize,
    pub holds: bool,
    /// Set for the one-term cover by the empty conjunction, where no pair exists.
    pub degenerate: bool,
}

/// In an exact tautology the largest term size must occur at least twice.
pub fn boolean_mndr_check(dnf: &DnfExpression) -> Result<MndrCheck> {
    if !is_exact_dnf(dnf) {
        return Err(Error::Contract("DNF terms are not pairwise disjoint".into()));
    }
    if !is_tautology(dnf)? {
        return Err(Error::Contract("DNF is not a tautology".into()));
    }
    let max_size = dnf.terms.iter().map(Term::size).max().unwrap_or(0);
    let multiplicity = dnf.terms.iter().filter(|t| t.size() == max_size).count();
    let degenerate = dnf.len() == 1;
    Ok(MndrCheck {
        max_size,
        multiplicity,
        holds: degenerate || multiplicity >= 2,
        degenerate,
    })
}

/// Largest dimension for which [`enumerate_exact_tautologies`] runs.
pub const ENUMERATION_MAX_N: usize = 3;

/// Every partition of `{0,1}^n` into subcubes, each as a canonically sorted DNF,
/// the list itself sorted.
pub fn enumerate_exact_tautologies(n: usize) -> Result<Vec<DnfExpression>> {
    if n > ENUMERATION_MAX_N {
        return Err(Error::Capacity(format!(
            "exact-tautology enumeration is limited to n <= {ENUMERATION_MAX_N}, got {n}"
        )));
    }
    let full = (1u32 << n) - 1;
    let mut universe = Vec::new();
    for support in 0..=full {
        let mut signs = support;
        loop {
            universe.push(Term::new(n, support, signs)?);
            if signs == 0 {
                break;
            }
            signs = (signs - 1) & support;
        }
    }

    fn rec(
        universe: &[Term],
        covered: u64,
        all: u64,
        chosen: &mut Vec<Term>,
        out: &mut Vec<DnfExpression>,
        n: usize,
    ) {
        if covered == all {
            let mut terms = chosen.clone();
            terms.sort();
            out.push(DnfExpression { n, terms });
            return;
        }
        let p = (!covered & all).trailing_zeros();
        for t in universe {
            if !t.contains(p) {
                continue;
            }
            let mask: u64 = t.points().fold(0, |m, v| m | 1 << v);
            if mask & covered != 0 {
                continue;
            }
            chosen.push(*t);
            rec(universe, covered | mask, all, chosen, out, n);
            chosen.pop();
        }
    }

    let all = (1u64 << (1u32 << n)) - 1;
    let mut out = Vec::new();
    rec(&universe, 0, all, &mut Vec::new(), &mut out, n);
    out.sort();
    Ok(out)
}
