//! Residue classes, covering systems and the classical structure theorems
//! about exact covers (two top moduli agree; the top modulus repeats at least
//! `p` times for `p` the least prime factor of the lcm).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Limits, Result};

/// Number of uncovered residues kept verbatim in a [`CoverReport`].
pub const UNCOVERED_KEEP: usize = 1000;

const SCAN_BLOCK: u64 = 1 << 16;

/// The arithmetic progression `residue (mod modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CongruenceClass {
    residue: u64,
    modulus: u64,
}

impl CongruenceClass {
    /// Builds a class, reducing the residue modulo the modulus.
    pub fn new(residue: u64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Domain("modulus must be at least 1".into()));
        }
        Ok(CongruenceClass {
            residue: residue % modulus,
            modulus,
        })
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, x: u64) -> bool {
        x % self.modulus == self.residue
    }

    /// Two progressions meet iff their residues agree modulo the gcd of the moduli.
    pub fn is_disjoint_from(&self, other: &CongruenceClass) -> bool {
        let g = self.modulus.gcd(&other.modulus);
        self.residue % g != other.residue % g
    }
}

impl fmt::Display for CongruenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus)
    }
}

/// A non-empty, ordered list of residue classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceSystem {
    classes: Vec<CongruenceClass>,
}

impl CongruenceSystem {
    pub fn new(classes: Vec<CongruenceClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Domain("a congruence system needs at least one class".into()));
        }
        Ok(CongruenceSystem { classes })
    }

    /// Convenience constructor from `(residue, modulus)` pairs.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self> {
        let classes = pairs
            .iter()
            .map(|&(a, m)| CongruenceClass::new(a, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(classes)
    }

    pub fn classes(&self) -> &[CongruenceClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// lcm of the moduli, refusing anything above `cap`.
    pub fn lcm_capped(&self, cap: u64) -> Result<u64> {
        let mut acc: u128 = 1;
        for c in &self.classes {
            let m = c.modulus as u128;
            acc = acc / acc.gcd(&m) * m;
            if acc > cap as u128 {
                return Err(lcm_capacity_error(&self.classes, cap));
            }
        }
        Ok(acc as u64)
    }

    pub fn lcm(&self) -> Result<u64> {
        self.lcm_capped(Limits::default().lcm_cap)
    }

    /// Index pairs `(i, j)`, `i < j`, of identical classes.
    pub fn duplicate_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.classes.len() {
            for j in i + 1..self.classes.len() {
                if self.classes[i] == self.classes[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Parses the `a mod m` line format. `#` starts a comment line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut classes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 || parts[1] != "mod" {
                return Err(Error::parse(line_no, format!("expected `a mod m`, got `{line}`")));
            }
            let a: u64 = parts[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad residue `{}`", parts[0])))?;
            let m: u64 = parts[2]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad modulus `{}`", parts[2])))?;
            if m == 0 {
                return Err(Error::parse(line_no, "modulus must be at least 1"));
            }
            classes.push(CongruenceClass::new(a, m)?);
        }
        if classes.is_empty() {
            return Err(Error::parse(0, "no congruence classes found"));
        }
        Self::new(classes)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.classes {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }

    /// `Σ M/m_i`: the number of (class, residue) incidences in one period.
    pub fn density_sum(&self, lcm: u64) -> u128 {
        self.classes.iter().map(|c| (lcm / c.modulus) as u128).sum()
    }
}

impl fmt::Display for CongruenceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.classes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}({})", c.residue, c.modulus)?;
        }
        write!(f, "}}")
    }
}

fn lcm_capacity_error(classes: &[CongruenceClass], cap: u64) -> Error {
    let lcm = classes
        .iter()
        .fold(BigUint::one(), |acc, c| acc.lcm(&BigUint::from(c.modulus)));
    Error::Capacity(format!(
        "lcm {lcm} needs {} bits, above the cap of {cap}",
        lcm.bits()
    ))
}

/// Result of scanning one period `[0, M)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub is_cover: bool,
    pub lcm: u64,
    /// First [`UNCOVERED_KEEP`] uncovered residues, ascending.
    pub uncovered: Vec<u64>,
    pub uncovered_total: u64,
    /// Maps "number of classes containing x" to the number of residues x in `[0, M)` with that count.
    pub multiplicity_histogram: BTreeMap<u64, u64>,
    pub duplicate_classes: Vec<(usize, usize)>,
}

struct BlockScan {
    histogram: BTreeMap<u64, u64>,
    uncovered: Vec<u64>,
    uncovered_total: u64,
}

fn scan_block(classes: &[CongruenceClass], start: u64, end: u64) -> BlockScan {
    let len = (end - start) as usize;
    let mut counts = vec![0u32; len];
    for c in classes {
        let m = c.modulus;
        let first = start + (c.residue + m - start % m) % m;
        let mut x = first;
        while x < end {
            counts[(x - start) as usize] += 1;
            x += m;
        }
    }
    let mut histogram = BTreeMap::new();
    let mut uncovered = Vec::new();
    let mut uncovered_total = 0;
    for (i, &k) in counts.iter().enumerate() {
        *histogram.entry(k as u64).or_insert(0) += 1;
        if k == 0 {
            uncovered_total += 1;
            if uncovered.len() < UNCOVERED_KEEP {
                uncovered.push(start + i as u64);
            }
        }
    }
    BlockScan {
        histogram,
        uncovered,
        uncovered_total,
    }
}

pub fn verify_cover(system: &CongruenceSystem) -> Result<CoverReport> {
    verify_cover_with(system, &Limits::default())
}

/// Scans `[0, M)` block by block; the block partition does not affect the result.
pub fn verify_cover_with(system: &CongruenceSystem, limits: &Limits) -> Result<CoverReport> {
    let lcm = system.lcm_capped(limits.lcm_cap)?;
    let blocks: Vec<u64> = (0..lcm.div_ceil(SCAN_BLOCK)).collect();
    let scans: Vec<BlockScan> = blocks
        .par_iter()
        .map(|&b| {
            let start = b * SCAN_BLOCK;
            let end = (start + SCAN_BLOCK).min(lcm);
            scan_block(&system.classes, start, end)
        })
        .collect();

    let mut histogram = BTreeMap::new();
    let mut uncovered = Vec::new();
    let mut uncovered_total = 0;
    for scan in scans {
        for (k, v) in scan.histogram {
            *histogram.entry(k).or_insert(0) += v;
        }
        uncovered_total += scan.uncovered_total;
        let room = UNCOVERED_KEEP - uncovered.len();
        uncovered.extend(scan.uncovered.into_iter().take(room));
    }
    Ok(CoverReport {
        is_cover: uncovered_total == 0,
        lcm,
        uncovered,
        uncovered_total,
        multiplicity_histogram: histogram,
        duplicate_classes: system.duplicate_pairs(),
    })
}

/// True iff the classes are pairwise disjoint.
pub fn is_exact(system: &CongruenceSystem) -> bool {
    let cs = &system.classes;
    (0..cs.len()).all(|i| (i + 1..cs.len()).all(|j| cs[i].is_disjoint_from(&cs[j])))
}

/// True iff the moduli are pairwise different.
pub fn is_distinct(system: &CongruenceSystem) -> bool {
    let mut moduli: Vec<u64> = system.classes.iter().map(|c| c.modulus).collect();
    moduli.sort_unstable();
    moduli.windows(2).all(|w| w[0] != w[1])
}

/// Replaces class `a (mod m)` at `class_index` by the `p` classes `a + j*m (mod p*m)`.
/// The refined classes are inserted in place, in order of `j`.
pub fn split_refine(system: &CongruenceSystem, class_index: usize, p: u64) -> Result<CongruenceSystem> {
    split_refine_capped(system, class_index, p, Limits::default().lcm_cap)
}

pub fn split_refine_capped(
    system: &CongruenceSystem,
    class_index: usize,
    p: u64,
    lcm_cap: u64,
) -> Result<CongruenceSystem> {
    let target = system.classes.get(class_index).ok_or_else(|| {
        Error::Domain(format!(
            "class index {class_index} out of range for {} classes",
            system.len()
        ))
    })?;
    if p < 2 {
        return Err(Error::Domain(format!("split factor must be at least 2, got {p}")));
    }
    let new_mod = target
        .modulus
        .checked_mul(p)
        .ok_or_else(|| Error::Capacity(format!("modulus {} * {p} overflows u64", target.modulus)))?;
    let mut classes = Vec::with_capacity(system.len() + p as usize - 1);
    classes.extend_from_slice(&system.classes[..class_index]);
    for j in 0..p {
        classes.push(CongruenceClass::new(target.residue + j * target.modulus, new_mod)?);
    }
    classes.extend_from_slice(&system.classes[class_index + 1..]);
    let refined = CongruenceSystem { classes };
    refined.lcm_capped(lcm_cap)?;
    Ok(refined)
}

/// Draws an exact covering system by refining `{0 (mod 1)}` `steps` times,
/// each time splitting a random class by a random prime from `primes`.
/// Splits that would push the lcm past `lcm_cap` are skipped.
pub fn random_split_chain<R: Rng>(rng: &mut R, steps: usize, primes: &[u64], lcm_cap: u64) -> CongruenceSystem {
    let mut system = CongruenceSystem {
        classes: vec![CongruenceClass { residue: 0, modulus: 1 }],
    };
    for _ in 0..steps {
        let idx = rng.gen_range(0..system.len());
        let p = primes[rng.gen_range(0..primes.len())];
        if let Ok(next) = split_refine_capped(&system, idx, p, lcm_cap) {
            system = next;
        }
    }
    system
}

fn require_exact_cover(system: &CongruenceSystem) -> Result<u64> {
    if !is_exact(system) {
        return Err(Error::Contract("system is not exact".into()));
    }
    let report = verify_cover(system)?;
    if !report.is_cover {
        return Err(Error::Contract(format!(
            "system is not a covering system ({} residues uncovered mod {})",
            report.uncovered_total, report.lcm
        )));
    }
    Ok(report.lcm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TopModuliCheck {
    pub holds: bool,
    /// Set for single-class systems, where there is no pair to compare.
    pub degenerate: bool,
}

/// For an exact cover sorted by modulus, checks that the two largest moduli agree.
pub fn top_moduli_check(system: &CongruenceSystem) -> Result<TopModuliCheck> {
    require_exact_cover(system)?;
    if system.len() == 1 {
        return Ok(TopModuliCheck {
            holds: true,
            degenerate: true,
        });
    }
    let mut moduli: Vec<u64> = system.classes.iter().map(|c| c.modulus).collect();
    moduli.sort_unstable();
    let n = moduli.len();
    Ok(TopModuliCheck {
        holds: moduli[n - 2] == moduli[n - 1],
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZnamCheck {
    /// Least prime factor of the lcm; `None` when the lcm is 1.
    pub smallest_prime: Option<u64>,
    pub multiplicity: usize,
    pub holds: bool,
    pub degenerate: bool,
}

/// For an exact cover, counts how often the largest modulus occurs and compares
/// that count against the least prime factor of the lcm.
pub fn znam_multiplicity_check(system: &CongruenceSystem) -> Result<ZnamCheck> {
    let lcm = require_exact_cover(system)?;
    let max = system.classes.iter().map(|c| c.modulus).max().unwrap_or(1);
    let multiplicity = system.classes.iter().filter(|c| c.modulus == max).count();
    if lcm == 1 {
        return Ok(ZnamCheck {
            smallest_prime: None,
            multiplicity,
            holds: true,
            degenerate: true,
        });
    }
    let p = smallest_prime_factor(lcm);
    Ok(ZnamCheck {
        smallest_prime: Some(p),
        multiplicity,
        holds: multiplicity as u64 >= p,
        degenerate: false,
    })
}

pub(crate) fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n >= 2);
    if n % 2 == 0 {
        return 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return d;
        }
        d += 2;
    }
    n
}
