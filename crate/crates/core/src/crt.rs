//! The Chinese-remainder bijection `x -> (x mod p_1, ..., x mod p_k)` between
//! `[0, M)` and the box `[0, p_1) x ... x [0, p_k)` for square-free `M`, and the
//! induced correspondence between residue classes and sub-boxes.
//!
//! Coordinates follow ascending prime order.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::boxcover::{box_cover_check_with, DiscreteBox, SubBox};
use crate::congruence::{verify_cover_with, CongruenceClass, CongruenceSystem};
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PrimeFactorization {
    primes: Vec<u64>,
    exponents: Vec<u32>,
}

impl PrimeFactorization {
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn value(&self) -> u64 {
        self.primes
            .iter()
            .zip(&self.exponents)
            .map(|(&p, &r)| p.pow(r))
            .product()
    }

    pub fn is_square_free(&self) -> bool {
        self.exponents.iter().all(|&r| r == 1)
    }

    pub fn require_square_free(&self) -> Result<()> {
        match self.primes.iter().zip(&self.exponents).find(|(_, &r)| r > 1) {
            None => Ok(()),
            Some((p, r)) => Err(Error::Unsupported(format!(
                "modulus {} is not square-free: it contains {p}^{r}",
                self.value()
            ))),
        }
    }

    /// The box `[0, p_1) x ... x [0, p_k)`.
    pub fn prime_box(&self) -> Result<DiscreteBox> {
        self.require_square_free()?;
        DiscreteBox::new(self.primes.clone())
    }
}

/// Trial division.
pub fn factorize(mut m: u64) -> PrimeFactorization {
    let mut primes = Vec::new();
    let mut exponents = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= m {
        if m % d == 0 {
            let mut r = 0;
            while m % d == 0 {
                m /= d;
                r += 1;
            }
            primes.push(d);
            exponents.push(r);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        primes.push(m);
        exponents.push(1);
    }
    PrimeFactorization { primes, exponents }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).primes == [n]
}

/// A point of the prime box.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DiscretePoint {
    pub coords: Vec<u64>,
}

pub fn crt_map(x: u64, factorization: &PrimeFactorization) -> Result<DiscretePoint> {
    factorization.require_square_free()?;
    let m = factorization.value();
    if x >= m {
        return Err(Error::Domain(format!("{x} is outside [0, {m})")));
    }
    Ok(DiscretePoint {
        coords: factorization.primes.iter().map(|&p| x % p).collect(),
    })
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // p prime, a not divisible by p
    let (mut old_r, mut r) = (a as i128 % p as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(p as i128) as u64
}

/// Lifts residues modulo distinct primes to the unique representative in `[0, Π p)`.
fn crt_lift(pairs: impl IntoIterator<Item = (u64, u64)>) -> u64 {
    let mut x: u64 = 0;
    let mut modulus: u64 = 1;
    for (c, p) in pairs {
        // x + modulus * t ≡ c (mod p)
        let diff = (c + p - x % p) % p;
        let t = (diff as u128 * mod_inverse(modulus % p, p) as u128 % p as u128) as u64;
        x += modulus * t;
        modulus *= p;
    }
    x
}

pub fn crt_inverse(point: &DiscretePoint, factorization: &PrimeFactorization) -> Result<u64> {
    factorization.require_square_free()?;
    if point.coords.len() != factorization.primes.len() {
        return Err(Error::Domain(format!(
            "point has {} coordinates, the box has {}",
            point.coords.len(),
            factorization.primes.len()
        )));
    }
    for (&c, &p) in point.coords.iter().zip(&factorization.primes) {
        if c >= p {
            return Err(Error::Domain(format!("coordinate {c} outside [0, {p})")));
        }
    }
    Ok(crt_lift(point.coords.iter().copied().zip(factorization.primes.iter().copied())))
}

/// `a (mod m)` with `m | M` becomes the sub-box fixing the coordinate of every
/// prime `p | m` to `a mod p`.
pub fn class_to_subbox(class: &CongruenceClass, factorization: &PrimeFactorization) -> Result<SubBox> {
    let container = factorization.prime_box()?;
    let m = class.modulus();
    let big_m = factorization.value();
    if big_m % m != 0 {
        return Err(Error::Domain(format!("modulus {m} does not divide {big_m}")));
    }
    let fixed: BTreeMap<usize, u64> = factorization
        .primes
        .iter()
        .enumerate()
        .filter(|(_, &p)| m % p == 0)
        .map(|(i, &p)| (i, class.residue() % p))
        .collect();
    SubBox::new(&container, fixed)
}

pub fn subbox_to_class(subbox: &SubBox, factorization: &PrimeFactorization) -> Result<CongruenceClass> {
    factorization.require_square_free()?;
    if subbox.radices() != factorization.primes.as_slice() {
        return Err(Error::Domain(format!(
            "sub-box radices {:?} do not match the primes {:?}",
            subbox.radices(),
            factorization.primes
        )));
    }
    let modulus: u64 = subbox.fixed().keys().map(|&i| factorization.primes[i]).product();
    let residue = crt_lift(subbox.fixed().iter().map(|(&i, &v)| (v, factorization.primes[i])));
    CongruenceClass::new(residue, modulus)
}

/// Maps every class of the system to its sub-box over the prime box of `M`.
pub fn system_to_subboxes(system: &CongruenceSystem) -> Result<(PrimeFactorization, DiscreteBox, Vec<SubBox>)> {
    let m = system.lcm()?;
    let f = factorize(m);
    let container = f.prime_box()?;
    let subboxes = system
        .classes()
        .iter()
        .map(|c| class_to_subbox(c, &f))
        .collect::<Result<Vec<_>>>()?;
    Ok((f, container, subboxes))
}

/// Checks that the integer cover test and the box cover test of the mapped
/// sub-boxes agree. They always should; the result is the agreement flag.
pub fn system_cover_equivalence(system: &CongruenceSystem) -> Result<bool> {
    system_cover_equivalence_with(system, &Limits::default())
}

pub fn system_cover_equivalence_with(system: &CongruenceSystem, limits: &Limits) -> Result<bool> {
    let (_, container, subboxes) = system_to_subboxes(system)?;
    let integer = verify_cover_with(system, limits)?;
    let boxed = box_cover_check_with(&container, &subboxes, limits)?;
    Ok(integer.is_cover == boxed.is_cover && integer.uncovered_total == boxed.uncovered_count)
}
