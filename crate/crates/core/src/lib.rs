//! Covering systems and their Boolean analogs.
//!
//! The crate is organised around four views of the same covering problem:
//!
//! * [`congruence`]: finite systems of residue classes `a (mod m)` and the
//!   exact/distinct predicates on them.
//! * [`crt`]: the Chinese-remainder map that turns a system with square-free
//!   lcm into a cover of a discrete box by sub-boxes.
//! * [`boolean`]: DNF expressions as unions of subcubes of `{0,1}^n`, plus the
//!   exact density bounds for distinct tautologies.
//! * [`boxcover`]: covers of mixed-radix boxes by non-parallel sub-boxes and
//!   the elementary-symmetric density test.
//!
//! [`search`] builds on the Boolean view to look for distinct DNF
//! tautologies with large minimum term size.

pub mod boolean;
pub mod boxcover;
pub mod congruence;
pub mod crt;
mod bits;
mod error;
pub mod search;

pub use error::{Error, Result};

/// Largest number of points any point-set or box scan may allocate by default.
pub const DEFAULT_POINT_CAP: u64 = 1 << 28;

/// Largest lcm the congruence verifier will scan by default.
pub const DEFAULT_LCM_CAP: u64 = 1 << 32;

/// Resource caps shared by the scanning operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub point_cap: u64,
    pub lcm_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            point_cap: DEFAULT_POINT_CAP,
            lcm_cap: DEFAULT_LCM_CAP,
        }
    }
}

impl Limits {
    /// Dimension cap implied by the point cap, never above 31 (variable masks are `u32`).
    pub fn max_dim(&self) -> usize {
        let bits = 63 - self.point_cap.max(1).leading_zeros() as usize;
        bits.min(31)
    }
}
