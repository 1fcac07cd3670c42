//! DNF expressions as subcube covers of the Boolean cube.

mod bounds;
mod dnf;
mod points;
mod term;

pub use bounds::{
    binomial, bound_table, density_bound_a, density_bound_b, distinct_tail, uniform_density, BoundKind,
    BoundRow, BoundTable, ComparisonMode,
};
pub(crate) use bounds::serialize_ratio;
pub use dnf::{
    boolean_mndr_check, canonical_dnf, dnf_coverage, dnf_coverage_with, enumerate_exact_tautologies,
    is_distinct_dnf, is_exact_dnf, is_tautology, pigeonhole_tautology, Coverage, DnfExpression, MndrCheck,
    ENUMERATION_MAX_N,
};
pub(crate) use dnf::subsets_lex;
pub use points::{term_points, PointSet};
pub use term::{Term, MAX_VARS};
