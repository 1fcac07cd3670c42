use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cubecover::boolean::{
    binomial, density_bound_a, dnf_coverage, is_distinct_dnf, is_tautology, ComparisonMode, DnfExpression, Term,
};
use cubecover::boxcover::{
    box_cover_check, elementary_symmetric, max_feasible_codimension, reciprocal_diagnostics, symmetric_tail,
    DiscreteBox, SubBox,
};
use cubecover::congruence::{is_exact, random_split_chain, split_refine, verify_cover, CongruenceSystem};
use cubecover::crt::{crt_inverse, crt_map, factorize};

type Literals = Vec<(usize, bool)>;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Random DNF on `n` variables, each term given as a literal list.
fn dnf_strategy(max_n: usize, max_terms: usize) -> impl Strategy<Value = (usize, Vec<Literals>)> {
    (1..=max_n).prop_flat_map(move |n| {
        let term = proptest::collection::vec(any::<bool>(), n)
            .prop_flat_map(move |pol| {
                proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), 0..=n)
                    .prop_map(move |vars| vars.into_iter().map(|v| (v, pol[v - 1])).collect::<Literals>())
            });
        (Just(n), proptest::collection::vec(term, 0..=max_terms))
    })
}

fn build(n: usize, terms: &[Literals]) -> DnfExpression {
    let terms = terms.iter().map(|l| Term::from_literals(n, l).unwrap()).collect();
    DnfExpression::new(n, terms).unwrap()
}

fn naive_satisfies(vertex: u32, literals: &Literals) -> bool {
    literals.iter().all(|&(var, positive)| ((vertex >> (var - 1)) & 1 == 1) == positive)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn coverage_matches_naive_evaluation((n, terms) in dnf_strategy(10, 12)) {
        let dnf = build(n, &terms);
        let cov = dnf_coverage(&dnf).unwrap();
        let mut uncovered = 0;
        for v in 0u32..1 << n {
            let hit = terms.iter().any(|t| naive_satisfies(v, t));
            prop_assert_eq!(cov.cover.contains(v), hit);
            uncovered += u64::from(!hit);
        }
        prop_assert_eq!(cov.uncovered_count, uncovered);
        prop_assert_eq!(is_tautology(&dnf).unwrap(), uncovered == 0);
    }

    #[test]
    fn union_is_at_most_sum_of_parts((n, terms) in dnf_strategy(10, 12)) {
        let dnf = build(n, &terms);
        let covered = dnf_coverage(&dnf).unwrap().cover.len();
        let total: u64 = dnf.terms().iter().map(|t| t.point_count()).sum();
        prop_assert!(covered <= total);
    }

    #[test]
    fn box_check_matches_boolean_translation((n, terms) in dnf_strategy(8, 10)) {
        let dnf = build(n, &terms);
        let cube = DiscreteBox::cube(n);
        let boxes: Vec<SubBox> = dnf.terms().iter().map(SubBox::from_term).collect();
        let report = box_cover_check(&cube, &boxes).unwrap();
        let cov = dnf_coverage(&dnf).unwrap();
        prop_assert_eq!(report.is_cover, cov.uncovered_count == 0);
        prop_assert_eq!(report.uncovered_count, cov.uncovered_count);
        prop_assert_eq!(report.is_non_parallel(), is_distinct_dnf(&dnf));
        prop_assert_eq!(report.min_fixed, dnf.min_term_size());
        for (b, t) in boxes.iter().zip(dnf.terms()) {
            prop_assert_eq!(&b.to_term().unwrap(), t);
        }
    }

    #[test]
    fn split_preserves_cover_and_exactness(seed in any::<u64>(), steps in 0usize..10, pick in any::<usize>(), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let system = random_split_chain(&mut rng, steps, &[2, 3, 5], 1 << 16);
        prop_assert!(is_exact(&system));
        prop_assert!(verify_cover(&system).unwrap().is_cover);
        let split = split_refine(&system, pick % system.len(), p).unwrap();
        prop_assert_eq!(split.len(), system.len() + p as usize - 1);
        prop_assert!(is_exact(&split));
        prop_assert!(verify_cover(&split).unwrap().is_cover);
    }

    #[test]
    fn split_keeps_non_exact_cover_covering(idx in 0usize..5, p in 2u64..6) {
        let erdos = CongruenceSystem::from_pairs(&[(0, 2), (0, 3), (1, 4), (5, 6), (7, 12)]).unwrap();
        let split = split_refine(&erdos, idx, p).unwrap();
        prop_assert!(verify_cover(&split).unwrap().is_cover);
        prop_assert!(!is_exact(&split));
    }

    #[test]
    fn elementary_symmetric_matches_subsets(radices in proptest::collection::vec(2i64..10, 0..=12)) {
        let values: Vec<BigRational> = radices.iter().map(|&a| ratio(1, a)).collect();
        let dp = elementary_symmetric(&values);
        let mut by_size = vec![BigRational::zero(); values.len() + 1];
        for mask in 0u32..1 << values.len() {
            let mut prod = BigRational::one();
            for (i, v) in values.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    prod *= v;
                }
            }
            by_size[mask.count_ones() as usize] += prod;
        }
        prop_assert_eq!(dp, by_size);
    }

    #[test]
    fn crt_roundtrip_on_square_free(m in 1u64..=10_000, x in any::<u64>()) {
        let f = factorize(m);
        prop_assume!(f.is_square_free());
        let x = x % m;
        let point = crt_map(x, &f).unwrap();
        for (c, p) in point.coords.iter().zip(f.primes()) {
            prop_assert_eq!(*c, x % p);
        }
        prop_assert_eq!(crt_inverse(&point, &f).unwrap(), x);
    }
}

#[test]
fn cube_tail_is_binomial_tail() {
    for n in 1..=14 {
        let cube = DiscreteBox::cube(n);
        for m in 0..=n {
            let expected = (m..=n).fold(BigRational::zero(), |acc, i| {
                acc + BigRational::new(binomial(n, i).into(), BigInt::from(2).pow(i as u32))
            });
            let tail = symmetric_tail(&cube, m, ComparisonMode::Weak).unwrap();
            assert_eq!(tail.value, expected, "n={n} m={m}");
        }
        for mode in [ComparisonMode::Weak, ComparisonMode::Strict] {
            assert_eq!(max_feasible_codimension(&cube, mode), density_bound_a(n, mode), "n={n}");
        }
    }
}

#[test]
fn reciprocal_diagnostics_first_nine_primes() {
    let d = reciprocal_diagnostics(&[2, 3, 5, 7, 11, 13, 17, 19, 23]).unwrap();
    assert_eq!(d.sum, ratio(334_406_399, 223_092_870));
    assert_eq!(d.product, ratio(3_981_312, 1_062_347));
}

#[test]
fn histogram_counts_every_residue() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let system = random_split_chain(&mut rng, 6, &[2, 3], 1 << 12);
        let report = verify_cover(&system).unwrap();
        let counted: u64 = report.multiplicity_histogram.values().sum();
        assert_eq!(counted, report.lcm);
        assert_eq!(report.multiplicity_histogram, BTreeMap::from([(1, report.lcm)]));
    }
}
