mod common;

use common::{exact, falling_binomial, modp, CORPUS};
use num_bigint::{BigInt, BigUint};
use padyn_core::dsl::parse_map;
use padyn_core::mahler::{
    check_bernoulli_properties, check_complex_shift_bound, check_cs_ergodic, check_cs_mp,
    check_lipschitz_ergodic, check_lipschitz_mp, eval_mahler, mahler_coeffs, MahlerCoeffs, Verdict,
};
use padyn_core::padic::Prime;
use proptest::prelude::*;

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

/// `sum_i (-1)^(m-i) C(m, i) F(i)` with `F` from the integer oracle.
fn alternating_sum(text: &str, p: u64, m: u64) -> BigInt {
    let e = parse_map(text).unwrap();
    (0..=m)
        .map(|i| {
            let term = falling_binomial(&BigInt::from(m), i) * exact(&e, &BigInt::from(i), p);
            if (m - i).is_multiple_of(2) {
                term
            } else {
                -term
            }
        })
        .sum()
}

fn coeffs(text: &str, p: u64, m: u64, k: u32) -> MahlerCoeffs {
    mahler_coeffs(&parse_map(text).unwrap(), prime(p), m, k).unwrap()
}

#[test]
fn difference_table_matches_alternating_sum() {
    for text in CORPUS {
        for p in [2u64, 3] {
            let c = coeffs(text, p, 40, 16);
            for m in 0..=40 {
                let expected = modp(&alternating_sum(text, p, m), p, 16);
                assert_eq!(BigInt::from(c.residue(m).clone()), expected, "{text} p={p} m={m}");
            }
        }
    }
}

#[test]
fn coefficients_reconstruct_the_map() {
    for text in CORPUS {
        let e = parse_map(text).unwrap();
        for p in [2u64, 3] {
            let c = coeffs(text, p, 64, 16);
            for i in 0..=64u64 {
                let direct = modp(&exact(&e, &BigInt::from(i), p), p, 16);
                assert_eq!(BigInt::from(eval_mahler(&c, i).unwrap()), direct, "{text} p={p} i={i}");
            }
        }
    }
}

#[test]
fn coefficients_are_linear() {
    let modulus = BigUint::from(2u32).pow(16);
    for f in CORPUS {
        for g in CORPUS {
            let sum = format!("({f}) + ({g})");
            let (a, b, s) = (coeffs(f, 2, 24, 16), coeffs(g, 2, 24, 16), coeffs(&sum, 2, 24, 16));
            for m in 0..=24 {
                assert_eq!(*s.residue(m), (a.residue(m) + b.residue(m)) % &modulus, "{sum} m={m}");
            }
        }
    }
}

#[test]
fn binomials_are_basis_vectors() {
    for p in [2u64, 3, 5] {
        for j in 0..12u64 {
            let c = coeffs(&format!("C(x,{j})"), p, 20, 12);
            for m in 0..=20 {
                let expected = u32::from(m == j);
                assert_eq!(*c.residue(m), BigUint::from(expected), "p={p} j={j} m={m}");
            }
        }
    }
}

#[test]
fn shift_satisfies_every_complex_shift_criterion() {
    for p in [2u64, 3] {
        for n in 1..=2u32 {
            let m = 2 * p.pow(2 * n);
            let c = coeffs(&format!("sigma^{n}(x)"), p, m, 24);
            for outcome in [
                check_bernoulli_properties(&c, n).unwrap(),
                check_complex_shift_bound(&c, n).unwrap(),
                check_cs_mp(&c, n).unwrap(),
                check_cs_ergodic(&c, n).unwrap(),
            ] {
                assert_eq!(
                    outcome.verdict,
                    Verdict::SatisfiedUpTo { bound: m, total: false },
                    "p={p} n={n} {:?}",
                    outcome.check
                );
            }
        }
    }
}

#[test]
fn lipschitz_criteria_on_the_corpus() {
    // x + 1 is a single cycle mod every 2^k; 3x + 1 is not
    let c = coeffs("x+1", 2, 32, 16);
    assert!(check_lipschitz_ergodic(&c, false).verdict.is_satisfied());
    assert!(check_lipschitz_mp(&c).verdict.is_satisfied());
    let c = coeffs("3*x+1", 2, 32, 16);
    let out = check_lipschitz_ergodic(&c, false);
    assert_eq!(out.verdict.violated_index(), Some(1));
    assert!(out.is_definitive_violation());
    assert!(check_lipschitz_mp(&c).verdict.is_satisfied());
    let c = coeffs("x^2", 3, 32, 16);
    assert_eq!(check_lipschitz_mp(&c).verdict.violated_index(), Some(2));
    // the literal m = 1 clause rejects every map with a_1 = 1
    let c = coeffs("x+1", 3, 16, 8);
    assert!(check_lipschitz_ergodic(&c, false).verdict.is_satisfied());
    assert_eq!(check_lipschitz_ergodic(&c, true).verdict.violated_index(), Some(1));
}

fn any_verdicts(c: &MahlerCoeffs) -> Vec<Verdict> {
    let mut out = vec![
        check_lipschitz_mp(c).verdict,
        check_lipschitz_ergodic(c, false).verdict,
    ];
    for n in 1..=2 {
        out.push(check_complex_shift_bound(c, n).unwrap().verdict);
        out.push(check_bernoulli_properties(c, n).unwrap().verdict);
        if c.max_index() >= c.prime().as_u64().pow(n) {
            out.push(check_cs_mp(c, n).unwrap().verdict);
            out.push(check_cs_ergodic(c, n).unwrap().verdict);
        }
    }
    out
}

fn map_text() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(CORPUS.to_vec()).prop_map(String::from),
        prop::collection::vec(-8i64..8, 1..10).prop_map(|c| {
            let list: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            format!("mahler[{}](x)", list.join(","))
        }),
        (1u32..3, 0u64..20).prop_map(|(n, c)| format!("sigma^{n}(x) + {c}*C(x, 3)")),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn violations_persist_as_the_bound_grows(text in map_text(), p in prop::sample::select(vec![2u64, 3]), m1 in 9u64..30, extra in 1u64..30) {
        let small = any_verdicts(&coeffs(&text, p, m1, 12));
        let large = any_verdicts(&coeffs(&text, p, m1 + extra, 12));
        for (a, b) in small.iter().zip(&large) {
            if let Verdict::ViolatedAt { .. } = a {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn listed_mahler_coefficients_come_back(c in prop::collection::vec(-50i64..50, 1..12), p in prop::sample::select(vec![2u64, 3, 5])) {
        let list: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let got = coeffs(&format!("mahler[{}](x)", list.join(",")), p, 20, 10);
        for m in 0..=20u64 {
            let expected = c.get(m as usize).copied().unwrap_or(0);
            prop_assert_eq!(BigInt::from(got.residue(m).clone()), modp(&BigInt::from(expected), p, 10));
        }
    }

    #[test]
    fn fault_injection_is_caught_at_the_injected_index(p in prop::sample::select(vec![2u64, 3]), n in 1u32..3) {
        // a unit at an index that must be divisible by p
        let m = p.pow(2 * n) + 1;
        let c = coeffs(&format!("sigma^{n}(x)"), p, 2 * m, 16).with_coefficient(m, &BigInt::from(1));
        prop_assert_eq!(check_complex_shift_bound(&c, n).unwrap().verdict.violated_index(), Some(m));
        prop_assert_eq!(check_cs_mp(&c, n).unwrap().verdict.violated_index(), Some(m));
    }
}
