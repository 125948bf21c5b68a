use padyn_core::padic::{PadicApprox, Prime};
use padyn_core::transducer::{parse_automaton, Automaton, Nondegeneracy};
use proptest::prelude::*;

/// Random automaton over `p` with outputs of length in `out_len`.
fn automaton(p: u64, out_len: std::ops::Range<usize>) -> impl Strategy<Value = Automaton> {
    (1usize..5).prop_flat_map(move |n| {
        let edges = n * p as usize;
        (
            prop::collection::vec(0..n, edges),
            prop::collection::vec(prop::collection::vec(0..p as u32, out_len.clone()), edges),
        )
            .prop_map(move |(next, output)| {
                let names = (0..n).map(|i| format!("q{i}")).collect();
                Automaton::new(Prime::new(p).unwrap(), names, 0, next, output).unwrap()
            })
    })
}

fn any_automaton() -> impl Strategy<Value = Automaton> {
    prop_oneof![automaton(2, 0..3), automaton(3, 0..3)]
}

fn synchronous() -> impl Strategy<Value = Automaton> {
    prop_oneof![automaton(2, 1..2), automaton(3, 1..2)]
}

fn v_p(mut d: u64, p: u64) -> u32 {
    let mut e = 0;
    while d.is_multiple_of(p) {
        d /= p;
        e += 1;
    }
    e
}

/// Shortest output over every input word of length `len`, by enumeration.
fn brute_guaranteed(a: &Automaton, len: u32) -> u64 {
    let p = a.prime().as_u64();
    (0..p.pow(len))
        .map(|w| {
            let word: Vec<u32> = (0..len).map(|i| (w / p.pow(i) % p) as u32).collect();
            a.run(&word).unwrap().output.len() as u64
        })
        .min()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synchronous_maps_are_one_lipschitz(a in synchronous()) {
        prop_assert!(a.is_synchronous());
        let p = a.prime();
        let k = if p.get() == 2 { 8 } else { 5 };
        let size = p.as_u64().pow(k);
        let image: Vec<u64> = (0..size)
            .map(|x| {
                let x = PadicApprox::from_u64(p, k, x).unwrap();
                a.induced_map(&x).unwrap().residue_u64().unwrap()
            })
            .collect();
        for x in 0..size {
            for y in x + 1..size {
                let d = image[x as usize].abs_diff(image[y as usize]);
                if d != 0 {
                    prop_assert!(v_p(d, p.as_u64()) >= v_p(y - x, p.as_u64()));
                }
            }
        }
    }

    #[test]
    fn outputs_extend_along_inputs(a in any_automaton(), word in prop::collection::vec(0u32..2, 0..12), cut in 0usize..12) {
        let cut = cut.min(word.len());
        let short = a.run(&word[..cut]).unwrap();
        let long = a.run(&word).unwrap();
        prop_assert!(long.output.starts_with(&short.output));
        prop_assert_eq!(long.consumed, word.len());
    }

    #[test]
    fn guaranteed_length_matches_enumeration(a in any_automaton(), len in 0u32..6) {
        if a.check_nondegenerate() == Nondegeneracy::Nondegenerate {
            prop_assert_eq!(a.guaranteed_output_length(len).unwrap(), brute_guaranteed(&a, len));
        } else {
            prop_assert!(a.guaranteed_output_length(len).is_err());
        }
    }

    #[test]
    fn guaranteed_length_grows(a in any_automaton()) {
        prop_assume!(a.check_nondegenerate() == Nondegeneracy::Nondegenerate);
        let s = a.state_count() as u32;
        let g: Vec<u64> = (0..=4 * s).map(|l| a.guaranteed_output_length(l).unwrap()).collect();
        prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
        // any walk of s steps closes a cycle, and every cycle emits
        for l in 0..=3 * s {
            prop_assert!(g[(l + s) as usize] > g[l as usize]);
        }
    }

    #[test]
    fn lookahead_dominates_every_deficit(a in any_automaton()) {
        prop_assume!(a.check_nondegenerate() == Nondegeneracy::Nondegenerate);
        if let Some(ell) = a.lookahead().unwrap() {
            for l in 0..10u32 {
                let g = a.guaranteed_output_length(l).unwrap();
                prop_assert!(i64::from(l) - g as i64 <= i64::from(ell));
            }
            let l = 10 + ell;
            prop_assert!(a.guaranteed_output_length(l).unwrap() >= 10);
        }
    }

    #[test]
    fn file_format_round_trips(a in any_automaton()) {
        prop_assert_eq!(parse_automaton(&a.to_file_string()).unwrap(), a);
    }
}

#[test]
fn shift_automaton_induces_the_shift() {
    for (p, k) in [(2u64, 12u32), (3, 7)] {
        let prime = Prime::new(p).unwrap();
        for n in 1..=3usize {
            let a = Automaton::shift(n, prime);
            assert_eq!(a.lookahead().unwrap(), Some(n as u32));
            for x in 0..p.pow(k) {
                let x = PadicApprox::from_u64(prime, k, x).unwrap();
                assert_eq!(a.induced_map(&x).unwrap(), x.sigma_shift(n as u32).unwrap());
            }
        }
    }
}
