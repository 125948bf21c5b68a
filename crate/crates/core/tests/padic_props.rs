use num_bigint::{BigInt, BigUint};
use padyn_core::padic::{binomial, factorial_valuation, PNorm, PadicApprox, Prime, Valuation};
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11]).prop_map(|p| Prime::new(p).unwrap())
}

fn approx() -> impl Strategy<Value = PadicApprox> {
    (prime(), 1u32..40).prop_flat_map(|(p, k)| {
        prop::collection::vec(0..p.as_u64(), k as usize)
            .prop_map(move |d| PadicApprox::from_digits(&d, p).unwrap())
    })
}

fn triple() -> impl Strategy<Value = (PadicApprox, PadicApprox, PadicApprox)> {
    (prime(), 1u32..30).prop_flat_map(|(p, k)| {
        let one = move || prop::collection::vec(0..p.as_u64(), k as usize);
        (one(), one(), one()).prop_map(move |(a, b, c)| {
            let mk = |d: Vec<u64>| PadicApprox::from_digits(&d, p).unwrap();
            (mk(a), mk(b), mk(c))
        })
    })
}

/// Exponent of `p` in a nonzero integer, by repeated division.
fn naive_valuation(mut v: u64, p: u64) -> u32 {
    let mut e = 0;
    while v.is_multiple_of(p) {
        v /= p;
        e += 1;
    }
    e
}

proptest! {
    #[test]
    fn ultrametric((x, y, z) in triple()) {
        let xz = x.distance(&z).unwrap();
        let bound = x.distance(&y).unwrap().max(y.distance(&z).unwrap());
        prop_assert!(xz <= bound);
    }

    #[test]
    fn digit_round_trip(x in approx()) {
        let digits: Vec<u64> = x.digits().into_iter().map(u64::from).collect();
        prop_assert_eq!(PadicApprox::from_digits(&digits, x.prime()).unwrap(), x);
    }

    #[test]
    fn valuation_multiplicativity((x, y, _) in triple()) {
        if let (Valuation::Exact(a), Valuation::Exact(b)) = (x.valuation(), y.valuation()) {
            if a + b < x.precision() {
                prop_assert_eq!(x.mul(&y).unwrap().valuation(), Valuation::Exact(a + b));
            }
        }
    }

    #[test]
    fn reduction_coherence(x in approx(), a in 1u32..40, b in 1u32..40) {
        let k = a.min(x.precision());
        let j = b.min(k);
        let twice = x.reduce(k).unwrap().reduce(j).unwrap();
        prop_assert_eq!(twice, x.reduce(j).unwrap());
    }

    #[test]
    fn shift_digit_identity(x in approx()) {
        let k = x.precision();
        prop_assume!(k >= 2);
        let p = x.prime();
        let low = PadicApprox::from_u64(p, k - 1, u64::from(x.digit(0).unwrap())).unwrap();
        let pp = PadicApprox::from_u64(p, k - 1, p.as_u64()).unwrap();
        let rebuilt = low.add(&pp.mul(&x.sigma_shift(1).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(rebuilt, x.reduce(k - 1).unwrap());
    }

    #[test]
    fn integers_wrap_like_modular_arithmetic(p in prime(), k in 1u32..20, v in any::<i64>()) {
        let x = PadicApprox::from_integer(p, k, &BigInt::from(v)).unwrap();
        let m = BigInt::from(p.pow(k));
        let expected = ((BigInt::from(v) % &m) + &m) % &m;
        prop_assert_eq!(BigInt::from(x.residue().clone()), expected);
    }

    #[test]
    fn legendre_matches_product(n in 0u64..300, p in prime()) {
        let naive: u32 = (1..=n).map(|i| naive_valuation(i, p.as_u64())).sum();
        prop_assert_eq!(factorial_valuation(n, p), naive);
    }

    #[test]
    fn binomial_matches_pascal(x in -40i64..40, m in 0u64..12) {
        // C(x, m) = C(x-1, m) + C(x-1, m-1), with C(x, 0) = 1
        let lhs = binomial(&BigInt::from(x), m);
        let rhs = if m == 0 {
            BigInt::from(1)
        } else {
            binomial(&BigInt::from(x - 1), m) + binomial(&BigInt::from(x - 1), m - 1)
        };
        prop_assert_eq!(lhs, rhs);
    }
}

/// `|sigma^n(x) - sigma^n(y)|_p <= p^n |x - y|_p`, exhaustively.
#[test]
fn shift_expands_distances_by_at_most_p_to_the_n() {
    for (p, k) in [(2u64, 12u32), (3, 7)] {
        let prime = Prime::new(p).unwrap();
        let size = p.pow(k);
        for n in 1..=2u32 {
            let shifted: Vec<u64> = (0..size).map(|x| x / p.pow(n)).collect();
            for x in 0..size {
                for y in (x + 1)..size {
                    let v_in = naive_valuation(y - x, p);
                    let d = shifted[y as usize].abs_diff(shifted[x as usize]);
                    if d != 0 {
                        assert!(naive_valuation(d, p) + n >= v_in, "p={p} x={x} y={y}");
                    }
                }
            }
            // spot-check the library shift against the integer oracle
            for x in (0..size).step_by(97) {
                let a = PadicApprox::from_u64(prime, k, x).unwrap();
                let s = a.sigma_shift(n).unwrap();
                assert_eq!(s.residue(), &BigUint::from(x / p.pow(n)));
                assert_eq!(s.precision(), k - n);
            }
        }
    }
}

#[test]
fn norm_of_zero_difference_is_smallest() {
    let p = Prime::new(3).unwrap();
    let x = PadicApprox::from_u64(p, 5, 17).unwrap();
    let zero = x.distance(&x).unwrap();
    assert_eq!(zero, PNorm::ZeroAtPrecision { precision: 5 });
    let y = PadicApprox::from_u64(p, 5, 17 + 81).unwrap();
    assert!(zero < x.distance(&y).unwrap());
}
