#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use padyn_core::dsl::MapExpr;

pub const CORPUS: &[&str] = &[
    "x",
    "x+1",
    "3*x+1",
    "x^2",
    "x^2+x+1",
    "sigma(x)",
    "sigma^2(x)",
    "sigma(x^2+x+1)",
    "C(x,2)",
    "mahler[1,2,4](x)",
];

/// `x (x-1) ... (x-m+1) / m!` with exact integer arithmetic.
pub fn falling_binomial(x: &BigInt, m: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..m {
        num *= x - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    let (q, r) = num.div_rem(&den);
    assert!(r.is_zero());
    q
}

/// Exact value on an integer input; `sigma^n` is floor division, which is
/// the digit shift on negative integers too.
pub fn exact(e: &MapExpr, x: &BigInt, p: u64) -> BigInt {
    use MapExpr::*;
    match e {
        Const(c) => BigInt::from(c.clone()),
        Var => x.clone(),
        Add(a, b) => exact(a, x, p) + exact(b, x, p),
        Sub(a, b) => exact(a, x, p) - exact(b, x, p),
        Mul(a, b) => exact(a, x, p) * exact(b, x, p),
        Pow(a, n) => num_traits::pow(exact(a, x, p), *n as usize),
        Shift(n, a) => exact(a, x, p).div_floor(&BigInt::from(p).pow(*n)),
        Binomial(a, m) => falling_binomial(&exact(a, x, p), *m),
        Mahler(coeffs, a) => {
            let inner = exact(a, x, p);
            coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| c * falling_binomial(&inner, m as u64))
                .sum()
        }
        Auto(..) => panic!("the integer oracle has no automata"),
    }
}

pub fn modp(v: &BigInt, p: u64, k: u32) -> BigInt {
    v.mod_floor(&BigInt::from(p).pow(k))
}

/// `sum_i (-1)^(m-i) C(m, i) F(i)` over exact integers.
pub fn mahler_coefficient(e: &MapExpr, p: u64, m: u64) -> BigInt {
    (0..=m)
        .map(|i| {
            let term = falling_binomial(&BigInt::from(m), i) * exact(e, &BigInt::from(i), p);
            if (m - i).is_multiple_of(2) {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// The `p`-adic valuation of a nonzero integer, `None` for zero.
pub fn valuation(v: &BigInt, p: u64) -> Option<u32> {
    if v.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = v.clone();
    let mut k = 0;
    while (&v % &p).is_zero() {
        v /= &p;
        k += 1;
    }
    Some(k)
}

/// Number of cycles of a self-map of `0..table.len()`, by three-colour walking.
pub fn count_cycles(table: &[u64]) -> usize {
    let mut state = vec![0u8; table.len()];
    let mut cycles = 0;
    for start in 0..table.len() {
        let mut x = start;
        while state[x] == 0 {
            state[x] = 1;
            x = table[x] as usize;
        }
        if state[x] == 1 {
            cycles += 1;
        }
        let mut y = start;
        while state[y] == 1 {
            state[y] = 2;
            y = table[y] as usize;
        }
    }
    cycles
}
