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
