use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::{mahler_lookahead, DslError, MapExpr};
use crate::padic::{factorial_valuation, PadicApprox, Prime};

/// Evaluates one expression at a fixed prime.
///
/// The input residue is its own lift in `[0, p^K)`. Each node yields an
/// integer together with the number of digits it is guaranteed correct to,
/// and is reduced to that many digits before being passed upward; the digits
/// that survive are the same as those of exact integer evaluation.
pub struct Evaluator<'e> {
    expr: &'e MapExpr,
    p: Prime,
    lookahead: u32,
    powers: Vec<BigUint>,
}

impl<'e> Evaluator<'e> {
    pub fn new(expr: &'e MapExpr, p: Prime) -> Result<Self, DslError> {
        check_primes(expr, p)?;
        Ok(Evaluator {
            expr,
            p,
            lookahead: expr.lookahead(p),
            powers: (0..=64).map(|k| p.pow(k)).collect(),
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn lookahead(&self) -> u32 {
        self.lookahead
    }

    /// Output precision for `input_precision` digits of input.
    pub fn output_precision(&self, input_precision: u32) -> Result<u32, DslError> {
        if input_precision <= self.lookahead {
            return Err(DslError::PrecisionExhausted {
                needed: self.lookahead,
                available: input_precision,
            });
        }
        Ok(input_precision - self.lookahead)
    }

    pub fn eval(&self, x: &PadicApprox) -> Result<PadicApprox, DslError> {
        if x.prime() != self.p {
            return Err(DslError::MismatchedPrime {
                expr: self.p.get(),
                input: x.prime().get(),
            });
        }
        let k_out = self.output_precision(x.precision())?;
        let (value, k) = self.node(self.expr, x.residue(), x.precision());
        debug_assert_eq!(k, k_out);
        Ok(PadicApprox::new(self.p, k_out, value % self.p.pow(k_out))?)
    }

    /// `f(x) mod p^k_out` for a residue `x` given to `input_precision` digits.
    pub fn eval_residue(&self, x: &BigUint, input_precision: u32, k_out: u32) -> Result<BigUint, DslError> {
        let available = self.output_precision(input_precision)?;
        if k_out > available {
            return Err(DslError::PrecisionExhausted {
                needed: k_out + self.lookahead - 1,
                available: input_precision,
            });
        }
        let (value, _) = self.node(self.expr, x, input_precision);
        Ok(value % self.pow(k_out))
    }

    pub fn eval_u64(&self, x: u64, input_precision: u32, k_out: u32) -> Result<u64, DslError> {
        let v = self.eval_residue(&BigUint::from(x), input_precision, k_out)?;
        Ok(v.to_u64().expect("residue fits the table width"))
    }

    fn pow(&self, k: u32) -> BigUint {
        self.powers
            .get(k as usize)
            .cloned()
            .unwrap_or_else(|| self.p.pow(k))
    }

    fn node(&self, e: &MapExpr, x: &BigUint, k: u32) -> (BigUint, u32) {
        use MapExpr::*;
        match e {
            Const(c) => (c % self.pow(k), k),
            Var => (x % self.pow(k), k),
            Add(a, b) => {
                let ((va, ka), (vb, kb)) = (self.node(a, x, k), self.node(b, x, k));
                let k = ka.min(kb);
                ((va + vb) % self.pow(k), k)
            }
            Sub(a, b) => {
                let ((va, ka), (vb, kb)) = (self.node(a, x, k), self.node(b, x, k));
                let k = ka.min(kb);
                let m = self.pow(k);
                (((va % &m) + &m - (vb % &m)) % m, k)
            }
            Mul(a, b) => {
                let ((va, ka), (vb, kb)) = (self.node(a, x, k), self.node(b, x, k));
                let k = ka.min(kb);
                ((va * vb) % self.pow(k), k)
            }
            Pow(a, e) => {
                let (v, k) = self.node(a, x, k);
                (v.modpow(&BigUint::from(*e), &self.pow(k)), k)
            }
            Shift(n, a) => {
                let (v, k) = self.node(a, x, k);
                let k2 = k.saturating_sub(*n);
                ((v / self.pow(*n)) % self.pow(k2), k2)
            }
            Binomial(a, m) => {
                let (v, k) = self.node(a, x, k);
                let k2 = k.saturating_sub(factorial_valuation(*m, self.p));
                let c = crate::padic::binomial_eval(&v, *m);
                (c % self.pow(k2), k2)
            }
            Mahler(coeffs, a) => {
                let (v, k) = self.node(a, x, k);
                let k2 = k.saturating_sub(mahler_lookahead(coeffs, self.p));
                let modulus = BigInt::from(self.pow(k2));
                let v = BigInt::from(v);
                let mut acc = BigInt::zero();
                let mut basis = BigInt::from(1);
                for (m, a_m) in coeffs.iter().enumerate() {
                    if m > 0 {
                        basis *= &v - BigInt::from(m - 1);
                        basis /= BigInt::from(m);
                    }
                    if basis.is_zero() {
                        break;
                    }
                    acc += a_m * &basis;
                }
                let r = acc.mod_floor(&modulus);
                (r.to_biguint().expect("non-negative"), k2)
            }
            Auto(r, a) => {
                let (v, k) = self.node(a, x, k);
                if k <= r.lookahead {
                    return (BigUint::zero(), 0);
                }
                let keep = k - r.lookahead;
                (r.automaton.apply_truncated(&v, k, keep), keep)
            }
        }
    }
}

fn check_primes(e: &MapExpr, p: Prime) -> Result<(), DslError> {
    use MapExpr::*;
    match e {
        Const(_) | Var => Ok(()),
        Add(a, b) | Sub(a, b) | Mul(a, b) => {
            check_primes(a, p)?;
            check_primes(b, p)
        }
        Pow(a, _) | Shift(_, a) | Binomial(a, _) | Mahler(_, a) => check_primes(a, p),
        Auto(r, a) => {
            if r.automaton.prime() != p {
                return Err(DslError::MismatchedPrime {
                    expr: r.automaton.prime().get(),
                    input: p.get(),
                });
            }
            check_primes(a, p)
        }
    }
}

/// Evaluates `e` at `x`; the result has `K - lookahead` digits.
pub fn eval_map(e: &MapExpr, x: &PadicApprox) -> Result<PadicApprox, DslError> {
    Evaluator::new(e, x.prime())?.eval(x)
}

/// `p^digits`, provided it stays within `budget` table entries.
pub fn domain_size(p: Prime, digits: u32, budget: u64) -> Result<u64, DslError> {
    match p.pow_u64(digits) {
        Some(n) if n <= budget => Ok(n),
        _ => Err(DslError::BudgetExceeded {
            requested: format!("{}^{}", p, digits),
            budget,
        }),
    }
}

/// `table[i] = f(i) mod p^k_out` for every `i` in `Z/p^(k_out + l)`.
pub fn tabulate(e: &MapExpr, p: Prime, k_out: u32, budget: u64) -> Result<Vec<u64>, DslError> {
    let ev = Evaluator::new(e, p)?;
    let k_in = k_out + ev.lookahead();
    let size = domain_size(p, k_in, budget)?;
    ev.output_precision(k_in)?;
    (0..size)
        .into_par_iter()
        .map(|i| ev.eval_u64(i, k_in, k_out))
        .collect()
}

/// Smallest `l'` such that the table is constant on cosets modulo `p^l'`.
pub fn step_order(table: &[u64], p: Prime) -> Result<u32, DslError> {
    let mut size = 1usize;
    let mut digits = 0u32;
    while size < table.len() {
        size = size
            .checked_mul(p.get() as usize)
            .ok_or(DslError::TableShape(table.len()))?;
        digits += 1;
    }
    if size != table.len() {
        return Err(DslError::TableShape(table.len()));
    }
    let mut modulus = 1usize;
    for order in 0..=digits {
        if table.iter().enumerate().all(|(i, v)| table[i % modulus] == *v) {
            return Ok(order);
        }
        modulus *= p.get() as usize;
    }
    unreachable!("a table is constant on singleton cosets")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_map;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn at(pr: u64, k: u32, v: u64) -> PadicApprox {
        PadicApprox::from_u64(p(pr), k, v).unwrap()
    }

    #[test]
    fn eval_examples() {
        let e = parse_map("sigma(x+1)").unwrap();
        assert_eq!(eval_map(&e, &at(2, 4, 3)).unwrap(), at(2, 3, 2));
        let e = parse_map("x^2").unwrap();
        assert_eq!(eval_map(&e, &at(3, 2, 2)).unwrap(), at(3, 2, 4));
        let e = parse_map("mahler[0,0,1](x)").unwrap();
        assert_eq!(eval_map(&e, &at(2, 4, 5)).unwrap(), at(2, 3, 2));
    }

    #[test]
    fn subtraction_wraps_before_shifting() {
        // 0 - 1 = ...111 in Z_2, so sigma(0 - 1) = ...111 as well
        let e = parse_map("sigma(0 - 1)").unwrap();
        assert_eq!(eval_map(&e, &at(2, 5, 0)).unwrap(), at(2, 4, 15));
        let e = parse_map("C(0 - 1, 3)").unwrap();
        // v_3(3!) = 1 costs one digit; C(-1, 3) = -1
        assert_eq!(eval_map(&e, &at(3, 4, 0)).unwrap(), at(3, 3, 26));
    }

    #[test]
    fn eval_errors() {
        let e = parse_map("sigma^3(x)").unwrap();
        assert!(matches!(
            eval_map(&e, &at(2, 3, 1)),
            Err(DslError::PrecisionExhausted { needed: 3, available: 3 })
        ));
        let loader = |_: &str| Ok(crate::transducer::Automaton::shift(1, p(3)));
        let e = crate::dsl::parse_map_with("auto(\"a\")(x)", &loader).unwrap();
        assert!(matches!(
            eval_map(&e, &at(2, 3, 1)),
            Err(DslError::MismatchedPrime { expr: 3, input: 2 })
        ));
    }

    #[test]
    fn auto_node_matches_sigma() {
        let loader = |_: &str| Ok(crate::transducer::Automaton::shift(2, p(2)));
        let a = crate::dsl::parse_map_with("auto(\"c2\")(x*x + 1)", &loader).unwrap();
        let s = parse_map("sigma^2(x*x + 1)").unwrap();
        for v in 0..64 {
            let x = at(2, 6, v);
            assert_eq!(eval_map(&a, &x).unwrap(), eval_map(&s, &x).unwrap());
        }
    }

    #[test]
    fn tabulate_examples() {
        let two = p(2);
        let t = |s: &str| tabulate(&parse_map(s).unwrap(), two, 2, DEFAULT).unwrap();
        assert_eq!(t("x+1"), vec![1, 2, 3, 0]);
        assert_eq!(t("sigma(x)"), vec![0, 0, 1, 1, 2, 2, 3, 3]);
        assert_eq!(t("x^2"), vec![0, 1, 0, 1]);
        assert!(matches!(
            tabulate(&parse_map("x").unwrap(), two, 10, 512),
            Err(DslError::BudgetExceeded { budget: 512, .. })
        ));
    }

    const DEFAULT: u64 = crate::dsl::DEFAULT_BUDGET;

    #[test]
    fn step_order_examples() {
        let two = p(2);
        assert_eq!(step_order(&[7, 7, 7, 7], two), Ok(0));
        assert_eq!(step_order(&[0, 1, 0, 1], two), Ok(1));
        assert_eq!(step_order(&[0, 1, 2, 3, 0, 1, 2, 3], two), Ok(2));
        assert_eq!(step_order(&[0, 1, 2, 3, 4, 5, 6, 7], two), Ok(3));
        assert_eq!(step_order(&[0, 1, 2], two), Err(DslError::TableShape(3)));
        assert_eq!(step_order(&[5], two), Ok(0));
    }
}
