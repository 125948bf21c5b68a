//! A small expression language for self-maps of `Z_p`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := int | 'x' | '(' expr ')'
//!         | 'sigma' ['^' uint] '(' expr ')'
//!         | 'C' '(' expr ',' uint ')'
//!         | 'mahler' '[' int {',' int} ']' '(' expr ')'
//!         | 'auto' '(' string ')' '(' expr ')'
//! ```
//!
//! Every expression carries a [`LookaheadBound`] `l`: inputs that agree modulo
//! `p^(k+l)` have images that agree modulo `p^k`.

mod decompose;
mod eval;
mod parse;

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use thiserror::Error;

use crate::padic::{factorial_valuation, PadicError, Prime};
use crate::transducer::{Automaton, AutomatonError};

pub use decompose::{decompose_complex_shift, ComplexShiftDecomposition, DecompositionOutcome};
pub use eval::{domain_size, eval_map, step_order, tabulate, Evaluator};
pub use parse::{parse_map, parse_map_with};

/// Default cap on the number of table entries any exhaustive sweep may build.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("cannot load automaton `{path}`: {message}")]
    AutomatonLoad { path: String, message: String },
    #[error("automaton `{path}` has unbounded lookahead (not locally 1-Lipschitz)")]
    UnboundedLookahead { path: String },
    #[error("precision exhausted: need more than {needed} input digits, have {available}")]
    PrecisionExhausted { needed: u32, available: u32 },
    #[error("expression uses p = {expr} but the input has p = {input}")]
    MismatchedPrime { expr: u32, input: u32 },
    #[error("enumeration of {requested} entries exceeds the budget of {budget}")]
    BudgetExceeded { requested: String, budget: u64 },
    #[error("table length {0} is not a power of p")]
    TableShape(usize),
    #[error("level n must be at least 1")]
    ZeroLevel,
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// A parsed automaton reference, `auto("path")`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoRef {
    pub path: String,
    pub automaton: Arc<Automaton>,
    pub lookahead: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapExpr {
    Const(BigUint),
    Var,
    Add(Box<MapExpr>, Box<MapExpr>),
    Sub(Box<MapExpr>, Box<MapExpr>),
    Mul(Box<MapExpr>, Box<MapExpr>),
    Pow(Box<MapExpr>, u32),
    /// `sigma^n(e)`
    Shift(u32, Box<MapExpr>),
    /// `C(e, m)`
    Binomial(Box<MapExpr>, u64),
    /// `sum_m a_m C(e, m)` over the listed coefficients.
    Mahler(Vec<BigInt>, Box<MapExpr>),
    Auto(AutoRef, Box<MapExpr>),
}

/// Certified digit lookahead of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LookaheadBound(pub u32);

impl MapExpr {
    /// Sound bound on how many extra input digits the map consumes.
    pub fn lookahead_bound(&self, p: Prime) -> LookaheadBound {
        LookaheadBound(self.lookahead(p))
    }

    pub(crate) fn lookahead(&self, p: Prime) -> u32 {
        use MapExpr::*;
        match self {
            Const(_) | Var => 0,
            Add(a, b) | Sub(a, b) | Mul(a, b) => a.lookahead(p).max(b.lookahead(p)),
            Pow(a, _) => a.lookahead(p),
            Shift(n, e) => n + e.lookahead(p),
            Binomial(e, m) => e.lookahead(p) + factorial_valuation(*m, p),
            Mahler(coeffs, e) => e.lookahead(p) + mahler_lookahead(coeffs, p),
            Auto(r, e) => r.lookahead + e.lookahead(p),
        }
    }

    /// Degree as a polynomial in `x`, when the expression is one. Such maps
    /// have Mahler coefficients that vanish exactly beyond the degree.
    pub fn polynomial_degree(&self) -> Option<u64> {
        use MapExpr::*;
        Some(match self {
            Const(_) => 0,
            Var => 1,
            Add(a, b) | Sub(a, b) => a.polynomial_degree()?.max(b.polynomial_degree()?),
            Mul(a, b) => a.polynomial_degree()? + b.polynomial_degree()?,
            Pow(a, e) => a.polynomial_degree()? * *e as u64,
            Binomial(a, m) => a.polynomial_degree()? * m,
            Mahler(coeffs, a) => {
                let top = coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0) as u64;
                a.polynomial_degree()? * top
            }
            Shift(..) | Auto(..) => return None,
        })
    }

    /// Free of shifts, automata and any binomial whose denominator `p`
    /// divides: such expressions are 1-Lipschitz with lookahead zero.
    pub fn is_integral_polynomial(&self, p: Prime) -> bool {
        self.polynomial_degree().is_some() && self.lookahead(p) == 0
    }
}

pub(crate) fn mahler_lookahead(coeffs: &[BigInt], p: Prime) -> u32 {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, _)| factorial_valuation(m as u64, p))
        .max()
        .unwrap_or(0)
}

impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use MapExpr::*;
        match self {
            Const(c) => write!(f, "{c}"),
            Var => write!(f, "x"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Pow(a, e) => write!(f, "({a}^{e})"),
            Shift(1, e) => write!(f, "sigma({e})"),
            Shift(n, e) => write!(f, "sigma^{n}({e})"),
            Binomial(e, m) => write!(f, "C({e}, {m})"),
            Mahler(coeffs, e) => {
                let list: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "mahler[{}]({e})", list.join(", "))
            }
            Auto(r, e) => write!(f, "auto(\"{}\")({e})", r.path),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn ell(text: &str, prime: u64) -> u32 {
        parse_map(text).unwrap().lookahead_bound(p(prime)).0
    }

    #[test]
    fn lookahead_examples() {
        assert_eq!(ell("x^2+1", 2), 0);
        assert_eq!(ell("sigma^2(x)", 2), 2);
        assert_eq!(ell("C(x,4)", 2), 3);
        assert_eq!(ell("C(x,4)", 5), 0);
        assert_eq!(ell("mahler[0,0,1](x)", 2), 1);
        assert_eq!(ell("mahler[1,2,0,0,0](x)", 2), 0);
        assert_eq!(ell("sigma(x) * sigma^3(x+1)", 3), 3);
        assert_eq!(ell("sigma(C(x, 9))", 3), 5);
    }

    #[test]
    fn degrees() {
        assert_eq!(parse_map("x^2+x+1").unwrap().polynomial_degree(), Some(2));
        assert_eq!(parse_map("mahler[1,2,4](x)").unwrap().polynomial_degree(), Some(2));
        assert_eq!(parse_map("C(x*x, 3)").unwrap().polynomial_degree(), Some(6));
        assert_eq!(parse_map("sigma(x)").unwrap().polynomial_degree(), None);
        assert!(parse_map("C(x,2)").unwrap().is_integral_polynomial(p(3)));
        assert!(!parse_map("C(x,2)").unwrap().is_integral_polynomial(p(2)));
    }
}
