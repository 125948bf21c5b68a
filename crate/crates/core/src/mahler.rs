//! Mahler coefficients and the coefficient criteria built on them.
//!
//! Coefficients come from the forward-difference table of `F(0), .., F(M)`;
//! `a_m = (Delta^m F)(0)`. Every criterion quantifies over all `m`, so each
//! checker is bounded by the available `M` and reports
//! [`Verdict::SatisfiedUpTo`] rather than claiming the property outright.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::dsl::{DslError, Evaluator, MapExpr};
use crate::padic::{binomial_eval, floor_log, valuation_of, Prime, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MahlerError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("need coefficients up to index {needed}, have up to {available}")]
    InsufficientCoefficients { needed: u64, available: u64 },
    #[error("index {index} is beyond the last coefficient {max}")]
    IndexOutOfRange { index: u64, max: u64 },
    #[error("working precision must be at least 1")]
    ZeroPrecision,
    #[error("level n must be at least 1")]
    ZeroLevel,
}

/// `a_0, .., a_M`, each a residue modulo `p^K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MahlerCoeffs {
    p: Prime,
    precision: u32,
    coeffs: Vec<BigUint>,
    valuations: Vec<Valuation>,
    /// Every `a_m` with `m` at or beyond this index is exactly zero.
    zero_from: Option<u64>,
}

impl MahlerCoeffs {
    /// Builds from integer coefficients, reducing each modulo `p^K`.
    pub fn from_integers(p: Prime, precision: u32, values: &[BigInt]) -> Result<Self, MahlerError> {
        if precision == 0 {
            return Err(MahlerError::ZeroPrecision);
        }
        let modulus = BigInt::from(p.pow(precision));
        let coeffs: Vec<BigUint> = values
            .iter()
            .map(|v| v.mod_floor(&modulus).to_biguint().expect("non-negative"))
            .collect();
        Ok(Self::from_residues(p, precision, coeffs, None))
    }

    fn from_residues(p: Prime, precision: u32, coeffs: Vec<BigUint>, zero_from: Option<u64>) -> Self {
        let valuations = coeffs
            .iter()
            .map(|c| valuation_of(c, p, precision))
            .collect();
        MahlerCoeffs {
            p,
            precision,
            coeffs,
            valuations,
            zero_from,
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `M`, the index of the last coefficient.
    pub fn max_index(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    pub fn residue(&self, m: u64) -> &BigUint {
        &self.coeffs[m as usize]
    }

    pub fn residues(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn valuation(&self, m: u64) -> Valuation {
        self.valuations[m as usize]
    }

    /// The residue in the balanced range `(-p^K/2, p^K/2]`.
    pub fn signed(&self, m: u64) -> BigInt {
        let modulus = BigInt::from(self.p.pow(self.precision));
        let r = BigInt::from(self.coeffs[m as usize].clone());
        if &r * 2 > modulus {
            r - modulus
        } else {
            r
        }
    }

    pub fn known_zero_from(&self) -> Option<u64> {
        self.zero_from
    }

    fn is_exact_zero(&self, m: u64) -> bool {
        self.zero_from.is_some_and(|z| m >= z)
    }

    /// Replaces one coefficient; the result no longer claims exact zeros.
    pub fn with_coefficient(&self, m: u64, value: &BigInt) -> Self {
        let modulus = BigInt::from(self.p.pow(self.precision));
        let mut coeffs = self.coeffs.clone();
        coeffs[m as usize] = value.mod_floor(&modulus).to_biguint().expect("non-negative");
        Self::from_residues(self.p, self.precision, coeffs, None)
    }

    /// `sum_{m <= i} a_m C(i, m) mod p^K`; exact at integer points `i <= M`.
    pub fn eval(&self, i: u64) -> Result<BigUint, MahlerError> {
        if i > self.max_index() {
            return Err(MahlerError::IndexOutOfRange {
                index: i,
                max: self.max_index(),
            });
        }
        let modulus = self.p.pow(self.precision);
        let big_i = BigUint::from(i);
        let total = (0..=i).fold(BigUint::zero(), |acc, m| {
            acc + &self.coeffs[m as usize] * binomial_eval(&big_i, m)
        });
        Ok(total % modulus)
    }
}

/// Mahler coefficients `a_0..a_M` of `e` modulo `p^K`.
pub fn mahler_coeffs(e: &MapExpr, p: Prime, max_index: u64, precision: u32) -> Result<MahlerCoeffs, MahlerError> {
    if precision == 0 {
        return Err(MahlerError::ZeroPrecision);
    }
    let ev = Evaluator::new(e, p)?;
    // enough input digits that every point 0..=M is its own lift
    let index_digits = if max_index == 0 {
        1
    } else {
        floor_log(&BigUint::from(p.get()), max_index) + 1
    };
    let k_in = precision + ev.lookahead() + index_digits;
    let modulus = p.pow(precision);
    let mut row: Vec<BigUint> = (0..=max_index)
        .map(|i| ev.eval_residue(&BigUint::from(i), k_in, precision))
        .collect::<Result<_, _>>()?;
    let mut coeffs = Vec::with_capacity(row.len());
    while let Some(first) = row.first() {
        coeffs.push(first.clone());
        row = row
            .windows(2)
            .map(|w| (&w[1] + &modulus - &w[0]) % &modulus)
            .collect();
    }
    let zero_from = e.polynomial_degree().map(|d| d + 1);
    Ok(MahlerCoeffs::from_residues(p, precision, coeffs, zero_from))
}

/// `eval_mahler(c, i)`.
pub fn eval_mahler(c: &MahlerCoeffs, i: u64) -> Result<BigUint, MahlerError> {
    c.eval(i)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Every clause holds for `m <= bound`. `total` means all coefficients
    /// beyond the bound are known to vanish, so the check is complete.
    SatisfiedUpTo { bound: u64, total: bool },
    ViolatedAt {
        m: u64,
        condition: String,
        observed: Valuation,
    },
    /// The clause at `m` needs valuation `required`, above the precision.
    UndecidableAt { m: u64, required: u32 },
}

impl Verdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::SatisfiedUpTo { .. })
    }

    pub fn violated_index(&self) -> Option<u64> {
        match self {
            Verdict::ViolatedAt { m, .. } => Some(*m),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::SatisfiedUpTo { bound, total: true } => {
                write!(f, "SatisfiedUpTo({bound}) (total: finitely many nonzero coefficients)")
            }
            Verdict::SatisfiedUpTo { bound, total: false } => write!(f, "SatisfiedUpTo({bound})"),
            Verdict::ViolatedAt {
                m,
                condition,
                observed,
            } => write!(f, "ViolatedAt({m}): {condition} fails (observed valuation {observed})"),
            Verdict::UndecidableAt { m, required } => {
                write!(f, "UndecidableAt({m}): needs valuation {required}, precision too low")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Bernoulli,
    LipschitzMp,
    LipschitzErgodic,
    ComplexShift,
    ComplexShiftMp,
    ComplexShiftErgodic,
}

impl Check {
    pub fn key(self) -> &'static str {
        match self {
            Check::Bernoulli => "bernoulli",
            Check::LipschitzMp => "lipschitz_mp",
            Check::LipschitzErgodic => "lipschitz_ergodic",
            Check::ComplexShift => "cs",
            Check::ComplexShiftMp => "cs_mp",
            Check::ComplexShiftErgodic => "cs_ergodic",
        }
    }
}

/// How far a verdict reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Known identities of the shift coefficients.
    Property,
    /// An equivalence: a violation refutes the property.
    Characterization,
    /// Sufficient only: a violation proves nothing.
    SufficientOnly,
    /// Sufficient in general and also necessary for this prime.
    NecessaryForPrime,
}

impl Scope {
    pub fn key(self) -> &'static str {
        match self {
            Scope::Property => "property",
            Scope::Characterization => "characterization",
            Scope::SufficientOnly => "sufficient_only",
            Scope::NecessaryForPrime => "necessary_for_prime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub check: Check,
    pub verdict: Verdict,
    pub scope: Scope,
}

impl CheckOutcome {
    /// A violation that rules the property out, not just the condition.
    pub fn is_definitive_violation(&self) -> bool {
        matches!(self.verdict, Verdict::ViolatedAt { .. })
            && matches!(
                self.scope,
                Scope::Characterization | Scope::NecessaryForPrime | Scope::Property
            )
    }

    pub fn note(&self) -> &'static str {
        match (self.scope, &self.verdict) {
            (Scope::SufficientOnly, Verdict::ViolatedAt { .. }) => {
                "sufficient condition only: the property may still hold"
            }
            (Scope::SufficientOnly, _) => "sufficient condition only",
            (Scope::NecessaryForPrime, Verdict::ViolatedAt { .. }) => {
                "definitive: for p = 2 these conditions are also necessary"
            }
            (Scope::NecessaryForPrime, _) => "necessary and sufficient for p = 2",
            (Scope::Characterization, _) => "necessary and sufficient",
            (Scope::Property, _) => "identity of the shift coefficients",
        }
    }
}

enum Clause {
    Holds,
    Fails(String, Valuation),
    Undecidable(u32),
}

struct Clauses<'c> {
    c: &'c MahlerCoeffs,
}

impl Clauses<'_> {
    fn sym(&self) -> u32 {
        self.c.p.get()
    }

    /// `p^required | a_m`.
    fn divisible(&self, m: u64, required: u32) -> Clause {
        if required == 0 || self.c.is_exact_zero(m) {
            return Clause::Holds;
        }
        let v = self.c.valuation(m);
        match v.divisible_by(required) {
            Some(true) => Clause::Holds,
            Some(false) => Clause::Fails(
                format!("a_{m} ≡ 0 (mod {}^{required})", self.sym()),
                v,
            ),
            None => Clause::Undecidable(required),
        }
    }

    /// `value ≡ target (mod p^exponent)` for a residue known modulo `p^K`.
    fn congruent(&self, label: &str, value: &BigUint, exact_zero: bool, target: u64, exponent: u32) -> Clause {
        let condition = format!("{label} ≡ {target} (mod {}^{exponent})", self.sym());
        let modulus = self.c.p.pow(exponent);
        let observed = |diff: &BigUint| valuation_of(diff, self.c.p, self.c.precision);
        if exponent > self.c.precision && !exact_zero {
            return Clause::Undecidable(exponent);
        }
        let value = if exact_zero { BigUint::zero() } else { value.clone() };
        let target_big = BigUint::from(target) % &modulus;
        if value.clone() % &modulus == target_big {
            Clause::Holds
        } else {
            let full = self.c.p.pow(self.c.precision);
            let diff = (value + &full - BigUint::from(target) % &full) % &full;
            Clause::Fails(condition, observed(&diff))
        }
    }

    fn coefficient_congruent(&self, m: u64, target: u64, exponent: u32) -> Clause {
        self.congruent(
            &format!("a_{m}"),
            self.c.residue(m),
            self.c.is_exact_zero(m),
            target,
            exponent,
        )
    }

    /// `a_m ≢ 0 (mod p)`.
    fn unit(&self, m: u64) -> Clause {
        let v = if self.c.is_exact_zero(m) {
            Valuation::AtLeast(self.c.precision)
        } else {
            self.c.valuation(m)
        };
        if v == Valuation::Exact(0) {
            Clause::Holds
        } else {
            Clause::Fails(format!("a_{m} ≢ 0 (mod {})", self.sym()), v)
        }
    }
}

/// Runs `clauses_at(m)` for `m = first..=M` and reports the first failure.
fn run_checks<F>(c: &MahlerCoeffs, first: u64, last_special: u64, mut clauses_at: F) -> Verdict
where
    F: FnMut(&Clauses<'_>, u64) -> Vec<Clause>,
{
    let ctx = Clauses { c };
    for m in first..=c.max_index() {
        for clause in clauses_at(&ctx, m) {
            match clause {
                Clause::Holds => {}
                Clause::Fails(condition, observed) => {
                    return Verdict::ViolatedAt {
                        m,
                        condition,
                        observed,
                    }
                }
                Clause::Undecidable(required) => return Verdict::UndecidableAt { m, required },
            }
        }
    }
    let bound = c.max_index();
    let total = bound >= last_special && c.zero_from.is_some_and(|z| z <= bound + 1);
    Verdict::SatisfiedUpTo { bound, total }
}

fn level_power(p: Prime, n: u32) -> Result<(BigUint, u64), MahlerError> {
    if n == 0 {
        return Err(MahlerError::ZeroLevel);
    }
    let base = p.pow(n);
    let as_u64 = base.to_u64().unwrap_or(u64::MAX);
    Ok((base, as_u64))
}

/// Shift coefficients: `a_m = 0` for `m < p^n`, `a_{p^n} = 1`, and
/// `p^j | a_m` whenever `m > j p^n - j + 1`.
pub fn check_bernoulli_properties(c: &MahlerCoeffs, n: u32) -> Result<CheckOutcome, MahlerError> {
    let (_, pn) = level_power(c.p, n)?;
    let k = c.precision;
    let verdict = run_checks(c, 0, pn, |ctx, m| {
        let mut out = Vec::new();
        if m < pn {
            out.push(match ctx.divisible(m, k) {
                Clause::Holds => Clause::Holds,
                _ => Clause::Fails(format!("a_{m} = 0"), c.valuation(m)),
            });
        } else if m == pn {
            out.push(ctx.coefficient_congruent(m, 1, k));
        }
        // largest j with m > j (p^n - 1) + 1
        if m >= 2 && pn > 1 {
            let j = (m - 2) / (pn - 1);
            out.push(ctx.divisible(m, j.min(u32::MAX as u64) as u32));
        }
        out
    });
    Ok(CheckOutcome {
        check: Check::Bernoulli,
        verdict,
        scope: Scope::Property,
    })
}

/// `a_1 ≢ 0 (mod p)` and `a_m ≡ 0 (mod p^(floor(log_p m) + 1))` for `m >= 2`.
pub fn check_lipschitz_mp(c: &MahlerCoeffs) -> CheckOutcome {
    let base = BigUint::from(c.p.get());
    let verdict = run_checks(c, 1, 1, |ctx, m| match m {
        1 => vec![ctx.unit(1)],
        _ => vec![ctx.divisible(m, floor_log(&base, m) + 1)],
    });
    CheckOutcome {
        check: Check::LipschitzMp,
        verdict,
        scope: Scope::SufficientOnly,
    }
}

/// `a_0 ≢ 0 (mod p)`, `a_1 ≡ 1 (mod p)` (mod 4 when `p = 2`) and
/// `a_m ≡ 0 (mod p^(floor(log_p(m+1)) + 1))` for `m >= 2`. With `strict_m1`
/// the last clause also applies at `m = 1`, as literally printed, where it
/// contradicts the second clause.
pub fn check_lipschitz_ergodic(c: &MahlerCoeffs, strict_m1: bool) -> CheckOutcome {
    let base = BigUint::from(c.p.get());
    let two = c.p.get() == 2;
    let verdict = run_checks(c, 0, 1, |ctx, m| match m {
        0 => vec![ctx.unit(0)],
        1 => {
            let mut out = vec![ctx.coefficient_congruent(1, 1, if two { 2 } else { 1 })];
            if strict_m1 {
                out.push(ctx.divisible(1, floor_log(&base, 2) + 1));
            }
            out
        }
        _ => vec![ctx.divisible(m, floor_log(&base, m + 1) + 1)],
    });
    CheckOutcome {
        check: Check::LipschitzErgodic,
        verdict,
        scope: if two {
            Scope::NecessaryForPrime
        } else {
            Scope::SufficientOnly
        },
    }
}

/// Complex-shift bound `|a_m|_p <= p^(1 - floor(log_{p^n} m))` for `m >= 1`.
pub fn check_complex_shift_bound(c: &MahlerCoeffs, n: u32) -> Result<CheckOutcome, MahlerError> {
    let (base, _) = level_power(c.p, n)?;
    let verdict = run_checks(c, 1, 0, |ctx, m| {
        vec![ctx.divisible(m, floor_log(&base, m).saturating_sub(1))]
    });
    Ok(CheckOutcome {
        check: Check::ComplexShift,
        verdict,
        scope: Scope::Characterization,
    })
}

fn require_index(c: &MahlerCoeffs, needed: u64) -> Result<(), MahlerError> {
    if c.max_index() < needed {
        return Err(MahlerError::InsufficientCoefficients {
            needed,
            available: c.max_index(),
        });
    }
    Ok(())
}

/// Measure preservation of a complex shift: `a_{p^n} ≢ 0 (mod p)` and
/// `a_m ≡ 0 (mod p^floor(log_{p^n} m))` for `m > p^n`.
pub fn check_cs_mp(c: &MahlerCoeffs, n: u32) -> Result<CheckOutcome, MahlerError> {
    let (base, pn) = level_power(c.p, n)?;
    require_index(c, pn)?;
    let verdict = run_checks(c, pn, pn, |ctx, m| {
        if m == pn {
            vec![ctx.unit(m)]
        } else {
            vec![ctx.divisible(m, floor_log(&base, m))]
        }
    });
    Ok(CheckOutcome {
        check: Check::ComplexShiftMp,
        verdict,
        scope: Scope::SufficientOnly,
    })
}

/// Ergodicity of a complex shift: `a_{p^n} ≡ 1 (mod p)`,
/// `a_1 + .. + a_{p^n - 1} ≡ 0 (mod p)` (both checked at index `p^n`) and
/// `a_m ≡ 0 (mod p^floor(log_{p^n} m))` for `m > p^n`.
pub fn check_cs_ergodic(c: &MahlerCoeffs, n: u32) -> Result<CheckOutcome, MahlerError> {
    let (base, pn) = level_power(c.p, n)?;
    require_index(c, pn)?;
    let verdict = run_checks(c, pn, pn, |ctx, m| {
        if m == pn {
            let sum = (1..pn).fold(BigUint::zero(), |acc, i| acc + c.residue(i));
            let label = if pn == 2 {
                "a_1".to_string()
            } else {
                format!("a_1 + .. + a_{}", pn - 1)
            };
            vec![
                ctx.coefficient_congruent(m, 1, 1),
                ctx.congruent(&label, &sum, false, 0, 1),
            ]
        } else {
            vec![ctx.divisible(m, floor_log(&base, m))]
        }
    });
    Ok(CheckOutcome {
        check: Check::ComplexShiftErgodic,
        verdict,
        scope: Scope::SufficientOnly,
    })
}

impl fmt::Display for MahlerCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in 0..=self.max_index() {
            writeln!(f, "a_{m} = {} (v = {})", self.signed(m), self.valuation(m))?;
        }
        Ok(())
    }
}
