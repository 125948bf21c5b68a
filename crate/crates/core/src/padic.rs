//! Truncated p-adic integers.
//!
//! A [`PadicApprox`] is an element of `Z_p` known to `K` base-`p` digits, i.e. a
//! residue modulo `p^K`. Every operation reports the precision it can actually
//! guarantee; nothing is silently padded.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("digit {digit} at position {index} is outside [0, {p})")]
    DigitOutOfRange { index: usize, digit: u64, p: u32 },
    #[error("a p-adic approximation needs at least one digit")]
    EmptyDigits,
    #[error("precision {requested} exceeds available precision {available}")]
    Precision { requested: u32, available: u32 },
    #[error("residue does not fit below p^{precision}")]
    ResidueOutOfRange { precision: u32 },
    #[error("mismatched primes {0} and {1}")]
    MismatchedPrimes(u32, u32),
}

/// A validated prime, used as the alphabet size and the base of expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Self, PadicError> {
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(PadicError::NotPrime(p));
        }
        Ok(Prime(p as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_u64(self) -> u64 {
        self.0 as u64
    }

    /// `p^k` as a big integer.
    pub fn pow(self, k: u32) -> BigUint {
        BigUint::from(self.0).pow(k)
    }

    /// `p^k` if it fits in a `u64`.
    pub fn pow_u64(self, k: u32) -> Option<u64> {
        (self.0 as u64).checked_pow(k)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `ord_p` at finite precision. A residue that is zero modulo `p^K` only tells
/// us the valuation is at least `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Exact(u32),
    AtLeast(u32),
}

impl Valuation {
    /// Whether the value is certainly divisible by `p^required`.
    /// `None` when the precision cannot decide it.
    pub fn divisible_by(self, required: u32) -> Option<bool> {
        match self {
            Valuation::Exact(v) => Some(v >= required),
            Valuation::AtLeast(k) if required <= k => Some(true),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(k) => write!(f, ">={k}"),
        }
    }
}

/// `|x|_p`, either `p^-v` exactly or "at most `p^-K`" when the residue vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PNorm {
    Exact { exponent: u32 },
    ZeroAtPrecision { precision: u32 },
}

impl PNorm {
    pub fn from_valuation(v: Valuation) -> Self {
        match v {
            Valuation::Exact(exponent) => PNorm::Exact { exponent },
            Valuation::AtLeast(precision) => PNorm::ZeroAtPrecision { precision },
        }
    }
}

impl Ord for PNorm {
    fn cmp(&self, other: &Self) -> Ordering {
        use PNorm::*;
        match (self, other) {
            (Exact { exponent: a }, Exact { exponent: b }) => b.cmp(a),
            (ZeroAtPrecision { .. }, Exact { .. }) => Ordering::Less,
            (Exact { .. }, ZeroAtPrecision { .. }) => Ordering::Greater,
            (ZeroAtPrecision { precision: a }, ZeroAtPrecision { precision: b }) => b.cmp(a),
        }
    }
}

impl PartialOrd for PNorm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Exact { exponent: 0 } => write!(f, "1"),
            PNorm::Exact { exponent } => write!(f, "p^-{exponent}"),
            PNorm::ZeroAtPrecision { precision } => write!(f, "<=p^-{precision}"),
        }
    }
}

/// A p-adic integer known modulo `p^K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicApprox {
    p: Prime,
    precision: u32,
    residue: BigUint,
}

impl PadicApprox {
    /// Builds from a residue that must already lie in `[0, p^K)`.
    pub fn new(p: Prime, precision: u32, residue: BigUint) -> Result<Self, PadicError> {
        if precision == 0 {
            return Err(PadicError::EmptyDigits);
        }
        if residue >= p.pow(precision) {
            return Err(PadicError::ResidueOutOfRange { precision });
        }
        Ok(PadicApprox {
            p,
            precision,
            residue,
        })
    }

    /// Reduces an arbitrary integer (negative values wrap to their p-adic
    /// representative).
    pub fn from_integer(p: Prime, precision: u32, value: &BigInt) -> Result<Self, PadicError> {
        if precision == 0 {
            return Err(PadicError::EmptyDigits);
        }
        let modulus = BigInt::from(p.pow(precision));
        let residue = value.mod_floor(&modulus);
        Ok(PadicApprox {
            p,
            precision,
            residue: residue.to_biguint().expect("mod_floor is non-negative"),
        })
    }

    pub fn from_u64(p: Prime, precision: u32, value: u64) -> Result<Self, PadicError> {
        Self::from_integer(p, precision, &BigInt::from(value))
    }

    /// Canonical expansion `sum digits[i] p^i`, precision = number of digits.
    pub fn from_digits(digits: &[u64], p: Prime) -> Result<Self, PadicError> {
        if digits.is_empty() {
            return Err(PadicError::EmptyDigits);
        }
        let mut residue = BigUint::zero();
        for (index, &digit) in digits.iter().enumerate().rev() {
            if digit >= p.as_u64() {
                return Err(PadicError::DigitOutOfRange {
                    index,
                    digit,
                    p: p.get(),
                });
            }
            residue = residue * p.get() + digit;
        }
        Ok(PadicApprox {
            p,
            precision: digits.len() as u32,
            residue,
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn into_residue(self) -> BigUint {
        self.residue
    }

    /// The residue as a `u64`, if it fits.
    pub fn residue_u64(&self) -> Option<u64> {
        self.residue.to_u64()
    }

    /// `delta_i(x)`.
    pub fn digit(&self, i: u32) -> Result<u32, PadicError> {
        if i >= self.precision {
            return Err(PadicError::Precision {
                requested: i + 1,
                available: self.precision,
            });
        }
        let shifted = &self.residue / self.p.pow(i);
        Ok((shifted % self.p.get()).to_u32().expect("digit below p"))
    }

    /// All `K` digits, least significant first.
    pub fn digits(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.precision as usize);
        let mut rest = self.residue.clone();
        let p = BigUint::from(self.p.get());
        for _ in 0..self.precision {
            let (q, r) = rest.div_rem(&p);
            out.push(r.to_u32().expect("digit below p"));
            rest = q;
        }
        out
    }

    /// Reduction map modulo `p^k`.
    pub fn reduce(&self, k: u32) -> Result<Self, PadicError> {
        if k > self.precision {
            return Err(PadicError::Precision {
                requested: k,
                available: self.precision,
            });
        }
        if k == 0 {
            return Err(PadicError::EmptyDigits);
        }
        Ok(PadicApprox {
            p: self.p,
            precision: k,
            residue: &self.residue % self.p.pow(k),
        })
    }

    fn common(&self, other: &Self) -> Result<u32, PadicError> {
        if self.p != other.p {
            return Err(PadicError::MismatchedPrimes(self.p.get(), other.p.get()));
        }
        Ok(self.precision.min(other.precision))
    }

    fn with_reduced(&self, precision: u32, value: BigInt) -> Self {
        Self::from_integer(self.p, precision, &value).expect("precision is positive")
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        let k = self.common(other)?;
        Ok(self.with_reduced(k, BigInt::from(&self.residue + &other.residue)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        let k = self.common(other)?;
        let diff = BigInt::from(self.residue.clone()) - BigInt::from(other.residue.clone());
        Ok(self.with_reduced(k, diff))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        let k = self.common(other)?;
        Ok(self.with_reduced(k, BigInt::from(&self.residue * &other.residue)))
    }

    pub fn valuation(&self) -> Valuation {
        valuation_of(&self.residue, self.p, self.precision)
    }

    /// `d_p(x, y) = |x - y|_p` at the common precision.
    pub fn distance(&self, other: &Self) -> Result<PNorm, PadicError> {
        Ok(PNorm::from_valuation(self.sub(other)?.valuation()))
    }

    /// `sigma^n(x) = floor(x / p^n)`, known to `K - n` digits.
    pub fn sigma_shift(&self, n: u32) -> Result<Self, PadicError> {
        if n >= self.precision {
            return Err(PadicError::Precision {
                requested: n + 1,
                available: self.precision,
            });
        }
        Ok(PadicApprox {
            p: self.p,
            precision: self.precision - n,
            residue: &self.residue / self.p.pow(n),
        })
    }

    pub fn is_unit(&self) -> bool {
        !(&self.residue % self.p.get()).is_zero()
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.residue, self.p, self.precision)
    }
}

/// Valuation of a residue modulo `p^precision`.
pub fn valuation_of(residue: &BigUint, p: Prime, precision: u32) -> Valuation {
    if residue.is_zero() {
        return Valuation::AtLeast(precision);
    }
    let p_big = BigUint::from(p.get());
    let mut v = 0;
    let mut rest = residue.clone();
    loop {
        let (q, r) = rest.div_rem(&p_big);
        if !r.is_zero() {
            break;
        }
        v += 1;
        rest = q;
    }
    Valuation::Exact(v)
}

/// `v_p(n!)` by Legendre's formula.
pub fn factorial_valuation(n: u64, p: Prime) -> u32 {
    let p = p.as_u64();
    let mut total = 0u64;
    let mut q = n / p;
    while q > 0 {
        total += q;
        q /= p;
    }
    total as u32
}

/// Generalized binomial `C(x, m) = x(x-1)...(x-m+1)/m!` for any integer `x`.
///
/// Built as `C(x, i+1) = C(x, i) (x - i) / (i + 1)`; each division is exact.
pub fn binomial(x: &BigInt, m: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..m {
        acc *= x - BigInt::from(i);
        acc /= BigInt::from(i + 1);
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// Exact `C(x, m)` for a non-negative integer `x`; zero when `m > x`.
pub fn binomial_eval(x: &BigUint, m: u64) -> BigUint {
    let value = binomial(&BigInt::from(x.clone()), m);
    match value.sign() {
        Sign::Minus => unreachable!("binomial of a non-negative integer is non-negative"),
        _ => value.magnitude().clone(),
    }
}

/// `floor(log_base(m))` for `m >= 1`, by repeated multiplication.
pub fn floor_log(base: &BigUint, m: u64) -> u32 {
    assert!(m >= 1, "floor_log of zero");
    let target = BigUint::from(m);
    let mut power = base.clone();
    let mut k = 0;
    while power <= target {
        power *= base;
        k += 1;
    }
    k
}
