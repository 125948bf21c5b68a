use std::collections::BTreeMap;

use rayon::prelude::*;

use super::DynamicsError;
use crate::dsl::{domain_size, Evaluator, MapExpr};
use crate::padic::Prime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelForm {
    /// `f_k : Z/p^(nk) -> Z/p^(n(k-1))`.
    Census { n: u32, k: u32 },
    /// `f mod p^m : Z/p^m -> Z/p^m` at the zero-padded lift.
    Endomap { digits: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedLevelMap {
    pub p: Prime,
    pub form: LevelForm,
    pub table: Vec<u64>,
    pub codomain: u64,
}

fn build_table(
    e: &MapExpr,
    p: Prime,
    domain_digits: u32,
    k_out: u32,
    budget: u64,
) -> Result<Vec<u64>, DynamicsError> {
    let ev = Evaluator::new(e, p)?;
    let size = domain_size(p, domain_digits, budget)?;
    let k_in = domain_digits.max(k_out) + ev.lookahead();
    Ok((0..size)
        .into_par_iter()
        .map(|i| ev.eval_u64(i, k_in, k_out))
        .collect::<Result<Vec<_>, _>>()?)
}

/// `table[i] = f(i) mod p^(n(k-1))` for `i` in `Z/p^(nk)`.
pub fn level_map(e: &MapExpr, p: Prime, n: u32, k: u32, budget: u64) -> Result<ReducedLevelMap, DynamicsError> {
    if n == 0 {
        return Err(DynamicsError::ZeroLevel);
    }
    if k < 2 {
        return Err(DynamicsError::CensusLevel(k));
    }
    let table = build_table(e, p, n * k, n * (k - 1), budget)?;
    Ok(ReducedLevelMap {
        p,
        form: LevelForm::Census { n, k },
        table,
        codomain: p.pow_u64(n * (k - 1)).expect("below the domain size"),
    })
}

/// `table[i] = f(i) mod p^m` for `i` in `Z/p^m`.
pub fn padded_endomap(e: &MapExpr, p: Prime, digits: u32, budget: u64) -> Result<ReducedLevelMap, DynamicsError> {
    let table = build_table(e, p, digits, digits, budget)?;
    Ok(ReducedLevelMap {
        p,
        form: LevelForm::Endomap { digits },
        codomain: table.len() as u64,
        table,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CensusVerdict {
    /// Every point of the codomain has exactly this many preimages.
    Uniform(u64),
    NonUniform { point: u64, count: u64, expected: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageCensus {
    pub n: u32,
    pub k: u32,
    /// `counts[y] = #f_k^{-1}(y)`.
    pub counts: Vec<u64>,
    /// Preimage count -> number of codomain points with that count.
    pub histogram: BTreeMap<u64, u64>,
    pub verdict: CensusVerdict,
}

impl PreimageCensus {
    pub fn is_uniform(&self) -> bool {
        matches!(self.verdict, CensusVerdict::Uniform(_))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts preimages of every point; uniform with `p^n` each is the
/// measure-preservation criterion at level `k`.
pub fn preimage_census(map: &ReducedLevelMap) -> Result<PreimageCensus, DynamicsError> {
    let LevelForm::Census { n, k } = map.form else {
        return Err(DynamicsError::NotCensusForm);
    };
    let mut counts = vec![0u64; map.codomain as usize];
    for &y in &map.table {
        counts[y as usize] += 1;
    }
    let mut histogram = BTreeMap::new();
    for &c in &counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    let expected = map.p.pow_u64(n).expect("below the domain size");
    let verdict = match counts.iter().position(|&c| c != expected) {
        None => CensusVerdict::Uniform(expected),
        Some(point) => CensusVerdict::NonUniform {
            point: point as u64,
            count: counts[point],
            expected,
        },
    };
    Ok(PreimageCensus {
        n,
        k,
        counts,
        histogram,
        verdict,
    })
}

/// First pair `x < y` with the same image, if the table is not injective.
pub fn injectivity_witness(table: &[u64]) -> Option<(u64, u64)> {
    let mut first = BTreeMap::new();
    for (x, &y) in table.iter().enumerate() {
        if let Some(&earlier) = first.get(&y) {
            return Some((earlier, x as u64));
        }
        first.insert(y, x as u64);
    }
    None
}
