use num_bigint::BigUint;

use super::eval::{domain_size, Evaluator};
use super::{DslError, MapExpr};
use crate::padic::{PadicApprox, Prime};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompositionOutcome {
    Verified,
    /// `t` and `t_other` agree modulo `p^level` but `G_z` separates them.
    NotLipschitz {
        z: u64,
        t: u64,
        t_other: u64,
        level: u32,
    },
    /// `G_z(t) + T(z)` differs from a fresh evaluation of `f` at `x`.
    RecombinationMismatch { x: u64 },
}

/// `f(x) = G_z(t) + T(z)` with `z = x mod p^n` and `t = (x - z) / p^n`,
/// normalized so that `T(z) = f(z)` at the zero-padded lift of `z`.
#[derive(Debug, Clone)]
pub struct ComplexShiftDecomposition {
    pub p: Prime,
    pub n: u32,
    pub depth: u32,
    pub lookahead: u32,
    /// `T(z) mod p^depth` for `z` in `Z/p^n`.
    pub step: Vec<u64>,
    /// `G_z(t) mod p^depth` for `t` in `Z/p^depth`, one row per `z`.
    pub g: Vec<Vec<u64>>,
    pub log: Vec<String>,
    pub outcome: DecompositionOutcome,
    expr: MapExpr,
}

impl ComplexShiftDecomposition {
    pub fn is_verified(&self) -> bool {
        self.outcome == DecompositionOutcome::Verified
    }

    /// Evaluates `G_z(t)` directly from the map rather than the table.
    pub fn g_value(&self, z: u64, t: &PadicApprox) -> Result<PadicApprox, DslError> {
        let ev = Evaluator::new(&self.expr, self.p)?;
        let shift = self.p.pow(self.n);
        let k_in = t.precision() + self.n;
        let x = BigUint::from(z) + t.residue() * &shift;
        let k_out = ev.output_precision(k_in)?.min(self.depth);
        let fx = ev.eval_residue(&x, k_in, k_out)?;
        let fx = PadicApprox::new(self.p, k_out, fx)?;
        let tz = PadicApprox::from_u64(self.p, k_out, self.step[z as usize])?;
        Ok(fx.sub(&tz)?)
    }
}

/// Splits `f` at level `n` and checks the split exhaustively for `t` modulo
/// `p^depth`: every `G_z` must be 1-Lipschitz and recombine to `f`.
pub fn decompose_complex_shift(
    e: &MapExpr,
    p: Prime,
    n: u32,
    depth: u32,
    budget: u64,
) -> Result<ComplexShiftDecomposition, DslError> {
    if n == 0 {
        return Err(DslError::ZeroLevel);
    }
    let ev = Evaluator::new(e, p)?;
    let lookahead = ev.lookahead();
    let k_in = n + depth + lookahead;
    let domain = domain_size(p, n + depth, budget)?;
    let cosets = p.pow_u64(n).expect("below the domain size");
    let width = p.pow_u64(depth).expect("below the domain size");
    let modulus = width;

    let f = |x: u64| ev.eval_u64(x, k_in, depth);
    let step = (0..cosets).map(f).collect::<Result<Vec<_>, _>>()?;
    let mut g = vec![Vec::with_capacity(width as usize); cosets as usize];
    for (z, row) in g.iter_mut().enumerate() {
        for t in 0..width {
            let fx = f(z as u64 + cosets * t)?;
            row.push((fx + modulus - step[z]) % modulus);
        }
    }

    let mut log = vec![format!(
        "p = {p}, n = {n}, depth = {depth}, lookahead = {lookahead}, {domain} inputs"
    )];
    let mut outcome = DecompositionOutcome::Verified;

    'lipschitz: for (z, row) in g.iter().enumerate() {
        let mut level_mod = 1u64;
        for level in 1..=depth {
            level_mod *= p.as_u64();
            for t in 0..width {
                let t_other = t % level_mod;
                if row[t as usize] % level_mod != row[t_other as usize] % level_mod {
                    outcome = DecompositionOutcome::NotLipschitz {
                        z: z as u64,
                        t,
                        t_other,
                        level,
                    };
                    break 'lipschitz;
                }
            }
        }
    }
    match &outcome {
        DecompositionOutcome::Verified => {
            log.push(format!("G_z is 1-Lipschitz modulo p^{depth} for all {cosets} cosets"))
        }
        DecompositionOutcome::NotLipschitz {
            z,
            t,
            t_other,
            level,
        } => log.push(format!(
            "G_{z} is not 1-Lipschitz: t = {t} and t' = {t_other} agree mod p^{level} but G_{z}(t) = {} and G_{z}(t') = {} do not",
            g[*z as usize][*t as usize], g[*z as usize][*t_other as usize]
        )),
        DecompositionOutcome::RecombinationMismatch { .. } => unreachable!(),
    }

    for x in 0..domain {
        let (z, t) = (x % cosets, x / cosets);
        let direct = ev.eval_residue(&BigUint::from(x), k_in, depth)?;
        let rebuilt = (g[z as usize][t as usize] + step[z as usize]) % modulus;
        if BigUint::from(rebuilt) != direct {
            log.push(format!("recombination fails at x = {x}"));
            if outcome == DecompositionOutcome::Verified {
                outcome = DecompositionOutcome::RecombinationMismatch { x };
            }
            break;
        }
    }
    if !matches!(outcome, DecompositionOutcome::RecombinationMismatch { .. }) {
        log.push(format!("G_z(t) + T(z) = f(x) for all {domain} inputs"));
    }

    Ok(ComplexShiftDecomposition {
        p,
        n,
        depth,
        lookahead,
        step,
        g,
        log,
        outcome,
        expr: e.clone(),
    })
}
