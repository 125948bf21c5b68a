use std::collections::HashMap;

use num_bigint::BigUint;

use super::DynamicsError;
use crate::dsl::{Evaluator, MapExpr};
use crate::padic::Prime;

/// Functional-graph decomposition of an endomap table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReport {
    /// Each cycle starts at its smallest member; cycles sorted by that member.
    pub cycles: Vec<Vec<u64>>,
    /// `tail_histogram[d]` = number of nodes at distance `d` from their cycle.
    pub tail_histogram: Vec<u64>,
}

impl CycleReport {
    pub fn is_unique_cycle(&self) -> bool {
        self.cycles.len() == 1
    }

    pub fn cycle_lengths(&self) -> Vec<u64> {
        self.cycles.iter().map(|c| c.len() as u64).collect()
    }

    pub fn tail_nodes(&self) -> u64 {
        self.tail_histogram.iter().skip(1).sum()
    }
}

/// Walks every node once; each walk stops at a node seen before, either on
/// the current path (a new cycle) or settled earlier.
pub fn cycle_report(table: &[u64]) -> CycleReport {
    const UNSEEN: u64 = u64::MAX;
    let len = table.len();
    // distance to the cycle once settled
    let mut depth = vec![UNSEEN; len];
    // position on the walk currently in progress
    let mut on_path: Vec<u64> = vec![UNSEEN; len];
    let mut cycles = Vec::new();
    let mut path = Vec::new();

    for start in 0..len {
        if depth[start] != UNSEEN {
            continue;
        }
        path.clear();
        let mut node = start;
        while depth[node] == UNSEEN && on_path[node] == UNSEEN {
            on_path[node] = path.len() as u64;
            path.push(node);
            node = table[node] as usize;
        }
        let mut settled = path.len();
        if depth[node] == UNSEEN {
            // closed a new cycle at `node`
            let from = on_path[node] as usize;
            let mut cycle: Vec<u64> = path[from..].iter().map(|&v| v as u64).collect();
            for &v in &path[from..] {
                depth[v] = 0;
            }
            let min_at = cycle
                .iter()
                .enumerate()
                .min_by_key(|(_, v)| **v)
                .map(|(i, _)| i)
                .unwrap_or(0);
            cycle.rotate_left(min_at);
            cycles.push(cycle);
            settled = from;
        }
        for &v in path[..settled].iter().rev() {
            depth[v] = depth[table[v] as usize] + 1;
        }
        for &v in &path {
            on_path[v] = UNSEEN;
        }
    }

    cycles.sort_by_key(|c| c[0]);
    let deepest = depth.iter().copied().max().unwrap_or(0);
    let mut tail_histogram = vec![0u64; if len == 0 { 0 } else { deepest as usize + 1 }];
    for d in depth {
        tail_histogram[d as usize] += 1;
    }
    CycleReport {
        cycles,
        tail_histogram,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub points: Vec<BigUint>,
    /// `(first index on the cycle, cycle length)` once a point repeats.
    pub cycle: Option<(usize, usize)>,
}

/// Iterates the padded endomap `f mod p^m` from `x0` for `steps` steps.
pub fn orbit(e: &MapExpr, p: Prime, x0: &BigUint, steps: usize, digits: u32) -> Result<Orbit, DynamicsError> {
    let ev = Evaluator::new(e, p)?;
    if x0 >= &p.pow(digits) {
        return Err(DynamicsError::StartOutOfRange(x0.to_string(), digits));
    }
    let k_in = digits + ev.lookahead();
    let mut seen = HashMap::new();
    let mut points = vec![x0.clone()];
    let mut cycle = None;
    seen.insert(x0.clone(), 0usize);
    for i in 1..=steps {
        let next = ev.eval_residue(&points[i - 1], k_in, digits)?;
        if cycle.is_none() {
            if let Some(&first) = seen.get(&next) {
                cycle = Some((first, i - first));
            } else {
                seen.insert(next.clone(), i);
            }
        }
        points.push(next);
    }
    Ok(Orbit { points, cycle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_map;

    #[test]
    fn cycle_examples() {
        let r = cycle_report(&[1, 2, 3, 0]);
        assert_eq!(r.cycles, vec![vec![0, 1, 2, 3]]);
        assert!(r.is_unique_cycle());
        let r = cycle_report(&[0, 0, 1, 3]);
        assert_eq!(r.cycles, vec![vec![0], vec![3]]);
        assert_eq!(r.tail_histogram, vec![2, 1, 1]);
        let r = cycle_report(&[0, 0, 1, 1]);
        assert_eq!(r.cycles, vec![vec![0]]);
        assert_eq!(r.tail_nodes(), 3);
    }

    #[test]
    fn cycles_start_at_smallest_member() {
        let r = cycle_report(&[3, 0, 2, 1]);
        assert_eq!(r.cycles, vec![vec![0, 3, 1], vec![2]]);
    }

    #[test]
    fn orbit_examples() {
        let two = Prime::new(2).unwrap();
        let big = |v: &[u64]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        let o = orbit(&parse_map("x+1").unwrap(), two, &BigUint::from(0u32), 4, 3).unwrap();
        assert_eq!(o.points, big(&[0, 1, 2, 3, 4]));
        assert_eq!(o.cycle, None);
        let o = orbit(&parse_map("C(x,2)").unwrap(), two, &BigUint::from(3u32), 3, 3).unwrap();
        assert_eq!(o.points, big(&[3, 3, 3, 3]));
        assert_eq!(o.cycle, Some((0, 1)));
        let o = orbit(&parse_map("sigma(x)").unwrap(), two, &BigUint::from(5u32), 4, 3).unwrap();
        assert_eq!(o.points, big(&[5, 2, 1, 0, 0]));
        assert_eq!(o.cycle, Some((3, 1)));
        assert!(matches!(
            orbit(&parse_map("x").unwrap(), two, &BigUint::from(8u32), 1, 3),
            Err(DynamicsError::StartOutOfRange(..))
        ));
    }
}
