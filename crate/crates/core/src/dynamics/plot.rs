use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_rational::Ratio;
use rayon::prelude::*;

use super::DynamicsError;
use crate::dsl::{domain_size, Evaluator, MapExpr};
use crate::padic::Prime;

/// A point of the unit square with exact rational coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlotPoint {
    pub x: Ratio<u64>,
    pub y: Ratio<u64>,
}

/// Union of the level sets `E_k(f)` for `k` in `k_min..=k_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotSet {
    pub p: Prime,
    pub n: u32,
    pub k_min: u32,
    pub k_max: u32,
    pub points: BTreeSet<PlotPoint>,
}

/// `E_k(f)`: the points `(x / p^(n+k), (f(x) mod p^k) / p^k)` for every
/// residue `x` modulo `p^(n+k)`.
pub fn plot_points(e: &MapExpr, p: Prime, n: u32, k: u32, budget: u64) -> Result<PlotSet, DynamicsError> {
    let ev = Evaluator::new(e, p)?;
    let digits = n + k;
    let size = domain_size(p, digits, budget)?;
    let k_in = digits.max(k + ev.lookahead());
    let y_den = p.pow_u64(k).expect("below the domain size");
    let ys = (0..size)
        .into_par_iter()
        .map(|x| ev.eval_u64(x, k_in, k))
        .collect::<Result<Vec<_>, _>>()?;
    let points = ys
        .into_iter()
        .enumerate()
        .map(|(x, y)| PlotPoint {
            x: Ratio::new(x as u64, size),
            y: Ratio::new(y, y_den),
        })
        .collect();
    Ok(PlotSet {
        p,
        n,
        k_min: k,
        k_max: k,
        points,
    })
}

impl PlotSet {
    /// `E_1(f) ∪ ... ∪ E_kmax(f)`.
    pub fn accumulate(e: &MapExpr, p: Prime, n: u32, k_max: u32, budget: u64) -> Result<Self, DynamicsError> {
        let mut set = PlotSet {
            p,
            n,
            k_min: 1,
            k_max: 0,
            points: BTreeSet::new(),
        };
        for k in 1..=k_max {
            set.points.extend(plot_points(e, p, n, k, budget)?.points);
            set.k_max = k;
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `xnum,xden,ynum,yden` line per point, in sorted order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xnum,xden,ynum,yden\n");
        for pt in &self.points {
            let _ = writeln!(out, "{},{},{},{}", pt.x.numer(), pt.x.denom(), pt.y.numer(), pt.y.denom());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCount {
    pub grid: u32,
    pub covered: u64,
    pub cells: u64,
    pub fraction: f64,
    /// Row-major, row 0 at the top (`y` near 1).
    pub raster: Vec<bool>,
}

fn cell(r: &Ratio<u64>, grid: u32) -> usize {
    (*r.numer() as u128 * grid as u128 / *r.denom() as u128) as usize
}

/// Covers the unit square with a `grid x grid` mesh of half-open cells and
/// counts the cells containing at least one point.
pub fn box_count<'a, I>(points: I, grid: u32) -> Result<BoxCount, DynamicsError>
where
    I: IntoIterator<Item = &'a PlotPoint>,
{
    if grid == 0 {
        return Err(DynamicsError::ZeroGrid);
    }
    let g = grid as usize;
    let mut raster = vec![false; g * g];
    for pt in points {
        let (i, j) = (cell(&pt.x, grid), cell(&pt.y, grid));
        raster[(g - 1 - j) * g + i] = true;
    }
    let covered = raster.iter().filter(|&&c| c).count() as u64;
    let cells = (g * g) as u64;
    Ok(BoxCount {
        grid,
        covered,
        cells,
        fraction: covered as f64 / cells as f64,
        raster,
    })
}

impl BoxCount {
    /// Plain PGM with maximum value 1.
    pub fn to_pgm(&self) -> String {
        let g = self.grid as usize;
        let mut out = format!("P2\n{g} {g}\n1\n");
        for row in self.raster.chunks(g) {
            let line: Vec<&str> = row.iter().map(|&c| if c { "1" } else { "0" }).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}
