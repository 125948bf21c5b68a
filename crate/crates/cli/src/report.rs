//! The analysis report and its two renderings.
//!
//! JSON keys are fixed: `config`, `coefficients`, `verdicts`, `census`,
//! `cycles`, `plotset`, `timing`. Sections a command does not compute stay
//! empty. Everything except `timing` is a function of the configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use padyn_core::dynamics::{
    injectivity_witness, BoxCount, CensusVerdict, CycleReport, PlotSet, PreimageCensus,
};
use padyn_core::mahler::{Check, CheckOutcome, MahlerCoeffs, Verdict};
use padyn_core::padic::Valuation;
use serde::Serialize;

/// Cycles are listed member by member only below this many members.
const CYCLE_LISTING_LIMIT: u64 = 256;

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub p: u32,
    pub map: String,
    pub parsed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    pub strict_m1: bool,
    pub lookahead: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationJson {
    Exact(u32),
    AtLeast(u32),
}

impl From<Valuation> for ValuationJson {
    fn from(v: Valuation) -> Self {
        match v {
            Valuation::Exact(e) => ValuationJson::Exact(e),
            Valuation::AtLeast(k) => ValuationJson::AtLeast(k),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub m: u64,
    pub residue: String,
    pub signed: String,
    pub valuation: ValuationJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictJson {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<ValuationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required: Option<u32>,
    pub scope: &'static str,
    pub definitive: bool,
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precondition: Option<String>,
    pub summary: String,
}

impl From<&CheckOutcome> for VerdictJson {
    fn from(o: &CheckOutcome) -> Self {
        let mut v = VerdictJson {
            kind: "",
            bound: None,
            total: None,
            m: None,
            condition: None,
            observed: None,
            required: None,
            scope: o.scope.key(),
            definitive: o.is_definitive_violation(),
            note: o.note().to_string(),
            precondition: None,
            summary: o.verdict.to_string(),
        };
        match &o.verdict {
            Verdict::SatisfiedUpTo { bound, total } => {
                v.kind = "satisfied_up_to";
                v.bound = Some(*bound);
                v.total = Some(*total);
            }
            Verdict::ViolatedAt {
                m,
                condition,
                observed,
            } => {
                v.kind = "violated_at";
                v.m = Some(*m);
                v.condition = Some(condition.clone());
                v.observed = Some((*observed).into());
            }
            Verdict::UndecidableAt { m, required } => {
                v.kind = "undecidable_at";
                v.m = Some(*m);
                v.required = Some(*required);
            }
        }
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Deviation {
    pub point: u64,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusRow {
    pub n: u32,
    pub k: u32,
    pub uniform: bool,
    pub expected: u64,
    /// Preimage count -> number of points with that count.
    pub histogram: BTreeMap<u64, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_deviation: Option<Deviation>,
}

impl CensusRow {
    pub fn new(c: &PreimageCensus, expected: u64) -> Self {
        let first_deviation = match c.verdict {
            CensusVerdict::Uniform(_) => None,
            CensusVerdict::NonUniform { point, count, .. } => Some(Deviation { point, count }),
        };
        CensusRow {
            n: c.n,
            k: c.k,
            uniform: c.is_uniform(),
            expected,
            histogram: c.histogram.clone(),
            first_deviation,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleRow {
    /// Digits: the table is `f mod p^m` on `Z/p^m`.
    pub m: u32,
    pub cycle_count: usize,
    pub unique_cycle: bool,
    /// Cycle length -> number of cycles with that length.
    pub cycle_lengths: BTreeMap<u64, u64>,
    pub tail_nodes: u64,
    pub max_tail: usize,
    pub injective: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision: Option<[u64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles: Option<Vec<Vec<u64>>>,
}

impl CycleRow {
    pub fn new(m: u32, table: &[u64], r: &CycleReport) -> Self {
        let mut cycle_lengths = BTreeMap::new();
        for len in r.cycle_lengths() {
            *cycle_lengths.entry(len).or_insert(0) += 1;
        }
        let members: u64 = r.cycle_lengths().iter().sum();
        let collision = injectivity_witness(table).map(|(a, b)| [a, b]);
        CycleRow {
            m,
            cycle_count: r.cycles.len(),
            unique_cycle: r.is_unique_cycle(),
            cycle_lengths,
            tail_nodes: r.tail_nodes(),
            max_tail: r.tail_histogram.len().saturating_sub(1),
            injective: collision.is_none(),
            collision,
            cycles: (members <= CYCLE_LISTING_LIMIT).then(|| r.cycles.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub grid: u32,
    pub covered: u64,
    pub cells: u64,
    pub fraction: f64,
}

impl From<&BoxCount> for GridRow {
    fn from(b: &BoxCount) -> Self {
        GridRow {
            grid: b.grid,
            covered: b.covered,
            cells: b.cells,
            fraction: b.fraction,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlotRow {
    pub n: u32,
    pub k_min: u32,
    pub k_max: u32,
    pub points: usize,
    pub grids: Vec<GridRow>,
}

impl PlotRow {
    pub fn new(set: &PlotSet, counts: &[BoxCount]) -> Self {
        PlotRow {
            n: set.n,
            k_min: set.k_min,
            k_max: set.k_max,
            points: set.len(),
            grids: counts.iter().map(GridRow::from).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub total_ms: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub coefficients: Vec<CoefficientRow>,
    pub verdicts: BTreeMap<String, VerdictJson>,
    pub census: Vec<CensusRow>,
    pub cycles: Vec<CycleRow>,
    pub plotset: Option<PlotRow>,
    pub timing: Timing,
}

impl Report {
    pub fn set_coefficients(&mut self, c: &MahlerCoeffs) {
        self.coefficients = (0..=c.max_index())
            .map(|m| CoefficientRow {
                m,
                residue: c.residue(m).to_string(),
                signed: c.signed(m).to_string(),
                valuation: c.valuation(m).into(),
            })
            .collect();
    }

    /// Records a verdict. The 1-Lipschitz criteria say nothing about maps
    /// outside that class, so for a map with positive lookahead their
    /// violations are never reported as definitive.
    pub fn add_verdict(&mut self, o: &CheckOutcome, lookahead: u32) {
        let mut v = VerdictJson::from(o);
        if matches!(o.check, Check::LipschitzMp | Check::LipschitzErgodic) && lookahead > 0 {
            v.definitive = false;
            v.note = "stated for 1-Lipschitz maps only: no conclusion for this map".to_string();
            v.precondition = Some(format!("lookahead {lookahead}: not certified 1-Lipschitz"));
        }
        self.verdicts.insert(o.check.key().to_string(), v);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable rendering of the sections that were computed.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "map: {}  (parsed as {})", c.map, c.parsed);
        let _ = write!(out, "p = {}, lookahead = {}", c.p, c.lookahead);
        if let Some(k) = c.precision {
            let _ = write!(out, ", K = {k}");
        }
        if let Some(n) = c.n {
            let _ = write!(out, ", n = {n}");
        }
        out.push('\n');

        if !self.coefficients.is_empty() {
            out.push_str("\nMahler coefficients (balanced residues, valuation):\n");
            let last_nonzero = self.coefficients.iter().rposition(|r| r.signed != "0").unwrap_or(0);
            let shown = if self.coefficients.len() - last_nonzero > 4 {
                last_nonzero + 2
            } else {
                self.coefficients.len()
            };
            for row in &self.coefficients[..shown] {
                let v = match row.valuation {
                    ValuationJson::Exact(e) => e.to_string(),
                    ValuationJson::AtLeast(k) => format!(">={k}"),
                };
                let _ = writeln!(out, "  a_{:<4} = {:>24}   v = {v}", row.m, row.signed);
            }
            if shown < self.coefficients.len() {
                let (from, to) = (self.coefficients[shown].m, self.coefficients.len() - 1);
                let _ = writeln!(out, "  a_{from} .. a_{to} are all 0 modulo p^K");
            }
        }

        if !self.verdicts.is_empty() {
            out.push_str("\nCriteria:\n");
            for (key, v) in &self.verdicts {
                let _ = writeln!(out, "  {key:<18} {}", v.summary);
                let _ = writeln!(out, "  {:<18} [{}] {}", "", v.scope, v.note);
                if let Some(pre) = &v.precondition {
                    let _ = writeln!(out, "  {:<18} note: {pre}", "");
                }
            }
        }

        if !self.census.is_empty() {
            out.push_str("\nPreimage census of f_k : Z/p^(nk) -> Z/p^(n(k-1)):\n");
            for row in &self.census {
                let hist: Vec<String> = row.histogram.iter().map(|(c, n)| format!("{c}:{n}")).collect();
                let verdict = if row.uniform {
                    format!("Uniform({})", row.expected)
                } else {
                    let d = row.first_deviation.as_ref().expect("non-uniform rows carry a witness");
                    format!("NonUniform (point {} has {} preimages, expected {})", d.point, d.count, row.expected)
                };
                let _ = writeln!(out, "  k = {:<3} {verdict}   counts {{{}}}", row.k, hist.join(", "));
            }
        }

        if !self.cycles.is_empty() {
            out.push_str("\nCycles of f mod p^m (zero-padded lift; a unique cycle at every m is sufficient for ergodicity):\n");
            for row in &self.cycles {
                let lens: Vec<String> = row.cycle_lengths.iter().map(|(l, n)| format!("{l}x{n}")).collect();
                let head = if row.unique_cycle {
                    "UniqueCycle".to_string()
                } else {
                    format!("{} cycles", row.cycle_count)
                };
                let _ = write!(out, "  m = {:<3} {head}   lengths {{{}}}   tails {}", row.m, lens.join(", "), row.tail_nodes);
                if let Some([a, b]) = row.collision {
                    let _ = write!(out, "   not injective: f({a}) = f({b})");
                }
                out.push('\n');
                if let Some(cycles) = &row.cycles {
                    let members: usize = cycles.iter().map(Vec::len).sum();
                    if cycles.len() > 1 && cycles.len() <= 8 && members <= 32 {
                        let listed: Vec<String> = cycles
                            .iter()
                            .map(|c| {
                                let v: Vec<String> = c.iter().map(u64::to_string).collect();
                                format!("{{{}}}", v.join(","))
                            })
                            .collect();
                        let _ = writeln!(out, "          {}", listed.join(" "));
                    }
                }
            }
        }

        if let Some(plot) = &self.plotset {
            let _ = writeln!(
                out,
                "\nPlot set E_{}..E_{} (n = {}): {} distinct points",
                plot.k_min, plot.k_max, plot.n, plot.points
            );
            for g in &plot.grids {
                let _ = writeln!(
                    out,
                    "  G = {:<5} covered {:>7} / {:<8} fraction {:.6}",
                    g.grid, g.covered, g.cells, g.fraction
                );
            }
        }
        out
    }
}
