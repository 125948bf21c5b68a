use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use clap::Parser;
use num_bigint::BigUint;
use padyn_core::dsl::{parse_map, AutoRef, DslError, Evaluator, MapExpr, DEFAULT_BUDGET};
use padyn_core::dynamics::{
    box_count, cycle_report, level_map, orbit, padded_endomap, preimage_census, BoxCount,
    DynamicsError, PlotSet,
};
use padyn_core::mahler::{
    check_bernoulli_properties, check_complex_shift_bound, check_cs_ergodic, check_cs_mp,
    check_lipschitz_ergodic, check_lipschitz_mp, mahler_coeffs, CheckOutcome, MahlerCoeffs,
    MahlerError,
};
use padyn_core::padic::{PadicApprox, PadicError, Prime};
use padyn_core::transducer::{parse_automaton, Automaton, AutomatonError, Nondegeneracy};

use crate::cli::*;
use crate::report::{CensusRow, ConfigEcho, CycleRow, PlotRow, Report};

/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when an enumeration budget or the precision runs out.
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Budget(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Budget(_) => EXIT_BUDGET,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<DslError> for Failure {
    fn from(e: DslError) -> Self {
        match e {
            DslError::BudgetExceeded { .. } | DslError::PrecisionExhausted { .. } => {
                Failure::Budget(e.to_string())
            }
            DslError::Padic(inner) => inner.into(),
            DslError::Automaton(inner) => inner.into(),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<MahlerError> for Failure {
    fn from(e: MahlerError) -> Self {
        match e {
            MahlerError::Dsl(inner) => inner.into(),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Dsl(inner) => inner.into(),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<AutomatonError> for Failure {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::PrecisionExhausted { .. } => Failure::Budget(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<PadicError> for Failure {
    fn from(e: PadicError) -> Self {
        match e {
            PadicError::Precision { .. } => Failure::Budget(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

/// Parses `argv`, runs the command, prints to stdout and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

/// Runs a parsed command and returns its text output.
pub fn execute(command: Command) -> Result<String, Failure> {
    let started = Instant::now();
    match command {
        Command::Analyze(a) => {
            let mut r = analyze(&a)?;
            r.timing.total_ms = elapsed_ms(started);
            finish(&r, a.out.json.as_deref())
        }
        Command::Mahler(a) => {
            let map = LoadedMap::load(&a.common)?;
            positive("K", a.k as u64)?;
            positive("mmax", a.mmax)?;
            let mut r = map.report("mahler");
            r.config.precision = Some(a.k);
            r.config.m_max = Some(a.mmax);
            r.set_coefficients(&mahler_coeffs(&map.expr, map.p, a.mmax, a.k)?);
            r.timing.total_ms = elapsed_ms(started);
            finish(&r, a.json.as_deref())
        }
        Command::Check(a) => {
            let map = LoadedMap::load(&a.common)?;
            positive("K", a.k as u64)?;
            positive("mmax", a.mmax)?;
            positive("n", a.n as u64)?;
            let mut r = map.report(&format!("check {}", criterion_name(a.criterion)));
            r.config.precision = Some(a.k);
            r.config.m_max = Some(a.mmax);
            r.config.n = Some(a.n);
            r.config.strict_m1 = a.strict_m1;
            let c = mahler_coeffs(&map.expr, map.p, a.mmax, a.k)?;
            r.add_verdict(&run_criterion(a.criterion, &c, a.n, a.strict_m1)?, r.config.lookahead);
            r.timing.total_ms = elapsed_ms(started);
            finish(&r, a.json.as_deref())
        }
        Command::Preimages(a) => {
            let map = LoadedMap::load(&a.common)?;
            positive("n", a.n as u64)?;
            let budget = budget(&a.budget);
            let mut r = map.report("preimages");
            r.config.n = Some(a.n);
            r.config.k_max = Some(a.kmax);
            r.config.budget = Some(budget);
            r.census = census(&map, a.n, a.kmax, budget)?;
            r.timing.total_ms = elapsed_ms(started);
            finish(&r, a.json.as_deref())
        }
        Command::Cycles(a) => {
            let map = LoadedMap::load(&a.common)?;
            positive("kmax", a.kmax as u64)?;
            let budget = budget(&a.budget);
            let mut r = map.report("cycles");
            r.config.k_max = Some(a.kmax);
            r.config.budget = Some(budget);
            r.cycles = cycles(&map, 1, a.kmax, budget)?;
            r.timing.total_ms = elapsed_ms(started);
            finish(&r, a.json.as_deref())
        }
        Command::Plotset(a) => {
            let map = LoadedMap::load(&a.common)?;
            positive("n", a.n as u64)?;
            positive("kmax", a.kmax as u64)?;
            let budget = budget(&a.budget);
            let mut r = map.report("plotset");
            r.config.n = Some(a.n);
            r.config.k_max = Some(a.kmax);
            r.config.grid = a.grid.clone();
            r.config.budget = Some(budget);
            plot(&mut r, &map, a.n, a.kmax, &a.grid, budget, &a.out)?;
            r.timing.total_ms = elapsed_ms(started);
            finish(&r, a.out.json.as_deref())
        }
        Command::Orbit(a) => orbit_text(&a),
        Command::Automaton(AutomatonCommand::Run(a)) => automaton_run(&a),
        Command::Automaton(AutomatonCommand::Check(a)) => automaton_check(&a),
    }
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1000.0
}

fn finish(r: &Report, json: Option<&Path>) -> Result<String, Failure> {
    if let Some(path) = json {
        write_file(path, &r.to_json())?;
    }
    Ok(r.to_text())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn positive(name: &str, value: u64) -> Result<(), Failure> {
    if value == 0 {
        return Err(Failure::Config(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn budget(b: &Budget) -> u64 {
    b.budget.unwrap_or(DEFAULT_BUDGET)
}

fn prime(p: u64) -> Result<Prime, Failure> {
    Prime::new(p).map_err(|_| Failure::Config(format!("p must be prime (got {p})")))
}

fn load_automaton(path: &Path) -> Result<Automaton, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_automaton(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// A parsed map together with its prime.
pub struct LoadedMap {
    pub p: Prime,
    pub expr: MapExpr,
    pub text: String,
    pub file: Option<String>,
}

impl LoadedMap {
    pub fn load(c: &Common) -> Result<Self, Failure> {
        if let Some(path) = &c.source.file {
            let automaton = load_automaton(path)?;
            let p = match c.p {
                Some(p) if prime(p)? != automaton.prime() => {
                    return Err(Failure::Config(format!(
                        "--p {p} does not match the automaton's prime {}",
                        automaton.prime()
                    )))
                }
                _ => automaton.prime(),
            };
            let shown = path.display().to_string();
            let lookahead = automaton.lookahead()?.ok_or_else(|| {
                Failure::Config(DslError::UnboundedLookahead { path: shown.clone() }.to_string())
            })?;
            let r = AutoRef {
                path: shown.clone(),
                automaton: Arc::new(automaton),
                lookahead,
            };
            return Ok(LoadedMap {
                p,
                expr: MapExpr::Auto(r, Box::new(MapExpr::Var)),
                text: format!("auto(\"{shown}\")(x)"),
                file: Some(shown),
            });
        }
        let text = c.source.map.clone().expect("clap requires --map or --file");
        let p = prime(c.p.ok_or_else(|| Failure::Config("--p is required with --map".into()))?)?;
        let expr = parse_map(&text)?;
        Evaluator::new(&expr, p)?;
        Ok(LoadedMap {
            p,
            expr,
            text,
            file: None,
        })
    }

    fn report(&self, command: &str) -> Report {
        Report {
            config: ConfigEcho {
                command: command.to_string(),
                p: self.p.get(),
                map: self.text.clone(),
                parsed: self.expr.to_string(),
                file: self.file.clone(),
                lookahead: self.expr.lookahead_bound(self.p).0,
                ..ConfigEcho::default()
            },
            ..Report::default()
        }
    }
}

fn criterion_name(c: Criterion) -> &'static str {
    match c {
        Criterion::Bernoulli => "bernoulli",
        Criterion::LipschitzMp => "lipschitz-mp",
        Criterion::LipschitzErgodic => "lipschitz-ergodic",
        Criterion::Cs => "cs",
        Criterion::CsMp => "cs-mp",
        Criterion::CsErgodic => "cs-ergodic",
    }
}

fn run_criterion(which: Criterion, c: &MahlerCoeffs, n: u32, strict_m1: bool) -> Result<CheckOutcome, Failure> {
    Ok(match which {
        Criterion::Bernoulli => check_bernoulli_properties(c, n)?,
        Criterion::LipschitzMp => check_lipschitz_mp(c),
        Criterion::LipschitzErgodic => check_lipschitz_ergodic(c, strict_m1),
        Criterion::Cs => check_complex_shift_bound(c, n)?,
        Criterion::CsMp => check_cs_mp(c, n)?,
        Criterion::CsErgodic => check_cs_ergodic(c, n)?,
    })
}

fn census(map: &LoadedMap, n: u32, k_max: u32, budget: u64) -> Result<Vec<CensusRow>, Failure> {
    let expected = map
        .p
        .pow_u64(n)
        .ok_or_else(|| Failure::Budget(format!("p^{n} preimages per point exceeds any budget")))?;
    (2..=k_max)
        .map(|k| {
            let level = level_map(&map.expr, map.p, n, k, budget)?;
            Ok(CensusRow::new(&preimage_census(&level)?, expected))
        })
        .collect()
}

/// Cycle summaries of `f mod p^(n k)` for `k = 1..=k_max`.
fn cycles(map: &LoadedMap, n: u32, k_max: u32, budget: u64) -> Result<Vec<CycleRow>, Failure> {
    (1..=k_max)
        .map(|k| {
            let m = n * k;
            let table = padded_endomap(&map.expr, map.p, m, budget)?.table;
            Ok(CycleRow::new(m, &table, &cycle_report(&table)))
        })
        .collect()
}

fn plot(
    r: &mut Report,
    map: &LoadedMap,
    n: u32,
    k_max: u32,
    grids: &[u32],
    budget: u64,
    out: &Outputs,
) -> Result<(), Failure> {
    let set = PlotSet::accumulate(&map.expr, map.p, n, k_max, budget)?;
    let counts = grids
        .iter()
        .map(|&g| box_count(&set.points, g))
        .collect::<Result<Vec<BoxCount>, _>>()?;
    if let Some(path) = &out.csv {
        write_file(path, &set.to_csv())?;
    }
    if let Some(path) = &out.pgm {
        let largest = counts
            .iter()
            .max_by_key(|b| b.grid)
            .ok_or_else(|| Failure::Config("--pgm needs at least one --grid".into()))?;
        write_file(path, &largest.to_pgm())?;
    }
    r.plotset = Some(PlotRow::new(&set, &counts));
    Ok(())
}

/// The full pipeline: coefficients, every criterion, oracles, plot set.
pub fn analyze(a: &AnalyzeArgs) -> Result<Report, Failure> {
    let map = LoadedMap::load(&a.common)?;
    positive("K", a.k as u64)?;
    positive("mmax", a.mmax)?;
    positive("kmax", a.kmax as u64)?;
    positive("n", a.n as u64)?;
    let budget = budget(&a.budget);
    let mut r = map.report("analyze");
    r.config.precision = Some(a.k);
    r.config.n = Some(a.n);
    r.config.m_max = Some(a.mmax);
    r.config.k_max = Some(a.kmax);
    r.config.grid = a.grid.clone();
    r.config.budget = Some(budget);
    r.config.strict_m1 = a.strict_m1;

    let c = mahler_coeffs(&map.expr, map.p, a.mmax, a.k)?;
    r.set_coefficients(&c);
    for which in [
        Criterion::Bernoulli,
        Criterion::LipschitzMp,
        Criterion::LipschitzErgodic,
        Criterion::Cs,
        Criterion::CsMp,
        Criterion::CsErgodic,
    ] {
        r.add_verdict(&run_criterion(which, &c, a.n, a.strict_m1)?, r.config.lookahead);
    }
    r.census = census(&map, a.n, a.kmax, budget)?;
    r.cycles = cycles(&map, a.n, a.kmax, budget)?;
    plot(&mut r, &map, a.n, a.kmax, &a.grid, budget, &a.out)?;
    Ok(r)
}

fn parse_big(s: &str, what: &str) -> Result<BigUint, Failure> {
    BigUint::from_str(s.trim()).map_err(|_| Failure::Config(format!("{what} must be a non-negative integer, got `{s}`")))
}

fn orbit_text(a: &OrbitArgs) -> Result<String, Failure> {
    let map = LoadedMap::load(&a.common)?;
    positive("m", a.m as u64)?;
    let x0 = parse_big(&a.x0, "--x0")?;
    let o = orbit(&map.expr, map.p, &x0, a.steps, a.m)?;
    let mut out = String::new();
    let _ = writeln!(out, "map: {}  p = {}, orbit in Z/{}^{}", map.text, map.p, map.p, a.m);
    let points: Vec<String> = o.points.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(out, "{}", points.join(" -> "));
    match o.cycle {
        Some((start, len)) => {
            let _ = writeln!(out, "enters a cycle of length {len} at step {start} (x = {})", o.points[start]);
        }
        None => {
            let _ = writeln!(out, "no repeat within {} steps", a.steps);
        }
    }
    Ok(out)
}

fn automaton_run(a: &AutomatonRunArgs) -> Result<String, Failure> {
    let automaton = load_automaton(&a.file)?;
    let p = automaton.prime();
    let (word, x) = match &a.x {
        Some(x) => {
            positive("K", a.k as u64)?;
            let big = parse_big(x, "--x")?;
            if big >= p.pow(a.k) {
                return Err(Failure::Config(format!("--x {x} does not fit in {} digits", a.k)));
            }
            let approx = PadicApprox::new(p, a.k, big)?;
            (approx.digits(), Some(approx))
        }
        None => (a.input.clone(), None),
    };
    let trace = automaton.run(&word)?;
    let mut out = String::new();
    let show = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    let _ = writeln!(out, "input  ({} letters): {}", word.len(), show(&word));
    let _ = writeln!(out, "output ({} letters): {}", trace.output.len(), show(&trace.output));
    let states: Vec<&str> = trace
        .states
        .iter()
        .chain(std::iter::once(&trace.final_state))
        .map(|&s| automaton.state_name(s))
        .collect();
    let _ = writeln!(out, "states: {}", states.join(" -> "));
    if let Some(x) = x {
        let image = automaton.induced_map(&x)?;
        let _ = writeln!(out, "induced map: {} -> {}", x, image);
    }
    Ok(out)
}

fn automaton_check(a: &AutomatonCheckArgs) -> Result<String, Failure> {
    let automaton = load_automaton(&a.file)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "p = {}, {} states, initial {}",
        automaton.prime(),
        automaton.state_count(),
        automaton.state_name(automaton.initial())
    );
    let _ = writeln!(out, "synchronous: {}", automaton.is_synchronous());
    match automaton.check_nondegenerate() {
        Nondegeneracy::Nondegenerate => {
            let _ = writeln!(out, "nondegenerate: yes");
            let limit = 4 * automaton.state_count() as u32;
            let lengths = (0..=limit)
                .map(|l| automaton.guaranteed_output_length(l).map(|g| g.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let _ = writeln!(out, "guaranteed output length for L = 0..{limit}: {}", lengths.join(" "));
            match automaton.lookahead()? {
                Some(l) => {
                    let _ = writeln!(out, "lookahead: {l}");
                }
                None => {
                    let _ = writeln!(out, "lookahead: unbounded");
                }
            }
        }
        Nondegeneracy::DegenerateAt(s) => {
            let _ = writeln!(
                out,
                "nondegenerate: no (state {} lies on a cycle of empty outputs)",
                automaton.state_name(s)
            );
        }
    }
    Ok(out)
}
