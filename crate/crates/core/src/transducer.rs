//! Finite letter-to-word transducers over the alphabet `{0, .., p-1}`.
//!
//! An [`Automaton`] reads one input letter per step, moves to a new state and
//! emits a (possibly empty) word. Synchronous machines always emit exactly one
//! letter and induce 1-Lipschitz maps of `Z_p`; the shift machine `C^(n)` stays
//! silent for `n` steps and then copies its input.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigUint;
use thiserror::Error;

use crate::padic::{PadicApprox, PadicError, Prime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown state `{name}`")]
    UnknownState { line: usize, name: String },
    #[error("line {line}: duplicate transition for ({state}, {letter})")]
    DuplicateTransition {
        line: usize,
        state: String,
        letter: u32,
    },
    #[error("missing transition for ({state}, {letter})")]
    MissingTransition { state: String, letter: u32 },
    #[error("letter {letter} is outside the alphabet [0, {p})")]
    LetterOutOfRange { letter: u32, p: u32 },
    #[error("automaton has no states")]
    NoStates,
    #[error("automaton is degenerate: state `{state}` admits an infinite silent run")]
    Degenerate { state: String },
    #[error("no output digit is guaranteed from {input_len} input digits")]
    PrecisionExhausted { input_len: u32 },
    #[error(transparent)]
    Padic(#[from] PadicError),
}

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    p: Prime,
    states: Vec<String>,
    initial: StateId,
    /// Indexed by `state * p + letter`.
    next: Vec<StateId>,
    output: Vec<Vec<u32>>,
    accessible: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    /// State in which each input letter was read.
    pub states: Vec<StateId>,
    pub final_state: StateId,
    pub output: Vec<u32>,
    pub consumed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nondegeneracy {
    Nondegenerate,
    DegenerateAt(StateId),
}

impl Automaton {
    /// Assembles an automaton from dense tables indexed by `state * p + letter`.
    pub fn new(
        p: Prime,
        states: Vec<String>,
        initial: StateId,
        next: Vec<StateId>,
        output: Vec<Vec<u32>>,
    ) -> Result<Self, AutomatonError> {
        if states.is_empty() {
            return Err(AutomatonError::NoStates);
        }
        let width = p.get() as usize;
        let cells = states.len() * width;
        if initial >= states.len() || next.len() != cells || output.len() != cells {
            return Err(AutomatonError::Syntax {
                line: 0,
                message: "transition tables do not match the state count".into(),
            });
        }
        if next.iter().any(|&s| s >= states.len()) {
            return Err(AutomatonError::Syntax {
                line: 0,
                message: "transition to a nonexistent state".into(),
            });
        }
        for word in &output {
            if let Some(&letter) = word.iter().find(|&&l| l >= p.get()) {
                return Err(AutomatonError::LetterOutOfRange { letter, p: p.get() });
            }
        }
        let mut automaton = Automaton {
            p,
            states,
            initial,
            next,
            output,
            accessible: Vec::new(),
        };
        automaton.accessible = automaton.compute_accessible();
        for (id, name) in automaton.states.iter().enumerate() {
            if !automaton.accessible[id] {
                log::warn!("state `{name}` is not accessible and will be ignored");
            }
        }
        Ok(automaton)
    }

    /// The shift machine `C^(n)`: states `c0..cn`, silent for the first `n`
    /// letters, then echoing every letter.
    pub fn shift(n: usize, p: Prime) -> Self {
        let width = p.get() as usize;
        let states: Vec<String> = (0..=n).map(|i| format!("c{i}")).collect();
        let mut next = Vec::with_capacity((n + 1) * width);
        let mut output = Vec::with_capacity((n + 1) * width);
        for s in 0..=n {
            for letter in 0..p.get() {
                if s < n {
                    next.push(s + 1);
                    output.push(Vec::new());
                } else {
                    next.push(s);
                    output.push(vec![letter]);
                }
            }
        }
        Automaton::new(p, states, 0, next, output).expect("shift automaton is well formed")
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accessible(&self, s: StateId) -> bool {
        self.accessible[s]
    }

    fn cell(&self, s: StateId, letter: u32) -> usize {
        s * self.p.get() as usize + letter as usize
    }

    pub fn transition(&self, s: StateId, letter: u32) -> StateId {
        self.next[self.cell(s, letter)]
    }

    pub fn output(&self, s: StateId, letter: u32) -> &[u32] {
        &self.output[self.cell(s, letter)]
    }

    /// Every reachable output word has length exactly one.
    pub fn is_synchronous(&self) -> bool {
        self.output.iter().all(|w| w.len() == 1)
    }

    fn compute_accessible(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for letter in 0..self.p.get() {
                let t = self.transition(s, letter);
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Left-to-right fold of the transition and output functions.
    pub fn run(&self, word: &[u32]) -> Result<RunTrace, AutomatonError> {
        let mut state = self.initial;
        let mut states = Vec::with_capacity(word.len());
        let mut output = Vec::new();
        for &letter in word {
            if letter >= self.p.get() {
                return Err(AutomatonError::LetterOutOfRange {
                    letter,
                    p: self.p.get(),
                });
            }
            states.push(state);
            output.extend_from_slice(self.output(state, letter));
            state = self.transition(state, letter);
        }
        Ok(RunTrace {
            states,
            final_state: state,
            output,
            consumed: word.len(),
        })
    }

    /// Degenerate iff the silent transitions among accessible states contain
    /// a cycle; the witness is a state on that cycle.
    pub fn check_nondegenerate(&self) -> Nondegeneracy {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut mark = vec![Mark::New; self.states.len()];
        for root in 0..self.states.len() {
            if !self.accessible[root] || mark[root] != Mark::New {
                continue;
            }
            // iterative DFS over silent edges: (state, next letter to try)
            let mut stack = vec![(root, 0u32)];
            mark[root] = Mark::Active;
            while let Some(&mut (s, ref mut letter)) = stack.last_mut() {
                if *letter == self.p.get() {
                    mark[s] = Mark::Done;
                    stack.pop();
                    continue;
                }
                let a = *letter;
                *letter += 1;
                if !self.output(s, a).is_empty() {
                    continue;
                }
                let t = self.transition(s, a);
                match mark[t] {
                    Mark::Active => return Nondegeneracy::DegenerateAt(t),
                    Mark::New => {
                        mark[t] = Mark::Active;
                        stack.push((t, 0));
                    }
                    Mark::Done => {}
                }
            }
        }
        Nondegeneracy::Nondegenerate
    }

    fn require_nondegenerate(&self) -> Result<(), AutomatonError> {
        match self.check_nondegenerate() {
            Nondegeneracy::Nondegenerate => Ok(()),
            Nondegeneracy::DegenerateAt(s) => Err(AutomatonError::Degenerate {
                state: self.states[s].clone(),
            }),
        }
    }

    /// Minimum output length over all input words of length `input_len`.
    pub fn guaranteed_output_length(&self, input_len: u32) -> Result<u64, AutomatonError> {
        self.require_nondegenerate()?;
        let mut remaining = vec![0u64; self.states.len()];
        for _ in 0..input_len {
            let mut step = vec![u64::MAX; self.states.len()];
            for (s, best) in step.iter_mut().enumerate() {
                for letter in 0..self.p.get() {
                    let here = self.output(s, letter).len() as u64
                        + remaining[self.transition(s, letter)];
                    *best = (*best).min(here);
                }
            }
            remaining = step;
        }
        Ok(remaining[self.initial])
    }

    /// `sup_L (L - guaranteed_output_length(L))`: how many extra input digits
    /// are needed to pin down any number of output digits. `None` when the
    /// deficit is unbounded (some reachable cycle emits less than one letter
    /// per step on average).
    pub fn lookahead(&self) -> Result<Option<u32>, AutomatonError> {
        self.require_nondegenerate()?;
        // longest walk from the initial state with edge weight 1 - |output|
        let n = self.states.len();
        let mut best: Vec<Option<i64>> = vec![None; n];
        best[self.initial] = Some(0);
        for round in 0..=n {
            let mut changed = false;
            for s in 0..n {
                let Some(here) = best[s] else { continue };
                for letter in 0..self.p.get() {
                    let t = self.transition(s, letter);
                    let gain = 1 - self.output(s, letter).len() as i64;
                    if best[t].is_none_or(|b| here + gain > b) {
                        best[t] = Some(here + gain);
                        changed = true;
                    }
                }
            }
            if !changed {
                let max = best.iter().flatten().copied().max().unwrap_or(0);
                return Ok(Some(max.max(0) as u32));
            }
            if round == n {
                break;
            }
        }
        Ok(None)
    }

    /// Feeds the `K` digits of `x` and keeps the guaranteed output prefix.
    pub fn induced_map(&self, x: &PadicApprox) -> Result<PadicApprox, AutomatonError> {
        if x.prime() != self.p {
            return Err(PadicError::MismatchedPrimes(self.p.get(), x.prime().get()).into());
        }
        let guaranteed = self.guaranteed_output_length(x.precision())?;
        if guaranteed == 0 {
            return Err(AutomatonError::PrecisionExhausted {
                input_len: x.precision(),
            });
        }
        let trace = self.run(&x.digits())?;
        Ok(self.digits_to_padic(&trace.output[..guaranteed as usize]))
    }

    /// Runs on the digits of `residue` (as a `len`-digit word) and returns the
    /// first `keep` output digits as an integer.
    pub(crate) fn apply_truncated(&self, residue: &BigUint, len: u32, keep: u32) -> BigUint {
        let x = PadicApprox::new(self.p, len, residue.clone()).expect("residue below p^len");
        let trace = self.run(&x.digits()).expect("digits are letters");
        debug_assert!(trace.output.len() >= keep as usize);
        let mut value = BigUint::from(0u32);
        for &d in trace.output[..keep as usize].iter().rev() {
            value = value * self.p.get() + d;
        }
        value
    }

    fn digits_to_padic(&self, digits: &[u32]) -> PadicApprox {
        let wide: Vec<u64> = digits.iter().map(|&d| d as u64).collect();
        PadicApprox::from_digits(&wide, self.p).expect("output letters are digits")
    }

    /// Serializes to the line-oriented automaton file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p {}", self.p).unwrap();
        writeln!(out, "states {}", self.states.join(" ")).unwrap();
        writeln!(out, "initial {}", self.states[self.initial]).unwrap();
        for s in 0..self.states.len() {
            for letter in 0..self.p.get() {
                let word = self.output(s, letter);
                let rendered = if word.is_empty() {
                    "-".to_string()
                } else {
                    word.iter().map(|d| d.to_string()).collect()
                };
                writeln!(
                    out,
                    "{} {} -> {} / {}",
                    self.states[s],
                    letter,
                    self.states[self.transition(s, letter)],
                    rendered
                )
                .unwrap();
            }
        }
        out
    }
}

/// Parses the automaton file format:
///
/// ```text
/// p 2
/// states s0 s1
/// initial s0
/// s0 0 -> s1 / -
/// s0 1 -> s1 / -
/// s1 0 -> s1 / 0
/// s1 1 -> s1 / 1
/// ```
pub fn parse_automaton(text: &str) -> Result<Automaton, AutomatonError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let syntax = |line: usize, message: &str| AutomatonError::Syntax {
        line,
        message: message.to_string(),
    };

    let (line, header) = lines.next().ok_or_else(|| syntax(0, "empty file"))?;
    let p = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["p", value] => {
            let v: u64 = value
                .parse()
                .map_err(|_| syntax(line, "expected `p <prime>`"))?;
            Prime::new(v)?
        }
        _ => return Err(syntax(line, "expected `p <prime>`")),
    };

    let (line, header) = lines.next().ok_or_else(|| syntax(0, "missing `states` line"))?;
    let mut words = header.split_whitespace();
    if words.next() != Some("states") {
        return Err(syntax(line, "expected `states <id> ...`"));
    }
    let states: Vec<String> = words.map(str::to_string).collect();
    if states.is_empty() {
        return Err(AutomatonError::NoStates);
    }
    let mut index = HashMap::new();
    for (i, s) in states.iter().enumerate() {
        if index.insert(s.clone(), i).is_some() {
            return Err(syntax(line, &format!("state `{s}` declared twice")));
        }
    }
    let lookup = |line: usize, name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| AutomatonError::UnknownState {
                line,
                name: name.to_string(),
            })
    };

    let (line, header) = lines.next().ok_or_else(|| syntax(0, "missing `initial` line"))?;
    let initial = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["initial", name] => lookup(line, name)?,
        _ => return Err(syntax(line, "expected `initial <id>`")),
    };

    let width = p.get() as usize;
    let mut next: Vec<Option<StateId>> = vec![None; states.len() * width];
    let mut output: Vec<Vec<u32>> = vec![Vec::new(); states.len() * width];
    for (line, row) in lines {
        let tokens: Vec<&str> = row.split_whitespace().collect();
        let [from, letter, "->", to, "/", word] = tokens[..] else {
            return Err(syntax(
                line,
                "expected `<state> <letter> -> <state> / <output>`",
            ));
        };
        let from = lookup(line, from)?;
        let letter: u32 = letter
            .parse()
            .map_err(|_| syntax(line, "letter must be a non-negative integer"))?;
        if letter >= p.get() {
            return Err(AutomatonError::LetterOutOfRange { letter, p: p.get() });
        }
        let to = lookup(line, to)?;
        let emitted = if word == "-" {
            Vec::new()
        } else {
            word.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| syntax(line, "output must be digits or `-`"))
                })
                .collect::<Result<Vec<u32>, _>>()?
        };
        let cell = from * width + letter as usize;
        if next[cell].is_some() {
            return Err(AutomatonError::DuplicateTransition {
                line,
                state: states[from].clone(),
                letter,
            });
        }
        next[cell] = Some(to);
        output[cell] = emitted;
    }

    let mut dense = Vec::with_capacity(next.len());
    for (cell, target) in next.into_iter().enumerate() {
        match target {
            Some(t) => dense.push(t),
            None => {
                return Err(AutomatonError::MissingTransition {
                    state: states[cell / width].clone(),
                    letter: (cell % width) as u32,
                })
            }
        }
    }
    Automaton::new(p, states, initial, dense, output)
}
