//! Timed automata: model, concrete semantics, and the line-oriented model
//! format.

pub mod fixtures;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;

use crate::zones::{Atom, ClockSet, CmpOp, Federation};

pub use fixtures::train;
pub use parse::{parse_constraint, parse_model};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ModelError {
    pub line: usize,
    pub message: String,
}

impl ModelError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> ModelError {
        ModelError {
            line,
            message: message.into(),
        }
    }
}

/// Conjunction of single-clock atoms. Clock indices are 1-based positions in
/// the automaton's clock list, which matches DBM indexing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ClockConstraint {
    pub atoms: Vec<Atom>,
}

impl ClockConstraint {
    pub fn tt() -> ClockConstraint {
        ClockConstraint::default()
    }

    pub fn new(atoms: Vec<Atom>) -> ClockConstraint {
        ClockConstraint { atoms }
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_past_closed(&self) -> bool {
        self.atoms.iter().all(|a| a.op.is_upper_bound())
    }

    pub fn holds(&self, valuation: &[Rational64]) -> bool {
        self.atoms
            .iter()
            .all(|a| a.op.eval(valuation[a.clock - 1], a.value))
    }

    pub fn to_federation(&self, clocks: &Arc<ClockSet>) -> Federation {
        Federation::from_atoms(clocks, &self.atoms)
    }

    pub fn render(&self, clock_names: &[String]) -> String {
        if self.atoms.is_empty() {
            return "true".to_string();
        }
        self.atoms
            .iter()
            .map(|a| format!("{} {} {}", clock_names[a.clock - 1], a.op, a.value))
            .collect::<Vec<_>>()
            .join(" && ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: ClockConstraint,
    pub labels: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub action: usize,
    pub guard: ClockConstraint,
    pub resets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedAutomaton {
    pub name: String,
    pub clocks: Vec<String>,
    pub actions: Vec<String>,
    pub props: Vec<String>,
    pub locations: Vec<Location>,
    pub initial: usize,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteState {
    pub location: usize,
    pub valuation: Vec<Rational64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    Delay(Rational64),
    Action(usize),
}

impl TimedAutomaton {
    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    /// 1-based clock index.
    pub fn clock_index(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c == name).map(|i| i + 1)
    }

    pub fn invariant(&self, location: usize) -> &ClockConstraint {
        &self.locations[location].invariant
    }

    pub fn has_label(&self, location: usize, prop: &str) -> bool {
        self.locations[location].labels.contains(prop)
    }

    /// Edges leaving `location` labelled `action`, in declaration order.
    pub fn edges_for(&self, location: usize, action: usize) -> Vec<&Edge> {
        self.edges
            .iter()
            .filter(|e| e.source == location && e.action == action)
            .collect()
    }

    pub fn edges_from(&self, location: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.source == location)
    }

    pub fn initial_state(&self) -> ConcreteState {
        ConcreteState {
            location: self.initial,
            valuation: vec![Rational64::from_integer(0); self.clocks.len()],
        }
    }

    pub fn step(&self, s: &ConcreteState, mv: &Move) -> Vec<ConcreteState> {
        let inv = self.invariant(s.location);
        if !inv.holds(&s.valuation) {
            return Vec::new();
        }
        match mv {
            Move::Delay(d) => {
                if *d < Rational64::from_integer(0) {
                    return Vec::new();
                }
                let moved: Vec<Rational64> = s.valuation.iter().map(|v| *v + *d).collect();
                // Past-closed invariants are convex along the delay line.
                if inv.holds(&moved) {
                    vec![ConcreteState {
                        location: s.location,
                        valuation: moved,
                    }]
                } else {
                    Vec::new()
                }
            }
            Move::Action(a) => self
                .edges_for(s.location, *a)
                .into_iter()
                .filter(|e| e.guard.holds(&s.valuation))
                .filter_map(|e| {
                    let mut v = s.valuation.clone();
                    for &c in &e.resets {
                        v[c - 1] = Rational64::from_integer(0);
                    }
                    let next = ConcreteState {
                        location: e.target,
                        valuation: v,
                    };
                    assert!(next.valuation.iter().all(|x| *x >= Rational64::from_integer(0)));
                    self.invariant(e.target).holds(&next.valuation).then_some(next)
                })
                .collect(),
        }
    }

    /// Largest constant compared against each clock (index 0 is the
    /// reference clock and always 0).
    pub fn max_constants(&self) -> Vec<i64> {
        let mut k = vec![0; self.clocks.len() + 1];
        let ccs = self
            .locations
            .iter()
            .map(|l| &l.invariant)
            .chain(self.edges.iter().map(|e| &e.guard));
        for cc in ccs {
            for a in &cc.atoms {
                k[a.clock] = k[a.clock].max(a.value);
            }
        }
        k
    }

    /// Per-location max constants: the largest constant a clock can still be
    /// compared with before its next reset, 0 where it is never read again.
    pub fn local_max_constants(&self) -> Vec<Vec<i64>> {
        let n = self.clocks.len() + 1;
        let mut k = vec![vec![0; n]; self.locations.len()];
        for (l, loc) in self.locations.iter().enumerate() {
            for a in &loc.invariant.atoms {
                k[l][a.clock] = k[l][a.clock].max(a.value);
            }
        }
        for e in &self.edges {
            for a in &e.guard.atoms {
                k[e.source][a.clock] = k[e.source][a.clock].max(a.value);
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for e in &self.edges {
                for x in 1..n {
                    if !e.resets.contains(&x) && k[e.target][x] > k[e.source][x] {
                        k[e.source][x] = k[e.target][x];
                        changed = true;
                    }
                }
            }
        }
        k
    }

    pub fn clock_set(&self, freeze: &[String]) -> Arc<ClockSet> {
        ClockSet::new(self.clocks.clone(), freeze.to_vec())
    }

    /// Structural checks shared by the parser and programmatic builders.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.clocks.is_empty() {
            return Err(ModelError::new(0, "at least one clock is required"));
        }
        if self.initial >= self.locations.len() {
            return Err(ModelError::new(0, "no initial location"));
        }
        let n = self.clocks.len();
        let check_cc = |cc: &ClockConstraint| cc.atoms.iter().all(|a| a.clock >= 1 && a.clock <= n && a.value >= 0);
        for l in &self.locations {
            if !check_cc(&l.invariant) {
                return Err(ModelError::new(0, format!("bad invariant on `{}`", l.name)));
            }
            if !l.invariant.is_past_closed() {
                return Err(ModelError::new(0, format!("invariant of `{}` must use only upper bounds", l.name)));
            }
        }
        for e in &self.edges {
            if e.source >= self.locations.len() || e.target >= self.locations.len() {
                return Err(ModelError::new(0, "edge endpoint out of range"));
            }
            if e.action >= self.actions.len() {
                return Err(ModelError::new(0, "edge action out of range"));
            }
            if !check_cc(&e.guard) || e.resets.iter().any(|&c| c == 0 || c > n) {
                return Err(ModelError::new(0, "edge mentions an unknown clock"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TimedAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "automaton {}", self.name)?;
        writeln!(f, "clocks: {}", self.clocks.join(", "))?;
        writeln!(f, "actions: {}", self.actions.join(", "))?;
        writeln!(f, "props: {}", self.props.join(", "))?;
        for (i, l) in self.locations.iter().enumerate() {
            write!(f, "location {}", l.name)?;
            if i == self.initial {
                write!(f, " initial")?;
            }
            if !l.invariant.is_trivial() {
                write!(f, " invariant: {}", l.invariant.render(&self.clocks))?;
            }
            if !l.labels.is_empty() {
                let labels: Vec<&str> = l.labels.iter().map(String::as_str).collect();
                write!(f, " labels: {}", labels.join(", "))?;
            }
            writeln!(f)?;
        }
        for e in &self.edges {
            write!(
                f,
                "edge {} -> {} on {}",
                self.locations[e.source].name, self.locations[e.target].name, self.actions[e.action]
            )?;
            if !e.guard.is_trivial() {
                write!(f, " when {}", e.guard.render(&self.clocks))?;
            }
            if !e.resets.is_empty() {
                let names: Vec<&str> = e.resets.iter().map(|&c| self.clocks[c - 1].as_str()).collect();
                write!(f, " reset {}", names.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Convenience for building an atom from a comparison symbol in tests and
/// generators.
pub fn atom(clock: usize, op: &str, value: i64) -> Atom {
    Atom::new(clock, CmpOp::parse(op).expect("comparison operator"), value)
}
