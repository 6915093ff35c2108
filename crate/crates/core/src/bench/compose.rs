//! Builds a single automaton from a family's discrete product semantics by
//! breadth-first exploration of the discrete states (clocks ignored), so
//! only discretely reachable product locations are emitted.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

use crate::automaton::{ClockConstraint, Edge, Location, TimedAutomaton};
use crate::zones::{Atom, CmpOp};

pub(crate) struct Step<S> {
    pub action: String,
    pub guard: Vec<Atom>,
    /// 1-based clock indices.
    pub resets: Vec<usize>,
    pub target: S,
}

impl<S> Step<S> {
    pub fn new(action: impl Into<String>, target: S) -> Step<S> {
        Step {
            action: action.into(),
            guard: Vec::new(),
            resets: Vec::new(),
            target,
        }
    }

    pub fn when(mut self, clock: usize, op: CmpOp, value: i64) -> Step<S> {
        self.guard.push(Atom::new(clock, op, value));
        self
    }

    pub fn reset(mut self, clock: usize) -> Step<S> {
        self.resets.push(clock);
        self
    }
}

pub(crate) trait Product {
    type State: Clone + Eq + Hash;

    fn name(&self) -> String;
    fn clocks(&self) -> Vec<String>;
    /// Every proposition a spec may mention, labelled or not.
    fn props(&self) -> Vec<String>;
    fn initial(&self) -> Self::State;
    fn steps(&self, s: &Self::State) -> Vec<Step<Self::State>>;
    fn invariant(&self, s: &Self::State) -> Vec<Atom>;
    fn labels(&self, s: &Self::State) -> BTreeSet<String>;
    fn location_name(&self, s: &Self::State) -> String;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("product exceeds {0} locations")]
pub struct CompositionCap(pub usize);

pub(crate) fn compose<P: Product>(p: &P, cap: usize) -> Result<TimedAutomaton, CompositionCap> {
    let mut index: HashMap<P::State, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    let mut actions: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let init = p.initial();
    index.insert(init.clone(), 0);
    states.push(init.clone());
    queue.push_back(init);
    while let Some(s) = queue.pop_front() {
        let src = index[&s];
        for step in p.steps(&s) {
            let tgt = match index.get(&step.target) {
                Some(&t) => t,
                None => {
                    if states.len() >= cap {
                        return Err(CompositionCap(cap));
                    }
                    let t = states.len();
                    index.insert(step.target.clone(), t);
                    states.push(step.target.clone());
                    queue.push_back(step.target.clone());
                    t
                }
            };
            let action = match actions.iter().position(|a| *a == step.action) {
                Some(a) => a,
                None => {
                    actions.push(step.action.clone());
                    actions.len() - 1
                }
            };
            let mut resets = step.resets;
            resets.sort_unstable();
            resets.dedup();
            edges.push(Edge {
                source: src,
                target: tgt,
                action,
                guard: ClockConstraint::new(step.guard),
                resets,
            });
        }
    }
    let locations = states
        .iter()
        .map(|s| Location {
            name: p.location_name(s),
            invariant: ClockConstraint::new(p.invariant(s)),
            labels: p.labels(s),
        })
        .collect();
    Ok(TimedAutomaton {
        name: p.name(),
        clocks: p.clocks(),
        actions,
        props: p.props(),
        locations,
        initial: 0,
        edges,
    })
}
