//! Explicit enumeration of bounded timed runs on concrete states.
//!
//! Independent of the region construction: delays are chosen so that every
//! equivalence class on a delay line is visited once (each integer crossing
//! and a midpoint between crossings), and runs are cut off after a fixed
//! number of discrete steps. Reachability found here is genuine; absence is
//! only up to the depth bound.

use std::collections::BTreeSet;

use num_rational::Rational64;

use crate::automaton::{ConcreteState, Move, TimedAutomaton};

/// Delays from `v` that visit every class along its delay line.
fn probe_delays(v: &[Rational64], k: &[i64]) -> Vec<Rational64> {
    let zero = Rational64::from_integer(0);
    let mut cuts = BTreeSet::new();
    for (x, &c) in v.iter().zip(k) {
        let mut next = x.floor() + 1;
        while next <= Rational64::from_integer(c + 1) {
            if next - x > zero {
                cuts.insert(next - x);
            }
            next += 1;
        }
    }
    let mut out = vec![zero];
    let mut prev = zero;
    for &c in &cuts {
        out.push((prev + c) / 2);
        out.push(c);
        prev = c;
    }
    out.push(prev + Rational64::new(1, 2));
    out
}

/// Clocks above their ceiling are pinned at `k + 1`.
fn clamp(mut s: ConcreteState, k: &[i64]) -> ConcreteState {
    for (x, &c) in s.valuation.iter_mut().zip(k) {
        if *x > Rational64::from_integer(c + 1) {
            *x = Rational64::from_integer(c + 1);
        }
    }
    s
}

/// Every state reached by at most `depth` discrete steps, each preceded by
/// a probe delay. Stops early once `max_states` are known.
pub fn reachable_states(ta: &TimedAutomaton, depth: usize, max_states: usize) -> BTreeSet<(usize, Vec<Rational64>)> {
    let k: Vec<i64> = ta.max_constants()[1..].to_vec();
    let key = |s: &ConcreteState| (s.location, s.valuation.clone());
    let init = ta.initial_state();
    let mut seen = BTreeSet::new();
    if !ta.invariant(init.location).holds(&init.valuation) {
        return seen;
    }
    seen.insert(key(&init));
    let mut frontier = vec![init];
    for _ in 0..=depth {
        let mut next = Vec::new();
        for s in &frontier {
            for d in probe_delays(&s.valuation, &k) {
                for t in ta.step(s, &Move::Delay(d)) {
                    let t = clamp(t, &k);
                    seen.insert(key(&t));
                    for a in 0..ta.actions.len() {
                        for u in ta.step(&t, &Move::Action(a)) {
                            let u = clamp(u, &k);
                            if seen.insert(key(&u)) {
                                next.push(u);
                            }
                        }
                    }
                }
                if seen.len() >= max_states {
                    return seen;
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Locations met on bounded runs.
pub fn reachable_locations(ta: &TimedAutomaton, depth: usize) -> BTreeSet<usize> {
    reachable_states(ta, depth, 200_000).into_iter().map(|(l, _)| l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::fixtures::train;

    #[test]
    fn probes_cover_boundaries_and_gaps() {
        let d = probe_delays(&[Rational64::new(1, 2)], &[1]);
        let q = |n, m| Rational64::new(n, m);
        assert_eq!(d, vec![q(0, 1), q(1, 4), q(1, 2), q(1, 1), q(3, 2), q(2, 1)]);
    }

    #[test]
    fn train_reaches_every_location() {
        let ta = train();
        assert_eq!(reachable_locations(&ta, 4).len(), 3);
    }
}
