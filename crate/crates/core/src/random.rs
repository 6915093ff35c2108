//! Random small automata and equation systems for differential testing.

use std::collections::BTreeSet;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::automaton::{ClockConstraint, Edge, Location, TimedAutomaton};
use crate::logic::{Equation, Formula, Mes, Parity};
use crate::zones::{Atom, CmpOp};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_locations: usize,
    pub max_clocks: usize,
    pub max_const: i64,
    pub max_edges_per_location: usize,
    pub max_depth: usize,
    pub max_equations: usize,
    /// Allow freeze quantifiers and the marker formulas.
    pub freeze: bool,
    /// Allow the relativized operators.
    pub relativized: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_locations: 4,
            max_clocks: 2,
            max_const: 3,
            max_edges_per_location: 2,
            max_depth: 3,
            max_equations: 3,
            freeze: true,
            relativized: true,
        }
    }
}

pub const ACTIONS: [&str; 2] = ["a", "b"];
pub const PROPS: [&str; 2] = ["p", "q"];
const OPS: [CmpOp; 5] = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq];

fn random_atom(rng: &mut impl Rng, clocks: usize, max_const: i64) -> Atom {
    Atom::new(
        rng.gen_range(1..=clocks),
        *OPS.choose(rng).expect("ops"),
        rng.gen_range(0..=max_const),
    )
}

pub fn random_automaton(rng: &mut impl Rng, cfg: &GenConfig) -> TimedAutomaton {
    let nloc = rng.gen_range(1..=cfg.max_locations);
    let nclk = rng.gen_range(1..=cfg.max_clocks);
    let mut locations = Vec::new();
    for l in 0..nloc {
        let labels: BTreeSet<String> = PROPS.iter().filter(|_| rng.gen_bool(0.5)).map(|p| p.to_string()).collect();
        let invariant = if rng.gen_bool(0.4) {
            // The initial location must admit the zero valuation.
            let lo = if l == 0 { 1 } else { 0 };
            let op = if rng.gen_bool(0.5) { CmpOp::Le } else { CmpOp::Lt };
            let c = rng.gen_range(lo.max(i64::from(op == CmpOp::Lt))..=cfg.max_const.max(1));
            ClockConstraint::new(vec![Atom::new(rng.gen_range(1..=nclk), op, c)])
        } else {
            ClockConstraint::tt()
        };
        locations.push(Location {
            name: format!("l{l}"),
            invariant,
            labels,
        });
    }
    let mut edges = Vec::new();
    for source in 0..nloc {
        for _ in 0..rng.gen_range(0..=cfg.max_edges_per_location) {
            let guard = (0..rng.gen_range(0..=2)).map(|_| random_atom(rng, nclk, cfg.max_const)).collect();
            let resets = (1..=nclk).filter(|_| rng.gen_bool(0.5)).collect();
            edges.push(Edge {
                source,
                target: rng.gen_range(0..nloc),
                action: rng.gen_range(0..ACTIONS.len()),
                guard: ClockConstraint::new(guard),
                resets,
            });
        }
    }
    TimedAutomaton {
        name: "random".into(),
        clocks: (1..=nclk).map(|i| format!("x{i}")).collect(),
        actions: ACTIONS.iter().map(|a| a.to_string()).collect(),
        props: PROPS.iter().map(|p| p.to_string()).collect(),
        locations,
        initial: 0,
        edges,
    }
}

struct FormulaGen<'a> {
    cfg: &'a GenConfig,
    clocks: &'a [String],
    vars: Vec<String>,
}

impl FormulaGen<'_> {
    fn leaf(&self, rng: &mut impl Rng, frozen: bool) -> Formula {
        match rng.gen_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            2 => Formula::prop(PROPS.choose(rng).expect("props")),
            3 => Formula::neg_prop(PROPS.choose(rng).expect("props")),
            4 | 5 if !self.vars.is_empty() => Formula::var(self.vars.choose(rng).expect("vars")),
            6 if self.cfg.freeze && rng.gen_bool(0.5) => {
                if rng.gen_bool(0.5) {
                    Formula::MustAct
                } else {
                    Formula::CanDiverge
                }
            }
            _ => {
                let clock = if frozen && rng.gen_bool(0.5) {
                    "z".to_string()
                } else {
                    self.clocks.choose(rng).expect("clocks").clone()
                };
                Formula::constraint(&clock, *OPS.choose(rng).expect("ops"), rng.gen_range(0..=self.cfg.max_const))
            }
        }
    }

    fn formula(&self, rng: &mut impl Rng, depth: usize, frozen: bool) -> Formula {
        if depth == 0 || rng.gen_bool(0.2) {
            return self.leaf(rng, frozen);
        }
        let d = depth - 1;
        let act = || ACTIONS[0];
        match rng.gen_range(0..12) {
            0 => Formula::and(self.formula(rng, d, frozen), self.formula(rng, d, frozen)),
            1 => Formula::or(self.formula(rng, d, frozen), self.formula(rng, d, frozen)),
            2 => Formula::dia_act(if rng.gen_bool(0.5) { act() } else { ACTIONS[1] }, self.formula(rng, d, frozen)),
            3 => Formula::box_act(if rng.gen_bool(0.5) { act() } else { ACTIONS[1] }, self.formula(rng, d, frozen)),
            4 => Formula::dia_all(self.formula(rng, d, frozen)),
            5 => Formula::box_all(self.formula(rng, d, frozen)),
            6 => Formula::exists(self.formula(rng, d, frozen)),
            7 => Formula::forall(self.formula(rng, d, frozen)),
            8 if self.cfg.relativized => {
                Formula::exists_rel(self.formula(rng, d, frozen), self.formula(rng, d, frozen))
            }
            9 if self.cfg.relativized => {
                Formula::forall_rel(self.formula(rng, d, frozen), self.formula(rng, d, frozen))
            }
            10 if self.cfg.freeze && !frozen => Formula::freeze("z", self.formula(rng, d, true)),
            _ => self.formula(rng, depth, frozen),
        }
    }
}

/// A closed formula over the given automaton clocks.
pub fn random_formula(rng: &mut impl Rng, cfg: &GenConfig, clocks: &[String], vars: &[String]) -> Formula {
    FormulaGen {
        cfg,
        clocks,
        vars: vars.to_vec(),
    }
    .formula(rng, cfg.max_depth, false)
}

/// An alternation-free system: equations are grouped into contiguous
/// same-parity blocks and may refer only to their own or later blocks.
pub fn random_mes(rng: &mut impl Rng, cfg: &GenConfig, clocks: &[String]) -> Mes {
    let n = rng.gen_range(1..=cfg.max_equations);
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let mut block_start = vec![0; n];
    let mut parity = vec![Parity::Nu; n];
    for i in 0..n {
        let fresh_block = i == 0 || rng.gen_bool(0.5);
        parity[i] = if fresh_block {
            if rng.gen_bool(0.5) {
                Parity::Mu
            } else {
                Parity::Nu
            }
        } else {
            parity[i - 1]
        };
        block_start[i] = if fresh_block { i } else { block_start[i - 1] };
    }
    let equations = (0..n)
        .map(|i| Equation {
            var: names[i].clone(),
            parity: parity[i],
            rhs: random_formula(rng, cfg, clocks, &names[block_start[i]..]),
        })
        .collect();
    Mes::new(equations)
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub ta: TimedAutomaton,
    pub mes: Mes,
}

pub fn random_instance(rng: &mut impl Rng, cfg: &GenConfig) -> Instance {
    let ta = random_automaton(rng, cfg);
    let mes = random_mes(rng, cfg, &ta.clocks);
    Instance { ta, mes }
}

/// A valuation with values in `[0, k + 1]` on a grid of quarters.
pub fn random_valuation(rng: &mut impl Rng, clocks: usize, max_const: i64) -> Vec<Rational64> {
    (0..clocks)
        .map(|_| Rational64::new(rng.gen_range(0..=4 * (max_const + 1)), 4))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{check_against, check_alternation_free};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generated_instances_are_well_formed() {
        let mut rng = StdRng::seed_from_u64(1);
        let cfg = GenConfig::default();
        for _ in 0..300 {
            let inst = random_instance(&mut rng, &cfg);
            inst.ta.validate().unwrap();
            check_alternation_free(&inst.mes).unwrap();
            check_against(&inst.mes, &inst.ta).unwrap();
            assert!(inst.ta.invariant(0).holds(&vec![Rational64::from_integer(0); inst.ta.clocks.len()]));
            let text = inst.mes.to_string();
            assert_eq!(crate::logic::parse_mes(&text).unwrap(), inst.mes, "{text}");
        }
    }
}
