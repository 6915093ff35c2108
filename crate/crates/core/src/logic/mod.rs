//! Formulas of the relativized timed mu-calculus, equation systems, and
//! the TCTL front-end.

mod ast;
mod parse;
mod tctl;

pub use ast::{Equation, Formula, Mes, Parity, MARKER_CLOCK};
pub use parse::{parse_formula, parse_mes, parse_tctl};
pub use tctl::{compile_tctl, TctlSpec};

use crate::automaton::TimedAutomaton;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable `{0}` cannot be negated")]
    NegatedVariable(String),
    #[error("unbound variable or undeclared proposition `{0}`")]
    Unbound(String),
    #[error("equations of different parity are mutually recursive: {cycle}")]
    Alternation { cycle: String },
    #[error("{0}")]
    Invalid(String),
}

impl LogicError {
    pub(crate) fn syntax(offset: usize, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            offset,
            message: message.into(),
        }
    }
}

/// Checks that every proposition, action and clock the system mentions is
/// declared by `ta`, and that freeze clocks do not shadow automaton clocks.
pub fn check_against(m: &Mes, ta: &TimedAutomaton) -> Result<(), LogicError> {
    let freeze = m.freeze_clocks();
    if let Some(z) = freeze.iter().find(|z| ta.clocks.contains(z)) {
        return Err(LogicError::Invalid(format!("freeze clock `{z}` clashes with an automaton clock")));
    }
    for p in m.props() {
        if !ta.props.contains(&p) {
            return Err(LogicError::Unbound(p));
        }
    }
    let mut err = None;
    for e in &m.equations {
        e.rhs.visit(&mut |g| match g {
            Formula::DiamondAct(a, _) | Formula::BoxAct(a, _) if ta.action_index(a).is_none() => {
                err.get_or_insert(LogicError::Invalid(format!("undeclared action `{a}`")));
            }
            Formula::Constraint { clock, .. } if !ta.clocks.contains(clock) && !freeze.contains(clock) => {
                err.get_or_insert(LogicError::Invalid(format!("undeclared clock `{clock}`")));
            }
            _ => {}
        });
    }
    err.map_or(Ok(()), Err)
}

/// Strongly connected components of the variable dependency graph, each a
/// list of equation indices. Tarjan's algorithm, iterative.
pub fn dependency_sccs(m: &Mes) -> Vec<Vec<usize>> {
    let n = m.equations.len();
    let succ: Vec<Vec<usize>> = m
        .equations
        .iter()
        .map(|e| e.rhs.vars().iter().filter_map(|v| m.index_of(v)).collect())
        .collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if *next == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("scc stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// Fails with a witness cycle if some dependency cycle mixes parities.
pub fn check_alternation_free(m: &Mes) -> Result<(), LogicError> {
    for comp in dependency_sccs(m) {
        let Some(&a) = comp.first() else { continue };
        let Some(&b) = comp
            .iter()
            .find(|&&i| m.equations[i].parity != m.equations[a].parity)
        else {
            continue;
        };
        let there = path_within(m, &comp, a, b);
        let back = path_within(m, &comp, b, a);
        let mut names: Vec<&str> = there.iter().map(|&i| m.equations[i].var.as_str()).collect();
        names.extend(back.iter().skip(1).map(|&i| m.equations[i].var.as_str()));
        return Err(LogicError::Alternation {
            cycle: names.join(" -> "),
        });
    }
    Ok(())
}

fn path_within(m: &Mes, comp: &[usize], from: usize, to: usize) -> Vec<usize> {
    use std::collections::VecDeque;
    let mut prev = vec![usize::MAX; m.equations.len()];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for w in m.equations[v].rhs.vars().iter().filter_map(|x| m.index_of(x)) {
            if comp.contains(&w) && prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_mixed_parities_are_fine() {
        let m = parse_mes("X =nu a && forall(boxall(X)); Y =mu b || exists(diaall(Y))").unwrap();
        assert!(check_alternation_free(&m).is_ok());
        assert_eq!(dependency_sccs(&m).len(), 2);
    }

    #[test]
    fn nested_but_not_mutual_is_fine() {
        let m = parse_mes("X =nu Y && forall(boxall(X)); Y =mu b || exists(diaall(Y))").unwrap();
        assert!(check_alternation_free(&m).is_ok());
    }

    #[test]
    fn longer_cycle_is_reported() {
        let m = Mes::new(vec![
            Equation { var: "A".into(), parity: Parity::Nu, rhs: Formula::var("B") },
            Equation { var: "B".into(), parity: Parity::Nu, rhs: Formula::var("C") },
            Equation { var: "C".into(), parity: Parity::Mu, rhs: Formula::var("A") },
        ]);
        match check_alternation_free(&m) {
            Err(LogicError::Alternation { cycle }) => assert_eq!(cycle, "A -> B -> C -> A"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn forall_rel_rewrite() {
        let f = Formula::forall_rel(Formula::False, Formula::prop("p"));
        let g = f.rewrite_forall_rel();
        assert_eq!(g.to_string(), "forall(p) || existsrel(p; false && p)");
        let h = Formula::exists(Formula::prop("p"));
        assert_eq!(h.rewrite_forall_rel(), h);
    }

    #[test]
    fn markers_desugar_to_freeze_forms() {
        let f = Formula::and(Formula::MustAct, Formula::CanDiverge).desugar_markers();
        assert_eq!(f.to_string(), "exists(freeze _z (forall(_z < 1))) && forall(freeze _z (exists(_z >= 1)))");
    }
}
