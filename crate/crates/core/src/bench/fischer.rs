//! Fischer's mutual exclusion protocol.
//!
//! Process `i` owns clock `x{i}`; the shared variable `id` ranges over
//! `0..=n` and is part of the discrete state. Steps interleave; `DELAY` is the
//! bound on the write after the test, `WAIT` the (strictly larger) time a
//! process waits before checking it still owns `id`:
//!
//! ```text
//! idle --try_i  [id == 0]       reset x--> req     (req: x <= DELAY)
//! req  --set_i  [x <= DELAY]    id := i, reset x --> wait
//! wait --enter_i [x > WAIT, id == i] --> cs
//! wait --fail_i  [id != i]      --> idle
//! cs   --exit_i                 id := 0 --> idle
//! ```
//!
//! At most `4^n (n + 1)` product locations; fewer are reachable.

use std::collections::BTreeSet;

use super::compose::{Product, Step};
use super::{ag, af, conj, disj, leads_to, mes, SpecCase};
use crate::zones::{Atom, CmpOp};

pub const DELAY: i64 = 1;
pub const WAIT: i64 = 2;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum P {
    Idle,
    Req,
    Wait,
    Cs,
}

const PHASES: [(P, &str); 4] = [(P::Idle, "idle"), (P::Req, "req"), (P::Wait, "wait"), (P::Cs, "cs")];

pub(crate) struct Fischer {
    pub n: usize,
    pub delay: i64,
    pub wait: i64,
}

impl Product for Fischer {
    type State = (Vec<P>, usize);

    fn name(&self) -> String {
        format!("fischer{}", self.n)
    }

    fn clocks(&self) -> Vec<String> {
        (1..=self.n).map(|i| format!("x{i}")).collect()
    }

    fn props(&self) -> Vec<String> {
        (1..=self.n)
            .flat_map(|i| PHASES.iter().map(move |(_, s)| format!("{s}{i}")))
            .collect()
    }

    fn initial(&self) -> Self::State {
        (vec![P::Idle; self.n], 0)
    }

    fn steps(&self, (ps, id): &Self::State) -> Vec<Step<Self::State>> {
        let mut out = Vec::new();
        for (k, p) in ps.iter().enumerate() {
            let (i, x) = (k + 1, k + 1);
            let to = |q: P, id: usize| {
                let mut ps = ps.clone();
                ps[k] = q;
                (ps, id)
            };
            match p {
                P::Idle if *id == 0 => out.push(Step::new(format!("try{i}"), to(P::Req, 0)).reset(x)),
                P::Idle => {}
                P::Req => out.push(Step::new(format!("set{i}"), to(P::Wait, i)).when(x, CmpOp::Le, self.delay).reset(x)),
                P::Wait if *id == i => out.push(Step::new(format!("enter{i}"), to(P::Cs, i)).when(x, CmpOp::Gt, self.wait)),
                P::Wait => out.push(Step::new(format!("fail{i}"), to(P::Idle, *id))),
                P::Cs => out.push(Step::new(format!("exit{i}"), to(P::Idle, 0))),
            }
        }
        out
    }

    fn invariant(&self, (ps, _): &Self::State) -> Vec<Atom> {
        ps.iter()
            .enumerate()
            .filter(|(_, p)| **p == P::Req)
            .map(|(k, _)| Atom::new(k + 1, CmpOp::Le, self.delay))
            .collect()
    }

    fn labels(&self, (ps, _): &Self::State) -> BTreeSet<String> {
        ps.iter().enumerate().map(|(k, p)| format!("{}{}", phase(*p), k + 1)).collect()
    }

    fn location_name(&self, (ps, id): &Self::State) -> String {
        let ps: Vec<&str> = ps.iter().map(|p| phase(*p)).collect();
        format!("{}_id{id}", ps.join("_"))
    }
}

fn phase(p: P) -> &'static str {
    PHASES.iter().find(|(q, _)| *q == p).map(|(_, s)| *s).unwrap_or("?")
}

pub(crate) fn specs(n: usize) -> Vec<SpecCase> {
    let each = |f: &dyn Fn(usize) -> String| (1..=n).map(f).collect::<Vec<_>>();
    let mut pairs = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            pairs.push(format!("(!cs{i} || !cs{j})"));
        }
    }
    // Some process outside `wait` in every five-element subset.
    let mut five = Vec::new();
    subsets(n, 5, &mut Vec::new(), 1, &mut |s| {
        five.push(format!("({})", disj(&s.iter().map(|i| format!("!wait{i}")).collect::<Vec<_>>())));
    });
    let some_cs = disj(&each(&|i| format!("cs{i}")));
    let busy = |i: usize| format!("(req{i} || wait{i} || cs{i})");
    let third = n.min(3);
    let must_act = "exists(freeze z (forall(z < 1)))";
    let mut bounded = vec![format!("P0 =mu {some_cs}")];
    for k in 1..=5 {
        bounded.push(format!(
            "P{k} =mu {some_cs} || (forall({some_cs} || boxall(P{})) && {must_act})",
            k - 1
        ));
    }
    bounded.reverse();
    vec![
        SpecCase::new("as", ag(&conj(&pairs)), true),
        SpecCase::new("bs", ag(&conj(&five)), n <= 4),
        SpecCase::new("al", af(&conj(&each(&|i| format!("idle{i}")))), true),
        SpecCase::new("bl", af(&some_cs), false),
        SpecCase::new("m1", leads_to(&busy(1), "cs1"), false),
        SpecCase::new("m2", leads_to(&busy(third), &format!("cs{third}")), false),
        SpecCase::new("m3", mes("Y =mu existsrel(!wait1; cs1 || (!wait1 && diaall(Y)))"), false),
        SpecCase::new("m4", mes(&bounded.join(";\n")), false),
    ]
}

/// Calls `f` with every `k`-subset of `from..=n`, in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize, acc: &mut Vec<usize>, from: usize, f: &mut impl FnMut(&[usize])) {
    if acc.len() == k {
        f(acc);
        return;
    }
    for i in from..=n {
        acc.push(i);
        subsets(n, k, acc, i + 1, f);
        acc.pop();
    }
}
