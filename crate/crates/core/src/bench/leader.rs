//! Leader election by adoption.
//!
//! `n` processes start without a parent. In each vote some parentless
//! process `i` gets a parent `j < i`, so the smaller number always wins.
//! Once only process 1 is parentless it is the leader and the election is
//! over. One clock `y` paces the votes: each takes between `VOTE_MIN` and
//! `VOTE_MAX` time units.
//!
//! ```text
//! electing --vote_i_j [y >= VOTE_MIN] reset y--> electing   (y <= VOTE_MAX)
//! ```
//!
//! Exactly `n!` product locations: process `i` has `i` parent choices.

use std::collections::BTreeSet;

use super::compose::{Product, Step};
use super::{af, ag, conj, disj, mes, SpecCase};
use crate::zones::{Atom, CmpOp};

pub const VOTE_MIN: i64 = 1;
pub const VOTE_MAX: i64 = 2;
/// Bound of the slow-election spec.
pub const SLOW: i64 = 3;
/// Vote budget of the bounded-election spec.
pub const VOTES: usize = 3;

pub(crate) struct Leader {
    pub n: usize,
    pub vote_min: i64,
    pub vote_max: i64,
}

const Y: usize = 1;

fn done(parents: &[usize]) -> bool {
    parents.iter().skip(1).all(|p| *p > 0)
}

impl Product for Leader {
    /// `parents[k]` is the parent of process `k + 1`, 0 for none.
    type State = Vec<usize>;

    fn name(&self) -> String {
        format!("leader{}", self.n)
    }

    fn clocks(&self) -> Vec<String> {
        vec!["y".to_string()]
    }

    fn props(&self) -> Vec<String> {
        let mut out = vec!["done".to_string()];
        for i in 1..=self.n {
            out.extend([format!("root{i}"), format!("child{i}"), format!("leader{i}")]);
            out.extend((1..i).map(|j| format!("p{i}_{j}")));
        }
        out
    }

    fn initial(&self) -> Self::State {
        vec![0; self.n]
    }

    fn steps(&self, parents: &Self::State) -> Vec<Step<Self::State>> {
        if done(parents) {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (k, p) in parents.iter().enumerate() {
            if *p != 0 {
                continue;
            }
            for j in 1..=k {
                let mut next = parents.clone();
                next[k] = j;
                out.push(
                    Step::new(format!("vote{}_{j}", k + 1), next)
                        .when(Y, CmpOp::Ge, self.vote_min)
                        .reset(Y),
                );
            }
        }
        out
    }

    fn invariant(&self, parents: &Self::State) -> Vec<Atom> {
        if done(parents) {
            Vec::new()
        } else {
            vec![Atom::new(Y, CmpOp::Le, self.vote_max)]
        }
    }

    fn labels(&self, parents: &Self::State) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let finished = done(parents);
        if finished {
            out.insert("done".to_string());
        }
        for (k, p) in parents.iter().enumerate() {
            let i = k + 1;
            if *p == 0 {
                out.insert(format!("root{i}"));
                if finished {
                    out.insert(format!("leader{i}"));
                }
            } else {
                out.insert(format!("p{i}_{p}"));
                out.insert(format!("child{p}"));
            }
        }
        out
    }

    fn location_name(&self, parents: &Self::State) -> String {
        let ps: Vec<String> = parents.iter().map(|p| p.to_string()).collect();
        format!("l_{}", ps.join("_"))
    }
}

pub(crate) fn specs(n: usize, vote_max: i64) -> Vec<SpecCase> {
    let has_parent = |i: usize| disj(&(1..i).map(|j| format!("p{i}_{j}")).collect::<Vec<_>>());
    let well_formed: Vec<String> = (1..=n).map(|i| format!("(root{i} || {})", has_parent(i))).collect();
    let mut three_roots = Vec::new();
    super::fischer::subsets(n, 3, &mut Vec::new(), 1, &mut |s| {
        three_roots.push(format!("({})", disj(&s.iter().map(|i| format!("!root{i}")).collect::<Vec<_>>())));
    });
    let third = n.min(3);
    let must_act = "exists(freeze z (forall(z < 1)))";
    let mut bounded = vec!["P0 =mu done".to_string()];
    for k in 1..=VOTES {
        bounded.push(format!("P{k} =mu done || (forall(done || boxall(P{})) && {must_act})", k - 1));
    }
    bounded.reverse();
    vec![
        SpecCase::new("as", ag(&conj(&well_formed)), true),
        SpecCase::new("bs", ag(&conj(&three_roots)), n < 3),
        SpecCase::new("al", af("leader1"), true),
        // With two processes the second can only pick the first.
        SpecCase::new("bl", af(&format!("p{third}_{}", third - 1)), n < 3),
        // Process 2 can only be adopted from above, so two processes never
        // violate this.
        SpecCase::new("m1", mes("Y =nu forallrel(!root2; !root2 || (!child2 && boxall(Y)))"), n < 3),
        SpecCase::new(
            "m2",
            mes(&format!(
                "Y =nu (root{third} || Z) && forall(boxall(Y));\nZ =nu !leader{third} && forall(boxall(Z))"
            )),
            true,
        ),
        SpecCase::new(
            "m3",
            mes(&format!("E =mu freeze t (Y);\nY =mu exists((!done && t > {SLOW}) || diaall(Y))")),
            (n as i64 - 1) * vote_max > SLOW,
        ),
        SpecCase::new("m4", mes(&bounded.join(";\n")), n - 1 <= VOTES),
    ]
}
