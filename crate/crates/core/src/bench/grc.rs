//! Generalized railroad crossing: `n` trains, a controller and a gate.
//!
//! Train `i` has clock `x{i}`, the controller `w`, the gate `y`. The
//! controller tracks how many trains are near or in the crossing (derived
//! from the train states, so it needs no counter of its own).
//!
//! ```text
//! train:      far --approach_i reset x--> near (x <= NEAR_MAX)
//!             near --in_i [x > NEAR_MIN] reset x--> in (x <= IN_MAX)
//!             in --exit_i--> far
//! controller: idle|raising --approach reset w--> lowering (w <= REACT)
//!             lowering --lower--> lowered
//!             lowered --exit of the last train reset w--> raising (w <= REACT)
//!             raising --raise--> idle
//! gate:       up|going --lower reset y--> coming (y <= DOWN_TIME) --down--> down
//!             down|coming --raise reset y--> going (y <= UP_TIME) --up--> up
//! ```
//!
//! At most `16 · 3^n` product locations.

use std::collections::BTreeSet;

use super::compose::{Product, Step};
use super::{af, ag, conj, disj, leads_to, mes, SpecCase};
use crate::zones::{Atom, CmpOp};

pub const NEAR_MIN: i64 = 2;
pub const NEAR_MAX: i64 = 5;
pub const IN_MAX: i64 = 5;
pub const REACT: i64 = 1;
pub const DOWN_TIME: i64 = 1;
pub const UP_TIME: i64 = 2;
/// Bound used by the timed-response spec.
pub const RESPONSE: i64 = 30;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Train {
    Far,
    Near,
    In,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Ctl {
    Idle,
    Lowering,
    Lowered,
    Raising,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Gate {
    Up,
    Coming,
    Down,
    Going,
}

pub(crate) struct Grc {
    pub n: usize,
    pub near_min: i64,
    pub near_max: i64,
    pub in_max: i64,
    pub react: i64,
    pub down_time: i64,
    pub up_time: i64,
}

fn train_name(t: Train) -> &'static str {
    match t {
        Train::Far => "far",
        Train::Near => "near",
        Train::In => "in",
    }
}

fn ctl_name(c: Ctl) -> &'static str {
    match c {
        Ctl::Idle => "c_idle",
        Ctl::Lowering => "c_lowering",
        Ctl::Lowered => "c_lowered",
        Ctl::Raising => "c_raising",
    }
}

fn gate_name(g: Gate) -> &'static str {
    match g {
        Gate::Up => "up",
        Gate::Coming => "coming",
        Gate::Down => "down",
        Gate::Going => "going",
    }
}

impl Grc {
    fn z(&self) -> usize {
        self.n + 1
    }

    fn y(&self) -> usize {
        self.n + 2
    }
}

impl Product for Grc {
    type State = (Vec<Train>, Ctl, Gate);

    fn name(&self) -> String {
        format!("grc{}", self.n)
    }

    fn clocks(&self) -> Vec<String> {
        let mut out: Vec<String> = (1..=self.n).map(|i| format!("x{i}")).collect();
        out.extend(["w".to_string(), "y".to_string()]);
        out
    }

    fn props(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 1..=self.n {
            out.extend(["far", "near", "in"].map(|s| format!("{s}{i}")));
        }
        out.extend(["c_idle", "c_lowering", "c_lowered", "c_raising", "up", "coming", "down", "going"].map(String::from));
        out
    }

    fn initial(&self) -> Self::State {
        (vec![Train::Far; self.n], Ctl::Idle, Gate::Up)
    }

    fn steps(&self, (ts, ctl, gate): &Self::State) -> Vec<Step<Self::State>> {
        let (z, y) = (self.z(), self.y());
        let mut out = Vec::new();
        for (k, t) in ts.iter().enumerate() {
            let (i, x) = (k + 1, k + 1);
            let mut moved = ts.clone();
            match t {
                Train::Far => {
                    moved[k] = Train::Near;
                    let mut st = Step::new(format!("approach{i}"), (moved, Ctl::Lowering, *gate)).reset(x);
                    match ctl {
                        Ctl::Idle | Ctl::Raising => st = st.reset(z),
                        Ctl::Lowering | Ctl::Lowered => st.target.1 = *ctl,
                    }
                    out.push(st);
                }
                Train::Near => {
                    moved[k] = Train::In;
                    out.push(Step::new(format!("in{i}"), (moved, *ctl, *gate)).when(x, CmpOp::Gt, self.near_min).reset(x));
                }
                Train::In => {
                    moved[k] = Train::Far;
                    let empty = moved.iter().all(|t| *t == Train::Far);
                    let mut st = Step::new(format!("exit{i}"), (moved, *ctl, *gate));
                    if empty && matches!(ctl, Ctl::Lowering | Ctl::Lowered) {
                        st.target.1 = Ctl::Raising;
                        st = st.reset(z);
                    }
                    out.push(st);
                }
            }
        }
        match ctl {
            Ctl::Lowering => {
                let mut st = Step::new("lower", (ts.clone(), Ctl::Lowered, *gate));
                if matches!(gate, Gate::Up | Gate::Going) {
                    st.target.2 = Gate::Coming;
                    st = st.reset(y);
                }
                out.push(st);
            }
            Ctl::Raising => {
                let mut st = Step::new("raise", (ts.clone(), Ctl::Idle, *gate));
                if matches!(gate, Gate::Down | Gate::Coming) {
                    st.target.2 = Gate::Going;
                    st = st.reset(y);
                }
                out.push(st);
            }
            Ctl::Idle | Ctl::Lowered => {}
        }
        match gate {
            Gate::Coming => out.push(Step::new("down", (ts.clone(), *ctl, Gate::Down))),
            Gate::Going => out.push(Step::new("up", (ts.clone(), *ctl, Gate::Up))),
            Gate::Up | Gate::Down => {}
        }
        out
    }

    fn invariant(&self, (ts, ctl, gate): &Self::State) -> Vec<Atom> {
        let mut out: Vec<Atom> = ts
            .iter()
            .enumerate()
            .filter_map(|(k, t)| match t {
                Train::Near => Some(Atom::new(k + 1, CmpOp::Le, self.near_max)),
                Train::In => Some(Atom::new(k + 1, CmpOp::Le, self.in_max)),
                Train::Far => None,
            })
            .collect();
        if matches!(ctl, Ctl::Lowering | Ctl::Raising) {
            out.push(Atom::new(self.z(), CmpOp::Le, self.react));
        }
        match gate {
            Gate::Coming => out.push(Atom::new(self.y(), CmpOp::Le, self.down_time)),
            Gate::Going => out.push(Atom::new(self.y(), CmpOp::Le, self.up_time)),
            Gate::Up | Gate::Down => {}
        }
        out
    }

    fn labels(&self, (ts, ctl, gate): &Self::State) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = ts.iter().enumerate().map(|(k, t)| format!("{}{}", train_name(*t), k + 1)).collect();
        out.insert(ctl_name(*ctl).to_string());
        out.insert(gate_name(*gate).to_string());
        out
    }

    fn location_name(&self, (ts, ctl, gate): &Self::State) -> String {
        let ts: Vec<&str> = ts.iter().map(|t| train_name(*t)).collect();
        format!("{}_{}_{}", ts.join("_"), ctl_name(*ctl), gate_name(*gate))
    }
}

pub(crate) fn specs(n: usize, response: i64) -> Vec<SpecCase> {
    let each = |f: &dyn Fn(usize) -> String| (1..=n).map(f).collect::<Vec<_>>();
    let approached = disj(&each(&|i| format!("near{i}")));
    let mut pairs = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            pairs.push(format!("(!in{i} || !in{j})"));
        }
    }
    let must_act = "exists(freeze z (forall(z < 1)))";
    let up_soon = format!("(up && t <= {response})");
    let until_up = format!("forallrel({up_soon}; {up_soon} || boxall(Z)) && ({must_act} || exists({up_soon}))");
    vec![
        SpecCase::new("as", ag(&conj(&each(&|i| format!("(!in{i} || down)")))), true),
        SpecCase::new("bs", ag("!going || !c_lowering"), false),
        SpecCase::new("al", af("up"), true),
        SpecCase::new("bl", af(&approached), false),
        SpecCase::new("m1", leads_to("down", "up"), false),
        SpecCase::new(
            "m2",
            mes(&format!("Y =nu forall((!down || freeze t (Z)) && boxall(Y));\nZ =mu {until_up}")),
            false,
        ),
        // A single train is trivially alone in the crossing.
        SpecCase::new("m3", ag(&conj(&pairs)), n < 2),
        SpecCase::new(
            "m4",
            mes(&format!("Y =nu forallrel({approached}; {approached} || (up && boxall(Y)))")),
            true,
        ),
        SpecCase::new(
            "m4ap",
            mes(&format!(
                "Y =mu forallrel({approached}; {approached} || (up && boxall(Y))) && ({must_act} || exists({approached}))"
            )),
            false,
        ),
    ]
}
