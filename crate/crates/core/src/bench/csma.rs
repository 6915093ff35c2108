//! CSMA/CD: a bus and `n` senders.
//!
//! Clock `y` belongs to the bus, `x{i}` to sender `i`. `begin_i`, `end_i` and
//! `busy_i` synchronise sender `i` with the bus; `cd` is a broadcast from the
//! bus that every sender takes. `sigma` is the propagation delay and
//! `lambda` the transmission time.
//!
//! ```text
//! bus:    idle --begin reset y--> active --end reset y--> idle
//!         active --busy [y >= sigma]--> active
//!         active --begin [y < sigma] reset y--> collision (y < sigma)
//!         collision --cd [y < sigma] reset y--> idle
//! sender: wait|retry --begin reset x--> transm (x <= lambda)
//!         transm --end [x == lambda] reset x--> wait
//!         wait|retry --busy reset x--> retry (x < 2 sigma)
//!         any --cd reset x--> retry
//! ```
//! `begin` and `busy` out of `retry` additionally need `x < 2 sigma`.
//! At most `3^(n + 1)` product locations.

use std::collections::BTreeSet;

use super::compose::{Product, Step};
use super::fischer::subsets;
use super::{af, ag, conj, disj, leads_to, mes, SpecCase};
use crate::zones::{Atom, CmpOp};

pub const SIGMA: i64 = 26;
pub const LAMBDA: i64 = 808;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Bus {
    Idle,
    Active,
    Collision,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Sender {
    Wait,
    Transm,
    Retry,
}

pub(crate) struct Csma {
    pub n: usize,
    pub sigma: i64,
    pub lambda: i64,
}

const Y: usize = 1;

fn x(k: usize) -> usize {
    k + 2
}

fn bus_name(b: Bus) -> &'static str {
    match b {
        Bus::Idle => "idle",
        Bus::Active => "active",
        Bus::Collision => "collision",
    }
}

fn sender_name(s: Sender) -> &'static str {
    match s {
        Sender::Wait => "wait",
        Sender::Transm => "transm",
        Sender::Retry => "retry",
    }
}

impl Product for Csma {
    type State = (Bus, Vec<Sender>);

    fn name(&self) -> String {
        format!("csma{}", self.n)
    }

    fn clocks(&self) -> Vec<String> {
        std::iter::once("y".to_string()).chain((1..=self.n).map(|i| format!("x{i}"))).collect()
    }

    fn props(&self) -> Vec<String> {
        let mut out: Vec<String> = ["idle", "active", "collision"].map(String::from).to_vec();
        for i in 1..=self.n {
            out.extend(["wait", "transm", "retry"].map(|s| format!("{s}{i}")));
        }
        out
    }

    fn initial(&self) -> Self::State {
        (Bus::Idle, vec![Sender::Wait; self.n])
    }

    fn steps(&self, (bus, ss): &Self::State) -> Vec<Step<Self::State>> {
        let two_sigma = 2 * self.sigma;
        let mut out = Vec::new();
        for (k, s) in ss.iter().enumerate() {
            let i = k + 1;
            let with = |b: Bus, q: Sender| {
                let mut ss = ss.clone();
                ss[k] = q;
                (b, ss)
            };
            let from_retry = |st: Step<Self::State>| {
                if *s == Sender::Retry {
                    st.when(x(k), CmpOp::Lt, two_sigma)
                } else {
                    st
                }
            };
            match (s, bus) {
                (Sender::Wait | Sender::Retry, Bus::Idle) => {
                    out.push(from_retry(Step::new(format!("begin{i}"), with(Bus::Active, Sender::Transm)).reset(Y).reset(x(k))));
                }
                (Sender::Wait | Sender::Retry, Bus::Active) => {
                    out.push(from_retry(
                        Step::new(format!("begin{i}"), with(Bus::Collision, Sender::Transm))
                            .when(Y, CmpOp::Lt, self.sigma)
                            .reset(Y)
                            .reset(x(k)),
                    ));
                    out.push(from_retry(
                        Step::new(format!("busy{i}"), with(Bus::Active, Sender::Retry))
                            .when(Y, CmpOp::Ge, self.sigma)
                            .reset(x(k)),
                    ));
                }
                (Sender::Transm, Bus::Active) => out.push(
                    Step::new(format!("end{i}"), with(Bus::Idle, Sender::Wait))
                        .when(x(k), CmpOp::Eq, self.lambda)
                        .reset(Y)
                        .reset(x(k)),
                ),
                _ => {}
            }
        }
        if *bus == Bus::Collision {
            let mut st = Step::new("cd", (Bus::Idle, vec![Sender::Retry; ss.len()]))
                .when(Y, CmpOp::Lt, self.sigma)
                .reset(Y);
            for k in 0..ss.len() {
                st = st.reset(x(k));
            }
            out.push(st);
        }
        out
    }

    fn invariant(&self, (bus, ss): &Self::State) -> Vec<Atom> {
        let mut out = Vec::new();
        if *bus == Bus::Collision {
            out.push(Atom::new(Y, CmpOp::Lt, self.sigma));
        }
        for (k, s) in ss.iter().enumerate() {
            match s {
                Sender::Transm => out.push(Atom::new(x(k), CmpOp::Le, self.lambda)),
                Sender::Retry => out.push(Atom::new(x(k), CmpOp::Lt, 2 * self.sigma)),
                Sender::Wait => {}
            }
        }
        out
    }

    fn labels(&self, (bus, ss): &Self::State) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = ss.iter().enumerate().map(|(k, s)| format!("{}{}", sender_name(*s), k + 1)).collect();
        out.insert(bus_name(*bus).to_string());
        out
    }

    fn location_name(&self, (bus, ss): &Self::State) -> String {
        let ss: Vec<&str> = ss.iter().map(|s| sender_name(*s)).collect();
        format!("{}_{}", bus_name(*bus), ss.join("_"))
    }
}

pub fn specs(n: usize, sigma: i64) -> Vec<SpecCase> {
    let two_sigma = 2 * sigma;
    let mut long = Vec::new();
    let mut pairs = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            long.push(format!("(!transm{i} || !transm{j} || x{i} < {two_sigma} || x{j} < {two_sigma})"));
            pairs.push((i, j));
        }
    }
    // Two transmitting while a third retries; with two senders, just both
    // transmitting.
    let mut crowded = Vec::new();
    if n >= 3 {
        subsets(n, 3, &mut Vec::new(), 1, &mut |s| {
            for r in s {
                let t: Vec<usize> = s.iter().copied().filter(|i| i != r).collect();
                crowded.push(format!("(!transm{} || !transm{} || !retry{r})", t[0], t[1]));
            }
        });
    } else {
        crowded.extend(pairs.iter().map(|(i, j)| format!("(!transm{i} || !transm{j})")));
    }
    let each = |f: &dyn Fn(usize) -> String| (1..=n).map(f).collect::<Vec<_>>();
    let must_act = "exists(freeze z (forall(z < 1)))";
    vec![
        SpecCase::new("as", mes(&format!("Y =nu forall({} && boxall(Y))", conj(&long))), true),
        SpecCase::new("bs", ag(&conj(&crowded)), false),
        SpecCase::new("al", af(&conj(&each(&|i| format!("wait{i}")))), true),
        SpecCase::new("bl", af(&disj(&each(&|i| format!("retry{i}")))), false),
        SpecCase::new("m1", leads_to("retry1", "transm1"), false),
        SpecCase::new("m2", leads_to("collision", "idle"), true),
        SpecCase::new(
            "m3",
            mes(&format!(
                "Y =mu forallrel(active; active || (idle && boxall(Y))) && ({must_act} || exists(active))"
            )),
            false,
        ),
        SpecCase::new("m4", mes("Y =nu forallrel(active; active || (idle && boxall(Y)))"), true),
    ]
}
