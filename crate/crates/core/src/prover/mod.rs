//! Proof search over sequents `(l, Z) ⊢ ψ`.
//!
//! Every sequent evaluation returns its largest placeholder: the exact
//! sub-federation of `Z` on which `ψ` holds. Variables are solved on the
//! fly, one strongly connected block at a time, over keys
//! `(location, variable, extrapolated zone)`; a key revisited while its
//! block is still being solved is a leaf that reads the current
//! approximation (starting from everything for ν and nothing for μ), and
//! dependent keys are re-evaluated until no approximation changes.

mod arena;
mod proof;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::automaton::{ModelError, TimedAutomaton};
use crate::logic::{check_against, check_alternation_free, dependency_sccs, Formula, LogicError, Mes, Parity};
use crate::oracle::ceilings;
use crate::zones::{ClockSet, Dbm, Federation};

use arena::{Arena, Context, Node, NodeId};
pub use proof::ProofNode;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProverConfig {
    pub use_derived_rules: bool,
    pub use_memo: bool,
    pub use_invariant_specialization: bool,
    pub extrapolation: bool,
    /// Bound on nested sequent evaluations.
    pub max_depth: Option<usize>,
    /// Bound on distinct variable keys.
    pub max_keys: usize,
    pub record_proof: bool,
    pub timeout: Option<Duration>,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            use_derived_rules: true,
            use_memo: true,
            use_invariant_specialization: true,
            extrapolation: true,
            max_depth: None,
            max_keys: 5_000_000,
            record_proof: false,
            timeout: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProverError {
    #[error("proof search exceeded the depth bound of {0}")]
    DepthExceeded(usize),
    #[error("proof search exceeded {0} variable keys")]
    KeyLimit(usize),
    #[error("timed out after {0:?}")]
    Timeout(Duration),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Stats {
    pub rules: BTreeMap<&'static str, u64>,
    pub rule_total: u64,
    pub memo_hits: u64,
    pub sequents: u64,
    pub keys: u64,
    pub sessions: u64,
    pub iterations: u64,
}

impl Stats {
    pub fn rule(&self, name: &str) -> u64 {
        self.rules.get(name).copied().unwrap_or(0)
    }

    /// `key=value` lines.
    pub fn render(&self) -> String {
        let mut out = format!(
            "rules={}\nmemo_hits={}\nsequents={}\nkeys={}\nsessions={}\niterations={}\n",
            self.rule_total, self.memo_hits, self.sequents, self.keys, self.sessions, self.iterations
        );
        for (r, n) in &self.rules {
            out.push_str(&format!("rule.{r}={n}\n"));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub valid: bool,
    pub stats: Stats,
    pub proof: Option<ProofNode>,
}

pub mod rules {
    pub const EMPTY: &str = "empty";
    pub const TT: &str = "axiom-tt";
    pub const FF: &str = "axiom-ff";
    pub const PROP: &str = "axiom-p";
    pub const NEG_PROP: &str = "axiom-negp";
    pub const CC: &str = "axiom-cc";
    pub const VAR: &str = "var";
    pub const UNFOLD: &str = "unfold";
    pub const LEAF_NU: &str = "leaf-nu";
    pub const LEAF_MU: &str = "leaf-mu";
    pub const MEMO: &str = "memo";
    pub const AND: &str = "and";
    pub const OR_S: &str = "or_s";
    pub const OR_C: &str = "or_c";
    pub const DIA_ACT: &str = "dia_act";
    pub const BOX_ACT: &str = "box_act";
    pub const DIA_ALL: &str = "dia_all";
    pub const BOX_ALL: &str = "box_all";
    pub const EXISTS: &str = "exists_t";
    pub const FORALL: &str = "forall_t";
    pub const EXISTS_REL: &str = "exists_r";
    pub const FORALL_RO1: &str = "forall_ro1";
    pub const FORALL_RO2: &str = "forall_ro2";
    pub const FORALL_RO3: &str = "forall_ro3";
    pub const FREEZE: &str = "freeze";
    pub const MUST_ACT: &str = "must_act";
    pub const CAN_DIVERGE: &str = "can_diverge";
}

struct Key {
    loc: usize,
    var: usize,
    zone: Federation,
    value: Federation,
    dependents: BTreeSet<usize>,
    done: bool,
    queued: bool,
    tree: Option<ProofNode>,
}

struct Session {
    scc: usize,
    worklist: Vec<usize>,
    keys: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Guarded {
    InvAnd,
    NotInvOr,
}

pub struct Prover<'a> {
    ta: &'a TimedAutomaton,
    mes: Mes,
    cfg: ProverConfig,
    clocks: Arc<ClockSet>,
    /// Extrapolation ceilings per location, index 0 unused.
    ceiling: Vec<Vec<i64>>,
    arena: Arena,
    rhs: Vec<NodeId>,
    scc_of: Vec<usize>,
    inv: Vec<Federation>,
    guards: Vec<Federation>,
    inv_nodes: HashMap<(usize, Guarded, NodeId), NodeId>,
    keys: Vec<Key>,
    key_index: HashMap<(usize, usize, Dbm), usize>,
    by_var: HashMap<(usize, usize), Vec<usize>>,
    sessions: Vec<Session>,
    current: Vec<usize>,
    frames: Vec<Vec<ProofNode>>,
    evals: Vec<u64>,
    stats: Stats,
    depth: usize,
    started: Instant,
}

impl<'a> Prover<'a> {
    pub fn new(ta: &'a TimedAutomaton, mes: &Mes, cfg: ProverConfig) -> Result<Prover<'a>, ProverError> {
        ta.validate()?;
        check_alternation_free(mes)?;
        check_against(mes, ta)?;
        let used = if cfg.use_derived_rules {
            mes.clone()
        } else {
            mes.rewrite_forall_rel()
        };
        let freeze = mes.freeze_clocks();
        let clocks = ta.clock_set(&freeze);
        // Formula constraints may be read anywhere, automaton ones only until
        // the next reset.
        let global = ceilings(ta, mes, &freeze);
        let ceiling = ta
            .local_max_constants()
            .into_iter()
            .map(|local| {
                let mut k = local;
                k.extend(std::iter::repeat(0).take(freeze.len()));
                for (clock, c) in mes.clock_constants() {
                    if let Some(id) = clocks.lookup(&clock) {
                        k[id.index] = k[id.index].max(c);
                    }
                }
                debug_assert!(k[1..].iter().zip(&global).all(|(a, b)| a <= b));
                k
            })
            .collect();
        let mut arena = Arena::new();
        let mut rhs = Vec::new();
        {
            let ctx = Context {
                ta,
                mes: &used,
                clocks: &clocks,
            };
            for e in &used.equations {
                rhs.push(arena.intern(&e.rhs, &ctx)?);
            }
        }
        let mut scc_of = vec![0; used.equations.len()];
        for (c, comp) in dependency_sccs(&used).iter().enumerate() {
            for &i in comp {
                scc_of[i] = c;
            }
        }
        let inv = ta.locations.iter().map(|l| l.invariant.to_federation(&clocks)).collect();
        let guards = ta.edges.iter().map(|e| e.guard.to_federation(&clocks)).collect();
        Ok(Prover {
            ta,
            mes: used,
            cfg,
            clocks,
            ceiling,
            arena,
            rhs,
            scc_of,
            inv,
            guards,
            inv_nodes: HashMap::new(),
            keys: Vec::new(),
            key_index: HashMap::new(),
            by_var: HashMap::new(),
            sessions: Vec::new(),
            current: Vec::new(),
            frames: Vec::new(),
            evals: Vec::new(),
            stats: Stats::default(),
            depth: 0,
            started: Instant::now(),
        })
    }

    pub fn clocks(&self) -> &Arc<ClockSet> {
        &self.clocks
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn config(&self) -> &ProverConfig {
        &self.cfg
    }

    /// Number of sequent evaluations of `f` so far.
    pub fn evaluations(&self, f: &Formula) -> u64 {
        let ctx = Context {
            ta: self.ta,
            mes: &self.mes,
            clocks: &self.clocks,
        };
        self.arena
            .find(f, &ctx)
            .and_then(|id| self.evals.get(id).copied())
            .unwrap_or(0)
    }

    /// Zone over the prover's clocks from constraint text such as
    /// `x1 >= 1 && z < 2`.
    pub fn zone(&self, text: &str) -> Result<Federation, ModelError> {
        let cc = crate::automaton::parse_constraint(text, self.clocks.names())?;
        Ok(cc.to_federation(&self.clocks))
    }

    /// Decides the entry variable at the initial state.
    pub fn prove(&mut self) -> Result<Verdict, ProverError> {
        self.started = Instant::now();
        let origin = Federation::origin(&self.clocks);
        let entry = self.intern(&Formula::var(self.mes.entry()))?;
        let tracing = self.cfg.record_proof;
        if tracing {
            self.frames.push(Vec::new());
        }
        let result = self.sat(self.ta.initial, entry, &origin);
        let proof = if tracing { self.frames.pop().and_then(|mut f| f.pop()) } else { None };
        let result = result?;
        Ok(Verdict {
            valid: !result.is_empty(),
            stats: self.stats.clone(),
            proof,
        })
    }

    /// The largest sub-federation of `zone` on which `f` holds at `loc`.
    pub fn solve_placeholder(&mut self, loc: usize, zone: &Federation, f: &Formula) -> Result<Federation, ProverError> {
        self.started = Instant::now();
        let id = self.intern(f)?;
        self.sat(loc, id, zone)
    }

    /// Like [`Prover::solve_placeholder`], also returning the proof tree.
    pub fn prove_sequent(
        &mut self,
        loc: usize,
        zone: &Federation,
        f: &Formula,
    ) -> Result<(Federation, ProofNode), ProverError> {
        let saved = self.cfg.record_proof;
        self.cfg.record_proof = true;
        self.frames.push(Vec::new());
        let result = self.solve_placeholder(loc, zone, f);
        let node = self.frames.pop().and_then(|mut v| v.pop());
        self.cfg.record_proof = saved;
        Ok((result?, node.expect("traced sequent")))
    }

    /// Valuations from which time can diverge without leaving the
    /// invariant.
    pub fn elapse_forever(&self, loc: usize, zone: &Federation) -> Federation {
        if self.ta.locations[loc].invariant.is_trivial() {
            zone.clone()
        } else {
            zone.subtract(&self.inv[loc])
        }
    }

    /// Valuations from which some delay leaves less than one time unit
    /// before the invariant forces an action.
    pub fn must_act_within_one(&self, loc: usize, zone: &Federation) -> Federation {
        if self.ta.locations[loc].invariant.is_trivial() {
            Federation::empty(&self.clocks)
        } else {
            zone.intersect(&self.inv[loc])
        }
    }

    fn intern(&mut self, f: &Formula) -> Result<NodeId, LogicError> {
        let f = if self.cfg.use_derived_rules {
            f.clone()
        } else {
            f.rewrite_forall_rel()
        };
        let ctx = Context {
            ta: self.ta,
            mes: &self.mes,
            clocks: &self.clocks,
        };
        self.arena.intern(&f, &ctx)
    }

    /// `Inv ∧ x` or `¬Inv ∨ x` as formula nodes, for the unspecialized time
    /// rules.
    fn guarded(&mut self, loc: usize, kind: Guarded, x: NodeId) -> NodeId {
        if self.cfg.use_invariant_specialization || self.ta.locations[loc].invariant.is_trivial() {
            return x;
        }
        if let Some(&id) = self.inv_nodes.get(&(loc, kind, x)) {
            return id;
        }
        let atoms = &self.ta.locations[loc].invariant.atoms;
        let name = |c: usize| self.clocks.name(c).to_string();
        let inner = self.arena.formula(x).clone();
        let f = match kind {
            Guarded::InvAnd => atoms
                .iter()
                .rev()
                .fold(inner, |acc, a| Formula::and(Formula::constraint(&name(a.clock), a.op, a.value), acc)),
            Guarded::NotInvOr => atoms.iter().rev().fold(inner, |acc, a| {
                Formula::or(Formula::constraint(&name(a.clock), a.op.negate().expect("invariants are upper bounds"), a.value), acc)
            }),
        };
        let ctx = Context {
            ta: self.ta,
            mes: &self.mes,
            clocks: &self.clocks,
        };
        let id = self.arena.intern(&f, &ctx).expect("invariant clocks are declared");
        self.inv_nodes.insert((loc, kind, x), id);
        id
    }

    /// The delays a time rule quantifies over.
    fn time_frame(&self, loc: usize, zone: &Federation) -> Federation {
        let s = zone.succ();
        if self.cfg.use_invariant_specialization {
            s.intersect(&self.inv[loc])
        } else {
            s
        }
    }

    fn tick(&mut self, rule: &'static str) -> Result<(), ProverError> {
        *self.stats.rules.entry(rule).or_insert(0) += 1;
        self.stats.rule_total += 1;
        if self.stats.rule_total % 256 == 0 {
            if let Some(t) = self.cfg.timeout {
                if self.started.elapsed() > t {
                    return Err(ProverError::Timeout(t));
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self, node: ProofNode) {
        if let Some(top) = self.frames.last_mut() {
            top.push(node);
        }
    }

    fn node(&self, rule: &'static str, loc: usize, f: NodeId, zone: &Federation, result: &Federation) -> ProofNode {
        ProofNode {
            rule,
            loc,
            location: self.ta.locations[loc].name.clone(),
            formula: f,
            formula_text: self.arena.formula(f).to_string(),
            zone: zone.clone(),
            result: result.clone(),
            children: Vec::new(),
            edges: Vec::new(),
            key: None,
        }
    }

    fn sat(&mut self, loc: usize, f: NodeId, zone: &Federation) -> Result<Federation, ProverError> {
        if self.evals.len() <= f {
            self.evals.resize(self.arena.len(), 0);
        }
        self.evals[f] += 1;
        self.stats.sequents += 1;
        if zone.is_empty() {
            self.tick(rules::EMPTY)?;
            if self.cfg.record_proof {
                let n = self.node(rules::EMPTY, loc, f, zone, zone);
                self.emit(n);
            }
            return Ok(zone.clone());
        }
        self.depth += 1;
        if let Some(max) = self.cfg.max_depth {
            if self.depth > max {
                self.depth -= 1;
                return Err(ProverError::DepthExceeded(max));
            }
        }
        if self.cfg.record_proof {
            self.frames.push(Vec::new());
        }
        let out = self.apply(loc, f, zone);
        self.depth -= 1;
        let (rule, result, edges) = match out {
            Ok(v) => v,
            Err(e) => {
                if self.cfg.record_proof {
                    self.frames.pop();
                }
                return Err(e);
            }
        };
        if self.cfg.record_proof {
            let children = self.frames.pop().unwrap_or_default();
            let mut n = self.node(rule, loc, f, zone, &result);
            n.children = children;
            n.edges = edges;
            self.emit(n);
        }
        Ok(result)
    }

    fn apply(
        &mut self,
        loc: usize,
        f: NodeId,
        zone: &Federation,
    ) -> Result<(&'static str, Federation, Vec<usize>), ProverError> {
        use rules::*;
        let node = self.arena.node(f).clone();
        let rule = match &node {
            Node::True => TT,
            Node::False => FF,
            Node::Prop(_) => PROP,
            Node::NegProp(_) => NEG_PROP,
            Node::Cc(_) => CC,
            Node::Var(_) => VAR,
            Node::And(..) => AND,
            Node::Or(..) if self.cfg.use_derived_rules => OR_S,
            Node::Or(..) => OR_C,
            Node::DiaAct(..) => DIA_ACT,
            Node::BoxAct(..) => BOX_ACT,
            Node::DiaAll(_) => DIA_ALL,
            Node::BoxAll(_) => BOX_ALL,
            Node::Exists(_) => EXISTS,
            Node::Forall(_) => FORALL,
            Node::ExistsRel(..) => EXISTS_REL,
            Node::ForallRel(..) => FORALL_RO3,
            Node::Freeze(..) => FREEZE,
            Node::MustAct => MUST_ACT,
            Node::CanDiverge => CAN_DIVERGE,
        };
        if !matches!(node, Node::ForallRel(..)) {
            self.tick(rule)?;
        }
        let empty = || Federation::empty(zone.clocks());
        let result = match node {
            Node::True => zone.clone(),
            Node::False => empty(),
            Node::Prop(p) => {
                if self.ta.has_label(loc, &p) {
                    zone.clone()
                } else {
                    empty()
                }
            }
            Node::NegProp(p) => {
                if self.ta.has_label(loc, &p) {
                    empty()
                } else {
                    zone.clone()
                }
            }
            Node::Cc(a) => zone.intersect_atoms(&[a]),
            Node::Var(v) => {
                let mut out = empty();
                for d in zone.zones().to_vec() {
                    out = out.union(&self.unfold(loc, f, v, &d)?);
                }
                out
            }
            Node::And(a, b) => {
                let r = self.sat(loc, a, zone)?;
                self.sat(loc, b, &r)?
            }
            Node::Or(a, b) => {
                let r1 = self.sat(loc, a, zone)?;
                let rest = if self.cfg.use_derived_rules {
                    zone.subtract(&r1)
                } else {
                    zone.clone()
                };
                let r2 = self.sat(loc, b, &rest)?;
                r1.union(&r2)
            }
            Node::DiaAct(act, x) => return self.action_rule(DIA_ACT, loc, zone, Some(act), x, true),
            Node::BoxAct(act, x) => return self.action_rule(BOX_ACT, loc, zone, Some(act), x, false),
            Node::DiaAll(x) => return self.action_rule(DIA_ALL, loc, zone, None, x, true),
            Node::BoxAll(x) => return self.action_rule(BOX_ALL, loc, zone, None, x, false),
            Node::Exists(x) => {
                let s = self.time_frame(loc, zone);
                let x = self.guarded(loc, Guarded::InvAnd, x);
                let r = self.sat(loc, x, &s)?;
                zone.intersect(&r.pred())
            }
            Node::Forall(x) => {
                let s = self.time_frame(loc, zone);
                let x = self.guarded(loc, Guarded::NotInvOr, x);
                let r = self.sat(loc, x, &s)?;
                zone.subtract(&s.subtract(&r).pred())
            }
            Node::ExistsRel(a, b) => {
                let s = self.time_frame(loc, zone);
                let b = self.guarded(loc, Guarded::InvAnd, b);
                let p2 = self.sat(loc, b, &s)?;
                let before = s.intersect(&p2.pred_strict());
                let p1 = self.sat(loc, a, &before)?;
                zone.intersect(&Federation::timed_until(&p2, &before.subtract(&p1)))
            }
            Node::ForallRel(a, b) => {
                let s = self.time_frame(loc, zone);
                let a = self.guarded(loc, Guarded::InvAnd, a);
                let b = self.guarded(loc, Guarded::NotInvOr, b);
                let p2 = self.sat(loc, b, &s)?;
                let p1 = self.sat(loc, a, &p2)?;
                let always = zone.subtract(&s.subtract(&p2).pred());
                let (rule, result) = if p1.is_empty() || s.is_subset(&p2) {
                    (FORALL_RO1, always)
                } else if zone.intersect(&self.inv[loc]).is_subset(&p1) {
                    (FORALL_RO2, zone.clone())
                } else {
                    let released = zone.intersect(&Federation::timed_until(&p1, &s.subtract(&p2)));
                    (FORALL_RO3, always.union(&released))
                };
                self.tick(rule)?;
                return Ok((rule, result, Vec::new()));
            }
            Node::Freeze(z, x) => {
                let frozen = zone.reset_unchecked(&[z]);
                let r = self.sat(loc, x, &frozen)?;
                zone.intersect(&r.reset_preimage_unchecked(&[z]))
            }
            Node::MustAct => self.must_act_within_one(loc, zone),
            Node::CanDiverge => self.elapse_forever(loc, zone),
        };
        Ok((rule, result, Vec::new()))
    }

    /// Edges from `loc` (optionally restricted to one action) with their
    /// enabled source zone and admissible target zone. States outside the
    /// source invariant take no transitions.
    pub(crate) fn successors(
        &self,
        loc: usize,
        zone: &Federation,
        act: Option<usize>,
    ) -> Vec<(usize, Federation, Federation)> {
        let mut out = Vec::new();
        for (i, e) in self.ta.edges.iter().enumerate() {
            if e.source != loc || act.is_some_and(|a| a != e.action) {
                continue;
            }
            let enabled = zone.intersect(&self.guards[i]).intersect(&self.inv[loc]);
            if enabled.is_empty() {
                continue;
            }
            let target = enabled.reset_unchecked(&e.resets).intersect(&self.inv[e.target]);
            if target.is_empty() {
                continue;
            }
            out.push((i, enabled, target));
        }
        out
    }

    fn action_rule(
        &mut self,
        rule: &'static str,
        loc: usize,
        zone: &Federation,
        act: Option<usize>,
        x: NodeId,
        diamond: bool,
    ) -> Result<(&'static str, Federation, Vec<usize>), ProverError> {
        let mut acc = Federation::empty(zone.clocks());
        let mut edges = Vec::new();
        for (i, enabled, target) in self.successors(loc, zone, act) {
            let e = &self.ta.edges[i];
            let (tgt, resets) = (e.target, e.resets.clone());
            let r = self.sat(tgt, x, &target)?;
            let pre = if diamond { r } else { target.subtract(&r) };
            acc = acc.union(&enabled.intersect(&pre.reset_preimage_unchecked(&resets)));
            edges.push(i);
        }
        let result = if diamond { acc } else { zone.subtract(&acc) };
        Ok((rule, result, edges))
    }

    fn find_key(&self, loc: usize, var: usize, zone: &Dbm) -> Option<usize> {
        if let Some(&k) = self.key_index.get(&(loc, var, zone.clone())) {
            return Some(k);
        }
        let in_session = self.sessions.last().filter(|s| s.scc == self.scc_of[var]);
        self.by_var.get(&(loc, var))?.iter().copied().find(|&k| {
            let key = &self.keys[k];
            let usable = if key.done { self.cfg.use_memo } else { in_session.is_some() };
            usable && key.zone.zones().iter().any(|d| zone.is_subset_of(d))
        })
    }

    fn new_key(&mut self, loc: usize, var: usize, dbm: Dbm) -> Result<usize, ProverError> {
        if self.keys.len() >= self.cfg.max_keys {
            return Err(ProverError::KeyLimit(self.cfg.max_keys));
        }
        let zone = Federation::from_dbm(&self.clocks, dbm.clone());
        let value = match self.mes.equations[var].parity {
            Parity::Nu => zone.clone(),
            Parity::Mu => Federation::empty(&self.clocks),
        };
        let id = self.keys.len();
        self.keys.push(Key {
            loc,
            var,
            zone,
            value,
            dependents: BTreeSet::new(),
            done: false,
            queued: true,
            tree: None,
        });
        self.key_index.insert((loc, var, dbm), id);
        self.by_var.entry((loc, var)).or_default().push(id);
        self.stats.keys += 1;
        Ok(id)
    }

    fn leaf_rule(&self, var: usize) -> &'static str {
        match self.mes.equations[var].parity {
            Parity::Nu => rules::LEAF_NU,
            Parity::Mu => rules::LEAF_MU,
        }
    }

    fn unfold(&mut self, loc: usize, f: NodeId, var: usize, dbm: &Dbm) -> Result<Federation, ProverError> {
        let here = Federation::from_dbm(&self.clocks, dbm.clone());
        let key_zone = if self.cfg.extrapolation {
            dbm.extrapolate(&self.ceiling[loc])
        } else {
            dbm.clone()
        };
        if let Some(k) = self.find_key(loc, var, &key_zone) {
            // Without memoization only sequents on the current path are
            // leaves; other in-session keys are derived again.
            if !self.cfg.use_memo && !self.keys[k].done && !self.current.contains(&k) {
                return self.rederive(k, loc, f, &here);
            }
            let rule = if self.keys[k].done {
                self.stats.memo_hits += 1;
                rules::MEMO
            } else {
                if let Some(&c) = self.current.last() {
                    self.keys[k].dependents.insert(c);
                }
                self.leaf_rule(var)
            };
            self.tick(rule)?;
            let result = here.intersect(&self.keys[k].value);
            if self.cfg.record_proof {
                let mut n = self.node(rule, loc, f, &here, &result);
                n.key = Some(k);
                self.emit(n);
            }
            return Ok(result);
        }
        let scc = self.scc_of[var];
        if self.sessions.last().is_some_and(|s| s.scc == scc) {
            let k = self.new_key(loc, var, key_zone)?;
            self.sessions.last_mut().expect("active session").keys.push(k);
            if !self.cfg.use_memo {
                return self.rederive(k, loc, f, &here);
            }
            if let Some(&c) = self.current.last() {
                self.keys[k].dependents.insert(c);
            }
            self.sessions.last_mut().expect("active session").worklist.push(k);
            let rule = self.leaf_rule(var);
            self.tick(rule)?;
            let result = here.intersect(&self.keys[k].value);
            if self.cfg.record_proof {
                let mut n = self.node(rule, loc, f, &here, &result);
                n.key = Some(k);
                self.emit(n);
            }
            return Ok(result);
        }
        self.tick(rules::UNFOLD)?;
        let root = self.new_key(loc, var, key_zone)?;
        self.sessions.push(Session {
            scc,
            worklist: vec![root],
            keys: vec![root],
        });
        self.stats.sessions += 1;
        let solved = self.run_session();
        let session = self.sessions.pop().expect("active session");
        solved?;
        let result = here.intersect(&self.keys[root].value);
        if self.cfg.record_proof {
            let mut path = vec![root];
            let mut expanded = BTreeSet::from([root]);
            let mut tree = self.keys[root].tree.clone().expect("evaluated key");
            self.expand(&mut tree, &mut path, &mut expanded);
            let mut n = self.node(rules::UNFOLD, loc, f, &here, &result);
            n.key = Some(root);
            n.children = vec![tree];
            self.emit(n);
        }
        for &k in &session.keys {
            self.keys[k].done = true;
            self.keys[k].dependents.clear();
            if !self.cfg.record_proof {
                self.keys[k].tree = None;
            }
            if !self.cfg.use_memo {
                self.forget(k);
            }
        }
        Ok(result)
    }

    fn forget(&mut self, k: usize) {
        let key = &self.keys[k];
        if let Some(d) = key.zone.zones().first() {
            self.key_index.remove(&(key.loc, key.var, d.clone()));
        }
        if let Some(list) = self.by_var.get_mut(&(key.loc, key.var)) {
            list.retain(|&x| x != k);
        }
    }

    fn run_session(&mut self) -> Result<(), ProverError> {
        while let Some(k) = self.sessions.last_mut().expect("active session").worklist.pop() {
            self.keys[k].queued = false;
            self.evaluate(k)?;
        }
        Ok(())
    }

    /// One chaotic-iteration step: `k` takes its body's value under the
    /// current approximations, and its dependents are re-queued on change.
    fn evaluate(&mut self, k: usize) -> Result<(), ProverError> {
        self.stats.iterations += 1;
        let (loc, var) = (self.keys[k].loc, self.keys[k].var);
        let zone = self.keys[k].zone.clone();
        let rhs = self.rhs[var];
        self.current.push(k);
        if self.cfg.record_proof {
            self.frames.push(Vec::new());
        }
        let v = self.sat(loc, rhs, &zone);
        let tree = if self.cfg.record_proof { self.frames.pop().and_then(|mut f| f.pop()) } else { None };
        self.current.pop();
        let v = v?;
        self.keys[k].tree = tree;
        if !v.set_eq(&self.keys[k].value) {
            self.keys[k].value = v;
            let deps: Vec<usize> = self.keys[k].dependents.iter().copied().collect();
            for d in deps {
                if !self.keys[d].queued && !self.keys[d].done {
                    self.keys[d].queued = true;
                    self.sessions.last_mut().expect("active session").worklist.push(d);
                }
            }
        }
        Ok(())
    }

    /// Evaluates an in-session key afresh at its point of use.
    fn rederive(&mut self, k: usize, loc: usize, f: NodeId, here: &Federation) -> Result<Federation, ProverError> {
        if let Some(&c) = self.current.last() {
            self.keys[k].dependents.insert(c);
        }
        self.tick(rules::UNFOLD)?;
        self.evaluate(k)?;
        let result = here.intersect(&self.keys[k].value);
        if self.cfg.record_proof {
            let rule = self.leaf_rule(self.keys[k].var);
            let mut n = self.node(rule, loc, f, here, &result);
            n.key = Some(k);
            self.emit(n);
        }
        Ok(result)
    }

    /// Replaces leaves of in-session keys by their unfoldings, once each.
    fn expand(&self, node: &mut ProofNode, path: &mut Vec<usize>, expanded: &mut BTreeSet<usize>) {
        if matches!(node.rule, rules::LEAF_NU | rules::LEAF_MU) {
            let k = node.key.expect("leaf key");
            if !path.contains(&k) {
                if expanded.insert(k) {
                    if let Some(mut t) = self.keys[k].tree.clone() {
                        path.push(k);
                        self.expand(&mut t, path, expanded);
                        path.pop();
                        node.rule = rules::UNFOLD;
                        node.children = vec![t];
                    }
                } else {
                    node.rule = rules::MEMO;
                }
            }
            return;
        }
        for c in node.children.iter_mut() {
            self.expand(c, path, expanded);
        }
    }

    /// The value a completed key holds; used by proof replay.
    pub(crate) fn key_value(&self, k: usize) -> Option<&Federation> {
        self.keys.get(k).filter(|key| key.done).map(|key| &key.value)
    }

    pub(crate) fn key_zone(&self, k: usize) -> Option<&Federation> {
        self.keys.get(k).map(|key| &key.zone)
    }
}

/// Decides `mes` at the initial state of `ta`.
pub fn prove(ta: &TimedAutomaton, mes: &Mes, cfg: ProverConfig) -> Result<Verdict, ProverError> {
    Prover::new(ta, mes, cfg)?.prove()
}
