//! Brute-force model checking over the region graph, used as ground truth
//! for the proof engine.

mod region;
pub mod runs;

use std::collections::HashMap;
use std::collections::VecDeque;

use num_rational::Rational64;

use crate::automaton::TimedAutomaton;
use crate::logic::{check_against, dependency_sccs, Formula, LogicError, Mes, Parity};

pub use region::{enumerate, Region, ABOVE};

pub const DEFAULT_REGION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("region graph exceeds the cap of {0} regions")]
    RegionCap(usize),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// How `∀_rel(ψ1, ψ2)` is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RelSemantics {
    /// ψ2 holds at every delay, or ψ2 holds up to and including a delay
    /// where ψ1 ∧ ψ2 holds.
    #[default]
    Release,
    /// Every delay satisfies ψ2 or is preceded by a ψ1 delay — the dual of
    /// `∃_rel(¬ψ1, ¬ψ2)`.
    DualUntil,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub region_cap: usize,
    pub forall_rel: RelSemantics,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            region_cap: DEFAULT_REGION_CAP,
            forall_rel: RelSemantics::Release,
        }
    }
}

/// Largest constant per clock over the automaton and the formula; clock
/// order is automaton clocks then `freeze`.
pub fn ceilings(ta: &TimedAutomaton, mes: &Mes, freeze: &[String]) -> Vec<i64> {
    let base = ta.max_constants();
    let mut k: Vec<i64> = base[1..].to_vec();
    k.extend(std::iter::repeat(0).take(freeze.len()));
    for (clock, c) in mes.clock_constants() {
        let idx = ta
            .clocks
            .iter()
            .position(|x| *x == clock)
            .or_else(|| freeze.iter().position(|z| *z == clock).map(|j| ta.clocks.len() + j));
        if let Some(i) = idx {
            k[i] = k[i].max(c);
        }
    }
    k
}

/// Reachable regions under delay, action and freeze-reset steps.
pub struct RegionGraph {
    pub clocks: Vec<String>,
    pub k: Vec<i64>,
    pub regions: Vec<Region>,
    index: HashMap<Region, usize>,
    /// Delay successor; `None` for terminal or invariant-violating regions.
    pub next: Vec<Option<usize>>,
    /// The location invariant fails; no delay or action is possible.
    pub dead: Vec<bool>,
    pub point: Vec<bool>,
    pub actions: Vec<Vec<(usize, usize)>>,
    /// `freeze[j][r]`: region `r` with freeze clock `j` reset.
    pub freeze: Vec<Vec<usize>>,
    /// Regions sorted so that every delay successor precedes its source.
    order: Vec<usize>,
}

impl RegionGraph {
    pub fn build(
        ta: &TimedAutomaton,
        freeze_clocks: &[String],
        k: Vec<i64>,
        seeds: &[Region],
        cap: usize,
    ) -> Result<RegionGraph, OracleError> {
        let na = ta.clocks.len();
        let mut clocks = ta.clocks.clone();
        clocks.extend(freeze_clocks.iter().cloned());
        let mut g = RegionGraph {
            clocks,
            k,
            regions: Vec::new(),
            index: HashMap::new(),
            next: Vec::new(),
            dead: Vec::new(),
            point: Vec::new(),
            actions: Vec::new(),
            freeze: vec![Vec::new(); freeze_clocks.len()],
            order: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for s in seeds {
            g.intern(s.clone(), &mut queue, cap)?;
        }
        while let Some(r) = queue.pop_front() {
            let reg = g.regions[r].clone();
            let inv = &ta.locations[reg.loc].invariant;
            let dead = !inv.atoms.iter().all(|a| reg.atom(a.clock - 1, a.op, a.value));
            g.dead[r] = dead;
            if !dead {
                if let Some(n) = reg.delay_next(&g.k) {
                    let id = g.intern(n, &mut queue, cap)?;
                    g.next[r] = Some(id);
                }
                let mut acts = Vec::new();
                for e in ta.edges_from(reg.loc) {
                    if !e.guard.atoms.iter().all(|a| reg.atom(a.clock - 1, a.op, a.value)) {
                        continue;
                    }
                    let resets: Vec<usize> = e.resets.iter().map(|c| c - 1).collect();
                    let t = reg.reset(&resets).with_loc(e.target);
                    let tinv = &ta.locations[e.target].invariant;
                    if !tinv.atoms.iter().all(|a| t.atom(a.clock - 1, a.op, a.value)) {
                        continue;
                    }
                    let id = g.intern(t, &mut queue, cap)?;
                    acts.push((e.action, id));
                }
                g.actions[r] = acts;
            }
            for j in 0..freeze_clocks.len() {
                let id = g.intern(reg.reset(&[na + j]), &mut queue, cap)?;
                g.freeze[j][r] = id;
            }
        }
        g.order = g.delay_order();
        Ok(g)
    }

    fn intern(&mut self, r: Region, queue: &mut VecDeque<usize>, cap: usize) -> Result<usize, OracleError> {
        if let Some(&id) = self.index.get(&r) {
            return Ok(id);
        }
        if self.regions.len() >= cap {
            return Err(OracleError::RegionCap(cap));
        }
        let id = self.regions.len();
        self.point.push(r.is_point());
        self.index.insert(r.clone(), id);
        self.regions.push(r);
        self.next.push(None);
        self.dead.push(false);
        self.actions.push(Vec::new());
        for f in self.freeze.iter_mut() {
            f.push(usize::MAX);
        }
        queue.push_back(id);
        Ok(id)
    }

    fn delay_order(&self) -> Vec<usize> {
        let n = self.regions.len();
        let mut depth = vec![usize::MAX; n];
        for start in 0..n {
            let mut path = Vec::new();
            let mut cur = start;
            while depth[cur] == usize::MAX {
                path.push(cur);
                match self.next[cur] {
                    Some(nx) => cur = nx,
                    None => {
                        depth[cur] = 0;
                        path.pop();
                        break;
                    }
                }
            }
            let mut d = depth[cur];
            while let Some(p) = path.pop() {
                d += 1;
                depth[p] = d;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&r| depth[r]);
        order
    }

    /// Every region of every location over the automaton clocks.
    pub fn full(ta: &TimedAutomaton, k: &[i64], cap: usize) -> Result<RegionGraph, OracleError> {
        let base = enumerate(k);
        let seeds: Vec<Region> = (0..ta.locations.len())
            .flat_map(|l| base.iter().map(move |r| r.with_loc(l)))
            .collect();
        RegionGraph::build(ta, &[], k.to_vec(), &seeds, cap)
    }

    /// Regions whose location invariant holds.
    pub fn live_count(&self) -> usize {
        self.dead.iter().filter(|d| !**d).count()
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn lookup(&self, r: &Region) -> Option<usize> {
        self.index.get(r).copied()
    }
}

/// A model-checking instance over a prebuilt region graph.
pub struct Oracle<'a> {
    ta: &'a TimedAutomaton,
    mes: Mes,
    pub graph: RegionGraph,
    cfg: OracleConfig,
    solution: Vec<Vec<bool>>,
}

impl<'a> Oracle<'a> {
    /// Builds the graph from the given states (valuations cover automaton
    /// clocks then the system's freeze clocks) and solves the system.
    pub fn new(
        ta: &'a TimedAutomaton,
        mes: &Mes,
        seeds: &[(usize, Vec<Rational64>)],
        cfg: OracleConfig,
    ) -> Result<Oracle<'a>, OracleError> {
        check_against(mes, ta)?;
        let mes = mes.desugar_markers();
        let freeze = mes.freeze_clocks();
        let k = ceilings(ta, &mes, &freeze);
        let seeds: Vec<Region> = seeds
            .iter()
            .map(|(l, v)| Region::from_valuation(*l, v, &k))
            .collect();
        let graph = RegionGraph::build(ta, &freeze, k, &seeds, cfg.region_cap)?;
        let mut o = Oracle {
            ta,
            mes,
            graph,
            cfg,
            solution: Vec::new(),
        };
        o.solve();
        Ok(o)
    }

    /// Solves from the initial state only.
    pub fn for_initial(ta: &'a TimedAutomaton, mes: &Mes, cfg: OracleConfig) -> Result<Oracle<'a>, OracleError> {
        let n = ta.clocks.len() + mes.desugar_markers().freeze_clocks().len();
        Oracle::new(ta, mes, &[(ta.initial, vec![Rational64::from_integer(0); n])], cfg)
    }

    pub fn extended_clock_count(&self) -> usize {
        self.graph.clocks.len()
    }

    /// Verdict for the entry variable at a state.
    pub fn holds_at(&self, loc: usize, vals: &[Rational64]) -> Option<bool> {
        let r = Region::from_valuation(loc, vals, &self.graph.k);
        self.graph.lookup(&r).map(|id| self.solution[0][id])
    }

    pub fn holds_in_region(&self, var: usize, region: usize) -> bool {
        self.solution[var][region]
    }

    /// Verdict of any closed formula on the solved environment.
    pub fn eval_formula(&self, f: &Formula) -> Vec<bool> {
        self.eval(&f.desugar_markers(), &self.solution)
    }

    fn solve(&mut self) {
        let n = self.graph.len();
        let m = self.mes.equations.len();
        let mut env: Vec<Vec<bool>> = vec![Vec::new(); m];
        for comp in dependency_sccs(&self.mes) {
            for &i in &comp {
                env[i] = vec![self.mes.equations[i].parity == Parity::Nu; n];
            }
            loop {
                let mut changed = false;
                for &i in &comp {
                    let v = self.eval(&self.mes.equations[i].rhs, &env);
                    if v != env[i] {
                        env[i] = v;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        self.solution = env;
    }

    fn clock_index(&self, name: &str) -> usize {
        self.graph
            .clocks
            .iter()
            .position(|c| c == name)
            .expect("clock validated against the automaton")
    }

    fn eval(&self, f: &Formula, env: &[Vec<bool>]) -> Vec<bool> {
        let g = &self.graph;
        let n = g.len();
        let all = |b: bool| vec![b; n];
        match f {
            Formula::True => all(true),
            Formula::False => all(false),
            Formula::Prop(p) => g.regions.iter().map(|r| self.ta.has_label(r.loc, p)).collect(),
            Formula::NegProp(p) => g.regions.iter().map(|r| !self.ta.has_label(r.loc, p)).collect(),
            Formula::Constraint { clock, op, value } => {
                let i = self.clock_index(clock);
                g.regions.iter().map(|r| r.atom(i, *op, *value)).collect()
            }
            Formula::Var(v) => env[self.mes.index_of(v).expect("bound variable")].clone(),
            Formula::And(a, b) => zip(self.eval(a, env), self.eval(b, env), |x, y| x && y),
            Formula::Or(a, b) => zip(self.eval(a, env), self.eval(b, env), |x, y| x || y),
            Formula::DiamondAct(a, x) | Formula::BoxAct(a, x) => {
                let act = self.ta.action_index(a).expect("declared action");
                let inner = self.eval(x, env);
                let dia = matches!(f, Formula::DiamondAct(..));
                (0..n)
                    .map(|r| {
                        let mut succ = g.actions[r].iter().filter(|(b, _)| *b == act).map(|&(_, t)| inner[t]);
                        if dia {
                            succ.any(|v| v)
                        } else {
                            succ.all(|v| v)
                        }
                    })
                    .collect()
            }
            Formula::DiamondAll(x) => {
                let inner = self.eval(x, env);
                (0..n).map(|r| g.actions[r].iter().any(|&(_, t)| inner[t])).collect()
            }
            Formula::BoxAll(x) => {
                let inner = self.eval(x, env);
                (0..n).map(|r| g.actions[r].iter().all(|&(_, t)| inner[t])).collect()
            }
            Formula::ExistsTime(x) => {
                let p = self.eval(x, env);
                self.along_delay(|r, nx| !g.dead[r] && (p[r] || nx.unwrap_or(false)))
            }
            Formula::ForallTime(x) => {
                let p = self.eval(x, env);
                self.along_delay(|r, nx| g.dead[r] || (p[r] && nx.unwrap_or(true)))
            }
            Formula::ExistsRel(a, b) => {
                let p1 = self.eval(a, env);
                let p2 = self.eval(b, env);
                // h: some later delay in or after this region is a witness,
                // entering the region from its past boundary.
                let h = self.along_delay(|r, nx| {
                    !g.dead[r] && ((p2[r] && (g.point[r] || p1[r])) || (p1[r] && nx.unwrap_or(false)))
                });
                (0..n)
                    .map(|r| !g.dead[r] && (p2[r] || (p1[r] && g.next[r].is_some_and(|s| h[s]))))
                    .collect()
            }
            Formula::ForallRel(a, b) => {
                let p1 = self.eval(a, env);
                let p2 = self.eval(b, env);
                match self.cfg.forall_rel {
                    RelSemantics::Release => {
                        let always = self.along_delay(|r, nx| g.dead[r] || (p2[r] && nx.unwrap_or(true)));
                        let released = self.along_delay(|r, nx| {
                            !g.dead[r] && ((p1[r] && p2[r]) || (p2[r] && nx.unwrap_or(false)))
                        });
                        zip(always, released, |x, y| x || y)
                    }
                    RelSemantics::DualUntil => {
                        let later = self.along_delay(|r, nx| {
                            g.dead[r] || ((p2[r] || (!g.point[r] && p1[r])) && (p1[r] || nx.unwrap_or(true)))
                        });
                        (0..n)
                            .map(|r| g.dead[r] || (p2[r] && (p1[r] || g.next[r].map_or(true, |s| later[s]))))
                            .collect()
                    }
                }
            }
            Formula::Freeze(z, x) => {
                let j = self.clock_index(z) - self.ta.clocks.len();
                let inner = self.eval(x, env);
                (0..n).map(|r| inner[g.freeze[j][r]]).collect()
            }
            Formula::MustAct | Formula::CanDiverge => unreachable!("markers are desugared before evaluation"),
        }
    }

    /// Computes `v[r] = step(r, v[next(r)])` along delay chains.
    fn along_delay(&self, step: impl Fn(usize, Option<bool>) -> bool) -> Vec<bool> {
        let g = &self.graph;
        let mut v = vec![false; g.len()];
        for &r in &g.order {
            let nx = g.next[r].map(|s| v[s]);
            v[r] = step(r, nx);
        }
        v
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Verdict of `mes` at the initial state.
pub fn oracle_check(ta: &TimedAutomaton, mes: &Mes) -> Result<bool, OracleError> {
    oracle_check_with(ta, mes, OracleConfig::default())
}

pub fn oracle_check_with(ta: &TimedAutomaton, mes: &Mes, cfg: OracleConfig) -> Result<bool, OracleError> {
    let o = Oracle::for_initial(ta, mes, cfg)?;
    let n = o.extended_clock_count();
    Ok(o
        .holds_at(ta.initial, &vec![Rational64::from_integer(0); n])
        .expect("initial region is a seed"))
}

#[cfg(test)]
mod tests;
