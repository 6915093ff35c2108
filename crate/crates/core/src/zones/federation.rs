use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;

use super::bound::Bound;
use super::constraint::{Atom, CmpOp};
use super::dbm::Dbm;
use super::ZoneError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClockKind {
    Automaton,
    Freeze,
}

/// Ordinal of a clock in a [`ClockSet`]; `index` is the DBM row, so it is
/// always at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClockId {
    pub index: usize,
    pub kind: ClockKind,
}

/// Automaton clocks followed by freeze clocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClockSet {
    names: Vec<String>,
    automaton: usize,
}

impl ClockSet {
    pub fn new(automaton: Vec<String>, freeze: Vec<String>) -> Arc<ClockSet> {
        let n = automaton.len();
        let mut names = automaton;
        names.extend(freeze);
        Arc::new(ClockSet { names, automaton: n })
    }

    /// Number of clocks, excluding the reference clock.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len() + 1
    }

    pub fn automaton_count(&self) -> usize {
        self.automaton
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index - 1]
    }

    pub fn lookup(&self, name: &str) -> Option<ClockId> {
        let pos = self.names.iter().position(|n| n == name)?;
        let kind = if pos < self.automaton {
            ClockKind::Automaton
        } else {
            ClockKind::Freeze
        };
        Some(ClockId { index: pos + 1, kind })
    }

    fn with_freeze(&self, name: &str) -> ClockSet {
        let mut names = self.names.clone();
        names.push(name.to_string());
        ClockSet {
            names,
            automaton: self.automaton,
        }
    }

    fn without(&self, index: usize) -> ClockSet {
        let mut names = self.names.clone();
        names.remove(index - 1);
        ClockSet {
            names,
            automaton: self.automaton,
        }
    }
}

/// Finite union of canonical, non-empty zones over a shared clock set.
///
/// Only pairwise subsumption is pruned, so two federations denoting the same
/// set may hold different zone lists; compare with [`Federation::set_eq`].
#[derive(Clone)]
pub struct Federation {
    clocks: Arc<ClockSet>,
    zones: Vec<Dbm>,
}

impl Federation {
    pub fn empty(clocks: &Arc<ClockSet>) -> Federation {
        Federation {
            clocks: clocks.clone(),
            zones: Vec::new(),
        }
    }

    /// Every non-negative valuation (`tt`).
    pub fn universe(clocks: &Arc<ClockSet>) -> Federation {
        Federation {
            clocks: clocks.clone(),
            zones: vec![Dbm::universe(clocks.dim())],
        }
    }

    /// The valuation with all clocks at 0.
    pub fn origin(clocks: &Arc<ClockSet>) -> Federation {
        Federation {
            clocks: clocks.clone(),
            zones: vec![Dbm::origin(clocks.dim())],
        }
    }

    pub fn from_dbm(clocks: &Arc<ClockSet>, dbm: Dbm) -> Federation {
        assert_eq!(dbm.dim(), clocks.dim());
        Federation {
            clocks: clocks.clone(),
            zones: vec![dbm],
        }
    }

    pub fn from_dbms(clocks: &Arc<ClockSet>, dbms: impl IntoIterator<Item = Dbm>) -> Federation {
        let mut f = Federation::empty(clocks);
        for d in dbms {
            f.push(d);
        }
        f
    }

    /// The convex set described by a conjunction of single-clock atoms.
    pub fn from_atoms(clocks: &Arc<ClockSet>, atoms: &[Atom]) -> Federation {
        let mut d = Dbm::universe(clocks.dim());
        for a in atoms {
            if !constrain_atom(&mut d, a) {
                return Federation::empty(clocks);
            }
        }
        Federation::from_dbm(clocks, d)
    }

    /// A single rational valuation cannot be represented with integer
    /// bounds in general; this builds the point zone for integer values.
    pub fn integer_point(clocks: &Arc<ClockSet>, values: &[i64]) -> Federation {
        assert_eq!(values.len(), clocks.len());
        let atoms: Vec<Atom> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Atom::new(i + 1, CmpOp::Eq, v))
            .collect();
        Federation::from_atoms(clocks, &atoms)
    }

    pub fn clocks(&self) -> &Arc<ClockSet> {
        &self.clocks
    }

    pub fn dim(&self) -> usize {
        self.clocks.dim()
    }

    pub fn zones(&self) -> &[Dbm] {
        &self.zones
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn is_universe(&self) -> bool {
        Federation::universe(&self.clocks).is_subset(self)
    }

    pub fn check_compatible(&self, other: &Federation) -> Result<(), ZoneError> {
        if self.clocks.names() != other.clocks.names() {
            return Err(ZoneError::DimensionMismatch {
                left: self.clocks.names().to_vec(),
                right: other.clocks.names().to_vec(),
            });
        }
        Ok(())
    }

    fn assert_compatible(&self, other: &Federation) {
        if let Err(e) = self.check_compatible(other) {
            panic!("{e}");
        }
    }

    /// Adds one zone, pruning pairwise subsumption.
    fn push(&mut self, d: Dbm) {
        if self.zones.iter().any(|z| d.is_subset_of(z)) {
            return;
        }
        self.zones.retain(|z| !z.is_subset_of(&d));
        self.zones.push(d);
    }

    pub fn intersect(&self, other: &Federation) -> Federation {
        self.assert_compatible(other);
        let mut out = Federation::empty(&self.clocks);
        for a in &self.zones {
            for b in &other.zones {
                if let Some(c) = a.intersect(b) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn try_intersect(&self, other: &Federation) -> Result<Federation, ZoneError> {
        self.check_compatible(other)?;
        Ok(self.intersect(other))
    }

    pub fn intersect_dbm(&self, d: &Dbm) -> Federation {
        let mut out = Federation::empty(&self.clocks);
        for a in &self.zones {
            if let Some(c) = a.intersect(d) {
                out.push(c);
            }
        }
        out
    }

    pub fn intersect_atoms(&self, atoms: &[Atom]) -> Federation {
        if atoms.is_empty() {
            return self.clone();
        }
        self.intersect(&Federation::from_atoms(&self.clocks, atoms))
    }

    pub fn union(&self, other: &Federation) -> Federation {
        self.assert_compatible(other);
        let mut out = self.clone();
        for z in &other.zones {
            out.push(z.clone());
        }
        out
    }

    pub fn try_union(&self, other: &Federation) -> Result<Federation, ZoneError> {
        self.check_compatible(other)?;
        Ok(self.union(other))
    }

    pub fn subtract(&self, other: &Federation) -> Federation {
        self.assert_compatible(other);
        let mut current: Vec<Dbm> = self.zones.clone();
        for b in &other.zones {
            if current.is_empty() {
                break;
            }
            let mut next = Vec::with_capacity(current.len());
            for a in &current {
                next.extend(a.subtract(b));
            }
            current = next;
        }
        Federation::from_dbms(&self.clocks, current)
    }

    /// Set complement within the non-negative orthant.
    pub fn complement(&self) -> Federation {
        Federation::universe(&self.clocks).subtract(self)
    }

    /// Exact inclusion by iterated zone subtraction.
    pub fn is_subset(&self, other: &Federation) -> bool {
        self.assert_compatible(other);
        if self
            .zones
            .iter()
            .all(|a| other.zones.iter().any(|b| a.is_subset_of(b)))
        {
            return true;
        }
        self.subtract(other).is_empty()
    }

    pub fn try_subset(&self, other: &Federation) -> Result<bool, ZoneError> {
        self.check_compatible(other)?;
        Ok(self.is_subset(other))
    }

    /// Semantic equality.
    pub fn set_eq(&self, other: &Federation) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    pub fn map_zones(&self, f: impl Fn(&Dbm) -> Option<Dbm>) -> Federation {
        Federation::from_dbms(&self.clocks, self.zones.iter().filter_map(f))
    }

    /// Time successors (`δ ≥ 0`).
    pub fn succ(&self) -> Federation {
        self.map_zones(|d| Some(d.up()))
    }

    /// Valuations reached by a strictly positive delay.
    pub fn succ_strict(&self) -> Federation {
        self.map_zones(|d| d.up_strict())
    }

    /// Valuations that reach the federation after some `δ ≥ 0`.
    pub fn pred(&self) -> Federation {
        self.map_zones(|d| Some(d.down()))
    }

    /// Valuations that reach the federation after some `δ > 0`.
    pub fn pred_strict(&self) -> Federation {
        self.map_zones(|d| d.down_strict())
    }

    fn check_clocks(&self, clocks: &[usize]) -> Result<(), ZoneError> {
        for &c in clocks {
            if c == 0 || c >= self.dim() {
                return Err(ZoneError::UnknownClock(format!("#{c}")));
            }
        }
        Ok(())
    }

    /// Image under setting the given clocks to 0.
    pub fn reset(&self, clocks: &[usize]) -> Result<Federation, ZoneError> {
        self.check_clocks(clocks)?;
        Ok(self.reset_unchecked(clocks))
    }

    pub(crate) fn reset_unchecked(&self, clocks: &[usize]) -> Federation {
        if clocks.is_empty() {
            return self.clone();
        }
        self.map_zones(|d| {
            let mut d = d.clone();
            for &c in clocks {
                d.reset(c);
            }
            Some(d)
        })
    }

    /// Preimage of the reset: every `v` with `v[λ := 0]` in the federation.
    pub fn reset_preimage(&self, clocks: &[usize]) -> Result<Federation, ZoneError> {
        self.check_clocks(clocks)?;
        Ok(self.reset_preimage_unchecked(clocks))
    }

    pub(crate) fn reset_preimage_unchecked(&self, clocks: &[usize]) -> Federation {
        if clocks.is_empty() {
            return self.clone();
        }
        let atoms: Vec<Atom> = clocks.iter().map(|&c| Atom::new(c, CmpOp::Eq, 0)).collect();
        self.intersect_atoms(&atoms).map_zones(|d| {
            let mut d = d.clone();
            for &c in clocks {
                d.free(c);
            }
            let ok = d.canonicalize();
            debug_assert!(ok);
            Some(d)
        })
    }

    /// Extends the clock set with a freeze clock set to 0.
    pub fn add_freeze_clock(&self, name: &str) -> Result<Federation, ZoneError> {
        if self.clocks.lookup(name).is_some() {
            return Err(ZoneError::DuplicateClock(name.to_string()));
        }
        let clocks = Arc::new(self.clocks.with_freeze(name));
        let old = self.dim();
        let new = old + 1;
        let z = old;
        let zones = self.zones.iter().filter_map(|d| {
            let mut m = vec![Bound::INFINITY; new * new];
            for i in 0..old {
                for j in 0..old {
                    m[i * new + j] = d.get(i, j);
                }
            }
            // z behaves like the reference clock: z - x_j = 0 - x_j.
            for j in 0..old {
                m[z * new + j] = d.get(0, j);
                m[j * new + z] = d.get(j, 0);
            }
            m[z * new + z] = Bound::LE_ZERO;
            Dbm::from_entries(new, m)
        });
        Ok(Federation::from_dbms(&clocks, zones))
    }

    /// Existential projection of a freeze clock.
    pub fn drop_freeze_clock(&self, name: &str) -> Result<Federation, ZoneError> {
        let id = self
            .clocks
            .lookup(name)
            .filter(|id| id.kind == ClockKind::Freeze)
            .ok_or_else(|| ZoneError::UnknownClock(name.to_string()))?;
        let clocks = Arc::new(self.clocks.without(id.index));
        let old = self.dim();
        let new = old - 1;
        let keep: Vec<usize> = (0..old).filter(|&i| i != id.index).collect();
        let zones = self.zones.iter().filter_map(|d| {
            let mut m = Vec::with_capacity(new * new);
            for &i in &keep {
                for &j in &keep {
                    m.push(d.get(i, j));
                }
            }
            // Canonical input: projecting rows/columns is exact.
            Dbm::from_entries(new, m)
        });
        Ok(Federation::from_dbms(&clocks, zones))
    }

    /// Per-clock max-constant widening; `k[i]` is the ceiling for DBM index
    /// `i` (so `k[0]` is 0).
    pub fn extrapolate(&self, k: &[i64]) -> Federation {
        self.map_zones(|d| Some(d.extrapolate(k)))
    }

    /// Valuations `v` with some `δ ≥ 0` such that `v + δ ∈ target` and
    /// `v + δ' ∉ bad` for every `0 ≤ δ' < δ`.
    pub fn timed_until(target: &Federation, bad: &Federation) -> Federation {
        target.assert_compatible(bad);
        let clocks = &target.clocks;
        if bad.is_empty() {
            return target.pred();
        }
        let mut out = Federation::empty(clocks);
        for g in &target.zones {
            let g_fed = Federation::from_dbm(clocks, g.clone());
            let mut acc = g_fed.pred();
            for b in &bad.zones {
                if acc.is_empty() {
                    break;
                }
                acc = acc.intersect(&avoid(clocks, &g_fed, b));
            }
            out = out.union(&acc);
        }
        out
    }

    pub fn contains(&self, point: &[Rational64]) -> bool {
        assert_eq!(point.len(), self.clocks.len());
        self.zones.iter().any(|d| d.contains(point))
    }

    /// Whether some valuation can delay without bound.
    pub fn has_unbounded_zone(&self) -> bool {
        self.zones.iter().any(|d| d.is_unbounded())
    }
}

/// `{v | ∃δ. v+δ ∈ g ∧ ∀δ' < δ. v+δ' ∉ b}` for a convex target and bad zone.
fn avoid(clocks: &Arc<ClockSet>, g: &Federation, b: &Dbm) -> Federation {
    let b_fed = Federation::from_dbm(clocks, b.clone());
    let b_pred = b_fed.pred();
    let never_bad = g.pred().subtract(&b_pred);
    let b_after = b_fed.succ_strict();
    let ahead = b_pred
        .subtract(&b_fed)
        .intersect(&g.subtract(&b_after).pred());
    let now = g.intersect(&b_fed);
    never_bad.union(&ahead).union(&now)
}

fn constrain_atom(d: &mut Dbm, a: &Atom) -> bool {
    let x = a.clock;
    let c = a.value;
    match a.op {
        CmpOp::Lt => d.constrain(x, 0, Bound::lt(c)),
        CmpOp::Le => d.constrain(x, 0, Bound::le(c)),
        CmpOp::Gt => d.constrain(0, x, Bound::lt(-c)),
        CmpOp::Ge => d.constrain(0, x, Bound::le(-c)),
        CmpOp::Eq => d.constrain(x, 0, Bound::le(c)) && d.constrain(0, x, Bound::le(-c)),
    }
}

impl PartialEq for Federation {
    /// Semantic equality; see [`Federation::set_eq`].
    fn eq(&self, other: &Federation) -> bool {
        self.clocks.names() == other.clocks.names() && self.set_eq(other)
    }
}

impl fmt::Debug for Federation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Federation({self})")
    }
}

impl fmt::Display for Federation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zones.is_empty() {
            return f.write_str("false");
        }
        let parts: Vec<String> = self.zones.iter().map(|d| render_zone(&self.clocks, d)).collect();
        f.write_str(&parts.join(" || "))
    }
}

fn render_bound(out: &mut Vec<String>, lhs: &str, b: Bound, lower: bool) {
    // `b` bounds `lhs`; for lower bounds the caller passes the (0, i) entry.
    if lower {
        let v = -b.value();
        let op = if b.is_strict() { ">" } else { ">=" };
        out.push(format!("{lhs}{op}{v}"));
    } else {
        let op = if b.is_strict() { "<" } else { "<=" };
        out.push(format!("{lhs}{op}{}", b.value()));
    }
}

fn render_zone(clocks: &ClockSet, d: &Dbm) -> String {
    let n = d.dim();
    let mut parts = Vec::new();
    for i in 1..n {
        let name = clocks.name(i);
        let upper = d.get(i, 0);
        let lower = d.get(0, i);
        if !upper.is_infinite() && !upper.is_strict() && !lower.is_strict() && upper.value() == -lower.value() {
            parts.push(format!("{name}=={}", upper.value()));
            continue;
        }
        if lower != Bound::LE_ZERO {
            render_bound(&mut parts, name, lower, true);
        }
        if !upper.is_infinite() {
            render_bound(&mut parts, name, upper, false);
        }
    }
    for i in 1..n {
        for j in 1..n {
            if i == j {
                continue;
            }
            let b = d.get(i, j);
            if b.is_infinite() || d.get(i, 0) + d.get(0, j) <= b {
                continue;
            }
            let op = if b.is_strict() { "<" } else { "<=" };
            parts.push(format!("{}-{}{op}{}", clocks.name(i), clocks.name(j), b.value()));
        }
    }
    if parts.is_empty() {
        "true".to_string()
    } else {
        parts.join(" && ")
    }
}
