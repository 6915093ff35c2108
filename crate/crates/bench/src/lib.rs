//! Shared setup for the criterion benches.

use std::sync::Arc;

use rand::{rngs::StdRng, Rng, SeedableRng};
use relmu::bench::{Family, FamilyConfig};
use relmu::{Atom, ClockSet, CmpOp, Federation, Mes, TimedAutomaton};

/// A family instance and one spec of its suite.
pub fn case(family: Family, n: usize, spec: &str) -> (TimedAutomaton, Mes) {
    let cfg = FamilyConfig::new(family, n);
    let ta = cfg.model().expect("family model builds");
    let mes = cfg
        .specs()
        .into_iter()
        .find(|s| s.name == spec)
        .unwrap_or_else(|| panic!("{family} has no spec {spec}"))
        .mes;
    (ta, mes)
}

pub fn clocks(n: usize) -> Arc<ClockSet> {
    ClockSet::new((1..=n).map(|i| format!("x{i}")).collect(), Vec::new())
}

/// Unions of `zones` random boxes with an occasional diagonal cut.
pub fn random_federations(clocks: &Arc<ClockSet>, count: usize, zones: usize, seed: u64) -> Vec<Federation> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = clocks.automaton_count();
    (0..count)
        .map(|_| {
            let mut f = Federation::empty(clocks);
            for _ in 0..zones {
                let mut atoms = Vec::new();
                for x in 1..=n {
                    let lo = rng.gen_range(0..8);
                    atoms.push(Atom::new(x, CmpOp::Ge, lo));
                    atoms.push(Atom::new(x, if rng.gen() { CmpOp::Le } else { CmpOp::Lt }, lo + rng.gen_range(1..6)));
                }
                let mut zone = Federation::from_atoms(clocks, &atoms);
                if n >= 2 && rng.gen_bool(0.3) {
                    let mut d = relmu::Dbm::universe(clocks.dim());
                    d.constrain(1, 2, relmu::zones::Bound::le(rng.gen_range(-2..3)));
                    zone = zone.intersect_dbm(&d);
                }
                f = f.union(&zone);
            }
            f
        })
        .collect()
}
