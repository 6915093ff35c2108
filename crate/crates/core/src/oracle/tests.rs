use num_rational::Rational64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::runs::reachable_locations;
use super::*;
use crate::automaton::fixtures::train;
use crate::automaton::parse_model;
use crate::logic::{compile_tctl, parse_mes, Equation, TctlSpec};
use crate::random::{random_automaton, random_instance, GenConfig, PROPS};

fn q(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn check(ta: &TimedAutomaton, src: &str) -> bool {
    oracle_check(ta, &parse_mes(src).unwrap()).unwrap()
}

fn check_at(ta: &TimedAutomaton, src: &str, loc: &str, vals: &[i64]) -> bool {
    let m = parse_mes(src).unwrap();
    let vals: Vec<Rational64> = vals.iter().map(|&v| q(v)).collect();
    let l = ta.location_index(loc).unwrap();
    let o = Oracle::new(ta, &m, &[(l, vals.clone())], OracleConfig::default()).unwrap();
    o.holds_at(l, &vals).unwrap()
}

const ONE_LOC: &str = "automaton one\nclocks: x\nactions: tick\nprops: p\nlocation s initial labels: p\nedge s -> s on tick\n";

#[test]
fn train_region_count() {
    let ta = train();
    let g = RegionGraph::full(&ta, &[5], 1000).unwrap();
    assert_eq!(g.len(), 36);
    assert_eq!(g.live_count(), 33);
}

#[test]
fn single_clock_zero_ceiling() {
    let ta = parse_model(ONE_LOC).unwrap();
    let g = RegionGraph::full(&ta, &[0], 100).unwrap();
    assert_eq!(g.len(), 2);
    let zero = g.lookup(&Region::from_valuation(0, &[q(0)], &[0])).unwrap();
    let next = g.next[zero].unwrap();
    assert!(g.regions[next].is_terminal());
    assert_eq!(g.next[next], None);
}

#[test]
fn cap_is_enforced() {
    let ta = train();
    assert_eq!(RegionGraph::full(&ta, &[5], 10).err(), Some(OracleError::RegionCap(10)));
}

#[test]
fn train_safety_holds() {
    assert!(check(&train(), "Y =nu !broke && forall(boxall(Y))"));
}

#[test]
fn constants() {
    let ta = train();
    assert!(check(&ta, "X =nu tt"));
    assert!(!check(&ta, "X =nu ff"));
    let m = parse_mes("X =nu ff").unwrap();
    let o = Oracle::for_initial(&ta, &m, OracleConfig::default()).unwrap();
    assert!(o.eval_formula(&Formula::True).iter().all(|b| *b));
}

#[test]
fn exists_follows_delay_successors() {
    let ta = train();
    let m = parse_mes("X =nu exists(x1 == 4)").unwrap();
    let o = Oracle::new(&ta, &m, &[(1, vec![q(0)])], OracleConfig::default()).unwrap();
    let inner = o.eval_formula(&parse_mes("Y =nu x1 == 4").unwrap().equations[0].rhs);
    for r in 0..o.graph.len() {
        let mut chain = false;
        let mut cur = Some(r);
        while let Some(c) = cur {
            chain |= !o.graph.dead[c] && inner[c];
            cur = o.graph.next[c];
        }
        assert_eq!(o.holds_in_region(0, r), chain);
    }
}

#[test]
fn invariant_bounds_delays() {
    let ta = train();
    assert!(check_at(&ta, "X =nu exists(x1 == 4)", "near", &[0]));
    assert!(!check_at(&ta, "X =nu exists(x1 == 5)", "near", &[0]));
    let tight = parse_model(&train().to_string().replace("x1 <= 4", "x1 <= 3")).unwrap();
    assert!(!check_at(&tight, "X =nu exists(x1 == 4)", "near", &[0]));
}

#[test]
fn train_actions() {
    let ta = train();
    assert!(check_at(&ta, "X =nu exists(dia exit (tt))", "in", &[0]));
    assert!(!check_at(&ta, "X =nu dia exit (tt)", "in", &[0]));
    assert!(check_at(&ta, "X =nu existsrel(x1 < 4; x1 == 4)", "far", &[0]));
    assert!(!check(&ta, "X =mu !far || (forall(boxall(X)) && exists(freeze z (forall(z < 1))))"));
}

#[test]
fn self_loop_leaves() {
    let ta = parse_model(ONE_LOC).unwrap();
    assert!(check(&ta, "X =nu boxall(X)"));
    assert!(!check(&ta, "X =mu boxall(X)"));
    assert!(!check(&ta, "X =mu diaall(X)"));
}

#[test]
fn dual_until_reading_breaks_the_rewrite() {
    let ta = parse_model(ONE_LOC).unwrap();
    let lhs = "X =nu forallrel(x > 2; x <= 2)";
    let rhs = "X =nu forall(x <= 2) || existsrel(x <= 2; x > 2 && x <= 2)";
    let literal = OracleConfig {
        forall_rel: RelSemantics::DualUntil,
        ..OracleConfig::default()
    };
    let run = |src: &str, cfg| oracle_check_with(&ta, &parse_mes(src).unwrap(), cfg).unwrap();
    assert!(run(lhs, literal));
    assert!(!run(rhs, literal));
    assert!(!run(lhs, OracleConfig::default()));
    assert!(!run(rhs, OracleConfig::default()));
}

#[test]
fn release_reading_agrees_with_the_rewrite() {
    let mut rng = StdRng::seed_from_u64(11);
    let cfg = GenConfig {
        max_depth: 2,
        ..GenConfig::default()
    };
    for _ in 0..150 {
        let inst = random_instance(&mut rng, &cfg);
        let a = crate::random::random_formula(&mut rng, &cfg, &inst.ta.clocks, &[]);
        let b = crate::random::random_formula(&mut rng, &cfg, &inst.ta.clocks, &[]);
        let lhs = Mes::single("X", Parity::Nu, Formula::forall_rel(a.clone(), b.clone()));
        let rhs = Mes::single("X", Parity::Nu, Formula::forall_rel(a, b).rewrite_forall_rel());
        assert_eq!(
            oracle_check(&inst.ta, &lhs).unwrap(),
            oracle_check(&inst.ta, &rhs).unwrap(),
            "{}\n{lhs}",
            inst.ta
        );
    }
}

fn location_satisfies(ta: &TimedAutomaton, l: usize, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Prop(p) => ta.has_label(l, p),
        Formula::NegProp(p) => !ta.has_label(l, p),
        Formula::And(a, b) => location_satisfies(ta, l, a) && location_satisfies(ta, l, b),
        Formula::Or(a, b) => location_satisfies(ta, l, a) || location_satisfies(ta, l, b),
        other => panic!("not a proposition formula: {other}"),
    }
}

#[test]
fn agrees_with_bounded_runs() {
    let mut rng = StdRng::seed_from_u64(5);
    let cfg = GenConfig::default();
    for _ in 0..100 {
        let ta = random_automaton(&mut rng, &cfg);
        let p = if rng.gen_bool(0.5) {
            Formula::prop(PROPS[rng.gen_range(0..2)])
        } else {
            Formula::or(Formula::neg_prop(PROPS[0]), Formula::prop(PROPS[1]))
        };
        let reach = reachable_locations(&ta, 2 * ta.locations.len() + 2);
        let ag = reach.iter().all(|&l| location_satisfies(&ta, l, &p));
        let ef = reach.iter().any(|&l| location_satisfies(&ta, l, &p));
        assert_eq!(oracle_check(&ta, &compile_tctl(&TctlSpec::AG(p.clone()))).unwrap(), ag, "{ta}");
        assert_eq!(oracle_check(&ta, &compile_tctl(&TctlSpec::EF(p.clone()))).unwrap(), ef, "{ta}");
    }
}

#[test]
fn simplified_tctl_matches_relativized_forms() {
    let mut rng = StdRng::seed_from_u64(9);
    let cfg = GenConfig::default();
    for _ in 0..150 {
        let ta = random_automaton(&mut rng, &cfg);
        let p = Formula::prop(PROPS[rng.gen_range(0..2)]);
        let r = Formula::neg_prop(PROPS[rng.gen_range(0..2)]);
        for spec in [
            TctlSpec::AG(p.clone()),
            TctlSpec::AF(p.clone()),
            TctlSpec::EF(p.clone()),
            TctlSpec::EG(p.clone()),
            TctlSpec::LeadsTo(r.clone(), p.clone()),
        ] {
            let a = oracle_check(&ta, &spec.compile()).unwrap();
            let b = oracle_check(&ta, &spec.compile_unsimplified()).unwrap();
            assert_eq!(a, b, "{spec}\n{ta}");
        }
    }
}

#[test]
fn fixpoints_solve_in_dependency_order() {
    let ta = train();
    let m = Mes::new(vec![
        Equation {
            var: "A".into(),
            parity: Parity::Nu,
            rhs: Formula::and(Formula::var("B"), Formula::forall(Formula::box_all(Formula::var("A")))),
        },
        Equation {
            var: "B".into(),
            parity: Parity::Mu,
            rhs: Formula::or(Formula::prop("far"), Formula::exists(Formula::dia_all(Formula::var("B")))),
        },
    ]);
    assert!(oracle_check(&ta, &m).unwrap());
}
