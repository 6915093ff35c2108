use std::time::Duration;

use super::*;
use crate::automaton::parse_model;
use crate::oracle::oracle_check;
use crate::prover::prove;

fn check_suite(family: Family, ta: &TimedAutomaton, specs: &[SpecCase], skip_oracle: &[&str]) {
    for s in specs {
        let v = prove(ta, &s.mes, ProverConfig::default()).unwrap_or_else(|e| panic!("{family}-{}: {e}", s.name));
        assert_eq!(v.valid, s.expected, "{family}-{} prover", s.name);
        if !skip_oracle.contains(&s.name) {
            let o = oracle_check(ta, &s.mes).unwrap_or_else(|e| panic!("{family}-{}: {e}", s.name));
            assert_eq!(o, s.expected, "{family}-{} oracle", s.name);
        }
    }
}

#[test]
fn models_round_trip_through_the_grammar() {
    for f in Family::ALL {
        let text = generate_model(&FamilyConfig::new(f, f.min_n())).unwrap();
        let back = parse_model(&text).unwrap();
        assert_eq!(back.to_string(), text, "{f}");
        back.validate().unwrap();
    }
}

#[test]
fn family_names_parse() {
    assert_eq!("fischer".parse::<Family>().unwrap(), Family::Fischer);
    assert_eq!("GRC".parse::<Family>().unwrap(), Family::Grc);
    assert!("nope".parse::<Family>().is_err());
    assert!(Family::Csma.model(1).is_err());
    let mismatched = FamilyConfig::new(Family::Csma, 2).with_timing(Timing::default_for(Family::Leader));
    assert_eq!(mismatched.model().unwrap_err(), BenchError::Timing(Family::Csma));
    let zero = FamilyConfig::new(Family::Fischer, 2).with_timing(Timing::Fischer { delay: 0, wait: 2 });
    assert!(zero.model().is_err());
}

#[test]
fn generation_is_deterministic() {
    let cfg = FamilyConfig::new(Family::Grc, 2);
    assert_eq!(generate_model(&cfg).unwrap(), generate_model(&cfg).unwrap());
}

#[test]
fn suites_are_complete_and_alternation_free() {
    for f in Family::ALL {
        for n in [f.min_n(), 4] {
            let suite = spec_suite(&FamilyConfig::new(f, n));
            let names: Vec<&str> = suite.iter().map(|s| s.name).collect();
            assert_eq!(&names[..8], ["as", "bs", "al", "bl", "m1", "m2", "m3", "m4"], "{f}");
            assert_eq!(names.len(), if f == Family::Grc { 9 } else { 8 });
            let ta = f.model(n).unwrap();
            for s in &suite {
                crate::logic::check_alternation_free(&s.mes).unwrap();
                crate::logic::check_against(&s.mes, &ta).unwrap();
            }
        }
    }
}

#[test]
fn state_count_bounds() {
    for n in 2..=4 {
        let size = |f: Family| f.model(n).unwrap().locations.len();
        assert!(size(Family::Fischer) <= 4usize.pow(n as u32) * (n + 1));
        assert!(size(Family::Csma) <= 3usize.pow(n as u32 + 1));
        assert!(size(Family::Grc) <= 16 * 3usize.pow(n as u32));
        assert_eq!(size(Family::Leader), (1..=n).product::<usize>());
    }
}

#[test]
fn product_sizes() {
    let locs = |f: Family, n| f.model(n).unwrap().locations.len();
    assert!(locs(Family::Fischer, 3) < locs(Family::Fischer, 4));
    assert_eq!(Family::Grc.model(2).unwrap().clocks, ["x1", "x2", "w", "y"]);
}

#[test]
fn fischer_suite_agrees_with_the_oracle() {
    let ta = Family::Fischer.model(2).unwrap();
    check_suite(Family::Fischer, &ta, &Family::Fischer.specs(2), &[]);
}

#[test]
fn csma_suite_with_small_constants_agrees_with_the_oracle() {
    let cfg = FamilyConfig::new(Family::Csma, 2).with_timing(Timing::Csma { sigma: 1, lambda: 3 });
    check_suite(Family::Csma, &cfg.model().unwrap(), &cfg.specs(), &[]);
}

#[test]
fn grc_suite_agrees_with_the_oracle() {
    let ta = Family::Grc.model(1).unwrap();
    // The 30-unit response bound makes the region graph too large.
    check_suite(Family::Grc, &ta, &Family::Grc.specs(1), &["m2"]);
}

#[test]
fn leader_suite_agrees_with_the_oracle() {
    for n in [2, 3] {
        let ta = Family::Leader.model(n).unwrap();
        check_suite(Family::Leader, &ta, &Family::Leader.specs(n), &[]);
    }
}

#[test]
fn toggles_parse() {
    let mut t = Toggles::default();
    t.apply("derived=off").unwrap();
    assert!(!t.derived && t.memo);
    assert!(t.apply("speed=off").is_err());
    assert!(t.apply("memo").is_err());
}

#[test]
fn harness_rows_render_as_csv() {
    let plan = BenchPlan {
        families: vec![Family::Fischer],
        ns: vec![2],
        specs: vec!["as".into()],
        ..BenchPlan::default()
    };
    let rows = run_benchmarks(&plan, |_| {}).unwrap();
    assert_eq!(rows.len(), 1);
    let line = rows[0].csv();
    assert!(line.starts_with("FISCHER,as,2,on,on,on,on,valid,"), "{line}");
    assert!(line.ends_with(",ok"));
    assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
}

#[test]
fn empty_plan_gives_a_header_only_csv() {
    let plan = BenchPlan {
        families: Vec::new(),
        ..BenchPlan::default()
    };
    let rows = run_benchmarks(&plan, |_| {}).unwrap();
    assert_eq!(to_csv(&rows), format!("{CSV_HEADER}\n"));
}

#[test]
fn tiny_timeouts_are_rows_not_errors() {
    let plan = BenchPlan {
        families: vec![Family::Fischer],
        ns: vec![3],
        specs: vec!["as".into()],
        timeout: Some(Duration::from_nanos(1)),
        ..BenchPlan::default()
    };
    let rows = run_benchmarks(&plan, |_| {}).unwrap();
    assert_eq!(rows[0].status, Status::Timeout);
    assert!(rows[0].csv().ends_with(",unknown,") || rows[0].csv().ends_with(",timeout"));
}

#[test]
fn verdicts_do_not_depend_on_toggles() {
    let off = |name: &str| {
        let mut t = Toggles::default();
        t.set(name, false).unwrap();
        t
    };
    let mut toggles = vec![Toggles::default()];
    toggles.extend(Toggles::NAMES.iter().map(|n| off(n)));
    let plan = BenchPlan {
        families: Family::ALL.to_vec(),
        ns: vec![2],
        toggles,
        timeout: Some(Duration::from_secs(3)),
        ..BenchPlan::default()
    };
    let rows = run_benchmarks(&plan, |_| {}).unwrap();
    // Ablations may run out of time (memo off is exponential, extrapolation
    // off need not terminate); verdicts they do reach must agree.
    let mut gave_up = 0;
    for r in &rows {
        if r.status != Status::Ok && r.toggles != Toggles::default() {
            gave_up += 1;
            continue;
        }
        assert!(r.matches_expected(), "{}", r.csv());
    }
    assert!(gave_up * 10 < rows.len(), "{gave_up} of {} rows inconclusive", rows.len());
}

#[test]
fn workload_grows_with_n() {
    for (f, spec) in [(Family::Fischer, "as"), (Family::Csma, "m2"), (Family::Leader, "al"), (Family::Grc, "as")] {
        let plan = BenchPlan {
            families: vec![f],
            ns: vec![2, 3],
            specs: vec![spec.into()],
            ..BenchPlan::default()
        };
        let rows = run_benchmarks(&plan, |_| {}).unwrap();
        assert!(rows[0].rules <= rows[1].rules, "{f}-{spec}");
    }
}
