use std::sync::Arc;

use num_rational::Rational64;
use proptest::prelude::*;

use super::*;

const K: i64 = 5;

fn clocks() -> Arc<ClockSet> {
    ClockSet::new(vec!["x".into(), "y".into()], vec![])
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Points on a quarter grid just past the largest constant.
fn grid() -> Vec<Vec<Rational64>> {
    let mut out = Vec::new();
    for a in 0..=(4 * (K + 1)) {
        for b in 0..=(4 * (K + 1)) {
            out.push(vec![r(a, 4), r(b, 4)]);
        }
    }
    out
}

fn arb_dbm() -> impl Strategy<Value = Option<Dbm>> {
    let entry = prop_oneof![
        2 => Just(None),
        3 => (-K..=K, any::<bool>()).prop_map(Some),
    ];
    proptest::collection::vec(entry, 9).prop_map(|raw| {
        let mut m = vec![Bound::INFINITY; 9];
        for (idx, e) in raw.into_iter().enumerate() {
            let (i, j) = (idx / 3, idx % 3);
            if i == j {
                m[idx] = Bound::LE_ZERO;
            } else if let Some((c, strict)) = e {
                m[idx] = Bound::new(c, strict);
            }
        }
        Dbm::from_entries(3, m)
    })
}

fn arb_fed() -> impl Strategy<Value = Federation> {
    proptest::collection::vec(arb_dbm(), 0..4)
        .prop_map(|ds| Federation::from_dbms(&clocks(), ds.into_iter().flatten()))
}

fn shift(p: &[Rational64], d: Rational64) -> Vec<Rational64> {
    p.iter().map(|v| *v + d).collect()
}

fn nonneg(p: &[Rational64]) -> bool {
    p.iter().all(|v| *v >= r(0, 1))
}

/// Delays on an eighth grid up to `K + 2`; enough to witness any delay
/// interval between quarter points and integer bounds.
fn delays() -> impl Iterator<Item = Rational64> {
    (0..=(8 * (K + 2))).map(|n| r(n, 8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boolean_ops_match_membership(a in arb_fed(), b in arb_fed()) {
        let i = a.intersect(&b);
        let u = a.union(&b);
        let s = a.subtract(&b);
        let c = a.complement();
        for p in grid() {
            let (ia, ib) = (a.contains(&p), b.contains(&p));
            prop_assert_eq!(i.contains(&p), ia && ib);
            prop_assert_eq!(u.contains(&p), ia || ib);
            prop_assert_eq!(s.contains(&p), ia && !ib);
            prop_assert_eq!(c.contains(&p), !ia);
        }
        prop_assert_eq!(a.is_subset(&b), a.subtract(&b).is_empty());
    }

    #[test]
    fn complement_laws(a in arb_fed(), b in arb_fed()) {
        prop_assert!(a.complement().complement().set_eq(&a));
        let lhs = a.union(&b).complement();
        let rhs = a.complement().intersect(&b.complement());
        prop_assert!(lhs.set_eq(&rhs));
    }

    #[test]
    fn delay_ops_match_membership(a in arb_fed()) {
        let succ = a.succ();
        let succ_s = a.succ_strict();
        let pred = a.pred();
        let pred_s = a.pred_strict();
        for p in grid() {
            let back = |strict: bool| delays().filter(|d| !strict || *d > r(0, 1)).any(|d| {
                let q = shift(&p, -d);
                nonneg(&q) && a.contains(&q)
            });
            let fwd = |strict: bool| delays().filter(|d| !strict || *d > r(0, 1)).any(|d| a.contains(&shift(&p, d)));
            prop_assert_eq!(succ.contains(&p), back(false));
            prop_assert_eq!(succ_s.contains(&p), back(true));
            prop_assert_eq!(pred.contains(&p), fwd(false));
            prop_assert_eq!(pred_s.contains(&p), fwd(true));
        }
    }

    #[test]
    fn reset_ops_match_membership(a in arb_fed()) {
        let img = a.reset(&[1]).unwrap();
        let pre = a.reset_preimage(&[1]).unwrap();
        for p in grid() {
            let zeroed = vec![r(0, 1), p[1]];
            prop_assert_eq!(pre.contains(&p), a.contains(&zeroed));
            let expect = p[0] == r(0, 1)
                && (0..=(8 * (2 * K + 4))).any(|n| a.contains(&[r(n, 8), p[1]]));
            prop_assert_eq!(img.contains(&p), expect);
        }
    }

    #[test]
    fn timed_until_matches_membership(target in arb_fed(), bad in arb_fed()) {
        let u = Federation::timed_until(&target, &bad);
        for p in grid() {
            // Check each grid delay, then the open gap after it.
            let mut expect = false;
            for d in delays() {
                let at = shift(&p, d);
                let gap = shift(&p, d + r(1, 16));
                if target.contains(&at) {
                    expect = true;
                    break;
                }
                if bad.contains(&at) || bad.contains(&gap) {
                    break;
                }
                if target.contains(&gap) {
                    expect = true;
                    break;
                }
            }
            prop_assert_eq!(u.contains(&p), expect, "point {:?}", p);
        }
    }

    #[test]
    fn extrapolation_is_sound_and_idempotent(a in arb_fed()) {
        let k = [0, 3, 2];
        let e = a.extrapolate(&k);
        prop_assert!(a.is_subset(&e));
        prop_assert!(e.extrapolate(&k).set_eq(&e));
    }

    #[test]
    fn freeze_clock_round_trip(a in arb_fed()) {
        let ext = a.add_freeze_clock("z").unwrap();
        prop_assert_eq!(ext.clocks().len(), 3);
        for p in grid() {
            let q = vec![p[0], p[1], r(0, 1)];
            prop_assert_eq!(ext.contains(&q), a.contains(&p));
        }
        let back = ext.drop_freeze_clock("z").unwrap();
        prop_assert!(back.set_eq(&a));
    }
}

#[test]
fn sampled_ten_thousand_points() {
    use rand::{Rng, SeedableRng};
    let cs = clocks();
    let a = Federation::from_atoms(&cs, &[Atom::new(1, CmpOp::Ge, 1), Atom::new(1, CmpOp::Le, 3)])
        .union(&Federation::from_atoms(&cs, &[Atom::new(2, CmpOp::Gt, 4)]));
    let b = Federation::from_atoms(&cs, &[Atom::new(1, CmpOp::Lt, 2)]);
    let s = a.subtract(&b);
    let c = a.complement();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..10_000 {
        let p = vec![r(rng.gen_range(0..64), 8), r(rng.gen_range(0..64), 8)];
        assert_eq!(s.contains(&p), a.contains(&p) && !b.contains(&p));
        assert_eq!(c.contains(&p), !a.contains(&p));
    }
}

#[test]
fn display_lists_constraints() {
    let cs = ClockSet::new(vec!["x1".into()], vec![]);
    let f = Federation::from_atoms(&cs, &[Atom::new(1, CmpOp::Ge, 1), Atom::new(1, CmpOp::Le, 3)])
        .union(&Federation::from_atoms(&cs, &[Atom::new(1, CmpOp::Gt, 5)]));
    assert_eq!(f.to_string(), "x1>=1 && x1<=3 || x1>5");
    assert_eq!(Federation::empty(&cs).to_string(), "false");
    assert_eq!(Federation::universe(&cs).to_string(), "true");
}

#[test]
fn mismatched_clock_sets_error() {
    let a = Federation::universe(&clocks());
    let b = Federation::universe(&ClockSet::new(vec!["x".into()], vec![]));
    assert!(matches!(a.try_intersect(&b), Err(ZoneError::DimensionMismatch { .. })));
    assert!(a.reset(&[7]).is_err());
    assert!(a.add_freeze_clock("x").is_err());
    assert!(a.drop_freeze_clock("x").is_err());
}
