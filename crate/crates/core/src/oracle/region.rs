use num_rational::Rational64;

use crate::zones::CmpOp;

/// Fractional-part tag for clocks above their ceiling.
pub const ABOVE: u16 = u16::MAX;

/// A clock region paired with a location.
///
/// `ints[i]` is the integer part of clock `i` (only meaningful when the
/// clock is at most its ceiling). `frac[i]` is 0 for a zero fractional part,
/// `r ≥ 1` for the `r`-th smallest non-zero fractional part, or [`ABOVE`]
/// when the clock exceeds its ceiling. A bounded clock with a non-zero
/// fractional part always has `ints[i] < k[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub loc: usize,
    pub ints: Vec<u16>,
    pub frac: Vec<u16>,
}

impl Region {
    pub fn from_valuation(loc: usize, vals: &[Rational64], k: &[i64]) -> Region {
        let n = vals.len();
        let mut ints = vec![0u16; n];
        let mut frac = vec![0u16; n];
        let mut fracs: Vec<(Rational64, usize)> = Vec::new();
        for i in 0..n {
            let v = vals[i];
            if v > Rational64::from_integer(k[i]) {
                ints[i] = 0;
                frac[i] = ABOVE;
                continue;
            }
            let fl = v.floor().to_integer();
            ints[i] = fl as u16;
            let fr = v - Rational64::from_integer(fl);
            if fr != Rational64::from_integer(0) {
                fracs.push((fr, i));
            }
        }
        fracs.sort();
        let mut rank = 0u16;
        let mut last = None;
        for (fr, i) in fracs {
            if last != Some(fr) {
                rank += 1;
                last = Some(fr);
            }
            frac[i] = rank;
        }
        Region { loc, ints, frac }
    }

    pub fn is_above(&self, i: usize) -> bool {
        self.frac[i] == ABOVE
    }

    /// Time cannot stay in the region: some bounded clock is integral.
    pub fn is_point(&self) -> bool {
        self.frac.iter().any(|&f| f == 0)
    }

    /// Every clock is above its ceiling; delay leaves the region unchanged.
    pub fn is_terminal(&self) -> bool {
        self.frac.iter().all(|&f| f == ABOVE)
    }

    fn compress(&mut self) {
        let mut ranks: Vec<u16> = self.frac.iter().copied().filter(|&f| f != 0 && f != ABOVE).collect();
        ranks.sort_unstable();
        ranks.dedup();
        for f in self.frac.iter_mut() {
            if *f != 0 && *f != ABOVE {
                *f = ranks.binary_search(f).expect("rank present") as u16 + 1;
            }
        }
    }

    /// The next region along the delay line, or `None` when terminal.
    pub fn delay_next(&self, k: &[i64]) -> Option<Region> {
        let n = self.ints.len();
        let mut out = self.clone();
        if self.is_point() {
            for i in 0..n {
                match self.frac[i] {
                    0 => {
                        if i64::from(self.ints[i]) == k[i] {
                            out.ints[i] = 0;
                            out.frac[i] = ABOVE;
                        } else {
                            out.frac[i] = 1;
                        }
                    }
                    ABOVE => {}
                    f => out.frac[i] = f + 1,
                }
            }
        } else {
            let top = self.frac.iter().copied().filter(|&f| f != ABOVE).max()?;
            for i in 0..n {
                if self.frac[i] == top {
                    out.ints[i] += 1;
                    out.frac[i] = 0;
                }
            }
        }
        out.compress();
        Some(out)
    }

    pub fn reset(&self, clocks: &[usize]) -> Region {
        let mut out = self.clone();
        for &c in clocks {
            out.ints[c] = 0;
            out.frac[c] = 0;
        }
        out.compress();
        out
    }

    pub fn with_loc(&self, loc: usize) -> Region {
        Region { loc, ..self.clone() }
    }

    /// Whether `x_i op c` holds on the region; requires `c ≤ k[i]`.
    pub fn atom(&self, i: usize, op: CmpOp, c: i64) -> bool {
        if self.is_above(i) {
            return matches!(op, CmpOp::Gt | CmpOp::Ge);
        }
        let v = i64::from(self.ints[i]);
        if self.frac[i] == 0 {
            return op.eval(Rational64::from_integer(v), c);
        }
        match op {
            CmpOp::Lt | CmpOp::Le => v < c,
            CmpOp::Gt | CmpOp::Ge => v >= c,
            CmpOp::Eq => false,
        }
    }

    /// A rational valuation inside the region.
    pub fn representative(&self, k: &[i64]) -> Vec<Rational64> {
        let m = self.frac.iter().copied().filter(|&f| f != ABOVE).max().unwrap_or(0);
        (0..self.ints.len())
            .map(|i| match self.frac[i] {
                ABOVE => Rational64::from_integer(k[i]) + Rational64::new(1, 2),
                f => Rational64::from_integer(i64::from(self.ints[i])) + Rational64::new(i64::from(f), i64::from(m) + 1),
            })
            .collect()
    }
}

/// Every region over clocks with ceilings `k` (location 0).
pub fn enumerate(k: &[i64]) -> Vec<Region> {
    let n = k.len();
    // Per clock: above, or (integer part, integral?) with the fraction's
    // order handled by ordered set partitions below.
    let mut out = Vec::new();
    let mut choice = vec![(0u16, false, false); n]; // (int, fractional, above)
    fn rec(i: usize, k: &[i64], choice: &mut Vec<(u16, bool, bool)>, out: &mut Vec<Region>) {
        if i == k.len() {
            let frac_clocks: Vec<usize> = (0..k.len()).filter(|&j| choice[j].1).collect();
            for ranks in ordered_partitions(frac_clocks.len()) {
                let mut r = Region {
                    loc: 0,
                    ints: choice.iter().map(|c| c.0).collect(),
                    frac: choice.iter().map(|c| if c.2 { ABOVE } else { 0 }).collect(),
                };
                for (idx, &j) in frac_clocks.iter().enumerate() {
                    r.frac[j] = ranks[idx];
                }
                out.push(r);
            }
            return;
        }
        choice[i] = (0, false, true);
        rec(i + 1, k, choice, out);
        for v in 0..=k[i] {
            choice[i] = (v as u16, false, false);
            rec(i + 1, k, choice, out);
            if v < k[i] {
                choice[i] = (v as u16, true, false);
                rec(i + 1, k, choice, out);
            }
        }
    }
    rec(0, k, &mut choice, &mut out);
    out
}

/// All surjections `{0..n} → {1..m}` for some `m`, as rank vectors.
fn ordered_partitions(n: usize) -> Vec<Vec<u16>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut cur = vec![0u16; n];
    fn rec(i: usize, n: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if i == n {
            let mut used: Vec<u16> = cur.clone();
            used.sort_unstable();
            used.dedup();
            if used.iter().enumerate().all(|(idx, &r)| r as usize == idx + 1) {
                out.push(cur.clone());
            }
            return;
        }
        for r in 1..=n as u16 {
            cur[i] = r;
            rec(i + 1, n, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn one_clock_region_counts() {
        assert_eq!(enumerate(&[0]).len(), 2);
        assert_eq!(enumerate(&[5]).len(), 12);
    }

    #[test]
    fn two_clock_region_count() {
        // 4 × 4 per-clock choices, with three fraction orders when both
        // clocks are strictly between 0 and 1.
        let regions = enumerate(&[1, 1]);
        let mut distinct = regions.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(regions.len(), distinct.len());
        assert_eq!(regions.len(), 18);
    }

    #[test]
    fn boundary_steps_to_open_interval() {
        let k = [3];
        let r = Region::from_valuation(0, &[q(2, 1)], &k);
        let next = r.delay_next(&k).unwrap();
        assert!(!next.is_point());
        assert_eq!(next, Region::from_valuation(0, &[q(5, 2)], &k));
        let after = next.delay_next(&k).unwrap();
        assert_eq!(after, Region::from_valuation(0, &[q(3, 1)], &k));
        let above = after.delay_next(&k).unwrap();
        assert!(above.is_terminal());
        assert!(above.delay_next(&k).is_none());
    }

    #[test]
    fn delay_orders_fractions() {
        let k = [2, 2];
        let r = Region::from_valuation(0, &[q(1, 3), q(1, 1)], &k);
        let next = r.delay_next(&k).unwrap();
        assert_eq!(next, Region::from_valuation(0, &[q(2, 3), q(4, 3)], &k));
        let next = next.delay_next(&k).unwrap();
        assert_eq!(next, Region::from_valuation(0, &[q(1, 1), q(5, 3)], &k));
    }

    #[test]
    fn representatives_round_trip() {
        let k = [2, 1, 1];
        for r in enumerate(&k) {
            assert_eq!(Region::from_valuation(0, &r.representative(&k), &k), r);
        }
    }

    #[test]
    fn atoms_on_open_intervals() {
        let k = [3];
        let r = Region::from_valuation(0, &[q(3, 2)], &k);
        assert!(r.atom(0, CmpOp::Lt, 2));
        assert!(!r.atom(0, CmpOp::Le, 1));
        assert!(r.atom(0, CmpOp::Gt, 1));
        assert!(!r.atom(0, CmpOp::Eq, 1));
    }
}
