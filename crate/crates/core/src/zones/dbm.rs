use super::bound::Bound;
use num_rational::Rational64;

/// Difference bound matrix over `dim - 1` clocks plus the zero reference
/// clock at index 0. Entry `(i, j)` bounds `x_i - x_j`.
///
/// Every `Dbm` handed out by the public constructors is canonical (closed
/// under the triangle inequality) and non-empty; operations that can produce
/// the empty set return `Option<Dbm>` or drop the result.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    dim: usize,
    m: Vec<Bound>,
}

impl Dbm {
    /// All non-negative valuations.
    pub fn universe(dim: usize) -> Dbm {
        assert!(dim >= 1, "a DBM needs at least the reference clock");
        let mut m = vec![Bound::INFINITY; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Bound::LE_ZERO;
            m[i] = Bound::LE_ZERO;
        }
        Dbm { dim, m }
    }

    /// The single valuation with every clock at 0.
    pub fn origin(dim: usize) -> Dbm {
        Dbm {
            dim,
            m: vec![Bound::LE_ZERO; dim * dim],
        }
    }

    /// Builds a DBM from raw entries, canonicalizing. `None` if empty.
    pub fn from_entries(dim: usize, entries: Vec<Bound>) -> Option<Dbm> {
        assert_eq!(entries.len(), dim * dim);
        let mut d = Dbm { dim, m: entries };
        for i in 0..dim {
            let ii = d.get(i, i).min(Bound::LE_ZERO);
            d.set(i, i, ii);
            let zi = d.get(0, i).min(Bound::LE_ZERO);
            d.set(0, i, zi);
        }
        d.canonicalize().then_some(d)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.m[i * self.dim + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.m[i * self.dim + j] = b;
    }

    pub fn entries(&self) -> &[Bound] {
        &self.m
    }

    /// Floyd–Warshall closure. Returns `false` when a negative cycle shows
    /// the zone is empty.
    pub fn canonicalize(&mut self) -> bool {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.m[i * n + k];
                if ik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let via = ik + self.m[k * n + j];
                    if via < self.m[i * n + j] {
                        self.m[i * n + j] = via;
                    }
                }
            }
            if self.m[k * n + k] < Bound::LE_ZERO {
                return false;
            }
        }
        (0..n).all(|i| self.m[i * n + i] >= Bound::LE_ZERO)
    }

    /// Tightens entry `(i, j)` to `b` and restores canonical form in
    /// `O(dim²)`. Returns `false` if the zone became empty.
    pub fn constrain(&mut self, i: usize, j: usize, b: Bound) -> bool {
        if b >= self.get(i, j) {
            return true;
        }
        if b + self.get(j, i) < Bound::LE_ZERO {
            return false;
        }
        self.set(i, j, b);
        let n = self.dim;
        for k in 0..n {
            let ki = self.get(k, i);
            if ki.is_infinite() {
                continue;
            }
            let kij = ki + b;
            for l in 0..n {
                let via = kij + self.get(j, l);
                if via < self.get(k, l) {
                    self.set(k, l, via);
                }
            }
        }
        true
    }

    /// Entrywise inclusion; valid because both sides are canonical.
    pub fn is_subset_of(&self, other: &Dbm) -> bool {
        debug_assert_eq!(self.dim, other.dim);
        self.m.iter().zip(&other.m).all(|(a, b)| a <= b)
    }

    pub fn intersect(&self, other: &Dbm) -> Option<Dbm> {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                if i != j && !out.constrain(i, j, other.get(i, j)) {
                    return None;
                }
            }
        }
        Some(out)
    }

    /// Delay closure: drop upper bounds on clocks.
    pub fn up(&self) -> Dbm {
        let mut out = self.clone();
        for i in 1..self.dim {
            out.set(i, 0, Bound::INFINITY);
        }
        out
    }

    /// Valuations reached from this zone by a strictly positive delay.
    pub fn up_strict(&self) -> Option<Dbm> {
        let mut out = self.up();
        for i in 1..self.dim {
            let b = out.get(0, i).to_strict();
            out.set(0, i, b);
        }
        out.canonicalize().then_some(out)
    }

    /// Valuations that reach this zone after some delay `δ ≥ 0`.
    pub fn down(&self) -> Dbm {
        let mut out = self.clone();
        for i in 1..self.dim {
            out.set(0, i, Bound::LE_ZERO);
        }
        let ok = out.canonicalize();
        debug_assert!(ok);
        out
    }

    /// Valuations that reach this zone after a delay `δ > 0`.
    pub fn down_strict(&self) -> Option<Dbm> {
        let mut out = self.clone();
        for i in 1..self.dim {
            out.set(0, i, Bound::LE_ZERO);
            let b = out.get(i, 0).to_strict();
            out.set(i, 0, b);
        }
        out.canonicalize().then_some(out)
    }

    /// Sets clock `x` to zero. Keeps canonical form.
    pub fn reset(&mut self, x: usize) {
        debug_assert!(x > 0 && x < self.dim);
        for j in 0..self.dim {
            if j != x {
                let zj = self.get(0, j);
                let j0 = self.get(j, 0);
                self.set(x, j, zj);
                self.set(j, x, j0);
            }
        }
    }

    /// Removes every constraint on clock `x` except `x ≥ 0`.
    pub fn free(&mut self, x: usize) {
        debug_assert!(x > 0 && x < self.dim);
        for j in 0..self.dim {
            if j != x {
                self.set(x, j, Bound::INFINITY);
                let j0 = self.get(j, 0);
                self.set(j, x, j0);
            }
        }
        self.set(0, x, Bound::LE_ZERO);
    }

    /// Max-constant widening: upper bounds above `k_i` become `∞`, lower
    /// bounds below `-k_j` become `(-k_j, <)`. `k[0]` must be 0.
    pub fn extrapolate(&self, k: &[i64]) -> Dbm {
        debug_assert_eq!(k.len(), self.dim);
        let n = self.dim;
        let mut current = self.clone();
        // Closure can re-derive a finite entry above the ceiling; repeat
        // until the canonical form stops changing.
        loop {
            let mut out = current.clone();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let b = out.get(i, j);
                    if b.is_infinite() {
                        continue;
                    }
                    if b.value() > k[i] {
                        out.set(i, j, Bound::INFINITY);
                    } else if b.value() < -k[j] {
                        out.set(i, j, Bound::lt(-k[j]));
                    }
                }
            }
            let ok = out.canonicalize();
            debug_assert!(ok);
            if out == current {
                return out;
            }
            current = out;
        }
    }

    /// `self \ other` as a list of pairwise-disjoint canonical zones.
    pub fn subtract(&self, other: &Dbm) -> Vec<Dbm> {
        debug_assert_eq!(self.dim, other.dim);
        if self.intersect(other).is_none() {
            return vec![self.clone()];
        }
        let n = self.dim;
        let mut rest = self.clone();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let b = other.get(i, j);
                if b.is_infinite() || b >= rest.get(i, j) {
                    continue;
                }
                let mut piece = rest.clone();
                if piece.constrain(j, i, b.negate()) {
                    out.push(piece);
                }
                if !rest.constrain(i, j, b) {
                    return out;
                }
            }
        }
        out
    }

    /// Membership of a rational valuation (`point[0]` is ignored and taken
    /// to be the reference clock 0).
    pub fn contains(&self, point: &[Rational64]) -> bool {
        debug_assert_eq!(point.len() + 1, self.dim);
        let val = |i: usize| {
            if i == 0 {
                Rational64::from_integer(0)
            } else {
                point[i - 1]
            }
        };
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let diff = val(i) - val(j);
                if !self.get(i, j).admits(*diff.numer(), *diff.denom()) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether delay is unbounded from some valuation of the zone.
    pub fn is_unbounded(&self) -> bool {
        (1..self.dim).all(|i| self.get(i, 0).is_infinite())
    }
}

impl std::fmt::Debug for Dbm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Dbm({})", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| format!("{:?}", self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(dim: usize, cons: &[(usize, usize, Bound)]) -> Vec<Bound> {
        let mut m = vec![Bound::INFINITY; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Bound::LE_ZERO;
            m[i] = Bound::LE_ZERO;
        }
        for &(i, j, b) in cons {
            m[i * dim + j] = b;
        }
        m
    }

    #[test]
    fn canonicalize_keeps_tight_zone() {
        let d = Dbm::from_entries(2, raw(2, &[(1, 0, Bound::le(2)), (0, 1, Bound::LE_ZERO)])).unwrap();
        assert_eq!(d.get(1, 0), Bound::le(2));
        assert_eq!(d.get(0, 1), Bound::LE_ZERO);
    }

    #[test]
    fn canonicalize_tightens_through_triangle() {
        let d = Dbm::from_entries(3, raw(3, &[(1, 2, Bound::le(2)), (2, 0, Bound::le(3))])).unwrap();
        assert_eq!(d.get(1, 0), Bound::le(5));
    }

    #[test]
    fn canonicalize_detects_negative_cycle() {
        let m = raw(2, &[(1, 0, Bound::lt(1)), (0, 1, Bound::lt(-1))]);
        assert!(Dbm::from_entries(2, m).is_none());
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let mut d = Dbm::from_entries(3, raw(3, &[(1, 2, Bound::le(2)), (2, 0, Bound::le(3)), (0, 2, Bound::lt(-1))])).unwrap();
        let before = d.clone();
        assert!(d.canonicalize());
        assert_eq!(before, d);
    }

    #[test]
    fn subtract_pieces_are_disjoint() {
        let a = Dbm::from_entries(2, raw(2, &[(1, 0, Bound::le(5))])).unwrap();
        let b = Dbm::from_entries(2, raw(2, &[(1, 0, Bound::le(3)), (0, 1, Bound::le(-1))])).unwrap();
        let pieces = a.subtract(&b);
        assert_eq!(pieces.len(), 2);
        assert!(pieces[0].intersect(&pieces[1]).is_none());
        for p in &pieces {
            assert!(p.intersect(&b).is_none());
        }
    }

    #[test]
    fn extrapolation_widens_large_lower_bound() {
        let d = Dbm::from_entries(2, raw(2, &[(0, 1, Bound::le(-7))])).unwrap();
        let e = d.extrapolate(&[0, 5]);
        assert_eq!(e.get(0, 1), Bound::lt(-5));
        assert!(e.get(1, 0).is_infinite());
    }
}
