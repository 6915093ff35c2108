use std::fmt;
use std::ops::Add;

/// Upper bound on a clock difference, `x_i - x_j ≺ c` with `≺ ∈ {<, ≤}`.
///
/// Packed into one integer so that the natural integer order is the bound
/// order: `(c, <) < (c, ≤) < (c + 1, <)`. The low bit is set for `≤`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bound(i64);

impl Bound {
    pub const INFINITY: Bound = Bound(i64::MAX);
    pub const LE_ZERO: Bound = Bound(1);
    pub const LT_ZERO: Bound = Bound(0);

    #[inline]
    pub fn le(value: i64) -> Bound {
        Bound((value << 1) | 1)
    }

    #[inline]
    pub fn lt(value: i64) -> Bound {
        Bound(value << 1)
    }

    #[inline]
    pub fn new(value: i64, strict: bool) -> Bound {
        if strict {
            Bound::lt(value)
        } else {
            Bound::le(value)
        }
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self == Bound::INFINITY
    }

    /// Constant part; meaningless for infinity.
    #[inline]
    pub fn value(self) -> i64 {
        self.0 >> 1
    }

    #[inline]
    pub fn is_strict(self) -> bool {
        !self.is_infinite() && self.0 & 1 == 0
    }

    /// Same constant, strict comparison.
    #[inline]
    pub fn to_strict(self) -> Bound {
        if self.is_infinite() {
            self
        } else {
            Bound(self.0 & !1)
        }
    }

    /// The bound of the complementary half-space, read in the opposite
    /// direction: `¬(x_i - x_j ≺ c)` is `x_j - x_i ≺' -c`.
    #[inline]
    pub fn negate(self) -> Bound {
        debug_assert!(!self.is_infinite());
        Bound::new(-self.value(), !self.is_strict())
    }

    /// Whether a rational difference `num / den` satisfies the bound.
    pub fn admits(self, num: i64, den: i64) -> bool {
        if self.is_infinite() {
            return true;
        }
        let rhs = self.value() as i128 * den as i128;
        let lhs = num as i128;
        if self.is_strict() {
            lhs < rhs
        } else {
            lhs <= rhs
        }
    }
}

impl Add for Bound {
    type Output = Bound;

    #[inline]
    fn add(self, rhs: Bound) -> Bound {
        if self.is_infinite() || rhs.is_infinite() {
            Bound::INFINITY
        } else {
            Bound(((self.value() + rhs.value()) << 1) | (self.0 & rhs.0 & 1))
        }
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "<∞")
        } else if self.is_strict() {
            write!(f, "<{}", self.value())
        } else {
            write!(f, "≤{}", self.value())
        }
    }
}
