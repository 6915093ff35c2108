//! Zones: difference bound matrices and finite unions of them.

mod bound;
mod constraint;
mod dbm;
mod federation;

pub use bound::Bound;
pub use constraint::{Atom, CmpOp};
pub use dbm::Dbm;
pub use federation::{ClockId, ClockKind, ClockSet, Federation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZoneError {
    #[error("clock sets differ: {left:?} vs {right:?}")]
    DimensionMismatch { left: Vec<String>, right: Vec<String> },
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("clock `{0}` already exists")]
    DuplicateClock(String),
}

#[cfg(test)]
mod tests;
