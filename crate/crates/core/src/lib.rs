pub mod automaton;
pub mod bench;
pub mod logic;
pub mod oracle;
pub mod prover;
pub mod random;
pub mod zones;

pub use automaton::{parse_model, TimedAutomaton};
pub use logic::{compile_tctl, parse_mes, parse_tctl, Formula, Mes, TctlSpec};
pub use oracle::{oracle_check, OracleConfig};
pub use prover::{prove, ProofNode, Prover, ProverConfig, ProverError, Stats, Verdict};
pub use zones::{Atom, ClockSet, CmpOp, Dbm, Federation};
