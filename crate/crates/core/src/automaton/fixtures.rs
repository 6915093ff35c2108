use super::{parse_model, TimedAutomaton};

/// The railway-crossing train: `far` → `near` → `in` → `far`.
///
/// Reconstructed from its sample run and guard description: `approach` is
/// unguarded and resets `x1`; `in` requires `x1 == 4` and resets `x1`;
/// `exit` requires `x1 >= 1`. `near` carries the invariant `x1 <= 4`.
pub const TRAIN: &str = "\
automaton train
clocks: x1
actions: approach, in, exit
props: far, near, in, broke
location far initial labels: far
location near invariant: x1 <= 4 labels: near
location in labels: in
edge far -> near on approach reset x1
edge near -> in on in when x1 == 4 reset x1
edge in -> far on exit when x1 >= 1
";

pub fn train() -> TimedAutomaton {
    parse_model(TRAIN).expect("train fixture parses")
}
