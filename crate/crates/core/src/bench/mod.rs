//! Parameterised benchmark families, their spec suites and a CSV harness.
//!
//! Each family is a set of components composed into one automaton (see
//! `compose`); steps interleave unless a component module says otherwise.

mod compose;
pub mod csma;
pub mod fischer;
pub mod grc;
pub mod leader;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::automaton::TimedAutomaton;
use crate::logic::{parse_mes, parse_tctl, Mes};
use crate::prover::{Prover, ProverConfig, ProverError};

pub use compose::CompositionCap;

/// Largest product the generators will emit.
pub const LOCATION_CAP: usize = 200_000;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

pub const CSV_HEADER: &str = "family,spec,n,memo,derived,invspec,extrap,verdict,wall_ms,rules,memo_hits,status";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Fischer,
    Csma,
    Grc,
    Leader,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Fischer, Family::Csma, Family::Grc, Family::Leader];

    pub fn name(self) -> &'static str {
        match self {
            Family::Fischer => "FISCHER",
            Family::Csma => "CSMA",
            Family::Grc => "GRC",
            Family::Leader => "LEADER",
        }
    }

    pub fn min_n(self) -> usize {
        match self {
            Family::Grc => 1,
            _ => 2,
        }
    }

    pub fn model(self, n: usize) -> Result<TimedAutomaton, BenchError> {
        FamilyConfig::new(self, n).model()
    }

    /// The spec suite for `n` components at the default timing.
    pub fn specs(self, n: usize) -> Vec<SpecCase> {
        FamilyConfig::new(self, n).specs()
    }
}

/// Timing constants of a family; `Timing::default_for` gives the documented
/// defaults (the `DELAY`, `SIGMA`, ... constants of each module).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Timing {
    Fischer {
        delay: i64,
        wait: i64,
    },
    Csma {
        sigma: i64,
        lambda: i64,
    },
    Grc {
        near_min: i64,
        near_max: i64,
        in_max: i64,
        react: i64,
        down_time: i64,
        up_time: i64,
        response: i64,
    },
    Leader {
        vote_min: i64,
        vote_max: i64,
    },
}

impl Timing {
    pub fn default_for(family: Family) -> Timing {
        match family {
            Family::Fischer => Timing::Fischer {
                delay: fischer::DELAY,
                wait: fischer::WAIT,
            },
            Family::Csma => Timing::Csma {
                sigma: csma::SIGMA,
                lambda: csma::LAMBDA,
            },
            Family::Grc => Timing::Grc {
                near_min: grc::NEAR_MIN,
                near_max: grc::NEAR_MAX,
                in_max: grc::IN_MAX,
                react: grc::REACT,
                down_time: grc::DOWN_TIME,
                up_time: grc::UP_TIME,
                response: grc::RESPONSE,
            },
            Family::Leader => Timing::Leader {
                vote_min: leader::VOTE_MIN,
                vote_max: leader::VOTE_MAX,
            },
        }
    }

    fn family(&self) -> Family {
        match self {
            Timing::Fischer { .. } => Family::Fischer,
            Timing::Csma { .. } => Family::Csma,
            Timing::Grc { .. } => Family::Grc,
            Timing::Leader { .. } => Family::Leader,
        }
    }

    fn constants(&self) -> Vec<i64> {
        match *self {
            Timing::Fischer { delay, wait } => vec![delay, wait],
            Timing::Csma { sigma, lambda } => vec![sigma, lambda],
            Timing::Grc {
                near_min,
                near_max,
                in_max,
                react,
                down_time,
                up_time,
                response,
            } => vec![near_min, near_max, in_max, react, down_time, up_time, response],
            Timing::Leader { vote_min, vote_max } => vec![vote_min, vote_max],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyConfig {
    pub family: Family,
    pub n: usize,
    pub timing: Timing,
}

impl FamilyConfig {
    pub fn new(family: Family, n: usize) -> FamilyConfig {
        FamilyConfig {
            family,
            n,
            timing: Timing::default_for(family),
        }
    }

    pub fn with_timing(self, timing: Timing) -> FamilyConfig {
        FamilyConfig { timing, ..self }
    }

    fn check(&self) -> Result<(), BenchError> {
        if self.n < self.family.min_n() {
            return Err(BenchError::TooSmall(self.family, self.n));
        }
        if self.timing.family() != self.family || self.timing.constants().iter().any(|c| *c <= 0) {
            return Err(BenchError::Timing(self.family));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<TimedAutomaton, BenchError> {
        self.check()?;
        let n = self.n;
        Ok(match self.timing {
            Timing::Fischer { delay, wait } => compose::compose(&fischer::Fischer { n, delay, wait }, LOCATION_CAP)?,
            Timing::Csma { sigma, lambda } => compose::compose(&csma::Csma { n, sigma, lambda }, LOCATION_CAP)?,
            Timing::Grc {
                near_min,
                near_max,
                in_max,
                react,
                down_time,
                up_time,
                ..
            } => compose::compose(
                &grc::Grc {
                    n,
                    near_min,
                    near_max,
                    in_max,
                    react,
                    down_time,
                    up_time,
                },
                LOCATION_CAP,
            )?,
            Timing::Leader { vote_min, vote_max } => {
                compose::compose(&leader::Leader { n, vote_min, vote_max }, LOCATION_CAP)?
            }
        })
    }

    /// The suite with expected verdicts. The expectations are those of the
    /// default timing; other constants may change them.
    pub fn specs(&self) -> Vec<SpecCase> {
        let n = self.n;
        match self.timing {
            Timing::Fischer { .. } => fischer::specs(n),
            Timing::Csma { sigma, .. } => csma::specs(n, sigma),
            Timing::Grc { response, .. } => grc::specs(n, response),
            Timing::Leader { vote_max, .. } => leader::specs(n, vote_max),
        }
    }
}

/// Model text in the automaton grammar.
pub fn generate_model(cfg: &FamilyConfig) -> Result<String, BenchError> {
    Ok(cfg.model()?.to_string())
}

pub fn spec_suite(cfg: &FamilyConfig) -> Vec<SpecCase> {
    cfg.specs()
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Family, BenchError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("{0} needs more than {1} components")]
    TooSmall(Family, usize),
    #[error(transparent)]
    Cap(#[from] CompositionCap),
    #[error("{0} timing constants must be positive and belong to the family")]
    Timing(Family),
    #[error("unknown toggle `{0}`")]
    UnknownToggle(String),
    #[error("{family}-{spec} n={n}: {source}")]
    Prover {
        family: Family,
        spec: String,
        n: usize,
        source: ProverError,
    },
}

#[derive(Clone, Debug)]
pub struct SpecCase {
    pub name: &'static str,
    pub mes: Mes,
    pub expected: bool,
}

impl SpecCase {
    pub(crate) fn new(name: &'static str, mes: Mes, expected: bool) -> SpecCase {
        SpecCase { name, mes, expected }
    }
}

pub(crate) fn mes(text: &str) -> Mes {
    parse_mes(text).unwrap_or_else(|e| panic!("suite spec `{text}`: {e}"))
}

fn tctl(text: &str) -> Mes {
    parse_tctl(text).unwrap_or_else(|e| panic!("suite spec `{text}`: {e}")).compile()
}

pub(crate) fn ag(p: &str) -> Mes {
    tctl(&format!("AG({p})"))
}

pub(crate) fn af(p: &str) -> Mes {
    tctl(&format!("AF({p})"))
}

pub(crate) fn leads_to(p: &str, q: &str) -> Mes {
    tctl(&format!("({p}) --> ({q})"))
}

pub(crate) fn conj(parts: &[String]) -> String {
    if parts.is_empty() {
        "true".into()
    } else {
        parts.join(" && ")
    }
}

pub(crate) fn disj(parts: &[String]) -> String {
    if parts.is_empty() {
        "false".into()
    } else {
        parts.join(" || ")
    }
}

/// The four prover optimisations a run can switch off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Toggles {
    pub memo: bool,
    pub derived: bool,
    pub invspec: bool,
    pub extrap: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            memo: true,
            derived: true,
            invspec: true,
            extrap: true,
        }
    }
}

impl Toggles {
    pub const NAMES: [&'static str; 4] = ["memo", "derived", "invspec", "extrap"];

    pub fn set(&mut self, name: &str, on: bool) -> Result<(), BenchError> {
        let slot = match name {
            "memo" => &mut self.memo,
            "derived" => &mut self.derived,
            "invspec" => &mut self.invspec,
            "extrap" => &mut self.extrap,
            _ => return Err(BenchError::UnknownToggle(name.to_string())),
        };
        *slot = on;
        Ok(())
    }

    /// Parses `name=on|off`.
    pub fn apply(&mut self, assignment: &str) -> Result<(), BenchError> {
        let bad = || BenchError::UnknownToggle(assignment.to_string());
        let (name, value) = assignment.split_once('=').ok_or_else(bad)?;
        let on = match value.trim() {
            "on" | "true" | "1" => true,
            "off" | "false" | "0" => false,
            _ => return Err(bad()),
        };
        self.set(name.trim(), on)
    }

    pub fn config(&self, timeout: Option<Duration>) -> ProverConfig {
        ProverConfig {
            use_memo: self.memo,
            use_derived_rules: self.derived,
            use_invariant_specialization: self.invspec,
            extrapolation: self.extrap,
            timeout,
            ..ProverConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Timeout,
    OomGuard,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Timeout => "timeout",
            Status::OomGuard => "oom-guard",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub family: Family,
    pub spec: String,
    pub n: usize,
    pub toggles: Toggles,
    pub verdict: Option<bool>,
    pub expected: bool,
    pub wall: Duration,
    pub rules: u64,
    pub memo_hits: u64,
    pub status: Status,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        let onoff = |b: bool| if b { "on" } else { "off" };
        let verdict = match self.verdict {
            Some(true) => "valid",
            Some(false) => "invalid",
            None => "unknown",
        };
        let t = &self.toggles;
        format!(
            "{},{},{},{},{},{},{},{},{:.3},{},{},{}",
            self.family,
            self.spec,
            self.n,
            onoff(t.memo),
            onoff(t.derived),
            onoff(t.invspec),
            onoff(t.extrap),
            verdict,
            self.wall.as_secs_f64() * 1e3,
            self.rules,
            self.memo_hits,
            self.status.as_str()
        )
    }

    pub fn matches_expected(&self) -> bool {
        self.verdict == Some(self.expected)
    }
}

/// Proves one spec and reports the outcome; timeouts and the key guard are
/// rows, everything else is an error.
pub fn run_spec(
    family: Family,
    n: usize,
    ta: &TimedAutomaton,
    spec: &SpecCase,
    toggles: Toggles,
    timeout: Option<Duration>,
) -> Result<BenchRow, BenchError> {
    let start = Instant::now();
    let fail = |source| BenchError::Prover {
        family,
        spec: spec.name.to_string(),
        n,
        source,
    };
    let mut prover = Prover::new(ta, &spec.mes, toggles.config(timeout)).map_err(fail)?;
    let outcome = with_deep_stack(|| prover.prove());
    let wall = start.elapsed();
    let stats = prover.stats();
    let (verdict, status) = match outcome {
        Ok(v) => (Some(v.valid), Status::Ok),
        Err(ProverError::Timeout(_)) => (None, Status::Timeout),
        Err(ProverError::KeyLimit(_)) => (None, Status::OomGuard),
        Err(e) => return Err(fail(e)),
    };
    Ok(BenchRow {
        family,
        spec: spec.name.to_string(),
        n,
        toggles,
        verdict,
        expected: spec.expected,
        wall,
        rules: stats.rule_total,
        memo_hits: stats.memo_hits,
        status,
    })
}

/// Stack reserved for a proof search; without memoization the recursion
/// follows whole paths of the zone graph.
pub const PROOF_STACK: usize = 1 << 30;

/// Runs `f` on a scoped thread with `PROOF_STACK` bytes of stack.
pub fn with_deep_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(PROOF_STACK)
            .spawn_scoped(s, f)
            .expect("spawn proof thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

#[derive(Clone, Debug)]
pub struct BenchPlan {
    pub families: Vec<Family>,
    pub ns: Vec<usize>,
    /// Restrict to these spec names; empty runs the whole suite.
    pub specs: Vec<String>,
    pub toggles: Vec<Toggles>,
    pub timeout: Option<Duration>,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            families: Family::ALL.to_vec(),
            ns: vec![2, 3],
            specs: Vec::new(),
            toggles: vec![Toggles::default()],
            timeout: Some(DEFAULT_TIMEOUT),
        }
    }
}

/// Header plus one line per row.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Runs the plan, handing each row to `sink` as soon as it is measured.
pub fn run_benchmarks(plan: &BenchPlan, mut sink: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &family in &plan.families {
        for &n in &plan.ns {
            if n < family.min_n() {
                continue;
            }
            let ta = family.model(n)?;
            for spec in family.specs(n) {
                if !plan.specs.is_empty() && !plan.specs.iter().any(|s| s.eq_ignore_ascii_case(spec.name)) {
                    continue;
                }
                for &t in &plan.toggles {
                    let row = run_spec(family, n, &ta, &spec, t, plan.timeout)?;
                    sink(&row);
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
