use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use relmu::bench::{self, BenchPlan, Family, FamilyConfig, Toggles, CSV_HEADER};
use relmu::oracle::{oracle_check_with, OracleConfig};
use relmu::prover::{Prover, ProverError};
use relmu::random::{random_instance, GenConfig};
use relmu::{parse_mes, parse_model, parse_tctl, Mes};
use rand::{rngs::StdRng, SeedableRng};
use serde_json::json;

#[derive(Parser)]
#[command(name = "relmu", version, about = "Proof-based model checking of timed automata")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a property of a model; exits 0 if it holds, 1 if not, 2 on error or timeout.
    Check(CheckArgs),
    /// Run benchmark families and print CSV.
    Bench(BenchArgs),
    /// Print a generated benchmark model.
    Model {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
    },
    /// Compare the proof engine with the region oracle on random instances.
    Selftest {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Proof,
    Region,
}

#[derive(Args)]
struct CheckArgs {
    /// Model file.
    model: PathBuf,
    /// Equation-system file.
    #[arg(long, conflicts_with = "tctl", required_unless_present = "tctl")]
    mes: Option<PathBuf>,
    /// Inline TCTL property, e.g. "AG(!broke)".
    #[arg(long)]
    tctl: Option<String>,
    #[arg(long, value_enum, default_value_t = Engine::Proof)]
    engine: Engine,
    /// Disable memoisation across fixpoint sessions.
    #[arg(long)]
    no_memo: bool,
    /// Use the primitive rules only.
    #[arg(long)]
    no_derived: bool,
    /// Disable invariant specialisation.
    #[arg(long)]
    no_invspec: bool,
    /// Disable zone extrapolation.
    #[arg(long)]
    no_extrap: bool,
    /// Print the proof tree (replayed before printing).
    #[arg(long)]
    proof: bool,
    #[arg(long)]
    stats: bool,
    #[arg(long)]
    json: bool,
    /// Seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Family name or ALL; repeatable.
    #[arg(long = "family", default_value = "ALL")]
    families: Vec<String>,
    /// Size or inclusive range, e.g. 4 or 2..4.
    #[arg(long, default_value = "2..4")]
    n: String,
    /// Restrict to these specs (comma separated).
    #[arg(long, value_delimiter = ',')]
    spec: Vec<String>,
    /// Switch an optimisation, e.g. derived=off; repeatable.
    #[arg(long)]
    toggle: Vec<String>,
    /// Also run each spec with one optimisation off at a time.
    #[arg(long)]
    ablate: bool,
    /// Seconds per run.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.cmd {
        Cmd::Check(args) => check(&args),
        Cmd::Bench(args) => run_bench(&args).map(|()| 0),
        Cmd::Model { family, n } => bench::generate_model(&FamilyConfig::new(family, n))
            .map(|text| {
                print!("{text}");
                0
            })
            .map_err(Into::into),
        Cmd::Selftest { count, seed } => selftest(count, seed),
    };
    match run {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).context("timeout must be a non-negative number of seconds")
}

fn load_spec(args: &CheckArgs) -> Result<Mes> {
    if let Some(t) = &args.tctl {
        return Ok(parse_tctl(t)?.compile());
    }
    let path = args.mes.as_ref().expect("clap requires --mes or --tctl");
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_mes(&text).with_context(|| format!("in {}", path.display()))?)
}

fn check(args: &CheckArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let ta = parse_model(&text).with_context(|| format!("in {}", args.model.display()))?;
    let mes = load_spec(args)?;
    let engine = match args.engine {
        Engine::Proof => "proof",
        Engine::Region => "region",
    };
    if args.engine == Engine::Region {
        let holds = oracle_check_with(&ta, &mes, OracleConfig::default())?;
        if args.json {
            println!("{}", json!({ "engine": engine, "holds": holds }));
        } else {
            println!("{}", verdict_word(holds));
        }
        return Ok(exit_code(holds));
    }
    let toggles = Toggles {
        memo: !args.no_memo,
        derived: !args.no_derived,
        invspec: !args.no_invspec,
        extrap: !args.no_extrap,
    };
    let mut cfg = toggles.config(args.timeout.map(seconds).transpose()?);
    cfg.record_proof = args.proof;
    let mut prover = Prover::new(&ta, &mes, cfg)?;
    let outcome = bench::with_deep_stack(|| prover.prove());
    let verdict = match outcome {
        Ok(v) => v,
        Err(ProverError::Timeout(t)) => {
            if args.json {
                println!("{}", json!({ "engine": engine, "holds": null, "status": "timeout", "stats": prover.stats() }));
            }
            bail!("timeout after {:.3}s", t.as_secs_f64());
        }
        Err(e) => return Err(e.into()),
    };
    let proof = match &verdict.proof {
        Some(p) => {
            prover.validate_proof(p).map_err(|e| anyhow::anyhow!("proof replay failed: {e}"))?;
            Some(p.render())
        }
        None => None,
    };
    if args.json {
        let mut out = json!({
            "engine": engine,
            "holds": verdict.valid,
            "status": "ok",
            "stats": verdict.stats,
        });
        if let Some(p) = &proof {
            out["proof"] = json!(p.lines().collect::<Vec<_>>());
        }
        println!("{out}");
    } else {
        println!("{}", verdict_word(verdict.valid));
        if let Some(p) = &proof {
            print!("{p}");
        }
        if args.stats {
            print!("{}", verdict.stats.render());
        }
    }
    Ok(exit_code(verdict.valid))
}

fn verdict_word(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "fails"
    }
}

fn exit_code(holds: bool) -> u8 {
    if holds {
        0
    } else {
        1
    }
}

fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || format!("bad size `{s}`, expected N or A..B");
    Ok(match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.trim().parse().with_context(bad)?, b.trim().parse().with_context(bad)?);
            if a > b {
                bail!(bad());
            }
            (a..=b).collect()
        }
        None => vec![s.trim().parse().with_context(bad)?],
    })
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let mut families = Vec::new();
    for f in &args.families {
        if f.eq_ignore_ascii_case("all") {
            families.extend(Family::ALL);
        } else {
            families.push(f.parse::<Family>()?);
        }
    }
    families.dedup();
    let mut base = Toggles::default();
    for t in &args.toggle {
        base.apply(t)?;
    }
    let mut toggles = vec![base];
    if args.ablate {
        for name in Toggles::NAMES {
            let mut t = base;
            t.set(name, false)?;
            if !toggles.contains(&t) {
                toggles.push(t);
            }
        }
    }
    let plan = BenchPlan {
        families,
        ns: parse_range(&args.n)?,
        specs: args.spec.clone(),
        toggles,
        timeout: Some(seconds(args.timeout)?),
    };
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "{CSV_HEADER}")?;
    let mut failed = None;
    bench::run_benchmarks(&plan, |row| {
        if failed.is_none() {
            failed = writeln!(out, "{}", row.csv()).and_then(|()| out.flush()).err();
        }
    })?;
    match failed {
        Some(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn selftest(count: usize, seed: u64) -> Result<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let cfg = GenConfig::default();
    let mut mismatches = 0;
    for i in 0..count {
        let inst = random_instance(&mut rng, &cfg);
        let proved = relmu::prove(&inst.ta, &inst.mes, Default::default())?.valid;
        let oracle = relmu::oracle_check(&inst.ta, &inst.mes)?;
        if proved != oracle {
            mismatches += 1;
            eprintln!("instance {i}: proof engine says {proved}, region oracle {oracle}\n{}\n{}", inst.ta, inst.mes);
        }
    }
    println!("{count} instances, {mismatches} mismatches");
    Ok(u8::from(mismatches > 0))
}
