//! `hsi`: calibrate, sample, evaluate, solve and swap random d-uniform
//! hypergraph instances, and run the seeded Monte-Carlo experiments.
//!
//! Exit codes: 0 success, 1 error, 2 no solution found, 3 no swap or pair
//! found, 4 enumeration budget exceeded, 5 a hard experiment gate failed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use hsi_core::harness::{self, Experiment, TrendPoint};
use hsi_core::modelgen::{self, calibrate_p, choose_k};
use hsi_core::moments::{self, Regime};
use hsi_core::rng::{stream_rng, Stream};
use hsi_core::selfref::{self, ProtectedRegion, SelfRefPair};
use hsi_core::solvers::{self, SolverConfig, DEFAULT_BUDGET};
use hsi_core::{Error, Instance, ModelParams, Vertex, VertexSet};

const EXIT_NONE: u8 = 2;
const EXIT_NOT_FOUND: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_GATE: u8 = 5;

#[derive(Parser)]
#[command(name = "hsi", version, about = "Dominating sets on random d-uniform hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Edge probability p* with E[X](p*) = delta.
    Calibrate(CalibrateArgs),
    /// Sample an instance and write it as JSON.
    Gen(GenArgs),
    /// Closed-form moments, one CSV row per overlap i.
    Moments(MomentsArgs),
    /// Count dominating (or quasi-dominating) sets of size k exactly.
    Solve(SolveArgs),
    /// Apply one swap to a dominating or quasi-dominating set.
    Swap(SwapArgs),
    /// Build a solvable/unsolvable instance pair.
    Pair(PairArgs),
    /// Run a Monte-Carlo experiment and write its CSV.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Defaults to max(1, round(ln n)).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = modelgen::DEFAULT_DELTA)]
    delta: f64,
    /// Relative tolerance on E[X].
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, required_unless_present = "delta", conflicts_with = "delta")]
    p: Option<f64>,
    /// Calibrate p for this target instead of passing it.
    #[arg(long)]
    delta: Option<f64>,
    /// Set size used for calibration; defaults to max(1, round(ln n)).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    p: f64,
    /// Add the quasi-dominating terms.
    #[arg(long)]
    quasi: bool,
    /// Write the rows here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    quasi: bool,
    /// Witnesses kept in the report.
    #[arg(long, default_value_t = 16)]
    witnesses: usize,
    /// Largest C(n, k) to enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Forward,
    Backward,
}

#[derive(Args)]
struct SwapArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated members of S.
    #[arg(long)]
    set: String,
    #[arg(long, value_enum)]
    dir: Direction,
    /// Comma-separated protected vertices.
    #[arg(long, default_value = "")]
    vh: String,
    /// Shuffle the candidate order with this seed instead of taking the first.
    #[arg(long)]
    seed: Option<u64>,
    /// Swapped instance.
    #[arg(long)]
    out: PathBuf,
    /// Swap record; printed to stdout when omitted.
    #[arg(long)]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = modelgen::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Protected region size; defaults to round(n^0.5).
    #[arg(long)]
    vh_size: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    retries: usize,
    /// Writes PREFIX_yes.json, PREFIX_no.json and PREFIX_record.json.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ex,
    Solvable,
    PairCorr,
    Quasi,
    Trend,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Ds,
    Vc,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// For `trend`, a comma-separated ladder of n.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long)]
    d: usize,
    /// Defaults to max(1, round(ln n)).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, conflicts_with = "p")]
    delta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overlap for `pair-corr`.
    #[arg(long, default_value_t = 0)]
    i: usize,
    #[arg(long, value_enum, default_value = "ds")]
    regime: RegimeArg,
    #[arg(long)]
    csv: PathBuf,
}

fn parse_set(text: &str, n: usize) -> anyhow::Result<VertexSet> {
    let members = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Vertex>().with_context(|| format!("bad vertex id {s:?}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(VertexSet::new(members, n)?)
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn calibrate(args: CalibrateArgs) -> anyhow::Result<u8> {
    let k = args.k.map_or_else(|| choose_k(args.n), Ok)?;
    let cal = calibrate_p(args.n, args.d, k, args.delta, args.tol)?;
    #[derive(Serialize)]
    struct Out {
        n: usize,
        d: usize,
        k: usize,
        delta: f64,
        p: f64,
        expected: f64,
        residual: f64,
        iterations: usize,
    }
    print_json(&Out {
        n: args.n,
        d: args.d,
        k,
        delta: args.delta,
        p: cal.p,
        expected: cal.expected,
        residual: cal.residual,
        iterations: cal.iterations,
    })?;
    Ok(0)
}

fn generate(args: GenArgs) -> anyhow::Result<u8> {
    let params = match (args.p, args.delta) {
        (Some(p), _) => ModelParams::new(args.n, args.d, args.k.unwrap_or(1), p, args.seed)?,
        (None, Some(delta)) => {
            let k = args.k.map_or_else(|| choose_k(args.n), Ok)?;
            ModelParams::calibrated(args.n, args.d, k, delta, args.seed)?
        }
        (None, None) => bail!("one of --p or --delta is required"),
    };
    let graph = modelgen::sample_hypergraph(&params)?;
    info!("sampled {} edges at p = {}", graph.edge_count(), params.p);
    Instance { graph, p: Some(params.p), seed: Some(params.seed) }.write(&args.out)?;
    Ok(0)
}

#[derive(Serialize)]
struct MomentRow {
    i: usize,
    m_i: usize,
    q00: Option<f64>,
    q11: Option<f64>,
    f: f64,
    ds_ratio: Option<f64>,
    vc_ratio: Option<f64>,
    phi: Option<f64>,
    w: Option<f64>,
    p1: Option<f64>,
    p2: Option<f64>,
    p3: Option<f64>,
    p4: Option<f64>,
}

fn moment_table(args: MomentsArgs) -> anyhow::Result<u8> {
    let (n, d, k, p) = (args.n, args.d, args.k, args.p);
    let report = moments::second_moment(n, d, k, p)?;
    let quasi = if args.quasi { Some(moments::quasi_second_moment(n, d, k, p)?) } else { None };
    let mut rows = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let q = quasi.as_ref().map(|q| &q.rows[i]);
        let m_i = n + i - 2 * k;
        let (q00, q11) = match q {
            Some(row) if m_i > 0 => (Some(row.q00), Some(row.q11)),
            _ => (None, None),
        };
        rows.push(MomentRow {
            i,
            m_i,
            q00,
            q11,
            f: report.f_terms[i],
            ds_ratio: moments::ds_correlation_ratio(n, d, k, i, p).ok().map(|r| r.ratio.value),
            vc_ratio: moments::vc_correlation_ratio(n, k, i, p, d).ok().map(|r| r.value),
            phi: q.map(|r| r.phi),
            w: q.map(|r| r.w),
            p1: q.map(|r| r.p1),
            p2: q.map(|r| r.p2),
            p3: q.map(|r| r.p3),
            p4: q.map(|r| r.p4),
        });
    }
    let sink: Box<dyn Write> = match &args.csv {
        Some(path) => Box::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    if args.csv.is_some() {
        #[derive(Serialize)]
        struct Summary {
            expected_count: f64,
            second_moment: f64,
            ratio_to_square: f64,
            q0: f64,
            #[serde(skip_serializing_if = "Option::is_none")]
            expected_quasi: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            quasi_second_moment: Option<f64>,
        }
        print_json(&Summary {
            expected_count: report.expected_count,
            second_moment: report.second_moment,
            ratio_to_square: report.ratio_to_square,
            q0: report.q0,
            expected_quasi: quasi.as_ref().map(|q| q.expected_quasi),
            quasi_second_moment: quasi.as_ref().map(|q| q.second_moment),
        })?;
    }
    Ok(0)
}

fn solve(args: SolveArgs) -> anyhow::Result<u8> {
    let instance = Instance::read(&args.input)?;
    let cfg = SolverConfig { budget: args.budget, witness_cap: args.witnesses, ..SolverConfig::default() };
    let report = if args.quasi {
        solvers::enumerate_quasi_dominating_sets(&instance.graph, args.k, &cfg)?
    } else {
        solvers::enumerate_dominating_sets(&instance.graph, args.k, &cfg)?
    };
    print_json(&report)?;
    Ok(if report.count > 0 { 0 } else { EXIT_NONE })
}

fn swap(args: SwapArgs) -> anyhow::Result<u8> {
    let instance = Instance::read(&args.input)?;
    let g = &instance.graph;
    let s = parse_set(&args.set, g.n())?;
    let region = ProtectedRegion::explicit(parse_set(&args.vh, g.n())?);
    let mut rng = args.seed.map(|seed| stream_rng(seed, Stream::Selection));
    let (next, record) = match args.dir {
        Direction::Forward => selfref::forward_swap(g, &s, &region, rng.as_mut())?,
        Direction::Backward => {
            let Some(v) = g.is_quasi_dominating(&s)? else {
                bail!("{s} does not leave exactly one vertex undominated");
            };
            selfref::backward_swap(g, &s, v, &region, rng.as_mut())?
        }
    };
    Instance { graph: next, ..instance }.write(&args.out)?;
    match &args.record {
        Some(path) => write_json(&record, path)?,
        None => print_json(&record)?,
    }
    Ok(0)
}

fn pair(args: PairArgs) -> anyhow::Result<u8> {
    let k = args.k.map_or_else(|| choose_k(args.n), Ok)?;
    let params = ModelParams::calibrated(args.n, args.d, k, args.delta, args.seed)?;
    let mut region_rng = stream_rng(args.seed, Stream::Region);
    let region = match args.vh_size {
        Some(size) => ProtectedRegion::of_size(args.n, size, &mut region_rng)?,
        None => ProtectedRegion::sample(args.n, 0.5, &mut region_rng)?,
    };
    let pair: SelfRefPair = selfref::build_selfref_pair(&params, &region, args.retries, &SolverConfig::default())?;
    let prefix = args.out_prefix.to_string_lossy().into_owned();
    pair.yes.write(Path::new(&format!("{prefix}_yes.json")))?;
    pair.no.write(Path::new(&format!("{prefix}_no.json")))?;
    write_json(&pair, Path::new(&format!("{prefix}_record.json")))?;
    println!(
        "attempt {}: S = {}, yes count {}, no count {}, flipped {}",
        pair.attempt_index, pair.dominating_set, pair.yes_report.count, pair.no_report.count, pair.flipped
    );
    Ok(0)
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<u8> {
    let cfg = SolverConfig::default();
    let k_for = |n: usize| args.k.map_or_else(|| choose_k(n), Ok);
    let exp: Experiment = if let Kind::Trend = args.kind {
        let delta = args.delta.unwrap_or(modelgen::DEFAULT_DELTA);
        let ladder = args
            .n
            .iter()
            .map(|&n| Ok(TrendPoint { n, d: args.d, k: k_for(n)?, delta }))
            .collect::<hsi_core::Result<Vec<_>>>()?;
        harness::ratio_trend(&ladder)?
    } else {
        let &[n] = args.n.as_slice() else {
            bail!("--n takes a single value for this kind");
        };
        let k = k_for(n)?;
        let params = match (args.p, args.delta) {
            (Some(p), _) => ModelParams::new(n, args.d, k, p, args.seed)?,
            (None, delta) => ModelParams::calibrated(n, args.d, k, delta.unwrap_or(modelgen::DEFAULT_DELTA), args.seed)?,
        };
        match args.kind {
            Kind::Ex => harness::mc_expected_count(&params, args.trials, &cfg)?,
            Kind::Solvable => harness::mc_solvable_and_unique(&params, args.trials, &cfg)?,
            Kind::PairCorr => {
                let regime = match args.regime {
                    RegimeArg::Ds => Regime::DominatingSet,
                    RegimeArg::Vc => Regime::VertexCover,
                };
                harness::mc_pair_correlation(&params, args.i, regime, args.trials, true)?
            }
            Kind::Quasi => harness::mc_quasi_frequency(&params, args.trials, &cfg)?,
            Kind::Trend => unreachable!(),
        }
    };
    harness::write_csv_file(&exp.records, &args.csv)?;
    for r in &exp.records {
        let formula = r.formula_value.map_or_else(|| "-".to_string(), |f| format!("{f:.6}"));
        println!(
            "{:<24} estimate {:.6} ± {:.6} formula {} [{}]",
            r.name,
            r.estimate,
            r.std_error,
            formula,
            r.verdict.as_str()
        );
    }
    for g in &exp.gates {
        println!("{:<24} {}", g.name, if g.passed { "pass" } else { "fail" });
    }
    Ok(if exp.passed() { 0 } else { EXIT_GATE })
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(value) = std::env::var("HSI_THREADS") {
        let threads: usize = value.parse().with_context(|| format!("HSI_THREADS = {value:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Calibrate(args) => calibrate(args),
        Command::Gen(args) => generate(args),
        Command::Moments(args) => moment_table(args),
        Command::Solve(args) => solve(args),
        Command::Swap(args) => swap(args),
        Command::Pair(args) => pair(args),
        Command::Experiment(args) => experiment(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(match e.downcast_ref::<Error>() {
                Some(Error::Budget { .. }) => EXIT_BUDGET,
                Some(Error::NotFound(_)) => EXIT_NOT_FOUND,
                _ => 1,
            })
        }
    }
}
