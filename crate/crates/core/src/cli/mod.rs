//! The `dxp` command line. Results are written as one JSON document per
//! line; diagnostics go to stderr.
//!
//! Exit status: 0 on success, 1 on any error, 2 when the ball holds no
//! adversarial example (so there is no CXp and the only AXp is empty).

mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use log::warn;
use serde::Serialize;

pub use args::{Algo, Cli, Command, Shape};

use crate::enumerate::{ffa_scores, marco_enumerate, EnumerationLimits, ExplanationSets};
use crate::error::{Error, Result};
use crate::explain::{
    deletion_cxp, dichotomic_cxp, extract_axp, order_features, swift_cxp, FeatureOrder, SearchOptions, SwiftParams,
};
use crate::features::FeatureSet;
use crate::fixtures::synthetic_linear;
use crate::mincxp::smallest_cxp;
use crate::models::load_model;
use crate::norm::Ball;
use crate::oracle::server::{serve, ServerOptions};
use crate::oracle::{Backend, ExhaustiveOracle};
use crate::predicates::{is_minimal_axp, is_minimal_cxp};
use crate::problem::{Explanation, ExplanationKind, ExplanationProblem, Instance, SearchStats};
use args::{AxpArgs, BenchArgs, Common, CxpArgs, EnumerateArgs, FfaArgs, Limits, SearchArgs, ServeArgs};

/// Parses `std::env::args`, runs the command and maps the outcome to an
/// exit status.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", describe(&e));
            ExitCode::from(exit_status(&e))
        }
    }
}

pub fn exit_status(e: &Error) -> u8 {
    match e {
        Error::NoAdvExample { .. } => 2,
        _ => 1,
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::NoAdvExample { .. } => e.to_string(),
        _ => format!("error: {e}"),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cxp(a) => cmd_cxp(&a),
        Command::Axp(a) => cmd_axp(&a),
        Command::Enumerate(a) => cmd_enumerate(&a),
        Command::MinCxp(a) => cmd_min_cxp(&a),
        Command::Ffa(a) => cmd_ffa(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Serve(a) => cmd_serve(&a),
    }
}

#[derive(Serialize, Default)]
struct ExplanationRecord {
    record: &'static str,
    kind: &'static str,
    features: Vec<usize>,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    algo: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
    oracle_calls: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    batches: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_rounds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cancelled_probes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speedup_vs_dicho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
}

impl ExplanationRecord {
    fn new(kind: ExplanationKind, features: &FeatureSet, stats: &SearchStats, timing: bool) -> Self {
        Self {
            record: "explanation",
            kind: kind.as_str(),
            features: features.to_one_based(),
            size: features.len(),
            oracle_calls: stats.oracle_calls,
            wall_ms: timing.then(|| millis(stats.wall_time)),
            ..Self::default()
        }
    }

    fn with_search(mut self, stats: &SearchStats, algo: Algo, workers: usize, timing: bool) -> Self {
        self.algo = Some(algo.as_str());
        if algo == Algo::Swift {
            self.workers = Some(workers);
            self.batches = Some(stats.batches);
            self.fd_rounds = (stats.fd_rounds > 0).then_some(stats.fd_rounds);
            self.cancelled_probes = timing.then_some(stats.cancelled_probes);
        }
        self
    }
}

#[derive(Serialize)]
struct SummaryRecord {
    record: &'static str,
    axps: usize,
    cxps: usize,
    complete: bool,
    oracle_calls: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<f64>,
}

impl SummaryRecord {
    fn new(sets: &ExplanationSets, timing: bool) -> Self {
        Self {
            record: "summary",
            axps: sets.axps.len(),
            cxps: sets.cxps.len(),
            complete: sets.complete,
            oracle_calls: sets.stats.oracle_calls,
            wall_ms: timing.then(|| millis(sets.stats.wall_time)),
        }
    }
}

fn millis(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

struct Output {
    path: PathBuf,
    sink: Box<dyn Write>,
}

impl Output {
    fn open(path: Option<&Path>) -> Result<Self> {
        Ok(match path {
            Some(p) => Self {
                path: p.to_path_buf(),
                sink: Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
            },
            None => Self {
                path: PathBuf::from("<stdout>"),
                sink: Box::new(io::stdout()),
            },
        })
    }

    fn text(&mut self, s: &str) -> Result<()> {
        self.sink
            .write_all(s.as_bytes())
            .and_then(|_| self.sink.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    fn record<T: Serialize>(&mut self, record: &T) -> Result<()> {
        let line = serde_json::to_string(record).expect("records always serialize") + "\n";
        self.text(&line)
    }
}

/// Re-checks results with a fresh exhaustive oracle when the problem is
/// small and finite enough for one.
struct Verifier {
    oracle: Option<ExhaustiveOracle>,
}

impl Verifier {
    fn new(problem: &ExplanationProblem, disabled: bool) -> Self {
        let oracle = (!disabled && problem.space().all_finite()).then(|| ExhaustiveOracle::new(problem.clone()));
        Self { oracle }
    }

    fn check(&mut self, kind: ExplanationKind, set: &FeatureSet, ball: Ball) -> Result<Option<bool>> {
        let Some(o) = self.oracle.as_mut() else {
            return Ok(None);
        };
        let verdict = match kind {
            ExplanationKind::Cxp => is_minimal_cxp(o, set, ball),
            ExplanationKind::Axp => is_minimal_axp(o, set, ball),
        };
        match verdict {
            Ok(true) => Ok(Some(true)),
            Ok(false) => Err(Error::Validation(format!(
                "self-check failed: {set} is not a minimal {}",
                kind.as_str()
            ))),
            Err(Error::Oracle(e)) => {
                warn!("self-check skipped: {e}");
                self.oracle = None;
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}

fn load_problem(model: &Path, instance: &Path) -> Result<ExplanationProblem> {
    ExplanationProblem::from_file(load_model(model)?, Instance::load(instance)?)
}

struct Session {
    problem: ExplanationProblem,
    ball: Ball,
    oracle: Backend,
    order: FeatureOrder,
    out: Output,
    verifier: Verifier,
    timing: bool,
}

impl Session {
    fn open(c: &Common) -> Result<Self> {
        let problem = load_problem(&c.model, &c.instance)?;
        let ball = Ball::new(c.ball.norm, c.ball.epsilon)?;
        let oracle = Backend::open(&c.oracle, &problem, c.oracle_timeout_ms.map(Duration::from_millis))?;
        let order = order_features(&problem, &c.order, ball)?;
        Ok(Self {
            verifier: Verifier::new(&problem, c.no_verify),
            out: Output::open(c.output.as_deref())?,
            problem,
            ball,
            oracle,
            order,
            timing: !c.no_timing,
        })
    }
}

fn search_cxp(oracle: &Backend, order: &FeatureOrder, ball: Ball, s: &SearchArgs) -> Result<Explanation> {
    let options = SearchOptions {
        use_witness_seed: !s.no_witness_seed,
        trace: false,
    };
    match s.algo {
        Algo::Linear => deletion_cxp(&mut oracle.clone(), order, ball),
        Algo::Dicho => dichotomic_cxp(&mut oracle.clone(), order, ball, &options),
        Algo::Swift => {
            let params = SwiftParams {
                workers: s.workers,
                delta: s.delta,
                seed: s.seed,
                options,
            };
            params.validate()?;
            swift_cxp(oracle, order, ball, &params)
        }
    }
}

fn cmd_cxp(a: &CxpArgs) -> Result<()> {
    let mut s = Session::open(&a.common)?;
    let e = search_cxp(&s.oracle, &s.order, s.ball, &a.search)?;
    let mut rec = ExplanationRecord::new(e.kind, &e.features, &e.stats, s.timing).with_search(
        &e.stats,
        a.search.algo,
        a.search.workers,
        s.timing,
    );
    rec.verified = s.verifier.check(e.kind, &e.features, s.ball)?;
    s.out.record(&rec)
}

fn cmd_axp(a: &AxpArgs) -> Result<()> {
    let mut s = Session::open(&a.common)?;
    let m = s.problem.num_features();
    let seed = match &a.from {
        Some(list) => FeatureSet::from_one_based(list, m)?,
        None => FeatureSet::full(m),
    };
    let e = extract_axp(&mut s.oracle, &seed, &s.order, s.ball)?;
    let mut rec = ExplanationRecord::new(e.kind, &e.features, &e.stats, s.timing);
    rec.verified = s.verifier.check(e.kind, &e.features, s.ball)?;
    s.out.record(&rec)
}

fn enumeration_limits(l: &Limits) -> EnumerationLimits {
    EnumerationLimits {
        total: l.limit,
        cxps: l.limit_cxp,
    }
}

/// Runs the enumeration, streaming a record per explanation when `stream`
/// is set, and returns the sets found.
fn enumerate(s: &mut Session, limits: &Limits, stream: bool) -> Result<ExplanationSets> {
    let mut failure: Option<Error> = None;
    let Session {
        oracle,
        order,
        ball,
        out,
        verifier,
        timing,
        ..
    } = s;
    let ball = *ball;
    let result = marco_enumerate(oracle, order, ball, enumeration_limits(limits), |em| {
        if failure.is_some() {
            return;
        }
        let step = verifier.check(em.kind, em.features, ball).and_then(|verified| {
            if !stream {
                return Ok(());
            }
            let mut rec = ExplanationRecord::new(em.kind, em.features, &SearchStats::default(), false);
            rec.oracle_calls = em.oracle_calls;
            rec.verified = verified;
            out.record(&rec)
        });
        if let Err(e) = step {
            failure = Some(e);
        }
    });
    let sets = match result {
        Ok(sets) => sets,
        Err(aborted) => {
            if stream {
                out.record(&SummaryRecord::new(&aborted.partial, *timing))?;
            }
            return Err(aborted.error);
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    if !sets.complete {
        warn!("enumeration stopped at a limit; the lists are partial");
    }
    Ok(sets)
}

fn no_cxp(sets: &ExplanationSets) -> bool {
    sets.complete && sets.cxps.is_empty()
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<()> {
    let mut s = Session::open(&a.common)?;
    let sets = enumerate(&mut s, &a.limits, true)?;
    s.out.record(&SummaryRecord::new(&sets, s.timing))?;
    if no_cxp(&sets) {
        return Err(Error::NoAdvExample {
            oracle_calls: sets.stats.oracle_calls,
        });
    }
    Ok(())
}

fn cmd_min_cxp(c: &Common) -> Result<()> {
    let mut s = Session::open(c)?;
    let r = smallest_cxp(&mut s.oracle, s.ball)?;
    let e = &r.explanation;
    let mut rec = ExplanationRecord::new(e.kind, &e.features, &e.stats, s.timing);
    rec.lower_bound = Some(r.lower_bound);
    rec.iterations = Some(r.iterations);
    rec.verified = s.verifier.check(e.kind, &e.features, s.ball)?;
    s.out.record(&rec)
}

fn cmd_ffa(a: &FfaArgs) -> Result<()> {
    let mut s = Session::open(&a.common)?;
    let m = s.problem.num_features();
    if let Some(shape) = a.shape {
        if shape.height * shape.width != m {
            return Err(Error::Usage(format!(
                "shape {}x{} has {} pixels but the model has {m} features",
                shape.height,
                shape.width,
                shape.height * shape.width
            )));
        }
    }
    let sets = enumerate(&mut s, &a.limits, false)?;
    if no_cxp(&sets) {
        return Err(Error::NoAdvExample {
            oracle_calls: sets.stats.oracle_calls,
        });
    }
    let scores = ffa_scores(&sets.cxps, m)?;
    s.out.text(&scores.to_csv())?;
    if let (Some(shape), Some(path)) = (a.shape, &a.heatmap) {
        let pgm = scores.to_pgm(shape.height, shape.width)?;
        std::fs::write(path, pgm).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchSummary {
    record: &'static str,
    features: usize,
    delay_ms: u64,
    workers: usize,
    outputs_agree: bool,
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let problem = match (&a.model, &a.instance, a.synthetic) {
        (Some(model), Some(instance), _) => load_problem(model, instance)?,
        (_, _, Some(m)) if m > 0 => synthetic_linear(m, a.fraction, a.seed),
        _ => {
            return Err(Error::Usage(
                "bench needs --model and --instance, or --synthetic M with M > 0".into(),
            ))
        }
    };
    let ball = Ball::new(a.ball.norm, a.ball.epsilon)?;
    let order = order_features(&problem, &a.order, ball)?;
    let oracle = Backend::open(&a.oracle, &problem, None)?.delayed(Duration::from_millis(a.delay_ms));
    let mut out = Output::open(a.output.as_deref())?;
    let timing = !a.no_timing;
    let mut rows = Vec::new();
    for &algo in &a.algos {
        let search = SearchArgs {
            algo,
            workers: a.workers,
            delta: a.delta,
            seed: a.seed,
            no_witness_seed: false,
        };
        let start = Instant::now();
        let e = search_cxp(&oracle, &order, ball, &search)?;
        rows.push((algo, e, start.elapsed()));
    }
    let dicho = rows.iter().find(|r| r.0 == Algo::Dicho).map(|r| r.2);
    for (algo, e, wall) in &rows {
        let mut rec = ExplanationRecord::new(e.kind, &e.features, &e.stats, timing)
            .with_search(&e.stats, *algo, a.workers, timing);
        rec.record = "bench";
        rec.batches = Some(e.stats.batches);
        rec.speedup_vs_dicho = dicho
            .filter(|_| timing)
            .map(|d| (1e3 * d.as_secs_f64() / wall.as_secs_f64().max(1e-9)).round() / 1e3);
        out.record(&rec)?;
    }
    let searches: Vec<_> = rows
        .iter()
        .filter(|r| r.0 != Algo::Linear)
        .map(|r| &r.1.features)
        .collect();
    out.record(&BenchSummary {
        record: "bench-summary",
        features: problem.num_features(),
        delay_ms: a.delay_ms,
        workers: a.workers,
        outputs_agree: searches.windows(2).all(|w| w[0] == w[1]),
    })
}

fn cmd_serve(a: &ServeArgs) -> Result<()> {
    let file = load_model(&a.model)?;
    let opts = ServerOptions {
        delay: Duration::from_millis(a.delay_ms),
        ..ServerOptions::default()
    };
    serve(&file, io::stdin().lock(), io::stdout(), &opts)
}
