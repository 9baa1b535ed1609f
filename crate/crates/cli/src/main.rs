//! `bilevel`: compile, reduce, evaluate and verify polynomial bilevel programs from the shell.
//!
//! Exit status is 0 on success, 1 when a verification finds a mismatch, 2 on bad input.
//! Diagnostics go to stderr as one JSON object per line.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bilevel_core::encoder::{
    convexity_certificate, encode_indicator_convex, encode_lsc_bounded, encode_piecewise_unbounded,
    encode_pw_lsc_bounded, encode_sa_unbounded, moment_lift, BilevelProgram, Mode, KNOWN_CONSTRUCTIONS,
};
use bilevel_core::hardness::{oracle_decide, reduce_to_bilevel, verify_reduction, Instance, DEFAULT_ORACLE_CAP};
use bilevel_core::scalar::{format_rational, parse_rational, rational_to_f64};
use bilevel_core::semialg::{
    disjointify, graph_closure_of, piecewise_eval, target_eval, ClosedSASet, GrowthBounds, SASet,
    SamplePlan, SpecFile, DEFAULT_POOL_CAP,
};
use bilevel_core::valuefn::{
    cross_validate, eval_constructed, eval_constructed_as, eval_generic, exact_tolerance, semicontinuity_probe,
    EvalConfig, Evaluator, ProbeConfig, Semicontinuity,
};
use bilevel_core::{Extended, Rational};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bilevel", version, about = "Polynomial bilevel programs: compile, reduce, evaluate, verify")]
struct Cli {
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON file of evaluator settings; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a target specification into a bilevel program.
    Compile(CompileArgs),
    /// Build the degree-5 program of a subset-sum-interval instance.
    Reduce(ReduceArgs),
    /// Value function at sample points, one JSON line per point.
    Evaluate(EvaluateArgs),
    /// Check a program against a spec, the generic evaluator, or its source instance.
    Verify(VerifyArgs),
    /// Decide a subset-sum-interval instance by dynamic programming.
    Oracle(OracleArgs),
    /// Split a union of basic sets into pairwise disjoint cells.
    Disjointify(DisjointifyArgs),
    /// Moment lift of a bounded program.
    Lift(LiftArgs),
    /// Convexity certificate of the lower objective.
    Certify(CertifyArgs),
}

#[derive(Args)]
struct CompileArgs {
    /// One of sa-unbounded, lsc-bounded, indicator, piecewise-unbounded, pw-lsc-bounded.
    #[arg(long)]
    construction: String,
    #[arg(long)]
    spec: PathBuf,
    /// Growth bounds `B=..,N=..`; defaults to the ones in the spec.
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long, default_value = "optimistic")]
    mode: String,
    /// Points where the growth bounds are checked.
    #[arg(long, default_value = "grid:[-2,2]:41")]
    validate: String,
    #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
    pool_cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the degree and coefficient certificate.
    #[arg(long)]
    certify: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Exact,
    Generic,
    Both,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    program: PathBuf,
    /// `grid:[lo,hi]:count`, `random:[lo,hi]:count[:seed]` or `file:PATH`.
    #[arg(long, default_value = "grid:[-2,2]:9")]
    points: String,
    #[arg(long, value_enum, default_value_t = Which::Exact)]
    evaluator: Which,
    /// Evaluate under this mode instead of the program's own.
    #[arg(long)]
    mode: Option<String>,
    /// Also write the values as tab-separated columns.
    #[arg(long)]
    dump_grid: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    program: Option<PathBuf>,
    /// Compare exactly against this target.
    #[arg(long, conflicts_with = "instance")]
    spec: Option<PathBuf>,
    /// Verify the reduction of this instance.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "grid:[-2,2]:201")]
    points: String,
    /// Tolerance for the generic evaluator.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Also run the semicontinuity probe matching the program's mode at every point.
    #[arg(long)]
    probe: bool,
    #[arg(long, default_value_t = 20)]
    probe_samples: usize,
    /// Random non-binary points checked in instance mode.
    #[arg(long, default_value_t = 10)]
    off_binary: usize,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DisjointifyArgs {
    /// A `sa-set` or `basic-set` spec file.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
    pool_cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LiftArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    program: PathBuf,
    /// Upper-level points at which the Hessian and midpoint checks run.
    #[arg(long, default_value = "grid:[-2,2]:5")]
    points: String,
    #[arg(long, default_value_t = 32)]
    pairs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Why a run stopped.
enum Failure {
    Input { kind: String, message: String },
    Verification(String),
}

type Outcome = Result<(), Failure>;

fn input(kind: &str, message: impl Into<String>) -> Failure {
    Failure::Input { kind: kind.into(), message: message.into() }
}

impl From<bilevel_core::Error> for Failure {
    fn from(e: bilevel_core::Error) -> Self {
        let debug = format!("{e:?}");
        let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
        Failure::Input { kind, message: e.to_string() }
    }
}

fn diag(record: Value) {
    eprintln!("{record}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            diag(json!({"level": "error", "kind": "Usage", "message": message.trim_end()}));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(first)) => {
            diag(json!({"level": "error", "kind": "VerificationFailed", "message": first}));
            ExitCode::from(1)
        }
        Err(Failure::Input { kind, message }) => {
            diag(json!({"level": "error", "kind": kind, "message": message}));
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(input("Usage", "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input("Threads", e.to_string()))?;
    }
    let cfg = eval_config(cli.config.as_deref(), cli.seed)?;
    let seed = cli.seed;
    match cli.command {
        Command::Compile(a) => compile(a),
        Command::Reduce(a) => reduce(a),
        Command::Evaluate(a) => evaluate(a, &cfg, seed),
        Command::Verify(a) => verify(a, &cfg, seed),
        Command::Oracle(a) => {
            let inst = read_instance(&a.instance)?;
            emit(a.out.as_deref(), &oracle_decide(&inst, a.cap)?)
        }
        Command::Disjointify(a) => {
            let set = match read_spec(&a.spec)? {
                SpecFile::SaSet(s) => s,
                SpecFile::BasicSet(b) => SASet::single(b),
                other => return Err(wrong_kind(&a.spec, &other, "sa-set or basic-set")),
            };
            let cells = disjointify(&set, a.pool_cap)?;
            diag(json!({"level": "info", "event": "disjointify", "pieces": set.pieces().len(), "cells": cells.len()}));
            emit(a.out.as_deref(), &SpecFile::SaSet(SASet::new(set.num_vars(), cells)?))
        }
        Command::Lift(a) => {
            let prog = read_program(&a.program)?;
            emit(a.out.as_deref(), &moment_lift(&prog)?)
        }
        Command::Certify(a) => {
            let prog = read_program(&a.program)?;
            let xs = read_points(&a.points, prog.n(), seed)?;
            let report = convexity_certificate(&prog, &xs, a.pairs, seed)?;
            emit(a.out.as_deref(), &report)?;
            match report.violations.first() {
                None => Ok(()),
                Some(v) => Err(Failure::Verification(v.clone())),
            }
        }
    }
}

fn eval_config(path: Option<&Path>, seed: u64) -> Result<EvalConfig, Failure> {
    let mut cfg = match path {
        Some(p) => serde_json::from_str::<EvalConfig>(&read_text(p)?)
            .map_err(|e| input("Config", format!("{}: {e}", p.display())))?,
        None => EvalConfig::default(),
    };
    cfg.seed = seed;
    cfg.validate()?;
    Ok(cfg)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input("Io", format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| input("Format", format!("{} is not a valid {what}: {e}", path.display())))
}

fn read_spec(path: &Path) -> Result<SpecFile, Failure> {
    read_json(path, "spec file")
}

fn read_program(path: &Path) -> Result<BilevelProgram, Failure> {
    read_json(path, "program")
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    read_json(path, "instance")
}

fn kind_name(spec: &SpecFile) -> &'static str {
    match spec {
        SpecFile::BasicSet(_) => "basic-set",
        SpecFile::SaSet(_) => "sa-set",
        SpecFile::ClosedSet(_) => "closed-set",
        SpecFile::SaFunction(_) => "sa-function",
        SpecFile::Piecewise(_) => "piecewise",
    }
}

fn wrong_kind(path: &Path, got: &SpecFile, want: &str) -> Failure {
    input("SpecKind", format!("{}: expected {want}, found {}", path.display(), kind_name(got)))
}

fn parse_mode(s: &str) -> Result<Mode, Failure> {
    s.parse().map_err(|e: bilevel_core::Error| input("Usage", e.to_string()))
}

/// A sample plan, or `file:PATH` holding a JSON array of points with rational-string coordinates.
/// Random plans without their own seed take the global one.
fn read_points(plan: &str, n: usize, seed: u64) -> Result<Vec<Vec<Rational>>, Failure> {
    if let Some(path) = plan.strip_prefix("file:") {
        let raw: Vec<Vec<String>> = read_json(Path::new(path), "point list")?;
        let pts = raw
            .iter()
            .map(|p| p.iter().map(|c| parse_rational(c)).collect::<bilevel_core::Result<Vec<_>>>())
            .collect::<bilevel_core::Result<Vec<_>>>()?;
        return Ok(SamplePlan::Points(pts).points(n)?);
    }
    let mut parsed: SamplePlan = plan.parse()?;
    if let SamplePlan::Random { seed: s, .. } = &mut parsed {
        let explicit = plan.rsplit(']').next().is_some_and(|tail| tail.split(':').filter(|p| !p.is_empty()).count() > 1);
        if !explicit {
            *s = seed;
        }
    }
    Ok(parsed.points(n)?)
}

fn to_text<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| input("Format", e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_out(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| input("Io", format!("{}: {e}", p.display())))?;
            diag(json!({"level": "info", "event": "wrote", "path": p.display().to_string()}));
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(input("Io", format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn emit<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Outcome {
    write_out(out, &to_text(value)?)
}

fn point_text(x: &[Rational]) -> Vec<String> {
    x.iter().map(format_rational).collect()
}

fn compile(a: CompileArgs) -> Outcome {
    let mode = parse_mode(&a.mode)?;
    let spec = read_spec(&a.spec)?;
    let bounds_for = |own: Option<&GrowthBounds>| -> Result<GrowthBounds, Failure> {
        match (&a.bounds, own) {
            (Some(s), _) => s.parse().map_err(|e: bilevel_core::Error| input("Usage", e.to_string())),
            (None, Some(b)) => Ok(b.clone()),
            (None, None) => Err(input("Usage", "this construction needs --bounds B=..,N=..")),
        }
    };
    let plan: SamplePlan = a.validate.parse()?;
    let prog = match a.construction.as_str() {
        "sa-unbounded" => match &spec {
            SpecFile::SaFunction(f) => encode_sa_unbounded(&f.normalize(), mode)?,
            other => return Err(wrong_kind(&a.spec, other, "sa-function")),
        },
        "lsc-bounded" => {
            let (closure, own): (ClosedSASet, Option<&GrowthBounds>) = match &spec {
                SpecFile::ClosedSet(c) => (c.clone(), None),
                SpecFile::SaFunction(f) => match f.closure() {
                    Some(c) => (c.clone(), f.growth()),
                    None => return Err(input("SpecKind", "sa-function spec has no `closure` of its graph")),
                },
                SpecFile::Piecewise(p) => (graph_closure_of(p)?, None),
                other => return Err(wrong_kind(&a.spec, other, "closed-set, sa-function with closure, or piecewise")),
            };
            encode_lsc_bounded(&closure, &bounds_for(own)?, mode, &plan)?
        }
        "indicator" => match &spec {
            SpecFile::BasicSet(b) => encode_indicator_convex(b, mode)?,
            other => return Err(wrong_kind(&a.spec, other, "basic-set")),
        },
        "piecewise-unbounded" => match &spec {
            SpecFile::Piecewise(p) => encode_piecewise_unbounded(p, mode, a.pool_cap)?,
            other => return Err(wrong_kind(&a.spec, other, "piecewise")),
        },
        "pw-lsc-bounded" => match &spec {
            SpecFile::Piecewise(p) => {
                let (prog, warnings) = encode_pw_lsc_bounded(p, &bounds_for(None)?, mode, &plan)?;
                for w in warnings {
                    diag(json!({"level": "warning", "event": "compile", "message": w}));
                }
                prog
            }
            other => return Err(wrong_kind(&a.spec, other, "piecewise")),
        },
        "hardness" => return Err(input("Usage", "hardness programs come from `reduce --instance`")),
        other => {
            return Err(input("Usage", format!("unknown construction `{other}`; known: {}", KNOWN_CONSTRUCTIONS.join(", "))))
        }
    };
    diag(json!({
        "level": "info", "event": "compiled", "construction": a.construction, "mode": mode.to_string(),
        "n": prog.n(), "m": prog.m(), "deg_p": prog.p().degree(), "deg_q": prog.q().degree(),
    }));
    emit(a.out.as_deref(), &prog)
}

fn reduce(a: ReduceArgs) -> Outcome {
    let inst = read_instance(&a.instance)?;
    let (prog, cert) = reduce_to_bilevel(&inst)?;
    if a.certify {
        let record = json!({"certificate": cert, "holds": cert.holds()});
        match &a.out {
            Some(_) => write_out(None, &to_text(&record)?)?,
            None => diag(record),
        }
    }
    emit(a.out.as_deref(), &prog)?;
    if a.certify && !cert.holds() {
        return Err(Failure::Verification(format!("certificate fails: {cert:?}")));
    }
    Ok(())
}

fn f64_json(v: &Extended<f64>) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn evaluate(a: EvaluateArgs, cfg: &EvalConfig, seed: u64) -> Outcome {
    let mut prog = read_program(&a.program)?;
    let mode = match &a.mode {
        Some(s) => parse_mode(s)?,
        None => prog.mode(),
    };
    let points = read_points(&a.points, prog.n(), seed)?;
    let mut lines = String::new();
    let mut tsv = String::new();
    let mut header: Vec<String> = (0..prog.n()).map(|i| format!("x{i}")).collect();
    if a.evaluator != Which::Generic {
        header.push("exact".into());
    }
    if a.evaluator != Which::Exact {
        header.push("generic".into());
        prog = prog.with_mode(mode);
    }
    let _ = writeln!(tsv, "{}", header.join("\t"));
    for x in &points {
        let mut row = json!({"x": point_text(x)});
        let mut cols: Vec<String> = x.iter().map(|v| rational_to_f64(v).to_string()).collect();
        if a.evaluator != Which::Generic {
            let v = eval_constructed_as(&prog, x, mode)?;
            row["exact"] = json!(v.to_string());
            cols.push(v.to_f64().to_string());
        }
        if a.evaluator != Which::Exact {
            let r = eval_generic(&prog, x, cfg)?;
            row["generic"] = f64_json(&r.value);
            cols.push(r.value.to_f64().to_string());
        }
        let _ = writeln!(lines, "{row}");
        let _ = writeln!(tsv, "{}", cols.join("\t"));
    }
    if let Some(p) = &a.dump_grid {
        fs::write(p, &tsv).map_err(|e| input("Io", format!("{}: {e}", p.display())))?;
    }
    write_out(a.out.as_deref(), &lines)
}

fn verify(a: VerifyArgs, cfg: &EvalConfig, seed: u64) -> Outcome {
    if let Some(path) = &a.instance {
        let inst = read_instance(path)?;
        let report = verify_reduction(&inst, a.cap, true, a.off_binary, cfg, a.tol, seed)?;
        emit(a.out.as_deref(), &report)?;
        return match report.mismatches.first() {
            None => Ok(()),
            Some(m) => Err(Failure::Verification(m.clone())),
        };
    }
    let path = a.program.as_deref().ok_or_else(|| input("Usage", "verify needs --program or --instance"))?;
    let prog = read_program(path)?;
    let points = read_points(&a.points, prog.n(), seed)?;
    let mut first: Option<String> = None;
    let summary = match &a.spec {
        Some(spec_path) => {
            let spec = read_spec(spec_path)?;
            let mut mismatches = Vec::new();
            for x in &points {
                let got = eval_constructed(&prog, x)?;
                let want = spec_value(&spec, x)?;
                if got != want {
                    mismatches.push(json!({"x": point_text(x), "program": got.to_string(), "spec": want.to_string()}));
                }
            }
            if let Some(m) = mismatches.first() {
                first = Some(format!("first mismatch: {m}"));
            }
            json!({"checked": points.len(), "mismatches": mismatches})
        }
        None => {
            let report = cross_validate(&prog, &points, cfg, a.tol)?;
            if let Some(m) = report.mismatches.first() {
                first = Some(format!("first mismatch at {:?}: exact {}, generic {}", m.point, m.exact, m.generic));
            }
            serde_json::to_value(&report).map_err(|e| input("Format", e.to_string()))?
        }
    };
    let mut record = json!({"program": path.display().to_string(), "result": summary});
    if a.probe {
        let pcfg = ProbeConfig { samples: a.probe_samples, seed, ..ProbeConfig::default() };
        let kind = Semicontinuity::for_mode(prog.mode());
        let mut flagged = Vec::new();
        for x in &points {
            let r = semicontinuity_probe(&prog, x, &pcfg, &Evaluator::Constructed, Some(kind))?;
            if !r.passed() {
                flagged.push(point_text(x));
            }
        }
        if first.is_none() {
            if let Some(x) = flagged.first() {
                first = Some(format!("{kind:?} semicontinuity violated at {x:?}"));
            }
        }
        record["probe"] = json!({"kind": kind, "points": points.len(), "violations": flagged});
    }
    emit(a.out.as_deref(), &record)?;
    match first {
        None => Ok(()),
        Some(m) => Err(Failure::Verification(m)),
    }
}

/// The target value a spec file prescribes at `x`: the function, or the indicator of a set.
fn spec_value(spec: &SpecFile, x: &[Rational]) -> Result<Extended<Rational>, Failure> {
    let indicator = |inside: bool| Extended::Finite(Rational::from_integer(i64::from(inside).into()));
    Ok(match spec {
        SpecFile::SaFunction(f) => target_eval(f, x, None, &exact_tolerance())?,
        SpecFile::Piecewise(p) => Extended::Finite(piecewise_eval(p, x)?),
        SpecFile::BasicSet(b) => indicator(b.contains(x)?),
        SpecFile::SaSet(s) => indicator(s.contains(x)?),
        SpecFile::ClosedSet(c) => indicator(c.contains(x)?),
    })
}
