use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use convexop::check::{
    empirical_constant_sweep, revalidate_document, run_check, CheckConfig, PropertyKind, DEFAULT_TOLERANCE,
};
use convexop::harness::io::{body_to_json, load_body, save_body};
use convexop::harness::{default_suite, run_experiment, CorpusKind, CorpusSpec, ExperimentConfig};
use convexop::measures::{
    centroid, mean_width_exact, quermassintegral_kubota_mc, quermassintegrals_exact, steiner_point, volume,
};
use convexop::operators::{apply, ApplyContext, OperatorSpec};
use convexop::Body;

#[derive(Parser)]
#[command(name = "convexop", version, about = "Convex-body operators and property checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Body utilities.
    Body {
        #[command(subcommand)]
        cmd: BodyCmd,
    },
    /// Operator utilities.
    Op {
        #[command(subcommand)]
        cmd: OpCmd,
    },
    /// Measures of a body (JSON on stdout).
    Measure(MeasureArgs),
    /// Runs one property check.
    Check(CheckArgs),
    /// RS/BM empirical constants across dimensions.
    Sweep(SweepArgs),
    /// Runs an experiment matrix and writes a report bundle.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
enum BodyCmd {
    /// Generates bodies from a corpus.
    Gen(GenArgs),
}

#[derive(Subcommand)]
enum OpCmd {
    /// Applies an operator to a body.
    Apply(ApplyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Corpus: JSON, a path to a JSON file, or shorthand such as
    /// `random_gauss_hull:8`, `near_simplex:0.02`, `lowdim_embed:1`.
    #[arg(long)]
    corpus: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Output directory; bodies are printed one per line when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ApplyArgs {
    /// Operator in compact syntax (e.g. `wannerer:1,2,3,4`) or a JSON file.
    #[arg(long)]
    op: String,
    /// Body JSON file.
    #[arg(long)]
    body: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    All,
    Volume,
    Quermass,
    Kubota,
    MeanWidth,
    Steiner,
    Centroid,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    body: PathBuf,
    #[arg(long, value_enum, default_value_t = Quantity::All)]
    what: Quantity,
    /// Monte Carlo sample count (Kubota and Steiner).
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, required_unless_present = "revalidate")]
    op: Option<String>,
    #[arg(long, required_unless_present = "revalidate")]
    property: Option<String>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long)]
    corpus: Option<String>,
    /// Constant for RS/BM style checks.
    #[arg(long)]
    bound: Option<f64>,
    /// Report JSON path; the per-trial CSV goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-runs the witness in a witness or report file instead.
    #[arg(long, conflicts_with_all = ["op", "property"])]
    revalidate: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    op: String,
    #[arg(long, default_value = "RS")]
    property: String,
    /// Comma-separated dimensions.
    #[arg(long, default_value = "2,3")]
    n: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long)]
    corpus: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON or TOML config; the built-in matrix when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundle directory.
    #[arg(long, required_unless_present = "print_default")]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides every group's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Prints the built-in config and exits.
    #[arg(long)]
    print_default: bool,
}

fn parse_op(s: &str) -> Result<OperatorSpec> {
    let path = Path::new(s);
    if path.extension().is_some_and(|e| e == "json") && path.exists() {
        let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        return Ok(OperatorSpec::from_json(&v)?);
    }
    Ok(s.parse()?)
}

fn shorthand(s: &str, n: usize) -> Result<CorpusKind> {
    let (name, arg) = match s.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let int = |d: usize| -> Result<usize> { Ok(arg.map(str::parse).transpose()?.unwrap_or(d)) };
    Ok(match name {
        "random_gauss_hull" => CorpusKind::RandomGaussHull { m: int(n + 4)? },
        "simplex" => CorpusKind::Simplex,
        "near_simplex" => CorpusKind::NearSimplex {
            jitter: arg.map(str::parse).transpose()?.unwrap_or(0.02),
        },
        "cube" => CorpusKind::Cube,
        "cross_polytope" => CorpusKind::CrossPolytope,
        "segment" => CorpusKind::Segment,
        "symmetric_random" => CorpusKind::SymmetricRandom { m: int(n + 2)? },
        "lowdim_embed" => {
            let k = int(n.saturating_sub(1))?;
            CorpusKind::LowdimEmbed {
                k,
                inner: Box::new(CorpusKind::RandomGaussHull { m: k + 2 }),
            }
        }
        "split_pairs" => CorpusKind::SplitPairs {
            parent: Box::new(match arg {
                Some(inner) => shorthand(inner, n)?,
                None => CorpusKind::RandomGaussHull { m: n + 4 },
            }),
        },
        other => bail!("unknown corpus '{other}'"),
    })
}

fn parse_corpus(s: &str, n: usize, seed: u64) -> Result<CorpusSpec> {
    let text = if s.trim_start().starts_with('{') {
        Some(s.to_string())
    } else if Path::new(s).is_file() {
        Some(fs::read_to_string(s).with_context(|| format!("reading corpus {s}"))?)
    } else {
        None
    };
    match text {
        Some(t) => Ok(serde_json::from_str(&t).context("parsing corpus JSON")?),
        None => Ok(CorpusSpec::new(shorthand(s, n)?).with_seed(seed)),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(p)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn body_gen(a: GenArgs) -> Result<()> {
    let corpus = parse_corpus(&a.corpus, a.n, a.seed)?;
    for i in 0..a.count {
        let b = corpus.body(a.n, i)?;
        match &a.out {
            Some(dir) => save_body(&b, &dir.join(format!("body_{i:04}.json")))?,
            None => print!("{}", body_to_json(&b)),
        }
    }
    Ok(())
}

fn op_apply(a: ApplyArgs) -> Result<()> {
    let spec = parse_op(&a.op)?;
    let k = load_body(&a.body)?;
    let img = apply(&spec, &k, &ApplyContext::default())?;
    match a.out {
        Some(p) => save_body(&img, &p)?,
        None => print!("{}", body_to_json(&img)),
    }
    Ok(())
}

fn point_json(p: &convexop::Point) -> Value {
    json!(p.iter().copied().collect::<Vec<f64>>())
}

fn measure(a: MeasureArgs) -> Result<()> {
    let k: Body = load_body(&a.body)?;
    let n = k.ambient_dim();
    let all = matches!(a.what, Quantity::All);
    let mut out = serde_json::Map::new();
    out.insert("n".into(), json!(n));
    out.insert("dimension".into(), json!(k.dimension()));
    if all || matches!(a.what, Quantity::Volume) {
        out.insert("volume".into(), json!(volume(&k)));
    }
    if (all && (2..=3).contains(&n)) || matches!(a.what, Quantity::Quermass) {
        out.insert("quermassintegrals".into(), json!(quermassintegrals_exact(&k)?.w));
    }
    if matches!(a.what, Quantity::Kubota) {
        let mut est = Vec::new();
        for i in 1..n {
            let e = quermassintegral_kubota_mc(&k, i, a.trials, a.seed)?;
            est.push(json!({"index": i, "value": e.value, "stderr": e.stderr}));
        }
        out.insert("kubota".into(), Value::Array(est));
    }
    if (all && n <= 3) || matches!(a.what, Quantity::MeanWidth) {
        out.insert("mean_width".into(), json!(mean_width_exact(&k)?));
    }
    if matches!(a.what, Quantity::Steiner) {
        let (p, se) = steiner_point(&k, a.trials, a.seed)?;
        out.insert("steiner_point".into(), point_json(&p));
        out.insert("steiner_stderr".into(), point_json(&se));
    }
    if (all && k.is_full_dimensional()) || matches!(a.what, Quantity::Centroid) {
        out.insert("centroid".into(), point_json(&centroid(&k)?));
    }
    println!("{}", serde_json::to_string_pretty(&Value::Object(out))?);
    Ok(())
}

fn check(a: CheckArgs) -> Result<ExitCode> {
    if let Some(path) = a.revalidate {
        let doc: Value = serde_json::from_str(&fs::read_to_string(&path)?)?;
        let r = revalidate_document(&doc)?;
        println!(
            "{} margin={} tolerance={}",
            if r.violated { "violation reproduced" } else { "no violation" },
            r.margin,
            r.tolerance
        );
        return Ok(if r.violated { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    let spec = parse_op(a.op.as_deref().expect("clap enforces --op"))?;
    let prop: PropertyKind = a.property.as_deref().expect("clap enforces --property").parse()?;
    let mut cfg = CheckConfig::new(a.n, a.trials, a.seed).with_tolerance(a.tol);
    cfg.bound = a.bound;
    if let Some(c) = &a.corpus {
        cfg.corpus = Some(parse_corpus(c, a.n, a.seed)?);
    }
    let report = run_check(&spec, prop, &cfg)?;
    println!(
        "{} {} n={} trials={} verdict={} empirical_constant={} violations={}",
        spec,
        prop,
        a.n,
        report.trials_run,
        report.verdict,
        report.empirical_constant.map_or("-".to_string(), |c| c.to_string()),
        report.violations
    );
    if let Some(label) = report.continuity_label() {
        println!("continuity evidence: {label}");
    }
    if let Some(out) = &a.out {
        write_file(out, &report.to_json())?;
        write_file(&out.with_extension("csv"), &report.trials_csv()?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let spec = parse_op(&a.op)?;
    let prop: PropertyKind = a.property.parse()?;
    let dims: Vec<usize> = a
        .n
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .context("--n takes comma-separated dimensions")?;
    let mut cfg = CheckConfig::new(dims[0], a.trials, a.seed).with_tolerance(a.tol);
    if let Some(c) = &a.corpus {
        cfg.corpus = Some(parse_corpus(c, dims[0], a.seed)?);
    }
    let rows = empirical_constant_sweep(&spec, prop, &dims, &cfg)?;
    let mut csv = String::from("n,empirical_constant,paper_bound,verdict,witness\n");
    for r in &rows {
        let witness = r.witness.as_ref().map(|b| body_to_json(b).trim_end().replace('"', "\"\""));
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            r.empirical_constant.map_or(String::new(), |c| c.to_string()),
            r.paper_bound.map_or(String::new(), |c| c.to_string()),
            r.verdict,
            witness.map_or(String::new(), |w| format!("\"{w}\""))
        ));
    }
    match a.out {
        Some(p) => write_file(&p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<ExitCode> {
    let mut config = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => default_suite(),
    };
    if a.print_default {
        print!("{}", default_suite().to_json());
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(t) = a.trials {
        config.trials = t;
        for g in &mut config.groups {
            g.trials = Some(t);
        }
    }
    let out = a.out.expect("clap enforces --out");
    let bundle = run_experiment(&config, &out)?;
    print!("{}", bundle.summary_markdown());
    Ok(ExitCode::from(bundle.exit_code() as u8))
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Body { cmd: BodyCmd::Gen(a) } => body_gen(a).map(|_| ExitCode::SUCCESS),
        Command::Op { cmd: OpCmd::Apply(a) } => op_apply(a).map(|_| ExitCode::SUCCESS),
        Command::Measure(a) => measure(a).map(|_| ExitCode::SUCCESS),
        Command::Check(a) => check(a),
        Command::Sweep(a) => sweep(a).map(|_| ExitCode::SUCCESS),
        Command::Experiment(a) => experiment(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
