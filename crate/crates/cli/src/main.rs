use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperbms::gf::{parse_modulus, Field, FieldSpec};
use hyperbms::inference::{resolve, OrderMode, ResolveConfig};
use hyperbms::oracle::{random_instance, CoefficientSpace, HoleSpec, OracleParams};
use hyperbms::recovery::{verify_afforded, SparseGenerator};
use hyperbms::table::{detect_hyperbolic, format_grid, format_table, parse_table, TableDoc};
use hyperbms::{EvaluationPoint, IndexPair, Poly, TableShape};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hyperbms", version, about = "Detect, complete and verify incomplete 2-D syndrome tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the hyperbolic windows (tau, t) fully known in a table.
    Detect {
        table: PathBuf,
        #[command(flatten)]
        field: FieldArgs,
        /// Write the candidates as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Fill the unknown cells of a table.
    Complete {
        table: PathBuf,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = Order::Auto)]
        order: Order,
        /// Force the window offset, as `i,j`.
        #[arg(long)]
        tau: Option<IndexPair>,
        /// Force the amplitude parameter.
        #[arg(long)]
        t: Option<usize>,
        /// Leaves explored per attempt (default |L|^2).
        #[arg(long)]
        branch_budget: Option<usize>,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check that `h_n = e(α^{n-τ})` on every known cell.
    Verify {
        table: PathBuf,
        /// Candidate generator, e.g. `a^9*X1*X2^3 + a^6*X2^2`.
        poly: String,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "0,0")]
        tau: IndexPair,
    },
    /// Write a random syndrome table and its ground truth.
    Synth(SynthArgs),
}

#[derive(Args, Default)]
struct FieldArgs {
    /// Field modulus: hex bitmask (`0x13`) or coefficient list, lowest degree first.
    #[arg(long)]
    modulus: Option<String>,
    /// α1 = a^k; overrides the table header.
    #[arg(long)]
    alpha1_exp: Option<u32>,
    /// α2 = a^k; overrides the table header.
    #[arg(long)]
    alpha2_exp: Option<u32>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Extension degree over GF(p).
    #[arg(long, default_value_t = 4)]
    m: u32,
    #[arg(long, default_value_t = 5)]
    r1: usize,
    #[arg(long, default_value_t = 5)]
    r2: usize,
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 2)]
    t: usize,
    /// Number of terms (default: random in 1..=t).
    #[arg(long)]
    weight: Option<usize>,
    /// Unknown cells placed outside the hyperbolic window.
    #[arg(long, default_value_t = 0)]
    holes: usize,
    /// Window-relative cells to puncture instead, as `i,j` (repeatable).
    #[arg(long, conflicts_with = "holes")]
    puncture: Vec<IndexPair>,
    /// Draw coefficients from the whole field instead of GF(p).
    #[arg(long)]
    extension: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Table output path.
    #[arg(long, short)]
    output: PathBuf,
    /// Ground-truth JSON (default: `<output>.truth.json`).
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Lex,
    Graded,
    Auto,
}

impl From<Order> for OrderMode {
    fn from(o: Order) -> Self {
        match o {
            Order::Lex => OrderMode::Lex,
            Order::Graded => OrderMode::Graded,
            Order::Auto => OrderMode::Auto,
        }
    }
}

/// Input that cannot be used at all; exits with 2.
#[derive(Debug)]
struct BadInput(anyhow::Error);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for BadInput {}

fn bad(e: impl Into<anyhow::Error>) -> anyhow::Error {
    BadInput(e.into()).into()
}

fn load(path: &Path, args: &FieldArgs) -> Result<(TableDoc, EvaluationPoint)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(bad)?;
    let mut doc = parse_table(&text).map_err(|e| bad(anyhow::Error::new(e).context(path.display().to_string())))?;
    if let Some(m) = &args.modulus {
        let spec = doc.field.spec().clone();
        let modulus = parse_modulus(m, spec.p).map_err(bad)?;
        doc.field = Field::new(spec.with_modulus(modulus)).map_err(bad)?;
    }
    let point = point_for(&doc.field, doc.shape(), doc.alpha, args).map_err(bad)?;
    if args.alpha1_exp.is_some() || args.alpha2_exp.is_some() {
        doc.alpha = Some(point.exponents());
    }
    Ok((doc, point))
}

fn point_for(field: &Field, shape: TableShape, header: Option<(u32, u32)>, args: &FieldArgs) -> Result<EvaluationPoint> {
    let standard = EvaluationPoint::standard(field, shape)?.exponents();
    let (h1, h2) = header.unwrap_or(standard);
    let k1 = args.alpha1_exp.unwrap_or(h1);
    let k2 = args.alpha2_exp.unwrap_or(h2);
    Ok(EvaluationPoint::from_exponents(field, k1, k2, shape)?)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn detect(table: &Path, field: &FieldArgs, json: Option<&Path>) -> Result<i32> {
    let (doc, _) = load(table, field)?;
    let result = detect_hyperbolic(&doc.table);
    for c in &result.candidates {
        println!("tau={} t={}", c.tau, c.t);
    }
    if result.is_empty() {
        println!("no hyperbolic window is fully known");
    }
    if let Some(path) = json {
        write_json(path, &result)?;
    }
    Ok(if result.is_empty() { 1 } else { 0 })
}

fn complete(table: &Path, field: &FieldArgs, config: &ResolveConfig, json: Option<&Path>) -> Result<i32> {
    let (doc, point) = load(table, field)?;
    let report = resolve(&doc.table, &point, &doc.field, config);
    println!("{}", report.summary());
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.exit_code() != 0 {
        for a in &report.attempts {
            eprintln!("attempt {a}");
        }
    }
    if !report.filled.is_empty() {
        let shape = doc.shape();
        for row in report.completed_table.chunks(shape.r2) {
            println!("{}", row.join(" "));
        }
    }
    if let Some(path) = json {
        write_json(path, &report)?;
    }
    Ok(report.exit_code())
}

fn verify(table: &Path, poly: &str, field: &FieldArgs, tau: IndexPair) -> Result<i32> {
    let (doc, point) = load(table, field)?;
    let e = Poly::parse(poly, &doc.field).map_err(bad)?;
    let ok = verify_afforded(&doc.table, &SparseGenerator::from_poly(&e), tau, &point, &doc.field);
    println!("{}", if ok { "afforded" } else { "not afforded" });
    Ok(if ok { 0 } else { 1 })
}

fn synth(args: &SynthArgs) -> Result<i32> {
    let mut spec = FieldSpec::new(args.p, 1, args.m).map_err(bad)?;
    if let Some(m) = &args.field.modulus {
        spec = spec.with_modulus(parse_modulus(m, args.p).map_err(bad)?);
    }
    let field = Field::new(spec).map_err(bad)?;
    let shape = TableShape::new(args.r1, args.r2).map_err(bad)?;
    let point = point_for(&field, shape, None, &args.field).map_err(bad)?;
    let holes = if args.puncture.is_empty() { HoleSpec::Outside(args.holes) } else { HoleSpec::Window(args.puncture.clone()) };
    let coefficients = if args.extension { CoefficientSpace::Extension } else { CoefficientSpace::Base };
    let mut params = OracleParams::new(args.t).coefficients(coefficients).holes(holes);
    if let Some(w) = args.weight {
        params = params.weight(w);
    }
    let inst = random_instance(&field, &point, &params, args.seed).map_err(bad)?;
    let doc = TableDoc { field: field.clone(), alpha: Some(point.exponents()), table: inst.punctured() };
    fs::write(&args.output, format_table(&doc)).with_context(|| format!("writing {}", args.output.display()))?;

    let truth_path = args.truth.clone().unwrap_or_else(|| {
        let mut name = args.output.clone().into_os_string();
        name.push(".truth.json");
        PathBuf::from(name)
    });
    let truth = json!({
        "seed": args.seed,
        "e": inst.e.format(&field),
        "tau": inst.tau,
        "weight": inst.weight(),
        "window": inst.window,
        "holes": inst.holes,
        "table": format_grid(&inst.table, &field).lines().collect::<Vec<_>>(),
    });
    write_json(&truth_path, &truth)?;
    println!("wrote {} and {}", args.output.display(), truth_path.display());
    Ok(0)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Detect { table, field, json } => detect(&table, &field, json.as_deref()),
        Command::Complete { table, field, order, tau, t, branch_budget, json } => {
            if t == Some(0) {
                bail!(bad(anyhow::anyhow!("--t must be positive")));
            }
            let config = ResolveConfig { order: order.into(), tau, t, branch_budget, ..ResolveConfig::default() };
            complete(&table, &field, &config, json.as_deref())
        }
        Command::Verify { table, poly, field, tau } => verify(&table, &poly, &field, tau),
        Command::Synth(args) => synth(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.chain().any(|c| c.is::<BadInput>());
            ExitCode::from(if usage { 2 } else { 4 })
        }
    }
}
