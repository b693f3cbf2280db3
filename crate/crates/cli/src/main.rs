//! `hsleaps` — exact calculator and verifier for Hasse-Schmidt derivations
//! over prime fields.
//!
//! The `leaps` subcommand tabulates, order by order, the dimension of the
//! spaces of derivations of a quotient algebra that extend to logarithmic
//! derivations of each length, and checks that every dimension drop sits at
//! a power of the characteristic. `bridge` extends a derivation document
//! across such a drop. The remaining subcommands are small exact
//! calculators over the same machinery.
//!
//! Exit codes: 0 success (for `leaps`: verdict PASS), 1 scan verdict FAIL,
//! 2 argument or parse error, 3 computation budget exhausted, 4 search
//! oracle failure, 5 internal invariant violation.

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hsleaps_core::bivariate::{self, BivariateError, CoIdeal2};
use hsleaps_core::digits::{
    averaging_system, binomial_mod_p, digital_root, max_shift, BasePDigits,
};
use hsleaps_core::hsd::{parse_hsd, print_hsd, HsdDocument};
use hsleaps_core::integrate::{bridge_leap, IntegrateError, PipelineTrace};
use hsleaps_core::leapfinder::{
    integrable_dimensions, report_from_table, scan_leaps, BridgingOracle, IntegrabilityTable,
    LeapReport, SearchBounds, SearchOracle,
};
use hsleaps_core::poly::{
    groebner_basis_with_budget, IdealError, IdealPresentation, Poly, WeightVector,
    DEFAULT_GROEBNER_BUDGET,
};
use hsleaps_core::zpfield::is_prime;

#[derive(Parser)]
#[command(
    name = "hsleaps",
    version,
    about = "Exact Hasse-Schmidt derivation calculator and integrability-leap verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan integrability dimensions and verify drops sit at powers of p.
    Leaps(LeapsArgs),
    /// Extend an (n-1)-logarithmic derivation document to length n.
    Bridge(BridgeArgs),
    /// Iterated base-p digit sum of n (the stable value).
    Tp { n: u64, p: u64 },
    /// Binomial coefficient of n over m, reduced modulo p.
    Binom { n: u64, m: u64, p: u64 },
    /// Largest shift j with m * p^j < e * p^s.
    Cset { m: u64, e: u64, s: u32, p: u64 },
    /// Averaging weights: values summing to 1 whose m-th powers sum to 0.
    Fermat { m: u64, p: u64 },
    /// Compose two derivation documents, the first applied outermost.
    Compose { first: PathBuf, second: PathBuf },
    /// Compositional inverse of a derivation document.
    Inverse { input: PathBuf },
    /// Component extractor of a derivation document.
    Gd(GdArgs),
}

#[derive(Args)]
struct LeapsArgs {
    /// Field characteristic.
    #[arg(long)]
    prime: u64,
    /// Variable names, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    vars: Vec<String>,
    /// One positive weight per variable, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    weights: Vec<u32>,
    /// Ideal generator polynomial; repeatable. Use `0` for the full ring.
    #[arg(long = "ideal", required = true)]
    ideal: Vec<String>,
    /// Highest length probed.
    #[arg(long)]
    max_order: usize,
    /// Highest weighted degree scanned.
    #[arg(long)]
    max_degree: i64,
    /// Lowest weighted degree scanned; defaults to minus the largest weight.
    #[arg(long)]
    min_degree: Option<i64>,
    /// Backtracking branch cap per search stage.
    #[arg(long)]
    branch_cap: Option<usize>,
    /// Worker threads for the per-degree scan.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Reduction budget for the ideal's basis computation.
    #[arg(long, default_value_t = DEFAULT_GROEBNER_BUDGET)]
    groebner_budget: u64,
}

#[derive(Args)]
struct BridgeArgs {
    /// Derivation document to extend; `-` reads standard input.
    input: PathBuf,
    /// Target length n; the document must be logarithmic up to n - 1.
    #[arg(long)]
    order: usize,
    /// Ideal generator over the document's prime and variables; repeatable.
    #[arg(long = "ideal", required = true)]
    ideal: Vec<String>,
    /// One positive weight per variable for the search oracle's degree
    /// policy, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    weights: Vec<u32>,
    /// Backtracking branch cap per search stage.
    #[arg(long)]
    branch_cap: Option<usize>,
    /// Reach non-power sub-targets by recursive bridging instead of direct
    /// search.
    #[arg(long)]
    recursive: bool,
    /// Reduction budget for the ideal's basis computation.
    #[arg(long, default_value_t = DEFAULT_GROEBNER_BUDGET)]
    groebner_budget: u64,
}

#[derive(Args)]
struct GdArgs {
    /// Derivation document; `-` reads standard input.
    input: PathBuf,
    /// Rescale to one parameter at this order (a multiple of the
    /// characteristic that is not a power of it).
    #[arg(long, conflicts_with = "bound")]
    order: Option<usize>,
    /// Without --order: list the raw two-parameter components with first
    /// plus second index at most this bound.
    #[arg(long)]
    bound: Option<u32>,
}

/// A command failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn oracle(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: 5,
            message: message.into(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: &Command) -> CmdResult {
    match command {
        Command::Leaps(args) => run_leaps(args),
        Command::Bridge(args) => run_bridge(args),
        Command::Tp { n, p } => run_tp(*n, *p),
        Command::Binom { n, m, p } => run_binom(*n, *m, *p),
        Command::Cset { m, e, s, p } => run_cset(*m, *e, *s, *p),
        Command::Fermat { m, p } => run_fermat(*m, *p),
        Command::Compose { first, second } => run_compose(first, second),
        Command::Inverse { input } => run_inverse(input),
        Command::Gd(args) => run_gd(args),
    }
}

fn ensure_prime(p: u64) -> Result<(), Failure> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Failure::usage(format!("{p} is not prime")))
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::usage(format!("reading standard input: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
    }
}

fn read_document(path: &Path) -> Result<HsdDocument, Failure> {
    let text = read_text(path)?;
    parse_hsd(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_weights(raw: &[u32], nvars: usize) -> Result<WeightVector, Failure> {
    if raw.len() != nvars {
        return Err(Failure::usage(format!(
            "expected {nvars} weights, got {}",
            raw.len()
        )));
    }
    if raw.contains(&0) {
        return Err(Failure::usage("weights must be positive"));
    }
    Ok(WeightVector::new(raw.to_vec()))
}

fn build_ideal(
    gens: &[String],
    p: u64,
    names: &[String],
    budget: u64,
) -> Result<IdealPresentation, Failure> {
    let mut polys = Vec::with_capacity(gens.len());
    for (idx, text) in gens.iter().enumerate() {
        let poly = Poly::parse(text, p, names)
            .map_err(|e| Failure::usage(format!("generator {}: {e}", idx + 1)))?;
        polys.push(poly);
    }
    groebner_basis_with_budget(&polys, budget).map_err(|e| match e {
        IdealError::BudgetExceeded(_) => Failure::budget(e.to_string()),
        IdealError::MixedContext => Failure::usage(e.to_string()),
    })
}

/// Branch cap resolution: flag beats the `HSLEAPS_BRANCH_CAP` environment
/// variable, which beats the default.
fn resolve_bounds(flag: Option<usize>) -> Result<SearchBounds, Failure> {
    let mut bounds = SearchBounds::default();
    if let Ok(text) = std::env::var("HSLEAPS_BRANCH_CAP") {
        bounds.branch_cap = text.trim().parse().map_err(|_| {
            Failure::usage(format!(
                "HSLEAPS_BRANCH_CAP must be a positive integer, got `{text}`"
            ))
        })?;
    }
    if let Some(cap) = flag {
        bounds.branch_cap = cap;
    }
    if bounds.branch_cap == 0 {
        return Err(Failure::usage("branch cap must be at least 1"));
    }
    Ok(bounds)
}

fn is_power_of(n: u64, p: u64) -> bool {
    n >= 1 && BasePDigits::new(n, p).sum() == 1
}

fn run_tp(n: u64, p: u64) -> CmdResult {
    ensure_prime(p)?;
    println!("{}", digital_root(n, p));
    Ok(0)
}

fn run_binom(n: u64, m: u64, p: u64) -> CmdResult {
    ensure_prime(p)?;
    println!("{}", binomial_mod_p(n, m, p).value());
    Ok(0)
}

fn run_cset(m: u64, e: u64, s: u32, p: u64) -> CmdResult {
    ensure_prime(p)?;
    match max_shift(m, e, s, p) {
        Ok(shift) => {
            println!("{shift}");
            Ok(0)
        }
        Err(e) => Err(Failure::usage(e.to_string())),
    }
}

fn run_fermat(m: u64, p: u64) -> CmdResult {
    ensure_prime(p)?;
    match averaging_system(m, p) {
        Ok(weights) => {
            let line: Vec<String> = weights.iter().map(|w| w.value().to_string()).collect();
            println!("{}", line.join(" "));
            Ok(0)
        }
        Err(e) => Err(Failure::usage(e.to_string())),
    }
}

fn run_compose(first: &Path, second: &Path) -> CmdResult {
    let a = read_document(first)?;
    let b = read_document(second)?;
    if a.names() != b.names() {
        return Err(Failure::usage(
            "variable names differ between the documents",
        ));
    }
    let composed = a
        .derivation()
        .compose(b.derivation())
        .map_err(|e| Failure::usage(e.to_string()))?;
    print!("{}", print_hsd(&composed, a.names()));
    Ok(0)
}

fn run_inverse(input: &Path) -> CmdResult {
    let doc = read_document(input)?;
    print!("{}", print_hsd(&doc.derivation().inverse(), doc.names()));
    Ok(0)
}

fn run_gd(args: &GdArgs) -> CmdResult {
    let doc = read_document(&args.input)?;
    match (args.order, args.bound) {
        (Some(order), None) => {
            let out =
                bivariate::rescaled_extractor(doc.derivation(), order).map_err(|e| match e {
                    BivariateError::UnsupportedOrder(_) => Failure::usage(e.to_string()),
                    other => Failure::internal(other.to_string()),
                })?;
            print!("{}", print_hsd(&out, doc.names()));
            Ok(0)
        }
        (None, Some(bound)) => {
            if bound == 0 {
                return Err(Failure::usage("the bound must be at least 1"));
            }
            let d = doc.derivation().resized(bound as usize);
            let region = CoIdeal2::total_degree(bound);
            let g =
                bivariate::extractor(&d, region).map_err(|e| Failure::internal(e.to_string()))?;
            let mut out = String::new();
            writeln!(out, "prime {}", d.modulus()).expect("string write");
            writeln!(out, "vars {}", doc.names().join(" ")).expect("string write");
            writeln!(out, "bound {bound}").expect("string write");
            for (i, j) in region.pairs() {
                if (i, j) == (0, 0) {
                    continue;
                }
                for (var, name) in doc.names().iter().enumerate() {
                    let image = g.component_image((i, j), var);
                    if !image.is_zero() {
                        writeln!(out, "map {name} {i},{j} {}", image.to_text(doc.names()))
                            .expect("string write");
                    }
                }
            }
            print!("{out}");
            Ok(0)
        }
        _ => Err(Failure::usage(
            "exactly one of --order or --bound is required",
        )),
    }
}

fn run_bridge(args: &BridgeArgs) -> CmdResult {
    let doc = read_document(&args.input)?;
    let d = doc.derivation();
    let p = d.modulus();
    let n = args.order;
    if n == 0 || !n.is_multiple_of(p as usize) {
        return Err(Failure::usage(format!(
            "order {n} is not a multiple of the characteristic {p}: \
             integrability never drops there, so there is nothing to bridge"
        )));
    }
    if is_power_of(n as u64, p) {
        return Err(Failure::usage(format!(
            "order {n} is a power of the characteristic {p}: crossing it \
             needs a genuinely new integral, which bridging cannot supply"
        )));
    }
    let weights = parse_weights(&args.weights, doc.names().len())?;
    let ideal = build_ideal(&args.ideal, p, doc.names(), args.groebner_budget)?;
    let bounds = resolve_bounds(args.branch_cap)?;
    let search = SearchOracle::with_bounds(weights, bounds);
    let mut trace = PipelineTrace::new();
    let result = if args.recursive {
        bridge_leap(d, n, &ideal, &BridgingOracle::new(search), &mut trace)
    } else {
        bridge_leap(d, n, &ideal, &search, &mut trace)
    };
    eprint!("{}", trace.to_text());
    let out = result.map_err(|e| match e {
        IntegrateError::Oracle(err) => Failure::oracle(err.to_string()),
        IntegrateError::Invariant { .. } => Failure::internal(e.to_string()),
        other => Failure::usage(other.to_string()),
    })?;
    print!("{}", print_hsd(&out, doc.names()));
    Ok(0)
}

fn run_leaps(args: &LeapsArgs) -> CmdResult {
    ensure_prime(args.prime)?;
    for (i, a) in args.vars.iter().enumerate() {
        if args.vars[..i].contains(a) {
            return Err(Failure::usage(format!("duplicate variable name `{a}`")));
        }
    }
    let weights = parse_weights(&args.weights, args.vars.len())?;
    if args.max_order == 0 {
        return Err(Failure::usage("--max-order must be at least 1"));
    }
    let ideal = build_ideal(&args.ideal, args.prime, &args.vars, args.groebner_budget)?;
    let min_degree = args
        .min_degree
        .unwrap_or_else(|| -i64::from(weights.max_weight()));
    if min_degree > args.max_degree {
        return Err(Failure::usage(format!(
            "degree range is empty: {min_degree} > {}",
            args.max_degree
        )));
    }
    let degrees: Vec<i64> = (min_degree..=args.max_degree).collect();
    let bounds = resolve_bounds(args.branch_cap)?;
    let report = scan_parallel(
        &ideal,
        &weights,
        args.max_order,
        &degrees,
        &bounds,
        args.jobs.max(1),
    );
    print!("{}", report.to_tsv());
    Ok(if report.pass { 0 } else { 1 })
}

/// Splits the degree list across `jobs` workers; each worker runs the
/// sequential scanner on its slice and the rows are reassembled in order,
/// so the report is byte-identical to the single-threaded one.
fn scan_parallel(
    ideal: &IdealPresentation,
    weights: &WeightVector,
    max_order: usize,
    degrees: &[i64],
    bounds: &SearchBounds,
    jobs: usize,
) -> LeapReport {
    if jobs <= 1 || degrees.len() <= 1 {
        return scan_leaps(ideal, weights, max_order, degrees, bounds);
    }
    let chunk = degrees.len().div_ceil(jobs);
    let tables: Vec<IntegrabilityTable> = std::thread::scope(|scope| {
        let handles: Vec<_> = degrees
            .chunks(chunk)
            .map(|slice| {
                scope.spawn(move || integrable_dimensions(ideal, weights, max_order, slice, bounds))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    let mut all_degrees = Vec::with_capacity(degrees.len());
    let mut dims = Vec::with_capacity(degrees.len());
    let mut anomalies = Vec::new();
    for table in tables {
        all_degrees.extend_from_slice(table.degrees());
        dims.extend(table.rows().iter().cloned());
        anomalies.extend_from_slice(table.anomalies());
    }
    report_from_table(
        IntegrabilityTable::from_rows(all_degrees, max_order, dims, anomalies),
        ideal.modulus(),
    )
}
