mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use output::{complex, complexes, float, object, render, sci};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use trotterkit::bench::{
    emit_records, plan_metadata, probe_csv, run_benchmark, stability_probe, BenchPlan,
};
use trotterkit::multistage::{multistage_order, to_multistage};
use trotterkit::polyexp::{
    eval_summed_scalar, truncated_reference, Axis, FactorizedPolynomial, SeriesSpec, ZeroCache,
};
use trotterkit::schemes::{
    default_order_grid, efficiency, empirical_order, validate_consistency, Catalog, EstimateOptions,
    TwoStageScheme,
};
use trotterkit::spinmodel::{build_xxz, spectrum, Boundary, XxzConfig};
use trotterkit::tolerance;
use trotterkit::{Error, Result};

const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(name = "trotterkit", version, about = "Splitting schemes, multi-stage adaptation and factorized polynomial exponentials")]
struct Cli {
    /// Scheme catalog to use instead of the bundled one.
    #[arg(long, global = true, value_name = "PATH")]
    catalog: Option<PathBuf>,
    /// Directory for cached polynomial zeros.
    #[arg(long, global = true, value_name = "DIR")]
    zeros_cache: Option<PathBuf>,
    /// Seed for randomized operations (order fits, error-coefficient estimates).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect and check splitting schemes.
    #[command(subcommand)]
    Schemes(SchemesCmd),
    /// Print the multi-stage coefficients of a scheme, or check their order.
    Adapt(AdaptArgs),
    /// Zeros of a truncated Taylor or Chebyshev polynomial.
    Zeros(ZerosArgs),
    /// Evaluate a truncated exponential at a scalar.
    Expm(ExpmArgs),
    /// Model Hamiltonians.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Run an error-versus-cost benchmark plan.
    Bench(BenchArgs),
    /// Compare summed and factorized Taylor evaluation at scalar points.
    ProbeStability(ProbeArgs),
}

#[derive(Subcommand)]
enum SchemesCmd {
    /// List catalog entries.
    List,
    /// Check consistency and fitted order of a catalog entry or of a JSON file.
    Validate {
        /// Catalog name, or path to a scheme (or array of schemes) in catalog format.
        target: String,
    },
    /// Efficiency score of a catalog entry.
    Efficiency { name: String },
}

#[derive(Args)]
struct AdaptArgs {
    name: String,
    /// Fit the order of the multi-stage decomposition on random operators.
    #[arg(long)]
    check: bool,
    /// Number of operators for --check.
    #[arg(long, default_value_t = 3, requires = "check")]
    lambda: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Taylor,
    Chebyshev,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Real,
    Imaginary,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Real => Axis::Real,
            AxisArg::Imaginary => Axis::Imaginary,
        }
    }
}

#[derive(Args)]
struct PolyArgs {
    /// Polynomial degree.
    #[arg(long)]
    k: usize,
    /// Chebyshev only: the interval half-width `gamma h`.
    #[arg(long, allow_negative_numbers = true)]
    gamma_h: Option<f64>,
    /// Chebyshev only: the axis the interval lies on.
    #[arg(long, value_enum, default_value = "imaginary")]
    axis: AxisArg,
}

impl PolyArgs {
    fn spec(&self, family: FamilyArg) -> Result<SeriesSpec> {
        match family {
            FamilyArg::Taylor => Ok(SeriesSpec::taylor(self.k)),
            FamilyArg::Chebyshev => {
                let gh = self
                    .gamma_h
                    .ok_or_else(|| Error::Invalid("--gamma-h is required for the Chebyshev family".into()))?;
                Ok(SeriesSpec::chebyshev(self.k, gh, 1.0, self.axis.into()))
            }
        }
    }
}

#[derive(Args)]
struct ZerosArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[command(flatten)]
    poly: PolyArgs,
}

#[derive(Args)]
struct ExpmArgs {
    #[arg(long, value_enum)]
    method: FamilyArg,
    #[command(flatten)]
    poly: PolyArgs,
    /// Direct summation of the series.
    #[arg(long, conflicts_with = "prod")]
    sum: bool,
    /// Product over the zeros (the default).
    #[arg(long)]
    prod: bool,
    /// The argument, as `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    scalar: Complex64,
}

#[derive(Subcommand)]
enum ModelCmd {
    /// The XXZ chain split into three commuting bond groups.
    Xxz(XxzArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Open,
    Periodic,
}

#[derive(Args)]
struct XxzArgs {
    #[arg(long = "L", value_name = "L")]
    sites: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long, value_enum, default_value = "open")]
    bc: BcArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    coupling: f64,
    /// Write the sorted spectrum here as CSV instead of to standard output.
    #[arg(long, value_name = "PATH")]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark plan in JSON.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Destination for the results CSV.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Also write whitespace-separated cost/error blocks, one per method.
    #[arg(long, value_name = "PATH")]
    plot_data: Option<PathBuf>,
    /// Record wall times (makes the CSV differ between runs).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ProbeArgs {
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',', default_value = "10,52,304")]
    k: Vec<usize>,
    /// Sample points, `re` or `re,im`; repeatable. Defaults to a fixed set on
    /// both axes.
    #[arg(long = "z", allow_hyphen_values = true, value_parser = parse_complex)]
    z: Vec<Complex64>,
    /// Destination for the CSV.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

struct Context {
    catalog_path: Option<PathBuf>,
    cache: Option<ZeroCache>,
    seed: u64,
}

impl Context {
    fn catalog(&self) -> Result<Catalog> {
        match &self.catalog_path {
            Some(p) => Catalog::load(p),
            None => Catalog::bundled(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Context {
        catalog_path: cli.catalog,
        cache: cli.zeros_cache.map(ZeroCache::new),
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
    };
    match run(&ctx, cli.command) {
        Ok(Outcome { stdout, ok }) => {
            print!("{stdout}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error:{}: {e}", e.category());
            ExitCode::from(1)
        }
    }
}

struct Outcome {
    stdout: String,
    ok: bool,
}

impl Outcome {
    fn ok(v: Value) -> Self {
        Outcome {
            stdout: render(&v),
            ok: true,
        }
    }
}

fn run(ctx: &Context, command: Command) -> Result<Outcome> {
    match command {
        Command::Schemes(SchemesCmd::List) => schemes_list(ctx),
        Command::Schemes(SchemesCmd::Validate { target }) => schemes_validate(ctx, &target),
        Command::Schemes(SchemesCmd::Efficiency { name }) => {
            let catalog = ctx.catalog()?;
            let scheme = catalog.get(&name)?;
            let opts = EstimateOptions {
                seed: ctx.seed,
                ..Default::default()
            };
            let score = efficiency(scheme, &opts)?;
            Ok(Outcome::ok(object(vec![
                ("name", Value::from(name)),
                ("order", Value::from(score.order_n)),
                ("q", Value::from(score.q)),
                ("eff", float(score.eff)),
                ("leading_error", float(score.leading_error)),
                ("underclaimed", Value::from(score.underclaimed)),
            ])))
        }
        Command::Adapt(args) => adapt(ctx, &args),
        Command::Zeros(args) => zeros(ctx, &args),
        Command::Expm(args) => expm(ctx, &args),
        Command::Model(ModelCmd::Xxz(args)) => model_xxz(&args),
        Command::Bench(args) => bench(ctx, &args),
        Command::ProbeStability(args) => probe(ctx, &args),
    }
}

fn schemes_list(ctx: &Context) -> Result<Outcome> {
    let catalog = ctx.catalog()?;
    let mut out = String::from("name\torder\tq\tsymmetric\tcomplex\n");
    for s in catalog.iter() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            s.name,
            s.order_n,
            s.q(),
            s.symmetric,
            s.has_complex_coefficients()
        ));
    }
    Ok(Outcome { stdout: out, ok: true })
}

/// Schemes from a file holding either one scheme object or an array.
fn schemes_from_file(path: &Path) -> Result<Vec<TwoStageScheme>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let value: Value = serde_json::from_str(&text)?;
    let list = match value {
        Value::Array(_) => value,
        other => Value::Array(vec![other]),
    };
    Ok(serde_json::from_value(list)?)
}

fn schemes_validate(ctx: &Context, target: &str) -> Result<Outcome> {
    let path = Path::new(target);
    let schemes = if path.is_file() {
        schemes_from_file(path)?
    } else {
        vec![ctx.catalog()?.get(target)?.clone()]
    };
    let mut all_ok = true;
    let mut reports = Vec::new();
    for s in &schemes {
        s.check_structure()?;
        let report = validate_consistency(s)?;
        let fit = if report.pass {
            Some(empirical_order(s, 8, &default_order_grid(), ctx.seed)?)
        } else {
            None
        };
        let order_ok = fit
            .as_ref()
            .is_some_and(|f| (f.slope - s.order_n as f64).abs() <= tolerance::CATALOG_SLOPE);
        let pass = report.pass && order_ok;
        all_ok &= pass;
        reports.push(object(vec![
            ("name", Value::from(s.name.clone())),
            ("pass", Value::from(pass)),
            ("a_residual", float(report.a_residual)),
            ("b_residual", float(report.b_residual)),
            ("palindromic", Value::from(report.palindromic)),
            ("symmetry_ok", Value::from(report.symmetry_ok)),
            ("claimed_order", Value::from(s.order_n)),
            ("fitted_order", fit.map(|f| float(f.slope)).unwrap_or(Value::Null)),
        ]));
    }
    Ok(Outcome {
        stdout: render(&Value::Array(reports)),
        ok: all_ok,
    })
}

fn adapt(ctx: &Context, args: &AdaptArgs) -> Result<Outcome> {
    let catalog = ctx.catalog()?;
    let ms = to_multistage(catalog.get(&args.name)?)?;
    if args.check {
        if args.lambda < 2 {
            return Err(Error::Range(format!("--lambda must be at least 2, got {}", args.lambda)));
        }
        let fit = multistage_order(&ms, args.lambda, 8, &default_order_grid(), ctx.seed, false)?;
        return Ok(Outcome::ok(object(vec![
            ("name", Value::from(args.name.clone())),
            ("lambda", Value::from(args.lambda)),
            ("claimed_order", Value::from(ms.order_n)),
            ("slope", float(fit.slope)),
            ("used_points", Value::from(fit.used)),
            (
                "points",
                Value::Array(fit.points.iter().map(|&(h, e)| Value::Array(vec![float(h), float(e)])).collect()),
            ),
        ])));
    }
    Ok(Outcome::ok(object(vec![
        ("name", Value::from(args.name.clone())),
        ("order", Value::from(ms.order_n)),
        ("q", Value::from(ms.q())),
        ("c", complexes(&ms.c)),
        ("d", complexes(&ms.d)),
    ])))
}

fn family_name(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::Taylor => "taylor",
        FamilyArg::Chebyshev => "chebyshev",
    }
}

fn zeros(ctx: &Context, args: &ZerosArgs) -> Result<Outcome> {
    let spec = args.poly.spec(args.family)?;
    let fact = FactorizedPolynomial::new(spec, ctx.cache.as_ref())?;
    let mut fields = vec![
        ("family", Value::from(family_name(args.family))),
        ("k", Value::from(spec.k)),
    ];
    if args.family == FamilyArg::Chebyshev {
        fields.push(("gamma_h", float(spec.gamma_h())));
        fields.push(("axis", serde_json::to_value(spec.axis)?));
    }
    fields.extend([
        ("overall_scale", float(fact.overall_scale)),
        ("zeros", complexes(&fact.zeros)),
        ("gammas", complexes(&fact.gammas)),
    ]);
    Ok(Outcome::ok(object(fields)))
}

fn expm(ctx: &Context, args: &ExpmArgs) -> Result<Outcome> {
    let spec = args.poly.spec(args.method)?;
    let z = args.scalar;
    let (evaluation, value) = if args.sum {
        ("sum", eval_summed_scalar(&spec, z)?)
    } else {
        ("prod", FactorizedPolynomial::new(spec, ctx.cache.as_ref())?.eval_scalar(z))
    };
    let reference = truncated_reference(&spec, z)?;
    let exp = z.exp();
    Ok(Outcome::ok(object(vec![
        ("method", Value::from(family_name(args.method))),
        ("k", Value::from(spec.k)),
        ("evaluation", Value::from(evaluation)),
        ("z", complex(z)),
        ("value", complex(value)),
        ("truncated", complex(reference)),
        ("exp", complex(exp)),
        ("rel_error_vs_truncated", float((value - reference).norm() / reference.norm())),
        ("rel_error_vs_exp", float((value - exp).norm() / exp.norm())),
    ])))
}

fn model_xxz(args: &XxzArgs) -> Result<Outcome> {
    let mut cfg = XxzConfig::new(
        args.sites,
        args.delta,
        match args.bc {
            BcArg::Open => Boundary::Open,
            BcArg::Periodic => Boundary::Periodic,
        },
    );
    cfg.coupling = args.coupling;
    let split = build_xxz(&cfg)?;
    let eigs = spectrum(&split.total)?;
    let mut csv = String::from("index,eigenvalue\n");
    for (i, e) in eigs.iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", sci(*e)));
    }
    match &args.dump {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            Ok(Outcome::ok(object(vec![
                ("sites", Value::from(cfg.sites)),
                ("dim", Value::from(cfg.dim())),
                ("bonds", Value::from(cfg.bonds().len())),
                ("groups", Value::from(split.stages())),
                ("min_eigenvalue", float(eigs[0])),
                ("max_eigenvalue", float(eigs[eigs.len() - 1])),
            ])))
        }
        None => Ok(Outcome { stdout: csv, ok: true }),
    }
}

fn bench(ctx: &Context, args: &BenchArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.display().to_string(),
        source: e,
    })?;
    let mut plan = BenchPlan::from_json(&text)?;
    plan.timing |= args.timing;
    let catalog = ctx.catalog()?;
    let records = run_benchmark(&plan, &catalog, ctx.cache.as_ref())?;
    emit_records(&records, &plan_metadata(&plan), &args.out, args.plot_data.as_deref())?;
    Ok(Outcome::ok(object(vec![
        ("records", Value::from(records.len())),
        ("out", Value::from(args.out.display().to_string())),
    ])))
}

fn default_probe_points() -> Vec<Complex64> {
    [-1.0, -5.0, -10.0, -30.0, -100.0]
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain([10.0, 50.0].iter().map(|&y| Complex64::new(0.0, y)))
        .collect()
}

fn probe(ctx: &Context, args: &ProbeArgs) -> Result<Outcome> {
    let points = if args.z.is_empty() {
        default_probe_points()
    } else {
        args.z.clone()
    };
    let rows = stability_probe(&args.k, &points, ctx.cache.as_ref())?;
    std::fs::write(&args.out, probe_csv(&rows)).map_err(|e| Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    Ok(Outcome::ok(object(vec![
        ("rows", Value::from(rows.len())),
        ("out", Value::from(args.out.display().to_string())),
    ])))
}
