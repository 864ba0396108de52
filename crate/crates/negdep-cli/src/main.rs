//! Command-line front end: JSON in, JSON out.
//!
//! Exit codes: 0 = property holds / construction or search succeeded,
//! 1 = property fails or the searched-for object does not exist (the JSON
//! on stdout carries the certificate), 2 = usage or input error (structured
//! JSON on stderr). Verdicts go to stdout only.

use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use negdep::checks::{
    fkg_report, na_interior_margin, na_report_with, nc_report, pa_report_with, CheckOptions,
    DependenceReport, GapTable,
};
use negdep::constructions::{
    inject_positive_correlation, lemma1_measure, pairwise_penalty_measure, skewed_corner_pair,
};
use negdep::json::{function_from_json_str, measure_from_json_str, measure_to_json_value};
use negdep::lattice::Poset;
use negdep::measure::DiscreteMeasure;
use negdep::oracle::{brute_force_dependence, chebyshev_1d_check, dedekind_count, OracleProperty};
use negdep::rational::{format_rational, parse_rational, Rational};
use negdep::search::{
    nonconvex_witness, tv_interior_probe, weak_counterexample, LambdaMode, ProbeProperty,
};
use negdep::FunctionSpec;

#[derive(Parser)]
#[command(
    name = "negdep",
    about = "Exact negative-dependence verdicts, constructions and counterexample search",
    version
)]
struct Cli {
    /// Worker threads for parallel checks (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a dependence property of a measure file.
    Check(CheckArgs),
    /// Build one of the named measure families.
    Construct(ConstructArgs),
    /// Convex combination of two measures.
    Mix {
        left: String,
        right: String,
        #[arg(long)]
        lambda: String,
    },
    /// Total variation distance between two measures.
    Tv { left: String, right: String },
    /// Marginal onto a set of coordinates (1-based).
    Marginal {
        measure: String,
        #[arg(long, value_delimiter = ',')]
        indices: Vec<usize>,
    },
    /// Affine coordinate map x -> scale * x + shift.
    Map {
        measure: String,
        #[arg(long, default_value = "1")]
        scale: String,
        #[arg(long, value_delimiter = ',')]
        shift: Option<Vec<String>>,
    },
    /// Counterexample searches.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Independent brute-force verification.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckProperty {
    Nc,
    Na,
    Pa,
    Fkg,
    #[value(name = "interior-margin")]
    InteriorMargin,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(value_enum)]
    property: CheckProperty,
    /// Measure JSON file (`-` for stdin).
    measure: String,
    /// Up-set pair evaluation budget (accepts scientific notation).
    #[arg(long, default_value = "1e7")]
    budget: String,
    /// Stop at the first violation instead of computing the full margin.
    #[arg(long)]
    early_exit: bool,
    /// Replace the declared grid with the one induced by the support.
    #[arg(long)]
    induce_grid: bool,
    /// Dump the full covariance-gap table as CSV to this path.
    #[arg(long)]
    emit_table: Option<String>,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(subcommand)]
    family: ConstructFamily,
}

#[derive(Subcommand)]
enum ConstructFamily {
    /// Measure on the standard basis vectors with the given weights.
    Lemma1 {
        /// Comma-separated weights, e.g. 1/3,1/3,1/3.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<String>>,
        /// Shorthand for uniform weights on n basis vectors.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Two strictly NA cube measures whose midpoint mixture is not NA.
    CornerPair {
        #[arg(long)]
        h: String,
    },
    /// Full-support cube measure with weight ~ q^(ones choose 2).
    Penalty {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: String,
    },
    /// Mix a measure with a heavy comonotone two-point spike at ±c·(1,…,1).
    Inject {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        c: String,
    },
}

#[derive(Subcommand)]
enum SearchCommand {
    /// Mixture covariance violation between two NC measures.
    Nonconvex {
        /// Shorthand: build the skewed corner pair at this h.
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        nu: Option<String>,
        /// Explicit mixture weights to test, e.g. 1/4,1/2,3/4.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<String>>,
    },
    /// Non-NA measure matching the test integrals of a strictly NA center.
    WeakCounterexample {
        #[arg(long)]
        mu: String,
        /// Function JSON files whose integrals must match exactly.
        #[arg(long = "test")]
        tests: Vec<String>,
        /// Target coordinate pair, 1-based, e.g. 1,2.
        #[arg(long, value_delimiter = ',')]
        pair: Vec<usize>,
        #[arg(long, default_value = "1e7")]
        budget: String,
    },
    /// Random probes of the total-variation ball around a measure.
    TvProbe {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        radius: String,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long, value_enum)]
        property: ProbePropertyArg,
        #[arg(long, default_value = "1e7")]
        budget: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbePropertyArg {
    Nc,
    Na,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Compare the optimized checker against the brute-force oracle.
    Oracle {
        #[arg(long)]
        measure: String,
        #[arg(long, value_enum)]
        property: OraclePropertyArg,
        #[arg(long, default_value = "50")]
        samples: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
        /// Largest restricted-grid size enumerated exhaustively.
        #[arg(long, default_value = "16")]
        cutoff: usize,
        #[arg(long, default_value = "1e7")]
        budget: String,
    },
    /// Cross-check up-set enumeration against subset filtering.
    Dedekind {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "1e7")]
        budget: String,
    },
    /// Chebyshev covariance inequality on a single chain.
    Chebyshev {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OraclePropertyArg {
    Na,
    Pa,
}

#[derive(Debug)]
struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }
}

macro_rules! cli_error_from {
    ($type:ty, $kind:literal) => {
        impl From<$type> for CliError {
            fn from(err: $type) -> Self {
                CliError::new($kind, err.to_string())
            }
        }
    };
}

cli_error_from!(negdep::json::JsonError, "input");
cli_error_from!(negdep::measure::MeasureError, "measure");
cli_error_from!(negdep::checks::CheckError, "check");
cli_error_from!(negdep::constructions::ConstructionError, "construct");
cli_error_from!(negdep::search::SearchError, "search");
cli_error_from!(negdep::oracle::OracleError, "oracle");
cli_error_from!(negdep::lattice::LatticeError, "lattice");
cli_error_from!(negdep::rational::ParseRationalError, "rational");
cli_error_from!(std::io::Error, "io");

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(holds) => {
            if holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            let payload = json!({"error": {"kind": err.kind, "message": err.message}});
            eprintln!("{payload}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buffer = String::new();
        std::io::stdin().read_to_string(&mut buffer)?;
        Ok(buffer)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn load_measure(path: &str) -> Result<DiscreteMeasure, CliError> {
    Ok(measure_from_json_str(&read_input(path)?)?)
}

fn load_function(path: &str) -> Result<FunctionSpec, CliError> {
    Ok(function_from_json_str(&read_input(path)?)?)
}

fn parse_budget(text: &str) -> Result<u64, CliError> {
    let trimmed = text.trim();
    if let Ok(value) = trimmed.parse::<u64>() {
        return Ok(value);
    }
    let value: f64 = trimmed
        .parse()
        .map_err(|_| CliError::new("usage", format!("bad budget `{trimmed}`")))?;
    if !value.is_finite() || value < 0.0 || value > u64::MAX as f64 {
        return Err(CliError::new("usage", format!("bad budget `{trimmed}`")));
    }
    Ok(value as u64)
}

fn parse_rat(text: &str) -> Result<Rational, CliError> {
    Ok(parse_rational(text)?)
}

fn one_based(indices: &[usize]) -> Result<Vec<usize>, CliError> {
    indices
        .iter()
        .map(|&i| {
            i.checked_sub(1)
                .ok_or_else(|| CliError::new("usage", "coordinate indices are 1-based"))
        })
        .collect()
}

fn emit(value: serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("valid JSON")
    );
}

fn emit_report(report: &DependenceReport) -> bool {
    emit(report.to_json());
    report.holds()
}

/// Returns Ok(true) for exit 0, Ok(false) for exit 1.
fn run(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Check(args) => {
            let mut measure = load_measure(&args.measure)?;
            if args.induce_grid {
                measure = measure.with_induced_grid();
            }
            let budget = parse_budget(&args.budget)?;
            let options = CheckOptions {
                budget,
                early_exit: args.early_exit,
                parallel: true,
            };
            if let Some(path) = &args.emit_table {
                let table = match args.property {
                    CheckProperty::Nc => GapTable::Nc,
                    CheckProperty::Na | CheckProperty::InteriorMargin => GapTable::Na,
                    CheckProperty::Pa => GapTable::Pa,
                    CheckProperty::Fkg => GapTable::Fkg,
                };
                let mut file = fs::File::create(path)?;
                negdep::checks::write_gap_table(&measure, table, budget, &mut file)?;
            }
            let report = match args.property {
                CheckProperty::Nc => nc_report(&measure)?,
                CheckProperty::Na => na_report_with(&measure, &options)?,
                CheckProperty::Pa => pa_report_with(&measure, &options)?,
                CheckProperty::Fkg => fkg_report(&measure)?,
                CheckProperty::InteriorMargin => na_interior_margin(&measure, budget)?,
            };
            Ok(emit_report(&report))
        }
        Command::Construct(args) => {
            match args.family {
                ConstructFamily::Lemma1 { weights, n } => {
                    let weights: Vec<Rational> = match (weights, n) {
                        (Some(raw), _) => {
                            raw.iter().map(|w| parse_rat(w)).collect::<Result<_, _>>()?
                        }
                        (None, Some(n)) if n > 0 => {
                            vec![Rational::new(1.into(), (n as i64).into()); n]
                        }
                        _ => return Err(CliError::new("usage", "lemma1 needs --weights or --n")),
                    };
                    let measure = lemma1_measure(weights.len(), &weights)?;
                    emit(measure_to_json_value(&measure));
                }
                ConstructFamily::CornerPair { h } => {
                    let pair = skewed_corner_pair(&parse_rat(&h)?)?;
                    emit(json!({
                        "h": format_rational(&pair.h),
                        "mu_high": measure_to_json_value(&pair.mu_high),
                        "nu_low": measure_to_json_value(&pair.nu_low),
                    }));
                }
                ConstructFamily::Penalty { n, q } => {
                    let measure = pairwise_penalty_measure(n, &parse_rat(&q)?)?;
                    emit(measure_to_json_value(&measure));
                }
                ConstructFamily::Inject { measure, alpha, c } => {
                    let mu = load_measure(&measure)?;
                    let alpha = parse_rat(&alpha)?;
                    let c = parse_rat(&c)?;
                    let injection = inject_positive_correlation(&mu, &alpha, &c)?;
                    let tv = mu.tv_distance(&injection.measure)?;
                    emit(json!({
                        "measure": measure_to_json_value(&injection.measure),
                        "radicand": injection.radicand.as_ref().map(format_rational),
                        "tv_distance_to_input": format_rational(&tv),
                    }));
                }
            }
            Ok(true)
        }
        Command::Mix {
            left,
            right,
            lambda,
        } => {
            let mixture = load_measure(&left)?.mix(&load_measure(&right)?, &parse_rat(&lambda)?)?;
            emit(measure_to_json_value(&mixture));
            Ok(true)
        }
        Command::Tv { left, right } => {
            let distance = load_measure(&left)?.tv_distance(&load_measure(&right)?)?;
            emit(json!({"tv_distance": format_rational(&distance)}));
            Ok(true)
        }
        Command::Marginal { measure, indices } => {
            let indices = one_based(&indices)?;
            let marginal = load_measure(&measure)?.marginal(&indices)?;
            emit(measure_to_json_value(&marginal));
            Ok(true)
        }
        Command::Map {
            measure,
            scale,
            shift,
        } => {
            let measure = load_measure(&measure)?;
            let scale = parse_rat(&scale)?;
            let shift: Vec<Rational> = match shift {
                None => vec![Rational::new(0.into(), 1.into()); measure.dimension()],
                Some(raw) => raw.iter().map(|v| parse_rat(v)).collect::<Result<_, _>>()?,
            };
            let mapped = measure.translate_scale(&scale, &shift)?;
            emit(measure_to_json_value(&mapped));
            Ok(true)
        }
        Command::Search(search) => run_search(search),
        Command::Verify(verify) => run_verify(verify),
    }
}

fn run_search(command: SearchCommand) -> Result<bool, CliError> {
    match command {
        SearchCommand::Nonconvex {
            h,
            mu,
            nu,
            lambdas,
        } => {
            let (mu, nu) = match (h, mu, nu) {
                (Some(h), None, None) => {
                    let pair = skewed_corner_pair(&parse_rat(&h)?)?;
                    (pair.mu_high, pair.nu_low)
                }
                (None, Some(mu), Some(nu)) => (load_measure(&mu)?, load_measure(&nu)?),
                _ => {
                    return Err(CliError::new(
                        "usage",
                        "nonconvex needs either --h or both --mu and --nu",
                    ))
                }
            };
            let mode = match lambdas {
                None => LambdaMode::Exact,
                Some(raw) => {
                    LambdaMode::Grid(raw.iter().map(|v| parse_rat(v)).collect::<Result<_, _>>()?)
                }
            };
            match nonconvex_witness(&mu, &nu, &mode)? {
                Some(witness) => {
                    emit(json!({"witness": witness.to_json()}));
                    Ok(true)
                }
                None => {
                    emit(json!({"witness": null}));
                    Ok(false)
                }
            }
        }
        SearchCommand::WeakCounterexample {
            mu,
            tests,
            pair,
            budget,
        } => {
            if pair.len() != 2 {
                return Err(CliError::new("usage", "--pair needs exactly two indices"));
            }
            let pair = one_based(&pair)?;
            let mu = load_measure(&mu)?;
            let tests: Vec<FunctionSpec> = tests
                .iter()
                .map(|path| load_function(path))
                .collect::<Result<_, _>>()?;
            let budget = parse_budget(&budget)?;
            let found = weak_counterexample(&mu, &tests, None, (pair[0], pair[1]), budget)?;
            emit(json!({
                "measure": measure_to_json_value(&found.measure),
                "template_covariance": format_rational(&found.template_covariance),
                "na_report": found.na_failure.to_json(),
            }));
            Ok(true)
        }
        SearchCommand::TvProbe {
            measure,
            radius,
            trials,
            seed,
            property,
            budget,
        } => {
            let mu = load_measure(&measure)?;
            let radius = parse_rat(&radius)?;
            let property = match property {
                ProbePropertyArg::Nc => ProbeProperty::Nc,
                ProbePropertyArg::Na => ProbeProperty::Na,
            };
            let budget = parse_budget(&budget)?;
            let report = tv_interior_probe(&mu, &radius, trials, seed, property, budget)?;
            let all_passed = report.fails == 0;
            emit(report.to_json());
            Ok(all_passed)
        }
    }
}

fn run_verify(command: VerifyCommand) -> Result<bool, CliError> {
    match command {
        VerifyCommand::Oracle {
            measure,
            property,
            samples,
            seed,
            cutoff,
            budget,
        } => {
            let mu = load_measure(&measure)?;
            let budget = parse_budget(&budget)?;
            let options = CheckOptions {
                budget,
                early_exit: false,
                parallel: true,
            };
            let (checker_holds, oracle) = match property {
                OraclePropertyArg::Na => (
                    na_report_with(&mu, &options)?.holds(),
                    brute_force_dependence(&mu, OracleProperty::Na, samples, seed, cutoff)?,
                ),
                OraclePropertyArg::Pa => (
                    pa_report_with(&mu, &options)?.holds(),
                    brute_force_dependence(&mu, OracleProperty::Pa, samples, seed, cutoff)?,
                ),
            };
            let agree = checker_holds == oracle.holds;
            emit(json!({
                "checker_holds": checker_holds,
                "oracle_holds": oracle.holds,
                "agree": agree,
                "oracle_pairs_evaluated": oracle.pairs_evaluated,
                "oracle_worst_covariance": oracle
                    .worst
                    .as_ref()
                    .map(|w| format_rational(&w.covariance)),
            }));
            Ok(agree)
        }
        VerifyCommand::Dedekind { m, budget } => {
            let budget = parse_budget(&budget)?;
            let enumerated = Poset::cube(m)?
                .enumerate_upsets(usize::try_from(budget).unwrap_or(usize::MAX))?
                .len() as u64;
            let brute = if m <= 4 { Some(dedekind_count(m)?) } else { None };
            let agree = brute.is_none_or(|b| b == enumerated);
            emit(json!({
                "m": m,
                "enumerated": enumerated,
                "brute_force": brute,
                "agree": agree,
            }));
            Ok(agree)
        }
        VerifyCommand::Chebyshev { measure, f, g } => {
            let mu = load_measure(&measure)?;
            let f = table_values(&load_function(&f)?, &mu)?;
            let g = table_values(&load_function(&g)?, &mu)?;
            let report = chebyshev_1d_check(&mu, &f, &g)?;
            let identity_holds = report.covariance == report.double_sum;
            let nonnegative = report.covariance >= Rational::new(0.into(), 1.into());
            emit(json!({
                "covariance": format_rational(&report.covariance),
                "double_sum": format_rational(&report.double_sum),
                "identity_holds": identity_holds,
                "nonnegative": nonnegative,
            }));
            Ok(identity_holds && nonnegative)
        }
    }
}

/// Flattens a 1-dim function spec into chain-indexed values.
fn table_values(
    function: &FunctionSpec,
    measure: &DiscreteMeasure,
) -> Result<Vec<Rational>, CliError> {
    let grid = measure
        .grid()
        .ok_or_else(|| CliError::new("usage", "chebyshev needs a measure with a grid"))?;
    if measure.dimension() != 1 {
        return Err(CliError::new("usage", "chebyshev needs a 1-dim measure"));
    }
    let chain = &grid.levels()[0];
    (0..chain.len())
        .map(|level| {
            function
                .eval(&[chain[level].clone()], Some(&[level]))
                .map_err(|e| CliError::new("input", e.to_string()))
        })
        .collect()
}
