use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use sliceplan::bnb::{solve_bnb_with, BnbOptions};
use sliceplan::catalog::{builtin_slice_types, isolation_taxonomy, layer_security_report, security_layers};
use sliceplan::io::{read_scenario, PlanDocument};
use sliceplan::sweep::{
    run_sweep, security_cost_frontier, write_frontier_csv, write_sweep_csv, SweepDimension, SweepSpec,
};
use sliceplan::{solve_exhaustive, validate_scenario, Error, Rational, Scalar, Scenario, SolveStatus};

const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_LIMIT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "sliceplan",
    version,
    about = "Minimum-cost isolation planning for 5G network slices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file for structural problems and axiom violations.
    Validate {
        file: PathBuf,
        /// Parse numbers as exact rationals.
        #[arg(long)]
        exact: bool,
    },
    /// Solve a scenario and write the plan as JSON.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Bnb)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        exact: bool,
        /// Branch-and-bound node budget per slice.
        #[arg(long)]
        node_limit: Option<u64>,
        /// Branch-and-bound time budget per slice, in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Re-solve one slice under forced floors, or list its security/cost frontier.
    Sweep {
        file: PathBuf,
        #[arg(long, value_enum)]
        dim: Dim,
        #[arg(long)]
        slice: u32,
        /// Restrict the floor to one layer; all layers of the slice otherwise.
        #[arg(long)]
        layer: Option<u32>,
        /// Forced values; defaults to every value the target domains define.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        exact: bool,
    },
    /// Print the built-in slice-type presets and taxonomies.
    Presets,
    /// Annotate a plan with the eight-layer security model.
    Report {
        file: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exhaustive,
    Bnb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dim {
    IsolationFloor,
    TenantControlFloor,
    MnoControlFloor,
    Frontier,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NumericalBreakdown(_) => EXIT_LIMIT,
        _ => EXIT_INVALID,
    }
}

fn load<S: Scalar>(path: &Path) -> Result<Scenario<S>, Error> {
    read_scenario(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn validate<S: Scalar>(file: &Path) -> Result<u8, Error> {
    let scenario: Scenario<S> = load(file)?;
    let report = validate_scenario(&scenario);
    if report.is_valid() {
        println!(
            "valid: {} slices, {} layers",
            scenario.slices.len(),
            scenario.layers.len()
        );
        Ok(0)
    } else {
        print!("{report}");
        Ok(EXIT_INVALID)
    }
}

fn solve<S: Scalar>(file: &Path, method: Method, out: &Path, options: &BnbOptions) -> Result<u8, Error> {
    let scenario: Scenario<S> = load(file)?;
    let result = match method {
        Method::Exhaustive => solve_exhaustive(&scenario)?,
        Method::Bnb => solve_bnb_with(&scenario, options)?,
    };
    let plan = PlanDocument::from_result(&scenario, &result)?;
    std::fs::write(out, plan.to_json())?;
    print!("{plan}");
    Ok(match result.status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Limit => EXIT_LIMIT,
    })
}

fn sweep<S: Scalar>(
    file: &Path,
    dim: Dim,
    slice: u32,
    layer: Option<u32>,
    values: &[String],
    out: &Path,
) -> Result<u8, Error> {
    let scenario: Scenario<S> = load(file)?;
    let mut buf = Vec::new();
    let dimension = match dim {
        Dim::Frontier => {
            if !values.is_empty() || layer.is_some() {
                return Err(Error::InvalidSweep(
                    "frontier takes neither --values nor --layer".into(),
                ));
            }
            let points = security_cost_frontier(&scenario, slice)?;
            write_frontier_csv(&points, &mut buf)?;
            std::fs::write(out, &buf)?;
            println!("{} frontier points", points.len());
            return Ok(0);
        }
        Dim::IsolationFloor => SweepDimension::IsolationFloor,
        Dim::TenantControlFloor => SweepDimension::TenantControlFloor,
        Dim::MnoControlFloor => SweepDimension::MnoControlFloor,
    };
    let values = values
        .iter()
        .map(|v| S::parse_decimal(v).ok_or_else(|| Error::InvalidSweep(format!("{v:?} is not a number"))))
        .collect::<Result<Vec<S>, Error>>()?;
    let spec = SweepSpec {
        dimension,
        slice,
        layer,
        values,
    };
    let rows = run_sweep(&scenario, &spec)?;
    write_sweep_csv(&rows, &mut buf)?;
    std::fs::write(out, &buf)?;
    let feasible = rows.iter().filter(|r| r.plan.is_some()).count();
    println!("{} rows, {feasible} feasible", rows.len());
    Ok(0)
}

fn presets() -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "slice types:")?;
    for p in builtin_slice_types() {
        writeln!(out, "  {p}")?;
    }
    writeln!(out, "isolation levels (increasing):")?;
    for l in isolation_taxonomy().levels {
        writeln!(out, "  {} {}", l.id, l.label)?;
    }
    writeln!(out, "security layers:")?;
    for e in security_layers() {
        writeln!(out, "  {:<4} {} - {}", e.numeral, e.name, e.description)?;
    }
    Ok(())
}

fn report(file: &Path, plan: &Path, format: Format) -> Result<u8, Error> {
    let scenario: Scenario<f64> = load(file)?;
    let plan = PlanDocument::parse(&std::fs::read_to_string(plan)?)?;
    if plan.slices.is_empty() {
        return Err(Error::EmptyPlan(plan.status.to_string()));
    }
    let assignment = plan.assignment(&scenario)?;
    let report = layer_security_report(&scenario, &assignment)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
        Format::Text => print!("{report}"),
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Validate { file, exact } => {
            if exact {
                validate::<Rational>(&file)
            } else {
                validate::<f64>(&file)
            }
        }
        Command::Solve {
            file,
            method,
            out,
            exact,
            node_limit,
            time_limit,
        } => {
            let options = BnbOptions {
                node_limit,
                time_limit: time_limit.map(Duration::from_secs_f64),
            };
            if exact {
                solve::<Rational>(&file, method, &out, &options)
            } else {
                solve::<f64>(&file, method, &out, &options)
            }
        }
        Command::Sweep {
            file,
            dim,
            slice,
            layer,
            values,
            out,
            exact,
        } => {
            if exact {
                sweep::<Rational>(&file, dim, slice, layer, &values, &out)
            } else {
                sweep::<f64>(&file, dim, slice, layer, &values, &out)
            }
        }
        Command::Presets => {
            // a closed pipe (e.g. `| head`) is not an error here
            let _ = presets();
            Ok(0)
        }
        Command::Report { file, plan, format } => report(&file, &plan, format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
