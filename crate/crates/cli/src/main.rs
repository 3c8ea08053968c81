//! Command-line front end: reproduce the success-probability table, evaluate
//! single cells, export kernel curves, and run the verification suite.
//!
//! Exit codes: 0 on success, 1 when verification checks fail, 2 on usage or
//! domain errors. Data goes to stdout; errors and the verify report go to
//! stderr. Every flag can also be set through a `QPF_*` environment
//! variable for CI use.

mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{render_curves, render_rows, round_half_even, CurvePoint, Format, Method, OutputRow};
use qpf::{
    ekera_bound, h_perturbed, qpf_lower_bound, qpf_upper_bound, run_simulation,
    success_prob_exact, BoundReport, CircuitParams, Error, SimulationConfig, ToleranceM,
};

#[derive(Parser)]
#[command(
    name = "qpf",
    version,
    about = "Success probability of quantum period finding: exact values, bounds, simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the method-comparison table over a grid of orders and tolerances
    Table1(Table1Args),
    /// Exact success probability of one cell
    Exact(CellArgs),
    /// Lower/exact/upper/prior-work values of one cell with the sandwich status
    Bounds(CellArgs),
    /// Monte Carlo estimate of one cell
    Simulate(SimulateArgs),
    /// Sample the perturbed kernel curve H_L(x; M, eps)
    Curve(CurveArgs),
    /// Run the verification suite and report per-check results
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Table1Args {
    /// Order bit-length bound (r < 2^m)
    #[arg(long, default_value_t = 8, env = "QPF_M")]
    m: u32,
    /// Extra qubits in the upper register
    #[arg(long, default_value_t = 5, env = "QPF_Q")]
    q: u32,
    /// Orders to evaluate (repeatable; default 3,15,63,255)
    #[arg(long = "r", env = "QPF_R", value_delimiter = ',')]
    orders: Vec<u64>,
    /// Post-processing tolerances M (repeatable; overrides --M-shift)
    #[arg(long = "M", env = "QPF_TOL_M", value_delimiter = ',')]
    tolerances: Vec<u64>,
    /// Tolerances as 2^(q+shift) (repeatable; default shifts 0 and 3)
    #[arg(long = "M-shift", env = "QPF_TOL_SHIFT", value_delimiter = ',')]
    shifts: Vec<u32>,
    /// Monte Carlo trials per cell; 0 omits the simulation rows
    #[arg(long, default_value_t = 50_000, env = "QPF_TRIALS")]
    trials: u64,
    #[arg(long, default_value_t = 1, env = "QPF_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 8, env = "QPF_WORKERS")]
    workers: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv, env = "QPF_FORMAT")]
    format: FormatArg,
    /// Display decimals for csv/markdown (json carries raw doubles)
    #[arg(long, default_value_t = 3, env = "QPF_DECIMALS")]
    decimals: u32,
}

#[derive(Args)]
struct CellArgs {
    #[arg(long, default_value_t = 8, env = "QPF_M")]
    m: u32,
    #[arg(long, default_value_t = 5, env = "QPF_Q")]
    q: u32,
    /// The order
    #[arg(long = "r", env = "QPF_R")]
    order: u64,
    /// Post-processing tolerance M (default 2^q)
    #[arg(long = "M", env = "QPF_TOL_M")]
    tolerance: Option<u64>,
    #[arg(long, default_value_t = 3, env = "QPF_DECIMALS")]
    decimals: u32,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    cell: CellArgs,
    #[arg(long, default_value_t = 50_000, env = "QPF_TRIALS")]
    trials: u64,
    #[arg(long, default_value_t = 1, env = "QPF_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 8, env = "QPF_WORKERS")]
    workers: usize,
}

#[derive(Args)]
struct CurveArgs {
    /// Peak width L
    #[arg(long = "L", default_value_t = 32, env = "QPF_WIDTH")]
    width: u64,
    /// Number of summand pairs M
    #[arg(long = "M", default_value_t = 2, env = "QPF_TOL_M")]
    terms: u64,
    /// Perturbations to plot (repeatable; default 0, -0.05, -0.3)
    #[arg(long, value_delimiter = ',', env = "QPF_EPSILON", allow_hyphen_values = true)]
    epsilon: Vec<f64>,
    /// Grid points over [0, 1]
    #[arg(long, default_value_t = 201, env = "QPF_POINTS")]
    points: u32,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv, env = "QPF_FORMAT")]
    format: FormatArg,
    #[arg(long, default_value_t = 6, env = "QPF_DECIMALS")]
    decimals: u32,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict to one module's checks
    #[arg(long, value_enum, env = "QPF_SCOPE")]
    scope: Option<ScopeArg>,
    /// Multiply every tolerance (0 demands exactness and is expected to fail)
    #[arg(long, default_value_t = 1.0, env = "QPF_TOLERANCE_SCALE")]
    tolerance_scale: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Markdown,
}

impl From<FormatArg> for Format {
    fn from(value: FormatArg) -> Format {
        match value {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Markdown => Format::Markdown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Kernel,
    NumberTheory,
    Probability,
    Bounds,
    Simulator,
}

impl From<ScopeArg> for qpf::Scope {
    fn from(value: ScopeArg) -> qpf::Scope {
        match value {
            ScopeArg::Kernel => qpf::Scope::Kernel,
            ScopeArg::NumberTheory => qpf::Scope::NumberTheory,
            ScopeArg::Probability => qpf::Scope::Probability,
            ScopeArg::Bounds => qpf::Scope::Bounds,
            ScopeArg::Simulator => qpf::Scope::Simulator,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<i32, Error> {
    match command {
        Command::Table1(args) => cmd_table1(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn cmd_table1(args: Table1Args) -> Result<i32, Error> {
    let orders = if args.orders.is_empty() { vec![3, 15, 63, 255] } else { args.orders.clone() };
    let tolerances: Vec<u64> = if !args.tolerances.is_empty() {
        args.tolerances.clone()
    } else if args.shifts.is_empty() {
        vec![1u64 << args.q, 1u64 << (args.q + 3)]
    } else {
        args.shifts.iter().map(|&s| 1u64 << (args.q + s)).collect()
    };
    let mut rows = Vec::new();
    for &r in &orders {
        for &m_val in &tolerances {
            emit_cell(&mut rows, &args, r, m_val);
        }
    }
    print!("{}", render_rows(&rows, args.format.into(), args.trials > 0, args.decimals));
    Ok(0)
}

fn emit_cell(rows: &mut Vec<OutputRow>, args: &Table1Args, r: u64, m_val: u64) {
    let cell_input = match CircuitParams::new(args.m, args.q, r)
        .and_then(|params| ToleranceM::new(&params, m_val).map(|tol| (params, tol)))
    {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("cell r={r} M={m_val}: {e}");
            rows.push(OutputRow::error(Method::Error, r, m_val, e.to_string()));
            return;
        }
    };
    let (params, tolerance) = cell_input;
    rows.push(OutputRow::value(Method::Exact, r, m_val, success_prob_exact(&params, tolerance)));
    if args.trials > 0 {
        let config = SimulationConfig {
            params,
            tolerance,
            trials: args.trials,
            seed: args.seed,
            workers: args.workers,
        };
        match run_simulation(&config) {
            Ok(res) => rows.push(
                OutputRow::value(Method::Simulation, r, m_val, res.estimate)
                    .with_stderr(res.stderr),
            ),
            Err(e) => {
                eprintln!("cell r={r} M={m_val} simulation: {e}");
                rows.push(OutputRow::error(Method::Simulation, r, m_val, e.to_string()));
            }
        }
    }
    match qpf_upper_bound(&params, tolerance) {
        Ok(v) => rows.push(OutputRow::value(Method::Upper, r, m_val, v)),
        Err(e) => {
            eprintln!("cell r={r} M={m_val} upper: {e}");
            rows.push(OutputRow::error(Method::Upper, r, m_val, e.to_string()));
        }
    }
    match qpf_lower_bound(&params, tolerance) {
        Ok(v) => rows.push(OutputRow::value(Method::Lower, r, m_val, v)),
        Err(e) => {
            eprintln!("cell r={r} M={m_val} lower: {e}");
            rows.push(OutputRow::error(Method::Lower, r, m_val, e.to_string()));
        }
    }
    rows.push(OutputRow::value(Method::Ekera, r, m_val, ekera_bound(&params, m_val)));
}

fn cell_instance(cell: &CellArgs) -> Result<(CircuitParams, ToleranceM), Error> {
    let params = CircuitParams::new(cell.m, cell.q, cell.order)?;
    let m_val = cell.tolerance.unwrap_or(1u64 << cell.q);
    let tolerance = ToleranceM::new(&params, m_val)?;
    Ok((params, tolerance))
}

fn cmd_exact(args: CellArgs) -> Result<i32, Error> {
    let (params, tolerance) = cell_instance(&args)?;
    let value = success_prob_exact(&params, tolerance);
    println!("{:.*}", args.decimals as usize, round_half_even(value, args.decimals));
    Ok(0)
}

fn cmd_bounds(args: CellArgs) -> Result<i32, Error> {
    let (params, tolerance) = cell_instance(&args)?;
    let report = BoundReport::compute(&params, tolerance)?;
    let d = args.decimals as usize;
    println!("lower {:.d$}", round_half_even(report.lower, args.decimals));
    println!("exact {:.d$}", round_half_even(report.exact, args.decimals));
    println!("upper {:.d$}", round_half_even(report.upper, args.decimals));
    println!("ekera {:.d$}", round_half_even(report.ekera, args.decimals));
    if report.sandwich_holds(1e-9) {
        println!("sandwich ok");
        Ok(0)
    } else {
        println!("sandwich VIOLATED");
        Ok(1)
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, Error> {
    let (params, tolerance) = cell_instance(&args.cell)?;
    let config = SimulationConfig {
        params,
        tolerance,
        trials: args.trials,
        seed: args.seed,
        workers: args.workers,
    };
    let result = run_simulation(&config)?;
    let d = args.cell.decimals.max(4) as usize;
    println!("estimate {:.d$}", result.estimate);
    println!("stderr {:.d$}", result.stderr);
    println!("successes {}/{}", result.successes, result.trials);
    println!("cf_successes {}/{}", result.cf_successes, result.trials);
    Ok(0)
}

fn cmd_curve(args: CurveArgs) -> Result<i32, Error> {
    if args.points < 2 {
        return Err(Error::Domain("curve needs at least 2 grid points".into()));
    }
    let epsilons = if args.epsilon.is_empty() { vec![0.0, -0.05, -0.3] } else { args.epsilon };
    let mut series = Vec::new();
    for &eps in &epsilons {
        let mut points = Vec::with_capacity(args.points as usize);
        for i in 0..args.points {
            let x = i as f64 / (args.points - 1) as f64;
            let h = h_perturbed(x, args.terms, args.width, eps)?;
            points.push(CurvePoint { x, h });
        }
        series.push((eps, points));
    }
    print!("{}", render_curves(&series, args.format.into(), args.decimals));
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Error> {
    let checks = qpf::verify::run(args.scope.map(Into::into), args.tolerance_scale);
    let mut failed = 0usize;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        eprintln!(
            "{status} {}/{} worst {:.3e} tolerance {:.3e} [{}]",
            check.scope, check.name, check.worst, check.tolerance, check.grid
        );
        if !check.passed {
            failed += 1;
        }
    }
    eprintln!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { 0 } else { 1 })
}
