//! Command-line driver for the truncation, scaling and convergence studies
//! and for single preconditioned solves.
//!
//! Values can come from flags or from a flat `key=value` config file
//! (`--config`); flags override the file. Ranges use `a..b` (inclusive,
//! powers-of-two steps for mesh sizes) and comma lists. Exit codes: 0 on
//! success, 2 on validation errors, 3 on solver failures.

use clap::{Args, Parser, Subcommand};
use polybddc::experiments::{self, Family};
use polybddc::methods::Method;
use polybddc::seminorms::Side;
use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "polybddc", version, about = "Polytopal hybrid methods with BDDC preconditioning")]
struct Cli {
    /// Flat key=value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truncation-operator eigenvalue study on Cartesian meshes.
    Truncation(TruncationArgs),
    /// Solve the benchmark Poisson problem once and write a solution VTK.
    Solve(SolveArgs),
    /// Weak-scalability study (FGMRES + BDDC iterations and conditioning).
    Scaling(ScalingArgs),
    /// Convergence sanity study on the manufactured solution.
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
struct TruncationArgs {
    /// Boundary region: top, bottom, left, right, combinations like
    /// top+right, or all.
    #[arg(long)]
    gamma: Option<String>,
    /// Mesh sizes, e.g. 1/8..1/64 (powers-of-two steps) or 1/16.
    #[arg(long)]
    h: Option<String>,
    /// Face degrees, e.g. 0..3 or 1,2.
    #[arg(long)]
    k: Option<String>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    /// Method: hdg, hdg+, hho or hho-mixed.
    #[arg(long)]
    method: Option<String>,
    /// Mesh family: cartesian, simplicial or voronoi.
    #[arg(long)]
    mesh: Option<String>,
    /// Cells per direction of the underlying Cartesian grid.
    #[arg(long)]
    n: Option<String>,
    /// Face degree.
    #[arg(long)]
    k: Option<String>,
    /// Number of subdomains (a square number).
    #[arg(long)]
    np: Option<String>,
    /// FGMRES relative-residual tolerance.
    #[arg(long)]
    tol: Option<String>,
    /// Solution VTK output path.
    #[arg(long)]
    vtk: Option<String>,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    mesh: Option<String>,
    /// Subdomain sizes H/h, e.g. 8 or 4..32 or 4,8,16.
    #[arg(long)]
    hh: Option<String>,
    /// Subdomain counts, e.g. 4,16,64 (square numbers).
    #[arg(long)]
    np: Option<String>,
    /// Face degrees, e.g. 0..2.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    mesh: Option<String>,
    /// Face degree.
    #[arg(long)]
    k: Option<String>,
    /// Mesh sizes, e.g. 1/8..1/32.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Solver(String),
}

impl From<polybddc::Error> for CliError {
    fn from(e: polybddc::Error) -> Self {
        match e {
            polybddc::Error::InvalidInput(m) | polybddc::Error::Mesh(m) => CliError::Validation(m),
            polybddc::Error::Linalg(m) | polybddc::Error::Solver(m) => CliError::Solver(m),
            polybddc::Error::Io(e) => CliError::Solver(e.to_string()),
        }
    }
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            3
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_config(cli.config.as_deref())?;
    let _workers = worker_cap()?; // studies currently run one worker

    match cli.command {
        Command::Truncation(args) => {
            let gamma =
                parse_gamma(&pick(args.gamma, &file, "gamma").unwrap_or_else(|| "top".into()))?;
            let ns = parse_h_list(&pick(args.h, &file, "h").unwrap_or_else(|| "1/8..1/64".into()))?;
            let ks = parse_usize_list(&pick(args.k, &file, "k").unwrap_or_else(|| "0..3".into()))?;
            let output = pick(args.output, &file, "output");
            let result = experiments::truncation_study(&ns, &ks, &gamma)?;
            write_csv(&result, output)
        }
        Command::Solve(args) => {
            let method =
                parse_method(&pick(args.method, &file, "method").unwrap_or_else(|| "hho".into()))?;
            let family =
                parse_family(&pick(args.mesh, &file, "mesh").unwrap_or_else(|| "cartesian".into()))?;
            let n: usize = parse_scalar(&pick(args.n, &file, "n").unwrap_or_else(|| "16".into()), "n")?;
            let k: usize = parse_scalar(&pick(args.k, &file, "k").unwrap_or_else(|| "1".into()), "k")?;
            let np: usize =
                parse_scalar(&pick(args.np, &file, "np").unwrap_or_else(|| "4".into()), "np")?;
            let tol = parse_tol(&pick(args.tol, &file, "tol").unwrap_or_else(|| "1e-8".into()))?;
            let vtk_path = pick(args.vtk, &file, "vtk").unwrap_or_else(|| "solution.vtk".into());

            let outcome = experiments::solve_benchmark(method, family, n, k, np, tol)?;
            if !outcome.converged {
                return Err(CliError::Solver(format!(
                    "FGMRES did not reach tolerance {tol} within {} iterations",
                    outcome.iterations
                )));
            }
            println!("iterations: {}", outcome.iterations);
            println!("kappa: {}", outcome.kappa);
            println!("l2_error: {}", outcome.error_l2);
            let mut out = std::fs::File::create(&vtk_path)
                .map_err(|e| CliError::Solver(format!("cannot create {vtk_path}: {e}")))?;
            polybddc::mesh::write_vtk(
                &outcome.mesh,
                &mut out,
                Some(&outcome.subdomain_ids),
                Some(("solution", &outcome.cell_values)),
            )?;
            println!("vtk: {vtk_path}");
            Ok(())
        }
        Command::Scaling(args) => {
            let method =
                parse_method(&pick(args.method, &file, "method").unwrap_or_else(|| "hho".into()))?;
            let family = parse_family(
                &pick(args.mesh, &file, "mesh").unwrap_or_else(|| "simplicial".into()),
            )?;
            let hhs = parse_usize_list(&pick(args.hh, &file, "hh").unwrap_or_else(|| "8".into()))?;
            let nps =
                parse_usize_list(&pick(args.np, &file, "np").unwrap_or_else(|| "4,16,64".into()))?;
            let ks = parse_usize_list(&pick(args.k, &file, "k").unwrap_or_else(|| "0..1".into()))?;
            let tol = parse_tol(&pick(args.tol, &file, "tol").unwrap_or_else(|| "1e-8".into()))?;
            let output = pick(args.output, &file, "output");
            let result = experiments::scaling_study(method, family, &hhs, &nps, &ks, tol)?;
            write_csv(&result, output)
        }
        Command::Convergence(args) => {
            let method =
                parse_method(&pick(args.method, &file, "method").unwrap_or_else(|| "hho".into()))?;
            let family = parse_family(
                &pick(args.mesh, &file, "mesh").unwrap_or_else(|| "simplicial".into()),
            )?;
            let k: usize = parse_scalar(&pick(args.k, &file, "k").unwrap_or_else(|| "1".into()), "k")?;
            let ns = parse_h_list(&pick(args.h, &file, "h").unwrap_or_else(|| "1/8..1/32".into()))?;
            let tol = parse_tol(&pick(args.tol, &file, "tol").unwrap_or_else(|| "1e-8".into()))?;
            let output = pick(args.output, &file, "output");
            let result = experiments::convergence_study(method, family, k, &ns, tol)?;
            write_csv(&result, output)
        }
    }
}

/// Worker cap from POLYBDDC_THREADS (defaults to the machine parallelism).
fn worker_cap() -> Result<usize, CliError> {
    match std::env::var("POLYBDDC_THREADS") {
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                validation(format!("POLYBDDC_THREADS must be a positive integer, got {v:?}"))
            })?;
            if n == 0 {
                return Err(validation("POLYBDDC_THREADS must be at least 1"));
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn load_config(path: Option<&std::path::Path>) -> Result<HashMap<String, String>, CliError> {
    let mut map = HashMap::new();
    let Some(path) = path else {
        return Ok(map);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(validation(format!(
                "config line {} is not key=value: {line:?}",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Flag value if given, otherwise the config-file value.
fn pick(flag: Option<String>, file: &HashMap<String, String>, key: &str) -> Option<String> {
    flag.or_else(|| file.get(key).cloned())
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    Method::parse(s).ok_or_else(|| {
        validation(format!("unknown method {s:?}; expected hdg, hdg+, hho or hho-mixed"))
    })
}

fn parse_family(s: &str) -> Result<Family, CliError> {
    Family::parse(s).ok_or_else(|| {
        validation(format!(
            "unknown mesh family {s:?}; expected cartesian, simplicial or voronoi"
        ))
    })
}

fn parse_gamma(s: &str) -> Result<Vec<Side>, CliError> {
    if s == "all" {
        return Ok(vec![Side::Bottom, Side::Right, Side::Top, Side::Left]);
    }
    let mut sides = Vec::new();
    for part in s.split(['+', '-']) {
        let side = match part {
            "top" => Side::Top,
            "bottom" => Side::Bottom,
            "left" => Side::Left,
            "right" => Side::Right,
            _ => {
                return Err(validation(format!(
                    "unknown boundary side {part:?}; expected top, bottom, left or right"
                )))
            }
        };
        if !sides.contains(&side) {
            sides.push(side);
        }
    }
    if sides.is_empty() {
        return Err(validation("gamma must name at least one side"));
    }
    Ok(sides)
}

fn parse_scalar<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, CliError> {
    s.parse()
        .map_err(|_| validation(format!("cannot parse {name} value {s:?}")))
}

fn parse_tol(s: &str) -> Result<f64, CliError> {
    let tol: f64 = parse_scalar(s, "tol")?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(validation(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(tol)
}

/// `1/a..1/b` (powers-of-two steps), a comma list of `1/n`, or a single
/// `1/n`; returns the resolutions `n`.
fn parse_h_list(s: &str) -> Result<Vec<usize>, CliError> {
    let frac = |tok: &str| -> Result<usize, CliError> {
        let tok = tok.trim();
        let Some(rest) = tok.strip_prefix("1/") else {
            return Err(validation(format!("mesh size {tok:?} must have the form 1/n")));
        };
        let n: usize = rest
            .parse()
            .map_err(|_| validation(format!("cannot parse mesh size {tok:?}")))?;
        if n == 0 {
            return Err(validation("mesh size 1/0 is invalid"));
        }
        Ok(n)
    };
    if let Some((a, b)) = s.split_once("..") {
        let (start, end) = (frac(a)?, frac(b)?);
        if start > end {
            return Err(validation(format!("empty mesh range {s:?}")));
        }
        let mut out = Vec::new();
        let mut n = start;
        while n < end {
            out.push(n);
            n *= 2;
        }
        if n != end {
            return Err(validation(format!(
                "mesh range {s:?} is not reachable by halving steps"
            )));
        }
        out.push(end);
        Ok(out)
    } else {
        s.split(',').map(frac).collect()
    }
}

/// `a..b` (inclusive; unit steps, or doubling steps when the span is a
/// power-of-two multiple as for mesh-size ratios), a comma list, or a single
/// value.
fn parse_usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    let one = |tok: &str| -> Result<usize, CliError> {
        tok.trim()
            .parse()
            .map_err(|_| validation(format!("cannot parse integer {tok:?}")))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (start, end) = (one(a)?, one(b)?);
        if start > end {
            return Err(validation(format!("empty range {s:?}")));
        }
        let doubling =
            start > 1 && end % start == 0 && (end / start).is_power_of_two() && start * 2 <= end;
        let mut out = Vec::new();
        let mut v = start;
        while v < end {
            out.push(v);
            v = if doubling { v * 2 } else { v + 1 };
        }
        out.push(end);
        Ok(out)
    } else {
        s.split(',').map(one).collect()
    }
}

fn write_csv(result: &experiments::StudyResult, path: Option<String>) -> Result<(), CliError> {
    let csv = result.to_csv();
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(&p)
                .map_err(|e| CliError::Solver(format!("cannot create {p}: {e}")))?;
            f.write_all(csv.as_bytes())
                .map_err(|e| CliError::Solver(e.to_string()))?;
            eprintln!("csv: {p}");
        }
        None => print!("{csv}"),
    }
    Ok(())
}
