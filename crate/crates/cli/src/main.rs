mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use stefan_core::checks;
use stefan_core::collocation::{collocate, linspace, relative_error_curve, ErrorCurve, ErrorSample};
use stefan_core::model::{spherical_reduce, Geometry};
use stefan_core::oracle_fd::{compare, simulate, BoundaryData, Drive};
use stefan_core::series::StefanConvention;
use stefan_core::solver::solve;

use config::{ConfigError, RunConfig};
use output::{num, OutDir};

/// Two-phase Stefan problem: series solutions, flux reconstruction and a
/// finite-difference oracle.
#[derive(Parser)]
#[command(name = "stefan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration, or a built-in name (`testproblem`, `testsphere`).
    #[arg(long, default_value = "testproblem")]
    config: String,
    /// Output directory; overrides `outputs` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stefan-balance convention: derived or printed.
    #[arg(long)]
    convention: Option<StefanConvention>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact coefficients and flux series.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Highest series index kept.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Collocation coefficients and flux comparison curves.
    Collocate {
        #[command(flatten)]
        common: Common,
        /// Collocation instants, comma separated.
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<f64>>,
        /// Highest series index kept.
        #[arg(long)]
        order: Option<usize>,
        /// Samples of the error curve on [0.05, 1].
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Finite-difference run driven by the series solution, with a comparison report.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Grid cells per phase.
        #[arg(long)]
        grid: Option<usize>,
        /// Boundary data at x = 0: temperature or flux.
        #[arg(long)]
        drive: Option<Drive>,
    },
    /// Writes the planar problem equivalent to a spherical one.
    Reduce {
        #[command(flatten)]
        common: Common,
    },
    /// Runs the invariant suite.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Done,
    ChecksFailed,
}

fn load(common: &Common) -> Result<(RunConfig, OutDir)> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(c) = common.convention {
        cfg.convention = c;
    }
    if let Some(o) = &common.out {
        cfg.outputs = o.clone();
    }
    let out = OutDir::create(&cfg.outputs)?;
    Ok((cfg, out))
}

fn revalidate(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    Ok(())
}

fn run_solve(common: Common, order: Option<usize>) -> Result<Outcome> {
    let (mut cfg, out) = load(&common)?;
    if let Some(n) = order {
        cfg.problem.truncation = n;
    }
    revalidate(&cfg)?;
    let sol = solve(&cfg.problem, cfg.convention)?;
    let rows = output::coefficient_rows(&sol);
    output::print_table(&rows);
    println!("residual {}", num(sol.residual_report.max()));
    let table = out.coefficients("coefficients.csv", &sol)?;
    let json = out.write_text(
        "solution.json",
        &serde_json::to_string_pretty(&sol).expect("solution serializes"),
    )?;
    println!("wrote {} and {}", table.display(), json.display());
    Ok(Outcome::Done)
}

fn run_collocate(
    common: Common,
    points: Option<Vec<f64>>,
    order: Option<usize>,
    grid: Option<usize>,
) -> Result<Outcome> {
    let (mut cfg, out) = load(&common)?;
    if let Some(p) = points {
        cfg.plan.points = p;
    }
    if let Some(n) = order {
        cfg.plan.terms = n + 1;
    }
    if let Some(n) = grid {
        cfg.plan.t_grid = linspace(0.05, 1.0, n);
    }
    revalidate(&cfg)?;
    let exact = solve(&cfg.problem, cfg.convention)?;
    let approx = collocate(&cfg.problem, &cfg.plan, cfg.convention)?;
    let curve = relative_error_curve(&exact.flux, &approx.flux, &cfg.plan.t_grid);
    let small = relative_error_curve(&exact.flux, &approx.flux, &linspace(1e-3, 0.05, 50));

    output::print_table(&output::coefficient_rows(&approx));
    println!("residual {}", num(approx.residual_report.max()));
    println!(
        "max relative flux error {} on [{}, {}]",
        num(curve.max_rel_err),
        num(cfg.plan.t_grid.first().copied().unwrap_or(f64::NAN)),
        num(cfg.plan.t_grid.last().copied().unwrap_or(f64::NAN)),
    );
    out.coefficients("coefficients.csv", &approx)?;
    out.coefficients("coefficients_exact.csv", &exact)?;
    out.flux("flux.csv", &curve)?;
    out.flux("flux_small_t.csv", &small)?;
    println!("wrote {}", out.path("").display());
    Ok(Outcome::Done)
}

fn run_oracle(common: Common, grid: Option<usize>, drive: Option<Drive>) -> Result<Outcome> {
    let (mut cfg, out) = load(&common)?;
    if let Some(n) = grid {
        cfg.oracle.nx = n;
    }
    if let Some(d) = drive {
        cfg.drive = d;
    }
    revalidate(&cfg)?;
    let sol = solve(&cfg.problem, cfg.convention)?;
    let work = match cfg.problem.geometry {
        Geometry::Spherical => spherical_reduce(&cfg.problem)?,
        Geometry::Planar => cfg.problem.clone(),
    };
    let bc = BoundaryData::from_solution(&sol, cfg.drive, &cfg.oracle)?;
    let field = simulate(&work, &bc, &cfg.oracle)?;
    let t_end = cfg.oracle.t_end;
    let lambda1 = cfg.problem.params.lambda1;
    let report = compare(&field, &sol, lambda1, (0.1 * t_end, t_end));

    let samples: Vec<ErrorSample> = field
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let exact = sol.flux_at(t);
            let approx = field.physical_flux(i, sol.sphere_radius, lambda1);
            ErrorSample {
                t,
                exact,
                approx,
                rel_err: (exact != 0.0).then(|| (exact - approx).abs() / exact.abs()),
            }
        })
        .collect();
    let max_rel_err = samples
        .iter()
        .filter(|s| s.t >= 0.1 * t_end)
        .filter_map(|s| s.rel_err)
        .fold(0.0, f64::max);
    out.front("front.csv", &field.times, &field.front)?;
    out.flux("flux.csv", &ErrorCurve { samples, max_rel_err })?;
    let summary = serde_json::json!({
        "report": report,
        "energy": field.energy,
        "steps": field.steps,
        "max_stages_used": field.max_stages_used,
    });
    out.write_text(
        "report.json",
        &serde_json::to_string_pretty(&summary).expect("report serializes"),
    )?;
    println!("steps {} (at most {} stages)", field.steps, field.max_stages_used);
    println!("window [{}, {}]", num(0.1 * t_end), num(t_end));
    println!("temperature sup {}", num(report.temperature_sup));
    println!("front sup       {}", num(report.front_sup));
    println!("flux sup        {} (relative {})", num(report.flux_sup), num(report.flux_rel_sup));
    println!("Stefan residual {}", num(report.stefan_sup));
    if let Some(e) = field.energy {
        println!("energy defect   {} (relative {})", num(e.defect), num(e.relative_defect));
    }
    println!("wrote {}", out.path("").display());
    Ok(Outcome::Done)
}

fn run_reduce(common: Common) -> Result<Outcome> {
    let (cfg, out) = load(&common)?;
    let mut reduced = cfg.clone();
    reduced.problem = spherical_reduce(&cfg.problem)?;
    revalidate(&reduced)?;
    let p = out.write_text("reduced.json", &reduced.to_json())?;
    println!("{}", reduced.to_json());
    eprintln!("wrote {}", p.display());
    Ok(Outcome::Done)
}

fn run_verify(out: Option<PathBuf>) -> Result<Outcome> {
    let results = checks::run_all();
    for c in &results {
        println!(
            "{} {:<12} {:<42} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.name,
            c.detail
        );
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", results.len());
    if let Some(dir) = out {
        let out = OutDir::create(&dir)?;
        out.write_text(
            "verify.json",
            &serde_json::to_string_pretty(&results).expect("results serialize"),
        )?;
    }
    Ok(if failed == 0 {
        Outcome::Done
    } else {
        Outcome::ChecksFailed
    })
}

/// 2: bad configuration or usage, 3: degenerate system, 1: anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<stefan_core::Error>() {
        Some(stefan_core::Error::Config(_) | stefan_core::Error::Invalid(_) | stefan_core::Error::Usage(_)) => 2,
        Some(stefan_core::Error::Degeneracy(_) | stefan_core::Error::Singularity(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { common, order } => run_solve(common, order),
        Command::Collocate {
            common,
            points,
            order,
            grid,
        } => run_collocate(common, points, order, grid),
        Command::Oracle {
            common,
            grid,
            drive,
        } => run_oracle(common, grid, drive),
        Command::Reduce { common } => run_reduce(common),
        Command::Verify { out } => run_verify(out),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
