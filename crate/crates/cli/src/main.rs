use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};

use fraclap::harness::{self, ErrorReport, Preset, RunDescription, Scale};
use fraclap::operator::{Backend, FractionalOperator};
use fraclap::weights::{weights_1d, weights_nd};
use fraclap::{Grid, GridFunction};

#[derive(Parser)]
#[command(
    name = "fraclap",
    version,
    about = "Monotone schemes for fractional nonlinear diffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the weight table κ_j as CSV.
    Weights {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        radius: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply −(−Δ_h)^{σ/2} to a sampled function (`x[,y],u` CSV).
    Apply {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        h: f64,
        /// Truncation radius; defaults to the grid width.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scheme described by a `key = value` config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one of the preset experiments.
    Experiment {
        preset: String,
        #[arg(long)]
        full_scale: bool,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Recompute and print the observed orders of an error table.
    Rates {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .find_map(|c| c.downcast_ref::<fraclap::Error>())
                .is_some_and(fraclap::Error::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Weights {
            sigma,
            h,
            radius,
            dim,
            out,
        } => weights(sigma, h, radius, dim, &out),
        Command::Apply {
            sigma,
            h,
            radius,
            input,
            out,
        } => apply(sigma, h, radius, &input, &out),
        Command::Solve { config, out } => {
            let desc = RunDescription::from_file(&config)?;
            let (problem, cfg) = desc.build::<f64>()?;
            let tr = fraclap::solve(problem, cfg)?;
            log::info!("{} steps of τ = {:e}", tr.steps, tr.tau);
            write(&out, &harness::solution_csv(&tr.snapshots))
        }
        Command::Experiment {
            preset,
            full_scale,
            out,
        } => {
            let preset = Preset::parse(&preset)?;
            let scale = if full_scale { Scale::Full } else { Scale::Desk };
            let result = harness::run_experiment(preset, scale)?;
            for rep in &result.reports {
                print!("{}", rep.to_csv());
            }
            for path in result.write(&out)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Rates { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let rep = ErrorReport::parse_csv(&text)?;
            println!("{:>14} {:>14} {:>8}", "param", "rel_error", "rate");
            for r in &rep.rows {
                let rate = r
                    .rate
                    .map(|v| format!("{v:.2}"))
                    .unwrap_or_else(|| "--".into());
                println!("{:>14.6e} {:>14.6e} {rate:>8}", r.param, r.rel_error);
            }
            Ok(())
        }
    }
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn weights(sigma: f64, h: f64, radius: usize, dim: usize, out: &Path) -> anyhow::Result<()> {
    let table = if dim == 1 {
        weights_1d(sigma, h, radius)?
    } else {
        weights_nd(sigma, h, dim, radius)?
    };
    let mut s = String::new();
    if dim == 1 {
        s.push_str("j,kappa\n");
    } else {
        let cols: Vec<String> = (1..=dim).map(|k| format!("j{k}")).collect();
        let _ = writeln!(s, "{},kappa", cols.join(","));
    }
    for (j, w) in table.iter() {
        let idx: Vec<String> = j.iter().map(i64::to_string).collect();
        let _ = writeln!(s, "{},{w:.16e}", idx.join(","));
    }
    let _ = writeln!(s, "DIAGONAL_MASS,{:.16e}", table.diagonal_mass());
    write(out, &s)
}

/// Reads `x[,y],u` rows lying on a uniform grid of spacing `h`.
fn read_samples(path: &Path, h: f64) -> anyhow::Result<GridFunction<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| anyhow!("empty input"))?
        .split(',')
        .map(str::trim)
        .collect();
    let dim = match header.as_slice() {
        ["x", "u"] => 1,
        ["x", "y", "u"] => 2,
        _ => bail!("input header must be `x,u` or `x,y,u`"),
    };
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("row {}: not a number", n + 2))?;
        if v.len() != dim + 1 {
            bail!("row {}: expected {} columns", n + 2, dim + 1);
        }
        rows.push(v);
    }
    let bounds: Vec<(f64, f64)> = (0..dim)
        .map(|k| {
            rows.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[k]), hi.max(r[k]))
                })
        })
        .collect();
    let grid = Arc::new(Grid::new(&bounds, h)?);
    let mut values = vec![f64::NAN; grid.len()];
    for r in &rows {
        let idx = (0..dim)
            .map(|k| grid.nearest(k, r[k]))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| anyhow!("point {:?} is off the grid", &r[..dim]))?;
        let p = grid.point(grid.flat(&idx)?);
        if p.iter()
            .zip(r)
            .any(|(a, b)| (a - b).abs() > 1e-9 * h.max(1.0))
        {
            bail!(
                "point {:?} is not a multiple of h = {h} from the corner",
                &r[..dim]
            );
        }
        values[grid.flat(&idx)?] = r[dim];
    }
    if values.iter().any(|v| v.is_nan()) {
        bail!(
            "input does not cover every point of the {:?} grid",
            grid.shape()
        );
    }
    Ok(GridFunction::new(grid, values)?)
}

fn apply(
    sigma: f64,
    h: f64,
    radius: Option<usize>,
    input: &Path,
    out: &Path,
) -> anyhow::Result<()> {
    let u = read_samples(input, h)?;
    let grid = u.grid().clone();
    let width = grid.shape().iter().max().copied().unwrap_or(2) - 1;
    let r = radius.unwrap_or(width.max(1));
    let table = if grid.dim() == 1 {
        weights_1d(sigma, h, r)?
    } else {
        weights_nd(sigma, h, grid.dim(), r)?
    };
    let op = FractionalOperator::new(table, grid.clone(), None, Backend::Auto)?;
    let lu = op.apply_to(&u)?;
    let mut s = String::from(if grid.dim() == 1 { "x,u\n" } else { "x,y,u\n" });
    for (f, v) in lu.values().iter().enumerate() {
        for x in grid.point(f) {
            let _ = write!(s, "{x:.12e},");
        }
        let _ = writeln!(s, "{v:.16e}");
    }
    write(out, &s)
}
