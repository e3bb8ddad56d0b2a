//! The standard experiments, at desk scale (minutes) or at the full sizes.

use std::path::Path;
use std::sync::Arc;

use crate::grid::{AxisMask, Grid, GridFunction};
use crate::problem::{DiffusionTerm, ExactSolution, InitialData, Nonlinearity, Order, Problem};
use crate::stepper::{solve, Scheme, SchemeConfig, TauRule, Trajectory};
use crate::{Error, Result};

use super::{relative_linf_error, relative_linf_error_exact, solution_csv, ErrorReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// F1, g1 and g2, σ ∈ {½, 1, 3/2}, up to t = ½.
    Exp1a,
    /// F1, g2, σ ∈ {1, 3/2, 2} at four times.
    Exp1b,
    /// 2-d, F1 along x and F2 along y, radial g1.
    Exp2,
    /// σ → 0 against the −Id limit.
    Exp3Sigma0,
    /// σ → 2 against the Laplacian limit.
    Exp3Sigma2,
    /// Linear σ = 1, τ = h, against the exact solution.
    Exp4aTauH,
    /// Linear σ = 1, τ = h², against the exact solution.
    Exp4aTauH2,
    /// F2, σ = 1, τ = h², against a finer numerical solution.
    Exp4b,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Exp1a,
        Preset::Exp1b,
        Preset::Exp2,
        Preset::Exp3Sigma0,
        Preset::Exp3Sigma2,
        Preset::Exp4aTauH,
        Preset::Exp4aTauH2,
        Preset::Exp4b,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("preset", format!("unknown preset `{s}`")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Exp1a => "exp1a",
            Preset::Exp1b => "exp1b",
            Preset::Exp2 => "exp2",
            Preset::Exp3Sigma0 => "exp3_sigma0",
            Preset::Exp3Sigma2 => "exp3_sigma2",
            Preset::Exp4aTauH => "exp4a_tau_h",
            Preset::Exp4aTauH2 => "exp4a_tau_h2",
            Preset::Exp4b => "exp4b",
        }
    }

    /// Default parameters at the given scale.
    pub fn params(self, scale: Scale) -> ExperimentParams {
        let full = scale == Scale::Full;
        let halvings = |from: i32, to: i32| (from..=to).map(|k| 2f64.powi(-k)).collect::<Vec<_>>();
        let sigma_steps: Vec<f64> = (0..5).map(|k| 0.1 / 2f64.powi(k)).collect();
        let base = ExperimentParams {
            half_width: 20.0,
            window: 10.0,
            h: vec![2f64.powi(-5)],
            sigmas: vec![],
            times: vec![],
            t_final: 1.0,
            safety: 0.9,
            reference_h: None,
        };
        match self {
            Preset::Exp1a => ExperimentParams {
                sigmas: vec![0.5, 1.0, 1.5],
                times: vec![0.0, 0.125, 0.25, 0.375, 0.5],
                t_final: 0.5,
                ..base
            },
            Preset::Exp1b => ExperimentParams {
                sigmas: vec![1.0, 1.5, 2.0],
                times: vec![0.0, 0.25, 0.5, 1.0, 2.0],
                t_final: 2.0,
                ..base
            },
            Preset::Exp2 => ExperimentParams {
                half_width: if full { 20.0 } else { 10.0 },
                h: vec![if full { 2f64.powi(-5) } else { 2f64.powi(-3) }],
                sigmas: vec![1.0],
                times: vec![0.0, 0.25, 0.5, 0.75, 1.0],
                ..base
            },
            Preset::Exp3Sigma0 => ExperimentParams {
                sigmas: sigma_steps,
                ..base
            },
            Preset::Exp3Sigma2 => ExperimentParams {
                sigmas: sigma_steps.iter().map(|s| 2.0 - s).collect(),
                ..base
            },
            Preset::Exp4aTauH | Preset::Exp4aTauH2 | Preset::Exp4b => ExperimentParams {
                half_width: if full { 5000.0 } else { 200.0 },
                window: if full { 500.0 } else { 50.0 },
                h: if full { halvings(1, 6) } else { halvings(1, 4) },
                sigmas: vec![1.0],
                reference_h: (self == Preset::Exp4b).then(|| {
                    if full {
                        2f64.powi(-7)
                    } else {
                        2f64.powi(-5)
                    }
                }),
                ..base
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Desk,
    Full,
}

/// Sizes of a run; every field can be overridden before [`run_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentParams {
    /// Domain [−L, L] per axis.
    pub half_width: f64,
    /// Error window [−W, W] per axis.
    pub window: f64,
    /// Spacings; a refinement sweep when there are several.
    pub h: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// Snapshot times for the solution presets.
    pub times: Vec<f64>,
    pub t_final: f64,
    pub safety: f64,
    pub reference_h: Option<f64>,
}

/// Snapshots of one run, for CSV output.
#[derive(Clone, Debug)]
pub struct SolutionSet {
    pub label: String,
    pub snapshots: Vec<(f64, GridFunction<f64>)>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub preset: Preset,
    pub reports: Vec<ErrorReport>,
    pub solutions: Vec<SolutionSet>,
}

impl ExperimentOutput {
    /// Writes `<preset>.csv` for the error table (if any) and
    /// `<preset>_<label>.csv` per solution set.
    pub fn write(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for (i, rep) in self.reports.iter().enumerate() {
            let name = if self.reports.len() == 1 {
                format!("{}.csv", self.preset.name())
            } else {
                format!("{}_{i}.csv", self.preset.name())
            };
            let path = dir.join(name);
            rep.write(&path)?;
            written.push(path);
        }
        for s in &self.solutions {
            let path = dir.join(format!("{}_{}.csv", self.preset.name(), s.label));
            std::fs::write(&path, solution_csv(&s.snapshots)).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn order_of(sigma: f64) -> Order<f64> {
    if sigma <= 0.0 {
        Order::NegIdentity
    } else if sigma >= 2.0 {
        Order::Laplacian
    } else {
        Order::Fractional(sigma)
    }
}

fn line_grid(half_width: f64, h: f64) -> Result<Arc<Grid<f64>>> {
    Ok(Arc::new(Grid::new(&[(-half_width, half_width)], h)?))
}

fn one_term(grid: Arc<Grid<f64>>, initial: &str, sigma: f64, f: &str) -> Result<Problem<f64>> {
    Ok(
        Problem::new(grid, InitialData::builtin(initial)?).with_term(DiffusionTerm {
            order: order_of(sigma),
            mask: None,
            nonlinearity: Nonlinearity::builtin(f)?,
            radius: None,
        }),
    )
}

fn auto(t_final: f64, safety: f64, times: &[f64]) -> SchemeConfig<f64> {
    let mut cfg = SchemeConfig::new(Scheme::Explicit, t_final, TauRule::Auto { safety });
    cfg.snapshot_times = times.to_vec();
    cfg
}

fn meta(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn label(prefix: &str, sigma: f64) -> String {
    format!("{prefix}sigma{sigma}")
}

/// Runs a preset with its default parameters at `scale`.
pub fn run_experiment(preset: Preset, scale: Scale) -> Result<ExperimentOutput> {
    run_with(preset, &preset.params(scale))
}

/// Runs a preset with explicit parameters.
pub fn run_with(preset: Preset, p: &ExperimentParams) -> Result<ExperimentOutput> {
    let h0 =
        *p.h.first()
            .ok_or_else(|| Error::invalid("h", "no spacing given"))?;
    let window = [(-p.window, p.window)];
    let mut out = ExperimentOutput {
        preset,
        reports: Vec::new(),
        solutions: Vec::new(),
    };
    let keep = |label: String, tr: Trajectory<f64>| SolutionSet {
        label,
        snapshots: tr.snapshots,
    };
    match preset {
        Preset::Exp1a | Preset::Exp1b => {
            let inits: &[&str] = if preset == Preset::Exp1a {
                &["g1", "g2"]
            } else {
                &["g2"]
            };
            for g in inits {
                for &s in &p.sigmas {
                    let prob = one_term(line_grid(p.half_width, h0)?, g, s, "F1")?;
                    let tr = solve(prob, auto(p.t_final, p.safety, &p.times))?;
                    out.solutions.push(keep(label(&format!("{g}_"), s), tr));
                }
            }
        }
        Preset::Exp2 => {
            let grid = Arc::new(Grid::cube(-p.half_width, p.half_width, 2, h0)?);
            let s = p.sigmas.first().copied().unwrap_or(1.0);
            let prob = split_diffusion_2d(grid, s)?;
            let mut cfg = auto(p.t_final, p.safety, &p.times);
            cfg.scheme = Scheme::MultiDiffusion;
            out.solutions.push(keep(label("", s), solve(prob, cfg)?));
        }
        Preset::Exp3Sigma0 | Preset::Exp3Sigma2 => {
            let to_zero = preset == Preset::Exp3Sigma0;
            let limit = if to_zero { 0.0 } else { 2.0 };
            let reference = solve(
                one_term(line_grid(p.half_width, h0)?, "g2", limit, "F1")?,
                auto(p.t_final, p.safety, &[]),
            )?;
            let mut rows = Vec::new();
            for &s in &p.sigmas {
                let tr = solve(
                    one_term(line_grid(p.half_width, h0)?, "g2", s, "F1")?,
                    auto(p.t_final, p.safety, &[]),
                )?;
                let e = relative_linf_error(tr.final_state(), reference.final_state(), &window)?;
                log::info!("σ = {s}: τ = {:e}, error {e:e}", tr.tau);
                rows.push((if to_zero { s } else { 2.0 - s }, e));
            }
            out.reports.push(ErrorReport::from_errors(
                meta(&[
                    ("experiment", preset.name().into()),
                    ("param", if to_zero { "sigma" } else { "2-sigma" }.into()),
                    ("domain", format!("[{}, {}]", -p.half_width, p.half_width)),
                    ("error_window", format!("[{}, {}]", -p.window, p.window)),
                    ("t", p.t_final.to_string()),
                    ("h", h0.to_string()),
                    ("nonlinearity", "F1".into()),
                    ("initial", "g2".into()),
                    ("scheme", "explicit".into()),
                    ("tau_rule", format!("auto, safety {}", p.safety)),
                    (
                        "reference",
                        if to_zero {
                            "-Id limit"
                        } else {
                            "Laplacian limit"
                        }
                        .into(),
                    ),
                ]),
                &rows,
            )?);
        }
        Preset::Exp4aTauH | Preset::Exp4aTauH2 => {
            let exact = ExactSolution::<f64>::linear_sigma1();
            let linear_tau = preset == Preset::Exp4aTauH;
            let mut rows = Vec::new();
            for &h in &p.h {
                let prob = one_term(line_grid(p.half_width, h)?, "g3", 1.0, "F3")?;
                let tau = if linear_tau { h } else { h * h };
                let mut cfg = SchemeConfig::new(Scheme::Explicit, p.t_final, TauRule::Fixed(tau));
                // τ = h lies outside the monotonicity region for σ = 1
                cfg.cfl_override = linear_tau;
                let tr = solve(prob, cfg)?;
                let e = relative_linf_error_exact(
                    tr.final_state(),
                    |x| exact.eval(x[0], p.t_final),
                    &window,
                )?;
                log::info!("h = {h}: error {e:e}");
                rows.push((h, e));
            }
            out.reports.push(ErrorReport::from_errors(
                meta(&[
                    ("experiment", preset.name().into()),
                    ("param", "h".into()),
                    ("domain", format!("[{}, {}]", -p.half_width, p.half_width)),
                    ("error_window", format!("[{}, {}]", -p.window, p.window)),
                    ("t", p.t_final.to_string()),
                    ("sigma", "1".into()),
                    ("nonlinearity", "F3".into()),
                    ("initial", "g3".into()),
                    ("scheme", "explicit".into()),
                    (
                        "tau_rule",
                        if linear_tau { "tau = h" } else { "tau = h^2" }.into(),
                    ),
                    ("reference", "exact solution (t+1)/((t+1)^2+x^2)".into()),
                ]),
                &rows,
            )?);
        }
        Preset::Exp4b => {
            let href = p
                .reference_h
                .ok_or_else(|| Error::invalid("reference_h", "exp4b needs a reference spacing"))?;
            let run = |h: f64| -> Result<Trajectory<f64>> {
                let prob = one_term(line_grid(p.half_width, h)?, "g3", 1.0, "F2")?;
                solve(
                    prob,
                    SchemeConfig::new(Scheme::Explicit, p.t_final, TauRule::Fixed(h * h)),
                )
            };
            let reference = run(href)?;
            let mut rows = Vec::new();
            for &h in &p.h {
                let tr = run(h)?;
                let e = relative_linf_error(tr.final_state(), reference.final_state(), &window)?;
                log::info!("h = {h}: error {e:e}");
                rows.push((h, e));
            }
            out.reports.push(ErrorReport::from_errors(
                meta(&[
                    ("experiment", preset.name().into()),
                    ("param", "h".into()),
                    ("domain", format!("[{}, {}]", -p.half_width, p.half_width)),
                    ("error_window", format!("[{}, {}]", -p.window, p.window)),
                    ("t", p.t_final.to_string()),
                    ("sigma", "1".into()),
                    ("nonlinearity", "F2".into()),
                    ("initial", "g3".into()),
                    ("scheme", "explicit".into()),
                    ("tau_rule", "tau = h^2".into()),
                    ("reference", format!("numerical, h = {href}")),
                ]),
                &rows,
            )?);
        }
    }
    Ok(out)
}

/// F1 along x and F2 along y, each with a 1-d operator of order σ, radial g1.
pub fn split_diffusion_2d(grid: Arc<Grid<f64>>, sigma: f64) -> Result<Problem<f64>> {
    let dim = grid.dim();
    Ok(Problem::new(grid, InitialData::builtin("g1_radial_2d")?)
        .with_term(
            DiffusionTerm::fractional(sigma, Nonlinearity::builtin("F1")?)
                .along(AxisMask::single(dim, 0)?),
        )
        .with_term(
            DiffusionTerm::fractional(sigma, Nonlinearity::builtin("F2")?)
                .along(AxisMask::single(dim, 1)?),
        ))
}
