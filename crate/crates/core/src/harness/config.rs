//! Plain-text run descriptions: one `key = value` per line, `#` comments.
//!
//! ```text
//! sigma = 0.5          # 0 and 2 select the -Id and Laplacian limits
//! h = 0.03125
//! domain = -20,20      # 2-d: -10,10; -10,10
//! scheme = explicit    # explicit | multidiffusion | theta | convection | isaacs
//! t_final = 0.5
//! nonlinearity = F1    # multidiffusion: one per axis, e.g. F1,F2
//! initial = g2
//! tau_rule = auto      # or `fixed` together with `tau = ...`
//! safety = 0.9
//! snapshot_times = 0.25, 0.5
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::grid::{AxisMask, Grid};
use crate::operator::Backend;
use crate::problem::{
    ControlledCoefficients, DiffusionTerm, Hamiltonian, InitialData, Nonlinearity, Order, Problem,
};
use crate::scalar::Real;
use crate::stepper::{Scheme, SchemeConfig, TauRule, ThetaCfl};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Domain(pub Vec<(f64, f64)>);

impl Domain {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        let axes = s
            .split(';')
            .map(|part| {
                let v: Vec<&str> = part.split(',').map(str::trim).collect();
                match v.as_slice() {
                    [a, b] => match (a.parse::<f64>(), b.parse::<f64>()) {
                        (Ok(a), Ok(b)) if a < b => Ok((a, b)),
                        _ => Err(format!("bad interval `{part}`")),
                    },
                    _ => Err(format!("interval `{part}` needs two numbers `a,b`")),
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Domain(axes))
    }

    fn render(&self) -> String {
        self.0
            .iter()
            .map(|(a, b)| format!("{a},{b}"))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauChoice {
    Auto { safety: f64 },
    Fixed(f64),
}

/// Everything a `solve` run needs, as read from a config file.
#[derive(Clone, Debug, PartialEq)]
pub struct RunDescription {
    pub sigma: f64,
    pub h: f64,
    pub domain: Domain,
    pub scheme: Scheme,
    pub t_final: f64,
    pub theta: f64,
    pub nonlinearity: Vec<String>,
    pub initial: String,
    pub tau: TauChoice,
    pub snapshot_times: Vec<f64>,
    pub radius: Option<usize>,
    pub theta_cfl: ThetaCfl,
    pub velocity: Vec<f64>,
    pub coefficients: Option<PathBuf>,
    pub bound: Option<f64>,
    pub cfl_override: bool,
    pub backend: Backend,
    pub fp_tolerance: f64,
    pub fp_max_iterations: usize,
}

const KEYS: &[&str] = &[
    "sigma",
    "h",
    "domain",
    "scheme",
    "t_final",
    "theta",
    "nonlinearity",
    "initial",
    "tau_rule",
    "tau",
    "safety",
    "snapshot_times",
    "radius",
    "theta_cfl",
    "velocity",
    "coefficients",
    "bound",
    "cfl_override",
    "backend",
    "fp_tolerance",
    "fp_max_iterations",
];

fn list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .collect()
}

/// Parses a config file's text.
pub fn parse_config(text: &str) -> Result<RunDescription> {
    let mut seen: Vec<(&'static str, String, usize)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(Error::Config {
            line: line_no,
            reason: format!("expected `key = value`, found `{line}`"),
        })?;
        let k = k.trim();
        let key = KEYS
            .iter()
            .find(|&&known| known == k)
            .ok_or(Error::Config {
                line: line_no,
                reason: format!("unknown key `{k}`"),
            })?;
        if seen.iter().any(|s| s.0 == *key) {
            return Err(Error::Config {
                line: line_no,
                reason: format!("key `{k}` given twice"),
            });
        }
        seen.push((key, v.trim().to_string(), line_no));
    }
    let get = |k: &str| seen.iter().find(|s| s.0 == k);
    let bad = |line: usize, reason: String| Error::Config { line, reason };
    let num = |k: &str| -> Result<Option<f64>> {
        match get(k) {
            None => Ok(None),
            Some((_, v, l)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| bad(*l, format!("`{k}` must be a number, got `{v}`"))),
        }
    };
    let required = |k: &str| -> Result<f64> {
        num(k)?.ok_or_else(|| bad(0, format!("missing mandatory key `{k}`")))
    };

    let sigma = required("sigma")?;
    let h = required("h")?;
    let t_final = required("t_final")?;
    let scheme = match get("scheme") {
        None => return Err(bad(0, "missing mandatory key `scheme`".into())),
        Some((_, v, l)) => Scheme::parse(v).map_err(|e| bad(*l, e.to_string()))?,
    };
    let domain = match get("domain") {
        None => Domain(vec![(-20.0, 20.0)]),
        Some((_, v, l)) => Domain::parse(v).map_err(|e| bad(*l, e))?,
    };
    let tau = match get("tau_rule").map(|s| (s.1.as_str(), s.2)) {
        None | Some(("auto", _)) => {
            if let Some((_, _, l)) = get("tau") {
                return Err(bad(*l, "`tau` needs `tau_rule = fixed`".into()));
            }
            TauChoice::Auto {
                safety: num("safety")?.unwrap_or(0.9),
            }
        }
        Some(("fixed", l)) => TauChoice::Fixed(
            num("tau")?.ok_or_else(|| bad(l, "`tau_rule = fixed` needs `tau`".into()))?,
        ),
        Some((other, l)) => {
            return Err(bad(
                l,
                format!("tau_rule must be auto or fixed, got `{other}`"),
            ))
        }
    };
    let floats = |k: &str| -> Result<Vec<f64>> {
        match get(k) {
            None => Ok(Vec::new()),
            Some((_, v, l)) => list(v)
                .into_iter()
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| bad(*l, format!("`{k}`: `{x}` is not a number")))
                })
                .collect(),
        }
    };
    let flag = |k: &str| -> Result<bool> {
        match get(k) {
            None => Ok(false),
            Some((_, v, l)) => v
                .parse::<bool>()
                .map_err(|_| bad(*l, format!("`{k}` must be true or false"))),
        }
    };
    let theta_cfl = match get("theta_cfl").map(|s| (s.1.as_str(), s.2)) {
        None | Some(("natural", _)) => ThetaCfl::Natural,
        Some(("squared", _)) => ThetaCfl::Squared,
        Some((o, l)) => {
            return Err(bad(
                l,
                format!("theta_cfl must be natural or squared, got `{o}`"),
            ))
        }
    };
    let backend = match get("backend").map(|s| (s.1.as_str(), s.2)) {
        None | Some(("auto", _)) => Backend::Auto,
        Some(("direct", _)) => Backend::Direct,
        Some(("fft", _)) => Backend::Fft,
        Some((o, l)) => {
            return Err(bad(
                l,
                format!("backend must be auto, direct or fft, got `{o}`"),
            ))
        }
    };
    let radius = match get("radius") {
        None => None,
        Some((_, v, l)) => Some(
            v.parse::<usize>()
                .map_err(|_| bad(*l, "`radius` must be a count".into()))?,
        ),
    };
    let fp_max_iterations = match get("fp_max_iterations") {
        None => 200,
        Some((_, v, l)) => v
            .parse::<usize>()
            .map_err(|_| bad(*l, "`fp_max_iterations` must be a count".into()))?,
    };

    let desc = RunDescription {
        sigma,
        h,
        domain,
        scheme,
        t_final,
        theta: num("theta")?.unwrap_or(0.0),
        nonlinearity: get("nonlinearity").map_or(vec!["F1".to_string()], |s| {
            list(&s.1).into_iter().map(String::from).collect()
        }),
        initial: get("initial").map_or("g2".to_string(), |s| s.1.clone()),
        tau,
        snapshot_times: floats("snapshot_times")?,
        radius,
        theta_cfl,
        velocity: floats("velocity")?,
        coefficients: get("coefficients").map(|s| PathBuf::from(&s.1)),
        bound: num("bound")?,
        cfl_override: flag("cfl_override")?,
        backend,
        fp_tolerance: num("fp_tolerance")?.unwrap_or(1e-12),
        fp_max_iterations,
    };
    Ok(desc)
}

impl RunDescription {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_config(&text)
    }

    /// Renders the description in the config format; parsing the result
    /// gives back an equal description.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let floats = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(s, "sigma = {}", self.sigma);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "domain = {}", self.domain.render());
        let _ = writeln!(s, "scheme = {}", self.scheme.name());
        let _ = writeln!(s, "t_final = {}", self.t_final);
        let _ = writeln!(s, "theta = {}", self.theta);
        let _ = writeln!(s, "nonlinearity = {}", self.nonlinearity.join(", "));
        let _ = writeln!(s, "initial = {}", self.initial);
        match self.tau {
            TauChoice::Auto { safety } => {
                let _ = writeln!(s, "tau_rule = auto\nsafety = {safety}");
            }
            TauChoice::Fixed(tau) => {
                let _ = writeln!(s, "tau_rule = fixed\ntau = {tau}");
            }
        }
        if !self.snapshot_times.is_empty() {
            let _ = writeln!(s, "snapshot_times = {}", floats(&self.snapshot_times));
        }
        if let Some(r) = self.radius {
            let _ = writeln!(s, "radius = {r}");
        }
        let _ = writeln!(
            s,
            "theta_cfl = {}",
            match self.theta_cfl {
                ThetaCfl::Natural => "natural",
                ThetaCfl::Squared => "squared",
            }
        );
        if !self.velocity.is_empty() {
            let _ = writeln!(s, "velocity = {}", floats(&self.velocity));
        }
        if let Some(p) = &self.coefficients {
            let _ = writeln!(s, "coefficients = {}", p.display());
        }
        if let Some(k) = self.bound {
            let _ = writeln!(s, "bound = {k}");
        }
        let _ = writeln!(s, "cfl_override = {}", self.cfl_override);
        let _ = writeln!(
            s,
            "backend = {}",
            match self.backend {
                Backend::Auto => "auto",
                Backend::Direct => "direct",
                Backend::Fft => "fft",
            }
        );
        let _ = writeln!(s, "fp_tolerance = {}", self.fp_tolerance);
        let _ = writeln!(s, "fp_max_iterations = {}", self.fp_max_iterations);
        s
    }

    fn order<T: Real>(&self) -> Result<Order<T>> {
        if self.sigma == 0.0 {
            Ok(Order::NegIdentity)
        } else if self.sigma == 2.0 {
            Ok(Order::Laplacian)
        } else if self.sigma > 0.0 && self.sigma < 2.0 {
            Ok(Order::Fractional(T::lit(self.sigma)))
        } else {
            Err(Error::invalid(
                "sigma",
                format!("order must lie in [0, 2], got {}", self.sigma),
            ))
        }
    }

    /// Assembles the problem and the scheme configuration.
    pub fn build<T: Real>(&self) -> Result<(Problem<T>, SchemeConfig<T>)> {
        let bounds: Vec<(T, T)> = self
            .domain
            .0
            .iter()
            .map(|&(a, b)| (T::lit(a), T::lit(b)))
            .collect();
        let grid = Arc::new(Grid::new(&bounds, T::lit(self.h))?);
        let dim = grid.dim();
        let mut problem = Problem::new(grid.clone(), InitialData::builtin(&self.initial)?);
        let order = self.order::<T>()?;
        let with_radius = |t: DiffusionTerm<T>| match self.radius {
            Some(r) => t.with_radius(r),
            None => t,
        };
        let term = |f: &str| -> Result<DiffusionTerm<T>> {
            Ok(with_radius(DiffusionTerm {
                order,
                mask: None,
                nonlinearity: Nonlinearity::builtin(f)?,
                radius: None,
            }))
        };
        match self.scheme {
            Scheme::MultiDiffusion => {
                if self.nonlinearity.len() != dim {
                    return Err(Error::invalid(
                        "nonlinearity",
                        format!("multidiffusion needs one nonlinearity per axis ({dim})"),
                    ));
                }
                for (k, f) in self.nonlinearity.iter().enumerate() {
                    problem = problem.with_term(term(f)?.along(AxisMask::single(dim, k)?));
                }
            }
            _ => {
                if self.nonlinearity.len() != 1 {
                    return Err(Error::invalid(
                        "nonlinearity",
                        "this scheme takes one nonlinearity",
                    ));
                }
                problem = problem.with_term(term(&self.nonlinearity[0])?);
            }
        }
        if self.scheme == Scheme::Convection {
            let v: Vec<T> = if self.velocity.is_empty() {
                vec![T::one(); dim]
            } else if self.velocity.len() == dim {
                self.velocity.iter().map(|&x| T::lit(x)).collect()
            } else {
                return Err(Error::invalid("velocity", format!("need {dim} components")));
            };
            problem = problem.with_hamiltonian(Hamiltonian::transport(&v));
        }
        if self.scheme == Scheme::Isaacs {
            let path = self.coefficients.as_ref().ok_or_else(|| {
                Error::invalid("coefficients", "the isaacs scheme needs a coefficient CSV")
            })?;
            let k = self.bound.ok_or_else(|| {
                Error::invalid("bound", "the isaacs scheme needs the coefficient bound K")
            })?;
            problem =
                problem.with_controls(ControlledCoefficients::from_csv(path, &grid, T::lit(k))?);
        }
        let tau = match self.tau {
            TauChoice::Auto { safety } => TauRule::Auto {
                safety: T::lit(safety),
            },
            TauChoice::Fixed(t) => TauRule::Fixed(T::lit(t)),
        };
        let mut cfg = SchemeConfig::new(self.scheme, T::lit(self.t_final), tau);
        cfg.theta = T::lit(self.theta);
        cfg.fp_tolerance = T::lit(self.fp_tolerance);
        cfg.fp_max_iterations = self.fp_max_iterations;
        cfg.cfl_override = self.cfl_override;
        cfg.theta_cfl = self.theta_cfl;
        cfg.snapshot_times = self.snapshot_times.iter().map(|&t| T::lit(t)).collect();
        cfg.backend = self.backend;
        Ok((problem, cfg))
    }
}
