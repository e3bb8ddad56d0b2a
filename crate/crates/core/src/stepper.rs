//! Monotone time stepping: explicit, θ-scheme, convection–diffusion and
//! Isaacs (min–max over controls), with CFL bounds and an inline L∞ check.

use std::sync::Arc;

use rayon::prelude::*;

use crate::grid::{Grid, GridFunction};
use crate::operator::{neighbour, second_difference_sum, Backend, FractionalOperator};
use crate::problem::{Order, Problem};
use crate::scalar::{sup_norm, Real};
use crate::weights::{laplacian_table, neg_identity_table, weights_1d, weights_nd, WeightTable};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Forward Euler on F(L U) + f.
    Explicit,
    /// Forward Euler on Σ_k F_k(L_k U) + f, typically one term per axis.
    MultiDiffusion,
    Theta,
    Convection,
    Isaacs,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Scheme::Explicit),
            "multidiffusion" => Ok(Scheme::MultiDiffusion),
            "theta" => Ok(Scheme::Theta),
            "convection" => Ok(Scheme::Convection),
            "isaacs" => Ok(Scheme::Isaacs),
            other => Err(Error::invalid(
                "scheme",
                format!("unknown scheme `{other}` (explicit, multidiffusion, theta, convection, isaacs)"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Explicit => "explicit",
            Scheme::MultiDiffusion => "multidiffusion",
            Scheme::Theta => "theta",
            Scheme::Convection => "convection",
            Scheme::Isaacs => "isaacs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauRule<T> {
    /// Requested step; shrunk so that it divides t_final.
    Fixed(T),
    /// `safety` times the CFL bound, shrunk to divide t_final.
    Auto { safety: T },
}

/// Which right-hand side the θ-scheme CFL condition uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ThetaCfl {
    /// (1−θ)τ ≤ h^σ/(L_F C), what monotonicity of the explicit part needs.
    #[default]
    Natural,
    /// (1−θ)τ ≤ h^{2σ}/(L_F C); stricter for h < 1.
    Squared,
}

#[derive(Clone, Debug)]
pub struct SchemeConfig<T> {
    pub scheme: Scheme,
    pub theta: T,
    pub t_final: T,
    pub tau: TauRule<T>,
    /// Fixed-point residual tolerance, relative to max(1, ‖Uⁿ‖).
    pub fp_tolerance: T,
    pub fp_max_iterations: usize,
    /// Run even if τ exceeds the CFL bound (no stability check then).
    pub cfl_override: bool,
    pub theta_cfl: ThetaCfl,
    /// Times at which to keep the solution; t_final is always kept.
    pub snapshot_times: Vec<T>,
    pub backend: Backend,
    pub check_stability: bool,
}

impl<T: Real> SchemeConfig<T> {
    pub fn new(scheme: Scheme, t_final: T, tau: TauRule<T>) -> Self {
        SchemeConfig {
            scheme,
            theta: T::zero(),
            t_final,
            tau,
            fp_tolerance: T::lit(1e-12),
            fp_max_iterations: 200,
            cfl_override: false,
            theta_cfl: ThetaCfl::Natural,
            snapshot_times: Vec::new(),
            backend: Backend::Auto,
            check_stability: true,
        }
    }
}

// ---------------------------------------------------------------- CFL bounds
//
// Every bound takes the constant C the weight table actually realises
// (h^σ × diagonal mass), so truncation never loosens it.  `None` means no
// restriction (a zero denominator).

fn ratio<T: Real>(num: T, den: T) -> Option<T> {
    (den > T::zero()).then(|| num / den)
}

/// τ ≤ h^σ / (L_F C).
pub fn cfl_explicit<T: Real>(h: T, sigma: T, lf: T, c: T) -> Option<T> {
    ratio(h.powf(sigma), lf * c)
}

/// τ ≤ 1 / (2 L_H / h + L_F C / h^σ), L_H = Σ_k ‖∂_k H‖.
pub fn cfl_convection<T: Real>(h: T, sigma: T, lf: T, c: T, lh: T) -> Option<T> {
    ratio(T::one(), T::lit(2.0) * lh / h + lf * c / h.powf(sigma))
}

/// Per-term rule: τ ≤ min_k h^{σ_k} / (L_k C_k), terms given as (σ, L, C).
///
/// Each term alone is monotone under it; the sum of several need not be,
/// which is why [`cfl_multidiffusion_sum`] is what the solver enforces.
pub fn cfl_multidiffusion<T: Real>(h: T, terms: &[(T, T, T)]) -> Option<T> {
    terms
        .iter()
        .filter_map(|&(s, l, c)| cfl_explicit(h, s, l, c))
        .fold(None, |m: Option<T>, b| Some(m.map_or(b, |m| m.min(b))))
}

/// τ ≤ 1 / Σ_k L_k C_k / h^{σ_k}, monotone for any number of terms.
pub fn cfl_multidiffusion_sum<T: Real>(h: T, terms: &[(T, T, T)]) -> Option<T> {
    let den = terms
        .iter()
        .fold(T::zero(), |acc, &(s, l, c)| acc + l * c / h.powf(s));
    ratio(T::one(), den)
}

/// τ ≤ 1 / (K (N/h + C/h^σ + 1)).
pub fn cfl_isaacs<T: Real>(h: T, sigma: T, c: T, k: T, dim: usize) -> Option<T> {
    ratio(
        T::one(),
        k * (T::of_usize(dim) / h + c / h.powf(sigma) + T::one()),
    )
}

/// (1−θ) τ ≤ h^σ/(L_F C), or h^{2σ}/(L_F C) with [`ThetaCfl::Squared`].
pub fn cfl_theta<T: Real>(h: T, sigma: T, lf: T, c: T, theta: T, rule: ThetaCfl) -> Option<T> {
    let e = match rule {
        ThetaCfl::Natural => sigma,
        ThetaCfl::Squared => T::lit(2.0) * sigma,
    };
    ratio(h.powf(e), (T::one() - theta) * lf * c)
}

// ---------------------------------------------------------------- solver

struct Term<T: Real> {
    op: FractionalOperator<T>,
    f: crate::problem::Nonlinearity<T>,
}

impl<T: Real> Term<T> {
    fn lipschitz_mass(&self) -> T {
        self.f.lipschitz() * self.op.table().diagonal_mass()
    }
}

/// Builds the operator table for a term: full grid width unless a radius is
/// given.
fn term_table<T: Real>(
    order: Order<T>,
    grid: &Grid<T>,
    axes: &[usize],
    radius: Option<usize>,
) -> Result<WeightTable<T>> {
    let h = grid.h();
    let m = axes.len();
    match order {
        Order::Laplacian => laplacian_table(h, m),
        Order::NegIdentity => neg_identity_table(h, m),
        Order::Fractional(sigma) => {
            let width = axes
                .iter()
                .map(|&k| grid.shape()[k] - 1)
                .max()
                .unwrap_or(1)
                .max(1);
            let r = radius.unwrap_or(width);
            if m == 1 {
                weights_1d(sigma, h, r)
            } else {
                weights_nd(sigma, h, m, r)
            }
        }
    }
}

/// Result of a run.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub tau: T,
    pub steps: usize,
    /// The bound τ was checked against; `None` when unrestricted.
    pub cfl_bound: Option<T>,
    /// (t, U) at the requested times and at t_final.
    pub snapshots: Vec<(T, GridFunction<T>)>,
    /// ‖Uⁿ‖_∞ for n = 0..=steps.
    pub sup_norms: Vec<T>,
    /// Largest scaled fixed-point residual over accepted θ-steps.
    pub max_fp_residual: T,
    pub max_fp_iterations: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &GridFunction<T> {
        &self.snapshots.last().expect("final snapshot").1
    }

    /// Snapshot closest to time `t`.
    pub fn at(&self, t: T) -> &GridFunction<T> {
        &self
            .snapshots
            .iter()
            .min_by(|a, b| (a.0 - t).abs().partial_cmp(&(b.0 - t).abs()).unwrap())
            .expect("at least one snapshot")
            .1
    }
}

/// A problem prepared for time stepping: operators built, τ fixed.
pub struct Solver<T: Real> {
    grid: Arc<Grid<T>>,
    points: Vec<T>,
    terms: Vec<Term<T>>,
    problem: Problem<T>,
    config: SchemeConfig<T>,
    tau: T,
    steps: usize,
    cfl_bound: Option<T>,
    viscosity: Vec<T>,
}

impl<T: Real> Solver<T> {
    pub fn new(problem: Problem<T>, config: SchemeConfig<T>) -> Result<Self> {
        let grid = problem.grid.clone();
        let dim = grid.dim();
        if !(config.t_final > T::zero() && config.t_final.is_finite()) {
            return Err(Error::invalid("t_final", "final time must be positive"));
        }
        if !(config.theta >= T::zero() && config.theta <= T::one()) {
            return Err(Error::invalid("theta", "θ must lie in [0, 1]"));
        }
        if !(config.fp_tolerance > T::zero() && config.fp_tolerance.is_finite()) {
            return Err(Error::invalid("fp_tolerance", "tolerance must be positive"));
        }
        let mut terms = Vec::with_capacity(problem.terms.len());
        for t in &problem.terms {
            if let Some(m) = &t.mask {
                if m.dim() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "term mask has {} axes, grid has {dim}",
                        m.dim()
                    )));
                }
            }
            let axes = t
                .mask
                .as_ref()
                .map_or_else(|| (0..dim).collect(), |m| m.axes());
            let table = term_table(t.order, &grid, &axes, t.radius)?;
            let op = FractionalOperator::new(table, grid.clone(), t.mask.as_ref(), config.backend)?;
            terms.push(Term {
                op,
                f: t.nonlinearity.clone(),
            });
        }

        let h = grid.h();
        let summary = |t: &Term<T>| {
            (
                t.op.table().sigma(),
                t.f.lipschitz(),
                t.op.table().realised_constant(),
            )
        };
        let mut viscosity = vec![T::zero(); dim];
        let cfl_bound = match config.scheme {
            Scheme::Explicit | Scheme::MultiDiffusion => {
                if terms.is_empty() {
                    return Err(Error::invalid(
                        "terms",
                        "the explicit scheme needs a diffusion term",
                    ));
                }
                let spec: Vec<_> = terms.iter().map(summary).collect();
                if spec.len() > 1 {
                    if let (Some(lit), Some(sum)) = (
                        cfl_multidiffusion(h, &spec),
                        cfl_multidiffusion_sum(h, &spec),
                    ) {
                        log::debug!("multi-diffusion CFL: per-term {lit:e}, enforced {sum:e}");
                    }
                }
                cfl_multidiffusion_sum(h, &spec)
            }
            Scheme::Theta => {
                if terms.is_empty() {
                    return Err(Error::invalid(
                        "terms",
                        "the θ-scheme needs a diffusion term",
                    ));
                }
                let den = terms.iter().fold(T::zero(), |a, t| a + t.lipschitz_mass());
                let one_minus = T::one() - config.theta;
                match (terms.len(), config.theta_cfl) {
                    (1, rule) => {
                        let (s, l, c) = summary(&terms[0]);
                        cfl_theta(h, s, l, c, config.theta, rule)
                    }
                    _ => ratio(T::one(), one_minus * den),
                }
            }
            Scheme::Convection => {
                let ham = problem.hamiltonian.as_ref().ok_or_else(|| {
                    Error::invalid("hamiltonian", "the convection scheme needs H")
                })?;
                if ham.dim() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "H has {} components, grid has {dim} axes",
                        ham.dim()
                    )));
                }
                viscosity = ham.viscosity();
                let spec: Vec<_> = terms.iter().map(summary).collect();
                let diff = cfl_multidiffusion_sum(h, &spec).map_or(T::zero(), |b| T::one() / b);
                ratio(T::one(), T::lit(2.0) * ham.lipschitz() / h + diff)
            }
            Scheme::Isaacs => {
                let controls = problem.controls.as_ref().ok_or_else(|| {
                    Error::invalid("controls", "the Isaacs scheme needs coefficients")
                })?;
                if terms.len() != 1 {
                    return Err(Error::invalid(
                        "terms",
                        "the Isaacs scheme takes exactly one operator",
                    ));
                }
                if controls.dim() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "drift has {} components, grid has {dim} axes",
                        controls.dim()
                    )));
                }
                controls.check(&grid, T::zero())?;
                let (s, _, c) = summary(&terms[0]);
                cfl_isaacs(h, s, c, controls.bound(), dim)
            }
        };

        let t_final = config.t_final;
        let steps_for = |tau: T| -> usize {
            let m = (t_final / tau - T::lit(1e-9))
                .ceil()
                .to_usize()
                .unwrap_or(usize::MAX);
            m.max(1)
        };
        let steps = match config.tau {
            TauRule::Fixed(tau) => {
                if !(tau > T::zero() && tau.is_finite()) {
                    return Err(Error::invalid("tau", "time step must be positive"));
                }
                steps_for(tau)
            }
            TauRule::Auto { safety } => {
                if !(safety > T::zero() && safety <= T::one()) {
                    return Err(Error::invalid("safety", "safety factor must lie in (0, 1]"));
                }
                let bound = cfl_bound.ok_or_else(|| {
                    Error::invalid(
                        "tau",
                        "automatic τ needs a finite CFL bound; give τ explicitly",
                    )
                })?;
                steps_for(safety * bound)
            }
        };
        let tau = t_final / T::of_usize(steps);
        if let Some(bound) = cfl_bound {
            if tau > bound * (T::one() + T::lit(1e-12)) {
                if config.cfl_override {
                    log::warn!("τ = {tau:e} exceeds the CFL bound {bound:e}; monotonicity is not guaranteed");
                } else {
                    return Err(Error::CflViolation {
                        tau: tau.as_f64(),
                        bound: bound.as_f64(),
                    });
                }
            }
        }
        log::info!(
            "{} scheme: {} points, τ = {tau:e}, {steps} steps, CFL bound {:?}",
            config.scheme.name(),
            grid.len(),
            cfl_bound.map(|b| b.as_f64())
        );

        let points = (0..grid.len()).flat_map(|f| grid.point(f)).collect();
        Ok(Solver {
            grid,
            points,
            terms,
            problem,
            config,
            tau,
            steps,
            cfl_bound,
            viscosity,
        })
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn cfl_bound(&self) -> Option<T> {
        self.cfl_bound
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    /// Whether the run is inside the regime where the L∞ bound is proven.
    fn within_cfl(&self) -> bool {
        self.cfl_bound
            .is_none_or(|b| self.tau <= b * (T::one() + T::lit(1e-12)))
    }

    fn point(&self, f: usize) -> &[T] {
        let d = self.grid.dim();
        &self.points[f * d..(f + 1) * d]
    }

    fn source(&self, t: T) -> Option<Vec<T>> {
        self.problem.source.as_ref().map(|src| {
            (0..self.grid.len())
                .into_par_iter()
                .map(|f| src(self.point(f), t))
                .collect()
        })
    }

    fn apply_terms(&self, values: &[T]) -> Vec<Vec<T>> {
        self.terms
            .iter()
            .map(|term| {
                let mut out = vec![T::zero(); values.len()];
                term.op.apply(values, &mut out);
                out
            })
            .collect()
    }

    /// Uⁿ⁺¹ = Uⁿ + τ [Σ_k F_k(L_k Uⁿ) + fⁿ].
    pub fn step_explicit(&self, u: &[T], t: T) -> Vec<T> {
        let lu = self.apply_terms(u);
        let src = self.source(t);
        let tau = self.tau;
        (0..u.len())
            .into_par_iter()
            .map(|i| {
                let mut rhs = T::zero();
                for (term, l) in self.terms.iter().zip(&lu) {
                    rhs = rhs + term.f.eval(l[i]);
                }
                if let Some(s) = &src {
                    rhs = rhs + s[i];
                }
                u[i] + tau * rhs
            })
            .collect()
    }

    /// Uⁿ⁺¹ = Uⁿ + τ [Σ_k F_k((1−θ) L_k Uⁿ + θ L_k Uⁿ⁺¹) + fⁿ].
    ///
    /// Solved by damped fixed-point iteration V ← V + ω (G(V) − V) with
    /// ω = 1/(1+q), q = θ τ Σ_k L_k D_k.  Monotonicity of F makes the damped
    /// map a contraction with factor q/(1+q) in the sup norm.  θ = 0 is
    /// exactly the explicit step.  Returns the state, the scaled residual
    /// and the iteration count.
    pub fn step_theta(&self, u: &[T], t: T, step: usize) -> Result<(Vec<T>, T, usize)> {
        let theta = self.config.theta;
        if theta == T::zero() {
            return Ok((self.step_explicit(u, t), T::zero(), 0));
        }
        let tau = self.tau;
        let one_minus = T::one() - theta;
        let explicit_part: Vec<Vec<T>> = self
            .apply_terms(u)
            .into_iter()
            .map(|l| l.into_iter().map(|v| one_minus * v).collect())
            .collect();
        let src = self.source(t);
        let q = theta
            * tau
            * self
                .terms
                .iter()
                .fold(T::zero(), |a, term| a + term.lipschitz_mass());
        let omega = T::one() / (T::one() + q);
        let scale = T::one().max(sup_norm(u));
        let tol = self.config.fp_tolerance;
        // the contraction factor fixes how many sweeps can be needed
        let rate = (q / (T::one() + q)).as_f64();
        let needed = if rate > 0.0 {
            ((tol.as_f64() / 10.0).ln() / rate.ln()).ceil().min(1e7) as usize + 10
        } else {
            1
        };
        let max_iter = self.config.fp_max_iterations.max(needed);

        let mut v = u.to_vec();
        let mut residual = T::infinity();
        for it in 1..=max_iter {
            let lv = self.apply_terms(&v);
            let g: Vec<T> = (0..u.len())
                .into_par_iter()
                .map(|i| {
                    let mut rhs = T::zero();
                    for ((term, e), l) in self.terms.iter().zip(&explicit_part).zip(&lv) {
                        rhs = rhs + term.f.eval(e[i] + theta * l[i]);
                    }
                    if let Some(s) = &src {
                        rhs = rhs + s[i];
                    }
                    u[i] + tau * rhs
                })
                .collect();
            residual = g
                .iter()
                .zip(&v)
                .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
                / scale;
            if !residual.is_finite() {
                return Err(Error::NonFinite { step });
            }
            if residual <= tol {
                return Ok((v, residual, it));
            }
            v.iter_mut()
                .zip(&g)
                .for_each(|(x, y)| *x = *x + omega * (*y - *x));
        }
        Err(Error::FixedPoint {
            step,
            residual: residual.as_f64(),
            iterations: max_iter,
        })
    }

    /// Uⁿ⁺¹ = Uⁿ + τ [Σ_k F_k(L_k Uⁿ) − H(∇_c Uⁿ) + h Σ_k L_H^k δ_k² Uⁿ / h² + fⁿ],
    /// central gradient with Lax–Friedrichs viscosity L_H^k = ‖∂_k H‖/2.
    pub fn step_convection(&self, u: &[T], t: T) -> Vec<T> {
        let ham = self.problem.hamiltonian.as_ref().expect("checked in new");
        let lu = self.apply_terms(u);
        let src = self.source(t);
        let grid = &*self.grid;
        let (tau, h) = (self.tau, grid.h());
        let two_h = T::lit(2.0) * h;
        (0..u.len())
            .into_par_iter()
            .map_init(
                || vec![T::zero(); grid.dim()],
                |p, i| {
                    for (k, pk) in p.iter_mut().enumerate() {
                        *pk = (neighbour(grid, u, i, k, true) - neighbour(grid, u, i, k, false))
                            / two_h;
                    }
                    let mut rhs =
                        h * second_difference_sum(grid, u, i, &self.viscosity) - ham.eval(p);
                    for (term, l) in self.terms.iter().zip(&lu) {
                        rhs = rhs + term.f.eval(l[i]);
                    }
                    if let Some(s) = &src {
                        rhs = rhs + s[i];
                    }
                    u[i] + tau * rhs
                },
            )
            .collect()
    }

    /// Uⁿ⁺¹ = Uⁿ + τ inf_β sup_α {f − cU + a L U + Σ_k b_k⁺ D_k⁺U + b_k⁻ D_k⁻U}.
    ///
    /// D⁻ is the backward difference and b⁻ = min(b, 0), so every neighbour
    /// enters with a nonnegative coefficient.  Also returns sup |f| over the
    /// controls, which the stability bound needs.
    pub fn step_isaacs(&self, u: &[T], t: T) -> (Vec<T>, T) {
        let controls = self.problem.controls.as_ref().expect("checked in new");
        let lu = self.apply_terms(u);
        let lu = &lu[0];
        let grid = &*self.grid;
        let tau = self.tau;
        let h = grid.h();
        let out: Vec<(T, T)> = (0..u.len())
            .into_par_iter()
            .map(|i| {
                let x = self.point(i);
                let mut fmax = T::zero();
                let mut inf = T::infinity();
                for b in 0..controls.n_beta() {
                    let mut sup = T::neg_infinity();
                    for a in 0..controls.n_alpha() {
                        let c = controls.eval(a, b, i, x, t);
                        fmax = fmax.max(c.f.abs());
                        let mut v = c.f - c.c * u[i] + c.a * lu[i];
                        for (k, &bk) in c.b.iter().enumerate() {
                            if bk > T::zero() {
                                v = v + bk * (neighbour(grid, u, i, k, true) - u[i]) / h;
                            } else if bk < T::zero() {
                                v = v + bk * (u[i] - neighbour(grid, u, i, k, false)) / h;
                            }
                        }
                        sup = sup.max(v);
                    }
                    inf = inf.min(sup);
                }
                (u[i] + tau * inf, fmax)
            })
            .collect();
        let fmax = out.iter().fold(T::zero(), |m, p| m.max(p.1));
        (out.into_iter().map(|p| p.0).collect(), fmax)
    }

    /// Growth allowed per unit time by the L∞ estimate, excluding the source.
    fn zero_forcing(&self) -> T {
        let mut g = self
            .terms
            .iter()
            .fold(T::zero(), |a, t| a + t.f.at_zero().abs());
        if self.config.scheme == Scheme::Convection {
            let ham = self.problem.hamiltonian.as_ref().expect("checked in new");
            g = g + ham.eval(&vec![T::zero(); self.grid.dim()]).abs();
        }
        g
    }

    pub fn run(&self) -> Result<Trajectory<T>> {
        let u0 = GridFunction::sample(self.grid.clone(), |x| self.problem.initial.eval(x));
        self.run_from(u0.into_values())
    }

    /// Runs from given initial values.
    pub fn run_from(&self, initial: Vec<T>) -> Result<Trajectory<T>> {
        if initial.len() != self.grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} initial values for {} grid points",
                initial.len(),
                self.grid.len()
            )));
        }
        if initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: 0 });
        }
        let tau = self.tau;
        let mut keep: Vec<usize> = self
            .config
            .snapshot_times
            .iter()
            .filter(|&&s| s >= T::zero() && s <= self.config.t_final * (T::one() + T::lit(1e-12)))
            .map(|&s| (s / tau).round().to_usize().unwrap_or(0).min(self.steps))
            .collect();
        keep.push(self.steps);
        keep.sort_unstable();
        keep.dedup();

        let check = self.config.check_stability && self.within_cfl();
        let forcing = self.zero_forcing();
        let mut u = initial;
        let mut bound = sup_norm(&u);
        let mut sup_norms = Vec::with_capacity(self.steps + 1);
        sup_norms.push(bound);
        let mut snapshots = Vec::with_capacity(keep.len());
        let mut next_keep = 0;
        if keep[0] == 0 {
            snapshots.push((
                T::zero(),
                GridFunction::from_parts_unchecked(self.grid.clone(), u.clone()),
            ));
            next_keep = 1;
        }
        let mut max_res = T::zero();
        let mut max_it = 0;

        for n in 0..self.steps {
            let t = T::of_usize(n) * tau;
            let step = n + 1;
            let (next, fmax) = match self.config.scheme {
                Scheme::Explicit | Scheme::MultiDiffusion => (self.step_explicit(&u, t), None),
                Scheme::Theta => {
                    let (v, r, it) = self.step_theta(&u, t, step)?;
                    max_res = max_res.max(r);
                    max_it = max_it.max(it);
                    (v, None)
                }
                Scheme::Convection => (self.step_convection(&u, t), None),
                Scheme::Isaacs => {
                    let (v, f) = self.step_isaacs(&u, t);
                    (v, Some(f))
                }
            };
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step });
            }
            let norm = sup_norm(&next);
            if check {
                let f_sup = match fmax {
                    Some(f) => f,
                    None => self.source(t).map_or(T::zero(), |s| sup_norm(&s)),
                };
                bound = bound + tau * (forcing + f_sup);
                let slack = T::lit(1e-12) * T::one().max(bound);
                if norm > bound + slack {
                    return Err(Error::Stability {
                        step,
                        norm: norm.as_f64(),
                        bound: bound.as_f64(),
                    });
                }
            }
            sup_norms.push(norm);
            u = next;
            if next_keep < keep.len() && keep[next_keep] == step {
                let time = if step == self.steps {
                    self.config.t_final
                } else {
                    T::of_usize(step) * tau
                };
                snapshots.push((
                    time,
                    GridFunction::from_parts_unchecked(self.grid.clone(), u.clone()),
                ));
                next_keep += 1;
            }
        }
        Ok(Trajectory {
            tau,
            steps: self.steps,
            cfl_bound: self.cfl_bound,
            snapshots,
            sup_norms,
            max_fp_residual: max_res,
            max_fp_iterations: max_it,
        })
    }
}

/// Builds a [`Solver`] and runs it from the problem's initial data.
pub fn solve<T: Real>(problem: Problem<T>, config: SchemeConfig<T>) -> Result<Trajectory<T>> {
    Solver::new(problem, config)?.run()
}
