//! Ingredients of a problem: nonlinearities, Hamiltonians, controlled
//! coefficients, initial data and known exact solutions.
//!
//! Constants the CFL conditions need (L_F, ‖∂_k H‖, K) are declared with the
//! object, never estimated at run time.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::grid::{AxisMask, Grid};
use crate::scalar::Real;
use crate::{Error, Result};

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type VectorFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type SourceFn<T> = Arc<dyn Fn(&[T], T) -> T + Send + Sync>;

/// Nondecreasing Lipschitz F with F(l₁) − F(l₂) ≤ L_F (l₁ − l₂)⁺.
#[derive(Clone)]
pub struct Nonlinearity<T> {
    name: String,
    f: ScalarFn<T>,
    lipschitz: T,
    at_zero: T,
}

impl<T: Real> Nonlinearity<T> {
    /// `F1` = max(0, l), `F2` = max(l/2, l), `F3` = l.
    pub fn builtin(name: &str) -> Result<Self> {
        let half = T::lit(0.5);
        let f: ScalarFn<T> = match name {
            "F1" => Arc::new(|l: T| l.max(T::zero())),
            "F2" => Arc::new(move |l: T| l.max(half * l)),
            "F3" => Arc::new(|l: T| l),
            other => {
                return Err(Error::invalid(
                    "nonlinearity",
                    format!("unknown nonlinearity `{other}` (expected F1, F2 or F3)"),
                ))
            }
        };
        Ok(Nonlinearity {
            name: name.to_string(),
            f,
            lipschitz: T::one(),
            at_zero: T::zero(),
        })
    }

    /// User-supplied F; the caller vouches for monotonicity and `lipschitz`.
    pub fn custom(
        name: &str,
        lipschitz: T,
        f: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lipschitz > T::zero() && lipschitz.is_finite()) {
            return Err(Error::invalid(
                "lipschitz",
                "L_F must be positive and finite",
            ));
        }
        let at_zero = f(T::zero());
        Ok(Nonlinearity {
            name: name.to_string(),
            f: Arc::new(f),
            lipschitz,
            at_zero,
        })
    }

    #[inline]
    pub fn eval(&self, l: T) -> T {
        (self.f)(l)
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    pub fn at_zero(&self) -> T {
        self.at_zero
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl<T> fmt::Debug for Nonlinearity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonlinearity({})", self.name)
    }
}

/// H(p) with per-axis bounds ‖∂_k H‖_∞.
#[derive(Clone)]
pub struct Hamiltonian<T> {
    name: String,
    h: VectorFn<T>,
    axis_lipschitz: Vec<T>,
}

impl<T: Real> Hamiltonian<T> {
    /// Linear transport H(p) = v · p.
    pub fn transport(velocity: &[T]) -> Self {
        let v = velocity.to_vec();
        let axis_lipschitz = v.iter().map(|c| c.abs()).collect();
        Hamiltonian {
            name: "transport".into(),
            h: Arc::new(move |p: &[T]| {
                p.iter()
                    .zip(&v)
                    .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
            }),
            axis_lipschitz,
        }
    }

    pub fn custom(
        name: &str,
        axis_lipschitz: Vec<T>,
        h: impl Fn(&[T]) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if axis_lipschitz
            .iter()
            .any(|l| !(*l >= T::zero() && l.is_finite()))
        {
            return Err(Error::invalid(
                "lipschitz",
                "axis bounds must be finite and >= 0",
            ));
        }
        Ok(Hamiltonian {
            name: name.into(),
            h: Arc::new(h),
            axis_lipschitz,
        })
    }

    #[inline]
    pub fn eval(&self, p: &[T]) -> T {
        (self.h)(p)
    }

    pub fn dim(&self) -> usize {
        self.axis_lipschitz.len()
    }

    /// ‖∂_k H‖_∞ per axis.
    pub fn axis_lipschitz(&self) -> &[T] {
        &self.axis_lipschitz
    }

    /// Global Lipschitz bound Σ_k ‖∂_k H‖_∞.
    pub fn lipschitz(&self) -> T {
        self.axis_lipschitz.iter().fold(T::zero(), |a, &b| a + b)
    }

    /// Lax–Friedrichs viscosity constants ‖∂_k H‖_∞ / 2.
    pub fn viscosity(&self) -> Vec<T> {
        self.axis_lipschitz
            .iter()
            .map(|&l| l * T::lit(0.5))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl<T> fmt::Debug for Hamiltonian<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hamiltonian({})", self.name)
    }
}

/// Coefficients of one control pair at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients<T> {
    pub a: T,
    pub b: Vec<T>,
    pub c: T,
    pub f: T,
}

type CoefficientFn<T> = Arc<dyn Fn(usize, usize, usize, &[T], T) -> Coefficients<T> + Send + Sync>;

/// a^{αβ}, b^{αβ}, c^{αβ}, f^{αβ} over finite control sets A × B.
///
/// Evaluated as `eval(alpha, beta, node, x, t)`; `node` is the flat grid
/// index, which lets tabulated coefficients skip any geometry lookup.
#[derive(Clone)]
pub struct ControlledCoefficients<T> {
    n_alpha: usize,
    n_beta: usize,
    dim: usize,
    bound: T,
    eval: CoefficientFn<T>,
}

impl<T: Real> ControlledCoefficients<T> {
    pub fn new(
        n_alpha: usize,
        n_beta: usize,
        dim: usize,
        bound: T,
        eval: impl Fn(usize, usize, usize, &[T], T) -> Coefficients<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        if n_alpha == 0 || n_beta == 0 {
            return Err(Error::EmptyControls);
        }
        if !(bound > T::zero() && bound.is_finite()) {
            return Err(Error::invalid("K", "coefficient bound must be positive"));
        }
        Ok(ControlledCoefficients {
            n_alpha,
            n_beta,
            dim,
            bound,
            eval: Arc::new(eval),
        })
    }

    /// Constant coefficients for each control pair, `table[alpha][beta]`.
    pub fn constant(table: Vec<Vec<Coefficients<T>>>, bound: T) -> Result<Self> {
        let n_alpha = table.len();
        let n_beta = table.first().map_or(0, |r| r.len());
        if n_alpha == 0 || n_beta == 0 {
            return Err(Error::EmptyControls);
        }
        if table.iter().any(|r| r.len() != n_beta) {
            return Err(Error::DimensionMismatch("ragged control table".into()));
        }
        let dim = table[0][0].b.len();
        Self::new(n_alpha, n_beta, dim, bound, move |a, b, _, _, _| {
            table[a][b].clone()
        })
    }

    /// Reads `alpha_idx,beta_idx,node,a,b1..bN,c,f` rows (header required).
    ///
    /// Every (alpha, beta, node) combination must appear exactly once.
    pub fn from_csv(path: &Path, grid: &Grid<T>, bound: T) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, grid, bound)
    }

    pub fn parse_csv(text: &str, grid: &Grid<T>, bound: T) -> Result<Self> {
        let dim = grid.dim();
        let width = 3 + 1 + dim + 2;
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Config {
            line: 1,
            reason: "empty coefficient file".into(),
        })?;
        let mut expected = vec![
            "alpha_idx".to_string(),
            "beta_idx".into(),
            "node".into(),
            "a".into(),
        ];
        expected.extend((1..=dim).map(|k| format!("b{k}")));
        expected.extend(["c".to_string(), "f".to_string()]);
        let got: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if got != expected {
            return Err(Error::Config {
                line: hl + 1,
                reason: format!("header must be `{}`", expected.join(",")),
            });
        }
        let mut rows: Vec<(usize, usize, usize, Coefficients<T>)> = Vec::new();
        for (ln, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |reason: String| Error::Config {
                line: ln + 1,
                reason,
            };
            if cells.len() != width {
                return Err(bad(format!(
                    "expected {width} columns, found {}",
                    cells.len()
                )));
            }
            let idx = |k: usize| -> Result<usize> {
                cells[k]
                    .parse::<usize>()
                    .map_err(|_| bad(format!("column {} is not an index: `{}`", k + 1, cells[k])))
            };
            let num = |k: usize| -> Result<T> {
                cells[k]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(T::lit)
                    .ok_or_else(|| bad(format!("column {} is not a number: `{}`", k + 1, cells[k])))
            };
            let (alpha, beta, node) = (idx(0)?, idx(1)?, idx(2)?);
            if node >= grid.len() {
                return Err(bad(format!(
                    "node {node} outside grid of {} points",
                    grid.len()
                )));
            }
            let coeff = Coefficients {
                a: num(3)?,
                b: (0..dim).map(|k| num(4 + k)).collect::<Result<_>>()?,
                c: num(4 + dim)?,
                f: num(5 + dim)?,
            };
            rows.push((alpha, beta, node, coeff));
        }
        let n_alpha = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let n_beta = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        if n_alpha == 0 || n_beta == 0 {
            return Err(Error::EmptyControls);
        }
        let n = grid.len();
        let mut table: Vec<Option<Coefficients<T>>> = vec![None; n_alpha * n_beta * n];
        for (a, b, node, c) in rows {
            let slot = &mut table[(a * n_beta + b) * n + node];
            if slot.is_some() {
                return Err(Error::Config {
                    line: 0,
                    reason: format!("duplicate row for alpha={a}, beta={b}, node={node}"),
                });
            }
            *slot = Some(c);
        }
        if let Some(k) = table.iter().position(Option::is_none) {
            let (pair, node) = (k / n, k % n);
            return Err(Error::Config {
                line: 0,
                reason: format!(
                    "missing row for alpha={}, beta={}, node={node}",
                    pair / n_beta,
                    pair % n_beta
                ),
            });
        }
        let table: Vec<Coefficients<T>> = table.into_iter().map(Option::unwrap).collect();
        Self::new(n_alpha, n_beta, dim, bound, move |a, b, node, _, _| {
            table[(a * n_beta + b) * n + node].clone()
        })
    }

    #[inline]
    pub fn eval(&self, alpha: usize, beta: usize, node: usize, x: &[T], t: T) -> Coefficients<T> {
        (self.eval)(alpha, beta, node, x, t)
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The declared bound K on |a|, |b_k|, |c|.
    pub fn bound(&self) -> T {
        self.bound
    }

    /// Samples every control pair on the grid at time `t`.
    ///
    /// Negative a or c is an error (the scheme would lose monotonicity);
    /// values above K only produce a warning, since K merely feeds the CFL
    /// bound.  Returns the largest sampled magnitude.
    pub fn check(&self, grid: &Grid<T>, t: T) -> Result<T> {
        let mut worst = T::zero();
        for node in 0..grid.len() {
            let x = grid.point(node);
            for a in 0..self.n_alpha {
                for b in 0..self.n_beta {
                    let c = self.eval(a, b, node, &x, t);
                    if c.b.len() != grid.dim() {
                        return Err(Error::DimensionMismatch(format!(
                            "drift has {} components on a {}-d grid",
                            c.b.len(),
                            grid.dim()
                        )));
                    }
                    if c.a < T::zero() || c.c < T::zero() {
                        return Err(Error::invalid(
                            "coefficients",
                            format!("a and c must be >= 0 (alpha={a}, beta={b}, node={node})"),
                        ));
                    }
                    let m = c.b.iter().fold(c.a.max(c.c), |m, v| m.max(v.abs()));
                    worst = worst.max(m);
                }
            }
        }
        if worst > self.bound {
            log::warn!(
                "coefficients reach {worst}, above the declared bound K = {}",
                self.bound
            );
        }
        Ok(worst)
    }
}

impl<T> fmt::Debug for ControlledCoefficients<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ControlledCoefficients({}x{})",
            self.n_alpha, self.n_beta
        )
    }
}

/// Initial data u₀.
#[derive(Clone)]
pub struct InitialData<T> {
    name: String,
    f: VectorFn<T>,
}

fn g1<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    if x <= -two || x >= two {
        return T::zero();
    }
    let pi = T::PI();
    T::lit(0.75) * (pi * (x + T::lit(1.5))).sin()
        - T::lit(0.5) * (pi * T::lit(0.5) * (x + T::one())).sin()
        + T::lit(0.25)
}

fn g2<T: Real>(x: T) -> T {
    let a = x.abs();
    let two = T::lit(2.0);
    if a >= two {
        T::zero()
    } else if a >= T::one() {
        two - a
    } else {
        two * a - T::one()
    }
}

fn g3<T: Real>(x: T) -> T {
    T::one() / (T::one() + x * x)
}

impl<T: Real> InitialData<T> {
    /// `g1`, `g2`, `g3` act on the first coordinate; `g1_radial_2d` is
    /// g1(|x|).
    pub fn builtin(name: &str) -> Result<Self> {
        let f: VectorFn<T> = match name {
            "g1" => Arc::new(|x: &[T]| g1(x[0])),
            "g2" => Arc::new(|x: &[T]| g2(x[0])),
            "g3" => Arc::new(|x: &[T]| g3(x[0])),
            "g1_radial_2d" => {
                Arc::new(|x: &[T]| g1(x.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()))
            }
            other => {
                return Err(Error::invalid(
                    "initial",
                    format!("unknown initial data `{other}` (expected g1, g2, g3 or g1_radial_2d)"),
                ))
            }
        };
        Ok(InitialData {
            name: name.into(),
            f,
        })
    }

    pub fn custom(name: &str, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        InitialData {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        (self.f)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl<T> fmt::Debug for InitialData<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InitialData({})", self.name)
    }
}

/// A closed-form solution together with the problem it solves.
#[derive(Clone)]
pub struct ExactSolution<T> {
    /// Order, nonlinearity name and initial data name it certifies.
    pub sigma: T,
    pub nonlinearity: &'static str,
    pub initial: &'static str,
    u: Arc<dyn Fn(T, T) -> T + Send + Sync>,
}

impl<T: Real> ExactSolution<T> {
    /// u(x, t) = (t+1)/((t+1)² + x²), solving u_t = −(−Δ)^{1/2} u with u₀ = g3.
    pub fn linear_sigma1() -> Self {
        ExactSolution {
            sigma: T::one(),
            nonlinearity: "F3",
            initial: "g3",
            u: Arc::new(|x: T, t: T| {
                let s = t + T::one();
                s / (s * s + x * x)
            }),
        }
    }

    pub fn eval(&self, x: T, t: T) -> T {
        (self.u)(x, t)
    }
}

/// Order of a diffusion term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Order<T> {
    /// −(−Δ_h)^{σ/2}, σ ∈ (0, 2).
    Fractional(T),
    /// The σ → 2 limit: the standard second-difference Laplacian.
    Laplacian,
    /// The σ → 0 limit: −Id.
    NegIdentity,
}

/// F_k applied to an operator of order σ_k along the axes of a mask.
#[derive(Clone, Debug)]
pub struct DiffusionTerm<T> {
    pub order: Order<T>,
    /// `None` = all axes.
    pub mask: Option<AxisMask>,
    pub nonlinearity: Nonlinearity<T>,
    /// Truncation radius; `None` = the full grid width.
    pub radius: Option<usize>,
}

impl<T: Real> DiffusionTerm<T> {
    pub fn fractional(sigma: T, nonlinearity: Nonlinearity<T>) -> Self {
        DiffusionTerm {
            order: Order::Fractional(sigma),
            mask: None,
            nonlinearity,
            radius: None,
        }
    }

    pub fn along(mut self, mask: AxisMask) -> Self {
        self.mask = Some(mask);
        self
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = Some(radius);
        self
    }
}

/// Everything that defines a run except the time discretisation.
#[derive(Clone)]
pub struct Problem<T> {
    pub grid: Arc<Grid<T>>,
    pub initial: InitialData<T>,
    pub terms: Vec<DiffusionTerm<T>>,
    pub hamiltonian: Option<Hamiltonian<T>>,
    pub controls: Option<ControlledCoefficients<T>>,
    pub source: Option<SourceFn<T>>,
}

impl<T: Real> fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("grid", &self.grid)
            .field("initial", &self.initial)
            .field("terms", &self.terms)
            .field("hamiltonian", &self.hamiltonian)
            .field("controls", &self.controls)
            .field("source", &self.source.is_some())
            .finish()
    }
}

impl<T: Real> Problem<T> {
    pub fn new(grid: Arc<Grid<T>>, initial: InitialData<T>) -> Self {
        Problem {
            grid,
            initial,
            terms: Vec::new(),
            hamiltonian: None,
            controls: None,
            source: None,
        }
    }

    pub fn with_term(mut self, term: DiffusionTerm<T>) -> Self {
        self.terms.push(term);
        self
    }

    pub fn with_hamiltonian(mut self, h: Hamiltonian<T>) -> Self {
        self.hamiltonian = Some(h);
        self
    }

    pub fn with_controls(mut self, c: ControlledCoefficients<T>) -> Self {
        self.controls = Some(c);
        self
    }

    pub fn with_source(mut self, f: impl Fn(&[T], T) -> T + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(f));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn builtin_nonlinearities() {
        let f1 = Nonlinearity::<f64>::builtin("F1").unwrap();
        let f2 = Nonlinearity::<f64>::builtin("F2").unwrap();
        let f3 = Nonlinearity::<f64>::builtin("F3").unwrap();
        assert_eq!(f1.eval(-3.0), 0.0);
        assert_eq!(f1.eval(2.0), 2.0);
        assert_eq!(f2.eval(-2.0), -1.0);
        assert_eq!(f2.eval(2.0), 2.0);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(-50.0..50.0);
            assert_eq!(f3.eval(x), x);
        }
        for f in [&f1, &f2, &f3] {
            assert_eq!(f.lipschitz(), 1.0);
            assert_eq!(f.at_zero(), 0.0);
        }
        assert!(Nonlinearity::<f64>::builtin("F4").is_err());
    }

    #[test]
    fn sampled_one_sided_lipschitz_condition() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for name in ["F1", "F2", "F3"] {
            let f = Nonlinearity::<f64>::builtin(name).unwrap();
            let mut violations = 0;
            for _ in 0..10_000 {
                let a: f64 = rng.gen_range(-10.0..10.0);
                let b: f64 = rng.gen_range(-10.0..10.0);
                if f.eval(a) - f.eval(b) > f.lipschitz() * (a - b).max(0.0) {
                    violations += 1;
                }
            }
            assert_eq!(violations, 0, "{name}");
        }
    }

    #[test]
    fn initial_data_values() {
        let g1 = InitialData::<f64>::builtin("g1").unwrap();
        let g2 = InitialData::<f64>::builtin("g2").unwrap();
        let g3 = InitialData::<f64>::builtin("g3").unwrap();
        assert_eq!(g2.eval(&[0.0]), -1.0);
        assert_eq!(g2.eval(&[1.0]), 1.0);
        assert_eq!(g2.eval(&[-1.0]), 1.0);
        assert_eq!(g2.eval(&[2.0]), 0.0);
        assert_eq!(g2.eval(&[-2.0]), 0.0);
        assert_eq!(g3.eval(&[0.0]), 1.0);
        assert_eq!(g3.eval(&[1.0]), 0.5);
        for edge in [-2.0, 2.0] {
            for d in [1e-9, -1e-9] {
                assert!(g1.eval(&[edge + d]).abs() < 1e-8);
            }
        }
        for x in [-7.0, -2.0, 2.0, 3.5] {
            assert_eq!(g1.eval(&[x]), 0.0);
            assert_eq!(g2.eval(&[x]), 0.0);
        }
        let r = InitialData::<f64>::builtin("g1_radial_2d").unwrap();
        assert!((r.eval(&[0.6, 0.8]) - g1.eval(&[1.0])).abs() < 1e-15);
        assert!(InitialData::<f64>::builtin("g9").is_err());
    }

    #[test]
    fn exact_solution() {
        let u = ExactSolution::<f64>::linear_sigma1();
        let g3 = InitialData::<f64>::builtin("g3").unwrap();
        assert_eq!(u.eval(0.0, 0.0), 1.0);
        assert_eq!(u.eval(0.0, 1.0), 0.5);
        for x in [-3.0, -0.5, 0.25, 10.0] {
            assert_eq!(u.eval(x, 0.7), u.eval(-x, 0.7));
            assert_eq!(u.eval(x, 0.0), g3.eval(&[x]));
        }
    }

    #[test]
    fn hamiltonian_constants() {
        let h = Hamiltonian::transport(&[1.0_f64]);
        assert_eq!(h.eval(&[3.0]), 3.0);
        assert_eq!(h.viscosity(), vec![0.5]);
        let h2 = Hamiltonian::transport(&[-2.0_f64, 0.5]);
        assert_eq!(h2.lipschitz(), 2.5);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let q: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let dist: f64 = p
                .iter()
                .zip(&q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!((h2.eval(&p) - h2.eval(&q)).abs() <= h2.lipschitz() * dist + 1e-12);
        }
    }

    #[test]
    fn coefficient_csv() {
        let grid = Grid::new(&[(0.0, 1.0)], 0.5).unwrap();
        let mut text = String::from("alpha_idx,beta_idx,node,a,b1,c,f\n");
        for a in 0..2 {
            for node in 0..3 {
                text += &format!("{a},0,{node},{},{},0.5,0\n", a as f64, -(node as f64));
            }
        }
        let c = ControlledCoefficients::parse_csv(&text, &grid, 2.0).unwrap();
        assert_eq!((c.n_alpha(), c.n_beta()), (2, 1));
        let v = c.eval(1, 0, 2, &[1.0], 0.0);
        assert_eq!(
            v,
            Coefficients {
                a: 1.0,
                b: vec![-2.0],
                c: 0.5,
                f: 0.0
            }
        );
        assert_eq!(c.check(&grid, 0.0).unwrap(), 2.0);

        let missing = text.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(ControlledCoefficients::parse_csv(&missing, &grid, 2.0).is_err());
        let bad_header = text.replacen("b1", "b", 1);
        assert!(ControlledCoefficients::parse_csv(&bad_header, &grid, 2.0).is_err());
        let negative = text.replacen("0,0,0,0,-0,0.5,0", "0,0,0,-1,0,0.5,0", 1);
        let c = ControlledCoefficients::parse_csv(&negative, &grid, 2.0).unwrap();
        assert!(c.check(&grid, 0.0).is_err());
    }

    #[test]
    fn empty_controls_are_rejected() {
        let r = ControlledCoefficients::<f64>::constant(vec![], 1.0);
        assert!(matches!(r, Err(Error::EmptyControls)));
    }
}
