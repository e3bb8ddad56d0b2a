// series coefficients and reference values are kept at full precision
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod grid;
pub mod harness;
pub mod operator;
pub mod problem;
pub mod scalar;
pub mod special;
pub mod stepper;
pub mod weights;

mod quadrature;

pub use error::{Error, Result};
pub use scalar::Real;

pub use grid::{AxisMask, Grid, GridFunction};
pub use operator::{Backend, FractionalOperator};
pub use problem::{DiffusionTerm, InitialData, Nonlinearity, Order, Problem};
pub use stepper::{solve, Scheme, SchemeConfig, Solver, TauRule, Trajectory};
pub use weights::WeightTable;

/// Double-precision instantiations.
pub type GridF64 = Grid<f64>;
pub type GridFunctionF64 = GridFunction<f64>;
pub type WeightTableF64 = WeightTable<f64>;
pub type ProblemF64 = Problem<f64>;
pub type SolverF64 = Solver<f64>;
pub type TrajectoryF64 = Trajectory<f64>;

/// Single-precision instantiations.
pub type GridF32 = Grid<f32>;
pub type GridFunctionF32 = GridFunction<f32>;
pub type WeightTableF32 = WeightTable<f32>;
pub type ProblemF32 = Problem<f32>;
pub type SolverF32 = Solver<f32>;
pub type TrajectoryF32 = Trajectory<f32>;
