//! Uniform grids on a truncated box and functions sampled on them.
//!
//! Values outside the box are zero; every operator in the crate reads a
//! missing neighbour as 0.

use std::sync::Arc;

use crate::scalar::Real;
use crate::{Error, Result};

/// Relative slack allowed when checking that (b − a)/h is an integer.
const COUNT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    h: T,
    shape: Vec<usize>,
    strides: Vec<usize>,
}

impl<T: Real> Grid<T> {
    /// Grid on Π_k [a_k, b_k] with spacing h; (b_k − a_k)/h must be an integer.
    pub fn new(bounds: &[(T, T)], h: T) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("bounds", "at least one axis is required"));
        }
        if !(h > T::zero() && h.is_finite()) {
            return Err(Error::invalid(
                "h",
                format!("spacing must be positive, got {h}"),
            ));
        }
        let mut shape = Vec::with_capacity(bounds.len());
        for (k, &(a, b)) in bounds.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::invalid(
                    "bounds",
                    format!("axis {k}: need a finite interval a < b, got [{a}, {b}]"),
                ));
            }
            let cells = ((b - a) / h).as_f64();
            let rounded = cells.round();
            if (cells - rounded).abs() > COUNT_SLACK * cells.max(1.0) || rounded < 1.0 {
                return Err(Error::invalid(
                    "h",
                    format!(
                        "axis {k}: length {} is not a whole number of cells of size {h}",
                        b - a
                    ),
                ));
            }
            shape.push(rounded as usize + 1);
        }
        let mut strides = vec![1usize; shape.len()];
        for k in (0..shape.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * shape[k + 1];
        }
        Ok(Grid {
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            h,
            shape,
            strides,
        })
    }

    /// Same box in every direction.
    pub fn cube(a: T, b: T, dim: usize, h: T) -> Result<Self> {
        Grid::new(&vec![(a, b); dim], h)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn bounds(&self) -> Vec<(T, T)> {
        self.lower
            .iter()
            .copied()
            .zip(self.upper.iter().copied())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of index `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> T {
        self.lower[axis] + T::of_usize(i) * self.h
    }

    pub fn flat(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dim() || index.iter().zip(&self.shape).any(|(i, n)| i >= n) {
            return Err(Error::OutOfRange {
                index: index.to_vec(),
                shape: self.shape.clone(),
            });
        }
        Ok(index.iter().zip(&self.strides).map(|(i, s)| i * s).sum())
    }

    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for (o, s) in out.iter_mut().zip(&self.strides) {
            *o = flat / s;
            flat %= s;
        }
        out
    }

    pub fn point(&self, flat: usize) -> Vec<T> {
        self.multi(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.coord(k, i))
            .collect()
    }

    /// Index of the grid point nearest to `x` along `axis`, if inside.
    pub fn nearest(&self, axis: usize, x: T) -> Option<usize> {
        let r = ((x - self.lower[axis]) / self.h).round();
        let i = r.to_i64()?;
        (0..self.shape[axis] as i64)
            .contains(&i)
            .then_some(i as usize)
    }

    /// Flat indices of the points inside the closed box `window`.
    pub fn window_indices(&self, window: &[(T, T)]) -> Result<Vec<usize>> {
        if window.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "window has {} axes, grid has {}",
                window.len(),
                self.dim()
            )));
        }
        let slack = self.h * T::lit(1e-9);
        Ok((0..self.len())
            .filter(|&f| {
                self.point(f)
                    .iter()
                    .zip(window)
                    .all(|(&x, &(a, b))| x >= a - slack && x <= b + slack)
            })
            .collect())
    }

    pub(crate) fn same_spacing(&self, h: T) -> bool {
        ((self.h - h) / self.h).abs() <= T::lit(1e-12)
    }
}

/// Values of a function on a grid (zero outside it).
#[derive(Clone, Debug)]
pub struct GridFunction<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "values",
                format!("non-finite value at flat index {k}"),
            ));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        GridFunction { grid, values }
    }

    /// Samples `f` at every grid point.
    pub fn sample(grid: Arc<Grid<T>>, f: impl Fn(&[T]) -> T) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        GridFunction { grid, values }
    }

    pub(crate) fn from_parts_unchecked(grid: Arc<Grid<T>>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> Result<T> {
        Ok(self.values[self.grid.flat(index)?])
    }

    pub fn sup_norm(&self) -> T {
        crate::scalar::sup_norm(&self.values)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Selection of coordinate axes for a directional operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisMask {
    flags: Vec<bool>,
}

impl AxisMask {
    pub fn new(flags: &[bool]) -> Result<Self> {
        if !flags.iter().any(|&f| f) {
            return Err(Error::invalid("mask", "at least one axis must be selected"));
        }
        Ok(AxisMask {
            flags: flags.to_vec(),
        })
    }

    /// The mask selecting only `axis` out of `dim`.
    pub fn single(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::invalid("mask", format!("axis {axis} out of {dim}")));
        }
        let mut flags = vec![false; dim];
        flags[axis] = true;
        AxisMask::new(&flags)
    }

    pub fn all(dim: usize) -> Result<Self> {
        AxisMask::new(&vec![true; dim])
    }

    pub fn dim(&self) -> usize {
        self.flags.len()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn axes(&self) -> Vec<usize> {
        (0..self.flags.len()).filter(|&k| self.flags[k]).collect()
    }
}
