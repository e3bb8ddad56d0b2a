//! Discrete fractional Laplacian and first-order difference operators.
//!
//! Everything reads values outside the grid as zero.  For the fractional
//! operator that means exterior neighbours drop out of the stencil while the
//! diagonal keeps the full mass of the table (tail included).

use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::{AxisMask, Grid, GridFunction};
use crate::scalar::Real;
use crate::weights::WeightTable;
use crate::{Error, Result};

/// Line problems with more multiply-adds than this go through the FFT.
const FFT_WORK_THRESHOLD: usize = 1 << 18;

fn check_table<T: Real>(table: &WeightTable<T>, grid: &Grid<T>, axes: usize) -> Result<()> {
    if table.dim() != axes {
        return Err(Error::DimensionMismatch(format!(
            "weight table has dimension {}, operator acts on {} axes",
            table.dim(),
            axes
        )));
    }
    if !grid.same_spacing(table.h()) {
        return Err(Error::DimensionMismatch(format!(
            "weight table built for h = {}, grid has h = {}",
            table.h(),
            grid.h()
        )));
    }
    Ok(())
}

/// Σ_{j≠0} κ_j U_{i+j} over the neighbours of `idx` that lie inside the
/// grid, moving only along `axes`.  Fixed summation order: lexicographic in
/// the offset, so the field and point versions agree bit for bit.
fn stencil_sum<T: Real>(
    table: &WeightTable<T>,
    axes: &[usize],
    grid: &Grid<T>,
    values: &[T],
    idx: &[usize],
) -> T {
    let r = table.radius();
    let side = 2 * r + 1;
    let dense = table.dense();
    let shape = grid.shape();
    let strides = grid.strides();
    let m = axes.len();

    // admissible offset range per selected axis, as table positions
    let mut lo = vec![0usize; m];
    let mut hi = vec![0usize; m];
    let mut base = 0usize;
    for (k, &ax) in axes.iter().enumerate() {
        let i = idx[ax];
        lo[k] = r - i.min(r);
        hi[k] = r + (shape[ax] - 1 - i).min(r);
    }
    for (k, &i) in idx.iter().enumerate() {
        base += i * strides[k];
    }

    let inner_axis = axes[m - 1];
    let inner_stride = strides[inner_axis];
    let mut acc = T::zero();
    let mut pos = lo.clone();
    loop {
        // outer part of the table row and of the grid position
        let mut row = 0usize;
        let mut grid_pos = base as isize;
        for k in 0..m - 1 {
            row = row * side + pos[k];
            grid_pos += (pos[k] as isize - r as isize) * strides[axes[k]] as isize;
        }
        let row_start = row * side;
        let mut g = grid_pos + (lo[m - 1] as isize - r as isize) * inner_stride as isize;
        for t in lo[m - 1]..=hi[m - 1] {
            acc = acc + dense[row_start + t] * values[g as usize];
            g += inner_stride as isize;
        }
        // advance the odometer over the outer axes
        let mut k = m - 1;
        loop {
            if k == 0 {
                return acc;
            }
            k -= 1;
            if pos[k] < hi[k] {
                pos[k] += 1;
                break;
            }
            pos[k] = lo[k];
        }
    }
}

/// −(−Δ_h)^{σ/2} U at one grid point.
///
/// Σ_{j≠0, i+j in grid} κ_j U_{i+j} − U_i · diagonal_mass.
pub fn apply_fractional<T: Real>(
    table: &WeightTable<T>,
    u: &GridFunction<T>,
    index: &[usize],
) -> Result<T> {
    let grid = u.grid();
    check_table(table, grid, grid.dim())?;
    let flat = grid.flat(index)?;
    let axes: Vec<usize> = (0..grid.dim()).collect();
    Ok(stencil_sum(table, &axes, grid, u.values(), index)
        - u.values()[flat] * table.diagonal_mass())
}

/// [`apply_fractional`] at every grid point, by direct summation.
pub fn apply_fractional_field<T: Real>(
    table: &WeightTable<T>,
    u: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    let mask = AxisMask::all(u.grid().dim())?;
    apply_directional(table, &mask, u)
}

/// Lower-dimensional fractional operator along the axes selected by `mask`,
/// applied independently on every slice of the remaining axes.
pub fn apply_directional<T: Real>(
    table: &WeightTable<T>,
    mask: &AxisMask,
    u: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    let grid = u.grid();
    if mask.dim() != grid.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mask has {} axes, grid has {}",
            mask.dim(),
            grid.dim()
        )));
    }
    let axes = mask.axes();
    check_table(table, grid, axes.len())?;
    let values = u.values();
    let diag = table.diagonal_mass();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|f| {
            let idx = grid.multi(f);
            stencil_sum(table, &axes, grid, values, &idx) - values[f] * diag
        })
        .collect();
    Ok(GridFunction::from_parts_unchecked(grid.clone(), out))
}

/// Linear convolution of a line of length n with a symmetric 1-d table.
struct LineConvolver<T: Real> {
    n: usize,
    len: usize,
    kernel_hat: Vec<Complex<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> LineConvolver<T> {
    fn new(table: &WeightTable<T>, n: usize) -> Self {
        let reach = table.radius().min(n - 1);
        let len = (n + reach).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let line = table.line();
        let r = table.radius();
        let mut kernel_hat = vec![Complex::zero(); len];
        for d in 1..=reach {
            let k = line[r + d];
            kernel_hat[d] = Complex::new(k, T::zero());
            kernel_hat[len - d] = Complex::new(k, T::zero());
        }
        forward.process(&mut kernel_hat);
        // fold the 1/len normalisation of the inverse transform in here
        let scale = T::one() / T::of_usize(len);
        kernel_hat.iter_mut().for_each(|c| *c = *c * scale);
        LineConvolver {
            n,
            len,
            kernel_hat,
            forward,
            inverse,
        }
    }

    /// out_i = Σ_j κ_j input_{i+j} (zero outside the line).
    fn convolve(&self, input: impl Iterator<Item = T>, buf: &mut Vec<Complex<T>>) {
        buf.clear();
        buf.extend(input.map(|v| Complex::new(v, T::zero())));
        debug_assert_eq!(buf.len(), self.n);
        buf.resize(self.len, Complex::zero());
        self.forward.process(buf);
        buf.iter_mut()
            .zip(&self.kernel_hat)
            .for_each(|(a, k)| *a = *a * *k);
        self.inverse.process(buf);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// FFT for long one-dimensional lines, direct summation otherwise.
    #[default]
    Auto,
    Direct,
    Fft,
}

/// A fractional operator prepared for repeated application on one grid.
pub struct FractionalOperator<T: Real> {
    table: WeightTable<T>,
    grid: Arc<Grid<T>>,
    axes: Vec<usize>,
    line: Option<LineConvolver<T>>,
}

impl<T: Real> FractionalOperator<T> {
    /// `mask = None` means all axes.
    pub fn new(
        table: WeightTable<T>,
        grid: Arc<Grid<T>>,
        mask: Option<&AxisMask>,
        backend: Backend,
    ) -> Result<Self> {
        let axes = match mask {
            Some(m) if m.dim() != grid.dim() => {
                return Err(Error::DimensionMismatch(format!(
                    "mask has {} axes, grid has {}",
                    m.dim(),
                    grid.dim()
                )))
            }
            Some(m) => m.axes(),
            None => (0..grid.dim()).collect(),
        };
        check_table(&table, &grid, axes.len())?;
        let line_fft = axes.len() == 1 && {
            let n = grid.shape()[axes[0]];
            let work = n * (2 * table.radius().min(n - 1) + 1);
            match backend {
                Backend::Direct => false,
                Backend::Fft => n > 1,
                Backend::Auto => work > FFT_WORK_THRESHOLD,
            }
        };
        if backend == Backend::Fft && !line_fft {
            log::warn!("FFT backend only covers one-dimensional lines; using direct summation");
        }
        let line = line_fft.then(|| LineConvolver::new(&table, grid.shape()[axes[0]]));
        Ok(FractionalOperator {
            table,
            grid,
            axes,
            line,
        })
    }

    pub fn table(&self) -> &WeightTable<T> {
        &self.table
    }

    pub fn uses_fft(&self) -> bool {
        self.line.is_some()
    }

    /// Writes −(−Δ_h)^{σ/2} applied to `values` into `out`.
    pub fn apply(&self, values: &[T], out: &mut [T]) {
        assert_eq!(values.len(), self.grid.len());
        assert_eq!(out.len(), self.grid.len());
        let diag = self.table.diagonal_mass();
        match &self.line {
            None => {
                let grid = &*self.grid;
                out.par_iter_mut().enumerate().for_each(|(f, o)| {
                    let idx = grid.multi(f);
                    *o =
                        stencil_sum(&self.table, &self.axes, grid, values, &idx) - values[f] * diag;
                });
            }
            Some(conv) => {
                let axis = self.axes[0];
                let stride = self.grid.strides()[axis];
                let n = self.grid.shape()[axis];
                let starts = line_starts(&self.grid, axis);
                // each line writes a disjoint strided set of entries
                let results: Vec<(usize, Vec<T>)> = starts
                    .into_par_iter()
                    .map_init(Vec::new, |buf, s| {
                        conv.convolve((0..n).map(|k| values[s + k * stride]), buf);
                        let line = (0..n)
                            .map(|k| buf[k].re - values[s + k * stride] * diag)
                            .collect();
                        (s, line)
                    })
                    .collect();
                for (s, line) in results {
                    for (k, v) in line.into_iter().enumerate() {
                        out[s + k * stride] = v;
                    }
                }
            }
        }
    }

    pub fn apply_to(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        if **u.grid() != *self.grid {
            return Err(Error::DimensionMismatch(
                "function lives on a different grid".into(),
            ));
        }
        let mut out = vec![T::zero(); u.values().len()];
        self.apply(u.values(), &mut out);
        Ok(GridFunction::from_parts_unchecked(self.grid.clone(), out))
    }
}

/// Flat index of the first point of every grid line along `axis`.
fn line_starts<T: Real>(grid: &Grid<T>, axis: usize) -> Vec<usize> {
    (0..grid.len())
        .filter(|&f| (f / grid.strides()[axis]).is_multiple_of(grid.shape()[axis]))
        .collect()
}

/// Neighbour value along `axis` at offset ±1, zero outside the grid.
#[inline]
pub(crate) fn neighbour<T: Real>(
    grid: &Grid<T>,
    values: &[T],
    flat: usize,
    axis: usize,
    up: bool,
) -> T {
    let stride = grid.strides()[axis];
    let i = (flat / stride) % grid.shape()[axis];
    if up {
        if i + 1 < grid.shape()[axis] {
            values[flat + stride]
        } else {
            T::zero()
        }
    } else if i > 0 {
        values[flat - stride]
    } else {
        T::zero()
    }
}

/// (U(x + h e_k) − U(x − h e_k)) / 2h for every axis.
pub fn central_gradient<T: Real>(u: &GridFunction<T>, index: &[usize]) -> Result<Vec<T>> {
    let grid = u.grid();
    let f = grid.flat(index)?;
    let two_h = T::lit(2.0) * grid.h();
    Ok((0..grid.dim())
        .map(|k| {
            (neighbour(grid, u.values(), f, k, true) - neighbour(grid, u.values(), f, k, false))
                / two_h
        })
        .collect())
}

/// (U(x + h e_k) − U(x)) / h.
pub fn upwind_diff_plus<T: Real>(u: &GridFunction<T>, index: &[usize], axis: usize) -> Result<T> {
    let grid = u.grid();
    check_axis(grid, axis)?;
    let f = grid.flat(index)?;
    Ok((neighbour(grid, u.values(), f, axis, true) - u.values()[f]) / grid.h())
}

/// (U(x) − U(x − h e_k)) / h, the backward difference.
///
/// Paired with the negative part of a drift this keeps every coefficient of
/// the upwind scheme nonnegative.
pub fn upwind_diff_minus<T: Real>(u: &GridFunction<T>, index: &[usize], axis: usize) -> Result<T> {
    let grid = u.grid();
    check_axis(grid, axis)?;
    let f = grid.flat(index)?;
    Ok((u.values()[f] - neighbour(grid, u.values(), f, axis, false)) / grid.h())
}

/// Σ_k L_k (U(x + h e_k) − 2U(x) + U(x − h e_k)) / h², the Lax–Friedrichs
/// viscosity with per-axis constants L_k.
pub fn lf_viscosity<T: Real>(u: &GridFunction<T>, index: &[usize], lh: &[T]) -> Result<T> {
    let grid = u.grid();
    if lh.len() != grid.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} viscosity constants for {} axes",
            lh.len(),
            grid.dim()
        )));
    }
    let f = grid.flat(index)?;
    Ok(second_difference_sum(grid, u.values(), f, lh))
}

#[inline]
pub(crate) fn second_difference_sum<T: Real>(
    grid: &Grid<T>,
    values: &[T],
    f: usize,
    lh: &[T],
) -> T {
    let h2 = grid.h() * grid.h();
    let two = T::lit(2.0);
    (0..grid.dim())
        .map(|k| {
            lh[k]
                * (neighbour(grid, values, f, k, true) - two * values[f]
                    + neighbour(grid, values, f, k, false))
                / h2
        })
        .fold(T::zero(), |a, b| a + b)
}

fn check_axis<T: Real>(grid: &Grid<T>, axis: usize) -> Result<()> {
    if axis < grid.dim() {
        Ok(())
    } else {
        Err(Error::invalid(
            "axis",
            format!("axis {axis} out of {}", grid.dim()),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{weights_1d, weights_nd};
    use std::f64::consts::PI;

    fn line_grid(a: f64, b: f64, h: f64) -> Arc<Grid<f64>> {
        Arc::new(Grid::new(&[(a, b)], h).unwrap())
    }

    #[test]
    fn indicator_of_origin() {
        let g = line_grid(-8.0, 8.0, 1.0);
        let table = weights_1d(1.0, 1.0, 10_000).unwrap();
        let u = GridFunction::sample(g, |x| if x[0] == 0.0 { 1.0 } else { 0.0 });
        let at0 = apply_fractional(&table, &u, &[8]).unwrap();
        let at1 = apply_fractional(&table, &u, &[9]).unwrap();
        assert!((at0 + 4.0 / PI).abs() < 1e-8);
        assert!((at1 - 4.0 / (3.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn five_point_brute_force() {
        let g = line_grid(0.0, 4.0, 1.0);
        let table = weights_1d(1.0, 1.0, 4).unwrap();
        let vals = vec![0.3, -1.0, 2.0, 0.5, 1.5];
        let u = GridFunction::new(g, vals.clone()).unwrap();
        let out = apply_fractional_field(&table, &u).unwrap();
        let kappa = |j: i64| 1.0 / PI / ((j * j) as f64 - 0.25);
        for i in 0..5_i64 {
            let mut s = 0.0;
            for m in 0..5_i64 {
                if m != i {
                    s += kappa(m - i) * vals[m as usize];
                }
            }
            let want = s - vals[i as usize] * table.diagonal_mass();
            assert!((out.values()[i as usize] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn field_and_point_agree_exactly() {
        let g = Arc::new(Grid::new(&[(-1.0_f64, 1.0), (-0.75, 0.75)], 0.25).unwrap());
        let table = weights_nd(0.7, 0.25, 2, 6).unwrap();
        let u = GridFunction::sample(g.clone(), |x| (3.0 * x[0]).sin() + x[1] * x[1]);
        let field = apply_fractional_field(&table, &u).unwrap();
        for f in 0..g.len() {
            let p = apply_fractional(&table, &u, &g.multi(f)).unwrap();
            assert_eq!(p.to_bits(), field.values()[f].to_bits());
        }
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let g = line_grid(-2.0, 2.0, 0.5);
        let table = weights_1d(0.5, 0.5, 8).unwrap();
        let out = apply_fractional_field(&table, &GridFunction::zeros(g)).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn directional_rows_match_one_dimensional_operator() {
        let g2 = Arc::new(Grid::new(&[(-1.0_f64, 1.0), (0.0, 2.0)], 0.5).unwrap());
        let table = weights_1d(1.2, 0.5, 4).unwrap();
        let u = GridFunction::sample(g2.clone(), |x| (x[0] - 0.3).exp() * (1.0 + x[1]));
        let rows = apply_directional(&table, &AxisMask::single(2, 1).unwrap(), &u).unwrap();
        let g1 = line_grid(0.0, 2.0, 0.5);
        for i in 0..5 {
            let row: Vec<f64> = (0..5).map(|j| u.get(&[i, j]).unwrap()).collect();
            let one = apply_fractional_field(&table, &GridFunction::new(g1.clone(), row).unwrap())
                .unwrap();
            for j in 0..5 {
                assert_eq!(rows.get(&[i, j]).unwrap(), one.values()[j]);
            }
        }
    }

    #[test]
    fn fft_backend_matches_direct() {
        let g = line_grid(-20.0, 20.0, 1.0 / 16.0);
        let n = g.len();
        for s in [0.4, 1.0, 1.7] {
            let table = weights_1d(s, 1.0 / 16.0, n - 1).unwrap();
            let u = GridFunction::sample(g.clone(), |x| (-x[0] * x[0]).exp() + 0.1 * (x[0]).cos());
            let direct =
                FractionalOperator::new(table.clone(), g.clone(), None, Backend::Direct).unwrap();
            let fft = FractionalOperator::new(table, g.clone(), None, Backend::Auto).unwrap();
            assert!(fft.uses_fft() && !direct.uses_fft());
            let a = direct.apply_to(&u).unwrap();
            let b = fft.apply_to(&u).unwrap();
            let scale = a.sup_norm();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn directional_fft_on_a_plane() {
        let g = Arc::new(Grid::new(&[(-3.0_f64, 3.0), (-2.0, 2.0)], 0.125).unwrap());
        let table = weights_1d(0.9, 0.125, 48).unwrap();
        let mask = AxisMask::single(2, 0).unwrap();
        let u = GridFunction::sample(g.clone(), |x| 1.0 / (1.0 + x[0] * x[0] + 2.0 * x[1] * x[1]));
        let direct = apply_directional(&table, &mask, &u).unwrap();
        let fft = FractionalOperator::new(table, g, Some(&mask), Backend::Fft).unwrap();
        let b = fft.apply_to(&u).unwrap();
        for (x, y) in direct.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let g = line_grid(-1.0, 1.0, 0.5);
        let u = GridFunction::zeros(g.clone());
        assert!(apply_fractional(&weights_1d(1.0, 0.25, 4).unwrap(), &u, &[1]).is_err());
        assert!(apply_fractional(&weights_nd(1.0, 0.5, 2, 2).unwrap(), &u, &[1]).is_err());
        assert!(apply_fractional(&weights_1d(1.0, 0.5, 4).unwrap(), &u, &[5]).is_err());
        let mask = AxisMask::new(&[true, true]).unwrap();
        assert!(apply_directional(&weights_1d(1.0, 0.5, 4).unwrap(), &mask, &u).is_err());
    }

    #[test]
    fn difference_operators() {
        let g = line_grid(-1.0, 1.0, 0.25);
        let lin = GridFunction::sample(g.clone(), |x| x[0]);
        assert!((central_gradient(&lin, &[4]).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!(lf_viscosity(&lin, &[4], &[0.5]).unwrap().abs() < 1e-13);
        let sq = GridFunction::sample(g, |x| x[0] * x[0]);
        assert!((upwind_diff_plus(&sq, &[4], 0).unwrap() - 0.25).abs() < 1e-15);
        assert!((upwind_diff_minus(&sq, &[4], 0).unwrap() + 0.25).abs() < 1e-15);
        // exterior reads as zero: at the right edge U(x+h) = 0
        assert!((upwind_diff_plus(&sq, &[8], 0).unwrap() + 4.0).abs() < 1e-15);
        assert!(upwind_diff_plus(&sq, &[4], 1).is_err());
    }
}
