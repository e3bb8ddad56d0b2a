//! Quadrature weights of the discrete fractional Laplacian.
//!
//! The operator is
//!
//! ```text
//! −(−Δ_h)^{σ/2} U_i = Σ_{j≠0} κ_j (U_{i+j} − U_i)
//! ```
//!
//! with κ_j ≥ 0 obtained by subordinating the semi-discrete heat kernel
//! G(j, t) = Π_k e^{−2t} I_{|j_k|}(2t).  In one dimension the integral has a
//! closed form in Gamma functions; in higher dimensions it is integrated
//! numerically.  Offsets beyond the truncation radius are not dropped: their
//! total weight is folded into `diagonal_mass`, which is what zero exterior
//! data requires.

use rayon::prelude::*;

use crate::quadrature::{upper_cutoff, HalfLine};
use crate::scalar::{check_order, Real};
use crate::special::{gamma, gamma_ratio, power_tail_sum, scaled_bessel_i};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct WeightTable<T> {
    sigma: T,
    h: T,
    dim: usize,
    radius: usize,
    /// Dense (2R+1)^dim block, row-major, centre entry zero.
    weights: Vec<T>,
    tail_mass: T,
    diagonal_mass: T,
}

impl<T: Real> WeightTable<T> {
    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Weight of all offsets with |j|_∞ > R, added to the diagonal.
    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    /// Σ_{j≠0} κ_j + tail_mass; the diagonal coefficient of the operator.
    pub fn diagonal_mass(&self) -> T {
        self.diagonal_mass
    }

    /// h^σ · diagonal_mass, the mass constant this table actually realises.
    pub fn realised_constant(&self) -> T {
        self.diagonal_mass * self.h.powf(self.sigma)
    }

    /// κ_j for an offset; zero at j = 0 and beyond the radius.
    pub fn weight(&self, offset: &[i64]) -> T {
        assert_eq!(offset.len(), self.dim, "offset dimension");
        let r = self.radius as i64;
        let side = 2 * self.radius + 1;
        let mut flat = 0usize;
        for &o in offset {
            if o.abs() > r {
                return T::zero();
            }
            flat = flat * side + (o + r) as usize;
        }
        self.weights[flat]
    }

    /// Dense block indexed by j + R per axis, row-major.
    pub fn dense(&self) -> &[T] {
        &self.weights
    }

    /// For one-dimensional tables: κ_{−R..=R} (centre zero).
    pub fn line(&self) -> &[T] {
        assert_eq!(self.dim, 1, "line() needs a one-dimensional table");
        &self.weights
    }

    /// Nonzero offsets and their weights.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, T)> + '_ {
        let side = 2 * self.radius + 1;
        let r = self.radius as i64;
        let dim = self.dim;
        self.weights
            .iter()
            .enumerate()
            .filter_map(move |(flat, &w)| {
                let mut j = vec![0i64; dim];
                let mut rest = flat;
                for k in (0..dim).rev() {
                    j[k] = (rest % side) as i64 - r;
                    rest /= side;
                }
                (j.iter().any(|&c| c != 0)).then_some((j, w))
            })
    }

    /// The same table at another spacing (κ scales like h^{−σ}).
    pub fn rescaled(&self, h: T) -> Result<Self> {
        check_spacing(h)?;
        let factor = (self.h / h).powf(self.sigma);
        Ok(WeightTable {
            sigma: self.sigma,
            h,
            dim: self.dim,
            radius: self.radius,
            weights: self.weights.iter().map(|&w| w * factor).collect(),
            tail_mass: self.tail_mass * factor,
            diagonal_mass: self.diagonal_mass * factor,
        })
    }
}

/// Five-point (in general 2N+1-point) Laplacian as a radius-1 table: the
/// σ → 2 end of the family.
pub(crate) fn laplacian_table<T: Real>(h: T, dim: usize) -> Result<WeightTable<T>> {
    check_spacing(h)?;
    let side = 3usize;
    let mut weights = vec![T::zero(); side.pow(dim as u32)];
    let centre = (weights.len() - 1) / 2;
    let inv = T::one() / (h * h);
    for k in 0..dim {
        let step = side.pow((dim - 1 - k) as u32);
        weights[centre + step] = inv;
        weights[centre - step] = inv;
    }
    Ok(WeightTable {
        sigma: T::lit(2.0),
        h,
        dim,
        radius: 1,
        weights,
        tail_mass: T::zero(),
        diagonal_mass: T::of_usize(2 * dim) * inv,
    })
}

/// −Id as a table with no neighbours: the σ → 0 end of the family.
pub(crate) fn neg_identity_table<T: Real>(h: T, dim: usize) -> Result<WeightTable<T>> {
    check_spacing(h)?;
    Ok(WeightTable {
        sigma: T::zero(),
        h,
        dim,
        radius: 1,
        weights: vec![T::zero(); 3usize.pow(dim as u32)],
        tail_mass: T::zero(),
        diagonal_mass: T::one(),
    })
}

fn check_spacing<T: Real>(h: T) -> Result<()> {
    if h > T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "h",
            format!("spacing must be positive, got {h}"),
        ))
    }
}

fn check_radius(radius: usize) -> Result<()> {
    if radius >= 1 {
        Ok(())
    } else {
        Err(Error::invalid("radius", "truncation radius must be >= 1"))
    }
}

/// 2^σ Γ((1+σ)/2) / (√π |Γ(−σ/2)|), the prefactor of the 1-d weights.
fn prefactor_1d<T: Real>(sigma: T) -> T {
    let half = T::lit(0.5);
    T::lit(2.0).powf(sigma) * gamma((T::one() + sigma) * half)
        / (T::PI().sqrt() * gamma(-sigma * half).abs())
}

/// Closed-form weights in one dimension.
///
/// κ_j = P Γ(|j|−σ/2)/Γ(|j|+1+σ/2) / h^σ for 1 ≤ |j| ≤ R; the weights past R
/// are replaced by their asymptotic form P |j|^{−1−σ} / h^σ and summed with a
/// Hurwitz-zeta tail starting at R + 1.
pub fn weights_1d<T: Real>(sigma: T, h: T, radius: usize) -> Result<WeightTable<T>> {
    check_order(sigma)?;
    check_spacing(h)?;
    check_radius(radius)?;
    let p = prefactor_1d(sigma);
    let unit: Vec<T> = (1..=radius as i64)
        .into_par_iter()
        .map(|m| gamma_ratio(m, sigma).map(|g| p * g))
        .collect::<Result<_>>()?;
    let scale = h.powf(-sigma);
    let tail_unit = T::lit(2.0) * p * power_tail_sum(T::one() + sigma, radius as u64 + 1);

    let mut weights = vec![T::zero(); 2 * radius + 1];
    for (m, &u) in unit.iter().enumerate() {
        weights[radius + 1 + m] = u * scale;
        weights[radius - 1 - m] = u * scale;
    }
    // sum smallest first
    let near: T = unit.iter().rev().fold(T::zero(), |acc, &u| acc + u);
    let tail_mass = tail_unit * scale;
    Ok(WeightTable {
        sigma,
        h,
        dim: 1,
        radius,
        weights,
        tail_mass,
        diagonal_mass: (T::lit(2.0) * near + tail_unit) * scale,
    })
}

/// Semi-discrete heat kernel G(j, t) = Π_k e^{−2t} I_{|j_k|}(2t).
///
/// Sums to one over j ∈ Z^N for every t ≥ 0.
pub fn heat_kernel(offset: &[i64], t: f64) -> f64 {
    let max_order = offset
        .iter()
        .map(|j| j.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let b = scaled_bessel_i(2.0 * t, max_order);
    offset
        .iter()
        .map(|j| b[j.unsigned_abs() as usize])
        .product()
}

/// Nonnegative, nonincreasing multi-indices with entries ≤ R, excluding 0.
fn canonical_offsets(dim: usize, radius: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, dim: usize, cap: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim {
            if prefix[0] > 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for v in 0..=cap {
            prefix.push(v);
            rec(prefix, dim, v, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(dim), dim, radius, &mut out);
    out
}

/// Weights in any dimension by numerical integration of the heat kernel.
///
/// κ_j = ∫_0^∞ G(j, t) t^{−1−σ/2} dt / (h^σ |Γ(−σ/2)|).  One integral per
/// offset up to sign flips and permutations; the symmetric copies are filled
/// in afterwards, so the symmetry of the table is exact.  The tail mass is
/// C_σ/h^σ − Σ κ with C_σ from [`mass_constant`].
pub fn weights_nd<T: Real>(sigma: T, h: T, dim: usize, radius: usize) -> Result<WeightTable<T>> {
    check_order(sigma)?;
    check_spacing(h)?;
    check_radius(radius)?;
    if dim == 0 {
        return Err(Error::invalid("dim", "dimension must be >= 1"));
    }
    let s = sigma.as_f64();
    let canon = canonical_offsets(dim, radius);
    let rule = HalfLine::default();
    let (raw, est) = rule.integrate(canon.len(), |t, out| {
        let b = scaled_bessel_i(2.0 * t, radius);
        let w = t.powf(-0.5 * s);
        for (o, j) in out.iter_mut().zip(&canon) {
            *o = j.iter().map(|&k| b[k]).product::<f64>() * w;
        }
    })?;
    log::debug!(
        "weights_nd: {} integrals, refinement change {est:e}",
        canon.len()
    );

    let norm = crate::special::gamma(-0.5 * s).abs();
    let scale = h.as_f64().powf(-s);
    let side = 2 * radius + 1;
    let mut weights = vec![0.0f64; side.pow(dim as u32)];
    let mut near = 0.0;
    for (j, integral) in canon.iter().zip(&raw) {
        let kappa = integral / norm * scale;
        for_each_image(j, |image| {
            let flat = image
                .iter()
                .fold(0usize, |acc, &c| acc * side + (c + radius as i64) as usize);
            weights[flat] = kappa;
            near += kappa;
        });
    }
    let total = mass_constant_f64(s, dim)? * scale;
    let tail = (total - near).max(0.0);
    Ok(WeightTable {
        sigma,
        h,
        dim,
        radius,
        weights: weights.into_iter().map(T::lit).collect(),
        tail_mass: T::lit(tail),
        diagonal_mass: T::lit(near + tail),
    })
}

/// Calls `f` once for every distinct signed permutation of `j`.
fn for_each_image(j: &[usize], mut f: impl FnMut(&[i64])) {
    let mut perm: Vec<usize> = j.to_vec();
    perm.sort_unstable();
    loop {
        let nonzero: Vec<usize> = (0..perm.len()).filter(|&k| perm[k] != 0).collect();
        for mask in 0..(1u32 << nonzero.len()) {
            let mut image: Vec<i64> = perm.iter().map(|&v| v as i64).collect();
            for (bit, &k) in nonzero.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    image[k] = -image[k];
                }
            }
            f(&image);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let k = (i..v.len())
        .rev()
        .find(|&k| v[k] > v[i - 1])
        .expect("pivot exists");
    v.swap(i - 1, k);
    v[i..].reverse();
    true
}

/// C_σ = h^σ Σ_{j≠0} κ_j, independent of h.
///
/// In one dimension the sum telescopes to 2^σ Γ((1+σ)/2) / (√π Γ(1+σ/2)).
/// Otherwise C_σ = ∫_0^∞ (1 − G(0, t)) t^{−1−σ/2} dt / |Γ(−σ/2)|.
pub fn mass_constant<T: Real>(sigma: T, dim: usize) -> Result<T> {
    check_order(sigma)?;
    if dim == 0 {
        return Err(Error::invalid("dim", "dimension must be >= 1"));
    }
    if dim == 1 {
        let half = T::lit(0.5);
        return Ok(T::lit(2.0).powf(sigma) * gamma((T::one() + sigma) * half)
            / (T::PI().sqrt() * gamma(T::one() + sigma * half)));
    }
    mass_constant_f64(sigma.as_f64(), dim).map(T::lit)
}

fn mass_constant_f64(s: f64, dim: usize) -> Result<f64> {
    if dim == 1 {
        return mass_constant(s, 1);
    }
    let (raw, _) = HalfLine::default().integrate(1, |t, out| {
        let x = 2.0 * t;
        let g0;
        let one_minus;
        if x < 1.0 {
            // 1 − g0 = 2 Σ_{k≥1} g_k avoids the cancellation near t = 0
            let b = scaled_bessel_i(x, 30);
            g0 = b[0];
            one_minus = 2.0 * b[1..].iter().rev().sum::<f64>();
        } else {
            g0 = scaled_bessel_i(x, 0)[0];
            one_minus = 1.0 - g0;
        }
        let geometric: f64 = (0..dim).map(|k| g0.powi(k as i32)).sum();
        out[0] = one_minus * geometric * t.powf(-0.5 * s);
    })?;
    // beyond the cutoff 1 − G(0,t) is 1 to far below rounding
    let tail = upper_cutoff().powf(-0.5 * s) / (0.5 * s);
    Ok((raw[0] + tail) / gamma(-0.5 * s).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn sigma_one_closed_form() {
        for h in [1.0, 0.25, 0.5] {
            let t = weights_1d(1.0, h, 100).unwrap();
            for j in 1..=100_i64 {
                let want = 1.0 / (PI * h) / ((j * j) as f64 - 0.25);
                assert!(rel(t.weight(&[j]), want) < 1e-12);
                assert_eq!(t.weight(&[j]), t.weight(&[-j]));
            }
        }
    }

    #[test]
    fn tail_start_makes_mass_radius_independent() {
        for s in [0.3, 0.5, 1.0, 1.5, 1.9] {
            let exact: f64 = mass_constant(s, 1).unwrap();
            for r in [1000, 10_000, 20_000] {
                let t = weights_1d(s, 1.0, r).unwrap();
                assert!(rel(t.diagonal_mass(), exact) < 1e-9, "s={s} r={r}");
            }
        }
    }

    #[test]
    fn one_dimensional_mass_constants() {
        let cases = [
            (0.3, 1.030_905_567_611_129_358_6),
            (0.5, 1.078_705_202_376_758_787_1),
            (1.0, 4.0 / PI),
            (1.5, 1.573_787_465_354_795_075_6),
            (1.9, 1.903_165_606_711_629_447_9),
        ];
        for (s, want) in cases {
            assert!(rel(mass_constant(s, 1).unwrap(), want) < 1e-13);
        }
    }

    #[test]
    fn two_dimensional_reference_values() {
        // mpmath quad of the heat-kernel integral
        let cases: [(f64, [i64; 2], f64); 6] = [
            (1.0, [1, 0], 0.280_185_911_456_348_782_07),
            (1.0, [1, 1], 0.047_013_465_725_521_512_725),
            (0.5, [2, 1], 0.010_638_459_253_155_972_65),
            (1.5, [3, 0], 0.004_790_504_875_564_490_385_5),
            (1.9, [0, 1], 0.892_534_114_694_780_1),
            (0.3, [5, 4], 0.000_680_312_064_677_153_057_79),
        ];
        for (s, j, want) in cases {
            let t = weights_nd(s, 1.0, 2, 5).unwrap();
            assert!(
                rel(t.weight(&j), want) < 1e-10,
                "s={s} j={j:?}: {}",
                t.weight(&j)
            );
        }
        let masses = [
            (0.5, 1.364_281_643_528_784_192),
            (1.0, 1.916_182_797_365_700_256_1),
            (1.5, 2.747_066_136_253_920_650_2),
        ];
        for (s, want) in masses {
            assert!(rel(mass_constant(s, 2).unwrap(), want) < 1e-10);
        }
    }

    #[test]
    fn one_dimensional_integral_matches_closed_form() {
        for s in [0.3, 0.5, 1.0, 1.5, 1.9] {
            let a = weights_1d(s, 1.0, 8).unwrap();
            let b = weights_nd(s, 1.0, 1, 8).unwrap();
            for j in 1..=8 {
                assert!(rel(b.weight(&[j]), a.weight(&[j])) < 1e-10);
            }
            // the integral table carries the exact mass, the closed-form one
            // approximates its tail asymptotically
            assert!(rel(b.diagonal_mass(), mass_constant(s, 1).unwrap()) < 1e-12);
            assert!(rel(a.diagonal_mass(), b.diagonal_mass()) < 1e-4);
        }
    }

    #[test]
    fn heat_kernel_is_a_probability() {
        assert_eq!(heat_kernel(&[0, 0], 0.0), 1.0);
        assert_eq!(heat_kernel(&[1, 0], 0.0), 0.0);
        for t in [0.01, 0.7, 3.0, 25.0] {
            let r = 120_i64;
            let b = scaled_bessel_i(2.0 * t, r as usize);
            let line: f64 = b[0] + 2.0 * b[1..].iter().sum::<f64>();
            assert!((line - 1.0).abs() < 1e-13);
            let mut plane = 0.0;
            for i in -r..=r {
                for j in -r..=r {
                    plane += heat_kernel(&[i, j], t);
                }
            }
            assert!((plane - 1.0).abs() < 1e-12, "t={t}: {plane}");
        }
    }

    #[test]
    fn canonical_images_cover_the_block() {
        for (dim, r) in [(1, 4), (2, 3), (3, 2)] {
            let mut seen = std::collections::HashSet::new();
            for j in canonical_offsets(dim, r) {
                for_each_image(&j, |im| assert!(seen.insert(im.to_vec())));
            }
            assert_eq!(seen.len(), (2 * r + 1).pow(dim as u32) - 1);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(weights_1d(0.0, 1.0, 4).is_err());
        assert!(weights_1d(2.0, 1.0, 4).is_err());
        assert!(weights_1d(1.0, -1.0, 4).is_err());
        assert!(weights_1d(1.0, 1.0, 0).is_err());
        assert!(weights_nd(1.0, 1.0, 0, 4).is_err());
        assert!(mass_constant(1.0, 0).is_err());
    }

    #[test]
    fn single_precision_tables() {
        let t = weights_1d(1.0_f32, 1.0, 16).unwrap();
        assert!((t.weight(&[1]) - 4.0 / (3.0 * std::f32::consts::PI)).abs() < 1e-6);
        let n = weights_nd(1.0_f32, 1.0, 2, 3).unwrap();
        assert!((n.weight(&[1, 0]) - 0.280_185_9).abs() < 1e-6);
    }
}
