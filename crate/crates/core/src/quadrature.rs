//! Double-exponential quadrature on the half line.
//!
//! The substitution t = exp(sinh v) maps v < 0 onto (0, 1) and v > 0 onto
//! (1, ∞).  Algebraic behaviour at either end of the t-axis becomes
//! double-exponential decay in v, so the trapezoidal rule in v converges
//! geometrically.  Many integrals sharing the same nodes are evaluated
//! together, which is what makes the N-d weight tables affordable: the
//! Bessel factors are computed once per node and reused for every offset.

use rayon::prelude::*;

use crate::{Error, Result};

/// Lower end of the v-range; t there is about 1e-291, still a normal f64.
const V_LO: f64 = -7.2;
/// Upper end; t there is about e^332.
const V_HI: f64 = 6.5;

#[derive(Clone, Copy, Debug)]
pub(crate) struct HalfLine {
    /// Relative tolerance on successive refinements.
    pub tol: f64,
    /// Absolute floor below which differences are ignored.
    pub floor: f64,
    pub max_level: u32,
}

impl Default for HalfLine {
    fn default() -> Self {
        HalfLine {
            tol: 1e-12,
            floor: 1e-300,
            max_level: 9,
        }
    }
}

/// Largest t the rule samples; callers add analytic tails beyond it.
pub(crate) fn upper_cutoff() -> f64 {
    V_HI.sinh().exp()
}

impl HalfLine {
    /// Integrates `n` functions over (0, ∞).
    ///
    /// `f(t, out)` must write `t · g_k(t)` into `out[k]` (the extra factor of
    /// t is the Jacobian of the logarithmic part of the map).  Returns the
    /// integrals and the largest relative change between the last two levels.
    pub fn integrate<F>(&self, n: usize, f: F) -> Result<(Vec<f64>, f64)>
    where
        F: Fn(f64, &mut [f64]) + Sync,
    {
        let sample = |v: f64| -> Vec<f64> {
            let t = v.sinh().exp();
            let mut out = vec![0.0; n];
            f(t, &mut out);
            let w = v.cosh();
            out.iter_mut().for_each(|x| *x *= w);
            out
        };
        // evaluate in parallel, sum in node order: results are reproducible
        let sum_nodes = |nodes: Vec<f64>| -> Vec<f64> {
            let samples: Vec<Vec<f64>> = nodes.into_par_iter().map(&sample).collect();
            samples.iter().fold(vec![0.0; n], |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            })
        };

        // level 0: unit step on the integer lattice inside [V_LO, V_HI]
        let mut step = 1.0;
        let lattice = |step: f64, odd_only: bool| -> Vec<f64> {
            let k_lo = (V_LO / step).ceil() as i64;
            let k_hi = (V_HI / step).floor() as i64;
            (k_lo..=k_hi)
                .filter(|k| !odd_only || k.rem_euclid(2) == 1)
                .map(|k| k as f64 * step)
                .collect()
        };
        let mut raw = sum_nodes(lattice(step, false));
        let mut previous: Vec<f64> = raw.iter().map(|s| s * step).collect();
        let mut change = f64::INFINITY;
        for level in 1..=self.max_level {
            step *= 0.5;
            let fresh = sum_nodes(lattice(step, true));
            raw.iter_mut().zip(&fresh).for_each(|(a, b)| *a += b);
            let current: Vec<f64> = raw.iter().map(|s| s * step).collect();
            change = current
                .iter()
                .zip(&previous)
                .map(|(c, p)| {
                    let d = (c - p).abs();
                    if d <= self.floor {
                        0.0
                    } else {
                        d / c.abs().max(self.floor)
                    }
                })
                .fold(0.0, f64::max);
            previous = current;
            if level >= 3 && change <= self.tol {
                return Ok((previous, change));
            }
        }
        Err(Error::Quadrature {
            estimate: change,
            tolerance: self.tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebraic_endpoint_behaviour() {
        // ∫ t^{a-1} e^{-t} dt = Γ(a), with a singular origin for a < 1
        let a = [0.05_f64, 0.5, 1.0, 3.5];
        let rule = HalfLine::default();
        let (vals, est) = rule
            .integrate(a.len(), |t, out| {
                for (o, &ak) in out.iter_mut().zip(&a) {
                    *o = (ak * t.ln() - t).exp();
                }
            })
            .unwrap();
        assert!(est <= 1e-12);
        let want = [
            19.470_085_311_255_5,
            1.772_453_850_905_516,
            1.0,
            3.323_350_970_447_842_6,
        ];
        for (v, w) in vals.iter().zip(want) {
            assert!(((v - w) / w).abs() < 1e-11, "{v} vs {w}");
        }
    }

    #[test]
    fn slow_algebraic_decay() {
        // ∫ t^{-1/2}/(1+t) dt = π
        let (vals, _) = HalfLine::default()
            .integrate(1, |t, out| out[0] = t.sqrt() / (1.0 + t))
            .unwrap();
        assert!((vals[0] - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        // a jump is only resolved at first order
        let rule = HalfLine {
            max_level: 5,
            ..HalfLine::default()
        };
        let err = rule.integrate(1, |t, out| out[0] = if t < 1.3 { t } else { 0.0 });
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }
}
