use crate::scalar::{check_order, Real};
use crate::Result;

// B_2k / (2k)! for k = 1..6
const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
];

const DIRECT_TERMS: u64 = 32;

/// Σ_{m ≥ start} m^{−s} for s > 1 and start ≥ 1.
///
/// Terms below `max(start, 32)` are summed directly; the remainder is the
/// Euler–Maclaurin expansion (integral, half term, six Bernoulli corrections).
pub fn power_tail_sum<T: Real>(s: T, start: u64) -> T {
    debug_assert!(s > T::one() && start >= 1);
    let n0 = start.max(DIRECT_TERMS);
    let mut direct = T::zero();
    // smallest terms first
    for m in (start..n0).rev() {
        direct = direct + T::from_u64(m).unwrap().powf(-s);
    }
    let n = T::from_u64(n0).unwrap();
    let mut tail = n.powf(T::one() - s) / (s - T::one()) + T::lit(0.5) * n.powf(-s);
    // derivative factor s (s+1) ... (s + 2k − 2) times n^{−s−2k+1}
    let mut rising = s;
    let mut power = n.powf(-s - T::one());
    let n2 = n * n;
    for (k, &c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        tail = tail + T::lit(c) * rising * power;
        rising = rising * (s + T::of_usize(2 * k + 1)) * (s + T::of_usize(2 * k + 2));
        power = power / n2;
    }
    tail + direct
}

/// ζ(1 + σ) for σ ∈ (0, 2).
pub fn zeta_value<T: Real>(sigma: T) -> Result<T> {
    check_order(sigma)?;
    Ok(power_tail_sum(T::one() + sigma, 1))
}
