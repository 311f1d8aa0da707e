//! Finite calculus: binomial coefficients, forward differences and the
//! truncated Newton forward-difference series.

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// `C(s, m)` for nonnegative integers, zero when `m > s`.
///
/// Uses the standard falling factorial `s (s-1) ... (s-m+1) / m!`, which is
/// the one for which the Newton series is an identity. Exact while the
/// result fits in a `u128`.
pub fn newton_binomial(s: u64, m: u64) -> u128 {
    if m > s {
        return 0;
    }
    let m = m.min(s - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        // acc * (s - i) is divisible by (i + 1) at every step.
        acc = acc * u128::from(s - i) / u128::from(i + 1);
    }
    acc
}

pub fn binomial_f64(s: usize, m: usize) -> f64 {
    newton_binomial(s as u64, m as u64) as f64
}

/// `Δ^order f(k)` over a sampled sequence, applying the recursive definition
/// `Δ^{i+1} f(k) = Δ^i f(k+1) - Δ^i f(k)`.
pub fn forward_difference(signal: &[Vector], order: usize, k: usize) -> Result<Vector> {
    let end = k + order;
    if end >= signal.len() {
        return Err(Error::OutOfRange(format!(
            "order-{order} difference at k={k} needs samples up to {end}, have {}",
            signal.len()
        )));
    }
    let mut row: Vec<Vector> = signal[k..=end].to_vec();
    for _ in 0..order {
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    Ok(row.pop().expect("one entry remains"))
}

/// `[Δ^0 f(k), Δ^1 f(k), ..., Δ^order f(k)]` from the samples
/// `f(k), ..., f(k+order)`.
pub fn difference_stack(samples: &[Vector]) -> Vec<Vector> {
    let mut out = Vec::with_capacity(samples.len());
    let mut row: Vec<Vector> = samples.to_vec();
    while let Some(first) = row.first() {
        out.push(first.clone());
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    out
}

/// Truncated Newton series `Σ_{m=0}^{r} C(s, m) Δ^m w(k)` where
/// `diffs = [Δ^0 w(k), ..., Δ^r w(k)]`.
pub fn newton_series_eval(diffs: &[Vector], s: usize) -> Vector {
    let dim = diffs.first().map_or(0, Vector::len);
    let mut out = Vector::zeros(dim);
    for (m, diff) in diffs.iter().enumerate().take(s + 1) {
        out.axpy(binomial_f64(s, m), diff, 1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar_seq(f: impl Fn(f64) -> f64, len: usize) -> Vec<Vector> {
        (0..len).map(|k| Vector::from_element(1, f(k as f64))).collect()
    }

    #[test]
    fn binomial_values() {
        assert_eq!(newton_binomial(4, 2), 6);
        assert_eq!(newton_binomial(2, 5), 0);
        assert_eq!(newton_binomial(0, 0), 1);
        assert_eq!(newton_binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn differences_of_simple_signals() {
        let c = scalar_seq(|_| 3.5, 5);
        assert_eq!(forward_difference(&c, 1, 2).unwrap()[0], 0.0);
        let sq = scalar_seq(|k| k * k, 12);
        for k in 0..8 {
            assert_eq!(forward_difference(&sq, 2, k).unwrap()[0], 2.0);
        }
        // (1-0) ... third difference of k^3 at 0 is 27 - 3*8 + 3*1 - 0 = 6
        let cube = scalar_seq(|k| k * k * k, 4);
        assert_eq!(forward_difference(&cube, 3, 0).unwrap()[0], 6.0);
        assert_eq!(forward_difference(&cube, 0, 3).unwrap()[0], 27.0);
    }

    #[test]
    fn insufficient_samples() {
        let s = scalar_seq(|k| k, 3);
        assert!(matches!(
            forward_difference(&s, 3, 0),
            Err(Error::OutOfRange(_))
        ));
        assert!(forward_difference(&s, 2, 1).is_err());
    }

    #[test]
    fn newton_series_basic_cases() {
        let diffs = vec![
            Vector::from_element(1, 4.0),
            Vector::from_element(1, -2.0),
            Vector::from_element(1, 7.0),
        ];
        assert_eq!(newton_series_eval(&diffs, 0)[0], 4.0);
        let ramp = vec![Vector::from_element(1, 0.0), Vector::from_element(1, 1.0)];
        assert_eq!(newton_series_eval(&ramp, 3)[0], 3.0);
        let c = vec![Vector::from_element(2, 1.6)];
        for s in 0..10 {
            assert_eq!(newton_series_eval(&c, s), Vector::from_element(2, 1.6));
        }
    }

    #[test]
    fn stack_matches_single_differences() {
        let s = scalar_seq(|k| (0.3 * k).sin() + k, 6);
        let stack = difference_stack(&s);
        assert_eq!(stack.len(), 6);
        for (order, v) in stack.iter().enumerate() {
            let direct = forward_difference(&s, order, 0).unwrap();
            assert!((v - direct).norm() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn newton_exact_for_low_degree(
            coeffs in prop::collection::vec(-5.0f64..5.0, 1..=5),
            extra in 0usize..3,
            k in 0usize..10,
            s in 0usize..=20,
        ) {
            let degree = coeffs.len() - 1;
            let r = degree + extra;
            let poly = |t: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
            let samples = scalar_seq(poly, k + r + 1);
            let diffs = difference_stack(&samples[k..]);
            let got = newton_series_eval(&diffs, s)[0];
            let want = poly((k + s) as f64);
            prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }
}
