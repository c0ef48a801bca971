//! Poisson CDF helpers and the abundance-driven saturation rule.

use crate::scalar::Real;

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `P(Y <= k)` for `Y ~ Poisson(a)`; zero for negative `k`.
///
/// Terms are accumulated in log space, so large means do not underflow `e^{-a}`.
pub fn poisson_cdf(k: i64, a: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if a <= 0.0 {
        return 1.0;
    }
    let ln_a = a.ln();
    let mut log_term = -a;
    let mut log_sum = log_term;
    for i in 1..=k {
        log_term += ln_a - (i as f64).ln();
        log_sum = log_add_exp(log_sum, log_term);
        // Past the mode the remaining terms are negligible once the sum is 1.
        if log_term < log_sum - 40.0 && (i as f64) > a {
            break;
        }
    }
    log_sum.exp().min(1.0)
}

/// Smallest `c >= 0` with `F_a(c) >= q`.
pub fn poisson_quantile(q: f64, a: f64) -> u64 {
    if a <= 0.0 {
        return 0;
    }
    let ln_a = a.ln();
    let mut log_term = -a;
    let mut log_sum = log_term;
    let mut c = 0u64;
    let ln_q = q.ln();
    while log_sum < ln_q {
        c += 1;
        log_term += ln_a - (c as f64).ln();
        log_sum = log_add_exp(log_sum, log_term);
        if c > 10 * (a as u64) + 1000 {
            break;
        }
    }
    c
}

/// Saturation level for a neighbour type with `n_j` points: with
/// `a = |annulus|·n_j/|W|`, the `(1-ε)`-quantile of `Poisson(a)`, floored at 1.
pub fn saturation_auto<T: Real>(n_j: usize, annulus_area: T, window_area: T, epsilon: T) -> u32 {
    let a = annulus_area.to_f64_lossy() * n_j as f64 / window_area.to_f64_lossy();
    let c = poisson_quantile(1.0 - epsilon.to_f64_lossy(), a);
    c.clamp(1, u32::MAX as u64) as u32
}

/// Expected ω under independence for saturation `c` and Poisson mean `a`:
/// `c[1 − F_a(c−1)] + a[F_a(c−1) + F_a(c−2)]`.
pub fn t_function(c: u32, a: f64) -> f64 {
    let c_i = c as i64;
    let f1 = poisson_cdf(c_i - 1, a);
    let f2 = poisson_cdf(c_i - 2, a);
    c as f64 * (1.0 - f1) + a * (f1 + f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{DiscreteCDF, Poisson};

    #[test]
    fn cdf_matches_reference() {
        for &a in &[0.01, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 800.0] {
            let reference = Poisson::new(a).unwrap();
            for k in 0..(3.0 * a + 10.0) as u64 {
                let ours = poisson_cdf(k as i64, a);
                assert!((ours - reference.cdf(k)).abs() < 1e-10, "a={a} k={k}");
            }
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(saturation_auto(100, 1.0, 100.0, 0.01), 4);
        assert_eq!(saturation_auto(1000, 1.0, 100.0, 0.01), 18);
        assert_eq!(saturation_auto(0, 1.0, 100.0, 0.01), 1);
        assert!(poisson_cdf(3, 1.0) < 0.99 && poisson_cdf(4, 1.0) >= 0.99);
    }

    #[test]
    fn saturation_non_decreasing_in_abundance() {
        let mut last = 0;
        for n in 0..5000 {
            let c = saturation_auto(n, std::f64::consts::PI, 1e4, 0.01);
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn t_at_c1_a1_is_one() {
        assert!((t_function(1, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_tends_to_twice_a() {
        for &a in &[0.3f64, 1.0, 4.0, 17.5] {
            let c = a.ceil() as u32 + 40;
            assert!((t_function(c, a) - 2.0 * a).abs() < 1e-9);
        }
    }

    #[test]
    fn t_is_non_decreasing() {
        for &a in &[0.1, 0.7, 1.0, 3.0, 9.0, 30.0] {
            for c in 1..80 {
                assert!(t_function(c + 1, a) >= t_function(c, a) - 1e-12);
            }
        }
    }
}
