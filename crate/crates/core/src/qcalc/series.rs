//! Floating-point q-series: `(t;t)_inf` and the pmf of the index of the lowest
//! path above 0 for the flat-zero start.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TERM_TOL: f64 = 1e-15;
const MAX_TERMS: usize = 10_000;

/// A truncated series: value, number of terms used, and a bound on the
/// absolute remainder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    pub remainder_bound: f64,
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} outside (0,1)")));
    }
    Ok(())
}

/// `(t;t)_inf`, multiplying factors until `t^i < 1e-17`.
///
/// The remainder bound is on the relative error: the omitted factors satisfy
/// `|log prod| <= t^{M+1} / ((1-t)(1-t^{M+1}))`.
pub fn pochhammer_inf(t: f64) -> Result<SeriesValue> {
    check_t(t)?;
    let mut acc = 1.0;
    let mut ti = 1.0;
    let mut terms = 0;
    while terms < MAX_TERMS {
        ti *= t;
        if ti < 1e-17 {
            break;
        }
        acc *= 1.0 - ti;
        terms += 1;
    }
    let rem = ti / ((1.0 - t) * (1.0 - ti));
    Ok(SeriesValue { value: acc, terms, remainder_bound: rem.exp_m1() })
}

/// Log-magnitude of the `m`-th summand, with `log (t;t)_m` carried by the caller.
fn log_term(n: i64, m: usize, t: f64, a: f64, log_poch_m: f64) -> f64 {
    let e = (n - m as i64 + 1) as f64;
    -a * (e * t.ln()).exp() + (m * m.saturating_sub(1)) as f64 / 2.0 * t.ln() - log_poch_m
}

fn sum_terms(n: i64, t: f64, big_t: f64, cutoff: Option<usize>) -> Result<SeriesValue> {
    check_t(t)?;
    if !(big_t >= 0.0) || !big_t.is_finite() {
        return Err(Error::Domain(format!("T = {big_t} must be finite and nonnegative")));
    }
    let a = big_t / (1.0 - t);
    let mut sum = 0.0;
    let mut log_poch = 0.0;
    let mut m = 0usize;
    let limit = cutoff.unwrap_or(MAX_TERMS);
    let bound = loop {
        let lt = log_term(n, m, t, a, log_poch);
        let mag = lt.exp();
        // Beyond this m consecutive magnitudes shrink by at least
        // t^m / (1 - t^{m+1}) < 1, so the alternating tail is bounded by its
        // first term.
        let decreasing = t.powi(m as i32) < 1.0 - t.powi(m as i32 + 1);
        if m == limit || (cutoff.is_none() && decreasing && mag < TERM_TOL && m > 0) {
            break if decreasing { mag } else { f64::INFINITY };
        }
        sum += if m % 2 == 0 { mag } else { -mag };
        m += 1;
        log_poch += (1.0 - t.powi(m as i32)).ln();
    };
    let inf = pochhammer_inf(t)?;
    Ok(SeriesValue {
        value: sum / inf.value,
        terms: m,
        remainder_bound: bound / inf.value + (sum / inf.value).abs() * inf.remainder_bound,
    })
}

/// `Pr(X = n)` for `X` the index of the lowest path above 0 at time `T`,
/// started from the flat zero configuration:
/// `(1/(t;t)_inf) sum_{m>=0} exp(-T t^{n-m+1}/(1-t)) (-1)^m t^{m(m-1)/2} / (t;t)_m`.
pub fn lowest_positive_pmf(n: i64, t: f64, big_t: f64) -> Result<SeriesValue> {
    sum_terms(n, t, big_t, None)
}

/// Same series truncated to exactly `terms` summands.
pub fn lowest_positive_pmf_with_cutoff(n: i64, t: f64, big_t: f64, terms: usize) -> Result<SeriesValue> {
    sum_terms(n, t, big_t, Some(terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_inf_half() {
        // Euler function at 1/2.
        let v = pochhammer_inf(0.5).unwrap();
        assert!((v.value - 0.288_788_095_086_602_4).abs() < 1e-15);
        assert!(v.remainder_bound < 1e-15);
        assert!(pochhammer_inf(1.0).is_err());
    }

    #[test]
    fn pmf_normalizes() {
        let s: f64 = (-40..=40).map(|n| lowest_positive_pmf(n, 0.5, 1.0).unwrap().value).sum();
        assert!((s - 1.0).abs() < 1e-9, "{s}");
    }

    #[test]
    fn pmf_shift_identity() {
        for n in -3..=3 {
            let a = lowest_positive_pmf(n + 1, 0.5, 2.0).unwrap().value;
            let b = lowest_positive_pmf(n, 0.5, 1.0).unwrap().value;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pmf_small_time_vanishes() {
        for n in -2..=2 {
            let v = lowest_positive_pmf(n, 0.5, 1e-9).unwrap().value;
            assert!(v.abs() < 1e-6, "{n}: {v}");
        }
    }

    #[test]
    fn pmf_is_a_probability() {
        for n in -10..=10 {
            let v = lowest_positive_pmf(n, 0.3, 2.5).unwrap();
            assert!(v.value > -1e-12 && v.value < 1.0 + 1e-12);
            assert!(v.remainder_bound < 1e-12);
        }
    }

    #[test]
    fn cutoff_variant_agrees() {
        let full = lowest_positive_pmf(0, 0.5, 1.0).unwrap();
        let cut = lowest_positive_pmf_with_cutoff(0, 0.5, 1.0, full.terms).unwrap();
        assert_eq!(full.value, cut.value);
        assert!(lowest_positive_pmf(0, 1.5, 1.0).is_err());
    }
}
