//! Exact rational q-series and the closed-form probabilities built on them.
//!
//! Everything here is evaluated in `BigRational` arithmetic; the only
//! floating-point entry points are the Example-style lowest-path pmf and the
//! asymptotic time constant.

mod counting;
mod lemmas;
mod series;

pub use counting::{
    c_n, corank_pmf_corner, corank_pmf_iid, corner_corank_pmf, expected_kernel,
    expected_kernel_from_pmf, rank_count_rect, CnMode, CnValue, Cutoff,
};
pub use lemmas::{
    coker_single_box_prob, coker_unit_prob, single_box_bounds, stay_prob, two_jump_bound, two_jump_bound_corrected,
};
pub use series::{lowest_positive_pmf, lowest_positive_pmf_with_cutoff, pochhammer_inf, SeriesValue};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational value.
pub type Q = BigRational;

pub fn rat(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `t^k` for any integer `k` (`t != 0`).
pub fn qpow(t: &Q, k: i64) -> Q {
    let base = if k < 0 { t.recip() } else { t.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = Q::one();
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

pub fn to_f64(x: &Q) -> f64 {
    // Scale large operands so the conversion stays finite and accurate.
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let bits = x.numer().bits().max(x.denom().bits()) as i64;
    let shift = (bits - 900).max(0) as usize;
    let n = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// The clock-rate parameter `t`, strictly between 0 and 1.
#[derive(Clone, Debug, PartialEq)]
pub struct RateModel {
    t: Q,
}

impl RateModel {
    pub fn new(t: Q) -> Result<Self> {
        if !t.is_positive() || t >= Q::one() {
            return Err(Error::Domain(format!("t = {t} outside (0,1)")));
        }
        Ok(RateModel { t })
    }

    /// `t = 1/p`.
    pub fn from_prime(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!("p = {p} must be at least 2")));
        }
        RateModel::new(rat(1, p as i64))
    }

    pub fn t(&self) -> &Q {
        &self.t
    }

    pub fn t_f64(&self) -> f64 {
        to_f64(&self.t)
    }

    /// Clock rate `t^i` of absolute index `i`.
    pub fn rate(&self, i: i64) -> Q {
        qpow(&self.t, i)
    }
}

/// `(t;t)_n = prod_{i=1}^n (1 - t^i)`; negative `n` is a domain error.
pub fn pochhammer(t: &Q, n: i64) -> Result<Q> {
    if n < 0 {
        return Err(Error::Domain(format!("(t;t)_{n} with negative index")));
    }
    let mut acc = Q::one();
    let mut ti = Q::one();
    for _ in 0..n {
        ti *= t;
        acc *= Q::one() - &ti;
    }
    Ok(acc)
}

/// Gaussian binomial `(t;t)_n / ((t;t)_k (t;t)_{n-k})`, zero outside `0 <= k <= n`.
pub fn qbinom(n: i64, k: i64, t: &Q) -> Q {
    if k < 0 || n < 0 || k > n {
        return Q::zero();
    }
    // Multiplicative form avoids three full products.
    let k = k.min(n - k);
    let mut acc = Q::one();
    for i in 0..k {
        acc *= Q::one() - qpow(t, n - i);
        acc /= Q::one() - qpow(t, i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_examples() {
        let h = rat(1, 2);
        assert_eq!(pochhammer(&h, 3).unwrap(), rat(21, 64));
        assert_eq!(pochhammer(&h, 0).unwrap(), int(1));
        assert_eq!(pochhammer(&h, 1).unwrap(), rat(1, 2));
        assert!(pochhammer(&h, -1).is_err());
    }

    #[test]
    fn qbinom_examples() {
        let h = rat(1, 2);
        assert_eq!(qbinom(4, 2, &h), rat(35, 16));
        assert_eq!(qbinom(7, 0, &h), int(1));
        assert_eq!(qbinom(2, 3, &h), int(0));
        let via_poch = pochhammer(&h, 6).unwrap()
            / (pochhammer(&h, 2).unwrap() * pochhammer(&h, 4).unwrap());
        assert_eq!(qbinom(6, 2, &h), via_poch);
    }

    #[test]
    fn rate_model_bounds() {
        assert!(RateModel::new(int(1)).is_err());
        assert!(RateModel::new(int(0)).is_err());
        let m = RateModel::from_prime(3).unwrap();
        assert_eq!(m.rate(-2), int(9));
        assert!((m.t_f64() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn to_f64_huge_operands() {
        let x = qpow(&rat(1, 3), 2000) / qpow(&rat(1, 3), 1999);
        assert!((to_f64(&x) - 1.0 / 3.0).abs() < 1e-15);
    }
}
