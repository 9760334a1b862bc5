//! Rank counts over finite fields, corank laws and the time constant `c_N`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{int, pochhammer, qbinom, qpow, rat, to_f64, Q};
use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};

fn poch(t: &Q, n: u64) -> Q {
    pochhammer(t, n as i64).expect("nonnegative index")
}

/// Number of `n x k` matrices over `F_q` of rank `r` (zero when `r > min(n,k)`).
pub fn rank_count_rect(n: u64, k: u64, r: u64, q: u64) -> BigInt {
    if r > n.min(k) {
        return BigInt::zero();
    }
    let tq = rat(1, q as i64);
    let e = (r * n + r * k) as i64 - (r * r) as i64;
    let v = qpow(&int(q as i64), e) * poch(&tq, n) * poch(&tq, k)
        / (poch(&tq, r) * poch(&tq, n - r) * poch(&tq, k - r));
    assert!(v.is_integer(), "rank count must be an integer");
    v.to_integer()
}

/// Law of the rank `r` of the bottom `n x k` block of a uniform full-rank
/// `(n+d) x k` matrix over `F_q`. Keys are ranks.
pub fn corner_corank_pmf(n: u64, d: u64, k: u64, q: u64) -> Result<BTreeMap<u64, Q>> {
    if k > n + d {
        return Err(Error::Domain(format!(
            "no full-rank ({}) x {k} matrix exists",
            n + d
        )));
    }
    let tq = rat(1, q as i64);
    let denom = qbinom((n + d) as i64, k as i64, &tq);
    let lo = k.saturating_sub(d);
    let mut out = BTreeMap::new();
    for r in lo..=n.min(k) {
        let w = qpow(&tq, ((n - r) * (k - r)) as i64)
            * qbinom(d as i64, (k - r) as i64, &tq)
            * qbinom(n as i64, r as i64, &tq)
            / &denom;
        if !w.is_zero() {
            out.insert(r, w);
        }
    }
    Ok(out)
}

/// Corank law of a uniform `n x n` matrix over `F_q`, indexed by corank.
pub fn corank_pmf_iid(n: u64, q: u64) -> Vec<Q> {
    let total = Q::from_integer(BigInt::from(q).pow((n * n) as u32));
    (0..=n)
        .map(|c| Q::from_integer(rank_count_rect(n, n, n - c, q)) / &total)
        .collect()
}

/// Corank law of the top-left `n x n` corner of a uniform element of
/// `GL_{n+extra}(F_q)`, indexed by corank.
pub fn corank_pmf_corner(n: u64, extra: u64, q: u64) -> Vec<Q> {
    let by_rank = corner_corank_pmf(n, extra, n, q).expect("k = n <= n + extra");
    (0..=n)
        .map(|c| by_rank.get(&(n - c)).cloned().unwrap_or_else(Q::zero))
        .collect()
}

/// `E[#ker]` for the corner ensemble (`extra = Some(D)`) or for uniform
/// matrices (`extra = None`).
pub fn expected_kernel(n: u64, extra: Option<u64>, q: u64) -> Q {
    let tq = rat(1, q as i64);
    match extra {
        None => int(2) - qpow(&tq, n as i64),
        Some(dd) => {
            let one = Q::one();
            (&one - qpow(&tq, dd as i64) + &one - qpow(&tq, n as i64))
                / (&one - qpow(&tq, (n + dd) as i64))
        }
    }
}

/// `sum_r q^{k-r} pmf(r)` for a rank law of a matrix with `k` columns.
pub fn expected_kernel_from_pmf(pmf: &BTreeMap<u64, Q>, k: u64, q: u64) -> Q {
    pmf.iter()
        .map(|(&r, w)| qpow(&int(q as i64), (k - r) as i64) * w)
        .fold(Q::zero(), |a, b| a + b)
}

/// Which expectation defines `c_N` in exact mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// `E[1(X <= r_N)(t^{-X} - 1)]`.
    Indicator,
    /// `E[t^{-X} - 1]`; asymptotically equivalent (the cutoff does not change
    /// the limit).
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnMode {
    Exact(Cutoff),
    Asymptotic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CnValue {
    /// Exact rational value (exact mode only).
    pub exact: Option<Q>,
    pub value: f64,
}

/// Time-scaling constant converting matrix steps to sea time.
pub fn c_n(spec: &EnsembleSpec, r_n: u64, mode: CnMode) -> Result<CnValue> {
    if r_n < 1 {
        return Err(Error::Domain("r_N must be at least 1".into()));
    }
    let t = rat(1, spec.p as i64);
    let pmf = spec.corank_pmf()?;
    if pmf.first().is_some_and(|w| w.is_one()) {
        return Err(Error::DegenerateEnsemble);
    }
    let lead = qpow(&t, -(r_n as i64));
    match mode {
        CnMode::Exact(cut) => {
            let mut e = Q::zero();
            for (x, w) in pmf.iter().enumerate() {
                if cut == Cutoff::Indicator && x as u64 > r_n {
                    break;
                }
                e += w * (qpow(&t, -(x as i64)) - Q::one());
            }
            let v = lead / e;
            Ok(CnValue { value: to_f64(&v), exact: Some(v) })
        }
        CnMode::Asymptotic => {
            let v = match &spec.kind {
                EnsembleKind::IidHaar => lead,
                EnsembleKind::Corner { extra } => lead / (Q::one() - qpow(&t, *extra as i64)),
                EnsembleKind::FixedSn { .. } => {
                    return Err(Error::Domain(
                        "no asymptotic form for fixed singular numbers; use exact mode".into(),
                    ))
                }
            };
            Ok(CnValue { value: to_f64(&v), exact: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_count_examples() {
        assert_eq!(rank_count_rect(2, 2, 1, 2), BigInt::from(9));
        assert_eq!(rank_count_rect(2, 1, 1, 2), BigInt::from(3));
        assert_eq!(rank_count_rect(3, 2, 0, 3), BigInt::from(1));
        assert_eq!(rank_count_rect(2, 2, 3, 2), BigInt::zero());
    }

    #[test]
    fn rank_counts_sum_to_all_matrices() {
        for q in [2u64, 3] {
            for n in 0..=3u64 {
                for k in 0..=3u64 {
                    let s: BigInt = (0..=3).map(|r| rank_count_rect(n, k, r, q)).sum();
                    assert_eq!(s, BigInt::from(q).pow((n * k) as u32));
                }
            }
        }
    }

    #[test]
    fn corner_pmf_examples() {
        let m = corner_corank_pmf(1, 1, 1, 2).unwrap();
        assert_eq!(m[&1], rat(2, 3));
        assert_eq!(m[&0], rat(1, 3));
        let m = corner_corank_pmf(3, 0, 2, 2).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[&2], int(1));
        let m = corner_corank_pmf(3, 2, 2, 3).unwrap();
        assert_eq!(m.values().fold(Q::zero(), |a, b| a + b), int(1));
        assert!(corner_corank_pmf(1, 1, 3, 2).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(expected_kernel(1, None, 2), rat(3, 2));
        assert_eq!(expected_kernel(1, Some(1), 2), rat(4, 3));
        let big = to_f64(&expected_kernel(60, None, 2));
        assert!((big - 2.0).abs() < 1e-15);
    }

    #[test]
    fn c_n_examples() {
        let spec = EnsembleSpec::iid_haar(2, 2, 1);
        let v = c_n(&spec, 1, CnMode::Exact(Cutoff::Indicator)).unwrap();
        assert_eq!(v.exact.unwrap(), rat(32, 9));
        let corner = EnsembleSpec::corner(5, 3, 2, 1);
        let a = c_n(&corner, 2, CnMode::Asymptotic).unwrap();
        assert!((a.value - 4.0 / (1.0 - 0.125)).abs() < 1e-12);
        let big = EnsembleSpec::iid_haar(30, 2, 1);
        let e = c_n(&big, 5, CnMode::Exact(Cutoff::Indicator)).unwrap().value;
        let a = c_n(&big, 5, CnMode::Asymptotic).unwrap().value;
        assert!((e / a - 1.0).abs() < 0.01, "{e} vs {a}");
        let full = c_n(&big, 5, CnMode::Exact(Cutoff::Full)).unwrap().value;
        assert!((full / e - 1.0).abs() < 1e-3);
    }

    #[test]
    fn c_n_degenerate() {
        let unit = EnsembleSpec::fixed_sn(vec![0, 0], 2, 2);
        assert_eq!(
            c_n(&unit, 1, CnMode::Exact(Cutoff::Indicator)),
            Err(Error::DegenerateEnsemble)
        );
        let edge = EnsembleSpec::fixed_sn(vec![1, 0, 0, 0, 0, 0], 2, 2);
        let v = c_n(&edge, 6, CnMode::Exact(Cutoff::Indicator)).unwrap();
        assert_eq!(v.exact.unwrap(), int(64));
    }
}
