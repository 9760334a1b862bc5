//! Nonasymptotic one-step probabilities for `nu = SN(diag(p^lambda) A diag(p^mu))`
//! with `A` Haar on `GL_N(Z_p)`, and the cokernel probability of a Haar
//! submatrix. `len` is the number of nonzero parts of `lambda`.

use num_traits::{One, Zero};

use super::{pochhammer, qpow, Q};
use crate::error::{Error, Result};

fn poch(t: &Q, n: i64) -> Result<Q> {
    pochhammer(t, n)
}

/// `prod_{j=r}^N (1 - t^{j-len}) / (1 - t^j)`: lower bound (equality when
/// `mu_{r-1} > mu_r`) for `Pr(nu_j = mu_j for all j >= r)`.
pub fn stay_prob(r: u64, n: u64, len: u64, t: &Q) -> Result<Q> {
    if r < 1 || r > n {
        return Err(Error::Domain(format!("need 1 <= r <= N, got r={r}, N={n}")));
    }
    if r <= len {
        return Ok(Q::zero());
    }
    let mut acc = Q::one();
    for j in r..=n {
        acc *= Q::one() - qpow(t, (j - len) as i64);
        acc /= Q::one() - qpow(t, j as i64);
    }
    Ok(acc)
}

/// Bracket for the single-box event `nu_r = mu_r + 1, nu_j = mu_j (j > r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleBoxBounds {
    pub lower: Q,
    pub upper: Q,
}

fn check_range(r: u64, n: u64, len: u64) -> Result<()> {
    if len + 1 > r || r > n {
        return Err(Error::Domain(format!(
            "need len+1 <= r <= N, got len={len}, r={r}, N={n}"
        )));
    }
    Ok(())
}

/// `(t;t)_{r-1} (t;t)_{N-len} / ((t;t)_N (t;t)_{r-len})`.
fn ratio(r: u64, n: u64, len: u64, t: &Q) -> Result<Q> {
    Ok(poch(t, r as i64 - 1)? * poch(t, (n - len) as i64)?
        / (poch(t, n as i64)? * poch(t, (r - len) as i64)?))
}

/// Lower and upper bounds `((1 - t^{r-len}) C, C)` where `m` is the
/// multiplicity of `mu_r` in `mu`.
pub fn single_box_bounds(r: u64, n: u64, m: u64, len: u64, t: &Q) -> Result<SingleBoxBounds> {
    check_range(r, n, len)?;
    if m < 1 {
        return Err(Error::Domain("multiplicity m must be at least 1".into()));
    }
    let one = Q::one();
    let c = (qpow(t, (r - len) as i64) - qpow(t, r as i64)) * (&one - qpow(t, m as i64))
        / (&one - t)
        * ratio(r, n, len, t)?;
    let lower = (&one - qpow(t, (r - len) as i64)) * &c;
    Ok(SingleBoxBounds { lower, upper: c })
}

/// Upper bound for `Pr(sum_{j >= r} (nu_j - mu_j) >= 2)`.
pub fn two_jump_bound(r: u64, n: u64, len: u64, t: &Q) -> Result<Q> {
    check_range(r, n, len)?;
    let one = Q::one();
    let a = qpow(t, (r - len) as i64);
    let bracket = &one - &a
        + &a * (&one - qpow(t, (n - r + 1) as i64)) * (&one - qpow(t, len as i64)) / (&one - t);
    Ok(&one - ratio(r, n, len, t)? * bracket)
}

/// The same bound with the unit-cokernel term replaced by
/// [`coker_unit_prob`]. The literal bound above is violated once `lambda` has
/// a part `>= 2` (for `len = 1` it is identically 0).
pub fn two_jump_bound_corrected(r: u64, n: u64, len: u64, t: &Q) -> Result<Q> {
    check_range(r, n, len)?;
    let one = Q::one();
    let a = qpow(t, (r - len) as i64);
    let unit = &a * (&one - qpow(t, (n - r + 1) as i64)) * (&one - qpow(t, len as i64)) / (&one - t) * (&one - &a);
    Ok(&one - ratio(r, n, len, t)? * (&one - &a + unit))
}

/// `Pr(SN(A') = (1,0,...,0))` for an `n x m` submatrix `A'` of a Haar element
/// of `GL_N(Z_p)`, `1 <= n <= m <= N`.
///
/// For `m = N` the rows of `A'` are part of an invertible matrix, so the
/// probability is exactly 0 (the closed form would need `(t;t)_{-1}`).
pub fn coker_single_box_prob(big_n: u64, n: u64, m: u64, t: &Q) -> Result<Q> {
    if n < 1 || n > m || m > big_n {
        return Err(Error::Domain(format!(
            "need 1 <= n <= m <= N, got n={n}, m={m}, N={big_n}"
        )));
    }
    if m == big_n {
        return Ok(Q::zero());
    }
    let (bn, n, m) = (big_n as i64, n as i64, m as i64);
    let num = qpow(t, m - n + 1) * poch(t, bn - m)? * poch(t, m)? * poch(t, n)? * poch(t, bn - n)?;
    let den = poch(t, 1)? * poch(t, bn - m - 1)? * poch(t, n - 1)? * poch(t, m - n + 1)? * poch(t, bn)?;
    Ok(num / den)
}

/// `Pr(SN(A') = (1,0,...,0))` exactly. [`coker_single_box_prob`] is the
/// probability that `A' mod p` has corank one; given that, the single nonzero
/// part equals 1 unless the next digit also lies in an `(m-n+1)`-codimensional
/// subspace.
pub fn coker_unit_prob(big_n: u64, n: u64, m: u64, t: &Q) -> Result<Q> {
    Ok(coker_single_box_prob(big_n, n, m, t)? * (Q::one() - qpow(t, (m - n + 1) as i64)))
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;

    #[test]
    fn stay_examples() {
        let h = rat(1, 2);
        assert_eq!(stay_prob(3, 4, 1, &h).unwrap(), rat(4, 5));
        assert_eq!(stay_prob(2, 5, 0, &h).unwrap(), int(1));
        assert_eq!(stay_prob(2, 5, 2, &h).unwrap(), int(0));
        assert!(stay_prob(0, 5, 0, &h).is_err());
    }

    #[test]
    fn single_box_examples() {
        let h = rat(1, 2);
        let b = single_box_bounds(2, 2, 1, 1, &h).unwrap();
        assert_eq!(b.upper, rat(1, 3));
        assert_eq!(b.lower, rat(1, 6));
        let z = single_box_bounds(3, 4, 2, 0, &h).unwrap();
        assert_eq!(z.upper, int(0));
        assert_eq!(z.lower, int(0));
        assert!(single_box_bounds(1, 4, 1, 1, &h).is_err());
    }

    #[test]
    fn two_jump_examples() {
        let h = rat(1, 2);
        assert_eq!(two_jump_bound(3, 4, 0, &h).unwrap(), int(0));
        let v = two_jump_bound(3, 4, 1, &h).unwrap();
        assert!(v >= int(0) && v <= int(1));
    }

    #[test]
    fn bounds_in_unit_interval_sweep() {
        for t in [rat(1, 2), rat(1, 3), rat(1, 5), rat(9, 10)] {
            for (r, n, m, len) in [(2, 2, 1, 1), (3, 4, 2, 1), (3, 5, 3, 2), (4, 6, 1, 1), (5, 5, 1, 3)] {
                let b = single_box_bounds(r, n, m, len, &t).unwrap();
                assert!(int(0) <= b.lower && b.lower <= b.upper && b.upper <= int(1));
                let j = two_jump_bound(r, n, len, &t).unwrap();
                assert!(int(0) <= j && j <= int(1), "{r} {n} {len} {t}: {j}");
                let s = stay_prob(r, n, len, &t).unwrap();
                assert!(int(0) <= s && s <= int(1));
            }
        }
    }

    #[test]
    fn coker_examples() {
        let h = rat(1, 2);
        assert_eq!(coker_single_box_prob(2, 1, 1, &h).unwrap(), rat(1, 3));
        assert_eq!(coker_single_box_prob(3, 3, 3, &h).unwrap(), int(0));
        assert!(coker_single_box_prob(3, 2, 1, &h).is_err());
        // Leading factor t^{m-n+1} sends the value to 0 with t.
        let small = coker_single_box_prob(4, 1, 2, &rat(1, 1_000_000)).unwrap();
        assert!(small < rat(1, 1_000_000_000));
    }

    #[test]
    fn unit_cokernel_enumeration() {
        // GL_2(Z/4): 96 elements, 32 with a_11 even, 16 with a_11 = 2.
        let h = rat(1, 2);
        assert_eq!(coker_single_box_prob(2, 1, 1, &h).unwrap(), rat(32, 96));
        assert_eq!(coker_unit_prob(2, 1, 1, &h).unwrap(), rat(16, 96));
    }

    #[test]
    fn corrected_two_jump_dominates_literal() {
        let h = rat(1, 2);
        assert_eq!(two_jump_bound(3, 4, 1, &h).unwrap(), int(0));
        assert_eq!(two_jump_bound_corrected(3, 4, 1, &h).unwrap(), rat(1, 20));
        assert_eq!(two_jump_bound_corrected(3, 4, 0, &h).unwrap(), int(0));
    }
}
