//! `F_d`-truncated sea configurations in conjugate form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signatures::{ExtInt, Signature, WindowSignature};

/// A truncated configuration: every coordinate at index `<= anchor` is frozen
/// at `d`; the others have values in `base..d`, encoded by the level indices
/// `conj[k] = max { i : value_i >= base + 1 + k }` for `k = 0..d-base`, so
/// `conj.last() == anchor`. With `last = Some(n)` the coordinates above `n`
/// are `-inf` (finitely many walkers); otherwise the tail is flat at `base`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncState {
    d: i64,
    base: i64,
    conj: Vec<i64>,
    last: Option<i64>,
}

impl TruncState {
    pub fn new(d: i64, base: i64, conj: Vec<i64>, last: Option<i64>) -> Result<Self> {
        if base >= d || conj.len() != (d - base) as usize {
            return Err(Error::InvalidSignature(format!(
                "need base < d and d - base level indices (d={d}, base={base}, {} given)",
                conj.len()
            )));
        }
        if conj.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSignature(format!("level indices {conj:?} not decreasing")));
        }
        if let Some(n) = last {
            if conj[0] > n {
                return Err(Error::InvalidSignature(format!("level index beyond last walker {n}")));
            }
        }
        Ok(TruncState { d, base, conj, last })
    }

    /// The `F_d` projection of `mu`. Fails when no coordinate is `>= d` (the
    /// active rate would be infinite) or when every coordinate is.
    pub fn from_window(mu: &WindowSignature, d: i64) -> Result<Self> {
        let m = mu.truncate(d);
        let anchor = match m.conjugate_at(d) {
            ExtInt::Fin(a) => a,
            ExtInt::NegInf => {
                return Err(Error::Untruncatable(format!(
                    "no coordinate reaches level {d}; use the depth approximation"
                )))
            }
            _ => return Err(Error::Domain("every coordinate is frozen at d".into())),
        };
        let (base, last) = match m.right() {
            ExtInt::Fin(b) => (b, None),
            ExtInt::NegInf => {
                let last = (m.lo()..=m.hi()).rev().find(|&i| m.get(i) > ExtInt::NegInf).unwrap_or(anchor).max(anchor);
                let base = (anchor + 1..=last).filter_map(|i| m.get(i).finite()).min().unwrap_or(d - 1);
                (base.min(d - 1), Some(last))
            }
            ExtInt::PosInf => unreachable!("right fill capped at d"),
        };
        let conj = (base + 1..=d)
            .map(|v| m.conjugate_at(v).finite().expect("finite level index"))
            .collect();
        TruncState::new(d, base, conj, last)
    }

    /// State of the depth-`n` approximation: coordinates below `-n` are
    /// replaced by `+inf` before truncation.
    pub fn from_window_at_depth(mu: &WindowSignature, d: i64, depth: u32) -> Result<Self> {
        let lo = -(depth as i64);
        let hi = mu.hi().max(lo);
        let cut = WindowSignature::from_parts_at(lo, mu.range(lo, hi), ExtInt::PosInf, mu.right())?;
        TruncState::from_window(&cut, d)
    }

    /// Flat configuration `(a)` at depth `n` with cap `d > a`.
    pub fn flat_at_depth(a: i64, d: i64, depth: u32) -> Result<Self> {
        let anchor = -(depth as i64) - 1;
        TruncState::new(d, a, vec![anchor; (d - a) as usize], None)
    }

    pub fn d(&self) -> i64 {
        self.d
    }
    pub fn base(&self) -> i64 {
        self.base
    }
    pub fn last(&self) -> Option<i64> {
        self.last
    }

    /// Index of the last frozen coordinate (`nu'_d`).
    pub fn anchor(&self) -> i64 {
        *self.conj.last().expect("nonempty")
    }

    /// `nu'_v`: index of the last coordinate with value `>= v`.
    pub fn conj_at(&self, v: i64) -> ExtInt {
        if v <= self.base {
            return match self.last {
                None => ExtInt::PosInf,
                Some(n) => ExtInt::Fin(n),
            };
        }
        if v > self.d {
            return ExtInt::NegInf;
        }
        ExtInt::Fin(self.conj[(v - self.base - 1) as usize])
    }

    /// Level indices `nu'_{base+1}, ..., nu'_d`.
    pub fn levels(&self) -> &[i64] {
        &self.conj
    }

    /// `nu'_1, ..., nu'_d` (requires `base <= 0`), the observable used for
    /// one-point comparisons.
    pub fn conjugate_profile(&self) -> Vec<i64> {
        (1..=self.d).map(|v| self.conj_at(v).finite().unwrap_or(i64::MIN)).collect()
    }

    pub fn value(&self, i: i64) -> ExtInt {
        if i <= self.anchor() {
            return ExtInt::Fin(self.d);
        }
        if self.last.is_some_and(|n| i > n) {
            return ExtInt::NegInf;
        }
        // Largest level whose index reaches i.
        let k = self.conj.partition_point(|&c| c >= i);
        ExtInt::Fin(self.base + k as i64)
    }

    /// First index that can still move.
    pub fn first_active(&self) -> i64 {
        self.anchor() + 1
    }

    /// Number of movable walkers, `None` when infinite.
    pub fn active_count(&self) -> Option<i64> {
        self.last.map(|n| (n - self.anchor()).max(0))
    }

    pub fn is_active(&self, i: i64) -> bool {
        i > self.anchor() && self.last.is_none_or(|n| i <= n)
    }

    /// Applies a ring of clock `i`: the top walker of `i`'s block moves up by
    /// one. Returns `(moved index, new value)`, or `None` if `i` is frozen or
    /// beyond the last walker.
    pub fn ring(&mut self, i: i64) -> Option<(i64, i64)> {
        if !self.is_active(i) {
            return None;
        }
        let x = self.value(i).finite().expect("active walkers are finite");
        let k = (x - self.base) as usize;
        let top = self.conj[k] + 1;
        self.conj[k] = top;
        assert!(k == 0 || self.conj[k] <= self.conj[k - 1], "ordering violated at level {}", x + 1);
        Some((top, x + 1))
    }

    /// Total clock rate of the movable walkers, `sum_{i > anchor} t^i`.
    pub fn total_rate(&self, t: f64) -> f64 {
        let a = self.anchor();
        let head = t.powi((a + 1) as i32);
        match self.last {
            None => head / (1.0 - t),
            Some(n) if n <= a => 0.0,
            Some(n) => (head - t.powi((n + 1) as i32)) / (1.0 - t),
        }
    }

    /// Same total recomputed walker by walker (tail summed until negligible).
    pub fn total_rate_bruteforce(&self, t: f64) -> f64 {
        let mut sum = 0.0;
        let mut i = self.anchor() + 1;
        loop {
            if self.last.is_some_and(|n| i > n) {
                break;
            }
            let r = t.powi(i as i32);
            sum += r;
            if self.last.is_none() && r < sum * 1e-18 {
                break;
            }
            i += 1;
        }
        sum
    }

    /// The configuration as a window signature (left fill `d`).
    pub fn to_window(&self) -> WindowSignature {
        let lo = self.anchor() + 1;
        let hi = match self.last {
            Some(n) => n,
            None => self.conj[0],
        };
        let parts: Vec<ExtInt> = (lo..=hi).map(|i| self.value(i)).collect();
        let right = if self.last.is_some() { ExtInt::NegInf } else { ExtInt::Fin(self.base) };
        WindowSignature::from_parts_at(lo, parts, ExtInt::Fin(self.d), right).expect("state is ordered")
    }

    /// Values at indices `a..=b`.
    pub fn values(&self, a: i64, b: i64) -> Vec<ExtInt> {
        (a..=b).map(|i| self.value(i)).collect()
    }

    /// Pointwise `self <= other` on indices `>= from`.
    pub fn le_from(&self, other: &TruncState, from: i64) -> bool {
        let hi = [self.conj[0], other.conj[0], self.last.unwrap_or(i64::MIN), other.last.unwrap_or(i64::MIN)]
            .into_iter()
            .max()
            .unwrap()
            + 1;
        (from..=hi.max(from)).all(|i| self.value(i) <= other.value(i))
    }

    /// Forward shift: the value at index `i + k` moves to index `i`.
    pub fn shift(&self, k: i64) -> TruncState {
        TruncState {
            conj: self.conj.iter().map(|c| c - k).collect(),
            last: self.last.map(|n| n - k),
            ..self.clone()
        }
    }

    /// `F_{d2}` of this state for `d2 <= d`.
    pub fn truncate(&self, d2: i64) -> Result<TruncState> {
        if d2 > self.d {
            return Err(Error::Domain(format!("cannot raise cap from {} to {d2}", self.d)));
        }
        TruncState::from_window(&self.to_window(), d2)
    }

    /// Window of a finite signature placed at indices `lo..`, for edge runs.
    pub fn edge(mu: &Signature, d: i64) -> Result<TruncState> {
        let lo = 1 - mu.len() as i64;
        let w = WindowSignature::from_parts_at(lo, mu.parts().to_vec(), ExtInt::PosInf, ExtInt::NegInf)?;
        TruncState::from_window(&w, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExtInt::*;

    #[test]
    fn round_trip_bulk() {
        // ..., 2 | 2 1 1 0 | 0, ... with the first 2 at index 0.
        let mu = WindowSignature::from_parts_at(0, vec![Fin(2), Fin(1), Fin(1), Fin(0)], Fin(3), Fin(0)).unwrap();
        let s = TruncState::from_window(&mu, 2).unwrap();
        assert_eq!(s.anchor(), 0);
        assert_eq!(s.levels(), &[2, 0]);
        assert_eq!(s.to_window(), mu.truncate(2));
        assert_eq!(s.value(5), Fin(0));
    }

    #[test]
    fn edge_state() {
        let mu = Signature::from_ints(&[2, 2, 1, 1, 0, 0]).unwrap();
        let s = TruncState::edge(&mu, 2).unwrap();
        assert_eq!(s.anchor(), -4);
        assert_eq!(s.last(), Some(0));
        assert_eq!(s.base(), 0);
        assert_eq!(s.value(1), NegInf);
        assert_eq!(s.value(-2), Fin(1));
        assert_eq!(s.active_count(), Some(4));
        assert!((s.total_rate(0.5) - (8.0 + 4.0 + 2.0 + 1.0)).abs() < 1e-12);
        assert!((s.total_rate(0.5) - s.total_rate_bruteforce(0.5)).abs() < 1e-12);
    }

    #[test]
    fn ring_donates_to_block_top() {
        let mut s = TruncState::flat_at_depth(0, 2, 3).unwrap();
        assert_eq!(s.ring(5), Some((-3, 1)));
        assert_eq!(s.ring(7), Some((-2, 1)));
        assert_eq!(s.ring(-1), Some((-1, 1)));
        assert_eq!(s.ring(-2), Some((-3, 2)));
        assert_eq!(s.anchor(), -3);
        assert_eq!(s.ring(-3), None);
        assert_eq!(s.value(-2), Fin(1));
        assert_eq!(s.value(0), Fin(0));
    }

    #[test]
    fn untruncatable_flat() {
        let flat = WindowSignature::flat(Fin(0));
        assert!(matches!(TruncState::from_window(&flat, 1), Err(Error::Untruncatable(_))));
        let s = TruncState::from_window_at_depth(&flat, 1, 4).unwrap();
        assert_eq!(s, TruncState::flat_at_depth(0, 1, 4).unwrap());
    }

    #[test]
    fn shift_and_truncate() {
        let s = TruncState::new(3, 0, vec![4, 2, 1], None).unwrap();
        let t = s.shift(1);
        assert_eq!(t.value(3), s.value(4));
        let f = s.truncate(2).unwrap();
        assert_eq!(f.levels(), &[4, 2]);
        assert!(f.le_from(&f, -5));
    }
}
