//! Exact Markov generator of a truncated sea on an interval of states, and
//! transient probabilities by uniformization.
//!
//! From a state `eta` with frozen prefix ending at `eta'_d` and last walker
//! `N` (`N = inf` for a flat tail), the top `i` of each block of value `x < d`
//! and size `m` jumps at rate `t^i (1 - t^m) / (1 - t)` (`1/(1 - t)` for the
//! infinite flat block), and the total exit rate is
//! `(t^{eta'_d + 1} - t^{N+1}) / (1 - t)`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcalc::{qpow, to_f64, Q};
use crate::sea::TruncState;
use crate::signatures::{interval_states, skew_contains, skew_size, ExtInt, WindowSignature};

/// Parameters shared by all states of a generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenParams {
    pub t: f64,
    pub d: i64,
    /// Index of the last walker, `None` for an infinite flat tail.
    pub last: Option<i64>,
    /// Frozen prefix of the lowest state.
    pub anchor: i64,
}

/// Generator restricted to the interval `[nu, kappa]` of `F_d` states.
/// Jumps leaving the interval are collected in an escape column, so every
/// full row sums to zero.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    pub params: GenParams,
    t: Q,
    states: Vec<WindowSignature>,
    index: HashMap<WindowSignature, usize>,
    /// Off-diagonal entries per row, sorted by column.
    offdiag: Vec<Vec<(usize, Q)>>,
    diag: Vec<Q>,
    escape: Vec<Q>,
    offdiag_f64: Vec<Vec<(usize, f64)>>,
    diag_f64: Vec<f64>,
}

/// A transient probability with the number of uniformization terms used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransientValue {
    pub prob: f64,
    pub terms: usize,
}

fn jumps(s: &TruncState, t: &Q) -> Vec<(TruncState, Q)> {
    let one_minus = Q::one() - t;
    let levels = s.levels();
    let mut out = Vec::new();
    for k in 0..levels.len() {
        let lower = levels[k];
        let upper = if k == 0 { s.last().map(ExtInt::Fin).unwrap_or(ExtInt::PosInf) } else { ExtInt::Fin(levels[k - 1]) };
        let top = lower + 1;
        let rate = match upper {
            ExtInt::Fin(u) if u <= lower => continue,
            ExtInt::Fin(u) => qpow(t, top) * (Q::one() - qpow(t, u - lower)) / &one_minus,
            _ => qpow(t, top) / &one_minus,
        };
        let mut next = s.clone();
        next.ring(top).expect("block top is active");
        out.push((next, rate));
    }
    out
}

fn exit_rate(s: &TruncState, t: &Q) -> Q {
    let tail = s.last().map_or_else(Q::zero, |n| qpow(t, n + 1));
    let head = qpow(t, s.anchor() + 1);
    if s.last().is_some_and(|n| n <= s.anchor()) {
        return Q::zero();
    }
    (head - tail) / (Q::one() - t)
}

/// Builds the generator on `[F_d(nu), F_d(kappa)]`. `n` is the index of the
/// last walker (`None` for a flat tail) and must agree with `nu`.
pub fn build_q(nu: &WindowSignature, kappa: &WindowSignature, d: i64, t: &Q, n: Option<i64>) -> Result<GeneratorMatrix> {
    if !(t > &Q::zero() && t < &Q::one()) {
        return Err(Error::Domain("t must lie in (0,1)".into()));
    }
    let lo = TruncState::from_window(nu, d).map_err(|e| match e {
        Error::Untruncatable(_) => Error::Untruncatable(
            "no coordinate of the lower state is pinned at d; the generator has infinite rates".into(),
        ),
        e => e,
    })?;
    if lo.last() != n {
        return Err(Error::Domain(format!("last walker of the lower state is {:?}, not {n:?}", lo.last())));
    }
    let (nu_d, kappa_d) = (nu.truncate(d), kappa.truncate(d));
    if !matches!(skew_size(&nu_d, &kappa_d)?, ExtInt::Fin(_)) || !skew_contains(&nu_d, &kappa_d) {
        return Err(Error::Domain("interval must be nonempty with finite size".into()));
    }
    let mut states = interval_states(&nu_d, &kappa_d)?;
    let size = |w: &WindowSignature| skew_size(&nu_d, w).ok().and_then(|s| s.finite()).expect("finite");
    states.sort_by_key(size);
    let index: HashMap<WindowSignature, usize> = states.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();

    let mut offdiag = Vec::with_capacity(states.len());
    let mut diag = Vec::with_capacity(states.len());
    let mut escape = Vec::with_capacity(states.len());
    for (row, w) in states.iter().enumerate() {
        let s = TruncState::from_window(w, d)?;
        let mut entries = Vec::new();
        let mut out = Q::zero();
        let mut esc = Q::zero();
        for (next, rate) in jumps(&s, t) {
            out += &rate;
            match index.get(&next.to_window()) {
                Some(&col) => {
                    assert!(col > row && skew_contains(w, &states[col]), "generator is not upper triangular");
                    entries.push((col, rate));
                }
                None => esc += rate,
            }
        }
        let total = exit_rate(&s, t);
        assert_eq!(out, total, "jump rates do not add up to the exit rate");
        entries.sort_by_key(|e| e.0);
        offdiag.push(entries);
        diag.push(-total);
        escape.push(esc);
    }
    let offdiag_f64 = offdiag.iter().map(|r| r.iter().map(|(c, q)| (*c, to_f64(q))).collect()).collect();
    let diag_f64 = diag.iter().map(to_f64).collect();
    Ok(GeneratorMatrix {
        params: GenParams { t: to_f64(t), d, last: n, anchor: lo.anchor() },
        t: t.clone(),
        states,
        index,
        offdiag,
        diag,
        escape,
        offdiag_f64,
        diag_f64,
    })
}

impl GeneratorMatrix {
    pub fn states(&self) -> &[WindowSignature] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn t(&self) -> &Q {
        &self.t
    }

    /// Position of `F_d(w)` in the state list.
    pub fn state_id(&self, w: &WindowSignature) -> Option<usize> {
        self.index.get(&w.truncate(self.params.d)).copied()
    }

    pub fn rate(&self, i: usize, j: usize) -> Q {
        if i == j {
            return self.diag[i].clone();
        }
        self.offdiag[i].iter().find(|e| e.0 == j).map_or_else(Q::zero, |e| e.1.clone())
    }

    pub fn escape_rate(&self, i: usize) -> &Q {
        &self.escape[i]
    }

    /// Dense rational matrix, one extra trailing column for escape.
    pub fn rate_matrix(&self) -> Vec<Vec<Q>> {
        (0..self.len())
            .map(|i| {
                let mut row: Vec<Q> = (0..self.len()).map(|j| self.rate(i, j)).collect();
                row.push(self.escape[i].clone());
                row
            })
            .collect()
    }

    /// Uniformization constant (largest exit rate) and `P = I + Q/Lambda`
    /// in exact arithmetic, escape column last.
    pub fn uniformized_rational(&self) -> (Q, Vec<Vec<Q>>) {
        let lambda = self.diag.iter().map(|q| -q).fold(Q::zero(), |a, b| if b > a { b } else { a });
        let lambda = if lambda.is_zero() { Q::one() } else { lambda };
        let mut p = self.rate_matrix();
        for (i, row) in p.iter_mut().enumerate() {
            for x in row.iter_mut() {
                *x = &*x / &lambda;
            }
            row[i] += Q::one();
        }
        (lambda, p)
    }

    /// Row `from` of `e^{TQ}` over the interval states, with escape mass
    /// last. The truncation error is at most `eps` in every entry.
    pub fn transient_row(&self, from: usize, horizon: f64, eps: f64) -> Result<(Vec<f64>, usize)> {
        if !(eps > 0.0) || !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::Domain("need eps > 0 and finite T >= 0".into()));
        }
        let s = self.len();
        let mut v = vec![0.0; s + 1];
        v[from] = 1.0;
        if horizon == 0.0 {
            return Ok((v, 1));
        }
        let lambda = self.diag_f64.iter().fold(0.0f64, |a, &b| a.max(-b));
        if lambda == 0.0 {
            return Ok((v, 1));
        }
        let lt = lambda * horizon;
        let esc: Vec<f64> = self.escape.iter().map(to_f64).collect();
        let mut acc = vec![0.0; s + 1];
        let mut log_w = -lt;
        let mut k = 0usize;
        loop {
            let w = log_w.exp();
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += w * x;
            }
            // Remaining Poisson mass, bounded geometrically once past the mode.
            let ratio = lt / (k as f64 + 2.0);
            let next_w = (log_w + lt.ln() - ((k + 1) as f64).ln()).exp();
            if ratio < 1.0 && next_w / (1.0 - ratio) < eps {
                break;
            }
            if k > 10_000_000 {
                return Err(Error::Domain("uniformization did not converge".into()));
            }
            // v <- v P
            let mut nv = vec![0.0; s + 1];
            nv[s] = v[s];
            for i in 0..s {
                if v[i] == 0.0 {
                    continue;
                }
                nv[i] += v[i] * (1.0 + self.diag_f64[i] / lambda);
                for &(j, q) in &self.offdiag_f64[i] {
                    nv[j] += v[i] * q / lambda;
                }
                nv[s] += v[i] * esc[i] / lambda;
            }
            v = nv;
            k += 1;
            log_w += lt.ln() - (k as f64).ln();
        }
        Ok((acc, k + 1))
    }

    /// `(e^{TQ})(from, to)` to absolute accuracy `eps`.
    pub fn transient_prob(&self, horizon: f64, from: usize, to: usize, eps: f64) -> Result<TransientValue> {
        let (row, terms) = self.transient_row(from, horizon, eps)?;
        Ok(TransientValue { prob: row[to], terms })
    }

    /// Probability of visiting `states[j]` at `times[j]` for every `j`,
    /// starting from `start` at time 0.
    pub fn multi_time_prob(
        &self,
        start: &WindowSignature,
        times: &[f64],
        states: &[WindowSignature],
        eps: f64,
    ) -> Result<f64> {
        if times.len() != states.len() || times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("times must be nondecreasing, one per state".into()));
        }
        let lookup = |w: &WindowSignature| {
            self.state_id(w).ok_or_else(|| Error::NotRepresentable(format!("state {w:?} lies outside the interval")))
        };
        let mut cur = lookup(start)?;
        let mut now = 0.0;
        let mut prob = 1.0;
        for (&tm, w) in times.iter().zip(states) {
            let next = lookup(w)?;
            prob *= self.transient_prob(tm - now, cur, next, eps)?.prob;
            cur = next;
            now = tm;
        }
        Ok(prob)
    }

    /// Joint law at `times` (all state tuples of positive mass, escape
    /// excluded), from `start`.
    pub fn multi_time_pmf(&self, start: usize, times: &[f64], eps: f64) -> Result<Vec<(Vec<usize>, f64)>> {
        let mut paths = vec![(Vec::new(), start, 1.0)];
        let mut now = 0.0;
        for &tm in times {
            let mut rows: HashMap<usize, Vec<f64>> = HashMap::new();
            let mut next = Vec::new();
            for (path, cur, p) in paths {
                let row = match rows.get(&cur) {
                    Some(r) => r,
                    None => {
                        let r = self.transient_row(cur, tm - now, eps)?.0;
                        rows.entry(cur).or_insert(r)
                    }
                };
                for (j, &q) in row[..self.len()].iter().enumerate() {
                    if q > 0.0 {
                        let mut np = path.clone();
                        np.push(j);
                        next.push((np, j, p * q));
                    }
                }
            }
            paths = next;
            now = tm;
        }
        Ok(paths.into_iter().map(|(path, _, p)| (path, p)).collect())
    }
}
