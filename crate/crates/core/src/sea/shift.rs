//! Empirical check that shifting indices by one and dividing time by `t`
//! leaves the flat-start sea invariant in law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::clocks::ClockStreams;
use super::engine::{approx_2inf, DEFAULT_EVENT_BUDGET};
use super::state::TruncState;
use crate::error::{Error, Result};
use crate::harness::stats::{compare_pmf, histogram, normalize, CellReport};
use crate::signatures::{ExtInt, WindowSignature};

/// Level indices `nu'_1..nu'_d` with indices at or below the depth cutoff
/// reported as `None` (no walker of the untruncated sea there).
pub type Profile = Vec<Option<i64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub t: f64,
    pub horizon: f64,
    pub d: i64,
    pub depth: u32,
    pub samples: u64,
    pub seed: u64,
    /// Law of the profile at time `horizon`.
    pub unshifted: Vec<(Profile, f64)>,
    /// Law of the profile at time `horizon / t`, shifted down by one index.
    pub shifted: Vec<(Profile, f64)>,
    pub total_variation: f64,
    /// `3 sigma` band for the distance of two independent empirical laws.
    pub threshold: f64,
    pub cells: Vec<CellReport<Profile>>,
    pub max_abs_z: f64,
}

fn profile(s: &TruncState, depth: u32, shift: i64) -> Profile {
    let cutoff = -(depth as i64) - 1;
    (1..=s.d())
        .map(|v| match s.conj_at(v) {
            ExtInt::Fin(c) if c > cutoff => Some(c - shift),
            _ => None,
        })
        .collect()
}

/// Each sample runs one depth-`depth` approximation from the flat zero
/// configuration and records it at `T` and at `T/t`.
pub fn shift_stationarity_check(t: f64, horizon: f64, d: i64, depth: u32, samples: u64, seed: u64) -> Result<ShiftReport> {
    if d < 1 || samples == 0 {
        return Err(Error::Domain("need d >= 1 and at least one sample".into()));
    }
    let flat = WindowSignature::flat(ExtInt::Fin(0));
    let times = [horizon, horizon / t];
    let pairs: Vec<(Profile, Profile)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let clocks = ClockStreams::new(seed, k, t);
            let s = approx_2inf(&flat, d, depth, &times, &clocks, DEFAULT_EVENT_BUDGET)?;
            Ok((profile(&s[0], depth, 0), profile(&s[1], depth, 1)))
        })
        .collect::<Result<_>>()?;
    let un = normalize(&histogram(pairs.iter().map(|p| p.0.clone())));
    let sh = normalize(&histogram(pairs.iter().map(|p| p.1.clone())));
    let report = compare_pmf(&sh, &un, samples, Some(samples))?;
    let n = samples as f64;
    let threshold = 0.5
        * report
            .empirical
            .iter()
            .map(|(k, a)| {
                let p = 0.5 * (a + un.get(k).copied().unwrap_or(0.0));
                3.0 * (2.0 * p * (1.0 - p) / n).sqrt()
            })
            .chain(un.iter().filter(|(k, _)| !sh.contains_key(*k)).map(|(_, b)| {
                let p = 0.5 * b;
                3.0 * (2.0 * p * (1.0 - p) / n).sqrt()
            }))
            .sum::<f64>();
    Ok(ShiftReport {
        t,
        horizon,
        d,
        depth,
        samples,
        seed,
        unshifted: un.into_iter().collect(),
        shifted: sh.into_iter().collect(),
        total_variation: report.total_variation,
        threshold,
        cells: report.cells,
        max_abs_z: report.max_abs_z,
    })
}
