//! Histograms and pmf comparison: total variation, pooled chi-square and
//! per-cell z-scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Pooling threshold on expected cell counts.
pub const MIN_EXPECTED: f64 = 10.0;

/// Tolerance on the total mass of a pmf.
pub const MASS_TOL: f64 = 1e-9;

pub type Histogram<K> = BTreeMap<K, u64>;
pub type Pmf<K> = BTreeMap<K, f64>;

pub fn histogram<K: Ord + Clone>(samples: impl IntoIterator<Item = K>) -> Histogram<K> {
    let mut h = BTreeMap::new();
    for k in samples {
        *h.entry(k).or_insert(0) += 1;
    }
    h
}

/// Total count of a histogram.
pub fn total<K>(h: &Histogram<K>) -> u64 {
    h.values().sum()
}

pub fn normalize<K: Ord + Clone>(h: &Histogram<K>) -> Pmf<K> {
    let n = total(h) as f64;
    h.iter().map(|(k, &c)| (k.clone(), c as f64 / n)).collect()
}

/// `(1/2) sum |a - b|` over the union of supports.
pub fn total_variation<K: Ord>(a: &Pmf<K>, b: &Pmf<K>) -> f64 {
    let mut s = 0.0;
    for (k, &pa) in a {
        s += (pa - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &pb) in b {
        if !a.contains_key(k) {
            s += pb;
        }
    }
    0.5 * s
}

/// One comparison cell. Pooled cells list all their keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport<K> {
    pub keys: Vec<K>,
    pub empirical: f64,
    pub reference: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport<K> {
    pub empirical: Vec<(K, f64)>,
    pub reference: Vec<(K, f64)>,
    pub n_samples: u64,
    /// Sample count behind the reference, `None` when it is exact.
    pub reference_samples: Option<u64>,
    pub total_variation: f64,
    pub cells: Vec<CellReport<K>>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub max_abs_z: f64,
}

fn check_mass<K>(p: &Pmf<K>, what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Domain(format!("{what} pmf has empty support")));
    }
    let mass: f64 = p.values().sum();
    if (mass - 1.0).abs() > MASS_TOL || p.values().any(|&x| x < 0.0) {
        return Err(Error::Domain(format!("{what} pmf has mass {mass}")));
    }
    Ok(())
}

fn z_score(a: f64, b: f64, n: f64, m: Option<f64>) -> f64 {
    let var = match m {
        None => b * (1.0 - b) / n,
        Some(m) => {
            let pooled = (a * n + b * m) / (n + m);
            pooled * (1.0 - pooled) * (1.0 / n + 1.0 / m)
        }
    };
    if var > 0.0 {
        (a - b) / var.sqrt()
    } else if a == b {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Compares an empirical pmf from `n` samples with a reference pmf, exact or
/// itself estimated from `ref_n` samples. Cells whose expected count is
/// below [`MIN_EXPECTED`] are pooled into one cell.
pub fn compare_pmf<K: Ord + Clone>(
    empirical: &Pmf<K>,
    reference: &Pmf<K>,
    n: u64,
    ref_n: Option<u64>,
) -> Result<ComparisonReport<K>> {
    check_mass(empirical, "empirical")?;
    check_mass(reference, "reference")?;
    if n == 0 || ref_n == Some(0) {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    let nf = n as f64;
    let mf = ref_n.map(|m| m as f64);
    let keys: Vec<K> = {
        let mut k: Vec<K> = empirical.keys().chain(reference.keys()).cloned().collect();
        k.sort();
        k.dedup();
        k
    };
    let get = |p: &Pmf<K>, k: &K| p.get(k).copied().unwrap_or(0.0);
    let expected = |k: &K| {
        let q = match mf {
            None => get(reference, k),
            Some(m) => (get(reference, k) * m + get(empirical, k) * nf) / (nf + m),
        };
        q * nf.min(mf.unwrap_or(nf))
    };
    let mut cells: Vec<CellReport<K>> = Vec::new();
    let mut pooled = CellReport { keys: Vec::new(), empirical: 0.0, reference: 0.0, z: 0.0 };
    for k in &keys {
        let (a, b) = (get(empirical, k), get(reference, k));
        if expected(k) < MIN_EXPECTED {
            pooled.keys.push(k.clone());
            pooled.empirical += a;
            pooled.reference += b;
        } else {
            cells.push(CellReport { keys: vec![k.clone()], empirical: a, reference: b, z: z_score(a, b, nf, mf) });
        }
    }
    if !pooled.keys.is_empty() {
        pooled.z = z_score(pooled.empirical, pooled.reference, nf, mf);
        cells.push(pooled);
    }
    let mut chi2 = 0.0;
    for c in &cells {
        match mf {
            None => {
                if c.reference > 0.0 {
                    chi2 += nf * (c.empirical - c.reference).powi(2) / c.reference;
                }
            }
            Some(m) => {
                // Two-row contingency table.
                let (oa, ob) = (c.empirical * nf, c.reference * m);
                let col = oa + ob;
                if col > 0.0 {
                    let (ea, eb) = (col * nf / (nf + m), col * m / (nf + m));
                    chi2 += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
                }
            }
        }
    }
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 { 1.0 } else { ChiSquared::new(dof as f64).map(|c| c.sf(chi2)).unwrap_or(f64::NAN) };
    let max_abs_z = cells.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    Ok(ComparisonReport {
        empirical: empirical.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        reference: reference.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        n_samples: n,
        reference_samples: ref_n,
        total_variation: total_variation(empirical, reference),
        cells,
        chi2,
        dof,
        p_value,
        max_abs_z,
    })
}

/// Upper `alpha` quantile of the chi-square law with `dof` degrees of freedom.
pub fn chi2_critical(dof: usize, alpha: f64) -> f64 {
    ChiSquared::new(dof as f64).expect("positive dof").inverse_cdf(1.0 - alpha)
}

/// Asymptotic two-sided Kolmogorov-Smirnov critical value for `n` samples at
/// level 1e-3.
pub fn ks_critical_1e3(n: usize) -> f64 {
    1.949 / (n as f64).sqrt()
}

/// One-sample KS statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
