//! Matrix-chain versus sea convergence experiments.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::{compare_pmf, histogram, normalize, total_variation, ComparisonReport, Pmf};
use crate::ensembles::{run_chain, EnsembleSpec};
use crate::error::{Error, Result};
use crate::generator::{build_q, GeneratorMatrix};
use crate::padic::CappedSn;
use crate::qcalc::{c_n, rat, CnMode, Cutoff};
use crate::rng::RngHandle;
use crate::sea::{approx_2inf_coupled, ClockStreams, TruncState, DEFAULT_EVENT_BUDGET};
use crate::signatures::{ExtInt, Signature, WindowSignature};

/// Values of the `F_d` configuration at the comparison window.
pub type Window = Vec<ExtInt>;

const CHAIN_SALT: u64 = 0xc4a1;
const SEA_SALT: u64 = 0x5ea;
const GEN_EPS: f64 = 1e-12;
const MAX_ESCAPE: f64 = 1e-6;

fn default_window() -> (i64, i64) {
    (-2, 2)
}
fn default_depth() -> u32 {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Law of each step matrix; also fixes `N`, `p` and the cap `d`.
    pub ensemble: EnsembleSpec,
    /// Observation index. Ignored by edge runs, which use `r_N = N`.
    pub r_n: u64,
    /// Sea times `T_1 < ... < T_k`.
    pub times: Vec<f64>,
    pub samples: u64,
    /// Singular numbers of the initial matrix (zeros when absent).
    #[serde(default)]
    pub init: Option<Vec<u32>>,
    /// Window `lo..=hi` of sea indices compared.
    #[serde(default = "default_window")]
    pub window: (i64, i64),
    /// Depth of the sea approximation for flat starts.
    #[serde(default = "default_depth")]
    pub depth: u32,
    /// Monte Carlo size of a simulated reference (defaults to `samples`).
    #[serde(default)]
    pub reference_samples: Option<u64>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if self.r_n as usize > self.ensemble.n {
            return Err(Error::Domain(format!("r_N = {} exceeds N = {}", self.r_n, self.ensemble.n)));
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Domain("need at least one finite time >= 0".into()));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("times must be strictly increasing".into()));
        }
        if self.samples == 0 || self.reference_samples == Some(0) {
            return Err(Error::Domain("sample count must be at least 1".into()));
        }
        if self.window.0 > self.window.1 {
            return Err(Error::Domain("empty window".into()));
        }
        if let Some(init) = &self.init {
            if init.len() > self.ensemble.n || init.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::InvalidSignature(format!("initial singular numbers {init:?}")));
            }
        }
        if self.depth == 0 {
            return Err(Error::Domain("depth must be at least 1".into()));
        }
        Ok(())
    }

    fn init_sn(&self) -> Vec<u32> {
        let d = self.ensemble.d;
        let mut v: Vec<u32> = self.init.clone().unwrap_or_default().into_iter().map(|x| x.min(d)).collect();
        v.resize(self.ensemble.n, 0);
        v
    }

    /// SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Exact transient probabilities of the generator.
    Generator,
    /// Depth approximation Monte Carlo.
    DepthApproximation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub input_hash: String,
    pub r_n: u64,
    pub c_n: f64,
    /// Exact `c_N` as a reduced fraction.
    pub c_n_exact: String,
    pub steps: Vec<u64>,
    pub reference: ReferenceKind,
    /// One comparison per time.
    pub single_time: Vec<ComparisonReport<Window>>,
    /// Joint law over all times (absent for a single time).
    pub joint: Option<ComparisonReport<Vec<Window>>>,
    /// Largest TV between the depth `n-1` and depth `n` reference laws.
    pub depth_gap: Option<f64>,
    /// Reference mass outside the generator interval (dropped).
    pub reference_escape: Option<f64>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn max_single_tv(&self) -> f64 {
        self.single_time.iter().map(|r| r.total_variation).fold(0.0, f64::max)
    }
}

fn window_of(w: &WindowSignature, (lo, hi): (i64, i64)) -> Window {
    w.range(lo, hi)
}

fn joint_pmf(samples: &[Vec<Window>]) -> (Vec<Pmf<Window>>, Pmf<Vec<Window>>) {
    let k = samples.first().map_or(0, |s| s.len());
    let single = (0..k).map(|j| normalize(&histogram(samples.iter().map(|s| s[j].clone())))).collect();
    (single, normalize(&histogram(samples.iter().cloned())))
}

/// Chain samples: the `F_d` window of `s^{r} iota(SN)` at each step count.
fn chain_windows(cfg: &ExperimentConfig, r: i64, steps: &[u64]) -> Result<Vec<Vec<Window>>> {
    let spec = &cfg.ensemble;
    let init = CappedSn::new(spec.d, cfg.init_sn())?;
    let last = *steps.last().expect("nonempty") as usize;
    let record: Vec<usize> = steps.iter().map(|&s| s as usize).collect();
    (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngHandle::new(cfg.seed, k).salted(CHAIN_SALT);
            let states = run_chain(&init, spec, last, &record, &mut rng)?;
            Ok(states
                .iter()
                .map(|s| window_of(&WindowSignature::from_finite(&s.to_signature(), r).truncate(spec.d as i64), cfg.window))
                .collect())
        })
        .collect()
}

fn sanity_warnings(samples: &[Vec<Window>], d: i64, floor: ExtInt) -> Vec<String> {
    let bad = samples.iter().flatten().any(|w| {
        w.windows(2).any(|p| p[0] < p[1]) || w.iter().any(|&x| x > ExtInt::Fin(d) || (x != ExtInt::NegInf && x < floor))
    });
    if bad {
        vec!["empirical window outside [right fill, d] or not decreasing".into()]
    } else {
        Vec::new()
    }
}

fn hypothesis_warnings(cfg: &ExperimentConfig, r: u64, edge: bool) -> Result<Vec<String>> {
    let pmf = cfg.ensemble.corank_pmf()?;
    let tail: f64 = pmf.iter().enumerate().skip(r as usize).map(|(_, q)| crate::qcalc::to_f64(q)).sum();
    let mut w = Vec::new();
    if tail > 1e-3 {
        w.push(format!("Pr(corank >= r_N) = {tail:.3e} is not negligible"));
    }
    let hi = r as i64 + cfg.window.1;
    if !edge && hi > cfg.ensemble.n as i64 {
        w.push(format!("window reaches singular number {hi} beyond N = {}", cfg.ensemble.n));
    }
    Ok(w)
}

/// Exact reference law of windows from a pinned start via the generator.
fn generator_reference(
    g: &GeneratorMatrix,
    start: &WindowSignature,
    times: &[f64],
    window: (i64, i64),
) -> Result<(Vec<Pmf<Window>>, Pmf<Vec<Window>>, f64)> {
    let from = g.state_id(start).ok_or_else(|| Error::NotRepresentable("start state".into()))?;
    let paths = g.multi_time_pmf(from, times, GEN_EPS)?;
    let wins: Vec<Window> = g.states().iter().map(|s| window_of(s, window)).collect();
    let mut joint: Pmf<Vec<Window>> = BTreeMap::new();
    for (path, p) in &paths {
        *joint.entry(path.iter().map(|&j| wins[j].clone()).collect()).or_insert(0.0) += p;
    }
    let mass: f64 = joint.values().sum();
    let escape = (1.0 - mass).max(0.0);
    for v in joint.values_mut() {
        *v /= mass;
    }
    let single = (0..times.len())
        .map(|j| {
            let mut m: Pmf<Window> = BTreeMap::new();
            for (k, v) in &joint {
                *m.entry(k[j].clone()).or_insert(0.0) += v;
            }
            m
        })
        .collect();
    Ok((single, joint, escape))
}

/// Top of a generator interval: every coordinate in `(anchor, upto]` at `d`.
fn raised(mu: &WindowSignature, d: i64, upto: i64) -> Result<WindowSignature> {
    let lo = mu.lo().min(upto);
    let hi = mu.hi().max(upto);
    let parts = (lo..=hi).map(|i| if i <= upto { ExtInt::Fin(d) } else { mu.get(i).cap(d) }).collect();
    WindowSignature::from_parts_at(lo, parts, mu.left().cap(d), mu.right())
}

/// Generator reference for a pinned bulk start with flat zero tail; the
/// interval is widened until the escaping mass is below `MAX_ESCAPE`.
fn bulk_generator_reference(
    mu: &WindowSignature,
    d: i64,
    t: f64,
    times: &[f64],
    window: (i64, i64),
) -> Result<(Vec<Pmf<Window>>, Pmf<Vec<Window>>, f64)> {
    let tq = rat(1, (1.0 / t).round() as i64);
    let mut upto = window.1.max(TruncState::from_window(mu, d)?.first_active());
    loop {
        let top = raised(mu, d, upto)?;
        let g = build_q(mu, &top, d, &tq, None)?;
        let out = generator_reference(&g, mu, times, window)?;
        if out.2 < MAX_ESCAPE || g.len() > 20_000 {
            return Ok(out);
        }
        upto += 2;
    }
}

/// Depth-approximation reference with the depth `n-1` versus `n` gap.
fn depth_reference(cfg: &ExperimentConfig, mu: &WindowSignature) -> Result<(Vec<Vec<Window>>, f64)> {
    let d = cfg.ensemble.d as i64;
    let t = 1.0 / cfg.ensemble.p as f64;
    let n = cfg.reference_samples.unwrap_or(cfg.samples);
    let depths = if cfg.depth > 1 { vec![cfg.depth - 1, cfg.depth] } else { vec![cfg.depth] };
    let runs: Vec<(Vec<Window>, Vec<Window>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let clocks = ClockStreams::new(cfg.seed ^ SEA_SALT, k, t);
            let r = approx_2inf_coupled(mu, d, &depths, &cfg.times, &clocks, DEFAULT_EVENT_BUDGET)?;
            let win = |v: &Vec<TruncState>| v.iter().map(|s| window_of(&s.to_window(), cfg.window)).collect();
            Ok((win(&r[0]), win(r.last().unwrap())))
        })
        .collect::<Result<_>>()?;
    let shallow: Vec<Vec<Window>> = runs.iter().map(|r| r.0.clone()).collect();
    let deep: Vec<Vec<Window>> = runs.into_iter().map(|r| r.1).collect();
    let (s1, j1) = joint_pmf(&shallow);
    let (s2, j2) = joint_pmf(&deep);
    let gap = s1
        .iter()
        .zip(&s2)
        .map(|(a, b)| total_variation(a, b))
        .chain(std::iter::once(total_variation(&j1, &j2)))
        .fold(0.0, f64::max);
    Ok((deep, gap))
}

fn run(cfg: &ExperimentConfig, edge: bool) -> Result<ExperimentReport> {
    cfg.validate()?;
    let spec = &cfg.ensemble;
    let d = spec.d as i64;
    let t = 1.0 / spec.p as f64;
    let r = if edge { spec.n as u64 } else { cfg.r_n };
    let cn = c_n(spec, r, CnMode::Exact(Cutoff::Indicator))?;
    let steps: Vec<u64> = cfg.times.iter().map(|&x| (cn.value * x).floor() as u64).collect();
    let mut warnings = hypothesis_warnings(cfg, r, edge)?;
    if !edge && steps.windows(2).any(|w| w[0] == w[1]) {
        warnings.push("two times map to the same step count".into());
    }

    let empirical = chain_windows(cfg, r as i64, &steps)?;
    let init = Signature::from_ints(&cfg.init_sn().iter().map(|&x| x as i64).collect::<Vec<_>>())?;
    let pinned = init.parts().first().is_some_and(|&x| x >= ExtInt::Fin(d));
    let floor = if edge { ExtInt::NegInf } else { ExtInt::Fin(0) };
    warnings.extend(sanity_warnings(&empirical, d, floor));

    let (ref_single, ref_joint, ref_n, gap, escape, kind) = if edge {
        let mu = WindowSignature::from_finite(&init, r as i64);
        let top = WindowSignature::from_finite(&Signature::from_ints(&vec![d; spec.n])?, r as i64);
        let g = build_q(&mu, &top, d, &rat(1, spec.p as i64), Some(0))?;
        let (s, j, e) = generator_reference(&g, &mu.truncate(d), &cfg.times, cfg.window)?;
        (s, j, None, None, Some(e), ReferenceKind::Generator)
    } else {
        // Limit start: s^r iota(init) with the flat zero tail of the bulk.
        let parts = init.parts().to_vec();
        let mu = WindowSignature::from_parts_at(1 - r as i64, parts.clone(), ExtInt::PosInf, ExtInt::Fin(0))?;
        if pinned {
            let (s, j, e) = bulk_generator_reference(&mu, d, t, &cfg.times, cfg.window)?;
            (s, j, None, None, Some(e), ReferenceKind::Generator)
        } else {
            let left = parts.first().copied().unwrap_or(ExtInt::Fin(0));
            let flat = WindowSignature::from_parts_at(1 - r as i64, parts, left, ExtInt::Fin(0))?;
            let (samples, gap) = depth_reference(cfg, &flat)?;
            let (s, j) = joint_pmf(&samples);
            if gap > 0.01 {
                warnings.push(format!("depth gap {gap:.4} exceeds 0.01"));
            }
            (s, j, Some(samples.len() as u64), Some(gap), None, ReferenceKind::DepthApproximation)
        }
    };
    if escape.is_some_and(|e| e > MAX_ESCAPE) {
        warnings.push(format!("reference escape mass {:.3e}", escape.unwrap()));
    }

    let (emp_single, emp_joint) = joint_pmf(&empirical);
    let single_time = emp_single
        .iter()
        .zip(&ref_single)
        .map(|(e, rf)| compare_pmf(e, rf, cfg.samples, ref_n))
        .collect::<Result<Vec<_>>>()?;
    let joint = if cfg.times.len() > 1 { Some(compare_pmf(&emp_joint, &ref_joint, cfg.samples, ref_n)?) } else { None };
    Ok(ExperimentReport {
        config: cfg.clone(),
        input_hash: cfg.content_hash(),
        r_n: r,
        c_n: cn.value,
        c_n_exact: cn.exact.map(|q| q.to_string()).unwrap_or_default(),
        steps,
        reference: kind,
        single_time,
        joint,
        depth_gap: gap,
        reference_escape: escape,
        warnings,
    })
}

/// Matrix chain at `floor(c_N T_i)` steps versus the bulk sea.
pub fn run_bulk_convergence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run(cfg, false)
}

/// As [`run_bulk_convergence`] with `r_N = N` and the edge sea.
pub fn run_edge_convergence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run(cfg, true)
}
