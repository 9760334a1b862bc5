//! Samplers for `GL_N(Z_p)`-invariant matrix laws mod `p^d` and the singular
//! number chain of their products.

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{inv_mod, matmul, modulus, mul_mod, smith_sn, sub_mod, CappedSn, MatModPd};
use crate::qcalc::{corank_pmf_corner, corank_pmf_iid, Q};

/// Which invariant law.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// iid additive Haar entries.
    IidHaar,
    /// Top-left `N x N` corner of a Haar element of `GL_{N+D}`.
    Corner {
        #[serde(rename = "D")]
        extra: u32,
    },
    /// `U diag(p^lambda) V` with independent Haar `U`, `V`; `lambda` is padded
    /// with zeros to length `N`.
    FixedSn { lambda: Vec<u32> },
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    kind: EnsembleKind,
    #[serde(rename = "N")]
    n: usize,
    p: u64,
    d: u32,
}

/// A matrix law together with its dimension and working modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub p: u64,
    pub d: u32,
}

impl TryFrom<RawSpec> for EnsembleSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        let s = EnsembleSpec { kind: r.kind, n: r.n, p: r.p, d: r.d };
        s.validate()?;
        Ok(s)
    }
}

impl From<EnsembleSpec> for RawSpec {
    fn from(s: EnsembleSpec) -> Self {
        RawSpec { kind: s.kind, n: s.n, p: s.p, d: s.d }
    }
}

impl EnsembleSpec {
    pub fn iid_haar(n: usize, p: u64, d: u32) -> Self {
        EnsembleSpec { kind: EnsembleKind::IidHaar, n, p, d }
    }

    pub fn corner(n: usize, extra: u32, p: u64, d: u32) -> Self {
        EnsembleSpec { kind: EnsembleKind::Corner { extra }, n, p, d }
    }

    pub fn fixed_sn(lambda: Vec<u32>, p: u64, d: u32) -> Self {
        let n = lambda.len();
        EnsembleSpec { kind: EnsembleKind::FixedSn { lambda }, n, p, d }
    }

    pub fn validate(&self) -> Result<()> {
        modulus(self.p, self.d)?;
        if self.n == 0 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        match &self.kind {
            EnsembleKind::Corner { extra } if *extra < 1 => {
                Err(Error::Domain("corner ensemble needs D >= 1".into()))
            }
            EnsembleKind::FixedSn { lambda } => {
                if lambda.len() > self.n {
                    return Err(Error::Domain(format!("lambda longer than N = {}", self.n)));
                }
                if lambda.windows(2).any(|w| w[0] < w[1]) {
                    return Err(Error::InvalidSignature(format!("{lambda:?} not weakly decreasing")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `lambda` padded to length `N` and capped at `d`.
    pub fn fixed_parts(&self) -> Option<Vec<u32>> {
        match &self.kind {
            EnsembleKind::FixedSn { lambda } => {
                let mut v: Vec<u32> = lambda.iter().map(|&x| x.min(self.d)).collect();
                v.resize(self.n, 0);
                Some(v)
            }
            _ => None,
        }
    }

    /// Exact law of `corank(A mod p)`, indexed by corank.
    pub fn corank_pmf(&self) -> Result<Vec<Q>> {
        self.validate()?;
        Ok(match &self.kind {
            EnsembleKind::IidHaar => corank_pmf_iid(self.n as u64, self.p),
            EnsembleKind::Corner { extra } => corank_pmf_corner(self.n as u64, *extra as u64, self.p),
            EnsembleKind::FixedSn { .. } => {
                let x = self.fixed_parts().unwrap().iter().filter(|&&v| v > 0).count();
                (0..=self.n).map(|c| if c == x { Q::one() } else { Q::zero() }).collect()
            }
        })
    }
}

/// iid uniform entries in `[0, p^d)`.
pub fn sample_additive_haar<R: Rng + ?Sized>(n: usize, p: u64, d: u32, rng: &mut R) -> Result<MatModPd> {
    let md = modulus(p, d)?;
    let entries = (0..n * n).map(|_| rng.random_range(0..md)).collect();
    MatModPd::from_flat(p, d, n, n, entries)
}

/// Row-reduced basis of a subspace of `F_p^n`, used to test span membership.
struct SpanModP {
    p: u64,
    rows: Vec<(usize, Vec<u64>)>,
}

impl SpanModP {
    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut w: Vec<u64> = v.iter().map(|x| x % p).collect();
        for (piv, b) in &self.rows {
            let f = w[*piv];
            if f != 0 {
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi = sub_mod(*wi, mul_mod(f, *bi, p), p);
                }
            }
        }
        w
    }

    /// Adds `v` if it is independent of the span; returns whether it was.
    fn insert(&mut self, v: &[u64]) -> bool {
        let p = self.p;
        let w = self.reduce(v);
        let Some(piv) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(w[piv], p);
        let w: Vec<u64> = w.iter().map(|&x| mul_mod(x, inv, p)).collect();
        for (_, b) in self.rows.iter_mut() {
            let f = b[piv];
            if f != 0 {
                for (bi, wi) in b.iter_mut().zip(&w) {
                    *bi = sub_mod(*bi, mul_mod(f, *wi, p), p);
                }
            }
        }
        self.rows.push((piv, w));
        true
    }
}

/// Haar element of `GL_n(Z_p)` reduced mod `p^d`: columns are drawn right to
/// left, each uniform subject to its reduction mod `p` avoiding the span of
/// the columns already drawn (by rejection).
pub fn sample_haar_gl<R: Rng + ?Sized>(n: usize, p: u64, d: u32, rng: &mut R) -> Result<MatModPd> {
    let md = modulus(p, d)?;
    let mut cols: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut span = SpanModP { p, rows: Vec::with_capacity(n) };
    for j in (0..n).rev() {
        loop {
            let v: Vec<u64> = (0..n).map(|_| rng.random_range(0..md)).collect();
            if span.insert(&v) {
                cols[j] = v;
                break;
            }
        }
    }
    let entries = (0..n).flat_map(|i| cols.iter().map(move |c| c[i])).collect();
    MatModPd::from_flat(p, d, n, n, entries)
}

/// One draw from the law described by `spec`.
pub fn sample_ensemble<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<MatModPd> {
    spec.validate()?;
    let (n, p, d) = (spec.n, spec.p, spec.d);
    match &spec.kind {
        EnsembleKind::IidHaar => sample_additive_haar(n, p, d, rng),
        EnsembleKind::Corner { extra } => sample_haar_gl(n + *extra as usize, p, d, rng)?.block(n, n),
        EnsembleKind::FixedSn { .. } => {
            let u = sample_haar_gl(n, p, d, rng)?;
            let v = sample_haar_gl(n, p, d, rng)?;
            let diag = MatModPd::diag_powers(p, d, &spec.fixed_parts().unwrap())?;
            matmul(&matmul(&u, &diag)?, &v)
        }
    }
}

fn check_state(nu: &CappedSn, spec: &EnsembleSpec) -> Result<()> {
    if nu.len() != spec.n || nu.d != spec.d {
        return Err(Error::Dimension(format!(
            "state of length {} at level {} for N = {}, d = {}",
            nu.len(),
            nu.d,
            spec.n,
            spec.d
        )));
    }
    Ok(())
}

/// One step of the singular-number chain: `SN(A U diag(p^nu))` with `A ~ spec`
/// and a fresh Haar `U`.
pub fn chain_step<R: Rng + ?Sized>(nu: &CappedSn, spec: &EnsembleSpec, rng: &mut R) -> Result<CappedSn> {
    check_state(nu, spec)?;
    let a = sample_ensemble(spec, rng)?;
    let u = sample_haar_gl(spec.n, spec.p, spec.d, rng)?;
    let diag = MatModPd::diag_powers(spec.p, spec.d, &nu.parts)?;
    Ok(smith_sn(&matmul(&matmul(&a, &u)?, &diag)?))
}

fn check_record(steps: usize, record_at: &[usize]) -> Result<()> {
    if record_at.windows(2).any(|w| w[0] > w[1]) || record_at.last().is_some_and(|&s| s > steps) {
        return Err(Error::Domain("record_at must be sorted and within [0, steps]".into()));
    }
    Ok(())
}

/// Repeated `chain_step`, returning the states at the requested step indices.
pub fn run_chain<R: Rng + ?Sized>(
    init: &CappedSn,
    spec: &EnsembleSpec,
    steps: usize,
    record_at: &[usize],
    rng: &mut R,
) -> Result<Vec<CappedSn>> {
    check_state(init, spec)?;
    check_record(steps, record_at)?;
    let mut out = Vec::with_capacity(record_at.len());
    let mut cur = init.clone();
    let mut k = 0;
    for step in 0..=steps {
        while k < record_at.len() && record_at[k] == step {
            out.push(cur.clone());
            k += 1;
        }
        if step < steps {
            cur = chain_step(&cur, spec, rng)?;
        }
    }
    Ok(out)
}

/// Validation variant of [`run_chain`] that carries the full product
/// `A_tau ... A_1 diag(p^init)` instead of refreshing a Haar factor.
pub fn run_chain_product<R: Rng + ?Sized>(
    init: &CappedSn,
    spec: &EnsembleSpec,
    steps: usize,
    record_at: &[usize],
    rng: &mut R,
) -> Result<Vec<CappedSn>> {
    check_state(init, spec)?;
    check_record(steps, record_at)?;
    let mut m = MatModPd::diag_powers(spec.p, spec.d, &init.parts)?;
    let mut out = Vec::with_capacity(record_at.len());
    let mut k = 0;
    for step in 0..=steps {
        while k < record_at.len() && record_at[k] == step {
            out.push(smith_sn(&m));
            k += 1;
        }
        if step < steps {
            m = matmul(&sample_ensemble(spec, rng)?, &m)?;
        }
    }
    Ok(out)
}
