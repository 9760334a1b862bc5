//! Matrices over `Z/p^d`, truncated singular numbers via Smith normal form,
//! coranks mod `p`, and a determinantal-divisor oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signatures::{ExtInt, Signature};

/// An `rows x cols` matrix with entries in `[0, p^d)`, row major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct MatModPd {
    p: u64,
    d: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    p: u64,
    d: u32,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<u64>>,
}

impl TryFrom<RawMatrix> for MatModPd {
    type Error = Error;
    fn try_from(r: RawMatrix) -> Result<Self> {
        if r.entries.len() != r.rows || r.entries.iter().any(|row| row.len() != r.cols) {
            return Err(Error::Dimension(format!(
                "entries do not form a {} x {} array",
                r.rows, r.cols
            )));
        }
        let flat = r.entries.into_iter().flatten().collect();
        MatModPd::from_flat(r.p, r.d, r.rows, r.cols, flat)
    }
}

impl From<MatModPd> for RawMatrix {
    fn from(m: MatModPd) -> Self {
        RawMatrix {
            p: m.p,
            d: m.d,
            rows: m.rows,
            cols: m.cols,
            entries: (0..m.rows).map(|i| m.entries[i * m.cols..(i + 1) * m.cols].to_vec()).collect(),
        }
    }
}

/// `p^d`, rejecting moduli that do not fit comfortably in 63 bits.
pub fn modulus(p: u64, d: u32) -> Result<u64> {
    if p < 2 || d < 1 {
        return Err(Error::Modulus(format!("need p >= 2 and d >= 1, got p={p}, d={d}")));
    }
    if (2..).take_while(|k| k * k <= p).any(|k| p % k == 0) {
        return Err(Error::Modulus(format!("p = {p} is not prime")));
    }
    match p.checked_pow(d) {
        Some(m) if m < (1u64 << 63) => Ok(m),
        _ => Err(Error::Modulus(format!("{p}^{d} does not fit below 2^63"))),
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

/// Inverse of a unit `u` modulo `m`.
pub(crate) fn inv_mod(u: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (u % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "not a unit");
    s0.rem_euclid(m as i128) as u64
}

/// `p`-adic valuation of `x` in `Z/p^d`, with 0 mapped to `d`.
pub fn valuation(mut x: u64, p: u64, d: u32) -> u32 {
    if x == 0 {
        return d;
    }
    let mut v = 0;
    while x % p == 0 && v < d {
        x /= p;
        v += 1;
    }
    v
}

impl MatModPd {
    pub fn zeros(p: u64, d: u32, rows: usize, cols: usize) -> Result<Self> {
        modulus(p, d)?;
        Ok(MatModPd { p, d, rows, cols, entries: vec![0; rows * cols] })
    }

    pub fn identity(p: u64, d: u32, n: usize) -> Result<Self> {
        let mut m = MatModPd::zeros(p, d, n, n)?;
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        Ok(m)
    }

    /// Builds from row vectors; entries are reduced mod `p^d`.
    pub fn from_rows(p: u64, d: u32, rows: &[Vec<u64>]) -> Result<Self> {
        let md = modulus(p, d)?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let entries = rows.iter().flatten().map(|&x| x % md).collect();
        Ok(MatModPd { p, d, rows: rows.len(), cols, entries })
    }

    /// Builds from a flat row-major vector of already reduced entries.
    pub fn from_flat(p: u64, d: u32, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self> {
        let md = modulus(p, d)?;
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for {rows} x {cols}", entries.len())));
        }
        if entries.iter().any(|&x| x >= md) {
            return Err(Error::Modulus(format!("entry outside [0, {md})")));
        }
        Ok(MatModPd { p, d, rows, cols, entries })
    }

    /// `diag(p^{parts})`; parts `>= d` give zero diagonal entries.
    pub fn diag_powers(p: u64, d: u32, parts: &[u32]) -> Result<Self> {
        let n = parts.len();
        let mut m = MatModPd::zeros(p, d, n, n)?;
        for (i, &e) in parts.iter().enumerate() {
            m.entries[i * n + i] = if e >= d { 0 } else { p.pow(e) };
        }
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.d)
    }
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        let md = self.modulus();
        self.entries[i * self.cols + j] = v % md;
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Top-left `r x c` block.
    pub fn block(&self, r: usize, c: usize) -> Result<Self> {
        if r > self.rows || c > self.cols {
            return Err(Error::Dimension(format!("block {r} x {c} of {} x {}", self.rows, self.cols)));
        }
        let entries = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        Ok(MatModPd { entries, rows: r, cols: c, ..*self })
    }

    /// Submatrix on the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let entries = rows.iter().flat_map(|&i| cols.iter().map(move |&j| (i, j))).map(|(i, j)| self.get(i, j)).collect();
        MatModPd { entries, rows: rows.len(), cols: cols.len(), ..*self }
    }

    /// Reduction to a smaller exponent `d2 <= d`.
    pub fn reduce(&self, d2: u32) -> Result<Self> {
        if d2 > self.d || d2 < 1 {
            return Err(Error::Modulus(format!("cannot reduce mod p^{} to p^{d2}", self.d)));
        }
        let md = self.p.pow(d2);
        Ok(MatModPd {
            d: d2,
            entries: self.entries.iter().map(|x| x % md).collect(),
            ..*self
        })
    }

    fn check_same_ring(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.d != other.d {
            return Err(Error::Modulus(format!(
                "p^d mismatch: {}^{} vs {}^{}",
                self.p, self.d, other.p, other.d
            )));
        }
        Ok(())
    }
}

/// `A B mod p^d`.
pub fn matmul(a: &MatModPd, b: &MatModPd) -> Result<MatModPd> {
    a.check_same_ring(b)?;
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "{} x {} times {} x {}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let md = a.modulus() as u128;
    let mut out = vec![0u64; a.rows * b.cols];
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc: u128 = 0;
            for k in 0..a.cols {
                acc += a.get(i, k) as u128 * b.get(k, j) as u128;
                if acc >= 1u128 << 126 {
                    acc %= md;
                }
            }
            out[i * b.cols + j] = (acc % md) as u64;
        }
    }
    Ok(MatModPd { p: a.p, d: a.d, rows: a.rows, cols: b.cols, entries: out })
}

/// Truncated singular numbers: weakly decreasing, each in `0..=d`, where `d`
/// stands for "at least d".
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CappedSn {
    pub d: u32,
    pub parts: Vec<u32>,
}

impl CappedSn {
    pub fn new(d: u32, parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) || parts.iter().any(|&x| x > d) {
            return Err(Error::InvalidSignature(format!("{parts:?} is not a capped signature at level {d}")));
        }
        Ok(CappedSn { d, parts })
    }

    pub fn zeros(d: u32, n: usize) -> Self {
        CappedSn { d, parts: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn to_signature(&self) -> Signature {
        Signature::new(self.parts.iter().map(|&x| ExtInt::Fin(x as i64)).collect()).expect("sorted")
    }

    /// Number of nonzero parts.
    pub fn len_nonzero(&self) -> usize {
        self.parts.iter().filter(|&&x| x > 0).count()
    }
}

/// `F_d(SN(A))` by minimal-valuation pivoting (row-major tie-break).
pub fn smith_sn(a: &MatModPd) -> CappedSn {
    let (p, d, md) = (a.p, a.d, a.modulus());
    let (rows, cols) = (a.rows, a.cols);
    let mut m = a.entries.clone();
    let n = rows.min(cols);
    let mut parts = Vec::with_capacity(n);
    for s in 0..n {
        let mut best: Option<(u32, usize, usize)> = None;
        'scan: for i in s..rows {
            for j in s..cols {
                let x = m[i * cols + j];
                if x == 0 {
                    continue;
                }
                let v = valuation(x, p, d);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                    if v == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            parts.resize(n, d);
            break;
        };
        if pi != s {
            for j in 0..cols {
                m.swap(s * cols + j, pi * cols + j);
            }
        }
        if pj != s {
            for i in 0..rows {
                m.swap(i * cols + s, i * cols + pj);
            }
        }
        let pv = p.pow(v);
        let unit_inv = inv_mod(m[s * cols + s] / pv, md);
        for i in s + 1..rows {
            let x = m[i * cols + s];
            if x == 0 {
                continue;
            }
            let f = mul_mod(x / pv, unit_inv, md);
            for j in s..cols {
                let y = mul_mod(f, m[s * cols + j], md);
                m[i * cols + j] = sub_mod(m[i * cols + j], y, md);
            }
        }
        // Column clearing only touches row s once column s is zero below it.
        for j in s + 1..cols {
            m[s * cols + j] = 0;
        }
        parts.push(v);
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    CappedSn { d, parts }
}

/// Valuation of `det A`, capped at `d`.
pub fn det_valuation(a: &MatModPd) -> Result<u32> {
    if a.rows != a.cols {
        return Err(Error::Dimension(format!("det of {} x {}", a.rows, a.cols)));
    }
    Ok(smith_sn(a).parts.iter().sum::<u32>().min(a.d))
}

fn det_laplace(m: &[u64], n: usize, md: u64) -> u64 {
    match n {
        0 => 1 % md,
        1 => m[0],
        2 => sub_mod(mul_mod(m[0], m[3], md), mul_mod(m[1], m[2], md), md),
        _ => {
            let mut acc = 0u64;
            let mut minor = Vec::with_capacity((n - 1) * (n - 1));
            for c in 0..n {
                if m[c] == 0 {
                    continue;
                }
                minor.clear();
                for i in 1..n {
                    for j in 0..n {
                        if j != c {
                            minor.push(m[i * n + j]);
                        }
                    }
                }
                let term = mul_mod(m[c], det_laplace(&minor, n - 1, md), md);
                acc = if c % 2 == 0 { (acc + term) % md } else { sub_mod(acc, term, md) };
            }
            acc
        }
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Minimum valuation over all `k x k` minors (cofactor expansion), capped at `d`.
/// Restricted to matrices with at most 6 rows and columns.
pub fn minor_valuation_oracle(a: &MatModPd, k: usize) -> Result<u32> {
    if a.rows > 6 || a.cols > 6 {
        return Err(Error::Dimension(format!("oracle limited to 6 x 6, got {} x {}", a.rows, a.cols)));
    }
    if k > a.rows.min(a.cols) {
        return Err(Error::Dimension(format!("k = {k} exceeds min dimension")));
    }
    let md = a.modulus();
    let mut best = a.d;
    for r in combinations(a.rows, k) {
        for c in combinations(a.cols, k) {
            let sub = a.select(&r, &c);
            let v = valuation(det_laplace(&sub.entries, k, md), a.p, a.d);
            best = best.min(v);
            if best == 0 {
                return Ok(0);
            }
        }
    }
    Ok(best)
}

/// `min(rows, cols) - rank(A mod p)` by Gaussian elimination over `F_p`.
pub fn corank_mod_p(a: &MatModPd) -> usize {
    let p = a.p;
    let (rows, cols) = (a.rows, a.cols);
    let mut m: Vec<u64> = a.entries.iter().map(|x| x % p).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| m[i * cols + c] != 0) else {
            continue;
        };
        for j in 0..cols {
            m.swap(rank * cols + j, piv * cols + j);
        }
        let inv = inv_mod(m[rank * cols + c], p);
        for i in rank + 1..rows {
            let x = m[i * cols + c];
            if x == 0 {
                continue;
            }
            let f = mul_mod(x, inv, p);
            for j in c..cols {
                let y = mul_mod(f, m[rank * cols + j], p);
                m[i * cols + j] = sub_mod(m[i * cols + j], y, p);
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rows.min(cols) - rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u64, d: u32, rows: &[&[u64]]) -> MatModPd {
        MatModPd::from_rows(p, d, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn smith_examples() {
        assert_eq!(smith_sn(&MatModPd::identity(3, 2, 4).unwrap()).parts, vec![0; 4]);
        assert_eq!(smith_sn(&m(2, 3, &[&[4, 0], &[0, 2]])).parts, vec![2, 1]);
        let a = m(2, 3, &[&[2, 3], &[4, 6]]);
        assert_eq!(smith_sn(&a).parts, vec![3, 0]);
        assert_eq!(det_valuation(&a).unwrap(), 3);
        assert_eq!(corank_mod_p(&a), 1);
        assert_eq!(minor_valuation_oracle(&a, 1).unwrap(), 0);
        assert_eq!(minor_valuation_oracle(&a, 2).unwrap(), 3);
    }

    #[test]
    fn det_and_corank_examples() {
        assert_eq!(det_valuation(&MatModPd::identity(2, 3, 3).unwrap()).unwrap(), 0);
        assert_eq!(det_valuation(&m(3, 3, &[&[3, 0], &[0, 3]])).unwrap(), 2);
        assert_eq!(corank_mod_p(&MatModPd::identity(5, 1, 3).unwrap()), 0);
        assert_eq!(corank_mod_p(&MatModPd::zeros(5, 1, 3, 3).unwrap()), 3);
        assert_eq!(minor_valuation_oracle(&MatModPd::identity(2, 2, 3).unwrap(), 3).unwrap(), 0);
    }

    #[test]
    fn matmul_examples() {
        let a = m(2, 3, &[&[2, 3], &[4, 6]]);
        let i = MatModPd::identity(2, 3, 2).unwrap();
        assert_eq!(matmul(&a, &i).unwrap(), a);
        let b = m(2, 3, &[&[1, 1], &[1, 1]]);
        assert_eq!(matmul(&a, &b).unwrap(), m(2, 3, &[&[5, 5], &[2, 2]]));
        assert!(matmul(&a, &MatModPd::identity(3, 3, 2).unwrap()).is_err());
        assert!(matmul(&a, &MatModPd::identity(2, 3, 3).unwrap()).is_err());
    }

    #[test]
    fn rectangular_smith() {
        let a = m(3, 2, &[&[3, 0, 0], &[0, 0, 0]]);
        assert_eq!(smith_sn(&a).parts, vec![2, 1]);
        assert_eq!(corank_mod_p(&a), 2);
    }

    #[test]
    fn modulus_guard() {
        assert!(modulus(2, 63).is_err());
        assert!(modulus(2, 62).is_ok());
        assert!(modulus(1, 3).is_err());
        assert!(modulus(4, 2).is_err());
        assert!(modulus(7, 2).is_ok());
    }

    #[test]
    fn json_matrix() {
        let a: MatModPd =
            serde_json::from_str(r#"{"p":2,"d":3,"rows":2,"cols":2,"entries":[[2,3],[4,6]]}"#).unwrap();
        assert_eq!(smith_sn(&a).parts, vec![3, 0]);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"{"p":2,"d":3,"rows":2,"cols":2,"entries":[[2,3],[4,6]]}"#
        );
        assert!(serde_json::from_str::<MatModPd>(r#"{"p":2,"d":3,"rows":2,"cols":2,"entries":[[2,3]]}"#).is_err());
    }
}
