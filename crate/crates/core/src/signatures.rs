//! Extended integers, signatures and bi-infinite window signatures.
//!
//! A bi-infinite signature is stored as a finite window plus two constant
//! fills. Window entry `j` (zero based) sits at absolute index `j + 1 - offset`,
//! so `WindowSignature::from_finite(lambda, r)` is the shifted embedding that
//! puts `lambda_{r+i}` at index `i`, `+inf` below and `-inf` above.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An integer extended by `-inf` and `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtInt {
    NegInf,
    Fin(i64),
    PosInf,
}

impl ExtInt {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtInt::Fin(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ExtInt::Fin(v) => Some(v),
            _ => None,
        }
    }

    /// `min(self, d)`.
    pub fn cap(self, d: i64) -> ExtInt {
        self.min(ExtInt::Fin(d))
    }

    /// `self - other` with `inf - inf = (-inf) - (-inf) = 0`; requires `other <= self`.
    pub fn diff(self, other: ExtInt) -> Option<ExtInt> {
        use ExtInt::*;
        match (self, other) {
            _ if other > self => None,
            (PosInf, PosInf) | (NegInf, NegInf) => Some(Fin(0)),
            (PosInf, _) | (_, NegInf) => Some(PosInf),
            (Fin(a), Fin(b)) => Some(Fin(a - b)),
            _ => None,
        }
    }

    pub fn succ(self) -> ExtInt {
        match self {
            ExtInt::Fin(v) => ExtInt::Fin(v + 1),
            x => x,
        }
    }
}

impl From<i64> for ExtInt {
    fn from(v: i64) -> Self {
        ExtInt::Fin(v)
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => write!(f, "-inf"),
            ExtInt::PosInf => write!(f, "inf"),
            ExtInt::Fin(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for ExtInt {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" => Ok(ExtInt::PosInf),
            "-inf" => Ok(ExtInt::NegInf),
            x => x
                .parse::<i64>()
                .map(ExtInt::Fin)
                .map_err(|e| Error::Parse(format!("extended integer {x:?}: {e}"))),
        }
    }
}

impl Serialize for ExtInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtInt::Fin(v) => s.serialize_i64(*v),
            ExtInt::PosInf => s.serialize_str("inf"),
            ExtInt::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(ExtInt::Fin(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A finite weakly decreasing tuple of extended integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<ExtInt>", into = "Vec<ExtInt>")]
pub struct Signature {
    parts: Vec<ExtInt>,
}

impl TryFrom<Vec<ExtInt>> for Signature {
    type Error = Error;
    fn try_from(parts: Vec<ExtInt>) -> Result<Self> {
        Signature::new(parts)
    }
}

impl From<Signature> for Vec<ExtInt> {
    fn from(s: Signature) -> Self {
        s.parts
    }
}

impl Signature {
    pub fn new(parts: Vec<ExtInt>) -> Result<Self> {
        if let Some(w) = parts.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::InvalidSignature(format!(
                "parts not weakly decreasing at position {w}: {} < {}",
                parts[w],
                parts[w + 1]
            )));
        }
        Ok(Signature { parts })
    }

    pub fn from_ints(parts: &[i64]) -> Result<Self> {
        Signature::new(parts.iter().map(|&v| ExtInt::Fin(v)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Signature { parts: vec![ExtInt::Fin(0); n] }
    }

    pub fn parts(&self) -> &[ExtInt] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Parts as plain integers; fails on infinite parts.
    pub fn to_ints(&self) -> Result<Vec<i64>> {
        self.parts
            .iter()
            .map(|p| {
                p.finite()
                    .ok_or_else(|| Error::InvalidSignature(format!("infinite part {p}")))
            })
            .collect()
    }

    /// Number of nonzero parts.
    pub fn len_nonzero(&self) -> usize {
        self.parts.iter().filter(|&&p| p != ExtInt::Fin(0)).count()
    }

    /// Every part replaced by `min(part, d)`.
    pub fn truncate(&self, d: i64) -> Signature {
        Signature {
            parts: self.parts.iter().map(|p| p.cap(d)).collect(),
        }
    }

    /// Pointwise order; signatures of different lengths are never comparable.
    pub fn contained_in(&self, other: &Signature) -> bool {
        self.len() == other.len() && self.parts.iter().zip(&other.parts).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Level counts `nu'_v` for `v` in `first_level..first_level + counts.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugateParts {
    pub first_level: i64,
    pub counts: Vec<u64>,
}

impl ConjugateParts {
    pub fn get(&self, v: i64) -> Option<u64> {
        let k = v - self.first_level;
        if k < 0 {
            return None;
        }
        self.counts.get(k as usize).copied()
    }
}

/// `nu'_v = #{i : sig_i >= v}` for `v = 1..=d`.
pub fn conjugate(sig: &Signature, d: i64) -> ConjugateParts {
    let counts = (1..=d.max(0))
        .map(|v| sig.parts.iter().filter(|&&p| p >= ExtInt::Fin(v)).count() as u64)
        .collect();
    ConjugateParts { first_level: 1, counts }
}

/// Rebuilds `F_d(sig)` of a nonnegative signature of length `n` from its level
/// counts `nu'_1..nu'_d`.
pub fn from_conjugate(conj: &ConjugateParts, n: usize) -> Result<Signature> {
    if conj.first_level != 1 {
        return Err(Error::Domain("level counts must start at level 1".into()));
    }
    let parts = (1..=n as u64)
        .map(|i| ExtInt::Fin(conj.counts.iter().take_while(|&&c| c >= i).count() as i64))
        .collect();
    Signature::new(parts)
}

/// An element of the bi-infinite extended signatures stored as a window and
/// two fills.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawWindow", into = "RawWindow")]
pub struct WindowSignature {
    offset: i64,
    window: Signature,
    left: ExtInt,
    right: ExtInt,
}

#[derive(Serialize, Deserialize)]
struct RawWindow {
    offset: i64,
    window: Signature,
    left: ExtInt,
    right: ExtInt,
}

impl TryFrom<RawWindow> for WindowSignature {
    type Error = Error;
    fn try_from(r: RawWindow) -> Result<Self> {
        WindowSignature::new(r.offset, r.window, r.left, r.right)
    }
}

impl From<WindowSignature> for RawWindow {
    fn from(w: WindowSignature) -> Self {
        RawWindow { offset: w.offset, window: w.window, left: w.left, right: w.right }
    }
}

impl WindowSignature {
    pub fn new(offset: i64, window: Signature, left: ExtInt, right: ExtInt) -> Result<Self> {
        let first = window.parts.first().copied().unwrap_or(right);
        let last = window.parts.last().copied().unwrap_or(left);
        if left < first || last < right || left < right {
            return Err(Error::InvalidSignature(format!(
                "fills {left} / {right} inconsistent with window {window}"
            )));
        }
        Ok(WindowSignature { offset, window, left, right })
    }

    /// Window signature with parts given at absolute indices `lo, lo+1, ...`.
    pub fn from_parts_at(lo: i64, parts: Vec<ExtInt>, left: ExtInt, right: ExtInt) -> Result<Self> {
        WindowSignature::new(1 - lo, Signature::new(parts)?, left, right)
    }

    /// The shifted embedding `s^r(iota(lambda))`: `lambda_{r+i}` at index `i`,
    /// `+inf` at indices `<= -r`, `-inf` above `len - r`.
    pub fn from_finite(lambda: &Signature, r: i64) -> Self {
        WindowSignature {
            offset: r,
            window: lambda.clone(),
            left: ExtInt::PosInf,
            right: ExtInt::NegInf,
        }
    }

    /// The constant signature `(a)_{i in Z}`.
    pub fn flat(a: ExtInt) -> Self {
        WindowSignature { offset: 0, window: Signature::default(), left: a, right: a }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }
    pub fn window(&self) -> &Signature {
        &self.window
    }
    pub fn left(&self) -> ExtInt {
        self.left
    }
    pub fn right(&self) -> ExtInt {
        self.right
    }

    /// Absolute index of the first window entry.
    pub fn lo(&self) -> i64 {
        1 - self.offset
    }

    /// Absolute index of the last window entry (`lo - 1` for an empty window).
    pub fn hi(&self) -> i64 {
        self.window.len() as i64 - self.offset
    }

    pub fn get(&self, i: i64) -> ExtInt {
        if i < self.lo() {
            self.left
        } else if i > self.hi() {
            self.right
        } else {
            self.window.parts[(i - self.lo()) as usize]
        }
    }

    /// Parts at indices `a..=b`.
    pub fn range(&self, a: i64, b: i64) -> Vec<ExtInt> {
        (a..=b).map(|i| self.get(i)).collect()
    }

    /// Same element with the window widened to cover at least `a..=b`.
    pub fn expanded(&self, a: i64, b: i64) -> WindowSignature {
        let lo = a.min(self.lo());
        let hi = b.max(self.hi());
        WindowSignature {
            offset: 1 - lo,
            window: Signature { parts: self.range(lo, hi) },
            left: self.left,
            right: self.right,
        }
    }

    /// Same element with fill-equal entries stripped from both window ends.
    pub fn canonical(&self) -> WindowSignature {
        let p = &self.window.parts;
        let start = p.iter().take_while(|&&x| x == self.left).count();
        let end = p.len() - p[start..].iter().rev().take_while(|&&x| x == self.right).count();
        if start >= end {
            return WindowSignature {
                offset: 1 - (self.lo() + start as i64),
                window: Signature::default(),
                left: self.left,
                right: self.right,
            };
        }
        WindowSignature {
            offset: self.offset - start as i64,
            window: Signature { parts: p[start..end].to_vec() },
            left: self.left,
            right: self.right,
        }
    }

    /// `F_d`: every part and both fills capped at `d`.
    pub fn truncate(&self, d: i64) -> WindowSignature {
        WindowSignature {
            offset: self.offset,
            window: self.window.truncate(d),
            left: self.left.cap(d),
            right: self.right.cap(d),
        }
    }

    /// Forward shift applied `k` times: entry at index `i + k` moves to index `i`.
    pub fn shift(&self, k: i64) -> WindowSignature {
        WindowSignature { offset: self.offset + k, ..self.clone() }
    }

    /// Conjugate part at level `v` in the bi-infinite sense: the unique index
    /// `j` with `mu_j >= v > mu_{j+1}`, `+inf` if `v <= right fill`, `-inf` if
    /// `v > left fill`.
    pub fn conjugate_at(&self, v: i64) -> ExtInt {
        let level = ExtInt::Fin(v);
        if level <= self.right {
            return ExtInt::PosInf;
        }
        if level > self.left {
            return ExtInt::NegInf;
        }
        let n = self.window.parts.iter().filter(|&&p| p >= level).count() as i64;
        ExtInt::Fin(self.lo() - 1 + n)
    }

    /// Pointwise `self <= other`.
    pub fn contained_in(&self, other: &WindowSignature) -> bool {
        if self.left > other.left || self.right > other.right {
            return false;
        }
        let lo = self.lo().min(other.lo());
        let hi = self.hi().max(other.hi());
        (lo..=hi).all(|i| self.get(i) <= other.get(i))
    }
}

impl PartialEq for WindowSignature {
    fn eq(&self, other: &Self) -> bool {
        if self.left != other.left || self.right != other.right {
            return false;
        }
        let lo = self.lo().min(other.lo());
        let hi = self.hi().max(other.hi());
        (lo..=hi).all(|i| self.get(i) == other.get(i))
    }
}

impl Eq for WindowSignature {}

impl Hash for WindowSignature {
    fn hash<H: Hasher>(&self, h: &mut H) {
        let c = self.canonical();
        c.offset.hash(h);
        c.window.hash(h);
        c.left.hash(h);
        c.right.hash(h);
    }
}

impl PartialOrd for WindowSignature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else if self.contained_in(other) {
            Some(Ordering::Less)
        } else if other.contained_in(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl fmt::Display for WindowSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..] ", self.left)?;
        for i in self.lo()..=self.hi() {
            write!(f, "{i}:{} ", self.get(i))?;
        }
        write!(f, "[..{}]", self.right)
    }
}

/// `nu subset kappa`, pointwise.
pub fn skew_contains(nu: &WindowSignature, kappa: &WindowSignature) -> bool {
    nu.contained_in(kappa)
}

/// `sum_i (kappa_i - nu_i)` with the conventions `inf - inf = (-inf) - (-inf) = 0`
/// and `inf - n = n - (-inf) = inf`. Returns `PosInf` for infinite size.
pub fn skew_size(nu: &WindowSignature, kappa: &WindowSignature) -> Result<ExtInt> {
    if !nu.contained_in(kappa) {
        return Err(Error::Domain(format!("{kappa} does not contain {nu}")));
    }
    if nu.left != kappa.left || nu.right != kappa.right {
        // Fills differ, so infinitely many coordinates differ.
        return Ok(ExtInt::PosInf);
    }
    let lo = nu.lo().min(kappa.lo());
    let hi = nu.hi().max(kappa.hi());
    let mut total = 0i64;
    for i in lo..=hi {
        match kappa.get(i).diff(nu.get(i)) {
            Some(ExtInt::Fin(x)) => total += x,
            _ => return Ok(ExtInt::PosInf),
        }
    }
    Ok(ExtInt::Fin(total))
}

/// Every valid `eta` with `nu subset eta subset kappa`, in lexicographic order
/// of the parts (lowest index first, smaller value first).
pub fn interval_states(nu: &WindowSignature, kappa: &WindowSignature) -> Result<Vec<WindowSignature>> {
    match skew_size(nu, kappa)? {
        ExtInt::Fin(_) => {}
        _ => return Err(Error::Domain("interval with infinite skew size".into())),
    }
    let lo = nu.lo().min(kappa.lo());
    let hi = nu.hi().max(kappa.hi());
    let lower: Vec<ExtInt> = nu.range(lo, hi);
    let upper: Vec<ExtInt> = kappa.range(lo, hi);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(lower.len());
    fn rec(
        k: usize,
        prev: ExtInt,
        lower: &[ExtInt],
        upper: &[ExtInt],
        cur: &mut Vec<ExtInt>,
        out: &mut Vec<Vec<ExtInt>>,
    ) {
        if k == lower.len() {
            out.push(cur.clone());
            return;
        }
        let (a, b) = (lower[k], upper[k].min(prev));
        if a > b {
            return;
        }
        match (a, b) {
            (ExtInt::Fin(x), ExtInt::Fin(y)) => {
                for v in x..=y {
                    cur.push(ExtInt::Fin(v));
                    rec(k + 1, ExtInt::Fin(v), lower, upper, cur, out);
                    cur.pop();
                }
            }
            // Finite skew size: an infinite bound here means lower == upper.
            _ => {
                cur.push(a);
                rec(k + 1, a, lower, upper, cur, out);
                cur.pop();
            }
        }
    }
    let mut raw = Vec::new();
    rec(0, nu.left.max(kappa.left), &lower, &upper, &mut cur, &mut raw);
    for parts in raw {
        out.push(WindowSignature {
            offset: 1 - lo,
            window: Signature { parts },
            left: nu.left,
            right: nu.right,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExtInt::*;

    #[test]
    fn conjugate_examples() {
        let s = Signature::from_ints(&[3, 1, 1, 0]).unwrap();
        assert_eq!(conjugate(&s, 3).counts, vec![3, 1, 1]);
        assert_eq!(conjugate(&Signature::default(), 4).counts, vec![0; 4]);
        let s = Signature::new(vec![PosInf, Fin(2), Fin(0)]).unwrap();
        assert_eq!(conjugate(&s, 4).counts, vec![2, 2, 1, 1]);
    }

    #[test]
    fn truncate_examples() {
        let s = Signature::new(vec![Fin(5), Fin(2), NegInf]).unwrap();
        assert_eq!(s.truncate(3), Signature::new(vec![Fin(3), Fin(2), NegInf]).unwrap());
        let z = Signature::from_ints(&[0, 0]).unwrap();
        assert_eq!(z.truncate(0), z);
        let x = Signature::from_ints(&[7, 4, 1]).unwrap();
        assert_eq!(x.truncate(5).truncate(2), Signature::from_ints(&[2, 2, 1]).unwrap());
    }

    #[test]
    fn rejects_increasing() {
        assert!(Signature::from_ints(&[0, 1]).is_err());
        assert!(WindowSignature::from_parts_at(0, vec![Fin(3)], Fin(2), NegInf).is_err());
    }

    #[test]
    fn skew_examples() {
        let a = WindowSignature::from_parts_at(0, vec![Fin(1), Fin(0)], PosInf, NegInf).unwrap();
        let b = WindowSignature::from_parts_at(0, vec![Fin(2), Fin(0)], PosInf, NegInf).unwrap();
        assert!(skew_contains(&a, &b));
        assert_eq!(skew_size(&a, &b).unwrap(), Fin(1));
        let c = WindowSignature::from_parts_at(0, vec![PosInf, Fin(1)], PosInf, NegInf).unwrap();
        let e = WindowSignature::from_parts_at(0, vec![PosInf, Fin(2)], PosInf, NegInf).unwrap();
        assert_eq!(skew_size(&c, &e).unwrap(), Fin(1));
        let f = WindowSignature::from_parts_at(0, vec![Fin(1), Fin(1)], PosInf, NegInf).unwrap();
        assert!(!skew_contains(&f, &b));
        assert!(skew_size(&f, &b).is_err());
        let g = WindowSignature::from_parts_at(0, vec![Fin(3), Fin(1)], PosInf, NegInf).unwrap();
        let h = WindowSignature::from_parts_at(0, vec![PosInf, Fin(1)], PosInf, NegInf).unwrap();
        assert_eq!(skew_size(&g, &h).unwrap(), PosInf);
    }

    #[test]
    fn interval_examples() {
        let z = WindowSignature::from_parts_at(0, vec![Fin(0), Fin(0)], PosInf, NegInf).unwrap();
        let one = WindowSignature::from_parts_at(0, vec![Fin(1), Fin(0)], PosInf, NegInf).unwrap();
        let two = WindowSignature::from_parts_at(0, vec![Fin(1), Fin(1)], PosInf, NegInf).unwrap();
        assert_eq!(interval_states(&z, &one).unwrap(), vec![z.clone(), one.clone()]);
        assert_eq!(interval_states(&z, &two).unwrap(), vec![z.clone(), one, two]);
        assert_eq!(interval_states(&z, &z).unwrap(), vec![z]);
    }

    #[test]
    fn conjugate_at_bi_infinite() {
        // ...,2,2 | 1,1,0 at indices 0,1,2 | 0,0,...
        let mu = WindowSignature::from_parts_at(0, vec![Fin(1), Fin(1), Fin(0)], Fin(2), Fin(0)).unwrap();
        assert_eq!(mu.conjugate_at(2), Fin(-1));
        assert_eq!(mu.conjugate_at(1), Fin(1));
        assert_eq!(mu.conjugate_at(0), PosInf);
        assert_eq!(mu.conjugate_at(3), NegInf);
    }

    #[test]
    fn embedding_and_shift() {
        let lam = Signature::from_ints(&[4, 3, 1]).unwrap();
        let mu = WindowSignature::from_finite(&lam, 2);
        assert_eq!(mu.get(-1), Fin(4));
        assert_eq!(mu.get(0), Fin(3));
        assert_eq!(mu.get(1), Fin(1));
        assert_eq!(mu.get(2), NegInf);
        assert_eq!(mu.get(-2), PosInf);
        assert_eq!(mu.shift(1).get(0), Fin(1));
        assert_eq!(mu.expanded(-5, 5), mu);
        assert_eq!(mu.expanded(-5, 5).canonical().window().len(), 3);
    }

    #[test]
    fn json_round_trip() {
        let mu = WindowSignature::from_parts_at(-1, vec![Fin(2), Fin(1)], PosInf, NegInf).unwrap();
        let s = serde_json::to_string(&mu).unwrap();
        assert_eq!(s, r#"{"offset":2,"window":[2,1],"left":"inf","right":"-inf"}"#);
        let back: WindowSignature = serde_json::from_str(&s).unwrap();
        assert_eq!(back, mu);
        assert!(serde_json::from_str::<Signature>("[1,2]").is_err());
    }
}
