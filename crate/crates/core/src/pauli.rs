//! Phase-free n-qubit Pauli strings in the symplectic (x, z) bit representation,
//! and real-weighted sums of them.
//!
//! Qubit `k` lives in bit `k` of the masks and is the `k`-th character of a text
//! label, so `"XI"` is X on qubit 0.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_size, Error, Result};

const WORD: usize = 64;

/// Single-qubit Pauli, encoded as `(x, z)` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// One of the four phases `i^k` produced by Pauli multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    I,
    MinusOne,
    MinusI,
}

impl Phase {
    fn from_exponent(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Phase::One,
            1 => Phase::I,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::I => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::One => Complex64::new(1.0, 0.0),
            Phase::I => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_exponent(i64::from(self.exponent()) + i64::from(rhs.exponent()))
    }
}

/// An n-qubit Pauli operator without phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let words = n_qubits.div_ceil(WORD).max(1);
        Self {
            n_qubits,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    /// Builds a Pauli from `(qubit, pauli)` pairs; later entries overwrite earlier ones.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = Self::identity(n_qubits);
        for &(q, op) in ops {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            p.set(q, op);
        }
        Ok(p)
    }

    pub fn single(n_qubits: usize, qubit: usize, op: Pauli) -> Result<Self> {
        Self::from_sparse(n_qubits, &[(qubit, op)])
    }

    /// Parses a label of exactly `n` characters over `{I, X, Y, Z}`.
    pub fn parse(label: &str, n: usize) -> Result<Self> {
        let count = label.chars().count();
        if count != n {
            return Err(Error::InvalidLabel {
                label: label.to_string(),
                reason: format!("expected {n} characters, found {count}"),
            });
        }
        let mut p = Self::identity(n);
        for (q, c) in label.chars().enumerate() {
            let op = Pauli::from_char(c).ok_or_else(|| Error::InvalidLabel {
                label: label.to_string(),
                reason: format!("bad character {c:?} at position {q}"),
            })?;
            p.set(q, op);
        }
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let (w, b) = (qubit / WORD, qubit % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, op: Pauli) {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let (w, b) = (qubit / WORD, qubit % WORD);
        let (x, z) = op.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | (u64::from(x) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | (u64::from(z) << b);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Qubits on which the operator acts non-trivially, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&q| self.get(q) != Pauli::I)
            .collect()
    }

    /// The x and z masks as single machine words. Only valid for `n_qubits <= 64`,
    /// which covers every dense (state-vector or matrix) use.
    pub fn masks(&self) -> (u64, u64) {
        assert!(self.n_qubits <= WORD, "dense masks need at most 64 qubits");
        (self.x[0], self.z[0])
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        check_size(self.n_qubits, other.n_qubits)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let parity: u32 = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((x1, z1), (x2, z2))| ((x1 & z2) ^ (z1 & x2)).count_ones())
            .sum();
        parity % 2 == 0
    }

    /// Returns `(R, phase)` with `self · other = phase · R`.
    pub fn multiply(&self, other: &PauliString) -> Result<(PauliString, Phase)> {
        check_size(self.n_qubits, other.n_qubits)?;
        let mut exponent = 0i64;
        for q in 0..self.n_qubits {
            let (x1, z1) = self.get(q).bits();
            let (x2, z2) = other.get(q).bits();
            let (x2, z2) = (i64::from(x2), i64::from(z2));
            exponent += match (x1, z1) {
                (false, false) => 0,
                (true, true) => z2 - x2,
                (true, false) => z2 * (2 * x2 - 1),
                (false, true) => x2 * (1 - 2 * z2),
            };
        }
        let product = PauliString {
            n_qubits: self.n_qubits,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        };
        Ok((product, Phase::from_exponent(exponent)))
    }

    /// Restriction to the listed qubits, in the listed order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut p = PauliString::identity(qubits.len());
        for (k, &q) in qubits.iter().enumerate() {
            p.set(k, self.get(q));
        }
        p
    }

    /// Action on a computational basis index: `P|b> = phase(b) |b ^ x>`.
    pub(crate) fn basis_phase(x: u64, z: u64, b: usize) -> Complex64 {
        let y_count = (x & z).count_ones();
        let sign_flips = (b as u64 & z).count_ones();
        let exponent = (y_count + 2 * sign_flips) % 4;
        Phase::from_exponent(i64::from(exponent)).to_complex()
    }

    /// Dense `2^n × 2^n` matrix, row-major. Intended for small oracles.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let (x, z) = self.masks();
        let dim = 1usize << self.n_qubits;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for b in 0..dim {
            let row = b ^ x as usize;
            m[row * dim + b] = Self::basis_phase(x, z, b);
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PauliString::parse(s, s.chars().count())
    }
}

/// A Hermitian observable `Σ c_t P_t` with real coefficients.
///
/// Construction normalizes: duplicate strings are merged by summing their
/// coefficients (first occurrence keeps its position) and exact zeros are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (_, p) in &terms {
            check_size(n_qubits, p.n_qubits())?;
        }
        Ok(Self {
            n_qubits,
            terms: normalize(terms),
        })
    }

    pub fn from_pauli(p: PauliString) -> Self {
        Self {
            n_qubits: p.n_qubits(),
            terms: vec![(1.0, p)],
        }
    }

    pub fn from_labels(n_qubits: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|&(c, l)| Ok((c, PauliString::parse(l, n_qubits)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, parsed)
    }

    /// Parses `c*LABEL` terms separated by commas, e.g. `ZZ,-0.5*XI`. A bare label
    /// has coefficient 1.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let mut terms = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            let (coeff, label) = match part.split_once('*') {
                Some((c, l)) => {
                    let c: f64 = c.trim().parse().map_err(|_| Error::InvalidLabel {
                        label: part.to_string(),
                        reason: format!("bad coefficient {:?}", c.trim()),
                    })?;
                    (c, l.trim())
                }
                None => (1.0, part),
            };
            if !coeff.is_finite() {
                return Err(Error::InvalidLabel {
                    label: part.to_string(),
                    reason: "coefficient is not finite".into(),
                });
            }
            terms.push((coeff, PauliString::parse(label, n_qubits)?));
        }
        Self::new(n_qubits, terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn normalized(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: normalize(self.terms.clone()),
        }
    }

    /// Dense Hermitian matrix, row-major.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (c, p) in &self.terms {
            let (x, z) = p.masks();
            for b in 0..dim {
                m[(b ^ x as usize) * dim + b] += PauliString::basis_phase(x, z, b) * *c;
            }
        }
        m
    }
}

fn normalize(terms: Vec<(f64, PauliString)>) -> Vec<(f64, PauliString)> {
    let mut index: HashMap<PauliString, usize> = HashMap::new();
    let mut merged: Vec<(f64, PauliString)> = Vec::with_capacity(terms.len());
    for (c, p) in terms {
        match index.get(&p) {
            Some(&i) => merged[i].0 += c,
            None => {
                index.insert(p.clone(), merged.len());
                merged.push((c, p));
            }
        }
    }
    merged.retain(|(c, _)| *c != 0.0);
    merged
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    coeff: f64,
    label: String,
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|(c, p)| TermRecord {
                coeff: *c,
                label: p.to_string(),
            })
            .collect();
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let records = Vec::<TermRecord>::deserialize(d)?;
        let n = records
            .first()
            .map(|r| r.label.chars().count())
            .ok_or_else(|| D::Error::custom("observable needs at least one term"))?;
        let terms = records
            .into_iter()
            .map(|r| PauliString::parse(&r.label, n).map(|p| (r.coeff, p)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Observable::new(n, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(label: &str) -> PauliString {
        label.parse().unwrap()
    }

    fn all_labels(n: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|s| "IXYZ".chars().map(move |c| format!("{s}{c}")))
                .collect();
        }
        out
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XYZ").commutes(&p("III")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(matches!(
            p("X").commutes(&p("XX")),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), (p("Y"), Phase::MinusI));
        assert_eq!(p("XYZ").multiply(&p("XYZ")).unwrap(), (p("III"), Phase::One));
        assert_eq!(p("XI").multiply(&p("IZ")).unwrap(), (p("XZ"), Phase::One));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), (p("Y"), Phase::I));
        assert_eq!(p("Y").multiply(&p("X")).unwrap(), (p("Z"), Phase::MinusI));
    }

    #[test]
    fn multiply_matches_dense_product() {
        for a in all_labels(2) {
            for b in all_labels(2) {
                let (pa, pb) = (p(&a), p(&b));
                let (r, ph) = pa.multiply(&pb).unwrap();
                let (ma, mb, mr) = (pa.to_dense(), pb.to_dense(), r.to_dense());
                for i in 0..4 {
                    for j in 0..4 {
                        let prod: Complex64 = (0..4).map(|k| ma[i * 4 + k] * mb[k * 4 + j]).sum();
                        assert!((prod - ph.to_complex() * mr[i * 4 + j]).norm() < 1e-12, "{a}*{b}");
                    }
                }
            }
        }
    }

    #[test]
    fn multiply_is_associative_up_to_phase() {
        let labels = all_labels(2);
        for a in &labels {
            for b in &labels {
                for c in &labels {
                    let (ab, p1) = p(a).multiply(&p(b)).unwrap();
                    let (abc, p2) = ab.multiply(&p(c)).unwrap();
                    let (bc, q1) = p(b).multiply(&p(c)).unwrap();
                    let (abc2, q2) = p(a).multiply(&bc).unwrap();
                    assert_eq!(abc, abc2);
                    assert_eq!(p1 * p2, q1 * q2);
                }
            }
        }
    }

    #[test]
    fn commutation_is_symmetric_and_reflexive() {
        for a in all_labels(2) {
            assert!(p(&a).commutes(&p(&a)).unwrap());
            for b in all_labels(2) {
                assert_eq!(p(&a).commutes(&p(&b)).unwrap(), p(&b).commutes(&p(&a)).unwrap());
            }
        }
    }

    #[test]
    fn labels_round_trip_and_weight() {
        assert_eq!(p("IXYZ").weight(), 3);
        assert!(p("IIII").is_identity());
        assert_eq!(p("IXYZ").get(0), Pauli::I);
        assert_eq!(p("IXYZ").get(3), Pauli::Z);
        for l in all_labels(2) {
            assert_eq!(p(&l).to_string(), l);
        }
        assert!(matches!(
            PauliString::parse("XQ", 2),
            Err(Error::InvalidLabel { .. })
        ));
        assert!(matches!(
            PauliString::parse("XX", 3),
            Err(Error::InvalidLabel { .. })
        ));
    }

    #[test]
    fn qubit_zero_is_low_bit() {
        let x0 = p("XI");
        assert_eq!(x0.masks(), (1, 0));
        let z1 = p("IZ");
        assert_eq!(z1.masks(), (0, 2));
    }

    #[test]
    fn wide_strings_span_words() {
        let mut a = PauliString::identity(130);
        a.set(129, Pauli::X);
        a.set(3, Pauli::Z);
        let mut b = PauliString::identity(130);
        b.set(129, Pauli::Z);
        assert_eq!(a.weight(), 2);
        assert!(!a.commutes(&b).unwrap());
        assert_eq!(a.support(), vec![3, 129]);
    }

    #[test]
    fn observable_text() {
        let o = Observable::parse("ZZ, -0.5*XI,0.25 * ZZ", 2).unwrap();
        assert_eq!(o, Observable::from_labels(2, &[(1.25, "ZZ"), (-0.5, "XI")]).unwrap());
        assert!(Observable::parse("ZZ,x*XI", 2).is_err());
        assert!(Observable::parse("ZZZ", 2).is_err());
        assert!(Observable::parse("inf*ZZ", 2).is_err());
    }

    #[test]
    fn observable_normalization() {
        let o = Observable::from_labels(2, &[(1.0, "XX"), (0.5, "ZZ"), (2.0, "XX"), (0.0, "YY")])
            .unwrap();
        assert_eq!(o.len(), 2);
        assert_eq!(o.terms()[0], (3.0, p("XX")));
        assert_eq!(o.normalized(), o);
        let json = serde_json::to_string(&o).unwrap();
        assert_eq!(json, r#"[{"coeff":3.0,"label":"XX"},{"coeff":0.5,"label":"ZZ"}]"#);
        let back: Observable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, o);
    }
}
