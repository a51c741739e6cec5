//! Dense GF(2) linear algebra on packed bit vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn from_ones(len: usize, ones: &[usize]) -> Self {
        let mut v = BitVec::zeros(len);
        for &i in ones {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len);
        if b {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Rows `coeffs . x = rhs` over `vars` unknowns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SystemJson", try_from = "SystemJson")]
pub struct Gf2System {
    vars: usize,
    rows: Vec<(BitVec, bool)>,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    vars: usize,
    rows: Vec<RowJson>,
}

#[derive(Serialize, Deserialize)]
struct RowJson {
    ones: Vec<usize>,
    rhs: u8,
}

impl From<Gf2System> for SystemJson {
    fn from(s: Gf2System) -> Self {
        SystemJson {
            vars: s.vars,
            rows: s
                .rows
                .iter()
                .map(|(c, r)| RowJson {
                    ones: c.ones().collect(),
                    rhs: u8::from(*r),
                })
                .collect(),
        }
    }
}

impl TryFrom<SystemJson> for Gf2System {
    type Error = String;

    fn try_from(j: SystemJson) -> std::result::Result<Self, String> {
        let mut s = Gf2System::new(j.vars);
        for r in j.rows {
            if r.ones.iter().any(|&i| i >= j.vars) || r.rhs > 1 {
                return Err("row out of range".into());
            }
            s.push_ones(&r.ones, r.rhs == 1);
        }
        Ok(s)
    }
}

impl Gf2System {
    pub fn new(vars: usize) -> Self {
        Gf2System {
            vars,
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn rows(&self) -> &[(BitVec, bool)] {
        &self.rows
    }

    pub fn push(&mut self, coeffs: BitVec, rhs: bool) {
        assert_eq!(
            coeffs.len(),
            self.vars,
            "row width must match the variable count"
        );
        self.rows.push((coeffs, rhs));
    }

    /// Variables listed more than once cancel.
    pub fn push_ones(&mut self, ones: &[usize], rhs: bool) {
        let c = BitVec::from_ones(self.vars, ones);
        self.push(c, rhs);
    }

    pub fn satisfied_by(&self, x: &[bool]) -> bool {
        let x = BitVec::from_bools(x);
        x.len() == self.vars && self.rows.iter().all(|(c, r)| c.dot(&x) == *r)
    }

    /// The listed rows sum to `0 = 1`.
    pub fn certifies_inconsistency(&self, rows: &[usize]) -> bool {
        let mut acc = BitVec::zeros(self.vars);
        let mut rhs = false;
        for &i in rows {
            let Some((c, r)) = self.rows.get(i) else {
                return false;
            };
            acc.xor_assign(c);
            rhs ^= r;
        }
        acc.is_zero() && rhs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gf2Result {
    Solution(Vec<bool>),
    /// Indices of rows whose sum is `0 = 1`.
    Inconsistent {
        certificate: Vec<usize>,
    },
}

/// Gauss-Jordan elimination; free variables are set to zero. Each working
/// row remembers which input rows it is the sum of, so a derived `0 = 1`
/// comes with a certificate.
pub fn gf2_solve(sys: &Gf2System) -> Gf2Result {
    let m = sys.rows.len();
    let mut rows: Vec<(BitVec, bool, BitVec)> = sys
        .rows
        .iter()
        .enumerate()
        .map(|(i, (c, r))| (c.clone(), *r, BitVec::from_ones(m, &[i])))
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..sys.vars {
        let Some(p) = (rank..m).find(|&r| rows[r].0.get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let (head, tail) = rows.split_at_mut(rank);
        let (pivot, tail) = tail.split_first_mut().expect("pivot row");
        for row in head.iter_mut().chain(tail.iter_mut()) {
            if row.0.get(col) {
                row.0.xor_assign(&pivot.0);
                row.1 ^= pivot.1;
                row.2.xor_assign(&pivot.2);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if let Some(bad) = rows[rank..].iter().find(|r| r.1) {
        return Gf2Result::Inconsistent {
            certificate: bad.2.ones().collect(),
        };
    }
    let mut x = vec![false; sys.vars];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = rows[r].1;
    }
    Gf2Result::Solution(x)
}

/// The system whose solutions form the affine hull of `vectors` (all the
/// same width), and whether that hull is exactly the input set.
pub fn affine_hull(vectors: &[BitVec]) -> Result<(Gf2System, bool)> {
    let v0 = vectors.first().ok_or(Error::EmptyInput)?;
    let w = v0.len();
    if vectors.iter().any(|v| v.len() != w) {
        return Err(Error::Malformed("vectors of different widths".into()));
    }
    // Reduced row echelon basis of the difference space.
    let mut basis: Vec<BitVec> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for v in vectors {
        let mut d = v.clone();
        d.xor_assign(v0);
        for (b, &p) in basis.iter().zip(&pivots) {
            if d.get(p) {
                d.xor_assign(b);
            }
        }
        let Some(p) = d.first_one() else { continue };
        for b in basis.iter_mut() {
            if b.get(p) {
                b.xor_assign(&d);
            }
        }
        basis.push(d);
        pivots.push(p);
    }
    // One row per free column: e_f plus the pivots whose basis row has f.
    let mut sys = Gf2System::new(w);
    for f in (0..w).filter(|c| !pivots.contains(c)) {
        let mut c = BitVec::zeros(w);
        c.set(f, true);
        for (b, &p) in basis.iter().zip(&pivots) {
            if b.get(f) {
                c.set(p, true);
            }
        }
        let rhs = c.dot(v0);
        sys.push(c, rhs);
    }
    let mut distinct: Vec<&BitVec> = vectors.iter().collect();
    distinct.sort();
    distinct.dedup();
    let dim = basis.len();
    let exact = dim < usize::BITS as usize - 1 && distinct.len() == 1usize << dim;
    Ok((sys, exact))
}
