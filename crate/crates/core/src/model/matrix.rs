use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Serialize, Serializer};

use super::base::{BaseStructure, Card, PairType};
use super::clique::find_clique;
use crate::error::{Error, Result};

/// Default bound on the arity of enumerated type spaces.
pub const DEFAULT_ARITY_CAP: usize = 6;

pub fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Row-major index of the pair `{i, j}` with `i < j < k`.
pub fn pair_index(k: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

/// Pairs `(i, j)`, `i < j < k`, in row-major order.
pub fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}

/// The atomic type of a k-tuple: a symmetric matrix over `{E, N, =}` with
/// `=` on the diagonal. Only the strict upper triangle is stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeMatrix {
    arity: usize,
    entries: Vec<PairType>,
}

impl TypeMatrix {
    pub fn new(arity: usize, entries: Vec<PairType>) -> Result<Self> {
        if entries.len() != pair_count(arity) {
            return Err(Error::Malformed(format!(
                "arity {arity} needs {} entries, got {}",
                pair_count(arity),
                entries.len()
            )));
        }
        Ok(TypeMatrix { arity, entries })
    }

    pub fn filled(arity: usize, value: PairType) -> Self {
        TypeMatrix {
            arity,
            entries: vec![value; pair_count(arity)],
        }
    }

    /// The type of a tuple whose entries are all equal.
    pub fn all_equal(arity: usize) -> Self {
        Self::filled(arity, PairType::Equal)
    }

    pub fn from_fn(arity: usize, f: impl Fn(usize, usize) -> PairType) -> Self {
        TypeMatrix {
            arity,
            entries: pairs(arity).map(|(i, j)| f(i, j)).collect(),
        }
    }

    /// Parse the compact row-major form, e.g. `"EN="` for arity 3.
    pub fn from_code(arity: usize, code: &str) -> Result<Self> {
        let entries = code
            .chars()
            .map(|c| {
                PairType::from_symbol(c)
                    .ok_or_else(|| Error::Malformed(format!("bad pair type `{c}` in `{code}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(arity, entries)
    }

    pub fn code(&self) -> String {
        self.entries.iter().map(|v| v.symbol()).collect()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entries(&self) -> &[PairType] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> PairType {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => PairType::Equal,
            std::cmp::Ordering::Less => self.entries[pair_index(self.arity, i, j)],
            std::cmp::Ordering::Greater => self.entries[pair_index(self.arity, j, i)],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: PairType) {
        assert!(i != j, "diagonal entries are fixed");
        let (a, b) = (i.min(j), i.max(j));
        let idx = pair_index(self.arity, a, b);
        self.entries[idx] = v;
    }

    /// Induced type on the listed indices; repeated indices yield `=`.
    pub fn restrict(&self, idx: &[usize]) -> TypeMatrix {
        TypeMatrix::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    /// Entry `(i, j)` of the result is entry `(perm[i], perm[j])` of `self`.
    pub fn permute(&self, perm: &[usize]) -> TypeMatrix {
        debug_assert_eq!(perm.len(), self.arity);
        self.restrict(perm)
    }

    /// The equality pattern: `E` and `N` both become `N` ("distinct").
    pub fn skeleton(&self) -> TypeMatrix {
        self.map(|v| if v == PairType::Equal { v } else { PairType::N })
    }

    pub fn map(&self, f: impl Fn(PairType) -> PairType) -> TypeMatrix {
        TypeMatrix {
            arity: self.arity,
            entries: self.entries.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        !self.entries.contains(&PairType::Equal)
    }
}

impl fmt::Display for TypeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.code())
    }
}

impl fmt::Debug for TypeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeMatrix({}, \"{}\")", self.arity, self.code())
    }
}

impl Serialize for TypeMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.code())
    }
}

/// The first validity rule a matrix breaks. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A value that cannot occur over the base (`E` over equality).
    Foreign {
        i: usize,
        j: usize,
        value: PairType,
    },
    /// `(i,j)` is `=` but `l` sees `i` and `j` differently.
    Congruence {
        i: usize,
        j: usize,
        l: usize,
    },
    Clique {
        members: Vec<usize>,
    },
    ClassSize {
        block: Vec<usize>,
        distinct: usize,
        bound: u32,
    },
    ClassCount {
        blocks: usize,
        bound: u32,
    },
    /// `i` and `j` are linked by a chain of `Eq` pairs but `(i,j)` is `N`.
    Transitivity {
        i: usize,
        j: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Foreign { i, j, value } => {
                write!(f, "foreign value {value} at ({},{})", i + 1, j + 1)
            }
            Violation::Congruence { i, j, l } => write!(
                f,
                "congruence: ({},{}) is = but {} sees them differently",
                i + 1,
                j + 1,
                l + 1
            ),
            Violation::Clique { members } => {
                let m: Vec<String> = members.iter().map(|x| (x + 1).to_string()).collect();
                write!(f, "clique: K_{} on {{{}}}", members.len(), m.join(","))
            }
            Violation::ClassSize {
                block,
                distinct,
                bound,
            } => write!(
                f,
                "class-size: Eq-block of {} indices has {distinct} distinct members (bound {bound})",
                block.len()
            ),
            Violation::ClassCount { blocks, bound } => {
                write!(f, "class-count: {blocks} Eq-blocks (bound {bound})")
            }
            Violation::Transitivity { i, j } => write!(
                f,
                "transitivity: {} and {} are Eq-connected but ({},{}) is N",
                i + 1,
                j + 1,
                i + 1,
                j + 1
            ),
        }
    }
}

/// Check a matrix against the validity rules of `base`.
///
/// Rules are tried in the order foreign value, congruence, clique, class
/// size, class count, transitivity. Class bounds are measured on the
/// connected components of the `Eq` graph, so an over-full chain is reported
/// as a class-size violation even when it is also intransitive.
pub fn validate_type(m: &TypeMatrix, base: &BaseStructure) -> std::result::Result<(), Violation> {
    let k = m.arity();
    if base.is_equality() {
        for (i, j) in pairs(k) {
            if m.get(i, j) == PairType::E {
                return Err(Violation::Foreign {
                    i,
                    j,
                    value: PairType::E,
                });
            }
        }
    }
    for (i, j) in pairs(k) {
        if m.get(i, j) == PairType::Equal {
            for l in 0..k {
                if l != i && l != j && m.get(i, l) != m.get(j, l) {
                    return Err(Violation::Congruence { i, j, l });
                }
            }
        }
    }
    match *base {
        BaseStructure::Henson { n } => {
            let vertices: Vec<usize> = (0..k).collect();
            let adj = |a: usize, b: usize| m.get(a, b) == PairType::E;
            if let Some(members) = find_clique(&vertices, n as usize, &adj) {
                return Err(Violation::Clique { members });
            }
        }
        BaseStructure::Equiv { n, s } => {
            let comps = eq_components(m);
            if let Card::Finite(s) = s {
                for block in &comps {
                    let distinct = block
                        .iter()
                        .enumerate()
                        .filter(|&(idx, &v)| {
                            !block[..idx].iter().any(|&u| m.get(u, v) == PairType::Equal)
                        })
                        .count();
                    if distinct > s as usize {
                        return Err(Violation::ClassSize {
                            block: block.clone(),
                            distinct,
                            bound: s,
                        });
                    }
                }
            }
            if let Card::Finite(n) = n {
                if comps.len() > n as usize {
                    return Err(Violation::ClassCount {
                        blocks: comps.len(),
                        bound: n,
                    });
                }
            }
            for block in &comps {
                for (a, &i) in block.iter().enumerate() {
                    for &j in &block[a + 1..] {
                        if m.get(i, j) == PairType::N {
                            return Err(Violation::Transitivity { i, j });
                        }
                    }
                }
            }
        }
        BaseStructure::Equality => {}
    }
    Ok(())
}

pub fn is_valid(m: &TypeMatrix, base: &BaseStructure) -> bool {
    validate_type(m, base).is_ok()
}

/// Connected components of the `Eq` graph, each sorted, ordered by least member.
fn eq_components(m: &TypeMatrix) -> Vec<Vec<usize>> {
    let k = m.arity();
    let mut comp = vec![usize::MAX; k];
    let mut out = Vec::new();
    for start in 0..k {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        comp[start] = id;
        let mut stack = vec![start];
        let mut members = vec![start];
        while let Some(v) = stack.pop() {
            for (w, c) in comp.iter_mut().enumerate() {
                if *c == usize::MAX && m.get(v, w).is_eq() {
                    *c = id;
                    stack.push(w);
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// All valid types of arity `k` over `base`, in canonical order.
pub fn enumerate_types(k: usize, base: &BaseStructure) -> Result<Vec<TypeMatrix>> {
    enumerate_types_with_cap(k, base, DEFAULT_ARITY_CAP)
}

pub fn enumerate_types_with_cap(
    k: usize,
    base: &BaseStructure,
    cap: usize,
) -> Result<Vec<TypeMatrix>> {
    if k > cap {
        return Err(Error::CapExceeded {
            what: "arity",
            value: k,
            cap,
        });
    }
    Ok(type_space(k, base).as_ref().clone())
}

/// Cached type space, without a cap check.
pub(crate) fn type_space(k: usize, base: &BaseStructure) -> Arc<Vec<TypeMatrix>> {
    type Cache = Mutex<HashMap<(usize, BaseStructure), Arc<Vec<TypeMatrix>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&(k, *base)) {
        return hit.clone();
    }
    let mut out = Vec::new();
    search(base, k, base.values(), &mut |_, _, _| true, &mut |p| {
        out.push(p.to_matrix());
        false
    });
    out.sort_unstable();
    debug_assert!(out.iter().all(|m| is_valid(m, base)));
    let out = Arc::new(out);
    cache.lock().unwrap().insert((k, *base), out.clone());
    out
}

/// A type matrix under construction, filled vertex by vertex: all pairs
/// among `0..j` are assigned before any pair `(i, j)`.
pub(crate) struct PartialType<'b> {
    base: &'b BaseStructure,
    k: usize,
    vals: Vec<Option<PairType>>,
}

impl<'b> PartialType<'b> {
    fn new(base: &'b BaseStructure, k: usize) -> Self {
        PartialType {
            base,
            k,
            vals: vec![None; pair_count(k)],
        }
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> Option<PairType> {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Some(PairType::Equal),
            std::cmp::Ordering::Less => self.vals[pair_index(self.k, i, j)],
            std::cmp::Ordering::Greater => self.vals[pair_index(self.k, j, i)],
        }
    }

    fn put(&mut self, i: usize, j: usize, v: Option<PairType>) {
        let idx = pair_index(self.k, i, j);
        self.vals[idx] = v;
    }

    fn val(&self, i: usize, j: usize) -> PairType {
        self.get(i, j).expect("pair assigned")
    }

    pub(crate) fn to_matrix(&self) -> TypeMatrix {
        TypeMatrix {
            arity: self.k,
            entries: self.vals.iter().map(|v| v.expect("complete")).collect(),
        }
    }

    /// Local validity after `(i, j)` has just been assigned.
    fn locally_valid(&self, i: usize, j: usize) -> bool {
        let v = self.val(i, j);
        let transitive = matches!(self.base, BaseStructure::Equiv { .. });
        for l in 0..i {
            if !triple_ok(self.val(l, i), self.val(l, j), v, transitive) {
                return false;
            }
        }
        match *self.base {
            BaseStructure::Henson { n } if v == PairType::E => {
                let cands: Vec<usize> = (0..i)
                    .filter(|&l| self.val(l, i) == PairType::E && self.val(l, j) == PairType::E)
                    .collect();
                let adj = |a: usize, b: usize| self.val(a, b) == PairType::E;
                find_clique(&cands, n as usize - 2, &adj).is_none()
            }
            BaseStructure::Equiv { n, s } => {
                if let (Card::Finite(s), true) = (s, v.is_eq()) {
                    let mut reps: Vec<usize> = Vec::new();
                    for l in 0..=i {
                        if self.val(l, j) != PairType::E {
                            continue;
                        }
                        if !reps.iter().any(|&r| self.val(r, l) == PairType::Equal) {
                            reps.push(l);
                        }
                    }
                    if reps.len() + 1 > s as usize {
                        return false;
                    }
                }
                if let (Card::Finite(n), true) = (n, i + 1 == j) {
                    let blocks = (0..=j)
                        .filter(|&w| !(0..w).any(|u| self.val(u, w).is_eq()))
                        .count();
                    if blocks > n as usize {
                        return false;
                    }
                }
                true
            }
            _ => true,
        }
    }
}

/// Congruence and (optionally) `Eq`-transitivity on the triangle
/// `a = (l,i)`, `b = (l,j)`, `c = (i,j)`.
fn triple_ok(a: PairType, b: PairType, c: PairType, transitive: bool) -> bool {
    use PairType::Equal;
    if (a == Equal && b != c) || (b == Equal && a != c) || (c == Equal && a != b) {
        return false;
    }
    if transitive {
        let (ea, eb, ec) = (a.is_eq(), b.is_eq(), c.is_eq());
        if (ea && eb && !ec) || (ea && ec && !eb) || (eb && ec && !ea) {
            return false;
        }
    }
    true
}

/// Backtracking over valid types of arity `k`.
///
/// `accept(p, i, j)` may prune after `(i, j)` is assigned; `leaf` sees each
/// complete valid type and returns `true` to stop the search. Returns whether
/// the search was stopped.
pub(crate) fn search(
    base: &BaseStructure,
    k: usize,
    order: &[PairType],
    accept: &mut dyn FnMut(&PartialType, usize, usize) -> bool,
    leaf: &mut dyn FnMut(&PartialType) -> bool,
) -> bool {
    let steps: Vec<(usize, usize)> = (1..k).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let mut p = PartialType::new(base, k);
    descend(&mut p, &steps, 0, order, accept, leaf)
}

fn descend(
    p: &mut PartialType,
    steps: &[(usize, usize)],
    at: usize,
    order: &[PairType],
    accept: &mut dyn FnMut(&PartialType, usize, usize) -> bool,
    leaf: &mut dyn FnMut(&PartialType) -> bool,
) -> bool {
    let Some(&(i, j)) = steps.get(at) else {
        return leaf(p);
    };
    for &v in order {
        if !p.base.values().contains(&v) {
            continue;
        }
        p.put(i, j, Some(v));
        if p.locally_valid(i, j)
            && accept(p, i, j)
            && descend(p, steps, at + 1, order, accept, leaf)
        {
            return true;
        }
    }
    p.put(i, j, None);
    false
}
