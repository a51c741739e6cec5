//! Canonical behaviours: total tables on pair types, their pointwise action
//! on type matrices, realizability over a base and preservation of relations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    pair_count, type_space, validate_type, BaseStructure, Card, OrbitRelation, PairType, Signature,
    TypeMatrix, Violation,
};

use PairType::{Equal as Q, E, N};

/// A total map from r-tuples of pair types to a pair type, `1 <= r <= 3`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Behaviour {
    name: String,
    arity: usize,
    table: Vec<PairType>,
}

impl Behaviour {
    /// Table entries are indexed with the first argument most significant.
    pub fn new(name: impl Into<String>, arity: usize, table: Vec<PairType>) -> Result<Self> {
        let name = name.into();
        if !(1..=3).contains(&arity) || table.len() != 3usize.pow(arity as u32) {
            return Err(Error::Malformed(format!(
                "behaviour `{name}` needs arity 1..=3 and a table of 3^arity entries"
            )));
        }
        if *table.last().unwrap() != Q {
            return Err(Error::Malformed(format!(
                "behaviour `{name}` must map (=,...,=) to ="
            )));
        }
        Ok(Behaviour { name, arity, table })
    }

    pub fn from_fn(name: &str, arity: usize, f: impl Fn(&[PairType]) -> PairType) -> Self {
        let table = (0..3usize.pow(arity as u32))
            .map(|idx| f(&decode_args(idx, arity)))
            .collect();
        Behaviour::new(name, arity, table).expect("catalog behaviour is well formed")
    }

    fn unary(name: &str, on_e: PairType, on_n: PairType) -> Self {
        Self::from_fn(name, 1, |a| match a[0] {
            E => on_e,
            N => on_n,
            Q => Q,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[PairType] {
        &self.table
    }

    pub fn eval(&self, args: &[PairType]) -> PairType {
        assert_eq!(args.len(), self.arity);
        self.table[args.iter().fold(0, |acc, a| acc * 3 + a.index())]
    }

    /// Audit form: `"E,N" -> "N"`.
    pub fn to_json_map(&self) -> BTreeMap<String, String> {
        (0..self.table.len())
            .map(|idx| {
                let args: Vec<String> = decode_args(idx, self.arity)
                    .iter()
                    .map(|a| a.symbol().to_string())
                    .collect();
                (args.join(","), self.table[idx].symbol().to_string())
            })
            .collect()
    }

    /// Binary min, N-dominated: an edge only from two edges.
    pub fn min() -> Self {
        Self::from_fn("B_min", 2, |a| match (a[0], a[1]) {
            (E, E) => E,
            (Q, Q) => Q,
            _ => N,
        })
    }

    /// First projection on distinct pairs, balanced in both arguments.
    pub fn p1() -> Self {
        Self::from_fn("B_p1", 2, |a| if a[0] != Q { a[0] } else { a[1] })
    }

    pub fn p2() -> Self {
        Self::from_fn("B_p2", 2, |a| if a[1] != Q { a[1] } else { a[0] })
    }

    /// Image is an independent set.
    pub fn edgedel() -> Self {
        Self::unary("B_edgedel", N, N)
    }

    /// Image is a clique.
    pub fn cliquecol() -> Self {
        Self::unary("B_cliquecol", E, E)
    }

    /// Collapses each equivalence class to a point.
    pub fn quotient() -> Self {
        Self::unary("B_quotient", Q, N)
    }

    /// Constant map.
    pub fn constant() -> Self {
        Self::unary("B_const", Q, Q)
    }

    /// Binary injection over pure equality.
    pub fn eqmeet() -> Self {
        Self::from_fn("B_eqmeet", 2, |a| if a == [Q, Q] { Q } else { N })
    }

    /// Minority on distinct triples, balanced xnor once equalities appear.
    pub fn xnor3() -> Self {
        Self::from_fn("B_xnor3", 3, |a| {
            let others: Vec<PairType> = a.iter().copied().filter(|&v| v != Q).collect();
            match others.len() {
                0 => Q,
                1 => others[0],
                2 => {
                    if others[0] == others[1] {
                        E
                    } else {
                        N
                    }
                }
                _ => odd_edges(a),
            }
        })
    }

    /// Minority on `{E, =}`; any non-edge wins.
    pub fn h3() -> Self {
        Self::from_fn("B_H3", 3, |a| {
            if a.contains(&N) {
                N
            } else if a.iter().filter(|&&v| v == E).count() % 2 == 1 {
                E
            } else {
                Q
            }
        })
    }

    /// Majority on distinct triples. Mixed inputs with some `=` go to `N`.
    pub fn majority() -> Self {
        Self::from_fn("B_maj", 3, |a| {
            if a == [Q, Q, Q] {
                Q
            } else if a.contains(&Q) {
                N
            } else if a.iter().filter(|&&v| v == E).count() >= 2 {
                E
            } else {
                N
            }
        })
    }

    /// The two minority rows `(N,N,E)` and `(E,N,N)` mapped to `E`;
    /// everything else to `N` (or `=` on the diagonal).
    pub fn minority_fragment() -> Self {
        Self::from_fn("B_minfrag", 3, |a| match a {
            [N, N, E] | [E, N, N] => E,
            [Q, Q, Q] => Q,
            _ => N,
        })
    }

    /// The unary behaviour with the given images of `E` and `N`.
    pub fn unary_table(on_e: PairType, on_n: PairType) -> Self {
        let name = format!("B_unary[E>{},N>{}]", on_e.symbol(), on_n.symbol());
        Self::unary(&name, on_e, on_n)
    }
}

impl fmt::Debug for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl fmt::Display for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

fn odd_edges(a: &[PairType]) -> PairType {
    if a.iter().filter(|&&v| v == E).count() % 2 == 1 {
        E
    } else {
        N
    }
}

fn decode_args(mut idx: usize, arity: usize) -> Vec<PairType> {
    let mut out = vec![E; arity];
    for slot in out.iter_mut().rev() {
        *slot = PairType::from_index(idx % 3);
        idx /= 3;
    }
    out
}

/// The named behaviours relevant over `base`.
pub fn behaviour_catalog(base: &BaseStructure) -> Vec<Behaviour> {
    if base.is_equality() {
        return vec![
            Behaviour::constant(),
            Behaviour::eqmeet(),
            Behaviour::p1(),
            Behaviour::p2(),
        ];
    }
    vec![
        Behaviour::min(),
        Behaviour::p1(),
        Behaviour::p2(),
        Behaviour::edgedel(),
        Behaviour::cliquecol(),
        Behaviour::quotient(),
        Behaviour::constant(),
        Behaviour::xnor3(),
        Behaviour::h3(),
    ]
}

/// Look a behaviour up by name, including the test-only obstructions.
pub fn behaviour_by_name(name: &str) -> Option<Behaviour> {
    let all = [
        Behaviour::min(),
        Behaviour::p1(),
        Behaviour::p2(),
        Behaviour::edgedel(),
        Behaviour::cliquecol(),
        Behaviour::quotient(),
        Behaviour::constant(),
        Behaviour::eqmeet(),
        Behaviour::xnor3(),
        Behaviour::h3(),
        Behaviour::majority(),
        Behaviour::minority_fragment(),
    ];
    all.into_iter().find(|b| b.name() == name)
}

/// Result of applying a behaviour to type matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Applied {
    Valid(TypeMatrix),
    /// The pointwise image is not a valid type; the behaviour is not
    /// realizable on these inputs.
    Invalid(TypeMatrix, Violation),
}

/// Pointwise image, without validity checking.
pub fn apply_raw(b: &Behaviour, ms: &[&TypeMatrix]) -> Result<TypeMatrix> {
    if ms.len() != b.arity {
        return Err(Error::ArityMismatch {
            name: b.name.clone(),
            expected: b.arity,
            got: ms.len(),
        });
    }
    let k = ms[0].arity();
    if let Some(bad) = ms.iter().find(|m| m.arity() != k) {
        return Err(Error::ArityMismatch {
            name: "type matrix".into(),
            expected: k,
            got: bad.arity(),
        });
    }
    let entries = (0..pair_count(k))
        .map(|p| {
            let args: Vec<PairType> = ms.iter().map(|m| m.entries()[p]).collect();
            b.eval(&args)
        })
        .collect();
    TypeMatrix::new(k, entries)
}

pub fn apply_behaviour(b: &Behaviour, ms: &[&TypeMatrix], base: &BaseStructure) -> Result<Applied> {
    let out = apply_raw(b, ms)?;
    Ok(match validate_type(&out, base) {
        Ok(()) => Applied::Valid(out),
        Err(v) => Applied::Invalid(out, v),
    })
}

/// Type entries as table digits.
fn encode(t: &TypeMatrix) -> Vec<u8> {
    t.entries().iter().map(|v| v.index() as u8).collect()
}

fn pack(entries: &[u8]) -> u128 {
    entries
        .iter()
        .enumerate()
        .fold(0u128, |acc, (p, &v)| acc | (u128::from(v) << (2 * p)))
}

fn unpack(key: u128, arity: usize) -> TypeMatrix {
    let entries = (0..pair_count(arity))
        .map(|p| PairType::from_index(((key >> (2 * p)) & 3) as usize))
        .collect();
    TypeMatrix::new(arity, entries).expect("packed arity")
}

/// Feed every pointwise image `b(t_1, ..., t_r)`, `t_i` drawn from `inputs`,
/// to `sink` together with the input indices; stop when `sink` returns true.
///
/// Ternary tables are evaluated through the intermediate function
/// `c -> b(a, b, c)` per pair, deduplicated over all `(t_1, t_2)`; this keeps
/// the sweep exhaustive while avoiding most of the cubic blow-up.
fn sweep(b: &Behaviour, inputs: &[Vec<u8>], sink: &mut dyn FnMut(u128, &[usize]) -> bool) -> bool {
    let Some(first) = inputs.first() else {
        return false;
    };
    let p = first.len();
    assert!(p <= 64, "relations of arity above 11 are not supported");
    let table: Vec<u8> = b.table.iter().map(|v| v.index() as u8).collect();
    let mut out = vec![0u8; p];
    match b.arity {
        1 => {
            for (i, t) in inputs.iter().enumerate() {
                for q in 0..p {
                    out[q] = table[t[q] as usize];
                }
                if sink(pack(&out), &[i]) {
                    return true;
                }
            }
        }
        2 => {
            for (i, t) in inputs.iter().enumerate() {
                for (j, u) in inputs.iter().enumerate() {
                    for q in 0..p {
                        out[q] = table[(t[q] * 3 + u[q]) as usize];
                    }
                    if sink(pack(&out), &[i, j]) {
                        return true;
                    }
                }
            }
        }
        3 => {
            // Rows c -> table(a, b, c) for the nine (a, b), grouped by equality.
            let mut rows: Vec<[u8; 3]> = Vec::new();
            let mut class_of = [0u8; 9];
            for ab in 0..9 {
                let row = [table[ab * 3], table[ab * 3 + 1], table[ab * 3 + 2]];
                let cls = rows.iter().position(|r| *r == row).unwrap_or_else(|| {
                    rows.push(row);
                    rows.len() - 1
                });
                class_of[ab] = cls as u8;
            }
            let mut states: HashMap<Vec<u8>, (usize, usize)> = HashMap::new();
            for (i, t) in inputs.iter().enumerate() {
                for (j, u) in inputs.iter().enumerate() {
                    let st: Vec<u8> = (0..p)
                        .map(|q| class_of[(t[q] * 3 + u[q]) as usize])
                        .collect();
                    states.entry(st).or_insert((i, j));
                }
            }
            let mut states: Vec<(Vec<u8>, (usize, usize))> = states.into_iter().collect();
            states.sort_unstable();
            for (st, (i, j)) in &states {
                for (l, w) in inputs.iter().enumerate() {
                    for q in 0..p {
                        out[q] = rows[st[q] as usize][w[q] as usize];
                    }
                    if sink(pack(&out), &[*i, *j, l]) {
                        return true;
                    }
                }
            }
        }
        _ => unreachable!("behaviour arity is checked on construction"),
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preservation {
    Preserved,
    Violated {
        inputs: Vec<TypeMatrix>,
        output: TypeMatrix,
    },
}

impl Preservation {
    pub fn is_preserved(&self) -> bool {
        matches!(self, Preservation::Preserved)
    }
}

/// Exhaustive preservation test over all r-tuples of `r`'s types.
pub fn check_preservation(b: &Behaviour, r: &OrbitRelation) -> Preservation {
    let types: Vec<&TypeMatrix> = r.types.iter().collect();
    let inputs: Vec<Vec<u8>> = types.iter().map(|t| encode(t)).collect();
    let members: std::collections::HashSet<u128> = inputs.iter().map(|t| pack(t)).collect();
    let mut bad = None;
    sweep(b, &inputs, &mut |key, idx| {
        if members.contains(&key) {
            false
        } else {
            bad = Some((key, idx.to_vec()));
            true
        }
    });
    match bad {
        None => Preservation::Preserved,
        Some((key, idx)) => Preservation::Violated {
            inputs: idx.iter().map(|&i| types[i].clone()).collect(),
            output: unpack(key, r.arity),
        },
    }
}

pub fn preserves(b: &Behaviour, r: &OrbitRelation) -> bool {
    check_preservation(b, r).is_preserved()
}

/// First relation of `sig` not preserved by `b`, with the violating tuple.
pub fn first_unpreserved<'s>(
    b: &Behaviour,
    sig: &'s Signature,
) -> Option<(&'s OrbitRelation, Preservation)> {
    sig.relations().iter().find_map(|r| {
        let p = check_preservation(b, r);
        (!p.is_preserved()).then_some((r, p))
    })
}

/// Size of the largest validity witness over `base`: cliques of size `n`
/// for Henson graphs, `s+1` members of one class or `n+1` classes for
/// equivalence graphs, and triangles for congruence and transitivity.
pub fn obstruction_arity(base: &BaseStructure) -> usize {
    let k = match *base {
        BaseStructure::Henson { n } => n as usize,
        BaseStructure::Equiv { n, s } => match (n, s) {
            (Card::Finite(n), _) => n as usize + 1,
            (_, Card::Finite(s)) => s as usize + 1,
            _ => 3,
        },
        BaseStructure::Equality => 3,
    };
    k.max(3)
}

pub fn realizable(b: &Behaviour, base: &BaseStructure) -> bool {
    realizability_counterexample(b, base, obstruction_arity(base)).is_none()
}

/// Apply `b` to every r-tuple of valid types of the given arity and report
/// an invalid image, if any. Every valid type of smaller arity is the
/// restriction of one of this arity (pad with copies), so smaller arities
/// need no separate sweep.
pub fn realizability_counterexample(
    b: &Behaviour,
    base: &BaseStructure,
    arity: usize,
) -> Option<(Vec<TypeMatrix>, TypeMatrix, Violation)> {
    let space = type_space(arity, base);
    let inputs: Vec<Vec<u8>> = space.iter().map(encode).collect();
    let mut images: HashMap<u128, Vec<usize>> = HashMap::new();
    sweep(b, &inputs, &mut |key, idx| {
        images.entry(key).or_insert_with(|| idx.to_vec());
        false
    });
    let mut images: Vec<(u128, Vec<usize>)> = images.into_iter().collect();
    images.sort_unstable();
    for (key, idx) in images {
        let out = unpack(key, arity);
        if let Err(v) = validate_type(&out, base) {
            let ins = idx.iter().map(|&i| space[i].clone()).collect();
            return Some((ins, out, v));
        }
    }
    None
}

/// Smallest superset of `types` closed under `b`. Invalid images are
/// dropped, so the result is closed only when `b` is realizable.
pub fn closure(
    b: &Behaviour,
    types: impl IntoIterator<Item = TypeMatrix>,
    base: &BaseStructure,
) -> BTreeSet<TypeMatrix> {
    let mut set: BTreeSet<TypeMatrix> = types.into_iter().collect();
    let Some(arity) = set.first().map(TypeMatrix::arity) else {
        return set;
    };
    loop {
        let inputs: Vec<Vec<u8>> = set.iter().map(encode).collect();
        let members: std::collections::HashSet<u128> = inputs.iter().map(|t| pack(t)).collect();
        let mut fresh: BTreeSet<u128> = BTreeSet::new();
        sweep(b, &inputs, &mut |key, _| {
            if !members.contains(&key) {
                fresh.insert(key);
            }
            false
        });
        let mut grew = false;
        for key in fresh {
            let t = unpack(key, arity);
            if validate_type(&t, base).is_ok() {
                set.insert(t);
                grew = true;
            }
        }
        if !grew {
            return set;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compile_formula;

    #[test]
    fn catalog_examples() {
        assert_eq!(Behaviour::xnor3().eval(&[Q, E, E]), E);
        assert_eq!(Behaviour::min().eval(&[E, N]), N);
        assert_eq!(Behaviour::h3().eval(&[E, E, Q]), Q);
        assert_eq!(Behaviour::h3().eval(&[E, Q, Q]), E);
        assert_eq!(Behaviour::p1().eval(&[Q, N]), N);
        assert_eq!(Behaviour::p1().eval(&[E, Q]), E);
        for b in behaviour_catalog(&BaseStructure::omega_two()) {
            assert_eq!(b.eval(&vec![Q; b.arity()]), Q, "{b}");
        }
    }

    #[test]
    fn xnor_table_rows() {
        let x = Behaviour::xnor3();
        let rows = [
            ([E, E, E], E),
            ([N, N, N], N),
            ([E, E, N], N),
            ([E, N, N], E),
            ([Q, E, E], E),
            ([Q, N, N], E),
            ([Q, E, N], N),
            ([Q, Q, E], E),
            ([Q, Q, N], N),
        ];
        for (args, out) in rows {
            assert_eq!(x.eval(&args), out, "{args:?}");
        }
    }

    #[test]
    fn json_map_uses_comma_keys() {
        let m = Behaviour::min().to_json_map();
        assert_eq!(m["E,N"], "N");
        assert_eq!(m["E,E"], "E");
        assert_eq!(m.len(), 9);
    }

    #[test]
    fn apply_checks_arity_and_validity() {
        let h3 = BaseStructure::henson(3).unwrap();
        let e = TypeMatrix::from_code(2, "E").unwrap();
        let n = TypeMatrix::from_code(2, "N").unwrap();
        assert_eq!(
            apply_behaviour(&Behaviour::min(), &[&e, &n], &h3).unwrap(),
            Applied::Valid(n.clone())
        );
        assert!(matches!(
            apply_behaviour(&Behaviour::min(), &[&e], &h3),
            Err(Error::ArityMismatch { .. })
        ));
        let path = TypeMatrix::from_code(3, "EEN").unwrap();
        assert_eq!(
            apply_raw(&Behaviour::edgedel(), &[&path]).unwrap().code(),
            "NNN"
        );
        let nnn = TypeMatrix::from_code(3, "NNN").unwrap();
        let out = apply_behaviour(&Behaviour::cliquecol(), &[&nnn], &h3).unwrap();
        assert!(matches!(out, Applied::Invalid(_, Violation::Clique { .. })));
    }

    #[test]
    fn preservation_examples() {
        let h3 = BaseStructure::henson(3).unwrap();
        let e = compile_formula("E(1,2)", 2, &h3).unwrap();
        assert!(preserves(&Behaviour::min(), &e));
        let eq = compile_formula("Eq(1,2)", 2, &h3).unwrap();
        match check_preservation(&Behaviour::min(), &eq) {
            Preservation::Violated { output, .. } => assert_eq!(output.code(), "N"),
            p => panic!("{p:?}"),
        }
    }

    #[test]
    fn closure_is_preserved() {
        let w2 = BaseStructure::omega_two();
        let gens = [
            TypeMatrix::from_code(3, "E==").unwrap(),
            TypeMatrix::from_code(3, "NNN").unwrap(),
        ];
        for b in [Behaviour::min(), Behaviour::h3()] {
            let c = closure(&b, gens.clone(), &w2);
            let r = OrbitRelation::new("C", 3, c).unwrap();
            assert!(preserves(&b, &r), "{b}");
        }
    }
}
