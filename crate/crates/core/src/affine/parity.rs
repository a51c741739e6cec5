//! Classes of size two: relations preserved by the `{E,=}`-minority are
//! conjunctions of clauses
//!
//! 1. `N(b_1) | ... | N(b_m) | Eq(i,j)`
//! 2. `N(b_1) | ... | N(b_m) | sum_{(i,j) in S} [x_i != x_j] = p (mod 2)`, `S` among the `b`,
//!
//! and instances reduce to a component fixpoint plus one GF(2) system.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affine::gf2::{affine_hull, gf2_solve, BitVec, Gf2Result, Gf2System};
use crate::error::{Error, Result};
use crate::model::{
    pair_count, pair_index, pairs, type_space, BaseStructure, Instance, OrbitRelation, Outcome,
    PairType, Signature, TypeMatrix, DEFAULT_ARITY_CAP,
};

type Pair = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParityHead {
    /// Form 1.
    Eq(usize, usize),
    /// Form 2: an odd (`odd`) or even number of the pairs in `pairs` are
    /// distinct. With no pairs and `odd` set, the head is false.
    Parity { pairs: Vec<Pair>, odd: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParityClause {
    /// Pairs whose `N` is a disjunct.
    pub body: Vec<Pair>,
    pub head: ParityHead,
}

impl ParityClause {
    pub fn holds(&self, t: &TypeMatrix) -> bool {
        if self.body.iter().any(|&(i, j)| t.get(i, j) == PairType::N) {
            return true;
        }
        match &self.head {
            ParityHead::Eq(i, j) => t.get(*i, *j).is_eq(),
            ParityHead::Parity { pairs, odd } => {
                let distinct = pairs
                    .iter()
                    .filter(|&&(i, j)| t.get(i, j) == PairType::E)
                    .count();
                pairs.iter().all(|&(i, j)| t.get(i, j).is_eq()) && (distinct % 2 == 1) == *odd
            }
        }
    }
}

impl fmt::Display for ParityClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .body
            .iter()
            .map(|(i, j)| format!("N({},{})", i + 1, j + 1))
            .collect();
        parts.push(match &self.head {
            ParityHead::Eq(i, j) => format!("Eq({},{})", i + 1, j + 1),
            ParityHead::Parity { pairs, odd } => {
                let terms: Vec<String> = pairs
                    .iter()
                    .map(|(i, j)| format!("d({},{})", i + 1, j + 1))
                    .collect();
                let lhs = if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join("+")
                };
                format!("{lhs}={}", u8::from(*odd))
            }
        });
        write!(f, "{}", parts.join(" | "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParityCompile {
    Exact(Vec<ParityClause>),
    Inexact { separating: TypeMatrix },
}

fn eq_pattern(t: &TypeMatrix) -> u64 {
    t.entries()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_eq())
        .fold(0, |acc, (q, _)| acc | 1 << q)
}

fn pairs_of(k: usize, mask: u64) -> Vec<Pair> {
    pairs(k)
        .enumerate()
        .filter(|(q, _)| mask >> q & 1 == 1)
        .map(|(_, p)| p)
        .collect()
}

pub fn compile_parity(r: &OrbitRelation, base: &BaseStructure) -> Result<ParityCompile> {
    compile_parity_with_cap(r, base, DEFAULT_ARITY_CAP)
}

/// The `Eq`-patterns of members are closed under intersection and are cut
/// out by form-1 clauses; for each member pattern `a`, the distinctness
/// bits on `a`'s `Eq`-pairs of members whose pattern contains `a` form an
/// affine set whose defining equations become form-2 clauses.
pub fn compile_parity_with_cap(
    r: &OrbitRelation,
    base: &BaseStructure,
    cap: usize,
) -> Result<ParityCompile> {
    if *base != BaseStructure::omega_two() {
        return Err(Error::UnsupportedBase(base.to_string()));
    }
    let k = r.arity;
    if k > cap.min(11) {
        return Err(Error::CapExceeded {
            what: "arity",
            value: k,
            cap: cap.min(11),
        });
    }
    let p = pair_count(k);
    let space = type_space(k, base);
    let member_patterns: BTreeSet<u64> = r.types.iter().map(eq_pattern).collect();
    let valid_patterns: BTreeSet<u64> = space.iter().map(eq_pattern).collect();
    let mut clauses: Vec<(u64, ParityHead)> = Vec::new();

    for &x in valid_patterns.difference(&member_patterns) {
        let ups: Vec<u64> = member_patterns
            .iter()
            .copied()
            .filter(|a| a & x == x)
            .collect();
        let head = if ups.is_empty() {
            ParityHead::Parity {
                pairs: Vec::new(),
                odd: true,
            }
        } else {
            let meet = ups.iter().fold(!0u64, |acc, a| acc & a);
            let extra = meet & !x;
            if extra == 0 {
                let t = space
                    .iter()
                    .find(|t| eq_pattern(t) == x)
                    .expect("valid pattern");
                return Ok(ParityCompile::Inexact {
                    separating: t.clone(),
                });
            }
            let (i, j) = pairs(k).nth(extra.trailing_zeros() as usize).expect("pair");
            ParityHead::Eq(i, j)
        };
        clauses.push((x, head));
    }

    for &a in &member_patterns {
        let eq_pairs: Vec<usize> = (0..p).filter(|q| a >> q & 1 == 1).collect();
        if eq_pairs.is_empty() {
            continue;
        }
        let splits: Vec<BitVec> = r
            .types
            .iter()
            .filter(|t| eq_pattern(t) & a == a)
            .map(|t| {
                let bits: Vec<bool> = eq_pairs
                    .iter()
                    .map(|&q| t.entries()[q] == PairType::E)
                    .collect();
                BitVec::from_bools(&bits)
            })
            .collect();
        let (sys, _) = affine_hull(&splits)?;
        for (coeffs, rhs) in sys.rows() {
            let mask = coeffs.ones().fold(0u64, |acc, b| acc | 1 << eq_pairs[b]);
            clauses.push((
                a,
                ParityHead::Parity {
                    pairs: pairs_of(k, mask),
                    odd: *rhs,
                },
            ));
        }
    }

    // Drop clauses implied by one with the same head and a smaller body.
    clauses.sort_by_key(|(body, head)| (body.count_ones(), *body, head.clone()));
    let mut kept: Vec<(u64, ParityHead)> = Vec::new();
    for (body, head) in clauses {
        let dominated = kept.iter().any(|(b, h)| {
            b & body == *b
                && (*h == head
                    || matches!(h, ParityHead::Parity { pairs, odd: true } if pairs.is_empty()))
        });
        if !dominated {
            kept.push((body, head));
        }
    }
    let clauses: Vec<ParityClause> = kept
        .into_iter()
        .map(|(body, head)| ParityClause {
            body: pairs_of(k, body),
            head,
        })
        .collect();

    for t in space.iter() {
        if clauses.iter().all(|c| c.holds(t)) != r.contains(t) {
            return Ok(ParityCompile::Inexact {
                separating: t.clone(),
            });
        }
    }
    Ok(ParityCompile::Exact(clauses))
}

#[derive(Clone, Debug)]
pub struct CompiledParity {
    pub clauses: HashMap<String, Vec<ParityClause>>,
}

pub fn compile_parity_signature(sig: &Signature) -> Result<CompiledParity> {
    let mut clauses = HashMap::new();
    for r in sig.relations() {
        match compile_parity_with_cap(r, &sig.base, r.arity.max(DEFAULT_ARITY_CAP))? {
            ParityCompile::Exact(cs) => {
                clauses.insert(r.name.clone(), cs);
            }
            ParityCompile::Inexact { .. } => return Err(Error::NotCompiled(r.name.clone())),
        }
    }
    Ok(CompiledParity { clauses })
}

#[derive(Clone, Debug)]
enum GroundHead {
    Eq(usize, usize),
    Parity(Vec<Pair>, bool),
}

#[derive(Clone, Debug)]
struct Ground {
    body: Vec<Pair>,
    head: GroundHead,
}

/// Forced `Eq`-components and the parity equations that fire once bodies
/// are emptied by them.
struct Fixpoint {
    comp: Vec<usize>,
    equations: Vec<(Vec<Pair>, bool)>,
}

fn fixpoint(compiled: &CompiledParity, inst: &Instance) -> Result<Fixpoint> {
    let n = inst.variables.len();
    let mut ground = Vec::new();
    for c in &inst.constraints {
        let cs = compiled
            .clauses
            .get(&c.relation)
            .ok_or_else(|| Error::NotCompiled(c.relation.clone()))?;
        'clauses: for cl in cs {
            // N(x,x) is false; a diagonal pair counts as equal.
            let body: Vec<Pair> = cl
                .body
                .iter()
                .map(|&(i, j)| (c.args[i], c.args[j]))
                .filter(|(u, v)| u != v)
                .collect();
            let head = match &cl.head {
                ParityHead::Eq(i, j) => {
                    if c.args[*i] == c.args[*j] {
                        continue 'clauses;
                    }
                    GroundHead::Eq(c.args[*i], c.args[*j])
                }
                ParityHead::Parity { pairs, odd } => GroundHead::Parity(
                    pairs
                        .iter()
                        .map(|&(i, j)| (c.args[i], c.args[j]))
                        .filter(|(u, v)| u != v)
                        .collect(),
                    *odd,
                ),
            };
            ground.push(Ground { body, head });
        }
    }

    let mut by_var = vec![Vec::new(); n];
    for (gi, g) in ground.iter().enumerate() {
        for &(u, v) in &g.body {
            by_var[u].push(gi);
            by_var[v].push(gi);
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut fired = vec![false; ground.len()];
    let mut queued = vec![true; ground.len()];
    let mut queue: VecDeque<usize> = (0..ground.len()).collect();
    let mut equations = Vec::new();
    while let Some(gi) = queue.pop_front() {
        queued[gi] = false;
        if fired[gi] || !ground[gi].body.iter().all(|&(u, v)| parent[u] == parent[v]) {
            continue;
        }
        fired[gi] = true;
        match &ground[gi].head {
            GroundHead::Parity(ps, odd) => equations.push((ps.clone(), *odd)),
            &GroundHead::Eq(u, v) => {
                let (a, b) = (parent[u], parent[v]);
                if a == b {
                    continue;
                }
                let (big, small) = if members[a].len() >= members[b].len() {
                    (a, b)
                } else {
                    (b, a)
                };
                let moved = std::mem::take(&mut members[small]);
                for &m in &moved {
                    parent[m] = big;
                }
                members[big].extend(moved);
                for &m in &members[big] {
                    for &g in &by_var[m] {
                        if !fired[g] && !queued[g] {
                            queued[g] = true;
                            queue.push_back(g);
                        }
                    }
                }
            }
        }
    }
    Ok(Fixpoint {
        comp: parent,
        equations,
    })
}

pub fn solve_cw2_parity(
    sig: &Signature,
    compiled: &CompiledParity,
    inst: &Instance,
) -> Result<Outcome> {
    Ok(solve_cw2_parity_with_system(sig, compiled, inst)?.0)
}

/// One unknown `a_x` per variable with `[x != y] = a_x + a_y` inside a
/// component. This parametrizes exactly the pair assignments that satisfy
/// every triangle equation `xy + yz = xz`, so no triangle rows are needed.
pub fn solve_cw2_parity_with_system(
    sig: &Signature,
    compiled: &CompiledParity,
    inst: &Instance,
) -> Result<(Outcome, Gf2System)> {
    if sig.base != BaseStructure::omega_two() {
        return Err(Error::UnsupportedBase(sig.base.to_string()));
    }
    inst.check(sig)?;
    let fp = fixpoint(compiled, inst)?;
    let n = inst.variables.len();
    let mut sys = Gf2System::new(n);
    for (ps, odd) in &fp.equations {
        let ones: Vec<usize> = ps.iter().flat_map(|&(u, v)| [u, v]).collect();
        sys.push_ones(&ones, *odd);
    }
    let outcome = match gf2_solve(&sys) {
        Gf2Result::Inconsistent { certificate } => {
            Outcome::unsat_because(format!("parity equations {certificate:?} sum to 0 = 1"))
        }
        Gf2Result::Solution(a) => Outcome::sat(TypeMatrix::from_fn(n, |u, v| {
            if fp.comp[u] != fp.comp[v] {
                PairType::N
            } else if a[u] == a[v] {
                PairType::Equal
            } else {
                PairType::E
            }
        })),
    };
    Ok((outcome, sys))
}

/// The system over one unknown per variable pair, with the fired parity
/// equations and `xy + yz + xz = 0` for every triple.
pub fn psi_system(n: usize, equations: &[(Vec<Pair>, bool)]) -> Gf2System {
    let width = pair_count(n);
    let var = |u: usize, v: usize| pair_index(n, u.min(v), u.max(v));
    let mut sys = Gf2System::new(width);
    for (ps, odd) in equations {
        let ones: Vec<usize> = ps.iter().map(|&(u, v)| var(u, v)).collect();
        sys.push_ones(&ones, *odd);
    }
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                sys.push_ones(&[var(x, y), var(y, z), var(x, z)], false);
            }
        }
    }
    sys
}

/// Same decision through [`psi_system`]: a component's representative `r`
/// is read off the solution as `a_x = xr`.
pub fn solve_cw2_parity_literal(
    sig: &Signature,
    compiled: &CompiledParity,
    inst: &Instance,
) -> Result<Outcome> {
    inst.check(sig)?;
    let fp = fixpoint(compiled, inst)?;
    let n = inst.variables.len();
    let sys = psi_system(n, &fp.equations);
    Ok(match gf2_solve(&sys) {
        Gf2Result::Inconsistent { .. } => Outcome::unsat(),
        Gf2Result::Solution(bits) => {
            let potential = |x: usize| {
                let r = fp.comp[x];
                x != r && bits[pair_index(n, x.min(r), x.max(r))]
            };
            Outcome::sat(TypeMatrix::from_fn(n, |u, v| {
                if fp.comp[u] != fp.comp[v] {
                    PairType::N
                } else if potential(u) == potential(v) {
                    PairType::Equal
                } else {
                    PairType::E
                }
            }))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compile_formula;

    fn compile(text: &str, k: usize) -> Vec<ParityClause> {
        let r = compile_formula(text, k, &BaseStructure::omega_two()).unwrap();
        match compile_parity(&r, &BaseStructure::omega_two()).unwrap() {
            ParityCompile::Exact(cs) => cs,
            other => panic!("{text}: {other:?}"),
        }
    }

    #[test]
    fn neq_has_odd_parity_clause() {
        let cs = compile("neq(1,2)", 2);
        let wanted = ParityClause {
            body: vec![(0, 1)],
            head: ParityHead::Parity {
                pairs: vec![(0, 1)],
                odd: true,
            },
        };
        assert!(cs.contains(&wanted), "{cs:?}");
    }

    #[test]
    fn eq_is_a_unit_clause() {
        let cs = compile("Eq(1,2)", 2);
        assert_eq!(
            cs,
            vec![ParityClause {
                body: vec![],
                head: ParityHead::Eq(0, 1)
            }]
        );
    }

    #[test]
    fn non_preserved_relation_is_inexact() {
        let w2 = BaseStructure::omega_two();
        let text = "(E(1,2)&eq(3,4))|(eq(1,2)&E(3,4))|(eq(1,2)&eq(3,4))";
        let r = compile_formula(text, 4, &w2).unwrap();
        assert!(matches!(
            compile_parity(&r, &w2).unwrap(),
            ParityCompile::Inexact { .. }
        ));
    }
}
