//! Horn clauses for min-closed relations, unit propagation with equality
//! reasoning, and the base-specific consistency checks.
//!
//! Over the order `N < E`, `N < =` the min behaviour is the pointwise meet,
//! and meet-closed sets of types are exactly those cut out by clauses
//! `l_1 | ... | l_m | head` whose literals are down-sets (`IS_N`, `IS_NEQ`,
//! `NOT_E`) and whose head is `E`, `=` or false.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::clique::find_clique;
use crate::model::{
    pair_count, pair_index, pairs, type_space, BaseStructure, Card, Instance, OrbitRelation,
    Outcome, PairType, Signature, TypeMatrix, DEFAULT_ARITY_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LitForm {
    #[serde(rename = "IS_N")]
    IsN,
    #[serde(rename = "IS_NEQ")]
    IsNeq,
    #[serde(rename = "NOT_E")]
    NotE,
}

impl LitForm {
    pub fn holds(self, v: PairType) -> bool {
        match self {
            LitForm::IsN => v == PairType::N,
            LitForm::IsNeq => v != PairType::Equal,
            LitForm::NotE => v != PairType::E,
        }
    }

    /// Falsified once the pair is known to carry `v`.
    fn falsified_by(self, v: Option<PairType>) -> bool {
        v.is_some_and(|v| !self.holds(v))
    }
}

/// Positions are 0-based; displayed 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub pair: (usize, usize),
    pub form: LitForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Head {
    E(usize, usize),
    Equal(usize, usize),
    False,
}

impl Head {
    fn holds(self, t: &TypeMatrix) -> bool {
        match self {
            Head::E(i, j) => t.get(i, j) == PairType::E,
            Head::Equal(i, j) => t.get(i, j) == PairType::Equal,
            Head::False => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HornClause {
    pub body: Vec<Literal>,
    pub head: Head,
}

impl HornClause {
    pub fn holds(&self, t: &TypeMatrix) -> bool {
        self.head.holds(t)
            || self
                .body
                .iter()
                .any(|l| l.form.holds(t.get(l.pair.0, l.pair.1)))
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .body
            .iter()
            .map(|l| {
                let name = match l.form {
                    LitForm::IsN => "IS_N",
                    LitForm::IsNeq => "IS_NEQ",
                    LitForm::NotE => "NOT_E",
                };
                format!("{name}({},{})", l.pair.0 + 1, l.pair.1 + 1)
            })
            .collect();
        parts.push(match self.head {
            Head::E(i, j) => format!("E({},{})", i + 1, j + 1),
            Head::Equal(i, j) => format!("EQUAL({},{})", i + 1, j + 1),
            Head::False => "FALSE".into(),
        });
        write!(f, "{}", parts.join(" | "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HornCompile {
    Exact(Vec<HornClause>),
    /// A valid type on which the best clause set and the relation disagree.
    Inexact {
        separating: TypeMatrix,
    },
}

fn supported(base: &BaseStructure) -> bool {
    match *base {
        BaseStructure::Henson { .. } | BaseStructure::Equality => true,
        BaseStructure::Equiv { n, s } => n.is_omega() && s == Card::Finite(2),
    }
}

pub fn compile_horn(r: &OrbitRelation, base: &BaseStructure) -> Result<HornCompile> {
    compile_horn_with_cap(r, base, DEFAULT_ARITY_CAP)
}

/// One clause per valid non-member `x`: its body says "some entry of `x`
/// that is not `N` differs", its head is a coordinate on which the meet of
/// the members above `x` is not `N` (or false if nothing lies above `x`).
/// Subsumed clauses are dropped and exactness is then re-checked over the
/// whole type space.
pub fn compile_horn_with_cap(
    r: &OrbitRelation,
    base: &BaseStructure,
    cap: usize,
) -> Result<HornCompile> {
    if !supported(base) {
        return Err(Error::UnsupportedBase(base.to_string()));
    }
    let k = r.arity;
    if k > cap {
        return Err(Error::CapExceeded {
            what: "arity",
            value: k,
            cap,
        });
    }
    let p = pair_count(k);
    let space = type_space(k, base);
    let members: Vec<&TypeMatrix> = r.types.iter().collect();
    let words = members.len().div_ceil(64).max(1);
    // with_value[q][v]: members carrying v at pair q.
    let mut with_value = vec![[vec![0u64; words], vec![0u64; words], vec![0u64; words]]; p];
    for (m, t) in members.iter().enumerate() {
        for (q, v) in t.entries().iter().enumerate() {
            with_value[q][v.index()][m / 64] |= 1 << (m % 64);
        }
    }

    let mut masked: BTreeSet<(usize, Vec<u8>, Head)> = BTreeSet::new();
    for x in space.iter().filter(|x| !r.contains(x)) {
        let mut ups = vec![!0u64; words];
        for (q, v) in x.entries().iter().enumerate() {
            if *v != PairType::N {
                for (w, bits) in ups.iter_mut().zip(&with_value[q][v.index()]) {
                    *w &= bits;
                }
            }
        }
        let mut meet: Option<Vec<PairType>> = None;
        for m in 0..members.len() {
            if ups[m / 64] >> (m % 64) & 1 == 1 {
                let e = members[m].entries();
                meet = Some(match meet {
                    None => e.to_vec(),
                    Some(acc) => acc.iter().zip(e).map(|(a, b)| a.meet(*b)).collect(),
                });
            }
        }
        let head = match meet {
            None => Head::False,
            Some(meet) => {
                let Some(q) =
                    (0..p).find(|&q| x.entries()[q] == PairType::N && meet[q] != PairType::N)
                else {
                    return Ok(HornCompile::Inexact {
                        separating: x.clone(),
                    });
                };
                let (i, j) = pairs(k).nth(q).expect("pair index");
                if meet[q] == PairType::E {
                    Head::E(i, j)
                } else {
                    Head::Equal(i, j)
                }
            }
        };
        let mut mask = vec![0u8; p];
        for (q, v) in x.entries().iter().enumerate() {
            mask[q] = match v {
                PairType::E => 0b110,     // N or =
                PairType::Equal => 0b011, // E or N
                PairType::N => 0,
            };
        }
        if let Head::E(i, j) | Head::Equal(i, j) = head {
            let bit = if matches!(head, Head::E(..)) {
                0b001
            } else {
                0b100
            };
            mask[pair_index(k, i, j)] |= bit;
        }
        let weight = mask.iter().map(|m| m.count_ones() as usize).sum();
        masked.insert((weight, mask, head));
    }

    let mut kept: Vec<(Vec<u8>, Head)> = Vec::new();
    for (_, mask, head) in masked {
        let subsumed = kept
            .iter()
            .any(|(km, _)| km.iter().zip(&mask).all(|(a, b)| a & !b == 0));
        if !subsumed {
            kept.push((mask, head));
        }
    }
    let clauses: Vec<HornClause> = kept
        .into_iter()
        .map(|(mask, head)| {
            let head_pair = match head {
                Head::E(i, j) | Head::Equal(i, j) => Some((i, j)),
                Head::False => None,
            };
            let body = pairs(k)
                .zip(&mask)
                .filter(|&((i, j), m)| *m != 0 && Some((i, j)) != head_pair)
                .map(|(pair, m)| Literal {
                    pair,
                    form: if *m == 0b110 {
                        LitForm::NotE
                    } else if *m == 0b011 {
                        LitForm::IsNeq
                    } else {
                        LitForm::IsN
                    },
                })
                .collect();
            HornClause { body, head }
        })
        .collect();

    for t in space.iter() {
        if clauses.iter().all(|c| c.holds(t)) != r.contains(t) {
            return Ok(HornCompile::Inexact {
                separating: t.clone(),
            });
        }
    }
    Ok(HornCompile::Exact(clauses))
}

/// Exact clause sets for every relation of a signature.
#[derive(Clone, Debug)]
pub struct CompiledSignature {
    pub base: BaseStructure,
    pub clauses: HashMap<String, Vec<HornClause>>,
}

pub fn compile_signature(sig: &Signature) -> Result<CompiledSignature> {
    let mut clauses = HashMap::new();
    for r in sig.relations() {
        match compile_horn_with_cap(r, &sig.base, r.arity.max(DEFAULT_ARITY_CAP))? {
            HornCompile::Exact(cs) => {
                clauses.insert(r.name.clone(), cs);
            }
            HornCompile::Inexact { .. } => return Err(Error::NotCompiled(r.name.clone())),
        }
    }
    Ok(CompiledSignature {
        base: sig.base,
        clauses,
    })
}

/// Derived `=` facts (union-find) and forced edges between classes.
#[derive(Clone, Debug)]
pub struct FactState {
    parent: Vec<usize>,
    members: Vec<Vec<usize>>,
    adj: Vec<BTreeSet<usize>>,
    conflict: Option<String>,
    touched: Vec<usize>,
}

impl FactState {
    pub fn new(n: usize) -> Self {
        FactState {
            parent: (0..n).collect(),
            members: (0..n).map(|v| vec![v]).collect(),
            adj: vec![BTreeSet::new(); n],
            conflict: None,
            touched: Vec::new(),
        }
    }

    pub fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    pub fn conflict(&self) -> Option<&str> {
        self.conflict.as_deref()
    }

    fn fail(&mut self, why: String) {
        if self.conflict.is_none() {
            self.conflict = Some(why);
        }
    }

    /// `Some(=)`, `Some(E)` or unknown.
    pub fn derived(&self, u: usize, v: usize) -> Option<PairType> {
        let (a, b) = (self.find(u), self.find(v));
        if a == b {
            Some(PairType::Equal)
        } else if self.adj[a].contains(&b) {
            Some(PairType::E)
        } else {
            None
        }
    }

    pub fn merge(&mut self, u: usize, v: usize) {
        let (a, b) = (self.find(u), self.find(v));
        if a == b {
            return;
        }
        if self.adj[a].contains(&b) {
            self.fail(format!("x{u} = x{v} contradicts a forced edge"));
            return;
        }
        let (big, small) = if self.members[a].len() >= self.members[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small] = big;
        let moved = std::mem::take(&mut self.members[small]);
        self.members[big].extend(moved);
        for w in std::mem::take(&mut self.adj[small]) {
            self.adj[w].remove(&small);
            self.adj[w].insert(big);
            self.adj[big].insert(w);
        }
        self.touched.push(big);
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        let (a, b) = (self.find(u), self.find(v));
        if a == b {
            self.fail(format!("forced edge E(x{u},x{v}) on equal variables"));
            return;
        }
        if self.adj[a].insert(b) {
            self.adj[b].insert(a);
            self.touched.push(a);
            self.touched.push(b);
        }
    }

    fn representatives(&self) -> Vec<usize> {
        (0..self.parent.len())
            .filter(|&v| self.parent[v] == v)
            .collect()
    }

    /// Unknown pairs completed with `N`.
    pub fn completion(&self) -> TypeMatrix {
        let n = self.parent.len();
        TypeMatrix::from_fn(n, |u, v| self.derived(u, v).unwrap_or(PairType::N))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FinalCheck {
    Ok,
    Unsat(String),
    /// Facts were added; propagation must run again.
    Progress,
}

/// Consistency of a propagated fact state with the base.
pub fn final_check(facts: &mut FactState, base: &BaseStructure) -> FinalCheck {
    if let Some(c) = facts.conflict() {
        return FinalCheck::Unsat(c.to_string());
    }
    match *base {
        BaseStructure::Henson { n } => {
            let reps = facts.representatives();
            let cands: Vec<usize> = reps
                .into_iter()
                .filter(|&r| facts.adj[r].len() + 1 >= n as usize)
                .collect();
            let adj = |a: usize, b: usize| facts.adj[a].contains(&b);
            match find_clique(&cands, n as usize, &adj) {
                Some(c) => FinalCheck::Unsat(format!("forced edges form a clique on {c:?}")),
                None => FinalCheck::Ok,
            }
        }
        BaseStructure::Equiv { .. } => {
            // Classes have two elements: two forced neighbours coincide.
            let mut progressed = false;
            for r in facts.representatives() {
                if facts.find(r) != r || facts.adj[r].len() < 2 {
                    continue;
                }
                let nbrs: Vec<usize> = facts.adj[r].iter().copied().collect();
                for w in &nbrs[1..] {
                    facts.merge(nbrs[0], *w);
                }
                progressed = true;
                if let Some(c) = facts.conflict() {
                    return FinalCheck::Unsat(c.to_string());
                }
            }
            if progressed {
                FinalCheck::Progress
            } else {
                FinalCheck::Ok
            }
        }
        BaseStructure::Equality => FinalCheck::Ok,
    }
}

#[derive(Clone, Debug)]
enum GroundHead {
    E(usize, usize),
    Equal(usize, usize),
    False,
}

#[derive(Clone, Debug)]
struct GroundClause {
    body: Vec<(usize, usize, LitForm)>,
    head: GroundHead,
}

/// Instantiate clauses on a constraint's arguments. Repeated arguments make
/// a pair `=`: literals false there are dropped, clauses true there vanish.
fn ground(clauses: &[HornClause], args: &[usize], out: &mut Vec<GroundClause>) {
    'clauses: for c in clauses {
        let mut body = Vec::with_capacity(c.body.len());
        for l in &c.body {
            let (u, v) = (args[l.pair.0], args[l.pair.1]);
            if u == v {
                if l.form.holds(PairType::Equal) {
                    continue 'clauses;
                }
            } else {
                body.push((u, v, l.form));
            }
        }
        let head = match c.head {
            Head::E(i, j) if args[i] == args[j] => GroundHead::False,
            Head::E(i, j) => GroundHead::E(args[i], args[j]),
            Head::Equal(i, j) if args[i] == args[j] => continue,
            Head::Equal(i, j) => GroundHead::Equal(args[i], args[j]),
            Head::False => GroundHead::False,
        };
        out.push(GroundClause { body, head });
    }
}

/// Propagate to fixpoint, run the final check, and complete with `N`.
pub fn horn_solve(
    sig: &Signature,
    compiled: &CompiledSignature,
    inst: &Instance,
) -> Result<Outcome> {
    inst.check(sig)?;
    let n = inst.variables.len();
    let mut clauses = Vec::new();
    for c in &inst.constraints {
        let cs = compiled
            .clauses
            .get(&c.relation)
            .ok_or_else(|| Error::NotCompiled(c.relation.clone()))?;
        ground(cs, &c.args, &mut clauses);
    }
    let mut by_var = vec![Vec::new(); n];
    for (ci, c) in clauses.iter().enumerate() {
        let mut vs: Vec<usize> = c.body.iter().flat_map(|&(u, v, _)| [u, v]).collect();
        vs.sort_unstable();
        vs.dedup();
        for v in vs {
            by_var[v].push(ci);
        }
    }

    let mut facts = FactState::new(n);
    let mut fired = vec![false; clauses.len()];
    let mut queued = vec![true; clauses.len()];
    let mut queue: VecDeque<usize> = (0..clauses.len()).collect();
    loop {
        while let Some(ci) = queue.pop_front() {
            queued[ci] = false;
            if fired[ci] {
                continue;
            }
            let c = &clauses[ci];
            if !c
                .body
                .iter()
                .all(|&(u, v, f)| f.falsified_by(facts.derived(u, v)))
            {
                continue;
            }
            fired[ci] = true;
            match c.head {
                GroundHead::False => {
                    let why = format!("clause on {:?} has no satisfiable literal", c.body);
                    return Ok(Outcome::unsat_because(why));
                }
                GroundHead::E(u, v) => facts.add_edge(u, v),
                GroundHead::Equal(u, v) => facts.merge(u, v),
            }
            if let Some(why) = facts.conflict() {
                return Ok(Outcome::unsat_because(why.to_string()));
            }
            requeue(&mut facts, &by_var, &fired, &mut queued, &mut queue);
        }
        match final_check(&mut facts, &sig.base) {
            FinalCheck::Ok => break,
            FinalCheck::Unsat(why) => return Ok(Outcome::unsat_because(why)),
            FinalCheck::Progress => requeue(&mut facts, &by_var, &fired, &mut queued, &mut queue),
        }
    }
    Ok(Outcome::sat(facts.completion()))
}

fn requeue(
    facts: &mut FactState,
    by_var: &[Vec<usize>],
    fired: &[bool],
    queued: &mut [bool],
    queue: &mut VecDeque<usize>,
) {
    let touched = std::mem::take(&mut facts.touched);
    for r in touched {
        let r = facts.find(r);
        for &m in &facts.members[r] {
            for &ci in &by_var[m] {
                if !fired[ci] && !queued[ci] {
                    queued[ci] = true;
                    queue.push_back(ci);
                }
            }
        }
    }
}

/// Satisfiability over the hat expansion `{E, Ehat, NEQ}`, where `Ehat` is
/// the complement of `E` and `NEQ` is disequality, decided by the direct
/// conditions: no `E(x,x)`, no `x != x`, no pair in both `E` and `Ehat`, and
/// no forced edge structure the base forbids.
pub fn solve_hat(sig: &Signature, inst: &Instance) -> Result<Outcome> {
    let base = sig.base;
    let eq_two = BaseStructure::omega_two();
    if !matches!(base, BaseStructure::Henson { .. }) && base != eq_two {
        return Err(Error::UnsupportedBase(base.to_string()));
    }
    let expected = [
        ("E", vec!["E"]),
        ("Ehat", vec!["N", "="]),
        ("NEQ", vec!["E", "N"]),
    ];
    for r in sig.relations() {
        let Some((_, codes)) = expected.iter().find(|(name, _)| *name == r.name) else {
            return Err(Error::WrongSignature(format!(
                "unexpected relation `{}`",
                r.name
            )));
        };
        let mut got = r.codes();
        got.sort();
        let mut want: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
        want.sort();
        if r.arity != 2 || got != want {
            return Err(Error::WrongSignature(format!(
                "`{}` must have types {:?}",
                r.name, codes
            )));
        }
    }
    inst.check(sig)?;

    let n = inst.variables.len();
    let mut facts = FactState::new(n);
    let mut hat = Vec::new();
    let mut neq = Vec::new();
    for c in &inst.constraints {
        let (x, y) = (c.args[0], c.args[1]);
        match c.relation.as_str() {
            "E" => {
                if x == y {
                    return Ok(Outcome::unsat_because(format!(
                        "E({0},{0})",
                        inst.variables[x]
                    )));
                }
                facts.add_edge(x, y);
            }
            "NEQ" => {
                if x == y {
                    return Ok(Outcome::unsat_because(format!(
                        "{0} != {0}",
                        inst.variables[x]
                    )));
                }
                neq.push((x, y));
            }
            _ => hat.push((x, y)),
        }
    }
    loop {
        if let Some(why) = facts.conflict() {
            return Ok(Outcome::unsat_because(why.to_string()));
        }
        if let Some(&(x, y)) = hat
            .iter()
            .find(|&&(x, y)| facts.derived(x, y) == Some(PairType::E))
        {
            return Ok(Outcome::unsat_because(format!(
                "E and Ehat both hold on ({},{})",
                inst.variables[x], inst.variables[y]
            )));
        }
        if let Some(&(x, y)) = neq.iter().find(|&&(x, y)| facts.find(x) == facts.find(y)) {
            return Ok(Outcome::unsat_because(format!(
                "{} and {} are forced equal",
                inst.variables[x], inst.variables[y]
            )));
        }
        match final_check(&mut facts, &base) {
            FinalCheck::Ok => return Ok(Outcome::sat(facts.completion())),
            FinalCheck::Unsat(why) => return Ok(Outcome::unsat_because(why)),
            FinalCheck::Progress => facts.touched.clear(),
        }
    }
}
