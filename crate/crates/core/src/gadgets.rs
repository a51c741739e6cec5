//! The 6-ary hardness relation `H` and the reduction from positive
//! 1-in-3-SAT onto it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BaseStructure, Instance, OrbitRelation, PairType, TypeMatrix};

/// `H` as formula text: all cross-block pairs are non-edges and exactly one
/// of the blocks `(1,2)`, `(3,4)`, `(5,6)` is an edge.
pub fn h_formula() -> String {
    let mut cross = Vec::new();
    for i in 0..6 {
        for j in i + 1..6 {
            if i / 2 != j / 2 {
                cross.push(format!("N({},{})", i + 1, j + 1));
            }
        }
    }
    format!(
        "{} & ((E(1,2)&N(3,4)&N(5,6)) | (N(1,2)&E(3,4)&N(5,6)) | (N(1,2)&N(3,4)&E(5,6)))",
        cross.join("&")
    )
}

/// `H` built directly from its three types.
pub fn relation_h(n: u32) -> Result<OrbitRelation> {
    BaseStructure::henson(n)?;
    let types = (0..3).map(|block| {
        TypeMatrix::from_fn(6, |i, j| {
            if i / 2 == j / 2 && i / 2 == block {
                PairType::E
            } else {
                PairType::N
            }
        })
    });
    OrbitRelation::new("H", 6, types)
}

/// Positive 1-in-3-SAT: every clause needs exactly one true member.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FormulaJson", into = "FormulaJson")]
pub struct OneInThreeFormula {
    pub variables: Vec<String>,
    pub clauses: Vec<[usize; 3]>,
}

#[derive(Serialize, Deserialize)]
struct FormulaJson {
    variables: Vec<String>,
    clauses: Vec<[String; 3]>,
}

impl TryFrom<FormulaJson> for OneInThreeFormula {
    type Error = Error;

    fn try_from(j: FormulaJson) -> Result<Self> {
        let mut f = OneInThreeFormula::new(j.variables)?;
        for [a, b, c] in &j.clauses {
            let idx = |name: &String| {
                f.variables
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))
            };
            let clause = [idx(a)?, idx(b)?, idx(c)?];
            f.push(clause)?;
        }
        Ok(f)
    }
}

impl From<OneInThreeFormula> for FormulaJson {
    fn from(f: OneInThreeFormula) -> Self {
        let name = |i: usize| f.variables[i].clone();
        FormulaJson {
            clauses: f
                .clauses
                .iter()
                .map(|c| [name(c[0]), name(c[1]), name(c[2])])
                .collect(),
            variables: f.variables.clone(),
        }
    }
}

impl OneInThreeFormula {
    pub fn new(variables: Vec<String>) -> Result<Self> {
        Instance::new(variables.clone())?;
        Ok(OneInThreeFormula {
            variables,
            clauses: Vec::new(),
        })
    }

    pub fn push(&mut self, clause: [usize; 3]) -> Result<()> {
        let [a, b, c] = clause;
        if a == b || b == c || a == c {
            return Err(Error::Malformed("clause members must be distinct".into()));
        }
        if clause.iter().any(|&v| v >= self.variables.len()) {
            return Err(Error::Malformed(
                "clause mentions an unknown variable".into(),
            ));
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Satisfiability by trying all assignments.
    pub fn brute_force(&self) -> bool {
        let n = self.variables.len();
        assert!(n < 32, "brute force is for small formulas");
        (0u32..1 << n).any(|bits| {
            self.clauses
                .iter()
                .all(|c| c.iter().filter(|&&v| bits >> v & 1 == 1).count() == 1)
        })
    }
}

/// Variables `v` and `v'` per formula variable and one `H(u,u',v,v',w,w')`
/// per clause `(u,v,w)`.
pub fn reduce_1in3(f: &OneInThreeFormula) -> Instance {
    let mut vars = Vec::with_capacity(2 * f.variables.len());
    for v in &f.variables {
        vars.push(v.clone());
        vars.push(format!("{v}'"));
    }
    let mut inst = Instance {
        variables: vars,
        constraints: Vec::new(),
    };
    for &[u, v, w] in &f.clauses {
        inst.push("H", &[2 * u, 2 * u + 1, 2 * v, 2 * v + 1, 2 * w, 2 * w + 1]);
    }
    inst
}

/// Every formula over `v0..v{n-1}`, `n <= max_vars`, with at most
/// `max_clauses` clauses, as multisets of sorted triples.
pub fn all_small_formulas(max_vars: usize, max_clauses: usize) -> Vec<OneInThreeFormula> {
    let mut out = Vec::new();
    for n in 0..=max_vars {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut triples = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    triples.push([a, b, c]);
                }
            }
        }
        let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
        while let Some((picked, from)) = stack.pop() {
            let mut f = OneInThreeFormula::new(names.clone()).expect("distinct names");
            for &t in &picked {
                f.push(triples[t]).expect("valid triple");
            }
            out.push(f);
            if picked.len() < max_clauses {
                for t in from..triples.len() {
                    let mut next = picked.clone();
                    next.push(t);
                    stack.push((next, t));
                }
            }
        }
    }
    out
}
