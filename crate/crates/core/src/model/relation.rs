use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::base::BaseStructure;
use super::formula::compile_formula_with_cap;
use super::matrix::{pair_count, type_space, validate_type, TypeMatrix, DEFAULT_ARITY_CAP};
use crate::error::{Error, Result};

/// A relation given by the set of atomic types of its tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRelation {
    pub name: String,
    pub arity: usize,
    pub types: BTreeSet<TypeMatrix>,
}

impl OrbitRelation {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        types: impl IntoIterator<Item = TypeMatrix>,
    ) -> Result<Self> {
        let name = name.into();
        let types: BTreeSet<TypeMatrix> = types.into_iter().collect();
        if let Some(bad) = types.iter().find(|t| t.arity() != arity) {
            return Err(Error::ArityMismatch {
                name,
                expected: arity,
                got: bad.arity(),
            });
        }
        Ok(OrbitRelation { name, arity, types })
    }

    /// Every valid type of the given arity.
    pub fn full(name: impl Into<String>, arity: usize, base: &BaseStructure) -> Self {
        OrbitRelation {
            name: name.into(),
            arity,
            types: type_space(arity, base).iter().cloned().collect(),
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn contains(&self, t: &TypeMatrix) -> bool {
        self.types.contains(t)
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn codes(&self) -> Vec<String> {
        self.types.iter().map(TypeMatrix::code).collect()
    }

    pub fn validate(&self, base: &BaseStructure) -> Result<()> {
        for t in &self.types {
            if let Err(v) = validate_type(t, base) {
                return Err(Error::InvalidType {
                    relation: self.name.clone(),
                    ty: t.to_string(),
                    reason: v.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> RelationJson {
        RelationJson {
            name: self.name.clone(),
            arity: self.arity,
            formula: None,
            types: Some(self.codes()),
        }
    }
}

/// A base structure together with finitely many named relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub base: BaseStructure,
    relations: Vec<OrbitRelation>,
}

impl Signature {
    pub fn new(base: BaseStructure, relations: Vec<OrbitRelation>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &relations {
            if !seen.insert(r.name.as_str()) {
                return Err(Error::DuplicateRelation(r.name.clone()));
            }
            r.validate(&base)?;
        }
        Ok(Signature { base, relations })
    }

    pub fn relations(&self) -> &[OrbitRelation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Result<&OrbitRelation> {
        self.relations
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(0)
    }

    pub fn from_json(j: &SignatureJson) -> Result<Self> {
        Self::from_json_with_cap(j, DEFAULT_ARITY_CAP)
    }

    pub fn from_json_with_cap(j: &SignatureJson, cap: usize) -> Result<Self> {
        let base = BaseStructure::try_from(j.base.clone())?;
        let relations = j
            .relations
            .iter()
            .map(|r| r.to_relation(&base, cap))
            .collect::<Result<Vec<_>>>()?;
        Signature::new(base, relations)
    }

    pub fn to_json(&self) -> SignatureJson {
        SignatureJson {
            base: self.base.into(),
            relations: self.relations.iter().map(OrbitRelation::to_json).collect(),
        }
    }

    /// Check that `witness` is a valid type over the instance's variables
    /// whose restriction to each constraint lies in the constraint's relation.
    pub fn verify_witness(
        &self,
        inst: &Instance,
        witness: &TypeMatrix,
    ) -> std::result::Result<(), String> {
        if witness.arity() != inst.variables.len() {
            return Err(format!(
                "witness has arity {}, instance has {} variables",
                witness.arity(),
                inst.variables.len()
            ));
        }
        validate_type(witness, &self.base).map_err(|v| format!("invalid witness: {v}"))?;
        for (idx, c) in inst.constraints.iter().enumerate() {
            let rel = self.relation(&c.relation).map_err(|e| e.to_string())?;
            let induced = witness.restrict(&c.args);
            if !rel.contains(&induced) {
                return Err(format!(
                    "constraint #{idx} ({}) sees {induced}, not in the relation",
                    inst.describe(c)
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub relation: String,
    /// Indices into the instance's variable list; repetition allowed.
    pub args: Vec<usize>,
}

/// A primitive positive sentence: variables and atomic constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instance {
    pub variables: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl Instance {
    pub fn new(variables: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for v in &variables {
            if !seen.insert(v.as_str()) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        Ok(Instance {
            variables,
            constraints: Vec::new(),
        })
    }

    /// Instance with variables named `x0, x1, ...`.
    pub fn with_vars(n: usize) -> Self {
        Instance {
            variables: (0..n).map(|i| format!("x{i}")).collect(),
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, relation: &str, args: &[usize]) -> &mut Self {
        assert!(args.iter().all(|&a| a < self.variables.len()));
        self.constraints.push(Constraint {
            relation: relation.to_string(),
            args: args.to_vec(),
        });
        self
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Relations exist and arities match.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        for c in &self.constraints {
            let r = sig.relation(&c.relation)?;
            if r.arity != c.args.len() {
                return Err(Error::ArityMismatch {
                    name: c.relation.clone(),
                    expected: r.arity,
                    got: c.args.len(),
                });
            }
            if let Some(&bad) = c.args.iter().find(|&&a| a >= self.variables.len()) {
                return Err(Error::Malformed(format!(
                    "variable index {bad} out of range"
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self, c: &Constraint) -> String {
        let args: Vec<&str> = c.args.iter().map(|&a| self.variables[a].as_str()).collect();
        format!("{}({})", c.relation, args.join(","))
    }

    pub fn from_json(j: &InstanceJson) -> Result<Self> {
        let mut inst = Instance::new(j.variables.clone())?;
        let index: HashMap<&str, usize> = j
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        for c in &j.constraints {
            let args = c
                .vars
                .iter()
                .map(|v| {
                    index
                        .get(v.as_str())
                        .copied()
                        .ok_or_else(|| Error::UnknownVariable(v.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            inst.constraints.push(Constraint {
                relation: c.rel.clone(),
                args,
            });
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            variables: self.variables.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintJson {
                    rel: c.relation.clone(),
                    vars: c.args.iter().map(|&a| self.variables[a].clone()).collect(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.constraints.iter().map(|c| self.describe(c)).collect();
        write!(f, "{}", parts.join(" & "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
        })
    }
}

/// A solver answer; the witness is present exactly when satisfiable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub witness: Option<TypeMatrix>,
    /// Why an instance was refuted, when the solver knows.
    pub reason: Option<String>,
}

impl Outcome {
    pub fn sat(witness: TypeMatrix) -> Self {
        Outcome {
            status: Status::Sat,
            witness: Some(witness),
            reason: None,
        }
    }

    pub fn unsat() -> Self {
        Outcome {
            status: Status::Unsat,
            witness: None,
            reason: None,
        }
    }

    pub fn unsat_because(reason: impl Into<String>) -> Self {
        Outcome {
            reason: Some(reason.into()),
            ..Outcome::unsat()
        }
    }

    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationJson {
    pub name: String,
    pub arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    /// Row-major type codes such as `"EN="`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<Vec<String>>,
}

impl RelationJson {
    pub fn to_relation(&self, base: &BaseStructure, cap: usize) -> Result<OrbitRelation> {
        match (&self.formula, &self.types) {
            (Some(text), None) => {
                Ok(compile_formula_with_cap(text, self.arity, base, cap)?.renamed(&self.name))
            }
            (None, Some(codes)) => {
                if pair_count(self.arity) > 64 {
                    return Err(Error::CapExceeded {
                        what: "arity",
                        value: self.arity,
                        cap: 11,
                    });
                }
                let types = codes
                    .iter()
                    .map(|c| TypeMatrix::from_code(self.arity, c))
                    .collect::<Result<Vec<_>>>()?;
                OrbitRelation::new(&self.name, self.arity, types)
            }
            _ => Err(Error::Malformed(format!(
                "relation `{}` needs exactly one of `formula` and `types`",
                self.name
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureJson {
    pub base: super::base::BaseJson,
    pub relations: Vec<RelationJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub rel: String,
    pub vars: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub variables: Vec<String>,
    pub constraints: Vec<ConstraintJson>,
}

/// A witness: the type of the variable tuple, as a row-major code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub variables: Vec<String>,
    pub entries: String,
}

impl WitnessJson {
    pub fn new(inst: &Instance, w: &TypeMatrix) -> Self {
        WitnessJson {
            variables: inst.variables.clone(),
            entries: w.code(),
        }
    }

    pub fn to_matrix(&self) -> Result<TypeMatrix> {
        TypeMatrix::from_code(self.variables.len(), &self.entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_json_round_trip() {
        let text = r#"{"base":{"kind":"henson","n":3},"relations":[
            {"name":"E","arity":2,"formula":"E(1,2)"},
            {"name":"R","arity":4,"formula":"!E(1,2)|E(3,4)"}]}"#;
        let j: SignatureJson = serde_json::from_str(text).unwrap();
        let sig = Signature::from_json(&j).unwrap();
        let back = Signature::from_json(&sig.to_json()).unwrap();
        assert_eq!(sig, back);
        assert_eq!(sig.relation("E").unwrap().codes(), vec!["E"]);
        assert!(matches!(sig.relation("X"), Err(Error::UnknownRelation(_))));
    }

    #[test]
    fn instance_json_round_trip_and_checks() {
        let text =
            r#"{"variables":["x","y"],"constraints":[{"rel":"R","vars":["x","y","x","y"]}]}"#;
        let j: InstanceJson = serde_json::from_str(text).unwrap();
        let inst = Instance::from_json(&j).unwrap();
        assert_eq!(inst.constraints[0].args, vec![0, 1, 0, 1]);
        assert_eq!(serde_json::to_string(&inst.to_json()).unwrap(), text);
        let bad: InstanceJson =
            serde_json::from_str(r#"{"variables":["x"],"constraints":[{"rel":"R","vars":["z"]}]}"#)
                .unwrap();
        assert!(matches!(
            Instance::from_json(&bad),
            Err(Error::UnknownVariable(_))
        ));
        let dup: InstanceJson =
            serde_json::from_str(r#"{"variables":["x","x"],"constraints":[]}"#).unwrap();
        assert!(matches!(
            Instance::from_json(&dup),
            Err(Error::DuplicateVariable(_))
        ));
    }

    #[test]
    fn invalid_types_are_rejected() {
        let h3 = BaseStructure::henson(3).unwrap();
        let tri = TypeMatrix::from_code(3, "EEE").unwrap();
        let r = OrbitRelation::new("T", 3, [tri]).unwrap();
        assert!(matches!(
            Signature::new(h3, vec![r]),
            Err(Error::InvalidType { .. })
        ));
    }
}
