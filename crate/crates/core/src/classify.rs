//! The P / NP-complete decision per base structure.
//!
//! Each tree tests behaviours in a fixed order; a behaviour that preserves
//! every relation either names a polynomial solver or collapses the
//! signature onto pure equality, which has its own small tree. When nothing
//! applies the verdict is NP-complete with a label naming the obstruction.

use serde::{Deserialize, Serialize};

use crate::behaviour::{check_preservation, realizable, Behaviour, Preservation};
use crate::error::{Error, Result};
use crate::model::{
    BaseStructure, Card, OrbitRelation, PairType, Signature, SignatureJson, TypeMatrix,
};
use crate::solve::SolverId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictOutcome {
    P,
    #[serde(rename = "NPC")]
    Npc,
    #[serde(rename = "DELEGATED")]
    Delegated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerdictWitness {
    Solver {
        solver: SolverId,
        behaviour: String,
        /// Unary behaviour collapsing the signature onto equality first.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        collapse: Option<String>,
    },
    Hardness {
        label: String,
    },
    Delegated {
        reason: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        residual: Option<SignatureJson>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub test: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: VerdictOutcome,
    pub witness: VerdictWitness,
    pub trail: Vec<TrailEntry>,
}

impl Verdict {
    /// Solver and optional collapse of a P verdict.
    pub fn plan(&self) -> Option<(SolverId, Option<&str>)> {
        match &self.witness {
            VerdictWitness::Solver {
                solver, collapse, ..
            } => Some((*solver, collapse.as_deref())),
            _ => None,
        }
    }

    /// For signatures whose base is handled elsewhere.
    pub fn delegated_base(reason: impl Into<String>) -> Self {
        let reason = reason.into();
        Verdict {
            outcome: VerdictOutcome::Delegated,
            witness: VerdictWitness::Delegated {
                reason: reason.clone(),
                residual: None,
            },
            trail: vec![TrailEntry {
                test: "base structure".into(),
                passed: false,
                detail: Some(reason),
            }],
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ClassifyOptions {
    /// Also try every unary table as a collapse before declaring hardness.
    pub deep: bool,
}

struct Tree<'s> {
    sig: &'s Signature,
    trail: Vec<TrailEntry>,
}

impl Tree<'_> {
    fn note(&mut self, test: impl Into<String>, passed: bool, detail: Option<String>) {
        self.trail.push(TrailEntry {
            test: test.into(),
            passed,
            detail,
        });
    }

    /// Preservation of every relation (only nonempty ones if `nonempty`).
    fn preserves_all(&mut self, b: &Behaviour, nonempty: bool) -> bool {
        for r in self.sig.relations() {
            if nonempty && r.is_empty() {
                continue;
            }
            if let Preservation::Violated { inputs, output } = check_preservation(b, r) {
                let ins: Vec<String> = inputs.iter().map(ToString::to_string).collect();
                self.note(
                    format!("{b} preserves all relations"),
                    false,
                    Some(format!("{}: {} -> {output}", r.name, ins.join(", "))),
                );
                return false;
            }
        }
        self.note(format!("{b} preserves all relations"), true, None);
        true
    }

    fn done(self, outcome: VerdictOutcome, witness: VerdictWitness) -> Verdict {
        Verdict {
            outcome,
            witness,
            trail: self.trail,
        }
    }

    fn p(self, solver: SolverId, b: &Behaviour) -> Verdict {
        self.done(
            VerdictOutcome::P,
            VerdictWitness::Solver {
                solver,
                behaviour: b.name().to_string(),
                collapse: None,
            },
        )
    }

    fn npc(self, label: &str) -> Verdict {
        self.done(
            VerdictOutcome::Npc,
            VerdictWitness::Hardness {
                label: label.to_string(),
            },
        )
    }

    /// Collapse with `b` and finish on the equality tree.
    fn collapse(mut self, b: &Behaviour) -> Result<Verdict> {
        self.note(
            "collapse detection is best-effort (order-free unary behaviours only)",
            true,
            None,
        );
        let collapsed = collapse_equality(self.sig, b)?;
        let inner = classify_equality(&collapsed);
        self.trail.extend(inner.trail);
        let witness = match inner.witness {
            VerdictWitness::Solver {
                solver, behaviour, ..
            } => VerdictWitness::Solver {
                solver,
                behaviour,
                collapse: Some(b.name().to_string()),
            },
            w => w,
        };
        Ok(self.done(inner.outcome, witness))
    }

    /// The collapse has a finite image; its quotient is not classified here.
    fn delegate_quotient(self, b: &Behaviour) -> Result<Verdict> {
        let residual = collapse_equality(self.sig, b)?;
        Ok(self.done(
            VerdictOutcome::Delegated,
            VerdictWitness::Delegated {
                reason: format!(
                    "{b} maps onto a finite quotient; its classification is a finite-domain problem"
                ),
                residual: Some(residual.to_json()),
            },
        ))
    }

    /// `B_quotient` collapses onto an equality structure when there are
    /// infinitely many classes and onto a finite one otherwise.
    fn quotient(self, b: &Behaviour) -> Result<Verdict> {
        match self.sig.base {
            BaseStructure::Equiv { n, .. } if n.is_omega() => self.collapse(b),
            _ => self.delegate_quotient(b),
        }
    }

    /// Unary tables beyond the named collapses, for `--deep`.
    fn deep_scan(&mut self) -> Option<Behaviour> {
        let named = [
            Behaviour::edgedel(),
            Behaviour::cliquecol(),
            Behaviour::quotient(),
            Behaviour::constant(),
        ];
        for on_e in PairType::ALL {
            for on_n in PairType::ALL {
                let b = Behaviour::unary_table(on_e, on_n);
                let identity = on_e == PairType::E && on_n == PairType::N;
                if identity || named.iter().any(|nb| nb.table() == b.table()) {
                    continue;
                }
                if !realizable(&b, &self.sig.base) {
                    self.note(format!("{b} is realizable"), false, None);
                    continue;
                }
                if self.preserves_all(&b, false) {
                    return Some(b);
                }
            }
        }
        None
    }

    fn hard(mut self, label: &str, opts: ClassifyOptions) -> Verdict {
        if opts.deep {
            if let Some(b) = self.deep_scan() {
                return self.done(
                    VerdictOutcome::Delegated,
                    VerdictWitness::Delegated {
                        reason: format!("{b} preserves every relation but names no solver"),
                        residual: None,
                    },
                );
            }
        }
        self.npc(label)
    }
}

/// Whether a behaviour can be the behaviour of a function on the base.
/// These are the rules the bounded sweep in [`realizable`] confirms on
/// small bases; they are stated directly so classification never pays for
/// a sweep at large clique bounds.
pub fn applies(b: &Behaviour, base: &BaseStructure) -> bool {
    let name = b.name();
    match *base {
        BaseStructure::Henson { .. } => matches!(name, "B_min" | "B_edgedel" | "B_const"),
        BaseStructure::Equiv { n, s } => match name {
            "B_min" => n.is_omega() && s == Card::Finite(2),
            "B_H3" => n.is_omega() && s == Card::Finite(2),
            "B_xnor3" => n == Card::Finite(2) && s.is_omega(),
            "B_edgedel" => n.is_omega(),
            "B_cliquecol" => s.is_omega(),
            "B_quotient" | "B_const" => true,
            _ => false,
        },
        BaseStructure::Equality => matches!(name, "B_const" | "B_eqmeet" | "B_p1" | "B_p2"),
    }
}

pub fn classify(sig: &Signature) -> Result<Verdict> {
    classify_with(sig, ClassifyOptions::default())
}

pub fn classify_with(sig: &Signature, opts: ClassifyOptions) -> Result<Verdict> {
    let mut t = Tree {
        sig,
        trail: Vec::new(),
    };
    let base = sig.base;
    t.note(format!("base {base}"), true, None);
    let min = Behaviour::min();
    let edgedel = Behaviour::edgedel();
    let cliquecol = Behaviour::cliquecol();
    let quotient = Behaviour::quotient();
    let constant = Behaviour::constant();
    match base {
        BaseStructure::Equality => Ok(classify_equality(sig)),
        BaseStructure::Henson { .. } => {
            if t.preserves_all(&min, false) {
                return Ok(t.p(SolverId::Horn, &min));
            }
            if t.preserves_all(&edgedel, false) {
                return t.collapse(&edgedel);
            }
            if t.preserves_all(&constant, true) {
                return Ok(t.p(SolverId::Constant, &constant));
            }
            Ok(t.hard("henson/pp-defines-H", opts))
        }
        BaseStructure::Equiv { n, s } if n == Card::Finite(2) && s.is_omega() => {
            let xnor = Behaviour::xnor3();
            if t.preserves_all(&xnor, false) {
                return Ok(t.p(SolverId::Minority, &xnor));
            }
            if t.preserves_all(&cliquecol, false) {
                return t.collapse(&cliquecol);
            }
            if t.preserves_all(&constant, true) {
                return Ok(t.p(SolverId::Constant, &constant));
            }
            if t.preserves_all(&quotient, false) {
                return t.quotient(&quotient);
            }
            Ok(t.hard("equiv-2-omega/no-balanced-xnor", opts))
        }
        BaseStructure::Equiv { n, s } if n.is_omega() && s == Card::Finite(2) => {
            if t.preserves_all(&min, false) {
                return Ok(t.p(SolverId::Horn, &min));
            }
            let h3 = Behaviour::h3();
            if t.preserves_all(&h3, false) {
                return Ok(t.p(SolverId::Parity, &h3));
            }
            for b in [&edgedel, &quotient] {
                if t.preserves_all(b, false) {
                    return t.collapse(b);
                }
            }
            if t.preserves_all(&constant, true) {
                return Ok(t.p(SolverId::Constant, &constant));
            }
            Ok(t.hard("equiv-omega-2/no-min-no-minority", opts))
        }
        BaseStructure::Equiv { n, .. } => {
            for b in [&cliquecol, &edgedel] {
                if applies(b, &base) && t.preserves_all(b, false) {
                    return t.collapse(b);
                }
            }
            if n.is_omega() && t.preserves_all(&quotient, false) {
                return t.collapse(&quotient);
            }
            if t.preserves_all(&constant, true) {
                return Ok(t.p(SolverId::Constant, &constant));
            }
            if t.preserves_all(&quotient, false) {
                return t.delegate_quotient(&quotient);
            }
            Ok(t.hard("equiv/no-collapse", opts))
        }
    }
}

/// Replace each relation by the skeletons of its images under `b`; with `b`
/// preserving the relation these are exactly the equality patterns whose
/// `b`-completion stays inside it.
pub fn collapse_equality(sig: &Signature, b: &Behaviour) -> Result<Signature> {
    if b.arity() != 1 {
        return Err(Error::Malformed(format!("{b} is not unary")));
    }
    let mut rels = Vec::new();
    for r in sig.relations() {
        if !check_preservation(b, r).is_preserved() {
            return Err(Error::NotPreserved {
                behaviour: b.name().to_string(),
                relation: r.name.clone(),
            });
        }
        let types = r.types.iter().map(|t| t.map(|v| b.eval(&[v])).skeleton());
        rels.push(OrbitRelation::new(r.name.clone(), r.arity, types)?);
    }
    Signature::new(BaseStructure::equality(), rels)
}

/// Constant, then binary injection, else hard.
pub fn classify_equality(sig: &Signature) -> Verdict {
    let mut t = Tree {
        sig,
        trail: Vec::new(),
    };
    let all_const = sig
        .relations()
        .iter()
        .all(|r| r.is_empty() || r.contains(&TypeMatrix::all_equal(r.arity)));
    t.note(
        "every nonempty relation contains the constant tuple",
        all_const,
        None,
    );
    let constant = Behaviour::constant();
    if all_const {
        return t.p(SolverId::Constant, &constant);
    }
    let eqmeet = Behaviour::eqmeet();
    if t.preserves_all(&eqmeet, false) {
        return t.p(SolverId::HornEquality, &eqmeet);
    }
    t.npc("equality/no-constant-no-injection")
}
