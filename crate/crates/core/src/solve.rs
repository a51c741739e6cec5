//! Solver dispatch. Every witness is re-verified before it is returned.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affine::gf2::Gf2System;
use crate::affine::minority::solve_c2w_minority_with_system;
use crate::affine::parity::{
    compile_parity_signature, solve_cw2_parity_with_system, CompiledParity,
};
use crate::behaviour::{behaviour_by_name, Behaviour};
use crate::classify::{classify, collapse_equality, Verdict, VerdictOutcome};
use crate::error::{Error, Result};
use crate::horn::{compile_signature, horn_solve, CompiledSignature};
use crate::model::{Instance, Outcome, PairType, Signature, TypeMatrix};
use crate::oracle::oracle_solve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverId {
    /// Horn propagation for min-closed signatures.
    Horn,
    /// The same engine over pure equality.
    HornEquality,
    /// Parity normal form over classes of size two.
    Parity,
    /// Injectivization plus class-indicator equations over two classes.
    Minority,
    /// Everything equal.
    Constant,
    Oracle,
}

impl SolverId {
    pub const ALL: [SolverId; 6] = [
        SolverId::Horn,
        SolverId::HornEquality,
        SolverId::Parity,
        SolverId::Minority,
        SolverId::Constant,
        SolverId::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverId::Horn => "horn",
            SolverId::HornEquality => "horn-equality",
            SolverId::Parity => "parity",
            SolverId::Minority => "minority",
            SolverId::Constant => "constant",
            SolverId::Oracle => "oracle",
        }
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Malformed(format!("unknown solver `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    /// Whatever the classifier names; the oracle for hard or delegated cases.
    Auto,
    Named(SolverId),
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(SolverChoice::Auto)
        } else {
            s.parse().map(SolverChoice::Named)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub outcome: Outcome,
    pub solver: SolverId,
    /// The final GF(2) system, for the affine solvers.
    pub system: Option<Gf2System>,
}

/// A solver with its per-signature compilation done once.
pub struct Prepared {
    sig: Signature,
    solver: SolverId,
    oracle_cap: usize,
    horn: Option<CompiledSignature>,
    parity: Option<CompiledParity>,
    /// Run over this equality collapse and lift witnesses back.
    collapse: Option<(Behaviour, Signature)>,
}

impl Prepared {
    pub fn new(sig: &Signature, solver: SolverId, oracle_cap: usize) -> Result<Self> {
        Self::with_collapse(sig, solver, None, oracle_cap)
    }

    /// Run `solver` on the equality collapse of `sig` under `collapse`.
    pub fn with_collapse(
        sig: &Signature,
        solver: SolverId,
        collapse: Option<&Behaviour>,
        oracle_cap: usize,
    ) -> Result<Self> {
        let collapse = match collapse {
            Some(b) => Some((b.clone(), collapse_equality(sig, b)?)),
            None => None,
        };
        let target = collapse.as_ref().map(|(_, s)| s).unwrap_or(sig);
        let mut horn = None;
        let mut parity = None;
        match solver {
            SolverId::Horn | SolverId::HornEquality => match compile_signature(target) {
                Ok(c) => horn = Some(c),
                Err(Error::NotCompiled(name)) => {
                    log::warn!("relation `{name}` has no exact Horn compilation; using the oracle");
                }
                Err(e) => return Err(e),
            },
            SolverId::Parity => parity = Some(compile_parity_signature(target)?),
            _ => {}
        }
        Ok(Prepared {
            sig: sig.clone(),
            solver,
            oracle_cap,
            horn,
            parity,
            collapse,
        })
    }

    /// From a P verdict; hard and delegated verdicts go to the oracle.
    pub fn from_verdict(sig: &Signature, verdict: &Verdict, oracle_cap: usize) -> Result<Self> {
        match (verdict.outcome, verdict.plan()) {
            (VerdictOutcome::P, Some((solver, collapse))) => {
                let collapse = match collapse {
                    Some(name) => Some(behaviour_by_name(name).ok_or_else(|| {
                        Error::Invariant(format!("verdict names unknown behaviour {name}"))
                    })?),
                    None => None,
                };
                Self::with_collapse(sig, solver, collapse.as_ref(), oracle_cap)
            }
            _ => Self::new(sig, SolverId::Oracle, oracle_cap),
        }
    }

    pub fn solver(&self) -> SolverId {
        self.solver
    }

    pub fn solve(&self, inst: &Instance) -> Result<Solved> {
        inst.check(&self.sig)?;
        let target = self.collapse.as_ref().map(|(_, s)| s).unwrap_or(&self.sig);
        let mut system = None;
        let (outcome, used) = match self.solver {
            SolverId::Oracle => (
                oracle_solve(target, inst, self.oracle_cap)?,
                SolverId::Oracle,
            ),
            SolverId::Horn | SolverId::HornEquality => match &self.horn {
                Some(c) => (horn_solve(target, c, inst)?, self.solver),
                None => (
                    oracle_solve(target, inst, self.oracle_cap)?,
                    SolverId::Oracle,
                ),
            },
            SolverId::Parity => {
                let c = self.parity.as_ref().expect("compiled on construction");
                let (o, s) = solve_cw2_parity_with_system(target, c, inst)?;
                system = Some(s);
                (o, SolverId::Parity)
            }
            SolverId::Minority => {
                let (o, s) = solve_c2w_minority_with_system(target, inst).map_err(|e| match e {
                    Error::NotAffine(r) => {
                        Error::Invariant(format!("class patterns of `{r}` are not affine"))
                    }
                    e => e,
                })?;
                system = s;
                (o, SolverId::Minority)
            }
            SolverId::Constant => (solve_constant(target, inst)?, SolverId::Constant),
        };
        let outcome = match (&self.collapse, outcome.witness) {
            (Some((b, _)), Some(w)) => {
                let distinct = b.eval(&[PairType::N]);
                Outcome::sat(w.map(|v| if v == PairType::N { distinct } else { v }))
            }
            (_, witness) => Outcome { witness, ..outcome },
        };
        if let Some(w) = &outcome.witness {
            self.sig
                .verify_witness(inst, w)
                .map_err(|why| Error::Invariant(format!("{used} returned a bad witness: {why}")))?;
        }
        Ok(Solved {
            outcome,
            solver: used,
            system,
        })
    }
}

/// All variables equal; only an empty relation can refute.
pub fn solve_constant(sig: &Signature, inst: &Instance) -> Result<Outcome> {
    inst.check(sig)?;
    for c in &inst.constraints {
        if !sig
            .relation(&c.relation)?
            .contains(&TypeMatrix::all_equal(c.args.len()))
        {
            return Ok(Outcome::unsat_because(format!(
                "{} excludes the constant tuple",
                inst.describe(c)
            )));
        }
    }
    Ok(Outcome::sat(TypeMatrix::all_equal(inst.variables.len())))
}

/// Classify (for `Auto`) and solve one instance.
pub fn solve(
    sig: &Signature,
    inst: &Instance,
    choice: SolverChoice,
    oracle_cap: usize,
) -> Result<Solved> {
    let prepared = match choice {
        SolverChoice::Auto => Prepared::from_verdict(sig, &classify(sig)?, oracle_cap)?,
        SolverChoice::Named(id) => Prepared::new(sig, id, oracle_cap)?,
    };
    prepared.solve(inst)
}
