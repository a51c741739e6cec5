//! Two infinite classes: contract forced equalities, then solve the
//! injective instance as a Boolean affine system over class indicators.

use crate::affine::gf2::{affine_hull, gf2_solve, BitVec, Gf2Result, Gf2System};
use crate::error::{Error, Result};
use crate::model::{BaseStructure, Instance, Outcome, PairType, Signature, TypeMatrix};

/// A constraint of the contracted instance: pairwise distinct
/// representatives and the injective types allowed on them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjConstraint {
    pub relation: String,
    /// Indices into [`Injectivized::reps`].
    pub vars: Vec<usize>,
    pub types: Vec<TypeMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injectivized {
    /// Original variable to the index of its representative in `reps`.
    pub class_of: Vec<usize>,
    /// One original variable per class.
    pub reps: Vec<usize>,
    pub constraints: Vec<InjConstraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Injectivize {
    Contracted(Injectivized),
    Reject(String),
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Restrict each constraint to the types consistent with the current
/// identifications, merge pairs that are `=` in all of them, and repeat.
/// A constraint with nothing left, before or after dropping non-injective
/// types, rejects the instance.
pub fn injectivize(sig: &Signature, inst: &Instance) -> Result<Injectivize> {
    inst.check(sig)?;
    let n = inst.variables.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut allowed: Vec<Vec<TypeMatrix>> = Vec::with_capacity(inst.constraints.len());
    for c in &inst.constraints {
        allowed.push(sig.relation(&c.relation)?.types.iter().cloned().collect());
    }
    loop {
        let mut merged = false;
        for (c, types) in inst.constraints.iter().zip(allowed.iter_mut()) {
            let k = c.args.len();
            let same: Vec<(usize, usize)> = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .filter(|&(i, j)| find(&mut parent, c.args[i]) == find(&mut parent, c.args[j]))
                .collect();
            types.retain(|t| same.iter().all(|&(i, j)| t.get(i, j) == PairType::Equal));
            if types.is_empty() {
                return Ok(Injectivize::Reject(format!(
                    "{} cannot hold under the forced identifications",
                    inst.describe(c)
                )));
            }
            for i in 0..k {
                for j in i + 1..k {
                    if types.iter().all(|t| t.get(i, j) == PairType::Equal) {
                        let (a, b) = (find(&mut parent, c.args[i]), find(&mut parent, c.args[j]));
                        if a != b {
                            parent[a] = b;
                            merged = true;
                        }
                    }
                }
            }
        }
        if !merged {
            break;
        }
    }

    let mut reps = Vec::new();
    let mut class_of = vec![usize::MAX; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        if class_of[r] == usize::MAX {
            class_of[r] = reps.len();
            reps.push(r);
        }
        class_of[v] = class_of[r];
    }
    let mut constraints = Vec::new();
    for (c, types) in inst.constraints.iter().zip(allowed) {
        let mut positions = Vec::new();
        let mut vars = Vec::new();
        for (p, &a) in c.args.iter().enumerate() {
            if !vars.contains(&class_of[a]) {
                vars.push(class_of[a]);
                positions.push(p);
            }
        }
        if vars.len() < 2 {
            continue;
        }
        let mut inj: Vec<TypeMatrix> = types
            .iter()
            .map(|t| t.restrict(&positions))
            .filter(TypeMatrix::is_injective)
            .collect();
        inj.sort();
        inj.dedup();
        if inj.is_empty() {
            return Ok(Injectivize::Reject(format!(
                "{} has no injective solution",
                inst.describe(c)
            )));
        }
        constraints.push(InjConstraint {
            relation: c.relation.clone(),
            vars,
            types: inj,
        });
    }
    Ok(Injectivize::Contracted(Injectivized {
        class_of,
        reps,
        constraints,
    }))
}

/// Class bits of an injective type, position 0 in class 0.
fn class_pattern(t: &TypeMatrix) -> Vec<bool> {
    (0..t.arity())
        .map(|i| i > 0 && t.get(0, i) != PairType::E)
        .collect()
}

pub fn solve_c2w_minority(sig: &Signature, inst: &Instance) -> Result<Outcome> {
    Ok(solve_c2w_minority_with_system(sig, inst)?.0)
}

/// Also returns the stacked system handed to elimination.
pub fn solve_c2w_minority_with_system(
    sig: &Signature,
    inst: &Instance,
) -> Result<(Outcome, Option<Gf2System>)> {
    if sig.base != BaseStructure::two_omega() {
        return Err(Error::UnsupportedBase(sig.base.to_string()));
    }
    let contracted = match injectivize(sig, inst)? {
        Injectivize::Reject(why) => return Ok((Outcome::unsat_because(why), None)),
        Injectivize::Contracted(c) => c,
    };
    let mut sys = Gf2System::new(contracted.reps.len());
    for c in &contracted.constraints {
        let mut patterns = Vec::new();
        for t in &c.types {
            let bits = class_pattern(t);
            let flipped: Vec<bool> = bits.iter().map(|b| !b).collect();
            patterns.push(BitVec::from_bools(&bits));
            patterns.push(BitVec::from_bools(&flipped));
        }
        let (local, exact) = affine_hull(&patterns)?;
        if !exact {
            return Err(Error::NotAffine(c.relation.clone()));
        }
        for (coeffs, rhs) in local.rows() {
            let ones: Vec<usize> = coeffs.ones().map(|i| c.vars[i]).collect();
            sys.push_ones(&ones, *rhs);
        }
    }
    let outcome = match gf2_solve(&sys) {
        Gf2Result::Inconsistent { certificate } => Outcome::unsat_because(format!(
            "class-indicator equations {certificate:?} sum to 0 = 1"
        )),
        Gf2Result::Solution(bits) => {
            let cls = &contracted.class_of;
            Outcome::sat(TypeMatrix::from_fn(inst.variables.len(), |u, v| {
                if cls[u] == cls[v] {
                    PairType::Equal
                } else if bits[cls[u]] == bits[cls[v]] {
                    PairType::E
                } else {
                    PairType::N
                }
            }))
        }
    };
    Ok((outcome, Some(sys)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compile_formula;

    fn sig(formulas: &[(&str, &str, usize)]) -> Signature {
        let base = BaseStructure::two_omega();
        let rels = formulas
            .iter()
            .map(|(name, f, k)| compile_formula(f, *k, &base).unwrap().renamed(*name))
            .collect();
        Signature::new(base, rels).unwrap()
    }

    #[test]
    fn transitivity_example() {
        let s = sig(&[("E", "E(1,2)", 2), ("N", "N(1,2)", 2)]);
        let mut inst = Instance::with_vars(3);
        inst.push("E", &[0, 1])
            .push("E", &[1, 2])
            .push("N", &[0, 2]);
        assert!(!solve_c2w_minority(&s, &inst).unwrap().is_sat());
        let mut inst = Instance::with_vars(3);
        inst.push("E", &[0, 1])
            .push("E", &[1, 2])
            .push("E", &[0, 2]);
        let out = solve_c2w_minority(&s, &inst).unwrap();
        s.verify_witness(&inst, out.witness.as_ref().unwrap())
            .unwrap();
    }

    #[test]
    fn equality_constraint_merges() {
        let s = sig(&[("eq", "eq(1,2)", 2), ("N", "N(1,2)", 2)]);
        let mut inst = Instance::with_vars(2);
        inst.push("eq", &[0, 1]);
        let Injectivize::Contracted(c) = injectivize(&s, &inst).unwrap() else {
            panic!("rejected")
        };
        assert_eq!(c.reps.len(), 1);
        assert!(c.constraints.is_empty());
        inst.push("N", &[0, 1]);
        assert!(matches!(
            injectivize(&s, &inst).unwrap(),
            Injectivize::Reject(_)
        ));
    }

    #[test]
    fn injective_part_of_eq() {
        let s = sig(&[("Eq", "Eq(1,2)", 2)]);
        let mut inst = Instance::with_vars(2);
        inst.push("Eq", &[0, 1]);
        let Injectivize::Contracted(c) = injectivize(&s, &inst).unwrap() else {
            panic!("rejected")
        };
        assert_eq!(
            c.constraints[0].types,
            vec![TypeMatrix::from_code(2, "E").unwrap()]
        );
    }
}
