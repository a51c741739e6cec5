//! Ground truth by exhaustive search over types, and seeded generators.
//!
//! A primitive positive sentence holds in a universal homogeneous structure
//! iff some valid type over its variables satisfies every constraint, so
//! searching the finite type space of the instance decides it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::behaviour::{closure, Behaviour};
use crate::error::{Error, Result};
use crate::model::matrix::{search, PartialType};
use crate::model::{
    enumerate_types, BaseStructure, Instance, OrbitRelation, Outcome, PairType, Signature,
    TypeMatrix,
};

pub const DEFAULT_ORACLE_CAP: usize = 10;

/// Decide `inst` by backtracking over pair entries with validity and
/// constraint pruning. Independent components are searched separately.
pub fn oracle_solve(sig: &Signature, inst: &Instance, cap: usize) -> Result<Outcome> {
    inst.check(sig)?;
    let n = inst.variables.len();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "variable count",
            value: n,
            cap,
        });
    }
    // Constraints on a single variable see the all-equal type.
    for c in &inst.constraints {
        let r = sig.relation(&c.relation)?;
        if c.args.iter().all(|&a| a == c.args[0]) && !r.contains(&TypeMatrix::all_equal(r.arity)) {
            return Ok(Outcome::unsat());
        }
    }

    let comps = components(inst);
    let mut witness = TypeMatrix::filled(n, PairType::N);
    let mut blocks = vec![0usize; n];
    for comp in &comps {
        let Some(local) = solve_component(sig, inst, comp)? else {
            return Ok(Outcome::unsat());
        };
        let mut next_block = 0;
        for (a, &u) in comp.iter().enumerate() {
            for (b, &v) in comp.iter().enumerate().skip(a + 1) {
                witness.set(u, v, local.get(a, b));
            }
            blocks[u] = match (0..a).find(|&w| local.get(w, a).is_eq()) {
                Some(w) => blocks[comp[w]],
                None => {
                    next_block += 1;
                    next_block - 1
                }
            };
        }
    }
    // With finitely many classes, components share classes by block index.
    if let BaseStructure::Equiv { n: classes, .. } = sig.base {
        if !classes.is_omega() {
            for (ci, a) in comps.iter().enumerate() {
                for b in &comps[ci + 1..] {
                    for &u in a {
                        for &v in b {
                            let t = if blocks[u] == blocks[v] {
                                PairType::E
                            } else {
                                PairType::N
                            };
                            witness.set(u, v, t);
                        }
                    }
                }
            }
        }
    }
    Ok(Outcome::sat(witness))
}

/// Variables grouped by constraint co-occurrence, each group in BFS order.
fn components(inst: &Instance) -> Vec<Vec<usize>> {
    let n = inst.variables.len();
    let mut adj = vec![Vec::new(); n];
    for c in &inst.constraints {
        for &a in &c.args {
            for &b in &c.args {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut at = 0;
        while at < comp.len() {
            let u = comp[at];
            at += 1;
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

struct LocalConstraint<'s> {
    rel: &'s OrbitRelation,
    args: Vec<usize>,
}

impl LocalConstraint<'_> {
    /// Some member of the relation agrees with every assigned pair.
    fn compatible(&self, p: &PartialType) -> bool {
        let k = self.args.len();
        self.rel.types.iter().any(|t| {
            (0..k).all(|x| {
                (x + 1..k).all(|y| match p.get(self.args[x], self.args[y]) {
                    Some(v) => t.get(x, y) == v,
                    None => true,
                })
            })
        })
    }
}

fn solve_component(sig: &Signature, inst: &Instance, comp: &[usize]) -> Result<Option<TypeMatrix>> {
    let k = comp.len();
    if k == 1 {
        return Ok(Some(TypeMatrix::all_equal(1)));
    }
    let mut local_of = vec![usize::MAX; inst.variables.len()];
    for (l, &v) in comp.iter().enumerate() {
        local_of[v] = l;
    }
    let mut cons = Vec::new();
    for c in &inst.constraints {
        if local_of[c.args[0]] == usize::MAX {
            continue;
        }
        cons.push(LocalConstraint {
            rel: sig.relation(&c.relation)?,
            args: c.args.iter().map(|&a| local_of[a]).collect(),
        });
    }
    // watch[j][i]: constraints mentioning both i < j.
    let mut watch = vec![vec![Vec::new(); k]; k];
    for (ci, c) in cons.iter().enumerate() {
        let mut vs = c.args.clone();
        vs.sort_unstable();
        vs.dedup();
        for (x, &i) in vs.iter().enumerate() {
            for &j in &vs[x + 1..] {
                watch[j][i].push(ci);
            }
        }
    }
    let order = [PairType::N, PairType::E, PairType::Equal];
    let mut found = None;
    search(
        &sig.base,
        k,
        &order,
        &mut |p, i, j| watch[j][i].iter().all(|&ci| cons[ci].compatible(p)),
        &mut |p| {
            found = Some(p.to_matrix());
            true
        },
    );
    Ok(found)
}

/// Uniformly seeded constraints; variables named `x0, x1, ...`.
pub fn random_instance(sig: &Signature, vars: usize, cons: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = Instance::with_vars(vars);
    if vars == 0 || sig.relations().is_empty() {
        return inst;
    }
    for _ in 0..cons {
        let r = sig.relations().choose(&mut rng).expect("nonempty");
        let args: Vec<usize> = (0..r.arity).map(|_| rng.gen_range(0..vars)).collect();
        inst.push(&r.name, &args);
    }
    inst
}

/// A random nonempty set of valid types of arity `k`, optionally closed
/// under a behaviour.
pub fn random_relation(
    base: &BaseStructure,
    k: usize,
    seed: u64,
    close_under: Option<&Behaviour>,
) -> Result<OrbitRelation> {
    let space = enumerate_types(k, base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density: f64 = rng.gen_range(0.1..0.6);
    let mut picked: Vec<TypeMatrix> = space
        .iter()
        .filter(|_| rng.gen_bool(density))
        .cloned()
        .collect();
    if picked.is_empty() {
        picked.push(
            space
                .choose(&mut rng)
                .expect("type spaces are nonempty")
                .clone(),
        );
    }
    let types = match close_under {
        Some(b) => closure(b, picked, base),
        None => picked.into_iter().collect(),
    };
    OrbitRelation::new(format!("R{seed}"), k, types)
}
