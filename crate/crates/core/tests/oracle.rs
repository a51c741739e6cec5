mod common;

use common::concrete_sat;
use hcsp_core::behaviour::preserves;
use hcsp_core::oracle::{random_instance, random_relation};
use hcsp_core::{
    compile_formula, oracle_solve, BaseStructure, Behaviour, Instance, Signature, Status,
    DEFAULT_ORACLE_CAP,
};

fn sig(base: BaseStructure, formulas: &[(&str, &str, usize)]) -> Signature {
    let rels = formulas
        .iter()
        .map(|(name, f, k)| compile_formula(f, *k, &base).unwrap().renamed(*name))
        .collect();
    Signature::new(base, rels).unwrap()
}

fn triangle(rel: &str) -> Instance {
    let mut inst = Instance::with_vars(3);
    inst.push(rel, &[0, 1])
        .push(rel, &[1, 2])
        .push(rel, &[0, 2]);
    inst
}

fn status(s: &Signature, inst: &Instance) -> Status {
    oracle_solve(s, inst, DEFAULT_ORACLE_CAP).unwrap().status
}

#[test]
fn triangles() {
    let e = [("E", "E(1,2)", 2)];
    assert_eq!(
        status(&sig(BaseStructure::henson(3).unwrap(), &e), &triangle("E")),
        Status::Unsat
    );
    let h4 = sig(BaseStructure::henson(4).unwrap(), &e);
    let o = oracle_solve(&h4, &triangle("E"), DEFAULT_ORACLE_CAP).unwrap();
    assert!(o.is_sat());
    h4.verify_witness(&triangle("E"), o.witness.as_ref().unwrap())
        .unwrap();

    let w2 = sig(
        BaseStructure::omega_two(),
        &[("Eq", "Eq(1,2)", 2), ("neq", "neq(1,2)", 2)],
    );
    let mut inst = triangle("Eq");
    inst.push("neq", &[0, 1])
        .push("neq", &[1, 2])
        .push("neq", &[0, 2]);
    assert_eq!(status(&w2, &inst), Status::Unsat);
}

#[test]
fn generator_examples() {
    let s = sig(
        BaseStructure::henson(3).unwrap(),
        &[("E", "E(1,2)", 2), ("N", "N(1,2)", 2)],
    );
    assert_eq!(random_instance(&s, 5, 7, 1), random_instance(&s, 5, 7, 1));
    let empty = random_instance(&s, 4, 0, 3);
    assert!(empty.constraints.is_empty());
    assert_eq!(status(&s, &empty), Status::Sat);

    let only_e = sig(BaseStructure::henson(3).unwrap(), &[("E", "E(1,2)", 2)]);
    let loop_inst = random_instance(&only_e, 1, 1, 0);
    assert_eq!(loop_inst.constraints[0].args, vec![0, 0]);
    assert_eq!(status(&only_e, &loop_inst), Status::Unsat);

    let h3 = BaseStructure::henson(3).unwrap();
    for seed in 0..20 {
        let r = random_relation(&h3, 3, seed, Some(&Behaviour::min())).unwrap();
        assert!(preserves(&Behaviour::min(), &r));
        assert_eq!(
            r,
            random_relation(&h3, 3, seed, Some(&Behaviour::min())).unwrap()
        );
        let b = random_relation(&h3, 2, seed, None).unwrap();
        assert!(!b.is_empty() && b.len() <= 3);
    }
}

#[test]
fn cap_is_enforced() {
    let s = sig(BaseStructure::henson(3).unwrap(), &[("E", "E(1,2)", 2)]);
    let inst = Instance::with_vars(5);
    assert!(oracle_solve(&s, &inst, 4).is_err());
    assert!(oracle_solve(&s, &inst, 5).is_ok());
}

/// The oracle against brute force over concrete models.
#[test]
fn oracle_matches_concrete_models() {
    let bases = [
        BaseStructure::henson(3).unwrap(),
        BaseStructure::henson(4).unwrap(),
        BaseStructure::omega_two(),
        BaseStructure::two_omega(),
        BaseStructure::equality(),
    ];
    let mut checked = 0;
    for (bi, base) in bases.iter().enumerate() {
        for seed in 0..6u64 {
            let rels = (2..=3)
                .map(|k| {
                    random_relation(base, k, 100 * bi as u64 + 10 * seed + k as u64, None).unwrap()
                })
                .collect();
            let s = Signature::new(*base, rels).unwrap();
            for i in 0..10u64 {
                let inst = random_instance(
                    &s,
                    2 + (i as usize % 4),
                    1 + (i as usize % 5),
                    seed * 31 + i,
                );
                let o = oracle_solve(&s, &inst, DEFAULT_ORACLE_CAP).unwrap();
                assert_eq!(o.is_sat(), concrete_sat(&s, &inst), "{base} {inst:?}");
                if let Some(w) = &o.witness {
                    s.verify_witness(&inst, w).unwrap();
                }
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 300);
}
