use hcsp_core::behaviour::Behaviour;
use hcsp_core::classify::{collapse_equality, VerdictWitness};
use hcsp_core::corpus::{self, SIGNATURE_NAMES};
use hcsp_core::oracle::random_instance;
use hcsp_core::{
    classify, classify_with, compile_formula, oracle_solve, BaseStructure, Card, ClassifyOptions,
    Prepared, Signature, SolverId, VerdictOutcome, DEFAULT_ORACLE_CAP,
};

fn sig(base: BaseStructure, formulas: &[(&str, &str, usize)]) -> Signature {
    let rels = formulas
        .iter()
        .map(|(name, f, k)| compile_formula(f, *k, &base).unwrap().renamed(*name))
        .collect();
    Signature::new(base, rels).unwrap()
}

fn outcome(name: &str) -> VerdictOutcome {
    classify(&corpus::signature(name).unwrap()).unwrap().outcome
}

#[test]
fn catalog_verdicts() {
    for n in [3, 4] {
        assert_eq!(outcome(&format!("henson{n}-E-N-H")), VerdictOutcome::Npc);
        assert_eq!(
            outcome(&format!("henson{n}-E-implication")),
            VerdictOutcome::P
        );
        assert_eq!(
            outcome(&format!("henson{n}-edge-or-edge")),
            VerdictOutcome::Npc
        );
    }
    assert_eq!(outcome("omega2-Eq-A"), VerdictOutcome::P);
    assert_eq!(outcome("henson3-equal"), VerdictOutcome::P);
    assert_eq!(outcome("equality-xor"), VerdictOutcome::Npc);

    let v = classify(&corpus::signature("omega2-Eq-A").unwrap()).unwrap();
    assert_eq!(v.plan(), Some((SolverId::Parity, None)));
    let v = classify(&corpus::signature("henson3-E-implication").unwrap()).unwrap();
    assert_eq!(v.plan(), Some((SolverId::Horn, None)));
}

#[test]
fn equality_verdicts() {
    let eqb = BaseStructure::equality();
    let v = classify(&sig(eqb, &[("neq", "neq(1,2)", 2)])).unwrap();
    assert_eq!(v.plan(), Some((SolverId::HornEquality, None)));
    let v = classify(&sig(eqb, &[("eq", "eq(1,2)", 2)])).unwrap();
    assert_eq!(v.plan(), Some((SolverId::Constant, None)));
}

#[test]
fn collapse_examples() {
    let h3 = BaseStructure::henson(3).unwrap();
    let s = sig(h3, &[("neq", "neq(1,2)", 2), ("full", "true", 2)]);
    let c = collapse_equality(&s, &Behaviour::edgedel()).unwrap();
    assert_eq!(c.relation("neq").unwrap().codes(), vec!["N"]);
    assert_eq!(c.relation("full").unwrap().codes(), vec!["N", "="]);
    assert!(collapse_equality(&sig(h3, &[("Eq", "Eq(1,2)", 2)]), &Behaviour::edgedel()).is_err());
}

/// Same class, different class from a third element: the class quotient
/// maps it onto an equality structure.
#[test]
fn quotient_collapse_with_infinitely_many_classes() {
    for s in [Card::Finite(2), Card::Finite(3)] {
        let base = BaseStructure::equiv(Card::Omega, s).unwrap();
        let g = sig(
            base,
            &[
                ("R", "Eq(1,2)&N(1,3)", 3),
                ("S", "Eq(1,2)&Eq(3,4)&N(1,3)&(eq(1,2)|eq(3,4))", 4),
            ],
        );
        let v = classify(&g).unwrap();
        assert_eq!(v.outcome, VerdictOutcome::P, "{base}");
        let VerdictWitness::Solver { collapse, .. } = &v.witness else {
            panic!()
        };
        assert_eq!(collapse.as_deref(), Some("B_quotient"));
        let prepared = Prepared::from_verdict(&g, &v, DEFAULT_ORACLE_CAP).unwrap();
        for seed in 0..100 {
            let inst = random_instance(&g, 2 + seed as usize % 5, 1 + seed as usize % 4, seed);
            let got = prepared.solve(&inst).unwrap().outcome;
            let want = oracle_solve(&g, &inst, DEFAULT_ORACLE_CAP).unwrap();
            assert_eq!(got.status, want.status, "{base} {inst:?}");
        }
    }
    let finite = BaseStructure::two_omega();
    let g = sig(
        finite,
        &[("S", "Eq(1,2)&Eq(3,4)&N(1,3)&(eq(1,2)|eq(3,4))", 4)],
    );
    let v = classify(&g).unwrap();
    assert_eq!(v.outcome, VerdictOutcome::Delegated, "{v:?}");
}

#[test]
fn deep_mode_only_adds_options() {
    for name in SIGNATURE_NAMES {
        let s = corpus::signature(name).unwrap();
        let plain = classify(&s).unwrap();
        let deep = classify_with(&s, ClassifyOptions { deep: true }).unwrap();
        if plain.outcome != VerdictOutcome::Npc {
            assert_eq!(plain.outcome, deep.outcome, "{name}");
        }
    }
}

/// Every P verdict is executable: its solver agrees with the oracle.
#[test]
fn p_verdicts_are_executable() {
    let mut checked = 0;
    for (i, name) in SIGNATURE_NAMES.iter().enumerate() {
        let s = corpus::signature(name).unwrap();
        let v = classify(&s).unwrap();
        if v.outcome != VerdictOutcome::P {
            continue;
        }
        let prepared = Prepared::from_verdict(&s, &v, DEFAULT_ORACLE_CAP).unwrap();
        for seed in 0..200u64 {
            let inst = random_instance(
                &s,
                2 + seed as usize % 5,
                1 + seed as usize % 5,
                seed * 17 + i as u64,
            );
            let got = prepared.solve(&inst).unwrap();
            let want = oracle_solve(&s, &inst, DEFAULT_ORACLE_CAP).unwrap();
            assert_eq!(got.outcome.status, want.status, "{name}: {inst:?}");
            checked += 1;
        }
    }
    assert!(checked >= 1000);
}
