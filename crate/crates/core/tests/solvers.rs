use hcsp_core::affine::gf2::{affine_hull, gf2_solve, BitVec, Gf2Result, Gf2System};
use hcsp_core::affine::minority::{injectivize, solve_c2w_minority, Injectivize};
use hcsp_core::affine::parity::{
    compile_parity, compile_parity_signature, solve_cw2_parity, solve_cw2_parity_literal,
    ParityClause, ParityCompile, ParityHead,
};
use hcsp_core::corpus::{self, A_FORMULA, XNOR_PAIRS};
use hcsp_core::horn::{
    compile_horn, compile_signature, final_check, horn_solve, solve_hat, FactState, FinalCheck,
    Head, HornCompile, LitForm,
};
use hcsp_core::oracle::random_instance;
use hcsp_core::{
    compile_formula, oracle_solve, BaseStructure, Instance, Signature, Status, DEFAULT_ORACLE_CAP,
};

fn sig(base: BaseStructure, formulas: &[(&str, &str, usize)]) -> Signature {
    let rels = formulas
        .iter()
        .map(|(name, f, k)| compile_formula(f, *k, &base).unwrap().renamed(*name))
        .collect();
    Signature::new(base, rels).unwrap()
}

fn oracle_status(s: &Signature, inst: &Instance) -> Status {
    oracle_solve(s, inst, DEFAULT_ORACLE_CAP).unwrap().status
}

fn horn(s: &Signature, inst: &Instance) -> Status {
    let c = compile_signature(s).unwrap();
    let o = horn_solve(s, &c, inst).unwrap();
    if let Some(w) = &o.witness {
        s.verify_witness(inst, w).unwrap();
    }
    o.status
}

fn h3() -> BaseStructure {
    BaseStructure::henson(3).unwrap()
}

#[test]
fn horn_compile_examples() {
    let e = compile_formula("E(1,2)", 2, &h3()).unwrap();
    let HornCompile::Exact(cs) = compile_horn(&e, &h3()).unwrap() else {
        panic!("E is min-closed")
    };
    assert_eq!(cs.len(), 1);
    assert!(cs[0].body.is_empty());
    assert_eq!(cs[0].head, Head::E(0, 1));

    let imp = compile_formula("!E(1,2)|E(3,4)", 4, &h3()).unwrap();
    let HornCompile::Exact(cs) = compile_horn(&imp, &h3()).unwrap() else {
        panic!("the implication is min-closed")
    };
    assert!(cs.iter().any(|c| c.head == Head::E(2, 3)
        && c.body.len() == 1
        && c.body[0].pair == (0, 1)
        && c.body[0].form == LitForm::NotE));

    let eq = compile_formula("Eq(1,2)", 2, &h3()).unwrap();
    assert!(matches!(
        compile_horn(&eq, &h3()).unwrap(),
        HornCompile::Inexact { .. }
    ));
}

#[test]
fn horn_solve_examples() {
    let s = sig(
        h3(),
        &[
            ("E", "E(1,2)", 2),
            ("N", "N(1,2)", 2),
            ("R", "!E(1,2)|E(3,4)", 4),
        ],
    );
    let mut both = Instance::with_vars(2);
    both.push("E", &[0, 1]).push("N", &[0, 1]);
    assert_eq!(horn(&s, &both), Status::Unsat);

    let mut tri = Instance::with_vars(3);
    tri.push("E", &[0, 1]).push("E", &[1, 2]).push("E", &[0, 2]);
    assert_eq!(horn(&s, &tri), Status::Unsat);

    let mut rr = Instance::with_vars(2);
    rr.push("R", &[0, 1, 0, 1]);
    assert_eq!(horn(&s, &rr), Status::Sat);
}

#[test]
fn final_check_examples() {
    let mut f = FactState::new(3);
    assert_eq!(final_check(&mut f, &h3()), FinalCheck::Ok);
    f.add_edge(0, 1);
    f.add_edge(1, 2);
    f.add_edge(0, 2);
    assert!(matches!(final_check(&mut f, &h3()), FinalCheck::Unsat(_)));

    // E(x,y), E(x,z) over classes of size two force y = z.
    let mut f = FactState::new(3);
    f.add_edge(0, 1);
    f.add_edge(0, 2);
    let w2 = BaseStructure::omega_two();
    assert_eq!(final_check(&mut f, &w2), FinalCheck::Progress);
    assert_eq!(f.find(1), f.find(2));
}

#[test]
fn matching_conflict_matches_oracle() {
    // E(x,y), E(x,z) and N(y,z): the matching rule merges y and z, which
    // contradicts N.
    let s = sig(
        BaseStructure::omega_two(),
        &[("E", "E(1,2)", 2), ("N", "N(1,2)", 2)],
    );
    let mut inst = Instance::with_vars(3);
    inst.push("E", &[0, 1])
        .push("E", &[0, 2])
        .push("N", &[1, 2]);
    assert_eq!(oracle_status(&s, &inst), Status::Unsat);
    assert_eq!(horn(&s, &inst), Status::Unsat);
}

#[test]
fn hat_examples() {
    let s = sig(
        h3(),
        &[
            ("E", "E(1,2)", 2),
            ("Ehat", "!E(1,2)", 2),
            ("NEQ", "neq(1,2)", 2),
        ],
    );
    type Case<'a> = (&'a [(&'a str, [usize; 2])], Status);
    let cases: [Case; 3] = [
        (&[("E", [0, 1]), ("Ehat", [0, 1])], Status::Unsat),
        (&[("NEQ", [0, 0])], Status::Unsat),
        (
            &[("E", [0, 1]), ("Ehat", [1, 2]), ("NEQ", [0, 2])],
            Status::Sat,
        ),
    ];
    for (cons, want) in cases {
        let mut inst = Instance::with_vars(3);
        for (r, args) in cons {
            inst.push(r, args);
        }
        assert_eq!(oracle_status(&s, &inst), want);
        let o = solve_hat(&s, &inst).unwrap();
        assert_eq!(o.status, want);
        if let Some(w) = &o.witness {
            s.verify_witness(&inst, w).unwrap();
        }
    }
    // Random hat instances, including cliques of forced edges.
    for seed in 0..200 {
        let inst = random_instance(&s, 2 + seed as usize % 5, 1 + seed as usize % 6, seed);
        assert_eq!(
            solve_hat(&s, &inst).unwrap().status,
            oracle_status(&s, &inst),
            "{inst:?}"
        );
    }
}

#[test]
fn gf2_examples() {
    let mut s = Gf2System::new(3);
    s.push_ones(&[0, 1], true);
    s.push_ones(&[1, 2], true);
    s.push_ones(&[0, 2], true);
    let Gf2Result::Inconsistent { certificate } = gf2_solve(&s) else {
        panic!("odd cycle")
    };
    assert!(s.certifies_inconsistency(&certificate));

    let mut s = Gf2System::new(2);
    s.push_ones(&[0, 1], false);
    let Gf2Result::Solution(x) = gf2_solve(&s) else {
        panic!()
    };
    assert_eq!(x[0], x[1]);

    let mut s = Gf2System::new(2);
    s.push_ones(&[0], true);
    s.push_ones(&[0, 1], true);
    assert_eq!(gf2_solve(&s), Gf2Result::Solution(vec![true, false]));

    let bits = |t: &str| BitVec::from_bools(&t.chars().map(|c| c == '1').collect::<Vec<_>>());
    let (sys, exact) = affine_hull(&["000", "011", "101", "110"].map(bits)).unwrap();
    assert!(exact);
    assert_eq!(sys.rows(), &[(bits("111"), false)]);
    let (sys, exact) = affine_hull(&["00", "11"].map(bits)).unwrap();
    assert!(exact);
    assert_eq!(sys.rows(), &[(bits("11"), false)]);
    let (sys, exact) = affine_hull(&["000", "001", "010", "100"].map(bits)).unwrap();
    assert!(!exact);
    assert!(sys.rows().is_empty());
}

fn c2w() -> BaseStructure {
    BaseStructure::two_omega()
}

#[test]
fn injectivize_examples() {
    let s = sig(
        c2w(),
        &[
            ("eq", "eq(1,2)", 2),
            ("N", "N(1,2)", 2),
            ("Eq", "Eq(1,2)", 2),
        ],
    );
    let mut inst = Instance::with_vars(2);
    inst.push("eq", &[0, 1]);
    let Injectivize::Contracted(c) = injectivize(&s, &inst).unwrap() else {
        panic!("consistent")
    };
    assert_eq!(c.class_of[0], c.class_of[1]);
    assert!(c.constraints.is_empty());

    let mut inst = Instance::with_vars(2);
    inst.push("Eq", &[0, 1]);
    let Injectivize::Contracted(c) = injectivize(&s, &inst).unwrap() else {
        panic!("consistent")
    };
    let codes: Vec<String> = c.constraints[0].types.iter().map(|t| t.code()).collect();
    assert_eq!(codes, vec!["E"]);

    let mut inst = Instance::with_vars(2);
    inst.push("N", &[0, 1]).push("eq", &[0, 1]);
    assert!(matches!(
        injectivize(&s, &inst).unwrap(),
        Injectivize::Reject(_)
    ));
}

#[test]
fn minority_examples() {
    let s = sig(
        c2w(),
        &[("E", "E(1,2)", 2), ("N", "N(1,2)", 2), ("X", XNOR_PAIRS, 4)],
    );
    let mut inst = Instance::with_vars(3);
    inst.push("E", &[0, 1])
        .push("E", &[1, 2])
        .push("N", &[0, 2]);
    assert_eq!(solve_c2w_minority(&s, &inst).unwrap().status, Status::Unsat);
    let mut inst = Instance::with_vars(3);
    inst.push("E", &[0, 1])
        .push("E", &[1, 2])
        .push("E", &[0, 2]);
    assert_eq!(solve_c2w_minority(&s, &inst).unwrap().status, Status::Sat);

    // X chained over five variables, with a few anchoring constraints.
    for extra in 0..8 {
        let mut inst = Instance::with_vars(5);
        for i in 0..3 {
            inst.push("X", &[i, i + 1, i + 1, i + 2]);
        }
        if extra & 1 == 1 {
            inst.push("E", &[0, 1]);
        }
        if extra & 2 == 2 {
            inst.push("N", &[3, 4]);
        }
        if extra & 4 == 4 {
            inst.push("N", &[0, 4]);
        }
        let o = solve_c2w_minority(&s, &inst).unwrap();
        assert_eq!(o.status, oracle_status(&s, &inst), "{inst:?}");
        if let Some(w) = &o.witness {
            s.verify_witness(&inst, w).unwrap();
        }
    }
}

#[test]
fn parity_compile_examples() {
    let w2 = BaseStructure::omega_two();
    let neq = compile_formula("neq(1,2)", 2, &w2).unwrap();
    let ParityCompile::Exact(cs) = compile_parity(&neq, &w2).unwrap() else {
        panic!("neq is H3-closed")
    };
    assert!(cs.contains(&ParityClause {
        body: vec![(0, 1)],
        head: ParityHead::Parity {
            pairs: vec![(0, 1)],
            odd: true
        }
    }));

    let eq = compile_formula("Eq(1,2)", 2, &w2).unwrap();
    let ParityCompile::Exact(cs) = compile_parity(&eq, &w2).unwrap() else {
        panic!("Eq is H3-closed")
    };
    assert!(cs.contains(&ParityClause {
        body: vec![],
        head: ParityHead::Eq(0, 1)
    }));

    let a = compile_formula(A_FORMULA, 6, &w2).unwrap();
    let ParityCompile::Exact(cs) = compile_parity(&a, &w2).unwrap() else {
        panic!("A is H3-closed")
    };
    let space = hcsp_core::enumerate_types(6, &w2).unwrap();
    for t in space.iter() {
        assert_eq!(cs.iter().all(|c| c.holds(t)), a.contains(t), "{t}");
    }
}

#[test]
fn parity_examples() {
    let s = corpus::signature("omega2-parity").unwrap();
    let c = compile_parity_signature(&s).unwrap();
    let solve = |inst: &Instance| {
        let o = solve_cw2_parity(&s, &c, inst).unwrap();
        if let Some(w) = &o.witness {
            s.verify_witness(inst, w).unwrap();
        }
        assert_eq!(
            solve_cw2_parity_literal(&s, &c, inst).unwrap().status,
            o.status
        );
        o.status
    };

    let mut single = Instance::with_vars(6);
    single.push("A", &[0, 1, 2, 3, 4, 5]);
    assert_eq!(solve(&single), Status::Sat);

    let mut tri = Instance::with_vars(3);
    tri.push("Eq", &[0, 1])
        .push("Eq", &[1, 2])
        .push("Eq", &[0, 2]);
    tri.push("neq", &[0, 1])
        .push("neq", &[1, 2])
        .push("neq", &[0, 2]);
    assert_eq!(solve(&tri), Status::Unsat);

    // Each guarded pair is a repeated variable: zero distinct pairs, not odd.
    let mut forced = Instance::with_vars(3);
    forced.push("A", &[0, 0, 1, 1, 2, 2]);
    assert_eq!(oracle_status(&s, &forced), Status::Unsat);
    assert_eq!(solve(&forced), Status::Unsat);
    let mut forced = Instance::with_vars(6);
    for i in 0..3 {
        forced.push("Eq", &[2 * i, 2 * i + 1]);
    }
    forced.push("A", &[0, 0, 2, 2, 4, 4]);
    assert_eq!(oracle_status(&s, &forced), Status::Unsat);
    assert_eq!(solve(&forced), Status::Unsat);

    for seed in 0..150 {
        let inst = random_instance(&s, 2 + seed as usize % 6, 1 + seed as usize % 6, seed);
        assert_eq!(solve(&inst), oracle_status(&s, &inst), "{inst:?}");
    }
}

#[test]
fn equality_horn_matches_oracle() {
    let eqb = BaseStructure::equality();
    let s = sig(
        eqb,
        &[
            ("neq", "neq(1,2)", 2),
            ("R", "!eq(1,2)|eq(3,4)", 4),
            ("eq", "eq(1,2)", 2),
        ],
    );
    for seed in 0..150 {
        let inst = random_instance(&s, 2 + seed as usize % 5, 1 + seed as usize % 5, seed);
        assert_eq!(horn(&s, &inst), oracle_status(&s, &inst), "{inst:?}");
    }
}
