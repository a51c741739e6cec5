use hcsp_core::behaviour::{
    apply_behaviour, behaviour_catalog, closure, preserves, realizable, Applied,
};
use hcsp_core::classify::applies;
use hcsp_core::gadgets::relation_h;
use hcsp_core::{
    compile_formula, enumerate_types, BaseStructure, Behaviour, Card, PairType, TypeMatrix,
};

use PairType::{Equal, E, N};

#[test]
fn table_rows() {
    assert_eq!(Behaviour::xnor3().eval(&[Equal, E, E]), E);
    assert_eq!(Behaviour::min().eval(&[E, N]), N);
    assert_eq!(Behaviour::h3().eval(&[E, E, Equal]), Equal);
}

#[test]
fn min_never_builds_a_triangle() {
    let h3 = BaseStructure::henson(3).unwrap();
    let space = enumerate_types(3, &h3).unwrap();
    for a in space.iter() {
        for b in space.iter() {
            let out = apply_behaviour(&Behaviour::min(), &[a, b], &h3).unwrap();
            assert!(matches!(out, Applied::Valid(_)), "{a} {b}");
        }
    }
    let e = TypeMatrix::from_code(2, "E").unwrap();
    let n = TypeMatrix::from_code(2, "N").unwrap();
    assert_eq!(
        apply_behaviour(&Behaviour::min(), &[&e, &n], &h3).unwrap(),
        Applied::Valid(n.clone())
    );
    let path = TypeMatrix::from_code(3, "EEN").unwrap();
    assert_eq!(
        apply_behaviour(&Behaviour::edgedel(), &[&path], &h3).unwrap(),
        Applied::Valid(TypeMatrix::filled(3, N))
    );
}

#[test]
fn preservation_examples() {
    let h3 = BaseStructure::henson(3).unwrap();
    let min = Behaviour::min();
    assert!(preserves(&min, &compile_formula("E(1,2)", 2, &h3).unwrap()));
    assert!(!preserves(&min, &relation_h(3).unwrap()));
    assert!(preserves(
        &min,
        &compile_formula("!E(1,2)|E(3,4)", 4, &h3).unwrap()
    ));
}

#[test]
fn realizability_examples() {
    let h3 = BaseStructure::henson(3).unwrap();
    assert!(!realizable(&Behaviour::majority(), &h3));
    assert!(realizable(&Behaviour::min(), &h3));
    assert!(!realizable(
        &Behaviour::cliquecol(),
        &BaseStructure::omega_two()
    ));
}

/// The analytic rules used by the classifier against the sweep, on bases
/// small enough to sweep.
#[test]
fn applies_agrees_with_the_sweep() {
    let bases = [
        BaseStructure::henson(3).unwrap(),
        BaseStructure::henson(4).unwrap(),
        BaseStructure::omega_two(),
        BaseStructure::two_omega(),
        BaseStructure::equiv(Card::Omega, Card::Finite(3)).unwrap(),
        BaseStructure::equiv(Card::Finite(3), Card::Omega).unwrap(),
        BaseStructure::equality(),
    ];
    for base in bases {
        for b in behaviour_catalog(&base) {
            assert_eq!(
                applies(&b, &base),
                realizable(&b, &base),
                "{} over {base}",
                b.name()
            );
        }
    }
}

#[test]
fn closure_is_closed_and_contains_input() {
    let h4 = BaseStructure::henson(4).unwrap();
    let space = enumerate_types(3, &h4).unwrap();
    let seed: Vec<TypeMatrix> = space.iter().step_by(7).cloned().collect();
    let c = closure(&Behaviour::min(), seed.clone(), &h4);
    assert!(seed.iter().all(|t| c.contains(t)));
    let r = hcsp_core::OrbitRelation::new("C", 3, c).unwrap();
    assert!(preserves(&Behaviour::min(), &r));
}

#[test]
fn permutation_commutes_with_application() {
    let h4 = BaseStructure::henson(4).unwrap();
    let space = enumerate_types(4, &h4).unwrap();
    let perm = [2, 0, 3, 1];
    for b in [Behaviour::min(), Behaviour::p1(), Behaviour::majority()] {
        for (i, x) in space.iter().enumerate().step_by(5) {
            let y = &space[(i * 13 + 1) % space.len()];
            let z = &space[(i * 29 + 3) % space.len()];
            let args: Vec<&TypeMatrix> = [x, y, z][..b.arity()].to_vec();
            let permuted: Vec<TypeMatrix> = args.iter().map(|t| t.permute(&perm)).collect();
            let permuted: Vec<&TypeMatrix> = permuted.iter().collect();
            let lhs = hcsp_core::behaviour::apply_raw(&b, &args)
                .unwrap()
                .permute(&perm);
            let rhs = hcsp_core::behaviour::apply_raw(&b, &permuted).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
