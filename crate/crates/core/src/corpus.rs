//! Bundled relations and signatures used by the self-test and examples.

use crate::error::{Error, Result};
use crate::gadgets::{h_formula, relation_h};
use crate::model::{compile_formula, BaseStructure, Card, OrbitRelation, Signature};

/// `A`: if all three pairs are `Eq`, an odd number of them are distinct.
pub const A_FORMULA: &str = "!(Eq(1,2)&Eq(3,4)&Eq(5,6)) \
    | (neq(1,2)&eq(3,4)&eq(5,6)) | (eq(1,2)&neq(3,4)&eq(5,6)) \
    | (eq(1,2)&eq(3,4)&neq(5,6)) | (neq(1,2)&neq(3,4)&neq(5,6))";

/// `E(x,y) => E(u,v)`.
pub const IMPLICATION: &str = "!E(1,2)|E(3,4)";
pub const EDGE_OR_EDGE: &str = "E(1,2)|E(3,4)";
/// Exactly one of two pairs is equal.
pub const XOR_PATTERN: &str = "(eq(1,2)&neq(3,4))|(neq(1,2)&eq(3,4))";
/// Both pairs edges or both non-edges.
pub const XNOR_PAIRS: &str = "(E(1,2)&E(3,4))|(N(1,2)&N(3,4))";

/// Formulas compiled over every small base for the compiler checks.
pub const SMALL_FORMULAS: &[(&str, usize)] = &[
    ("true", 2),
    ("E(1,2)", 2),
    ("N(1,2)", 2),
    ("eq(1,2)", 2),
    ("neq(1,2)", 2),
    ("Eq(1,2)", 2),
    ("N(1,2)|eq(1,2)", 2),
    ("E(1,2)&E(2,3)", 3),
    ("!E(1,2)|E(2,3)", 3),
    ("neq(1,2)&neq(2,3)&neq(1,3)", 3),
    ("N(1,2)|N(2,3)", 3),
    ("eq(1,2)|E(2,3)", 3),
    ("!Eq(1,2)|Eq(2,3)", 3),
    (IMPLICATION, 4),
    (EDGE_OR_EDGE, 4),
    (XOR_PATTERN, 4),
    (XNOR_PAIRS, 4),
    ("!E(1,2)|eq(3,4)", 4),
    ("!eq(1,2)|eq(3,4)", 4),
    ("(Eq(1,2)&Eq(3,4))|(N(1,2)&N(3,4))", 4),
];

pub fn small_bases() -> Vec<BaseStructure> {
    vec![
        BaseStructure::henson(3).expect("valid"),
        BaseStructure::henson(4).expect("valid"),
        BaseStructure::omega_two(),
        BaseStructure::two_omega(),
        BaseStructure::equality(),
    ]
}

fn rel(base: &BaseStructure, name: &str, text: &str, k: usize) -> Result<OrbitRelation> {
    Ok(compile_formula(text, k, base)?.renamed(name))
}

/// Every bundled relation with its base: the small formulas over each
/// small base, `H` over Henson bases and `A` over classes of size two.
pub fn corpus() -> Vec<(BaseStructure, OrbitRelation)> {
    let mut out = Vec::new();
    for base in small_bases() {
        for (text, k) in SMALL_FORMULAS {
            let r = compile_formula(text, *k, &base).expect("bundled formula compiles");
            out.push((base, r));
        }
    }
    for n in [3, 4] {
        out.push((
            BaseStructure::henson(n).expect("valid"),
            relation_h(n).expect("valid"),
        ));
    }
    let w2 = BaseStructure::omega_two();
    out.push((
        w2,
        rel(&w2, "A", A_FORMULA, 6).expect("bundled formula compiles"),
    ));
    out
}

pub const SIGNATURE_NAMES: &[&str] = &[
    "henson3-E-N-H",
    "henson4-E-N-H",
    "henson3-E-implication",
    "henson4-E-implication",
    "henson3-edge-or-edge",
    "henson4-edge-or-edge",
    "henson3-equal",
    "henson3-horn",
    "omega2-Eq-A",
    "omega2-parity",
    "two-omega-xnor",
    "equality-xor",
    "equality-neq",
];

/// A bundled signature by name (see [`SIGNATURE_NAMES`]).
pub fn signature(name: &str) -> Result<Signature> {
    let h = |n| BaseStructure::henson(n).expect("valid");
    let (base, rels) = match name {
        "henson3-E-N-H" | "henson4-E-N-H" => {
            let base = h(if name.starts_with("henson3") { 3 } else { 4 });
            let n = if name.starts_with("henson3") { 3 } else { 4 };
            let mut hr = relation_h(n)?;
            debug_assert_eq!(hr.types, compile_formula(&h_formula(), 6, &base)?.types);
            hr.name = "H".into();
            (
                base,
                vec![
                    rel(&base, "E", "E(1,2)", 2)?,
                    rel(&base, "N", "N(1,2)", 2)?,
                    hr,
                ],
            )
        }
        "henson3-E-implication" | "henson4-E-implication" => {
            let base = h(if name.starts_with("henson3") { 3 } else { 4 });
            (
                base,
                vec![
                    rel(&base, "E", "E(1,2)", 2)?,
                    rel(&base, "R", IMPLICATION, 4)?,
                ],
            )
        }
        "henson3-edge-or-edge" | "henson4-edge-or-edge" => {
            let base = h(if name.starts_with("henson3") { 3 } else { 4 });
            (base, vec![rel(&base, "R", EDGE_OR_EDGE, 4)?])
        }
        "henson3-equal" => {
            let base = h(3);
            (base, vec![rel(&base, "eq", "eq(1,2)", 2)?])
        }
        "henson3-horn" => {
            let base = h(3);
            (
                base,
                vec![
                    rel(&base, "E", "E(1,2)", 2)?,
                    rel(&base, "N", "N(1,2)", 2)?,
                    rel(&base, "neq", "neq(1,2)", 2)?,
                    rel(&base, "R", IMPLICATION, 4)?,
                ],
            )
        }
        "omega2-Eq-A" => {
            let base = BaseStructure::omega_two();
            (
                base,
                vec![
                    rel(&base, "Eq", "Eq(1,2)", 2)?,
                    rel(&base, "A", A_FORMULA, 6)?,
                ],
            )
        }
        "omega2-parity" => {
            let base = BaseStructure::omega_two();
            (
                base,
                vec![
                    rel(&base, "Eq", "Eq(1,2)", 2)?,
                    rel(&base, "neq", "neq(1,2)", 2)?,
                    rel(&base, "A", A_FORMULA, 6)?,
                ],
            )
        }
        "two-omega-xnor" => {
            let base = BaseStructure::equiv(Card::Finite(2), Card::Omega)?;
            (
                base,
                vec![
                    rel(&base, "E", "E(1,2)", 2)?,
                    rel(&base, "N", "N(1,2)", 2)?,
                    rel(&base, "eq", "eq(1,2)", 2)?,
                    rel(&base, "X", XNOR_PAIRS, 4)?,
                ],
            )
        }
        "equality-xor" => {
            let base = BaseStructure::equality();
            (base, vec![rel(&base, "X", XOR_PATTERN, 4)?])
        }
        "equality-neq" => {
            let base = BaseStructure::equality();
            (base, vec![rel(&base, "neq", "neq(1,2)", 2)?])
        }
        other => {
            return Err(Error::UnknownRelation(format!(
                "no bundled signature `{other}`"
            )))
        }
    };
    Signature::new(base, rels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_signature_builds() {
        for name in SIGNATURE_NAMES {
            signature(name).unwrap();
        }
        assert!(signature("nope").is_err());
    }
}
