#![allow(dead_code)]
// Shared by several test targets: types read off concrete finite
// structures, independent of the library's validity rules.

use std::collections::BTreeSet;

use hcsp_core::{BaseStructure, Card};

/// Restricted growth strings of length `k`: every set partition once.
pub fn partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let next = cur.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            cur.push(b);
            go(k, cur, out);
            cur.pop();
        }
    }
    go(k, &mut cur, &mut out);
    out
}

fn has_clique(m: usize, adj: &[Vec<bool>], size: usize) -> bool {
    fn grow(adj: &[Vec<bool>], chosen: &mut Vec<usize>, from: usize, size: usize) -> bool {
        if chosen.len() == size {
            return true;
        }
        for v in from..adj.len() {
            if chosen.iter().all(|&u| adj[u][v]) {
                chosen.push(v);
                if grow(adj, chosen, v + 1, size) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    size <= m && grow(adj, &mut Vec::new(), 0, size)
}

/// Codes of all k-tuples of a concrete model: place the distinct elements
/// as `m` points of a graph and read off the pair relations.
pub fn concrete_types(k: usize, base: &BaseStructure) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for part in partitions(k) {
        let m = part.iter().max().map_or(0, |x| x + 1);
        let point_pairs: Vec<(usize, usize)> = (0..m)
            .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
            .collect();
        let mut graphs: Vec<Vec<Vec<bool>>> = Vec::new();
        match *base {
            BaseStructure::Henson { n } => {
                for bits in 0u64..1 << point_pairs.len() {
                    let mut adj = vec![vec![false; m]; m];
                    for (q, &(a, b)) in point_pairs.iter().enumerate() {
                        let e = bits >> q & 1 == 1;
                        adj[a][b] = e;
                        adj[b][a] = e;
                    }
                    if !has_clique(m, &adj, n as usize) {
                        graphs.push(adj);
                    }
                }
            }
            BaseStructure::Equiv { n, s } => {
                for classes in partitions(m) {
                    let count = classes.iter().max().map_or(0, |x| x + 1);
                    let fits =
                        |bound: Card, v: usize| bound.finite().is_none_or(|b| v <= b as usize);
                    let biggest = (0..count)
                        .map(|c| classes.iter().filter(|&&x| x == c).count())
                        .max()
                        .unwrap_or(0);
                    if fits(n, count) && fits(s, biggest) {
                        graphs.push(
                            (0..m)
                                .map(|a| {
                                    (0..m).map(|b| a != b && classes[a] == classes[b]).collect()
                                })
                                .collect(),
                        );
                    }
                }
            }
            BaseStructure::Equality => graphs.push(vec![vec![false; m]; m]),
        }
        for adj in graphs {
            let mut code = String::new();
            for i in 0..k {
                for j in i + 1..k {
                    code.push(if part[i] == part[j] {
                        '='
                    } else if adj[part[i]][part[j]] {
                        'E'
                    } else {
                        'N'
                    });
                }
            }
            out.insert(code);
        }
    }
    out
}

/// Brute force over the concrete types of the instance's whole variable tuple.
pub fn concrete_sat(sig: &hcsp_core::Signature, inst: &hcsp_core::Instance) -> bool {
    let n = inst.variables.len();
    concrete_types(n, &sig.base).iter().any(|code| {
        let t = hcsp_core::TypeMatrix::from_code(n, code).unwrap();
        inst.constraints.iter().all(|c| {
            sig.relation(&c.relation)
                .unwrap()
                .contains(&t.restrict(&c.args))
        })
    })
}
