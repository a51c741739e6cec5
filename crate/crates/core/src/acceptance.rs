//! The numbered self-test suite. Each criterion reports one line with its
//! measured value, the required value and the time budget.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::gf2::{affine_hull, gf2_solve, BitVec, Gf2Result, Gf2System};
use crate::affine::minority::solve_c2w_minority;
use crate::affine::parity::{
    compile_parity, compile_parity_signature, solve_cw2_parity, solve_cw2_parity_literal,
    ParityCompile,
};
use crate::behaviour::{preserves, realizable, Behaviour};
use crate::classify::{classify, VerdictOutcome};
use crate::corpus::{self, corpus};
use crate::error::Result;
use crate::gadgets::{all_small_formulas, reduce_1in3};
use crate::horn::{compile_horn, compile_signature, horn_solve, HornCompile};
use crate::model::{compile_formula, BaseStructure, Instance, OrbitRelation, Outcome, Signature};
use crate::oracle::{oracle_solve, random_instance, random_relation, DEFAULT_ORACLE_CAP};

#[derive(Clone, Debug)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Measured values against the pinned requirement.
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}. {}: {} ({:.2} s, budget {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

fn finish(
    id: u32,
    name: &'static str,
    ok: bool,
    detail: String,
    start: Instant,
    budget_s: u64,
) -> Criterion {
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    Criterion {
        id,
        name,
        passed: ok && elapsed <= budget,
        detail,
        elapsed,
        budget,
    }
}

/// Agreement of one solver with the oracle over a batch of instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Agreement {
    pub instances: usize,
    pub agree: usize,
    pub sat: usize,
    pub errors: usize,
    /// SAT answers whose witness was re-verified, from either side.
    pub witnesses: usize,
    pub bad_witnesses: usize,
}

impl Agreement {
    pub fn perfect(&self) -> bool {
        self.agree == self.instances && self.errors == 0 && self.bad_witnesses == 0
    }

    fn absorb(&mut self, o: &Agreement) {
        self.instances += o.instances;
        self.agree += o.agree;
        self.sat += o.sat;
        self.errors += o.errors;
        self.witnesses += o.witnesses;
        self.bad_witnesses += o.bad_witnesses;
    }

    fn witness(&mut self, sig: &Signature, inst: &Instance, o: &Outcome) {
        if let Some(w) = &o.witness {
            self.witnesses += 1;
            if sig.verify_witness(inst, w).is_err() {
                self.bad_witnesses += 1;
            }
        }
    }

    /// Compare `solver` against the oracle on `inst`.
    pub fn record(
        &mut self,
        sig: &Signature,
        inst: &Instance,
        solver: impl FnOnce(&Instance) -> Result<Outcome>,
    ) {
        self.instances += 1;
        let (want, got) = match (oracle_solve(sig, inst, DEFAULT_ORACLE_CAP), solver(inst)) {
            (Ok(w), Ok(g)) => (w, g),
            _ => {
                self.errors += 1;
                return;
            }
        };
        self.witness(sig, inst, &want);
        self.witness(sig, inst, &got);
        if want.status == got.status {
            self.agree += 1;
        }
        if want.is_sat() {
            self.sat += 1;
        }
    }

    /// A decided instance whose expected status is known without the oracle.
    fn record_expected(&mut self, sig: &Signature, inst: &Instance, expected_sat: bool) {
        self.instances += 1;
        match oracle_solve(sig, inst, DEFAULT_ORACLE_CAP) {
            Ok(o) => {
                self.witness(sig, inst, &o);
                if o.is_sat() == expected_sat {
                    self.agree += 1;
                }
                if o.is_sat() {
                    self.sat += 1;
                }
            }
            Err(_) => self.errors += 1,
        }
    }
}

impl fmt::Display for Agreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} agree ({} sat, {} unsat), {} errors",
            self.agree,
            self.instances,
            self.sat,
            self.instances - self.sat,
            self.errors
        )
    }
}

fn rel(base: &BaseStructure, name: &str, text: &str, k: usize) -> OrbitRelation {
    compile_formula(text, k, base)
        .expect("bundled formula compiles")
        .renamed(name)
}

/// Random relations of arity 2..=4 closed under `b`, plus `fixed`.
fn closed_signature(
    base: &BaseStructure,
    b: &Behaviour,
    seed: u64,
    fixed: &[OrbitRelation],
) -> Signature {
    let mut rels: Vec<OrbitRelation> = fixed.to_vec();
    for k in 2..=4 {
        let s = seed * 8 + k as u64;
        rels.push(random_relation(base, k, s, Some(b)).expect("small arity"));
    }
    Signature::new(*base, rels).expect("distinct names")
}

/// Seeded instances with 2..=6 variables and 1..=5 constraints.
fn instances(sig: &Signature, count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let vars = rng.gen_range(2..=6);
            let cons = rng.gen_range(1..=5);
            random_instance(sig, vars, cons, rng.gen())
        })
        .collect()
}

pub fn catalog() -> Criterion {
    let start = Instant::now();
    let cases: [(&str, &[&str], VerdictOutcome); 6] = [
        (
            "E,N,H",
            &["henson3-E-N-H", "henson4-E-N-H"],
            VerdictOutcome::Npc,
        ),
        (
            "E, E=>E",
            &["henson3-E-implication", "henson4-E-implication"],
            VerdictOutcome::P,
        ),
        (
            "E|E",
            &["henson3-edge-or-edge", "henson4-edge-or-edge"],
            VerdictOutcome::Npc,
        ),
        ("Eq,A", &["omega2-Eq-A"], VerdictOutcome::P),
        ("x=y", &["henson3-equal"], VerdictOutcome::P),
        ("equality XOR", &["equality-xor"], VerdictOutcome::Npc),
    ];
    let mut hits = 0;
    let mut misses = Vec::new();
    for (label, sigs, want) in cases {
        let ok = sigs.iter().all(|name| {
            corpus::signature(name)
                .and_then(|s| classify(&s))
                .map(|v| v.outcome == want)
                .unwrap_or(false)
        });
        if ok {
            hits += 1;
        } else {
            misses.push(label);
        }
    }
    let mut detail = format!("{hits}/6 verdicts match (required 6/6)");
    if !misses.is_empty() {
        detail += &format!("; wrong: {}", misses.join(", "));
    }
    finish(1, "classifier catalog", hits == 6, detail, start, 10)
}

pub fn horn_stats() -> (Agreement, Vec<String>) {
    let min = Behaviour::min();
    let mut stats = Agreement::default();
    let mut problems = Vec::new();
    let bases = [
        BaseStructure::henson(3).expect("valid"),
        BaseStructure::henson(4).expect("valid"),
        BaseStructure::omega_two(),
    ];
    for (bi, base) in bases.iter().enumerate() {
        let fixed = [
            rel(base, "E", "E(1,2)", 2),
            rel(base, "N", "N(1,2)", 2),
            rel(base, "neq", "neq(1,2)", 2),
            rel(base, "eq", "eq(1,2)", 2),
        ];
        for s in 0..12u64 {
            let seed = 1000 * bi as u64 + s;
            let sig = closed_signature(base, &min, seed, &fixed);
            if let Some(r) = sig.relations().iter().find(|r| !preserves(&min, r)) {
                problems.push(format!("{} over {base} not closed", r.name));
            }
            let compiled = match compile_signature(&sig) {
                Ok(c) => c,
                Err(e) => {
                    problems.push(format!("compile over {base}: {e}"));
                    continue;
                }
            };
            for inst in instances(&sig, 15, seed) {
                stats.record(&sig, &inst, |i| horn_solve(&sig, &compiled, i));
            }
        }
    }
    (stats, problems)
}

pub fn horn_equivalence() -> Criterion {
    let start = Instant::now();
    let (stats, problems) = horn_stats();
    let ok = stats.perfect() && stats.instances >= 500 && problems.is_empty();
    let mut detail = format!("{stats} (required >=500 instances, 100% agreement)");
    if !problems.is_empty() {
        detail += &format!("; {}", problems.join("; "));
    }
    finish(2, "Horn solver vs oracle", ok, detail, start, 60)
}

/// Minority and parity agreement, in that order.
pub fn affine_stats() -> (Agreement, Agreement, Vec<String>) {
    let mut problems = Vec::new();

    let xnor3 = Behaviour::xnor3();
    let c2w = BaseStructure::two_omega();
    let fixed = [
        rel(&c2w, "E", "E(1,2)", 2),
        rel(&c2w, "N", "N(1,2)", 2),
        rel(&c2w, "eq", "eq(1,2)", 2),
        rel(&c2w, "X", corpus::XNOR_PAIRS, 4),
    ];
    let mut minority = Agreement::default();
    for seed in 0..25u64 {
        let sig = closed_signature(&c2w, &xnor3, 5000 + seed, &fixed);
        if let Some(r) = sig.relations().iter().find(|r| !preserves(&xnor3, r)) {
            problems.push(format!("{} over {c2w} not closed", r.name));
        }
        for inst in instances(&sig, 21, 5000 + seed) {
            minority.record(&sig, &inst, |i| solve_c2w_minority(&sig, i));
        }
    }

    let h3 = Behaviour::h3();
    let w2 = BaseStructure::omega_two();
    let fixed = [
        rel(&w2, "Eq", "Eq(1,2)", 2),
        rel(&w2, "neq", "neq(1,2)", 2),
        rel(&w2, "A", corpus::A_FORMULA, 6),
    ];
    let mut parity = Agreement::default();
    let mut literal_mismatch = 0;
    for seed in 0..25u64 {
        let sig = closed_signature(&w2, &h3, 7000 + seed, &fixed);
        if let Some(r) = sig.relations().iter().find(|r| !preserves(&h3, r)) {
            problems.push(format!("{} over {w2} not closed", r.name));
        }
        let compiled = match compile_parity_signature(&sig) {
            Ok(c) => c,
            Err(e) => {
                problems.push(format!("parity compile: {e}"));
                continue;
            }
        };
        for inst in instances(&sig, 21, 7000 + seed) {
            let mut status = None;
            parity.record(&sig, &inst, |i| {
                let o = solve_cw2_parity(&sig, &compiled, i)?;
                status = Some(o.status);
                Ok(o)
            });
            let literal = solve_cw2_parity_literal(&sig, &compiled, &inst).map(|o| o.status);
            if status.is_some() && literal.ok() != status {
                literal_mismatch += 1;
            }
        }
    }
    if literal_mismatch > 0 {
        problems.push(format!(
            "{literal_mismatch} parity answers differ from the pair-variable system"
        ));
    }
    (minority, parity, problems)
}

pub fn affine_equivalence() -> Criterion {
    let start = Instant::now();
    let (minority, parity, problems) = affine_stats();
    let ok = minority.perfect()
        && parity.perfect()
        && minority.instances >= 500
        && parity.instances >= 500
        && problems.is_empty();
    let mut detail =
        format!("minority {minority}; parity {parity} (required >=500 each, 100% agreement)");
    if !problems.is_empty() {
        detail += &format!("; {}", problems.join("; "));
    }
    finish(3, "affine solvers vs oracle", ok, detail, start, 120)
}

pub fn gadget_stats() -> Agreement {
    let sig = corpus::signature("henson3-E-N-H").expect("bundled");
    let mut stats = Agreement::default();
    for f in all_small_formulas(4, 3) {
        stats.record_expected(&sig, &reduce_1in3(&f), f.brute_force());
    }
    stats
}

/// Every formula with at most three clauses on four variables is
/// satisfiable, so the gadget is also run on four-clause formulas (some
/// unsatisfiable) over both clique bounds.
pub fn gadget_extra_stats() -> Agreement {
    let mut stats = Agreement::default();
    for name in ["henson3-E-N-H", "henson4-E-N-H"] {
        let sig = corpus::signature(name).expect("bundled");
        for f in all_small_formulas(4, 4)
            .into_iter()
            .filter(|f| f.clauses.len() == 4)
        {
            stats.record_expected(&sig, &reduce_1in3(&f), f.brute_force());
        }
    }
    stats
}

fn gadget_criterion(start: Instant) -> (Criterion, Agreement) {
    let g = gadget_stats();
    let extra = gadget_extra_stats();
    let ok = g.perfect() && g.instances == 42 && extra.perfect() && extra.sat < extra.instances;
    let detail = format!(
        "{g} over all 42 formulas (required 42/42); four-clause check {extra} (required 100%)"
    );
    let mut all = g;
    all.absorb(&extra);
    (
        finish(
            4,
            "1-in-3 gadget equisatisfiability",
            ok,
            detail,
            start,
            120,
        ),
        all,
    )
}

pub fn gadget_equisatisfiability() -> Criterion {
    gadget_criterion(Instant::now()).0
}

/// Preserved corpus relations that failed to compile exactly, and how
/// many were checked.
pub fn compiler_exactness_stats() -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (base, r) in corpus() {
        let horn_b = match base {
            BaseStructure::Equality => Some(Behaviour::eqmeet()),
            BaseStructure::Henson { .. } => Some(Behaviour::min()),
            _ if base == BaseStructure::omega_two() => Some(Behaviour::min()),
            _ => None,
        };
        if let Some(b) = horn_b {
            if preserves(&b, &r) {
                checked += 1;
                match compile_horn(&r, &base) {
                    Ok(HornCompile::Exact(_)) => {}
                    other => failures.push(format!("horn `{}` over {base}: {other:?}", r.name)),
                }
            }
        }
        if base == BaseStructure::omega_two() && preserves(&Behaviour::h3(), &r) {
            checked += 1;
            match compile_parity(&r, &base) {
                Ok(ParityCompile::Exact(_)) => {}
                other => failures.push(format!("parity `{}`: {other:?}", r.name)),
            }
        }
    }
    (checked, failures)
}

pub fn compiler_exactness() -> Criterion {
    let start = Instant::now();
    let (checked, failures) = compiler_exactness_stats();
    let ok = failures.is_empty() && checked > 0;
    let mut detail = format!(
        "{} of {checked} preserved corpus relations exact (required all)",
        checked - failures.len()
    );
    if !failures.is_empty() {
        detail += &format!("; {}", failures.join("; "));
    }
    finish(5, "compiler exactness", ok, detail, start, 60)
}

pub fn realizability() -> Criterion {
    let start = Instant::now();
    let h3 = BaseStructure::henson(3).expect("valid");
    let h4 = BaseStructure::henson(4).expect("valid");
    let w2 = BaseStructure::omega_two();
    let checks = [
        (
            "majority rejected over henson(3)",
            !realizable(&Behaviour::majority(), &h3),
        ),
        (
            "majority rejected over henson(4)",
            !realizable(&Behaviour::majority(), &h4),
        ),
        (
            "minority fragment rejected over henson(3)",
            !realizable(&Behaviour::minority_fragment(), &h3),
        ),
        (
            "minority fragment rejected over henson(4)",
            !realizable(&Behaviour::minority_fragment(), &h4),
        ),
        (
            "min accepted over henson(3) and henson(4)",
            realizable(&Behaviour::min(), &h3) && realizable(&Behaviour::min(), &h4),
        ),
        (
            "cliquecol rejected over equiv(omega,2)",
            !realizable(&Behaviour::cliquecol(), &w2),
        ),
    ];
    let passed = checks.iter().filter(|(_, ok)| *ok).count();
    let mut detail = format!("{passed}/6 checks (required 6/6)");
    for (label, ok) in checks {
        if !ok {
            detail += &format!("; failed: {label}");
        }
    }
    finish(
        6,
        "realizability obstructions",
        passed == 6,
        detail,
        start,
        60,
    )
}

/// All vectors reachable from `set` by `a + b + c`.
fn affine_closure(set: &BTreeSet<BitVec>) -> BTreeSet<BitVec> {
    let mut out = set.clone();
    loop {
        let items: Vec<BitVec> = out.iter().cloned().collect();
        let mut fresh = Vec::new();
        for a in &items {
            for b in &items {
                for c in &items {
                    let mut v = a.clone();
                    v.xor_assign(b);
                    v.xor_assign(c);
                    if !out.contains(&v) {
                        fresh.push(v);
                    }
                }
            }
        }
        if fresh.is_empty() {
            return out;
        }
        out.extend(fresh);
    }
}

fn random_bits(rng: &mut ChaCha8Rng, w: usize) -> BitVec {
    BitVec::from_bools(&(0..w).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>())
}

pub fn gf2_core() -> Criterion {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f2);
    let (mut solutions, mut inconsistent, mut bad) = (0, 0, 0);
    for _ in 0..1000 {
        let vars = rng.gen_range(1..=30);
        let rows = rng.gen_range(0..=40);
        let mut sys = Gf2System::new(vars);
        for _ in 0..rows {
            sys.push(random_bits(&mut rng, vars), rng.gen_bool(0.5));
        }
        match gf2_solve(&sys) {
            Gf2Result::Solution(x) => {
                solutions += 1;
                bad += usize::from(!sys.satisfied_by(&x));
            }
            Gf2Result::Inconsistent { certificate } => {
                inconsistent += 1;
                bad += usize::from(!sys.certifies_inconsistency(&certificate));
            }
        }
    }
    let (mut hulls, mut hull_bad) = (0, 0);
    for _ in 0..300 {
        let w = rng.gen_range(1..=6);
        let count = rng.gen_range(1..=1usize << w);
        let set: BTreeSet<BitVec> = (0..count).map(|_| random_bits(&mut rng, w)).collect();
        let input: Vec<BitVec> = set.iter().cloned().collect();
        hulls += 1;
        let Ok((sys, exact)) = affine_hull(&input) else {
            hull_bad += 1;
            continue;
        };
        let contains = input.iter().all(|v| sys.satisfied_by(&v.to_bools()));
        let closure = affine_closure(&set);
        let solutions = (0u32..1 << w)
            .filter(|bits| {
                sys.satisfied_by(&(0..w).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            })
            .count();
        if !contains || exact != (closure == set) || solutions != closure.len() {
            hull_bad += 1;
        }
    }
    let ok = bad == 0 && hull_bad == 0;
    let detail = format!(
        "1000 systems ({solutions} solved, {inconsistent} inconsistent), {bad} failed re-verification; \
         {hulls} hulls, {hull_bad} wrong (required 0 failures)"
    );
    finish(7, "GF(2) core", ok, detail, start, 60)
}

/// Witness counts gathered from the runs behind criteria 2 to 4.
pub fn witness_soundness_from(stats: &[Agreement], elapsed: Duration) -> Criterion {
    let mut total = Agreement::default();
    for s in stats {
        total.absorb(s);
    }
    let ok = total.bad_witnesses == 0 && total.witnesses > 0;
    let detail = format!(
        "{} of {} SAT witnesses re-verified (required 100%)",
        total.witnesses - total.bad_witnesses,
        total.witnesses
    );
    let mut c = finish(8, "witness soundness", ok, detail, Instant::now(), 300);
    c.elapsed = elapsed;
    c.passed = ok && elapsed <= c.budget;
    c
}

pub fn witness_soundness() -> Criterion {
    let start = Instant::now();
    let (h, _) = horn_stats();
    let (m, p, _) = affine_stats();
    let (_, g) = gadget_criterion(Instant::now());
    witness_soundness_from(&[h, m, p, g], start.elapsed())
}

/// One large seeded instance per solver; compilation is inside the timing.
pub fn performance() -> Criterion {
    let start = Instant::now();
    let budget = Duration::from_secs(5);
    let mut parts = Vec::new();
    let mut ok = true;

    let sig = corpus::signature("henson3-horn").expect("bundled");
    let inst = random_instance(&sig, 200, 300, 9);
    let t = Instant::now();
    let res = compile_signature(&sig).and_then(|c| horn_solve(&sig, &c, &inst));
    let took = t.elapsed();
    ok &= took < budget && check_large(&sig, &inst, &res, &mut parts, "horn", took);

    let sig = corpus::signature("omega2-parity").expect("bundled");
    let inst = random_instance(&sig, 200, 300, 9);
    let t = Instant::now();
    let res = compile_parity_signature(&sig).and_then(|c| solve_cw2_parity(&sig, &c, &inst));
    let took = t.elapsed();
    ok &= took < budget && check_large(&sig, &inst, &res, &mut parts, "parity", took);

    let detail = format!("{} (required < 5 s each)", parts.join(", "));
    finish(
        9,
        "performance, 200 variables / 300 constraints",
        ok,
        detail,
        start,
        10,
    )
}

fn check_large(
    sig: &Signature,
    inst: &Instance,
    res: &Result<Outcome>,
    parts: &mut Vec<String>,
    label: &str,
    took: Duration,
) -> bool {
    let (status, ok) = match res {
        Ok(o) => (
            format!("{:?}", o.status),
            o.witness
                .as_ref()
                .is_none_or(|w| sig.verify_witness(inst, w).is_ok()),
        ),
        Err(e) => (format!("error {e}"), false),
    };
    parts.push(format!("{label} {status} in {:.3} s", took.as_secs_f64()));
    ok
}

/// Every criterion in order; criterion 8 reuses the runs of 2 to 4.
pub fn run_all() -> Vec<Criterion> {
    let mut out = vec![catalog()];

    let start = Instant::now();
    let (h, hp) = horn_stats();
    let ok = h.perfect() && h.instances >= 500 && hp.is_empty();
    let mut detail = format!("{h} (required >=500 instances, 100% agreement)");
    if !hp.is_empty() {
        detail += &format!("; {}", hp.join("; "));
    }
    out.push(finish(2, "Horn solver vs oracle", ok, detail, start, 60));
    let t2 = start.elapsed();

    let start = Instant::now();
    let (m, p, ap) = affine_stats();
    let ok =
        m.perfect() && p.perfect() && m.instances >= 500 && p.instances >= 500 && ap.is_empty();
    let mut detail = format!("minority {m}; parity {p} (required >=500 each, 100% agreement)");
    if !ap.is_empty() {
        detail += &format!("; {}", ap.join("; "));
    }
    out.push(finish(
        3,
        "affine solvers vs oracle",
        ok,
        detail,
        start,
        120,
    ));
    let t3 = start.elapsed();

    let start = Instant::now();
    let (c4, g) = gadget_criterion(start);
    out.push(c4);
    let t4 = start.elapsed();

    out.push(compiler_exactness());
    out.push(realizability());
    out.push(gf2_core());
    out.push(witness_soundness_from(&[h, m, p, g], t2 + t3 + t4));
    out.push(performance());
    out
}

/// Auto dispatch against the oracle on every bundled signature with a
/// tractable verdict; not one of the numbered criteria.
pub fn dispatch_spot_check() -> (Agreement, Vec<String>) {
    use crate::solve::Prepared;
    let mut stats = Agreement::default();
    let mut problems = Vec::new();
    for (i, name) in corpus::SIGNATURE_NAMES.iter().enumerate() {
        let sig = corpus::signature(name).expect("bundled");
        let prepared = match classify(&sig)
            .and_then(|v| Prepared::from_verdict(&sig, &v, DEFAULT_ORACLE_CAP))
        {
            Ok(p) => p,
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                continue;
            }
        };
        for inst in instances(&sig, 20, 9000 + i as u64) {
            stats.record(&sig, &inst, |i| prepared.solve(i).map(|s| s.outcome));
        }
    }
    (stats, problems)
}
