use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use hcsp_core::acceptance;
use hcsp_core::affine::gf2::Gf2System;
use hcsp_core::behaviour::behaviour_by_name;
use hcsp_core::gadgets::{reduce_1in3, OneInThreeFormula};
use hcsp_core::model::{InstanceJson, SignatureJson, WitnessJson};
use hcsp_core::oracle::{random_instance, random_relation};
use hcsp_core::{
    classify_with, oracle_solve, BaseStructure, ClassifyOptions, Error, Instance, Prepared,
    Signature, SolverChoice, Verdict, DEFAULT_ORACLE_CAP,
};

#[derive(Parser)]
#[command(
    name = "hcsp",
    version,
    about = "CSPs over reducts of Henson graphs and equivalence relations"
)]
struct Cli {
    /// Variable cap for the brute-force oracle.
    #[arg(long, global = true, env = "HCSP_CAP", default_value_t = DEFAULT_ORACLE_CAP)]
    cap: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide P / NP-complete for a signature.
    Classify {
        #[arg(short, long)]
        signature: PathBuf,
        /// Also try every unary table as a collapse.
        #[arg(long)]
        deep: bool,
    },
    /// Solve an instance, by the classifier's solver unless one is forced.
    Solve {
        #[arg(short, long)]
        signature: PathBuf,
        #[arg(short, long)]
        instance: PathBuf,
        /// auto, oracle, horn, horn-equality, parity, minority or constant.
        #[arg(long, default_value = "auto")]
        solver: String,
        #[arg(long)]
        witness: bool,
        /// Include the final GF(2) system of the affine solvers.
        #[arg(long)]
        emit_gf2: bool,
    },
    /// Brute-force search up to the cap.
    Oracle {
        #[arg(short, long)]
        signature: PathBuf,
        #[arg(short, long)]
        instance: PathBuf,
    },
    /// Reduce a positive 1-in-3 formula to an instance over E, N, H.
    Gadget {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long)]
        formula: PathBuf,
    },
    /// Seeded random relations and instances.
    Gen {
        #[command(subcommand)]
        what: GenKind,
    },
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Subcommand)]
enum GenKind {
    Relation {
        /// Base as JSON, e.g. '{"kind":"henson","n":3}'.
        #[arg(long)]
        base: String,
        #[arg(long)]
        arity: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Close the relation under a catalog behaviour such as B_min.
        #[arg(long)]
        closed_under: Option<String>,
    },
    Instance {
        #[arg(short, long)]
        signature: PathBuf,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        constraints: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct SolveOutput {
    status: hcsp_core::Status,
    solver: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gf2: Option<Gf2System>,
}

#[derive(Serialize)]
struct OracleOutput {
    status: hcsp_core::Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessJson>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_signature(path: &Path) -> anyhow::Result<Signature> {
    let j: SignatureJson = read_json(path)?;
    Ok(Signature::from_json(&j)?)
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let j: InstanceJson = read_json(path)?;
    Ok(Instance::from_json(&j)?)
}

fn emit(value: &impl Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn classify_cmd(path: &Path, deep: bool) -> anyhow::Result<()> {
    let sig = match load_signature(path) {
        Ok(s) => s,
        Err(e) => match e.downcast_ref::<Error>() {
            Some(Error::DelegatedBase(why)) => return emit(&Verdict::delegated_base(why.clone())),
            _ => return Err(e),
        },
    };
    emit(&classify_with(&sig, ClassifyOptions { deep })?)
}

fn solve_cmd(
    sig: &Path,
    inst: &Path,
    solver: &str,
    witness: bool,
    emit_gf2: bool,
    cap: usize,
) -> anyhow::Result<()> {
    let choice: SolverChoice = solver.parse()?;
    let sig = load_signature(sig)?;
    let inst = load_instance(inst)?;
    let prepared = match choice {
        SolverChoice::Auto => {
            let verdict = classify_with(&sig, ClassifyOptions::default())?;
            Prepared::from_verdict(&sig, &verdict, cap)?
        }
        SolverChoice::Named(id) => Prepared::new(&sig, id, cap)?,
    };
    let solved = prepared.solve(&inst)?;
    emit(&SolveOutput {
        status: solved.outcome.status,
        solver: solved.solver.to_string(),
        witness: solved
            .outcome
            .witness
            .as_ref()
            .filter(|_| witness)
            .map(|w| WitnessJson::new(&inst, w)),
        reason: solved.outcome.reason,
        gf2: solved.system.filter(|_| emit_gf2),
    })
}

fn oracle_cmd(sig: &Path, inst: &Path, cap: usize) -> anyhow::Result<()> {
    let sig = load_signature(sig)?;
    let inst = load_instance(inst)?;
    let o = oracle_solve(&sig, &inst, cap)?;
    emit(&OracleOutput {
        status: o.status,
        witness: o.witness.as_ref().map(|w| WitnessJson::new(&inst, w)),
    })
}

fn gadget_cmd(n: u32, formula: &Path) -> anyhow::Result<()> {
    BaseStructure::henson(n)?;
    let f: OneInThreeFormula = read_json(formula)?;
    emit(&reduce_1in3(&f).to_json())
}

fn gen_cmd(what: GenKind) -> anyhow::Result<()> {
    match what {
        GenKind::Relation {
            base,
            arity,
            seed,
            closed_under,
        } => {
            let base: BaseStructure =
                serde_json::from_str(&base).map_err(|e| Error::InvalidBase(e.to_string()))?;
            let b = match closed_under {
                Some(name) => Some(
                    behaviour_by_name(&name)
                        .ok_or_else(|| Error::Malformed(format!("unknown behaviour `{name}`")))?,
                ),
                None => None,
            };
            let r = random_relation(&base, arity, seed, b.as_ref())?;
            emit(&r.to_json())
        }
        GenKind::Instance {
            signature,
            vars,
            constraints,
            seed,
        } => {
            let sig = load_signature(&signature)?;
            emit(&random_instance(&sig, vars, constraints, seed).to_json())
        }
    }
}

fn selftest() -> bool {
    let mut ok = true;
    for c in acceptance::run_all() {
        println!("{c}");
        ok &= c.passed;
    }
    let (stats, problems) = acceptance::dispatch_spot_check();
    let spot = stats.perfect() && problems.is_empty();
    println!(
        "[{}] auto dispatch vs oracle: {stats} (required 100%){}",
        if spot { "PASS" } else { "FAIL" },
        if problems.is_empty() {
            String::new()
        } else {
            format!("; {}", problems.join("; "))
        }
    );
    ok && spot
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(core) if !core.is_input_error() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cap = cli.cap;
    let result = match cli.command {
        Command::Classify { signature, deep } => classify_cmd(&signature, deep),
        Command::Solve {
            signature,
            instance,
            solver,
            witness,
            emit_gf2,
        } => solve_cmd(&signature, &instance, &solver, witness, emit_gf2, cap),
        Command::Oracle {
            signature,
            instance,
        } => oracle_cmd(&signature, &instance, cap),
        Command::Gadget { n, formula } => gadget_cmd(n, &formula),
        Command::Gen { what } => gen_cmd(what),
        Command::Selftest => {
            return if selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            let msg = format!("{e:#}");
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
