use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qtoda_core::exactalg::rational::{self, Rational};
use qtoda_core::flatsec::verify_flat_sections;
use qtoda_core::invariants::chevalley_generators;
use qtoda_core::json;
use qtoda_core::pipeline::{
    invariants_stage, root_system_stage, run_pipeline, verify_commutators, Artifacts, PipelineConfig,
};
use qtoda_core::qcoh::{inject_fault, kim_relation, verify_hypotheses, verify_relations, CheckReport, QMatrix};
use qtoda_core::rootsys::{LieType, RootSystem, WeylGroup};
use qtoda_core::toda::toda_integrals;
use qtoda_core::Error;

#[derive(Parser)]
#[command(
    name = "qtoda",
    version,
    about = "Exact quantum Toda integrals and quantum cohomology of flag manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Lie type: A, B, C, D or G
    #[arg(long = "type")]
    lie_type: LieType,
    #[arg(long)]
    rank: usize,
    /// Print canonical JSON instead of text
    #[arg(long)]
    json: bool,
    /// Write canonical JSON to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Truncation order in e^t for flat sections
    #[arg(long, default_value_t = 3)]
    order: u32,
    /// Specialize h to this nonzero rational (p or p/q)
    #[arg(long)]
    h_value: Option<String>,
    /// Corrupt the divisor matrices (testing only)
    #[arg(long)]
    fault_inject: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyWhat {
    Hypotheses,
    Relations,
    Commutators,
    FlatSections,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Cartan matrix, coroot Gram matrix and Weyl group data
    RootSystem(Common),
    /// Fundamental degrees and the chosen basic invariants
    Invariants(Common),
    /// Commuting lifts and their symbol decomposition
    Toda(Common),
    /// Invariants, symbols, relations and divisor matrices
    Present(Common),
    /// Run one or all verification suites
    Verify {
        what: VerifyWhat,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Run every stage and emit a report
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        check: CheckArgs,
        /// Include per-stage wall-clock times in the report
        #[arg(long)]
        timings: bool,
    },
}

/// Outcome of a command: a JSON payload, its text rendering, and whether all checks passed.
struct Output {
    value: Value,
    text: String,
    passed: bool,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unsupported { .. }
            | Error::Parse(_)
            | Error::UnknownFault(_)
            | Error::Json { .. }
            | Error::Io(_) => Failure::Input(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, result) = match &cli.command {
        Command::RootSystem(c) => (c, root_system(c)),
        Command::Invariants(c) => (c, invariants(c)),
        Command::Toda(c) => (c, toda(c)),
        Command::Present(c) => (c, present(c)),
        Command::Verify { what, common, check } => (common, verify(*what, common, check)),
        Command::Pipeline { common, check, timings } => (common, pipeline(common, check, *timings)),
    };
    match result {
        Ok(out) => match emit(common, &out) {
            Ok(()) if out.passed => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn emit(common: &Common, out: &Output) -> Result<(), Error> {
    let canonical = json::to_canonical_string(&out.value)?;
    if let Some(path) = &common.out {
        std::fs::write(path, &canonical)?;
    }
    if common.json {
        print!("{canonical}");
    } else {
        print!("{}", out.text);
    }
    Ok(())
}

fn header(c: &Common) -> String {
    format!("{}{}", c.lie_type, c.rank)
}

fn root_system(c: &Common) -> Result<Output, Failure> {
    let rs = RootSystem::new(c.lie_type, c.rank)?;
    let w = WeylGroup::generate(&rs);
    let (failures, details) = root_system_stage(&rs, &w);
    let mut text = format!("root system {}\n", header(c));
    text += &format!("cartan: {:?}\n", rs.cartan);
    text += &format!("coroot gram: {}\n", details["coroot_gram"]);
    text += &format!("gram minors: {}\n", details["gram_minors"]);
    text += &format!("positive roots: {}\n|W| = {}\n", rs.num_positive_roots(), w.order());
    Ok(Output {
        value: details,
        text,
        passed: failures.is_empty(),
    })
}

fn invariants(c: &Common) -> Result<Output, Failure> {
    let rs = RootSystem::new(c.lie_type, c.rank)?;
    let w = WeylGroup::generate(&rs);
    let inv = chevalley_generators(&rs, &w)?;
    let (failures, details) = invariants_stage(&rs, &w, &inv);
    let mut text = format!("invariants {}\ndegrees: {:?}\n", header(c), inv.degrees);
    for (k, u) in inv.generators.iter().enumerate() {
        text += &format!("u{} = {u}\n", k + 1);
    }
    for f in &failures {
        text += &format!("FAIL {f}\n");
    }
    Ok(Output {
        value: details,
        text,
        passed: failures.is_empty(),
    })
}

fn toda(c: &Common) -> Result<Output, Failure> {
    let rs = RootSystem::new(c.lie_type, c.rank)?;
    let w = WeylGroup::generate(&rs);
    let inv = chevalley_generators(&rs, &w)?;
    let integrals = toda_integrals(&rs, &inv)?;
    let mut text = format!("quantum Toda integrals {}\n", header(c));
    for it in &integrals {
        text += &format!(
            "Omega{} = {}\nF{} = {}\nf{} = {}\n",
            it.k, it.omega, it.k, it.big_f, it.k, it.small_f
        );
    }
    let value = json!({
        "type": c.lie_type,
        "rank": c.rank,
        "integrals": serde_json::to_value(&integrals).map_err(|e| Failure::Internal(e.to_string()))?,
    });
    Ok(Output {
        value,
        text,
        passed: true,
    })
}

fn present(c: &Common) -> Result<Output, Failure> {
    let art = Artifacts::build(c.lie_type, c.rank)?;
    let relations: Vec<String> = art
        .big_fs()
        .iter()
        .map(|f| kim_relation(f, &art.rs).to_string())
        .collect();
    let mut text = format!("presentation {}\n", header(c));
    for (k, (u, r)) in art.invariants.generators.iter().zip(&relations).enumerate() {
        text += &format!("u{} = {u}\nrelation {}: {r} = 0\n", k + 1, k + 1);
    }
    let value = json!({
        "type": c.lie_type,
        "rank": c.rank,
        "degrees": art.invariants.degrees,
        "u": art.invariants.generators.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "F": art.big_fs().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "relations": relations,
        "basis": to_value(&art.basis),
        "B": art.matrices.iter().map(to_value).collect::<Vec<_>>(),
    });
    Ok(Output {
        value,
        text,
        passed: true,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn parse_h(check: &CheckArgs) -> Result<Option<Rational>, Failure> {
    match &check.h_value {
        None => Ok(None),
        Some(s) => {
            let h = rational::parse(s)?;
            if h == Rational::from_integer(0.into()) {
                return Err(Failure::Input("--h-value must be nonzero".into()));
            }
            Ok(Some(h))
        }
    }
}

fn faulted(art: &Artifacts, check: &CheckArgs) -> Result<Vec<QMatrix>, Failure> {
    let mut mats = art.matrices.clone();
    if let Some(key) = &check.fault_inject {
        inject_fault(&mut mats, key, &art.weyl, &art.basis).map_err(|e| Failure::Input(e.to_string()))?;
    }
    Ok(mats)
}

fn report_text(title: &str, rep: &CheckReport) -> String {
    let mut text = String::new();
    for ch in &rep.checks {
        text += &format!("{title} {}: {}\n", ch.name, if ch.passed { "pass" } else { "FAIL" });
        for f in &ch.failures {
            text += &format!("  {f}\n");
        }
    }
    text
}

fn verify(what: VerifyWhat, c: &Common, check: &CheckArgs) -> Result<Output, Failure> {
    let h = parse_h(check)?;
    let art = Artifacts::build(c.lie_type, c.rank)?;
    let mats = faulted(&art, check)?;
    let mut reports: Vec<(&str, CheckReport)> = Vec::new();
    let all = matches!(what, VerifyWhat::All);
    if all || matches!(what, VerifyWhat::Hypotheses) {
        reports.push(("hypotheses", verify_hypotheses(&mats, &art.rs, &art.weyl, &art.basis)));
    }
    if all || matches!(what, VerifyWhat::Relations) {
        reports.push(("relations", verify_relations(&art.big_fs(), &mats, &art.rs, &art.basis)));
    }
    if all || matches!(what, VerifyWhat::Commutators) {
        reports.push(("commutators", verify_commutators(&art)?));
    }
    if all || matches!(what, VerifyWhat::FlatSections) {
        let rep = verify_flat_sections(&mats, &art.basis, &art.named_operators(), check.order, h.as_ref());
        let rep = match rep {
            Ok(r) => r,
            Err(Error::Precondition(m)) => CheckReport::from_checks(vec![qtoda_core::qcoh::Check {
                name: "preconditions".into(),
                passed: false,
                failures: vec![m],
            }]),
            Err(e) => return Err(e.into()),
        };
        reports.push(("flat-sections", rep));
    }
    let passed = reports.iter().all(|(_, r)| r.passed);
    let mut text = String::new();
    let mut value = serde_json::Map::new();
    for (name, rep) in &reports {
        text += &report_text(name, rep);
        value.insert(name.to_string(), to_value(rep));
    }
    text += &format!("{} {}\n", header(c), if passed { "PASS" } else { "FAIL" });
    value.insert("passed".into(), Value::Bool(passed));
    Ok(Output {
        value: Value::Object(value),
        text,
        passed,
    })
}

fn pipeline(c: &Common, check: &CheckArgs, timings: bool) -> Result<Output, Failure> {
    let cfg = PipelineConfig {
        lie_type: c.lie_type,
        rank: c.rank,
        order: check.order,
        h_value: parse_h(check)?,
        fault: check.fault_inject.clone(),
        timings,
    };
    let rep = run_pipeline(&cfg)?;
    let mut text = String::new();
    for s in &rep.stages {
        text += &format!("{}: {}\n", s.name, if s.passed { "pass" } else { "FAIL" });
        for f in &s.failures {
            text += &format!("  {f}\n");
        }
    }
    text += &format!("{} {}\n", header(c), if rep.passed { "PASS" } else { "FAIL" });
    let value = serde_json::to_value(&rep).map_err(|e| Failure::Internal(e.to_string()))?;
    Ok(Output {
        value,
        text,
        passed: rep.passed,
    })
}
