//! End-to-end run: root system, invariants, commuting lifts, symbols, operators,
//! hypothesis and relation checks, flat sections. Stage failures are recorded
//! in the report rather than raised.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::diffop::{build_h, commutator_diffop, h_from_omega, rho_dk, DiffOp};
use crate::exactalg::rational::{self, int, Rational};
use crate::exactalg::SparsePoly;
use crate::flatsec::{kim_lemma_certificate, verify_flat_sections};
use crate::invariants::{chevalley_generators, jacobian_determinant, lambda_vars, InvariantSet, PolyAction};
use crate::qcoh::{
    classical_chevalley, eval_lambda_poly, inject_fault, kim_relation, quantum_matrices, verify_hypotheses,
    verify_relations, Check, CheckReport, QMatrix, SchubertBasis,
};
use crate::rootsys::{LieType, RootSystem, WeylGroup};
use crate::toda::{
    build_omega, commutator_uenv, mu_projection, poisson_bracket, ql_vars, toda_integrals, TodaIntegral,
};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub lie_type: LieType,
    pub rank: usize,
    pub order: u32,
    pub h_value: Option<Rational>,
    pub fault: Option<String>,
    /// Record wall-clock time per stage; off by default so reports are reproducible.
    pub timings: bool,
}

impl PipelineConfig {
    pub fn new(lie_type: LieType, rank: usize) -> Self {
        PipelineConfig {
            lie_type,
            rank,
            order: 3,
            h_value: None,
            fault: None,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageReport {
    pub name: String,
    pub passed: bool,
    pub failures: Vec<String>,
    pub details: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineReport {
    pub lie_type: String,
    pub rank: usize,
    pub order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
    pub passed: bool,
    pub stages: Vec<StageReport>,
}

impl PipelineReport {
    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }
}

/// Every object the checks are run against.
pub struct Artifacts {
    pub rs: RootSystem,
    pub weyl: WeylGroup,
    pub basis: SchubertBasis,
    pub invariants: InvariantSet,
    pub integrals: Vec<TodaIntegral>,
    pub hamiltonian: DiffOp,
    pub operators: Vec<DiffOp>,
    pub matrices: Vec<QMatrix>,
}

impl Artifacts {
    pub fn build(lie_type: LieType, rank: usize) -> Result<Self, Error> {
        let rs = RootSystem::new(lie_type, rank)?;
        let weyl = WeylGroup::generate(&rs);
        let basis = SchubertBasis::new(&weyl);
        let invariants = chevalley_generators(&rs, &weyl)?;
        let integrals = toda_integrals(&rs, &invariants)?;
        let operators = integrals
            .iter()
            .map(|it| rho_dk(&it.omega, &rs))
            .collect::<Result<_, _>>()?;
        let matrices = quantum_matrices(&rs, &weyl, &basis)?;
        Ok(Artifacts {
            hamiltonian: build_h(&rs),
            rs,
            weyl,
            basis,
            invariants,
            integrals,
            operators,
            matrices,
        })
    }

    pub fn big_fs(&self) -> Vec<SparsePoly> {
        self.integrals.iter().map(|it| it.big_f.clone()).collect()
    }

    pub fn named_operators(&self) -> Vec<(String, DiffOp)> {
        let mut ops = vec![("H".to_string(), self.hamiltonian.clone())];
        ops.extend(
            self.operators
                .iter()
                .enumerate()
                .map(|(k, d)| (format!("D{}", k + 1), d.clone())),
        );
        ops
    }
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn dense_strings(m: &[Vec<Rational>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(rational::to_string).collect()).collect()
}

pub fn root_system_stage(rs: &RootSystem, w: &WeylGroup) -> (Vec<String>, Value) {
    let cert = kim_lemma_certificate(rs);
    let mut failures = Vec::new();
    if !cert.positive_definite {
        failures.push(format!(
            "coroot Gram matrix minors {:?} not all positive",
            strings(&cert.minors)
        ));
    }
    let details = json!({
        "cartan": rs.cartan,
        "root_lengths": strings(&rs.root_lengths),
        "coroot_gram": dense_strings(&rs.coroot_gram),
        "gram_minors": strings(&cert.minors),
        "positive_roots": rs.num_positive_roots(),
        "weyl_order": w.order(),
    });
    (failures, details)
}

pub fn invariants_stage(rs: &RootSystem, w: &WeylGroup, inv: &InvariantSet) -> (Vec<String>, Value) {
    let mut failures = Vec::new();
    let product: usize = inv.degrees.iter().map(|&d| d as usize).product();
    if product != w.order() {
        failures.push(format!("product of degrees {product} != |W| = {}", w.order()));
    }
    let action = PolyAction::new(w);
    for (k, u) in inv.generators.iter().enumerate() {
        if !action.is_invariant(u) {
            failures.push(format!("u_{} is not invariant", k + 1));
        }
    }
    let jac = jacobian_determinant(inv);
    let jac_degree = jac.total_degree();
    if jac_degree != Some(rs.num_positive_roots() as u32) {
        failures.push(format!("Jacobian degree {jac_degree:?} != {}", rs.num_positive_roots()));
    }
    let details = json!({
        "degrees": inv.degrees,
        "generators": strings(&inv.generators),
        "jacobian_degree": jac_degree,
    });
    (failures, details)
}

pub fn toda_stage(rs: &RootSystem, integrals: &[TodaIntegral]) -> Result<(Vec<String>, Value), Error> {
    let omega = build_omega(rs);
    let mut failures = Vec::new();
    for it in integrals {
        if !commutator_uenv(&it.omega, &omega)?.is_zero() {
            failures.push(format!("[Omega_{}, Omega] != 0", it.k));
        }
        if mu_projection(&it.omega) != it.u {
            failures.push(format!("mu(Omega_{}) != u_{}", it.k, it.k));
        }
        if it.omega.filtration_degree() != Some(it.degree) {
            failures.push(format!(
                "Omega_{} has filtration degree {:?}",
                it.k,
                it.omega.filtration_degree()
            ));
        }
        if !it.omega.is_even_in_x() {
            failures.push(format!("Omega_{} has an odd X exponent", it.k));
        }
    }
    for a in integrals {
        for b in integrals.iter().filter(|b| b.k > a.k) {
            if !commutator_uenv(&a.omega, &b.omega)?.is_zero() {
                failures.push(format!("[Omega_{}, Omega_{}] != 0", a.k, b.k));
            }
        }
    }
    let details = json!({ "omega": integrals.iter().map(|it| it.omega.to_string()).collect::<Vec<_>>() });
    Ok((failures, details))
}

pub fn symbols_stage(rs: &RootSystem, integrals: &[TodaIntegral]) -> (Vec<String>, Value) {
    let l = rs.rank;
    let mut failures = Vec::new();
    let vars = lambda_vars(l);
    let collapse: Vec<SparsePoly> = (0..2 * l)
        .map(|i| {
            if i < l {
                SparsePoly::zero(&vars)
            } else {
                SparsePoly::var(&vars, i - l)
            }
        })
        .collect();
    let f1 = &integrals[0].big_f;
    for it in integrals {
        match it.big_f.substitute(&collapse) {
            Ok(p) if p == it.u => {}
            _ => failures.push(format!("F_{}(0, L) != u_{}", it.k, it.k)),
        }
        let br = poisson_bracket(&it.big_f, f1);
        if !br.is_zero() {
            failures.push(format!("{{F_{}, F_1}} = {br}", it.k));
        }
        if it.small_f.terms().any(|(m, _)| m.0[..l].iter().all(|&e| e == 0)) {
            failures.push(format!("f_{} has a pure lambda term", it.k));
        }
    }
    let details = json!({
        "F": integrals.iter().map(|it| it.big_f.to_string()).collect::<Vec<_>>(),
        "f": integrals.iter().map(|it| it.small_f.to_string()).collect::<Vec<_>>(),
    });
    (failures, details)
}

pub fn operators_stage(rs: &RootSystem, art: &Artifacts) -> Result<(Vec<String>, Value), Error> {
    let l = rs.rank;
    let mut failures = Vec::new();
    let h = &art.hamiltonian;
    if *h != h_from_omega(rs)? {
        failures.push("H != rho(Omega)/4".into());
    }
    let vars = lambda_vars(l);
    let doubled: Vec<SparsePoly> = (0..l).map(|i| SparsePoly::var(&vars, i).scale(&int(2))).collect();
    let q = ql_vars(l);
    let symbol_subs: Vec<SparsePoly> = (0..2 * l)
        .map(|i| {
            if i < l {
                SparsePoly::var(&q, i).scale(&-rs.coroot_gram[i][i].clone())
            } else {
                SparsePoly::var(&q, i)
            }
        })
        .collect();
    for (it, dk) in art.integrals.iter().zip(&art.operators) {
        let k = it.k;
        if !commutator_diffop(dk, h)?.is_zero() {
            failures.push(format!("[D_{k}, H] != 0"));
        }
        if !dk.is_homogeneous_of(it.degree) {
            failures.push(format!("D_{k} is not homogeneous of degree {}", it.degree));
        }
        let (lim, h_free) = dk.potential_free_limit();
        if !h_free {
            failures.push(format!("e^t -> 0 part of D_{k} depends on h"));
        }
        if lim != it.u.substitute(&doubled)? {
            failures.push(format!("e^t -> 0 part of D_{k} != u_{k}(2L)"));
        }
        let expect = it
            .big_f
            .substitute(&symbol_subs)?
            .scale(&rational::pow(&int(2), it.degree as i32));
        if dk.symbol() != expect {
            failures.push(format!("h -> 0 symbol of D_{k} != 2^d F_{k}(-G_ii Q_i, L)"));
        }
    }
    let details = json!({
        "H": h.to_string(),
        "D": strings(&art.operators),
    });
    Ok((failures, details))
}

/// `[D_k, H] = 0` for every `k` and `[Omega_k, Omega_m] = 0` for every pair.
pub fn verify_commutators(art: &Artifacts) -> Result<CheckReport, Error> {
    let mut checks = Vec::new();
    for (it, dk) in art.integrals.iter().zip(&art.operators) {
        let c = commutator_diffop(dk, &art.hamiltonian)?;
        let failures = if c.is_zero() {
            vec![]
        } else {
            vec![format!("[D_{}, H] = {c}", it.k)]
        };
        checks.push(Check {
            name: format!("D{}_H", it.k),
            passed: failures.is_empty(),
            failures,
        });
    }
    let mut pairwise = Vec::new();
    for a in &art.integrals {
        for b in art.integrals.iter().filter(|b| b.k > a.k) {
            let c = commutator_uenv(&a.omega, &b.omega)?;
            if !c.is_zero() {
                pairwise.push(format!("[Omega_{}, Omega_{}] = {c}", a.k, b.k));
            }
        }
    }
    checks.push(Check {
        name: "omega_pairwise".into(),
        passed: pairwise.is_empty(),
        failures: pairwise,
    });
    Ok(CheckReport::from_checks(checks))
}

pub fn report_failures(rep: &CheckReport) -> Vec<String> {
    rep.checks
        .iter()
        .flat_map(|c| c.failures.iter().map(move |f| format!("{}: {f}", c.name)))
        .collect()
}

pub fn relations_stage(art: &Artifacts, mats: &[QMatrix]) -> Result<(Vec<String>, Value), Error> {
    let rs = &art.rs;
    let rep = verify_relations(&art.big_fs(), mats, rs, &art.basis);
    let mut failures = report_failures(&rep);
    let classical: Vec<QMatrix> = (0..rs.rank)
        .map(|i| classical_chevalley(rs, &art.weyl, &art.basis, i))
        .collect();
    for (k, u) in art.invariants.generators.iter().enumerate() {
        if !eval_lambda_poly(u, &classical).is_zero() {
            failures.push(format!("borel: u_{} does not vanish on the classical matrices", k + 1));
        }
    }
    let relations: Vec<String> = art.big_fs().iter().map(|f| kim_relation(f, rs).to_string()).collect();
    Ok((failures, json!({ "relations": relations, "checks": rep })))
}

fn timed<F>(name: &str, timings: bool, f: F) -> StageReport
where
    F: FnOnce() -> Result<(Vec<String>, Value), Error>,
{
    let start = Instant::now();
    let (failures, details) = match f() {
        Ok(r) => r,
        Err(e) => (vec![format!("error: {e}")], Value::Null),
    };
    StageReport {
        name: name.to_string(),
        passed: failures.is_empty(),
        failures,
        details,
        elapsed_ms: timings.then(|| start.elapsed().as_millis() as u64),
    }
}

/// The stage names, in execution order.
pub const STAGES: [&str; 8] = [
    "root_system",
    "invariants",
    "toda",
    "symbols",
    "operators",
    "hypotheses",
    "relations",
    "flat_sections",
];

/// Runs every stage. Unsupported input is an error; everything else lands in the report.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport, Error> {
    if let Some(key) = &cfg.fault {
        if !crate::qcoh::HYPOTHESIS_CHECKS.contains(&key.as_str()) {
            return Err(Error::UnknownFault(key.clone()));
        }
    }
    let rs = RootSystem::new(cfg.lie_type, cfg.rank)?;
    let weyl = WeylGroup::generate(&rs);
    let mut stages = vec![timed("root_system", cfg.timings, || Ok(root_system_stage(&rs, &weyl)))];

    let start = Instant::now();
    let built = Artifacts::build(cfg.lie_type, cfg.rank);
    let build_ms = start.elapsed().as_millis() as u64;
    match built {
        Err(e) => {
            for name in &STAGES[1..] {
                stages.push(StageReport {
                    name: name.to_string(),
                    passed: false,
                    failures: vec![format!("not run: {e}")],
                    details: Value::Null,
                    elapsed_ms: cfg.timings.then_some(build_ms),
                });
            }
        }
        Ok(art) => {
            let t = cfg.timings;
            stages.push(timed("invariants", t, || {
                Ok(invariants_stage(&art.rs, &art.weyl, &art.invariants))
            }));
            stages.push(timed("toda", t, || toda_stage(&art.rs, &art.integrals)));
            stages.push(timed("symbols", t, || Ok(symbols_stage(&art.rs, &art.integrals))));
            stages.push(timed("operators", t, || operators_stage(&art.rs, &art)));
            let mut mats = art.matrices.clone();
            let injected = match &cfg.fault {
                Some(key) => inject_fault(&mut mats, key, &art.weyl, &art.basis),
                None => Ok(()),
            }
            .map_err(|e| e.to_string());
            stages.push(timed("hypotheses", t, || {
                if let Err(m) = &injected {
                    return Err(Error::Precondition(m.clone()));
                }
                let rep = verify_hypotheses(&mats, &art.rs, &art.weyl, &art.basis);
                Ok((report_failures(&rep), serde_json::to_value(&rep).unwrap_or(Value::Null)))
            }));
            stages.push(timed("relations", t, || relations_stage(&art, &mats)));
            stages.push(timed("flat_sections", t, || {
                let rep = verify_flat_sections(
                    &mats,
                    &art.basis,
                    &art.named_operators(),
                    cfg.order,
                    cfg.h_value.as_ref(),
                )?;
                Ok((report_failures(&rep), serde_json::to_value(&rep).unwrap_or(Value::Null)))
            }));
        }
    }
    Ok(PipelineReport {
        lie_type: cfg.lie_type.to_string(),
        rank: cfg.rank,
        order: cfg.order,
        h_value: cfg.h_value.as_ref().map(rational::to_string),
        fault: cfg.fault.clone(),
        passed: stages.iter().all(|s| s.passed),
        stages,
    })
}
