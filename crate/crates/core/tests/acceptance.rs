//! Acceptance suite. Runs without the libtest harness so that each criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.

use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qtoda_core::diffop::{commutator_diffop, DiffOp};
use qtoda_core::exactalg::rational::{self, int};
use qtoda_core::exactalg::{MultiIndex, SparsePoly};
use qtoda_core::flatsec::verify_flat_sections;
use qtoda_core::invariants::{fundamental_degrees, jacobian_determinant, lambda_vars};
use qtoda_core::json;
use qtoda_core::pipeline::{run_pipeline, Artifacts, PipelineConfig};
use qtoda_core::qcoh::{
    classical_chevalley, eval_lambda_poly, eval_relation, inject_fault, kim_relation, q_vars, verify_hypotheses,
    verify_relations, QMatrix, HYPOTHESIS_CHECKS,
};
use qtoda_core::rootsys::{LieType, RootSystem, WeylGroup};
use qtoda_core::toda::{commutator_uenv, ql_vars};

type Outcome = Result<(), Vec<String>>;
type Criterion = (&'static str, fn() -> Outcome);

const A1: (LieType, usize) = (LieType::A, 1);
const A2: (LieType, usize) = (LieType::A, 2);
const A3: (LieType, usize) = (LieType::A, 3);
const B2: (LieType, usize) = (LieType::B, 2);
const G2: (LieType, usize) = (LieType::G, 2);

const ALL_SUPPORTED: [(LieType, usize); 10] = [
    (LieType::A, 1),
    (LieType::A, 2),
    (LieType::A, 3),
    (LieType::A, 4),
    (LieType::B, 2),
    (LieType::B, 3),
    (LieType::C, 2),
    (LieType::C, 3),
    (LieType::D, 4),
    (LieType::G, 2),
];

/// Collects failure messages for one criterion.
#[derive(Default)]
struct Failures(Vec<String>);

impl Failures {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }

    fn within(&mut self, start: Instant, limit: Duration, what: &str) {
        let elapsed = start.elapsed();
        self.check(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"));
    }

    fn finish(self) -> Outcome {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(self.0)
        }
    }
}

fn build((t, r): (LieType, usize)) -> Artifacts {
    Artifacts::build(t, r).unwrap_or_else(|e| panic!("{t}{r}: {e}"))
}

fn name((t, r): (LieType, usize)) -> String {
    format!("{t}{r}")
}

fn classical_matrices(art: &Artifacts) -> Vec<QMatrix> {
    (0..art.rs.rank)
        .map(|i| classical_chevalley(&art.rs, &art.weyl, &art.basis, i))
        .collect()
}

fn rank_one_closed_form() -> Outcome {
    let start = Instant::now();
    let mut f = Failures::default();
    let art = build(A1);

    let ql = ql_vars(1);
    let expect_f = SparsePoly::from_terms(
        &ql,
        [(MultiIndex(vec![0, 2]), int(2)), (MultiIndex(vec![1, 0]), int(1))],
    );
    f.check(art.integrals[0].big_f == expect_f, || {
        format!("F1 = {}", art.integrals[0].big_f)
    });

    let expect_h = DiffOp::term(1, MultiIndex(vec![0]), MultiIndex(vec![2]), 0, int(2))
        .add(&DiffOp::term(1, MultiIndex(vec![1]), MultiIndex(vec![0]), 0, int(-2)))
        .unwrap();
    f.check(art.hamiltonian == expect_h, || format!("H = {}", art.hamiltonian));

    let q = q_vars(1);
    let b = &art.matrices[0];
    let direct = b
        .mul(b)
        .scale(&int(2))
        .sub(&QMatrix::identity(&q, 2).scale_poly(&SparsePoly::var(&q, 0).scale(&int(2))));
    f.check(direct.is_zero(), || "2B^2 - 2q Id != 0".into());
    f.check(
        eval_relation(&art.integrals[0].big_f, &art.rs, &art.matrices).is_zero(),
        || "evaluated relation is nonzero".into(),
    );
    let rel = kim_relation(&art.integrals[0].big_f, &art.rs).to_string();
    f.check(rel == "2*l1^2 - 2*q1", || format!("relation {rel}"));
    f.within(start, Duration::from_secs(1), "A1");
    f.finish()
}

fn kim_relations() -> Outcome {
    let mut f = Failures::default();
    for ty in [A2, A3, B2] {
        let start = Instant::now();
        let art = build(ty);
        let rep = verify_relations(&art.big_fs(), &art.matrices, &art.rs, &art.basis);
        f.check(rep.passed && rep.checks.len() == art.rs.rank, || {
            format!("{}: {:?}", name(ty), rep.checks)
        });
        for (k, big_f) in art.big_fs().iter().enumerate() {
            let m = eval_relation(big_f, &art.rs, &art.matrices);
            f.check(m.is_zero(), || format!("{}: relation {} is nonzero", name(ty), k + 1));
        }
        if ty == A3 {
            f.within(start, Duration::from_secs(120), "A3");
        }
    }
    f.finish()
}

fn hypothesis_suite() -> Outcome {
    let mut f = Failures::default();
    for ty in [A1, A2, A3, B2, G2] {
        let art = build(ty);
        let rep = verify_hypotheses(&art.matrices, &art.rs, &art.weyl, &art.basis);
        for key in HYPOTHESIS_CHECKS {
            let ok = rep.get(key).is_some_and(|c| c.passed);
            f.check(ok, || format!("{}: check {key} did not pass", name(ty)));
        }
        f.check(rep.passed, || format!("{}: report not passed", name(ty)));
    }
    for ty in [A2, B2] {
        let art = build(ty);
        for key in HYPOTHESIS_CHECKS {
            let mut mats = art.matrices.clone();
            inject_fault(&mut mats, key, &art.weyl, &art.basis).unwrap();
            let rep = verify_hypotheses(&mats, &art.rs, &art.weyl, &art.basis);
            let caught = rep.get(key).is_some_and(|c| !c.passed && !c.failures.is_empty());
            f.check(caught && !rep.passed, || {
                format!("{}: fault {key} not detected", name(ty))
            });
        }
    }
    let art = build(A1);
    let mut mats = art.matrices.clone();
    inject_fault(&mut mats, "v", &art.weyl, &art.basis).unwrap();
    let rep = verify_hypotheses(&mats, &art.rs, &art.weyl, &art.basis);
    let v = rep.get("v").map(|c| c.failures.clone()).unwrap_or_default();
    f.check(v == ["row 1: 4*q1 != 2*q1"], || format!("A1 fault v: {v:?}"));
    f.finish()
}

fn operator_commutants() -> Outcome {
    let mut f = Failures::default();
    for ty in [A2, B2, G2] {
        let art = build(ty);
        for (k, dk) in art.operators.iter().enumerate() {
            let c = commutator_diffop(dk, &art.hamiltonian).unwrap();
            f.check(c.is_zero(), || format!("{}: [D{}, H] = {c}", name(ty), k + 1));
        }
        if ty != G2 {
            for a in &art.integrals {
                for b in &art.integrals {
                    let c = commutator_uenv(&a.omega, &b.omega).unwrap();
                    f.check(c.is_zero(), || {
                        format!("{}: [Omega{}, Omega{}] != 0", name(ty), a.k, b.k)
                    });
                }
            }
        }
    }
    f.finish()
}

fn consistency_of_limits() -> Outcome {
    let mut f = Failures::default();
    for ty in [A1, A2, A3, B2, G2] {
        let art = build(ty);
        let l = art.rs.rank;
        let lam = lambda_vars(l);
        let doubled: Vec<SparsePoly> = (0..l).map(|i| SparsePoly::var(&lam, i).scale(&int(2))).collect();
        let ql = ql_vars(l);
        let subs: Vec<SparsePoly> = (0..2 * l)
            .map(|i| {
                if i < l {
                    SparsePoly::var(&ql, i).scale(&-art.rs.coroot_gram[i][i].clone())
                } else {
                    SparsePoly::var(&ql, i)
                }
            })
            .collect();
        for (it, dk) in art.integrals.iter().zip(&art.operators) {
            let (limit, h_free) = dk.potential_free_limit();
            f.check(h_free, || format!("{}: D{} limit depends on h", name(ty), it.k));
            let u2 = it.u.substitute(&doubled).unwrap();
            f.check(limit == u2, || {
                format!("{}: D{} limit {limit} != u(2L) {u2}", name(ty), it.k)
            });
            let expect = it
                .big_f
                .substitute(&subs)
                .unwrap()
                .scale(&rational::pow(&int(2), it.degree as i32));
            f.check(dk.symbol() == expect, || {
                format!("{}: symbol of D{} != 2^d F", name(ty), it.k)
            });
        }
    }
    f.finish()
}

/// `{f, g}` for `{L_i, Q_j} = 2 delta_ij Q_j`, variables ordered `(Q, L)`.
fn bracket(a: &SparsePoly, b: &SparsePoly, l: usize) -> SparsePoly {
    let vars = a.vars().clone();
    let mut out = SparsePoly::zero(&vars);
    for i in 0..l {
        let two_q = SparsePoly::var(&vars, i).scale(&int(2));
        let t = &(&a.partial(l + i) * &b.partial(i)) - &(&a.partial(i) * &b.partial(l + i));
        out = &out + &(&two_q * &t);
    }
    out
}

fn classical_cross_check() -> Outcome {
    let mut f = Failures::default();
    for ty in [A1, A2, A3, B2] {
        let art = build(ty);
        let f1 = &art.integrals[0].big_f;
        for it in &art.integrals {
            let br = bracket(&it.big_f, f1, art.rs.rank);
            f.check(br.is_zero(), || format!("{}: {{F{}, F1}} = {br}", name(ty), it.k));
        }
    }
    f.finish()
}

fn flat_sections() -> Outcome {
    let start = Instant::now();
    let mut f = Failures::default();
    let art = build(A2);
    let ops = art.named_operators();
    let rep = verify_flat_sections(&art.matrices, &art.basis, &ops, 3, None).unwrap();
    f.check(rep.checks.len() == ops.len() + 1, || "missing checks".into());
    for c in &rep.checks {
        f.check(c.passed, || {
            format!("{}: {:?}", c.name, c.failures.iter().take(3).collect::<Vec<_>>())
        });
    }
    f.within(start, Duration::from_secs(300), "A2 flat sections");
    f.finish()
}

fn borel_limit() -> Outcome {
    let mut f = Failures::default();
    for ty in [A1, A2, A3, B2, G2] {
        let art = build(ty);
        let classical = classical_matrices(&art);
        for (k, u) in art.invariants.generators.iter().enumerate() {
            f.check(eval_lambda_poly(u, &classical).is_zero(), || {
                format!("{}: u{} != 0", name(ty), k + 1)
            });
        }
        for (i, (b, c)) in art.matrices.iter().zip(&classical).enumerate() {
            f.check(b.q_zero() == *c, || {
                format!("{}: B{}|q=0 != classical", name(ty), i + 1)
            });
        }
    }
    f.finish()
}

fn structural_certificates() -> Outcome {
    let mut f = Failures::default();
    for ty in ALL_SUPPORTED {
        let rs = RootSystem::new(ty.0, ty.1).unwrap();
        let minors = rs.gram_minors();
        f.check(minors.iter().all(|m| *m > int(0)), || {
            format!("{}: minors {minors:?}", name(ty))
        });
        let w = WeylGroup::generate(&rs);
        let degrees = fundamental_degrees(&rs, &w).unwrap();
        let product: usize = degrees.iter().map(|&d| d as usize).product();
        f.check(product == w.order(), || {
            format!("{}: prod {degrees:?} != |W| = {}", name(ty), w.order())
        });
        let inv = qtoda_core::invariants::chevalley_generators(&rs, &w).unwrap();
        let jac = jacobian_determinant(&inv);
        let positive = rs.num_positive_roots() as u32;
        f.check(
            !jac.is_zero() && jac.is_homogeneous() && jac.total_degree() == Some(positive),
            || format!("{}: Jacobian degree {:?} != {positive}", name(ty), jac.total_degree()),
        );
    }
    f.finish()
}

fn determinism() -> Outcome {
    let mut f = Failures::default();
    let cfg = PipelineConfig::new(LieType::A, 2);
    let first = json::to_canonical_string(&run_pipeline(&cfg).unwrap()).unwrap();
    let second = json::to_canonical_string(&run_pipeline(&cfg).unwrap()).unwrap();
    f.check(first == second, || "reports differ".into());
    f.check(first.contains("\"passed\": true"), || "report did not pass".into());
    f.finish()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("rank-one closed form", rank_one_closed_form),
        ("Kim relations A2 A3 B2", kim_relations),
        ("hypothesis suite and fault negatives", hypothesis_suite),
        ("operator commutants", operator_commutants),
        ("consistency of limits", consistency_of_limits),
        ("classical Poisson cross-check", classical_cross_check),
        ("flat sections A2 N=3", flat_sections),
        ("Borel limit", borel_limit),
        ("structural certificates", structural_certificates),
        ("determinism", determinism),
    ];
    let mut all = true;
    for (n, (label, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(vec![format!("panic: {}", msg.unwrap_or_default())])
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("criterion {:>2} PASS  {label} ({secs:.2} s)", n + 1),
            Err(msgs) => {
                all = false;
                println!("criterion {:>2} FAIL  {label} ({secs:.2} s)", n + 1);
                for m in msgs {
                    println!("    {m}");
                }
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
