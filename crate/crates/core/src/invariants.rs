//! W-invariant polynomials on `t`: Reynolds averaging, fundamental degrees and
//! a deterministic choice of Chevalley generators `u_1, ..., u_l`.
//!
//! `u_1` is always `sum_{i,j} G_ij lambda_i lambda_j`. A higher generator of
//! degree `d` is the first candidate `R((rho + m lambda_j)^d)`, scanning
//! `j = 1, ..., l` and within each `j` the steps `m = 0, 1, ...`, that is not in
//! the span of products of the generators chosen so far. Here `R` is the
//! Reynolds operator and `rho = lambda_1 + ... + lambda_l`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exactalg::linalg;
use crate::exactalg::rational::{int, Rational};
use crate::exactalg::{MultiIndex, SparsePoly, VarSet};
use crate::rootsys::{RootSystem, WeylGroup};
use crate::Error;

/// Perturbation steps tried per generator before giving up.
const MAX_PERTURBATION: i64 = 16;
/// Largest degree scanned for new invariants.
const MAX_DEGREE: u32 = 30;

pub fn lambda_vars(rank: usize) -> Arc<VarSet> {
    VarSet::indexed("l", rank, 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantSet {
    pub degrees: Vec<u32>,
    pub generators: Vec<SparsePoly>,
}

/// The action of `W` on `S(t*) = Q[lambda_1, ..., lambda_l]`, stored as the
/// images of the variables under every group element.
pub struct PolyAction {
    vars: Arc<VarSet>,
    images: Vec<Vec<SparsePoly>>,
    simple: Vec<usize>,
}

impl PolyAction {
    pub fn new(w: &WeylGroup) -> Self {
        let l = w.rank;
        let vars = lambda_vars(l);
        // w . lambda_i = sum_j M[j][i] lambda_j
        let images = w
            .elements
            .iter()
            .map(|e| {
                (0..l)
                    .map(|i| {
                        SparsePoly::from_terms(
                            &vars,
                            (0..l).map(|j| (MultiIndex::unit(l, j), int(e.matrix[j * l + i]))),
                        )
                    })
                    .collect()
            })
            .collect();
        PolyAction {
            vars,
            images,
            simple: w.simple.clone(),
        }
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn order(&self) -> usize {
        self.images.len()
    }

    pub fn act(&self, w: usize, p: &SparsePoly) -> SparsePoly {
        p.substitute(&self.images[w]).expect("polynomial in lambda variables")
    }

    /// `(1/|W|) sum_w w.p`.
    pub fn reynolds(&self, p: &SparsePoly) -> SparsePoly {
        let mut acc = SparsePoly::zero(&self.vars);
        for w in 0..self.order() {
            acc = &acc + &self.act(w, p);
        }
        acc.scale(&(Rational::from_integer(1.into()) / int(self.order() as i64)))
    }

    /// Invariance under every simple reflection, hence under `W`.
    pub fn is_invariant(&self, p: &SparsePoly) -> bool {
        self.simple.iter().all(|&s| self.act(s, p) == *p)
    }
}

pub fn reynolds(p: &SparsePoly, w: &WeylGroup) -> SparsePoly {
    PolyAction::new(w).reynolds(p)
}

fn coefficient_rows(polys: &[SparsePoly], basis: &[MultiIndex]) -> Vec<Vec<Rational>> {
    polys
        .iter()
        .map(|p| basis.iter().map(|m| p.coeff(m)).collect())
        .collect()
}

/// All products of `gens` (with multiplicity) of total weighted degree `d`.
fn products_of_degree(gens: &[SparsePoly], degrees: &[u32], d: u32, vars: &Arc<VarSet>) -> Vec<SparsePoly> {
    fn rec(
        gens: &[SparsePoly],
        degrees: &[u32],
        start: usize,
        remaining: u32,
        acc: SparsePoly,
        out: &mut Vec<SparsePoly>,
    ) {
        if remaining == 0 {
            out.push(acc);
            return;
        }
        for k in start..gens.len() {
            if degrees[k] <= remaining {
                rec(gens, degrees, k, remaining - degrees[k], &acc * &gens[k], out);
            }
        }
    }
    let mut out = Vec::new();
    rec(gens, degrees, 0, d, SparsePoly::one(vars), &mut out);
    out
}

/// Number of monomials in generators of the given degrees with weighted degree `d`.
fn count_products(degrees: &[u32], d: u32) -> usize {
    let mut ways = vec![0usize; d as usize + 1];
    ways[0] = 1;
    for &k in degrees {
        for s in k as usize..=d as usize {
            ways[s] += ways[s - k as usize];
        }
    }
    ways[d as usize]
}

/// Dimension of the degree-`d` invariants: rank of the Reynolds image of the
/// degree-`d` monomials.
pub fn invariant_dimension(action: &PolyAction, d: u32) -> usize {
    let l = action.vars().len();
    let basis = MultiIndex::all_of_degree(l, d);
    let images: Vec<SparsePoly> = basis
        .iter()
        .map(|m| action.reynolds(&SparsePoly::monomial(action.vars(), m.clone(), int(1))))
        .collect();
    linalg::rank(&coefficient_rows(&images, &basis))
}

fn degrees_from_action(action: &PolyAction, rank: usize) -> Result<Vec<u32>, Error> {
    let mut degrees = Vec::new();
    for d in 1..=MAX_DEGREE {
        let dim = invariant_dimension(action, d);
        let old = count_products(&degrees, d);
        for _ in old..dim {
            degrees.push(d);
        }
        if degrees.len() >= rank {
            return Ok(degrees);
        }
    }
    Err(Error::IndependenceSearch { degree: MAX_DEGREE })
}

/// Degrees of the basic invariants, ascending.
pub fn fundamental_degrees(rs: &RootSystem, w: &WeylGroup) -> Result<Vec<u32>, Error> {
    let degrees = degrees_from_action(&PolyAction::new(w), rs.rank)?;
    let product: usize = degrees.iter().map(|&d| d as usize).product();
    if degrees.len() != rs.rank || product != w.order() {
        return Err(Error::Precondition(format!(
            "degrees {degrees:?} do not multiply to |W| = {}",
            w.order()
        )));
    }
    Ok(degrees)
}

/// `u_1 = sum_{i,j} G_ij lambda_i lambda_j`.
pub fn quadratic_invariant(rs: &RootSystem) -> SparsePoly {
    let l = rs.rank;
    let vars = lambda_vars(l);
    SparsePoly::from_terms(
        &vars,
        (0..l).flat_map(|i| {
            (0..l).map(move |j| {
                (
                    MultiIndex::unit(l, i).add(&MultiIndex::unit(l, j)),
                    rs.coroot_gram[i][j].clone(),
                )
            })
        }),
    )
}

pub fn chevalley_generators(rs: &RootSystem, w: &WeylGroup) -> Result<InvariantSet, Error> {
    let action = PolyAction::new(w);
    let degrees = fundamental_degrees(rs, w)?;
    let vars = action.vars().clone();
    let l = rs.rank;
    let rho = SparsePoly::from_terms(&vars, (0..l).map(|i| (MultiIndex::unit(l, i), int(1))));

    let mut gens = vec![quadratic_invariant(rs)];
    for &d in &degrees[1..] {
        let basis = MultiIndex::all_of_degree(l, d);
        let span = products_of_degree(&gens, &degrees[..gens.len()], d, &vars);
        let base_rank = linalg::rank(&coefficient_rows(&span, &basis));
        let mut found = None;
        let steps = (0..l).flat_map(|j| (usize::from(j > 0) as i64..MAX_PERTURBATION).map(move |m| (j, m)));
        for (j, m) in steps {
            let v = &rho + &SparsePoly::var(&vars, j).scale(&int(m));
            let cand = action.reynolds(&v.pow(d));
            if cand.is_zero() {
                continue;
            }
            let mut rows = coefficient_rows(&span, &basis);
            rows.push(basis.iter().map(|b| cand.coeff(b)).collect());
            if linalg::rank(&rows) > base_rank {
                found = Some(cand);
                break;
            }
        }
        gens.push(found.ok_or(Error::IndependenceSearch { degree: d })?);
    }

    let set = InvariantSet {
        degrees,
        generators: gens,
    };
    if jacobian_determinant(&set).is_zero() {
        return Err(Error::IndependenceSearch {
            degree: *set.degrees.last().unwrap(),
        });
    }
    Ok(set)
}

/// `det(d u_k / d lambda_j)`, expanded over permutations.
pub fn jacobian_determinant(set: &InvariantSet) -> SparsePoly {
    let l = set.generators.len();
    let vars = set.generators[0].vars().clone();
    let jac: Vec<Vec<SparsePoly>> = set
        .generators
        .iter()
        .map(|u| (0..l).map(|j| u.partial(j)).collect())
        .collect();
    let mut det = SparsePoly::zero(&vars);
    for (perm, sign) in permutations(l) {
        let mut term = SparsePoly::constant(&vars, int(sign));
        for (k, &j) in perm.iter().enumerate() {
            term = &term * &jac[k][j];
            if term.is_zero() {
                break;
            }
        }
        det = &det + &term;
    }
    det
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            (p, if inversions % 2 == 0 { 1 } else { -1 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::LieType;

    fn setup(t: LieType, r: usize) -> (RootSystem, WeylGroup) {
        let rs = RootSystem::new(t, r).unwrap();
        let w = WeylGroup::generate(&rs);
        (rs, w)
    }

    #[test]
    fn reynolds_rank_one() {
        let (_, w) = setup(LieType::A, 1);
        let v = lambda_vars(1);
        let l = SparsePoly::var(&v, 0);
        assert_eq!(reynolds(&l.pow(2), &w), l.pow(2));
        assert!(reynolds(&l, &w).is_zero());
    }

    #[test]
    fn reynolds_is_idempotent_on_invariants() {
        let (rs, w) = setup(LieType::B, 2);
        let u1 = quadratic_invariant(&rs);
        assert_eq!(reynolds(&u1, &w), u1);
    }

    #[test]
    fn fundamental_degree_table() {
        // known degrees of the basic invariants
        let table: [(LieType, usize, &[u32]); 10] = [
            (LieType::A, 1, &[2]),
            (LieType::A, 2, &[2, 3]),
            (LieType::A, 3, &[2, 3, 4]),
            (LieType::A, 4, &[2, 3, 4, 5]),
            (LieType::B, 2, &[2, 4]),
            (LieType::B, 3, &[2, 4, 6]),
            (LieType::C, 2, &[2, 4]),
            (LieType::C, 3, &[2, 4, 6]),
            (LieType::D, 4, &[2, 4, 4, 6]),
            (LieType::G, 2, &[2, 6]),
        ];
        for (t, r, expect) in table {
            let (rs, w) = setup(t, r);
            assert_eq!(fundamental_degrees(&rs, &w).unwrap(), expect, "{t}{r}");
        }
    }

    #[test]
    fn quadratic_generator_formula() {
        let (rs, _) = setup(LieType::A, 1);
        assert_eq!(quadratic_invariant(&rs).to_string(), "2*l1^2");
        let (rs, _) = setup(LieType::A, 2);
        assert_eq!(quadratic_invariant(&rs).to_string(), "2*l1^2 - 2*l1*l2 + 2*l2^2");
    }

    #[test]
    fn a2_cubic_generator() {
        let (rs, w) = setup(LieType::A, 2);
        let set = chevalley_generators(&rs, &w).unwrap();
        let u2 = &set.generators[1];
        assert!(u2.is_homogeneous());
        assert_eq!(u2.total_degree(), Some(3));
        let action = PolyAction::new(&w);
        assert!(action.is_invariant(u2));
        assert_eq!(&action.reynolds(u2) - u2, SparsePoly::zero(u2.vars()));
        // rho^3 averages to zero because -rho is in the orbit of rho; the
        // schedule therefore lands on (2 lambda_1 + lambda_2)^3.
        let v = lambda_vars(2);
        let rho = SparsePoly::from_terms(&v, [(MultiIndex::unit(2, 0), int(1)), (MultiIndex::unit(2, 1), int(1))]);
        assert!(action.reynolds(&rho.pow(3)).is_zero());
        let perturbed = &rho + &SparsePoly::var(&v, 0);
        assert_eq!(*u2, action.reynolds(&perturbed.pow(3)));
    }

    #[test]
    fn generators_are_invariant_and_independent() {
        for (t, r) in [
            (LieType::A, 1),
            (LieType::A, 2),
            (LieType::A, 3),
            (LieType::B, 2),
            (LieType::C, 2),
            (LieType::G, 2),
        ] {
            let (rs, w) = setup(t, r);
            let set = chevalley_generators(&rs, &w).unwrap();
            let action = PolyAction::new(&w);
            for (u, &d) in set.generators.iter().zip(&set.degrees) {
                assert!(action.is_invariant(u), "{t}{r}");
                assert!(u.is_homogeneous());
                assert_eq!(u.total_degree(), Some(d));
            }
            assert_eq!(set.generators[0], quadratic_invariant(&rs));
            let jac = jacobian_determinant(&set);
            assert!(!jac.is_zero());
            assert!(jac.is_homogeneous());
            assert_eq!(jac.total_degree(), Some(rs.num_positive_roots() as u32));
        }
    }
}
