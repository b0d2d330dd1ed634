//! Schubert-basis model of `H*(G/B)` and the quantum multiplication-by-divisor
//! matrices `B_i` with entries in `Q[q_1..q_l]`.
//!
//! Convention: `(B_i)[v][w]` is the coefficient of `sigma_v` in `lambda_i o sigma_w`,
//! with rows and columns in [`SchubertBasis`] order (decreasing length, ties by
//! element index). The dual operators are `A_i = B_i^T` in the dual basis.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exactalg::linalg::DenseMatrix;
use crate::exactalg::rational::{self, int, Rational};
use crate::exactalg::{MultiIndex, SparsePoly, VarSet};
use crate::rootsys::{RootSystem, WeylGroup};
use crate::Error;

/// `q_1..q_l`, each of cohomological degree 4.
pub fn q_vars(rank: usize) -> Arc<VarSet> {
    VarSet::indexed("q", rank, 4)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchubertBasis {
    /// Weyl element index at each basis position.
    pub elements: Vec<usize>,
    pub lengths: Vec<usize>,
    /// Reduced words, 1-based, for display.
    pub words: Vec<Vec<usize>>,
    #[serde(skip)]
    position: Vec<usize>,
    pub identity_pos: usize,
    pub longest_pos: usize,
}

impl SchubertBasis {
    pub fn new(w: &WeylGroup) -> Self {
        let mut elements: Vec<usize> = (0..w.order()).collect();
        elements.sort_by_key(|&k| (std::cmp::Reverse(w.length(k)), k));
        let mut position = vec![0; w.order()];
        for (p, &k) in elements.iter().enumerate() {
            position[k] = p;
        }
        SchubertBasis {
            lengths: elements.iter().map(|&k| w.length(k)).collect(),
            words: elements
                .iter()
                .map(|&k| w.elements[k].word.iter().map(|i| i + 1).collect())
                .collect(),
            identity_pos: position[w.identity()],
            longest_pos: position[w.longest],
            elements,
            position,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Basis position of a Weyl element index.
    pub fn position(&self, element: usize) -> usize {
        self.position[element]
    }

    /// The vector of `sigma_e`.
    pub fn identity_vector(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.len()];
        v[self.identity_pos] = Rational::one();
        v
    }
}

/// Square matrix over `Q[q_1..q_l]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    vars: Arc<VarSet>,
    entries: Vec<Vec<SparsePoly>>,
}

impl QMatrix {
    pub fn zero(vars: &Arc<VarSet>, n: usize) -> Self {
        QMatrix {
            vars: vars.clone(),
            entries: vec![vec![SparsePoly::zero(vars); n]; n],
        }
    }

    pub fn identity(vars: &Arc<VarSet>, n: usize) -> Self {
        let mut m = Self::zero(vars, n);
        for i in 0..n {
            m.entries[i][i] = SparsePoly::one(vars);
        }
        m
    }

    pub fn from_rational(vars: &Arc<VarSet>, a: &DenseMatrix) -> Self {
        let entries = a
            .iter()
            .map(|row| row.iter().map(|c| SparsePoly::constant(vars, c.clone())).collect())
            .collect();
        QMatrix {
            vars: vars.clone(),
            entries,
        }
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn rank(&self) -> usize {
        self.vars.len()
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> &SparsePoly {
        &self.entries[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: SparsePoly) {
        self.entries[r][c] = p;
    }

    pub fn add_to(&mut self, r: usize, c: usize, p: &SparsePoly) {
        self.entries[r][c] = &self.entries[r][c] + p;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|row| row.iter().all(SparsePoly::is_zero))
    }

    /// Nonzero entries in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, &SparsePoly)> {
        self.entries.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(move |(c, p)| (r, c, p))
        })
    }

    pub fn map(&self, f: impl Fn(&SparsePoly) -> SparsePoly) -> QMatrix {
        QMatrix {
            vars: self.vars.clone(),
            entries: self.entries.iter().map(|row| row.iter().map(&f).collect()).collect(),
        }
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        let mut out = self.clone();
        for (r, c, p) in other.nonzero() {
            out.add_to(r, c, p);
        }
        out
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> QMatrix {
        self.map(|p| p.scale(c))
    }

    pub fn scale_poly(&self, s: &SparsePoly) -> QMatrix {
        self.map(|p| p * s)
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        let n = self.size();
        let mut out = Self::zero(&self.vars, n);
        for (r, k, a) in self.nonzero() {
            for c in 0..n {
                let b = &other.entries[k][c];
                if !b.is_zero() {
                    out.entries[r][c] = &out.entries[r][c] + &(a * b);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> QMatrix {
        let n = self.size();
        let mut out = Self::zero(&self.vars, n);
        for (r, c, p) in self.nonzero() {
            out.entries[c][r] = p.clone();
        }
        out
    }

    pub fn mul_vec(&self, v: &[SparsePoly]) -> Vec<SparsePoly> {
        let mut out = vec![SparsePoly::zero(&self.vars); self.size()];
        for (r, c, p) in self.nonzero() {
            if !v[c].is_zero() {
                out[r] = &out[r] + &(p * &v[c]);
            }
        }
        out
    }

    /// Column `c` as a vector.
    pub fn column(&self, c: usize) -> Vec<SparsePoly> {
        self.entries.iter().map(|row| row[c].clone()).collect()
    }

    /// The `q = 0` specialization.
    pub fn q_zero(&self) -> QMatrix {
        self.map(|p| SparsePoly::constant(&self.vars, p.constant_term()))
    }

    /// `q_i d/dq_i` applied entrywise.
    pub fn euler(&self, i: usize) -> QMatrix {
        self.map(|p| p.euler(i))
    }

    /// Rational coefficient matrices `M^{(d)}` with `M = sum_d M^{(d)} q^d`.
    pub fn coefficient_matrices(&self) -> BTreeMap<MultiIndex, DenseMatrix> {
        let n = self.size();
        let mut out: BTreeMap<MultiIndex, DenseMatrix> = BTreeMap::new();
        for (r, c, p) in self.nonzero() {
            for (m, v) in p.terms() {
                let mat = out
                    .entry(m.clone())
                    .or_insert_with(|| vec![vec![Rational::zero(); n]; n]);
                mat[r][c] = v.clone();
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QTermJson {
    coeff: String,
    exps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QEntryJson {
    row: usize,
    col: usize,
    terms: Vec<QTermJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QMatrixJson {
    vars: Vec<String>,
    size: usize,
    entries: Vec<QEntryJson>,
}

impl Serialize for QMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QMatrixJson {
            vars: self.vars.names.clone(),
            size: self.size(),
            entries: self
                .nonzero()
                .map(|(row, col, p)| QEntryJson {
                    row,
                    col,
                    terms: p
                        .terms()
                        .rev()
                        .map(|(m, c)| QTermJson {
                            coeff: rational::to_string(c),
                            exps: m.0.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = QMatrixJson::deserialize(d)?;
        let l = raw.vars.len();
        let vars = VarSet::new(raw.vars, vec![4; l]);
        let mut m = QMatrix::zero(&vars, raw.size);
        for e in raw.entries {
            if e.row >= raw.size || e.col >= raw.size {
                return Err(D::Error::custom(format!(
                    "entry ({}, {}) outside a {n}x{n} matrix",
                    e.row,
                    e.col,
                    n = raw.size
                )));
            }
            let mut p = SparsePoly::zero(&vars);
            for t in e.terms {
                if t.exps.len() != l {
                    return Err(D::Error::custom(format!("exponent vector must have length {l}")));
                }
                p.add_term(MultiIndex(t.exps), rational::parse(&t.coeff).map_err(D::Error::custom)?);
            }
            m.entries[e.row][e.col] = p;
        }
        Ok(m)
    }
}

fn q_monomial(vars: &Arc<VarSet>, coroot: &[i64], c: i64) -> SparsePoly {
    SparsePoly::monomial(vars, MultiIndex(coroot.iter().map(|&x| x as u32).collect()), int(c))
}

fn chevalley(rs: &RootSystem, w: &WeylGroup, basis: &SchubertBasis, i: usize, quantum: bool) -> QMatrix {
    let vars = q_vars(rs.rank);
    let n = basis.len();
    let mut m = QMatrix::zero(&vars, n);
    for (col, &x) in basis.elements.iter().enumerate() {
        let lx = w.length(x) as i64;
        for (k, root) in rs.positive_roots.iter().enumerate() {
            let c = root.coroot[i];
            if c == 0 {
                continue;
            }
            let y = w.mul_reflection(x, k);
            let ly = w.length(y) as i64;
            let row = basis.position(y);
            if ly == lx + 1 {
                m.add_to(row, col, &SparsePoly::constant(&vars, int(c)));
            } else if quantum && ly == lx + 1 - 2 * root.coroot_height() {
                m.add_to(row, col, &q_monomial(&vars, &root.coroot, c));
            }
        }
    }
    m
}

/// Classical Chevalley (Monk) matrix of multiplication by `[lambda_i]`.
pub fn classical_chevalley(rs: &RootSystem, w: &WeylGroup, basis: &SchubertBasis, i: usize) -> QMatrix {
    chevalley(rs, w, basis, i, false)
}

/// Quantum Chevalley matrix `B_i`, checked against
/// `[lambda_i] * [lambda_j] = [lambda_i][lambda_j] + delta_ij q_j` on divisor columns.
pub fn quantum_chevalley(rs: &RootSystem, w: &WeylGroup, basis: &SchubertBasis, i: usize) -> Result<QMatrix, Error> {
    let b = chevalley(rs, w, basis, i, true);
    let classical = classical_chevalley(rs, w, basis, i);
    let vars = b.vars().clone();
    for j in 0..rs.rank {
        let col = basis.position(w.simple[j]);
        for row in 0..basis.len() {
            let mut expect = classical.get(row, col).clone();
            if i == j && row == basis.identity_pos {
                expect = &expect + &SparsePoly::var(&vars, j);
            }
            if *b.get(row, col) != expect {
                return Err(Error::Precondition(format!(
                    "divisor product check failed for B_{} at column s_{}, row {}",
                    i + 1,
                    j + 1,
                    row
                )));
            }
        }
    }
    Ok(b)
}

/// All `B_1..B_l`.
pub fn quantum_matrices(rs: &RootSystem, w: &WeylGroup, basis: &SchubertBasis) -> Result<Vec<QMatrix>, Error> {
    (0..rs.rank).map(|i| quantum_chevalley(rs, w, basis, i)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairingData {
    /// `(sigma_v, sigma_w) = delta_{w, w0 v}` in basis order.
    #[serde(serialize_with = "serialize_dense")]
    pub matrix: DenseMatrix,
    /// `dual_of[p]` is the position of the Schubert class paired to 1 with position `p`.
    pub dual_of: Vec<usize>,
}

fn serialize_dense<S: Serializer>(m: &DenseMatrix, s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(rational::to_string).collect()).collect();
    v.serialize(s)
}

pub fn pairing_data(w: &WeylGroup, basis: &SchubertBasis) -> PairingData {
    let n = basis.len();
    let mut matrix = vec![vec![Rational::zero(); n]; n];
    let mut dual_of = vec![0; n];
    for (p, &v) in basis.elements.iter().enumerate() {
        let q = basis.position(w.mul(w.longest, v));
        matrix[p][q] = Rational::one();
        dual_of[p] = q;
    }
    PairingData { matrix, dual_of }
}

/// `A_i = B_i^T` split as `(A'_i, A''_i)` into its `q = 0` part and the rest.
pub fn dual_split(b: &QMatrix) -> (QMatrix, QMatrix) {
    let a = b.transpose();
    let a0 = a.q_zero();
    let a1 = a.sub(&a0);
    (a0, a1)
}

/// Evaluates `sum_J c_J(q) Lambda^J` with `Lambda_i -> mats[i]`.
pub fn eval_matrix_poly(terms: &BTreeMap<MultiIndex, SparsePoly>, mats: &[QMatrix]) -> QMatrix {
    let n = mats[0].size();
    let vars = mats[0].vars().clone();
    let mut cache: BTreeMap<MultiIndex, QMatrix> = BTreeMap::new();
    cache.insert(MultiIndex::zeros(mats.len()), QMatrix::identity(&vars, n));
    let mut out = QMatrix::zero(&vars, n);
    for (j, c) in terms {
        let pw = matrix_power(j, mats, &mut cache);
        out = out.add(&pw.scale_poly(c));
    }
    out
}

fn matrix_power(j: &MultiIndex, mats: &[QMatrix], cache: &mut BTreeMap<MultiIndex, QMatrix>) -> QMatrix {
    if let Some(m) = cache.get(j) {
        return m.clone();
    }
    let i = j.0.iter().position(|&e| e > 0).unwrap();
    let prev = j.checked_sub(&MultiIndex::unit(j.len(), i)).unwrap();
    let m = matrix_power(&prev, mats, cache).mul(&mats[i]);
    cache.insert(j.clone(), m.clone());
    m
}

/// `p(Lambda)` for a polynomial in `lambda_1..lambda_l` with constant coefficients.
pub fn eval_lambda_poly(p: &SparsePoly, mats: &[QMatrix]) -> QMatrix {
    let vars = mats[0].vars().clone();
    let terms = p
        .terms()
        .map(|(m, c)| (m.clone(), SparsePoly::constant(&vars, c.clone())))
        .collect();
    eval_matrix_poly(&terms, mats)
}

/// `F(Q, Lambda)` with `Q_i -> -G_ii q_i` and `Lambda_i -> mats[i]`; `F` is in the
/// `(Q_1..Q_l, L_1..L_l)` variables.
pub fn eval_relation(big_f: &SparsePoly, rs: &RootSystem, mats: &[QMatrix]) -> QMatrix {
    let l = rs.rank;
    let vars = mats[0].vars().clone();
    let mut grouped: BTreeMap<MultiIndex, SparsePoly> = BTreeMap::new();
    for (m, c) in big_f.terms() {
        let lam = MultiIndex(m.0[l..].to_vec());
        let mut coef = c.clone();
        for i in 0..l {
            coef *= rational::pow(&-rs.coroot_gram[i][i].clone(), m.0[i] as i32);
        }
        let qm = SparsePoly::monomial(&vars, MultiIndex(m.0[..l].to_vec()), coef);
        let e = grouped.entry(lam).or_insert_with(|| SparsePoly::zero(&vars));
        *e = &*e + &qm;
    }
    eval_matrix_poly(&grouped, mats)
}

/// The relation `F_k(-G_ii q_i, lambda)` as a polynomial in `q` (degree 4) and
/// `lambda` (degree 2).
pub fn kim_relation(big_f: &SparsePoly, rs: &RootSystem) -> SparsePoly {
    let l = rs.rank;
    let names = (1..=l).map(|i| format!("q{i}")).chain((1..=l).map(|i| format!("l{i}")));
    let vars = VarSet::new(names, [vec![4; l], vec![2; l]].concat());
    let mut p = SparsePoly::zero(&vars);
    for (m, c) in big_f.terms() {
        let mut coef = c.clone();
        for i in 0..l {
            coef *= rational::pow(&-rs.coroot_gram[i][i].clone(), m.0[i] as i32);
        }
        p.add_term(m.clone(), coef);
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: &str, failures: Vec<String>) -> Self {
        Check {
            name: name.to_string(),
            passed: failures.is_empty(),
            failures,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn from_checks(checks: Vec<Check>) -> Self {
        CheckReport {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Names of the hypothesis checks, in report order; also the fault-injection keys.
pub const HYPOTHESIS_CHECKS: [&str; 7] = [
    "grading",
    "classical",
    "commute",
    "v",
    "symmetry",
    "divisor",
    "triangular",
];

fn vec_diff(a: &[SparsePoly], b: &[SparsePoly]) -> Vec<String> {
    a.iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(r, (x, y))| format!("row {r}: {x} != {y}"))
        .collect()
}

fn mat_diff(label: &str, a: &QMatrix, b: &QMatrix) -> Vec<String> {
    a.sub(b)
        .nonzero()
        .map(|(r, c, p)| format!("{label} entry ({r}, {c}): difference {p}"))
        .collect()
}

/// Checks the hypotheses on `B_1..B_l`: grading, classical limit, pairwise
/// commutation, the quadratic identity on `sigma_e`, the symmetry
/// `q_i d/dq_i B_j = q_j d/dq_j B_i`, the divisor structure, and the
/// triangular split of `A_i = B_i^T`.
pub fn verify_hypotheses(mats: &[QMatrix], rs: &RootSystem, w: &WeylGroup, basis: &SchubertBasis) -> CheckReport {
    let l = rs.rank;
    let n = basis.len();
    let vars = q_vars(l);

    let mut grading = Vec::new();
    let mut divisor = Vec::new();
    for (i, b) in mats.iter().enumerate() {
        for (r, c, p) in b.nonzero() {
            for (m, _) in p.terms() {
                if 2 * basis.lengths[r] + 4 * m.degree() as usize != 2 * basis.lengths[c] + 2 {
                    grading.push(format!("B_{} entry ({r}, {c}): term q^{:?}", i + 1, m.0));
                }
                if !m.is_zero() && m.0[i] == 0 {
                    divisor.push(format!(
                        "B_{} entry ({r}, {c}): term q^{:?} lacks q_{}",
                        i + 1,
                        m.0,
                        i + 1
                    ));
                }
            }
        }
    }

    let mut classical = Vec::new();
    for (i, b) in mats.iter().enumerate() {
        classical.extend(mat_diff(
            &format!("B_{}|q=0", i + 1),
            &b.q_zero(),
            &classical_chevalley(rs, w, basis, i),
        ));
    }

    let mut commute = Vec::new();
    let mut symmetry = Vec::new();
    for i in 0..l {
        for j in i + 1..l {
            let ab = mats[i].mul(&mats[j]);
            let ba = mats[j].mul(&mats[i]);
            commute.extend(mat_diff(&format!("[B_{}, B_{}]", i + 1, j + 1), &ab, &ba));
            symmetry.extend(mat_diff(
                &format!("d_{} B_{} - d_{} B_{}", i + 1, j + 1, j + 1, i + 1),
                &mats[j].euler(i),
                &mats[i].euler(j),
            ));
        }
    }

    let e1: Vec<SparsePoly> = (0..n)
        .map(|p| {
            if p == basis.identity_pos {
                SparsePoly::one(&vars)
            } else {
                SparsePoly::zero(&vars)
            }
        })
        .collect();
    let mut lhs = QMatrix::zero(&vars, n);
    let mut rhs = SparsePoly::zero(&vars);
    for i in 0..l {
        for j in 0..l {
            lhs = lhs.add(&mats[i].mul(&mats[j]).scale(&rs.coroot_gram[i][j]));
        }
        rhs = &rhs + &SparsePoly::var(&vars, i).scale(&rs.coroot_gram[i][i]);
    }
    let left = lhs.mul_vec(&e1);
    let right: Vec<SparsePoly> = e1.iter().map(|x| x * &rhs).collect();
    let v = vec_diff(&left, &right);

    let mut triangular = Vec::new();
    for (i, b) in mats.iter().enumerate() {
        let (a0, a1) = dual_split(b);
        for (r, c, _) in a0.nonzero() {
            if r <= c {
                triangular.push(format!("A'_{} entry ({r}, {c}) not strictly lower", i + 1));
            }
        }
        for (r, c, _) in a1.nonzero() {
            if r >= c {
                triangular.push(format!("A''_{} entry ({r}, {c}) not strictly upper", i + 1));
            }
        }
    }

    CheckReport::from_checks(vec![
        Check::new("grading", grading),
        Check::new("classical", classical),
        Check::new("commute", commute),
        Check::new("v", v),
        Check::new("symmetry", symmetry),
        Check::new("divisor", divisor),
        Check::new("triangular", triangular),
    ])
}

/// Evaluates every relation `F_k(-G_ii q_i, B)`; each must vanish both on
/// `sigma_e` and as a full matrix.
pub fn verify_relations(
    big_fs: &[SparsePoly],
    mats: &[QMatrix],
    rs: &RootSystem,
    basis: &SchubertBasis,
) -> CheckReport {
    let checks = big_fs
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let m = eval_relation(f, rs, mats);
            let mut failures: Vec<String> = m
                .column(basis.identity_pos)
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(r, p)| format!("on sigma_e, row {r}: {p}"))
                .collect();
            failures.extend(m.nonzero().map(|(r, c, p)| format!("entry ({r}, {c}): {p}")));
            Check::new(&format!("relation_{}", k + 1), failures)
        })
        .collect();
    CheckReport::from_checks(checks)
}

/// Corrupts the matrices so that the named hypothesis check fails.
pub fn inject_fault(mats: &mut [QMatrix], key: &str, w: &WeylGroup, basis: &SchubertBasis) -> Result<(), Error> {
    let l = mats.len();
    let vars = mats[0].vars().clone();
    let e = basis.identity_pos;
    let s1 = basis.position(w.simple[0]);
    let need_rank_two = |k: &str| {
        if l < 2 {
            Err(Error::Precondition(format!("fault {k:?} needs rank at least 2")))
        } else {
            Ok(())
        }
    };
    match key {
        "grading" | "triangular" => mats[0].add_to(e, e, &SparsePoly::one(&vars)),
        "classical" => mats[0].add_to(s1, e, &SparsePoly::one(&vars)),
        "v" => {
            for b in mats.iter_mut() {
                let q0 = b.q_zero();
                *b = q0.add(&b.sub(&q0).scale(&int(2)));
            }
        }
        "commute" => {
            need_rank_two(key)?;
            let s2 = basis.position(w.simple[1]);
            mats[0].add_to(e, s2, &SparsePoly::var(&vars, 0));
        }
        "symmetry" => {
            need_rank_two(key)?;
            let q0 = mats[0].q_zero();
            mats[0] = q0.add(&mats[0].sub(&q0).scale(&int(2)));
        }
        "divisor" => {
            need_rank_two(key)?;
            let s2 = basis.position(w.simple[1]);
            mats[0].add_to(e, s2, &SparsePoly::var(&vars, 1));
        }
        other => return Err(Error::UnknownFault(other.to_string())),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::chevalley_generators;
    use crate::rootsys::LieType;
    use crate::toda::{solve_omega_k, split_f};

    fn setup(t: LieType, r: usize) -> (RootSystem, WeylGroup, SchubertBasis) {
        let rs = RootSystem::new(t, r).unwrap();
        let w = WeylGroup::generate(&rs);
        let b = SchubertBasis::new(&w);
        (rs, w, b)
    }

    fn p(vars: &Arc<VarSet>, s: &str) -> SparsePoly {
        match s {
            "0" => SparsePoly::zero(vars),
            "1" => SparsePoly::one(vars),
            "q" => SparsePoly::var(vars, 0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn rank_one_matrices() {
        let (rs, w, basis) = setup(LieType::A, 1);
        assert_eq!(basis.elements, vec![1, 0]);
        assert_eq!((basis.identity_pos, basis.longest_pos), (1, 0));
        let v = q_vars(1);
        let c = classical_chevalley(&rs, &w, &basis, 0);
        assert_eq!(c.column(1), vec![p(&v, "1"), p(&v, "0")]);
        assert!(c.column(0).iter().all(SparsePoly::is_zero));
        let b = quantum_chevalley(&rs, &w, &basis, 0).unwrap();
        assert_eq!(b.column(1), vec![p(&v, "1"), p(&v, "0")]);
        assert_eq!(b.column(0), vec![p(&v, "0"), p(&v, "q")]);
        let b2 = b.mul(&b);
        assert_eq!(b2, QMatrix::identity(&v, 2).scale_poly(&p(&v, "q")));
        let pd = pairing_data(&w, &basis);
        assert_eq!(pd.matrix, vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
        assert_eq!(b.q_zero(), c);
    }

    #[test]
    fn top_class_column_vanishes_classically() {
        for (t, r) in [(LieType::A, 2), (LieType::B, 2), (LieType::G, 2), (LieType::A, 3)] {
            let (rs, w, basis) = setup(t, r);
            for i in 0..r {
                let c = classical_chevalley(&rs, &w, &basis, i);
                assert!(c.column(basis.longest_pos).iter().all(SparsePoly::is_zero));
            }
        }
    }

    #[test]
    fn hypotheses_hold() {
        for (t, r) in [
            (LieType::A, 1),
            (LieType::A, 2),
            (LieType::A, 3),
            (LieType::B, 2),
            (LieType::C, 2),
            (LieType::G, 2),
        ] {
            let (rs, w, basis) = setup(t, r);
            let mats = quantum_matrices(&rs, &w, &basis).unwrap();
            let rep = verify_hypotheses(&mats, &rs, &w, &basis);
            assert!(rep.passed, "{t}{r}: {rep:?}");
            for b in &mats {
                let (a0, _) = dual_split(b);
                let mut pw = a0.clone();
                for _ in 0..rs.num_positive_roots() {
                    pw = pw.mul(&a0);
                }
                assert!(pw.is_zero());
            }
        }
    }

    #[test]
    fn borel_relations_on_classical_matrices() {
        for (t, r) in [
            (LieType::A, 1),
            (LieType::A, 2),
            (LieType::A, 3),
            (LieType::B, 2),
            (LieType::G, 2),
        ] {
            let (rs, w, basis) = setup(t, r);
            let inv = chevalley_generators(&rs, &w).unwrap();
            let cl: Vec<QMatrix> = (0..r).map(|i| classical_chevalley(&rs, &w, &basis, i)).collect();
            for u in &inv.generators {
                assert!(eval_lambda_poly(u, &cl).is_zero(), "{t}{r}");
            }
            // a non-invariant is not killed
            let lam1 = SparsePoly::var(&crate::invariants::lambda_vars(r), 0);
            assert!(!eval_lambda_poly(&lam1, &cl).is_zero());
        }
    }

    #[test]
    fn kim_relations_vanish() {
        for (t, r) in [(LieType::A, 1), (LieType::A, 2), (LieType::B, 2)] {
            let (rs, w, basis) = setup(t, r);
            let inv = chevalley_generators(&rs, &w).unwrap();
            let mats = quantum_matrices(&rs, &w, &basis).unwrap();
            let fs: Vec<SparsePoly> = inv
                .generators
                .iter()
                .map(|u| split_f(&solve_omega_k(&rs, u).unwrap()).unwrap().0)
                .collect();
            let rep = verify_relations(&fs, &mats, &rs, &basis);
            assert!(rep.passed, "{t}{r}: {rep:?}");
        }
    }

    #[test]
    fn rank_one_relation() {
        let (rs, w, _) = setup(LieType::A, 1);
        let inv = chevalley_generators(&rs, &w).unwrap();
        let f1 = split_f(&solve_omega_k(&rs, &inv.generators[0]).unwrap()).unwrap().0;
        assert_eq!(kim_relation(&f1, &rs).to_string(), "2*l1^2 - 2*q1");
    }

    #[test]
    fn classical_matrices_fail_quadratic_identity() {
        let (rs, w, basis) = setup(LieType::A, 2);
        let cl: Vec<QMatrix> = (0..2).map(|i| classical_chevalley(&rs, &w, &basis, i)).collect();
        let rep = verify_hypotheses(&cl, &rs, &w, &basis);
        assert!(!rep.get("v").unwrap().passed);
        assert!(rep.get("classical").unwrap().passed);
    }

    #[test]
    fn every_fault_is_caught() {
        let (rs, w, basis) = setup(LieType::A, 2);
        for key in HYPOTHESIS_CHECKS {
            let mut mats = quantum_matrices(&rs, &w, &basis).unwrap();
            inject_fault(&mut mats, key, &w, &basis).unwrap();
            let rep = verify_hypotheses(&mats, &rs, &w, &basis);
            let check = rep.get(key).unwrap();
            assert!(!check.passed && !check.failures.is_empty(), "{key}");
        }
        let mut mats = quantum_matrices(&rs, &w, &basis).unwrap();
        assert!(matches!(
            inject_fault(&mut mats, "bogus", &w, &basis),
            Err(Error::UnknownFault(_))
        ));
    }

    #[test]
    fn rank_one_fault_pinpoints_quadratic_identity() {
        let (rs, w, basis) = setup(LieType::A, 1);
        let mut mats = quantum_matrices(&rs, &w, &basis).unwrap();
        inject_fault(&mut mats, "v", &w, &basis).unwrap();
        let rep = verify_hypotheses(&mats, &rs, &w, &basis);
        let failed: Vec<&str> = rep
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(failed, vec!["v"]);
        assert_eq!(rep.get("v").unwrap().failures, vec!["row 1: 4*q1 != 2*q1".to_string()]);
    }

    #[test]
    fn json_round_trip() {
        let (rs, w, basis) = setup(LieType::B, 2);
        for b in quantum_matrices(&rs, &w, &basis).unwrap() {
            let s = serde_json::to_string(&b).unwrap();
            let back: QMatrix = serde_json::from_str(&s).unwrap();
            assert_eq!(back, b);
            assert_eq!(serde_json::to_string(&back).unwrap(), s);
        }
    }
}
