//! Truncated formal flat sections of `h d/dt_i s = A_i s`, where `A_i = B_i^T`
//! acts on dual-Schubert coordinates and `q_i = e^{t_i}`.
//!
//! The section is built degree by degree in `e^t`. The degree-zero part is
//! `exp(sum t_i A'_i / h) a`. For `d != 0`, with `i` the first index such that `d_i > 0`,
//! the coefficient solves `(d/dt_i + M) s_d = g` with `M = d_i - A'_i / h` and
//! `g = h^{-1} sum_{0 < e <= d} A_i^{(e)} s_{d-e}`, so
//! `s_d = sum_k (-1)^k M^{-(k+1)} d^k g / dt_i^k`, and `M^{-1}` is a finite Neumann
//! series because `A'_i` is nilpotent. The result is accepted by residual against
//! every `i`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::diffop::{apply_scalar, DiffOp};
use crate::exactalg::linalg::{self, DenseMatrix};
use crate::exactalg::rational::{self, int, Rational};
use crate::exactalg::MultiIndex;
use crate::qcoh::{dual_split, Check, CheckReport, QMatrix, SchubertBasis};
use crate::rootsys::RootSystem;
use crate::series::{HtPoly, ScalarSeries};
use crate::Error;

/// Truncated series with values in `Q^n`: `sum_{|d| <= order} v_d(t, h) e^{t.d}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormalSection {
    pub rank: usize,
    pub order: u32,
    pub dim: usize,
    #[serde(serialize_with = "serialize_section_terms")]
    pub terms: BTreeMap<MultiIndex, Vec<HtPoly>>,
}

fn serialize_section_terms<S: serde::Serializer>(
    terms: &BTreeMap<MultiIndex, Vec<HtPoly>>,
    s: S,
) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        exp_t: &'a [u32],
        coords: &'a [HtPoly],
    }
    let v: Vec<Entry> = terms.iter().map(|(d, c)| Entry { exp_t: &d.0, coords: c }).collect();
    v.serialize(s)
}

fn zero_vec(rank: usize, n: usize) -> Vec<HtPoly> {
    vec![HtPoly::zero(rank); n]
}

fn vec_is_zero(v: &[HtPoly]) -> bool {
    v.iter().all(HtPoly::is_zero)
}

fn vec_add(a: &mut [HtPoly], b: &[HtPoly]) {
    for (x, y) in a.iter_mut().zip(b) {
        x.add_assign(y);
    }
}

fn vec_map(v: &[HtPoly], f: impl Fn(&HtPoly) -> HtPoly) -> Vec<HtPoly> {
    v.iter().map(f).collect()
}

/// Rational matrix times a vector of polynomials.
fn mat_apply(m: &DenseMatrix, v: &[HtPoly]) -> Vec<HtPoly> {
    let rank = v[0].rank();
    m.iter()
        .map(|row| {
            let mut acc = HtPoly::zero(rank);
            for (c, x) in row.iter().zip(v) {
                if !c.is_zero() && !x.is_zero() {
                    acc.add_assign(&x.scale(c));
                }
            }
            acc
        })
        .collect()
}

impl FormalSection {
    pub fn zero(rank: usize, order: u32, dim: usize) -> Self {
        FormalSection {
            rank,
            order,
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn coeff(&self, d: &MultiIndex) -> Vec<HtPoly> {
        self.terms
            .get(d)
            .cloned()
            .unwrap_or_else(|| zero_vec(self.rank, self.dim))
    }

    pub fn add_at(&mut self, d: &MultiIndex, v: &[HtPoly]) {
        if d.degree() > self.order || vec_is_zero(v) {
            return;
        }
        let e = self
            .terms
            .entry(d.clone())
            .or_insert_with(|| zero_vec(self.rank, self.dim));
        vec_add(e, v);
        if vec_is_zero(e) {
            self.terms.remove(d);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &FormalSection) -> FormalSection {
        let mut out = self.clone();
        for (d, v) in &other.terms {
            out.add_at(d, v);
        }
        out
    }

    /// The coordinate at basis position `p`.
    pub fn coordinate(&self, p: usize) -> ScalarSeries {
        let mut s = ScalarSeries::zero(self.rank, self.order);
        for (d, v) in &self.terms {
            s.add_at(d, &v[p]);
        }
        s
    }

    pub fn specialize_h(&self, h: &Rational) -> FormalSection {
        let mut out = Self::zero(self.rank, self.order, self.dim);
        for (d, v) in &self.terms {
            out.add_at(d, &vec_map(v, |p| p.specialize_h(h)));
        }
        out
    }

    /// Multiplies by the matrix series `sum_e M^{(e)} e^{t.e}`, truncating at `order`.
    pub fn apply_matrix_series(&self, coeffs: &BTreeMap<MultiIndex, DenseMatrix>) -> FormalSection {
        let mut out = Self::zero(self.rank, self.order, self.dim);
        for (e, m) in coeffs {
            for (d, v) in &self.terms {
                let de = d.add(e);
                if de.degree() <= self.order {
                    out.add_at(&de, &mat_apply(m, v));
                }
            }
        }
        out
    }

    /// `h d/dt_i` on the series.
    pub fn apply_hd(&self, i: usize) -> FormalSection {
        let mut out = Self::zero(self.rank, self.order, self.dim);
        for (d, v) in &self.terms {
            let di = int(d.0[i] as i64);
            out.add_at(d, &vec_map(v, |p| p.partial(i).add(&p.scale(&di)).mul_h(1)));
        }
        out
    }
}

fn is_nilpotent(a: &DenseMatrix) -> bool {
    let n = a.len();
    let mut p = a.clone();
    for _ in 0..n {
        if p.iter().all(|r| r.iter().all(Zero::is_zero)) {
            return true;
        }
        p = linalg::mat_mul(&p, a);
    }
    p.iter().all(|r| r.iter().all(Zero::is_zero))
}

/// Polynomial solution of `df/dt_var = A f + g`. For invertible `A` the solution
/// is unique and `f0` must be absent; for nilpotent `A`, `f0` prescribes the
/// value at `t_var = 0`.
pub fn solve_poly_ode(a: &DenseMatrix, g: &[HtPoly], f0: Option<&[HtPoly]>, var: usize) -> Result<Vec<HtPoly>, Error> {
    let n = a.len();
    if g.len() != n {
        return Err(Error::Precondition(format!(
            "source has length {} for a {n}x{n} system",
            g.len()
        )));
    }
    if let Some(inv) = linalg::inverse(a) {
        if f0.is_some() {
            return Err(Error::Precondition(
                "initial value given for an invertible system".into(),
            ));
        }
        // f = -sum_k A^{-(k+1)} g^{(k)}
        let mut deriv = g.to_vec();
        let mut out = zero_vec(g[0].rank(), n);
        let mut power = inv.clone();
        while !vec_is_zero(&deriv) {
            let f = mat_apply(&power, &deriv);
            for (o, x) in out.iter_mut().zip(&f) {
                *o = o.sub(x);
            }
            deriv = vec_map(&deriv, |p| p.partial(var));
            power = linalg::mat_mul(&power, &inv);
        }
        return Ok(out);
    }
    if !is_nilpotent(a) {
        return Err(Error::NotInvertibleOrNilpotent);
    }
    let f0 = f0.ok_or_else(|| Error::Precondition("nilpotent system needs an initial value".into()))?;
    if f0.len() != n {
        return Err(Error::Precondition("initial value has the wrong length".into()));
    }
    // Picard iteration f <- f0 + int_0^t (A f + g); stabilizes because A is nilpotent
    // and every step raises the order of agreement in t_var by one.
    let mut f = f0.to_vec();
    loop {
        let rhs: Vec<HtPoly> = mat_apply(a, &f).iter().zip(g).map(|(x, y)| x.add(y)).collect();
        let next: Vec<HtPoly> = f0.iter().zip(&rhs).map(|(c, r)| c.add(&integrate(r, var))).collect();
        if next == f {
            return Ok(f);
        }
        f = next;
    }
}

/// `int_0^{t_var}` of a polynomial.
fn integrate(p: &HtPoly, var: usize) -> HtPoly {
    let mut out = HtPoly::zero(p.rank());
    for ((t, h), c) in p.terms() {
        let mut t2 = t.clone();
        t2.0[var] += 1;
        out.add_term(t2.clone(), *h, c / Rational::from_integer(t2.0[var].into()));
    }
    out
}

/// Flat-system data prepared from the divisor matrices `B_i`.
struct FlatData {
    nilpotent: Vec<DenseMatrix>,
    coeffs: Vec<BTreeMap<MultiIndex, DenseMatrix>>,
}

fn prepare(mats: &[QMatrix]) -> Result<FlatData, Error> {
    let l = mats.len();
    let a: Vec<QMatrix> = mats.iter().map(QMatrix::transpose).collect();
    for i in 0..l {
        for j in i + 1..l {
            if a[i].mul(&a[j]) != a[j].mul(&a[i]) {
                return Err(Error::Precondition(format!(
                    "A_{} and A_{} do not commute",
                    i + 1,
                    j + 1
                )));
            }
            if a[j].euler(i) != a[i].euler(j) {
                return Err(Error::Precondition(format!("d_{0} A_{1} != d_{1} A_{0}", i + 1, j + 1)));
            }
        }
    }
    for (i, b) in mats.iter().enumerate() {
        let (a0, a1) = dual_split(b);
        if a0.nonzero().any(|(r, c, _)| r <= c) || a1.nonzero().any(|(r, c, _)| r >= c) {
            return Err(Error::Precondition(format!("A_{} lacks the triangular split", i + 1)));
        }
    }
    let n = mats[0].size();
    let zero = vec![vec![Rational::zero(); n]; n];
    let coeffs: Vec<BTreeMap<MultiIndex, DenseMatrix>> = a.iter().map(QMatrix::coefficient_matrices).collect();
    let nilpotent = coeffs
        .iter()
        .map(|c| c.get(&MultiIndex::zeros(l)).cloned().unwrap_or_else(|| zero.clone()))
        .collect();
    Ok(FlatData { nilpotent, coeffs })
}

/// `M^{-1} v` for `M = c - N/h` with `N` nilpotent: `c^{-1} sum_j (N/(h c))^j v`.
fn shifted_inverse(c: &Rational, nil: &DenseMatrix, v: &[HtPoly]) -> Vec<HtPoly> {
    let inv_c = c.recip();
    let mut term = v.to_vec();
    let mut acc = v.to_vec();
    loop {
        term = vec_map(&mat_apply(nil, &term), |p| p.scale(&inv_c).mul_h(-1));
        if vec_is_zero(&term) {
            break;
        }
        vec_add(&mut acc, &term);
    }
    vec_map(&acc, |p| p.scale(&inv_c))
}

/// Unique truncated flat section with degree-zero constant term `a`. With
/// `h_value` set, `h` is specialized after every step.
pub fn solve_flat_section(
    mats: &[QMatrix],
    a: &[Rational],
    order: u32,
    h_value: Option<&Rational>,
) -> Result<FormalSection, Error> {
    let l = mats.len();
    let n = mats[0].size();
    if a.len() != n {
        return Err(Error::Precondition(format!(
            "initial vector has length {}, expected {n}",
            a.len()
        )));
    }
    let data = prepare(mats)?;
    let specialize = |v: Vec<HtPoly>| match h_value {
        Some(h) => vec_map(&v, |p| p.specialize_h(h)),
        None => v,
    };
    let mut s = FormalSection::zero(l, order, n);

    // degree zero: exp(sum t_i A'_i / h) a
    let mut v: Vec<HtPoly> = a.iter().map(|c| HtPoly::constant(l, c.clone())).collect();
    for i in 0..l {
        let mut term = v.clone();
        let mut acc = v.clone();
        let mut k = 0i64;
        loop {
            k += 1;
            term = mat_apply(&data.nilpotent[i], &term);
            let step = Rational::new(1.into(), k.into());
            term = vec_map(&term, |p| p.mul_monomial(&MultiIndex::unit(l, i), -1, &step));
            if vec_is_zero(&term) {
                break;
            }
            vec_add(&mut acc, &term);
        }
        v = specialize(acc);
    }
    s.add_at(&MultiIndex::zeros(l), &v);

    for deg in 1..=order {
        for d in MultiIndex::all_of_degree(l, deg) {
            let i = d.0.iter().position(|&x| x > 0).unwrap();
            let mut g = zero_vec(l, n);
            for (e, m) in &data.coeffs[i] {
                if e.is_zero() {
                    continue;
                }
                if let Some(rest) = d.checked_sub(e) {
                    vec_add(&mut g, &mat_apply(m, &s.coeff(&rest)));
                }
            }
            let g = vec_map(&g, |p| p.mul_h(-1));
            let c = int(d.0[i] as i64);
            let mut out = zero_vec(l, n);
            let mut deriv = g;
            let mut k = 0usize;
            while !vec_is_zero(&deriv) {
                let mut w = deriv.clone();
                for _ in 0..=k {
                    w = shifted_inverse(&c, &data.nilpotent[i], &w);
                }
                if k % 2 == 1 {
                    w = vec_map(&w, |p| p.scale(&-Rational::one()));
                }
                vec_add(&mut out, &w);
                deriv = vec_map(&deriv, |p| p.partial(i));
                k += 1;
            }
            s.add_at(&d, &specialize(out));
        }
    }
    Ok(s)
}

/// `h d/dt_i s - A_i s` for every `i`, modulo `e^t`-degree above the order.
pub fn flat_residuals(mats: &[QMatrix], s: &FormalSection, h_value: Option<&Rational>) -> Vec<FormalSection> {
    (0..mats.len())
        .map(|i| {
            let coeffs = mats[i].transpose().coefficient_matrices();
            let lhs = s.apply_hd(i);
            let rhs = s.apply_matrix_series(&coeffs);
            let mut neg = FormalSection::zero(s.rank, s.order, s.dim);
            for (d, v) in &rhs.terms {
                neg.add_at(d, &vec_map(v, |p| p.scale(&-Rational::one())));
            }
            let r = lhs.add(&neg);
            match h_value {
                Some(h) => r.specialize_h(h),
                None => r,
            }
        })
        .collect()
}

/// `(s, 1)`: the dual coordinate at the identity class.
pub fn pair_with_one(s: &FormalSection, basis: &SchubertBasis) -> ScalarSeries {
    s.coordinate(basis.identity_pos)
}

/// `(s, f)` for a Schubert-coordinate vector series `f`.
pub fn pair(s: &FormalSection, f: &FormalSection) -> ScalarSeries {
    let order = s.order.min(f.order);
    let mut out = ScalarSeries::zero(s.rank, order);
    for (d, u) in &s.terms {
        for (e, v) in &f.terms {
            let de = d.add(e);
            if de.degree() > order {
                continue;
            }
            for (x, y) in u.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    out.add_at(&de, &x.mul(y));
                }
            }
        }
    }
    out
}

/// `op.(s, 1)` truncated at `order - (e^t-degree of op)`; zero when `op` annihilates the pairing.
pub fn annihilation_check(
    op: &DiffOp,
    s: &FormalSection,
    basis: &SchubertBasis,
    h_value: Option<&Rational>,
) -> ScalarSeries {
    let g = apply_scalar(op, &pair_with_one(s, basis));
    let r = g.truncate(s.order.saturating_sub(op.exp_t_degree()));
    match h_value {
        Some(h) => r.specialize_h(h),
        None => r,
    }
}

/// `op` with `(h d)_i` replaced by `B_i + h d/dt_i`, applied to a vector series in
/// Schubert coordinates.
pub fn apply_connection(op: &DiffOp, mats: &[QMatrix], f: &FormalSection) -> FormalSection {
    let coeffs: Vec<BTreeMap<MultiIndex, DenseMatrix>> = mats.iter().map(QMatrix::coefficient_matrices).collect();
    let l = f.rank;
    let mut cache: BTreeMap<MultiIndex, FormalSection> = BTreeMap::new();
    cache.insert(MultiIndex::zeros(l), f.clone());
    let mut out = FormalSection::zero(l, f.order, f.dim);
    for (k, c) in op.terms() {
        let base = connection_power(&k.hd, &coeffs, &mut cache);
        for (d, v) in &base.terms {
            let de = d.add(&k.exp_t);
            out.add_at(
                &de,
                &vec_map(v, |p| p.mul_monomial(&MultiIndex::zeros(l), k.h as i32, c)),
            );
        }
    }
    out
}

fn connection_power(
    j: &MultiIndex,
    coeffs: &[BTreeMap<MultiIndex, DenseMatrix>],
    cache: &mut BTreeMap<MultiIndex, FormalSection>,
) -> FormalSection {
    if let Some(s) = cache.get(j) {
        return s.clone();
    }
    let i = j.0.iter().position(|&e| e > 0).unwrap();
    let prev = connection_power(&j.checked_sub(&MultiIndex::unit(j.len(), i)).unwrap(), coeffs, cache);
    let s = prev.apply_hd(i).add(&prev.apply_matrix_series(&coeffs[i]));
    cache.insert(j.clone(), s.clone());
    s
}

/// Positive definiteness of the coroot Gram matrix, certified by its leading
/// principal minors, with sample values of `sum G_ij d_i d_j` for small `d != 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GramCertificate {
    #[serde(serialize_with = "serialize_rationals")]
    pub minors: Vec<Rational>,
    pub positive_definite: bool,
    pub samples: Vec<(Vec<u32>, String)>,
}

fn serialize_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    let strs: Vec<String> = v.iter().map(rational::to_string).collect();
    strs.serialize(s)
}

pub fn kim_lemma_certificate(rs: &RootSystem) -> GramCertificate {
    let minors = rs.gram_minors();
    let positive_definite = minors.iter().all(|m| *m > Rational::zero());
    let samples = MultiIndex::all_up_to_degree(rs.rank, 2)
        .into_iter()
        .filter(|d| !d.is_zero())
        .map(|d| {
            let mut q = Rational::zero();
            for i in 0..rs.rank {
                for j in 0..rs.rank {
                    q += &rs.coroot_gram[i][j] * int(d.0[i] as i64) * int(d.0[j] as i64);
                }
            }
            (d.0, rational::to_string(&q))
        })
        .collect();
    GramCertificate {
        minors,
        positive_definite,
        samples,
    }
}

/// Solves the flat section for every dual-Schubert vector and checks the flatness
/// residuals and the annihilation of `(s, 1)` by each operator in `ops`.
pub fn verify_flat_sections(
    mats: &[QMatrix],
    basis: &SchubertBasis,
    ops: &[(String, DiffOp)],
    order: u32,
    h_value: Option<&Rational>,
) -> Result<CheckReport, Error> {
    let n = basis.len();
    let mut residual_fail = Vec::new();
    let mut op_fail: Vec<Vec<String>> = vec![Vec::new(); ops.len()];
    for p in 0..n {
        let mut a = vec![Rational::zero(); n];
        a[p] = Rational::one();
        let s = solve_flat_section(mats, &a, order, h_value)?;
        for (i, r) in flat_residuals(mats, &s, h_value).iter().enumerate() {
            for (d, v) in &r.terms {
                residual_fail.push(format!(
                    "a = e_{p}, i = {}, degree {:?}: {}",
                    i + 1,
                    d.0,
                    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
                ));
            }
        }
        for (k, (name, op)) in ops.iter().enumerate() {
            let r = annihilation_check(op, &s, basis, h_value);
            for (d, c) in &r.terms {
                op_fail[k].push(format!("{name}, a = e_{p}, degree {:?}: {c}", d.0));
            }
        }
    }
    let mut checks = vec![Check {
        name: "flatness".into(),
        passed: residual_fail.is_empty(),
        failures: residual_fail,
    }];
    for ((name, _), f) in ops.iter().zip(op_fail) {
        checks.push(Check {
            name: format!("annihilation_{name}"),
            passed: f.is_empty(),
            failures: f,
        });
    }
    Ok(CheckReport::from_checks(checks))
}
