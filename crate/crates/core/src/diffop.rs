//! Differential operators in `e^{t_i}`, `(h d)_i = h d/dt_i` and `h`, kept in the
//! normal order `e^{t.D} (h d)^J h^m`.
//!
//! The quantized integrals `D_k` are obtained from `Omega_k` by the substitution
//! `X_i^2 -> -4 G_ii e^{t_i} / h^2`, `lambda_i -> 2 (h d)_i / h` and multiplication
//! by `h^{deg Omega_k}`. Only squares of `X_i` are ever substituted, so no square
//! roots or half-integer exponents appear.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::exactalg::rational::{self, int, Rational};
use crate::exactalg::{MultiIndex, SparsePoly};
use crate::invariants::lambda_vars;
use crate::rootsys::RootSystem;
use crate::series::{HtPoly, ScalarSeries};
use crate::toda::{build_omega, ql_vars, shifted_power, NOElement};
use crate::Error;

/// Key of `e^{t.exp_t} (h d)^hd h^h`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DoKey {
    pub hd: MultiIndex,
    pub exp_t: MultiIndex,
    pub h: u32,
}

impl DoKey {
    /// Degree with `e^{t_i}` of weight 2 and `(h d)_i`, `h` of weight 1.
    pub fn graded_degree(&self) -> u32 {
        2 * self.exp_t.degree() + self.hd.degree() + self.h
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    rank: usize,
    terms: BTreeMap<DoKey, Rational>,
}

impl DiffOp {
    pub fn zero(rank: usize) -> Self {
        DiffOp {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(rank: usize, exp_t: MultiIndex, hd: MultiIndex, h: u32, c: Rational) -> Self {
        let mut op = Self::zero(rank);
        op.add_term(DoKey { exp_t, hd, h }, c);
        op
    }

    pub fn one(rank: usize) -> Self {
        Self::term(
            rank,
            MultiIndex::zeros(rank),
            MultiIndex::zeros(rank),
            0,
            Rational::one(),
        )
    }

    pub fn exp_t(rank: usize, i: usize) -> Self {
        Self::term(
            rank,
            MultiIndex::unit(rank, i),
            MultiIndex::zeros(rank),
            0,
            Rational::one(),
        )
    }

    pub fn hd(rank: usize, i: usize) -> Self {
        Self::term(
            rank,
            MultiIndex::zeros(rank),
            MultiIndex::unit(rank, i),
            0,
            Rational::one(),
        )
    }

    pub fn h(rank: usize) -> Self {
        Self::term(
            rank,
            MultiIndex::zeros(rank),
            MultiIndex::zeros(rank),
            1,
            Rational::one(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&DoKey, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, key: DoKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn check_rank(&self, other: &DiffOp) -> Result<(), Error> {
        if self.rank == other.rank {
            Ok(())
        } else {
            Err(Error::RankMismatch(self.rank, other.rank))
        }
    }

    pub fn add(&self, other: &DiffOp) -> Result<DiffOp, Error> {
        self.check_rank(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffOp) -> Result<DiffOp, Error> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> DiffOp {
        let mut out = Self::zero(self.rank);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        }
        out
    }

    /// Normal-ordered product using `(h d)^J e^{t.D} = e^{t.D} prod_i ((h d)_i + h D_i)^{J_i}`.
    pub fn mul(&self, other: &DiffOp) -> Result<DiffOp, Error> {
        self.check_rank(other)?;
        let mut out = Self::zero(self.rank);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let exp_t = k1.exp_t.add(&k2.exp_t);
                let c = c1 * c2;
                let top = k1.hd.degree();
                for (hd, s) in shifted_power(&k1.hd, &k2.exp_t) {
                    let h = k1.h + k2.h + top - hd.degree();
                    out.add_term(
                        DoKey {
                            exp_t: exp_t.clone(),
                            hd: hd.add(&k2.hd),
                            h,
                        },
                        &c * s,
                    );
                }
            }
        }
        Ok(out)
    }

    /// True iff every term has graded degree `d`.
    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms.keys().all(|k| k.graded_degree() == d)
    }

    /// The part surviving `e^{t_i} -> 0`, as a polynomial in `Lambda_i = (h d)_i`,
    /// together with whether that part is free of `h`.
    pub fn potential_free_limit(&self) -> (SparsePoly, bool) {
        let vars = lambda_vars(self.rank);
        let mut p = SparsePoly::zero(&vars);
        let mut h_free = true;
        for (k, c) in &self.terms {
            if k.exp_t.is_zero() {
                if k.h > 0 {
                    h_free = false;
                } else {
                    p.add_term(k.hd.clone(), c.clone());
                }
            }
        }
        (p, h_free)
    }

    /// The `h -> 0` symbol with `e^{t_i} -> Q_i`, `(h d)_i -> L_i`.
    pub fn symbol(&self) -> SparsePoly {
        let vars = ql_vars(self.rank);
        let mut p = SparsePoly::zero(&vars);
        for (k, c) in &self.terms {
            if k.h == 0 {
                let exps: Vec<u32> = k.exp_t.0.iter().chain(&k.hd.0).copied().collect();
                p.add_term(MultiIndex(exps), c.clone());
            }
        }
        p
    }

    /// Largest `|D|` over the terms `e^{t.D}`.
    pub fn exp_t_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.exp_t.degree()).max().unwrap_or(0)
    }
}

fn factor(name: &str, e: u32) -> Option<String> {
    match e {
        0 => None,
        1 => Some(name.to_string()),
        _ => Some(format!("{name}^{e}")),
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().rev().enumerate() {
            let neg = *c < Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut fs = Vec::new();
            for (i, &e) in k.exp_t.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => fs.push(format!("e^t{}", i + 1)),
                    _ => fs.push(format!("e^({}t{})", e, i + 1)),
                }
            }
            for (i, &e) in k.hd.0.iter().enumerate() {
                fs.extend(factor(&format!("hd{}", i + 1), e));
            }
            fs.extend(factor("h", k.h));
            if fs.is_empty() {
                write!(f, "{}", rational::to_string(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", fs.join("*"))?;
            } else {
                write!(f, "{}*{}", rational::to_string(&mag), fs.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for DiffOp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            coeff: String,
            exp_t: &'a [u32],
            hd: &'a [u32],
            h: u32,
        }
        #[derive(Serialize)]
        struct Op<'a> {
            rank: usize,
            terms: Vec<Term<'a>>,
        }
        Op {
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(k, c)| Term {
                    coeff: rational::to_string(c),
                    exp_t: &k.exp_t.0,
                    hd: &k.hd.0,
                    h: k.h,
                })
                .collect(),
        }
        .serialize(s)
    }
}

pub fn diffop_mul(a: &DiffOp, b: &DiffOp) -> Result<DiffOp, Error> {
    a.mul(b)
}

pub fn commutator_diffop(a: &DiffOp, b: &DiffOp) -> Result<DiffOp, Error> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// `D_k = h^{deg Omega_k} rho(Omega_k)`.
pub fn rho_dk(omega_k: &NOElement, rs: &RootSystem) -> Result<DiffOp, Error> {
    let l = rs.rank;
    if omega_k.rank() != l {
        return Err(Error::RankMismatch(omega_k.rank(), l));
    }
    let d = omega_k.filtration_degree().unwrap_or(0);
    let mut out = DiffOp::zero(l);
    for (k, c) in omega_k.terms() {
        if k.x.0.iter().any(|e| e % 2 != 0) {
            return Err(Error::OddXExponent(omega_k.to_string()));
        }
        let half = MultiIndex(k.x.0.iter().map(|e| e / 2).collect());
        let mut coef = c * rational::pow(&int(2), k.lam.degree() as i32);
        for i in 0..l {
            coef *= rational::pow(&(int(-4) * &rs.coroot_gram[i][i]), half.0[i] as i32);
        }
        let h = d - 2 * half.degree() - k.lam.degree();
        out.add_term(
            DoKey {
                exp_t: half,
                hd: k.lam.clone(),
                h,
            },
            coef,
        );
    }
    Ok(out)
}

/// `H = sum G_ij (h d)_i (h d)_j - sum G_jj e^{t_j}`.
pub fn build_h(rs: &RootSystem) -> DiffOp {
    let l = rs.rank;
    let mut out = DiffOp::zero(l);
    for i in 0..l {
        for j in 0..l {
            let hd = MultiIndex::unit(l, i).add(&MultiIndex::unit(l, j));
            out.add_term(
                DoKey {
                    exp_t: MultiIndex::zeros(l),
                    hd,
                    h: 0,
                },
                rs.coroot_gram[i][j].clone(),
            );
        }
        out.add_term(
            DoKey {
                exp_t: MultiIndex::unit(l, i),
                hd: MultiIndex::zeros(l),
                h: 0,
            },
            -rs.coroot_gram[i][i].clone(),
        );
    }
    out
}

/// `rho(Omega) / 4`, which must agree with [`build_h`].
pub fn h_from_omega(rs: &RootSystem) -> Result<DiffOp, Error> {
    Ok(rho_dk(&build_omega(rs), rs)?.scale(&Rational::new(1.into(), 4.into())))
}

/// `(h d)_i` on a series: `(h d)_i (f e^{t.d}) = h (d f/dt_i + d_i f) e^{t.d}`.
pub fn apply_hd(i: usize, g: &ScalarSeries) -> ScalarSeries {
    let mut out = ScalarSeries::zero(g.rank, g.order);
    for (d, f) in &g.terms {
        let p = f.partial(i).add(&f.scale(&int(d.0[i] as i64))).mul_h(1);
        out.add_at(d, &p);
    }
    out
}

/// Applies `op` to a truncated scalar series; the result keeps the input order.
pub fn apply_scalar(op: &DiffOp, g: &ScalarSeries) -> ScalarSeries {
    let l = g.rank;
    let mut cache: BTreeMap<MultiIndex, ScalarSeries> = BTreeMap::new();
    cache.insert(MultiIndex::zeros(l), g.clone());
    let mut out = ScalarSeries::zero(l, g.order);
    for (k, c) in op.terms() {
        let derived = hd_power(&k.hd, &mut cache);
        for (d, f) in &derived.terms {
            let shifted = d.add(&k.exp_t);
            let p = f.mul_monomial(&MultiIndex::zeros(l), k.h as i32, c);
            out.add_at(&shifted, &p);
        }
    }
    out
}

fn hd_power(j: &MultiIndex, cache: &mut BTreeMap<MultiIndex, ScalarSeries>) -> ScalarSeries {
    if let Some(s) = cache.get(j) {
        return s.clone();
    }
    let i = j.0.iter().position(|&e| e > 0).expect("nonzero index");
    let prev = j.checked_sub(&MultiIndex::unit(j.len(), i)).unwrap();
    let base = hd_power(&prev, cache);
    let s = apply_hd(i, &base);
    cache.insert(j.clone(), s.clone());
    s
}

/// Constant series `c`.
pub fn constant_series(rank: usize, order: u32, c: Rational) -> ScalarSeries {
    let mut s = ScalarSeries::zero(rank, order);
    s.add_at(&MultiIndex::zeros(rank), &HtPoly::constant(rank, c));
    s
}
