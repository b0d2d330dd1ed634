//! Sparse multivariate polynomials over the rationals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{self, Rational};
use crate::Error;

/// Exponent vector. Ordered graded-lexicographically: total degree first,
/// then lexicographically on the exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> u32 {
        self.0.iter().zip(weights).map(|(e, w)| e * w).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference, `None` if any component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn scaled(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|e| e * k).collect())
    }

    /// All exponent vectors of length `n` with total degree exactly `d`,
    /// in ascending graded-lex order.
    pub fn all_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(d);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in 0..=d {
                prefix.push(e);
                rec(n, d - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if d == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All exponent vectors of length `n` with total degree at most `d`.
    pub fn all_up_to_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        (0..=d).flat_map(|k| Self::all_of_degree(n, k)).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Named variables with integer degree weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarSet {
    pub names: Vec<String>,
    pub weights: Vec<u32>,
}

impl VarSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, weights: Vec<u32>) -> Arc<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        assert_eq!(names.len(), weights.len(), "one weight per variable");
        Arc::new(VarSet { names, weights })
    }

    /// `prefix1 .. prefixN`, all of the same weight.
    pub fn indexed(prefix: &str, n: usize, weight: u32) -> Arc<Self> {
        Self::new((1..=n).map(|i| format!("{prefix}{i}")), vec![weight; n])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn same_vars(a: &Arc<VarSet>, b: &Arc<VarSet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Sparse polynomial: a map from exponent vectors to nonzero rationals.
#[derive(Clone, Debug)]
pub struct SparsePoly {
    vars: Arc<VarSet>,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl PartialEq for SparsePoly {
    fn eq(&self, other: &Self) -> bool {
        same_vars(&self.vars, &other.vars) && self.terms == other.terms
    }
}

impl Eq for SparsePoly {}

impl SparsePoly {
    pub fn zero(vars: &Arc<VarSet>) -> Self {
        SparsePoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Arc<VarSet>, c: Rational) -> Self {
        Self::monomial(vars, MultiIndex::zeros(vars.len()), c)
    }

    pub fn one(vars: &Arc<VarSet>) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn var(vars: &Arc<VarSet>, i: usize) -> Self {
        Self::monomial(vars, MultiIndex::unit(vars.len(), i), Rational::one())
    }

    pub fn monomial(vars: &Arc<VarSet>, exps: MultiIndex, c: Rational) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length");
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated monomials and dropping zeros.
    pub fn from_terms(vars: &Arc<VarSet>, terms: impl IntoIterator<Item = (MultiIndex, Rational)>) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.len(), vars.len(), "exponent vector length");
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
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

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &MultiIndex) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&MultiIndex::zeros(self.nvars()))
    }

    pub fn add_term(&mut self, m: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_vars(&self, other: &SparsePoly) -> Result<(), Error> {
        if same_vars(&self.vars, &other.vars) {
            Ok(())
        } else {
            Err(Error::VarMismatch {
                left: self.vars.names.clone(),
                right: other.vars.names.clone(),
            })
        }
    }

    pub fn try_add(&self, other: &SparsePoly) -> Result<SparsePoly, Error> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &SparsePoly) -> Result<SparsePoly, Error> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &SparsePoly) -> Result<SparsePoly, Error> {
        self.check_vars(other)?;
        let mut out = Self::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.add(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> SparsePoly {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        SparsePoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> SparsePoly {
        let mut acc = Self::one(&self.vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Ring homomorphism sending variable `i` to `images[i]`. All images must
    /// share one variable set, which becomes the variable set of the result.
    pub fn substitute(&self, images: &[SparsePoly]) -> Result<SparsePoly, Error> {
        if images.len() != self.nvars() {
            return Err(Error::VarMismatch {
                left: self.vars.names.clone(),
                right: images.iter().map(|p| format!("<{} vars>", p.nvars())).collect(),
            });
        }
        let target = match images.first() {
            Some(p) => p.vars.clone(),
            None => return Ok(self.clone()),
        };
        for p in images {
            if !same_vars(&p.vars, &target) {
                return Err(Error::VarMismatch {
                    left: target.names.clone(),
                    right: p.vars.names.clone(),
                });
            }
        }
        // cache powers per variable
        let mut powers: Vec<Vec<SparsePoly>> = images.iter().map(|p| vec![Self::one(&target), p.clone()]).collect();
        let mut out = Self::zero(&target);
        for (m, c) in &self.terms {
            let mut t = Self::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                t *= rational::pow(x, e as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn partial(&self, i: usize) -> SparsePoly {
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[i] -= 1;
                out.add_term(m2, c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Euler derivative `x_i d/dx_i`.
    pub fn euler(&self, i: usize) -> SparsePoly {
        let mut out = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                out.add_term(m.clone(), c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    pub fn term_weighted_degree(&self, m: &MultiIndex) -> u32 {
        m.weighted_degree(&self.vars.weights)
    }

    /// Largest weighted degree of a term; `None` for the zero polynomial.
    pub fn weighted_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| self.term_weighted_degree(m)).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| self.term_weighted_degree(m));
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Terms of weighted degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> SparsePoly {
        self.filter(|m, _| self.term_weighted_degree(m) == d)
    }

    pub fn filter(&self, mut keep: impl FnMut(&MultiIndex, &Rational) -> bool) -> SparsePoly {
        SparsePoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| keep(m, c))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Same terms, read over a different variable set of equal size.
    pub fn with_vars(&self, vars: &Arc<VarSet>) -> SparsePoly {
        assert_eq!(vars.len(), self.nvars());
        SparsePoly {
            vars: vars.clone(),
            terms: self.terms.clone(),
        }
    }
}

impl<'a> Add<&'a SparsePoly> for &'a SparsePoly {
    type Output = SparsePoly;
    /// Panics on variable-set mismatch; use [`SparsePoly::try_add`] otherwise.
    fn add(self, rhs: &'a SparsePoly) -> SparsePoly {
        self.try_add(rhs).expect("polynomial addition")
    }
}

impl<'a> Sub<&'a SparsePoly> for &'a SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &'a SparsePoly) -> SparsePoly {
        self.try_sub(rhs).expect("polynomial subtraction")
    }
}

impl<'a> Mul<&'a SparsePoly> for &'a SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &'a SparsePoly) -> SparsePoly {
        self.try_mul(rhs).expect("polynomial multiplication")
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c < &Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let factors: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            self.vars.names[i].clone()
                        } else {
                            format!("{}^{}", self.vars.names[i], e)
                        }
                    })
                    .collect();
            if factors.is_empty() {
                write!(f, "{}", rational::to_string(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", rational::to_string(&mag), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    coeff: String,
    exps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    vars: Vec<String>,
    weights: Vec<u32>,
    terms: Vec<TermJson>,
}

impl Serialize for SparsePoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson {
            vars: self.vars.names.clone(),
            weights: self.vars.weights.clone(),
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(m, c)| TermJson {
                    coeff: rational::to_string(c),
                    exps: m.0.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparsePoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        if raw.vars.len() != raw.weights.len() {
            return Err(D::Error::custom("`vars` and `weights` differ in length"));
        }
        let vars = VarSet::new(raw.vars, raw.weights);
        let mut p = SparsePoly::zero(&vars);
        for t in raw.terms {
            if t.exps.len() != vars.len() {
                return Err(D::Error::custom(format!(
                    "term has {} exponents, expected {}",
                    t.exps.len(),
                    vars.len()
                )));
            }
            let c = rational::parse(&t.coeff).map_err(D::Error::custom)?;
            p.add_term(MultiIndex(t.exps), c);
        }
        Ok(p)
    }
}
