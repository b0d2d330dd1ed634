//! Polynomials in `t_1..t_l` with Laurent-polynomial-in-`h` coefficients, and
//! truncated formal series in `e^{t_1}..e^{t_l}` with such coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactalg::rational::{self, Rational};
use crate::exactalg::MultiIndex;

/// Key `(t-exponents, h-exponent)`.
pub type HtKey = (MultiIndex, i32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HtPoly {
    rank: usize,
    terms: BTreeMap<HtKey, Rational>,
}

impl HtPoly {
    pub fn zero(rank: usize) -> Self {
        HtPoly {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(rank: usize, c: Rational) -> Self {
        Self::monomial(rank, MultiIndex::zeros(rank), 0, c)
    }

    pub fn monomial(rank: usize, t: MultiIndex, h: i32, c: Rational) -> Self {
        let mut p = Self::zero(rank);
        p.add_term(t, h, c);
        p
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

    pub fn terms(&self) -> impl Iterator<Item = (&HtKey, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, t: MultiIndex, h: i32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key = (t, h);
        let e = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_assign(&mut self, other: &HtPoly) {
        for ((t, h), c) in &other.terms {
            self.add_term(t.clone(), *h, c.clone());
        }
    }

    pub fn add(&self, other: &HtPoly) -> HtPoly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &HtPoly) -> HtPoly {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> HtPoly {
        if c.is_zero() {
            return Self::zero(self.rank);
        }
        HtPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by `c t^t h^h`.
    pub fn mul_monomial(&self, t: &MultiIndex, h: i32, c: &Rational) -> HtPoly {
        if c.is_zero() {
            return Self::zero(self.rank);
        }
        HtPoly {
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .map(|((te, he), v)| ((te.add(t), he + h), v * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &HtPoly) -> HtPoly {
        let mut out = Self::zero(self.rank);
        for ((t, h), c) in &other.terms {
            out.add_assign(&self.mul_monomial(t, *h, c));
        }
        out
    }

    pub fn mul_h(&self, k: i32) -> HtPoly {
        self.mul_monomial(&MultiIndex::zeros(self.rank), k, &Rational::one())
    }

    /// `d/dt_i`.
    pub fn partial(&self, i: usize) -> HtPoly {
        let mut out = Self::zero(self.rank);
        for ((t, h), c) in &self.terms {
            let e = t.0[i];
            if e > 0 {
                let mut t2 = t.clone();
                t2.0[i] -= 1;
                out.add_term(t2, *h, c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Degree in `t`; `None` for zero.
    pub fn t_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(t, _)| t.degree()).max()
    }

    /// Substitutes a rational value for `h`.
    pub fn specialize_h(&self, h: &Rational) -> HtPoly {
        let mut out = Self::zero(self.rank);
        for ((t, e), c) in &self.terms {
            out.add_term(t.clone(), 0, c * rational::pow(h, *e));
        }
        out
    }

    /// True iff no term carries a power of `h`.
    pub fn is_h_free(&self) -> bool {
        self.terms.keys().all(|(_, h)| *h == 0)
    }
}

impl fmt::Display for HtPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|((t, h), c)| {
                let mut s = format!("({})", rational::to_string(c));
                for (i, &e) in t.0.iter().enumerate() {
                    if e > 0 {
                        s.push_str(&format!("*t{}^{}", i + 1, e));
                    }
                }
                if *h != 0 {
                    s.push_str(&format!("*h^{h}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HtTermJson {
    coeff: String,
    t: Vec<u32>,
    h: i32,
}

impl Serialize for HtPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<HtTermJson> = self
            .terms
            .iter()
            .rev()
            .map(|((t, h), c)| HtTermJson {
                coeff: rational::to_string(c),
                t: t.0.clone(),
                h: *h,
            })
            .collect();
        v.serialize(s)
    }
}

/// Truncated series `sum_{|d| <= order} f_d(t, h) e^{t.d}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScalarSeries {
    pub rank: usize,
    pub order: u32,
    #[serde(serialize_with = "serialize_series_terms")]
    pub terms: BTreeMap<MultiIndex, HtPoly>,
}

fn serialize_series_terms<S: serde::Serializer>(terms: &BTreeMap<MultiIndex, HtPoly>, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        exp_t: &'a [u32],
        coeff: &'a HtPoly,
    }
    let v: Vec<Entry> = terms.iter().map(|(d, p)| Entry { exp_t: &d.0, coeff: p }).collect();
    v.serialize(s)
}

impl ScalarSeries {
    pub fn zero(rank: usize, order: u32) -> Self {
        ScalarSeries {
            rank,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `p e^{t.d}`, dropping it if `|d|` exceeds the order.
    pub fn add_at(&mut self, d: &MultiIndex, p: &HtPoly) {
        if d.degree() > self.order || p.is_zero() {
            return;
        }
        let e = self.terms.entry(d.clone()).or_insert_with(|| HtPoly::zero(self.rank));
        e.add_assign(p);
        if e.is_zero() {
            self.terms.remove(d);
        }
    }

    pub fn coeff(&self, d: &MultiIndex) -> HtPoly {
        self.terms.get(d).cloned().unwrap_or_else(|| HtPoly::zero(self.rank))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &ScalarSeries) -> ScalarSeries {
        let mut out = self.clone();
        out.order = self.order.min(other.order);
        out.terms.retain(|d, _| d.degree() <= out.order);
        for (d, p) in &other.terms {
            out.add_at(d, p);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> ScalarSeries {
        let mut out = Self::zero(self.rank, self.order);
        for (d, p) in &self.terms {
            out.add_at(d, &p.scale(c));
        }
        out
    }

    /// Drops every term of `e^t`-degree above `order`.
    pub fn truncate(&self, order: u32) -> ScalarSeries {
        let mut out = self.clone();
        out.order = order.min(self.order);
        out.terms.retain(|d, _| d.degree() <= out.order);
        out
    }

    pub fn specialize_h(&self, h: &Rational) -> ScalarSeries {
        let mut out = Self::zero(self.rank, self.order);
        for (d, p) in &self.terms {
            out.add_at(d, &p.specialize_h(h));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::int;

    #[test]
    fn laurent_arithmetic() {
        let t = HtPoly::monomial(1, MultiIndex(vec![1]), 0, int(1));
        let hinv = HtPoly::monomial(1, MultiIndex(vec![0]), -1, int(2));
        let p = t.mul(&hinv);
        assert_eq!(p.to_string(), "(2)*t1^1*h^-1");
        assert_eq!(p.partial(0), hinv);
        assert_eq!(p.mul_h(1).partial(0), HtPoly::constant(1, int(2)));
        assert_eq!(p.specialize_h(&int(4)).to_string(), "(1/2)*t1^1");
        assert!(p.sub(&p).is_zero());
        assert!(!p.is_h_free());
    }

    #[test]
    fn truncation() {
        let mut s = ScalarSeries::zero(1, 2);
        s.add_at(&MultiIndex(vec![3]), &HtPoly::constant(1, int(1)));
        assert!(s.is_zero());
        s.add_at(&MultiIndex(vec![2]), &HtPoly::constant(1, int(1)));
        assert_eq!(s.terms.len(), 1);
        assert!(s.truncate(1).is_zero());
    }
}
