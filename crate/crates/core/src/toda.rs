//! Normal-ordered arithmetic in `U(b)`, where `b` is spanned by
//! `lambda_1..lambda_l, X_1..X_l` with
//! `[lambda_i, lambda_j] = 0`, `[lambda_i, X_j] = delta_ij X_j`, `[X_i, X_j] = 0`.
//!
//! Elements are stored as `sum c_{I,J} X^I lambda^J` with every `X` to the
//! left. The commuting lifts `Omega_k` of the invariants `u_k` are found by
//! an exact linear solve over the even-`X` monomials.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exactalg::rational::{self, binomial, int, Rational};
use crate::exactalg::{LinearSolution, MultiIndex, SparsePoly, SparseSystem, VarSet};
use crate::invariants::{lambda_vars, InvariantSet};
use crate::rootsys::RootSystem;
use crate::Error;

/// Key of a normal-ordered monomial `X^x lambda^lam`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NoKey {
    pub x: MultiIndex,
    pub lam: MultiIndex,
}

impl NoKey {
    pub fn degree(&self) -> u32 {
        self.x.degree() + self.lam.degree()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NOElement {
    rank: usize,
    terms: BTreeMap<NoKey, Rational>,
}

/// `prod_i (lambda_i + shift_i)^{e_i}` expanded as `(exponent, coefficient)` pairs.
pub(crate) fn shifted_power(e: &MultiIndex, shift: &MultiIndex) -> Vec<(MultiIndex, Rational)> {
    let mut out = vec![(MultiIndex::zeros(e.len()), Rational::one())];
    for i in 0..e.len() {
        let n = e.0[i];
        if n == 0 {
            continue;
        }
        let s = int(shift.0[i] as i64);
        let mut next = Vec::with_capacity(out.len() * (n as usize + 1));
        for (m, c) in &out {
            for k in 0..=n {
                let coef = if shift.0[i] == 0 && k < n {
                    continue;
                } else {
                    Rational::from_integer(binomial(n, k)) * rational::pow(&s, (n - k) as i32)
                };
                let mut m2 = m.clone();
                m2.0[i] += k;
                next.push((m2, c * coef));
            }
        }
        out = next;
    }
    out
}

impl NOElement {
    pub fn zero(rank: usize) -> Self {
        NOElement {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(rank: usize) -> Self {
        Self::term(rank, MultiIndex::zeros(rank), MultiIndex::zeros(rank), Rational::one())
    }

    pub fn term(rank: usize, x: MultiIndex, lam: MultiIndex, c: Rational) -> Self {
        let mut e = Self::zero(rank);
        e.add_term(NoKey { x, lam }, c);
        e
    }

    pub fn x(rank: usize, i: usize) -> Self {
        Self::term(
            rank,
            MultiIndex::unit(rank, i),
            MultiIndex::zeros(rank),
            Rational::one(),
        )
    }

    pub fn lambda(rank: usize, i: usize) -> Self {
        Self::term(
            rank,
            MultiIndex::zeros(rank),
            MultiIndex::unit(rank, i),
            Rational::one(),
        )
    }

    /// Embeds a commutative polynomial in `lambda` (it lies in the abelian subalgebra).
    pub fn from_lambda_poly(p: &SparsePoly) -> Self {
        let rank = p.nvars();
        let mut e = Self::zero(rank);
        for (m, c) in p.terms() {
            e.add_term(
                NoKey {
                    x: MultiIndex::zeros(rank),
                    lam: m.clone(),
                },
                c.clone(),
            );
        }
        e
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

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&NoKey, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &NoKey) -> Rational {
        self.terms.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, key: NoKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn check_rank(&self, other: &NOElement) -> Result<(), Error> {
        if self.rank == other.rank {
            Ok(())
        } else {
            Err(Error::RankMismatch(self.rank, other.rank))
        }
    }

    pub fn add(&self, other: &NOElement) -> Result<NOElement, Error> {
        self.check_rank(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &NOElement) -> Result<NOElement, Error> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> NOElement {
        let mut out = Self::zero(self.rank);
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        out
    }

    /// Normal-ordered product, using
    /// `X^I1 lambda^J1 X^I2 lambda^J2 = X^(I1+I2) prod_i (lambda_i + I2_i)^J1_i lambda^J2`.
    pub fn mul(&self, other: &NOElement) -> Result<NOElement, Error> {
        self.check_rank(other)?;
        let mut out = Self::zero(self.rank);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let x = k1.x.add(&k2.x);
                let c = c1 * c2;
                for (lam, s) in shifted_power(&k1.lam, &k2.x) {
                    out.add_term(
                        NoKey {
                            x: x.clone(),
                            lam: lam.add(&k2.lam),
                        },
                        &c * s,
                    );
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> NOElement {
        let mut acc = Self::one(self.rank);
        for _ in 0..k {
            acc = acc.mul(self).expect("same rank");
        }
        acc
    }

    /// Filtration degree `max(|I| + |J|)`; `None` for zero.
    pub fn filtration_degree(&self) -> Option<u32> {
        self.terms.keys().map(NoKey::degree).max()
    }

    /// Every `X` exponent is componentwise even.
    pub fn is_even_in_x(&self) -> bool {
        self.terms.keys().all(|k| k.x.0.iter().all(|e| e % 2 == 0))
    }
}

impl fmt::Display for NOElement {
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
            let mut factors = Vec::new();
            for (i, &e) in k.x.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("X{}", i + 1)),
                    _ => factors.push(format!("X{}^{}", i + 1, e)),
                }
            }
            for (i, &e) in k.lam.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("l{}", i + 1)),
                    _ => factors.push(format!("l{}^{}", i + 1, e)),
                }
            }
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
struct NoTermJson {
    coeff: String,
    x: Vec<u32>,
    lambda: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoJson {
    rank: usize,
    terms: Vec<NoTermJson>,
}

impl Serialize for NOElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        NoJson {
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(k, c)| NoTermJson {
                    coeff: rational::to_string(c),
                    x: k.x.0.clone(),
                    lambda: k.lam.0.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NOElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = NoJson::deserialize(d)?;
        let mut e = NOElement::zero(raw.rank);
        for t in raw.terms {
            if t.x.len() != raw.rank || t.lambda.len() != raw.rank {
                return Err(D::Error::custom(format!(
                    "term exponents must have length {}",
                    raw.rank
                )));
            }
            let c = rational::parse(&t.coeff).map_err(D::Error::custom)?;
            e.add_term(
                NoKey {
                    x: MultiIndex(t.x),
                    lam: MultiIndex(t.lambda),
                },
                c,
            );
        }
        Ok(e)
    }
}

pub fn no_mul(a: &NOElement, b: &NOElement) -> Result<NOElement, Error> {
    a.mul(b)
}

/// `ab - ba`.
pub fn commutator_uenv(a: &NOElement, b: &NOElement) -> Result<NOElement, Error> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// The projection `mu : U(b) -> S(t*)` sending every `X_i` to zero.
pub fn mu_projection(a: &NOElement) -> SparsePoly {
    let vars = lambda_vars(a.rank);
    SparsePoly::from_terms(
        &vars,
        a.terms
            .iter()
            .filter(|(k, _)| k.x.is_zero())
            .map(|(k, c)| (k.lam.clone(), c.clone())),
    )
}

/// `Omega = sum G_ij lambda_i lambda_j + sum X_i^2`.
pub fn build_omega(rs: &RootSystem) -> NOElement {
    let l = rs.rank;
    let mut e = NOElement::zero(l);
    for i in 0..l {
        for j in 0..l {
            let lam = MultiIndex::unit(l, i).add(&MultiIndex::unit(l, j));
            e.add_term(
                NoKey {
                    x: MultiIndex::zeros(l),
                    lam,
                },
                rs.coroot_gram[i][j].clone(),
            );
        }
        e.add_term(
            NoKey {
                x: MultiIndex::unit(l, i).scaled(2),
                lam: MultiIndex::zeros(l),
            },
            Rational::one(),
        );
    }
    e
}

/// The monomials `X^{2I} lambda^J` with `2|I| + |J| <= d`.
pub fn even_ansatz(rank: usize, d: u32) -> Vec<NoKey> {
    let mut keys = Vec::new();
    for half in 0..=d / 2 {
        for i in MultiIndex::all_of_degree(rank, half) {
            for j in MultiIndex::all_up_to_degree(rank, d - 2 * half) {
                keys.push(NoKey { x: i.scaled(2), lam: j });
            }
        }
    }
    keys
}

/// The unique `Omega_k` with `[Omega_k, Omega] = 0`, `mu(Omega_k) = u_k` and
/// filtration degree `deg u_k`.
pub fn solve_omega_k(rs: &RootSystem, u_k: &SparsePoly) -> Result<NOElement, Error> {
    let l = rs.rank;
    if u_k.nvars() != l {
        return Err(Error::RankMismatch(u_k.nvars(), l));
    }
    if !u_k.is_homogeneous() || u_k.is_zero() {
        return Err(Error::Precondition(
            "u_k must be a nonzero homogeneous polynomial".into(),
        ));
    }
    let d = u_k.total_degree().unwrap();
    let omega = build_omega(rs);
    let ansatz = even_ansatz(l, d);

    // rows of [ansatz, Omega] = 0, keyed by output monomial
    let mut rows: BTreeMap<NoKey, Vec<(usize, Rational)>> = BTreeMap::new();
    for (col, key) in ansatz.iter().enumerate() {
        let mono = NOElement::term(l, key.x.clone(), key.lam.clone(), Rational::one());
        let br = commutator_uenv(&mono, &omega)?;
        for (k, c) in br.terms() {
            rows.entry(k.clone()).or_default().push((col, c.clone()));
        }
    }
    let mut sys = SparseSystem::new(ansatz.len());
    for (_, row) in rows {
        sys.push_row(row, Rational::zero());
    }
    // mu(ansatz) = u_k
    for (col, key) in ansatz.iter().enumerate() {
        if key.x.is_zero() {
            sys.push_row([(col, Rational::one())], u_k.coeff(&key.lam));
        }
    }
    match sys.solve() {
        LinearSolution::Unique(sol) => {
            let mut out = NOElement::zero(l);
            for (key, c) in ansatz.into_iter().zip(sol) {
                out.add_term(key, c);
            }
            Ok(out)
        }
        LinearSolution::Affine { kernel, .. } => Err(Error::LiftSolve(format!(
            "kernel of dimension {} for degree {d}",
            kernel.len()
        ))),
        LinearSolution::Inconsistent => Err(Error::LiftSolve(format!("inconsistent system for degree {d}"))),
    }
}

/// Variables `Q_1..Q_l` (weight 2) followed by `L_1..L_l` (weight 1).
pub fn ql_vars(rank: usize) -> Arc<VarSet> {
    let names = (1..=rank)
        .map(|i| format!("Q{i}"))
        .chain((1..=rank).map(|i| format!("L{i}")));
    let weights = std::iter::repeat_n(2, rank)
        .chain(std::iter::repeat_n(1, rank))
        .collect();
    VarSet::new(names, weights)
}

/// Rewrites `X^{2I} lambda^J` as `Q^I L^J`; fails on an odd `X` exponent.
pub fn to_ql_poly(e: &NOElement) -> Result<SparsePoly, Error> {
    let l = e.rank;
    let vars = ql_vars(l);
    let mut p = SparsePoly::zero(&vars);
    for (k, c) in e.terms() {
        if k.x.0.iter().any(|x| x % 2 != 0) {
            return Err(Error::OddXExponent(e.to_string()));
        }
        let exps: Vec<u32> = k.x.0.iter().map(|x| x / 2).chain(k.lam.0.iter().copied()).collect();
        p.add_term(MultiIndex(exps), c.clone());
    }
    Ok(p)
}

/// Splits `Omega_k = F_k({X_i^2}, {lambda_i}) + f_k({X_i^2}, {lambda_i})` with `F_k`
/// the part of weighted degree `deg Omega_k` and `f_k` the lower-order remainder.
pub fn split_f(omega_k: &NOElement) -> Result<(SparsePoly, SparsePoly), Error> {
    let p = to_ql_poly(omega_k)?;
    let d = p.weighted_degree().unwrap_or(0);
    let top = p.homogeneous_part(d);
    let rest = &p - &top;
    let l = omega_k.rank();
    if rest.terms().any(|(m, _)| m.0[..l].iter().all(|&e| e == 0)) {
        return Err(Error::PureLambdaRemainder(rest.to_string()));
    }
    Ok((top, rest))
}

/// Poisson bracket on `Q[P_1..P_l, lambda_1..lambda_l]` (variables laid out as
/// in [`ql_vars`]) with `{lambda_i, P_j} = 2 delta_ij P_j` and all other
/// brackets of generators zero.
pub fn poisson_bracket(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    let l = a.nvars() / 2;
    let vars = a.vars().clone();
    let mut out = SparsePoly::zero(&vars);
    for i in 0..l {
        let p_i = SparsePoly::monomial(&vars, MultiIndex::unit(2 * l, i), int(2));
        let t = &(&a.partial(l + i) * &b.partial(i)) - &(&a.partial(i) * &b.partial(l + i));
        out = &out + &(&p_i * &t);
    }
    out
}

/// True iff `{F_k, F_1}` vanishes identically.
pub fn poisson_check(f_k: &SparsePoly, f_1: &SparsePoly) -> bool {
    poisson_bracket(f_k, f_1).is_zero()
}

/// One quantum Toda integral together with its symbol decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TodaIntegral {
    pub k: usize,
    pub degree: u32,
    pub u: SparsePoly,
    pub omega: NOElement,
    #[serde(rename = "F")]
    pub big_f: SparsePoly,
    #[serde(rename = "f")]
    pub small_f: SparsePoly,
}

pub fn toda_integrals(rs: &RootSystem, inv: &InvariantSet) -> Result<Vec<TodaIntegral>, Error> {
    inv.generators
        .iter()
        .zip(&inv.degrees)
        .enumerate()
        .map(|(k, (u, &degree))| {
            let omega = solve_omega_k(rs, u)?;
            let (big_f, small_f) = split_f(&omega)?;
            Ok(TodaIntegral {
                k: k + 1,
                degree,
                u: u.clone(),
                omega,
                big_f,
                small_f,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{chevalley_generators, quadratic_invariant};
    use crate::rootsys::{LieType, WeylGroup};
    use proptest::prelude::*;

    fn x(i: usize) -> NOElement {
        NOElement::x(2, i)
    }
    fn lam(i: usize) -> NOElement {
        NOElement::lambda(2, i)
    }

    #[test]
    fn lambda_past_x() {
        let prod = lam(0).mul(&x(0)).unwrap();
        assert_eq!(prod, x(0).mul(&lam(0)).unwrap().add(&x(0)).unwrap());
        let sq = lam(0).pow(2).mul(&x(0)).unwrap();
        let expect = x(0)
            .mul(&lam(0).pow(2))
            .unwrap()
            .add(&x(0).mul(&lam(0)).unwrap().scale(&int(2)))
            .unwrap()
            .add(&x(0))
            .unwrap();
        assert_eq!(sq, expect);
        // already normal ordered
        let xl = x(0).mul(&lam(0)).unwrap();
        assert_eq!(xl.len(), 1);
        assert_eq!(xl.to_string(), "X1*l1");
    }

    #[test]
    fn commutators() {
        assert_eq!(commutator_uenv(&lam(0), &x(0)).unwrap(), x(0));
        assert!(commutator_uenv(&lam(0), &lam(1)).unwrap().is_zero());
        assert!(commutator_uenv(&lam(1), &x(0)).unwrap().is_zero());
        let x1sq = x(0).pow(2);
        assert_eq!(commutator_uenv(&x1sq, &lam(0)).unwrap(), x1sq.scale(&int(-2)));
    }

    #[test]
    fn rank_mismatch() {
        assert!(matches!(NOElement::x(1, 0).mul(&x(0)), Err(Error::RankMismatch(1, 2))));
    }

    #[test]
    fn projection() {
        let e = x(0)
            .pow(2)
            .mul(&lam(1))
            .unwrap()
            .add(&lam(0).mul(&lam(1)).unwrap())
            .unwrap();
        assert_eq!(mu_projection(&e).to_string(), "l1*l2");
        assert!(mu_projection(&x(1).pow(3)).is_zero());
    }

    #[test]
    fn omega_a1_and_a2() {
        let rs = RootSystem::new(LieType::A, 1).unwrap();
        let om = build_omega(&rs);
        assert_eq!(om.to_string(), "X1^2 + 2*l1^2");
        assert_eq!(mu_projection(&om).to_string(), "2*l1^2");
        let rs = RootSystem::new(LieType::A, 2).unwrap();
        let om = build_omega(&rs);
        assert_eq!(om.to_string(), "X1^2 + X2^2 + 2*l1^2 - 2*l1*l2 + 2*l2^2");
        assert_eq!(mu_projection(&om), quadratic_invariant(&rs));
        assert_eq!(om.filtration_degree(), Some(2));
    }

    #[test]
    fn lift_of_u1_is_omega() {
        for (t, r) in [(LieType::A, 1), (LieType::A, 2)] {
            let rs = RootSystem::new(t, r).unwrap();
            let om = solve_omega_k(&rs, &quadratic_invariant(&rs)).unwrap();
            assert_eq!(om, build_omega(&rs));
        }
    }

    #[test]
    fn split_rank_one() {
        let rs = RootSystem::new(LieType::A, 1).unwrap();
        let (big, small) = split_f(&build_omega(&rs)).unwrap();
        assert_eq!(big.to_string(), "2*L1^2 + Q1");
        assert!(small.is_zero());
        assert!(poisson_check(&big, &big));
    }

    #[test]
    fn odd_and_pure_lambda_failures() {
        assert!(matches!(split_f(&x(0)), Err(Error::OddXExponent(_))));
        let bad = lam(0).pow(2).add(&lam(0)).unwrap();
        assert!(matches!(split_f(&bad), Err(Error::PureLambdaRemainder(_))));
    }

    #[test]
    fn non_homogeneous_input_is_rejected() {
        let rs = RootSystem::new(LieType::A, 1).unwrap();
        let v = lambda_vars(1);
        let p = &SparsePoly::var(&v, 0) + &SparsePoly::var(&v, 0).pow(2);
        assert!(solve_omega_k(&rs, &p).is_err());
    }

    /// Exact division by a polynomial, `None` if the remainder is nonzero.
    fn exact_div(num: &SparsePoly, den: &SparsePoly) -> Option<SparsePoly> {
        let lead = |p: &SparsePoly| {
            p.terms()
                .max_by(|a, b| a.0 .0.cmp(&b.0 .0))
                .map(|(m, c)| (m.clone(), c.clone()))
        };
        let (dm, dc) = lead(den)?;
        let mut rem = num.clone();
        let mut quo = SparsePoly::zero(num.vars());
        while let Some((m, c)) = lead(&rem) {
            let qm = m.checked_sub(&dm)?;
            let t = SparsePoly::monomial(num.vars(), qm, c / &dc);
            rem = &rem - &(&t * den);
            quo = &quo + &t;
        }
        Some(quo)
    }

    /// Independent route to `Omega_k`: writing `Omega_k = sum_I X^{2I} p_I(lambda)`,
    /// the commutant condition reads
    /// `(u_1(lambda + 2I) - u_1(lambda)) p_I = sum_j (p_{I-e_j}(lambda + 2e_j) - p_{I-e_j}(lambda))`,
    /// which determines every `p_I` from `p_0 = u_k` by exact division.
    fn lift_by_recursion(rs: &RootSystem, u_k: &SparsePoly) -> NOElement {
        let l = rs.rank;
        let v = lambda_vars(l);
        let d = u_k.total_degree().unwrap();
        let u1 = quadratic_invariant(rs);
        let shift = |p: &SparsePoly, s: &MultiIndex| {
            let imgs: Vec<SparsePoly> = (0..l)
                .map(|i| &SparsePoly::var(&v, i) + &SparsePoly::constant(&v, int(s.0[i] as i64)))
                .collect();
            p.substitute(&imgs).unwrap()
        };
        let mut parts: BTreeMap<MultiIndex, SparsePoly> = BTreeMap::new();
        parts.insert(MultiIndex::zeros(l), u_k.clone());
        for half in 1..=d / 2 {
            for i in MultiIndex::all_of_degree(l, half) {
                let mut num = SparsePoly::zero(&v);
                for j in 0..l {
                    if let Some(prev) = i.checked_sub(&MultiIndex::unit(l, j)) {
                        let p = &parts[&prev];
                        num = &num + &(&shift(p, &MultiIndex::unit(l, j).scaled(2)) - p);
                    }
                }
                let den = &shift(&u1, &i.scaled(2)) - &u1;
                let p_i = exact_div(&num, &den).expect("exact division");
                parts.insert(i, p_i);
            }
        }
        let mut out = NOElement::zero(l);
        for (i, p) in parts {
            for (m, c) in p.terms() {
                out.add_term(
                    NoKey {
                        x: i.scaled(2),
                        lam: m.clone(),
                    },
                    c.clone(),
                );
            }
        }
        out
    }

    #[test]
    fn solver_matches_recursive_oracle() {
        for (t, r) in [(LieType::A, 2), (LieType::A, 3), (LieType::B, 2), (LieType::G, 2)] {
            let rs = RootSystem::new(t, r).unwrap();
            let w = WeylGroup::generate(&rs);
            let inv = chevalley_generators(&rs, &w).unwrap();
            for u in &inv.generators {
                let solved = solve_omega_k(&rs, u).unwrap();
                assert_eq!(solved, lift_by_recursion(&rs, u), "{t}{r}");
                assert!(commutator_uenv(&solved, &build_omega(&rs)).unwrap().is_zero());
                assert_eq!(&mu_projection(&solved), u);
                assert_eq!(solved.filtration_degree(), u.total_degree());
            }
        }
    }

    #[test]
    fn a2_cubic_integral() {
        let rs = RootSystem::new(LieType::A, 2).unwrap();
        let w = WeylGroup::generate(&rs);
        let inv = chevalley_generators(&rs, &w).unwrap();
        let ints = toda_integrals(&rs, &inv).unwrap();
        let om = build_omega(&rs);
        let (f1, _) = split_f(&om).unwrap();
        for it in &ints {
            assert!(commutator_uenv(&it.omega, &om).unwrap().is_zero());
            assert!(it.omega.is_even_in_x());
            // F_k(0, L) = u_k(L)
            let l = 2;
            let zero_q: Vec<SparsePoly> = (0..2 * l)
                .map(|i| {
                    if i < l {
                        SparsePoly::zero(&lambda_vars(l))
                    } else {
                        SparsePoly::var(&lambda_vars(l), i - l)
                    }
                })
                .collect();
            assert_eq!(it.big_f.substitute(&zero_q).unwrap(), it.u);
            assert!(it.small_f.terms().all(|(m, _)| m.0[..l].iter().any(|&e| e > 0)));
            assert!(poisson_check(&it.big_f, &f1));
        }
        assert!(commutator_uenv(&ints[0].omega, &ints[1].omega).unwrap().is_zero());
    }

    // ---- independent oracle for the normal-ordering product: the faithful
    // representation X_i -> x_i, lambda_i -> x_i d/dx_i on Q[x_1, x_2].

    fn represent(e: &NOElement, p: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero(p.vars());
        for (k, c) in e.terms() {
            let mut q = p.clone();
            for i in (0..e.rank()).rev() {
                for _ in 0..k.lam.0[i] {
                    q = q.euler(i);
                }
            }
            let xm = SparsePoly::monomial(p.vars(), k.x.clone(), c.clone());
            out = &out + &(&xm * &q);
        }
        out
    }

    fn arb_element() -> impl Strategy<Value = NOElement> {
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..3, 0u32..3), -4i64..5), 0..4).prop_map(|ts| {
            let mut e = NOElement::zero(2);
            for ((a, b, c, d), n) in ts {
                e.add_term(
                    NoKey {
                        x: MultiIndex(vec![a, b]),
                        lam: MultiIndex(vec![c, d]),
                    },
                    int(n),
                );
            }
            e
        })
    }

    proptest! {
        #[test]
        fn product_matches_operator_composition(a in arb_element(), b in arb_element()) {
            let v = VarSet::indexed("x", 2, 1);
            let ab = a.mul(&b).unwrap();
            for mono in MultiIndex::all_up_to_degree(2, 3) {
                let p = SparsePoly::monomial(&v, mono, int(1));
                prop_assert_eq!(represent(&ab, &p), represent(&a, &represent(&b, &p)));
            }
        }

        #[test]
        fn associativity(a in arb_element(), b in arb_element(), c in arb_element()) {
            let lhs = a.mul(&b).unwrap().mul(&c).unwrap();
            let rhs = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn commutator_is_antisymmetric(a in arb_element(), b in arb_element()) {
            let ab = commutator_uenv(&a, &b).unwrap();
            let ba = commutator_uenv(&b, &a).unwrap();
            prop_assert!(ab.add(&ba).unwrap().is_zero());
        }

        #[test]
        fn json_round_trip(a in arb_element()) {
            let s = serde_json::to_string(&a).unwrap();
            let back: NOElement = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
