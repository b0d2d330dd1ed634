//! Root systems, coroots, fundamental weights and Weyl groups.
//!
//! Coordinates used throughout:
//!
//! * weights (elements of `t*`) in the fundamental-weight basis, so the
//!   `i`-th coordinate of `mu` is `mu(alpha_i^vee)`;
//! * coroots (elements of `t`) in the simple-coroot basis;
//! * roots, when stated so, in the simple-root basis.
//!
//! The Cartan matrix follows `C[i][j] = alpha_j(alpha_i^vee)`, so column `j`
//! of `C` is `alpha_j` in weight coordinates. Long roots have squared length 2.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactalg::linalg::{self, DenseMatrix};
use crate::exactalg::rational::{self, int, Rational};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LieType {
    A,
    B,
    C,
    D,
    G,
}

impl LieType {
    pub fn letter(self) -> char {
        match self {
            LieType::A => 'A',
            LieType::B => 'B',
            LieType::C => 'C',
            LieType::D => 'D',
            LieType::G => 'G',
        }
    }

    pub fn is_supported(self, rank: usize) -> bool {
        match self {
            LieType::A => (1..=4).contains(&rank),
            LieType::B | LieType::C => (2..=3).contains(&rank),
            LieType::D => rank == 4,
            LieType::G => rank == 2,
        }
    }
}

impl fmt::Display for LieType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for LieType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(LieType::A),
            "B" => Ok(LieType::B),
            "C" => Ok(LieType::C),
            "D" => Ok(LieType::D),
            "G" => Ok(LieType::G),
            other => Err(Error::Parse(format!("unknown Lie type {other:?}"))),
        }
    }
}

/// A positive root together with its coroot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositiveRoot {
    /// Simple-root coordinates.
    pub root: Vec<i64>,
    /// Fundamental-weight coordinates.
    pub weight: Vec<i64>,
    /// Simple-coroot coordinates of `2 alpha / <alpha, alpha>`.
    pub coroot: Vec<i64>,
}

impl PositiveRoot {
    /// Height of the coroot, `sum_j c_j` for `alpha^vee = sum_j c_j alpha_j^vee`.
    pub fn coroot_height(&self) -> i64 {
        self.coroot.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    pub lie_type: LieType,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    /// `<alpha_i, alpha_i>` for the simple roots.
    pub root_lengths: Vec<Rational>,
    /// `G[i][j] = <alpha_i^vee, alpha_j^vee>`.
    pub coroot_gram: DenseMatrix,
    pub positive_roots: Vec<PositiveRoot>,
}

fn cartan_matrix(t: LieType, l: usize) -> Vec<Vec<i64>> {
    let mut c = vec![vec![0i64; l]; l];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize, cij: i64, cji: i64| {
        c[i][j] = cij;
        c[j][i] = cji;
    };
    match t {
        LieType::A => (0..l.saturating_sub(1)).for_each(|i| link(i, i + 1, -1, -1)),
        LieType::B => {
            (0..l - 2).for_each(|i| link(i, i + 1, -1, -1));
            // alpha_l short
            link(l - 2, l - 1, -1, -2);
        }
        LieType::C => {
            (0..l - 2).for_each(|i| link(i, i + 1, -1, -1));
            // alpha_l long
            link(l - 2, l - 1, -2, -1);
        }
        LieType::D => {
            (0..l - 2).for_each(|i| link(i, i + 1, -1, -1));
            link(l - 3, l - 1, -1, -1);
        }
        // alpha_1 short, alpha_2 long
        LieType::G => link(0, 1, -3, -1),
    }
    c
}

/// Squared lengths `r_i` with `C[i][j] r_i = C[j][i] r_j`, longest normalised to 2.
fn symmetrizer(c: &[Vec<i64>]) -> Vec<Rational> {
    let l = c.len();
    let mut r: Vec<Option<Rational>> = vec![None; l];
    r[0] = Some(Rational::one());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for j in 0..l {
            if j != i && c[i][j] != 0 && r[j].is_none() {
                let ri = r[i].clone().unwrap();
                r[j] = Some(ri * int(c[i][j]) / int(c[j][i]));
                queue.push_back(j);
            }
        }
    }
    let r: Vec<Rational> = r.into_iter().map(|x| x.expect("connected Dynkin diagram")).collect();
    let max = r.iter().max().unwrap().clone();
    r.iter().map(|x| x * int(2) / &max).collect()
}

impl RootSystem {
    pub fn new(lie_type: LieType, rank: usize) -> Result<Self, Error> {
        if !lie_type.is_supported(rank) {
            return Err(Error::Unsupported {
                lie_type: lie_type.letter(),
                rank,
            });
        }
        let cartan = cartan_matrix(lie_type, rank);
        let root_lengths = symmetrizer(&cartan);
        let coroot_gram: DenseMatrix = (0..rank)
            .map(|i| (0..rank).map(|j| int(2 * cartan[i][j]) / &root_lengths[j]).collect())
            .collect();
        let mut rs = RootSystem {
            lie_type,
            rank,
            cartan,
            root_lengths,
            coroot_gram,
            positive_roots: Vec::new(),
        };
        rs.positive_roots = rs.enumerate_positive_roots();
        Ok(rs)
    }

    /// Positive roots by closure of the simple roots under simple reflections,
    /// sorted by height and then lexicographically.
    fn enumerate_positive_roots(&self) -> Vec<PositiveRoot> {
        let l = self.rank;
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut queue: VecDeque<Vec<i64>> = VecDeque::new();
        for i in 0..l {
            let mut e = vec![0; l];
            e[i] = 1;
            seen.insert(e.clone());
            queue.push_back(e);
        }
        while let Some(b) = queue.pop_front() {
            for i in 0..l {
                // s_i(beta) = beta - beta(alpha_i^vee) alpha_i
                let pairing: i64 = (0..l).map(|j| b[j] * self.cartan[i][j]).sum();
                let mut nb = b.clone();
                nb[i] -= pairing;
                if nb.iter().all(|&x| x >= 0) && nb.iter().any(|&x| x > 0) && seen.insert(nb.clone()) {
                    queue.push_back(nb);
                }
            }
        }
        let mut roots: Vec<Vec<i64>> = seen.into_iter().collect();
        roots.sort_by(|a, b| a.iter().sum::<i64>().cmp(&b.iter().sum::<i64>()).then_with(|| b.cmp(a)));
        roots.into_iter().map(|b| self.complete_root(b)).collect()
    }

    fn complete_root(&self, b: Vec<i64>) -> PositiveRoot {
        let l = self.rank;
        let weight: Vec<i64> = (0..l).map(|k| (0..l).map(|j| b[j] * self.cartan[k][j]).sum()).collect();
        // <beta, beta> with <alpha_i, alpha_j> = C[i][j] r_i / 2
        let mut norm = Rational::zero();
        for i in 0..l {
            for j in 0..l {
                norm += int(b[i] * b[j] * self.cartan[i][j]) * &self.root_lengths[i] / int(2);
            }
        }
        let coroot: Vec<i64> = (0..l)
            .map(|j| {
                let c = int(b[j]) * &self.root_lengths[j] / &norm;
                assert!(c.is_integer(), "coroot coordinates are integral");
                i64::try_from(c.to_integer()).unwrap()
            })
            .collect();
        PositiveRoot {
            root: b,
            weight,
            coroot,
        }
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    /// `alpha_i` in fundamental-weight coordinates.
    pub fn simple_root(&self, i: usize) -> Vec<Rational> {
        self.cartan.iter().map(|row| int(row[i])).collect()
    }

    /// `alpha_i^vee` in simple-coroot coordinates.
    pub fn simple_coroot(&self, i: usize) -> Vec<Rational> {
        (0..self.rank)
            .map(|j| if i == j { Rational::one() } else { Rational::zero() })
            .collect()
    }

    /// `lambda_i` in fundamental-weight coordinates.
    pub fn fundamental_weight(&self, i: usize) -> Vec<Rational> {
        self.simple_coroot(i)
    }

    /// Inner product on `t*`; the Gram matrix of the fundamental weights is `G^{-1}`.
    pub fn weight_inner_product(&self, mu: &[Rational], nu: &[Rational]) -> Rational {
        let ginv = linalg::inverse(&self.coroot_gram).expect("coroot Gram matrix is nonsingular");
        let gn = linalg::mat_vec(&ginv, nu);
        mu.iter().zip(&gn).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    /// Inner product on `t` in simple-coroot coordinates.
    pub fn coroot_inner_product(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let gy = linalg::mat_vec(&self.coroot_gram, y);
        x.iter().zip(&gy).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    /// Exact leading principal minors of the coroot Gram matrix.
    pub fn gram_minors(&self) -> Vec<Rational> {
        linalg::leading_principal_minors(&self.coroot_gram)
    }

    pub fn gram_diag(&self, i: usize) -> &Rational {
        &self.coroot_gram[i][i]
    }
}

/// `mu(beta^vee)` for a weight in fundamental-weight coordinates and a coroot
/// in simple-coroot coordinates.
pub fn pairing(mu: &[Rational], coroot: &[Rational]) -> Rational {
    assert_eq!(mu.len(), coroot.len());
    mu.iter().zip(coroot).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

#[derive(Clone, Debug)]
pub struct WeylElement {
    /// Row-major `l x l` integer matrix acting on weight coordinates.
    pub matrix: Vec<i64>,
    pub length: usize,
    /// A reduced word in the simple reflections (0-based indices).
    pub word: Vec<usize>,
    pub inverse: usize,
}

#[derive(Clone, Debug)]
pub struct WeylGroup {
    pub rank: usize,
    pub elements: Vec<WeylElement>,
    index: HashMap<Vec<i64>, usize>,
    pub longest: usize,
    /// Element index of `s_i`.
    pub simple: Vec<usize>,
    /// Reflection matrices `s_beta` for each positive root, same order as
    /// [`RootSystem::positive_roots`].
    reflections: Vec<Vec<i64>>,
    /// Inversion counts `#{beta > 0 : w(beta) < 0}`.
    pub inversions: Vec<usize>,
}

fn int_mat_mul(a: &[i64], b: &[i64], l: usize) -> Vec<i64> {
    let mut out = vec![0; l * l];
    for i in 0..l {
        for k in 0..l {
            let x = a[i * l + k];
            if x == 0 {
                continue;
            }
            for j in 0..l {
                out[i * l + j] += x * b[k * l + j];
            }
        }
    }
    out
}

fn int_identity(l: usize) -> Vec<i64> {
    let mut m = vec![0; l * l];
    for i in 0..l {
        m[i * l + i] = 1;
    }
    m
}

/// `s_beta(mu) = mu - mu(beta^vee) beta` as a weight-coordinate matrix.
fn reflection_matrix(root: &PositiveRoot, l: usize) -> Vec<i64> {
    let mut m = int_identity(l);
    for k in 0..l {
        for i in 0..l {
            m[k * l + i] -= root.weight[k] * root.coroot[i];
        }
    }
    m
}

impl WeylGroup {
    /// Breadth-first closure over right multiplication by simple reflections.
    pub fn generate(rs: &RootSystem) -> WeylGroup {
        let l = rs.rank;
        let gens: Vec<Vec<i64>> = (0..l)
            .map(|i| {
                let mut m = int_identity(l);
                for k in 0..l {
                    m[k * l + i] -= rs.cartan[k][i];
                }
                m
            })
            .collect();
        let mut elements = vec![WeylElement {
            matrix: int_identity(l),
            length: 0,
            word: vec![],
            inverse: 0,
        }];
        let mut index = HashMap::from([(int_identity(l), 0usize)]);
        let mut head = 0;
        while head < elements.len() {
            for (i, g) in gens.iter().enumerate() {
                let m = int_mat_mul(&elements[head].matrix, g, l);
                if !index.contains_key(&m) {
                    let mut word = elements[head].word.clone();
                    word.push(i);
                    index.insert(m.clone(), elements.len());
                    elements.push(WeylElement {
                        matrix: m,
                        length: elements[head].length + 1,
                        word,
                        inverse: 0,
                    });
                }
            }
            head += 1;
        }
        for e in &mut elements {
            let mut m = int_identity(l);
            for &i in e.word.iter().rev() {
                m = int_mat_mul(&m, &gens[i], l);
            }
            e.inverse = index[&m];
        }
        let longest = (0..elements.len())
            .max_by_key(|&k| (elements[k].length, std::cmp::Reverse(k)))
            .unwrap();
        let simple = gens.iter().map(|g| index[g]).collect();
        let reflections = rs.positive_roots.iter().map(|r| reflection_matrix(r, l)).collect();

        let positive: HashSet<Vec<i64>> = rs.positive_roots.iter().map(|r| r.weight.clone()).collect();
        let inversions = elements
            .iter()
            .map(|w| {
                rs.positive_roots
                    .iter()
                    .filter(|r| {
                        let img: Vec<i64> = (0..l)
                            .map(|i| (0..l).map(|k| w.matrix[i * l + k] * r.weight[k]).sum())
                            .collect();
                        let neg: Vec<i64> = img.iter().map(|x| -x).collect();
                        positive.contains(&neg)
                    })
                    .count()
            })
            .collect();

        WeylGroup {
            rank: l,
            elements,
            index,
            longest,
            simple,
            reflections,
            inversions,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn length(&self, w: usize) -> usize {
        self.elements[w].length
    }

    pub fn index_of(&self, matrix: &[i64]) -> Option<usize> {
        self.index.get(matrix).copied()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        let m = int_mat_mul(&self.elements[a].matrix, &self.elements[b].matrix, self.rank);
        self.index[&m]
    }

    /// `w s_beta` for the `k`-th positive root.
    pub fn mul_reflection(&self, w: usize, k: usize) -> usize {
        let m = int_mat_mul(&self.elements[w].matrix, &self.reflections[k], self.rank);
        self.index[&m]
    }

    pub fn matrix(&self, w: usize) -> DenseMatrix {
        let l = self.rank;
        (0..l)
            .map(|i| (0..l).map(|j| int(self.elements[w].matrix[i * l + j])).collect())
            .collect()
    }

    /// Action on a weight given in fundamental-weight coordinates.
    pub fn act(&self, w: usize, v: &[Rational]) -> Vec<Rational> {
        linalg::mat_vec(&self.matrix(w), v)
    }

    /// Action on `t` in simple-coroot coordinates (the contragredient action).
    pub fn act_coroot(&self, w: usize, c: &[Rational]) -> Vec<Rational> {
        let inv = self.matrix(self.elements[w].inverse);
        linalg::mat_vec(&linalg::transpose(&inv), c)
    }
}

/// Convenience for tests and the CLI.
pub fn weight_to_string(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(rational::to_string).collect();
    format!("({})", parts.join(", "))
}
