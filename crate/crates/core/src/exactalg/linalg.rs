//! Exact linear algebra over the rationals.
//!
//! Elimination is Gauss-Jordan on sparse rows. The pivot in each column is the
//! candidate entry of smallest absolute value, ties broken by the sparser row
//! and then by the row index, so results are deterministic.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::rational::Rational;

pub type DenseMatrix = Vec<Vec<Rational>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    Unique(Vec<Rational>),
    /// `particular + span(kernel)`; the kernel vectors form a basis.
    Affine {
        particular: Vec<Rational>,
        kernel: Vec<Vec<Rational>>,
    },
    Inconsistent,
}

impl LinearSolution {
    pub fn kernel_dim(&self) -> Option<usize> {
        match self {
            LinearSolution::Unique(_) => Some(0),
            LinearSolution::Affine { kernel, .. } => Some(kernel.len()),
            LinearSolution::Inconsistent => None,
        }
    }
}

type Row = BTreeMap<usize, Rational>;

/// A linear system `A x = b` stored row by row with sparse rows.
#[derive(Clone, Debug, Default)]
pub struct SparseSystem {
    ncols: usize,
    rows: Vec<(Row, Rational)>,
}

impl SparseSystem {
    pub fn new(ncols: usize) -> Self {
        SparseSystem {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Adds the equation `sum coeffs[k].1 * x[coeffs[k].0] = rhs`.
    pub fn push_row(&mut self, coeffs: impl IntoIterator<Item = (usize, Rational)>, rhs: Rational) {
        let mut row = Row::new();
        for (j, c) in coeffs {
            assert!(j < self.ncols, "column {j} out of range");
            if c.is_zero() {
                continue;
            }
            let e = row.entry(j).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                row.remove(&j);
            }
        }
        if row.is_empty() && rhs.is_zero() {
            return;
        }
        self.rows.push((row, rhs));
    }

    pub fn solve(self) -> LinearSolution {
        let ncols = self.ncols;
        let mut rows = self.rows;
        let mut is_pivot_row = vec![false; rows.len()];
        // pivot column -> row index
        let mut pivots: Vec<(usize, usize)> = Vec::new();

        for col in 0..ncols {
            let mut best: Option<(usize, Rational, usize)> = None;
            for (r, (row, _)) in rows.iter().enumerate() {
                if is_pivot_row[r] {
                    continue;
                }
                if let Some(v) = row.get(&col) {
                    let mag = v.abs();
                    let better = match &best {
                        None => true,
                        Some((_, bm, blen)) => mag < *bm || (mag == *bm && row.len() < *blen),
                    };
                    if better {
                        best = Some((r, mag, row.len()));
                    }
                }
            }
            let Some((p, _, _)) = best else { continue };
            is_pivot_row[p] = true;
            let inv = rows[p].0[&col].recip();
            {
                let (row, rhs) = &mut rows[p];
                for v in row.values_mut() {
                    *v *= &inv;
                }
                *rhs *= &inv;
            }
            let (prow, prhs) = rows[p].clone();
            for (r, (row, rhs)) in rows.iter_mut().enumerate() {
                if r == p {
                    continue;
                }
                let Some(f) = row.get(&col).cloned() else { continue };
                for (j, v) in &prow {
                    let e = row.entry(*j).or_insert_with(Rational::zero);
                    *e -= &f * v;
                    if e.is_zero() {
                        row.remove(j);
                    }
                }
                *rhs -= &f * &prhs;
            }
            pivots.push((col, p));
        }

        if rows.iter().any(|(row, rhs)| row.is_empty() && !rhs.is_zero()) {
            return LinearSolution::Inconsistent;
        }

        let mut particular = vec![Rational::zero(); ncols];
        let mut pivot_of_col = vec![None; ncols];
        for &(c, r) in &pivots {
            particular[c] = rows[r].1.clone();
            pivot_of_col[c] = Some(r);
        }
        let free: Vec<usize> = (0..ncols).filter(|c| pivot_of_col[*c].is_none()).collect();
        if free.is_empty() {
            return LinearSolution::Unique(particular);
        }
        let kernel = free
            .iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); ncols];
                v[f] = Rational::one();
                for &(c, r) in &pivots {
                    if let Some(x) = rows[r].0.get(&f) {
                        v[c] = -x.clone();
                    }
                }
                v
            })
            .collect();
        LinearSolution::Affine { particular, kernel }
    }
}

/// Solves `A x = b` for a dense matrix.
pub fn solve_linear(a: &[Vec<Rational>], b: &[Rational]) -> LinearSolution {
    assert_eq!(a.len(), b.len(), "one right-hand side per row");
    let ncols = a.first().map_or(0, Vec::len);
    let mut sys = SparseSystem::new(ncols);
    for (row, rhs) in a.iter().zip(b) {
        assert_eq!(row.len(), ncols, "ragged matrix");
        sys.push_row(row.iter().cloned().enumerate(), rhs.clone());
    }
    sys.solve()
}

pub fn rank(a: &[Vec<Rational>]) -> usize {
    let ncols = a.first().map_or(0, Vec::len);
    match solve_linear(a, &vec![Rational::zero(); a.len()]) {
        LinearSolution::Unique(_) => ncols,
        LinearSolution::Affine { kernel, .. } => ncols - kernel.len(),
        LinearSolution::Inconsistent => unreachable!("homogeneous systems are consistent"),
    }
}

/// Determinant by fraction-free (Bareiss) elimination with row swaps.
pub fn determinant(a: &[Vec<Rational>]) -> Rational {
    let n = a.len();
    if n == 0 {
        return Rational::one();
    }
    let mut m: DenseMatrix = a.to_vec();
    let mut sign = Rational::one();
    let mut prev = Rational::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = Rational::zero();
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

pub fn leading_principal_minors(a: &[Vec<Rational>]) -> Vec<Rational> {
    (1..=a.len())
        .map(|k| {
            let sub: DenseMatrix = a[..k].iter().map(|r| r[..k].to_vec()).collect();
            determinant(&sub)
        })
        .collect()
}

pub fn identity(n: usize) -> DenseMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> DenseMatrix {
    let inner = b.len();
    let ncols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner);
            (0..ncols)
                .map(|j| {
                    let mut acc = Rational::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc += &row[k] * &b[k][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Rational::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

pub fn transpose(a: &[Vec<Rational>]) -> DenseMatrix {
    let ncols = a.first().map_or(0, Vec::len);
    (0..ncols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Inverse of a square matrix, `None` if singular.
pub fn inverse(a: &[Vec<Rational>]) -> Option<DenseMatrix> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Rational> = (0..n)
            .map(|i| if i == j { Rational::one() } else { Rational::zero() })
            .collect();
        match solve_linear(a, &e) {
            LinearSolution::Unique(x) => cols.push(x),
            _ => return None,
        }
    }
    Some(transpose(&cols))
}
