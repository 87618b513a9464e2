//! Dense matrices over any [`Field`], plus the structured matrices the code
//! construction needs (Vandermonde, Reed–Solomon style MDS generators) and
//! exhaustive/sampled submatrix-rank verifiers.

use std::fmt;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::FiniteField;
use crate::scalar::Field;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("duplicate evaluation point at positions {0} and {1}")]
    DuplicatePoints(usize, usize),
    #[error("code length {len} exceeds {max} usable points of the field")]
    FieldTooSmall { len: usize, max: u64 },
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Matrix<F> {
    pub fn new(rows: usize, cols: usize, data: Vec<F>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        let n = rows.len();
        Self::new(n, cols, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn entries(&self) -> &[F] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = &self[(i, t)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(t, j)].clone();
                    let slot = &mut out.data[i * other.cols + j];
                    *slot = slot.clone() + prod;
                }
            }
        }
        Ok(out)
    }

    /// `A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[F]) -> Result<Vec<F>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `xᵀ A` for a row vector `x`.
    pub fn vec_mul(&self, x: &[F]) -> Result<Vec<F>, LinalgError> {
        if x.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} times {}x{}",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![F::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = slot.clone() + xi.clone() * self[(i, j)].clone();
            }
        }
        Ok(out)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])].clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, |i, j| self[(rows[i], j)].clone())
    }

    /// The leading `n` rows.
    pub fn top_rows(&self, n: usize) -> Self {
        let rows: Vec<usize> = (0..n).collect();
        self.select_rows(&rows)
    }

    pub fn vstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch("vstack column count".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Self::new(self.rows + other.rows, self.cols, data)
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.row_reduce(0)
    }

    /// Forward elimination on the leading `cols - aug` columns; returns the
    /// rank of that block. Pivot is the first nonzero entry at or below the
    /// current row.
    fn row_reduce(&mut self, aug: usize) -> usize {
        let pivot_cols = self.cols - aug;
        let mut rank = 0;
        for col in 0..pivot_cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(rank, p);
            let inv = self[(rank, col)].try_inv().expect("nonzero pivot");
            for j in col..self.cols {
                self[(rank, j)] = self[(rank, j)].clone() * inv.clone();
            }
            for r in 0..self.rows {
                if r == rank {
                    continue;
                }
                let factor = self[(r, col)].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..self.cols {
                    let sub = factor.clone() * self[(rank, j)].clone();
                    self[(r, j)] = self[(r, j)].clone() - sub;
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Solve the square system `A x = b`.
    pub fn solve(&self, b: &[F]) -> Result<Vec<F>, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        self.solve_full_column_rank(b)
    }

    /// Solve `A x = b` for a tall matrix of full column rank, checking that
    /// the surplus equations are consistent.
    pub fn solve_full_column_rank(&self, b: &[F]) -> Result<Vec<F>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side of length {} for {} equations",
                b.len(),
                self.rows
            )));
        }
        if self.rows < self.cols {
            return Err(LinalgError::Singular);
        }
        let n = self.cols;
        let mut aug = Self::from_fn(self.rows, n + 1, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let rank = aug.row_reduce(1);
        if rank < n {
            return Err(LinalgError::Singular);
        }
        if (n..self.rows).any(|r| !aug[(r, n)].is_zero()) {
            return Err(LinalgError::Inconsistent);
        }
        Ok((0..n).map(|i| aug[(i, n)].clone()).collect())
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch(
                "inverse of non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                F::one()
            } else {
                F::zero()
            }
        });
        if aug.row_reduce(n) < n {
            return Err(LinalgError::Singular);
        }
        Ok(Self::from_fn(n, n, |i, j| aug[(i, n + j)].clone()))
    }
}

pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

impl<F> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<F: fmt::Debug> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// `rows × points.len()` matrix with entry `(i, j) = points[j]^i`.
pub fn vandermonde<F: Field>(rows: usize, points: &[F]) -> Result<Matrix<F>, LinalgError> {
    for (a, b) in (0..points.len()).tuple_combinations() {
        if points[a] == points[b] {
            return Err(LinalgError::DuplicatePoints(a, b));
        }
    }
    let mut m = Matrix::zeros(rows, points.len());
    for (j, x) in points.iter().enumerate() {
        let mut acc = F::one();
        for i in 0..rows {
            m[(i, j)] = acc.clone();
            acc = acc * x.clone();
        }
    }
    Ok(m)
}

/// `dim × len` Reed–Solomon generator on the nonzero points `1..=len`.
pub fn mds_generator<F: FiniteField>(dim: usize, len: usize) -> Result<Matrix<F>, LinalgError> {
    let max = F::ORDER - 1;
    if len as u64 > max {
        return Err(LinalgError::FieldTooSmall { len, max });
    }
    let points: Vec<F> = (1..=len as u64).map(F::element).collect();
    mds_generator_on(dim, &points)
}

/// Reed–Solomon generator on caller-chosen distinct nonzero points.
pub fn mds_generator_on<F: FiniteField>(
    dim: usize,
    points: &[F],
) -> Result<Matrix<F>, LinalgError> {
    let max = F::ORDER - 1;
    if points.len() as u64 > max {
        return Err(LinalgError::FieldTooSmall {
            len: points.len(),
            max,
        });
    }
    if dim > points.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "generator of dimension {dim} for length {}",
            points.len()
        )));
    }
    vandermonde(dim, points)
}

/// Submatrix sizes above this many column subsets are sampled rather than
/// enumerated.
const EXHAUSTIVE_COLUMNS: usize = 10;
const SAMPLED_SUBSETS: usize = 1000;

/// True iff every `size`-column submatrix of `m` is invertible (`m` must have
/// exactly `size` rows). Exhaustive when `m` has at most ten columns,
/// otherwise checks a seeded random sample of subsets.
pub fn all_column_subsets_invertible<F: Field>(m: &Matrix<F>, size: usize) -> bool {
    if m.rows() != size || size > m.cols() {
        return false;
    }
    if m.cols() <= EXHAUSTIVE_COLUMNS {
        (0..m.cols())
            .combinations(size)
            .all(|cols| m.select_columns(&cols).is_invertible())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ m.cols() as u64);
        (0..SAMPLED_SUBSETS).all(|_| {
            let mut cols = sample(&mut rng, m.cols(), size).into_vec();
            cols.sort_unstable();
            m.select_columns(&cols).is_invertible()
        })
    }
}

/// `U` (d × r): every m×m column-submatrix of the top `m` rows and every d×d
/// column-submatrix invertible.
pub fn check_u_property<F: Field>(u: &Matrix<F>, m: usize, d: usize) -> Result<bool, LinalgError> {
    if u.rows() != d || m > d {
        return Err(LinalgError::DimensionMismatch(format!(
            "U must have d = {d} rows and m = {m} <= d, got {} rows",
            u.rows()
        )));
    }
    Ok(all_column_subsets_invertible(&u.top_rows(m), m) && all_column_subsets_invertible(u, d))
}

/// `V` ((d+f) × r): every m×m column-submatrix of the top `m` rows and every
/// (d+f)×(d+f) column-submatrix invertible.
pub fn check_v_property<F: Field>(
    v: &Matrix<F>,
    m: usize,
    d: usize,
    f: usize,
) -> Result<bool, LinalgError> {
    if v.rows() != d + f || m > d {
        return Err(LinalgError::DimensionMismatch(format!(
            "V must have d + f = {} rows and m = {m} <= d, got {} rows",
            d + f,
            v.rows()
        )));
    }
    Ok(all_column_subsets_invertible(&v.top_rows(m), m) && all_column_subsets_invertible(v, d + f))
}
