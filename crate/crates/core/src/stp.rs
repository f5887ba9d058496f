//! Exact semi-tensor-product algebra over rationals.
//!
//! Dense [`Matrix`] values are used by the algebra tests and by the
//! transition-matrix oracle. Synthesis code works on [`LogicalMatrix`]
//! (column-index form) and 2-row [`StochasticMatrix`] values and never
//! materialises Kronecker-expanded operators.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact rational scalar. Always normalised (lowest terms, positive denominator).
pub type Rational = BigRational;

/// Builds `num / den` as an exact rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("column {col} is not a probability vector")]
    NotStochastic { col: usize },
    #[error("column index {index} out of range 1..={rows}")]
    IndexOutOfRange { index: usize, rows: usize },
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self, StpError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(StpError::Dimension(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Integer-valued matrix from row-major entries. Panics on a size mismatch.
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        let data = entries.iter().map(|&v| Rational::from_integer(v.into())).collect();
        Matrix::new(rows, cols, data).expect("entry count must equal rows * cols")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    /// The unit column vector `δ_n^k` (1-based `k`).
    pub fn unit_vector(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "unit vector index {k} out of range 1..={n}");
        let mut m = Matrix::zeros(n, 1);
        m.data[k - 1] = Rational::one();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Zero-based entry access.
    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.data[r * self.cols + c] = value;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    /// Zero-based column as an `rows x 1` matrix.
    pub fn column(&self, c: usize) -> Matrix {
        let data = (0..self.rows).map(|r| self.get(r, c).clone()).collect();
        Matrix {
            rows: self.rows,
            cols: 1,
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    /// Ordinary matrix product.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix, StpError> {
        if self.cols != other.rows {
            return Err(StpError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = r * out.cols + c;
                    out.data[idx] += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Matrix::zeros(rows, cols);
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self.get(ar, ac);
                if a.is_zero() {
                    continue;
                }
                for br in 0..other.rows {
                    for bc in 0..other.cols {
                        let b = other.get(br, bc);
                        if b.is_zero() {
                            continue;
                        }
                        out.set(ar * other.rows + br, ac * other.cols + bc, a * b);
                    }
                }
            }
        }
        out
    }

    /// Semi-tensor product `(A ⊗ I_{α/n})(B ⊗ I_{α/p})` with `α = lcm(n, p)`.
    pub fn stp(&self, other: &Matrix) -> Matrix {
        let n = self.cols;
        let p = other.rows;
        let alpha = n.lcm(&p);
        let left = if alpha == n {
            self.clone()
        } else {
            self.kron(&Matrix::identity(alpha / n))
        };
        let right = if alpha == p {
            other.clone()
        } else {
            other.kron(&Matrix::identity(alpha / p))
        };
        left.mul(&right).expect("lcm-padded factors always conform")
    }

    /// Khatri-Rao (column-wise Kronecker) product.
    pub fn khatri_rao(&self, other: &Matrix) -> Result<Matrix, StpError> {
        if self.cols != other.cols {
            return Err(StpError::Dimension(format!(
                "Khatri-Rao needs equal column counts, got {} and {}",
                self.cols, other.cols
            )));
        }
        let rows = self.rows * other.rows;
        let mut out = Matrix::zeros(rows, self.cols);
        for c in 0..self.cols {
            for ar in 0..self.rows {
                let a = self.get(ar, c);
                if a.is_zero() {
                    continue;
                }
                for br in 0..other.rows {
                    out.set(ar * other.rows + br, c, a * other.get(br, c));
                }
            }
        }
        Ok(out)
    }

    pub fn is_stochastic(&self) -> bool {
        (0..self.cols).all(|c| {
            let mut sum = Rational::zero();
            for r in 0..self.rows {
                let v = self.get(r, c);
                if v < &Rational::zero() {
                    return false;
                }
                sum += v;
            }
            sum.is_one()
        })
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Matrix whose every column is a unit vector, stored as 1-based row indices:
/// `δ_rows[i_1, ..., i_cols]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LogicalMatrix {
    rows: usize,
    indices: Vec<usize>,
}

impl LogicalMatrix {
    pub fn new(rows: usize, indices: Vec<usize>) -> Result<Self, StpError> {
        if indices.is_empty() {
            return Err(StpError::Dimension("logical matrix needs a column".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > rows) {
            return Err(StpError::IndexOutOfRange { index: bad, rows });
        }
        Ok(LogicalMatrix { rows, indices })
    }

    /// `δ_rows[indices]`; panics when an index is out of range.
    pub fn delta(rows: usize, indices: &[usize]) -> Self {
        LogicalMatrix::new(rows, indices.to_vec()).expect("valid delta indices")
    }

    /// A 2-row matrix with `cols` identical columns `δ_2^index`.
    pub fn constant(index: usize, cols: usize) -> Self {
        LogicalMatrix::delta(2, &vec![index; cols])
    }

    pub fn identity(n: usize) -> Self {
        LogicalMatrix {
            rows: n,
            indices: (1..=n).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Row index (1-based) of the unit entry in zero-based column `col`.
    pub fn index(&self, col: usize) -> usize {
        self.indices[col]
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.indices.len());
        for (c, &i) in self.indices.iter().enumerate() {
            m.set(i - 1, c, Rational::one());
        }
        m
    }

    /// Returns `None` unless every column of `m` is a unit vector.
    pub fn from_matrix(m: &Matrix) -> Option<Self> {
        let mut indices = Vec::with_capacity(m.cols());
        for c in 0..m.cols() {
            let mut hit = None;
            for r in 0..m.rows() {
                let v = m.get(r, c);
                if v.is_one() {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(r + 1);
                } else if !v.is_zero() {
                    return None;
                }
            }
            indices.push(hit?);
        }
        Some(LogicalMatrix {
            rows: m.rows(),
            indices,
        })
    }

    /// Product with a unit vector given by its 1-based index: `self ⋉ δ_cols^k`.
    pub fn apply(&self, k: usize) -> usize {
        self.indices[k - 1]
    }
}

impl fmt::Debug for LogicalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "δ_{}{:?}", self.rows, self.indices)
    }
}

impl fmt::Display for LogicalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "δ_{}[{}]", self.rows, body.join(","))
    }
}

/// Column-stochastic rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StochasticMatrix(Matrix);

impl StochasticMatrix {
    pub fn try_from_matrix(m: Matrix) -> Result<Self, StpError> {
        for c in 0..m.cols() {
            let mut sum = Rational::zero();
            for r in 0..m.rows() {
                if m.get(r, c) < &Rational::zero() {
                    return Err(StpError::NotStochastic { col: c });
                }
                sum += m.get(r, c);
            }
            if !sum.is_one() {
                return Err(StpError::NotStochastic { col: c });
            }
        }
        Ok(StochasticMatrix(m))
    }

    pub fn from_logical(l: &LogicalMatrix) -> Self {
        StochasticMatrix(l.to_matrix())
    }

    /// Builds a 2-row matrix from the probability of the first row (`δ_2^1`, i.e. TRUE)
    /// of every column.
    pub fn from_true_probabilities(probs: Vec<Rational>) -> Result<Self, StpError> {
        let cols = probs.len();
        let mut m = Matrix::zeros(2, cols.max(1));
        for (c, p) in probs.into_iter().enumerate() {
            let q = Rational::one() - &p;
            if p < Rational::zero() || q < Rational::zero() {
                return Err(StpError::NotStochastic { col: c });
            }
            m.set(0, c, p);
            m.set(1, c, q);
        }
        if cols == 0 {
            return Err(StpError::Dimension("stochastic matrix needs a column".into()));
        }
        Ok(StochasticMatrix(m))
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        self.0.get(r, c)
    }

    /// Probability of TRUE (first row) in zero-based column `c` of a 2-row matrix.
    pub fn prob_true(&self, c: usize) -> &Rational {
        self.0.get(0, c)
    }

    /// `Some(logical)` when every column is a unit vector.
    pub fn as_logical(&self) -> Option<LogicalMatrix> {
        LogicalMatrix::from_matrix(&self.0)
    }

    pub fn stp(&self, other: &StochasticMatrix) -> StochasticMatrix {
        StochasticMatrix(self.0.stp(&other.0))
    }

    pub fn khatri_rao(&self, other: &StochasticMatrix) -> Result<StochasticMatrix, StpError> {
        Ok(StochasticMatrix(self.0.khatri_rao(&other.0)?))
    }
}

/// Swap matrix `W_[p,d] = [I_d ⊗ δ_p^1, ..., I_d ⊗ δ_p^p]`, so that
/// `b ⋉ a = W_[p,d] ⋉ a ⋉ b` for `a ∈ Δ_p`, `b ∈ Δ_d`.
pub fn swap_matrix(p: usize, d: usize) -> LogicalMatrix {
    assert!(p >= 1 && d >= 1, "swap matrix factors must be positive");
    let mut indices = Vec::with_capacity(p * d);
    for k in 1..=p {
        for j in 1..=d {
            indices.push((j - 1) * p + k);
        }
    }
    LogicalMatrix { rows: p * d, indices }
}

/// Power-reducing matrix `Φ_n ∈ L^{4^n × 2^n}`: column `j` is `δ_{2^n}^j ⊗ δ_{2^n}^j`,
/// so `x ⋉ x = Φ_n x` for every `x ∈ Δ_{2^n}`.
pub fn power_reducing_matrix(n: u32) -> LogicalMatrix {
    assert!(n >= 1, "power-reducing matrix needs n >= 1");
    let size = 1usize << n;
    let indices = (1..=size).map(|j| (j - 1) * size + j).collect();
    LogicalMatrix {
        rows: size * size,
        indices,
    }
}

/// `M_r = δ_4[1, 4]`, the one-variable power-reducing matrix.
pub fn base_power_reducing_matrix() -> LogicalMatrix {
    LogicalMatrix::delta(4, &[1, 4])
}

/// `Φ_n` assembled as `⋉_{i=1..n} I_{2^{i-1}} ⊗ [(I_2 ⊗ W_[2,2^{n-i}]) M_r]`.
/// Used to cross-check [`power_reducing_matrix`].
pub fn power_reducing_matrix_by_factors(n: u32) -> Matrix {
    assert!(n >= 1, "power-reducing matrix needs n >= 1");
    let m_r = base_power_reducing_matrix().to_matrix();
    let mut acc: Option<Matrix> = None;
    for i in 1..=n {
        let w = swap_matrix(2, 1usize << (n - i)).to_matrix();
        let inner = Matrix::identity(2).kron(&w).stp(&m_r);
        let factor = Matrix::identity(1usize << (i - 1)).kron(&inner);
        acc = Some(match acc {
            None => factor,
            Some(a) => a.stp(&factor),
        });
    }
    acc.expect("n >= 1")
}

/// Index of `δ_p^a ⋉ δ_q^b` in `Δ_{pq}`.
pub fn unit_kron_index(a: usize, q: usize, b: usize) -> usize {
    (a - 1) * q + b
}
