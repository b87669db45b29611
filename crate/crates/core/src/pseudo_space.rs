//! Pseudo-Euclidean scalar products `S(x, y) = <x, S y>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::vecops::{norm_sq, sub};

/// Relative asymmetry above which an input matrix is rejected instead of
/// being symmetrized.
const ASYMMETRY_REJECT: f64 = 1e-9;
const SINGULAR_RATIO: f64 = 1e-10;

/// A symmetric invertible bilinear form on `R^d` together with its index
/// (number of positive eigenvalues).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarProduct {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    index: usize,
}

/// `S = V^T diag(signs) V`, with the `+1` signs first.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaDecomposition {
    pub v: DMatrix<f64>,
    pub signs: Vec<f64>,
}

impl InertiaDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.signs));
        self.v.transpose() * lambda * &self.v
    }

    /// `Lambda(a, b)` for the diagonal sign form.
    pub fn lambda_product(&self, a: &[f64], b: &[f64]) -> f64 {
        self.signs
            .iter()
            .zip(a.iter().zip(b))
            .map(|(s, (x, y))| s * x * y)
            .sum()
    }

    pub fn apply_v(&self, x: &[f64]) -> Vec<f64> {
        (&self.v * DVector::from_column_slice(x)).as_slice().to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairClass {
    Negative,
    Isotropic,
    Positive,
}

impl ScalarProduct {
    /// Builds a form from a square matrix. The matrix is symmetrized; inputs
    /// whose asymmetry exceeds `1e-9` relative to the largest entry, or which
    /// are numerically singular, are rejected.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || matrix.ncols() != d {
            return Err(Error::InvalidInput(format!(
                "scalar product matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > ASYMMETRY_REJECT * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric (max |S - S^T| = {asym:e})"
            )));
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;

        let eig = SymmetricEigen::new(matrix.clone());
        let largest = eig.eigenvalues.amax();
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if largest == 0.0 || smallest <= SINGULAR_RATIO * largest {
            return Err(Error::Degenerate(format!(
                "matrix is singular (|lambda|_min / |lambda|_max = {:e})",
                smallest / largest.max(f64::MIN_POSITIVE)
            )));
        }
        let index = eig.eigenvalues.iter().filter(|&&v| v > 0.0).count();
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("matrix inverse failed".into()))?;
        Ok(Self {
            matrix,
            inverse,
            index,
        })
    }

    /// Like [`ScalarProduct::new`], additionally checking a declared index.
    pub fn with_index(matrix: DMatrix<f64>, index: usize) -> Result<Self> {
        let sp = Self::new(matrix)?;
        if sp.index != index {
            return Err(Error::InvalidInput(format!(
                "declared index {index} but the matrix has {} positive eigenvalues",
                sp.index
            )));
        }
        Ok(sp)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("scalar product rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is a valid form")
    }

    /// The standard form `sum_i x^i y^{m+i} + x^{m+i} y^i` on `R^{2m}`; its
    /// monotone sets are the classical monotone sets in `R^m x R^m`.
    pub fn standard(m: usize) -> Self {
        let d = 2 * m;
        let matrix = DMatrix::from_fn(d, d, |i, j| if i + m == j || j + m == i { 1.0 } else { 0.0 });
        Self::new(matrix).expect("standard form is valid")
    }

    /// The canonical form `diag(1,..,1,-1,..,-1)` with `m` positive entries.
    pub fn canonical(d: usize, m: usize) -> Self {
        assert!(m <= d);
        let diag = DVector::from_fn(d, |i, _| if i < m { 1.0 } else { -1.0 });
        Self::new(DMatrix::from_diagonal(&diag)).expect("canonical form is valid")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    /// `S(x, y) = x^T S y`.
    pub fn sproduct(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(self.product_unchecked(x, y))
    }

    pub(crate) fn product_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, xi)| xi * y.iter().enumerate().map(|(j, yj)| self.matrix[(i, j)] * yj).sum::<f64>())
            .sum()
    }

    /// Scalar square `S(x, x)`; may be negative.
    pub fn square(&self, x: &[f64]) -> f64 {
        self.product_unchecked(x, x)
    }

    /// `S x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    /// `S^{-1} x`.
    pub fn solve(&self, x: &[f64]) -> Vec<f64> {
        (&self.inverse * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    /// Law-of-inertia factorization via the symmetric eigendecomposition
    /// `S = Q D Q^T`, with `V = |D|^{1/2} Q^T`. Rows are ordered positive
    /// eigenvalues first; each row is signed so its largest-magnitude entry is
    /// positive.
    pub fn inertia(&self) -> Result<InertiaDecomposition> {
        let d = self.dim();
        let eig = SymmetricEigen::new(self.matrix.clone());
        let largest = eig.eigenvalues.amax();
        let mut order: Vec<(usize, usize)> = (0..d)
            .map(|k| {
                let col = eig.eigenvectors.column(k);
                (k, col.iamax())
            })
            .collect();
        order.sort_by(|&(a, pa), &(b, pb)| {
            let sa = eig.eigenvalues[a] > 0.0;
            let sb = eig.eigenvalues[b] > 0.0;
            sb.cmp(&sa).then(pa.cmp(&pb))
        });

        let mut v = DMatrix::zeros(d, d);
        let mut signs = Vec::with_capacity(d);
        for (row, &(k, pivot)) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[k];
            if lambda.abs() <= SINGULAR_RATIO * largest {
                return Err(Error::Degenerate(format!(
                    "eigenvalue {lambda:e} is numerically zero"
                )));
            }
            let col = eig.eigenvectors.column(k);
            let flip = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
            let scale = lambda.abs().sqrt() * flip;
            for c in 0..d {
                v[(row, c)] = scale * col[c];
            }
            signs.push(lambda.signum());
        }
        Ok(InertiaDecomposition { v, signs })
    }

    /// Classifies `q = S(y - z, y - z)` against `tol * max(1, |y - z|^2)`.
    pub fn pair_class(&self, y: &[f64], z: &[f64], tol: f64) -> Result<PairClass> {
        check_dim(self.dim(), y.len())?;
        check_dim(self.dim(), z.len())?;
        Ok(self.pair_class_unchecked(y, z, tol))
    }

    pub(crate) fn pair_class_unchecked(&self, y: &[f64], z: &[f64], tol: f64) -> PairClass {
        let diff = sub(y, z);
        let q = self.square(&diff);
        let eff = tol * norm_sq(&diff).max(1.0);
        if q.abs() <= eff {
            PairClass::Isotropic
        } else if q > 0.0 {
            PairClass::Positive
        } else {
            PairClass::Negative
        }
    }
}
