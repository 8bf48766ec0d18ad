//! Dense complex-matrix kernel.
//!
//! Every operator in the library (elements of `B(H1)`, `B(H1, H2)`,
//! `B(K1)`, `B(K1, K2)`) is a [`CMatrix`], stored as an `nalgebra` matrix.
//! The decompositions here wrap `nalgebra` (Hermitian eigensolver) and
//! `faer` (SVD) and add the rank and tolerance conventions the dilation code
//! relies on.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Dense complex matrix with finite entries.
///
/// Zero-sized dimensions are allowed; they model the trivial space that
/// appears when a map vanishes identically.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

/// Numerical tolerances for all verdicts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TolerancePolicy {
    /// Absolute tolerance for identity residuals.
    pub atol: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rtol: f64,
    /// Relative eigenvalue cutoff for positive-semidefiniteness.
    pub psd_rtol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rank_rtol: 1e-10,
            psd_rtol: 1e-10,
        }
    }
}

impl TolerancePolicy {
    pub fn new(atol: f64, rank_rtol: f64, psd_rtol: f64) -> Result<Self> {
        for (name, value) in [
            ("atol", atol),
            ("rank_rtol", rank_rtol),
            ("psd_rtol", psd_rtol),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(Self {
            atol,
            rank_rtol,
            psd_rtol,
        })
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Matrix with a single 1 at `(i, j)`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(rows, cols);
        m[(i, j)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                got: entries.len(),
            });
        }
        Self::from_nalgebra(DMatrix::from_row_iterator(rows, cols, entries))
    }

    /// Builds a matrix from real row slices. Panics on ragged input; meant
    /// for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| C64::new(v, 0.0)))
            .collect();
        Self::from_row_major(r, c, entries).expect("non-finite literal")
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = DMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Self(m)
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Result<Self> {
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Overwrites one entry. Panics if out of bounds or non-finite.
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        assert!(value.re.is_finite() && value.im.is_finite());
        self.0[(i, j)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self - other`. Panics on shape mismatch.
    pub fn distance(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "distance: shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn column(&self, j: usize) -> CMatrix {
        Self(self.0.columns(j, 1).into_owned())
    }

    pub fn try_mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(self * rhs)
    }

    /// Concatenates blocks left to right; all blocks must have `rows` rows.
    pub fn hstack(rows: usize, blocks: &[CMatrix]) -> Result<CMatrix> {
        if let Some(bad) = blocks.iter().find(|b| b.rows() != rows) {
            return Err(Error::ShapeMismatch(format!(
                "hstack expects {rows} rows, got a block with {}",
                bad.rows()
            )));
        }
        let cols = blocks.iter().map(CMatrix::cols).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            out.view_mut((0, offset), (rows, b.cols())).copy_from(&b.0);
            offset += b.cols();
        }
        Ok(Self(out))
    }

    /// Places `block` with its top-left corner at `(row, col)` inside a zero
    /// matrix of the given shape.
    pub fn embed(rows: usize, cols: usize, row: usize, col: usize, block: &CMatrix) -> CMatrix {
        let mut out = DMatrix::zeros(rows, cols);
        out.view_mut((row, col), block.shape()).copy_from(&block.0);
        Self(out)
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        (0..self.rows())
            .flat_map(|i| (0..self.cols()).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    /// Largest Frobenius distance from Hermitian symmetry, `‖M - M*‖`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.distance(&self.adjoint())
    }
}

impl<'a> Mul<&'a CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: CMatrix,
}

pub fn hermitian_eig(m: &CMatrix, tol: &TolerancePolicy) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let defect = m.hermiticity_defect();
    let scale = m.frobenius_norm().max(1.0);
    if defect > tol.atol * scale {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = (&m.0 + m.0.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen {
        values,
        vectors: CMatrix(vectors),
    })
}

/// Thin SVD with singular values sorted descending.
struct SortedSvd {
    u: DMatrix<C64>,
    sigma: Vec<f64>,
    v_t: DMatrix<C64>,
}

fn to_faer(m: &DMatrix<C64>) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// faer rather than nalgebra: nalgebra's complex SVD can return orthonormal
// factors whose product misses the input when singular values repeat.
fn sorted_svd(m: &DMatrix<C64>) -> SortedSvd {
    let svd = to_faer(m)
        .thin_svd()
        .expect("SVD of a finite matrix converges");
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    let k = s.nrows();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re));
    SortedSvd {
        u: DMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]),
        sigma: order.iter().map(|&i| s[i].re).collect(),
        v_t: DMatrix::from_fn(k, v.nrows(), |i, j| v[(j, order[i])].conj()),
    }
}

fn numerical_rank(sigma: &[f64], rank_rtol: f64) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sigma.iter().take_while(|&&s| s > rank_rtol * max).count()
}

/// Orthonormal basis of the column span.
#[derive(Clone, Debug)]
pub struct OrthonormalRange {
    pub basis: CMatrix,
    pub rank: usize,
}

pub fn orthonormal_range(columns: &CMatrix, tol: &TolerancePolicy) -> OrthonormalRange {
    if columns.rows() == 0 || columns.cols() == 0 {
        return OrthonormalRange {
            basis: CMatrix::zeros(columns.rows(), 0),
            rank: 0,
        };
    }
    let svd = sorted_svd(&columns.0);
    let rank = numerical_rank(&svd.sigma, tol.rank_rtol);
    OrthonormalRange {
        basis: CMatrix(svd.u.columns(0, rank).into_owned()),
        rank,
    }
}

/// Minimal-norm least-squares solution of `X·S = T`.
#[derive(Clone, Debug)]
pub struct PseudoSolution {
    pub x: CMatrix,
    /// Frobenius norm of `X·S - T`.
    pub residual: f64,
}

pub fn pseudo_solve(s: &CMatrix, t: &CMatrix, tol: &TolerancePolicy) -> Result<PseudoSolution> {
    if s.cols() != t.cols() {
        return Err(Error::ShapeMismatch(format!(
            "pseudo_solve: S has {} columns but T has {}",
            s.cols(),
            t.cols()
        )));
    }
    let x = if s.rows() == 0 || s.cols() == 0 {
        DMatrix::zeros(t.rows(), s.rows())
    } else {
        // X = T·S⁺ with S⁺ = V·Σ⁺·U*, truncated at the numerical rank.
        let svd = sorted_svd(&s.0);
        let rank = numerical_rank(&svd.sigma, tol.rank_rtol);
        let v = svd.v_t.rows(0, rank).adjoint();
        let mut ut = svd.u.columns(0, rank).adjoint();
        for (i, mut row) in ut.row_iter_mut().enumerate() {
            row /= C64::new(svd.sigma[i], 0.0);
        }
        &t.0 * v * ut
    };
    let x = CMatrix::from_nalgebra(x)?;
    let residual = (&x * s).distance(t);
    Ok(PseudoSolution { x, residual })
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    to_faer(&m.0)
        .singular_values()
        .expect("SVD of a finite matrix converges")
        .into_iter()
        .fold(0.0, f64::max)
}

/// Kronecker product with left-factor-major index flattening.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix(a.0.kronecker(&b.0))
}
