//! The matrix algebra `A = Mₙ(ℂ)`, completely positive maps into `B(H1)`
//! and their Choi/Kraus forms.
//!
//! A [`CPMap`] is stored by its images on the matrix units `E_pq`, indexed
//! `p * n + q`. The Choi matrix `Σ E_pq ⊗ φ(E_pq)` is derived on demand.

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, kron, CMatrix, TolerancePolicy, C64};

/// `Mₙ(ℂ)` for a fixed `n ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatrixAlgebra {
    n: usize,
}

impl MatrixAlgebra {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionTooSmall(
                "matrix algebra needs n >= 1".into(),
            ));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of matrix units, `n²`.
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn unit_index(&self, p: usize, q: usize) -> usize {
        p * self.n + q
    }

    /// `(p, q)` of the unit at `index`.
    pub fn unit_pair(&self, index: usize) -> (usize, usize) {
        (index / self.n, index % self.n)
    }

    pub fn unit(&self, p: usize, q: usize) -> CMatrix {
        CMatrix::unit(self.n, self.n, p, q)
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.n)
    }

    fn check_element(&self, a: &CMatrix) -> Result<()> {
        if a.shape() != (self.n, self.n) {
            return Err(Error::ShapeMismatch(format!(
                "algebra element must be {n}x{n}, got {}x{}",
                a.rows(),
                a.cols(),
                n = self.n
            )));
        }
        Ok(())
    }
}

/// All `n²` matrix units `E_pq` in `p * n + q` order.
pub fn matrix_units(algebra: MatrixAlgebra) -> Vec<CMatrix> {
    (0..algebra.dim())
        .map(|i| {
            let (p, q) = algebra.unit_pair(i);
            algebra.unit(p, q)
        })
        .collect()
}

/// A linear map `φ: Mₙ(ℂ) → B(H1)` that preserves adjoints.
#[derive(Clone, Debug, PartialEq)]
pub struct CPMap {
    algebra: MatrixAlgebra,
    h1_dim: usize,
    images: Vec<CMatrix>,
}

impl CPMap {
    /// Builds the map from its images on matrix units, checking shapes and
    /// that `φ(E_qp) = φ(E_pq)*` within the default tolerance.
    pub fn from_images(
        algebra: MatrixAlgebra,
        h1_dim: usize,
        images: Vec<CMatrix>,
    ) -> Result<Self> {
        if h1_dim == 0 {
            return Err(Error::DimensionTooSmall("h1_dim must be at least 1".into()));
        }
        if images.len() != algebra.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} matrix-unit images, got {}",
                algebra.dim(),
                images.len()
            )));
        }
        if let Some((i, img)) = images
            .iter()
            .enumerate()
            .find(|(_, m)| m.shape() != (h1_dim, h1_dim))
        {
            return Err(Error::ShapeMismatch(format!(
                "image {i} is {}x{}, expected {h1_dim}x{h1_dim}",
                img.rows(),
                img.cols()
            )));
        }
        let map = Self {
            algebra,
            h1_dim,
            images,
        };
        let scale = map
            .images
            .iter()
            .map(CMatrix::frobenius_norm)
            .fold(1.0, f64::max);
        let defect = map.adjoint_defect();
        if defect > TolerancePolicy::default().atol * scale {
            return Err(Error::NotHermitianPreserving { defect });
        }
        Ok(map)
    }

    /// Recovers the map from a Choi matrix of size `n·h1`.
    pub fn from_choi(algebra: MatrixAlgebra, h1_dim: usize, choi: &CMatrix) -> Result<Self> {
        let size = algebra.n() * h1_dim;
        if choi.shape() != (size, size) {
            return Err(Error::ShapeMismatch(format!(
                "Choi matrix must be {size}x{size}, got {}x{}",
                choi.rows(),
                choi.cols()
            )));
        }
        let images = (0..algebra.dim())
            .map(|i| {
                let (p, q) = algebra.unit_pair(i);
                let entries = (0..h1_dim)
                    .flat_map(|r| (0..h1_dim).map(move |c| (r, c)))
                    .map(|(r, c)| choi.get(p * h1_dim + r, q * h1_dim + c))
                    .collect();
                CMatrix::from_row_major(h1_dim, h1_dim, entries)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(algebra, h1_dim, images)
    }

    /// `φ(a) = Σ_s K_s a K_s*` for `h1 × n` operators `K_s`.
    pub fn from_kraus(algebra: MatrixAlgebra, ops: &[CMatrix]) -> Result<Self> {
        let h1_dim = match ops.first() {
            Some(k) => k.rows(),
            None => {
                return Err(Error::ShapeMismatch(
                    "at least one Kraus operator is required".into(),
                ))
            }
        };
        if let Some(bad) = ops.iter().find(|k| k.shape() != (h1_dim, algebra.n())) {
            return Err(Error::ShapeMismatch(format!(
                "Kraus operators must all be {h1_dim}x{}, got {}x{}",
                algebra.n(),
                bad.rows(),
                bad.cols()
            )));
        }
        let images = matrix_units(algebra)
            .iter()
            .map(|e| kraus_apply(ops, e, h1_dim))
            .collect();
        Self::from_images(algebra, h1_dim, images)
    }

    pub fn identity(algebra: MatrixAlgebra) -> Self {
        Self {
            algebra,
            h1_dim: algebra.n(),
            images: matrix_units(algebra),
        }
    }

    pub fn zero(algebra: MatrixAlgebra, h1_dim: usize) -> Result<Self> {
        Self::from_images(
            algebra,
            h1_dim,
            vec![CMatrix::zeros(h1_dim, h1_dim); algebra.dim()],
        )
    }

    /// `E_pq ↦ E_qp`. Positive but not completely positive for `n ≥ 2`.
    pub fn transpose(algebra: MatrixAlgebra) -> Self {
        let images = (0..algebra.dim())
            .map(|i| {
                let (p, q) = algebra.unit_pair(i);
                algebra.unit(q, p)
            })
            .collect();
        Self {
            algebra,
            h1_dim: algebra.n(),
            images,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            algebra: self.algebra,
            h1_dim: self.h1_dim,
            images: self.images.iter().map(|m| m.scale_real(c)).collect(),
        }
    }

    pub fn algebra(&self) -> MatrixAlgebra {
        self.algebra
    }

    pub fn n(&self) -> usize {
        self.algebra.n()
    }

    pub fn h1_dim(&self) -> usize {
        self.h1_dim
    }

    pub fn images(&self) -> &[CMatrix] {
        &self.images
    }

    pub fn image(&self, p: usize, q: usize) -> &CMatrix {
        &self.images[self.algebra.unit_index(p, q)]
    }

    /// `max ‖φ(E_qp) − φ(E_pq)*‖`.
    pub fn adjoint_defect(&self) -> f64 {
        let n = self.n();
        (0..n)
            .flat_map(|p| (0..n).map(move |q| (p, q)))
            .map(|(p, q)| self.image(q, p).distance(&self.image(p, q).adjoint()))
            .fold(0.0, f64::max)
    }
}

fn kraus_apply(ops: &[CMatrix], a: &CMatrix, h1_dim: usize) -> CMatrix {
    ops.iter().fold(CMatrix::zeros(h1_dim, h1_dim), |acc, k| {
        &acc + &(&(k * a) * &k.adjoint())
    })
}

/// Kraus operators `K_s: ℂⁿ → H1` with `φ(a) = Σ_s K_s a K_s*`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
}

impl KrausSet {
    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn r(&self) -> usize {
        self.operators.len()
    }

    /// `max_pq ‖Σ_s K_s E_pq K_s* − φ(E_pq)‖`.
    pub fn reconstruction_residual(&self, phi: &CPMap) -> f64 {
        matrix_units(phi.algebra())
            .iter()
            .zip(phi.images())
            .map(|(e, img)| kraus_apply(&self.operators, e, phi.h1_dim()).distance(img))
            .fold(0.0, f64::max)
    }
}

/// `Σ_pq E_pq ⊗ φ(E_pq)`, i.e. the block matrix whose `(p, q)` block is
/// `φ(E_pq)`.
pub fn choi_of(phi: &CPMap) -> CMatrix {
    let size = phi.n() * phi.h1_dim();
    matrix_units(phi.algebra())
        .iter()
        .zip(phi.images())
        .fold(CMatrix::zeros(size, size), |acc, (e, img)| {
            &acc + &kron(e, img)
        })
}

/// Choi-criterion verdict with the minimum eigenvalue for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpVerdict {
    pub completely_positive: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

fn choi_spectrum(phi: &CPMap) -> crate::numerics::HermitianEigen {
    let choi = choi_of(phi);
    let sym = (&choi + &choi.adjoint()).scale_real(0.5);
    // The symmetrized copy is exactly Hermitian, so the check cannot fail.
    hermitian_eig(&sym, &TolerancePolicy::default()).expect("symmetrized Choi matrix is Hermitian")
}

pub fn is_completely_positive(phi: &CPMap, tol: &TolerancePolicy) -> CpVerdict {
    let eig = choi_spectrum(phi);
    let min = eig.values.first().copied().unwrap_or(0.0);
    let max = eig.values.last().copied().unwrap_or(0.0);
    let floor = -tol.psd_rtol * max.max(1.0);
    CpVerdict {
        completely_positive: min >= floor,
        min_eigenvalue: min,
        max_eigenvalue: max,
    }
}

/// Numerical Choi rank: eigenvalues above `rank_rtol · λ_max`.
pub fn choi_rank(phi: &CPMap, tol: &TolerancePolicy) -> usize {
    let eig = choi_spectrum(phi);
    let max = eig.values.last().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    eig.values
        .iter()
        .filter(|&&v| v > tol.rank_rtol * max)
        .count()
}

/// Minimal Kraus decomposition from the Choi eigenvectors.
pub fn kraus_decomposition(phi: &CPMap, tol: &TolerancePolicy) -> Result<KrausSet> {
    let verdict = is_completely_positive(phi, tol);
    if !verdict.completely_positive {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: verdict.min_eigenvalue,
        });
    }
    let (n, h1) = (phi.n(), phi.h1_dim());
    let eig = choi_spectrum(phi);
    let max = eig.values.last().copied().unwrap_or(0.0);
    let mut operators = Vec::new();
    // Largest eigenvalues first.
    for (idx, &lambda) in eig.values.iter().enumerate().rev() {
        if max <= 0.0 || lambda <= tol.rank_rtol * max {
            break;
        }
        // Column (p, i) of the eigenvector holds K_s[i, p] / √λ.
        let v = eig.vectors.column(idx);
        let s = lambda.sqrt();
        let entries = (0..h1)
            .flat_map(|i| (0..n).map(move |p| (i, p)))
            .map(|(i, p)| v.get(p * h1 + i, 0) * s)
            .collect();
        operators.push(CMatrix::from_row_major(h1, n, entries)?);
    }
    Ok(KrausSet { operators })
}

/// `a ↦ D ∘ a` (entrywise product). Completely positive iff `D ⪰ 0`.
pub fn schur_map(d: &CMatrix) -> Result<CPMap> {
    if !d.is_square() {
        return Err(Error::NonSquare {
            rows: d.rows(),
            cols: d.cols(),
        });
    }
    let algebra = MatrixAlgebra::new(d.rows())?;
    let images = (0..algebra.dim())
        .map(|i| {
            let (p, q) = algebra.unit_pair(i);
            algebra.unit(p, q).scale(d.get(p, q))
        })
        .collect();
    CPMap::from_images(algebra, algebra.n(), images)
}

/// `φ(a) = Σ_pq a_pq · φ(E_pq)`.
pub fn apply_cp(phi: &CPMap, a: &CMatrix) -> Result<CMatrix> {
    phi.algebra().check_element(a)?;
    let n = phi.n();
    let mut out = CMatrix::zeros(phi.h1_dim(), phi.h1_dim());
    for p in 0..n {
        for q in 0..n {
            let c = a.get(p, q);
            if c != C64::new(0.0, 0.0) {
                out = &out + &phi.image(p, q).scale(c);
            }
        }
    }
    Ok(out)
}

/// `φ(1)`.
pub fn image_of_unit(phi: &CPMap) -> CMatrix {
    (0..phi.n()).fold(CMatrix::zeros(phi.h1_dim(), phi.h1_dim()), |acc, p| {
        &acc + phi.image(p, p)
    })
}

/// `‖φ(1) − I‖ ≤ atol`.
pub fn is_unital(phi: &CPMap, tol: &TolerancePolicy) -> bool {
    image_of_unit(phi).distance(&CMatrix::identity(phi.h1_dim())) <= tol.atol
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn alg(n: usize) -> MatrixAlgebra {
        MatrixAlgebra::new(n).unwrap()
    }

    fn schur_d() -> CMatrix {
        CMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 1.0]])
    }

    #[test]
    fn units() {
        assert_eq!(matrix_units(alg(1)), vec![CMatrix::identity(1)]);
        let a = alg(2);
        let e = matrix_units(a);
        assert_eq!(e.len(), 4);
        assert_eq!(
            &e[a.unit_index(0, 1)] * &e[a.unit_index(1, 0)],
            e[a.unit_index(0, 0)]
        );
        let sum = (0..2).fold(CMatrix::zeros(2, 2), |acc, p| &acc + &e[a.unit_index(p, p)]);
        assert_eq!(sum, CMatrix::identity(2));
        assert!(MatrixAlgebra::new(0).is_err());
    }

    #[test]
    fn choi_examples() {
        let a = alg(2);
        assert_eq!(choi_of(&CPMap::zero(a, 3).unwrap()), CMatrix::zeros(6, 6));

        let id = choi_of(&CPMap::identity(a));
        let mut expected = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected.set(i, j, C64::new(1.0, 0.0));
        }
        assert_eq!(id, expected);
        let eig = hermitian_eig(&id, &tol()).unwrap();
        assert!((eig.values[3] - 2.0).abs() < 1e-12);
        assert!(eig.values[..3].iter().all(|v| v.abs() < 1e-12));

        let schur = choi_of(&schur_map(&schur_d()).unwrap());
        let mut expected = CMatrix::zeros(4, 4);
        expected.set(0, 0, C64::new(1.0, 0.0));
        expected.set(3, 3, C64::new(1.0, 0.0));
        expected.set(0, 3, C64::new(0.5, 0.0));
        expected.set(3, 0, C64::new(0.5, 0.0));
        assert_eq!(schur, expected);
    }

    #[test]
    fn cp_verdicts() {
        let schur = schur_map(&schur_d()).unwrap();
        assert!(is_completely_positive(&schur, &tol()).completely_positive);

        let t = is_completely_positive(&CPMap::transpose(alg(2)), &tol());
        assert!(!t.completely_positive);
        assert!((t.min_eigenvalue + 1.0).abs() < 1e-12);

        assert!(
            is_completely_positive(&CPMap::zero(alg(2), 2).unwrap(), &tol()).completely_positive
        );
    }

    #[test]
    fn kraus_examples() {
        for n in 1..4 {
            let id = CPMap::identity(alg(n));
            let k = kraus_decomposition(&id, &tol()).unwrap();
            assert_eq!(k.r(), 1);
            let op = &k.operators()[0];
            // Iₙ up to a global phase.
            let phase = op.get(0, 0);
            assert!((phase.norm() - 1.0).abs() < 1e-12);
            assert!(op.distance(&CMatrix::identity(n).scale(phase)) < 1e-12);
        }

        let schur = schur_map(&schur_d()).unwrap();
        let k = kraus_decomposition(&schur, &tol()).unwrap();
        assert_eq!(k.r(), 2);
        assert!(k.reconstruction_residual(&schur) <= 1e-12);

        assert!(matches!(
            kraus_decomposition(&CPMap::transpose(alg(2)), &tol()),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn kraus_of_zero_padded_map() {
        // Schur map into a larger H1 with a zero block: same Choi rank.
        let schur = schur_map(&schur_d()).unwrap();
        let padded: Vec<_> = schur
            .images()
            .iter()
            .map(|m| CMatrix::embed(3, 3, 0, 0, m))
            .collect();
        let padded = CPMap::from_images(alg(2), 3, padded).unwrap();
        let k = kraus_decomposition(&padded, &tol()).unwrap();
        assert_eq!(k.r(), 2);
        assert!(k.reconstruction_residual(&padded) <= 1e-12);
    }

    #[test]
    fn schur_examples() {
        let schur = schur_map(&schur_d()).unwrap();
        let a = CMatrix::from_row_major(
            2,
            2,
            vec![
                C64::new(1.0, 2.0),
                C64::new(3.0, 0.0),
                C64::new(-4.0, 1.0),
                C64::new(5.0, 0.0),
            ],
        )
        .unwrap();
        let expected = CMatrix::from_row_major(
            2,
            2,
            vec![
                C64::new(1.0, 2.0),
                C64::new(1.5, 0.0),
                C64::new(-2.0, 0.5),
                C64::new(5.0, 0.0),
            ],
        )
        .unwrap();
        assert!(apply_cp(&schur, &a).unwrap().distance(&expected) < 1e-15);

        let ones = CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(schur_map(&ones).unwrap(), CPMap::identity(alg(2)));

        let pinch = schur_map(&CMatrix::identity(3)).unwrap();
        assert!(is_completely_positive(&pinch, &tol()).completely_positive);

        assert!(matches!(
            schur_map(&CMatrix::zeros(2, 3)),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn apply_and_unital() {
        let schur = schur_map(&schur_d()).unwrap();
        assert_eq!(
            apply_cp(&schur, &CMatrix::identity(2)).unwrap(),
            CMatrix::identity(2)
        );
        assert_eq!(
            apply_cp(&schur, &CMatrix::zeros(2, 2)).unwrap(),
            CMatrix::zeros(2, 2)
        );
        assert_eq!(
            apply_cp(&schur, &CMatrix::unit(2, 2, 0, 1)).unwrap(),
            CMatrix::unit(2, 2, 0, 1).scale_real(0.5)
        );
        assert!(matches!(
            apply_cp(&schur, &CMatrix::zeros(3, 3)),
            Err(Error::ShapeMismatch(_))
        ));

        assert!(is_unital(&schur, &tol()));
        assert!(!is_unital(&CPMap::identity(alg(2)).scaled(0.5), &tol()));
        assert!(!is_unital(&CPMap::zero(alg(2), 2).unwrap(), &tol()));
    }

    #[test]
    fn rejects_non_adjoint_preserving_images() {
        let a = alg(2);
        let mut images = matrix_units(a);
        images[a.unit_index(0, 1)] = CMatrix::zeros(2, 2);
        assert!(matches!(
            CPMap::from_images(a, 2, images),
            Err(Error::NotHermitianPreserving { .. })
        ));
    }

    fn arb_complex(len: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
            .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
    }

    fn arb_psd(size: usize) -> impl Strategy<Value = CMatrix> {
        (1..=size).prop_flat_map(move |r| {
            arb_complex(size * r).prop_map(move |v| {
                let g = CMatrix::from_row_major(size, r, v).unwrap();
                &g * &g.adjoint()
            })
        })
    }

    fn arb_hermitian(size: usize) -> impl Strategy<Value = CMatrix> {
        arb_complex(size * size).prop_map(move |v| {
            let g = CMatrix::from_row_major(size, size, v).unwrap();
            (&g + &g.adjoint()).scale_real(0.5)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_choi_round_trip((n, h1, c) in (1usize..4, 1usize..4)
            .prop_flat_map(|(n, h1)| (Just(n), Just(h1), arb_hermitian(n * h1))))
        {
            let phi = CPMap::from_choi(alg(n), h1, &c).unwrap();
            prop_assert!(choi_of(&phi).distance(&c) <= 1e-12);
        }

        #[test]
        fn prop_kraus_reconstructs((n, h1, c) in (1usize..4, 1usize..4)
            .prop_flat_map(|(n, h1)| (Just(n), Just(h1), arb_psd(n * h1))))
        {
            let phi = CPMap::from_choi(alg(n), h1, &c).unwrap();
            let k = kraus_decomposition(&phi, &tol()).unwrap();
            prop_assert!(k.reconstruction_residual(&phi) <= 1e-9);
        }

        #[test]
        fn prop_schur_criterion(d in (1usize..4).prop_flat_map(arb_hermitian)) {
            let min_d = hermitian_eig(&d, &tol()).unwrap().values[0];
            // Stay clear of the tolerance band around zero.
            prop_assume!(min_d.abs() > 1e-6);
            let phi = schur_map(&d).unwrap();
            prop_assert_eq!(is_completely_positive(&phi, &tol()).completely_positive, min_d > 0.0);
        }

        #[test]
        fn prop_apply_commutes_with_adjoint((phi, a) in (1usize..4, 1usize..4)
            .prop_flat_map(|(n, h1)| (arb_hermitian(n * h1).prop_map(move |c| {
                CPMap::from_choi(MatrixAlgebra::new(n).unwrap(), h1, &c).unwrap()
            }), arb_complex(n * n).prop_map(move |v| CMatrix::from_row_major(n, n, v).unwrap()))))
        {
            let lhs = apply_cp(&phi, &a.adjoint()).unwrap();
            let rhs = apply_cp(&phi, &a).unwrap().adjoint();
            prop_assert!(lhs.distance(&rhs) <= 1e-12);
        }
    }
}
