//! The free Hilbert module `E = Aᵏ` over `A = Mₙ(ℂ)`, φ-maps
//! `Φ: E → B(H1, H2)`, and seeded generators of valid instances.
//!
//! `E` has the scalar basis `δ_i ⊗ E_pq`, indexed `i·n² + p·n + q`. A
//! [`PhiMap`] stores one `h2 × h1` image per basis element; a φ-map is
//! linear but not `A`-linear, so this is the smallest faithful description.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cstar_algebra::{apply_cp, choi_rank, image_of_unit, CPMap, MatrixAlgebra};
use crate::dilation::minimal_stinespring;
use crate::error::{Error, Result};
use crate::numerics::{operator_norm, CMatrix, TolerancePolicy, C64};

/// `E = Aᵏ` with `⟨x, y⟩ = Σ_i x_i* y_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FreeModule {
    algebra: MatrixAlgebra,
    k: usize,
}

impl FreeModule {
    pub fn new(algebra: MatrixAlgebra, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::DimensionTooSmall(
                "module rank k must be at least 1".into(),
            ));
        }
        Ok(Self { algebra, k })
    }

    pub fn algebra(&self) -> MatrixAlgebra {
        self.algebra
    }

    pub fn n(&self) -> usize {
        self.algebra.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of scalar basis elements, `k·n²`.
    pub fn basis_len(&self) -> usize {
        self.k * self.algebra.dim()
    }

    pub fn basis_index(&self, i: usize, p: usize, q: usize) -> usize {
        i * self.algebra.dim() + self.algebra.unit_index(p, q)
    }

    /// `(i, p, q)` of basis element `b`.
    pub fn basis_triple(&self, b: usize) -> (usize, usize, usize) {
        let (p, q) = self.algebra.unit_pair(b % self.algebra.dim());
        (b / self.algebra.dim(), p, q)
    }

    pub fn basis_element(&self, b: usize) -> ModuleElement {
        let (i, p, q) = self.basis_triple(b);
        let mut components = vec![CMatrix::zeros(self.n(), self.n()); self.k];
        components[i] = self.algebra.unit(p, q);
        ModuleElement {
            module: *self,
            components,
        }
    }

    pub fn zero(&self) -> ModuleElement {
        ModuleElement {
            module: *self,
            components: vec![CMatrix::zeros(self.n(), self.n()); self.k],
        }
    }
}

/// `x = (x_1, …, x_k) ∈ Aᵏ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    module: FreeModule,
    components: Vec<CMatrix>,
}

impl ModuleElement {
    pub fn new(module: FreeModule, components: Vec<CMatrix>) -> Result<Self> {
        if components.len() != module.k() {
            return Err(Error::ModuleMismatch(format!(
                "expected {} components, got {}",
                module.k(),
                components.len()
            )));
        }
        let n = module.n();
        if let Some(bad) = components.iter().find(|c| c.shape() != (n, n)) {
            return Err(Error::ModuleMismatch(format!(
                "components must be {n}x{n}, got {}x{}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { module, components })
    }

    pub fn module(&self) -> FreeModule {
        self.module
    }

    pub fn components(&self) -> &[CMatrix] {
        &self.components
    }

    fn check_same_module(&self, other: &ModuleElement) -> Result<()> {
        if self.module != other.module {
            return Err(Error::ModuleMismatch(format!(
                "elements of A^{} over M_{} and A^{} over M_{}",
                self.module.k(),
                self.module.n(),
                other.module.k(),
                other.module.n()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &ModuleElement) -> Result<ModuleElement> {
        self.check_same_module(other)?;
        Ok(Self {
            module: self.module,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, c: C64) -> ModuleElement {
        Self {
            module: self.module,
            components: self.components.iter().map(|a| a.scale(c)).collect(),
        }
    }
}

/// `⟨x, y⟩ = Σ_i x_i* y_i`.
pub fn inner_product(x: &ModuleElement, y: &ModuleElement) -> Result<CMatrix> {
    x.check_same_module(y)?;
    let n = x.module.n();
    Ok(x.components
        .iter()
        .zip(&y.components)
        .fold(CMatrix::zeros(n, n), |acc, (a, b)| {
            &acc + &(&a.adjoint() * b)
        }))
}

/// Right action `x·a = (x_1 a, …, x_k a)`.
pub fn module_action(x: &ModuleElement, a: &CMatrix) -> Result<ModuleElement> {
    let n = x.module.n();
    if a.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!(
            "module action needs a {n}x{n} algebra element, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(ModuleElement {
        module: x.module,
        components: x.components.iter().map(|c| c * a).collect(),
    })
}

/// `‖x‖ = ‖⟨x, x⟩‖^{1/2}`.
pub fn module_norm(x: &ModuleElement) -> f64 {
    let ip = inner_product(x, x).expect("same module");
    operator_norm(&ip).sqrt()
}

/// `Φ: E → B(H1, H2)` stored on the scalar basis of `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiMap {
    module: FreeModule,
    phi: CPMap,
    h2_dim: usize,
    basis_images: Vec<CMatrix>,
}

impl PhiMap {
    pub fn new(
        module: FreeModule,
        phi: CPMap,
        h2_dim: usize,
        basis_images: Vec<CMatrix>,
    ) -> Result<Self> {
        if module.algebra() != phi.algebra() {
            return Err(Error::ModuleMismatch(format!(
                "module is over M_{} but phi is defined on M_{}",
                module.n(),
                phi.n()
            )));
        }
        if h2_dim == 0 {
            return Err(Error::DimensionTooSmall("h2_dim must be at least 1".into()));
        }
        if basis_images.len() != module.basis_len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} basis images, got {}",
                module.basis_len(),
                basis_images.len()
            )));
        }
        let h1 = phi.h1_dim();
        if let Some((b, bad)) = basis_images
            .iter()
            .enumerate()
            .find(|(_, m)| m.shape() != (h2_dim, h1))
        {
            return Err(Error::ShapeMismatch(format!(
                "basis image {b} is {}x{}, expected {h2_dim}x{h1}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self {
            module,
            phi,
            h2_dim,
            basis_images,
        })
    }

    pub fn module(&self) -> FreeModule {
        self.module
    }

    pub fn phi(&self) -> &CPMap {
        &self.phi
    }

    pub fn h1_dim(&self) -> usize {
        self.phi.h1_dim()
    }

    pub fn h2_dim(&self) -> usize {
        self.h2_dim
    }

    pub fn basis_images(&self) -> &[CMatrix] {
        &self.basis_images
    }

    /// Copy with one entry of one basis image overwritten.
    pub fn with_entry(&self, b: usize, row: usize, col: usize, value: C64) -> Self {
        let mut out = self.clone();
        out.basis_images[b].set(row, col, value);
        out
    }
}

/// Linear extension of `Φ` from the scalar basis.
pub fn apply_phi(big_phi: &PhiMap, x: &ModuleElement) -> Result<CMatrix> {
    if x.module != big_phi.module {
        return Err(Error::ModuleMismatch(
            "element does not belong to the domain of the phi-map".into(),
        ));
    }
    let m = big_phi.module;
    let mut out = CMatrix::zeros(big_phi.h2_dim, big_phi.h1_dim());
    for (i, comp) in x.components.iter().enumerate() {
        for p in 0..m.n() {
            for q in 0..m.n() {
                let c = comp.get(p, q);
                if c != C64::new(0.0, 0.0) {
                    out = &out + &big_phi.basis_images[m.basis_index(i, p, q)].scale(c);
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of the exhaustive φ-map identity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiMapVerdict {
    pub is_phi_map: bool,
    /// `max_{b,c} ‖Φ(x_b)*Φ(x_c) − φ(⟨x_b, x_c⟩)‖`.
    pub max_residual: f64,
    /// Magnitude the residual is judged against: `max(1, ‖φ(1)‖, max_b ‖Φ(x_b)‖²)`.
    pub scale: f64,
}

pub fn verify_phi_map(big_phi: &PhiMap, tol: &TolerancePolicy) -> PhiMapVerdict {
    let m = big_phi.module;
    let phi = &big_phi.phi;
    let h1 = phi.h1_dim();
    let zero = CMatrix::zeros(h1, h1);
    let adjoints: Vec<CMatrix> = big_phi.basis_images.iter().map(CMatrix::adjoint).collect();
    let mut max_residual = 0.0f64;
    for (b, adj) in adjoints.iter().enumerate() {
        let (i, p, q) = m.basis_triple(b);
        for (c, img) in big_phi.basis_images.iter().enumerate() {
            let (j, r, s) = m.basis_triple(c);
            // ⟨δ_i⊗E_pq, δ_j⊗E_rs⟩ = δ_ij δ_pr E_qs.
            let expected = if i == j && p == r {
                phi.image(q, s)
            } else {
                &zero
            };
            let got = adj * img;
            max_residual = max_residual.max(got.distance(expected));
        }
    }
    let scale = big_phi
        .basis_images
        .iter()
        .map(|img| operator_norm(img).powi(2))
        .fold(operator_norm(&image_of_unit(phi)).max(1.0), f64::max);
    PhiMapVerdict {
        is_phi_map: max_residual <= tol.atol * scale,
        max_residual,
        scale,
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    // Standard complex normal: real and imaginary parts each N(0, 1/2).
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let entries = (0..rows * cols)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * s, im * s)
        })
        .collect();
    CMatrix::from_row_major(rows, cols, entries).expect("finite gaussian draws")
}

const MAX_REDRAWS: usize = 64;

/// Random CP map `φ(a) = Σ_{s<r} K_s a K_s*` with Gaussian `h1 × n` Kraus
/// operators and Choi rank exactly `r`.
pub fn gen_cp_map(n: usize, h1_dim: usize, r: usize, seed: u64) -> Result<CPMap> {
    let algebra = MatrixAlgebra::new(n)?;
    if h1_dim == 0 {
        return Err(Error::DimensionTooSmall("h1_dim must be at least 1".into()));
    }
    let max = n * h1_dim;
    if r == 0 || r > max {
        return Err(Error::InvalidRank { r, max });
    }
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_REDRAWS {
        let ops: Vec<CMatrix> = (0..r)
            .map(|_| complex_gaussian(&mut rng, h1_dim, n))
            .collect();
        let phi = CPMap::from_kraus(algebra, &ops)?;
        if choi_rank(&phi, &tol) == r {
            return Ok(phi);
        }
    }
    unreachable!("{MAX_REDRAWS} consecutive rank-deficient Gaussian draws")
}

/// Random unital CP map: a [`gen_cp_map`] draw conjugated by `φ(1)^{-1/2}`.
/// Needs `n·r ≥ h1` so that `φ(1)` is invertible.
pub fn gen_unital_cp_map(n: usize, h1_dim: usize, r: usize, seed: u64) -> Result<CPMap> {
    if n * r < h1_dim {
        return Err(Error::DimensionTooSmall(format!(
            "a unital map needs n*r >= h1 (got n={n}, r={r}, h1={h1_dim})"
        )));
    }
    let phi = gen_cp_map(n, h1_dim, r, seed)?;
    let eig = crate::numerics::hermitian_eig(&image_of_unit(&phi), &TolerancePolicy::default())?;
    let inv_sqrt = CMatrix::from_diagonal(
        &eig.values
            .iter()
            .map(|&v| C64::new(v.sqrt().recip(), 0.0))
            .collect::<Vec<_>>(),
    );
    let q = &eig.vectors;
    let c = &(q * &inv_sqrt) * &q.adjoint();
    let images = phi.images().iter().map(|img| &(&c * img) * &c).collect();
    CPMap::from_images(phi.algebra(), h1_dim, images)
}

/// Random isometry `ℂᵐ → ℂʰ` from the QR factor of a Gaussian matrix.
fn random_isometry(rng: &mut ChaCha8Rng, h: usize, m: usize) -> CMatrix {
    if m == 0 {
        return CMatrix::zeros(h, 0);
    }
    let g = complex_gaussian(rng, h, m);
    CMatrix::from_nalgebra(g.as_nalgebra().clone().qr().q()).expect("finite QR factor")
}

/// Random φ-map over `Aᵏ` into `B(H1, ℂ^{h2})`.
///
/// Builds a minimal `(ρ, V, K1)` for `phi`, lets `Ψ₀(x) = Σ_i T_i ρ(x_i)`
/// act into `K1 ⊗ ℂᵏ` through the block embeddings `T_i`, and sets
/// `Φ(x) = J Ψ₀(x) V` for a seeded isometry `J`. Then
/// `Φ(x)*Φ(y) = V* ρ(⟨x,y⟩) V = φ(⟨x,y⟩)`.
pub fn gen_phi_map(phi: &CPMap, k: usize, h2_dim: usize, seed: u64) -> Result<PhiMap> {
    let module = FreeModule::new(phi.algebra(), k)?;
    let rep = minimal_stinespring(phi, &TolerancePolicy::default())?;
    let k1 = rep.k1_dim();
    let wide = k * k1;
    if h2_dim < wide || h2_dim == 0 {
        return Err(Error::DimensionTooSmall(format!(
            "h2 must be at least n*r*k = {wide} (got {h2_dim})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = random_isometry(&mut rng, h2_dim, wide);
    let images = (0..module.basis_len())
        .map(|b| {
            let (i, p, q) = module.basis_triple(b);
            let psi0 = CMatrix::embed(wide, k1, i * k1, 0, rep.rho(p, q));
            &(&j * &psi0) * rep.v()
        })
        .collect();
    PhiMap::new(module, phi.clone(), h2_dim, images)
}

/// `‖Φ(x)*Φ(y) − φ(⟨x, y⟩)‖` at a single pair.
pub fn phi_map_defect(big_phi: &PhiMap, x: &ModuleElement, y: &ModuleElement) -> Result<f64> {
    let lhs = &apply_phi(big_phi, x)?.adjoint() * &apply_phi(big_phi, y)?;
    let rhs = apply_cp(&big_phi.phi, &inner_product(x, y)?)?;
    Ok(lhs.distance(&rhs))
}
