//! Minimal Stinespring representations for a pair `(φ, Φ)`.
//!
//! Step I builds `(ρ, V, K1)` with `φ(a) = V* ρ(a) V` and
//! `K1 = span ρ(A) V H1`. Two independent routes are provided:
//! [`minimal_stinespring`] (from a minimal Kraus set, `ρ(a) = a ⊗ I_r`)
//! and [`minimal_stinespring_gram`] (quotient of `A ⊗ H1` by the kernel of
//! the form `⟨a⊗h, b⊗g⟩ = ⟨h, φ(a*b) g⟩`).
//!
//! Step II, [`induce_module_rep`], takes `K2 = span Φ(E) H1 ⊆ H2`, lets `W`
//! be the co-isometry onto `K2`, and defines `Ψ(x)` on the spanning family
//! by `Ψ(x) ρ(a) V h = Φ(x a) h`. Operators defined on spanning families
//! (`Ψ`, `U1`, `U2`) are computed as minimal-norm least-squares solutions;
//! the solve residual certifies that the operator is well defined.

use crate::cstar_algebra::{
    image_of_unit, is_completely_positive, kraus_decomposition, CPMap, MatrixAlgebra,
};
use crate::error::{Error, Result};
use crate::hilbert_module::{apply_phi, module_action, FreeModule, ModuleElement, PhiMap};
use crate::numerics::{
    hermitian_eig, kron, operator_norm, orthonormal_range, pseudo_solve, CMatrix, TolerancePolicy,
    C64,
};

/// `(ρ, V, K1)` with `ρ` stored on matrix units.
#[derive(Clone, Debug, PartialEq)]
pub struct StinespringRep {
    algebra: MatrixAlgebra,
    k1_dim: usize,
    rho_images: Vec<CMatrix>,
    v: CMatrix,
}

impl StinespringRep {
    /// Checks shapes only; the algebraic identities are the job of
    /// [`verify_representation`].
    pub fn new(algebra: MatrixAlgebra, rho_images: Vec<CMatrix>, v: CMatrix) -> Result<Self> {
        let k1_dim = v.rows();
        if rho_images.len() != algebra.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} rho images, got {}",
                algebra.dim(),
                rho_images.len()
            )));
        }
        if let Some(bad) = rho_images.iter().find(|m| m.shape() != (k1_dim, k1_dim)) {
            return Err(Error::ShapeMismatch(format!(
                "rho images must be {k1_dim}x{k1_dim} to match V, got {}x{}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self {
            algebra,
            k1_dim,
            rho_images,
            v,
        })
    }

    pub fn algebra(&self) -> MatrixAlgebra {
        self.algebra
    }

    pub fn k1_dim(&self) -> usize {
        self.k1_dim
    }

    pub fn h1_dim(&self) -> usize {
        self.v.cols()
    }

    pub fn rho_images(&self) -> &[CMatrix] {
        &self.rho_images
    }

    pub fn rho(&self, p: usize, q: usize) -> &CMatrix {
        &self.rho_images[self.algebra.unit_index(p, q)]
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// `ρ(a) = Σ_pq a_pq ρ(E_pq)`.
    pub fn rho_at(&self, a: &CMatrix) -> Result<CMatrix> {
        let n = self.algebra.n();
        if a.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "rho expects a {n}x{n} argument, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        Ok(self
            .rho_images
            .iter()
            .zip(a.to_row_major())
            .fold(CMatrix::zeros(self.k1_dim, self.k1_dim), |acc, (r, c)| {
                &acc + &r.scale(c)
            }))
    }

    /// The family `{ρ(E_pq) V f_β}` as columns, ordered `(p, q, β)`.
    pub fn spanning_columns(&self) -> CMatrix {
        let blocks: Vec<CMatrix> = self.rho_images.iter().map(|r| r * &self.v).collect();
        CMatrix::hstack(self.k1_dim, &blocks).expect("uniform block rows")
    }
}

/// `(Ψ, W, K2)` with `Ψ` stored on the scalar basis of `E`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleRep {
    module: FreeModule,
    k2_dim: usize,
    psi_images: Vec<CMatrix>,
    w: CMatrix,
}

impl ModuleRep {
    pub fn new(module: FreeModule, psi_images: Vec<CMatrix>, w: CMatrix) -> Result<Self> {
        let k2_dim = w.rows();
        if psi_images.len() != module.basis_len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} psi images, got {}",
                module.basis_len(),
                psi_images.len()
            )));
        }
        if let Some(first) = psi_images.first() {
            if let Some(bad) = psi_images
                .iter()
                .find(|m| m.rows() != k2_dim || m.cols() != first.cols())
            {
                return Err(Error::ShapeMismatch(format!(
                    "psi images must all be {k2_dim}x{} to match W, got {}x{}",
                    first.cols(),
                    bad.rows(),
                    bad.cols()
                )));
            }
        }
        Ok(Self {
            module,
            k2_dim,
            psi_images,
            w,
        })
    }

    pub fn module(&self) -> FreeModule {
        self.module
    }

    pub fn k2_dim(&self) -> usize {
        self.k2_dim
    }

    pub fn psi_images(&self) -> &[CMatrix] {
        &self.psi_images
    }

    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    /// `Ψ(x)` by linear extension from the scalar basis.
    pub fn psi_at(&self, x: &ModuleElement) -> Result<CMatrix> {
        if x.module() != self.module {
            return Err(Error::ModuleMismatch(
                "element does not belong to the domain of Psi".into(),
            ));
        }
        let cols = self.psi_images.first().map_or(0, CMatrix::cols);
        let coeffs = x.components().iter().flat_map(CMatrix::to_row_major);
        Ok(self
            .psi_images
            .iter()
            .zip(coeffs)
            .fold(CMatrix::zeros(self.k2_dim, cols), |acc, (p, c)| {
                &acc + &p.scale(c)
            }))
    }

    /// Adds `extra` zero dimensions to `K2` (rows of `Ψ` and `W`). The
    /// result still represents the same `Φ` but is no longer minimal.
    pub fn padded(&self, extra: usize) -> Self {
        let pad = |m: &CMatrix| CMatrix::embed(m.rows() + extra, m.cols(), 0, 0, m);
        Self {
            module: self.module,
            k2_dim: self.k2_dim + extra,
            psi_images: self.psi_images.iter().map(pad).collect(),
            w: pad(&self.w),
        }
    }
}

/// `((ρ, V, K1), (Ψ, W, K2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationPair {
    stinespring: StinespringRep,
    module_rep: ModuleRep,
}

impl RepresentationPair {
    pub fn new(stinespring: StinespringRep, module_rep: ModuleRep) -> Result<Self> {
        if stinespring.algebra != module_rep.module.algebra() {
            return Err(Error::ModuleMismatch(
                "Stinespring and module parts live over different algebras".into(),
            ));
        }
        if let Some(first) = module_rep.psi_images.first() {
            if first.cols() != stinespring.k1_dim {
                return Err(Error::ShapeMismatch(format!(
                    "psi images act on a {}-dimensional space but K1 has dimension {}",
                    first.cols(),
                    stinespring.k1_dim
                )));
            }
        }
        Ok(Self {
            stinespring,
            module_rep,
        })
    }

    pub fn stinespring(&self) -> &StinespringRep {
        &self.stinespring
    }

    pub fn module_rep(&self) -> &ModuleRep {
        &self.module_rep
    }

    /// The family `{Ψ(x_b) V f_β}` as columns, ordered `(b, β)`.
    pub fn module_spanning_columns(&self) -> CMatrix {
        let v = self.stinespring.v();
        let blocks: Vec<CMatrix> = self.module_rep.psi_images.iter().map(|p| p * v).collect();
        CMatrix::hstack(self.module_rep.k2_dim, &blocks).expect("uniform block rows")
    }
}

fn require_cp(phi: &CPMap, tol: &TolerancePolicy) -> Result<()> {
    let verdict = is_completely_positive(phi, tol);
    if !verdict.completely_positive {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: verdict.min_eigenvalue,
        });
    }
    Ok(())
}

/// Kraus-route minimal dilation: `K1 = ℂⁿ ⊗ ℂʳ`, `ρ(a) = a ⊗ I_r`,
/// `V h = Σ_s (K_s* h) ⊗ e_s`.
pub fn minimal_stinespring(phi: &CPMap, tol: &TolerancePolicy) -> Result<StinespringRep> {
    let kraus = kraus_decomposition(phi, tol)?;
    let (n, h1, r) = (phi.n(), phi.h1_dim(), kraus.r());
    let algebra = phi.algebra();
    let id_r = CMatrix::identity(r);
    let rho_images = (0..algebra.dim())
        .map(|i| {
            let (p, q) = algebra.unit_pair(i);
            kron(&algebra.unit(p, q), &id_r)
        })
        .collect();
    let mut v = CMatrix::zeros(n * r, h1);
    for (s, k) in kraus.operators().iter().enumerate() {
        for p in 0..n {
            for i in 0..h1 {
                v.set(p * r + s, i, k.get(i, p).conj());
            }
        }
    }
    StinespringRep::new(algebra, rho_images, v)
}

/// Gram-route minimal dilation, used as an independent cross-check of
/// [`minimal_stinespring`].
pub fn minimal_stinespring_gram(phi: &CPMap, tol: &TolerancePolicy) -> Result<StinespringRep> {
    require_cp(phi, tol)?;
    let algebra = phi.algebra();
    let (n, h1) = (phi.n(), phi.h1_dim());
    let units = algebra.dim();
    let size = units * h1;
    // Basis E_pq ⊗ f_i at index (p·n + q)·h1 + i.
    let idx = |p: usize, q: usize, i: usize| (p * n + q) * h1 + i;
    // ⟨E_pq⊗f_i, E_rs⊗f_j⟩ = ⟨f_i, φ(E_qp E_rs) f_j⟩ = δ_pr φ(E_qs)_ij.
    let mut gram = CMatrix::zeros(size, size);
    for p in 0..n {
        for q in 0..n {
            for s in 0..n {
                let img = phi.image(q, s);
                for i in 0..h1 {
                    for j in 0..h1 {
                        gram.set(idx(p, q, i), idx(p, s, j), img.get(i, j));
                    }
                }
            }
        }
    }
    let eig = hermitian_eig(&gram, tol)?;
    let max = eig.values.last().copied().unwrap_or(0.0);
    let cutoff = tol.rank_rtol * max;
    let kept: Vec<usize> = (0..size)
        .filter(|&i| max > 0.0 && eig.values[i] > cutoff)
        .collect();
    if let Some(&smallest_kept) = kept.first() {
        let largest_dropped = eig.values[..smallest_kept]
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0);
        let gap = (eig.values[smallest_kept] - largest_dropped) / max;
        if gap < tol.rank_rtol {
            return Err(Error::IllConditioned(format!(
                "relative spectral gap {gap:e} at the rank cutoff is below {:e}",
                tol.rank_rtol
            )));
        }
    }
    let m = kept.len();
    // Coordinates of [u] in K1: Γ = Λ^{1/2} Q*, with right inverse Γ⁺ = Q Λ^{-1/2}.
    let mut gamma = CMatrix::zeros(m, size);
    let mut gamma_pinv = CMatrix::zeros(size, m);
    for (row, &e) in kept.iter().enumerate() {
        let s = eig.values[e].sqrt();
        for col in 0..size {
            let z = eig.vectors.get(col, e);
            gamma.set(row, col, z.conj() * s);
            gamma_pinv.set(col, row, z / s);
        }
    }
    // ρ(E_tu)[E_pq ⊗ h] = δ_up [E_tq ⊗ h]: column (u, q, i) of Γ·L is
    // column (t, q, i) of Γ, all other columns vanish.
    let rho_images = (0..units)
        .map(|unit| {
            let (t, u) = algebra.unit_pair(unit);
            let mut gl = CMatrix::zeros(m, size);
            for q in 0..n {
                for i in 0..h1 {
                    for row in 0..m {
                        gl.set(row, idx(u, q, i), gamma.get(row, idx(t, q, i)));
                    }
                }
            }
            &gl * &gamma_pinv
        })
        .collect();
    // V h = [1 ⊗ h] = Σ_p [E_pp ⊗ h].
    let mut v = CMatrix::zeros(m, h1);
    for i in 0..h1 {
        for row in 0..m {
            let z = (0..n).fold(C64::new(0.0, 0.0), |acc, p| {
                acc + gamma.get(row, idx(p, p, i))
            });
            v.set(row, i, z);
        }
    }
    StinespringRep::new(algebra, rho_images, v)
}

fn require_minimal_k1(rep: &StinespringRep, tol: &TolerancePolicy) -> Result<CMatrix> {
    let span = rep.spanning_columns();
    let rank = orthonormal_range(&span, tol).rank;
    if rank != rep.k1_dim {
        return Err(Error::NotMinimal(format!(
            "span of rho(A)VH1 has dimension {rank}, K1 has dimension {}",
            rep.k1_dim
        )));
    }
    Ok(span)
}

/// Step II: the induced `(Ψ, W, K2)`.
pub fn induce_module_rep(
    big_phi: &PhiMap,
    rep: &StinespringRep,
    tol: &TolerancePolicy,
) -> Result<ModuleRep> {
    let module = big_phi.module();
    if module.algebra() != rep.algebra || big_phi.h1_dim() != rep.h1_dim() {
        return Err(Error::ShapeMismatch(
            "phi-map and Stinespring representation have different domains".into(),
        ));
    }
    let s = require_minimal_k1(rep, tol)?;
    let (h1, h2) = (big_phi.h1_dim(), big_phi.h2_dim());

    let all_columns = CMatrix::hstack(h2, big_phi.basis_images())?;
    let range = orthonormal_range(&all_columns, tol);
    let w = range.basis.adjoint();

    let algebra = module.algebra();
    let units: Vec<CMatrix> = (0..algebra.dim())
        .map(|i| {
            let (p, q) = algebra.unit_pair(i);
            algebra.unit(p, q)
        })
        .collect();
    let mut psi_images = Vec::with_capacity(module.basis_len());
    for b in 0..module.basis_len() {
        let x = module.basis_element(b);
        let targets = units
            .iter()
            .map(|e| Ok(&w * &apply_phi(big_phi, &module_action(&x, e)?)?))
            .collect::<Result<Vec<_>>>()?;
        let t = CMatrix::hstack(range.rank, &targets)?;
        debug_assert_eq!(t.cols(), algebra.dim() * h1);
        let sol = pseudo_solve(&s, &t, tol)?;
        let scale = t.frobenius_norm().max(1.0);
        if sol.residual > tol.atol * scale {
            let (i, p, q) = module.basis_triple(b);
            return Err(Error::NotAPhiMap(format!(
                "Psi is not well defined at basis element (component {i}, unit E_{p}{q}): \
                 least-squares residual {:e} exceeds {:e}",
                sol.residual,
                tol.atol * scale
            )));
        }
        psi_images.push(sol.x);
    }
    ModuleRep::new(module, psi_images, w)
}

/// Convenience: Step I (Kraus route) followed by Step II.
pub fn construct_minimal_pair(
    big_phi: &PhiMap,
    tol: &TolerancePolicy,
) -> Result<RepresentationPair> {
    let rep = minimal_stinespring(big_phi.phi(), tol)?;
    let module_rep = induce_module_rep(big_phi, &rep, tol)?;
    RepresentationPair::new(rep, module_rep)
}

/// Residuals of every identity a Stinespring pair must satisfy. Residuals
/// are Frobenius norms maximized over scalar bases.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationReport {
    /// `ρ(E_pq)ρ(E_rs) = δ_qr ρ(E_ps)` and `ρ(E_pq)* = ρ(E_qp)`.
    pub rho_homomorphism: f64,
    /// `V* ρ(E_pq) V = φ(E_pq)`.
    pub phi_reconstruction: f64,
    /// `Ψ(x_b)* Ψ(x_c) = ρ(⟨x_b, x_c⟩)`.
    pub psi_morphism: f64,
    /// `W* Ψ(x_b) V = Φ(x_b)`.
    pub big_phi_reconstruction: f64,
    /// `Σ_p ρ(E_pp) = I`.
    pub rho_unital: f64,
    /// `|‖V‖² − ‖φ(1)‖|`.
    pub norm_identity: f64,
    /// `‖W W* − I‖`. Reported, not part of the verdict: only minimal pairs
    /// are guaranteed co-isometric.
    pub w_coisometry: f64,
    pub k1_dim: usize,
    pub k2_dim: usize,
    pub scale: f64,
    pub threshold: f64,
    pub shapes_consistent: bool,
    pub passed: bool,
}

impl RepresentationReport {
    /// The six verdict residuals with their report names.
    pub fn residuals(&self) -> [(&'static str, f64); 6] {
        [
            ("rho_homomorphism", self.rho_homomorphism),
            ("phi_reconstruction", self.phi_reconstruction),
            ("psi_morphism", self.psi_morphism),
            ("big_phi_reconstruction", self.big_phi_reconstruction),
            ("rho_unital", self.rho_unital),
            ("norm_identity", self.norm_identity),
        ]
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.residuals()
            .into_iter()
            .filter(|(_, r)| *r > self.threshold)
            .map(|(name, _)| name)
            .collect()
    }

    fn inconsistent(k1_dim: usize, k2_dim: usize) -> Self {
        Self {
            rho_homomorphism: 0.0,
            phi_reconstruction: 0.0,
            psi_morphism: 0.0,
            big_phi_reconstruction: 0.0,
            rho_unital: 0.0,
            norm_identity: 0.0,
            w_coisometry: 0.0,
            k1_dim,
            k2_dim,
            scale: 1.0,
            threshold: 0.0,
            shapes_consistent: false,
            passed: false,
        }
    }
}

fn shapes_consistent(phi: &CPMap, big_phi: &PhiMap, pair: &RepresentationPair) -> bool {
    let st = &pair.stinespring;
    let mr = &pair.module_rep;
    st.algebra == phi.algebra()
        && big_phi.phi().algebra() == phi.algebra()
        && big_phi.h1_dim() == phi.h1_dim()
        && st.h1_dim() == phi.h1_dim()
        && mr.module == big_phi.module()
        && mr.w.cols() == big_phi.h2_dim()
        && mr.psi_images.iter().all(|p| p.cols() == st.k1_dim)
}

pub fn verify_representation(
    phi: &CPMap,
    big_phi: &PhiMap,
    pair: &RepresentationPair,
    tol: &TolerancePolicy,
) -> RepresentationReport {
    let st = &pair.stinespring;
    let mr = &pair.module_rep;
    if !shapes_consistent(phi, big_phi, pair) {
        return RepresentationReport::inconsistent(st.k1_dim, mr.k2_dim);
    }
    let algebra = phi.algebra();
    let n = algebra.n();
    let k1 = st.k1_dim;
    let zero_k1 = CMatrix::zeros(k1, k1);

    let mut rho_homomorphism = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            let a = st.rho(p, q);
            rho_homomorphism = rho_homomorphism.max(a.adjoint().distance(st.rho(q, p)));
            for r in 0..n {
                for s in 0..n {
                    let expected = if q == r { st.rho(p, s) } else { &zero_k1 };
                    rho_homomorphism = rho_homomorphism.max((a * st.rho(r, s)).distance(expected));
                }
            }
        }
    }

    let v = &st.v;
    let v_adj = v.adjoint();
    let phi_reconstruction = (0..algebra.dim())
        .map(|i| {
            let (p, q) = algebra.unit_pair(i);
            (&(&v_adj * st.rho(p, q)) * v).distance(phi.image(p, q))
        })
        .fold(0.0, f64::max);

    let module = big_phi.module();
    let psi_adj: Vec<CMatrix> = mr.psi_images.iter().map(CMatrix::adjoint).collect();
    let mut psi_morphism = 0.0f64;
    for (b, adj) in psi_adj.iter().enumerate() {
        let (i, p, q) = module.basis_triple(b);
        for (c, psi) in mr.psi_images.iter().enumerate() {
            let (j, r, s) = module.basis_triple(c);
            let expected = if i == j && p == r {
                st.rho(q, s)
            } else {
                &zero_k1
            };
            psi_morphism = psi_morphism.max((adj * psi).distance(expected));
        }
    }

    let w_adj = mr.w.adjoint();
    let big_phi_reconstruction = mr
        .psi_images
        .iter()
        .zip(big_phi.basis_images())
        .map(|(psi, target)| (&(&w_adj * psi) * v).distance(target))
        .fold(0.0, f64::max);

    let rho_unit = (0..n).fold(zero_k1.clone(), |acc, p| &acc + st.rho(p, p));
    let rho_unital = rho_unit.distance(&CMatrix::identity(k1));

    let phi_one = operator_norm(&image_of_unit(phi));
    let v_norm_sq = operator_norm(v).powi(2);
    let norm_identity = (v_norm_sq - phi_one).abs();

    let w_coisometry = (&mr.w * &w_adj).distance(&CMatrix::identity(mr.k2_dim));

    let scale = big_phi
        .basis_images()
        .iter()
        .map(|m| operator_norm(m).powi(2))
        .fold(phi_one.max(v_norm_sq).max(1.0), f64::max);
    let threshold = tol.atol * scale;
    let mut report = RepresentationReport {
        rho_homomorphism,
        phi_reconstruction,
        psi_morphism,
        big_phi_reconstruction,
        rho_unital,
        norm_identity,
        w_coisometry,
        k1_dim: k1,
        k2_dim: mr.k2_dim,
        scale,
        threshold,
        shapes_consistent: true,
        passed: false,
    };
    report.passed = report.failures().is_empty();
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinimalityVerdict {
    /// `K1 = span ρ(A) V H1`.
    pub minimal_k1: bool,
    /// `K2 = span Ψ(E) V H1`.
    pub minimal_k2: bool,
}

pub fn minimality_check(pair: &RepresentationPair, tol: &TolerancePolicy) -> MinimalityVerdict {
    let rank_k1 = orthonormal_range(&pair.stinespring.spanning_columns(), tol).rank;
    let rank_k2 = orthonormal_range(&pair.module_spanning_columns(), tol).rank;
    MinimalityVerdict {
        minimal_k1: rank_k1 == pair.stinespring.k1_dim,
        minimal_k2: rank_k2 == pair.module_rep.k2_dim,
    }
}

/// Residuals certifying an [`EquivalenceWitness`]; Frobenius norms.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceResiduals {
    /// `max(‖U1*U1 − I‖, ‖U1U1* − I‖)`.
    pub u1_unitarity: f64,
    pub u2_unitarity: f64,
    /// `‖U1 V − V'‖`.
    pub u1_v: f64,
    /// `max_pq ‖U1 ρ(E_pq) − ρ'(E_pq) U1‖`.
    pub u1_rho: f64,
    /// `‖U2 W − W'‖`.
    pub u2_w: f64,
    /// `max_b ‖U2 Ψ(x_b) − Ψ'(x_b) U1‖`.
    pub u2_psi: f64,
    /// Least-squares residuals of the two defining solves.
    pub u1_solve: f64,
    pub u2_solve: f64,
}

impl EquivalenceResiduals {
    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("u1_unitarity", self.u1_unitarity),
            ("u2_unitarity", self.u2_unitarity),
            ("u1_v", self.u1_v),
            ("u1_rho", self.u1_rho),
            ("u2_w", self.u2_w),
            ("u2_psi", self.u2_psi),
            ("u1_solve", self.u1_solve),
            ("u2_solve", self.u2_solve),
        ]
    }

    pub fn max(&self) -> f64 {
        self.named().iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

/// Intertwining unitaries `U1: K1 → K1'`, `U2: K2 → K2'`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceWitness {
    pub u1: CMatrix,
    pub u2: CMatrix,
    pub residuals: EquivalenceResiduals,
    pub threshold: f64,
}

fn unitarity_defect(u: &CMatrix) -> f64 {
    let a = (&u.adjoint() * u).distance(&CMatrix::identity(u.cols()));
    let b = (u * &u.adjoint()).distance(&CMatrix::identity(u.rows()));
    a.max(b)
}

fn require_minimal(pair: &RepresentationPair, label: &str, tol: &TolerancePolicy) -> Result<()> {
    let m = minimality_check(pair, tol);
    if !(m.minimal_k1 && m.minimal_k2) {
        return Err(Error::NotMinimal(format!(
            "{label}: K1 spanning {}, K2 spanning {}",
            if m.minimal_k1 { "ok" } else { "fails" },
            if m.minimal_k2 { "ok" } else { "fails" }
        )));
    }
    Ok(())
}

/// Builds `U1` from `U1 ρ(a) V h = ρ'(a) V' h` and `U2` from
/// `U2 Ψ(x) V h = Ψ'(x) V' h`, then certifies unitarity and every
/// intertwining relation.
pub fn unitary_equivalence(
    a: &RepresentationPair,
    b: &RepresentationPair,
    tol: &TolerancePolicy,
) -> Result<EquivalenceWitness> {
    let (sa, sb) = (&a.stinespring, &b.stinespring);
    let (ma, mb) = (&a.module_rep, &b.module_rep);
    if sa.algebra != sb.algebra || sa.h1_dim() != sb.h1_dim() || ma.module != mb.module {
        return Err(Error::NotEquivalent(
            "representations are over different algebras, modules or H1".into(),
        ));
    }
    if ma.w.cols() != mb.w.cols() {
        return Err(Error::NotEquivalent(format!(
            "W maps out of H2 of dimension {} vs {}",
            ma.w.cols(),
            mb.w.cols()
        )));
    }
    require_minimal(a, "first representation", tol)?;
    require_minimal(b, "second representation", tol)?;

    let u1_sol = pseudo_solve(&sa.spanning_columns(), &sb.spanning_columns(), tol)?;
    let u2_sol = pseudo_solve(
        &a.module_spanning_columns(),
        &b.module_spanning_columns(),
        tol,
    )?;
    let (u1, u2) = (u1_sol.x, u2_sol.x);

    let u1_rho = sa
        .rho_images
        .iter()
        .zip(&sb.rho_images)
        .map(|(ra, rb)| (&u1 * ra).distance(&(rb * &u1)))
        .fold(0.0, f64::max);
    let u2_psi = ma
        .psi_images
        .iter()
        .zip(&mb.psi_images)
        .map(|(pa, pb)| (&u2 * pa).distance(&(pb * &u1)))
        .fold(0.0, f64::max);
    let residuals = EquivalenceResiduals {
        u1_unitarity: unitarity_defect(&u1),
        u2_unitarity: unitarity_defect(&u2),
        u1_v: (&u1 * &sa.v).distance(&sb.v),
        u1_rho,
        u2_w: (&u2 * &ma.w).distance(&mb.w),
        u2_psi,
        u1_solve: u1_sol.residual,
        u2_solve: u2_sol.residual,
    };
    let scale = [&sa.v, &sb.v]
        .into_iter()
        .map(|v| operator_norm(v).powi(2))
        .fold(1.0, f64::max);
    let threshold = tol.atol * scale;
    if let Some((name, value)) = residuals.named().into_iter().find(|(_, r)| *r > threshold) {
        return Err(Error::NotEquivalent(format!(
            "{name} residual {value:e} exceeds {threshold:e}"
        )));
    }
    Ok(EquivalenceWitness {
        u1,
        u2,
        residuals,
        threshold,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsadiVerdict {
    /// No `x0` with `Φ(x0)Φ(x0)* = I_{H2}` can exist.
    Impossible,
    /// The rank bound does not decide; no search is attempted.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AsadiCheck {
    pub verdict: AsadiVerdict,
    /// Upper bound on `rank Φ(x)Φ(x)*`.
    pub max_rank_bound: usize,
    pub h2_dim: usize,
}

/// Rank obstruction to `Φ(x0)Φ(x0)* = I_{H2}`: the left side has rank at
/// most `min(h1, h2)`, so the identity on `H2` is out of reach once
/// `h2 > h1`.
pub fn asadi_condition_check(big_phi: &PhiMap) -> AsadiCheck {
    let (h1, h2) = (big_phi.h1_dim(), big_phi.h2_dim());
    AsadiCheck {
        verdict: if h2 > h1 {
            AsadiVerdict::Impossible
        } else {
            AsadiVerdict::Inconclusive
        },
        max_rank_bound: h1.min(h2),
        h2_dim: h2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cstar_algebra::{choi_rank, is_unital, schur_map};
    use crate::hilbert_module::{gen_cp_map, gen_phi_map, module_norm};
    use crate::schur_example as example;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn identity_map_has_trivial_dilation() {
        for n in 1..4 {
            let phi = CPMap::identity(MatrixAlgebra::new(n).unwrap());
            for rep in [
                minimal_stinespring(&phi, &tol()).unwrap(),
                minimal_stinespring_gram(&phi, &tol()).unwrap(),
            ] {
                assert_eq!(rep.k1_dim(), n);
                let v = rep.v();
                assert!((&v.adjoint() * v).distance(&CMatrix::identity(n)) < 1e-12);
            }
            let kraus = minimal_stinespring(&phi, &tol()).unwrap();
            for (i, rho) in kraus.rho_images().iter().enumerate() {
                let (p, q) = phi.algebra().unit_pair(i);
                assert_eq!(rho, &phi.algebra().unit(p, q));
            }
        }
    }

    #[test]
    fn schur_example_dimensions() {
        let phi = example::phi();
        assert_eq!(minimal_stinespring(&phi, &tol()).unwrap().k1_dim(), 4);
        assert_eq!(minimal_stinespring_gram(&phi, &tol()).unwrap().k1_dim(), 4);
        let pair = construct_minimal_pair(&example::big_phi(), &tol()).unwrap();
        assert_eq!(pair.module_rep().k2_dim(), 8);
    }

    #[test]
    fn generator_dimensions_agree_across_routes() {
        for seed in 0..10 {
            let (n, h1) = (1 + seed as usize % 3, 1 + seed as usize % 4);
            let r = 1 + (seed as usize * 7) % (n * h1);
            let phi = gen_cp_map(n, h1, r, seed).unwrap();
            assert_eq!(choi_rank(&phi, &tol()), r);
            let a = minimal_stinespring(&phi, &tol()).unwrap();
            let b = minimal_stinespring_gram(&phi, &tol()).unwrap();
            assert_eq!(a.k1_dim(), n * r);
            assert_eq!(b.k1_dim(), n * r);
        }
    }

    #[test]
    fn non_cp_maps_are_rejected() {
        let t = CPMap::transpose(MatrixAlgebra::new(2).unwrap());
        assert!(matches!(
            minimal_stinespring(&t, &tol()),
            Err(Error::NotCompletelyPositive { .. })
        ));
        assert!(matches!(
            minimal_stinespring_gram(&t, &tol()),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn scalar_instance() {
        let alg = MatrixAlgebra::new(1).unwrap();
        let phi = CPMap::identity(alg);
        let module = FreeModule::new(alg, 1).unwrap();
        let big_phi = PhiMap::new(module, phi.clone(), 1, vec![CMatrix::identity(1)]).unwrap();
        let pair = construct_minimal_pair(&big_phi, &tol()).unwrap();
        assert_eq!(pair.stinespring().k1_dim(), 1);
        assert_eq!(pair.module_rep().k2_dim(), 1);
        let psi = &pair.module_rep().psi_images()[0];
        let w = pair.module_rep().w();
        // Ψ and W are the identity up to a common phase.
        assert!((psi.get(0, 0).norm() - 1.0).abs() < 1e-12);
        assert!((w.get(0, 0).norm() - 1.0).abs() < 1e-12);
        assert!(verify_representation(&phi, &big_phi, &pair, &tol()).passed);
    }

    #[test]
    fn strict_coisometry_when_h2_is_large() {
        let phi = gen_cp_map(2, 2, 1, 3).unwrap();
        let big_phi = gen_phi_map(&phi, 2, 7, 4).unwrap();
        let pair = construct_minimal_pair(&big_phi, &tol()).unwrap();
        let mr = pair.module_rep();
        assert_eq!(mr.k2_dim(), 4);
        assert_eq!(mr.w().shape(), (4, 7));
        assert!((mr.w() * &mr.w().adjoint()).distance(&CMatrix::identity(4)) < 1e-12);
        let report = verify_representation(&phi, &big_phi, &pair, &tol());
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn zero_phi_map_gives_zero_k2() {
        let phi = schur_map(&CMatrix::identity(2)).unwrap();
        let module = FreeModule::new(phi.algebra(), 1).unwrap();
        let zero = PhiMap::new(module, phi.clone(), 3, vec![CMatrix::zeros(3, 2); 4]).unwrap();
        // The zero map is not a phi-map for a nonzero φ, but the construction
        // itself degrades to K2 = {0}.
        let rep = minimal_stinespring(&phi, &tol()).unwrap();
        let mr = induce_module_rep(&zero, &rep, &tol()).unwrap();
        assert_eq!(mr.k2_dim(), 0);
        assert_eq!(mr.w().shape(), (0, 3));
        assert!(mr
            .psi_images()
            .iter()
            .all(|p| p.shape() == (0, rep.k1_dim())));
    }

    #[test]
    fn explicit_pair_verifies() {
        let pair = example::explicit_pair();
        let report = verify_representation(&example::phi(), &example::big_phi(), &pair, &tol());
        assert!(report.passed, "{report:?}");
        for (name, r) in report.residuals() {
            assert!(r <= 1e-12, "{name} = {r:e}");
        }
        assert_eq!(
            minimality_check(&pair, &tol()),
            MinimalityVerdict {
                minimal_k1: true,
                minimal_k2: true
            }
        );
    }

    #[test]
    fn doubled_v_fails_reconstruction() {
        let pair = example::explicit_pair();
        let st = pair.stinespring();
        let doubled = StinespringRep::new(
            st.algebra(),
            st.rho_images().to_vec(),
            st.v().scale_real(2.0),
        )
        .unwrap();
        let bad = RepresentationPair::new(doubled, pair.module_rep().clone()).unwrap();
        let report = verify_representation(&example::phi(), &example::big_phi(), &bad, &tol());
        assert!(!report.passed);
        assert!(report.failures().contains(&"phi_reconstruction"));
        // V*ρ(E_11)V scales by 4, so the residual is 3·‖φ(E_11)‖ = 3·‖φ(1)‖.
        assert!((report.phi_reconstruction - 3.0).abs() < 1e-12);
    }

    #[test]
    fn padding_breaks_k2_minimality() {
        let pair = construct_minimal_pair(&example::big_phi(), &tol()).unwrap();
        let padded =
            RepresentationPair::new(pair.stinespring().clone(), pair.module_rep().padded(1))
                .unwrap();
        assert_eq!(
            minimality_check(&padded, &tol()),
            MinimalityVerdict {
                minimal_k1: true,
                minimal_k2: false
            }
        );
        assert!(matches!(
            unitary_equivalence(&padded, &pair, &tol()),
            Err(Error::NotMinimal(_))
        ));
    }

    #[test]
    fn self_equivalence_is_identity() {
        let pair = construct_minimal_pair(&example::big_phi(), &tol()).unwrap();
        let w = unitary_equivalence(&pair, &pair, &tol()).unwrap();
        assert!(w.u1.distance(&CMatrix::identity(4)) < 1e-12);
        assert!(w.u2.distance(&CMatrix::identity(8)) < 1e-12);
        assert!(w.residuals.max() < 1e-12);
    }

    #[test]
    fn explicit_pair_equivalent_to_constructed() {
        let constructed = construct_minimal_pair(&example::big_phi(), &tol()).unwrap();
        let w = unitary_equivalence(&example::explicit_pair(), &constructed, &tol()).unwrap();
        assert!(w.residuals.max() <= 1e-8, "{:?}", w.residuals);
    }

    #[test]
    fn inequivalent_pairs_are_rejected() {
        // Same shapes, different φ: the two Stinespring parts disagree.
        let a = construct_minimal_pair(&example::big_phi(), &tol()).unwrap();
        let phi = schur_map(&CMatrix::from_real_rows(&[&[1.0, 0.25], &[0.25, 1.0]])).unwrap();
        let big_phi = gen_phi_map(&phi, 2, 8, 1).unwrap();
        let b = construct_minimal_pair(&big_phi, &tol()).unwrap();
        assert!(matches!(
            unitary_equivalence(&a, &b, &tol()),
            Err(Error::NotEquivalent(_))
        ));
    }

    #[test]
    fn perturbed_phi_fails_well_definedness() {
        let rep = minimal_stinespring(&example::phi(), &tol()).unwrap();
        assert!(matches!(
            induce_module_rep(&example::perturbed_big_phi(), &rep, &tol()),
            Err(Error::NotAPhiMap(_))
        ));
    }

    #[test]
    fn non_minimal_stinespring_is_rejected() {
        // (ρ ⊕ ρ, V ⊕ 0) still dilates φ but K1 is twice too large.
        let rep = minimal_stinespring(&example::phi(), &tol()).unwrap();
        let rho = rep
            .rho_images()
            .iter()
            .map(|m| kron(&CMatrix::identity(2), m))
            .collect();
        let v = CMatrix::embed(2 * rep.k1_dim(), 2, 0, 0, rep.v());
        let padded = StinespringRep::new(rep.algebra(), rho, v).unwrap();
        assert!(matches!(
            induce_module_rep(&example::big_phi(), &padded, &tol()),
            Err(Error::NotMinimal(_))
        ));
    }

    #[test]
    fn psi_is_contractive_and_v_isometric_for_unital_phi() {
        let big_phi = example::big_phi();
        assert!(is_unital(big_phi.phi(), &tol()));
        let pair = construct_minimal_pair(&big_phi, &tol()).unwrap();
        let v = pair.stinespring().v();
        assert!((&v.adjoint() * v).distance(&CMatrix::identity(2)) < 1e-12);
        let module = big_phi.module();
        for b in 0..module.basis_len() {
            let x: ModuleElement = module.basis_element(b);
            let psi = &pair.module_rep().psi_images()[b];
            assert!(operator_norm(psi) <= module_norm(&x) + 1e-9);
        }
    }

    #[test]
    fn x0_obstruction_examples() {
        let c = asadi_condition_check(&example::big_phi());
        assert_eq!(c.verdict, AsadiVerdict::Impossible);
        assert_eq!(c.max_rank_bound, 2);

        let alg = MatrixAlgebra::new(1).unwrap();
        let module = FreeModule::new(alg, 1).unwrap();
        let scalar =
            PhiMap::new(module, CPMap::identity(alg), 1, vec![CMatrix::identity(1)]).unwrap();
        let c = asadi_condition_check(&scalar);
        assert_eq!(c.verdict, AsadiVerdict::Inconclusive);
        assert_eq!(c.max_rank_bound, 1);
    }
}
