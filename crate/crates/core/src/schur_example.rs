//! Built-in reference instance: the Schur multiplier `φ(a) = D ∘ a` on
//! `M₂(ℂ)` with `D = [[1, 1/2], [1/2, 1]]`, a φ-map `Φ` on `E = A ⊕ A` into
//! `B(ℂ², ℂ⁸)`, and an explicit minimal representation
//! `ρ(a) = a ⊕ a`, `K1 = ℂ⁴`, `K2 = H2 = ℂ⁸`, `W = I`.

use crate::cstar_algebra::{schur_map, CPMap, MatrixAlgebra};
use crate::dilation::{ModuleRep, RepresentationPair, StinespringRep};
use crate::hilbert_module::{FreeModule, PhiMap};
use crate::numerics::{kron, CMatrix, C64};

const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;

pub fn d() -> CMatrix {
    CMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 1.0]])
}

pub fn phi() -> CPMap {
    schur_map(&d()).expect("2x2 multiplier")
}

pub fn algebra() -> MatrixAlgebra {
    MatrixAlgebra::new(2).expect("n = 2")
}

pub fn module() -> FreeModule {
    FreeModule::new(algebra(), 2).expect("k = 2")
}

fn sigma_z() -> CMatrix {
    CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `Φ(a ⊕ b) = [√3/2·a; √3/2·b; ½·aσ_z; ½·bσ_z]` (8×2).
pub fn big_phi_at(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let s = C64::new(HALF_SQRT3, 0.0);
    let h = C64::new(0.5, 0.0);
    let z = sigma_z();
    let blocks = [a.scale(s), b.scale(s), (a * &z).scale(h), (b * &z).scale(h)];
    blocks
        .iter()
        .enumerate()
        .fold(CMatrix::zeros(8, 2), |acc, (i, blk)| {
            &acc + &CMatrix::embed(8, 2, 2 * i, 0, blk)
        })
}

pub fn big_phi() -> PhiMap {
    let m = module();
    let zero = CMatrix::zeros(2, 2);
    let images = (0..m.basis_len())
        .map(|b| {
            let (i, p, q) = m.basis_triple(b);
            let e = algebra().unit(p, q);
            if i == 0 {
                big_phi_at(&e, &zero)
            } else {
                big_phi_at(&zero, &e)
            }
        })
        .collect();
    PhiMap::new(m, phi(), 8, images).expect("shapes are fixed")
}

/// `Φ` with `+0.1` at entry `(0, 1)` of `Φ(E_11 ⊕ 0)`. This entry is zero
/// in the valid map and is not reachable through `Ψ(x)ρ(a)V`, so both the
/// φ-map identity and well-definedness of `Ψ` break.
pub fn perturbed_big_phi() -> PhiMap {
    let b = module().basis_index(0, 0, 0);
    let phi = big_phi();
    let old = phi.basis_images()[b].get(0, 1);
    phi.with_entry(b, 0, 1, old + C64::new(0.1, 0.0))
}

pub fn explicit_v() -> CMatrix {
    CMatrix::from_real_rows(&[
        &[HALF_SQRT3, 0.0],
        &[0.0, HALF_SQRT3],
        &[0.5, 0.0],
        &[0.0, -0.5],
    ])
}

pub fn explicit_stinespring() -> StinespringRep {
    let alg = algebra();
    let rho = (0..alg.dim())
        .map(|i| {
            let (p, q) = alg.unit_pair(i);
            kron(&CMatrix::identity(2), &alg.unit(p, q))
        })
        .collect();
    StinespringRep::new(alg, rho, explicit_v()).expect("shapes are fixed")
}

/// `Ψ(a ⊕ b) = [[a, 0], [b, 0], [0, a], [0, b]]` (8×4).
pub fn explicit_psi_at(a: &CMatrix, b: &CMatrix) -> CMatrix {
    [(0, 0, a), (2, 0, b), (4, 2, a), (6, 2, b)]
        .into_iter()
        .fold(CMatrix::zeros(8, 4), |acc, (r, c, blk)| {
            &acc + &CMatrix::embed(8, 4, r, c, blk)
        })
}

pub fn explicit_module_rep() -> ModuleRep {
    let m = module();
    let zero = CMatrix::zeros(2, 2);
    let psi = (0..m.basis_len())
        .map(|b| {
            let (i, p, q) = m.basis_triple(b);
            let e = algebra().unit(p, q);
            if i == 0 {
                explicit_psi_at(&e, &zero)
            } else {
                explicit_psi_at(&zero, &e)
            }
        })
        .collect();
    ModuleRep::new(m, psi, CMatrix::identity(8)).expect("shapes are fixed")
}

pub fn explicit_pair() -> RepresentationPair {
    RepresentationPair::new(explicit_stinespring(), explicit_module_rep())
        .expect("shapes are fixed")
}
