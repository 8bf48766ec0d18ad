//! Minimal Stinespring representations for completely positive maps on
//! `Mₙ(ℂ)` and for φ-maps on free Hilbert C*-modules `Aᵏ`.
//!
//! The typical flow: describe `φ` as a [`CPMap`] and `Φ` as a [`PhiMap`],
//! check them with [`is_completely_positive`] and [`verify_phi_map`], build
//! a minimal pair with [`construct_minimal_pair`], audit it with
//! [`verify_representation`] and [`minimality_check`], and compare two
//! minimal pairs with [`unitary_equivalence`].

pub mod cstar_algebra;
pub mod dilation;
mod error;
pub mod hilbert_module;
pub mod numerics;
pub mod schur_example;
#[cfg(test)]
mod test_oracle;

pub use cstar_algebra::{
    apply_cp, choi_of, choi_rank, image_of_unit, is_completely_positive, is_unital,
    kraus_decomposition, matrix_units, schur_map, CPMap, CpVerdict, KrausSet, MatrixAlgebra,
};
pub use dilation::{
    asadi_condition_check, construct_minimal_pair, induce_module_rep, minimal_stinespring,
    minimal_stinespring_gram, minimality_check, unitary_equivalence, verify_representation,
    AsadiCheck, AsadiVerdict, EquivalenceResiduals, EquivalenceWitness, MinimalityVerdict,
    ModuleRep, RepresentationPair, RepresentationReport, StinespringRep,
};
pub use error::{Error, Result};
pub use hilbert_module::{
    apply_phi, gen_cp_map, gen_phi_map, gen_unital_cp_map, inner_product, module_action,
    module_norm, verify_phi_map, FreeModule, ModuleElement, PhiMap, PhiMapVerdict,
};
pub use numerics::{
    hermitian_eig, kron, operator_norm, orthonormal_range, pseudo_solve, CMatrix, HermitianEigen,
    OrthonormalRange, PseudoSolution, TolerancePolicy, C64,
};
