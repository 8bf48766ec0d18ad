//! Fixtures shared by the benchmarks in `benches/`.

use stinespring::{gen_cp_map, gen_phi_map, CPMap, PhiMap};

/// A full-rank CP map on `M_n` into `B(C^h1)`.
pub fn cp_map(n: usize, h1: usize, seed: u64) -> CPMap {
    gen_cp_map(n, h1, n * h1, seed).expect("r = n·h1 is feasible")
}

/// A φ-map on `(M_n)^k` over a rank-`r` base map, with the smallest
/// admissible `H2`.
pub fn phi_map(n: usize, h1: usize, k: usize, r: usize, seed: u64) -> PhiMap {
    let phi = gen_cp_map(n, h1, r, seed).expect("feasible rank");
    gen_phi_map(&phi, k, n * r * k, seed + 1).expect("h2 = n·r·k is feasible")
}
