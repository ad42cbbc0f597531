//! Shared fixtures for the benchmarks.

use treespec_core::{build_l, Potential, SymmetricOperator, TreeGeometry};

/// Adjacency operator of the depth-`depth` tree.
pub fn adjacency(depth: usize) -> (TreeGeometry, SymmetricOperator) {
    let g = TreeGeometry::new(depth);
    let l = build_l(&g);
    (g, l)
}

/// The canonical perturbed Hamiltonian `L + (1 + |v|)^(-1)`.
pub fn perturbed(depth: usize) -> (TreeGeometry, SymmetricOperator) {
    let (g, l) = adjacency(depth);
    let q = Potential::power_radial(&g, 1.0, 1.0);
    let h = l.add(&q.as_operator());
    (g, h)
}
