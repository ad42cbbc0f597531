//! Spectral analysis of the adjacency operator on depth-truncated binary
//! trees.
//!
//! The truncated tree carries the off-diagonal Laplacian `L = Pi + Pi*`
//! built from the outward and inward shifts between spheres. A per-sphere
//! Haar basis splits `l2(V)` into invariant subspaces on which `L` acts as
//! weighted chains, which pins its full spectrum in closed form. The level
//! operator of that splitting yields a conjugate operator `iA` with the
//! exact commutator identity `[L, iA] = 8 - L^2`, and the `mourre` module
//! turns that identity plus potential-decay diagnostics into finite,
//! machine-checkable positivity experiments for `H = L + q`.
//!
//! Modules:
//!
//! * [`tree`] — heap-indexed truncated binary tree, spheres, ancestry.
//! * [`matrix`] — dense matrices with a zero-skipping multiply kernel.
//! * [`operator`] — `L`, `Delta`, `d`, `Pi`, `Pi*`, `R`, cutoffs,
//!   commutators.
//! * [`eigen`] — self-contained symmetric eigensolver and functional
//!   calculus.
//! * [`haar`] — Haar bases, subspace projectors, the level operator two
//!   ways.
//! * [`conjugate`] — `iA` by operator formula and by matrix elements.
//! * [`modes`] — chain reductions and the closed-form spectrum census.
//! * [`potential`] — potential families and decay profiles.
//! * [`mourre`] — the commutator identity, smoothed projections, tail and
//!   double-commutator bounds, positivity experiments.
//!
//! ```
//! use treespec_core::*;
//!
//! // Free positivity on a depth-6 tree: with the window [-1.5, 1.5] and
//! // the sharp constant alpha = 8 - 1.5^2, the localized commutator
//! // E [L, iA] E - alpha E^2 is positive semidefinite up to roundoff.
//! let g = TreeGeometry::new(6);
//! let window = SpectralWindow::new(-1.5, 1.5, 0.25)?;
//! let report = mourre_experiment(&g, &Potential::zero(&g), &window, AlphaPolicy::Sharp)?;
//! assert_eq!(report.alpha, 5.75);
//! assert!(report.min_eigenvalue() >= -1e-10);
//! assert!(report.lemma5_residual <= 1e-10);
//!
//! // The truncated spectrum is a union of cosine grids, known in closed
//! // form.
//! let census = full_spectrum_census(&g, &build_l(&g))?;
//! assert!(census.max_gap <= 1e-9);
//! # Ok::<(), treespec_core::Error>(())
//! ```

pub mod conjugate;
pub mod eigen;
pub mod error;
pub mod haar;
pub mod matrix;
pub mod modes;
pub mod mourre;
pub mod operator;
pub mod potential;
pub mod tree;

pub use conjugate::{
    build_ia_algebraic, build_ia_entrywise, row_sum_bound, row_sum_check, ConjugateOperator,
    IaBuild,
};
pub use eigen::{eigh, eigvalsh, spectral_norm, EigenDecomposition};
pub use error::{Error, Result};
pub use haar::{
    build_haar, build_n_closed, mode_dim, n_matrix_element, HaarBasis, HaarVector,
    SubspaceDecomposition,
};
pub use matrix::{Mat, SplitMix64};
pub use modes::{
    chain_eigenvalues, full_spectrum_census, multiplicity_ledger, reduce_mode, CensusEntry,
    ModeChain, SpectrumCensus, BAND_EDGE,
};
pub use mourre::{
    commutator_identity_check, double_commutator_norm, free_commutator, mourre_experiment,
    projection_difference_check, smoothed_projection, tail_norm_profile, AlphaPolicy,
    DoubleCommutator, MourreReport, ProjectionDifference, SpectralWindow, TailProfile,
    NEGATIVE_COUNT_THRESHOLDS,
};
pub use operator::{
    apply_pi_star_pi, build_delta_d, build_l, build_level_cutoff, build_pi, build_r, commutator,
    commutator_sym_anti, interior_indices, interior_max_abs, zero_beyond_level, ShiftDirection,
    ShiftOperator, SymmetricOperator,
};
pub use potential::{
    first_difference_profile, first_difference_verdict, second_difference_profile,
    second_difference_verdict, DecayClass, DecayVerdict, Potential, PotentialFamily,
};
pub use tree::{TreeGeometry, VertexId};
