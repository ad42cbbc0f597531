//! The conjugate operator, represented by the real antisymmetric matrix of
//! `iA`.
//!
//! Two independent constructions are provided:
//!
//! * **algebraic** — the operator formula
//!   `iA = (R - N + 1/2) Pi - Pi* (R - N + 1/2)`,
//!   assembled from matrix products;
//! * **entrywise** — the matrix-element formula
//!   `<delta_v, iA delta_w> = (|v| + 1/2) [w -> v] - sum_{z: w -> z} <delta_v, N delta_z>`
//!   for `|w| = |v| - 1` (and the antisymmetric mirror for `|w| = |v| + 1`,
//!   zero otherwise), evaluated with the closed-form level-operator elements.
//!
//! Their agreement is itself one of the verification targets. Entries couple
//! only adjacent spheres, and the antisymmetric matrix is real, so no
//! complex bookkeeping exists anywhere: the Hermitian `A` is analytically
//! `-i` times this matrix and is never materialized.

use crate::error::{Error, Result};
use crate::haar::n_matrix_element;
use crate::matrix::{check_same_dim, Mat};
use crate::operator::{build_r, ShiftOperator, SymmetricOperator};
use crate::tree::{TreeGeometry, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IaBuild {
    Algebraic,
    Entrywise,
}

/// Matrix of `iA` on a depth-`D` truncated tree.
#[derive(Debug, Clone)]
pub struct ConjugateOperator {
    mat: Mat,
    depth: usize,
    provenance: IaBuild,
}

impl ConjugateOperator {
    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn provenance(&self) -> IaBuild {
        self.provenance
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// `max |(iA) + (iA)^T|`; zero for the algebraic build.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.mat.rows() {
            for j in i..self.mat.cols() {
                worst = worst.max((self.mat[(i, j)] + self.mat[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Operator-formula build: `X = (R - N + 1/2) Pi`, then `iA = X - X^T`,
/// which is antisymmetric exactly, entry by entry.
pub fn build_ia_algebraic(
    g: &TreeGeometry,
    level_op: &SymmetricOperator,
    pi: &ShiftOperator,
) -> Result<ConjugateOperator> {
    check_same_dim(level_op.dim(), g.vertex_count())?;
    check_same_dim(pi.dim(), g.vertex_count())?;
    let n = g.vertex_count();

    // S = R - N + 1/2
    let mut s = build_r(g).mat().sub(level_op.mat());
    for i in 0..n {
        s[(i, i)] += 0.5;
    }

    let x = s.matmul(pi.mat());
    let mut mat = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat[(i, j)] = x[(i, j)] - x[(j, i)];
        }
    }

    Ok(ConjugateOperator {
        mat,
        depth: g.depth(),
        provenance: IaBuild::Algebraic,
    })
}

/// Matrix-element build: every entry evaluated directly from the closed
/// form, no matrix products. Rows and columns couple spheres `r` and
/// `r - 1` only; the level-operator elements needed always live on spheres
/// that exist, because the child sums run below the lower of the two levels.
pub fn build_ia_entrywise(g: &TreeGeometry) -> ConjugateOperator {
    let n = g.vertex_count();
    let mut mat = Mat::zeros(n, n);

    for r in 1..=g.depth() {
        let outer = g.sphere(r).expect("radius in range");
        let inner = g.sphere(r - 1).expect("radius in range");
        for &v in &outer {
            let vi = g.array_index(v);
            for &w in &inner {
                let wi = g.array_index(w);
                // |w| = |v| - 1 case for the (v, w) entry.
                let direct = if g.parent(v) == Some(w) {
                    r as f64 + 0.5
                } else {
                    0.0
                };
                let child_sum: f64 = g
                    .children(w)
                    .expect("w is below the last sphere")
                    .iter()
                    .map(|&z| n_matrix_element(g, v, z).expect("same sphere"))
                    .sum();
                mat[(vi, wi)] = direct - child_sum;

                // |w'| = |v'| + 1 case for the (w, v) entry: same adjacency
                // indicator, same child sum in the mirrored element order.
                let up_sum: f64 = g
                    .children(w)
                    .expect("w is below the last sphere")
                    .iter()
                    .map(|&z| n_matrix_element(g, z, v).expect("same sphere"))
                    .sum();
                mat[(wi, vi)] = -direct + up_sum;
            }
        }
    }

    ConjugateOperator {
        mat,
        depth: g.depth(),
        provenance: IaBuild::Entrywise,
    }
}

/// Absolute row sum `sum_w |<delta_v, iA delta_w>|` for an interior vertex.
/// Rows on the last sphere miss their outward entries to the cut spheres,
/// so they are rejected.
pub fn row_sum_check(g: &TreeGeometry, ia: &ConjugateOperator, v: VertexId) -> Result<f64> {
    if g.depth() == 0 || v.level() > g.depth() - 1 {
        return Err(Error::BoundaryVertex {
            level: v.level(),
            depth: g.depth(),
        });
    }
    Ok(ia
        .mat()
        .row(g.array_index(v))
        .iter()
        .map(|x| x.abs())
        .sum())
}

/// Linear bound `9 |v| + 4` on the absolute row sums, with the constants
/// traced term by term: `(|v| + 1/2) + 2|v| + (2(|v| + 1) + 1) + 4|v|`.
pub fn row_sum_bound(level: usize) -> f64 {
    9.0 * level as f64 + 4.0
}

/// `sum_{z in S_r} |<delta_v, N delta_z>|` for `r = |v|`; bounded by
/// `2 |v|`.
pub fn level_row_abs_sum(g: &TreeGeometry, v: VertexId) -> f64 {
    g.sphere(v.level())
        .expect("own level")
        .iter()
        .map(|&z| n_matrix_element(g, v, z).expect("same sphere").abs())
        .sum()
}
