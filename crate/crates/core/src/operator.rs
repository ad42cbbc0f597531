//! Operators on l2(V) of the truncated binary tree.
//!
//! `L` is the off-diagonal Laplacian (adjacency sum), `Delta = L - d` with
//! `d` the degree diagonal, `Pi`/`Pi*` the outward/inward shifts between
//! neighboring spheres, `R` multiplication by the level, and `Lambda_n` the
//! cutoff projection onto the spheres of radius at most `n`. On a binary
//! tree there are no intra-sphere edges, so `L = Pi + Pi*` holds exactly.

use crate::error::{Error, Result};
use crate::matrix::{check_same_dim, Mat};
use crate::tree::TreeGeometry;

/// Real square matrix with an explicit symmetry flag. When the flag is set
/// the entries are exactly symmetric: every constructor either builds one
/// triangle and mirrors it or verifies exact equality, so the flag never
/// relies on a tolerance.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    mat: Mat,
    symmetric: bool,
}

impl SymmetricOperator {
    /// Wraps a matrix, verifying exact symmetry.
    pub fn from_mat(mat: Mat) -> Result<Self> {
        assert!(mat.is_square());
        let asym = mat.asymmetry();
        if asym != 0.0 {
            return Err(Error::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        Ok(SymmetricOperator {
            mat,
            symmetric: true,
        })
    }

    /// Wraps a matrix whose upper triangle is taken as the value of both
    /// triangles. For products that are symmetric in exact arithmetic.
    pub fn from_mat_mirroring(mat: Mat) -> Self {
        SymmetricOperator {
            mat: mat.mirror_upper(),
            symmetric: true,
        }
    }

    /// Evaluates `f` on the upper triangle and mirrors it.
    pub fn from_fn_symmetric(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut mat = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                mat[(i, j)] = f(i, j);
            }
        }
        SymmetricOperator {
            mat: mat.mirror_upper(),
            symmetric: true,
        }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut mat = Mat::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            mat[(i, i)] = v;
        }
        SymmetricOperator {
            mat,
            symmetric: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        SymmetricOperator {
            mat: Mat::identity(n),
            symmetric: true,
        }
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricOperator {
            mat: Mat::zeros(n, n),
            symmetric: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }

    pub fn add(&self, rhs: &SymmetricOperator) -> SymmetricOperator {
        SymmetricOperator {
            mat: self.mat.add(&rhs.mat),
            symmetric: self.symmetric && rhs.symmetric,
        }
    }

    pub fn sub(&self, rhs: &SymmetricOperator) -> SymmetricOperator {
        SymmetricOperator {
            mat: self.mat.sub(&rhs.mat),
            symmetric: self.symmetric && rhs.symmetric,
        }
    }

    pub fn scale(&self, s: f64) -> SymmetricOperator {
        SymmetricOperator {
            mat: self.mat.scale(s),
            symmetric: self.symmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `Pi`: pushes sphere `r` onto sphere `r + 1` (value at a vertex is the
    /// value at its parent).
    Outward,
    /// `Pi*`: sums the children, mapping sphere `r` onto sphere `r - 1`.
    Inward,
}

/// The shift `Pi` or its adjoint as an explicit matrix. The outward matrix
/// has a single 1 per non-root row, at the parent column; the inward matrix
/// is its exact transpose.
#[derive(Debug, Clone)]
pub struct ShiftOperator {
    mat: Mat,
    direction: ShiftDirection,
}

impl ShiftOperator {
    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn direction(&self) -> ShiftDirection {
        self.direction
    }

    /// The adjoint shift; a transpose, exactly.
    pub fn adjoint(&self) -> ShiftOperator {
        ShiftOperator {
            mat: self.mat.transpose(),
            direction: match self.direction {
                ShiftDirection::Outward => ShiftDirection::Inward,
                ShiftDirection::Inward => ShiftDirection::Outward,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }
}

/// Adjacency-sum operator: `(L phi)(v) = sum of phi over the neighbors of v`.
pub fn build_l(g: &TreeGeometry) -> SymmetricOperator {
    let n = g.vertex_count();
    SymmetricOperator::from_fn_symmetric(n, |i, j| {
        let v = g.vertex_at(i);
        let w = g.vertex_at(j);
        // upper triangle: i < j, so w can only be a child of v
        if g.parent(w) == Some(v) {
            1.0
        } else {
            0.0
        }
    })
}

/// `Delta = L - d` and the degree diagonal `d`.
pub fn build_delta_d(g: &TreeGeometry) -> (SymmetricOperator, SymmetricOperator) {
    let degrees: Vec<f64> = g.vertices().map(|v| g.degree(v) as f64).collect();
    let d = SymmetricOperator::diagonal(&degrees);
    let delta = build_l(g).sub(&d);
    (delta, d)
}

/// Outward shift `Pi`.
pub fn build_pi(g: &TreeGeometry) -> ShiftOperator {
    let n = g.vertex_count();
    let mut mat = Mat::zeros(n, n);
    for v in g.vertices() {
        if let Some(p) = g.parent(v) {
            mat[(g.array_index(v), g.array_index(p))] = 1.0;
        }
    }
    ShiftOperator {
        mat,
        direction: ShiftDirection::Outward,
    }
}

/// Multiplication by the level `|v|`.
pub fn build_r(g: &TreeGeometry) -> SymmetricOperator {
    let levels: Vec<f64> = g.vertices().map(|v| v.level() as f64).collect();
    SymmetricOperator::diagonal(&levels)
}

/// Cutoff projection `Lambda_n` onto the spheres of radius `<= n`.
pub fn build_level_cutoff(g: &TreeGeometry, n: usize) -> SymmetricOperator {
    let diag: Vec<f64> = g
        .vertices()
        .map(|v| if v.level() <= n { 1.0 } else { 0.0 })
        .collect();
    SymmetricOperator::diagonal(&diag)
}

/// Applies `Pi* Pi` to a vector supported away from the last sphere and
/// returns the result, which equals `2 phi` there. Support on the truncation
/// boundary is rejected: leaves have no children, so the identity cannot
/// hold for them.
pub fn apply_pi_star_pi(g: &TreeGeometry, phi: &[f64]) -> Result<Vec<f64>> {
    check_same_dim(phi.len(), g.vertex_count())?;
    let boundary_start = g.sphere_offset(g.depth());
    if phi[boundary_start..].iter().any(|&x| x != 0.0) {
        return Err(Error::TruncationBoundary { level: g.depth() });
    }
    // Pi then Pi*, unrolled: (Pi phi)(w) = phi(parent(w)); (Pi* psi)(v) sums
    // the children.
    let mut out = vec![0.0; phi.len()];
    for v in g.vertices() {
        if let Some(children) = g.children(v) {
            out[g.array_index(v)] = children
                .iter()
                .map(|&c| phi[g.array_index(g.parent(c).unwrap())])
                .sum();
        }
    }
    Ok(out)
}

/// `A B - B A`.
pub fn commutator(a: &Mat, b: &Mat) -> Result<Mat> {
    check_same_dim(a.rows(), b.rows())?;
    check_same_dim(a.cols(), b.cols())?;
    Ok(a.matmul(b).sub(&b.matmul(a)))
}

/// Commutator of a symmetric with an antisymmetric matrix, which is itself
/// symmetric: `[S, T] = S T + (S T)^T` when `T^T = -T`. Built from one
/// product and a mirrored transpose so the result is exactly symmetric.
pub fn commutator_sym_anti(sym: &Mat, anti: &Mat) -> SymmetricOperator {
    let x = sym.matmul(anti);
    let n = x.rows();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            out[(i, j)] = x[(i, j)] + x[(j, i)];
        }
    }
    SymmetricOperator::from_mat_mirroring(out)
}

/// Zeroes every row and column at a level above `max_level`.
pub fn zero_beyond_level(g: &TreeGeometry, m: &Mat, max_level: usize) -> Mat {
    m.retain_indices(|i| g.level_of_index(i) <= max_level)
}

/// Largest entry magnitude over the block with both levels `<= max_level`.
pub fn interior_max_abs(g: &TreeGeometry, m: &Mat, max_level: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.rows() {
        if g.level_of_index(i) > max_level {
            continue;
        }
        for j in 0..m.cols() {
            if g.level_of_index(j) <= max_level {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

/// Array indices of all vertices at level `<= max_level`; since the indexing
/// is level-order this is a prefix.
pub fn interior_indices(g: &TreeGeometry, max_level: usize) -> Vec<usize> {
    (0..g.vertex_count())
        .filter(|&i| g.level_of_index(i) <= max_level)
        .collect()
}
