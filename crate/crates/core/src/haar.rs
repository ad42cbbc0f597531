//! Haar basis on each sphere and the induced subspace decomposition.
//!
//! Sphere `S_r` carries an orthonormal basis of vectors `rho_{n,r,k}`,
//! `n = 0..=r`: the constant vector (`n = 0`) plus, for each `n >= 1`,
//! sign patterns that are `+` on the level-`r` descendants of the left child
//! of an anchor vertex at level `n - 1` and `-` on those of the right child,
//! normalized to unit length. Fixing `r` they are the Haar basis of
//! `l2(S_r)`; fixing `n` and letting `r` grow they span the subspaces
//! `Q_{n,r} = Pi^(r-n) Q_{n,n}` whose direct sum `M_n` reduces the adjacency
//! operator.
//!
//! The level operator `N = sum_n n P_n` weights each `M_n` by its birth
//! radius. Its matrix elements have a closed form driven by the depth of the
//! deepest common ancestor; `build_n_closed` builds that form and
//! `SubspaceDecomposition::level_operator` builds the projector sum, which
//! serves as the independent oracle.

use crate::error::Result;
use crate::matrix::Mat;
use crate::operator::SymmetricOperator;
use crate::tree::{TreeGeometry, VertexId};

/// One Haar vector on a sphere, in canonical sphere coordinates.
#[derive(Debug, Clone)]
pub struct HaarVector {
    /// Birth radius `n` of the subspace this vector generates.
    pub mode: usize,
    /// Branch index `k` within the mode, `0..2^(max(n-1,0))`.
    pub branch: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HaarBasis {
    radius: usize,
    vectors: Vec<HaarVector>,
}

impl HaarBasis {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vectors(&self) -> &[HaarVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Vectors of one mode: the spanning set of `Q_{n,r}`.
    pub fn mode_vectors(&self, n: usize) -> impl Iterator<Item = &HaarVector> {
        self.vectors.iter().filter(move |v| v.mode == n)
    }

    /// Max deviation of the Gram matrix from the identity.
    pub fn gram_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let g = crate::matrix::dot(&a.values, &b.values);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// dim `Q_{n,r}`: 1 for `n <= 1`, otherwise `2^(n-1)`.
pub fn mode_dim(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        1 << (n - 1)
    }
}

/// `2^(-e/2)` with the even/odd split so dyadic values are exact.
fn pow2_neg_half(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        (2.0f64).powi(-((e / 2) as i32))
    } else {
        (2.0f64).powi(-((e / 2 + 1) as i32)) * std::f64::consts::SQRT_2
    }
}

/// Builds the Haar basis of sphere `r`. The mode-`n` vectors are exactly the
/// normalized outward pushforwards of the sphere-`(r-1)` ones, extended by
/// the `2^(r-1)` new sign patterns on sibling subtrees.
pub fn build_haar(g: &TreeGeometry, r: usize) -> Result<HaarBasis> {
    g.check_radius(r)?;
    let size = g.sphere_size(r);
    let offset = g.sphere_offset(r);
    let mut vectors = Vec::with_capacity(size);

    vectors.push(HaarVector {
        mode: 0,
        branch: 0,
        values: vec![pow2_neg_half(r); size],
    });

    for n in 1..=r {
        let amplitude = pow2_neg_half(r - n + 1);
        for k in 0..mode_dim(n) {
            let anchor = VertexId::new((1 << (n - 1)) + k);
            let [left, right] = g.children(anchor).expect("anchor level below r <= depth");
            let mut values = vec![0.0; size];
            for idx in g.descendants_at(left, r)? {
                values[idx - offset] = amplitude;
            }
            for idx in g.descendants_at(right, r)? {
                values[idx - offset] = -amplitude;
            }
            vectors.push(HaarVector {
                mode: n,
                branch: k,
                values,
            });
        }
    }

    Ok(HaarBasis { radius: r, vectors })
}

/// Closed-form matrix element `<delta_z, N delta_w>` for two vertices on the
/// same sphere `S_r`:
///
/// ```text
/// z == w:  r - 1 + 2^(-r)
/// z != w:  -2^(n - r) + 2^(-r),  n = lca_level(z, w) + 1
/// ```
///
/// `n` is the largest mode whose Haar support contains both vertices; the
/// anchor must be a common ancestor, so the deepest one wins.
pub fn n_matrix_element(g: &TreeGeometry, z: VertexId, w: VertexId) -> Result<f64> {
    let r = z.level();
    if z == w {
        g.check_radius(r)?;
        return Ok(r as f64 - 1.0 + (2.0f64).powi(-(r as i32)));
    }
    let n = g.lca_level(z, w)? + 1;
    Ok(-(2.0f64).powi(n as i32 - r as i32) + (2.0f64).powi(-(r as i32)))
}

/// The level operator built entrywise from the closed form. Block-diagonal
/// over spheres; this is the fast path used by the conjugate operator.
pub fn build_n_closed(g: &TreeGeometry) -> SymmetricOperator {
    let total = g.vertex_count();
    let mut mat = Mat::zeros(total, total);
    for r in 0..=g.depth() {
        let sphere = g.sphere(r).expect("radius in range");
        for (i, &z) in sphere.iter().enumerate() {
            for &w in sphere.iter().skip(i) {
                let value = n_matrix_element(g, z, w).expect("same sphere");
                mat[(g.array_index(z), g.array_index(w))] = value;
                mat[(g.array_index(w), g.array_index(z))] = value;
            }
        }
    }
    SymmetricOperator::from_mat(mat).expect("built symmetrically")
}

/// Per-sphere Haar bases together with the full-space projectors `P_n` onto
/// the truncated invariant subspaces `M_n`.
#[derive(Debug, Clone)]
pub struct SubspaceDecomposition {
    depth: usize,
    bases: Vec<HaarBasis>,
    projectors: Vec<SymmetricOperator>,
}

impl SubspaceDecomposition {
    pub fn build(g: &TreeGeometry) -> Self {
        let depth = g.depth();
        let bases: Vec<HaarBasis> = (0..=depth)
            .map(|r| build_haar(g, r).expect("radius in range"))
            .collect();

        let total = g.vertex_count();
        let mut projectors = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            let mut mat = Mat::zeros(total, total);
            for basis in &bases[n.min(depth)..=depth] {
                let offset = g.sphere_offset(basis.radius());
                for vector in basis.mode_vectors(n) {
                    accumulate_outer(&mut mat, &vector.values, offset);
                }
            }
            projectors.push(SymmetricOperator::from_mat(mat).expect("outer products"));
        }

        SubspaceDecomposition {
            depth,
            bases,
            projectors,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn basis(&self, r: usize) -> &HaarBasis {
        &self.bases[r]
    }

    /// Projector onto `M_n` truncated at the last sphere.
    pub fn projector(&self, n: usize) -> &SymmetricOperator {
        &self.projectors[n]
    }

    pub fn mode_count(&self) -> usize {
        self.projectors.len()
    }

    /// `N = sum_n n P_n`: the projector-sum route, used as the oracle for
    /// the closed form.
    pub fn level_operator(&self) -> SymmetricOperator {
        let total = self.projectors[0].dim();
        let mut acc = Mat::zeros(total, total);
        for (n, p) in self.projectors.iter().enumerate() {
            if n > 0 {
                acc = acc.add(&p.mat().scale(n as f64));
            }
        }
        SymmetricOperator::from_mat(acc).expect("sum of symmetric matrices")
    }

    /// Spanning vectors of `Q_{n,n}`, the generators of the mode-`n` chains.
    pub fn generators(&self, n: usize) -> Vec<&HaarVector> {
        self.bases[n].mode_vectors(n).collect()
    }
}

fn accumulate_outer(mat: &mut Mat, values: &[f64], offset: usize) {
    for (i, &a) in values.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in values.iter().enumerate() {
            if b != 0.0 {
                mat[(offset + i, offset + j)] += a * b;
            }
        }
    }
}

/// Embeds sphere-`r` coordinates into the full space.
pub fn embed_sphere_vector(g: &TreeGeometry, r: usize, values: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), g.sphere_size(r));
    let mut out = vec![0.0; g.vertex_count()];
    out[g.sphere_offset(r)..g.sphere_offset(r) + values.len()].copy_from_slice(values);
    out
}

/// Extracts the sphere-`r` diagonal block of a full-space matrix.
pub fn sphere_block(g: &TreeGeometry, m: &Mat, r: usize) -> Mat {
    let offset = g.sphere_offset(r);
    let size = g.sphere_size(r);
    m.block(offset, offset, size, size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::dot;
    use crate::operator::build_pi;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn sphere_one_basis_is_the_two_sign_patterns() {
        let g = TreeGeometry::new(3);
        let basis = build_haar(&g, 1).unwrap();
        assert_eq!(basis.len(), 2);
        assert_eq!(basis.vectors()[0].values, vec![SQRT_HALF, SQRT_HALF]);
        assert_eq!(basis.vectors()[1].values, vec![SQRT_HALF, -SQRT_HALF]);
    }

    #[test]
    fn sphere_two_new_vectors_are_sibling_differences() {
        let g = TreeGeometry::new(3);
        let basis = build_haar(&g, 2).unwrap();
        let new: Vec<&HaarVector> = basis.mode_vectors(2).collect();
        assert_eq!(new.len(), 2);
        assert_eq!(new[0].values, vec![SQRT_HALF, -SQRT_HALF, 0.0, 0.0]);
        assert_eq!(new[1].values, vec![0.0, 0.0, SQRT_HALF, -SQRT_HALF]);
    }

    #[test]
    fn mode_one_vector_is_half_plus_half_minus() {
        let g = TreeGeometry::new(6);
        for r in 1..=6 {
            let basis = build_haar(&g, r).unwrap();
            let v = basis.mode_vectors(1).next().unwrap();
            let size = g.sphere_size(r);
            let amp = (2.0f64).powf(-(r as f64) / 2.0);
            for (i, &x) in v.values.iter().enumerate() {
                let expected = if i < size / 2 { amp } else { -amp };
                assert!((x - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bases_are_orthonormal_and_complete() {
        let g = TreeGeometry::new(8);
        for r in 0..=8 {
            let basis = build_haar(&g, r).unwrap();
            assert_eq!(basis.len(), g.sphere_size(r));
            assert!(basis.gram_residual() <= 1e-12, "sphere {r}");
        }
    }

    #[test]
    fn mode_dims_follow_the_doubling_pattern() {
        assert_eq!(mode_dim(0), 1);
        assert_eq!(mode_dim(1), 1);
        for n in 2..10 {
            assert_eq!(mode_dim(n), 1 << (n - 1));
        }
        for r in 0..12 {
            let total: usize = (0..=r).map(mode_dim).sum();
            assert_eq!(total, 1 << r);
        }
    }

    #[test]
    fn pushforward_reproduces_the_next_sphere_basis() {
        // (Pi / sqrt 2) rho_{n,r,k} = rho_{n,r+1,k}
        let g = TreeGeometry::new(5);
        let pi = build_pi(&g);
        for r in 0..g.depth() {
            let from = build_haar(&g, r).unwrap();
            let to = build_haar(&g, r + 1).unwrap();
            for v in from.vectors() {
                let pushed = pi.mat().matvec(&embed_sphere_vector(&g, r, &v.values));
                let target = to
                    .vectors()
                    .iter()
                    .find(|t| t.mode == v.mode && t.branch == v.branch)
                    .unwrap();
                let embedded = embed_sphere_vector(&g, r + 1, &target.values);
                for (p, t) in pushed.iter().zip(&embedded) {
                    assert!((p * SQRT_HALF - t).abs() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn pi_preserves_orthogonality_of_sphere_vectors() {
        // Consequence of Pi* Pi = 2 I away from the boundary.
        let g = TreeGeometry::new(6);
        let pi = build_pi(&g);
        let mut rng = crate::matrix::SplitMix64::new(3);
        for r in 0..g.depth() {
            let size = g.sphere_size(r);
            for _ in 0..10 {
                let phi = rng.vector(size);
                let mut psi = rng.vector(size);
                // orthogonalize psi against phi
                let scale = dot(&phi, &psi) / dot(&phi, &phi);
                for (p, &q) in psi.iter_mut().zip(&phi) {
                    *p -= scale * q;
                }
                let push_phi = pi.mat().matvec(&embed_sphere_vector(&g, r, &phi));
                let push_psi = pi.mat().matvec(&embed_sphere_vector(&g, r, &psi));
                assert!(dot(&push_phi, &push_psi).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_element_at_radius_two() {
        let g = TreeGeometry::new(4);
        let v = g.sphere(2).unwrap()[0];
        assert_eq!(n_matrix_element(&g, v, v).unwrap(), 1.25);
    }

    #[test]
    fn sibling_and_cousin_elements_at_radius_two() {
        let g = TreeGeometry::new(4);
        let s = g.sphere(2).unwrap();
        // siblings: children of vertex 2
        assert_eq!(n_matrix_element(&g, s[0], s[1]).unwrap(), -0.75);
        // cousins: only the root in common
        assert_eq!(n_matrix_element(&g, s[0], s[2]).unwrap(), -0.25);
    }

    #[test]
    fn n_element_rejects_unequal_levels() {
        let g = TreeGeometry::new(3);
        assert!(n_matrix_element(&g, VertexId::new(2), VertexId::new(4)).is_err());
    }

    #[test]
    fn closed_form_root_block_is_zero() {
        let g = TreeGeometry::new(2);
        let n = build_n_closed(&g);
        assert_eq!(n.mat()[(0, 0)], 0.0);
    }

    #[test]
    fn closed_form_sphere_one_block() {
        let g = TreeGeometry::new(2);
        let n = build_n_closed(&g);
        let block = sphere_block(&g, n.mat(), 1);
        let expected = Mat::from_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]);
        assert_eq!(block.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn sphere_two_block_trace_counts_weighted_dims() {
        let g = TreeGeometry::new(3);
        let n = build_n_closed(&g);
        let block = sphere_block(&g, n.mat(), 2);
        let trace: f64 = (0..4).map(|i| block[(i, i)]).sum();
        assert!((trace - 5.0).abs() < 1e-14);
    }

    #[test]
    fn support_scan_oracle_matches_lca_arithmetic() {
        // The defining description: the largest mode whose Haar support
        // contains both vertices, found by scanning supports.
        let g = TreeGeometry::new(6);
        for r in 1..=g.depth() {
            let basis = build_haar(&g, r).unwrap();
            let offset = g.sphere_offset(r);
            let sphere = g.sphere(r).unwrap();
            for (i, &z) in sphere.iter().enumerate() {
                for &w in sphere.iter().skip(i + 1) {
                    let zi = g.array_index(z) - offset;
                    let wi = g.array_index(w) - offset;
                    let scanned = basis
                        .vectors()
                        .iter()
                        .filter(|v| v.values[zi] != 0.0 && v.values[wi] != 0.0)
                        .map(|v| v.mode)
                        .max()
                        .unwrap();
                    assert_eq!(scanned, g.lca_level(z, w).unwrap() + 1);
                }
            }
        }
    }

    #[test]
    fn projector_sum_oracle_matches_closed_form_per_sphere() {
        let g = TreeGeometry::new(6);
        let decomp = SubspaceDecomposition::build(&g);
        let oracle = decomp.level_operator();
        let closed = build_n_closed(&g);
        assert!(oracle.mat().max_abs_diff(closed.mat()) <= 1e-12);
    }

    #[test]
    fn sign_convention_does_not_change_the_level_operator() {
        // Flip every mode >= 1 vector and rebuild N from outer products;
        // the sign cancels in rho rho^T.
        let g = TreeGeometry::new(4);
        let total = g.vertex_count();
        let mut flipped = Mat::zeros(total, total);
        for r in 0..=g.depth() {
            let basis = build_haar(&g, r).unwrap();
            let offset = g.sphere_offset(r);
            for v in basis.vectors() {
                if v.mode == 0 {
                    continue;
                }
                let neg: Vec<f64> = v.values.iter().map(|x| -x).collect();
                let mut scaled = Mat::zeros(total, total);
                accumulate_outer(&mut scaled, &neg, offset);
                flipped = flipped.add(&scaled.scale(v.mode as f64));
            }
        }
        let closed = build_n_closed(&g);
        assert!(flipped.max_abs_diff(closed.mat()) <= 1e-12);
    }
}
