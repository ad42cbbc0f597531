//! Reduction of the adjacency operator to weighted chains, one per invariant
//! subspace generator.
//!
//! A unit generator `chi` of `Q_{n,n}` spawns the orthonormal chain
//! `e_j = (Pi / sqrt 2)^j chi`, `j = 0..=D-n`, on which the adjacency
//! operator acts as the tridiagonal matrix with zero diagonal and constant
//! off-diagonal `sqrt 2`. Its eigenvalues are `2 sqrt 2 cos(k pi / (m + 1))`
//! for chain length `m`, so the full spectrum of the truncated operator is a
//! union of cosine grids with multiplicities `dim Q_{n,n}` — checked here as
//! a multiset against the dense eigensolver.

use crate::eigen::eigvalsh;
use crate::error::{Error, Result};
use crate::haar::{embed_sphere_vector, mode_dim, SubspaceDecomposition};
use crate::matrix::{dot, norm2, Mat};
use crate::operator::{build_pi, SymmetricOperator};
use crate::tree::TreeGeometry;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Band edge of the adjacency operator: `2 sqrt 2`.
pub const BAND_EDGE: f64 = 2.0 * SQRT_2;

/// One compressed chain.
#[derive(Debug, Clone)]
pub struct ModeChain {
    /// Birth radius of the generator's subspace.
    pub mode: usize,
    /// Chain length `m = D - n + 1`.
    pub length: usize,
    /// The `m x m` compression of the adjacency operator onto the chain.
    pub matrix: Mat,
    /// `dim Q_{n,n}`: how many identical chains the mode carries.
    pub multiplicity: usize,
}

impl ModeChain {
    /// Eigenvalues `2 sqrt 2 cos(k pi / (m + 1))`, ascending.
    pub fn closed_form_eigenvalues(&self) -> Vec<f64> {
        chain_eigenvalues(self.length)
    }

    /// Deviation from the exact tridiagonal form.
    pub fn tridiagonal_residual(&self) -> f64 {
        let m = self.length;
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let expected = if i.abs_diff(j) == 1 { SQRT_2 } else { 0.0 };
                worst = worst.max((self.matrix[(i, j)] - expected).abs());
            }
        }
        worst
    }
}

/// Closed-form spectrum of the zero-diagonal tridiagonal Toeplitz matrix
/// with off-diagonal `sqrt 2`, ascending.
pub fn chain_eigenvalues(length: usize) -> Vec<f64> {
    let m = length as f64;
    let mut out: Vec<f64> = (1..=length)
        .map(|k| BAND_EDGE * (k as f64 * std::f64::consts::PI / (m + 1.0)).cos())
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Compresses the adjacency operator onto the chain generated by a unit
/// vector of `Q_{n,n}` (given in sphere-`n` coordinates).
pub fn reduce_mode(
    g: &TreeGeometry,
    l: &SymmetricOperator,
    decomposition: &SubspaceDecomposition,
    n: usize,
    generator: &[f64],
) -> Result<ModeChain> {
    g.check_radius(n)?;
    let norm = norm2(generator);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::GeneratorNotNormalized { norm });
    }
    // Membership in Q_{n,n}: projection onto its spanning set recovers the
    // generator.
    let mut projected = vec![0.0; generator.len()];
    for basis_vector in decomposition.generators(n) {
        let coeff = dot(&basis_vector.values, generator);
        for (p, &b) in projected.iter_mut().zip(&basis_vector.values) {
            *p += coeff * b;
        }
    }
    let residual: f64 = generator
        .iter()
        .zip(&projected)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if residual > 1e-10 {
        return Err(Error::GeneratorOutsideSubspace { residual });
    }

    let length = g.depth() - n + 1;
    let pi = build_pi(g);
    let mut chain: Vec<Vec<f64>> = Vec::with_capacity(length);
    chain.push(embed_sphere_vector(g, n, generator));
    for _ in 1..length {
        let pushed = pi.mat().matvec(chain.last().expect("nonempty"));
        chain.push(pushed.iter().map(|x| x / SQRT_2).collect());
    }

    let mut matrix = Mat::zeros(length, length);
    for (j, v) in chain.iter().enumerate() {
        let lv = l.mat().matvec(v);
        for (i, u) in chain.iter().enumerate() {
            matrix[(i, j)] = dot(u, &lv);
        }
    }

    Ok(ModeChain {
        mode: n,
        length,
        matrix,
        multiplicity: mode_dim(n),
    })
}

/// One row of the spectrum census.
#[derive(Debug, Clone)]
pub struct CensusEntry {
    pub mode: usize,
    pub wavenumber: usize,
    pub expected: f64,
    pub matched: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumCensus {
    pub entries: Vec<CensusEntry>,
    pub max_gap: f64,
}

impl SpectrumCensus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Compares the dense spectrum of the truncated adjacency operator, as a
/// multiset, against the union of closed-form chain spectra with
/// multiplicities `dim Q_{n,n}`.
pub fn full_spectrum_census(g: &TreeGeometry, l: &SymmetricOperator) -> Result<SpectrumCensus> {
    let depth = g.depth();
    let mut expected: Vec<(f64, usize, usize)> = Vec::with_capacity(g.vertex_count());
    for n in 0..=depth {
        let length = depth - n + 1;
        let values = chain_eigenvalues(length);
        for _ in 0..mode_dim(n) {
            for (idx, &value) in values.iter().enumerate() {
                // wavenumber k recovered from the ascending order
                expected.push((value, n, length - idx));
            }
        }
    }
    assert_eq!(expected.len(), g.vertex_count());
    expected.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let actual = eigvalsh(l)?;
    let mut entries = Vec::with_capacity(expected.len());
    let mut max_gap = 0.0f64;
    for ((value, mode, wavenumber), matched) in expected.into_iter().zip(actual) {
        let gap = (value - matched).abs();
        max_gap = max_gap.max(gap);
        entries.push(CensusEntry {
            mode,
            wavenumber,
            expected: value,
            matched,
            gap,
        });
    }

    Ok(SpectrumCensus { entries, max_gap })
}

/// Total chain-slot count: `sum_n (D - n + 1) dim Q_{n,n}`, which must equal
/// the vertex count.
pub fn multiplicity_ledger(depth: usize) -> usize {
    (0..=depth).map(|n| (depth - n + 1) * mode_dim(n)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::build_haar;
    use crate::operator::build_l;

    fn first_generator(g: &TreeGeometry, n: usize) -> Vec<f64> {
        build_haar(g, n)
            .unwrap()
            .mode_vectors(n)
            .next()
            .unwrap()
            .values
            .clone()
    }

    #[test]
    fn mode_zero_chain_is_tridiagonal_sqrt_two() {
        let g = TreeGeometry::new(4);
        let l = build_l(&g);
        let decomp = SubspaceDecomposition::build(&g);
        let chain = reduce_mode(&g, &l, &decomp, 0, &first_generator(&g, 0)).unwrap();
        assert_eq!(chain.length, 5);
        assert!(chain.tridiagonal_residual() <= 1e-12);
    }

    #[test]
    fn depth_one_chain_has_eigenvalues_plus_minus_sqrt_two() {
        let g = TreeGeometry::new(1);
        let l = build_l(&g);
        let decomp = SubspaceDecomposition::build(&g);
        let chain = reduce_mode(&g, &l, &decomp, 0, &first_generator(&g, 0)).unwrap();
        let expected = Mat::from_rows(&[&[0.0, SQRT_2], &[SQRT_2, 0.0]]);
        assert!(chain.matrix.max_abs_diff(&expected) <= 1e-15);
        let ev = chain.closed_form_eigenvalues();
        assert!((ev[0] + SQRT_2).abs() <= 1e-15);
        assert!((ev[1] - SQRT_2).abs() <= 1e-15);
    }

    #[test]
    fn last_mode_chain_is_a_single_zero() {
        let g = TreeGeometry::new(3);
        let l = build_l(&g);
        let decomp = SubspaceDecomposition::build(&g);
        let chain = reduce_mode(&g, &l, &decomp, 3, &first_generator(&g, 3)).unwrap();
        assert_eq!(chain.length, 1);
        assert_eq!(chain.matrix[(0, 0)], 0.0);
        // 2 sqrt2 cos(pi/2), up to the rounding of cos
        assert!(chain.closed_form_eigenvalues()[0].abs() < 1e-15);
    }

    #[test]
    fn reduce_mode_rejects_foreign_generators() {
        let g = TreeGeometry::new(3);
        let l = build_l(&g);
        let decomp = SubspaceDecomposition::build(&g);
        // constant vector on sphere 2 lies in Q_{0,2}, not Q_{2,2}
        let bad = vec![0.5; 4];
        assert!(matches!(
            reduce_mode(&g, &l, &decomp, 2, &bad),
            Err(Error::GeneratorOutsideSubspace { .. })
        ));
    }

    #[test]
    fn reduce_mode_rejects_unnormalized_generators() {
        let g = TreeGeometry::new(3);
        let l = build_l(&g);
        let decomp = SubspaceDecomposition::build(&g);
        let bad = vec![1.0; 4];
        assert!(matches!(
            reduce_mode(&g, &l, &decomp, 2, &bad),
            Err(Error::GeneratorNotNormalized { .. })
        ));
    }

    #[test]
    fn chains_of_one_mode_compress_identically() {
        let g = TreeGeometry::new(5);
        let l = build_l(&g);
        let decomp = SubspaceDecomposition::build(&g);
        for n in 2..=4 {
            let generators: Vec<Vec<f64>> = build_haar(&g, n)
                .unwrap()
                .mode_vectors(n)
                .map(|v| v.values.clone())
                .collect();
            let reference = reduce_mode(&g, &l, &decomp, n, &generators[0]).unwrap();
            for generator in &generators[1..] {
                let chain = reduce_mode(&g, &l, &decomp, n, generator).unwrap();
                assert!(chain.matrix.max_abs_diff(&reference.matrix) <= 1e-12);
            }
        }
    }

    #[test]
    fn depth_two_census_matches_the_hand_count() {
        // {2 sqrt2 cos(k pi/4)} k=1..3, {2 sqrt2 cos(k pi/3)} k=1..2, and 0
        // twice from the two length-one chains: sorted
        // [-2, -sqrt2, 0, 0, 0, sqrt2, 2].
        let g = TreeGeometry::new(2);
        let census = full_spectrum_census(&g, &build_l(&g)).unwrap();
        assert_eq!(census.len(), 7);
        let expected = [-2.0, -SQRT_2, 0.0, 0.0, 0.0, SQRT_2, 2.0];
        for (entry, want) in census.entries.iter().zip(expected) {
            assert!((entry.expected - want).abs() <= 1e-12);
        }
        assert!(census.max_gap <= 1e-9);
        let zeros = census
            .entries
            .iter()
            .filter(|e| e.expected.abs() <= 1e-12)
            .count();
        assert_eq!(zeros, 3);
    }

    #[test]
    fn extreme_eigenvalues_follow_the_longest_chain() {
        for depth in [1, 3, 6] {
            let g = TreeGeometry::new(depth);
            let census = full_spectrum_census(&g, &build_l(&g)).unwrap();
            let edge = BAND_EDGE * (std::f64::consts::PI / (depth as f64 + 2.0)).cos();
            let first = census.entries.first().unwrap();
            let last = census.entries.last().unwrap();
            assert!((first.matched + edge).abs() <= 1e-10);
            assert!((last.matched - edge).abs() <= 1e-10);
        }
    }

    #[test]
    fn all_eigenvalues_stay_strictly_inside_the_band() {
        for depth in 1..=7 {
            let g = TreeGeometry::new(depth);
            let census = full_spectrum_census(&g, &build_l(&g)).unwrap();
            for entry in &census.entries {
                assert!(entry.matched.abs() < BAND_EDGE);
            }
        }
    }

    #[test]
    fn multiplicity_ledger_counts_every_vertex() {
        for depth in 0..=10 {
            assert_eq!(multiplicity_ledger(depth), (1 << (depth + 1)) - 1);
        }
    }

    #[test]
    fn stacked_chain_basis_block_diagonalizes_l() {
        // Assemble every chain vector into one orthonormal basis B and check
        // that B^T L B is the direct sum of the tridiagonal chains.
        let g = TreeGeometry::new(4);
        let l = build_l(&g);
        let decomp = SubspaceDecomposition::build(&g);
        let pi = build_pi(&g);
        let total = g.vertex_count();

        let mut columns: Vec<Vec<f64>> = Vec::new();
        let mut spans = Vec::new(); // (start, length) per chain
        for n in 0..=g.depth() {
            for generator in decomp.generators(n) {
                let start = columns.len();
                let mut current = embed_sphere_vector(&g, n, &generator.values);
                for _ in 0..=(g.depth() - n) {
                    columns.push(current.clone());
                    current = pi
                        .mat()
                        .matvec(&current)
                        .iter()
                        .map(|x| x / SQRT_2)
                        .collect();
                }
                spans.push((start, g.depth() - n + 1));
            }
        }
        assert_eq!(columns.len(), total);

        let b = Mat::from_fn(total, columns.len(), |i, j| columns[j][i]);
        let compressed = b.transpose().matmul(&l.mat().matmul(&b));

        for i in 0..total {
            for j in 0..total {
                let same_chain = spans
                    .iter()
                    .any(|&(s, len)| (s..s + len).contains(&i) && (s..s + len).contains(&j));
                let expected = if same_chain && i.abs_diff(j) == 1 {
                    SQRT_2
                } else {
                    0.0
                };
                assert!(
                    (compressed[(i, j)] - expected).abs() <= 1e-10,
                    "entry ({i}, {j})"
                );
            }
        }
    }
}
