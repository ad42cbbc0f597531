//! Cross-module invariants at moderate depth. The heavier full-depth runs
//! live in the acceptance suite of the command-line crate.

use proptest::prelude::*;
use treespec_core::*;

#[test]
fn projectors_resolve_the_identity() {
    let g = TreeGeometry::new(6);
    let decomp = SubspaceDecomposition::build(&g);
    let n = g.vertex_count();
    let mut sum = Mat::zeros(n, n);
    for mode in 0..decomp.mode_count() {
        sum = sum.add(decomp.projector(mode).mat());
    }
    assert!(sum.max_abs_diff(&Mat::identity(n)) <= 1e-12);
}

#[test]
fn projectors_are_idempotent_and_mutually_orthogonal() {
    let g = TreeGeometry::new(5);
    let decomp = SubspaceDecomposition::build(&g);
    for a in 0..decomp.mode_count() {
        let pa = decomp.projector(a).mat();
        assert!(pa.matmul(pa).max_abs_diff(pa) <= 1e-12, "P_{a} idempotent");
        for b in (a + 1)..decomp.mode_count() {
            let pb = decomp.projector(b).mat();
            assert!(pa.matmul(pb).max_abs() <= 1e-12, "P_{a} P_{b}");
        }
    }
}

#[test]
fn subspace_dimensions_fill_each_sphere() {
    let g = TreeGeometry::new(8);
    let decomp = SubspaceDecomposition::build(&g);
    for r in 0..=g.depth() {
        let basis = decomp.basis(r);
        let mut total = 0;
        for n in 0..=r {
            let dim = basis.mode_vectors(n).count();
            assert_eq!(dim, mode_dim(n), "dim Q_({n},{r})");
            total += dim;
        }
        assert_eq!(total, g.sphere_size(r));
    }
}

#[test]
fn invariant_subspaces_reduce_the_adjacency_operator() {
    // (I - P_n) L P_n vanishes on interior columns.
    let g = TreeGeometry::new(6);
    let l = build_l(&g);
    let decomp = SubspaceDecomposition::build(&g);
    let id = Mat::identity(g.vertex_count());
    for n in 0..g.depth() {
        let p = decomp.projector(n).mat();
        let leak = id.sub(p).matmul(&l.mat().matmul(p));
        let mut worst = 0.0f64;
        for i in 0..leak.rows() {
            for j in 0..leak.cols() {
                if g.level_of_index(j) < g.depth() {
                    worst = worst.max(leak[(i, j)].abs());
                }
            }
        }
        assert!(worst <= 1e-10, "mode {n}: {worst:e}");
    }
}

#[test]
fn closed_form_level_operator_matches_projector_sum_per_sphere() {
    let g = TreeGeometry::new(7);
    let decomp = SubspaceDecomposition::build(&g);
    let oracle = decomp.level_operator();
    let closed = build_n_closed(&g);
    for r in 0..=g.depth() {
        let offset = g.sphere_offset(r);
        let size = g.sphere_size(r);
        let a = oracle.mat().block(offset, offset, size, size);
        let b = closed.mat().block(offset, offset, size, size);
        assert!(a.max_abs_diff(&b) <= 1e-12, "sphere {r}");
    }
}

#[test]
fn commutator_identity_holds_on_the_interior() {
    for depth in 3..=6 {
        let g = TreeGeometry::new(depth);
        let l = build_l(&g);
        let ia = build_ia_entrywise(&g);
        let residual = commutator_identity_check(&g, &l, &ia).unwrap();
        assert!(residual <= 1e-10, "depth {depth}: {residual:e}");
    }
}

#[test]
fn raw_commutator_diagonal_counts_degrees() {
    let g = TreeGeometry::new(4);
    let l = build_l(&g);
    let ia = build_ia_entrywise(&g);
    let c = commutator_sym_anti(l.mat(), ia.mat());
    // 8 - L^2 on the diagonal: 8 - degree
    assert!((c.mat()[(0, 0)] - 6.0).abs() <= 1e-12);
    let interior = g.array_index(VertexId::new(2));
    assert!((c.mat()[(interior, interior)] - 5.0).abs() <= 1e-12);
}

#[test]
fn algebraic_and_entrywise_conjugates_agree_through_the_projector_sum() {
    // The algebraic route fed by the oracle level operator instead of the
    // closed form; the two constructions must still agree.
    let g = TreeGeometry::new(5);
    let decomp = SubspaceDecomposition::build(&g);
    let pi = build_pi(&g);
    let algebraic = build_ia_algebraic(&g, &decomp.level_operator(), &pi).unwrap();
    let entrywise = build_ia_entrywise(&g);
    assert!(algebraic.mat().max_abs_diff(entrywise.mat()) <= 1e-12);
}

#[test]
fn smoothed_projection_of_a_covering_window_is_the_identity() {
    let g = TreeGeometry::new(5);
    let l = build_l(&g);
    let win = SpectralWindow::new(-4.0, 4.0, 0.5).unwrap();
    // plateau [-3.5, 3.5] covers the whole spectrum
    let e = smoothed_projection(&l, &win).unwrap();
    assert!(e.mat().max_abs_diff(&Mat::identity(g.vertex_count())) <= 1e-12);
}

#[test]
fn smoothed_projection_of_a_disjoint_window_vanishes() {
    let g = TreeGeometry::new(5);
    let l = build_l(&g);
    let win = SpectralWindow::new(3.0, 4.0, 0.2).unwrap();
    let e = smoothed_projection(&l, &win).unwrap();
    assert_eq!(e.mat().max_abs(), 0.0);
}

#[test]
fn plateau_rank_counts_the_plateau_eigenvalues() {
    let g = TreeGeometry::new(6);
    let l = build_l(&g);
    let win = SpectralWindow::new(-1.5, 1.5, 0.25).unwrap();
    let e = smoothed_projection(&l, &win).unwrap();
    let unit_eigenvalues = eigvalsh(&e)
        .unwrap()
        .iter()
        .filter(|&&x| (x - 1.0).abs() <= 1e-9)
        .count();
    // closed-form census counts the eigenvalues inside the plateau
    let (lo, hi) = win.plateau();
    let expected = full_spectrum_census(&g, &l)
        .unwrap()
        .entries
        .iter()
        .filter(|entry| entry.expected >= lo && entry.expected <= hi)
        .count();
    assert_eq!(unit_eigenvalues, expected);
}

#[test]
fn smoothed_projection_is_a_soft_projection_commuting_with_h() {
    let g = TreeGeometry::new(5);
    let l = build_l(&g);
    let q = Potential::power_radial(&g, 1.0, 1.0);
    let h = l.add(&q.as_operator());
    let win = SpectralWindow::new(-1.5, 1.5, 0.25).unwrap();
    let e = smoothed_projection(&h, &win).unwrap();
    let ev = eigvalsh(&e).unwrap();
    assert!(ev.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
    let comm = commutator(e.mat(), h.mat()).unwrap();
    assert!(comm.frobenius_norm() <= 1e-10);
}

#[test]
fn constant_potentials_commute_with_the_conjugate() {
    let g = TreeGeometry::new(6);
    let ia = build_ia_entrywise(&g);
    let q = Potential::constant(&g, 2.5);
    let profile = tail_norm_profile(&g, &q, &ia).unwrap();
    assert!(profile.norms.iter().all(|&x| x == 0.0));
    let dc = double_commutator_norm(&g, &q, &ia).unwrap();
    assert_eq!(dc.norm, 0.0);
}

#[test]
fn root_defect_tail_vanishes_beyond_the_first_cutoffs() {
    let g = TreeGeometry::new(6);
    let ia = build_ia_entrywise(&g);
    let q = Potential::root_defect(&g);
    let profile = tail_norm_profile(&g, &q, &ia).unwrap();
    assert!(profile.norms[0] > 0.0);
    for (n, &norm) in profile.norms.iter().enumerate().skip(2) {
        assert_eq!(norm, 0.0, "n = {n}");
    }
}

#[test]
fn tail_norms_never_increase() {
    let g = TreeGeometry::new(7);
    let ia = build_ia_entrywise(&g);
    for q in [
        Potential::power_radial(&g, 1.0, 1.0),
        Potential::log_radial(&g, 1.0),
        Potential::root_defect(&g),
    ] {
        let profile = tail_norm_profile(&g, &q, &ia).unwrap();
        for pair in profile.norms.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "{}", q.family());
        }
    }
}

#[test]
fn root_defect_double_commutator_is_depth_independent() {
    let mut norms = Vec::new();
    for depth in 4..=7 {
        let g = TreeGeometry::new(depth);
        let ia = build_ia_entrywise(&g);
        let q = Potential::root_defect(&g);
        norms.push(double_commutator_norm(&g, &q, &ia).unwrap().norm);
    }
    for &n in &norms[1..] {
        assert!((n - norms[0]).abs() <= 1e-10, "{norms:?}");
    }
}

#[test]
fn projection_difference_vanishes_without_a_potential() {
    let g = TreeGeometry::new(5);
    let l = build_l(&g);
    let win = SpectralWindow::new(-1.5, 1.5, 0.25).unwrap();
    let diff = projection_difference_check(&g, &l, &Potential::zero(&g), &win).unwrap();
    assert_eq!(diff.norm(), 0.0);
}

#[test]
fn projection_difference_is_continuous_in_the_potential() {
    let g = TreeGeometry::new(6);
    let l = build_l(&g);
    let tiny = Potential::power_radial(&g, 1e-8, 1.0);
    let win = SpectralWindow::new(-1.5, 1.5, 0.25).unwrap();
    let diff = projection_difference_check(&g, &l, &tiny, &win).unwrap();
    assert!(diff.norm() <= 1e-4, "{}", diff.norm());
}

#[test]
fn projection_difference_singular_values_are_a_valid_profile() {
    // Singular values descend and sit inside [0, 1]: both projections live
    // in [0, I]. The epsilon-rank is monotone in the threshold.
    let g = TreeGeometry::new(6);
    let l = build_l(&g);
    let q = Potential::power_radial(&g, 1.0, 2.0);
    let win = SpectralWindow::new(-1.5, 1.5, 0.25).unwrap();
    let diff = projection_difference_check(&g, &l, &q, &win).unwrap();
    for pair in diff.singular_values.windows(2) {
        assert!(pair[0] >= pair[1]);
    }
    assert!(diff.norm() <= 1.0 + 1e-12);
    assert!(diff.eps_rank(1e-1) <= diff.eps_rank(1e-3));
}

#[test]
fn mourre_experiment_rejects_windows_outside_the_bulk() {
    let g = TreeGeometry::new(4);
    let q = Potential::zero(&g);
    let win = SpectralWindow::new(-3.0, 1.0, 0.2).unwrap();
    assert!(matches!(
        mourre_experiment(&g, &q, &win, AlphaPolicy::Sharp),
        Err(Error::WindowOutsideBulk { .. })
    ));
}

#[test]
fn mourre_free_case_is_positive_at_small_depth() {
    let g = TreeGeometry::new(4);
    let q = Potential::zero(&g);
    let win = SpectralWindow::new(-1.5, 1.5, 0.25).unwrap();
    let report = mourre_experiment(&g, &q, &win, AlphaPolicy::Sharp).unwrap();
    assert_eq!(report.alpha, 5.75);
    assert!(report.min_eigenvalue() >= -1e-10);
    assert!(report.lemma5_residual <= 1e-10);
}

#[test]
fn mourre_with_an_empty_plateau_is_trivially_positive() {
    // spectrum at depth 4 tops out at 2 sqrt2 cos(pi/6) ~ 2.449
    let g = TreeGeometry::new(4);
    let q = Potential::zero(&g);
    let win = SpectralWindow::new(2.6, 2.8, 0.05).unwrap();
    let report = mourre_experiment(&g, &q, &win, AlphaPolicy::Sharp).unwrap();
    assert!(report.min_eigenvalue() >= -1e-10);
    assert!(report.eigenvalues_b.iter().all(|&x| x.abs() <= 1e-10));
}

#[test]
fn schur_bounds_dominate_tail_norms() {
    let g = TreeGeometry::new(7);
    let ia = build_ia_entrywise(&g);
    for q in [
        Potential::power_radial(&g, 1.0, 1.0),
        Potential::log_radial(&g, 1.0),
    ] {
        let profile = tail_norm_profile(&g, &q, &ia).unwrap();
        for (n, (norm, bound)) in profile
            .norms
            .iter()
            .zip(&profile.schur_bounds)
            .enumerate()
        {
            assert!(norm <= &(bound * (1.0 + 1e-10) + 1e-12), "{} n={n}", q.family());
        }
    }
}

#[test]
fn schur_product_bound_dominates_the_double_commutator() {
    let g = TreeGeometry::new(7);
    let ia = build_ia_entrywise(&g);
    for q in [
        Potential::power_radial(&g, 1.0, 1.0),
        Potential::root_defect(&g),
    ] {
        let dc = double_commutator_norm(&g, &q, &ia).unwrap();
        assert!(
            dc.norm <= dc.schur_bound * (1.0 + 1e-10) + 1e-12,
            "{}: {} vs {}",
            q.family(),
            dc.norm,
            dc.schur_bound
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_support_scan_on_random_pairs(
        depth in 1usize..7,
        seed in any::<u64>(),
    ) {
        let g = TreeGeometry::new(depth);
        let mut rng = SplitMix64::new(seed);
        let r = 1 + (rng.next_u64() as usize) % depth.max(1);
        let sphere = g.sphere(r).unwrap();
        let z = sphere[(rng.next_u64() as usize) % sphere.len()];
        let w = sphere[(rng.next_u64() as usize) % sphere.len()];
        if z != w {
            // support-scan oracle over the Haar basis
            let basis = build_haar(&g, r).unwrap();
            let offset = g.sphere_offset(r);
            let zi = g.array_index(z) - offset;
            let wi = g.array_index(w) - offset;
            let scanned = basis
                .vectors()
                .iter()
                .filter(|v| v.values[zi] != 0.0 && v.values[wi] != 0.0)
                .map(|v| v.mode)
                .max()
                .unwrap();
            let expected = -(2.0f64).powi(scanned as i32 - r as i32)
                + (2.0f64).powi(-(r as i32));
            let got = n_matrix_element(&g, z, w).unwrap();
            prop_assert!((got - expected).abs() <= 1e-15);
        }
    }

    #[test]
    fn window_profile_stays_in_the_unit_interval(
        a in -3.0f64..0.0,
        width in 0.5f64..4.0,
        frac in 0.01f64..0.49,
        x in -4.0f64..4.0,
    ) {
        let win = SpectralWindow::new(a, a + width, frac * width).unwrap();
        let g = win.evaluate(x);
        prop_assert!((0.0..=1.0).contains(&g));
        let (lo, hi) = win.plateau();
        if x >= lo && x <= hi {
            prop_assert_eq!(g, 1.0);
        }
        if x <= win.a() || x >= win.b() {
            prop_assert_eq!(g, 0.0);
        }
    }
}
