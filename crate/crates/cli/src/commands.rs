//! The experiment commands. Each one writes its artifacts into the output
//! directory and returns the invariant checks it ran; the exit status is 0
//! only when every check passed.

use anyhow::{Context, Result};
use std::fs;
use std::path::Path;

use crate::config::{PotentialSpec, RunConfig};
use crate::output::{
    cell_f64, cell_usize, write_dense_csv, write_triplets, CsvTable, Json, JsonObject,
};
use treespec_core::{
    build_haar, build_ia_algebraic, build_ia_entrywise, build_l, build_n_closed, build_pi,
    commutator_identity_check, first_difference_profile, first_difference_verdict,
    full_spectrum_census, interior_max_abs, mode_dim, mourre_experiment, row_sum_bound,
    row_sum_check, second_difference_profile, second_difference_verdict, Mat, MourreReport,
    PotentialFamily, SplitMix64, BAND_EDGE,
};

/// One invariant check: passes when `value <= tolerance`.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }

    fn to_json(&self) -> Json {
        JsonObject::new()
            .field("name", Json::str(&self.name))
            .field("value", Json::f64(self.value))
            .field("tolerance", Json::f64(self.tolerance))
            .field("passed", Json::Bool(self.passed()))
            .build()
    }
}

fn checks_json(checks: &[Check]) -> Json {
    Json::Array(checks.iter().map(Check::to_json).collect())
}

fn ensure_out(config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.out)
        .with_context(|| format!("cannot create output directory {}", config.out.display()))
}

fn write_json(path: &Path, json: &Json) -> Result<()> {
    fs::write(path, json.render()).with_context(|| format!("cannot write {}", path.display()))
}

/// Haar bases per sphere, the level operator two ways, and the
/// decomposition invariants.
pub fn decompose(config: &RunConfig, sphere: Option<usize>) -> Result<Vec<Check>> {
    ensure_out(config)?;
    let g = config.geometry();
    let depth = g.depth();
    let mut checks = Vec::new();

    let bases: Vec<_> = (0..=depth)
        .map(|r| build_haar(&g, r).expect("radius in range"))
        .collect();

    // orthonormality and completeness, sphere by sphere
    let mut gram_worst = 0.0f64;
    for basis in &bases {
        assert_eq!(basis.len(), g.sphere_size(basis.radius()));
        gram_worst = gram_worst.max(basis.gram_residual());
    }
    checks.push(Check::new("haar_orthonormality", gram_worst, 1e-12));

    // dim Q_{n,r} bookkeeping
    let mut dim_mismatch = 0usize;
    for basis in &bases {
        for n in 0..=basis.radius() {
            if basis.mode_vectors(n).count() != mode_dim(n) {
                dim_mismatch += 1;
            }
        }
    }
    checks.push(Check::new("subspace_dimensions", dim_mismatch as f64, 0.0));

    // closed-form level operator against the projector sum, per sphere block
    let closed = build_n_closed(&g);
    let mut n_worst = 0.0f64;
    for basis in &bases {
        let r = basis.radius();
        let size = g.sphere_size(r);
        let offset = g.sphere_offset(r);
        let mut oracle = Mat::zeros(size, size);
        for v in basis.vectors() {
            if v.mode == 0 {
                continue;
            }
            for (i, &a) in v.values.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, &b) in v.values.iter().enumerate() {
                    if b != 0.0 {
                        oracle[(i, j)] += v.mode as f64 * a * b;
                    }
                }
            }
        }
        let block = closed.mat().block(offset, offset, size, size);
        n_worst = n_worst.max(block.max_abs_diff(&oracle));
    }
    checks.push(Check::new("level_operator_two_routes", n_worst, 1e-12));

    // invariance on interior columns: L rho = sqrt2 (push + pull)
    let l = build_l(&g);
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut invariance_worst = 0.0f64;
    for basis in bases.iter().filter(|b| b.radius() < depth) {
        let r = basis.radius();
        for v in basis.vectors() {
            let embedded = treespec_core::haar::embed_sphere_vector(&g, r, &v.values);
            let image = l.mat().matvec(&embedded);
            let up = bases[r + 1]
                .vectors()
                .iter()
                .find(|t| t.mode == v.mode && t.branch == v.branch)
                .expect("pushforward exists");
            let mut residual = image;
            let up_embedded = treespec_core::haar::embed_sphere_vector(&g, r + 1, &up.values);
            for (x, u) in residual.iter_mut().zip(&up_embedded) {
                *x -= sqrt2 * u;
            }
            if r > v.mode {
                let down = bases[r - 1]
                    .vectors()
                    .iter()
                    .find(|t| t.mode == v.mode && t.branch == v.branch)
                    .expect("pullback exists");
                let down_embedded =
                    treespec_core::haar::embed_sphere_vector(&g, r - 1, &down.values);
                for (x, d) in residual.iter_mut().zip(&down_embedded) {
                    *x -= sqrt2 * d;
                }
            }
            let norm = residual.iter().map(|x| x * x).sum::<f64>().sqrt();
            invariance_worst = invariance_worst.max(norm);
        }
    }
    checks.push(Check::new(
        "mode_subspace_invariance",
        invariance_worst,
        1e-10,
    ));

    // seeded adjoint pairing
    let pi = build_pi(&g);
    let pi_star = pi.adjoint();
    let mut rng = SplitMix64::new(config.seed);
    let mut pairing_worst = 0.0f64;
    for _ in 0..100 {
        let phi = rng.vector(g.vertex_count());
        let psi = rng.vector(g.vertex_count());
        let lhs: f64 = psi
            .iter()
            .zip(pi.mat().matvec(&phi))
            .map(|(a, b)| a * b)
            .sum();
        let rhs: f64 = pi_star
            .mat()
            .matvec(&psi)
            .iter()
            .zip(&phi)
            .map(|(a, b)| a * b)
            .sum();
        pairing_worst = pairing_worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    checks.push(Check::new("shift_adjoint_pairing", pairing_worst, 1e-12));

    // artifacts
    let spheres: Vec<usize> = match sphere {
        Some(r) => {
            g.sphere(r).map_err(|e| anyhow::anyhow!("{e}"))?;
            vec![r]
        }
        None => (0..=depth).collect(),
    };
    for &r in &spheres {
        let size = g.sphere_size(r);
        let offset = g.sphere_offset(r);
        let mut header: Vec<String> = vec!["mode".into(), "branch".into()];
        header.extend((0..size).map(|i| format!("c{i}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut haar_csv = CsvTable::new(&header_refs);
        for v in bases[r].vectors() {
            let mut row = vec![cell_usize(v.mode), cell_usize(v.branch)];
            row.extend(v.values.iter().map(|&x| cell_f64(x)));
            haar_csv.row(row);
        }
        haar_csv.write_to(&config.out.join(format!("haar_sphere_{r}.csv")))?;
        write_dense_csv(
            &config.out.join(format!("n_sphere_{r}.csv")),
            &closed.mat().block(offset, offset, size, size),
        )?;
    }

    let json = JsonObject::new()
        .field("command", Json::str("decompose"))
        .field("depth", Json::usize(depth))
        .field("seed", Json::u64(config.seed))
        .field("checks", checks_json(&checks))
        .build();
    write_json(&config.out.join("decompose.json"), &json)?;

    dump_operators_if_requested(config, &g)?;
    Ok(checks)
}

/// Spectrum census against the closed-form chain eigenvalues.
pub fn spectrum(config: &RunConfig) -> Result<Vec<Check>> {
    ensure_out(config)?;
    let g = config.geometry();
    let l = build_l(&g);
    let census = full_spectrum_census(&g, &l)?;

    let mut csv = CsvTable::new(&["mode", "k", "closed_form", "matched", "gap"]);
    for entry in &census.entries {
        csv.row(vec![
            cell_usize(entry.mode),
            cell_usize(entry.wavenumber),
            cell_f64(entry.expected),
            cell_f64(entry.matched),
            cell_f64(entry.gap),
        ]);
    }
    csv.write_to(&config.out.join("spectrum.csv"))?;

    let max_abs = census
        .entries
        .iter()
        .fold(0.0f64, |m, e| m.max(e.matched.abs()));
    let checks = vec![
        Check::new("spectrum_census_gap", census.max_gap, 1e-9),
        Check::new("spectrum_inside_band", max_abs - BAND_EDGE, 0.0),
    ];

    let json = JsonObject::new()
        .field("command", Json::str("spectrum"))
        .field("depth", Json::usize(g.depth()))
        .field("eigenvalue_count", Json::usize(census.len()))
        .field("max_gap", Json::f64(census.max_gap))
        .field(
            "extreme_eigenvalue",
            Json::f64(census.entries.last().map(|e| e.matched).unwrap_or(0.0)),
        )
        .field("band_edge", Json::f64(BAND_EDGE))
        .field("checks", checks_json(&checks))
        .build();
    write_json(&config.out.join("spectrum.json"), &json)?;

    dump_operators_if_requested(config, &g)?;
    Ok(checks)
}

/// Conjugate-operator construction checks and the commutator identity.
pub fn commutator(config: &RunConfig) -> Result<Vec<Check>> {
    ensure_out(config)?;
    let g = config.geometry();
    let depth = g.depth();
    let mut checks = Vec::new();

    let entrywise = build_ia_entrywise(&g);
    checks.push(Check::new(
        "ia_entrywise_antisymmetry",
        entrywise.antisymmetry_residual(),
        1e-12,
    ));

    // The algebraic route is quadratic-cost in the level operator blocks;
    // the two-route agreement is specified through depth 8.
    if depth <= 8 {
        let level_op = build_n_closed(&g);
        let pi = build_pi(&g);
        let algebraic = build_ia_algebraic(&g, &level_op, &pi).map_err(|e| anyhow::anyhow!("{e}"))?;
        checks.push(Check::new(
            "ia_algebraic_antisymmetry",
            algebraic.antisymmetry_residual(),
            0.0,
        ));
        let diff = algebraic.mat().sub(entrywise.mat());
        checks.push(Check::new(
            "ia_two_route_interior_agreement",
            interior_max_abs(&g, &diff, depth.saturating_sub(1)),
            1e-12,
        ));
    }

    // row sums against 9|v| + 4
    let mut sums_csv = CsvTable::new(&["level", "max_row_sum", "bound"]);
    let mut worst_excess = f64::NEG_INFINITY;
    if depth >= 1 {
        for r in 0..depth {
            let mut level_max = 0.0f64;
            for v in g.sphere(r).map_err(|e| anyhow::anyhow!("{e}"))? {
                let sum = row_sum_check(&g, &entrywise, v).map_err(|e| anyhow::anyhow!("{e}"))?;
                level_max = level_max.max(sum);
                worst_excess = worst_excess.max(sum - row_sum_bound(r));
            }
            sums_csv.row(vec![
                cell_usize(r),
                cell_f64(level_max),
                cell_f64(row_sum_bound(r)),
            ]);
        }
        checks.push(Check::new("ia_row_sum_bound_excess", worst_excess, 0.0));
    }
    sums_csv.write_to(&config.out.join("row_sums.csv"))?;

    let mut identity_residual = None;
    if depth >= 3 {
        let l = build_l(&g);
        let residual =
            commutator_identity_check(&g, &l, &entrywise).map_err(|e| anyhow::anyhow!("{e}"))?;
        checks.push(Check::new("commutator_identity_residual", residual, 1e-10));
        identity_residual = Some(residual);
    }

    let mut json = JsonObject::new()
        .field("command", Json::str("commutator"))
        .field("depth", Json::usize(depth));
    if let Some(residual) = identity_residual {
        json = json.field("commutator_identity_residual", Json::f64(residual));
    }
    let json = json.field("checks", checks_json(&checks)).build();
    write_json(&config.out.join("commutator.json"), &json)?;

    dump_operators_if_requested(config, &g)?;
    Ok(checks)
}

/// Potential decay profiles.
pub fn decay(config: &RunConfig) -> Result<Vec<Check>> {
    ensure_out(config)?;
    let g = config.geometry();
    let q = config.potential.build(&g);

    let first = first_difference_profile(&g, &q);
    let mut first_csv = CsvTable::new(&["r", "s", "r_times_s"]);
    for (r, &s) in first.iter().enumerate() {
        first_csv.row(vec![cell_usize(r), cell_f64(s), cell_f64(r as f64 * s)]);
    }
    first_csv.write_to(&config.out.join("decay_first.csv"))?;

    let second = second_difference_profile(&g, &q);
    let mut second_csv = CsvTable::new(&["r", "t", "r_squared_times_t"]);
    for &(r, t) in &second {
        second_csv.row(vec![
            cell_usize(r),
            cell_f64(t),
            cell_f64((r * r) as f64 * t),
        ]);
    }
    second_csv.write_to(&config.out.join("decay_second.csv"))?;

    let json = JsonObject::new()
        .field("command", Json::str("decay"))
        .field("depth", Json::usize(g.depth()))
        .field("potential", potential_json(q.family()))
        .field(
            "first_difference_verdict",
            Json::str(format!(
                "{} with o(1/r) (finite-scale heuristic: r*s(r) nonincreasing over the top half of radii)",
                first_difference_verdict(&first)
            )),
        )
        .field(
            "second_difference_verdict",
            Json::str(format!(
                "{} with O(1/r^2) (finite-scale heuristic: r^2*t(r) within twice its median)",
                second_difference_verdict(&second)
            )),
        )
        .field("checks", checks_json(&[]))
        .build();
    write_json(&config.out.join("decay.json"), &json)?;

    dump_operators_if_requested(config, &g)?;
    Ok(Vec::new())
}

/// The positivity experiment; writes the full report as `report.json`.
pub fn mourre(config: &RunConfig) -> Result<Vec<Check>> {
    ensure_out(config)?;
    let g = config.geometry();
    let q = config.potential.build(&g);
    let win = config.window();
    let report = mourre_experiment(&g, &q, &win, config.alpha)
        .map_err(|e| anyhow::anyhow!("mourre experiment: {e}"))?;

    write_json(&config.out.join("report.json"), &mourre_report_json(&report))?;

    let mut ev_csv = CsvTable::new(&["index", "eigenvalue"]);
    for (i, &x) in report.eigenvalues_b.iter().enumerate() {
        ev_csv.row(vec![cell_usize(i), cell_f64(x)]);
    }
    ev_csv.write_to(&config.out.join("eigenvalues_b.csv"))?;

    let mut tail_csv = CsvTable::new(&["n", "tail_norm", "schur_bound"]);
    for (n, (norm, bound)) in report
        .tail_norms
        .iter()
        .zip(&report.tail_schur_bounds)
        .enumerate()
    {
        tail_csv.row(vec![cell_usize(n), cell_f64(*norm), cell_f64(*bound)]);
    }
    tail_csv.write_to(&config.out.join("tail_norms.csv"))?;

    let mut checks = vec![Check::new(
        "commutator_identity_residual",
        report.lemma5_residual,
        1e-10,
    )];
    let worst_tail_rise = report
        .tail_norms
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    checks.push(Check::new("tail_norms_nonincreasing", worst_tail_rise, 1e-12));
    let worst_tail_excess = report
        .tail_norms
        .iter()
        .zip(&report.tail_schur_bounds)
        .map(|(norm, bound)| norm - bound)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::new(
        "tail_schur_domination_excess",
        worst_tail_excess,
        1e-12,
    ));
    checks.push(Check::new(
        "double_commutator_schur_domination_excess",
        report.double_comm_norm - report.double_comm_schur_bound,
        1e-12,
    ));
    if config.potential == PotentialSpec::None {
        checks.push(Check::new(
            "free_case_positivity",
            -report.min_eigenvalue(),
            1e-10,
        ));
    }

    dump_operators_if_requested(config, &g)?;
    Ok(checks)
}

/// The full suite.
pub fn all(config: &RunConfig) -> Result<Vec<Check>> {
    let mut checks = decompose(config, None)?;
    checks.extend(spectrum(config)?);
    checks.extend(commutator(config)?);
    checks.extend(decay(config)?);
    checks.extend(mourre(config)?);
    Ok(checks)
}

fn potential_json(family: &PotentialFamily) -> Json {
    let (name, params) = match family {
        PotentialFamily::PowerRadial { c, beta } => (
            "power_radial",
            JsonObject::new()
                .field("c", Json::f64(*c))
                .field("beta", Json::f64(*beta)),
        ),
        PotentialFamily::LogRadial { c } => {
            ("log_radial", JsonObject::new().field("c", Json::f64(*c)))
        }
        PotentialFamily::Alternating { c, beta } => (
            "alternating",
            JsonObject::new()
                .field("c", Json::f64(*c))
                .field("beta", Json::f64(*beta)),
        ),
        PotentialFamily::RootDefect => ("root_defect", JsonObject::new()),
        PotentialFamily::Custom(label) if label == "none" => ("none", JsonObject::new()),
        PotentialFamily::Custom(label) => (
            "custom",
            JsonObject::new().field("label", Json::str(label)),
        ),
    };
    JsonObject::new()
        .field("family", Json::str(name))
        .field("params", params.build())
        .build()
}

fn mourre_report_json(report: &MourreReport) -> Json {
    let negative_counts = report
        .negative_counts
        .iter()
        .map(|&(eps, count)| (format!("{eps:e}"), Json::usize(count)))
        .collect();
    JsonObject::new()
        .field("depth", Json::usize(report.depth))
        .field("potential", potential_json(&report.potential))
        .field(
            "window",
            JsonObject::new()
                .field("a", Json::f64(report.window.a()))
                .field("b", Json::f64(report.window.b()))
                .field("delta", Json::f64(report.window.delta()))
                .build(),
        )
        .field("alpha", Json::f64(report.alpha))
        .field("alpha_policy", Json::str(report.alpha_policy.to_string()))
        .field("eigenvalues_B", Json::array_f64(&report.eigenvalues_b))
        .field("negative_counts", Json::Object(negative_counts))
        .field("tail_norms", Json::array_f64(&report.tail_norms))
        .field("double_comm_norm", Json::f64(report.double_comm_norm))
        .field("lemma5_residual", Json::f64(report.lemma5_residual))
        .field("boundary_policy", Json::str(report.boundary_policy))
        .build()
}

fn dump_operators_if_requested(config: &RunConfig, g: &treespec_core::TreeGeometry) -> Result<()> {
    if !config.dump_operators {
        return Ok(());
    }
    let l = build_l(g);
    let n_op = build_n_closed(g);
    let ia = build_ia_entrywise(g);
    for (name, mat) in [("l", l.mat()), ("n", n_op.mat()), ("ia", ia.mat())] {
        if config.dump_triplet {
            write_triplets(&config.out.join(format!("{name}.triplets.txt")), mat)?;
        }
        if config.dump_csv {
            write_dense_csv(&config.out.join(format!("{name}.csv")), mat)?;
        }
    }
    Ok(())
}

