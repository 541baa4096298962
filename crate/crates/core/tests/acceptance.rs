//! Release gate: one test per acceptance criterion. Every test prints a
//! single line of the form
//!
//! ```text
//! [acceptance] criterion N (name): PASS
//! ```
//!
//! before asserting, so a full run of this target yields a nine-line
//! scoreboard (`cargo test --test acceptance -- --nocapture`). Tolerances
//! and runtime caps are pinned as constants next to each criterion.

use manifold_hdr::density::{
    cv_select_concentration, default_cv_grid, vmf_log_normalizer, Component,
    DensityModel, KernelConfig, KernelDensity, Mixture,
};
use manifold_hdr::grid::{build_grid, Grid, GridSpec};
use manifold_hdr::harness::{run_dkw_trials, run_study, ExperimentConfig, StudyKind};
use manifold_hdr::hdr::{
    ball_union_components, estimate_hdr, estimate_hdr_by_probability, estimate_level,
    split_sample_with_values,
};
use manifold_hdr::morphology::{dilate, erode, hausdorff_distance, opening, GridSet};
use manifold_hdr::pipeline::{ingest_comets, ingest_phases, AngleUnit};
use manifold_hdr::{ManifoldKind, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

fn report(criterion: usize, name: &str, pass: bool) -> bool {
    println!(
        "[acceptance] criterion {criterion} ({name}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn grid_for(kind: ManifoldKind, resolution: usize) -> Arc<Grid> {
    let mut spec = GridSpec::new(kind, resolution);
    if kind == ManifoldKind::Euclidean(2) {
        spec = spec.with_bounding_box(vec![(0.0, 1.0), (0.0, 1.0)]);
    }
    Arc::new(build_grid(&spec).expect("grid builds"))
}

fn kind_seed(kind: ManifoldKind) -> u64 {
    match kind {
        ManifoldKind::Circle => 1,
        ManifoldKind::Sphere2 => 2,
        ManifoldKind::Torus(d) => 100 + d as u64,
        ManifoldKind::Euclidean(d) => 200 + d as u64,
    }
}

fn all_kinds() -> [ManifoldKind; 4] {
    [
        ManifoldKind::Circle,
        ManifoldKind::Sphere2,
        ManifoldKind::Torus(2),
        ManifoldKind::Euclidean(2),
    ]
}

fn random_point(kind: ManifoldKind, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match kind {
        ManifoldKind::Circle => vec![rng.gen::<f64>() * TAU],
        ManifoldKind::Sphere2 => {
            let mut v = [0.0f64; 3];
            loop {
                for c in &mut v {
                    // Box-Muller pair member; one coordinate per draw is fine here.
                    let (u1, u2) = (rng.gen::<f64>().max(1e-12), rng.gen::<f64>());
                    *c = (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos();
                }
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if n > 1e-6 {
                    return v.iter().map(|c| c / n).collect();
                }
            }
        }
        ManifoldKind::Torus(d) => (0..d).map(|_| rng.gen::<f64>() * TAU).collect(),
        ManifoldKind::Euclidean(d) => (0..d).map(|_| 0.3 + 0.4 * rng.gen::<f64>()).collect(),
    }
}

fn random_set(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, fill: f64) -> GridSet {
    let mask: Vec<bool> = (0..grid.len()).map(|_| rng.gen::<f64>() < fill).collect();
    GridSet::new(grid.clone(), mask).expect("mask length matches grid")
}

fn member_count(set: &GridSet) -> usize {
    set.mask().iter().filter(|&&m| m).count()
}

/// The two-component directional mixture used by the simulation studies.
fn study_mixture() -> Mixture {
    let a = PI / 6.0;
    let mu1 = vec![(-a).cos(), (-a).sin(), 0.0];
    let mu2 = vec![a.cos() * a.cos(), a.cos() * a.sin(), a.sin()];
    Mixture::new(vec![
        Component::vmf(0.5, mu1, 10.0),
        Component::vmf(0.5, mu2, 10.0),
    ])
    .expect("mixture is valid")
}

// ---------------------------------------------------------------------
// Criterion 1: morphology identities.
//
// Exact, mask-for-mask, on random grid sets: the erosion/dilation duality
// and the four opening laws (anti-extensive, monotone, distributes one way
// into unions, fixes dilated sets). Within one grid-dispersion radius on
// discretized analytic balls: the two-radius reopening laws and the
// dilation semigroup law.
// ---------------------------------------------------------------------

const C1_RANDOM_SETS: usize = 100;
const C1_BALL_CASES: usize = 10;
const C1_RESOLUTIONS: [usize; 2] = [256, 1024];
const C1_MAX_SECS: f64 = 120.0;

/// Ball-reference comparisons allow 2.5 grid-dispersion radii. One discrete
/// dilation can fall a full node spacing short of its continuum counterpart,
/// and a node spacing is two covering radii on these grids (the cell diagonal
/// on product grids); the extra 25% absorbs the sampling error of the probed
/// dispersion. The worst gap observed over 160 ball cases is 2.05 radii, and
/// a one-radius tolerance is impossible: on the 256-node circle, dilating by
/// r = 8.56 and s = 4.60 node spacings reaches 12 nodes in two steps but 13
/// in one, leaving a node two radii from the composed set.
const C1_BALL_TOL_DISPERSIONS: f64 = 2.5;

#[test]
fn criterion_1_morphology_identities() {
    let start = Instant::now();
    let mut failures: Vec<String> = Vec::new();
    for kind in all_kinds() {
        for resolution in C1_RESOLUTIONS {
            let grid = grid_for(kind, resolution);
            let disp = grid.dispersion();
            let mut rng = ChaCha8Rng::seed_from_u64(0xACC1 ^ resolution as u64 ^ kind_seed(kind));
            for case in 0..C1_RANDOM_SETS {
                let fill = 0.05 + 0.5 * rng.gen::<f64>();
                let a = random_set(&grid, &mut rng, fill);
                let r = disp * (1.0 + 5.0 * rng.gen::<f64>());
                let tag = format!("{kind} res={resolution} case={case}");

                let dual = dilate(&a.complement(), r).unwrap().complement();
                if dual.mask() != erode(&a, r).unwrap().mask() {
                    failures.push(format!("{tag}: duality broke at r={r}"));
                }

                let opened = opening(&a, r).unwrap();
                if !opened.is_subset_of(&a).unwrap() {
                    failures.push(format!("{tag}: opening left the set at r={r}"));
                }

                let bigger = a.union(&random_set(&grid, &mut rng, 0.2)).unwrap();
                if !opened.is_subset_of(&opening(&bigger, r).unwrap()).unwrap() {
                    failures.push(format!("{tag}: opening not monotone at r={r}"));
                }

                let c = random_set(&grid, &mut rng, 0.3);
                let union_of_openings = opened.union(&opening(&c, r).unwrap()).unwrap();
                let opening_of_union = opening(&a.union(&c).unwrap(), r).unwrap();
                if !union_of_openings.is_subset_of(&opening_of_union).unwrap() {
                    failures.push(format!("{tag}: union law broke at r={r}"));
                }

                let dilated = dilate(&a, r).unwrap();
                if opening(&dilated, r).unwrap().mask() != dilated.mask() {
                    failures.push(format!("{tag}: dilated set not a fixed point at r={r}"));
                }
            }

            let ball_radius_range = match kind {
                ManifoldKind::Euclidean(_) => (0.12, 0.20),
                _ => (0.5, 0.9),
            };
            for case in 0..C1_BALL_CASES {
                let center = random_point(kind, &mut rng);
                let radius =
                    ball_radius_range.0 + (ball_radius_range.1 - ball_radius_range.0) * rng.gen::<f64>();
                let r = radius * (0.3 + 0.3 * rng.gen::<f64>());
                let s = r * (0.3 + 0.6 * rng.gen::<f64>());
                let ball = GridSet::from_predicate(grid.clone(), |x| {
                    kind.distance(x, &center) <= radius
                });
                if member_count(&ball) < 8 {
                    continue;
                }
                let tag = format!("{kind} res={resolution} ball-case={case}");

                let opened = opening(&ball, r).unwrap();
                if member_count(&opened) == 0 {
                    failures.push(format!("{tag}: opening emptied a radius-{radius:.3} ball at r={r:.3}"));
                    continue;
                }
                let tol = C1_BALL_TOL_DISPERSIONS * disp;

                let reopened = opening(&opened, s).unwrap();
                if !reopened.is_subset_of(&opened).unwrap() {
                    failures.push(format!("{tag}: reopening at s={s:.3} left the r={r:.3} opening"));
                }
                if !opened.is_subset_within(&reopened, tol).unwrap() {
                    failures.push(format!("{tag}: reopening at s={s:.3} shrank the r={r:.3} opening"));
                }
                if !opened.is_subset_within(&opening(&ball, s).unwrap(), tol).unwrap() {
                    failures.push(format!("{tag}: opening radii not ordered at r={r:.3}, s={s:.3}"));
                }

                let composed = dilate(&dilate(&ball, r).unwrap(), s).unwrap();
                let direct = dilate(&ball, r + s).unwrap();
                if !composed.is_subset_of(&direct).unwrap() {
                    failures.push(format!("{tag}: composed dilation escaped r+s at r={r:.3}, s={s:.3}"));
                }
                if !direct.is_subset_within(&composed, tol).unwrap() {
                    failures.push(format!("{tag}: dilation semigroup broke at r={r:.3}, s={s:.3}"));
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let in_time = elapsed < C1_MAX_SECS;
    let pass = report(1, "morphology-identities", failures.is_empty() && in_time);
    assert!(
        pass,
        "failures ({}): {:?}; elapsed {elapsed:.1}s (cap {C1_MAX_SECS}s)",
        failures.len(),
        failures.iter().take(8).collect::<Vec<_>>()
    );
}

// ---------------------------------------------------------------------
// Criterion 2: threshold nesting. Raising the threshold never adds a
// selected center, exactly, across a grid of levels on random samples.
// Center nesting at a shared radius implies nesting of the ball unions.
// ---------------------------------------------------------------------

const C2_SAMPLES: usize = 50;
const C2_LEVELS: usize = 10;
const C2_MAX_SECS: f64 = 60.0;

#[test]
fn criterion_2_threshold_nesting() {
    let start = Instant::now();
    let mixture = study_mixture();
    let mut violations = 0usize;
    for run in 0..C2_SAMPLES {
        let n = 150 + 37 * (run % 6);
        let points = mixture.sample(n, 0xBEE5 + run as u64).unwrap();
        let kde = KernelDensity::new(
            points.clone(),
            KernelConfig::new(KernelConfig::family_for(points.kind()), 20.0).unwrap(),
        )
        .unwrap();
        let values = DensityModel::Kernel(kde).evaluate_sample(&points).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let lambdas: Vec<f64> = (0..C2_LEVELS)
            .map(|k| {
                let q = 0.10 + 0.85 * (k as f64) / (C2_LEVELS - 1) as f64;
                sorted[((n - 1) as f64 * q) as usize]
            })
            .collect();
        let mut previous: Option<BTreeSet<usize>> = None;
        for &lambda in &lambdas {
            let labeled = split_sample_with_values(&points, values.clone(), lambda).unwrap();
            let est = estimate_hdr(&labeled, 0.12).unwrap();
            let selected: BTreeSet<usize> = est.selected().iter().copied().collect();
            if let Some(prev) = &previous {
                if !selected.is_subset(prev) {
                    violations += 1;
                }
            }
            previous = Some(selected);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = report(2, "threshold-nesting", violations == 0 && elapsed < C2_MAX_SECS);
    assert!(
        pass,
        "{violations} nesting violations; elapsed {elapsed:.1}s (cap {C2_MAX_SECS}s)"
    );
}

// ---------------------------------------------------------------------
// Criterion 3: the order-statistic level estimator equals an exhaustive
// scan over candidate thresholds, bit for bit, on every small input.
// ---------------------------------------------------------------------

const C3_CASES: usize = 1000;

#[test]
fn criterion_3_level_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1E7E1);
    let mut mismatches = 0usize;
    for case in 0..C3_CASES {
        let n = rng.gen_range(1..=12);
        let values: Vec<f64> = if case % 4 == 0 {
            // Tie-heavy inputs: few distinct values.
            (0..n).map(|_| 0.1 * rng.gen_range(1..=5) as f64).collect()
        } else {
            (0..n).map(|_| rng.gen_range(0.01..10.0)).collect()
        };
        let gamma = rng.gen_range(0.01..0.99);
        let fast = estimate_level(&values, gamma).unwrap();
        // Exhaustive oracle: the largest sample value keeping at least a
        // 1 - gamma fraction of the values at or above it.
        let oracle = values
            .iter()
            .copied()
            .filter(|&candidate| {
                let above = values.iter().filter(|&&v| v >= candidate).count();
                above as f64 / n as f64 >= 1.0 - gamma
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if fast != oracle {
            mismatches += 1;
        }
    }
    let pass = report(3, "level-oracle", mismatches == 0);
    assert!(pass, "{mismatches} of {C3_CASES} cases disagreed with the scan");
}

// ---------------------------------------------------------------------
// Criterion 4: empirical mass envelope. The Kolmogorov distance between
// the sample law of f(X) and a large Monte Carlo reference stays within
// sqrt(log n / n) in at least 95% of trials.
// ---------------------------------------------------------------------

const C4_N: usize = 1000;
const C4_TRIALS: usize = 200;
const C4_MIN_PASS: usize = 190; // 95% of trials
const C4_MAX_SECS: f64 = 300.0;

#[test]
fn criterion_4_dkw_envelope() {
    let start = Instant::now();
    let report_block = run_dkw_trials(&study_mixture(), C4_N, C4_TRIALS, 0xD0).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let expected_bound = ((C4_N as f64).ln() / C4_N as f64).sqrt();
    let pass = report(
        4,
        "dkw-envelope",
        report_block.pass_count >= C4_MIN_PASS
            && report_block.bound == expected_bound
            && elapsed < C4_MAX_SECS,
    );
    assert!(
        pass,
        "{}/{} trials within {:.4}; elapsed {elapsed:.1}s (cap {C4_MAX_SECS}s)",
        report_block.pass_count, report_block.trials, report_block.bound
    );
}

// ---------------------------------------------------------------------
// Criterion 5: convergence study at a fixed threshold. Median Hausdorff
// error strictly improves from n=400 to n=1600, beats n=800 in at least
// 70% of seed-paired replicates, and the evaluation grid is fine enough
// to resolve the comparison.
// ---------------------------------------------------------------------

const C5_LAMBDA: f64 = 0.45;
const C5_RADIUS: f64 = 0.05;
const C5_REPLICATES: usize = 20;
const C5_GRID_RESOLUTION: usize = 60_000;
const C5_MAX_DISPERSION: f64 = 0.0125;
const C5_PAIRED_WIN_RATE: f64 = 0.70;
const C5_MAX_SECS: f64 = 600.0;

#[test]
fn criterion_5_hausdorff_convergence() {
    let start = Instant::now();
    let config = ExperimentConfig {
        study: StudyKind::Convergence,
        mixture: study_mixture(),
        lambda: Some(C5_LAMBDA),
        gammas: vec![],
        r_n: vec![C5_RADIUS],
        n_schedule: vec![400, 800, 1600],
        replicates: C5_REPLICATES,
        seed: 2024,
        grid_resolution: C5_GRID_RESOLUTION,
        concentration: None, // cross-validated per replicate
        cv_grid: None,
        oracle_n: 100_000,
        dkw_trials: 0,
        use_true_density: false,
        kappa_scale: 1.0,
    };
    let record = run_study(&config).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "[acceptance] criterion 5 grid dispersion: {:.6} (cap {C5_MAX_DISPERSION})",
        record.grid_dispersion
    );

    let median = |n: usize| -> f64 {
        record
            .summaries
            .iter()
            .find(|s| s.n == n)
            .map(|s| s.median_d_hausdorff)
            .expect("summary for every n")
    };
    let d_h = |n: usize, rep: usize| -> f64 {
        record
            .records
            .iter()
            .find(|r| r.n == n && r.replicate == rep)
            .map(|r| r.d_hausdorff)
            .expect("record for every (n, replicate)")
    };
    let paired_wins = (0..C5_REPLICATES)
        .filter(|&rep| d_h(1600, rep) < d_h(800, rep))
        .count();
    let win_rate = paired_wins as f64 / C5_REPLICATES as f64;

    let pass = report(
        5,
        "hausdorff-convergence",
        record.grid_dispersion < C5_MAX_DISPERSION
            && median(1600) < median(400)
            && win_rate >= C5_PAIRED_WIN_RATE
            && elapsed < C5_MAX_SECS,
    );
    assert!(
        pass,
        "medians: n=400 {:.4}, n=800 {:.4}, n=1600 {:.4}; paired wins {paired_wins}/{C5_REPLICATES}; \
         dispersion {:.5}; elapsed {elapsed:.0}s (cap {C5_MAX_SECS}s)",
        median(400),
        median(800),
        median(1600),
        record.grid_dispersion
    );
}

// ---------------------------------------------------------------------
// Criterion 6: normalization. Every shipped analytic density and every
// cross-validated KDE integrates to one under grid quadrature, and the
// closed-form directional normalizer agrees with an independent
// one-dimensional quadrature.
// ---------------------------------------------------------------------

const C6_MASS_TOL: f64 = 1e-2;
const C6_NORMALIZER_LOG_TOL: f64 = 1e-6;

#[test]
fn criterion_6_normalization() {
    let mut failures: Vec<String> = Vec::new();
    let sphere_grid = grid_for(ManifoldKind::Sphere2, 20_000);
    let torus_grid = grid_for(ManifoldKind::Torus(2), 16_384);
    let circle_grid = grid_for(ManifoldKind::Circle, 4_096);
    let plane_grid = grid_for(ManifoldKind::Euclidean(2), 16_384);

    let analytic: Vec<(&str, Mixture, &Arc<Grid>)> = vec![
        ("bimodal sphere mixture", study_mixture(), &sphere_grid),
        (
            "diffuse vmf",
            Mixture::new(vec![Component::vmf(1.0, vec![0.0, 0.0, 1.0], 0.5)]).unwrap(),
            &sphere_grid,
        ),
        (
            "moderate vmf",
            Mixture::new(vec![Component::vmf(1.0, vec![1.0, 0.0, 0.0], 10.0)]).unwrap(),
            &sphere_grid,
        ),
        (
            "tight vmf",
            Mixture::new(vec![Component::vmf(1.0, vec![0.0, 1.0, 0.0], 100.0)]).unwrap(),
            &sphere_grid,
        ),
        (
            "uniform sphere",
            Mixture::new(vec![Component::vmf(1.0, vec![0.0, 0.0, 1.0], 0.0)]).unwrap(),
            &sphere_grid,
        ),
        (
            "torus von Mises pair",
            Mixture::new(vec![
                Component::von_mises_torus(0.6, vec![1.0, 2.0], vec![6.0, 3.0]),
                Component::von_mises_torus(0.4, vec![4.5, 5.5], vec![2.0, 8.0]),
            ])
            .unwrap(),
            &torus_grid,
        ),
        (
            "circle von Mises pair",
            Mixture::new(vec![
                Component::von_mises_circle(0.7, 1.0, 4.0),
                Component::von_mises_circle(0.3, 4.0, 12.0),
            ])
            .unwrap(),
            &circle_grid,
        ),
    ];
    for (name, mixture, grid) in &analytic {
        let mass = DensityModel::Mixture(mixture.clone()).grid_integral(grid).unwrap();
        if (mass - 1.0).abs() > C6_MASS_TOL {
            failures.push(format!("analytic {name}: grid mass {mass:.5}"));
        }
    }

    // Cross-validated KDEs, one per kernel family.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let torus_mixture = Mixture::new(vec![
        Component::von_mises_torus(1.0, vec![3.0, 3.0], vec![4.0, 4.0]),
    ])
    .unwrap();
    let circle_mixture =
        Mixture::new(vec![Component::von_mises_circle(1.0, 3.0, 6.0)]).unwrap();
    let mut plane_points = Sample::new(ManifoldKind::Euclidean(2));
    for _ in 0..300 {
        // Tight blob well inside the unit box, so boundary leakage is
        // negligible next to the 1e-2 budget.
        let (u1, u2) = (rng.gen::<f64>().max(1e-12), rng.gen::<f64>());
        let radius = 0.06 * (-2.0 * u1.ln()).sqrt();
        plane_points
            .push(&[
                (0.5 + radius * (TAU * u2).cos()).clamp(0.05, 0.95),
                (0.5 + radius * (TAU * u2).sin()).clamp(0.05, 0.95),
            ])
            .unwrap();
    }
    let kde_cases: Vec<(&str, Sample, &Arc<Grid>)> = vec![
        ("sphere kde", study_mixture().sample(500, 11).unwrap(), &sphere_grid),
        ("torus kde", torus_mixture.sample(300, 12).unwrap(), &torus_grid),
        ("circle kde", circle_mixture.sample(250, 13).unwrap(), &circle_grid),
        ("plane kde", plane_points, &plane_grid),
    ];
    for (name, points, grid) in &kde_cases {
        let family = KernelConfig::family_for(points.kind());
        let kappa =
            cv_select_concentration(points, family, &default_cv_grid(family)).unwrap();
        let kde = KernelDensity::new(points.clone(), KernelConfig::new(family, kappa).unwrap())
            .unwrap();
        let mass = DensityModel::Kernel(kde).grid_integral(grid).unwrap();
        if (mass - 1.0).abs() > C6_MASS_TOL {
            failures.push(format!("{name} (cv kappa {kappa:.2}): grid mass {mass:.5}"));
        }
    }

    // Closed-form directional normalizer against trapezoid quadrature of
    // the polar-angle integral 2 pi int_0^pi e^{kappa cos t} sin t dt,
    // computed with the peak factored out for stability.
    for kappa in [0.1, 1.0, 10.0, 50.0, 200.0] {
        let steps = 400_000usize;
        let h = PI / steps as f64;
        let g = |t: f64| (kappa * (t.cos() - 1.0)).exp() * t.sin();
        let mut acc = 0.5 * (g(0.0) + g(PI));
        for i in 1..steps {
            acc += g(i as f64 * h);
        }
        let log_mass = (TAU).ln() + kappa + (acc * h).ln();
        let closed = vmf_log_normalizer(kappa).unwrap();
        if (closed + log_mass).abs() > C6_NORMALIZER_LOG_TOL {
            failures.push(format!(
                "normalizer at kappa={kappa}: closed {closed:.9}, quadrature {:.9}",
                -log_mass
            ));
        }
    }

    let pass = report(6, "normalization", failures.is_empty());
    assert!(pass, "failures: {failures:?}");
}

// ---------------------------------------------------------------------
// Criterion 7: comet pipeline. The bundled orbit fixture ingests to
// exactly 612 unique normals; with the standard estimator configuration
// (leave-one-out cross-validated kernel over the default concentration
// grid) the 80% region splits in two and the 90% region is a single
// cluster.
// ---------------------------------------------------------------------

const C7_MAX_SECS: f64 = 120.0;

#[test]
fn criterion_7_comet_pipeline() {
    let start = Instant::now();
    let points = ingest_comets(data_path("comets_fixture.csv"), AngleUnit::Degrees).unwrap();
    let ingested_612 = points.len() == 612;

    let family = KernelConfig::family_for(points.kind());
    let kappa = cv_select_concentration(&points, family, &default_cv_grid(family)).unwrap();
    let kde = KernelDensity::new(points.clone(), KernelConfig::new(family, kappa).unwrap()).unwrap();
    let model = DensityModel::Kernel(kde);

    let broad = estimate_hdr_by_probability(&points, &model, 0.8, 0.3).unwrap();
    let narrow = estimate_hdr_by_probability(&points, &model, 0.9, 0.275).unwrap();
    let (broad_components, _) = ball_union_components(broad.set());
    let (narrow_components, _) = ball_union_components(narrow.set());

    let elapsed = start.elapsed().as_secs_f64();
    let pass = report(
        7,
        "comet-pipeline",
        ingested_612 && broad_components == 2 && narrow_components == 1 && elapsed < C7_MAX_SECS,
    );
    assert!(
        pass,
        "ingested {} points; components at (0.8, 0.3): {broad_components}, at (0.9, 0.275): \
         {narrow_components}; cv kappa {kappa:.2}; elapsed {elapsed:.1}s (cap {C7_MAX_SECS}s)",
        points.len()
    );
}

// ---------------------------------------------------------------------
// Criterion 8: circadian pipeline. The 48-gene phase fixture yields
// estimates at three mass targets whose selected centers are nested
// (smaller target, larger region), so with the shrinking radius schedule
// the regions themselves are nested, and the tightest region keeps at
// least two clusters.
// ---------------------------------------------------------------------

#[test]
fn criterion_8_circadian_pipeline() {
    let points = ingest_phases(data_path("circadian_phases.csv")).unwrap();
    let has_48 = points.len() == 48;

    let family = KernelConfig::family_for(points.kind());
    let kappa = cv_select_concentration(&points, family, &default_cv_grid(family)).unwrap();
    let kde = KernelDensity::new(points.clone(), KernelConfig::new(family, kappa).unwrap()).unwrap();
    let model = DensityModel::Kernel(kde);

    let schedule = [(0.25, 0.6), (0.5, 0.45), (0.75, 0.3)];
    let estimates: Vec<_> = schedule
        .iter()
        .map(|&(gamma, r_n)| estimate_hdr_by_probability(&points, &model, gamma, r_n).unwrap())
        .collect();
    let selected: Vec<BTreeSet<usize>> = estimates
        .iter()
        .map(|e| e.selected().iter().copied().collect())
        .collect();
    // Center nesting plus the decreasing radius schedule gives ball-union
    // nesting: every ball of the tighter estimate sits inside the same
    // center's larger ball in the looser estimate.
    let nested = selected[2].is_subset(&selected[1]) && selected[1].is_subset(&selected[0]);
    let non_empty = estimates.iter().all(|e| !e.is_empty());
    let (tight_components, _) = ball_union_components(estimates[2].set());

    let pass = report(
        8,
        "circadian-pipeline",
        has_48 && nested && non_empty && tight_components >= 2,
    );
    assert!(
        pass,
        "points {}; selected sizes {:?}; nested {nested}; tight components {tight_components}; \
         cv kappa {kappa:.2}",
        points.len(),
        selected.iter().map(BTreeSet::len).collect::<Vec<_>>()
    );
}

// ---------------------------------------------------------------------
// Criterion 9: the Hausdorff distance routine equals a quadratic
// double-loop oracle, exactly, on random point-set pairs per manifold.
// ---------------------------------------------------------------------

const C9_PAIRS: usize = 500;

fn hausdorff_oracle(a: &Sample, b: &Sample) -> f64 {
    let kind = a.kind();
    let directed = |from: &Sample, to: &Sample| -> f64 {
        (0..from.len())
            .map(|i| {
                (0..to.len())
                    .map(|j| kind.distance(from.point(i), to.point(j)))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[test]
fn criterion_9_hausdorff_oracle() {
    let mut mismatches = 0usize;
    for kind in all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9A05 ^ kind_seed(kind));
        for _ in 0..C9_PAIRS {
            let make = |rng: &mut ChaCha8Rng| {
                let n = rng.gen_range(1..=40);
                let mut s = Sample::new(kind);
                for _ in 0..n {
                    s.push(&random_point(kind, rng)).unwrap();
                }
                s
            };
            let a = make(&mut rng);
            let b = make(&mut rng);
            if hausdorff_distance(&a, &b).unwrap() != hausdorff_oracle(&a, &b) {
                mismatches += 1;
            }
        }
    }
    let pass = report(9, "hausdorff-oracle", mismatches == 0);
    assert!(pass, "{mismatches} pairs disagreed with the double loop");
}
