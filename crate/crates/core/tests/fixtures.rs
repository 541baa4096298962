//! Bundled data files and their deterministic generators.
//!
//! The two CSVs under `data/` are synthetic stand-ins shaped like the real
//! catalogs they imitate: a long-period comet orbit extract (inclination and
//! ascending node, degrees) and a 48-gene circadian phase table (paired organ
//! phases, hours). Live catalog pulls change with every database snapshot, so
//! the repository pins files with known cluster structure instead. The
//! `regenerate_*` tests rewrite them in place when run with `--ignored`; the
//! checked-in bytes must always match the generators below.

use manifold_hdr::pipeline::{ingest_comets, ingest_phases, AngleUnit};
use manifold_hdr::ManifoldKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

const GOLDEN_ANGLE: f64 = 2.399963229728653;

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

/// Sunflower layout: `n` points spiraling out to angular `radius` around the
/// north pole, then rotated so the pole lands at polar angle `theta0`,
/// azimuth `phi0`. Radial exponent `p` = 0.5 spaces points uniformly per
/// area; smaller `p` loads the rim.
fn sunflower_cap(
    n: usize,
    radius: f64,
    p: f64,
    theta0: f64,
    phi0: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(n);
    for k in 0..n {
        let frac = (k as f64 + 0.5) / n as f64;
        let jit = 1.0 + 0.03 * (rng.gen::<f64>() - 0.5);
        let theta = radius * frac.powf(p) * jit;
        let phi = k as f64 * GOLDEN_ANGLE + 0.1 * (rng.gen::<f64>() - 0.5);
        let q = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let (ct, st) = (theta0.cos(), theta0.sin());
        let r = [ct * q[0] + st * q[2], q[1], -st * q[0] + ct * q[2]];
        pts.push([
            phi0.cos() * r[0] - phi0.sin() * r[1],
            phi0.sin() * r[0] + phi0.cos() * r[1],
            r[2],
        ]);
    }
    pts
}

/// Unit normal to (inclination, node) in degrees, rounded to two decimals
/// the way the file stores them. The node wraps 360.00 back to 0.
fn normal_to_angles(v: &[f64; 3]) -> (f64, f64) {
    let i = (v[2].clamp(-1.0, 1.0).acos().to_degrees() * 100.0).round() / 100.0;
    let mut om = (v[0].atan2(-v[1]).to_degrees().rem_euclid(360.0) * 100.0).round() / 100.0;
    if om >= 360.0 {
        om = 0.0;
    }
    (i, om)
}

/// The comet fixture: 612 unique (i, om) rows in degrees. Two dense orbit
/// families sit inside empty annular buffers, one around the ecliptic pole
/// and one retrograde, over a near-uniform background of 489 sporadic
/// orbits laid out on a jittered Fibonacci lattice.
fn comet_rows() -> Vec<(f64, f64)> {
    const R_A: f64 = 0.15;
    const R_B: f64 = 0.38;
    const THETA_B: f64 = 2.4;
    const PHI_B: f64 = 1.0;
    const BUFFER: f64 = 0.38;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pts: Vec<[f64; 3]> = Vec::new();
    pts.extend(sunflower_cap(62, R_A, 0.5, 0.0, 0.0, &mut rng));
    pts.extend(sunflower_cap(61, R_B, 0.4, THETA_B, PHI_B, &mut rng));
    let mu_b = [
        THETA_B.sin() * PHI_B.cos(),
        THETA_B.sin() * PHI_B.sin(),
        THETA_B.cos(),
    ];
    let mut seen = std::collections::BTreeSet::new();
    for p in &pts {
        let (i, om) = normal_to_angles(p);
        seen.insert(((i * 100.0).round() as i64, (om * 100.0).round() as i64));
    }
    let clear = |v: &[f64; 3]| {
        let d_a = v[2].clamp(-1.0, 1.0).acos();
        let d_b = ManifoldKind::Sphere2.distance(v, &mu_b);
        d_a >= R_A + BUFFER && d_b >= R_B + BUFFER
    };
    // Fibonacci lattice background, grown until 489 nodes clear the buffers.
    let mut m = 600usize;
    let bg = loop {
        let mut bg: Vec<[f64; 3]> = Vec::new();
        for k in 0..m {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
            let z = (z + 0.004 * (rng.gen::<f64>() - 0.5)).clamp(-1.0, 1.0);
            let phi = k as f64 * GOLDEN_ANGLE + 0.03 * (rng.gen::<f64>() - 0.5);
            let s = (1.0 - z * z).sqrt();
            let v = [s * phi.cos(), s * phi.sin(), z];
            if clear(&v) {
                bg.push(v);
            }
        }
        if bg.len() >= 489 {
            break bg;
        }
        m += 8;
    };
    for j in 0..489 {
        let v = bg[j * bg.len() / 489];
        let (i, om) = normal_to_angles(&v);
        let key = ((i * 100.0).round() as i64, (om * 100.0).round() as i64);
        if seen.insert(key) {
            pts.push(v);
        }
    }
    // Top up losses from two-decimal collisions with rejection draws.
    while pts.len() < 612 {
        let z: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        let phi = rng.gen::<f64>() * TAU;
        let s = (1.0 - z * z).sqrt();
        let v = [s * phi.cos(), s * phi.sin(), z];
        if !clear(&v) {
            continue;
        }
        let (i, om) = normal_to_angles(&v);
        let key = ((i * 100.0).round() as i64, (om * 100.0).round() as i64);
        if seen.insert(key) {
            pts.push(v);
        }
    }
    let mut rows: Vec<(f64, f64)> = pts.iter().map(normal_to_angles).collect();
    // Shuffle so the file does not advertise its construction order.
    for j in (1..rows.len()).rev() {
        rows.swap(j, rng.gen_range(0..=j));
    }
    rows
}

fn comet_csv() -> String {
    let mut out = String::from("designation,i,om\n");
    for (row, (i, om)) in comet_rows().iter().enumerate() {
        out.push_str(&format!("LP-{:04},{:.2},{:.2}\n", row + 1, i, om));
    }
    out
}

const GENES: [&str; 48] = [
    "Per1", "Per2", "Per3", "Cry1", "Cry2", "Arntl", "Clock", "Npas2", "Nr1d1", "Nr1d2", "Rora",
    "Rorb", "Rorc", "Dbp", "Tef", "Hlf", "Ciart", "Bhlhe40", "Bhlhe41", "Csnk1d", "Csnk1e",
    "Fbxl3", "Fbxl21", "Nfil3", "Sirt1", "Ep300", "Crebbp", "Wee1", "Myc", "Ccnd1", "Cdkn1a",
    "Nampt", "Nmnat1", "Ppara", "Ppard", "Pparg", "Atf4", "Atf5", "Xbp1", "Hspa5", "Hspa8",
    "Hsf1", "Gsk3b", "Prkaa1", "Prkaa2", "Ube2g1", "Usp2", "Tob1",
];

/// The circadian fixture: 48 paired organ phases in hours. Each of the two
/// phase groups (early morning and early evening, both near the diagonal)
/// carries a tight 6-gene core plus rings of stragglers at increasing radii,
/// with wide empty gaps between the rings.
fn circadian_rows() -> Vec<(f64, f64)> {
    let h = 24.0 / TAU;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (cx, cy) in [(7.0f64, 8.0f64), (19.0, 20.0)] {
        let mut jit = |s: f64| s * (rng.gen::<f64>() - 0.5);
        for _ in 0..6 {
            rows.push((cx + h * jit(0.1), cy + h * jit(0.1)));
        }
        for t in 0..2 {
            let base = t as f64 * PI + jit(0.3);
            for j in 0..3 {
                let ang = base + (j as f64 - 1.0) * 0.15 / 0.5;
                rows.push((cx + h * 0.5 * ang.cos(), cy + h * 0.5 * ang.sin()));
            }
        }
        for t in 0..3 {
            let base = t as f64 * TAU / 3.0 + 0.5 + jit(0.3);
            for j in 0..2 {
                let ang = base + (j as f64 - 0.5) * 0.2 / 1.1;
                rows.push((cx + h * 1.1 * ang.cos(), cy + h * 1.1 * ang.sin()));
            }
        }
        for t in 0..6 {
            let ang = t as f64 * TAU / 6.0 + 0.26 + jit(0.2);
            rows.push((cx + h * 1.75 * ang.cos(), cy + h * 1.75 * ang.sin()));
        }
    }
    let wrap = |x: f64| {
        let r = (x.rem_euclid(24.0) * 1000.0).round() / 1000.0;
        if r >= 24.0 {
            0.0
        } else {
            r
        }
    };
    let mut rows: Vec<(f64, f64)> = rows.iter().map(|&(a, b)| (wrap(a), wrap(b))).collect();
    for j in (1..rows.len()).rev() {
        rows.swap(j, rng.gen_range(0..=j));
    }
    rows
}

fn circadian_csv() -> String {
    let mut out = String::from("gene,heart,liver\n");
    for (gene, (a, b)) in GENES.iter().zip(circadian_rows()) {
        out.push_str(&format!("{gene},{a:.3},{b:.3}\n"));
    }
    out
}

#[test]
fn comet_file_matches_its_generator() {
    let want = comet_csv();
    let have = std::fs::read_to_string(data_path("comets_fixture.csv")).unwrap();
    assert_eq!(have, want, "data/comets_fixture.csv drifted from its generator");
}

#[test]
fn circadian_file_matches_its_generator() {
    let want = circadian_csv();
    let have = std::fs::read_to_string(data_path("circadian_phases.csv")).unwrap();
    assert_eq!(have, want, "data/circadian_phases.csv drifted from its generator");
}

#[test]
fn comet_file_ingests_to_612_unique_orbits() {
    let sample = ingest_comets(data_path("comets_fixture.csv"), AngleUnit::Degrees).unwrap();
    assert_eq!(sample.len(), 612);
    assert_eq!(sample.kind(), ManifoldKind::Sphere2);
}

#[test]
fn circadian_file_ingests_to_48_phase_pairs() {
    let sample = ingest_phases(data_path("circadian_phases.csv")).unwrap();
    assert_eq!(sample.len(), 48);
    assert_eq!(sample.kind(), ManifoldKind::Torus(2));
}

#[test]
#[ignore = "rewrites data/comets_fixture.csv"]
fn regenerate_comet_fixture() {
    std::fs::write(data_path("comets_fixture.csv"), comet_csv()).unwrap();
}

#[test]
#[ignore = "rewrites data/circadian_phases.csv"]
fn regenerate_circadian_fixture() {
    std::fs::write(data_path("circadian_phases.csv"), circadian_csv()).unwrap();
}
