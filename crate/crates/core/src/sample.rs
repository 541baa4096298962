//! Seeded random sampling on the supported manifolds.
//!
//! All samplers consume an explicit RNG or a `u64` seed and are bitwise
//! reproducible. The von Mises-Fisher sampler uses tangent-normal
//! decomposition with a rejection step for the cosine of the polar angle
//! (Wood's method); the circular von Mises sampler uses Best-Fisher
//! rejection from a wrapped Cauchy envelope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, ManifoldPoint, Sample, TAU};

/// Below this concentration the von Mises envelope parameters lose all
/// precision to cancellation; the distribution is within O(kappa) total
/// variation of uniform, so draw uniformly instead.
const VON_MISES_UNIFORM_CUTOFF: f64 = 1e-6;

/// Uniform samples on the manifold. Euclidean space is unbounded, so a
/// bounding box is required there and ignored elsewhere.
pub fn sample_uniform(
    kind: ManifoldKind,
    bounding_box: Option<&[(f64, f64)]>,
    n: usize,
    seed: u64,
) -> Result<Sample> {
    if let ManifoldKind::Euclidean(d) = kind {
        let bbox = bounding_box
            .ok_or_else(|| Error::config("uniform euclidean sampling needs a bounding box"))?;
        if bbox.len() != d {
            return Err(Error::config("bounding box dimension mismatch"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Sample::with_capacity(kind, n);
    let mut buf = vec![0.0; kind.ambient_dim()];
    for _ in 0..n {
        uniform_coords(kind, bounding_box, &mut rng, &mut buf);
        out.push_canonical(&buf);
    }
    Ok(out)
}

/// Fills `out` with one uniform draw. Internal: callers validate the
/// bounding box up front.
pub(crate) fn uniform_coords<R: Rng>(
    kind: ManifoldKind,
    bounding_box: Option<&[(f64, f64)]>,
    rng: &mut R,
    out: &mut [f64],
) {
    match kind {
        ManifoldKind::Circle => out[0] = TAU * rng.gen::<f64>(),
        ManifoldKind::Torus(d) => {
            for slot in out.iter_mut().take(d) {
                *slot = TAU * rng.gen::<f64>();
            }
        }
        ManifoldKind::Sphere2 => {
            let z = 2.0 * rng.gen::<f64>() - 1.0;
            let phi = TAU * rng.gen::<f64>();
            let r = (1.0 - z * z).max(0.0).sqrt();
            out[0] = r * phi.cos();
            out[1] = r * phi.sin();
            out[2] = z;
        }
        ManifoldKind::Euclidean(d) => {
            let bbox = bounding_box.expect("euclidean bounding box checked by caller");
            for k in 0..d {
                let (lo, hi) = bbox[k];
                out[k] = lo + (hi - lo) * rng.gen::<f64>();
            }
        }
    }
}

/// Draws `n` points from the von Mises-Fisher distribution on the sphere
/// with mode `mu` and concentration `kappa`; `kappa = 0` is uniform.
pub fn sample_vmf(mu: &ManifoldPoint, kappa: f64, n: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_vmf_with(mu, kappa, n, &mut rng)
}

/// As [`sample_vmf`] but drawing from a caller-owned generator, so mixtures
/// can interleave component draws on one stream.
pub fn sample_vmf_with<R: Rng>(
    mu: &ManifoldPoint,
    kappa: f64,
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    if mu.kind() != ManifoldKind::Sphere2 {
        return Err(Error::domain("vMF sampling is defined on the sphere"));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::domain("vMF concentration must be finite and >= 0"));
    }
    let m = [mu.coords()[0], mu.coords()[1], mu.coords()[2]];
    let (e1, e2) = orthonormal_basis(&m);
    // Envelope constants; b is algebraically -kappa + sqrt(kappa^2 + 1),
    // written to avoid cancellation at large kappa.
    let b = 1.0 / (kappa + (kappa * kappa + 1.0).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + 2.0 * (1.0 - x0 * x0).ln();
    let mut out = Sample::with_capacity(ManifoldKind::Sphere2, n);
    for _ in 0..n {
        let w = loop {
            let z: f64 = rng.gen();
            let u: f64 = rng.gen();
            let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
            if kappa * w + 2.0 * (1.0 - x0 * w).ln() - c >= u.ln() {
                break w;
            }
        };
        let phi = TAU * rng.gen::<f64>();
        let t = (1.0 - w * w).max(0.0).sqrt();
        let (cp, sp) = (phi.cos(), phi.sin());
        let p = [
            w * m[0] + t * (cp * e1[0] + sp * e2[0]),
            w * m[1] + t * (cp * e1[1] + sp * e2[1]),
            w * m[2] + t * (cp * e1[2] + sp * e2[2]),
        ];
        out.push_canonical(&p);
    }
    Ok(out)
}

/// Draws `n` points on the d-torus with independent von Mises coordinates.
pub fn sample_von_mises_torus(mus: &[f64], kappas: &[f64], n: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_von_mises_torus_with(mus, kappas, n, &mut rng)
}

/// As [`sample_von_mises_torus`] with a caller-owned generator.
pub fn sample_von_mises_torus_with<R: Rng>(
    mus: &[f64],
    kappas: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    if mus.is_empty() || mus.len() != kappas.len() {
        return Err(Error::domain(
            "torus von Mises needs matching non-empty mean and concentration tuples",
        ));
    }
    if kappas.iter().any(|k| !(*k >= 0.0 && k.is_finite())) {
        return Err(Error::domain("von Mises concentrations must be finite and >= 0"));
    }
    let d = mus.len();
    let mut out = Sample::with_capacity(ManifoldKind::Torus(d), n);
    let mut buf = vec![0.0; d];
    for _ in 0..n {
        for k in 0..d {
            buf[k] = von_mises_angle(mus[k], kappas[k], rng);
        }
        out.push(&buf)?;
    }
    Ok(out)
}

/// Draws `n` von Mises angles on the circle.
pub fn sample_von_mises_circle(mu: f64, kappa: f64, n: usize, seed: u64) -> Result<Sample> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::domain("von Mises concentration must be finite and >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Sample::with_capacity(ManifoldKind::Circle, n);
    for _ in 0..n {
        out.push(&[von_mises_angle(mu, kappa, &mut rng)])?;
    }
    Ok(out)
}

/// One von Mises draw by Best-Fisher rejection. Callers validate kappa.
pub(crate) fn von_mises_angle<R: Rng>(mu: f64, kappa: f64, rng: &mut R) -> f64 {
    if kappa < VON_MISES_UNIFORM_CUTOFF {
        return TAU * rng.gen::<f64>();
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let z = (std::f64::consts::PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.gen();
            let delta = if u3 < 0.5 { -f.acos() } else { f.acos() };
            return mu + delta;
        }
    }
}

/// Two unit vectors completing `mu` to an orthonormal frame of R^3.
pub(crate) fn orthonormal_basis(mu: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    // Seed with the coordinate axis least aligned with mu.
    let (ax, ay, az) = (mu[0].abs(), mu[1].abs(), mu[2].abs());
    let seed: [f64; 3] = if ax <= ay && ax <= az {
        [1.0, 0.0, 0.0]
    } else if ay <= az {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let dot = seed[0] * mu[0] + seed[1] * mu[1] + seed[2] * mu[2];
    let mut e1 = [seed[0] - dot * mu[0], seed[1] - dot * mu[1], seed[2] - dot * mu[2]];
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for c in &mut e1 {
        *c /= norm;
    }
    let e2 = [
        mu[1] * e1[2] - mu[2] * e1[1],
        mu[2] * e1[0] - mu[0] * e1[2],
        mu[0] * e1[1] - mu[1] * e1[0],
    ];
    (e1, e2)
}
