//! Analytic densities, kernel density estimates, and concentration
//! selection by leave-one-out likelihood cross-validation.
//!
//! All densities evaluate through the log domain and only exponentiate at
//! the boundary, so large concentrations cannot overflow. Normalizing
//! constants come from [`crate::special`], which cross-checks every closed
//! form against quadrature before caching it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::manifold::{ManifoldKind, ManifoldPoint, Sample};
use crate::sample::{sample_vmf_with, von_mises_angle};
use crate::special::logsumexp;
pub use crate::special::{
    gaussian_log_normalizer, vmf_log_normalizer, von_mises_log_normalizer,
};

/// Weight tolerance for mixture validation.
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// One analytic component family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ComponentDist {
    /// von Mises-Fisher on the 2-sphere.
    Vmf { mu: Vec<f64>, kappa: f64 },
    /// Independent von Mises coordinates on the d-torus.
    VonMisesTorus { mus: Vec<f64>, kappas: Vec<f64> },
    /// von Mises on the circle.
    VonMisesCircle { mu: f64, kappa: f64 },
}

impl ComponentDist {
    fn kind(&self) -> ManifoldKind {
        match self {
            ComponentDist::Vmf { .. } => ManifoldKind::Sphere2,
            ComponentDist::VonMisesTorus { mus, .. } => ManifoldKind::Torus(mus.len()),
            ComponentDist::VonMisesCircle { .. } => ManifoldKind::Circle,
        }
    }
}

/// A weighted mixture component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    #[serde(flatten)]
    pub dist: ComponentDist,
}

impl Component {
    pub fn vmf(weight: f64, mu: Vec<f64>, kappa: f64) -> Component {
        Component {
            weight,
            dist: ComponentDist::Vmf { mu, kappa },
        }
    }

    pub fn von_mises_torus(weight: f64, mus: Vec<f64>, kappas: Vec<f64>) -> Component {
        Component {
            weight,
            dist: ComponentDist::VonMisesTorus { mus, kappas },
        }
    }

    pub fn von_mises_circle(weight: f64, mu: f64, kappa: f64) -> Component {
        Component {
            weight,
            dist: ComponentDist::VonMisesCircle { mu, kappa },
        }
    }
}

/// A validated finite mixture on one manifold.
///
/// Construction canonicalizes component locations, checks the weights sum
/// to one, and resolves every normalizing constant through the
/// quadrature-checked cache.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Component>", into = "Vec<Component>")]
pub struct Mixture {
    kind: ManifoldKind,
    components: Vec<Component>,
    /// ln of each component's full normalizing constant (the additive term
    /// of the component's log-density), parallel to `components`.
    log_norms: Vec<f64>,
}

impl Mixture {
    pub fn new(components: Vec<Component>) -> Result<Mixture> {
        if components.is_empty() {
            return Err(Error::config("mixture needs at least one component"));
        }
        let kind = components[0].dist.kind();
        let mut total = 0.0;
        let mut canonical = Vec::with_capacity(components.len());
        let mut log_norms = Vec::with_capacity(components.len());
        for c in components {
            if c.dist.kind() != kind {
                return Err(Error::config("mixture components live on different manifolds"));
            }
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return Err(Error::config("mixture weights must be finite and >= 0"));
            }
            total += c.weight;
            let dist = match c.dist {
                ComponentDist::Vmf { mu, kappa } => {
                    let mu = ManifoldPoint::new(ManifoldKind::Sphere2, mu)?;
                    log_norms.push(vmf_log_normalizer(kappa)?);
                    ComponentDist::Vmf {
                        mu: mu.coords().to_vec(),
                        kappa,
                    }
                }
                ComponentDist::VonMisesTorus { mus, kappas } => {
                    if mus.is_empty() || mus.len() != kappas.len() {
                        return Err(Error::config(
                            "torus component needs matching non-empty mean and kappa tuples",
                        ));
                    }
                    let mus = ManifoldPoint::new(ManifoldKind::Torus(mus.len()), mus)?;
                    let mut ln = 0.0;
                    for &k in &kappas {
                        ln += von_mises_log_normalizer(k)?;
                    }
                    log_norms.push(-ln);
                    ComponentDist::VonMisesTorus {
                        mus: mus.coords().to_vec(),
                        kappas,
                    }
                }
                ComponentDist::VonMisesCircle { mu, kappa } => {
                    let mu = ManifoldPoint::new(ManifoldKind::Circle, vec![mu])?;
                    log_norms.push(-von_mises_log_normalizer(kappa)?);
                    ComponentDist::VonMisesCircle {
                        mu: mu.coords()[0],
                        kappa,
                    }
                }
            };
            canonical.push(Component {
                weight: c.weight,
                dist,
            });
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::config(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Mixture {
            kind,
            components: canonical,
            log_norms,
        })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let mut terms = Vec::with_capacity(self.components.len());
        for (c, &ln_norm) in self.components.iter().zip(&self.log_norms) {
            if c.weight == 0.0 {
                continue;
            }
            let log_kernel = match &c.dist {
                ComponentDist::Vmf { mu, kappa } => {
                    let dot: f64 = x.iter().zip(mu).map(|(a, b)| a * b).sum();
                    kappa * dot + ln_norm
                }
                ComponentDist::VonMisesTorus { mus, kappas } => {
                    let mut s = 0.0;
                    for ((xi, mi), ki) in x.iter().zip(mus).zip(kappas) {
                        s += ki * (xi - mi).cos();
                    }
                    s + ln_norm
                }
                ComponentDist::VonMisesCircle { mu, kappa } => {
                    kappa * (x[0] - mu).cos() + ln_norm
                }
            };
            terms.push(c.weight.ln() + log_kernel);
        }
        logsumexp(&terms)
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.log_pdf(x).exp()
    }

    /// Draws `n` points: a categorical component pick, then one draw from
    /// that component, all on one seeded stream. A single-component mixture
    /// skips the categorical pick, so it reproduces the bare sampler.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Sample::with_capacity(self.kind, n);
        let single = self.components.len() == 1;
        for _ in 0..n {
            let pick = if single {
                0
            } else {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = self.components.len() - 1;
                for (idx, c) in self.components.iter().enumerate() {
                    acc += c.weight;
                    if u < acc {
                        chosen = idx;
                        break;
                    }
                }
                chosen
            };
            match &self.components[pick].dist {
                ComponentDist::Vmf { mu, kappa } => {
                    let p = ManifoldPoint::new(ManifoldKind::Sphere2, mu.clone())?;
                    let drawn = sample_vmf_with(&p, *kappa, 1, &mut rng)?;
                    out.push_canonical(drawn.point(0));
                }
                ComponentDist::VonMisesTorus { mus, kappas } => {
                    let coords: Vec<f64> = mus
                        .iter()
                        .zip(kappas)
                        .map(|(m, k)| von_mises_angle(*m, *k, &mut rng))
                        .collect();
                    out.push(&coords)?;
                }
                ComponentDist::VonMisesCircle { mu, kappa } => {
                    out.push(&[von_mises_angle(*mu, *kappa, &mut rng)])?;
                }
            }
        }
        Ok(out)
    }
}

impl TryFrom<Vec<Component>> for Mixture {
    type Error = Error;

    fn try_from(components: Vec<Component>) -> Result<Mixture> {
        Mixture::new(components)
    }
}

impl From<Mixture> for Vec<Component> {
    fn from(m: Mixture) -> Vec<Component> {
        m.components
    }
}

/// Kernel family for density estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    VonMisesFisherS2,
    VonMisesTorus,
    GaussianEuclidean,
}

/// Kernel family plus its smoothing parameter: a concentration for the
/// directional kernels, a bandwidth for the Gaussian.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub concentration: f64,
}

impl KernelConfig {
    pub fn new(kind: KernelKind, concentration: f64) -> Result<KernelConfig> {
        if !(concentration > 0.0 && concentration.is_finite()) {
            return Err(Error::config("kernel concentration must be finite and > 0"));
        }
        Ok(KernelConfig {
            kind,
            concentration,
        })
    }

    fn compatible_with(&self, kind: ManifoldKind) -> bool {
        matches!(
            (self.kind, kind),
            (KernelKind::VonMisesFisherS2, ManifoldKind::Sphere2)
                | (KernelKind::VonMisesTorus, ManifoldKind::Torus(_))
                | (KernelKind::VonMisesTorus, ManifoldKind::Circle)
                | (KernelKind::GaussianEuclidean, ManifoldKind::Euclidean(_))
        )
    }

    /// Default kernel family for a manifold.
    pub fn family_for(kind: ManifoldKind) -> KernelKind {
        match kind {
            ManifoldKind::Sphere2 => KernelKind::VonMisesFisherS2,
            ManifoldKind::Circle | ManifoldKind::Torus(_) => KernelKind::VonMisesTorus,
            ManifoldKind::Euclidean(_) => KernelKind::GaussianEuclidean,
        }
    }
}

/// Kernel density estimate over a stored sample.
#[derive(Debug, Clone)]
pub struct KernelDensity {
    sample: Sample,
    config: KernelConfig,
    /// ln of the additive normalizer applied to every kernel term,
    /// including the 1/n factor.
    log_norm: f64,
}

impl KernelDensity {
    pub fn new(sample: Sample, config: KernelConfig) -> Result<KernelDensity> {
        if sample.is_empty() {
            return Err(Error::domain("kernel density needs a non-empty sample"));
        }
        if !(config.concentration > 0.0 && config.concentration.is_finite()) {
            return Err(Error::config("kernel concentration must be finite and > 0"));
        }
        if !config.compatible_with(sample.kind()) {
            return Err(Error::config(format!(
                "kernel {:?} does not match manifold {}",
                config.kind,
                sample.kind()
            )));
        }
        let log_norm = per_point_log_normalizer(&config, sample.kind())? - (sample.len() as f64).ln();
        Ok(KernelDensity {
            sample,
            config,
            log_norm,
        })
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn config(&self) -> KernelConfig {
        self.config
    }

    pub fn kind(&self) -> ManifoldKind {
        self.sample.kind()
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let mut buf = Vec::with_capacity(self.sample.len());
        self.log_pdf_with(x, &mut buf)
    }

    fn log_pdf_with(&self, x: &[f64], buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        let kappa = self.config.concentration;
        match self.config.kind {
            KernelKind::VonMisesFisherS2 => {
                for p in self.sample.iter() {
                    let dot = x[0] * p[0] + x[1] * p[1] + x[2] * p[2];
                    buf.push(kappa * dot);
                }
            }
            KernelKind::VonMisesTorus => {
                for p in self.sample.iter() {
                    let s: f64 = x.iter().zip(p).map(|(a, b)| (a - b).cos()).sum();
                    buf.push(kappa * s);
                }
            }
            KernelKind::GaussianEuclidean => {
                let inv2h2 = 0.5 / (kappa * kappa);
                for p in self.sample.iter() {
                    let d2: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
                    buf.push(-d2 * inv2h2);
                }
            }
        }
        logsumexp(buf) + self.log_norm
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.log_pdf(x).exp()
    }
}

/// ln of the per-kernel normalizer added to each log kernel term.
fn per_point_log_normalizer(config: &KernelConfig, kind: ManifoldKind) -> Result<f64> {
    match config.kind {
        KernelKind::VonMisesFisherS2 => vmf_log_normalizer(config.concentration),
        KernelKind::VonMisesTorus => {
            let d = kind.intrinsic_dim();
            Ok(-(d as f64) * von_mises_log_normalizer(config.concentration)?)
        }
        KernelKind::GaussianEuclidean => {
            let d = kind.intrinsic_dim();
            Ok(-gaussian_log_normalizer(config.concentration, d)?)
        }
    }
}

/// A density that the estimator pipeline can evaluate anywhere: either an
/// analytic mixture (ground truth) or a kernel estimate built from data.
#[derive(Debug, Clone)]
pub enum DensityModel {
    Mixture(Mixture),
    Kernel(KernelDensity),
}

impl DensityModel {
    pub fn kind(&self) -> ManifoldKind {
        match self {
            DensityModel::Mixture(m) => m.kind(),
            DensityModel::Kernel(k) => k.kind(),
        }
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        match self {
            DensityModel::Mixture(m) => m.log_pdf(x),
            DensityModel::Kernel(k) => k.log_pdf(x),
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.log_pdf(x).exp()
    }

    /// Density at every grid node, in node order.
    pub fn evaluate_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        if grid.kind() != self.kind() {
            return Err(Error::domain("grid and density manifolds differ"));
        }
        let nodes: Vec<&[f64]> = grid.nodes().collect();
        Ok(match self {
            DensityModel::Mixture(m) => nodes.par_iter().map(|x| m.pdf(x)).collect(),
            DensityModel::Kernel(k) => nodes
                .par_iter()
                .map_init(
                    || Vec::with_capacity(k.sample.len()),
                    |buf, x| k.log_pdf_with(x, buf).exp(),
                )
                .collect(),
        })
    }

    /// Density at every sample point, in sample order.
    pub fn evaluate_sample(&self, sample: &Sample) -> Result<Vec<f64>> {
        if sample.kind() != self.kind() {
            return Err(Error::domain("sample and density manifolds differ"));
        }
        let pts: Vec<&[f64]> = sample.iter().collect();
        Ok(match self {
            DensityModel::Mixture(m) => pts.par_iter().map(|x| m.pdf(x)).collect(),
            DensityModel::Kernel(k) => pts
                .par_iter()
                .map_init(
                    || Vec::with_capacity(k.sample.len()),
                    |buf, x| k.log_pdf_with(x, buf).exp(),
                )
                .collect(),
        })
    }

    /// Quadrature integral of the density over the grid. Useful as a
    /// normalization audit: it should land within 1e-2 of 1 on a fine grid
    /// covering the support.
    pub fn grid_integral(&self, grid: &Grid) -> Result<f64> {
        let w = grid
            .quadrature_weight()
            .ok_or_else(|| Error::config("grid has no quadrature weight"))?;
        let values = self.evaluate_grid(grid)?;
        Ok(values.iter().sum::<f64>() * w)
    }
}

/// von Mises-Fisher density on the 2-sphere.
pub fn vmf_pdf(x: &[f64], mu: &[f64], kappa: f64) -> Result<f64> {
    let x = ManifoldPoint::new(ManifoldKind::Sphere2, x.to_vec())?;
    let mu = ManifoldPoint::new(ManifoldKind::Sphere2, mu.to_vec())?;
    let ln_c = vmf_log_normalizer(kappa)?;
    let dot: f64 = x.coords().iter().zip(mu.coords()).map(|(a, b)| a * b).sum();
    Ok((ln_c + kappa * dot).exp())
}

/// Product von Mises density on the d-torus with per-coordinate means and
/// concentrations.
pub fn von_mises_torus_pdf(x: &[f64], mus: &[f64], kappas: &[f64]) -> Result<f64> {
    if x.len() != mus.len() || mus.len() != kappas.len() || x.is_empty() {
        return Err(Error::domain("torus pdf needs matching non-empty tuples"));
    }
    let mut log_pdf = 0.0;
    for ((xi, mi), ki) in x.iter().zip(mus).zip(kappas) {
        log_pdf += ki * (xi - mi).cos() - von_mises_log_normalizer(*ki)?;
    }
    Ok(log_pdf.exp())
}

/// Kernel density estimate at a single point.
pub fn kde_evaluate(sample: &Sample, config: &KernelConfig, x: &[f64]) -> Result<f64> {
    let kd = KernelDensity::new(sample.clone(), *config)?;
    if x.len() != sample.kind().ambient_dim() {
        return Err(Error::domain("query dimension mismatch"));
    }
    Ok(kd.pdf(x))
}

/// Default cross-validation grid: 40 log-spaced concentrations from 2^0 to
/// 2^10. Suits the directional kernels, whose concentration grows with the
/// inverse squared bandwidth.
pub fn default_concentration_grid() -> Vec<f64> {
    let n = 40;
    (0..n)
        .map(|i| 2f64.powf(10.0 * i as f64 / (n - 1) as f64))
        .collect()
}

/// Default cross-validation grid for the Gaussian kernel, whose smoothing
/// parameter is the bandwidth itself: 40 log-spaced values from 2^-8 to 1,
/// sized for data on a unit scale.
pub fn default_bandwidth_grid() -> Vec<f64> {
    let n = 40;
    (0..n)
        .map(|i| 2f64.powf(-8.0 + 8.0 * i as f64 / (n - 1) as f64))
        .collect()
}

/// The default cross-validation grid for a kernel family: bandwidths for
/// the Gaussian, concentrations for the directional kernels.
pub fn default_cv_grid(kind: KernelKind) -> Vec<f64> {
    match kind {
        KernelKind::GaussianEuclidean => default_bandwidth_grid(),
        _ => default_concentration_grid(),
    }
}

/// Selects the concentration maximizing the leave-one-out log-likelihood
/// over an ascending candidate grid. Ties go to the smaller concentration,
/// which gives the smoother estimate.
pub fn cv_select_concentration(
    sample: &Sample,
    kind: KernelKind,
    grid: &[f64],
) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::domain("cross-validation needs at least two points"));
    }
    if grid.is_empty() {
        return Err(Error::config("concentration grid is empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("concentration grid must be strictly ascending"));
    }
    let probe = KernelConfig::new(kind, grid[0])?; // also rejects non-positive grid heads
    if !probe.compatible_with(sample.kind()) {
        return Err(Error::config(format!(
            "kernel {kind:?} does not match manifold {}",
            sample.kind()
        )));
    }
    let scores = cv_scores(sample, kind, grid)?;
    let mut best = (grid[0], scores[0]);
    for (&kappa, &score) in grid.iter().zip(&scores).skip(1) {
        if score > best.1 {
            best = (kappa, score);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::domain(
            "all leave-one-out likelihoods are degenerate; cannot select a concentration",
        ));
    }
    Ok(best.0)
}

/// LOO log-likelihood for every grid concentration.
///
/// The kernel's dependence on the held-out pair enters only through a
/// scalar statistic s_ij (spherical dot product, summed angular cosines, or
/// negative half squared distance), so each point's row of statistics is
/// computed once and reused across the whole concentration grid.
pub fn cv_scores(sample: &Sample, kind: KernelKind, grid: &[f64]) -> Result<Vec<f64>> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::domain("cross-validation needs at least two points"));
    }
    if grid.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
        return Err(Error::config("candidate concentrations must be finite and > 0"));
    }
    let dim_d = sample.kind().intrinsic_dim() as f64;
    // Additive per-point normalizer term n * g(kappa), and the multiplier
    // the kernel applies to the pair statistic: the concentration itself
    // for the directional kernels, 1/h^2 for the Gaussian bandwidth.
    let mut norm_terms = Vec::with_capacity(grid.len());
    let mut mults = Vec::with_capacity(grid.len());
    for &kappa in grid {
        let g = match kind {
            KernelKind::VonMisesFisherS2 => vmf_log_normalizer(kappa)?,
            KernelKind::VonMisesTorus => -dim_d * von_mises_log_normalizer(kappa)?,
            KernelKind::GaussianEuclidean => -gaussian_log_normalizer(kappa, dim_d as usize)?,
        };
        norm_terms.push(n as f64 * g);
        mults.push(match kind {
            KernelKind::GaussianEuclidean => 1.0 / (kappa * kappa),
            _ => kappa,
        });
    }
    let pts: Vec<&[f64]> = sample.iter().collect();
    let ln_m = ((n - 1) as f64).ln();
    let sums = (0..n)
        .into_par_iter()
        .fold(
            || (vec![0.0f64; grid.len()], Vec::with_capacity(n - 1)),
            |(mut acc, mut row), i| {
                row.clear();
                let xi = pts[i];
                for (j, xj) in pts.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    row.push(pair_statistic(kind, xi, xj));
                }
                for (slot, &mult) in acc.iter_mut().zip(&mults) {
                    let mut hi = f64::NEG_INFINITY;
                    for &s in &row {
                        let v = mult * s;
                        if v > hi {
                            hi = v;
                        }
                    }
                    let sum: f64 = row.iter().map(|&s| (mult * s - hi).exp()).sum();
                    *slot += hi + sum.ln() - ln_m;
                }
                (acc, row)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(
            || vec![0.0f64; grid.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(sums
        .iter()
        .zip(&norm_terms)
        .map(|(s, t)| s + t)
        .collect())
}

fn pair_statistic(kind: KernelKind, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        KernelKind::VonMisesFisherS2 => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        KernelKind::VonMisesTorus => a.iter().zip(b).map(|(x, y)| (x - y).cos()).sum(),
        KernelKind::GaussianEuclidean => {
            -0.5 * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
        }
    }
}
