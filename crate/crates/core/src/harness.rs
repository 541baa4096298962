//! Seeded Monte Carlo studies: convergence of the ball-union estimator to
//! the true region, level-estimation accuracy, plug-in comparisons, and
//! empirical DKW checks.
//!
//! A study is described by an [`ExperimentConfig`], runs deterministically
//! from its seed, and yields a [`RunRecord`] holding one row per replicate
//! plus per-size summaries. Results can be appended to a CSV (one row per
//! replicate) and summarized to JSON.
//!
//! Replicates at different sample sizes share a seed stream by prefixing:
//! the size-800 sample of replicate k is the first half of its size-1600
//! sample. Paired comparisons across sizes therefore see the same draw,
//! which sharpens the monotone-decay checks.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density::{
    cv_select_concentration, default_cv_grid, DensityModel, KernelConfig, KernelKind,
    KernelDensity, Mixture,
};
use crate::error::{Error, Result};
use crate::grid::{build_grid, Grid, GridSpec};
use crate::hdr::{
    estimate_hdr, estimate_level, connected_components, plugin_hdr, split_sample_with_values,
    true_level,
};
use crate::manifold::Sample;
use crate::morphology::{grid_components, hausdorff_distance, GridSet};

use std::sync::Arc;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Fixed threshold, growing n: d_H(L(lambda), L_n(lambda)) decay.
    Convergence,
    /// Mass targets: level error |lambda_hat - lambda_gamma| and region
    /// recovery, optionally with a DKW trial block.
    Level,
    /// Ball-union estimator against the plug-in comparator on shared
    /// samples.
    ComparePlugin,
}

fn default_oracle_n() -> usize {
    1_000_000
}

fn default_kappa_scale() -> f64 {
    1.0
}

/// Full description of a study. Serialized as JSON for the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub study: StudyKind,
    /// Ground-truth density, also the sampling distribution.
    pub mixture: Mixture,
    /// Fixed threshold for convergence and plug-in studies.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Mass-target schedule for level studies.
    #[serde(default)]
    pub gammas: Vec<f64>,
    /// Ball radius schedule: one entry shared across sizes, or one per
    /// entry of `n_schedule`.
    pub r_n: Vec<f64>,
    /// Sample sizes, strictly increasing.
    pub n_schedule: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    /// Evaluation grid resolution (node count target).
    pub grid_resolution: usize,
    /// Fixed kernel concentration; omit to select by cross-validation.
    #[serde(default)]
    pub concentration: Option<f64>,
    /// Cross-validation candidate grid; omit for the default 2^0..2^10.
    #[serde(default)]
    pub cv_grid: Option<Vec<f64>>,
    /// Monte Carlo size for ground-truth levels.
    #[serde(default = "default_oracle_n")]
    pub oracle_n: usize,
    /// Number of DKW trials to append to a level study (0 = none).
    #[serde(default)]
    pub dkw_trials: usize,
    /// Plug-in study: substitute the true density for the KDE.
    #[serde(default)]
    pub use_true_density: bool,
    /// Plug-in study: multiply the selected concentration, e.g. 10 for a
    /// deliberately undersmoothed comparator.
    #[serde(default = "default_kappa_scale")]
    pub kappa_scale: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::config("replicate count must be at least 1"));
        }
        if self.n_schedule.is_empty() {
            return Err(Error::config("n schedule is empty"));
        }
        if self.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n schedule must be strictly increasing"));
        }
        if self.n_schedule[0] < 2 {
            return Err(Error::config("sample sizes below 2 cannot be cross-validated"));
        }
        if self.r_n.is_empty() {
            return Err(Error::config("r_n schedule is empty"));
        }
        if self.r_n.len() != 1 && self.r_n.len() != self.n_schedule.len() {
            return Err(Error::config(
                "r_n schedule must have one entry or match the n schedule",
            ));
        }
        if self.r_n.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::config("r_n values must be finite and > 0"));
        }
        match self.study {
            StudyKind::Convergence | StudyKind::ComparePlugin => {
                let lambda = self
                    .lambda
                    .ok_or_else(|| Error::config("this study needs a lambda threshold"))?;
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return Err(Error::config("lambda must be finite and >= 0"));
                }
            }
            StudyKind::Level => {
                if self.gammas.is_empty() {
                    return Err(Error::config("level study needs a gamma schedule"));
                }
                if self.gammas.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
                    return Err(Error::config("gammas must lie strictly between 0 and 1"));
                }
                if self.oracle_n < 100_000 {
                    return Err(Error::config("oracle_n must be at least 1e5"));
                }
            }
        }
        if !(self.kappa_scale > 0.0 && self.kappa_scale.is_finite()) {
            return Err(Error::config("kappa_scale must be finite and > 0"));
        }
        Ok(())
    }

    /// Hex digest identifying this configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    fn r_n_for(&self, size_index: usize) -> f64 {
        if self.r_n.len() == 1 {
            self.r_n[0]
        } else {
            self.r_n[size_index]
        }
    }

    fn cv_grid(&self, family: KernelKind) -> Vec<f64> {
        self.cv_grid
            .clone()
            .unwrap_or_else(|| default_cv_grid(family))
    }

    fn replicate_seed(&self, replicate: usize) -> u64 {
        self.seed ^ (replicate as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }

    fn oracle_seed(&self, gamma: f64) -> u64 {
        self.seed
            .wrapping_add(0xd1b5_4a32_d192_ed03)
            .wrapping_add(gamma.to_bits())
    }
}

/// One estimated region compared against its reference.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRecord {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub r_n: f64,
    pub gamma: Option<f64>,
    /// Threshold actually used (fixed, or the estimated level).
    pub lambda: f64,
    /// Ground-truth level for level studies.
    pub lambda_true: Option<f64>,
    pub level_abs_error: Option<f64>,
    pub d_hausdorff: f64,
    /// True when either compared set was empty and `d_hausdorff` is the
    /// manifold-diameter sentinel rather than a measured distance.
    pub empty_estimate: bool,
    /// Sup over grid nodes of |f - f_n|.
    pub d_sup_density: f64,
    pub ball_components: Option<usize>,
    pub plugin_components: Option<usize>,
    pub symmetric_difference_nodes: Option<usize>,
    pub wall_ms: f64,
}

/// Per-size (and per-gamma) aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct StudySummary {
    pub n: usize,
    pub gamma: Option<f64>,
    pub replicates: usize,
    pub empty_count: usize,
    pub median_d_hausdorff: f64,
    pub q1_d_hausdorff: f64,
    pub q3_d_hausdorff: f64,
    /// Median over non-sentinel replicates only; None when all were empty.
    pub median_d_hausdorff_nonempty: Option<f64>,
    pub median_d_sup_density: f64,
    pub median_level_abs_error: Option<f64>,
    /// Count of replicates whose d_H beat the same seed at the previous
    /// size in the schedule (same gamma), and the comparison base.
    pub paired_wins_vs_previous_n: Option<usize>,
}

/// Everything a study produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub study: StudyKind,
    pub config_hash: String,
    pub grid_dispersion: f64,
    pub records: Vec<ReplicateRecord>,
    pub summaries: Vec<StudySummary>,
    /// DKW block outcome, when a level study requested trials.
    pub dkw: Option<DkwReport>,
}

impl RunRecord {
    /// Equality of the statistical content, ignoring wall-clock fields.
    /// Two runs of the same config and seed must satisfy this.
    pub fn stats_equal(&self, other: &RunRecord) -> bool {
        if self.config_hash != other.config_hash
            || self.records.len() != other.records.len()
            || self.grid_dispersion != other.grid_dispersion
        {
            return false;
        }
        self.records.iter().zip(&other.records).all(|(a, b)| {
            a.n == b.n
                && a.replicate == b.replicate
                && a.seed == b.seed
                && a.r_n == b.r_n
                && a.gamma == b.gamma
                && a.lambda == b.lambda
                && a.lambda_true == b.lambda_true
                && a.d_hausdorff == b.d_hausdorff
                && a.empty_estimate == b.empty_estimate
                && a.d_sup_density == b.d_sup_density
                && a.ball_components == b.ball_components
                && a.plugin_components == b.plugin_components
                && a.symmetric_difference_nodes == b.symmetric_difference_nodes
        })
    }

    /// Appends one CSV row per replicate, writing a header only when the
    /// file does not exist yet.
    pub fn append_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        let fresh = !path.exists();
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            w.write_record([
                "study",
                "config_hash",
                "n",
                "replicate",
                "seed",
                "gamma",
                "r_n",
                "lambda",
                "lambda_true",
                "level_abs_error",
                "d_hausdorff",
                "empty_estimate",
                "d_sup_density",
                "ball_components",
                "plugin_components",
                "symmetric_difference_nodes",
                "wall_ms",
            ])?;
        }
        let study = match self.study {
            StudyKind::Convergence => "convergence",
            StudyKind::Level => "level",
            StudyKind::ComparePlugin => "compare_plugin",
        };
        let opt_f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                study.to_string(),
                self.config_hash.clone(),
                r.n.to_string(),
                r.replicate.to_string(),
                r.seed.to_string(),
                opt_f(r.gamma),
                r.r_n.to_string(),
                r.lambda.to_string(),
                opt_f(r.lambda_true),
                opt_f(r.level_abs_error),
                r.d_hausdorff.to_string(),
                r.empty_estimate.to_string(),
                r.d_sup_density.to_string(),
                opt_u(r.ball_components),
                opt_u(r.plugin_components),
                opt_u(r.symmetric_difference_nodes),
                r.wall_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the summary block (medians, quartiles, DKW outcome) as JSON.
    pub fn write_summary_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        #[derive(Serialize)]
        struct SummaryDoc<'a> {
            study: &'a StudyKind,
            config_hash: &'a str,
            grid_dispersion: f64,
            summaries: &'a [StudySummary],
            dkw: &'a Option<DkwReport>,
        }
        let doc = SummaryDoc {
            study: &self.study,
            config_hash: &self.config_hash,
            grid_dispersion: self.grid_dispersion,
            summaries: &self.summaries,
            dkw: &self.dkw,
        };
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, &doc)?;
        file.write_all(b"\n")?;
        Ok(())
    }
}

/// Outcome of an empirical DKW block.
#[derive(Debug, Clone, Serialize)]
pub struct DkwReport {
    pub n: usize,
    pub trials: usize,
    pub bound: f64,
    pub pass_count: usize,
    pub sup_deviations: Vec<f64>,
}

/// Dispatches on the configured study kind.
pub fn run_study(config: &ExperimentConfig) -> Result<RunRecord> {
    match config.study {
        StudyKind::Convergence => run_convergence_study(config),
        StudyKind::Level => run_level_study(config),
        StudyKind::ComparePlugin => compare_plugin(config),
    }
}

/// Shared setup: validated config, evaluation grid (with the dispersion
/// gate), true density values over the grid.
struct StudyContext {
    grid: Arc<Grid>,
    truth: DensityModel,
    f_grid: Vec<f64>,
}

fn prepare(config: &ExperimentConfig) -> Result<StudyContext> {
    config.validate()?;
    let kind = config.mixture.kind();
    let grid = Arc::new(build_grid(&GridSpec::new(kind, config.grid_resolution))?);
    let min_r = config.r_n.iter().copied().fold(f64::INFINITY, f64::min);
    if grid.dispersion() >= min_r / 4.0 {
        return Err(Error::config(format!(
            "grid dispersion {:.5} is not below r_n/4 = {:.5}; raise the grid resolution",
            grid.dispersion(),
            min_r / 4.0
        )));
    }
    let truth = DensityModel::Mixture(config.mixture.clone());
    let f_grid = truth.evaluate_grid(&grid)?;
    Ok(StudyContext {
        grid,
        truth,
        f_grid,
    })
}

/// Fits the replicate's density model: the true mixture when requested,
/// else a KDE with fixed or cross-validated concentration.
fn fit_density(
    config: &ExperimentConfig,
    pts: &Sample,
    scale: f64,
) -> Result<(DensityModel, f64)> {
    if config.use_true_density {
        return Ok((DensityModel::Mixture(config.mixture.clone()), 0.0));
    }
    let family = KernelConfig::family_for(pts.kind());
    let kappa = match config.concentration {
        Some(k) => k,
        None => cv_select_concentration(pts, family, &config.cv_grid(family))?,
    };
    let kappa = kappa * scale;
    let kd = KernelDensity::new(pts.clone(), KernelConfig::new(family, kappa)?)?;
    Ok((DensityModel::Kernel(kd), kappa))
}

/// Sup over grid nodes of |f - f_n|, given f on the grid.
fn sup_density_gap(f_grid: &[f64], fn_grid: &[f64]) -> f64 {
    f_grid
        .iter()
        .zip(fn_grid)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two discretized sets, with the
/// manifold-diameter sentinel when either is empty.
fn masked_hausdorff(est: &GridSet, truth: &GridSet) -> (f64, bool) {
    if est.is_empty() || truth.is_empty() {
        let diameter = est
            .kind()
            .diameter()
            .expect("study manifolds are compact");
        return (diameter, true);
    }
    let d = hausdorff_distance(est, truth).expect("non-empty by construction");
    (d, false)
}

pub fn run_convergence_study(config: &ExperimentConfig) -> Result<RunRecord> {
    if config.study != StudyKind::Convergence {
        return Err(Error::config("config is not a convergence study"));
    }
    let ctx = prepare(config)?;
    let lambda = config.lambda.expect("validated");
    let true_set = plugin_hdr(&ctx.truth, lambda, &ctx.grid)?;
    let mut records = Vec::new();
    for replicate in 0..config.replicates {
        let seed = config.replicate_seed(replicate);
        let full = config.mixture.sample(*config.n_schedule.last().unwrap(), seed)?;
        for (si, &n) in config.n_schedule.iter().enumerate() {
            let start = Instant::now();
            let pts = full.prefix(n);
            let r_n = config.r_n_for(si);
            let (density, _) = fit_density(config, &pts, 1.0)?;
            let values = density.evaluate_sample(&pts)?;
            let labeled = split_sample_with_values(&pts, values, lambda)?;
            let est = estimate_hdr(&labeled, r_n)?;
            let est_mask = est.set().membership_mask(&ctx.grid)?;
            let fn_grid = density.evaluate_grid(&ctx.grid)?;
            let (d_h, empty) = masked_hausdorff(&est_mask, &true_set);
            records.push(ReplicateRecord {
                n,
                replicate,
                seed,
                r_n,
                gamma: None,
                lambda,
                lambda_true: None,
                level_abs_error: None,
                d_hausdorff: d_h,
                empty_estimate: empty,
                d_sup_density: sup_density_gap(&ctx.f_grid, &fn_grid),
                ball_components: Some(connected_components(&est).0),
                plugin_components: None,
                symmetric_difference_nodes: None,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    finish(config, ctx.grid.dispersion(), records, None)
}

pub fn run_level_study(config: &ExperimentConfig) -> Result<RunRecord> {
    if config.study != StudyKind::Level {
        return Err(Error::config("config is not a level study"));
    }
    let ctx = prepare(config)?;
    // Ground-truth level and set per gamma, shared across replicates.
    let mut truths = Vec::new();
    for &gamma in &config.gammas {
        let lambda_gamma = true_level(
            &config.mixture,
            gamma,
            config.oracle_n,
            config.oracle_seed(gamma),
        )?;
        let set = plugin_hdr(&ctx.truth, lambda_gamma, &ctx.grid)?;
        truths.push((gamma, lambda_gamma, set));
    }
    let mut records = Vec::new();
    for replicate in 0..config.replicates {
        let seed = config.replicate_seed(replicate);
        let full = config.mixture.sample(*config.n_schedule.last().unwrap(), seed)?;
        for (si, &n) in config.n_schedule.iter().enumerate() {
            let pts = full.prefix(n);
            let r_n = config.r_n_for(si);
            let (density, _) = fit_density(config, &pts, 1.0)?;
            let values = density.evaluate_sample(&pts)?;
            let fn_grid = density.evaluate_grid(&ctx.grid)?;
            let d_sup = sup_density_gap(&ctx.f_grid, &fn_grid);
            for (gamma, lambda_gamma, true_set) in &truths {
                let start = Instant::now();
                let lambda_hat = estimate_level(&values, *gamma)?;
                let labeled = split_sample_with_values(&pts, values.clone(), lambda_hat)?;
                let est = estimate_hdr(&labeled, r_n)?;
                let est_mask = est.set().membership_mask(&ctx.grid)?;
                let (d_h, empty) = masked_hausdorff(&est_mask, true_set);
                records.push(ReplicateRecord {
                    n,
                    replicate,
                    seed,
                    r_n,
                    gamma: Some(*gamma),
                    lambda: lambda_hat,
                    lambda_true: Some(*lambda_gamma),
                    level_abs_error: Some((lambda_hat - lambda_gamma).abs()),
                    d_hausdorff: d_h,
                    empty_estimate: empty,
                    d_sup_density: d_sup,
                    ball_components: Some(connected_components(&est).0),
                    plugin_components: None,
                    symmetric_difference_nodes: None,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                });
            }
        }
    }
    let dkw = if config.dkw_trials > 0 {
        Some(run_dkw_trials(
            &config.mixture,
            1000,
            config.dkw_trials,
            config.seed ^ 0x5851_f42d_4c95_7f2d,
        )?)
    } else {
        None
    };
    finish(config, ctx.grid.dispersion(), records, dkw)
}

pub fn compare_plugin(config: &ExperimentConfig) -> Result<RunRecord> {
    if config.study != StudyKind::ComparePlugin {
        return Err(Error::config("config is not a plug-in comparison study"));
    }
    let ctx = prepare(config)?;
    let lambda = config.lambda.expect("validated");
    let true_set = plugin_hdr(&ctx.truth, lambda, &ctx.grid)?;
    let link_radius = 2.0 * ctx.grid.dispersion();
    let mut records = Vec::new();
    for replicate in 0..config.replicates {
        let seed = config.replicate_seed(replicate);
        let full = config.mixture.sample(*config.n_schedule.last().unwrap(), seed)?;
        for (si, &n) in config.n_schedule.iter().enumerate() {
            let start = Instant::now();
            let pts = full.prefix(n);
            let r_n = config.r_n_for(si);
            let (density, _) = fit_density(config, &pts, config.kappa_scale)?;
            let values = density.evaluate_sample(&pts)?;
            let labeled = split_sample_with_values(&pts, values, lambda)?;
            let est = estimate_hdr(&labeled, r_n)?;
            let est_mask = est.set().membership_mask(&ctx.grid)?;
            let plug_mask = plugin_hdr(&density, lambda, &ctx.grid)?;
            let fn_grid = density.evaluate_grid(&ctx.grid)?;
            let (d_h, empty) = masked_hausdorff(&est_mask, &true_set);
            records.push(ReplicateRecord {
                n,
                replicate,
                seed,
                r_n,
                gamma: None,
                lambda,
                lambda_true: None,
                level_abs_error: None,
                d_hausdorff: d_h,
                empty_estimate: empty,
                d_sup_density: sup_density_gap(&ctx.f_grid, &fn_grid),
                ball_components: Some(connected_components(&est).0),
                plugin_components: Some(grid_components(&plug_mask, link_radius)?),
                symmetric_difference_nodes: Some(
                    est_mask.symmetric_difference_count(&plug_mask)?,
                ),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    finish(config, ctx.grid.dispersion(), records, None)
}

/// Empirical DKW block: draws `trials` samples of size `n` from the
/// mixture, and for each computes the Kolmogorov distance between the
/// empirical distribution of f(X_i) and a large Monte Carlo reference for
/// the law of f(X). Passes count trials within sqrt(log n / n).
pub fn run_dkw_trials(
    mixture: &Mixture,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<DkwReport> {
    if n < 2 || trials == 0 {
        return Err(Error::config("DKW block needs n >= 2 and at least one trial"));
    }
    let truth = DensityModel::Mixture(mixture.clone());
    // Reference law of f(X): one large draw, sorted once.
    let reference_n = 1_000_000;
    let ref_sample = mixture.sample(reference_n, seed ^ 0xa076_1d64_78bd_642f)?;
    let mut ref_values = truth.evaluate_sample(&ref_sample)?;
    ref_values.sort_by(f64::total_cmp);
    let bound = ((n as f64).ln() / n as f64).sqrt();
    let mut sup_deviations = Vec::with_capacity(trials);
    let mut pass_count = 0;
    for trial in 0..trials {
        let trial_seed = seed ^ (trial as u64 + 1).wrapping_mul(0x2545_f491_4f6c_dd1d);
        let sample = mixture.sample(n, trial_seed)?;
        let mut values = truth.evaluate_sample(&sample)?;
        values.sort_by(f64::total_cmp);
        let sup = kolmogorov_distance_sorted(&values, &ref_values);
        if sup <= bound {
            pass_count += 1;
        }
        sup_deviations.push(sup);
    }
    Ok(DkwReport {
        n,
        trials,
        bound,
        pass_count,
        sup_deviations,
    })
}

/// Kolmogorov distance between the empirical laws of two sorted value
/// sets, evaluated at the first set's jump points from both sides (the
/// supremum over thresholds is attained there or at the one-sided limits,
/// both of which are checked).
fn kolmogorov_distance_sorted(sample: &[f64], reference: &[f64]) -> f64 {
    let n = sample.len() as f64;
    let m = reference.len() as f64;
    let mut sup = 0.0f64;
    for &v in sample {
        // Fraction >= v on each side (survival functions).
        let s_n_at = (sample.len() - lower_bound(sample, v)) as f64 / n;
        let s_m_at = (reference.len() - lower_bound(reference, v)) as f64 / m;
        sup = sup.max((s_n_at - s_m_at).abs());
        // Just above v: strict survival.
        let s_n_above = (sample.len() - upper_bound(sample, v)) as f64 / n;
        let s_m_above = (reference.len() - upper_bound(reference, v)) as f64 / m;
        sup = sup.max((s_n_above - s_m_above).abs());
    }
    sup
}

/// First index with value >= x in a sorted slice.
fn lower_bound(sorted: &[f64], x: f64) -> usize {
    sorted.partition_point(|&v| v < x)
}

/// First index with value > x in a sorted slice.
fn upper_bound(sorted: &[f64], x: f64) -> usize {
    sorted.partition_point(|&v| v <= x)
}

/// Builds summaries and assembles the record.
fn finish(
    config: &ExperimentConfig,
    grid_dispersion: f64,
    records: Vec<ReplicateRecord>,
    dkw: Option<DkwReport>,
) -> Result<RunRecord> {
    let mut summaries = Vec::new();
    let gammas: Vec<Option<f64>> = if config.gammas.is_empty() {
        vec![None]
    } else {
        config.gammas.iter().map(|&g| Some(g)).collect()
    };
    for &gamma in &gammas {
        for (si, &n) in config.n_schedule.iter().enumerate() {
            let group: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| r.n == n && r.gamma == gamma)
                .collect();
            if group.is_empty() {
                continue;
            }
            let d_h: Vec<f64> = group.iter().map(|r| r.d_hausdorff).collect();
            let d_h_nonempty: Vec<f64> = group
                .iter()
                .filter(|r| !r.empty_estimate)
                .map(|r| r.d_hausdorff)
                .collect();
            let d_sup: Vec<f64> = group.iter().map(|r| r.d_sup_density).collect();
            let level_errors: Vec<f64> =
                group.iter().filter_map(|r| r.level_abs_error).collect();
            let paired_wins = if si == 0 {
                None
            } else {
                let prev_n = config.n_schedule[si - 1];
                let mut wins = 0;
                for r in &group {
                    if let Some(prev) = records.iter().find(|p| {
                        p.n == prev_n && p.replicate == r.replicate && p.gamma == gamma
                    }) {
                        if r.d_hausdorff < prev.d_hausdorff {
                            wins += 1;
                        }
                    }
                }
                Some(wins)
            };
            summaries.push(StudySummary {
                n,
                gamma,
                replicates: group.len(),
                empty_count: group.iter().filter(|r| r.empty_estimate).count(),
                median_d_hausdorff: median(&d_h),
                q1_d_hausdorff: quantile_sorted_copy(&d_h, 0.25),
                q3_d_hausdorff: quantile_sorted_copy(&d_h, 0.75),
                median_d_hausdorff_nonempty: if d_h_nonempty.is_empty() {
                    None
                } else {
                    Some(median(&d_h_nonempty))
                },
                median_d_sup_density: median(&d_sup),
                median_level_abs_error: if level_errors.is_empty() {
                    None
                } else {
                    Some(median(&level_errors))
                },
                paired_wins_vs_previous_n: paired_wins,
            });
        }
    }
    Ok(RunRecord {
        study: config.study,
        config_hash: config.hash(),
        grid_dispersion,
        records,
        summaries,
        dkw,
    })
}

/// Median by midpoint convention (mean of the central pair when even).
pub fn median(values: &[f64]) -> f64 {
    quantile_sorted_copy(values, 0.5)
}

fn quantile_sorted_copy(values: &[f64], q: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        let w = pos - lo as f64;
        v[lo] * (1.0 - w) + v[hi] * w
    }
}
