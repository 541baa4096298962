//! Highest-density-region estimation by granulometric smoothing.
//!
//! The estimator takes a sample labeled against a density threshold,
//! discards every high-density point that sits within `r_n` of some
//! low-density point, and returns the union of closed `r_n`-balls around
//! the survivors. The probability-content variant first converts a mass
//! target `gamma` into a threshold through an empirical quantile of the
//! fitted density values.

use std::sync::Arc;

use rayon::prelude::*;

use crate::density::{DensityModel, Mixture};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::manifold::{ManifoldKind, ManifoldPoint, Sample};
use crate::morphology::{BallUnionSet, GridSet};

/// A sample with cached density values, partitioned at a threshold.
/// Points with `f_n(X_i) >= lambda` land in the plus class, the rest in
/// the minus class, so ties side with the high-density region.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    points: Sample,
    fn_values: Vec<f64>,
    lambda: f64,
    plus: Vec<usize>,
    minus: Vec<usize>,
}

impl LabeledSample {
    pub fn points(&self) -> &Sample {
        &self.points
    }

    pub fn fn_values(&self) -> &[f64] {
        &self.fn_values
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn plus_indices(&self) -> &[usize] {
        &self.plus
    }

    pub fn minus_indices(&self) -> &[usize] {
        &self.minus
    }
}

/// Splits a sample at `lambda` using density values computed by `density`.
pub fn split_sample(
    points: &Sample,
    density: &DensityModel,
    lambda: f64,
) -> Result<LabeledSample> {
    let values = density.evaluate_sample(points)?;
    split_sample_with_values(points, values, lambda)
}

/// Splits a sample at `lambda` using caller-provided density values.
pub fn split_sample_with_values(
    points: &Sample,
    fn_values: Vec<f64>,
    lambda: f64,
) -> Result<LabeledSample> {
    if points.is_empty() {
        return Err(Error::domain("cannot split an empty sample"));
    }
    if fn_values.len() != points.len() {
        return Err(Error::domain("density values do not align with the sample"));
    }
    if fn_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("density values must be finite"));
    }
    if !lambda.is_finite() {
        return Err(Error::domain("threshold must be finite"));
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (i, &v) in fn_values.iter().enumerate() {
        if v >= lambda {
            plus.push(i);
        } else {
            minus.push(i);
        }
    }
    Ok(LabeledSample {
        points: points.clone(),
        fn_values,
        lambda,
        plus,
        minus,
    })
}

/// The fitted region: a ball union around the selected centers, plus the
/// threshold (and mass target, when one was used) that produced it.
#[derive(Debug, Clone)]
pub struct HdrEstimate {
    set: BallUnionSet,
    lambda: f64,
    gamma: Option<f64>,
    selected: Vec<usize>,
}

impl HdrEstimate {
    pub fn set(&self) -> &BallUnionSet {
        &self.set
    }

    pub fn kind(&self) -> ManifoldKind {
        self.set.kind()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The mass target, when the estimate came through
    /// [`estimate_hdr_by_probability`].
    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn radius(&self) -> f64 {
        self.set.radius()
    }

    /// Indices into the originating sample of the selected centers.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Exact membership test against the selected centers. The caller is
    /// responsible for passing coordinates of the estimate's manifold.
    pub fn contains_coords(&self, x: &[f64]) -> bool {
        self.set.contains(x)
    }
}

/// Builds the ball-union estimate at radius `r_n` from a labeled sample:
/// keep the plus points farther than `r_n` from every minus point, then
/// take the union of closed `r_n`-balls around them.
pub fn estimate_hdr(labeled: &LabeledSample, r_n: f64) -> Result<HdrEstimate> {
    if !(r_n > 0.0 && r_n.is_finite()) {
        return Err(Error::config("ball radius r_n must be finite and > 0"));
    }
    let kind = labeled.points.kind();
    let minus_pts: Vec<&[f64]> = labeled
        .minus
        .iter()
        .map(|&j| labeled.points.point(j))
        .collect();
    let selected: Vec<usize> = labeled
        .plus
        .par_iter()
        .copied()
        .filter(|&i| {
            let xi = labeled.points.point(i);
            !minus_pts.iter().any(|xj| kind.distance(xi, xj) <= r_n)
        })
        .collect();
    let mut centers = Sample::with_capacity(kind, selected.len());
    for &i in &selected {
        centers.push_canonical(labeled.points.point(i));
    }
    Ok(HdrEstimate {
        set: BallUnionSet::new(centers, r_n)?,
        lambda: labeled.lambda,
        gamma: None,
        selected,
    })
}

/// Membership test with manifold checking.
pub fn hdr_contains(est: &HdrEstimate, x: &ManifoldPoint) -> Result<bool> {
    if x.kind() != est.kind() {
        return Err(Error::domain("query point lives on a different manifold"));
    }
    Ok(est.contains_coords(x.coords()))
}

/// A mass target together with the level chosen for it.
#[derive(Debug, Clone, Copy)]
pub struct LevelQuery {
    pub gamma: f64,
    pub lambda_hat: f64,
}

/// The empirical level for mass target `gamma`: the largest threshold
/// keeping at least a `1 - gamma` fraction of the density values above it.
/// With ascending order statistics f(1) <= ... <= f(n) this is f(j) for
/// j = min(n, floor(n*gamma) + 1).
pub fn estimate_level(fn_values: &[f64], gamma: f64) -> Result<f64> {
    let n = fn_values.len();
    if n == 0 {
        return Err(Error::domain("level estimation needs a non-empty sample"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::config("gamma must lie strictly between 0 and 1"));
    }
    if fn_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("density values must be finite"));
    }
    let mut sorted = fn_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let j = ((n as f64 * gamma).floor() as usize + 1).min(n);
    Ok(sorted[j - 1])
}

/// As [`estimate_level`], returning the query pair.
pub fn estimate_level_query(fn_values: &[f64], gamma: f64) -> Result<LevelQuery> {
    Ok(LevelQuery {
        gamma,
        lambda_hat: estimate_level(fn_values, gamma)?,
    })
}

/// Full probability-content pipeline: evaluate the density on the sample,
/// pick the level for `gamma`, split, and estimate. The result can be
/// empty when `r_n` is large relative to the class margin; that is
/// reported as an ordinary (empty) estimate, not an error.
pub fn estimate_hdr_by_probability(
    points: &Sample,
    density: &DensityModel,
    gamma: f64,
    r_n: f64,
) -> Result<HdrEstimate> {
    let values = density.evaluate_sample(points)?;
    let query = estimate_level_query(&values, gamma)?;
    let labeled = split_sample_with_values(points, values, query.lambda_hat)?;
    let mut est = estimate_hdr(&labeled, r_n)?;
    est.gamma = Some(query.gamma);
    Ok(est)
}

/// Plug-in comparator: the grid nodes where the density reaches `lambda`.
pub fn plugin_hdr(density: &DensityModel, lambda: f64, grid: &Arc<Grid>) -> Result<GridSet> {
    if grid.kind() != density.kind() {
        return Err(Error::domain("grid and density manifolds differ"));
    }
    let values = density.evaluate_grid(grid)?;
    let mask = values.iter().map(|&v| v >= lambda).collect();
    GridSet::new(grid.clone(), mask)
}

/// Monte Carlo ground-truth level: the gamma-quantile of the true density
/// evaluated over a large sample from itself, using the same
/// order-statistic convention as [`estimate_level`]. The standard error
/// scales as oracle_n^{-1/2}.
pub fn true_level(mixture: &Mixture, gamma: f64, oracle_n: usize, seed: u64) -> Result<f64> {
    if oracle_n < 100_000 {
        return Err(Error::config(
            "oracle sample size below 1e5 gives an unreliable reference level",
        ));
    }
    let sample = mixture.sample(oracle_n, seed)?;
    let model = DensityModel::Mixture(mixture.clone());
    let values = model.evaluate_sample(&sample)?;
    estimate_level(&values, gamma)
}

/// Connected components of an estimate's ball union. See
/// [`ball_union_components`].
pub fn connected_components(est: &HdrEstimate) -> (usize, Vec<usize>) {
    ball_union_components(est.set())
}

/// Connected components of a ball union: centers are linked when their
/// balls meet, which for a common radius means center distance at most
/// twice the radius. Labels are assigned in first-appearance order over
/// the centers; an empty union has zero components.
pub fn ball_union_components(set: &BallUnionSet) -> (usize, Vec<usize>) {
    let centers = set.centers();
    let k = centers.len();
    if k == 0 {
        return (0, Vec::new());
    }
    let kind = centers.kind();
    let reach = 2.0 * set.radius();
    let mut uf = UnionFind::new(k);
    for i in 0..k {
        for j in (i + 1)..k {
            if kind.distance(centers.point(i), centers.point(j)) <= reach {
                uf.union(i, j);
            }
        }
    }
    let mut labels = vec![usize::MAX; k];
    let mut next = 0;
    let mut root_label = std::collections::HashMap::new();
    for (i, label) in labels.iter_mut().enumerate() {
        let root = uf.find(i);
        *label = *root_label.entry(root).or_insert_with(|| {
            let l = next;
            next += 1;
            l
        });
    }
    (next, labels)
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }
}
