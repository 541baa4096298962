//! Minkowski morphology, Hausdorff and set distances, packing numbers, and
//! maximal spacing.
//!
//! Two set representations coexist. [`BallUnionSet`] is exact: membership
//! is a distance test against stored centers, no grid involved. [`GridSet`]
//! discretizes a continuous set onto a grid and carries all morphology.
//! Dilation and erosion are implemented as independent nearest-member and
//! nearest-non-member scans, so the De Morgan identity between them is a
//! meaningful check rather than a tautology.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::manifold::{ManifoldKind, Sample};
use crate::spatial::KdTree3;

/// Member count above which sphere queries switch from brute force to a
/// chordal kd-tree. Both paths return identical distances: the tree picks
/// the argmin node and the reported distance is recomputed geodesically.
const TREE_CUTOFF: usize = 256;

/// A finite union of closed geodesic balls with one shared radius. This is
/// the estimator's native output form; membership is exact.
#[derive(Debug, Clone)]
pub struct BallUnionSet {
    radius: f64,
    centers: Sample,
}

impl BallUnionSet {
    pub fn new(centers: Sample, radius: f64) -> Result<BallUnionSet> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::config("ball radius must be finite and > 0"));
        }
        Ok(BallUnionSet { radius, centers })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.centers.kind()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &Sample {
        &self.centers
    }

    /// True iff the point lies within `radius` of some center. An empty
    /// center list is the empty set.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.centers
            .iter()
            .any(|c| self.kind().distance(x, c) <= self.radius)
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Discretizes membership onto a grid.
    pub fn membership_mask(&self, grid: &Arc<Grid>) -> Result<GridSet> {
        if grid.kind() != self.kind() {
            return Err(Error::domain("grid and ball union manifolds differ"));
        }
        if self.centers.is_empty() {
            return Ok(GridSet::empty(grid.clone()));
        }
        let near = NearestSet::over_sample(&self.centers);
        let nodes: Vec<&[f64]> = grid.nodes().collect();
        let mask: Vec<bool> = nodes
            .par_iter()
            .map(|g| near.distance(g) <= self.radius)
            .collect();
        Ok(GridSet::new(grid.clone(), mask).expect("mask built from grid"))
    }
}

/// A subset of grid nodes, the discrete carrier for continuous sets.
#[derive(Debug, Clone)]
pub struct GridSet {
    grid: Arc<Grid>,
    mask: Vec<bool>,
}

impl GridSet {
    pub fn new(grid: Arc<Grid>, mask: Vec<bool>) -> Result<GridSet> {
        if mask.len() != grid.len() {
            return Err(Error::config(format!(
                "mask length {} does not match grid size {}",
                mask.len(),
                grid.len()
            )));
        }
        Ok(GridSet { grid, mask })
    }

    pub fn empty(grid: Arc<Grid>) -> GridSet {
        let mask = vec![false; grid.len()];
        GridSet { grid, mask }
    }

    pub fn full(grid: Arc<Grid>) -> GridSet {
        let mask = vec![true; grid.len()];
        GridSet { grid, mask }
    }

    pub fn from_predicate<F: Fn(&[f64]) -> bool>(grid: Arc<Grid>, pred: F) -> GridSet {
        let mask = grid.nodes().map(pred).collect();
        GridSet { grid, mask }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kind(&self) -> ManifoldKind {
        self.grid.kind()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains_node(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn member_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn member_indices(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    /// Flat coordinate buffer of the member nodes, in node order.
    pub fn member_coords(&self) -> Vec<f64> {
        let dim = self.kind().ambient_dim();
        let mut out = Vec::new();
        for (i, &m) in self.mask.iter().enumerate() {
            if m {
                out.extend_from_slice(self.grid.node(i));
            }
        }
        debug_assert_eq!(out.len() % dim, 0);
        out
    }

    pub fn complement(&self) -> GridSet {
        GridSet {
            grid: self.grid.clone(),
            mask: self.mask.iter().map(|m| !m).collect(),
        }
    }

    pub fn union(&self, other: &GridSet) -> Result<GridSet> {
        self.check_same_grid(other)?;
        Ok(GridSet {
            grid: self.grid.clone(),
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a || *b)
                .collect(),
        })
    }

    pub fn intersection(&self, other: &GridSet) -> Result<GridSet> {
        self.check_same_grid(other)?;
        Ok(GridSet {
            grid: self.grid.clone(),
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a && *b)
                .collect(),
        })
    }

    pub fn is_subset_of(&self, other: &GridSet) -> Result<bool> {
        self.check_same_grid(other)?;
        Ok(self
            .mask
            .iter()
            .zip(&other.mask)
            .all(|(a, b)| !*a || *b))
    }

    /// Number of nodes in exactly one of the two sets.
    pub fn symmetric_difference_count(&self, other: &GridSet) -> Result<usize> {
        self.check_same_grid(other)?;
        Ok(self
            .mask
            .iter()
            .zip(&other.mask)
            .filter(|(a, b)| *a != *b)
            .count())
    }

    /// Every member of `self` lies within `slack` of a member of `other`.
    /// With `slack = 0` this is plain inclusion; positive slack is the
    /// dispersion-tolerant inclusion used against analytic references.
    pub fn is_subset_within(&self, other: &GridSet, slack: f64) -> Result<bool> {
        self.check_same_grid(other)?;
        if slack == 0.0 {
            return self.is_subset_of(other);
        }
        if other.is_empty() {
            return Ok(self.is_empty());
        }
        let near = NearestSet::over_members(other);
        let strays: usize = self
            .member_indices()
            .par_iter()
            .filter(|&&i| near.distance(self.grid.node(i)) > slack)
            .count();
        Ok(strays == 0)
    }

    fn check_same_grid(&self, other: &GridSet) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.len() != other.grid.len() {
            return Err(Error::domain("grid sets built over different grids"));
        }
        Ok(())
    }
}

/// Minkowski dilation: nodes within `r` of some member.
pub fn dilate(set: &GridSet, r: f64) -> Result<GridSet> {
    check_radius(r)?;
    if set.is_empty() {
        return Ok(GridSet::empty(set.grid.clone()));
    }
    let near = NearestSet::over_members(set);
    let nodes: Vec<&[f64]> = set.grid.nodes().collect();
    let mask = nodes
        .par_iter()
        .map(|g| near.distance(g) <= r)
        .collect();
    Ok(GridSet {
        grid: set.grid.clone(),
        mask,
    })
}

/// Minkowski erosion: nodes whose whole r-ball (among grid nodes) lies in
/// the set, computed as nodes farther than `r` from every non-member.
pub fn erode(set: &GridSet, r: f64) -> Result<GridSet> {
    check_radius(r)?;
    let outside = set.complement();
    if outside.is_empty() {
        return Ok(GridSet::full(set.grid.clone()));
    }
    let near = NearestSet::over_members(&outside);
    let nodes: Vec<&[f64]> = set.grid.nodes().collect();
    let mask = nodes
        .par_iter()
        .map(|g| near.distance(g) > r)
        .collect();
    Ok(GridSet {
        grid: set.grid.clone(),
        mask,
    })
}

/// Morphological opening: erosion then dilation by the same radius.
pub fn opening(set: &GridSet, r: f64) -> Result<GridSet> {
    dilate(&erode(set, r)?, r)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::config("morphology radius must be finite and > 0"));
    }
    Ok(())
}

/// Borrowed view of a finite point set, so distance functions accept
/// samples and grid sets interchangeably.
pub struct PointsView<'a> {
    kind: ManifoldKind,
    coords: std::borrow::Cow<'a, [f64]>,
}

impl<'a> PointsView<'a> {
    fn len(&self) -> usize {
        self.coords.len() / self.kind.ambient_dim()
    }

    fn point(&self, i: usize) -> &[f64] {
        let d = self.kind.ambient_dim();
        &self.coords[i * d..(i + 1) * d]
    }
}

impl<'a> From<&'a Sample> for PointsView<'a> {
    fn from(s: &'a Sample) -> PointsView<'a> {
        PointsView {
            kind: s.kind(),
            coords: std::borrow::Cow::Borrowed(s.coords()),
        }
    }
}

impl<'a> From<&'a GridSet> for PointsView<'a> {
    fn from(s: &'a GridSet) -> PointsView<'a> {
        PointsView {
            kind: s.kind(),
            coords: std::borrow::Cow::Owned(s.member_coords()),
        }
    }
}

impl<'a> From<&'a BallUnionSet> for PointsView<'a> {
    fn from(s: &'a BallUnionSet) -> PointsView<'a> {
        PointsView {
            kind: s.kind(),
            coords: std::borrow::Cow::Borrowed(s.centers().coords()),
        }
    }
}

/// Hausdorff distance between two non-empty finite point sets: the larger
/// of the two directed nearest-neighbor suprema.
pub fn hausdorff_distance<'a, 'b, A, B>(a: A, b: B) -> Result<f64>
where
    A: Into<PointsView<'a>>,
    B: Into<PointsView<'b>>,
{
    let a = a.into();
    let b = b.into();
    check_pair(&a, &b)?;
    let ab = directed_extreme(&a, &b, Extreme::Sup);
    let ba = directed_extreme(&b, &a, Extreme::Sup);
    Ok(ab.max(ba))
}

/// Inf distance between two non-empty finite point sets.
pub fn set_distance<'a, 'b, A, B>(a: A, b: B) -> Result<f64>
where
    A: Into<PointsView<'a>>,
    B: Into<PointsView<'b>>,
{
    let a = a.into();
    let b = b.into();
    check_pair(&a, &b)?;
    Ok(directed_extreme(&a, &b, Extreme::Inf))
}

fn check_pair(a: &PointsView<'_>, b: &PointsView<'_>) -> Result<()> {
    if a.kind != b.kind {
        return Err(Error::domain("set distance across different manifolds"));
    }
    if a.len() == 0 || b.len() == 0 {
        return Err(Error::domain("set distances require non-empty sets"));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Extreme {
    Sup,
    Inf,
}

fn directed_extreme(a: &PointsView<'_>, b: &PointsView<'_>, which: Extreme) -> f64 {
    let near = NearestSet::new(b.kind, b.coords.to_vec());
    let reduce = match which {
        Extreme::Sup => f64::max,
        Extreme::Inf => f64::min,
    };
    let init = match which {
        Extreme::Sup => 0.0,
        Extreme::Inf => f64::INFINITY,
    };
    (0..a.len())
        .into_par_iter()
        .map(|i| near.distance(a.point(i)))
        .reduce(|| init, reduce)
}

/// Greedy packing count: scan the points in order and keep each one whose
/// distance to every kept point exceeds `eps`. The kept set is
/// eps-separated, so the count is a lower bound on the packing number, and
/// it is exact on small inputs.
pub fn packing_number(points: &Sample, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config("packing scale must be finite and > 0"));
    }
    let kind = points.kind();
    let mut kept: Vec<&[f64]> = Vec::new();
    for p in points.iter() {
        if kept.iter().all(|k| kind.distance(p, k) > eps) {
            kept.push(p);
        }
    }
    Ok(kept.len())
}

/// Maximal spacing: over region nodes, the largest value of the smaller of
/// (distance to the sample) and (distance to the region's complement). The
/// discrete analogue of the largest sample-free ball inscribed in the
/// region. Infinite when the region covers the whole grid and the sample
/// is empty.
pub fn maximal_spacing(region: &GridSet, sample: &Sample) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::domain("maximal spacing needs a non-empty region"));
    }
    if sample.kind() != region.kind() {
        return Err(Error::domain("sample and region manifolds differ"));
    }
    let complement = region.complement();
    let to_sample = if sample.is_empty() {
        None
    } else {
        Some(NearestSet::over_sample(sample))
    };
    let to_outside = if complement.is_empty() {
        None
    } else {
        Some(NearestSet::over_members(&complement))
    };
    let members = region.member_indices();
    Ok(members
        .par_iter()
        .map(|&i| {
            let g = region.grid.node(i);
            let ds = to_sample.as_ref().map_or(f64::INFINITY, |n| n.distance(g));
            let dc = to_outside.as_ref().map_or(f64::INFINITY, |n| n.distance(g));
            ds.min(dc)
        })
        .reduce(|| 0.0, f64::max))
}

/// Connected components of a grid set: member nodes are linked when their
/// geodesic distance is at most `link_radius`. A link radius of twice the
/// grid dispersion joins lattice neighbors (orthogonal and diagonal) while
/// keeping separated blobs apart, which is the convention the experiment
/// harness uses for plug-in component counts.
pub fn grid_components(set: &GridSet, link_radius: f64) -> Result<usize> {
    if !(link_radius > 0.0 && link_radius.is_finite()) {
        return Err(Error::config("link radius must be finite and > 0"));
    }
    let members = set.member_indices();
    let k = members.len();
    if k == 0 {
        return Ok(0);
    }
    let kind = set.kind();
    let member_nodes: Vec<&[f64]> = members.iter().map(|&i| set.grid.node(i)).collect();
    // Edge lists gathered in parallel, then a sequential union pass.
    let edges: Vec<(usize, usize)> = (0..k)
        .into_par_iter()
        .map(|a| {
            let ga = member_nodes[a];
            ((a + 1)..k)
                .filter(|&b| kind.distance(ga, member_nodes[b]) <= link_radius)
                .map(|b| (a, b))
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut count = k;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    Ok(count)
}

/// Nearest-point queries against a fixed coordinate set, with a chordal
/// kd-tree fast path on the sphere. Reported distances always come from
/// the manifold metric, so tree and scan paths agree exactly.
struct NearestSet {
    kind: ManifoldKind,
    coords: Vec<f64>,
    tree: Option<KdTree3>,
}

impl NearestSet {
    fn new(kind: ManifoldKind, coords: Vec<f64>) -> NearestSet {
        let n = coords.len() / kind.ambient_dim();
        let tree = if kind == ManifoldKind::Sphere2 && n > TREE_CUTOFF {
            Some(KdTree3::build(
                coords.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
            ))
        } else {
            None
        };
        NearestSet { kind, coords, tree }
    }

    fn over_sample(sample: &Sample) -> NearestSet {
        NearestSet::new(sample.kind(), sample.coords().to_vec())
    }

    fn over_members(set: &GridSet) -> NearestSet {
        NearestSet::new(set.kind(), set.member_coords())
    }

    fn distance(&self, q: &[f64]) -> f64 {
        let d = self.kind.ambient_dim();
        if let Some(tree) = &self.tree {
            let (i, _) = tree
                .nearest(&[q[0], q[1], q[2]])
                .expect("nearest set is non-empty");
            return self.kind.distance(q, &self.coords[i * 3..i * 3 + 3]);
        }
        let mut best = f64::INFINITY;
        for p in self.coords.chunks_exact(d) {
            let dist = self.kind.distance(q, p);
            if dist < best {
                best = dist;
            }
        }
        best
    }
}
