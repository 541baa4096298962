//! Quasi-uniform grids used to discretize continuous sets.
//!
//! The sphere uses a Fibonacci lattice, which stays near-uniform and avoids
//! the pole clustering of latitude-longitude grids. Circles, tori, and
//! bounded Euclidean boxes use equiangular or midpoint product grids. The
//! dispersion of a grid (the largest distance from any manifold point to its
//! nearest node) is estimated by seeded random probing rather than a closed
//! form, and is reported with every grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, TAU};
use crate::sample::uniform_coords;
use crate::spatial::KdTree3;

/// Number of random probes per grid node used for the dispersion estimate.
const DISPERSION_PROBES_PER_NODE: usize = 10;

/// Fixed stream for dispersion probing, so grids are reproducible values.
const DISPERSION_PROBE_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Requested grid: manifold, target node count, and, for Euclidean space,
/// the box to cover.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub kind: ManifoldKind,
    pub resolution: usize,
    pub bounding_box: Option<Vec<(f64, f64)>>,
}

impl GridSpec {
    pub fn new(kind: ManifoldKind, resolution: usize) -> GridSpec {
        GridSpec {
            kind,
            resolution,
            bounding_box: None,
        }
    }

    pub fn with_bounding_box(mut self, bbox: Vec<(f64, f64)>) -> GridSpec {
        self.bounding_box = Some(bbox);
        self
    }
}

/// Layout of the node buffer, used for fast nearest-node lookup.
#[derive(Debug, Clone)]
enum GridLayout {
    /// Per-axis node positions; nodes enumerated row-major.
    Product { axes: Vec<Axis> },
    /// Fibonacci lattice on the sphere with a chordal search tree.
    Fibonacci { tree: KdTree3 },
    /// Arbitrary point list; nearest-node queries scan all nodes.
    Free { tree: Option<KdTree3> },
}

#[derive(Debug, Clone)]
struct Axis {
    /// Node coordinates along this axis.
    nodes: Vec<f64>,
    /// Spacing between consecutive nodes.
    step: f64,
    /// Circular axes wrap; box axes clamp.
    wraps: bool,
    /// Lower edge for box axes (midpoint construction).
    origin: f64,
}

/// A built grid: node coordinates plus the probed dispersion.
#[derive(Debug, Clone)]
pub struct Grid {
    kind: ManifoldKind,
    dim: usize,
    coords: Vec<f64>,
    len: usize,
    dispersion: f64,
    bounding_box: Option<Vec<(f64, f64)>>,
    layout: GridLayout,
}

impl Grid {
    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Probed dispersion: estimated max distance from the manifold (or the
    /// bounding box) to the nearest node.
    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    pub fn bounding_box(&self) -> Option<&[(f64, f64)]> {
        self.bounding_box.as_deref()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Equal quadrature weight per node: total measure divided by node
    /// count. None for unbounded manifolds without a bounding box.
    pub fn quadrature_weight(&self) -> Option<f64> {
        let measure = match self.kind {
            ManifoldKind::Euclidean(_) => self
                .bounding_box
                .as_ref()
                .map(|b| b.iter().map(|(lo, hi)| hi - lo).product()),
            _ => self.kind.total_measure(),
        }?;
        Some(measure / self.len as f64)
    }

    /// Index of the nearest node and the geodesic distance to it.
    pub fn nearest_node(&self, q: &[f64]) -> (usize, f64) {
        debug_assert_eq!(q.len(), self.dim);
        let idx = match &self.layout {
            GridLayout::Product { axes } => {
                let mut idx = 0usize;
                for (k, axis) in axes.iter().enumerate() {
                    idx = idx * axis.nodes.len() + axis.nearest(q[k]);
                }
                idx
            }
            GridLayout::Fibonacci { tree } => {
                let (i, _) = tree
                    .nearest(&[q[0], q[1], q[2]])
                    .expect("fibonacci grid is never empty");
                i
            }
            GridLayout::Free { tree: Some(tree) } => {
                let (i, _) = tree.nearest(&[q[0], q[1], q[2]]).expect("non-empty");
                i
            }
            GridLayout::Free { tree: None } => {
                let mut best = (0usize, f64::INFINITY);
                for (i, node) in self.nodes().enumerate() {
                    let d = self.kind.distance(q, node);
                    if d < best.1 {
                        best = (i, d);
                    }
                }
                best.0
            }
        };
        (idx, self.kind.distance(q, self.node(idx)))
    }

    /// Indices of the nodes adjacent to node `i`. Product grids use the
    /// one-step axis neighbors (wrapping on circular axes, truncating at
    /// box edges); lattices without product structure use the six nearest
    /// nodes by geodesic distance.
    pub fn neighbor_indices(&self, i: usize) -> Vec<usize> {
        match &self.layout {
            GridLayout::Product { axes } => {
                // Decompose the row-major index into per-axis positions.
                let mut pos = vec![0usize; axes.len()];
                let mut rest = i;
                for (k, axis) in axes.iter().enumerate().rev() {
                    pos[k] = rest % axis.nodes.len();
                    rest /= axis.nodes.len();
                }
                let mut out = Vec::with_capacity(2 * axes.len());
                for (k, axis) in axes.iter().enumerate() {
                    let m = axis.nodes.len();
                    for delta in [-1i64, 1] {
                        let raw = pos[k] as i64 + delta;
                        let j = if axis.wraps {
                            raw.rem_euclid(m as i64) as usize
                        } else if raw < 0 || raw >= m as i64 {
                            continue;
                        } else {
                            raw as usize
                        };
                        if j == pos[k] {
                            continue; // two-node wrap axis folds onto itself
                        }
                        let mut flat = 0usize;
                        for (kk, ax) in axes.iter().enumerate() {
                            flat = flat * ax.nodes.len() + if kk == k { j } else { pos[kk] };
                        }
                        out.push(flat);
                    }
                }
                out.sort_unstable();
                out.dedup();
                out
            }
            GridLayout::Fibonacci { .. } | GridLayout::Free { .. } => {
                const K: usize = 6;
                let q = self.node(i);
                let mut best: Vec<(f64, usize)> = Vec::with_capacity(K + 1);
                for (j, node) in self.nodes().enumerate() {
                    if j == i {
                        continue;
                    }
                    let d = self.kind.distance(q, node);
                    let at = best.partition_point(|(bd, _)| *bd < d);
                    if at < K {
                        best.insert(at, (d, j));
                        best.truncate(K);
                    }
                }
                best.into_iter().map(|(_, j)| j).collect()
            }
        }
    }

    /// Wraps an arbitrary point list as a grid-like carrier set. The
    /// dispersion is taken as given (it has no intrinsic meaning for free
    /// point sets); pass 0 when unused.
    pub fn from_points(kind: ManifoldKind, points: Vec<Vec<f64>>, dispersion: f64) -> Result<Grid> {
        let dim = kind.ambient_dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for mut p in points {
            kind.canonicalize(&mut p)?;
            coords.extend_from_slice(&p);
        }
        let len = coords.len() / dim;
        let tree = match kind {
            ManifoldKind::Sphere2 if len > 32 => Some(build_tree(&coords)),
            _ => None,
        };
        Ok(Grid {
            kind,
            dim,
            coords,
            len,
            dispersion,
            bounding_box: None,
            layout: GridLayout::Free { tree },
        })
    }
}

impl Axis {
    fn nearest(&self, x: f64) -> usize {
        let m = self.nodes.len();
        if self.wraps {
            let j = (x / self.step).round() as i64;
            j.rem_euclid(m as i64) as usize
        } else {
            let j = ((x - self.origin) / self.step).floor() as i64;
            j.clamp(0, m as i64 - 1) as usize
        }
    }
}

/// Builds the grid requested by `spec` and probes its dispersion.
pub fn build_grid(spec: &GridSpec) -> Result<Grid> {
    if spec.resolution < 2 {
        return Err(Error::config("grid resolution must be at least 2"));
    }
    let kind = spec.kind;
    let dim = kind.ambient_dim();
    let mut grid = match kind {
        ManifoldKind::Circle => {
            let axis = circle_axis(spec.resolution);
            product_grid(kind, dim, vec![axis], None)
        }
        ManifoldKind::Torus(d) => {
            let per_axis = per_axis_count(spec.resolution, d);
            let axes = (0..d).map(|_| circle_axis(per_axis)).collect();
            product_grid(kind, dim, axes, None)
        }
        ManifoldKind::Euclidean(d) => {
            let bbox = spec.bounding_box.clone().ok_or_else(|| {
                Error::config("euclidean grids need a bounding box")
            })?;
            if bbox.len() != d {
                return Err(Error::config(format!(
                    "bounding box has {} axes, manifold has {d}",
                    bbox.len()
                )));
            }
            for (lo, hi) in &bbox {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::config("bounding box axes must satisfy lo < hi"));
                }
            }
            let per_axis = per_axis_count(spec.resolution, d);
            let axes = bbox
                .iter()
                .map(|&(lo, hi)| box_axis(lo, hi, per_axis))
                .collect();
            product_grid(kind, dim, axes, Some(bbox))
        }
        ManifoldKind::Sphere2 => fibonacci_grid(spec.resolution),
    };
    grid.dispersion = probe_dispersion(&grid);
    Ok(grid)
}

fn per_axis_count(resolution: usize, d: usize) -> usize {
    let m = (resolution as f64).powf(1.0 / d as f64).round() as usize;
    m.max(2)
}

fn circle_axis(m: usize) -> Axis {
    let step = TAU / m as f64;
    Axis {
        nodes: (0..m).map(|j| j as f64 * step).collect(),
        step,
        wraps: true,
        origin: 0.0,
    }
}

fn box_axis(lo: f64, hi: f64, m: usize) -> Axis {
    let step = (hi - lo) / m as f64;
    Axis {
        nodes: (0..m).map(|j| lo + (j as f64 + 0.5) * step).collect(),
        step,
        wraps: false,
        origin: lo,
    }
}

fn product_grid(
    kind: ManifoldKind,
    dim: usize,
    axes: Vec<Axis>,
    bounding_box: Option<Vec<(f64, f64)>>,
) -> Grid {
    let len: usize = axes.iter().map(|a| a.nodes.len()).product();
    let mut coords = Vec::with_capacity(len * dim);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..len {
        for (k, axis) in axes.iter().enumerate() {
            coords.push(axis.nodes[idx[k]]);
        }
        // Row-major increment, last axis fastest.
        for k in (0..axes.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].nodes.len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Grid {
        kind,
        dim,
        coords,
        len,
        dispersion: 0.0,
        bounding_box,
        layout: GridLayout::Product { axes },
    }
}

fn fibonacci_grid(n: usize) -> Grid {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let mut coords = Vec::with_capacity(3 * n);
    for i in 0..n {
        let z = 1.0 - (2 * i + 1) as f64 / n as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = (i as f64 * TAU / golden) % TAU;
        coords.push(r * phi.cos());
        coords.push(r * phi.sin());
        coords.push(z);
    }
    let tree = build_tree(&coords);
    Grid {
        kind: ManifoldKind::Sphere2,
        dim: 3,
        coords,
        len: n,
        dispersion: 0.0,
        bounding_box: None,
        layout: GridLayout::Fibonacci { tree },
    }
}

fn build_tree(coords: &[f64]) -> KdTree3 {
    KdTree3::build(
        coords
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect(),
    )
}

fn probe_dispersion(grid: &Grid) -> f64 {
    let probes = grid.len * DISPERSION_PROBES_PER_NODE;
    let bbox = grid.bounding_box.as_deref();
    let chunk = 4096;
    (0..probes.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(DISPERSION_PROBE_SEED ^ c as u64);
            let lo = c * chunk;
            let hi = (lo + chunk).min(probes);
            let mut q = vec![0.0; grid.dim];
            let mut worst = 0.0f64;
            for _ in lo..hi {
                uniform_coords(grid.kind, bbox, &mut rng, &mut q);
                let (_, d) = grid.nearest_node(&q);
                worst = worst.max(d);
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}
