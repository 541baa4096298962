//! Supported manifolds, their geodesic metrics, and validated points.
//!
//! Four manifold families are supported: the unit circle (angles), the unit
//! sphere in R^3 (embedded unit vectors), flat d-dimensional tori (angle
//! tuples with the product metric), and d-dimensional Euclidean space.
//! Angles are kept in the canonical range [0, 2pi); sphere vectors are
//! renormalized on construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const TAU: f64 = std::f64::consts::TAU;
pub const PI: f64 = std::f64::consts::PI;

/// Largest tolerated deviation of a sphere vector's norm from 1 before the
/// input is rejected instead of renormalized.
pub const SPHERE_NORM_TOLERANCE: f64 = 1e-6;

/// Tag identifying one of the supported manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    /// Unit circle; points are single angles.
    Circle,
    /// Unit sphere in R^3; points are embedded unit vectors.
    Sphere2,
    /// Flat d-torus; points are d angles with the product metric.
    Torus(usize),
    /// Euclidean d-space.
    Euclidean(usize),
}

impl ManifoldKind {
    /// Number of coordinates used to store a point.
    pub fn ambient_dim(&self) -> usize {
        match self {
            ManifoldKind::Circle => 1,
            ManifoldKind::Sphere2 => 3,
            ManifoldKind::Torus(d) | ManifoldKind::Euclidean(d) => *d,
        }
    }

    /// Intrinsic dimension of the manifold.
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            ManifoldKind::Circle => 1,
            ManifoldKind::Sphere2 => 2,
            ManifoldKind::Torus(d) | ManifoldKind::Euclidean(d) => *d,
        }
    }

    /// Geodesic diameter, if the manifold is bounded.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            ManifoldKind::Circle | ManifoldKind::Sphere2 => Some(PI),
            ManifoldKind::Torus(d) => Some(PI * (*d as f64).sqrt()),
            ManifoldKind::Euclidean(_) => None,
        }
    }

    /// Total volume (length, area) of the manifold, if finite.
    pub fn total_measure(&self) -> Option<f64> {
        match self {
            ManifoldKind::Circle => Some(TAU),
            ManifoldKind::Sphere2 => Some(4.0 * PI),
            ManifoldKind::Torus(d) => Some(TAU.powi(*d as i32)),
            ManifoldKind::Euclidean(_) => None,
        }
    }

    /// Geodesic distance between two coordinate slices of this manifold.
    ///
    /// Coordinates are assumed valid (see [`ManifoldPoint::new`]); lengths
    /// are only checked in debug builds. The implementation is bitwise
    /// symmetric in its arguments.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.ambient_dim());
        debug_assert_eq!(b.len(), self.ambient_dim());
        // Exact zero on identical coordinates. Without this the sphere
        // metric returns ~1e-8 for a point against itself whenever its
        // stored norm is an ulp below 1 (acos is that steep at 1).
        if a == b {
            return 0.0;
        }
        match self {
            ManifoldKind::Circle => circle_distance(a[0], b[0]),
            ManifoldKind::Sphere2 => {
                let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                dot.clamp(-1.0, 1.0).acos()
            }
            ManifoldKind::Torus(_) => {
                let mut acc = 0.0;
                for (x, y) in a.iter().zip(b) {
                    let w = circle_distance(*x, *y);
                    acc += w * w;
                }
                acc.sqrt()
            }
            ManifoldKind::Euclidean(_) => {
                let mut acc = 0.0;
                for (x, y) in a.iter().zip(b) {
                    let w = x - y;
                    acc += w * w;
                }
                acc.sqrt()
            }
        }
    }

    /// Checks a coordinate slice and brings it to canonical form in place:
    /// angles are wrapped into [0, 2pi), sphere vectors are renormalized.
    pub fn canonicalize(&self, coords: &mut [f64]) -> Result<()> {
        if coords.len() != self.ambient_dim() {
            return Err(Error::domain(format!(
                "{} point needs {} coordinates, got {}",
                self,
                self.ambient_dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(format!("non-finite coordinate on {self}")));
        }
        match self {
            ManifoldKind::Circle | ManifoldKind::Torus(_) => {
                for c in coords.iter_mut() {
                    *c = wrap_angle(*c);
                }
            }
            ManifoldKind::Sphere2 => {
                let norm = (coords[0] * coords[0]
                    + coords[1] * coords[1]
                    + coords[2] * coords[2])
                    .sqrt();
                if (norm - 1.0).abs() > SPHERE_NORM_TOLERANCE {
                    return Err(Error::domain(format!(
                        "sphere vector norm {norm} is not within {SPHERE_NORM_TOLERANCE} of 1"
                    )));
                }
                // Dividing by a norm that is already 1 to machine precision
                // would shuffle the last ulp, so canonicalization of an
                // already canonical vector would not be the identity and
                // file round trips would not be byte-stable.
                if (norm - 1.0).abs() > 4.0 * f64::EPSILON {
                    for c in coords.iter_mut() {
                        *c /= norm;
                    }
                }
            }
            ManifoldKind::Euclidean(_) => {}
        }
        Ok(())
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Circle => write!(f, "circle"),
            ManifoldKind::Sphere2 => write!(f, "sphere2"),
            ManifoldKind::Torus(d) => write!(f, "torus{d}"),
            ManifoldKind::Euclidean(d) => write!(f, "euclidean{d}"),
        }
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "circle" {
            return Ok(ManifoldKind::Circle);
        }
        if s == "sphere2" {
            return Ok(ManifoldKind::Sphere2);
        }
        let parse_dim = |rest: &str, what: &str| -> Result<usize> {
            let d: usize = rest
                .parse()
                .map_err(|_| Error::config(format!("bad {what} dimension in manifold tag {s:?}")))?;
            if d == 0 {
                return Err(Error::config(format!("{what} dimension must be at least 1")));
            }
            Ok(d)
        };
        if let Some(rest) = s.strip_prefix("torus") {
            return Ok(ManifoldKind::Torus(parse_dim(rest, "torus")?));
        }
        if let Some(rest) = s.strip_prefix("euclidean") {
            return Ok(ManifoldKind::Euclidean(parse_dim(rest, "euclidean")?));
        }
        Err(Error::config(format!("unknown manifold tag {s:?}")))
    }
}

impl Serialize for ManifoldKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ManifoldKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Wraps an angle into [0, 2pi).
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can return exactly TAU when theta is a tiny negative number.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Arc distance between two angles, in [0, pi].
fn circle_distance(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs() % TAU;
    diff.min(TAU - diff)
}

/// A validated point on one of the supported manifolds.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    kind: ManifoldKind,
    coords: Vec<f64>,
}

impl ManifoldPoint {
    /// Builds a point, canonicalizing the coordinates.
    pub fn new(kind: ManifoldKind, mut coords: Vec<f64>) -> Result<Self> {
        kind.canonicalize(&mut coords)?;
        Ok(ManifoldPoint { kind, coords })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Geodesic distance to another point of the same manifold.
    pub fn distance_to(&self, other: &ManifoldPoint) -> Result<f64> {
        if self.kind != other.kind {
            return Err(Error::domain(format!(
                "manifold mismatch: {} vs {}",
                self.kind, other.kind
            )));
        }
        Ok(self.kind.distance(&self.coords, &other.coords))
    }
}

/// Geodesic distance between two points of the same manifold.
pub fn geodesic_distance(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
    x.distance_to(y)
}

/// A list of points sharing one manifold, stored as a flat coordinate buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    kind: ManifoldKind,
    coords: Vec<f64>,
}

impl Sample {
    pub fn new(kind: ManifoldKind) -> Self {
        Sample {
            kind,
            coords: Vec::new(),
        }
    }

    pub fn with_capacity(kind: ManifoldKind, n: usize) -> Self {
        Sample {
            kind,
            coords: Vec::with_capacity(n * kind.ambient_dim()),
        }
    }

    /// Builds a sample from per-point coordinate vectors, validating each.
    pub fn from_coords(kind: ManifoldKind, points: &[Vec<f64>]) -> Result<Self> {
        let mut sample = Sample::with_capacity(kind, points.len());
        for p in points {
            sample.push(p)?;
        }
        Ok(sample)
    }

    /// Appends one point, canonicalizing its coordinates.
    pub fn push(&mut self, coords: &[f64]) -> Result<()> {
        let mut c = coords.to_vec();
        self.kind.canonicalize(&mut c)?;
        self.coords.extend_from_slice(&c);
        Ok(())
    }

    /// Appends coordinates already known to be canonical.
    pub(crate) fn push_canonical(&mut self, coords: &[f64]) {
        debug_assert_eq!(coords.len(), self.kind.ambient_dim());
        self.coords.extend_from_slice(coords);
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Flat coordinate buffer, `len * ambient_dim` values in point order.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        if self.coords.is_empty() {
            0
        } else {
            self.coords.len() / self.kind.ambient_dim()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let dim = self.kind.ambient_dim();
        &self.coords[i * dim..(i + 1) * dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.kind.ambient_dim())
    }

    /// Sample restricted to the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Sample {
        let mut out = Sample::with_capacity(self.kind, indices.len());
        for &i in indices {
            out.push_canonical(self.point(i));
        }
        out
    }

    /// First n points of the sample.
    pub fn prefix(&self, n: usize) -> Sample {
        let dim = self.kind.ambient_dim();
        Sample {
            kind: self.kind,
            coords: self.coords[..n * dim].to_vec(),
        }
    }

    pub fn to_points(&self) -> Vec<ManifoldPoint> {
        self.iter()
            .map(|c| ManifoldPoint {
                kind: self.kind,
                coords: c.to_vec(),
            })
            .collect()
    }
}
