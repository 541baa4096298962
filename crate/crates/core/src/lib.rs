//! Highest-density-region estimation on compact manifolds by
//! granulometric smoothing.
//!
//! Given points drawn from an unknown density on a circle, sphere, or flat
//! torus, the estimator recovers the region where the density exceeds a
//! threshold: score the points with a kernel density estimate, split them
//! at the threshold, discard high points that sit within `r_n` of a low
//! point, and take the union of geodesic `r_n`-balls around the survivors.
//! The result is a closed set that inherits the smoothing radius as a shape
//! guarantee, in contrast with plug-in level sets of the raw estimate.
//!
//! The crate is organized in layers:
//!
//! * [`manifold`]: manifold kinds, geodesic metrics, point and sample
//!   containers.
//! * [`grid`]: quasi-uniform discretization grids with probed dispersion.
//! * [`sample`]: seeded samplers (uniform, von Mises-Fisher, von Mises).
//! * [`density`]: mixtures, kernel density estimates, cross-validation.
//! * [`morphology`]: Minkowski dilation and erosion of discretized sets,
//!   Hausdorff and separation distances, ball unions.
//! * [`hdr`]: the region estimator itself, level (mass-target) selection,
//!   connected components.
//! * [`harness`]: seeded Monte Carlo studies with persisted records.
//! * [`pipeline`]: file formats and the bundled case-study ingestion.
//!
//! ```
//! use manifold_hdr::density::{Component, Mixture};
//! use manifold_hdr::density::{DensityModel, KernelConfig, KernelDensity};
//! use manifold_hdr::hdr::estimate_hdr_by_probability;
//!
//! // Draw from a bimodal density on the sphere, then recover the top-40%
//! // mass region from the sample alone.
//! let mixture = Mixture::new(vec![
//!     Component::vmf(0.5, vec![0.0, 0.0, 1.0], 8.0),
//!     Component::vmf(0.5, vec![1.0, 0.0, 0.0], 8.0),
//! ])?;
//! let points = mixture.sample(400, 7)?;
//! let family = KernelConfig::family_for(points.kind());
//! let kde = KernelDensity::new(points.clone(), KernelConfig::new(family, 25.0)?)?;
//! let est = estimate_hdr_by_probability(&points, &DensityModel::Kernel(kde), 0.4, 0.25)?;
//! assert!(!est.is_empty());
//! # Ok::<(), manifold_hdr::Error>(())
//! ```

pub mod density;
pub mod error;
pub mod grid;
pub mod harness;
pub mod hdr;
pub mod manifold;
pub mod morphology;
pub mod pipeline;
pub mod sample;
mod spatial;
mod special;

pub use error::{Error, Result};
pub use manifold::{ManifoldKind, ManifoldPoint, Sample};
