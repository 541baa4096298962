//! On-disk formats and case-study ingestion.
//!
//! Samples travel as CSV (`manifold,dim,c1..ck`, angles in radians, full
//! float precision) or as a bare JSON array of coordinate arrays. Estimates
//! export as JSON with per-center component labels; grids and densities as
//! two-to-five column CSVs meant for external plotting.
//!
//! Two ingestion routines cover the bundled case studies: cometary orbit
//! normals on the sphere (from inclination and ascending-node angles) and
//! paired circadian phases on the torus (from hour-valued columns).

use std::collections::HashSet;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density::Mixture;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hdr::{connected_components, HdrEstimate};
use crate::manifold::{ManifoldKind, Sample, TAU};
use crate::morphology::{BallUnionSet, GridSet};
use crate::sample::orthonormal_basis;

/// Unit of the angular columns in an orbit file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Degrees,
    Radians,
}

impl AngleUnit {
    fn to_radians(self, v: f64) -> f64 {
        match self {
            AngleUnit::Degrees => v.to_radians(),
            AngleUnit::Radians => v,
        }
    }

    /// (inclination, node) ranges in this unit: i in [0, half turn],
    /// node in [0, full turn).
    fn ranges(self) -> ((f64, f64), (f64, f64)) {
        match self {
            AngleUnit::Degrees => ((0.0, 180.0), (0.0, 360.0)),
            AngleUnit::Radians => ((0.0, crate::manifold::PI), (0.0, TAU)),
        }
    }
}

impl std::str::FromStr for AngleUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<AngleUnit> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deg" | "degree" | "degrees" => Ok(AngleUnit::Degrees),
            "rad" | "radian" | "radians" => Ok(AngleUnit::Radians),
            other => Err(Error::config(format!("unknown angle unit {other:?}"))),
        }
    }
}

/// Orbit normal for inclination `i` and ascending node `om`, both radians.
pub fn orbit_normal(i: f64, om: f64) -> [f64; 3] {
    [i.sin() * om.sin(), -i.sin() * om.cos(), i.cos()]
}

fn find_column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.contains(&h.trim().to_ascii_lowercase().as_str()))
}

/// Reads an orbit CSV (columns for inclination and ascending node, named
/// `i`/`incl`/`inclination` and `om`/`omega`/`node`) into unit normal
/// vectors on the sphere. Rows equal after rounding both angles to two
/// decimals in the source unit are dropped as duplicates.
pub fn ingest_comets<P: AsRef<Path>>(path: P, unit: AngleUnit) -> Result<Sample> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let col_i = find_column(&headers, &["i", "incl", "inclination"])
        .ok_or_else(|| Error::ingestion("no inclination column (expected `i`)"))?;
    let col_om = find_column(&headers, &["om", "omega", "node", "ascending_node"])
        .ok_or_else(|| Error::ingestion("no ascending-node column (expected `om`)"))?;
    let ((i_lo, i_hi), (om_lo, om_hi)) = unit.ranges();
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let mut out = Sample::new(ManifoldKind::Sphere2);
    for (row, record) in reader.records().enumerate() {
        let row = row + 1; // 1-based data rows, matching spreadsheet views
        let record = record?;
        let parse = |col: usize, name: &str| -> Result<f64> {
            let field = record.get(col).ok_or_else(|| {
                Error::ingestion(format!("row {row}: missing {name} field"))
            })?;
            field.trim().parse::<f64>().map_err(|_| {
                Error::ingestion(format!("row {row}: {name} is not a number: {field:?}"))
            })
        };
        let i = parse(col_i, "inclination")?;
        let om = parse(col_om, "node")?;
        if !(i >= i_lo && i <= i_hi) {
            return Err(Error::ingestion(format!(
                "row {row}: inclination {i} outside [{i_lo}, {i_hi}]"
            )));
        }
        if !(om >= om_lo && om < om_hi) {
            return Err(Error::ingestion(format!(
                "row {row}: ascending node {om} outside [{om_lo}, {om_hi})"
            )));
        }
        // Duplicate key: both angles to two decimals, in the source unit.
        let key = ((i * 100.0).round() as i64, (om * 100.0).round() as i64);
        if !seen.insert(key) {
            continue;
        }
        let v = orbit_normal(unit.to_radians(i), unit.to_radians(om));
        out.push(&v)?;
    }
    Ok(out)
}

/// Reads paired phases in hours (columns `heart`/`liver` when present,
/// otherwise the first two columns) into torus angles 2 pi h / 24. Hours
/// wrap modulo 24.
pub fn ingest_phases<P: AsRef<Path>>(path: P) -> Result<Sample> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let col_a = find_column(&headers, &["heart", "phase1", "phase_a"]);
    let col_b = find_column(&headers, &["liver", "phase2", "phase_b"]);
    let (col_a, col_b) = match (col_a, col_b) {
        (Some(a), Some(b)) => (a, b),
        _ if headers.len() >= 2 => (0, 1),
        _ => return Err(Error::ingestion("phase file needs two columns")),
    };
    let mut out = Sample::new(ManifoldKind::Torus(2));
    for (row, record) in reader.records().enumerate() {
        let row = row + 1;
        let record = record?;
        let parse = |col: usize| -> Result<f64> {
            let field = record.get(col).ok_or_else(|| {
                Error::ingestion(format!("row {row}: missing phase field"))
            })?;
            field.trim().parse::<f64>().map_err(|_| {
                Error::ingestion(format!("row {row}: phase is not a number: {field:?}"))
            })
        };
        let hours_a = parse(col_a)?.rem_euclid(24.0);
        let hours_b = parse(col_b)?.rem_euclid(24.0);
        out.push(&[TAU * hours_a / 24.0, TAU * hours_b / 24.0])?;
    }
    Ok(out)
}

/// Writes a sample as CSV with header `manifold,dim,c1..ck`. Coordinates
/// are printed with 17 significant digits, which round-trips every f64.
pub fn write_sample_csv<P: AsRef<Path>>(path: P, sample: &Sample) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    let kind = sample.kind();
    let k = kind.ambient_dim();
    let mut header = vec!["manifold".to_string(), "dim".to_string()];
    header.extend((1..=k).map(|j| format!("c{j}")));
    w.write_record(&header)?;
    let tag = kind.to_string();
    let dim = kind.intrinsic_dim().to_string();
    for point in sample.iter() {
        let mut record = Vec::with_capacity(2 + k);
        record.push(tag.clone());
        record.push(dim.clone());
        record.extend(point.iter().map(|c| format!("{c:.16e}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample CSV written by [`write_sample_csv`] (or hand-assembled
/// to the same shape). All rows must carry the same manifold tag.
pub fn read_sample_csv<P: AsRef<Path>>(path: P) -> Result<Sample> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.len() < 3 || &headers[0] != "manifold" || &headers[1] != "dim" {
        return Err(Error::ingestion(
            "sample CSV must start with columns manifold,dim,c1..",
        ));
    }
    let mut out: Option<Sample> = None;
    for (row, record) in reader.records().enumerate() {
        let row = row + 1;
        let record = record?;
        let kind: ManifoldKind = record
            .get(0)
            .ok_or_else(|| Error::ingestion(format!("row {row}: missing manifold tag")))?
            .parse()?;
        let sample = out.get_or_insert_with(|| Sample::new(kind));
        if sample.kind() != kind {
            return Err(Error::ingestion(format!(
                "row {row}: manifold tag changed from {} to {kind}",
                sample.kind()
            )));
        }
        let k = kind.ambient_dim();
        if record.len() != 2 + k {
            return Err(Error::ingestion(format!(
                "row {row}: expected {} coordinates, found {}",
                k,
                record.len().saturating_sub(2)
            )));
        }
        let mut coords = Vec::with_capacity(k);
        for j in 0..k {
            let field = &record[2 + j];
            coords.push(field.trim().parse::<f64>().map_err(|_| {
                Error::ingestion(format!("row {row}: bad coordinate {field:?}"))
            })?);
        }
        sample.push(&coords)?;
    }
    out.ok_or_else(|| Error::ingestion("sample CSV has no data rows"))
}

/// Writes a sample as a bare JSON array of coordinate arrays.
pub fn write_sample_json<P: AsRef<Path>>(path: P, sample: &Sample) -> Result<()> {
    let rows: Vec<&[f64]> = sample.iter().collect();
    let mut file = std::fs::File::create(path.as_ref())?;
    serde_json::to_writer(&mut file, &rows)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Reads a bare JSON array of coordinate arrays. The manifold is supplied
/// by the caller because the array format does not carry it.
pub fn read_sample_json<P: AsRef<Path>>(path: P, kind: ManifoldKind) -> Result<Sample> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)?;
    let mut out = Sample::new(kind);
    for row in &rows {
        out.push(row)?;
    }
    Ok(out)
}

/// Serialized form of an estimate: threshold, ball radius, centers, and a
/// component label per center.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateDoc {
    pub manifold: ManifoldKind,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub radius: f64,
    pub centers: Vec<Vec<f64>>,
    pub component_labels: Vec<usize>,
    pub empty: bool,
}

impl EstimateDoc {
    pub fn from_estimate(est: &HdrEstimate) -> EstimateDoc {
        let (_, component_labels) = connected_components(est);
        EstimateDoc {
            manifold: est.kind(),
            lambda: est.lambda(),
            gamma: est.gamma(),
            radius: est.radius(),
            centers: est.set().centers().iter().map(<[f64]>::to_vec).collect(),
            component_labels,
            empty: est.is_empty(),
        }
    }

    /// Number of connected components recorded in the document.
    pub fn component_count(&self) -> usize {
        self.component_labels
            .iter()
            .copied()
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Rebuilds the geometric region (the labels and thresholds are kept
    /// only as metadata).
    pub fn ball_union(&self) -> Result<BallUnionSet> {
        let mut centers = Sample::new(self.manifold);
        for c in &self.centers {
            centers.push(c)?;
        }
        BallUnionSet::new(centers, self.radius)
    }
}

pub fn write_estimate_json<P: AsRef<Path>>(path: P, est: &HdrEstimate) -> Result<()> {
    let doc = EstimateDoc::from_estimate(est);
    let mut file = std::fs::File::create(path.as_ref())?;
    serde_json::to_writer_pretty(&mut file, &doc)?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn read_estimate_json<P: AsRef<Path>>(path: P) -> Result<EstimateDoc> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}

/// Serialized ball union: `{manifold, radius, centers}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallUnionDoc {
    pub manifold: ManifoldKind,
    pub radius: f64,
    pub centers: Vec<Vec<f64>>,
}

impl BallUnionDoc {
    pub fn from_set(set: &BallUnionSet) -> BallUnionDoc {
        BallUnionDoc {
            manifold: set.kind(),
            radius: set.radius(),
            centers: set.centers().iter().map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn into_set(self) -> Result<BallUnionSet> {
        let mut centers = Sample::new(self.manifold);
        for c in &self.centers {
            centers.push(c)?;
        }
        BallUnionSet::new(centers, self.radius)
    }
}

/// Writes a grid set as CSV `node_index,c1..ck,member`.
pub fn write_grid_set_csv<P: AsRef<Path>>(path: P, set: &GridSet) -> Result<()> {
    let grid = set.grid();
    let k = grid.kind().ambient_dim();
    let mut w = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["node_index".to_string()];
    header.extend((1..=k).map(|j| format!("c{j}")));
    header.push("member".to_string());
    w.write_record(&header)?;
    for (i, node) in grid.nodes().enumerate() {
        let mut record = Vec::with_capacity(k + 2);
        record.push(i.to_string());
        record.extend(node.iter().map(|c| format!("{c:.16e}")));
        record.push(set.mask()[i].to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes grid-evaluated density values as CSV `node_index,value`.
pub fn write_density_csv<P: AsRef<Path>>(path: P, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["node_index", "value"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a mixture description from JSON.
pub fn read_mixture_json<P: AsRef<Path>>(path: P) -> Result<Mixture> {
    let text = std::fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}

/// Exports the boundary of a discretized set: every node with at least one
/// neighbor of opposite membership, one CSV row each. Sphere grids gain
/// longitude/latitude columns and an orthographic projection about
/// `center` (default: the north pole); `front` marks the visible
/// hemisphere. Returns the number of boundary nodes written.
pub fn export_boundary<P: AsRef<Path>>(
    path: P,
    set: &GridSet,
    center: Option<&[f64]>,
) -> Result<usize> {
    let grid = set.grid();
    let kind = grid.kind();
    let k = kind.ambient_dim();
    let mask = set.mask();
    let sphere = kind == ManifoldKind::Sphere2;
    let frame = if sphere {
        let c = match center {
            Some(c) => {
                if c.len() != 3 {
                    return Err(Error::config("projection center must have 3 coordinates"));
                }
                let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::config("projection center must be a nonzero vector"));
                }
                [c[0] / norm, c[1] / norm, c[2] / norm]
            }
            None => [0.0, 0.0, 1.0],
        };
        let (e1, e2) = orthonormal_basis(&c);
        Some((c, e1, e2))
    } else {
        None
    };

    let mut w = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["node_index".to_string()];
    header.extend((1..=k).map(|j| format!("c{j}")));
    header.push("member".to_string());
    if sphere {
        for extra in ["lon", "lat", "ortho_x", "ortho_y", "front"] {
            header.push(extra.to_string());
        }
    }
    w.write_record(&header)?;

    let mut written = 0usize;
    for i in 0..grid.len() {
        let is_boundary = grid
            .neighbor_indices(i)
            .iter()
            .any(|&j| mask[j] != mask[i]);
        if !is_boundary {
            continue;
        }
        let node = grid.node(i);
        let mut record = Vec::with_capacity(header.len());
        record.push(i.to_string());
        record.extend(node.iter().map(|c| format!("{c:.16e}")));
        record.push(mask[i].to_string());
        if let Some((c, e1, e2)) = &frame {
            let lon = node[1].atan2(node[0]).rem_euclid(TAU);
            let lat = node[2].clamp(-1.0, 1.0).asin();
            let dot = |a: &[f64]| a[0] * node[0] + a[1] * node[1] + a[2] * node[2];
            record.push(format!("{lon:.16e}"));
            record.push(format!("{lat:.16e}"));
            record.push(format!("{:.16e}", dot(e1)));
            record.push(format!("{:.16e}", dot(e2)));
            record.push((dot(c) >= 0.0).to_string());
        }
        w.write_record(&record)?;
        written += 1;
    }
    w.flush()?;
    Ok(written)
}

/// Writes the bare node coordinates of a grid, for joining against the
/// `node_index` column of density or membership exports.
pub fn grid_nodes_csv<P: AsRef<Path>>(path: P, grid: &Grid) -> Result<()> {
    let k = grid.kind().ambient_dim();
    let mut w = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["node_index".to_string()];
    header.extend((1..=k).map(|j| format!("c{j}")));
    w.write_record(&header)?;
    for (i, node) in grid.nodes().enumerate() {
        let mut record = Vec::with_capacity(k + 1);
        record.push(i.to_string());
        record.extend(node.iter().map(|c| format!("{c:.16e}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};
    use crate::manifold::PI;
    use std::sync::Arc;

    fn write_lines(path: &Path, lines: &[&str]) {
        std::fs::write(path, lines.join("\n")).unwrap();
    }

    #[test]
    fn orbit_normal_axis_cases() {
        // i = 90 deg, node = 90 deg points along +x.
        let v = orbit_normal(PI / 2.0, PI / 2.0);
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!(v[1].abs() < 1e-15);
        assert!(v[2].abs() < 1e-15);
        // Zero inclination collapses to the pole for any node angle.
        for om in [0.0, 1.0, 2.0, 5.0] {
            let v = orbit_normal(0.0, om);
            assert_eq!(v[2], 1.0);
            assert_eq!(v[0], 0.0);
            assert_eq!(v[1], 0.0);
        }
    }

    #[test]
    fn comet_ingestion_dedups_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("orbits.csv");
        write_lines(
            &path,
            &[
                "designation,i,om",
                "a,90.0,90.0",
                "b,90.001,90.004", // same to 2 decimals: duplicate
                "c,45.0,180.0",
                "d,45.006,180.0", // 45.01 != 45.00: kept
            ],
        );
        let sample = ingest_comets(&path, AngleUnit::Degrees).unwrap();
        assert_eq!(sample.len(), 3);
        let first = sample.point(0);
        assert!((first[0] - 1.0).abs() < 1e-12);

        let bad = dir.path().join("bad.csv");
        write_lines(&bad, &["i,om", "90,360.0"]);
        let err = ingest_comets(&bad, AngleUnit::Degrees).unwrap_err();
        assert!(err.to_string().contains("row 1"));

        let missing = dir.path().join("missing.csv");
        write_lines(&missing, &["x,y", "1,2"]);
        assert!(ingest_comets(&missing, AngleUnit::Degrees).is_err());
    }

    #[test]
    fn comet_ingestion_in_radians() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("orbits.csv");
        write_lines(&path, &["i,om", "1.5707963267948966,1.5707963267948966"]);
        let sample = ingest_comets(&path, AngleUnit::Radians).unwrap();
        assert!((sample.point(0)[0] - 1.0).abs() < 1e-12);
        // 3.2 radians exceeds pi: rejected in radian mode.
        write_lines(&path, &["i,om", "3.2,0.0"]);
        assert!(ingest_comets(&path, AngleUnit::Radians).is_err());
    }

    #[test]
    fn phase_ingestion_maps_hours_to_angles() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phases.csv");
        write_lines(
            &path,
            &["gene,heart,liver", "g1,0,0", "g2,12,12", "g3,30,-6"],
        );
        let sample = ingest_phases(&path).unwrap();
        assert_eq!(sample.len(), 3);
        assert_eq!(sample.point(0), &[0.0, 0.0]);
        assert!((sample.point(1)[0] - PI).abs() < 1e-15);
        assert!((sample.point(1)[1] - PI).abs() < 1e-15);
        // 30 h wraps to 6 h, -6 h wraps to 18 h.
        assert!((sample.point(2)[0] - PI / 2.0).abs() < 1e-15);
        assert!((sample.point(2)[1] - 3.0 * PI / 2.0).abs() < 1e-15);

        write_lines(&path, &["heart,liver", "1,abc"]);
        let err = ingest_phases(&path).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn sample_csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sample.csv");
        let mixture = Mixture::new(vec![crate::density::Component::vmf(
            1.0,
            vec![0.0, 0.0, 1.0],
            4.0,
        )])
        .unwrap();
        let sample = mixture.sample(50, 7).unwrap();
        write_sample_csv(&path, &sample).unwrap();
        let back = read_sample_csv(&path).unwrap();
        assert_eq!(back.kind(), sample.kind());
        assert_eq!(back.len(), sample.len());
        for (a, b) in sample.coords().iter().zip(back.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
        // Second generation: write the re-read sample, byte-compare.
        let path2 = dir.path().join("sample2.csv");
        write_sample_csv(&path2, &back).unwrap();
        let text1 = std::fs::read_to_string(&path).unwrap();
        let text2 = std::fs::read_to_string(&path2).unwrap();
        assert_eq!(text1, text2);
    }

    #[test]
    fn sample_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sample.json");
        let mut sample = Sample::new(ManifoldKind::Torus(2));
        sample.push(&[0.5, 1.5]).unwrap();
        sample.push(&[3.0, 6.0]).unwrap();
        write_sample_json(&path, &sample).unwrap();
        let back = read_sample_json(&path, ManifoldKind::Torus(2)).unwrap();
        assert_eq!(back.coords(), sample.coords());
    }

    #[test]
    fn sample_csv_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        write_lines(&path, &["x,y,z", "1,2,3"]);
        assert!(read_sample_csv(&path).is_err());
        write_lines(&path, &["manifold,dim,c1", "circle,1,0.5", "torus2,2,0.5"]);
        assert!(read_sample_csv(&path).is_err());
        write_lines(&path, &["manifold,dim,c1", "circle,1,abc"]);
        assert!(read_sample_csv(&path).is_err());
        write_lines(&path, &["manifold,dim,c1"]);
        assert!(read_sample_csv(&path).is_err());
    }

    #[test]
    fn estimate_doc_round_trip() {
        use crate::hdr::{estimate_hdr, split_sample_with_values};
        let mut pts = Sample::new(ManifoldKind::Circle);
        for a in [0.0, 0.1, 3.0, 3.05] {
            pts.push(&[a]).unwrap();
        }
        let labeled =
            split_sample_with_values(&pts, vec![1.0, 1.0, 1.0, 0.1], 0.5).unwrap();
        let est = estimate_hdr(&labeled, 0.3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("estimate.json");
        write_estimate_json(&path, &est).unwrap();
        let doc = read_estimate_json(&path).unwrap();
        assert_eq!(doc.manifold, ManifoldKind::Circle);
        assert_eq!(doc.lambda, 0.5);
        assert_eq!(doc.gamma, None);
        assert!(!doc.empty);
        // 3.0 sits within 0.3 of the minus point 3.05? No: |3.0-3.05| =
        // 0.05 <= 0.3, so 3.0 is erased; 0.0 and 0.1 remain, one cluster.
        assert_eq!(doc.centers.len(), 2);
        assert_eq!(doc.component_count(), 1);
        let set = doc.ball_union().unwrap();
        assert!(set.contains(&[0.05]));
        assert!(!set.contains(&[1.5]));
    }

    #[test]
    fn ball_union_doc_round_trip() {
        let mut centers = Sample::new(ManifoldKind::Sphere2);
        centers.push(&[0.0, 0.0, 1.0]).unwrap();
        let set = BallUnionSet::new(centers, 0.4).unwrap();
        let doc = BallUnionDoc::from_set(&set);
        let json = serde_json::to_string(&doc).unwrap();
        let back: BallUnionDoc = serde_json::from_str(&json).unwrap();
        let rebuilt = back.into_set().unwrap();
        assert_eq!(rebuilt.radius(), 0.4);
        assert!(rebuilt.contains(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn grid_set_and_density_csv_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Arc::new(build_grid(&GridSpec::new(ManifoldKind::Circle, 8)).unwrap());
        let set = GridSet::from_predicate(grid.clone(), |node| node[0] < PI);
        let path = dir.path().join("set.csv");
        write_grid_set_csv(&path, &set).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "node_index,c1,member");
        assert!(lines[1].ends_with(",true"));

        let dpath = dir.path().join("density.csv");
        write_density_csv(&dpath, &[0.25, 0.5]).unwrap();
        let text = std::fs::read_to_string(&dpath).unwrap();
        assert!(text.starts_with("node_index,value\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn boundary_export_flags_flips() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Arc::new(build_grid(&GridSpec::new(ManifoldKind::Circle, 16)).unwrap());
        // Half circle: two boundary transitions, four flagged nodes (the
        // member and non-member side of each flip).
        let set = GridSet::from_predicate(grid.clone(), |node| node[0] < PI);
        let path = dir.path().join("boundary.csv");
        let count = export_boundary(&path, &set, None).unwrap();
        assert_eq!(count, 4);

        // Full and empty sets have no boundary.
        let full = GridSet::full(grid.clone());
        assert_eq!(export_boundary(&path, &full, None).unwrap(), 0);
    }

    #[test]
    fn boundary_export_sphere_projection_columns() {
        let dir = tempfile::tempdir().unwrap();
        let grid =
            Arc::new(build_grid(&GridSpec::new(ManifoldKind::Sphere2, 500)).unwrap());
        let set = GridSet::from_predicate(grid.clone(), |node| node[2] > 0.3);
        let path = dir.path().join("cap.csv");
        let count = export_boundary(&path, &set, None).unwrap();
        assert!(count > 0);
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "node_index,c1,c2,c3,member,lon,lat,ortho_x,ortho_y,front"
        );
        // Cap boundary sits near z = 0.3: latitude near asin(0.3).
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            let lat: f64 = fields[6].parse().unwrap();
            assert!((lat - 0.3f64.asin()).abs() < 0.25, "stray latitude {lat}");
            assert_eq!(fields[9], "true"); // north-pole view sees the cap rim
        }
        // Center override must be a usable vector.
        assert!(export_boundary(&path, &set, Some(&[0.0, 0.0])).is_err());
        assert!(export_boundary(&path, &set, Some(&[0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn angle_unit_parses() {
        assert_eq!("deg".parse::<AngleUnit>().unwrap(), AngleUnit::Degrees);
        assert_eq!("RADIANS".parse::<AngleUnit>().unwrap(), AngleUnit::Radians);
        assert!("grad".parse::<AngleUnit>().is_err());
    }
}
