//! Point-cloud model, CSV I/O, and seeded generators for synthetic datasets.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// A finite set of d-dimensional points, d in {2, 3}. Coordinates are stored
/// flat, point-major, and are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "coordinate buffer length {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate {bad}"
            )));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = Vec<f64>>) -> Result<Self> {
        let mut coords = Vec::new();
        for (i, p) in points.into_iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend(p);
        }
        PointCloud::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Concatenate several clouds of the same dimension.
    pub fn concat(clouds: &[PointCloud]) -> Result<Self> {
        let dim = clouds
            .first()
            .ok_or(Error::EmptyCloud)?
            .dim;
        let mut coords = Vec::new();
        for c in clouds {
            if c.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.dim,
                });
            }
            coords.extend_from_slice(&c.coords);
        }
        PointCloud::new(dim, coords)
    }

    /// Translate every point by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: offset.len(),
            });
        }
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| c + offset[i % self.dim])
            .collect();
        PointCloud::new(self.dim, coords)
    }
}

/// Axis-aligned box with strictly positive extent on every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for i in 0..lower.len() {
            if !(lower[i] < upper[i]) {
                return Err(Error::DegenerateAxis(format!(
                    "axis {i}: lower {} must be < upper {}",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(BoundingBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .enumerate()
            .all(|(i, &c)| self.lower[i] <= c && c <= self.upper[i])
    }
}

/// Noise model for circle generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpec {
    None,
    /// Radial Gaussian perturbation with the given standard deviation.
    GaussianRadial { sd: f64 },
    /// `n_in` points at radius r*(1 - Exp(rate_in)), `n_out` points at
    /// radius r*(1 + Exp(rate_out)); n_in + n_out must equal n.
    ExponentialInOut {
        rate_in: f64,
        rate_out: f64,
        n_in: usize,
        n_out: usize,
    },
}

/// Points on a circle of the given radius, angles uniform on [0, 2pi),
/// with optional radial noise. The circle lies in the first two axes;
/// any further axes stay at the center value.
pub fn generate_circle(
    center: &[f64],
    radius: f64,
    n: usize,
    noise: NoiseSpec,
    seed: u64,
) -> Result<PointCloud> {
    let dim = center.len();
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidParameter(format!(
            "circle center must have 2 or 3 coordinates, got {dim}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if radius <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "radius must be > 0, got {radius}"
        )));
    }
    match noise {
        NoiseSpec::GaussianRadial { sd } if sd <= 0.0 => {
            return Err(Error::InvalidParameter(format!(
                "gaussian sd must be > 0, got {sd}"
            )));
        }
        NoiseSpec::ExponentialInOut {
            rate_in,
            rate_out,
            n_in,
            n_out,
        } => {
            if rate_in <= 0.0 || rate_out <= 0.0 {
                return Err(Error::InvalidParameter(
                    "exponential rates must be > 0".into(),
                ));
            }
            if n_in + n_out != n {
                return Err(Error::InvalidParameter(format!(
                    "n_in + n_out = {} must equal n = {n}",
                    n_in + n_out
                )));
            }
        }
        _ => {}
    }

    let mut angle_rng = rng::stream(seed, "circle/angles");
    let mut noise_rng = rng::stream(seed, "circle/radii");
    let mut coords = Vec::with_capacity(n * dim);
    for i in 0..n {
        let theta: f64 = angle_rng.gen::<f64>() * std::f64::consts::TAU;
        let r = match noise {
            NoiseSpec::None => radius,
            NoiseSpec::GaussianRadial { sd } => {
                let normal = Normal::new(0.0, sd).expect("validated sd");
                radius + normal.sample(&mut noise_rng)
            }
            NoiseSpec::ExponentialInOut {
                rate_in,
                rate_out,
                n_in,
                ..
            } => {
                if i < n_in {
                    let e = Exp::new(rate_in).expect("validated rate").sample(&mut noise_rng);
                    radius * (1.0 - e)
                } else {
                    let e = Exp::new(rate_out).expect("validated rate").sample(&mut noise_rng);
                    radius * (1.0 + e)
                }
            }
        };
        coords.push(center[0] + r * theta.cos());
        coords.push(center[1] + r * theta.sin());
        if dim == 3 {
            coords.push(center[2]);
        }
    }
    PointCloud::new(dim, coords)
}

/// Points uniform along the edges of a closed polygon, each coordinate then
/// perturbed independently by N(0, sd^2). Edges are taken in vertex order,
/// closing last-to-first.
pub fn generate_polygon_edges(
    vertices: &[[f64; 2]],
    n_per_edge: usize,
    gaussian_sd: f64,
    seed: u64,
) -> Result<PointCloud> {
    if vertices.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    if n_per_edge == 0 {
        return Err(Error::InvalidParameter("n_per_edge must be >= 1".into()));
    }
    if gaussian_sd < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gaussian_sd must be >= 0, got {gaussian_sd}"
        )));
    }
    let mut pos_rng = rng::stream(seed, "polygon/positions");
    let mut noise_rng = rng::stream(seed, "polygon/noise");
    let normal = Normal::new(0.0, gaussian_sd.max(0.0)).expect("sd >= 0");
    let mut coords = Vec::with_capacity(vertices.len() * n_per_edge * 2);
    for e in 0..vertices.len() {
        let a = vertices[e];
        let b = vertices[(e + 1) % vertices.len()];
        for _ in 0..n_per_edge {
            let t: f64 = pos_rng.gen::<f64>();
            let mut x = a[0] + t * (b[0] - a[0]);
            let mut y = a[1] + t * (b[1] - a[1]);
            if gaussian_sd > 0.0 {
                x += normal.sample(&mut noise_rng);
                y += normal.sample(&mut noise_rng);
            }
            coords.push(x);
            coords.push(y);
        }
    }
    PointCloud::new(2, coords)
}

/// Axis-aligned bounding box of a cloud, expanded by `margin` on every side.
/// An axis on which all points coincide is inflated symmetrically to extent
/// 1e-6 so grid construction never sees a zero-width box.
pub fn bounding_box(cloud: &PointCloud, margin: f64) -> Result<BoundingBox> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if margin < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "margin must be >= 0, got {margin}"
        )));
    }
    let dim = cloud.dim();
    let mut lower = vec![f64::INFINITY; dim];
    let mut upper = vec![f64::NEG_INFINITY; dim];
    for p in cloud.points() {
        for (i, &c) in p.iter().enumerate() {
            lower[i] = lower[i].min(c);
            upper[i] = upper[i].max(c);
        }
    }
    for i in 0..dim {
        if upper[i] - lower[i] < 1e-6 {
            let mid = 0.5 * (upper[i] + lower[i]);
            lower[i] = mid - 5e-7;
            upper[i] = mid + 5e-7;
        }
        lower[i] -= margin;
        upper[i] += margin;
    }
    BoundingBox::new(lower, upper)
}

/// Load a point cloud from CSV. The dimension is taken from the first data
/// row; a header row (any non-numeric field in the first line) is skipped,
/// as are blank lines and `#` comment lines.
pub fn load_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut dim = None;
    let mut coords = Vec::new();
    let mut first_content_line = true;
    for (idx, line) in reader.lines().enumerate() {
        let row = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        // header detection: only a non-numeric FIRST field marks a header,
        // so a data row with one bad field still reports an error
        if first_content_line && fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
            first_content_line = false;
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) => {
                let bad = fields
                    .iter()
                    .find(|f| f.parse::<f64>().is_err())
                    .unwrap_or(&"");
                return Err(Error::Csv {
                    path: path.into(),
                    row,
                    message: format!("non-numeric field '{bad}'"),
                });
            }
        };
        first_content_line = false;
        match dim {
            None => {
                if values.len() != 2 && values.len() != 3 {
                    return Err(Error::Csv {
                        path: path.into(),
                        row,
                        message: format!("expected 2 or 3 fields, got {}", values.len()),
                    });
                }
                dim = Some(values.len());
            }
            Some(d) if values.len() != d => {
                return Err(Error::Csv {
                    path: path.into(),
                    row,
                    message: format!("expected {d} fields, got {}", values.len()),
                });
            }
            _ => {}
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Csv {
                path: path.into(),
                row,
                message: format!("non-finite value {bad}"),
            });
        }
        coords.extend(values);
    }
    let dim = dim.ok_or(Error::EmptyCloud)?;
    PointCloud::new(dim, coords)
}

/// CSV serialization with the standard comment header.
pub fn to_csv_string(cloud: &PointCloud) -> String {
    let mut out = format!("# pterrace pointcloud d={}\n", cloud.dim());
    for p in cloud.points() {
        let fields: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

pub fn save_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    crate::render::write_atomic(path, to_csv_string(cloud).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmp_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_csv_basic() {
        let f = tmp_csv("0,0\n1,2\n");
        let c = load_csv(f.path()).unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.len(), 2);
        assert_eq!(c.point(1), &[1.0, 2.0]);
    }

    #[test]
    fn load_csv_header_skipped() {
        let f = tmp_csv("x,y\n0,0\n");
        let c = load_csv(f.path()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.point(0), &[0.0, 0.0]);
    }

    #[test]
    fn load_csv_crlf_and_comment() {
        let f = tmp_csv("# pterrace pointcloud d=2\r\n0,0\r\n1,2\r\n");
        let c = load_csv(f.path()).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn load_csv_bad_field_names_row() {
        let f = tmp_csv("0,abc\n");
        match load_csv(f.path()) {
            Err(Error::Csv { row, message, .. }) => {
                assert_eq!(row, 1);
                assert!(message.contains("abc"));
            }
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_arity_mismatch_names_row() {
        let f = tmp_csv("0,0\n1,2,3\n");
        match load_csv(f.path()) {
            Err(Error::Csv { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/cloud.csv"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let c = PointCloud::new(2, vec![0.5, -1.25, 3.0, 4.0]).unwrap();
        let f = tmp_csv(&to_csv_string(&c));
        assert_eq!(load_csv(f.path()).unwrap(), c);
    }

    #[test]
    fn circle_noiseless_radius() {
        let c = generate_circle(&[0.0, 0.0], 1.0, 4, NoiseSpec::None, 7).unwrap();
        assert_eq!(c.len(), 4);
        for p in c.points() {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-12, "radius {r}");
        }
    }

    #[test]
    fn circle_deterministic() {
        let a = generate_circle(&[1.0, 2.0], 0.5, 100, NoiseSpec::GaussianRadial { sd: 0.1 }, 3)
            .unwrap();
        let b = generate_circle(&[1.0, 2.0], 0.5, 100, NoiseSpec::GaussianRadial { sd: 0.1 }, 3)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn circle_exponential_outer_mean() {
        // Outer points sit at r*(1 + Exp(10)): mean distance 1 + 1/10,
        // sd of Exp(10) is 1/10, so the sample-mean standard error over
        // 400 points is 0.005.
        let n_in = 400;
        let n_out = 400;
        let c = generate_circle(
            &[0.0, 0.0],
            1.0,
            800,
            NoiseSpec::ExponentialInOut {
                rate_in: 4.0,
                rate_out: 10.0,
                n_in,
                n_out,
            },
            1,
        )
        .unwrap();
        let mean: f64 = (n_in..800)
            .map(|i| {
                let p = c.point(i);
                (p[0] * p[0] + p[1] * p[1]).sqrt()
            })
            .sum::<f64>()
            / n_out as f64;
        let se = 0.1 / (n_out as f64).sqrt();
        assert!(
            (mean - 1.1).abs() < 3.0 * se,
            "outer mean {mean}, expected 1.1 +- {}",
            3.0 * se
        );
    }

    #[test]
    fn circle_rejects_bad_parameters() {
        assert!(generate_circle(&[0.0, 0.0], 0.0, 4, NoiseSpec::None, 0).is_err());
        assert!(generate_circle(&[0.0, 0.0], 1.0, 0, NoiseSpec::None, 0).is_err());
        assert!(generate_circle(
            &[0.0, 0.0],
            1.0,
            10,
            NoiseSpec::ExponentialInOut {
                rate_in: 4.0,
                rate_out: 10.0,
                n_in: 4,
                n_out: 4
            },
            0
        )
        .is_err());
    }

    #[test]
    fn polygon_zero_noise_on_edges() {
        let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let c = generate_polygon_edges(&square, 1, 0.0, 0).unwrap();
        assert_eq!(c.len(), 4);
        for p in c.points() {
            let on_edge = p[0].abs() < 1e-12
                || (p[0] - 1.0).abs() < 1e-12
                || p[1].abs() < 1e-12
                || (p[1] - 1.0).abs() < 1e-12;
            assert!(on_edge, "point {p:?} not on square perimeter");
        }
    }

    #[test]
    fn polygon_triangle_counts() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866]];
        let c = generate_polygon_edges(&tri, 200, 0.15, 3).unwrap();
        assert_eq!(c.len(), 600);
    }

    #[test]
    fn polygon_rejects_degenerate() {
        assert!(generate_polygon_edges(&[[0.0, 0.0], [1.0, 1.0]], 10, 0.0, 0).is_err());
    }

    #[test]
    fn bbox_basic() {
        let c = PointCloud::new(2, vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        let b = bounding_box(&c, 0.0).unwrap();
        assert_eq!(b.lower, vec![0.0, 0.0]);
        assert_eq!(b.upper, vec![1.0, 2.0]);
    }

    #[test]
    fn bbox_single_point_margin() {
        let c = PointCloud::new(2, vec![0.0, 0.0]).unwrap();
        let b = bounding_box(&c, 1.0).unwrap();
        for i in 0..2 {
            assert!((b.lower[i] + 1.0).abs() < 1e-5);
            assert!((b.upper[i] - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn bbox_degenerate_axis_inflated() {
        let c = PointCloud::new(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let b = bounding_box(&c, 0.0).unwrap();
        assert!(b.extent(1) > 0.0);
        assert!((b.extent(1) - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn bbox_empty_cloud_errors() {
        let c = PointCloud::new(2, vec![]).unwrap();
        assert!(matches!(bounding_box(&c, 0.0), Err(Error::EmptyCloud)));
    }

    #[test]
    fn bbox_contains_all_points() {
        let c = generate_circle(&[3.0, -2.0], 2.0, 50, NoiseSpec::GaussianRadial { sd: 0.2 }, 9)
            .unwrap();
        let b0 = bounding_box(&c, 0.0).unwrap();
        let b1 = bounding_box(&c, 0.5).unwrap();
        for p in c.points() {
            assert!(b0.contains(p));
            assert!(b1.contains(p));
        }
        // margin-m box contains margin-0 box
        for i in 0..2 {
            assert!(b1.lower[i] <= b0.lower[i]);
            assert!(b1.upper[i] >= b0.upper[i]);
        }
    }
}
