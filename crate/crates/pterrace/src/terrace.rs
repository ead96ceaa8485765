//! Betti step functions, terrace-matrix assembly, and the terrace area
//! summary.
//!
//! For one bandwidth, the Betti number as a function of the filtration value
//! is a step function that only changes at birth and death values; stacking
//! these step functions over an ascending bandwidth sweep yields the terrace
//! matrix (xvec = bandwidths, yvec = filtration breakpoints, zmat = Betti
//! numbers). The area summary reports, per terrace height h >= 1, the
//! fraction of the axis-standardized rectangle on which the surface equals h.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kde::GridSpec;
use crate::persistence::Barcode;
use crate::{Error, Result};

/// Piecewise-constant Betti count. `breakpoints` is strictly descending;
/// `counts[q]` is the value on the half-open interval
/// `(breakpoints[q+1], breakpoints[q]]` (with an implicit final breakpoint
/// at minus infinity). The count is 0 above `breakpoints[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiStepFunction {
    pub breakpoints: Vec<f64>,
    pub counts: Vec<usize>,
}

impl BettiStepFunction {
    pub fn trivial() -> Self {
        BettiStepFunction {
            breakpoints: vec![0.0],
            counts: vec![0],
        }
    }

    pub fn eval(&self, y: f64) -> usize {
        if self.breakpoints.is_empty() || y > self.breakpoints[0] {
            return 0;
        }
        // largest q with breakpoints[q] >= y; breakpoints descend, so this
        // is the last index in the prefix of entries >= y
        let q = self.breakpoints.partition_point(|&b| b >= y) - 1;
        self.counts[q]
    }
}

/// Build the dimension-k Betti step function from a barcode: +1 events at
/// births, -1 at deaths, accumulated while sweeping the filtration value
/// downward. With no dimension-k bars the trivial function is returned.
pub fn betti_step_function(barcode: &Barcode, k: usize) -> BettiStepFunction {
    let mut events: Vec<(f64, i64)> = Vec::new();
    for p in barcode.pairs_of_dim(k) {
        events.push((p.birth, 1));
        events.push((p.death, -1));
    }
    if events.is_empty() {
        return BettiStepFunction::trivial();
    }
    // descending by value
    events.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite filtration values"));

    let mut breakpoints = Vec::new();
    let mut counts = Vec::new();
    let mut running: i64 = 0;
    let mut i = 0;
    while i < events.len() {
        let v = events[i].0;
        while i < events.len() && events[i].0 == v {
            running += events[i].1;
            i += 1;
        }
        breakpoints.push(v);
        debug_assert!(running >= 0);
        counts.push(running.max(0) as usize);
    }
    BettiStepFunction {
        breakpoints,
        counts,
    }
}

/// The persistence terrace: Betti surface over (bandwidth, filtration).
/// `zmat[j][i]` is the dimension-`dim` Betti number at bandwidth `xvec[i]`
/// and filtration value `yvec[j]`; yvec is strictly descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerraceMatrix {
    pub xvec: Vec<f64>,
    pub yvec: Vec<f64>,
    pub zmat: Vec<Vec<usize>>,
    pub dim: usize,
}

impl TerraceMatrix {
    pub fn max_height(&self) -> usize {
        self.zmat
            .iter()
            .flat_map(|row| row.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

/// Assemble the terrace matrix from per-bandwidth step functions. yvec is
/// the deduplicated descending union of all breakpoints, always including a
/// floor entry at 0 so the bottom of the terrace is closed.
pub fn assemble_terrace(
    step_functions: &[BettiStepFunction],
    bandwidths: &[f64],
    k: usize,
) -> Result<TerraceMatrix> {
    if step_functions.len() != bandwidths.len() {
        return Err(Error::InvalidParameter(format!(
            "{} step functions for {} bandwidths",
            step_functions.len(),
            bandwidths.len()
        )));
    }
    if bandwidths.is_empty() {
        return Err(Error::InvalidParameter("empty bandwidth sweep".into()));
    }
    if bandwidths.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "bandwidths must be strictly ascending".into(),
        ));
    }
    let mut yvec: Vec<f64> = step_functions
        .iter()
        .flat_map(|sf| sf.breakpoints.iter().copied())
        .chain(std::iter::once(0.0))
        .collect();
    yvec.sort_by(|a, b| b.partial_cmp(a).expect("finite filtration values"));
    yvec.dedup();

    let zmat: Vec<Vec<usize>> = yvec
        .iter()
        .map(|&y| step_functions.iter().map(|sf| sf.eval(y)).collect())
        .collect();

    Ok(TerraceMatrix {
        xvec: bandwidths.to_vec(),
        yvec,
        zmat,
        dim: k,
    })
}

/// Vertical slice of the terrace at one bandwidth, as a step function over
/// the shared yvec.
pub fn slice_at_bandwidth(matrix: &TerraceMatrix, i: usize) -> Result<BettiStepFunction> {
    if i >= matrix.xvec.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: matrix.xvec.len(),
        });
    }
    Ok(BettiStepFunction {
        breakpoints: matrix.yvec.clone(),
        counts: matrix.zmat.iter().map(|row| row[i]).collect(),
    })
}

/// Standardized layer areas per terrace height, heights >= 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerraceAreaSummary {
    pub areas: BTreeMap<usize, f64>,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl TerraceAreaSummary {
    pub fn area(&self, h: usize) -> f64 {
        self.areas.get(&h).copied().unwrap_or(0.0)
    }

    pub fn total_nonzero_area(&self) -> f64 {
        self.areas.values().sum()
    }

    pub fn max_height(&self) -> usize {
        self.areas.keys().copied().max().unwrap_or(0)
    }
}

/// Exact layer areas of the terrace surface, with both axes standardized to
/// unit range. The surface is piecewise constant: the open cell
/// `(x_i, x_{i+1}) x (y_{j+1}, y_j)` carries the value `zmat[j][i]`
/// (left bandwidth, upper filtration).
pub fn terrace_area(matrix: &TerraceMatrix) -> Result<TerraceAreaSummary> {
    let nx = matrix.xvec.len();
    let ny = matrix.yvec.len();
    if nx < 2 {
        return Err(Error::DegenerateAxis(
            "terrace area needs at least 2 bandwidths".into(),
        ));
    }
    if ny < 2 {
        return Err(Error::DegenerateAxis(
            "terrace area needs at least 2 filtration values".into(),
        ));
    }
    let x_range = (matrix.xvec[0], matrix.xvec[nx - 1]);
    let y_range = (matrix.yvec[ny - 1], matrix.yvec[0]);
    let x_span = x_range.1 - x_range.0;
    let y_span = y_range.1 - y_range.0;
    if !(x_span > 0.0) || !(y_span > 0.0) {
        return Err(Error::DegenerateAxis("zero axis span".into()));
    }

    let mut areas: BTreeMap<usize, f64> = BTreeMap::new();
    for j in 0..ny - 1 {
        let dy = (matrix.yvec[j] - matrix.yvec[j + 1]) / y_span;
        for i in 0..nx - 1 {
            let dx = (matrix.xvec[i + 1] - matrix.xvec[i]) / x_span;
            let h = matrix.zmat[j][i];
            if h >= 1 {
                *areas.entry(h).or_insert(0.0) += dx * dy;
            }
        }
    }
    Ok(TerraceAreaSummary {
        areas,
        x_range,
        y_range,
    })
}

/// CSV export: first row `bandwidths,<x...>`, then one row per yvec entry.
pub fn matrix_to_csv_string(matrix: &TerraceMatrix) -> String {
    let xs: Vec<String> = matrix.xvec.iter().map(|x| x.to_string()).collect();
    let mut out = format!("bandwidths,{}\n", xs.join(","));
    for (j, y) in matrix.yvec.iter().enumerate() {
        let zs: Vec<String> = matrix.zmat[j].iter().map(|z| z.to_string()).collect();
        let _ = writeln!(out, "{y},{}", zs.join(","));
    }
    out
}

/// Parse the CSV emitted by [`matrix_to_csv_string`]. The homological
/// dimension is not stored in the CSV; the caller supplies it.
pub fn matrix_from_csv(path: impl AsRef<Path>, dim: usize) -> Result<TerraceMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut xvec = Vec::new();
    let mut yvec = Vec::new();
    let mut zmat = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let row = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if xvec.is_empty() {
            if fields.first() != Some(&"bandwidths") {
                return Err(Error::Csv {
                    path: path.into(),
                    row,
                    message: "expected 'bandwidths' header row".into(),
                });
            }
            for f in &fields[1..] {
                xvec.push(f.parse::<f64>().map_err(|_| Error::Csv {
                    path: path.into(),
                    row,
                    message: format!("bad bandwidth '{f}'"),
                })?);
            }
            continue;
        }
        if fields.len() != xvec.len() + 1 {
            return Err(Error::Csv {
                path: path.into(),
                row,
                message: format!("expected {} fields, got {}", xvec.len() + 1, fields.len()),
            });
        }
        let y = fields[0].parse::<f64>().map_err(|_| Error::Csv {
            path: path.into(),
            row,
            message: format!("bad filtration value '{}'", fields[0]),
        })?;
        let zs: std::result::Result<Vec<usize>, _> =
            fields[1..].iter().map(|f| f.parse::<usize>()).collect();
        let zs = zs.map_err(|_| Error::Csv {
            path: path.into(),
            row,
            message: "bad Betti value".into(),
        })?;
        yvec.push(y);
        zmat.push(zs);
    }
    if xvec.is_empty() || yvec.is_empty() {
        return Err(Error::Csv {
            path: path.into(),
            row: 0,
            message: "empty terrace matrix".into(),
        });
    }
    Ok(TerraceMatrix {
        xvec,
        yvec,
        zmat,
        dim,
    })
}

/// JSON export of the matrix together with the KDE and grid descriptors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub xvec: Vec<f64>,
    pub yvec: Vec<f64>,
    pub zmat: Vec<Vec<usize>>,
    pub kde: String,
    pub grid: GridSpec,
}

pub fn matrix_to_json_string(matrix: &TerraceMatrix, grid: &GridSpec) -> String {
    let doc = MatrixJson {
        dim: matrix.dim,
        xvec: matrix.xvec.clone(),
        yvec: matrix.yvec.clone(),
        zmat: matrix.zmat.clone(),
        kde: crate::kde::KDE_NORMALIZATION.to_string(),
        grid: grid.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// CSV export of the area summary: `height,area`, heights ascending from 1.
pub fn area_to_csv_string(summary: &TerraceAreaSummary) -> String {
    let mut out = String::from("height,area\n");
    for (h, a) in &summary.areas {
        let _ = writeln!(out, "{h},{a}");
    }
    out
}
