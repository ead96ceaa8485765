//! Superlevel-set persistent homology of grid scalar fields via filtered
//! cubical complexes and boundary-matrix reduction over Z/2.
//!
//! The complex is vertex-based: grid points are the vertices, and every
//! higher cell (edge, square, cube) enters the superlevel filtration at the
//! minimum of its vertices' values. Cells are ordered by entry value
//! descending (the threshold sweeps downward), ties broken by cell dimension
//! then by lexicographic cell index, which keeps faces ahead of cofaces and
//! makes the output deterministic.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kde::ScalarGrid;
use crate::{Error, Result};

/// One bar of the barcode. Superlevel convention: features are born at high
/// values and die at low values, so `birth >= death`. The single infinite
/// class per connected grid domain is reported with `essential = true` and
/// its death clamped to the grid's global minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    pub pairs: Vec<PersistencePair>,
    pub max_dim: usize,
    pub grid_min: f64,
    pub grid_max: f64,
}

impl Barcode {
    pub fn pairs_of_dim(&self, k: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == k)
    }
}

/// The Betti number of the superlevel set at threshold `y`: finite bars
/// count on the half-open interval `death < y <= birth`; essential bars
/// never actually die, so they count whenever `y <= birth`.
pub fn betti_at(barcode: &Barcode, k: usize, y: f64) -> usize {
    barcode
        .pairs
        .iter()
        .filter(|p| {
            p.dim == k && y <= p.birth && (p.essential || p.death < y)
        })
        .count()
}

#[derive(Clone, Copy)]
struct Cell {
    value: f64,
    mask: u8,
    anchor: u32,
}

impl Cell {
    fn dim(&self) -> u32 {
        self.mask.count_ones()
    }
}

/// Barcode of the filtration {v : f(v) >= y} as y decreases from the grid
/// maximum to the grid minimum, for homological dimensions 0..=max_dim.
/// Zero-persistence finite pairs are dropped; essential pairs are clamped
/// to die at the grid minimum.
pub fn superlevel_persistence(grid: &ScalarGrid, max_dim: usize) -> Result<Barcode> {
    let d = grid.spec.dim();
    if max_dim > d {
        return Err(Error::InvalidParameter(format!(
            "max_dim {max_dim} exceeds grid dimension {d}"
        )));
    }
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("grid contains non-finite values".into()));
    }
    let res = &grid.spec.resolution;
    let nverts = grid.spec.num_vertices();
    let grid_min = grid.min_value();
    let grid_max = grid.max_value();

    // stride[a] = linear-index step along axis a (first axis slowest)
    let mut stride = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        stride[a] = stride[a + 1] * res[a + 1];
    }

    // Build only the cells needed to pair classes up to max_dim.
    let cell_dim_limit = (max_dim + 1).min(d) as u32;

    let mut cells: Vec<Cell> = Vec::new();
    for mask in 0u8..(1 << d) {
        let cdim = mask.count_ones();
        if cdim > cell_dim_limit {
            continue;
        }
        // linear offsets of the cell's vertices relative to its anchor
        let set_axes: Vec<usize> = (0..d).filter(|a| mask & (1 << a) != 0).collect();
        let mut offsets = vec![0usize];
        for &a in &set_axes {
            let extra: Vec<usize> = offsets.iter().map(|o| o + stride[a]).collect();
            offsets.extend(extra);
        }
        let mut idx = vec![0usize; d];
        'anchors: loop {
            let valid = set_axes.iter().all(|&a| idx[a] + 1 < res[a]);
            if valid {
                let anchor = grid.spec.linear_index(&idx);
                let value = offsets
                    .iter()
                    .map(|&o| grid.values[anchor + o])
                    .fold(f64::INFINITY, f64::min);
                cells.push(Cell {
                    value,
                    mask,
                    anchor: anchor as u32,
                });
            }
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < res[a] {
                    continue 'anchors;
                }
                idx[a] = 0;
            }
            break;
        }
    }

    cells.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .expect("finite values")
            .then(a.dim().cmp(&b.dim()))
            .then(a.mask.cmp(&b.mask))
            .then(a.anchor.cmp(&b.anchor))
    });

    // position of each cell in filtration order, keyed by (mask, anchor)
    let mut pos_of = vec![u32::MAX; (1usize << d) * nverts];
    for (pos, c) in cells.iter().enumerate() {
        pos_of[(c.mask as usize) * nverts + c.anchor as usize] = pos as u32;
    }

    let ncells = cells.len();
    let mut reduced: Vec<Vec<u32>> = Vec::with_capacity(ncells);
    let mut pivot_owner: Vec<u32> = vec![u32::MAX; ncells];
    let mut killed = vec![false; ncells];
    let mut raw_pairs: Vec<(u32, u32)> = Vec::new();

    for j in 0..ncells {
        let c = cells[j];
        let mut col: Vec<u32> = (0..d)
            .filter(|a| c.mask & (1 << a) != 0)
            .flat_map(|a| {
                let face_mask = c.mask & !(1 << a);
                let near = pos_of[(face_mask as usize) * nverts + c.anchor as usize];
                let far = pos_of
                    [(face_mask as usize) * nverts + c.anchor as usize + stride[a]];
                [near, far]
            })
            .collect();
        col.sort_unstable();

        while let Some(&low) = col.last() {
            let owner = pivot_owner[low as usize];
            if owner == u32::MAX {
                pivot_owner[low as usize] = j as u32;
                killed[low as usize] = true;
                raw_pairs.push((low, j as u32));
                break;
            }
            col = symmetric_difference(&col, &reduced[owner as usize]);
        }
        reduced.push(col);
    }

    let mut pairs: Vec<PersistencePair> = Vec::new();
    for &(creator_pos, killer_pos) in &raw_pairs {
        let creator = cells[creator_pos as usize];
        let killer = cells[killer_pos as usize];
        let k = creator.dim() as usize;
        if k <= max_dim && creator.value > killer.value {
            pairs.push(PersistencePair {
                dim: k,
                birth: creator.value,
                death: killer.value,
                essential: false,
            });
        }
    }
    for pos in 0..ncells {
        if reduced[pos].is_empty() && !killed[pos] {
            let c = cells[pos];
            let k = c.dim() as usize;
            if k <= max_dim {
                pairs.push(PersistencePair {
                    dim: k,
                    birth: c.value,
                    death: grid_min,
                    essential: true,
                });
            }
        }
    }

    pairs.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(b.birth.partial_cmp(&a.birth).expect("finite"))
            .then(b.death.partial_cmp(&a.death).expect("finite"))
            .then(b.essential.cmp(&a.essential))
    });

    Ok(Barcode {
        pairs,
        max_dim,
        grid_min,
        grid_max,
    })
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// CSV export: comment header, then `dim,birth,death,essential` rows.
pub fn barcode_to_csv_string(barcode: &Barcode, bandwidth: f64) -> String {
    let mut out = format!(
        "# pterrace barcode bandwidth={} grid_min={} grid_max={}\ndim,birth,death,essential\n",
        bandwidth, barcode.grid_min, barcode.grid_max
    );
    for p in &barcode.pairs {
        let _ = writeln!(out, "{},{},{},{}", p.dim, p.birth, p.death, p.essential);
    }
    out
}

pub fn save_barcode_csv(barcode: &Barcode, bandwidth: f64, path: impl AsRef<Path>) -> Result<()> {
    crate::render::write_atomic(path.as_ref(), barcode_to_csv_string(barcode, bandwidth).as_bytes())
}
