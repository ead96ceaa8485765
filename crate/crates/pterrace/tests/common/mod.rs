//! Shared test support: independent oracles for superlevel-set topology.
//!
//! Everything here is deliberately written against the raw grid values,
//! not the persistence engine, so the two sides of every comparison stay
//! independent.

#![allow(dead_code)]

use pterrace::kde::{GridSpec, ScalarGrid};
use pterrace::pointcloud::BoundingBox;

pub fn grid_from(res: Vec<usize>, values: Vec<f64>) -> ScalarGrid {
    let d = res.len();
    let bounds = BoundingBox::new(
        vec![0.0; d],
        res.iter().map(|&r| (r.max(2) - 1) as f64).collect(),
    )
    .unwrap();
    let spec = GridSpec::new(bounds, res).unwrap();
    assert_eq!(spec.num_vertices(), values.len());
    ScalarGrid {
        spec,
        values,
        bandwidth: 1.0,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

fn strides(res: &[usize]) -> Vec<usize> {
    let d = res.len();
    let mut stride = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        stride[a] = stride[a + 1] * res[a + 1];
    }
    stride
}

fn multi_index(res: &[usize], mut lin: usize) -> Vec<usize> {
    let mut idx = vec![0; res.len()];
    for a in (0..res.len()).rev() {
        idx[a] = lin % res[a];
        lin /= res[a];
    }
    idx
}

/// Number of connected components of {v : f(v) >= y} under axis adjacency.
pub fn components_at(res: &[usize], values: &[f64], y: f64) -> usize {
    let n: usize = res.iter().product();
    let stride = strides(res);
    let mut uf = UnionFind::new(n);
    for lin in 0..n {
        if values[lin] < y {
            continue;
        }
        let idx = multi_index(res, lin);
        for a in 0..res.len() {
            if idx[a] + 1 < res[a] && values[lin + stride[a]] >= y {
                uf.union(lin, lin + stride[a]);
            }
        }
    }
    let mut roots = std::collections::HashSet::new();
    for lin in 0..n {
        if values[lin] >= y {
            let r = uf.find(lin);
            roots.insert(r);
        }
    }
    roots.len()
}

/// Euler characteristic of the cubical superlevel complex at threshold y:
/// a cell is present when the minimum of its vertex values is >= y.
pub fn euler_characteristic_at(res: &[usize], values: &[f64], y: f64) -> i64 {
    let d = res.len();
    let stride = strides(res);
    let mut chi: i64 = 0;
    for mask in 0u32..(1 << d) {
        let set_axes: Vec<usize> = (0..d).filter(|a| mask & (1 << a) != 0).collect();
        let sign: i64 = if set_axes.len() % 2 == 0 { 1 } else { -1 };
        let mut offsets = vec![0usize];
        for &a in &set_axes {
            let extra: Vec<usize> = offsets.iter().map(|o| o + stride[a]).collect();
            offsets.extend(extra);
        }
        let n: usize = res.iter().product();
        for lin in 0..n {
            let idx = multi_index(res, lin);
            if set_axes.iter().any(|&a| idx[a] + 1 >= res[a]) {
                continue;
            }
            let present = offsets.iter().all(|&o| values[lin + o] >= y);
            if present {
                chi += sign;
            }
        }
    }
    chi
}

/// Count of bars of dimension k containing y: essential bars count for all
/// y <= birth, finite bars on (death, birth].
pub fn bar_containment_count(barcode: &pterrace::persistence::Barcode, k: usize, y: f64) -> usize {
    barcode
        .pairs
        .iter()
        .filter(|p| p.dim == k && y <= p.birth && (p.essential || p.death < y))
        .count()
}
