//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! Thresholds and seeds are frozen here; the heavier sweeps share one
//! three-circles run through a `OnceLock`.

mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use pterrace::datasets::Dataset;
use pterrace::imageio::{self, GrayImage};
use pterrace::kde::{evaluate_kde, grid_spec_auto, GridSpec};
use pterrace::persistence::{betti_at, superlevel_persistence, Barcode};
use pterrace::pipeline::{
    run_pipeline, BandwidthSweep, GridConfig, InputSpec, OutputKind, PipelineConfig,
};
use pterrace::pointcloud::{BoundingBox, PointCloud};
use pterrace::terrace::{
    assemble_terrace, betti_step_function, terrace_area, TerraceMatrix,
};
use rand::Rng;

const SEED: u64 = 1;

fn report(n: u32, desc: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("criterion {n}: PASS - {desc}");
    } else {
        println!("criterion {n}: FAIL - {desc}");
        for f in failures {
            println!("  {f}");
        }
        panic!("criterion {n} failed ({} check(s)):\n{}", failures.len(), failures.join("\n"));
    }
}

fn arithmetic(min: f64, max: f64, count: usize) -> Vec<f64> {
    BandwidthSweep {
        min,
        max,
        count,
        log_spacing: false,
    }
    .values()
    .unwrap()
}

struct SweepRun {
    bandwidths: Vec<f64>,
    barcodes: Vec<Barcode>,
    matrix: TerraceMatrix,
}

fn sweep(cloud: &PointCloud, k: usize, bandwidths: Vec<f64>, res: Vec<usize>) -> SweepRun {
    let max_bw = *bandwidths.last().unwrap();
    let spec = grid_spec_auto(cloud, max_bw, res).unwrap();
    let barcodes: Vec<Barcode> = bandwidths
        .iter()
        .map(|&h| superlevel_persistence(&evaluate_kde(cloud, h, &spec).unwrap(), k).unwrap())
        .collect();
    let sfs: Vec<_> = barcodes.iter().map(|b| betti_step_function(b, k)).collect();
    let matrix = assemble_terrace(&sfs, &bandwidths, k).unwrap();
    SweepRun {
        bandwidths,
        barcodes,
        matrix,
    }
}

/// Frozen three-circles run: seed 1, 50 bandwidths in [0.01, 1.5], 64x64 grid.
fn three_circles_run() -> &'static SweepRun {
    static RUN: OnceLock<SweepRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let cloud = Dataset::ThreeCircles.generate(SEED).unwrap();
        sweep(&cloud, 1, arithmetic(0.01, 1.5, 50), vec![64, 64])
    })
}

#[test]
fn criterion_1_dim0_union_find_oracle() {
    let mut rng = pterrace::rng::stream(7, "acceptance/c1");
    let mut failures = Vec::new();
    for case in 0..200 {
        let rows = rng.gen_range(2..=8usize);
        let cols = rng.gen_range(2..=8usize);
        let values: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.0..1.0)).collect();
        let res = vec![rows, cols];
        let grid = common::grid_from(res.clone(), values.clone());
        let barcode = superlevel_persistence(&grid, 0).unwrap();
        for &y in &values {
            let got = betti_at(&barcode, 0, y);
            let want = common::components_at(&res, &values, y);
            if got != want {
                failures.push(format!(
                    "case {case} {rows}x{cols} threshold {y}: betti {got} vs oracle {want}"
                ));
            }
        }
    }
    report(
        1,
        "dim-0 Betti counts match union-find on 200 random grids at every threshold",
        &failures,
    );
}

#[test]
fn criterion_2_euler_identity() {
    let mut rng = pterrace::rng::stream(7, "acceptance/c2");
    let mut failures = Vec::new();
    let mut check = |res: Vec<usize>, values: Vec<f64>, tag: &str| {
        let d = res.len();
        let grid = common::grid_from(res.clone(), values.clone());
        let barcode = superlevel_persistence(&grid, d).unwrap();
        for &y in &values {
            let alt: i64 = (0..=d)
                .map(|k| {
                    let b = betti_at(&barcode, k, y) as i64;
                    if k % 2 == 0 {
                        b
                    } else {
                        -b
                    }
                })
                .sum();
            let chi = common::euler_characteristic_at(&res, &values, y);
            if alt != chi {
                failures.push(format!("{tag} threshold {y}: alternating sum {alt} vs chi {chi}"));
            }
        }
    };
    for case in 0..100 {
        let rows = rng.gen_range(2..=16usize);
        let cols = rng.gen_range(2..=16usize);
        let values: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.0..1.0)).collect();
        check(vec![rows, cols], values, &format!("2d case {case}"));
    }
    for case in 0..20 {
        let res: Vec<usize> = (0..3).map(|_| rng.gen_range(2..=8usize)).collect();
        let n: usize = res.iter().product();
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        check(res, values, &format!("3d case {case}"));
    }
    report(
        2,
        "alternating Betti sum equals cubical Euler characteristic (100 2D + 20 3D grids)",
        &failures,
    );
}

#[test]
fn criterion_3_terrace_cells_equal_betti() {
    let run = three_circles_run();
    let mut failures = Vec::new();
    for (j, &y) in run.matrix.yvec.iter().enumerate() {
        for (i, barcode) in run.barcodes.iter().enumerate() {
            let got = run.matrix.zmat[j][i];
            let want = betti_at(barcode, 1, y);
            if got != want {
                failures.push(format!("cell ({j},{i}) at y={y}: zmat {got} vs betti {want}"));
            }
        }
    }
    report(
        3,
        "three-circles terrace: every zmat cell equals betti_at of its barcode",
        &failures,
    );
}

#[test]
fn criterion_4_three_circles_area_structure() {
    let run = three_circles_run();
    let area = terrace_area(&run.matrix).unwrap();
    let mut failures = Vec::new();
    let high_max = area
        .areas
        .iter()
        .filter(|(&h, _)| h >= 5)
        .map(|(_, &a)| a)
        .fold(0.0f64, f64::max);
    for h in 1..=3 {
        if !(area.area(h) > high_max) {
            failures.push(format!(
                "area(h={h}) = {} does not exceed max area at h>=5 ({high_max})",
                area.area(h)
            ));
        }
    }
    let tail: f64 = area
        .areas
        .iter()
        .filter(|(&h, _)| h >= 5)
        .map(|(_, &a)| a)
        .sum();
    let total = area.total_nonzero_area();
    if !(tail < 0.05 * total) {
        failures.push(format!("tail area {tail} not < 5% of total {total}"));
    }
    report(
        4,
        "three-circles areas: heights 1-3 dominate heights >= 5, tail under 5% of total",
        &failures,
    );
}

#[test]
fn criterion_5_four_shapes_study() {
    let cloud = Dataset::FourShapes.generate(SEED).unwrap();
    let run = sweep(&cloud, 1, arithmetic(0.01, 0.6, 50), vec![96, 96]);
    let area = terrace_area(&run.matrix).unwrap();
    let mut failures = Vec::new();
    let high_max = area
        .areas
        .iter()
        .filter(|(&h, _)| h >= 4)
        .map(|(_, &a)| a)
        .fold(0.0f64, f64::max);
    for h in 1..=3 {
        if !(area.area(h) > high_max) {
            failures.push(format!(
                "area(h={h}) = {} does not exceed max area at h>=4 ({high_max})",
                area.area(h)
            ));
        }
    }
    let max_z = run.matrix.max_height();
    if max_z < 20 {
        failures.push(format!("max terrace height {max_z} < 20"));
    }
    report(
        5,
        "four-shapes: heights 1-3 dominate heights >= 4 and max terrace height >= 20",
        &failures,
    );
}

#[test]
fn criterion_6_resolution_consistency() {
    let cloud = Dataset::ThreeCircles.generate(SEED).unwrap();
    let coarse = sweep(&cloud, 1, arithmetic(0.01, 1.5, 25), vec![64, 64]);
    let fine = sweep(&cloud, 1, arithmetic(0.01, 1.5, 100), vec![64, 64]);
    let mut failures = Vec::new();
    let mut shared = 0usize;
    for (i, &h) in coarse.bandwidths.iter().enumerate() {
        let Some(j) = fine.bandwidths.iter().position(|&g| g == h) else {
            continue;
        };
        shared += 1;
        if coarse.barcodes[i].pairs != fine.barcodes[j].pairs {
            failures.push(format!("barcodes differ at shared bandwidth {h}"));
            continue;
        }
        // the columns themselves, probed on both matrices' filtration grids
        let a = betti_step_function(&coarse.barcodes[i], 1);
        let b = betti_step_function(&fine.barcodes[j], 1);
        for &y in coarse.matrix.yvec.iter().chain(fine.matrix.yvec.iter()) {
            if a.eval(y) != b.eval(y) {
                failures.push(format!("column values differ at bandwidth {h}, y={y}"));
            }
        }
    }
    if shared < 2 {
        failures.push(format!("only {shared} shared bandwidth values found"));
    }
    report(
        6,
        "25- and 100-bandwidth runs agree exactly on shared columns",
        &failures,
    );
}

#[test]
fn criterion_7_parallel_determinism() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir8 = tempfile::tempdir().unwrap();
    let config = |workers: usize, out_dir: std::path::PathBuf| PipelineConfig {
        input: InputSpec::Dataset {
            name: "three-circles".into(),
        },
        dim_k: 1,
        bandwidths: BandwidthSweep {
            min: 0.01,
            max: 1.5,
            count: 50,
            log_spacing: false,
        },
        grid: GridConfig {
            resolution: vec![64],
            explicit_box: None,
            margin: None,
        },
        outputs: vec![OutputKind::MatrixCsv, OutputKind::AreaCsv, OutputKind::TerraceSvg],
        workers,
        seed: SEED,
        out_dir,
        height_cap: None,
    };
    run_pipeline(&config(1, dir1.path().to_path_buf())).unwrap();
    run_pipeline(&config(8, dir8.path().to_path_buf())).unwrap();
    let mut failures = Vec::new();
    for name in ["matrix.csv", "area.csv", "terrace.svg"] {
        let a = std::fs::read(dir1.path().join(name)).unwrap();
        let b = std::fs::read(dir8.path().join(name)).unwrap();
        if a != b {
            failures.push(format!("{name} differs between workers=1 and workers=8"));
        }
    }
    report(
        7,
        "matrix/area/SVG outputs byte-identical for workers 1 and 8",
        &failures,
    );
}

#[test]
fn criterion_8_kde_correctness() {
    let mut failures = Vec::new();
    let pts = [[0.3, -0.2], [1.1, 0.7], [-0.4, 0.5]];
    let cloud = PointCloud::new(2, pts.iter().flatten().copied().collect()).unwrap();
    let h = 0.45;

    // spot values against the closed form, computed independently here
    let spec = GridSpec::new(
        BoundingBox::new(vec![-1.0, -1.0], vec![2.0, 2.0]).unwrap(),
        vec![31, 31],
    )
    .unwrap();
    let grid = evaluate_kde(&cloud, h, &spec).unwrap();
    let norm = 1.0 / (pts.len() as f64 * 2.0 * std::f64::consts::PI * h * h);
    for lin in (0..spec.num_vertices()).step_by(37) {
        let v = spec.vertex(&spec.multi_index(lin));
        let expected: f64 = pts
            .iter()
            .map(|p| {
                let d2 = (v[0] - p[0]).powi(2) + (v[1] - p[1]).powi(2);
                norm * (-d2 / (2.0 * h * h)).exp()
            })
            .sum();
        let rel = (grid.values[lin] - expected).abs() / expected.max(f64::MIN_POSITIVE);
        if rel > 1e-12 {
            failures.push(format!("spot value at {v:?}: relative error {rel:e}"));
        }
    }

    // normalization: Riemann sum over a 5h-padded grid
    let pad = 5.0 * h;
    let padded = GridSpec::new(
        BoundingBox::new(vec![-0.4 - pad, -0.2 - pad], vec![1.1 + pad, 0.7 + pad]).unwrap(),
        vec![161, 161],
    )
    .unwrap();
    let dense = evaluate_kde(&cloud, h, &padded).unwrap();
    let cell = padded.spacing(0) * padded.spacing(1);
    let integral: f64 = dense.values.iter().sum::<f64>() * cell;
    if (integral - 1.0).abs() > 1e-2 {
        failures.push(format!("normalization integral {integral} not within 1e-2 of 1"));
    }
    report(
        8,
        "KDE matches the closed form to 1e-12 and integrates to 1 within 1e-2",
        &failures,
    );
}

/// Square lattice of `cells_per_side` x `cells_per_side` light cells
/// separated by dark walls.
fn honeycomb_image(cell: usize, wall: usize, cells_per_side: usize) -> GrayImage {
    let size = wall + cells_per_side * (cell + wall);
    let is_wall = |i: usize| i % (cell + wall) < wall;
    let pixels: Vec<u16> = (0..size * size)
        .map(|lin| {
            let (row, col) = (lin / size, lin % size);
            if is_wall(row) || is_wall(col) {
                0
            } else {
                255
            }
        })
        .collect();
    GrayImage::new(size, size, 255, pixels).unwrap()
}

#[test]
fn criterion_9_honeycomb_image() {
    const L: usize = 9; // enclosed cells by construction (3x3 lattice)
    let img = honeycomb_image(8, 1, 3);
    let walls = imageio::sample_intensity(&img, 5000, true, 11).unwrap();
    let frame = imageio::sample_boundary(&img, 1500, 11).unwrap();
    let cloud = PointCloud::concat(&[walls, frame]).unwrap();
    let run = sweep(&cloud, 1, arithmetic(0.3, 2.5, 25), vec![80, 80]);
    let area = terrace_area(&run.matrix).unwrap();
    let mut failures = Vec::new();

    // dominant plateau: the L largest layers sit exactly at heights 1..=L
    let mut by_area: Vec<(usize, f64)> = area.areas.iter().map(|(&h, &a)| (h, a)).collect();
    by_area.sort_by(|a, b| b.1.total_cmp(&a.1));
    let top: BTreeSet<usize> = by_area.iter().take(L).map(|&(h, _)| h).collect();
    let expected: BTreeSet<usize> = (1..=L).collect();
    if top != expected {
        failures.push(format!("dominant heights {top:?} != {expected:?}"));
    }
    for h in 1..=L {
        if !(area.area(h) > 0.0) {
            failures.push(format!("height {h} has zero area"));
        }
    }
    let tail: f64 = area
        .areas
        .iter()
        .filter(|(&h, _)| h > L + 1)
        .map(|(_, &a)| a)
        .sum();
    let total = area.total_nonzero_area();
    if !(tail < 0.05 * total) {
        failures.push(format!("area above height {} is {tail}, not < 5% of {total}", L + 1));
    }
    report(
        9,
        "honeycomb image: dominant plateau is heights 1..=9 with a sub-5% tail",
        &failures,
    );
}
