//! Named synthetic datasets used throughout the examples and tests.
//!
//! Layouts (centers, radii, noise) are fixed here so that a dataset name
//! plus a seed fully determines the point cloud.

use crate::pointcloud::{
    generate_circle, generate_polygon_edges, NoiseSpec, PointCloud,
};
use crate::{Error, Result};

use sha2::{Digest, Sha256};

/// Derive an independent sub-seed for one component of a composite dataset.
fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    /// Three circles of 200 points each with distinct radii and densities.
    ThreeCircles,
    /// A large sparse circle and a small dense circle, both with radial noise.
    TwoNoisyCircles,
    /// 100 and 400 points on two equal-sized circles.
    DensityPair,
    /// 200 points on a radius-1 circle and 800 points on a radius-4 circle.
    SizePair,
    /// Square, noisy circle, equilateral triangle, isosceles triangle: 2400 points.
    FourShapes,
}

impl Dataset {
    pub fn from_name(name: &str) -> Result<Dataset> {
        match name {
            "three-circles" => Ok(Dataset::ThreeCircles),
            "two-noisy-circles" => Ok(Dataset::TwoNoisyCircles),
            "density-pair" => Ok(Dataset::DensityPair),
            "size-pair" => Ok(Dataset::SizePair),
            "four-shapes" => Ok(Dataset::FourShapes),
            _ => Err(Error::Config(format!(
                "unknown dataset '{name}' (expected three-circles, two-noisy-circles, density-pair, size-pair, four-shapes)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Dataset::ThreeCircles => "three-circles",
            Dataset::TwoNoisyCircles => "two-noisy-circles",
            Dataset::DensityPair => "density-pair",
            Dataset::SizePair => "size-pair",
            Dataset::FourShapes => "four-shapes",
        }
    }

    /// Suggested bandwidth sweep (min, max, count) for this dataset.
    pub fn default_sweep(&self) -> (f64, f64, usize) {
        match self {
            Dataset::FourShapes => (0.01, 0.6, 50),
            _ => (0.01, 1.5, 50),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<PointCloud> {
        match self {
            Dataset::ThreeCircles => {
                let a = generate_circle(
                    &[0.0, 0.0],
                    2.0,
                    200,
                    NoiseSpec::None,
                    sub_seed(seed, "three-circles/a"),
                )?;
                let b = generate_circle(
                    &[4.0, 0.0],
                    1.0,
                    200,
                    NoiseSpec::None,
                    sub_seed(seed, "three-circles/b"),
                )?;
                let c = generate_circle(
                    &[6.5, 0.0],
                    0.5,
                    200,
                    NoiseSpec::None,
                    sub_seed(seed, "three-circles/c"),
                )?;
                PointCloud::concat(&[a, b, c])
            }
            Dataset::TwoNoisyCircles => {
                let a = generate_circle(
                    &[0.0, 0.0],
                    2.0,
                    100,
                    NoiseSpec::GaussianRadial { sd: 0.1 },
                    sub_seed(seed, "two-noisy-circles/a"),
                )?;
                let b = generate_circle(
                    &[3.5, 0.0],
                    0.5,
                    300,
                    NoiseSpec::GaussianRadial { sd: 0.1 },
                    sub_seed(seed, "two-noisy-circles/b"),
                )?;
                PointCloud::concat(&[a, b])
            }
            Dataset::DensityPair => {
                let a = generate_circle(
                    &[0.0, 0.0],
                    1.0,
                    100,
                    NoiseSpec::None,
                    sub_seed(seed, "density-pair/a"),
                )?;
                let b = generate_circle(
                    &[3.0, 0.0],
                    1.0,
                    400,
                    NoiseSpec::None,
                    sub_seed(seed, "density-pair/b"),
                )?;
                PointCloud::concat(&[a, b])
            }
            Dataset::SizePair => {
                let a = generate_circle(
                    &[0.0, 0.0],
                    1.0,
                    200,
                    NoiseSpec::None,
                    sub_seed(seed, "size-pair/a"),
                )?;
                let b = generate_circle(
                    &[7.0, 0.0],
                    4.0,
                    800,
                    NoiseSpec::None,
                    sub_seed(seed, "size-pair/b"),
                )?;
                PointCloud::concat(&[a, b])
            }
            Dataset::FourShapes => {
                let square = generate_polygon_edges(
                    &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                    100,
                    0.15,
                    sub_seed(seed, "four-shapes/square"),
                )?;
                let circle = generate_circle(
                    &[3.5, 0.5],
                    1.0,
                    800,
                    NoiseSpec::ExponentialInOut {
                        rate_in: 4.0,
                        rate_out: 10.0,
                        n_in: 400,
                        n_out: 400,
                    },
                    sub_seed(seed, "four-shapes/circle"),
                )?;
                // equilateral, side 2
                let equilateral = generate_polygon_edges(
                    &[[0.0, -3.8], [2.0, -3.8], [1.0, -3.8 + 3f64.sqrt()]],
                    200,
                    0.15,
                    sub_seed(seed, "four-shapes/equilateral"),
                )?;
                // isosceles: smaller and denser than the rest
                let isosceles = generate_polygon_edges(
                    &[[3.2, -3.3], [4.2, -3.3], [3.7, -1.8]],
                    200,
                    0.15,
                    sub_seed(seed, "four-shapes/isosceles"),
                )?;
                PointCloud::concat(&[square, circle, equilateral, isosceles])
            }
        }
    }
}
