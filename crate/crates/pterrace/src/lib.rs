//! Persistence terraces for point clouds.
//!
//! A persistence terrace is a three-dimensional summary of superlevel-set
//! persistent homology computed across a sweep of kernel density bandwidths:
//! the x-axis is the bandwidth, the y-axis the filtration (density) value,
//! and the z-axis the Betti number of the superlevel set. The crate covers
//! the full pipeline:
//!
//! * [`pointcloud`] — point-cloud model, CSV I/O, seeded synthetic generators
//! * [`kde`] — Gaussian kernel density estimation on a regular grid
//! * [`persistence`] — cubical superlevel-set persistent homology
//! * [`terrace`] — Betti step functions, terrace matrix, terrace area summary
//! * [`imageio`] — PGM images and intensity-weighted point sampling
//! * [`render`] — deterministic SVG output (terrace heatmap, area plot, barcodes)
//! * [`pipeline`] — the bandwidth sweep orchestration used by the CLI

pub mod datasets;
pub mod error;
pub mod imageio;
pub mod kde;
pub mod persistence;
pub mod pipeline;
pub mod pointcloud;
pub mod render;
pub mod rng;
pub mod terrace;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
