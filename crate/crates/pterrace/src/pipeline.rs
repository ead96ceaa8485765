//! Bandwidth-sweep orchestration: input -> KDE -> persistence -> terrace ->
//! area -> rendered outputs, with a JSON run manifest.
//!
//! The sweep is a parallel map over bandwidths on a bounded worker pool;
//! per-bandwidth results are collected in index order, so every output is
//! byte-identical regardless of the worker count.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datasets::Dataset;
use crate::imageio;
use crate::kde::{self, GridSpec, KDE_NORMALIZATION};
use crate::persistence::{self, Barcode};
use crate::pointcloud::{self, BoundingBox, PointCloud};
use crate::render::{self, RenderOptions};
use crate::terrace::{self, BettiStepFunction, TerraceAreaSummary, TerraceMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputSpec {
    Csv { path: PathBuf },
    Dataset { name: String },
    Pgm {
        path: PathBuf,
        n_points: usize,
        n_boundary: usize,
        #[serde(default = "default_true")]
        darkness: bool,
    },
}

fn default_true() -> bool {
    true
}

/// Equally spaced bandwidth sweep over [min, max]; `log_spacing` switches to
/// geometric spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSweep {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub log_spacing: bool,
}

impl BandwidthSweep {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0) || !(self.min < self.max) {
            return Err(Error::Config(format!(
                "bandwidth range must satisfy 0 < min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count < 1 {
            return Err(Error::Config("bandwidth count must be >= 1".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let n = self.count;
        let values = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log_spacing {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect();
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Vertices per axis; a single entry applies to every axis.
    pub resolution: Vec<usize>,
    /// Explicit evaluation box; overrides the margin rule.
    #[serde(default)]
    pub explicit_box: Option<BoundingBox>,
    /// Margin override; default is 3 * max bandwidth.
    #[serde(default)]
    pub margin: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            resolution: vec![64],
            explicit_box: None,
            margin: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    MatrixCsv,
    MatrixJson,
    AreaCsv,
    TerraceSvg,
    AreaSvg,
    /// Rotated barcode at the column nearest this bandwidth.
    BarcodeSvg { bandwidth: f64 },
}

impl OutputKind {
    /// Parse an `--emit` item: a known name or `barcode_svg@<bandwidth>`.
    pub fn from_flag(s: &str) -> Result<OutputKind> {
        match s {
            "matrix_csv" => Ok(OutputKind::MatrixCsv),
            "matrix_json" => Ok(OutputKind::MatrixJson),
            "area_csv" => Ok(OutputKind::AreaCsv),
            "terrace_svg" => Ok(OutputKind::TerraceSvg),
            "area_svg" => Ok(OutputKind::AreaSvg),
            _ => {
                if let Some(bw) = s.strip_prefix("barcode_svg@") {
                    let bandwidth = bw.parse::<f64>().map_err(|_| {
                        Error::Config(format!("bad bandwidth in emit item '{s}'"))
                    })?;
                    Ok(OutputKind::BarcodeSvg { bandwidth })
                } else {
                    Err(Error::Config(format!("unknown emit item '{s}'")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: InputSpec,
    /// Homological dimension of the terrace (0 = components, 1 = loops, ...).
    pub dim_k: usize,
    pub bandwidths: BandwidthSweep,
    #[serde(default)]
    pub grid: GridConfig,
    pub outputs: Vec<OutputKind>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub height_cap: Option<usize>,
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: PipelineConfig,
    pub kde_normalization: String,
    pub grid: GridSpec,
    pub bandwidths: Vec<f64>,
    pub per_bandwidth_ms: Vec<f64>,
    pub outputs: Vec<ManifestEntry>,
}

pub struct RunResult {
    pub matrix: TerraceMatrix,
    pub area: Option<TerraceAreaSummary>,
    pub barcodes: Vec<Barcode>,
    pub grid_spec: GridSpec,
    pub manifest: Manifest,
    pub written: Vec<PathBuf>,
}

pub fn load_input(input: &InputSpec, seed: u64) -> Result<PointCloud> {
    match input {
        InputSpec::Csv { path } => pointcloud::load_csv(path),
        InputSpec::Dataset { name } => Dataset::from_name(name)?.generate(seed),
        InputSpec::Pgm {
            path,
            n_points,
            n_boundary,
            darkness,
        } => {
            let img = imageio::load_pgm(path)?;
            let mut clouds = vec![imageio::sample_intensity(&img, *n_points, *darkness, seed)?];
            if *n_boundary > 0 {
                clouds.push(imageio::sample_boundary(&img, *n_boundary, seed)?);
            }
            PointCloud::concat(&clouds)
        }
    }
}

fn resolve_grid(config: &PipelineConfig, cloud: &PointCloud, max_bw: f64) -> Result<GridSpec> {
    let dim = cloud.dim();
    let resolution: Vec<usize> = match config.grid.resolution.len() {
        1 => vec![config.grid.resolution[0]; dim],
        n if n == dim => config.grid.resolution.clone(),
        n => {
            return Err(Error::Config(format!(
                "grid resolution has {n} entries for a {dim}-dimensional cloud"
            )))
        }
    };
    if let Some(bounds) = &config.grid.explicit_box {
        return GridSpec::new(bounds.clone(), resolution);
    }
    let margin = config.grid.margin.unwrap_or(3.0 * max_bw);
    let bounds = pointcloud::bounding_box(cloud, margin)?;
    GridSpec::new(bounds, resolution)
}

fn stage<T>(stage: &'static str, bandwidth_index: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage,
        bandwidth_index,
        source: Box::new(e),
    })
}

/// Run the full sweep and write every requested output plus
/// `manifest.json` under `config.out_dir`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunResult> {
    let bandwidths = config.bandwidths.values()?;
    if config.workers < 1 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    let cloud = load_input(&config.input, config.seed)?;
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let max_bw = *bandwidths.last().expect("nonempty");
    let grid_spec = resolve_grid(config, &cloud, max_bw)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let k = config.dim_k;
    let sweep: Result<Vec<(Barcode, BettiStepFunction, f64)>> = pool.install(|| {
        bandwidths
            .par_iter()
            .enumerate()
            .map(|(i, &h)| {
                let t0 = Instant::now();
                let grid = stage("kde", i, kde::evaluate_kde(&cloud, h, &grid_spec))?;
                let barcode =
                    stage("persistence", i, persistence::superlevel_persistence(&grid, k))?;
                let sf = terrace::betti_step_function(&barcode, k);
                Ok((barcode, sf, t0.elapsed().as_secs_f64() * 1e3))
            })
            .collect()
    });
    let sweep = sweep?;
    let barcodes: Vec<Barcode> = sweep.iter().map(|(b, _, _)| b.clone()).collect();
    let step_functions: Vec<BettiStepFunction> = sweep.iter().map(|(_, sf, _)| sf.clone()).collect();
    let timings: Vec<f64> = sweep.iter().map(|(_, _, t)| *t).collect();

    let matrix = stage("assemble", 0, terrace::assemble_terrace(&step_functions, &bandwidths, k))?;

    let needs_area = config
        .outputs
        .iter()
        .any(|o| matches!(o, OutputKind::AreaCsv | OutputKind::AreaSvg));
    let area = match terrace::terrace_area(&matrix) {
        Ok(a) => Some(a),
        Err(e) if needs_area => return Err(Error::Stage {
            stage: "area",
            bandwidth_index: 0,
            source: Box::new(e),
        }),
        Err(_) => None,
    };

    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| Error::io(&config.out_dir, e))?;

    let render_options = RenderOptions {
        height_cap: config.height_cap,
        ..Default::default()
    };

    let mut written: Vec<PathBuf> = Vec::new();
    let mut entries: Vec<ManifestEntry> = Vec::new();
    let mut emit = |name: String, bytes: Vec<u8>| -> Result<PathBuf> {
        let path = config.out_dir.join(&name);
        render::write_atomic(&path, &bytes)?;
        entries.push(ManifestEntry {
            file: name,
            sha256: sha256_hex(&bytes),
        });
        Ok(path)
    };

    for output in &config.outputs {
        let path = match output {
            OutputKind::MatrixCsv => emit(
                "matrix.csv".into(),
                terrace::matrix_to_csv_string(&matrix).into_bytes(),
            )?,
            OutputKind::MatrixJson => emit(
                "matrix.json".into(),
                terrace::matrix_to_json_string(&matrix, &grid_spec).into_bytes(),
            )?,
            OutputKind::AreaCsv => emit(
                "area.csv".into(),
                terrace::area_to_csv_string(area.as_ref().expect("checked above")).into_bytes(),
            )?,
            OutputKind::TerraceSvg => emit(
                "terrace.svg".into(),
                render::terrace_to_svg(&matrix, &render_options)?.into_bytes(),
            )?,
            OutputKind::AreaSvg => emit(
                "area.svg".into(),
                render::area_to_svg(area.as_ref().expect("checked above"), &render_options)?
                    .into_bytes(),
            )?,
            OutputKind::BarcodeSvg { bandwidth } => {
                let column = nearest_index(&bandwidths, *bandwidth);
                let svg = render::barcode_slice_to_svg(
                    &matrix,
                    column,
                    &barcodes[column],
                    &render_options,
                )?;
                emit(format!("barcode_{column}.svg"), svg.into_bytes())?
            }
        };
        written.push(path);
    }

    let manifest = Manifest {
        config: config.clone(),
        kde_normalization: KDE_NORMALIZATION.to_string(),
        grid: grid_spec.clone(),
        bandwidths: bandwidths.clone(),
        per_bandwidth_ms: timings,
        outputs: entries,
    };
    let manifest_bytes =
        serde_json::to_vec_pretty(&manifest).expect("manifest serializable");
    let manifest_path = config.out_dir.join("manifest.json");
    render::write_atomic(&manifest_path, &manifest_bytes)?;
    written.push(manifest_path);

    Ok(RunResult {
        matrix,
        area,
        barcodes,
        grid_spec,
        manifest,
        written,
    })
}

pub fn nearest_index(values: &[f64], target: f64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (*a - target)
                .abs()
                .partial_cmp(&(*b - target).abs())
                .expect("finite")
        })
        .map(|(i, _)| i)
        .unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write as _;
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Compute the barcode for a single bandwidth without assembling a terrace.
pub fn single_bandwidth_barcode(
    config: &PipelineConfig,
    bandwidth: f64,
) -> Result<(Barcode, GridSpec)> {
    let cloud = load_input(&config.input, config.seed)?;
    let grid_spec = resolve_grid(config, &cloud, bandwidth)?;
    let grid = kde::evaluate_kde(&cloud, bandwidth, &grid_spec)?;
    let barcode = persistence::superlevel_persistence(&grid, config.dim_k)?;
    Ok((barcode, grid_spec))
}

pub fn load_config_file(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
