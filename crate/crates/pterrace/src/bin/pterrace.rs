use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pterrace::datasets::Dataset;
use pterrace::pipeline::{
    self, BandwidthSweep, GridConfig, InputSpec, OutputKind, PipelineConfig,
};
use pterrace::pointcloud;
use pterrace::render;
use pterrace::terrace;
use pterrace::Error;

#[derive(Parser)]
#[command(name = "pterrace", version, about = "Persistence terraces for point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a named synthetic dataset to CSV.
    Generate {
        /// three-circles | two-noisy-circles | density-pair | size-pair | four-shapes
        dataset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "pointcloud.csv")]
        out: PathBuf,
    },
    /// Run the full pipeline: sweep bandwidths, build the terrace, render.
    Terrace(TerraceArgs),
    /// Compute and export the barcode at a single bandwidth.
    Slice {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        bandwidth: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long = "grid-res", value_delimiter = ',', default_value = "64")]
        grid_res: Vec<usize>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "barcode.csv")]
        out: PathBuf,
    },
    /// Recompute the terrace area summary from a matrix CSV.
    Area {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "area.csv")]
        out: PathBuf,
    },
    /// Sample a point cloud from a PGM image (intensity-weighted + boundary).
    SampleImage {
        #[arg(long)]
        pgm: PathBuf,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 1500)]
        boundary: usize,
        /// Weight by darkness (maxval - intensity) instead of intensity.
        #[arg(long, default_value_t = true)]
        darkness: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "pointcloud.csv")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Point-cloud CSV input.
    #[arg(long, conflicts_with_all = ["dataset", "pgm"])]
    input: Option<PathBuf>,
    /// Named synthetic dataset.
    #[arg(long, conflicts_with = "pgm")]
    dataset: Option<String>,
    /// Grayscale PGM image input.
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Intensity-weighted sample count for PGM input.
    #[arg(long, default_value_t = 5000)]
    pgm_points: usize,
    /// Boundary sample count for PGM input.
    #[arg(long, default_value_t = 1500)]
    pgm_boundary: usize,
}

impl InputArgs {
    fn to_spec(&self) -> Option<InputSpec> {
        if let Some(path) = &self.input {
            Some(InputSpec::Csv { path: path.clone() })
        } else if let Some(name) = &self.dataset {
            Some(InputSpec::Dataset { name: name.clone() })
        } else {
            self.pgm.as_ref().map(|path| InputSpec::Pgm {
                path: path.clone(),
                n_points: self.pgm_points,
                n_boundary: self.pgm_boundary,
                darkness: true,
            })
        }
    }
}

#[derive(Args)]
struct TerraceArgs {
    /// TOML pipeline config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
    /// Homological dimension of the terrace.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "bw-min")]
    bw_min: Option<f64>,
    #[arg(long = "bw-max")]
    bw_max: Option<f64>,
    #[arg(long = "bw-count")]
    bw_count: Option<usize>,
    /// Geometric instead of arithmetic bandwidth spacing.
    #[arg(long = "log-spacing")]
    log_spacing: bool,
    /// Grid vertices per axis (single value or comma list).
    #[arg(long = "grid-res", value_delimiter = ',')]
    grid_res: Option<Vec<usize>>,
    /// Box margin override; default 3 * max bandwidth.
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long, env = "PTERRACE_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Outputs to write: matrix_csv, matrix_json, area_csv, terrace_svg,
    /// area_svg, barcode_svg@<bandwidth>.
    #[arg(long, value_delimiter = ',')]
    emit: Option<Vec<String>>,
    /// Heights above the cap share one color bucket in the terrace SVG.
    #[arg(long = "height-cap")]
    height_cap: Option<usize>,
}

impl TerraceArgs {
    fn build_config(&self) -> Result<PipelineConfig, Error> {
        let base = match &self.config {
            Some(path) => Some(pipeline::load_config_file(path)?),
            None => None,
        };
        let input = self
            .input
            .to_spec()
            .or_else(|| base.as_ref().map(|c| c.input.clone()))
            .ok_or_else(|| Error::Config("no input: pass --input, --dataset, or --pgm".into()))?;

        // dataset-specific sweep defaults when nothing else is given
        let dataset_sweep = match &input {
            InputSpec::Dataset { name } => Dataset::from_name(name).ok().map(|d| d.default_sweep()),
            _ => None,
        };
        let base_sweep = base
            .as_ref()
            .map(|c| c.bandwidths.clone())
            .or_else(|| {
                dataset_sweep.map(|(min, max, count)| BandwidthSweep {
                    min,
                    max,
                    count,
                    log_spacing: false,
                })
            });
        let bandwidths = BandwidthSweep {
            min: self
                .bw_min
                .or_else(|| base_sweep.as_ref().map(|s| s.min))
                .ok_or_else(|| Error::Config("missing --bw-min".into()))?,
            max: self
                .bw_max
                .or_else(|| base_sweep.as_ref().map(|s| s.max))
                .ok_or_else(|| Error::Config("missing --bw-max".into()))?,
            count: self
                .bw_count
                .or_else(|| base_sweep.as_ref().map(|s| s.count))
                .ok_or_else(|| Error::Config("missing --bw-count".into()))?,
            log_spacing: self.log_spacing
                || base_sweep.as_ref().map(|s| s.log_spacing).unwrap_or(false),
        };

        let base_grid = base.as_ref().map(|c| c.grid.clone()).unwrap_or_default();
        let grid = GridConfig {
            resolution: self.grid_res.clone().unwrap_or(base_grid.resolution),
            explicit_box: base_grid.explicit_box,
            margin: self.margin.or(base_grid.margin),
        };

        let outputs: Vec<OutputKind> = match &self.emit {
            Some(items) => items
                .iter()
                .map(|s| OutputKind::from_flag(s))
                .collect::<Result<_, _>>()?,
            None => base.as_ref().map(|c| c.outputs.clone()).unwrap_or_else(|| {
                vec![
                    OutputKind::MatrixCsv,
                    OutputKind::AreaCsv,
                    OutputKind::TerraceSvg,
                    OutputKind::AreaSvg,
                ]
            }),
        };

        Ok(PipelineConfig {
            input,
            dim_k: self.k.or_else(|| base.as_ref().map(|c| c.dim_k)).unwrap_or(1),
            bandwidths,
            grid,
            outputs,
            workers: self
                .workers
                .or_else(|| base.as_ref().map(|c| c.workers))
                .unwrap_or(1),
            seed: self.seed.or_else(|| base.as_ref().map(|c| c.seed)).unwrap_or(0),
            out_dir: self
                .out_dir
                .clone()
                .or_else(|| base.as_ref().map(|c| c.out_dir.clone()))
                .unwrap_or_else(|| PathBuf::from(".")),
            height_cap: self.height_cap.or_else(|| base.as_ref().and_then(|c| c.height_cap)),
        })
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate { dataset, seed, out } => {
            let cloud = Dataset::from_name(&dataset)?.generate(seed)?;
            pointcloud::save_csv(&cloud, &out)?;
            eprintln!("wrote {} points to {}", cloud.len(), out.display());
            Ok(())
        }
        Command::Terrace(args) => {
            let config = args.build_config()?;
            let result = pipeline::run_pipeline(&config)?;
            for path in &result.written {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Slice {
            input,
            bandwidth,
            k,
            grid_res,
            margin,
            seed,
            out,
        } => {
            let spec = input
                .to_spec()
                .ok_or_else(|| Error::Config("no input: pass --input, --dataset, or --pgm".into()))?;
            if !(bandwidth > 0.0) {
                return Err(Error::Config("bandwidth must be > 0".into()));
            }
            let config = PipelineConfig {
                input: spec,
                dim_k: k,
                bandwidths: BandwidthSweep {
                    min: bandwidth,
                    max: bandwidth * 2.0,
                    count: 1,
                    log_spacing: false,
                },
                grid: GridConfig {
                    resolution: grid_res,
                    explicit_box: None,
                    margin,
                },
                outputs: vec![],
                workers: 1,
                seed,
                out_dir: PathBuf::from("."),
                height_cap: None,
            };
            let (barcode, _) = pipeline::single_bandwidth_barcode(&config, bandwidth)?;
            pterrace::persistence::save_barcode_csv(&barcode, bandwidth, &out)?;
            eprintln!("wrote {} bars to {}", barcode.pairs.len(), out.display());
            Ok(())
        }
        Command::Area { input, k, out } => {
            let matrix = terrace::matrix_from_csv(&input, k)?;
            let summary = terrace::terrace_area(&matrix)?;
            render::write_atomic(&out, terrace::area_to_csv_string(&summary).as_bytes())?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::SampleImage {
            pgm,
            n,
            boundary,
            darkness,
            seed,
            out,
        } => {
            let img = pterrace::imageio::load_pgm(&pgm)?;
            let mut clouds = vec![pterrace::imageio::sample_intensity(&img, n, darkness, seed)?];
            if boundary > 0 {
                clouds.push(pterrace::imageio::sample_boundary(&img, boundary, seed)?);
            }
            let cloud = pointcloud::PointCloud::concat(&clouds)?;
            pointcloud::save_csv(&cloud, &out)?;
            eprintln!("wrote {} points to {}", cloud.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
