use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use holosim::cloud::{normalize_unit_cube, voxel_centers, voxelize};
use holosim::codec::{octree_decode, octree_encode};
use holosim::harness::{
    emit_csv, octree_payloads, render_svg_plot, requirements_check, run_experiment,
    synthetic_cloud, transmit_joint, transmit_separated, ExperimentConfig, ExperimentKind,
    ExperimentOutput, JointConfig, JointModels, RequirementsInput, Shape,
};
use holosim::io::{read_ply, write_ply, Bitstream, PlyFormat};
use holosim::metrics::{QualityReport, Symmetry};
use holosim::phy::{ChannelKind, McsTable};
use holosim::sampling::{
    sample_fps, sample_poisson_count, sample_random, sample_semantic, SamplerWeights,
    DEFAULT_ITERATIONS, DEFAULT_PATCH_K,
};
use holosim::{PointCloud, Result};

#[derive(Parser)]
#[command(
    name = "holosim",
    version,
    about = "Semantic-aware point-cloud transmission simulator"
)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: the config's, else ./out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// PLY file; a synthetic shape is generated when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cube")]
    shape: ShapeArg,
    #[arg(long, default_value_t = 2048)]
    points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Cube,
    Box,
    Fold,
    Stairs,
    Sphere,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Semantic,
    Fps,
    Random,
    Poisson,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Separated,
    Joint,
}

#[derive(Subcommand)]
enum Command {
    /// Down-sample a cloud.
    Sample {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "semantic")]
        method: Method,
        #[arg(long, default_value_t = 0.125)]
        ratio: f64,
    },
    /// Octree-encode a cloud into a bitstream file.
    Encode {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 10)]
        depth: u8,
    },
    /// Decode an octree bitstream back to voxel centers.
    Decode { bitstream: PathBuf },
    /// Send one cloud through either scheme and report its quality.
    Transmit {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "joint")]
        scheme: Scheme,
        #[arg(long, default_value_t = 10.0)]
        snr: f64,
        #[arg(long, default_value = "rayleigh")]
        channel: ChannelKind,
        #[arg(long, default_value_t = 4096)]
        budget: usize,
        #[arg(long, default_value_t = 10)]
        depth: u8,
    },
    /// Quality of a degraded cloud against a reference.
    Metrics {
        reference: PathBuf,
        degraded: PathBuf,
        #[arg(long)]
        mean: bool,
    },
    /// Run the sweep described by --config and write CSV and SVG results.
    Sweep,
    /// Check a stream against the rate, latency and PER targets.
    Reqcheck {
        #[arg(long, default_value_t = 1e6)]
        points: f64,
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        #[arg(long, default_value_t = 120.0)]
        bits_per_point: f64,
        #[arg(long, default_value_t = 1e11)]
        link_rate: f64,
        #[arg(long, default_value_t = 0.5)]
        latency_ms: f64,
        #[arg(long, default_value_t = 1e-6)]
        per: f64,
    },
    /// Render a CSV column pair as an SVG line chart.
    Plot {
        csv: PathBuf,
        #[arg(long, default_value = "param")]
        x: String,
        #[arg(long, default_value = "d1_psnr")]
        y: String,
        #[arg(long, default_value = "method")]
        group: String,
    },
}

fn shape(s: ShapeArg) -> Shape {
    match s {
        ShapeArg::Cube => Shape::Cube,
        ShapeArg::Box => Shape::Box,
        ShapeArg::Fold => Shape::Fold,
        ShapeArg::Stairs => Shape::Stairs,
        ShapeArg::Sphere => Shape::Sphere,
    }
}

fn load_source(src: &Source, seed: u64) -> Result<PointCloud> {
    match &src.input {
        Some(p) => Ok(normalize_unit_cube(&read_ply(p)?)?.0),
        None => synthetic_cloud(shape(src.shape), src.points, seed),
    }
}

fn out_file(dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| holosim::Error::Io {
        path: Some(dir.to_path_buf()),
        source,
    })?;
    Ok(dir.join(name))
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let config = cli
        .config
        .as_ref()
        .map(ExperimentConfig::load)
        .transpose()?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Sample {
            source,
            method,
            ratio,
        } => {
            let cloud = load_source(&source, seed)?;
            let m = ((ratio * cloud.len() as f64).round() as usize).clamp(1, cloud.len());
            let indices = match method {
                Method::Semantic => {
                    let w = match config.as_ref().and_then(|c| c.sampler_weights.as_ref()) {
                        Some(p) => SamplerWeights::load(p)?,
                        None => SamplerWeights::default(),
                    };
                    sample_semantic(
                        &cloud,
                        m as f64 / cloud.len() as f64,
                        &w,
                        DEFAULT_PATCH_K,
                        DEFAULT_ITERATIONS,
                    )?
                    .indices
                }
                Method::Fps => sample_fps(&cloud, m, (seed % cloud.len() as u64) as usize)?,
                Method::Random => sample_random(&cloud, m, seed)?,
                Method::Poisson => sample_poisson_count(&cloud, m, seed)?,
            };
            let sampled = cloud.select(&indices);
            let path = out_file(&out, "sampled.ply")?;
            write_ply(&sampled, &path, PlyFormat::BinaryLittleEndian)?;
            let q = QualityReport::compute(&cloud, &sampled, Some(1.0), Symmetry::Max)?;
            println!(
                "{} of {} points -> {} (chamfer {:.6})",
                sampled.len(),
                cloud.len(),
                path.display(),
                q.chamfer
            );
        }
        Command::Encode { source, depth } => {
            let cloud = load_source(&source, seed)?;
            let stream = octree_encode(&voxelize(&cloud, depth)?.voxels, depth)?;
            let path = out_file(&out, "cloud.hpbs")?;
            stream.write_file(&path)?;
            println!(
                "{} points at depth {depth}: {} bytes ({:.2} bits/point) -> {}",
                cloud.len(),
                stream.bytes().len(),
                stream.bit_len() as f64 / cloud.len() as f64,
                path.display()
            );
        }
        Command::Decode { bitstream } => {
            let stream = Bitstream::read_file(&bitstream)?;
            let voxels = octree_decode(&stream)?;
            let depth = stream.bytes()[8];
            let cloud = PointCloud::new(voxel_centers(&voxels, depth))?;
            let path = out_file(&out, "decoded.ply")?;
            write_ply(&cloud, &path, PlyFormat::BinaryLittleEndian)?;
            println!(
                "{} voxels at depth {depth} -> {}",
                voxels.len(),
                path.display()
            );
        }
        Command::Transmit {
            source,
            scheme,
            snr,
            channel,
            budget,
            depth,
        } => {
            let cloud = load_source(&source, seed)?;
            let out = match scheme {
                Scheme::Separated => {
                    let table = match config.as_ref().and_then(|c| c.mcs_table.as_ref()) {
                        Some(p) => McsTable::load(p)?,
                        None if channel == ChannelKind::Awgn => McsTable::awgn(),
                        None => McsTable::rayleigh(),
                    };
                    transmit_separated(
                        &cloud,
                        &octree_payloads(&cloud, depth)?,
                        &table,
                        budget,
                        channel,
                        snr,
                        seed,
                    )?
                }
                Scheme::Joint => {
                    let joint = config
                        .as_ref()
                        .map_or_else(JointConfig::default, |c| c.joint);
                    transmit_joint(
                        &cloud,
                        &JointModels::default(),
                        &joint,
                        budget,
                        channel,
                        snr,
                        seed,
                    )?
                }
            };
            println!(
                "symbols {} bits {} failed {}",
                out.symbols, out.bits, out.failed
            );
            println!("{}\n{}", QualityReport::CSV_HEADER, out.report.csv_row());
        }
        Command::Metrics {
            reference,
            degraded,
            mean,
        } => {
            let mode = if mean { Symmetry::Mean } else { Symmetry::Max };
            let q =
                QualityReport::compute(&read_ply(reference)?, &read_ply(degraded)?, None, mode)?;
            println!("{}\n{}", QualityReport::CSV_HEADER, q.csv_row());
        }
        Command::Sweep => {
            let mut cfg =
                config.ok_or_else(|| holosim::Error::Config("sweep needs --config".into()))?;
            if let Some(s) = cli.seed {
                cfg.seeds = vec![s];
            }
            let out_dir = cli.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
            match run_experiment(&cfg)? {
                ExperimentOutput::Sweep(result) => {
                    let name = match cfg.kind {
                        ExperimentKind::SnrSweep => "snr_sweep",
                        _ => "sampling_sweep",
                    };
                    let csv = out_file(&out_dir, &format!("{name}.csv"))?;
                    emit_csv(&result, &csv)?;
                    let svg = csv.with_extension("svg");
                    let y = if cfg.kind == ExperimentKind::SnrSweep {
                        "d1_psnr"
                    } else {
                        "chamfer"
                    };
                    render_svg_plot(&csv, "param", y, "method", &svg)?;
                    for r in &result.rows {
                        log::info!(
                            "{} {} seed {}: {:.3} symbols/point",
                            r.method,
                            r.param,
                            r.seed,
                            r.symbols_per_point()
                        );
                    }
                    println!(
                        "{} rows -> {} and {}",
                        result.rows.len(),
                        csv.display(),
                        svg.display()
                    );
                }
                ExperimentOutput::Requirements(report) => print!("{report}"),
            }
        }
        Command::Reqcheck {
            points,
            fps,
            bits_per_point,
            link_rate,
            latency_ms,
            per,
        } => {
            let input = match &config {
                Some(c) => c.requirements,
                None => RequirementsInput {
                    points_per_frame: points,
                    fps,
                    bits_per_point,
                    link_rate_bps: link_rate,
                    latency_ms,
                    per,
                },
            };
            print!("{}", requirements_check(&input)?);
        }
        Command::Plot { csv, x, y, group } => {
            let path = out_file(&out, "plot.svg")?;
            render_svg_plot(&csv, &x, &y, &group, &path)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
