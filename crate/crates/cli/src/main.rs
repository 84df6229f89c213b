//! `rsr`: reconstruct triangle meshes from point clouds.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use rsr_core::io::Format;
use rsr_core::mesh_out::compute_metrics;
use rsr_core::pipeline::{self, PipelineConfig};
use rsr_core::synth;
use rsr_core::{Error, Options, Params, PointCloud, TriangleMesh};

#[derive(Debug, Parser)]
#[command(name = "rsr", version, about = "Oriented manifold meshes from point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct a mesh from a point cloud (ply, obj or xyz).
    Reconstruct(ReconstructArgs),
    /// Write a synthetic point cloud as PLY.
    Synth(SynthArgs),
    /// Print topology metrics of an existing triangle mesh.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    input: PathBuf,
    /// Output mesh; the extension picks OBJ or PLY.
    #[arg(short, long)]
    output: PathBuf,
    /// Write metrics JSON here.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Neighbors per point in the candidate graph.
    #[arg(long, default_value_t = 30)]
    k: usize,
    /// Cull edges longer than this multiple of the mean edge length.
    #[arg(long, default_value_t = 20.0)]
    r: f64,
    /// Maximum angle between endpoint normals, in degrees.
    #[arg(long, default_value_t = 60.0)]
    theta: f64,
    /// Minimum hop distance around a hole for a handle.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Per-component genus limit.
    #[arg(long, conflicts_with = "genus0")]
    max_genus: Option<usize>,
    /// Never add handles.
    #[arg(long)]
    genus0: bool,
    /// Smooth the input and measure edges by projection distance.
    #[arg(long)]
    noisy: bool,
    /// Fail instead of estimating normals when the input has none.
    #[arg(long)]
    no_estimate_normals: bool,
    /// Seed for internal randomized structures; does not change the mesh.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Sphere,
    Torus,
    TwoSheets,
}

#[derive(Debug, Args)]
struct SynthArgs {
    shape: Shape,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Torus major radius.
    #[arg(long, default_value_t = 2.0)]
    major: f64,
    /// Torus minor radius.
    #[arg(long, default_value_t = 0.7)]
    minor: f64,
    /// Distance between the two sheets (grid spacing is 1).
    #[arg(long, default_value_t = 0.5)]
    gap: f64,
    /// Tilt every normal by up to this many degrees.
    #[arg(long, default_value_t = 0.0)]
    normal_noise: f64,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    input: PathBuf,
    /// Write JSON here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Exit status classes.
#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
    Assertion(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::Assertion(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Assertion(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Params(_) | Error::MissingNormals => Failure::Config(msg),
            Error::Format(_) | Error::EmptyInput | Error::NonFinite(_) => Failure::Io(msg),
            Error::Topology(_) | Error::Geom(_) | Error::Assertion(_) => Failure::Assertion(msg),
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn mesh_format(path: &Path) -> Result<Format, Failure> {
    match Format::from_path(path) {
        Ok(Format::Xyz) | Err(_) => Err(Failure::Config(format!(
            "{}: mesh output must end in .obj or .ply",
            path.display()
        ))),
        Ok(f) => Ok(f),
    }
}

fn reconstruct(args: &ReconstructArgs) -> Result<(), Failure> {
    let format = mesh_format(&args.output)?;
    let params = Params {
        k: args.k,
        r: args.r,
        theta: args.theta,
        n: args.n,
        max_genus: if args.genus0 { Some(0) } else { args.max_genus },
        noisy: args.noisy,
        ..Params::default()
    };
    params.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let cloud = PointCloud::load(&args.input)?;
    info!("loaded {} points from {}", cloud.len(), args.input.display());
    let config = PipelineConfig {
        params,
        skip_normal_estimation: args.no_estimate_normals,
        options: Options {
            seed: args.seed,
            ..Options::default()
        },
    };
    let out = pipeline::run(&cloud, &config)?;
    out.mesh.save(&args.output, format)?;
    if let Some(path) = &args.metrics {
        write_text(path, &out.metrics.to_json())?;
    }
    info!(
        "wrote {} triangles to {} ({} boundary edges, {} handles)",
        out.mesh.triangles.len(),
        args.output.display(),
        out.metrics.boundary_edges,
        out.stats.handles.len()
    );
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), Failure> {
    let bad = |m: &str| Err(Failure::Config(m.to_string()));
    match args.shape {
        Shape::Sphere if args.n < 4 => return bad("sphere needs n >= 4"),
        Shape::Torus if !(args.major > args.minor && args.minor > 0.0) => {
            return bad("torus needs major > minor > 0")
        }
        Shape::TwoSheets if args.gap.is_nan() || args.gap <= 0.0 => return bad("gap must be positive"),
        _ => {}
    }
    if !(0.0..=180.0).contains(&args.normal_noise) {
        return bad("normal noise must lie in [0, 180] degrees");
    }
    let mut cloud = match args.shape {
        Shape::Sphere => synth::sample_sphere(args.n, args.seed),
        Shape::Torus => synth::sample_torus(args.n, args.major, args.minor, args.seed),
        Shape::TwoSheets => synth::sample_two_sheets(args.n, args.gap),
    };
    if args.normal_noise > 0.0 {
        cloud = synth::add_normal_noise(&cloud, args.normal_noise, args.seed);
    }
    cloud.save(&args.output, Format::Ply)?;
    info!("wrote {} points to {}", cloud.len(), args.output.display());
    Ok(())
}

fn metrics(args: &MetricsArgs) -> Result<(), Failure> {
    let mesh = TriangleMesh::load(&args.input)?;
    let json = compute_metrics(&mesh, mesh.vertices.len(), None).to_json();
    match &args.output {
        Some(path) => write_text(path, &json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RSR_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Reconstruct(a) => reconstruct(a),
        Command::Synth(a) => synth(a),
        Command::Metrics(a) => metrics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rsr: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
