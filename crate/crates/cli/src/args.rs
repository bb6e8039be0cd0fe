use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nonholonomic::dynamics::Flow;
use nonholonomic::pathintegral::{Manifold, MeasureMode};

use crate::config::{parse_list, parse_param, CommandKind, LoopRef, OutputFormat, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nonholonomic", version, about = "Geometry, dynamics, defects and path integrals on charts with torsion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric, connections, torsion, contortion and curvatures at a point.
    Tensors {
        #[command(flatten)]
        chart: ChartArgs,
        /// Coordinates of the point, comma separated.
        #[arg(long, value_parser = parse_numbers, allow_hyphen_values = true)]
        at: Numbers,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Trajectory along the Christoffel connection.
    Geodesic(FlowArgs),
    /// Trajectory along the affine connection.
    Autoparallel(FlowArgs),
    /// Nonholonomic variation along a trajectory.
    Variation {
        #[command(flatten)]
        flow: FlowArgs,
        /// Base trajectory.
        #[arg(long, value_enum, default_value_t = FlowArg::Autoparallel)]
        base: FlowArg,
        /// Variation component δq^μ(t); repeat once per coordinate.
        #[arg(long = "deltaq", required = true, allow_hyphen_values = true)]
        deltaq: Vec<String>,
    },
    /// Burgers vector, winding and Frank angle of a loop.
    Burgers {
        #[command(flatten)]
        chart: ChartArgs,
        /// Loop file: a JSON list of vertices or a loop object.
        #[arg(long = "loop")]
        loop_path: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Summary of the sliced short-time kernel.
    Amplitude {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Number of time slices.
        #[arg(long)]
        slices: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Energy levels from the transfer-matrix spectrum.
    Spectrum {
        #[command(flatten)]
        grid: GridArgs,
        /// Time steps for the extrapolation ladder, comma separated.
        #[arg(long, value_parser = parse_numbers)]
        ladder: Option<Numbers>,
        /// Number of distinct levels to report.
        #[arg(long)]
        levels: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Executes a run configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output path of the config.
        #[arg(long)]
        output: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FlowArg {
    Geodesic,
    Autoparallel,
}

impl From<FlowArg> for Flow {
    fn from(f: FlowArg) -> Flow {
        match f {
            FlowArg::Geodesic => Flow::Geodesic,
            FlowArg::Autoparallel => Flow::Autoparallel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ManifoldArg {
    Ring,
    Sphere,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    /// Chart file or built-in name.
    #[arg(long)]
    pub chart: String,
    /// Chart parameter override `name=value`; may be repeated.
    #[arg(long = "param", value_parser = parse_param, allow_hyphen_values = true)]
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Tolerance profile: default, strict or loose.
    #[arg(long)]
    pub tolerance: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    /// Initial point, comma separated.
    #[arg(long, value_parser = parse_numbers, allow_hyphen_values = true)]
    pub at: Numbers,
    /// Initial velocity, comma separated.
    #[arg(long, value_parser = parse_numbers, allow_hyphen_values = true)]
    pub velocity: Numbers,
    #[arg(long, allow_hyphen_values = true)]
    pub t_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_enum)]
    pub manifold: ManifoldArg,
    /// Radius.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Ring grid points.
    #[arg(long, default_value_t = 256)]
    pub points: usize,
    /// Sphere polar grid points.
    #[arg(long, default_value_t = 32)]
    pub theta_points: usize,
    /// Sphere azimuthal grid points.
    #[arg(long, default_value_t = 64)]
    pub phi_points: usize,
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<MeasureMode>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
}

/// Comma-separated list of numbers given as one argument.
#[derive(Clone, Debug, PartialEq)]
pub struct Numbers(pub Vec<f64>);

fn parse_numbers(s: &str) -> Result<Numbers, String> {
    parse_list(s).map(Numbers)
}

fn parse_measure(s: &str) -> Result<MeasureMode, String> {
    s.parse().map_err(|e: nonholonomic::GeomError| e.to_string())
}

impl GridArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.manifold = Some(match self.manifold {
            ManifoldArg::Ring => Manifold::Ring {
                r: self.r,
                points: self.points,
            },
            ManifoldArg::Sphere => Manifold::Sphere {
                r: self.r,
                theta_points: self.theta_points,
                phi_points: self.phi_points,
            },
        });
        c.measure = self.measure;
        c.mass = self.mass;
        c.hbar = self.hbar;
    }
}

impl ChartArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.chart = Some(self.chart.clone());
        c.params = self.params.iter().cloned().collect();
    }
}

impl CommonArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.tolerance = self.tolerance.clone();
        c.output_path = self.output.clone();
        c.output_format = self.format;
    }
}

impl FlowArgs {
    fn to_config(&self, command: CommandKind) -> RunConfig {
        let mut c = RunConfig::new(command);
        self.chart.apply(&mut c);
        self.common.apply(&mut c);
        c.at = Some(self.at.0.clone());
        c.velocity = Some(self.velocity.0.clone());
        c.t_start = self.t_start;
        c.t_end = self.t_end;
        c.step = self.step;
        c.mass = self.mass;
        c
    }
}

/// What `main` should do after parsing.
pub enum Invocation {
    /// Run the config; relative paths resolve against `base`.
    Run { config: RunConfig, base: PathBuf },
}

impl Command {
    pub fn into_invocation(self) -> Result<Invocation, CliError> {
        let here = PathBuf::from(".");
        let config = match self {
            Command::Tensors { chart, at, common } => {
                let mut c = RunConfig::new(CommandKind::Tensors);
                chart.apply(&mut c);
                common.apply(&mut c);
                c.at = Some(at.0);
                c
            }
            Command::Geodesic(f) => f.to_config(CommandKind::Geodesic),
            Command::Autoparallel(f) => f.to_config(CommandKind::Autoparallel),
            Command::Variation { flow, base, deltaq } => {
                let mut c = flow.to_config(CommandKind::Variation);
                c.flow = Some(base.into());
                c.deltaq = Some(deltaq);
                c
            }
            Command::Burgers { chart, loop_path, common } => {
                let mut c = RunConfig::new(CommandKind::Burgers);
                chart.apply(&mut c);
                common.apply(&mut c);
                c.loop_spec = Some(LoopRef::Path(loop_path));
                c
            }
            Command::Amplitude { grid, epsilon, slices, common } => {
                let mut c = RunConfig::new(CommandKind::Amplitude);
                grid.apply(&mut c);
                common.apply(&mut c);
                c.epsilon = epsilon;
                c.slices = slices;
                c
            }
            Command::Spectrum { grid, ladder, levels, common } => {
                let mut c = RunConfig::new(CommandKind::Spectrum);
                grid.apply(&mut c);
                common.apply(&mut c);
                c.ladder = ladder.map(|l| l.0);
                c.levels = levels;
                c
            }
            Command::Run { config, output } => {
                let mut c = RunConfig::load(&config)?;
                if output.is_some() {
                    c.output_path = output;
                }
                let base = config
                    .parent()
                    .filter(|p| !p.as_os_str().is_empty())
                    .map(PathBuf::from)
                    .unwrap_or_else(|| here.clone());
                return Ok(Invocation::Run { config: c, base });
            }
        };
        Ok(Invocation::Run { config, base: here })
    }
}
