//! Command-line driver for Dirac eigenvalue experiments.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirac_core::geometry::{FourierShape, ShapeRecord};
use dirac_core::shapeopt::{
    default_initial_shape, optimize_shape, Objective, ObjectiveKind, OptimizeOptions, SolverContext, DEFAULT_MODES,
};
use serde::Serialize;

use crate::commands::Constraint;
use crate::config::{Format, Overrides, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "dirac-spectra", version, about = "Eigenvalues of the Dirac operator with infinite-mass boundary conditions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (standard output if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Number of sources `N`.
    #[arg(long = "sources", global = true)]
    pub sources: Option<usize>,
    /// Collocation points per source.
    #[arg(long, global = true)]
    pub m_factor: Option<usize>,
    /// Number of interior points `L`.
    #[arg(long, global = true)]
    pub interior: Option<usize>,
    /// Source offset along the outward normal.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Scan window as `LO,HI`.
    #[arg(long, global = true, value_delimiter = ',', value_name = "LO,HI")]
    pub window: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest refined `s(λ)` accepted as an eigenvalue.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    MinLambda1,
    MinLambda2,
    MinLambda3,
    MaxRatio2,
    MaxRatio3,
}

impl From<ObjectiveArg> for ObjectiveKind {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::MinLambda1 => ObjectiveKind::MinimizeEigenvalue(1),
            ObjectiveArg::MinLambda2 => ObjectiveKind::MinimizeEigenvalue(2),
            ObjectiveArg::MinLambda3 => ObjectiveKind::MinimizeEigenvalue(3),
            ObjectiveArg::MaxRatio2 => ObjectiveKind::MaximizeRatio(2),
            ObjectiveArg::MaxRatio3 => ObjectiveKind::MaximizeRatio(3),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First eigenvalue of the unit disk for several source counts.
    ValidateDisk {
        #[arg(long = "n", value_delimiter = ',', default_values_t = [100, 200, 300, 400, 500, 600])]
        sources: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        mass: f64,
    },
    /// Eigenvalues of rectangles with fixed area (b = 1/a) or perimeter (b = 2 - a).
    RectSweep {
        #[arg(long, value_enum, default_value = "area")]
        constraint: Constraint,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Smallest width (default 1.0 for area, 0.2 for perimeter).
        #[arg(long)]
        a_min: Option<f64>,
        /// Largest width (default 3.0 for area, 1.0 for perimeter).
        #[arg(long)]
        a_max: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        a_step: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// First eigenvalue over the admissible triangle region.
    TriangleGrid {
        #[arg(long, default_value_t = 8)]
        resolution: usize,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
    },
    /// First eigenvalue of random convex polygons against the regular one.
    PolygonRandom {
        #[arg(long, default_value_t = 5)]
        sides: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
    },
    /// Eigenvalues of unit-area regular polygons and the disk.
    RegularPolygonTable {
        #[arg(long, default_value_t = 3)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Conjectured quadrilateral bound on random quadrilaterals.
    QuadBoundCheck {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0])]
        masses: Vec<f64>,
        /// Allow non-convex quadrilaterals.
        #[arg(long)]
        non_convex: bool,
    },
    /// Rectangle eigenvalue bounds.
    Bounds {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
    },
    /// Nelder–Mead shape optimization over Fourier domains; writes the trace as JSON lines.
    Optimize {
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = DEFAULT_MODES)]
        modes: usize,
        #[arg(long, default_value_t = 300)]
        iterations: usize,
        /// Initial shape record (default r = 1 + sin(2θ)/2 + cos(2θ)/2).
        #[arg(long)]
        init: Option<PathBuf>,
        /// Where to write the final shape record.
        #[arg(long)]
        shape_out: Option<PathBuf>,
        /// Sources of the solver inside the loop.
        #[arg(long)]
        inner_sources: Option<usize>,
    },
    /// Eigenvalues along the interpolation between the disk and a stored shape.
    MinkowskiSweep {
        #[arg(long)]
        shape: PathBuf,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// |u1| and |u2| of an eigenfunction on a grid.
    Eigenfunction {
        /// Shape record (default: unit-area disk).
        #[arg(long)]
        shape: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
}

impl GlobalArgs {
    fn overrides(&self) -> Result<Overrides> {
        let window = match self.window.as_deref() {
            None => None,
            Some(&[lo, hi]) => Some([lo, hi]),
            Some(_) => return Err(CliError::Argument("--window takes LO,HI".into())),
        };
        Ok(Overrides {
            sources: self.sources,
            m_factor: self.m_factor,
            interior: self.interior,
            eta: self.eta,
            window,
            step: self.step,
            tol: self.tol,
            threshold: self.threshold,
            out: self.out.clone(),
            format: self.format,
            seed: self.seed,
        })
    }

    /// Config file (or defaults) with the flags applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides()?)?;
        Ok(cfg)
    }
}

pub fn read_shape(path: &Path) -> Result<ShapeRecord> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

#[derive(Serialize)]
struct Summary<'a> {
    objective: &'a Objective,
    best_value: f64,
    final_value: Option<f64>,
    evaluations: usize,
    iterations: usize,
    near_pinching: bool,
    shape: ShapeRecord,
}

fn optimize(cfg: &RunConfig, objective: Objective, init: FourierShape, modes: usize, iterations: usize, inner: Option<usize>, shape_out: Option<&Path>) -> Result<()> {
    let mut opts = OptimizeOptions {
        modes,
        ..OptimizeOptions::default()
    };
    opts.nelder_mead.max_iter = iterations;
    if let Some(n) = inner {
        opts.solver = SolverContext::reduced().with_sources(n);
    }
    let trace = optimize_shape(&objective, &init, &opts)?;
    let mut out = sink(cfg.output.path.as_deref())?;
    for entry in &trace.iterations {
        serde_json::to_writer(&mut out, entry)?;
        writeln!(out)?;
    }
    out.flush()?;
    let summary = Summary {
        objective: &objective,
        best_value: trace.best_value,
        final_value: trace.final_value,
        evaluations: trace.evaluations,
        iterations: trace.iterations.len(),
        near_pinching: trace.near_pinching,
        shape: ShapeRecord::from_fourier(&trace.final_shape),
    };
    if let Some(p) = shape_out {
        std::fs::write(p, serde_json::to_string_pretty(&summary.shape)?)?;
    }
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = cli.global.resolve()?;
    let write = |t: output::Table| t.write(cfg.output.format, cfg.output.path.as_deref());
    match cli.command {
        Command::ValidateDisk { sources, mass } => write(commands::validate_disk(&cfg, &sources, mass)?),
        Command::RectSweep {
            constraint,
            mass,
            a_min,
            a_max,
            a_step,
            k,
        } => {
            let (lo, hi) = match constraint {
                Constraint::Area => (a_min.unwrap_or(1.0), a_max.unwrap_or(3.0)),
                Constraint::Perimeter => (a_min.unwrap_or(0.2), a_max.unwrap_or(1.0)),
            };
            let widths = commands::grid(lo, hi, a_step)?;
            write(commands::rect_sweep(&cfg, constraint, mass, &widths, k)?)
        }
        Command::TriangleGrid { resolution, mass } => write(commands::triangle_grid(&cfg, resolution, mass)?),
        Command::PolygonRandom { sides, count, mass } => write(commands::polygon_random(&cfg, sides, count, mass)?),
        Command::RegularPolygonTable { n_min, n_max, mass, k } => {
            let sides: Vec<usize> = (n_min..=n_max).collect();
            write(commands::regular_polygon_table(&cfg, &sides, mass, k)?)
        }
        Command::QuadBoundCheck {
            count,
            masses,
            non_convex,
        } => {
            let t = commands::quad_bound_check(&cfg, count, &masses, !non_convex)?;
            let violations = t.column("violation").unwrap_or_default().iter().filter(|&&v| v > 0.0).count();
            eprintln!("violations: {violations} of {}", t.rows.len());
            write(t)
        }
        Command::Bounds { a, b, mass } => write(commands::bounds_table(a, b, mass)?),
        Command::Optimize {
            objective,
            mass,
            modes,
            iterations,
            init,
            shape_out,
            inner_sources,
        } => {
            let objective = Objective::new(objective.into(), mass)?;
            let init = match init {
                Some(p) => read_shape(&p)?.to_fourier()?,
                None => default_initial_shape(),
            };
            optimize(&cfg, objective, init, modes, iterations, inner_sources, shape_out.as_deref())
        }
        Command::MinkowskiSweep { shape, steps, mass, k } => {
            let shape = read_shape(&shape)?.to_fourier()?;
            write(commands::minkowski_sweep(&cfg, &shape, steps, mass, k)?)
        }
        Command::Eigenfunction {
            shape,
            mass,
            index,
            grid,
        } => {
            let record = shape.as_deref().map(read_shape).transpose()?;
            write(commands::eigenfunction_grid(&cfg, record.as_ref(), mass, index, grid)?)
        }
    }
}
