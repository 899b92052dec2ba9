use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nms_sim::commands::{
    cmd_dressed, cmd_modes, cmd_oracle, cmd_spectrum, cmd_sweep, resolve_grid, resolve_params, SweepQuantity,
};
use nms_sim::csv_io::Table;
use nms_sim::oracle::TrajectoryConfig;
use nms_sim::sweep::{thread_pool, SweepSpec, SweepVariable};
use nms_sim::{Result, SimError};

#[derive(Parser)]
#[command(name = "nms-sim", version, about = "Normal-mode splitting in a driven optomechanical cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Device configuration; the bundled reference device when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (CSV, or JSON for `dressed`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    power_w: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    detuning_hz: Option<f64>,
}

#[derive(Args)]
struct Grid {
    #[arg(long)]
    grid_start_hz: Option<f64>,
    #[arg(long)]
    grid_stop_hz: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variable {
    Detuning,
    Power,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Modes,
    SpectrumPeaks,
}

#[derive(Subcommand)]
enum Command {
    /// Coupling rates, undamped and damped normal modes, threshold.
    Modes {
        #[command(flatten)]
        common: Common,
    },
    /// Output spectrum S(±ω) and S_NPS on a frequency grid.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Detuning (Hz) or power (W) sweep of mode frequencies or fitted peaks.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        variable: Variable,
        #[arg(long, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, allow_negative_numbers = true)]
        stop: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, value_enum, default_value = "modes")]
        what: What,
        #[command(flatten)]
        grid: Grid,
    },
    /// Time-domain Langevin simulation compared with the analytic spectrum.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = TrajectoryConfig::default().dt)]
        dt_s: f64,
        /// Total integration steps per trajectory, burn-in included.
        #[arg(long, default_value_t = TrajectoryConfig::default().n_steps)]
        steps: usize,
        #[arg(long, default_value_t = TrajectoryConfig::default().n_segments)]
        segments: usize,
        #[arg(long, default_value_t = TrajectoryConfig::default().burn_in)]
        burn_in: usize,
        /// Steps averaged into one stored sample.
        #[arg(long, default_value_t = TrajectoryConfig::default().decimation)]
        decimation: usize,
        #[arg(long, default_value_t = 1)]
        trajectories: usize,
    },
    /// Dressed-state ladder and nonlinear levels as JSON.
    Dressed {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        m_max: usize,
    },
}

fn emit_table(table: &Table, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => table.write_file(path),
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn params(c: &Common) -> Result<nms_core::SystemParams> {
    resolve_params(c.config.as_deref(), c.power_w, c.detuning_hz)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Modes { common } => {
            let report = cmd_modes(&params(&common)?)?;
            print!("{}", report.summary());
            if let Some(path) = &common.out {
                report.table.write_file(path)?;
            }
        }
        Command::Spectrum { common, grid } => {
            let p = params(&common)?;
            let spec = resolve_grid(&p, grid.grid_start_hz, grid.grid_stop_hz, grid.grid_points)?;
            emit_table(&cmd_spectrum(&p, &spec)?, common.out.as_deref())?;
        }
        Command::Sweep {
            common,
            variable,
            start,
            stop,
            points,
            what,
            grid,
        } => {
            let p = params(&common)?;
            let spec = SweepSpec {
                variable: match variable {
                    Variable::Detuning => SweepVariable::Detuning,
                    Variable::Power => SweepVariable::Power,
                },
                start,
                stop,
                n_points: points,
            };
            let grid = resolve_grid(&p, grid.grid_start_hz, grid.grid_stop_hz, grid.grid_points)?;
            let quantity = match what {
                What::Modes => SweepQuantity::Modes,
                What::SpectrumPeaks => SweepQuantity::SpectrumPeaks,
            };
            let report = cmd_sweep(&p, &spec, quantity, &grid)?;
            emit_table(&report.table, common.out.as_deref())?;
            if report.failures > 0 {
                eprintln!("warning: {} of {} sweep points failed", report.failures, points);
            }
        }
        Command::Oracle {
            common,
            seed,
            dt_s,
            steps,
            segments,
            burn_in,
            decimation,
            trajectories,
        } => {
            let p = params(&common)?;
            let cfg = TrajectoryConfig {
                dt: dt_s,
                n_steps: steps,
                n_segments: segments,
                seed,
                burn_in,
                decimation,
                ..TrajectoryConfig::default()
            };
            let report = cmd_oracle(&p, &cfg, trajectories)?;
            print!("{}", report.text);
            if let Some(path) = &common.out {
                report.table.write_file(path)?;
            }
        }
        Command::Dressed { common, n_max, m_max } => {
            let value = cmd_dressed(&params(&common)?, n_max, m_max)?;
            let text = serde_json::to_string_pretty(&value).expect("json values serialise") + "\n";
            match &common.out {
                Some(path) => write_text(path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_pool().and_then(|pool| pool.install(|| run(cli.command)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
