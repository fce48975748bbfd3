use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use front_lab::{commands, Overrides, RunConfig};

/// Numerical laboratory for invasion fronts in parabolic gradient systems
/// u_t = -grad V(u) + u_xx.
#[derive(Parser)]
#[command(name = "front-lab", version)]
struct Cli {
    /// TOML config file; CLI flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $FRONT_LAB_OUT, then ".").
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonFlags {
    /// Potential family: fisher | quintic-gl | quadratic | polynomial.
    #[arg(long)]
    family: Option<String>,
    /// Fisher parameter nu in (0, 1].
    #[arg(long)]
    nu: Option<f64>,
    /// Quintic Ginzburg-Landau curvature mu1.
    #[arg(long)]
    mu1: Option<f64>,
    /// Quadratic-family curvature mu.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    snapshot_stride: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    /// Write per-snapshot profile CSVs under snapshots/.
    #[arg(long)]
    store_profiles: bool,
    #[arg(long)]
    bracket_lo: Option<f64>,
    #[arg(long)]
    bracket_hi: Option<f64>,
    #[arg(long)]
    c_tol: Option<f64>,
    /// Target bracket width for nonlin-speed.
    #[arg(long)]
    resolution: Option<f64>,
    /// Reference speed for the stability radii.
    #[arg(long)]
    c0: Option<f64>,
    /// Tracked frame speeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    tracked: Option<Vec<f64>>,
    /// Invading state components, comma separated.
    #[arg(long, value_delimiter = ',')]
    u_minus: Option<Vec<f64>>,
    #[arg(long)]
    scan_lo: Option<f64>,
    #[arg(long)]
    scan_hi: Option<f64>,
    #[arg(long)]
    scan_points: Option<usize>,
    /// Initial condition kind: bump | plateau.
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    center: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the full speed atlas and write atlas.json.
    Speeds(CommonFlags),
    /// Locate a pushed front by steep-manifold shooting.
    Front(CommonFlags),
    /// Run the PDE and record the invasion trace.
    Simulate(CommonFlags),
    /// Bracket the maximal nonlinear invasion speed by frame simulations.
    NonlinSpeed(CommonFlags),
    /// Scan the weighted energy of a pushed front over frame speeds.
    EnergyScan(CommonFlags),
    /// Classification table for the Fisher family over a list of nu.
    FisherTable {
        #[command(flatten)]
        flags: CommonFlags,
        /// Comma-separated nu values.
        #[arg(long, value_delimiter = ',', default_value = "1,0.7,0.5,0.25")]
        nu_list: Vec<f64>,
    },
}

impl CommonFlags {
    fn overrides(&self, out: Option<PathBuf>) -> Overrides {
        Overrides {
            family: self.family.clone(),
            nu: self.nu,
            mu1: self.mu1,
            mu: self.mu,
            length: self.length,
            dx: self.dx,
            dt: self.dt,
            t_final: self.t_final,
            snapshot_stride: self.snapshot_stride,
            margin: self.margin,
            store_profiles: if self.store_profiles { Some(true) } else { None },
            bracket_lo: self.bracket_lo,
            bracket_hi: self.bracket_hi,
            c_tol: self.c_tol,
            resolution: self.resolution,
            c0: self.c0,
            tracked: self.tracked.clone(),
            u_minus: self.u_minus.clone(),
            scan_lo: self.scan_lo,
            scan_hi: self.scan_hi,
            scan_points: self.scan_points,
            ic: self.ic.clone(),
            amplitude: self.amplitude,
            center: self.center,
            width: self.width,
            out,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = match &cli.command {
        Command::Speeds(f)
        | Command::Front(f)
        | Command::Simulate(f)
        | Command::NonlinSpeed(f)
        | Command::EnergyScan(f) => f,
        Command::FisherTable { flags, .. } => flags,
    };
    let mut cfg = match RunConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("front-lab: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    flags.overrides(cli.out.clone()).apply(&mut cfg);
    let result = match &cli.command {
        Command::Speeds(_) => commands::cmd_speeds(&cfg),
        Command::Front(_) => commands::cmd_front(&cfg),
        Command::Simulate(_) => commands::cmd_simulate(&cfg),
        Command::NonlinSpeed(_) => commands::cmd_nonlin_speed(&cfg),
        Command::EnergyScan(_) => commands::cmd_energy_scan(&cfg),
        Command::FisherTable { nu_list, .. } => commands::cmd_fisher_table(&cfg, nu_list),
    };
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("front-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
