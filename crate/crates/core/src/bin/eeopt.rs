use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eeopt::config::{Overrides, RunConfig};
use eeopt::sweep::{self, Scale, SweepParam, SweepSpec};
use eeopt::{Error, Result};

/// Energy-efficiency optimum and EE-SE tradeoff of a flat-fading link.
#[derive(Parser)]
#[command(name = "eeopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal spectral efficiency and energy per bit for each case.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Total power, energy per bit and decision function on a grid of C.
    Tradeoff {
        #[command(flatten)]
        common: Common,
        /// Smallest spectral efficiency (bits/s/Hz).
        #[arg(long, allow_hyphen_values = true)]
        c_min: f64,
        /// Largest spectral efficiency (bits/s/Hz).
        #[arg(long)]
        c_max: f64,
        #[arg(long)]
        points: usize,
    },
    /// Optimum for each value of one swept parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// kappa, noise_figure_db, p_static, distance_m or nakagami_m.
        #[arg(long)]
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long)]
        points: usize,
        /// Space the values logarithmically.
        #[arg(long)]
        log: bool,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; overrides `output` from the file. Stdout otherwise.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Suppress the summary on stderr.
    #[arg(long, short)]
    quiet: bool,
    /// Comma-separated cases: static_csit, fading_cdit, fading_csit.
    #[arg(long, value_delimiter = ',')]
    cases: Option<Vec<String>>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    noise_psd_dbm_per_hz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    noise_figure_db: Option<f64>,
    #[arg(long)]
    noise_power_w: Option<f64>,
    #[arg(long)]
    pa_efficiency: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    p_static_w: Option<f64>,
    /// Power-law circuit exponent (replaces `circuit_power`).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    distance_m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g0_db: Option<f64>,
    #[arg(long)]
    path_exp: Option<f64>,
    #[arg(long)]
    nakagami_m: Option<f64>,
    /// Bisection tolerance on C.
    #[arg(long)]
    delta: Option<f64>,
    /// Largest C reached by bracket doubling.
    #[arg(long)]
    doubling_cap: Option<f64>,
    #[arg(long)]
    quadrature_order: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            bandwidth_hz: self.bandwidth_hz,
            noise_psd_dbm_per_hz: self.noise_psd_dbm_per_hz,
            noise_figure_db: self.noise_figure_db,
            noise_power_w: self.noise_power_w,
            pa_efficiency: self.pa_efficiency,
            kappa: self.kappa,
            p_static_w: self.p_static_w,
            alpha: self.alpha,
            delta: self.delta,
            doubling_cap: self.doubling_cap,
            cases: self.cases.clone(),
            output: self.output.clone(),
            distance_m: self.distance_m,
            g0_db: self.g0_db,
            path_exp: self.path_exp,
            nakagami_m: self.nakagami_m,
            quadrature_order: self.quadrature_order,
        }
    }

    fn load(&self) -> Result<RunConfig> {
        let overrides = self.overrides();
        match &self.config {
            Some(path) => RunConfig::load(path, &overrides),
            None => RunConfig::from_toml_str_with("", &overrides),
        }
    }
}

fn open_output(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn destination(cfg: &RunConfig) -> String {
    cfg.output
        .as_ref()
        .map_or_else(|| "stdout".to_string(), |p| p.display().to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize { common } => {
            let cfg = common.load()?;
            let rows = sweep::run_optimize(&cfg)?;
            sweep::write_optimize_csv(open_output(&cfg)?, &rows)?;
            if !common.quiet {
                eprintln!("{}", cfg.describe());
                for r in &rows {
                    eprintln!(
                        "{:>12}: C* = {:.6} bits/s/Hz, EE* = {:.6e} J/bit ({} iterations)",
                        r.case.label(),
                        r.result.c_star,
                        r.result.ee_star,
                        r.result.iterations
                    );
                }
            }
        }
        Command::Tradeoff {
            common,
            c_min,
            c_max,
            points,
        } => {
            let cfg = common.load()?;
            let rows = sweep::run_tradeoff(&cfg, c_min, c_max, points)?;
            sweep::write_tradeoff_csv(open_output(&cfg)?, &rows)?;
            if !common.quiet {
                eprintln!("{}", cfg.describe());
                eprintln!("wrote {} rows to {}", rows.len(), destination(&cfg));
            }
        }
        Command::Sweep {
            common,
            param,
            start,
            stop,
            points,
            log,
        } => {
            let cfg = common.load()?;
            let param: SweepParam = param.parse()?;
            let scale = if log { Scale::Log } else { Scale::Linear };
            let spec = SweepSpec::new(param, start, stop, points, scale)?;
            let rows = sweep::run_sweep(&cfg, &spec)?;
            sweep::write_sweep_csv(open_output(&cfg)?, &rows)?;
            if !common.quiet {
                eprintln!("{}", cfg.describe());
                eprintln!(
                    "swept {param} over {points} values; wrote {} rows to {}",
                    rows.len(),
                    destination(&cfg)
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
