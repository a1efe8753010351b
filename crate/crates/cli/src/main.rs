mod config;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use config::{ConfigError, Origin, Settings};
use experiments::{resolve, run, Experiment, Resolved, RunError};

const EXPERIMENTS: &str = "\
Experiments and the result each one reproduces:
  sample-pp      a single realization of a base-station process (pattern plot)
  success-curve  success probability against threshold; --analytic gives the
                 Poisson closed form (success and outage curves)
  adg            asymptotic deployment gain by the kappa ratio and by the
                 horizontal shift of the success curve (ADG table)
  slope          outage slope in dB per decade in the small-threshold regime
                 (outage curves under Nakagami and composite fading)
  rate           ergodic rate by simulation and by the shifted Poisson curve
                 (rate comparison)
  mean-sinr      mean SINR by simulation and by the ADG approximation
                 (mean SINR comparison)
  contact-ccdf   empirical contact-distance CCDF (cluster contact bound)
  kappa          the small-threshold outage coefficient kappa (kappa table)

Every numeric flag can also be given as `key = value` in the file passed to
--config (keys use `_` or `-`); flags override the file. A seed is required
for every sampling experiment.";

#[derive(Parser)]
#[command(name = "adglab", version = env!("ADGLAB_VERSION"), about = "SINR and deployment-gain experiments for cellular networks", after_help = EXPERIMENTS)]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "ADGLAB_THREADS", value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// File of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// ppp, mcp, mhp or lattice.
    #[arg(long)]
    process: Option<String>,
    /// Intensity for ppp and lattice.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    parent_lambda: Option<String>,
    #[arg(long)]
    mean_daughters: Option<String>,
    #[arg(long)]
    cluster_radius: Option<String>,
    #[arg(long)]
    base_lambda: Option<String>,
    #[arg(long)]
    hard_core: Option<String>,
    /// Side of the square window.
    #[arg(long)]
    window: Option<String>,
    /// torus or plane.
    #[arg(long)]
    topology: Option<String>,
    /// Replicates.
    #[arg(long)]
    n: Option<String>,
    /// Output CSV; the sidecar goes next to it as `.meta.json`.
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

#[derive(Args)]
struct Channel {
    /// nonsingular or singular.
    #[arg(long)]
    path_loss: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// rayleigh, nakagami, lognormal or composite.
    #[arg(long)]
    fading: Option<String>,
    /// Nakagami parameter.
    #[arg(long)]
    m: Option<String>,
    /// Shadowing standard deviation in dB.
    #[arg(long)]
    sigma_db: Option<String>,
    /// Mean SNR at unit distance, in dB.
    #[arg(long)]
    snr_db: Option<String>,
    /// Noise power W.
    #[arg(long)]
    noise: Option<String>,
}

#[derive(Args)]
struct Grid {
    #[arg(long)]
    theta_min: Option<String>,
    #[arg(long)]
    theta_max: Option<String>,
    #[arg(long)]
    theta_step: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump one point pattern as `x,y`.
    #[command(allow_negative_numbers = true)]
    SamplePp {
        #[command(flatten)]
        common: Common,
    },
    /// Success probability on a dB threshold grid.
    #[command(allow_negative_numbers = true)]
    SuccessCurve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: Channel,
        #[command(flatten)]
        grid: Grid,
        /// Closed-form Poisson curve instead of sampling.
        #[arg(long)]
        analytic: bool,
    },
    /// Asymptotic deployment gain against the Poisson network.
    #[command(allow_negative_numbers = true)]
    Adg {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: Channel,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        p_lo: Option<String>,
        #[arg(long)]
        p_hi: Option<String>,
        /// Also report the deployment gain at this success probability.
        #[arg(long)]
        p_target: Option<String>,
    },
    /// Outage slope in dB per decade.
    #[command(allow_negative_numbers = true)]
    Slope {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: Channel,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        fit_lo: Option<String>,
        #[arg(long)]
        fit_hi: Option<String>,
    },
    /// Ergodic rate and its ADG approximation.
    #[command(allow_negative_numbers = true)]
    Rate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: Channel,
    },
    /// Mean SINR and its ADG approximation.
    #[command(allow_negative_numbers = true)]
    MeanSinr {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: Channel,
    },
    /// Empirical contact-distance CCDF.
    #[command(allow_negative_numbers = true)]
    ContactCcdf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x_max: Option<String>,
        #[arg(long)]
        x_step: Option<String>,
    },
    /// Small-threshold outage coefficient kappa.
    #[command(allow_negative_numbers = true)]
    Kappa {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: Channel,
    },
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::SamplePp { .. } => Experiment::SamplePp,
            Command::SuccessCurve { .. } => Experiment::SuccessCurve,
            Command::Adg { .. } => Experiment::Adg,
            Command::Slope { .. } => Experiment::Slope,
            Command::Rate { .. } => Experiment::Rate,
            Command::MeanSinr { .. } => Experiment::MeanSinr,
            Command::ContactCcdf { .. } => Experiment::ContactCcdf,
            Command::Kappa { .. } => Experiment::Kappa,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::SamplePp { common }
            | Command::SuccessCurve { common, .. }
            | Command::Adg { common, .. }
            | Command::Slope { common, .. }
            | Command::Rate { common, .. }
            | Command::MeanSinr { common, .. }
            | Command::ContactCcdf { common, .. }
            | Command::Kappa { common, .. } => common,
        }
    }
}

/// File settings overlaid with every flag given on the command line.
fn settings(cmd: &Command, sub: &ArgMatches) -> Result<Settings, ConfigError> {
    let mut s = match &cmd.common().config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    for id in sub.ids() {
        let key = id.as_str();
        // flattened argument groups are listed alongside the arguments
        let group = matches!(key, "Common" | "Channel" | "Grid");
        let global = matches!(key, "config" | "threads");
        if group || global || sub.value_source(key) != Some(ValueSource::CommandLine) {
            continue;
        }
        if key == "analytic" {
            s.set_flag(key, sub.get_flag(key).to_string());
            continue;
        }
        if let Some(v) = sub.get_raw(key).and_then(|mut v| v.next()) {
            let v = v
                .to_str()
                .ok_or_else(|| ConfigError::new(Origin::Flag, key, "value is not valid UTF-8"))?;
            s.set_flag(key, v.to_string());
        }
    }
    Ok(s)
}

fn write_outputs(
    r: &Resolved,
    csv: &[u8],
    out: &Path,
    threads: usize,
    seconds: f64,
) -> std::io::Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(out, csv)?;
    let meta = serde_json::json!({
        "experiment": r.experiment.name(),
        "version": env!("ADGLAB_VERSION"),
        "seed": r.scenario.seed,
        "n": r.n,
        "scenario": r.scenario,
        "settings": r.settings.to_map(),
        "threads": threads,
        "wall_time_s": seconds,
        "output": out.display().to_string(),
    });
    let mut text = serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(out.with_extension("meta.json"), text)
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let Some((_, sub)) = matches.subcommand() else {
        unreachable!("a subcommand is required")
    };
    let experiment = cli.command.experiment();
    let resolved = match settings(&cli.command, sub).and_then(|s| resolve(experiment, &s)) {
        Ok(r) => r,
        Err(e) => return config_failure(&e),
    };
    let out = PathBuf::from(
        resolved
            .settings
            .raw("out")
            .map(|(v, _)| v.clone())
            .unwrap_or_else(|| format!("{}.csv", experiment.name())),
    );
    let threads = cli.threads.unwrap_or(0);
    let start = Instant::now();
    let result = adglab::stream::with_threads(threads, || run(&resolved));
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(csv) => match write_outputs(&resolved, &csv, &out, threads, seconds) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", out.display());
                ExitCode::from(1)
            }
        },
        Err(RunError::Config(e)) => config_failure(&e),
        Err(RunError::Runtime(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(3)
        }
    }
}
