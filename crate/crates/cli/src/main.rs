use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::f64::consts::PI;
use std::path::PathBuf;

use qnet::scenarios::{
    preset, preset_names, run_fmap, run_preset, run_sweep, Axis, FmapSpec, PresetJob,
    PresetOptions, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "qnet", version, about = "Driven dissipative qubit-network transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunFlags {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Fixed integrator step in units of 1/ω₀.
    #[arg(long)]
    dt: Option<f64>,
    /// Final time in units of ct.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named preset.
    Preset {
        /// Preset name; `--list` shows them all.
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        /// List preset names and exit.
        #[arg(long)]
        list: bool,
        /// Print the resolved configs as JSON instead of running them.
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a sweep described by a JSON config.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Write the suppression factor |F| over an (η, Δφ) grid for one site pair.
    Fmap {
        /// Site pair, e.g. `1,3`.
        #[arg(long, value_delimiter = ',', default_values_t = [1, 3])]
        pair: Vec<usize>,
        #[arg(long, default_value_t = 2.5)]
        eta_max: f64,
        #[arg(long, default_value_t = 101)]
        eta_points: usize,
        /// Δφ spans [-k·π, k·π].
        #[arg(long, default_value_t = 2.0)]
        dphi_span: f64,
        #[arg(long, default_value_t = 129)]
        dphi_points: usize,
        #[arg(long, default_value = "fmap")]
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn linspace(a: f64, b: f64, n: usize) -> Result<Axis> {
    if n < 2 {
        bail!("a grid needs at least 2 points, got {n}");
    }
    Ok(Axis::Values((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()))
}

fn options(flags: &RunFlags) -> PresetOptions {
    let mut opts = PresetOptions::default();
    if let Some(dir) = &flags.out {
        opts.dir = dir.clone();
    }
    if let Some(t) = flags.threads {
        opts.threads = t.max(1);
    }
    opts.dt = flags.dt;
    opts.horizon = flags.horizon;
    opts
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preset { list: true, .. } => {
            for name in preset_names() {
                println!("{name}");
            }
        }
        Command::Preset { name, dump, flags, .. } => {
            let name = name.expect("required unless --list");
            let opts = options(&flags);
            if dump {
                for job in preset(&name, &opts)? {
                    match job {
                        PresetJob::Sweep(cfg) => println!("{}", cfg.to_json_pretty()),
                        PresetJob::Fmap(spec) => println!("{spec:?}"),
                    }
                }
                return Ok(());
            }
            for path in run_preset(&name, &opts)? {
                println!("{}", path.display());
            }
        }
        Command::Sweep { config, flags } => {
            let mut cfg = ScenarioConfig::from_path(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let opts = options(&flags);
            if let Some(dir) = flags.out {
                cfg.outputs.dir = dir;
            }
            if let Some(dt) = opts.dt {
                cfg.integrator.dt = Some(dt);
            }
            if let Some(h) = opts.horizon {
                cfg.horizon = h;
            }
            let summary = run_sweep(&cfg, opts.threads)?;
            println!("{}", summary.table.display());
            if summary.failures() > 0 {
                bail!("{} of {} points failed", summary.failures(), summary.results.len());
            }
        }
        Command::Fmap { pair, eta_max, eta_points, dphi_span, dphi_points, name, out } => {
            if pair.len() != 2 {
                bail!("--pair takes two sites, got {pair:?}");
            }
            let spec = FmapSpec {
                name,
                pair: (pair[0], pair[1]),
                eta: linspace(0.0, eta_max, eta_points)?,
                delta_phi: linspace(-dphi_span * PI, dphi_span * PI, dphi_points)?,
            };
            println!("{}", run_fmap(&spec, &out)?.display());
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
