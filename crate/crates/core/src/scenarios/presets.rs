use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use super::{run_sweep, Axis, InitialStateSpec, ScenarioConfig, ScenarioError};
use crate::floquet::suppression_map;
use crate::lindblad::DissipatorSpec;
use crate::network::NetworkSpec;

/// A suppression-factor map |F| over (η, Δφ) for one site pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmapSpec {
    pub name: String,
    pub pair: (usize, usize),
    pub eta: Axis,
    pub delta_phi: Axis,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresetJob {
    Sweep(ScenarioConfig),
    Fmap(FmapSpec),
}

/// Overrides applied on top of a preset.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetOptions {
    pub dir: PathBuf,
    pub threads: usize,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions {
            dir: PathBuf::from("out"),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            dt: None,
            horizon: None,
        }
    }
}

const NAMES: [&str; 8] = ["fig2", "fig3", "fig3heat", "fig4", "fig5", "fig6", "gamd", "entvar"];

pub fn preset_names() -> &'static [&'static str] {
    &NAMES
}

/// `n` evenly spaced values from `a` to `b` inclusive.
fn linspace(a: f64, b: f64, n: usize) -> Axis {
    Axis::Values((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

fn drive_grid() -> Axis {
    Axis::Values((0..=150).map(|k| k as f64 * 0.4).collect())
}

fn states() -> [InitialStateSpec; 2] {
    [InitialStateSpec::Entangled, InitialStateSpec::Mixed]
}

fn base(name: String, initial: InitialStateSpec, opts: &PresetOptions) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::transport(initial);
    cfg.outputs.dir = opts.dir.clone();
    cfg.outputs.name = name;
    cfg
}

/// The jobs behind a named preset, with `opts` applied.
pub fn preset(name: &str, opts: &PresetOptions) -> Result<Vec<PresetJob>, ScenarioError> {
    let mut jobs: Vec<ScenarioConfig> = Vec::new();
    match name {
        "fig2" => {
            return Ok([(1, 3), (2, 4)]
                .into_iter()
                .map(|pair| {
                    PresetJob::Fmap(FmapSpec {
                        name: format!("fig2_pair{}{}", pair.0, pair.1),
                        pair,
                        eta: linspace(0.0, 2.5, 101),
                        delta_phi: linspace(-2.0 * PI, 2.0 * PI, 129),
                    })
                })
                .collect());
        }
        "fig3" | "fig3heat" => {
            for init in states() {
                let mut cfg = base(format!("{name}_{}", init.label()), init, opts);
                cfg.sweep.drive = Some(drive_grid());
                cfg.sweep.gamma = Some(if name == "fig3" {
                    Axis::Values(vec![0.0, 0.1])
                } else {
                    Axis::Values((0..=10).map(|k| k as f64 / 10.0).collect())
                });
                jobs.push(cfg);
            }
        }
        "fig4" => {
            for init in states() {
                let mut cfg = base(format!("fig4_{}", init.label()), init, opts);
                cfg.horizon = 100.0;
                cfg.sweep.drive = Some(Axis::Values(vec![18.0, 38.8]));
                cfg.sweep.gamma = Some(Axis::Values(vec![0.0, 0.1]));
                cfg.outputs.trajectories = true;
                jobs.push(cfg);
            }
        }
        "fig5" => {
            let mut cfg = base("fig5_ent".into(), InitialStateSpec::Entangled, opts);
            cfg.horizon = 100.0;
            cfg.sweep.drive = Some(Axis::Values(vec![38.8, 18.0]));
            cfg.outputs.correlation_series = true;
            cfg.outputs.trajectories = true;
            jobs.push(cfg);
        }
        "fig6" => {
            let mut cfg = base("fig6_ent".into(), InitialStateSpec::Entangled, opts);
            cfg.dissipators.gamma_deph = vec![cfg.network.coupling_scale(); 4];
            cfg.sweep.drive = Some(drive_grid());
            cfg.outputs.correlations = true;
            jobs.push(cfg);
        }
        "gamd" => {
            for init in states() {
                let mut cfg = base(format!("gamd_{}", init.label()), init, opts);
                let c = cfg.network.coupling_scale();
                cfg.dissipators = DissipatorSpec::uniform(0.0, 0.0, c / 10.0, 4);
                cfg.sweep.drive = Some(drive_grid());
                cfg.sweep.drain = Some(Axis::Values(vec![0.01, 0.1]));
                jobs.push(cfg);
            }
        }
        "entvar" => {
            let mut cfg = base("entvar".into(), InitialStateSpec::Entangled, opts);
            cfg.network = cfg.network.with_drive_strength(38.8);
            cfg.sweep.theta = Some(Axis::Values((0..=16).map(|k| k as f64 * PI / 64.0).collect()));
            cfg.sweep.gamma = Some(Axis::Values((0..=20).map(|k| k as f64 / 20.0).collect()));
            jobs.push(cfg);
        }
        other => return Err(ScenarioError::UnknownPreset(other.to_string())),
    }
    for cfg in &mut jobs {
        if let Some(dt) = opts.dt {
            cfg.integrator.dt = Some(dt);
        }
        if let Some(h) = opts.horizon {
            cfg.horizon = h;
        }
        cfg.validate()?;
    }
    Ok(jobs.into_iter().map(PresetJob::Sweep).collect())
}

/// Writes `{name}.csv` with columns `eta, delta_phi, abs_f` under `dir`.
pub fn run_fmap(spec: &FmapSpec, dir: &std::path::Path) -> Result<PathBuf, ScenarioError> {
    let net = NetworkSpec::four_site(0.01);
    let map = suppression_map(&net, spec.pair, &spec.eta.values()?, &spec.delta_phi.values()?)?;
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", spec.name));
    let mut w = BufWriter::new(fs::File::create(&path)?);
    map.write_csv(&mut w)?;
    w.flush()?;
    Ok(path)
}

/// Runs every job of a preset and returns the paths of the main tables.
pub fn run_preset(name: &str, opts: &PresetOptions) -> Result<Vec<PathBuf>, ScenarioError> {
    let mut out = Vec::new();
    for job in preset(name, opts)? {
        match job {
            PresetJob::Fmap(spec) => out.push(run_fmap(&spec, &opts.dir)?),
            PresetJob::Sweep(cfg) => {
                let summary = run_sweep(&cfg, opts.threads)?;
                if summary.failures() > 0 {
                    log::warn!("{}: {} points failed", cfg.outputs.name, summary.failures());
                }
                out.push(summary.table);
            }
        }
    }
    Ok(out)
}
