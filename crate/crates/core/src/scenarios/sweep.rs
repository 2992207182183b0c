use serde::Serialize;
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use super::{initial_state, InitialStateSpec, ScenarioConfig, ScenarioError};
use crate::correlations::{correlation_series_on, time_average, write_series_csv, CorrelationSample};
use crate::lindblad::{evolve, DissipatorSpec, Observable};
use crate::metrics::{efficiency, integrated_population};
use crate::network::NetworkSpec;

/// One grid point: its index in row order and its coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub coords: Vec<(&'static str, f64)>,
}

/// Everything measured at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointMetrics {
    /// ∫ p₃₃ d(ct).
    pub p3: f64,
    /// 2(Γ_d/c)P₃; `NaN` without a drain.
    pub eta_eff: f64,
    pub correlations: Option<CorrelationSample>,
    pub max_trace_drift: f64,
    pub min_eig: f64,
    pub max_hermiticity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub point: SweepPoint,
    pub outcome: Result<PointMetrics, String>,
    trajectory_csv: Option<String>,
    series_csv: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SweepSummary {
    pub table: PathBuf,
    pub manifest: PathBuf,
    pub results: Vec<PointResult>,
}

impl SweepSummary {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| r.outcome.is_err()).count()
    }
}

/// Cartesian product of the sweep axes in lexicographic order. A config
/// without axes has the single point `[]`.
pub fn sweep_points(cfg: &ScenarioConfig) -> Result<Vec<SweepPoint>, ScenarioError> {
    let axes = cfg.sweep.axes()?;
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut out = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut coords = vec![("", 0.0); axes.len()];
        for (slot, (name, values)) in axes.iter().enumerate().rev() {
            coords[slot] = (*name, values[rem % values.len()]);
            rem /= values.len();
        }
        out.push(SweepPoint { index, coords });
    }
    Ok(out)
}

/// Network, dissipators and initial state at `point`.
pub fn resolve_point(
    cfg: &ScenarioConfig,
    point: &SweepPoint,
) -> Result<(NetworkSpec, DissipatorSpec, InitialStateSpec), ScenarioError> {
    let mut net = cfg.network.clone();
    let mut dis = cfg.dissipators.clone();
    let mut init = cfg.initial.clone();
    let c = net.coupling_scale();
    for &(name, v) in &point.coords {
        match name {
            "drive" => net = net.with_drive_strength(v),
            "gamma" => dis.gamma_deph = vec![v * c; net.n_sites()],
            "theta" => init = InitialStateSpec::ThetaPure { theta: v },
            "drain" => {
                dis.gamma_d = v * c;
                dis.gamma_s = 2.0 * v * c;
            }
            other => unreachable!("unknown axis {other}"),
        }
    }
    Ok((net, dis, init))
}

fn evaluate(cfg: &ScenarioConfig, point: &SweepPoint) -> Result<PointResult, ScenarioError> {
    let (net, dis, init) = resolve_point(cfg, point)?;
    let rho0 = initial_state(&init)?;
    let out = &cfg.outputs;
    let observers =
        if out.needs_pair() { vec![Observable::Reduced(out.pair.clone())] } else { vec![] };
    let traj = evolve(&rho0, &net, &dis, &cfg.integrator, cfg.horizon, &observers)?;
    let p3 = integrated_population(&traj, 3)?;
    let c = net.coupling_scale();
    let eta_eff = if dis.gamma_d > 0.0 { efficiency(p3, dis.gamma_d / c)? } else { f64::NAN };

    let mut correlations = None;
    let mut series_csv = None;
    if out.needs_pair() {
        let series = correlation_series_on(&traj, &out.pair)?;
        if out.correlations {
            correlations = Some(time_average(&series, cfg.horizon)?);
        }
        if out.correlation_series {
            let mut buf = Vec::new();
            write_series_csv(&series, &mut buf)?;
            series_csv = Some(String::from_utf8(buf).expect("ascii csv"));
        }
    }
    let trajectory_csv = if out.trajectories {
        let mut buf = Vec::new();
        traj.write_csv(&mut buf)?;
        Some(String::from_utf8(buf).expect("ascii csv"))
    } else {
        None
    };
    Ok(PointResult {
        point: point.clone(),
        outcome: Ok(PointMetrics {
            p3,
            eta_eff,
            correlations,
            max_trace_drift: traj.max_trace_drift(),
            min_eig: traj.min_eigenvalue(),
            max_hermiticity: traj.diagnostics.iter().map(|d| d.hermiticity).fold(0.0, f64::max),
        }),
        trajectory_csv,
        series_csv,
    })
}

/// Runs one point; failures are captured in the result rather than returned.
pub fn evaluate_point(cfg: &ScenarioConfig, point: &SweepPoint) -> PointResult {
    evaluate(cfg, point).unwrap_or_else(|e| {
        log::warn!("sweep point {} failed: {e}", point.index);
        PointResult {
            point: point.clone(),
            outcome: Err(e.to_string()),
            trajectory_csv: None,
            series_csv: None,
        }
    })
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.11e}")
    }
}

fn header(cfg: &ScenarioConfig, points: &[SweepPoint]) -> String {
    let mut cols: Vec<&str> = points[0].coords.iter().map(|(n, _)| *n).collect();
    cols.extend(["P3", "eta_eff"]);
    if cfg.outputs.correlations {
        cols.extend(["eof_avg", "discord2_avg", "discord4_avg", "mutual_info_avg"]);
    }
    cols.extend(["trace_drift", "min_eig", "status"]);
    cols.join(",")
}

fn row(cfg: &ScenarioConfig, r: &PointResult) -> String {
    let mut cells: Vec<String> = r.point.coords.iter().map(|(_, v)| fmt(*v)).collect();
    let n_metrics = if cfg.outputs.correlations { 8 } else { 4 };
    match &r.outcome {
        Ok(m) => {
            cells.push(fmt(m.p3));
            cells.push(fmt(m.eta_eff));
            if cfg.outputs.correlations {
                let s = m.correlations.expect("requested correlations");
                cells.extend([s.eof, s.discord_2, s.discord_4, s.mutual_info].map(fmt));
            }
            cells.push(fmt(m.max_trace_drift));
            cells.push(fmt(m.min_eig));
            cells.push("ok".into());
        }
        Err(msg) => {
            cells.extend(std::iter::repeat("nan".to_string()).take(n_metrics));
            let clean: String =
                msg.chars().map(|ch| if ch == ',' || ch == '\n' || ch == '"' { ';' } else { ch }).collect();
            cells.push(format!("error: {clean}"));
        }
    }
    cells.join(",")
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ScenarioConfig,
    points: usize,
    failures: usize,
    table: String,
    files: Vec<String>,
}

/// Evaluates every grid point of `cfg` on `threads` workers and writes the
/// sweep table, optional per-point files and a manifest under `cfg.outputs.dir`.
///
/// Rows are emitted in grid order by a single writer and flushed as soon as
/// all earlier rows are done, so the table is identical for any thread count.
pub fn run_sweep(cfg: &ScenarioConfig, threads: usize) -> Result<SweepSummary, ScenarioError> {
    cfg.validate()?;
    let points = sweep_points(cfg)?;
    let out = &cfg.outputs;
    fs::create_dir_all(&out.dir)?;
    let table_path = out.table_path();
    let mut table = BufWriter::new(File::create(&table_path)?);
    writeln!(table, "{}", header(cfg, &points))?;
    table.flush()?;

    let threads = threads.clamp(1, points.len());
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<PointResult>();
    let mut results: Vec<PointResult> = Vec::with_capacity(points.len());
    let mut files = Vec::new();

    std::thread::scope(|scope| -> Result<(), ScenarioError> {
        for _ in 0..threads {
            let tx = tx.clone();
            let (next, points) = (&next, &points);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                if tx.send(evaluate_point(cfg, &points[i])).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        for result in rx {
            pending.insert(result.point.index, result);
            while let Some(r) = pending.remove(&results.len()) {
                writeln!(table, "{}", row(cfg, &r))?;
                table.flush()?;
                for (path, body) in [
                    (out.trajectory_path(r.point.index), &r.trajectory_csv),
                    (out.series_path(r.point.index), &r.series_csv),
                ] {
                    if let Some(body) = body {
                        fs::write(&path, body)?;
                        files.push(path.display().to_string());
                    }
                }
                log::info!("{}: point {}/{} done", out.name, r.point.index + 1, points.len());
                results.push(r);
            }
        }
        Ok(())
    })?;

    let failures = results.iter().filter(|r| r.outcome.is_err()).count();
    let manifest_path = out.manifest_path();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        points: results.len(),
        failures,
        table: table_path.display().to_string(),
        files,
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(SweepSummary { table: table_path, manifest: manifest_path, results })
}
