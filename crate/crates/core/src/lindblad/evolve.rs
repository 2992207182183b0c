use std::io::Write;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::integrator::{Dopri5, Rhs, Rk4};
use super::{DissipatorSpec, IntegratorSpec, LindbladError, MasterEquation, Method};
use crate::network::NetworkSpec;
use crate::qops::{expm, hermitian_eig, partial_trace, site_bit, ComplexMatrix, DensityMatrix};

/// Records a state below this eigenvalue abort the run.
const POSITIVITY_FLOOR: f64 = -1e-8;

/// Extra quantities recorded alongside the site populations.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// Reduced state on the listed sites, factors in the listed order.
    Reduced(Vec<usize>),
    /// The full density matrix.
    Snapshots,
}

#[derive(Clone, Debug)]
pub struct ReducedSeries {
    pub sites: Vec<usize>,
    pub states: Vec<DensityMatrix>,
}

/// Numerical health of one record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// tr ρ − 1.
    pub trace_drift: f64,
    pub min_eig: f64,
    /// Largest Hermiticity residual produced by any step since the previous record.
    pub hermiticity: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Record times in units of `ct`.
    pub ct: Vec<f64>,
    /// `populations[r][j-1]` is ⟨n_j⟩ at record `r`.
    pub populations: Vec<Vec<f64>>,
    pub reduced: Vec<ReducedSeries>,
    pub snapshots: Vec<DensityMatrix>,
    pub diagnostics: Vec<Diagnostics>,
    /// Accepted integrator steps.
    pub steps: usize,
}

impl Trajectory {
    /// ⟨n_site⟩ over the record grid.
    pub fn population(&self, site: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[site - 1]).collect()
    }

    pub fn reduced_on(&self, sites: &[usize]) -> Option<&ReducedSeries> {
        self.reduced.iter().find(|r| r.sites == sites)
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.trace_drift.abs()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.min_eig).fold(f64::INFINITY, f64::min)
    }

    /// Columns `ct, p11, …, pNN, trace_drift, min_eig` at 12 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let n = self.populations.first().map_or(0, Vec::len);
        let mut header = vec!["ct".to_string()];
        header.extend((1..=n).map(|j| format!("p{j}{j}")));
        header.push("trace_drift".into());
        header.push("min_eig".into());
        writeln!(w, "{}", header.join(","))?;
        for ((ct, pops), diag) in self.ct.iter().zip(&self.populations).zip(&self.diagnostics) {
            let mut row = vec![format!("{ct:.11e}")];
            row.extend(pops.iter().map(|p| format!("{p:.11e}")));
            row.push(format!("{:.11e}", diag.trace_drift));
            row.push(format!("{:.11e}", diag.min_eig));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

struct Generator<'a> {
    eq: &'a MasterEquation,
    diag: Vec<C64>,
}

impl Rhs for Generator<'_> {
    fn eval(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.eq.apply(t, y, dy, &mut self.diag);
    }
}

/// Replaces `y` by its Hermitian part and returns the residual that was removed.
fn symmetrize(y: &mut [C64], d: usize) -> f64 {
    let mut residual: f64 = 0.0;
    for a in 0..d {
        y[a * d + a].im = 0.0;
        for b in a + 1..d {
            let (u, v) = (y[a * d + b], y[b * d + a]);
            residual = residual.max((u - v.conj()).norm());
            let m = (u + v.conj()) * 0.5;
            y[a * d + b] = m;
            y[b * d + a] = m.conj();
        }
    }
    residual
}

/// Output times `0, Δ, 2Δ, …` up to `horizon`, with `horizon` appended when it
/// is not on the grid.
fn record_grid(horizon: f64, every: f64) -> Vec<f64> {
    let n = (horizon / every + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * every).collect();
    if horizon - grid[n] > 1e-9 * every {
        grid.push(horizon);
    }
    grid
}

/// Integrates the master equation from `rho0` at `t = 0` up to `horizon_ct`
/// (in units of `ct`), recording every `integ.record_every`.
///
/// Each accepted step is re-symmetrized; the trace is never renormalized, so
/// `trace_drift` measures the integrator's own error.
pub fn evolve(
    rho0: &DensityMatrix,
    net: &NetworkSpec,
    dis: &DissipatorSpec,
    integ: &IntegratorSpec,
    horizon_ct: f64,
    observers: &[Observable],
) -> Result<Trajectory, LindbladError> {
    integ.validate()?;
    check_horizon(horizon_ct)?;
    let eq = MasterEquation::new(net, dis)?;
    let d = eq.dim();
    let mut rec = Recorder::new(rho0, d, net.n_sites(), observers)?;
    let c = net.coupling_scale();
    let dt_max = integ.resolved_dt(net);
    let grid = record_grid(horizon_ct, integ.record_every);

    let mut y = rho0.matrix().as_slice().to_vec();
    let mut gen = Generator { eq: &eq, diag: vec![C64::new(0.0, 0.0); d] };
    let mut rk4 = Rk4::new(d * d);
    let mut dopri = Dopri5::new(d * d, integ.rel_tol, integ.abs_tol);
    let mut h_adaptive = dt_max;
    let mut herm: f64 = 0.0;

    for (r, &ct) in grid.iter().enumerate() {
        if r > 0 {
            let (t0, t1) = (grid[r - 1] / c, ct / c);
            match integ.method {
                Method::FixedRk4 => {
                    let steps = ((t1 - t0) / dt_max - 1e-9).ceil().max(1.0) as usize;
                    let h = (t1 - t0) / steps as f64;
                    for s in 0..steps {
                        rk4.step(&mut gen, t0 + s as f64 * h, h, &mut y);
                        herm = herm.max(symmetrize(&mut y, d));
                    }
                    rec.traj.steps += steps;
                }
                Method::AdaptiveRk45 => {
                    let before = dopri.accepted;
                    h_adaptive = dopri.integrate(&mut gen, t0, t1, h_adaptive, &mut y, |s| {
                        herm = herm.max(symmetrize(s, d));
                    })?;
                    rec.traj.steps += dopri.accepted - before;
                }
            }
        }
        rec.record(ct, &y, herm)?;
        herm = 0.0;
    }
    log::debug!(
        "evolved {} records to ct = {horizon_ct} in {} steps (max |Δtr| {:.2e})",
        rec.traj.ct.len(),
        rec.traj.steps,
        rec.traj.max_trace_drift()
    );
    Ok(rec.traj)
}

/// Evolution under a time-independent Hamiltonian `h` (for instance the
/// effective RWA Hamiltonian), using the exact propagator `exp(L Δt)` of the
/// dense Liouvillian between record times. `c` converts `ct` to time.
pub fn evolve_static(
    rho0: &DensityMatrix,
    h: &ComplexMatrix,
    dis: &DissipatorSpec,
    c: f64,
    record_every: f64,
    horizon_ct: f64,
    observers: &[Observable],
) -> Result<Trajectory, LindbladError> {
    check_horizon(horizon_ct)?;
    if !(record_every > 0.0) || !(c > 0.0) {
        return Err(LindbladError::InvalidIntegrator(
            "record_every and c must be positive".into(),
        ));
    }
    let d = h.rows();
    let n = crate::qops::qubit_count(d)
        .ok_or(LindbladError::DimensionMismatch { expected: rho0.dim(), found: d })?;
    let l = super::liouvillian_with_hamiltonian(h, n, dis)?;
    let mut rec = Recorder::new(rho0, d, n, observers)?;
    let grid = record_grid(horizon_ct, record_every);
    let step = expm(&l.scale_real(record_every / c))?;
    let mut rho = rho0.matrix().clone();
    for (r, &ct) in grid.iter().enumerate() {
        if r > 0 {
            let dt = ct - grid[r - 1];
            let v = rho.vectorize();
            let v = if (dt - record_every).abs() <= 1e-12 * record_every {
                step.apply(&v)?
            } else {
                expm(&l.scale_real(dt / c))?.apply(&v)?
            };
            rho = ComplexMatrix::unvectorize(&v, d, d)?;
            rec.traj.steps += 1;
        }
        let mut y = rho.as_slice().to_vec();
        let herm = symmetrize(&mut y, d);
        rec.record(ct, &y, herm)?;
        rho = ComplexMatrix::from_vec(d, d, y)?;
    }
    Ok(rec.traj)
}

fn check_horizon(horizon_ct: f64) -> Result<(), LindbladError> {
    if !(horizon_ct >= 0.0) || !horizon_ct.is_finite() {
        return Err(LindbladError::InvalidIntegrator(format!("horizon {horizon_ct} must be ≥ 0")));
    }
    Ok(())
}

/// Accumulates observables and diagnostics at record times.
struct Recorder {
    traj: Trajectory,
    keep_snapshots: bool,
    d: usize,
    n: usize,
}

impl Recorder {
    fn new(
        rho0: &DensityMatrix,
        d: usize,
        n: usize,
        observers: &[Observable],
    ) -> Result<Self, LindbladError> {
        if rho0.dim() != d {
            return Err(LindbladError::DimensionMismatch { expected: d, found: rho0.dim() });
        }
        let mut reduced = Vec::new();
        for obs in observers {
            if let Observable::Reduced(sites) = obs {
                partial_trace(rho0, sites)?;
                reduced.push(ReducedSeries { sites: sites.clone(), states: vec![] });
            }
        }
        Ok(Recorder {
            traj: Trajectory {
                ct: vec![],
                populations: vec![],
                reduced,
                snapshots: vec![],
                diagnostics: vec![],
                steps: 0,
            },
            keep_snapshots: observers.contains(&Observable::Snapshots),
            d,
            n,
        })
    }

    fn record(&mut self, ct: f64, y: &[C64], hermiticity: f64) -> Result<(), LindbladError> {
        let (d, n) = (self.d, self.n);
        if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LindbladError::NonFinite { ct });
        }
        let m = ComplexMatrix::from_vec(d, d, y.to_vec())?;
        let min_eig = hermitian_eig(&m)?.values[0];
        if min_eig < POSITIVITY_FLOOR {
            return Err(LindbladError::PositivityViolation { ct, min_eig });
        }
        let trace: f64 = (0..d).map(|a| y[a * d + a].re).sum();
        self.traj.diagnostics.push(Diagnostics { trace_drift: trace - 1.0, min_eig, hermiticity });
        let pops = (1..=n)
            .map(|j| (0..d).filter(|&a| site_bit(a, j, n) == 1).map(|a| y[a * d + a].re).sum())
            .collect();
        self.traj.populations.push(pops);
        self.traj.ct.push(ct);
        let rho = DensityMatrix::new_unchecked(m);
        for series in &mut self.traj.reduced {
            series.states.push(partial_trace(&rho, &series.sites)?);
        }
        if self.keep_snapshots {
            self.traj.snapshots.push(rho);
        }
        Ok(())
    }
}
