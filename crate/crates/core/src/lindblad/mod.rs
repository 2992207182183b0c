//! Master equation with source, drain and dephasing, driven by the full
//! time-dependent Hamiltonian.
//!
//! The superoperators carry the doubled sandwich term exactly as
//!
//! ```text
//! L_s(ρ)    = Γ_s (−{σ₁⁻σ₁⁺, ρ} + 2 σ₁⁺ ρ σ₁⁻)
//! L_d(ρ)    = Γ_d (−{σ₃⁺σ₃⁻, ρ} + 2 σ₃⁻ ρ σ₃⁺)
//! L_deph(ρ) = Σ_k γ_k (−{n_k, ρ} + 2 n_k ρ n_k),      n_k = σ_k⁺σ_k⁻
//! ```
//!
//! so an empty site under the pump alone fills as `1 − e^{−2Γ_s t}`, and a
//! dephased single-site coherence decays at `γ`.

mod evolve;
mod integrator;

pub use evolve::{evolve, evolve_static, Diagnostics, Observable, ReducedSeries, Trajectory};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{NetworkError, NetworkSpec};
use crate::qops::{kron, pauli, site_bit, site_operator, ComplexMatrix, DensityMatrix, QopsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LindbladError {
    #[error("dimension mismatch: network has dimension {expected}, state has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid dissipator: {0}")]
    InvalidDissipator(String),
    #[error("invalid integrator settings: {0}")]
    InvalidIntegrator(String),
    #[error("adaptive step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("positivity violated at ct = {ct:.6}: minimum eigenvalue {min_eig:.3e}")]
    PositivityViolation { ct: f64, min_eig: f64 },
    #[error("non-finite state at ct = {ct:.6}")]
    NonFinite { ct: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Qops(#[from] QopsError),
}

fn default_source() -> usize {
    1
}

fn default_drain() -> usize {
    3
}

/// Rates of the source, drain and dephasing channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipatorSpec {
    pub gamma_s: f64,
    pub gamma_d: f64,
    /// Per-site dephasing rates γ_k.
    pub gamma_deph: Vec<f64>,
    #[serde(default = "default_source")]
    pub source_site: usize,
    #[serde(default = "default_drain")]
    pub drain_site: usize,
}

impl DissipatorSpec {
    /// Uniform dephasing `gamma` on `n_sites`, pump on site 1, drain on site 3.
    pub fn uniform(gamma_s: f64, gamma_d: f64, gamma: f64, n_sites: usize) -> Self {
        DissipatorSpec {
            gamma_s,
            gamma_d,
            gamma_deph: vec![gamma; n_sites],
            source_site: 1,
            drain_site: 3,
        }
    }

    /// No pump, drain or dephasing.
    pub fn none(n_sites: usize) -> Self {
        Self::uniform(0.0, 0.0, 0.0, n_sites)
    }

    pub fn validate(&self, n_sites: usize) -> Result<(), LindbladError> {
        let bad = |m: String| Err(LindbladError::InvalidDissipator(m));
        if !(self.gamma_s >= 0.0) || !(self.gamma_d >= 0.0) {
            return bad("source and drain rates must be non-negative".into());
        }
        if self.gamma_deph.len() != n_sites {
            return bad(format!("{} dephasing rates for {n_sites} sites", self.gamma_deph.len()));
        }
        if self.gamma_deph.iter().any(|g| !(*g >= 0.0)) {
            return bad("dephasing rates must be non-negative".into());
        }
        for (name, s) in [("source", self.source_site), ("drain", self.drain_site)] {
            if s == 0 || s > n_sites {
                return bad(format!("{name} site {s} out of range"));
            }
        }
        if self.source_site == self.drain_site {
            return bad("source and drain must be different sites".into());
        }
        Ok(())
    }

    /// (rate, anticommutator operator A, sandwich operator B) for each channel.
    fn channels(&self, n: usize) -> Result<Vec<(f64, ComplexMatrix, ComplexMatrix)>, QopsError> {
        let mut out = Vec::new();
        let up = |s| site_operator(n, s, &pauli::sigma_plus());
        let down = |s| site_operator(n, s, &pauli::sigma_minus());
        if self.gamma_s > 0.0 {
            let (p, m) = (up(self.source_site)?, down(self.source_site)?);
            out.push((self.gamma_s, &m * &p, p));
        }
        if self.gamma_d > 0.0 {
            let (p, m) = (up(self.drain_site)?, down(self.drain_site)?);
            out.push((self.gamma_d, &p * &m, m));
        }
        for (k, &g) in self.gamma_deph.iter().enumerate() {
            if g > 0.0 {
                let nk = site_operator(n, k + 1, &pauli::excitation())?;
                out.push((g, nk.clone(), nk));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "fixed-rk4")]
    FixedRk4,
    #[serde(rename = "adaptive-rk45")]
    AdaptiveRk45,
}

fn default_steps_per_period() -> u32 {
    128
}

/// Integrator settings.
///
/// `record_every` is the spacing of the output grid in units of `ct`; the
/// integrator lands exactly on each output time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: Method,
    /// Fixed step in 1/ω₀. `None` picks `T_min / steps_per_period`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub record_every: f64,
    #[serde(default = "default_steps_per_period")]
    pub steps_per_period: u32,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            method: Method::FixedRk4,
            dt: None,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            record_every: 0.01,
            steps_per_period: default_steps_per_period(),
        }
    }
}

impl IntegratorSpec {
    pub fn adaptive() -> Self {
        IntegratorSpec { method: Method::AdaptiveRk45, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), LindbladError> {
        let bad = |m: &str| Err(LindbladError::InvalidIntegrator(m.into()));
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad("dt must be positive");
            }
        }
        if self.method == Method::AdaptiveRk45 && !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("adaptive tolerances must be positive");
        }
        if !(self.record_every > 0.0) {
            return bad("record_every must be positive");
        }
        if self.steps_per_period == 0 {
            return bad("steps_per_period must be positive");
        }
        Ok(())
    }

    /// Step used by the fixed-step method: `dt` if set, else `2π/ω_max / steps_per_period`.
    pub fn resolved_dt(&self, net: &NetworkSpec) -> f64 {
        self.dt.unwrap_or_else(|| {
            2.0 * std::f64::consts::PI / net.max_frequency() / self.steps_per_period as f64
        })
    }
}

/// Sparse entry (row, col, value).
type Entry = (usize, usize, C64);

struct Jump {
    /// 2·rate
    weight: f64,
    entries: Vec<Entry>,
}

struct DriveTerm {
    amplitude: f64,
    phase: f64,
    occupied: Vec<usize>,
}

/// Precompiled right-hand side of the master equation.
///
/// Writing `G = −iĤ(t) − K` with `K = Σ rate·A`, the generator reads
/// `Gρ + ρG† + Σ 2·rate·BρB†`. Only the drive diagonal of `G` depends on time.
pub struct MasterEquation {
    dim: usize,
    omega_d: f64,
    static_diag: Vec<C64>,
    offdiag: Vec<Entry>,
    drive: Vec<DriveTerm>,
    jumps: Vec<Jump>,
}

fn sparse(m: &ComplexMatrix) -> Vec<Entry> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if v != C64::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl MasterEquation {
    pub fn new(net: &NetworkSpec, dis: &DissipatorSpec) -> Result<Self, LindbladError> {
        let n = net.n_sites();
        let dim = net.dim();
        dis.validate(n)?;

        // Ĥ without the drive: static ladder energies plus hopping.
        let mut h = net.hopping_hamiltonian();
        let energies = net.static_energies();
        for a in 0..dim {
            let e: f64 = (1..=n).filter(|&j| site_bit(a, j, n) == 1).map(|j| energies[j - 1]).sum();
            h[(a, a)] += C64::new(e, 0.0);
        }
        let mut g = h.scale(C64::new(0.0, -1.0));
        let mut jumps = Vec::new();
        for (rate, a_op, b_op) in dis.channels(n)? {
            g = &g - &a_op.scale_real(rate);
            jumps.push(Jump { weight: 2.0 * rate, entries: sparse(&b_op) });
        }
        let static_diag = (0..dim).map(|a| g[(a, a)]).collect();
        let offdiag = sparse(&g).into_iter().filter(|&(i, j, _)| i != j).collect();

        let d = net.drive();
        let mut drive = Vec::new();
        for j in 1..=n {
            let amplitude = net.eta_d_at(j)? * d.omega_d;
            if amplitude == 0.0 {
                continue;
            }
            drive.push(DriveTerm {
                amplitude,
                phase: net.site_phase(j)?,
                occupied: (0..dim).filter(|&a| site_bit(a, j, n) == 1).collect(),
            });
        }
        Ok(MasterEquation { dim, omega_d: d.omega_d, static_diag, offdiag, drive, jumps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diagonal of `G(t)`, written into `diag`.
    fn diagonal_at(&self, t: f64, diag: &mut [C64]) {
        diag.copy_from_slice(&self.static_diag);
        for term in &self.drive {
            let e = term.amplitude * (self.omega_d * t + term.phase).cos();
            for &a in &term.occupied {
                diag[a].im -= e;
            }
        }
    }

    /// `out = dρ/dt` for a row-major `dim × dim` state.
    pub fn apply(&self, t: f64, rho: &[C64], out: &mut [C64], diag: &mut [C64]) {
        let d = self.dim;
        debug_assert_eq!(rho.len(), d * d);
        self.diagonal_at(t, diag);
        for a in 0..d {
            let ga = diag[a];
            for b in 0..d {
                out[a * d + b] = (ga + diag[b].conj()) * rho[a * d + b];
            }
        }
        for &(a, c, g) in &self.offdiag {
            // (Gρ)[a, :] += g ρ[c, :]
            let (src, dst) = (c * d, a * d);
            for b in 0..d {
                out[dst + b] += g * rho[src + b];
            }
            // (ρG†)[:, a] += ρ[:, c] conj(g)
            let gc = g.conj();
            for r in 0..d {
                out[r * d + a] += rho[r * d + c] * gc;
            }
        }
        for jump in &self.jumps {
            for &(a, i, u) in &jump.entries {
                let wu = u * jump.weight;
                for &(b, j, v) in &jump.entries {
                    out[a * d + b] += wu * v.conj() * rho[i * d + j];
                }
            }
        }
    }
}

/// dρ/dt at time `t`.
pub fn master_rhs(
    rho: &DensityMatrix,
    t: f64,
    net: &NetworkSpec,
    dis: &DissipatorSpec,
) -> Result<ComplexMatrix, LindbladError> {
    let eq = MasterEquation::new(net, dis)?;
    if rho.dim() != eq.dim() {
        return Err(LindbladError::DimensionMismatch { expected: eq.dim(), found: rho.dim() });
    }
    let d = eq.dim();
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    let mut diag = vec![C64::new(0.0, 0.0); d];
    eq.apply(t, rho.matrix().as_slice(), &mut out, &mut diag);
    Ok(ComplexMatrix::from_vec(d, d, out)?)
}

/// Dense Liouvillian `L` with `vec(dρ/dt) = L·vec(ρ)` for column-major `vec`,
/// assembled from Kronecker products independently of [`MasterEquation`].
pub fn liouvillian_matrix(
    net: &NetworkSpec,
    dis: &DissipatorSpec,
    t: f64,
) -> Result<ComplexMatrix, LindbladError> {
    liouvillian_with_hamiltonian(&net.hamiltonian(t), net.n_sites(), dis)
}

/// Dense Liouvillian for an arbitrary Hamiltonian `h` on `n` sites.
pub fn liouvillian_with_hamiltonian(
    h: &ComplexMatrix,
    n: usize,
    dis: &DissipatorSpec,
) -> Result<ComplexMatrix, LindbladError> {
    dis.validate(n)?;
    let d = 1usize << n;
    if h.rows() != d || h.cols() != d {
        return Err(LindbladError::DimensionMismatch { expected: d, found: h.rows() });
    }
    let id = ComplexMatrix::identity(d);
    let minus_i = C64::new(0.0, -1.0);
    let mut l = (&kron(&id, h) - &kron(&h.transpose(), &id)).scale(minus_i);

    let mut add_channel = |rate: f64, a: &ComplexMatrix, b: &ComplexMatrix| {
        if rate == 0.0 {
            return;
        }
        let anti = &kron(&id, a) + &kron(&a.transpose(), &id);
        let sandwich = kron(&b.conj(), b).scale_real(2.0);
        l = &l + &(&sandwich - &anti).scale_real(rate);
    };
    let (sp, sm, nn) = (pauli::sigma_plus(), pauli::sigma_minus(), pauli::excitation());
    let src_p = site_operator(n, dis.source_site, &sp)?;
    let src_m = site_operator(n, dis.source_site, &sm)?;
    add_channel(dis.gamma_s, &(&src_m * &src_p), &src_p);
    let dr_p = site_operator(n, dis.drain_site, &sp)?;
    let dr_m = site_operator(n, dis.drain_site, &sm)?;
    add_channel(dis.gamma_d, &(&dr_p * &dr_m), &dr_m);
    for (k, &g) in dis.gamma_deph.iter().enumerate() {
        let nk = site_operator(n, k + 1, &nn)?;
        add_channel(g, &nk, &nk);
    }
    Ok(l)
}
