//! Effective couplings of the driven network in the rotating-wave picture.
//!
//! In the interaction picture with respect to the on-site part, each hopping
//! term picks up a Jacobi–Anger expansion of the drive. With the ladder tuned
//! to Δω = r·ω_d only the terms whose harmonic index cancels the ladder
//! detuning survive, leaving
//!
//! ```text
//! τ_jk = c_jk · F_χ(η_j, η_k, Δφ_jk) · exp(-i χ (φ_j + φ_k) / 2),   χ = f(r, j, k)
//! F_χ(ξ, ζ, θ) = Σ_s J_s(ξ) J_{s+χ}(ζ) exp(i (s + χ/2) θ)
//! ```

mod bessel;

pub use bessel::{bessel_j, bessel_sequence, tail_bound, MAX_ARG, MAX_ORDER};

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::network::{hop_term, NetworkError, NetworkSpec};
use crate::qops::ComplexMatrix;

/// Hard cap on the half-width of the truncated coupling series.
pub const SERIES_CAP: usize = 400;
/// Default tail tolerance for [`bessel_f`] when called through the network API.
pub const DEFAULT_SERIES_TOL: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloquetError {
    #[error("Bessel J_{order}({arg}) outside the validated range")]
    BesselOutOfRange { order: i32, arg: f64 },
    #[error("coupling series tail bound {bound:.3e} above tolerance {tol:.3e} at the truncation cap")]
    NonConvergent { bound: f64, tol: f64 },
    #[error("series tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("empty grid")]
    EmptyGrid,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Harmonic order f(r, j, k) = r[(Θ₁j₁ + Θ₂j₂) − (Θ₁k₁ + Θ₂k₂)].
pub fn f_index(r: u32, j: [u32; 2], k: [u32; 2], theta: (u32, u32)) -> i64 {
    let level = |c: [u32; 2]| theta.0 as i64 * c[0] as i64 + theta.1 as i64 * c[1] as i64;
    r as i64 * (level(j) - level(k))
}

/// Δφ_{j,k} = φ_j − φ_k.
pub fn phase_diff(spec: &NetworkSpec, j: usize, k: usize) -> Result<f64, FloquetError> {
    Ok(spec.site_phase(j)? - spec.site_phase(k)?)
}

/// F_χ(ξ, ζ, θ), truncated at |s| ≤ S with S chosen so the tail bound is below `tol`.
pub fn bessel_f(chi: i64, xi: f64, zeta: f64, theta: f64, tol: f64) -> Result<C64, FloquetError> {
    if !(tol > 0.0) {
        return Err(FloquetError::InvalidTolerance(tol));
    }
    let x_max = xi.abs().max(zeta.abs());
    if !(x_max <= MAX_ARG) {
        return Err(FloquetError::BesselOutOfRange { order: chi as i32, arg: x_max });
    }
    let mut s_max = x_max.ceil() as usize + 30;
    // Every neglected term is bounded by |J_s(ξ)| (|J| ≤ 1), on both sides of s = 0.
    let mut bound = 2.0 * tail_bound(s_max, xi);
    while bound > tol {
        if s_max >= SERIES_CAP {
            return Err(FloquetError::NonConvergent { bound, tol });
        }
        s_max = (s_max + 10).min(SERIES_CAP);
        bound = 2.0 * tail_bound(s_max, xi);
    }

    let chi_abs = chi.unsigned_abs() as usize;
    let j_xi = bessel_sequence(s_max, xi);
    let j_zeta = bessel_sequence(s_max + chi_abs, zeta);
    let signed = |seq: &[f64], order: i64| {
        let v = seq[order.unsigned_abs() as usize];
        if order < 0 && order % 2 != 0 { -v } else { v }
    };
    let s_max = s_max as i64;
    let mut sum = C64::new(0.0, 0.0);
    for s in -s_max..=s_max {
        let amp = signed(&j_xi, s) * signed(&j_zeta, s + chi);
        if amp == 0.0 {
            continue;
        }
        sum += C64::from_polar(amp, (s as f64 + chi as f64 / 2.0) * theta);
    }
    Ok(sum)
}

/// Effective RWA hopping between a pair of sites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveCoupling {
    pub pair: (usize, usize),
    pub tau: C64,
    pub chi: i64,
    pub delta_phi: f64,
}

pub fn effective_coupling(
    spec: &NetworkSpec,
    j: usize,
    k: usize,
) -> Result<EffectiveCoupling, FloquetError> {
    let d = spec.drive();
    let chi = f_index(d.r, spec.site(j)?.coord, spec.site(k)?.coord, (d.theta1, d.theta2));
    let delta_phi = phase_diff(spec, j, k)?;
    let c = spec.hopping_rate(j, k)?;
    let f = bessel_f(chi, spec.eta_d_at(j)?, spec.eta_d_at(k)?, delta_phi, DEFAULT_SERIES_TOL)?;
    let phase_sum = spec.site_phase(j)? + spec.site_phase(k)?;
    let tau = c * f * C64::from_polar(1.0, -(chi as f64) / 2.0 * phase_sum);
    Ok(EffectiveCoupling { pair: (j, k), tau, chi, delta_phi })
}

/// Σ_{j<k} τ_jk σ_j⁺σ_k⁻ + h.c.
pub fn rwa_hamiltonian(spec: &NetworkSpec) -> Result<ComplexMatrix, FloquetError> {
    let n = spec.n_sites();
    let mut h = ComplexMatrix::zeros(spec.dim(), spec.dim());
    for j in 1..=n {
        for k in j + 1..=n {
            let tau = effective_coupling(spec, j, k)?.tau;
            if tau == C64::new(0.0, 0.0) {
                continue;
            }
            let term = hop_term(n, j, k).scale(tau);
            h = &h + &(&term + &term.adjoint());
        }
    }
    Ok(h)
}

/// |F_{f(1,j,k)}(η, η, Δφ)| over a grid of drive amplitudes and phase differences.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuppressionMap {
    pub pair: (usize, usize),
    pub chi: i64,
    pub eta: Vec<f64>,
    pub delta_phi: Vec<f64>,
    /// `values[row][col]` with rows indexed by η and columns by Δφ.
    pub values: Vec<Vec<f64>>,
}

impl SuppressionMap {
    /// Long-format CSV with columns `eta, delta_phi, abs_f`, η slowest.
    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "eta,delta_phi,abs_f")?;
        for (eta, row) in self.eta.iter().zip(&self.values) {
            for (dphi, v) in self.delta_phi.iter().zip(row) {
                writeln!(w, "{eta:.11e},{dphi:.11e},{v:.11e}")?;
            }
        }
        Ok(())
    }
}

pub fn suppression_map(
    spec: &NetworkSpec,
    pair: (usize, usize),
    eta_grid: &[f64],
    dphi_grid: &[f64],
) -> Result<SuppressionMap, FloquetError> {
    if eta_grid.is_empty() || dphi_grid.is_empty() {
        return Err(FloquetError::EmptyGrid);
    }
    let d = spec.drive();
    let chi = f_index(1, spec.site(pair.0)?.coord, spec.site(pair.1)?.coord, (d.theta1, d.theta2));
    let values = eta_grid
        .iter()
        .map(|&eta| {
            dphi_grid
                .iter()
                .map(|&dphi| bessel_f(chi, eta, eta, dphi, DEFAULT_SERIES_TOL).map(|f| f.norm()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuppressionMap {
        pair,
        chi,
        eta: eta_grid.to_vec(),
        delta_phi: dphi_grid.to_vec(),
        values,
    })
}
