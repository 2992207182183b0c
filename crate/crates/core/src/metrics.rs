//! Transport figures of merit.
//!
//! `P₃ = ∫₀ᵗ p₃₃ dt′` is integrated over the recorded `ct` grid, so it comes
//! out in units of `1/c`. The efficiency `η_eff = 2Γ_d P₃` is dimensionless
//! only when `Γ_d` is expressed in the same units, i.e. as `Γ_d / c`.

use serde::Serialize;
use thiserror::Error;

use crate::lindblad::Trajectory;
use crate::qops::{site_bit, DensityMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("site {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("need at least 2 samples to integrate, got {0}")]
    TooFewSamples(usize),
    #[error("drain rate must be positive, got {0}")]
    NonPositiveRate(f64),
}

/// ⟨σ⁺σ⁻⟩ on `site` (1-based).
pub fn population(rho: &DensityMatrix, site: usize) -> Result<f64, MetricsError> {
    let n = rho.n_sites();
    if site == 0 || site > n {
        return Err(MetricsError::SiteOutOfRange { site, n_sites: n });
    }
    let m = rho.matrix();
    Ok((0..rho.dim()).filter(|&a| site_bit(a, site, n) == 1).map(|a| m[(a, a)].re).sum())
}

/// Composite trapezoid rule for samples `y` on the grid `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    let n = x.len().min(y.len());
    if n < 2 {
        return Err(MetricsError::TooFewSamples(n));
    }
    Ok((1..n).map(|i| 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1])).sum())
}

/// `∫ p_site d(ct)` over the whole trajectory.
pub fn integrated_population(traj: &Trajectory, site: usize) -> Result<f64, MetricsError> {
    let n_sites = traj.populations.first().map_or(0, Vec::len);
    if site == 0 || site > n_sites {
        if traj.ct.len() < 2 {
            return Err(MetricsError::TooFewSamples(traj.ct.len()));
        }
        return Err(MetricsError::SiteOutOfRange { site, n_sites });
    }
    trapezoid(&traj.ct, &traj.population(site))
}

/// `2·Γ_d·P₃`.
pub fn efficiency(p3: f64, gamma_d: f64) -> Result<f64, MetricsError> {
    if !(gamma_d > 0.0) {
        return Err(MetricsError::NonPositiveRate(gamma_d));
    }
    Ok(2.0 * gamma_d * p3)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyRecord {
    /// P₃ in units of 1/c.
    pub p3_integral: f64,
    pub eta_eff: f64,
    /// Integration horizon `ct`.
    pub horizon: f64,
    /// Named sweep coordinates of this point, e.g. `("drive", 38.8)`.
    pub sweep_coords: Vec<(String, f64)>,
}

impl EfficiencyRecord {
    /// Builds the record from a trajectory; `gamma_d_over_c` is `Γ_d / c`.
    pub fn from_trajectory(
        traj: &Trajectory,
        gamma_d_over_c: f64,
        sweep_coords: Vec<(String, f64)>,
    ) -> Result<Self, MetricsError> {
        let p3 = integrated_population(traj, 3)?;
        Ok(EfficiencyRecord {
            p3_integral: p3,
            eta_eff: efficiency(p3, gamma_d_over_c)?,
            horizon: *traj.ct.last().expect("nonempty after integration"),
            sweep_coords,
        })
    }
}
