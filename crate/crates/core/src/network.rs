//! Network geometry, energy ladder, drive and the full time-dependent Hamiltonian.
//!
//! Units: ħ = 1 and the bare site frequency ω₀ = 1. Every rate is a multiple of ω₀.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qops::{pauli, site_operator, ComplexMatrix};

/// Hopping rates above this fraction of ω₀ put the RWA outside its validity range.
const RWA_WARN_RATIO: f64 = 0.1;
const RESONANCE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("unknown site {0}")]
    UnknownSite(usize),
    #[error("invalid network: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSpec {
    /// 1-based label; must equal the site's position in the list.
    pub label: usize,
    /// Integer lattice coordinate (i₁, i₂).
    pub coord: [u32; 2],
    /// Bare frequency ω_j.
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    /// Dimensionless amplitude η_d shared by all sites.
    pub eta_d: f64,
    pub omega_d: f64,
    pub phi_x: f64,
    pub phi_y: f64,
    /// Ladder step in units of the drive frequency, Δω = r·ω_d.
    pub r: u32,
    pub delta_omega: f64,
    pub theta1: u32,
    pub theta2: u32,
    /// Optional per-site amplitudes η_{d,j}; overrides `eta_d` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_d_per_site: Option<Vec<f64>>,
}

impl DriveSpec {
    fn validate(&self, n_sites: usize) -> Result<(), NetworkError> {
        if self.r < 1 {
            return Err(NetworkError::Invalid("drive ratio r must be at least 1".into()));
        }
        if !(self.omega_d > 0.0) {
            return Err(NetworkError::Invalid("drive frequency must be positive".into()));
        }
        if (self.delta_omega - self.r as f64 * self.omega_d).abs() >= RESONANCE_TOL {
            return Err(NetworkError::Invalid(format!(
                "ladder step {} is not r·ω_d = {}",
                self.delta_omega,
                self.r as f64 * self.omega_d
            )));
        }
        if let Some(etas) = &self.eta_d_per_site {
            if etas.len() != n_sites {
                return Err(NetworkError::Invalid(format!(
                    "{} per-site drive amplitudes for {} sites",
                    etas.len(),
                    n_sites
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    sites: Vec<SiteSpec>,
    drive: DriveSpec,
    hopping: Vec<Vec<f64>>,
    coupling_scale: f64,
}

/// Geometry, on-site energies, drive and hopping table of a network.
///
/// `coupling_scale` is the reference hopping rate `c` used to express times as
/// `ct` and drive strengths as `η_d ω_d / c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork", into = "RawNetwork")]
pub struct NetworkSpec {
    sites: Vec<SiteSpec>,
    drive: DriveSpec,
    hopping: Vec<Vec<f64>>,
    coupling_scale: f64,
}

impl TryFrom<RawNetwork> for NetworkSpec {
    type Error = NetworkError;

    fn try_from(raw: RawNetwork) -> Result<Self, NetworkError> {
        NetworkSpec::new(raw.sites, raw.drive, raw.hopping, raw.coupling_scale)
    }
}

impl From<NetworkSpec> for RawNetwork {
    fn from(n: NetworkSpec) -> Self {
        RawNetwork {
            sites: n.sites,
            drive: n.drive,
            hopping: n.hopping,
            coupling_scale: n.coupling_scale,
        }
    }
}

impl NetworkSpec {
    pub fn new(
        sites: Vec<SiteSpec>,
        drive: DriveSpec,
        hopping: Vec<Vec<f64>>,
        coupling_scale: f64,
    ) -> Result<Self, NetworkError> {
        let n = sites.len();
        if n == 0 || n > 10 {
            return Err(NetworkError::Invalid(format!("{n} sites (supported: 1..=10)")));
        }
        for (i, s) in sites.iter().enumerate() {
            if s.label != i + 1 {
                return Err(NetworkError::Invalid(format!(
                    "site at position {} has label {}",
                    i + 1,
                    s.label
                )));
            }
            if sites[..i].iter().any(|o| o.coord == s.coord) {
                return Err(NetworkError::Invalid(format!("duplicate coordinate {:?}", s.coord)));
            }
        }
        drive.validate(n)?;
        if hopping.len() != n || hopping.iter().any(|row| row.len() != n) {
            return Err(NetworkError::Invalid(format!("hopping table must be {n}x{n}")));
        }
        for j in 0..n {
            if hopping[j][j] != 0.0 {
                return Err(NetworkError::Invalid("hopping table diagonal must be zero".into()));
            }
            for k in 0..n {
                let c = hopping[j][k];
                if !(c >= 0.0) || c != hopping[k][j] {
                    return Err(NetworkError::Invalid(format!(
                        "hopping rate ({},{}) must be symmetric and non-negative",
                        j + 1,
                        k + 1
                    )));
                }
            }
        }
        if !(coupling_scale > 0.0) {
            return Err(NetworkError::Invalid("coupling scale must be positive".into()));
        }
        let omega0 = sites.iter().map(|s| s.omega).fold(f64::INFINITY, f64::min);
        let c_max = hopping.iter().flatten().copied().fold(0.0, f64::max);
        if c_max > RWA_WARN_RATIO * omega0 {
            warn!("hopping rate {c_max} exceeds ω₀/10; the RWA picture is not reliable");
        }
        Ok(NetworkSpec { sites, drive, hopping, coupling_scale })
    }

    /// The four-site square at (0,0),(1,0),(1,1),(0,1) with every pair coupled
    /// at rate `c`, ladder Δω = ω_d = ω₀/4 along x, φ_x = φ_y = π and no drive.
    pub fn four_site(c: f64) -> Self {
        let coords = [[0, 0], [1, 0], [1, 1], [0, 1]];
        let sites = coords
            .iter()
            .enumerate()
            .map(|(i, &coord)| SiteSpec { label: i + 1, coord, omega: 1.0 })
            .collect();
        let drive = DriveSpec {
            eta_d: 0.0,
            omega_d: 0.25,
            phi_x: PI,
            phi_y: PI,
            r: 1,
            delta_omega: 0.25,
            theta1: 1,
            theta2: 0,
            eta_d_per_site: None,
        };
        let hopping = (0..4)
            .map(|j| (0..4).map(|k| if j == k { 0.0 } else { c }).collect())
            .collect();
        NetworkSpec::new(sites, drive, hopping, c).expect("default network is valid")
    }

    pub fn sites(&self) -> &[SiteSpec] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.sites.len()
    }

    pub fn drive(&self) -> &DriveSpec {
        &self.drive
    }

    pub fn coupling_scale(&self) -> f64 {
        self.coupling_scale
    }

    pub fn hopping_rate(&self, j: usize, k: usize) -> Result<f64, NetworkError> {
        self.check_site(j)?;
        self.check_site(k)?;
        Ok(self.hopping[j - 1][k - 1])
    }

    pub fn site(&self, j: usize) -> Result<&SiteSpec, NetworkError> {
        self.check_site(j)?;
        Ok(&self.sites[j - 1])
    }

    fn check_site(&self, j: usize) -> Result<(), NetworkError> {
        if j == 0 || j > self.sites.len() {
            Err(NetworkError::UnknownSite(j))
        } else {
            Ok(())
        }
    }

    /// Replaces the shared drive amplitude.
    pub fn with_eta_d(mut self, eta_d: f64) -> Self {
        self.drive.eta_d = eta_d;
        self
    }

    /// Sets the drive from the rescaled strength `η_d ω_d / c`.
    pub fn with_drive_strength(self, strength: f64) -> Self {
        let eta = strength * self.coupling_scale / self.drive.omega_d;
        self.with_eta_d(eta)
    }

    /// The rescaled drive strength `η_d ω_d / c`.
    pub fn drive_strength(&self) -> f64 {
        self.drive.eta_d * self.drive.omega_d / self.coupling_scale
    }

    /// Sets every off-diagonal hopping rate to `c` and rescales the reference rate.
    pub fn with_uniform_hopping(mut self, c: f64) -> Self {
        let n = self.sites.len();
        for j in 0..n {
            for k in 0..n {
                self.hopping[j][k] = if j == k { 0.0 } else { c };
            }
        }
        self.coupling_scale = c;
        self
    }

    /// Drive amplitude η_{d,j} at site `j`.
    pub fn eta_d_at(&self, j: usize) -> Result<f64, NetworkError> {
        self.check_site(j)?;
        Ok(match &self.drive.eta_d_per_site {
            Some(etas) => etas[j - 1],
            None => self.drive.eta_d,
        })
    }

    /// Δω_j = Δω·(Θ₁ j₁ + Θ₂ j₂).
    pub fn ladder_offset(&self, j: usize) -> Result<f64, NetworkError> {
        Ok(self.drive.delta_omega * self.ladder_index(j)? as f64)
    }

    /// Θ₁ j₁ + Θ₂ j₂.
    pub fn ladder_index(&self, j: usize) -> Result<i64, NetworkError> {
        let [i1, i2] = self.site(j)?.coord;
        Ok(self.drive.theta1 as i64 * i1 as i64 + self.drive.theta2 as i64 * i2 as i64)
    }

    /// φ_j = j₁ φ_x + j₂ φ_y.
    pub fn site_phase(&self, j: usize) -> Result<f64, NetworkError> {
        let [i1, i2] = self.site(j)?.coord;
        Ok(i1 as f64 * self.drive.phi_x + i2 as f64 * self.drive.phi_y)
    }

    /// ω_j + Δω_j + η_{d,j} ω_d cos(ω_d t + φ_j).
    pub fn onsite_coefficient(&self, j: usize, t: f64) -> Result<f64, NetworkError> {
        let d = &self.drive;
        Ok(self.site(j)?.omega
            + self.ladder_offset(j)?
            + self.eta_d_at(j)? * d.omega_d * (d.omega_d * t + self.site_phase(j)?).cos())
    }

    /// Static part ω_j + Δω_j of every site.
    pub fn static_energies(&self) -> Vec<f64> {
        (1..=self.n_sites())
            .map(|j| self.sites[j - 1].omega + self.ladder_offset(j).expect("valid site"))
            .collect()
    }

    /// Largest on-site angular frequency reachable during the drive.
    pub fn max_frequency(&self) -> f64 {
        let d = &self.drive;
        let eta_max = match &d.eta_d_per_site {
            Some(e) => e.iter().map(|x| x.abs()).fold(0.0, f64::max),
            None => d.eta_d.abs(),
        };
        let static_max = self.static_energies().into_iter().fold(f64::NEG_INFINITY, f64::max);
        static_max + eta_max * d.omega_d
    }

    /// Σ_{j<k} c_{jk}(σ_j⁺σ_k⁻ + σ_j⁻σ_k⁺).
    pub fn hopping_hamiltonian(&self) -> ComplexMatrix {
        let n = self.n_sites();
        let mut h = ComplexMatrix::zeros(self.dim(), self.dim());
        for j in 1..=n {
            for k in j + 1..=n {
                let c = self.hopping[j - 1][k - 1];
                if c == 0.0 {
                    continue;
                }
                let term = hop_term(n, j, k);
                h = &h + &(&term + &term.adjoint()).scale_real(c);
            }
        }
        h
    }

    /// Full Ĥ(t) = Ĥ₀(t) + Ĥ_c.
    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let mut h = self.hopping_hamiltonian();
        let n = self.n_sites();
        for j in 1..=n {
            let e = self.onsite_coefficient(j, t).expect("valid site");
            for a in 0..self.dim() {
                if crate::qops::site_bit(a, j, n) == 1 {
                    h[(a, a)] += C64::new(e, 0.0);
                }
            }
        }
        h
    }
}

/// σ_j⁺σ_k⁻ on an `n`-site register.
pub(crate) fn hop_term(n: usize, j: usize, k: usize) -> ComplexMatrix {
    let up = site_operator(n, j, &pauli::sigma_plus()).expect("valid site");
    let down = site_operator(n, k, &pauli::sigma_minus()).expect("valid site");
    &up * &down
}

/// N̂ = Σ_j σ_j⁺σ_j⁻.
pub fn excitation_number(n_sites: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..1usize << n_sites).map(|a| a.count_ones() as f64).collect();
    ComplexMatrix::real_diagonal(&diag)
}
