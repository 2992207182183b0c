use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use super::ScenarioError;
use crate::qops::DensityMatrix;

/// |gegg⟩: site 2 excited.
const SITE2_EXCITED: usize = 0b0100;
/// |ggge⟩: site 4 excited.
const SITE4_EXCITED: usize = 0b0001;
const DIM: usize = 16;

/// Initial state of the four-site register. Sites 1 and 3 start in |g⟩ for
/// every named kind; the kinds differ in how sites 2 and 4 share one excitation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", from = "RawSpec")]
pub enum InitialStateSpec {
    /// (|eg⟩ + |ge⟩)/√2 on sites (2, 4).
    Entangled,
    /// Equal mixture of |eg⟩ and |ge⟩ on sites (2, 4).
    Mixed,
    /// cos θ|eg⟩ + sin θ|ge⟩ on sites (2, 4), θ ∈ [0, π/2].
    ThetaPure { theta: f64 },
    /// |gggg⟩.
    Ground,
    /// An explicit 16×16 density matrix.
    Custom { matrix: DensityMatrix },
}

/// Mirror with struct variants: serde ignores `deny_unknown_fields` on
/// internally tagged unit variants.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawSpec {
    Entangled {},
    Mixed {},
    ThetaPure { theta: f64 },
    Ground {},
    Custom { matrix: DensityMatrix },
}

impl From<RawSpec> for InitialStateSpec {
    fn from(raw: RawSpec) -> Self {
        match raw {
            RawSpec::Entangled {} => InitialStateSpec::Entangled,
            RawSpec::Mixed {} => InitialStateSpec::Mixed,
            RawSpec::ThetaPure { theta } => InitialStateSpec::ThetaPure { theta },
            RawSpec::Ground {} => InitialStateSpec::Ground,
            RawSpec::Custom { matrix } => InitialStateSpec::Custom { matrix },
        }
    }
}

impl InitialStateSpec {
    pub fn label(&self) -> &'static str {
        match self {
            InitialStateSpec::Entangled => "ent",
            InitialStateSpec::Mixed => "mix",
            InitialStateSpec::ThetaPure { .. } => "theta",
            InitialStateSpec::Ground => "ground",
            InitialStateSpec::Custom { .. } => "custom",
        }
    }
}

fn theta_pure(theta: f64) -> Result<DensityMatrix, ScenarioError> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(ScenarioError::InvalidConfig(format!("theta {theta} outside [0, π/2]")));
    }
    let mut psi = vec![C64::new(0.0, 0.0); DIM];
    psi[SITE2_EXCITED] = C64::new(theta.cos(), 0.0);
    psi[SITE4_EXCITED] = C64::new(theta.sin(), 0.0);
    Ok(DensityMatrix::from_pure(&psi)?)
}

pub fn initial_state(spec: &InitialStateSpec) -> Result<DensityMatrix, ScenarioError> {
    match spec {
        InitialStateSpec::Entangled => theta_pure(std::f64::consts::FRAC_PI_4),
        InitialStateSpec::Mixed => Ok(DensityMatrix::basis_state(DIM, SITE2_EXCITED)
            .mix(&DensityMatrix::basis_state(DIM, SITE4_EXCITED), 0.5)?),
        InitialStateSpec::ThetaPure { theta } => theta_pure(*theta),
        InitialStateSpec::Ground => Ok(DensityMatrix::basis_state(DIM, 0)),
        InitialStateSpec::Custom { matrix } => {
            if matrix.dim() != DIM {
                return Err(ScenarioError::InvalidConfig(format!(
                    "custom state has dimension {}, expected {DIM}",
                    matrix.dim()
                )));
            }
            Ok(DensityMatrix::new(matrix.matrix().clone())?)
        }
    }
}
