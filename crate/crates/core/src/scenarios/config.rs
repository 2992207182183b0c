use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use super::{InitialStateSpec, ScenarioError};
use crate::lindblad::{DissipatorSpec, IntegratorSpec};
use crate::network::NetworkSpec;

/// One sweep axis: an explicit list or an inclusive arithmetic range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Axis {
    /// `start, start + step, …` up to `stop` inclusive.
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Axis::Range { start, stop, step }
    }

    pub fn values(&self) -> Result<Vec<f64>, ScenarioError> {
        let out = match self {
            Axis::Values(v) => v.clone(),
            Axis::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                    return Err(ScenarioError::InvalidGrid(format!(
                        "range {start}..={stop} step {step}"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| start + k as f64 * step).collect()
            }
        };
        if out.is_empty() || out.iter().any(|v| !v.is_finite()) {
            return Err(ScenarioError::InvalidGrid("empty or non-finite axis".into()));
        }
        Ok(out)
    }
}

/// Named parameter grids. Points are visited in lexicographic order with the
/// axes nested as listed here, `drive` outermost.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Rescaled drive strength η_d ω_d / c.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<Axis>,
    /// Uniform dephasing γ / c.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Axis>,
    /// Angle of the theta-pure initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Axis>,
    /// Drain rate Γ_d / c, with the pump following as Γ_s = 2Γ_d.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drain: Option<Axis>,
}

impl SweepSpec {
    /// Present axes with their resolved values, in nesting order.
    pub fn axes(&self) -> Result<Vec<(&'static str, Vec<f64>)>, ScenarioError> {
        let mut out = Vec::new();
        for (name, axis) in [
            ("drive", &self.drive),
            ("gamma", &self.gamma),
            ("theta", &self.theta),
            ("drain", &self.drain),
        ] {
            if let Some(a) = axis {
                out.push((name, a.values()?));
            }
        }
        Ok(out)
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_name() -> String {
    "sweep".into()
}

fn default_pair() -> Vec<usize> {
    vec![2, 4]
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Base name of every file written by the run.
    #[serde(default = "default_name")]
    pub name: String,
    /// One population CSV per point.
    #[serde(default, skip_serializing_if = "is_false")]
    pub trajectories: bool,
    /// Time-averaged EoF, discord and mutual information columns in the sweep table.
    #[serde(default, skip_serializing_if = "is_false")]
    pub correlations: bool,
    /// One correlation time-series CSV per point.
    #[serde(default, skip_serializing_if = "is_false")]
    pub correlation_series: bool,
    /// Sites whose reduced state feeds the correlation measures.
    #[serde(default = "default_pair")]
    pub pair: Vec<usize>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            name: default_name(),
            trajectories: false,
            correlations: false,
            correlation_series: false,
            pair: default_pair(),
        }
    }
}

impl OutputSpec {
    pub fn needs_pair(&self) -> bool {
        self.correlations || self.correlation_series
    }

    pub fn table_path(&self) -> PathBuf {
        self.dir.join(format!("{}.csv", self.name))
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(format!("{}_manifest.json", self.name))
    }

    pub fn trajectory_path(&self, index: usize) -> PathBuf {
        self.dir.join(format!("{}_traj_{index:05}.csv", self.name))
    }

    pub fn series_path(&self, index: usize) -> PathBuf {
        self.dir.join(format!("{}_corr_{index:05}.csv", self.name))
    }
}

/// A complete run description, read from and written to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub network: NetworkSpec,
    pub dissipators: DissipatorSpec,
    pub integrator: IntegratorSpec,
    pub initial: InitialStateSpec,
    /// Final time in units of `ct`.
    pub horizon: f64,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

impl ScenarioConfig {
    /// The transport setup of the four-site network: c = ω₀/100, Γ_d = c/100,
    /// Γ_s = 2Γ_d, no dephasing, horizon ct = 10.
    pub fn transport(initial: InitialStateSpec) -> Self {
        let c = 0.01;
        let gamma_d = c / 100.0;
        ScenarioConfig {
            network: NetworkSpec::four_site(c),
            dissipators: DissipatorSpec::uniform(2.0 * gamma_d, gamma_d, 0.0, 4),
            integrator: IntegratorSpec::default(),
            initial,
            horizon: 10.0,
            sweep: SweepSpec::default(),
            outputs: OutputSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(ScenarioError::InvalidConfig(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        self.integrator.validate()?;
        self.dissipators.validate(self.network.n_sites())?;
        let axes = self.sweep.axes()?;
        for (name, values) in &axes {
            let bad = match *name {
                "gamma" | "drain" => values.iter().any(|v| *v < 0.0),
                "theta" => values.iter().any(|v| !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(v)),
                _ => false,
            };
            if bad {
                return Err(ScenarioError::InvalidGrid(format!("values out of range on axis {name}")));
            }
        }
        if self.outputs.needs_pair() && self.outputs.pair.len() != 2 {
            return Err(ScenarioError::InvalidConfig("correlation pair must name two sites".into()));
        }
        if self.outputs.name.is_empty() || self.outputs.name.contains(['/', '\\']) {
            return Err(ScenarioError::InvalidConfig(format!(
                "output name {:?} must be a plain file stem",
                self.outputs.name
            )));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn axis_forms() {
        let a = Axis::range(0.0, 60.0, 0.4).values().unwrap();
        assert_eq!(a.len(), 151);
        assert!((a[45] - 18.0).abs() < 1e-12);
        assert!((a[97] - 38.8).abs() < 1e-12);
        assert_eq!(Axis::Values(vec![1.0, 3.0]).values().unwrap(), vec![1.0, 3.0]);
        assert!(Axis::Values(vec![]).values().is_err());
        assert!(Axis::range(1.0, 0.0, 0.1).values().is_err());
        assert!(Axis::range(0.0, 1.0, 0.0).values().is_err());
        let parsed: Axis = serde_json::from_str(r#"{"start": 0, "stop": 1, "step": 0.5}"#).unwrap();
        assert_eq!(parsed.values().unwrap(), vec![0.0, 0.5, 1.0]);
        let parsed: Axis = serde_json::from_str("[0.1, 0.2]").unwrap();
        assert_eq!(parsed, Axis::Values(vec![0.1, 0.2]));
    }

    #[test]
    fn axes_come_out_in_nesting_order() {
        let sweep = SweepSpec {
            drain: Some(Axis::Values(vec![0.01])),
            drive: Some(Axis::Values(vec![1.0])),
            ..Default::default()
        };
        let names: Vec<_> = sweep.axes().unwrap().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["drive", "drain"]);
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let mut cfg = ScenarioConfig::transport(InitialStateSpec::Entangled);
        cfg.sweep.drive = Some(Axis::range(0.0, 60.0, 0.4));
        cfg.sweep.gamma = Some(Axis::Values(vec![0.0, 0.1]));
        cfg.outputs.correlations = true;
        let text = cfg.to_json_pretty();
        assert_eq!(ScenarioConfig::from_json_str(&text).unwrap(), cfg);

        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["horizn"] = serde_json::json!(3.0);
        assert!(ScenarioConfig::from_json_str(&value.to_string()).is_err());
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["sweep"]["gama"] = serde_json::json!([0.0]);
        assert!(ScenarioConfig::from_json_str(&value.to_string()).is_err());
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["integrator"]["dtt"] = serde_json::json!(0.1);
        assert!(ScenarioConfig::from_json_str(&value.to_string()).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ScenarioConfig::transport(InitialStateSpec::Mixed);
        assert!(cfg.validate().is_ok());
        cfg.horizon = 0.0;
        assert!(cfg.validate().is_err());
        cfg.horizon = 10.0;
        cfg.sweep.theta = Some(Axis::Values(vec![2.0]));
        assert!(cfg.validate().is_err());
        cfg.sweep.theta = None;
        cfg.sweep.gamma = Some(Axis::Values(vec![-0.1]));
        assert!(cfg.validate().is_err());
        cfg.sweep.gamma = None;
        cfg.outputs.name = "a/b".into();
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn config_round_trip(
            c in 1e-3f64..0.1,
            x in 0.0f64..60.0,
            gamma in 0.0f64..0.01,
            horizon in 0.1f64..100.0,
            theta in 0.0f64..1.5,
            dt in prop::option::of(1e-3f64..0.1),
            values in prop::collection::vec(-100.0f64..100.0, 1..5),
        ) {
            let mut cfg = ScenarioConfig::transport(InitialStateSpec::ThetaPure { theta });
            cfg.network = NetworkSpec::four_site(c).with_drive_strength(x);
            cfg.dissipators = DissipatorSpec::uniform(2.0 * gamma, gamma, gamma / 3.0, 4);
            cfg.integrator.dt = dt;
            cfg.horizon = horizon;
            cfg.sweep.drive = Some(Axis::Values(values));
            cfg.sweep.gamma = Some(Axis::range(0.0, 1.0, 0.05));
            let text = cfg.to_json_pretty();
            prop_assert_eq!(ScenarioConfig::from_json_str(&text).unwrap(), cfg);
        }
    }
}
