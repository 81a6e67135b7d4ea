//! Scenario configs: one JSON file describes a run; every output embeds the
//! resolved config so results are bit-reproducible from the summary alone.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use duality_core::duality::{EngineKind, MfClosure};
use duality_core::pauli::PauliVector;
use duality_core::schedule::{Schedule, Segment};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Full,
    Symmetric,
    #[default]
    Auto,
}

impl std::fmt::Display for EngineChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EngineChoice::Full => write!(f, "full"),
            EngineChoice::Symmetric => write!(f, "symmetric"),
            EngineChoice::Auto => write!(f, "auto"),
        }
    }
}

impl EngineChoice {
    /// Auto picks the brute-force engine for n ≤ 12, the sector engine above.
    pub fn resolve(&self, n: usize) -> EngineKind {
        match self {
            EngineChoice::Full => EngineKind::Full,
            EngineChoice::Symmetric => EngineKind::Symmetric,
            EngineChoice::Auto => {
                if n <= 12 {
                    EngineKind::Full
                } else {
                    EngineKind::Symmetric
                }
            }
        }
    }
}

/// Mean-field closure for the duality comparisons. `self-consistent` is the
/// master equation whose effective field uses the central state's own order
/// parameter; `replica-driven` takes the field from a freely precessing
/// replica, which is the flow the exact marginal converges to as n grows.
/// The two coincide for single-axis drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureChoice {
    #[default]
    SelfConsistent,
    ReplicaDriven,
}

impl ClosureChoice {
    pub fn to_core(self) -> MfClosure {
        match self {
            ClosureChoice::SelfConsistent => MfClosure::SelfConsistent,
            ClosureChoice::ReplicaDriven => MfClosure::ReplicaDriven,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub t_start: f64,
    pub h0: [f64; 3],
    pub v: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Initial state amplitudes as (re₀, im₀, re₁, im₁), normalized to 1e−9.
    pub phi: [f64; 4],
    pub schedule: ScheduleSpec,
    pub t_final: f64,
    /// Output grid spacing for time series.
    pub out_step: f64,
    /// Integrator step override; omitted means the default step policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub engine: EngineChoice,
    #[serde(default)]
    pub closure: ClosureChoice,
    #[serde(default)]
    pub seed: u64,

    // Command-specific knobs; each command validates what it needs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_fixed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_list: Option<Vec<f64>>,
    /// Second initial state for distance-ratio runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_b: Option<[f64; 4]>,
}

fn parse_phi(raw: &[f64; 4], what: &str) -> Result<[C64; 2], CliError> {
    let phi = [C64::new(raw[0], raw[1]), C64::new(raw[2], raw[3])];
    let norm2 = phi[0].norm_sqr() + phi[1].norm_sqr();
    if !norm2.is_finite() || (norm2.sqrt() - 1.0).abs() > 1e-9 {
        return Err(CliError::Config(format!(
            "{what} must be normalized to 1e-9 (|{what}| = {})",
            norm2.sqrt()
        )));
    }
    Ok(phi)
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let scenario: Scenario = serde_json::from_str(&text).map_err(|e| {
            // serde_json reports line and column in its Display output.
            CliError::Config(format!("{}: {e}", path.display()))
        })?;
        scenario.validate_common()?;
        Ok(scenario)
    }

    fn validate_common(&self) -> Result<(), CliError> {
        if self.name.is_empty() || self.name.contains(['/', '\\', '\0']) {
            return Err(CliError::Config(format!(
                "scenario name {:?} must be non-empty and free of path separators",
                self.name
            )));
        }
        parse_phi(&self.phi, "phi")?;
        if let Some(b) = &self.phi_b {
            parse_phi(b, "phi_b")?;
        }
        if !self.t_final.is_finite() || self.t_final < 0.0 {
            return Err(CliError::Config(format!(
                "t_final {} must be finite and ≥ 0",
                self.t_final
            )));
        }
        if !self.out_step.is_finite() || self.out_step <= 0.0 {
            return Err(CliError::Config(format!(
                "out_step {} must be > 0",
                self.out_step
            )));
        }
        if let Some(dt) = self.dt {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(CliError::Config(format!("dt {dt} must be > 0")));
            }
        }
        if self.schedule.segments.is_empty() {
            return Err(CliError::Config("schedule needs ≥ 1 segment".into()));
        }
        Ok(())
    }

    pub fn phi_amplitudes(&self) -> Result<[C64; 2], CliError> {
        parse_phi(&self.phi, "phi")
    }

    pub fn phi_b_amplitudes(&self) -> Result<[C64; 2], CliError> {
        let raw = self
            .phi_b
            .ok_or_else(|| CliError::Config("this command needs phi_b".into()))?;
        parse_phi(&raw, "phi_b")
    }

    /// Single system size, required by most commands.
    pub fn single_n(&self) -> Result<usize, CliError> {
        match (self.n, &self.n_list) {
            (Some(n), None) => Ok(n),
            (None, Some(_)) => Err(CliError::Config(
                "this command needs a single n, not n_list".into(),
            )),
            (Some(_), Some(_)) => Err(CliError::Config("give n or n_list, not both".into())),
            (None, None) => Err(CliError::Config("this command needs n".into())),
        }
    }

    /// One or more system sizes.
    pub fn n_values(&self) -> Result<Vec<usize>, CliError> {
        match (self.n, &self.n_list) {
            (Some(n), None) => Ok(vec![n]),
            (None, Some(list)) if !list.is_empty() => Ok(list.clone()),
            (Some(_), Some(_)) => Err(CliError::Config("give n or n_list, not both".into())),
            _ => Err(CliError::Config("this command needs n or n_list".into())),
        }
    }

    /// Build the core schedule covering times up to `required` at least.
    pub fn core_schedule(&self, required: f64) -> Result<Schedule, CliError> {
        let segments: Result<Vec<Segment>, CliError> = self
            .schedule
            .segments
            .iter()
            .map(|s| {
                Ok(Segment {
                    t_start: s.t_start,
                    h0: PauliVector::new(s.h0[0], s.h0[1], s.h0[2])
                        .map_err(|e| CliError::Config(e.to_string()))?,
                    v: PauliVector::new(s.v[0], s.v[1], s.v[2])
                        .map_err(|e| CliError::Config(e.to_string()))?,
                })
            })
            .collect();
        let segments = segments?;
        let last_start = segments.last().map(|s| s.t_start).unwrap_or(0.0);
        Schedule::new(segments, required.max(last_start))
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Output time grid 0, out_step, …, t_final.
    pub fn time_grid(&self) -> Vec<f64> {
        let steps = (self.t_final / self.out_step + 1e-9).floor() as usize;
        let mut grid: Vec<f64> = (0..=steps).map(|i| i as f64 * self.out_step).collect();
        if let Some(&last) = grid.last() {
            if last < self.t_final - 1e-12 * (1.0 + self.t_final) {
                grid.push(self.t_final);
            } else {
                *grid.last_mut().unwrap() = last.min(self.t_final);
            }
        }
        grid
    }
}
