//! Run configuration: strict JSON schema with documented defaults.
//!
//! See `docs/config-schema.md` for the field reference.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::epidemic::{BenignProfile, WormProfile};
use crate::error::{Error, Result};
use crate::lymph_node::DifferentiationParams;
use crate::netsim::topology::TopologySpec;
use crate::peer_interaction::InteractionParams;
use crate::periphery::AssessmentParams;
use crate::responder::ResponderParams;
use crate::types::{Antigen, Step};

/// An attack placed by the scenario rather than by worm propagation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialInfection {
    pub host: u32,
    pub antigen: Antigen,
    /// Step at whose start the infection activates.
    #[serde(default)]
    pub step: Step,
}

/// A host that already blocks an antigen when the run starts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchedHost {
    pub host: u32,
    pub antigen: Antigen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub topology: TopologySpec,
    #[serde(default)]
    pub worms: Vec<WormProfile>,
    #[serde(default)]
    pub benign: Vec<BenignProfile>,
    #[serde(default)]
    pub assessment: AssessmentParams,
    #[serde(default)]
    pub differentiation: DifferentiationParams,
    #[serde(default)]
    pub interaction: InteractionParams,
    #[serde(default)]
    pub responder: ResponderParams,
    #[serde(default = "enabled")]
    pub cardinal_enabled: bool,
    #[serde(default)]
    pub initial_infections: Vec<InitialInfection>,
    #[serde(default)]
    pub patched_hosts: Vec<PatchedHost>,
    pub horizon: u64,
}

fn enabled() -> bool {
    true
}

impl RunConfig {
    /// A configuration with every optional field at its default.
    pub fn new(topology: TopologySpec, horizon: u64) -> Self {
        RunConfig {
            topology,
            worms: Vec::new(),
            benign: Vec::new(),
            assessment: AssessmentParams::default(),
            differentiation: DifferentiationParams::default(),
            interaction: InteractionParams::default(),
            responder: ResponderParams::default(),
            cardinal_enabled: true,
            initial_infections: Vec::new(),
            patched_hosts: Vec::new(),
            horizon,
        }
    }

    pub fn host_count(&self) -> usize {
        self.topology.host_count()
    }

    pub fn is_benign(&self, antigen: &Antigen) -> bool {
        self.benign.iter().any(|b| b.antigen == *antigen)
    }

    /// Worm antigens followed by benign antigens, in configuration order.
    pub fn antigens(&self) -> Vec<Antigen> {
        self.worms
            .iter()
            .map(|w| w.antigen.clone())
            .chain(self.benign.iter().map(|b| b.antigen.clone()))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        self.topology.validate("topology")?;
        self.assessment.validate("assessment")?;
        self.differentiation.validate("differentiation")?;
        self.interaction.validate("interaction")?;
        self.responder.validate("responder")?;

        let mut seen = BTreeSet::new();
        for (i, worm) in self.worms.iter().enumerate() {
            let path = format!("worms[{i}]");
            worm.validate(&path)?;
            if !seen.insert(&worm.antigen) {
                return Err(Error::config(
                    format!("{path}.antigen"),
                    format!("duplicate antigen `{}`", worm.antigen),
                ));
            }
        }
        for (i, profile) in self.benign.iter().enumerate() {
            let path = format!("benign[{i}]");
            profile.validate(&path)?;
            if !seen.insert(&profile.antigen) {
                return Err(Error::config(
                    format!("{path}.antigen"),
                    format!(
                        "antigen `{}` already used by another profile",
                        profile.antigen
                    ),
                ));
            }
        }

        let hosts = self.host_count();
        for (i, inf) in self.initial_infections.iter().enumerate() {
            let path = format!("initial_infections[{i}]");
            if inf.host as usize >= hosts {
                return Err(Error::config(
                    format!("{path}.host"),
                    format!("host {} out of range 0..{hosts}", inf.host),
                ));
            }
            if !self.worms.iter().any(|w| w.antigen == inf.antigen) {
                return Err(Error::config(
                    format!("{path}.antigen"),
                    format!("no worm profile for `{}`", inf.antigen),
                ));
            }
            if inf.step >= self.horizon {
                return Err(Error::config(
                    format!("{path}.step"),
                    "must be before the horizon",
                ));
            }
        }
        for (i, patch) in self.patched_hosts.iter().enumerate() {
            let path = format!("patched_hosts[{i}]");
            if patch.host as usize >= hosts {
                return Err(Error::config(
                    format!("{path}.host"),
                    format!("host {} out of range 0..{hosts}", patch.host),
                ));
            }
            if !seen.contains(&patch.antigen) {
                return Err(Error::config(
                    format!("{path}.antigen"),
                    format!("unknown antigen `{}`", patch.antigen),
                ));
            }
        }
        Ok(())
    }
}

/// Parses and validates a JSON configuration. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        Error::config(path, err.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Domain checks producing errors that name the offending key path.
pub(crate) mod check {
    use crate::error::{Error, Result};

    fn fail(path: &str, key: &str, msg: String) -> Error {
        Error::config(format!("{path}.{key}"), msg)
    }

    pub fn open_unit(path: &str, key: &str, v: f64) -> Result<()> {
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(fail(
                path,
                key,
                format!("{v} must lie strictly inside (0, 1)"),
            ))
        }
    }

    pub fn half_open_unit(path: &str, key: &str, v: f64) -> Result<()> {
        if v > 0.0 && v <= 1.0 {
            Ok(())
        } else {
            Err(fail(path, key, format!("{v} must lie in (0, 1]")))
        }
    }

    pub fn closed_unit(path: &str, key: &str, v: f64) -> Result<()> {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(fail(path, key, format!("{v} must lie in [0, 1]")))
        }
    }

    pub fn unit_range(path: &str, key: &str, [lo, hi]: [f64; 2]) -> Result<()> {
        if (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi {
            Ok(())
        } else {
            Err(fail(
                path,
                key,
                format!("[{lo}, {hi}] must be a sub-interval of [0, 1]"),
            ))
        }
    }

    pub fn positive(path: &str, key: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(fail(path, key, format!("{v} must be positive")))
        }
    }

    pub fn non_negative(path: &str, key: &str, v: f64) -> Result<()> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(fail(path, key, format!("{v} must be non-negative")))
        }
    }

    pub fn positive_int(path: &str, key: &str, v: u64) -> Result<()> {
        if v > 0 {
            Ok(())
        } else {
            Err(fail(path, key, "must be at least 1".to_string()))
        }
    }
}
