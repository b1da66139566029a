//! Periphery responses: CTLs block (and disinfect), Th2 cells rate-limit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::check;
use crate::epidemic::{InfectionMap, InfectionState};
use crate::error::{Error, Result};
use crate::lymph_node::EffectorTCell;
use crate::types::{Antigen, CellType, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ResponseKind {
    Strong,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseAction {
    pub kind: ResponseKind,
    pub antigen: Antigen,
    pub applied_at: Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponderParams {
    /// Infection-success multiplier applied by a weak response.
    pub weak_multiplier: f64,
}

impl Default for ResponderParams {
    fn default() -> Self {
        ResponderParams {
            weak_multiplier: 0.5,
        }
    }
}

impl ResponderParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        check::half_open_unit(path, "weak_multiplier", self.weak_multiplier)
    }
}

/// Per-host defensive state. `blocked` only grows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DefensePosture {
    pub blocked: BTreeSet<Antigen>,
    pub rate_limited: BTreeMap<Antigen, f64>,
    pub response_log: Vec<ResponseAction>,
}

impl DefensePosture {
    pub fn is_blocked(&self, antigen: &Antigen) -> bool {
        self.blocked.contains(antigen)
    }

    /// Infection-success multiplier for `antigen`: 0 when blocked, the
    /// rate-limit multiplier when limited, 1 otherwise.
    pub fn multiplier(&self, antigen: &Antigen) -> f64 {
        if self.is_blocked(antigen) {
            0.0
        } else {
            self.rate_limited.get(antigen).copied().unwrap_or(1.0)
        }
    }

    pub fn actions_at(&self, step: Step) -> impl Iterator<Item = &ResponseAction> {
        let start = self.response_log.partition_point(|a| a.applied_at < step);
        self.response_log[start..]
            .iter()
            .take_while(move |a| a.applied_at == step)
    }
}

/// Applies a local CTL or Th2 effector. Returns the logged action, or `None`
/// when the same action was already logged this step.
pub fn apply_response(
    posture: &mut DefensePosture,
    infections: &mut InfectionMap,
    effector: &EffectorTCell,
    step: Step,
    params: &ResponderParams,
) -> Result<Option<ResponseAction>> {
    let kind = match effector.cell_type {
        CellType::Ctl => ResponseKind::Strong,
        CellType::Th2 => ResponseKind::Weak,
        CellType::Th1 => {
            return Err(Error::Th1Response {
                antigen: effector.antigen.to_string(),
            })
        }
    };
    if posture
        .actions_at(step)
        .any(|a| a.kind == kind && a.antigen == effector.antigen)
    {
        return Ok(None);
    }

    match kind {
        ResponseKind::Strong => {
            posture.blocked.insert(effector.antigen.clone());
            if let Some(state @ InfectionState::Infected { .. }) =
                infections.get_mut(&effector.antigen)
            {
                *state = InfectionState::Cured;
            }
        }
        ResponseKind::Weak => {
            posture
                .rate_limited
                .insert(effector.antigen.clone(), params.weak_multiplier);
        }
    }
    let action = ResponseAction {
        kind,
        antigen: effector.antigen.clone(),
        applied_at: step,
    };
    posture.response_log.push(action.clone());
    Ok(Some(action))
}

pub fn count_active_responses(posture: &DefensePosture, step: Step) -> u32 {
    posture.actions_at(step).count() as u32
}
