//! Naive T-cell pools, maturation, differentiation into effectors, memory
//! thresholds and effector decay.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::check;
use crate::error::{Error, Result};
use crate::periphery::DendriticCellReport;
use crate::types::{Antigen, CellType, Origin, Step};

/// Activation thresholds for the three effector types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub ctl: f64,
    pub th1: f64,
    pub th2: f64,
}

impl Thresholds {
    pub fn scaled(self, factor: f64) -> Self {
        Thresholds {
            ctl: self.ctl * factor,
            th1: self.th1 * factor,
            th2: self.th2 * factor,
        }
    }

    pub fn get(&self, cell_type: CellType) -> f64 {
        match cell_type {
            CellType::Ctl => self.ctl,
            CellType::Th1 => self.th1,
            CellType::Th2 => self.th2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveTCell {
    pub tcr: Antigen,
    pub a_ctl: f64,
    pub a_th1: f64,
    pub a_th2: f64,
    pub thresholds: Thresholds,
    pub created_at: Step,
    pub is_memory: bool,
}

impl NaiveTCell {
    pub fn activation(&self, cell_type: CellType) -> f64 {
        match cell_type {
            CellType::Ctl => self.a_ctl,
            CellType::Th1 => self.a_th1,
            CellType::Th2 => self.a_th2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectorTCell {
    pub antigen: Antigen,
    pub cell_type: CellType,
    pub clones: u32,
    pub origin: Origin,
    /// Clone counts recorded at the end of the two previous steps, oldest first.
    pub clones_hist: (u32, u32),
    pub created_at: Step,
}

impl EffectorTCell {
    pub fn local(antigen: Antigen, cell_type: CellType, clones: u32, created_at: Step) -> Self {
        EffectorTCell {
            antigen,
            cell_type,
            clones,
            origin: Origin::Local,
            clones_hist: (0, clones),
            created_at,
        }
    }

    pub fn key(&self) -> (&Antigen, CellType) {
        (&self.antigen, self.cell_type)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DifferentiationParams {
    pub theta_ctl: f64,
    pub theta_th1: f64,
    pub theta_th2: f64,
    pub maturation_window: u64,
    pub clone_gain: f64,
    pub clone_cap: u32,
    /// Threshold multiplier for antigens in the memory registry. `1.0`
    /// disables memory.
    pub memory_factor: f64,
    pub decay_per_step: u32,
}

impl Default for DifferentiationParams {
    fn default() -> Self {
        DifferentiationParams {
            theta_ctl: 5.0,
            theta_th1: 5.0,
            theta_th2: 3.0,
            maturation_window: 3,
            clone_gain: 1.0,
            clone_cap: 32,
            memory_factor: 0.5,
            decay_per_step: 1,
        }
    }
}

impl DifferentiationParams {
    pub fn base_thresholds(&self) -> Thresholds {
        Thresholds {
            ctl: self.theta_ctl,
            th1: self.theta_th1,
            th2: self.theta_th2,
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        check::positive(path, "theta_ctl", self.theta_ctl)?;
        check::positive(path, "theta_th1", self.theta_th1)?;
        check::positive(path, "theta_th2", self.theta_th2)?;
        check::positive_int(path, "maturation_window", self.maturation_window)?;
        check::positive(path, "clone_gain", self.clone_gain)?;
        check::positive_int(path, "clone_cap", u64::from(self.clone_cap))?;
        check::half_open_unit(path, "memory_factor", self.memory_factor)?;
        check::positive_int(path, "decay_per_step", u64::from(self.decay_per_step))?;
        Ok(())
    }
}

/// Antigens for which this host keeps lowered activation thresholds.
pub type MemoryRegistry = BTreeSet<Antigen>;

/// Naive cells keyed by TCR; at most one per antigen.
pub type NaivePool = BTreeMap<Antigen, NaiveTCell>;

/// Returns the naive cell for `antigen`, creating it with zero activation if
/// absent. Memory antigens get thresholds scaled by `memory_factor`.
pub fn ensure_naive<'a>(
    pool: &'a mut NaivePool,
    antigen: &Antigen,
    step: Step,
    memory: &MemoryRegistry,
    params: &DifferentiationParams,
) -> &'a mut NaiveTCell {
    pool.entry(antigen.clone()).or_insert_with(|| {
        let is_memory = memory.contains(antigen);
        let base = params.base_thresholds();
        NaiveTCell {
            tcr: antigen.clone(),
            a_ctl: 0.0,
            a_th1: 0.0,
            a_th2: 0.0,
            thresholds: if is_memory {
                base.scaled(params.memory_factor)
            } else {
                base
            },
            created_at: step,
            is_memory,
        }
    })
}

/// Adds a report's signals to the matching activation values.
pub fn mature(naive: &mut NaiveTCell, report: &DendriticCellReport) -> Result<()> {
    if naive.tcr != report.antigen {
        return Err(Error::AntigenMismatch {
            expected: naive.tcr.to_string(),
            found: report.antigen.to_string(),
        });
    }
    naive.a_ctl += report.costim;
    naive.a_th1 += report.il12;
    naive.a_th2 += report.il4;
    Ok(())
}

/// `min(cap, ceil(gain * (activation - threshold)))`, at least 1.
///
/// Only meaningful when `activation > threshold`.
pub fn clone_count(activation: f64, threshold: f64, params: &DifferentiationParams) -> u32 {
    let raw = (params.clone_gain * (activation - threshold)).ceil();
    if raw >= f64::from(params.clone_cap) {
        params.clone_cap
    } else {
        (raw as u32).max(1)
    }
}

/// Differentiates a naive cell once its maturation window has elapsed.
///
/// Emits one local effector per activation value strictly above its
/// threshold. The boolean is `true` when the naive cell was consumed.
pub fn differentiate(
    naive: &NaiveTCell,
    params: &DifferentiationParams,
    step: Step,
) -> (Vec<EffectorTCell>, bool) {
    if step.saturating_sub(naive.created_at) < params.maturation_window {
        return (Vec::new(), false);
    }
    let effectors: Vec<_> = CellType::ALL
        .into_iter()
        .filter_map(|cell_type| {
            let activation = naive.activation(cell_type);
            let threshold = naive.thresholds.get(cell_type);
            (activation > threshold).then(|| {
                EffectorTCell::local(
                    naive.tcr.clone(),
                    cell_type,
                    clone_count(activation, threshold, params),
                    step,
                )
            })
        })
        .collect();
    let consumed = !effectors.is_empty();
    (effectors, consumed)
}

/// Folds a freshly differentiated effector into the host's local set.
///
/// A host keeps one local effector per (antigen, type); a repeat
/// differentiation adds its clones to the existing entry, capped.
pub fn merge_effector(effectors: &mut Vec<EffectorTCell>, new: EffectorTCell, clone_cap: u32) {
    match effectors.iter_mut().find(|e| e.key() == new.key()) {
        Some(existing) => {
            existing.clones = existing.clones.saturating_add(new.clones).min(clone_cap)
        }
        None => effectors.push(new),
    }
}

/// Decrements unreinforced effectors by `decay_per_step`, dropping those that
/// reach zero. `reinforced` holds the antigens reported this step.
pub fn decay_effectors(
    effectors: &mut Vec<EffectorTCell>,
    reinforced: &BTreeSet<Antigen>,
    params: &DifferentiationParams,
) {
    for effector in effectors.iter_mut() {
        if !reinforced.contains(&effector.antigen) {
            effector.clones = effector.clones.saturating_sub(params.decay_per_step);
        }
    }
    effectors.retain(|e| e.clones > 0);
}

pub fn record_clone_history(effectors: &mut [EffectorTCell]) {
    for effector in effectors {
        effector.clones_hist = (effector.clones_hist.1, effector.clones);
    }
}
