//! Cooperation between a host's local effectors and the peer effectors it
//! receives from its neighbours.
//!
//! Per step a host runs four stages over its effectors:
//!
//! 1. select local effectors with at least `q_local` clones;
//! 2. from the rest, select those matched by at least `q_peer` peer
//!    messages of the same antigen and cell type;
//! 3. rescale the selected clone counts by comparing the worm growth rate
//!    (change in peer responses) with the clone growth rate;
//! 4. suppress peer effectors that have no local same-antigen effector, and
//!    remember antigens whose peer effectors survive suppression.
//!
//! Th1 effectors then boost same-antigen CTLs, and [`plan_migration`] decides
//! which effectors respond locally and which are forwarded to how many peers.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::check;
use crate::error::Result;
use crate::lymph_node::{EffectorTCell, MemoryRegistry};
use crate::types::{Antigen, CellType, HostId, Origin, Step};

/// A peer effector in transit between two hosts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeerEffectorMessage {
    pub effector: EffectorTCell,
    pub sender: HostId,
    pub receiver: HostId,
    pub sender_active_responses: u32,
    pub sent_at: Step,
}

/// Aggregate peer responses observed over the two previous steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeerResponseHistory {
    pub r_t1: u64,
    pub r_t2: u64,
}

impl PeerResponseHistory {
    pub fn shift(&mut self, observed: u64) {
        self.r_t2 = self.r_t1;
        self.r_t1 = observed;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionParams {
    pub q_local: u32,
    pub q_peer: u32,
    pub delta_up: f64,
    pub delta_down: f64,
    pub suppress_step: u32,
    pub th1_fraction: f64,
}

impl Default for InteractionParams {
    fn default() -> Self {
        InteractionParams {
            q_local: 4,
            q_peer: 2,
            delta_up: 0.5,
            delta_down: 0.25,
            suppress_step: 1,
            th1_fraction: 0.5,
        }
    }
}

impl InteractionParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        check::positive_int(path, "q_local", u64::from(self.q_local))?;
        check::positive_int(path, "q_peer", u64::from(self.q_peer))?;
        check::positive(path, "delta_up", self.delta_up)?;
        check::open_unit(path, "delta_down", self.delta_down)?;
        check::positive_int(path, "suppress_step", u64::from(self.suppress_step))?;
        check::half_open_unit(path, "th1_fraction", self.th1_fraction)?;
        Ok(())
    }
}

/// Splits effectors into (clones >= q_local, rest).
pub fn stage1_select(
    effectors: Vec<EffectorTCell>,
    q_local: u32,
) -> (Vec<EffectorTCell>, Vec<EffectorTCell>) {
    effectors.into_iter().partition(|e| e.clones >= q_local)
}

/// Number of messages carrying an effector with this antigen and type.
pub fn peer_match_count(
    messages: &[PeerEffectorMessage],
    antigen: &Antigen,
    cell_type: CellType,
) -> usize {
    messages
        .iter()
        .filter(|m| m.effector.antigen == *antigen && m.effector.cell_type == cell_type)
        .count()
}

/// Splits the stage-1 remainder into (matched by >= q_peer peers, rest).
pub fn stage2_select(
    remainder: Vec<EffectorTCell>,
    messages: &[PeerEffectorMessage],
    q_peer: u32,
) -> (Vec<EffectorTCell>, Vec<EffectorTCell>) {
    remainder
        .into_iter()
        .partition(|e| peer_match_count(messages, &e.antigen, e.cell_type) >= q_peer as usize)
}

/// (worm growth, clone growth) over the two previous steps.
pub fn estimate_growth(history: &PeerResponseHistory, effector: &EffectorTCell) -> (i64, i64) {
    let g_worm = history.r_t1 as i64 - history.r_t2 as i64;
    let g_clone = i64::from(effector.clones_hist.1) - i64::from(effector.clones_hist.0);
    (g_worm, g_clone)
}

/// Clone count after one stage-3 update.
pub fn rescale_clones(
    clones: u32,
    g_worm: i64,
    g_clone: i64,
    params: &InteractionParams,
    clone_cap: u32,
) -> u32 {
    if g_worm >= g_clone {
        let up = (f64::from(clones) * (1.0 + params.delta_up)).ceil();
        if up >= f64::from(clone_cap) {
            clone_cap
        } else {
            up as u32
        }
    } else {
        (f64::from(clones) * (1.0 - params.delta_down)).floor() as u32
    }
}

/// Rescales the selected effectors; those reaching zero are dropped.
pub fn stage3_update(
    selected: Vec<EffectorTCell>,
    history: &PeerResponseHistory,
    params: &InteractionParams,
    clone_cap: u32,
) -> Vec<EffectorTCell> {
    selected
        .into_iter()
        .filter_map(|mut e| {
            let (g_worm, g_clone) = estimate_growth(history, &e);
            e.clones = rescale_clones(e.clones, g_worm, g_clone, params, clone_cap);
            (e.clones > 0).then_some(e)
        })
        .collect()
}

/// Suppresses peer effectors lacking any local effector for their antigen.
///
/// Returns the updated peer effectors (zero-clone ones included). Antigens
/// whose unmatched peer effectors keep a positive clone count are added to
/// `memory`.
pub fn stage4_suppress(
    peers: Vec<EffectorTCell>,
    local: &[EffectorTCell],
    memory: &mut MemoryRegistry,
    params: &InteractionParams,
) -> Vec<EffectorTCell> {
    peers
        .into_iter()
        .map(|mut peer| {
            if !local.iter().any(|l| l.antigen == peer.antigen) {
                peer.clones = peer.clones.saturating_sub(params.suppress_step);
                if peer.clones > 0 {
                    memory.insert(peer.antigen.clone());
                }
            }
            peer
        })
        .collect()
}

/// Adds `floor(th1_fraction * th1.clones)` to every CTL sharing an antigen
/// with a Th1. Th1 clone counts are unchanged.
pub fn th1_boost_ctl(effectors: &mut [EffectorTCell], th1_fraction: f64, clone_cap: u32) {
    let boosts: BTreeMap<Antigen, u32> = effectors
        .iter()
        .filter(|e| e.cell_type == CellType::Th1)
        .map(|th1| {
            (
                th1.antigen.clone(),
                (th1_fraction * f64::from(th1.clones)).floor() as u32,
            )
        })
        .collect();
    for ctl in effectors
        .iter_mut()
        .filter(|e| e.cell_type == CellType::Ctl)
    {
        if let Some(&boost) = boosts.get(&ctl.antigen) {
            ctl.clones = ctl.clones.saturating_add(boost).min(clone_cap);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MigrationPlan {
    /// Local CTL and Th2 effectors that act at this host's periphery.
    pub local_responses: Vec<EffectorTCell>,
    pub outbound: Vec<PeerEffectorMessage>,
    /// Distinct (antigen, type) entries that were dispatched.
    pub dispatched_entries: usize,
}

/// Chooses local responders and dispatches peer effectors.
///
/// Peer effectors sharing an (antigen, type) key are consolidated into the
/// one with the most clones. Every local effector without a same-key peer
/// effector is copied into one. Each resulting peer effector goes to
/// `min(clones, neighbors.len())` distinct neighbours drawn uniformly.
pub fn plan_migration<R: Rng + ?Sized>(
    host: HostId,
    local: &[EffectorTCell],
    peers: Vec<EffectorTCell>,
    neighbors: &[HostId],
    step: Step,
    rng: &mut R,
) -> MigrationPlan {
    let local_responses: Vec<EffectorTCell> = local
        .iter()
        .filter(|e| e.clones > 0 && e.cell_type != CellType::Th1)
        .cloned()
        .collect();
    let active = local_responses.len() as u32;

    let mut dispatch: BTreeMap<(Antigen, CellType), EffectorTCell> = BTreeMap::new();
    for peer in peers.into_iter().filter(|p| p.clones > 0) {
        let key = (peer.antigen.clone(), peer.cell_type);
        match dispatch.get_mut(&key) {
            Some(existing) if existing.clones >= peer.clones => {}
            Some(existing) => *existing = peer,
            None => {
                dispatch.insert(key, peer);
            }
        }
    }
    for effector in local.iter().filter(|e| e.clones > 0) {
        dispatch
            .entry((effector.antigen.clone(), effector.cell_type))
            .or_insert_with(|| effector.clone());
    }

    let mut outbound = Vec::new();
    let dispatched_entries = dispatch.len();
    if !neighbors.is_empty() {
        for (_, mut effector) in dispatch {
            effector.origin = Origin::Peer(host);
            let n = (effector.clones as usize).min(neighbors.len());
            let mut picks = index::sample(rng, neighbors.len(), n).into_vec();
            picks.sort_unstable();
            for i in picks {
                outbound.push(PeerEffectorMessage {
                    effector: effector.clone(),
                    sender: host,
                    receiver: neighbors[i],
                    sender_active_responses: active,
                    sent_at: step,
                });
            }
        }
    }

    MigrationPlan {
        local_responses,
        outbound,
        dispatched_entries,
    }
}
