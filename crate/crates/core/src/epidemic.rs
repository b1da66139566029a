//! Worm propagation, per-antigen infection states and symptom generation.
//!
//! Each host tracks an [`InfectionState`] per antigen (absent means
//! susceptible). Infections are synchronous: a successful attempt at step `t`
//! activates at the start of step `t + 1`, so newly infected hosts neither
//! attack nor emit symptoms in the step they were hit.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::check;
use crate::error::Result;
use crate::periphery::SymptomEvent;
use crate::types::{Antigen, HostId, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanMode {
    /// Targets drawn from every host in the network.
    #[serde(rename = "random")]
    RandomScan,
    /// Targets drawn from the infected host's topology neighbours.
    #[serde(rename = "topology")]
    TopologyScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WormProfile {
    pub antigen: Antigen,
    #[serde(default = "defaults::scan_mode")]
    pub scan_mode: ScanMode,
    #[serde(default = "defaults::attempts_per_step")]
    pub attempts_per_step: u32,
    #[serde(default = "defaults::severity_mean")]
    pub severity_mean: f64,
    #[serde(default = "defaults::severity_jitter")]
    pub severity_jitter: f64,
    #[serde(default = "defaults::certainty_base")]
    pub certainty_base: f64,
    #[serde(default = "defaults::certainty_ramp")]
    pub certainty_ramp: f64,
    #[serde(default = "defaults::symptoms_per_step")]
    pub symptoms_per_step: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenignProfile {
    pub antigen: Antigen,
    #[serde(default = "defaults::event_rate")]
    pub event_rate: f64,
    #[serde(default = "defaults::severity_range")]
    pub severity_range: [f64; 2],
    #[serde(default = "defaults::certainty_range")]
    pub certainty_range: [f64; 2],
}

mod defaults {
    use super::ScanMode;

    pub fn scan_mode() -> ScanMode {
        ScanMode::TopologyScan
    }
    pub fn attempts_per_step() -> u32 {
        2
    }
    pub fn severity_mean() -> f64 {
        0.8
    }
    pub fn severity_jitter() -> f64 {
        0.1
    }
    pub fn certainty_base() -> f64 {
        0.3
    }
    pub fn certainty_ramp() -> f64 {
        0.2
    }
    pub fn symptoms_per_step() -> u32 {
        2
    }
    pub fn event_rate() -> f64 {
        0.01
    }
    pub fn severity_range() -> [f64; 2] {
        [0.05, 0.45]
    }
    pub fn certainty_range() -> [f64; 2] {
        [0.0, 1.0]
    }
}

impl WormProfile {
    /// A worm with the default profile.
    pub fn new(antigen: Antigen) -> Self {
        WormProfile {
            antigen,
            scan_mode: defaults::scan_mode(),
            attempts_per_step: defaults::attempts_per_step(),
            severity_mean: defaults::severity_mean(),
            severity_jitter: defaults::severity_jitter(),
            certainty_base: defaults::certainty_base(),
            certainty_ramp: defaults::certainty_ramp(),
            symptoms_per_step: defaults::symptoms_per_step(),
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        check::positive_int(path, "attempts_per_step", u64::from(self.attempts_per_step))?;
        check::half_open_unit(path, "severity_mean", self.severity_mean)?;
        check::non_negative(path, "severity_jitter", self.severity_jitter)?;
        check::closed_unit(path, "certainty_base", self.certainty_base)?;
        check::non_negative(path, "certainty_ramp", self.certainty_ramp)?;
        check::positive_int(path, "symptoms_per_step", u64::from(self.symptoms_per_step))?;
        Ok(())
    }
}

impl BenignProfile {
    pub fn new(antigen: Antigen) -> Self {
        BenignProfile {
            antigen,
            event_rate: defaults::event_rate(),
            severity_range: defaults::severity_range(),
            certainty_range: defaults::certainty_range(),
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        check::closed_unit(path, "event_rate", self.event_rate)?;
        check::unit_range(path, "severity_range", self.severity_range)?;
        check::unit_range(path, "certainty_range", self.certainty_range)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfectionState {
    Susceptible,
    Infected { age: u64 },
    Cured,
}

/// Per-antigen infection states of one host. Missing entries are susceptible.
pub type InfectionMap = BTreeMap<Antigen, InfectionState>;

pub fn state_of(map: &InfectionMap, antigen: &Antigen) -> InfectionState {
    map.get(antigen)
        .copied()
        .unwrap_or(InfectionState::Susceptible)
}

/// Ages every current infection by one step.
pub fn advance_ages(map: &mut InfectionMap) {
    for state in map.values_mut() {
        if let InfectionState::Infected { age } = state {
            *age += 1;
        }
    }
}

/// Susceptible -> Infected(0). Returns `false` (and changes nothing) for any
/// other prior state.
pub fn activate(map: &mut InfectionMap, antigen: &Antigen) -> bool {
    match state_of(map, antigen) {
        InfectionState::Susceptible => {
            map.insert(antigen.clone(), InfectionState::Infected { age: 0 });
            true
        }
        _ => false,
    }
}

/// What an attacker needs to know about a prospective target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetView {
    pub susceptible: bool,
    /// 0 when the target blocks the antigen, its rate-limit multiplier otherwise.
    pub multiplier: f64,
}

/// One infected host's attempts for one worm in one step.
///
/// Targets are drawn with replacement; an attempt succeeds iff the target is
/// susceptible and a uniform draw falls below the product of the target's and
/// attacker's multipliers. Returns the successful targets (possibly repeated).
pub fn propagate_from<R, F>(
    worm: &WormProfile,
    neighbors: &[HostId],
    host_count: usize,
    attacker_multiplier: f64,
    rng: &mut R,
    target: F,
) -> Vec<HostId>
where
    R: Rng + ?Sized,
    F: Fn(HostId) -> TargetView,
{
    let mut hits = Vec::new();
    for _ in 0..worm.attempts_per_step {
        let victim = match worm.scan_mode {
            ScanMode::RandomScan if host_count > 0 => HostId(rng.gen_range(0..host_count as u32)),
            ScanMode::TopologyScan if !neighbors.is_empty() => {
                neighbors[rng.gen_range(0..neighbors.len())]
            }
            _ => continue,
        };
        let draw: f64 = rng.gen();
        let view = target(victim);
        if view.susceptible && draw < view.multiplier * attacker_multiplier {
            hits.push(victim);
        }
    }
    hits
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

/// Certainty grows linearly with infection age.
pub fn symptom_certainty(worm: &WormProfile, age: u64) -> f64 {
    clamp_unit(worm.certainty_base + worm.certainty_ramp * age as f64)
}

/// Symptoms of an infection of the given age.
pub fn emit_symptoms<R: Rng + ?Sized>(
    worm: &WormProfile,
    age: u64,
    step: Step,
    rng: &mut R,
) -> Vec<SymptomEvent> {
    let certainty = symptom_certainty(worm, age);
    (0..worm.symptoms_per_step)
        .map(|_| {
            let jitter = (rng.gen::<f64>() * 2.0 - 1.0) * worm.severity_jitter;
            SymptomEvent {
                antigen: worm.antigen.clone(),
                severity: clamp_unit(worm.severity_mean + jitter),
                certainty,
                emitted_at: step,
            }
        })
        .collect()
}

/// With probability `event_rate`, one benign event.
pub fn emit_benign<R: Rng + ?Sized>(
    profile: &BenignProfile,
    step: Step,
    rng: &mut R,
) -> Option<SymptomEvent> {
    let fire = rng.gen::<f64>() < profile.event_rate;
    fire.then(|| SymptomEvent {
        antigen: profile.antigen.clone(),
        severity: uniform_in(rng, profile.severity_range),
        certainty: uniform_in(rng, profile.certainty_range),
        emitted_at: step,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn antigen(s: &str) -> Antigen {
        Antigen::new(s).unwrap()
    }

    fn open(_: HostId) -> TargetView {
        TargetView {
            susceptible: true,
            multiplier: 1.0,
        }
    }

    #[test]
    fn topology_scan_hits_susceptible_neighbors() {
        let worm = WormProfile::new(antigen("W"));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let neighbors = [HostId(1), HostId(2)];
        let hits = propagate_from(&worm, &neighbors, 10, 1.0, &mut rng, open);
        assert_eq!(hits.len(), 2);
        assert!(hits.iter().all(|h| neighbors.contains(h)));
    }

    #[test]
    fn blocked_target_never_infected() {
        let mut worm = WormProfile::new(antigen("W"));
        worm.attempts_per_step = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = propagate_from(&worm, &[HostId(1)], 2, 1.0, &mut rng, |_| TargetView {
            susceptible: true,
            multiplier: 0.0,
        });
        assert!(hits.is_empty());
    }

    #[test]
    fn non_susceptible_target_never_infected() {
        let worm = WormProfile::new(antigen("W"));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = propagate_from(&worm, &[HostId(1)], 2, 1.0, &mut rng, |_| TargetView {
            susceptible: false,
            multiplier: 1.0,
        });
        assert!(hits.is_empty());
    }

    #[test]
    fn rate_limit_follows_draw() {
        // Replay the stream to recover each attempt's draw.
        let mut worm = WormProfile::new(antigen("W"));
        worm.attempts_per_step = 200;
        let limited = |_| TargetView {
            susceptible: true,
            multiplier: 0.5,
        };
        let hits = propagate_from(
            &worm,
            &[HostId(1)],
            2,
            1.0,
            &mut ChaCha8Rng::seed_from_u64(8),
            limited,
        );

        let mut replay = ChaCha8Rng::seed_from_u64(8);
        let mut expected = 0;
        for _ in 0..worm.attempts_per_step {
            let _target: usize = replay.gen_range(0..1);
            let draw: f64 = replay.gen();
            if draw < 0.5 {
                expected += 1;
            }
        }
        assert_eq!(hits.len(), expected);
        assert!(expected > 60 && expected < 140);
    }

    #[test]
    fn random_scan_can_leave_neighbourhood() {
        let mut worm = WormProfile::new(antigen("W"));
        worm.scan_mode = ScanMode::RandomScan;
        worm.attempts_per_step = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hits = propagate_from(&worm, &[], 100, 1.0, &mut rng, open);
        assert_eq!(hits.len(), 50);
        assert!(hits.iter().any(|h| h.0 > 10));
    }

    #[test]
    fn certainty_ramp() {
        let worm = WormProfile::new(antigen("W"));
        assert!((symptom_certainty(&worm, 0) - 0.3).abs() < 1e-12);
        assert!((symptom_certainty(&worm, 3) - 0.9).abs() < 1e-12);
        assert_eq!(symptom_certainty(&worm, 10), 1.0);
    }

    #[test]
    fn zero_jitter_is_exact() {
        let mut worm = WormProfile::new(antigen("W"));
        worm.severity_jitter = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let events = emit_symptoms(&worm, 2, 9, &mut rng);
        assert_eq!(events.len(), 2);
        assert!(events
            .iter()
            .all(|e| e.severity == 0.8 && e.emitted_at == 9));
    }

    #[test]
    fn severity_stays_in_unit_interval() {
        let mut worm = WormProfile::new(antigen("W"));
        worm.severity_mean = 0.95;
        worm.severity_jitter = 0.5;
        worm.symptoms_per_step = 500;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let events = emit_symptoms(&worm, 0, 0, &mut rng);
        assert!(events.iter().all(|e| (0.0..=1.0).contains(&e.severity)));
        assert!(events.iter().any(|e| e.severity == 1.0));
    }

    #[test]
    fn benign_rate_zero_and_degenerate_range() {
        let mut p = BenignProfile::new(antigen("B"));
        p.event_rate = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|s| emit_benign(&p, s, &mut rng).is_none()));

        p.event_rate = 1.0;
        p.severity_range = [0.1, 0.1];
        for s in 0..100 {
            let e = emit_benign(&p, s, &mut rng).unwrap();
            assert_eq!(e.severity, 0.1);
            assert_eq!(e.emitted_at, s);
        }
    }

    #[test]
    fn state_machine() {
        let a = antigen("W");
        let mut map = InfectionMap::new();
        assert_eq!(state_of(&map, &a), InfectionState::Susceptible);
        assert!(activate(&mut map, &a));
        assert!(!activate(&mut map, &a));
        advance_ages(&mut map);
        advance_ages(&mut map);
        assert_eq!(state_of(&map, &a), InfectionState::Infected { age: 2 });
        map.insert(a.clone(), InfectionState::Cured);
        assert!(!activate(&mut map, &a));
        advance_ages(&mut map);
        assert_eq!(state_of(&map, &a), InfectionState::Cured);
    }
}
