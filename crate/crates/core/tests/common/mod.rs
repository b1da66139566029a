//! Shared generators and invariant checks for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use cardinal::config::{load_config, InitialInfection};
use cardinal::epidemic::{BenignProfile, InfectionState, ScanMode, WormProfile};
use cardinal::lymph_node::{DifferentiationParams, EffectorTCell};
use cardinal::netsim::{build_world, Host, TopologySpec};
use cardinal::peer_interaction::InteractionParams;
use cardinal::periphery::AssessmentParams;
use cardinal::{Antigen, CellType, EvalMode, RunConfig};
use proptest::prelude::*;

pub fn scenario(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn antigen(s: &str) -> Antigen {
    Antigen::new(s).unwrap()
}

fn topology(hosts: u32) -> BoxedStrategy<TopologySpec> {
    let complete = Just(TopologySpec::Complete { hosts }).boxed();
    let er = (0.0..=f64::from(hosts - 1))
        .prop_map(move |mean_degree| TopologySpec::ErdosRenyi { hosts, mean_degree })
        .boxed();
    let edges = prop::collection::vec((0..hosts, 0..hosts), 0..=20)
        .prop_map(move |pairs| TopologySpec::EdgeList {
            hosts,
            edges: pairs
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| [a, b])
                .collect(),
        })
        .boxed();
    if hosts >= 3 {
        let ring = (1..=(hosts - 1) / 2)
            .prop_map(move |k| TopologySpec::Ring { hosts, k })
            .boxed();
        prop_oneof![complete, er, edges, ring].boxed()
    } else {
        prop_oneof![complete, er, edges].boxed()
    }
}

fn worm(index: usize) -> impl Strategy<Value = WormProfile> {
    (
        any::<bool>(),
        1u32..=3,
        0.05..=1.0f64,
        0.0..=0.3f64,
        0.0..=1.0f64,
        0.0..=0.5f64,
        1u32..=3,
    )
        .prop_map(
            move |(random, attempts, sev, jitter, base, ramp, symptoms)| WormProfile {
                antigen: antigen(&format!("W{index}")),
                scan_mode: if random {
                    ScanMode::RandomScan
                } else {
                    ScanMode::TopologyScan
                },
                attempts_per_step: attempts,
                severity_mean: sev,
                severity_jitter: jitter,
                certainty_base: base,
                certainty_ramp: ramp,
                symptoms_per_step: symptoms,
            },
        )
}

fn unit_range() -> impl Strategy<Value = [f64; 2]> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b)| [a.min(b), a.max(b)])
}

fn benign() -> impl Strategy<Value = BenignProfile> {
    (0.0..=0.5f64, unit_range(), unit_range()).prop_map(|(rate, sev, cert)| BenignProfile {
        antigen: antigen("B0"),
        event_rate: rate,
        severity_range: sev,
        certainty_range: cert,
    })
}

fn differentiation() -> impl Strategy<Value = DifferentiationParams> {
    (
        (0.5..6.0f64, 0.5..6.0f64, 0.5..6.0f64),
        1u64..=3,
        0.5..=4.0f64,
        1u32..=8,
        0.1..=1.0f64,
        1u32..=2,
    )
        .prop_map(
            |((c, t1, t2), window, gain, cap, mem, decay)| DifferentiationParams {
                theta_ctl: c,
                theta_th1: t1,
                theta_th2: t2,
                maturation_window: window,
                clone_gain: gain,
                clone_cap: cap,
                memory_factor: mem,
                decay_per_step: decay,
            },
        )
}

fn interaction() -> impl Strategy<Value = InteractionParams> {
    (
        1u32..=5,
        1u32..=3,
        0.1..=1.0f64,
        0.05..0.95f64,
        1u32..=2,
        0.1..=1.0f64,
    )
        .prop_map(
            |(q_local, q_peer, up, down, suppress, th1)| InteractionParams {
                q_local,
                q_peer,
                delta_up: up,
                delta_down: down,
                suppress_step: suppress,
                th1_fraction: th1,
            },
        )
}

/// Random small, valid configurations: at most 10 hosts, 3 antigens and 30 steps.
pub fn small_config() -> impl Strategy<Value = RunConfig> {
    (2u32..=10)
        .prop_flat_map(|hosts| {
            (
                topology(hosts),
                prop::collection::vec(any::<u8>(), 0..=2),
                prop::option::of(benign()),
                (0.1..0.9f64, 0.1..0.9f64),
                differentiation(),
                interaction(),
                prop::bool::weighted(0.85),
                prop::collection::vec((0..hosts, 0u64..5), 1..=3),
                1u64..=30,
            )
        })
        .prop_flat_map(
            |(topo, worm_tags, benign, (sev_hi, cert_hi), diff, inter, enabled, seeds, horizon)| {
                let worms: Vec<_> = (0..worm_tags.len()).map(worm).collect();
                (
                    worms,
                    Just((
                        topo, benign, sev_hi, cert_hi, diff, inter, enabled, seeds, horizon,
                    )),
                )
            },
        )
        .prop_map(
            |(worms, (topo, benign, sev_hi, cert_hi, diff, inter, enabled, seeds, horizon))| {
                let mut cfg = RunConfig::new(topo, horizon);
                cfg.assessment = AssessmentParams {
                    severity_hi: sev_hi,
                    certainty_hi: cert_hi,
                    ..AssessmentParams::default()
                };
                cfg.differentiation = diff;
                cfg.interaction = inter;
                cfg.cardinal_enabled = enabled;
                cfg.benign.extend(benign);
                if !worms.is_empty() {
                    cfg.initial_infections = seeds
                        .iter()
                        .enumerate()
                        .map(|(i, &(host, step))| InitialInfection {
                            host,
                            antigen: worms[i % worms.len()].antigen.clone(),
                            step: step.min(horizon - 1),
                        })
                        .collect();
                }
                cfg.worms = worms;
                cfg
            },
        )
}

fn state_transition_ok(before: InfectionState, after: InfectionState) -> bool {
    use InfectionState::*;
    match (before, after) {
        (Susceptible, Susceptible) | (Susceptible, Infected { age: 0 }) => true,
        (Infected { age: a }, Infected { age: b }) => b == a + 1,
        (Infected { .. }, Cured) | (Cured, Cured) => true,
        _ => false,
    }
}

fn check_host(before: &Host, after: &Host, cap: u32) -> Result<(), String> {
    let id = after.id;
    let mut keys = BTreeSet::new();
    for e in &after.effectors {
        if e.clones == 0 || e.clones > cap {
            return Err(format!(
                "{id}: effector {:?} has {} clones (cap {cap})",
                e.key(),
                e.clones
            ));
        }
        if !keys.insert(e.key()) {
            return Err(format!("{id}: duplicate effector {:?}", e.key()));
        }
    }
    for (antigen, cell) in &after.naive_pool {
        if let Some(old) = before.naive_pool.get(antigen) {
            if old.created_at == cell.created_at {
                for t in CellType::ALL {
                    if cell.activation(t) < old.activation(t) {
                        return Err(format!("{id}: {antigen} {t:?} activation fell"));
                    }
                }
            }
        }
    }
    if !before.memory.is_subset(&after.memory) {
        return Err(format!("{id}: memory registry shrank"));
    }
    if !before.posture.blocked.is_subset(&after.posture.blocked) {
        return Err(format!("{id}: blocked set shrank"));
    }
    let antigens: BTreeSet<_> = before
        .infections
        .keys()
        .chain(after.infections.keys())
        .collect();
    for a in antigens {
        let b = cardinal::epidemic::state_of(&before.infections, a);
        let n = cardinal::epidemic::state_of(&after.infections, a);
        if !state_transition_ok(b, n) {
            return Err(format!("{id}: {a} went {b:?} -> {n:?}"));
        }
    }
    Ok(())
}

/// Runs `cfg` step by step and checks every per-step invariant.
pub fn check_run(cfg: &RunConfig, seed: u64, mode: EvalMode) -> Result<(), String> {
    let mut world = build_world(cfg, seed).map_err(|e| e.to_string())?;
    world.set_mode(mode);
    let cap = cfg.differentiation.clone_cap;
    let n = cfg.host_count() as u32;
    let mut previously_sent = 0u64;
    for _ in 0..cfg.horizon {
        let before: Vec<Host> = world.hosts().to_vec();
        let report = world.step();
        let m = &report.metrics;
        let t = m.step;

        if m.messages_delivered != previously_sent {
            return Err(format!(
                "step {t}: delivered {} but {previously_sent} were sent",
                m.messages_delivered
            ));
        }
        previously_sent = m.messages_sent;
        if report.messages.len() as u64 != m.messages_sent
            || world.inflight() != report.messages.as_slice()
        {
            return Err(format!(
                "step {t}: inflight queue disagrees with messages_sent"
            ));
        }
        let mut seen = BTreeSet::new();
        for msg in &report.messages {
            if msg.sent_at != t || msg.effector.clones == 0 || msg.effector.clones > cap {
                return Err(format!("step {t}: bad message {msg:?}"));
            }
            if !world
                .topology()
                .neighbors(msg.sender)
                .contains(&msg.receiver)
            {
                return Err(format!("step {t}: message to non-neighbour {msg:?}"));
            }
            if !seen.insert((
                msg.sender,
                msg.receiver,
                msg.effector.antigen.clone(),
                msg.effector.cell_type,
            )) {
                return Err(format!("step {t}: duplicate message {msg:?}"));
            }
        }
        for c in &m.antigens {
            if c.susceptible + c.infected + c.cured != n {
                return Err(format!(
                    "step {t}: {} state counts do not sum to {n}",
                    c.antigen
                ));
            }
        }
        for tr in &report.traffic {
            let bound = tr.entries * (cap as usize).min(tr.degree);
            if tr.messages_sent > bound {
                return Err(format!(
                    "step {t}: {} sent {} > bound {bound}",
                    tr.host, tr.messages_sent
                ));
            }
        }
        for (host, action) in &report.responses {
            if cfg.benign.iter().any(|b| b.antigen == action.antigen)
                && action.kind == cardinal::responder::ResponseKind::Strong
            {
                let high = cfg.benign.iter().any(|b| {
                    b.antigen == action.antigen && b.severity_range[1] >= cfg.assessment.severity_hi
                });
                if !high {
                    return Err(format!(
                        "step {t}: {host} blocked low-severity benign antigen"
                    ));
                }
            }
        }
        for (b, a) in before.iter().zip(world.hosts()) {
            check_host(b, a, cap).map_err(|e| format!("step {t}: {e}"))?;
        }
    }
    Ok(())
}

/// Peer effectors and local effectors for the stage-4 property.
pub fn stage4_inputs() -> impl Strategy<Value = (Vec<EffectorTCell>, Vec<EffectorTCell>, u32)> {
    let eff = (0usize..3, 0usize..3, 0u32..=8).prop_map(|(a, t, c)| {
        EffectorTCell::local(antigen(["A", "B", "C"][a]), CellType::ALL[t], c, 0)
    });
    (
        prop::collection::vec(eff.clone(), 0..6),
        prop::collection::vec(eff, 0..4),
        1u32..=3,
    )
}

/// Stage 4 leaves matched peers untouched, suppresses the rest by exactly
/// `suppress_step`, and records memory only for survivors.
pub fn check_stage4(
    peers: &[EffectorTCell],
    local: &[EffectorTCell],
    suppress: u32,
) -> Result<(), String> {
    use cardinal::lymph_node::MemoryRegistry;
    use cardinal::peer_interaction::stage4_suppress;
    let params = InteractionParams {
        suppress_step: suppress,
        ..InteractionParams::default()
    };
    let mut memory = MemoryRegistry::new();
    let out = stage4_suppress(peers.to_vec(), local, &mut memory, &params);
    if out.len() != peers.len() {
        return Err("stage 4 changed the number of peer effectors".into());
    }
    let mut expected_memory = MemoryRegistry::new();
    for (p, o) in peers.iter().zip(&out) {
        if o.antigen != p.antigen || o.cell_type != p.cell_type {
            return Err("stage 4 changed an effector identity".into());
        }
        let matched = local.iter().any(|l| l.antigen == p.antigen);
        let want = if matched {
            p.clones
        } else {
            p.clones.saturating_sub(suppress)
        };
        if o.clones != want {
            return Err(format!(
                "peer {:?}: {} clones, expected {want}",
                p.key(),
                o.clones
            ));
        }
        if !matched && want > 0 {
            expected_memory.insert(p.antigen.clone());
        }
    }
    if memory != expected_memory {
        return Err(format!("memory {memory:?}, expected {expected_memory:?}"));
    }
    Ok(())
}
