use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::epidemic::{self, InfectionMap, InfectionState, TargetView};
use crate::error::{Error, Result};
use crate::lymph_node::{self, EffectorTCell, MemoryRegistry, NaivePool};
use crate::metrics::{AntigenCounts, CloneTotals, MetricsSeries, StepMetrics};
use crate::netsim::rng::{rng_substream, Purpose};
use crate::netsim::topology::Topology;
use crate::peer_interaction::{self, PeerEffectorMessage, PeerResponseHistory};
use crate::periphery::{self, Tissue};
use crate::responder::{self, DefensePosture, ResponseAction, ResponseKind};
use crate::types::{Antigen, HostId, Step};

/// How hosts are evaluated inside a step. Both modes produce identical
/// results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EvalMode {
    #[default]
    Sequential,
    Parallel,
}

/// Everything one monitoring host owns.
#[derive(Debug, Clone, Default)]
pub struct Host {
    pub id: HostId,
    pub tissue: Tissue,
    pub naive_pool: NaivePool,
    pub memory: MemoryRegistry,
    /// Local effectors, at most one per (antigen, type), sorted by key.
    pub effectors: Vec<EffectorTCell>,
    pub posture: DefensePosture,
    pub infections: InfectionMap,
    pub history: PeerResponseHistory,
    inbox: Vec<PeerEffectorMessage>,
}

/// Outbound traffic of one host in one step, for the self-DoS bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HostTraffic {
    pub host: HostId,
    pub messages_sent: usize,
    /// Distinct (antigen, type) effector entries the host dispatched.
    pub entries: usize,
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub metrics: StepMetrics,
    /// Messages sent this step (delivered next step).
    pub messages: Vec<PeerEffectorMessage>,
    pub responses: Vec<(HostId, ResponseAction)>,
    /// Infections that activated at the start of this step.
    pub new_infections: Vec<(HostId, Antigen)>,
    pub traffic: Vec<HostTraffic>,
}

/// Shared read-only inputs of the per-host phase.
struct StepContext<'a> {
    config: &'a RunConfig,
    topology: &'a Topology,
    seed: u64,
    step: Step,
}

#[derive(Default)]
struct HostOutcome {
    outbound: Vec<PeerEffectorMessage>,
    responses: Vec<ResponseAction>,
    symptom_events: u64,
    dispatched_entries: usize,
}

pub struct World {
    config: RunConfig,
    seed: u64,
    step: Step,
    topology: Topology,
    hosts: Vec<Host>,
    inflight: Vec<PeerEffectorMessage>,
    /// (host, worm index) pairs activating at the start of the next step.
    pending: BTreeSet<(HostId, usize)>,
    scheduled: BTreeMap<Step, Vec<(HostId, usize)>>,
    warnings: Vec<String>,
    mode: EvalMode,
}

/// Builds a world for `config`; the topology is drawn from `seed`.
pub fn build_world(config: &RunConfig, seed: u64) -> Result<World> {
    config.validate()?;
    let mut rng = rng_substream(seed, HostId(0), Purpose::Topology, 0);
    let topology = Topology::generate(&config.topology, &mut rng);

    let mut warnings = Vec::new();
    let isolated = topology.isolated_hosts();
    if !isolated.is_empty() {
        let msg = format!("{} isolated host(s): {:?}", isolated.len(), isolated);
        log::warn!("{msg}");
        warnings.push(msg);
    } else if !topology.is_connected() {
        let msg = "topology is disconnected".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let mut hosts: Vec<Host> = (0..topology.host_count() as u32)
        .map(|i| Host {
            id: HostId(i),
            ..Host::default()
        })
        .collect();
    for patch in &config.patched_hosts {
        hosts[patch.host as usize]
            .posture
            .blocked
            .insert(patch.antigen.clone());
    }

    let mut scheduled: BTreeMap<Step, Vec<(HostId, usize)>> = BTreeMap::new();
    for inf in &config.initial_infections {
        let worm = config
            .worms
            .iter()
            .position(|w| w.antigen == inf.antigen)
            .expect("validated");
        scheduled
            .entry(inf.step)
            .or_default()
            .push((HostId(inf.host), worm));
    }

    Ok(World {
        config: config.clone(),
        seed,
        step: 0,
        topology,
        hosts,
        inflight: Vec::new(),
        pending: BTreeSet::new(),
        scheduled,
        warnings,
        mode: EvalMode::Sequential,
    })
}

impl World {
    pub fn set_mode(&mut self, mode: EvalMode) {
        self.mode = mode;
    }

    pub fn step_index(&self) -> Step {
        self.step
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn hosts(&self) -> &[Host] {
        &self.hosts
    }

    pub fn inflight(&self) -> &[PeerEffectorMessage] {
        &self.inflight
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Advances the world by one step.
    pub fn step(&mut self) -> StepReport {
        let t = self.step;

        // Deliver messages sent last step.
        let messages_delivered = self.inflight.len() as u64;
        for msg in std::mem::take(&mut self.inflight) {
            self.hosts[msg.receiver.index()].inbox.push(msg);
        }

        let new_infections = self.activate_infections(t);
        self.pending = self.propagate(t);

        let ctx = StepContext {
            config: &self.config,
            topology: &self.topology,
            seed: self.seed,
            step: t,
        };
        let outcomes: Vec<HostOutcome> = match self.mode {
            EvalMode::Sequential => self.hosts.iter_mut().map(|h| h.advance(&ctx)).collect(),
            EvalMode::Parallel => self.hosts.par_iter_mut().map(|h| h.advance(&ctx)).collect(),
        };

        let mut responses = Vec::new();
        let mut traffic = Vec::with_capacity(outcomes.len());
        let mut symptom_events = 0;
        for (host, outcome) in self.hosts.iter().zip(outcomes) {
            traffic.push(HostTraffic {
                host: host.id,
                messages_sent: outcome.outbound.len(),
                entries: outcome.dispatched_entries,
                degree: self.topology.degree(host.id),
            });
            symptom_events += outcome.symptom_events;
            responses.extend(outcome.responses.into_iter().map(|a| (host.id, a)));
            self.inflight.extend(outcome.outbound);
        }

        let metrics = self.collect_metrics(t, &responses, messages_delivered, symptom_events);
        self.step += 1;
        StepReport {
            metrics,
            messages: self.inflight.clone(),
            responses,
            new_infections,
            traffic,
        }
    }

    fn activate_infections(&mut self, t: Step) -> Vec<(HostId, Antigen)> {
        for host in &mut self.hosts {
            epidemic::advance_ages(&mut host.infections);
        }
        let mut arrivals = std::mem::take(&mut self.pending);
        if let Some(attacks) = self.scheduled.remove(&t) {
            for (host, worm) in attacks {
                let antigen = &self.config.worms[worm].antigen;
                if !self.hosts[host.index()].posture.is_blocked(antigen) {
                    arrivals.insert((host, worm));
                }
            }
        }
        let mut activated = Vec::new();
        for (host, worm) in arrivals {
            let antigen = &self.config.worms[worm].antigen;
            if epidemic::activate(&mut self.hosts[host.index()].infections, antigen) {
                activated.push((host, antigen.clone()));
            }
        }
        activated
    }

    /// Infection attempts of every infected host against the current state.
    fn propagate(&self, t: Step) -> BTreeSet<(HostId, usize)> {
        let attempts = |host: &Host| -> Vec<(HostId, usize)> {
            let mut rng = rng_substream(self.seed, host.id, Purpose::Propagation, t);
            let mut hits = Vec::new();
            for (w, worm) in self.config.worms.iter().enumerate() {
                if !matches!(
                    host.infections.get(&worm.antigen),
                    Some(InfectionState::Infected { .. })
                ) {
                    continue;
                }
                let targets = epidemic::propagate_from(
                    worm,
                    self.topology.neighbors(host.id),
                    self.hosts.len(),
                    host.posture.multiplier(&worm.antigen),
                    &mut rng,
                    |victim| {
                        let v = &self.hosts[victim.index()];
                        TargetView {
                            susceptible: epidemic::state_of(&v.infections, &worm.antigen)
                                == InfectionState::Susceptible,
                            multiplier: v.posture.multiplier(&worm.antigen),
                        }
                    },
                );
                hits.extend(targets.into_iter().map(|h| (h, w)));
            }
            hits
        };
        match self.mode {
            EvalMode::Sequential => self.hosts.iter().flat_map(attempts).collect(),
            EvalMode::Parallel => self.hosts.par_iter().flat_map_iter(attempts).collect(),
        }
    }

    fn collect_metrics(
        &self,
        t: Step,
        responses: &[(HostId, ResponseAction)],
        messages_delivered: u64,
        symptom_events: u64,
    ) -> StepMetrics {
        let mut antigens: Vec<AntigenCounts> = self
            .config
            .antigens()
            .into_iter()
            .map(AntigenCounts::new)
            .collect();
        for counts in &mut antigens {
            for host in &self.hosts {
                match epidemic::state_of(&host.infections, &counts.antigen) {
                    InfectionState::Susceptible => counts.susceptible += 1,
                    InfectionState::Infected { .. } => counts.infected += 1,
                    InfectionState::Cured => counts.cured += 1,
                }
                if host.posture.is_blocked(&counts.antigen) {
                    counts.blocked_hosts += 1;
                }
                if host.posture.rate_limited.contains_key(&counts.antigen) {
                    counts.rate_limited_hosts += 1;
                }
            }
        }
        let mut strong = 0;
        let mut weak = 0;
        let mut false_positive_strong = 0;
        for (_, action) in responses {
            let slot = antigens.iter_mut().find(|c| c.antigen == action.antigen);
            match action.kind {
                ResponseKind::Strong => {
                    strong += 1;
                    if self.config.is_benign(&action.antigen) {
                        false_positive_strong += 1;
                    }
                    if let Some(c) = slot {
                        c.strong_responses += 1;
                    }
                }
                ResponseKind::Weak => {
                    weak += 1;
                    if let Some(c) = slot {
                        c.weak_responses += 1;
                    }
                }
            }
        }
        let mut clones = CloneTotals::default();
        for e in self.hosts.iter().flat_map(|h| &h.effectors) {
            clones.add(e.cell_type, e.clones);
        }
        StepMetrics {
            step: t,
            antigens,
            strong_responses: strong,
            weak_responses: weak,
            false_positive_strong,
            messages_sent: self.inflight.len() as u64,
            messages_delivered,
            symptom_events,
            clones,
        }
    }
}

impl Host {
    /// Emission through migration for one host (everything after propagation).
    fn advance(&mut self, ctx: &StepContext<'_>) -> HostOutcome {
        let t = ctx.step;
        let config = ctx.config;
        let mut outcome = HostOutcome::default();

        let mut rng = rng_substream(ctx.seed, self.id, Purpose::Symptoms, t);
        for worm in &config.worms {
            if let Some(InfectionState::Infected { age }) = self.infections.get(&worm.antigen) {
                self.tissue
                    .extend(epidemic::emit_symptoms(worm, *age, t, &mut rng));
            }
        }
        let mut rng = rng_substream(ctx.seed, self.id, Purpose::Benign, t);
        for profile in &config.benign {
            if let Some(event) = epidemic::emit_benign(profile, t, &mut rng) {
                self.tissue.push(event);
            }
        }
        outcome.symptom_events = self.tissue.len() as u64;

        let events = self.tissue.collect(t);
        let inbox = std::mem::take(&mut self.inbox);
        if !config.cardinal_enabled {
            return outcome;
        }

        let reports = periphery::assess_events(&events, &config.assessment)
            .expect("generated symptom events lie in [0, 1]");
        let diff = &config.differentiation;
        for report in &reports {
            let naive = lymph_node::ensure_naive(
                &mut self.naive_pool,
                &report.antigen,
                t,
                &self.memory,
                diff,
            );
            lymph_node::mature(naive, report).expect("naive cell keyed by report antigen");
        }
        let reinforced: BTreeSet<Antigen> = reports.into_iter().map(|r| r.antigen).collect();

        lymph_node::decay_effectors(&mut self.effectors, &reinforced, diff);

        let mut consumed = Vec::new();
        for (antigen, naive) in &self.naive_pool {
            let (new, used) = lymph_node::differentiate(naive, diff, t);
            for effector in new {
                lymph_node::merge_effector(&mut self.effectors, effector, diff.clone_cap);
            }
            if used {
                consumed.push(antigen.clone());
            }
        }
        for antigen in consumed {
            self.naive_pool.remove(&antigen);
        }

        // Peer interaction. Clone amplification (stages 1-3 and the Th1
        // boost) applies only to antigens with local evidence this step.
        let ip = &config.interaction;
        let observed: u64 = inbox
            .iter()
            .map(|m| u64::from(m.sender_active_responses))
            .sum();
        let (active, idle): (Vec<_>, Vec<_>) = std::mem::take(&mut self.effectors)
            .into_iter()
            .partition(|e| reinforced.contains(&e.antigen));
        let (selected, remainder) = peer_interaction::stage1_select(active, ip.q_local);
        let (matched, unselected) = peer_interaction::stage2_select(remainder, &inbox, ip.q_peer);
        let mut active = peer_interaction::stage3_update(
            [selected, matched].concat(),
            &self.history,
            ip,
            diff.clone_cap,
        );
        active.extend(unselected);
        peer_interaction::th1_boost_ctl(&mut active, ip.th1_fraction, diff.clone_cap);
        self.effectors = [active, idle].concat();
        self.effectors.sort_by(|a, b| a.key().cmp(&b.key()));

        let peers: Vec<EffectorTCell> = inbox.into_iter().map(|m| m.effector).collect();
        let peers = peer_interaction::stage4_suppress(peers, &self.effectors, &mut self.memory, ip);

        let mut rng = rng_substream(ctx.seed, self.id, Purpose::Migration, t);
        let plan = peer_interaction::plan_migration(
            self.id,
            &self.effectors,
            peers,
            ctx.topology.neighbors(self.id),
            t,
            &mut rng,
        );
        for effector in &plan.local_responses {
            let logged = responder::apply_response(
                &mut self.posture,
                &mut self.infections,
                effector,
                t,
                &config.responder,
            )
            .expect("only CTL and Th2 effectors respond");
            outcome.responses.extend(logged);
        }
        debug_assert_eq!(
            responder::count_active_responses(&self.posture, t) as usize,
            plan.local_responses.len()
        );
        outcome.outbound = plan.outbound;
        outcome.dispatched_entries = plan.dispatched_entries;

        self.history.shift(observed);
        lymph_node::record_clone_history(&mut self.effectors);
        self.effectors.retain(|e| e.clones > 0);
        outcome
    }
}

/// Runs `config.horizon` steps sequentially.
pub fn run(config: &RunConfig, seed: u64) -> Result<MetricsSeries> {
    run_with(
        config,
        seed,
        config.horizon,
        EvalMode::Sequential,
        |_, _| {},
    )
}

/// Runs `horizon` steps, handing every step report to `observe`.
pub fn run_with<F>(
    config: &RunConfig,
    seed: u64,
    horizon: u64,
    mode: EvalMode,
    mut observe: F,
) -> Result<MetricsSeries>
where
    F: FnMut(&World, &StepReport),
{
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let mut world = build_world(config, seed)?;
    world.set_mode(mode);
    let mut rows = Vec::with_capacity(horizon as usize);
    for _ in 0..horizon {
        let report = world.step();
        observe(&world, &report);
        rows.push(report.metrics);
    }
    Ok(MetricsSeries {
        host_count: world.hosts.len(),
        worm_antigens: config.worms.iter().map(|w| w.antigen.clone()).collect(),
        benign_antigens: config.benign.iter().map(|b| b.antigen.clone()).collect(),
        rows,
    })
}
