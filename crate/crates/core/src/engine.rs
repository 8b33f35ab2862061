//! Closed-loop multi-agent simulation.
//!
//! Per step, in this order: corrected positions, pair geometry, coupling
//! updates, one force evaluation per unordered pair (`+F` to the first agent,
//! `-F` to the second), per-agent saturation of the summed command, and one
//! RK4 step per agent with that command held.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::{
    corrected_position, force, force_repulsion, pair_geometry, saturate, update_pair,
    InteractionParams, PairGeometry, PairState, Variant,
};
use crate::modal::Gains;
use crate::plant::{rk4_step, AgentState, PlantParams};
use crate::scenario::Scenario;

/// Length of the averaging window that ends at first contact (s).
pub const PRE_CONTACT_WINDOW: f64 = 0.5;
/// Length of the settled window used for the post-interaction RMS (s).
pub const SETTLED_WINDOW: f64 = 1.0;
/// Tilt magnitude below which an agent counts as settled (rad).
pub const SETTLED_TILT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Uncouple,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Uncouple => "uncouple",
        }
    }
}

/// A scripted operator command addressed to one declared edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub t: f64,
    pub kind: CommandKind,
    pub edge: usize,
}

/// A declared formation edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub params: InteractionParams,
    pub state: PairState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Coupled,
    Uncoupled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub edge: usize,
    pub kind: EventKind,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    /// Current time (s), always `steps * dt`.
    pub t: f64,
    pub steps: u64,
    pub agents: Vec<AgentState>,
    /// Interaction radius per agent (m).
    pub radii: Vec<f64>,
    pub edges: Vec<Edge>,
    pub gains: Gains,
    pub plant: PlantParams,
    pub dt: f64,
    /// Saturation and stiffness used for undeclared couples (push-out only)
    /// and for the per-agent clamp.
    pub avoidance: InteractionParams,
    declared: HashSet<(usize, usize)>,
}

/// Everything computed from a world snapshot before integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub p_star: Vec<f64>,
    pub edge_geometry: Vec<PairGeometry>,
    pub edge_states: Vec<PairState>,
    /// Saturated per-agent commanded tilt.
    pub commands: Vec<f64>,
    pub events: Vec<Event>,
}

impl World {
    pub fn new(
        agents: Vec<AgentState>,
        radii: Vec<f64>,
        edges: Vec<Edge>,
        gains: Gains,
        plant: PlantParams,
        dt: f64,
        avoidance: InteractionParams,
    ) -> Result<Self> {
        if dt.is_nan() || dt <= 0.0 || !dt.is_finite() {
            return Err(Error::Config(format!("sim.dt must be > 0, got {dt}")));
        }
        if agents.len() != radii.len() {
            return Err(Error::Config("one radius per agent is required".into()));
        }
        if let Some(k) = agents.iter().position(|a| !a.is_finite()) {
            return Err(Error::Config(format!("agent[{k}] has a non-finite initial state")));
        }
        if let Some(k) = radii.iter().position(|r| r.is_nan() || *r <= 0.0 || !r.is_finite()) {
            return Err(Error::Config(format!("agent[{k}].radius must be > 0")));
        }
        plant.validate()?;
        if !gains.is_finite() || gains.k_pos == 0.0 {
            return Err(Error::Config("gains must be finite with k_pos != 0".into()));
        }
        avoidance.validate()?;
        let mut declared = HashSet::new();
        for (k, e) in edges.iter().enumerate() {
            if e.a >= agents.len() || e.b >= agents.len() || e.a == e.b {
                return Err(Error::Config(format!(
                    "edge[{k}] must join two distinct existing agents, got ({}, {})",
                    e.a, e.b
                )));
            }
            if !declared.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(Error::Config(format!("edge[{k}] duplicates an earlier edge")));
            }
            e.params.validate_pair(radii[e.a] + radii[e.b])?;
        }
        Ok(Self { t: 0.0, steps: 0, agents, radii, edges, gains, plant, dt, avoidance, declared })
    }

    pub fn is_declared(&self, i: usize, j: usize) -> bool {
        self.declared.contains(&(i.min(j), i.max(j)))
    }

    /// Latches an uncouple command on `edge`. Ignored unless the edge is coupled.
    pub fn latch_uncouple(&mut self, edge: usize) {
        if let Some(e) = self.edges.get_mut(edge) {
            if e.state.f_en {
                e.state.uncouple_pending = true;
            }
        }
    }

    /// Computes commands and pending coupling transitions without mutating the world.
    pub fn evaluate(&self) -> Result<Evaluation> {
        let p_star = self
            .agents
            .iter()
            .map(|a| corrected_position(a, &self.gains))
            .collect::<Result<Vec<_>>>()?;

        let mut edge_geometry = Vec::with_capacity(self.edges.len());
        let mut edge_states = Vec::with_capacity(self.edges.len());
        let mut events = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            let geom = pair_geometry(p_star[e.a], p_star[e.b], self.radii[e.a], self.radii[e.b], e.params.d_t);
            let next = update_pair(&e.state, &geom, &e.params, e.state.uncouple_pending, self.t);
            if next.f_en && !e.state.f_en {
                events.push(Event { edge: k, kind: EventKind::Coupled, t: self.t });
            } else if !next.f_en && e.state.f_en {
                events.push(Event { edge: k, kind: EventKind::Uncoupled, t: self.t });
            }
            edge_geometry.push(geom);
            edge_states.push(next);
        }

        let mut raw = vec![0.0; self.agents.len()];
        for (k, e) in self.edges.iter().enumerate() {
            let f = force(&edge_geometry[k], &edge_states[k], &e.params);
            raw[e.a] += f;
            raw[e.b] -= f;
        }
        let n = self.agents.len();
        for i in 0..n {
            for j in i + 1..n {
                if self.is_declared(i, j) {
                    continue;
                }
                let geom = pair_geometry(p_star[i], p_star[j], self.radii[i], self.radii[j], self.avoidance.d_t);
                if !geom.overlapping() {
                    continue;
                }
                let f = force_repulsion(&geom, &self.avoidance);
                raw[i] += f;
                raw[j] -= f;
            }
        }
        let commands = raw.into_iter().map(|u| saturate(u, self.avoidance.c_max)).collect();
        Ok(Evaluation { p_star, edge_geometry, edge_states, commands, events })
    }

    /// Commits pair-state transitions from `eval` without integrating.
    pub fn commit_pairs(&mut self, eval: &Evaluation) {
        for (e, s) in self.edges.iter_mut().zip(&eval.edge_states) {
            e.state = *s;
        }
    }

    /// Commits `eval` and advances every agent by one step.
    pub fn advance(&mut self, eval: &Evaluation) -> Result<()> {
        self.commit_pairs(eval);
        let mut next = Vec::with_capacity(self.agents.len());
        for (k, (a, &u)) in self.agents.iter().zip(&eval.commands).enumerate() {
            match rk4_step(*a, u, self.dt, &self.plant) {
                Ok(s) if s.is_finite() => next.push(s),
                _ => {
                    return Err(Error::Aborted {
                        t: self.t,
                        diagnostics: format!("agent[{k}] state {:?} under command {u}", a),
                    })
                }
            }
        }
        self.agents = next;
        self.steps += 1;
        self.t = self.steps as f64 * self.dt;
        Ok(())
    }

    /// One full step. `active_commands` lists edges whose uncouple command fires now.
    pub fn step(&mut self, active_commands: &[usize]) -> Result<Evaluation> {
        for &edge in active_commands {
            self.latch_uncouple(edge);
        }
        let eval = self.evaluate()?;
        self.advance(&eval)?;
        Ok(eval)
    }

    pub fn velocity_sum(&self) -> f64 {
        self.agents.iter().map(|a| a.vel).sum()
    }
}

/// What a trace pair channel measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Declared edge: corrected separation and its coupling indicator.
    Edge(usize),
    /// Agent couple `(i, j)`, `i < j`: physical separation `pos_j - pos_i`,
    /// and the indicator of the declared edge joining them (0 when none).
    Couple(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSample {
    pub state: AgentState,
    /// Commanded tilt held over the following step.
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub d: f64,
    pub f_en: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub agents: Vec<AgentSample>,
    pub pairs: Vec<PairSample>,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub stride: usize,
    pub channels: Vec<Channel>,
    pub rows: Vec<TraceRow>,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn agent_count(&self) -> usize {
        self.rows.first().map_or(0, |r| r.agents.len())
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.stride as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsChange {
    pub before: f64,
    pub after: f64,
    /// `|after - before| / before`
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub rms_change: std::result::Result<RmsChange, String>,
    pub coupling_events: Vec<Event>,
    pub uncoupling_events: Vec<Event>,
    /// Largest `|ΣV(t) - ΣV(0)|` over every step (m/s).
    pub velocity_sum_drift: f64,
}

impl Metrics {
    pub fn delta_rms(&self) -> Option<f64> {
        self.rms_change.as_ref().ok().map(|c| c.delta)
    }

    pub fn coupled(&self) -> bool {
        !self.coupling_events.is_empty()
    }
}

pub fn rms_velocity(velocities: &[f64]) -> Result<f64> {
    if velocities.is_empty() {
        return Err(Error::Domain("rms of an empty velocity set".into()));
    }
    let mean_sq = velocities.iter().map(|v| v * v).sum::<f64>() / velocities.len() as f64;
    Ok(mean_sq.sqrt())
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Relative RMS-velocity change across the interaction.
///
/// `before` averages the last [`PRE_CONTACT_WINDOW`] seconds before the first
/// non-zero command. `after` averages the first [`SETTLED_WINDOW`]-long stretch,
/// after the last non-zero command, where all commands are zero and all tilts
/// are below [`SETTLED_TILT`]. A trace without any interaction yields zero.
pub fn delta_rms(trace: &Trace) -> std::result::Result<RmsChange, String> {
    let rows = &trace.rows;
    if rows.is_empty() {
        return Err("empty trace".into());
    }
    let active = |r: &TraceRow| r.agents.iter().any(|a| a.u != 0.0);
    let Some(first) = rows.iter().position(active) else {
        let m = mean(rows.iter().map(|r| r.rms)).unwrap_or(0.0);
        return Ok(RmsChange { before: m, after: m, delta: 0.0 });
    };
    if first == 0 {
        return Err("agents interact from t = 0; no pre-contact window".into());
    }
    let t_contact = rows[first].t;
    let before = mean(
        rows[..first]
            .iter()
            .filter(|r| r.t >= t_contact - PRE_CONTACT_WINDOW - 1e-9)
            .map(|r| r.rms),
    )
    .ok_or("no pre-contact samples")?;

    let last = rows.iter().rposition(active).unwrap_or(first);
    let settled = |r: &TraceRow| {
        r.agents.iter().all(|a| a.u == 0.0 && a.state.tilt.abs() < SETTLED_TILT)
    };
    let mut start = None;
    let mut window = None;
    for (k, r) in rows.iter().enumerate().skip(last + 1) {
        if !settled(r) {
            start = None;
            continue;
        }
        let s = *start.get_or_insert(k);
        if r.t - rows[s].t >= SETTLED_WINDOW - 1e-9 {
            window = Some((s, k));
            break;
        }
    }
    let (s, e) = window.ok_or_else(|| {
        format!("no settled {SETTLED_WINDOW} s window after the last interaction")
    })?;
    let after = mean(rows[s..=e].iter().map(|r| r.rms)).ok_or("empty settled window")?;
    if before <= 0.0 {
        return Err("pre-contact RMS velocity is zero".into());
    }
    Ok(RmsChange { before, after, delta: (after - before).abs() / before })
}

/// Builds the initial world of a validated scenario.
pub fn world_from_scenario(scenario: &Scenario) -> Result<World> {
    let gains = scenario.gains()?;
    let params = scenario.interaction_params(&gains);
    let edges = scenario
        .edges
        .iter()
        .map(|&(a, b)| Edge { a, b, params, state: PairState::default() })
        .collect();
    World::new(
        scenario.agents.iter().map(|a| a.state).collect(),
        scenario.agents.iter().map(|a| a.radius).collect(),
        edges,
        gains,
        scenario.plant,
        scenario.dt,
        params.with_variant(Variant::Repulsion),
    )
}

fn channels_for(world: &World) -> Vec<Channel> {
    let n = world.agents.len();
    let mut channels: Vec<Channel> = (0..world.edges.len()).map(Channel::Edge).collect();
    for i in 0..n {
        for j in i + 1..n {
            channels.push(Channel::Couple(i, j));
        }
    }
    channels
}

fn sample(world: &World, eval: &Evaluation, channels: &[Channel]) -> Result<TraceRow> {
    let agents = world
        .agents
        .iter()
        .zip(&eval.commands)
        .map(|(s, &u)| AgentSample { state: *s, u })
        .collect();
    let pairs = channels
        .iter()
        .map(|ch| match *ch {
            Channel::Edge(k) => PairSample { d: eval.edge_geometry[k].d, f_en: eval.edge_states[k].f_en },
            Channel::Couple(i, j) => {
                let f_en = world
                    .edges
                    .iter()
                    .zip(&eval.edge_states)
                    .any(|(e, s)| s.f_en && (e.a.min(e.b), e.a.max(e.b)) == (i, j));
                PairSample { d: world.agents[j].pos - world.agents[i].pos, f_en }
            }
        })
        .collect();
    let vels: Vec<f64> = world.agents.iter().map(|a| a.vel).collect();
    Ok(TraceRow { t: world.t, agents, pairs, rms: rms_velocity(&vels)? })
}

/// Runs a scenario from `t = 0` to `t_end`.
pub fn run(scenario: &Scenario) -> Result<(Trace, Metrics)> {
    scenario.validate()?;
    let mut world = world_from_scenario(scenario)?;
    let channels = channels_for(&world);
    let n_steps = scenario.step_count();
    let stride = scenario.stride;

    let mut commands: Vec<Command> = scenario.commands.clone();
    commands.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut next_cmd = 0;

    let v0 = world.velocity_sum();
    let mut drift: f64 = 0.0;
    let mut rows = Vec::with_capacity(n_steps as usize / stride + 1);
    let mut events = Vec::new();

    for k in 0..=n_steps {
        // commands at or before the current time latch before evaluation
        while next_cmd < commands.len() && commands[next_cmd].t <= world.t + 1e-9 * scenario.dt {
            match commands[next_cmd].kind {
                CommandKind::Uncouple => world.latch_uncouple(commands[next_cmd].edge),
            }
            next_cmd += 1;
        }
        let eval = world.evaluate()?;
        events.extend_from_slice(&eval.events);
        if k % stride as u64 == 0 {
            rows.push(sample(&world, &eval, &channels)?);
        }
        drift = drift.max((world.velocity_sum() - v0).abs());
        if k == n_steps {
            world.commit_pairs(&eval);
            break;
        }
        world.advance(&eval)?;
    }

    let trace = Trace { dt: scenario.dt, stride, channels, rows, events: events.clone() };
    let metrics = Metrics {
        rms_change: delta_rms(&trace),
        coupling_events: events.iter().filter(|e| e.kind == EventKind::Coupled).copied().collect(),
        uncoupling_events: events.iter().filter(|e| e.kind == EventKind::Uncoupled).copied().collect(),
        velocity_sum_drift: drift,
    };
    Ok((trace, metrics))
}
