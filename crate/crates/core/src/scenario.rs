//! Scenario files.
//!
//! A scenario is a TOML document with a fixed schema:
//!
//! ```toml
//! [plant]        # kp, kd, g                      (required)
//! [poles]        # rl, iml, imr                   (this, or [gains])
//! [gains]        # k_pos, k_vel, k_tilt, k_rate   (explicit feedback)
//! [sim]          # dt = 0.001, t_end = 40, stride = 10
//! [interaction]  # variant, c_max, d_t, eps (required), k1 (defaults to k_pos)
//! [[agent]]      # pos, vel, radius (required), tilt = 0, rate = 0
//! [[edge]]       # a, b
//! [[command]]    # t, kind = "uncouple", edge
//! ```
//!
//! Unknown keys are rejected. Every rule violation names the offending key.

use serde::{Deserialize, Serialize};

use crate::engine::{Command, CommandKind};
use crate::error::{Error, Result};
use crate::interaction::{InteractionParams, Variant};
use crate::modal::{place_gains, poles_from_spec, Gains, PoleSpec};
use crate::plant::{AgentState, PlantParams};

pub const DEFAULT_DT: f64 = 0.001;
pub const DEFAULT_T_END: f64 = 40.0;
pub const DEFAULT_STRIDE: usize = 10;

/// Two agents closing head-on, uncouple command at 29 s, improved switching law.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.toml");
/// Three agents at 0/50/100 m joined by two edges.
pub const CHAIN_SCENARIO: &str = include_str!("../scenarios/chain.toml");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainSource {
    Poles(PoleSpec),
    /// Explicit `(k_pos, k_vel, k_tilt, k_rate)`; `k1` still comes from the
    /// interaction section.
    Explicit([f64; 4]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentInit {
    pub state: AgentState,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionConfig {
    pub variant: Variant,
    pub c_max: f64,
    pub d_t: f64,
    pub eps: f64,
    /// Stiffness override; `None` uses `k_pos`.
    pub k1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub plant: PlantParams,
    pub gain_source: GainSource,
    pub agents: Vec<AgentInit>,
    pub interaction: InteractionConfig,
    pub edges: Vec<(usize, usize)>,
    pub commands: Vec<Command>,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
}

// ---- file schema ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSchema {
    plant: PlantSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    poles: Option<PoleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gains: Option<GainSection>,
    #[serde(default)]
    sim: SimSection,
    interaction: InteractionSection,
    #[serde(default)]
    agent: Vec<AgentSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    edge: Vec<EdgeSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    command: Vec<CommandSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantSection {
    kp: f64,
    kd: f64,
    g: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoleSection {
    rl: f64,
    iml: f64,
    imr: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainSection {
    k_pos: f64,
    k_vel: f64,
    k_tilt: f64,
    k_rate: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_t_end")]
    t_end: f64,
    #[serde(default = "default_stride")]
    stride: i64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, t_end: DEFAULT_T_END, stride: DEFAULT_STRIDE as i64 }
    }
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_t_end() -> f64 {
    DEFAULT_T_END
}
fn default_stride() -> i64 {
    DEFAULT_STRIDE as i64
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InteractionSection {
    variant: String,
    c_max: f64,
    d_t: f64,
    eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k1: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentSection {
    pos: f64,
    vel: f64,
    #[serde(default)]
    tilt: f64,
    #[serde(default)]
    rate: f64,
    radius: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSection {
    a: i64,
    b: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandSection {
    t: f64,
    kind: String,
    edge: i64,
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::key(key, "must be a finite number"))
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if finite(key, v)? > 0.0 {
        Ok(v)
    } else {
        Err(Error::key(key, format!("must be > 0, got {v}")))
    }
}

fn index(key: &str, v: i64, len: usize, what: &str) -> Result<usize> {
    usize::try_from(v)
        .ok()
        .filter(|&i| i < len)
        .ok_or_else(|| Error::key(key, format!("{v} is not a valid {what} index (have {len})")))
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: FileSchema = toml::from_str(text).map_err(|e| Error::Syntax(e.message().to_string()))?;

    let plant = PlantParams {
        k_p: positive("plant.kp", file.plant.kp)?,
        k_d: positive("plant.kd", file.plant.kd)?,
        g: positive("plant.g", file.plant.g)?,
    };

    let gain_source = match (file.poles, file.gains) {
        (Some(_), Some(_)) => return Err(Error::key("gains", "give either [poles] or [gains], not both")),
        (None, None) => return Err(Error::key("poles", "missing: give [poles] (or explicit [gains])")),
        (Some(p), None) => {
            let spec = PoleSpec {
                r_l: finite("poles.rl", p.rl)?,
                im_l: finite("poles.iml", p.iml)?,
                im_r: positive("poles.imr", p.imr)?,
            };
            if spec.r_l < 0.0 {
                return Err(Error::key("poles.rl", format!("must be >= 0, got {}", spec.r_l)));
            }
            GainSource::Poles(spec)
        }
        (None, Some(g)) => {
            let k = [
                finite("gains.k_pos", g.k_pos)?,
                finite("gains.k_vel", g.k_vel)?,
                finite("gains.k_tilt", g.k_tilt)?,
                finite("gains.k_rate", g.k_rate)?,
            ];
            if k[0] == 0.0 {
                return Err(Error::key("gains.k_pos", "must be non-zero"));
            }
            GainSource::Explicit(k)
        }
    };

    let variant: Variant = file
        .interaction
        .variant
        .parse()
        .map_err(|e: Error| Error::key("interaction.variant", e.to_string()))?;
    let interaction = InteractionConfig {
        variant,
        c_max: positive("interaction.c_max", file.interaction.c_max)?,
        d_t: positive("interaction.d_t", file.interaction.d_t)?,
        eps: positive("interaction.eps", file.interaction.eps)?,
        k1: file.interaction.k1.map(|k| positive("interaction.k1", k)).transpose()?,
    };

    if file.agent.is_empty() {
        return Err(Error::key("agent", "at least one [[agent]] is required"));
    }
    let agents = file
        .agent
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let key = |f: &str| format!("agent[{i}].{f}");
            Ok(AgentInit {
                state: AgentState::new(
                    finite(&key("pos"), a.pos)?,
                    finite(&key("vel"), a.vel)?,
                    finite(&key("tilt"), a.tilt)?,
                    finite(&key("rate"), a.rate)?,
                ),
                radius: positive(&key("radius"), a.radius)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let edges = file
        .edge
        .iter()
        .enumerate()
        .map(|(k, e)| {
            Ok((
                index(&format!("edge[{k}].a"), e.a, agents.len(), "agent")?,
                index(&format!("edge[{k}].b"), e.b, agents.len(), "agent")?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let commands = file
        .command
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let kind = match c.kind.as_str() {
                "uncouple" => CommandKind::Uncouple,
                other => {
                    return Err(Error::key(format!("command[{m}].kind"), format!("unknown command `{other}`")))
                }
            };
            Ok(Command {
                t: finite(&format!("command[{m}].t"), c.t)?,
                kind,
                edge: index(&format!("command[{m}].edge"), c.edge, edges.len(), "edge")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if file.sim.stride < 1 {
        return Err(Error::key("sim.stride", format!("must be >= 1, got {}", file.sim.stride)));
    }
    let scenario = Scenario {
        plant,
        gain_source,
        agents,
        interaction,
        edges,
        commands,
        dt: positive("sim.dt", file.sim.dt)?,
        t_end: positive("sim.t_end", file.sim.t_end)?,
        stride: file.sim.stride as usize,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Writes a scenario back to text that [`parse_scenario`] accepts.
pub fn serialize_scenario(s: &Scenario) -> String {
    let (poles, gains) = match s.gain_source {
        GainSource::Poles(p) => (Some(PoleSection { rl: p.r_l, iml: p.im_l, imr: p.im_r }), None),
        GainSource::Explicit(k) => {
            (None, Some(GainSection { k_pos: k[0], k_vel: k[1], k_tilt: k[2], k_rate: k[3] }))
        }
    };
    let file = FileSchema {
        plant: PlantSection { kp: s.plant.k_p, kd: s.plant.k_d, g: s.plant.g },
        poles,
        gains,
        sim: SimSection { dt: s.dt, t_end: s.t_end, stride: s.stride as i64 },
        interaction: InteractionSection {
            variant: s.interaction.variant.name().to_string(),
            c_max: s.interaction.c_max,
            d_t: s.interaction.d_t,
            eps: s.interaction.eps,
            k1: s.interaction.k1,
        },
        agent: s
            .agents
            .iter()
            .map(|a| AgentSection {
                pos: a.state.pos,
                vel: a.state.vel,
                tilt: a.state.tilt,
                rate: a.state.tilt_rate,
                radius: a.radius,
            })
            .collect(),
        edge: s.edges.iter().map(|&(a, b)| EdgeSection { a: a as i64, b: b as i64 }).collect(),
        command: s
            .commands
            .iter()
            .map(|c| CommandSection { t: c.t, kind: c.kind.name().to_string(), edge: c.edge as i64 })
            .collect(),
    };
    toml::to_string(&file).expect("scenario schema is always representable")
}

impl Scenario {
    /// The shipped two-agent scenario.
    pub fn two_agent_default() -> Self {
        parse_scenario(DEFAULT_SCENARIO).expect("shipped default scenario is valid")
    }

    /// The shipped three-agent chain.
    pub fn three_agent_chain() -> Self {
        parse_scenario(CHAIN_SCENARIO).expect("shipped chain scenario is valid")
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.interaction.variant = variant;
        self
    }

    /// Number of integration steps from 0 to `t_end`.
    pub fn step_count(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Resolved feedback gains, including `k1`.
    pub fn gains(&self) -> Result<Gains> {
        let gains = match self.gain_source {
            GainSource::Poles(spec) => place_gains(&self.plant, &poles_from_spec(&spec)?)?,
            GainSource::Explicit([k_pos, k_vel, k_tilt, k_rate]) => {
                Gains { k_pos, k_vel, k_tilt, k_rate, k1: k_pos }
            }
        };
        Ok(match self.interaction.k1 {
            Some(k1) => gains.with_k1(k1),
            None => gains,
        })
    }

    pub fn interaction_params(&self, gains: &Gains) -> InteractionParams {
        InteractionParams {
            c_max: self.interaction.c_max,
            d_t: self.interaction.d_t,
            eps: self.interaction.eps,
            variant: self.interaction.variant,
            k1: gains.k1,
        }
    }

    /// Re-checks every cross-field rule.
    pub fn validate(&self) -> Result<()> {
        positive("plant.kp", self.plant.k_p)?;
        positive("plant.kd", self.plant.k_d)?;
        positive("plant.g", self.plant.g)?;
        positive("sim.dt", self.dt)?;
        positive("sim.t_end", self.t_end)?;
        if self.stride == 0 {
            return Err(Error::key("sim.stride", "must be >= 1"));
        }
        let steps = self.t_end / self.dt;
        if steps < 1.0 || (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::key("sim.t_end", "must be a positive whole multiple of sim.dt"));
        }
        match self.gain_source {
            GainSource::Poles(p) => p.validate().map_err(|e| Error::key("poles", e.to_string()))?,
            GainSource::Explicit(k) => {
                if k.iter().any(|v| !v.is_finite()) || k[0] == 0.0 {
                    return Err(Error::key("gains", "must be finite with k_pos != 0"));
                }
            }
        }
        let i = &self.interaction;
        positive("interaction.c_max", i.c_max)?;
        positive("interaction.d_t", i.d_t)?;
        positive("interaction.eps", i.eps)?;
        if let Some(k1) = i.k1 {
            positive("interaction.k1", k1)?;
        }
        let gains = self.gains().map_err(|e| Error::key("plant", e.to_string()))?;
        if !gains.is_finite() {
            return Err(Error::key("poles", "synthesised gains are not finite"));
        }
        if self.agents.is_empty() {
            return Err(Error::key("agent", "at least one [[agent]] is required"));
        }
        for (k, a) in self.agents.iter().enumerate() {
            if !a.state.is_finite() {
                return Err(Error::key(format!("agent[{k}]"), "initial state must be finite"));
            }
            positive(&format!("agent[{k}].radius"), a.radius)?;
        }
        let n = self.agents.len();
        let mut seen = std::collections::HashSet::new();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::key(format!("edge[{k}]"), "references a missing agent"));
            }
            if a == b {
                return Err(Error::key(format!("edge[{k}].b"), "an edge must join two distinct agents"));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::key(format!("edge[{k}]"), "duplicates an earlier edge"));
            }
            let r_sum = self.agents[a].radius + self.agents[b].radius;
            if i.d_t >= r_sum {
                return Err(Error::key(
                    "interaction.d_t",
                    format!("coupling distance {} must satisfy d_t < R_i + R_j = {r_sum} (edge[{k}])", i.d_t),
                ));
            }
        }
        for (m, c) in self.commands.iter().enumerate() {
            // commands after t_end are allowed and simply never fire
            if !(c.t >= 0.0 && c.t.is_finite()) {
                return Err(Error::key(format!("command[{m}].t"), format!("must be finite and >= 0, got {}", c.t)));
            }
            if c.edge >= self.edges.len() {
                return Err(Error::key(format!("command[{m}].edge"), "references a missing edge"));
            }
        }
        Ok(())
    }

    /// Sets one scalar parameter by name, e.g. `c_max` or `interaction.c_max`.
    ///
    /// The scenario is not re-validated; call [`Scenario::validate`] afterwards.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let short = name.rsplit('.').next().unwrap_or(name);
        if let Some(rest) = name.strip_prefix("agent[") {
            let (idx, field) = rest
                .split_once("].")
                .ok_or_else(|| Error::key(name, "expected agent[i].field"))?;
            let i: usize = idx.parse().map_err(|_| Error::key(name, "bad agent index"))?;
            let a = self.agents.get_mut(i).ok_or_else(|| Error::key(name, "no such agent"))?;
            match field {
                "pos" => a.state.pos = value,
                "vel" => a.state.vel = value,
                "tilt" => a.state.tilt = value,
                "rate" => a.state.tilt_rate = value,
                "radius" => a.radius = value,
                _ => return Err(Error::key(name, "not a sweepable agent field")),
            }
            return Ok(());
        }
        match short {
            "c_max" => self.interaction.c_max = value,
            "d_t" => self.interaction.d_t = value,
            "eps" => self.interaction.eps = value,
            "k1" => self.interaction.k1 = Some(value),
            "kp" => self.plant.k_p = value,
            "kd" => self.plant.k_d = value,
            "g" => self.plant.g = value,
            "dt" => self.dt = value,
            "t_end" => self.t_end = value,
            "rl" | "iml" | "imr" => match &mut self.gain_source {
                GainSource::Poles(p) => match short {
                    "rl" => p.r_l = value,
                    "iml" => p.im_l = value,
                    _ => p.im_r = value,
                },
                GainSource::Explicit(_) => {
                    return Err(Error::key(name, "scenario uses explicit gains, not poles"))
                }
            },
            _ => return Err(Error::key(name, "not a sweepable parameter")),
        }
        Ok(())
    }

    /// Names accepted by [`Scenario::set_param`] besides `agent[i].{pos,vel,tilt,rate,radius}`.
    pub const SWEEPABLE: [&'static str; 12] =
        ["c_max", "d_t", "eps", "k1", "kp", "kd", "g", "rl", "iml", "imr", "dt", "t_end"];
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_scenario_values() {
        let s = Scenario::two_agent_default();
        assert_eq!(s.plant, PlantParams { k_p: 6.0, k_d: 25.0, g: 9.8 });
        assert_eq!(s.gain_source, GainSource::Poles(PoleSpec { r_l: 12.0, im_l: 0.1, im_r: 0.55 }));
        assert_eq!(s.agents.len(), 2);
        assert_eq!(s.agents[0].state, AgentState::new(50.0, -1.5, 0.0, 0.0));
        assert_eq!(s.agents[1].state, AgentState::new(0.0, 3.0, 0.0, 0.0));
        assert!(s.agents.iter().all(|a| a.radius == 20.0));
        assert_eq!(s.edges, vec![(0, 1)]);
        assert_eq!(s.commands, vec![Command { t: 29.0, kind: CommandKind::Uncouple, edge: 0 }]);
        assert_eq!((s.interaction.d_t, s.interaction.c_max, s.interaction.eps), (30.0, 0.05, 0.1));
        assert_eq!((s.dt, s.t_end, s.stride), (0.001, 40.0, 10));
        assert_eq!(s.interaction.k1, None);
        let k = s.gains().unwrap();
        assert_eq!(k.k1, k.k_pos);
    }

    const MINIMAL: &str = r#"
[plant]
kp = 6.0
kd = 25.0
g = 9.8
[poles]
rl = 12.0
iml = 0.1
imr = 0.55
[interaction]
variant = "v11"
c_max = 0.05
d_t = 30.0
eps = 0.1
[[agent]]
pos = 0.0
vel = 1.0
radius = 20.0
"#;

    #[test]
    fn optional_keys_take_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.dt, 0.001);
        assert_eq!(s.t_end, 40.0);
        assert_eq!(s.stride, 10);
        assert_eq!(s.agents[0].state.tilt, 0.0);
        assert_eq!(s.agents[0].state.tilt_rate, 0.0);
        assert!(s.edges.is_empty() && s.commands.is_empty());
    }

    fn error_text(text: &str) -> String {
        parse_scenario(text).unwrap_err().to_string()
    }

    #[test]
    fn coupling_distance_must_fit_inside_radii() {
        let text = Scenario::two_agent_default();
        let mut bad = text.clone();
        bad.interaction.d_t = 45.0;
        let msg = error_text(&serialize_scenario(&bad));
        assert!(msg.contains("interaction.d_t") && msg.contains("d_t < R_i + R_j"), "{msg}");
    }

    #[test]
    fn errors_name_the_key() {
        let msg = error_text(&MINIMAL.replace("kd = 25.0", "kd = 25.0\nkq = 1.0"));
        assert!(msg.contains("kq"), "{msg}");
        let msg = error_text(&MINIMAL.replace("g = 9.8\n", ""));
        assert!(msg.contains("`g`"), "{msg}");
        let msg = error_text(&MINIMAL.replace("c_max = 0.05", "c_max = -0.05"));
        assert!(msg.contains("interaction.c_max"), "{msg}");
        let msg = error_text(&MINIMAL.replace("radius = 20.0", "radius = 0.0"));
        assert!(msg.contains("agent[0].radius"), "{msg}");
        let msg = error_text(&MINIMAL.replace("\"v11\"", "\"v12\""));
        assert!(msg.contains("interaction.variant"), "{msg}");
        let msg = error_text(&format!("{MINIMAL}[[edge]]\na = 0\nb = 3\n"));
        assert!(msg.contains("edge[0].b"), "{msg}");
        let msg = error_text(&format!("{MINIMAL}[sim]\nstride = 0\n"));
        assert!(msg.contains("sim.stride"), "{msg}");
        let msg = error_text(&MINIMAL.replace("[poles]\nrl = 12.0\niml = 0.1\nimr = 0.55\n", ""));
        assert!(msg.contains("poles"), "{msg}");
    }

    #[test]
    fn command_times_must_be_non_negative() {
        let mut s = Scenario::two_agent_default();
        s.commands[0].t = -1.0;
        let msg = error_text(&serialize_scenario(&s));
        assert!(msg.contains("command[0].t"), "{msg}");
        s.commands[0].t = 41.0;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn explicit_gains_and_k1_override() {
        let mut s = Scenario::two_agent_default();
        s.gain_source = GainSource::Explicit([0.03, 0.005, -0.04, -0.007]);
        s.interaction.k1 = Some(0.02);
        let back = parse_scenario(&serialize_scenario(&s)).unwrap();
        assert_eq!(back, s);
        let k = back.gains().unwrap();
        assert_eq!((k.k_pos, k.k1), (0.03, 0.02));
    }

    #[test]
    fn set_param_by_name() {
        let mut s = Scenario::two_agent_default();
        s.set_param("c_max", 0.07).unwrap();
        s.set_param("interaction.d_t", 25.0).unwrap();
        s.set_param("agent[1].vel", 2.5).unwrap();
        s.set_param("imr", 0.6).unwrap();
        assert_eq!(s.interaction.c_max, 0.07);
        assert_eq!(s.interaction.d_t, 25.0);
        assert_eq!(s.agents[1].state.vel, 2.5);
        assert!(matches!(s.gain_source, GainSource::Poles(p) if p.im_r == 0.6));
        assert!(s.set_param("stride", 3.0).is_err());
        assert!(s.set_param("agent[7].pos", 3.0).is_err());
    }

    fn scenario_strategy() -> impl Strategy<Value = Scenario> {
        (
            (0.5f64..20.0, 1.0f64..50.0, 1.0f64..20.0),
            (0.0f64..30.0, 0.0f64..2.0, 0.05f64..3.0),
            prop::collection::vec((-100.0f64..100.0, -5.0f64..5.0, -0.1f64..0.1, 10.0f64..30.0), 2..5),
            (0.01f64..0.2, 0.05f64..1.0, prop::option::of(0.001f64..0.1), 0usize..4),
            (1u32..6, 1usize..20),
        )
            .prop_map(|((k_p, k_d, g), (r_l, im_l, im_r), agents, (c_max, eps, k1, v), (secs, stride))| {
                let agents: Vec<AgentInit> = agents
                    .into_iter()
                    .map(|(pos, vel, tilt, radius)| AgentInit { state: AgentState::new(pos, vel, tilt, 0.0), radius })
                    .collect();
                let min_r = agents.iter().map(|a| a.radius).fold(f64::INFINITY, f64::min);
                Scenario {
                    plant: PlantParams { k_p, k_d, g },
                    gain_source: GainSource::Poles(PoleSpec { r_l, im_l, im_r }),
                    edges: (0..agents.len() - 1).map(|i| (i, i + 1)).collect(),
                    commands: vec![Command { t: secs as f64 * 0.5, kind: CommandKind::Uncouple, edge: 0 }],
                    agents,
                    interaction: InteractionConfig {
                        variant: Variant::ALL[v],
                        c_max,
                        d_t: 1.5 * min_r,
                        eps,
                        k1,
                    },
                    dt: 0.001,
                    t_end: secs as f64,
                    stride,
                }
            })
    }

    proptest! {
        #[test]
        fn serialize_round_trip(s in scenario_strategy()) {
            prop_assert!(s.validate().is_ok());
            let back = parse_scenario(&serialize_scenario(&s)).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
