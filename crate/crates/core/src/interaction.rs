//! Pairwise interaction functions and the coupling state machine.
//!
//! Every force here is a commanded-tilt contribution for agent `i` produced by
//! its neighbour `j`, as a function of the corrected separation
//! `d = P*_j - P*_i`. All functions are odd in `d`, so applying `+F` to `i`
//! and `-F` to `j` is an exact action-reaction pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modal::Gains;
use crate::plant::AgentState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Saturated push-out only.
    Repulsion,
    /// Radius-gated spring centred at the coupling distance, no switching.
    Attraction,
    /// Push-out until coupled, then an ungated spring (discontinuous switch).
    Switching10,
    /// Piecewise approach function that coincides with the spring below `d_t`.
    Switching11,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::Repulsion, Variant::Attraction, Variant::Switching10, Variant::Switching11];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Repulsion => "repulsion",
            Variant::Attraction => "attraction",
            Variant::Switching10 => "v10",
            Variant::Switching11 => "v11",
        }
    }

    pub fn switches(self) -> bool {
        matches!(self, Variant::Switching10 | Variant::Switching11)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "repulsion" | "repulsion_8" => Ok(Variant::Repulsion),
            "attraction" | "attraction_fig3" => Ok(Variant::Attraction),
            "v10" | "switching_10" => Ok(Variant::Switching10),
            "v11" | "switching_11" => Ok(Variant::Switching11),
            other => Err(Error::Config(format!(
                "unknown variant `{other}` (expected repulsion, attraction, v10 or v11)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    /// Commanded-tilt saturation (rad).
    pub c_max: f64,
    /// Required coupling distance (m).
    pub d_t: f64,
    /// Half-width of the switching neighbourhood around `d_t` (m).
    pub eps: f64,
    pub variant: Variant,
    /// Stiffness (rad/m).
    pub k1: f64,
}

impl InteractionParams {
    pub fn validate(&self) -> Result<()> {
        if ![self.c_max, self.d_t, self.eps, self.k1].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("interaction parameters"));
        }
        if self.c_max <= 0.0 {
            return Err(Error::Config(format!("interaction.c_max must be > 0, got {}", self.c_max)));
        }
        if self.eps <= 0.0 {
            return Err(Error::Config(format!("interaction.eps must be > 0, got {}", self.eps)));
        }
        if self.d_t <= 0.0 {
            return Err(Error::Config(format!("interaction.d_t must be > 0, got {}", self.d_t)));
        }
        Ok(())
    }

    /// Checks the coupling distance against a pair's interaction radii.
    pub fn validate_pair(&self, r_sum: f64) -> Result<()> {
        self.validate()?;
        if self.d_t >= r_sum {
            return Err(Error::Config(format!(
                "interaction.d_t = {} must satisfy d_t < R_i + R_j = {r_sum}",
                self.d_t
            )));
        }
        Ok(())
    }

    /// Switch point expressed as an overlap: `c_s = d_t - (R_i + R_j)`.
    pub fn switch_point(&self, r_sum: f64) -> f64 {
        self.d_t - r_sum
    }

    pub fn with_variant(self, variant: Variant) -> Self {
        Self { variant, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    /// Corrected separation `P*_j - P*_i` (m).
    pub d: f64,
    /// `sign(d)`, with `+1` at `d = 0`.
    pub s_d: f64,
    /// Overlap `d - s_d·r_sum` (m); negative while the spheres intersect for `d > 0`.
    pub c: f64,
    pub r_sum: f64,
    /// Midpoint `(d_t + r_sum) / 2` (m).
    pub b: f64,
}

impl PairGeometry {
    pub fn overlapping(&self) -> bool {
        self.d.abs() < self.r_sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PairState {
    /// Coupling indicator.
    pub f_en: bool,
    /// An uncouple command is waiting for the separation to reach `d_t`.
    pub uncouple_pending: bool,
    /// Set on uncoupling; the pair cannot couple again until the spheres
    /// have separated (`|d| >= r_sum`).
    pub awaiting_separation: bool,
    pub coupled_at: Option<f64>,
    pub uncoupled_at: Option<f64>,
}

impl PairState {
    pub fn coupled() -> Self {
        Self { f_en: true, ..Self::default() }
    }
}

/// State feedback `K·x` expressed in position units.
pub fn corrected_position(state: &AgentState, gains: &Gains) -> Result<f64> {
    if gains.k_pos == 0.0 {
        return Err(Error::Config("k_pos = 0: corrected position is undefined".into()));
    }
    Ok(gains.feedback(state) / gains.k_pos)
}

pub fn pair_geometry(p_star_i: f64, p_star_j: f64, r_i: f64, r_j: f64, d_t: f64) -> PairGeometry {
    let d = p_star_j - p_star_i;
    let s_d = if d < 0.0 { -1.0 } else { 1.0 };
    let r_sum = r_i + r_j;
    PairGeometry { d, s_d, c: d - s_d * r_sum, r_sum, b: (d_t + r_sum) / 2.0 }
}

/// Symmetric clamp to `[-c_max, c_max]`.
pub fn saturate(u: f64, c_max: f64) -> f64 {
    // written out so that saturate(-u) == -saturate(u) bit for bit
    if u > c_max {
        c_max
    } else if u < -c_max {
        -c_max
    } else {
        u
    }
}

/// Spring toward the coupling distance, `k1·(d - s_d·d_t)`, unsaturated.
fn spring(geom: &PairGeometry, params: &InteractionParams) -> f64 {
    params.k1 * (geom.d - geom.s_d * params.d_t)
}

pub fn force_repulsion(geom: &PairGeometry, params: &InteractionParams) -> f64 {
    if !geom.overlapping() {
        return 0.0;
    }
    saturate(params.k1 * geom.c, params.c_max)
}

pub fn force_attraction(geom: &PairGeometry, params: &InteractionParams) -> f64 {
    if !geom.overlapping() {
        return 0.0;
    }
    saturate(spring(geom, params), params.c_max)
}

/// Coupled branch shared by both switching variants.
fn coupled_force(geom: &PairGeometry, params: &InteractionParams) -> f64 {
    saturate(spring(geom, params), params.c_max)
}

pub fn force_switching_v10(geom: &PairGeometry, pair: &PairState, params: &InteractionParams) -> f64 {
    if pair.f_en {
        coupled_force(geom, params)
    } else {
        force_repulsion(geom, params)
    }
}

/// Unsaturated approach function of the improved switching law.
///
/// Rises linearly from zero at `|d| = r_sum` to its peak at `b`, falls back to
/// zero at `d_t`, and below `d_t` equals the coupled spring.
pub fn approach_v11(geom: &PairGeometry, params: &InteractionParams) -> f64 {
    let dist = geom.d.abs();
    if dist >= geom.r_sum {
        0.0
    } else if dist > geom.b {
        params.k1 * geom.c
    } else if dist >= params.d_t {
        -spring(geom, params)
    } else {
        spring(geom, params)
    }
}

pub fn force_switching_v11(geom: &PairGeometry, pair: &PairState, params: &InteractionParams) -> f64 {
    if pair.f_en {
        coupled_force(geom, params)
    } else {
        saturate(approach_v11(geom, params), params.c_max)
    }
}

/// Dispatches on `params.variant`.
pub fn force(geom: &PairGeometry, pair: &PairState, params: &InteractionParams) -> f64 {
    match params.variant {
        Variant::Repulsion => force_repulsion(geom, params),
        Variant::Attraction => force_attraction(geom, params),
        Variant::Switching10 => force_switching_v10(geom, pair, params),
        Variant::Switching11 => force_switching_v11(geom, pair, params),
    }
}

/// Coupling transitions for one pair at time `t`.
///
/// Couples on the first entry of `|d|` into the `eps`-neighbourhood of `d_t`
/// while the spheres overlap. Uncouples only when a command is latched and
/// the separation is back inside that neighbourhood; after that the pair is
/// re-armed only once the spheres no longer overlap.
pub fn update_pair(
    pair: &PairState,
    geom: &PairGeometry,
    params: &InteractionParams,
    uncouple_cmd_active: bool,
    t: f64,
) -> PairState {
    let mut next = *pair;
    if !params.variant.switches() {
        return next;
    }
    let near_target = (geom.d.abs() - params.d_t).abs() < params.eps;
    if !pair.f_en {
        if pair.awaiting_separation {
            if !geom.overlapping() {
                next.awaiting_separation = false;
            }
        } else if near_target && geom.overlapping() {
            next.f_en = true;
            next.coupled_at = Some(t);
        }
    } else if uncouple_cmd_active && near_target {
        next.f_en = false;
        next.uncouple_pending = false;
        next.awaiting_separation = true;
        next.uncoupled_at = Some(t);
    }
    next
}
