//! Linear single-axis quadcopter model and its fixed-step integrator.
//!
//! The state is `(pos, vel, tilt, tilt_rate)` and the input is the commanded
//! tilt. The attitude loop (angle gain `k_p`, rate gain `k_d`) is folded into
//! the last row of the state matrix:
//!
//! ```text
//!       | 0  1      0      0  |         |    0    |
//!   A = | 0  0      g      0  |     B = |    0    |
//!       | 0  0      0      1  |         |    0    |
//!       | 0  0  -kp*kd   -kd  |         |  kp*kd  |
//! ```
//!
//! The measured output is the velocity.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tilt magnitude above which the small-angle linearisation is no longer trusted.
pub const SMALL_ANGLE_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    /// Angle-loop gain (1/s).
    pub k_p: f64,
    /// Rate-loop gain (1/s).
    pub k_d: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
}

impl PlantParams {
    pub fn new(k_p: f64, k_d: f64, g: f64) -> Result<Self> {
        let plant = Self { k_p, k_d, g };
        plant.validate()?;
        Ok(plant)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_p", self.k_p), ("k_d", self.k_d), ("g", self.g)] {
            if !v.is_finite() {
                return Err(Error::NonFinite("plant parameters"));
            }
            if v <= 0.0 {
                return Err(Error::Config(format!("plant.{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Product `k_p * k_d`, the input gain of the attitude loop.
    pub fn loop_gain(&self) -> f64 {
        self.k_p * self.k_d
    }

    /// State matrix in `(pos, vel, tilt, tilt_rate)` ordering.
    pub fn state_matrix(&self) -> [[f64; 4]; 4] {
        let kpkd = self.loop_gain();
        [
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, self.g, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -kpkd, -self.k_d],
        ]
    }

    pub fn input_matrix(&self) -> [f64; 4] {
        [0.0, 0.0, 0.0, self.loop_gain()]
    }
}

impl Default for PlantParams {
    fn default() -> Self {
        Self { k_p: 6.0, k_d: 25.0, g: 9.8 }
    }
}

/// State of one agent along the horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    /// Position (m).
    pub pos: f64,
    /// Velocity (m/s).
    pub vel: f64,
    /// Tilt from vertical (rad).
    pub tilt: f64,
    /// Tilt rate (rad/s).
    pub tilt_rate: f64,
}

impl AgentState {
    pub const fn new(pos: f64, vel: f64, tilt: f64, tilt_rate: f64) -> Self {
        Self { pos, vel, tilt, tilt_rate }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.pos, self.vel, self.tilt, self.tilt_rate]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// False once the tilt leaves the range where the linear model holds.
    pub fn is_small_angle(&self) -> bool {
        self.tilt.abs() <= SMALL_ANGLE_LIMIT
    }
}

impl Add for AgentState {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.pos + rhs.pos,
            self.vel + rhs.vel,
            self.tilt + rhs.tilt,
            self.tilt_rate + rhs.tilt_rate,
        )
    }
}

impl Sub for AgentState {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.pos - rhs.pos,
            self.vel - rhs.vel,
            self.tilt - rhs.tilt,
            self.tilt_rate - rhs.tilt_rate,
        )
    }
}

impl Mul<f64> for AgentState {
    type Output = Self;

    fn mul(self, k: f64) -> Self {
        Self::new(self.pos * k, self.vel * k, self.tilt * k, self.tilt_rate * k)
    }
}

/// Time derivative of `state` under commanded tilt `u`.
///
/// The returned value is packed into an [`AgentState`] with each field
/// holding the rate of change of the matching state component.
pub fn derivative(state: AgentState, u: f64, plant: &PlantParams) -> Result<AgentState> {
    if !state.is_finite() || !u.is_finite() {
        return Err(Error::NonFinite("plant derivative input"));
    }
    Ok(derivative_unchecked(state, u, plant))
}

#[inline]
fn derivative_unchecked(s: AgentState, u: f64, plant: &PlantParams) -> AgentState {
    let kpkd = plant.loop_gain();
    AgentState::new(
        s.vel,
        plant.g * s.tilt,
        s.tilt_rate,
        -kpkd * s.tilt - plant.k_d * s.tilt_rate + kpkd * u,
    )
}

/// One classical Runge-Kutta step with `u_held` constant over the step.
pub fn rk4_step(state: AgentState, u_held: f64, dt: f64, plant: &PlantParams) -> Result<AgentState> {
    if dt.is_nan() || dt <= 0.0 || !dt.is_finite() {
        return Err(Error::Config(format!("integration step must be > 0, got {dt}")));
    }
    if !state.is_finite() || !u_held.is_finite() {
        return Err(Error::NonFinite("rk4 input"));
    }
    let f = |s| derivative_unchecked(s, u_held, plant);
    let k1 = f(state);
    let k2 = f(state + k1 * (0.5 * dt));
    let k3 = f(state + k2 * (0.5 * dt));
    let k4 = f(state + k3 * dt);
    Ok(state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}
