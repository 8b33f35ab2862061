//! Swarm formation coupling for linear quadcopter agents.
//!
//! Agents fly free between encounters and interact through piecewise-linear
//! functions of a feedback-corrected separation. A modal state-feedback
//! controller with one undamped pole pair makes each encounter nearly elastic,
//! so the swarm's RMS velocity is preserved. Declared formation edges can
//! switch into a coupled mode that holds a target separation, and back out on
//! an operator command.
//!
//! Module map:
//!
//! - [`plant`]: linear single-axis quadcopter model and RK4 step
//! - [`modal`]: pole placement and characteristic-polynomial checks
//! - [`interaction`]: corrected geometry, force variants, coupling switch
//! - [`engine`]: multi-agent loop, traces and RMS metrics
//! - [`scenario`]: scenario files
//! - [`output`]: CSV traces, reports and SVG charts
//! - [`cli`]: implementation of the `tmem` command-line tool

pub mod cli;
pub mod engine;
pub mod error;
pub mod interaction;
pub mod modal;
pub mod output;
pub mod plant;
pub mod scenario;

pub use engine::{delta_rms, rms_velocity, run, Metrics, Trace, World};
pub use error::{Error, Result};
pub use interaction::{InteractionParams, PairGeometry, PairState, Variant};
pub use modal::{closed_loop_polynomial, desired_polynomial, place_gains, poles_from_spec, Gains, PoleSet, PoleSpec, Quartic};
pub use plant::{AgentState, PlantParams};
pub use scenario::{parse_scenario, serialize_scenario, Scenario};
