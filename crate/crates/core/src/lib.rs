//! Coordination of active pan-tilt-zoom cameras on a discrete grid.
//!
//! Targets move on a grid under a noisy constant-velocity model; each is
//! tracked by its own belief over (location, heading, speed). A one-step
//! lookahead planner picks the joint camera action that maximizes the
//! expected number of targets in view, in time linear in the number of
//! targets. Baseline controllers and a seeded simulator make runs comparable.

pub mod baselines;
pub mod belief;
pub mod controller;
pub mod error;
pub mod gridworld;
pub mod metrics;
pub mod motion;
pub mod par;
pub mod planner;
pub mod scenario;
pub mod sensing;
pub mod sim;

pub use belief::{JointBelief, TargetBelief};
pub use controller::{Controller, PomdpController};
pub use error::{Error, Result};
pub use gridworld::{CameraModel, CameraNetwork, GridMap, JointAction, JointCameraState, JointFov};
pub use motion::{MotionParams, StateSpace, TargetState, TransitionTable};
pub use par::Execution;
pub use planner::{Planner, ValueReport};
pub use scenario::{ControllerKind, Scenario};
pub use sensing::Observation;
pub use sim::{run, RunConfig, RunRecord, SpawnMode, World};
