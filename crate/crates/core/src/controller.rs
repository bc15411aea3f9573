//! The controller interface shared by the belief-space planner and the
//! baselines, and the belief-space controller itself.

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::belief::{correct, JointBelief, TargetBelief};
use crate::error::{Error, Result};
use crate::gridworld::{JointAction, JointCameraState};
use crate::motion::TargetState;
use crate::par::{self, Execution};
use crate::planner::{Planner, ValueReport};
use crate::sensing::Observation;
use crate::sim::World;

/// What a controller may look at when choosing an action.
pub struct DecisionContext<'a> {
    pub step: usize,
    pub cameras: &'a JointCameraState,
    /// Ground truth, visible only to controllers that model static wide-view
    /// sensors. Active-camera controllers must not read it.
    pub truth: &'a [TargetState],
    /// Controller-private randomness; never shared with target motion.
    pub rng: &'a mut ChaCha8Rng,
}

pub trait Controller: Send {
    fn name(&self) -> &'static str;

    /// Camera state at step 0.
    fn initial_cameras(&self) -> JointCameraState;

    fn choose(&mut self, ctx: DecisionContext<'_>) -> Result<JointAction>;

    /// Receives the observations taken after the cameras executed `action`.
    fn observe(&mut self, action: &JointAction, observations: &[Observation]) -> Result<()>;

    /// Current factored belief, for controllers that keep one.
    fn belief(&self) -> Option<&JointBelief> {
        None
    }

    /// Number of belief resets caused by impossible observations.
    fn conflicts(&self) -> usize {
        0
    }
}

/// One-step lookahead controller over factored target beliefs.
pub struct PomdpController {
    world: Arc<World>,
    planner: Planner,
    belief: JointBelief,
    predicted: Option<Vec<Vec<f64>>>,
    last_report: Option<ValueReport>,
    conflicts: usize,
    exec: Execution,
}

impl PomdpController {
    /// Starts every target from a uniform belief.
    pub fn new(world: Arc<World>, num_targets: usize, exec: Execution) -> Result<Self> {
        let space = world.table.space();
        let targets = vec![TargetBelief::uniform(space); num_targets];
        let cameras = world.cameras.initial_state();
        Self::with_belief(world, JointBelief::new(targets, cameras), exec)
    }

    pub fn with_belief(world: Arc<World>, belief: JointBelief, exec: Execution) -> Result<Self> {
        world.cameras.validate(&belief.cameras)?;
        let planner = Planner::new(world.cameras.clone())?.with_execution(exec);
        Ok(PomdpController {
            world,
            planner,
            belief,
            predicted: None,
            last_report: None,
            conflicts: 0,
            exec,
        })
    }

    pub fn last_report(&self) -> Option<&ValueReport> {
        self.last_report.as_ref()
    }
}

impl Controller for PomdpController {
    fn name(&self) -> &'static str {
        "pomdp"
    }

    fn initial_cameras(&self) -> JointCameraState {
        self.belief.cameras.clone()
    }

    fn choose(&mut self, _ctx: DecisionContext<'_>) -> Result<JointAction> {
        let table = &self.world.table;
        let predicted = self.planner.predict_all(&self.belief, table);
        let report = self.planner.plan_predicted(&predicted, table.space());
        let action = report.best_action.clone();
        self.predicted = Some(predicted);
        self.last_report = Some(report);
        Ok(action)
    }

    fn observe(&mut self, action: &JointAction, observations: &[Observation]) -> Result<()> {
        if observations.len() != self.belief.targets.len() {
            return Err(Error::config(format!(
                "{} observations for {} targets",
                observations.len(),
                self.belief.targets.len()
            )));
        }
        let world = &self.world;
        let space = world.table.space();
        let next_cams = world.cameras.apply_action(&self.belief.cameras, action)?;
        let fov = world.cameras.joint_fov(&next_cams)?;
        let predicted = match self.predicted.take() {
            Some(p) => p,
            None => self.planner.predict_all(&self.belief, &world.table),
        };
        let results = par::map_range(self.exec, observations.len(), |k| {
            correct(&predicted[k], space, observations[k], &fov)
        });
        let mut targets = Vec::with_capacity(results.len());
        for (k, r) in results.into_iter().enumerate() {
            match r {
                Ok((b, _)) => targets.push(b),
                Err(Error::BeliefConflict { observation, cameras }) => {
                    log::warn!(
                        "target {k}: observation {observation} impossible under cameras {cameras}; belief reset to uniform"
                    );
                    self.conflicts += 1;
                    targets.push(TargetBelief::uniform(space));
                }
                Err(e) => return Err(e),
            }
        }
        self.belief = JointBelief::new(targets, next_cams);
        Ok(())
    }

    fn belief(&self) -> Option<&JointBelief> {
        Some(&self.belief)
    }

    fn conflicts(&self) -> usize {
        self.conflicts
    }
}
