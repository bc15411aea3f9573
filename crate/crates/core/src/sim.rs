//! Time-stepped ground-truth simulation.
//!
//! Each step: the controller picks a joint action, the cameras move, the
//! targets move, observations are taken from the new camera state, the
//! controller folds them in, and the number of targets inside the joint fov
//! is recorded.
//!
//! Target spawns and motion draw from a generator seeded only by the run
//! seed, so every controller sees the same trajectories for a given seed.

use std::io::{self, Write};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::controller::{Controller, DecisionContext};
use crate::error::{Error, Result};
use crate::gridworld::{CameraNetwork, Cell, GridMap, JointCameraState};
use crate::motion::{MotionParams, StateSpace, TargetState, TransitionTable, NUM_DIRECTIONS};
use crate::sensing::{sample_observation, Observation};

/// Everything about a scenario that is fixed for the whole run.
#[derive(Debug, Clone)]
pub struct World {
    pub map: GridMap,
    pub cameras: CameraNetwork,
    pub params: MotionParams,
    pub table: TransitionTable,
}

impl World {
    pub fn new(map: GridMap, cameras: CameraNetwork, params: MotionParams) -> Result<Self> {
        if cameras.num_locations() != map.num_locations() {
            return Err(Error::config(format!(
                "camera network built for {} locations, map has {}",
                cameras.num_locations(),
                map.num_locations()
            )));
        }
        let table = TransitionTable::build(&map, &params)?;
        Ok(World {
            map,
            cameras,
            params,
            table,
        })
    }

    pub fn space(&self) -> StateSpace {
        self.table.space()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpawnMode {
    /// Distinct uniformly drawn locations, uniform heading, nominal speed.
    Uniform(usize),
    /// Exact initial states.
    Scripted(Vec<TargetState>),
}

impl SpawnMode {
    pub fn num_targets(&self) -> usize {
        match self {
            SpawnMode::Uniform(m) => *m,
            SpawnMode::Scripted(s) => s.len(),
        }
    }
}

pub fn spawn_targets<R: Rng + ?Sized>(world: &World, mode: &SpawnMode, rng: &mut R) -> Result<Vec<TargetState>> {
    let space = world.space();
    match mode {
        SpawnMode::Uniform(m) => {
            let n = world.map.num_locations();
            if *m > n {
                return Err(Error::config(format!(
                    "cannot place {m} targets on {n} free cells without replacement"
                )));
            }
            let vel = world.params.nominal_index()?;
            let locs = sample(rng, n, *m).into_vec();
            Ok(locs
                .into_iter()
                .map(|loc| TargetState {
                    loc,
                    dir: rng.random_range(0..NUM_DIRECTIONS),
                    vel,
                })
                .collect())
        }
        SpawnMode::Scripted(states) => {
            if let Some(bad) = states.iter().find(|t| !space.contains(**t)) {
                return Err(Error::config(format!("scripted target state {bad:?} is invalid")));
            }
            Ok(states.clone())
        }
    }
}

/// Samples each target's successor independently from its transition row.
pub fn advance_targets<R: Rng + ?Sized>(
    targets: &[TargetState],
    table: &TransitionTable,
    rng: &mut R,
) -> Vec<TargetState> {
    let space = table.space();
    targets
        .iter()
        .map(|&t| space.state(table.sample(space.index(t), rng)))
        .collect()
}

/// Ground truth at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub step: usize,
    pub targets: Vec<TargetState>,
    pub cameras: JointCameraState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetRecord {
    pub true_cell: Cell,
    /// Observed grid cell, `None` for φ.
    pub observed_cell: Option<Cell>,
}

impl TargetRecord {
    pub fn observed(&self) -> bool {
        self.observed_cell.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub cameras: JointCameraState,
    pub targets: Vec<TargetRecord>,
    /// Targets whose true location is inside the joint fov.
    pub m_obs: usize,
}

/// Top-k belief entries for one target after one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefSnapshot {
    pub step: usize,
    pub target: usize,
    /// `(cell, direction, velocity index, probability)`
    pub top: Vec<(Cell, usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub controller: String,
    pub seed: u64,
    pub num_targets: usize,
    pub steps: Vec<StepRecord>,
    pub conflicts: usize,
    pub beliefs: Vec<BeliefSnapshot>,
}

impl RunRecord {
    pub fn tau(&self) -> usize {
        self.steps.len()
    }

    pub fn m_obs(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.m_obs).collect()
    }

    /// Ground-truth cells per step, one row per step.
    pub fn truth(&self) -> Vec<Vec<Cell>> {
        self.steps
            .iter()
            .map(|s| s.targets.iter().map(|t| t.true_cell).collect())
            .collect()
    }

    /// Comma-separated per-step table with an `m_obs` footer line.
    pub fn write_table<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "step,controller,camera_state")?;
        for k in 0..self.num_targets {
            write!(w, ",t{k}_true_cell,t{k}_obs")?;
        }
        writeln!(w)?;
        for s in &self.steps {
            write!(w, "{},{},{}", s.step, self.controller, s.cameras)?;
            for t in &s.targets {
                match t.observed_cell {
                    Some(c) => write!(w, ",{},{}", t.true_cell, c)?,
                    None => write!(w, ",{},phi", t.true_cell)?,
                }
            }
            writeln!(w)?;
        }
        write!(w, "# m_obs")?;
        for s in &self.steps {
            write!(w, ",{}", s.m_obs)?;
        }
        writeln!(w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub tau: usize,
    pub seed: u64,
    pub spawn: SpawnMode,
    /// Record the `k` most probable states of each target belief per step.
    pub belief_top_k: Option<usize>,
}

/// Generator for spawns and target motion.
pub fn truth_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for controller-side randomness (static sensor noise).
pub fn controller_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Runs one episode of `config.tau` steps.
pub fn run(world: &World, controller: &mut dyn Controller, config: &RunConfig) -> Result<RunRecord> {
    let mut truth_rng = truth_rng(config.seed);
    let mut ctrl_rng = controller_rng(config.seed);
    let mut targets = spawn_targets(world, &config.spawn, &mut truth_rng)?;
    let mut cameras = controller.initial_cameras();
    world.cameras.validate(&cameras)?;
    let space = world.space();

    let mut steps = Vec::with_capacity(config.tau);
    let mut beliefs = Vec::new();
    for step in 0..config.tau {
        let ctx = DecisionContext {
            step,
            cameras: &cameras,
            truth: &targets,
            rng: &mut ctrl_rng,
        };
        let action = controller
            .choose(ctx)
            .map_err(|e| at_step(step, "choosing an action", e))?;
        cameras = world
            .cameras
            .apply_action(&cameras, &action)
            .map_err(|e| at_step(step, "moving cameras", e))?;
        targets = advance_targets(&targets, &world.table, &mut truth_rng);
        let fov = world.cameras.joint_fov(&cameras)?;
        let observations: Vec<Observation> = targets
            .iter()
            .map(|t| sample_observation(t.loc, &fov, &mut truth_rng))
            .collect();
        controller
            .observe(&action, &observations)
            .map_err(|e| at_step(step, "updating the controller", e))?;

        let records: Vec<TargetRecord> = targets
            .iter()
            .zip(&observations)
            .map(|(t, z)| TargetRecord {
                true_cell: world.map.cell_of(t.loc),
                observed_cell: match z {
                    Observation::At(l) => Some(world.map.cell_of(*l)),
                    Observation::Null => None,
                },
            })
            .collect();
        let m_obs = targets.iter().filter(|t| fov.contains(t.loc)).count();
        if let (Some(k), Some(b)) = (config.belief_top_k, controller.belief()) {
            for (i, tb) in b.targets.iter().enumerate() {
                let top = tb
                    .top_k(k)
                    .into_iter()
                    .map(|(idx, p)| {
                        let s = space.state(idx);
                        (world.map.cell_of(s.loc), s.dir, s.vel, p)
                    })
                    .collect();
                beliefs.push(BeliefSnapshot { step, target: i, top });
            }
        }
        steps.push(StepRecord {
            step,
            cameras: cameras.clone(),
            targets: records,
            m_obs,
        });
    }
    Ok(RunRecord {
        controller: controller.name().to_string(),
        seed: config.seed,
        num_targets: targets.len(),
        steps,
        conflicts: controller.conflicts(),
        beliefs,
    })
}

fn at_step(step: usize, what: &str, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("step {step}, {what}: {msg}")),
        other => other,
    }
}
