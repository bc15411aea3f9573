//! Comparison controllers: point-estimate MDP tracking with active cameras
//! only (MP) or with noisy static wide-view cameras (MSP), a round-robin
//! sweep (Sys), and fixed maximum-coverage cameras (Stat).
//!
//! MP and MSP are reconstructions: a per-target point estimate is propagated
//! along the most likely transition and cameras are pointed to cover as many
//! predicted estimates as possible.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::controller::{Controller, DecisionContext};
use crate::error::{Error, Result};
use crate::gridworld::{CameraNetwork, GridMap, JointAction, JointCameraState, JointFov, Loc};
use crate::motion::{TargetState, NUM_DIRECTIONS};
use crate::planner::Planner;
use crate::sensing::Observation;
use crate::sim::World;

/// Last-known state of one target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointEstimate {
    pub state: TargetState,
    /// Steps since the target was last reported.
    pub staleness: usize,
    last_seen: Loc,
}

/// Point-estimate tracker shared by MP and MSP.
#[derive(Debug, Clone)]
pub struct PointTracker {
    world: Arc<World>,
    estimates: Vec<Option<PointEstimate>>,
    staleness_cap: Option<usize>,
}

/// Heading index closest to the grid displacement `(dx, dy)` (y grows downward).
fn heading_of(dx: f64, dy: f64) -> usize {
    let deg = (-dy).atan2(dx).to_degrees();
    ((deg / 45.0).round() as i64).rem_euclid(NUM_DIRECTIONS as i64) as usize
}

impl PointTracker {
    pub fn new(world: Arc<World>, num_targets: usize, staleness_cap: Option<usize>) -> Self {
        PointTracker {
            world,
            estimates: vec![None; num_targets],
            staleness_cap,
        }
    }

    pub fn estimates(&self) -> &[Option<PointEstimate>] {
        &self.estimates
    }

    /// Overwrites the estimates, e.g. with ground truth.
    pub fn set_states(&mut self, states: &[TargetState]) {
        self.estimates = states
            .iter()
            .map(|&s| {
                Some(PointEstimate {
                    state: s,
                    staleness: 0,
                    last_seen: s.loc,
                })
            })
            .collect();
    }

    /// Folds one step of location reports into the estimates.
    ///
    /// A report replaces the estimate; heading and speed are inferred from
    /// the displacement since the target was last reported (first sightings
    /// get heading 0 and the nominal speed). Unreported targets are moved
    /// along their most likely transition.
    pub fn ingest(&mut self, reports: &[Option<Loc>]) {
        let world = &self.world;
        let space = world.table.space();
        let nominal = world.params.nominal_index().unwrap_or(0);
        for (est, report) in self.estimates.iter_mut().zip(reports) {
            let mut expired = false;
            match (report, est.as_mut()) {
                (Some(loc), None) => {
                    *est = Some(PointEstimate {
                        state: TargetState { loc: *loc, dir: 0, vel: nominal },
                        staleness: 0,
                        last_seen: *loc,
                    });
                }
                (Some(loc), Some(e)) => {
                    let (x0, y0) = world.map.loc_xy(e.last_seen);
                    let (x1, y1) = world.map.loc_xy(*loc);
                    let dx = x1 as f64 - x0 as f64;
                    let dy = y1 as f64 - y0 as f64;
                    let steps = (e.staleness + 1) as f64;
                    let (dir, vel) = if dx == 0.0 && dy == 0.0 {
                        (e.state.dir, e.state.vel)
                    } else {
                        let speed = (dx * dx + dy * dy).sqrt() / steps;
                        (heading_of(dx, dy), world.params.nearest_velocity(speed))
                    };
                    *e = PointEstimate {
                        state: TargetState { loc: *loc, dir, vel },
                        staleness: 0,
                        last_seen: *loc,
                    };
                }
                (None, Some(e)) => {
                    let next = world.table.most_likely(space.index(e.state));
                    e.state = space.state(next);
                    e.staleness += 1;
                    expired = self.staleness_cap.is_some_and(|cap| e.staleness > cap);
                }
                (None, None) => {}
            }
            if expired {
                *est = None;
            }
        }
    }

    /// Predicted next location of every tracked target.
    pub fn predicted_locations(&self) -> Vec<Loc> {
        let space = self.world.table.space();
        self.estimates
            .iter()
            .flatten()
            .map(|e| space.loc_of(self.world.table.most_likely(space.index(e.state))))
            .collect()
    }

    /// Joint action whose post-action fov contains the most predicted
    /// estimates; lexicographically smallest on ties.
    pub fn best_action(&self, actions: &[JointAction], fovs: &[JointFov]) -> JointAction {
        let predicted = self.predicted_locations();
        let mut best = 0;
        let mut best_count = 0;
        for (i, fov) in fovs.iter().enumerate() {
            let count = predicted.iter().filter(|&&l| fov.contains(l)).count();
            if count > best_count {
                best = i;
                best_count = count;
            }
        }
        actions[best].clone()
    }
}

fn action_table(cameras: &CameraNetwork) -> Result<(Vec<JointAction>, Vec<JointFov>)> {
    let planner = Planner::new(cameras.clone())?;
    Ok((planner.actions().to_vec(), planner.fovs().to_vec()))
}

/// MDP with active cameras only: targets are known only through the active
/// cameras' fields of view.
pub struct MpController {
    tracker: PointTracker,
    actions: Vec<JointAction>,
    fovs: Vec<JointFov>,
    cameras: JointCameraState,
}

impl MpController {
    pub fn new(world: Arc<World>, num_targets: usize, staleness_cap: Option<usize>) -> Result<Self> {
        let (actions, fovs) = action_table(&world.cameras)?;
        let cameras = world.cameras.initial_state();
        Ok(MpController {
            tracker: PointTracker::new(world, num_targets, staleness_cap),
            actions,
            fovs,
            cameras,
        })
    }

    pub fn tracker(&self) -> &PointTracker {
        &self.tracker
    }

    pub fn tracker_mut(&mut self) -> &mut PointTracker {
        &mut self.tracker
    }
}

impl Controller for MpController {
    fn name(&self) -> &'static str {
        "mp"
    }

    fn initial_cameras(&self) -> JointCameraState {
        self.cameras.clone()
    }

    fn choose(&mut self, _ctx: DecisionContext<'_>) -> Result<JointAction> {
        Ok(self.tracker.best_action(&self.actions, &self.fovs))
    }

    fn observe(&mut self, action: &JointAction, observations: &[Observation]) -> Result<()> {
        self.cameras = JointCameraState(action.0.clone());
        let reports: Vec<Option<Loc>> = observations
            .iter()
            .map(|z| match z {
                Observation::At(l) => Some(*l),
                Observation::Null => None,
            })
            .collect();
        self.tracker.ingest(&reports);
        Ok(())
    }
}

/// Noisy static wide-view cameras.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticSensorConfig {
    /// Location noise standard deviation at distance zero, in cells.
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    /// Variance growth per cell of distance: var = σ0² (1 + growth · dist).
    #[serde(default = "default_growth")]
    pub growth: f64,
    /// Static camera positions as `[x, y]`; defaults to the free cell
    /// nearest the map centre.
    #[serde(default)]
    pub positions: Vec<[usize; 2]>,
}

fn default_sigma0() -> f64 {
    0.5
}
fn default_growth() -> f64 {
    0.5
}

impl Default for StaticSensorConfig {
    fn default() -> Self {
        StaticSensorConfig {
            sigma0: default_sigma0(),
            growth: default_growth(),
            positions: Vec::new(),
        }
    }
}

/// True when the segment between the two cell centres crosses no blocked cell.
pub fn line_of_sight(map: &GridMap, from: (usize, usize), to: (usize, usize)) -> bool {
    let (x0, y0) = (from.0 as f64 + 0.5, from.1 as f64 + 0.5);
    let (x1, y1) = (to.0 as f64 + 0.5, to.1 as f64 + 0.5);
    let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    let samples = (len * 8.0).ceil() as usize;
    for i in 0..=samples {
        let f = if samples == 0 { 0.0 } else { i as f64 / samples as f64 };
        let x = (x0 + f * (x1 - x0)).floor() as i64;
        let y = (y0 + f * (y1 - y0)).floor() as i64;
        match map.cell_at(x, y) {
            Some(c) if !map.is_blocked(c) => {}
            _ => return false,
        }
    }
    true
}

/// Coverage and noise model of the static cameras.
#[derive(Debug, Clone)]
pub struct StaticSensorModel {
    pub sigma0: f64,
    pub growth: f64,
    positions: Vec<(usize, usize)>,
    /// Distance to the nearest static camera with line of sight, per location.
    distance: Vec<Option<f64>>,
}

impl StaticSensorModel {
    pub fn new(map: &GridMap, config: &StaticSensorConfig) -> Result<Self> {
        if config.sigma0.is_nan() || config.sigma0 < 0.0 || config.growth.is_nan() || config.growth < 0.0 {
            return Err(Error::config(format!(
                "static sensor sigma0 and growth must be >= 0, got {} and {}",
                config.sigma0, config.growth
            )));
        }
        let positions: Vec<(usize, usize)> = if config.positions.is_empty() {
            vec![centre_cell(map)]
        } else {
            config.positions.iter().map(|p| (p[0], p[1])).collect()
        };
        for &(x, y) in &positions {
            if map.loc_at(x as i64, y as i64).is_none() {
                return Err(Error::config(format!("static camera at ({x}, {y}) is not on a free cell")));
            }
        }
        let distance = (0..map.num_locations())
            .map(|loc| {
                let (x, y) = map.loc_xy(loc);
                positions
                    .iter()
                    .filter(|&&p| line_of_sight(map, p, (x, y)))
                    .map(|&(px, py)| ((px as f64 - x as f64).powi(2) + (py as f64 - y as f64).powi(2)).sqrt())
                    .min_by(f64::total_cmp)
            })
            .collect();
        Ok(StaticSensorModel {
            sigma0: config.sigma0,
            growth: config.growth,
            positions,
            distance,
        })
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    pub fn covers(&self, loc: Loc) -> bool {
        self.distance[loc].is_some()
    }

    pub fn distance(&self, loc: Loc) -> Option<f64> {
        self.distance[loc]
    }

    /// Noisy location report for a target at `loc`, or `None` when occluded.
    ///
    /// A 2-D Gaussian offset with variance σ0²(1 + growth·d) is rounded to a
    /// cell and clamped to the nearest free cell.
    pub fn report<R: Rng + ?Sized>(&self, map: &GridMap, loc: Loc, rng: &mut R) -> Option<Loc> {
        let d = self.distance[loc]?;
        let std = self.sigma0 * (1.0 + self.growth * d).sqrt();
        if std == 0.0 {
            return Some(loc);
        }
        let normal = Normal::new(0.0, std).expect("finite positive std");
        let (x, y) = map.loc_xy(loc);
        let nx = (x as f64 + normal.sample(rng)).round() as i64;
        let ny = (y as f64 + normal.sample(rng)).round() as i64;
        Some(nearest_free(map, nx, ny))
    }
}

fn centre_cell(map: &GridMap) -> (usize, usize) {
    let loc = nearest_free(map, map.width() as i64 / 2, map.height() as i64 / 2);
    map.loc_xy(loc)
}

/// Nearest free location to `(x, y)` by Manhattan distance, after clamping to
/// the grid. Ties resolve in row-major order.
pub fn nearest_free(map: &GridMap, x: i64, y: i64) -> Loc {
    let x = x.clamp(0, map.width() as i64 - 1);
    let y = y.clamp(0, map.height() as i64 - 1);
    let max_r = (map.width() + map.height()) as i64;
    for r in 0..=max_r {
        for dy in -r..=r {
            let rest = r - dy.abs();
            let xs = if rest == 0 { vec![0] } else { vec![-rest, rest] };
            for dx in xs {
                if let Some(l) = map.loc_at(x + dx, y + dy) {
                    return l;
                }
            }
        }
    }
    unreachable!("maps always have a free cell")
}

/// MDP supported by static wide-view cameras that report noisy locations of
/// every non-occluded target each step.
pub struct MspController {
    world: Arc<World>,
    tracker: PointTracker,
    sensor: StaticSensorModel,
    actions: Vec<JointAction>,
    fovs: Vec<JointFov>,
}

impl MspController {
    pub fn new(
        world: Arc<World>,
        num_targets: usize,
        config: &StaticSensorConfig,
        staleness_cap: Option<usize>,
    ) -> Result<Self> {
        let (actions, fovs) = action_table(&world.cameras)?;
        let sensor = StaticSensorModel::new(&world.map, config)?;
        Ok(MspController {
            tracker: PointTracker::new(world.clone(), num_targets, staleness_cap),
            world,
            sensor,
            actions,
            fovs,
        })
    }

    pub fn sensor(&self) -> &StaticSensorModel {
        &self.sensor
    }

    pub fn tracker(&self) -> &PointTracker {
        &self.tracker
    }
}

impl Controller for MspController {
    fn name(&self) -> &'static str {
        "msp"
    }

    fn initial_cameras(&self) -> JointCameraState {
        self.world.cameras.initial_state()
    }

    fn choose(&mut self, ctx: DecisionContext<'_>) -> Result<JointAction> {
        let reports: Vec<Option<Loc>> = ctx
            .truth
            .iter()
            .map(|t| self.sensor.report(&self.world.map, t.loc, ctx.rng))
            .collect();
        self.tracker.ingest(&reports);
        Ok(self.tracker.best_action(&self.actions, &self.fovs))
    }

    fn observe(&mut self, _action: &JointAction, _observations: &[Observation]) -> Result<()> {
        Ok(())
    }
}

/// Round-robin sweep: camera i is in state (step + phase_i) mod |𝒞_i|.
pub struct SysController {
    sizes: Vec<usize>,
    phases: Vec<usize>,
}

impl SysController {
    pub fn new(cameras: &CameraNetwork, phases: &[usize]) -> Result<Self> {
        let sizes: Vec<usize> = cameras.cameras().iter().map(|c| c.num_states()).collect();
        let phases = if phases.is_empty() {
            vec![0; sizes.len()]
        } else if phases.len() == sizes.len() {
            phases.to_vec()
        } else {
            return Err(Error::config(format!(
                "sys phases has {} entries for {} cameras",
                phases.len(),
                sizes.len()
            )));
        };
        Ok(SysController { sizes, phases })
    }

    pub fn action_at(&self, step: usize) -> JointAction {
        JointAction(
            self.sizes
                .iter()
                .zip(&self.phases)
                .map(|(&n, &p)| (step + p) % n)
                .collect(),
        )
    }
}

impl Controller for SysController {
    fn name(&self) -> &'static str {
        "sys"
    }

    /// The state the sweep would be in one step before step 0.
    fn initial_cameras(&self) -> JointCameraState {
        JointCameraState(
            self.sizes
                .iter()
                .zip(&self.phases)
                .map(|(&n, &p)| (p + n - 1) % n)
                .collect(),
        )
    }

    fn choose(&mut self, ctx: DecisionContext<'_>) -> Result<JointAction> {
        Ok(self.action_at(ctx.step))
    }

    fn observe(&mut self, _action: &JointAction, _observations: &[Observation]) -> Result<()> {
        Ok(())
    }
}

/// Cameras fixed at the joint state with the largest joint fov.
pub struct StatController {
    state: JointCameraState,
}

impl StatController {
    pub fn new(cameras: &CameraNetwork) -> Result<Self> {
        let mut best: Option<(usize, JointCameraState)> = None;
        for s in cameras.joint_states() {
            let size = cameras.joint_fov(&s)?.len();
            if best.as_ref().is_none_or(|(b, _)| size > *b) {
                best = Some((size, s));
            }
        }
        let (_, state) = best.ok_or_else(|| Error::config("camera network has no joint states"))?;
        Ok(StatController { state })
    }

    pub fn state(&self) -> &JointCameraState {
        &self.state
    }
}

impl Controller for StatController {
    fn name(&self) -> &'static str {
        "stat"
    }

    fn initial_cameras(&self) -> JointCameraState {
        self.state.clone()
    }

    fn choose(&mut self, _ctx: DecisionContext<'_>) -> Result<JointAction> {
        Ok(JointAction(self.state.0.clone()))
    }

    fn observe(&mut self, _action: &JointAction, _observations: &[Observation]) -> Result<()> {
        Ok(())
    }
}
