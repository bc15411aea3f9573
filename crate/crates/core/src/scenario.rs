//! Scenario files: map, cameras, motion, controller and run settings in one
//! TOML document.
//!
//! ```toml
//! tau = 100
//! seed = 1
//!
//! [map]
//! width = 4
//! height = 2
//! blocked = [[3, 1]]
//!
//! [[cameras]]
//! id = 0
//! states = [{ fov = [[0, 0], [1, 0]] }, { fov = [[2, 0]] }]
//!
//! [targets]
//! count = 2
//!
//! [controller]
//! kind = "pomdp"
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{MpController, MspController, StatController, StaticSensorConfig, SysController};
use crate::controller::{Controller, PomdpController};
use crate::error::{Error, Result};
use crate::gridworld::{CameraModel, CameraNetwork, GridMap};
use crate::motion::{MotionParams, TargetState, NUM_DIRECTIONS};
use crate::par::Execution;
use crate::sim::{SpawnMode, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Pomdp,
    Mp,
    Msp,
    Sys,
    Stat,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 5] = [
        ControllerKind::Pomdp,
        ControllerKind::Mp,
        ControllerKind::Msp,
        ControllerKind::Sys,
        ControllerKind::Stat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Pomdp => "pomdp",
            ControllerKind::Mp => "mp",
            ControllerKind::Msp => "msp",
            ControllerKind::Sys => "sys",
            ControllerKind::Stat => "stat",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ControllerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ControllerKind::ALL.iter().map(|k| k.name()).collect();
                Error::config(format!("unknown controller '{s}'; expected one of: {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    /// Blocked cells as `[x, y]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocked: Vec<[usize; 2]>,
    /// Rows of `#` (blocked) and `.` (free); an alternative to width/height/blocked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ascii: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraStateSpec {
    /// Cells seen in this state as `[x, y]`.
    pub fov: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub id: usize,
    pub states: Vec<CameraStateSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedTarget {
    pub x: usize,
    pub y: usize,
    pub dir: usize,
    /// Index into `motion.velocities`.
    pub vel: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scripted: Vec<ScriptedTarget>,
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec {
            count: Some(5),
            scripted: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    /// MP/MSP: drop an estimate after this many unreported steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub staleness_cap: Option<usize>,
    /// Sys: per-camera phase offsets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phases: Vec<usize>,
    /// MSP static wide-view cameras.
    #[serde(default)]
    pub static_sensor: StaticSensorConfig,
}

impl Default for ControllerSpec {
    fn default() -> Self {
        ControllerSpec {
            kind: ControllerKind::Pomdp,
            staleness_cap: None,
            phases: Vec::new(),
            static_sensor: StaticSensorConfig::default(),
        }
    }
}

fn default_tau() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "default_tau")]
    pub tau: usize,
    #[serde(default)]
    pub seed: u64,
    pub map: MapSpec,
    #[serde(default)]
    pub motion: MotionParams,
    pub cameras: Vec<CameraSpec>,
    #[serde(default)]
    pub targets: TargetSpec,
    #[serde(default)]
    pub controller: ControllerSpec,
}

impl FromStr for Scenario {
    type Err = Error;

    /// Parses and fully validates a scenario document.
    fn from_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        text.parse().map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn content_hash(&self) -> Result<String> {
        let canonical = self.to_toml()?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    pub fn grid(&self) -> Result<GridMap> {
        let spec = &self.map;
        match &spec.ascii {
            Some(text) => {
                let map = GridMap::from_ascii(text)?;
                if spec.width.is_some_and(|w| w != map.width()) || spec.height.is_some_and(|h| h != map.height()) {
                    return Err(Error::config(format!(
                        "map.width/height disagree with the {}x{} ascii map",
                        map.width(),
                        map.height()
                    )));
                }
                if !spec.blocked.is_empty() {
                    return Err(Error::config("map.blocked cannot be combined with map.ascii"));
                }
                Ok(map)
            }
            None => {
                let (Some(w), Some(h)) = (spec.width, spec.height) else {
                    return Err(Error::config("map needs width and height, or ascii"));
                };
                let mut cells = Vec::with_capacity(spec.blocked.len());
                for &[x, y] in &spec.blocked {
                    if x >= w || y >= h {
                        return Err(Error::config(format!("map.blocked cell ({x}, {y}) is outside the {w}x{h} grid")));
                    }
                    cells.push(y * w + x);
                }
                GridMap::new(w, h, cells)
            }
        }
    }

    pub fn camera_network(&self, map: &GridMap) -> Result<CameraNetwork> {
        if self.cameras.is_empty() {
            return Err(Error::config("scenario declares no cameras"));
        }
        let mut models = Vec::with_capacity(self.cameras.len());
        for (i, cam) in self.cameras.iter().enumerate() {
            if self.cameras[..i].iter().any(|c| c.id == cam.id) {
                return Err(Error::config(format!("camera id {} is declared twice", cam.id)));
            }
            if cam.states.is_empty() {
                return Err(Error::config(format!("camera {} has no states", cam.id)));
            }
            let mut fovs = Vec::with_capacity(cam.states.len());
            for (s, state) in cam.states.iter().enumerate() {
                let mut locs = Vec::with_capacity(state.fov.len());
                for &[x, y] in &state.fov {
                    let Some(cell) = map.cell_at(x as i64, y as i64) else {
                        return Err(Error::config(format!(
                            "camera {} state {s}: fov cell ({x}, {y}) is outside the map",
                            cam.id
                        )));
                    };
                    let Some(loc) = map.loc_of(cell) else {
                        return Err(Error::config(format!(
                            "camera {} state {s}: fov cell ({x}, {y}) is blocked",
                            cam.id
                        )));
                    };
                    locs.push(loc);
                }
                fovs.push(locs);
            }
            models.push(CameraModel::new(cam.id, fovs)?);
        }
        CameraNetwork::new(models, map.num_locations())
    }

    pub fn world(&self) -> Result<World> {
        self.motion.validate()?;
        let map = self.grid()?;
        let cameras = self.camera_network(&map)?;
        World::new(map, cameras, self.motion.clone())
    }

    pub fn spawn(&self, map: &GridMap) -> Result<SpawnMode> {
        let t = &self.targets;
        if t.scripted.is_empty() {
            return match t.count {
                Some(m) => Ok(SpawnMode::Uniform(m)),
                None => Err(Error::config("targets needs count or scripted")),
            };
        }
        if t.count.is_some_and(|m| m != t.scripted.len()) {
            return Err(Error::config(format!(
                "targets.count is {} but {} scripted targets are listed",
                t.count.unwrap_or_default(),
                t.scripted.len()
            )));
        }
        let mut states = Vec::with_capacity(t.scripted.len());
        for (k, s) in t.scripted.iter().enumerate() {
            let loc = map.loc_at(s.x as i64, s.y as i64).ok_or_else(|| {
                Error::config(format!("scripted target {k} at ({}, {}) is not on a free cell", s.x, s.y))
            })?;
            if s.dir >= NUM_DIRECTIONS || s.vel >= self.motion.velocities.len() {
                return Err(Error::config(format!(
                    "scripted target {k} has invalid dir {} or vel {}",
                    s.dir, s.vel
                )));
            }
            states.push(TargetState { loc, dir: s.dir, vel: s.vel });
        }
        Ok(SpawnMode::Scripted(states))
    }

    /// Checks every cross-reference by building the world once.
    pub fn validate(&self) -> Result<()> {
        let world = self.world()?;
        self.spawn(&world.map)?;
        if self.controller.kind == ControllerKind::Sys {
            SysController::new(&world.cameras, &self.controller.phases)?;
        }
        if self.controller.kind == ControllerKind::Msp {
            crate::baselines::StaticSensorModel::new(&world.map, &self.controller.static_sensor)?;
        }
        Ok(())
    }

    /// Builds the controller named by `kind` with this scenario's parameters.
    pub fn build_controller(
        &self,
        kind: ControllerKind,
        world: Arc<World>,
        num_targets: usize,
        exec: Execution,
    ) -> Result<Box<dyn Controller>> {
        let spec = &self.controller;
        Ok(match kind {
            ControllerKind::Pomdp => Box::new(PomdpController::new(world, num_targets, exec)?),
            ControllerKind::Mp => Box::new(MpController::new(world, num_targets, spec.staleness_cap)?),
            ControllerKind::Msp => Box::new(MspController::new(
                world,
                num_targets,
                &spec.static_sensor,
                spec.staleness_cap,
            )?),
            ControllerKind::Sys => Box::new(SysController::new(&world.cameras, &spec.phases)?),
            ControllerKind::Stat => Box::new(StatController::new(&world.cameras)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
tau = 10
seed = 3

[map]
width = 4
height = 2
blocked = [[3, 1]]

[[cameras]]
id = 0
states = [{ fov = [[0, 0], [1, 0]] }, { fov = [[2, 0]] }]

[targets]
count = 2
"#;

    #[test]
    fn parses_small_scenario() {
        let s: Scenario = SMALL.parse().unwrap();
        let w = s.world().unwrap();
        assert_eq!(w.map.num_locations(), 7);
        assert_eq!(w.cameras.len(), 1);
        assert_eq!(s.controller.kind, ControllerKind::Pomdp);
        assert_eq!(s.spawn(&w.map).unwrap(), SpawnMode::Uniform(2));
    }

    #[test]
    fn round_trip_and_hash() {
        let s: Scenario = SMALL.parse().unwrap();
        let again: Scenario = s.to_toml().unwrap().parse().unwrap();
        assert_eq!(s, again);
        assert_eq!(s.content_hash().unwrap(), again.content_hash().unwrap());
        let mut other = s.clone();
        other.seed = 4;
        assert_ne!(s.content_hash().unwrap(), other.content_hash().unwrap());
    }

    #[test]
    fn fov_on_obstacle_names_camera_and_cell() {
        let text = SMALL.replace("{ fov = [[2, 0]] }", "{ fov = [[3, 1]] }");
        let err = text.parse::<Scenario>().unwrap_err().to_string();
        assert!(err.contains("camera 0") && err.contains("(3, 1)"), "{err}");
    }

    #[test]
    fn parse_errors_have_context() {
        let err = "tau = \n".parse::<Scenario>().unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        let err = SMALL.replace("seed = 3", "seed = 3\nbogus = 1").parse::<Scenario>().unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn controller_names() {
        assert_eq!("msp".parse::<ControllerKind>().unwrap(), ControllerKind::Msp);
        let err = "greedy".parse::<ControllerKind>().unwrap_err().to_string();
        assert!(err.contains("pomdp, mp, msp, sys, stat"), "{err}");
    }

    #[test]
    fn scripted_targets() {
        let text = SMALL.replace("count = 2", "scripted = [{ x = 1, y = 1, dir = 2, vel = 0 }]");
        let s: Scenario = text.parse().unwrap();
        let w = s.world().unwrap();
        let SpawnMode::Scripted(states) = s.spawn(&w.map).unwrap() else {
            panic!("expected scripted spawn")
        };
        assert_eq!(states, vec![TargetState { loc: 5, dir: 2, vel: 0 }]);
        let bad = SMALL.replace("count = 2", "scripted = [{ x = 3, y = 1, dir = 0, vel = 0 }]");
        assert!(bad.parse::<Scenario>().is_err());
    }

    #[test]
    fn ascii_map() {
        let text = SMALL.replace(
            "width = 4\nheight = 2\nblocked = [[3, 1]]",
            "ascii = \"\"\"\n....\n...#\n\"\"\"",
        );
        let s: Scenario = text.parse().unwrap();
        assert_eq!(s.grid().unwrap(), SMALL.parse::<Scenario>().unwrap().grid().unwrap());
    }
}
