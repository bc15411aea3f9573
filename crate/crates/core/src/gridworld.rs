//! The discrete surveillance environment: grid cells, obstacles, camera
//! state spaces and their fields of view.
//!
//! Two index spaces are used throughout the crate. A [`Cell`] is a row-major
//! grid index `y * width + x` over the whole rectangle. A [`Loc`] is an index
//! into [`GridMap::free_cells`], i.e. a traversable target location; belief
//! vectors and fields of view are expressed in `Loc`s.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Row-major grid index.
pub type Cell = usize;
/// Index into the ordered list of free cells.
pub type Loc = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    free_cells: Vec<Cell>,
    loc_of_cell: Vec<Option<Loc>>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, blocked: impl IntoIterator<Item = Cell>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::config(format!("grid must be non-empty, got {width}x{height}")));
        }
        let n = width * height;
        let mut mask = vec![false; n];
        for cell in blocked {
            if cell >= n {
                return Err(Error::config(format!(
                    "blocked cell {cell} outside {width}x{height} grid"
                )));
            }
            mask[cell] = true;
        }
        let free_cells: Vec<Cell> = (0..n).filter(|&c| !mask[c]).collect();
        if free_cells.is_empty() {
            return Err(Error::config("grid has no free cells"));
        }
        let mut loc_of_cell = vec![None; n];
        for (loc, &cell) in free_cells.iter().enumerate() {
            loc_of_cell[cell] = Some(loc);
        }
        Ok(GridMap {
            width,
            height,
            blocked: mask,
            free_cells,
            loc_of_cell,
        })
    }

    /// A grid with no obstacles.
    pub fn open(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, std::iter::empty())
    }

    /// Parses an ASCII map: `#` is blocked, `.` is free, one row per line.
    /// Blank leading/trailing lines and surrounding whitespace are ignored.
    pub fn from_ascii(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut blocked = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::config(format!(
                    "ascii map row {y} has length {}, expected {width}",
                    row.chars().count()
                )));
            }
            for (x, ch) in row.chars().enumerate() {
                match ch {
                    '#' => blocked.push(y * width + x),
                    '.' => {}
                    other => {
                        return Err(Error::config(format!(
                            "ascii map row {y} column {x}: unexpected character {other:?}"
                        )))
                    }
                }
            }
        }
        Self::new(width, height, blocked)
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(if self.blocked[y * self.width + x] { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    /// |𝒯_l|, the number of traversable locations.
    pub fn num_locations(&self) -> usize {
        self.free_cells.len()
    }

    /// Free cells in canonical (row-major) order. Position in this slice is the `Loc`.
    pub fn free_cells(&self) -> &[Cell] {
        &self.free_cells
    }

    pub fn blocked_cells(&self) -> Vec<Cell> {
        (0..self.num_cells()).filter(|&c| self.blocked[c]).collect()
    }

    pub fn is_blocked(&self, cell: Cell) -> bool {
        self.blocked.get(cell).copied().unwrap_or(true)
    }

    pub fn cell_at(&self, x: i64, y: i64) -> Option<Cell> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return None;
        }
        Some(y as usize * self.width + x as usize)
    }

    /// Location at integer coordinates, `None` when out of bounds or blocked.
    pub fn loc_at(&self, x: i64, y: i64) -> Option<Loc> {
        self.cell_at(x, y).and_then(|c| self.loc_of_cell[c])
    }

    pub fn xy(&self, cell: Cell) -> (usize, usize) {
        (cell % self.width, cell / self.width)
    }

    pub fn loc_of(&self, cell: Cell) -> Option<Loc> {
        self.loc_of_cell.get(cell).copied().flatten()
    }

    pub fn cell_of(&self, loc: Loc) -> Cell {
        self.free_cells[loc]
    }

    pub fn loc_xy(&self, loc: Loc) -> (usize, usize) {
        self.xy(self.free_cells[loc])
    }
}

/// Per-camera PTZ state index vector Ĉ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointCameraState(pub Vec<usize>);

/// One "go to state s" command per camera.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointAction(pub Vec<usize>);

impl JointAction {
    /// The action that leaves every camera where it is.
    pub fn hold(state: &JointCameraState) -> Self {
        JointAction(state.0.clone())
    }
}

fn write_dashed(f: &mut fmt::Formatter<'_>, xs: &[usize]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str("-")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for JointCameraState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_dashed(f, &self.0)
    }
}

impl fmt::Display for JointAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_dashed(f, &self.0)
    }
}

impl Serialize for JointCameraState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for JointAction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One active camera: a finite set of PTZ states, each with a fixed field of view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CameraModel {
    pub id: usize,
    fovs: Vec<Vec<Loc>>,
}

impl CameraModel {
    /// Fov lists are sorted and deduplicated.
    pub fn new(id: usize, fovs: Vec<Vec<Loc>>) -> Result<Self> {
        if fovs.is_empty() {
            return Err(Error::config(format!("camera {id} has no states")));
        }
        let fovs = fovs
            .into_iter()
            .map(|f| f.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        Ok(CameraModel { id, fovs })
    }

    pub fn num_states(&self) -> usize {
        self.fovs.len()
    }

    pub fn fov(&self, state: usize) -> Option<&[Loc]> {
        self.fovs.get(state).map(Vec::as_slice)
    }

    pub fn fovs(&self) -> &[Vec<Loc>] {
        &self.fovs
    }
}

/// Union of the cameras' fields of view for one joint camera state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointFov {
    state: JointCameraState,
    mask: Vec<bool>,
    locs: Vec<Loc>,
}

impl JointFov {
    pub fn state(&self) -> &JointCameraState {
        &self.state
    }

    #[inline]
    pub fn contains(&self, loc: Loc) -> bool {
        self.mask[loc]
    }

    /// Covered locations in ascending order.
    pub fn locs(&self) -> &[Loc] {
        &self.locs
    }

    pub fn len(&self) -> usize {
        self.locs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locs.is_empty()
    }

    pub fn num_locations(&self) -> usize {
        self.mask.len()
    }

    /// |fov(C)ᶜ|: free locations not covered.
    pub fn complement_size(&self) -> usize {
        self.mask.len() - self.locs.len()
    }
}

/// The active cameras of a scenario over a fixed map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CameraNetwork {
    cameras: Vec<CameraModel>,
    num_locations: usize,
}

impl CameraNetwork {
    pub fn new(cameras: Vec<CameraModel>, num_locations: usize) -> Result<Self> {
        for cam in &cameras {
            for (s, fov) in cam.fovs.iter().enumerate() {
                if let Some(&bad) = fov.iter().find(|&&l| l >= num_locations) {
                    return Err(Error::config(format!(
                        "camera {} state {s}: fov location {bad} is not a free cell",
                        cam.id
                    )));
                }
            }
        }
        Ok(CameraNetwork {
            cameras,
            num_locations,
        })
    }

    pub fn cameras(&self) -> &[CameraModel] {
        &self.cameras
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn num_locations(&self) -> usize {
        self.num_locations
    }

    pub fn validate(&self, state: &JointCameraState) -> Result<()> {
        if state.0.len() != self.cameras.len() {
            return Err(Error::config(format!(
                "joint camera state {state} has {} entries for {} cameras",
                state.0.len(),
                self.cameras.len()
            )));
        }
        for (cam, &s) in self.cameras.iter().zip(&state.0) {
            if s >= cam.num_states() {
                return Err(Error::config(format!(
                    "camera {} has no state {s} (it has {})",
                    cam.id,
                    cam.num_states()
                )));
            }
        }
        Ok(())
    }

    /// fov(C) = ⋃ fov(c_i).
    pub fn joint_fov(&self, state: &JointCameraState) -> Result<JointFov> {
        self.validate(state)?;
        let mut mask = vec![false; self.num_locations];
        for (cam, &s) in self.cameras.iter().zip(&state.0) {
            for &loc in &cam.fovs[s] {
                mask[loc] = true;
            }
        }
        let locs = (0..self.num_locations).filter(|&l| mask[l]).collect();
        Ok(JointFov {
            state: state.clone(),
            mask,
            locs,
        })
    }

    pub fn fov_complement_size(&self, state: &JointCameraState) -> Result<usize> {
        Ok(self.joint_fov(state)?.complement_size())
    }

    /// Deterministic camera transition: every camera moves to its commanded state.
    pub fn apply_action(&self, state: &JointCameraState, action: &JointAction) -> Result<JointCameraState> {
        self.validate(state)?;
        let next = JointCameraState(action.0.clone());
        self.validate(&next)
            .map_err(|e| Error::config(format!("invalid action {action}: {e}")))?;
        Ok(next)
    }

    /// The all-zeros joint state.
    pub fn initial_state(&self) -> JointCameraState {
        JointCameraState(vec![0; self.cameras.len()])
    }

    /// |𝒜| = ∏ |𝒞_i|.
    pub fn num_joint_states(&self) -> usize {
        self.cameras.iter().map(CameraModel::num_states).product()
    }

    /// Every joint state in lexicographic order (last camera varies fastest).
    pub fn joint_states(&self) -> Vec<JointCameraState> {
        let total = self.num_joint_states();
        let mut out = Vec::with_capacity(total);
        let mut cur = vec![0usize; self.cameras.len()];
        for _ in 0..total {
            out.push(JointCameraState(cur.clone()));
            for i in (0..cur.len()).rev() {
                cur[i] += 1;
                if cur[i] < self.cameras[i].num_states() {
                    break;
                }
                cur[i] = 0;
            }
        }
        out
    }

    /// Every joint action in lexicographic order.
    pub fn joint_actions(&self) -> Vec<JointAction> {
        self.joint_states().into_iter().map(|s| JointAction(s.0)).collect()
    }
}
