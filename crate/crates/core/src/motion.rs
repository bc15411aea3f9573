//! Per-target stochastic motion: Gaussian direction and velocity
//! transitions composed with a velocity-direction location step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::{GridMap, Loc};

pub const NUM_DIRECTIONS: usize = 8;

/// Heading of direction index `d` in degrees, wrapped to (-180, 180].
///
/// Index 0 points east (+x), index 2 points north (-y, towards row 0).
pub fn direction_degrees(d: usize) -> f64 {
    let deg = (d % NUM_DIRECTIONS) as f64 * 45.0;
    if deg > 180.0 {
        deg - 360.0
    } else {
        deg
    }
}

/// Wrapped angular distance between two direction indices, in degrees.
pub fn direction_distance(a: usize, b: usize) -> f64 {
    let k = (a as i64 - b as i64).rem_euclid(NUM_DIRECTIONS as i64) as usize;
    k.min(NUM_DIRECTIONS - k) as f64 * 45.0
}

/// Grid displacement `(dx, dy)` for moving `speed` cells along direction `d`.
/// Components within 1e-9 of an integer are snapped to it.
pub fn displacement(d: usize, speed: f64) -> (f64, f64) {
    let theta = direction_degrees(d).to_radians();
    (snap(speed * theta.cos()), snap(-speed * theta.sin()))
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x
    }
}

/// Target state t = (location, direction, velocity), all as indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TargetState {
    pub loc: Loc,
    pub dir: usize,
    pub vel: usize,
}

/// Dense enumeration of 𝒯 = 𝒯_l × 𝒯_d × 𝒯_v.
///
/// States of one location occupy a contiguous block of `8 * num_velocities`
/// indices, ordered by direction then velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    pub num_locations: usize,
    pub num_velocities: usize,
}

impl StateSpace {
    pub fn new(num_locations: usize, num_velocities: usize) -> Self {
        StateSpace {
            num_locations,
            num_velocities,
        }
    }

    pub fn len(&self) -> usize {
        self.num_locations * self.block()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of states sharing one location.
    pub fn block(&self) -> usize {
        NUM_DIRECTIONS * self.num_velocities
    }

    #[inline]
    pub fn index(&self, t: TargetState) -> usize {
        (t.loc * NUM_DIRECTIONS + t.dir) * self.num_velocities + t.vel
    }

    #[inline]
    pub fn state(&self, index: usize) -> TargetState {
        let vel = index % self.num_velocities;
        let rest = index / self.num_velocities;
        TargetState {
            loc: rest / NUM_DIRECTIONS,
            dir: rest % NUM_DIRECTIONS,
            vel,
        }
    }

    #[inline]
    pub fn loc_of(&self, index: usize) -> Loc {
        index / self.block()
    }

    pub fn contains(&self, t: TargetState) -> bool {
        t.loc < self.num_locations && t.dir < NUM_DIRECTIONS && t.vel < self.num_velocities
    }
}

/// Direction/velocity noise and the discrete velocity set.
///
/// Defaults (45°, 0.25 cells/step, {1.0, 1.5, 2.0}, nominal 1.5) are chosen
/// configuration, not measured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionParams {
    /// Direction standard deviation in degrees.
    #[serde(default = "default_sigma_d")]
    pub sigma_d: f64,
    /// Velocity standard deviation in cells per step.
    #[serde(default = "default_sigma_v")]
    pub sigma_v: f64,
    /// Discrete velocity magnitudes in cells per step.
    #[serde(default = "default_velocities")]
    pub velocities: Vec<f64>,
    /// Velocity assigned to uniformly spawned targets.
    #[serde(default = "default_nominal")]
    pub nominal_velocity: f64,
}

fn default_sigma_d() -> f64 {
    45.0
}
fn default_sigma_v() -> f64 {
    0.25
}
fn default_velocities() -> Vec<f64> {
    vec![1.0, 1.5, 2.0]
}
fn default_nominal() -> f64 {
    1.5
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            sigma_d: default_sigma_d(),
            sigma_v: default_sigma_v(),
            velocities: default_velocities(),
            nominal_velocity: default_nominal(),
        }
    }
}

impl MotionParams {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma_d.is_finite() || self.sigma_d <= 0.0 {
            return Err(Error::config(format!("motion.sigma_d must be > 0, got {}", self.sigma_d)));
        }
        if !self.sigma_v.is_finite() || self.sigma_v <= 0.0 {
            return Err(Error::config(format!("motion.sigma_v must be > 0, got {}", self.sigma_v)));
        }
        if self.velocities.is_empty() {
            return Err(Error::config("motion.velocities must not be empty"));
        }
        if let Some(v) = self.velocities.iter().find(|&&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::config(format!("motion.velocities must be > 0, got {v}")));
        }
        self.nominal_index()?;
        Ok(())
    }

    /// Index of the nominal velocity in the velocity set.
    pub fn nominal_index(&self) -> Result<usize> {
        self.velocities
            .iter()
            .position(|&v| (v - self.nominal_velocity).abs() < 1e-12)
            .ok_or_else(|| {
                Error::config(format!(
                    "motion.nominal_velocity {} is not in velocities {:?}",
                    self.nominal_velocity, self.velocities
                ))
            })
    }

    /// Index of the velocity closest to `speed` (first on ties).
    pub fn nearest_velocity(&self, speed: f64) -> usize {
        let mut best = 0;
        for (i, &v) in self.velocities.iter().enumerate() {
            if (v - speed).abs() < (self.velocities[best] - speed).abs() {
                best = i;
            }
        }
        best
    }
}

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

/// P(d' | d): circular Gaussian kernel over the 8 headings, evaluated at bin
/// centres and normalized.
pub fn direction_transition(d: usize, params: &MotionParams) -> [f64; NUM_DIRECTIONS] {
    let two_var = 2.0 * params.sigma_d * params.sigma_d;
    let w = (0..NUM_DIRECTIONS)
        .map(|d2| {
            let delta = direction_distance(d, d2);
            (-delta * delta / two_var).exp()
        })
        .collect();
    let w = normalize(w);
    let mut out = [0.0; NUM_DIRECTIONS];
    out.copy_from_slice(&w);
    out
}

/// P(v' | v): Gaussian kernel over the (non-circular) velocity set.
pub fn velocity_transition(v: usize, params: &MotionParams) -> Vec<f64> {
    let two_var = 2.0 * params.sigma_v * params.sigma_v;
    let centre = params.velocities[v];
    normalize(
        params
            .velocities
            .iter()
            .map(|&v2| (-(v2 - centre) * (v2 - centre) / two_var).exp())
            .collect(),
    )
}

/// P(l' | l, d', v'): the unit cell footprint displaced by `speed` along `d`
/// splits its mass over the (up to four) cells it overlaps, proportional to
/// overlap area. Mass on blocked or out-of-bounds cells stays at `l`.
///
/// Entries are sorted by location and merged.
pub fn location_transition(loc: Loc, d: usize, speed: f64, map: &GridMap) -> Vec<(Loc, f64)> {
    let (x, y) = map.loc_xy(loc);
    let (dx, dy) = displacement(d, speed);
    let px = x as f64 + dx;
    let py = y as f64 + dy;
    let ix = px.floor();
    let iy = py.floor();
    let fx = px - ix;
    let fy = py - iy;

    let mut out: Vec<(Loc, f64)> = Vec::with_capacity(4);
    let mut add = |l: Loc, p: f64| match out.iter_mut().find(|(k, _)| *k == l) {
        Some(e) => e.1 += p,
        None => out.push((l, p)),
    };
    for (ox, wx) in [(0i64, 1.0 - fx), (1, fx)] {
        for (oy, wy) in [(0i64, 1.0 - fy), (1, fy)] {
            let w = wx * wy;
            if w <= 0.0 {
                continue;
            }
            match map.loc_at(ix as i64 + ox, iy as i64 + oy) {
                Some(dest) => add(dest, w),
                None => add(loc, w),
            }
        }
    }
    out.sort_by_key(|e| e.0);
    out
}

/// Sparse row-stochastic matrix P(t' | t) over a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    space: StateSpace,
    offsets: Vec<usize>,
    next: Vec<u32>,
    prob: Vec<f64>,
}

impl TransitionTable {
    /// Builds P(t'|t) = P(l'|l,d',v') P(d'|d) P(v'|v) for every state of `map`.
    pub fn build(map: &GridMap, params: &MotionParams) -> Result<Self> {
        params.validate()?;
        let space = StateSpace::new(map.num_locations(), params.velocities.len());
        let nv = space.num_velocities;
        let dir_rows: Vec<_> = (0..NUM_DIRECTIONS).map(|d| direction_transition(d, params)).collect();
        let vel_rows: Vec<_> = (0..nv).map(|v| velocity_transition(v, params)).collect();

        // Location kernels depend only on (l, d', v'); compute once per location.
        let mut offsets = Vec::with_capacity(space.len() + 1);
        let mut next = Vec::new();
        let mut prob = Vec::new();
        offsets.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for loc in 0..space.num_locations {
            let moves: Vec<Vec<(Loc, f64)>> = (0..NUM_DIRECTIONS)
                .flat_map(|d2| (0..nv).map(move |v2| (d2, v2)))
                .map(|(d2, v2)| location_transition(loc, d2, params.velocities[v2], map))
                .collect();
            for dir_row in &dir_rows {
                for vel_row in &vel_rows {
                    row.clear();
                    for d2 in 0..NUM_DIRECTIONS {
                        for v2 in 0..nv {
                            let pdv = dir_row[d2] * vel_row[v2];
                            for &(l2, pl) in &moves[d2 * nv + v2] {
                                let p = pl * pdv;
                                if p > 0.0 {
                                    let t2 = space.index(TargetState { loc: l2, dir: d2, vel: v2 });
                                    row.push((t2, p));
                                }
                            }
                        }
                    }
                    row.sort_by_key(|e| e.0);
                    for &(t2, p) in &row {
                        next.push(t2 as u32);
                        prob.push(p);
                    }
                    offsets.push(next.len());
                }
            }
        }
        Ok(TransitionTable {
            space,
            offsets,
            next,
            prob,
        })
    }

    /// Builds a table from explicit sparse rows; each row must be a
    /// probability distribution over valid states.
    pub fn from_rows(space: StateSpace, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.len() != space.len() {
            return Err(Error::config(format!(
                "transition table has {} rows for {} states",
                rows.len(),
                space.len()
            )));
        }
        let mut offsets = vec![0];
        let mut next = Vec::new();
        let mut prob = Vec::new();
        for (t, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            let mut total = 0.0;
            for &(t2, p) in &row {
                if t2 >= space.len() || p.is_nan() || p < 0.0 {
                    return Err(Error::config(format!("row {t}: invalid entry ({t2}, {p})")));
                }
                total += p;
                next.push(t2 as u32);
                prob.push(p);
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!("row {t} sums to {total}")));
            }
            offsets.push(next.len());
        }
        Ok(TransitionTable {
            space,
            offsets,
            next,
            prob,
        })
    }

    pub fn identity(space: StateSpace) -> Self {
        let n = space.len();
        TransitionTable {
            space,
            offsets: (0..=n).collect(),
            next: (0..n as u32).collect(),
            prob: vec![1.0; n],
        }
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn num_states(&self) -> usize {
        self.space.len()
    }

    /// Number of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        self.prob.len()
    }

    /// Successor indices and probabilities of state index `t`.
    #[inline]
    pub fn row(&self, t: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.offsets[t], self.offsets[t + 1]);
        (&self.next[a..b], &self.prob[a..b])
    }

    /// Most probable successor of `t`, smallest index on ties.
    pub fn most_likely(&self, t: usize) -> usize {
        let (next, prob) = self.row(t);
        let mut best = 0;
        for i in 1..prob.len() {
            if prob[i] > prob[best] {
                best = i;
            }
        }
        next[best] as usize
    }

    /// Samples a successor of `t` by inverse-CDF on one uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> usize {
        let (next, prob) = self.row(t);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (&t2, &p) in next.iter().zip(prob) {
            acc += p;
            if u < acc {
                return t2 as usize;
            }
        }
        *next.last().expect("transition rows are never empty") as usize
    }
}
