//! Factored belief over target states and its exact Bayesian update.
//!
//! The joint belief is kept as one dense vector per target plus the fully
//! observed camera state; the joint distribution over all targets is never
//! materialized.

use crate::error::{Error, Result};
use crate::gridworld::{CameraNetwork, JointAction, JointCameraState, JointFov};
use crate::motion::{StateSpace, TargetState, TransitionTable};
use crate::par::{self, Execution};
use crate::sensing::{likelihood, Observation};

/// b_k: a probability vector over 𝒯 for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBelief {
    probs: Vec<f64>,
}

/// How to initialise a target's belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialBelief {
    Uniform,
    At(TargetState),
}

impl TargetBelief {
    /// Wraps a probability vector. Entries must be non-negative and sum to 1 ± 1e-9.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::config("belief has a negative or NaN entry"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("belief sums to {total}")));
        }
        Ok(TargetBelief { probs })
    }

    pub fn uniform(space: StateSpace) -> Self {
        let n = space.len();
        TargetBelief {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn delta(space: StateSpace, t: TargetState) -> Self {
        let mut probs = vec![0.0; space.len()];
        probs[space.index(t)] = 1.0;
        TargetBelief { probs }
    }

    pub fn initial(space: StateSpace, mode: InitialBelief) -> Result<Self> {
        match mode {
            InitialBelief::Uniform => Ok(Self::uniform(space)),
            InitialBelief::At(t) if space.contains(t) => Ok(Self::delta(space, t)),
            InitialBelief::At(t) => Err(Error::config(format!(
                "initial state {t:?} is not a valid target state"
            ))),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Marginal probability of each location.
    pub fn location_marginal(&self, space: StateSpace) -> Vec<f64> {
        self.probs.chunks(space.block()).map(|c| c.iter().sum()).collect()
    }

    /// The `k` most probable states, highest first (index order on ties).
    pub fn top_k(&self, k: usize) -> Vec<(usize, f64)> {
        let mut idx: Vec<usize> = (0..self.probs.len()).filter(|&i| self.probs[i] > 0.0).collect();
        idx.sort_by(|&a, &b| self.probs[b].total_cmp(&self.probs[a]).then(a.cmp(&b)));
        idx.truncate(k);
        idx.into_iter().map(|i| (i, self.probs[i])).collect()
    }

    /// Index of the most probable state, smallest index on ties.
    pub fn map_state(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Σ_t P(t'|t) b(t). Mass is preserved because rows are stochastic.
pub fn predict(belief: &TargetBelief, table: &TransitionTable) -> Vec<f64> {
    let mut out = vec![0.0; table.num_states()];
    for (t, &p) in belief.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (next, prob) = table.row(t);
        for (&t2, &q) in next.iter().zip(prob) {
            out[t2 as usize] += q * p;
        }
    }
    out
}

/// Folds observation `z` into an already-predicted belief.
///
/// Returns the normalized posterior and η⁻¹ = P(z | b, C').
pub fn correct(
    predicted: &[f64],
    space: StateSpace,
    z: Observation,
    fov: &JointFov,
) -> Result<(TargetBelief, f64)> {
    let block = space.block();
    let mut post = vec![0.0; predicted.len()];
    match z {
        // Only the block of the observed location can carry likelihood.
        Observation::At(x) => {
            let w = likelihood(z, x, fov);
            if w > 0.0 {
                let range = x * block..(x + 1) * block;
                for i in range {
                    post[i] = w * predicted[i];
                }
            }
        }
        Observation::Null => {
            for (loc, (dst, src)) in post.chunks_mut(block).zip(predicted.chunks(block)).enumerate() {
                let w = likelihood(z, loc, fov);
                if w > 0.0 {
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d = w * s;
                    }
                }
            }
        }
    }
    let evidence: f64 = post.iter().sum();
    if evidence.is_nan() || evidence <= 0.0 {
        return Err(Error::BeliefConflict {
            observation: z,
            cameras: fov.state().clone(),
        });
    }
    for p in &mut post {
        *p /= evidence;
    }
    Ok((TargetBelief { probs: post }, evidence))
}

/// One Bayes step for one target: predict through `table`, weight by the
/// likelihood of `z` under the post-action fov, normalize.
///
/// Returns the posterior and the evidence η⁻¹.
pub fn update(
    belief: &TargetBelief,
    table: &TransitionTable,
    z: Observation,
    fov: &JointFov,
) -> Result<(TargetBelief, f64)> {
    let predicted = predict(belief, table);
    correct(&predicted, table.space(), z, fov)
}

/// B = ∏ b_k ∏ δ_ĉ.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBelief {
    pub targets: Vec<TargetBelief>,
    pub cameras: JointCameraState,
}

impl JointBelief {
    pub fn new(targets: Vec<TargetBelief>, cameras: JointCameraState) -> Self {
        JointBelief { targets, cameras }
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }
}

/// Advances the cameras by `action` and updates every target independently.
pub fn joint_update(
    belief: &JointBelief,
    table: &TransitionTable,
    observations: &[Observation],
    action: &JointAction,
    cameras: &CameraNetwork,
    exec: Execution,
) -> Result<JointBelief> {
    if observations.len() != belief.targets.len() {
        return Err(Error::config(format!(
            "{} observations for {} targets",
            observations.len(),
            belief.targets.len()
        )));
    }
    let next_cams = cameras.apply_action(&belief.cameras, action)?;
    let fov = cameras.joint_fov(&next_cams)?;
    let updated = par::map_range(exec, belief.targets.len(), |k| {
        update(&belief.targets[k], table, observations[k], &fov).map(|(b, _)| b)
    });
    Ok(JointBelief {
        targets: updated.into_iter().collect::<Result<_>>()?,
        cameras: next_cams,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{CameraModel, GridMap};
    use crate::motion::MotionParams;

    // 3-location line world, one direction-velocity combination per location
    // collapsed by using an identity table.
    fn line3() -> (StateSpace, CameraNetwork) {
        let space = StateSpace::new(3, 1);
        let net = CameraNetwork::new(vec![CameraModel::new(0, vec![vec![0]]).unwrap()], 3).unwrap();
        (space, net)
    }

    /// Belief uniform over location only (direction 0, velocity 0).
    fn loc_uniform(space: StateSpace) -> TargetBelief {
        let mut p = vec![0.0; space.len()];
        for l in 0..space.num_locations {
            p[space.index(TargetState { loc: l, dir: 0, vel: 0 })] = 1.0 / space.num_locations as f64;
        }
        TargetBelief::from_probs(p).unwrap()
    }

    #[test]
    fn predict_identity_and_delta() {
        let space = StateSpace::new(4, 1);
        let b = TargetBelief::uniform(space);
        assert_eq!(predict(&b, &TransitionTable::identity(space)), b.probs);

        let rows: Vec<_> = (0..space.len()).map(|t| vec![((t + 9) % space.len(), 1.0)]).collect();
        let table = TransitionTable::from_rows(space, rows).unwrap();
        let d = TargetBelief::delta(space, space.state(3));
        let p = predict(&d, &table);
        assert_eq!(p[12], 1.0);
        assert_eq!(p.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn predict_matches_dense_product() {
        // 3 states reachable through a hand-built chain on a 3x1 single-velocity space
        let space = StateSpace::new(3, 1);
        let n = space.len();
        let mut rows: Vec<Vec<(usize, f64)>> = (0..n).map(|t| vec![(t, 1.0)]).collect();
        rows[0] = vec![(0, 0.5), (8, 0.5)];
        rows[8] = vec![(8, 0.2), (16, 0.8)];
        rows[16] = vec![(0, 0.3), (16, 0.7)];
        let table = TransitionTable::from_rows(space, rows.clone()).unwrap();
        let mut probs = vec![0.0; n];
        for t in [0, 8, 16] {
            probs[t] = 1.0 / 3.0;
        }
        let b = TargetBelief::from_probs(probs.clone()).unwrap();
        let got = predict(&b, &table);

        let mut dense = vec![vec![0.0; n]; n];
        for (t, row) in rows.iter().enumerate() {
            for &(t2, p) in row {
                dense[t][t2] = p;
            }
        }
        for t2 in 0..n {
            let want: f64 = (0..n).map(|t| dense[t][t2] * probs[t]).sum();
            assert!((got[t2] - want).abs() < 1e-15);
        }
        assert!((got[0] - 0.8 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn consistent_direct_observation() {
        let (space, net) = line3();
        let fov = net.joint_fov(&JointCameraState(vec![0])).unwrap();
        let t = TargetState { loc: 0, dir: 3, vel: 0 };
        let b = TargetBelief::delta(space, t);
        let (post, evidence) = update(&b, &TransitionTable::identity(space), Observation::At(0), &fov).unwrap();
        assert_eq!(post, b);
        assert_eq!(evidence, 1.0);
    }

    #[test]
    fn null_observation_line_world() {
        let (space, net) = line3();
        let fov = net.joint_fov(&JointCameraState(vec![0])).unwrap();
        let b = loc_uniform(space);
        let (post, evidence) = update(&b, &TransitionTable::identity(space), Observation::Null, &fov).unwrap();
        assert_eq!(post.location_marginal(space), vec![0.0, 0.5, 0.5]);
        assert!((evidence - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn impossible_observation_conflicts() {
        let (space, net) = line3();
        let fov = net.joint_fov(&JointCameraState(vec![0])).unwrap();
        let b = TargetBelief::uniform(space);
        let err = update(&b, &TransitionTable::identity(space), Observation::At(2), &fov).unwrap_err();
        match err {
            Error::BeliefConflict { observation, cameras } => {
                assert_eq!(observation, Observation::At(2));
                assert_eq!(cameras, JointCameraState(vec![0]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn joint_update_empty_and_independent() {
        let (space, net) = line3();
        let net2 = CameraNetwork::new(vec![CameraModel::new(0, vec![vec![0], vec![1, 2]]).unwrap()], 3).unwrap();
        let table = TransitionTable::identity(space);
        let empty = JointBelief::new(vec![], JointCameraState(vec![0]));
        let next = joint_update(&empty, &table, &[], &JointAction(vec![1]), &net2, Execution::Sequential).unwrap();
        assert!(next.targets.is_empty());
        assert_eq!(next.cameras, JointCameraState(vec![1]));

        let b0 = loc_uniform(space);
        let b1 = TargetBelief::delta(space, TargetState { loc: 1, dir: 0, vel: 0 });
        let jb = JointBelief::new(vec![b0.clone(), b1.clone()], JointCameraState(vec![0]));
        let z = [Observation::Null, Observation::Null];
        let next = joint_update(&jb, &table, &z, &JointAction(vec![0]), &net, Execution::Parallel).unwrap();
        let fov = net.joint_fov(&JointCameraState(vec![0])).unwrap();
        assert_eq!(next.targets[0], update(&b0, &table, z[0], &fov).unwrap().0);
        assert_eq!(next.targets[1], update(&b1, &table, z[1], &fov).unwrap().0);
    }

    #[test]
    fn initial_modes() {
        let map = GridMap::open(2, 2).unwrap();
        let params = MotionParams { velocities: vec![1.0], nominal_velocity: 1.0, ..Default::default() };
        let space = StateSpace::new(map.num_locations(), params.velocities.len());
        let u = TargetBelief::initial(space, InitialBelief::Uniform).unwrap();
        assert!(u.probs().iter().all(|&p| p == 1.0 / 32.0));
        let t = TargetState { loc: 2, dir: 5, vel: 0 };
        let d = TargetBelief::initial(space, InitialBelief::At(t)).unwrap();
        assert_eq!(d.map_state(), space.index(t));
        assert!(TargetBelief::initial(space, InitialBelief::At(TargetState { loc: 4, dir: 0, vel: 0 })).is_err());
    }

    #[test]
    fn top_k_orders_by_mass() {
        let b = TargetBelief::from_probs(vec![0.1, 0.4, 0.0, 0.4, 0.1]).unwrap();
        assert_eq!(b.top_k(3), vec![(1, 0.4), (3, 0.4), (0, 0.1)]);
    }
}
