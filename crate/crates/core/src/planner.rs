//! One-step lookahead camera controller.
//!
//! The expected number of targets observed after a joint action decomposes
//! into a sum of per-target terms, each needing only that target's predicted
//! belief. Planning is therefore O(|𝒜| |Ż| |𝒯| m): linear in the number of
//! targets. [`value_bruteforce`] evaluates the same objective by enumerating
//! every joint observation and exists to check the decomposition.

use serde::Serialize;

use crate::belief::{self, predict, JointBelief, TargetBelief};
use crate::error::{Error, Result};
use crate::gridworld::{CameraNetwork, JointAction, JointCameraState, JointFov};
use crate::motion::{StateSpace, TargetState, TransitionTable};
use crate::par::{self, Execution};
use crate::sensing::{likelihood, observation_space, Observation};

/// Guard on |Ż|^m for [`value_bruteforce`].
pub const BRUTEFORCE_LIMIT: u128 = 1_000_000;

/// R̃(t, C): 1 when the target's location is covered.
#[inline]
pub fn reward_state(t: TargetState, fov: &JointFov) -> f64 {
    if fov.contains(t.loc) {
        1.0
    } else {
        0.0
    }
}

/// R̃(b, C): belief mass on covered locations.
pub fn reward_belief(b: &TargetBelief, space: StateSpace, fov: &JointFov) -> f64 {
    let block = space.block();
    fov.locs()
        .iter()
        .map(|&l| b.probs()[l * block..(l + 1) * block].iter().sum::<f64>())
        .sum()
}

/// Ṽ(b, C') computed from the predicted belief Σ_t P(t'|t) b(t).
///
/// Evaluates Σ_{z ∈ fov(C')} Σ_{t'} R̃(t', C') P(z | t'_l, C') p(t'). For
/// z = cell(x) the likelihood is zero outside the block of states at x, so
/// the inner sum runs over that block only.
pub fn target_value_predicted(predicted: &[f64], space: StateSpace, fov: &JointFov) -> f64 {
    let block = space.block();
    let mut total = 0.0;
    for &z in fov.locs() {
        let obs = Observation::At(z);
        let base = z * block;
        for (i, &p) in predicted[base..base + block].iter().enumerate() {
            let t = space.state(base + i);
            total += reward_state(t, fov) * likelihood(obs, t.loc, fov) * p;
        }
    }
    total
}

/// Ṽ(b, C'): expected contribution of one target if the cameras end in `fov`.
pub fn target_value(b: &TargetBelief, table: &TransitionTable, fov: &JointFov) -> f64 {
    target_value_predicted(&predict(b, table), table.space(), fov)
}

/// V(B, A) = Σ_k Ṽ(b_k, τ(Ĉ, A)).
pub fn value(
    belief: &JointBelief,
    action: &JointAction,
    table: &TransitionTable,
    cameras: &CameraNetwork,
) -> Result<f64> {
    let next = cameras.apply_action(&belief.cameras, action)?;
    let fov = cameras.joint_fov(&next)?;
    Ok(belief.targets.iter().map(|b| target_value(b, table, &fov)).sum())
}

/// V(B, A) = Σ_Z R(B') P(Z | B, A) by enumerating Ż^m.
///
/// Each posterior b'_k and evidence η_k⁻¹ comes from [`belief::update`]. The
/// probability of a φ report aggregates the uncovered locations (see
/// [`crate::sensing::report_probability`]), so that P(Z | B, A) is a distribution over Ż^m.
/// Zero-evidence observations are skipped.
pub fn value_bruteforce(
    belief: &JointBelief,
    action: &JointAction,
    table: &TransitionTable,
    cameras: &CameraNetwork,
) -> Result<f64> {
    let m = belief.targets.len();
    let symbols: Vec<Observation> = observation_space(table.space().num_locations).collect();
    let size = (symbols.len() as u128)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX);
    if size > BRUTEFORCE_LIMIT {
        return Err(Error::EnumerationTooLarge {
            size,
            limit: BRUTEFORCE_LIMIT,
        });
    }
    let next = cameras.apply_action(&belief.cameras, action)?;
    let fov = cameras.joint_fov(&next)?;
    let space = table.space();

    // Per target and symbol: (R̃(b'_k), P(z_k | b_k, C')), or None when z_k is impossible.
    let mut outcomes: Vec<Vec<Option<(f64, f64)>>> = Vec::with_capacity(m);
    for b in &belief.targets {
        let row = symbols
            .iter()
            .map(|&z| match belief::update(b, table, z, &fov) {
                Ok((post, eta_inv)) => {
                    // φ's likelihood is 1/|fov(C')ᶜ| per uncovered location.
                    let prob = match z {
                        Observation::Null => eta_inv * fov.complement_size() as f64,
                        Observation::At(_) => eta_inv,
                    };
                    Ok(Some((reward_belief(&post, space, &fov), prob)))
                }
                Err(Error::BeliefConflict { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        outcomes.push(row);
    }

    let mut total = 0.0;
    let mut idx = vec![0usize; m];
    for _ in 0..size {
        let mut evidence = 1.0;
        let mut reward = 0.0;
        let mut possible = true;
        for (k, &j) in idx.iter().enumerate() {
            match outcomes[k][j] {
                Some((r, p)) => {
                    evidence *= p;
                    reward += r;
                }
                None => {
                    possible = false;
                    break;
                }
            }
        }
        if possible {
            total += reward * evidence;
        }
        for k in (0..m).rev() {
            idx[k] += 1;
            if idx[k] < symbols.len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueReport {
    pub best_action: JointAction,
    pub best_value: f64,
    /// Every joint action in lexicographic order with its value.
    pub per_action_values: Vec<(JointAction, f64)>,
}

/// Exhaustive argmax over the joint action space.
#[derive(Debug, Clone)]
pub struct Planner {
    cameras: CameraNetwork,
    actions: Vec<JointAction>,
    fovs: Vec<JointFov>,
    reward_scale: f64,
    exec: Execution,
}

impl Planner {
    pub fn new(cameras: CameraNetwork) -> Result<Self> {
        let actions = cameras.joint_actions();
        // Camera moves are "go to state", so the post-action fov depends on A only.
        let fovs = actions
            .iter()
            .map(|a| cameras.joint_fov(&JointCameraState(a.0.clone())))
            .collect::<Result<_>>()?;
        Ok(Planner {
            cameras,
            actions,
            fovs,
            reward_scale: 1.0,
            exec: Execution::default(),
        })
    }

    /// Multiplies every reward by `scale` (> 0).
    pub fn with_reward_scale(mut self, scale: f64) -> Self {
        self.reward_scale = scale;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn cameras(&self) -> &CameraNetwork {
        &self.cameras
    }

    pub fn actions(&self) -> &[JointAction] {
        &self.actions
    }

    /// Post-action fov of each joint action, aligned with [`Planner::actions`].
    pub fn fovs(&self) -> &[JointFov] {
        &self.fovs
    }

    /// Predicted belief of every target; independent of the action.
    pub fn predict_all(&self, belief: &JointBelief, table: &TransitionTable) -> Vec<Vec<f64>> {
        par::map_slice(self.exec, &belief.targets, |b| predict(b, table))
    }

    /// π*(B) = argmax_A V(B, A). Ties go to the lexicographically smallest action.
    pub fn plan(&self, belief: &JointBelief, table: &TransitionTable) -> ValueReport {
        let predicted = self.predict_all(belief, table);
        self.plan_predicted(&predicted, table.space())
    }

    /// [`Planner::plan`] from already-predicted per-target beliefs.
    pub fn plan_predicted(&self, predicted: &[Vec<f64>], space: StateSpace) -> ValueReport {
        let values: Vec<f64> = par::map_slice(self.exec, &self.fovs, |fov| {
            let mut v = 0.0;
            for p in predicted {
                v += self.reward_scale * target_value_predicted(p, space, fov);
            }
            v
        });
        let mut best = 0;
        for (i, &v) in values.iter().enumerate() {
            if v > values[best] {
                best = i;
            }
        }
        ValueReport {
            best_action: self.actions[best].clone(),
            best_value: values[best],
            per_action_values: self.actions.iter().cloned().zip(values).collect(),
        }
    }
}
