//! Random small fixtures and joint-state enumeration oracles.
//!
//! The oracles never call the factored code paths: they enumerate the joint
//! target state 𝒯^m, apply the product transition and product likelihood
//! directly, and marginalize at the end.

#![allow(dead_code)]

use std::collections::HashMap;

use camnet::belief::TargetBelief;
use camnet::gridworld::{CameraModel, CameraNetwork, GridMap, JointAction, JointCameraState};
use camnet::motion::{MotionParams, TransitionTable};
use camnet::sim::World;
use camnet::JointBelief;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub world: World,
    pub belief: JointBelief,
}

/// Map ≤ 4x4, 1–2 cameras with 1–3 states each, 1–2 targets with sparse
/// random beliefs.
pub fn random_fixture(rng: &mut ChaCha8Rng) -> Fixture {
    let w = rng.random_range(2..=4);
    let h = rng.random_range(2..=4);
    let map = loop {
        let blocked: Vec<usize> = (0..w * h).filter(|_| rng.random_bool(0.2)).collect();
        if let Ok(map) = GridMap::new(w, h, blocked) {
            if map.num_locations() >= 2 {
                break map;
            }
        }
    };
    let n = map.num_locations();
    let velocity_sets: [&[f64]; 3] = [&[1.0], &[1.0, 1.5], &[0.5, 1.25]];
    let velocities = velocity_sets[rng.random_range(0..3)].to_vec();
    let params = MotionParams {
        sigma_d: rng.random_range(15.0..90.0),
        sigma_v: rng.random_range(0.2..1.0),
        nominal_velocity: velocities[0],
        velocities,
    };
    let num_cams = rng.random_range(1..=2);
    let cams: Vec<CameraModel> = (0..num_cams)
        .map(|id| {
            let states = rng.random_range(1..=3);
            let fovs = (0..states)
                .map(|_| (0..n).filter(|_| rng.random_bool(0.35)).collect())
                .collect();
            CameraModel::new(id, fovs).unwrap()
        })
        .collect();
    let cameras = CameraNetwork::new(cams, n).unwrap();
    let initial = JointCameraState(
        cameras
            .cameras()
            .iter()
            .map(|c| rng.random_range(0..c.num_states()))
            .collect(),
    );
    let world = World::new(map, cameras, params).unwrap();
    let space = world.space();
    let m = rng.random_range(1..=2);
    let targets = (0..m).map(|_| sparse_belief(rng, space.len(), 6)).collect();
    Fixture {
        world,
        belief: JointBelief::new(targets, initial),
    }
}

pub fn sparse_belief(rng: &mut ChaCha8Rng, len: usize, max_support: usize) -> TargetBelief {
    let k = rng.random_range(1..=max_support.min(len));
    let mut probs = vec![0.0; len];
    for i in sample(rng, len, k) {
        probs[i] = rng.random_range(0.05..1.0);
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    TargetBelief::from_probs(probs).unwrap()
}

/// Coverage mask of the joint fov, computed from the camera definitions.
pub fn coverage(cameras: &CameraNetwork, state: &JointCameraState) -> Vec<bool> {
    let mut mask = vec![false; cameras.num_locations()];
    for (cam, &s) in cameras.cameras().iter().zip(&state.0) {
        for &l in cam.fov(s).unwrap() {
            mask[l] = true;
        }
    }
    mask
}

/// Observation symbol: `Some(loc)` or `None` for φ.
pub type Symbol = Option<usize>;

/// P(z | loc, C) exactly as defined: identity inside the fov, φ with
/// 1/|complement| outside it.
pub fn likelihood(z: Symbol, loc: usize, mask: &[bool]) -> f64 {
    let uncovered = mask.iter().filter(|c| !**c).count();
    match z {
        Some(x) => f64::from(u8::from(x == loc && mask[loc])),
        None if mask[loc] => 0.0,
        None => 1.0 / uncovered as f64,
    }
}

/// Probability of the φ report aggregated over the uncovered locations.
pub fn report_probability(z: Symbol, loc: usize, mask: &[bool]) -> f64 {
    let uncovered = mask.iter().filter(|c| !**c).count();
    match z {
        Some(_) => likelihood(z, loc, mask),
        None => likelihood(z, loc, mask) * uncovered as f64,
    }
}

fn support(b: &TargetBelief) -> Vec<(usize, f64)> {
    b.probs()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(i, p)| (i, *p))
        .collect()
}

fn product<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Σ_T B(T) ∏_k P(t'_k | t_k) over the joint state space.
pub fn joint_predicted(belief: &JointBelief, table: &TransitionTable) -> HashMap<Vec<usize>, f64> {
    let supports: Vec<Vec<(usize, f64)>> = belief.targets.iter().map(support).collect();
    let mut out: HashMap<Vec<usize>, f64> = HashMap::new();
    for joint in product(&supports) {
        let prior: f64 = joint.iter().map(|(_, p)| p).product();
        let rows: Vec<Vec<(usize, f64)>> = joint
            .iter()
            .map(|&(t, _)| {
                let (next, prob) = table.row(t);
                next.iter().map(|&n| n as usize).zip(prob.iter().copied()).collect()
            })
            .collect();
        for succ in product(&rows) {
            let key: Vec<usize> = succ.iter().map(|(t, _)| *t).collect();
            let p: f64 = succ.iter().map(|(_, q)| q).product();
            *out.entry(key).or_default() += prior * p;
        }
    }
    out
}

pub struct JointPosterior {
    /// Per-target marginals over 𝒯.
    pub marginals: Vec<Vec<f64>>,
    pub evidence: f64,
}

/// Bayes posterior over 𝒯^m after the joint observation `z`, marginalized per
/// target. `None` when `z` has zero probability.
pub fn joint_posterior(
    predicted: &HashMap<Vec<usize>, f64>,
    z: &[Symbol],
    mask: &[bool],
    num_states: usize,
    block: usize,
) -> Option<JointPosterior> {
    let m = z.len();
    let mut marginals = vec![vec![0.0; num_states]; m];
    let mut evidence = 0.0;
    for (joint, &p) in predicted {
        let like: f64 = joint
            .iter()
            .zip(z)
            .map(|(&t, &zk)| likelihood(zk, t / block, mask))
            .product();
        let w = p * like;
        if w > 0.0 {
            evidence += w;
            for (k, &t) in joint.iter().enumerate() {
                marginals[k][t] += w;
            }
        }
    }
    if evidence <= 0.0 {
        return None;
    }
    for row in &mut marginals {
        row.iter_mut().for_each(|x| *x /= evidence);
    }
    Some(JointPosterior { marginals, evidence })
}

/// Every joint observation in Ż^m.
pub fn joint_observations(num_locations: usize, m: usize) -> Vec<Vec<Symbol>> {
    let symbols: Vec<Symbol> = (0..num_locations).map(Some).chain([None]).collect();
    product(&vec![symbols; m])
}

/// V(B, A) = Σ_Z P(Z | B, A) Σ_T' B'_Z(T') Σ_k R̃(t'_k, C') over the joint
/// state space, with the aggregated φ report as the observation distribution.
pub fn value_oracle(fixture: &Fixture, action: &JointAction) -> f64 {
    let world = &fixture.world;
    let block = world.space().block();
    let next = JointCameraState(action.0.clone());
    let mask = coverage(&world.cameras, &next);
    let predicted = joint_predicted(&fixture.belief, &world.table);

    // Group by joint report: P(Z) and Σ_T' p(T') P(Z|T') R(T').
    let mut by_report: HashMap<Vec<Symbol>, (f64, f64)> = HashMap::new();
    for (joint, &p) in &predicted {
        let locs: Vec<usize> = joint.iter().map(|t| t / block).collect();
        let reward = locs.iter().filter(|&&l| mask[l]).count() as f64;
        let candidates: Vec<Vec<Symbol>> = locs.iter().map(|&l| vec![Some(l), None]).collect();
        for z in product(&candidates) {
            let q: f64 = z
                .iter()
                .zip(&locs)
                .map(|(&zk, &l)| report_probability(zk, l, &mask))
                .product();
            if q > 0.0 {
                let e = by_report.entry(z).or_default();
                e.0 += p * q;
                e.1 += p * q * reward;
            }
        }
    }
    by_report
        .values()
        .map(|&(pz, weighted)| pz * (weighted / pz))
        .sum()
}
