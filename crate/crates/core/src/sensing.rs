//! Per-target observation model P(z | t_l, C).

use std::fmt;

use rand::Rng;

use crate::gridworld::{JointFov, Loc};

/// What the cameras report for one target: its location, or φ when it is
/// outside the joint field of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observation {
    /// Target seen at this location index.
    At(Loc),
    /// φ
    Null,
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::At(l) => write!(f, "loc {l}"),
            Observation::Null => f.write_str("phi"),
        }
    }
}

/// P(z | t_l, C).
///
/// Inside the joint fov the observation is the true location with certainty.
/// Outside it, φ has likelihood 1/|fov(C)ᶜ|. Everything else is 0.
#[inline]
pub fn likelihood(z: Observation, loc: Loc, fov: &JointFov) -> f64 {
    match z {
        Observation::At(x) => {
            if x == loc && fov.contains(loc) {
                1.0
            } else {
                0.0
            }
        }
        Observation::Null => {
            if fov.contains(loc) {
                0.0
            } else {
                // complement is non-empty since loc is in it
                1.0 / fov.complement_size() as f64
            }
        }
    }
}

/// Probability of *reporting* symbol `z`.
///
/// φ stands for the event "the target is at one of the |fov(C)ᶜ| uncovered
/// locations", each carrying likelihood 1/|fov(C)ᶜ|; summing those gives the
/// probability of the φ report. Under this reading the report distribution
/// sums to one over Ż for every location. It differs from [`likelihood`] only
/// by a constant factor on φ, so posteriors are identical under either.
#[inline]
pub fn report_probability(z: Observation, loc: Loc, fov: &JointFov) -> f64 {
    match z {
        Observation::At(_) => likelihood(z, loc, fov),
        Observation::Null => likelihood(z, loc, fov) * fov.complement_size() as f64,
    }
}

/// Generative sensing used by the simulator. Deterministic; the generator is
/// accepted so noisy sensors can share the signature.
pub fn sample_observation<R: Rng + ?Sized>(loc: Loc, fov: &JointFov, _rng: &mut R) -> Observation {
    if fov.contains(loc) {
        Observation::At(loc)
    } else {
        Observation::Null
    }
}

/// Ż = 𝒯_l ∪ {φ}, locations first.
pub fn observation_space(num_locations: usize) -> impl Iterator<Item = Observation> {
    (0..num_locations)
        .map(Observation::At)
        .chain(std::iter::once(Observation::Null))
}
