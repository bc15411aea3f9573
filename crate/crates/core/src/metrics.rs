//! PercentObs, multi-seed aggregation, and the planner scaling benchmark.

use std::time::Instant;

use serde::Serialize;

use crate::belief::{JointBelief, TargetBelief};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::planner::Planner;
use crate::sim::{RunRecord, World};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub controller: String,
    pub seed: u64,
    pub m_total: usize,
    pub tau: usize,
    pub percent_obs: f64,
    pub per_step_obs: Vec<usize>,
}

/// PercentObs = 100 / (τ M_tot) · Σ_i M_obs^i.
pub fn percent_obs_counts(per_step_obs: &[usize], m_total: usize) -> Result<f64> {
    if per_step_obs.is_empty() {
        return Err(Error::UndefinedMetric("PercentObs needs at least one step"));
    }
    if m_total == 0 {
        return Err(Error::UndefinedMetric("PercentObs needs at least one target"));
    }
    let total: usize = per_step_obs.iter().sum();
    Ok(100.0 * total as f64 / (per_step_obs.len() * m_total) as f64)
}

pub fn percent_obs(record: &RunRecord) -> Result<f64> {
    percent_obs_counts(&record.m_obs(), record.num_targets)
}

pub fn summarize(record: &RunRecord) -> Result<MetricSummary> {
    Ok(MetricSummary {
        controller: record.controller.clone(),
        seed: record.seed,
        m_total: record.num_targets,
        tau: record.tau(),
        percent_obs: percent_obs(record)?,
        per_step_obs: record.m_obs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

pub fn aggregate_values(values: &[f64]) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::UndefinedMetric("cannot aggregate zero summaries"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Aggregate {
        count: values.len(),
        mean,
        stddev: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

pub fn aggregate(summaries: &[MetricSummary]) -> Result<Aggregate> {
    let values: Vec<f64> = summaries.iter().map(|s| s.percent_obs).collect();
    aggregate_values(&values)
}

/// Ordinary least squares y = intercept + slope · x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        // a flat series is fit perfectly by a flat line
        1.0
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// What [`scaling_bench`] times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchTarget {
    /// The real planner over m targets.
    Planner,
    /// Control case: the planner on zero targets regardless of m.
    ConstantStub,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub m: usize,
    pub median_seconds: f64,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub fit: LinearFit,
    /// Observed minus fitted median per row.
    pub residuals: Vec<f64>,
}

impl ScalingReport {
    /// Median runtime at `m`, if it was measured.
    pub fn runtime(&self, m: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.m == m).map(|r| r.median_seconds)
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Times `Planner::plan` alone for each m in `m_values` with uniform target
/// beliefs. Each m runs `repeats` times on a single worker; the first run is
/// a discarded warm-up and the rest are reduced to a median.
pub fn scaling_bench(world: &World, m_values: &[usize], repeats: usize, target: BenchTarget) -> Result<ScalingReport> {
    if m_values.len() < 3 {
        return Err(Error::config("scaling bench needs at least three m values"));
    }
    if m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("scaling bench m values must be strictly ascending"));
    }
    if repeats < 2 {
        return Err(Error::config("scaling bench needs at least two repeats"));
    }
    let planner = Planner::new(world.cameras.clone())?.with_execution(Execution::Sequential);
    let space = world.space();
    let cameras = world.cameras.initial_state();

    let rows = par::single_worker(|| {
        m_values
            .iter()
            .map(|&m| {
                let n = match target {
                    BenchTarget::Planner => m,
                    BenchTarget::ConstantStub => 0,
                };
                let belief = JointBelief::new(vec![TargetBelief::uniform(space); n], cameras.clone());
                let mut samples: Vec<f64> = (0..repeats)
                    .map(|_| {
                        let start = Instant::now();
                        let report = planner.plan(&belief, &world.table);
                        let elapsed = start.elapsed().as_secs_f64();
                        std::hint::black_box(report);
                        elapsed
                    })
                    .skip(1)
                    .collect();
                let med = median(&mut samples.clone());
                samples.shrink_to_fit();
                ScalingRow {
                    m,
                    median_seconds: med,
                    samples,
                }
            })
            .collect::<Vec<_>>()
    });

    let xs: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_seconds).collect();
    let fit = linear_fit(&xs, &ys);
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (fit.intercept + fit.slope * x))
        .collect();
    Ok(ScalingReport { rows, fit, residuals })
}
