//! D^z sampling of the candidate far-outlier pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::AnchorSet;
use crate::instance::ClusteringInstance;
use crate::metric::PointRef;

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("beta must be at least 1, got {0}")]
    BadBeta(f64),
    #[error("cannot sample from an empty client set")]
    EmptyClients,
    #[error("cannot sample without anchor centers")]
    NoAnchors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Random,
    /// The pool is every client; far outliers are always captured.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePool {
    /// Draws in order, with repetition.
    pub draws: Vec<PointRef>,
    /// Sorted, deduplicated view of `draws`.
    pub distinct: Vec<PointRef>,
    pub mode: SamplingMode,
}

impl SamplePool {
    pub fn exhaustive(instance: &ClusteringInstance) -> Self {
        let mut distinct = instance.clients().to_vec();
        distinct.sort();
        Self {
            draws: instance.clients().to_vec(),
            distinct,
            mode: SamplingMode::Exhaustive,
        }
    }

    pub fn contains(&self, p: PointRef) -> bool {
        self.distinct.binary_search(&p).is_ok()
    }
}

/// `ceil(4 β m ln(max(m, 2)) / ε)`, and 0 when `m = 0`.
pub fn sample_size(beta: f64, m: usize, epsilon: f64) -> Result<usize, SamplingError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(SamplingError::BadEpsilon(epsilon));
    }
    if beta.is_nan() || beta < 1.0 {
        return Err(SamplingError::BadBeta(beta));
    }
    if m == 0 {
        return Ok(0);
    }
    let mf = m as f64;
    Ok((4.0 * beta * mf * mf.max(2.0).ln() / epsilon).ceil() as usize)
}

/// Sampling masses `D^z(x, C)` in client order.
pub fn dz_masses(instance: &ClusteringInstance, anchors: &AnchorSet) -> Vec<f64> {
    let space = instance.space();
    instance
        .clients()
        .iter()
        .map(|&x| space.nearest(x, &anchors.centers).map_or(0.0, |(d, _)| d))
        .collect()
}

/// Draws `count` clients independently with replacement, each with
/// probability `D^z(x, C) / cost(C)`; uniformly when every mass is zero.
pub fn dz_sample(
    instance: &ClusteringInstance,
    anchors: &AnchorSet,
    count: usize,
    seed: u64,
) -> Result<SamplePool, SamplingError> {
    let clients = instance.clients();
    if clients.is_empty() {
        return Err(SamplingError::EmptyClients);
    }
    if anchors.centers.is_empty() {
        return Err(SamplingError::NoAnchors);
    }
    let masses = dz_masses(instance, anchors);
    let mut prefix = Vec::with_capacity(masses.len());
    let mut acc = 0.0;
    for &w in &masses {
        acc += w;
        prefix.push(acc);
    }
    let total = acc;
    let last_positive = masses.iter().rposition(|&w| w > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<PointRef> = (0..count)
        .map(|_| match last_positive {
            Some(last) => {
                let r = rng.random::<f64>() * total;
                let i = prefix.partition_point(|&c| c <= r).min(last);
                clients[i]
            }
            None => clients[rng.random_range(0..clients.len())],
        })
        .collect();
    let mut distinct = draws.clone();
    distinct.sort();
    distinct.dedup();
    Ok(SamplePool {
        draws,
        distinct,
        mode: SamplingMode::Random,
    })
}
