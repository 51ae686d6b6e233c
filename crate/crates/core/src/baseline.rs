//! Constant-factor unconstrained solver producing the anchor centers.
//!
//! D^z seeding followed by single-swap local search. The local search only
//! accepts a swap that shrinks the cost by a factor of at least
//! `1 - 1/(10 p)` for `p` centers, and stops after `100 p` accepted swaps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::ClusteringInstance;
use crate::metric::{MetricSpace, PointRef};

/// Facilities examined when picking the first seed.
const FIRST_CENTER_SAMPLE: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("asked for {asked} centers but only {available} facilities exist")]
    TooManyCenters { asked: usize, available: usize },
    #[error("at least one center is required")]
    NoCenters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSet {
    pub centers: Vec<PointRef>,
    /// `Σ_x min_{c} D^z(x, c)` over all clients.
    pub anchor_cost: f64,
    /// How many of the requested `k + m` centers could not be placed
    /// because the facility set is smaller.
    pub shortfall: usize,
}

/// Default approximation factor assumed for this solver: 5 for k-median,
/// 25 for k-means.
pub fn default_beta(z: u32) -> f64 {
    if z == 1 {
        5.0
    } else {
        25.0
    }
}

pub fn anchor_cost_of(instance: &ClusteringInstance, centers: &[PointRef]) -> Result<f64, BaselineError> {
    if centers.is_empty() {
        return Err(BaselineError::NoCenters);
    }
    Ok(assignment_cost(instance.space(), instance.clients(), centers))
}

fn assignment_cost(space: &MetricSpace, clients: &[PointRef], centers: &[PointRef]) -> f64 {
    clients
        .iter()
        .map(|&x| space.nearest(x, centers).map_or(0.0, |(d, _)| d))
        .sum()
}

/// Picks `count` distinct facilities by D^z seeding over `clients`.
///
/// The first center is the cheapest 1-median among a uniform sample of
/// facilities. Each further center is the nearest unused facility to a
/// client drawn with probability proportional to its powered distance to the
/// centers chosen so far.
pub(crate) fn dz_seed(
    space: &MetricSpace,
    clients: &[PointRef],
    facilities: &[PointRef],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<PointRef> {
    let count = count.min(facilities.len());
    if count == 0 {
        return Vec::new();
    }
    let mut used = vec![false; facilities.len()];
    let candidates: Vec<usize> = if facilities.len() <= FIRST_CENTER_SAMPLE {
        (0..facilities.len()).collect()
    } else {
        let mut picked = rand::seq::index::sample(rng, facilities.len(), FIRST_CENTER_SAMPLE).into_vec();
        picked.sort_unstable();
        picked
    };
    let first = candidates
        .iter()
        .copied()
        .map(|fi| {
            let c: f64 = clients.iter().map(|&x| space.dz(x, facilities[fi])).sum();
            (c, fi)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, fi)| fi)
        .unwrap_or(0);
    used[first] = true;
    let mut centers = vec![facilities[first]];
    let mut mass: Vec<f64> = clients.iter().map(|&x| space.dz(x, facilities[first])).collect();

    while centers.len() < count {
        let total: f64 = mass.iter().sum();
        let target = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in mass.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > r {
                    break;
                }
            }
            pick.map(|i| clients[i])
        } else {
            None
        };
        let next = match target {
            Some(x) => (0..facilities.len()).filter(|&fi| !used[fi]).min_by(|&a, &b| {
                space
                    .dz(x, facilities[a])
                    .total_cmp(&space.dz(x, facilities[b]))
                    .then(facilities[a].cmp(&facilities[b]))
            }),
            None => (0..facilities.len()).find(|&fi| !used[fi]),
        };
        let Some(fi) = next else { break };
        used[fi] = true;
        centers.push(facilities[fi]);
        for (w, &x) in mass.iter_mut().zip(clients) {
            *w = w.min(space.dz(x, facilities[fi]));
        }
    }
    centers
}

/// Runs the seeding and swap search for `num_centers` centers.
pub fn solve_unconstrained(
    instance: &ClusteringInstance,
    num_centers: usize,
    seed: u64,
) -> Result<AnchorSet, BaselineError> {
    let facilities = instance.facilities();
    if num_centers == 0 {
        return Err(BaselineError::NoCenters);
    }
    if num_centers > facilities.len() {
        return Err(BaselineError::TooManyCenters {
            asked: num_centers,
            available: facilities.len(),
        });
    }
    let space = instance.space();
    let clients = instance.clients();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = dz_seed(space, clients, facilities, num_centers, &mut rng);
    let mut current = assignment_cost(space, clients, &centers);

    let p = num_centers as f64;
    let factor = 1.0 - 1.0 / (10.0 * p);
    let cap = 100 * num_centers;
    for _ in 0..cap {
        if current <= 0.0 {
            break;
        }
        let mut best: Option<(f64, usize, PointRef)> = None;
        let mut trial = centers.clone();
        for i in 0..centers.len() {
            for &f in facilities {
                if centers.contains(&f) {
                    continue;
                }
                trial[i] = f;
                let c = assignment_cost(space, clients, &trial);
                if best.is_none_or(|(b, _, _)| c < b) {
                    best = Some((c, i, f));
                }
            }
            trial[i] = centers[i];
        }
        match best {
            Some((c, i, f)) if c < factor * current => {
                centers[i] = f;
                current = c;
            }
            _ => break,
        }
    }
    Ok(AnchorSet {
        centers,
        anchor_cost: current,
        shortfall: 0,
    })
}

/// Anchor set for the reduction: `k + m` centers, or all of `F` when the
/// facility set is smaller (recorded as a shortfall).
pub fn anchors_for(instance: &ClusteringInstance, seed: u64) -> AnchorSet {
    let wanted = instance.k() + instance.m();
    let available = instance.facilities().len();
    let count = wanted.min(available);
    if count < wanted {
        log::warn!("only {available} facilities for {wanted} anchor centers");
    }
    // count >= k >= 1 and count <= |F|, so this cannot fail
    let mut anchors = solve_unconstrained(instance, count, seed).expect("anchor count within facility set");
    anchors.shortfall = wanted - count;
    anchors
}
