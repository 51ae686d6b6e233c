//! Goodness of fit of D^z sampling against its target distribution.

use outlier_reduce::baseline::AnchorSet;
use outlier_reduce::instance::{ClusteringInstance, ConstraintSpec};
use outlier_reduce::metric::{MetricSpace, PointRef, Power};
use outlier_reduce::sampling::{dz_masses, dz_sample};

/// Upper 0.001 quantile of the chi-square distribution with 9 degrees of
/// freedom.
const CHI2_9DF_999: f64 = 27.877;

fn ten_points(power: Power) -> (ClusteringInstance, AnchorSet) {
    // anchor at 0, clients at 1..=10, plus one client on the anchor
    let mut coords: Vec<Vec<f64>> = (1..=10).map(|x| vec![f64::from(x)]).collect();
    coords.push(vec![0.0]);
    let space = MetricSpace::euclidean(1, coords, power).unwrap();
    let clients: Vec<PointRef> = (0..11).map(PointRef).collect();
    let anchor = PointRef(10);
    let inst =
        ClusteringInstance::new(space, clients, vec![anchor], 1, 0, None, ConstraintSpec::Unconstrained).unwrap();
    let anchors = AnchorSet {
        centers: vec![anchor],
        anchor_cost: 0.0,
        shortfall: 0,
    };
    (inst, anchors)
}

fn chi_square(power: Power, seed: u64) -> (f64, usize) {
    let (inst, anchors) = ten_points(power);
    let masses = dz_masses(&inst, &anchors);
    let total: f64 = masses.iter().sum();
    let draws = 100_000;
    let pool = dz_sample(&inst, &anchors, draws, seed).unwrap();
    let mut counts = vec![0usize; masses.len()];
    for p in &pool.draws {
        counts[p.0] += 1;
    }
    let stat = masses
        .iter()
        .zip(&counts)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &c)| {
            let expected = draws as f64 * w / total;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    (stat, counts[10])
}

#[test]
fn draws_fit_powered_distances() {
    for (power, seed) in [(Power::Median, 11), (Power::Means, 12)] {
        let (stat, zero_mass_draws) = chi_square(power, seed);
        assert!(stat < CHI2_9DF_999, "{power:?}: chi-square {stat}");
        assert_eq!(zero_mass_draws, 0);
    }
}
