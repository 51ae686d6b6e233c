//! Capacitated k-median with outliers: a far point is discarded rather than
//! overloading a center.
//!
//!     cargo run --example capacitated_outliers

use outlier_reduce::instance::ClusteringInstance;
use outlier_reduce::sampling::SamplingMode;
use outlier_reduce::{run_reduction, ConstraintSpec, ExactSolver, MetricSpace, PointRef, Power, ReductionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let xs = [0.0, 1.0, 2.0, 3.0, 20.0, 21.0, 22.0, 95.0];
    let space = MetricSpace::euclidean(1, xs.iter().map(|&x| vec![x]).collect(), Power::Median)?;
    let points: Vec<PointRef> = (0..xs.len()).map(PointRef).collect();
    // every facility serves at most 4 clients
    let constraint = ConstraintSpec::Capacitated {
        capacities: vec![4; xs.len()],
    };
    let instance = ClusteringInstance::new(space, points.clone(), points, 2, 1, None, constraint)?;

    let config = ReductionConfig {
        sampling: SamplingMode::Exhaustive,
        ..ReductionConfig::from_seed(1)
    };
    let out = run_reduction(&instance, &config, &ExactSolver::default())?;
    for (center, cluster) in out.solution.centers.iter().zip(&out.solution.clusters) {
        let members: Vec<f64> = cluster.iter().map(|p| xs[p.0]).collect();
        println!("center at {:>4}: {members:?}", xs[center.0]);
    }
    let outliers: Vec<f64> = out.solution.outliers.iter().map(|p| xs[p.0]).collect();
    println!("outliers: {outliers:?}, cost {}", out.solution.cost);
    println!("chosen Y = {:?}, tau = {:?}", out.chosen_y, out.chosen_tau.counts);
    Ok(())
}
