//! Fair clustering: every cluster must keep each group's share within
//! bounds, and outliers are limited per group.
//!
//!     cargo run --example fair_labels

use outlier_reduce::instance::{ClusteringInstance, Fraction};
use outlier_reduce::sampling::SamplingMode;
use outlier_reduce::{run_reduction, ConstraintSpec, ExactSolver, MetricSpace, PointRef, Power, ReductionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // two spatial groups, each dominated by one label, plus a far point
    let coords = vec![
        vec![0.0, 0.0],
        vec![0.5, 0.2],
        vec![0.2, 0.6],
        vec![0.9, 0.1],
        vec![10.0, 10.0],
        vec![10.4, 9.8],
        vec![9.7, 10.3],
        vec![10.2, 10.5],
        vec![60.0, -40.0],
    ];
    let labels = vec![0, 0, 0, 1, 1, 1, 1, 0, 1];
    let space = MetricSpace::euclidean(2, coords, Power::Means)?;
    let points: Vec<PointRef> = (0..labels.len()).map(PointRef).collect();
    let half = Fraction::new(1, 4);
    let most = Fraction::new(3, 4);
    let constraint = ConstraintSpec::LabelFractions {
        alpha: vec![half, half],
        beta: vec![most, most],
    };
    let instance = ClusteringInstance::new(space, points.clone(), points, 2, 1, Some(labels.clone()), constraint)?;

    let config = ReductionConfig {
        sampling: SamplingMode::Exhaustive,
        ..ReductionConfig::from_seed(5)
    };
    let out = run_reduction(&instance, &config, &ExactSolver::default())?;
    for cluster in &out.solution.clusters {
        let ones = cluster.iter().filter(|p| labels[p.0] == 1).count();
        println!("cluster of {} points, {} with label 1", cluster.len(), ones);
    }
    println!(
        "outliers {:?}, cost {:.3}, {} iterations",
        out.solution.outliers, out.solution.cost, out.q
    );
    Ok(())
}
