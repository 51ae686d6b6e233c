//! Ulam k-median over permutations with the local-search plugin.
//!
//!     cargo run --example ulam_median

use outlier_reduce::instance::ClusteringInstance;
use outlier_reduce::metric::ulam_distance;
use outlier_reduce::{run_reduction, ConstraintSpec, LocalSearchSolver, MetricSpace, PointRef, Power, ReductionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let perms: Vec<Vec<u32>> = vec![
        vec![1, 2, 3, 4, 5, 6],
        vec![2, 1, 3, 4, 5, 6],
        vec![1, 2, 4, 3, 5, 6],
        vec![1, 3, 2, 4, 5, 6],
        vec![6, 5, 4, 3, 2, 1],
        vec![5, 6, 4, 3, 2, 1],
        vec![6, 5, 4, 2, 3, 1],
        vec![3, 6, 1, 5, 2, 4],
    ];
    println!("d(p0, p4) = {}", ulam_distance(&perms[0], &perms[4]));
    let space = MetricSpace::ulam(6, perms.clone(), Power::Median)?;
    let points: Vec<PointRef> = (0..perms.len()).map(PointRef).collect();
    let instance = ClusteringInstance::new(space, points.clone(), points, 2, 1, None, ConstraintSpec::Unconstrained)?;

    let out = run_reduction(&instance, &ReductionConfig::from_seed(3), &LocalSearchSolver)?;
    for (center, cluster) in out.solution.centers.iter().zip(&out.solution.clusters) {
        println!("median {:?} serves {} permutations", perms[center.0], cluster.len());
    }
    for p in &out.solution.outliers {
        println!("outlier {:?}", perms[p.0]);
    }
    println!("cost {}", out.solution.cost);
    Ok(())
}
