//! The exact min-cost b-matching used to pick near outliers, with and
//! without per-label demands.
//!
//!     cargo run --example bmatching

use outlier_reduce::bmatching::{prune_left, solve_bmatching, BMatchingProblem};
use outlier_reduce::{MetricSpace, PointRef, Power};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // clients on a 2x3 grid, two anchors on the bottom row
    let coords = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![2.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 1.0],
        vec![2.0, 1.0],
        vec![0.5, 0.0],
        vec![2.0, -0.5],
    ];
    let space = MetricSpace::euclidean(2, coords, Power::Median)?;
    let left: Vec<PointRef> = (0..6).map(PointRef).collect();
    let right = vec![PointRef(6), PointRef(7)];
    let problem = BMatchingProblem::from_space(&space, left, right, vec![2, 1]);

    let plain = solve_bmatching(&problem)?;
    println!("unlabelled weight {} via {:?}", plain.total_weight, plain.edges);

    let labelled = problem
        .clone()
        .with_labels(vec![0, 0, 0, 1, 1, 1], vec![vec![1, 1], vec![0, 1]]);
    let fair = solve_bmatching(&labelled)?;
    println!("labelled weight {} via {:?}", fair.total_weight, fair.edges);

    let pruned = prune_left(&problem, problem.total_demand());
    println!(
        "pruning keeps {} of {} left vertices, weight {}",
        pruned.left.len(),
        problem.left.len(),
        solve_bmatching(&pruned)?.total_weight
    );
    Ok(())
}
