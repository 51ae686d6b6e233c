//! k-median with two outliers on a generated planar instance, compared to
//! the brute-force optimum.
//!
//!     cargo run --example basic_solve

use outlier_reduce::gen::{generate, GeneratorConfig};
use outlier_reduce::instance::validate_solution;
use outlier_reduce::oracle::{exact_outlier_opt, OracleBudget};
use outlier_reduce::{run_reduction, ExactSolver, ReductionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let generated = generate(&GeneratorConfig {
        n: 12,
        k: 2,
        m: 2,
        planted: true,
        seed: 42,
        ..GeneratorConfig::default()
    })?;
    let instance = generated.file.build(None)?;

    let config = ReductionConfig::from_seed(7);
    let outcome = run_reduction(&instance, &config, &ExactSolver::default())?;
    let solution = &outcome.solution;

    println!(
        "anchors: {} centers, cost {:.3}",
        outcome.anchors.centers.len(),
        outcome.anchors.anchor_cost
    );
    println!(
        "pool: {} draws, {} distinct points",
        outcome.pool.draws.len(),
        outcome.pool.distinct.len()
    );
    println!("iterations: {}", outcome.q);
    println!(
        "cost {:.4} with outliers {:?} (planted at positions {:?})",
        solution.cost, solution.outliers, generated.planted
    );
    assert!(validate_solution(&instance, solution).feasible);

    let opt = exact_outlier_opt(&instance, &OracleBudget::default())?;
    println!(
        "brute-force optimum {:.4}, ratio {:.4}",
        opt.cost,
        solution.cost / opt.cost
    );
    Ok(())
}
