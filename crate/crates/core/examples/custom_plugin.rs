//! Plugging a user-supplied outlier-free solver into the reduction.
//!
//!     cargo run --example custom_plugin

use outlier_reduce::gen::{generate, GenConstraint, GeneratorConfig};
use outlier_reduce::solvers::{assign_given_centers, Clustering, Exactness, OutlierFreeProblem, SolveError};
use outlier_reduce::{run_reduction, ReductionConfig, SolverPlugin};

/// Tries the first few k-subsets of facilities in index order and keeps
/// the cheapest feasible one.
struct FirstSubsets {
    tries: usize,
}

impl SolverPlugin for FirstSubsets {
    fn name(&self) -> &str {
        "first-subsets"
    }

    fn exactness(&self) -> Exactness {
        Exactness::Heuristic
    }

    fn solve(&self, problem: &OutlierFreeProblem<'_>, _seed: u64) -> Result<Clustering, SolveError> {
        let facilities = problem.instance.facilities();
        let k = problem.instance.k();
        let mut best: Option<Clustering> = None;
        for start in 0..self.tries.min(facilities.len() + 1 - k) {
            let centers = &facilities[start..start + k];
            match assign_given_centers(problem, centers) {
                Ok(c) if best.as_ref().is_none_or(|b| c.cost < b.cost) => best = Some(c),
                Ok(_) | Err(SolveError::Infeasible) => {}
                Err(e) => return Err(e),
            }
        }
        best.ok_or(SolveError::Infeasible)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let instance = generate(&GeneratorConfig {
        n: 14,
        k: 2,
        m: 1,
        constraint: GenConstraint::SizeBounds,
        seed: 11,
        ..GeneratorConfig::default()
    })?
    .file
    .build(None)?;
    let out = run_reduction(&instance, &ReductionConfig::from_seed(2), &FirstSubsets { tries: 6 })?;
    println!("cost {:.3} after {} iterations", out.solution.cost, out.q);
    println!(
        "cluster sizes {:?}",
        out.solution.clusters.iter().map(Vec::len).collect::<Vec<_>>()
    );
    Ok(())
}
