//! How the sampled pool catches far outliers: anchors, D^z masses and the
//! pool size formula.
//!
//!     cargo run --example sampling

use outlier_reduce::baseline::{anchors_for, default_beta};
use outlier_reduce::gen::{generate, FacilityMode, GeneratorConfig};
use outlier_reduce::sampling::{dz_masses, dz_sample, sample_size};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let generated = generate(&GeneratorConfig {
        n: 20,
        k: 3,
        m: 2,
        planted: true,
        facilities: FacilityMode::ExcludePlanted,
        seed: 8,
        ..GeneratorConfig::default()
    })?;
    let instance = generated.file.build(None)?;
    let anchors = anchors_for(&instance, 1);
    let masses = dz_masses(&instance, &anchors);
    let total: f64 = masses.iter().sum();
    for &pos in &generated.planted {
        println!(
            "planted point {pos} carries {:.1}% of the sampling mass",
            100.0 * masses[pos] / total
        );
    }

    let draws = sample_size(default_beta(1), instance.m(), 0.5)?;
    println!("pool size for beta = 5, m = 2, eps = 0.5: {draws}");
    let pool = dz_sample(&instance, &anchors, draws, 99)?;
    let caught = generated
        .planted
        .iter()
        .filter(|&&p| pool.contains(instance.clients()[p]))
        .count();
    println!(
        "{} distinct points sampled, {caught}/{} planted outliers caught",
        pool.distinct.len(),
        generated.planted.len()
    );
    Ok(())
}
