//! Hitting probabilities of a lattice walk three ways.
//!
//! Run with `cargo run --release --example lattice_hitting`.

use std::time::Instant;

use markov_induce::lattice::{hitting_exact, hitting_mc, potential_series_many, LatticeModel, SeriesConfig};
use markov_induce::trajectory::SimConfig;

fn main() -> markov_induce::Result<()> {
    let models = [
        ("simple random walk", LatticeModel::srw()),
        ("steps -1 or +2 with probabilities 2/3, 1/3", LatticeModel::iid(&[2.0 / 3.0, 1.0 / 3.0], &[-1, 2])?),
        ("persistent walk (stay 0.7)", LatticeModel::persistent(0.7)?),
    ];
    let targets: Vec<Vec<i64>> = (1..=5).map(|p| vec![p]).collect();
    let cfg = SimConfig::new(2024, 100_000, 1).with_workers(8);
    for (name, model) in &models {
        println!("{name}");
        let started = Instant::now();
        let series = potential_series_many(model, &targets, SeriesConfig::new(0.0, 100_000))?;
        println!("  series: {:.2?}", started.elapsed());
        println!("  {:>3} {:>12} {:>12} {:>10} {:>12} {:>12} {:>9}", "p", "1/series", "bound", "exact", "mc", "stderr", "censored");
        for (p, s) in (1..=5).zip(&series) {
            let exact = hitting_exact(model, p, 2000, 1e-10)?;
            let mc = hitting_mc(model, &[p], &cfg, 1_000_000)?;
            println!(
                "  {:>3} {:>12.8} {:>12.2e} {:>10.8} {:>12.6} {:>12.2e} {:>9}",
                p, s.reciprocal, s.reciprocal_bound, exact.probability, mc.estimate.mean, mc.estimate.stderr, mc.censored
            );
        }
        println!("  total: {:.2?}", started.elapsed());
    }
    Ok(())
}
