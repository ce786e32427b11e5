//! The Green-Kubo variance computed four ways, before and after inducing.

use markov_induce::invariants::{green_kubo_induced, green_kubo_resolvent, green_kubo_series};
use markov_induce::trajectory::{birkhoff_variance, induced_birkhoff_variance, SimConfig};
use markov_induce::{stationary_measure, Observable, StochasticKernel, SubsetMask};

fn main() -> markov_induce::Result<()> {
    let kernel = StochasticKernel::from_rows(&[vec![0.8, 0.15, 0.05], vec![0.2, 0.6, 0.2], vec![0.1, 0.3, 0.6]])?;
    let pi = stationary_measure(&kernel)?;
    let f = Observable::new(&[1.0, 0.0, -2.0]).centered(&pi);

    let resolvent = green_kubo_resolvent(&kernel, &pi, &f, &f)?;
    let series = green_kubo_series(&kernel, &pi, &f, &f, 1e-12)?;
    println!("resolvent {:.12}", resolvent.value);
    println!("series    {:.12} (+/- {:.1e})", series.value, series.truncation_error_bound);

    for members in [vec![0], vec![0, 2]] {
        let mask = SubsetMask::from_indices(3, &members)?;
        let induced = green_kubo_induced(&kernel, &pi, &mask, &f)?;
        let mc = induced_birkhoff_variance(&kernel, &pi, &mask, &f, &SimConfig::new(1, 1000, 5000).with_workers(4))?;
        println!(
            "induced on {members:?}: {:.12}, Monte Carlo {:.4} +/- {:.4}",
            induced.value, mc.mean, mc.stderr
        );
    }
    let mc = birkhoff_variance(&kernel, &pi, &f, &SimConfig::new(2, 1000, 10_000).with_workers(4))?;
    println!("Birkhoff sums: {:.4} +/- {:.4}", mc.mean, mc.stderr);
    Ok(())
}
