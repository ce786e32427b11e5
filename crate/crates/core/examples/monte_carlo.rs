//! Reproducible parallel sampling: the same seed gives the same numbers for any
//! worker count.

use markov_induce::trajectory::{birkhoff_samples, hopf_ratio, shape_statistics, EmpiricalEstimate, SimConfig};
use markov_induce::{stationary_measure, Observable, StochasticKernel};

fn main() -> markov_induce::Result<()> {
    let kernel = StochasticKernel::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.25, 0.5, 0.25], vec![0.0, 0.5, 0.5]])?;
    let pi = stationary_measure(&kernel)?;
    let f = Observable::new(&[1.0, 0.0, -1.0]);

    let cfg = SimConfig::new(42, 2000, 10_000);
    let serial = birkhoff_samples(&kernel, &pi, &f, &cfg)?;
    let parallel = birkhoff_samples(&kernel, &pi, &f, &cfg.with_workers(8))?;
    println!("1 worker and 8 workers agree bit for bit: {}", serial == parallel);

    let squares: Vec<f64> = serial.iter().map(|x| x * x).collect();
    let variance = EmpiricalEstimate::from_samples(&squares)?;
    let (skew, kurtosis) = shape_statistics(&serial);
    println!("variance {:.4} +/- {:.4}, skew {skew:.3}, excess kurtosis {kurtosis:.3}", variance.mean, variance.stderr);

    let ends = Observable::new(&[1.0, 0.0, 1.0]);
    let middle = Observable::new(&[0.0, 1.0, 0.0]);
    let ratio = hopf_ratio(&kernel, &pi, &middle, &ends, &SimConfig::new(7, 500, 20_000).with_workers(8))?;
    println!("time in the middle per time at the ends: {:.4} +/- {:.4} (exact 1)", ratio.mean, ratio.stderr);
    Ok(())
}
