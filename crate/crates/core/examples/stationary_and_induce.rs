//! Stationary law of a small chain, its induced chain on a subset and the
//! return-time law.

use markov_induce::markov::InducedSystem;
use markov_induce::{induced_kernel, return_time_distribution, stationary_measure, StochasticKernel, SubsetMask};

fn main() -> markov_induce::Result<()> {
    let kernel = StochasticKernel::new(
        vec!["sunny".into(), "cloudy".into(), "rain".into()],
        &[vec![0.7, 0.2, 0.1], vec![0.3, 0.4, 0.3], vec![0.2, 0.4, 0.4]],
    )?;
    let pi = stationary_measure(&kernel)?;
    println!("stationary law: {:?}", pi.weights().as_slice());

    let dry = SubsetMask::from_labels(&kernel, &["sunny", "cloudy"])?;
    let induced = induced_kernel(&kernel, &dry)?;
    println!("chain watched on dry days:");
    for row in induced.rows() {
        println!("  {row:?}");
    }
    // the restricted law is invariant for the induced chain
    let restricted = pi.restrict(&dry)?;
    println!("pi restricted: {:?}", restricted.weights().as_slice());
    println!("pushed once:   {:?}", (induced.matrix().transpose() * restricted.weights()).as_slice());

    let system = InducedSystem::new(&kernel, &dry)?;
    println!("mean return times {:?}, Kac sum {}", system.expected_return_times().as_slice(), system.kac_sum(&pi));
    let table = return_time_distribution(&kernel, &dry, 6)?;
    for (s, probs) in table.probabilities.iter().enumerate() {
        println!("P(return at t) from {}: {probs:.4?}, tail {:.2e}", kernel.states()[table.starts[s]], table.tail[s]);
    }
    Ok(())
}
