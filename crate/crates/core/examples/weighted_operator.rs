//! Induced operator of a weighted kernel: entry `(a, b)` is the expected
//! exponential weight accumulated along excursions from `a` ending at `b`.

use markov_induce::poisson::{weighted_induced_operator, WeightedKernelSpec};
use markov_induce::{induced_kernel, stationary_measure, Observable, StochasticKernel, SubsetMask};

fn main() -> markov_induce::Result<()> {
    let kernel = StochasticKernel::from_rows(&[vec![0.2, 0.4, 0.4], vec![0.5, 0.0, 0.5], vec![0.3, 0.3, 0.4]])?;
    let pi = stationary_measure(&kernel)?;
    let mask = SubsetMask::from_indices(3, &[0])?;

    println!("plain induced kernel: {:?}", induced_kernel(&kernel, &mask)?.rows());
    for discount in [0.0, -0.1, -1.0] {
        let spec = WeightedKernelSpec::constant(3, discount)?;
        let w = weighted_induced_operator(&kernel, &pi, &mask, &spec)?;
        // with a constant weight this is the generating function of the return time
        println!("E[exp({discount} * return time)] = {:.6}", w[(0, 0)]);
    }
    let spec = WeightedKernelSpec::new(Observable::new(&[0.0, -0.5, -2.0]))?;
    println!("state-dependent weight: {:.6}", weighted_induced_operator(&kernel, &pi, &mask, &spec)?[(0, 0)]);
    println!("positive weights are rejected: {:?}", WeightedKernelSpec::constant(3, 0.1).unwrap_err());
    Ok(())
}
