//! Seeded generators of chains, subsets and observables for randomized checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::markov::{Measure, Observable, StochasticKernel, SubsetMask};

/// A random irreducible and aperiodic kernel on `n` states.
///
/// A random Hamiltonian cycle and one self-loop are always present; other entries
/// are kept with probability `density`.
pub fn random_kernel<R: Rng>(rng: &mut R, n: usize, density: f64) -> StochasticKernel {
    assert!(n > 0, "a kernel needs at least one state");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut rows = vec![vec![0.0; n]; n];
    for v in rows.iter_mut().flatten() {
        if rng.random::<f64>() < density {
            *v = rng.random_range(0.05..1.0);
        }
    }
    for k in 0..n {
        let (a, b) = (order[k], order[(k + 1) % n]);
        rows[a][b] += rng.random_range(0.05..1.0);
    }
    let looped = order[0];
    rows[looped][looped] += rng.random_range(0.05..1.0);
    for row in &mut rows {
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= total);
    }
    StochasticKernel::from_rows(&rows).expect("normalized rows")
}

/// A uniformly chosen subset with `size` members.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize, size: usize) -> SubsetMask {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    SubsetMask::from_indices(n, &order[..size.min(n)]).expect("indices in range")
}

/// Uniform values in `[-1, 1]` on `support` (everywhere when absent), shifted on
/// the support so that the `π`-integral vanishes.
pub fn random_centered<R: Rng>(rng: &mut R, pi: &Measure, support: Option<&SubsetMask>) -> Observable {
    let n = pi.len();
    let inside = |i: usize| support.is_none_or(|m| m.contains(i));
    let raw: Vec<f64> = (0..n)
        .map(|i| if inside(i) { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect();
    if (0..n).filter(|&i| inside(i)).count() == 1 {
        return Observable::zeros(n);
    }
    let mass: f64 = (0..n).filter(|&i| inside(i)).map(|i| pi.weight(i)).sum();
    let mean: f64 = (0..n).map(|i| pi.weight(i) * raw[i]).sum::<f64>() / mass;
    let values: Vec<f64> = (0..n)
        .map(|i| if inside(i) { raw[i] - mean } else { 0.0 })
        .collect();
    Observable::new(&values)
}
