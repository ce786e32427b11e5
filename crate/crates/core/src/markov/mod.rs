//! Finite stochastic kernels: validation, classification, stationary measures,
//! time reversal and induction on subsets.

mod classify;
mod induce;
mod kernel;

pub use classify::{classify, ChainClassification};
pub use induce::{induced_kernel, return_time_distribution, InducedSystem, ReturnTimeTable};
pub use kernel::{validate_kernel, Measure, Observable, StochasticKernel, SubsetMask, ROW_SUM_TOLERANCE};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// The unique stationary probability `π` of an irreducible kernel, from a direct
/// solve of `(Pᵀ - I) π = 0` with one equation replaced by `Σ π = 1`.
pub fn stationary_measure(kernel: &StochasticKernel) -> Result<Measure> {
    if !classify(kernel).irreducible {
        return Err(Error::Reducible);
    }
    Measure::new(stationary_weights(kernel.matrix())?)
}

pub(crate) fn stationary_weights(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = a.lu().solve(&rhs).ok_or(Error::Reducible)?;
    let pi = pi.map(|v| v.max(0.0));
    let mass = pi.sum();
    Ok(pi / mass)
}

/// The time reversal `L(i, j) = π_j P(j, i) / π_i`.
pub fn dual_kernel(kernel: &StochasticKernel, pi: &Measure) -> Result<StochasticKernel> {
    let n = kernel.len();
    if pi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pi.len(),
        });
    }
    if let Some(state) = (0..n).find(|&i| pi.weight(i) <= 0.0) {
        return Err(Error::ZeroMassState { state });
    }
    let p = kernel.matrix();
    let dual = DMatrix::from_fn(n, n, |i, j| pi.weight(j) * p[(j, i)] / pi.weight(i));
    Ok(StochasticKernel::from_matrix_unchecked(
        kernel.states().to_vec(),
        dual,
    ))
}

/// `‖πP - π‖₁` for a candidate stationary measure.
pub fn stationarity_residual(kernel: &StochasticKernel, pi: &Measure) -> f64 {
    let moved = kernel.matrix().tr_mul(pi.weights());
    (moved - pi.weights()).iter().map(|v| v.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(a: f64, b: f64) -> StochasticKernel {
        StochasticKernel::from_rows(&[vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_kernel(&[vec![0.5, 0.5], vec![0.5, 0.5]]).is_ok());
        assert!(validate_kernel(&[vec![1.0]]).is_ok());
        assert!(matches!(
            validate_kernel(&[vec![0.6, 0.6], vec![0.5, 0.5]]),
            Err(Error::NonStochastic { row: 0, .. })
        ));
        assert!(matches!(
            validate_kernel(&[vec![1.5, -0.5], vec![0.5, 0.5]]),
            Err(Error::NegativeEntry { .. })
        ));
        assert!(matches!(
            validate_kernel(&[vec![1.0, 0.0], vec![1.0]]),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn small_row_defect_is_repaired() {
        let k = validate_kernel(&[vec![0.5, 0.5 + 5e-10], vec![0.5, 0.5]]).unwrap();
        assert!(k.row_sum_defect() < 1e-15);
    }

    #[test]
    fn doubly_stochastic_gives_uniform() {
        let k = StochasticKernel::from_rows(&[
            vec![0.2, 0.3, 0.5],
            vec![0.5, 0.2, 0.3],
            vec![0.3, 0.5, 0.2],
        ])
        .unwrap();
        let pi = stationary_measure(&k).unwrap();
        for i in 0..3 {
            assert!((pi.weight(i) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_state_stationary() {
        let pi = stationary_measure(&two_state(0.3, 0.6)).unwrap();
        assert!((pi.weight(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((pi.weight(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!(pi.is_normalized());
    }

    #[test]
    fn two_cycle_stationary() {
        let k = StochasticKernel::permutation(&[1, 0]).unwrap();
        let pi = stationary_measure(&k).unwrap();
        assert_eq!(pi.weights().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn reducible_has_no_unique_stationary_measure() {
        let k = StochasticKernel::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(stationary_measure(&k), Err(Error::Reducible));
    }

    #[test]
    fn reversible_chain_is_self_dual() {
        // birth-death chains satisfy detailed balance
        let k = StochasticKernel::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.25, 0.25, 0.5],
            vec![0.0, 0.6, 0.4],
        ])
        .unwrap();
        let pi = stationary_measure(&k).unwrap();
        let dual = dual_kernel(&k, &pi).unwrap();
        assert!((dual.matrix() - k.matrix()).amax() < 1e-14);
    }

    #[test]
    fn dual_of_three_cycle_runs_backwards() {
        let k = StochasticKernel::permutation(&[1, 2, 0]).unwrap();
        let pi = stationary_measure(&k).unwrap();
        let dual = dual_kernel(&k, &pi).unwrap();
        assert_eq!(dual, StochasticKernel::permutation(&[2, 0, 1]).unwrap());
    }

    #[test]
    fn dual_satisfies_duality_identity() {
        let k = two_state(0.3, 0.6);
        let pi = stationary_measure(&k).unwrap();
        let dual = dual_kernel(&k, &pi).unwrap();
        let f = Observable::new(&[1.3, -0.4]);
        let g = Observable::new(&[0.2, 2.0]);
        let lhs = pi.inner(&k.apply(&f), &g);
        let rhs = pi.inner(&f, &dual.apply(&g));
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(dual.row_sum_defect() < 1e-15);
    }

    #[test]
    fn zero_mass_is_rejected_by_dual() {
        let k = two_state(0.3, 0.6);
        let m = Measure::from_slice(&[1.0, 0.0]).unwrap();
        assert_eq!(dual_kernel(&k, &m), Err(Error::ZeroMassState { state: 1 }));
    }
}
