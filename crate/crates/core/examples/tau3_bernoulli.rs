//! Degree-3 invariant of a Bernoulli sequence and its behaviour under induction
//! on one site, with the moments of the geometric excursion length.

use markov_induce::excursion::excursion_moments;
use markov_induce::invariants::{tau3_quasi_invariance_check, tau3_series, tau3_shifted_form, tau3_via_sigma, HChoice};
use markov_induce::{stationary_measure, Observable, StochasticKernel, SubsetMask};

fn main() -> markov_induce::Result<()> {
    for p in [0.2, 1.0 / 3.0, 0.5, 0.7] {
        let q = 1.0 - p;
        let kernel = StochasticKernel::iid(&[p, q])?;
        let pi = stationary_measure(&kernel)?;
        let site = SubsetMask::from_indices(2, &[0])?;
        let f = Observable::new(&[-q, p]);

        let steps_away = excursion_moments(&kernel, &pi, &site, &Observable::new(&[0.0, 1.0]))?;
        println!(
            "p = {p:.4}: E G = {:.6}, Var G = {:.6}, third central moment {:.6}",
            steps_away.m1[0],
            steps_away.variance()[0],
            steps_away.third_central()[0]
        );
        let a = tau3_series(&kernel, &pi, &f, &f, &f, 1e-12)?.value;
        let b = tau3_shifted_form(&kernel, &pi, &f, &f, &f, 1e-12)?.value;
        let c = tau3_via_sigma(&kernel, &pi, &f, &f, &f, 1e-12)?.value;
        println!("  tau3 = {a:.12} / {b:.12} / {c:.12}");
        let check = tau3_quasi_invariance_check(&kernel, &pi, &site, &f, HChoice::ReturnTime, 1e-12)?;
        println!(
            "  induced {:.12} + correction {:.12} = {:.12} (gap {:.1e})",
            check.tau3_induced, check.correction, check.rhs, check.gap
        );
    }
    Ok(())
}
