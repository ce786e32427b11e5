//! A Poisson solution restricted to a subset solves the induced equation, and
//! the induced solution extends back without growing its sup norm.

use markov_induce::poisson::{extend_solution, nonlocalized_correction, potential_kernel, solve_poisson, verify_poisson_induction};
use markov_induce::{induced_kernel, stationary_measure, Observable, StochasticKernel, SubsetMask};

fn main() -> markov_induce::Result<()> {
    let kernel = StochasticKernel::from_rows(&[
        vec![0.1, 0.5, 0.3, 0.1],
        vec![0.3, 0.3, 0.2, 0.2],
        vec![0.25, 0.25, 0.25, 0.25],
        vec![0.6, 0.0, 0.0, 0.4],
    ])?;
    let pi = stationary_measure(&kernel)?;
    let mask = SubsetMask::from_indices(4, &[0, 1])?;

    // a source supported on the subset with zero mean
    let g = Observable::new(&[pi.weight(1), -pi.weight(0), 0.0, 0.0]);
    let solution = solve_poisson(&kernel, &pi, &g)?;
    println!("f = {:?} (residual {:.1e})", solution.f.as_slice(), solution.residual);

    let report = verify_poisson_induction(&kernel, &pi, &mask, &g)?;
    println!("(I - P_Psi) f|Psi = {:?}, g|Psi = {:?}", report.lhs.as_slice(), report.rhs.as_slice());

    let induced = induced_kernel(&kernel, &mask)?;
    let pi_in = pi.restrict(&mask)?.normalize();
    let f_psi = potential_kernel(&induced, &pi_in)?.apply(&g.restrict(&mask));
    let extended = extend_solution(&kernel, &pi, &mask, &f_psi, &g)?;
    println!("extension {:?}: sup norm {} vs {}", extended.as_slice(), extended.norm_inf(), f_psi.norm_inf());

    // a source living off the subset leaves a correction term behind
    let off = Observable::new(&[0.0, 0.0, pi.weight(3), -pi.weight(2)]);
    let correction = nonlocalized_correction(&kernel, &pi, &mask, &off, 1e-12)?;
    println!(
        "correction {:?} from {} excursion terms (identity residual {:.1e})",
        correction.closed_form.as_slice(),
        correction.horizon,
        correction.identity_residual
    );
    Ok(())
}
