use nalgebra::DVector;
use serde::Serialize;

use super::green_kubo::{ExcursionStat, InducedForm};
use super::{permutations, tau3_series, Correlator};
use crate::error::{Error, Result};
use crate::excursion::ExcursionEngine;
use crate::markov::{Measure, Observable, StochasticKernel, SubsetMask};
use crate::poisson::ensure_centered;

/// Tolerance on the gap between both sides of the quasi-invariance identity.
pub const QUASI_TOLERANCE: f64 = 1e-9;

/// The unit-mass function `H` on the subset used in the correction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HChoice {
    /// `H = φ_Ψ`, of unit integral by Kac's formula.
    #[default]
    ReturnTime,
    /// `H = 1_Ψ / π(Ψ)`.
    NormalizedIndicator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiInvarianceReport {
    /// `τ³` of the original chain.
    pub lhs: f64,
    /// `τ³` of the induced chain for the excursion sums.
    pub tau3_induced: f64,
    /// `½ Σ_Alt σ²_Ψ(Σf_i, Σf_j) [σ²(f_k, H 1_Ψ) - σ²_Ψ(Σf_k, H)]`.
    pub correction: f64,
    pub rhs: f64,
    pub gap: f64,
    pub passed: bool,
    pub h: HChoice,
    /// `σ²(f_k, H 1_Ψ)` on the original chain, per argument.
    pub sigma_original_h: [f64; 3],
    /// `σ²_Ψ(Σ f_k, H)` on the induced chain, per argument.
    pub sigma_induced_h: [f64; 3],
}

/// Checks `τ³(f, f, f) = τ³_Ψ(Σf, Σf, Σf) + correction` for a single-site subset.
pub fn tau3_quasi_invariance_check(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    f: &Observable,
    h: HChoice,
    tol: f64,
) -> Result<QuasiInvarianceReport> {
    tau3_quasi_invariance_check_mixed(kernel, pi, mask, [f, f, f], h, tol)
}

/// The same check for three possibly different observables.
pub fn tau3_quasi_invariance_check_mixed(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    fs: [&Observable; 3],
    h: HChoice,
    tol: f64,
) -> Result<QuasiInvarianceReport> {
    if mask.count() != 1 {
        return Err(Error::SubsetNotSingleton { size: mask.count() });
    }
    for f in fs {
        ensure_centered(pi, f)?;
    }
    let lhs = tau3_series(kernel, pi, fs[0], fs[1], fs[2], tol)?.value;

    let engine = ExcursionEngine::new(kernel, mask)?;
    let form = InducedForm::new(&engine, pi)?;
    let weight = form.weights()[0];
    // excursions from a single site are independent, so the induced τ³ reduces to its diagonal term
    let tau3_induced = weight * engine.mixed_moment(&fs)?[0];

    let sums = fs
        .iter()
        .map(|f| ExcursionStat::sum_of(&engine, f))
        .collect::<Result<Vec<_>>>()?;
    let mut pair = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let cross = engine.mixed_moment(&[fs[i], fs[j]])?;
            pair[i][j] = form.sigma2(&sums[i], &sums[j], &cross);
        }
    }

    let corr = Correlator::new(kernel, pi)?;
    let mut sigma_original_h = [0.0; 3];
    let mut sigma_induced_h = [0.0; 3];
    match h {
        HChoice::ReturnTime => {
            let one = Observable::constant(kernel.len(), 1.0);
            let phi = ExcursionStat::sum_of(&engine, &one)?;
            for k in 0..3 {
                let cross = engine.mixed_moment(&[fs[k], &one])?;
                sigma_induced_h[k] = form.sigma2(&sums[k], &phi, &cross);
                sigma_original_h[k] = sigma_with_return_time(&corr, &engine, fs[k])?;
            }
        }
        HChoice::NormalizedIndicator => {
            let mass = form.weights().sum();
            let site = DVector::from_element(1, 1.0 / mass);
            let h_stat = ExcursionStat::site(&engine, &site);
            let indicator = Observable::indicator(mask).scale(1.0 / mass);
            let centered = indicator.centered(pi);
            for k in 0..3 {
                let cross = sums[k].m1.component_mul(&site);
                sigma_induced_h[k] = form.sigma2(&sums[k], &h_stat, &cross);
                sigma_original_h[k] = corr.sigma2(fs[k].values(), centered.values());
            }
        }
    }

    let correction = 0.5
        * permutations([0usize, 1, 2])
            .iter()
            .map(|&[i, j, k]| pair[i][j] * (sigma_original_h[k] - sigma_induced_h[k]))
            .sum::<f64>();
    let rhs = tau3_induced + correction;
    let gap = (lhs - rhs).abs();
    Ok(QuasiInvarianceReport {
        lhs,
        tau3_induced,
        correction,
        rhs,
        gap,
        passed: gap <= QUASI_TOLERANCE,
        h,
        sigma_original_h,
        sigma_induced_h,
    })
}

/// `σ²(f, φ_Ψ 1_Ψ)` on the original chain, where `φ_Ψ 1_Ψ` is the path functional
/// equal to the return time at visits to `Ψ` and zero elsewhere.
///
/// With `w = 1_Ψ E[φ_Ψ]` and `S` the excursion sum of `f`:
/// `E[f H] = Σ_Ψ π f E[φ]`, `Σ_{k≥1} E[f(X_0) H∘T^k] = Σ_{k≥1} ⟨f, P^k w⟩`, and
/// `Σ_{k≥1} E[H f(X_k)] = Σ_Ψ π (E_ω[φ (S - f(ω))] + E_ω[φ (Γf)(X_φ)])`.
fn sigma_with_return_time(corr: &Correlator, engine: &ExcursionEngine, f: &Observable) -> Result<f64> {
    let system = engine.system();
    let inside = system.inside();
    let n = f.len();
    let one = Observable::constant(n, 1.0);
    let return_time = engine.mixed_moment(&[&one])?;
    let phi_s = engine.mixed_moment(&[&one, f])?;
    let joint_phi = engine.joint(&one);
    let pi = corr.measure();

    let mut w = DVector::zeros(n);
    for (k, &i) in inside.iter().enumerate() {
        w[i] = return_time[k];
    }
    let fv = f.values();
    let same_time: f64 = inside
        .iter()
        .enumerate()
        .map(|(k, &i)| pi.weight(i) * fv[i] * return_time[k])
        .sum();
    let later_h = corr.lag_sum(fv, &w);
    let gamma_f = corr.gamma(fv);
    let gamma_f_in = DVector::from_iterator(inside.len(), inside.iter().map(|&i| gamma_f[i]));
    let after_return = &joint_phi * gamma_f_in;
    let later_f: f64 = inside
        .iter()
        .enumerate()
        .map(|(k, &i)| pi.weight(i) * (phi_s[k] - fv[i] * return_time[k] + after_return[k]))
        .sum();
    Ok(same_time + later_h + later_f)
}
