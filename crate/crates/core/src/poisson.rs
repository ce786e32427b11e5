//! Poisson equations `(I - P) f = g`, the potential kernel and their behaviour
//! under induction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, DecayEnvelope};
use crate::markov::{classify, InducedSystem, Measure, Observable, StochasticKernel, SubsetMask};

/// Tolerance of the solvability check `∫ g dπ = 0`, relative to `mass · ‖g‖∞`.
pub const CENTERING_TOLERANCE: f64 = 1e-9;

/// Tolerance of the exact linear-solve identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// The potential kernel `Γ = Z - 1π` with `Z = (I - P + 1π)^{-1}`.
///
/// `Γ` is a right inverse of `I - P` on `π`-centered observables and maps them
/// to `π`-centered observables.
#[derive(Debug, Clone)]
pub struct PotentialKernel {
    fundamental: DMatrix<f64>,
    gamma: DMatrix<f64>,
    pi: Measure,
}

impl PotentialKernel {
    /// The fundamental matrix `Z`.
    pub fn fundamental(&self) -> &DMatrix<f64> {
        &self.fundamental
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    /// The normalized stationary measure used for the projection `1π`.
    pub fn measure(&self) -> &Measure {
        &self.pi
    }

    pub fn apply(&self, g: &Observable) -> Observable {
        Observable::from_vector(&self.gamma * g.values())
    }

    pub fn apply_vector(&self, g: &DVector<f64>) -> DVector<f64> {
        &self.gamma * g
    }
}

fn check_len(n: usize, found: usize) -> Result<()> {
    if n != found {
        return Err(Error::DimensionMismatch { expected: n, found });
    }
    Ok(())
}

pub(crate) fn ensure_centered(pi: &Measure, g: &Observable) -> Result<()> {
    if !g.is_centered(pi, CENTERING_TOLERANCE) {
        return Err(Error::NotCentered {
            mean: g.mean(pi),
        });
    }
    Ok(())
}

pub fn potential_kernel(kernel: &StochasticKernel, pi: &Measure) -> Result<PotentialKernel> {
    check_len(kernel.len(), pi.len())?;
    if !classify(kernel).irreducible {
        return Err(Error::Reducible);
    }
    Ok(potential_from_matrix(kernel.matrix(), pi))
}

pub(crate) fn potential_from_matrix(p: &DMatrix<f64>, pi: &Measure) -> PotentialKernel {
    let n = p.nrows();
    let pi = pi.normalize();
    let ones = DVector::from_element(n, 1.0);
    let projection = &ones * pi.weights().transpose();
    let a = DMatrix::identity(n, n) - p + &projection;
    let fundamental = a.try_inverse().expect("I - P + 1π is invertible for irreducible P");
    let gamma = &fundamental - &projection;
    PotentialKernel {
        fundamental,
        gamma,
        pi,
    }
}

/// A solution of the Poisson equation, normalized to have `π`-mean zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSolution {
    pub f: Observable,
    pub g: Observable,
    /// `‖(I - P) f - g‖∞`.
    pub residual: f64,
}

pub fn solve_poisson(kernel: &StochasticKernel, pi: &Measure, g: &Observable) -> Result<PoissonSolution> {
    check_len(kernel.len(), g.len())?;
    ensure_centered(pi, g)?;
    let gamma = potential_kernel(kernel, pi)?;
    let f = gamma.apply(g);
    let residual = poisson_residual(kernel.matrix(), &f, g);
    Ok(PoissonSolution {
        f,
        g: g.clone(),
        residual,
    })
}

pub(crate) fn poisson_residual(p: &DMatrix<f64>, f: &Observable, g: &Observable) -> f64 {
    (f.values() - p * f.values() - g.values()).amax()
}

fn ensure_supported(mask: &SubsetMask, g: &Observable) -> Result<()> {
    for i in mask.complement().indices() {
        if g.get(i) != 0.0 {
            return Err(Error::SupportViolation {
                state: i,
                value: g.get(i),
            });
        }
    }
    Ok(())
}

/// Outcome of checking that the restriction of a Poisson solution solves the
/// induced Poisson equation.
#[derive(Debug, Clone, PartialEq)]
pub struct InductionReport {
    /// `(I - P_Ψ) f|_Ψ`.
    pub lhs: Observable,
    /// `g|_Ψ`.
    pub rhs: Observable,
    pub max_abs_gap: f64,
    pub passed: bool,
}

/// Solves `(I - P) f = g` on the full space and checks `(I - P_Ψ) f|_Ψ = g|_Ψ`.
pub fn verify_poisson_induction(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    g: &Observable,
) -> Result<InductionReport> {
    check_len(kernel.len(), g.len())?;
    check_len(kernel.len(), mask.len())?;
    ensure_supported(mask, g)?;
    let solution = solve_poisson(kernel, pi, g)?;
    let system = InducedSystem::new(kernel, mask)?;
    let f_in = solution.f.restrict(mask);
    let p_psi = system.kernel().matrix();
    let lhs = Observable::from_vector(f_in.values() - p_psi * f_in.values());
    let rhs = g.restrict(mask);
    let max_abs_gap = lhs.max_abs_diff(&rhs);
    let scale = rhs.norm_inf().max(1.0);
    Ok(InductionReport {
        passed: max_abs_gap <= IDENTITY_TOLERANCE * scale,
        lhs,
        rhs,
        max_abs_gap,
    })
}

/// Extends a solution `f_Ψ` of the induced equation to the whole space by the
/// harmonic extension `f_{Ψᶜ} = (I - Q)^{-1} P_{ΨᶜΨ} f_Ψ`.
///
/// The result solves `(I - P) f = g` and has the same sup norm as `f_Ψ`.
pub fn extend_solution(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    f_psi: &Observable,
    g: &Observable,
) -> Result<Observable> {
    check_len(kernel.len(), pi.len())?;
    check_len(kernel.len(), g.len())?;
    check_len(mask.count(), f_psi.len())?;
    ensure_supported(mask, g)?;
    let system = InducedSystem::new(kernel, mask)?;
    let g_in = g.restrict(mask);
    let induced_residual =
        (f_psi.values() - system.kernel().matrix() * f_psi.values() - g_in.values()).amax();
    if induced_residual > IDENTITY_TOLERANCE * g_in.norm_inf().max(1.0) {
        return Err(Error::NotInducedSolution {
            residual: induced_residual,
        });
    }
    let outside_values = system.solve_outside(&(system.p_out_in() * f_psi.values()));
    let mut values = DVector::zeros(kernel.len());
    for (k, &i) in system.inside().iter().enumerate() {
        values[i] = f_psi.get(k);
    }
    for (k, &i) in system.outside().iter().enumerate() {
        values[i] = outside_values[k];
    }
    Ok(Observable::from_vector(values))
}

/// Statewise log-weight `φ` for the weighted operator `f ↦ P(e^φ f)`-type kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedKernelSpec {
    pub phi: Observable,
}

impl WeightedKernelSpec {
    pub fn new(phi: Observable) -> Result<Self> {
        for (state, &value) in phi.as_slice().iter().enumerate() {
            if value.is_nan() || value > 0.0 {
                return Err(Error::WeightPositive { state, value });
            }
        }
        Ok(Self { phi })
    }

    pub fn constant(n: usize, phi: f64) -> Result<Self> {
        Self::new(Observable::constant(n, phi))
    }
}

/// The induced operator of `W = diag(e^φ) P`,
/// `W_Ψ = W_{ΨΨ} + W_{ΨΨᶜ}(I - W_{ΨᶜΨᶜ})^{-1} W_{ΨᶜΨ}`.
///
/// Entry `(ω, ω')` is `E_ω[exp(Σ_{k<φ_Ψ} φ(X_k)); X_{φ_Ψ} = ω']`.
pub fn weighted_induced_operator(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    spec: &WeightedKernelSpec,
) -> Result<DMatrix<f64>> {
    check_len(kernel.len(), pi.len())?;
    check_len(kernel.len(), spec.phi.len())?;
    let spec = WeightedKernelSpec::new(spec.phi.clone())?;
    // validates irreducibility and the subset
    InducedSystem::new(kernel, mask)?;
    let weights = spec.phi.values().map(f64::exp);
    let weighted = DMatrix::from_diagonal(&weights) * kernel.matrix();
    let system = InducedSystem::from_blocks(&weighted, mask, kernel.states())?;
    Ok(system.induced_matrix().clone())
}

/// The defect `c = (I - P_Ψ) f|_Ψ - g|_Ψ` for `g` not supported on `Ψ`,
/// together with its excursion series.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionReport {
    /// `P_{ΨΨᶜ}(I - Q)^{-1} g_{Ψᶜ}`.
    pub closed_form: Observable,
    /// `Σ_{k<N} P_{ΨΨᶜ} Q^k g_{Ψᶜ}`: contributions of excursions still outside `Ψ` after `k` steps.
    pub series: Observable,
    pub horizon: usize,
    /// Rigorous bound on `‖series - closed_form‖∞` from the truncation.
    pub series_bound: f64,
    /// `‖(I - P_Ψ) f|_Ψ - g|_Ψ - c‖∞` with `f` the centered Poisson solution.
    pub identity_residual: f64,
    pub passed: bool,
}

pub fn nonlocalized_correction(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    g: &Observable,
    tol: f64,
) -> Result<CorrectionReport> {
    check_len(kernel.len(), g.len())?;
    check_len(kernel.len(), mask.len())?;
    let solution = solve_poisson(kernel, pi, g)?;
    let system = InducedSystem::new(kernel, mask)?;
    let outside = system.outside().to_vec();
    let g_out = DVector::from_iterator(outside.len(), outside.iter().map(|&i| g.get(i)));
    let k = system.inside().len();

    let (closed_form, series, horizon, series_bound) = if outside.is_empty() {
        let zero = DVector::zeros(k);
        (zero.clone(), zero, 0, 0.0)
    } else {
        let closed = system.p_in_out() * system.solve_outside(&g_out);
        let q = system.q();
        let envelope = DecayEnvelope::for_matrix(q, 4 * q.nrows() + 16)
            .ok_or(Error::SingularComplementBlock)?;
        let scale = norm_inf(system.p_in_out()) * g_out.amax();
        // terms k = 0..horizon-1 are summed; the bound covers k ≥ horizon
        let horizon = envelope.horizon(scale, tol) + 1;
        let mut term = g_out.clone();
        let mut acc = DVector::zeros(k);
        for _ in 0..horizon {
            acc += system.p_in_out() * &term;
            term = q * term;
        }
        let bound = scale * envelope.tail(horizon - 1);
        (closed, acc, horizon, bound)
    };

    let f_in = solution.f.restrict(mask);
    let lhs = f_in.values() - system.kernel().matrix() * f_in.values() - g.restrict(mask).values();
    let identity_residual = (lhs - &closed_form).amax();
    Ok(CorrectionReport {
        passed: identity_residual <= IDENTITY_TOLERANCE * g.norm_inf().max(1.0),
        closed_form: Observable::from_vector(closed_form),
        series: Observable::from_vector(series),
        horizon,
        series_bound,
        identity_residual,
    })
}

/// `⟨Γ g, h⟩_π` and `⟨Γ_Ψ g|_Ψ, h|_Ψ⟩_{π|Ψ}` for `g`, `h` supported on `Ψ`.
pub fn bilinear_induction_pair(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    g: &Observable,
    h: &Observable,
) -> Result<(f64, f64)> {
    ensure_supported(mask, g)?;
    ensure_supported(mask, h)?;
    let full = potential_kernel(kernel, pi)?;
    ensure_centered(pi, g)?;
    let lhs = pi.inner(&full.apply(g), h);
    let system = InducedSystem::new(kernel, mask)?;
    let pi_in = pi.restrict(mask)?;
    let induced = potential_from_matrix(system.kernel().matrix(), &pi_in);
    let rhs = pi_in.inner(&induced.apply(&g.restrict(mask)), &h.restrict(mask));
    Ok((lhs, rhs))
}
