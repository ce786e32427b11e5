use nalgebra::{DMatrix, DVector};

use super::{require_centered, require_mixing, Correlator, GkMethod, GreenKuboResult};
use crate::error::{Error, Result};
use crate::excursion::ExcursionEngine;
use crate::markov::{Measure, Observable, StochasticKernel, SubsetMask};
use crate::poisson::{potential_from_matrix, CENTERING_TOLERANCE};

fn check_lengths(kernel: &StochasticKernel, fs: &[&Observable]) -> Result<()> {
    for f in fs {
        if f.len() != kernel.len() {
            return Err(Error::DimensionMismatch {
                expected: kernel.len(),
                found: f.len(),
            });
        }
    }
    Ok(())
}

/// `σ²(f, g) = ⟨f, Z g⟩ + ⟨g, Z f⟩ - ⟨f, g⟩` with the fundamental matrix `Z`.
///
/// For periodic chains this is the Cesàro value of the correlation series.
pub fn green_kubo_resolvent(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    g: &Observable,
) -> Result<GreenKuboResult> {
    check_lengths(kernel, &[f, g])?;
    require_centered(pi, &[f, g])?;
    let corr = Correlator::new(kernel, pi)?;
    Ok(GreenKuboResult {
        value: corr.sigma2(f.values(), g.values()),
        method: GkMethod::Resolvent,
        truncation_error_bound: 0.0,
    })
}

/// `⟨f, g⟩ + Σ_{n=1}^{N} (⟨f, Pⁿ g⟩ + ⟨g, Pⁿ f⟩)` with `N` chosen so that the
/// neglected terms are provably below `tol`.
pub fn green_kubo_series(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    g: &Observable,
    tol: f64,
) -> Result<GreenKuboResult> {
    check_lengths(kernel, &[f, g])?;
    require_mixing(kernel)?;
    require_centered(pi, &[f, g])?;
    let corr = Correlator::new(kernel, pi)?;
    let (fv, gv) = (f.values(), g.values());
    let envelope = corr.envelope()?;
    let scale = corr.l1(fv) * gv.amax() + corr.l1(gv) * fv.amax();
    let horizon = envelope.horizon(scale, tol);
    if horizon > 1 << 24 {
        return Err(Error::Unsupported(format!(
            "series horizon {horizon} too large for tolerance {tol:e}"
        )));
    }
    let mut value = corr.inner(fv, gv);
    let mut pf = fv.clone();
    let mut pg = gv.clone();
    for _ in 0..horizon {
        pf = corr.step(&pf);
        pg = corr.step(&pg);
        value += corr.inner(fv, &pg) + corr.inner(gv, &pf);
    }
    Ok(GreenKuboResult {
        value,
        method: GkMethod::Series,
        truncation_error_bound: scale * envelope.tail(horizon),
    })
}

/// Green-Kubo form of the induced system for the excursion sums `Σ_Ψ f`,
/// with the unnormalized restricted measure `π|_Ψ`.
pub fn green_kubo_induced(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    f: &Observable,
) -> Result<GreenKuboResult> {
    green_kubo_induced_bilinear(kernel, pi, mask, f, f)
}

/// `σ²_Ψ(Σ_Ψ f, Σ_Ψ g)`; at least one of `f`, `g` must have zero `π`-mean.
pub fn green_kubo_induced_bilinear(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    f: &Observable,
    g: &Observable,
) -> Result<GreenKuboResult> {
    check_lengths(kernel, &[f, g])?;
    let (f, g) = if f.is_centered(pi, CENTERING_TOLERANCE) {
        (f, g)
    } else if g.is_centered(pi, CENTERING_TOLERANCE) {
        (g, f)
    } else {
        return Err(Error::NotCentered { mean: f.mean(pi) });
    };
    let engine = ExcursionEngine::new(kernel, mask)?;
    let induced = InducedForm::new(&engine, pi)?;
    let a = ExcursionStat::sum_of(&engine, f)?;
    let b = ExcursionStat::sum_of(&engine, g)?;
    let cross = engine.mixed_moment(&[f, g])?;
    Ok(GreenKuboResult {
        value: induced.sigma2(&a, &b, &cross),
        method: GkMethod::Excursion,
        truncation_error_bound: 0.0,
    })
}

/// First moment and joint law with the return site of an observable of one
/// excursion of the induced chain.
#[derive(Debug, Clone)]
pub(crate) struct ExcursionStat {
    pub m1: DVector<f64>,
    pub joint: DMatrix<f64>,
}

impl ExcursionStat {
    pub(crate) fn sum_of(engine: &ExcursionEngine, f: &Observable) -> Result<Self> {
        Ok(Self {
            m1: engine.mixed_moment(&[f])?,
            joint: engine.joint(f),
        })
    }

    /// A function of the current site of the induced chain.
    pub(crate) fn site(engine: &ExcursionEngine, h: &DVector<f64>) -> Self {
        Self {
            m1: h.clone(),
            joint: DMatrix::from_diagonal(h) * engine.system().kernel().matrix(),
        }
    }
}

/// Green-Kubo form of the induced chain `(Ψ, P_Ψ, π|_Ψ)` acting on excursion observables.
pub(crate) struct InducedForm {
    weights: DVector<f64>,
    normalized: DVector<f64>,
    gamma: DMatrix<f64>,
}

impl InducedForm {
    pub(crate) fn new(engine: &ExcursionEngine, pi: &Measure) -> Result<Self> {
        let system = engine.system();
        let restricted = pi.restrict(system.mask())?;
        let gamma = potential_from_matrix(system.kernel().matrix(), &restricted)
            .matrix()
            .clone();
        Ok(Self {
            normalized: restricted.normalize().weights().clone(),
            weights: restricted.weights().clone(),
            gamma,
        })
    }

    pub(crate) fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// `Σ_ω π(ω) cross(ω) + Σ_{n≥1} Σ_ω π(ω) [(j_a P_Ψ^{n-1} m1_b)(ω) + (j_b P_Ψ^{n-1} m1_a)(ω)]`,
    /// where `cross(ω) = E_ω[a b]`. One of `a`, `b` must have zero integral.
    pub(crate) fn sigma2(&self, a: &ExcursionStat, b: &ExcursionStat, cross: &DVector<f64>) -> f64 {
        // the weight row π j annihilates constants when the first factor is centered, so the
        // second factor's mean can be removed before summing the series
        let center = |m: &DVector<f64>| m.add_scalar(-self.normalized.dot(m));
        let forward = self.weights.dot(&(&a.joint * (&self.gamma * center(&b.m1))));
        let backward = self.weights.dot(&(&b.joint * (&self.gamma * center(&a.m1))));
        self.weights.dot(cross) + forward + backward
    }
}
