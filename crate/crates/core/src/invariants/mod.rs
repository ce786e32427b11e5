//! The Green-Kubo bilinear form `σ²` and the trilinear form `τ³`, with their
//! behaviour under coboundaries and induction.
//!
//! Correlations follow the chain convention `E[f(X_0) g(X_n)] = ⟨f, Pⁿ g⟩_π`.

mod edge;
mod green_kubo;
mod quasi;
mod tau3;

pub use edge::{coboundary_partial_sums, coboundary_shift, CoboundaryShift, EdgeChain, TelescopingRow};
pub use green_kubo::{
    green_kubo_induced, green_kubo_induced_bilinear, green_kubo_resolvent, green_kubo_series,
};
pub use quasi::{
    tau3_quasi_invariance_check, tau3_quasi_invariance_check_mixed, HChoice,
    QuasiInvarianceReport, QUASI_TOLERANCE,
};
pub use tau3::{tau3_series, tau3_shifted_form, tau3_via_sigma};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DecayEnvelope;
use crate::markov::{classify, Measure, Observable, StochasticKernel};
use crate::poisson::{ensure_centered, potential_from_matrix};

/// Default truncation tolerance of the series methods.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GkMethod {
    Resolvent,
    Series,
    Excursion,
    MonteCarlo,
}

impl GkMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Resolvent => "resolvent",
            Self::Series => "series",
            Self::Excursion => "excursion",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenKuboResult {
    pub value: f64,
    pub method: GkMethod,
    pub truncation_error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tau3Method {
    /// Sums from `n, m ≥ 1`, closed through the potential kernel.
    Series,
    /// Sums from `n, m ≥ 0` with flipped signs, by truncated power iteration.
    ShiftedForm,
    /// As a series of `σ²` values of lag products.
    ViaSigma,
}

impl Tau3Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Series => "series",
            Self::ShiftedForm => "shifted_form",
            Self::ViaSigma => "via_sigma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tau3Result {
    pub value: f64,
    pub method: Tau3Method,
    pub truncation_error_bound: f64,
    /// Number of terms kept in the truncated series (zero for closed forms).
    pub horizon: usize,
}

/// `f ⊠ g = f g - H ∫ f g dm`, which has zero `m`-integral when `∫ H dm = 1`.
pub fn boxtimes(f: &Observable, g: &Observable, h: &Observable, m: &Measure) -> Result<Observable> {
    let mass = m.integrate(h);
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::HNotUnitMass { mass });
    }
    let fg = f.hadamard(g);
    let integral = m.integrate(&fg);
    Ok(fg.sub(&h.scale(integral)))
}

/// Correlation sums of a stationary chain through its potential kernel.
#[derive(Debug, Clone)]
pub(crate) struct Correlator {
    p: DMatrix<f64>,
    pi: Measure,
    gamma: DMatrix<f64>,
}

impl Correlator {
    pub(crate) fn new(kernel: &StochasticKernel, pi: &Measure) -> Result<Self> {
        if pi.len() != kernel.len() {
            return Err(Error::DimensionMismatch {
                expected: kernel.len(),
                found: pi.len(),
            });
        }
        if !classify(kernel).irreducible {
            return Err(Error::Reducible);
        }
        Ok(Self::from_matrix(kernel.matrix(), pi))
    }

    pub(crate) fn from_matrix(p: &DMatrix<f64>, pi: &Measure) -> Self {
        let gamma = potential_from_matrix(p, pi).matrix().clone();
        Self {
            p: p.clone(),
            pi: pi.clone(),
            gamma,
        }
    }

    pub(crate) fn measure(&self) -> &Measure {
        &self.pi
    }

    pub(crate) fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.pi
            .weights()
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    pub(crate) fn step(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.p * v
    }

    pub(crate) fn gamma(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.gamma * v
    }

    /// `Σ_{n≥1} ⟨a, Pⁿ b⟩_π`, valid when `a` or `b` has zero mean.
    pub(crate) fn lag_sum(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.inner(a, &self.gamma(b)) - self.inner(a, b)
    }

    /// `σ²(a, b) = ⟨a, b⟩ + Σ_{n≥1} ⟨a, Pⁿ b⟩ + Σ_{n≥1} ⟨b, Pⁿ a⟩`, valid when `a` or `b` has zero mean.
    pub(crate) fn sigma2(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.inner(a, b) + self.lag_sum(a, b) + self.lag_sum(b, a)
    }

    /// Envelope of `(P - 1π)ⁿ` in the sup norm.
    pub(crate) fn envelope(&self) -> Result<DecayEnvelope> {
        let n = self.p.nrows();
        let pi = self.pi.normalize();
        let projection = DVector::from_element(n, 1.0) * pi.weights().transpose();
        let k = &self.p - projection;
        DecayEnvelope::for_matrix(&k, 64 * n + 256).ok_or_else(|| {
            Error::Unsupported("mixing too slow to bound the correlation series".into())
        })
    }

    /// `‖a‖_{L¹(π)}`.
    pub(crate) fn l1(&self, a: &DVector<f64>) -> f64 {
        self.pi
            .weights()
            .iter()
            .zip(a.iter())
            .map(|(w, x)| w * x.abs())
            .sum()
    }
}

pub(crate) fn require_mixing(kernel: &StochasticKernel) -> Result<()> {
    let c = classify(kernel);
    if !c.irreducible {
        return Err(Error::Reducible);
    }
    if c.period != 1 {
        return Err(Error::Periodic { period: c.period });
    }
    Ok(())
}

pub(crate) fn require_centered(pi: &Measure, fs: &[&Observable]) -> Result<()> {
    fs.iter().try_for_each(|f| ensure_centered(pi, f))
}

pub(crate) fn sup(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// The six orderings of three items.
pub(crate) fn permutations<T: Copy>(x: [T; 3]) -> [[T; 3]; 6] {
    let [a, b, c] = x;
    [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ]
}
