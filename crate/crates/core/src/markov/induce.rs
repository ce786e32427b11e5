use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::classify::classify;
use super::kernel::{Measure, StochasticKernel, SubsetMask};
use crate::error::{Error, Result};
use crate::linalg::{spectral_radius, submatrix};

/// Block decomposition of a kernel along a subset `Ψ` and its complement,
/// with `I - Q` (`Q = P_{ΨᶜΨᶜ}`) factored once.
#[derive(Debug, Clone)]
pub struct InducedSystem {
    mask: SubsetMask,
    inside: Vec<usize>,
    outside: Vec<usize>,
    p_in_in: DMatrix<f64>,
    p_in_out: DMatrix<f64>,
    p_out_in: DMatrix<f64>,
    q: DMatrix<f64>,
    lu: Option<LU<f64, Dyn, Dyn>>,
    induced: DMatrix<f64>,
    kernel: StochasticKernel,
}

impl InducedSystem {
    /// Requires `P` irreducible and `Ψ` nonempty.
    pub fn new(kernel: &StochasticKernel, mask: &SubsetMask) -> Result<Self> {
        if mask.len() != kernel.len() {
            return Err(Error::DimensionMismatch {
                expected: kernel.len(),
                found: mask.len(),
            });
        }
        if mask.is_empty() {
            return Err(Error::EmptySubset);
        }
        if !classify(kernel).irreducible {
            return Err(Error::Reducible);
        }
        Self::from_blocks(kernel.matrix(), mask, kernel.states())
    }

    /// Block decomposition of an arbitrary nonnegative matrix (weighted kernels).
    pub(crate) fn from_blocks(m: &DMatrix<f64>, mask: &SubsetMask, labels: &[String]) -> Result<Self> {
        let inside = mask.indices();
        let outside = mask.complement().indices();
        let p_in_in = submatrix(m, &inside, &inside);
        let p_in_out = submatrix(m, &inside, &outside);
        let p_out_in = submatrix(m, &outside, &inside);
        let q = submatrix(m, &outside, &outside);

        let (lu, induced) = if outside.is_empty() {
            (None, p_in_in.clone())
        } else {
            let c = outside.len();
            let lu = (DMatrix::identity(c, c) - &q).lu();
            let solved = lu
                .solve(&p_out_in)
                .ok_or(Error::SingularComplementBlock)?;
            if solved.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularComplementBlock);
            }
            (Some(lu), &p_in_in + &p_in_out * solved)
        };
        let states = inside.iter().map(|&i| labels[i].clone()).collect();
        Ok(Self {
            mask: mask.clone(),
            inside,
            outside,
            p_in_in,
            p_in_out,
            p_out_in,
            q,
            lu,
            kernel: StochasticKernel::from_matrix_unchecked(states, induced.clone()),
            induced,
        })
    }

    /// The induced matrix before row renormalization; substochastic for weighted kernels.
    pub(crate) fn induced_matrix(&self) -> &DMatrix<f64> {
        &self.induced
    }

    pub fn mask(&self) -> &SubsetMask {
        &self.mask
    }

    pub fn inside(&self) -> &[usize] {
        &self.inside
    }

    pub fn outside(&self) -> &[usize] {
        &self.outside
    }

    /// The induced kernel `P_Ψ`, labeled by the subset's states.
    pub fn kernel(&self) -> &StochasticKernel {
        &self.kernel
    }

    pub fn p_in_in(&self) -> &DMatrix<f64> {
        &self.p_in_in
    }

    pub fn p_in_out(&self) -> &DMatrix<f64> {
        &self.p_in_out
    }

    pub fn p_out_in(&self) -> &DMatrix<f64> {
        &self.p_out_in
    }

    /// The complement block `Q = P_{ΨᶜΨᶜ}`.
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `(I - Q)^{-1} rhs` on the complement; empty when the complement is empty.
    pub fn solve_outside(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.lu {
            None => DVector::zeros(0),
            Some(lu) => lu.solve(rhs).expect("I - Q factored as invertible"),
        }
    }

    pub fn solve_outside_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.lu {
            None => DMatrix::zeros(0, rhs.ncols()),
            Some(lu) => lu.solve(rhs).expect("I - Q factored as invertible"),
        }
    }

    /// Spectral radius of `Q`; zero when the complement is empty.
    pub fn complement_spectral_radius(&self) -> f64 {
        spectral_radius(&self.q)
    }

    /// `E_ω[φ_Ψ]` for every `ω ∈ Ψ`.
    pub fn expected_return_times(&self) -> DVector<f64> {
        let ones_out = DVector::from_element(self.outside.len(), 1.0);
        let steps_out = self.solve_outside(&ones_out);
        let mut result = DVector::from_element(self.inside.len(), 1.0);
        if !self.outside.is_empty() {
            result += &self.p_in_out * steps_out;
        }
        result
    }

    /// `Σ_{ω ∈ Ψ} π(ω) E_ω[φ_Ψ]`, which equals the total mass by Kac's formula.
    pub fn kac_sum(&self, pi: &Measure) -> f64 {
        let times = self.expected_return_times();
        self.inside
            .iter()
            .zip(times.iter())
            .map(|(&i, t)| pi.weight(i) * t)
            .sum()
    }
}

/// `P_Ψ = P_{ΨΨ} + P_{ΨΨᶜ}(I − P_{ΨᶜΨᶜ})^{-1} P_{ΨᶜΨ}`: the law of the first
/// return to `Ψ`.
pub fn induced_kernel(kernel: &StochasticKernel, mask: &SubsetMask) -> Result<StochasticKernel> {
    Ok(InducedSystem::new(kernel, mask)?.kernel().clone())
}

/// Law of the first return time `φ_Ψ` from each state of `Ψ`, up to a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTimeTable {
    /// Start states (indices into the original kernel).
    pub starts: Vec<usize>,
    /// `probabilities[s][t - 1] = P_{starts[s]}(φ_Ψ = t)` for `t = 1..=horizon`.
    pub probabilities: Vec<Vec<f64>>,
    /// `P(φ_Ψ > horizon)` per start state.
    pub tail: Vec<f64>,
    /// Spectral radius of the complement block; the tail decays like `ρ^horizon`.
    pub spectral_radius: f64,
}

pub fn return_time_distribution(
    kernel: &StochasticKernel,
    mask: &SubsetMask,
    horizon: usize,
) -> Result<ReturnTimeTable> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be positive".into()));
    }
    let sys = InducedSystem::new(kernel, mask)?;
    let k = sys.inside.len();
    let c = sys.outside.len();

    // hit[x] = probability of entering Ψ at the next step from x ∈ Ψᶜ
    let hit_from_out: DVector<f64> = sys.p_out_in.column_sum();
    let hit_from_in: DVector<f64> = sys.p_in_in.column_sum();

    let mut probabilities = vec![Vec::with_capacity(horizon); k];
    let mut tail = vec![0.0; k];
    for s in 0..k {
        probabilities[s].push(hit_from_in[s]);
        // distribution over Ψᶜ of paths that have not yet returned
        let mut alive: DVector<f64> = if c == 0 {
            DVector::zeros(0)
        } else {
            sys.p_in_out.row(s).transpose()
        };
        for _ in 2..=horizon {
            let p = if c == 0 { 0.0 } else { alive.dot(&hit_from_out) };
            probabilities[s].push(p);
            if c > 0 {
                alive = sys.q.transpose() * alive;
            }
        }
        tail[s] = if c == 0 { 0.0 } else { alive.sum() };
    }
    Ok(ReturnTimeTable {
        starts: sys.inside.clone(),
        probabilities,
        tail,
        spectral_radius: sys.complement_spectral_radius(),
    })
}
