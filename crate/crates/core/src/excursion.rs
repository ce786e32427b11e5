//! Moments of excursion sums `Σ_Ψ f = Σ_{k=0}^{φ_Ψ - 1} f(X_k)` by first-step analysis.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::markov::{InducedSystem, Measure, Observable, StochasticKernel, SubsetMask};

/// Largest number of factors accepted by [`ExcursionEngine::mixed_moment`].
pub const MAX_FACTORS: usize = 8;

/// Exact excursion statistics for one kernel and subset.
#[derive(Debug, Clone)]
pub struct ExcursionEngine {
    system: InducedSystem,
}

impl ExcursionEngine {
    pub fn new(kernel: &StochasticKernel, mask: &SubsetMask) -> Result<Self> {
        Ok(Self {
            system: InducedSystem::new(kernel, mask)?,
        })
    }

    pub fn from_system(system: InducedSystem) -> Self {
        Self { system }
    }

    pub fn system(&self) -> &InducedSystem {
        &self.system
    }

    fn split(&self, f: &Observable) -> (DVector<f64>, DVector<f64>) {
        let inside = DVector::from_iterator(
            self.system.inside().len(),
            self.system.inside().iter().map(|&i| f.get(i)),
        );
        let outside = DVector::from_iterator(
            self.system.outside().len(),
            self.system.outside().iter().map(|&i| f.get(i)),
        );
        (inside, outside)
    }

    /// `E_ω[Π_i Σ_Ψ f_i]` for every `ω ∈ Ψ`.
    ///
    /// For every nonempty subset `I` of the factors, `u_I(x) = E_x[Π_{i∈I} R_i]` on
    /// `Ψᶜ` (with `R_i` the sum of `f_i` up to the entrance into `Ψ`) solves
    /// `u_I = (I - Q)^{-1} Σ_{J ⊊ I} (Π_{i ∈ I∖J} f_i) ⊙ Q u_J`, where `Q u_∅ = 1`.
    pub fn mixed_moment(&self, factors: &[&Observable]) -> Result<DVector<f64>> {
        let k = factors.len();
        if k > MAX_FACTORS {
            return Err(Error::Unsupported(format!(
                "excursion moments of more than {MAX_FACTORS} factors"
            )));
        }
        let n_in = self.system.inside().len();
        let n_out = self.system.outside().len();
        for f in factors {
            if f.len() != self.system.mask().len() {
                return Err(Error::DimensionMismatch {
                    expected: self.system.mask().len(),
                    found: f.len(),
                });
            }
        }
        let parts: Vec<_> = factors.iter().map(|f| self.split(f)).collect();
        let full = (1usize << k) - 1;

        // q[J] = Q u_J on Ψᶜ, with q[∅] = 1; exits[J] = P_{ΨΨᶜ} u_J on Ψ, with exits[∅] = 1
        let mut q = vec![DVector::<f64>::zeros(n_out); 1 << k];
        let mut exits = vec![DVector::<f64>::zeros(n_in); 1 << k];
        q[0] = DVector::from_element(n_out, 1.0);
        exits[0] = DVector::from_element(n_in, 1.0);
        for set in 1..=full {
            if n_out == 0 {
                continue;
            }
            let mut rhs = DVector::zeros(n_out);
            for sub in proper_subsets(set) {
                let mut term = q[sub].clone();
                for (i, part) in parts.iter().enumerate() {
                    if set & !sub & (1 << i) != 0 {
                        term.component_mul_assign(&part.1);
                    }
                }
                rhs += term;
            }
            let u = self.system.solve_outside(&rhs);
            q[set] = self.system.q() * &u;
            exits[set] = self.system.p_in_out() * &u;
        }

        let mut result = DVector::zeros(n_in);
        for sub in subsets_of(full) {
            let mut term = exits[sub].clone();
            for (i, part) in parts.iter().enumerate() {
                if full & !sub & (1 << i) != 0 {
                    term.component_mul_assign(&part.0);
                }
            }
            result += term;
        }
        Ok(result)
    }

    /// `j(ω, ω') = E_ω[Σ_Ψ f · 1{X_{φ_Ψ} = ω'}]`.
    pub fn joint(&self, f: &Observable) -> DMatrix<f64> {
        let (f_in, f_out) = self.split(f);
        let mut j = DMatrix::from_diagonal(&f_in) * self.system.kernel().matrix();
        if !self.system.outside().is_empty() {
            let entrance = self.system.solve_outside_matrix(self.system.p_out_in());
            let collected = self
                .system
                .solve_outside_matrix(&(DMatrix::from_diagonal(&f_out) * entrance));
            j += self.system.p_in_out() * collected;
        }
        j
    }
}

fn proper_subsets(set: usize) -> impl Iterator<Item = usize> {
    subsets_of(set).filter(move |&s| s != set)
}

/// All subsets of `set` (as bitmasks), including the empty set and `set` itself.
fn subsets_of(set: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(set);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 {
            None
        } else {
            Some((current - 1) & set)
        };
        Some(current)
    })
}

/// The first three moments of `Σ_Ψ f` and its joint law with the return site,
/// per start state in `Ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionMoments {
    /// Labels of the start states, in the order of `Ψ`.
    pub states: Vec<String>,
    pub m1: DVector<f64>,
    pub m2: DVector<f64>,
    pub m3: DVector<f64>,
    pub joint: DMatrix<f64>,
    /// `Σ_{ω ∈ Ψ} π(ω) m1(ω)`, equal to `∫ f dπ`.
    pub kac_integral: f64,
}

impl ExcursionMoments {
    pub fn variance(&self) -> DVector<f64> {
        &self.m2 - self.m1.component_mul(&self.m1)
    }

    pub fn third_central(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.m1.len(),
            (0..self.m1.len()).map(|i| {
                let (a, b, c) = (self.m1[i], self.m2[i], self.m3[i]);
                c - 3.0 * a * b + 2.0 * a * a * a
            }),
        )
    }
}

pub fn excursion_moments(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    f: &Observable,
) -> Result<ExcursionMoments> {
    let engine = ExcursionEngine::new(kernel, mask)?;
    let m1 = engine.mixed_moment(&[f])?;
    let m2 = engine.mixed_moment(&[f, f])?;
    let m3 = engine.mixed_moment(&[f, f, f])?;
    let kac_integral = engine
        .system()
        .inside()
        .iter()
        .zip(m1.iter())
        .map(|(&i, m)| pi.weight(i) * m)
        .sum();
    Ok(ExcursionMoments {
        states: engine.system().kernel().states().to_vec(),
        joint: engine.joint(f),
        m1,
        m2,
        m3,
        kac_integral,
    })
}
