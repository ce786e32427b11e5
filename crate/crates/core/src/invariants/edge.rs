use nalgebra::{DMatrix, DVector};

use super::{require_mixing, Correlator};
use crate::error::{Error, Result};
use crate::markov::{Measure, Observable, StochasticKernel};

/// The chain of transitions `(X_n, X_{n+1})`.
///
/// Its states are the pairs `(i, j)` with `P(i, j) > 0`, it moves from `(i, j)` to
/// `(j, k)` with probability `P(j, k)` and its stationary law is `π_i P(i, j)`.
/// Coboundaries `u(X_{n+1}) - u(X_n)` are ordinary observables here.
#[derive(Debug, Clone)]
pub struct EdgeChain {
    edges: Vec<(usize, usize)>,
    kernel: StochasticKernel,
    pi: Measure,
}

impl EdgeChain {
    pub fn new(kernel: &StochasticKernel, pi: &Measure) -> Result<Self> {
        if pi.len() != kernel.len() {
            return Err(Error::DimensionMismatch {
                expected: kernel.len(),
                found: pi.len(),
            });
        }
        let n = kernel.len();
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| kernel.get(i, j) > 0.0)
            .collect();
        let m = edges.len();
        let matrix = DMatrix::from_fn(m, m, |a, b| {
            let (_, j) = edges[a];
            let (j2, k) = edges[b];
            if j == j2 {
                kernel.get(j, k)
            } else {
                0.0
            }
        });
        let labels = edges
            .iter()
            .map(|&(i, j)| format!("{}->{}", kernel.states()[i], kernel.states()[j]))
            .collect();
        let weights = DVector::from_iterator(m, edges.iter().map(|&(i, j)| pi.weight(i) * kernel.get(i, j)));
        Ok(Self {
            kernel: StochasticKernel::from_matrix_unchecked(labels, matrix),
            pi: Measure::new(weights)?,
            edges,
        })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn kernel(&self) -> &StochasticKernel {
        &self.kernel
    }

    pub fn measure(&self) -> &Measure {
        &self.pi
    }

    /// `f̂(i, j) = f(i)`.
    pub fn lift(&self, f: &Observable) -> Observable {
        Observable::from_vector(DVector::from_iterator(
            self.edges.len(),
            self.edges.iter().map(|&(i, _)| f.get(i)),
        ))
    }

    /// `û(i, j) = u(j) - u(i)`, the observable `u(X_{n+1}) - u(X_n)`.
    pub fn coboundary(&self, u: &Observable) -> Observable {
        Observable::from_vector(DVector::from_iterator(
            self.edges.len(),
            self.edges.iter().map(|&(i, j)| u.get(j) - u.get(i)),
        ))
    }
}

/// An observable shifted by a coboundary, living on the transition chain.
#[derive(Debug, Clone)]
pub struct CoboundaryShift {
    pub chain: EdgeChain,
    /// `f(X_n) + u(X_{n+1}) - u(X_n)` as a function of the transition.
    pub shifted: Observable,
}

/// Returns `f + u∘T - u`, realized on the transition chain.
pub fn coboundary_shift(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    u: &Observable,
) -> Result<CoboundaryShift> {
    require_mixing(kernel)?;
    for v in [f, u] {
        if v.len() != kernel.len() {
            return Err(Error::DimensionMismatch {
                expected: kernel.len(),
                found: v.len(),
            });
        }
    }
    let chain = EdgeChain::new(kernel, pi)?;
    let shifted = chain.lift(f).add(&chain.coboundary(u));
    Ok(CoboundaryShift { chain, shifted })
}

/// Partial sums of the correlation series between `g` and the coboundary of `u`
/// at horizon `n`, computed on the transition chain and in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelescopingRow {
    pub n: usize,
    /// `Σ_{k=0}^{n} E[g(X_0) (u(X_{k+1}) - u(X_k))]`.
    pub forward: f64,
    /// `⟨g, P^{n+1} u⟩ - ⟨g, u⟩`.
    pub forward_closed: f64,
    /// `Σ_{k=1}^{n} E[(u(X_1) - u(X_0)) g(X_k)]`.
    pub backward: f64,
    /// `⟨u, g⟩ - ⟨u, Pⁿ g⟩`.
    pub backward_closed: f64,
}

pub fn coboundary_partial_sums(
    kernel: &StochasticKernel,
    pi: &Measure,
    g: &Observable,
    u: &Observable,
    horizon: usize,
) -> Result<Vec<TelescopingRow>> {
    let chain = EdgeChain::new(kernel, pi)?;
    let edge = Correlator::from_matrix(chain.kernel().matrix(), chain.measure());
    let base = Correlator::from_matrix(kernel.matrix(), pi);
    let g_hat = chain.lift(g).values().clone();
    let u_hat = chain.coboundary(u).values().clone();

    let mut rows = Vec::with_capacity(horizon);
    let mut forward = edge.inner(&g_hat, &u_hat);
    let mut backward = 0.0;
    let mut pu_hat = u_hat.clone();
    let mut pg_hat = g_hat.clone();
    let mut pu = base.step(u.values());
    let mut pg = g.values().clone();
    let gu = base.inner(g.values(), u.values());
    for n in 1..=horizon {
        pu_hat = edge.step(&pu_hat);
        pg_hat = edge.step(&pg_hat);
        forward += edge.inner(&g_hat, &pu_hat);
        backward += edge.inner(&u_hat, &pg_hat);
        pu = base.step(&pu);
        pg = base.step(&pg);
        rows.push(TelescopingRow {
            n,
            forward,
            forward_closed: base.inner(g.values(), &pu) - gu,
            backward,
            backward_closed: gu - base.inner(u.values(), &pg),
        });
    }
    Ok(rows)
}
