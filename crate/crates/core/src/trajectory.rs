//! Seeded, worker-count independent Monte Carlo over chain trajectories.
//!
//! Trajectory `i` draws from `ChaCha8Rng` seeded with the run seed on stream `i`,
//! so every path depends only on `(seed, i)`. Results are gathered in trajectory
//! order and reduced by fixed-order pairwise summation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;
use crate::markov::{Measure, Observable, StochasticKernel, SubsetMask};
use crate::poisson::ensure_centered;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub trajectories: usize,
    /// Steps per trajectory, burn-in included.
    pub horizon: usize,
    /// Leading steps discarded from every trajectory.
    pub burn_in: usize,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(seed: u64, trajectories: usize, horizon: usize) -> Self {
        Self {
            seed,
            trajectories,
            horizon,
            burn_in: 0,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectories == 0 {
            return Err(Error::InvalidConfig("at least one trajectory is required".into()));
        }
        if self.horizon <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "horizon {} must exceed burn-in {}",
                self.horizon, self.burn_in
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        Ok(())
    }

    /// Number of recorded steps per trajectory.
    pub fn recorded(&self) -> usize {
        self.horizon - self.burn_in
    }

    /// The generator of trajectory `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Evaluates `job` on every trajectory index, in index order.
    pub fn run<T, F>(&self, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &mut ChaCha8Rng) -> T + Sync + Send,
    {
        self.validate()?;
        let task = |i: usize| {
            let mut rng = self.rng(i);
            job(i, &mut rng)
        };
        if self.workers == 1 {
            return Ok((0..self.trajectories).map(task).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        Ok(pool.install(|| (0..self.trajectories).into_par_iter().map(task).collect()))
    }
}

/// Sample mean with its variance and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalEstimate {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `sqrt(variance / n)`.
    pub stderr: f64,
    pub n: usize,
}

impl EmpiricalEstimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "an estimate needs at least two samples, got {n}"
            )));
        }
        let mean = pairwise_sum(samples) / n as f64;
        let squares: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
        let variance = pairwise_sum(&squares) / (n - 1) as f64;
        Ok(Self {
            mean,
            variance,
            stderr: (variance / n as f64).sqrt(),
            n,
        })
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Inverse-CDF sampler for the rows of a kernel.
#[derive(Debug, Clone)]
pub struct KernelSampler {
    cumulative: Vec<Vec<f64>>,
    last: Vec<usize>,
    initial: Vec<f64>,
    initial_last: usize,
}

fn cumulative(weights: impl Iterator<Item = f64>) -> (Vec<f64>, usize) {
    let mut acc = 0.0;
    let mut last = 0;
    let mut out = Vec::new();
    for (j, w) in weights.enumerate() {
        acc += w;
        if w > 0.0 {
            last = j;
        }
        out.push(acc);
    }
    let total = acc;
    for v in &mut out {
        *v /= total;
    }
    (out, last)
}

fn draw(cum: &[f64], last: usize, u: f64) -> usize {
    let j = cum.partition_point(|&c| c <= u);
    j.min(last)
}

impl KernelSampler {
    pub fn new(kernel: &StochasticKernel, initial: &Measure) -> Self {
        let n = kernel.len();
        let (cumulative, last): (Vec<_>, Vec<_>) = (0..n)
            .map(|i| cumulative(kernel.matrix().row(i).iter().copied()))
            .unzip();
        let (initial, initial_last) = cumulative_of(initial);
        Self {
            cumulative,
            last,
            initial,
            initial_last,
        }
    }

    pub fn initial<R: Rng>(&self, rng: &mut R) -> usize {
        draw(&self.initial, self.initial_last, rng.random::<f64>())
    }

    pub fn step<R: Rng>(&self, state: usize, rng: &mut R) -> usize {
        draw(&self.cumulative[state], self.last[state], rng.random::<f64>())
    }
}

fn cumulative_of(m: &Measure) -> (Vec<f64>, usize) {
    cumulative(m.weights().iter().copied())
}

fn check_len(kernel: &StochasticKernel, f: &Observable) -> Result<()> {
    if f.len() != kernel.len() {
        return Err(Error::DimensionMismatch {
            expected: kernel.len(),
            found: f.len(),
        });
    }
    Ok(())
}

/// Paths of `horizon - burn_in` states per trajectory, started from `π`.
pub fn sample_paths(kernel: &StochasticKernel, pi: &Measure, cfg: &SimConfig) -> Result<Vec<Vec<usize>>> {
    let sampler = KernelSampler::new(kernel, pi);
    cfg.run(|_, rng| {
        let mut state = sampler.initial(rng);
        for _ in 0..cfg.burn_in {
            state = sampler.step(state, rng);
        }
        let mut path = Vec::with_capacity(cfg.recorded());
        for _ in 0..cfg.recorded() {
            path.push(state);
            state = sampler.step(state, rng);
        }
        path
    })
}

/// Paths started from a fixed state instead of `π`.
pub fn sample_paths_from(kernel: &StochasticKernel, start: usize, cfg: &SimConfig) -> Result<Vec<Vec<usize>>> {
    if start >= kernel.len() {
        return Err(Error::DimensionMismatch {
            expected: kernel.len(),
            found: start + 1,
        });
    }
    let mut point = vec![0.0; kernel.len()];
    point[start] = 1.0;
    sample_paths(kernel, &Measure::from_slice(&point)?, cfg)
}

/// Normalized Birkhoff sums `n^{-1/2} Σ_{k<n} f(X_k)`, one per trajectory.
pub fn birkhoff_samples(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    check_len(kernel, f)?;
    let sampler = KernelSampler::new(kernel, pi);
    let n = cfg.recorded();
    let scale = (n as f64).sqrt();
    let values = f.as_slice();
    cfg.run(|_, rng| {
        let mut state = sampler.initial(rng);
        for _ in 0..cfg.burn_in {
            state = sampler.step(state, rng);
        }
        let mut sum = 0.0;
        for _ in 0..n {
            sum += values[state];
            state = sampler.step(state, rng);
        }
        sum / scale
    })
}

/// Estimate of `σ²(f, f)` as the mean of `(n^{-1/2} S_n)²` over trajectories.
pub fn birkhoff_variance(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    cfg: &SimConfig,
) -> Result<EmpiricalEstimate> {
    ensure_centered(pi, f)?;
    let samples = birkhoff_samples(kernel, pi, f, cfg)?;
    let squares: Vec<f64> = samples.iter().map(|x| x * x).collect();
    EmpiricalEstimate::from_samples(&squares)
}

/// Splits a path at its visits to `Ψ` and sums `f` over each complete excursion.
///
/// Returns the excursion sums and the indices of the visits that start them.
pub fn excursion_sums(path: &[usize], mask: &SubsetMask, f: &Observable) -> (Vec<f64>, Vec<usize>) {
    let visits: Vec<usize> = (0..path.len()).filter(|&t| mask.contains(path[t])).collect();
    let sums = visits
        .windows(2)
        .map(|w| (w[0]..w[1]).map(|t| f.get(path[t])).sum())
        .collect();
    let starts = visits.split_last().map(|(_, s)| s.to_vec()).unwrap_or_default();
    (sums, starts)
}

/// Estimate of the induced-system `σ²_Ψ(Σ f, Σ f)` under `π|_Ψ`.
///
/// Each trajectory starts from `π` conditioned on `Ψ`, skips `burn_in` excursions and
/// records `horizon - burn_in` excursion sums `S_e`; the sample is
/// `π(Ψ) (Σ_e S_e)² / (horizon - burn_in)`.
pub fn induced_birkhoff_variance(
    kernel: &StochasticKernel,
    pi: &Measure,
    mask: &SubsetMask,
    f: &Observable,
    cfg: &SimConfig,
) -> Result<EmpiricalEstimate> {
    check_len(kernel, f)?;
    ensure_centered(pi, f)?;
    if mask.is_empty() {
        return Err(Error::EmptySubset);
    }
    let restricted: Vec<f64> = (0..kernel.len())
        .map(|i| if mask.contains(i) { pi.weight(i) } else { 0.0 })
        .collect();
    let start = Measure::from_slice(&restricted)?;
    let mass = start.mass() / pi.mass();
    let sampler = KernelSampler::new(kernel, &start);
    let values = f.as_slice();
    let excursions = cfg.recorded();
    let samples = cfg.run(|_, rng| {
        let mut state = sampler.initial(rng);
        let mut excursion = |state: &mut usize| {
            let mut sum = 0.0;
            loop {
                sum += values[*state];
                *state = sampler.step(*state, rng);
                if mask.contains(*state) {
                    return sum;
                }
            }
        };
        for _ in 0..cfg.burn_in {
            excursion(&mut state);
        }
        let total: f64 = (0..excursions).map(|_| excursion(&mut state)).sum();
        mass * total * total / excursions as f64
    })?;
    EmpiricalEstimate::from_samples(&samples)
}

/// Per-trajectory ratios `Σ f(X_k) / Σ g(X_k)`; trajectories whose denominator
/// vanishes are left out.
pub fn hopf_ratio(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    g: &Observable,
    cfg: &SimConfig,
) -> Result<EmpiricalEstimate> {
    check_len(kernel, f)?;
    check_len(kernel, g)?;
    if let Some(v) = g.as_slice().iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidConfig(format!("denominator must be nonnegative, found {v}")));
    }
    if pi.integrate(g) <= 0.0 {
        return Err(Error::ZeroDenominatorMass);
    }
    let sampler = KernelSampler::new(kernel, pi);
    let (fv, gv) = (f.as_slice(), g.as_slice());
    let ratios = cfg.run(|_, rng| {
        let mut state = sampler.initial(rng);
        for _ in 0..cfg.burn_in {
            state = sampler.step(state, rng);
        }
        let (mut num, mut den) = (0.0, 0.0);
        for _ in 0..cfg.recorded() {
            num += fv[state];
            den += gv[state];
            state = sampler.step(state, rng);
        }
        (den > 0.0).then(|| num / den)
    })?;
    let kept: Vec<f64> = ratios.into_iter().flatten().collect();
    EmpiricalEstimate::from_samples(&kept)
}

/// Sample skewness and excess kurtosis.
pub fn shape_statistics(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = pairwise_sum(samples) / n;
    let moment = |k: i32| {
        let v: Vec<f64> = samples.iter().map(|x| (x - mean).powi(k)).collect();
        pairwise_sum(&v) / n
    };
    let m2 = moment(2);
    (moment(3) / m2.powf(1.5), moment(4) / (m2 * m2) - 3.0)
}
