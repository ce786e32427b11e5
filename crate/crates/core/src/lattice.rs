//! Random walks on `Z^d` (`d ∈ {1, 2}`) driven by a finite chain.
//!
//! The walk moves by `F(X_k)` at step `k`, so `S_n = Σ_{k<n} F(X_k)` with `X_0 ~ π`.
//! Hitting probabilities are computed three ways: from the potential-kernel series
//! built on return probabilities, by an absorbing solve on a truncated strip, and by
//! Monte Carlo.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::green_kubo_resolvent;
use crate::linalg::BandedMatrix;
use crate::markov::{stationary_measure, Measure, Observable, StochasticKernel};
use crate::trajectory::{EmpiricalEstimate, KernelSampler, SimConfig};

/// Largest mass allowed to leave a finite window over the whole horizon.
pub const LEAK_TOLERANCE: f64 = 1e-12;

const DRIFT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LatticeModel {
    driving: StochasticKernel,
    pi: Measure,
    steps: Vec<[i64; 2]>,
    dim: usize,
}

impl LatticeModel {
    /// Builds a model from per-state steps, each of length `d`.
    pub fn new(driving: StochasticKernel, steps: &[Vec<i64>]) -> Result<Self> {
        if steps.len() != driving.len() {
            return Err(Error::DimensionMismatch {
                expected: driving.len(),
                found: steps.len(),
            });
        }
        let dim = steps.first().map_or(0, Vec::len);
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidConfig(format!("lattice dimension must be 1 or 2, got {dim}")));
        }
        if let Some(bad) = steps.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let pi = stationary_measure(&driving)?;
        let steps: Vec<[i64; 2]> = steps
            .iter()
            .map(|s| [s[0], if dim == 2 { s[1] } else { 0 }])
            .collect();
        let drift: Vec<f64> = (0..dim)
            .map(|k| (0..steps.len()).map(|i| pi.weight(i) * steps[i][k] as f64).sum())
            .collect();
        if drift.iter().any(|d| d.abs() > DRIFT_TOLERANCE) {
            return Err(Error::NonCentered { drift });
        }
        Ok(Self {
            driving,
            pi,
            steps,
            dim,
        })
    }

    /// Simple random walk on `Z`.
    pub fn srw() -> Self {
        let k = StochasticKernel::new(
            vec!["down".into(), "up".into()],
            &[vec![0.5; 2], vec![0.5; 2]],
        )
        .expect("valid kernel");
        Self::new(k, &[vec![-1], vec![1]]).expect("centered walk")
    }

    /// Simple random walk on `Z²`.
    pub fn srw_2d() -> Self {
        let k = StochasticKernel::new(
            ["west", "east", "south", "north"].map(String::from).to_vec(),
            &vec![vec![0.25; 4]; 4],
        )
        .expect("valid kernel");
        Self::new(k, &[vec![-1, 0], vec![1, 0], vec![0, -1], vec![0, 1]]).expect("centered walk")
    }

    /// Walk on `Z` with independent steps: step `steps[i]` with probability `law[i]`.
    pub fn iid(law: &[f64], steps: &[i64]) -> Result<Self> {
        let k = StochasticKernel::iid(law)?;
        Self::new(k, &steps.iter().map(|s| vec![*s]).collect::<Vec<_>>())
    }

    /// Nearest-neighbour walk on `Z` that repeats its last step with probability `stay`.
    pub fn persistent(stay: f64) -> Result<Self> {
        let k = StochasticKernel::from_rows(&[vec![stay, 1.0 - stay], vec![1.0 - stay, stay]])?;
        Self::new(k, &[vec![-1], vec![1]])
    }

    pub fn driving(&self) -> &StochasticKernel {
        &self.driving
    }

    pub fn stationary(&self) -> &Measure {
        &self.pi
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The step of driving state `s`, padded with zeros to two coordinates.
    pub fn step(&self, s: usize) -> [i64; 2] {
        self.steps[s]
    }

    pub fn max_step(&self) -> i64 {
        self.steps
            .iter()
            .flat_map(|s| s.iter().map(|v| v.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Asymptotic variance of each coordinate of `S_n / √n`.
    pub fn step_variances(&self) -> Result<Vec<f64>> {
        (0..self.dim)
            .map(|k| {
                let f = Observable::new(&self.steps.iter().map(|s| s[k] as f64).collect::<Vec<_>>());
                Ok(green_kubo_resolvent(&self.driving, &self.pi, &f, &f)?.value)
            })
            .collect()
    }

    fn check_point(&self, p: &[i64]) -> Result<[i64; 2]> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        Ok([p[0], if self.dim == 2 { p[1] } else { 0 }])
    }
}

/// Law of `(X_n, S_n)` on a finite window `[-W, W]^d`, advanced one step at a time.
///
/// Sites are stored row-major in two internal axes; a one-dimensional walk uses a
/// single row so every step is a contiguous shift.
struct Propagator<'a> {
    model: &'a LatticeModel,
    moves: Vec<[i64; 2]>,
    offset: [i64; 2],
    side: [usize; 2],
    mass: Vec<Vec<f64>>,
    next: Vec<Vec<f64>>,
    lo: [usize; 2],
    hi: [usize; 2],
    leak: f64,
}

impl<'a> Propagator<'a> {
    fn new(model: &'a LatticeModel, half: usize) -> Self {
        let w = 2 * half + 1;
        let flat = model.dim == 1;
        let side = if flat { [1, w] } else { [w, w] };
        let offset = if flat { [0, half as i64] } else { [half as i64; 2] };
        let moves = model
            .steps
            .iter()
            .map(|s| if flat { [0, s[0]] } else { *s })
            .collect();
        let origin = [offset[0] as usize, offset[1] as usize];
        let sites = side[0] * side[1];
        let mut mass = vec![vec![0.0; sites]; model.driving.len()];
        for (s, m) in mass.iter_mut().enumerate() {
            m[origin[0] * side[1] + origin[1]] = model.pi.weight(s);
        }
        Self {
            model,
            moves,
            offset,
            side,
            next: vec![vec![0.0; sites]; model.driving.len()],
            mass,
            lo: origin,
            hi: origin,
            leak: 0.0,
        }
    }

    fn index(&self, p: [i64; 2]) -> Option<usize> {
        let q = if self.model.dim == 1 { [0, p[0]] } else { p };
        let x = q[0] + self.offset[0];
        let y = q[1] + self.offset[1];
        if x < 0 || y < 0 || x as usize >= self.side[0] || y as usize >= self.side[1] {
            return None;
        }
        Some(x as usize * self.side[1] + y as usize)
    }

    fn probability(&self, p: [i64; 2]) -> f64 {
        self.index(p)
            .map_or(0.0, |i| self.mass.iter().map(|m| m[i]).sum())
    }

    fn slice(&self) -> Vec<f64> {
        let sites = self.side[0] * self.side[1];
        (0..sites).map(|i| self.mass.iter().map(|m| m[i]).sum()).collect()
    }

    fn advance(&mut self) {
        let n = self.model.driving.len();
        let p = self.model.driving.matrix();
        let (sx, sy) = (self.side[0] as i64, self.side[1] as i64);
        for row in &mut self.next {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut lo = [usize::MAX; 2];
        let mut hi = [0usize; 2];
        for s in 0..n {
            let [dx, dy] = self.moves[s];
            let src = &self.mass[s];
            for x in self.lo[0]..=self.hi[0] {
                let row = &src[x * self.side[1] + self.lo[1]..=x * self.side[1] + self.hi[1]];
                let tx = x as i64 + dx;
                let y0 = self.lo[1] as i64 + dy;
                let y1 = self.hi[1] as i64 + dy;
                let (a, b) = (y0.max(0), y1.min(sy - 1));
                if tx < 0 || tx >= sx || a > b {
                    self.leak += row.iter().sum::<f64>();
                    continue;
                }
                let skip = (a - y0) as usize;
                let keep = (b - a + 1) as usize;
                self.leak += row[..skip].iter().sum::<f64>() + row[skip + keep..].iter().sum::<f64>();
                let base = tx as usize * self.side[1] + a as usize;
                for t in 0..n {
                    let c = p[(s, t)];
                    if c == 0.0 {
                        continue;
                    }
                    let dst = &mut self.next[t][base..base + keep];
                    for (d, v) in dst.iter_mut().zip(&row[skip..skip + keep]) {
                        *d += c * v;
                    }
                }
                lo[0] = lo[0].min(tx as usize);
                hi[0] = hi[0].max(tx as usize);
                lo[1] = lo[1].min(a as usize);
                hi[1] = hi[1].max(b as usize);
            }
        }
        std::mem::swap(&mut self.mass, &mut self.next);
        if lo[0] != usize::MAX {
            self.lo = lo;
            self.hi = hi;
        }
    }
}

/// `P(S_n = p)` for `n = 0..=n_max` and every `p` in `[-window, window]^d`.
#[derive(Debug, Clone, Serialize)]
pub struct ReturnProbabilityTable {
    pub n_max: usize,
    pub window: usize,
    pub dim: usize,
    /// One slice per `n`, indexed by `x` (and then `y` for `d = 2`) from `-window`.
    pub values: Vec<Vec<f64>>,
    /// Mass that left the window before `n_max`.
    pub leak: f64,
}

impl ReturnProbabilityTable {
    pub fn side(&self) -> usize {
        2 * self.window + 1
    }

    /// `P(S_n = p)`, zero outside the window.
    pub fn probability(&self, n: usize, p: &[i64]) -> f64 {
        let w = self.window as i64;
        if p.iter().any(|v| v.abs() > w) || p.len() != self.dim {
            return 0.0;
        }
        let x = (p[0] + w) as usize;
        let index = if self.dim == 2 {
            x * self.side() + (p[1] + w) as usize
        } else {
            x
        };
        self.values[n][index]
    }

    pub fn slice_mass(&self, n: usize) -> f64 {
        self.values[n].iter().sum()
    }
}

/// Exact return probabilities by convolution over driving state and window.
///
/// Without a window the reachable set `n_max · max|F|` is used.
pub fn return_probabilities(
    model: &LatticeModel,
    n_max: usize,
    window: Option<usize>,
) -> Result<ReturnProbabilityTable> {
    let window = window.unwrap_or(n_max * model.max_step() as usize);
    let mut prop = Propagator::new(model, window);
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(prop.slice());
    for _ in 0..n_max {
        prop.advance();
        if prop.leak > LEAK_TOLERANCE {
            return Err(Error::WindowTooSmall { leak: prop.leak });
        }
        values.push(prop.slice());
    }
    Ok(ReturnProbabilityTable {
        n_max,
        window,
        dim: model.dim,
        values,
        leak: prop.leak,
    })
}

/// `P(S_n = p)` from the characteristic function `E[e^{iθ·S_n}] = π (D_θ P)ⁿ 1`,
/// integrated by the trapezoid rule on a grid fine enough to be exact.
pub fn characteristic_probability(model: &LatticeModel, n: usize, p: &[i64]) -> Result<f64> {
    let p = model.check_point(p)?;
    let reach = n as i64 * model.max_step() + p[0].abs().max(p[1].abs());
    let grid = 2 * reach as usize + 1;
    let states = model.driving.len();
    let matrix = model.driving.matrix();
    let angle = |k: usize| 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
    let ny = if model.dim == 2 { grid } else { 1 };
    let mut total = 0.0;
    for kx in 0..grid {
        for ky in 0..ny {
            let theta = [angle(kx), if model.dim == 2 { angle(ky) } else { 0.0 }];
            let phase = |s: [i64; 2]| Complex64::from_polar(1.0, theta[0] * s[0] as f64 + theta[1] * s[1] as f64);
            let mut v: Vec<Complex64> = (0..states).map(|s| Complex64::new(model.pi.weight(s), 0.0)).collect();
            for _ in 0..n {
                let w: Vec<Complex64> = (0..states).map(|s| v[s] * phase(model.steps[s])).collect();
                v = (0..states)
                    .map(|t| (0..states).map(|s| w[s] * matrix[(s, t)]).sum())
                    .collect();
            }
            let chi: Complex64 = v.iter().sum();
            total += (chi * phase(p).conj()).re;
        }
    }
    Ok(total / (grid * ny) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSeries {
    /// Partial sum `Σ_{n≤N} [2 P(S_n = 0) - P(S_n = p) - P(S_n = -p)]`.
    pub series_value: f64,
    pub reciprocal: f64,
    /// Bound on the neglected tail of the series, from the last decade of terms.
    pub tail_bound: f64,
    /// The tail bound carried over to the reciprocal.
    pub reciprocal_bound: f64,
    /// Last index `N` included.
    pub terms: usize,
    pub window: usize,
}

/// Options for [`potential_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Summation stops once two consecutive terms add up to less than this.
    pub tol: f64,
    pub n_max: usize,
    /// Half-width of the lattice window; chosen from the walk's spread when absent.
    pub window: Option<usize>,
}

impl SeriesConfig {
    pub fn new(tol: f64, n_max: usize) -> Self {
        Self {
            tol,
            n_max,
            window: None,
        }
    }
}

/// The potential-kernel series for the targets `p`, sharing one propagation.
pub fn potential_series_many(
    model: &LatticeModel,
    targets: &[Vec<i64>],
    cfg: SeriesConfig,
) -> Result<Vec<PotentialSeries>> {
    let points = targets
        .iter()
        .map(|p| {
            let q = model.check_point(p)?;
            if q == [0, 0] {
                return Err(Error::ZeroTarget);
            }
            Ok(q)
        })
        .collect::<Result<Vec<_>>>()?;
    if cfg.n_max < 10 {
        return Err(Error::InvalidConfig("at least ten terms are needed for the tail fit".into()));
    }
    let spread = model.step_variances()?.into_iter().fold(0.0, f64::max).sqrt();
    let far = points.iter().flat_map(|p| p.iter().map(|v| v.unsigned_abs())).max().unwrap_or(0);
    let reach = cfg.n_max * model.max_step() as usize;
    let window = cfg
        .window
        .unwrap_or_else(|| ((14.0 * spread * (cfg.n_max as f64).sqrt()).ceil() as usize + far as usize).min(reach));

    let mut prop = Propagator::new(model, window);
    let mut terms: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.n_max + 1); points.len()];
    let mut active = vec![true; points.len()];
    for n in 0..=cfg.n_max {
        if n > 0 {
            prop.advance();
            if prop.leak > LEAK_TOLERANCE {
                return Err(Error::WindowTooSmall { leak: prop.leak });
            }
        }
        let zero = prop.probability([0, 0]);
        for (k, p) in points.iter().enumerate() {
            if !active[k] {
                continue;
            }
            let a = 2.0 * zero - prop.probability(*p) - prop.probability([-p[0], -p[1]]);
            terms[k].push(a);
            let len = terms[k].len();
            if len >= 20 && (terms[k][len - 1] + terms[k][len - 2]).abs() < cfg.tol {
                active[k] = false;
            }
        }
        if active.iter().all(|a| !a) {
            break;
        }
    }
    Ok(terms
        .iter()
        .map(|t| summarize(t, model.dim, window))
        .collect())
}

/// The potential-kernel series `Σ_n [2 P(S_n = 0) - P(S_n = p) - P(S_n = -p)]` and its reciprocal.
pub fn potential_series(model: &LatticeModel, p: &[i64], cfg: SeriesConfig) -> Result<PotentialSeries> {
    Ok(potential_series_many(model, &[p.to_vec()], cfg)?.remove(0))
}

/// Terms decay like `n^{-d/2-1}`, so the tail past `N` is the last-decade sum
/// divided by `10^{d/2} - 1`. The bound adds twice the disagreement with the same
/// estimate made from the previous decade.
fn summarize(terms: &[f64], dim: usize, window: usize) -> PotentialSeries {
    let n = terms.len() - 1;
    let value: f64 = terms.iter().sum();
    let factor = 10f64.powf(dim as f64 / 2.0);
    let decade = |end: usize| -> f64 { terms[end / 10 + 1..=end].iter().sum() };
    let last = decade(n) / (factor - 1.0);
    let previous = if n >= 100 {
        decade(n / 10) / (factor - 1.0) / factor
    } else {
        last
    };
    let tail_bound = last.abs() + 2.0 * (last - previous).abs();
    let reciprocal = 1.0 / value;
    let reciprocal_bound = if value > tail_bound {
        tail_bound / (value * (value - tail_bound))
    } else {
        f64::INFINITY
    };
    PotentialSeries {
        series_value: value,
        reciprocal,
        tail_bound,
        reciprocal_bound,
        terms: n,
        window,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingExact {
    pub probability: f64,
    /// `|h_R - h_{R/2}|`.
    pub sensitivity: f64,
    pub radius: usize,
}

/// Probability that the walk leaving level 0 with driving state `~ π` reaches `p`
/// before coming back to 0, by an absorbing solve on `{-R..R}` × driving states.
///
/// Steps that would leave the strip stop at its boundary.
pub fn hitting_exact(model: &LatticeModel, p: i64, radius: usize, tol: f64) -> Result<HittingExact> {
    if model.dim != 1 {
        return Err(Error::Unsupported("exact hitting solves are one-dimensional".into()));
    }
    if p == 0 {
        return Err(Error::ZeroTarget);
    }
    let reach = p.unsigned_abs() as usize + model.max_step() as usize;
    if radius / 2 < reach {
        return Err(Error::InvalidConfig(format!(
            "radius {radius} is too small for target {p}: half of it must reach {reach}"
        )));
    }
    let probability = absorbing_solve(model, p, radius as i64)?;
    let coarse = absorbing_solve(model, p, (radius / 2) as i64)?;
    let sensitivity = (probability - coarse).abs();
    if sensitivity > tol {
        return Err(Error::RadiusTooSmall {
            sensitivity,
            tolerance: tol,
        });
    }
    Ok(HittingExact {
        probability,
        sensitivity,
        radius,
    })
}

fn absorbing_solve(model: &LatticeModel, p: i64, radius: i64) -> Result<f64> {
    let states = model.driving.len();
    let matrix = model.driving.matrix();
    let levels = (2 * radius + 1) as usize;
    let unknowns = levels * states;
    let band = states * (model.max_step() as usize + 1);
    let index = |x: i64, s: usize| (x + radius) as usize * states + s;
    let mut a = BandedMatrix::zeros(unknowns, band, band);
    let mut b = vec![0.0; unknowns];
    for x in -radius..=radius {
        for s in 0..states {
            let i = index(x, s);
            a.add(i, i, 1.0);
            if x == 0 {
                continue;
            }
            if x == p {
                b[i] = 1.0;
                continue;
            }
            let target = (x + model.steps[s][0]).clamp(-radius, radius);
            for t in 0..states {
                let c = matrix[(s, t)];
                if c != 0.0 {
                    a.add(i, index(target, t), -c);
                }
            }
        }
    }
    let v = a
        .solve(b)
        .ok_or_else(|| Error::Model("absorbing system is singular".into()))?;
    Ok((0..states)
        .map(|s| {
            let level = model.steps[s][0];
            model.pi.weight(s) * (0..states).map(|t| matrix[(s, t)] * v[index(level, t)]).sum::<f64>()
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingEstimate {
    /// Fraction of all trajectories that reached `p` first; censored ones count as misses.
    pub estimate: EmpiricalEstimate,
    /// Trajectories that met neither level within the step cap.
    pub censored: usize,
}

/// Monte Carlo version of [`hitting_exact`], also available for `d = 2`.
///
/// Only the seed, trajectory count and worker count of `cfg` are used.
pub fn hitting_mc(model: &LatticeModel, p: &[i64], cfg: &SimConfig, step_cap: usize) -> Result<HittingEstimate> {
    let target = model.check_point(p)?;
    if target == [0, 0] {
        return Err(Error::ZeroTarget);
    }
    let sampler = KernelSampler::new(&model.driving, &model.pi);
    let outcomes = cfg.run(|_, rng| {
        let mut s = sampler.initial(rng);
        let mut level = [0i64; 2];
        for _ in 0..step_cap {
            let step = model.steps[s];
            level = [level[0] + step[0], level[1] + step[1]];
            if level == target {
                return Some(1.0);
            }
            if level == [0, 0] {
                return Some(0.0);
            }
            s = sampler.step(s, rng);
        }
        None
    })?;
    let censored = outcomes.iter().filter(|o| o.is_none()).count();
    let samples: Vec<f64> = outcomes.into_iter().map(|o| o.unwrap_or(0.0)).collect();
    Ok(HittingEstimate {
        estimate: EmpiricalEstimate::from_samples(&samples)?,
        censored,
    })
}
