//! Dense linear-algebra helpers shared by the solvers.

use nalgebra::DMatrix;

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub(crate) fn norm_inf(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral radius via the real Schur form, with a Gelfand-formula fallback.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if let Some(schur) = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
        return schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
    }
    let mut power = m.clone();
    let mut k = 1usize;
    while k < 1 << 12 {
        power = &power * &power;
        k *= 2;
    }
    norm_inf(&power).powf(1.0 / k as f64)
}

/// Sum in a fixed pairwise order, independent of how the input was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2..=8 => values.iter().fold(0.0, |a, b| a + b),
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// A geometric envelope `‖K^n‖∞ ≤ prefactor · ratio^⌊n / block⌋` for a matrix whose
/// powers tend to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub block: usize,
    pub ratio: f64,
    pub prefactor: f64,
}

impl DecayEnvelope {
    /// Finds the first block length whose power norm drops below one half, or
    /// failing that the best contracting block up to `max_block`.
    pub fn for_matrix(k: &DMatrix<f64>, max_block: usize) -> Option<Self> {
        let n = k.nrows();
        if n == 0 {
            return Some(Self {
                block: 1,
                ratio: 0.0,
                prefactor: 1.0,
            });
        }
        let mut power = DMatrix::<f64>::identity(n, n);
        let mut prefactor: f64 = 1.0;
        let mut best: Option<Self> = None;
        for block in 1..=max_block {
            power = &power * k;
            let q = norm_inf(&power);
            if q < 1.0 {
                let candidate = Self {
                    block,
                    ratio: q,
                    prefactor,
                };
                let better = match best {
                    None => true,
                    Some(b) => q.powf(1.0 / block as f64) < b.ratio.powf(1.0 / b.block as f64),
                };
                if better {
                    best = Some(candidate);
                }
                if q <= 0.5 {
                    return best;
                }
            }
            prefactor = prefactor.max(q);
        }
        best
    }

    /// Bound on `‖K^n‖∞`.
    pub fn term(&self, n: usize) -> f64 {
        self.prefactor * self.ratio.powi((n / self.block) as i32)
    }

    /// Bound on `Σ_{j > n} ‖K^j‖∞`.
    pub fn tail(&self, n: usize) -> f64 {
        if self.ratio == 0.0 {
            // K^block = 0
            let start = n + 1;
            return if start < self.block {
                self.prefactor * (self.block - start) as f64
            } else {
                0.0
            };
        }
        let k = self.block;
        let b0 = (n + 1) / k;
        let in_first = (k * (b0 + 1) - (n + 1)) as f64;
        let q = self.ratio;
        self.prefactor * (in_first * q.powi(b0 as i32) + k as f64 * q.powi(b0 as i32 + 1) / (1.0 - q))
    }

    /// Bound on `Σ_{j ≥ 0} ‖K^j‖∞`.
    pub fn total(&self) -> f64 {
        1.0 + self.tail(0)
    }

    /// Bound on `Σ_{j > n} (j + 1) ‖K^j‖∞`.
    pub fn tail_linear(&self, n: usize) -> f64 {
        if self.ratio == 0.0 {
            return (n + 1..self.block)
                .map(|j| (j + 1) as f64 * self.prefactor)
                .sum();
        }
        let r = self.ratio.powf(1.0 / self.block as f64);
        let start = (n + 1) as f64;
        let s = r.powf(start) * ((start + 1.0) * (1.0 - r) + r) / ((1.0 - r) * (1.0 - r));
        self.prefactor / self.ratio * s
    }

    /// Bound on `Σ_{j > n} Σ_{k=1}^{j-1} ‖K^k‖∞ ‖K^{j-k}‖∞`.
    pub fn convolution_tail(&self, n: usize) -> f64 {
        if self.ratio == 0.0 {
            return (n + 1..2 * self.block)
                .map(|j| (1..j).map(|k| self.term(k) * self.term(j - k)).sum::<f64>())
                .sum();
        }
        self.prefactor / self.ratio * self.tail_linear(n)
    }

    /// Smallest horizon `N` with `scale · tail(N) ≤ tol`.
    pub fn horizon(&self, scale: f64, tol: f64) -> usize {
        self.horizon_by(|n| scale * self.tail(n), tol)
    }

    pub fn horizon_by(&self, bound: impl Fn(usize) -> f64, tol: f64) -> usize {
        let mut hi = 1usize;
        while bound(hi) > tol {
            hi *= 2;
            if hi > 1 << 26 {
                return hi;
            }
        }
        let mut lo = 0usize;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if bound(mid) <= tol {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }
}

/// A square band matrix factorized in place by Gaussian elimination without pivoting.
///
/// Suitable for diagonally dominant systems such as absorbing-chain solves.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.lower >= i && j <= i + self.upper);
        i * (self.lower + self.upper + 1) + (j + self.lower - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.lower < i || j > i + self.upper {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Adds `value` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let k = self.slot(i, j);
        self.data[k] += value;
    }

    /// Solves `A x = b`, or returns `None` on a vanishing pivot.
    pub fn solve(mut self, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let pivot = self.data[self.slot(k, k)];
            if pivot.abs() < 1e-300 || !pivot.is_finite() {
                return None;
            }
            let last_row = (k + self.lower).min(n - 1);
            let last_col = (k + self.upper).min(n - 1);
            for i in k + 1..=last_row {
                let l = self.data[self.slot(i, k)] / pivot;
                if l == 0.0 {
                    continue;
                }
                for j in k..=last_col {
                    let upper = self.data[self.slot(k, j)];
                    let s = self.slot(i, j);
                    self.data[s] -= l * upper;
                }
                b[i] -= l * b[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + self.upper).min(n - 1);
            let known: f64 = (k + 1..=last_col).map(|j| self.data[self.slot(k, j)] * b[j]).sum();
            b[k] = (b[k] - known) / self.data[self.slot(k, k)];
        }
        Some(b)
    }
}
