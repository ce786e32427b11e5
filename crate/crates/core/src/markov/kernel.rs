use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Row sums closer than this to 1 are renormalized; anything further is rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A row-stochastic matrix over labeled finite states.
///
/// `matrix[(i, j)]` is the probability of moving from state `i` to state `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticKernel {
    states: Vec<String>,
    matrix: DMatrix<f64>,
}

/// Validates raw rows into a kernel with default labels `"0"`, `"1"`, ...
pub fn validate_kernel(rows: &[Vec<f64>]) -> Result<StochasticKernel> {
    StochasticKernel::from_rows(rows)
}

impl StochasticKernel {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let states = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(states, rows)
    }

    pub fn new(states: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if states.len() != n {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: n,
            });
        }
        if n == 0 {
            return Err(Error::NonSquare {
                rows: 0,
                row: 0,
                cols: 0,
            });
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NonSquare {
                    rows: n,
                    row,
                    cols: r.len(),
                });
            }
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(states, matrix)
    }

    pub fn from_matrix(states: Vec<String>, mut matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || n == 0 {
            return Err(Error::NonSquare {
                rows: n,
                row: 0,
                cols: matrix.ncols(),
            });
        }
        if states.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: states.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = matrix[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
            let sum: f64 = matrix.row(i).iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NonStochastic { row: i, sum });
            }
            if sum != 1.0 {
                let mut row = matrix.row_mut(i);
                row /= sum;
            }
        }
        Ok(Self { states, matrix })
    }

    /// Builds a kernel from a matrix already known to be stochastic up to rounding.
    pub(crate) fn from_matrix_unchecked(states: Vec<String>, mut matrix: DMatrix<f64>) -> Self {
        for i in 0..matrix.nrows() {
            for v in matrix.row_mut(i).iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let sum: f64 = matrix.row(i).iter().sum();
            let mut row = matrix.row_mut(i);
            row /= sum;
        }
        Self { states, matrix }
    }

    /// The deterministic kernel of a permutation: state `i` moves to `next[i]`.
    pub fn permutation(next: &[usize]) -> Result<Self> {
        let n = next.len();
        let mut rows = vec![vec![0.0; n]; n];
        for (i, &j) in next.iter().enumerate() {
            if j >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: j + 1,
                });
            }
            rows[i][j] = 1.0;
        }
        Self::from_rows(&rows)
    }

    /// The i.i.d. kernel whose rows all equal `law`.
    pub fn iid(law: &[f64]) -> Result<Self> {
        let rows = vec![law.to_vec(); law.len()];
        Self::from_rows(&rows)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    /// `(P f)(i) = Σ_j P(i, j) f(j)`.
    pub fn apply(&self, f: &Observable) -> Observable {
        Observable::from_vector(&self.matrix * f.values())
    }

    /// Largest absolute deviation of a row sum from 1.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.matrix.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// A nonnegative weight vector over states.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: DVector<f64>,
    normalized: bool,
}

impl Measure {
    pub fn new(weights: DVector<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("weight {w}")));
        }
        let mass: f64 = weights.iter().sum();
        if mass <= 0.0 {
            return Err(Error::InvalidMeasure("zero total mass".into()));
        }
        Ok(Self {
            normalized: (mass - 1.0).abs() <= 1e-12,
            weights,
        })
    }

    pub fn from_slice(weights: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: DVector::from_element(n, 1.0 / n as f64),
            normalized: true,
        }
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn normalize(&self) -> Self {
        let mass = self.mass();
        Self {
            weights: &self.weights / mass,
            normalized: true,
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn integrate(&self, f: &Observable) -> f64 {
        self.weights.dot(f.values())
    }

    /// `Σ_i m_i f_i g_i`.
    pub fn inner(&self, f: &Observable, g: &Observable) -> f64 {
        self.weights
            .iter()
            .zip(f.values().iter().zip(g.values().iter()))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// The restriction to a subset, indexed by the subset's members, keeping the original weights.
    pub fn restrict(&self, mask: &SubsetMask) -> Result<Self> {
        let w: Vec<f64> = mask.indices().iter().map(|&i| self.weights[i]).collect();
        Self::from_slice(&w)
    }

    /// Mass-weighted L1 norm of `f`.
    pub fn l1_norm(&self, f: &Observable) -> f64 {
        self.weights
            .iter()
            .zip(f.values().iter())
            .map(|(w, v)| w * v.abs())
            .sum()
    }
}

/// A real function on states.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    values: DVector<f64>,
}

impl Observable {
    pub fn new(values: &[f64]) -> Self {
        Self {
            values: DVector::from_column_slice(values),
        }
    }

    pub fn from_vector(values: DVector<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_vector(DVector::zeros(n))
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::from_vector(DVector::from_element(n, c))
    }

    pub fn indicator(mask: &SubsetMask) -> Self {
        Self::from_vector(DVector::from_iterator(
            mask.len(),
            mask.members().iter().map(|&b| if b { 1.0 } else { 0.0 }),
        ))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self, m: &Measure) -> f64 {
        m.integrate(self) / m.mass()
    }

    /// `f - ∫f dm / m(total)`.
    pub fn centered(&self, m: &Measure) -> Self {
        let mean = self.mean(m);
        Self::from_vector(self.values.add_scalar(-mean))
    }

    /// Whether `|∫ f dm| ≤ tol · m(total) · max(‖f‖∞, 1e-300)`.
    pub fn is_centered(&self, m: &Measure, tol: f64) -> bool {
        m.integrate(self).abs() <= tol * m.mass() * self.norm_inf().max(1e-300)
    }

    pub fn restrict(&self, mask: &SubsetMask) -> Self {
        Self::from_vector(DVector::from_iterator(
            mask.count(),
            mask.indices().iter().map(|&i| self.values[i]),
        ))
    }

    /// Extends a function given on the subset's members by zero.
    pub fn extend_by_zero(&self, mask: &SubsetMask) -> Self {
        let mut v = DVector::zeros(mask.len());
        for (k, &i) in mask.indices().iter().enumerate() {
            v[i] = self.values[k];
        }
        Self::from_vector(v)
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        Self::from_vector(self.values.component_mul(&other.values))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_vector(&self.values * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_vector(&self.values + &other.values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_vector(&self.values - &other.values)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        Self::from_vector(self.values.add_scalar(c))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.values - &other.values).amax()
    }
}

/// Membership flags over states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    members: Vec<bool>,
}

impl SubsetMask {
    pub fn new(members: Vec<bool>) -> Self {
        Self { members }
    }

    pub fn all(n: usize) -> Self {
        Self::new(vec![true; n])
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut members = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: i + 1,
                });
            }
            members[i] = true;
        }
        Ok(Self { members })
    }

    pub fn from_labels<S: AsRef<str>>(kernel: &StochasticKernel, labels: &[S]) -> Result<Self> {
        let indices = labels
            .iter()
            .map(|l| kernel.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(kernel.len(), &indices)
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.members[i]).collect()
    }

    pub fn complement(&self) -> Self {
        Self::new(self.members.iter().map(|b| !b).collect())
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .members
                .iter()
                .zip(other.members.iter())
                .all(|(a, b)| !a || *b)
    }

    /// Re-expresses this mask in the coordinates of the states of `outer`.
    pub fn relative_to(&self, outer: &Self) -> Result<Self> {
        if !self.is_subset_of(outer) {
            return Err(Error::InvalidConfig(
                "inner subset is not contained in the outer subset".into(),
            ));
        }
        Ok(Self::new(
            outer.indices().iter().map(|&i| self.members[i]).collect(),
        ))
    }
}
