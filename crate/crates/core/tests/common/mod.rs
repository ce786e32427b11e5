//! Independent reference computations for the integration tests.
//!
//! Everything here works on plain `Vec` rows with hand-written elimination or
//! fixed-point iteration, so it shares no numerical code with the library.

#![allow(dead_code, clippy::needless_range_loop)]

use markov_induce::{Measure, Observable, StochasticKernel};
use num_complex::Complex64;
use proptest::prelude::*;

pub type Rows = Vec<Vec<f64>>;

/// Solves `a x = b` by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan(mut a: Rows, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let d = a[col][col];
        assert!(d.abs() > 1e-300, "singular system");
        for j in 0..n {
            a[col][j] /= d;
        }
        b[col] /= d;
        for i in 0..n {
            if i != col && a[i][col] != 0.0 {
                let factor = a[i][col];
                for j in 0..n {
                    a[i][j] -= factor * a[col][j];
                }
                b[i] -= factor * b[col];
            }
        }
    }
    b
}

pub fn rows_of(k: &StochasticKernel) -> Rows {
    (0..k.len())
        .map(|i| (0..k.len()).map(|j| k.get(i, j)).collect())
        .collect()
}

pub fn values(f: &Observable) -> Vec<f64> {
    (0..f.len()).map(|i| f.get(i)).collect()
}

pub fn weights(m: &Measure) -> Vec<f64> {
    (0..m.len()).map(|i| m.weight(i)).collect()
}

/// `π` from `πP = π`, `Σπ = 1`, replacing the last balance equation by the normalization.
pub fn stationary(p: &Rows) -> Vec<f64> {
    let n = p.len();
    let mut a: Rows = (0..n)
        .map(|i| (0..n).map(|j| p[j][i] - if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    gauss_jordan(a, b)
}

pub fn apply(p: &Rows, f: &[f64]) -> Vec<f64> {
    p.iter().map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum()).collect()
}

pub fn inner(pi: &[f64], f: &[f64], g: &[f64]) -> f64 {
    (0..pi.len()).map(|i| pi[i] * f[i] * g[i]).sum()
}

pub fn hadamard(f: &[f64], g: &[f64]) -> Vec<f64> {
    f.iter().zip(g).map(|(a, b)| a * b).collect()
}

/// Induced kernel by summing excursions through the complement,
/// `P_ΨΨ + Σ_k P_ΨC Q^k P_CΨ`, until the surviving mass drops below `1e-17`.
pub fn induced(p: &Rows, inside: &[usize]) -> Rows {
    let n = p.len();
    let outside: Vec<usize> = (0..n).filter(|i| !inside.contains(i)).collect();
    let mut result: Rows = inside
        .iter()
        .map(|&a| inside.iter().map(|&b| p[a][b]).collect())
        .collect();
    for (r, &a) in inside.iter().enumerate() {
        // mass currently outside, indexed by state
        let mut alive: Vec<f64> = (0..n)
            .map(|x| if outside.contains(&x) { p[a][x] } else { 0.0 })
            .collect();
        for _ in 0..200_000 {
            if alive.iter().sum::<f64>() < 1e-17 {
                break;
            }
            let mut next = vec![0.0; n];
            for &x in &outside {
                for y in 0..n {
                    next[y] += alive[x] * p[x][y];
                }
            }
            for (c, &b) in inside.iter().enumerate() {
                result[r][c] += next[b];
                next[b] = 0.0;
            }
            alive = next;
        }
    }
    result
}

/// `E_ω[S^k]` for `k = 0..=order` and every `ω ∈ Ψ`, where `S` sums `f` along one
/// excursion, by value iteration on `u_k(x) = E_x[(Σ_{t<τ} f(X_t))^k]` over the complement.
pub fn excursion_moments(p: &Rows, inside: &[usize], f: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = p.len();
    let binom = |k: usize, j: usize| -> f64 { (1..=j).map(|i| (k + 1 - i) as f64 / i as f64).product() };
    let step = |u: &Vec<Vec<f64>>, x: usize| -> Vec<f64> {
        (0..=order)
            .map(|k| {
                (0..n)
                    .map(|y| {
                        let tail = if inside.contains(&y) {
                            f[x].powi(k as i32)
                        } else {
                            (0..=k).map(|j| binom(k, j) * f[x].powi((k - j) as i32) * u[y][j]).sum()
                        };
                        p[x][y] * tail
                    })
                    .sum()
            })
            .collect()
    };
    let mut u = vec![vec![0.0; order + 1]; n];
    for _ in 0..100_000 {
        let next: Vec<Vec<f64>> = (0..n).map(|x| if inside.contains(&x) { vec![0.0; order + 1] } else { step(&u, x) }).collect();
        let change = next
            .iter()
            .zip(&u)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        u = next;
        if change < 1e-16 {
            break;
        }
    }
    inside.iter().map(|&w| step(&u, w)).collect()
}

/// `⟨f, g⟩ + Σ_{n=1}^{N} (⟨f, Pⁿg⟩ + ⟨g, Pⁿf⟩)`.
pub fn sigma2_series(p: &Rows, pi: &[f64], f: &[f64], g: &[f64], horizon: usize) -> f64 {
    let mut total = inner(pi, f, g);
    let (mut pf, mut pg) = (f.to_vec(), g.to_vec());
    for _ in 0..horizon {
        pf = apply(p, &pf);
        pg = apply(p, &pg);
        total += inner(pi, f, &pg) + inner(pi, g, &pf);
    }
    total
}

/// `τ³` from its defining sums truncated at `N` in each index:
/// `Σ_Alt [⟨fg, h⟩/6 + ½ Σ_n ⟨h, Pⁿ(fg)⟩ + ½ Σ_n ⟨gh, Pⁿ f⟩ + Σ_{n,m} ⟨h, Pᵐ(g ⊙ Pⁿ f)⟩]`, `n, m ≥ 1`.
pub fn tau3_brute(p: &Rows, pi: &[f64], f: &[f64], g: &[f64], h: &[f64], horizon: usize) -> f64 {
    let args = [f, g, h];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut total = 0.0;
    for [i, j, k] in perms {
        let (a, b, c) = (args[i], args[j], args[k]);
        let ab = hadamard(a, b);
        let bc = hadamard(b, c);
        let mut value = inner(pi, &ab, c) / 6.0;
        let mut p_ab = ab.clone();
        let mut p_a = a.to_vec();
        for _ in 0..horizon {
            p_ab = apply(p, &p_ab);
            p_a = apply(p, &p_a);
            value += 0.5 * inner(pi, c, &p_ab) + 0.5 * inner(pi, &bc, &p_a);
            let mut inner_term = hadamard(b, &p_a);
            for _ in 0..horizon {
                inner_term = apply(p, &inner_term);
                value += inner(pi, c, &inner_term);
            }
        }
        total += value;
    }
    total
}

/// `a(p) + a(-p) = (1/2π) ∫ (2 - 2 cos θp) π (I - D_θ P)^{-1} 1 dθ` for a walk on `Z`,
/// by the midpoint rule on `points` nodes (the integrand is smooth on the circle).
pub fn potential_fourier(p: &Rows, pi: &[f64], steps: &[i64], target: i64, points: usize) -> f64 {
    let n = p.len();
    let mut total = 0.0;
    for k in 0..points {
        let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / points as f64;
        // solve (I - D P)^T-free form: x = (I - D P)^{-1} 1
        let mut a: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let phase = Complex64::from_polar(1.0, theta * steps[i] as f64);
                (0..n)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0) - phase * p[i][j])
                    .collect()
            })
            .collect();
        let mut b = vec![Complex64::new(1.0, 0.0); n];
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            let d = a[col][col];
            for j in 0..n {
                a[col][j] /= d;
            }
            b[col] /= d;
            for i in 0..n {
                if i != col {
                    let factor = a[i][col];
                    for j in 0..n {
                        let v = a[col][j];
                        a[i][j] -= factor * v;
                    }
                    let v = b[col];
                    b[i] -= factor * v;
                }
            }
        }
        let value: Complex64 = (0..n).map(|i| b[i] * pi[i]).sum();
        total += (2.0 - 2.0 * (theta * target as f64).cos()) * value.re;
    }
    total / points as f64
}

/// Binomial law of the simple random walk: `P(S_n = p)`.
pub fn srw_probability(n: u64, p: i64) -> f64 {
    if p.unsigned_abs() > n || (n as i64 + p) % 2 != 0 {
        return 0.0;
    }
    let k = ((n as i64 + p) / 2) as u64;
    let log = ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k) - n as f64 * std::f64::consts::LN_2;
    log.exp()
}

fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// Raw rows of a random irreducible, aperiodic kernel: a cycle through all states,
/// a self-loop at state 0 and sparse random entries.
pub fn ergodic_rows(n: usize, raw: &[f64]) -> Rows {
    let mut rows: Rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = raw[i * n + j];
                    if v < 0.35 {
                        0.0
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    for i in 0..n {
        rows[i][(i + 1) % n] += 0.2 + raw[n * n + i];
    }
    rows[0][0] += 0.3;
    for row in &mut rows {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    rows
}

/// A random ergodic chain on `min..=max` states with a raw parameter vector for
/// observables and subsets.
pub fn chain_strategy(min: usize, max: usize) -> impl Strategy<Value = (Rows, Vec<f64>)> {
    (min..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..1.0, n * n + n).prop_map(move |raw| ergodic_rows(n, &raw)),
            prop::collection::vec(-1.0f64..1.0, 4 * n),
        )
    })
}

pub fn kernel(rows: &Rows) -> StochasticKernel {
    StochasticKernel::from_rows(rows).unwrap()
}

/// `values[offset..offset + n]` shifted to have `π`-mean zero.
pub fn centered(pi: &[f64], raw: &[f64], offset: usize) -> Observable {
    let n = pi.len();
    let v = &raw[offset * n..(offset + 1) * n];
    let mean: f64 = (0..n).map(|i| pi[i] * v[i]).sum();
    Observable::new(&v.iter().map(|x| x - mean).collect::<Vec<_>>())
}

/// A nonempty subset chosen from the signs of `raw[3n..4n]` (state 0 when all are negative).
pub fn subset_of(raw: &[f64], n: usize) -> Vec<usize> {
    let picked: Vec<usize> = (0..n).filter(|&i| raw[3 * n + i] > 0.0).collect();
    if picked.is_empty() {
        vec![0]
    } else {
        picked
    }
}
