use nalgebra::DVector;

use super::{permutations, require_centered, require_mixing, sup, Correlator, Tau3Method, Tau3Result};
use crate::error::{Error, Result};
use crate::markov::{Measure, Observable, StochasticKernel};

fn prepare(
    kernel: &StochasticKernel,
    pi: &Measure,
    fs: [&Observable; 3],
) -> Result<Correlator> {
    for f in fs {
        if f.len() != kernel.len() {
            return Err(Error::DimensionMismatch {
                expected: kernel.len(),
                found: f.len(),
            });
        }
    }
    require_mixing(kernel)?;
    require_centered(pi, &fs)?;
    Correlator::new(kernel, pi)
}

fn check_horizon(horizon: usize, tol: f64) -> Result<()> {
    if horizon > 1 << 20 {
        return Err(Error::Unsupported(format!(
            "series horizon {horizon} too large for tolerance {tol:e}"
        )));
    }
    Ok(())
}

/// `τ³(f, g, h) = Σ_Alt [∫fgh/6 + ½ Σ_{n≥1} ∫ fg·Lⁿh + ½ Σ_{n≥1} ∫ f·Lⁿ(gh)
/// + Σ_{n,m≥1} ∫ f·Lⁿ(g·Lᵐh)]`.
///
/// In the chain convention the three correlation families are
/// `Σ_{n≥1} ⟨h, Pⁿ(fg)⟩`, `Σ_{n≥1} ⟨gh, Pⁿ f⟩` and
/// `Σ_{m≥1} ⟨h, Pᵐ(g ⊙ Σ_{n≥1} Pⁿ f)⟩`, each closed through the potential kernel.
pub fn tau3_series(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    g: &Observable,
    h: &Observable,
    _tol: f64,
) -> Result<Tau3Result> {
    let corr = prepare(kernel, pi, [f, g, h])?;
    let value = permutations([f.values(), g.values(), h.values()])
        .iter()
        .map(|[a, b, c]| {
            let ab = a.component_mul(b);
            let bc = b.component_mul(c);
            let t0 = corr.inner(&ab, c);
            let t1 = corr.lag_sum(c, &ab);
            let t2 = corr.lag_sum(&bc, a);
            let future_a = corr.gamma(a) - *a;
            let t3 = corr.lag_sum(c, &b.component_mul(&future_a));
            t0 / 6.0 + 0.5 * t1 + 0.5 * t2 + t3
        })
        .sum();
    Ok(Tau3Result {
        value,
        method: Tau3Method::Series,
        truncation_error_bound: 0.0,
        horizon: 0,
    })
}

/// The same form with all sums starting at zero:
/// `Σ_Alt [∫fgh/6 - ½ Σ_{n≥0} ⟨h, Pⁿ(fg)⟩ - ½ Σ_{n≥0} ⟨gh, Pⁿ f⟩ + Σ_{n,m≥0} ⟨h, Pᵐ(g ⊙ Pⁿ f)⟩]`,
/// summed by explicit powers of `P` up to a horizon with a rigorous tail bound.
pub fn tau3_shifted_form(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    g: &Observable,
    h: &Observable,
    tol: f64,
) -> Result<Tau3Result> {
    let corr = prepare(kernel, pi, [f, g, h])?;
    let env = corr.envelope()?;
    let perms = permutations([f.values(), g.values(), h.values()]);

    let bound = |n: usize| -> f64 {
        let tail = env.tail(n);
        let total = env.total();
        perms
            .iter()
            .map(|[a, b, c]| {
                let u1 = corr.l1(c) * sup(&a.component_mul(b)) * tail;
                let u2 = corr.l1(&b.component_mul(c)) * sup(a) * tail;
                let inner_error = sup(a) * tail;
                let u3 = corr.l1(c) * sup(b) * (inner_error * total + sup(a) * total * tail);
                0.5 * u1 + 0.5 * u2 + u3
            })
            .sum()
    };
    let horizon = env.horizon_by(bound, tol);
    check_horizon(horizon, tol)?;

    let value = perms
        .iter()
        .map(|[a, b, c]| {
            let ab = a.component_mul(b);
            let bc = b.component_mul(c);
            let t0 = corr.inner(&ab, c);
            let mut u1 = 0.0;
            let mut u2 = 0.0;
            let mut p_ab = ab.clone();
            let mut p_a = (*a).clone();
            let mut future_a = DVector::zeros(a.len());
            for _ in 0..=horizon {
                u1 += corr.inner(c, &p_ab);
                u2 += corr.inner(&bc, &p_a);
                future_a += &p_a;
                p_ab = corr.step(&p_ab);
                p_a = corr.step(&p_a);
            }
            let mut inner = b.component_mul(&future_a);
            let mut u3 = 0.0;
            for _ in 0..=horizon {
                u3 += corr.inner(c, &inner);
                inner = corr.step(&inner);
            }
            t0 / 6.0 - 0.5 * u1 - 0.5 * u2 + u3
        })
        .sum();
    Ok(Tau3Result {
        value,
        method: Tau3Method::ShiftedForm,
        truncation_error_bound: bound(horizon),
        horizon,
    })
}

/// `τ³(f, g, h) = σ²(fg, h) + Σ_{n≥1} σ²(f · g∘Tⁿ, h) + Σ_{n≥1} σ²(f∘Tⁿ · g, h)`.
///
/// The lag products `f(X_0) g(X_n)` are functions of two times; their `σ²` with `h`
/// is evaluated through the three-point correlations of the chain.
pub fn tau3_via_sigma(
    kernel: &StochasticKernel,
    pi: &Measure,
    f: &Observable,
    g: &Observable,
    h: &Observable,
    tol: f64,
) -> Result<Tau3Result> {
    let corr = prepare(kernel, pi, [f, g, h])?;
    let env = corr.envelope()?;
    let (fv, gv, hv) = (f.values(), g.values(), h.values());
    let future_h = corr.gamma(hv) - hv;

    let constants = |a: &DVector<f64>, b: &DVector<f64>| -> (f64, f64) {
        let c1 = corr.l1(&a.component_mul(hv)) * sup(b)
            + corr.l1(a) * sup(&b.component_mul(hv))
            + corr.l1(a) * sup(b) * sup(&future_h)
            + corr.l1(hv) * sup(a) * sup(b) * env.tail(0);
        let c2 = corr.l1(a) * sup(hv) * sup(b);
        (c1, c2)
    };
    let (c1_fg, c2_fg) = constants(fv, gv);
    let (c1_gf, c2_gf) = constants(gv, fv);
    let bound = |n: usize| -> f64 {
        (c1_fg + c1_gf) * env.tail(n) + (c2_fg + c2_gf) * env.convolution_tail(n)
    };
    let horizon = env.horizon_by(bound, tol);
    check_horizon(horizon, tol)?;

    let base = corr.sigma2(&fv.component_mul(gv), hv);
    let value = base + lag_product_series(&corr, fv, gv, hv, &future_h, horizon)
        + lag_product_series(&corr, gv, fv, hv, &future_h, horizon);
    Ok(Tau3Result {
        value,
        method: Tau3Method::ViaSigma,
        truncation_error_bound: bound(horizon),
        horizon,
    })
}

/// `Σ_{n=1}^{N} σ²(a(X_0) b(X_n), h)` for centered `a`, `b`, `h`.
fn lag_product_series(
    corr: &Correlator,
    a: &DVector<f64>,
    b: &DVector<f64>,
    h: &DVector<f64>,
    future_h: &DVector<f64>,
    horizon: usize,
) -> f64 {
    let ah = a.component_mul(h);
    let bh = b.component_mul(h);
    let b_future_h = b.component_mul(future_h);
    // p_b = Pⁿ b, p_bh = Pⁿ(bh), p_bfh = Pⁿ(b ⊙ (Γ - I) h),
    // middle = Σ_{k=1}^{n-1} P^k (h ⊙ P^{n-k} b)
    let mut p_b = corr.step(b);
    let mut p_bh = corr.step(&bh);
    let mut p_bfh = corr.step(&b_future_h);
    let mut middle = DVector::zeros(a.len());
    let mut total = 0.0;
    for _ in 1..=horizon {
        let same_time = corr.inner(&ah, &p_b);
        let inside = corr.inner(a, &middle);
        let at_end = corr.inner(a, &p_bh);
        let after = corr.inner(a, &p_bfh);
        let before = corr.lag_sum(h, &a.component_mul(&p_b));
        total += same_time + inside + at_end + after + before;

        middle = corr.step(&(middle + h.component_mul(&p_b)));
        p_b = corr.step(&p_b);
        p_bh = corr.step(&p_bh);
        p_bfh = corr.step(&p_bfh);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::stationary_measure;

    fn bernoulli(p: f64) -> (StochasticKernel, Measure, Observable) {
        let k = StochasticKernel::iid(&[p, 1.0 - p]).unwrap();
        let pi = stationary_measure(&k).unwrap();
        (k, pi, Observable::new(&[-(1.0 - p), p]))
    }

    #[test]
    fn bernoulli_value() {
        for p in [0.3, 0.5, 0.8] {
            let (k, pi, f) = bernoulli(p);
            let expected = p * (1.0 - p) * (2.0 * p - 1.0);
            for r in [
                tau3_series(&k, &pi, &f, &f, &f, 1e-12).unwrap(),
                tau3_shifted_form(&k, &pi, &f, &f, &f, 1e-12).unwrap(),
                tau3_via_sigma(&k, &pi, &f, &f, &f, 1e-12).unwrap(),
            ] {
                assert!((r.value - expected).abs() < 1e-13, "{r:?} vs {expected}");
            }
        }
    }

    #[test]
    fn zero_argument_gives_zero() {
        let (k, pi, f) = bernoulli(0.3);
        let z = Observable::zeros(2);
        assert_eq!(tau3_series(&k, &pi, &f, &z, &f, 1e-12).unwrap().value, 0.0);
        assert_eq!(tau3_shifted_form(&k, &pi, &z, &f, &f, 1e-12).unwrap().value, 0.0);
        assert_eq!(tau3_via_sigma(&k, &pi, &f, &f, &z, 1e-12).unwrap().value, 0.0);
    }

    #[test]
    fn paths_agree_on_a_correlated_chain() {
        let k = StochasticKernel::from_rows(&[
            vec![0.1, 0.6, 0.3, 0.0],
            vec![0.4, 0.0, 0.5, 0.1],
            vec![0.2, 0.25, 0.25, 0.3],
            vec![0.7, 0.1, 0.0, 0.2],
        ])
        .unwrap();
        let pi = stationary_measure(&k).unwrap();
        let f = Observable::new(&[1.0, -0.5, 2.0, 0.3]).centered(&pi);
        let g = Observable::new(&[-1.0, 0.5, 0.7, 1.3]).centered(&pi);
        let h = Observable::new(&[0.2, 1.5, -2.0, 0.4]).centered(&pi);
        let a = tau3_series(&k, &pi, &f, &g, &h, 1e-12).unwrap();
        let b = tau3_shifted_form(&k, &pi, &f, &g, &h, 1e-12).unwrap();
        let c = tau3_via_sigma(&k, &pi, &f, &g, &h, 1e-12).unwrap();
        assert!((a.value - b.value).abs() <= b.truncation_error_bound + 1e-12, "{a:?} {b:?}");
        assert!((a.value - c.value).abs() <= c.truncation_error_bound + 1e-12, "{a:?} {c:?}");
        assert!(b.truncation_error_bound <= 1e-12);
    }

    #[test]
    fn periodic_chain_is_refused() {
        let k = StochasticKernel::permutation(&[1, 0]).unwrap();
        let pi = stationary_measure(&k).unwrap();
        let f = Observable::new(&[1.0, -1.0]);
        assert_eq!(
            tau3_series(&k, &pi, &f, &f, &f, 1e-9).unwrap_err(),
            Error::Periodic { period: 2 }
        );
    }
}
