//! One function per subcommand. Each returns a [`Report`]; input errors are
//! recorded in the report rather than returned.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::model::ModelFile;
use super::report::Report;
use crate::error::{Error, Result};
use crate::excursion::excursion_moments;
use crate::invariants::{
    green_kubo_induced_bilinear, green_kubo_resolvent, green_kubo_series, tau3_quasi_invariance_check_mixed,
    tau3_series, tau3_shifted_form, tau3_via_sigma, HChoice, QUASI_TOLERANCE,
};
use crate::lattice::{
    characteristic_probability, hitting_exact, hitting_mc, potential_series, return_probabilities, LatticeModel,
    SeriesConfig,
};
use crate::markov::{
    classify, dual_kernel, induced_kernel, return_time_distribution, stationarity_residual, stationary_measure,
    InducedSystem, Measure, Observable, StochasticKernel, SubsetMask,
};
use crate::poisson::{nonlocalized_correction, solve_poisson, verify_poisson_induction, IDENTITY_TOLERANCE};
use crate::random::{random_centered, random_kernel, random_subset};
use crate::trajectory::{birkhoff_variance, induced_birkhoff_variance, EmpiricalEstimate, SimConfig};

/// Monte Carlo settings shared by the sampling subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McOptions {
    pub paths: usize,
    pub horizon: usize,
    pub burn_in: usize,
    #[serde(skip)]
    pub workers: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            paths: 1000,
            horizon: 10_000,
            burn_in: 0,
            workers: 1,
        }
    }
}

impl McOptions {
    fn config(&self, seed: u64) -> SimConfig {
        SimConfig {
            seed,
            trajectories: self.paths,
            horizon: self.horizon,
            burn_in: self.burn_in,
            workers: self.workers,
        }
    }
}

fn run(command: &str, inputs: Value, seed: Option<u64>, body: impl FnOnce(&mut Report) -> Result<()>) -> Report {
    let mut report = Report::new(command, &inputs, seed);
    if let Err(e) = body(&mut report) {
        report.fail_with(&e);
    }
    report
}

fn model_inputs(command: &str, model: &ModelFile, args: Value) -> Value {
    json!({"command": command, "model": model.canonical(), "args": args})
}

fn labelled(kernel: &StochasticKernel, name: &str, i: usize) -> String {
    format!("{name}[{}]", kernel.states()[i])
}

fn chain(model: &ModelFile) -> Result<(StochasticKernel, Measure)> {
    model.validate()?;
    let kernel = model.kernel()?;
    let pi = stationary_measure(&kernel)?;
    Ok((kernel, pi))
}

fn required_subset(model: &ModelFile, kernel: &StochasticKernel, subset: Option<&[String]>) -> Result<SubsetMask> {
    model
        .subset(kernel, subset)?
        .ok_or_else(|| Error::Model("a subset is required (in the file or with --subset)".into()))
}

/// Relative gap `|a - b| / max(1, |b|)`.
fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn stationary(model: &ModelFile, tol: f64) -> Report {
    let inputs = model_inputs("stationary", model, json!({"tol": tol}));
    run("stationary", inputs, None, |r| {
        let (kernel, pi) = chain(model)?;
        for i in 0..kernel.len() {
            r.push(labelled(&kernel, "pi", i), "lu", pi.weight(i), None);
        }
        let c = classify(&kernel);
        r.push("period", "bfs", c.period as f64, None);
        r.check("stationarity residual", stationarity_residual(&kernel, &pi), tol);
        Ok(())
    })
}

pub fn induce(model: &ModelFile, subset: Option<&[String]>, horizon: usize, tol: f64) -> Report {
    let inputs = model_inputs("induce", model, json!({"subset": subset, "horizon": horizon, "tol": tol}));
    run("induce", inputs, None, |r| {
        let (kernel, pi) = chain(model)?;
        let mask = required_subset(model, &kernel, subset)?;
        let induced = induced_kernel(&kernel, &mask)?;
        let labels = induced.states().to_vec();
        for (a, from) in labels.iter().enumerate() {
            for (b, to) in labels.iter().enumerate() {
                r.push(format!("P_psi[{from},{to}]"), "schur-complement", induced.get(a, b), None);
            }
        }
        let system = InducedSystem::new(&kernel, &mask)?;
        for (a, t) in system.expected_return_times().iter().enumerate() {
            r.push(format!("E[return time | {}]", labels[a]), "resolvent", *t, None);
        }
        let table = return_time_distribution(&kernel, &mask, horizon)?;
        let mut worst = 0.0f64;
        for (a, row) in table.probabilities.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                r.push(format!("P(return = {} | {})", t + 1, labels[a]), "propagation", *v, None);
            }
            r.push(format!("P(return > {horizon} | {})", labels[a]), "propagation", table.tail[a], None);
            worst = worst.max((row.iter().sum::<f64>() + table.tail[a] - 1.0).abs());
        }
        r.push("complement spectral radius", "eigenvalues", table.spectral_radius, None);
        r.check("induced kernel is stochastic", induced.row_sum_defect(), tol);
        r.check("return-time table sums to 1", worst, tol);
        r.check("Kac: sum of pi(a) E[return time | a] = 1", (system.kac_sum(&pi) - 1.0).abs(), tol);
        Ok(())
    })
}

pub fn poisson(model: &ModelFile, g_name: &str, subset: Option<&[String]>, strict: bool, tol: f64) -> Report {
    let inputs = model_inputs(
        "poisson",
        model,
        json!({"g": g_name, "subset": subset, "strict": strict, "tol": tol}),
    );
    run("poisson", inputs, None, |r| {
        let (kernel, pi) = chain(model)?;
        let g = model.observable(g_name)?;
        let solution = solve_poisson(&kernel, &pi, &g)?;
        for i in 0..kernel.len() {
            r.push(labelled(&kernel, "f", i), "potential-kernel", solution.f.get(i), None);
        }
        r.check("(I - P) f = g", solution.residual, tol.max(IDENTITY_TOLERANCE * g.norm_inf()));
        let Some(mask) = model.subset(&kernel, subset)? else {
            return Ok(());
        };
        let supported = mask.complement().indices().iter().all(|&i| g.get(i) == 0.0);
        if supported || strict {
            let induction = verify_poisson_induction(&kernel, &pi, &mask, &g)?;
            r.check(
                "(I - P_psi) f|psi = g|psi",
                induction.max_abs_gap,
                IDENTITY_TOLERANCE * g.norm_inf().max(1.0),
            );
        } else {
            let c = nonlocalized_correction(&kernel, &pi, &mask, &g, tol)?;
            let inside = mask.indices();
            for (k, &i) in inside.iter().enumerate() {
                r.push(labelled(&kernel, "correction", i), "closed-form", c.closed_form.get(k), None);
                r.push(
                    labelled(&kernel, "correction", i),
                    "excursion-series",
                    c.series.get(k),
                    Some(c.series_bound),
                );
            }
            r.check(
                "(I - P_psi) f|psi = g|psi + correction",
                c.identity_residual,
                IDENTITY_TOLERANCE * g.norm_inf().max(1.0),
            );
            let series_gap = c.series.max_abs_diff(&c.closed_form);
            r.check("excursion series matches closed form", series_gap, c.series_bound + tol);
        }
        Ok(())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GkChoice {
    All,
    Resolvent,
    Series,
    Excursion,
    Mc,
}

pub struct GreenKuboArgs<'a> {
    pub f: &'a str,
    pub g: Option<&'a str>,
    pub subset: Option<&'a [String]>,
    pub method: GkChoice,
    pub tol: f64,
    pub seed: u64,
    pub mc: McOptions,
}

pub fn green_kubo(model: &ModelFile, args: &GreenKuboArgs) -> Report {
    let inputs = model_inputs(
        "green-kubo",
        model,
        json!({"f": args.f, "g": args.g, "subset": args.subset, "method": args.method,
               "tol": args.tol, "mc": args.mc}),
    );
    let seed = (args.method == GkChoice::Mc).then_some(args.seed);
    run("green-kubo", inputs, seed, |r| {
        let (kernel, pi) = chain(model)?;
        let f = model.observable(args.f)?;
        let g = args.g.map(|n| model.observable(n)).transpose()?.unwrap_or_else(|| f.clone());
        let mask = model.subset(&kernel, args.subset)?;
        let reference = green_kubo_resolvent(&kernel, &pi, &f, &g)?.value;
        let want = |m: GkChoice| args.method == m || (args.method == GkChoice::All && m != GkChoice::Mc);

        if want(GkChoice::Resolvent) {
            r.push("sigma2", "resolvent", reference, Some(0.0));
        }
        if want(GkChoice::Series) {
            let s = green_kubo_series(&kernel, &pi, &f, &g, args.tol)?;
            r.push("sigma2", "series", s.value, Some(s.truncation_error_bound));
            r.check(
                "series agrees with resolvent",
                (s.value - reference).abs(),
                s.truncation_error_bound + args.tol * reference.abs().max(1.0),
            );
        }
        if want(GkChoice::Excursion) {
            match &mask {
                Some(mask) => {
                    let e = green_kubo_induced_bilinear(&kernel, &pi, mask, &f, &g)?;
                    r.push("sigma2 (induced)", "excursion", e.value, Some(0.0));
                    r.check("induced agrees with original", rel_gap(e.value, reference), 1e-8);
                }
                None if args.method == GkChoice::Excursion => {
                    return Err(Error::Model("the excursion method needs a subset".into()));
                }
                None => {}
            }
        }
        if args.method == GkChoice::Mc {
            let cfg = args.mc.config(args.seed);
            let estimate = polarized(&f, &g, |h| birkhoff_variance(&kernel, &pi, h, &cfg))?;
            r.push("sigma2", "monte-carlo", estimate.mean, Some(estimate.stderr));
            r.check("monte carlo within 3 stderr", (estimate.mean - reference).abs(), 3.0 * estimate.stderr);
            if let Some(mask) = &mask {
                let induced = polarized(&f, &g, |h| induced_birkhoff_variance(&kernel, &pi, mask, h, &cfg))?;
                r.push("sigma2 (induced)", "monte-carlo", induced.mean, Some(induced.stderr));
                r.check(
                    "induced monte carlo within 3 stderr",
                    (induced.mean - reference).abs(),
                    3.0 * induced.stderr,
                );
            }
        }
        Ok(())
    })
}

/// `σ²(f, g)` from `σ²(h, h)` estimates by polarization when `f ≠ g`.
fn polarized(
    f: &Observable,
    g: &Observable,
    estimate: impl Fn(&Observable) -> Result<EmpiricalEstimate>,
) -> Result<EmpiricalEstimate> {
    if f == g {
        return estimate(f);
    }
    let plus = estimate(&f.add(g))?;
    let minus = estimate(&f.sub(g))?;
    Ok(EmpiricalEstimate {
        mean: (plus.mean - minus.mean) / 4.0,
        variance: (plus.variance + minus.variance) / 16.0,
        stderr: (plus.stderr.powi(2) + minus.stderr.powi(2)).sqrt() / 4.0,
        n: plus.n,
    })
}

pub struct Tau3Args<'a> {
    pub f: &'a str,
    pub g: Option<&'a str>,
    pub h: Option<&'a str>,
    pub subset: Option<&'a [String]>,
    pub h_choice: HChoice,
    pub tol: f64,
}

pub fn tau3(model: &ModelFile, args: &Tau3Args) -> Report {
    let inputs = model_inputs(
        "tau3",
        model,
        json!({"f": args.f, "g": args.g, "h": args.h, "subset": args.subset,
               "h_choice": args.h_choice, "tol": args.tol}),
    );
    run("tau3", inputs, None, |r| {
        let (kernel, pi) = chain(model)?;
        let f = model.observable(args.f)?;
        let g = args.g.map(|n| model.observable(n)).transpose()?.unwrap_or_else(|| f.clone());
        let h = args.h.map(|n| model.observable(n)).transpose()?.unwrap_or_else(|| f.clone());
        let series = tau3_series(&kernel, &pi, &f, &g, &h, args.tol)?;
        let shifted = tau3_shifted_form(&kernel, &pi, &f, &g, &h, args.tol)?;
        let via = tau3_via_sigma(&kernel, &pi, &f, &g, &h, args.tol)?;
        for t in [&series, &shifted, &via] {
            r.push("tau3", t.method.as_str(), t.value, Some(t.truncation_error_bound));
        }
        for t in [&shifted, &via] {
            r.check(
                format!("{} agrees with series", t.method.as_str()),
                (t.value - series.value).abs(),
                t.truncation_error_bound + 1e-12,
            );
        }
        if let Some(mask) = model.subset(&kernel, args.subset)? {
            let q = tau3_quasi_invariance_check_mixed(&kernel, &pi, &mask, [&f, &g, &h], args.h_choice, args.tol)?;
            r.push("tau3 (induced)", "excursion", q.tau3_induced, None);
            r.push("correction", "excursion", q.correction, None);
            r.push("tau3 (induced) + correction", "excursion", q.rhs, None);
            r.check("quasi-invariance", q.gap, QUASI_TOLERANCE);
        }
        Ok(())
    })
}

/// The geometric example: i.i.d. states `0` (probability `p`) and `1`, `Ψ = {0}`,
/// `f = 1_{1} - (1 - p)` and `G = φ_Ψ - 1`.
pub fn bernoulli_demo(p: f64) -> Report {
    let inputs = json!({"command": "bernoulli-demo", "args": {"p": p}});
    run("bernoulli-demo", inputs, None, |r| {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidConfig(format!("p must lie in (0, 1), got {p}")));
        }
        let q = 1.0 - p;
        let kernel = StochasticKernel::new(vec!["0".into(), "1".into()], &[vec![p, q], vec![p, q]])?;
        let pi = stationary_measure(&kernel)?;
        let mask = SubsetMask::from_indices(2, &[0])?;
        let f = Observable::new(&[-q, p]);
        let one = Observable::constant(2, 1.0);

        let time = excursion_moments(&kernel, &pi, &mask, &one)?;
        let checks = [
            ("E(G)", time.m1[0] - 1.0, q / p),
            ("Var(G)", time.variance()[0], q / (p * p)),
            ("E[(G - EG)^3]", time.third_central()[0], q * (2.0 - p) / p.powi(3)),
        ];
        for (name, value, closed) in checks {
            r.push(name, "excursion", value, None);
            r.push(name, "closed-form", closed, None);
            r.check(format!("{name} matches closed form"), rel_gap(value, closed), 1e-10);
        }

        let sigma = green_kubo_resolvent(&kernel, &pi, &f, &f)?.value;
        let sigma_induced = green_kubo_induced_bilinear(&kernel, &pi, &mask, &f, &f)?.value;
        r.push("sigma2", "resolvent", sigma, None);
        r.push("sigma2 (induced)", "excursion", sigma_induced, None);
        r.push("sigma2", "closed-form", p * q, None);
        r.check("sigma2 = p(1 - p)", (sigma - p * q).abs(), 1e-10);
        r.check("sigma2 (induced) = p(1 - p)", (sigma_induced - p * q).abs(), 1e-10);

        let quasi = tau3_quasi_invariance_check_mixed(&kernel, &pi, &mask, [&f, &f, &f], HChoice::ReturnTime, 1e-12)?;
        r.push("tau3", "series", quasi.lhs, None);
        r.push("tau3", "closed-form", p * q * (2.0 * p - 1.0), None);
        r.push("tau3 (induced)", "excursion", quasi.tau3_induced, None);
        r.push("correction", "excursion", quasi.correction, None);
        r.push("correction", "closed-form", -3.0 * p * q * q, None);
        r.check("tau3 = p(1 - p)(2p - 1)", (quasi.lhs - p * q * (2.0 * p - 1.0)).abs(), 1e-10);
        r.check("correction = -3p(1 - p)^2", (quasi.correction + 3.0 * p * q * q).abs(), 1e-10);
        r.check("tau3 = tau3 (induced) + correction", quasi.gap, QUASI_TOLERANCE);
        Ok(())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Poisson,
    Gk,
    Tau3,
    Duality,
    Lattice,
}

/// Randomized property trials. Trial `t` draws from stream `t` of the seeded generator,
/// on the given model's kernel when there is one and on a fresh random chain otherwise.
pub fn verify(model: Option<&ModelFile>, suite: Suite, trials: usize, seed: u64) -> Report {
    let inputs = json!({"command": "verify", "model": model.map(ModelFile::canonical),
                        "args": {"suite": suite, "trials": trials}});
    run("verify", inputs, Some(seed), |r| {
        let fixed = model.map(chain).transpose()?;
        let lattice = match (suite, model) {
            (Suite::Lattice, Some(m)) => Some(m.lattice()?),
            _ => None,
        };
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let sizes = match suite {
                Suite::Tau3 => 4..=5,
                _ => 3..=8,
            };
            let (kernel, pi) = match &fixed {
                Some(c) => c.clone(),
                None => {
                    let n = rng.random_range(sizes);
                    let k = random_kernel(&mut rng, n, 0.4);
                    let pi = stationary_measure(&k)?;
                    (k, pi)
                }
            };
            let name = format!("{suite:?}[{t}]").to_lowercase();
            match suite {
                Suite::Poisson => poisson_trial(r, &name, &kernel, &pi, &mut rng)?,
                Suite::Gk => gk_trial(r, &name, &kernel, &pi, &mut rng)?,
                Suite::Tau3 => tau3_trial(r, &name, &kernel, &pi, &mut rng)?,
                Suite::Duality => duality_trial(r, &name, &kernel, &pi, &mut rng)?,
                Suite::Lattice => lattice_trial(r, &name, lattice.as_ref(), &mut rng)?,
            }
        }
        Ok(())
    })
}

fn poisson_trial(r: &mut Report, name: &str, k: &StochasticKernel, pi: &Measure, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = k.len();
    let size = rng.random_range(1..=n);
    let mask = random_subset(rng, n, size);
    let g = random_centered(rng, pi, Some(&mask));
    let report = verify_poisson_induction(k, pi, &mask, &g)?;
    r.check(name, report.max_abs_gap, IDENTITY_TOLERANCE * g.norm_inf().max(1.0));
    Ok(())
}

fn gk_trial(r: &mut Report, name: &str, k: &StochasticKernel, pi: &Measure, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = k.len();
    let size = rng.random_range(1..=n.min(3));
    let mask = random_subset(rng, n, size);
    let f = random_centered(rng, pi, None);
    let induced = green_kubo_induced_bilinear(k, pi, &mask, &f, &f)?.value;
    let direct = green_kubo_resolvent(k, pi, &f, &f)?.value;
    r.check(name, (induced - direct).abs(), 1e-8);
    Ok(())
}

fn tau3_trial(r: &mut Report, name: &str, k: &StochasticKernel, pi: &Measure, rng: &mut ChaCha8Rng) -> Result<()> {
    let [f, g, h] = [(); 3].map(|_| random_centered(rng, pi, None));
    let series = tau3_series(k, pi, &f, &g, &h, 1e-12)?;
    let shifted = tau3_shifted_form(k, pi, &f, &g, &h, 1e-12)?;
    let via = tau3_via_sigma(k, pi, &f, &g, &h, 1e-12)?;
    let gap = (series.value - shifted.value).abs().max((series.value - via.value).abs());
    let bound = shifted.truncation_error_bound.max(via.truncation_error_bound) + 1e-12;
    r.check(name, gap, bound.min(1e-9));
    Ok(())
}

fn duality_trial(r: &mut Report, name: &str, k: &StochasticKernel, pi: &Measure, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = k.len();
    let size = rng.random_range(1..=n);
    let mask = random_subset(rng, n, size);
    let dual = dual_kernel(k, pi)?;
    let pi_in = pi.restrict(&mask)?.normalize();
    let induced_then_dual = dual_kernel(&induced_kernel(k, &mask)?, &pi_in)?;
    let dual_then_induced = induced_kernel(&dual, &mask)?;
    let gap = (induced_then_dual.matrix() - dual_then_induced.matrix()).amax();
    let stationary = stationarity_residual(&dual, pi);
    let irreducible = classify(&dual).irreducible == classify(k).irreducible;
    r.check(name, gap.max(stationary), 1e-10);
    r.check_flag(format!("{name} irreducibility"), irreducible);
    Ok(())
}

/// A random centered walk: a random chain `K` on `m` states doubled by a sign that
/// flips with probability `1 - a`, stepping `±k_s`.
fn random_walk(rng: &mut ChaCha8Rng) -> Result<LatticeModel> {
    let m = rng.random_range(1..=3);
    let base = random_kernel(rng, m, 0.5);
    let stay = rng.random_range(0.1..0.9);
    let sizes: Vec<i64> = (0..m).map(|_| rng.random_range(1..=2)).collect();
    let n = 2 * m;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let flip = if i % 2 == j % 2 { stay } else { 1.0 - stay };
                    base.get(i / 2, j / 2) * flip
                })
                .collect()
        })
        .collect();
    let steps: Vec<Vec<i64>> = (0..n)
        .map(|i| vec![if i % 2 == 0 { sizes[i / 2] } else { -sizes[i / 2] }])
        .collect();
    LatticeModel::new(StochasticKernel::from_rows(&rows)?, &steps)
}

fn lattice_trial(r: &mut Report, name: &str, model: Option<&LatticeModel>, rng: &mut ChaCha8Rng) -> Result<()> {
    let walk;
    let model = match model {
        Some(m) => m,
        None => {
            walk = random_walk(rng)?;
            &walk
        }
    };
    let n_max = 12;
    let table = return_probabilities(model, n_max, None)?;
    let mut gap = 0.0f64;
    for n in [1, 5, n_max] {
        gap = gap.max((table.slice_mass(n) - 1.0).abs());
        let p: Vec<i64> = (0..model.dim()).map(|_| rng.random_range(-3..=3)).collect();
        let c = characteristic_probability(model, n, &p)?;
        gap = gap.max((c - table.probability(n, &p)).abs());
    }
    r.check(name, gap, 1e-12);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HitMethod {
    All,
    Series,
    Exact,
    Mc,
}

pub struct LatticeHitArgs<'a> {
    pub p: &'a [i64],
    pub method: HitMethod,
    pub radius: usize,
    pub tol: f64,
    pub n_max: usize,
    pub step_cap: usize,
    pub seed: u64,
    pub mc: McOptions,
}

/// `model` is `None` for the built-in simple random walk.
pub fn lattice_hit(model: Option<&ModelFile>, args: &LatticeHitArgs) -> Report {
    let inputs = json!({"command": "lattice hit", "model": model.map_or(json!("srw"), ModelFile::canonical),
        "args": {"p": args.p, "method": args.method, "radius": args.radius, "tol": args.tol,
                 "n_max": args.n_max, "step_cap": args.step_cap, "paths": args.mc.paths}});
    let uses_mc = matches!(args.method, HitMethod::Mc | HitMethod::All);
    run("lattice hit", inputs, uses_mc.then_some(args.seed), |r| {
        let walk = match model {
            Some(m) => m.lattice()?,
            None => LatticeModel::srw(),
        };
        let want = |m: HitMethod| args.method == m || args.method == HitMethod::All;
        let series = want(HitMethod::Series)
            .then(|| potential_series(&walk, args.p, SeriesConfig::new(0.0, args.n_max)))
            .transpose()?;
        if let Some(s) = &series {
            r.push("potential series", "return-probabilities", s.series_value, Some(s.tail_bound));
            r.push("1 / potential series", "return-probabilities", s.reciprocal, Some(s.reciprocal_bound));
        }
        let exact = match (want(HitMethod::Exact), walk.dim()) {
            (true, 1) => Some(hitting_exact(&walk, args.p[0], args.radius, args.tol)?),
            (true, _) if args.method == HitMethod::Exact => {
                return Err(Error::Unsupported("exact hitting solves are one-dimensional".into()))
            }
            _ => None,
        };
        if let Some(e) = &exact {
            r.push("hitting probability", "absorbing-solve", e.probability, Some(e.sensitivity));
        }
        let mc = want(HitMethod::Mc)
            .then(|| hitting_mc(&walk, args.p, &args.mc.config(args.seed), args.step_cap))
            .transpose()?;
        if let Some(m) = &mc {
            r.push("hitting probability", "monte-carlo", m.estimate.mean, Some(m.estimate.stderr));
            r.push("censored trajectories", "monte-carlo", m.censored as f64, None);
        }
        if let (Some(s), Some(e)) = (&series, &exact) {
            r.check(
                "1 / series agrees with exact",
                (s.reciprocal - e.probability).abs(),
                s.reciprocal_bound.max(e.sensitivity),
            );
        }
        if let (Some(m), Some(e)) = (&mc, &exact) {
            r.check(
                "monte carlo within 3 stderr of exact",
                (m.estimate.mean - e.probability).abs(),
                3.0 * m.estimate.stderr,
            );
        }
        Ok(())
    })
}
