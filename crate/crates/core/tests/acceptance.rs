//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p qge-core --test acceptance`.

use std::time::Instant;

use qge_core::gapfinder::{self, GapSearchConfig, Reference, DEFAULT_THETA};
use qge_core::linalg;
use qge_core::model::{self, NormalizedBounds, SpinModel};
use qge_core::scaling;
use qge_core::simulator::{self, InputOrientation, Sampling, TimeGrid};
use qge_core::spectral;
use qge_core::toymodel::{self, TwoPeakModel};
use qge_core::trotter::{self, Filter, FilterFamily, TrotterOrder, TrotterPlan};
use qge_core::Result;

const J_OVER_H: f64 = 0.4;
const ETA: f64 = 0.3;
const BOUND_SLACK: f64 = 1e-12;
const SLOPE_TOLERANCE: f64 = 0.3;
const DEPTH_FLOOR: f64 = 1e7;
const RATIO_TOLERANCE: f64 = 1e-12;
const SPECT_TARGET: f64 = 1e-3;
const SCALING_EXACT_TOLERANCE: f64 = 1e-12;
const COMMUTATOR_TOLERANCE: f64 = 1e-10;
const ED_TREND_TOLERANCE: f64 = 0.1;
const ORACLE_TOLERANCE: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn paper_chain(n: usize) -> SpinModel {
    SpinModel::with_ratio(n, J_OVER_H).unwrap()
}

fn bound_satisfaction() -> Result<Outcome> {
    let filters = [
        Filter::none(),
        Filter::lorentzian(ETA)?,
        Filter::gaussian(ETA)?,
    ];
    let (mut checks, mut violations, mut worst) = (0usize, 0usize, 0.0_f64);
    for n in 2..=5 {
        let m = paper_chain(n);
        let eig = model::exact_diagonalize(&m)?;
        let psi = simulator::prepare_input(&InputOrientation::uniform(n, DEFAULT_THETA)?)?;
        for order in TrotterOrder::ALL {
            for steps in [1u64, 2, 4, 8, 16, 32, 64] {
                let plan = TrotterPlan::new(order, steps)?;
                for k in 1..=12 {
                    let t = 0.5 * k as f64;
                    let exact = eig.evolve(&psi, t);
                    let trotterized = trotter::trotter_propagator(&m, plan, t)? * &psi;
                    let distance = linalg::pure_state_distance(&trotterized, &exact);
                    for f in &filters {
                        let measured = f.value(t) * distance;
                        let bound = trotter::truncation_error_bound(&m, plan, t, f);
                        checks += 1;
                        if measured > bound + BOUND_SLACK {
                            violations += 1;
                        }
                        if bound > 0.0 {
                            worst = worst.max(measured / bound);
                        }
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {checks} checks, max measured/bound = {worst:.3}"),
    )
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn order_scaling() -> Result<Outcome> {
    let m = paper_chain(3);
    let mut pass = true;
    let mut parts = Vec::new();
    for (order, t) in [
        (TrotterOrder::First, 0.5),
        (TrotterOrder::Second, 0.5),
        (TrotterOrder::Fourth, 1.0),
    ] {
        let steps = [4u64, 8, 16, 32];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &s in &steps {
            xs.push((s as f64).ln());
            ys.push(trotter::trotter_error(&m, TrotterPlan::new(order, s)?, t)?.ln());
        }
        let slope = fit_slope(&xs, &ys);
        pass &= (slope + order.as_int() as f64).abs() <= SLOPE_TOLERANCE;
        parts.push(format!("p={order}: {slope:.3}"));
    }
    outcome(pass, format!("slopes {}", parts.join(", ")))
}

fn depth_order_of_magnitude() -> Result<Outcome> {
    let m = paper_chain(1000);
    let bare = trotter::depth_cutoff(&m, TrotterOrder::First, 6.0, 1e-2, &Filter::none())?;
    let filtered = trotter::depth_cutoff(&m, TrotterOrder::First, 6.0, 1e-2, &Filter::lorentzian(ETA)?)?;
    let ratio = filtered.depth / bare.depth;
    let rel = (ratio / (-1.8f64).exp() - 1.0).abs();
    outcome(
        bare.depth >= DEPTH_FLOOR && rel <= RATIO_TOLERANCE,
        format!(
            "D_c = {:.3e} (floor {DEPTH_FLOOR:.0e}), filtered/bare = {ratio:.6} vs e^-1.8 (rel. dev. {rel:.1e})",
            bare.depth
        ),
    )
}

fn estimate_gap(reference: &Reference, plan: TrotterPlan, filter: &Filter, sampling: Sampling) -> Result<f64> {
    let grid = TimeGrid::for_broadening(filter.eta, 1.0)?;
    let o = InputOrientation::uniform(reference.model.n_spins, DEFAULT_THETA)?;
    let ts = simulator::run_time_series(&reference.model, plan, &o, grid, sampling)?;
    let s = spectral::spectral_function(&ts, filter)?;
    let c = GapSearchConfig::for_filter(model::perturbative_gap_guess(&reference.model), filter.eta)?;
    Ok(gapfinder::find_gap(&s, &c)?.gap)
}

fn gap_recovery() -> Result<Outcome> {
    let r = Reference::new(paper_chain(4))?;
    let plan = TrotterPlan::new(TrotterOrder::First, 35)?;
    let f = Filter::gaussian(ETA)?;
    let exact = estimate_gap(&r, plan, &f, Sampling::Exact)?;
    let mut hits = 0;
    let mut gaps = Vec::new();
    for seed in 1..=10 {
        let g = estimate_gap(&r, plan, &f, Sampling::shots(1024, seed)?);
        if let Ok(g) = g {
            gaps.push(format!("{g:.3}"));
            if (g - r.exact_gap).abs() <= ETA {
                hits += 1;
            }
        } else {
            gaps.push("fail".into());
        }
    }
    outcome(
        (exact - r.exact_gap).abs() <= ETA && hits >= 9,
        format!(
            "ED gap {:.4}, exact-mode estimate {exact:.4}, shot runs within eta: {hits}/10 [{}]",
            r.exact_gap,
            gaps.join(" ")
        ),
    )
}

fn spectral_convergence() -> Result<Outcome> {
    let r = Reference::new(paper_chain(4))?;
    let f = Filter::gaussian(ETA)?;
    let grid = TimeGrid::for_broadening(ETA, 1.0)?;
    let steps = [5u64, 10, 15, 35, 70, 140, 280];
    let records = gapfinder::depth_sweep(&r, TrotterOrder::First, &f, grid, DEFAULT_THETA, &steps, Sampling::Exact)?;
    let spect: Vec<f64> = records.iter().map(|x| x.eps_spect.unwrap()).collect();
    let monotone = spect.windows(2).all(|w| w[1] <= w[0]);
    let reaches = spect.iter().any(|&e| e < SPECT_TARGET);
    let dominated = records.iter().all(|x| x.eps_bound >= x.eps_spect.unwrap());
    let table: Vec<String> = records
        .iter()
        .map(|x| format!("M={}: {:.2e}/{:.2e}", x.steps, x.eps_spect.unwrap(), x.eps_bound))
        .collect();
    outcome(
        monotone && reaches && dominated,
        format!(
            "non-increasing={monotone}, below {SPECT_TARGET:.0e}={reaches}, bound dominates={dominated}; eps_spect/eps_bound {}",
            table.join(", ")
        ),
    )
}

fn theta_invariance() -> Result<Outcome> {
    let eta = 0.02;
    let r = Reference::new(paper_chain(4))?;
    let grid = TimeGrid::for_broadening(eta, 1.0)?;
    let plan = TrotterPlan::new(TrotterOrder::First, 10_000)?;
    let thetas = gapfinder::default_thetas();
    let mut pass = true;
    let mut parts = Vec::new();
    for f in [Filter::lorentzian(eta)?, Filter::gaussian(eta)?] {
        let sweep = gapfinder::theta_sweep(&r, plan, &f, grid, &thetas, Sampling::Exact)?;
        let gaps: Vec<f64> = sweep.points.iter().filter_map(|p| p.gap).collect();
        let spread = gaps.iter().cloned().fold(f64::MIN, f64::max) - gaps.iter().cloned().fold(f64::MAX, f64::min);
        let ok = sweep.failures() == 0 && spread <= 2.0 * grid.d_omega() + 1e-12;
        pass &= ok;
        parts.push(format!(
            "{}: spread {spread:.4} over {} angles ({} failed)",
            f.family,
            gaps.len(),
            sweep.failures()
        ));
    }
    outcome(pass, format!("limit 2dw = {:.4}; {}", 2.0 * grid.d_omega(), parts.join("; ")))
}

fn scaling_benchmark() -> Result<Outcome> {
    let sizes = [2usize, 3, 4, 5];
    let mut exact_ok = true;
    for j in [0.2, 0.4, 0.6, 0.8] {
        let e = scaling::extrapolate(&scaling::perturbative_sample(j, &sizes, ETA)?)?;
        exact_ok &= (e.intercept - 2.0 * (1.0 - j)).abs() <= SCALING_EXACT_TOLERANCE;
        exact_ok &= e.confidence_band.1 - e.confidence_band.0 <= SCALING_EXACT_TOLERANCE;
    }
    let plan = TrotterPlan::new(TrotterOrder::First, 35)?;
    let f = Filter::gaussian(ETA)?;
    let thetas = gapfinder::default_thetas();
    let mut parts = Vec::new();
    let mut target_ok = false;
    for j in [0.2, 0.4, 0.6, 0.8] {
        let (sample, _) = scaling::collect_sample(j, &sizes, plan, &f, &thetas, Sampling::Exact)?;
        let e = scaling::extrapolate(&sample)?;
        let exact = model::exact_gap_thermodynamic(j, 1.0);
        if j == J_OVER_H {
            target_ok = (e.intercept - exact).abs() <= 2.0 * ETA;
        }
        parts.push(format!(
            "J/h={j}: {:.4} [{:.3}, {:.3}] vs {exact:.1}",
            e.intercept, e.confidence_band.0, e.confidence_band.1
        ));
    }
    outcome(
        exact_ok && target_ok,
        format!("perturbative inputs exact={exact_ok}; simulated M=35: {}", parts.join(", ")),
    )
}

fn commutator_checks() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut bounds_ok = true;
    for n in 3..=5 {
        for j in [0.2, 0.4, 0.6, 0.8] {
            let m = SpinModel::new(n, j, 1.0)?;
            let e = model::explicit_commutators(&m)?;
            worst = worst.max(e.max_relative_deviation);
            let c = &e.by_multiplication;
            let nb = NormalizedBounds::for_chain(n);
            let w = |a: i32, b: i32| j.abs().powi(a) * m.field.powi(b);
            bounds_ok &= linalg::spectral_norm(&c.c12)? <= nb.first * w(1, 1) + 1e-9;
            bounds_ok &= linalg::spectral_norm(&c.c112)? <= nb.second * w(2, 1) + 1e-9;
            bounds_ok &= linalg::spectral_norm(&c.c212)? <= nb.second * w(1, 2) + 1e-9;
            for g in 1..=2 {
                for l in 1..=2 {
                    for mu in 1..=2 {
                        let idx = [g, l, mu];
                        let ones = idx.iter().filter(|&&i| i == 1).count() as i32;
                        let norm = linalg::spectral_norm(c.fourth(g, l, mu))?;
                        bounds_ok &= norm <= nb.fourth(g, l, mu) * w(1 + ones, 4 - ones) + 1e-9;
                    }
                }
            }
        }
    }
    outcome(
        worst <= COMMUTATOR_TOLERANCE && bounds_ok,
        format!("max relative deviation {worst:.1e}, all norm bounds hold = {bounds_ok}"),
    )
}

fn gap_formulas() -> Result<Outcome> {
    let guess = model::perturbative_gap_guess(&paper_chain(4));
    let mut pass = (guess - 1.4).abs() < 1e-12;
    let mut parts = vec![format!("Delta0(N=4) = {guess:.12}")];
    for j in [0.2, 0.4, 0.6, 0.8] {
        let gaps: Vec<f64> = (2..=8)
            .map(|n| Ok(model::exact_diagonalize(&SpinModel::new(n, j, 1.0)?)?.lowest_gap()))
            .collect::<Result<_>>()?;
        let limit = model::exact_gap_thermodynamic(j, 1.0);
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        let above = gaps.iter().all(|&g| g > limit);
        let sample = scaling::ScalingSample {
            points: (2..=5).zip(gaps.iter().cloned()).collect(),
            j_over_h: j,
            eta: 0.0,
        };
        let intercept = scaling::extrapolate(&sample)?.intercept;
        let close = (intercept - limit).abs() <= ED_TREND_TOLERANCE;
        pass &= decreasing && above && close;
        parts.push(format!("J/h={j}: ED N=2..5 intercept {intercept:.4} vs {limit:.1}"));
    }
    outcome(pass, parts.join(", "))
}

fn toy_model() -> Result<Outcome> {
    let ratios: Vec<f64> = (1..=30).map(|k| 0.05 * k as f64).collect();
    let mut monotone = true;
    for family in [FilterFamily::Lorentzian, FilterFamily::Gaussian] {
        for &lambda in &[0.25, 0.5, 1.0] {
            let etas: Vec<f64> = ratios.iter().map(|r| r * 0.3).collect();
            let pts = toymodel::shift_table(family, 0.6, &etas, &[lambda])?;
            monotone &= pts.windows(2).all(|w| w[1].shift >= w[0].shift - 1e-12);
        }
        for &eta in &[0.05, 0.15, 0.3] {
            let mut prev = 0.0;
            for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let m = TwoPeakModel::new(1.0, 0.6, lambda, Filter::new(family, eta)?)?;
                let s = toymodel::peak_shift(&m).shift;
                monotone &= s >= prev - 1e-12;
                prev = s;
            }
        }
    }
    let crossings = toymodel::family_crossings(0.5, 0.6, &ratios)?;
    let bracketed = crossings.iter().any(|r| *r > 0.7 && *r < 1.0);
    outcome(
        monotone && bracketed,
        format!("monotone={monotone}, crossings at 2eta/delta = {crossings:.3?}"),
    )
}

fn commuting_limit() -> Result<Outcome> {
    let n = 4;
    let m = SpinModel::new(n, 0.0, 1.0)?;
    let theta = DEFAULT_THETA;
    let o = InputOrientation::uniform(n, theta)?;
    let grid = TimeGrid::new(40, 0.37)?;
    let mut worst = 0.0_f64;
    for order in TrotterOrder::ALL {
        for steps in [1u64, 7, 35] {
            let plan = TrotterPlan::new(order, steps)?;
            let ts = simulator::run_time_series(&m, plan, &o, grid, Sampling::Exact)?;
            for k in 0..grid.length {
                let t = grid.time(k);
                let (s, c) = t.sin_cos();
                let want = (c * c + s * s * theta.sin().powi(2)).powi(n as i32);
                worst = worst.max((ts.plus[k] - want).abs()).max((ts.minus[k] - want).abs());
                if k % 10 == 3 {
                    let g = simulator::propagator_overlap_by_gates(&m, plan, &o, t)?;
                    worst = worst.max((g - want).abs());
                }
            }
        }
    }
    outcome(
        worst <= ORACLE_TOLERANCE,
        format!("max |P - oracle| = {worst:.1e} over p in {{1,2,4}}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("bound satisfaction", bound_satisfaction),
        ("order scaling", order_scaling),
        ("depth cutoff magnitude", depth_order_of_magnitude),
        ("gap recovery", gap_recovery),
        ("spectral convergence", spectral_convergence),
        ("theta invariance at small eta", theta_invariance),
        ("finite-size scaling", scaling_benchmark),
        ("commutator closed forms and bounds", commutator_checks),
        ("reference gap formulas", gap_formulas),
        ("two-peak shift model", toy_model),
        ("commuting-limit oracle", commuting_limit),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name} ({:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
