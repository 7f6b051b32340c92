use qge_core::gapfinder::{self, Reference, DEFAULT_THETA};
use qge_core::model::SpinModel;
use qge_core::simulator::{InputOrientation, Sampling, TimeGrid};
use qge_core::spectral;
use qge_core::trotter::{self, Filter, FilterFamily, TrotterOrder, TrotterPlan};

fn chain(n: usize) -> SpinModel {
    SpinModel::with_ratio(n, 0.4).unwrap()
}

#[test]
fn first_order_error_halves_with_depth() {
    let m = chain(2);
    let e64 = trotter::trotter_error(&m, TrotterPlan::new(TrotterOrder::First, 64).unwrap(), 6.0).unwrap();
    let e128 = trotter::trotter_error(&m, TrotterPlan::new(TrotterOrder::First, 128).unwrap(), 6.0).unwrap();
    let ratio = e64 / e128;
    assert!((1.8..2.2).contains(&ratio), "{ratio}");
}

fn cutoff_gap(m: &SpinModel, t: f64, f: &Filter) -> f64 {
    let d1 = trotter::depth_cutoff(m, TrotterOrder::First, t, 1e-2, f).unwrap().depth;
    let d4 = trotter::depth_cutoff(m, TrotterOrder::Fourth, t, 1e-2, f).unwrap().depth;
    d1 - d4
}

fn sign_changes(diff: &[f64]) -> usize {
    diff.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

#[test]
fn filtered_cutoffs_cross_between_orders() {
    let m = chain(1000);
    let f = Filter::lorentzian(0.3).unwrap();
    // Log grid on (0, 10]: first order wins at very short times only.
    let short: Vec<f64> = (0..=70).map(|k| cutoff_gap(&m, 1e-6 * 10f64.powf(k as f64 / 10.0), &f)).collect();
    assert_eq!(sign_changes(&short), 1);
    assert!(short[0] < 0.0 && *short.last().unwrap() > 0.0);
    // The filter lets first order win again, but only past ht ≈ 43.
    let long: Vec<f64> = (1..=600).map(|k| cutoff_gap(&m, 0.1 * k as f64, &f)).collect();
    let flip = long.windows(2).position(|w| w[0] > 0.0 && w[1] < 0.0).unwrap();
    let t_flip = 0.1 * (flip + 1) as f64;
    assert!((40.0..46.0).contains(&t_flip), "{t_flip}");
    // Without the filter there is no second crossing.
    assert!((10..=600).all(|k| cutoff_gap(&m, 0.1 * k as f64, &Filter::none()) > 0.0));
}

#[test]
fn filtering_always_lowers_the_cutoff() {
    let m = chain(50);
    for order in TrotterOrder::ALL {
        for f in [Filter::lorentzian(0.3).unwrap(), Filter::gaussian(0.3).unwrap()] {
            for t in [0.5, 2.0, 7.0] {
                let bare = trotter::depth_cutoff(&m, order, t, 1e-2, &Filter::none()).unwrap();
                let filtered = trotter::depth_cutoff(&m, order, t, 1e-2, &f).unwrap();
                assert!(filtered.depth < bare.depth);
            }
        }
    }
    let zero = trotter::depth_cutoff(&m, TrotterOrder::Second, 0.0, 1e-2, &Filter::none()).unwrap();
    assert_eq!(zero.steps, 0.0);
}

#[test]
fn orientation_sweep_at_wide_broadening() {
    let r = Reference::new(chain(4)).unwrap();
    let grid = TimeGrid::for_broadening(0.3, 1.0).unwrap();
    let plan = TrotterPlan::new(TrotterOrder::First, 35).unwrap();
    let thetas = gapfinder::default_thetas();
    // Closest grid bin to the exact gap; no estimate can beat it.
    let floor = (0..grid.length)
        .map(|m| (m as f64 * grid.d_omega() - r.exact_gap).abs() / r.exact_gap)
        .fold(f64::INFINITY, f64::min);
    assert!(floor > gapfinder::UNFAVORED_GAP_ERROR);
    let bin = grid.d_omega() / r.exact_gap;
    for f in [Filter::lorentzian(0.3).unwrap(), Filter::gaussian(0.3).unwrap()] {
        let sweep = gapfinder::theta_sweep(&r, plan, &f, grid, &thetas, Sampling::Exact).unwrap();
        let best = sweep.best.clone().unwrap();
        let eps_best = best.eps_gap.unwrap();
        assert!(eps_best <= floor + bin, "{:?}: {eps_best}", f.family);
        // At this η every orientation lands in the unfavored zone.
        assert!(sweep.points.iter().all(|p| p.unfavored()));
        // Small angles favour the neighbouring peak.
        let first = sweep.points[0].eps_gap.unwrap();
        assert!(first > eps_best + 2.0 * bin, "{:?}: {first}", f.family);
        let default = sweep
            .points
            .iter()
            .min_by(|a, b| (a.theta - DEFAULT_THETA).abs().total_cmp(&(b.theta - DEFAULT_THETA).abs()))
            .unwrap();
        assert!(default.eps_gap.unwrap() <= 2.0 * 0.3 / r.exact_gap);
    }
}

#[test]
fn converged_gap_error_respects_the_resolution_floor() {
    let r = Reference::new(chain(4)).unwrap();
    for f in [Filter::lorentzian(0.3).unwrap(), Filter::gaussian(0.3).unwrap(), Filter::gaussian(0.1).unwrap()] {
        let grid = TimeGrid::for_broadening(f.eta, 1.0).unwrap();
        let recs = gapfinder::depth_sweep(&r, TrotterOrder::Second, &f, grid, DEFAULT_THETA, &[200], Sampling::Exact).unwrap();
        let eps = recs[0].eps_gap.unwrap();
        assert!(eps <= 2.0 * f.eta / r.exact_gap, "{:?} η={}: {eps}", f.family, f.eta);
    }
}

#[test]
fn unfiltered_gap_is_orientation_independent() {
    let r = Reference::new(chain(4)).unwrap();
    let grid = TimeGrid::for_broadening(0.02, 1.0).unwrap();
    let plan = TrotterPlan::new(TrotterOrder::Second, 2000).unwrap();
    let thetas: Vec<f64> = gapfinder::default_thetas().into_iter().skip(1).step_by(3).collect();
    let sweep = gapfinder::theta_sweep(&r, plan, &Filter::none(), grid, &thetas, Sampling::Exact).unwrap();
    let gaps: Vec<f64> = sweep.points.iter().map(|p| p.gap.unwrap()).collect();
    assert!(gaps.iter().all(|g| (g - gaps[0]).abs() < 1e-12), "{gaps:?}");
    assert!((gaps[0] - r.exact_gap).abs() <= grid.d_omega());
}

#[test]
fn empirical_cutoffs_by_family() {
    let r = Reference::new(chain(4)).unwrap();
    let steps: Vec<u64> = vec![2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 35, 50, 70, 100];
    let grid = TimeGrid::for_broadening(0.3, 1.0).unwrap();
    let sweep = |f: Filter| gapfinder::depth_sweep(&r, TrotterOrder::First, &f, grid, DEFAULT_THETA, &steps, Sampling::Exact).unwrap();
    let g = sweep(Filter::gaussian(0.3).unwrap());
    let l = sweep(Filter::lorentzian(0.3).unwrap());
    for recs in [&g, &l] {
        let cut = gapfinder::empirical_depth_cutoff(recs).unwrap();
        let plateau = recs.last().unwrap().eps_gap.unwrap();
        assert!(plateau <= grid.d_omega() / r.exact_gap);
        assert!(cut <= recs.last().unwrap().depth);
    }
    // Each family settles on a different bin next to the gap, so the
    // gap-error cutoffs are not ordered. The spectra converge in order.
    let first_below = |recs: &[gapfinder::DepthRecord], tol: f64| {
        recs.iter().find(|x| x.eps_spect.unwrap() < tol).map(|x| x.depth).unwrap()
    };
    for tol in [1e-2, 5e-3, 1e-3] {
        assert!(first_below(&g, tol) <= first_below(&l, tol), "{tol}");
    }
}

#[test]
fn shot_noise_standard_error() {
    let m = chain(4);
    let o = InputOrientation::uniform(4, DEFAULT_THETA).unwrap();
    let grid = TimeGrid::for_broadening(0.3, 1.0).unwrap();
    let plan = TrotterPlan::new(TrotterOrder::First, 35).unwrap();
    let exact = qge_core::simulator::run_time_series(&m, plan, &o, grid, Sampling::Exact).unwrap();
    let (mut sum_sq, mut count) = (0.0, 0.0);
    for seed in 0..20 {
        let noisy = qge_core::simulator::run_time_series(&m, plan, &o, grid, Sampling::shots(1024, seed).unwrap()).unwrap();
        for (a, b) in noisy.plus.iter().zip(&exact.plus) {
            sum_sq += (a - b).powi(2);
            count += 1.0;
        }
    }
    let rms = (sum_sq / count).sqrt();
    assert!(rms <= 1.0 / (2.0 * 1024f64.sqrt()), "{rms}");
}

#[test]
fn depth_records_serialize_as_json_array() {
    let r = Reference::new(chain(3)).unwrap();
    let f = Filter::lorentzian(0.3).unwrap();
    let grid = TimeGrid::for_broadening(0.3, 1.0).unwrap();
    let recs = gapfinder::depth_sweep(&r, TrotterOrder::Fourth, &f, grid, 0.5, &[2, 4], Sampling::Exact).unwrap();
    let text = serde_json::to_string(&recs).unwrap();
    let back: Vec<gapfinder::DepthRecord> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, recs);
    assert_eq!(recs[1].depth, 4 * (6 * 3 - 1));
}

#[test]
fn oracle_spectrum_csv_round_trip() {
    let r = Reference::new(chain(3)).unwrap();
    let o = InputOrientation::uniform(3, 1.0).unwrap();
    let f = Filter::gaussian(0.4).unwrap();
    let grid = TimeGrid::for_broadening(0.4, 1.0).unwrap();
    let s = spectral::exact_spectrum_oracle(&r.model, &r.eig, &o, &f, grid).unwrap();
    let t = qge_core::io::Table::parse(&s.to_table().to_csv_string()).unwrap();
    assert_eq!(t.column_f64("A").unwrap(), s.values);
    assert_eq!(t.metadata_value("filter").unwrap(), serde_json::to_string(&f).unwrap());
    assert_eq!(f.family, FilterFamily::Gaussian);
}
