//! One function per subcommand. Each returns the full output text and how
//! much of the run succeeded.

use qge_core::gapfinder::{self, DepthRecord, Reference, SweepResult};
use qge_core::io::{fmt_f64, Table};
use qge_core::scaling::{self, Extrapolation, ScalingSample, SizeEstimate};
use qge_core::simulator::{self, InputOrientation};
use qge_core::spectral;
use qge_core::toymodel::{self, ShiftPoint};
use qge_core::trotter::{self, Filter, FilterFamily, TrotterOrder};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    Partial,
    Failed,
}

impl Status {
    fn of(failures: usize, total: usize) -> Self {
        match failures {
            0 => Self::Complete,
            f if f == total => Self::Failed,
            _ => Self::Partial,
        }
    }
}

pub struct Report {
    pub text: String,
    pub status: Status,
}

fn csv(mut table: Table, config: &RunConfig) -> Report {
    table.meta("config", config.to_json());
    Report {
        text: table.to_csv_string(),
        status: Status::Complete,
    }
}

fn json<T: Serialize>(body: &T, status: Status) -> Report {
    let mut text = serde_json::to_string_pretty(body).expect("results serialize");
    text.push('\n');
    Report { text, status }
}

/// `D_c(t)` at the configured `N` and `D_c(N)` at fixed `t`, long format.
pub fn depth_bound(config: &RunConfig) -> Result<Report, CliError> {
    let eta = config.eta_over_h;
    let filters = [Filter::none(), Filter::lorentzian(eta)?, Filter::gaussian(eta)?];
    let d = &config.depth_bound;
    let mut rows: Vec<(&str, usize, f64)> = (0..=d.t_points)
        .map(|k| ("time", config.n, d.t_max * k as f64 / d.t_points as f64))
        .collect();
    rows.extend(d.sizes.iter().map(|&n| ("size", n, d.t_fixed)));

    let mut table = Table::new(["sweep", "N", "t", "p", "filter", "M_c", "M", "D_c", "D"]);
    for (sweep, n, t) in rows {
        let model = config.model_of(n)?;
        for order in TrotterOrder::ALL {
            for f in &filters {
                let c = trotter::depth_cutoff(&model, order, t, config.epsilon, f)?;
                let steps = if c.steps > 0.0 { c.steps_ceil() } else { 0 };
                table.push_row(vec![
                    sweep.to_string(),
                    n.to_string(),
                    fmt_f64(t),
                    order.to_string(),
                    f.family.to_string(),
                    fmt_f64(c.steps),
                    steps.to_string(),
                    fmt_f64(c.depth),
                    (steps * c.gates_per_iteration as u64).to_string(),
                ]);
            }
        }
    }
    table.meta("epsilon", fmt_f64(config.epsilon));
    table.meta("eta", fmt_f64(eta));
    Ok(csv(table, config))
}

/// Simulated spectral function, optionally next to the exact one.
pub fn spectrum(config: &RunConfig) -> Result<Report, CliError> {
    let model = config.model()?;
    let filter = config.filter();
    if config.oracle && filter.family == FilterFamily::None {
        return Err(CliError::Usage("--oracle needs a lorentzian or gaussian filter".into()));
    }
    let grid = config.grid()?;
    let orientation = InputOrientation::uniform(model.n_spins, config.theta())?;
    let series = simulator::run_time_series(&model, config.plan(), &orientation, grid, config.sampling())?;
    let spectrum = spectral::spectral_function(&series, &filter)?;
    let table = if config.oracle {
        let eig = qge_core::model::exact_diagonalize(&model)?;
        let exact = spectral::exact_spectrum_oracle(&model, &eig, &orientation, &filter, grid)?;
        spectrum.to_table_with_reference(&exact)?
    } else {
        spectrum.to_table()
    };
    Ok(csv(table, config))
}

#[derive(Serialize)]
struct GapOutput<'a> {
    config: &'a RunConfig,
    exact_gap: f64,
    records: Vec<DepthRecord>,
    empirical_cutoff: Option<u64>,
}

/// Gap estimates at one depth or across `m_sweep`.
pub fn gap(config: &RunConfig) -> Result<Report, CliError> {
    let reference = Reference::new(config.model()?)?;
    let records = gapfinder::depth_sweep(
        &reference,
        config.p,
        &config.filter(),
        config.grid()?,
        config.theta(),
        &config.steps(),
        config.sampling(),
    )?;
    let failures = records.iter().filter(|r| r.error.is_some()).count();
    let status = Status::of(failures, records.len());
    let empirical_cutoff = (records.len() > 1).then(|| gapfinder::empirical_depth_cutoff(&records)).flatten();
    let out = GapOutput {
        config,
        exact_gap: reference.exact_gap,
        records,
        empirical_cutoff,
    };
    Ok(json(&out, status))
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    config: &'a RunConfig,
    exact_gap: f64,
    sweep: SweepResult,
}

pub fn sweep_theta(config: &RunConfig) -> Result<Report, CliError> {
    let reference = Reference::new(config.model()?)?;
    let thetas = config.thetas();
    let sweep = gapfinder::theta_sweep(
        &reference,
        config.plan(),
        &config.filter(),
        config.grid()?,
        &thetas,
        config.sampling(),
    )?;
    let status = Status::of(sweep.failures(), thetas.len());
    let out = SweepOutput {
        config,
        exact_gap: reference.exact_gap,
        sweep,
    };
    Ok(json(&out, status))
}

#[derive(Serialize)]
struct ScalingEntry {
    j_over_h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<ScalingSample>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    estimates: Vec<SizeEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extrapolation: Option<Extrapolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct ScalingOutput<'a> {
    config: &'a RunConfig,
    entries: Vec<ScalingEntry>,
    phase_diagram: scaling::PhaseDiagram,
}

/// Finite-size extrapolation for each `J/h`; a failure at one coupling is
/// recorded and the others still run.
pub fn scaling(config: &RunConfig) -> Result<Report, CliError> {
    let s = &config.scaling;
    let eta = config.eta_over_h;
    let mut entries = Vec::with_capacity(s.j_over_h.len());
    for &j in &s.j_over_h {
        let run = || -> qge_core::Result<(ScalingSample, Vec<SizeEstimate>, Extrapolation)> {
            let (sample, estimates) = if s.perturbative {
                (scaling::perturbative_sample(j, &s.sizes, eta)?, Vec::new())
            } else {
                let plan = config.plan();
                scaling::collect_sample(j, &s.sizes, plan, &config.filter(), &config.thetas(), config.sampling())?
            };
            let e = scaling::extrapolate(&sample)?;
            Ok((sample, estimates, e))
        };
        entries.push(match run() {
            Ok((sample, estimates, e)) => ScalingEntry {
                j_over_h: j,
                sample: Some(sample),
                estimates,
                extrapolation: Some(e),
                error: None,
            },
            Err(e @ (qge_core::Error::SearchFailure { .. } | qge_core::Error::Numeric(_))) => ScalingEntry {
                j_over_h: j,
                sample: None,
                estimates: Vec::new(),
                extrapolation: None,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e.into()),
        });
    }
    let fits: Vec<Extrapolation> = entries.iter().filter_map(|e| e.extrapolation.clone()).collect();
    let status = Status::of(entries.len() - fits.len(), entries.len());
    let out = ScalingOutput {
        config,
        phase_diagram: scaling::phase_diagram(&fits),
        entries,
    };
    Ok(json(&out, status))
}

/// Peak shifts of the two-peak model for both filter families.
pub fn toy(config: &RunConfig) -> Result<Report, CliError> {
    let t = &config.toy;
    let etas: Vec<f64> = (1..=t.eta_points)
        .map(|k| t.eta_max * k as f64 / t.eta_points as f64)
        .collect();
    let mut points: Vec<ShiftPoint> = Vec::new();
    for family in [FilterFamily::Lorentzian, FilterFamily::Gaussian] {
        points.extend(toymodel::shift_table(family, t.separation, &etas, &t.lambdas)?);
    }
    let mut table = toymodel::shift_points_table(&points);
    let ratios: Vec<f64> = etas.iter().map(|e| 2.0 * e / t.separation).collect();
    for &lambda in &t.lambdas {
        let crossings = toymodel::family_crossings(lambda, t.separation, &ratios)?;
        let list: Vec<String> = crossings.iter().map(|&r| fmt_f64(r)).collect();
        table.meta(format!("crossings_2eta_over_delta@lambda={}", fmt_f64(lambda)), list.join(" "));
    }
    Ok(csv(table, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            n: 3,
            m: 5,
            exact: true,
            ..Default::default()
        }
    }

    #[test]
    fn status_from_failures() {
        assert_eq!(Status::of(0, 3), Status::Complete);
        assert_eq!(Status::of(1, 3), Status::Partial);
        assert_eq!(Status::of(3, 3), Status::Failed);
    }

    #[test]
    fn depth_bound_zero_time_rows_vanish() {
        let mut c = small();
        c.depth_bound.t_points = 4;
        c.depth_bound.sizes = vec![1000];
        let t = Table::parse(&depth_bound(&c).unwrap().text).unwrap();
        assert_eq!(t.rows.len(), (5 + 1) * 9);
        let m = t.column_index("M").unwrap();
        let d = t.column_index("D").unwrap();
        for row in t.rows.iter().take(9) {
            assert_eq!(row[2], "0");
            assert_eq!((row[m].as_str(), row[d].as_str()), ("0", "0"));
        }
    }

    #[test]
    fn depth_bound_cell_matches_hand_evaluation() {
        let mut c = small();
        c.depth_bound.sizes = vec![1000];
        let t = Table::parse(&depth_bound(&c).unwrap().text).unwrap();
        let row = t
            .rows
            .iter()
            .find(|r| r[0] == "size" && r[3] == "1" && r[4] == "none")
            .unwrap();
        // p=1: C = 4(N−1)·J h, M_c = C t² / ε, N_g = N.
        let prefactor = 4.0 * 999.0 * 0.4;
        let m_c = prefactor * 36.0 / 1e-2;
        let got: f64 = row[5].parse().unwrap();
        assert!((got - m_c).abs() <= 1e-12 * m_c);
        let d: f64 = row[7].parse().unwrap();
        assert!((d - 1000.0 * m_c).abs() <= 1e-12 * d);
    }

    #[test]
    fn oracle_needs_a_filter() {
        let mut c = small();
        c.oracle = true;
        c.filter = FilterFamily::None;
        assert!(matches!(spectrum(&c), Err(CliError::Usage(_))));
    }

    #[test]
    fn perturbative_scaling_recovers_the_limit() {
        let mut c = small();
        c.scaling.perturbative = true;
        let r = scaling(&c).unwrap();
        assert_eq!(r.status, Status::Complete);
        let v: serde_json::Value = serde_json::from_str(&r.text).unwrap();
        for e in v["entries"].as_array().unwrap() {
            let j = e["j_over_h"].as_f64().unwrap();
            let b = e["extrapolation"]["intercept"].as_f64().unwrap();
            assert!((b - 2.0 * (1.0 - j)).abs() < 1e-12);
        }
    }
}
