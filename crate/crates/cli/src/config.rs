//! Run configuration: defaults, TOML files and command-line overrides.

use std::f64::consts::PI;
use std::path::Path;

use clap::Args;
use qge_core::gapfinder::DEFAULT_THETA;
use qge_core::model::SpinModel;
use qge_core::simulator::{Sampling, TimeGrid};
use qge_core::trotter::{Filter, FilterFamily, TrotterOrder, TrotterPlan};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything that determines a run. Energies are in units of `h`.
///
/// The grid follows `δω = η/4`, `L = 2⌈7h/δω⌉` and is not configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub j_over_h: f64,
    pub p: TrotterOrder,
    pub m: u64,
    /// Depth sweep for `gap`; empty means the single depth `m`.
    pub m_sweep: Vec<u64>,
    pub filter: FilterFamily,
    pub eta_over_h: f64,
    pub theta_over_pi: f64,
    /// Orientations for `sweep-theta` and `scaling`; empty means `l/50`, `l ∈ [0, 24]`.
    pub thetas_over_pi: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    pub exact: bool,
    /// Truncation-error threshold `ε_{T,c}` for `depth-bound`.
    pub epsilon: f64,
    /// Add the exact-diagonalization spectrum to `spectrum` output.
    pub oracle: bool,
    pub depth_bound: DepthBoundConfig,
    pub scaling: ScalingConfig,
    pub toy: ToyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthBoundConfig {
    /// `ht` range of the `D_c(t)` table, sampled at `t_points` equal steps.
    pub t_max: f64,
    pub t_points: usize,
    /// Chain lengths of the `D_c(N)` table, evaluated at `ht = t_fixed`.
    pub sizes: Vec<usize>,
    pub t_fixed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub j_over_h: Vec<f64>,
    /// Feed perturbative gaps instead of simulated ones.
    pub perturbative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    /// Peak separation `δ/Δ₀`.
    pub separation: f64,
    pub lambdas: Vec<f64>,
    /// `η/Δ₀` from `eta_max / eta_points` to `eta_max`.
    pub eta_max: f64,
    pub eta_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 4,
            j_over_h: 0.4,
            p: TrotterOrder::First,
            m: 35,
            m_sweep: Vec::new(),
            filter: FilterFamily::Gaussian,
            eta_over_h: 0.3,
            theta_over_pi: DEFAULT_THETA / PI,
            thetas_over_pi: Vec::new(),
            shots: 1024,
            seed: 0,
            exact: false,
            epsilon: 1e-2,
            oracle: false,
            depth_bound: DepthBoundConfig::default(),
            scaling: ScalingConfig::default(),
            toy: ToyConfig::default(),
        }
    }
}

impl Default for DepthBoundConfig {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            t_points: 100,
            sizes: vec![10, 100, 1000, 10000],
            t_fixed: 6.0,
        }
    }
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2, 3, 4, 5],
            j_over_h: vec![0.2, 0.4, 0.6, 0.8],
            perturbative: false,
        }
    }
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            separation: qge_core::toymodel::DEFAULT_SEPARATION_RATIO,
            lambdas: vec![0.25, 0.5, 1.0],
            eta_max: 0.6,
            eta_points: 60,
        }
    }
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML file with a full or partial run configuration, or an earlier
    /// output file whose embedded config is reused.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub j_over_h: Option<f64>,
    /// Trotter order: 1, 2 or 4.
    #[arg(long, global = true, value_parser = parse_order)]
    pub p: Option<TrotterOrder>,
    /// Trotter steps per run.
    #[arg(long, global = true)]
    pub m: Option<u64>,
    /// Comma-separated depth sweep for `gap`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub m_sweep: Option<Vec<u64>>,
    /// none, lorentzian or gaussian.
    #[arg(long, global = true, value_parser = parse_family)]
    pub filter: Option<FilterFamily>,
    #[arg(long, global = true)]
    pub eta_over_h: Option<f64>,
    #[arg(long, global = true)]
    pub theta_over_pi: Option<f64>,
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Use exact probabilities instead of sampled shots.
    #[arg(long, global = true)]
    pub exact: bool,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Include the exact spectrum in `spectrum` output.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
}

fn parse_order(s: &str) -> Result<TrotterOrder, String> {
    let p: u8 = s.parse().map_err(|_| format!("'{s}' is not an integer"))?;
    TrotterOrder::from_int(p).map_err(|e| e.to_string())
}

fn parse_family(s: &str) -> Result<FilterFamily, String> {
    s.parse().map_err(|e: qge_core::Error| e.to_string())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_any(&text)
    }

    /// Accepts a TOML config or any output of this tool: CSV with a
    /// `# config:` header, or JSON with a top-level `config` field.
    pub fn from_any(text: &str) -> Result<Self, CliError> {
        let bad = |e: serde_json::Error| CliError::Usage(format!("config: {e}"));
        if let Some(json) = text.lines().find_map(|l| l.strip_prefix("# config: ")) {
            return Self::from_json(json);
        }
        if text.trim_start().starts_with('{') {
            let mut v: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
            return serde_json::from_value(v["config"].take()).map_err(bad);
        }
        Self::from_toml(text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    /// Single-line JSON, as embedded in output headers.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn resolve(o: &Overrides) -> Result<Self, CliError> {
        let mut c = match &o.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = o.$field.clone() {
                    c.$field = v;
                }
            )*};
        }
        set!(n, j_over_h, p, m, m_sweep, filter, eta_over_h, theta_over_pi, shots, seed, epsilon);
        c.exact |= o.exact;
        c.oracle |= o.oracle;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !self.j_over_h.is_finite() {
            return bad("j-over-h must be finite".into());
        }
        if self.m == 0 || self.m_sweep.contains(&0) {
            return bad("Trotter steps must be positive".into());
        }
        if !(self.eta_over_h.is_finite() && self.eta_over_h > 0.0) {
            return bad(format!("eta-over-h must be positive, got {}", self.eta_over_h));
        }
        if !self.exact && self.shots == 0 {
            return bad("shots must be positive unless --exact is set".into());
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        let d = &self.depth_bound;
        if !(d.t_max > 0.0) || d.t_points == 0 || d.sizes.iter().any(|&n| n < 2) {
            return bad("depth-bound needs t_max > 0, t_points > 0 and sizes ≥ 2".into());
        }
        if self.scaling.sizes.len() < 3 {
            return bad("scaling needs at least three sizes".into());
        }
        let t = &self.toy;
        if !(t.separation > 0.0 && t.eta_max > 0.0) || t.eta_points == 0 {
            return bad("toy needs positive separation, eta_max and eta_points".into());
        }
        Ok(())
    }

    pub fn model(&self) -> Result<SpinModel, CliError> {
        self.model_of(self.n)
    }

    pub fn model_of(&self, n: usize) -> Result<SpinModel, CliError> {
        SpinModel::with_ratio(n, self.j_over_h).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn plan(&self) -> TrotterPlan {
        TrotterPlan::new(self.p, self.m).expect("validated")
    }

    pub fn filter(&self) -> Filter {
        Filter::new(self.filter, self.eta_over_h).expect("validated")
    }

    /// The grid is set by `η` for every family, including `none`.
    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::for_broadening(self.eta_over_h, 1.0)?)
    }

    pub fn sampling(&self) -> Sampling {
        if self.exact {
            Sampling::Exact
        } else {
            Sampling::shots(self.shots, self.seed).expect("validated")
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta_over_pi * PI
    }

    pub fn thetas(&self) -> Vec<f64> {
        if self.thetas_over_pi.is_empty() {
            qge_core::gapfinder::default_thetas()
        } else {
            self.thetas_over_pi.iter().map(|x| x * PI).collect()
        }
    }

    pub fn steps(&self) -> Vec<u64> {
        if self.m_sweep.is_empty() {
            vec![self.m]
        } else {
            self.m_sweep.clone()
        }
    }
}
