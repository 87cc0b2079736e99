//! JSON run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cim_solver::SolverOptions;
use crate::contours::ContourKind;
use crate::error::{FkError, Result};
use crate::model::{BoundsMode, D2Formula, FkParams};
use crate::occupation::OccupationConfig;
use crate::time_marching::TmScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Output times inside a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSpec {
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Default for TimesSpec {
    fn default() -> Self {
        TimesSpec {
            count: 17,
            spacing: Spacing::Linear,
        }
    }
}

impl TimesSpec {
    /// `count` times from `lo` to `hi` inclusive; a single time is `hi`.
    pub fn generate(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(FkError::InvalidConfig("times.count must be positive".into()));
        }
        if self.count == 1 {
            return Ok(vec![hi]);
        }
        let k = (self.count - 1) as f64;
        let mut out: Vec<f64> = (0..self.count)
            .map(|i| {
                let f = i as f64 / k;
                match self.spacing {
                    Spacing::Linear => lo + (hi - lo) * f,
                    Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * f).exp(),
                }
            })
            .collect();
        out[0] = lo;
        out[self.count - 1] = hi;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    /// Time-marching step count over [0, t1].
    pub m: usize,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        ReferenceSection { m: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub n_min: usize,
    pub n_max: usize,
    /// Step count of the time-marching reference.
    pub ref_m: usize,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        ConvergeSection {
            n_min: 2,
            n_max: 32,
            ref_m: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    /// Descending accuracy targets, each at most 0.1.
    pub targets: Vec<f64>,
    pub n_max: usize,
    pub m_max: usize,
    pub repeats: usize,
    /// Node count of the hyperbolic reference solution.
    pub ref_n: usize,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            targets: vec![1e-2, 1e-4, 1e-6],
            n_max: 128,
            m_max: 8192,
            repeats: 5,
            ref_n: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupationSection {
    pub state: u8,
    pub eps1: f64,
    pub eps2: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl Default for OccupationSection {
    fn default() -> Self {
        OccupationSection {
            state: 1,
            eps1: 0.5,
            eps2: 0.5,
            alpha: 0.5,
            lambda: 50.0,
            t_min: 1e3,
            t_max: 1e6,
            count: 13,
        }
    }
}

impl OccupationSection {
    pub fn to_config(&self) -> Result<OccupationConfig> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return Err(FkError::InvalidConfig(format!(
                "occupation window requires 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        let times = TimesSpec {
            count: self.count,
            spacing: Spacing::Log,
        }
        .generate(self.t_min, self.t_max)?;
        let cfg = OccupationConfig {
            state: self.state,
            eps1: self.eps1,
            eps2: self.eps2,
            alpha: self.alpha,
            lambda: self.lambda,
            times,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_a() -> f64 {
    0.9875
}
fn default_delta() -> f64 {
    0.1123
}
fn default_n() -> usize {
    16
}
fn default_t0() -> f64 {
    0.6
}
fn default_t1() -> f64 {
    3.0
}
fn default_contour() -> ContourKind {
    ContourKind::Hyperbolic
}

/// Everything one CLI invocation needs. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: f64,
    pub b: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub binv1: f64,
    pub binv2: f64,
    pub u1: f64,
    pub u2: f64,
    pub rho: f64,
    pub g10: f64,
    pub g20: f64,

    #[serde(default = "default_contour")]
    pub contour: ContourKind,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_n")]
    pub n_nodes: usize,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default)]
    pub times: TimesSpec,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,

    #[serde(default)]
    pub literal_full_weight_k0: bool,
    #[serde(default)]
    pub d2_formula: D2Formula,
    #[serde(default)]
    pub bounds: BoundsMode,
    #[serde(default)]
    pub tm_scheme: TmScheme,

    #[serde(default)]
    pub reference: ReferenceSection,
    #[serde(default)]
    pub converge: ConvergeSection,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(default)]
    pub occupation: OccupationSection,
}

impl RunConfig {
    /// Configuration of the spectral-accuracy example with all defaults.
    pub fn example_one() -> Self {
        Self::from_params(&FkParams::example_one())
    }

    pub fn from_params(p: &FkParams) -> Self {
        RunConfig {
            p: p.p,
            b: p.b,
            alpha1: p.alpha1,
            alpha2: p.alpha2,
            binv1: p.binv1,
            binv2: p.binv2,
            u1: p.u1,
            u2: p.u2,
            rho: p.rho,
            g10: p.g10,
            g20: p.g20,
            contour: default_contour(),
            a: default_a(),
            delta: default_delta(),
            n_nodes: default_n(),
            t0: default_t0(),
            t1: default_t1(),
            times: TimesSpec::default(),
            output: None,
            format: OutputFormat::Csv,
            literal_full_weight_k0: false,
            d2_formula: D2Formula::Max,
            bounds: BoundsMode::Sharp,
            tm_scheme: TmScheme::TemperedHistory,
            reference: ReferenceSection::default(),
            converge: ConvergeSection::default(),
            bench: BenchSection::default(),
            occupation: OccupationSection::default(),
        }
    }

    pub fn params(&self) -> FkParams {
        FkParams {
            p: self.p,
            b: self.b,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            binv1: self.binv1,
            binv2: self.binv2,
            u1: self.u1,
            u2: self.u2,
            rho: self.rho,
            g10: self.g10,
            g20: self.g20,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            a: self.a,
            delta: self.delta,
            bounds: self.bounds,
            d2_formula: self.d2_formula,
            full_weight_k0: self.literal_full_weight_k0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| FkError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FkError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Single-line JSON echo.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration always serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        let bad = |m: String| Err(FkError::InvalidConfig(m));
        if !(self.t0 > 0.0 && self.t1 >= self.t0 && self.t1.is_finite()) {
            return bad(format!("window requires 0 < t0 <= t1, got t0 = {}, t1 = {}", self.t0, self.t1));
        }
        if self.n_nodes == 0 {
            return bad("n_nodes must be positive".into());
        }
        if self.times.count == 0 {
            return bad("times.count must be positive".into());
        }
        if self.reference.m == 0 || self.converge.ref_m == 0 {
            return bad("time-marching step counts must be positive".into());
        }
        let c = &self.converge;
        if c.n_min < 2 || c.n_max > 512 || c.n_min > c.n_max {
            return bad(format!("converge requires 2 <= n_min <= n_max <= 512, got {}..{}", c.n_min, c.n_max));
        }
        let bench = &self.bench;
        if bench.targets.is_empty()
            || bench.targets.iter().any(|t| !(*t > 0.0 && *t <= 0.1))
            || bench.targets.windows(2).any(|w| w[1] >= w[0])
        {
            return bad("bench targets must be descending and each in (0, 0.1]".into());
        }
        if bench.repeats == 0 || bench.n_max < 2 || bench.m_max == 0 || bench.ref_n == 0 {
            return bad("bench repeats, n_max, m_max and ref_n must be positive (n_max >= 2)".into());
        }
        Ok(())
    }

    /// Output times of `solve` inside `[t0, t1]`.
    pub fn output_times(&self) -> Result<Vec<f64>> {
        self.times.generate(self.t0, self.t1)
    }
}
