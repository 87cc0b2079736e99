//! Trapezoidal contour-integral inversion of the Laplace-space solution.
//!
//! For a contour symmetric about the real axis the folded rule is
//!
//! ```text
//! G_j(t) = (h/π) Im[ ½ w₀ + Σ_{k=1}^{N−1} w_k ],   w_k = e^{z_k t} Ĝ_j(z_k) z′_k
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contours::{Contour, ContourKind, ValidationReport};
use crate::error::{FkError, Result};
use crate::model::{bounds_for, BoundsMode, D2Formula, FkModel, FkParams, LaplaceValue};

/// Largest admissible `Re(z_k) t` before `e^{z_k t}` is considered an overflow.
pub const MAX_EXPONENT: f64 = 700.0;

/// One solution value `(t, G₁(t), G₂(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub t: f64,
    #[serde(rename = "G1")]
    pub g1: f64,
    #[serde(rename = "G2")]
    pub g2: f64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Contour-construction and quadrature options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Parabolic strip parameter.
    pub a: f64,
    /// Hyperbolic strip half-width.
    pub delta: f64,
    pub bounds: BoundsMode,
    pub d2_formula: D2Formula,
    /// Give the φ = 0 node full rather than half weight.
    pub full_weight_k0: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            a: 0.9875,
            delta: 0.1123,
            bounds: BoundsMode::Sharp,
            d2_formula: D2Formula::Max,
            full_weight_k0: false,
        }
    }
}

impl SolverOptions {
    pub fn shape(&self, kind: ContourKind) -> f64 {
        match kind {
            ContourKind::Parabolic => self.a,
            ContourKind::Hyperbolic => self.delta,
        }
    }
}

/// Per-node cache of `z_k` and `Ĝ_j(z_k) z′_k`.
#[derive(Debug, Clone)]
pub struct PreparedIntegrand {
    contour: Contour,
    z: Vec<Complex64>,
    v1: Vec<Complex64>,
    v2: Vec<Complex64>,
    full_weight_k0: bool,
}

/// Caches the model's Ĝ on the nodes of `contour`.
pub fn prepare(model: &FkModel, contour: &Contour) -> Result<PreparedIntegrand> {
    prepare_with(contour, |z| model.g_hat(z))
}

/// Caches an arbitrary Laplace-space pair on the nodes of `contour`.
pub fn prepare_with<F>(contour: &Contour, f: F) -> Result<PreparedIntegrand>
where
    F: Fn(Complex64) -> Result<LaplaceValue>,
{
    let nodes = contour.nodes();
    let mut z = Vec::with_capacity(nodes.len());
    let mut v1 = Vec::with_capacity(nodes.len());
    let mut v2 = Vec::with_capacity(nodes.len());
    for node in nodes {
        let g = f(node.z)?;
        z.push(node.z);
        v1.push(g.g1 * node.dz);
        v2.push(g.g2 * node.dz);
    }
    Ok(PreparedIntegrand {
        contour: *contour,
        z,
        v1,
        v2,
        full_weight_k0: false,
    })
}

impl PreparedIntegrand {
    pub fn with_full_weight_k0(mut self, on: bool) -> Self {
        self.full_weight_k0 = on;
        self
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.z
    }

    /// Cached `(Ĝ₁ z′, Ĝ₂ z′)` at node k.
    pub fn cached(&self, k: usize) -> (Complex64, Complex64) {
        (self.v1[k], self.v2[k])
    }

    /// Quadrature at time `t`; O(N).
    pub fn evaluate(&self, t: f64) -> Result<SolutionSample> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(FkError::InvalidConfig(format!("evaluation time must be positive, got {t}")));
        }
        let mut s1 = CompensatedSum::default();
        let mut s2 = CompensatedSum::default();
        for (k, z) in self.z.iter().enumerate() {
            let exponent = z.re * t;
            if exponent > MAX_EXPONENT {
                return Err(FkError::Overflow { node: k, t, exponent });
            }
            let e = (z * t).exp();
            let weight = if k == 0 && !self.full_weight_k0 { 0.5 } else { 1.0 };
            s1.add(weight * (e * self.v1[k]).im);
            s2.add(weight * (e * self.v2[k]).im);
        }
        let scale = self.contour.h() / PI;
        Ok(SolutionSample {
            t,
            g1: scale * s1.value(),
            g2: scale * s2.value(),
        })
    }
}

/// `100 ε e^{Re(z₀) t₁}`: the magnitude of the largest quadrature term times
/// the unit round-off, below which errors are not resolvable.
pub fn roundoff_floor(contour: &Contour, t1: f64) -> f64 {
    100.0 * f64::EPSILON * (contour.re_max() * t1).exp()
}

/// A contour fitted to one window and ready for evaluation.
#[derive(Debug, Clone)]
pub struct WindowSolver {
    prepared: PreparedIntegrand,
    validation: ValidationReport,
    t0: f64,
    t1: f64,
}

fn check_window_times(t0: f64, t1: f64) -> Result<()> {
    if !(t0 > 0.0) || !t0.is_finite() || !t1.is_finite() || !(t1 >= t0) {
        return Err(FkError::InvalidConfig(format!(
            "window requires 0 < t0 <= t1, got t0 = {t0}, t1 = {t1}"
        )));
    }
    Ok(())
}

impl WindowSolver {
    /// Builds the optimal contour for `[t₀, t₁]`, validates it and caches Ĝ.
    pub fn new(
        params: &FkParams,
        kind: ContourKind,
        n: usize,
        t0: f64,
        t1: f64,
        opts: &SolverOptions,
    ) -> Result<Self> {
        let model = FkModel::new(*params)?;
        Self::with_integrand(params, kind, n, t0, t1, opts, |z| model.g_hat(z))
    }

    /// As [`WindowSolver::new`] with a caller-supplied transform; the contour is
    /// still validated against the bounds of `params`.
    pub fn with_integrand<F>(
        params: &FkParams,
        kind: ContourKind,
        n: usize,
        t0: f64,
        t1: f64,
        opts: &SolverOptions,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<LaplaceValue>,
    {
        check_window_times(t0, t1)?;
        let contour = Contour::optimal(kind, opts.shape(kind), t1 / t0, t1, n)?;
        let bounds = bounds_for(params, opts.d2_formula, opts.bounds)?;
        let validation = contour.validate(&bounds)?.into_result()?;
        let prepared = prepare_with(&contour, f)?.with_full_weight_k0(opts.full_weight_k0);
        Ok(WindowSolver {
            prepared,
            validation,
            t0,
            t1,
        })
    }

    pub fn contour(&self) -> &Contour {
        self.prepared.contour()
    }

    pub fn prepared(&self) -> &PreparedIntegrand {
        &self.prepared
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn in_window(&self, t: f64) -> bool {
        let slack = 1e-12 * self.t1;
        t >= self.t0 - slack && t <= self.t1 + slack
    }

    pub fn evaluate(&self, t: f64) -> Result<SolutionSample> {
        self.prepared.evaluate(t)
    }

    pub fn roundoff_floor(&self) -> f64 {
        roundoff_floor(self.contour(), self.t1)
    }
}

/// Result of [`solve_window`].
#[derive(Debug, Clone)]
pub struct WindowSolution {
    pub contour: Contour,
    pub validation: ValidationReport,
    pub samples: Vec<SolutionSample>,
    /// One message per time outside `[t₀, t₁]`.
    pub warnings: Vec<String>,
}

/// Fits one contour to `[t₀, t₁]` and evaluates it at every time in `times`.
pub fn solve_window(
    params: &FkParams,
    kind: ContourKind,
    n: usize,
    t0: f64,
    t1: f64,
    times: &[f64],
    opts: &SolverOptions,
) -> Result<WindowSolution> {
    let solver = WindowSolver::new(params, kind, n, t0, t1, opts)?;
    let mut warnings = Vec::new();
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        if !solver.in_window(t) {
            warnings.push(format!(
                "t = {t} lies outside the design window [{t0}, {t1}]; the error bound does not apply"
            ));
        }
        samples.push(solver.evaluate(t)?);
    }
    Ok(WindowSolution {
        contour: *solver.contour(),
        validation: *solver.validation(),
        samples,
        warnings,
    })
}

/// One point of an error-versus-N curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPoint {
    pub n: usize,
    pub error: f64,
    /// Points with `error <= floor` are excluded from the fit.
    pub floor: f64,
}

/// Least-squares fit of `ln(error) ≈ c₀ − rate·N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    /// Node counts that entered the fit.
    pub used: Vec<usize>,
}

/// Fits an exponential decay rate to the points above their round-off floor.
pub fn error_decay_fit(points: &[DecayPoint]) -> Result<DecayFit> {
    let usable: Vec<&DecayPoint> = points
        .iter()
        .filter(|p| p.error.is_finite() && p.error > 0.0 && p.error > p.floor)
        .collect();
    if usable.len() < 4 {
        return Err(FkError::InsufficientData(format!(
            "decay fit needs at least 4 points above the round-off floor, got {}",
            usable.len()
        )));
    }
    let k = usable.len() as f64;
    let mean_x = usable.iter().map(|p| p.n as f64).sum::<f64>() / k;
    let mean_y = usable.iter().map(|p| p.error.ln()).sum::<f64>() / k;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in &usable {
        let dx = p.n as f64 - mean_x;
        sxx += dx * dx;
        sxy += dx * (p.error.ln() - mean_y);
    }
    if sxx == 0.0 {
        return Err(FkError::InsufficientData("decay fit needs distinct node counts".into()));
    }
    let slope = sxy / sxx;
    Ok(DecayFit {
        rate: -slope,
        intercept: mean_y - slope * mean_x,
        used: usable.iter().map(|p| p.n).collect(),
    })
}
