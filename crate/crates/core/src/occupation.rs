//! Mean occupation time of an internal state,
//! `⟨A⟩(t) = −∂_ρ (G₁ + G₂)(ρ, t) |_{ρ=0}` with U the indicator of that state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cim_solver::{SolverOptions, WindowSolver};
use crate::contours::ContourKind;
use crate::error::{FkError, Result};
use crate::model::{FkModel, FkParams, LaplaceValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationConfig {
    /// 1 or 2.
    pub state: u8,
    pub eps1: f64,
    pub eps2: f64,
    /// Shared order α₁ = α₂.
    pub alpha: f64,
    /// Largest ratio t₁/t₀ served by one contour.
    pub lambda: f64,
    /// Positive, ascending.
    pub times: Vec<f64>,
}

impl OccupationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FkError::InvalidConfig(m));
        if self.state != 1 && self.state != 2 {
            return bad(format!("state must be 1 or 2, got {}", self.state));
        }
        if !(self.eps1 >= 0.0 && self.eps2 >= 0.0 && self.eps1 + self.eps2 > 0.0) {
            return bad("eps1, eps2 must be non-negative with a positive sum".into());
        }
        if !(self.lambda >= 1.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be >= 1, got {}", self.lambda));
        }
        if self.times.is_empty() {
            return bad("at least one time is required".into());
        }
        if !self.times.iter().all(|t| *t > 0.0 && t.is_finite()) {
            return bad("times must be positive and finite".into());
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("times must be strictly ascending".into());
        }
        Ok(())
    }

    /// `ε_state / (ε₁ + ε₂)`.
    pub fn theory_fraction(&self) -> f64 {
        let e = if self.state == 1 { self.eps1 } else { self.eps2 };
        e / (self.eps1 + self.eps2)
    }

    /// `params` with the shared order, ρ = 0 and U the indicator of `state`.
    pub fn apply(&self, params: &FkParams) -> FkParams {
        let (u1, u2) = if self.state == 1 { (1.0, 0.0) } else { (0.0, 1.0) };
        FkParams {
            alpha1: self.alpha,
            alpha2: self.alpha,
            u1,
            u2,
            rho: 0.0,
            ..*params
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupationSample {
    pub t: f64,
    #[serde(rename = "A_mean")]
    pub mean: f64,
    pub theory: f64,
}

/// Splits ascending `times` greedily into groups whose max/min ratio is at
/// most `lambda`; each group is served by the window `[t_max/Λ, t_max]`.
pub fn split_windows(times: &[f64], lambda: f64) -> Vec<(f64, f64, std::ops::Range<usize>)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < times.len() {
        let limit = times[start] * lambda * (1.0 + 1e-12);
        let mut end = start + 1;
        while end < times.len() && times[end] <= limit {
            end += 1;
        }
        let t1 = times[end - 1];
        out.push((t1 / lambda, t1, start..end));
        start = end;
    }
    out
}

/// ⟨A⟩ at every configured time through the contour quadrature of
/// `−(∂_ρĜ₁ + ∂_ρĜ₂)` at ρ = 0.
pub fn occupation_average(
    config: &OccupationConfig,
    params: &FkParams,
    kind: ContourKind,
    n: usize,
    opts: &SolverOptions,
) -> Result<Vec<OccupationSample>> {
    config.validate()?;
    let run = config.apply(params);
    let model = FkModel::new(run)?;
    let integrand = |z: Complex64| -> Result<LaplaceValue> {
        let d = model.dg_hat_drho(z)?;
        Ok(LaplaceValue {
            g1: -(d.g1 + d.g2),
            g2: Complex64::new(0.0, 0.0),
        })
    };
    let fraction = config.theory_fraction();
    let mut out = Vec::with_capacity(config.times.len());
    for (t0, t1, range) in split_windows(&config.times, config.lambda) {
        let solver = WindowSolver::with_integrand(&run, kind, n, t0, t1, opts, integrand)?;
        for &t in &config.times[range] {
            out.push(OccupationSample {
                t,
                mean: solver.evaluate(t)?.g1,
                theory: fraction * t,
            });
        }
    }
    Ok(out)
}

/// Stationary time fractions of the two states,
/// `(π_j / B⁻¹_j) / Σ_k (π_k / B⁻¹_k)` with `π ∝ (1 − b, 1 − p)`.
pub fn equilibrium_weights(params: &FkParams) -> Result<[f64; 2]> {
    params.validate()?;
    let w1 = (1.0 - params.b) / params.binv1;
    let w2 = (1.0 - params.p) / params.binv2;
    let total = w1 + w2;
    if !(total > 0.0) {
        return Err(FkError::InvalidParameter(
            "the chain has no unique stationary distribution (p = b = 1)".into(),
        ));
    }
    Ok([w1 / total, w2 / total])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteFit {
    pub slope: f64,
    pub coefficient: f64,
}

/// Least-squares line `ln A = ln c + s ln t`.
pub fn asymptote_fit(samples: &[(f64, f64)]) -> Result<AsymptoteFit> {
    if samples.len() < 5 {
        return Err(FkError::InsufficientData(format!(
            "asymptote fit needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&(t, a)| !(t > 0.0 && a > 0.0)) {
        return Err(FkError::InsufficientData("asymptote fit needs positive t and A".into()));
    }
    let t_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if t_max / t_min < 100.0 * (1.0 - 1e-12) {
        return Err(FkError::InsufficientData(format!(
            "asymptote fit needs at least two decades of t, got [{t_min}, {t_max}]"
        )));
    }
    let k = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0.ln()).sum::<f64>() / k;
    let my = samples.iter().map(|s| s.1.ln()).sum::<f64>() / k;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, a) in samples {
        let dx = t.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (a.ln() - my);
    }
    let slope = sxy / sxx;
    Ok(AsymptoteFit {
        slope,
        coefficient: (my - slope * mx).exp(),
    })
}
