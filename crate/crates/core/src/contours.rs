//! Parabolic and hyperbolic integration contours, their optimal parameters
//! for a time window `[t₀, Λt₀]`, and checks against the singular region.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FkError, Result};
use crate::model::AnalyticityBounds;
use crate::special_functions::arccosh;

/// Inset from the feasible α-interval endpoints used by the optimiser.
pub const ALPHA_INSET: f64 = 1e-6;
/// Golden-section termination width.
pub const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ContourKind {
    Parabolic,
    Hyperbolic,
}

impl ContourKind {
    pub fn name(self) -> &'static str {
        match self {
            ContourKind::Parabolic => "parabolic",
            ContourKind::Hyperbolic => "hyperbolic",
        }
    }
}

impl std::fmt::Display for ContourKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `z(φ) = η(iφ + 1)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicContour {
    pub eta: f64,
    pub h: f64,
    /// Strip parameter in (1/4, 1).
    pub a: f64,
    pub n: usize,
}

/// `z(φ) = η(1 + sin(iφ − α))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicContour {
    pub eta: f64,
    pub h: f64,
    /// Asymptote half-angle.
    pub alpha: f64,
    pub delta: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contour {
    Parabolic(ParabolicContour),
    Hyperbolic(HyperbolicContour),
}

/// One quadrature node: the point, the derivative z′(φ) and φ itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub z: Complex64,
    pub dz: Complex64,
    pub phi: f64,
}

/// A named validation margin; non-negative means satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub margins: [Margin; 2],
}

impl ValidationReport {
    fn new(margins: [Margin; 2]) -> Self {
        ValidationReport {
            passed: margins.iter().all(|m| m.value >= 0.0),
            margins,
        }
    }

    /// Converts a failed report into [`FkError::ContourInvalid`].
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            return Ok(self);
        }
        let detail = self
            .margins
            .iter()
            .map(|m| format!("{} = {:.6e}", m.name, m.value))
            .collect::<Vec<_>>()
            .join(", ");
        Err(FkError::ContourInvalid(format!(
            "contour does not clear the singular region ({detail}); increase N or narrow the window"
        )))
    }
}

fn check_window(lambda: f64, t1: f64, n: usize) -> Result<()> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(FkError::InvalidConfig(format!("window ratio must be >= 1, got {lambda}")));
    }
    if !(t1 > 0.0) || !t1.is_finite() {
        return Err(FkError::InvalidConfig(format!("t1 must be positive, got {t1}")));
    }
    if n == 0 {
        return Err(FkError::InvalidConfig("node count must be positive".into()));
    }
    Ok(())
}

/// `q = 1 + a − √(a² + 2a)`.
pub fn parabolic_q(a: f64) -> f64 {
    1.0 + a - (a * a + 2.0 * a).sqrt()
}

fn parabolic_radicand(a: f64, lambda: f64) -> (f64, f64) {
    let q = parabolic_q(a);
    (q, q * q * (1.0 - lambda) + 2.0 * a * lambda * q)
}

/// Error-balanced parabolic contour for the window `[t₁/Λ, t₁]`.
pub fn parabolic_optimal(a: f64, lambda: f64, t1: f64, n: usize) -> Result<ParabolicContour> {
    check_window(lambda, t1, n)?;
    if !(a > 0.25 && a < 1.0) {
        return Err(FkError::InvalidConfig(format!("parabolic a must lie in (1/4, 1), got {a}")));
    }
    let (q, radicand) = parabolic_radicand(a, lambda);
    let denom = q * (1.0 - lambda) + 2.0 * a * lambda;
    if !(radicand > 0.0) || !(denom > 0.0) {
        return Err(FkError::InfeasibleGeometry(format!(
            "window ratio {lambda} is too wide for a = {a}"
        )));
    }
    let r = radicand.sqrt();
    let nf = n as f64;
    Ok(ParabolicContour {
        eta: PI * q * r / denom * nf / t1,
        h: r / (q * nf),
        a,
        n,
    })
}

/// Theoretical decay rate `P(Λ)` of the parabolic quadrature error in N.
pub fn parabolic_decay_rate(a: f64, lambda: f64) -> Result<f64> {
    let (q, radicand) = parabolic_radicand(a, lambda);
    let denom = q * (lambda - 1.0) - 2.0 * a * lambda;
    if !(radicand > 0.0) || !(denom < 0.0) {
        return Err(FkError::InfeasibleGeometry(format!(
            "window ratio {lambda} is too wide for a = {a}"
        )));
    }
    Ok(PI * (q - 2.0 * a) * radicand.sqrt() / denom)
}

/// Feasible open interval of the hyperbolic asymptote angle.
pub fn hyperbolic_alpha_interval(delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0 && delta < PI / 2.0) {
        return Err(FkError::InvalidConfig(format!("delta must lie in (0, pi/2), got {delta}")));
    }
    let lo = (PI - 2.0 * delta) / 4.0 + ALPHA_INSET;
    let hi = PI / 2.0 - delta - ALPHA_INSET;
    if !(lo < hi) {
        return Err(FkError::InfeasibleGeometry(format!(
            "no feasible asymptote angle for delta = {delta}"
        )));
    }
    Ok((lo, hi))
}

/// `A(α) = arccosh(((π−2α−2δ)Λ + (4α−π+2δ)) / ((4α−π+2δ) sin α))`.
pub fn hyperbolic_a(alpha: f64, delta: f64, lambda: f64) -> Result<f64> {
    let k = 4.0 * alpha - PI + 2.0 * delta;
    let arg = ((PI - 2.0 * alpha - 2.0 * delta) * lambda + k) / (k * alpha.sin());
    arccosh(arg).map_err(|_| {
        FkError::InfeasibleGeometry(format!(
            "arccosh argument {arg} < 1 at alpha = {alpha}, delta = {delta}, lambda = {lambda}"
        ))
    })
}

/// `Q(α) = (π² − 2πα − 2πδ) / A(α)`, the hyperbolic decay rate.
pub fn hyperbolic_q(alpha: f64, delta: f64, lambda: f64) -> Result<f64> {
    Ok((PI * PI - 2.0 * PI * alpha - 2.0 * PI * delta) / hyperbolic_a(alpha, delta, lambda)?)
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hyperbolic contour with α maximising Q(α) for the window `[t₁/Λ, t₁]`.
pub fn hyperbolic_optimal(delta: f64, lambda: f64, t1: f64, n: usize) -> Result<HyperbolicContour> {
    check_window(lambda, t1, n)?;
    let (lo, hi) = hyperbolic_alpha_interval(delta)?;
    let alpha = golden_max(|al| hyperbolic_q(al, delta, lambda), lo, hi)?;
    hyperbolic_with_alpha(alpha, delta, lambda, t1, n)
}

/// Hyperbolic contour for a given asymptote angle.
pub fn hyperbolic_with_alpha(
    alpha: f64,
    delta: f64,
    lambda: f64,
    t1: f64,
    n: usize,
) -> Result<HyperbolicContour> {
    check_window(lambda, t1, n)?;
    let a_val = hyperbolic_a(alpha, delta, lambda)?;
    let nf = n as f64;
    let eta = (4.0 * PI * alpha - PI * PI + 2.0 * PI * delta) / a_val * nf / t1;
    if !(eta > 0.0) || !(a_val > 0.0) {
        return Err(FkError::InfeasibleGeometry(format!(
            "degenerate hyperbolic contour at alpha = {alpha}"
        )));
    }
    Ok(HyperbolicContour {
        eta,
        h: a_val / nf,
        alpha,
        delta,
        n,
    })
}

impl ParabolicContour {
    pub fn node_at(&self, phi: f64) -> ContourNode {
        let eta = self.eta;
        ContourNode {
            z: Complex64::new(eta * (1.0 - phi * phi), 2.0 * eta * phi),
            dz: Complex64::new(-2.0 * eta * phi, 2.0 * eta),
            phi,
        }
    }

    /// Passes iff `a ≤ a_max` and the contour's real-axis crossing clears the box.
    pub fn validate(&self, bounds: &AnalyticityBounds) -> Result<ValidationReport> {
        let d1p = bounds.d1.max(0.0);
        let d2 = bounds.d2;
        let a_max = 1.0 - ((d1p + (d1p * d1p + d2 * d2).sqrt()) / (2.0 * self.eta)).sqrt();
        if !(a_max >= 0.0) {
            return Err(FkError::ContourInvalid(format!(
                "eta = {} is too small for the singular region (d1 = {}, d2 = {}); increase N",
                self.eta, bounds.d1, d2
            )));
        }
        let clearance = self.eta * (1.0 - d2 * d2 / (4.0 * self.eta * self.eta)) - d1p;
        Ok(ValidationReport::new([
            Margin {
                name: "a_max - a",
                value: a_max - self.a,
            },
            Margin {
                name: "crossing clearance",
                value: clearance,
            },
        ]))
    }
}

impl HyperbolicContour {
    pub fn node_at(&self, phi: f64) -> ContourNode {
        let (sa, ca) = self.alpha.sin_cos();
        let eta = self.eta;
        ContourNode {
            z: Complex64::new(eta * (1.0 - sa * phi.cosh()), eta * ca * phi.sinh()),
            dz: Complex64::new(-eta * sa * phi.sinh(), eta * ca * phi.cosh()),
            phi,
        }
    }

    /// Smallest δ for which the contour family clears the box.
    pub fn delta_min(&self, bounds: &AnalyticityBounds) -> Result<f64> {
        let d1p = bounds.d1.max(0.0);
        if !(self.eta > d1p) {
            return Err(FkError::ContourInvalid(format!(
                "eta = {} does not exceed d1 = {}; increase N",
                self.eta, d1p
            )));
        }
        Ok((bounds.d2 / (self.eta - d1p)).atan())
    }

    pub fn validate(&self, bounds: &AnalyticityBounds) -> Result<ValidationReport> {
        let delta_min = self.delta_min(bounds)?;
        Ok(ValidationReport::new([
            Margin {
                name: "eta - d1",
                value: self.eta - bounds.d1.max(0.0),
            },
            Margin {
                name: "delta - delta_min",
                value: self.delta - delta_min,
            },
        ]))
    }
}

impl Contour {
    pub fn kind(&self) -> ContourKind {
        match self {
            Contour::Parabolic(_) => ContourKind::Parabolic,
            Contour::Hyperbolic(_) => ContourKind::Hyperbolic,
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            Contour::Parabolic(c) => c.eta,
            Contour::Hyperbolic(c) => c.eta,
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            Contour::Parabolic(c) => c.h,
            Contour::Hyperbolic(c) => c.h,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Contour::Parabolic(c) => c.n,
            Contour::Hyperbolic(c) => c.n,
        }
    }

    pub fn node_at(&self, phi: f64) -> ContourNode {
        match self {
            Contour::Parabolic(c) => c.node_at(phi),
            Contour::Hyperbolic(c) => c.node_at(phi),
        }
    }

    /// Nodes at `φ_k = k h`, `k = 0 … N−1`.
    pub fn nodes(&self) -> Vec<ContourNode> {
        let h = self.h();
        (0..self.n()).map(|k| self.node_at(k as f64 * h)).collect()
    }

    /// Real part of the rightmost point (φ = 0).
    pub fn re_max(&self) -> f64 {
        self.node_at(0.0).z.re
    }

    pub fn validate(&self, bounds: &AnalyticityBounds) -> Result<ValidationReport> {
        match self {
            Contour::Parabolic(c) => c.validate(bounds),
            Contour::Hyperbolic(c) => c.validate(bounds),
        }
    }

    /// Optimal contour of `kind` for `[t₁/Λ, t₁]`; `shape` is `a` (parabolic) or `δ` (hyperbolic).
    pub fn optimal(kind: ContourKind, shape: f64, lambda: f64, t1: f64, n: usize) -> Result<Self> {
        Ok(match kind {
            ContourKind::Parabolic => Contour::Parabolic(parabolic_optimal(shape, lambda, t1, n)?),
            ContourKind::Hyperbolic => Contour::Hyperbolic(hyperbolic_optimal(shape, lambda, t1, n)?),
        })
    }

    /// Predicted exponential decay rate in N for window ratio Λ.
    pub fn decay_rate(&self, lambda: f64) -> Result<f64> {
        match self {
            Contour::Parabolic(c) => parabolic_decay_rate(c.a, lambda),
            Contour::Hyperbolic(c) => hyperbolic_q(c.alpha, c.delta, lambda),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 0.9875;
    const DELTA: f64 = 0.1123;

    #[test]
    fn q_value() {
        // mpmath, 30 digits
        assert!((parabolic_q(A) - 0.269_898_110_736_949_61).abs() < 1e-15);
    }

    #[test]
    fn parabolic_window_values() {
        let c = parabolic_optimal(A, 5.0, 100.0, 30).unwrap();
        assert!((c.eta * 100.0 / 30.0 - 0.148_532_556_245_298_9).abs() < 1e-13);
        assert!((c.h * 30.0 - 5.708_579_609_366_293).abs() < 1e-12);
        assert!((parabolic_decay_rate(A, 5.0).unwrap() - 0.938_365_746_908_717_4).abs() < 1e-12);
    }

    #[test]
    fn parabolic_unit_window_reduces() {
        let (t, n) = (2.5, 17);
        let c = parabolic_optimal(A, 1.0, t, n).unwrap();
        let q = parabolic_q(A);
        let eta = PI * (2.0 * A * q.powi(3)).sqrt() / (2.0 * A) * n as f64 / t;
        let h = (2.0 * A * q).sqrt() / (q * n as f64);
        assert!((c.eta - eta).abs() <= 1e-14 * eta);
        assert!((c.h - h).abs() <= 1e-14 * h);
    }

    #[test]
    fn parabolic_rejects_bad_inputs() {
        // 2a > q whenever a > 1/4, so every window ratio is feasible
        assert!(parabolic_optimal(A, 1e6, 1.0, 10).is_ok());
        assert!(matches!(parabolic_optimal(0.2, 2.0, 1.0, 10), Err(FkError::InvalidConfig(_))));
        assert!(matches!(parabolic_optimal(A, 0.5, 1.0, 10), Err(FkError::InvalidConfig(_))));
        assert!(matches!(parabolic_optimal(A, 2.0, 1.0, 0), Err(FkError::InvalidConfig(_))));
    }

    #[test]
    fn golden_section_matches_grid() {
        let c = hyperbolic_optimal(DELTA, 5.0, 3.0, 10).unwrap();
        let (lo, hi) = hyperbolic_alpha_interval(DELTA).unwrap();
        let q_star = hyperbolic_q(c.alpha, DELTA, 5.0).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=10_000 {
            let al = lo + (hi - lo) * i as f64 / 10_000.0;
            let q = hyperbolic_q(al, DELTA, 5.0).unwrap();
            assert!(q <= q_star + 1e-12);
            if q > best.0 {
                best = (q, al);
            }
        }
        assert!((best.1 - c.alpha).abs() < (hi - lo) / 10_000.0);
        assert!((q_star - 1.14577).abs() < 1e-4);
        assert!(c.eta > 0.0 && q_star > 0.0);
    }

    #[test]
    fn hyperbolic_q_vanishes_at_lower_endpoint() {
        let lo = (PI - 2.0 * DELTA) / 4.0;
        let qs: Vec<f64> = [1e-2, 1e-5, 1e-8, 1e-11, 1e-14]
            .iter()
            .map(|e| hyperbolic_q(lo + e, DELTA, 5.0).unwrap())
            .collect();
        assert!(qs.windows(2).all(|w| w[1] < w[0]));
        assert!(hyperbolic_a(lo + 1e-14, DELTA, 5.0).unwrap() > 30.0);
        assert!(matches!(
            hyperbolic_alpha_interval(PI / 2.0 - 1e-9),
            Err(FkError::InfeasibleGeometry(_))
        ));
    }

    #[test]
    fn node_closed_forms() {
        let p = ParabolicContour { eta: 1.3, h: 0.2, a: A, n: 4 };
        let n0 = p.node_at(0.0);
        assert_eq!(n0.z, Complex64::new(1.3, 0.0));
        assert_eq!(n0.dz, Complex64::new(0.0, 2.6));
        let n1 = p.node_at(1.0);
        assert!((n1.z - Complex64::new(0.0, 2.6)).norm() < 1e-15);
        assert!((n1.dz - Complex64::new(-2.6, 2.6)).norm() < 1e-15);

        let hc = HyperbolicContour { eta: 2.0, h: 0.3, alpha: 1.1, delta: DELTA, n: 4 };
        let n0 = hc.node_at(0.0);
        assert!((n0.z.re - 2.0 * (1.0 - 1.1f64.sin())).abs() < 1e-15);
        assert!((n0.dz - Complex64::new(0.0, 2.0 * 1.1f64.cos())).norm() < 1e-15);
    }

    #[test]
    fn node_decompositions_match_complex_forms() {
        let p = ParabolicContour { eta: 0.7, h: 0.2, a: A, n: 4 };
        let hc = HyperbolicContour { eta: 1.9, h: 0.3, alpha: 1.05, delta: DELTA, n: 4 };
        let i = Complex64::i();
        for k in 0..1000 {
            let phi = -6.0 + 12.0 * (k as f64 + 0.5) / 1000.0;
            let zp = p.eta * (i * phi + 1.0) * (i * phi + 1.0);
            let np = p.node_at(phi);
            assert!((np.z - zp).norm() <= 1e-14 * zp.norm().max(1.0));
            let zh = hc.eta * (1.0 + (i * phi - hc.alpha).sin());
            let dzh = hc.eta * i * (i * phi - hc.alpha).cos();
            let nh = hc.node_at(phi);
            assert!((nh.z - zh).norm() <= 1e-14 * zh.norm().max(1.0));
            assert!((nh.dz - dzh).norm() <= 1e-14 * dzh.norm().max(1.0));
        }
    }

    #[test]
    fn real_part_decreases_along_tails() {
        let p = Contour::Parabolic(parabolic_optimal(A, 5.0, 3.0, 12).unwrap());
        let h = Contour::Hyperbolic(hyperbolic_optimal(DELTA, 5.0, 3.0, 12).unwrap());
        for c in [p, h] {
            let nodes = c.nodes();
            assert_eq!(nodes.len(), 12);
            assert!(nodes.windows(2).all(|w| w[1].z.re < w[0].z.re));
        }
    }

    #[test]
    fn parabolic_validation_cases() {
        let b = AnalyticityBounds { d1: -0.5, d2: 1e-12 };
        let c = ParabolicContour { eta: 1.0, h: 0.1, a: 0.99, n: 10 };
        assert!(c.validate(&b).unwrap().passed);

        let (d1, d2): (f64, f64) = (0.3, 0.4);
        let eta = (d1 + (d1 * d1 + d2 * d2).sqrt()) / 2.0;
        let c = ParabolicContour { eta, h: 0.1, a: 0.3, n: 10 };
        let r = c.validate(&AnalyticityBounds { d1, d2 }).unwrap();
        // a_max = 0 on this boundary
        assert!((r.margins[0].value + 0.3).abs() < 1e-12);
        assert!(!r.passed);

        let c = ParabolicContour { eta: 0.1, h: 0.1, a: 0.5, n: 10 };
        assert!(matches!(
            c.validate(&AnalyticityBounds { d1: 5.0, d2: 1.0 }),
            Err(FkError::ContourInvalid(_))
        ));
    }

    #[test]
    fn hyperbolic_validation_cases() {
        let hc = HyperbolicContour { eta: 2.0, h: 0.3, alpha: 1.1, delta: DELTA, n: 8 };
        let b = AnalyticityBounds { d1: -0.4, d2: 1e-12 };
        assert!(hc.delta_min(&b).unwrap() < 1e-11);
        assert!(hc.validate(&b).unwrap().passed);

        let b = AnalyticityBounds { d1: 1.5, d2: 0.5 };
        assert!((hc.delta_min(&b).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(!hc.validate(&b).unwrap().passed);

        let b = AnalyticityBounds { d1: 2.5, d2: 0.5 };
        assert!(matches!(hc.validate(&b), Err(FkError::ContourInvalid(_))));

        let mut last = 0.0;
        for d2 in [0.1, 0.2, 0.4, 0.8] {
            let dm = hc.delta_min(&AnalyticityBounds { d1: 0.5, d2 }).unwrap();
            assert!(dm > last);
            last = dm;
        }
    }
}
