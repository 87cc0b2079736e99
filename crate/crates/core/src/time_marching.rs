//! First-order time-marching reference scheme for the integrated system.
//!
//! Each step solves a fixed 2×2 system for `(G₁(t_{n+1}), G₂(t_{n+1}))`; the
//! right-hand side carries the tempered fractional-integral history through
//! product-integration weights, so the total cost is O(M²).

use serde::{Deserialize, Serialize};

use crate::cim_solver::SolutionSample;
use crate::error::{FkError, Result};
use crate::model::{derive_coeffs, FkParams};
use crate::special_functions::{gamma_fn, lower_incomplete_gamma_at_one};

/// Relative determinant threshold of the step matrix.
pub const SINGULAR_TOL: f64 = 1e-14;

/// How the `ρU ∫₀ᵗ J(s) ds` part of the integrated fractional derivative is
/// discretised (J the tempered fractional integral of G).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TmScheme {
    /// Trapezoid rule over the stored values J(t_i).
    #[default]
    TemperedHistory,
    /// Closed form `(ρU)^{1−α} γ(α, 1) ∫₀ᵗ G`.
    Literal,
}

/// Lag polynomial `(k+2)^{β} + k^{β} − 2(k+1)^{β}` with β = α + 1, evaluated
/// without cancellation.
fn lag_poly(k: usize, alpha: f64) -> f64 {
    let beta = alpha + 1.0;
    if k == 0 {
        return 2f64.powf(beta) - 2.0;
    }
    let kf = k as f64;
    let up2 = (beta * (2.0 / kf).ln_1p()).exp_m1();
    let up1 = (beta * (1.0 / kf).ln_1p()).exp_m1();
    kf.powf(beta) * (up2 - 2.0 * up1)
}

/// Product-integration weight `d_{j,n}` of `G(t_j)` in step `n → n+1`.
pub fn tm_weight(j: usize, n: usize, alpha: f64, rho_u: f64, h: f64) -> f64 {
    assert!(j <= n, "weight index j = {j} exceeds n = {n}");
    let damp = (-rho_u * (n - j + 1) as f64 * h).exp();
    if j == 0 {
        let nf = n as f64;
        let np1 = nf + 1.0;
        // n^{α+1} − (n+1)^α (n − α) = α(n+1)^α − n^{α+1}((1 + 1/n)^α − 1)
        let tail = if n == 0 {
            0.0
        } else {
            nf.powf(alpha + 1.0) * (alpha * (1.0 / nf).ln_1p()).exp_m1()
        };
        damp * (alpha * np1.powf(alpha) - tail)
    } else {
        damp * lag_poly(n - j, alpha)
    }
}

/// Uniform grid `t_n = nT/M`, `n = 0 … M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmGrid {
    pub t_end: f64,
    pub m: usize,
}

impl TmGrid {
    pub fn new(t_end: f64, m: usize) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(FkError::InvalidConfig(format!("final time must be positive, got {t_end}")));
        }
        if m == 0 {
            return Err(FkError::InvalidConfig("step count M must be at least 1".into()));
        }
        Ok(TmGrid { t_end, m })
    }

    pub fn h(&self) -> f64 {
        self.t_end / self.m as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.m {
            self.t_end
        } else {
            self.t_end * n as f64 / self.m as f64
        }
    }
}

// Per-state constants of the scheme.
#[derive(Debug, Clone)]
struct StateCoeffs {
    alpha: f64,
    rho_u: f64,
    c: f64,
    coupling: f64,
    g0: f64,
    /// Implicit coefficient of G(t_{n+1}) in the integrated derivative.
    kappa: f64,
    /// (ρU)^{1−α} γ(α, 1) / Γ(α), literal scheme only.
    g_lit: f64,
    /// Lag weights `e^{−ρU(k+1)h} lag_poly(k)`, grown on demand.
    lag: Vec<f64>,
}

impl StateCoeffs {
    fn new(alpha: f64, rho_u: f64, coupling: f64, g0: f64, h: f64, scheme: TmScheme) -> Result<Self> {
        let c = h.powf(alpha) / (gamma_fn(alpha)? * alpha * (alpha + 1.0));
        let g_lit = if rho_u == 0.0 {
            0.0
        } else {
            rho_u.powf(1.0 - alpha) * lower_incomplete_gamma_at_one(alpha)? / gamma_fn(alpha)?
        };
        let kappa = match scheme {
            TmScheme::TemperedHistory => c * (1.0 + 0.5 * rho_u * h),
            TmScheme::Literal => c + 0.5 * h * g_lit,
        };
        Ok(StateCoeffs {
            alpha,
            rho_u,
            c,
            coupling,
            g0,
            kappa,
            g_lit,
            lag: Vec::new(),
        })
    }

    fn ensure_lag(&mut self, upto: usize, h: f64) {
        while self.lag.len() <= upto {
            let k = self.lag.len();
            let damp = (-self.rho_u * (k + 1) as f64 * h).exp();
            self.lag.push(damp * lag_poly(k, self.alpha));
        }
    }
}

/// Stored solution values and running sums.
#[derive(Debug, Clone, Default)]
pub struct TmHistory {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// `Σ_{i=1}^{n} G_j(t_i)`.
    pub sum_g1: f64,
    pub sum_g2: f64,
    /// Tempered fractional integrals `J_j(t_i)`, `i = 0 … n`.
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    /// `Σ_{i=1}^{n} J_j(t_i)`.
    pub sum_j1: f64,
    pub sum_j2: f64,
}

/// Incremental stepper; [`tm_solve`] drives it to completion.
#[derive(Debug, Clone)]
pub struct TmStepper {
    grid: TmGrid,
    scheme: TmScheme,
    s1: StateCoeffs,
    s2: StateCoeffs,
    // Inverse of [[1 − a₁₁, −a₁₂], [−a₂₁, 1 − a₂₂]], stored row-major.
    inv: [f64; 4],
    matrix: [f64; 4],
    history: TmHistory,
}

impl TmStepper {
    pub fn new(params: &FkParams, grid: TmGrid, scheme: TmScheme) -> Result<Self> {
        let co = derive_coeffs(params)?;
        let h = grid.h();
        let s1 = StateCoeffs::new(params.alpha1, params.rho_u1(), co.c1, params.g10, h, scheme)?;
        let s2 = StateCoeffs::new(params.alpha2, params.rho_u2(), co.c2, params.g20, h, scheme)?;
        let a11 = s1.coupling * s1.kappa - 0.5 * s1.rho_u * h;
        let a12 = -s2.coupling * s2.kappa;
        let a21 = -s1.coupling * s1.kappa;
        let a22 = s2.coupling * s2.kappa - 0.5 * s2.rho_u * h;
        let matrix = [1.0 - a11, -a12, -a21, 1.0 - a22];
        let det = matrix[0] * matrix[3] - matrix[1] * matrix[2];
        let scale = (matrix[0] * matrix[3]).abs() + (matrix[1] * matrix[2]).abs();
        if !(det.abs() >= SINGULAR_TOL * scale) || !det.is_finite() {
            return Err(FkError::SingularStep { det });
        }
        let inv = [matrix[3] / det, -matrix[1] / det, -matrix[2] / det, matrix[0] / det];
        let history = TmHistory {
            g1: vec![params.g10],
            g2: vec![params.g20],
            j1: vec![0.0],
            j2: vec![0.0],
            ..TmHistory::default()
        };
        Ok(TmStepper {
            grid,
            scheme,
            s1,
            s2,
            inv,
            matrix,
            history,
        })
    }

    pub fn grid(&self) -> &TmGrid {
        &self.grid
    }

    pub fn history(&self) -> &TmHistory {
        &self.history
    }

    /// Index of the last computed time level.
    pub fn step_index(&self) -> usize {
        self.history.g1.len() - 1
    }

    /// The constant step matrix, row-major.
    pub fn step_matrix(&self) -> [f64; 4] {
        self.matrix
    }

    /// `|1 − a_jj| > |a_{j,3−j}|` for both rows.
    pub fn diagonally_dominant(&self) -> bool {
        let m = self.matrix;
        m[0].abs() > m[1].abs() && m[3].abs() > m[2].abs()
    }

    /// Advances one step; returns `(G₁, G₂)` at the new level.
    pub fn step(&mut self) -> Result<(f64, f64)> {
        let n = self.step_index();
        if n >= self.grid.m {
            return Err(FkError::OutOfRange(format!("grid of {} steps already completed", self.grid.m)));
        }
        let h = self.grid.h();
        self.s1.ensure_lag(n, h);
        self.s2.ensure_lag(n, h);
        let conv1 = convolution(&self.s1, &self.history.g1, n, h);
        let conv2 = convolution(&self.s2, &self.history.g2, n, h);
        let int1 = 0.5 * h * self.s1.g0 + h * self.history.sum_g1;
        let int2 = 0.5 * h * self.s2.g0 + h * self.history.sum_g2;

        let (beta1, beta2) = match self.scheme {
            TmScheme::TemperedHistory => (
                conv1 * (1.0 + 0.5 * self.s1.rho_u * h) + self.s1.rho_u * h * self.history.sum_j1,
                conv2 * (1.0 + 0.5 * self.s2.rho_u * h) + self.s2.rho_u * h * self.history.sum_j2,
            ),
            TmScheme::Literal => (conv1 + self.s1.g_lit * int1, conv2 + self.s2.g_lit * int2),
        };
        let (c1, c2) = (self.s1.coupling, self.s2.coupling);
        let b1 = c1 * beta1 - c2 * beta2 - self.s1.rho_u * int1 + self.s1.g0;
        let b2 = c2 * beta2 - c1 * beta1 - self.s2.rho_u * int2 + self.s2.g0;
        let g1 = self.inv[0] * b1 + self.inv[1] * b2;
        let g2 = self.inv[2] * b1 + self.inv[3] * b2;
        if !(g1.is_finite() && g2.is_finite()) {
            return Err(FkError::NonFinite {
                step: n + 1,
                t: self.grid.time(n + 1),
            });
        }

        let j1 = conv1 + self.s1.c * g1;
        let j2 = conv2 + self.s2.c * g2;
        let hist = &mut self.history;
        hist.g1.push(g1);
        hist.g2.push(g2);
        hist.sum_g1 += g1;
        hist.sum_g2 += g2;
        hist.j1.push(j1);
        hist.j2.push(j2);
        hist.sum_j1 += j1;
        hist.sum_j2 += j2;
        Ok((g1, g2))
    }

    pub fn samples(&self) -> Vec<SolutionSample> {
        self.history
            .g1
            .iter()
            .zip(&self.history.g2)
            .enumerate()
            .map(|(n, (&g1, &g2))| SolutionSample {
                t: self.grid.time(n),
                g1,
                g2,
            })
            .collect()
    }
}

// c Σ_{j=0}^{n} d_{j,n} G(t_j)
fn convolution(s: &StateCoeffs, g: &[f64], n: usize, h: f64) -> f64 {
    let mut acc = tm_weight(0, n, s.alpha, s.rho_u, h) * g[0];
    for (j, gj) in g.iter().enumerate().take(n + 1).skip(1) {
        acc += s.lag[n - j] * gj;
    }
    s.c * acc
}

/// `(G₁(t₁), G₂(t₁))` after a single step of size `h`.
pub fn tm_first_step(params: &FkParams, h: f64, scheme: TmScheme) -> Result<(f64, f64)> {
    let mut stepper = TmStepper::new(params, TmGrid::new(h, 1)?, scheme)?;
    stepper.step()
}

/// Full run over `grid`; returns samples at `t₀ … t_M`.
pub fn tm_solve(params: &FkParams, grid: TmGrid, scheme: TmScheme) -> Result<Vec<SolutionSample>> {
    let mut stepper = TmStepper::new(params, grid, scheme)?;
    for _ in 0..grid.m {
        stepper.step()?;
    }
    Ok(stepper.samples())
}

/// Dense reference table with linear-interpolation lookup.
#[derive(Debug, Clone)]
pub struct TmReference {
    grid: TmGrid,
    samples: Vec<SolutionSample>,
}

impl TmReference {
    pub fn new(params: &FkParams, t_end: f64, m: usize, scheme: TmScheme) -> Result<Self> {
        let grid = TmGrid::new(t_end, m)?;
        Ok(TmReference {
            grid,
            samples: tm_solve(params, grid, scheme)?,
        })
    }

    pub fn from_samples(grid: TmGrid, samples: Vec<SolutionSample>) -> Result<Self> {
        if samples.len() != grid.m + 1 {
            return Err(FkError::InvalidConfig(format!(
                "expected {} samples, got {}",
                grid.m + 1,
                samples.len()
            )));
        }
        Ok(TmReference { grid, samples })
    }

    pub fn samples(&self) -> &[SolutionSample] {
        &self.samples
    }

    pub fn grid(&self) -> &TmGrid {
        &self.grid
    }

    /// Linear interpolation at `t ∈ [0, T]`.
    pub fn lookup(&self, t: f64) -> Result<SolutionSample> {
        let t_end = self.grid.t_end;
        if !(t >= 0.0 && t <= t_end) {
            return Err(FkError::OutOfRange(format!("t = {t} outside the reference range [0, {t_end}]")));
        }
        let pos = t / self.grid.h();
        let i = (pos.floor() as usize).min(self.grid.m - 1);
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        if w == 0.0 {
            return Ok(SolutionSample { t, ..a });
        }
        if w == 1.0 {
            return Ok(SolutionSample { t, ..b });
        }
        Ok(SolutionSample {
            t,
            g1: a.g1 + w * (b.g1 - a.g1),
            g2: a.g2 + w * (b.g2 - a.g2),
        })
    }
}
