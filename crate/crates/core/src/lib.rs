//! Contour-integral solver for the backward Feynman-Kac equation with two
//! internal states.
//!
//! The Laplace-space solution ([`model`]) is inverted by trapezoidal
//! quadrature on an optimally parameterised parabolic or hyperbolic contour
//! ([`contours`], [`cim_solver`]). A first-order time-marching scheme
//! ([`time_marching`]) serves as the independent reference, and
//! [`occupation`] applies the ρ-derivative to mean occupation times.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cim_solver;
pub mod cli;
pub mod contours;
pub mod error;
pub mod model;
pub mod occupation;
pub mod special_functions;
pub mod time_marching;

pub use cim_solver::{
    error_decay_fit, prepare, roundoff_floor, solve_window, DecayFit, DecayPoint, PreparedIntegrand,
    SolutionSample, SolverOptions, WindowSolution, WindowSolver,
};
pub use contours::{Contour, ContourKind, ContourNode, HyperbolicContour, ParabolicContour, ValidationReport};
pub use error::{FkError, Result};
pub use model::{
    analyticity_bounds, bounds_for, derive_coeffs, AnalyticityBounds, BoundsMode, D2Formula, DerivedCoeffs,
    FkModel, FkParams, LaplaceValue,
};
pub use occupation::{asymptote_fit, equilibrium_weights, occupation_average, OccupationConfig};
pub use time_marching::{tm_first_step, tm_solve, tm_weight, TmGrid, TmReference, TmScheme, TmStepper};
