//! Shared numeric substrate: linear programming, convex conjugation, and
//! hinge decomposition of convex piecewise-linear functions.

mod pwl;
mod simplex;

pub use pwl::{convex_conjugate, hinge_decompose, HingeDecomposition, PiecewiseLinearConvex};
pub use simplex::{solve_lp, solve_lp_with, LPResult, LinearProgram, FEASIBILITY_TOL, REDUCED_COST_TOL};

use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum NumericsError {
    /// Row lengths or bound lists disagree with the declared variable count,
    /// or a variable's lower bound exceeds its upper bound.
    MalformedProgram(String),
    /// The simplex iteration cap was hit; the program is numerically hostile.
    IterationLimit,
    /// Breakpoint list is empty or does not match the value list.
    BadBreakpoints(String),
    /// Slopes decrease at the named breakpoint index.
    NotConvex { index: usize },
}

impl fmt::Display for NumericsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericsError::MalformedProgram(msg) => write!(f, "malformed program: {msg}"),
            NumericsError::IterationLimit => write!(f, "simplex iteration limit exceeded"),
            NumericsError::BadBreakpoints(msg) => write!(f, "bad breakpoints: {msg}"),
            NumericsError::NotConvex { index } => {
                write!(f, "slopes decrease at breakpoint {index}: function is not convex")
            }
        }
    }
}

impl core::error::Error for NumericsError {}
