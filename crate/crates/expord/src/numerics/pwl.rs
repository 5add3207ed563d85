//! Convex piecewise-linear functions, their conjugates, and hinge
//! decompositions.

use alloc::format;
use alloc::vec::Vec;

use super::NumericsError;

/// Slope drops deeper than this count as non-convexity; shallower ones are
/// arithmetic noise.
const CONVEXITY_TOL: f64 = 1e-9;
/// Slope jumps below this do not become atoms.
const ATOM_TOL: f64 = 1e-12;

/// A function given by values at strictly increasing breakpoints, linear in
/// between and extended linearly beyond the ends. Convexity (non-decreasing
/// slopes) is the caller's contract; operations that require it check it.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearConvex {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearConvex {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, NumericsError> {
        if breakpoints.is_empty() {
            return Err(NumericsError::BadBreakpoints(format!("empty breakpoint list")));
        }
        if breakpoints.len() != values.len() {
            return Err(NumericsError::BadBreakpoints(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        for i in 1..breakpoints.len() {
            if !(breakpoints[i] > breakpoints[i - 1]) {
                return Err(NumericsError::BadBreakpoints(format!(
                    "breakpoints not strictly increasing at index {i}"
                )));
            }
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Left end of the breakpoint span.
    pub fn lo(&self) -> f64 {
        self.breakpoints[0]
    }

    /// Right end of the breakpoint span.
    pub fn hi(&self) -> f64 {
        *self.breakpoints.last().expect("nonempty")
    }

    /// Segment slopes, one fewer than the breakpoints.
    pub fn slopes(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(b, v)| (v[1] - v[0]) / (b[1] - b[0]))
            .collect()
    }

    /// Evaluate by interpolation, extending the end segments linearly
    /// outside the span. A single-breakpoint function is constant.
    pub fn eval(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        let v = &self.values;
        let k = b.len();
        if k == 1 {
            return v[0];
        }
        // Segment index such that the segment's slope applies at x.
        let i = match b.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(j) => return v[j],
            Err(0) => 0,
            Err(j) if j >= k => k - 2,
            Err(j) => j - 1,
        };
        let slope = (v[i + 1] - v[i]) / (b[i + 1] - b[i]);
        v[i] + slope * (x - b[i])
    }

    /// True when slopes are non-decreasing within tolerance.
    pub fn is_convex(&self) -> bool {
        let s = self.slopes();
        s.windows(2).all(|w| w[1] >= w[0] - CONVEXITY_TOL)
    }
}

/// The convex conjugate sup over the domain of `t*w - gamma(w)`. For a
/// convex piecewise-linear `gamma` on a closed span the supremum is attained
/// at a breakpoint, so this is exact. A single-point domain gives the line
/// `t*lo - gamma(lo)`.
pub fn convex_conjugate(gamma: &PiecewiseLinearConvex, t: f64) -> f64 {
    gamma
        .breakpoints
        .iter()
        .zip(&gamma.values)
        .map(|(&w, &v)| t * w - v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `rho(t) = C + alpha*t + sum of mass * (t - s)_+` with nonnegative masses.
#[derive(Clone, Debug, PartialEq)]
pub struct HingeDecomposition {
    pub constant: f64,
    pub base_slope: f64,
    /// (location, mass) pairs at interior breakpoints, in increasing location order.
    pub atoms: Vec<(f64, f64)>,
}

impl HingeDecomposition {
    pub fn eval(&self, t: f64) -> f64 {
        let hinges: f64 = self
            .atoms
            .iter()
            .map(|&(s, m)| m * (t - s).max(0.0))
            .sum();
        self.constant + self.base_slope * t + hinges
    }
}

/// Decompose a convex piecewise-linear function (extended linearly outside
/// its span) into constant, base slope, and hinge atoms at the interior
/// breakpoints. The reconstruction is exact everywhere.
pub fn hinge_decompose(rho: &PiecewiseLinearConvex) -> Result<HingeDecomposition, NumericsError> {
    let b = rho.breakpoints();
    let v = rho.values();
    if b.len() == 1 {
        return Ok(HingeDecomposition { constant: v[0], base_slope: 0.0, atoms: Vec::new() });
    }
    let slopes = rho.slopes();
    let base_slope = slopes[0];
    let constant = v[0] - base_slope * b[0];
    let mut atoms = Vec::new();
    for i in 1..slopes.len() {
        let mass = slopes[i] - slopes[i - 1];
        if mass < -CONVEXITY_TOL {
            return Err(NumericsError::NotConvex { index: i });
        }
        if mass > ATOM_TOL {
            atoms.push((b[i], mass));
        }
    }
    Ok(HingeDecomposition { constant, base_slope, atoms })
}
