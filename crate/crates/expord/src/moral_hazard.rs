//! Implementation of target actions under hidden effort.
//!
//! An agent privately mixes between a baseline action and `n` deviations;
//! the monitor observes only a signal drawn from an experiment whose states
//! are the `n + 1` actions (state 0 is the baseline). A payment scheme
//! promises each signal a utility inside fixed bounds, and the principal's
//! cost of a promise is a convex disutility profile. This module builds the
//! participation and deviation constraints for a target mixture
//! ([`build_constraints`]), decides feasibility ([`implementable`]),
//! minimizes expected disutility ([`min_disutility`]), bounds that minimum
//! from below through a conjugate-based dual ([`dual_value`], [`dual_solve`]),
//! calibrates disutility profiles from payment data ([`build_gamma`]), and
//! turns a failed dominance witness into an environment where exactly one of
//! two experiments can implement the target ([`separating_environment`]).
//!
//! The primal LPs and the conjugate dual are deliberately independent
//! routes to the same quantity; neither is derived from the other, so they
//! cross-check each other in tests and downstream code.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiment::FiniteExperiment;
use crate::numerics::{convex_conjugate, solve_lp, LPResult, LinearProgram, PiecewiseLinearConvex};

/// Schemes within this tolerance of every constraint row count as satisfying
/// the constraint set.
pub const SCHEME_TOL: f64 = 1e-8;

/// Quadratic cost matrices may be indefinite by at most this much.
const PSD_TOL: f64 = 1e-9;

/// Residuals within this of zero mark a constraint as binding.
const BINDING_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub enum MoralHazardError {
    /// Cost or utility data fail validation: inverted bounds, an asymmetric
    /// or indefinite quadratic, or a disutility domain that does not match
    /// the utility bounds.
    BadEnvironment(String),
    /// Deviation weights leave the simplex.
    BadAction(String),
    /// Dimensions of environment, experiment, or multipliers disagree.
    StateMismatch,
    /// The mixture row at the target gives some signal zero probability, so
    /// likelihood ratios against it are undefined and the dual cannot run.
    ZeroBaseDensity,
    /// Empty or non-finite calibration data.
    DegenerateInput(String),
}

impl fmt::Display for MoralHazardError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoralHazardError::BadEnvironment(msg) => write!(f, "bad environment: {msg}"),
            MoralHazardError::BadAction(msg) => write!(f, "bad action: {msg}"),
            MoralHazardError::StateMismatch => write!(f, "state dimensions disagree"),
            MoralHazardError::ZeroBaseDensity => {
                write!(f, "mixture at the target gives some signal zero probability")
            }
            MoralHazardError::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
        }
    }
}

impl core::error::Error for MoralHazardError {}

/// Contracting environment: utility bounds for payments, a convex quadratic
/// mixing cost `c(delta) = delta'Q delta / 2 + l'delta + c0` over deviation
/// weights, and the disutility of delivering a promised utility.
#[derive(Clone, Debug)]
pub struct MoralHazardEnv {
    u_bounds: (f64, f64),
    cost_q: Vec<Vec<f64>>,
    cost_l: Vec<f64>,
    c0: f64,
    gamma: PiecewiseLinearConvex,
}

impl MoralHazardEnv {
    pub fn new(
        u_bounds: (f64, f64),
        cost_q: Vec<Vec<f64>>,
        cost_l: Vec<f64>,
        c0: f64,
        gamma: PiecewiseLinearConvex,
    ) -> Result<Self, MoralHazardError> {
        let bad = |msg: &str| Err(MoralHazardError::BadEnvironment(String::from(msg)));
        if !(u_bounds.0.is_finite() && u_bounds.1.is_finite() && u_bounds.0 <= u_bounds.1) {
            return bad("utility bounds must be finite and ordered");
        }
        let n = cost_l.len();
        if cost_q.len() != n || cost_q.iter().any(|row| row.len() != n) {
            return bad("quadratic cost must be square and match the linear term");
        }
        if !c0.is_finite()
            || cost_l.iter().any(|x| !x.is_finite())
            || cost_q.iter().flatten().any(|x| !x.is_finite())
        {
            return bad("cost coefficients must be finite");
        }
        for i in 0..n {
            for j in i + 1..n {
                if (cost_q[i][j] - cost_q[j][i]).abs() > 1e-9 {
                    return bad("quadratic cost must be symmetric");
                }
            }
        }
        if min_symmetric_eigenvalue(&cost_q) < -PSD_TOL {
            return bad("quadratic cost must be positive semidefinite");
        }
        if !gamma.is_convex() {
            return bad("disutility profile must be convex");
        }
        if (gamma.lo() - u_bounds.0).abs() > 1e-9 || (gamma.hi() - u_bounds.1).abs() > 1e-9 {
            return bad("disutility domain must equal the utility bounds");
        }
        Ok(MoralHazardEnv { u_bounds, cost_q, cost_l, c0, gamma })
    }

    pub fn n_deviations(&self) -> usize {
        self.cost_l.len()
    }

    pub fn u_bounds(&self) -> (f64, f64) {
        self.u_bounds
    }

    pub fn gamma(&self) -> &PiecewiseLinearConvex {
        &self.gamma
    }

    pub fn cost_q(&self) -> &[Vec<f64>] {
        &self.cost_q
    }

    pub fn cost_l(&self) -> &[f64] {
        &self.cost_l
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Mixing cost at arbitrary deviation weights (no simplex check: callers
    /// probe finite differences slightly outside).
    pub fn cost(&self, delta: &[f64]) -> f64 {
        let n = self.n_deviations();
        assert_eq!(delta.len(), n, "deviation weights must match the environment");
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += delta[i] * self.cost_q[i][j] * delta[j];
            }
        }
        let lin: f64 = self.cost_l.iter().zip(delta).map(|(l, d)| l * d).sum();
        0.5 * quad + lin + self.c0
    }
}

/// A mixture over deviations (the baseline gets the leftover weight).
#[derive(Clone, Debug, PartialEq)]
pub struct TargetAction {
    delta: Vec<f64>,
    interior: bool,
}

impl TargetAction {
    pub fn new(delta: Vec<f64>) -> Result<Self, MoralHazardError> {
        if delta.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(MoralHazardError::BadAction(String::from(
                "deviation weights must be finite and nonnegative",
            )));
        }
        let sum: f64 = delta.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(MoralHazardError::BadAction(String::from(
                "deviation weights must sum to at most one",
            )));
        }
        // Boundary detection is exact on purpose: a weight of 0.0 pins its
        // coordinate and a sum of 1.0 drops the baseline.
        let interior = delta.iter().all(|d| *d > 0.0) && sum < 1.0;
        Ok(TargetAction { delta, interior })
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn is_interior(&self) -> bool {
        self.interior
    }

    /// Full action distribution including the baseline weight up front.
    pub fn full(&self) -> Vec<f64> {
        let sum: f64 = self.delta.iter().sum();
        let mut out = Vec::with_capacity(self.delta.len() + 1);
        out.push((1.0 - sum).max(0.0));
        out.extend_from_slice(&self.delta);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// One linear row over schemes: `coefficients . w  (sense)  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coefficients: Vec<f64>,
    pub rhs: f64,
    pub sense: Sense,
}

impl LinearConstraint {
    pub fn residual(&self, w: &[f64]) -> f64 {
        let lhs: f64 = self.coefficients.iter().zip(w).map(|(a, wi)| a * wi).sum();
        lhs - self.rhs
    }

    pub fn satisfied_by(&self, w: &[f64], tol: f64) -> bool {
        let r = self.residual(w);
        match self.sense {
            Sense::Eq => r.abs() <= tol,
            Sense::Le => r <= tol,
            Sense::Ge => r >= -tol,
        }
    }
}

/// Participation plus one row per deviation direction.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub ir: LinearConstraint,
    pub ic: Vec<LinearConstraint>,
}

impl ConstraintSet {
    pub fn satisfied_by(&self, w: &[f64], tol: f64) -> bool {
        self.ir.satisfied_by(w, tol) && self.ic.iter().all(|row| row.satisfied_by(w, tol))
    }
}

/// Names a row of a [`ConstraintSet`]: participation or the k-th deviation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintTag {
    Ir,
    Ic(usize),
}

/// An optimal scheme with its expected disutility and binding rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeSolution {
    pub w: Vec<f64>,
    pub disutility: f64,
    pub binding: BTreeSet<ConstraintTag>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DisutilityOutcome {
    Attained(SchemeSolution),
    Unimplementable,
}

impl DisutilityOutcome {
    /// Implementation cost, infinite when no scheme exists.
    pub fn value(&self) -> f64 {
        match self {
            DisutilityOutcome::Attained(s) => s.disutility,
            DisutilityOutcome::Unimplementable => f64::INFINITY,
        }
    }
}

/// Best multipliers found for the conjugate dual and their value.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub value: f64,
    pub lambda: f64,
    pub mu: Vec<f64>,
}

/// Gradient of the mixing cost at the target: `Q delta + l`.
pub fn cost_gradient(env: &MoralHazardEnv, target: &TargetAction) -> Vec<f64> {
    let delta = target.delta();
    let n = env.n_deviations();
    assert_eq!(delta.len(), n, "target dimension must match the environment");
    (0..n)
        .map(|i| {
            let qd: f64 = (0..n).map(|j| env.cost_q[i][j] * delta[j]).sum();
            env.cost_l[i] + qd
        })
        .collect()
}

/// First-order conditions for the target to be the agent's best reply.
///
/// Participation compares the mixture-weighted scheme value against the cost
/// of the target. Each deviation row compares two actions' signal
/// distributions against the marginal cost between them: a free coordinate
/// must be exactly indifferent, a pinned one weakly unattractive. When the
/// baseline itself has zero weight, rows pivot on the heaviest deviation and
/// the pivot's own row keeps the outward inequality, so the row senses still
/// characterize the argmax of the concave agent payoff exactly.
pub fn build_constraints(
    env: &MoralHazardEnv,
    f: &FiniteExperiment,
    target: &TargetAction,
) -> Result<ConstraintSet, MoralHazardError> {
    let n = env.n_deviations();
    if target.delta().len() != n || f.n_states() != n + 1 {
        return Err(MoralHazardError::StateMismatch);
    }
    let m = f.n_signals();
    let rows = f.matrix();
    let full = target.full();
    let mut base = vec![0.0; m];
    for (i, weight) in full.iter().enumerate() {
        for j in 0..m {
            base[j] += weight * rows[i][j];
        }
    }
    let ir = LinearConstraint {
        coefficients: base,
        rhs: env.cost(target.delta()),
        sense: Sense::Ge,
    };
    let grad = cost_gradient(env, target);
    let delta = target.delta();
    let sum: f64 = delta.iter().sum();
    let mut ic = Vec::with_capacity(n);
    if sum < 1.0 {
        for i in 1..=n {
            let coefficients: Vec<f64> = (0..m).map(|j| rows[i][j] - rows[0][j]).collect();
            let sense = if delta[i - 1] > 0.0 { Sense::Eq } else { Sense::Le };
            ic.push(LinearConstraint { coefficients, rhs: grad[i - 1], sense });
        }
    } else {
        let mut k_star = 0;
        for (k, d) in delta.iter().enumerate() {
            if *d > delta[k_star] {
                k_star = k;
            }
        }
        let pivot = k_star + 1;
        for i in 1..=n {
            if i == pivot {
                let coefficients: Vec<f64> = (0..m).map(|j| rows[pivot][j] - rows[0][j]).collect();
                ic.push(LinearConstraint { coefficients, rhs: grad[k_star], sense: Sense::Ge });
            } else {
                let coefficients: Vec<f64> =
                    (0..m).map(|j| rows[i][j] - rows[pivot][j]).collect();
                let sense = if delta[i - 1] > 0.0 { Sense::Eq } else { Sense::Le };
                ic.push(LinearConstraint {
                    coefficients,
                    rhs: grad[i - 1] - grad[k_star],
                    sense,
                });
            }
        }
    }
    Ok(ConstraintSet { ir, ic })
}

fn solve(lp: &LinearProgram) -> Result<LPResult, MoralHazardError> {
    solve_lp(lp).map_err(|e| MoralHazardError::DegenerateInput(format!("scheme program: {e}")))
}

/// Scheme LP over `w` (plus epigraph variables when minimizing disutility).
fn scheme_lp(env: &MoralHazardEnv, cs: &ConstraintSet, minimize: bool) -> LinearProgram {
    let m = cs.ir.coefficients.len();
    let (lo, hi) = env.u_bounds();
    let vars = if minimize { 2 * m } else { m };
    let pad = |coefficients: &[f64], negate: bool| -> Vec<f64> {
        let mut row = vec![0.0; vars];
        for (j, a) in coefficients.iter().enumerate() {
            row[j] = if negate { -a } else { *a };
        }
        row
    };
    let mut objective = vec![0.0; vars];
    let mut equality_rows = Vec::new();
    let mut inequality_rows = Vec::new();
    inequality_rows.push((pad(&cs.ir.coefficients, true), -cs.ir.rhs));
    for row in &cs.ic {
        match row.sense {
            Sense::Eq => equality_rows.push((pad(&row.coefficients, false), row.rhs)),
            Sense::Le => inequality_rows.push((pad(&row.coefficients, false), row.rhs)),
            Sense::Ge => inequality_rows.push((pad(&row.coefficients, true), -row.rhs)),
        }
    }
    let mut variable_bounds = vec![(lo, hi); m];
    if minimize {
        let gamma = env.gamma();
        let slopes = gamma.slopes();
        let bp = gamma.breakpoints();
        let val = gamma.values();
        for j in 0..m {
            objective[m + j] = cs.ir.coefficients[j];
            if slopes.is_empty() {
                // Constant profile: the epigraph is a floor.
                let mut row = vec![0.0; vars];
                row[m + j] = -1.0;
                inequality_rows.push((row, -val[0]));
            }
            for (k, s) in slopes.iter().enumerate() {
                let mut row = vec![0.0; vars];
                row[j] = *s;
                row[m + j] = -1.0;
                inequality_rows.push((row, s * bp[k] - val[k]));
            }
        }
        variable_bounds.extend((0..m).map(|_| (f64::NEG_INFINITY, f64::INFINITY)));
    }
    LinearProgram {
        variable_count: vars,
        objective,
        equality_rows,
        inequality_rows,
        variable_bounds,
    }
}

/// Whether any scheme inside the utility bounds implements the target.
pub fn implementable(
    env: &MoralHazardEnv,
    f: &FiniteExperiment,
    target: &TargetAction,
) -> Result<bool, MoralHazardError> {
    let cs = build_constraints(env, f, target)?;
    match solve(&scheme_lp(env, &cs, false))? {
        LPResult::Optimal { .. } => Ok(true),
        LPResult::Infeasible => Ok(false),
        LPResult::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

/// Cheapest implementation of the target in expected disutility.
pub fn min_disutility(
    env: &MoralHazardEnv,
    f: &FiniteExperiment,
    target: &TargetAction,
) -> Result<DisutilityOutcome, MoralHazardError> {
    let cs = build_constraints(env, f, target)?;
    let m = f.n_signals();
    match solve(&scheme_lp(env, &cs, true))? {
        LPResult::Infeasible => Ok(DisutilityOutcome::Unimplementable),
        LPResult::Unbounded => {
            unreachable!("epigraph variables are bounded below over a boxed scheme")
        }
        LPResult::Optimal { value, point } => {
            let w: Vec<f64> = point[..m].to_vec();
            debug_assert!(
                cs.satisfied_by(&w, SCHEME_TOL),
                "optimal scheme must satisfy its constraint set"
            );
            let mut binding = BTreeSet::new();
            if cs.ir.residual(&w).abs() <= BINDING_TOL {
                binding.insert(ConstraintTag::Ir);
            }
            for (k, row) in cs.ic.iter().enumerate() {
                if row.residual(&w).abs() <= BINDING_TOL {
                    binding.insert(ConstraintTag::Ic(k));
                }
            }
            Ok(DisutilityOutcome::Attained(SchemeSolution { w, disutility: value, binding }))
        }
    }
}

/// Scheme whose statewise expected utility matches `profile`, if any.
pub fn matching_scheme(
    f: &FiniteExperiment,
    profile: &[f64],
    u_bounds: (f64, f64),
) -> Result<Option<Vec<f64>>, MoralHazardError> {
    if profile.len() != f.n_states() {
        return Err(MoralHazardError::StateMismatch);
    }
    if !(u_bounds.0.is_finite() && u_bounds.1.is_finite() && u_bounds.0 <= u_bounds.1) {
        return Err(MoralHazardError::BadEnvironment(String::from(
            "utility bounds must be finite and ordered",
        )));
    }
    let m = f.n_signals();
    let lp = LinearProgram {
        variable_count: m,
        objective: vec![0.0; m],
        equality_rows: f.matrix().iter().zip(profile).map(|(row, z)| (row.clone(), *z)).collect(),
        inequality_rows: Vec::new(),
        variable_bounds: vec![u_bounds; m],
    };
    match solve(&lp)? {
        LPResult::Optimal { point, .. } => Ok(Some(point)),
        LPResult::Infeasible => Ok(None),
        LPResult::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

// ------------------------------------------------------------------- dual

/// The concave dual objective in multipliers x = (lambda, mu...).
///
/// Each signal contributes the conjugate of the disutility profile at a
/// tilted slope; the tilt divides the deviation rows by the mixture density
/// at the target, which is why a zero density is fatal.
struct DualProgram<'a> {
    ir_rhs: f64,
    ic_rhs: Vec<f64>,
    /// ratio[k][j] = ic[k].coefficients[j] / base[j].
    ratio: Vec<Vec<f64>>,
    base: Vec<f64>,
    gamma: &'a PiecewiseLinearConvex,
    gamma_slopes: Vec<f64>,
    /// Sign box per multiplier coordinate.
    boxes: Vec<(f64, f64)>,
}

impl<'a> DualProgram<'a> {
    fn new(cs: &ConstraintSet, gamma: &'a PiecewiseLinearConvex) -> Self {
        let base = cs.ir.coefficients.clone();
        let ratio: Vec<Vec<f64>> = cs
            .ic
            .iter()
            .map(|row| row.coefficients.iter().zip(&base).map(|(r, b)| r / b).collect())
            .collect();
        let mut boxes = vec![(0.0, f64::INFINITY)];
        for row in &cs.ic {
            boxes.push(match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (f64::NEG_INFINITY, f64::INFINITY),
            });
        }
        DualProgram {
            ir_rhs: cs.ir.rhs,
            ic_rhs: cs.ic.iter().map(|row| row.rhs).collect(),
            ratio,
            base,
            gamma,
            gamma_slopes: gamma.slopes(),
            boxes,
        }
    }

    fn dim(&self) -> usize {
        self.boxes.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let lambda = x[0];
        let mut v = lambda * self.ir_rhs;
        for (mu, rhs) in x[1..].iter().zip(&self.ic_rhs) {
            v -= mu * rhs;
        }
        for (j, b) in self.base.iter().enumerate() {
            let mut t = lambda;
            for (mu, row) in x[1..].iter().zip(&self.ratio) {
                t -= mu * row[j];
            }
            v -= b * convex_conjugate(self.gamma, t);
        }
        v
    }

    /// Exact maximum of the concave piecewise-linear restriction
    /// `alpha -> value(x + alpha d)` subject to the sign boxes. Kinks sit
    /// where some signal's tilted slope crosses a slope of the profile.
    /// Returns None when the restriction increases without bound.
    fn line_max(&self, x: &[f64], d: &[f64]) -> Option<(f64, f64)> {
        let dim = self.dim();
        let mut alo = f64::NEG_INFINITY;
        let mut ahi = f64::INFINITY;
        for i in 0..dim {
            if d[i] > 0.0 {
                alo = alo.max((self.boxes[i].0 - x[i]) / d[i]);
                ahi = ahi.min((self.boxes[i].1 - x[i]) / d[i]);
            } else if d[i] < 0.0 {
                alo = alo.max((self.boxes[i].1 - x[i]) / d[i]);
                ahi = ahi.min((self.boxes[i].0 - x[i]) / d[i]);
            }
        }
        let here = self.value(x);
        if alo > ahi {
            return Some((0.0, here));
        }
        let mut cands: Vec<f64> = vec![0.0];
        if alo.is_finite() {
            cands.push(alo);
        }
        if ahi.is_finite() {
            cands.push(ahi);
        }
        for j in 0..self.base.len() {
            let mut t0 = x[0];
            let mut dt = d[0];
            for k in 0..self.ratio.len() {
                t0 -= x[k + 1] * self.ratio[k][j];
                dt -= d[k + 1] * self.ratio[k][j];
            }
            if dt.abs() <= 1e-300 {
                continue;
            }
            for s in &self.gamma_slopes {
                let a = (s - t0) / dt;
                if a.is_finite() && a > alo && a < ahi {
                    cands.push(a);
                }
            }
        }
        let shift = |a: f64| -> Vec<f64> {
            (0..dim).map(|i| x[i] + a * d[i]).collect()
        };
        let far = cands.iter().fold(0.0_f64, |acc, a| acc.max(a.abs())) + 1.0;
        if ahi.is_infinite() {
            let v1 = self.value(&shift(far));
            let v2 = self.value(&shift(far + 1.0));
            if v2 > v1 + 1e-9 + 1e-12 * v1.abs() {
                return None;
            }
        }
        if alo.is_infinite() {
            let v1 = self.value(&shift(-far));
            let v2 = self.value(&shift(-far - 1.0));
            if v2 > v1 + 1e-9 + 1e-12 * v1.abs() {
                return None;
            }
        }
        let mut best = (0.0, here);
        for a in cands {
            let v = self.value(&shift(a));
            if v > best.1 {
                best = (a, v);
            }
        }
        Some(best)
    }

    /// The maximization of `value` written as a linear program over
    /// `(multipliers, one epigraph variable per signal)`. Exact because the
    /// conjugate term is the upper envelope of one affine piece per
    /// breakpoint of the profile.
    fn epigraph_lp(&self) -> LinearProgram {
        let md = self.dim();
        let m = self.base.len();
        let vars = md + m;
        let mut objective = vec![0.0; vars];
        objective[0] = -self.ir_rhs;
        for (k, rhs) in self.ic_rhs.iter().enumerate() {
            objective[k + 1] = *rhs;
        }
        for (j, b) in self.base.iter().enumerate() {
            objective[md + j] = *b;
        }
        let mut inequality_rows = Vec::new();
        for j in 0..m {
            for (bp, val) in self.gamma.breakpoints().iter().zip(self.gamma.values()) {
                let mut row = vec![0.0; vars];
                row[0] = *bp;
                for (k, ratios) in self.ratio.iter().enumerate() {
                    row[k + 1] = -bp * ratios[j];
                }
                row[md + j] = -1.0;
                inequality_rows.push((row, *val));
            }
        }
        let mut variable_bounds = self.boxes.clone();
        variable_bounds.resize(vars, (f64::NEG_INFINITY, f64::INFINITY));
        LinearProgram {
            variable_count: vars,
            objective,
            equality_rows: Vec::new(),
            inequality_rows,
            variable_bounds,
        }
    }
}

fn check_multiplier_signs(cs: &ConstraintSet, lambda: f64, mu: &[f64]) {
    assert!(
        lambda.is_finite() && lambda >= 0.0,
        "participation multiplier must be finite and nonnegative"
    );
    for (k, (m, row)) in mu.iter().zip(&cs.ic).enumerate() {
        assert!(m.is_finite(), "deviation multiplier {k} must be finite");
        match row.sense {
            Sense::Le => assert!(*m >= 0.0, "deviation multiplier {k} must be nonnegative"),
            Sense::Ge => assert!(*m <= 0.0, "deviation multiplier {k} must be nonpositive"),
            Sense::Eq => {}
        }
    }
}

/// Value of the conjugate dual at given multipliers. Any sign-respecting
/// choice is a lower bound on [`min_disutility`]; equality is attained at
/// optimal multipliers whenever some scheme is feasible.
pub fn dual_value(
    env: &MoralHazardEnv,
    f: &FiniteExperiment,
    target: &TargetAction,
    lambda: f64,
    mu: &[f64],
) -> Result<f64, MoralHazardError> {
    let cs = build_constraints(env, f, target)?;
    if mu.len() != cs.ic.len() {
        return Err(MoralHazardError::StateMismatch);
    }
    if cs.ir.coefficients.iter().any(|b| *b <= 0.0) {
        return Err(MoralHazardError::ZeroBaseDensity);
    }
    check_multiplier_signs(&cs, lambda, mu);
    let prog = DualProgram::new(&cs, env.gamma());
    let mut x = Vec::with_capacity(1 + mu.len());
    x.push(lambda);
    x.extend_from_slice(mu);
    Ok(prog.value(&x))
}

/// Directions with small integer coordinates, used to escape kink ridges
/// where single-coordinate steps stall.
fn combo_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if dim <= 5 {
        let total = 5usize.pow(dim as u32);
        for code in 1..total {
            let mut c = code;
            let mut dir = vec![0.0; dim];
            let mut nonzero = false;
            for slot in dir.iter_mut() {
                let digit = (c % 5) as i32 - 2;
                c /= 5;
                *slot = digit as f64;
                nonzero |= digit != 0;
            }
            if nonzero {
                out.push(dir);
            }
        }
    } else {
        let fan: [(f64, f64); 12] = [
            (1.0, 1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
            (1.0, 2.0),
            (2.0, 1.0),
            (-1.0, -2.0),
            (-2.0, -1.0),
            (1.0, -2.0),
            (-2.0, 1.0),
            (2.0, -1.0),
            (-1.0, 2.0),
        ];
        for i in 0..dim {
            for j in i + 1..dim {
                for (a, b) in fan {
                    let mut dir = vec![0.0; dim];
                    dir[i] = a;
                    dir[j] = b;
                    out.push(dir);
                }
            }
        }
    }
    out
}

fn gaussian_direction(r: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut d = vec![0.0; dim];
    let mut i = 0;
    while i < dim {
        let u1: f64 = r.gen();
        let u2: f64 = r.gen();
        let radius = libm::sqrt(-2.0 * libm::log((1.0 - u1).max(1e-300)));
        let angle = 2.0 * core::f64::consts::PI * u2;
        d[i] = radius * libm::cos(angle);
        i += 1;
        if i < dim {
            d[i] = radius * libm::sin(angle);
            i += 1;
        }
    }
    d
}

/// Maximize the conjugate dual. Deterministic: multi-start coordinate
/// ascent with exact line maxima (the restriction along any direction is
/// concave piecewise-linear, so each line is solved by enumerating its
/// kinks), then a polish phase that escapes ridges along integer and seeded
/// Gaussian directions. A direction along which the objective keeps growing
/// certifies that no scheme exists, reported as an infinite value.
pub fn dual_solve(
    env: &MoralHazardEnv,
    f: &FiniteExperiment,
    target: &TargetAction,
) -> Result<DualSolution, MoralHazardError> {
    let cs = build_constraints(env, f, target)?;
    if cs.ir.coefficients.iter().any(|b| *b <= 0.0) {
        return Err(MoralHazardError::ZeroBaseDensity);
    }
    let prog = DualProgram::new(&cs, env.gamma());
    let dim = prog.dim();
    let diverged = |x: &[f64]| DualSolution {
        value: f64::INFINITY,
        lambda: x[0],
        mu: x[1..].to_vec(),
    };
    let tol_improve = |v: f64| 1e-13 * (1.0 + v.abs());

    // Start magnitudes span the scales where kinks plausibly live.
    let grid: Vec<f64> =
        (0..25).map(|i| 1e-3 * libm::pow(50_000.0, i as f64 / 24.0)).collect();
    let signed = |mag: f64, k: usize, flip: bool| match cs.ic[k].sense {
        Sense::Le => mag,
        Sense::Ge => -mag,
        Sense::Eq => {
            if flip {
                -mag
            } else {
                mag
            }
        }
    };
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    for g in &grid {
        let mut x = vec![0.0; dim];
        x[0] = *g;
        for k in 0..dim - 1 {
            x[k + 1] = signed(*g, k, false);
        }
        starts.push(x);
    }
    let mut r = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..24 {
        let mut x = vec![0.0; dim];
        for i in 0..dim {
            let zero = r.gen_bool(0.25);
            let idx = r.gen_range(0..grid.len());
            let mag = if zero { 0.0 } else { grid[idx] };
            if i == 0 {
                x[0] = mag;
            } else {
                let flip = r.gen_bool(0.5);
                x[i] = signed(mag, i - 1, flip);
            }
        }
        starts.push(x);
    }

    let mut best_x = vec![0.0; dim];
    let mut best_v = prog.value(&best_x);
    for (s, start) in starts.iter().enumerate() {
        let mut x = start.clone();
        let mut v = prog.value(&x);
        for cycle in 0..60 {
            let before = v;
            for c in 0..dim {
                // Rotate the sweep order so starts explore different ridges.
                let i = (c + s + cycle) % dim;
                let mut d = vec![0.0; dim];
                d[i] = 1.0;
                match prog.line_max(&x, &d) {
                    None => return Ok(diverged(&x)),
                    Some((a, nv)) => {
                        if nv > v {
                            x[i] += a;
                            v = nv;
                        }
                    }
                }
            }
            if v - before <= tol_improve(before) {
                break;
            }
        }
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }

    let combos = combo_directions(dim);
    for _round in 0..60 {
        let mut improved = false;
        for i in 0..dim {
            let mut d = vec![0.0; dim];
            d[i] = 1.0;
            match prog.line_max(&best_x, &d) {
                None => return Ok(diverged(&best_x)),
                Some((a, nv)) => {
                    if nv > best_v + tol_improve(best_v) {
                        best_x[i] += a;
                        best_v = nv;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            'rescue: {
                for dir in &combos {
                    match prog.line_max(&best_x, dir) {
                        None => return Ok(diverged(&best_x)),
                        Some((a, nv)) => {
                            if nv > best_v + tol_improve(best_v) {
                                for i in 0..dim {
                                    best_x[i] += a * dir[i];
                                }
                                best_v = nv;
                                improved = true;
                                break 'rescue;
                            }
                        }
                    }
                }
                for _ in 0..32 {
                    let dir = gaussian_direction(&mut r, dim);
                    match prog.line_max(&best_x, &dir) {
                        None => return Ok(diverged(&best_x)),
                        Some((a, nv)) => {
                            if nv > best_v + tol_improve(best_v) {
                                for i in 0..dim {
                                    best_x[i] += a * dir[i];
                                }
                                best_v = nv;
                                improved = true;
                                break 'rescue;
                            }
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }

    // Line search can stall on a kink ridge strictly inside the sign boxes.
    // The objective is concave piecewise-linear, so its exact supremum is
    // also the optimum of a small epigraph program; use it to certify or
    // improve the incumbent. Sign boxes pass through the program's variable
    // bounds, so the certified point stays admissible.
    match solve_lp(&prog.epigraph_lp()) {
        Ok(LPResult::Optimal { point, .. }) => {
            let v = prog.value(&point[..dim]);
            if v > best_v {
                best_v = v;
                best_x = point[..dim].to_vec();
            }
        }
        Ok(LPResult::Unbounded) => return Ok(diverged(&best_x)),
        _ => {}
    }

    Ok(DualSolution { value: best_v, lambda: best_x[0], mu: best_x[1..].to_vec() })
}

// ------------------------------------------------------------ calibration

/// Lower convex hull of a (utility, disutility) payment profile, plus the
/// utility range it spans. Payments promising (nearly) the same utility are
/// merged keeping the cheapest disutility.
pub fn build_gamma(
    payments: &[f64],
    utility: &[f64],
    disutility: &[f64],
) -> Result<(PiecewiseLinearConvex, (f64, f64)), MoralHazardError> {
    let degenerate = |msg: &str| Err(MoralHazardError::DegenerateInput(String::from(msg)));
    let count = payments.len();
    if count == 0 {
        return degenerate("empty payment profile");
    }
    if utility.len() != count || disutility.len() != count {
        return degenerate("profile lengths disagree");
    }
    if payments
        .iter()
        .chain(utility)
        .chain(disutility)
        .any(|x| !x.is_finite())
    {
        return degenerate("profile entries must be finite");
    }
    let mut pts: Vec<(f64, f64)> = utility
        .iter()
        .copied()
        .zip(disutility.iter().copied())
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(count);
    for (u, v) in pts {
        match merged.last_mut() {
            Some(last) if (u - last.0).abs() <= 1e-12 => {
                if v < last.1 {
                    last.1 = v;
                }
            }
            _ => merged.push((u, v)),
        }
    }
    let hull_error =
        |e| MoralHazardError::DegenerateInput(format!("profile hull rejected: {e}"));
    if merged.len() == 1 {
        let (u, v) = merged[0];
        let gamma = PiecewiseLinearConvex::new(vec![u], vec![v]).map_err(hull_error)?;
        return Ok((gamma, (u, u)));
    }
    // Monotone-stack lower hull; collinear middle points are dropped.
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(merged.len());
    for p in merged {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if (b.1 - a.1) * (p.0 - b.0) >= (p.1 - b.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let bounds = (hull[0].0, hull[hull.len() - 1].0);
    let gamma = PiecewiseLinearConvex::new(
        hull.iter().map(|p| p.0).collect(),
        hull.iter().map(|p| p.1).collect(),
    )
    .map_err(hull_error)?;
    Ok((gamma, bounds))
}

// -------------------------------------------------------------- separation

/// Environment and target that only the witness's favored side implements.
///
/// Given a direction `b` along which `g`'s reachable payoff profiles stick
/// out of `f`'s, pay 1 on exactly the signals of `g` whose column `b` values
/// positively: the resulting statewise profile `z` is reachable under `g`
/// but lies strictly outside everything `f` can reach. An affine cost with
/// gradient `z_i - z_0`, identity disutility on [0, 1], and the barycentric
/// target then make the deviation rows demand that exact profile, so the
/// target is implementable under `g` and not under `f`.
pub fn separating_environment(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    witness: &[f64],
) -> Result<(MoralHazardEnv, TargetAction), MoralHazardError> {
    let states = f.n_states();
    if g.n_states() != states || witness.len() != states {
        return Err(MoralHazardError::StateMismatch);
    }
    if states < 2 {
        return Err(MoralHazardError::DegenerateInput(String::from(
            "need at least two states",
        )));
    }
    if witness.iter().any(|x| !x.is_finite()) || witness.iter().all(|x| *x == 0.0) {
        return Err(MoralHazardError::DegenerateInput(String::from(
            "witness must be a nonzero finite direction",
        )));
    }
    // Reachable profile sets are centrally symmetric about the half-pay
    // profile, so both orientations expose the same separation; pick a
    // canonical one so opposite witnesses build identical environments.
    let s: f64 = witness.iter().sum();
    let flip = if s < 0.0 {
        true
    } else if s > 0.0 {
        false
    } else {
        witness.iter().find(|x| **x != 0.0).map(|x| *x < 0.0).unwrap_or(false)
    };
    let b: Vec<f64> = if flip {
        witness.iter().map(|x| -x).collect()
    } else {
        witness.to_vec()
    };
    let mut z = vec![0.0; states];
    for j in 0..g.n_signals() {
        let d: f64 = g.column(j).iter().zip(&b).map(|(c, bi)| c * bi).sum();
        if d > 0.0 {
            for (zi, row) in z.iter_mut().zip(g.matrix()) {
                *zi += row[j];
            }
        }
    }
    let n = states - 1;
    let l: Vec<f64> = (1..states).map(|i| z[i] - z[0]).collect();
    let gamma = PiecewiseLinearConvex::new(vec![0.0, 1.0], vec![0.0, 1.0])
        .map_err(|e| MoralHazardError::DegenerateInput(format!("identity profile: {e}")))?;
    let env = MoralHazardEnv::new((0.0, 1.0), vec![vec![0.0; n]; n], l, z[0], gamma)?;
    let target = TargetAction::new(vec![1.0 / states as f64; n])?;
    Ok((env, target))
}

// ---------------------------------------------------------------- spectra

/// Smallest eigenvalue of a symmetric matrix by classical Jacobi rotations.
fn min_symmetric_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let rotations = 50 * n * n + 50;
    for _ in 0..rotations {
        let mut p = 0;
        let mut q = 0;
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                if a[i][j].abs() > off {
                    off = a[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off <= 1e-13 {
            break;
        }
        let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        let t = if tau >= 0.0 {
            1.0 / (tau + libm::sqrt(1.0 + tau * tau))
        } else {
            -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
        };
        let c = 1.0 / libm::sqrt(1.0 + t * t);
        let s = t * c;
        let apq = a[p][q];
        let app = a[p][p];
        let aqq = a[q][q];
        a[p][p] = app - t * apq;
        a[q][q] = aqq + t * apq;
        a[p][q] = 0.0;
        a[q][p] = 0.0;
        for k in 0..n {
            if k != p && k != q {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[p][k] = a[k][p];
                a[k][q] = s * akp + c * akq;
                a[q][k] = a[k][q];
            }
        }
    }
    let mut min = a[0][0];
    for i in 1..n {
        if a[i][i] < min {
            min = a[i][i];
        }
    }
    min
}
