//! Finite decision problems: expected payoffs and values at beliefs,
//! quasi-concavity and local-single-crossing classification, binary-action
//! decomposition, and expectation-matching strategy transfer between
//! experiments.
//!
//! Beliefs are passed in reduced form: a vector over states 1..n with the
//! state-0 mass implied as one minus the sum, mirroring [`Prior`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::experiment::{FiniteExperiment, Prior};
use crate::lborder::is_quasi_monotone;
use crate::numerics::{solve_lp, LPResult, LinearProgram};

/// Optimal actions are reported as a set: payoffs within this of the
/// maximum count as tied.
const ARGMAX_TOL: f64 = 1e-12;
/// A quasi-concavity dip must clear this LP margin to count as a violation.
const QCC_TOL: f64 = 1e-9;
/// Statewise expectations match when they agree within this.
const MATCH_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum DecisionError {
    /// Payoff matrix malformed: empty, ragged, non-finite, or duplicate
    /// action names.
    BadProblem(String),
    /// Strategy rows are not probability vectors.
    BadStrategy(String),
    /// Belief has the wrong length or leaves the simplex.
    BadBelief(String),
    /// Experiment, prior, and problem disagree on the state count.
    StateMismatch,
    DimensionMismatch(String),
    /// Binary decomposition requires a quasi-concave problem.
    NotQCC,
    /// Strategy matching is defined for two-action problems only.
    NotBinary,
    /// No strategy under the first experiment reproduces the statewise
    /// expectations; cannot happen when the linear order holds.
    NoMatch,
}

impl core::fmt::Display for DecisionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DecisionError::BadProblem(msg) => write!(f, "bad decision problem: {msg}"),
            DecisionError::BadStrategy(msg) => write!(f, "bad strategy: {msg}"),
            DecisionError::BadBelief(msg) => write!(f, "bad belief: {msg}"),
            DecisionError::StateMismatch => write!(f, "state counts disagree"),
            DecisionError::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            DecisionError::NotQCC => {
                write!(f, "problem is not quasi-concave along its action order")
            }
            DecisionError::NotBinary => write!(f, "operation requires exactly two actions"),
            DecisionError::NoMatch => {
                write!(f, "no strategy matches the statewise expectations")
            }
        }
    }
}

impl core::error::Error for DecisionError {}

/// Ordered actions with a payoff row per action (columns are states).
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionProblem {
    actions: Vec<String>,
    payoff: Vec<Vec<f64>>,
}

impl DecisionProblem {
    pub fn new(actions: Vec<String>, payoff: Vec<Vec<f64>>) -> Result<Self, DecisionError> {
        if actions.is_empty() {
            return Err(DecisionError::BadProblem("need at least one action".into()));
        }
        if payoff.len() != actions.len() {
            return Err(DecisionError::BadProblem(format!(
                "{} actions but {} payoff rows",
                actions.len(),
                payoff.len()
            )));
        }
        let n_states = payoff[0].len();
        if n_states == 0 {
            return Err(DecisionError::BadProblem("payoff rows are empty".into()));
        }
        for row in &payoff {
            if row.len() != n_states {
                return Err(DecisionError::BadProblem("ragged payoff matrix".into()));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(DecisionError::BadProblem("non-finite payoff entry".into()));
            }
        }
        for (i, a) in actions.iter().enumerate() {
            if actions[..i].contains(a) {
                return Err(DecisionError::BadProblem(format!("duplicate action name {a:?}")));
            }
        }
        Ok(Self { actions, payoff })
    }

    /// Payoff rows with actions named `a0`, `a1`, ….
    pub fn from_payoff(payoff: Vec<Vec<f64>>) -> Result<Self, DecisionError> {
        let actions = (0..payoff.len()).map(|i| format!("a{i}")).collect();
        Self::new(actions, payoff)
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn payoff(&self) -> &[Vec<f64>] {
        &self.payoff
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn n_states(&self) -> usize {
        self.payoff[0].len()
    }
}

/// Signal-contingent mixed action: one probability row per signal.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    rule: Vec<Vec<f64>>,
}

impl Strategy {
    pub fn new(rule: Vec<Vec<f64>>) -> Result<Self, DecisionError> {
        if rule.is_empty() || rule[0].is_empty() {
            return Err(DecisionError::BadStrategy("empty rule".into()));
        }
        let width = rule[0].len();
        for (x, row) in rule.iter().enumerate() {
            if row.len() != width {
                return Err(DecisionError::BadStrategy("ragged rule".into()));
            }
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(DecisionError::BadStrategy(format!("negative entry in row {x}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(DecisionError::BadStrategy(format!(
                    "row {x} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { rule })
    }

    pub fn rule(&self) -> &[Vec<f64>] {
        &self.rule
    }

    pub fn n_signals(&self) -> usize {
        self.rule.len()
    }

    pub fn n_actions(&self) -> usize {
        self.rule[0].len()
    }
}

/// Validate a reduced belief and return the full vector with the implied
/// state-0 mass prepended.
fn full_belief(dp: &DecisionProblem, p: &[f64]) -> Result<Vec<f64>, DecisionError> {
    if p.len() + 1 != dp.n_states() {
        return Err(DecisionError::BadBelief(format!(
            "{} components for a problem over {} states",
            p.len(),
            dp.n_states()
        )));
    }
    if p.iter().any(|&x| x < 0.0) {
        return Err(DecisionError::BadBelief("negative component".into()));
    }
    let sum: f64 = p.iter().sum();
    if sum > 1.0 + 1e-12 {
        return Err(DecisionError::BadBelief(format!("components sum to {sum}")));
    }
    let mut full = Vec::with_capacity(dp.n_states());
    full.push((1.0 - sum).max(0.0));
    full.extend_from_slice(p);
    Ok(full)
}

/// `u(a, p) = Σ_θ p_θ u(a, θ)` at a reduced belief.
pub fn expected_payoff(
    dp: &DecisionProblem,
    action: usize,
    p: &[f64],
) -> Result<f64, DecisionError> {
    assert!(action < dp.n_actions(), "action index out of range");
    let full = full_belief(dp, p)?;
    Ok(dot(&full, &dp.payoff[action]))
}

/// Maximal expected payoff and the full set of optimal actions
/// (ties within 1e-12).
pub fn value(dp: &DecisionProblem, p: &[f64]) -> Result<(f64, Vec<usize>), DecisionError> {
    let full = full_belief(dp, p)?;
    let payoffs: Vec<f64> = dp.payoff.iter().map(|row| dot(&full, row)).collect();
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax = (0..payoffs.len()).filter(|&a| payoffs[a] >= best - ARGMAX_TOL).collect();
    Ok((best, argmax))
}

/// Expected value of the posterior value: `Σ_x Pr(x) · V(p_x)`. Signals
/// with zero marginal probability contribute nothing.
pub fn ex_ante_value(
    dp: &DecisionProblem,
    f: &FiniteExperiment,
    q: &Prior,
) -> Result<f64, DecisionError> {
    if dp.n_states() != f.n_states() || q.n_states() != f.n_states() {
        return Err(DecisionError::StateMismatch);
    }
    let prior = q.full();
    let m = f.matrix();
    let mut total = 0.0;
    for j in 0..f.n_signals() {
        let marginal: f64 = (0..f.n_states()).map(|i| prior[i] * m[i][j]).sum();
        if marginal <= 0.0 {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        for row in &dp.payoff {
            let u: f64 = (0..f.n_states()).map(|i| prior[i] * m[i][j] * row[i]).sum();
            if u > best {
                best = u;
            }
        }
        // u above is marginal-scaled, so the marginal weight is built in.
        total += best;
    }
    Ok(total)
}

/// A belief at which the middle action of the triple pays strictly less
/// than both outer actions. The belief is reduced.
#[derive(Clone, Debug, PartialEq)]
pub struct QccViolation {
    pub triple: (usize, usize, usize),
    pub belief: Vec<f64>,
}

/// Quasi-concavity along the action order: no belief may make a middle
/// action strictly worse than two actions bracketing it. Each triple
/// i < j < l is decided by an LP maximizing the dip margin
/// `m ≤ min(u(a_i,p), u(a_l,p)) − u(a_j,p)` over the belief simplex; the
/// first triple whose optimum exceeds 1e-9 yields the certificate.
pub fn is_qcc(dp: &DecisionProblem) -> (bool, Option<QccViolation>) {
    let k = dp.n_actions();
    let n = dp.n_states();
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                // Variables: full belief p (n entries), then the margin m.
                let mut objective = vec![0.0; n + 1];
                objective[n] = -1.0;
                let mut simplex_row = vec![1.0; n];
                simplex_row.push(0.0);
                let mut low = vec![0.0; n + 1];
                let mut high = vec![0.0; n + 1];
                for s in 0..n {
                    low[s] = dp.payoff[j][s] - dp.payoff[i][s];
                    high[s] = dp.payoff[j][s] - dp.payoff[l][s];
                }
                low[n] = 1.0;
                high[n] = 1.0;
                let mut variable_bounds = vec![(0.0, 1.0); n];
                variable_bounds.push((f64::NEG_INFINITY, f64::INFINITY));
                let lp = LinearProgram {
                    variable_count: n + 1,
                    objective,
                    equality_rows: vec![(simplex_row, 1.0)],
                    inequality_rows: vec![(low, 0.0), (high, 0.0)],
                    variable_bounds,
                };
                let solved = solve_lp(&lp).expect("dip program is well formed");
                let (neg_margin, point) = match solved {
                    LPResult::Optimal { value, point } => (value, point),
                    // Any simplex vertex with m = min payoff gap is feasible,
                    // and m is bounded by the finite payoffs.
                    LPResult::Infeasible | LPResult::Unbounded => {
                        unreachable!("dip program is feasible and bounded")
                    }
                };
                if -neg_margin > QCC_TOL {
                    return (
                        false,
                        Some(QccViolation { triple: (i, j, l), belief: point[1..n].to_vec() }),
                    );
                }
            }
        }
    }
    (true, None)
}

/// Local single crossing: every consecutive payoff increment
/// `u(a_i, ·) − u(a_{i−1}, ·)` is quasi-monotone across the state order.
pub fn is_lsc(dp: &DecisionProblem) -> bool {
    for i in 1..dp.n_actions() {
        let delta: Vec<f64> = dp.payoff[i]
            .iter()
            .zip(&dp.payoff[i - 1])
            .map(|(hi, lo)| hi - lo)
            .collect();
        if !is_quasi_monotone(&delta) {
            return false;
        }
    }
    true
}

/// Split a quasi-concave problem into two-action subproblems whose values
/// sum to the original value at every belief: the first keeps the payoffs
/// of actions 0 and 1, and subproblem i ≥ 1 pays 0 for `a_i` and the
/// increment `u(a_{i+1},·) − u(a_i,·)` for `a_{i+1}`.
pub fn binary_decompose(dp: &DecisionProblem) -> Result<Vec<DecisionProblem>, DecisionError> {
    if !is_qcc(dp).0 {
        return Err(DecisionError::NotQCC);
    }
    if dp.n_actions() == 1 {
        return Ok(vec![dp.clone()]);
    }
    let mut parts = Vec::with_capacity(dp.n_actions() - 1);
    parts.push(
        DecisionProblem::new(
            vec![dp.actions[0].clone(), dp.actions[1].clone()],
            vec![dp.payoff[0].clone(), dp.payoff[1].clone()],
        )
        .expect("head subproblem inherits validity"),
    );
    for i in 1..dp.n_actions() - 1 {
        let increment: Vec<f64> = dp.payoff[i + 1]
            .iter()
            .zip(&dp.payoff[i])
            .map(|(hi, lo)| hi - lo)
            .collect();
        parts.push(
            DecisionProblem::new(
                vec![dp.actions[i].clone(), dp.actions[i + 1].clone()],
                vec![vec![0.0; dp.n_states()], increment],
            )
            .expect("increment subproblem inherits validity"),
        );
    }
    Ok(parts)
}

/// Expected payoff earned in each state:
/// `z_θ = Σ_x f(x|θ) Σ_a rule(x, a) u(a, θ)`.
pub fn statewise_payoffs(
    dp: &DecisionProblem,
    f: &FiniteExperiment,
    s: &Strategy,
) -> Result<Vec<f64>, DecisionError> {
    if dp.n_states() != f.n_states() {
        return Err(DecisionError::DimensionMismatch(format!(
            "problem over {} states, experiment over {}",
            dp.n_states(),
            f.n_states()
        )));
    }
    if s.n_signals() != f.n_signals() {
        return Err(DecisionError::DimensionMismatch(format!(
            "strategy over {} signals, experiment emits {}",
            s.n_signals(),
            f.n_signals()
        )));
    }
    if s.n_actions() != dp.n_actions() {
        return Err(DecisionError::DimensionMismatch(format!(
            "strategy over {} actions, problem has {}",
            s.n_actions(),
            dp.n_actions()
        )));
    }
    let m = f.matrix();
    let mut z = vec![0.0; f.n_states()];
    for (theta, zt) in z.iter_mut().enumerate() {
        for x in 0..f.n_signals() {
            let mixed: f64 = s.rule[x]
                .iter()
                .enumerate()
                .map(|(a, w)| w * dp.payoff[a][theta])
                .sum();
            *zt += m[theta][x] * mixed;
        }
    }
    Ok(z)
}

/// Transfer a two-action strategy from G to F, reproducing the statewise
/// probability of the first action. If `s_g` itself already matches under
/// F it is returned unchanged; otherwise an LP finds signal-wise action
/// probabilities meeting the n expectation constraints. `NoMatch` is only
/// reachable when F does not dominate G in the linear order.
pub fn match_strategy(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    dp: &DecisionProblem,
    s_g: &Strategy,
) -> Result<Strategy, DecisionError> {
    if dp.n_actions() != 2 {
        return Err(DecisionError::NotBinary);
    }
    if f.states() != g.states() {
        return Err(DecisionError::StateMismatch);
    }
    if dp.n_states() != f.n_states() {
        return Err(DecisionError::DimensionMismatch(format!(
            "problem over {} states, experiments over {}",
            dp.n_states(),
            f.n_states()
        )));
    }
    if s_g.n_signals() != g.n_signals() || s_g.n_actions() != 2 {
        return Err(DecisionError::DimensionMismatch(format!(
            "strategy shape {}x{} does not fit the dominated experiment",
            s_g.n_signals(),
            s_g.n_actions()
        )));
    }
    let n = f.n_states();
    let targets: Vec<f64> = (0..n)
        .map(|theta| {
            (0..g.n_signals()).map(|y| s_g.rule[y][0] * g.matrix()[theta][y]).sum()
        })
        .collect();
    if s_g.n_signals() == f.n_signals() {
        let already = (0..n).all(|theta| {
            let reach: f64 =
                (0..f.n_signals()).map(|x| s_g.rule[x][0] * f.matrix()[theta][x]).sum();
            (reach - targets[theta]).abs() <= MATCH_TOL
        });
        if already {
            return Ok(s_g.clone());
        }
    }
    let mf = f.n_signals();
    let equality_rows: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|theta| {
            let row: Vec<f64> = (0..mf).map(|x| f.matrix()[theta][x]).collect();
            (row, targets[theta])
        })
        .collect();
    let lp = LinearProgram {
        variable_count: mf,
        objective: vec![0.0; mf],
        equality_rows,
        inequality_rows: Vec::new(),
        variable_bounds: vec![(0.0, 1.0); mf],
    };
    let solved = solve_lp(&lp).expect("matching program is well formed");
    match solved {
        LPResult::Optimal { point, .. } => {
            let rule = point
                .iter()
                .map(|&h| {
                    let h = h.clamp(0.0, 1.0);
                    vec![h, 1.0 - h]
                })
                .collect();
            Ok(Strategy::new(rule).expect("clamped rows are stochastic"))
        }
        LPResult::Infeasible => Err(DecisionError::NoMatch),
        LPResult::Unbounded => unreachable!("feasibility program has a zero objective"),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
