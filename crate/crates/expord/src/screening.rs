//! Screening with contractible ex post signals.
//!
//! A principal faces an agent whose private type is a belief over states.
//! After the agent reports a type, the mechanism fixes an alternative and a
//! transfer schedule; with an alternative-specific probability a signal from
//! a finite experiment realizes and the schedule pays on it, otherwise a
//! fallback transfer applies. Transfers are bounded and cost the principal a
//! convex penalty. This module prices the cheapest individually rational,
//! incentive-compatible implementation of a choice rule ([`implement_cost`],
//! randomized rules via [`implement_cost_weighted`]), evaluates report
//! deviations ([`interim_utility`]), searches deterministic rules for the
//! profit-maximizing mechanism ([`optimal_mechanism`]), and turns a failed
//! dominance witness into an environment whose rule only the dominated
//! experiment can implement ([`separating_screening`]).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::experiment::FiniteExperiment;
use crate::lborder::dichotomy_from_witness;
use crate::numerics::{solve_lp, LPResult, LinearProgram, PiecewiseLinearConvex};

/// Belief vectors and distributions may miss the simplex by this much.
const SIMPLEX_TOL: f64 = 1e-9;

/// Deterministic choice rules are enumerated up to this many candidates.
pub const ENUMERATION_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum ScreeningError {
    /// Environment data fail validation: beliefs or probabilities off the
    /// simplex, mismatched dimensions, a bent penalty, or an empty box.
    BadEnvironment(String),
    /// A type, alternative, or tensor dimension is out of range.
    IndexError,
    /// Experiment and environment disagree on the number of states.
    StateMismatch,
    /// More deterministic rules than the enumeration budget.
    EnumerationLimit,
    /// Every deterministic rule is unimplementable.
    NoFeasibleMechanism,
    /// Inputs outside the solvable class: malformed rule weights or a
    /// witness with no two-sided sign pattern.
    DegenerateInput(String),
}

impl fmt::Display for ScreeningError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScreeningError::BadEnvironment(why) => {
                write!(f, "invalid screening environment: {why}")
            }
            ScreeningError::IndexError => write!(f, "index out of range for the screening data"),
            ScreeningError::StateMismatch => {
                write!(f, "experiment and environment disagree on the state count")
            }
            ScreeningError::EnumerationLimit => {
                write!(f, "deterministic rules exceed the enumeration budget")
            }
            ScreeningError::NoFeasibleMechanism => {
                write!(f, "no deterministic choice rule is implementable")
            }
            ScreeningError::DegenerateInput(why) => write!(f, "degenerate input: {why}"),
        }
    }
}

impl core::error::Error for ScreeningError {}

/// Screening environment: belief types with a prior, alternatives with
/// observation probabilities and state-dependent payoffs for both sides, a
/// convex transfer penalty, and a transfer box.
#[derive(Clone, Debug)]
pub struct ScreeningEnv {
    types: Vec<Vec<f64>>,
    type_probs: Vec<f64>,
    psi: Vec<f64>,
    v1: Vec<Vec<f64>>,
    v2: PiecewiseLinearConvex,
    u1: Vec<Vec<f64>>,
    m_bounds: (f64, f64),
}

impl ScreeningEnv {
    /// Validates and stores an environment. `types` are beliefs over states,
    /// `type_probs` their prior; `psi[a]` is the chance a signal realizes
    /// under alternative `a`; `v1`/`u1` are the principal's and agent's
    /// state-dependent payoffs per alternative; `v2` prices a transfer;
    /// `m_bounds` is the closed transfer box.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        types: Vec<Vec<f64>>,
        type_probs: Vec<f64>,
        psi: Vec<f64>,
        v1: Vec<Vec<f64>>,
        v2: PiecewiseLinearConvex,
        u1: Vec<Vec<f64>>,
        m_bounds: (f64, f64),
    ) -> Result<Self, ScreeningError> {
        let bad = |why: String| Err(ScreeningError::BadEnvironment(why));
        if types.is_empty() {
            return bad(String::from("no belief types"));
        }
        let states = types[0].len();
        if states == 0 {
            return bad(String::from("empty state space"));
        }
        for (i, belief) in types.iter().enumerate() {
            if belief.len() != states {
                return bad(format!("belief {i} has {} states, expected {states}", belief.len()));
            }
            if !simplex(belief) {
                return bad(format!("belief {i} is not a distribution over states"));
            }
        }
        if type_probs.len() != types.len() || !simplex(&type_probs) {
            return bad(String::from("type probabilities are not a distribution"));
        }
        if psi.is_empty() {
            return bad(String::from("no alternatives"));
        }
        for p in &psi {
            if !p.is_finite() || *p < -SIMPLEX_TOL || *p > 1.0 + SIMPLEX_TOL {
                return bad(format!("observation probability {p} outside [0, 1]"));
            }
        }
        for (name, table) in [("principal", &v1), ("agent", &u1)] {
            if table.len() != psi.len() {
                return bad(format!("one {name} payoff row per alternative"));
            }
            for row in table.iter() {
                if row.len() != states || row.iter().any(|x| !x.is_finite()) {
                    return bad(format!("{name} payoffs must be finite, one per state"));
                }
            }
        }
        if !v2.is_convex() {
            return bad(String::from("transfer penalty must be convex"));
        }
        if v2.values().iter().any(|v| !v.is_finite()) || !v2.lo().is_finite() {
            return bad(String::from("transfer penalty must be finite"));
        }
        let (lo, hi) = m_bounds;
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return bad(format!("transfer box [{lo}, {hi}] is empty or unbounded"));
        }
        Ok(Self { types, type_probs, psi, v1, v2, u1, m_bounds })
    }

    pub fn n_types(&self) -> usize {
        self.types.len()
    }

    pub fn n_alternatives(&self) -> usize {
        self.psi.len()
    }

    pub fn n_states(&self) -> usize {
        self.types[0].len()
    }

    pub fn types(&self) -> &[Vec<f64>] {
        &self.types
    }

    pub fn type_probs(&self) -> &[f64] {
        &self.type_probs
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn v1(&self) -> &[Vec<f64>] {
        &self.v1
    }

    pub fn v2(&self) -> &PiecewiseLinearConvex {
        &self.v2
    }

    pub fn u1(&self) -> &[Vec<f64>] {
        &self.u1
    }

    pub fn m_bounds(&self) -> (f64, f64) {
        self.m_bounds
    }
}

/// Deterministic choice rule: one alternative per reported type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationRule {
    choice: Vec<usize>,
}

impl AllocationRule {
    pub fn new(choice: Vec<usize>) -> Self {
        Self { choice }
    }

    pub fn choice(&self) -> &[usize] {
        &self.choice
    }
}

/// Transfer tensor indexed by report, alternative, and signal; the last
/// signal slot is the fallback paid when no signal realizes.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferRule {
    entries: Vec<Vec<Vec<f64>>>,
}

impl TransferRule {
    pub fn new(entries: Vec<Vec<Vec<f64>>>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[Vec<Vec<f64>>] {
        &self.entries
    }

    /// True when every transfer sits inside the box up to `tol`.
    pub fn within_bounds(&self, bounds: (f64, f64), tol: f64) -> bool {
        self.entries
            .iter()
            .flatten()
            .flatten()
            .all(|t| *t >= bounds.0 - tol && *t <= bounds.1 + tol)
    }
}

/// Result of pricing a rule: the cheapest implementing transfers, or proof
/// that the constraint system has no solution inside the box.
#[derive(Clone, Debug, PartialEq)]
pub enum CostOutcome {
    Attained { cost: f64, transfers: TransferRule },
    Unimplementable,
}

impl CostOutcome {
    /// The cost as an extended real: infinite when unimplementable.
    pub fn value(&self) -> f64 {
        match self {
            CostOutcome::Attained { cost, .. } => *cost,
            CostOutcome::Unimplementable => f64::INFINITY,
        }
    }
}

/// Expected payoff of holding belief `true_type` while reporting
/// `reported_type`, under the given rule and transfers.
pub fn interim_utility(
    env: &ScreeningEnv,
    f: &FiniteExperiment,
    rule: &AllocationRule,
    transfers: &TransferRule,
    true_type: usize,
    reported_type: usize,
) -> Result<f64, ScreeningError> {
    check_states(env, f)?;
    check_rule(env, rule)?;
    let t_count = env.n_types();
    let k = env.n_alternatives();
    let m = f.n_signals();
    if true_type >= t_count || reported_type >= t_count {
        return Err(ScreeningError::IndexError);
    }
    let t = transfers.entries();
    if t.len() != t_count
        || t.iter().any(|per| per.len() != k || per.iter().any(|row| row.len() != m + 1))
    {
        return Err(ScreeningError::IndexError);
    }
    let a = rule.choice()[reported_type];
    let belief = &env.types()[true_type];
    let mut value = 0.0;
    for (p, u) in belief.iter().zip(env.u1()[a].iter()) {
        value += p * u;
    }
    let row = &t[reported_type][a];
    for (d, tx) in type_density(belief, f).iter().zip(row.iter()) {
        value += env.psi()[a] * d * tx;
    }
    value += (1.0 - env.psi()[a]) * row[m];
    Ok(value)
}

/// Cheapest expected transfer penalty implementing a deterministic rule,
/// subject to participation and truthful reporting.
pub fn implement_cost(
    env: &ScreeningEnv,
    f: &FiniteExperiment,
    rule: &AllocationRule,
) -> Result<CostOutcome, ScreeningError> {
    check_states(env, f)?;
    check_rule(env, rule)?;
    let k = env.n_alternatives();
    let weights: Vec<Vec<f64>> = rule
        .choice()
        .iter()
        .map(|&a| {
            let mut w = vec![0.0; k];
            w[a] = 1.0;
            w
        })
        .collect();
    solve_weighted(env, f, &weights)
}

/// [`implement_cost`] for randomized rules: `weights[i][a]` is the chance
/// report `i` receives alternative `a`.
pub fn implement_cost_weighted(
    env: &ScreeningEnv,
    f: &FiniteExperiment,
    weights: &[Vec<f64>],
) -> Result<CostOutcome, ScreeningError> {
    check_states(env, f)?;
    if weights.len() != env.n_types()
        || weights.iter().any(|row| row.len() != env.n_alternatives())
    {
        return Err(ScreeningError::IndexError);
    }
    for row in weights {
        if row.iter().any(|w| !w.is_finite() || *w < -SIMPLEX_TOL) {
            return Err(ScreeningError::DegenerateInput(String::from(
                "rule weights must be nonnegative and finite",
            )));
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(ScreeningError::DegenerateInput(String::from(
                "rule weights must sum to one per type",
            )));
        }
    }
    solve_weighted(env, f, weights)
}

/// Best deterministic mechanism: maximizes expected principal payoff minus
/// implementation cost over every choice rule, up to [`ENUMERATION_LIMIT`].
pub fn optimal_mechanism(
    env: &ScreeningEnv,
    f: &FiniteExperiment,
) -> Result<(f64, AllocationRule, TransferRule), ScreeningError> {
    optimal_mechanism_limited(env, f, ENUMERATION_LIMIT)
}

/// [`optimal_mechanism`] with an explicit enumeration budget. Ties keep the
/// lexicographically first rule (type 0 most significant).
pub fn optimal_mechanism_limited(
    env: &ScreeningEnv,
    f: &FiniteExperiment,
    limit: usize,
) -> Result<(f64, AllocationRule, TransferRule), ScreeningError> {
    check_states(env, f)?;
    let t_count = env.n_types();
    let k = env.n_alternatives();
    let mut count: usize = 1;
    for _ in 0..t_count {
        count = match count.checked_mul(k) {
            Some(c) if c <= limit => c,
            _ => return Err(ScreeningError::EnumerationLimit),
        };
    }
    let mut best: Option<(f64, AllocationRule, TransferRule)> = None;
    for idx in 0..count {
        let mut choice = vec![0usize; t_count];
        let mut rem = idx;
        for slot in choice.iter_mut().rev() {
            *slot = rem % k;
            rem /= k;
        }
        let rule = AllocationRule::new(choice);
        let (cost, transfers) = match implement_cost(env, f, &rule)? {
            CostOutcome::Attained { cost, transfers } => (cost, transfers),
            CostOutcome::Unimplementable => continue,
        };
        let mut gain = 0.0;
        for (i, belief) in env.types().iter().enumerate() {
            let alt = rule.choice()[i];
            let mut inner = 0.0;
            for (p, v) in belief.iter().zip(env.v1()[alt].iter()) {
                inner += p * v;
            }
            gain += env.type_probs()[i] * inner;
        }
        let value = gain - cost;
        if best.as_ref().map_or(true, |(bv, _, _)| value > *bv) {
            best = Some((value, rule, transfers));
        }
    }
    best.ok_or(ScreeningError::NoFeasibleMechanism)
}

// -------------------------------------------------------------- separation

/// Environment and rule that only the witness's favored side implements.
///
/// Given a direction `b` along which `g`'s reachable payoff profiles stick
/// out of `f`'s, split the states into the witness's sign classes and give
/// each class a belief type with proportional weights. Paying 1 exactly on
/// the signals of `g` whose column `b` values positively reaches, for the
/// two types, the profile `hit`; grounding the agent's payoffs at `-hit`
/// (and `-miss` for the other alternative) makes participation and truthful
/// reporting bind exactly under `g` with a flat zero penalty, while any
/// implementation under `f` would need a profile difference `f` cannot
/// reach. The rule assigns each type its own alternative.
pub fn separating_screening(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    witness: &[f64],
) -> Result<(ScreeningEnv, AllocationRule), ScreeningError> {
    let states = f.n_states();
    if g.n_states() != states || witness.len() != states {
        return Err(ScreeningError::StateMismatch);
    }
    if states < 2 {
        return Err(ScreeningError::DegenerateInput(String::from("need at least two states")));
    }
    if witness.iter().any(|x| !x.is_finite()) || witness.iter().all(|x| *x == 0.0) {
        return Err(ScreeningError::DegenerateInput(String::from(
            "witness must be a nonzero finite direction",
        )));
    }
    // Reachable profile sets are centrally symmetric, so both orientations
    // separate; pick a canonical one so opposite witnesses build identical
    // environments.
    let s: f64 = witness.iter().sum();
    let flip = if s < 0.0 {
        true
    } else if s > 0.0 {
        false
    } else {
        witness.iter().find(|x| **x != 0.0).map(|x| *x < 0.0).unwrap_or(false)
    };
    let b: Vec<f64> = if flip { witness.iter().map(|x| -x).collect() } else { witness.to_vec() };
    let split =
        dichotomy_from_witness(&b).map_err(|e| ScreeningError::DegenerateInput(format!("{e}")))?;

    let mut types = vec![vec![0.0; states]; 2];
    for (i, w) in split.omega0().iter().zip(split.w0()) {
        types[0][*i] = *w;
    }
    for (i, w) in split.omega1().iter().zip(split.w1()) {
        types[1][*i] = *w;
    }
    // Per-type mass of the signals whose `g` column the witness values
    // positively; paying 1 exactly there attains this profile under `g`.
    let mut hit = [0.0, 0.0];
    for j in 0..g.n_signals() {
        let col = g.column(j);
        let d: f64 = col.iter().zip(&b).map(|(c, bi)| c * bi).sum();
        if d > 0.0 {
            for (acc, belief) in hit.iter_mut().zip(types.iter()) {
                *acc += belief.iter().zip(col.iter()).map(|(p, c)| p * c).sum::<f64>();
            }
        }
    }
    let miss = [1.0 - hit[0], 1.0 - hit[1]];
    let side = |theta: usize| usize::from(b[theta] > 0.0);
    let u1 = vec![
        (0..states).map(|th| -miss[side(th)]).collect::<Vec<f64>>(),
        (0..states).map(|th| -hit[side(th)]).collect::<Vec<f64>>(),
    ];
    let v1 = vec![
        (0..states).map(|th| if side(th) == 0 { 1.0 } else { 0.0 }).collect::<Vec<f64>>(),
        (0..states).map(|th| if side(th) == 1 { 1.0 } else { 0.0 }).collect::<Vec<f64>>(),
    ];
    let flat =
        PiecewiseLinearConvex::new(vec![0.0, 1.0], vec![0.0, 0.0]).expect("unit interval profile");
    let env = ScreeningEnv::new(
        types,
        vec![0.5, 0.5],
        vec![1.0, 1.0],
        v1,
        flat,
        u1,
        (0.0, 1.0),
    )?;
    Ok((env, AllocationRule::new(vec![0, 1])))
}

// ------------------------------------------------------------------ internals

fn check_states(env: &ScreeningEnv, f: &FiniteExperiment) -> Result<(), ScreeningError> {
    if f.n_states() != env.n_states() {
        return Err(ScreeningError::StateMismatch);
    }
    Ok(())
}

fn check_rule(env: &ScreeningEnv, rule: &AllocationRule) -> Result<(), ScreeningError> {
    if rule.choice().len() != env.n_types()
        || rule.choice().iter().any(|&a| a >= env.n_alternatives())
    {
        return Err(ScreeningError::IndexError);
    }
    Ok(())
}

fn simplex(weights: &[f64]) -> bool {
    if weights.iter().any(|x| !x.is_finite() || *x < -SIMPLEX_TOL) {
        return false;
    }
    let total: f64 = weights.iter().sum();
    (total - 1.0).abs() <= SIMPLEX_TOL
}

/// Signal density a belief induces: the belief-mixture of the state rows.
fn type_density(belief: &[f64], f: &FiniteExperiment) -> Vec<f64> {
    let mut d = vec![0.0; f.n_signals()];
    for (p, row) in belief.iter().zip(f.matrix()) {
        for (acc, x) in d.iter_mut().zip(row.iter()) {
            *acc += p * x;
        }
    }
    d
}

/// Linear program for the cheapest implementing transfers. Transfers of
/// every report-alternative pair with positive weight are variables; the
/// convex penalty enters through one epigraph variable per transfer, so the
/// objective stays linear and the program is exact.
fn solve_weighted(
    env: &ScreeningEnv,
    f: &FiniteExperiment,
    weights: &[Vec<f64>],
) -> Result<CostOutcome, ScreeningError> {
    let t_count = env.n_types();
    let k = env.n_alternatives();
    let m = f.n_signals();
    let cols = m + 1;
    let mut pair_index: Vec<Vec<Option<usize>>> = vec![vec![None; k]; t_count];
    let mut active: Vec<(usize, usize)> = Vec::new();
    for (i, row) in weights.iter().enumerate() {
        for (a, w) in row.iter().enumerate() {
            if *w > 0.0 {
                pair_index[i][a] = Some(active.len());
                active.push((i, a));
            }
        }
    }
    let n_transfer = active.len() * cols;
    let vars = 2 * n_transfer;
    let densities: Vec<Vec<f64>> = env.types().iter().map(|b| type_density(b, f)).collect();

    // expected payoff of report j's alternatives under belief i, transfers aside
    let u1_mix = |i: usize, j: usize| -> f64 {
        let mut total = 0.0;
        for (a, w) in weights[j].iter().enumerate() {
            let mut inner = 0.0;
            for (p, u) in env.types()[i].iter().zip(env.u1()[a].iter()) {
                inner += p * u;
            }
            total += w * inner;
        }
        total
    };
    // expected-transfer coefficients of report j's schedules under belief i
    let add_transfer_terms = |row: &mut [f64], i: usize, j: usize, sign: f64| {
        for (a, w) in weights[j].iter().enumerate() {
            if *w <= 0.0 {
                continue;
            }
            let base = pair_index[j][a].expect("positive weight is active") * cols;
            for (x, d) in densities[i].iter().enumerate() {
                row[base + x] += sign * w * env.psi()[a] * d;
            }
            row[base + m] += sign * w * (1.0 - env.psi()[a]);
        }
    };

    let mut inequality_rows: Vec<(Vec<f64>, f64)> = Vec::new();
    // participation: -V(i, i) <= u1 part of V(i, i)
    for i in 0..t_count {
        let mut row = vec![0.0; vars];
        add_transfer_terms(&mut row, i, i, -1.0);
        inequality_rows.push((row, u1_mix(i, i)));
    }
    // truthful reporting: V(i, j) - V(i, i) <= 0
    for i in 0..t_count {
        for j in 0..t_count {
            if i == j {
                continue;
            }
            let mut row = vec![0.0; vars];
            add_transfer_terms(&mut row, i, i, -1.0);
            add_transfer_terms(&mut row, i, j, 1.0);
            inequality_rows.push((row, u1_mix(i, i) - u1_mix(i, j)));
        }
    }
    // penalty epigraph: z dominates every affine piece at its transfer
    let bps = env.v2().breakpoints();
    let vals = env.v2().values();
    for tvar in 0..n_transfer {
        let zvar = n_transfer + tvar;
        if bps.len() == 1 {
            let mut row = vec![0.0; vars];
            row[zvar] = -1.0;
            inequality_rows.push((row, -vals[0]));
            continue;
        }
        for seg in 0..bps.len() - 1 {
            let slope = (vals[seg + 1] - vals[seg]) / (bps[seg + 1] - bps[seg]);
            let mut row = vec![0.0; vars];
            row[tvar] = slope;
            row[zvar] = -1.0;
            inequality_rows.push((row, slope * bps[seg] - vals[seg]));
        }
    }

    let mut objective = vec![0.0; vars];
    for (p, (i, a)) in active.iter().enumerate() {
        let scale = env.type_probs()[*i] * weights[*i][*a];
        for (x, d) in densities[*i].iter().enumerate() {
            objective[n_transfer + p * cols + x] = scale * env.psi()[*a] * d;
        }
        objective[n_transfer + p * cols + m] = scale * (1.0 - env.psi()[*a]);
    }
    let (lo, hi) = env.m_bounds();
    let mut variable_bounds = vec![(lo, hi); n_transfer];
    variable_bounds.resize(vars, (f64::NEG_INFINITY, f64::INFINITY));

    let lp = LinearProgram {
        variable_count: vars,
        objective,
        equality_rows: Vec::new(),
        inequality_rows,
        variable_bounds,
    };
    match solve_lp(&lp)
        .map_err(|e| ScreeningError::DegenerateInput(format!("transfer program: {e}")))?
    {
        LPResult::Optimal { value, point } => {
            let fill = 0.0f64.clamp(lo, hi);
            let mut tensor = vec![vec![vec![fill; cols]; k]; t_count];
            for (p, (i, a)) in active.iter().enumerate() {
                tensor[*i][*a].copy_from_slice(&point[p * cols..(p + 1) * cols]);
            }
            Ok(CostOutcome::Attained { cost: value, transfers: TransferRule::new(tensor) })
        }
        LPResult::Infeasible => Ok(CostOutcome::Unimplementable),
        // transfers are boxed and the penalty epigraph floors every z
        LPResult::Unbounded => Err(ScreeningError::DegenerateInput(String::from(
            "transfer program unbounded",
        ))),
    }
}
