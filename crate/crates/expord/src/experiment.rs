//! Finite statistical experiments over a shared state space.
//!
//! An experiment assigns each state a probability distribution over a common
//! finite signal set; rows of the matrix are those distributions. This module
//! carries the data model (state spaces, experiments, priors, garbling
//! kernels, weighted dichotomies, gridded densities) and the transforms the
//! rest of the crate builds on: posteriors and likelihood ratios, products,
//! mixtures, dichotomy reductions, state relabelings, garbling application,
//! and the affine-independence test on likelihood columns.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Row sums must match 1 this closely under strict construction.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Looser row-sum tolerance accepted by the renormalizing constructors
/// (file loads, quadrature output); rows are then rescaled exactly.
pub const RENORMALIZE_TOL: f64 = 1e-6;

/// Posterior-mean atoms closer than this merge into one.
const MERGE_TOL: f64 = 1e-12;
/// Pivot threshold for the affine-independence rank computation.
const RANK_TOL: f64 = 1e-9;

/// Validation and transform failures for experiment data.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    /// A state space needs at least two states.
    TooFewStates,
    /// A state or signal name appears twice.
    DuplicateName(String),
    /// An experiment needs at least one signal.
    EmptySignalSet,
    /// A probability entry is negative (or NaN).
    NegativeEntry { row: usize, col: usize },
    /// A matrix row does not sum to 1 within tolerance.
    RowSumError { row: usize, sum: f64 },
    /// Shapes of the inputs do not line up.
    DimensionMismatch(String),
    /// Prior components are negative or sum beyond 1.
    BadPrior(String),
    /// The signal has probability zero under the prior.
    ZeroMarginal { signal: usize },
    /// The base state puts zero density on the signal.
    ZeroBaseDensity { signal: usize },
    /// The two experiments live on different state spaces.
    StateMismatch,
    /// A mixture weight outside [0, 1].
    BadWeight(f64),
    /// The dichotomy does not partition the states or its weights are off.
    BadDichotomy(String),
    /// The relabeling is not a permutation of the state indices.
    NotAPermutation,
    /// The signal grid is empty, unsorted, or carries bad weights.
    DegenerateGrid(String),
}

impl core::fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::TooFewStates => write!(f, "a state space needs at least two states"),
            Self::DuplicateName(n) => write!(f, "duplicate name {n:?}"),
            Self::EmptySignalSet => write!(f, "an experiment needs at least one signal"),
            Self::NegativeEntry { row, col } => {
                write!(f, "negative entry at row {row}, column {col}")
            }
            Self::RowSumError { row, sum } => {
                write!(f, "row {row} sums to {sum}, expected 1")
            }
            Self::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Self::BadPrior(msg) => write!(f, "invalid prior: {msg}"),
            Self::ZeroMarginal { signal } => {
                write!(f, "signal {signal} has zero probability under the prior")
            }
            Self::ZeroBaseDensity { signal } => {
                write!(f, "base state has zero density on signal {signal}")
            }
            Self::StateMismatch => {
                write!(f, "experiments are defined on different state spaces")
            }
            Self::BadWeight(t) => write!(f, "mixture weight {t} is not in [0, 1]"),
            Self::BadDichotomy(msg) => write!(f, "invalid weighted dichotomy: {msg}"),
            Self::NotAPermutation => {
                write!(f, "relabeling is not a permutation of the state indices")
            }
            Self::DegenerateGrid(msg) => write!(f, "invalid grid: {msg}"),
        }
    }
}

impl core::error::Error for ExperimentError {}

/// An ordered list of distinct state names; index 0 is the baseline state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    /// At least two distinct labels.
    pub fn new(labels: Vec<String>) -> Result<Self, ExperimentError> {
        if labels.len() < 2 {
            return Err(ExperimentError::TooFewStates);
        }
        check_distinct(&labels)?;
        Ok(Self { labels })
    }

    /// States named `s0`, `s1`, ... Panics if `count < 2`.
    pub fn indexed(count: usize) -> Self {
        assert!(count >= 2, "a state space needs at least two states");
        Self {
            labels: (0..count).map(|i| format!("s{i}")).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn check_distinct(names: &[String]) -> Result<(), ExperimentError> {
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(ExperimentError::DuplicateName(name.clone()));
        }
    }
    Ok(())
}

/// A finite experiment: one signal distribution per state.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteExperiment {
    states: StateSpace,
    signals: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl FiniteExperiment {
    /// Validates shapes, nonnegativity, and row sums (within [`ROW_SUM_TOL`]).
    pub fn new(
        states: StateSpace,
        signals: Vec<String>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self, ExperimentError> {
        let matrix = validate_matrix(&states, &signals, matrix, ROW_SUM_TOL, false)?;
        Ok(Self { states, signals, matrix })
    }

    /// Like [`FiniteExperiment::new`] but accepts row sums within
    /// [`RENORMALIZE_TOL`] of 1 and rescales each row to sum exactly to 1.
    pub fn new_renormalizing(
        states: StateSpace,
        signals: Vec<String>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self, ExperimentError> {
        let matrix = validate_matrix(&states, &signals, matrix, RENORMALIZE_TOL, true)?;
        Ok(Self { states, signals, matrix })
    }

    /// Builds from a bare matrix with states `s0..` and signals `x0..`.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self, ExperimentError> {
        let (states, signals) = default_names(&matrix)?;
        Self::new(states, signals, matrix)
    }

    /// Renormalizing variant of [`FiniteExperiment::from_matrix`].
    pub fn from_matrix_renormalizing(matrix: Vec<Vec<f64>>) -> Result<Self, ExperimentError> {
        let (states, signals) = default_names(&matrix)?;
        Self::new_renormalizing(states, signals, matrix)
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }

    /// The likelihood column of signal `j`: probabilities across states.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.matrix.iter().map(|row| row[j]).collect()
    }
}

fn default_names(matrix: &[Vec<f64>]) -> Result<(StateSpace, Vec<String>), ExperimentError> {
    if matrix.len() < 2 {
        return Err(ExperimentError::TooFewStates);
    }
    let states = StateSpace::indexed(matrix.len());
    let signals = (0..matrix[0].len()).map(|j| format!("x{j}")).collect();
    Ok((states, signals))
}

fn validate_matrix(
    states: &StateSpace,
    signals: &[String],
    mut matrix: Vec<Vec<f64>>,
    row_sum_tol: f64,
    renormalize: bool,
) -> Result<Vec<Vec<f64>>, ExperimentError> {
    if signals.is_empty() {
        return Err(ExperimentError::EmptySignalSet);
    }
    check_distinct(signals)?;
    if matrix.len() != states.len() {
        return Err(ExperimentError::DimensionMismatch(format!(
            "{} matrix rows for {} states",
            matrix.len(),
            states.len()
        )));
    }
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != signals.len() {
            return Err(ExperimentError::DimensionMismatch(format!(
                "row {i} has {} entries for {} signals",
                row.len(),
                signals.len()
            )));
        }
        for (j, &x) in row.iter().enumerate() {
            if !(x >= 0.0) {
                return Err(ExperimentError::NegativeEntry { row: i, col: j });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > row_sum_tol {
            return Err(ExperimentError::RowSumError { row: i, sum });
        }
    }
    if renormalize {
        for row in &mut matrix {
            let sum: f64 = row.iter().sum();
            for x in row {
                *x /= sum;
            }
        }
    }
    Ok(matrix)
}

/// A prior over the states, stored as the probabilities of states `1..=n`;
/// the baseline state carries the remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    q: Vec<f64>,
}

impl Prior {
    /// Components must be nonnegative and sum to at most 1.
    pub fn new(q: Vec<f64>) -> Result<Self, ExperimentError> {
        for &x in &q {
            if !(x >= 0.0) {
                return Err(ExperimentError::BadPrior(format!("component {x} is negative")));
            }
        }
        let sum: f64 = q.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(ExperimentError::BadPrior(format!(
                "components sum to {sum}, leaving the baseline state negative mass"
            )));
        }
        Ok(Self { q })
    }

    /// The uniform prior over `n_states` states. Panics if `n_states < 2`.
    pub fn uniform(n_states: usize) -> Self {
        assert!(n_states >= 2, "a prior needs at least two states");
        Self {
            q: vec![1.0 / n_states as f64; n_states - 1],
        }
    }

    /// Probabilities of states `1..=n`.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Probability of the baseline state.
    pub fn q0(&self) -> f64 {
        let rest: f64 = self.q.iter().sum();
        (1.0 - rest).max(0.0)
    }

    /// All state probabilities, baseline first.
    pub fn full(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.q.len() + 1);
        out.push(self.q0());
        out.extend_from_slice(&self.q);
        out
    }

    pub fn n_states(&self) -> usize {
        self.q.len() + 1
    }
}

/// The posterior over states `1..=n` after observing signal `j` under prior
/// `q`; the baseline component is the complement.
pub fn posterior(
    f: &FiniteExperiment,
    q: &Prior,
    j: usize,
) -> Result<Vec<f64>, ExperimentError> {
    check_prior_and_signal(f, q, j)?;
    let full = q.full();
    let marginal: f64 = (0..f.n_states()).map(|i| full[i] * f.matrix[i][j]).sum();
    if marginal <= 0.0 {
        return Err(ExperimentError::ZeroMarginal { signal: j });
    }
    Ok((1..f.n_states()).map(|i| full[i] * f.matrix[i][j] / marginal).collect())
}

fn check_prior_and_signal(
    f: &FiniteExperiment,
    q: &Prior,
    j: usize,
) -> Result<(), ExperimentError> {
    if q.n_states() != f.n_states() {
        return Err(ExperimentError::DimensionMismatch(format!(
            "prior over {} states for an experiment with {}",
            q.n_states(),
            f.n_states()
        )));
    }
    if j >= f.n_signals() {
        return Err(ExperimentError::DimensionMismatch(format!(
            "signal index {j} out of range for {} signals",
            f.n_signals()
        )));
    }
    Ok(())
}

/// Per-signal likelihood ratios against the `base` state: entry `j` lists
/// `matrix(i, j) / matrix(base, j)` over states `i != base` in index order.
pub fn likelihood_ratios(
    f: &FiniteExperiment,
    base: usize,
) -> Result<Vec<Vec<f64>>, ExperimentError> {
    if base >= f.n_states() {
        return Err(ExperimentError::DimensionMismatch(format!(
            "base state {base} out of range for {} states",
            f.n_states()
        )));
    }
    for j in 0..f.n_signals() {
        if f.matrix[base][j] <= 0.0 {
            return Err(ExperimentError::ZeroBaseDensity { signal: j });
        }
    }
    Ok((0..f.n_signals())
        .map(|j| {
            (0..f.n_states())
                .filter(|&i| i != base)
                .map(|i| f.matrix[i][j] / f.matrix[base][j])
                .collect()
        })
        .collect())
}

/// The distribution of the posterior expectation of `phi` (one value per
/// state) under prior `q`: sorted `(value, probability)` atoms, with values
/// closer than 1e-12 merged. Signals of prior probability zero drop out.
///
/// Panics if `phi` or `q` do not match the experiment's state count.
pub fn posterior_mean_distribution(
    f: &FiniteExperiment,
    q: &Prior,
    phi: &[f64],
) -> Vec<(f64, f64)> {
    assert_eq!(phi.len(), f.n_states(), "one value per state");
    assert_eq!(q.n_states(), f.n_states(), "prior over the same states");
    let full = q.full();
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for j in 0..f.n_signals() {
        let marginal: f64 = (0..f.n_states()).map(|i| full[i] * f.matrix[i][j]).sum();
        if marginal <= 0.0 {
            continue;
        }
        let mean: f64 = (0..f.n_states())
            .map(|i| full[i] * f.matrix[i][j] * phi[i])
            .sum::<f64>()
            / marginal;
        atoms.push((mean, marginal));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (value, prob) in atoms {
        match merged.last_mut() {
            Some(last) if (value - last.0).abs() < MERGE_TOL => last.1 += prob,
            _ => merged.push((value, prob)),
        }
    }
    merged
}

/// Two conditionally independent observations: signals are ordered pairs,
/// probabilities multiply within each state.
pub fn product(
    f1: &FiniteExperiment,
    f2: &FiniteExperiment,
) -> Result<FiniteExperiment, ExperimentError> {
    if f1.states != f2.states {
        return Err(ExperimentError::StateMismatch);
    }
    let signals = dedupe_names(
        f1.signals
            .iter()
            .flat_map(|a| f2.signals.iter().map(move |b| format!("({a},{b})")))
            .collect(),
    );
    let matrix = f1
        .matrix
        .iter()
        .zip(&f2.matrix)
        .map(|(r1, r2)| r1.iter().flat_map(|&a| r2.iter().map(move |&b| a * b)).collect())
        .collect();
    FiniteExperiment::new(f1.states.clone(), signals, matrix)
}

/// Observe a signal from `f1` with probability `t`, else from `f2`. The
/// signal set is the disjoint union (colliding names gain an apostrophe).
pub fn mixture(
    f1: &FiniteExperiment,
    f2: &FiniteExperiment,
    t: f64,
) -> Result<FiniteExperiment, ExperimentError> {
    if f1.states != f2.states {
        return Err(ExperimentError::StateMismatch);
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(ExperimentError::BadWeight(t));
    }
    let signals =
        dedupe_names(f1.signals.iter().chain(&f2.signals).cloned().collect());
    let matrix = f1
        .matrix
        .iter()
        .zip(&f2.matrix)
        .map(|(r1, r2)| {
            r1.iter()
                .map(|&x| t * x)
                .chain(r2.iter().map(|&x| (1.0 - t) * x))
                .collect()
        })
        .collect();
    FiniteExperiment::new(f1.states.clone(), signals, matrix)
}

fn dedupe_names(names: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(names.len());
    for mut name in names {
        while out.contains(&name) {
            name.push('\'');
        }
        out.push(name);
    }
    out
}

/// A partition of the states into two nonempty events, each carrying a
/// probability-weight vector over its members.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDichotomy {
    omega0: Vec<usize>,
    omega1: Vec<usize>,
    w0: Vec<f64>,
    w1: Vec<f64>,
    n_states: usize,
}

impl WeightedDichotomy {
    /// `omega0` and `omega1` must partition `0..n_states` and each weight
    /// vector must be nonnegative and sum to 1 within 1e-9.
    pub fn new(
        omega0: Vec<usize>,
        omega1: Vec<usize>,
        w0: Vec<f64>,
        w1: Vec<f64>,
        n_states: usize,
    ) -> Result<Self, ExperimentError> {
        if omega0.is_empty() || omega1.is_empty() {
            return Err(ExperimentError::BadDichotomy(
                "both events must be nonempty".into(),
            ));
        }
        if w0.len() != omega0.len() || w1.len() != omega1.len() {
            return Err(ExperimentError::BadDichotomy(
                "one weight per member state".into(),
            ));
        }
        let mut seen = vec![false; n_states];
        for &i in omega0.iter().chain(&omega1) {
            if i >= n_states || seen[i] {
                return Err(ExperimentError::BadDichotomy(format!(
                    "state {i} repeated or out of range"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(ExperimentError::BadDichotomy(
                "events do not cover all states".into(),
            ));
        }
        for w in [&w0, &w1] {
            if w.iter().any(|&x| !(x >= 0.0)) {
                return Err(ExperimentError::BadDichotomy("negative weight".into()));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ExperimentError::BadDichotomy(format!(
                    "weights sum to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { omega0, omega1, w0, w1, n_states })
    }

    pub fn omega0(&self) -> &[usize] {
        &self.omega0
    }

    pub fn omega1(&self) -> &[usize] {
        &self.omega1
    }

    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }
}

/// Collapses the experiment to the two events of a weighted dichotomy: each
/// output row is the weight-mixture of the member states' rows.
pub fn dichotomy_reduce(
    f: &FiniteExperiment,
    d: &WeightedDichotomy,
) -> Result<FiniteExperiment, ExperimentError> {
    if d.n_states != f.n_states() {
        return Err(ExperimentError::BadDichotomy(format!(
            "dichotomy over {} states for an experiment with {}",
            d.n_states,
            f.n_states()
        )));
    }
    let mix_rows = |members: &[usize], weights: &[f64]| -> Vec<f64> {
        let mut row = vec![0.0; f.n_signals()];
        for (&i, &w) in members.iter().zip(weights) {
            for (acc, &x) in row.iter_mut().zip(&f.matrix[i]) {
                *acc += w * x;
            }
        }
        row
    };
    let matrix = vec![mix_rows(&d.omega0, &d.w0), mix_rows(&d.omega1, &d.w1)];
    let states = StateSpace::new(vec!["omega0".into(), "omega1".into()])
        .expect("two distinct labels");
    FiniteExperiment::new(states, f.signals.clone(), matrix)
}

/// Permutes the state rows: row `i` of the result is row `beta[i]` of the
/// input. Labels keep their positions.
pub fn relabel(
    f: &FiniteExperiment,
    beta: &[usize],
) -> Result<FiniteExperiment, ExperimentError> {
    if beta.len() != f.n_states() {
        return Err(ExperimentError::NotAPermutation);
    }
    let mut seen = vec![false; beta.len()];
    for &b in beta {
        if b >= beta.len() || seen[b] {
            return Err(ExperimentError::NotAPermutation);
        }
        seen[b] = true;
    }
    let matrix = beta.iter().map(|&b| f.matrix[b].clone()).collect();
    FiniteExperiment::new(f.states.clone(), f.signals.clone(), matrix)
}

/// A stochastic kernel from source signals to target signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Garbling {
    kernel: Vec<Vec<f64>>,
}

impl Garbling {
    /// Entries must be nonnegative and rows must sum to 1 within 1e-9.
    pub fn new(kernel: Vec<Vec<f64>>) -> Result<Self, ExperimentError> {
        if kernel.is_empty() || kernel[0].is_empty() {
            return Err(ExperimentError::EmptySignalSet);
        }
        let cols = kernel[0].len();
        for (i, row) in kernel.iter().enumerate() {
            if row.len() != cols {
                return Err(ExperimentError::DimensionMismatch(format!(
                    "kernel row {i} has {} entries, row 0 has {cols}",
                    row.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                if !(x >= 0.0) {
                    return Err(ExperimentError::NegativeEntry { row: i, col: j });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ExperimentError::RowSumError { row: i, sum });
            }
        }
        Ok(Self { kernel })
    }

    /// The kernel that keeps each of `k` signals as it is.
    pub fn identity(k: usize) -> Self {
        let kernel = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { kernel }
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    /// Number of source signals (rows).
    pub fn source_count(&self) -> usize {
        self.kernel.len()
    }

    /// Number of target signals (columns).
    pub fn target_count(&self) -> usize {
        self.kernel[0].len()
    }

    /// The kernel of garbling by `self` and then by `other`.
    pub fn compose(&self, other: &Garbling) -> Result<Garbling, ExperimentError> {
        if self.target_count() != other.source_count() {
            return Err(ExperimentError::DimensionMismatch(format!(
                "{} intermediate signals feed a kernel with {} rows",
                self.target_count(),
                other.source_count()
            )));
        }
        let kernel = self
            .kernel
            .iter()
            .map(|row| {
                (0..other.target_count())
                    .map(|j| row.iter().zip(&other.kernel).map(|(&a, krow)| a * krow[j]).sum())
                    .collect()
            })
            .collect();
        Garbling::new(kernel)
    }
}

/// Passes each signal of `f` through the kernel: the result matrix is the
/// matrix product, with target signals named `y0`, `y1`, ...
pub fn apply_garbling(
    f: &FiniteExperiment,
    k: &Garbling,
) -> Result<FiniteExperiment, ExperimentError> {
    if k.source_count() != f.n_signals() {
        return Err(ExperimentError::DimensionMismatch(format!(
            "kernel with {} source signals applied to an experiment with {}",
            k.source_count(),
            f.n_signals()
        )));
    }
    let matrix = f
        .matrix
        .iter()
        .map(|row| {
            (0..k.target_count())
                .map(|j| row.iter().zip(&k.kernel).map(|(&a, krow)| a * krow[j]).sum())
                .collect()
        })
        .collect();
    let signals = (0..k.target_count()).map(|j| format!("y{j}")).collect();
    FiniteExperiment::new(f.states.clone(), signals, matrix)
}

/// True iff the likelihood columns are affinely independent, i.e. the
/// columns centered on the first have rank `n_signals - 1`.
pub fn is_irredundant(f: &FiniteExperiment) -> bool {
    let m = f.n_signals();
    if m == 1 {
        return true;
    }
    if m - 1 > f.n_states() {
        return false;
    }
    let first = f.column(0);
    let centered: Vec<Vec<f64>> = (0..f.n_states())
        .map(|i| (1..m).map(|j| f.matrix[i][j] - first[i]).collect())
        .collect();
    rank(centered, RANK_TOL) == m - 1
}

/// Rank by row echelon with partial pivoting; entries below `tol` in
/// magnitude count as zero.
fn rank(mut a: Vec<Vec<f64>>, tol: f64) -> usize {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut best = r;
        for i in r + 1..rows {
            if a[i][c].abs() > a[best][c].abs() {
                best = i;
            }
        }
        if a[best][c].abs() <= tol {
            continue;
        }
        a.swap(r, best);
        for i in r + 1..rows {
            let factor = a[i][c] / a[r][c];
            for k in c..cols {
                a[i][k] -= factor * a[r][k];
            }
        }
        r += 1;
    }
    r
}

/// A density experiment sampled on a signal grid with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GridExperiment {
    states: StateSpace,
    grid: Vec<f64>,
    densities: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl GridExperiment {
    /// The grid must be strictly increasing, weights positive, densities
    /// nonnegative, and each state's quadrature must total 1 within 1e-6.
    pub fn new(
        states: StateSpace,
        grid: Vec<f64>,
        densities: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self, ExperimentError> {
        if grid.is_empty() {
            return Err(ExperimentError::DegenerateGrid("empty grid".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ExperimentError::DegenerateGrid(
                "grid points must be strictly increasing".into(),
            ));
        }
        if weights.len() != grid.len() {
            return Err(ExperimentError::DegenerateGrid(format!(
                "{} weights for {} grid points",
                weights.len(),
                grid.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(ExperimentError::DegenerateGrid(
                "quadrature weights must be positive".into(),
            ));
        }
        if densities.len() != states.len() {
            return Err(ExperimentError::DimensionMismatch(format!(
                "{} density rows for {} states",
                densities.len(),
                states.len()
            )));
        }
        for (i, row) in densities.iter().enumerate() {
            if row.len() != grid.len() {
                return Err(ExperimentError::DimensionMismatch(format!(
                    "density row {i} has {} entries for {} grid points",
                    row.len(),
                    grid.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                if !(x >= 0.0) {
                    return Err(ExperimentError::NegativeEntry { row: i, col: j });
                }
            }
            let total: f64 = row.iter().zip(&weights).map(|(&d, &w)| d * w).sum();
            if (total - 1.0).abs() > RENORMALIZE_TOL {
                return Err(ExperimentError::RowSumError { row: i, sum: total });
            }
        }
        Ok(Self { states, grid, densities, weights })
    }

    /// Quadrature weights from the trapezoid rule on the grid spacing.
    pub fn with_trapezoid_weights(
        states: StateSpace,
        grid: Vec<f64>,
        densities: Vec<Vec<f64>>,
    ) -> Result<Self, ExperimentError> {
        if grid.len() < 2 {
            return Err(ExperimentError::DegenerateGrid(
                "trapezoid weights need at least two grid points".into(),
            ));
        }
        let last = grid.len() - 1;
        let weights = (0..grid.len())
            .map(|j| {
                if j == 0 {
                    (grid[1] - grid[0]) / 2.0
                } else if j == last {
                    (grid[last] - grid[last - 1]) / 2.0
                } else {
                    (grid[j + 1] - grid[j - 1]) / 2.0
                }
            })
            .collect();
        Self::new(states, grid, densities, weights)
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn densities(&self) -> &[Vec<f64>] {
        &self.densities
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Turns a gridded density into a finite experiment: cell `j` in state `i`
/// gets probability `density(i,j) * weight(j)`, renormalized per row.
/// Signals are named `x0`, `x1`, ... after the grid cells.
pub fn discretize(g: &GridExperiment) -> FiniteExperiment {
    let matrix = g
        .densities
        .iter()
        .map(|row| row.iter().zip(&g.weights).map(|(&d, &w)| d * w).collect())
        .collect();
    let signals = (0..g.grid.len()).map(|j| format!("x{j}")).collect();
    FiniteExperiment::new_renormalizing(g.states.clone(), signals, matrix)
        .expect("grid invariants guarantee rows within renormalization tolerance")
}
