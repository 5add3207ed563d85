//! Informativeness orders on finite experiments.
//!
//! For a direction `b` the zonoid support of an experiment is
//! `h(b) = Σ_j (b · col_j)₊`. The support difference
//! `ξ(b) = h_F(b) − h_G(b)` decides the linear order: F dominates G
//! exactly when ξ ≥ 0 everywhere. ξ is piecewise linear, positively
//! homogeneous, and sign-symmetric (`ξ(−b) = ξ(b)`, because the columns
//! of a channel sum to the all-ones vector), so nonnegativity on a finite
//! set of extreme rays settles the global question.
//!
//! [`lb_exact`] enumerates those rays: ξ is linear on the cones cut out by
//! the hyperplanes `{b · col = 0}`, and augmenting the normal list with the
//! coordinate basis splits every cone into pointed pieces whose extreme
//! rays are null vectors of (dim−1)-subsets of the normals. [`mpe_check`]
//! restricts the same survey to quasi-monotone directions, and
//! [`lb_via_relabelings`] closes that restriction over state permutations.
//! [`blackwell_check`] instead solves the garbling feasibility program
//! directly. [`lb_sampled`] is a randomized fallback for instances beyond
//! the exact enumeration's size limits.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiment::{relabel, FiniteExperiment, Garbling, WeightedDichotomy};
use crate::numerics::{solve_lp, LPResult, LinearProgram};

/// A direction in state space, one coordinate per state.
pub type Direction = Vec<f64>;

/// Margins above this (signed) threshold count as dominance.
pub const HOLD_TOL: f64 = 1e-9;
/// Entrywise deviation below which a candidate kernel counts as a garbling.
pub const GARBLING_TOL: f64 = 1e-8;

/// Components below this are treated as exact zeros when canonicalizing
/// rays and reading sign patterns.
const ZERO_TOL: f64 = 1e-12;
/// Pivot threshold inside null-space elimination; normals are unit vectors,
/// so an absolute cutoff is safe.
const NULL_TOL: f64 = 1e-10;
/// Two candidate margins within this band count as tied; ties break toward
/// the lexicographically smallest witness so reruns are reproducible.
const TIE_BAND: f64 = 1e-12;

/// Which procedure produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Exhaustive survey of the extreme rays of the linearity cones.
    ExactRays,
    /// Random unit directions plus local descent; sound on failure only.
    SampledHemisphere,
    /// Minimum-deviation garbling program.
    GarblingLP,
}

/// Outcome of an order check.
///
/// `margin` is the smallest support difference found; `holds` means it
/// cleared `-HOLD_TOL`. A failing verdict always carries a `witness`
/// direction at which the margin is attained, so
/// `support_diff(f, g, witness) == margin` re-certifies the failure.
/// Verdicts from [`blackwell_check`] report `margin` as minus the best
/// achievable kernel deviation and never carry a witness.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderVerdict {
    pub holds: bool,
    pub witness: Option<Direction>,
    pub margin: f64,
    pub method: Method,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrderError {
    /// The two experiments live on different state spaces.
    StateMismatch,
    /// Instance exceeds the exact survey's size limits; the message names
    /// the violated limit. Use [`lb_sampled`] or raise [`RayLimits`].
    DimensionLimitExceeded(String),
    /// Exhaustive relabeling is capped at 7 states.
    TooManyStates,
    /// The witness has entries of one sign only, so it induces no
    /// two-event reduction.
    OneSignedWitness,
}

impl core::fmt::Display for OrderError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OrderError::StateMismatch => {
                write!(f, "experiments are defined on different state spaces")
            }
            OrderError::DimensionLimitExceeded(msg) => {
                write!(f, "dimension limit exceeded: {msg}")
            }
            OrderError::TooManyStates => {
                write!(f, "exhaustive relabeling supports at most 7 states")
            }
            OrderError::OneSignedWitness => {
                write!(f, "witness entries share one sign; no dichotomy exists")
            }
        }
    }
}

impl core::error::Error for OrderError {}

/// Size caps for the exact ray survey. The subset count grows as
/// C(signals + states, states − 1), so both knobs matter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayLimits {
    /// Cap on `f.n_signals() + g.n_signals()`.
    pub max_combined_signals: usize,
    /// Cap on the shared state count.
    pub max_states: usize,
}

impl Default for RayLimits {
    fn default() -> Self {
        RayLimits { max_combined_signals: 64, max_states: 6 }
    }
}

/// Support function of the experiment's column zonoid:
/// `Σ_j max(b · col_j, 0)`.
///
/// Panics if `b` is not one coordinate per state.
pub fn zonoid_support(f: &FiniteExperiment, b: &[f64]) -> f64 {
    assert_eq!(b.len(), f.n_states(), "direction needs one coordinate per state");
    let m = f.matrix();
    let mut total = 0.0;
    for j in 0..f.n_signals() {
        let mut dot = 0.0;
        for (bi, row) in b.iter().zip(m) {
            dot += bi * row[j];
        }
        if dot > 0.0 {
            total += dot;
        }
    }
    total
}

/// `ξ(b) = zonoid_support(f, b) − zonoid_support(g, b)`.
pub fn support_diff(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    b: &[f64],
) -> Result<f64, OrderError> {
    check_states(f, g)?;
    Ok(xi_at(f, g, b))
}

/// Exact linear-order check with default [`RayLimits`].
pub fn lb_exact(f: &FiniteExperiment, g: &FiniteExperiment) -> Result<OrderVerdict, OrderError> {
    lb_exact_with_limits(f, g, &RayLimits::default())
}

/// Exact linear-order check: ξ is minimized over the extreme rays of its
/// linearity cones. Dominance holds iff the minimum clears `-HOLD_TOL`;
/// a failing verdict carries the minimizing unit ray.
pub fn lb_exact_with_limits(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    limits: &RayLimits,
) -> Result<OrderVerdict, OrderError> {
    check_states(f, g)?;
    let rays = ray_survey(f, g, limits)?;
    let mut best: Option<(f64, Direction)> = None;
    for ray in rays {
        let value = xi_at(f, g, &ray);
        consider(&mut best, value, ray);
    }
    let (margin, ray) = best.expect("coordinate rays always survive");
    Ok(finish_verdict(margin, ray, Method::ExactRays))
}

/// Monotone-order check with default [`RayLimits`].
pub fn mpe_check(f: &FiniteExperiment, g: &FiniteExperiment) -> Result<OrderVerdict, OrderError> {
    mpe_check_with_limits(f, g, &RayLimits::default())
}

/// Monotone-order check: the same ray survey as [`lb_exact_with_limits`],
/// restricted to rays with a quasi-monotone representative (states carry
/// the order in which they are listed). The witness is always reported in
/// its quasi-monotone form.
pub fn mpe_check_with_limits(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    limits: &RayLimits,
) -> Result<OrderVerdict, OrderError> {
    check_states(f, g)?;
    let rays = ray_survey(f, g, limits)?;
    let mut best: Option<(f64, Direction)> = None;
    for ray in rays {
        if let Some(rep) = quasi_monotone_rep(&ray) {
            let value = xi_at(f, g, &rep);
            consider(&mut best, value, rep);
        }
    }
    // Coordinate rays are nonnegative, hence quasi-monotone: never empty.
    let (margin, ray) = best.expect("coordinate rays are quasi-monotone");
    Ok(finish_verdict(margin, ray, Method::ExactRays))
}

/// No strictly positive entry may precede a strictly negative one. Signs
/// are read strictly; callers who want a zero tolerance must zero small
/// entries themselves.
pub fn is_quasi_monotone(b: &[f64]) -> bool {
    let mut seen_positive = false;
    for &x in b {
        if x > 0.0 {
            seen_positive = true;
        } else if x < 0.0 && seen_positive {
            return false;
        }
    }
    true
}

/// Linear order via the monotone order: F dominates G iff the monotone
/// check passes for every joint relabeling of the states. Permutations are
/// tried in lexicographic order and the first failure is returned, with
/// the witness mapped back to the original state coordinates.
pub fn lb_via_relabelings(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
) -> Result<OrderVerdict, OrderError> {
    check_states(f, g)?;
    let n = f.n_states();
    if n > 7 {
        return Err(OrderError::TooManyStates);
    }
    // The relabeling route exists precisely to reach 7 states, so the
    // inner monotone checks run with the state cap raised accordingly.
    let limits = RayLimits { max_states: 7, ..RayLimits::default() };
    let mut worst = f64::INFINITY;
    for beta in (0..n).permutations(n) {
        let fr = relabel(f, &beta).expect("generated permutations are valid");
        let gr = relabel(g, &beta).expect("generated permutations are valid");
        let v = mpe_check_with_limits(&fr, &gr, &limits)?;
        if !v.holds {
            // Row i of the relabeled pair is original state beta[i], so the
            // witness pulls back along beta and certifies the original pair.
            let w = v.witness.expect("failing monotone verdict carries a witness");
            let mut original = vec![0.0; n];
            for (i, &s) in beta.iter().enumerate() {
                original[s] = w[i];
            }
            return Ok(OrderVerdict {
                holds: false,
                witness: Some(original),
                margin: v.margin,
                method: Method::ExactRays,
            });
        }
        if v.margin < worst {
            worst = v.margin;
        }
    }
    Ok(OrderVerdict { holds: true, witness: None, margin: worst, method: Method::ExactRays })
}

/// Randomized linear-order check: `resolution` Gaussian unit directions,
/// then local descent from the 16 worst. Failures are certified by the
/// returned witness; a passing verdict is evidence, not proof.
pub fn lb_sampled(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    resolution: usize,
    seed: u64,
) -> Result<OrderVerdict, OrderError> {
    check_states(f, g)?;
    let dim = f.n_states();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scored: Vec<(f64, Direction)> = Vec::with_capacity(resolution + dim);
    // Coordinate directions keep the result defined at resolution 0.
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let value = xi_at(f, g, &e);
        scored.push((value, e));
    }
    for _ in 0..resolution {
        let b = random_unit_direction(&mut rng, dim);
        let value = xi_at(f, g, &b);
        scored.push((value, b));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.truncate(16);

    let mut best: Option<(f64, Direction)> = None;
    for (value, start) in scored {
        let (_, b) = descend(f, g, start, value);
        // Reevaluate at the canonical representative so the stored margin
        // matches support_diff at the reported witness bit for bit.
        let canonical = canonical_unit(&b).unwrap_or(b);
        let v = xi_at(f, g, &canonical);
        consider(&mut best, v, canonical);
    }
    let (margin, ray) = best.expect("coordinate directions are always scored");
    Ok(finish_verdict(margin, ray, Method::SampledHemisphere))
}

/// Garbling feasibility: minimize the worst entrywise deviation
/// `|M_F K − M_G|` over row-stochastic kernels K. Dominance holds iff the
/// optimum is below `tol`; the kernel is returned as evidence. Margin is
/// minus the optimal deviation and there is never a witness direction.
pub fn blackwell_check(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
) -> Result<(OrderVerdict, Option<Garbling>), OrderError> {
    blackwell_check_tol(f, g, GARBLING_TOL)
}

/// [`blackwell_check`] with a caller-chosen deviation tolerance.
pub fn blackwell_check_tol(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    tol: f64,
) -> Result<(OrderVerdict, Option<Garbling>), OrderError> {
    check_states(f, g)?;
    let n = f.n_states();
    let mf = f.n_signals();
    let mg = g.n_signals();
    // Variables: kernel entries row-major, then the deviation bound t.
    let nk = mf * mg;
    let tvar = nk;
    let mut equality_rows = Vec::with_capacity(mf);
    for j in 0..mf {
        let mut row = vec![0.0; nk + 1];
        for k in 0..mg {
            row[j * mg + k] = 1.0;
        }
        equality_rows.push((row, 1.0));
    }
    let mut inequality_rows = Vec::with_capacity(2 * n * mg);
    for i in 0..n {
        for k in 0..mg {
            let mut upper = vec![0.0; nk + 1];
            let mut lower = vec![0.0; nk + 1];
            for j in 0..mf {
                upper[j * mg + k] = f.matrix()[i][j];
                lower[j * mg + k] = -f.matrix()[i][j];
            }
            upper[tvar] = -1.0;
            lower[tvar] = -1.0;
            inequality_rows.push((upper, g.matrix()[i][k]));
            inequality_rows.push((lower, -g.matrix()[i][k]));
        }
    }
    let mut objective = vec![0.0; nk + 1];
    objective[tvar] = 1.0;
    let mut variable_bounds = vec![(0.0, 1.0); nk];
    // Row-stochastic columns keep every deviation within 2.
    variable_bounds.push((0.0, 2.0));
    let lp = LinearProgram {
        variable_count: nk + 1,
        objective,
        equality_rows,
        inequality_rows,
        variable_bounds,
    };
    let solved = solve_lp(&lp).expect("garbling program is well formed");
    let (value, point) = match solved {
        LPResult::Optimal { value, point } => (value, point),
        // Uniform kernel rows with t = 2 are always feasible, and t >= 0
        // bounds the objective.
        LPResult::Infeasible | LPResult::Unbounded => {
            unreachable!("garbling program is feasible and bounded")
        }
    };
    let deviation = value.max(0.0);
    let holds = deviation <= tol;
    let kernel = if holds {
        let mut rows = Vec::with_capacity(mf);
        for j in 0..mf {
            let mut row: Vec<f64> = point[j * mg..(j + 1) * mg]
                .iter()
                .map(|&x| x.max(0.0))
                .collect();
            let sum: f64 = row.iter().sum();
            for x in row.iter_mut() {
                *x /= sum;
            }
            rows.push(row);
        }
        Some(Garbling::new(rows).expect("renormalized kernel is row-stochastic"))
    } else {
        None
    };
    let verdict = OrderVerdict {
        holds,
        witness: None,
        margin: -deviation,
        method: Method::GarblingLP,
    };
    Ok((verdict, kernel))
}

/// Mutual dominance in the linear order.
pub fn lb_equivalent(f: &FiniteExperiment, g: &FiniteExperiment) -> Result<bool, OrderError> {
    Ok(lb_exact(f, g)?.holds && lb_exact(g, f)?.holds)
}

/// Splits a mixed-sign witness into the weighted two-event reduction it
/// induces: `omega0` collects the nonpositive entries, `omega1` the
/// strictly positive ones, each weighted proportionally to its entry.
pub fn dichotomy_from_witness(b: &[f64]) -> Result<WeightedDichotomy, OrderError> {
    assert!(b.iter().all(|x| x.is_finite()), "witness entries must be finite");
    let has_positive = b.iter().any(|&x| x > 0.0);
    let has_negative = b.iter().any(|&x| x < 0.0);
    if !has_positive || !has_negative {
        return Err(OrderError::OneSignedWitness);
    }
    let omega0: Vec<usize> = (0..b.len()).filter(|&i| b[i] <= 0.0).collect();
    let omega1: Vec<usize> = (0..b.len()).filter(|&i| b[i] > 0.0).collect();
    let b0: f64 = omega0.iter().map(|&i| b[i]).sum();
    let b1: f64 = omega1.iter().map(|&i| b[i]).sum();
    let w0: Vec<f64> = omega0.iter().map(|&i| b[i] / b0).collect();
    let w1: Vec<f64> = omega1.iter().map(|&i| b[i] / b1).collect();
    Ok(WeightedDichotomy::new(omega0, omega1, w0, w1, b.len())
        .expect("proportional weights are a valid dichotomy"))
}

// ------------------------------------------------------------------ internals

fn check_states(f: &FiniteExperiment, g: &FiniteExperiment) -> Result<(), OrderError> {
    if f.states() != g.states() {
        return Err(OrderError::StateMismatch);
    }
    Ok(())
}

fn xi_at(f: &FiniteExperiment, g: &FiniteExperiment, b: &[f64]) -> f64 {
    zonoid_support(f, b) - zonoid_support(g, b)
}

/// Keep the smaller value; inside the tie band keep the lexicographically
/// smaller ray so the reported witness does not depend on survey order.
fn consider(best: &mut Option<(f64, Direction)>, value: f64, ray: Direction) {
    match best {
        None => *best = Some((value, ray)),
        Some((bv, br)) => {
            let band = TIE_BAND * (1.0 + bv.abs());
            if value < *bv - band {
                *bv = value;
                *br = ray;
            } else if value <= *bv + band && lex_less(&ray, br) {
                if value < *bv {
                    *bv = value;
                }
                *br = ray;
            }
        }
    }
}

fn finish_verdict(margin: f64, ray: Direction, method: Method) -> OrderVerdict {
    let holds = margin >= -HOLD_TOL;
    OrderVerdict { holds, witness: if holds { None } else { Some(ray) }, margin, method }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Less => return true,
            core::cmp::Ordering::Greater => return false,
            core::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn check_limits(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    limits: &RayLimits,
) -> Result<(), OrderError> {
    let combined = f.n_signals() + g.n_signals();
    if combined > limits.max_combined_signals {
        return Err(OrderError::DimensionLimitExceeded(format!(
            "combined signal count {combined} exceeds the limit {}",
            limits.max_combined_signals
        )));
    }
    if f.n_states() > limits.max_states {
        return Err(OrderError::DimensionLimitExceeded(format!(
            "state count {} exceeds the limit {}",
            f.n_states(),
            limits.max_states
        )));
    }
    Ok(())
}

/// Unit-normalize and flip so the first entry above `ZERO_TOL` is positive;
/// `None` for (numerically) zero vectors. ξ is sign-symmetric, so one
/// representative per antipodal pair suffices.
fn canonical_unit(v: &[f64]) -> Option<Direction> {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
    if norm < ZERO_TOL {
        return None;
    }
    let mut u: Direction = v.iter().map(|x| x / norm).collect();
    for &x in u.iter() {
        if x.abs() > ZERO_TOL {
            if x < 0.0 {
                for y in u.iter_mut() {
                    *y = -*y;
                }
            }
            break;
        }
    }
    Some(u)
}

fn push_unique(normals: &mut Vec<Direction>, candidate: &[f64]) {
    if let Some(u) = canonical_unit(candidate) {
        if !normals.iter().any(|w| w.iter().zip(&u).all(|(a, b)| (a - b).abs() < 1e-9)) {
            normals.push(u);
        }
    }
}

/// Columns of both experiments plus the coordinate basis, deduplicated up
/// to sign and scale. The basis vectors make every linearity cone pointed,
/// so each one is spanned by rays that kill some (dim−1)-subset.
fn gather_normals(f: &FiniteExperiment, g: &FiniteExperiment) -> Vec<Direction> {
    let dim = f.n_states();
    let mut normals: Vec<Direction> = Vec::new();
    for j in 0..f.n_signals() {
        push_unique(&mut normals, &f.column(j));
    }
    for j in 0..g.n_signals() {
        push_unique(&mut normals, &g.column(j));
    }
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        push_unique(&mut normals, &e);
    }
    normals
}

/// All candidate extreme rays: for every (dim−1)-subset of the normals,
/// an orthonormal basis of its null space (rank-deficient subsets simply
/// contribute more than one vector), canonicalized. ξ ≥ 0 on these rays
/// forces ξ ≥ 0 everywhere.
fn ray_survey(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    limits: &RayLimits,
) -> Result<Vec<Direction>, OrderError> {
    check_limits(f, g, limits)?;
    let dim = f.n_states();
    let normals = gather_normals(f, g);
    let mut rays: Vec<Direction> = Vec::new();
    for subset in (0..normals.len()).combinations(dim - 1) {
        let rows: Vec<&[f64]> = subset.iter().map(|&i| normals[i].as_slice()).collect();
        for v in null_space(&rows, dim) {
            if let Some(u) = canonical_unit(&v) {
                rays.push(u);
            }
        }
    }
    Ok(rays)
}

/// Orthonormal null-space basis by Gauss-Jordan elimination with partial
/// pivoting, then Gram-Schmidt over the free-column solutions.
fn null_space(rows: &[&[f64]], dim: usize) -> Vec<Direction> {
    let mut a: Vec<Direction> = rows.iter().map(|r| r.to_vec()).collect();
    let nrows = a.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..dim {
        if r == nrows {
            break;
        }
        let mut best = r;
        for i in r + 1..nrows {
            if a[i][c].abs() > a[best][c].abs() {
                best = i;
            }
        }
        if a[best][c].abs() <= NULL_TOL {
            continue;
        }
        a.swap(r, best);
        let pivot = a[r][c];
        for k in c..dim {
            a[r][k] /= pivot;
        }
        for i in 0..nrows {
            if i == r {
                continue;
            }
            let factor = a[i][c];
            if factor != 0.0 {
                for k in c..dim {
                    a[i][k] -= factor * a[r][k];
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let mut basis: Vec<Direction> = Vec::new();
    for c in 0..dim {
        if pivot_cols.contains(&c) {
            continue;
        }
        let mut v = vec![0.0; dim];
        v[c] = 1.0;
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a[ri][c];
        }
        basis.push(v);
    }
    let mut ortho: Vec<Direction> = Vec::new();
    for mut v in basis {
        for u in &ortho {
            let d: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= d * y;
            }
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm > ZERO_TOL {
            for x in v.iter_mut() {
                *x /= norm;
            }
            ortho.push(v);
        }
    }
    ortho
}

/// Zero out sub-`ZERO_TOL` entries, then pick whichever of ±b is
/// quasi-monotone (the lexicographically smaller one if both are).
fn quasi_monotone_rep(ray: &[f64]) -> Option<Direction> {
    let zeroed: Direction =
        ray.iter().map(|&x| if x.abs() < ZERO_TOL { 0.0 } else { x }).collect();
    let negated: Direction = zeroed.iter().map(|&x| -x).collect();
    match (is_quasi_monotone(&zeroed), is_quasi_monotone(&negated)) {
        (true, true) => {
            if lex_less(&negated, &zeroed) {
                Some(negated)
            } else {
                Some(zeroed)
            }
        }
        (true, false) => Some(zeroed),
        (false, true) => Some(negated),
        (false, false) => None,
    }
}

fn random_unit_direction(rng: &mut ChaCha8Rng, dim: usize) -> Direction {
    loop {
        let mut v = Vec::with_capacity(dim);
        while v.len() < dim {
            let (a, b) = gaussian_pair(rng);
            v.push(a);
            if v.len() < dim {
                v.push(b);
            }
        }
        let norm = libm::sqrt(v.iter().map(|x: &f64| x * x).sum());
        if norm > 1e-9 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            // Hemisphere representative; ξ is sign-symmetric.
            if v[0] < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            return v;
        }
    }
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let radius = libm::sqrt(-2.0 * libm::log((1.0 - u1).max(1e-300)));
    let angle = 2.0 * core::f64::consts::PI * u2;
    (radius * libm::cos(angle), radius * libm::sin(angle))
}

/// Coordinate descent on the unit sphere: perturb one coordinate, rescale,
/// keep strict improvements, halve the step on stalls.
fn descend(
    f: &FiniteExperiment,
    g: &FiniteExperiment,
    mut b: Direction,
    mut value: f64,
) -> (f64, Direction) {
    let dim = b.len();
    let mut step = 0.25;
    let mut sweeps = 0;
    while step > 1e-7 && sweeps < 400 {
        sweeps += 1;
        let mut improved = false;
        for i in 0..dim {
            for s in [step, -step] {
                let mut cand = b.clone();
                cand[i] += s;
                let norm = libm::sqrt(cand.iter().map(|x: &f64| x * x).sum());
                if norm < 1e-9 {
                    continue;
                }
                for x in cand.iter_mut() {
                    *x /= norm;
                }
                let v = xi_at(f, g, &cand);
                if v < value - 1e-15 {
                    value = v;
                    b = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, b)
}
