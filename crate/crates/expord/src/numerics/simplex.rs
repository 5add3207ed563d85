//! Dense two-phase simplex with Bland's rule.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::NumericsError;

/// A constraint is considered satisfied when its residual is below this.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// A reduced cost above minus this counts as nonnegative (optimality).
pub const REDUCED_COST_TOL: f64 = 1e-9;
/// Entries below this never serve as pivots.
const PIVOT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;

/// Minimization program: objective, `row . x = rhs` equalities,
/// `row . x <= rhs` inequalities, and per-variable bounds which may be
/// infinite on either side.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub variable_count: usize,
    pub objective: Vec<f64>,
    pub equality_rows: Vec<(Vec<f64>, f64)>,
    pub inequality_rows: Vec<(Vec<f64>, f64)>,
    pub variable_bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LPResult {
    Optimal { value: f64, point: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// How each original variable maps into the nonnegative standard form.
enum Sub {
    /// x = lo + y[col], y >= 0.
    Shift { col: usize, lo: f64 },
    /// x = hi - y[col], y >= 0 (no finite lower bound).
    Neg { col: usize, hi: f64 },
    /// x = y[pos] - y[neg], both >= 0 (free variable).
    Free { pos: usize, neg: usize },
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LPResult, NumericsError> {
    solve_lp_with(lp, FEASIBILITY_TOL)
}

/// Solve with an explicit phase-1 feasibility tolerance.
pub fn solve_lp_with(lp: &LinearProgram, feasibility_tol: f64) -> Result<LPResult, NumericsError> {
    validate(lp)?;
    let n = lp.variable_count;

    let mut subs = Vec::with_capacity(n);
    let mut ncols = 0;
    for &(lo, hi) in &lp.variable_bounds {
        if lo.is_finite() {
            subs.push(Sub::Shift { col: ncols, lo });
            ncols += 1;
        } else if hi.is_finite() {
            subs.push(Sub::Neg { col: ncols, hi });
            ncols += 1;
        } else {
            subs.push(Sub::Free { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    // Rewrite a row over the original variables in terms of the shifted ones.
    let map_row = |a: &[f64], b: f64| -> (Vec<f64>, f64) {
        let mut coefs = vec![0.0; ncols];
        let mut rhs = b;
        for (i, &ai) in a.iter().enumerate() {
            match subs[i] {
                Sub::Shift { col, lo } => {
                    coefs[col] += ai;
                    rhs -= ai * lo;
                }
                Sub::Neg { col, hi } => {
                    coefs[col] -= ai;
                    rhs -= ai * hi;
                }
                Sub::Free { pos, neg } => {
                    coefs[pos] += ai;
                    coefs[neg] -= ai;
                }
            }
        }
        (coefs, rhs)
    };

    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new(); // (coefs, rhs, is_equality)
    for (a, b) in &lp.equality_rows {
        let (c, r) = map_row(a, *b);
        rows.push((c, r, true));
    }
    for (a, b) in &lp.inequality_rows {
        let (c, r) = map_row(a, *b);
        rows.push((c, r, false));
    }
    // A doubly-bounded variable keeps its upper bound as an extra row.
    for (i, &(lo, hi)) in lp.variable_bounds.iter().enumerate() {
        if lo.is_finite() && hi.is_finite() {
            let mut a = vec![0.0; n];
            a[i] = 1.0;
            let (c, r) = map_row(&a, hi);
            rows.push((c, r, false));
        }
    }

    let m = rows.len();
    let nslack = rows.iter().filter(|r| !r.2).count();

    // Assemble constraint rows over [structural | slack | artificial] columns,
    // flipping signs so every rhs is nonnegative, then pick the initial basis:
    // a +1 slack where available, an artificial column otherwise.
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut needs_artificial: Vec<Option<usize>> = Vec::with_capacity(m);
    let mut slack_no = 0;
    let mut na = 0;
    for (coefs, rhs, is_eq) in &rows {
        let mut row = vec![0.0; ncols + nslack];
        row[..ncols].copy_from_slice(coefs);
        let mut rhs = *rhs;
        let mut slack_sign = 0.0;
        if !is_eq {
            slack_sign = 1.0;
            row[ncols + slack_no] = 1.0;
        }
        if rhs < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            rhs = -rhs;
            slack_sign = -slack_sign;
        }
        if slack_sign > 0.0 {
            basis.push(ncols + slack_no);
            needs_artificial.push(None);
        } else {
            basis.push(usize::MAX); // patched below once artificial ids exist
            needs_artificial.push(Some(na));
            na += 1;
        }
        if !is_eq {
            slack_no += 1;
        }
        row.push(rhs);
        tab.push(row);
    }
    let real_cols = ncols + nslack;
    let total = real_cols + na;
    for (r, row) in tab.iter_mut().enumerate() {
        let rhs = row.pop().expect("rhs present");
        row.resize(total, 0.0);
        if let Some(k) = needs_artificial[r] {
            row[real_cols + k] = 1.0;
            basis[r] = real_cols + k;
        }
        row.push(rhs);
    }

    // Standardized objective; the constant part is dropped because the value
    // is recomputed from the recovered point.
    let (std_obj, _) = map_row(&lp.objective, 0.0);
    let mut cost2 = vec![0.0; total + 1];
    cost2[..ncols].copy_from_slice(&std_obj);
    let mut cost1 = vec![0.0; total + 1];
    for j in real_cols..total {
        cost1[j] = 1.0;
    }
    // Price out the artificial basics from the phase-1 row.
    for r in 0..m {
        if basis[r] >= real_cols {
            for j in 0..=total {
                cost1[j] -= tab[r][j];
            }
        }
    }

    match run_phase(&mut tab, &mut cost1, &mut cost2, &mut basis, real_cols)? {
        PhaseEnd::Unbounded => {
            // Phase-1 objective is bounded below by zero; this cannot happen.
            return Err(NumericsError::IterationLimit);
        }
        PhaseEnd::Optimal => {}
    }
    if -cost1[total] > feasibility_tol {
        return Ok(LPResult::Infeasible);
    }

    // Drive leftover artificials out of the basis; rows that cannot pivot
    // are redundant and get dropped.
    let mut r = 0;
    while r < tab.len() {
        if basis[r] >= real_cols {
            let piv = (0..real_cols).find(|&j| tab[r][j].abs() > PIVOT_TOL);
            match piv {
                Some(j) => pivot(&mut tab, &mut cost1, &mut cost2, &mut basis, r, j),
                None => {
                    tab.remove(r);
                    basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    match run_phase(&mut tab, &mut cost2, &mut cost1, &mut basis, real_cols)? {
        PhaseEnd::Unbounded => return Ok(LPResult::Unbounded),
        PhaseEnd::Optimal => {}
    }

    let mut y = vec![0.0; ncols];
    for (r, row) in tab.iter().enumerate() {
        if basis[r] < ncols {
            y[basis[r]] = row[total];
        }
    }
    let mut point = vec![0.0; n];
    for (i, sub) in subs.iter().enumerate() {
        point[i] = match *sub {
            Sub::Shift { col, lo } => lo + y[col],
            Sub::Neg { col, hi } => hi - y[col],
            Sub::Free { pos, neg } => y[pos] - y[neg],
        };
    }
    let value = lp.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    Ok(LPResult::Optimal { value, point })
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

/// Bland's rule: enter the lowest-index improving column (artificials never
/// re-enter), leave by minimum ratio with ties to the lowest basis index.
fn run_phase(
    tab: &mut Vec<Vec<f64>>,
    cost: &mut Vec<f64>,
    other_cost: &mut Vec<f64>,
    basis: &mut Vec<usize>,
    enterable_cols: usize,
) -> Result<PhaseEnd, NumericsError> {
    let total = cost.len() - 1;
    for _ in 0..MAX_ITERATIONS {
        let entering = (0..enterable_cols).find(|&j| cost[j] < -REDUCED_COST_TOL);
        let j = match entering {
            None => return Ok(PhaseEnd::Optimal),
            Some(j) => j,
        };
        let mut leave: Option<(f64, usize, usize)> = None; // (ratio, basis var, row)
        for (r, row) in tab.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let ratio = row[total] / row[j];
                let cand = (ratio, basis[r], r);
                leave = Some(match leave {
                    None => cand,
                    Some(best) => {
                        if ratio < best.0 - 1e-12 || (ratio <= best.0 + 1e-12 && basis[r] < best.1)
                        {
                            cand
                        } else {
                            best
                        }
                    }
                });
            }
        }
        match leave {
            None => return Ok(PhaseEnd::Unbounded),
            Some((_, _, r)) => pivot(tab, cost, other_cost, basis, r, j),
        }
    }
    Err(NumericsError::IterationLimit)
}

fn pivot(
    tab: &mut [Vec<f64>],
    cost: &mut [f64],
    other_cost: &mut [f64],
    basis: &mut [usize],
    r: usize,
    j: usize,
) {
    let p = tab[r][j];
    for v in tab[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = tab[r].clone();
    for (i, row) in tab.iter_mut().enumerate() {
        if i != r && row[j].abs() > 0.0 {
            let f = row[j];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[j] = 0.0;
        }
    }
    for c in [cost, other_cost] {
        let f = c[j];
        if f.abs() > 0.0 {
            for (v, pv) in c.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            c[j] = 0.0;
        }
    }
    basis[r] = j;
}

fn validate(lp: &LinearProgram) -> Result<(), NumericsError> {
    let n = lp.variable_count;
    if lp.objective.len() != n {
        return Err(NumericsError::MalformedProgram(format!(
            "objective has {} coefficients for {} variables",
            lp.objective.len(),
            n
        )));
    }
    if lp.variable_bounds.len() != n {
        return Err(NumericsError::MalformedProgram(format!(
            "{} bounds for {} variables",
            lp.variable_bounds.len(),
            n
        )));
    }
    for (k, (a, _)) in lp.equality_rows.iter().enumerate() {
        if a.len() != n {
            return Err(NumericsError::MalformedProgram(format!(
                "equality row {k} has length {}",
                a.len()
            )));
        }
    }
    for (k, (a, _)) in lp.inequality_rows.iter().enumerate() {
        if a.len() != n {
            return Err(NumericsError::MalformedProgram(format!(
                "inequality row {k} has length {}",
                a.len()
            )));
        }
    }
    for (i, &(lo, hi)) in lp.variable_bounds.iter().enumerate() {
        if !(lo <= hi) {
            return Err(NumericsError::MalformedProgram(format!(
                "variable {i} has lower bound {lo} above upper bound {hi}"
            )));
        }
    }
    Ok(())
}
