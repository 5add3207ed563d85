//! Shared test support: independent oracles and seeded generators.
//!
//! The oracles here deliberately avoid the library's own algorithms: the LP
//! oracle enumerates basic solutions directly, and the small linear solver
//! is its own Gaussian elimination. Expected values asserted in the test
//! files come from these oracles or from hand arithmetic, never from the
//! code under test.

#![allow(dead_code)]

use expord::numerics::{LPResult, LinearProgram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual}, expected {expected} (tol {tol})"
    );
}

/// Solve a square linear system by Gaussian elimination with partial
/// pivoting. Returns None when the matrix is numerically singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-11 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn for_each_combination(m: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > m {
        return;
    }
    loop {
        f(&idx);
        // Advance to the next k-combination of 0..m in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Debug)]
pub enum VertexVerdict {
    Optimal(f64),
    Infeasible,
}

/// Brute-force LP oracle: every basic solution is the intersection of
/// `variable_count` constraint hyperplanes, so for a program whose variables
/// all have finite bounds the optimum (if any) is the best feasible one.
/// Only valid for all-finite variable bounds.
pub fn lp_vertex_oracle(lp: &LinearProgram) -> VertexVerdict {
    let n = lp.variable_count;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, b) in &lp.equality_rows {
        rows.push((a.clone(), *b));
    }
    for (a, b) in &lp.inequality_rows {
        rows.push((a.clone(), *b));
    }
    for (i, &(lo, hi)) in lp.variable_bounds.iter().enumerate() {
        assert!(lo.is_finite() && hi.is_finite(), "oracle needs finite bounds");
        let mut e = vec![0.0; n];
        e[i] = -1.0;
        rows.push((e, -lo));
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push((e, hi));
    }
    let feasible = |x: &[f64]| {
        for (a, b) in &lp.equality_rows {
            let lhs: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
            if (lhs - b).abs() > 1e-7 {
                return false;
            }
        }
        for (a, b) in &lp.inequality_rows {
            let lhs: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
            if lhs > b + 1e-7 {
                return false;
            }
        }
        for (i, &(lo, hi)) in lp.variable_bounds.iter().enumerate() {
            if x[i] < lo - 1e-7 || x[i] > hi + 1e-7 {
                return false;
            }
        }
        true
    };
    let mut best: Option<f64> = None;
    for_each_combination(rows.len(), n, &mut |subset| {
        let a: Vec<Vec<f64>> = subset.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v: f64 = lp.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
    });
    match best {
        Some(v) => VertexVerdict::Optimal(v),
        None => VertexVerdict::Infeasible,
    }
}

/// Random LP with 1..=3 variables, finite box bounds, and a mix of
/// inequality and equality rows. Roughly half the instances are feasible.
pub fn random_boxed_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(1..=3);
    let n_ineq = rng.gen_range(0..=4);
    let n_eq = rng.gen_range(0..=1);
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let lo = rng.gen_range(-1.0..0.0);
            (lo, lo + rng.gen_range(0.5..2.5))
        })
        .collect();
    // An interior-ish point used to make some equality rows consistent.
    let x0: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| lo + rng.gen_range(0.25..0.75) * (hi - lo))
        .collect();
    let random_row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    };
    let inequality_rows = (0..n_ineq)
        .map(|_| {
            let a = random_row(rng);
            let b = rng.gen_range(-0.5..1.0);
            (a, b)
        })
        .collect();
    let equality_rows = (0..n_eq)
        .map(|_| {
            let a = random_row(rng);
            let b = if rng.gen_bool(0.5) {
                a.iter().zip(&x0).map(|(ai, xi)| ai * xi).sum()
            } else {
                rng.gen_range(-0.5..1.0)
            };
            (a, b)
        })
        .collect();
    LinearProgram {
        variable_count: n,
        objective: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        equality_rows,
        inequality_rows,
        variable_bounds: bounds,
    }
}

pub fn lp_value(res: &LPResult) -> f64 {
    match res {
        LPResult::Optimal { value, .. } => *value,
        other => panic!("expected Optimal, got {other:?}"),
    }
}

// ------------------------------------------------------------ experiments

use expord::experiment::{FiniteExperiment, Garbling};

/// Row-stochastic matrix with strictly positive entries (normalized
/// exponentials, so no likelihood ratio ever divides by zero).
pub fn random_experiment(rng: &mut ChaCha8Rng, n_states: usize, n_signals: usize) -> FiniteExperiment {
    let matrix = (0..n_states)
        .map(|_| {
            let raw: Vec<f64> = (0..n_signals).map(|_| -rng.gen::<f64>().ln().min(50.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        })
        .collect();
    FiniteExperiment::from_matrix(matrix).expect("random rows are stochastic")
}

/// Like `random_experiment` but with a sprinkling of exact zeros.
pub fn random_sparse_experiment(
    rng: &mut ChaCha8Rng,
    n_states: usize,
    n_signals: usize,
) -> FiniteExperiment {
    let matrix = (0..n_states)
        .map(|_| loop {
            let raw: Vec<f64> = (0..n_signals)
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(0.05..1.0)
                    }
                })
                .collect();
            let s: f64 = raw.iter().sum();
            if s > 0.1 {
                return raw.iter().map(|x| x / s).collect();
            }
        })
        .collect();
    FiniteExperiment::from_matrix(matrix).expect("rows normalized")
}

pub fn random_garbling(rng: &mut ChaCha8Rng, from: usize, to: usize) -> Garbling {
    let kernel = (0..from)
        .map(|_| {
            let raw: Vec<f64> = (0..to).map(|_| -rng.gen::<f64>().ln().min(50.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        })
        .collect();
    Garbling::new(kernel).expect("random kernel rows are stochastic")
}

/// The revealing-with-noise experiment: n+1 states, n+2 signals; state i
/// sends signal i with probability 1-eps and the common signal with
/// probability eps.
pub fn f_eps(n: usize, eps: f64) -> FiniteExperiment {
    let matrix = (0..=n)
        .map(|i| {
            let mut row = vec![0.0; n + 2];
            row[i] = 1.0 - eps;
            row[n + 1] = eps;
            row
        })
        .collect();
    FiniteExperiment::from_matrix(matrix).expect("rows sum to one")
}

/// The cyclic elimination experiment: n+1 states and signals, zero on the
/// diagonal and 1/n off it.
pub fn g_hat(n: usize) -> FiniteExperiment {
    let matrix = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| if i == j { 0.0 } else { 1.0 / n as f64 })
                .collect()
        })
        .collect();
    FiniteExperiment::from_matrix(matrix).expect("rows sum to one")
}

/// Fully revealing experiment: identity matrix.
pub fn identity_experiment(k: usize) -> FiniteExperiment {
    let matrix = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    FiniteExperiment::from_matrix(matrix).expect("identity is stochastic")
}

/// All rows equal: the signal carries no information.
pub fn uninformative(n_states: usize, n_signals: usize) -> FiniteExperiment {
    let row: Vec<f64> = vec![1.0 / n_signals as f64; n_signals];
    FiniteExperiment::from_matrix(vec![row; n_states]).expect("uniform rows")
}
