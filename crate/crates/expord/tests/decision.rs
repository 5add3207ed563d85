//! Decision-value tests. The quadratic-loss generator is the oracle for
//! quasi-concave problems: u(a_i, θ_j) = −(v_j − m_i)² with sorted ideal
//! points m is concave in m_i for every belief, hence quasi-concave along
//! the action order; every generated instance is re-certified by is_qcc.

mod common;

use common::{
    assert_close, f_eps, g_hat, identity_experiment, random_experiment, random_garbling, rng,
    uninformative,
};
use expord::decision::{
    binary_decompose, ex_ante_value, expected_payoff, is_lsc, is_qcc, match_strategy,
    statewise_payoffs, value, DecisionError, DecisionProblem, Strategy,
};
use expord::experiment::{apply_garbling, FiniteExperiment, Prior};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn dp(payoff: Vec<Vec<f64>>) -> DecisionProblem {
    DecisionProblem::from_payoff(payoff).unwrap()
}

/// Quasi-concave by construction: quadratic loss around sorted ideal points.
fn quadratic_qcc(r: &mut ChaCha8Rng, n_actions: usize, n_states: usize) -> DecisionProblem {
    let mut values: Vec<f64> = (0..n_states).map(|_| r.gen_range(-1.0..1.0)).collect();
    values.sort_by(f64::total_cmp);
    let mut ideals: Vec<f64> = (0..n_actions).map(|_| r.gen_range(-1.0..1.0)).collect();
    ideals.sort_by(f64::total_cmp);
    let payoff = ideals
        .iter()
        .map(|m| values.iter().map(|v| -(v - m) * (v - m)).collect())
        .collect();
    let problem = dp(payoff);
    let (ok, _) = is_qcc(&problem);
    assert!(ok, "quadratic construction must certify");
    problem
}

fn random_prior(r: &mut ChaCha8Rng, n_states: usize) -> Prior {
    let raw: Vec<f64> = (0..n_states).map(|_| -r.gen_range(1e-6..1.0f64).ln()).collect();
    let sum: f64 = raw.iter().sum();
    Prior::new(raw[1..].iter().map(|x| x / sum).collect()).unwrap()
}

fn random_reduced_belief(r: &mut ChaCha8Rng, n_states: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n_states).map(|_| -r.gen_range(1e-6..1.0f64).ln()).collect();
    let sum: f64 = raw.iter().sum();
    raw[1..].iter().map(|x| x / sum).collect()
}

fn random_binary_dp(r: &mut ChaCha8Rng, n_states: usize) -> DecisionProblem {
    let payoff = (0..2)
        .map(|_| (0..n_states).map(|_| r.gen_range(-2.0..2.0)).collect())
        .collect();
    dp(payoff)
}

fn random_dp(r: &mut ChaCha8Rng, n_actions: usize, n_states: usize) -> DecisionProblem {
    let payoff = (0..n_actions)
        .map(|_| (0..n_states).map(|_| r.gen_range(-2.0..2.0)).collect())
        .collect();
    dp(payoff)
}

fn random_strategy(r: &mut ChaCha8Rng, n_signals: usize, n_actions: usize) -> Strategy {
    let rule = (0..n_signals)
        .map(|_| {
            let raw: Vec<f64> =
                (0..n_actions).map(|_| -r.gen_range(1e-6..1.0f64).ln()).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|x| x / sum).collect()
        })
        .collect();
    Strategy::new(rule).unwrap()
}

// ----------------------------------------------------------- expected payoff

#[test]
fn expected_payoff_frozen_values() {
    let problem = dp(vec![vec![1.0, 0.0, -1.0]]);
    assert_close(expected_payoff(&problem, 0, &[0.0, 0.0]).unwrap(), 1.0, 1e-12, "mass on state 0");
    assert_close(expected_payoff(&problem, 0, &[1.0, 0.0]).unwrap(), 0.0, 1e-12, "mass on state 1");
    assert_close(expected_payoff(&problem, 0, &[0.0, 1.0]).unwrap(), -1.0, 1e-12, "mass on state 2");
    let third = 1.0 / 3.0;
    assert_close(expected_payoff(&problem, 0, &[third, third]).unwrap(), 0.0, 1e-12, "uniform");
    assert_close(
        expected_payoff(&problem, 0, &[0.25, 0.25]).unwrap(),
        0.25,
        1e-12,
        "0.5 - 0.25",
    );
}

#[test]
fn expected_payoff_rejects_bad_beliefs() {
    let problem = dp(vec![vec![1.0, 0.0, -1.0]]);
    assert!(matches!(
        expected_payoff(&problem, 0, &[0.7, 0.4]),
        Err(DecisionError::BadBelief(_))
    ));
    assert!(matches!(
        expected_payoff(&problem, 0, &[-0.1, 0.5]),
        Err(DecisionError::BadBelief(_))
    ));
    assert!(matches!(
        expected_payoff(&problem, 0, &[0.5]),
        Err(DecisionError::BadBelief(_))
    ));
}

// ----------------------------------------------------------------- value

#[test]
fn value_of_a_single_action_problem() {
    let problem = dp(vec![vec![2.0, -1.0]]);
    let (v, argmax) = value(&problem, &[0.25]).unwrap();
    assert_close(v, 0.75 * 2.0 - 0.25, 1e-12, "only action");
    assert_eq!(argmax, vec![0]);
}

#[test]
fn value_reports_all_tied_actions() {
    let problem = dp(vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![0.0, 0.0]]);
    let (_, argmax) = value(&problem, &[0.5]).unwrap();
    assert_eq!(argmax, vec![0, 1]);
}

#[test]
fn value_of_the_quasi_concave_example_at_a_vertex() {
    let problem = dp(vec![
        vec![1.0, 0.0, -1.0],
        vec![0.0, 0.0, 0.0],
        vec![-1.0, 0.0, 1.0],
    ]);
    let (v, argmax) = value(&problem, &[0.0, 0.0]).unwrap();
    assert_close(v, 1.0, 1e-12, "state-0 vertex");
    assert_eq!(argmax, vec![0]);
}

// ----------------------------------------------------------- ex ante value

#[test]
fn uninformative_experiments_return_the_prior_value() {
    let mut r = rng(0x4d_0001);
    for _ in 0..30 {
        let n_states = r.gen_range(2..=4);
        let n_actions = r.gen_range(1..=4);
        let problem = random_dp(&mut r, n_actions, n_states);
        let q = random_prior(&mut r, n_states);
        let f = uninformative(n_states, 3);
        let (prior_value, _) = value(&problem, q.q()).unwrap();
        assert_close(
            ex_ante_value(&problem, &f, &q).unwrap(),
            prior_value,
            1e-9,
            "no information, no gain",
        );
    }
}

#[test]
fn ex_ante_value_frozen_binary_instance() {
    let problem = dp(vec![vec![0.0, 0.0], vec![1.0, -1.0]]);
    let v = ex_ante_value(&problem, &identity_experiment(2), &Prior::uniform(2)).unwrap();
    assert_close(v, 0.5, 1e-12, "half the time the good state is revealed");
}

#[test]
fn ex_ante_value_frozen_cyclic_instance() {
    let problem = dp(vec![vec![0.0, 0.0, 0.0], vec![1.0, -1.0, 0.0]]);
    let v = ex_ante_value(&problem, &g_hat(2), &Prior::uniform(3)).unwrap();
    assert_close(v, 1.0 / 6.0, 1e-12, "only signal y1 makes a1 attractive");
}

#[test]
fn ex_ante_value_requires_shared_state_count() {
    let problem = dp(vec![vec![0.0, 0.0], vec![1.0, -1.0]]);
    assert!(matches!(
        ex_ante_value(&problem, &g_hat(2), &Prior::uniform(3)),
        Err(DecisionError::StateMismatch)
    ));
}

#[test]
fn zero_marginal_signals_contribute_nothing() {
    let f = FiniteExperiment::from_matrix(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let mut r = rng(0x4d_0002);
    for _ in 0..10 {
        let problem = random_dp(&mut r, 3, 2);
        let q = random_prior(&mut r, 2);
        let (prior_value, _) = value(&problem, q.q()).unwrap();
        assert_close(
            ex_ante_value(&problem, &f, &q).unwrap(),
            prior_value,
            1e-9,
            "the only live signal is uninformative",
        );
    }
}

// ---------------------------------------------------------------- QCC / LSC

#[test]
fn opposed_slopes_with_flat_middle_are_quasi_concave() {
    let problem = dp(vec![
        vec![1.0, 0.0, -1.0],
        vec![0.0, 0.0, 0.0],
        vec![-1.0, 0.0, 1.0],
    ]);
    let (ok, certificate) = is_qcc(&problem);
    assert!(ok);
    assert!(certificate.is_none());
}

#[test]
fn dipping_middle_action_is_flagged_with_a_certificate() {
    let problem = dp(vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ]);
    let (ok, certificate) = is_qcc(&problem);
    assert!(!ok);
    let cert = certificate.expect("violations carry a certificate");
    assert_eq!(cert.triple, (0, 1, 2));
    let mid = expected_payoff(&problem, cert.triple.1, &cert.belief).unwrap();
    let low = expected_payoff(&problem, cert.triple.0, &cert.belief).unwrap();
    let high = expected_payoff(&problem, cert.triple.2, &cert.belief).unwrap();
    assert!(
        mid + 1e-9 < low.min(high),
        "certificate belief must realize the dip: {mid} vs {low}, {high}"
    );
}

#[test]
fn binary_problems_are_always_quasi_concave() {
    let mut r = rng(0x4d_0003);
    for _ in 0..20 {
        let n_states = r.gen_range(2..=4);
        let problem = random_binary_dp(&mut r, n_states);
        assert!(is_qcc(&problem).0);
    }
}

#[test]
fn quadratic_loss_generator_always_certifies() {
    let mut r = rng(0x4d_0004);
    for _ in 0..50 {
        let n_actions = r.gen_range(2..=5);
        let n_states = r.gen_range(2..=4);
        quadratic_qcc(&mut r, n_actions, n_states);
    }
}

#[test]
fn staircase_payoffs_are_locally_single_crossing() {
    let payoff = (0..4)
        .map(|i| (0..4).map(|j| (i * j) as f64).collect())
        .collect();
    assert!(is_lsc(&dp(payoff)));
}

#[test]
fn sign_flipping_increment_is_not_single_crossing() {
    let problem = dp(vec![vec![0.0, 0.0, 0.0], vec![1.0, -1.0, 1.0]]);
    assert!(!is_lsc(&problem));
}

#[test]
fn constant_payoffs_are_locally_single_crossing() {
    let problem = dp(vec![vec![3.0, 3.0], vec![3.0, 3.0], vec![3.0, 3.0]]);
    assert!(is_lsc(&problem));
}

// ------------------------------------------------------------- decomposition

#[test]
fn decompose_rejects_non_quasi_concave_problems() {
    let problem = dp(vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ]);
    assert!(matches!(binary_decompose(&problem), Err(DecisionError::NotQCC)));
}

#[test]
fn two_action_problems_decompose_into_themselves() {
    let problem = dp(vec![vec![1.0, -1.0], vec![0.5, 0.5]]);
    let parts = binary_decompose(&problem).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].payoff(), problem.payoff());
}

#[test]
fn decomposition_of_the_flat_middle_example() {
    let problem = dp(vec![
        vec![1.0, 0.0, -1.0],
        vec![0.0, 0.0, 0.0],
        vec![-1.0, 0.0, 1.0],
    ]);
    let parts = binary_decompose(&problem).unwrap();
    assert_eq!(parts.len(), 2);
    let p = [0.0, 0.0];
    let (v, _) = value(&problem, &p).unwrap();
    let v0 = value(&parts[0], &p).unwrap().0;
    let v1 = value(&parts[1], &p).unwrap().0;
    assert_close(v, 1.0, 1e-12, "full problem at the state-0 vertex");
    assert_close(v0, 1.0, 1e-12, "first subproblem carries the value");
    assert_close(v1, 0.0, 1e-12, "second subproblem is flat here");
}

#[test]
fn decomposition_preserves_the_value_everywhere() {
    let mut r = rng(0x4d_0005);
    for _ in 0..20 {
        let n_actions = r.gen_range(2..=5);
        let n_states = r.gen_range(2..=4);
        let problem = quadratic_qcc(&mut r, n_actions, n_states);
        let parts = binary_decompose(&problem).unwrap();
        assert_eq!(parts.len(), n_actions - 1);
        for _ in 0..100 {
            let p = random_reduced_belief(&mut r, n_states);
            let (v, _) = value(&problem, &p).unwrap();
            let total: f64 = parts.iter().map(|part| value(part, &p).unwrap().0).sum();
            assert_close(total, v, 1e-9, "value identity under decomposition");
        }
    }
}

#[test]
fn constant_problems_decompose_into_constant_and_flats() {
    let problem = dp(vec![vec![2.0, 2.0], vec![2.0, 2.0], vec![2.0, 2.0]]);
    let parts = binary_decompose(&problem).unwrap();
    assert_eq!(parts.len(), 2);
    let p = [0.3];
    assert_close(value(&parts[0], &p).unwrap().0, 2.0, 1e-12, "head keeps the constant");
    assert_close(value(&parts[1], &p).unwrap().0, 0.0, 1e-12, "tail increments vanish");
}

// --------------------------------------------------------- statewise payoffs

#[test]
fn signal_blind_strategies_earn_the_pure_action_payoff() {
    let problem = dp(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
    let f = f_eps(2, 0.3);
    let rule = vec![vec![0.0, 1.0]; f.n_signals()];
    let s = Strategy::new(rule).unwrap();
    let z = statewise_payoffs(&problem, &f, &s).unwrap();
    assert_close(z[0], 4.0, 1e-12, "state 0");
    assert_close(z[1], 5.0, 1e-12, "state 1");
    assert_close(z[2], 6.0, 1e-12, "state 2");
}

#[test]
fn matching_the_revealing_experiment_earns_one_everywhere() {
    let problem = dp(vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ]);
    let f = identity_experiment(3);
    let rule = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let s = Strategy::new(rule).unwrap();
    let z = statewise_payoffs(&problem, &f, &s).unwrap();
    for (i, zi) in z.iter().enumerate() {
        assert_close(*zi, 1.0, 1e-12, &format!("state {i}"));
    }
}

#[test]
fn payoff_earned_only_on_a_zero_probability_signal_is_zero() {
    let problem = dp(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]);
    let g = g_hat(2);
    let rule = vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
    ];
    let s = Strategy::new(rule).unwrap();
    let z = statewise_payoffs(&problem, &g, &s).unwrap();
    for (i, zi) in z.iter().enumerate() {
        assert_close(*zi, 0.0, 1e-12, &format!("state {i}"));
    }
}

#[test]
fn statewise_payoffs_reject_mismatched_shapes() {
    let problem = dp(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let f = identity_experiment(2);
    let s = Strategy::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
    assert!(matches!(
        statewise_payoffs(&problem, &f, &s),
        Err(DecisionError::DimensionMismatch(_))
    ));
}

// ------------------------------------------------------------ strategy match

#[test]
fn matching_against_the_same_experiment_returns_the_strategy() {
    let mut r = rng(0x4d_0006);
    for _ in 0..10 {
        let n_states = r.gen_range(2..=3);
        let m = r.gen_range(1..=4);
        let f = random_experiment(&mut r, n_states, m);
        let problem = random_binary_dp(&mut r, n_states);
        let s = random_strategy(&mut r, m, 2);
        let matched = match_strategy(&f, &f, &problem, &s).unwrap();
        assert_eq!(matched.rule(), s.rule(), "already matching strategies pass through");
    }
}

#[test]
fn table_instance_strategy_match_frozen_expectations() {
    let f = f_eps(2, 0.5);
    let g = g_hat(2);
    let problem = dp(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]);
    let s_g = Strategy::new(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
    ])
    .unwrap();
    let s_f = match_strategy(&f, &g, &problem, &s_g).unwrap();
    let expected = [0.0, 0.5, 0.5];
    for i in 0..3 {
        let reach: f64 =
            (0..f.n_signals()).map(|x| s_f.rule()[x][0] * f.matrix()[i][x]).sum();
        assert_close(reach, expected[i], 1e-8, "statewise probability of action 0");
    }
    let zf = statewise_payoffs(&problem, &f, &s_f).unwrap();
    let zg = statewise_payoffs(&problem, &g, &s_g).unwrap();
    for (a, b) in zf.iter().zip(&zg) {
        assert_close(*a, *b, 1e-8, "statewise payoffs transfer");
    }
}

#[test]
fn unreachable_expectations_report_no_match() {
    let f = uninformative(2, 2);
    let g = identity_experiment(2);
    let problem = dp(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let s_g = Strategy::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!(matches!(
        match_strategy(&f, &g, &problem, &s_g),
        Err(DecisionError::NoMatch)
    ));
}

#[test]
fn strategy_match_requires_binary_problems() {
    let f = identity_experiment(2);
    let problem = dp(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]);
    let s = Strategy::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
    assert!(matches!(
        match_strategy(&f, &f, &problem, &s),
        Err(DecisionError::NotBinary)
    ));
}

#[test]
fn matched_strategies_transfer_statewise_payoffs() {
    let mut r = rng(0x4d_0007);
    for _ in 0..50 {
        let n_states = r.gen_range(2..=4);
        let m1 = r.gen_range(2..=5);
        let m2 = r.gen_range(1..=5);
        let f = random_experiment(&mut r, n_states, m1);
        let k = random_garbling(&mut r, m1, m2);
        let g = apply_garbling(&f, &k).unwrap();
        let problem = random_binary_dp(&mut r, n_states);
        let s_g = random_strategy(&mut r, m2, 2);
        let s_f = match_strategy(&f, &g, &problem, &s_g).unwrap();
        for row in s_f.rule() {
            assert!(row.iter().all(|&x| (-1e-9..=1.0 + 1e-9).contains(&x)));
            assert_close(row.iter().sum::<f64>(), 1.0, 1e-9, "stochastic rows");
        }
        let zf = statewise_payoffs(&problem, &f, &s_f).unwrap();
        let zg = statewise_payoffs(&problem, &g, &s_g).unwrap();
        for (a, b) in zf.iter().zip(&zg) {
            assert_close(*a, *b, 1e-8, "payoff transfer under dominance");
        }
    }
}

// ------------------------------------------------------- value monotonicity

#[test]
fn dominance_raises_the_value_of_quasi_concave_problems() {
    let mut r = rng(0x4d_0008);
    for _ in 0..100 {
        let n_states = r.gen_range(2..=4);
        let m1 = r.gen_range(2..=5);
        let m2 = r.gen_range(1..=5);
        let f = random_experiment(&mut r, n_states, m1);
        let k = random_garbling(&mut r, m1, m2);
        let g = apply_garbling(&f, &k).unwrap();
        let n_actions = r.gen_range(2..=4);
        let problem = quadratic_qcc(&mut r, n_actions, n_states);
        let q = random_prior(&mut r, n_states);
        let vf = ex_ante_value(&problem, &f, &q).unwrap();
        let vg = ex_ante_value(&problem, &g, &q).unwrap();
        assert!(vf >= vg - 1e-9, "dominating side must be worth more: {vf} < {vg}");
    }
}

#[test]
fn garbling_weakly_lowers_the_value_of_every_problem() {
    let mut r = rng(0x4d_0009);
    for _ in 0..100 {
        let n_states = r.gen_range(2..=4);
        let m1 = r.gen_range(2..=5);
        let m2 = r.gen_range(1..=5);
        let f = random_experiment(&mut r, n_states, m1);
        let k = random_garbling(&mut r, m1, m2);
        let g = apply_garbling(&f, &k).unwrap();
        let n_actions = r.gen_range(1..=5);
        let problem = random_dp(&mut r, n_actions, n_states);
        let q = random_prior(&mut r, n_states);
        let vf = ex_ante_value(&problem, &f, &q).unwrap();
        let vg = ex_ante_value(&problem, &g, &q).unwrap();
        assert!(vg <= vf + 1e-9, "garbling cannot add value: {vg} > {vf}");
    }
}
