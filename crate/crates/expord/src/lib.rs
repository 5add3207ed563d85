//! Comparison of finite statistical experiments.
//!
//! An experiment is a row-stochastic likelihood matrix over states and
//! signals. This crate decides three informativeness orders between two
//! experiments on a common state space:
//!
//! - the **linear-Blackwell (LB) order**, via exact enumeration of the
//!   extreme rays of the likelihood-column hyperplane arrangement
//!   ([`lborder::lb_exact`]) or a seeded hemisphere sampler
//!   ([`lborder::lb_sampled`]);
//! - the **Blackwell order**, via a garbling-kernel feasibility program
//!   ([`lborder::blackwell_check`]);
//! - the **monotone-posterior-expectation (MPE) order**, the LB check
//!   restricted to quasi-monotone directions ([`lborder::mpe_check`]).
//!
//! Downstream of the orders it computes the economic quantities the orders
//! control: decision values of finite problems ([`decision`]), minimal
//! disutility of implementing a target action under moral hazard
//! ([`moral_hazard`]), and implementation cost plus optimal mechanisms in
//! screening with ex post signals ([`screening`]). A shared numeric
//! substrate ([`numerics`]) provides the LP solver, convex conjugation, and
//! hinge decomposition those computations rest on.
//!
//! The crate is `no_std` (with `alloc`); all operations are pure functions
//! on immutable inputs.

#![no_std]

extern crate alloc;

pub mod decision;
pub mod experiment;
pub mod lborder;
pub mod moral_hazard;
pub mod numerics;
pub mod screening;

pub use decision::{DecisionError, DecisionProblem, QccViolation, Strategy};
pub use experiment::{
    FiniteExperiment, Garbling, GridExperiment, Prior, StateSpace, WeightedDichotomy,
};
pub use lborder::{Direction, Method, OrderError, OrderVerdict, RayLimits};
pub use moral_hazard::{
    ConstraintSet, ConstraintTag, DisutilityOutcome, DualSolution, LinearConstraint,
    MoralHazardEnv, MoralHazardError, SchemeSolution, Sense, TargetAction,
};
pub use numerics::{HingeDecomposition, LPResult, LinearProgram, PiecewiseLinearConvex};
pub use screening::{AllocationRule, CostOutcome, ScreeningEnv, ScreeningError, TransferRule};
