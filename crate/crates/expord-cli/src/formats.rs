//! JSON file schemas and loaders.
//!
//! Every loader attaches the file path to its errors, and deserialization
//! errors name the offending field, so the caller can print a single
//! diagnostic line and exit.

use anyhow::{bail, Context, Result};
use expord::experiment::{discretize, GridExperiment};
use expord::{
    FiniteExperiment, Garbling, MoralHazardEnv, PiecewiseLinearConvex, Prior, ScreeningEnv,
    StateSpace, WeightedDichotomy,
};
use serde::{Deserialize, Serialize};
use std::fs;

fn parse_file<T: serde::de::DeserializeOwned>(path: &str, kind: &str) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {kind} file {path}"))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).with_context(|| format!("{kind} file {path}"))
}

/// An experiment is given either by a row-stochastic `matrix` (finite
/// signals) or by `grid` plus `densities` (a discretized density family);
/// the two forms are mutually exclusive.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    #[serde(default)]
    states: Option<Vec<String>>,
    #[serde(default)]
    signals: Option<Vec<String>>,
    #[serde(default)]
    matrix: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    grid: Option<Vec<f64>>,
    #[serde(default)]
    densities: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

fn state_space(labels: Option<Vec<String>>, rows: usize) -> Result<StateSpace> {
    match labels {
        Some(l) => {
            if l.len() != rows {
                bail!("field states lists {} labels for {} rows", l.len(), rows);
            }
            Ok(StateSpace::new(l)?)
        }
        None => {
            if rows < 2 {
                bail!("field matrix needs at least two rows, one per state");
            }
            Ok(StateSpace::indexed(rows))
        }
    }
}

pub fn load_experiment(path: &str) -> Result<FiniteExperiment> {
    let file: ExperimentFile = parse_file(path, "experiment")?;
    build_experiment(file).with_context(|| format!("experiment file {path}"))
}

fn build_experiment(file: ExperimentFile) -> Result<FiniteExperiment> {
    if file.grid.is_some() || file.densities.is_some() || file.weights.is_some() {
        if file.matrix.is_some() {
            bail!("fields matrix and grid are mutually exclusive");
        }
        if file.signals.is_some() {
            bail!("field signals does not apply to a grid experiment");
        }
        let grid = file.grid.context("missing field grid")?;
        let densities = file.densities.context("missing field densities")?;
        let states = state_space(file.states, densities.len())?;
        let g = match file.weights {
            Some(w) => GridExperiment::new(states, grid, densities, w)?,
            None => GridExperiment::with_trapezoid_weights(states, grid, densities)?,
        };
        Ok(discretize(&g))
    } else {
        let matrix = file.matrix.context("missing field matrix")?;
        if matrix.is_empty() {
            bail!("field matrix needs at least two rows, one per state");
        }
        let states = state_space(file.states, matrix.len())?;
        let signals = match file.signals {
            Some(s) => s,
            None => (0..matrix[0].len()).map(|j| format!("x{j}")).collect(),
        };
        Ok(FiniteExperiment::new_renormalizing(states, signals, matrix)?)
    }
}

#[derive(Serialize)]
struct ExperimentOut<'a> {
    states: &'a [String],
    signals: &'a [String],
    matrix: &'a [Vec<f64>],
}

/// Writes an experiment in the `matrix` form accepted by [`load_experiment`].
pub fn write_experiment(f: &FiniteExperiment, path: &str) -> Result<()> {
    let out = ExperimentOut {
        states: f.states().labels(),
        signals: f.signals(),
        matrix: f.matrix(),
    };
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write experiment file {path}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisionFile {
    #[serde(default)]
    actions: Option<Vec<String>>,
    payoff: Vec<Vec<f64>>,
}

pub fn load_decision(path: &str) -> Result<expord::DecisionProblem> {
    let file: DecisionFile = parse_file(path, "decision problem")?;
    let dp = match file.actions {
        Some(a) => expord::DecisionProblem::new(a, file.payoff),
        None => expord::DecisionProblem::from_payoff(file.payoff),
    };
    dp.with_context(|| format!("decision problem file {path}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PwlFile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PwlFile {
    fn build(self) -> Result<PiecewiseLinearConvex> {
        Ok(PiecewiseLinearConvex::new(self.breakpoints, self.values)?)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MhCostFile {
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    l: Vec<f64>,
    c0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MhEnvFile {
    u_bounds: (f64, f64),
    cost: MhCostFile,
    gamma: PwlFile,
}

pub fn load_mh_env(path: &str) -> Result<MoralHazardEnv> {
    let file: MhEnvFile = parse_file(path, "moral-hazard environment")?;
    let gamma = file.gamma.build().context("field gamma")?;
    MoralHazardEnv::new(file.u_bounds, file.cost.q, file.cost.l, file.cost.c0, gamma)
        .with_context(|| format!("moral-hazard environment file {path}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScreenEnvFile {
    types: Vec<Vec<f64>>,
    type_probs: Vec<f64>,
    psi: Vec<f64>,
    v1: Vec<Vec<f64>>,
    v2: PwlFile,
    u1: Vec<Vec<f64>>,
    m_bounds: (f64, f64),
}

pub fn load_screen_env(path: &str) -> Result<ScreeningEnv> {
    let file: ScreenEnvFile = parse_file(path, "screening environment")?;
    let v2 = file.v2.build().context("field v2")?;
    ScreeningEnv::new(
        file.types,
        file.type_probs,
        file.psi,
        file.v1,
        v2,
        file.u1,
        file.m_bounds,
    )
    .with_context(|| format!("screening environment file {path}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DichotomyFile {
    omega0: Vec<usize>,
    omega1: Vec<usize>,
    w0: Vec<f64>,
    w1: Vec<f64>,
}

pub fn load_dichotomy(path: &str, n_states: usize) -> Result<WeightedDichotomy> {
    let file: DichotomyFile = parse_file(path, "dichotomy")?;
    WeightedDichotomy::new(file.omega0, file.omega1, file.w0, file.w1, n_states)
        .with_context(|| format!("dichotomy file {path}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GarblingFile {
    kernel: Vec<Vec<f64>>,
}

pub fn load_garbling(path: &str) -> Result<Garbling> {
    let file: GarblingFile = parse_file(path, "garbling")?;
    Garbling::new(file.kernel).with_context(|| format!("garbling file {path}"))
}

/// Parses a comma-separated list of numbers.
pub fn parse_float_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|tok| {
            let t = tok.trim();
            t.parse::<f64>()
                .with_context(|| format!("cannot parse {t:?} as a number"))
        })
        .collect()
}

/// `"uniform"` or a comma-separated full probability vector, one entry per
/// state, summing to 1.
pub fn parse_prior(spec: &str, n_states: usize) -> Result<Prior> {
    if spec == "uniform" {
        return Ok(Prior::uniform(n_states));
    }
    let full = parse_float_list(spec).context("flag --prior")?;
    if full.len() != n_states {
        bail!(
            "flag --prior lists {} probabilities for {} states",
            full.len(),
            n_states
        );
    }
    let sum: f64 = full.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        bail!("flag --prior must sum to 1, got {sum}");
    }
    Ok(Prior::new(full[1..].to_vec()).context("flag --prior")?)
}
