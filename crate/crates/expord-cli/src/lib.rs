//! Command-line front end for the experiment-comparison library.
//!
//! Each verb loads JSON inputs, runs one library routine, prints a single
//! machine-readable JSON line on stdout, and writes any human commentary to
//! stderr. Exit codes are deterministic: 0 on success, 1 when a requested
//! order check does not hold, 2 on any parse or validation error.

mod formats;

use anyhow::{bail, Context, Result};
use clap::{value_parser, Arg, ArgAction, ArgGroup, ArgMatches, ColorChoice, Command};
use expord::decision::{ex_ante_value, is_lsc, is_qcc};
use expord::experiment::{apply_garbling, dichotomy_reduce, mixture, product};
use expord::lborder::{
    blackwell_check, blackwell_check_tol, lb_exact, lb_sampled, mpe_check, zonoid_support,
};
use expord::moral_hazard::{dual_solve, implementable, min_disutility};
use expord::screening::optimal_mechanism;
use expord::{
    DisutilityOutcome, Method, MoralHazardError, OrderVerdict, ScreeningError, TargetAction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;
use std::io::Write;

fn command() -> Command {
    let experiment = |name: &'static str| {
        Arg::new(name)
            .value_name(name)
            .required(true)
            .help("Experiment file (JSON)")
    };
    Command::new("expord")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Compare finite statistical experiments and price the gap in decision, contracting, and screening problems")
        .color(ColorChoice::Never)
        .subcommand_required(true)
        .arg(
            Arg::new("seed")
                .long("seed")
                .value_name("INT")
                .value_parser(value_parser!(u64))
                .default_value("0")
                .global(true)
                .help("Seed for randomized searches"),
        )
        .arg(
            Arg::new("tol")
                .long("tol")
                .value_name("FLOAT")
                .value_parser(value_parser!(f64))
                .global(true)
                .help("Feasibility tolerance override for the kernel check"),
        )
        .subcommand(
            Command::new("compare")
                .about("Decide an informativeness order between two experiments")
                .arg(
                    Arg::new("order")
                        .long("order")
                        .value_parser(["lb", "lb-sampled", "mpe", "blackwell", "equiv"])
                        .default_value("lb")
                        .help("Which order to check"),
                )
                .arg(
                    Arg::new("resolution")
                        .long("resolution")
                        .value_name("N")
                        .value_parser(value_parser!(usize))
                        .default_value("2000")
                        .help("Directions drawn by the sampled check"),
                )
                .arg(experiment("A"))
                .arg(experiment("B")),
        )
        .subcommand(
            Command::new("zonoid")
                .about("Sample the support function of an experiment's payoff body")
                .arg(
                    Arg::new("directions")
                        .long("directions")
                        .value_name("N")
                        .value_parser(value_parser!(usize))
                        .default_value("64")
                        .help("Number of hemisphere directions"),
                )
                .arg(experiment("A")),
        )
        .subcommand(
            Command::new("value")
                .about("Ex ante value of a decision problem under an experiment")
                .arg(
                    Arg::new("prior")
                        .long("prior")
                        .value_name("SPEC")
                        .default_value("uniform")
                        .help("\"uniform\" or a comma-separated probability vector"),
                )
                .arg(
                    Arg::new("DP")
                        .value_name("DP")
                        .required(true)
                        .help("Decision problem file (JSON)"),
                )
                .arg(experiment("A")),
        )
        .subcommand(
            Command::new("qcc")
                .about("Classify a decision problem's payoff structure")
                .arg(
                    Arg::new("DP")
                        .value_name("DP")
                        .required(true)
                        .help("Decision problem file (JSON)"),
                ),
        )
        .subcommand(
            Command::new("mh")
                .about("Implementability and cheapest implementation of a target action")
                .arg(
                    Arg::new("target")
                        .long("target")
                        .value_name("LIST")
                        .required(true)
                        .help("Comma-separated deviation weights of the target action"),
                )
                .arg(
                    Arg::new("ENV")
                        .value_name("ENV")
                        .required(true)
                        .help("Moral-hazard environment file (JSON)"),
                )
                .arg(experiment("A")),
        )
        .subcommand(
            Command::new("screen")
                .about("Profit-maximal screening mechanism under an experiment")
                .arg(
                    Arg::new("ENV")
                        .value_name("ENV")
                        .required(true)
                        .help("Screening environment file (JSON)"),
                )
                .arg(experiment("A")),
        )
        .subcommand(
            Command::new("transform")
                .about("Build a new experiment file from existing ones")
                .arg(
                    Arg::new("product")
                        .long("product")
                        .action(ArgAction::SetTrue)
                        .help("Run both input experiments independently"),
                )
                .arg(
                    Arg::new("mix")
                        .long("mix")
                        .value_name("T")
                        .help("Observe the first input with probability t, the second otherwise"),
                )
                .arg(
                    Arg::new("dichotomy")
                        .long("dichotomy")
                        .value_name("D")
                        .help("Collapse the states to a weighted two-event split (JSON file)"),
                )
                .arg(
                    Arg::new("garble")
                        .long("garble")
                        .value_name("K")
                        .help("Push the signals through a stochastic kernel (JSON file)"),
                )
                .group(
                    ArgGroup::new("mode")
                        .args(["product", "mix", "dichotomy", "garble"])
                        .required(true),
                )
                .arg(
                    Arg::new("out")
                        .long("out")
                        .value_name("OUT")
                        .required(true)
                        .help("Path of the experiment file to write"),
                )
                .arg(
                    Arg::new("INPUT")
                        .value_name("INPUT")
                        .num_args(1..=2)
                        .required(true)
                        .help("Input experiment file(s); product and mix take two"),
                ),
        )
}

/// Runs the CLI on `args` (without the program name) and returns the exit
/// code. All output goes through the two writers, so tests can capture it.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let argv = std::iter::once(String::from("expord")).chain(args.iter().cloned());
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{e}");
            return code;
        }
    };
    let outcome = match matches.subcommand() {
        Some(("compare", m)) => cmd_compare(m, stdout, stderr),
        Some(("zonoid", m)) => cmd_zonoid(m, stdout, stderr),
        Some(("value", m)) => cmd_value(m, stdout, stderr),
        Some(("qcc", m)) => cmd_qcc(m, stdout, stderr),
        Some(("mh", m)) => cmd_mh(m, stdout, stderr),
        Some(("screen", m)) => cmd_screen(m, stdout, stderr),
        Some(("transform", m)) => cmd_transform(m, stdout, stderr),
        _ => unreachable!("a subcommand is required"),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            2
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::ExactRays => "exact-rays",
        Method::SampledHemisphere => "sampled-hemisphere",
        Method::GarblingLP => "garbling-lp",
    }
}

fn emit_verdict(
    v: &OrderVerdict,
    method: &str,
    order: &str,
    paths: (&str, &str),
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let line = json!({
        "holds": v.holds,
        "witness": v.witness,
        "margin": v.margin,
        "method": method,
    });
    writeln!(out, "{line}")?;
    if v.holds {
        writeln!(
            err,
            "{order}: {} dominates {} (margin {:.6e})",
            paths.0, paths.1, v.margin
        )?;
    } else {
        writeln!(
            err,
            "{order}: {} does not dominate {} (margin {:.6e})",
            paths.0, paths.1, v.margin
        )?;
        if let Some(w) = &v.witness {
            writeln!(err, "witness direction: {w:?}")?;
        }
    }
    Ok(i32::from(!v.holds))
}

fn cmd_compare(m: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let order = m.get_one::<String>("order").expect("defaulted").as_str();
    let path_a = m.get_one::<String>("A").expect("required");
    let path_b = m.get_one::<String>("B").expect("required");
    let f = formats::load_experiment(path_a)?;
    let g = formats::load_experiment(path_b)?;
    let seed = *m.get_one::<u64>("seed").expect("defaulted");
    let resolution = *m.get_one::<usize>("resolution").expect("defaulted");
    let tol = m.get_one::<f64>("tol").copied();

    let checked = (|| -> Result<(OrderVerdict, &str), expord::OrderError> {
        match order {
            "lb" => {
                let v = lb_exact(&f, &g)?;
                let name = method_name(v.method);
                Ok((v, name))
            }
            "lb-sampled" => {
                let v = lb_sampled(&f, &g, resolution, seed)?;
                let name = method_name(v.method);
                Ok((v, name))
            }
            "mpe" => {
                let v = mpe_check(&f, &g)?;
                let name = method_name(v.method);
                Ok((v, name))
            }
            "blackwell" => {
                let (v, _kernel) = match tol {
                    Some(t) => blackwell_check_tol(&f, &g, t)?,
                    None => blackwell_check(&f, &g)?,
                };
                let name = method_name(v.method);
                Ok((v, name))
            }
            "equiv" => {
                let fwd = lb_exact(&f, &g)?;
                let back = lb_exact(&g, &f)?;
                let holds = fwd.holds && back.holds;
                let (witness, margin) = if fwd.margin <= back.margin {
                    (fwd.witness, fwd.margin)
                } else {
                    (back.witness, back.margin)
                };
                let v = OrderVerdict {
                    holds,
                    witness,
                    margin,
                    method: fwd.method,
                };
                Ok((v, "equiv"))
            }
            other => unreachable!("order {other} is rejected by the parser"),
        }
    })();
    let (verdict, method) =
        checked.with_context(|| format!("comparing {path_a} with {path_b}"))?;
    emit_verdict(&verdict, method, order, (path_a, path_b), out, err)
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-9 {
            continue;
        }
        let mut b: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        // one representative per antipodal pair: first nonzero entry positive
        if b.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0) {
            for x in &mut b {
                *x = -*x;
            }
        }
        return b;
    }
}

fn cmd_zonoid(m: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let path = m.get_one::<String>("A").expect("required");
    let n_dirs = *m.get_one::<usize>("directions").expect("defaulted");
    let seed = *m.get_one::<u64>("seed").expect("defaulted");
    let f = formats::load_experiment(path)?;
    let n = f.n_states();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<serde_json::Value> = (0..n_dirs)
        .map(|_| {
            let b = unit_direction(&mut rng, n);
            let s = zonoid_support(&f, &b);
            json!({"direction": b, "support": s})
        })
        .collect();
    writeln!(out, "{}", json!({ "samples": samples }))?;
    writeln!(
        err,
        "{n_dirs} hemisphere directions sampled over {n} states of {path}"
    )?;
    Ok(0)
}

fn cmd_value(m: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let dp_path = m.get_one::<String>("DP").expect("required");
    let path = m.get_one::<String>("A").expect("required");
    let dp = formats::load_decision(dp_path)?;
    let f = formats::load_experiment(path)?;
    if dp.n_states() != f.n_states() {
        bail!(
            "decision problem {dp_path} has {} states but experiment {path} has {}",
            dp.n_states(),
            f.n_states()
        );
    }
    let prior = formats::parse_prior(
        m.get_one::<String>("prior").expect("defaulted"),
        f.n_states(),
    )?;
    let v = ex_ante_value(&dp, &f, &prior)?;
    writeln!(out, "{}", json!({ "value": v }))?;
    writeln!(err, "ex ante value {v:.9} of {dp_path} under {path}")?;
    Ok(0)
}

fn cmd_qcc(m: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let dp_path = m.get_one::<String>("DP").expect("required");
    let dp = formats::load_decision(dp_path)?;
    let (qcc, violation) = is_qcc(&dp);
    let lsc = is_lsc(&dp);
    let violation_json = violation.as_ref().map(|v| {
        json!({
            "triple": [v.triple.0, v.triple.1, v.triple.2],
            "belief": v.belief,
        })
    });
    writeln!(
        out,
        "{}",
        json!({"qcc": qcc, "lsc": lsc, "violation": violation_json})
    )?;
    match violation {
        None => writeln!(
            err,
            "{dp_path}: payoffs are quasi-concave along the action order (lsc: {lsc})"
        )?,
        Some(v) => writeln!(
            err,
            "{dp_path}: actions {:?} dip at belief {:?} (lsc: {lsc})",
            v.triple, v.belief
        )?,
    }
    Ok(0)
}

fn cmd_mh(m: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let env_path = m.get_one::<String>("ENV").expect("required");
    let path = m.get_one::<String>("A").expect("required");
    let env = formats::load_mh_env(env_path)?;
    let f = formats::load_experiment(path)?;
    let delta =
        formats::parse_float_list(m.get_one::<String>("target").expect("required"))
            .context("flag --target")?;
    let target = TargetAction::new(delta).context("flag --target")?;

    let ok = implementable(&env, &f, &target)
        .with_context(|| format!("solving {env_path} under {path}"))?;
    let outcome = min_disutility(&env, &f, &target)
        .with_context(|| format!("solving {env_path} under {path}"))?;
    let (disutility, scheme) = match &outcome {
        DisutilityOutcome::Attained(s) => (Some(s.disutility), Some(s.w.clone())),
        DisutilityOutcome::Unimplementable => (None, None),
    };
    let dual = match dual_solve(&env, &f, &target) {
        Ok(d) => Some(json!({"value": d.value, "lambda": d.lambda, "mu": d.mu})),
        Err(MoralHazardError::ZeroBaseDensity) => {
            writeln!(
                err,
                "dual bound unavailable: the target action puts zero probability on some signal"
            )?;
            None
        }
        Err(e) => {
            return Err(
                anyhow::Error::new(e).context(format!("solving {env_path} under {path}"))
            )
        }
    };
    writeln!(
        out,
        "{}",
        json!({
            "implementable": ok,
            "disutility": disutility,
            "scheme": scheme,
            "dual": dual,
        })
    )?;
    match disutility {
        Some(d) => writeln!(err, "target implementable under {path} at disutility {d:.9}")?,
        None => writeln!(err, "target not implementable under {path}")?,
    }
    Ok(0)
}

fn cmd_screen(m: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let env_path = m.get_one::<String>("ENV").expect("required");
    let path = m.get_one::<String>("A").expect("required");
    let env = formats::load_screen_env(env_path)?;
    let f = formats::load_experiment(path)?;
    match optimal_mechanism(&env, &f) {
        Ok((value, rule, transfers)) => {
            writeln!(
                out,
                "{}",
                json!({
                    "feasible": true,
                    "value": value,
                    "rule": rule.choice(),
                    "transfers": transfers.entries(),
                })
            )?;
            writeln!(
                err,
                "best mechanism under {path} earns {value:.9} with rule {:?}",
                rule.choice()
            )?;
            Ok(0)
        }
        Err(ScreeningError::NoFeasibleMechanism) => {
            writeln!(
                out,
                "{}",
                json!({
                    "feasible": false,
                    "value": null,
                    "rule": null,
                    "transfers": null,
                })
            )?;
            writeln!(err, "no allocation rule is implementable under {path}")?;
            Ok(0)
        }
        Err(e) => {
            Err(anyhow::Error::new(e).context(format!("solving {env_path} under {path}")))
        }
    }
}

fn cmd_transform(m: &ArgMatches, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let inputs: Vec<&String> = m.get_many::<String>("INPUT").expect("required").collect();
    let out_path = m.get_one::<String>("out").expect("required");
    let need = |k: usize| -> Result<()> {
        if inputs.len() != k {
            bail!(
                "this transform takes exactly {k} input experiment(s), got {}",
                inputs.len()
            );
        }
        Ok(())
    };
    let base = formats::load_experiment(inputs[0])?;
    let result = if m.get_flag("product") {
        need(2)?;
        let other = formats::load_experiment(inputs[1])?;
        product(&base, &other)
            .with_context(|| format!("combining {} with {}", inputs[0], inputs[1]))?
    } else if let Some(t_spec) = m.get_one::<String>("mix") {
        need(2)?;
        let t: f64 = t_spec
            .parse()
            .with_context(|| format!("flag --mix: cannot parse {t_spec:?} as a number"))?;
        let other = formats::load_experiment(inputs[1])?;
        mixture(&base, &other, t)
            .with_context(|| format!("combining {} with {}", inputs[0], inputs[1]))?
    } else if let Some(d_path) = m.get_one::<String>("dichotomy") {
        need(1)?;
        let d = formats::load_dichotomy(d_path, base.n_states())?;
        dichotomy_reduce(&base, &d)
            .with_context(|| format!("reducing {} by {d_path}", inputs[0]))?
    } else if let Some(k_path) = m.get_one::<String>("garble") {
        need(1)?;
        let k = formats::load_garbling(k_path)?;
        apply_garbling(&base, &k)
            .with_context(|| format!("garbling {} by {k_path}", inputs[0]))?
    } else {
        unreachable!("the mode group is required");
    };
    formats::write_experiment(&result, out_path)?;
    writeln!(
        out,
        "{}",
        json!({
            "out": out_path,
            "states": result.n_states(),
            "signals": result.n_signals(),
        })
    )?;
    writeln!(
        err,
        "wrote {out_path} ({} states, {} signals)",
        result.n_states(),
        result.n_signals()
    )?;
    Ok(0)
}
