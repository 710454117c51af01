//! Command-line driver: compute, sweep, accinfo, holevo and verify.
//!
//! Exit codes are a stable contract: 0 pass, 1 suite failure, 2 usage or
//! input error, 3 I/O error. All floats in JSON and CSV output are rounded
//! to 12 significant digits so equal seeds give byte-identical output.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::entropy::{
    closed_form, BoundKind, Certificate, EntropyFunctional, EvalConfig, Evaluator,
};
use crate::error::{Error, Result};
use crate::gpt::{Ensemble, Model, State};
use crate::suites::{run_suite, Budget};

#[derive(Parser, Debug)]
#[command(
    name = "gpt-entropy",
    about = "Entropies, induced entropies, accessible information and Holevo bounds in GPT models",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    /// Budget preset: quick (restarts 16, iters 200) or full (64, 1000).
    #[arg(long, default_value = "quick")]
    pub budget: String,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Decomposition size bound (default: model dimension + 2).
    #[arg(long)]
    pub k: Option<usize>,
    /// Restrict the outermost induction to pure-state decompositions.
    #[arg(long)]
    pub pure_only: bool,
    /// Convergence tolerance in bits.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl BudgetArgs {
    fn config(&self, model: &Model) -> Result<EvalConfig> {
        let mut cfg = Budget::parse(&self.budget)?.config(model);
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(i) = self.iters {
            cfg.iters = i;
        }
        if let Some(k) = self.k {
            cfg.components_k = k;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        cfg.seed = self.seed;
        cfg.pure_only = self.pure_only;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate an entropy functional at a state.
    Compute {
        #[arg(long)]
        model: String,
        /// Comma-separated state coordinates.
        #[arg(long)]
        state: String,
        /// S1 | S2 | S3 | H | Sq, with a prime per induction (e.g. S2'').
        #[arg(long)]
        entropy: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Tabulate entropies over the squared-model grid into CSV.
    Sweep {
        #[arg(long, default_value = "squared")]
        model: String,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
        /// Comma-separated entropy names for the CSV columns.
        #[arg(long, default_value = "S1,S2,S3,S2'")]
        entropies: String,
        #[arg(long)]
        out: PathBuf,
        /// Evaluate numerically even where a closed form is registered.
        #[arg(long)]
        force_numerical: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Accessible information of an ensemble file.
    Accinfo {
        #[arg(long)]
        ensemble: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Holevo-type bound report for an ensemble file and a base entropy.
    Holevo {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        entropy: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "quick")]
        budget: String,
    },
}

/// JSON ensemble input: `{ "model": ..., "ensemble": [{ "p": ..., "state": [...] }] }`.
#[derive(Debug, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub model: String,
    pub ensemble: Vec<EnsembleMember>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub p: f64,
    pub state: Vec<f64>,
}

impl EnsembleFile {
    pub fn parse(text: &str) -> Result<(Model, Ensemble)> {
        let file: EnsembleFile = serde_json::from_str(text)
            .map_err(|e| Error::BadArgument(format!("malformed ensemble JSON: {e}")))?;
        if file.ensemble.is_empty() {
            return Err(Error::BadArgument("ensemble file has no members".into()));
        }
        let dim = file.ensemble[0].state.len();
        let model = Model::from_name(&file.model, dim)?;
        let weights = file.ensemble.iter().map(|m| m.p).collect();
        let states = file
            .ensemble
            .iter()
            .map(|m| State::new(m.state.clone()))
            .collect();
        let ens = Ensemble::new(&model, weights, states, false)?;
        Ok((model, ens))
    }
}

/// Rounds to 12 significant digits; the JSON/CSV serialization contract.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.11e}", x).parse().expect("round-trip")
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if n.is_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(sig12(x)) {
                        *v = Value::Number(rounded);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn print_rounded<T: Serialize>(t: &T) -> Result<()> {
    let mut v = serde_json::to_value(t)
        .map_err(|e| Error::BadArgument(format!("serialization failed: {e}")))?;
    round_json(&mut v);
    println!("{v}");
    Ok(())
}

fn parse_state(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadArgument(format!("bad coordinate '{t}'")))
        })
        .collect()
}

#[derive(Serialize)]
struct BudgetOut {
    restarts: usize,
    iters: usize,
    seed: u64,
    objective_evals: u64,
}

#[derive(Serialize)]
struct ComputeOut<'a> {
    model: &'a str,
    state: Vec<f64>,
    entropy: String,
    value: f64,
    bound_direction: BoundKind,
    certificate: &'a Certificate,
    budget: BudgetOut,
}

#[derive(Serialize)]
struct AccinfoOut<'a> {
    model: &'a str,
    i_acc: f64,
    bound_direction: BoundKind,
    certificate: &'a Certificate,
    budget: BudgetOut,
}

fn cmd_compute(model: &str, state: &str, entropy: &str, budget: &BudgetArgs) -> Result<()> {
    let coords = parse_state(state)?;
    let model = Model::from_name(model, coords.len())?;
    let f = EntropyFunctional::parse(entropy)?;
    let cfg = budget.config(&model)?;
    let s = State::new(coords.clone());
    let ev = Evaluator::new(model);
    let result = ev.evaluate(&f, &s, &cfg)?;
    print_rounded(&ComputeOut {
        model: model.name(),
        state: coords,
        entropy: f.to_string(),
        value: result.value,
        bound_direction: result.bound,
        certificate: &result.certificate,
        budget: BudgetOut {
            restarts: cfg.restarts,
            iters: cfg.iters,
            seed: cfg.seed,
            objective_evals: result.budget_used.objective_evals,
        },
    })
}

fn cmd_sweep(
    model_name: &str,
    grid_step: f64,
    entropies: &str,
    out: &PathBuf,
    force_numerical: bool,
    budget: &BudgetArgs,
) -> Result<()> {
    if model_name != "squared" {
        return Err(Error::BadArgument(format!(
            "sweep supports the squared model, got '{model_name}'"
        )));
    }
    let model = Model::Squared;
    if !(1e-4..=1.0).contains(&grid_step) {
        return Err(Error::BadArgument(format!("bad grid step {grid_step}")));
    }
    let n = (1.0 / grid_step).round() as usize;
    if ((n as f64) * grid_step - 1.0).abs() > 1e-9 {
        return Err(Error::BadArgument(format!(
            "grid step {grid_step} does not divide [0,1] evenly"
        )));
    }
    let names: Vec<String> = entropies.split(',').map(|s| s.trim().to_string()).collect();
    let functionals: Vec<EntropyFunctional> = names
        .iter()
        .map(|n| EntropyFunctional::parse(n))
        .collect::<Result<_>>()?;
    let cfg = budget.config(&model)?;

    let points: Vec<(f64, f64)> = (0..=n)
        .flat_map(|i| (0..=n).map(move |j| (i as f64 * grid_step, j as f64 * grid_step)))
        .collect();
    // One evaluator per row keeps output independent of scheduling.
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&(c1, c2)| {
            let s = State::new(vec![c1, c2]);
            let ev = Evaluator::new(model);
            functionals
                .iter()
                .map(|f| match closed_form(&model, f) {
                    Some(cf) if !force_numerical => cf(&s),
                    _ => ev.evaluate(f, &s, &cfg).expect("grid state is valid").value,
                })
                .collect()
        })
        .collect();

    let file = fs::File::create(out)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "c1,c2,{}", names.join(","))?;
    for ((c1, c2), values) in points.iter().zip(rows) {
        write!(w, "{},{}", sig12(*c1), sig12(*c2))?;
        for v in values {
            write!(w, ",{}", sig12(v))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_accinfo(path: &PathBuf, budget: &BudgetArgs) -> Result<()> {
    let text = fs::read_to_string(path)?;
    let (model, ens) = EnsembleFile::parse(&text)?;
    let cfg = budget.config(&model)?;
    let ev = Evaluator::new(model);
    let result = ev.accessible_information(&ens, &cfg)?;
    print_rounded(&AccinfoOut {
        model: model.name(),
        i_acc: result.value,
        bound_direction: result.bound,
        certificate: &result.certificate,
        budget: BudgetOut {
            restarts: cfg.restarts,
            iters: cfg.iters,
            seed: cfg.seed,
            objective_evals: result.budget_used.objective_evals,
        },
    })
}

fn cmd_holevo(path: &PathBuf, entropy: &str, budget: &BudgetArgs) -> Result<()> {
    let text = fs::read_to_string(path)?;
    let (model, ens) = EnsembleFile::parse(&text)?;
    let base = EntropyFunctional::parse(entropy)?;
    let cfg = budget.config(&model)?;
    let ev = Evaluator::new(model);
    let report = ev.holevo_report(&ens, &base, &cfg)?;
    print_rounded(&report)
}

fn cmd_verify(suite: &str, tol: Option<f64>, seed: u64, budget: &str) -> Result<bool> {
    let budget = Budget::parse(budget)?;
    let reports = run_suite(suite, budget, seed, tol)?;
    for report in &reports {
        for check in &report.checks {
            let status = if check.pass { "PASS" } else { "FAIL" };
            eprintln!(
                "[{status}] {}: {} (got {:.6}, expected {:.6}{})",
                report.suite,
                check.name,
                check.got,
                check.expected,
                match check.tolerance {
                    Some(t) => format!(", tol {t:.1e}"),
                    None => ", informational".to_string(),
                }
            );
        }
    }
    if reports.len() == 1 {
        print_rounded(&reports[0])?;
    } else {
        print_rounded(&reports)?;
    }
    Ok(reports.iter().all(|r| r.pass))
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome: Result<bool> = match &cli.command {
        Command::Compute {
            model,
            state,
            entropy,
            budget,
        } => cmd_compute(model, state, entropy, budget).map(|_| true),
        Command::Sweep {
            model,
            grid_step,
            entropies,
            out,
            force_numerical,
            budget,
        } => cmd_sweep(model, *grid_step, entropies, out, *force_numerical, budget).map(|_| true),
        Command::Accinfo { ensemble, budget } => cmd_accinfo(ensemble, budget).map(|_| true),
        Command::Holevo {
            ensemble,
            entropy,
            budget,
        } => cmd_holevo(ensemble, entropy, budget).map(|_| true),
        Command::Verify {
            suite,
            tol,
            seed,
            budget,
        } => cmd_verify(suite, *tol, *seed, budget),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_rounds_to_twelve_significant_digits() {
        assert_eq!(sig12(0.15000000000000002), 0.15);
        assert_eq!(sig12(1.0), 1.0);
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(0.7219280948873623), 0.721928094887);
        assert_eq!(sig12(-2.5000000000001e-13), -2.5e-13);
    }

    #[test]
    fn ensemble_file_round_trip() {
        let text = r#"{
            "model": "squared",
            "ensemble": [
                { "p": 0.5, "state": [1.0, 0.0] },
                { "p": 0.5, "state": [0.0, 1.0] }
            ]
        }"#;
        let (model, ens) = EnsembleFile::parse(text).unwrap();
        assert_eq!(model, Model::Squared);
        assert_eq!(ens.len(), 2);
        assert!(EnsembleFile::parse("{ not json").is_err());
        let bad = r#"{ "model": "squared", "ensemble": [ { "p": 0.9, "state": [0.1, 0.2] } ] }"#;
        assert!(EnsembleFile::parse(bad).is_err());
    }

    #[test]
    fn state_parsing() {
        assert_eq!(parse_state("0.5,0.5").unwrap(), vec![0.5, 0.5]);
        assert_eq!(parse_state("0, 0, 1").unwrap(), vec![0.0, 0.0, 1.0]);
        assert!(parse_state("0.5,x").is_err());
    }
}
