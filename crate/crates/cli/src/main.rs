//! `cloneprob` — command-line front end for the probabilistic cloning analyses.
//!
//! Exit status: 0 for a feasible/positive verdict, 1 for a negative verdict,
//! 2 for usage or input-validation errors.

mod input;
mod output;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use cloneprob::feasibility::{check, feasible_any_flags, MachineSpec, SearchConfig};
use cloneprob::gram::realize_with;
use cloneprob::symmetric::{gap_certificate, lemma1_demo_with_tol, scenario1_lower, GapInstance};
use cloneprob::twostate::{
    boundary_curve, decompose, discrimination_limit, equal_prior_closed_form, gamma_totmax_2,
    TwoStateProblem,
};
use cloneprob::{Tolerances, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::parse_complex;
use crate::output::{fmt_sig, to_json, to_text, MACHINE_DIGITS};

#[derive(Parser)]
#[command(name = "cloneprob", version, about = "Feasibility and optimal success probabilities of probabilistic cloning machines")]
struct Cli {
    /// Relative tolerance for positive-semidefiniteness verdicts.
    #[arg(long, global = true, env = "CLONEPROB_TOL_PSD", default_value_t = 1e-9)]
    tol_psd: f64,
    /// Relative tolerance for null-space extraction.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_null: f64,
    /// Output format; `region` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for the random flag-Gram search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a machine with the given success probabilities exists.
    Feasible(FeasibleArgs),
    /// Trace the boundary of the achievable two-state (γ₁, γ₂) region.
    #[command(allow_negative_numbers = true)]
    Region {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Number of boundary segments (emits steps+1 points).
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Maximize the prior-weighted total success probability for two states.
    #[command(allow_negative_numbers = true)]
    Optimize {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Prior of the first state (overrides the problem file).
        #[arg(long)]
        p1: Option<f64>,
    },
    /// Split a two-state target into Bob's and Alice's machines.
    #[command(allow_negative_numbers = true)]
    Decompose {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        g1: f64,
        #[arg(long)]
        g2: f64,
    },
    /// Certify the one-way communication gap on a symmetric family.
    Gap(SymmetricArgs),
    /// Emit the machine witnessing the classical-communication lower bound.
    Witness(SymmetricArgs),
    /// Factor a Gram matrix into explicit state vectors.
    Realize {
        #[arg(long, value_name = "FILE")]
        gram: PathBuf,
    },
    /// Show that the supplements alone cannot yield the extra copies.
    #[command(allow_negative_numbers = true)]
    Lemma1 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u32,
        /// Modulus of the pairwise overlap of the original states.
        #[arg(long)]
        alpha: f64,
        /// Pairwise overlap of the supplements (default −1/(n−1)).
        #[arg(long)]
        beta: Option<f64>,
    },
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["machine", "inputs"])))]
struct FeasibleArgs {
    /// Complete machine description (input, output and flag Grams plus gammas).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["inputs", "outputs", "gammas", "flags"])]
    machine: Option<PathBuf>,
    /// Input states or their Gram matrix.
    #[arg(long, value_name = "FILE", requires_all = ["outputs", "gammas"])]
    inputs: Option<PathBuf>,
    /// Output states or their Gram matrix.
    #[arg(long, value_name = "FILE")]
    outputs: Option<PathBuf>,
    /// Success probabilities, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gammas: Vec<f64>,
    /// Flag states or Gram; searched over when omitted.
    #[arg(long, value_name = "FILE")]
    flags: Option<PathBuf>,
    /// Random flag Grams tried for three or more states.
    #[arg(long, default_value_t = 200)]
    iterations: usize,
}

#[derive(Args)]
struct ProblemArgs {
    /// Two-state problem file; replaces --alpha/--beta/--m.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["alpha", "beta", "m"])]
    problem: Option<PathBuf>,
    /// Overlap of the original states, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    alpha: Option<C64>,
    /// Overlap of the supplementary states, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    beta: Option<C64>,
    /// Number of copies requested.
    #[arg(long)]
    m: Option<u32>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SymmetricArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: u32,
    /// Modulus of the pairwise overlap of the original states.
    #[arg(long)]
    alpha: f64,
}

/// A failure that stops a command, carrying its exit status.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<cloneprob::Error> for CliError {
    fn from(e: cloneprob::Error) -> Self {
        let code = match e {
            cloneprob::Error::Infeasible(_) | cloneprob::Error::Consistency(_) => 1,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize to JSON")
}

/// What a command produced: a structured value, an optional CSV rendering
/// and the exit status implied by its verdict.
struct Outcome {
    value: Value,
    csv: Option<String>,
    code: u8,
}

impl Outcome {
    fn verdict(value: Value, ok: bool) -> Self {
        Outcome {
            value,
            csv: None,
            code: if ok { 0 } else { 1 },
        }
    }
}

struct Ctx {
    tol: Tolerances,
    seed: u64,
}

impl ProblemArgs {
    fn resolve(&self, p1: Option<f64>) -> Result<TwoStateProblem, CliError> {
        let problem = match &self.problem {
            Some(path) => input::read_typed::<TwoStateProblem>(path)?,
            None => {
                let missing: Vec<&str> = [
                    ("--alpha", self.alpha.is_none()),
                    ("--beta", self.beta.is_none()),
                    ("--m", self.m.is_none()),
                ]
                .into_iter()
                .filter_map(|(name, absent)| absent.then_some(name))
                .collect();
                if !missing.is_empty() {
                    return Err(CliError::usage(format!(
                        "missing {} (or pass --problem FILE)",
                        missing.join(", ")
                    )));
                }
                TwoStateProblem::new(self.alpha.unwrap(), self.beta.unwrap(), self.m.unwrap(), [0.5, 0.5])?
            }
        };
        match p1 {
            None => Ok(problem),
            Some(p1) => {
                if !(0.0..=1.0).contains(&p1) {
                    return Err(CliError::usage(format!("--p1 must lie in [0, 1], got {p1}")));
                }
                // only the moduli enter the optimization
                Ok(TwoStateProblem::new(
                    C64::new(problem.alpha_abs(), 0.0),
                    C64::new(problem.beta_abs(), 0.0),
                    problem.m(),
                    [p1, 1.0 - p1],
                )?)
            }
        }
    }
}

fn cmd_feasible(args: &FeasibleArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let tol = &ctx.tol;
    let report = if let Some(path) = &args.machine {
        check(&input::read_machine(path, tol)?, tol.psd)
    } else {
        let inputs = args.inputs.as_ref().expect("clap enforces the source group");
        let outputs = args.outputs.as_ref().expect("clap requires --outputs with --inputs");
        let x = input::read_gram_or_states(inputs, tol)?;
        let y = input::read_gram_or_states(outputs, tol)?;
        match &args.flags {
            Some(path) => {
                let f = input::read_gram_or_states(path, tol)?;
                check(&MachineSpec::new(x, y, args.gammas.clone(), f)?, tol.psd)
            }
            None => {
                let cfg = SearchConfig {
                    tol_psd: tol.psd,
                    iterations: args.iterations,
                    seed: ctx.seed,
                    ..SearchConfig::default()
                };
                feasible_any_flags(&x, &y, &args.gammas, &cfg)?
            }
        }
    };
    Ok(Outcome::verdict(to_value(&report), report.feasible))
}

fn cmd_region(problem: &ProblemArgs, steps: usize) -> Result<Outcome, CliError> {
    if steps < 2 {
        return Err(CliError::usage(format!("--steps must be at least 2, got {steps}")));
    }
    let region = problem.resolve(None)?.region();
    let mut csv = String::from("gamma1,gamma2\n");
    let value = if region.is_deterministic() {
        csv.push_str("deterministic\n");
        json!({
            "deterministic": true,
            "eta_in": region.eta_in,
            "eta_out": region.eta_out,
            "points": [],
        })
    } else {
        let points = boundary_curve(&region, steps);
        for [g1, g2] in &points {
            let _ = writeln!(csv, "{},{}", fmt_sig(*g1, MACHINE_DIGITS), fmt_sig(*g2, MACHINE_DIGITS));
        }
        json!({
            "deterministic": false,
            "eta_in": region.eta_in,
            "eta_out": region.eta_out,
            "max_gamma1": region.max_gamma1(),
            "points": points,
        })
    };
    Ok(Outcome {
        value,
        csv: Some(csv),
        code: 0,
    })
}

fn cmd_optimize(problem: &ProblemArgs, p1: Option<f64>) -> Result<Outcome, CliError> {
    let p = problem.resolve(p1)?;
    let (best, argmax) = gamma_totmax_2(&p);
    let region = p.region();
    let mut value = json!({
        "gamma_totmax": best,
        "argmax": argmax,
        "priors": p.priors(),
        "eta_in": region.eta_in,
        "eta_out": region.eta_out,
        "deterministic": region.is_deterministic(),
        "discrimination_limit": discrimination_limit(&p),
    });
    if p.priors()[0] == p.priors()[1] {
        value["equal_prior_closed_form"] = json!(equal_prior_closed_form(&p));
    }
    Ok(Outcome::verdict(value, true))
}

fn cmd_decompose(problem: &ProblemArgs, g1: f64, g2: f64) -> Result<Outcome, CliError> {
    let p = problem.resolve(None)?;
    match decompose(&p, g1, g2) {
        Ok(d) => Ok(Outcome::verdict(to_value(&d), true)),
        Err(e @ cloneprob::Error::Infeasible(_)) => {
            eprintln!("cloneprob: {e}");
            Ok(Outcome::verdict(
                json!({ "feasible": false, "target": [g1, g2], "reason": e.to_string() }),
                false,
            ))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_gap(args: &SymmetricArgs) -> Result<Outcome, CliError> {
    let cert = gap_certificate(&GapInstance::new(args.n, args.m, args.alpha)?)?;
    Ok(Outcome::verdict(to_value(&cert), cert.positive))
}

fn cmd_witness(args: &SymmetricArgs) -> Result<Outcome, CliError> {
    let w = scenario1_lower(&GapInstance::new(args.n, args.m, args.alpha)?)?;
    let mut value = to_value(&w.witness);
    // extra keys are ignored when the file is fed back to `feasible --machine`
    value["bound"] = json!(w.bound);
    value["total"] = json!(w.total);
    value["feasible"] = json!(w.report.feasible);
    value["min_eigenvalue"] = json!(w.report.min_eigenvalue);
    Ok(Outcome::verdict(value, w.report.feasible))
}

fn cmd_realize(path: &Path, ctx: &Ctx) -> Result<Outcome, CliError> {
    let g = input::read_gram(path, &ctx.tol)?;
    let states = realize_with(&g, &ctx.tol)?;
    Ok(Outcome::verdict(to_value(&states), true))
}

fn cmd_lemma1(n: usize, m: u32, alpha: f64, beta: Option<f64>, ctx: &Ctx) -> Result<Outcome, CliError> {
    let beta = beta.unwrap_or(-1.0 / (n as f64 - 1.0));
    let report = lemma1_demo_with_tol(n, m, alpha, beta, ctx.tol.null)?;
    Ok(Outcome::verdict(to_value(&report), report.all_killed))
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    for (name, v) in [("--tol-psd", cli.tol_psd), ("--tol-null", cli.tol_null)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::usage(format!("{name} must be a positive number, got {v}")));
        }
    }
    let ctx = Ctx {
        tol: Tolerances {
            psd: cli.tol_psd,
            null: cli.tol_null,
            ..Tolerances::default()
        },
        seed: cli.seed,
    };
    match &cli.command {
        Command::Feasible(args) => cmd_feasible(args, &ctx),
        Command::Region { problem, steps } => cmd_region(problem, *steps),
        Command::Optimize { problem, p1 } => cmd_optimize(problem, *p1),
        Command::Decompose { problem, g1, g2 } => cmd_decompose(problem, *g1, *g2),
        Command::Gap(args) => cmd_gap(args),
        Command::Witness(args) => cmd_witness(args),
        Command::Realize { gram } => cmd_realize(gram, &ctx),
        Command::Lemma1 { n, m, alpha, beta } => cmd_lemma1(*n, *m, *alpha, *beta, &ctx),
    }
}

fn render(cli: &Cli, outcome: &Outcome) -> Result<String, CliError> {
    let is_region = matches!(cli.command, Command::Region { .. });
    let format = cli.format.unwrap_or(if is_region { Format::Csv } else { Format::Json });
    match format {
        Format::Json => to_json(&outcome.value).map_err(|e| CliError::usage(e.to_string())),
        Format::Text => Ok(to_text(&outcome.value)),
        Format::Csv => outcome
            .csv
            .clone()
            .ok_or_else(|| CliError::usage("--format csv is only available for `region`")),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::usage(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| {
        let text = render(&cli, &outcome)?;
        emit(&cli, &text)?;
        Ok(outcome.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cloneprob: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
