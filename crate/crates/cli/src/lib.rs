//! The `mvfix` command-line tool.

mod load;
mod report;
pub mod selftest;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use mvfix_core::proof::{
    certify_lower_bound, certify_upper_bound, improve_post_fixpoint, improve_pre_fixpoint, is_greatest_fixpoint, is_least_fixpoint,
};
use mvfix_core::{Certificate, MvValue, SubsetY, Valuation, Verdict};
use mvfix_games::io::SolutionDoc;
use mvfix_games::{Player, Strategy};
use mvfix_models::io::value_string;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub use load::{Model, ModelKind};
pub use report::{Format, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Proof(#[from] mvfix_core::ProofError),
    #[error(transparent)]
    Model(#[from] mvfix_models::ModelError),
    #[error(transparent)]
    Game(#[from] mvfix_games::GameError),
}

#[derive(Debug, Parser)]
#[command(name = "mvfix", version, about = "Certify bounds on fixpoints and solve stochastic games")]
pub struct Cli {
    /// Output format
    #[arg(long, value_enum, global = true, default_value = "table")]
    pub format: Format,
    /// Shorthand for `--format json`
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CandidateArgs {
    /// Model file
    pub model: PathBuf,
    /// Candidate valuation
    #[arg(long)]
    pub candidate: PathBuf,
    /// Override schema detection
    #[arg(long, value_enum)]
    pub model_kind: Option<ModelKind>,
    /// Value for pairs missing from the candidate
    #[arg(long)]
    pub default_absent: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toward {
    Least,
    Greatest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Sia,
    Sib,
    Ki,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is the candidate fixpoint the greatest one?
    CheckGfp(CandidateArgs),
    /// Is the candidate fixpoint the least one?
    CheckLfp(CandidateArgs),
    /// Does the pre-fixpoint candidate bound the greatest fixpoint from above?
    CertifyUpper(CandidateArgs),
    /// Does the post-fixpoint candidate bound the least fixpoint from below?
    CertifyLower(CandidateArgs),
    /// Jump from a non-extremal fixpoint
    Improve {
        #[command(flatten)]
        args: CandidateArgs,
        #[arg(long, value_enum, default_value = "least")]
        toward: Toward,
    },
    /// Termination probabilities of a Markov chain
    TermProb {
        chain: PathBuf,
    },
    /// Least behavioural distance of a metric transition system
    MtsDist {
        mts: PathBuf,
    },
    /// Certify that a pair of states is not bisimilar
    BisimWitness {
        ts: PathBuf,
        /// Pre-fixpoint relation with the pair set to 0
        relation: PathBuf,
        #[arg(long)]
        pair: String,
        #[arg(long)]
        default_absent: Option<String>,
    },
    /// Behavioural distance of a probabilistic automaton
    PaDist {
        pa: PathBuf,
    },
    /// Values of a simple stochastic game
    SsgSolve {
        game: PathBuf,
        #[arg(long, value_enum, default_value = "sia")]
        method: Method,
        /// Step tolerance for value iteration
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Random initial strategies instead of lowest-id ones
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the bundled example corpus
    Selftest,
}

pub struct Outcome {
    pub code: u8,
    pub text: String,
}

/// Certificates as emitted by the checking commands.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub verdict: String,
    pub witness: Vec<String>,
    pub theta: Option<String>,
    pub note: Option<String>,
}

impl CertificateDoc {
    pub fn new(c: &Certificate) -> CertificateDoc {
        CertificateDoc {
            verdict: c.verdict.to_string(),
            witness: c.witness.names(),
            theta: c.theta.as_ref().map(value_string),
            note: c.note.clone(),
        }
    }
}

fn certificate_report(c: &Certificate) -> (u8, Report) {
    let doc = CertificateDoc::new(c);
    let mut r = Report::new(serde_json::to_value(&doc).expect("serialisable"), &["field", "value"])
        .row(["verdict", doc.verdict.as_str()])
        .row(["witness".to_string(), format!("{{{}}}", doc.witness.join("; "))]);
    if let Some(t) = &doc.theta {
        r = r.row(["theta", t.as_str()]);
    }
    if let Some(n) = &doc.note {
        r = r.row(["note", n.as_str()]);
    }
    (if c.verdict == Verdict::Certified { 0 } else { 1 }, r)
}

fn valuation_report(model: &Model, a: &Valuation) -> Report {
    let mut r = Report::new(model.valuation_json(a), &["element", "value"]);
    for (k, v) in a.entries() {
        r = r.row([k.to_string(), value_string(v)]);
    }
    r
}

fn witness_names(s: &SubsetY) -> String {
    format!("{{{}}}", s.names().join("; "))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let format = if cli.json { Format::Json } else { cli.format };
    let (code, report) = dispatch(&cli.command)?;
    Ok(Outcome { code, text: report.render(format) })
}

fn check(args: &CandidateArgs, rule: fn(&Model, &Valuation) -> Result<Certificate, mvfix_core::ProofError>) -> Result<(u8, Report), CliError> {
    let model = load::load_model(&args.model, args.model_kind)?;
    let a = model.candidate(&args.candidate, args.default_absent.as_deref())?;
    Ok(certificate_report(&rule(&model, &a)?))
}

fn dispatch(cmd: &Command) -> Result<(u8, Report), CliError> {
    match cmd {
        Command::CheckGfp(args) => check(args, |m, a| is_greatest_fixpoint(m.function(), a)),
        Command::CheckLfp(args) => check(args, |m, a| is_least_fixpoint(m.function(), a)),
        Command::CertifyUpper(args) => check(args, |m, a| certify_upper_bound(m.function(), a)),
        Command::CertifyLower(args) => check(args, |m, a| certify_lower_bound(m.function(), a)),
        Command::Improve { args, toward } => {
            let model = load::load_model(&args.model, args.model_kind)?;
            let a = model.candidate(&args.candidate, args.default_absent.as_deref())?;
            let jump = match toward {
                Toward::Least => improve_pre_fixpoint(model.function(), &a),
                Toward::Greatest => improve_post_fixpoint(model.function(), &a),
            };
            match jump {
                Ok(j) => {
                    let mut r = valuation_report(&model, &j.value);
                    r.json = json!({
                        "value": model.valuation_json(&j.value),
                        "theta": value_string(&j.theta),
                        "witness": j.witness.names(),
                    });
                    Ok((0, r.footer("theta", value_string(&j.theta)).footer("witness", witness_names(&j.witness))))
                }
                Err(e) => Ok((1, Report::new(json!({ "error": e.to_string() }), &["field", "value"]).row(["no jump".to_string(), e.to_string()]))),
            }
        }
        Command::TermProb { chain } => {
            let model = load::load_model(chain, Some(ModelKind::Mc))?;
            let Model::Mc(mc) = &model else { unreachable!() };
            let run = mc.term_prob_via_jumps()?;
            let exact = mc.term_prob_exact();
            if run.value != exact {
                return Err(CliError::Input("jump iteration disagrees with the linear solve".into()));
            }
            Ok((0, valuation_report(&model, &exact).footer("jumps", run.jumps.to_string())))
        }
        Command::MtsDist { mts } => {
            let model = load::load_model(mts, Some(ModelKind::Mts))?;
            let Model::Mts(m) = &model else { unreachable!() };
            let mu = m.least_fixpoint()?;
            Ok((0, valuation_report(&model, &mu)))
        }
        Command::BisimWitness { ts, relation, pair, default_absent } => {
            let model = load::load_model(ts, Some(ModelKind::Lts))?;
            let Model::Lts(t) = &model else { unreachable!() };
            let a = model.candidate(relation, default_absent.as_deref())?;
            let k = t.space().pair_named(pair).map_err(|e| CliError::Input(format!("--pair: {e}")))?;
            Ok(certificate_report(&t.witness_nonbisim(&a, k)?))
        }
        Command::PaDist { pa } => {
            let model = load::load_model(pa, Some(ModelKind::Pa))?;
            let Model::Pa(p) = &model else { unreachable!() };
            let run = p.distance()?;
            Ok((0, valuation_report(&model, &run.value).footer("jumps", run.jumps.to_string())))
        }
        Command::SsgSolve { game, method, tol, seed } => {
            let model = load::load_model(game, Some(ModelKind::Ssg))?;
            let Model::Ssg(g) = &model else { unreachable!() };
            let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
            let mut init = |p: Player| match rng.as_mut() {
                Some(r) => Strategy::random(g, p, r),
                None => Strategy::lowest(g, p),
            };
            let sol = match method {
                Method::Ki => {
                    let k = mvfix_games::kleene_value_iteration(g, *tol)?;
                    let names = g.nodes().names();
                    let mut r = Report::new(
                        json!({
                            "values": names.iter().zip(&k.values).map(|(n, v)| (n.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
                            "iterations": k.iterations,
                        }),
                        &["node", "kind", "value"],
                    );
                    for (v, x) in k.values.iter().enumerate() {
                        r = r.row([names[v].clone(), g.node(v).kind().to_string(), format!("{x:.12}")]);
                    }
                    return Ok((0, r.footer("iterations", k.iterations.to_string())));
                }
                Method::Sia => {
                    let tau = init(Player::Min);
                    mvfix_games::strategy_iteration_above(g, &tau)?
                }
                Method::Sib => {
                    let sigma = init(Player::Max);
                    mvfix_games::strategy_iteration_below(g, &sigma)?
                }
            };
            let doc = SolutionDoc::from_solution(g, &sol);
            let mut r = Report::new(serde_json::to_value(&doc).expect("serialisable"), &["node", "kind", "value", "choice"]);
            for v in 0..g.len() {
                let choice = sol.min.get(v).or(sol.max.get(v)).map_or(String::new(), |c| g.nodes().name(c).to_string());
                let val = value_string(&MvValue::Unit(sol.values.get(v).to_rational()));
                r = r.row([g.nodes().name(v).to_string(), g.node(v).kind().to_string(), val, choice]);
            }
            let s = sol.stats;
            Ok((0, r.footer("iterations", s.iterations.to_string()).footer("jumps", s.jumps.to_string()).footer("lp_calls", s.lp_calls.to_string())))
        }
        Command::Selftest => {
            let results = selftest::run_all();
            let ok = results.iter().all(|c| c.passed);
            let mut r = Report::new(serde_json::to_value(&results).expect("serialisable"), &["check", "result", "detail"]);
            for c in &results {
                r = r.row([c.name.clone(), if c.passed { "PASS" } else { "FAIL" }.to_string(), c.detail.clone()]);
            }
            Ok((if ok { 0 } else { 1 }, r))
        }
    }
}
