use std::fs;
use std::path::Path;

use clap::ValueEnum;
use mvfix_core::{Approximable, Chain, Valuation};
use mvfix_games::io::SsgDoc;
use mvfix_games::Ssg;
use mvfix_models::io::{parse, LtsDoc, McDoc, MtsDoc, PaDoc, PairsDoc, ValuationDoc};
use mvfix_models::{MarkovChain, MetricTS, PairSpace, ProbAutomaton, TransitionSystem};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Markov chain, termination probability
    Mc,
    /// Metric transition system, behavioural distance
    Mts,
    /// Transition system, bisimilarity
    Lts,
    /// Probabilistic automaton, behavioural distance
    Pa,
    /// Simple stochastic game, values
    Ssg,
}

pub enum Model {
    Mc(MarkovChain),
    Mts(MetricTS),
    Lts(TransitionSystem),
    Pa(ProbAutomaton),
    Ssg(Ssg),
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn in_file<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

/// Picks the schema from the keys present unless `kind` is given.
pub fn detect(text: &str, path: &Path) -> Result<ModelKind, CliError> {
    let v: Value = serde_json::from_str(text).map_err(in_file(path))?;
    let has = |k: &str| v.get(k).is_some();
    Ok(if has("nodes") {
        ModelKind::Ssg
    } else if has("labels") {
        ModelKind::Pa
    } else if has("weights") {
        ModelKind::Mts
    } else if has("succ") {
        ModelKind::Lts
    } else {
        ModelKind::Mc
    })
}

pub fn load_model(path: &Path, kind: Option<ModelKind>) -> Result<Model, CliError> {
    let text = read(path)?;
    let kind = match kind {
        Some(k) => k,
        None => detect(&text, path)?,
    };
    Ok(match kind {
        ModelKind::Mc => Model::Mc(parse::<McDoc>(&text).and_then(|d| d.build()).map_err(in_file(path))?),
        ModelKind::Mts => Model::Mts(parse::<MtsDoc>(&text).and_then(|d| d.build()).map_err(in_file(path))?),
        ModelKind::Lts => Model::Lts(parse::<LtsDoc>(&text).and_then(|d| d.build()).map_err(in_file(path))?),
        ModelKind::Pa => Model::Pa(parse::<PaDoc>(&text).and_then(|d| d.build()).map_err(in_file(path))?),
        ModelKind::Ssg => Model::Ssg(mvfix_games::io::parse::<SsgDoc>(&text).and_then(|d| d.build()).map_err(in_file(path))?),
    })
}

impl Model {
    pub fn function(&self) -> &dyn Approximable {
        match self {
            Model::Mc(m) => m,
            Model::Mts(m) => m,
            Model::Lts(m) => m,
            Model::Pa(m) => m,
            Model::Ssg(m) => m,
        }
    }

    pub fn pair_space(&self) -> Option<&PairSpace> {
        match self {
            Model::Mts(m) => Some(m.space()),
            Model::Lts(m) => Some(m.space()),
            Model::Pa(m) => Some(m.space()),
            _ => None,
        }
    }

    pub fn chain(&self) -> Chain {
        match self {
            Model::Lts(_) => Chain::Bool,
            _ => Chain::Unit,
        }
    }

    /// Reads a candidate: `{pairs}` for relation-valued models, `{values}` otherwise.
    /// Absent pairs default to `default`, or to 1 (boolean) / 0 (unit).
    pub fn candidate(&self, path: &Path, default: Option<&str>) -> Result<Valuation, CliError> {
        let text = read(path)?;
        let e = in_file(path);
        let chain = self.chain();
        match self.pair_space() {
            Some(sp) => {
                let d = match default {
                    Some(s) => chain.parse(s).map_err(|err| CliError::Input(format!("--default-absent: {err}")))?,
                    None if chain == Chain::Bool => chain.one(),
                    None => chain.zero(),
                };
                Ok(parse::<PairsDoc>(&text).and_then(|doc| doc.build(sp, chain, &d)).map_err(e)?)
            }
            None => {
                let u = self.function().domain().clone();
                Ok(parse::<ValuationDoc>(&text).and_then(|doc| doc.build(&u, chain)).map_err(e)?)
            }
        }
    }

    /// JSON form of a valuation over this model's universe.
    pub fn valuation_json(&self, a: &Valuation) -> Value {
        match self.pair_space() {
            Some(_) => serde_json::to_value(PairsDoc::from_valuation(a)),
            None => serde_json::to_value(ValuationDoc::from_valuation(a)),
        }
        .expect("serialisable")
    }
}
