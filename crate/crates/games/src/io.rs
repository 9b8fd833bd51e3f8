//! JSON schema (version `v1`) for games and their solutions.

use std::collections::BTreeMap;

use mvfix_core::mv::{format_rational, parse_rational};
use mvfix_core::{Distribution, Rational, Universe};
use serde::{Deserialize, Serialize};

use crate::model::{Node, Player, Ssg, Strategy};
use crate::{GameError, Solution, Stats};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub succ: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
}

/// `{nodes: [{id, kind: "min"|"max"|"av"|"sink", succ | dist | weight}]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SsgDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub nodes: Vec<NodeDoc>,
}

fn rational(field: &str, s: &str) -> Result<Rational, GameError> {
    parse_rational(s).map_err(|_| GameError::invalid(field, format!("`{s}` is not a rational")))
}

fn node(u: &Universe, field: &str, name: &str) -> Result<usize, GameError> {
    u.index_of(name).ok_or_else(|| GameError::invalid(field, format!("unknown node `{name}`")))
}

impl SsgDoc {
    pub fn build(&self) -> Result<Ssg, GameError> {
        match self.version.as_deref() {
            None | Some(SCHEMA_VERSION) => {}
            Some(v) => return Err(GameError::invalid("version", format!("unsupported schema version `{v}`"))),
        }
        let u = Universe::shared(self.nodes.iter().map(|n| n.id.clone())).map_err(|e| GameError::invalid("nodes", e.to_string()))?;
        let mut kinds = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let field = format!("nodes[{i}]");
            let extra = |name: &str, present: bool| -> Result<(), GameError> {
                if present {
                    return Err(GameError::invalid(format!("{field}.{name}"), format!("not allowed on a {} node", n.kind)));
                }
                Ok(())
            };
            let succ = |f: &str| -> Result<Vec<usize>, GameError> {
                let s = n.succ.as_ref().ok_or_else(|| GameError::invalid(format!("{f}.succ"), "missing successors"))?;
                s.iter().map(|x| node(&u, &format!("{f}.succ"), x)).collect()
            };
            let k = match n.kind.as_str() {
                "min" | "max" => {
                    extra("dist", n.dist.is_some())?;
                    extra("weight", n.weight.is_some())?;
                    let s = succ(&field)?;
                    if n.kind == "min" { Node::Min(s) } else { Node::Max(s) }
                }
                "av" => {
                    extra("succ", n.succ.is_some())?;
                    extra("weight", n.weight.is_some())?;
                    let f = format!("{field}.dist");
                    let d = n.dist.as_ref().ok_or_else(|| GameError::invalid(&f, "missing distribution"))?;
                    let mut entries = Vec::with_capacity(d.len());
                    for (k, p) in d {
                        entries.push((node(&u, &f, k)?, rational(&format!("{f}.{k}"), p)?));
                    }
                    Node::Av(Distribution::new(entries).map_err(|e| GameError::invalid(&f, e.to_string()))?)
                }
                "sink" => {
                    extra("succ", n.succ.is_some())?;
                    extra("dist", n.dist.is_some())?;
                    let f = format!("{field}.weight");
                    let w = n.weight.as_ref().ok_or_else(|| GameError::invalid(&f, "missing weight"))?;
                    Node::Sink(rational(&f, w)?)
                }
                other => return Err(GameError::invalid(format!("{field}.kind"), format!("unknown kind `{other}`"))),
            };
            kinds.push(k);
        }
        Ssg::new(&u, kinds)
    }

    pub fn from_model(g: &Ssg) -> SsgDoc {
        let u = g.nodes();
        let names = |s: &[usize]| s.iter().map(|&v| u.name(v).to_string()).collect();
        let nodes = g
            .kinds()
            .iter()
            .enumerate()
            .map(|(v, k)| {
                let mut d = NodeDoc { id: u.name(v).to_string(), kind: k.kind().into(), succ: None, dist: None, weight: None };
                match k {
                    Node::Min(s) | Node::Max(s) => d.succ = Some(names(s)),
                    Node::Av(p) => {
                        d.dist = Some(p.entries().iter().map(|(x, w)| (u.name(*x).to_string(), format_rational(w))).collect())
                    }
                    Node::Sink(w) => d.weight = Some(format_rational(w)),
                }
                d
            })
            .collect();
        SsgDoc { version: Some(SCHEMA_VERSION.into()), nodes }
    }
}

/// `{v: succ}` for the owned nodes of a strategy.
pub fn strategy_doc(g: &Ssg, s: &Strategy) -> BTreeMap<String, String> {
    s.choices().map(|(v, c)| (g.nodes().name(v).to_string(), g.nodes().name(c).to_string())).collect()
}

/// Reads a strategy from `{v: succ}`; nodes not listed keep `base`'s choice.
pub fn strategy_from_doc(g: &Ssg, base: &Strategy, m: &BTreeMap<String, String>) -> Result<Strategy, GameError> {
    let mut s = base.clone();
    for (v, c) in m {
        let field = format!("strategy.{v}");
        s = s.with(g, node(g.nodes(), &field, v)?, node(g.nodes(), &field, c)?)?;
    }
    Ok(s)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct StrategyDoc {
    pub min: BTreeMap<String, String>,
    pub max: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct StatsDoc {
    pub iterations: usize,
    pub jumps: usize,
    pub lp_calls: usize,
}

/// `{values: {id: "p/q"}, strategy: {min, max}, stats}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SolutionDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub values: BTreeMap<String, String>,
    pub strategy: StrategyDoc,
    pub stats: StatsDoc,
}

impl SolutionDoc {
    pub fn from_solution(g: &Ssg, s: &Solution) -> SolutionDoc {
        let Stats { iterations, jumps, lp_calls } = s.stats;
        SolutionDoc {
            version: Some(SCHEMA_VERSION.into()),
            values: s.values.entries().map(|(k, v)| (k.to_string(), format_rational(&v.to_rational()))).collect(),
            strategy: StrategyDoc { min: strategy_doc(g, &s.min), max: strategy_doc(g, &s.max) },
            stats: StatsDoc { iterations, jumps, lp_calls },
        }
    }
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, GameError> {
    Ok(serde_json::from_str(text)?)
}

pub fn player(name: &str) -> Result<Player, GameError> {
    match name {
        "min" => Ok(Player::Min),
        "max" => Ok(Player::Max),
        other => Err(GameError::invalid("player", format!("unknown player `{other}`"))),
    }
}
