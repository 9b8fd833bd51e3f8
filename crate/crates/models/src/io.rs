//! JSON schemas (version `v1`) for models, distance matrices and valuations.
//!
//! Rationals are written as strings `"p/q"`; integers and finite decimals
//! are also accepted on input.

use std::collections::BTreeMap;
use std::sync::Arc;

use mvfix_core::mv::{format_rational, parse_rational};
use mvfix_core::{Chain, Distribution, MvValue, Rational, SubsetY, Universe, Valuation};
use serde::{Deserialize, Serialize};

use crate::pairs::PairSpace;
use crate::{MarkovChain, MetricTS, ModelError, ProbAutomaton, TransitionSystem};

pub const SCHEMA_VERSION: &str = "v1";

fn check_version(v: &Option<String>) -> Result<(), ModelError> {
    match v.as_deref() {
        None | Some(SCHEMA_VERSION) => Ok(()),
        Some(other) => Err(ModelError::invalid("version", format!("unsupported schema version `{other}`"))),
    }
}

fn rational(field: &str, s: &str) -> Result<Rational, ModelError> {
    parse_rational(s).map_err(|_| ModelError::invalid(field, format!("`{s}` is not a rational")))
}

fn state(u: &Universe, field: &str, name: &str) -> Result<usize, ModelError> {
    u.index_of(name).ok_or_else(|| ModelError::invalid(field, format!("unknown state `{name}`")))
}

fn distribution(u: &Universe, field: &str, m: &BTreeMap<String, String>) -> Result<Distribution, ModelError> {
    let mut entries = Vec::with_capacity(m.len());
    for (k, v) in m {
        entries.push((state(u, field, k)?, rational(&format!("{field}.{k}"), v)?));
    }
    Distribution::new(entries).map_err(|e| ModelError::invalid(field, e.to_string()))
}

fn dist_doc(u: &Universe, d: &Distribution) -> BTreeMap<String, String> {
    d.entries().iter().map(|(i, w)| (u.name(*i).to_string(), format_rational(w))).collect()
}

fn universe(states: &[String]) -> Result<Arc<Universe>, ModelError> {
    Universe::shared(states.iter().cloned()).map_err(|e| ModelError::invalid("states", e.to_string()))
}

fn succ_lists(u: &Universe, field: &str, m: &BTreeMap<String, Vec<String>>) -> Result<Vec<Vec<usize>>, ModelError> {
    let mut out = vec![Vec::new(); u.len()];
    for (k, vs) in m {
        let s = state(u, field, k)?;
        out[s] = vs.iter().map(|v| state(u, &format!("{field}.{k}"), v)).collect::<Result<_, _>>()?;
    }
    Ok(out)
}

/// `{states, terminal, dist: {s: {s′: "p/q"}}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct McDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub states: Vec<String>,
    #[serde(default)]
    pub terminal: Vec<String>,
    #[serde(default)]
    pub dist: BTreeMap<String, BTreeMap<String, String>>,
}

impl McDoc {
    pub fn build(&self) -> Result<MarkovChain, ModelError> {
        check_version(&self.version)?;
        let u = universe(&self.states)?;
        let terminal = SubsetY::from_indices(&u, self.terminal.iter().map(|t| state(&u, "terminal", t)).collect::<Result<Vec<_>, _>>()?);
        let mut eta = vec![None; u.len()];
        for (s, m) in &self.dist {
            let field = format!("dist.{s}");
            eta[state(&u, "dist", s)?] = Some(distribution(&u, &field, m)?);
        }
        MarkovChain::new(&u, terminal, eta)
    }

    pub fn from_model(mc: &MarkovChain) -> McDoc {
        let u = mc.states();
        McDoc {
            version: Some(SCHEMA_VERSION.into()),
            states: u.names().to_vec(),
            terminal: mc.terminal().names(),
            dist: (0..u.len()).filter_map(|s| mc.eta(s).map(|d| (u.name(s).to_string(), dist_doc(u, d)))).collect(),
        }
    }
}

/// `{states, weights: {s: "p/q"}, succ: {s: [s′]}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MtsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub states: Vec<String>,
    pub weights: BTreeMap<String, String>,
    #[serde(default)]
    pub succ: BTreeMap<String, Vec<String>>,
}

impl MtsDoc {
    pub fn build(&self) -> Result<MetricTS, ModelError> {
        check_version(&self.version)?;
        let u = universe(&self.states)?;
        let mut w = Vec::with_capacity(u.len());
        for s in u.names() {
            let v = self.weights.get(s).ok_or_else(|| ModelError::invalid(format!("weights.{s}"), "missing weight"))?;
            w.push(rational(&format!("weights.{s}"), v)?);
        }
        if let Some(k) = self.weights.keys().find(|k| u.index_of(k).is_none()) {
            return Err(ModelError::invalid("weights", format!("unknown state `{k}`")));
        }
        MetricTS::new(&u, w, succ_lists(&u, "succ", &self.succ)?)
    }
}

/// `{states, succ: {s: [s′]}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LtsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub states: Vec<String>,
    #[serde(default)]
    pub succ: BTreeMap<String, Vec<String>>,
}

impl LtsDoc {
    pub fn build(&self) -> Result<TransitionSystem, ModelError> {
        check_version(&self.version)?;
        let u = universe(&self.states)?;
        TransitionSystem::new(&u, succ_lists(&u, "succ", &self.succ)?)
    }
}

/// `{states, labels, ell: {s: label}, dists: {s: [{s′: "p/q"}]}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PaDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub states: Vec<String>,
    pub labels: Vec<String>,
    pub ell: BTreeMap<String, String>,
    #[serde(default)]
    pub dists: BTreeMap<String, Vec<BTreeMap<String, String>>>,
}

impl PaDoc {
    pub fn build(&self) -> Result<ProbAutomaton, ModelError> {
        check_version(&self.version)?;
        let u = universe(&self.states)?;
        let labels = Universe::shared(self.labels.iter().cloned()).map_err(|e| ModelError::invalid("labels", e.to_string()))?;
        let mut ell = Vec::with_capacity(u.len());
        for s in u.names() {
            let l = self.ell.get(s).ok_or_else(|| ModelError::invalid(format!("ell.{s}"), "missing label"))?;
            ell.push(labels.index_of(l).ok_or_else(|| ModelError::invalid(format!("ell.{s}"), format!("unknown label `{l}`")))?);
        }
        let mut eta = vec![Vec::new(); u.len()];
        for (s, ds) in &self.dists {
            let i = state(&u, "dists", s)?;
            for (k, m) in ds.iter().enumerate() {
                eta[i].push(distribution(&u, &format!("dists.{s}[{k}]"), m)?);
            }
        }
        ProbAutomaton::new(&u, &labels, ell, eta)
    }

    pub fn from_model(pa: &ProbAutomaton) -> PaDoc {
        let u = pa.space().states();
        let n = u.len();
        PaDoc {
            version: Some(SCHEMA_VERSION.into()),
            states: u.names().to_vec(),
            labels: pa.labels().names().to_vec(),
            ell: (0..n).map(|s| (u.name(s).to_string(), pa.labels().name(pa.label(s)).to_string())).collect(),
            dists: (0..n).map(|s| (u.name(s).to_string(), pa.eta(s).map(|d| dist_doc(u, d)).collect())).collect(),
        }
    }
}

/// `{pairs: {"s,t": "p/q"}}`; absent pairs take a default value.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PairsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub pairs: BTreeMap<String, String>,
}

impl PairsDoc {
    pub fn build(&self, space: &PairSpace, chain: Chain, default: &MvValue) -> Result<Valuation, ModelError> {
        check_version(&self.version)?;
        let mut values = vec![default.clone(); space.pairs().len()];
        for (k, v) in &self.pairs {
            let field = format!("pairs.{k}");
            let idx = space.pair_named(k).map_err(|e| ModelError::invalid(&field, e.to_string()))?;
            values[idx] = chain.parse(v).map_err(|e| ModelError::invalid(&field, e.to_string()))?;
        }
        Ok(Valuation::new(space.pairs(), chain, values)?)
    }

    pub fn from_valuation(d: &Valuation) -> PairsDoc {
        PairsDoc { version: Some(SCHEMA_VERSION.into()), pairs: values_doc(d) }
    }
}

/// `{values: {y: "p/q"}}` over a universe of states.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ValuationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub values: BTreeMap<String, String>,
}

impl ValuationDoc {
    /// Every element must be given.
    pub fn build(&self, u: &Arc<Universe>, chain: Chain) -> Result<Valuation, ModelError> {
        check_version(&self.version)?;
        if let Some(k) = self.values.keys().find(|k| u.index_of(k).is_none()) {
            return Err(ModelError::invalid("values", format!("unknown element `{k}`")));
        }
        let mut values = Vec::with_capacity(u.len());
        for y in u.names() {
            let field = format!("values.{y}");
            let v = self.values.get(y).ok_or_else(|| ModelError::invalid(&field, "missing value"))?;
            values.push(chain.parse(v).map_err(|e| ModelError::invalid(&field, e.to_string()))?);
        }
        Ok(Valuation::new(u, chain, values)?)
    }

    pub fn from_valuation(a: &Valuation) -> ValuationDoc {
        ValuationDoc { version: Some(SCHEMA_VERSION.into()), values: values_doc(a) }
    }
}

fn values_doc(a: &Valuation) -> BTreeMap<String, String> {
    a.entries().map(|(k, v)| (k.to_string(), value_string(v))).collect()
}

/// Exact textual form of a value: `p/q` on the unit chain, `0`/`1` on the
/// boolean chain, the numerator on a bounded chain.
pub fn value_string(v: &MvValue) -> String {
    match v {
        MvValue::Unit(r) => format_rational(r),
        MvValue::Bool(b) => if *b { "1" } else { "0" }.into(),
        MvValue::Bounded { n, .. } => n.to_string(),
    }
}

/// Parses any of the documents from a JSON string.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ModelError> {
    Ok(serde_json::from_str(text)?)
}
