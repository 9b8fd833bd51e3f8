use std::sync::Arc;

use mvfix_core::{Chain, MvValue, SubsetY, Universe, Valuation};

use crate::ModelError;

/// States `X` together with the product universe `X × X`, named `"s,t"`.
#[derive(Debug, Clone)]
pub struct PairSpace {
    states: Arc<Universe>,
    pairs: Arc<Universe>,
}

impl PairSpace {
    pub fn new(states: &Arc<Universe>) -> PairSpace {
        let names = states.names();
        let pairs = Universe::shared(names.iter().flat_map(|a| names.iter().map(move |b| format!("{a},{b}"))))
            .expect("pair names are distinct when state names are");
        PairSpace { states: states.clone(), pairs }
    }

    pub fn states(&self) -> &Arc<Universe> {
        &self.states
    }

    pub fn pairs(&self) -> &Arc<Universe> {
        &self.pairs
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n() + j
    }

    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.n(), k % self.n())
    }

    /// Looks up `"s,t"` (whitespace around the comma is ignored).
    pub fn pair_named(&self, name: &str) -> Result<usize, ModelError> {
        let (a, b) = name
            .split_once(',')
            .ok_or_else(|| ModelError::invalid("pair", format!("`{name}` is not of the form s,t")))?;
        let i = self.states.require(a.trim())?;
        let j = self.states.require(b.trim())?;
        Ok(self.index(i, j))
    }

    pub fn subset<I: IntoIterator<Item = (usize, usize)>>(&self, pairs: I) -> SubsetY {
        SubsetY::from_indices(&self.pairs, pairs.into_iter().map(|(i, j)| self.index(i, j)))
    }

    /// `S(R)`, the symmetric closure.
    pub fn symmetric_closure(&self, r: &SubsetY) -> SubsetY {
        let mut out = r.clone();
        for k in r.iter() {
            let (i, j) = self.split(k);
            out.insert(self.index(j, i));
        }
        out
    }

    pub fn matrix(&self, chain: Chain, mut f: impl FnMut(usize, usize) -> MvValue) -> Result<Valuation, ModelError> {
        let n = self.n();
        Ok(Valuation::from_fn(&self.pairs, chain, |k| f(k / n, k % n))?)
    }

    pub fn at<'a>(&self, d: &'a Valuation, i: usize, j: usize) -> &'a MvValue {
        d.get(self.index(i, j))
    }
}

/// Bit mask of a set of state indices.
pub(crate) fn mask_of(xs: &[usize]) -> u64 {
    xs.iter().fold(0, |m, &x| m | 1 << x)
}

/// All relations `C ⊆ X1 × X2` whose projections are exactly `X1` and `X2`.
pub(crate) fn couplings(x1: &[usize], x2: &[usize]) -> Result<Vec<Vec<(usize, usize)>>, ModelError> {
    let cells: Vec<(usize, usize)> = x1.iter().flat_map(|&a| x2.iter().map(move |&b| (a, b))).collect();
    if cells.len() > 16 {
        return Err(ModelError::TooLarge(format!("{} candidate pairs in a set coupling", cells.len())));
    }
    let (m1, m2) = (mask_of(x1), mask_of(x2));
    Ok((0u32..1 << cells.len())
        .map(|bits| cells.iter().enumerate().filter(|(b, _)| bits >> b & 1 == 1).map(|(_, c)| *c).collect::<Vec<_>>())
        .filter(|c| c.iter().fold(0u64, |m, p| m | 1 << p.0) == m1 && c.iter().fold(0u64, |m, p| m | 1 << p.1) == m2)
        .collect())
}

pub(crate) fn set_name(u: &Universe, xs: &[usize]) -> String {
    let names: Vec<&str> = xs.iter().map(|&i| u.name(i)).collect();
    format!("{{{}}}", names.join(","))
}
