//! Termination probability of Markov chains.

use std::sync::Arc;

use mvfix_core::nonexp::{Approximable, ValuationFn};
use mvfix_core::proof::{extremal_fixpoint_via_jumps, ExtremalRun};
use mvfix_core::{Chain, Direction, Distribution, FnError, FnExpr, MvValue, Rational, SetFn, SubsetY, UnionPart, Universe, Valuation};
use mvfix_lp::{gauss_solve, solve_lp, Bound, LinearProgram, LpStatus, Relation, Sense};
use num_traits::{One, Zero};

use crate::ModelError;

/// `(S, T, η)`: terminal states have no distribution, every other state has one.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    states: Arc<Universe>,
    terminal: SubsetY,
    eta: Vec<Option<Distribution>>,
    expr: FnExpr,
}

impl MarkovChain {
    pub fn new(states: &Arc<Universe>, terminal: SubsetY, eta: Vec<Option<Distribution>>) -> Result<MarkovChain, ModelError> {
        let n = states.len();
        if n == 0 {
            return Err(ModelError::invalid("states", "a chain needs at least one state"));
        }
        if eta.len() != n {
            return Err(ModelError::invalid("dist", format!("expected {n} entries, got {}", eta.len())));
        }
        for (s, d) in eta.iter().enumerate() {
            match (terminal.contains(s), d) {
                (true, Some(_)) => {
                    return Err(ModelError::invalid(format!("dist.{}", states.name(s)), "terminal states have no successors"))
                }
                (false, None) => return Err(ModelError::invalid(format!("dist.{}", states.name(s)), "missing distribution")),
                (false, Some(d)) => {
                    if d.max_index().is_some_and(|m| m >= n) {
                        return Err(ModelError::invalid(format!("dist.{}", states.name(s)), "successor out of range"));
                    }
                }
                (true, None) => {}
            }
        }
        let expr = build_term_fn(states, &terminal, &eta)?;
        Ok(MarkovChain { states: states.clone(), terminal, eta, expr })
    }

    pub fn states(&self) -> &Arc<Universe> {
        &self.states
    }

    pub fn terminal(&self) -> &SubsetY {
        &self.terminal
    }

    pub fn eta(&self, s: usize) -> Option<&Distribution> {
        self.eta[s].as_ref()
    }

    /// `T = (η* ∘ av_D) ⊎ c_k` as a toolbox expression.
    pub fn term_fn(&self) -> &FnExpr {
        &self.expr
    }

    /// States from which some terminal state is reachable.
    pub fn reaches_terminal(&self) -> SubsetY {
        let mut good = self.terminal.clone();
        loop {
            let before = good.len();
            for s in 0..self.states.len() {
                if let Some(d) = &self.eta[s] {
                    if d.support().any(|t| good.contains(t)) {
                        good.insert(s);
                    }
                }
            }
            if good.len() == before {
                return good;
            }
        }
    }

    /// `μT`: states that cannot reach `T` are pinned to 0, the rest solved exactly.
    pub fn term_prob_exact(&self) -> Valuation {
        let good = self.reaches_terminal();
        let unknown: Vec<usize> = good.iter().filter(|&s| !self.terminal.contains(s)).collect();
        let pos = |s: usize| unknown.iter().position(|&u| u == s);
        let m = unknown.len();
        let mut a = vec![vec![Rational::zero(); m]; m];
        let mut b = vec![Rational::zero(); m];
        for (r, &s) in unknown.iter().enumerate() {
            a[r][r] += Rational::one();
            for (t, w) in self.eta[s].as_ref().expect("non-terminal").entries() {
                if self.terminal.contains(*t) {
                    b[r] += w;
                } else if let Some(c) = pos(*t) {
                    a[r][c] -= w;
                }
            }
        }
        let x = gauss_solve(&a, &b).expect("system is regular once the 0-states are pinned");
        let mut values = vec![Rational::zero(); self.states.len()];
        for s in self.terminal.iter() {
            values[s] = Rational::one();
        }
        for (s, v) in unknown.into_iter().zip(x) {
            values[s] = v;
        }
        Valuation::unit(&self.states, values).expect("probabilities lie in [0,1]")
    }

    /// Closed form of `T_#^t`: non-terminal states in `[S]_{T(t)}` whose
    /// successors all lie in `S′`.
    pub fn term_approx_dual(&self, t: &Valuation) -> Result<SetFn, ModelError> {
        let top = self.eval(t)?.support_ceil();
        let supp = t.support_ceil();
        let (mc, u) = (self.clone(), self.states.clone());
        Ok(SetFn::new(&self.states, &self.states, move |sp| {
            let sp = sp.intersection(&supp);
            SubsetY::from_indices(
                &u,
                top.iter().filter(|&s| mc.eta[s].as_ref().is_some_and(|d| d.support().all(|x| sp.contains(x)))),
            )
        }))
    }

    /// The greatest fixpoint of `T` below a pre-fixpoint `b`, by linear programming.
    pub fn greatest_fixpoint_below(&self, b: &Valuation) -> Result<Valuation, ModelError> {
        let n = self.states.len();
        let mut lp = LinearProgram::valuation(Sense::Max, n).with_names(self.states.names().to_vec());
        for s in 0..n {
            lp.set_objective(s, Rational::one());
            let hi = b.get(s).to_rational();
            if self.terminal.contains(s) {
                lp.bounds[s] = Bound { lower: Rational::one(), upper: Some(hi) };
            } else {
                lp.bounds[s].upper = Some(hi);
                let d = self.eta[s].as_ref().expect("non-terminal");
                let terms = std::iter::once((s, Rational::one())).chain(d.entries().iter().map(|(t, w)| (*t, -w.clone())));
                lp.add_row(terms, Relation::Eq, Rational::zero());
            }
        }
        if lp.bounds.iter().any(|bd| bd.upper.as_ref().is_some_and(|u| u < &bd.lower)) {
            return Err(ModelError::invalid("b", "not a pre-fixpoint: a terminal state lies below 1"));
        }
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(ModelError::Solver(sol.status));
        }
        Ok(Valuation::unit(&self.states, sol.x)?)
    }

    /// `μT` from the top element by exact inner solves and jumps.
    pub fn term_prob_via_jumps(&self) -> Result<ExtremalRun, ModelError> {
        let top = Valuation::one(&self.states, Chain::Unit);
        Ok(extremal_fixpoint_via_jumps(self, &top, Direction::Dual, |b| self.greatest_fixpoint_below(b))?)
    }
}

fn build_term_fn(states: &Arc<Universe>, terminal: &SubsetY, eta: &[Option<Distribution>]) -> Result<FnExpr, ModelError> {
    let mut dists: Vec<Distribution> = Vec::new();
    let mut which = Vec::new();
    let mut inner_outputs = Vec::new();
    for (s, d) in eta.iter().enumerate() {
        if let Some(d) = d {
            let k = dists.iter().position(|e| e == d).unwrap_or_else(|| {
                dists.push(d.clone());
                dists.len() - 1
            });
            which.push(k);
            inner_outputs.push(s);
        }
    }
    let mut parts = Vec::new();
    if !inner_outputs.is_empty() {
        let du = Universe::shared((0..dists.len()).map(|k| format!("D{k}")))?;
        let nu = Universe::shared(inner_outputs.iter().map(|&s| states.name(s).to_string()))?;
        let av = FnExpr::average(states, &du, dists)?;
        let reindex = FnExpr::reindex(&du, &nu, which)?;
        parts.push(UnionPart::new(FnExpr::compose(&reindex, &av)?, (0..states.len()).collect(), inner_outputs));
    }
    if !terminal.is_empty() {
        let none = Universe::shared(Vec::<String>::new())?;
        let tu = Universe::shared(terminal.names())?;
        let k = FnExpr::constant(&none, Valuation::one(&tu, Chain::Unit));
        parts.push(UnionPart::new(k, Vec::new(), terminal.iter().collect()));
    }
    Ok(FnExpr::disjoint_union(states, states, parts)?)
}

impl ValuationFn for MarkovChain {
    fn domain(&self) -> &Arc<Universe> {
        &self.states
    }

    fn codomain(&self) -> &Arc<Universe> {
        &self.states
    }

    fn eval(&self, t: &Valuation) -> Result<Valuation, FnError> {
        if t.chain() != Chain::Unit || !mvfix_core::mv::same_universe(t.universe(), &self.states) {
            return Err(FnError::UniverseMismatch("termination function takes unit valuations over S".into()));
        }
        Ok(Valuation::from_fn(&self.states, Chain::Unit, |s| match &self.eta[s] {
            None => MvValue::Unit(Rational::one()),
            Some(d) => d.expect(t).expect("unit chain"),
        })?)
    }
}

impl Approximable for MarkovChain {
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        match dir {
            Direction::Dual => Ok(self.term_approx_dual(a)?),
            Direction::Primal => self.expr.approx(a, dir),
        }
    }

    fn iota(&self, a: &Valuation, dir: Direction) -> Result<Option<MvValue>, FnError> {
        self.expr.iota_hat(a, dir).map(Some)
    }
}
