//! Behavioural distance of probabilistic automata.

use std::sync::Arc;

use mvfix_core::nonexp::{Approximable, ValuationFn};
use mvfix_core::proof::{extremal_fixpoint_via_jumps, gfp_setfn, ExtremalRun};
use mvfix_core::{Chain, Direction, Distribution, FnError, MvValue, Rational, SetFn, SubsetY, Universe, Valuation};
use mvfix_lp::{solve_lp, solve_transport, Bound, LinearProgram, LpStatus, Relation, Sense, TransportInstance};
use num_traits::{One, Signed, Zero};

use crate::hausdorff::{hausdorff_by, hausdorff_dual_member};
use crate::kantorovich::{kantorovich, kantorovich_dual_member, masked_cost};
use crate::pairs::PairSpace;
use crate::ModelError;

/// `(S, L, η, ℓ)`; every state carries a finite, possibly empty, set of
/// distributions.
#[derive(Debug, Clone)]
pub struct ProbAutomaton {
    space: PairSpace,
    labels: Arc<Universe>,
    ell: Vec<usize>,
    /// The distinct distributions occurring in the automaton.
    dists: Vec<Distribution>,
    /// `η(s)` as sorted indices into `dists`.
    eta: Vec<Vec<usize>>,
}

/// The coupling fixed for one distribution on one side of a pair.
#[derive(Debug, Clone)]
struct Choice {
    coupling: Vec<((usize, usize), Rational)>,
}

/// The coupling terms are always read as `(left state, right state)`.
type ChoiceKey = (usize, usize, bool, usize);

impl ProbAutomaton {
    pub fn new(states: &Arc<Universe>, labels: &Arc<Universe>, ell: Vec<usize>, eta: Vec<Vec<Distribution>>) -> Result<ProbAutomaton, ModelError> {
        let n = states.len();
        if ell.len() != n || eta.len() != n {
            return Err(ModelError::invalid("ell/dists", format!("expected {n} entries")));
        }
        if let Some(s) = ell.iter().position(|&l| l >= labels.len()) {
            return Err(ModelError::invalid(format!("ell.{}", states.name(s)), "unknown label"));
        }
        let mut dists: Vec<Distribution> = Vec::new();
        let mut idx = Vec::with_capacity(n);
        for (s, ds) in eta.into_iter().enumerate() {
            let mut mine = Vec::new();
            for d in ds {
                if d.max_index().is_some_and(|m| m >= n) {
                    return Err(ModelError::invalid(format!("dists.{}", states.name(s)), "successor out of range"));
                }
                let k = dists.iter().position(|e| e == &d).unwrap_or_else(|| {
                    dists.push(d);
                    dists.len() - 1
                });
                mine.push(k);
            }
            mine.sort_unstable();
            mine.dedup();
            idx.push(mine);
        }
        Ok(ProbAutomaton { space: PairSpace::new(states), labels: labels.clone(), ell, dists, eta: idx })
    }

    pub fn space(&self) -> &PairSpace {
        &self.space
    }

    pub fn labels(&self) -> &Arc<Universe> {
        &self.labels
    }

    pub fn label(&self, s: usize) -> usize {
        self.ell[s]
    }

    pub fn distributions(&self) -> &[Distribution] {
        &self.dists
    }

    pub fn eta(&self, s: usize) -> impl Iterator<Item = &Distribution> {
        self.eta[s].iter().map(|&k| &self.dists[k])
    }

    /// `K(d)` on all pairs of distinct distributions.
    fn k_matrix(&self, d: &Valuation) -> Result<Vec<Vec<Rational>>, ModelError> {
        let m = self.dists.len();
        let mut out = vec![vec![Rational::zero(); m]; m];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = kantorovich(&self.space, d, &self.dists[a], &self.dists[b])?;
            }
        }
        Ok(out)
    }

    fn m_with(&self, k: &[Vec<Rational>], s: usize, t: usize) -> Rational {
        if self.ell[s] != self.ell[t] {
            return Rational::one();
        }
        hausdorff_by(&self.eta[s], &self.eta[t], |a, b| k[a][b].clone())
    }

    /// `M(d)`.
    pub fn m_eval(&self, d: &Valuation) -> Result<Valuation, ModelError> {
        self.check(d)?;
        let k = self.k_matrix(d)?;
        self.space.matrix(Chain::Unit, |s, t| MvValue::Unit(self.m_with(&k, s, t)))
    }

    fn check(&self, d: &Valuation) -> Result<(), ModelError> {
        if d.chain() != Chain::Unit || d.len() != self.space.pairs().len() {
            return Err(FnError::UniverseMismatch("M takes unit valuations over S×S".into()).into());
        }
        Ok(())
    }

    /// `M_#^d(Z)` in closed form.
    pub fn approx_dual(&self, d: &Valuation) -> Result<SetFn, ModelError> {
        self.check(d)?;
        let k = self.k_matrix(d)?;
        let top: Vec<usize> = (0..self.space.pairs().len())
            .filter(|&x| {
                let (s, t) = self.space.split(x);
                self.ell[s] == self.ell[t] && self.m_with(&k, s, t).is_positive()
            })
            .collect();
        let supp = d.support_ceil();
        let (me, d) = (self.clone(), d.clone());
        Ok(SetFn::new(self.space.pairs(), self.space.pairs(), move |z| {
            let z = z.intersection(&supp);
            let sp = &me.space;
            SubsetY::from_indices(
                sp.pairs(),
                top.iter().copied().filter(|&x| {
                    let (s, t) = sp.split(x);
                    hausdorff_dual_member(
                        &me.eta[s],
                        &me.eta[t],
                        |a, b| k[a][b].clone(),
                        |a, b| kantorovich_dual_member(sp, &d, &me.dists[a], &me.dists[b], &z).expect("valid distributions"),
                    )
                }),
            )
        }))
    }

    /// Direct check that `r` is self-closed for `d`: every related pair has
    /// positive distance and equal labels, and every distribution attaining
    /// `d(s,t)` through its nearest partner is matched by a coupling
    /// supported in `r` whose cost is exactly `d(s,t)`.
    pub fn is_self_closed(&self, d: &Valuation, r: &SubsetY) -> Result<bool, ModelError> {
        self.check(d)?;
        let k = self.k_matrix(d)?;
        let sp = &self.space;
        let in_r = |i: usize, j: usize| r.contains(sp.index(i, j));
        let hits = |p: usize, q: usize, h: &Rational| -> Result<bool, ModelError> {
            let (dp, dq) = (&self.dists[p], &self.dists[q]);
            let lo = masked_cost(sp, d, dp, dq, &in_r, false)?;
            let hi = masked_cost(sp, d, dp, dq, &in_r, true)?;
            Ok(matches!((lo, hi), (Some(lo), Some(hi)) if &lo <= h && h <= &hi))
        };
        for x in r.iter() {
            let (s, t) = sp.split(x);
            let h = sp.at(d, s, t).to_rational();
            if !h.is_positive() || self.ell[s] != self.ell[t] {
                return Ok(false);
            }
            for &p in &self.eta[s] {
                let nearest = self.eta[t].iter().map(|&q| k[p][q].clone()).min().unwrap_or_else(Rational::one);
                if nearest == h {
                    let mut found = false;
                    for &q in &self.eta[t] {
                        if hits(p, q, &h)? {
                            found = true;
                            break;
                        }
                    }
                    if !found {
                        return Ok(false);
                    }
                }
            }
            for &q in &self.eta[t] {
                let nearest = self.eta[s].iter().map(|&p| k[p][q].clone()).min().unwrap_or_else(Rational::one);
                if nearest == h {
                    let mut found = false;
                    for &p in &self.eta[s] {
                        if hits(p, q, &h)? {
                            found = true;
                            break;
                        }
                    }
                    if !found {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// `≈_d = ν M_#^d` for a fixpoint `d`.
    pub fn largest_self_closed(&self, d: &Valuation) -> Result<SubsetY, ModelError> {
        if &self.m_eval(d)? != d {
            return Err(ModelError::NotAFixpoint);
        }
        Ok(gfp_setfn(&self.approx_dual(d)?, &d.support_ceil()))
    }

    fn best_choice(&self, d: &Valuation, left: usize, right: &[usize], swap: bool) -> Result<Option<(Rational, Choice)>, ModelError> {
        let n = self.space.n();
        let mut best: Option<(Rational, Choice)> = None;
        for &other in right {
            let (p, q) = if swap { (other, left) } else { (left, other) };
            let cost = (0..n).map(|i| (0..n).map(|j| self.space.at(d, i, j).to_rational()).collect()).collect();
            let dense = |x: &Distribution| (0..n).map(|i| x.weight(i)).collect::<Vec<_>>();
            let sol = solve_transport(&TransportInstance::new(dense(&self.dists[p]), dense(&self.dists[q]), cost))?;
            if sol.status != LpStatus::Optimal {
                return Err(ModelError::Solver(sol.status));
            }
            if best.as_ref().map_or(true, |(v, _)| &sol.value < v) {
                let coupling = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| !sol.coupling[i][j].is_zero())
                    .map(|(i, j)| ((i, j), sol.coupling[i][j].clone()))
                    .collect();
                best = Some((sol.value, Choice { coupling }));
            }
        }
        Ok(best)
    }

    fn fixed_value(&self, s: usize, t: usize) -> Option<Rational> {
        if self.ell[s] != self.ell[t] {
            return Some(Rational::one());
        }
        match (self.eta[s].is_empty(), self.eta[t].is_empty()) {
            (true, true) => Some(Rational::zero()),
            (true, false) | (false, true) => Some(Rational::one()),
            _ => None,
        }
    }

    fn choice_keys(&self) -> Vec<ChoiceKey> {
        let n = self.space.n();
        let mut keys = Vec::new();
        for s in 0..n {
            for t in 0..n {
                if self.fixed_value(s, t).is_some() {
                    continue;
                }
                keys.extend(self.eta[s].iter().map(|&p| (s, t, false, p)));
                keys.extend(self.eta[t].iter().map(|&q| (s, t, true, q)));
            }
        }
        keys
    }

    fn respond(&self, d: &Valuation, key: ChoiceKey) -> Result<(Rational, Choice), ModelError> {
        let (s, t, swap, own) = key;
        let other = if swap { &self.eta[s] } else { &self.eta[t] };
        Ok(self.best_choice(d, own, other, swap)?.expect("both sides are non-empty"))
    }

    fn cost_of(d: &Valuation, sp: &PairSpace, c: &Choice) -> Rational {
        c.coupling.iter().map(|((i, j), w)| w * sp.at(d, *i, *j).to_rational()).sum()
    }

    /// `μ M_τ` for fixed partners and couplings.
    fn solve_fixed(&self, keys: &[ChoiceKey], tau: &[Choice]) -> Result<Valuation, ModelError> {
        let sp = &self.space;
        let m = sp.pairs().len();
        let mut lp = LinearProgram::valuation(Sense::Min, m).with_names(sp.pairs().names().to_vec());
        for x in 0..m {
            lp.set_objective(x, Rational::one());
            let (s, t) = sp.split(x);
            if let Some(v) = self.fixed_value(s, t) {
                lp.bounds[x] = Bound { lower: v.clone(), upper: Some(v) };
            }
        }
        for (&(s, t, _, _), c) in keys.iter().zip(tau) {
            let terms = std::iter::once((sp.index(s, t), Rational::one()))
                .chain(c.coupling.iter().map(|((i, j), w)| (sp.index(*i, *j), -w.clone())));
            lp.add_row(terms, Relation::Ge, Rational::zero());
        }
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(ModelError::Solver(sol.status));
        }
        Ok(Valuation::unit(sp.pairs(), sol.x)?)
    }

    /// A fixpoint of `M` below the pre-fixpoint `b`, by strategy iteration
    /// over partners and couplings with one LP per round.
    pub fn fixpoint_below(&self, b: &Valuation) -> Result<Valuation, ModelError> {
        if !self.m_eval(b)?.leq(b) {
            return Err(ModelError::invalid("b", "not a pre-fixpoint of M"));
        }
        let keys = self.choice_keys();
        let mut tau = keys.iter().map(|&k| self.respond(b, k).map(|(_, c)| c)).collect::<Result<Vec<_>, _>>()?;
        loop {
            let d = self.solve_fixed(&keys, &tau)?;
            if self.m_eval(&d)? == d {
                return Ok(d);
            }
            let mut switched = false;
            for (key, c) in keys.iter().zip(tau.iter_mut()) {
                let (v, better) = self.respond(&d, *key)?;
                if v < Self::cost_of(&d, &self.space, c) {
                    *c = better;
                    switched = true;
                }
            }
            if !switched {
                return Err(ModelError::NotAFixpoint);
            }
        }
    }

    /// `μM`, iterating from the top element with jumps.
    pub fn distance(&self) -> Result<ExtremalRun, ModelError> {
        let top = Valuation::one(self.space.pairs(), Chain::Unit);
        Ok(extremal_fixpoint_via_jumps(self, &top, Direction::Dual, |b| self.fixpoint_below(b))?)
    }
}

impl ValuationFn for ProbAutomaton {
    fn domain(&self) -> &Arc<Universe> {
        self.space.pairs()
    }

    fn codomain(&self) -> &Arc<Universe> {
        self.space.pairs()
    }

    fn eval(&self, d: &Valuation) -> Result<Valuation, FnError> {
        Ok(self.m_eval(d)?)
    }
}

impl Approximable for ProbAutomaton {
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        match dir {
            Direction::Dual => Ok(self.approx_dual(a)?),
            Direction::Primal => Err(FnError::Unsupported("primal approximation of M")),
        }
    }
}
