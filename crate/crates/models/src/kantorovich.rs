//! The Kantorovich lifting of a distance on states to distributions.

use std::sync::Arc;

use mvfix_core::nonexp::{Approximable, ValuationFn};
use mvfix_core::{Chain, Direction, Distribution, FnError, MvValue, Rational, SetFn, SubsetY, Universe, Valuation};
use mvfix_lp::{solve_transport, LpStatus, TransportInstance};
use num_traits::{Signed, Zero};

use crate::pairs::PairSpace;
use crate::ModelError;

fn dense(p: &Distribution, n: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    for (i, w) in p.entries() {
        v[*i] += w;
    }
    v
}

fn instance(space: &PairSpace, d: &Valuation, p: &Distribution, q: &Distribution) -> TransportInstance {
    let n = space.n();
    let cost = (0..n).map(|i| (0..n).map(|j| space.at(d, i, j).to_rational()).collect()).collect();
    TransportInstance::new(dense(p, n), dense(q, n), cost)
}

/// `K(d)(p,q)`, the optimal transport cost.
pub fn kantorovich(space: &PairSpace, d: &Valuation, p: &Distribution, q: &Distribution) -> Result<Rational, ModelError> {
    let sol = solve_transport(&instance(space, d, p, q))?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        s => Err(ModelError::Solver(s)),
    }
}

/// The optimal cost among couplings supported inside `mask`, or `None` if
/// there are none. With `maximise`, the largest cost instead.
pub(crate) fn masked_cost(
    space: &PairSpace,
    d: &Valuation,
    p: &Distribution,
    q: &Distribution,
    mask: &dyn Fn(usize, usize) -> bool,
    maximise: bool,
) -> Result<Option<Rational>, ModelError> {
    let n = space.n();
    let mut t = instance(space, d, p, q);
    if maximise {
        for row in t.cost.iter_mut() {
            for c in row.iter_mut() {
                *c = -c.clone();
            }
        }
    }
    let t = t.with_mask((0..n).map(|i| (0..n).map(|j| mask(i, j)).collect()).collect());
    let sol = solve_transport(&t)?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(if maximise { -sol.value } else { sol.value })),
        LpStatus::Infeasible => Ok(None),
        s => Err(ModelError::Solver(s)),
    }
}

/// Membership of `(p,q)` in `K_#^d(M)`: `K(d)(p,q) > 0` and some optimal
/// coupling is supported inside `M`.
pub fn kantorovich_dual_member(
    space: &PairSpace,
    d: &Valuation,
    p: &Distribution,
    q: &Distribution,
    m: &SubsetY,
) -> Result<bool, ModelError> {
    let k = kantorovich(space, d, p, q)?;
    if !k.is_positive() {
        return Ok(false);
    }
    let masked = masked_cost(space, d, p, q, &|i, j| m.contains(space.index(i, j)), false)?;
    Ok(masked == Some(k))
}

/// `K : [0,1]^{S×S} → [0,1]^{D×D}` over a fixed finite list of distributions.
#[derive(Debug, Clone)]
pub struct KantorovichLifting {
    space: PairSpace,
    dists: Vec<Distribution>,
    dist_pairs: Arc<Universe>,
}

impl KantorovichLifting {
    pub fn new(space: &PairSpace, dists: Vec<Distribution>) -> Result<KantorovichLifting, ModelError> {
        if dists.iter().any(|p| p.max_index().is_some_and(|m| m >= space.n())) {
            return Err(ModelError::invalid("dists", "support outside the state space"));
        }
        let k = dists.len();
        let dist_pairs = Universe::shared((0..k * k).map(|x| format!("D{},D{}", x / k, x % k)))?;
        Ok(KantorovichLifting { space: space.clone(), dists, dist_pairs })
    }

    pub fn dist_pairs(&self) -> &Arc<Universe> {
        &self.dist_pairs
    }

    pub fn split(&self, x: usize) -> (usize, usize) {
        (x / self.dists.len(), x % self.dists.len())
    }

    /// `K_#^d(M)` over all pairs of listed distributions.
    pub fn approx_dual(&self, d: &Valuation) -> SetFn {
        let (me, d) = (self.clone(), d.clone());
        let supp = d.support_ceil();
        SetFn::new(self.space.pairs(), &self.dist_pairs, move |m| {
            let m = m.intersection(&supp);
            SubsetY::from_indices(
                &me.dist_pairs,
                (0..me.dist_pairs.len()).filter(|&x| {
                    let (a, b) = me.split(x);
                    kantorovich_dual_member(&me.space, &d, &me.dists[a], &me.dists[b], &m).expect("transport on valid distributions")
                }),
            )
        })
    }
}

impl ValuationFn for KantorovichLifting {
    fn domain(&self) -> &Arc<Universe> {
        self.space.pairs()
    }

    fn codomain(&self) -> &Arc<Universe> {
        &self.dist_pairs
    }

    fn eval(&self, d: &Valuation) -> Result<Valuation, FnError> {
        let mut out = Vec::with_capacity(self.dist_pairs.len());
        for x in 0..self.dist_pairs.len() {
            let (a, b) = self.split(x);
            out.push(MvValue::Unit(kantorovich(&self.space, d, &self.dists[a], &self.dists[b])?));
        }
        Ok(Valuation::new(&self.dist_pairs, Chain::Unit, out)?)
    }
}

impl Approximable for KantorovichLifting {
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        match dir {
            Direction::Dual => Ok(self.approx_dual(a)),
            Direction::Primal => Err(FnError::Unsupported("primal Kantorovich approximation")),
        }
    }
}
