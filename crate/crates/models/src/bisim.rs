//! Bisimilarity on unlabelled transition systems as a greatest fixpoint over
//! boolean relations (1 = related).

use std::sync::{Arc, OnceLock};

use mvfix_core::nonexp::{Approximable, ValuationFn};
use mvfix_core::proof::{certify_upper_bound, gfp_setfn};
use mvfix_core::{Certificate, Chain, Direction, FnError, FnExpr, MvValue, SetFn, SubsetY, Universe, Valuation, Verdict};

use crate::hausdorff::successor_lifting;
use crate::mts::normalize_succ;
use crate::pairs::PairSpace;
use crate::ModelError;

#[derive(Debug, Clone)]
pub struct TransitionSystem {
    space: PairSpace,
    succ: Vec<Vec<usize>>,
    expr: Arc<OnceLock<FnExpr>>,
}

impl TransitionSystem {
    pub fn new(states: &Arc<Universe>, succ: Vec<Vec<usize>>) -> Result<TransitionSystem, ModelError> {
        if succ.len() != states.len() {
            return Err(ModelError::invalid("succ", format!("expected {} entries", states.len())));
        }
        let succ = normalize_succ(states, succ)?;
        Ok(TransitionSystem { space: PairSpace::new(states), succ, expr: Arc::new(OnceLock::new()) })
    }

    pub fn space(&self) -> &PairSpace {
        &self.space
    }

    pub fn succ(&self, x: usize) -> &[usize] {
        &self.succ[x]
    }

    fn related(a: &Valuation, sp: &PairSpace, i: usize, j: usize) -> bool {
        sp.at(a, i, j).is_one()
    }

    /// Both transfer clauses with `R` read as `a ∨ extra`.
    fn transfer(&self, i: usize, j: usize, rel: impl Fn(usize, usize) -> bool) -> bool {
        let (s1, s2) = (&self.succ[i], &self.succ[j]);
        s1.iter().all(|&y1| s2.iter().any(|&y2| rel(y1, y2))) && s2.iter().all(|&y2| s1.iter().any(|&y1| rel(y1, y2)))
    }

    /// `B_a^#(R)`: pairs with `B(a) = 0` that become related once `R` is added.
    pub fn approx_primal(&self, a: &Valuation) -> Result<SetFn, ModelError> {
        let top = self.eval(a)?.support_floor();
        let (me, a) = (self.clone(), a.clone());
        let slack = a.support_floor();
        Ok(SetFn::new(self.space.pairs(), self.space.pairs(), move |r| {
            let r = r.intersection(&slack);
            let sp = &me.space;
            SubsetY::from_indices(
                sp.pairs(),
                top.iter().filter(|&k| {
                    let (i, j) = sp.split(k);
                    me.transfer(i, j, |y1, y2| Self::related(&a, sp, y1, y2) || r.contains(sp.index(y1, y2)))
                }),
            )
        }))
    }

    /// `B = (η×η)* ∘ G` on the boolean chain.
    pub fn bisim_fn(&self) -> Result<&FnExpr, ModelError> {
        if let Some(e) = self.expr.get() {
            return Ok(e);
        }
        let e = successor_lifting(&self.space, &self.succ, true)?;
        Ok(self.expr.get_or_init(|| e))
    }

    /// First pair where `B(a) ⊑ a` fails.
    pub fn pre_fixpoint_violation(&self, a: &Valuation) -> Result<Option<usize>, ModelError> {
        let b = self.eval(a)?;
        Ok((0..a.len()).find(|&k| b.get(k) > a.get(k)))
    }

    /// Certifies that `pair` is not bisimilar: `a` must be a pre-fixpoint
    /// with `a(pair) = 0`, and the upper-bound rule must succeed.
    pub fn witness_nonbisim(&self, a: &Valuation, pair: usize) -> Result<Certificate, ModelError> {
        let sp = &self.space;
        let inapplicable = |note: String| Certificate {
            verdict: Verdict::Inapplicable,
            witness: SubsetY::empty(sp.pairs()),
            theta: None,
            note: Some(note),
        };
        if !a.get(pair).is_zero() {
            return Ok(inapplicable(format!("a({}) is not 0", sp.pairs().name(pair))));
        }
        if let Some(k) = self.pre_fixpoint_violation(a)? {
            return Ok(inapplicable(format!("not a pre-fixpoint at {}", sp.pairs().name(k))));
        }
        Ok(certify_upper_bound(self, a)?)
    }

    /// Bisimilarity itself, by descending iteration from the full relation.
    pub fn bisimilarity(&self) -> SubsetY {
        let me = self.clone();
        let g = SetFn::new(self.space.pairs(), self.space.pairs(), move |r| {
            let sp = &me.space;
            SubsetY::from_indices(
                sp.pairs(),
                r.iter().filter(|&k| {
                    let (i, j) = sp.split(k);
                    me.transfer(i, j, |y1, y2| r.contains(sp.index(y1, y2)))
                }),
            )
        });
        gfp_setfn(&g, &SubsetY::full(self.space.pairs()))
    }

    /// The boolean indicator of a relation.
    pub fn indicator(&self, r: &SubsetY) -> Valuation {
        Valuation::from_fn(self.space.pairs(), Chain::Bool, |k| MvValue::Bool(r.contains(k))).expect("bool values")
    }
}

impl ValuationFn for TransitionSystem {
    fn domain(&self) -> &Arc<Universe> {
        self.space.pairs()
    }

    fn codomain(&self) -> &Arc<Universe> {
        self.space.pairs()
    }

    fn eval(&self, a: &Valuation) -> Result<Valuation, FnError> {
        if a.chain() != Chain::Bool || a.len() != self.space.pairs().len() {
            return Err(FnError::UniverseMismatch("B takes boolean valuations over X×X".into()));
        }
        Ok(self.space.matrix(Chain::Bool, |i, j| MvValue::Bool(self.transfer(i, j, |y1, y2| Self::related(a, &self.space, y1, y2))))?)
    }
}

impl Approximable for TransitionSystem {
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        match dir {
            Direction::Primal => Ok(self.approx_primal(a)?),
            Direction::Dual => self.bisim_fn()?.approx(a, dir),
        }
    }

    fn iota(&self, a: &Valuation, dir: Direction) -> Result<Option<MvValue>, FnError> {
        self.bisim_fn()?.iota_hat(a, dir).map(Some)
    }
}
