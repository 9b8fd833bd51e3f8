//! Branching distances for metric transition systems.

use std::sync::{Arc, OnceLock};

use mvfix_core::nonexp::{Approximable, ValuationFn};
use mvfix_core::{Chain, Direction, FnError, FnExpr, MvValue, Rational, SetFn, SubsetY, UnionPart, Universe, Valuation};
use num_traits::{One, Signed};

use crate::hausdorff::{hausdorff_by, hausdorff_dual_member, successor_lifting};
use crate::pairs::PairSpace;
use crate::ModelError;

/// `(X, w, η)` with weights in `[0,1]` and successor sets.
#[derive(Debug, Clone)]
pub struct MetricTS {
    space: PairSpace,
    weights: Vec<Rational>,
    succ: Vec<Vec<usize>>,
    expr: Arc<OnceLock<FnExpr>>,
}

impl MetricTS {
    pub fn new(states: &Arc<Universe>, weights: Vec<Rational>, succ: Vec<Vec<usize>>) -> Result<MetricTS, ModelError> {
        let n = states.len();
        if weights.len() != n || succ.len() != n {
            return Err(ModelError::invalid("weights/succ", format!("expected {n} entries")));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.is_negative() || w > &Rational::one() {
                return Err(ModelError::invalid(format!("weights.{}", states.name(i)), format!("{w} is outside [0,1]")));
            }
        }
        let succ = normalize_succ(states, succ)?;
        Ok(MetricTS { space: PairSpace::new(states), weights, succ, expr: Arc::new(OnceLock::new()) })
    }

    pub fn space(&self) -> &PairSpace {
        &self.space
    }

    pub fn succ(&self, x: usize) -> &[usize] {
        &self.succ[x]
    }

    /// `w̄(x1,x2) = |w(x1) − w(x2)|`.
    pub fn weight_distance(&self, i: usize, j: usize) -> Rational {
        (&self.weights[i] - &self.weights[j]).abs()
    }

    fn h(&self, d: &Valuation, i: usize, j: usize) -> Rational {
        hausdorff_by(&self.succ[i], &self.succ[j], |a, b| self.space.at(d, a, b).to_rational())
    }

    /// `J_#^d(Z)`: pairs where the Hausdorff part strictly dominates the
    /// weight distance and the successor sets are in `H_#^d(Z)`.
    pub fn approx_dual(&self, d: &Valuation) -> Result<SetFn, ModelError> {
        let top = self.eval(d)?.support_ceil();
        let supp = d.support_ceil();
        let (me, d) = (self.clone(), d.clone());
        Ok(SetFn::new(self.space.pairs(), self.space.pairs(), move |z| {
            let z = z.intersection(&supp);
            let sp = &me.space;
            SubsetY::from_indices(
                sp.pairs(),
                top.iter().filter(|&k| {
                    let (i, j) = sp.split(k);
                    me.weight_distance(i, j) < me.h(&d, i, j)
                        && hausdorff_dual_member(
                            &me.succ[i],
                            &me.succ[j],
                            |a, b| sp.at(&d, a, b).to_rational(),
                            |a, b| z.contains(sp.index(a, b)),
                        )
                }),
            )
        }))
    }

    /// `J = max_p ∘ ((η×η)* ∘ H ⊎ c_w̄)` as a toolbox expression.
    pub fn mts_fn(&self) -> Result<&FnExpr, ModelError> {
        if let Some(e) = self.expr.get() {
            return Ok(e);
        }
        let e = self.build_expr()?;
        Ok(self.expr.get_or_init(|| e))
    }

    fn build_expr(&self) -> Result<FnExpr, ModelError> {
        let p = self.space.pairs();
        let m = p.len();
        let g = successor_lifting(&self.space, &self.succ, false)?;
        let both = Universe::shared(p.names().iter().map(|s| format!("{s}|h")).chain(p.names().iter().map(|s| format!("{s}|w"))))?;
        let none = Universe::shared(Vec::<String>::new())?;
        let wu = Universe::shared(p.names().iter().map(|s| format!("{s}|w")))?;
        let wbar = Valuation::from_fn(&wu, Chain::Unit, |k| {
            let (i, j) = self.space.split(k);
            MvValue::Unit(self.weight_distance(i, j))
        })?;
        let parts = vec![
            UnionPart::new(g, (0..m).collect(), (0..m).collect()),
            UnionPart::new(FnExpr::constant(&none, wbar), Vec::new(), (m..2 * m).collect()),
        ];
        let union = FnExpr::disjoint_union(p, &both, parts)?;
        let max_p = FnExpr::max_rel(&both, p, (0..m).map(|k| vec![k, k + m]).collect())?;
        Ok(FnExpr::compose(&max_p, &union)?)
    }

    /// `μJ` by Kleene iteration from 0; exact, since every value produced
    /// is a weight distance or 0.
    pub fn least_fixpoint(&self) -> Result<Valuation, ModelError> {
        let mut d = Valuation::zero(self.space.pairs(), Chain::Unit);
        loop {
            let next = self.eval(&d)?;
            if next == d {
                return Ok(d);
            }
            d = next;
        }
    }
}

pub(crate) fn normalize_succ(states: &Universe, succ: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>, ModelError> {
    succ.into_iter()
        .enumerate()
        .map(|(i, mut s)| {
            s.sort_unstable();
            s.dedup();
            if s.last().is_some_and(|&m| m >= states.len()) {
                return Err(ModelError::invalid(format!("succ.{}", states.name(i)), "successor out of range"));
            }
            Ok(s)
        })
        .collect()
}

impl ValuationFn for MetricTS {
    fn domain(&self) -> &Arc<Universe> {
        self.space.pairs()
    }

    fn codomain(&self) -> &Arc<Universe> {
        self.space.pairs()
    }

    fn eval(&self, d: &Valuation) -> Result<Valuation, FnError> {
        if d.chain() != Chain::Unit || d.len() != self.space.pairs().len() {
            return Err(FnError::UniverseMismatch("J takes unit valuations over X×X".into()));
        }
        Ok(self.space.matrix(Chain::Unit, |i, j| {
            let h = self.h(d, i, j);
            let w = self.weight_distance(i, j);
            MvValue::Unit(if h > w { h } else { w })
        })?)
    }
}

impl Approximable for MetricTS {
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        match dir {
            Direction::Dual => Ok(self.approx_dual(a)?),
            Direction::Primal => self.mts_fn()?.approx(a, dir),
        }
    }

    fn iota(&self, a: &Valuation, dir: Direction) -> Result<Option<MvValue>, FnError> {
        self.mts_fn()?.iota_hat(a, dir).map(Some)
    }
}

