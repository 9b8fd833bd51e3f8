//! The Hausdorff lifting and its dual approximation.

use std::sync::Arc;

use mvfix_core::nonexp::{Approximable, ValuationFn};
use mvfix_core::{Chain, Direction, FnError, FnExpr, MvValue, Rational, SetFn, SubsetY, Universe, Valuation};
use num_traits::{One, Zero};

use crate::pairs::{couplings, set_name, PairSpace};
use crate::ModelError;

/// `H(d)(X1,X2)` for an arbitrary distance; `min ∅ = 1`, `max ∅ = 0`.
pub fn hausdorff_by<F: Fn(usize, usize) -> Rational>(x1: &[usize], x2: &[usize], d: F) -> Rational {
    let side = |xs: &[usize], ys: &[usize], flip: bool| -> Rational {
        xs.iter()
            .map(|&x| {
                ys.iter()
                    .map(|&y| if flip { d(y, x) } else { d(x, y) })
                    .min()
                    .unwrap_or_else(Rational::one)
            })
            .max()
            .unwrap_or_else(Rational::zero)
    };
    side(x1, x2, false).max(side(x2, x1, true))
}

/// Membership of `(X1, X2)` in `H_#^d(R)`: every element realising the
/// Hausdorff value through its nearest partner has such a partner inside `R`.
pub fn hausdorff_dual_member<F, R>(x1: &[usize], x2: &[usize], d: F, in_r: R) -> bool
where
    F: Fn(usize, usize) -> Rational,
    R: Fn(usize, usize) -> bool,
{
    let h = hausdorff_by(x1, x2, &d);
    if h.is_zero() {
        return false;
    }
    let left = x1.iter().all(|&a| {
        let m = x2.iter().map(|&b| d(a, b)).min().unwrap_or_else(Rational::one);
        m != h || x2.iter().any(|&b| in_r(a, b) && d(a, b) == h)
    });
    let right = x2.iter().all(|&b| {
        let m = x1.iter().map(|&a| d(a, b)).min().unwrap_or_else(Rational::one);
        m != h || x1.iter().any(|&a| in_r(a, b) && d(a, b) == h)
    });
    left && right
}

/// `H(d)(X1, X2)` for a unit valuation `d` over `X × X`.
pub fn hausdorff(space: &PairSpace, d: &Valuation, x1: &[usize], x2: &[usize]) -> MvValue {
    MvValue::Unit(hausdorff_by(x1, x2, |a, b| space.at(d, a, b).to_rational()))
}

/// `H : [0,1]^{X×X} → [0,1]^{P(X)×P(X)}` over all pairs of subsets.
#[derive(Debug, Clone)]
pub struct HausdorffLifting {
    space: PairSpace,
    subset_pairs: Arc<Universe>,
}

impl HausdorffLifting {
    /// Limited to `|X| ≤ 4`, since the codomain has `4^|X|` elements.
    pub fn new(space: &PairSpace) -> Result<HausdorffLifting, ModelError> {
        let n = space.n();
        if n > 4 {
            return Err(ModelError::TooLarge(format!("Hausdorff lifting over {n} states")));
        }
        let u = space.states();
        let names = (0..1u64 << (2 * n)).map(|k| {
            let (a, b) = split_mask(k, n);
            format!("{}|{}", set_name(u, &a), set_name(u, &b))
        });
        Ok(HausdorffLifting { space: space.clone(), subset_pairs: Universe::shared(names)? })
    }

    pub fn subset_pairs(&self) -> &Arc<Universe> {
        &self.subset_pairs
    }

    /// Index of `(X1, X2)` in the codomain.
    pub fn index(&self, x1: &[usize], x2: &[usize]) -> usize {
        let n = self.space.n();
        (crate::pairs::mask_of(x1) << n | crate::pairs::mask_of(x2)) as usize
    }

    pub fn split(&self, k: usize) -> (Vec<usize>, Vec<usize>) {
        split_mask(k as u64, self.space.n())
    }

    /// `H_#^d(R)` over all pairs of subsets.
    pub fn approx_dual(&self, d: &Valuation) -> SetFn {
        let (me, d) = (self.clone(), d.clone());
        let supp = d.support_ceil();
        SetFn::new(self.space.pairs(), &self.subset_pairs, move |r| {
            let r = r.intersection(&supp);
            let sp = &me.space;
            SubsetY::from_indices(
                &me.subset_pairs,
                (0..me.subset_pairs.len()).filter(|&k| {
                    let (a, b) = me.split(k);
                    hausdorff_dual_member(&a, &b, |x, y| sp.at(&d, x, y).to_rational(), |x, y| r.contains(sp.index(x, y)))
                }),
            )
        })
    }

    /// `min_u ∘ max_∈` over all relations on `X`; needs `|X| ≤ 3`.
    pub fn expr(&self) -> Result<FnExpr, ModelError> {
        let n = self.space.n();
        if n > 3 {
            return Err(ModelError::TooLarge(format!("powerset of {} pairs", n * n)));
        }
        let all: Vec<Vec<usize>> = (0u64..1 << (n * n))
            .map(|m| (0..n * n).filter(|b| m >> b & 1 == 1).collect())
            .collect();
        let rel_u = Universe::shared((0..all.len()).map(|k| format!("C{k}")))?;
        let max_in = FnExpr::max_rel(self.space.pairs(), &rel_u, all.clone())?;
        let pre: Vec<Vec<usize>> = (0..self.subset_pairs.len())
            .map(|k| {
                let (a, b) = self.split(k);
                let (ma, mb) = (crate::pairs::mask_of(&a), crate::pairs::mask_of(&b));
                (0..all.len())
                    .filter(|&c| {
                        let (p1, p2) = all[c].iter().fold((0u64, 0u64), |(x, y), &p| {
                            let (i, j) = self.space.split(p);
                            (x | 1 << i, y | 1 << j)
                        });
                        p1 == ma && p2 == mb
                    })
                    .collect()
            })
            .collect();
        let min_u = FnExpr::min_rel(&rel_u, &self.subset_pairs, pre)?;
        Ok(FnExpr::compose(&min_u, &max_in)?)
    }
}

fn split_mask(k: u64, n: usize) -> (Vec<usize>, Vec<usize>) {
    let hi = k >> n;
    let lo = k & ((1 << n) - 1);
    ((0..n).filter(|i| hi >> i & 1 == 1).collect(), (0..n).filter(|i| lo >> i & 1 == 1).collect())
}

impl ValuationFn for HausdorffLifting {
    fn domain(&self) -> &Arc<Universe> {
        self.space.pairs()
    }

    fn codomain(&self) -> &Arc<Universe> {
        &self.subset_pairs
    }

    fn eval(&self, d: &Valuation) -> Result<Valuation, FnError> {
        Ok(Valuation::from_fn(&self.subset_pairs, Chain::Unit, |k| {
            let (a, b) = self.split(k);
            hausdorff(&self.space, d, &a, &b)
        })?)
    }
}

impl Approximable for HausdorffLifting {
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        match dir {
            Direction::Dual => Ok(self.approx_dual(a)),
            Direction::Primal => self.expr()?.approx(a, dir),
        }
    }
}

/// `(η×η)* ∘ min_u ∘ max_∈` (or, `swapped`, `(η×η)* ∘ max_u ∘ min_∈`), with the
/// relation universe reduced to the set couplings of successor-set pairs
/// that actually occur.
pub(crate) fn successor_lifting(space: &PairSpace, succ: &[Vec<usize>], swapped: bool) -> Result<FnExpr, ModelError> {
    let n = space.n();
    if n > 8 {
        return Err(ModelError::TooLarge(format!("{n} states in a decomposed lifting")));
    }
    let mut keys: Vec<(usize, usize)> = Vec::new();
    let mut which = Vec::with_capacity(n * n);
    for k in 0..n * n {
        let (i, j) = space.split(k);
        let pos = keys.iter().position(|&(a, b)| succ[a] == succ[i] && succ[b] == succ[j]).unwrap_or_else(|| {
            keys.push((i, j));
            keys.len() - 1
        });
        which.push(pos);
    }
    let mut rels: Vec<u64> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut pre_q: Vec<Vec<usize>> = Vec::new();
    for &(i, j) in &keys {
        let mut pre = Vec::new();
        for c in couplings(&succ[i], &succ[j])? {
            let idx: Vec<usize> = c.iter().map(|&(a, b)| space.index(a, b)).collect();
            let mask = idx.iter().fold(0u64, |m, &x| m | 1 << x);
            let r = rels.iter().position(|&m| m == mask).unwrap_or_else(|| {
                rels.push(mask);
                members.push(idx);
                rels.len() - 1
            });
            pre.push(r);
        }
        pre_q.push(pre);
    }
    let qu = Universe::shared(keys.iter().map(|&(i, j)| {
        let u = space.states();
        format!("{}|{}", set_name(u, &succ[i]), set_name(u, &succ[j]))
    }))?;
    let cu = Universe::shared((0..rels.len()).map(|k| format!("C{k}")))?;
    let (inner, outer) = if swapped {
        (FnExpr::min_rel(space.pairs(), &cu, members)?, FnExpr::max_rel(&cu, &qu, pre_q)?)
    } else {
        (FnExpr::max_rel(space.pairs(), &cu, members)?, FnExpr::min_rel(&cu, &qu, pre_q)?)
    };
    let back = FnExpr::reindex(&qu, space.pairs(), which)?;
    Ok(FnExpr::compose(&back, &FnExpr::compose(&outer, &inner)?)?)
}
