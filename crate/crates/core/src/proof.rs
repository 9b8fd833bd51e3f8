//! Powerset fixpoints, the proof rules, and jumps out of non-extremal fixpoints.

use std::fmt;

use thiserror::Error;

use crate::mv::{MvError, MvValue, SubsetY, Valuation};
use crate::nonexp::{alpha, alpha_dual, Approximable, Direction, FnError, ValuationFn};
use crate::setfn::SetFn;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error(transparent)]
    Fn(#[from] FnError),
    #[error(transparent)]
    Mv(#[from] MvError),
    #[error("function must map a universe to itself")]
    NotEndo,
    #[error("valuation is not a fixpoint")]
    NotAFixpoint,
    #[error("witness set is empty, nothing to improve")]
    NothingToImprove,
    #[error("no safe jump found below {0}")]
    NoSafeJump(MvValue),
    #[error("inner solver failed: {0}")]
    Inner(String),
    #[error("inner solver returned a valuation that is not a fixpoint")]
    InnerNotFixpoint,
    #[error("jump did not move the valuation")]
    Stalled,
    #[error("gave up after {0} rounds")]
    RoundLimit(usize),
}

/// Outcome of a proof rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// The rule succeeded (`ν` of the set-function is empty).
    Certified,
    /// The complete fixpoint rule failed: the valuation is not extremal.
    Refuted,
    /// The sound but incomplete bound rule found a non-empty witness.
    Inconclusive,
    /// The rule's precondition does not hold.
    Inapplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Certified => "certified",
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Inapplicable => "inapplicable",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub verdict: Verdict,
    /// `ν` of the set-function; empty unless refuted or inconclusive.
    pub witness: SubsetY,
    /// Jump amount, when one was computed.
    pub theta: Option<MvValue>,
    /// Why the rule was inapplicable.
    pub note: Option<String>,
}

impl Certificate {
    fn inapplicable(a: &Valuation, note: impl Into<String>) -> Certificate {
        Certificate {
            verdict: Verdict::Inapplicable,
            witness: SubsetY::empty(a.universe()),
            theta: None,
            note: Some(note.into()),
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// A jump `a ⊕ θ_{Y′}` (primal) or `a ⊖ θ_{Y′}` (dual).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jump {
    pub value: Valuation,
    pub theta: MvValue,
    pub witness: SubsetY,
}

/// Greatest fixpoint of a monotone `g` below `top` by Kleene descent.
pub fn gfp_setfn(g: &SetFn, top: &SubsetY) -> SubsetY {
    let mut cur = top.clone();
    loop {
        let next = g.apply(&cur).intersection(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn check_endo<F: ValuationFn + ?Sized>(f: &F) -> Result<(), ProofError> {
    if !crate::mv::same_universe(f.domain(), f.codomain()) {
        return Err(ProofError::NotEndo);
    }
    Ok(())
}

/// `ν f_a^#` (primal) or `ν f_#^a` (dual) from the full support.
pub fn witness_set<F: Approximable + ?Sized>(f: &F, a: &Valuation, dir: Direction) -> Result<SubsetY, ProofError> {
    let g = f.approx(a, dir)?;
    Ok(gfp_setfn(&g, &dir.support(a)))
}

/// Tests whether a fixpoint `a` is the greatest (primal) or least (dual) one.
pub fn is_extremal_fixpoint<F: Approximable + ?Sized>(f: &F, a: &Valuation, dir: Direction) -> Result<Certificate, ProofError> {
    check_endo(f)?;
    if &f.eval(a)? != a {
        return Ok(Certificate::inapplicable(a, "candidate is not a fixpoint"));
    }
    let witness = witness_set(f, a, dir)?;
    let verdict = if witness.is_empty() { Verdict::Certified } else { Verdict::Refuted };
    Ok(Certificate { verdict, witness, theta: None, note: None })
}

/// `ν f_a^# = ∅` iff `a = νf`.
pub fn is_greatest_fixpoint<F: Approximable + ?Sized>(f: &F, a: &Valuation) -> Result<Certificate, ProofError> {
    is_extremal_fixpoint(f, a, Direction::Primal)
}

/// `ν f_#^a = ∅` iff `a = μf`.
pub fn is_least_fixpoint<F: Approximable + ?Sized>(f: &F, a: &Valuation) -> Result<Certificate, ProofError> {
    is_extremal_fixpoint(f, a, Direction::Dual)
}

/// The restricted set-function `f_a^*` (or `f_*^a`) and its top element.
pub fn restricted_approx<F: Approximable + ?Sized>(
    f: &F,
    a: &Valuation,
    dir: Direction,
) -> Result<(SetFn, SubsetY), ProofError> {
    let fa = f.eval(a)?;
    let agree = a.agreement(&fa)?;
    let g = f.approx(a, dir)?.restrict_image(&agree);
    let top = dir.support(a).intersection(&agree);
    Ok((g, top))
}

/// Bound rule: for a pre-fixpoint (primal) `ν f_a^* = ∅` implies `νf ⊑ a`;
/// for a post-fixpoint (dual) `ν f_*^a = ∅` implies `a ⊑ μf`.
pub fn certify_bound<F: Approximable + ?Sized>(f: &F, a: &Valuation, dir: Direction) -> Result<Certificate, ProofError> {
    check_endo(f)?;
    let fa = f.eval(a)?;
    let ok = match dir {
        Direction::Primal => fa.try_leq(a)?,
        Direction::Dual => a.try_leq(&fa)?,
    };
    if !ok {
        let what = if dir == Direction::Primal { "pre-fixpoint" } else { "post-fixpoint" };
        return Ok(Certificate::inapplicable(a, format!("candidate is not a {what}")));
    }
    let (g, top) = restricted_approx(f, a, dir)?;
    let witness = gfp_setfn(&g, &top);
    let verdict = if witness.is_empty() { Verdict::Certified } else { Verdict::Inconclusive };
    Ok(Certificate { verdict, witness, theta: None, note: None })
}

pub fn certify_upper_bound<F: Approximable + ?Sized>(f: &F, a: &Valuation) -> Result<Certificate, ProofError> {
    certify_bound(f, a, Direction::Primal)
}

pub fn certify_lower_bound<F: Approximable + ?Sized>(f: &F, a: &Valuation) -> Result<Certificate, ProofError> {
    certify_bound(f, a, Direction::Dual)
}

fn shifted(a: &Valuation, theta: &MvValue, w: &SubsetY, dir: Direction) -> Result<Valuation, ProofError> {
    Ok(match dir {
        Direction::Primal => alpha(a, theta, w)?,
        Direction::Dual => alpha_dual(a, theta, w)?,
    })
}

/// True when `b` is a post-fixpoint (primal) or pre-fixpoint (dual).
fn lands<F: ValuationFn + ?Sized>(f: &F, b: &Valuation, dir: Direction) -> Result<bool, ProofError> {
    let fb = f.eval(b)?;
    Ok(match dir {
        Direction::Primal => b.try_leq(&fb)?,
        Direction::Dual => fb.try_leq(b)?,
    })
}

const MAX_HALVINGS: usize = 512;

/// Picks `θ ⊑ δ(Y′)` so that the shifted valuation is a post-(pre-)fixpoint.
///
/// Starts from the structural `ι̂` when available (otherwise halves down from
/// `δ(Y′)`), then doubles while the check passes, capped at `δ(Y′)`.
pub fn choose_theta<F: Approximable + ?Sized>(
    f: &F,
    a: &Valuation,
    witness: &SubsetY,
    dir: Direction,
) -> Result<MvValue, ProofError> {
    let cap = dir.delta_on(a, witness);
    let ok = |t: &MvValue| -> Result<bool, ProofError> { lands(f, &shifted(a, t, witness, dir)?, dir) };
    let mut theta = match f.iota(a, dir)? {
        Some(i) => i.min(cap.clone()),
        None => cap.clone(),
    };
    let mut halvings = 0;
    while !ok(&theta)? {
        halvings += 1;
        theta = match theta.halve() {
            Some(h) if halvings <= MAX_HALVINGS => h,
            _ => return Err(ProofError::NoSafeJump(cap)),
        };
    }
    loop {
        let next = theta.double().min(cap.clone());
        if next == theta || !ok(&next)? {
            return Ok(theta);
        }
        theta = next;
    }
}

/// Jumps from a non-extremal fixpoint along its witness set.
pub fn improve_fixpoint<F: Approximable + ?Sized>(f: &F, a: &Valuation, dir: Direction) -> Result<Jump, ProofError> {
    check_endo(f)?;
    if &f.eval(a)? != a {
        return Err(ProofError::NotAFixpoint);
    }
    let witness = witness_set(f, a, dir)?;
    if witness.is_empty() {
        return Err(ProofError::NothingToImprove);
    }
    let theta = choose_theta(f, a, &witness, dir)?;
    let value = shifted(a, &theta, &witness, dir)?;
    debug_assert!(lands(f, &value, dir)?);
    Ok(Jump { value, theta, witness })
}

/// From a fixpoint below `νf` to a larger post-fixpoint.
pub fn improve_post_fixpoint<F: Approximable + ?Sized>(f: &F, a: &Valuation) -> Result<Jump, ProofError> {
    improve_fixpoint(f, a, Direction::Primal)
}

/// From a fixpoint above `μf` to a smaller pre-fixpoint.
pub fn improve_pre_fixpoint<F: Approximable + ?Sized>(f: &F, a: &Valuation) -> Result<Jump, ProofError> {
    improve_fixpoint(f, a, Direction::Dual)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalRun {
    pub value: Valuation,
    pub jumps: usize,
    pub rounds: usize,
}

const MAX_ROUNDS: usize = 100_000;

/// Alternates an exact inner solver with certification and jumps.
///
/// Primal: `a0` is a post-fixpoint and `inner` returns a fixpoint above its
/// argument; the result is `νf`. Dual: `a0` is a pre-fixpoint, `inner`
/// returns a fixpoint below its argument, and the result is `μf`.
pub fn extremal_fixpoint_via_jumps<F, I, E>(f: &F, a0: &Valuation, dir: Direction, mut inner: I) -> Result<ExtremalRun, ProofError>
where
    F: Approximable + ?Sized,
    I: FnMut(&Valuation) -> Result<Valuation, E>,
    E: fmt::Display,
{
    check_endo(f)?;
    let mut start = a0.clone();
    let mut jumps = 0;
    for round in 1..=MAX_ROUNDS {
        let a = inner(&start).map_err(|e| ProofError::Inner(e.to_string()))?;
        if f.eval(&a)? != a {
            return Err(ProofError::InnerNotFixpoint);
        }
        let witness = witness_set(f, &a, dir)?;
        if witness.is_empty() {
            return Ok(ExtremalRun { value: a, jumps, rounds: round });
        }
        let theta = choose_theta(f, &a, &witness, dir)?;
        let next = shifted(&a, &theta, &witness, dir)?;
        if next == a {
            return Err(ProofError::Stalled);
        }
        jumps += 1;
        start = next;
    }
    Err(ProofError::RoundLimit(MAX_ROUNDS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mv::Universe;

    #[test]
    fn identity_and_empty_set_functions() {
        let u = Universe::shared(["a", "b", "c"]).unwrap();
        let top = SubsetY::from_names(&u, &["a", "c"]).unwrap();
        assert_eq!(gfp_setfn(&SetFn::identity(&u), &top), top);
        assert!(gfp_setfn(&SetFn::empty(&u, &u), &top).is_empty());
    }

    #[test]
    fn chain_of_removals() {
        // keep i only when i+1 is kept; the last element is never kept
        let u = Universe::shared(["0", "1", "2", "3"]).unwrap();
        let u2 = u.clone();
        let g = SetFn::new(&u, &u, move |s| SubsetY::from_indices(&u2, (0..3).filter(|&i| s.contains(i + 1))));
        assert!(gfp_setfn(&g, &SubsetY::full(&u)).is_empty());
    }
}
