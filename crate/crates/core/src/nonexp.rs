//! Non-expansive combinators, the Galois pair `α`/`γ`, and approximations.
//!
//! A [`FnExpr`] is built from basic functions (constants, reindexing,
//! min/max over a relation, averages, translations) closed under
//! composition and disjoint union. Every such expression is non-expansive.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mv::{q, same_universe, Chain, MvError, MvValue, Rational, SubsetY, Universe, Valuation};
use crate::setfn::SetFn;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FnError {
    #[error(transparent)]
    Mv(#[from] MvError),
    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),
    #[error("malformed function: {0}")]
    Malformed(String),
    #[error("no closed-form approximation for {0}")]
    Unsupported(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Which side of the fixpoint theory is in use.
///
/// `Primal` deals with greatest fixpoints and increases (`f_a^#`, `[Y]^a`,
/// `δ_a`); `Dual` with least fixpoints and decreases (`f_#^a`, `[Y]_a`, `δ^a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Primal,
    Dual,
}

impl Direction {
    pub fn support(self, a: &Valuation) -> SubsetY {
        match self {
            Direction::Primal => a.support_floor(),
            Direction::Dual => a.support_ceil(),
        }
    }

    pub fn delta(self, a: &Valuation) -> MvValue {
        match self {
            Direction::Primal => a.delta_floor(),
            Direction::Dual => a.delta_ceil(),
        }
    }

    pub fn delta_on(self, a: &Valuation, s: &SubsetY) -> MvValue {
        match self {
            Direction::Primal => a.delta_floor_on(s),
            Direction::Dual => a.delta_ceil_on(s),
        }
    }

    pub fn flip(self) -> Direction {
        match self {
            Direction::Primal => Direction::Dual,
            Direction::Dual => Direction::Primal,
        }
    }
}

/// Direction of a [`BasicFn::Translate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shift {
    Up,
    Down,
}

/// A finitely supported probability distribution over universe indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    entries: Vec<(usize, Rational)>,
}

impl Distribution {
    /// Merges repeated keys and drops zero weights; weights must be
    /// non-negative and sum to exactly 1.
    pub fn new<I: IntoIterator<Item = (usize, Rational)>>(entries: I) -> Result<Distribution, FnError> {
        let mut v: Vec<(usize, Rational)> = Vec::new();
        for (i, w) in entries {
            if w < Rational::zero() {
                return Err(FnError::Malformed(format!("negative weight {w}")));
            }
            match v.iter_mut().find(|(j, _)| *j == i) {
                Some((_, acc)) => *acc += w,
                None => v.push((i, w)),
            }
        }
        v.retain(|(_, w)| !w.is_zero());
        v.sort_by_key(|(i, _)| *i);
        let total: Rational = v.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_one() {
            return Err(FnError::Malformed(format!("weights sum to {total}, not 1")));
        }
        Ok(Distribution { entries: v })
    }

    /// The Dirac distribution on `i`.
    pub fn dirac(i: usize) -> Distribution {
        Distribution { entries: vec![(i, Rational::one())] }
    }

    /// Uniform over the given (distinct) indices.
    pub fn uniform(idx: &[usize]) -> Result<Distribution, FnError> {
        let n = idx.len() as i64;
        if n == 0 {
            return Err(FnError::Malformed("uniform distribution over nothing".into()));
        }
        Distribution::new(idx.iter().map(|&i| (i, q(1, n))))
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(i, _)| *i)
    }

    pub fn weight(&self, i: usize) -> Rational {
        self.entries.iter().find(|(j, _)| *j == i).map(|(_, w)| w.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    /// `Σ p(y)·a(y)` over the unit interval.
    pub fn expect(&self, a: &Valuation) -> Result<MvValue, FnError> {
        if a.chain() != Chain::Unit {
            return Err(MvError::NeedsUnit(a.chain()).into());
        }
        let mut s = Rational::zero();
        for (i, w) in &self.entries {
            s += w * a.get(*i).to_rational();
        }
        Ok(MvValue::Unit(s))
    }
}

/// The basic non-expansive functions `M^Y → M^Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasicFn {
    /// `c_k(a) = k`.
    Constant(Valuation),
    /// `u*(a) = a ∘ u` where `u[z]` is an index of `Y`.
    Reindex(Vec<usize>),
    /// `min_R(a)(z) = min a[R⁻¹(z)]`, stored as `z ↦ R⁻¹(z)`.
    MinRel(Vec<Vec<usize>>),
    /// `max_R(a)(z) = max a[R⁻¹(z)]`.
    MaxRel(Vec<Vec<usize>>),
    /// `av_D(a)(p) = Σ p(y)·a(y)`, one distribution per `z`.
    Average(Vec<Distribution>),
    /// `a ⊕ c` or `a ⊖ c` pointwise; domain and codomain coincide.
    Translate { by: MvValue, shift: Shift },
}

impl BasicFn {
    fn name(&self) -> &'static str {
        match self {
            BasicFn::Constant(_) => "constant",
            BasicFn::Reindex(_) => "reindex",
            BasicFn::MinRel(_) => "min",
            BasicFn::MaxRel(_) => "max",
            BasicFn::Average(_) => "average",
            BasicFn::Translate { .. } => "translate",
        }
    }
}

/// One component of a disjoint union together with its embedding.
#[derive(Debug, Clone)]
pub struct UnionPart {
    expr: FnExpr,
    /// `inputs[j]` is the union-domain index of component-domain element `j`.
    inputs: Vec<usize>,
    /// `outputs[j]` is the union-codomain index of component-codomain element `j`.
    outputs: Vec<usize>,
}

impl UnionPart {
    pub fn new(expr: FnExpr, inputs: Vec<usize>, outputs: Vec<usize>) -> UnionPart {
        UnionPart { expr, inputs, outputs }
    }

    /// Embeds by matching element names.
    pub fn by_names(expr: FnExpr, dom: &Universe, cod: &Universe) -> Result<UnionPart, FnError> {
        let inputs = expr.domain().names().iter().map(|n| dom.require(n)).collect::<Result<_, _>>()?;
        let outputs = expr.codomain().names().iter().map(|n| cod.require(n)).collect::<Result<_, _>>()?;
        Ok(UnionPart { expr, inputs, outputs })
    }

    pub fn expr(&self) -> &FnExpr {
        &self.expr
    }
}

#[derive(Debug)]
enum Node {
    Basic { dom: Arc<Universe>, cod: Arc<Universe>, op: BasicFn },
    Compose { h: FnExpr, g: FnExpr },
    Union { dom: Arc<Universe>, cod: Arc<Universe>, parts: Vec<UnionPart> },
}

/// A shared DAG of basic functions, compositions and disjoint unions.
#[derive(Debug, Clone)]
pub struct FnExpr(Arc<Node>);

/// Anything that maps valuations to valuations.
pub trait ValuationFn {
    fn domain(&self) -> &Arc<Universe>;
    fn codomain(&self) -> &Arc<Universe>;
    fn eval(&self, a: &Valuation) -> Result<Valuation, FnError>;
}

/// A function whose approximations are available in closed form.
pub trait Approximable: ValuationFn {
    /// `f_a^#` for [`Direction::Primal`], `f_#^a` for [`Direction::Dual`].
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError>;

    /// A threshold `0 ⊏ ι̂ ⊑ ι_a^f` when one is cheaply known.
    fn iota(&self, _a: &Valuation, _dir: Direction) -> Result<Option<MvValue>, FnError> {
        Ok(None)
    }
}

fn check_len(what: &str, got: usize, expected: usize) -> Result<(), FnError> {
    if got != expected {
        return Err(FnError::Malformed(format!("{what}: expected {expected} entries, got {got}")));
    }
    Ok(())
}

fn check_indices<'a, I: IntoIterator<Item = &'a usize>>(what: &str, idx: I, bound: usize) -> Result<(), FnError> {
    for &i in idx {
        if i >= bound {
            return Err(FnError::Malformed(format!("{what}: index {i} outside a universe of size {bound}")));
        }
    }
    Ok(())
}

impl FnExpr {
    fn basic(dom: &Arc<Universe>, cod: &Arc<Universe>, op: BasicFn) -> FnExpr {
        FnExpr(Arc::new(Node::Basic { dom: dom.clone(), cod: cod.clone(), op }))
    }

    pub fn constant(dom: &Arc<Universe>, k: Valuation) -> FnExpr {
        let cod = k.universe().clone();
        FnExpr::basic(dom, &cod, BasicFn::Constant(k))
    }

    pub fn reindex(dom: &Arc<Universe>, cod: &Arc<Universe>, u: Vec<usize>) -> Result<FnExpr, FnError> {
        check_len("reindex map", u.len(), cod.len())?;
        check_indices("reindex map", &u, dom.len())?;
        Ok(FnExpr::basic(dom, cod, BasicFn::Reindex(u)))
    }

    pub fn min_rel(dom: &Arc<Universe>, cod: &Arc<Universe>, pre: Vec<Vec<usize>>) -> Result<FnExpr, FnError> {
        check_len("min relation", pre.len(), cod.len())?;
        check_indices("min relation", pre.iter().flatten(), dom.len())?;
        Ok(FnExpr::basic(dom, cod, BasicFn::MinRel(pre)))
    }

    pub fn max_rel(dom: &Arc<Universe>, cod: &Arc<Universe>, pre: Vec<Vec<usize>>) -> Result<FnExpr, FnError> {
        check_len("max relation", pre.len(), cod.len())?;
        check_indices("max relation", pre.iter().flatten(), dom.len())?;
        Ok(FnExpr::basic(dom, cod, BasicFn::MaxRel(pre)))
    }

    pub fn average(dom: &Arc<Universe>, cod: &Arc<Universe>, dists: Vec<Distribution>) -> Result<FnExpr, FnError> {
        check_len("average", dists.len(), cod.len())?;
        check_indices("average", dists.iter().flat_map(|d| d.max_index()).collect::<Vec<_>>().iter(), dom.len())?;
        Ok(FnExpr::basic(dom, cod, BasicFn::Average(dists)))
    }

    pub fn translate(dom: &Arc<Universe>, by: MvValue, shift: Shift) -> FnExpr {
        FnExpr::basic(dom, dom, BasicFn::Translate { by, shift })
    }

    /// `h ∘ g`.
    pub fn compose(h: &FnExpr, g: &FnExpr) -> Result<FnExpr, FnError> {
        if !same_universe(g.codomain(), h.domain()) {
            return Err(FnError::UniverseMismatch("codomain of g differs from domain of h".into()));
        }
        Ok(FnExpr(Arc::new(Node::Compose { h: h.clone(), g: g.clone() })))
    }

    /// Disjoint union; component codomains must partition `cod`.
    pub fn disjoint_union(dom: &Arc<Universe>, cod: &Arc<Universe>, parts: Vec<UnionPart>) -> Result<FnExpr, FnError> {
        let mut covered = vec![false; cod.len()];
        for p in &parts {
            check_len("union inputs", p.inputs.len(), p.expr.domain().len())?;
            check_len("union outputs", p.outputs.len(), p.expr.codomain().len())?;
            check_indices("union inputs", &p.inputs, dom.len())?;
            check_indices("union outputs", &p.outputs, cod.len())?;
            for &o in &p.outputs {
                if covered[o] {
                    return Err(FnError::Malformed(format!("codomain element {} covered twice", cod.name(o))));
                }
                covered[o] = true;
            }
        }
        if let Some(o) = covered.iter().position(|c| !c) {
            return Err(FnError::Malformed(format!("codomain element {} not covered", cod.name(o))));
        }
        Ok(FnExpr(Arc::new(Node::Union { dom: dom.clone(), cod: cod.clone(), parts })))
    }

    pub fn domain(&self) -> &Arc<Universe> {
        match &*self.0 {
            Node::Basic { dom, .. } | Node::Union { dom, .. } => dom,
            Node::Compose { g, .. } => g.domain(),
        }
    }

    pub fn codomain(&self) -> &Arc<Universe> {
        match &*self.0 {
            Node::Basic { cod, .. } | Node::Union { cod, .. } => cod,
            Node::Compose { h, .. } => h.codomain(),
        }
    }

    /// The basic function at a leaf.
    pub fn as_basic(&self) -> Option<&BasicFn> {
        match &*self.0 {
            Node::Basic { op, .. } => Some(op),
            _ => None,
        }
    }

    /// True when no `Translate` leaf occurs.
    pub fn is_toolbox(&self) -> bool {
        match &*self.0 {
            Node::Basic { op, .. } => !matches!(op, BasicFn::Translate { .. }),
            Node::Compose { h, g } => h.is_toolbox() && g.is_toolbox(),
            Node::Union { parts, .. } => parts.iter().all(|p| p.expr.is_toolbox()),
        }
    }

    fn check_input(&self, a: &Valuation) -> Result<(), FnError> {
        if !same_universe(a.universe(), self.domain()) {
            return Err(FnError::UniverseMismatch(format!(
                "valuation over {} elements, function domain has {}",
                a.len(),
                self.domain().len()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, a: &Valuation) -> Result<Valuation, FnError> {
        self.check_input(a)?;
        match &*self.0 {
            Node::Basic { cod, op, .. } => eval_basic(op, cod, a),
            Node::Compose { h, g } => h.eval(&g.eval(a)?),
            Node::Union { cod, parts, .. } => {
                let mut out = vec![a.chain().zero(); cod.len()];
                for p in parts {
                    let sub = a.pull(p.expr.domain(), &p.inputs);
                    let r = p.expr.eval(&sub)?;
                    for (j, &o) in p.outputs.iter().enumerate() {
                        out[o] = r.get(j).clone();
                    }
                }
                Ok(Valuation::new(cod, a.chain(), out)?)
            }
        }
    }

    /// Closed-form approximation by structural recursion.
    pub fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        self.check_input(a)?;
        let raw = match &*self.0 {
            Node::Basic { dom, cod, op } => approx_basic(op, dom, cod, a, &eval_basic(op, cod, a)?, dir)?,
            Node::Compose { h, g } => {
                let first = g.approx(a, dir)?;
                let second = h.approx(&g.eval(a)?, dir)?;
                first.then(&second)
            }
            Node::Union { dom, cod, parts } => {
                let mut comps = Vec::with_capacity(parts.len());
                for p in parts {
                    let sub = a.pull(p.expr.domain(), &p.inputs);
                    comps.push((p.expr.approx(&sub, dir)?, p.inputs.clone(), p.outputs.clone()));
                }
                let cod2 = cod.clone();
                SetFn::new(dom, cod, move |s| {
                    let mut out = SubsetY::empty(&cod2);
                    for (f, ins, outs) in &comps {
                        let local = SubsetY::from_indices(
                            f.domain(),
                            ins.iter().enumerate().filter(|(_, &i)| s.contains(i)).map(|(j, _)| j),
                        );
                        for j in f.apply(&local).iter() {
                            out.insert(outs[j]);
                        }
                    }
                    out
                })
            }
        };
        Ok(raw.restrict_input(&dir.support(a)))
    }

    /// Structural conservative threshold `ι̂` with `0 ⊏ ι̂ ⊑ ι_a^f`.
    pub fn iota_hat(&self, a: &Valuation, dir: Direction) -> Result<MvValue, FnError> {
        self.check_input(a)?;
        let base = dir.delta(a);
        match &*self.0 {
            Node::Basic { cod, op, .. } => {
                let fa = eval_basic(op, cod, a)?;
                Ok(match (op, dir) {
                    (BasicFn::MinRel(pre), Direction::Primal) => {
                        gap_threshold(base, pre, a, &fa.support_floor(), Extreme::Min)
                    }
                    (BasicFn::MaxRel(pre), Direction::Dual) => {
                        gap_threshold(base, pre, a, &fa.support_ceil(), Extreme::Max)
                    }
                    (BasicFn::Translate { shift, .. }, _) => {
                        // Only the shifts that can saturate at the far end need the
                        // codomain threshold as well.
                        match (shift, dir) {
                            (Shift::Up, Direction::Primal) | (Shift::Down, Direction::Dual) => {
                                base.min(dir.delta(&fa))
                            }
                            _ => base,
                        }
                    }
                    _ => base,
                })
            }
            Node::Compose { h, g } => {
                let ig = g.iota_hat(a, dir)?;
                let ih = h.iota_hat(&g.eval(a)?, dir)?;
                Ok(ig.min(ih))
            }
            Node::Union { parts, .. } => {
                let mut m = base;
                for p in parts {
                    let sub = a.pull(p.expr.domain(), &p.inputs);
                    m = m.min(p.expr.iota_hat(&sub, dir)?);
                }
                Ok(m)
            }
        }
    }

    /// The order-reversed function `b ↦ comp(f(comp(b)))`, again a toolbox expression.
    pub fn reversed(&self) -> FnExpr {
        match &*self.0 {
            Node::Basic { dom, cod, op } => {
                let op = match op {
                    BasicFn::Constant(k) => BasicFn::Constant(k.comp()),
                    BasicFn::Reindex(u) => BasicFn::Reindex(u.clone()),
                    BasicFn::MinRel(pre) => BasicFn::MaxRel(pre.clone()),
                    BasicFn::MaxRel(pre) => BasicFn::MinRel(pre.clone()),
                    BasicFn::Average(d) => BasicFn::Average(d.clone()),
                    BasicFn::Translate { by, shift } => BasicFn::Translate {
                        by: by.clone(),
                        shift: match shift {
                            Shift::Up => Shift::Down,
                            Shift::Down => Shift::Up,
                        },
                    },
                };
                FnExpr::basic(dom, cod, op)
            }
            Node::Compose { h, g } => FnExpr(Arc::new(Node::Compose { h: h.reversed(), g: g.reversed() })),
            Node::Union { dom, cod, parts } => FnExpr(Arc::new(Node::Union {
                dom: dom.clone(),
                cod: cod.clone(),
                parts: parts
                    .iter()
                    .map(|p| UnionPart { expr: p.expr.reversed(), inputs: p.inputs.clone(), outputs: p.outputs.clone() })
                    .collect(),
            })),
        }
    }

    /// Number of nodes, shared subterms counted once per occurrence.
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Basic { .. } => 1,
            Node::Compose { h, g } => 1 + h.size() + g.size(),
            Node::Union { parts, .. } => 1 + parts.iter().map(|p| p.expr.size()).sum::<usize>(),
        }
    }

    /// Visits nodes depth-first; used by serializers.
    pub fn view(&self) -> FnView<'_> {
        match &*self.0 {
            Node::Basic { dom, cod, op } => FnView::Basic { dom, cod, op },
            Node::Compose { h, g } => FnView::Compose { h, g },
            Node::Union { dom, cod, parts } => FnView::Union { dom, cod, parts },
        }
    }
}

/// Read-only view of a node.
pub enum FnView<'a> {
    Basic { dom: &'a Arc<Universe>, cod: &'a Arc<Universe>, op: &'a BasicFn },
    Compose { h: &'a FnExpr, g: &'a FnExpr },
    Union { dom: &'a Arc<Universe>, cod: &'a Arc<Universe>, parts: &'a [UnionPart] },
}

impl UnionPart {
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }
}

impl fmt::Display for FnExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Basic { op, .. } => match op {
                BasicFn::Translate { by, shift } => {
                    write!(f, "translate({}{by})", if *shift == Shift::Up { "+" } else { "-" })
                }
                _ => write!(f, "{}", op.name()),
            },
            Node::Compose { h, g } => write!(f, "({h} ∘ {g})"),
            Node::Union { parts, .. } => {
                let p: Vec<String> = parts.iter().map(|p| p.expr.to_string()).collect();
                write!(f, "({})", p.join(" ⊎ "))
            }
        }
    }
}

fn eval_basic(op: &BasicFn, cod: &Arc<Universe>, a: &Valuation) -> Result<Valuation, FnError> {
    let chain = a.chain();
    let values: Vec<MvValue> = match op {
        BasicFn::Constant(k) => {
            if k.chain() != chain {
                return Err(MvError::ChainMismatch { left: k.chain(), right: chain }.into());
            }
            return Ok(k.clone());
        }
        BasicFn::Reindex(u) => u.iter().map(|&y| a.get(y).clone()).collect(),
        BasicFn::MinRel(pre) => pre
            .iter()
            .map(|ys| ys.iter().map(|&y| a.get(y)).min().cloned().unwrap_or_else(|| chain.one()))
            .collect(),
        BasicFn::MaxRel(pre) => pre
            .iter()
            .map(|ys| ys.iter().map(|&y| a.get(y)).max().cloned().unwrap_or_else(|| chain.zero()))
            .collect(),
        BasicFn::Average(dists) => dists.iter().map(|d| d.expect(a)).collect::<Result<_, _>>()?,
        BasicFn::Translate { by, shift } => a
            .values()
            .iter()
            .map(|x| match shift {
                Shift::Up => x.try_add(by),
                Shift::Down => x.try_sub(by),
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(Valuation::new(cod, chain, values)?)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Extreme {
    Min,
    Max,
}

fn extremal_set(ys: &[usize], a: &Valuation, which: Extreme) -> Vec<usize> {
    let best = match which {
        Extreme::Min => ys.iter().map(|&y| a.get(y)).min(),
        Extreme::Max => ys.iter().map(|&y| a.get(y)).max(),
    };
    match best {
        Some(b) => ys.iter().copied().filter(|&y| a.get(y) == b).collect(),
        None => Vec::new(),
    }
}

/// `min({base} ∪ {|a(y) - a(ŷ)| : z ∈ support, ŷ extremal, y not})`.
fn gap_threshold(base: MvValue, pre: &[Vec<usize>], a: &Valuation, support: &SubsetY, which: Extreme) -> MvValue {
    let mut m = base;
    for z in support.iter() {
        let ext = extremal_set(&pre[z], a, which);
        let Some(&e) = ext.first() else { continue };
        let best = a.get(e);
        for &y in &pre[z] {
            let v = a.get(y);
            if v != best {
                let gap = match which {
                    Extreme::Min => v - best,
                    Extreme::Max => best - v,
                };
                m = m.min(gap);
            }
        }
    }
    m
}

fn approx_basic(
    op: &BasicFn,
    dom: &Arc<Universe>,
    cod: &Arc<Universe>,
    a: &Valuation,
    fa: &Valuation,
    dir: Direction,
) -> Result<SetFn, FnError> {
    let out_sup = dir.support(fa);
    let cod2 = cod.clone();
    Ok(match op {
        BasicFn::Constant(_) => SetFn::empty(dom, cod),
        BasicFn::Reindex(u) => {
            let u = u.clone();
            SetFn::new(dom, cod, move |s| {
                SubsetY::from_indices(&cod2, out_sup.iter().filter(|&z| s.contains(u[z])))
            })
        }
        BasicFn::MinRel(pre) | BasicFn::MaxRel(pre) => {
            let which = if matches!(op, BasicFn::MinRel(_)) { Extreme::Min } else { Extreme::Max };
            // Min needs all minimisers inside Y′ (primal) and one of them (dual); max dually.
            let need_all = matches!((which, dir), (Extreme::Min, Direction::Primal) | (Extreme::Max, Direction::Dual));
            let ext: Vec<(usize, Vec<usize>)> = out_sup.iter().map(|z| (z, extremal_set(&pre[z], a, which))).collect();
            SetFn::new(dom, cod, move |s| {
                SubsetY::from_indices(
                    &cod2,
                    ext.iter()
                        .filter(|(_, e)| {
                            if need_all {
                                e.iter().all(|&y| s.contains(y))
                            } else {
                                e.iter().any(|&y| s.contains(y))
                            }
                        })
                        .map(|(z, _)| *z),
                )
            })
        }
        BasicFn::Average(dists) => {
            let supp: Vec<(usize, Vec<usize>)> = out_sup.iter().map(|z| (z, dists[z].support().collect())).collect();
            SetFn::new(dom, cod, move |s| {
                SubsetY::from_indices(
                    &cod2,
                    supp.iter().filter(|(_, ys)| ys.iter().all(|&y| s.contains(y))).map(|(z, _)| *z),
                )
            })
        }
        BasicFn::Translate { .. } => return Err(FnError::Unsupported("translate")),
    })
}

impl ValuationFn for FnExpr {
    fn domain(&self) -> &Arc<Universe> {
        FnExpr::domain(self)
    }

    fn codomain(&self) -> &Arc<Universe> {
        FnExpr::codomain(self)
    }

    fn eval(&self, a: &Valuation) -> Result<Valuation, FnError> {
        FnExpr::eval(self, a)
    }
}

impl Approximable for FnExpr {
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        FnExpr::approx(self, a, dir)
    }

    fn iota(&self, a: &Valuation, dir: Direction) -> Result<Option<MvValue>, FnError> {
        self.iota_hat(a, dir).map(Some)
    }
}

/// `f(a)` for any valuation function.
pub fn eval<F: ValuationFn + ?Sized>(f: &F, a: &Valuation) -> Result<Valuation, FnError> {
    f.eval(a)
}

/// `f_a^#` in closed form.
pub fn approx_primal(f: &FnExpr, a: &Valuation) -> Result<SetFn, FnError> {
    f.approx(a, Direction::Primal)
}

/// `f_#^a` in closed form.
pub fn approx_dual(f: &FnExpr, a: &Valuation) -> Result<SetFn, FnError> {
    f.approx(a, Direction::Dual)
}

/// Structural `ι̂` for a direction.
pub fn iota(f: &FnExpr, a: &Valuation, dir: Direction) -> Result<MvValue, FnError> {
    f.iota_hat(a, dir)
}

fn require_positive(d: &MvValue) -> Result<(), FnError> {
    if d.is_zero() {
        return Err(FnError::Precondition("threshold must be strictly positive".into()));
    }
    Ok(())
}

fn require_chain(a: &Valuation, d: &MvValue) -> Result<(), FnError> {
    if a.chain() != d.chain() {
        return Err(MvError::ChainMismatch { left: a.chain(), right: d.chain() }.into());
    }
    Ok(())
}

/// `α_{a,δ}(Y′) = a ⊕ δ_{Y′}`.
pub fn alpha(a: &Valuation, delta: &MvValue, yp: &SubsetY) -> Result<Valuation, FnError> {
    require_chain(a, delta)?;
    require_positive(delta)?;
    if !yp.is_subset(&a.support_floor()) {
        return Err(FnError::Precondition("Y′ leaves the support [Y]^a".into()));
    }
    Ok(a.try_add(&Valuation::indicator(yp, delta))?)
}

/// `α^{a,θ}(Y′) = a ⊖ θ_{Y′}`.
pub fn alpha_dual(a: &Valuation, theta: &MvValue, yp: &SubsetY) -> Result<Valuation, FnError> {
    require_chain(a, theta)?;
    require_positive(theta)?;
    if !yp.is_subset(&a.support_ceil()) {
        return Err(FnError::Precondition("Y′ leaves the support [Y]_a".into()));
    }
    Ok(a.try_sub(&Valuation::indicator(yp, theta))?)
}

/// `γ_{a,δ}(b) = {y ∈ [Y]^a | b(y) ⊖ a(y) ⊒ δ}` for `a ⊑ b ⊑ a ⊕ δ`.
pub fn gamma(a: &Valuation, delta: &MvValue, b: &Valuation) -> Result<SubsetY, FnError> {
    require_chain(a, delta)?;
    let upper = a.try_add(&Valuation::constant(a.universe(), delta.clone()))?;
    if !a.try_leq(b)? || !b.try_leq(&upper)? {
        return Err(FnError::Precondition("b outside [a, a ⊕ δ]".into()));
    }
    let sup = a.support_floor();
    Ok(SubsetY::from_indices(a.universe(), sup.iter().filter(|&y| &(b.get(y) - a.get(y)) >= delta)))
}

/// `γ^{a,θ}(b) = {y ∈ [Y]_a | a(y) ⊖ b(y) ⊒ θ}` for `a ⊖ θ ⊑ b ⊑ a`.
pub fn gamma_dual(a: &Valuation, theta: &MvValue, b: &Valuation) -> Result<SubsetY, FnError> {
    require_chain(a, theta)?;
    let lower = a.try_sub(&Valuation::constant(a.universe(), theta.clone()))?;
    if !lower.try_leq(b)? || !b.try_leq(a)? {
        return Err(FnError::Precondition("b outside [a ⊖ θ, a]".into()));
    }
    let sup = a.support_ceil();
    Ok(SubsetY::from_indices(a.universe(), sup.iter().filter(|&y| &(a.get(y) - b.get(y)) >= theta)))
}

/// The definitional `f_{a,δ}^#(Y′) = γ_{f(a),δ}(f(α_{a,δ}(Y′)))`.
pub fn approx_at<F: ValuationFn + ?Sized>(f: &F, a: &Valuation, delta: &MvValue, yp: &SubsetY) -> Result<SubsetY, FnError> {
    let b = alpha(a, delta, yp)?;
    gamma(&f.eval(a)?, delta, &f.eval(&b)?)
}

/// The definitional dual `f_{#,θ}^a(Y′) = γ^{f(a),θ}(f(α^{a,θ}(Y′)))`.
pub fn approx_at_dual<F: ValuationFn + ?Sized>(f: &F, a: &Valuation, theta: &MvValue, yp: &SubsetY) -> Result<SubsetY, FnError> {
    let b = alpha_dual(a, theta, yp)?;
    gamma_dual(&f.eval(a)?, theta, &f.eval(&b)?)
}

/// Definitional approximation in either direction.
pub fn approx_at_dir<F: ValuationFn + ?Sized>(
    f: &F,
    a: &Valuation,
    delta: &MvValue,
    yp: &SubsetY,
    dir: Direction,
) -> Result<SubsetY, FnError> {
    match dir {
        Direction::Primal => approx_at(f, a, delta, yp),
        Direction::Dual => approx_at_dual(f, a, delta, yp),
    }
}

/// A pair of inputs on which `‖f(b) ⊖ f(a)‖ ⊑ ‖b ⊖ a‖` fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub a: Valuation,
    pub b: Valuation,
    pub input_gap: MvValue,
    pub output_gap: MvValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonExpansiveReport {
    pub trials: usize,
    pub violation: Option<Violation>,
}

impl NonExpansiveReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// A random chain element; unit values use denominators up to 12.
pub fn random_value<R: Rng + ?Sized>(chain: Chain, rng: &mut R) -> MvValue {
    match chain {
        Chain::Unit => {
            let d = rng.gen_range(1..=12i64);
            MvValue::Unit(q(rng.gen_range(0..=d), d))
        }
        Chain::Bounded(k) => MvValue::Bounded { n: rng.gen_range(0..=k), k },
        Chain::Bool => MvValue::Bool(rng.gen()),
    }
}

pub fn random_valuation<R: Rng + ?Sized>(universe: &Arc<Universe>, chain: Chain, rng: &mut R) -> Valuation {
    Valuation::from_fn(universe, chain, |_| random_value(chain, rng)).expect("values drawn from one chain")
}

/// Samples pairs of valuations and tests non-expansiveness in both orders.
pub fn check_nonexpansive<F: ValuationFn + ?Sized>(
    f: &F,
    chain: Chain,
    trials: usize,
    seed: u64,
) -> Result<NonExpansiveReport, FnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = f.domain().clone();
    for t in 0..trials {
        let a = random_valuation(&dom, chain, &mut rng);
        // half of the trials use a nearby b so that small gaps are exercised
        let b = if t % 2 == 0 {
            random_valuation(&dom, chain, &mut rng)
        } else {
            let d = random_valuation(&dom, chain, &mut rng);
            let step = Valuation::constant(&dom, random_value(chain, &mut rng));
            a.try_add(&d.try_mul(&step)?)?
        };
        let (fa, fb) = (f.eval(&a)?, f.eval(&b)?);
        for (x, y, fx, fy) in [(&a, &b, &fa, &fb), (&b, &a, &fb, &fa)] {
            let input_gap = y.try_sub(x)?.norm();
            let output_gap = fy.try_sub(fx)?.norm();
            if output_gap > input_gap {
                return Ok(NonExpansiveReport {
                    trials: t + 1,
                    violation: Some(Violation { a: x.clone(), b: y.clone(), input_gap, output_gap }),
                });
            }
        }
    }
    Ok(NonExpansiveReport { trials, violation: None })
}
