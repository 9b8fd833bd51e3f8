use std::fmt;
use std::sync::Arc;

use mvfix_core::nonexp::{Approximable, ValuationFn};
use mvfix_core::{Chain, Direction, Distribution, FnError, FnExpr, MvValue, Rational, SetFn, SubsetY, UnionPart, Universe, Valuation};
use num_traits::{One, Zero};
use rand::Rng;

use crate::GameError;

/// A node together with its outgoing structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Min(Vec<usize>),
    Max(Vec<usize>),
    Av(Distribution),
    Sink(Rational),
}

impl Node {
    pub fn kind(&self) -> &'static str {
        match self {
            Node::Min(_) => "min",
            Node::Max(_) => "max",
            Node::Av(_) => "av",
            Node::Sink(_) => "sink",
        }
    }

    /// Successor set of a player node.
    pub fn choices(&self) -> Option<&[usize]> {
        match self {
            Node::Min(s) | Node::Max(s) => Some(s),
            _ => None,
        }
    }

    fn owner(&self) -> Option<Player> {
        match self {
            Node::Min(_) => Some(Player::Min),
            Node::Max(_) => Some(Player::Max),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Min,
    Max,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Min => "min",
            Player::Max => "max",
        })
    }
}

/// A simple stochastic game over a finite set of named nodes.
#[derive(Debug, Clone)]
pub struct Ssg {
    nodes: Arc<Universe>,
    kinds: Vec<Node>,
    expr: FnExpr,
}

impl Ssg {
    pub fn new(nodes: &Arc<Universe>, kinds: Vec<Node>) -> Result<Ssg, GameError> {
        let n = nodes.len();
        if n == 0 {
            return Err(GameError::invalid("nodes", "a game needs at least one node"));
        }
        if kinds.len() != n {
            return Err(GameError::invalid("nodes", format!("expected {n} kinds, got {}", kinds.len())));
        }
        let mut kinds = kinds;
        for (v, k) in kinds.iter_mut().enumerate() {
            let field = || format!("nodes.{}", nodes.name(v));
            match k {
                Node::Min(s) | Node::Max(s) => {
                    s.sort_unstable();
                    s.dedup();
                    if s.is_empty() {
                        return Err(GameError::invalid(field(), "successor set is empty"));
                    }
                    if s.last().is_some_and(|&m| m >= n) {
                        return Err(GameError::invalid(field(), "successor out of range"));
                    }
                }
                Node::Av(d) => {
                    if d.max_index().is_some_and(|m| m >= n) {
                        return Err(GameError::invalid(field(), "successor out of range"));
                    }
                }
                Node::Sink(w) => {
                    if *w < Rational::zero() || *w > Rational::one() {
                        return Err(GameError::invalid(field(), "weight must lie in [0,1]"));
                    }
                }
            }
        }
        let expr = build_value_fn(nodes, &kinds)?;
        Ok(Ssg { nodes: nodes.clone(), kinds, expr })
    }

    pub fn nodes(&self) -> &Arc<Universe> {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn node(&self, v: usize) -> &Node {
        &self.kinds[v]
    }

    pub fn kinds(&self) -> &[Node] {
        &self.kinds
    }

    pub fn owned(&self, p: Player) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| self.kinds[v].owner() == Some(p))
    }

    /// `V = (η_min* ∘ min_∈) ⊎ (η_max* ∘ max_∈) ⊎ (η_av* ∘ av_D) ⊎ c_w`.
    pub fn value_fn(&self) -> &FnExpr {
        &self.expr
    }

    fn check(&self, a: &Valuation) -> Result<(), FnError> {
        if a.chain() != Chain::Unit || !mvfix_core::mv::same_universe(a.universe(), &self.nodes) {
            return Err(FnError::UniverseMismatch("value function takes unit valuations over V".into()));
        }
        Ok(())
    }

    fn eval_with(&self, a: &Valuation, fixed: Option<&Strategy>) -> Result<Valuation, FnError> {
        self.check(a)?;
        let val = |v: usize| a.get(v).to_rational();
        let out = (0..self.len()).map(|v| match (&self.kinds[v], fixed) {
            (Node::Sink(w), _) => w.clone(),
            (Node::Av(d), _) => d.entries().iter().map(|(u, p)| p * val(*u)).sum(),
            (Node::Min(_), Some(s)) | (Node::Max(_), Some(s)) if s.owner == self.kinds[v].owner().expect("player node") => {
                val(s.choice(v))
            }
            (Node::Min(succ), _) => succ.iter().map(|&u| val(u)).min().expect("non-empty"),
            (Node::Max(succ), _) => succ.iter().map(|&u| val(u)).max().expect("non-empty"),
        });
        Ok(Valuation::unit(&self.nodes, out.collect())?)
    }

    /// `V_s(a)`: the owner of `s` plays `s`, the opponent best-responds.
    pub fn eval_fixed(&self, s: &Strategy, a: &Valuation) -> Result<Valuation, FnError> {
        self.eval_with(a, Some(s))
    }

    /// Closed form of `V_#^a`.
    pub fn value_approx_dual(&self, a: &Valuation) -> Result<SetFn, GameError> {
        let top = self.eval(a)?.support_ceil();
        let supp = a.support_ceil();
        let (g, u, a) = (self.clone(), self.nodes.clone(), a.clone());
        Ok(SetFn::new(&self.nodes, &self.nodes, move |sp| {
            let sp = sp.intersection(&supp);
            let extremal = |succ: &[usize], best: &Rational| -> Vec<usize> {
                succ.iter().copied().filter(|&x| &a.get(x).to_rational() == best).collect()
            };
            SubsetY::from_indices(
                &u,
                top.iter().filter(|&v| match &g.kinds[v] {
                    Node::Sink(_) => false,
                    Node::Av(d) => d.support().all(|x| sp.contains(x)),
                    Node::Min(s) => {
                        let best = s.iter().map(|&x| a.get(x).to_rational()).min().expect("non-empty");
                        extremal(s, &best).into_iter().any(|x| sp.contains(x))
                    }
                    Node::Max(s) => {
                        let best = s.iter().map(|&x| a.get(x).to_rational()).max().expect("non-empty");
                        extremal(s, &best).into_iter().all(|x| sp.contains(x))
                    }
                }),
            )
        }))
    }
}

fn build_value_fn(nodes: &Arc<Universe>, kinds: &[Node]) -> Result<FnExpr, GameError> {
    let all: Vec<usize> = (0..nodes.len()).collect();
    let sub = |idx: &[usize]| Universe::shared(idx.iter().map(|&v| nodes.name(v).to_string()));
    let pick = |f: fn(&Node) -> bool| -> Vec<usize> { all.iter().copied().filter(|&v| f(&kinds[v])).collect() };
    let mins = pick(|k| matches!(k, Node::Min(_)));
    let maxs = pick(|k| matches!(k, Node::Max(_)));
    let avs = pick(|k| matches!(k, Node::Av(_)));
    let sinks = pick(|k| matches!(k, Node::Sink(_)));
    let succ = |idx: &[usize]| -> Vec<Vec<usize>> { idx.iter().map(|&v| kinds[v].choices().expect("player").to_vec()).collect() };

    let mut parts = Vec::new();
    if !mins.is_empty() {
        parts.push(UnionPart::new(FnExpr::min_rel(nodes, &sub(&mins)?, succ(&mins))?, all.clone(), mins));
    }
    if !maxs.is_empty() {
        parts.push(UnionPart::new(FnExpr::max_rel(nodes, &sub(&maxs)?, succ(&maxs))?, all.clone(), maxs));
    }
    if !avs.is_empty() {
        let dists = avs
            .iter()
            .map(|&v| match &kinds[v] {
                Node::Av(d) => d.clone(),
                _ => unreachable!(),
            })
            .collect();
        parts.push(UnionPart::new(FnExpr::average(nodes, &sub(&avs)?, dists)?, all.clone(), avs));
    }
    if !sinks.is_empty() {
        let w = sinks
            .iter()
            .map(|&v| match &kinds[v] {
                Node::Sink(w) => w.clone(),
                _ => unreachable!(),
            })
            .collect();
        let none = Universe::shared(Vec::<String>::new())?;
        let k = FnExpr::constant(&none, Valuation::unit(&sub(&sinks)?, w)?);
        parts.push(UnionPart::new(k, Vec::new(), sinks));
    }
    Ok(FnExpr::disjoint_union(nodes, nodes, parts)?)
}

impl ValuationFn for Ssg {
    fn domain(&self) -> &Arc<Universe> {
        &self.nodes
    }

    fn codomain(&self) -> &Arc<Universe> {
        &self.nodes
    }

    fn eval(&self, a: &Valuation) -> Result<Valuation, FnError> {
        self.eval_with(a, None)
    }
}

impl Approximable for Ssg {
    fn approx(&self, a: &Valuation, dir: Direction) -> Result<SetFn, FnError> {
        match dir {
            Direction::Dual => Ok(self.value_approx_dual(a)?),
            Direction::Primal => self.expr.approx(a, dir),
        }
    }

    fn iota(&self, a: &Valuation, dir: Direction) -> Result<Option<MvValue>, FnError> {
        self.expr.iota_hat(a, dir).map(Some)
    }
}

/// A positional strategy: one successor per node of its owner.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    owner: Player,
    choice: Vec<Option<usize>>,
}

impl Strategy {
    /// Every owned node picks its lowest-id successor.
    pub fn lowest(g: &Ssg, owner: Player) -> Strategy {
        Strategy::pick(g, owner, |s| s[0])
    }

    pub fn random<R: Rng + ?Sized>(g: &Ssg, owner: Player, rng: &mut R) -> Strategy {
        Strategy::pick(g, owner, |s| s[rng.gen_range(0..s.len())])
    }

    fn pick(g: &Ssg, owner: Player, mut f: impl FnMut(&[usize]) -> usize) -> Strategy {
        let choice = g
            .kinds
            .iter()
            .map(|k| if k.owner() == Some(owner) { Some(f(k.choices().expect("player"))) } else { None })
            .collect();
        Strategy { owner, choice }
    }

    pub fn owner(&self) -> Player {
        self.owner
    }

    /// # Panics
    /// If `v` is not owned by this strategy's player.
    pub fn choice(&self, v: usize) -> usize {
        self.choice[v].expect("node owned by the strategy's player")
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        self.choice.get(v).copied().flatten()
    }

    pub fn choices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.choice.iter().enumerate().filter_map(|(v, c)| c.map(|c| (v, c)))
    }

    pub fn with(&self, g: &Ssg, v: usize, succ: usize) -> Result<Strategy, GameError> {
        let field = format!("strategy.{}", g.nodes.name(v));
        match g.kinds.get(v) {
            Some(k) if k.owner() == Some(self.owner) => {
                if !k.choices().expect("player").contains(&succ) {
                    return Err(GameError::invalid(field, format!("`{}` is not a successor", g.nodes.name(succ))));
                }
            }
            _ => return Err(GameError::invalid(field, format!("not a {} node", self.owner))),
        }
        let mut s = self.clone();
        s.choice[v] = Some(succ);
        Ok(s)
    }

    /// Positional strategies of `owner`, in lexicographic order; `None` past `cap`.
    pub fn enumerate(g: &Ssg, owner: Player, cap: usize) -> Option<Vec<Strategy>> {
        let owned: Vec<usize> = g.owned(owner).collect();
        let mut count: usize = 1;
        for &v in &owned {
            count = count.checked_mul(g.kinds[v].choices().expect("player").len())?;
            if count > cap {
                return None;
            }
        }
        let mut out = Vec::with_capacity(count);
        let mut idx = vec![0usize; owned.len()];
        loop {
            let mut s = Strategy::lowest(g, owner);
            for (k, &v) in owned.iter().enumerate() {
                s.choice[v] = Some(g.kinds[v].choices().expect("player")[idx[k]]);
            }
            out.push(s);
            let mut k = 0;
            loop {
                if k == owned.len() {
                    return Some(out);
                }
                idx[k] += 1;
                if idx[k] < g.kinds[owned[k]].choices().expect("player").len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}
