//! Strategy iteration, value iteration and a brute-force oracle.

use mvfix_core::proof::{gfp_setfn, improve_pre_fixpoint, witness_set};
use mvfix_core::{Direction, Rational, SetFn, SubsetY, Valuation};
use mvfix_lp::{gauss_solve, solve_lp, LinearProgram, LpStatus, Relation, Sense};
use num_traits::{One, ToPrimitive, Zero};

use crate::model::{Node, Player, Ssg, Strategy};
use crate::GameError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    /// Exact solves of a one-player game.
    pub iterations: usize,
    pub jumps: usize,
    pub lp_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub values: Valuation,
    pub min: Strategy,
    pub max: Strategy,
    pub stats: Stats,
}

fn one_player_lp(g: &Ssg, sense: Sense) -> LinearProgram {
    let n = g.len();
    let mut lp = LinearProgram::valuation(sense, n).with_names(g.nodes().names().to_vec());
    for v in 0..n {
        lp.set_objective(v, Rational::one());
        match g.node(v) {
            Node::Sink(w) => lp.set_bound(v, w.clone(), Some(w.clone())),
            Node::Av(d) => {
                let terms = std::iter::once((v, Rational::one())).chain(d.entries().iter().map(|(u, p)| (*u, -p.clone())));
                lp.add_row(terms, Relation::Eq, Rational::zero());
            }
            _ => {}
        }
    }
    lp
}

fn run(lp: &LinearProgram, g: &Ssg) -> Result<Valuation, GameError> {
    let sol = solve_lp(lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(GameError::Solver(sol.status));
    }
    Ok(Valuation::unit(g.nodes(), sol.x)?)
}

fn check_owner(s: &Strategy, p: Player) -> Result<(), GameError> {
    if s.owner() != p {
        return Err(GameError::invalid("strategy", format!("expected a {p} strategy")));
    }
    Ok(())
}

/// `μV_τ`: minimise `Σ a` with `a(v) = a(τ(v))` on MIN and `a(v) ≥ a(v′)` on MAX.
pub fn lfp_fixed_min(g: &Ssg, tau: &Strategy) -> Result<Valuation, GameError> {
    check_owner(tau, Player::Min)?;
    let mut lp = one_player_lp(g, Sense::Min);
    for v in 0..g.len() {
        match g.node(v) {
            Node::Min(_) => lp.add_row([(v, Rational::one()), (tau.choice(v), -Rational::one())], Relation::Eq, Rational::zero()),
            Node::Max(succ) => {
                for &u in succ {
                    lp.add_row([(v, Rational::one()), (u, -Rational::one())], Relation::Ge, Rational::zero());
                }
            }
            _ => {}
        }
    }
    run(&lp, g)
}

/// `C_σ = ν c_σ`: nodes from which Min can keep the play away from sinks.
pub fn forced_cycle_nodes(g: &Ssg, sigma: &Strategy) -> Result<SubsetY, GameError> {
    check_owner(sigma, Player::Max)?;
    let (gc, sc, u) = (g.clone(), sigma.clone(), g.nodes().clone());
    let c = SetFn::new(g.nodes(), g.nodes(), move |x| {
        SubsetY::from_indices(
            &u,
            (0..gc.len()).filter(|&v| match gc.node(v) {
                Node::Min(succ) => succ.iter().any(|&w| x.contains(w)),
                Node::Max(_) => x.contains(sc.choice(v)),
                Node::Av(d) => d.support().all(|w| x.contains(w)),
                Node::Sink(_) => false,
            }),
        )
    });
    Ok(gfp_setfn(&c, &SubsetY::full(g.nodes())))
}

/// `μV_σ`: pin `C_σ` to 0, then maximise `Σ a` with `a(v) = a(σ(v))` on MAX
/// and `a(v) ≤ a(v′)` on MIN.
pub fn lfp_fixed_max(g: &Ssg, sigma: &Strategy) -> Result<Valuation, GameError> {
    let c = forced_cycle_nodes(g, sigma)?;
    let mut lp = one_player_lp(g, Sense::Max);
    for v in 0..g.len() {
        if c.contains(v) {
            lp.set_bound(v, Rational::zero(), Some(Rational::zero()));
        }
        match g.node(v) {
            Node::Max(_) => lp.add_row([(v, Rational::one()), (sigma.choice(v), -Rational::one())], Relation::Eq, Rational::zero()),
            Node::Min(succ) => {
                for &u in succ {
                    lp.add_row([(v, Rational::one()), (u, -Rational::one())], Relation::Le, Rational::zero());
                }
            }
            _ => {}
        }
    }
    run(&lp, g)
}

/// Best successor under `a`; ties go to the lowest id.
fn best(succ: &[usize], a: &Valuation, p: Player) -> usize {
    let key = |u: &usize| a.get(*u).to_rational();
    let mut it = succ.iter();
    let mut b = *it.next().expect("non-empty");
    for &u in it {
        let better = match p {
            Player::Min => key(&u) < key(&b),
            Player::Max => key(&u) > key(&b),
        };
        if better {
            b = u;
        }
    }
    b
}

fn switch(g: &Ssg, s: &Strategy, a: &Valuation, p: Player) -> Result<Strategy, GameError> {
    check_owner(s, p)?;
    let mut out = s.clone();
    for v in g.owned(p) {
        let b = best(g.node(v).choices().expect("player"), a, p);
        let (cur, new) = (a.get(s.choice(v)).to_rational(), a.get(b).to_rational());
        let strict = match p {
            Player::Min => new < cur,
            Player::Max => new > cur,
        };
        if strict {
            out = out.with(g, v, b)?;
        }
    }
    Ok(out)
}

/// Switches a MIN node only where some successor is strictly smaller under `a`.
pub fn switch_min(g: &Ssg, tau: &Strategy, a: &Valuation) -> Result<Strategy, GameError> {
    switch(g, tau, a, Player::Min)
}

/// Switches a MAX node only where some successor is strictly larger under `a`.
pub fn switch_max(g: &Ssg, sigma: &Strategy, a: &Valuation) -> Result<Strategy, GameError> {
    switch(g, sigma, a, Player::Max)
}

/// Lowest-id best response of `p` against `a`.
pub fn best_response(g: &Ssg, a: &Valuation, p: Player) -> Strategy {
    let mut s = Strategy::lowest(g, p);
    for v in g.owned(p) {
        s = s.with(g, v, best(g.node(v).choices().expect("player"), a, p)).expect("successor");
    }
    s
}

fn strictly_below(b: &Valuation, a: &Valuation) -> bool {
    b.leq(a) && b != a
}

/// Strategy iteration from above: Min switches until stable, then the
/// approximation detects vicious cycles and a jump escapes them.
pub fn strategy_iteration_above(g: &Ssg, tau0: &Strategy) -> Result<Solution, GameError> {
    check_owner(tau0, Player::Min)?;
    let mut stats = Stats::default();
    let solve = |tau: &Strategy, stats: &mut Stats| {
        stats.iterations += 1;
        stats.lp_calls += 1;
        lfp_fixed_min(g, tau)
    };
    let mut tau = tau0.clone();
    let mut a = solve(&tau, &mut stats)?;
    loop {
        let next = switch_min(g, &tau, &a)?;
        if next != tau {
            tau = next;
            let b = solve(&tau, &mut stats)?;
            assert!(strictly_below(&b, &a), "switching must strictly decrease the valuation");
            a = b;
            continue;
        }
        if witness_set(g, &a, Direction::Dual)?.is_empty() {
            let max = best_response(g, &a, Player::Max);
            return Ok(Solution { values: a, min: tau, max, stats });
        }
        let jump = improve_pre_fixpoint(g, &a)?;
        assert!(strictly_below(&jump.value, &a), "a jump must strictly decrease the valuation");
        stats.jumps += 1;
        tau = switch_min(g, &tau, &jump.value)?;
        let b = solve(&tau, &mut stats)?;
        assert!(b.leq(&jump.value), "the jump target is a pre-fixpoint of the switched game");
        a = b;
    }
}

/// Strategy iteration from below: Max switches until stable.
pub fn strategy_iteration_below(g: &Ssg, sigma0: &Strategy) -> Result<Solution, GameError> {
    check_owner(sigma0, Player::Max)?;
    let mut stats = Stats::default();
    let mut sigma = sigma0.clone();
    let mut a = lfp_fixed_max(g, &sigma)?;
    stats.iterations += 1;
    stats.lp_calls += 1;
    loop {
        let next = switch_max(g, &sigma, &a)?;
        if next == sigma {
            let min = best_response(g, &a, Player::Min);
            return Ok(Solution { values: a, min, max: sigma, stats });
        }
        sigma = next;
        let b = lfp_fixed_max(g, &sigma)?;
        stats.iterations += 1;
        stats.lp_calls += 1;
        assert!(strictly_below(&a, &b), "switching must strictly increase the valuation");
        a = b;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kleene {
    pub values: Vec<f64>,
    pub iterations: usize,
}

const KLEENE_LIMIT: usize = 50_000_000;

/// Ascending float iteration from 0 until the largest step is below `tol`.
pub fn kleene_value_iteration(g: &Ssg, tol: f64) -> Result<Kleene, GameError> {
    if !(tol > 0.0) {
        return Err(GameError::invalid("tol", "tolerance must be positive"));
    }
    let f = |r: &Rational| r.to_f64().expect("finite");
    let kinds: Vec<(u8, Vec<(usize, f64)>, f64)> = g
        .kinds()
        .iter()
        .map(|k| match k {
            Node::Min(s) => (0, s.iter().map(|&u| (u, 1.0)).collect(), 0.0),
            Node::Max(s) => (1, s.iter().map(|&u| (u, 1.0)).collect(), 0.0),
            Node::Av(d) => (2, d.entries().iter().map(|(u, p)| (*u, f(p))).collect(), 0.0),
            Node::Sink(w) => (3, Vec::new(), f(w)),
        })
        .collect();
    let mut a = vec![0.0f64; g.len()];
    for it in 1..=KLEENE_LIMIT {
        let next: Vec<f64> = kinds
            .iter()
            .map(|(k, succ, w)| match k {
                0 => succ.iter().map(|(u, _)| a[*u]).fold(f64::INFINITY, f64::min),
                1 => succ.iter().map(|(u, _)| a[*u]).fold(f64::NEG_INFINITY, f64::max),
                2 => succ.iter().map(|(u, p)| p * a[*u]).sum(),
                _ => *w,
            })
            .collect();
        let step = next.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        a = next;
        if step < tol {
            return Ok(Kleene { values: a, iterations: it });
        }
    }
    Err(GameError::TooLarge(format!("value iteration did not settle within {KLEENE_LIMIT} steps")))
}

/// Least fixpoint of the Markov chain induced by a strategy pair.
fn chain_value(g: &Ssg, sigma: &Strategy, tau: &Strategy) -> Valuation {
    let n = g.len();
    let succ = |v: usize| -> Vec<(usize, Rational)> {
        match g.node(v) {
            Node::Min(_) => vec![(tau.choice(v), Rational::one())],
            Node::Max(_) => vec![(sigma.choice(v), Rational::one())],
            Node::Av(d) => d.entries().to_vec(),
            Node::Sink(_) => Vec::new(),
        }
    };
    let mut good: Vec<bool> = (0..n).map(|v| matches!(g.node(v), Node::Sink(w) if !w.is_zero())).collect();
    loop {
        let mut changed = false;
        for v in 0..n {
            if !good[v] && succ(v).iter().any(|(u, _)| good[*u]) {
                good[v] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&v| good[v] && !matches!(g.node(v), Node::Sink(_))).collect();
    let pos = |v: usize| unknown.iter().position(|&u| u == v);
    let m = unknown.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut b = vec![Rational::zero(); m];
    for (r, &v) in unknown.iter().enumerate() {
        a[r][r] += Rational::one();
        for (u, p) in succ(v) {
            match g.node(u) {
                Node::Sink(w) => b[r] += &p * w,
                _ => {
                    if let Some(c) = pos(u) {
                        a[r][c] -= p;
                    }
                }
            }
        }
    }
    let x = gauss_solve(&a, &b).expect("regular once the 0-nodes are pinned");
    let mut values: Vec<Rational> = (0..n)
        .map(|v| match g.node(v) {
            Node::Sink(w) => w.clone(),
            _ => Rational::zero(),
        })
        .collect();
    for (v, x) in unknown.into_iter().zip(x) {
        values[v] = x;
    }
    Valuation::unit(g.nodes(), values).expect("values lie in [0,1]")
}

/// Default bound on the number of strategy pairs for [`brute_force_value`].
pub const BRUTE_FORCE_CAP: usize = 1 << 16;

/// `max_σ min_τ` of the induced chains' values, pointwise.
pub fn brute_force_value(g: &Ssg, cap: usize) -> Result<Valuation, GameError> {
    let too_large = || GameError::TooLarge(format!("more than {cap} strategy pairs"));
    let sigmas = Strategy::enumerate(g, Player::Max, cap).ok_or_else(too_large)?;
    let taus = Strategy::enumerate(g, Player::Min, cap).ok_or_else(too_large)?;
    if sigmas.len().saturating_mul(taus.len()) > cap {
        return Err(too_large());
    }
    let n = g.len();
    let mut value: Option<Vec<Rational>> = None;
    for s in &sigmas {
        let mut inner: Option<Vec<Rational>> = None;
        for t in &taus {
            let v = chain_value(g, s, t).to_rationals();
            inner = Some(match inner {
                None => v,
                Some(cur) => cur.into_iter().zip(v).map(|(x, y)| x.min(y)).collect(),
            });
        }
        let inner = inner.expect("at least one strategy");
        value = Some(match value {
            None => inner,
            Some(cur) => cur.into_iter().zip(inner).map(|(x, y)| x.max(y)).collect(),
        });
    }
    let value = value.unwrap_or_else(|| vec![Rational::zero(); n]);
    Ok(Valuation::unit(g.nodes(), value)?)
}
