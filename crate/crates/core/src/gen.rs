//! Random toolbox expressions and valuations for property tests.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::mv::{q, Chain, MvValue, Universe, Valuation};
use crate::nonexp::{Distribution, FnExpr, UnionPart};

static FRESH: AtomicUsize = AtomicUsize::new(0);

/// A universe of `n` fresh element names.
pub fn fresh_universe(prefix: &str, n: usize) -> Arc<Universe> {
    let id = FRESH.fetch_add(1, Ordering::Relaxed);
    Universe::shared((0..n).map(|i| format!("{prefix}{id}_{i}"))).expect("fresh names are distinct")
}

/// Unit-interval valuation on the grid `{0, 1/den, …, 1}`, so ties are common.
pub fn grid_valuation<R: Rng + ?Sized>(u: &Arc<Universe>, den: i64, rng: &mut R) -> Valuation {
    Valuation::from_fn(u, Chain::Unit, |_| MvValue::Unit(q(rng.gen_range(0..=den), den))).expect("unit values")
}

fn random_subset<R: Rng + ?Sized>(n: usize, rng: &mut R, allow_empty: bool) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if allow_empty || !s.is_empty() || n == 0 {
            return s;
        }
    }
}

fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Distribution {
    let mut supp = random_subset(n, rng, false);
    supp.truncate(3);
    let den = [2i64, 3, 4, 6][rng.gen_range(0..4)];
    // split `den` units over the support, each getting at least one
    let k = supp.len().min(den as usize);
    supp.truncate(k);
    let mut units = vec![1i64; k];
    for _ in 0..(den - k as i64) {
        units[rng.gen_range(0..k)] += 1;
    }
    Distribution::new(supp.into_iter().zip(units).map(|(i, w)| (i, q(w, den)))).expect("weights sum to one")
}

/// A random basic function `dom → cod` over the unit interval.
pub fn random_basic<R: Rng + ?Sized>(dom: &Arc<Universe>, cod: &Arc<Universe>, rng: &mut R) -> FnExpr {
    let n = dom.len();
    let choice = if n == 0 { 0 } else { rng.gen_range(0..5) };
    match choice {
        0 => FnExpr::constant(dom, grid_valuation(cod, 4, rng)),
        1 => FnExpr::reindex(dom, cod, (0..cod.len()).map(|_| rng.gen_range(0..n)).collect()).expect("indices in range"),
        2 | 3 => {
            let pre: Vec<Vec<usize>> = (0..cod.len())
                .map(|_| {
                    let allow_empty = rng.gen_bool(0.1);
                    random_subset(n, rng, allow_empty)
                })
                .collect();
            if choice == 2 {
                FnExpr::min_rel(dom, cod, pre).expect("indices in range")
            } else {
                FnExpr::max_rel(dom, cod, pre).expect("indices in range")
            }
        }
        _ => FnExpr::average(dom, cod, (0..cod.len()).map(|_| random_distribution(n, rng)).collect())
            .expect("indices in range"),
    }
}

/// A random toolbox expression `dom → cod` of nesting depth at most `depth`.
pub fn random_toolbox<R: Rng + ?Sized>(dom: &Arc<Universe>, cod: &Arc<Universe>, depth: usize, rng: &mut R) -> FnExpr {
    if depth == 0 {
        return random_basic(dom, cod, rng);
    }
    match rng.gen_range(0..3) {
        0 => random_basic(dom, cod, rng),
        1 => {
            let mid = fresh_universe("m", rng.gen_range(1..=4));
            let g = random_toolbox(dom, &mid, depth - 1, rng);
            let h = random_toolbox(&mid, cod, depth - 1, rng);
            FnExpr::compose(&h, &g).expect("universes line up")
        }
        _ => {
            let mut outs: Vec<usize> = (0..cod.len()).collect();
            outs.shuffle(rng);
            let cut = if outs.is_empty() { 0 } else { rng.gen_range(0..=outs.len()) };
            let mut parts = Vec::new();
            for block in [&outs[..cut], &outs[cut..]] {
                if block.is_empty() {
                    continue;
                }
                let ins = random_subset(dom.len(), rng, true);
                let pdom = fresh_universe("d", ins.len());
                let pcod = fresh_universe("c", block.len());
                let e = random_toolbox(&pdom, &pcod, depth - 1, rng);
                parts.push(UnionPart::new(e, ins, block.to_vec()));
            }
            FnExpr::disjoint_union(dom, cod, parts).expect("blocks partition the codomain")
        }
    }
}
