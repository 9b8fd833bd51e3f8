//! Seeded random models for property tests and benchmarks.

use std::sync::Arc;

use mvfix_core::{q, Distribution, SubsetY, Universe};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::{MarkovChain, MetricTS, ProbAutomaton, TransitionSystem};

fn states(n: usize) -> Arc<Universe> {
    Universe::shared((0..n).map(|i| format!("s{i}"))).expect("distinct names")
}

/// A distribution on at most `width` points of `0..n` with denominator 2, 3, 4 or 6.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, width: usize, rng: &mut R) -> Distribution {
    let den = [2i64, 3, 4, 6][rng.gen_range(0..4)];
    let mut pts: Vec<usize> = (0..n).collect();
    pts.shuffle(rng);
    pts.truncate(rng.gen_range(1..=width.min(n)));
    let mut units = vec![1i64; pts.len()];
    let mut left = den - pts.len() as i64;
    while left > 0 {
        let i = rng.gen_range(0..units.len());
        units[i] += 1;
        left -= 1;
    }
    if left < 0 {
        return Distribution::dirac(pts[0]);
    }
    Distribution::new(pts.into_iter().zip(units).map(|(p, u)| (p, q(u, den)))).expect("weights sum to 1")
}

/// A chain on `n` states where each state is terminal with probability 1/4.
pub fn random_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MarkovChain {
    let u = states(n);
    let term: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.25)).collect();
    let terminal = SubsetY::from_indices(&u, term.iter().copied());
    let eta = (0..n).map(|s| (!terminal.contains(s)).then(|| random_distribution(n, 3, rng))).collect();
    MarkovChain::new(&u, terminal, eta).expect("well-formed random chain")
}

fn random_succ<R: Rng + ?Sized>(n: usize, max_out: usize, rng: &mut R) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            let k = rng.gen_range(0..=max_out.min(n));
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(rng);
            v.truncate(k);
            v
        })
        .collect()
}

/// Weights on the grid `{0, 1/4, …, 1}`.
pub fn random_mts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MetricTS {
    let w = (0..n).map(|_| q(rng.gen_range(0..=4), 4)).collect();
    MetricTS::new(&states(n), w, random_succ(n, 3, rng)).expect("well-formed random system")
}

pub fn random_ts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TransitionSystem {
    TransitionSystem::new(&states(n), random_succ(n, 3, rng)).expect("well-formed random system")
}

/// Two labels, and up to `max_dists` distributions per state.
pub fn random_pa<R: Rng + ?Sized>(n: usize, max_dists: usize, rng: &mut R) -> ProbAutomaton {
    let labels = Universe::shared(["a", "b"]).expect("distinct labels");
    let ell = (0..n).map(|_| usize::from(rng.gen_bool(0.25))).collect();
    let eta = (0..n).map(|_| (0..rng.gen_range(0..=max_dists)).map(|_| random_distribution(n, 2, rng)).collect()).collect();
    ProbAutomaton::new(&states(n), &labels, ell, eta).expect("well-formed random automaton")
}
