//! Seeded random games for property tests.

use mvfix_core::{q, Distribution, Universe};
use rand::seq::index::sample;
use rand::Rng;

use crate::model::{Node, Ssg};

/// A game on `n` nodes with out-degree at most `max_deg`; sink weights on the
/// quarter grid, average weights with small denominators.
pub fn random_game<R: Rng + ?Sized>(n: usize, max_deg: usize, rng: &mut R) -> Ssg {
    let u = Universe::shared((0..n).map(|i| format!("v{i}"))).expect("distinct names");
    let kinds = (0..n)
        .map(|_| {
            let deg = rng.gen_range(1..=max_deg.min(n));
            let mut succ: Vec<usize> = sample(rng, n, deg).into_vec();
            succ.sort_unstable();
            match rng.gen_range(0..4) {
                0 => Node::Min(succ),
                1 => Node::Max(succ),
                2 => {
                    let w: Vec<i64> = succ.iter().map(|_| rng.gen_range(1..=3)).collect();
                    let total: i64 = w.iter().sum();
                    Node::Av(Distribution::new(succ.into_iter().zip(w).map(|(s, w)| (s, q(w, total)))).expect("normalised"))
                }
                _ => Node::Sink(q(rng.gen_range(0..=4), 4)),
            }
        })
        .collect();
    Ssg::new(&u, kinds).expect("well-formed")
}
