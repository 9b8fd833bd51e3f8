use mvfix_core::nonexp::ValuationFn;
use mvfix_core::{q, Direction, Rational, SubsetY, Valuation};
use mvfix_games::gen::random_game;
use mvfix_games::io::{parse, SolutionDoc, SsgDoc};
use mvfix_games::solve::{best_response, BRUTE_FORCE_CAP};
use mvfix_games::suite::run_isolated;
use mvfix_games::*;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example(eps: &str) -> Ssg {
    let text = format!(
        r#"{{"nodes":[
            {{"id":"1-sink","kind":"sink","weight":"1"}},
            {{"id":"eps-sink","kind":"sink","weight":"{eps}"}},
            {{"id":"min","kind":"min","succ":["1-sink","av"]}},
            {{"id":"av","kind":"av","dist":{{"min":"1/2","max":"1/2"}}}},
            {{"id":"max","kind":"max","succ":["eps-sink","av"]}}]}}"#
    );
    parse::<SsgDoc>(&text).unwrap().build().unwrap()
}

fn id(g: &Ssg, name: &str) -> usize {
    g.nodes().index_of(name).unwrap()
}

fn vals(g: &Ssg, v: &[Rational]) -> Valuation {
    Valuation::unit(g.nodes(), v.to_vec()).unwrap()
}

fn sigma_to(g: &Ssg, target: &str) -> Strategy {
    Strategy::lowest(g, Player::Max).with(g, id(g, "max"), id(g, target)).unwrap()
}

fn expected(g: &Ssg) -> Valuation {
    vals(g, &[q(1, 1), q(1, 4), q(1, 4), q(1, 4), q(1, 4)])
}

#[test]
fn example_from_above_needs_a_jump() {
    let g = example("1/4");
    let tau = Strategy::lowest(&g, Player::Min);
    assert_eq!(tau.choice(id(&g, "min")), id(&g, "1-sink"));
    let sol = strategy_iteration_above(&g, &tau).unwrap();
    assert_eq!(sol.values, expected(&g));
    assert!(sol.stats.jumps >= 1);
    assert_eq!(sol.min.choice(id(&g, "min")), id(&g, "av"));
}

#[test]
fn example_from_below_takes_two_rounds() {
    let g = example("1/4");
    let sol = strategy_iteration_below(&g, &sigma_to(&g, "av")).unwrap();
    assert_eq!(sol.values, expected(&g));
    assert_eq!(sol.stats.iterations, 2);
    assert_eq!(sol.max.choice(id(&g, "max")), id(&g, "eps-sink"));

    let again = strategy_iteration_below(&g, &sol.max).unwrap();
    assert_eq!(again.stats.iterations, 1);
}

#[test]
fn example_one_player_solves() {
    let g = example("1/4");
    let tau = Strategy::lowest(&g, Player::Min);
    let a = lfp_fixed_min(&g, &tau).unwrap();
    assert_eq!(a, vals(&g, &[q(1, 1), q(1, 4), q(1, 1), q(1, 1), q(1, 1)]));
    // tie between av and 1-sink: no switch
    assert_eq!(switch_min(&g, &tau, &a).unwrap(), tau);

    let tau_av = tau.with(&g, id(&g, "min"), id(&g, "av")).unwrap();
    assert_eq!(lfp_fixed_min(&g, &tau_av).unwrap(), expected(&g));

    let cyc = sigma_to(&g, "av");
    let c = forced_cycle_nodes(&g, &cyc).unwrap();
    assert_eq!(c, SubsetY::from_names(g.nodes(), &["min", "av", "max"]).unwrap());
    let low = lfp_fixed_max(&g, &cyc).unwrap();
    assert_eq!(low, vals(&g, &[q(1, 1), q(1, 4), q(0, 1), q(0, 1), q(0, 1)]));
    assert_eq!(switch_max(&g, &cyc, &low).unwrap(), sigma_to(&g, "eps-sink"));

    let esc = sigma_to(&g, "eps-sink");
    assert!(forced_cycle_nodes(&g, &esc).unwrap().is_empty());
    assert_eq!(lfp_fixed_max(&g, &esc).unwrap(), expected(&g));
}

#[test]
fn example_vicious_cycle_is_detected() {
    let g = example("1/4");
    let a = vals(&g, &[q(1, 1), q(1, 4), q(1, 1), q(1, 1), q(1, 1)]);
    assert_eq!(g.eval(&a).unwrap(), a);
    let cyc = SubsetY::from_names(g.nodes(), &["min", "av", "max"]).unwrap();
    assert_eq!(g.value_approx_dual(&a).unwrap().apply(&cyc), cyc);
    assert_eq!(mvfix_core::proof::witness_set(&g, &a, Direction::Dual).unwrap(), cyc);

    let sinks_only = vals(&g, &[q(1, 1), q(1, 4), q(0, 1), q(0, 1), q(0, 1)]);
    assert!(g.value_approx_dual(&sinks_only).unwrap().apply(&SubsetY::empty(g.nodes())).is_empty());
}

#[test]
fn example_other_methods_agree() {
    let g = example("1/4");
    assert_eq!(brute_force_value(&g, BRUTE_FORCE_CAP).unwrap(), expected(&g));
    let k = kleene_value_iteration(&g, 1e-12).unwrap();
    for (x, y) in k.values.iter().zip(expected(&g).values()) {
        assert!((x - y.to_f64()).abs() < 1e-9);
    }
}

#[test]
fn trivial_games() {
    let sinks: SsgDoc = parse(r#"{"nodes":[{"id":"a","kind":"sink","weight":"1/3"},{"id":"b","kind":"sink","weight":"0"}]}"#).unwrap();
    let g = sinks.build().unwrap();
    let w = vals(&g, &[q(1, 3), q(0, 1)]);
    assert_eq!(lfp_fixed_min(&g, &Strategy::lowest(&g, Player::Min)).unwrap(), w);
    assert_eq!(lfp_fixed_max(&g, &Strategy::lowest(&g, Player::Max)).unwrap(), w);
    let k = kleene_value_iteration(&g, 1e-12).unwrap();
    assert_eq!(k.values, vec![1.0 / 3.0, 0.0]);
    assert_eq!(k.iterations, 2);
    assert!(forced_cycle_nodes(&g, &Strategy::lowest(&g, Player::Max)).unwrap().is_empty());

    let one_max: SsgDoc = parse(
        r#"{"nodes":[{"id":"m","kind":"max","succ":["a","b"]},
            {"id":"a","kind":"sink","weight":"1/3"},{"id":"b","kind":"sink","weight":"2/3"}]}"#,
    )
    .unwrap();
    let g = one_max.build().unwrap();
    assert_eq!(brute_force_value(&g, 16).unwrap().get(0).to_rational(), q(2, 3));
}

#[test]
fn pure_cycle_stays_at_zero() {
    let doc: SsgDoc = parse(
        r#"{"nodes":[{"id":"y","kind":"av","dist":{"z":"1"}},{"id":"z","kind":"min","succ":["y","s"]},
            {"id":"s","kind":"sink","weight":"1"}]}"#,
    )
    .unwrap();
    let g = doc.build().unwrap();
    let k = kleene_value_iteration(&g, 1e-12).unwrap();
    assert_eq!(&k.values[..2], &[0.0, 0.0]);
    let sol = strategy_iteration_above(&g, &Strategy::lowest(&g, Player::Min)).unwrap();
    assert_eq!(sol.values, vals(&g, &[q(0, 1), q(0, 1), q(1, 1)]));
}

#[test]
fn stopping_game_needs_no_jumps() {
    // every play reaches a sink: the fixpoint is unique
    let doc: SsgDoc = parse(
        r#"{"nodes":[{"id":"a","kind":"min","succ":["b","c"]},{"id":"b","kind":"av","dist":{"c":"1/2","d":"1/2"}},
            {"id":"c","kind":"max","succ":["d","e"]},{"id":"d","kind":"sink","weight":"1/4"},{"id":"e","kind":"sink","weight":"3/4"}]}"#,
    )
    .unwrap();
    let g = doc.build().unwrap();
    let above = strategy_iteration_above(&g, &Strategy::lowest(&g, Player::Min)).unwrap();
    let below = strategy_iteration_below(&g, &Strategy::lowest(&g, Player::Max)).unwrap();
    assert_eq!(above.stats.jumps, 0);
    assert_eq!(above.values, below.values);
    assert_eq!(above.values, brute_force_value(&g, 64).unwrap());
}

#[test]
fn wrong_owner_is_rejected() {
    let g = example("1/4");
    let sigma = Strategy::lowest(&g, Player::Max);
    assert!(matches!(lfp_fixed_min(&g, &sigma), Err(GameError::Invalid { .. })));
    assert!(sigma.with(&g, id(&g, "min"), id(&g, "av")).is_err());
    assert!(sigma.with(&g, id(&g, "max"), id(&g, "min")).is_err());
}

fn random_games(seed: u64, count: usize, max_n: usize) -> Vec<Ssg> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_n);
            random_game(n, 3, &mut rng)
        })
        .collect()
}

#[test]
fn random_games_agree_with_brute_force() {
    let games = random_games(7, 100, 6);
    let results = run_isolated(&games, |g| {
        let truth = brute_force_value(g, BRUTE_FORCE_CAP).unwrap();
        let above = strategy_iteration_above(g, &Strategy::lowest(g, Player::Min)).unwrap();
        let below = strategy_iteration_below(g, &Strategy::lowest(g, Player::Max)).unwrap();
        let k = kleene_value_iteration(g, 1e-12).unwrap();
        let close = k.values.iter().zip(truth.values()).all(|(x, y)| (x - y.to_f64()).abs() < 1e-9);
        (above.values == truth, below.values == truth, close)
    });
    for (i, r) in results.into_iter().enumerate() {
        assert_eq!(r.unwrap(), (true, true, true), "game {i}");
    }
}

#[test]
fn random_initial_strategies_reach_the_same_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for g in random_games(9, 40, 6) {
        let truth = brute_force_value(&g, BRUTE_FORCE_CAP).unwrap();
        let tau = Strategy::random(&g, Player::Min, &mut rng);
        let sigma = Strategy::random(&g, Player::Max, &mut rng);
        assert_eq!(strategy_iteration_above(&g, &tau).unwrap().values, truth);
        assert_eq!(strategy_iteration_below(&g, &sigma).unwrap().values, truth);
    }
}

#[test]
fn sandwich_between_fixed_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for g in random_games(11, 40, 6) {
        let a = mvfix_core::gen::grid_valuation(g.nodes(), 4, &mut rng);
        let full = g.eval(&a).unwrap();
        let sigma = Strategy::random(&g, Player::Max, &mut rng);
        let tau = Strategy::random(&g, Player::Min, &mut rng);
        assert!(g.eval_fixed(&sigma, &a).unwrap().leq(&full));
        assert!(full.leq(&g.eval_fixed(&tau, &a).unwrap()));
        assert_eq!(g.value_fn().eval(&a).unwrap(), full);
    }
}

/// Nodes whose value under `σ` is 0: largest set closed under the zero clauses.
fn zero_nodes(g: &Ssg, sigma: &Strategy) -> SubsetY {
    let mut x = SubsetY::full(g.nodes());
    loop {
        let next = SubsetY::from_indices(
            g.nodes(),
            x.iter().filter(|&v| match g.node(v) {
                Node::Sink(w) => w == &q(0, 1),
                Node::Min(s) => s.iter().any(|&u| x.contains(u)),
                Node::Max(_) => x.contains(sigma.choice(v)),
                Node::Av(d) => d.support().all(|u| x.contains(u)),
            }),
        );
        if next == x {
            return x;
        }
        x = next;
    }
}

#[test]
fn forced_cycles_are_exactly_the_unexplained_zeros() {
    for g in random_games(12, 60, 5) {
        for sigma in Strategy::enumerate(&g, Player::Max, 1 << 10).unwrap() {
            let c = forced_cycle_nodes(&g, &sigma).unwrap();
            let mu = lfp_fixed_max(&g, &sigma).unwrap();
            assert_eq!(g.eval_fixed(&sigma, &mu).unwrap(), mu);
            let zeros = SubsetY::from_indices(g.nodes(), (0..g.len()).filter(|&v| mu.get(v).is_zero()));
            assert!(c.is_subset(&zeros));
            assert_eq!(zeros, zero_nodes(&g, &sigma));
        }
    }
}

#[test]
fn pinned_system_has_a_unique_solution() {
    use mvfix_lp::{solve_lp, LinearProgram, Relation, Sense};
    use num_traits::{One, Zero};
    for g in random_games(13, 40, 5) {
        for sigma in Strategy::enumerate(&g, Player::Max, 1 << 10).unwrap() {
            let c = forced_cycle_nodes(&g, &sigma).unwrap();
            let hi = lfp_fixed_max(&g, &sigma).unwrap();
            // perturb the objective sense and weights, re-solve over the same
            // fixpoint equations (MIN nodes as exact minima via the best response)
            let tau = best_response(&g, &hi, Player::Min);
            let mut lp = LinearProgram::valuation(Sense::Min, g.len());
            for v in 0..g.len() {
                lp.set_objective(v, Rational::from_integer((v as i64 + 1).into()));
                if c.contains(v) {
                    lp.set_bound(v, Rational::zero(), Some(Rational::zero()));
                }
                let one = Rational::one();
                match g.node(v) {
                    Node::Sink(w) => lp.set_bound(v, w.clone(), Some(w.clone())),
                    Node::Min(s) => {
                        for &u in s {
                            lp.add_row([(v, one.clone()), (u, -one.clone())], Relation::Le, Rational::zero());
                        }
                        lp.add_row([(v, one.clone()), (tau.choice(v), -one.clone())], Relation::Eq, Rational::zero());
                    }
                    Node::Max(_) => lp.add_row([(v, one.clone()), (sigma.choice(v), -one)], Relation::Eq, Rational::zero()),
                    Node::Av(d) => lp.add_row(
                        std::iter::once((v, one)).chain(d.entries().iter().map(|(u, p)| (*u, -p.clone()))),
                        Relation::Eq,
                        Rational::zero(),
                    ),
                }
            }
            let lo = solve_lp(&lp).unwrap();
            assert_eq!(lo.x, hi.to_rationals());
        }
    }
}

#[test]
fn closed_form_matches_generic_approximation() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for g in random_games(15, 60, 5) {
        let a = mvfix_core::gen::grid_valuation(g.nodes(), 4, &mut rng);
        let closed = g.value_approx_dual(&a).unwrap();
        let generic = g.value_fn().approx(&a, Direction::Dual).unwrap();
        let supp = a.support_ceil();
        for mask in 0u64..1 << g.len() {
            let s = SubsetY::from_mask(g.nodes(), mask);
            if s.is_subset(&supp) {
                assert_eq!(closed.apply(&s), generic.apply(&s), "{s}");
            }
        }
    }
}

#[test]
fn json_round_trips() {
    let g = example("1/4");
    let doc = SsgDoc::from_model(&g);
    let back: SsgDoc = parse(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(back, doc);
    let sol = strategy_iteration_below(&back.build().unwrap(), &sigma_to(&g, "av")).unwrap();
    let out = SolutionDoc::from_solution(&g, &sol);
    let again: SolutionDoc = parse(&serde_json::to_string(&out).unwrap()).unwrap();
    assert_eq!(again, out);
    assert_eq!(out.values["min"], "1/4");
    assert_eq!(out.strategy.max["max"], "eps-sink");
}

#[test]
fn schema_errors_name_the_field() {
    let bad = r#"{"nodes":[{"id":"a","kind":"max","succ":[]}]}"#;
    let e = parse::<SsgDoc>(bad).unwrap().build().unwrap_err().to_string();
    assert!(e.contains("nodes.a"), "{e}");
    let bad = r#"{"nodes":[{"id":"a","kind":"sink","weight":"1","succ":["a"]}]}"#;
    let e = parse::<SsgDoc>(bad).unwrap().build().unwrap_err().to_string();
    assert!(e.contains("nodes[0].succ"), "{e}");
    let bad = r#"{"nodes":[{"id":"a","kind":"av","dist":{"a":"1/2"}}]}"#;
    let e = parse::<SsgDoc>(bad).unwrap().build().unwrap_err().to_string();
    assert!(e.contains("nodes[0].dist"), "{e}");
    let bad = r#"{"nodes":[{"id":"a","kind":"chance"}]}"#;
    let e = parse::<SsgDoc>(bad).unwrap().build().unwrap_err().to_string();
    assert!(e.contains("nodes[0].kind"), "{e}");
    assert!(parse::<SsgDoc>(r#"{"nodes":[],"extra":1}"#).is_err());
}

#[test]
fn kleene_under_approximates() {
    for g in random_games(16, 30, 6) {
        let truth = brute_force_value(&g, BRUTE_FORCE_CAP).unwrap();
        let k = kleene_value_iteration(&g, 1e-6).unwrap();
        for (x, y) in k.values.iter().zip(truth.to_rationals()) {
            assert!(*x <= y.to_f64().unwrap() + 1e-12);
        }
    }
}
