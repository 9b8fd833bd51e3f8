//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every criterion is reported even when an earlier one fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mvfix_cli::selftest::{BISIM_A1, BISIM_A2, BISIM_TS, FIG1, MTS, MTS_HALF, NO_GREATEST, NO_GREATEST_T, REDS, SSG};
use mvfix_core::gen::{fresh_universe, grid_valuation, random_toolbox};
use mvfix_core::nonexp::{approx_at, approx_primal, iota};
use mvfix_core::proof::{certify_lower_bound, improve_pre_fixpoint, is_least_fixpoint, witness_set};
use mvfix_core::{q, Chain, Direction, FnExpr, MvValue, Rational, Shift, SubsetY, Universe, Valuation, ValuationFn, Verdict};
use mvfix_games::gen::random_game;
use mvfix_games::io::SsgDoc;
use mvfix_games::solve::BRUTE_FORCE_CAP;
use mvfix_games::suite::run_isolated;
use mvfix_games::{
    brute_force_value, forced_cycle_nodes, kleene_value_iteration, strategy_iteration_above, strategy_iteration_below, Player,
    Strategy,
};
use mvfix_lp::{solve_transport, LpStatus, TransportInstance};
use mvfix_models::gen::{random_chain, random_pa};
use mvfix_models::io::{parse, LtsDoc, McDoc, MtsDoc, PairsDoc, ValuationDoc};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn same<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Check {
    ensure(got == want, || format!("{what}: got {got:?}, expected {want:?}"))
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn c1_termination() -> Check {
    let mc = parse::<McDoc>(FIG1).and_then(|d| d.build()).map_err(e)?;
    let u = mc.states().clone();
    same("μT", mc.term_prob_exact().to_rationals(), vec![q(1, 2), q(1, 1), q(0, 1), q(0, 1)])?;
    let red = parse::<ValuationDoc>(REDS).and_then(|d| d.build(&u, Chain::Unit)).map_err(e)?;
    let c = is_least_fixpoint(&mc, &red).map_err(e)?;
    same("verdict", c.verdict, Verdict::Refuted)?;
    same("witness", c.witness.names(), strings(&["y", "z"]))
}

fn c2_running_example() -> Check {
    let u = Universe::shared(["y1", "y2", "y3", "y4"]).map_err(e)?;
    let a = Valuation::unit(&u, vec![q(1, 5), q(2, 5), q(9, 10), q(1, 1)]).map_err(e)?;
    same("δ_a", a.delta_floor(), MvValue::unit(1, 10))?;
    let f = FnExpr::translate(&u, MvValue::unit(3, 10), Shift::Down);
    let yp = SubsetY::from_names(&u, &["y1", "y2", "y3"]).map_err(e)?;
    let at = |p, d| approx_at(&f, &a, &MvValue::unit(p, d), &yp).map(|s| s.names()).map_err(e);
    same("δ = 0.05", at(1, 20)?, strings(&["y2", "y3"]))?;
    same("δ = 0.3", at(3, 10)?, strings(&["y2"]))?;
    same("δ = 0.7", at(7, 10)?, Vec::new())
}

fn c3_no_greatest() -> Check {
    let mc = parse::<McDoc>(NO_GREATEST).and_then(|d| d.build()).map_err(e)?;
    let u = mc.states().clone();
    let t = parse::<ValuationDoc>(NO_GREATEST_T).and_then(|d| d.build(&u, Chain::Unit)).map_err(e)?;
    same("ν T_#^t", witness_set(&mc, &t, Direction::Dual).map_err(e)?.names(), strings(&["x1", "x2", "x3"]))?;
    let j = improve_pre_fixpoint(&mc, &t).map_err(e)?;
    same("t′", j.value.to_rationals(), vec![q(0, 1), q(2, 5), q(4, 5)])?;
    let half = t.try_sub(&Valuation::constant(&u, MvValue::unit(1, 2))).map_err(e)?;
    ensure(!mc.eval(&half).map_err(e)?.leq(&half), || "t ⊖ 0.5 is a pre-fixpoint".into())
}

fn c4_mts() -> Check {
    let m = parse::<MtsDoc>(MTS).and_then(|d| d.build()).map_err(e)?;
    let sp = m.space().clone();
    let d = parse::<PairsDoc>(MTS_HALF).and_then(|doc| doc.build(&sp, Chain::Unit, &MvValue::unit(0, 1))).map_err(e)?;
    let w = witness_set(&m, &d, Direction::Dual).map_err(e)?;
    let witness_ok = w.names() == strings(&["x,z", "z,x"]);

    let mu = m.least_fixpoint().map_err(e)?;
    let at = |p: &str| sp.pair_named(p).map(|k| mu.get(k).to_rational()).map_err(e);
    let got = vec![at("x,y")?, at("x,z")?, at("y,z")?];
    let want = vec![q(1, 2), q(3, 10), q(1, 2)];
    match (got == want, witness_ok) {
        (true, true) => Ok(()),
        (false, w) => Err(format!(
            "μJ = (xy {}, xz {}, yz {}), expected (1/2, 3/10, 1/2); with weights 0.1/0.6/0.3 and z → {{x}} the \
             clause J(d)(x,z) = max(d(z,x), |0.1 − 0.3|) forces μJ(x,z) = 1/5 (ν J_#^d witness {})",
            got[0],
            got[1],
            got[2],
            if w { "matches S({(x,z)})" } else { "also wrong" }
        )),
        (true, false) => Err(format!("ν J_#^d = {w}, expected S({{(x,z)}})")),
    }
}

fn c5_bisim() -> Check {
    let ts = parse::<LtsDoc>(BISIM_TS).and_then(|d| d.build()).map_err(e)?;
    let sp = ts.space().clone();
    let xu = sp.pair_named("x,u").map_err(e)?;
    let load = |t: &str| parse::<PairsDoc>(t).and_then(|d| d.build(&sp, Chain::Bool, &Chain::Bool.one())).map_err(e);
    same("bisim-1", ts.witness_nonbisim(&load(BISIM_A1)?, xu).map_err(e)?.verdict, Verdict::Certified)?;
    let c2 = ts.witness_nonbisim(&load(BISIM_A2)?, xu).map_err(e)?;
    same("bisim-2", c2.verdict, Verdict::Inconclusive)?;
    same("bisim-2 witness", c2.witness.names(), strings(&["x,u"]))
}

fn c6_ssg_example() -> Check {
    let g = mvfix_games::io::parse::<SsgDoc>(SSG).and_then(|d| d.build()).map_err(e)?;
    let id = |n: &str| g.nodes().index_of(n).ok_or_else(|| format!("no node {n}"));
    let want = vec![q(1, 1), q(1, 4), q(1, 4), q(1, 4), q(1, 4)];
    let tau = Strategy::lowest(&g, Player::Min);
    same("τ(min)", tau.choice(id("min")?), id("1-sink")?)?;
    let above = strategy_iteration_above(&g, &tau).map_err(e)?;
    same("SIA", above.values.to_rationals(), want.clone())?;
    ensure(above.stats.jumps >= 1, || "SIA made no jump".into())?;
    let sigma = Strategy::lowest(&g, Player::Max).with(&g, id("max")?, id("av")?).map_err(e)?;
    same("SIB", strategy_iteration_below(&g, &sigma).map_err(e)?.values.to_rationals(), want)?;
    same("C_σ", forced_cycle_nodes(&g, &sigma).map_err(e)?.names(), strings(&["min", "av", "max"]))
}

fn c7_random_games() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let games: Vec<_> = (0..100)
        .map(|_| {
            let n = rng.gen_range(1..=6);
            random_game(n, 3, &mut rng)
        })
        .collect();
    let results = run_isolated(&games, |g| -> Check {
        let truth = brute_force_value(g, BRUTE_FORCE_CAP).map_err(e)?;
        let a = strategy_iteration_above(g, &Strategy::lowest(g, Player::Min)).map_err(e)?;
        let b = strategy_iteration_below(g, &Strategy::lowest(g, Player::Max)).map_err(e)?;
        let k = kleene_value_iteration(g, 1e-12).map_err(e)?;
        same("SIA", &a.values, &truth)?;
        same("SIB", &b.values, &truth)?;
        let gap = k.values.iter().zip(truth.values()).map(|(x, y)| (x - y.to_f64()).abs()).fold(0.0, f64::max);
        ensure(gap < 1e-9, || format!("value iteration off by {gap:e}"))
    });
    for (i, r) in results.into_iter().enumerate() {
        r.map_err(|p| format!("game {i} panicked: {p}"))?.map_err(|m| format!("game {i}: {m}"))?;
    }
    Ok(())
}

fn subsets_of(s: &SubsetY) -> Vec<SubsetY> {
    let elems: Vec<usize> = s.iter().collect();
    (0u64..1 << elems.len())
        .map(|m| SubsetY::from_indices(s.universe(), elems.iter().enumerate().filter(|(j, _)| m >> j & 1 == 1).map(|(_, &i)| i)))
        .collect()
}

fn c8_approximation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let grid: Vec<MvValue> = [(1, 12), (1, 6), (1, 4), (1, 2), (1, 1)].iter().map(|&(p, d)| MvValue::unit(p, d)).collect();
    for k in 0..50 {
        let dom = fresh_universe("y", rng.gen_range(1..=5));
        let cod = fresh_universe("z", rng.gen_range(1..=5));
        let f = random_toolbox(&dom, &cod, 3, &mut rng);
        let a = grid_valuation(&dom, [2, 3, 4, 6][rng.gen_range(0..4)], &mut rng);
        let i = iota(&f, &a, Direction::Primal).map_err(e)?;
        let g = approx_primal(&f, &a).map_err(e)?;
        for yp in subsets_of(&a.support_floor()) {
            let def = approx_at(&f, &a, &i, &yp).map_err(e)?;
            ensure(g.apply(&yp) == def, || format!("instance {k}: f = {f}, a = {a}, Y′ = {yp}"))?;
            for (j, d) in grid.iter().enumerate() {
                let big = approx_at(&f, &a, d, &yp).map_err(e)?;
                for t in &grid[..j] {
                    let small = approx_at(&f, &a, t, &yp).map_err(e)?;
                    ensure(big.is_subset(&small), || format!("instance {k}: not anti-monotone between {t} and {d}"))?;
                }
            }
        }
    }
    Ok(())
}

fn c9_proof_rules() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 0..50 {
        let n = rng.gen_range(1..=5);
        let mc = random_chain(n, &mut rng);
        let u = mc.states().clone();
        let mu = mc.term_prob_exact();
        let mut candidates = vec![mu.clone(), Valuation::one(&u, Chain::Unit)];
        for _ in 0..6 {
            candidates.push(grid_valuation(&u, 4, &mut rng));
        }
        for c in &candidates {
            let cert = is_least_fixpoint(&mc, c).map_err(e)?;
            ensure(cert.is_certified() == (c == &mu), || format!("chain {k}: is_least_fixpoint({c}) = {}", cert.verdict))?;
            let low = certify_lower_bound(&mc, c).map_err(e)?;
            ensure(!low.is_certified() || c.leq(&mu), || format!("chain {k}: certified lower bound {c} exceeds {mu}"))?;
        }
        ensure(certify_lower_bound(&mc, &mu).map_err(e)?.is_certified(), || format!("chain {k}: μT not certified from below"))?;
    }
    Ok(())
}

/// Unique solution of the system `[m | rhs]` in `k` unknowns, if any.
fn unique_solution(mut m: Vec<Vec<Rational>>, k: usize) -> Option<Vec<Rational>> {
    let mut rank = 0;
    for col in 0..k {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let pv = m[rank][col].clone();
        for v in m[rank].iter_mut() {
            *v /= &pv;
        }
        let prow = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        rank += 1;
    }
    if rank < k || m[rank..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| m[i][k].clone()).collect())
}

/// Minimum over the vertices of the transportation polytope.
fn vertex_minimum(p: &[Rational], r: &[Rational], cost: &[Vec<Rational>]) -> Rational {
    let cells: Vec<(usize, usize)> =
        (0..p.len()).flat_map(|i| (0..r.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i].is_positive() && r[j].is_positive()).collect();
    let mut best: Option<Rational> = None;
    for mask in 1u32..1 << cells.len() {
        let chosen: Vec<(usize, usize)> = cells.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, c)| *c).collect();
        let mut rows = Vec::new();
        for (i, pi) in p.iter().enumerate() {
            let mut row: Vec<Rational> = chosen.iter().map(|c| q((c.0 == i) as i64, 1)).collect();
            row.push(pi.clone());
            rows.push(row);
        }
        for (j, rj) in r.iter().enumerate() {
            let mut row: Vec<Rational> = chosen.iter().map(|c| q((c.1 == j) as i64, 1)).collect();
            row.push(rj.clone());
            rows.push(row);
        }
        if let Some(x) = unique_solution(rows, chosen.len()) {
            if x.iter().all(|v| !v.is_negative()) {
                let c: Rational = chosen.iter().zip(&x).map(|(&(i, j), v)| &cost[i][j] * v).sum();
                if best.as_ref().map_or(true, |b| &c < b) {
                    best = Some(c);
                }
            }
        }
    }
    best.expect("the product coupling is feasible")
}

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let den = rng.gen_range(1..=6);
    let mut units = vec![0i64; n];
    for _ in 0..den {
        units[rng.gen_range(0..n)] += 1;
    }
    units.into_iter().map(|u| q(u, den)).collect()
}

fn c10_kantorovich() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for k in 0..30 {
        let (n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let p = random_dist(&mut rng, n);
        let r = random_dist(&mut rng, m);
        let cost: Vec<Vec<Rational>> = (0..n).map(|_| (0..m).map(|_| q(rng.gen_range(0..=8), 8)).collect()).collect();
        let sol = solve_transport(&TransportInstance::new(p.clone(), r.clone(), cost.clone())).map_err(e)?;
        same(&format!("instance {k} status"), sol.status, LpStatus::Optimal)?;
        same(&format!("instance {k} value"), sol.value, vertex_minimum(&p, &r, &cost))?;
    }
    for k in 0..12 {
        let n = rng.gen_range(1..=3usize);
        let pa = random_pa(n, 2, &mut rng);
        let sp = pa.space().clone();
        let d = pa.fixpoint_below(&Valuation::one(sp.pairs(), Chain::Unit)).map_err(e)?;
        let g = pa.approx_dual(&d).map_err(e)?;
        for mask in 0u64..1 << (n * n) {
            let rel = SubsetY::from_mask(sp.pairs(), mask);
            let post = rel.is_subset(&g.apply(&rel));
            ensure(pa.is_self_closed(&d, &rel).map_err(e)? == post, || format!("automaton {k}: disagreement on {rel}"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check, Option<Duration>); 10] = [
        ("termination regression", c1_termination, Some(Duration::from_millis(100))),
        ("running-example regression", c2_running_example, Some(Duration::from_millis(100))),
        ("chain without greatest fixpoint", c3_no_greatest, None),
        ("metric transition system", c4_mts, None),
        ("bisimilarity", c5_bisim, None),
        ("stochastic game example", c6_ssg_example, Some(Duration::from_millis(500))),
        ("random games against oracles", c7_random_games, Some(Duration::from_secs(60))),
        ("approximation correctness", c8_approximation, None),
        ("proof-rule soundness and completeness", c9_proof_rules, None),
        ("transport and self-closed relations", c10_kantorovich, Some(Duration::from_secs(30))),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let took = start.elapsed();
        if let (Ok(()), Some(l)) = (&result, limit) {
            if took > *l {
                result = Err(format!("took {took:?}, limit {l:?}"));
            }
        }
        match result {
            Ok(()) => println!("criterion {:>2} PASS  {name} ({:.1} ms)", i + 1, took.as_secs_f64() * 1e3),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({:.1} ms): {msg}", i + 1, took.as_secs_f64() * 1e3);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
