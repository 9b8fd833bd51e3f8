//! Bundled example corpus with expected outcomes.

use std::sync::Arc;

use mvfix_core::nonexp::{alpha, approx_at, gamma};
use mvfix_core::proof::{improve_pre_fixpoint, is_least_fixpoint, witness_set};
use mvfix_core::{q, Chain, Direction, FnExpr, MvValue, Rational, Shift, SubsetY, Universe, Valuation, ValuationFn, Verdict};
use mvfix_games::io::SsgDoc;
use mvfix_games::{forced_cycle_nodes, strategy_iteration_above, strategy_iteration_below, Player, Strategy};
use mvfix_models::io::{parse, LtsDoc, McDoc, MtsDoc, PairsDoc, ValuationDoc};
use serde::Serialize;

pub const FIG1: &str = include_str!("../../../data/fig1.json");
pub const REDS: &str = include_str!("../../../data/reds.json");
pub const NO_GREATEST: &str = include_str!("../../../data/no_greatest.json");
pub const NO_GREATEST_T: &str = include_str!("../../../data/no_greatest_t.json");
pub const MTS: &str = include_str!("../../../data/mts.json");
pub const MTS_HALF: &str = include_str!("../../../data/mts_half.json");
pub const BISIM_TS: &str = include_str!("../../../data/bisim_ts.json");
pub const BISIM_A1: &str = include_str!("../../../data/bisim_a1.json");
pub const BISIM_A2: &str = include_str!("../../../data/bisim_a2.json");
pub const SSG: &str = include_str!("../../../data/ssg_example.json");

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

type Outcome = Result<String, String>;

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn running() -> (Arc<Universe>, Valuation) {
    let u = Universe::shared(["y1", "y2", "y3", "y4"]).expect("names");
    let a = Valuation::unit(&u, vec![q(1, 5), q(2, 5), q(9, 10), q(1, 1)]).expect("unit values");
    (u, a)
}

fn names(u: &Arc<Universe>, xs: &[&str]) -> SubsetY {
    SubsetY::from_names(u, xs).expect("known names")
}

fn fig1() -> Outcome {
    let mc = parse::<McDoc>(FIG1).and_then(|d| d.build()).map_err(err)?;
    let u = mc.states().clone();
    let mu = mc.term_prob_exact();
    expect("μT", mu.to_rationals(), vec![q(1, 2), q(1, 1), q(0, 1), q(0, 1)])?;
    let red = parse::<ValuationDoc>(REDS).and_then(|d| d.build(&u, Chain::Unit)).map_err(err)?;
    let c = is_least_fixpoint(&mc, &red).map_err(err)?;
    expect("verdict", c.verdict, Verdict::Refuted)?;
    expect("witness", c.witness.names(), vec!["y".to_string(), "z".to_string()])?;
    Ok("μT = (1/2, 1, 0, 0); red fixpoint refuted on {y, z}".into())
}

fn running_1() -> Outcome {
    let (u, a) = running();
    expect("δ_a", a.delta_floor(), MvValue::unit(1, 10))?;
    let d = MvValue::unit(1, 10);
    let b = alpha(&a, &d, &names(&u, &["y1", "y3"])).map_err(err)?;
    expect("α", b.to_rationals(), vec![q(3, 10), q(2, 5), q(1, 1), q(1, 1)])?;
    let b2 = Valuation::unit(&u, vec![q(3, 10), q(9, 20), q(1, 1), q(1, 1)]).map_err(err)?;
    expect("γ", gamma(&a, &d, &b2).map_err(err)?.names(), vec!["y1".to_string(), "y3".to_string()])?;
    Ok("δ_a = 1/10; α and γ agree".into())
}

fn running_2() -> Outcome {
    let (u, a) = running();
    let f = FnExpr::translate(&u, MvValue::unit(3, 10), Shift::Down);
    expect("f(a)", f.eval(&a).map_err(err)?.to_rationals(), vec![q(0, 1), q(1, 10), q(3, 5), q(7, 10)])?;
    let yp = names(&u, &["y1", "y2", "y3"]);
    let at = |p, d| approx_at(&f, &a, &MvValue::unit(p, d), &yp).map(|s| s.names()).map_err(err);
    expect("δ = 1/20", at(1, 20)?, vec!["y2".to_string(), "y3".to_string()])?;
    expect("δ = 3/10", at(3, 10)?, vec!["y2".to_string()])?;
    expect("δ = 7/10", at(7, 10)?, Vec::<String>::new())?;
    Ok("{y2,y3} / {y2} / ∅".into())
}

fn running_3() -> Outcome {
    let (u, a) = running();
    let g = FnExpr::translate(&u, MvValue::unit(1, 10), Shift::Up);
    let yp = names(&u, &["y1", "y2"]);
    expect("δ on Y′", a.delta_floor_on(&yp), MvValue::unit(3, 5))?;
    expect("δ = 1/2", approx_at(&g, &a, &MvValue::unit(1, 2), &yp).map_err(err)?, yp.clone())?;
    expect("δ = 11/20", approx_at(&g, &a, &MvValue::unit(11, 20), &yp).map_err(err)?.names(), vec!["y1".to_string()])?;
    Ok("increase propagates up to 1/2".into())
}

fn no_greatest() -> Outcome {
    let mc = parse::<McDoc>(NO_GREATEST).and_then(|d| d.build()).map_err(err)?;
    let u = mc.states().clone();
    let t = parse::<ValuationDoc>(NO_GREATEST_T).and_then(|d| d.build(&u, Chain::Unit)).map_err(err)?;
    expect("T(t)", mc.eval(&t).map_err(err)?, t.clone())?;
    expect("ν", witness_set(&mc, &t, Direction::Dual).map_err(err)?, SubsetY::full(&u))?;
    let j = improve_pre_fixpoint(&mc, &t).map_err(err)?;
    expect("t′", j.value.to_rationals(), vec![q(0, 1), q(2, 5), q(4, 5)])?;
    let half = t.try_sub(&Valuation::constant(&u, MvValue::unit(1, 2))).map_err(err)?;
    expect("t ⊖ 1/2 pre-fixpoint", mc.eval(&half).map_err(err)?.leq(&half), false)?;
    Ok("t′ = (0, 2/5, 4/5); t ⊖ 1/2 is not a pre-fixpoint".into())
}

fn mts_model() -> Result<mvfix_models::MetricTS, String> {
    parse::<MtsDoc>(MTS).and_then(|d| d.build()).map_err(err)
}

fn mts_least() -> Outcome {
    let m = mts_model()?;
    let sp = m.space().clone();
    let mu = m.least_fixpoint().map_err(err)?;
    let at = |p: &str| sp.pairs().index_of(p).map(|k| mu.get(k).to_rational()).expect("pair");
    let got: Vec<Rational> = ["x,y", "x,z", "y,z"].iter().map(|p| at(p)).collect();
    let want = vec![q(1, 2), q(3, 10), q(1, 2)];
    if got == want {
        Ok("μJ = (1/2, 3/10, 1/2)".into())
    } else {
        Err(format!(
            "μJ(x,y), μJ(x,z), μJ(y,z) = ({}, {}, {}); expected (1/2, 3/10, 1/2). \
             The data give J(d)(x,z) = max(d(z,x), |w(x) − w(z)|) = max(d(z,x), 1/5), whose least solution is 1/5",
            got[0], got[1], got[2]
        ))
    }
}

fn mts_witness() -> Outcome {
    let m = mts_model()?;
    let sp = m.space().clone();
    let d = parse::<PairsDoc>(MTS_HALF).and_then(|doc| doc.build(&sp, Chain::Unit, &MvValue::unit(0, 1))).map_err(err)?;
    expect("J(d)", m.eval(&d).map_err(err)?, d.clone())?;
    let w = witness_set(&m, &d, Direction::Dual).map_err(err)?;
    expect("ν", w.names(), vec!["x,z".to_string(), "z,x".to_string()])?;
    Ok("ν J_#^d = S({(x,z)})".into())
}

fn bisim() -> Outcome {
    let ts = parse::<LtsDoc>(BISIM_TS).and_then(|d| d.build()).map_err(err)?;
    let sp = ts.space().clone();
    let xu = sp.pair_named("x,u").map_err(err)?;
    let load = |text: &str| parse::<PairsDoc>(text).and_then(|d| d.build(&sp, Chain::Bool, &Chain::Bool.one())).map_err(err);
    let c1 = ts.witness_nonbisim(&load(BISIM_A1)?, xu).map_err(err)?;
    expect("bisim-1", c1.verdict, Verdict::Certified)?;
    let c2 = ts.witness_nonbisim(&load(BISIM_A2)?, xu).map_err(err)?;
    expect("bisim-2", c2.verdict, Verdict::Inconclusive)?;
    expect("bisim-2 witness", c2.witness.names(), vec!["x,u".to_string()])?;
    Ok("bisim-1 certified; bisim-2 inconclusive on {x,u}".into())
}

fn ssg() -> Outcome {
    let g = mvfix_games::io::parse::<SsgDoc>(SSG).and_then(|d| d.build()).map_err(err)?;
    let id = |n: &str| g.nodes().index_of(n).expect("node");
    let want = vec![q(1, 1), q(1, 4), q(1, 4), q(1, 4), q(1, 4)];
    let above = strategy_iteration_above(&g, &Strategy::lowest(&g, Player::Min)).map_err(err)?;
    expect("SIA", above.values.to_rationals(), want.clone())?;
    if above.stats.jumps == 0 {
        return Err("SIA finished without a jump".into());
    }
    let sigma = Strategy::lowest(&g, Player::Max).with(&g, id("max"), id("av")).map_err(err)?;
    let below = strategy_iteration_below(&g, &sigma).map_err(err)?;
    expect("SIB", below.values.to_rationals(), want)?;
    expect("C_σ", forced_cycle_nodes(&g, &sigma).map_err(err)?.names(), vec!["min".into(), "av".into(), "max".into()])?;
    Ok(format!("SIA with {} jump(s) and SIB agree on (1, 1/4, 1/4, 1/4, 1/4)", above.stats.jumps))
}

pub fn run_all() -> Vec<Check> {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("fig1", fig1),
        ("running-1", running_1),
        ("running-2", running_2),
        ("running-3", running_3),
        ("markov-no-greatest", no_greatest),
        ("mts-least", mts_least),
        ("mts-witness", mts_witness),
        ("bisim", bisim),
        ("ssg", ssg),
        ("ssg-cycle", ssg_cycle),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let r = f();
            Check { name: name.to_string(), passed: r.is_ok(), detail: r.unwrap_or_else(|e| e) }
        })
        .collect()
}

fn ssg_cycle() -> Outcome {
    let g = mvfix_games::io::parse::<SsgDoc>(SSG).and_then(|d| d.build()).map_err(err)?;
    let a = Valuation::unit(g.nodes(), vec![q(1, 1), q(1, 4), q(1, 1), q(1, 1), q(1, 1)]).map_err(err)?;
    let cyc = SubsetY::from_names(g.nodes(), &["min", "av", "max"]).map_err(err)?;
    expect("V_#^a", g.value_approx_dual(&a).map_err(err)?.apply(&cyc), cyc)?;
    Ok("vicious cycle {min, av, max} detected".into())
}
