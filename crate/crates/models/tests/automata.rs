use mvfix_core::proof::witness_set;
use mvfix_core::{q, Chain, Direction, Distribution, MvValue, SubsetY, Universe, Valuation, ValuationFn};
use mvfix_models::gen::random_pa;
use mvfix_models::io::{parse, PaDoc};
use mvfix_models::{ModelError, ProbAutomaton};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cycle() -> ProbAutomaton {
    let doc: PaDoc = parse(
        r#"{"states":["y","z"],"labels":["a"],"ell":{"y":"a","z":"a"},
            "dists":{"y":[{"z":"1"}],"z":[{"y":"1"}]}}"#,
    )
    .unwrap();
    doc.build().unwrap()
}

#[test]
fn vicious_cycle_has_a_non_least_fixpoint() {
    let pa = cycle();
    let sp = pa.space().clone();
    let d = sp.matrix(Chain::Unit, |i, j| MvValue::Unit(if i == j { q(0, 1) } else { q(1, 2) })).unwrap();
    assert_eq!(pa.m_eval(&d).unwrap(), d);
    let off = sp.subset([(0, 1), (1, 0)]);
    assert_eq!(pa.largest_self_closed(&d).unwrap(), off);
    assert!(pa.is_self_closed(&d, &off).unwrap());

    let jump = mvfix_core::proof::improve_pre_fixpoint(&pa, &d).unwrap();
    assert_eq!(jump.witness, off);
    assert!(pa.m_eval(&jump.value).unwrap().leq(&jump.value));

    let run = pa.distance().unwrap();
    assert_eq!(run.value, Valuation::zero(sp.pairs(), Chain::Unit));
    assert!(pa.largest_self_closed(&run.value).unwrap().is_empty());
}

#[test]
fn single_state_has_empty_relation() {
    let u = Universe::shared(["s"]).unwrap();
    let l = Universe::shared(["a"]).unwrap();
    let pa = ProbAutomaton::new(&u, &l, vec![0], vec![vec![Distribution::dirac(0)]]).unwrap();
    let run = pa.distance().unwrap();
    assert_eq!(run.value, Valuation::zero(pa.space().pairs(), Chain::Unit));
    assert!(pa.largest_self_closed(&run.value).unwrap().is_empty());
}

#[test]
fn non_fixpoints_are_rejected() {
    let pa = cycle();
    let sp = pa.space().clone();
    let d = sp.matrix(Chain::Unit, |i, j| MvValue::unit([[0, 1], [1, 0]][i][j], 2 + i as i64)).unwrap();
    assert_ne!(pa.m_eval(&d).unwrap(), d);
    assert!(matches!(pa.largest_self_closed(&d), Err(ModelError::NotAFixpoint)));
}

#[test]
fn labels_and_empty_sets() {
    let doc: PaDoc = parse(
        r#"{"states":["s","t","u","v"],"labels":["a","b"],"ell":{"s":"a","t":"b","u":"a","v":"a"},
            "dists":{"s":[{"s":"1"}],"t":[{"t":"1"}]}}"#,
    )
    .unwrap();
    let pa = doc.build().unwrap();
    let sp = pa.space().clone();
    let mu = pa.distance().unwrap().value;
    let at = |a: usize, b: usize| sp.at(&mu, a, b).clone();
    assert_eq!(at(0, 1), MvValue::unit(1, 1));
    assert_eq!(at(0, 2), MvValue::unit(1, 1));
    assert_eq!(at(2, 3), MvValue::unit(0, 1));
}

#[test]
fn self_closed_checker_matches_post_fixpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..12 {
        let n = rng.gen_range(1..=3usize);
        let pa = random_pa(n, 2, &mut rng);
        let sp = pa.space().clone();
        let top = Valuation::one(sp.pairs(), Chain::Unit);
        let d = pa.fixpoint_below(&top).unwrap();
        assert_eq!(pa.m_eval(&d).unwrap(), d);
        let g = pa.approx_dual(&d).unwrap();
        for mask in 0u64..1 << (n * n) {
            let r = SubsetY::from_mask(sp.pairs(), mask);
            let post = r.is_subset(&g.apply(&r));
            assert_eq!(pa.is_self_closed(&d, &r).unwrap(), post, "{r}");
        }
    }
}

#[test]
fn distance_is_least_on_random_automata() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..25 {
        let n = rng.gen_range(1..=3usize);
        let pa = random_pa(n, 2, &mut rng);
        let sp = pa.space().clone();
        let run = pa.distance().unwrap();
        let mu = &run.value;
        assert_eq!(&pa.m_eval(mu).unwrap(), mu);
        assert!(pa.largest_self_closed(mu).unwrap().is_empty());
        assert!(witness_set(&pa, mu, Direction::Dual).unwrap().is_empty());
        // Kleene from 0 stays below
        let mut k = Valuation::zero(sp.pairs(), Chain::Unit);
        for _ in 0..6 {
            k = pa.eval(&k).unwrap();
            assert!(k.leq(mu));
        }
    }
}

#[test]
fn json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let pa = random_pa(3, 2, &mut rng);
    let doc = PaDoc::from_model(&pa);
    let back: PaDoc = parse(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(back, doc);
    let again = back.build().unwrap();
    assert_eq!(again.distance().unwrap().value, pa.distance().unwrap().value);
}
