use std::sync::Arc;

use mvfix_core::mv::{q, Chain, MvValue, SubsetY, Universe, Valuation};
use proptest::prelude::*;

fn unit_value() -> impl Strategy<Value = MvValue> {
    (1i64..=12).prop_flat_map(|d| (0..=d).prop_map(move |n| MvValue::Unit(q(n, d))))
}

fn bounded_value(k: u32) -> impl Strategy<Value = MvValue> {
    (0..=k).prop_map(move |n| MvValue::Bounded { n, k })
}

fn any_chain_triple() -> impl Strategy<Value = (MvValue, MvValue, MvValue)> {
    prop_oneof![
        (unit_value(), unit_value(), unit_value()),
        (bounded_value(5), bounded_value(5), bounded_value(5)),
        (any::<bool>(), any::<bool>(), any::<bool>())
            .prop_map(|(a, b, c)| (MvValue::Bool(a), MvValue::Bool(b), MvValue::Bool(c))),
    ]
}

fn zero_of(x: &MvValue) -> MvValue {
    x.chain().zero()
}

fn one_of(x: &MvValue) -> MvValue {
    x.chain().one()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn lemma_clauses_hold((x, y, z) in any_chain_triple()) {
        let (zero, one) = (zero_of(&x), one_of(&x));
        let leq = |a: &MvValue, b: &MvValue| a.try_leq(b).unwrap();
        // 1
        prop_assert_eq!(&x + &x.comp(), one.clone());
        // 2
        let l = leq(&x, &y);
        prop_assert_eq!(l, &x.comp() + &y == one);
        prop_assert_eq!(l, &x * &y.comp() == zero);
        prop_assert_eq!(l, y == &x + &(&y - &x));
        // 3
        prop_assert_eq!(l, leq(&y.comp(), &x.comp()));
        // 4
        if leq(&x, &y) {
            prop_assert!(leq(&(&x + &z), &(&y + &z)));
            prop_assert!(leq(&(&z + &x), &(&z + &y)));
            prop_assert!(leq(&(&x * &z), &(&y * &z)));
            prop_assert!(leq(&(&x - &z), &(&y - &z)));
            prop_assert!(leq(&(&z - &y), &(&z - &x)));
        }
        // 5
        if x < y {
            prop_assert!(zero < &y - &x);
        }
        // 6
        prop_assert!(leq(&(&(&x + &y) - &y), &x));
        // 7
        prop_assert_eq!(leq(&z, &(&x + &y)), leq(&(&z - &x), &y));
        // 8
        if x < y && leq(&z, &y.comp()) {
            prop_assert!(&x + &z < &y + &z);
        }
        // 9
        prop_assert_eq!(leq(&y, &x.comp()), &(&x + &y) - &y == x);
        // 10
        prop_assert!(leq(&(&x - &(&x - &y)), &y));
        if leq(&y, &x) {
            prop_assert_eq!(&x - &(&x - &y), y.clone());
        }
        // 11
        if x < y && zero < z {
            prop_assert!(&(&x + &z) - &y < z);
        }
    }

    #[test]
    fn subtraction_is_mul_by_complement((x, y, _z) in any_chain_triple()) {
        prop_assert_eq!(&x - &y, &x * &y.comp());
    }

    #[test]
    fn unit_values_stay_in_range((x, y, _z) in (unit_value(), unit_value(), unit_value())) {
        for v in [&x + &y, &x - &y, &x * &y, x.comp()] {
            let r = v.to_rational();
            prop_assert!(r >= q(0, 1) && r <= q(1, 1));
        }
    }

    #[test]
    fn bounded_values_stay_in_range((x, y) in (bounded_value(7), bounded_value(7))) {
        for v in [&x + &y, &x - &y, &x * &y, x.comp()] {
            match v {
                MvValue::Bounded { n, k } => prop_assert!(n <= k && k == 7),
                _ => prop_assert!(false),
            }
        }
    }

    #[test]
    fn norm_is_subadditive_and_homogeneous(
        va in prop::collection::vec(unit_value(), 1..6),
        vb in prop::collection::vec(unit_value(), 1..6),
        d in unit_value(),
    ) {
        let n = va.len().min(vb.len());
        let u = Universe::shared((0..n).map(|i| format!("y{i}"))).unwrap();
        let a = Valuation::new(&u, Chain::Unit, va[..n].to_vec()).unwrap();
        let b = Valuation::new(&u, Chain::Unit, vb[..n].to_vec()).unwrap();
        prop_assert!(a.try_add(&b).unwrap().norm() <= &a.norm() + &b.norm());
        let dd = Valuation::constant(&u, d.clone());
        prop_assert_eq!(dd.try_mul(&a).unwrap().norm(), &d * &a.norm());
        if a.leq(&b) {
            prop_assert!(a.norm() <= b.norm());
        }
    }

    #[test]
    fn subsets_form_a_boolean_algebra(m1 in 0u64..256, m2 in 0u64..256, m3 in 0u64..256, n in 0usize..9) {
        let u: Arc<Universe> = Universe::shared((0..n).map(|i| format!("e{i}"))).unwrap();
        let (a, b, c) = (SubsetY::from_mask(&u, m1), SubsetY::from_mask(&u, m2), SubsetY::from_mask(&u, m3));
        prop_assert_eq!(a.union(&b), b.union(&a));
        prop_assert_eq!(a.intersection(&b.union(&c)), a.intersection(&b).union(&a.intersection(&c)));
        prop_assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert_eq!(a.union(&a.complement()), SubsetY::full(&u));
        prop_assert!(a.intersection(&a.complement()).is_empty());
        prop_assert!(a.complement().len() == n - a.len());
        prop_assert_eq!(a.difference(&b), a.intersection(&b.complement()));
    }
}
