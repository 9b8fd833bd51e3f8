use mvfix_lp::{gauss_solve, r, solve_lp, LinearProgram, LpStatus, Rational, Relation, Sense};
use proptest::prelude::*;

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-2i64..=4, cols), rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    // min cᵀx s.t. Ax ≥ b, x ≥ 0 against max bᵀy s.t. Aᵀy ≤ c, y ≥ 0
    #[test]
    fn strong_duality(
        (m, n) in (1usize..=4, 1usize..=4),
        seed_a in int_matrix(4, 4),
        b in prop::collection::vec(-3i64..=5, 4),
        c in prop::collection::vec(0i64..=6, 4),
    ) {
        let a: Vec<Vec<Rational>> = (0..m).map(|i| (0..n).map(|j| r(seed_a[i][j], 1)).collect()).collect();
        let mut primal = LinearProgram::new(Sense::Min, n);
        for j in 0..n {
            primal.set_objective(j, r(c[j], 1));
        }
        for i in 0..m {
            primal.add_row((0..n).map(|j| (j, a[i][j].clone())), Relation::Ge, r(b[i], 1));
        }
        let mut dual = LinearProgram::new(Sense::Max, m);
        for i in 0..m {
            dual.set_objective(i, r(b[i], 1));
        }
        for j in 0..n {
            dual.add_row((0..m).map(|i| (i, a[i][j].clone())), Relation::Le, r(c[j], 1));
        }
        let p = solve_lp(&primal).unwrap();
        let d = solve_lp(&dual).unwrap();
        // c ≥ 0 keeps y = 0 dual feasible, so the primal is never unbounded
        prop_assert_ne!(p.status, LpStatus::Unbounded);
        match p.status {
            LpStatus::Optimal => {
                prop_assert_eq!(d.status, LpStatus::Optimal);
                prop_assert_eq!(&p.value, &d.value);
                for i in 0..m {
                    let lhs: Rational = (0..n).map(|j| &a[i][j] * &p.x[j]).sum();
                    prop_assert!(lhs >= r(b[i], 1));
                }
            }
            _ => prop_assert_eq!(d.status, LpStatus::Unbounded),
        }
    }

    #[test]
    fn equality_systems_match_elimination(
        n in 1usize..=5,
        seed_a in int_matrix(5, 5),
        xs in prop::collection::vec(0i64..=6, 5),
    ) {
        let a: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| r(seed_a[i][j] + if i == j { 9 } else { 0 }, 1)).collect()).collect();
        let x: Vec<Rational> = xs[..n].iter().map(|&v| r(v, 6)).collect();
        let b: Vec<Rational> = a.iter().map(|row| row.iter().zip(&x).map(|(u, v)| u * v).sum()).collect();
        let g = gauss_solve(&a, &b).expect("diagonally dominant");
        prop_assert_eq!(&g, &x);
        let mut lp = LinearProgram::valuation(Sense::Max, n);
        for j in 0..n {
            lp.set_objective(j, r(1, 1));
        }
        for i in 0..n {
            lp.add_row((0..n).map(|j| (j, a[i][j].clone())), Relation::Eq, b[i].clone());
        }
        let s = solve_lp(&lp).unwrap();
        prop_assert_eq!(s.x, g);
    }
}

#[test]
fn beale_cycling_example_terminates() {
    let mut lp = LinearProgram::new(Sense::Min, 4);
    lp.objective = vec![r(-3, 4), r(150, 1), r(-1, 50), r(6, 1)];
    lp.add_row([(0, r(1, 4)), (1, r(-60, 1)), (2, r(-1, 25)), (3, r(9, 1))], Relation::Le, r(0, 1));
    lp.add_row([(0, r(1, 2)), (1, r(-90, 1)), (2, r(-1, 50)), (3, r(3, 1))], Relation::Le, r(0, 1));
    lp.add_row([(2, r(1, 1))], Relation::Le, r(1, 1));
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert_eq!(s.value, r(-1, 20));
    assert!(s.pivots <= 30, "{} pivots", s.pivots);
}

#[test]
fn klee_minty_cube_terminates() {
    let n = 5;
    let mut lp = LinearProgram::new(Sense::Max, n);
    for j in 0..n {
        lp.set_objective(j, r(1 << (n - 1 - j), 1));
    }
    for i in 0..n {
        let mut terms: Vec<(usize, Rational)> = (0..i).map(|j| (j, r(1 << (i - j + 1), 1))).collect();
        terms.push((i, r(1, 1)));
        lp.add_row(terms, Relation::Le, r(5i64.pow(i as u32 + 1), 1));
    }
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.value, r(5i64.pow(n as u32), 1));
    assert!(s.pivots <= 1 << n, "{} pivots", s.pivots);
}

#[test]
fn highly_degenerate_assignment() {
    // 4×4 assignment polytope with all-equal costs: every vertex is degenerate
    let n = 4;
    let mut lp = LinearProgram::new(Sense::Min, n * n);
    for k in 0..n * n {
        lp.set_objective(k, r(1, 1));
    }
    for i in 0..n {
        lp.add_row((0..n).map(|j| (i * n + j, r(1, 1))), Relation::Eq, r(1, 1));
        lp.add_row((0..n).map(|j| (j * n + i, r(1, 1))), Relation::Eq, r(1, 1));
    }
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.value, r(4, 1));
    assert!(s.pivots <= 100, "{} pivots", s.pivots);
}

#[test]
fn dump_is_readable() {
    let mut lp = LinearProgram::valuation(Sense::Min, 2).with_names(vec!["a".into(), "b".into()]);
    lp.objective = vec![r(1, 1), r(-1, 2)];
    lp.add_row([(0, r(1, 1)), (1, r(-1, 1))], Relation::Ge, r(1, 3));
    let text = lp.to_string();
    assert!(text.contains("minimize a - 1/2 b"), "{text}");
    assert!(text.contains("c0: a - b >= 1/3"), "{text}");
    assert!(text.contains("0 <= b <= 1"), "{text}");
}
