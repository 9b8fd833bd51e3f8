use mvfix_lp::{r, solve_transport, LpStatus, Rational, TransportInstance};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unique solution of an over- or under-determined system, if any.
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

/// Minimum cost over all basic feasible couplings.
fn vertex_oracle(p: &[Rational], q: &[Rational], cost: &[Vec<Rational>]) -> Rational {
    let cells: Vec<(usize, usize)> =
        (0..p.len()).flat_map(|i| (0..q.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i].is_positive() && q[j].is_positive()).collect();
    let mut best: Option<Rational> = None;
    for mask in 1u32..1 << cells.len() {
        let chosen: Vec<(usize, usize)> = cells.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, c)| *c).collect();
        let k = chosen.len();
        let mut rows = Vec::new();
        for (i, pi) in p.iter().enumerate() {
            let mut row: Vec<Rational> = chosen.iter().map(|c| if c.0 == i { r(1, 1) } else { r(0, 1) }).collect();
            row.push(pi.clone());
            rows.push(row);
        }
        for (j, qj) in q.iter().enumerate() {
            let mut row: Vec<Rational> = chosen.iter().map(|c| if c.1 == j { r(1, 1) } else { r(0, 1) }).collect();
            row.push(qj.clone());
            rows.push(row);
        }
        if let Some(x) = unique_solution(rows, k) {
            if x.iter().all(|v| !v.is_negative()) {
                let c: Rational = chosen.iter().zip(&x).map(|(&(i, j), v)| &cost[i][j] * v).sum();
                if best.as_ref().map_or(true, |b| &c < b) {
                    best = Some(c);
                }
            }
        }
    }
    best.expect("the product coupling is feasible, so some vertex exists")
}

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let den = rng.gen_range(1..=6);
    let mut units = vec![0i64; n];
    for _ in 0..den {
        units[rng.gen_range(0..n)] += 1;
    }
    units.into_iter().map(|u| r(u, den)).collect()
}

#[test]
fn transport_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let (n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let p = random_dist(&mut rng, n);
        let q = random_dist(&mut rng, m);
        let cost: Vec<Vec<Rational>> = (0..n).map(|_| (0..m).map(|_| r(rng.gen_range(0..=8), 8)).collect()).collect();
        let sol = solve_transport(&TransportInstance::new(p.clone(), q.clone(), cost.clone())).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, vertex_oracle(&p, &q, &cost));
        for (i, row) in sol.coupling.iter().enumerate() {
            assert_eq!(row.iter().sum::<Rational>(), p[i]);
        }
        for (j, qj) in q.iter().enumerate() {
            assert_eq!(sol.coupling.iter().map(|row| row[j].clone()).sum::<Rational>(), *qj);
        }
    }
}

#[test]
fn discrete_metric_shift_has_oracle_value_half() {
    let p = vec![r(1, 2), r(1, 2), r(0, 1)];
    let q = vec![r(0, 1), r(1, 2), r(1, 2)];
    let d: Vec<Vec<Rational>> = (0..3).map(|i| (0..3).map(|j| r((i != j) as i64, 1)).collect()).collect();
    assert_eq!(vertex_oracle(&p, &q, &d), r(1, 2));
    assert_eq!(solve_transport(&TransportInstance::new(p, q, d)).unwrap().value, r(1, 2));
}

#[test]
fn masking_the_unique_optimum_raises_the_cost() {
    let p = vec![r(1, 2), r(1, 2)];
    let d = vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]];
    let free = solve_transport(&TransportInstance::new(p.clone(), p.clone(), d.clone())).unwrap();
    assert_eq!(free.value, r(0, 1));
    let t = TransportInstance::new(p.clone(), p, d).with_mask(vec![vec![false, true], vec![true, true]]);
    let masked = solve_transport(&t).unwrap();
    assert_eq!(masked.value, r(1, 1));
    assert!(masked.value > free.value);
}

#[test]
fn masking_every_coupling_is_infeasible() {
    let p = vec![r(1, 2), r(1, 2)];
    let q = vec![r(1, 1), r(0, 1)];
    let d = vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]];
    let t = TransportInstance::new(p, q, d).with_mask(vec![vec![false, true], vec![true, true]]);
    assert_eq!(solve_transport(&t).unwrap().status, LpStatus::Infeasible);
}
