use num_traits::Zero;

use crate::program::Rational;

/// Solves the square system `a·x = b` by exact Gauss–Jordan elimination.
/// Returns `None` when `a` is singular.
pub fn gauss_solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n), "system must be square");
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| row.iter().cloned().chain(std::iter::once(bi.clone())).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let pv = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &pv;
        }
        let prow = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= &f * pv;
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::r;

    #[test]
    fn solves_and_detects_singularity() {
        let a = vec![vec![r(2, 1), r(1, 1)], vec![r(1, 1), r(3, 1)]];
        assert_eq!(gauss_solve(&a, &[r(3, 1), r(5, 1)]), Some(vec![r(4, 5), r(7, 5)]));
        let s = vec![vec![r(1, 1), r(2, 1)], vec![r(2, 1), r(4, 1)]];
        assert_eq!(gauss_solve(&s, &[r(1, 1), r(2, 1)]), None);
    }
}
