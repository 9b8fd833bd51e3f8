//! Two-phase dense tableau simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};

use crate::program::{LinearProgram, Rational, Relation, Sense};
use crate::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless the status is optimal.
    pub x: Vec<Rational>,
    /// Objective value at `x`; zero unless the status is optimal.
    pub value: Rational,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    /// Columns at or past this index are artificial.
    first_art: usize,
    pivots: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let p = self.rows[i][j].clone();
        for v in self.rows[i].iter_mut() {
            *v /= &p;
        }
        let prow = self.rows[i].clone();
        let eliminate = |row: &mut Vec<Rational>| {
            let factor = row[j].clone();
            if factor.is_zero() {
                return;
            }
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        };
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k != i {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[i] = j;
        self.pivots += 1;
    }

    fn set_costs(&mut self, cost: &[Rational]) {
        let w = self.width();
        let mut obj: Vec<Rational> = (0..=w).map(|j| if j < w { cost[j].clone() } else { Rational::zero() }).collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                *o -= cb * v;
            }
        }
        self.obj = obj;
    }

    /// Runs to optimality; returns false when unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let rhs = self.width();
        loop {
            let Some(j) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[j];
                let better = match &best {
                    None => true,
                    Some((k, r)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*k]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((i, _)) => self.pivot(i, j),
                None => return false,
            }
        }
    }
}

/// Solves `lp` exactly. Infeasibility and unboundedness are statuses.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();

    // shift to y = x - lower ≥ 0 and collect rows with non-negative right-hand sides
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let shift: Rational = c.coeffs.iter().zip(&lp.bounds).map(|(a, b)| a * &b.lower).sum();
        rows.push((c.coeffs.clone(), c.rel, &c.rhs - shift));
    }
    for (i, b) in lp.bounds.iter().enumerate() {
        if let Some(u) = &b.upper {
            let mut coeffs = vec![Rational::zero(); n];
            coeffs[i] = Rational::from_integer(1.into());
            rows.push((coeffs, Relation::Le, u - &b.lower));
        }
    }
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if rhs.is_negative() {
            for c in coeffs.iter_mut() {
                *c = -c.clone();
            }
            *rhs = -rhs.clone();
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_art = n + n_slack;
    let width = first_art + n_art;
    let one = Rational::from_integer(1.into());

    let mut table = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (n, first_art);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(width + 1, Rational::zero());
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[s] = one.clone();
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -one.clone();
                s += 1;
                row[a] = one.clone();
                basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = one.clone();
                basis.push(a);
                a += 1;
            }
        }
        table.push(row);
    }
    let mut t = Tableau { rows: table, obj: vec![Rational::zero(); width + 1], basis, first_art, pivots: 0 };

    // phase 1
    let phase1: Vec<Rational> = (0..width).map(|j| if j >= first_art { one.clone() } else { Rational::zero() }).collect();
    t.set_costs(&phase1);
    t.run(width);
    if !t.obj[width].is_zero() {
        return Ok(LpSolution { status: LpStatus::Infeasible, x: Vec::new(), value: Rational::zero(), pivots: t.pivots });
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= t.first_art {
            match (0..t.first_art).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // phase 2
    let mut cost = vec![Rational::zero(); width];
    for (c, o) in cost.iter_mut().zip(&lp.objective) {
        *c = if lp.sense == Sense::Min { o.clone() } else { -o.clone() };
    }
    t.set_costs(&cost);
    if !t.run(t.first_art) {
        return Ok(LpSolution { status: LpStatus::Unbounded, x: Vec::new(), value: Rational::zero(), pivots: t.pivots });
    }
    let mut x: Vec<Rational> = lp.bounds.iter().map(|b| b.lower.clone()).collect();
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        if b < n {
            x[b] += &row[width];
        }
    }
    let value = x.iter().zip(&lp.objective).map(|(x, c)| x * c).sum();
    Ok(LpSolution { status: LpStatus::Optimal, x, value, pivots: t.pivots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::r;

    #[test]
    fn trivial_lower_bound() {
        let mut lp = LinearProgram::new(Sense::Min, 1);
        lp.set_objective(0, r(1, 1));
        lp.add_row([(0, r(1, 1))], Relation::Ge, r(1, 3));
        lp.add_row([(0, r(1, 1))], Relation::Le, r(1, 1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x, vec![r(1, 3)]);
    }

    #[test]
    fn statuses() {
        let mut lp = LinearProgram::new(Sense::Max, 1);
        lp.set_objective(0, r(1, 1));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
        lp.add_row([(0, r(1, 1))], Relation::Le, r(-1, 1));
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn shifted_bounds() {
        // max x + y, 1/2 ≤ x ≤ 3/4, -1 ≤ y ≤ 2, x + y ≤ 2
        let mut lp = LinearProgram::new(Sense::Max, 2);
        lp.objective = vec![r(1, 1), r(1, 1)];
        lp.set_bound(0, r(1, 2), Some(r(3, 4)));
        lp.set_bound(1, r(-1, 1), Some(r(2, 1)));
        lp.add_row([(0, r(1, 1)), (1, r(1, 1))], Relation::Le, r(2, 1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.value, r(2, 1));
        assert!(s.x[0] >= r(1, 2) && s.x[1] <= r(2, 1));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::valuation(Sense::Min, 2);
        lp.objective = vec![r(1, 1), r(0, 1)];
        lp.add_row([(0, r(1, 1)), (1, r(1, 1))], Relation::Eq, r(1, 1));
        lp.add_row([(0, r(2, 1)), (1, r(2, 1))], Relation::Eq, r(2, 1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.x, vec![r(0, 1), r(1, 1)]);
    }
}
