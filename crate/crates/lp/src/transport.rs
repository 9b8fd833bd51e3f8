use num_traits::{One, Signed, Zero};

use crate::program::{LinearProgram, Rational, Relation, Sense};
use crate::simplex::{solve_lp, LpStatus};
use crate::LpError;

/// Couplings of `p` and `q` with a cost matrix, optionally restricted to a
/// support mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportInstance {
    pub p: Vec<Rational>,
    pub q: Vec<Rational>,
    /// `cost[i][j]`, shape `p.len() × q.len()`.
    pub cost: Vec<Vec<Rational>>,
    /// `mask[i][j] = false` forbids mass on `(i, j)`.
    pub mask: Option<Vec<Vec<bool>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportSolution {
    pub status: LpStatus,
    pub value: Rational,
    /// Optimal coupling, same shape as the cost matrix; empty unless optimal.
    pub coupling: Vec<Vec<Rational>>,
}

impl TransportInstance {
    pub fn new(p: Vec<Rational>, q: Vec<Rational>, cost: Vec<Vec<Rational>>) -> TransportInstance {
        TransportInstance { p, q, cost, mask: None }
    }

    pub fn with_mask(mut self, mask: Vec<Vec<bool>>) -> TransportInstance {
        self.mask = Some(mask);
        self
    }

    fn validate(&self) -> Result<(), LpError> {
        for (name, d) in [("p", &self.p), ("q", &self.q)] {
            if d.iter().any(|x| x.is_negative()) || d.iter().sum::<Rational>() != Rational::one() {
                return Err(LpError::NotDistribution(name));
            }
        }
        let shape_ok = |rows: usize, cols: &[usize]| rows == self.p.len() && cols.iter().all(|&c| c == self.q.len());
        let cost_cols: Vec<usize> = self.cost.iter().map(Vec::len).collect();
        if !shape_ok(self.cost.len(), &cost_cols) {
            return Err(LpError::Shape("cost"));
        }
        if let Some(m) = &self.mask {
            let cols: Vec<usize> = m.iter().map(Vec::len).collect();
            if !shape_ok(m.len(), &cols) {
                return Err(LpError::Shape("mask"));
            }
        }
        Ok(())
    }

    fn allowed(&self, i: usize, j: usize) -> bool {
        self.mask.as_ref().map_or(true, |m| m[i][j])
    }
}

/// Minimum expected cost over couplings, with an optimal coupling.
pub fn solve_transport(t: &TransportInstance) -> Result<TransportSolution, LpError> {
    t.validate()?;
    let rows: Vec<usize> = (0..t.p.len()).filter(|&i| t.p[i].is_positive()).collect();
    let cols: Vec<usize> = (0..t.q.len()).filter(|&j| t.q[j].is_positive()).collect();
    let vars: Vec<(usize, usize)> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| t.allowed(i, j))
        .collect();

    let mut lp = LinearProgram::new(Sense::Min, vars.len());
    for (k, &(i, j)) in vars.iter().enumerate() {
        lp.set_objective(k, t.cost[i][j].clone());
    }
    let one = Rational::one();
    for &i in &rows {
        let terms = vars.iter().enumerate().filter(|(_, v)| v.0 == i).map(|(k, _)| (k, one.clone()));
        lp.add_row(terms, Relation::Eq, t.p[i].clone());
    }
    for &j in &cols {
        let terms = vars.iter().enumerate().filter(|(_, v)| v.1 == j).map(|(k, _)| (k, one.clone()));
        lp.add_row(terms, Relation::Eq, t.q[j].clone());
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Ok(TransportSolution { status: sol.status, value: Rational::zero(), coupling: Vec::new() });
    }
    let mut coupling = vec![vec![Rational::zero(); t.q.len()]; t.p.len()];
    for (&(i, j), x) in vars.iter().zip(sol.x) {
        coupling[i][j] = x;
    }
    Ok(TransportSolution { status: LpStatus::Optimal, value: sol.value, coupling })
}
