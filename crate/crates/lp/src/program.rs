use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::LpError;

pub type Rational = BigRational;

pub fn r(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rel: Relation,
    pub rhs: Rational,
}

/// `lower ≤ x ≤ upper`; a missing upper bound means unbounded above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub lower: Rational,
    pub upper: Option<Rational>,
}

impl Bound {
    pub fn nonneg() -> Bound {
        Bound { lower: Rational::zero(), upper: None }
    }

    pub fn unit() -> Bound {
        Bound { lower: Rational::zero(), upper: Some(Rational::one()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
    /// Optional variable names for the text dump.
    pub names: Option<Vec<String>>,
}

impl LinearProgram {
    /// `n` non-negative variables with a zero objective.
    pub fn new(sense: Sense, n: usize) -> LinearProgram {
        LinearProgram {
            sense,
            objective: vec![Rational::zero(); n],
            constraints: Vec::new(),
            bounds: vec![Bound::nonneg(); n],
            names: None,
        }
    }

    /// `n` variables ranging over `[0,1]`, as for valuations.
    pub fn valuation(sense: Sense, n: usize) -> LinearProgram {
        LinearProgram { bounds: vec![Bound::unit(); n], ..LinearProgram::new(sense, n) }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn with_names(mut self, names: Vec<String>) -> LinearProgram {
        self.names = Some(names);
        self
    }

    pub fn set_objective(&mut self, i: usize, c: Rational) {
        self.objective[i] = c;
    }

    pub fn set_bound(&mut self, i: usize, lower: Rational, upper: Option<Rational>) {
        self.bounds[i] = Bound { lower, upper };
    }

    /// Adds a row from sparse `(variable, coefficient)` terms; repeated
    /// variables accumulate.
    pub fn add_row<I: IntoIterator<Item = (usize, Rational)>>(&mut self, terms: I, rel: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        for (i, c) in terms {
            coeffs[i] += c;
        }
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::Width { row: None, expected: n, got: self.bounds.len() });
        }
        if let Some(names) = &self.names {
            if names.len() != n {
                return Err(LpError::Width { row: None, expected: n, got: names.len() });
            }
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Width { row: Some(k), expected: n, got: c.coeffs.len() });
            }
        }
        for (i, b) in self.bounds.iter().enumerate() {
            if let Some(u) = &b.upper {
                if u < &b.lower {
                    return Err(LpError::EmptyBound(i));
                }
            }
        }
        Ok(())
    }

    fn name(&self, i: usize) -> String {
        match &self.names {
            Some(n) => n[i].clone(),
            None => format!("x{i}"),
        }
    }

    fn linear(&self, coeffs: &[Rational]) -> String {
        let mut out = String::new();
        for (i, c) in coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            let sign = if c.is_negative() { "-" } else { "+" };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            let m = c.abs();
            if !m.is_one() {
                out.push_str(&format!("{m} "));
            }
            out.push_str(&self.name(i));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sense = if self.sense == Sense::Min { "minimize" } else { "maximize" };
        writeln!(f, "{sense} {}", self.linear(&self.objective))?;
        writeln!(f, "subject to")?;
        for (k, c) in self.constraints.iter().enumerate() {
            writeln!(f, "  c{k}: {} {} {}", self.linear(&c.coeffs), c.rel, c.rhs)?;
        }
        writeln!(f, "bounds")?;
        for (i, b) in self.bounds.iter().enumerate() {
            match &b.upper {
                Some(u) => writeln!(f, "  {} <= {} <= {}", b.lower, self.name(i), u)?,
                None => writeln!(f, "  {} >= {}", self.name(i), b.lower)?,
            }
        }
        Ok(())
    }
}
