//! Exact rational linear-program feasibility.
//!
//! Feasibility only: nonnegative variables under equality constraints,
//! decided by a dense phase-1 simplex with Bland's pivoting rule. Bland's
//! rule guarantees termination without any perturbation, and exact rational
//! arithmetic makes the outcome a certificate: a returned point satisfies
//! every row exactly, and an `Infeasible` verdict carries the strictly
//! positive phase-1 optimum (the minimum total artificial slack).

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
}

/// `k` nonnegative unknowns under exact equality rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    variables: usize,
    rows: Vec<(Vec<Rational>, Rational)>,
}

impl LinearProgram {
    pub fn new(variables: usize) -> Self {
        LinearProgram {
            variables,
            rows: Vec::new(),
        }
    }

    /// Adds the equality row `coefficients . x = rhs`.
    pub fn equality(&mut self, coefficients: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.rows.push((coefficients, rhs));
        self
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn rows(&self) -> &[(Vec<Rational>, Rational)] {
        &self.rows
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.variables == 0 {
            return Err(LpError::MalformedProgram("no variables".into()));
        }
        for (idx, (row, _)) in self.rows.iter().enumerate() {
            if row.len() != self.variables {
                return Err(LpError::MalformedProgram(format!(
                    "row {idx} has {} coefficients, expected {}",
                    row.len(),
                    self.variables
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    /// An exact feasible point.
    Feasible(Vec<Rational>),
    /// No feasible point exists; the phase-1 optimum is strictly positive.
    Infeasible { phase1_optimum: Rational },
}

/// Decides feasibility of `A x = b, x >= 0` exactly.
pub fn lp_feasible(program: &LinearProgram) -> Result<LpOutcome, LpError> {
    program.validate()?;
    let n = program.variables;
    let m = program.rows.len();
    if m == 0 {
        return Ok(LpOutcome::Feasible(vec![Rational::zero(); n]));
    }

    // tableau rows: [A | I] with b >= 0 after sign normalization;
    // basis starts as the artificial identity block.
    let width = n + m;
    let mut tableau: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    for (i, (row, b)) in program.rows.iter().enumerate() {
        let negate = b.is_negative();
        let mut t_row = vec![Rational::zero(); width];
        for (j, a) in row.iter().enumerate() {
            t_row[j] = if negate { -a.clone() } else { a.clone() };
        }
        t_row[n + i] = Rational::one();
        tableau.push(t_row);
        rhs.push(if negate { -b.clone() } else { b.clone() });
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase-1 objective: minimize the sum of artificials. With artificials
    // basic, the reduced-cost row is the column sum of the original block
    // and the objective value the sum of the right-hand sides.
    let mut reduced: Vec<Rational> = (0..width)
        .map(|j| {
            if j < n {
                tableau.iter().map(|row| &row[j]).sum()
            } else {
                Rational::zero()
            }
        })
        .collect();
    let mut objective: Rational = rhs.iter().sum();

    loop {
        // Bland: entering column = smallest index with positive reduced cost.
        let entering = (0..width).find(|&j| reduced[j].is_positive());
        let entering = match entering {
            Some(j) => j,
            None => break,
        };
        // ratio test; ties by smallest basis variable (Bland).
        let mut pivot_row: Option<usize> = None;
        let mut best_ratio: Option<Rational> = None;
        for i in 0..m {
            if tableau[i][entering].is_positive() {
                let ratio = &rhs[i] / &tableau[i][entering];
                let better = match &best_ratio {
                    None => true,
                    Some(current) => {
                        &ratio < current
                            || (&ratio == current
                                && basis[i] < basis[pivot_row.expect("ratio set with row")])
                    }
                };
                if better {
                    best_ratio = Some(ratio);
                    pivot_row = Some(i);
                }
            }
        }
        let pivot_row = match pivot_row {
            Some(i) => i,
            // unreachable in phase 1: the objective is bounded below by
            // zero, so every improving column has a positive entry
            None => break,
        };

        // pivot: normalize the row, eliminate the column elsewhere.
        let pivot_value = tableau[pivot_row][entering].clone();
        for value in tableau[pivot_row].iter_mut() {
            *value /= &pivot_value;
        }
        rhs[pivot_row] /= &pivot_value;
        for i in 0..m {
            if i != pivot_row && !tableau[i][entering].is_zero() {
                let factor = tableau[i][entering].clone();
                let pivot_row_values = tableau[pivot_row].clone();
                for (value, p) in tableau[i].iter_mut().zip(&pivot_row_values) {
                    *value -= &factor * p;
                }
                let adjust = &factor * &rhs[pivot_row];
                rhs[i] -= adjust;
            }
        }
        if !reduced[entering].is_zero() {
            let factor = reduced[entering].clone();
            for (value, p) in reduced.iter_mut().zip(&tableau[pivot_row]) {
                *value -= &factor * p;
            }
            objective -= &factor * &rhs[pivot_row];
        }
        basis[pivot_row] = entering;
    }

    if objective.is_positive() {
        return Ok(LpOutcome::Infeasible {
            phase1_optimum: objective,
        });
    }
    let mut solution = vec![Rational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            solution[var] = rhs[i].clone();
        }
        // artificial variables still basic sit at value zero once the
        // phase-1 objective vanished; the original coordinates are feasible
    }
    Ok(LpOutcome::Feasible(solution))
}
