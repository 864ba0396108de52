//! Test functions integrated against measures.
//!
//! Two exact representations: a [`FunctionSpec::Table`] maps grid level
//! vectors to values (the natural encoding for monotone functions on a
//! product of chains), a [`FunctionSpec::Polynomial`] is a sparse sum of
//! monomials (the natural encoding for moment functions like `x_i` and
//! `x_i*x_j`). Both evaluate exactly.

use std::collections::BTreeMap;

use num::{One, Zero};
use thiserror::Error;

use crate::rational::{int, Rational};

/// A single monomial `coefficient * prod_i x_i^{exponents[i]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyTerm {
    pub exponents: Vec<u32>,
    pub coefficient: Rational,
}

/// Exact function representation evaluable on a measure's support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionSpec {
    /// Values keyed by grid level vectors. Evaluation requires the measure
    /// to carry a declared grid and the table to cover every support point.
    Table(BTreeMap<Vec<usize>, Rational>),
    /// Sparse polynomial with nonnegative integer exponents.
    Polynomial(Vec<PolyTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("table functions require a measure with a declared grid")]
    TableNeedsGrid,
    #[error("table has no value for level vector {0:?}")]
    MissingTableValue(Vec<usize>),
    #[error("exponent vector has length {found}, expected dimension {expected}")]
    ExponentLength { expected: usize, found: usize },
}

impl FunctionSpec {
    /// The coordinate map `x -> x_i` (0-based `i`).
    pub fn coordinate(i: usize, dimension: usize) -> Self {
        let mut exponents = vec![0u32; dimension];
        exponents[i] = 1;
        FunctionSpec::Polynomial(vec![PolyTerm {
            exponents,
            coefficient: int(1),
        }])
    }

    /// The product map `x -> x_i * x_j`.
    pub fn coordinate_product(i: usize, j: usize, dimension: usize) -> Self {
        let mut exponents = vec![0u32; dimension];
        exponents[i] += 1;
        exponents[j] += 1;
        FunctionSpec::Polynomial(vec![PolyTerm {
            exponents,
            coefficient: int(1),
        }])
    }

    /// The linear map `x -> sum_i coeffs[i] * x_i`.
    pub fn linear(coeffs: &[Rational]) -> Self {
        let dimension = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let mut exponents = vec![0u32; dimension];
                exponents[i] = 1;
                PolyTerm {
                    exponents,
                    coefficient: c.clone(),
                }
            })
            .collect();
        FunctionSpec::Polynomial(terms)
    }

    /// The constant map `x -> value`.
    pub fn constant(value: Rational, dimension: usize) -> Self {
        FunctionSpec::Polynomial(vec![PolyTerm {
            exponents: vec![0u32; dimension],
            coefficient: value,
        }])
    }

    /// Evaluates at a support point given its real coordinates and, when the
    /// hosting measure declares a grid, its level vector.
    pub fn eval(&self, coords: &[Rational], levels: Option<&[usize]>) -> Result<Rational, EvalError> {
        match self {
            FunctionSpec::Table(values) => {
                let levels = levels.ok_or(EvalError::TableNeedsGrid)?;
                values
                    .get(levels)
                    .cloned()
                    .ok_or_else(|| EvalError::MissingTableValue(levels.to_vec()))
            }
            FunctionSpec::Polynomial(terms) => {
                let mut total = Rational::zero();
                for term in terms {
                    if term.exponents.len() != coords.len() {
                        return Err(EvalError::ExponentLength {
                            expected: coords.len(),
                            found: term.exponents.len(),
                        });
                    }
                    let mut monomial = term.coefficient.clone();
                    for (value, &exp) in coords.iter().zip(&term.exponents) {
                        for _ in 0..exp {
                            monomial *= value;
                        }
                    }
                    total += monomial;
                }
                Ok(total)
            }
        }
    }

    /// True when the polynomial is the constant one function (empty table
    /// counts as non-constant for safety).
    pub fn is_constant_polynomial(&self) -> bool {
        match self {
            FunctionSpec::Polynomial(terms) => terms
                .iter()
                .all(|t| t.exponents.iter().all(|&e| e == 0) || t.coefficient.is_zero()),
            FunctionSpec::Table(values) => {
                let mut distinct = values.values();
                match distinct.next() {
                    None => true,
                    Some(first) => values.values().all(|v| v == first),
                }
            }
        }
    }
}

impl PolyTerm {
    pub fn new(exponents: Vec<u32>, coefficient: Rational) -> Self {
        PolyTerm {
            exponents,
            coefficient,
        }
    }
}

/// Sum of two or more coordinates, `x -> x_{i1} + ... + x_{ik}`.
pub fn coordinate_sum(dimension: usize) -> FunctionSpec {
    FunctionSpec::linear(&vec![Rational::one(); dimension])
}
