//! JSON interchange for measures and function specs.
//!
//! Measure schema:
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "grid": [["0", "1"], ["0", "1"]],
//!   "atoms": [
//!     {"point": ["1", "0"], "weight": "1/2"},
//!     {"point": ["0", "1"], "weight": "1/2"}
//!   ]
//! }
//! ```
//!
//! `grid` is optional. Rationals are strings, `p/q` or a bare integer, and
//! round-trip bit-exactly (weights and coordinates are stored in lowest
//! terms, so a measure serialized and re-read compares equal).
//!
//! Function schema: either a polynomial or a grid table,
//!
//! ```json
//! {"type": "polynomial", "terms": [{"exponents": [1, 0], "coefficient": "1"}]}
//! {"type": "table", "entries": [{"levels": [0, 0], "value": "0"}]}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::function::{FunctionSpec, PolyTerm};
use crate::measure::{DiscreteMeasure, Grid, MeasureError};
use crate::rational::{format_rational, parse_rational, ParseRationalError, Rational};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("bad rational literal: {0}")]
    Rational(#[from] ParseRationalError),
    #[error("invalid measure: {0}")]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<Vec<String>>>,
    pub atoms: Vec<AtomDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomDoc {
    pub point: Vec<String>,
    pub weight: String,
}

impl MeasureDoc {
    pub fn from_measure(measure: &DiscreteMeasure) -> Self {
        MeasureDoc {
            dimension: measure.dimension(),
            grid: measure.grid().map(|grid| {
                grid.levels()
                    .iter()
                    .map(|chain| chain.iter().map(format_rational).collect())
                    .collect()
            }),
            atoms: measure
                .atoms()
                .iter()
                .map(|(point, weight)| AtomDoc {
                    point: point.coords().iter().map(format_rational).collect(),
                    weight: format_rational(weight),
                })
                .collect(),
        }
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure, JsonError> {
        let grid = match &self.grid {
            None => None,
            Some(levels) => {
                let parsed: Result<Vec<Vec<Rational>>, ParseRationalError> = levels
                    .iter()
                    .map(|chain| chain.iter().map(|v| parse_rational(v)).collect())
                    .collect();
                Some(Grid::new(parsed?)?)
            }
        };
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let coords: Result<Vec<Rational>, ParseRationalError> =
                atom.point.iter().map(|v| parse_rational(v)).collect();
            atoms.push((coords?, parse_rational(&atom.weight)?));
        }
        Ok(DiscreteMeasure::new(self.dimension, atoms, grid)?)
    }
}

pub fn measure_to_json_string(measure: &DiscreteMeasure) -> String {
    serde_json::to_string_pretty(&MeasureDoc::from_measure(measure))
        .expect("measure docs serialize")
}

pub fn measure_to_json_value(measure: &DiscreteMeasure) -> serde_json::Value {
    serde_json::to_value(MeasureDoc::from_measure(measure)).expect("measure docs serialize")
}

pub fn measure_from_json_str(text: &str) -> Result<DiscreteMeasure, JsonError> {
    let doc: MeasureDoc = serde_json::from_str(text)?;
    doc.to_measure()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FunctionDoc {
    Polynomial { terms: Vec<PolyTermDoc> },
    Table { entries: Vec<TableEntryDoc> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyTermDoc {
    pub exponents: Vec<u32>,
    pub coefficient: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntryDoc {
    pub levels: Vec<usize>,
    pub value: String,
}

impl FunctionDoc {
    pub fn from_function(function: &FunctionSpec) -> Self {
        match function {
            FunctionSpec::Polynomial(terms) => FunctionDoc::Polynomial {
                terms: terms
                    .iter()
                    .map(|t| PolyTermDoc {
                        exponents: t.exponents.clone(),
                        coefficient: format_rational(&t.coefficient),
                    })
                    .collect(),
            },
            FunctionSpec::Table(values) => FunctionDoc::Table {
                entries: values
                    .iter()
                    .map(|(levels, value)| TableEntryDoc {
                        levels: levels.clone(),
                        value: format_rational(value),
                    })
                    .collect(),
            },
        }
    }

    pub fn to_function(&self) -> Result<FunctionSpec, JsonError> {
        match self {
            FunctionDoc::Polynomial { terms } => {
                let mut out = Vec::with_capacity(terms.len());
                for term in terms {
                    out.push(PolyTerm::new(
                        term.exponents.clone(),
                        parse_rational(&term.coefficient)?,
                    ));
                }
                Ok(FunctionSpec::Polynomial(out))
            }
            FunctionDoc::Table { entries } => {
                let mut map = BTreeMap::new();
                for entry in entries {
                    map.insert(entry.levels.clone(), parse_rational(&entry.value)?);
                }
                Ok(FunctionSpec::Table(map))
            }
        }
    }
}

pub fn function_from_json_str(text: &str) -> Result<FunctionSpec, JsonError> {
    let doc: FunctionDoc = serde_json::from_str(text)?;
    doc.to_function()
}

pub fn function_to_json_string(function: &FunctionSpec) -> String {
    serde_json::to_string_pretty(&FunctionDoc::from_function(function))
        .expect("function docs serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn measure_round_trip_is_bit_exact() {
        let measure = DiscreteMeasure::new(
            2,
            vec![
                (vec![int(1), int(0)], rat(1, 3)),
                (vec![int(0), int(1)], rat(2, 3)),
            ],
            Some(Grid::unit_cube(2)),
        )
        .unwrap();
        let text = measure_to_json_string(&measure);
        let reread = measure_from_json_str(&text).unwrap();
        assert_eq!(reread, measure);
        assert_eq!(measure_to_json_string(&reread), text);
    }

    #[test]
    fn gridless_measure_round_trips() {
        let measure = DiscreteMeasure::new(
            1,
            vec![(vec![rat(-7, 3)], rat(1, 4)), (vec![int(2)], rat(3, 4))],
            None,
        )
        .unwrap();
        let text = measure_to_json_string(&measure);
        assert!(!text.contains("grid"));
        assert_eq!(measure_from_json_str(&text).unwrap(), measure);
    }

    #[test]
    fn measure_json_rejects_bad_weights() {
        let text = r#"{"dimension":1,"atoms":[{"point":["0"],"weight":"2/3"},{"point":["1"],"weight":"1/2"}]}"#;
        assert!(matches!(
            measure_from_json_str(text),
            Err(JsonError::Measure(MeasureError::WeightsDontSumToOne { .. }))
        ));
    }

    #[test]
    fn function_round_trip() {
        let f = FunctionSpec::Polynomial(vec![PolyTerm::new(vec![1, 1], rat(-3, 7))]);
        let text = function_to_json_string(&f);
        assert_eq!(function_from_json_str(&text).unwrap(), f);

        let mut map = BTreeMap::new();
        map.insert(vec![0, 1], rat(5, 2));
        map.insert(vec![1, 1], int(3));
        let f = FunctionSpec::Table(map);
        let text = function_to_json_string(&f);
        assert_eq!(function_from_json_str(&text).unwrap(), f);
    }
}
