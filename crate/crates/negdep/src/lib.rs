//! Exact dependence-structure toolkit for finitely supported probability
//! measures on `R^n`.
//!
//! The crate decides negative correlation (NC), negative association (NA)
//! and positive association (PA) for measures supported on products of
//! finite chains (the Boolean cube as the main special case), with exact
//! rational arithmetic end to end: every verdict is a sign decision on a
//! rational number, never a floating-point comparison.
//!
//! What lives where:
//!
//! * [`measure`]: validated finitely supported measures, moments,
//!   marginals, mixtures, affine coordinate maps, total variation distance,
//!   weak neighborhoods, and the JSON measure format.
//! * [`lattice`]: products of chains, up-set enumeration (Dedekind-number
//!   growth, budget guarded), layer-cake decomposition of monotone tables.
//! * [`checks`]: NC / NA / PA / FKG verdicts with exact margins and
//!   minimum-slack certificates, plus the uniform NA interior margin that
//!   certifies a total-variation ball.
//! * [`constructions`]: the concrete measure families used as fixtures and
//!   counterexample seeds (basis-supported measures, skewed corner pairs,
//!   pairwise penalty measures, positive-correlation injections).
//! * [`lp`]: exact rational LP feasibility (phase-1 simplex, Bland's rule).
//! * [`search`]: counterexample synthesis: weak-neighborhood non-NA
//!   measures, mixture non-convexity witnesses, total-variation ball probes.
//! * [`oracle`]: independent brute-force validators that share no code
//!   with the optimized checkers.

pub mod checks;
pub mod constructions;
pub mod function;
pub mod json;
pub mod lattice;
pub mod lp;
pub mod measure;
pub mod oracle;
pub mod rational;
pub mod search;

pub use checks::{
    fkg_report, na_interior_margin, na_report, na_report_with, nc_report, pa_report,
    pa_report_with, BoundaryStatus, Certificate, CheckError, CheckOptions, DependenceReport,
    Property, Verdict,
};
pub use function::{FunctionSpec, PolyTerm};
pub use lattice::{MonotoneTable, Poset, UpSet};
pub use measure::{weak_neighborhood_contains, DiscreteMeasure, Grid, MeasureError, SupportPoint};
pub use rational::{format_rational, parse_rational, Rational};
