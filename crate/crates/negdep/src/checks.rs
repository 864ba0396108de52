//! Exact verdicts with certificates for negative correlation (NC), negative
//! association (NA), positive association (PA), the FKG lattice condition,
//! and the two NA strictness margins.
//!
//! NA and PA quantify over monotone function pairs; on a declared grid this
//! reduces to up-set indicator pairs (see [`crate::lattice`]). For every
//! unordered pair of disjoint index blocks `(I, J)` the engine projects the
//! measure onto the joint marginal table over `I ∪ J` once and then reads
//! every up-set pair covariance off that table as a dot product. Weights are
//! rescaled to a common denominator `T` so the inner loop runs on integers:
//! `Cov * T^2 = T * N(U ∩ V) - N(U) * N(V)`. All comparisons are exact; the
//! verdict never touches floating point.
//!
//! Two margins are exposed for NA, because they genuinely differ:
//!
//! * [`na_report`]: the a.s.-strict margin, minimized over up-set pairs whose
//!   indicators are non-constant up to measure zero. This is the strictness
//!   notion under which measures supported on the weight-one slice of the
//!   cube are strictly NA.
//! * [`na_interior_margin`]: the uniform margin over all nontrivial up-set
//!   pairs, with no almost-sure exclusion. A measure with uniform margin
//!   `e > 0` keeps NA through every perturbation of total variation at most
//!   `e / 6`, so this margin (and only this one) certifies total-variation
//!   interiority. On measures whose support misses a grid point some
//!   indicator vanishes almost surely and the uniform margin drops to 0 even
//!   though the a.s.-strict margin stays positive.

use std::collections::HashMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::lattice::{LatticeError, Mask, Poset, UpSet};
use crate::measure::{DiscreteMeasure, MeasureError};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("dimension must be at least 2 for pairwise correlation checks")]
    DimensionTooSmall,
    #[error("this check requires a declared grid (induce one from the support first)")]
    GridRequired,
    #[error("budget of {budget} up-set pair evaluations exceeded after {pairs_checked}")]
    BudgetExceeded { budget: u64, pairs_checked: u64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Nc,
    Na,
    Pa,
    Fkg,
    NaInterior,
}

impl Property {
    pub fn as_str(&self) -> &'static str {
        match self {
            Property::Nc => "nc",
            Property::Na => "na",
            Property::Pa => "pa",
            Property::Fkg => "fkg",
            Property::NaInterior => "na_interior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryStatus {
    Strict,
    Boundary,
    Violated,
}

impl BoundaryStatus {
    fn from_margin(margin: &Rational) -> Self {
        if margin.is_positive() {
            BoundaryStatus::Strict
        } else if margin.is_zero() {
            BoundaryStatus::Boundary
        } else {
            BoundaryStatus::Violated
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryStatus::Strict => "strict",
            BoundaryStatus::Boundary => "boundary",
            BoundaryStatus::Violated => "violated",
        }
    }
}

/// Minimum-slack witness. Coordinates are 0-based here; the JSON rendering
/// is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// NC witness: the coordinate pair attaining the minimum gap
    /// `E x_i * E x_j - E x_i x_j`.
    CoordinatePair { i: usize, j: usize, gap: Rational },
    /// NA / PA witness: coordinate blocks (both equal to the full grid for
    /// PA), up-sets as level vectors over each block, exact covariance.
    UpsetPair {
        coords_i: Vec<usize>,
        coords_j: Vec<usize>,
        upset_i: Vec<Vec<usize>>,
        upset_j: Vec<Vec<usize>>,
        covariance: Rational,
    },
    /// FKG witness: the lattice point pair attaining the minimum of
    /// `mu(x v y) mu(x ^ y) - mu(x) mu(y)`.
    LatticePair {
        x: Vec<Rational>,
        y: Vec<Rational>,
        lhs: Rational,
        rhs: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceReport {
    pub property: Property,
    pub verdict: Verdict,
    pub margin: Rational,
    pub certificate: Option<Certificate>,
    pub boundary_status: BoundaryStatus,
    pub degenerate_pairs_present: bool,
    pub pairs_checked: u64,
}

impl DependenceReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// Report JSON: verdict as a boolean, margin as a rational string,
    /// 1-based coordinate indices.
    pub fn to_json(&self) -> serde_json::Value {
        let certificate = match &self.certificate {
            None => serde_json::Value::Null,
            Some(Certificate::CoordinatePair { i, j, gap }) => json!({
                "type": "coordinate_pair",
                "i": i + 1,
                "j": j + 1,
                "gap": format_rational(gap),
            }),
            Some(Certificate::UpsetPair {
                coords_i,
                coords_j,
                upset_i,
                upset_j,
                covariance,
            }) => json!({
                "type": "upset_pair",
                "I": coords_i.iter().map(|c| c + 1).collect::<Vec<_>>(),
                "J": coords_j.iter().map(|c| c + 1).collect::<Vec<_>>(),
                "U": upset_i,
                "V": upset_j,
                "covariance": format_rational(covariance),
            }),
            Some(Certificate::LatticePair { x, y, lhs, rhs }) => json!({
                "type": "lattice_pair",
                "x": x.iter().map(format_rational).collect::<Vec<_>>(),
                "y": y.iter().map(format_rational).collect::<Vec<_>>(),
                "lhs": format_rational(lhs),
                "rhs": format_rational(rhs),
            }),
        };
        json!({
            "property": self.property.as_str(),
            "verdict": self.verdict == Verdict::Holds,
            "margin": format_rational(&self.margin),
            "certificate": certificate,
            "boundary_status": self.boundary_status.as_str(),
            "degenerate_pairs_present": self.degenerate_pairs_present,
            "pairs_checked": self.pairs_checked,
        })
    }
}

/// Knobs for NA / PA checks.
#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Maximum number of up-set pair evaluations.
    pub budget: u64,
    /// Stop at the first violation instead of computing the full margin.
    /// The reported witness is then the first violation in deterministic
    /// iteration order and the margin is that pair's slack, an upper bound
    /// on the true minimum.
    pub early_exit: bool,
    /// Evaluate blocks in parallel (full-margin mode only; early exit runs
    /// sequentially so "first violation" stays well defined).
    pub parallel: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            budget: 10_000_000,
            early_exit: false,
            parallel: true,
        }
    }
}

impl CheckOptions {
    pub fn with_budget(budget: u64) -> Self {
        CheckOptions {
            budget,
            ..CheckOptions::default()
        }
    }
}

// ---------------------------------------------------------------------------
// scaled integer view of a grid measure
// ---------------------------------------------------------------------------

/// Measure re-expressed over the common denominator of its weights:
/// positive atoms only, levels restricted to coordinates with at least two
/// grid levels ("active" coordinates).
struct ScaledGridMeasure {
    active_coords: Vec<usize>,
    chain_lengths: Vec<usize>,
    atom_levels: Vec<Vec<usize>>,
    atom_weights: Vec<BigInt>,
    denominator: BigInt,
}

impl ScaledGridMeasure {
    fn build(measure: &DiscreteMeasure) -> Result<Self, CheckError> {
        let grid = measure.grid().ok_or(CheckError::GridRequired)?;
        let lengths = grid.chain_lengths();
        let active_coords: Vec<usize> = (0..measure.dimension())
            .filter(|&c| lengths[c] >= 2)
            .collect();
        let chain_lengths: Vec<usize> = active_coords.iter().map(|&c| lengths[c]).collect();

        let mut denominator = BigInt::one();
        for (_, weight) in measure.atoms() {
            if !weight.is_zero() {
                denominator = denominator.lcm(weight.denom());
            }
        }
        let mut atom_levels = Vec::new();
        let mut atom_weights = Vec::new();
        for (point, weight) in measure.atoms() {
            if weight.is_zero() {
                continue;
            }
            let levels = point.levels().expect("grid measures carry levels");
            atom_levels.push(active_coords.iter().map(|&c| levels[c]).collect());
            atom_weights.push(weight.numer() * (&denominator / weight.denom()));
        }
        Ok(ScaledGridMeasure {
            active_coords,
            chain_lengths,
            atom_levels,
            atom_weights,
            denominator,
        })
    }

    fn fits_i128(&self) -> bool {
        // products of two values bounded by T must fit in i128
        self.denominator < BigInt::one() << 62
    }
}

// ---------------------------------------------------------------------------
// integer scalar abstraction: i128 fast path, BigInt fallback
// ---------------------------------------------------------------------------

trait EngineInt: Clone + Ord + Send + Sync {
    fn zero() -> Self;
    fn from_bigint(value: &BigInt) -> Self;
    fn to_bigint(&self) -> BigInt;
    fn add_assign_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn is_zero_value(&self) -> bool;
}

impl EngineInt for i128 {
    fn zero() -> Self {
        0
    }
    fn from_bigint(value: &BigInt) -> Self {
        i128::try_from(value.clone()).expect("value fits the i128 fast path")
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn is_zero_value(&self) -> bool {
        *self == 0
    }
}

impl EngineInt for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn from_bigint(value: &BigInt) -> Self {
        value.clone()
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

// ---------------------------------------------------------------------------
// NC
// ---------------------------------------------------------------------------

/// Negative correlation: for every coordinate pair the gap
/// `E x_i * E x_j - E x_i x_j` must be nonnegative. The margin is the
/// minimum gap and the certificate the attaining pair.
pub fn nc_report(measure: &DiscreteMeasure) -> Result<DependenceReport, CheckError> {
    let n = measure.dimension();
    if n < 2 {
        return Err(CheckError::DimensionTooSmall);
    }
    let mut means = Vec::with_capacity(n);
    for i in 0..n {
        let mut exps = vec![0u32; n];
        exps[i] = 1;
        means.push(measure.moment(&exps)?);
    }
    let mut constant_coordinate = vec![true; n];
    let mut first_seen: Vec<Option<&Rational>> = vec![None; n];
    for (point, weight) in measure.atoms() {
        if weight.is_zero() {
            continue;
        }
        for (c, value) in point.coords().iter().enumerate() {
            match first_seen[c] {
                None => first_seen[c] = Some(value),
                Some(seen) => {
                    if seen != value {
                        constant_coordinate[c] = false;
                    }
                }
            }
        }
    }

    let mut best: Option<(Rational, usize, usize)> = None;
    let mut pairs_checked = 0u64;
    let mut degenerate = false;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut exps = vec![0u32; n];
            exps[i] += 1;
            exps[j] += 1;
            let cross = measure.moment(&exps)?;
            let gap = &means[i] * &means[j] - cross;
            pairs_checked += 1;
            if constant_coordinate[i] || constant_coordinate[j] {
                degenerate = true;
            }
            if best.as_ref().is_none_or(|(g, _, _)| &gap < g) {
                best = Some((gap, i, j));
            }
        }
    }
    let (margin, i, j) = best.expect("n >= 2 yields at least one pair");
    let boundary_status = BoundaryStatus::from_margin(&margin);
    Ok(DependenceReport {
        property: Property::Nc,
        verdict: if margin.is_negative() {
            Verdict::Fails
        } else {
            Verdict::Holds
        },
        certificate: Some(Certificate::CoordinatePair {
            i,
            j,
            gap: margin.clone(),
        }),
        margin,
        boundary_status,
        degenerate_pairs_present: degenerate,
        pairs_checked,
    })
}

// ---------------------------------------------------------------------------
// NA
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NaMarginKind {
    /// Exclude pairs with an almost-surely constant indicator.
    AlmostSureStrict,
    /// Keep every nontrivial pair (total-variation interior margin).
    AllNontrivial,
}

/// Negative association over a declared grid: every up-set pair covariance
/// across disjoint coordinate blocks must be nonpositive. Full-margin mode;
/// see [`na_report_with`] for early exit.
pub fn na_report(measure: &DiscreteMeasure, budget: u64) -> Result<DependenceReport, CheckError> {
    na_report_with(measure, &CheckOptions::with_budget(budget))
}

pub fn na_report_with(
    measure: &DiscreteMeasure,
    options: &CheckOptions,
) -> Result<DependenceReport, CheckError> {
    let scaled = ScaledGridMeasure::build(measure)?;
    let outcome = if scaled.fits_i128() {
        na_engine::<i128>(&scaled, NaMarginKind::AlmostSureStrict, options)?
    } else {
        na_engine::<BigInt>(&scaled, NaMarginKind::AlmostSureStrict, options)?
    };
    Ok(outcome.into_report(Property::Na))
}

/// Uniform NA margin over all nontrivial up-set pairs. A positive value `e`
/// certifies a total-variation interior ball of radius `e / 6` around the
/// measure inside the NA class.
pub fn na_interior_margin(
    measure: &DiscreteMeasure,
    budget: u64,
) -> Result<DependenceReport, CheckError> {
    let options = CheckOptions::with_budget(budget);
    let scaled = ScaledGridMeasure::build(measure)?;
    let outcome = if scaled.fits_i128() {
        na_engine::<i128>(&scaled, NaMarginKind::AllNontrivial, &options)?
    } else {
        na_engine::<BigInt>(&scaled, NaMarginKind::AllNontrivial, &options)?
    };
    Ok(outcome.into_report(Property::NaInterior))
}

/// Minimum-margin pair and bookkeeping common to the NA and PA engines.
struct EngineOutcome {
    /// Signed slack times `T^2`: `-Cov` for NA, `Cov` for PA; the margin is
    /// `slack / T^2`.
    best: Option<(BigInt, Certificate)>,
    denominator_squared: BigInt,
    pairs_checked: u64,
    degenerate_pairs_present: bool,
}

impl EngineOutcome {
    fn into_report(self, property: Property) -> DependenceReport {
        let margin = match &self.best {
            None => Rational::zero(),
            Some((slack, _)) => {
                Rational::new(slack.clone(), self.denominator_squared.clone())
            }
        };
        let certificate = self.best.map(|(_, certificate)| certificate);
        let boundary_status = BoundaryStatus::from_margin(&margin);
        DependenceReport {
            property,
            verdict: if margin.is_negative() {
                Verdict::Fails
            } else {
                Verdict::Holds
            },
            margin,
            certificate,
            boundary_status,
            degenerate_pairs_present: self.degenerate_pairs_present,
            pairs_checked: self.pairs_checked,
        }
    }
}

/// Cache of enumerated up-sets per chain-length vector, with the trivial
/// up-sets filtered out once.
struct UpsetFamily {
    poset: Poset,
    nontrivial: Vec<Mask>,
}

fn upset_family(
    cache: &mut HashMap<Vec<usize>, Arc<UpsetFamily>>,
    chain_lengths: Vec<usize>,
    budget: u64,
    pairs_checked: u64,
) -> Result<Arc<UpsetFamily>, CheckError> {
    if let Some(found) = cache.get(&chain_lengths) {
        return Ok(found.clone());
    }
    let poset = Poset::product_of_chains(&chain_lengths)?;
    let enumeration_cap = usize::try_from(budget)
        .unwrap_or(usize::MAX)
        .saturating_add(2);
    let upsets = poset
        .enumerate_upsets(enumeration_cap)
        .map_err(|err| match err {
            LatticeError::BudgetExceeded { .. } => CheckError::BudgetExceeded {
                budget,
                pairs_checked,
            },
            other => CheckError::Lattice(other),
        })?;
    let full = poset.full_mask();
    let nontrivial = upsets
        .iter()
        .map(|u| u.mask())
        .filter(|&m| m != 0 && m != full)
        .collect();
    let family = Arc::new(UpsetFamily { poset, nontrivial });
    cache.insert(chain_lengths, family.clone());
    Ok(family)
}

/// One (I, J) block of the NA iteration. Positions index the active
/// coordinate list.
struct NaBlock {
    i_positions: Vec<usize>,
    j_positions: Vec<usize>,
    upsets_i: Arc<UpsetFamily>,
    upsets_j: Arc<UpsetFamily>,
}

/// Lexicographic combinations of `{0..k}` of the given size.
fn combinations(k: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn recurse(start: usize, k: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        let remaining = size - current.len();
        for next in start..=k.saturating_sub(remaining) {
            current.push(next);
            recurse(next + 1, k, size, current, out);
            current.pop();
        }
    }
    if size <= k {
        recurse(0, k, size, &mut current, &mut out);
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut result: u128 = 1;
    for i in 0..k.min(n - k) {
        result = result.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    result
}

/// Number of unordered disjoint nonempty pairs (I, J) with `|I| + |J| = s`.
/// Each block evaluates at least one up-set pair, so this lower-bounds the
/// cost of a size class.
fn unordered_block_count(k: usize, s: usize) -> u128 {
    let mut total: u128 = 0;
    for a in 1..s {
        let b = s - a;
        total = total.saturating_add(binomial(k, a).saturating_mul(binomial(k - a, b)));
    }
    total / 2
}

struct BlockEval<S> {
    /// (slack, pair index within block, U mask, V mask)
    best: Option<(S, u64, Mask, Mask)>,
    first_violation: Option<(S, u64, Mask, Mask)>,
    pairs_checked: u64,
    degenerate: bool,
}

fn na_engine<S: EngineInt>(
    scaled: &ScaledGridMeasure,
    margin_kind: NaMarginKind,
    options: &CheckOptions,
) -> Result<EngineOutcome, CheckError> {
    let denominator_squared = &scaled.denominator * &scaled.denominator;
    let weights: Vec<S> = scaled
        .atom_weights
        .iter()
        .map(|w| S::from_bigint(w))
        .collect();
    let total = S::from_bigint(&scaled.denominator);
    let k = scaled.active_coords.len();

    let mut cache: HashMap<Vec<usize>, Arc<UpsetFamily>> = HashMap::new();
    let mut planned: u64 = 0;
    let mut pairs_checked: u64 = 0;
    let mut degenerate = false;
    let mut best: Option<(BigInt, Certificate)> = None;
    let mut violation_found = false;

    for s in 2..=k {
        // Cheap lower bound before materializing the size class: every block
        // evaluates at least one pair.
        let lower_bound = unordered_block_count(k, s);
        if u128::from(planned) + lower_bound > u128::from(options.budget) {
            return Err(CheckError::BudgetExceeded {
                budget: options.budget,
                pairs_checked: planned,
            });
        }

        // Canonical unordered pairs with |I| + |J| = s, ordered by the
        // sorted coordinate vectors of I then J.
        let mut raw: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for a in 1..s {
            let b = s - a;
            if b > k.saturating_sub(a) {
                continue;
            }
            for i_positions in combinations(k, a) {
                let complement: Vec<usize> =
                    (0..k).filter(|p| !i_positions.contains(p)).collect();
                for j_picks in combinations(complement.len(), b) {
                    let j_positions: Vec<usize> =
                        j_picks.iter().map(|&idx| complement[idx]).collect();
                    if i_positions < j_positions {
                        raw.push((i_positions.clone(), j_positions));
                    }
                }
            }
        }
        raw.sort();

        let mut batch: Vec<NaBlock> = Vec::with_capacity(raw.len());
        for (i_positions, j_positions) in raw {
            let chain_i: Vec<usize> =
                i_positions.iter().map(|&p| scaled.chain_lengths[p]).collect();
            let chain_j: Vec<usize> =
                j_positions.iter().map(|&p| scaled.chain_lengths[p]).collect();
            let upsets_i = upset_family(&mut cache, chain_i, options.budget, planned)?;
            let upsets_j = upset_family(&mut cache, chain_j, options.budget, planned)?;
            let needed =
                (upsets_i.nontrivial.len() as u128) * (upsets_j.nontrivial.len() as u128);
            if u128::from(planned) + needed > u128::from(options.budget) {
                return Err(CheckError::BudgetExceeded {
                    budget: options.budget,
                    pairs_checked: planned,
                });
            }
            planned += needed as u64;
            batch.push(NaBlock {
                i_positions,
                j_positions,
                upsets_i,
                upsets_j,
            });
        }

        let evaluate = |block: &NaBlock| -> BlockEval<S> {
            evaluate_na_block(scaled, block, &weights, &total, margin_kind, options.early_exit)
        };

        let evals: Vec<BlockEval<S>> = if options.early_exit {
            let mut out = Vec::new();
            for block in &batch {
                let eval = evaluate(block);
                let stop = eval.first_violation.is_some();
                out.push(eval);
                if stop {
                    violation_found = true;
                    break;
                }
            }
            out
        } else if options.parallel {
            batch.par_iter().map(evaluate).collect()
        } else {
            batch.iter().map(evaluate).collect()
        };

        for (block, eval) in batch.iter().zip(&evals) {
            pairs_checked += eval.pairs_checked;
            degenerate |= eval.degenerate;
            let candidate = if options.early_exit {
                eval.first_violation.as_ref().or(eval.best.as_ref())
            } else {
                eval.best.as_ref()
            };
            if let Some((slack, _, u_mask, v_mask)) = candidate {
                let slack_int = slack.to_bigint();
                let replace = match &best {
                    None => true,
                    Some((incumbent, _)) => &slack_int < incumbent,
                };
                if replace {
                    let certificate = Certificate::UpsetPair {
                        coords_i: block
                            .i_positions
                            .iter()
                            .map(|&p| scaled.active_coords[p])
                            .collect(),
                        coords_j: block
                            .j_positions
                            .iter()
                            .map(|&p| scaled.active_coords[p])
                            .collect(),
                        upset_i: UpSet::new(&block.upsets_i.poset, *u_mask)
                            .expect("engine masks are up-sets")
                            .level_vectors(&block.upsets_i.poset),
                        upset_j: UpSet::new(&block.upsets_j.poset, *v_mask)
                            .expect("engine masks are up-sets")
                            .level_vectors(&block.upsets_j.poset),
                        covariance: Rational::new(
                            -slack_int.clone(),
                            denominator_squared.clone(),
                        ),
                    };
                    best = Some((slack_int, certificate));
                }
            }
        }
        if violation_found {
            break;
        }
    }
    Ok(EngineOutcome {
        best,
        denominator_squared,
        pairs_checked,
        degenerate_pairs_present: degenerate,
    })
}

fn evaluate_na_block<S: EngineInt>(
    scaled: &ScaledGridMeasure,
    block: &NaBlock,
    weights: &[S],
    total: &S,
    margin_kind: NaMarginKind,
    early_exit: bool,
) -> BlockEval<S> {
    let poset_i = &block.upsets_i.poset;
    let poset_j = &block.upsets_j.poset;
    let g_i = poset_i.element_count();
    let g_j = poset_j.element_count();

    // joint marginal table over I ∪ J, indexed [a * g_j + b]
    let mut joint = vec![S::zero(); g_i * g_j];
    for (levels, weight) in scaled.atom_levels.iter().zip(weights) {
        let li: Vec<usize> = block.i_positions.iter().map(|&p| levels[p]).collect();
        let lj: Vec<usize> = block.j_positions.iter().map(|&p| levels[p]).collect();
        let a = poset_i.index_of(&li).expect("atom levels lie on the grid");
        let b = poset_j.index_of(&lj).expect("atom levels lie on the grid");
        joint[a * g_j + b].add_assign_ref(weight);
    }
    let mut rows = vec![S::zero(); g_i];
    let mut cols = vec![S::zero(); g_j];
    for a in 0..g_i {
        for b in 0..g_j {
            rows[a].add_assign_ref(&joint[a * g_j + b]);
            cols[b].add_assign_ref(&joint[a * g_j + b]);
        }
    }

    let sum_masked = |mask: Mask, values: &[S]| -> S {
        let mut acc = S::zero();
        let mut rest = mask;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            acc.add_assign_ref(&values[e]);
            rest &= rest - 1;
        }
        acc
    };

    let n_u: Vec<S> = block
        .upsets_i
        .nontrivial
        .iter()
        .map(|&m| sum_masked(m, &rows))
        .collect();
    let n_v: Vec<S> = block
        .upsets_j
        .nontrivial
        .iter()
        .map(|&m| sum_masked(m, &cols))
        .collect();

    let degenerate = n_u.iter().any(|n| n.is_zero_value() || n == total)
        || n_v.iter().any(|n| n.is_zero_value() || n == total);

    let zero = S::zero();
    let mut eval = BlockEval {
        best: None,
        first_violation: None,
        pairs_checked: 0,
        degenerate,
    };

    let mut s_v = vec![S::zero(); g_i];
    for (vi, &v_mask) in block.upsets_j.nontrivial.iter().enumerate() {
        for value in s_v.iter_mut() {
            *value = S::zero();
        }
        for a in 0..g_i {
            let mut rest = v_mask;
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                s_v[a].add_assign_ref(&joint[a * g_j + b]);
                rest &= rest - 1;
            }
        }
        let v_constant = n_v[vi].is_zero_value() || &n_v[vi] == total;
        for (ui, &u_mask) in block.upsets_i.nontrivial.iter().enumerate() {
            let pair_idx = (vi as u64) * (block.upsets_i.nontrivial.len() as u64) + ui as u64;
            eval.pairs_checked += 1;
            let inter = sum_masked(u_mask, &s_v);
            // slack = -Cov * T^2 = N(U) N(V) - T * N(U ∩ V)
            let slack = n_u[ui].mul_ref(&n_v[vi]).sub_ref(&total.mul_ref(&inter));
            if slack < zero && eval.first_violation.is_none() {
                eval.first_violation = Some((slack.clone(), pair_idx, u_mask, v_mask));
                if early_exit {
                    return eval;
                }
            }
            let eligible = match margin_kind {
                NaMarginKind::AllNontrivial => true,
                NaMarginKind::AlmostSureStrict => {
                    !v_constant && !(n_u[ui].is_zero_value() || &n_u[ui] == total)
                }
            };
            if eligible {
                let replace = match &eval.best {
                    None => true,
                    Some((incumbent, _, _, _)) => &slack < incumbent,
                };
                if replace {
                    eval.best = Some((slack, pair_idx, u_mask, v_mask));
                }
            }
        }
    }
    eval
}

// ---------------------------------------------------------------------------
// PA
// ---------------------------------------------------------------------------

/// Positive association over a declared grid: every pair of up-set events
/// over the full grid (overlap allowed, including a pair with itself) must
/// satisfy `mu(U ∩ V) >= mu(U) mu(V)`.
pub fn pa_report(measure: &DiscreteMeasure, budget: u64) -> Result<DependenceReport, CheckError> {
    pa_report_with(measure, &CheckOptions::with_budget(budget))
}

pub fn pa_report_with(
    measure: &DiscreteMeasure,
    options: &CheckOptions,
) -> Result<DependenceReport, CheckError> {
    let scaled = ScaledGridMeasure::build(measure)?;
    let outcome = if scaled.fits_i128() {
        pa_engine::<i128>(&scaled, options)?
    } else {
        pa_engine::<BigInt>(&scaled, options)?
    };
    Ok(outcome.into_report(Property::Pa))
}

fn pa_engine<S: EngineInt>(
    scaled: &ScaledGridMeasure,
    options: &CheckOptions,
) -> Result<EngineOutcome, CheckError> {
    let denominator_squared = &scaled.denominator * &scaled.denominator;
    let poset = Poset::product_of_chains(&scaled.chain_lengths)?;
    let enumeration_cap = usize::try_from(options.budget)
        .unwrap_or(usize::MAX)
        .saturating_add(2);
    let upsets = poset.enumerate_upsets(enumeration_cap).map_err(|err| match err {
        LatticeError::BudgetExceeded { .. } => CheckError::BudgetExceeded {
            budget: options.budget,
            pairs_checked: 0,
        },
        other => CheckError::Lattice(other),
    })?;
    let full = poset.full_mask();
    let nontrivial: Vec<Mask> = upsets
        .iter()
        .map(|u| u.mask())
        .filter(|&m| m != 0 && m != full)
        .collect();
    let nt = nontrivial.len() as u128;
    if nt * (nt + 1) / 2 > u128::from(options.budget) {
        return Err(CheckError::BudgetExceeded {
            budget: options.budget,
            pairs_checked: 0,
        });
    }

    let g = poset.element_count();
    let mut point_weight = vec![S::zero(); g];
    for (levels, weight) in scaled.atom_levels.iter().zip(&scaled.atom_weights) {
        let e = poset.index_of(levels).expect("atom levels lie on the grid");
        point_weight[e].add_assign_ref(&S::from_bigint(weight));
    }
    let total = S::from_bigint(&scaled.denominator);

    let sum_masked = |mask: Mask| -> S {
        let mut acc = S::zero();
        let mut rest = mask;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            acc.add_assign_ref(&point_weight[e]);
            rest &= rest - 1;
        }
        acc
    };
    let n_u: Vec<S> = nontrivial.iter().map(|&m| sum_masked(m)).collect();
    let degenerate = n_u.iter().any(|n| n.is_zero_value() || n == &total);

    // slack = Cov * T^2 = T * N(U ∩ V) - N(U) N(V); PA needs slack >= 0.
    let zero = S::zero();
    let evaluate_row = |vi: usize| -> BlockEval<S> {
        let mut eval = BlockEval {
            best: None,
            first_violation: None,
            pairs_checked: 0,
            degenerate: false,
        };
        let v_mask = nontrivial[vi];
        let v_constant = n_u[vi].is_zero_value() || n_u[vi] == total;
        for (ui, &u_mask) in nontrivial.iter().enumerate().take(vi + 1) {
            eval.pairs_checked += 1;
            let inter = sum_masked(u_mask & v_mask);
            let slack = total.mul_ref(&inter).sub_ref(&n_u[ui].mul_ref(&n_u[vi]));
            if slack < zero && eval.first_violation.is_none() {
                eval.first_violation = Some((slack.clone(), ui as u64, u_mask, v_mask));
            }
            let eligible = !v_constant && !(n_u[ui].is_zero_value() || n_u[ui] == total);
            if eligible {
                let replace = match &eval.best {
                    None => true,
                    Some((incumbent, _, _, _)) => &slack < incumbent,
                };
                if replace {
                    eval.best = Some((slack, ui as u64, u_mask, v_mask));
                }
            }
        }
        eval
    };

    let row_evals: Vec<(usize, BlockEval<S>)> = if options.early_exit {
        let mut out = Vec::new();
        for vi in 0..nontrivial.len() {
            let eval = evaluate_row(vi);
            let stop = eval.first_violation.is_some();
            out.push((vi, eval));
            if stop {
                break;
            }
        }
        out
    } else if options.parallel {
        (0..nontrivial.len())
            .into_par_iter()
            .map(|vi| (vi, evaluate_row(vi)))
            .collect()
    } else {
        (0..nontrivial.len())
            .map(|vi| (vi, evaluate_row(vi)))
            .collect()
    };

    let mut best: Option<(BigInt, Certificate)> = None;
    let mut pairs_checked = 0u64;
    let mut ordered = row_evals;
    ordered.sort_by_key(|(vi, _)| *vi);
    for (_, eval) in ordered {
        pairs_checked += eval.pairs_checked;
        let candidate = if options.early_exit {
            eval.first_violation.or(eval.best)
        } else {
            eval.best
        };
        if let Some((slack, _, u_mask, v_mask)) = candidate {
            let slack_int = slack.to_bigint();
            let replace = match &best {
                None => true,
                Some((incumbent, _)) => &slack_int < incumbent,
            };
            if replace {
                let certificate = Certificate::UpsetPair {
                    coords_i: scaled.active_coords.clone(),
                    coords_j: scaled.active_coords.clone(),
                    upset_i: UpSet::new(&poset, u_mask)
                        .expect("engine masks are up-sets")
                        .level_vectors(&poset),
                    upset_j: UpSet::new(&poset, v_mask)
                        .expect("engine masks are up-sets")
                        .level_vectors(&poset),
                    covariance: Rational::new(slack_int.clone(), denominator_squared.clone()),
                };
                best = Some((slack_int, certificate));
            }
        }
    }
    Ok(EngineOutcome {
        best,
        denominator_squared,
        pairs_checked,
        degenerate_pairs_present: degenerate,
    })
}

// ---------------------------------------------------------------------------
// FKG
// ---------------------------------------------------------------------------

/// FKG lattice condition on the declared grid:
/// `mu(x v y) mu(x ^ y) >= mu(x) mu(y)` for every incomparable pair of grid
/// points. Comparable pairs hold with equality and are skipped. Grid points
/// of weight zero participate: the condition constrains them.
pub fn fkg_report(measure: &DiscreteMeasure) -> Result<DependenceReport, CheckError> {
    let scaled = ScaledGridMeasure::build(measure)?;
    let lengths = &scaled.chain_lengths;
    let points = crate::lattice::enumerate_level_vectors(lengths);
    let g = points.len();
    let mut strides = vec![1usize; lengths.len()];
    for i in (0..lengths.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * lengths[i + 1];
    }
    let index_of =
        |levels: &[usize]| -> usize { levels.iter().zip(&strides).map(|(&l, &s)| l * s).sum() };

    let mut weight = vec![<BigInt as Zero>::zero(); g];
    for (levels, w) in scaled.atom_levels.iter().zip(&scaled.atom_weights) {
        weight[index_of(levels)] += w;
    }

    let grid = measure.grid().expect("checked by ScaledGridMeasure");
    let embed_full = |levels_active: &[usize]| -> Vec<Rational> {
        let mut full = Vec::with_capacity(measure.dimension());
        let mut it = levels_active.iter();
        for c in 0..measure.dimension() {
            if scaled.active_coords.contains(&c) {
                let l = *it.next().expect("active levels align");
                full.push(grid.levels()[c][l].clone());
            } else {
                full.push(grid.levels()[c][0].clone());
            }
        }
        full
    };

    let denominator_squared = &scaled.denominator * &scaled.denominator;
    let mut best: Option<(BigInt, usize, usize)> = None;
    let mut pairs_checked = 0u64;
    for x in 0..g {
        for y in (x + 1)..g {
            let px = &points[x];
            let py = &points[y];
            let comparable = px.iter().zip(py).all(|(a, b)| a <= b)
                || px.iter().zip(py).all(|(a, b)| a >= b);
            if comparable {
                continue;
            }
            pairs_checked += 1;
            let meet: Vec<usize> = px.iter().zip(py).map(|(&a, &b)| a.min(b)).collect();
            let join: Vec<usize> = px.iter().zip(py).map(|(&a, &b)| a.max(b)).collect();
            let lhs = &weight[index_of(&join)] * &weight[index_of(&meet)];
            let rhs = &weight[x] * &weight[y];
            let gap = lhs - rhs;
            let replace = match &best {
                None => true,
                Some((incumbent, _, _)) => &gap < incumbent,
            };
            if replace {
                best = Some((gap, x, y));
            }
        }
    }

    let (margin, certificate) = match best {
        None => (Rational::zero(), None),
        Some((gap, x, y)) => {
            let px = &points[x];
            let py = &points[y];
            let meet: Vec<usize> = px.iter().zip(py).map(|(&a, &b)| a.min(b)).collect();
            let join: Vec<usize> = px.iter().zip(py).map(|(&a, &b)| a.max(b)).collect();
            let lhs = Rational::new(
                &weight[index_of(&join)] * &weight[index_of(&meet)],
                denominator_squared.clone(),
            );
            let rhs = Rational::new(&weight[x] * &weight[y], denominator_squared.clone());
            (
                Rational::new(gap, denominator_squared.clone()),
                Some(Certificate::LatticePair {
                    x: embed_full(px),
                    y: embed_full(py),
                    lhs,
                    rhs,
                }),
            )
        }
    };
    let boundary_status = BoundaryStatus::from_margin(&margin);
    Ok(DependenceReport {
        property: Property::Fkg,
        verdict: if margin.is_negative() {
            Verdict::Fails
        } else {
            Verdict::Holds
        },
        margin,
        certificate,
        boundary_status,
        degenerate_pairs_present: false,
        pairs_checked,
    })
}

// ---------------------------------------------------------------------------
// gap tables
// ---------------------------------------------------------------------------

/// Which gap table to dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapTable {
    Nc,
    Na,
    Pa,
    Fkg,
}

/// Writes the full covariance-gap table as CSV, one row per evaluated pair,
/// for external plotting. Returns the number of data rows. NA and PA tables
/// honor the budget; iteration order matches the checkers.
pub fn write_gap_table<W: std::io::Write>(
    measure: &DiscreteMeasure,
    table: GapTable,
    budget: u64,
    out: &mut W,
) -> Result<u64, CheckError> {
    let io_err = |e: std::io::Error| {
        CheckError::Measure(MeasureError::BadGrid(format!("gap table write failed: {e}")))
    };
    let mut rows = 0u64;
    match table {
        GapTable::Nc => {
            let n = measure.dimension();
            if n < 2 {
                return Err(CheckError::DimensionTooSmall);
            }
            writeln!(out, "i,j,gap").map_err(io_err)?;
            for i in 0..n {
                for j in (i + 1)..n {
                    let gap = -measure.coordinate_covariance(i, j)?;
                    writeln!(out, "{},{},{}", i + 1, j + 1, format_rational(&gap))
                        .map_err(io_err)?;
                    rows += 1;
                }
            }
        }
        GapTable::Na => {
            let scaled = ScaledGridMeasure::build(measure)?;
            let denominator_squared = &scaled.denominator * &scaled.denominator;
            let k = scaled.active_coords.len();
            let mut cache: HashMap<Vec<usize>, Arc<UpsetFamily>> = HashMap::new();
            writeln!(out, "I,J,U,V,covariance").map_err(io_err)?;
            for s in 2..=k {
                let mut raw: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
                for a in 1..s {
                    let b = s - a;
                    if b > k.saturating_sub(a) {
                        continue;
                    }
                    for i_positions in combinations(k, a) {
                        let complement: Vec<usize> =
                            (0..k).filter(|p| !i_positions.contains(p)).collect();
                        for j_picks in combinations(complement.len(), b) {
                            let j_positions: Vec<usize> =
                                j_picks.iter().map(|&idx| complement[idx]).collect();
                            if i_positions < j_positions {
                                raw.push((i_positions.clone(), j_positions));
                            }
                        }
                    }
                }
                raw.sort();
                for (i_positions, j_positions) in raw {
                    let chain_i: Vec<usize> =
                        i_positions.iter().map(|&p| scaled.chain_lengths[p]).collect();
                    let chain_j: Vec<usize> =
                        j_positions.iter().map(|&p| scaled.chain_lengths[p]).collect();
                    let upsets_i = upset_family(&mut cache, chain_i, budget, rows)?;
                    let upsets_j = upset_family(&mut cache, chain_j, budget, rows)?;
                    let needed = (upsets_i.nontrivial.len() as u128)
                        * (upsets_j.nontrivial.len() as u128);
                    if u128::from(rows) + needed > u128::from(budget) {
                        return Err(CheckError::BudgetExceeded {
                            budget,
                            pairs_checked: rows,
                        });
                    }
                    let block = NaBlock {
                        i_positions,
                        j_positions,
                        upsets_i,
                        upsets_j,
                    };
                    let weights: Vec<BigInt> = scaled.atom_weights.clone();
                    let eval_rows = na_block_rows(&scaled, &block, &weights);
                    for (u_mask, v_mask, cov_scaled) in eval_rows {
                        let cov =
                            Rational::new(cov_scaled, denominator_squared.clone());
                        writeln!(
                            out,
                            "{:?},{:?},\"{:?}\",\"{:?}\",{}",
                            block
                                .i_positions
                                .iter()
                                .map(|&p| scaled.active_coords[p] + 1)
                                .collect::<Vec<_>>(),
                            block
                                .j_positions
                                .iter()
                                .map(|&p| scaled.active_coords[p] + 1)
                                .collect::<Vec<_>>(),
                            UpSet::new(&block.upsets_i.poset, u_mask)
                                .expect("masks are up-sets")
                                .level_vectors(&block.upsets_i.poset),
                            UpSet::new(&block.upsets_j.poset, v_mask)
                                .expect("masks are up-sets")
                                .level_vectors(&block.upsets_j.poset),
                            format_rational(&cov)
                        )
                        .map_err(io_err)?;
                        rows += 1;
                    }
                }
            }
        }
        GapTable::Pa => {
            let scaled = ScaledGridMeasure::build(measure)?;
            let denominator_squared = &scaled.denominator * &scaled.denominator;
            let poset = Poset::product_of_chains(&scaled.chain_lengths)?;
            let cap = usize::try_from(budget).unwrap_or(usize::MAX).saturating_add(2);
            let upsets = poset.enumerate_upsets(cap)?;
            let full = poset.full_mask();
            let nontrivial: Vec<Mask> = upsets
                .iter()
                .map(|u| u.mask())
                .filter(|&m| m != 0 && m != full)
                .collect();
            let nt = nontrivial.len() as u128;
            if nt * (nt + 1) / 2 > u128::from(budget) {
                return Err(CheckError::BudgetExceeded {
                    budget,
                    pairs_checked: 0,
                });
            }
            let g = poset.element_count();
            let mut point_weight = vec![<BigInt as Zero>::zero(); g];
            for (levels, weight) in scaled.atom_levels.iter().zip(&scaled.atom_weights) {
                let e = poset.index_of(levels).expect("levels on grid");
                point_weight[e] += weight;
            }
            let total = scaled.denominator.clone();
            let sum_masked = |mask: Mask| -> BigInt {
                let mut acc = <BigInt as Zero>::zero();
                let mut rest = mask;
                while rest != 0 {
                    let e = rest.trailing_zeros() as usize;
                    acc += &point_weight[e];
                    rest &= rest - 1;
                }
                acc
            };
            writeln!(out, "U,V,covariance").map_err(io_err)?;
            for vi in 0..nontrivial.len() {
                for ui in 0..=vi {
                    let inter = sum_masked(nontrivial[ui] & nontrivial[vi]);
                    let cov_scaled = &total * inter
                        - sum_masked(nontrivial[ui]) * sum_masked(nontrivial[vi]);
                    let cov = Rational::new(cov_scaled, denominator_squared.clone());
                    writeln!(
                        out,
                        "\"{:?}\",\"{:?}\",{}",
                        UpSet::new(&poset, nontrivial[ui])
                            .expect("masks are up-sets")
                            .level_vectors(&poset),
                        UpSet::new(&poset, nontrivial[vi])
                            .expect("masks are up-sets")
                            .level_vectors(&poset),
                        format_rational(&cov)
                    )
                    .map_err(io_err)?;
                    rows += 1;
                }
            }
        }
        GapTable::Fkg => {
            let report_rows = fkg_rows(measure)?;
            writeln!(out, "x,y,lhs,rhs,gap").map_err(io_err)?;
            for (x, y, lhs, rhs) in report_rows {
                let gap = &lhs - &rhs;
                writeln!(
                    out,
                    "\"{}\",\"{}\",{},{},{}",
                    render_point(&x),
                    render_point(&y),
                    format_rational(&lhs),
                    format_rational(&rhs),
                    format_rational(&gap)
                )
                .map_err(io_err)?;
                rows += 1;
            }
        }
    }
    Ok(rows)
}

fn render_point(coords: &[Rational]) -> String {
    let parts: Vec<String> = coords.iter().map(format_rational).collect();
    format!("({})", parts.join(","))
}

/// All (U, V, Cov * T^2) rows of one NA block, sequential BigInt path.
fn na_block_rows(
    scaled: &ScaledGridMeasure,
    block: &NaBlock,
    weights: &[BigInt],
) -> Vec<(Mask, Mask, BigInt)> {
    let poset_i = &block.upsets_i.poset;
    let poset_j = &block.upsets_j.poset;
    let g_i = poset_i.element_count();
    let g_j = poset_j.element_count();
    let total = &scaled.denominator;

    let mut joint = vec![<BigInt as Zero>::zero(); g_i * g_j];
    for (levels, weight) in scaled.atom_levels.iter().zip(weights) {
        let li: Vec<usize> = block.i_positions.iter().map(|&p| levels[p]).collect();
        let lj: Vec<usize> = block.j_positions.iter().map(|&p| levels[p]).collect();
        let a = poset_i.index_of(&li).expect("levels on grid");
        let b = poset_j.index_of(&lj).expect("levels on grid");
        joint[a * g_j + b] += weight;
    }
    let sum_cell = |u_mask: Mask, v_mask: Mask| -> BigInt {
        let mut acc = <BigInt as Zero>::zero();
        let mut rest_a = u_mask;
        while rest_a != 0 {
            let a = rest_a.trailing_zeros() as usize;
            let mut rest_b = v_mask;
            while rest_b != 0 {
                let b = rest_b.trailing_zeros() as usize;
                acc += &joint[a * g_j + b];
                rest_b &= rest_b - 1;
            }
            rest_a &= rest_a - 1;
        }
        acc
    };
    let n_of = |u_mask: Mask, v_mask: Mask| -> (BigInt, BigInt) {
        (sum_cell(u_mask, poset_j.full_mask()), sum_cell(poset_i.full_mask(), v_mask))
    };
    let mut out = Vec::new();
    for &v_mask in &block.upsets_j.nontrivial {
        for &u_mask in &block.upsets_i.nontrivial {
            let inter = sum_cell(u_mask, v_mask);
            let (n_u, n_v) = n_of(u_mask, v_mask);
            out.push((u_mask, v_mask, total * inter - n_u * n_v));
        }
    }
    out
}

type FkgRow = (Vec<Rational>, Vec<Rational>, Rational, Rational);

fn fkg_rows(measure: &DiscreteMeasure) -> Result<Vec<FkgRow>, CheckError> {
    let scaled = ScaledGridMeasure::build(measure)?;
    let lengths = &scaled.chain_lengths;
    let points = crate::lattice::enumerate_level_vectors(lengths);
    let g = points.len();
    let mut strides = vec![1usize; lengths.len()];
    for i in (0..lengths.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * lengths[i + 1];
    }
    let index_of =
        |levels: &[usize]| -> usize { levels.iter().zip(&strides).map(|(&l, &s)| l * s).sum() };
    let mut weight = vec![<BigInt as Zero>::zero(); g];
    for (levels, w) in scaled.atom_levels.iter().zip(&scaled.atom_weights) {
        weight[index_of(levels)] += w;
    }
    let grid = measure.grid().expect("checked");
    let embed_full = |levels_active: &[usize]| -> Vec<Rational> {
        let mut full = Vec::with_capacity(measure.dimension());
        let mut it = levels_active.iter();
        for c in 0..measure.dimension() {
            if scaled.active_coords.contains(&c) {
                let l = *it.next().expect("levels align");
                full.push(grid.levels()[c][l].clone());
            } else {
                full.push(grid.levels()[c][0].clone());
            }
        }
        full
    };
    let denominator_squared = &scaled.denominator * &scaled.denominator;
    let mut out = Vec::new();
    for x in 0..g {
        for y in (x + 1)..g {
            let px = &points[x];
            let py = &points[y];
            let comparable = px.iter().zip(py).all(|(a, b)| a <= b)
                || px.iter().zip(py).all(|(a, b)| a >= b);
            if comparable {
                continue;
            }
            let meet: Vec<usize> = px.iter().zip(py).map(|(&a, &b)| a.min(b)).collect();
            let join: Vec<usize> = px.iter().zip(py).map(|(&a, &b)| a.max(b)).collect();
            let lhs = Rational::new(
                &weight[index_of(&join)] * &weight[index_of(&meet)],
                denominator_squared.clone(),
            );
            let rhs = Rational::new(&weight[x] * &weight[y], denominator_squared.clone());
            out.push((embed_full(px), embed_full(py), lhs, rhs));
        }
    }
    Ok(out)
}
