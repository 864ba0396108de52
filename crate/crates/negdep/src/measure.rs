//! Finitely supported probability measures on `R^n` with exact rational
//! weights and coordinates.
//!
//! A [`DiscreteMeasure`] is a validated list of weighted support points,
//! optionally tied to a declared product-of-chains [`Grid`]. All maps here
//! (moments, marginals, mixtures, affine coordinate maps, total variation,
//! weak neighborhoods) are pure and exact.
//!
//! Total variation follows the discrete sum convention: the distance between
//! point masses at distinct points is 2, twice the halved convention used in
//! parts of the literature.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::function::{EvalError, FunctionSpec};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("a measure needs at least one atom")]
    NoAtoms,
    #[error("atom {atom} has dimension {found}, expected {expected}")]
    DimensionMismatch { atom: usize, expected: usize, found: usize },
    #[error("atom {atom} carries negative weight {weight}")]
    NegativeWeight { atom: usize, weight: String },
    #[error("weights sum to {total}, expected exactly 1")]
    WeightsDontSumToOne { total: String },
    #[error("support point of atom {atom} duplicates an earlier atom")]
    DuplicateSupportPoint { atom: usize },
    #[error("atom {atom} is off the declared grid in coordinate {coordinate}")]
    PointOffGrid { atom: usize, coordinate: usize },
    #[error("grid declaration is invalid: {0}")]
    BadGrid(String),
    #[error("index set must be nonempty")]
    EmptyIndexSet,
    #[error("coordinate index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
    #[error("mixture weight must lie in [0, 1]")]
    LambdaOutOfRange,
    #[error("scale factor must be strictly positive")]
    NonpositiveScale,
    #[error("operands have dimensions {left} and {right}")]
    OperandDimensionMismatch { left: usize, right: usize },
    #[error("weak-neighborhood tolerance must be strictly positive")]
    NonpositiveEpsilon,
    #[error("{0} is not a permutation of the coordinates")]
    NotAPermutation(String),
    #[error("function evaluation failed: {0}")]
    Evaluation(#[from] EvalError),
}

/// Declared product-of-chains support structure: one strictly increasing
/// list of real embeddings per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    levels: Vec<Vec<Rational>>,
}

impl Grid {
    pub fn new(levels: Vec<Vec<Rational>>) -> Result<Self, MeasureError> {
        if levels.is_empty() {
            return Err(MeasureError::BadGrid("grid has no coordinates".into()));
        }
        for (coord, chain) in levels.iter().enumerate() {
            if chain.is_empty() {
                return Err(MeasureError::BadGrid(format!(
                    "coordinate {coord} has no levels"
                )));
            }
            for pair in chain.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(MeasureError::BadGrid(format!(
                        "levels of coordinate {coord} are not strictly increasing"
                    )));
                }
            }
        }
        Ok(Grid { levels })
    }

    /// The Boolean cube `{0,1}^n`.
    pub fn unit_cube(dimension: usize) -> Self {
        Grid {
            levels: vec![vec![Rational::zero(), Rational::one()]; dimension],
        }
    }

    /// Integer chains `{0, 1, ..., len-1}` of the given lengths.
    pub fn integer_chains(lengths: &[usize]) -> Self {
        Grid {
            levels: lengths
                .iter()
                .map(|&len| (0..len as i64).map(|v| Rational::from_integer(v.into())).collect())
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.levels.len()
    }

    pub fn chain_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|chain| chain.len()).collect()
    }

    pub fn levels(&self) -> &[Vec<Rational>] {
        &self.levels
    }

    /// Exact position of `value` in the chain of `coordinate`, if any.
    pub fn level_of(&self, coordinate: usize, value: &Rational) -> Option<usize> {
        self.levels[coordinate].iter().position(|v| v == value)
    }

    /// Grid restricted to a sorted list of coordinates.
    pub fn restrict(&self, coordinates: &[usize]) -> Grid {
        Grid {
            levels: coordinates.iter().map(|&c| self.levels[c].clone()).collect(),
        }
    }

    /// Real coordinates of a level vector.
    pub fn embed(&self, levels: &[usize]) -> Vec<Rational> {
        levels
            .iter()
            .enumerate()
            .map(|(coord, &lvl)| self.levels[coord][lvl].clone())
            .collect()
    }

    /// All level vectors of the full grid in lexicographic order.
    pub fn enumerate_levels(&self) -> Vec<Vec<usize>> {
        let lengths = self.chain_lengths();
        let total: usize = lengths.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut current = vec![0usize; lengths.len()];
        loop {
            out.push(current.clone());
            let mut coord = lengths.len();
            loop {
                if coord == 0 {
                    return out;
                }
                coord -= 1;
                current[coord] += 1;
                if current[coord] < lengths[coord] {
                    break;
                }
                current[coord] = 0;
            }
        }
    }
}

/// A support point: exact coordinates plus, when the measure declares a
/// grid, the per-coordinate chain levels those coordinates embed.
#[derive(Debug, Clone, Eq)]
pub struct SupportPoint {
    coords: Vec<Rational>,
    levels: Option<Vec<usize>>,
}

impl PartialEq for SupportPoint {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

impl SupportPoint {
    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// Chain levels; present exactly when the owning measure has a grid.
    pub fn levels(&self) -> Option<&[usize]> {
        self.levels.as_deref()
    }
}

/// A finitely supported probability measure. Atoms are stored sorted by
/// coordinates; weights are nonnegative rationals summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    dimension: usize,
    atoms: Vec<(SupportPoint, Rational)>,
    grid: Option<Grid>,
}

impl DiscreteMeasure {
    /// Validates and builds a measure. Rejects bad input rather than
    /// repairing it: no weight renormalization, no atom deduplication.
    pub fn new(
        dimension: usize,
        atoms: Vec<(Vec<Rational>, Rational)>,
        grid: Option<Grid>,
    ) -> Result<Self, MeasureError> {
        if dimension == 0 {
            return Err(MeasureError::ZeroDimension);
        }
        if atoms.is_empty() {
            return Err(MeasureError::NoAtoms);
        }
        if let Some(grid) = &grid {
            if grid.dimension() != dimension {
                return Err(MeasureError::BadGrid(format!(
                    "grid has {} coordinates, measure has {}",
                    grid.dimension(),
                    dimension
                )));
            }
        }
        let mut total = Rational::zero();
        let mut seen: BTreeMap<Vec<Rational>, ()> = BTreeMap::new();
        let mut built: Vec<(SupportPoint, Rational)> = Vec::with_capacity(atoms.len());
        for (idx, (coords, weight)) in atoms.into_iter().enumerate() {
            if coords.len() != dimension {
                return Err(MeasureError::DimensionMismatch {
                    atom: idx,
                    expected: dimension,
                    found: coords.len(),
                });
            }
            if weight.is_negative() {
                return Err(MeasureError::NegativeWeight {
                    atom: idx,
                    weight: format_rational(&weight),
                });
            }
            if seen.insert(coords.clone(), ()).is_some() {
                return Err(MeasureError::DuplicateSupportPoint { atom: idx });
            }
            let levels = match &grid {
                None => None,
                Some(grid) => {
                    let mut levels = Vec::with_capacity(dimension);
                    for (coordinate, value) in coords.iter().enumerate() {
                        match grid.level_of(coordinate, value) {
                            Some(level) => levels.push(level),
                            None => {
                                return Err(MeasureError::PointOffGrid {
                                    atom: idx,
                                    coordinate,
                                })
                            }
                        }
                    }
                    Some(levels)
                }
            };
            total += &weight;
            built.push((SupportPoint { coords, levels }, weight));
        }
        if !total.is_one() {
            return Err(MeasureError::WeightsDontSumToOne {
                total: format_rational(&total),
            });
        }
        built.sort_by(|a, b| a.0.coords.cmp(&b.0.coords));
        Ok(DiscreteMeasure {
            dimension,
            atoms: built,
            grid,
        })
    }

    /// Point mass at the given coordinates.
    pub fn point_mass(coords: Vec<Rational>) -> Result<Self, MeasureError> {
        let dimension = coords.len();
        DiscreteMeasure::new(dimension, vec![(coords, Rational::one())], None)
    }

    /// Point mass on a declared grid.
    pub fn point_mass_on_grid(coords: Vec<Rational>, grid: Grid) -> Result<Self, MeasureError> {
        let dimension = coords.len();
        DiscreteMeasure::new(dimension, vec![(coords, Rational::one())], Some(grid))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn atoms(&self) -> &[(SupportPoint, Rational)] {
        &self.atoms
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    /// Weight of the atom at `coords`, zero when absent.
    pub fn weight_of(&self, coords: &[Rational]) -> Rational {
        match self
            .atoms
            .binary_search_by(|(point, _)| point.coords.as_slice().cmp(coords))
        {
            Ok(idx) => self.atoms[idx].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Replaces the declared grid with the one induced by the support:
    /// per-coordinate sorted distinct support values.
    pub fn with_induced_grid(&self) -> DiscreteMeasure {
        let mut levels: Vec<Vec<Rational>> = vec![Vec::new(); self.dimension];
        for (point, _) in &self.atoms {
            for (coord, value) in point.coords.iter().enumerate() {
                if !levels[coord].contains(value) {
                    levels[coord].push(value.clone());
                }
            }
        }
        for chain in &mut levels {
            chain.sort();
        }
        let grid = Grid { levels };
        let atoms = self
            .atoms
            .iter()
            .map(|(p, w)| (p.coords.clone(), w.clone()))
            .collect();
        DiscreteMeasure::new(self.dimension, atoms, Some(grid))
            .expect("induced grid always covers the support")
    }

    /// Drops the declared grid.
    pub fn without_grid(&self) -> DiscreteMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|(p, w)| (p.coords.clone(), w.clone()))
            .collect();
        DiscreteMeasure::new(self.dimension, atoms, None).expect("atoms already validated")
    }

    /// Exact mixed moment `E prod_i x_i^{e_i}`.
    pub fn moment(&self, exponents: &[u32]) -> Result<Rational, MeasureError> {
        if exponents.len() != self.dimension {
            return Err(MeasureError::DimensionMismatch {
                atom: 0,
                expected: self.dimension,
                found: exponents.len(),
            });
        }
        let mut total = Rational::zero();
        for (point, weight) in &self.atoms {
            if weight.is_zero() {
                continue;
            }
            let mut term = weight.clone();
            for (value, &exp) in point.coords.iter().zip(exponents) {
                for _ in 0..exp {
                    term *= value;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Exact expectation of a function spec.
    pub fn expectation(&self, f: &FunctionSpec) -> Result<Rational, MeasureError> {
        let mut total = Rational::zero();
        for (point, weight) in &self.atoms {
            if weight.is_zero() {
                continue;
            }
            let value = f.eval(&point.coords, point.levels())?;
            total += value * weight;
        }
        Ok(total)
    }

    /// Exact covariance `E fg - Ef Eg`.
    pub fn covariance(&self, f: &FunctionSpec, g: &FunctionSpec) -> Result<Rational, MeasureError> {
        let mut e_f = Rational::zero();
        let mut e_g = Rational::zero();
        let mut e_fg = Rational::zero();
        for (point, weight) in &self.atoms {
            if weight.is_zero() {
                continue;
            }
            let vf = f.eval(&point.coords, point.levels())?;
            let vg = g.eval(&point.coords, point.levels())?;
            e_fg += &vf * &vg * weight;
            e_f += vf * weight;
            e_g += vg * weight;
        }
        Ok(e_fg - e_f * e_g)
    }

    /// Covariance of coordinates `x_i`, `x_j` (0-based).
    pub fn coordinate_covariance(&self, i: usize, j: usize) -> Result<Rational, MeasureError> {
        for &index in &[i, j] {
            if index >= self.dimension {
                return Err(MeasureError::IndexOutOfRange {
                    index,
                    dimension: self.dimension,
                });
            }
        }
        let mut e_i = Rational::zero();
        let mut e_j = Rational::zero();
        let mut e_ij = Rational::zero();
        for (point, weight) in &self.atoms {
            if weight.is_zero() {
                continue;
            }
            let xi = &point.coords[i];
            let xj = &point.coords[j];
            e_ij += xi * xj * weight;
            e_i += xi * weight;
            e_j += xj * weight;
        }
        Ok(e_ij - e_i * e_j)
    }

    /// Pushforward under restriction to a set of coordinates (0-based).
    /// Atoms whose restrictions coincide are merged with summed weights.
    pub fn marginal(&self, index_set: &[usize]) -> Result<DiscreteMeasure, MeasureError> {
        if index_set.is_empty() {
            return Err(MeasureError::EmptyIndexSet);
        }
        let mut coords: Vec<usize> = index_set.to_vec();
        coords.sort_unstable();
        coords.dedup();
        for &index in &coords {
            if index >= self.dimension {
                return Err(MeasureError::IndexOutOfRange {
                    index,
                    dimension: self.dimension,
                });
            }
        }
        let mut merged: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
        for (point, weight) in &self.atoms {
            if weight.is_zero() {
                continue;
            }
            let restricted: Vec<Rational> =
                coords.iter().map(|&c| point.coords[c].clone()).collect();
            *merged.entry(restricted).or_insert_with(Rational::zero) += weight;
        }
        let grid = self.grid.as_ref().map(|g| g.restrict(&coords));
        DiscreteMeasure::new(coords.len(), merged.into_iter().collect(), grid)
    }

    /// Convex combination `lambda * self + (1 - lambda) * other` with merged
    /// supports. The grid survives only when both operands declare the same
    /// grid. Atoms whose mixed weight is zero are dropped.
    pub fn mix(&self, other: &DiscreteMeasure, lambda: &Rational) -> Result<DiscreteMeasure, MeasureError> {
        if self.dimension != other.dimension {
            return Err(MeasureError::OperandDimensionMismatch {
                left: self.dimension,
                right: other.dimension,
            });
        }
        if lambda.is_negative() || lambda > &Rational::one() {
            return Err(MeasureError::LambdaOutOfRange);
        }
        let complement = Rational::one() - lambda;
        let mut merged: BTreeMap<Vec<Rational>, Rational> = BTreeMap::new();
        for (point, weight) in &self.atoms {
            let share = lambda * weight;
            if !share.is_zero() {
                *merged.entry(point.coords.clone()).or_insert_with(Rational::zero) += share;
            }
        }
        for (point, weight) in &other.atoms {
            let share = &complement * weight;
            if !share.is_zero() {
                *merged.entry(point.coords.clone()).or_insert_with(Rational::zero) += share;
            }
        }
        let grid = match (&self.grid, &other.grid) {
            (Some(a), Some(b)) if a == b => Some(a.clone()),
            _ => None,
        };
        DiscreteMeasure::new(self.dimension, merged.into_iter().collect(), grid)
    }

    /// Affine coordinate map `x -> scale * x + shift`, weights unchanged.
    /// The declared grid is mapped through the same transformation.
    pub fn translate_scale(
        &self,
        scale: &Rational,
        shift: &[Rational],
    ) -> Result<DiscreteMeasure, MeasureError> {
        if !scale.is_positive() {
            return Err(MeasureError::NonpositiveScale);
        }
        if shift.len() != self.dimension {
            return Err(MeasureError::DimensionMismatch {
                atom: 0,
                expected: self.dimension,
                found: shift.len(),
            });
        }
        let atoms = self
            .atoms
            .iter()
            .map(|(point, weight)| {
                let coords = point
                    .coords
                    .iter()
                    .zip(shift)
                    .map(|(value, offset)| scale * value + offset)
                    .collect();
                (coords, weight.clone())
            })
            .collect();
        let grid = self.grid.as_ref().map(|grid| Grid {
            levels: grid
                .levels
                .iter()
                .zip(shift)
                .map(|(chain, offset)| chain.iter().map(|v| scale * v + offset).collect())
                .collect(),
        });
        DiscreteMeasure::new(self.dimension, atoms, grid)
    }

    /// Total variation distance, discrete sum form: the sum of
    /// `|mu{x} - nu{x}|` over the union of supports.
    pub fn tv_distance(&self, other: &DiscreteMeasure) -> Result<Rational, MeasureError> {
        if self.dimension != other.dimension {
            return Err(MeasureError::OperandDimensionMismatch {
                left: self.dimension,
                right: other.dimension,
            });
        }
        let mut diff: BTreeMap<&[Rational], Rational> = BTreeMap::new();
        for (point, weight) in &self.atoms {
            *diff.entry(point.coords.as_slice()).or_insert_with(Rational::zero) += weight;
        }
        for (point, weight) in &other.atoms {
            *diff.entry(point.coords.as_slice()).or_insert_with(Rational::zero) -= weight;
        }
        Ok(diff.values().map(|d| d.abs()).sum())
    }

    /// Permutes coordinates: output coordinate `k` is input coordinate
    /// `perm[k]`. Verdicts and margins of dependence checks are invariant
    /// under this relabeling.
    pub fn permute_coordinates(&self, perm: &[usize]) -> Result<DiscreteMeasure, MeasureError> {
        let mut seen = vec![false; self.dimension];
        if perm.len() != self.dimension {
            return Err(MeasureError::NotAPermutation(format!("{perm:?}")));
        }
        for &p in perm {
            if p >= self.dimension || seen[p] {
                return Err(MeasureError::NotAPermutation(format!("{perm:?}")));
            }
            seen[p] = true;
        }
        let atoms = self
            .atoms
            .iter()
            .map(|(point, weight)| {
                let coords = perm.iter().map(|&p| point.coords[p].clone()).collect();
                (coords, weight.clone())
            })
            .collect();
        let grid = self.grid.as_ref().map(|grid| Grid {
            levels: perm.iter().map(|&p| grid.levels[p].clone()).collect(),
        });
        DiscreteMeasure::new(self.dimension, atoms, grid)
    }
}

/// Result of a weak-neighborhood membership test: the exact gap
/// `|int f dnu - int f dmu|` per test function, and the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakNeighborhood {
    pub contained: bool,
    pub gaps: Vec<Rational>,
}

/// Checks whether `candidate` lies in the basic weak neighborhood of
/// `center` cut out by `(f_i, eps_i)` pairs: strict inequality
/// `|int f_i d(candidate) - int f_i d(center)| < eps_i` for every test.
pub fn weak_neighborhood_contains(
    candidate: &DiscreteMeasure,
    center: &DiscreteMeasure,
    tests: &[(FunctionSpec, Rational)],
) -> Result<WeakNeighborhood, MeasureError> {
    let mut gaps = Vec::with_capacity(tests.len());
    let mut contained = true;
    for (f, epsilon) in tests {
        if !epsilon.is_positive() {
            return Err(MeasureError::NonpositiveEpsilon);
        }
        let gap = (candidate.expectation(f)? - center.expectation(f)?).abs();
        if &gap >= epsilon {
            contained = false;
        }
        gaps.push(gap);
    }
    Ok(WeakNeighborhood { contained, gaps })
}
