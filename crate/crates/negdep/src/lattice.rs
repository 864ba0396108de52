//! Products of finite chains, their up-sets, and the layer-cake
//! decomposition of monotone functions.
//!
//! This is the constructive finite reduction that replaces quantification
//! over all monotone functions: a 0/1 function on a finite product poset is
//! monotone exactly when it is the indicator of an up-set, and every
//! monotone table decomposes as a constant plus a positive combination of
//! up-set indicators (its layer cake). Covariance is bilinear and vanishes
//! against constants, so sign conditions over all monotone pairs reduce to
//! sign conditions over up-set indicator pairs. The oracle module validates
//! this reduction independently by filtering raw subsets.
//!
//! Up-sets are stored as bitmasks in the mixed-radix order of level vectors
//! (first coordinate most significant); that order is a linear extension of
//! the product order. The up-set counts of Boolean cubes are the Dedekind
//! numbers 2, 3, 6, 20, 168, 7581, 7828354, ... so enumeration takes an
//! explicit budget.

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::function::FunctionSpec;
use crate::rational::{rat, Rational};

/// Bitmask over poset elements; caps exact enumeration at 128 elements.
pub type Mask = u128;

pub const MAX_POSET_ELEMENTS: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("chain lengths must all be at least 2, got {0}")]
    ChainTooShort(usize),
    #[error("poset has {elements} elements, exceeding the 128-element mask limit")]
    TooManyElements { elements: usize },
    #[error("level vector {0:?} does not belong to this poset")]
    PosetMismatch(String),
    #[error("up-set enumeration exceeded budget {budget}; {partial} up-sets found so far")]
    BudgetExceeded { budget: usize, partial: usize },
    #[error("table is not monotone: value decreases from element {lower} to {upper}")]
    NotMonotone { lower: usize, upper: usize },
    #[error("table has {found} values, poset has {expected} elements")]
    TableSizeMismatch { expected: usize, found: usize },
    #[error("value count must be at least 1")]
    NoValues,
}

/// A product of finite chains with precomputed comparability masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    chain_lengths: Vec<usize>,
    element_count: usize,
    strides: Vec<usize>,
    /// For each element `e`, the mask of elements `>= e` (including `e`).
    above: Vec<Mask>,
    /// For each element `e`, the mask of elements `<= e` (including `e`).
    below: Vec<Mask>,
}

impl Poset {
    /// Builds the product of chains with the given lengths (each >= 2).
    /// An empty length list yields the single-element poset.
    pub fn product_of_chains(chain_lengths: &[usize]) -> Result<Self, LatticeError> {
        for &len in chain_lengths {
            if len < 2 {
                return Err(LatticeError::ChainTooShort(len));
            }
        }
        let mut element_count: usize = 1;
        for &len in chain_lengths {
            element_count = element_count.saturating_mul(len);
        }
        if element_count > MAX_POSET_ELEMENTS {
            return Err(LatticeError::TooManyElements {
                elements: element_count,
            });
        }
        let mut strides = vec![1usize; chain_lengths.len()];
        for i in (0..chain_lengths.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * chain_lengths[i + 1];
        }
        let levels: Vec<Vec<usize>> = (0..element_count)
            .map(|e| decode(e, chain_lengths, &strides))
            .collect();
        let mut above = vec![0 as Mask; element_count];
        let mut below = vec![0 as Mask; element_count];
        for (a, va) in levels.iter().enumerate() {
            for (b, vb) in levels.iter().enumerate() {
                if leq(va, vb) {
                    above[a] |= 1 << b;
                    below[b] |= 1 << a;
                }
            }
        }
        Ok(Poset {
            chain_lengths: chain_lengths.to_vec(),
            element_count,
            strides,
            above,
            below,
        })
    }

    /// The Boolean cube poset `{0,1}^m`.
    pub fn cube(m: usize) -> Result<Self, LatticeError> {
        Poset::product_of_chains(&vec![2; m])
    }

    pub fn chain_lengths(&self) -> &[usize] {
        &self.chain_lengths
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn full_mask(&self) -> Mask {
        if self.element_count == MAX_POSET_ELEMENTS {
            Mask::MAX
        } else {
            (1 << self.element_count) - 1
        }
    }

    /// Level vector of an element index (mixed-radix decode).
    pub fn level_vector(&self, element: usize) -> Vec<usize> {
        decode(element, &self.chain_lengths, &self.strides)
    }

    /// Element index of a level vector.
    pub fn index_of(&self, levels: &[usize]) -> Result<usize, LatticeError> {
        if levels.len() != self.chain_lengths.len() {
            return Err(LatticeError::PosetMismatch(format!("{levels:?}")));
        }
        let mut index = 0usize;
        for ((&lvl, &len), &stride) in levels
            .iter()
            .zip(&self.chain_lengths)
            .zip(&self.strides)
        {
            if lvl >= len {
                return Err(LatticeError::PosetMismatch(format!("{levels:?}")));
            }
            index += lvl * stride;
        }
        Ok(index)
    }

    /// Componentwise product order.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.above[a] & (1 << b) != 0
    }

    /// Mask of elements `>= e`.
    pub fn above_mask(&self, element: usize) -> Mask {
        self.above[element]
    }

    /// Mask of elements `<= e`.
    pub fn below_mask(&self, element: usize) -> Mask {
        self.below[element]
    }

    /// Componentwise meet (min) and join (max) of two level vectors.
    pub fn meet_join(
        &self,
        a: &[usize],
        b: &[usize],
    ) -> Result<(Vec<usize>, Vec<usize>), LatticeError> {
        self.index_of(a)?;
        self.index_of(b)?;
        let meet = a.iter().zip(b).map(|(&x, &y)| x.min(y)).collect();
        let join = a.iter().zip(b).map(|(&x, &y)| x.max(y)).collect();
        Ok((meet, join))
    }

    /// True when the bitmask is upward closed.
    pub fn is_upset(&self, mask: Mask) -> bool {
        let mut rest = mask & self.full_mask();
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            if self.above[e] & !mask != 0 {
                return false;
            }
            rest &= rest - 1;
        }
        true
    }

    /// Enumerates every up-set, deterministically, within a budget.
    ///
    /// Elements are decided from the top of the linear extension downwards;
    /// an element may enter only when everything above it is already in.
    /// Exclusion branches are explored before inclusion branches, so the
    /// empty set comes first and the full set last.
    pub fn enumerate_upsets(&self, budget: usize) -> Result<Vec<UpSet>, LatticeError> {
        let mut out: Vec<UpSet> = Vec::new();
        let mut stack: Vec<(usize, Mask)> = vec![(self.element_count, 0)];
        while let Some((remaining, mask)) = stack.pop() {
            if remaining == 0 {
                if out.len() >= budget {
                    return Err(LatticeError::BudgetExceeded {
                        budget,
                        partial: out.len(),
                    });
                }
                out.push(UpSet { mask });
                continue;
            }
            let element = remaining - 1;
            let strictly_above = self.above[element] & !(1 << element);
            // Push include-branch first so the exclude-branch pops first.
            if strictly_above & !mask == 0 {
                stack.push((element, mask | (1 << element)));
            }
            stack.push((element, mask));
        }
        Ok(out)
    }
}

fn decode(index: usize, chain_lengths: &[usize], strides: &[usize]) -> Vec<usize> {
    chain_lengths
        .iter()
        .zip(strides)
        .map(|(&len, &stride)| (index / stride) % len)
        .collect()
}

fn leq(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// An upward-closed subset of a poset, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UpSet {
    mask: Mask,
}

impl UpSet {
    /// Wraps a mask after verifying upward closure.
    pub fn new(poset: &Poset, mask: Mask) -> Result<Self, LatticeError> {
        if poset.is_upset(mask) {
            Ok(UpSet { mask })
        } else {
            Err(LatticeError::PosetMismatch(format!("mask {mask:#x} is not upward closed")))
        }
    }

    pub fn mask(&self) -> Mask {
        self.mask
    }

    pub fn contains(&self, element: usize) -> bool {
        self.mask & (1 << element) != 0
    }

    pub fn cardinality(&self) -> u32 {
        self.mask.count_ones()
    }

    /// Trivial up-sets are the empty set and the full poset; their
    /// indicators are literally constant.
    pub fn is_trivial(&self, poset: &Poset) -> bool {
        self.mask == 0 || self.mask == poset.full_mask()
    }

    /// Member level vectors in index order, for report rendering.
    pub fn level_vectors(&self, poset: &Poset) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.mask.count_ones() as usize);
        let mut rest = self.mask;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            out.push(poset.level_vector(e));
            rest &= rest - 1;
        }
        out
    }
}

/// A function table on a poset whose values never decrease along the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneTable {
    poset: Poset,
    values: Vec<Rational>,
}

impl MonotoneTable {
    pub fn new(poset: Poset, values: Vec<Rational>) -> Result<Self, LatticeError> {
        if values.len() != poset.element_count() {
            return Err(LatticeError::TableSizeMismatch {
                expected: poset.element_count(),
                found: values.len(),
            });
        }
        for lower in 0..poset.element_count() {
            let mut rest = poset.above_mask(lower) & !(1 << lower);
            while rest != 0 {
                let upper = rest.trailing_zeros() as usize;
                if values[lower] > values[upper] {
                    return Err(LatticeError::NotMonotone { lower, upper });
                }
                rest &= rest - 1;
            }
        }
        Ok(MonotoneTable { poset, values })
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value_at(&self, element: usize) -> &Rational {
        &self.values[element]
    }

    /// Layer-cake decomposition: `f = base + sum_k c_k * 1_{U_k}` with
    /// `base = min f`, strictly positive coefficients and strictly nested
    /// decreasing up-sets (the level sets of the successive values).
    pub fn layer_cake(&self) -> (Rational, Vec<(Rational, UpSet)>) {
        let mut distinct: Vec<&Rational> = self.values.iter().collect();
        distinct.sort();
        distinct.dedup();
        let base = distinct[0].clone();
        let mut terms = Vec::with_capacity(distinct.len().saturating_sub(1));
        let mut previous = base.clone();
        for &threshold in distinct.iter().skip(1) {
            let mut mask: Mask = 0;
            for (element, value) in self.values.iter().enumerate() {
                if value >= threshold {
                    mask |= 1 << element;
                }
            }
            terms.push((threshold - &previous, UpSet { mask }));
            previous = threshold.clone();
        }
        (base, terms)
    }

    /// Pointwise sum; monotone tables are closed under addition.
    pub fn add(&self, other: &MonotoneTable) -> Result<MonotoneTable, LatticeError> {
        if self.poset != other.poset {
            return Err(LatticeError::PosetMismatch("sum over distinct posets".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        MonotoneTable::new(self.poset.clone(), values)
    }

    /// Positive scaling; monotone tables are closed under it.
    pub fn scale(&self, factor: &Rational) -> Result<MonotoneTable, LatticeError> {
        let values = self.values.iter().map(|v| v * factor).collect();
        MonotoneTable::new(self.poset.clone(), values)
    }

    /// Converts to a table spec keyed by this poset's level vectors.
    pub fn to_function_spec(&self) -> FunctionSpec {
        let mut map = std::collections::BTreeMap::new();
        for element in 0..self.poset.element_count() {
            map.insert(self.poset.level_vector(element), self.values[element].clone());
        }
        FunctionSpec::Table(map)
    }

    /// Expands a monotone table over coordinates `coords` (sorted, 0-based
    /// within a `full_lengths` grid) into a full-dimension table spec whose
    /// value at a grid point depends only on the `coords` levels.
    pub fn expand_to_grid(&self, coords: &[usize], full_lengths: &[usize]) -> FunctionSpec {
        let full_poset_points = enumerate_level_vectors(full_lengths);
        let mut map = std::collections::BTreeMap::new();
        for levels in full_poset_points {
            let restricted: Vec<usize> = coords.iter().map(|&c| levels[c]).collect();
            let element = self
                .poset
                .index_of(&restricted)
                .expect("restricted level vector belongs to the restricted poset");
            map.insert(levels, self.values[element].clone());
        }
        FunctionSpec::Table(map)
    }
}

/// All level vectors of a product of chains, in mixed-radix order.
pub fn enumerate_level_vectors(chain_lengths: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = chain_lengths.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0usize; chain_lengths.len()];
    loop {
        out.push(current.clone());
        let mut coord = chain_lengths.len();
        loop {
            if coord == 0 {
                return out;
            }
            coord -= 1;
            current[coord] += 1;
            if current[coord] < chain_lengths[coord] {
                break;
            }
            current[coord] = 0;
        }
    }
}

/// Deterministic monotone table with at most `value_count` distinct values.
///
/// Labels are sampled per element and closed upwards by taking the running
/// maximum over everything below, then mapped onto sorted random rationals.
pub fn random_monotone(
    poset: &Poset,
    value_count: usize,
    seed: u64,
) -> Result<MonotoneTable, LatticeError> {
    if value_count == 0 {
        return Err(LatticeError::NoValues);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<Rational> = (0..value_count)
        .map(|_| rat(rng.gen_range(-24..=24), rng.gen_range(1..=6)))
        .collect();
    candidates.sort();
    candidates.dedup();

    let n = poset.element_count();
    let mut labels = vec![0usize; n];
    // Element index order is a linear extension, so everything below an
    // element has a smaller index and is already labeled.
    for element in 0..n {
        let mut label = rng.gen_range(0..candidates.len());
        let mut rest = poset.below_mask(element) & !(1 << element);
        while rest != 0 {
            let lower = rest.trailing_zeros() as usize;
            label = label.max(labels[lower]);
            rest &= rest - 1;
        }
        labels[element] = label;
    }
    let values = labels.iter().map(|&l| candidates[l].clone()).collect();
    MonotoneTable::new(poset.clone(), values)
}

/// Indicator table of an up-set (a 0/1 monotone table).
pub fn indicator_table(poset: &Poset, upset: &UpSet) -> MonotoneTable {
    let values = (0..poset.element_count())
        .map(|e| {
            if upset.contains(e) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    MonotoneTable::new(poset.clone(), values).expect("up-set indicators are monotone")
}
