//! Independent brute-force validators.
//!
//! Nothing here touches the optimized code paths: monotone 0/1 functions
//! are found by filtering raw subsets with a local comparability test (not
//! through [`crate::lattice::Poset::enumerate_upsets`]), covariances are
//! direct sums over atoms (not joint-table dot products), and Dedekind
//! counts come from filtering all `2^(2^m)` subsets. The acceptance suite
//! trusts agreement between this module and the checkers.

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lattice::{random_monotone, LatticeError, Poset};
use crate::measure::{DiscreteMeasure, Grid, MeasureError};
use crate::rational::Rational;
use crate::search::split_seed;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("this oracle requires a declared grid")]
    GridRequired,
    #[error("brute-force Dedekind counting is limited to m <= 4, got {0}")]
    TooLarge(usize),
    #[error("measure must be one-dimensional")]
    NotOneDimensional,
    #[error("function values are not monotone in a common direction")]
    NotMonotone,
    #[error("value table has {found} entries, chain has {expected}")]
    TableSizeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleProperty {
    Na,
    Pa,
}

/// Worst monotone pair found, as raw value tables over the restricted
/// level vectors.
#[derive(Debug, Clone)]
pub struct OracleWitness {
    pub coords_f: Vec<usize>,
    pub coords_g: Vec<usize>,
    pub f_values: Vec<(Vec<usize>, Rational)>,
    pub g_values: Vec<(Vec<usize>, Rational)>,
    pub covariance: Rational,
}

#[derive(Debug, Clone)]
pub struct OracleVerdict {
    pub property: OracleProperty,
    pub holds: bool,
    pub worst: Option<OracleWitness>,
    pub pairs_evaluated: u64,
}

/// Direct quantifier check for NA or PA.
///
/// For every relevant block whose restricted grid has at most
/// `exhaustive_cutoff` points, all monotone 0/1 functions are enumerated by
/// subset filtering; larger blocks are skipped. On top of that,
/// `sampled_pairs` random multi-valued monotone pairs are drawn via
/// [`random_monotone`] and evaluated the same way. Verdict: NA fails on any
/// positive covariance, PA on any negative one.
pub fn brute_force_dependence(
    measure: &DiscreteMeasure,
    property: OracleProperty,
    sampled_pairs: u64,
    seed: u64,
    exhaustive_cutoff: usize,
) -> Result<OracleVerdict, OracleError> {
    let grid = measure.grid().ok_or(OracleError::GridRequired)?;
    let lengths: Vec<usize> = grid.chain_lengths();
    let lengths = lengths.as_slice();
    let active: Vec<usize> = (0..measure.dimension())
        .filter(|&c| lengths[c] >= 2)
        .collect();

    // atoms as (active level vector, weight)
    let atoms: Vec<(Vec<usize>, Rational)> = measure
        .atoms()
        .iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(point, w)| {
            let levels = point.levels().expect("grid measures carry levels");
            (
                active.iter().map(|&c| levels[c]).collect(),
                w.clone(),
            )
        })
        .collect();

    let mut state = OracleState {
        property,
        holds: true,
        worst: None,
        pairs_evaluated: 0,
    };

    match property {
        OracleProperty::Na => {
            let blocks = disjoint_pairs(active.len());
            for (i_pos, j_pos) in &blocks {
                exhaustive_block(
                    &mut state,
                    &atoms,
                    &active,
                    lengths,
                    i_pos,
                    j_pos,
                    exhaustive_cutoff,
                );
            }
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 0));
            for sample in 0..sampled_pairs {
                if blocks.is_empty() {
                    break;
                }
                let (i_pos, j_pos) = &blocks[rng.gen_range(0..blocks.len())];
                sampled_block(
                    &mut state,
                    &atoms,
                    &active,
                    lengths,
                    i_pos,
                    j_pos,
                    split_seed(seed, sample + 1),
                )?;
            }
        }
        OracleProperty::Pa => {
            let all: Vec<usize> = (0..active.len()).collect();
            if !all.is_empty() {
                exhaustive_block(
                    &mut state,
                    &atoms,
                    &active,
                    lengths,
                    &all,
                    &all,
                    exhaustive_cutoff,
                );
                for sample in 0..sampled_pairs {
                    sampled_block(
                        &mut state,
                        &atoms,
                        &active,
                        lengths,
                        &all,
                        &all,
                        split_seed(seed, sample + 1),
                    )?;
                }
            }
        }
    }

    Ok(OracleVerdict {
        property,
        holds: state.holds,
        worst: state.worst,
        pairs_evaluated: state.pairs_evaluated,
    })
}

struct OracleState {
    property: OracleProperty,
    holds: bool,
    worst: Option<OracleWitness>,
    pairs_evaluated: u64,
}

impl OracleState {
    fn record(
        &mut self,
        coords_f: &[usize],
        coords_g: &[usize],
        f_values: impl FnOnce() -> Vec<(Vec<usize>, Rational)>,
        g_values: impl FnOnce() -> Vec<(Vec<usize>, Rational)>,
        covariance: Rational,
    ) {
        self.pairs_evaluated += 1;
        let violated = match self.property {
            OracleProperty::Na => covariance.is_positive(),
            OracleProperty::Pa => covariance.is_negative(),
        };
        if violated {
            self.holds = false;
        }
        let more_extreme = match &self.worst {
            None => true,
            Some(current) => match self.property {
                OracleProperty::Na => covariance > current.covariance,
                OracleProperty::Pa => covariance < current.covariance,
            },
        };
        if more_extreme {
            self.worst = Some(OracleWitness {
                coords_f: coords_f.to_vec(),
                coords_g: coords_g.to_vec(),
                f_values: f_values(),
                g_values: g_values(),
                covariance,
            });
        }
    }
}

/// All unordered pairs of disjoint nonempty subsets of `{0..k}`.
fn disjoint_pairs(k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for i_mask in 1u32..(1u32 << k) {
        for j_mask in 1u32..(1u32 << k) {
            if i_mask & j_mask != 0 || j_mask <= i_mask {
                continue;
            }
            out.push((positions(i_mask), positions(j_mask)));
        }
    }
    out
}

fn positions(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// Level vectors of the restricted grid, lexicographically.
fn restricted_points(positions: &[usize], active: &[usize], lengths: &[usize]) -> Vec<Vec<usize>> {
    let restricted: Vec<usize> = positions.iter().map(|&p| lengths[active[p]]).collect();
    crate::lattice::enumerate_level_vectors(&restricted)
}

/// Covariance of `f(x_I)` and `g(x_J)` by direct summation over atoms.
/// Values are table lookups keyed by restricted level vectors.
fn direct_covariance(
    atoms: &[(Vec<usize>, Rational)],
    i_pos: &[usize],
    j_pos: &[usize],
    f: &dyn Fn(&[usize]) -> Rational,
    g: &dyn Fn(&[usize]) -> Rational,
) -> Rational {
    let mut e_f = Rational::zero();
    let mut e_g = Rational::zero();
    let mut e_fg = Rational::zero();
    for (levels, weight) in atoms {
        let xi: Vec<usize> = i_pos.iter().map(|&p| levels[p]).collect();
        let xj: Vec<usize> = j_pos.iter().map(|&p| levels[p]).collect();
        let vf = f(&xi);
        let vg = g(&xj);
        e_fg += &vf * &vg * weight;
        e_f += vf * weight;
        e_g += vg * weight;
    }
    e_fg - e_f * e_g
}

fn exhaustive_block(
    state: &mut OracleState,
    atoms: &[(Vec<usize>, Rational)],
    active: &[usize],
    lengths: &[usize],
    i_pos: &[usize],
    j_pos: &[usize],
    exhaustive_cutoff: usize,
) {
    let points_i = restricted_points(i_pos, active, lengths);
    let points_j = restricted_points(j_pos, active, lengths);
    if points_i.len() > exhaustive_cutoff || points_j.len() > exhaustive_cutoff {
        return;
    }
    let monotone_i = monotone_01_tables(&points_i);
    let monotone_j = if i_pos == j_pos {
        monotone_i.clone()
    } else {
        monotone_01_tables(&points_j)
    };

    // restricted-point index of every atom, computed once per block
    let atom_index = |positions: &[usize], points: &[Vec<usize>]| -> Vec<usize> {
        atoms
            .iter()
            .map(|(levels, _)| {
                let restricted: Vec<usize> = positions.iter().map(|&p| levels[p]).collect();
                points
                    .iter()
                    .position(|p| p == &restricted)
                    .expect("atom levels lie on the restricted grid")
            })
            .collect()
    };
    let idx_i = atom_index(i_pos, &points_i);
    let idx_j = atom_index(j_pos, &points_j);

    // indicator expectations by direct summation over atoms, per mask
    let prob_of = |masks: &[u64], idx: &[usize]| -> Vec<Rational> {
        masks
            .iter()
            .map(|&mask| {
                let mut total = Rational::zero();
                for ((_, weight), &k) in atoms.iter().zip(idx) {
                    if mask & (1 << k) != 0 {
                        total += weight;
                    }
                }
                total
            })
            .collect()
    };
    let p_i = prob_of(&monotone_i, &idx_i);
    let p_j = prob_of(&monotone_j, &idx_j);

    let coords_i: Vec<usize> = i_pos.iter().map(|&p| active[p]).collect();
    let coords_j: Vec<usize> = j_pos.iter().map(|&p| active[p]).collect();
    for (fi, mask_f) in monotone_i.iter().enumerate() {
        for (gi, mask_g) in monotone_j.iter().enumerate() {
            let mut joint = Rational::zero();
            for (k, (_, weight)) in atoms.iter().enumerate() {
                if mask_f & (1 << idx_i[k]) != 0 && mask_g & (1 << idx_j[k]) != 0 {
                    joint += weight;
                }
            }
            let covariance = joint - &p_i[fi] * &p_j[gi];
            state.record(
                &coords_i,
                &coords_j,
                || table_of(&points_i, *mask_f),
                || table_of(&points_j, *mask_g),
                covariance,
            );
        }
    }
}

/// All monotone 0/1 functions on the given level vectors, found by
/// filtering every subset for upward closure under the componentwise order.
fn monotone_01_tables(points: &[Vec<usize>]) -> Vec<u64> {
    let n = points.len();
    assert!(n <= 63, "exhaustive cutoff keeps subsets in a u64");
    // dominators[a] = mask of points componentwise above point a
    let dominators: Vec<u64> = (0..n)
        .map(|a| {
            let mut mask = 0u64;
            for b in 0..n {
                if points[a].iter().zip(&points[b]).all(|(x, y)| x <= y) {
                    mask |= 1 << b;
                }
            }
            mask
        })
        .collect();
    let mut out = Vec::new();
    'subsets: for mask in 0u64..(1u64 << n) {
        let mut members = mask;
        while members != 0 {
            let a = members.trailing_zeros() as usize;
            if dominators[a] & !mask != 0 {
                continue 'subsets;
            }
            members &= members - 1;
        }
        out.push(mask);
    }
    out
}

fn table_of(points: &[Vec<usize>], mask: u64) -> Vec<(Vec<usize>, Rational)> {
    points
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            (
                p.clone(),
                if mask & (1 << idx) != 0 {
                    Rational::one()
                } else {
                    Rational::zero()
                },
            )
        })
        .collect()
}

fn sampled_block(
    state: &mut OracleState,
    atoms: &[(Vec<usize>, Rational)],
    active: &[usize],
    lengths: &[usize],
    i_pos: &[usize],
    j_pos: &[usize],
    seed: u64,
) -> Result<(), OracleError> {
    let chain_i: Vec<usize> = i_pos.iter().map(|&p| lengths[active[p]]).collect();
    let chain_j: Vec<usize> = j_pos.iter().map(|&p| lengths[active[p]]).collect();
    let poset_i = Poset::product_of_chains(&chain_i)?;
    let poset_j = Poset::product_of_chains(&chain_j)?;
    let table_f = random_monotone(&poset_i, 4, split_seed(seed, 17))?;
    let table_g = random_monotone(&poset_j, 4, split_seed(seed, 23))?;

    let f = |levels: &[usize]| {
        table_f
            .value_at(poset_i.index_of(levels).expect("levels on restricted grid"))
            .clone()
    };
    let g = |levels: &[usize]| {
        table_g
            .value_at(poset_j.index_of(levels).expect("levels on restricted grid"))
            .clone()
    };
    let covariance = direct_covariance(atoms, i_pos, j_pos, &f, &g);

    let coords_i: Vec<usize> = i_pos.iter().map(|&p| active[p]).collect();
    let coords_j: Vec<usize> = j_pos.iter().map(|&p| active[p]).collect();
    state.record(
        &coords_i,
        &coords_j,
        || {
            (0..poset_i.element_count())
                .map(|e| (poset_i.level_vector(e), table_f.value_at(e).clone()))
                .collect()
        },
        || {
            (0..poset_j.element_count())
                .map(|e| (poset_j.level_vector(e), table_g.value_at(e).clone()))
                .collect()
        },
        covariance,
    );
    Ok(())
}

/// Number of upward-closed subsets of the cube `{0,1}^m`, by filtering all
/// `2^(2^m)` subsets. The cube order is bitmask inclusion, checked locally.
pub fn dedekind_count(m: usize) -> Result<u64, OracleError> {
    if m > 4 {
        return Err(OracleError::TooLarge(m));
    }
    let elements = 1usize << m;
    let mut count = 0u64;
    for mask in 0u64..(1u64 << elements) {
        let mut closed = true;
        'outer: for a in 0..elements {
            if mask & (1 << a) == 0 {
                continue;
            }
            for b in 0..elements {
                // a <= b in the cube iff the level bits of a are a subset
                if a & b == a && mask & (1 << b) == 0 {
                    closed = false;
                    break 'outer;
                }
            }
        }
        if closed {
            count += 1;
        }
    }
    Ok(count)
}

/// Chebyshev check on a single chain: for value tables `f`, `g` that are
/// monotone in a common direction, returns the covariance and verifies it
/// against the half-double-sum form
/// `Cov(f,g) = 1/2 sum_x sum_y w_x w_y (f(x)-f(y))(g(x)-g(y))`,
/// which makes nonnegativity pointwise-obvious.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChebyshevReport {
    pub covariance: Rational,
    pub double_sum: Rational,
}

pub fn chebyshev_1d_check(
    measure: &DiscreteMeasure,
    f_values: &[Rational],
    g_values: &[Rational],
) -> Result<ChebyshevReport, OracleError> {
    if measure.dimension() != 1 {
        return Err(OracleError::NotOneDimensional);
    }
    let grid = measure.grid().ok_or(OracleError::GridRequired)?;
    let chain = grid.chain_lengths()[0];
    for values in [f_values, g_values] {
        if values.len() != chain {
            return Err(OracleError::TableSizeMismatch {
                expected: chain,
                found: values.len(),
            });
        }
    }
    let non_decreasing = |values: &[Rational]| values.windows(2).all(|w| w[0] <= w[1]);
    let non_increasing = |values: &[Rational]| values.windows(2).all(|w| w[0] >= w[1]);
    let ok = (non_decreasing(f_values) && non_decreasing(g_values))
        || (non_increasing(f_values) && non_increasing(g_values));
    if !ok {
        return Err(OracleError::NotMonotone);
    }

    let atoms: Vec<(usize, Rational)> = measure
        .atoms()
        .iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(point, w)| (point.levels().expect("grid measure")[0], w.clone()))
        .collect();

    let mut e_f = Rational::zero();
    let mut e_g = Rational::zero();
    let mut e_fg = Rational::zero();
    for (level, weight) in &atoms {
        e_fg += &f_values[*level] * &g_values[*level] * weight;
        e_f += &f_values[*level] * weight;
        e_g += &g_values[*level] * weight;
    }
    let covariance = e_fg - e_f * e_g;

    let mut double_sum = Rational::zero();
    for (x, wx) in &atoms {
        for (y, wy) in &atoms {
            double_sum += wx
                * wy
                * (&f_values[*x] - &f_values[*y])
                * (&g_values[*x] - &g_values[*y]);
        }
    }
    double_sum *= crate::rational::rat(1, 2);

    Ok(ChebyshevReport {
        covariance,
        double_sum,
    })
}

/// Configuration for the seeded random measure generator.
#[derive(Debug, Clone)]
pub struct RandomMeasureConfig {
    /// Integer weights are drawn uniformly from `1..=max_weight`.
    pub max_weight: u32,
    /// Chance (in percent) that a grid point gets weight zero.
    pub sparsity_percent: u32,
}

impl Default for RandomMeasureConfig {
    fn default() -> Self {
        RandomMeasureConfig {
            max_weight: 20,
            sparsity_percent: 35,
        }
    }
}

/// Deterministic random measure on integer chains of the given lengths:
/// bounded integer weights normalized exactly, with a sparsity knob to
/// exercise degenerate supports.
pub fn random_measure(
    chain_lengths: &[usize],
    seed: u64,
    config: &RandomMeasureConfig,
) -> Result<DiscreteMeasure, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::integer_chains(chain_lengths);
    let points = grid.enumerate_levels();
    let mut raw: Vec<u64> = points
        .iter()
        .map(|_| {
            if rng.gen_range(0..100) < config.sparsity_percent {
                0
            } else {
                u64::from(rng.gen_range(1..=config.max_weight))
            }
        })
        .collect();
    if raw.iter().all(|&w| w == 0) {
        let lucky = rng.gen_range(0..raw.len());
        raw[lucky] = 1;
    }
    let total: u64 = raw.iter().sum();
    let atoms: Vec<(Vec<Rational>, Rational)> = points
        .iter()
        .zip(&raw)
        .filter(|(_, &w)| w > 0)
        .map(|(levels, &w)| {
            (
                grid.embed(levels),
                Rational::new((w as i64).into(), (total as i64).into()),
            )
        })
        .collect();
    Ok(DiscreteMeasure::new(
        chain_lengths.len(),
        atoms,
        Some(grid),
    )?)
}
