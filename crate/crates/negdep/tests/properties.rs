//! Cross-module invariants on generated measures: mixture algebra, metric
//! axioms, stability bounds, monotone-map invariance, and the layer-cake
//! margin bound.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use negdep::checks::{na_interior_margin, na_report, nc_report};
use negdep::function::{coordinate_sum, FunctionSpec};
use negdep::lattice::{enumerate_level_vectors, random_monotone, Poset};
use negdep::measure::weak_neighborhood_contains;
use negdep::oracle::{random_measure, RandomMeasureConfig};
use negdep::rational::{int, rat, Rational};
use negdep::search::split_seed;
use negdep::DiscreteMeasure;

fn seeded_cube_measure(seed: u64, n: usize) -> DiscreteMeasure {
    random_measure(&vec![2; n], seed, &RandomMeasureConfig::default()).unwrap()
}

fn seeded_chain_measure(seed: u64, lengths: &[usize]) -> DiscreteMeasure {
    random_measure(lengths, seed, &RandomMeasureConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mixture_moments_are_linear(seed_a in 0u64..5000, seed_b in 0u64..5000, k in 0i64..=16) {
        let lambda = rat(k, 16);
        let mu = seeded_cube_measure(seed_a, 3);
        let nu = seeded_cube_measure(seed_b, 3);
        let mixed = mu.mix(&nu, &lambda).unwrap();
        for exponents in [[1, 0, 0], [0, 1, 0], [1, 1, 0], [2, 0, 1], [1, 1, 1]] {
            let direct = mixed.moment(&exponents).unwrap();
            let combined = &lambda * mu.moment(&exponents).unwrap()
                + (Rational::one() - &lambda) * nu.moment(&exponents).unwrap();
            prop_assert_eq!(direct, combined);
        }
    }

    #[test]
    fn mixture_covariance_identity(seed_a in 0u64..5000, seed_b in 0u64..5000, k in 1i64..16) {
        let lambda = rat(k, 16);
        let complement = Rational::one() - &lambda;
        let mu = seeded_cube_measure(seed_a, 2);
        let nu = seeded_cube_measure(seed_b, 2);
        let f = FunctionSpec::coordinate(0, 2);
        let g = FunctionSpec::coordinate(1, 2);
        let a = mu.expectation(&f).unwrap();
        let b = nu.expectation(&f).unwrap();
        let c = mu.expectation(&g).unwrap();
        let d = nu.expectation(&g).unwrap();
        let mixed = mu.mix(&nu, &lambda).unwrap();
        let lhs = mixed.covariance(&f, &g).unwrap();
        let rhs = &lambda * mu.covariance(&f, &g).unwrap()
            + &complement * nu.covariance(&f, &g).unwrap()
            + &lambda * &complement * (a - b) * (c - d);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tv_metric_axioms(seed_a in 0u64..3000, seed_b in 0u64..3000, seed_c in 0u64..3000) {
        let x = seeded_cube_measure(seed_a, 2);
        let y = seeded_cube_measure(seed_b, 2);
        let z = seeded_cube_measure(seed_c, 2);
        let xy = x.tv_distance(&y).unwrap();
        prop_assert_eq!(xy.clone(), y.tv_distance(&x).unwrap());
        prop_assert!(!xy.is_negative());
        prop_assert_eq!(xy.is_zero(), x == y);
        let xz = x.tv_distance(&z).unwrap();
        let zy = z.tv_distance(&y).unwrap();
        prop_assert!(xy <= xz + zy);
    }

    #[test]
    fn translate_scale_covariance_laws(seed in 0u64..5000, s_num in 1i64..6, s_den in 1i64..6, p in -4i64..4) {
        let mu = seeded_chain_measure(seed, &[3, 2]);
        let scale = rat(s_num, s_den);
        let shift = vec![int(p), int(-p)];

        let translated = mu.translate_scale(&int(1), &shift).unwrap();
        prop_assert_eq!(
            translated.coordinate_covariance(0, 1).unwrap(),
            mu.coordinate_covariance(0, 1).unwrap()
        );

        let scaled = mu.translate_scale(&scale, &[int(0), int(0)]).unwrap();
        prop_assert_eq!(
            scaled.coordinate_covariance(0, 1).unwrap(),
            &scale * &scale * mu.coordinate_covariance(0, 1).unwrap()
        );
    }

    #[test]
    fn variance_of_coordinate_sum_is_nonnegative(seed in 0u64..8000, n in 2usize..5) {
        let mu = seeded_cube_measure(seed, n);
        let f = coordinate_sum(n);
        let variance = mu.covariance(&f, &f).unwrap();
        prop_assert!(!variance.is_negative());
    }

    #[test]
    fn measure_json_round_trip_is_exact(seed in 0u64..10_000, shape in 0usize..3) {
        let lengths = match shape {
            0 => vec![2, 2],
            1 => vec![3, 2],
            _ => vec![2, 2, 2],
        };
        let mu = seeded_chain_measure(seed, &lengths);
        let text = negdep::json::measure_to_json_string(&mu);
        let reread = negdep::json::measure_from_json_str(&text).unwrap();
        prop_assert_eq!(&reread, &mu);
        prop_assert_eq!(negdep::json::measure_to_json_string(&reread), text);
    }
}

/// |Cov_mu(f,g) - Cov_nu(f,g)| <= 3 * tv(mu, nu) for sup-norm-1 tables.
#[test]
fn covariance_is_tv_stable_for_bounded_tables() {
    for seed in 0..120u64 {
        let lengths = [2usize, 2];
        let mu = seeded_chain_measure(split_seed(seed, 1), &lengths);
        let nu = seeded_chain_measure(split_seed(seed, 2), &lengths);
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 3));
        let mut random_bounded_table = || {
            let mut map = BTreeMap::new();
            for levels in enumerate_level_vectors(&lengths) {
                map.insert(levels, rat(rng.gen_range(-4i64..=4), 4));
            }
            FunctionSpec::Table(map)
        };
        let f = random_bounded_table();
        let g = random_bounded_table();
        let gap = (mu.covariance(&f, &g).unwrap() - nu.covariance(&f, &g).unwrap()).abs();
        let bound = rat(3, 1) * mu.tv_distance(&nu).unwrap();
        assert!(gap <= bound, "seed {seed}: |ΔCov| = {gap} > 3·tv = {bound}");
    }
}

/// The scaling path converges weakly to the origin point mass: for linear
/// test functions, |∫f dμ_t - f(0)| <= t·L·R with L the coefficient l1-norm
/// and R the sup-norm radius of the support.
#[test]
fn scaling_path_converges_weakly_to_origin() {
    let origin3 = DiscreteMeasure::point_mass(vec![int(0), int(0), int(0)]).unwrap();
    for seed in 0..60u64 {
        let mu = seeded_cube_measure(seed, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 4));
        let coeffs: Vec<Rational> = (0..3).map(|_| rat(rng.gen_range(-5i64..=5), 2)).collect();
        let f = FunctionSpec::linear(&coeffs);
        let lipschitz: Rational = coeffs.iter().map(|c| c.abs()).sum();
        let radius: Rational = mu
            .atoms()
            .iter()
            .flat_map(|(p, _)| p.coords().iter().map(|v| v.abs()))
            .max()
            .unwrap();
        let t = rat(1 + (seed as i64 % 7), 40);
        let scaled = mu.translate_scale(&t, &[int(0), int(0), int(0)]).unwrap();
        let gap = scaled.expectation(&f).unwrap().abs();
        assert!(gap <= &t * &lipschitz * &radius, "seed {seed}");

        let epsilon = &t * &lipschitz * &radius + rat(1, 100);
        let report = weak_neighborhood_contains(&scaled, &origin3, &[(f, epsilon)]).unwrap();
        assert!(report.contained, "seed {seed}");
    }
}

/// NA implies NC on every generated measure where NA holds.
#[test]
fn na_implies_nc_on_random_measures() {
    let mut na_holders = 0;
    for seed in 0..300u64 {
        let lengths = match seed % 3 {
            0 => vec![2, 2],
            1 => vec![2, 2, 2],
            _ => vec![3, 2],
        };
        let mu = random_measure(&lengths, split_seed(seed, 5), &RandomMeasureConfig::default())
            .unwrap();
        let na = na_report(&mu, 1_000_000).unwrap();
        if na.holds() {
            na_holders += 1;
            assert!(
                nc_report(&mu).unwrap().holds(),
                "seed {seed}: NA holds but NC fails"
            );
        }
    }
    assert!(na_holders > 10, "generator never produced NA measures");
}

/// NA verdicts are invariant under strictly increasing coordinate maps.
#[test]
fn na_verdict_invariant_under_translate_scale() {
    for seed in 0..120u64 {
        let mu = seeded_cube_measure(split_seed(seed, 6), 3);
        let before = na_report(&mu, 1_000_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 7));
        let scale = rat(rng.gen_range(1i64..5), rng.gen_range(1i64..5));
        let shift: Vec<Rational> = (0..3).map(|_| rat(rng.gen_range(-6i64..=6), 3)).collect();
        let mapped = mu.translate_scale(&scale, &shift).unwrap();
        let after = na_report(&mapped, 1_000_000).unwrap();
        assert_eq!(before.verdict, after.verdict, "seed {seed}");
        assert_eq!(before.margin, after.margin, "seed {seed}");
    }
}

/// Margin dominance: for monotone tables with values in [0,1] on disjoint
/// blocks, Cov(f,g) <= -(uniform margin) * range(f) * range(g).
#[test]
fn interior_margin_dominates_monotone_covariances() {
    for seed in 0..60u64 {
        let mu = seeded_cube_measure(split_seed(seed, 8), 3);
        let margin = na_interior_margin(&mu, 1_000_000).unwrap().margin;
        if margin.is_negative() {
            continue; // dominance is only claimed for NA measures
        }
        let grid = mu.grid().unwrap();
        let lengths = grid.chain_lengths();
        // blocks I = {0}, J = {1, 2}
        let poset_i = Poset::product_of_chains(&lengths[0..1]).unwrap();
        let poset_j = Poset::product_of_chains(&lengths[1..3]).unwrap();
        for pair_seed in 0..4u64 {
            let f = normalize_to_unit(random_monotone(&poset_i, 3, split_seed(seed, 100 + pair_seed)).unwrap().values());
            let g = normalize_to_unit(random_monotone(&poset_j, 4, split_seed(seed, 200 + pair_seed)).unwrap().values());
            let range_f = table_range(&f);
            let range_g = table_range(&g);
            let f_spec = expand_over_grid(&f, &[0], &lengths, &poset_i);
            let g_spec = expand_over_grid(&g, &[1, 2], &lengths, &poset_j);
            let cov = mu.covariance(&f_spec, &g_spec).unwrap();
            assert!(
                cov <= -(&margin) * range_f * range_g,
                "seed {seed}/{pair_seed}: covariance exceeds the margin bound"
            );
        }
    }
}

fn normalize_to_unit(values: &[Rational]) -> Vec<Rational> {
    let lo = values.iter().min().unwrap().clone();
    let hi = values.iter().max().unwrap().clone();
    if lo == hi {
        return vec![Rational::zero(); values.len()];
    }
    let span = hi - &lo;
    values.iter().map(|v| (v - &lo) / &span).collect()
}

fn table_range(values: &[Rational]) -> Rational {
    let lo = values.iter().min().unwrap();
    let hi = values.iter().max().unwrap();
    hi - lo
}

fn expand_over_grid(
    values: &[Rational],
    coords: &[usize],
    lengths: &[usize],
    poset: &Poset,
) -> FunctionSpec {
    let mut map = BTreeMap::new();
    for levels in enumerate_level_vectors(lengths) {
        let restricted: Vec<usize> = coords.iter().map(|&c| levels[c]).collect();
        let element = poset.index_of(&restricted).unwrap();
        map.insert(levels, values[element].clone());
    }
    FunctionSpec::Table(map)
}

/// NC margin stability: on a compact grid with coordinates bounded by 1,
/// pairwise covariances move by at most 3·tv under perturbation, so a
/// strictly NC measure keeps NC throughout any ball of radius under
/// margin/3. This is the finite-support face of the weak-interior claim.
#[test]
fn nc_margin_survives_small_tv_balls() {
    use negdep::search::{tv_interior_probe, ProbeProperty};
    let mut strict_count = 0;
    for seed in 0..200u64 {
        let mu = seeded_cube_measure(split_seed(seed, 13), 3);
        let nc = nc_report(&mu).unwrap();
        if !nc.margin.is_positive() {
            continue;
        }
        strict_count += 1;
        let radius = &nc.margin / rat(6, 1); // half of margin/3
        let probe = tv_interior_probe(&mu, &radius, 40, seed, ProbeProperty::Nc, 10_000).unwrap();
        assert_eq!(
            probe.fails, 0,
            "seed {seed}: strictly NC measure lost NC inside its stability ball"
        );
        if strict_count >= 25 {
            break;
        }
    }
    assert!(strict_count >= 10, "generator produced too few strictly NC measures");
}

/// On binary cubes with n = 2 the NA and NC verdicts coincide.
#[test]
fn na_equals_nc_on_two_dimensional_cubes() {
    for seed in 0..200u64 {
        let mu = seeded_cube_measure(split_seed(seed, 9), 2);
        let na = na_report(&mu, 100_000).unwrap();
        let nc = nc_report(&mu).unwrap();
        assert_eq!(na.verdict, nc.verdict, "seed {seed}");
    }
}

/// The engine's a.s.-strict NA margin must equal the minimum slack found by
/// a direct enumeration written from scratch here: all disjoint block
/// pairs, all monotone 0/1 functions per side by dominance filtering, all
/// covariances by plain atom summation.
#[test]
fn na_margin_agrees_with_direct_enumeration() {
    for seed in 0..150u64 {
        let lengths = match seed % 3 {
            0 => vec![2, 2],
            1 => vec![2, 2, 2],
            _ => vec![3, 2],
        };
        let mu = random_measure(&lengths, split_seed(seed, 14), &RandomMeasureConfig::default())
            .unwrap();
        let report = na_report(&mu, 1_000_000).unwrap();
        let expected = direct_na_margin(&mu);
        assert_eq!(report.margin, expected, "seed {seed} lengths {lengths:?}");
    }
}

/// Slow reference margin: min over a.s.-non-constant 0/1 monotone pairs of
/// -Cov, zero when no pair is eligible.
fn direct_na_margin(mu: &DiscreteMeasure) -> Rational {
    let grid = mu.grid().unwrap();
    let lengths = grid.chain_lengths();
    let n = mu.dimension();
    let atoms: Vec<(Vec<usize>, Rational)> = mu
        .atoms()
        .iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(p, w)| (p.levels().unwrap().to_vec(), w.clone()))
        .collect();

    let mut best: Option<Rational> = None;
    for i_mask in 1u32..(1 << n) {
        for j_mask in 1u32..(1 << n) {
            if i_mask & j_mask != 0 || j_mask <= i_mask {
                continue;
            }
            let coords = |mask: u32| -> Vec<usize> {
                (0..n).filter(|&c| mask & (1 << c) != 0).collect()
            };
            let i_coords = coords(i_mask);
            let j_coords = coords(j_mask);
            let points_i = points_of(&i_coords, lengths.as_slice());
            let points_j = points_of(&j_coords, lengths.as_slice());
            for mask_u in monotone_masks(&points_i) {
                for mask_v in monotone_masks(&points_j) {
                    let p_u = event_prob(&atoms, &i_coords, &points_i, mask_u);
                    let p_v = event_prob(&atoms, &j_coords, &points_j, mask_v);
                    if p_u.is_zero()
                        || p_u.is_one()
                        || p_v.is_zero()
                        || p_v.is_one()
                    {
                        continue;
                    }
                    let joint = joint_prob(
                        &atoms, &i_coords, &points_i, mask_u, &j_coords, &points_j, mask_v,
                    );
                    let slack = &p_u * &p_v - joint;
                    if best.as_ref().is_none_or(|b| &slack < b) {
                        best = Some(slack);
                    }
                }
            }
        }
    }
    best.unwrap_or_else(Rational::zero)
}

fn points_of(coords: &[usize], lengths: &[usize]) -> Vec<Vec<usize>> {
    let restricted: Vec<usize> = coords.iter().map(|&c| lengths[c]).collect();
    enumerate_level_vectors(&restricted)
}

fn monotone_masks(points: &[Vec<usize>]) -> Vec<u64> {
    let n = points.len();
    (0u64..(1 << n))
        .filter(|&mask| {
            (0..n).all(|a| {
                mask & (1 << a) == 0
                    || (0..n).all(|b| {
                        mask & (1 << b) != 0
                            || !points[a].iter().zip(&points[b]).all(|(x, y)| x <= y)
                    })
            })
        })
        .collect()
}

fn restricted_index(points: &[Vec<usize>], coords: &[usize], levels: &[usize]) -> usize {
    let restricted: Vec<usize> = coords.iter().map(|&c| levels[c]).collect();
    points.iter().position(|p| p == &restricted).unwrap()
}

fn event_prob(
    atoms: &[(Vec<usize>, Rational)],
    coords: &[usize],
    points: &[Vec<usize>],
    mask: u64,
) -> Rational {
    atoms
        .iter()
        .filter(|(levels, _)| mask & (1 << restricted_index(points, coords, levels)) != 0)
        .map(|(_, w)| w.clone())
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn joint_prob(
    atoms: &[(Vec<usize>, Rational)],
    i_coords: &[usize],
    points_i: &[Vec<usize>],
    mask_u: u64,
    j_coords: &[usize],
    points_j: &[Vec<usize>],
    mask_v: u64,
) -> Rational {
    atoms
        .iter()
        .filter(|(levels, _)| {
            mask_u & (1 << restricted_index(points_i, i_coords, levels)) != 0
                && mask_v & (1 << restricted_index(points_j, j_coords, levels)) != 0
        })
        .map(|(_, w)| w.clone())
        .sum()
}

/// Same cross-check for the PA margin: pairs over the full grid, self-pairs
/// included.
#[test]
fn pa_margin_agrees_with_direct_enumeration() {
    use negdep::checks::pa_report;
    for seed in 0..100u64 {
        let lengths = match seed % 2 {
            0 => vec![2, 2],
            _ => vec![2, 2, 2],
        };
        let mu = random_measure(&lengths, split_seed(seed, 15), &RandomMeasureConfig::default())
            .unwrap();
        let report = pa_report(&mu, 1_000_000).unwrap();

        let grid = mu.grid().unwrap();
        let n = mu.dimension();
        let all: Vec<usize> = (0..n).collect();
        let points = points_of(&all, grid.chain_lengths().as_slice());
        let atoms: Vec<(Vec<usize>, Rational)> = mu
            .atoms()
            .iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(p, w)| (p.levels().unwrap().to_vec(), w.clone()))
            .collect();
        let masks = monotone_masks(&points);
        let mut best: Option<Rational> = None;
        for (vi, &mask_v) in masks.iter().enumerate() {
            for &mask_u in masks.iter().take(vi + 1) {
                let p_u = event_prob(&atoms, &all, &points, mask_u);
                let p_v = event_prob(&atoms, &all, &points, mask_v);
                if p_u.is_zero() || p_u.is_one() || p_v.is_zero() || p_v.is_one() {
                    continue;
                }
                let joint = event_prob(&atoms, &all, &points, mask_u & mask_v);
                let slack = joint - p_u * p_v;
                if best.as_ref().is_none_or(|b| &slack < b) {
                    best = Some(slack);
                }
            }
        }
        let expected = best.unwrap_or_else(Rational::zero);
        assert_eq!(report.margin, expected, "seed {seed} lengths {lengths:?}");
    }
}

/// Injection invariants: tv distance to the input is bounded by 2(1-alpha)
/// and the pair covariance grows with c^2.
#[test]
fn injection_tv_bound_and_monotonicity() {
    use negdep::constructions::inject_positive_correlation;
    for seed in 0..60u64 {
        let mu = seeded_cube_measure(split_seed(seed, 10), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 11));
        let alpha = rat(rng.gen_range(1i64..8), 8);
        let c_small = rat(rng.gen_range(1i64..4), 2);
        let c_large = &c_small + int(2);
        let small = inject_positive_correlation(&mu, &alpha, &c_small).unwrap();
        let large = inject_positive_correlation(&mu, &alpha, &c_large).unwrap();
        let bound = rat(2, 1) * (Rational::one() - &alpha);
        assert!(mu.tv_distance(&small.measure).unwrap() <= bound);
        assert!(
            small.measure.coordinate_covariance(0, 1).unwrap()
                <= large.measure.coordinate_covariance(0, 1).unwrap(),
            "covariance must be monotone in c^2"
        );
        assert_eq!(small.radicand, large.radicand);
    }
}

/// The penalty family has full support and satisfies FKG only at q = 1.
#[test]
fn penalty_family_fkg_only_at_independence() {
    use negdep::checks::fkg_report;
    use negdep::constructions::pairwise_penalty_measure;
    for q in [rat(1, 4), rat(1, 2), rat(3, 4), rat(9, 10)] {
        let m = pairwise_penalty_measure(3, &q).unwrap();
        assert_eq!(m.atoms().len(), 8, "full support expected");
        assert!(
            !fkg_report(&m).unwrap().holds(),
            "FKG must fail at q = {q}"
        );
    }
    let independent = pairwise_penalty_measure(3, &int(1)).unwrap();
    assert!(fkg_report(&independent).unwrap().holds());
}

/// Every lemma1 measure passes NA and its NC gaps are exactly -w_i w_j.
#[test]
fn lemma1_gaps_are_products_of_weights() {
    use negdep::constructions::lemma1_measure;
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, 12));
        let n = rng.gen_range(2usize..=4);
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1i64..=9)).collect();
        let total: i64 = raw.iter().sum();
        let weights: Vec<Rational> = raw.iter().map(|&w| rat(w, total)).collect();
        let mu = lemma1_measure(n, &weights).unwrap();
        assert!(na_report(&mu, 1_000_000).unwrap().holds(), "seed {seed}");
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(
                    mu.coordinate_covariance(i, j).unwrap(),
                    -(&weights[i] * &weights[j]),
                    "seed {seed} pair ({i},{j})"
                );
            }
        }
    }
}
