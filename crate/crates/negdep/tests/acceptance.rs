//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines; any assertion failure fails the criterion.

use std::time::Instant;

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use negdep::checks::{
    fkg_report, na_interior_margin, na_report, na_report_with, nc_report, pa_report, CheckOptions,
};
use negdep::constructions::{
    inject_positive_correlation, lemma1_uniform, skewed_corner_pair,
};
use negdep::function::coordinate_sum;
use negdep::lattice::Poset;
use negdep::lp::{lp_feasible, LinearProgram, LpOutcome};
use negdep::measure::{weak_neighborhood_contains, Grid};
use negdep::oracle::{
    brute_force_dependence, chebyshev_1d_check, dedekind_count, random_measure, OracleProperty,
    RandomMeasureConfig,
};
use negdep::rational::{int, rat, Rational};
use negdep::search::{
    nonconvex_witness, split_seed, tv_interior_probe, LambdaMode, ProbeProperty,
};
use negdep::DiscreteMeasure;

fn pass(criterion: u32, message: &str) {
    println!("[criterion {criterion}] PASS - {message}");
}

fn cube_measure(weights: &[(Vec<i64>, Rational)]) -> DiscreteMeasure {
    let n = weights[0].0.len();
    let atoms = weights
        .iter()
        .map(|(coords, w)| {
            (
                coords.iter().map(|&v| int(v)).collect::<Vec<_>>(),
                w.clone(),
            )
        })
        .collect();
    DiscreteMeasure::new(n, atoms, Some(Grid::unit_cube(n))).unwrap()
}

#[test]
fn acceptance_01_lemma1_margins() {
    let start = Instant::now();
    let mu = lemma1_uniform(3).unwrap();
    let na = na_report(&mu, 1_000_000).unwrap();
    assert!(na.holds());
    assert_eq!(na.margin, rat(1, 9), "a.s.-strict NA margin");

    let nc = nc_report(&mu).unwrap();
    assert!(nc.holds());
    assert_eq!(nc.margin, rat(1, 9));
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert_eq!(mu.coordinate_covariance(i, j).unwrap(), rat(-1, 9));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(1, &format!("lemma1 margins exactly 1/9, NC gaps -1/9, in {elapsed:?}"));
}

#[test]
fn acceptance_02_dedekind_regression() {
    let start = Instant::now();
    let expected = [2usize, 3, 6, 20, 168, 7581];
    for (m, &count) in expected.iter().enumerate() {
        let upsets = Poset::cube(m).unwrap().enumerate_upsets(100_000).unwrap();
        assert_eq!(upsets.len(), count, "cube m={m}");
        if m <= 4 {
            assert_eq!(
                dedekind_count(m).unwrap(),
                count as u64,
                "brute-force cross-check m={m}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(
        2,
        &format!("up-set counts 2,3,6,20,168,7581 with m<=4 cross-checked, in {elapsed:?}"),
    );
}

#[test]
fn acceptance_03_nonconvexity_witness() {
    let pair = skewed_corner_pair(&rat(1, 8)).unwrap();
    for side in [&pair.mu_high, &pair.nu_low] {
        let report = na_report(side, 100_000).unwrap();
        assert!(report.holds());
        assert_eq!(report.margin, rat(1, 64), "component margin h^2");
        assert!(nc_report(side).unwrap().holds());
    }
    let witness = nonconvex_witness(&pair.mu_high, &pair.nu_low, &LambdaMode::Exact)
        .unwrap()
        .expect("corner pair must mix into a violation");
    assert_eq!(witness.lambda, rat(1, 2));
    assert_eq!(witness.mixture_covariance, rat(1, 8));
    assert_eq!(witness.c_tilde, rat(9, 16));
    assert_eq!(witness.eps1, rat(1, 64));
    assert_eq!(witness.eps2, rat(1, 64));
    // mixture identity recomputation, spelled out
    let recomputed = rat(1, 2) * -rat(1, 64) + rat(1, 2) * -rat(1, 64)
        + rat(1, 2) * rat(1, 2) * rat(9, 16);
    assert_eq!(recomputed, rat(1, 8));
    // the mixture fails NA and NC alike
    let mixture = pair.mu_high.mix(&pair.nu_low, &rat(1, 2)).unwrap();
    assert!(!na_report(&mixture, 100_000).unwrap().holds());
    assert!(!nc_report(&mixture).unwrap().holds());
    pass(3, "corner pair: margins 1/64, witness lambda=1/2 with mixture covariance +1/8");
}

#[test]
fn acceptance_04_equal_means_convexity() {
    let lambdas = [rat(1, 4), rat(1, 2), rat(3, 4)];
    let corners: Vec<Vec<Rational>> = Grid::unit_cube(3)
        .enumerate_levels()
        .into_iter()
        .map(|levels| Grid::unit_cube(3).embed(&levels))
        .collect();

    let solve = |means: &[Rational], damping: &Rational| -> DiscreteMeasure {
        let mut program = LinearProgram::new(corners.len());
        program.equality(vec![Rational::one(); corners.len()], Rational::one());
        for i in 0..3 {
            program.equality(
                corners.iter().map(|p| p[i].clone()).collect(),
                means[i].clone(),
            );
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                program.equality(
                    corners.iter().map(|p| &p[i] * &p[j]).collect(),
                    damping * &means[i] * &means[j],
                );
            }
        }
        match lp_feasible(&program).unwrap() {
            LpOutcome::Feasible(weights) => {
                let atoms: Vec<(Vec<Rational>, Rational)> = corners
                    .iter()
                    .cloned()
                    .zip(weights)
                    .filter(|(_, w)| !w.is_zero())
                    .collect();
                DiscreteMeasure::new(3, atoms, Some(Grid::unit_cube(3))).unwrap()
            }
            LpOutcome::Infeasible { .. } => panic!("damped product system is always feasible"),
        }
    };

    let mut mixtures_checked = 0u32;
    for pair_seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(41, pair_seed));
        // means with sum <= 3/4 keep the basis-plus-origin witness available
        let means: Vec<Rational> = (0..3).map(|_| rat(rng.gen_range(1i64..=5), 20)).collect();
        // E x_i x_j = damping * p_i p_j with damping in [0, 1] forces NC
        let mu = solve(&means, &rat(rng.gen_range(0i64..=8), 8));
        let nu = solve(&means, &rat(rng.gen_range(0i64..=8), 8));
        assert!(nc_report(&mu).unwrap().holds(), "pair {pair_seed}: mu not NC");
        assert!(nc_report(&nu).unwrap().holds(), "pair {pair_seed}: nu not NC");
        for lambda in &lambdas {
            let mixture = mu.mix(&nu, lambda).unwrap();
            assert!(
                nc_report(&mixture).unwrap().holds(),
                "pair {pair_seed}: equal-means mixture broke NC at lambda={lambda}"
            );
            mixtures_checked += 1;
        }
    }
    assert_eq!(mixtures_checked, 600);
    pass(4, "200 LP-generated equal-means NC pairs: all 600 mixtures stay NC");
}

#[test]
fn acceptance_05_tv_interior_certification() {
    let mu = cube_measure(&[
        (vec![0, 0], rat(3, 10)),
        (vec![0, 1], rat(3, 10)),
        (vec![1, 0], rat(3, 10)),
        (vec![1, 1], rat(1, 10)),
    ]);
    let interior = na_interior_margin(&mu, 100_000).unwrap();
    assert_eq!(interior.margin, rat(3, 50));

    // radius = margin / 6 = 1/100: every probe must stay NA
    let report = tv_interior_probe(&mu, &rat(1, 100), 500, 2024, ProbeProperty::Na, 100_000)
        .unwrap();
    assert_eq!(report.passes, 500, "certified ball leaked a violation");
    assert_eq!(report.fails, 0);

    // negative control: the basis-uniform measure has uniform margin 0 and
    // mass pushed onto (1,1,1) breaks NA inside any ball
    let basis = lemma1_uniform(3).unwrap();
    assert_eq!(
        na_interior_margin(&basis, 100_000).unwrap().margin,
        int(0)
    );
    let control = tv_interior_probe(&basis, &rat(1, 100), 500, 2024, ProbeProperty::Na, 100_000)
        .unwrap();
    assert!(control.fails > 0, "no violation found around a boundary measure");
    let (_, counterexample, failure) = control.first_counterexample.expect("failing trial");
    assert!(!failure.holds());
    assert!(basis.tv_distance(&counterexample).unwrap() <= rat(1, 100));
    assert!(
        counterexample
            .weight_of(&[int(1), int(1), int(1)])
            .is_positive(),
        "violations around the basis measure require mass at (1,1,1)"
    );
    pass(
        5,
        "margin 3/50 certifies the 1/100 ball (500/500); boundary control leaks as expected",
    );
}

#[test]
fn acceptance_06_positive_correlation_injection() {
    let mu = lemma1_uniform(2).unwrap();
    let alpha = rat(3, 4);

    let at_one = inject_positive_correlation(&mu, &alpha, &int(1)).unwrap();
    assert_eq!(at_one.radicand, Some(rat(9, 16)));
    assert_eq!(
        at_one.measure.coordinate_covariance(0, 1).unwrap(),
        rat(7, 64)
    );

    // c^2 exactly at the radicand: covariance vanishes
    let at_threshold = inject_positive_correlation(&mu, &alpha, &rat(3, 4)).unwrap();
    assert_eq!(
        at_threshold.measure.coordinate_covariance(0, 1).unwrap(),
        int(0)
    );

    for c in [int(1), rat(3, 2), int(2), int(7)] {
        let injected = inject_positive_correlation(&mu, &alpha, &c).unwrap();
        assert_eq!(
            mu.tv_distance(&injected.measure).unwrap(),
            rat(1, 2),
            "tv distance must be 2(1-alpha) at c={c}"
        );
    }
    pass(6, "radicand 9/16, Cov 0 at the threshold and 7/64 at c=1, tv = 1/2 for c >= 1");
}

#[test]
fn acceptance_07_weak_neighborhood_counterexample() {
    let mu = lemma1_uniform(2).unwrap();
    let tests = vec![coordinate_sum(2)];
    let found =
        negdep::search::weak_counterexample(&mu, &tests, None, (0, 1), 100_000).unwrap();

    let mean_sum = found.measure.moment(&[1, 0]).unwrap() + found.measure.moment(&[0, 1]).unwrap();
    assert_eq!(mean_sum, int(1), "E(x1 + x2) must match the center exactly");
    assert!(!found.na_failure.holds());
    match found.na_failure.certificate.as_ref().expect("certificate") {
        negdep::checks::Certificate::UpsetPair { covariance, .. } => {
            assert!(covariance.is_positive())
        }
        other => panic!("unexpected certificate {other:?}"),
    }

    for epsilon in [rat(1, 1_000_000), rat(1, 7), int(5)] {
        let inside = weak_neighborhood_contains(
            &found.measure,
            &mu,
            &[(coordinate_sum(2), epsilon)],
        )
        .unwrap();
        assert!(inside.contained, "moment match must survive every epsilon");
    }
    pass(7, "weak counterexample matches E(x1+x2)=1 exactly and fails NA with a positive certificate");
}

#[test]
fn acceptance_08_fkg_implies_pa_and_chebyshev() {
    // FKG => PA on random cube measures, n <= 3
    let mut fkg_passers = 0u32;
    for seed in 0..1000u64 {
        let n = 1 + (seed % 3) as usize;
        let mu = random_measure(&vec![2; n], split_seed(8001, seed), &RandomMeasureConfig::default())
            .unwrap();
        if fkg_report(&mu).unwrap().holds() {
            fkg_passers += 1;
            assert!(
                pa_report(&mu, 1_000_000).unwrap().holds(),
                "seed {seed}: FKG holds but PA fails"
            );
        }
    }
    assert!(fkg_passers >= 100, "only {fkg_passers} FKG passers generated");

    // Chebyshev on 1000 monotone pairs over random chains
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(8002, seed));
        let length = rng.gen_range(2usize..=6);
        let mu = random_measure(&[length], split_seed(8003, seed), &RandomMeasureConfig::default())
            .unwrap();
        let mut sorted_values = |count: usize| -> Vec<Rational> {
            let mut values: Vec<Rational> =
                (0..count).map(|_| rat(rng.gen_range(-12i64..=12), 4)).collect();
            values.sort();
            values
        };
        let f = sorted_values(length);
        let g = sorted_values(length);
        let report = chebyshev_1d_check(&mu, &f, &g).unwrap();
        assert_eq!(report.covariance, report.double_sum, "seed {seed}");
        assert!(!report.covariance.is_negative(), "seed {seed}");
    }
    pass(
        8,
        &format!("{fkg_passers} FKG passers all PA; 1000 Chebyshev pairs nonnegative with exact identity"),
    );
}

#[test]
fn acceptance_09_oracle_equivalence_and_runtime() {
    // verdict agreement on 1000 seeded random measures, n <= 4
    let mut disagreements = 0u32;
    for seed in 0..1000u64 {
        let lengths: Vec<usize> = match seed % 5 {
            0 => vec![2],
            1 => vec![2, 2],
            2 => vec![2, 2, 2],
            3 => vec![2, 2, 2, 2],
            _ => vec![3, 2, 2],
        };
        let mu = random_measure(&lengths, split_seed(9001, seed), &RandomMeasureConfig::default())
            .unwrap();
        let na = na_report(&mu, 10_000_000).unwrap().holds();
        let na_oracle = brute_force_dependence(&mu, OracleProperty::Na, 3, seed, 16)
            .unwrap()
            .holds;
        if na != na_oracle {
            disagreements += 1;
        }
        let pa = pa_report(&mu, 10_000_000).unwrap().holds();
        let pa_oracle = brute_force_dependence(&mu, OracleProperty::Pa, 3, seed, 16)
            .unwrap()
            .holds;
        if pa != pa_oracle {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);

    // full-margin NA on a random n = 5 cube measure: single-threaded < 5 s
    let m5 = random_measure(&[2; 5], 515, &RandomMeasureConfig::default()).unwrap();
    let sequential = CheckOptions {
        budget: 10_000_000,
        early_exit: false,
        parallel: false,
    };
    let start = Instant::now();
    let single = na_report_with(&m5, &sequential).unwrap();
    let single_elapsed = start.elapsed();
    assert!(
        single_elapsed.as_secs_f64() < 5.0,
        "n=5 single-threaded took {single_elapsed:?}"
    );

    // same measure with 4 workers: < 2 s, identical report
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let parallel = CheckOptions {
        budget: 10_000_000,
        early_exit: false,
        parallel: true,
    };
    let start = Instant::now();
    let quad = pool.install(|| na_report_with(&m5, &parallel)).unwrap();
    let quad_elapsed = start.elapsed();
    assert!(
        quad_elapsed.as_secs_f64() < 2.0,
        "n=5 with 4 workers took {quad_elapsed:?}"
    );
    assert_eq!(single.verdict, quad.verdict);
    assert_eq!(single.margin, quad.margin);
    assert_eq!(single.certificate, quad.certificate);

    // n = 6 within the stated budget of 10^7 pair evaluations: < 2 min
    let m6 = random_measure(&[2; 6], 616, &RandomMeasureConfig::default()).unwrap();
    let start = Instant::now();
    let six = na_report_with(&m6, &parallel).unwrap();
    let six_elapsed = start.elapsed();
    assert!(
        six_elapsed.as_secs_f64() < 120.0,
        "n=6 took {six_elapsed:?}"
    );
    pass(
        9,
        &format!(
            "0/2000 oracle disagreements; n=5 in {single_elapsed:?} (1 thread) / {quad_elapsed:?} (4 threads); n=6 ({} pairs) in {six_elapsed:?}",
            six.pairs_checked
        ),
    );
}

#[test]
fn acceptance_10_multinomial_na() {
    // 2 trials over 3 equiprobable cells, on the induced chain grid
    let multinomial = DiscreteMeasure::new(
        3,
        vec![
            (vec![int(2), int(0), int(0)], rat(1, 9)),
            (vec![int(0), int(2), int(0)], rat(1, 9)),
            (vec![int(0), int(0), int(2)], rat(1, 9)),
            (vec![int(1), int(1), int(0)], rat(2, 9)),
            (vec![int(1), int(0), int(1)], rat(2, 9)),
            (vec![int(0), int(1), int(1)], rat(2, 9)),
        ],
        None,
    )
    .unwrap()
    .with_induced_grid();
    assert_eq!(
        multinomial.grid().unwrap().chain_lengths(),
        vec![3, 3, 3],
        "induced grid must be the chain {{0,1,2}} per cell"
    );
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert_eq!(multinomial.coordinate_covariance(i, j).unwrap(), rat(-2, 9));
    }
    let report = na_report(&multinomial, 1_000_000).unwrap();
    assert!(report.holds());
    pass(10, "multinomial(2 trials, 3 cells) is NA on the induced grid, Cov = -2/9 exactly");
}

#[test]
fn acceptance_11_invariance_laws() {
    for seed in 0..500u64 {
        let lengths: Vec<usize> = match seed % 4 {
            0 => vec![2, 2],
            1 => vec![2, 2, 2],
            2 => vec![3, 2],
            _ => vec![2, 2, 2, 2],
        };
        let n = lengths.len();
        let mu = random_measure(&lengths, split_seed(1111, seed), &RandomMeasureConfig::default())
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(1112, seed));

        // translation leaves every pairwise covariance fixed
        let shift: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-9i64..=9), 3)).collect();
        let translated = mu.translate_scale(&int(1), &shift).unwrap();
        // scaling by s multiplies them by s^2
        let s = rat(rng.gen_range(1i64..=7), rng.gen_range(1i64..=4));
        let scaled = mu
            .translate_scale(&s, &vec![int(0); n])
            .unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let base = mu.coordinate_covariance(i, j).unwrap();
                assert_eq!(
                    translated.coordinate_covariance(i, j).unwrap(),
                    base,
                    "seed {seed}"
                );
                assert_eq!(
                    scaled.coordinate_covariance(i, j).unwrap(),
                    &s * &s * base,
                    "seed {seed}"
                );
            }
        }

        // coordinate permutation preserves verdicts and margins
        let mut perm: Vec<usize> = (0..n).collect();
        for k in (1..n).rev() {
            perm.swap(k, rng.gen_range(0..=k));
        }
        let permuted = mu.permute_coordinates(&perm).unwrap();
        let nc_before = nc_report(&mu).unwrap();
        let nc_after = nc_report(&permuted).unwrap();
        assert_eq!(nc_before.verdict, nc_after.verdict, "seed {seed}");
        assert_eq!(nc_before.margin, nc_after.margin, "seed {seed}");
        let na_before = na_report(&mu, 1_000_000).unwrap();
        let na_after = na_report(&permuted, 1_000_000).unwrap();
        assert_eq!(na_before.verdict, na_after.verdict, "seed {seed}");
        assert_eq!(na_before.margin, na_after.margin, "seed {seed}");

        // Var(sum of coordinates) >= 0
        let f = coordinate_sum(n);
        assert!(!mu.covariance(&f, &f).unwrap().is_negative(), "seed {seed}");
    }
    pass(11, "500 measures: translation/scaling/permutation laws and Var(sum) >= 0 all exact");
}
