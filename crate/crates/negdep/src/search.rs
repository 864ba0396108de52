//! Counterexample synthesis on top of exact LP feasibility:
//! weak-neighborhood non-NA measures, mixture non-convexity witnesses, and
//! random probes of total-variation balls.

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::checks::{
    na_report_with, nc_report, CheckError, CheckOptions, DependenceReport,
};
use crate::function::FunctionSpec;
use crate::lp::{lp_feasible, LinearProgram, LpError, LpOutcome};
use crate::measure::{DiscreteMeasure, MeasureError};
use crate::rational::{format_rational, rat, Rational};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("operands have dimensions {left} and {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("no measure on the candidate support matches the constraints; enlarge the support")]
    InfeasibleOnSupport,
    #[error("target pair cannot carry positive covariance: coordinate {coordinate} is constant on the candidate support")]
    TargetNotPositive { coordinate: usize },
    #[error("a declared grid is required")]
    GridRequired,
    #[error("input measure {which} fails the negative-correlation precondition")]
    InputNotNegativelyCorrelated { which: &'static str },
    #[error("radius must be strictly positive")]
    NonpositiveRadius,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

// ---------------------------------------------------------------------------
// weak-neighborhood counterexample
// ---------------------------------------------------------------------------

/// A measure that matches `mu` on every test integral (hence lies in every
/// weak neighborhood of `mu` cut out by those tests) yet is not NA.
#[derive(Debug, Clone)]
pub struct WeakCounterexample {
    pub measure: DiscreteMeasure,
    /// The covariance forced onto the target pair (strictly positive).
    pub template_covariance: Rational,
    /// NA report of the output; always a failure.
    pub na_failure: DependenceReport,
}

/// Builds a non-NA measure inside the weak neighborhood of `mu` given by
/// the test functions, for any tolerances.
///
/// The candidate support defaults to the full grid of `mu`; an explicit
/// support must also lie on that grid (the output is NA-checked, which
/// needs the grid). On top of the exact test-moment constraints, the
/// target coordinate pair `(i, j)` is pinned to the moments of a
/// comonotone-leaning template on the extreme levels (weights 3/8 on the
/// two aligned corners, 1/8 on the two others), which forces covariance
/// `(hi_i - lo_i)(hi_j - lo_j)/8 > 0`.
pub fn weak_counterexample(
    mu: &DiscreteMeasure,
    tests: &[FunctionSpec],
    candidate_support: Option<Vec<Vec<Rational>>>,
    target_pair: (usize, usize),
    budget: u64,
) -> Result<WeakCounterexample, SearchError> {
    let grid = mu.grid().ok_or(SearchError::GridRequired)?;
    let (i, j) = target_pair;
    let support: Vec<Vec<Rational>> = match candidate_support {
        Some(points) => points,
        None => grid
            .enumerate_levels()
            .into_iter()
            .map(|levels| grid.embed(&levels))
            .collect(),
    };

    let lo_hi = |coordinate: usize| -> Result<(Rational, Rational), SearchError> {
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for point in &support {
            let value = &point[coordinate];
            if lo.as_ref().is_none_or(|l| value < l) {
                lo = Some(value.clone());
            }
            if hi.as_ref().is_none_or(|h| value > h) {
                hi = Some(value.clone());
            }
        }
        let (lo, hi) = (lo.expect("support nonempty"), hi.expect("support nonempty"));
        if lo == hi {
            return Err(SearchError::TargetNotPositive { coordinate });
        }
        Ok((lo, hi))
    };
    let (lo_i, hi_i) = lo_hi(i)?;
    let (lo_j, hi_j) = lo_hi(j)?;

    // template pair moments with covariance (hi_i-lo_i)(hi_j-lo_j)/8 > 0
    let half = rat(1, 2);
    let mean_i = (&lo_i + &hi_i) * &half;
    let mean_j = (&lo_j + &hi_j) * &half;
    let cross = rat(3, 8) * (&lo_i * &lo_j + &hi_i * &hi_j)
        + rat(1, 8) * (&lo_i * &hi_j + &hi_i * &lo_j);
    let template_covariance = &cross - &mean_i * &mean_j;

    // candidate points must evaluate under table tests: recover levels
    let point_levels: Vec<Option<Vec<usize>>> = support
        .iter()
        .map(|coords| {
            coords
                .iter()
                .enumerate()
                .map(|(c, v)| grid.level_of(c, v))
                .collect()
        })
        .collect();

    let mut program = LinearProgram::new(support.len());
    program.equality(vec![Rational::one(); support.len()], Rational::one());
    for test in tests {
        let mut row = Vec::with_capacity(support.len());
        for (point, levels) in support.iter().zip(&point_levels) {
            row.push(test.eval(point, levels.as_deref()).map_err(MeasureError::from)?);
        }
        let target = mu.expectation(test)?;
        program.equality(row, target);
    }
    let coordinate_row = |c: usize| -> Vec<Rational> {
        support.iter().map(|p| p[c].clone()).collect()
    };
    program.equality(coordinate_row(i), mean_i);
    program.equality(coordinate_row(j), mean_j);
    program.equality(
        support.iter().map(|p| &p[i] * &p[j]).collect(),
        cross,
    );

    let weights = match lp_feasible(&program)? {
        LpOutcome::Feasible(weights) => weights,
        LpOutcome::Infeasible { .. } => return Err(SearchError::InfeasibleOnSupport),
    };
    let atoms: Vec<(Vec<Rational>, Rational)> = support
        .into_iter()
        .zip(weights)
        .filter(|(_, w)| !w.is_zero())
        .collect();
    let measure = DiscreteMeasure::new(mu.dimension(), atoms, Some(grid.clone()))?;

    let na_failure = na_report_with(
        &measure,
        &CheckOptions {
            budget,
            early_exit: false,
            parallel: false,
        },
    )?;
    debug_assert!(!na_failure.holds());
    Ok(WeakCounterexample {
        measure,
        template_covariance,
        na_failure,
    })
}

// ---------------------------------------------------------------------------
// non-convexity witness
// ---------------------------------------------------------------------------

/// How mixture weights are searched.
#[derive(Debug, Clone)]
pub enum LambdaMode {
    /// Check `lambda = 1/2` first, then the exact vertex of the per-pair
    /// quadratic when it lies strictly inside (0, 1).
    Exact,
    /// Check the given mixture weights in order.
    Grid(Vec<Rational>),
}

/// Full accounting of one mixture covariance violation:
/// `Cov_mix = lambda(-eps1) + (1-lambda)(-eps2) + lambda(1-lambda)C~`
/// with `C~ = (A - B)(C - D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub lambda: Rational,
    /// Monitored coordinate pair (0-based).
    pub pair: (usize, usize),
    pub mixture_covariance: Rational,
    pub mean_f_mu: Rational,
    pub mean_f_nu: Rational,
    pub mean_g_mu: Rational,
    pub mean_g_nu: Rational,
    pub c_tilde: Rational,
    pub eps1: Rational,
    pub eps2: Rational,
}

impl WitnessReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "lambda": format_rational(&self.lambda),
            "pair": [self.pair.0 + 1, self.pair.1 + 1],
            "mixture_covariance": format_rational(&self.mixture_covariance),
            "A": format_rational(&self.mean_f_mu),
            "B": format_rational(&self.mean_f_nu),
            "C": format_rational(&self.mean_g_mu),
            "D": format_rational(&self.mean_g_nu),
            "C_tilde": format_rational(&self.c_tilde),
            "eps1": format_rational(&self.eps1),
            "eps2": format_rational(&self.eps2),
        })
    }
}

/// Searches mixtures of two NC measures for a positive pairwise covariance.
/// Monitors every coordinate pair; for each, evaluates the mixture
/// covariance through the exact identity and cross-checks it by direct
/// recomputation on the mixed measure. Returns the first violation in
/// iteration order, or `None` when the monitored family stays NC (in
/// particular whenever both measures share coordinate means, so that
/// `C~ = 0` for every pair).
pub fn nonconvex_witness(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    mode: &LambdaMode,
) -> Result<Option<WitnessReport>, SearchError> {
    if mu.dimension() != nu.dimension() {
        return Err(SearchError::DimensionMismatch {
            left: mu.dimension(),
            right: nu.dimension(),
        });
    }
    if !nc_report(mu)?.holds() {
        return Err(SearchError::InputNotNegativelyCorrelated { which: "mu" });
    }
    if !nc_report(nu)?.holds() {
        return Err(SearchError::InputNotNegativelyCorrelated { which: "nu" });
    }
    let n = mu.dimension();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = coordinate_mean(mu, i)?;
            let b = coordinate_mean(nu, i)?;
            let c = coordinate_mean(mu, j)?;
            let d = coordinate_mean(nu, j)?;
            let eps1 = -mu.coordinate_covariance(i, j)?;
            let eps2 = -nu.coordinate_covariance(i, j)?;
            let c_tilde = (&a - &b) * (&c - &d);

            let mixture_cov = |lambda: &Rational| -> Rational {
                let complement = Rational::one() - lambda;
                lambda * (-&eps1) + &complement * (-&eps2) + lambda * &complement * &c_tilde
            };

            let candidates: Vec<Rational> = match mode {
                LambdaMode::Grid(values) => values.clone(),
                LambdaMode::Exact => {
                    let mut list = vec![rat(1, 2)];
                    if !c_tilde.is_zero() {
                        // vertex of -C~ l^2 + (C~ - eps1 + eps2) l - eps2
                        let vertex = (&c_tilde - &eps1 + &eps2) / (rat(2, 1) * &c_tilde);
                        if vertex.is_positive()
                            && vertex < Rational::one()
                            && vertex != rat(1, 2)
                        {
                            list.push(vertex);
                        }
                    }
                    list
                }
            };
            for lambda in candidates {
                if !lambda.is_positive() || lambda >= Rational::one() {
                    continue;
                }
                let by_identity = mixture_cov(&lambda);
                if by_identity.is_positive() {
                    let mixture = mu.mix(nu, &lambda)?;
                    let direct = mixture.coordinate_covariance(i, j)?;
                    assert_eq!(
                        direct, by_identity,
                        "mixture covariance identity must recompute exactly"
                    );
                    return Ok(Some(WitnessReport {
                        lambda,
                        pair: (i, j),
                        mixture_covariance: direct,
                        mean_f_mu: a,
                        mean_f_nu: b,
                        mean_g_mu: c,
                        mean_g_nu: d,
                        c_tilde,
                        eps1,
                        eps2,
                    }));
                }
            }
        }
    }
    Ok(None)
}

fn coordinate_mean(measure: &DiscreteMeasure, i: usize) -> Result<Rational, MeasureError> {
    let mut exps = vec![0u32; measure.dimension()];
    exps[i] = 1;
    measure.moment(&exps)
}

// ---------------------------------------------------------------------------
// total-variation ball probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeProperty {
    Nc,
    Na,
}

impl ProbeProperty {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeProperty::Nc => "nc",
            ProbeProperty::Na => "na",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub property: ProbeProperty,
    pub radius: Rational,
    pub trials: u64,
    pub passes: u64,
    pub fails: u64,
    /// Lowest-index failing trial: (trial index, the measure, its report).
    pub first_counterexample: Option<(u64, DiscreteMeasure, DependenceReport)>,
}

impl ProbeReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "property": self.property.as_str(),
            "radius": format_rational(&self.radius),
            "trials": self.trials,
            "passes": self.passes,
            "fails": self.fails,
            "first_counterexample": self.first_counterexample.as_ref().map(|(trial, measure, report)| json!({
                "trial": trial,
                "measure": crate::json::measure_to_json_value(measure),
                "report": report.to_json(),
            })),
        })
    }
}

/// Samples random measures within the closed total-variation ball of the
/// given radius around `mu` and checks each for the property.
///
/// Directions live in the zero-sum space over the grid points of `mu`
/// (support points when no grid is declared and the property is NC):
/// integer coefficients, forced nonnegative off the support, balanced to
/// zero over the support, rescaled so the step reaches the requested
/// radius, then clipped to keep all weights nonnegative. The resulting
/// sample satisfies `tv_distance(mu, nu) <= radius` exactly.
pub fn tv_interior_probe(
    mu: &DiscreteMeasure,
    radius: &Rational,
    trials: u64,
    seed: u64,
    property: ProbeProperty,
    budget: u64,
) -> Result<ProbeReport, SearchError> {
    if !radius.is_positive() {
        return Err(SearchError::NonpositiveRadius);
    }
    let candidate_points: Vec<Vec<Rational>> = match mu.grid() {
        Some(grid) => grid
            .enumerate_levels()
            .into_iter()
            .map(|levels| grid.embed(&levels))
            .collect(),
        None => {
            if property == ProbeProperty::Na {
                return Err(SearchError::GridRequired);
            }
            mu.atoms()
                .iter()
                .map(|(point, _)| point.coords().to_vec())
                .collect()
        }
    };
    let base_weights: Vec<Rational> = candidate_points
        .iter()
        .map(|coords| mu.weight_of(coords))
        .collect();
    let support_count = base_weights.iter().filter(|w| !w.is_zero()).count();

    type TrialOutcome = (bool, Option<(DiscreteMeasure, DependenceReport)>);
    let run_trial = |trial: u64| -> Result<TrialOutcome, SearchError> {
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, trial));
        // raw integer direction; off-support points may only gain mass,
        // and the support absorbs the balance so the total stays zero
        let mut raw: Vec<i64> = Vec::with_capacity(candidate_points.len());
        for weight in &base_weights {
            let mut step = rng.gen_range(-8i64..=8);
            if weight.is_zero() {
                step = step.abs();
            }
            raw.push(step);
        }
        let total_raw: i64 = raw.iter().sum();
        let balance = Rational::new(total_raw.into(), (support_count as i64).into());
        let mut direction: Vec<Rational> = Vec::with_capacity(candidate_points.len());
        for (weight, &step) in base_weights.iter().zip(&raw) {
            let mut d = Rational::from_integer(step.into());
            if !weight.is_zero() {
                d -= &balance;
            }
            direction.push(d);
        }

        let length: Rational = direction.iter().map(|d| d.abs()).sum();
        let nu = if length.is_zero() {
            mu.clone()
        } else {
            // rescale to a random fraction of the radius (so the whole ball
            // gets sampled, not just its boundary sphere), then clip
            // against the simplex boundary
            let fraction = rat(rng.gen_range(1..=16), 16);
            let mut step = radius * fraction / &length;
            for (weight, d) in base_weights.iter().zip(&direction) {
                if d.is_negative() {
                    let cap = weight / -d;
                    if cap < step {
                        step = cap;
                    }
                }
            }
            let atoms: Vec<(Vec<Rational>, Rational)> = candidate_points
                .iter()
                .zip(base_weights.iter().zip(&direction))
                .map(|(coords, (w, d))| (coords.clone(), w + &step * d))
                .filter(|(_, w)| !w.is_zero())
                .collect();
            DiscreteMeasure::new(mu.dimension(), atoms, mu.grid().cloned())?
        };
        debug_assert!(mu.tv_distance(&nu).unwrap() <= *radius);

        let report = match property {
            ProbeProperty::Nc => nc_report(&nu)?,
            ProbeProperty::Na => na_report_with(
                &nu,
                &CheckOptions {
                    budget,
                    early_exit: true,
                    parallel: false,
                },
            )?,
        };
        if report.holds() {
            Ok((true, None))
        } else {
            Ok((false, Some((nu, report))))
        }
    };

    let results: Result<Vec<TrialOutcome>, SearchError> =
        (0..trials).into_par_iter().map(run_trial).collect();
    let results = results?;

    let mut passes = 0u64;
    let mut fails = 0u64;
    let mut first_counterexample = None;
    for (trial, (passed, failure)) in results.into_iter().enumerate() {
        if passed {
            passes += 1;
        } else {
            fails += 1;
            if first_counterexample.is_none() {
                let (measure, report) = failure.expect("failing trials carry a witness");
                first_counterexample = Some((trial as u64, measure, report));
            }
        }
    }
    Ok(ProbeReport {
        property,
        radius: radius.clone(),
        trials,
        passes,
        fails,
        first_counterexample,
    })
}

/// SplitMix64 step, used to derive independent per-trial seeds.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
