//! Builders for the concrete measure families used as fixtures and
//! counterexample seeds.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::measure::{DiscreteMeasure, Grid, MeasureError};
use crate::rational::{rat, Rational};

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("weights must be strictly positive and sum to exactly 1: {0}")]
    WeightValidation(String),
    #[error("corner parameter h must lie strictly between 0 and 1/2")]
    HOutOfRange,
    #[error("penalty parameter q must lie in (0, 1]")]
    QOutOfRange,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Measure supported on the standard basis vectors of the cube: atom
/// `weights[i]` at `e_i`. Every such measure is strictly NA in the
/// almost-sure sense, with pairwise covariances exactly `-w_i w_j`.
pub fn lemma1_measure(
    n: usize,
    weights: &[Rational],
) -> Result<DiscreteMeasure, ConstructionError> {
    if weights.len() != n || n == 0 {
        return Err(ConstructionError::WeightValidation(format!(
            "expected {n} weights, got {}",
            weights.len()
        )));
    }
    let mut total = Rational::zero();
    for w in weights {
        if !w.is_positive() {
            return Err(ConstructionError::WeightValidation(
                "weights must be strictly positive".into(),
            ));
        }
        total += w;
    }
    if !total.is_one() {
        return Err(ConstructionError::WeightValidation(format!(
            "weights sum to {total}"
        )));
    }
    let atoms = weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut coords = vec![Rational::zero(); n];
            coords[i] = Rational::one();
            (coords, w.clone())
        })
        .collect();
    Ok(DiscreteMeasure::new(n, atoms, Some(Grid::unit_cube(n)))?)
}

/// Uniform weights helper for [`lemma1_measure`].
pub fn lemma1_uniform(n: usize) -> Result<DiscreteMeasure, ConstructionError> {
    let w = Rational::new(1.into(), (n as i64).into());
    lemma1_measure(n, &vec![w; n])
}

/// A pair of strictly NA cube measures whose midpoint mixture is not NA.
///
/// `mu_high` concentrates near `(1,1)`, `nu_low` near `(0,0)`, each with
/// `Cov(x1, x2) = -h^2`; the `lambda = 1/2` mixture has covariance
/// `1/4 - h`, positive for `h < 1/4`.
#[derive(Debug, Clone)]
pub struct CornerPair {
    pub h: Rational,
    pub mu_high: DiscreteMeasure,
    pub nu_low: DiscreteMeasure,
}

pub fn skewed_corner_pair(h: &Rational) -> Result<CornerPair, ConstructionError> {
    if !h.is_positive() || h >= &rat(1, 2) {
        return Err(ConstructionError::HOutOfRange);
    }
    let bulk = Rational::one() - h - h;
    let grid = Grid::unit_cube(2);
    let mu_high = DiscreteMeasure::new(
        2,
        vec![
            (vec![Rational::one(), Rational::one()], bulk.clone()),
            (vec![Rational::one(), Rational::zero()], h.clone()),
            (vec![Rational::zero(), Rational::one()], h.clone()),
        ],
        Some(grid.clone()),
    )?;
    let nu_low = DiscreteMeasure::new(
        2,
        vec![
            (vec![Rational::zero(), Rational::zero()], bulk),
            (vec![Rational::one(), Rational::zero()], h.clone()),
            (vec![Rational::zero(), Rational::one()], h.clone()),
        ],
        Some(grid),
    )?;
    Ok(CornerPair {
        h: h.clone(),
        mu_high,
        nu_low,
    })
}

/// Full-support cube measure with weight proportional to
/// `q^(ones(x) choose 2)`: every additional coordinate pair set to 1 costs
/// a factor of `q`. At `q = 1` this is the uniform product measure; for
/// `q < 1` it is a strict-NA candidate with full support.
pub fn pairwise_penalty_measure(
    n: usize,
    q: &Rational,
) -> Result<DiscreteMeasure, ConstructionError> {
    if !q.is_positive() || q > &Rational::one() {
        return Err(ConstructionError::QOutOfRange);
    }
    if n == 0 {
        return Err(ConstructionError::ParameterOutOfRange("n must be >= 1".into()));
    }
    let mut raw = Vec::with_capacity(1 << n);
    let mut total = Rational::zero();
    for point in 0u32..(1 << n) {
        let ones = point.count_ones() as u64;
        let exponent = ones * ones.saturating_sub(1) / 2;
        let mut weight = Rational::one();
        for _ in 0..exponent {
            weight *= q;
        }
        total += &weight;
        raw.push((point, weight));
    }
    let atoms = raw
        .into_iter()
        .map(|(point, weight)| {
            let coords = (0..n)
                .map(|bit| {
                    if point & (1 << bit) != 0 {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            (coords, weight / &total)
        })
        .collect();
    Ok(DiscreteMeasure::new(n, atoms, Some(Grid::unit_cube(n)))?)
}

/// Result of injecting the symmetric two-point measure
/// `nu_c = (delta_{-c*1} + delta_{c*1}) / 2` into `mu`.
#[derive(Debug, Clone)]
pub struct Injection {
    /// `alpha * mu + (1 - alpha) * nu_c`; carries no grid since `nu_c`
    /// leaves the cube.
    pub measure: DiscreteMeasure,
    /// Radicand of the smallest `c*` for which every coordinate pair of the
    /// mixture has nonnegative covariance: `c >= c*` iff `c^2 >= radicand`.
    /// `None` when the dimension admits no pairs.
    pub radicand: Option<Rational>,
}

/// Mixes `mu` with a heavy comonotone two-point measure at `±c*(1,..,1)`.
/// The mixture sits within total variation `2(1 - alpha)` of `mu` for every
/// `c`, yet turns positively correlated once `c^2` passes the radicand:
/// this defeats any total-variation interior for NC on unbounded support.
pub fn inject_positive_correlation(
    mu: &DiscreteMeasure,
    alpha: &Rational,
    c: &Rational,
) -> Result<Injection, ConstructionError> {
    if !alpha.is_positive() || alpha >= &Rational::one() {
        return Err(ConstructionError::ParameterOutOfRange(
            "alpha must lie strictly between 0 and 1".into(),
        ));
    }
    if !c.is_positive() {
        return Err(ConstructionError::ParameterOutOfRange(
            "c must be strictly positive".into(),
        ));
    }
    let n = mu.dimension();
    let half = rat(1, 2);
    let spike = DiscreteMeasure::new(
        n,
        vec![
            (vec![-c.clone(); n], half.clone()),
            (vec![c.clone(); n], half),
        ],
        None,
    )?;
    let measure = mu.without_grid().mix(&spike, alpha)?;

    // Cov_{mixture}(x_i, x_j) = alpha*E_mu[x_i x_j] + (1-alpha)c^2
    //                           - alpha^2 E_mu[x_i] E_mu[x_j],
    // so the pair needs c^2 >= (alpha^2 E_i E_j - alpha E_ij) / (1 - alpha).
    let radicand = if n < 2 {
        None
    } else {
        let one_minus = Rational::one() - alpha;
        let mut means = Vec::with_capacity(n);
        for i in 0..n {
            let mut exps = vec![0u32; n];
            exps[i] = 1;
            means.push(mu.moment(&exps)?);
        }
        let mut worst = Rational::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut exps = vec![0u32; n];
                exps[i] += 1;
                exps[j] += 1;
                let cross = mu.moment(&exps)?;
                let needed = (alpha * alpha * &means[i] * &means[j] - alpha * cross) / &one_minus;
                if needed > worst {
                    worst = needed;
                }
            }
        }
        Some(worst)
    };
    Ok(Injection { measure, radicand })
}
