//! Conjugate Bayesian inference for the failure rates under the Beta-Gamma
//! prior: the total rate is Gamma, the rate fraction is independently Beta,
//! so the posterior is sampled exactly (no Markov chain).

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Gamma};

use crate::error::{Error, Result};
use crate::intervals::percentile;
use crate::rngs::replication_rng;
use crate::sample::GphcSample;

/// Hyperparameters of the Beta-Gamma law on (lambda1, lambda2): the total
/// rate lambda1 + lambda2 is Gamma(a0, b0) and the fraction
/// lambda1/(lambda1+lambda2) is Beta(a1, a2), independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGammaParams {
    pub b0: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl BetaGammaParams {
    pub fn new(b0: f64, a0: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(a0 > 0.0 && a1 > 0.0 && a2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shape hyperparameters must be positive, got a0={a0}, a1={a1}, a2={a2}"
            )));
        }
        if !(b0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rate hyperparameter must be nonnegative, got b0={b0}"
            )));
        }
        Ok(BetaGammaParams { b0, a0, a1, a2 })
    }

    /// The matching prior (b0=0, a0=2, a1=a2=1): Bayes point estimates
    /// coincide with the MLEs.
    pub fn matching_prior() -> Self {
        BetaGammaParams {
            b0: 0.0,
            a0: 2.0,
            a1: 1.0,
            a2: 1.0,
        }
    }

    /// Proper enough to draw from.
    pub fn is_proper(&self) -> bool {
        self.b0 > 0.0
    }
}

/// Conjugate update: BG(b0 + W, a0 + J, a1 + D1, a2 + D2).
pub fn posterior(prior: &BetaGammaParams, sample: &GphcSample) -> BetaGammaParams {
    BetaGammaParams {
        b0: prior.b0 + sample.w,
        a0: prior.a0 + (sample.d1 + sample.d2) as f64,
        a1: prior.a1 + sample.d1 as f64,
        a2: prior.a2 + sample.d2 as f64,
    }
}

/// Posterior means of the mean lifetimes under squared error loss:
/// `E(1/lambda_c)`.
pub fn bayes_estimates(post: &BetaGammaParams) -> Result<(f64, f64)> {
    if post.a1 <= 1.0 {
        return Err(Error::NonintegrableMean("theta1"));
    }
    if post.a2 <= 1.0 {
        return Err(Error::NonintegrableMean("theta2"));
    }
    if post.a0 <= 1.0 {
        return Err(Error::NonintegrableMean("the total-rate reciprocal"));
    }
    // Grouped so that the matching prior's ratio (a1+a2-1)/(a0-1) = 1 is
    // exact and the estimates reduce to W/D bit-for-bit.
    let shared = post.b0 * ((post.a1 + post.a2 - 1.0) / (post.a0 - 1.0));
    Ok((shared / (post.a1 - 1.0), shared / (post.a2 - 1.0)))
}

/// Posterior variances of the mean lifetimes.
pub fn posterior_variances(post: &BetaGammaParams) -> Result<(f64, f64)> {
    if post.a1 <= 2.0 || post.a2 <= 2.0 {
        return Err(Error::NonintegrableVariance(if post.a1 <= 2.0 {
            "theta1"
        } else {
            "theta2"
        }));
    }
    if post.a0 <= 2.0 {
        return Err(Error::NonintegrableVariance("the total-rate reciprocal"));
    }
    let s = post.a1 + post.a2;
    let var = |ak: f64| {
        let a = post.b0 * post.b0 * (s - 1.0) / ((post.a0 - 1.0) * (ak - 1.0));
        let b =
            (s - 2.0) / ((post.a0 - 2.0) * (ak - 2.0)) - (s - 1.0) / ((post.a0 - 1.0) * (ak - 1.0));
        a * b
    };
    Ok((var(post.a1), var(post.a2)))
}

/// Exact independent posterior draws of (lambda1, lambda2): the total rate is
/// Gamma(a0, b0), the fraction Beta(a1, a2).
pub fn sample_posterior(
    post: &BetaGammaParams,
    n_draws: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut rng = replication_rng(seed, 0);
    sample_posterior_with(post, n_draws, &mut rng)
}

pub fn sample_posterior_with<R: Rng + ?Sized>(
    post: &BetaGammaParams,
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    if !post.is_proper() {
        return Err(Error::ImproperPosterior(format!(
            "rate hyperparameter b0 = {} must be positive to draw",
            post.b0
        )));
    }
    let total = GammaDist::new(post.a0, 1.0 / post.b0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let frac =
        BetaDist::new(post.a1, post.a2).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((0..n_draws)
        .map(|_| {
            let u: f64 = total.sample(rng);
            let v: f64 = frac.sample(rng);
            (u * v, u * (1.0 - v))
        })
        .collect())
}

/// Joint credible set: rectangle in (total rate, rate fraction) coordinates,
/// a trapezoid in the rate plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleSet {
    /// Bounds A < B on lambda1 + lambda2.
    pub sum_lower: f64,
    pub sum_upper: f64,
    /// Bounds C < D on lambda1 / (lambda1 + lambda2).
    pub frac_lower: f64,
    pub frac_upper: f64,
    pub alpha: f64,
    pub alpha_sum: f64,
    pub alpha_frac: f64,
}

/// How to split the overall level between the two coordinates, subject to
/// `(1 - alpha_sum)(1 - alpha_frac) = 1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitPolicy {
    /// alpha_sum = alpha_frac = 1 - sqrt(1 - alpha).
    Symmetric,
    /// Explicit alpha_sum; alpha_frac follows from the constraint.
    SumLevel(f64),
}

pub fn credible_set(post: &BetaGammaParams, alpha: f64, split: SplitPolicy) -> Result<CredibleSet> {
    if !post.is_proper() {
        return Err(Error::ImproperPosterior("credible set needs b0 > 0".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let (a_sum, a_frac) = match split {
        SplitPolicy::Symmetric => {
            let a = 1.0 - (1.0 - alpha).sqrt();
            (a, a)
        }
        SplitPolicy::SumLevel(a1) => {
            if !(a1 > 0.0 && a1 < alpha) {
                return Err(Error::InvalidArgument(format!(
                    "the sum-coordinate level must lie in (0, alpha), got {a1}"
                )));
            }
            (a1, 1.0 - (1.0 - alpha) / (1.0 - a1))
        }
    };
    let total = Gamma::new(post.a0, post.b0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let frac = Beta::new(post.a1, post.a2).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(CredibleSet {
        sum_lower: total.inverse_cdf(a_sum / 2.0),
        sum_upper: total.inverse_cdf(1.0 - a_sum / 2.0),
        frac_lower: frac.inverse_cdf(a_frac / 2.0),
        frac_upper: frac.inverse_cdf(1.0 - a_frac / 2.0),
        alpha,
        alpha_sum: a_sum,
        alpha_frac: a_frac,
    })
}

impl CredibleSet {
    pub fn contains_rates(&self, lambda1: f64, lambda2: f64) -> bool {
        let u = lambda1 + lambda2;
        let v = lambda1 / u;
        self.sum_lower < u && u < self.sum_upper && self.frac_lower < v && v < self.frac_upper
    }

    /// Boundary curves of the set in the mean-lifetime plane
    /// (theta1, theta2) = (1/lambda1, 1/lambda2), `points` vertices per
    /// curve. Curve ids: 0 and 1 are the constant-total-rate arcs
    /// theta1 + theta2 = A * theta1 * theta2 (resp. B); 2 and 3 are the
    /// constant-fraction rays.
    pub fn boundary_curves(&self, points: usize) -> Vec<(f64, f64, u8)> {
        let mut out = Vec::with_capacity(4 * points);
        let to_theta = |u: f64, v: f64| (1.0 / (u * v), 1.0 / (u * (1.0 - v)));
        for (id, &u) in [self.sum_lower, self.sum_upper].iter().enumerate() {
            for s in 0..points {
                let v = self.frac_lower
                    + (self.frac_upper - self.frac_lower) * s as f64 / (points - 1) as f64;
                let (t1, t2) = to_theta(u, v);
                out.push((t1, t2, id as u8));
            }
        }
        for (id, &v) in [self.frac_lower, self.frac_upper].iter().enumerate() {
            for s in 0..points {
                let u = self.sum_lower
                    + (self.sum_upper - self.sum_lower) * s as f64 / (points - 1) as f64;
                let (t1, t2) = to_theta(u, v);
                out.push((t1, t2, 2 + id as u8));
            }
        }
        out
    }
}

/// Functions of the rate pair for which HPD intervals are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GFunction {
    Theta1,
    Theta2,
    Lambda1,
    Lambda2,
    /// lambda1 / lambda2.
    RateRatio,
}

impl GFunction {
    pub fn apply(self, lambda1: f64, lambda2: f64) -> f64 {
        match self {
            GFunction::Theta1 => 1.0 / lambda1,
            GFunction::Theta2 => 1.0 / lambda2,
            GFunction::Lambda1 => lambda1,
            GFunction::Lambda2 => lambda2,
            GFunction::RateRatio => lambda1 / lambda2,
        }
    }
}

/// Shortest interval containing a (1 - alpha) fraction of the sorted
/// transformed draws.
pub fn hpd_from_draws(sorted: &[f64], alpha: f64) -> (f64, f64) {
    let n = sorted.len();
    let window = ((1.0 - alpha) * n as f64).ceil() as usize;
    let window = window.clamp(1, n);
    let mut best = (sorted[0], sorted[n - 1]);
    let mut best_len = f64::INFINITY;
    for i in 0..=(n - window) {
        let len = sorted[i + window - 1] - sorted[i];
        if len < best_len {
            best_len = len;
            best = (sorted[i], sorted[i + window - 1]);
        }
    }
    best
}

/// Equal-tail interval from sorted draws.
pub fn equal_tail_from_draws(sorted: &[f64], alpha: f64) -> (f64, f64) {
    (
        percentile(sorted, alpha / 2.0),
        percentile(sorted, 1.0 - alpha / 2.0),
    )
}

/// HPD credible interval of `g(lambda1, lambda2)` by direct posterior
/// sampling.
pub fn hpd_interval(
    post: &BetaGammaParams,
    g: GFunction,
    alpha: f64,
    n_draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    hpd_interval_of(post, |l1, l2| g.apply(l1, l2), alpha, n_draws, seed)
}

/// HPD interval for an arbitrary function of the rates.
pub fn hpd_interval_of(
    post: &BetaGammaParams,
    g: impl Fn(f64, f64) -> f64,
    alpha: f64,
    n_draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let draws = sample_posterior(post, n_draws, seed)?;
    let mut vals: Vec<f64> = draws.iter().map(|&(l1, l2)| g(l1, l2)).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(hpd_from_draws(&vals, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::hoel_gphc_sample;
    use approx::assert_relative_eq;

    fn real_posterior() -> BetaGammaParams {
        posterior(&BetaGammaParams::matching_prior(), &hoel_gphc_sample())
    }

    #[test]
    fn posterior_update_real_data() {
        let post = real_posterior();
        assert_eq!(post.b0, 28962.0);
        assert_eq!(post.a0, 27.0);
        assert_eq!(post.a1, 8.0);
        assert_eq!(post.a2, 19.0);
    }

    #[test]
    fn empty_data_returns_prior() {
        let mut sample = hoel_gphc_sample();
        sample.observations.clear();
        sample.d1 = 0;
        sample.d2 = 0;
        sample.j = 0;
        sample.w = 0.0;
        let prior = BetaGammaParams::new(1.0, 46.0 / 13.0, 2.3, 2.0).unwrap();
        assert_eq!(posterior(&prior, &sample), prior);
    }

    #[test]
    fn conjugacy_chains_through_pooled_statistics() {
        let s = hoel_gphc_sample();
        let prior = BetaGammaParams::new(0.5, 3.0, 1.5, 2.5).unwrap();
        let twice = posterior(&posterior(&prior, &s), &s);
        let pooled = BetaGammaParams {
            b0: prior.b0 + 2.0 * s.w,
            a0: prior.a0 + 2.0 * (s.d1 + s.d2) as f64,
            a1: prior.a1 + 2.0 * s.d1 as f64,
            a2: prior.a2 + 2.0 * s.d2 as f64,
        };
        assert_eq!(twice, pooled);
    }

    #[test]
    fn matching_prior_estimates_equal_mles() {
        let post = real_posterior();
        let (t1, t2) = bayes_estimates(&post).unwrap();
        assert_eq!(t1, 28962.0 / 7.0);
        assert_eq!(t2, 1609.0);
    }

    #[test]
    fn informative_prior_means() {
        // Hyperparameters (b0=1, a0=46/13, a1=2.3, a2=2) give prior mean
        // lifetimes E(theta1) = 1 and E(theta2) = 1.3.
        let prior = BetaGammaParams::new(1.0, 46.0 / 13.0, 2.3, 2.0).unwrap();
        let (t1, t2) = bayes_estimates(&prior).unwrap();
        assert_relative_eq!(t1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(t2, 1.3, max_relative = 1e-12);
    }

    #[test]
    fn nonintegrable_mean_detected() {
        let prior = BetaGammaParams::matching_prior();
        assert!(matches!(
            bayes_estimates(&prior),
            Err(Error::NonintegrableMean(_))
        ));
    }

    #[test]
    fn variance_positive_and_symmetric() {
        let post = real_posterior();
        let (v1, v2) = posterior_variances(&post).unwrap();
        assert!(v1 > 0.0 && v2 > 0.0);
        assert_relative_eq!(v1, 2853052.5306122447, max_relative = 1e-10);
        assert_relative_eq!(v2, 152287.11764705894, max_relative = 1e-10);
        let swapped = BetaGammaParams {
            a1: post.a2,
            a2: post.a1,
            ..post
        };
        let (s1, s2) = posterior_variances(&swapped).unwrap();
        assert_relative_eq!(s1, v2, max_relative = 1e-12);
        assert_relative_eq!(s2, v1, max_relative = 1e-12);
    }

    #[test]
    fn posterior_draw_moments_match_analytics() {
        let post = real_posterior();
        let draws = sample_posterior(&post, 1_000_000, 5).unwrap();
        let (t1b, _) = bayes_estimates(&post).unwrap();
        let mean1 = draws.iter().map(|&(l1, _)| 1.0 / l1).sum::<f64>() / draws.len() as f64;
        assert_relative_eq!(mean1, t1b, max_relative = 0.01);
        let (v1, _) = posterior_variances(&post).unwrap();
        let var1 = draws
            .iter()
            .map(|&(l1, _)| (1.0 / l1 - mean1).powi(2))
            .sum::<f64>()
            / draws.len() as f64;
        assert_relative_eq!(var1, v1, max_relative = 0.01);
    }

    #[test]
    fn posterior_factor_independence() {
        let post = real_posterior();
        let draws = sample_posterior(&post, 100_000, 11).unwrap();
        let pairs: Vec<(f64, f64)> = draws
            .iter()
            .map(|&(l1, l2)| (l1 + l2, l1 / (l1 + l2)))
            .collect();
        let n = pairs.len() as f64;
        let (mu, mv) = (
            pairs.iter().map(|p| p.0).sum::<f64>() / n,
            pairs.iter().map(|p| p.1).sum::<f64>() / n,
        );
        let (su, sv) = (
            (pairs.iter().map(|p| (p.0 - mu).powi(2)).sum::<f64>() / n).sqrt(),
            (pairs.iter().map(|p| (p.1 - mv).powi(2)).sum::<f64>() / n).sqrt(),
        );
        let corr = pairs.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum::<f64>() / (n * su * sv);
        assert!(corr.abs() < 0.01, "corr {corr}");
    }

    #[test]
    fn improper_posterior_rejected_for_sampling() {
        let prior = BetaGammaParams::matching_prior();
        assert!(matches!(
            sample_posterior(&prior, 10, 0),
            Err(Error::ImproperPosterior(_))
        ));
    }

    #[test]
    fn credible_set_levels_and_coverage() {
        let post = real_posterior();
        let set = credible_set(&post, 0.05, SplitPolicy::Symmetric).unwrap();
        assert_relative_eq!(
            (1.0 - set.alpha_sum) * (1.0 - set.alpha_frac),
            0.95,
            epsilon = 1e-12
        );
        assert!(set.sum_lower < set.sum_upper);
        assert!(set.frac_lower < set.frac_upper);
        let draws = sample_posterior(&post, 100_000, 3).unwrap();
        let inside = draws
            .iter()
            .filter(|&&(l1, l2)| set.contains_rates(l1, l2))
            .count() as f64
            / draws.len() as f64;
        let se = (0.95f64 * 0.05 / 100_000.0).sqrt();
        assert!((inside - 0.95).abs() < 3.0 * se, "coverage {inside}");
    }

    #[test]
    fn credible_set_grows_without_bound_as_alpha_shrinks() {
        let post = real_posterior();
        let tight = credible_set(&post, 0.5, SplitPolicy::Symmetric).unwrap();
        let loose = credible_set(&post, 1e-6, SplitPolicy::Symmetric).unwrap();
        assert!(loose.sum_lower < tight.sum_lower);
        assert!(loose.sum_upper > tight.sum_upper);
        assert!(loose.frac_lower < tight.frac_lower);
        assert!(loose.frac_upper > tight.frac_upper);
    }

    #[test]
    fn boundary_curves_have_four_ids() {
        let post = real_posterior();
        let set = credible_set(&post, 0.05, SplitPolicy::Symmetric).unwrap();
        let pts = set.boundary_curves(50);
        assert_eq!(pts.len(), 200);
        for id in 0..4u8 {
            assert_eq!(pts.iter().filter(|p| p.2 == id).count(), 50);
        }
        // Arc points satisfy theta1 + theta2 = A theta1 theta2 for id 0.
        for &(t1, t2, _) in pts.iter().filter(|p| p.2 == 0) {
            assert_relative_eq!(t1 + t2, set.sum_lower * t1 * t2, max_relative = 1e-9);
        }
    }

    #[test]
    fn joint_density_factorizes_into_gamma_times_beta() {
        // Oracle: the joint Beta-Gamma density written out directly; the
        // factorized form is Gamma(u) * Beta(v) / u with u = l1 + l2,
        // v = l1 / u.
        use statrs::distribution::Continuous;
        use statrs::function::gamma::ln_gamma;
        let p = BetaGammaParams::new(1.7, 4.2, 2.3, 2.0).unwrap();
        let joint = |l1: f64, l2: f64| {
            let u = l1 + l2;
            (ln_gamma(p.a1 + p.a2) - ln_gamma(p.a0)).exp()
                * (p.b0 * u).powf(p.a0 - p.a1 - p.a2)
                * (p.b0.powf(p.a1) / ln_gamma(p.a1).exp())
                * l1.powf(p.a1 - 1.0)
                * (-p.b0 * l1).exp()
                * (p.b0.powf(p.a2) / ln_gamma(p.a2).exp())
                * l2.powf(p.a2 - 1.0)
                * (-p.b0 * l2).exp()
        };
        let gamma = Gamma::new(p.a0, p.b0).unwrap();
        let beta = Beta::new(p.a1, p.a2).unwrap();
        for i in 1..=6 {
            for jdx in 1..=6 {
                let (l1, l2) = (0.3 * i as f64, 0.25 * jdx as f64);
                let u = l1 + l2;
                let v = l1 / u;
                let factored = gamma.pdf(u) * beta.pdf(v) / u;
                assert_relative_eq!(joint(l1, l2), factored, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn hpd_no_longer_than_equal_tail() {
        let post = real_posterior();
        let draws = sample_posterior(&post, 50_000, 21).unwrap();
        for g in [GFunction::Theta1, GFunction::Theta2, GFunction::RateRatio] {
            let mut vals: Vec<f64> = draws.iter().map(|&(l1, l2)| g.apply(l1, l2)).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let hpd = hpd_from_draws(&vals, 0.05);
            let eq = equal_tail_from_draws(&vals, 0.05);
            assert!(hpd.1 - hpd.0 <= eq.1 - eq.0 + 1e-12);
        }
    }

    #[test]
    fn hpd_approaches_equal_tail_for_symmetric_posteriors() {
        // Large, balanced shapes make the Beta factor symmetric; the HPD and
        // equal-tail intervals of the fraction then coincide.
        let post = BetaGammaParams::new(500.0, 900.0, 400.0, 400.0).unwrap();
        let draws = sample_posterior(&post, 200_000, 2).unwrap();
        let mut vals: Vec<f64> = draws.iter().map(|&(l1, l2)| l1 / (l1 + l2)).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let hpd = hpd_from_draws(&vals, 0.05);
        let eq = equal_tail_from_draws(&vals, 0.05);
        assert!((hpd.0 - eq.0).abs() < 5e-4, "{hpd:?} vs {eq:?}");
        assert!((hpd.1 - eq.1).abs() < 5e-4, "{hpd:?} vs {eq:?}");
    }
}
