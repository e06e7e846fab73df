//! Likelihood evaluation and closed-form maximum likelihood estimation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::intervals::{CiMethod, IntervalResult};
use crate::sample::GphcSample;

/// Two independent exponential cause lifetimes with mean lifetimes
/// `theta1` and `theta2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpCompetingModel {
    pub theta1: f64,
    pub theta2: f64,
}

impl ExpCompetingModel {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !(theta1 > 0.0) || !(theta2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mean lifetimes must be positive, got ({theta1}, {theta2})"
            )));
        }
        Ok(ExpCompetingModel { theta1, theta2 })
    }

    /// Mean lifetime of the observed minimum: 1/theta = 1/theta1 + 1/theta2.
    pub fn theta(&self) -> f64 {
        1.0 / (1.0 / self.theta1 + 1.0 / self.theta2)
    }

    pub fn lambda1(&self) -> f64 {
        1.0 / self.theta1
    }

    pub fn lambda2(&self) -> f64 {
        1.0 / self.theta2
    }

    /// Probability that a failure is due to cause 1:
    /// lambda1 / (lambda1 + lambda2) = theta2 / (theta1 + theta2).
    pub fn cause1_prob(&self) -> f64 {
        self.theta2 / (self.theta1 + self.theta2)
    }
}

/// MLEs of the two mean lifetimes. An estimate is absent when no failure of
/// that cause was observed (the likelihood is then unbounded in that
/// parameter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub d1: u32,
    pub d2: u32,
    pub w: f64,
}

/// Log likelihood `-D1 log(theta1) - D2 log(theta2) - W/theta`, optionally
/// adding the data-dependent constant `log c = sum_{v<=J} log(gamma_v)`.
pub fn log_likelihood(
    model: &ExpCompetingModel,
    sample: &GphcSample,
    include_constant: bool,
) -> f64 {
    let mut ll = -(sample.d1 as f64) * model.theta1.ln()
        - (sample.d2 as f64) * model.theta2.ln()
        - sample.w / model.theta();
    if include_constant {
        // J equals k and m in the two boundary cases, so the product always
        // runs over the first J gammas.
        let gamma = sample.scheme.gamma_seq();
        ll += gamma[..sample.j as usize]
            .iter()
            .map(|&g| (g as f64).ln())
            .sum::<f64>();
    }
    ll
}

/// Closed-form MLEs: `theta_hat_c = W / D_c` when `D_c > 0`.
pub fn fit_mle(sample: &GphcSample) -> MleResult {
    MleResult {
        theta1: (sample.d1 > 0).then(|| sample.w / sample.d1 as f64),
        theta2: (sample.d2 > 0).then(|| sample.w / sample.d2 as f64),
        d1: sample.d1,
        d2: sample.d2,
        w: sample.w,
    }
}

/// Normal-approximation intervals `theta_hat -+ z * theta_hat / sqrt(D)`
/// from the observed information. Approximate by construction; the output is
/// labeled accordingly.
pub fn asymptotic_ci(result: &MleResult, alpha: f64) -> Result<(IntervalResult, IntervalResult)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0,1], got {alpha}"
        )));
    }
    let t1 = result.theta1.ok_or(Error::MissingMle("theta1"))?;
    let t2 = result.theta2.ok_or(Error::MissingMle("theta2"))?;
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let make = |hat: f64, d: u32| {
        let half = z * hat / (d as f64).sqrt();
        IntervalResult::closed(hat - half, hat + half, alpha, CiMethod::Asymptotic)
    };
    Ok((make(t1, result.d1), make(t2, result.d2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::hoel_gphc_sample;
    use approx::assert_relative_eq;

    #[test]
    fn real_data_mles() {
        let sample = hoel_gphc_sample();
        let fit = fit_mle(&sample);
        assert_eq!(fit.w, 28962.0);
        assert_eq!((fit.d1, fit.d2), (7, 18));
        assert_eq!(fit.theta1.unwrap(), 28962.0 / 7.0);
        assert_eq!(fit.theta2.unwrap(), 1609.0);
    }

    #[test]
    fn absent_mle_when_no_failures_of_a_cause() {
        let mut sample = hoel_gphc_sample();
        for obs in &mut sample.observations {
            obs.cause = crate::sample::Cause::Cause2;
        }
        sample.d2 += sample.d1;
        sample.d1 = 0;
        let fit = fit_mle(&sample);
        assert!(fit.theta1.is_none());
        assert!(fit.theta2.is_some());
    }

    #[test]
    fn single_failure_each() {
        use crate::sample::{classify_and_summarize, Cause};
        use crate::scheme::CensoringScheme;
        let s = CensoringScheme::new(2, 2, 1, 100.0, vec![0, 0]).unwrap();
        let sample =
            classify_and_summarize(&[0.5, 0.75], &[Cause::Cause1, Cause::Cause2], &s).unwrap();
        // W = 0.5 + 0.75 = 1.25, D1 = D2 = 1. Scale to W = 2 with times 0.8, 1.2.
        let sample2 =
            classify_and_summarize(&[0.8, 1.2], &[Cause::Cause1, Cause::Cause2], &s).unwrap();
        assert_eq!(sample2.w, 2.0);
        let fit = fit_mle(&sample2);
        assert_eq!(fit.theta1.unwrap(), 2.0);
        assert_eq!(fit.theta2.unwrap(), 2.0);
        assert_eq!(fit_mle(&sample).theta1.unwrap(), 1.25);
    }

    #[test]
    fn log_likelihood_real_data_value() {
        // Direct evaluation of -7 log t1 - 18 log t2 - W (1/t1 + 1/t2) at
        // coarsely rounded estimates.
        let sample = hoel_gphc_sample();
        let model = ExpCompetingModel::new(4137.429, 1609.0).unwrap();
        let ll = log_likelihood(&model, &sample, false);
        assert_relative_eq!(ll, -216.1954349366956, max_relative = 1e-12);
    }

    #[test]
    fn constant_term_adds_log_gamma_products() {
        let sample = hoel_gphc_sample();
        let model = ExpCompetingModel::new(4000.0, 1600.0).unwrap();
        let bare = log_likelihood(&model, &sample, false);
        let full = log_likelihood(&model, &sample, true);
        let log_c: f64 = sample.scheme.gamma_seq()[..25]
            .iter()
            .map(|&g| (g as f64).ln())
            .sum();
        assert_relative_eq!(full - bare, log_c, max_relative = 1e-12);
    }

    #[test]
    fn equal_theta_reduction() {
        // With theta1 = theta2 = t and no failures, the likelihood reduces to
        // -2W/t: W = 1, t = 2 gives -1.
        let mut sample = hoel_gphc_sample();
        sample.observations.clear();
        sample.d1 = 0;
        sample.d2 = 0;
        sample.j = 0;
        sample.w = 1.0;
        let model = ExpCompetingModel::new(2.0, 2.0).unwrap();
        assert_relative_eq!(
            log_likelihood(&model, &sample, false),
            -1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mle_maximizes_likelihood_on_real_data() {
        let sample = hoel_gphc_sample();
        let fit = fit_mle(&sample);
        let at = |t1: f64, t2: f64| {
            log_likelihood(&ExpCompetingModel::new(t1, t2).unwrap(), &sample, false)
        };
        let best = at(fit.theta1.unwrap(), fit.theta2.unwrap());
        assert!(best >= at(fit.theta1.unwrap() * 1.1, fit.theta2.unwrap()));
        assert!(best >= at(fit.theta1.unwrap() / 1.1, fit.theta2.unwrap()));
        assert!(best >= at(fit.theta1.unwrap(), fit.theta2.unwrap() * 1.1));
    }

    #[test]
    fn asymptotic_ci_real_data() {
        let fit = fit_mle(&hoel_gphc_sample());
        let (ci1, ci2) = asymptotic_ci(&fit, 0.05).unwrap();
        assert_relative_eq!(ci1.lower.unwrap(), 1072.4349135990901, max_relative = 1e-10);
        assert_relative_eq!(ci1.upper.unwrap(), 7202.4222292580525, max_relative = 1e-10);
        assert_relative_eq!(ci2.lower.unwrap(), 865.6935822071227, max_relative = 1e-10);
        assert_relative_eq!(ci2.upper.unwrap(), 2352.3064177928773, max_relative = 1e-10);
    }

    #[test]
    fn asymptotic_ci_shrinks_with_d() {
        let base = MleResult {
            theta1: Some(2.0),
            theta2: Some(3.0),
            d1: 4,
            d2: 4,
            w: 8.0,
        };
        let wide = asymptotic_ci(&base, 0.05).unwrap().0;
        let narrow = asymptotic_ci(
            &MleResult {
                d1: 400,
                d2: 400,
                ..base
            },
            0.05,
        )
        .unwrap()
        .0;
        assert!(narrow.length().unwrap() < wide.length().unwrap() / 5.0);
    }

    #[test]
    fn full_alpha_degenerates_to_the_estimate() {
        let fit = fit_mle(&hoel_gphc_sample());
        let (c1, _) = asymptotic_ci(&fit, 1.0).unwrap();
        assert_eq!(c1.length().unwrap(), 0.0);
        assert_eq!(c1.lower.unwrap(), fit.theta1.unwrap());
    }

    #[test]
    fn missing_mle_is_an_error() {
        let r = MleResult {
            theta1: None,
            theta2: Some(1.0),
            d1: 0,
            d2: 3,
            w: 3.0,
        };
        assert!(matches!(asymptotic_ci(&r, 0.05), Err(Error::MissingMle(_))));
    }
}
