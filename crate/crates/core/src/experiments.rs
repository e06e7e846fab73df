//! Monte Carlo harness: replicate generation, estimation and interval
//! construction under a design grid, reporting bias, MSE, interval lengths,
//! coverage and non-existence counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{
    bayes_estimates, equal_tail_from_draws, hpd_from_draws, posterior, sample_posterior_with,
    BetaGammaParams,
};
use crate::error::{Error, Result};
use crate::estimation::{fit_mle, ExpCompetingModel};
use crate::exact::{SchemeDistribution, Target};
use crate::intervals::{bootstrap_ci, exact_ci_for};
use crate::rngs::{derive_seed, replication_rng};
use crate::sample::generate_sample;
use crate::scheme::CensoringScheme;

/// Placement of the n - m removals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeFamily {
    /// All removals at the first failure.
    EarlyRemoval,
    /// All removals at the ceil(m/2)-th failure.
    MidRemoval,
    /// All removals at the last failure.
    LateRemoval,
    Custom(Vec<u32>),
}

impl std::fmt::Display for SchemeFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeFamily::EarlyRemoval => write!(f, "I"),
            SchemeFamily::MidRemoval => write!(f, "II"),
            SchemeFamily::LateRemoval => write!(f, "III"),
            SchemeFamily::Custom(_) => write!(f, "custom"),
        }
    }
}

impl std::str::FromStr for SchemeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_uppercase().as_str() {
            "I" | "1" => Ok(SchemeFamily::EarlyRemoval),
            "II" | "2" => Ok(SchemeFamily::MidRemoval),
            "III" | "3" => Ok(SchemeFamily::LateRemoval),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme family {other:?}; use I, II or III (or pass explicit removals)"
            ))),
        }
    }
}

/// Removal vector of a family for given n, m.
pub fn expand_scheme(family: &SchemeFamily, n: u32, m: u32) -> Result<Vec<u32>> {
    if m > n || m == 0 {
        return Err(Error::SchemeInvalid(format!(
            "need 0 < m <= n, got m={m}, n={n}"
        )));
    }
    let mut r = vec![0u32; m as usize];
    match family {
        SchemeFamily::EarlyRemoval => r[0] = n - m,
        SchemeFamily::MidRemoval => r[(m as usize).div_ceil(2) - 1] = n - m,
        SchemeFamily::LateRemoval => r[m as usize - 1] = n - m,
        SchemeFamily::Custom(v) => r = v.clone(),
    }
    Ok(r)
}

/// Which methods to run per replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Methods {
    pub mle: bool,
    pub exact_ci: bool,
    pub bootstrap_ci: bool,
    pub bayes_informative: bool,
    pub bayes_matching: bool,
}

impl Default for Methods {
    fn default() -> Self {
        Methods {
            mle: true,
            exact_ci: true,
            bootstrap_ci: true,
            bayes_informative: false,
            bayes_matching: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub deadline: f64,
    pub family: SchemeFamily,
    pub replications: u32,
    pub alpha: f64,
    pub methods: Methods,
    pub master_seed: u64,
    pub bootstrap_b: u32,
    pub posterior_draws: usize,
    /// Count replications without an exact interval as non-coverage instead
    /// of excluding them.
    pub score_neci_as_miss: bool,
    pub parallel: bool,
    /// Informative prior used when `methods.bayes_informative` is set.
    pub informative_prior: BetaGammaParams,
}

impl ExperimentConfig {
    pub fn new(
        theta1: f64,
        theta2: f64,
        n: u32,
        m: u32,
        k: u32,
        deadline: f64,
        family: SchemeFamily,
    ) -> Self {
        ExperimentConfig {
            theta1,
            theta2,
            n,
            m,
            k,
            deadline,
            family,
            replications: 1000,
            alpha: 0.05,
            methods: Methods::default(),
            master_seed: 20_240_101,
            bootstrap_b: 1000,
            posterior_draws: 2000,
            score_neci_as_miss: false,
            parallel: true,
            informative_prior: BetaGammaParams {
                b0: 1.0,
                a0: 46.0 / 13.0,
                a1: 2.3,
                a2: 2.0,
            },
        }
    }

    pub fn scheme(&self) -> Result<CensoringScheme> {
        CensoringScheme::new(
            self.n,
            self.m,
            self.k,
            self.deadline,
            expand_scheme(&self.family, self.n, self.m)?,
        )
    }

    pub fn model(&self) -> Result<ExpCompetingModel> {
        ExpCompetingModel::new(self.theta1, self.theta2)
    }
}

/// Interval bookkeeping for one method and parameter.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct CiMetrics {
    pub avg_length: f64,
    pub coverage_pct: f64,
    /// Replications contributing to length/coverage.
    pub evaluated: u32,
    /// Replications where no finite interval exists.
    pub neci: u32,
}

/// Bias and MSE of the point estimate over some subsample.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PointMetrics {
    pub bias: f64,
    pub mse: f64,
    pub bias_se: f64,
    pub mse_se: f64,
    pub reps: u32,
}

fn point_metrics(errors: &[f64]) -> PointMetrics {
    if errors.is_empty() {
        return PointMetrics::default();
    }
    let n = errors.len() as f64;
    let bias = errors.iter().sum::<f64>() / n;
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let mse = sq.iter().sum::<f64>() / n;
    let var_err = errors.iter().map(|e| (e - bias).powi(2)).sum::<f64>() / n;
    let var_sq = sq.iter().map(|v| (v - mse).powi(2)).sum::<f64>() / n;
    PointMetrics {
        bias,
        mse,
        bias_se: (var_err / n).sqrt(),
        mse_se: (var_sq / n).sqrt(),
        reps: errors.len() as u32,
    }
}

/// Point-estimate and interval metrics for one parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamMetrics {
    pub parameter: String,
    pub true_value: f64,
    pub bias: f64,
    pub mse: f64,
    /// Estimated MC standard errors of the bias and MSE entries.
    pub bias_se: f64,
    pub mse_se: f64,
    pub reps_used: u32,
    /// Replications skipped because the MLE does not exist.
    pub skipped: u32,
    /// Bias/MSE over only the replications whose exact interval exists
    /// (published tables follow this convention; see `exact.neci`).
    pub point_over_existing_ci: Option<PointMetrics>,
    pub exact: Option<CiMetrics>,
    pub bootstrap: Option<CiMetrics>,
    pub bayes_informative: Option<BayesMetrics>,
    pub bayes_matching: Option<BayesMetrics>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct BayesMetrics {
    pub bias: f64,
    pub mse: f64,
    pub reps_used: u32,
    pub skipped: u32,
    pub symmetric: CiMetrics,
    pub hpd: CiMetrics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub theta1: ParamMetrics,
    pub theta2: ParamMetrics,
}

#[derive(Debug, Clone, Copy, Default)]
struct RepInterval {
    exists: bool,
    length: f64,
    covered: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct RepBayes {
    estimate: Option<f64>,
    symmetric: Option<RepInterval>,
    hpd: Option<RepInterval>,
}

#[derive(Debug, Clone, Copy, Default)]
struct RepParam {
    estimate: Option<f64>,
    exact: Option<RepInterval>,
    bootstrap: Option<RepInterval>,
    bayes_informative: RepBayes,
    bayes_matching: RepBayes,
}

#[derive(Debug, Clone, Copy, Default)]
struct RepOutcome {
    theta1: RepParam,
    theta2: RepParam,
}

fn run_replication(
    rep: u64,
    config: &ExperimentConfig,
    dist: &SchemeDistribution,
    model: &ExpCompetingModel,
) -> RepOutcome {
    let scheme = dist.scheme();
    let mut rng = replication_rng(config.master_seed, rep);
    let sample = generate_sample(model, scheme, &mut rng);
    let fit = fit_mle(&sample);
    let mut out = RepOutcome::default();
    let truth = [config.theta1, config.theta2];

    for (idx, target) in [Target::Theta1, Target::Theta2].into_iter().enumerate() {
        let (est, other) = match target {
            Target::Theta1 => (fit.theta1, fit.theta2),
            Target::Theta2 => (fit.theta2, fit.theta1),
        };
        let slot = match target {
            Target::Theta1 => &mut out.theta1,
            Target::Theta2 => &mut out.theta2,
        };
        slot.estimate = est;

        if config.methods.exact_ci {
            if let (Some(x_obs), Some(nuisance)) = (est, other) {
                if let Ok(ci) = exact_ci_for(dist, x_obs, nuisance, target, config.alpha) {
                    slot.exact = Some(RepInterval {
                        exists: ci.exists,
                        length: ci.length().unwrap_or(0.0),
                        covered: ci.covers(truth[idx]).unwrap_or(false),
                    });
                }
            }
        }
        if config.methods.bootstrap_ci && est.is_some() && other.is_some() {
            let seed = derive_seed(config.master_seed, rep * 2 + idx as u64 + 1);
            if let Ok(ci) = bootstrap_ci(&sample, target, config.alpha, config.bootstrap_b, seed) {
                slot.bootstrap = Some(RepInterval {
                    exists: true,
                    length: ci.length().unwrap_or(0.0),
                    covered: ci.covers(truth[idx]).unwrap_or(false),
                });
            }
        }
    }

    for (informative, prior) in [
        (true, config.informative_prior),
        (false, BetaGammaParams::matching_prior()),
    ] {
        let enabled = if informative {
            config.methods.bayes_informative
        } else {
            config.methods.bayes_matching
        };
        if !enabled {
            continue;
        }
        let post = posterior(&prior, &sample);
        let estimates = bayes_estimates(&post).ok();
        let mut draws_rng = replication_rng(
            derive_seed(config.master_seed, 0xBA5E + informative as u64),
            rep,
        );
        let draws = match sample_posterior_with(&post, config.posterior_draws, &mut draws_rng) {
            Ok(d) => d,
            Err(_) => continue,
        };
        for (idx, target) in [Target::Theta1, Target::Theta2].into_iter().enumerate() {
            let mut vals: Vec<f64> = draws
                .iter()
                .map(|&(l1, l2)| if idx == 0 { 1.0 / l1 } else { 1.0 / l2 })
                .collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let symm = equal_tail_from_draws(&vals, config.alpha);
            let hpd = hpd_from_draws(&vals, config.alpha);
            let truth_v = truth[idx];
            let slot = match target {
                Target::Theta1 => &mut out.theta1,
                Target::Theta2 => &mut out.theta2,
            };
            let entry = if informative {
                &mut slot.bayes_informative
            } else {
                &mut slot.bayes_matching
            };
            entry.estimate = estimates.map(|(t1, t2)| if idx == 0 { t1 } else { t2 });
            entry.symmetric = Some(RepInterval {
                exists: true,
                length: symm.1 - symm.0,
                covered: symm.0 <= truth_v && truth_v <= symm.1,
            });
            entry.hpd = Some(RepInterval {
                exists: true,
                length: hpd.1 - hpd.0,
                covered: hpd.0 <= truth_v && truth_v <= hpd.1,
            });
        }
    }
    out
}

fn summarize_intervals(
    items: impl Iterator<Item = Option<RepInterval>>,
    score_neci_as_miss: bool,
) -> CiMetrics {
    let mut m = CiMetrics::default();
    let mut len_sum = 0.0;
    let mut covered = 0u32;
    let mut denom = 0u32;
    for item in items.flatten() {
        if item.exists {
            m.evaluated += 1;
            denom += 1;
            len_sum += item.length;
            covered += item.covered as u32;
        } else {
            m.neci += 1;
            if score_neci_as_miss {
                denom += 1;
            }
        }
    }
    if m.evaluated > 0 {
        m.avg_length = len_sum / m.evaluated as f64;
    }
    if denom > 0 {
        m.coverage_pct = 100.0 * covered as f64 / denom as f64;
    }
    m
}

fn summarize_param(
    outcomes: &[RepOutcome],
    target: Target,
    config: &ExperimentConfig,
) -> ParamMetrics {
    let pick = |o: &RepOutcome| match target {
        Target::Theta1 => o.theta1,
        Target::Theta2 => o.theta2,
    };
    let truth = match target {
        Target::Theta1 => config.theta1,
        Target::Theta2 => config.theta2,
    };
    let errors: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| pick(o).estimate)
        .map(|e| e - truth)
        .collect();
    let used = errors.len() as u32;
    let pm = point_metrics(&errors);
    let conditioned: Option<PointMetrics> = config.methods.exact_ci.then(|| {
        let errs: Vec<f64> = outcomes
            .iter()
            .map(pick)
            .filter(|p| p.exact.map(|ci| ci.exists).unwrap_or(false))
            .filter_map(|p| p.estimate)
            .map(|e| e - truth)
            .collect();
        point_metrics(&errs)
    });

    let bayes = |informative: bool| -> Option<BayesMetrics> {
        let enabled = if informative {
            config.methods.bayes_informative
        } else {
            config.methods.bayes_matching
        };
        if !enabled {
            return None;
        }
        let entries: Vec<RepBayes> = outcomes
            .iter()
            .map(|o| {
                let p = pick(o);
                if informative {
                    p.bayes_informative
                } else {
                    p.bayes_matching
                }
            })
            .collect();
        let est_errors: Vec<f64> = entries
            .iter()
            .filter_map(|e| e.estimate)
            .map(|e| e - truth)
            .collect();
        let mut b = BayesMetrics {
            reps_used: est_errors.len() as u32,
            skipped: (entries.len() - est_errors.len()) as u32,
            ..Default::default()
        };
        if !est_errors.is_empty() {
            let n = est_errors.len() as f64;
            b.bias = est_errors.iter().sum::<f64>() / n;
            b.mse = est_errors.iter().map(|e| e * e).sum::<f64>() / n;
        }
        b.symmetric = summarize_intervals(entries.iter().map(|e| e.symmetric), false);
        b.hpd = summarize_intervals(entries.iter().map(|e| e.hpd), false);
        Some(b)
    };

    ParamMetrics {
        parameter: match target {
            Target::Theta1 => "theta1".into(),
            Target::Theta2 => "theta2".into(),
        },
        true_value: truth,
        bias: pm.bias,
        mse: pm.mse,
        bias_se: pm.bias_se,
        mse_se: pm.mse_se,
        reps_used: used,
        skipped: config.replications - used,
        point_over_existing_ci: conditioned,
        exact: config.methods.exact_ci.then(|| {
            summarize_intervals(
                outcomes.iter().map(|o| pick(o).exact),
                config.score_neci_as_miss,
            )
        }),
        bootstrap: config
            .methods
            .bootstrap_ci
            .then(|| summarize_intervals(outcomes.iter().map(|o| pick(o).bootstrap), false)),
        bayes_informative: bayes(true),
        bayes_matching: bayes(false),
    }
}

/// Run the full replication loop. Deterministic for a given master seed;
/// parallel and serial execution produce identical reports.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.replications == 0 {
        return Err(Error::InvalidArgument(
            "need at least one replication".into(),
        ));
    }
    let scheme = config.scheme()?;
    let model = config.model()?;
    let dist = SchemeDistribution::new(&scheme)?;
    let reps: Vec<u64> = (0..config.replications as u64).collect();
    let outcomes: Vec<RepOutcome> = if config.parallel {
        reps.par_iter()
            .map(|&r| run_replication(r, config, &dist, &model))
            .collect()
    } else {
        reps.iter()
            .map(|&r| run_replication(r, config, &dist, &model))
            .collect()
    };
    Ok(ExperimentReport {
        config: config.clone(),
        theta1: summarize_param(&outcomes, Target::Theta1, config),
        theta2: summarize_param(&outcomes, Target::Theta2, config),
    })
}

impl ExperimentReport {
    /// Flat CSV rows, one per parameter.
    pub fn csv_rows(&self) -> (String, Vec<String>) {
        let header = "n,m,k,scheme,parameter,reps,skipped,bias,mse,exact_ci_len,exact_ci_coverage,neci,boot_ci_len,boot_ci_coverage".to_string();
        let row = |p: &ParamMetrics| {
            let (el, ec, en) = p
                .exact
                .map(|c| (c.avg_length, c.coverage_pct, c.neci))
                .unwrap_or((f64::NAN, f64::NAN, 0));
            let (bl, bc) = p
                .bootstrap
                .map(|c| (c.avg_length, c.coverage_pct))
                .unwrap_or((f64::NAN, f64::NAN));
            format!(
                "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.2},{},{:.6},{:.2}",
                self.config.n,
                self.config.m,
                self.config.k,
                self.config.family,
                p.parameter,
                p.reps_used,
                p.skipped,
                p.bias,
                p.mse,
                el,
                ec,
                en,
                bl,
                bc
            )
        };
        (header, vec![row(&self.theta1), row(&self.theta2)])
    }
}
