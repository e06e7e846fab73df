//! Observed samples: generation, termination classification and sufficient
//! statistics.

use rand::{Rng, RngExt};
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::ExpCompetingModel;
use crate::scheme::CensoringScheme;

/// Cause of a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cause {
    #[serde(rename = "1")]
    Cause1,
    #[serde(rename = "2")]
    Cause2,
}

impl Cause {
    pub fn label(self) -> u8 {
        match self {
            Cause::Cause1 => 1,
            Cause::Cause2 => 2,
        }
    }

    pub fn from_label(v: u8) -> Option<Cause> {
        match v {
            1 => Some(Cause::Cause1),
            2 => Some(Cause::Cause2),
            _ => None,
        }
    }
}

/// One observed failure: ordered time, cause, and units withdrawn there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub z: f64,
    pub cause: Cause,
    pub removed: u32,
}

/// How the experiment terminated.
///
/// `AtDeadline`: Z_k < T < Z_m, stop at T with k <= J < m failures.
/// `AtKthFailure`: T < Z_k, run past the deadline until the guaranteed k-th.
/// `AtMthFailure`: Z_m < T, all m failures observed before the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationKind {
    AtDeadline,
    AtKthFailure,
    AtMthFailure,
}

/// A classified sample with its sufficient statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GphcSample {
    pub scheme: CensoringScheme,
    pub observations: Vec<Observation>,
    pub termination: TerminationKind,
    /// Terminal time T*.
    pub t_star: f64,
    /// Number of observed failures.
    pub j: u32,
    /// Failures due to cause 1.
    pub d1: u32,
    /// Failures due to cause 2.
    pub d2: u32,
    /// Total time on test.
    pub w: f64,
    /// Units withdrawn at the terminal point (R*_J at the deadline, R*_k at
    /// the k-th failure, 0 when all m failures were observed).
    pub r_star: u32,
    /// Ingested data contained tied times (kept in input order).
    pub tied_times: bool,
}

impl GphcSample {
    /// Recompute the total time on test from the stored observations.
    pub fn recompute_w(&self) -> f64 {
        let mut w = 0.0;
        for obs in &self.observations {
            w += obs.z * (1.0 + obs.removed as f64);
        }
        if self.termination == TerminationKind::AtDeadline {
            w += self.scheme.deadline * self.r_star as f64;
        }
        w
    }

    pub fn counts(&self) -> (u32, u32) {
        (self.d1, self.d2)
    }
}

/// Classify raw ordered failure data against a scheme: determine the
/// termination kind, truncate at T*, and compute J, D1, D2, R* and W.
pub fn classify_and_summarize(
    times: &[f64],
    causes: &[Cause],
    scheme: &CensoringScheme,
) -> Result<GphcSample> {
    scheme.validate()?;
    if times.len() != causes.len() {
        return Err(Error::LengthMismatch(format!(
            "{} times vs {} cause labels",
            times.len(),
            causes.len()
        )));
    }
    let mut tied = false;
    for (i, pair) in times.windows(2).enumerate() {
        if pair[1] < pair[0] {
            return Err(Error::UnsortedTimes(i + 1));
        }
        if pair[1] == pair[0] {
            tied = true;
        }
    }
    if times.iter().any(|&z| !(z > 0.0) || !z.is_finite()) {
        return Err(Error::InvalidArgument(
            "failure times must be positive and finite".into(),
        ));
    }
    let (m, k) = (scheme.m as usize, scheme.k as usize);
    let t = scheme.deadline;
    if times.len() < k {
        return Err(Error::LengthMismatch(format!(
            "at least k = {} failures must be observed, got {}",
            k,
            times.len()
        )));
    }
    if times.len() > m {
        return Err(Error::LengthMismatch(format!(
            "at most m = {} failures can be observed, got {}",
            m,
            times.len()
        )));
    }

    let (termination, keep) = if times[k - 1] > t {
        (TerminationKind::AtKthFailure, k)
    } else if times.len() == m && times[m - 1] <= t {
        (TerminationKind::AtMthFailure, m)
    } else {
        // Deadline case: keep failures up to T.
        let j = times.partition_point(|&z| z <= t);
        (TerminationKind::AtDeadline, j)
    };

    if termination == TerminationKind::AtKthFailure && times.len() > k {
        return Err(Error::LengthMismatch(format!(
            "k-th failure exceeds the deadline but {} > k observations were supplied",
            times.len()
        )));
    }
    if termination == TerminationKind::AtDeadline && keep == m {
        // All m supplied, the m-th at or above T: the data cannot extend past T.
        return Err(Error::LengthMismatch(
            "m-th failure at or after the deadline cannot be part of the observed sample".into(),
        ));
    }

    let mut observations = Vec::with_capacity(keep);
    for i in 0..keep {
        let removed = match termination {
            TerminationKind::AtKthFailure if i == k - 1 => scheme.guarantee_removal(),
            _ => scheme.removals[i],
        };
        observations.push(Observation {
            z: times[i],
            cause: causes[i],
            removed,
        });
    }

    let j = keep as u32;
    let (t_star, r_star) = match termination {
        TerminationKind::AtDeadline => (t, scheme.terminal_removal(j)),
        TerminationKind::AtKthFailure => (times[k - 1], scheme.guarantee_removal()),
        TerminationKind::AtMthFailure => (times[m - 1], 0),
    };

    let d1 = observations
        .iter()
        .filter(|o| o.cause == Cause::Cause1)
        .count() as u32;
    let mut sample = GphcSample {
        scheme: scheme.clone(),
        observations,
        termination,
        t_star,
        j,
        d1,
        d2: j - d1,
        w: 0.0,
        r_star,
        tied_times: tied,
    };
    sample.w = sample.recompute_w();
    Ok(sample)
}

/// Simulate one sample under the scheme.
///
/// Progressive order statistics of Z = min(X1, X2) come from the spacings
/// construction: gamma_v * (Z_v - Z_{v-1}) are i.i.d. Exp(theta). Causes are
/// assigned i.i.d. with P(cause 1) = lambda1 / (lambda1 + lambda2).
pub fn generate_sample<R: Rng>(
    model: &ExpCompetingModel,
    scheme: &CensoringScheme,
    rng: &mut R,
) -> GphcSample {
    debug_assert!(scheme.validate().is_ok());
    let m = scheme.m as usize;
    let k = scheme.k as usize;
    let t = scheme.deadline;
    let theta = model.theta();
    let gamma = scheme.gamma_seq();
    let p1 = model.cause1_prob();

    let mut times = Vec::with_capacity(m);
    let mut z = 0.0;
    for &g in &gamma[..m] {
        let e: f64 = Exp1.sample(rng);
        z += theta * e / g as f64;
        times.push(z);
    }
    let causes: Vec<Cause> = (0..m)
        .map(|_| {
            if rng.random::<f64>() < p1 {
                Cause::Cause1
            } else {
                Cause::Cause2
            }
        })
        .collect();

    // Three-case truncation. The deadline case keeps J in [k, m-1] by
    // construction: Z_k <= T < Z_m.
    let keep = if times[k - 1] > t {
        k
    } else if times[m - 1] <= t {
        m
    } else {
        times.partition_point(|&zv| zv <= t)
    };
    classify_and_summarize(&times[..keep], &causes[..keep], scheme)
        .expect("generated data is always classifiable")
}
