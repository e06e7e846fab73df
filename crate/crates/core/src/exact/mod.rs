//! Exact conditional distribution of an MLE given that its cause was
//! observed at least once: a signed mixture of shifted gamma densities.
//!
//! Every component has rate i/theta and shape equal to its slice's failure
//! count; shifts are integer multiples of T/i. Coefficients are exact
//! rationals; evaluation runs in log space with compensated summation and
//! escalates to 256-bit floats when the alternating sums cancel
//! catastrophically.

mod skeleton;

pub use skeleton::{published_deadline_coefficients, Skeleton, SkeletonGroup};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimation::ExpCompetingModel;
use crate::numeric::{
    adaptive_simpson, reg_lower_gamma, reg_lower_gamma_big, signed_logsum, Big, LogTerm,
    ESCALATION_THRESHOLD,
};
use crate::sample::TerminationKind;
use crate::scheme::CensoringScheme;
use skeleton::binomial_bigint;

/// Which MLE the distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Theta1,
    Theta2,
}

impl Target {
    /// Probability that a single failure is attributed to this target's
    /// cause.
    pub fn cause_prob(self, model: &ExpCompetingModel) -> f64 {
        match self {
            Target::Theta1 => model.cause1_prob(),
            Target::Theta2 => 1.0 - model.cause1_prob(),
        }
    }
}

/// Gamma density translated to start at `shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedGamma {
    pub shift: f64,
    pub shape: u32,
    pub rate: f64,
}

impl ShiftedGamma {
    pub fn pdf(&self, x: f64) -> f64 {
        match self.ln_pdf(x) {
            Some(l) => l.exp(),
            None => 0.0,
        }
    }

    fn ln_pdf(&self, x: f64) -> Option<f64> {
        if x <= self.shift {
            return None;
        }
        let y = x - self.shift;
        let b = self.shape as f64;
        Some(b * self.rate.ln() - ln_gamma(b) + (b - 1.0) * y.ln() - self.rate * y)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        reg_lower_gamma(self.shape, self.rate * (x - self.shift))
    }
}

/// Where a mixture term came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermOrigin {
    Deadline { j: u32, i: u32, v: u32 },
    KthFailure { i: u32, v: u32 },
    MthFailure { i: u32, v: u32 },
}

/// One signed shifted-gamma component. The exact rational part of the weight
/// lives in the scheme skeleton; `ln_weight`/`negative` carry the full weight
/// (rational coefficient, cause probabilities, optional binomial factor and
/// exponential) in log space.
#[derive(Debug, Clone, Copy)]
pub struct MixtureTerm {
    pub ln_weight: f64,
    pub negative: bool,
    pub component: ShiftedGamma,
    pub origin: TermOrigin,
    group_idx: u32,
    entry_idx: u32,
    cause_count: u32,
}

impl MixtureTerm {
    pub fn weight(&self) -> f64 {
        let w = self.ln_weight.exp();
        if self.negative {
            -w
        } else {
            w
        }
    }
}

/// The exact conditional law of an MLE: signed shifted-gamma components over
/// the normalizer P(D_target > 0).
#[derive(Debug, Clone)]
pub struct SignedGammaMixture {
    skeleton: Arc<Skeleton>,
    terms: Vec<MixtureTerm>,
    normalizer: f64,
    prob_zero: f64,
    target: Target,
    binomial_variant: bool,
    model: ExpCompetingModel,
    /// T / theta.
    x_t: f64,
    ln_p: f64,
    ln_q: f64,
}

/// Distribution machinery for one scheme; build once, evaluate for many
/// parameter values.
#[derive(Debug, Clone)]
pub struct SchemeDistribution {
    skeleton: Arc<Skeleton>,
}

/// Case probabilities of the three termination kinds.
#[derive(Debug, Clone, Serialize)]
pub struct CaseProbabilities {
    /// P(terminate at the deadline with exactly j failures), j = k..m-1.
    pub deadline_by_j: Vec<(u32, f64)>,
    /// P(the k-th failure falls after the deadline).
    pub kth_failure: f64,
    /// P(all m failures fall before the deadline).
    pub mth_failure: f64,
}

impl CaseProbabilities {
    pub fn total(&self) -> f64 {
        self.deadline_by_j.iter().map(|&(_, p)| p).sum::<f64>()
            + self.kth_failure
            + self.mth_failure
    }
}

impl SchemeDistribution {
    pub fn new(scheme: &CensoringScheme) -> Result<Self> {
        Ok(SchemeDistribution {
            skeleton: Arc::new(Skeleton::new(scheme)?),
        })
    }

    pub fn scheme(&self) -> &CensoringScheme {
        &self.skeleton.scheme
    }

    /// Evaluate one coefficient group's alternating sum at `x_t = T/theta`,
    /// escalating to extended precision on catastrophic cancellation.
    fn group_sum(&self, group: &SkeletonGroup, x_t: f64) -> f64 {
        let sum = signed_logsum(group.entries.iter().map(|e| LogTerm {
            ln_mag: e.ln_mag - x_t * e.gamma_mult as f64,
            negative: e.negative,
        }));
        if sum.cancellation >= ESCALATION_THRESHOLD {
            return sum.value;
        }
        let mut acc = Big::zero();
        for e in &group.entries {
            let expo = Big::from_f64(-x_t * e.gamma_mult as f64).exp();
            acc = acc.add(&Big::from_rational(&e.coef).mul(&expo));
        }
        acc.to_f64()
    }

    /// The three case probabilities under a model.
    pub fn case_probabilities(&self, model: &ExpCompetingModel) -> CaseProbabilities {
        let x_t = self.skeleton.scheme.deadline / model.theta();
        let mut out = CaseProbabilities {
            deadline_by_j: Vec::new(),
            kth_failure: 0.0,
            mth_failure: 0.0,
        };
        for group in &self.skeleton.groups {
            let p = self.group_sum(group, x_t).max(0.0);
            match group.case {
                TerminationKind::AtDeadline => out.deadline_by_j.push((group.shape, p)),
                TerminationKind::AtKthFailure => out.kth_failure = p,
                TerminationKind::AtMthFailure => out.mth_failure = p,
            }
        }
        out
    }

    /// P(no failure of the target cause is observed).
    pub fn prob_zero(&self, model: &ExpCompetingModel, target: Target) -> f64 {
        let x_t = self.skeleton.scheme.deadline / model.theta();
        let q = 1.0 - target.cause_prob(model);
        let mut total = 0.0;
        for group in &self.skeleton.groups {
            total += self.group_sum(group, x_t).max(0.0) * q.powi(group.shape as i32);
        }
        total.clamp(0.0, 1.0)
    }

    /// Build the signed mixture for a model, with the arbitrated binomial
    /// weighting.
    pub fn mixture(&self, model: &ExpCompetingModel, target: Target) -> SignedGammaMixture {
        self.mixture_with_variant(model, target, true)
    }

    /// `binomial_variant = true` multiplies each slice weight by C(shape, i);
    /// `false` reproduces the bare published weights (kept for comparison;
    /// fails normalization).
    pub fn mixture_with_variant(
        &self,
        model: &ExpCompetingModel,
        target: Target,
        binomial_variant: bool,
    ) -> SignedGammaMixture {
        let scheme = &self.skeleton.scheme;
        let theta = model.theta();
        let x_t = scheme.deadline / theta;
        let p = target.cause_prob(model);
        let (ln_p, ln_q) = (p.ln(), (1.0 - p).ln());
        let prob_zero = self.prob_zero(model, target);

        let mut terms = Vec::new();
        for (gi, group) in self.skeleton.groups.iter().enumerate() {
            let shape = group.shape;
            for i in 1..=shape {
                let ln_binom = if binomial_variant {
                    ln_gamma(shape as f64 + 1.0)
                        - ln_gamma(i as f64 + 1.0)
                        - ln_gamma((shape - i) as f64 + 1.0)
                } else {
                    0.0
                };
                let ln_slice = ln_binom + i as f64 * ln_p + (shape - i) as f64 * ln_q;
                for (ei, e) in group.entries.iter().enumerate() {
                    let origin = match group.case {
                        TerminationKind::AtDeadline => TermOrigin::Deadline {
                            j: shape,
                            i,
                            v: e.v,
                        },
                        TerminationKind::AtKthFailure => TermOrigin::KthFailure { i, v: e.v },
                        TerminationKind::AtMthFailure => TermOrigin::MthFailure { i, v: e.v },
                    };
                    terms.push(MixtureTerm {
                        ln_weight: ln_slice + e.ln_mag - x_t * e.gamma_mult as f64,
                        negative: e.negative,
                        component: ShiftedGamma {
                            shift: scheme.deadline * e.gamma_mult as f64 / i as f64,
                            shape,
                            rate: i as f64 / theta,
                        },
                        origin,
                        group_idx: gi as u32,
                        entry_idx: ei as u32,
                        cause_count: i,
                    });
                }
            }
        }
        SignedGammaMixture {
            skeleton: Arc::clone(&self.skeleton),
            terms,
            normalizer: (1.0 - prob_zero).max(f64::MIN_POSITIVE),
            prob_zero,
            target,
            binomial_variant,
            model: *model,
            x_t,
            ln_p,
            ln_q,
        }
    }
}

impl SignedGammaMixture {
    pub fn terms(&self) -> &[MixtureTerm] {
        &self.terms
    }

    /// Exact rational coefficient (gamma products only) behind a term's
    /// weight.
    pub fn term_coefficient(&self, term: &MixtureTerm) -> &num_rational::BigRational {
        &self.skeleton.groups[term.group_idx as usize].entries[term.entry_idx as usize].coef
    }

    /// P(D_target > 0), the conditioning normalizer.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn prob_zero(&self) -> f64 {
        self.prob_zero
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn model(&self) -> &ExpCompetingModel {
        &self.model
    }

    pub fn binomial_variant(&self) -> bool {
        self.binomial_variant
    }

    /// Sum of all signed weights; equals the normalizer when the mixture is
    /// correctly normalized.
    pub fn total_slice_mass(&self) -> f64 {
        let sum = signed_logsum(self.terms.iter().map(|t| LogTerm {
            ln_mag: t.ln_weight,
            negative: t.negative,
        }));
        if sum.cancellation >= ESCALATION_THRESHOLD {
            sum.value
        } else {
            self.escalated(|_, _| Big::from_f64(1.0)).to_f64()
        }
    }

    /// Smallest component shift (the density is zero at or below it).
    pub fn min_shift(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.component.shift)
            .fold(f64::INFINITY, f64::min)
    }

    /// Conditional mean and second moment: term-wise shifted-gamma moments
    /// under the signed weights.
    pub fn moments(&self) -> (f64, f64) {
        let mut m1 = crate::numeric::NeumaierSum::default();
        let mut m2 = crate::numeric::NeumaierSum::default();
        for t in &self.terms {
            let w = t.weight();
            let (a, b, c) = (
                t.component.shift,
                t.component.shape as f64,
                t.component.rate,
            );
            m1.add(w * (a + b / c));
            m2.add(w * (a * a + 2.0 * a * b / c + b * (b + 1.0) / (c * c)));
        }
        (m1.value() / self.normalizer, m2.value() / self.normalizer)
    }

    fn escalated(&self, component_factor: impl Fn(&MixtureTerm, &Big) -> Big) -> Big {
        let p = Big::from_f64(self.ln_p.exp());
        let q = Big::from_f64(self.ln_q.exp());
        let mut acc = Big::zero();
        for t in &self.terms {
            let e = &self.skeleton.groups[t.group_idx as usize].entries[t.entry_idx as usize];
            let shape = t.component.shape as u64;
            let mut w = Big::from_rational(&e.coef);
            if self.binomial_variant {
                w = w.mul(&Big::from_bigint(&binomial_bigint(
                    shape,
                    t.cause_count as u64,
                )));
            }
            w = w
                .mul(&p.powi(t.cause_count as usize))
                .mul(&q.powi((shape - t.cause_count as u64) as usize))
                .mul(&Big::from_f64(-self.x_t * e.gamma_mult as f64).exp());
            acc = acc.add(&w.mul(&component_factor(t, &w)));
        }
        acc
    }

    /// Conditional density at x. Sub-epsilon negative excursions from the
    /// signed sum are clamped to zero; deeper ones trigger extended-precision
    /// re-evaluation, and CancellationOverflow only if that also fails.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let logterms: Vec<LogTerm> = self
            .terms
            .iter()
            .filter_map(|t| {
                t.component.ln_pdf(x).map(|lp| LogTerm {
                    ln_mag: t.ln_weight + lp,
                    negative: t.negative,
                })
            })
            .collect();
        if logterms.is_empty() {
            return Ok(0.0);
        }
        let sum = signed_logsum(logterms.iter().copied());
        let value = sum.value / self.normalizer;
        if sum.cancellation >= ESCALATION_THRESHOLD && value >= 0.0 {
            return Ok(value);
        }
        if value < 0.0 && sum.cancellation >= 1e-12 {
            // Harmless sub-epsilon negativity of the signed representation.
            return Ok(0.0);
        }
        let big = self.escalated(|t, _| {
            match t.component.ln_pdf(x) {
                // exp(ln pdf) recomputed in extended precision from raw parts
                Some(_) => {
                    let y = Big::from_f64(x - t.component.shift);
                    let b = t.component.shape;
                    let rate = Big::from_f64(t.component.rate);
                    let mut v = rate.powi(b as usize).mul(&y.powi(b as usize - 1));
                    v = v.mul(&rate.mul(&y).neg().exp());
                    let fact: f64 = ln_gamma(b as f64);
                    v.div(&Big::from_f64(fact).exp())
                }
                None => Big::zero(),
            }
        });
        let v = big.to_f64() / self.normalizer;
        if v < -1e-12 * self.peak_scale() {
            return Err(Error::CancellationOverflow(format!(
                "density at x = {x} remains negative ({v:.3e}) after extended-precision evaluation"
            )));
        }
        Ok(v.max(0.0))
    }

    fn peak_scale(&self) -> f64 {
        // Rough density scale: the sharpest component has spread theta/shape.
        self.terms
            .iter()
            .map(|t| t.component.rate / (t.component.shape as f64).sqrt())
            .fold(0.0, f64::max)
            .max(1.0)
    }

    /// Conditional CDF at x: term-wise regularized lower incomplete gamma.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= self.min_shift() {
            return Ok(0.0);
        }
        let logterms: Vec<LogTerm> = self
            .terms
            .iter()
            .filter_map(|t| {
                let p = t.component.cdf(x);
                (p > 0.0).then(|| LogTerm {
                    ln_mag: t.ln_weight + p.ln(),
                    negative: t.negative,
                })
            })
            .collect();
        if logterms.is_empty() {
            return Ok(0.0);
        }
        let sum = signed_logsum(logterms.iter().copied());
        let value = sum.value / self.normalizer;
        if sum.cancellation >= ESCALATION_THRESHOLD && value >= 0.0 {
            return Ok(value.min(1.0));
        }
        if value < 0.0 && sum.cancellation >= 1e-12 {
            return Ok(0.0);
        }
        let big = self.escalated(|t, _| {
            let y = Big::from_f64(t.component.rate * (x - t.component.shift));
            reg_lower_gamma_big(t.component.shape, &y)
        });
        let v = big.to_f64() / self.normalizer;
        if v < -1e-9 {
            return Err(Error::CancellationOverflow(format!(
                "CDF at x = {x} remains negative ({v:.3e}) after extended-precision evaluation"
            )));
        }
        Ok(v.clamp(0.0, 1.0))
    }

    /// Numerical integral of the density over its support, with panel
    /// boundaries at the component shifts (the density has kinks there).
    pub fn integrate_pdf(&self, tol: f64) -> Result<f64> {
        let mut shifts: Vec<f64> = self.terms.iter().map(|t| t.component.shift).collect();
        shifts.push(0.0);
        shifts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        shifts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));

        // Extend past the slowest tail until the remaining mass bound is
        // negligible.
        let slow = self
            .terms
            .iter()
            .map(|t| t.component.shift + (t.component.shape as f64 + 60.0) / t.component.rate)
            .fold(0.0, f64::max);
        let mut hi = slow;
        while self.tail_bound(hi) > tol / 10.0 {
            hi *= 2.0;
        }
        shifts.push(hi);

        let f = |x: f64| self.pdf(x).unwrap_or(0.0);
        let mut total = 0.0;
        for w in shifts.windows(2) {
            if w[1] > w[0] {
                total += adaptive_simpson(&f, w[0], w[1], tol / shifts.len() as f64);
            }
        }
        Ok(total)
    }

    /// Upper bound on the absolute mass beyond x.
    fn tail_bound(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let q = 1.0 - t.component.cdf(x);
                t.ln_weight.exp() * q
            })
            .sum::<f64>()
            / self.normalizer
    }

    /// Data for plotting: (x, pdf, cdf) on a caller-specified grid.
    pub fn plot_data(&self, grid: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
        grid.iter()
            .map(|&x| Ok((x, self.pdf(x)?, self.cdf(x)?)))
            .collect()
    }
}

/// Identifies one conditioning slice of the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slice {
    /// Termination at the deadline with exactly j failures.
    Deadline { j: u32 },
    /// Termination at the guaranteed k-th failure.
    KthFailure,
    /// All m failures observed.
    MthFailure,
}

/// Conditional moment generating function of the MLE given a slice and i
/// failures of the target cause, at argument `t`. Defined for `t < i/theta`.
pub fn conditional_mgf(
    model: &ExpCompetingModel,
    scheme: &CensoringScheme,
    slice: Slice,
    i: u32,
    t: f64,
) -> Result<f64> {
    let dist = SchemeDistribution::new(scheme)?;
    let theta = model.theta();
    let (case, shape) = match slice {
        Slice::Deadline { j } => (TerminationKind::AtDeadline, j),
        Slice::KthFailure => (TerminationKind::AtKthFailure, scheme.k),
        Slice::MthFailure => (TerminationKind::AtMthFailure, scheme.m),
    };
    if i < 1 || i > shape {
        return Err(Error::InvalidArgument(format!(
            "cause count i = {i} outside 1..={shape}"
        )));
    }
    if t >= i as f64 / theta {
        return Err(Error::OutOfDomain(format!(
            "mgf argument t = {t} must be below i/theta = {}",
            i as f64 / theta
        )));
    }
    let group = dist
        .skeleton
        .group(case, shape)
        .ok_or_else(|| Error::InvalidArgument("no such slice for this scheme".into()))?;

    // Tilted rate (1/theta - t/i) in the numerator, 1/theta in the
    // denominator; the cause-probability factors cancel in the ratio.
    let tilted = 1.0 / theta - t / i as f64;
    let numer = signed_logsum(group.entries.iter().map(|e| LogTerm {
        ln_mag: e.ln_mag - scheme.deadline * tilted * e.gamma_mult as f64,
        negative: e.negative,
    }));
    let denom = signed_logsum(group.entries.iter().map(|e| LogTerm {
        ln_mag: e.ln_mag - scheme.deadline / theta * e.gamma_mult as f64,
        negative: e.negative,
    }));
    if numer.cancellation < ESCALATION_THRESHOLD || denom.cancellation < ESCALATION_THRESHOLD {
        let eval = |rate: f64| {
            let mut acc = Big::zero();
            for e in &group.entries {
                let expo = Big::from_f64(-scheme.deadline * rate * e.gamma_mult as f64).exp();
                acc = acc.add(&Big::from_rational(&e.coef).mul(&expo));
            }
            acc
        };
        let n = eval(tilted);
        let d = eval(1.0 / theta);
        return Ok(n.div(&d).to_f64() * (theta * tilted).powi(-(shape as i32)));
    }
    Ok(numer.value / denom.value * (theta * tilted).powi(-(shape as i32)))
}

/// Convenience constructors mirroring the module operations.
pub fn build_mixture(
    model: &ExpCompetingModel,
    scheme: &CensoringScheme,
    target: Target,
) -> Result<SignedGammaMixture> {
    Ok(SchemeDistribution::new(scheme)?.mixture(model, target))
}

pub fn case_probabilities(
    model: &ExpCompetingModel,
    scheme: &CensoringScheme,
) -> Result<CaseProbabilities> {
    Ok(SchemeDistribution::new(scheme)?.case_probabilities(model))
}

pub fn prob_d_zero(
    model: &ExpCompetingModel,
    scheme: &CensoringScheme,
    target: Target,
) -> Result<f64> {
    Ok(SchemeDistribution::new(scheme)?.prob_zero(model, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scheme_iii(n: u32, m: u32, k: u32, t: f64) -> CensoringScheme {
        let mut r = vec![0; m as usize];
        r[m as usize - 1] = n - m;
        CensoringScheme::new(n, m, k, t, r).unwrap()
    }

    fn scheme_i(n: u32, m: u32, k: u32, t: f64) -> CensoringScheme {
        let mut r = vec![0; m as usize];
        r[0] = n - m;
        CensoringScheme::new(n, m, k, t, r).unwrap()
    }

    fn model() -> ExpCompetingModel {
        ExpCompetingModel::new(1.0, 1.3).unwrap()
    }

    #[test]
    fn case_probabilities_sum_to_one() {
        for scheme in [
            scheme_i(20, 14, 3, 1.2),
            scheme_iii(20, 18, 5, 1.2),
            scheme_i(20, 14, 3, 0.25),
            scheme_iii(12, 9, 4, 3.0),
        ] {
            let cp = case_probabilities(&model(), &scheme).unwrap();
            assert!(
                (cp.total() - 1.0).abs() < 1e-10,
                "total {} for scheme {:?}",
                cp.total(),
                scheme
            );
        }
    }

    #[test]
    fn deadline_to_zero_forces_kth_case() {
        let scheme = scheme_i(20, 14, 3, 1e-9);
        let cp = case_probabilities(&model(), &scheme).unwrap();
        assert!(cp.kth_failure > 1.0 - 1e-6, "kth {}", cp.kth_failure);
    }

    #[test]
    fn deadline_to_infinity_forces_mth_case() {
        let scheme = scheme_i(20, 14, 3, 1e4);
        let cp = case_probabilities(&model(), &scheme).unwrap();
        assert!(cp.mth_failure > 1.0 - 1e-12, "mth {}", cp.mth_failure);
    }

    #[test]
    fn published_deadline_variant_breaks_sum_to_one() {
        // The originally published deadline-case probability disagrees once
        // removals occur among the first j failures; the sum over cases then
        // misses 1 by far more than the evaluation tolerance.
        let scheme = scheme_i(20, 14, 3, 0.25);
        let dist = SchemeDistribution::new(&scheme).unwrap();
        let cp = dist.case_probabilities(&model());
        let published = published_deadline_coefficients(&scheme).unwrap();
        let x_t = scheme.deadline / model().theta();
        let mut total = cp.kth_failure + cp.mth_failure;
        for grp in &published {
            total += signed_logsum(grp.entries.iter().map(|e| LogTerm {
                ln_mag: e.ln_mag - x_t * e.gamma_mult as f64,
                negative: e.negative,
            }))
            .value;
        }
        assert!(
            (total - 1.0).abs() > 1e-5,
            "published variant total {total}"
        );
        assert!((cp.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn published_variant_matches_for_late_removals() {
        // With no removals before the last failure the published form agrees.
        let scheme = scheme_iii(12, 9, 3, 0.8);
        let dist = SchemeDistribution::new(&scheme).unwrap();
        let cp = dist.case_probabilities(&model());
        let published = published_deadline_coefficients(&scheme).unwrap();
        let x_t = scheme.deadline / model().theta();
        for (grp, &(_, p)) in published.iter().zip(cp.deadline_by_j.iter()) {
            let s = signed_logsum(grp.entries.iter().map(|e| LogTerm {
                ln_mag: e.ln_mag - x_t * e.gamma_mult as f64,
                negative: e.negative,
            }))
            .value;
            assert_relative_eq!(s, p, max_relative = 1e-9);
        }
    }

    #[test]
    fn prob_zero_limits() {
        let scheme = scheme_iii(10, 8, 2, 1.0);
        // Cause-1 lifetime enormous: its failures never happen.
        let skewed = ExpCompetingModel::new(1e12, 1.0).unwrap();
        let p0 = prob_d_zero(&skewed, &scheme, Target::Theta1).unwrap();
        assert!(p0 > 1.0 - 1e-6, "p0 {p0}");
        // Symmetry at theta1 = theta2.
        let sym = ExpCompetingModel::new(1.0, 1.0).unwrap();
        let a = prob_d_zero(&sym, &scheme, Target::Theta1).unwrap();
        let b = prob_d_zero(&sym, &scheme, Target::Theta2).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn term_count_matches_index_ranges() {
        let scheme = scheme_iii(20, 18, 5, 1.2);
        let mix = build_mixture(&model(), &scheme, Target::Theta1).unwrap();
        let expected: usize = (5..18).map(|j| j * (j + 1)).sum::<usize>() + 5 * 5 + 18 * 19;
        assert_eq!(mix.terms().len(), expected);
        for t in mix.terms() {
            assert!(t.component.shift >= 0.0);
            assert!(t.component.rate > 0.0);
            assert_relative_eq!(
                t.component.rate,
                match t.origin {
                    TermOrigin::Deadline { i, .. }
                    | TermOrigin::KthFailure { i, .. }
                    | TermOrigin::MthFailure { i, .. } => i as f64 / model().theta(),
                },
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn total_probability_identity() {
        let scheme = scheme_iii(20, 18, 5, 1.2);
        let dist = SchemeDistribution::new(&scheme).unwrap();
        for target in [Target::Theta1, Target::Theta2] {
            let mix = dist.mixture(&model(), target);
            let total = mix.total_slice_mass() + mix.prob_zero();
            assert!((total - 1.0).abs() < 1e-8, "total {total} for {target:?}");
        }
    }

    #[test]
    fn without_binomial_variant_identity_fails() {
        let scheme = scheme_iii(20, 18, 5, 1.2);
        let dist = SchemeDistribution::new(&scheme).unwrap();
        let mix = dist.mixture_with_variant(&model(), Target::Theta1, false);
        let total = mix.total_slice_mass() + mix.prob_zero();
        assert!(
            (total - 1.0).abs() > 1e-3,
            "bare published weights should not normalize: {total}"
        );
    }

    #[test]
    fn case_c_slice_mass_matches_conditional() {
        // Sum of full-sample-case weights = P(case) * (1 - q^m).
        let scheme = scheme_iii(20, 18, 5, 1.2);
        let dist = SchemeDistribution::new(&scheme).unwrap();
        let m = model();
        let mix = dist.mixture(&m, Target::Theta1);
        let q = 1.0 - Target::Theta1.cause_prob(&m);
        let mass = signed_logsum(
            mix.terms()
                .iter()
                .filter(|t| matches!(t.origin, TermOrigin::MthFailure { .. }))
                .map(|t| LogTerm {
                    ln_mag: t.ln_weight,
                    negative: t.negative,
                }),
        )
        .value;
        let cp = dist.case_probabilities(&m);
        assert_relative_eq!(mass, cp.mth_failure * (1.0 - q.powi(18)), epsilon = 1e-8);
    }

    #[test]
    fn pdf_zero_below_min_shift_and_integrates_to_one() {
        let scheme = scheme_iii(10, 8, 2, 1.0);
        let mix = build_mixture(&model(), &scheme, Target::Theta1).unwrap();
        assert_eq!(mix.pdf(mix.min_shift() * 0.5).unwrap(), 0.0);
        let integral = mix.integrate_pdf(1e-9).unwrap();
        assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
    }

    #[test]
    fn cdf_limits_and_monotonicity() {
        let scheme = scheme_i(12, 9, 3, 0.9);
        let mix = build_mixture(&model(), &scheme, Target::Theta1).unwrap();
        assert_eq!(mix.cdf(0.0).unwrap(), 0.0);
        assert!((mix.cdf(1e6).unwrap() - 1.0).abs() < 1e-8);
        let mut prev = -1.0;
        for idx in 0..200 {
            let x = idx as f64 * 0.05;
            let c = mix.cdf(x).unwrap();
            assert!(
                c >= prev - 1e-12,
                "cdf must not decrease: {c} after {prev} at {x}"
            );
            prev = c;
        }
    }

    #[test]
    fn cdf_nonincreasing_in_theta1() {
        // Stochastic monotonicity in the parameter, asserted numerically.
        let scheme = scheme_i(12, 9, 3, 0.9);
        let dist = SchemeDistribution::new(&scheme).unwrap();
        for &x in &[0.4, 0.8, 1.5, 3.0] {
            let mut prev = f64::INFINITY;
            for idx in 0..20 {
                let t1 = 0.2 * 1.35f64.powi(idx);
                let m = ExpCompetingModel::new(t1, 1.3).unwrap();
                let c = dist.mixture(&m, Target::Theta1).cdf(x).unwrap();
                assert!(
                    c <= prev + 1e-9,
                    "cdf in theta1 rose: {c} after {prev} at x={x}"
                );
                prev = c;
            }
        }
    }

    #[test]
    fn mgf_at_zero_is_one_and_derivative_matches_slice_mean() {
        let scheme = scheme_iii(10, 8, 2, 1.0);
        let m = model();
        let dist = SchemeDistribution::new(&scheme).unwrap();
        let mix = dist.mixture_with_variant(&m, Target::Theta1, false);
        for (slice, shape, i) in [
            (Slice::Deadline { j: 4 }, 4u32, 2u32),
            (Slice::KthFailure, 2, 1),
            (Slice::MthFailure, 8, 3),
        ] {
            let at_zero = conditional_mgf(&m, &scheme, slice, i, 0.0).unwrap();
            assert_relative_eq!(at_zero, 1.0, max_relative = 1e-10);

            // Central finite difference of the MGF at 0 vs the slice mean
            // sum_v w (shift + shape/rate) / sum_v w.
            let h = 1e-6;
            let d = (conditional_mgf(&m, &scheme, slice, i, h).unwrap()
                - conditional_mgf(&m, &scheme, slice, i, -h).unwrap())
                / (2.0 * h);
            let sel = |t: &&MixtureTerm| match (slice, t.origin) {
                (Slice::Deadline { j }, TermOrigin::Deadline { j: tj, i: ti, .. }) => {
                    tj == j && ti == i
                }
                (Slice::KthFailure, TermOrigin::KthFailure { i: ti, .. }) => ti == i,
                (Slice::MthFailure, TermOrigin::MthFailure { i: ti, .. }) => ti == i,
                _ => false,
            };
            let mut wsum = 0.0;
            let mut msum = 0.0;
            for t in mix.terms().iter().filter(sel) {
                let w = t.weight();
                wsum += w;
                msum += w * (t.component.shift + shape as f64 / t.component.rate);
            }
            assert_relative_eq!(d, msum / wsum, max_relative = 1e-5);
        }
    }

    #[test]
    fn mgf_domain_error() {
        let scheme = scheme_iii(10, 8, 2, 1.0);
        let m = model();
        let bad = conditional_mgf(&m, &scheme, Slice::MthFailure, 2, 2.0 / m.theta());
        assert!(matches!(bad, Err(Error::OutOfDomain(_))));
    }
}
