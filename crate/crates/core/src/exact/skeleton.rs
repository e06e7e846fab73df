//! Scheme-level structure of the exact MLE distribution: the alternating-sum
//! coefficients are ratios of products of gamma differences, independent of
//! the model parameters. They are computed once per scheme in exact integer
//! arithmetic and reused for every parameter value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::numeric::ln_rational;
use crate::sample::TerminationKind;
use crate::scheme::CensoringScheme;

/// One summand of an alternating sum: exact coefficient plus the integer
/// multiplier `g` of the exponent, so the addend is `coef * exp(-(T/theta) g)`
/// and the matching density component is shifted by `T g / i`.
#[derive(Debug, Clone)]
pub struct SkeletonEntry {
    pub coef: BigRational,
    pub ln_mag: f64,
    pub negative: bool,
    pub gamma_mult: u64,
    pub v: u32,
}

/// The alternating sum attached to one conditioning slice.
#[derive(Debug, Clone)]
pub struct SkeletonGroup {
    pub case: TerminationKind,
    /// Number of failures in the slice (j for the deadline case, k and m for
    /// the boundary cases). Also the gamma shape of every component.
    pub shape: u32,
    pub entries: Vec<SkeletonEntry>,
}

/// All coefficient groups of a scheme.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub scheme: CensoringScheme,
    pub gamma: Vec<u64>,
    pub groups: Vec<SkeletonGroup>,
}

fn entry(sign_v: u32, num: BigInt, den: BigInt, gamma_mult: u64) -> SkeletonEntry {
    let num = if sign_v % 2 == 1 { -num } else { num };
    let coef = BigRational::new(num, den);
    let (ln_mag, negative) = ln_rational(&coef);
    SkeletonEntry {
        coef,
        ln_mag,
        negative,
        gamma_mult,
        v: sign_v,
    }
}

impl Skeleton {
    pub fn new(scheme: &CensoringScheme) -> Result<Self> {
        scheme.validate()?;
        let gamma = scheme.gamma_seq();
        let g = |v1: usize| BigInt::from(gamma[v1 - 1]); // 1-based accessor
        let (m, k) = (scheme.m as usize, scheme.k as usize);
        let mut groups = Vec::with_capacity(m - k + 2);

        // Deadline case: slices J = j for j = k..m-1; v-th addend carries
        // gamma_{j-v+1}.
        for j in k..m {
            let prod: BigInt = (1..=j).map(g).product();
            let mut entries = Vec::with_capacity(j + 1);
            for v in 0..=j {
                let d1: BigInt = (1..=v).map(|h| g(j + 1 - v) - g(j + 1 - v + h)).product();
                let d2: BigInt = (1..=(j - v)).map(|h| g(h) - g(j - v + 1)).product();
                entries.push(entry(v as u32, prod.clone(), d1 * d2, gamma[j - v]));
            }
            groups.push(SkeletonGroup {
                case: TerminationKind::AtDeadline,
                shape: j as u32,
                entries,
            });
        }

        // Guarantee case: k failures past the deadline; addend v carries
        // gamma_{k-v} (also as an extra denominator factor).
        {
            let prod: BigInt = (1..=k).map(g).product();
            let mut entries = Vec::with_capacity(k);
            for v in 0..k {
                let d1: BigInt = (1..=v).map(|h| g(k - v) - g(k - v + h)).product();
                let d2: BigInt = (1..(k - v)).map(|h| g(h) - g(k - v)).product();
                entries.push(entry(
                    v as u32,
                    prod.clone(),
                    d1 * d2 * g(k - v),
                    gamma[k - v - 1],
                ));
            }
            groups.push(SkeletonGroup {
                case: TerminationKind::AtKthFailure,
                shape: k as u32,
                entries,
            });
        }

        // Full-sample case: all m failures before the deadline; addend v
        // carries gamma_{m-v+1} - gamma_{m+1}.
        {
            let prod: BigInt = (1..=m).map(g).product();
            let mut entries = Vec::with_capacity(m + 1);
            for v in 0..=m {
                let d1: BigInt = (1..=v).map(|h| g(m - v + 1) - g(m - v + 1 + h)).product();
                let d2: BigInt = (1..=(m - v)).map(|h| g(h) - g(m - v + 1)).product();
                entries.push(entry(
                    v as u32,
                    prod.clone(),
                    d1 * d2,
                    gamma[m - v] - gamma[m],
                ));
            }
            groups.push(SkeletonGroup {
                case: TerminationKind::AtMthFailure,
                shape: m as u32,
                entries,
            });
        }

        Ok(Skeleton {
            scheme: scheme.clone(),
            gamma,
            groups,
        })
    }

    pub fn group(&self, case: TerminationKind, shape: u32) -> Option<&SkeletonGroup> {
        self.groups
            .iter()
            .find(|grp| grp.case == case && grp.shape == shape)
    }
}

/// The deadline-case probability coefficients in their originally published
/// form, which carries `prod_{v=1}^{j+1} gamma_v` and an extra denominator
/// factor `gamma_{j-u+1} - u`. For designs with removals among the first j
/// failures this disagrees with the coefficients above (and with simulation);
/// it is kept so the discrepancy can be demonstrated rather than silently
/// hidden.
pub fn published_deadline_coefficients(scheme: &CensoringScheme) -> Result<Vec<SkeletonGroup>> {
    scheme.validate()?;
    let gamma = scheme.gamma_seq();
    let g = |v1: usize| BigInt::from(gamma[v1 - 1]);
    let (m, k) = (scheme.m as usize, scheme.k as usize);
    let mut groups = Vec::new();
    for j in k..m {
        let prod: BigInt = (1..=j + 1).map(g).product();
        let mut entries = Vec::with_capacity(j + 1);
        for u in 0..=j {
            let d1: BigInt = (1..=u).map(|h| g(j + 1 - u) - g(j + 1 - u + h)).product();
            let d2: BigInt = (1..=(j - u)).map(|h| g(h) - g(j - u + 1)).product();
            let d3 = g(j - u + 1) - BigInt::from(u);
            if d3 == BigInt::from(0) {
                return Err(Error::DegenerateDenominator(format!(
                    "gamma_{} = {} equals u = {} in the published deadline-case sum (j = {})",
                    j - u + 1,
                    gamma[j - u],
                    u,
                    j
                )));
            }
            entries.push(entry(u as u32, prod.clone(), d1 * d2 * d3, gamma[j - u]));
        }
        groups.push(SkeletonGroup {
            case: TerminationKind::AtDeadline,
            shape: j as u32,
            entries,
        });
    }
    Ok(groups)
}

pub(crate) fn binomial_bigint(n: u64, k: u64) -> BigInt {
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, ToPrimitive, Zero};

    fn scheme_iii(n: u32, m: u32, k: u32, t: f64) -> CensoringScheme {
        let mut r = vec![0; m as usize];
        r[m as usize - 1] = n - m;
        CensoringScheme::new(n, m, k, t, r).unwrap()
    }

    #[test]
    fn group_shapes_and_counts() {
        let s = scheme_iii(20, 18, 5, 1.2);
        let sk = Skeleton::new(&s).unwrap();
        // Deadline slices j = 5..=17 with j+1 entries, then k and m+1.
        let mut expected: Vec<(TerminationKind, u32, usize)> = (5..18)
            .map(|j| (TerminationKind::AtDeadline, j, j as usize + 1))
            .collect();
        expected.push((TerminationKind::AtKthFailure, 5, 5));
        expected.push((TerminationKind::AtMthFailure, 18, 19));
        let got: Vec<_> = sk
            .groups
            .iter()
            .map(|g| (g.case, g.shape, g.entries.len()))
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn coefficients_sum_to_probabilities_at_deadline_zero() {
        // As T/theta -> infinity every exponential with positive gamma_mult
        // vanishes; only the full-sample v=0 entry (gamma_mult 0) survives and
        // its coefficient is exactly 1.
        let s = scheme_iii(12, 9, 3, 1.0);
        let sk = Skeleton::new(&s).unwrap();
        for grp in &sk.groups {
            for e in &grp.entries {
                if e.gamma_mult == 0 {
                    assert_eq!(grp.case, TerminationKind::AtMthFailure);
                    assert!(e.coef.is_one());
                }
            }
        }
    }

    #[test]
    fn signs_alternate() {
        let s = scheme_iii(10, 8, 2, 1.0);
        let sk = Skeleton::new(&s).unwrap();
        for grp in &sk.groups {
            for e in &grp.entries {
                assert_eq!(e.coef.is_negative(), e.v % 2 == 1);
                assert!(!e.coef.is_zero());
            }
        }
    }

    #[test]
    fn ln_mag_matches_rational() {
        let s = scheme_iii(15, 12, 4, 0.7);
        let sk = Skeleton::new(&s).unwrap();
        for grp in &sk.groups {
            for e in &grp.entries {
                let approx = e.coef.to_f64().unwrap();
                assert!(
                    (e.ln_mag - approx.abs().ln()).abs() < 1e-9,
                    "ln_mag {} vs {}",
                    e.ln_mag,
                    approx.abs().ln()
                );
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_bigint(6, 2).to_u64().unwrap(), 15);
        assert_eq!(binomial_bigint(25, 12).to_u64().unwrap(), 5200300);
        assert_eq!(binomial_bigint(5, 0).to_u64().unwrap(), 1);
    }
}
