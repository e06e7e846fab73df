//! Numerical building blocks: compensated summation, signed log-space sums
//! with extended-precision escalation, incomplete gamma helpers, adaptive
//! quadrature and a Kolmogorov-Smirnov test.

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cell::RefCell;

pub(crate) const BIG_PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// One addend of a signed sum, in log space.
#[derive(Debug, Clone, Copy)]
pub struct LogTerm {
    pub ln_mag: f64,
    pub negative: bool,
}

/// Result of a signed log-space sum.
#[derive(Debug, Clone, Copy)]
pub struct SignedSum {
    pub value: f64,
    /// |sum| / sum(|terms|); 1 when no cancellation, 0 for full cancellation.
    pub cancellation: f64,
}

/// Sum signed terms given by log magnitudes. Terms are scaled by the largest
/// magnitude so the reduction never overflows, and accumulated with
/// compensation.
pub fn signed_logsum(terms: impl Iterator<Item = LogTerm> + Clone) -> SignedSum {
    let max_ln = terms
        .clone()
        .map(|t| t.ln_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_ln == f64::NEG_INFINITY {
        return SignedSum {
            value: 0.0,
            cancellation: 1.0,
        };
    }
    let mut sum = NeumaierSum::default();
    let mut abs = NeumaierSum::default();
    for t in terms {
        let v = (t.ln_mag - max_ln).exp();
        abs.add(v);
        sum.add(if t.negative { -v } else { v });
    }
    let (s, a) = (sum.value(), abs.value());
    SignedSum {
        value: s * max_ln.exp(),
        cancellation: if a > 0.0 { (s / a).abs() } else { 1.0 },
    }
}

/// Relative cancellation below which a signed sum must be recomputed in
/// extended precision (fewer than ~3 of f64's 16 digits survive).
pub(crate) const ESCALATION_THRESHOLD: f64 = 1e-13;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Extended-precision scalar used on the escalation path.
#[derive(Debug, Clone)]
pub(crate) struct Big(BigFloat);

impl Big {
    pub fn zero() -> Big {
        Big(BigFloat::from_f64(0.0, BIG_PRECISION))
    }

    pub fn from_f64(x: f64) -> Big {
        Big(BigFloat::from_f64(x, BIG_PRECISION))
    }

    pub fn from_bigint(x: &BigInt) -> Big {
        let (sign, digits) = x.to_u64_digits();
        let mut v = Big::zero();
        let shift = Big::from_f64(18_446_744_073_709_551_616.0); // 2^64
        for d in digits.iter().rev() {
            v = v.mul(&shift).add(&Big::from_f64(*d as f64));
        }
        if sign == num_bigint::Sign::Minus {
            v.0.inv_sign();
        }
        v
    }

    pub fn from_rational(x: &BigRational) -> Big {
        Big::from_bigint(x.numer()).div(&Big::from_bigint(x.denom()))
    }

    pub fn add(&self, o: &Big) -> Big {
        Big(self.0.add(&o.0, BIG_PRECISION, RM))
    }

    pub fn sub(&self, o: &Big) -> Big {
        Big(self.0.sub(&o.0, BIG_PRECISION, RM))
    }

    pub fn mul(&self, o: &Big) -> Big {
        Big(self.0.mul(&o.0, BIG_PRECISION, RM))
    }

    pub fn div(&self, o: &Big) -> Big {
        Big(self.0.div(&o.0, BIG_PRECISION, RM))
    }

    pub fn exp(&self) -> Big {
        CONSTS.with(|cc| Big(self.0.exp(BIG_PRECISION, RM, &mut cc.borrow_mut())))
    }

    pub fn powi(&self, n: usize) -> Big {
        Big(self.0.powi(n, BIG_PRECISION, RM))
    }

    pub fn neg(&self) -> Big {
        Big(self.0.neg())
    }

    /// Lossy conversion back to f64 (overflow maps to +-inf, underflow to 0).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_inf_neg() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        let (words, _n, sign, e, _) = self.0.as_raw_parts().expect("finite value");
        // Mantissa words are little endian; the value is 0.m * 2^e. Two words
        // carry more than f64 precision.
        const W: f64 = 18_446_744_073_709_551_616.0; // 2^64
        let mut it = words.iter().rev();
        let msw = it.next().copied().unwrap_or(0) as f64;
        let next = it.next().copied().unwrap_or(0) as f64;
        let frac = msw / W + next / (W * W);
        // Scale by 2^e in exact power-of-two steps.
        let mut mag = frac;
        let mut e = e as i64;
        while e > 900 {
            mag *= 2f64.powi(900);
            e -= 900;
            if mag.is_infinite() {
                break;
            }
        }
        while e < -900 {
            mag *= 2f64.powi(-900);
            e += 900;
            if mag == 0.0 {
                break;
            }
        }
        mag *= 2f64.powi(e as i32);
        if sign == astro_float::Sign::Neg {
            -mag
        } else {
            mag
        }
    }
}

/// Natural log of a positive big integer, accurate to f64 precision for any
/// size.
pub fn ln_bigint(x: &BigInt) -> f64 {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 900 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// (ln |x|, is_negative) of a nonzero rational.
pub fn ln_rational(x: &BigRational) -> (f64, bool) {
    debug_assert!(!x.is_zero());
    (
        ln_bigint(&x.numer().abs()) - ln_bigint(&x.denom().abs()),
        x.is_negative(),
    )
}

/// Regularized lower incomplete gamma P(shape, x) for integer shape.
pub fn reg_lower_gamma(shape: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(shape as f64, x)
}

/// P(shape, x) in extended precision via the finite sum
/// Q(b, x) = e^{-x} sum_{r<b} x^r / r!.
pub(crate) fn reg_lower_gamma_big(shape: u32, x: &Big) -> Big {
    if !x.0.is_positive() {
        return Big::zero();
    }
    let one = Big::from_f64(1.0);
    let mut term = one.clone();
    let mut series = one.clone();
    for r in 1..shape {
        term = term.mul(x).div(&Big::from_f64(r as f64));
        series = series.add(&term);
    }
    one.sub(&x.neg().exp().mul(&series))
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if !(b > a) {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48)
}

/// Two-sided Kolmogorov-Smirnov statistic of a sorted sample against a CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (idx, &x) in sorted.iter().enumerate() {
        let fx = cdf(x);
        d = d
            .max(((idx + 1) as f64 / n - fx).abs())
            .max((fx - idx as f64 / n).abs());
    }
    d
}

/// Asymptotic p-value of the two-sided KS statistic (Stephens' small-sample
/// correction applied to the Kolmogorov series).
pub fn ks_pvalue(n: usize, d: f64) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut p = 0.0;
    for j in 1..=100 {
        let t =
            2.0 * (-1.0f64).powi(j - 1) * (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        p += t;
        if t.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}
