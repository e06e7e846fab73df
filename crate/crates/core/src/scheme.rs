//! Censoring designs for generalized progressive hybrid censoring.
//!
//! A design puts `n` units on test, observes at most `m` failures and at
//! least `k`, removes `removals[i]` surviving units at the i-th failure, and
//! caps the duration near the deadline `T`: the experiment stops at
//! `T* = max(Z_k, min(T, Z_m))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generalized progressive hybrid censoring design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoringScheme {
    /// Units on test.
    pub n: u32,
    /// Maximum number of observed failures.
    pub m: u32,
    /// Guaranteed number of observed failures.
    pub k: u32,
    /// Prefixed deadline T (time units).
    #[serde(rename = "T")]
    pub deadline: f64,
    /// Planned removals at each failure, length m, summing to n - m.
    #[serde(rename = "R")]
    pub removals: Vec<u32>,
}

impl CensoringScheme {
    /// Build and validate a scheme.
    pub fn new(n: u32, m: u32, k: u32, deadline: f64, removals: Vec<u32>) -> Result<Self> {
        let scheme = CensoringScheme {
            n,
            m,
            k,
            deadline,
            removals,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    /// Check every design invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::SchemeInvalid("k must be at least 1".into()));
        }
        if !(self.k < self.m) {
            return Err(Error::SchemeInvalid(format!(
                "require 1 <= k < m <= n, got k = {}, m = {}",
                self.k, self.m
            )));
        }
        if !(self.m <= self.n) {
            return Err(Error::SchemeInvalid(format!(
                "require m <= n, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        if self.removals.len() != self.m as usize {
            return Err(Error::SchemeInvalid(format!(
                "removal vector has length {}, expected m = {}",
                self.removals.len(),
                self.m
            )));
        }
        let total: u64 = self.m as u64 + self.removals.iter().map(|&r| r as u64).sum::<u64>();
        if total != self.n as u64 {
            return Err(Error::SchemeInvalid(format!(
                "m + sum(R) = {} must equal n = {}",
                total, self.n
            )));
        }
        if !(self.deadline > 0.0) || !self.deadline.is_finite() {
            return Err(Error::SchemeInvalid(format!(
                "deadline T must be a positive finite time, got {}",
                self.deadline
            )));
        }
        Ok(())
    }

    /// Number of units remaining at the v-th failure, for v = 1..=m+1:
    /// `gamma_v = n - (v - 1) - sum(R_1..R_{v-1})`.
    ///
    /// Strictly decreasing with steps `1 + R_v >= 1`; `gamma_1 = n` and
    /// `gamma_{m+1} = 0`.
    pub fn gamma_seq(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.m as usize + 1);
        let mut removed: u64 = 0;
        for v in 1..=(self.m as u64 + 1) {
            out.push(self.n as u64 - (v - 1) - removed);
            if v <= self.m as u64 {
                removed += self.removals[(v - 1) as usize] as u64;
            }
        }
        out
    }

    /// Units withdrawn at the deadline when the first `j` failures (and
    /// their planned removals) have occurred: `R*_j = n - j - sum(R_1..R_j)`.
    pub fn terminal_removal(&self, j: u32) -> u32 {
        let sum: u32 = self.removals[..j as usize].iter().sum();
        self.n - j - sum
    }

    /// Units withdrawn at the k-th failure when the run stops there:
    /// `R*_k = n - k - sum(R_1..R_{k-1})`.
    pub fn guarantee_removal(&self) -> u32 {
        let sum: u32 = self.removals[..self.k as usize - 1].iter().sum();
        self.n - self.k - sum
    }
}

/// Validate a scheme, passing it through on success.
pub fn validate_scheme(scheme: CensoringScheme) -> Result<CensoringScheme> {
    scheme.validate()?;
    Ok(scheme)
}
