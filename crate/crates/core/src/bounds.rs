//! Closed-form bounds on the average-case ratio and the quantities behind them.
//!
//! Event A is "the `⌈n/2⌉`-th smallest cost is at most `h · t_min`". Under A
//! the expected social cost is at most `(2h + 1) t_1`; A fails with
//! probability below `e / (2πn)` once `F(h t_min) >= 11/12`, and combining the
//! two with the worst-case ratio `(n+1)/2` gives the `2h + 1.33` bound.

use std::f64::consts::{E, PI};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::MechanismOutcome;

/// Additive constant of the average-ratio bound `2h + 1.33`.
pub const THEOREM1_CONSTANT: f64 = 1.33;

/// Largest even `n` accepted by [`central_binomial_bound`].
pub const CENTRAL_BINOMIAL_MAX_N: u32 = 1024;

/// Slack on the `(2h+1) t_1` cap before an instance counts as exceeding it.
pub const CAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentralBinomial {
    pub n: u32,
    /// `C(n, n/2)`, rounded from the exact integer.
    pub exact: f64,
    /// `e / (π √n) · 2^n`.
    pub robbins_bound: f64,
    pub ln_exact: f64,
    pub ln_robbins_bound: f64,
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn check_central(n: u32) -> Result<()> {
    if n < 2 || n % 2 == 1 || n > CENTRAL_BINOMIAL_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "central binomial needs even n in [2, {CENTRAL_BINOMIAL_MAX_N}], got {n}"
        )));
    }
    Ok(())
}

fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    (v >> shift).to_f64().expect("64-bit mantissa").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `C(n, n/2)` next to its Stirling–Robbins upper estimate.
pub fn central_binomial_bound(n: u32) -> Result<CentralBinomial> {
    check_central(n)?;
    let exact_int = binomial(n, n / 2);
    let ln_exact = ln_biguint(&exact_int);
    let ln_robbins_bound = 1.0 - PI.ln() - 0.5 * (n as f64).ln() + n as f64 * std::f64::consts::LN_2;
    Ok(CentralBinomial {
        n,
        exact: exact_int.to_f64().unwrap_or(f64::INFINITY),
        robbins_bound: ln_robbins_bound.exp(),
        ln_exact,
        ln_robbins_bound,
    })
}

/// Integer certificate that `C(n, n/2) <= e 2^n / (π √n)`.
///
/// Uses `e > 2718281828 / 10^9` and `π < 3141592654 / 10^9` and squares both
/// sides: `C² · π_hi² · n <= e_lo² · 4^n` implies the real inequality.
pub fn robbins_certificate(n: u32) -> Result<bool> {
    check_central(n)?;
    let c = binomial(n, n / 2);
    let pi_hi = BigUint::from(3_141_592_654u64);
    let e_lo = BigUint::from(2_718_281_828u64);
    let lhs = &c * &c * &pi_hi * &pi_hi * BigUint::from(n);
    let rhs = &e_lo * &e_lo * (BigUint::one() << (2 * n as u64));
    Ok(lhs <= rhs)
}

/// `3^n >= n^3`, evaluated in integers.
pub fn cube_dominates(n: u32) -> bool {
    BigUint::from(3u32).pow(n) >= BigUint::from(n).pow(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventAStats {
    pub n: u32,
    pub k_half: u32,
    pub cdf_at_h_tmin: f64,
    /// `Σ_{k >= k_half} C(n,k) q^k (1-q)^{n-k}`.
    pub prob_exact: f64,
    /// `1 - e / (2πn)`.
    pub lemma3_lower_bound: f64,
}

/// Order-statistic index of event A; `⌈n/2⌉`.
pub fn k_half(n: u32) -> u32 {
    n.div_ceil(2)
}

pub fn lemma3_lower_bound(n: u32) -> f64 {
    1.0 - E / (2.0 * PI * n as f64)
}

/// Probability of event A when each cost lies below `h · t_min` with probability `q`.
pub fn event_a_probability(n: u32, q: f64) -> Result<EventAStats> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("event A needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("probability q must lie in [0, 1], got {q}")));
    }
    let kh = k_half(n);
    Ok(EventAStats {
        n,
        k_half: kh,
        cdf_at_h_tmin: q,
        prob_exact: binomial_upper_tail(n, kh, q),
        lemma3_lower_bound: lemma3_lower_bound(n),
    })
}

/// `ln(i!)` for `i = 0 ..= n`, summed with compensation.
fn ln_factorials(n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut sum = NeumaierSum::default();
    out.push(0.0);
    for i in 1..=n {
        sum.add((i as f64).ln());
        out.push(sum.value());
    }
    out
}

/// `Pr[Bin(n, q) >= k_min]`, one exponentiation per log-space term.
pub fn binomial_upper_tail(n: u32, k_min: u32, q: f64) -> f64 {
    if k_min == 0 {
        return 1.0;
    }
    if k_min > n {
        return 0.0;
    }
    if q == 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        return 1.0;
    }
    let lf = ln_factorials(n);
    let (ln_q, ln_p) = (q.ln(), (-q).ln_1p());
    let mut sum = NeumaierSum::default();
    for k in k_min..=n {
        let ln_c = lf[n as usize] - lf[k as usize] - lf[(n - k) as usize];
        sum.add((ln_c + k as f64 * ln_q + (n - k) as f64 * ln_p).exp());
    }
    sum.value().clamp(0.0, 1.0)
}

/// Compensated (Kahan–Babuška–Neumaier) accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct NeumaierSum {
    sum: f64,
    carry: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Cap on the expected social cost under event A: `(2h + 1) t_1`.
pub fn lemma1_cap(h: f64, t1: f64) -> f64 {
    (2.0 * h + 1.0) * t1
}

/// `2h + 1.33`.
pub fn theorem1_bound(h: f64) -> f64 {
    2.0 * h + THEOREM1_CONSTANT
}

/// The bound before loosening: `2h + 1 + (e / 4π) (n+1)/n`.
pub fn theorem1_proof_bound(h: f64, n: u32) -> f64 {
    2.0 * h + 1.0 + E / (4.0 * PI) * (n as f64 + 1.0) / n as f64
}

/// `2h + 1 + 3e / (8π)`, the `n = 2` worst case of [`theorem1_proof_bound`].
pub fn theorem1_tight_bound(h: f64) -> f64 {
    2.0 * h + 1.0 + 3.0 * E / (8.0 * PI)
}

/// `e / (2πn)`, the bound on `Pr[SC_M > (2h+1) t_1]`.
pub fn lemma4_bound(n: u32) -> f64 {
    E / (2.0 * PI * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma4Check {
    pub samples: usize,
    /// Instances with `SC_M > (2h+1) t_1`.
    pub violations: usize,
    pub violation_freq: f64,
    pub lemma4_bound: f64,
    /// Instances where event A held and the cap was still exceeded. Must be zero.
    pub implication_failures: usize,
}

impl Lemma4Check {
    /// `lemma4_bound` plus `sigmas` binomial standard errors of a frequency at that rate.
    pub fn allowance(&self, sigmas: f64) -> f64 {
        let p = self.lemma4_bound;
        p + sigmas * (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

/// Empirical counterpart of the tail bound on samples tagged with event A.
pub fn lemma4_check(samples: &[(MechanismOutcome<f64>, bool)], h: f64, n: u32) -> Result<Lemma4Check> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("cap-frequency check needs at least one sample".into()));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut violations = 0;
    let mut implication_failures = 0;
    for (outcome, event_a) in samples {
        if outcome.social_cost > lemma1_cap(h, outcome.optimal_cost) + CAP_TOLERANCE {
            violations += 1;
            if *event_a {
                implication_failures += 1;
            }
        }
    }
    Ok(Lemma4Check {
        samples: samples.len(),
        violations,
        violation_freq: violations as f64 / samples.len() as f64,
        lemma4_bound: lemma4_bound(n),
        implication_failures,
    })
}
