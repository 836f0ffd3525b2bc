//! The randomized single-task allocation rule and its derived quantities.
//!
//! With costs sorted ascending `t_1 <= ... <= t_n` and `r_i = t_1 / t_i`, the
//! allocation probabilities are
//!
//! ```text
//! p_1 = ∫_0^1 ∏_{i>=2} (1 - u r_i) du
//! p_k = r_k ∫_0^1 (1 - u) ∏_{i>=2, i!=k} (1 - u r_i) du      (k >= 2)
//! ```
//!
//! which is the original pair of integrals after the substitution `y = t_1 u`
//! and collapsing the inner integral of `p_k` (`∫_0^a ∫_0^y f = ∫_0^a (a - x) f`).
//! Both integrands are polynomials of degree `n - 1`, so a Gauss–Legendre rule
//! with `⌈n/2⌉ + 1` nodes evaluates them exactly up to rounding. Products are
//! accumulated directly from factors in `(0, 1]`; nothing is expanded.
//!
//! A machine that declares `d` while its true cost is `t` and then receives the
//! task pays `max(t, d)`.

mod oracle;

pub use oracle::{allocate_oracle, ORACLE_MAX_MACHINES};

use crate::error::{Error, Result};
use crate::quadrature::{self, GaussLegendre};
use crate::scalar::{Real, Scalar};

/// Largest instance accepted by [`allocate`] and [`social_cost`].
pub const MAX_MACHINES: usize = 4096;

/// Private processing times, in the caller's machine order.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector<T> {
    costs: Vec<T>,
}

impl<T: Scalar> CostVector<T> {
    pub fn new(costs: Vec<T>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::EmptyCosts);
        }
        if let Some((index, c)) = costs.iter().enumerate().find(|(_, c)| !c.is_positive_finite()) {
            return Err(Error::InvalidCost {
                index,
                value: format!("{c:?}"),
            });
        }
        Ok(Self { costs })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.costs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.costs
    }

    pub fn min(&self) -> T {
        self.costs
            .iter()
            .skip(1)
            .fold(self.costs[0].clone(), |m, c| if *c < m { c.clone() } else { m })
    }

    /// Copy with machine `index` reporting `value` instead.
    pub fn with_declaration(&self, index: usize, value: T) -> Result<Self> {
        if index >= self.len() {
            return Err(Error::MachineIndex {
                index,
                n: self.len(),
            });
        }
        if !value.is_positive_finite() {
            return Err(Error::InvalidDeclaration(format!("{value:?}")));
        }
        let mut costs = self.costs.clone();
        costs[index] = value;
        Ok(Self { costs })
    }

    /// Machine indices in ascending cost order; ties keep their input order.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.costs[a]
                .partial_cmp(&self.costs[b])
                .expect("validated costs are comparable")
        });
        order
    }

    fn sorted(&self) -> (Vec<usize>, Vec<T>) {
        let order = self.ascending_order();
        let sorted = order.iter().map(|&i| self.costs[i].clone()).collect();
        (order, sorted)
    }
}

/// Allocation probabilities aligned with the machine order of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProbabilities<T> {
    probs: Vec<T>,
}

impl<T: Scalar> AllocationProbabilities<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.probs.get(i)
    }

    pub fn sum(&self) -> T {
        self.probs.iter().fold(T::zero(), |s, p| s + p.clone())
    }

    /// Expected social cost `Σ p_i t_i` of this allocation on `t`.
    pub fn expected_cost(&self, t: &CostVector<T>) -> T {
        self.probs
            .iter()
            .zip(t.as_slice())
            .fold(T::zero(), |s, (p, c)| s + p.clone() * c.clone())
    }

    fn unsorted(order: &[usize], sorted: Vec<T>) -> Self {
        let mut probs = vec![T::zero(); sorted.len()];
        for (&i, p) in order.iter().zip(sorted) {
            probs[i] = p;
        }
        Self { probs }
    }
}

/// Expected cost of the mechanism against the optimum on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismOutcome<T> {
    pub social_cost: T,
    pub optimal_cost: T,
    pub ratio: T,
}

/// One machine's expected cost under truthful reporting and under a misreport.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport<T> {
    pub machine_index: usize,
    pub true_cost: T,
    pub declared_cost: T,
    pub truthful_expected_cost: T,
    pub deviated_expected_cost: T,
    pub profitable: bool,
}

/// Node count used for an `n`-machine instance.
pub fn rule_points(n: usize) -> usize {
    n.div_ceil(2) + 1
}

/// Quadrature rule shared by every instance of size `n`.
pub fn rule_for(n: usize) -> std::sync::Arc<GaussLegendre> {
    quadrature::cached(rule_points(n))
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_MACHINES {
        return Err(Error::TooManyMachines {
            n,
            max: MAX_MACHINES,
        });
    }
    Ok(())
}

/// Allocation probabilities of the mechanism.
pub fn allocate<T: Real>(t: &CostVector<T>) -> Result<AllocationProbabilities<T>> {
    check_size(t.len())?;
    let (order, sorted) = t.sorted();
    let rule = rule_for(sorted.len());
    let mut probs = sorted_probabilities(&sorted, &rule);
    equalize_ties(&sorted, &mut probs);
    finalize(&mut probs)?;
    Ok(AllocationProbabilities::unsorted(&order, probs))
}

/// Raw probabilities for ascending `sorted` costs.
fn sorted_probabilities<T: Real>(sorted: &[T], rule: &GaussLegendre) -> Vec<T> {
    let n = sorted.len();
    if n == 1 {
        return vec![T::one()];
    }
    let t1 = sorted[0];
    // r[j] belongs to sorted machine j + 1.
    let r: Vec<T> = sorted[1..].iter().map(|&c| t1 / c).collect();
    let m = r.len();
    let mut acc = vec![T::zero(); n];
    let mut prefix = vec![T::one(); m + 1];
    let mut suffix = vec![T::one(); m + 1];
    let mut factors = vec![T::zero(); m];

    for (u, w) in rule.unit_interval() {
        let u = T::lit(u);
        let w = T::lit(w);
        for (f, &ri) in factors.iter_mut().zip(&r) {
            *f = T::one() - u * ri;
        }
        for j in 0..m {
            prefix[j + 1] = prefix[j] * factors[j];
        }
        for j in (0..m).rev() {
            suffix[j] = suffix[j + 1] * factors[j];
        }
        acc[0] = acc[0] + w * prefix[m];
        let tail = w * (T::one() - u);
        for j in 0..m {
            acc[j + 1] = acc[j + 1] + tail * prefix[j] * suffix[j + 1];
        }
    }
    for (a, &ri) in acc[1..].iter_mut().zip(&r) {
        *a = *a * ri;
    }
    acc
}

/// Machines with identical costs share the mean of their computed probabilities.
fn equalize_ties<T: Real>(sorted: &[T], probs: &mut [T]) {
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        if end - start > 1 {
            let total = probs[start..end].iter().fold(T::zero(), |s, &p| s + p);
            let mean = total / T::lit((end - start) as f64);
            probs[start..end].iter_mut().for_each(|p| *p = mean);
        }
        start = end;
    }
}

fn finalize<T: Real>(probs: &mut [T]) -> Result<()> {
    let slack = T::range_slack();
    for p in probs.iter_mut() {
        if !p.is_finite() || *p < -slack || *p > T::one() + slack {
            return Err(Error::Numeric(format!("allocation probability {p:?} out of range")));
        }
        *p = p.max(T::zero()).min(T::one());
    }
    let sum = probs.iter().fold(T::zero(), |s, &p| s + p);
    let dev = (sum - T::one()).abs();
    if dev > T::sum_tolerance() {
        return Err(Error::Inconsistent {
            sum: format!("{sum:?}"),
        });
    }
    if dev > T::renormalize_threshold() {
        probs.iter_mut().for_each(|p| *p = *p / sum);
    }
    Ok(())
}

/// `SC_M / t_1` for ascending `sorted` costs in `O(n · m)`.
///
/// Uses `Σ_k ∏_{i!=k} (1 - u r_i) = P(u) Σ_k 1 / (1 - u r_k)`; every node
/// satisfies `u < 1 <= 1 / r_k`, so no factor vanishes.
pub fn ratio_of_sorted<T: Real>(sorted: &[T], rule: &GaussLegendre) -> T {
    let n = sorted.len();
    if n == 1 {
        return T::one();
    }
    let t1 = sorted[0];
    let mut total = T::zero();
    for (u, w) in rule.unit_interval() {
        let u = T::lit(u);
        let mut product = T::one();
        let mut reciprocal_sum = T::zero();
        for &c in &sorted[1..] {
            let f = T::one() - u * (t1 / c);
            product = product * f;
            reciprocal_sum = reciprocal_sum + f.recip();
        }
        total = total + T::lit(w) * product * (T::one() + (T::one() - u) * reciprocal_sum);
    }
    total
}

fn outcome_from_ratio<T: Real>(ratio: T, t1: T) -> MechanismOutcome<T> {
    let ratio = ratio.max(T::one());
    MechanismOutcome {
        social_cost: ratio * t1,
        optimal_cost: t1,
        ratio,
    }
}

/// Expected social cost, optimum and their ratio, without materializing `p`.
pub fn social_cost<T: Real>(t: &CostVector<T>) -> Result<MechanismOutcome<T>> {
    check_size(t.len())?;
    let (_, sorted) = t.sorted();
    let rule = rule_for(sorted.len());
    Ok(outcome_from_ratio(ratio_of_sorted(&sorted, &rule), sorted[0]))
}

/// Outcome for costs already sorted ascending, using a caller-held rule.
pub fn outcome_of_sorted<T: Real>(sorted: &[T], rule: &GaussLegendre) -> MechanismOutcome<T> {
    outcome_from_ratio(ratio_of_sorted(sorted, rule), sorted[0])
}

/// Expected cost of machine `i` when it declares `declared` instead of its true cost.
pub fn deviation_cost<T: Real>(t: &CostVector<T>, i: usize, declared: T) -> Result<DeviationReport<T>> {
    let deviated = t.with_declaration(i, declared)?;
    let true_cost = t.as_slice()[i];
    let truthful_p = allocate(t)?.as_slice()[i];
    let deviated_p = allocate(&deviated)?.as_slice()[i];
    let truthful_expected_cost = truthful_p * true_cost;
    let deviated_expected_cost = deviated_p * true_cost.max(declared);
    Ok(DeviationReport {
        machine_index: i,
        true_cost,
        declared_cost: declared,
        truthful_expected_cost,
        deviated_expected_cost,
        profitable: deviated_expected_cost < truthful_expected_cost - T::deviation_tolerance(),
    })
}

/// The declaration on `grid` that minimizes machine `i`'s expected cost.
pub fn best_deviation<T: Real>(t: &CostVector<T>, i: usize, grid: &[T]) -> Result<DeviationReport<T>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best: Option<DeviationReport<T>> = None;
    for &d in grid {
        let report = deviation_cost(t, i, d)?;
        if best
            .as_ref()
            .is_none_or(|b| report.deviated_expected_cost < b.deviated_expected_cost)
        {
            best = Some(report);
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi.is_finite() && lo < hi) || points < 2 {
        return Err(Error::InvalidParameter(format!(
            "log grid needs 0 < lo < hi and at least 2 points, got [{lo}, {hi}] x {points}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => lo,
            k if k == points - 1 => hi,
            k => (a + (b - a) * k as f64 / last).exp(),
        })
        .collect())
}
