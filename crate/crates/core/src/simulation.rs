//! Seeded Monte Carlo estimation of the average-case ratio `E[SC_M / SC_OPT]`.
//!
//! Every instance draws `n` i.i.d. costs and evaluates the mechanism's exact
//! expected social cost, so the only randomness is in the instance itself.
//!
//! Trials are grouped in blocks of [`BLOCK_TRIALS`]. Block `b` draws from
//! ChaCha8 keyed by `seed_from_u64(seed)` on stream `b`, and per-block
//! accumulators are merged in block order. Results therefore depend on
//! `(spec, n, trials, seed)` only: changing `workers` changes which thread runs
//! a block, never the numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{self, CAP_TOLERANCE};
use crate::distributions::{solve_threshold_at, Convention, DistributionSpec, THRESHOLD_QUANTILE};
use crate::error::{Error, Result};
use crate::mechanism::{self, CostVector, MechanismOutcome, MAX_MACHINES};
use crate::quadrature::GaussLegendre;
use crate::stats::Moments;

/// Default cap on `trials · n` cost draws per run.
pub const DEFAULT_DRAW_BUDGET: u64 = 1_000_000_000;

/// Trials per random stream.
pub const BLOCK_TRIALS: u64 = 1024;

/// Default trial count: `10^5` up to 64 machines, `10^4` beyond.
pub fn default_trials(n: usize) -> u64 {
    if n <= 64 {
        100_000
    } else {
        10_000
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub spec: DistributionSpec,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub draw_budget: u64,
    /// Quantile defining the event-A threshold `h`.
    pub threshold_quantile: f64,
}

impl SimulationConfig {
    pub fn new(spec: DistributionSpec, n: usize, trials: u64, seed: u64) -> Self {
        Self {
            spec,
            n,
            trials,
            seed,
            workers: 1,
            draw_budget: DEFAULT_DRAW_BUDGET,
            threshold_quantile: THRESHOLD_QUANTILE,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_draw_budget(mut self, budget: u64) -> Self {
        self.draw_budget = budget;
        self
    }

    pub fn with_threshold_quantile(mut self, quantile: f64) -> Self {
        self.threshold_quantile = quantile;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > MAX_MACHINES {
            return Err(Error::InvalidParameter(format!(
                "n must lie in [2, {MAX_MACHINES}], got {}",
                self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        let draws = self.trials.checked_mul(self.n as u64);
        if draws.is_none_or(|d| d > self.draw_budget) {
            return Err(Error::InvalidParameter(format!(
                "{} trials x {} machines exceeds the draw budget of {}",
                self.trials, self.n, self.draw_budget
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub mean_ratio: f64,
    pub std_error: f64,
    pub trials: u64,
    pub event_a_freq: f64,
    /// Event A held yet `SC_M > (2h+1) t_1`; zero for a correct mechanism.
    pub lemma1_violations: u64,
    /// Instances with `SC_M > (2h+1) t_1`, with or without event A.
    pub cap_violations: u64,
    pub max_ratio_seen: f64,
    pub min_ratio_seen: f64,
    /// Threshold used to tag event A.
    pub h: f64,
    pub theorem1_bound: f64,
    pub config: SimulationConfig,
}

impl RatioEstimate {
    /// `(n + 1) / 2`.
    pub fn worst_case(&self) -> f64 {
        worst_case_ratio(self.config.n)
    }

    /// `mean + 3 SE < 2h + 1.33`.
    pub fn bound_satisfied(&self) -> bool {
        self.mean_ratio + 3.0 * self.std_error < self.theorem1_bound
    }
}

pub fn worst_case_ratio(n: usize) -> f64 {
    (n as f64 + 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventAEstimate {
    pub freq: f64,
    /// Binomial-tail probability under the sampling law.
    pub exact: f64,
    pub trials: u64,
}

/// Runs `trial` on every instance, one accumulator per block, returned in block order.
fn run_blocks<A, M, F>(cfg: &SimulationConfig, make: M, trial: F) -> Vec<A>
where
    A: Send,
    M: Fn() -> A + Sync,
    F: Fn(&mut A, &[f64]) + Sync,
{
    let blocks = cfg.trials.div_ceil(BLOCK_TRIALS);
    let workers = (cfg.workers as u64).clamp(1, blocks) as usize;
    let run_block = |b: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(b);
        let count = BLOCK_TRIALS.min(cfg.trials - b * BLOCK_TRIALS);
        let mut acc = make();
        let mut costs = vec![0.0; cfg.n];
        for _ in 0..count {
            costs.iter_mut().for_each(|c| *c = cfg.spec.sample(&mut rng));
            costs.sort_by(f64::total_cmp);
            trial(&mut acc, &costs);
        }
        acc
    };
    if workers == 1 {
        return (0..blocks).map(run_block).collect();
    }
    let mut slots: Vec<Option<A>> = (0..blocks).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let run_block = &run_block;
                scope.spawn(move || {
                    (w as u64..blocks)
                        .step_by(workers)
                        .map(|b| (b, run_block(b)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for handle in handles {
            for (b, acc) in handle.join().expect("simulation worker panicked") {
                slots[b as usize] = Some(acc);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every block ran"))
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct BlockStats {
    moments: Moments,
    event_a: u64,
    lemma1_violations: u64,
    cap_violations: u64,
    max_ratio: f64,
    min_ratio: f64,
}

impl BlockStats {
    fn new() -> Self {
        Self {
            moments: Moments::new(),
            event_a: 0,
            lemma1_violations: 0,
            cap_violations: 0,
            max_ratio: f64::NEG_INFINITY,
            min_ratio: f64::INFINITY,
        }
    }

    fn merge(&mut self, other: &BlockStats) {
        self.moments.merge(&other.moments);
        self.event_a += other.event_a;
        self.lemma1_violations += other.lemma1_violations;
        self.cap_violations += other.cap_violations;
        self.max_ratio = self.max_ratio.max(other.max_ratio);
        self.min_ratio = self.min_ratio.min(other.min_ratio);
    }
}

/// Instance evaluation shared by every estimator.
struct InstanceJudge {
    rule: std::sync::Arc<GaussLegendre>,
    k_half: usize,
    threshold: f64,
    h: f64,
}

impl InstanceJudge {
    fn new(cfg: &SimulationConfig, h: f64) -> Self {
        Self {
            rule: mechanism::rule_for(cfg.n),
            k_half: bounds::k_half(cfg.n as u32) as usize,
            threshold: h * cfg.spec.t_min(),
            h,
        }
    }

    fn event_a(&self, sorted: &[f64]) -> bool {
        sorted[self.k_half - 1] <= self.threshold
    }

    fn outcome(&self, sorted: &[f64]) -> MechanismOutcome<f64> {
        mechanism::outcome_of_sorted(sorted, &self.rule)
    }

    fn exceeds_cap(&self, o: &MechanismOutcome<f64>) -> bool {
        o.social_cost > bounds::lemma1_cap(self.h, o.optimal_cost) + CAP_TOLERANCE
    }
}

/// Average-case ratio with event-A tagging at the threshold solved for the distribution's convention.
pub fn estimate_average_ratio(cfg: &SimulationConfig) -> Result<RatioEstimate> {
    cfg.validate()?;
    let threshold = solve_threshold_at(&cfg.spec, cfg.threshold_quantile)?;
    let judge = InstanceJudge::new(cfg, threshold.h);
    let blocks = run_blocks(cfg, BlockStats::new, |acc, sorted| {
        let o = judge.outcome(sorted);
        let a = judge.event_a(sorted);
        let over = judge.exceeds_cap(&o);
        acc.moments.push(o.ratio);
        acc.event_a += a as u64;
        acc.cap_violations += over as u64;
        acc.lemma1_violations += (a && over) as u64;
        acc.max_ratio = acc.max_ratio.max(o.ratio);
        acc.min_ratio = acc.min_ratio.min(o.ratio);
    });
    let mut total = BlockStats::new();
    blocks.iter().for_each(|b| total.merge(b));
    Ok(RatioEstimate {
        mean_ratio: total.moments.mean(),
        std_error: total.moments.std_error(),
        trials: cfg.trials,
        event_a_freq: total.event_a as f64 / cfg.trials as f64,
        lemma1_violations: total.lemma1_violations,
        cap_violations: total.cap_violations,
        max_ratio_seen: total.max_ratio,
        min_ratio_seen: total.min_ratio,
        h: threshold.h,
        theorem1_bound: threshold.theorem1_bound,
        config: *cfg,
    })
}

/// Frequency of event A at threshold `h` next to its binomial-tail probability.
pub fn estimate_event_a(cfg: &SimulationConfig, h: f64) -> Result<EventAEstimate> {
    cfg.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let judge = InstanceJudge::new(cfg, h);
    let counts = run_blocks(cfg, || 0u64, |acc, sorted| *acc += judge.event_a(sorted) as u64);
    let hits: u64 = counts.iter().sum();
    let q = cfg.spec.cdf_with(Convention::Renormalized, h * cfg.spec.t_min());
    Ok(EventAEstimate {
        freq: hits as f64 / cfg.trials as f64,
        exact: bounds::event_a_probability(cfg.n as u32, q)?.prob_exact,
        trials: cfg.trials,
    })
}

/// Every simulated outcome with its event-A flag at threshold `h`, in trial order.
pub fn sample_outcomes(cfg: &SimulationConfig, h: f64) -> Result<Vec<(MechanismOutcome<f64>, bool)>> {
    cfg.validate()?;
    let judge = InstanceJudge::new(cfg, h);
    let blocks = run_blocks(cfg, Vec::new, |acc, sorted| {
        acc.push((judge.outcome(sorted), judge.event_a(sorted)));
    });
    Ok(blocks.into_iter().flatten().collect())
}

/// Ratio on `(ε, 1, …, 1)` for each `ε`; tends to `(n+1)/2` as `ε → 0`.
pub fn worst_case_sweep(n: usize, epsilons: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(2..=MAX_MACHINES).contains(&n) {
        return Err(Error::InvalidParameter(format!("n must lie in [2, {MAX_MACHINES}], got {n}")));
    }
    epsilons
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {eps}")));
            }
            let mut costs = vec![1.0; n];
            costs[0] = eps;
            Ok((eps, mechanism::social_cost(&CostVector::new(costs)?)?.ratio))
        })
        .collect()
}

/// [`estimate_average_ratio`] for each `n`, ascending. `trials_per_n = None` uses [`default_trials`].
pub fn n_sweep(
    spec: &DistributionSpec,
    ns: &[usize],
    trials_per_n: Option<u64>,
    seed: u64,
    workers: usize,
) -> Result<Vec<RatioEstimate>> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let trials = trials_per_n.unwrap_or_else(|| default_trials(n));
            estimate_average_ratio(&SimulationConfig::new(*spec, n, trials, seed).with_workers(workers))
        })
        .collect()
}
