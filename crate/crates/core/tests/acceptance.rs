//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.
//!
//! Run with `cargo test --release --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use mechsched::bounds::{
    self, binomial, central_binomial_bound, event_a_probability, lemma3_lower_bound, lemma4_check,
    robbins_certificate,
};
use mechsched::mechanism::allocate_oracle;
use mechsched::mechanism::{allocate, best_deviation, log_grid, social_cost};
use mechsched::simulation::{estimate_average_ratio, sample_outcomes, worst_case_ratio, SimulationConfig};
use mechsched::{BigRational, CostVector, DistributionSpec};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Largest `ratio - (n+1)/2` over every instance evaluated by the suite.
struct CapTracker(f64);

impl CapTracker {
    fn record(&mut self, n: usize, ratio: f64) {
        self.0 = self.0.max(ratio - worst_case_ratio(n));
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|_| rng.gen_range(a..=b).exp()).collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn closed_form() -> Outcome {
    let p = allocate(&CostVector::new(vec![1.0f64, 2.0]).unwrap()).unwrap();
    let err2 = (p.as_slice()[0] - 0.75).abs().max((p.as_slice()[1] - 0.25).abs());
    let p = allocate(&CostVector::new(vec![1.0f64; 3]).unwrap()).unwrap();
    let err3 = p.as_slice().iter().map(|x| (x - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    ensure(err2 <= 1e-12 && err3 <= 1e-12, || format!("errors {err2:e}, {err3:e}"))?;
    Ok(format!("max error {:.1e}", err2.max(err3)))
}

fn oracle_equivalence(cap: &mut CapTracker) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for n in 2..=16 {
        for _ in 0..200 {
            let t = CostVector::new(log_uniform(&mut rng, n, 1.0, 1e3)).unwrap();
            let fast = allocate(&t).unwrap();
            let slow = allocate_oracle(&t).unwrap();
            for (a, b) in fast.as_slice().iter().zip(slow.as_slice()) {
                worst = worst.max((a - b).abs());
            }
            cap.record(n, social_cost(&t).unwrap().ratio);
        }
    }
    ensure(worst <= 1e-10, || format!("componentwise gap {worst:e}"))?;
    let mut sum_gap = 0.0f64;
    for n in [2, 17, 32, 64, 100, 128, 200, 256] {
        for _ in 0..20 {
            let t = CostVector::new(log_uniform(&mut rng, n, 1.0, 1e3)).unwrap();
            sum_gap = sum_gap.max((allocate(&t).unwrap().sum() - 1.0).abs());
            cap.record(n, social_cost(&t).unwrap().ratio);
        }
    }
    ensure(sum_gap <= 1e-9, || format!("sum gap {sum_gap:e}"))?;
    Ok(format!("max component gap {worst:.1e}, max |sum-1| {sum_gap:.1e}"))
}

fn truthfulness(cap: &mut CapTracker) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checks = 0;
    let mut best_gain = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let t = CostVector::new(log_uniform(&mut rng, n, 1.0, 1e3)).unwrap();
        let t_max = t.as_slice().iter().copied().fold(0.0, f64::max);
        let grid = log_grid(t.min() / 100.0, 100.0 * t_max, 100).unwrap();
        cap.record(n, social_cost(&t).unwrap().ratio);
        for i in 0..n {
            let r = best_deviation(&t, i, &grid).unwrap();
            checks += 1;
            best_gain = best_gain.max(r.truthful_expected_cost - r.deviated_expected_cost);
            ensure(!r.profitable, || format!("profitable misreport: {r:?}"))?;
        }
    }
    Ok(format!("{checks} machine grids, largest gain {best_gain:.1e}"))
}

fn tightness(cap: &mut CapTracker) -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=10 {
        let mut t = vec![1.0; n];
        t[0] = 1e-6;
        let ratio = social_cost(&CostVector::new(t).unwrap()).unwrap().ratio;
        cap.record(n, ratio);
        worst = worst.max((ratio - worst_case_ratio(n)).abs());
    }
    ensure(worst <= 1e-3, || format!("gap to (n+1)/2 is {worst:e}"))?;
    Ok(format!("max gap to (n+1)/2 {worst:.2e}"))
}

fn robbins() -> Outcome {
    for n in (2..=64).step_by(2) {
        ensure(robbins_certificate(n).unwrap(), || format!("certificate fails at n = {n}"))?;
    }
    let mut slack = f64::INFINITY;
    for n in (2..=bounds::CENTRAL_BINOMIAL_MAX_N).step_by(2) {
        let c = central_binomial_bound(n).unwrap();
        ensure(c.ln_exact <= c.ln_robbins_bound, || format!("log-space check fails at n = {n}"))?;
        slack = slack.min(c.ln_robbins_bound - c.ln_exact);
    }
    Ok(format!("exact for n <= 64, log-space for n <= 1024 (min log slack {slack:.3e})"))
}

/// `P[Bin(n, 11/12) >= ceil(n/2)]` in exact rational arithmetic.
fn exact_tail(n: u32) -> f64 {
    let k_min = n.div_ceil(2);
    let num: BigInt = (k_min..=n)
        .map(|k| BigInt::from(binomial(n, k)) * BigInt::from(11).pow(k))
        .sum();
    BigRational::new(num, BigInt::from(12).pow(n)).to_f64().unwrap()
}

fn tail_bound() -> Outcome {
    let q = 11.0 / 12.0;
    let mut err = 0.0f64;
    for n in (2..=256).step_by(2) {
        let s = event_a_probability(n, q).unwrap();
        let exact = exact_tail(n);
        err = err.max((s.prob_exact - exact).abs());
        ensure(exact >= lemma3_lower_bound(n), || format!("tail below bound at n = {n}"))?;
        ensure(s.prob_exact >= s.lemma3_lower_bound, || format!("computed tail below bound at n = {n}"))?;
    }
    ensure(err <= 1e-12, || format!("tail error {err:e}"))?;
    Ok(format!("max tail error vs exact rational {err:.1e}"))
}

fn cap_frequency(cap: &mut CapTracker) -> Outcome {
    let spec = DistributionSpec::pareto(1.0, 1.0).unwrap();
    let mut parts = Vec::new();
    for n in [4usize, 16, 64] {
        let samples = sample_outcomes(&SimulationConfig::new(spec, n, 10_000, 7 + n as u64), 12.0).unwrap();
        for (o, _) in &samples {
            cap.record(n, o.ratio);
        }
        let c = lemma4_check(&samples, 12.0, n as u32).unwrap();
        ensure(c.implication_failures == 0, || format!("n = {n}: {} implication failures", c.implication_failures))?;
        ensure(c.violation_freq <= c.allowance(3.0), || {
            format!("n = {n}: freq {} > allowance {}", c.violation_freq, c.allowance(3.0))
        })?;
        parts.push(format!("n={n} freq {:.4} <= {:.4}", c.violation_freq, c.allowance(3.0)));
    }
    Ok(parts.join(", "))
}

fn theorem_bounds(cap: &mut CapTracker) -> Outcome {
    let families = [
        ("pareto", DistributionSpec::pareto(1.0, 1.0).unwrap(), 25.33),
        ("exponential", DistributionSpec::exponential(1.0, 1.0).unwrap(), 6.2998),
        ("loglogistic", DistributionSpec::log_logistic(1.0, 1.0).unwrap(), 23.33),
    ];
    let mut parts = Vec::new();
    for (name, spec, headline) in families {
        let mut means = Vec::new();
        for (n, trials) in [(4usize, 100_000u64), (16, 100_000), (64, 100_000), (256, 10_000)] {
            let workers = std::thread::available_parallelism().map_or(1, |w| w.get());
            let est = estimate_average_ratio(&SimulationConfig::new(spec, n, trials, 42).with_workers(workers)).unwrap();
            cap.record(n, est.max_ratio_seen);
            ensure((est.theorem1_bound - headline).abs() < 5e-5, || {
                format!("{name}: bound {} differs from {headline}", est.theorem1_bound)
            })?;
            ensure(est.bound_satisfied(), || {
                format!("{name} n={n}: mean {} + 3 SE {} >= {}", est.mean_ratio, est.std_error, est.theorem1_bound)
            })?;
            ensure(est.lemma1_violations == 0, || format!("{name} n={n}: lemma 1 violations"))?;
            if n == 64 {
                ensure(worst_case_ratio(64) > est.theorem1_bound && est.theorem1_bound > est.mean_ratio, || {
                    format!("{name}: no separation at n = 64")
                })?;
            }
            means.push(est.mean_ratio);
        }
        let (lo, hi) = means.iter().fold((f64::MAX, f64::MIN), |(a, b), &m| (a.min(m), b.max(m)));
        ensure(hi / lo <= 2.0, || format!("{name}: flatness {}", hi / lo))?;
        parts.push(format!("{name} means {:.3}..{:.3} (flat {:.2})", lo, hi, hi / lo));
    }
    Ok(parts.join("; "))
}

fn determinism() -> Outcome {
    let args = ["simulate", "--family", "pareto", "--shape", "1", "--tmin", "1", "--n", "16", "--trials", "20000", "--seed", "42"];
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_mechsched")).args(args).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        Ok::<_, String>(out.stdout)
    };
    let (a, b) = (run()?, run()?);
    ensure(!a.is_empty() && a == b, || "outputs differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() -> ExitCode {
    let mut cap = CapTracker(f64::NEG_INFINITY);
    let mut failures = 0;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id}. {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {id}. {name}: {detail} ({secs:.1}s)");
            }
        }
    };
    report(1, "closed-form allocation", &mut closed_form);
    report(2, "oracle equivalence", &mut || oracle_equivalence(&mut cap));
    report(3, "truthfulness", &mut || truthfulness(&mut cap));
    report(5, "central binomial bound", &mut robbins);
    report(6, "binomial tail lower bound", &mut tail_bound);
    report(7, "event A implies cap; cap violation frequency", &mut || cap_frequency(&mut cap));
    report(8, "average-ratio bounds and flatness", &mut || theorem_bounds(&mut cap));
    report(4, "worst-case tightness", &mut || {
        let detail = tightness(&mut cap)?;
        ensure(cap.0 <= 1e-9, || format!("ratio exceeded (n+1)/2 by {:e}", cap.0))?;
        Ok(format!("{detail}; no evaluated instance above (n+1)/2"))
    });
    report(9, "determinism", &mut determinism);
    if failures == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
