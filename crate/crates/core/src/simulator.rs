//! Monte Carlo simulation of the period-finding measurement with
//! reproducible seeding and parallel trials.
//!
//! Trials are partitioned into fixed-size batches and each batch draws from
//! its own counter-mode RNG stream `(seed, batch index)`, so every draw is
//! fully determined by `(seed, trial index)` and the result is identical for
//! any worker count.

use crate::error::{capacity, domain, internal, Result};
use crate::number_theory::{cf_postprocess, Verdict};
use crate::probability::{measure_prob, CircuitParams, ToleranceM};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Inverse-CDF sampler memory guard: 8 bytes per state, 512 MiB at n = 26.
pub const MAX_SAMPLER_QUBITS: u32 = 26;

/// Trials per RNG stream. Fixed so that results do not depend on how many
/// threads execute the batches.
const BATCH_SIZE: u64 = 1024;

/// One simulation run: instance, post-processing tolerance, trial count,
/// seed, and worker threads.
#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub params: CircuitParams,
    pub tolerance: ToleranceM,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

/// One simulated measurement and its post-processing outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    /// The measured state.
    pub ell_hat: u64,
    /// Continued-fraction verdict on `ell_hat`.
    pub verdict: Verdict,
    /// Whether `ell_hat` lies within the configured tolerance of a positive
    /// multiple of `2^n / r` (the event the success probability measures).
    pub window_hit: bool,
}

/// Aggregated simulation outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationResult {
    pub trials: u64,
    /// Trials whose measurement fell within the configured tolerance window.
    pub successes: u64,
    /// Trials on which the continued-fraction post-processor recovered a
    /// divisor. Coincides with `successes` when the tolerance is `2^q`.
    pub cf_successes: u64,
    /// `successes / trials`.
    pub estimate: f64,
    /// Binomial standard error `sqrt(estimate (1 - estimate) / trials)`.
    pub stderr: f64,
}

/// Inverse-CDF sampler over the measurement distribution of an instance.
///
/// Construction is single-threaded; the built table is immutable and can be
/// shared across threads.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    /// Tabulate the cumulative distribution of [`measure_prob`]. The final
    /// entry must land within 1e-9 of 1 and is then normalized to exactly 1.
    pub fn build(params: &CircuitParams) -> Result<Self> {
        if params.n > MAX_SAMPLER_QUBITS {
            return Err(capacity(format!(
                "sampler table is capped at n <= {MAX_SAMPLER_QUBITS} (512 MiB), got n = {}",
                params.n
            )));
        }
        let len = 1usize << params.n;
        let mut cdf = Vec::with_capacity(len);
        let mut sum = 0.0;
        let mut comp = 0.0;
        for ell in 0..len as u64 {
            let p = measure_prob(ell, params)?;
            let y = p - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            cdf.push(sum);
        }
        let total = *cdf.last().expect("nonempty table");
        if (total - 1.0).abs() > 1e-9 {
            return Err(internal(format!("cumulative probability ended at {total}, not 1")));
        }
        if total != 1.0 {
            for c in &mut cdf {
                *c /= total;
            }
        }
        *cdf.last_mut().expect("nonempty table") = 1.0;
        Ok(Sampler { cdf })
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Map a uniform draw `u in [0, 1)` to a state by binary search.
    pub fn sample(&self, u: f64) -> u64 {
        self.cdf.partition_point(|&c| c <= u) as u64
    }
}

/// Whether some `k in [1, r-1]` has `|ell r - k 2^n| <= M r`, i.e. the
/// measurement lies within `M` of a positive multiple of `2^n / r`.
/// Evaluated in exact integer arithmetic.
pub fn window_hit(ell: u64, params: &CircuitParams, tolerance: ToleranceM) -> bool {
    let modulus = params.modulus();
    let t = ell as u128 * params.r as u128;
    let near = (t + modulus / 2) / modulus;
    let cap = tolerance.value as u128 * params.r as u128;
    for k in near.saturating_sub(1)..=near + 1 {
        if k >= 1 && k < params.r as u128 && t.abs_diff(k * modulus) <= cap {
            return true;
        }
    }
    false
}

/// Run the configured number of trials and aggregate the outcome.
///
/// The estimate counts tolerance-window hits; the continued-fraction verdict
/// is tallied alongside, and the partition into batches makes the result
/// independent of `workers`.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationResult> {
    if config.trials < 1 {
        return Err(domain("simulation requires at least one trial"));
    }
    let sampler = Sampler::build(&config.params)?;
    let batches = config.trials.div_ceil(BATCH_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| internal(format!("failed to build worker pool: {e}")))?;
    let (window, cf) = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|batch| {
                let mut window = 0u64;
                let mut cf = 0u64;
                for record in batch_records(config, &sampler, batch) {
                    window += record.window_hit as u64;
                    cf += record.verdict.is_success() as u64;
                }
                (window, cf)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    });
    let estimate = window as f64 / config.trials as f64;
    Ok(SimulationResult {
        trials: config.trials,
        successes: window,
        cf_successes: cf,
        estimate,
        stderr: (estimate * (1.0 - estimate) / config.trials as f64).sqrt(),
    })
}

/// Run the trials sequentially and return every record; same draws as
/// [`run_simulation`] at the same seed.
pub fn simulate_trials(config: &SimulationConfig) -> Result<Vec<TrialRecord>> {
    if config.trials < 1 {
        return Err(domain("simulation requires at least one trial"));
    }
    let sampler = Sampler::build(&config.params)?;
    let batches = config.trials.div_ceil(BATCH_SIZE);
    let mut records = Vec::with_capacity(config.trials as usize);
    for batch in 0..batches {
        records.extend(batch_records(config, &sampler, batch));
    }
    Ok(records)
}

fn batch_records<'a>(
    config: &'a SimulationConfig,
    sampler: &'a Sampler,
    batch: u64,
) -> impl Iterator<Item = TrialRecord> + 'a {
    let lo = batch * BATCH_SIZE;
    let hi = (lo + BATCH_SIZE).min(config.trials);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(batch);
    (lo..hi).map(move |_| {
        let ell_hat = sampler.sample(rng.random::<f64>());
        TrialRecord {
            ell_hat,
            verdict: cf_postprocess(ell_hat, config.params.n, config.params.m, config.params.r),
            window_hit: window_hit(ell_hat, &config.params, config.tolerance),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::success_prob_exact;

    fn config(m: u32, q: u32, r: u64, m_val: u64, trials: u64, seed: u64) -> SimulationConfig {
        let params = CircuitParams::new(m, q, r).unwrap();
        let tolerance = ToleranceM::new(&params, m_val).unwrap();
        SimulationConfig { params, tolerance, trials, seed, workers: 2 }
    }

    #[test]
    fn sampler_cdf_ends_at_one() {
        let params = CircuitParams::new(4, 2, 3).unwrap();
        let sampler = Sampler::build(&params).unwrap();
        assert_eq!(sampler.len(), 1 << 11);
        assert_eq!(*sampler.cdf.last().unwrap(), 1.0);
        // extreme draws map to valid states
        assert!(sampler.sample(0.0) < 1 << 11);
        assert!(sampler.sample(0.999_999_999) < 1 << 11);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = SimulationConfig { trials: 0, ..config(5, 3, 11, 8, 1, 0) };
        assert!(matches!(run_simulation(&cfg), Err(crate::Error::Domain(_))));
        assert!(matches!(simulate_trials(&cfg), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn sampler_rejects_large_registers() {
        let params = CircuitParams::new(13, 0, 8000).unwrap();
        assert_eq!(params.n, 27);
        assert!(matches!(Sampler::build(&params), Err(crate::Error::Capacity(_))));
    }

    /// Top-20 bucket frequencies over 1e6 draws match the exact
    /// probabilities within 4 sigma.
    #[test]
    fn sampler_histogram_matches_distribution() {
        let params = CircuitParams::new(4, 2, 3).unwrap();
        let sampler = Sampler::build(&params).unwrap();
        let draws = 1_000_000u64;
        let mut counts = vec![0u64; sampler.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..draws {
            counts[sampler.sample(rng.random::<f64>()) as usize] += 1;
        }
        let mut probs: Vec<(u64, f64)> = (0..sampler.len() as u64)
            .map(|ell| (ell, measure_prob(ell, &params).unwrap()))
            .collect();
        probs.sort_by(|a, b| b.1.total_cmp(&a.1));
        for &(ell, p) in probs.iter().take(20) {
            let mean = draws as f64 * p;
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            let got = counts[ell as usize] as f64;
            assert!(
                (got - mean).abs() <= 4.0 * sigma,
                "ell = {ell}: {got} vs {mean} +- {sigma}"
            );
        }
    }

    #[test]
    fn same_seed_same_draws() {
        let cfg = config(5, 3, 11, 8, 3000, 99);
        let a = simulate_trials(&cfg).unwrap();
        let b = simulate_trials(&cfg).unwrap();
        assert_eq!(a, b);
        let differently_seeded = simulate_trials(&SimulationConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a, differently_seeded);
    }

    #[test]
    fn worker_count_independence() {
        let base = config(5, 3, 11, 8, 5000, 7);
        let reference = run_simulation(&base).unwrap();
        for workers in [1usize, 4, 8] {
            let got = run_simulation(&SimulationConfig { workers, ..base }).unwrap();
            assert_eq!(got, reference, "workers = {workers}");
        }
    }

    #[test]
    fn aggregate_matches_records() {
        let cfg = config(5, 3, 11, 8, 2500, 5);
        let result = run_simulation(&cfg).unwrap();
        let records = simulate_trials(&cfg).unwrap();
        assert_eq!(result.trials, records.len() as u64);
        assert_eq!(result.successes, records.iter().filter(|t| t.window_hit).count() as u64);
        assert_eq!(
            result.cf_successes,
            records.iter().filter(|t| t.verdict.is_success()).count() as u64
        );
    }

    /// At tolerance 2^q the window event and the continued-fraction verdict
    /// are the same event, trial by trial.
    #[test]
    fn cf_verdict_equals_window_at_default_tolerance() {
        for &(m, q, r) in &[(5u32, 3u32, 11u64), (5, 3, 12), (6, 2, 33)] {
            let cfg = config(m, q, r, 1 << q, 4000, 13);
            for t in simulate_trials(&cfg).unwrap() {
                assert_eq!(t.verdict.is_success(), t.window_hit, "ell = {}", t.ell_hat);
            }
        }
    }

    #[test]
    fn power_of_two_order_estimate() {
        let cfg = config(8, 5, 4, 32, 10_000, 3);
        let result = run_simulation(&cfg).unwrap();
        assert!((result.estimate - 0.75).abs() <= 0.02, "estimate {}", result.estimate);
        assert_eq!(result.successes, result.cf_successes);
    }

    #[test]
    fn estimate_tracks_exact_probability() {
        let cfg = config(8, 5, 63, 32, 20_000, 11);
        let result = run_simulation(&cfg).unwrap();
        let exact = success_prob_exact(&cfg.params, cfg.tolerance);
        assert!(
            (result.estimate - exact).abs() <= 4.0 * result.stderr,
            "estimate {} vs exact {exact} (stderr {})",
            result.estimate,
            result.stderr
        );
    }

    /// Success counts over repeated seeds behave like the binomial the
    /// stderr formula assumes: chi-square over 40 independent runs stays
    /// below the 0.999 quantile (73.402).
    #[test]
    fn binomial_stderr_sanity() {
        let base = config(5, 3, 11, 8, 500, 0);
        let p = success_prob_exact(&base.params, base.tolerance);
        let trials = base.trials as f64;
        let mut chi2 = 0.0;
        for seed in 0..40u64 {
            let got = run_simulation(&SimulationConfig { seed: 1000 + seed, ..base }).unwrap();
            let dev = got.successes as f64 - trials * p;
            chi2 += dev * dev / (trials * p * (1.0 - p));
        }
        assert!(chi2 < 73.402, "chi-square statistic {chi2}");
    }
}
