//! Runnable verification suite: every module invariant as a named check
//! with a grid description, the worst observed violation, and its tolerance.
//!
//! The CLI drives this for `verify`; the acceptance tests run it whole.

use crate::bounds::{
    ekera_bound, h_lower_bound, h_upper_bound, perturbation_envelope, qpe_exact_prob,
    qpe_lower_bound, qpf_lower_bound, qpf_upper_bound,
};
use crate::kernel::{f_term, h_exact, h_perturbed, lemma_p3a_sum};
use crate::number_theory::{
    cf_postprocess, convergents, gcd, residue_distribution, residues_bruteforce, split_odd_dyadic,
};
use crate::probability::{
    measure_prob, phi_term, success_prob_bruteforce, success_prob_exact, CircuitParams, ToleranceM,
};
use crate::simulator::{run_simulation, window_hit, Sampler, SimulationConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;

/// Module a check belongs to; used to filter `verify` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Kernel,
    NumberTheory,
    Probability,
    Bounds,
    Simulator,
}

impl Scope {
    pub const ALL: [Scope; 5] = [
        Scope::Kernel,
        Scope::NumberTheory,
        Scope::Probability,
        Scope::Bounds,
        Scope::Simulator,
    ];
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scope::Kernel => "kernel",
            Scope::NumberTheory => "number-theory",
            Scope::Probability => "probability",
            Scope::Bounds => "bounds",
            Scope::Simulator => "simulator",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "kernel" => Ok(Scope::Kernel),
            "number-theory" | "number_theory" => Ok(Scope::NumberTheory),
            "probability" => Ok(Scope::Probability),
            "bounds" => Ok(Scope::Bounds),
            "simulator" => Ok(Scope::Simulator),
            other => Err(format!(
                "unknown scope '{other}' (expected kernel, number-theory, probability, bounds or simulator)"
            )),
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub scope: Scope,
    pub name: &'static str,
    /// Human description of the swept grid.
    pub grid: String,
    /// Worst violation observed; the check passes when `worst <= tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn report(scope: Scope, name: &'static str, grid: String, worst: f64, tolerance: f64) -> CheckReport {
    CheckReport { scope, name, grid, worst, tolerance, passed: worst <= tolerance }
}

/// Run the checks for `scope` (all scopes when `None`), scaling every
/// tolerance by `tolerance_scale` (1.0 runs the stated tolerances, 0.0
/// demands exactness and is expected to fail).
pub fn run(scope: Option<Scope>, tolerance_scale: f64) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let wanted = |s: Scope| scope.is_none() || scope == Some(s);
    if wanted(Scope::Kernel) {
        out.push(symmetry_check());
        out.push(monotonicity_check());
        out.push(closed_form_check());
        out.push(f_term_increasing_check());
        out.push(h_bounds_check());
        out.push(perturbation_check());
        out.push(p3a_check());
        out.push(digamma_check());
    }
    if wanted(Scope::NumberTheory) {
        out.push(residue_distribution_check());
        out.push(no_half_residue_check());
        out.push(convergent_structure_check());
        out.push(cf_window_check());
    }
    if wanted(Scope::Probability) {
        out.push(oracle_equivalence_check());
        out.push(normalization_check());
        out.push(phi_bound_check());
        out.push(power_of_two_check());
    }
    if wanted(Scope::Bounds) {
        out.push(table_grid_sandwich_check());
        out.push(lower_vs_ekera_check());
        out.push(random_sweep_sandwich_check());
        out.push(leading_term_monotone_check());
        out.push(sum_sin_check());
        out.push(qpe_dominance_check());
        out.push(qpe_value_check());
    }
    if wanted(Scope::Simulator) {
        out.push(sampler_normalization_check());
        out.push(sampler_histogram_check());
        out.push(worker_independence_check());
        out.push(binomial_sanity_check());
    }
    for check in &mut out {
        check.tolerance *= tolerance_scale;
        check.passed = check.worst <= check.tolerance;
    }
    out
}

const GRID_WIDTHS: [u64; 5] = [5, 8, 16, 31, 32];

fn x_grid(points: usize) -> impl Iterator<Item = f64> {
    (0..=points).map(move |i| i as f64 / points as f64)
}

fn symmetry_check() -> CheckReport {
    let mut worst = 0.0f64;
    for &l in &GRID_WIDTHS {
        let l2 = (l * l) as f64;
        for m in [1, l / 2, l] {
            if m < 1 {
                continue;
            }
            for x in x_grid(200) {
                let d = (h_exact(x, m, l).unwrap() - h_exact(1.0 - x, m, l).unwrap()).abs();
                worst = worst.max(d / l2);
            }
        }
        let eps = -0.05;
        let cap = (l as f64 / (2.0 * 1.05)).floor() as u64;
        for m in [1, cap.max(1)] {
            for x in x_grid(200) {
                let d = (h_perturbed(x, m, l, eps).unwrap()
                    - h_perturbed(1.0 - x, m, l, eps).unwrap())
                .abs();
                worst = worst.max(d / l2);
            }
        }
    }
    report(
        Scope::Kernel,
        "symmetry-about-one-half",
        format!("L in {GRID_WIDTHS:?}, 201-point x grid, eps in {{0, -0.05}}"),
        worst,
        1e-10,
    )
}

fn monotonicity_check() -> CheckReport {
    let points = 1000usize;
    let mut worst = 0.0f64;
    for &l in &GRID_WIDTHS {
        let l2 = (l * l) as f64;
        for m in 1..=l {
            let values: Vec<f64> = (0..=points)
                .map(|i| h_exact(i as f64 / (2 * points) as f64, m, l).unwrap())
                .collect();
            let non_increasing = m <= l / 2;
            for pair in values.windows(2) {
                let diff = pair[1] - pair[0];
                let violation = if non_increasing { diff } else { -diff };
                worst = worst.max(violation / l2);
            }
        }
    }
    report(
        Scope::Kernel,
        "peak-mass-monotonicity",
        format!("L in {GRID_WIDTHS:?}, M in [1, L], 1001 points on [0, 1/2]"),
        worst,
        1e-9,
    )
}

fn closed_form_check() -> CheckReport {
    let widths = [5u64, 8, 16, 31, 32, 100, 101];
    let mut worst = 0.0f64;
    for &l in &widths {
        let l2 = (l * l) as f64;
        for x in x_grid(400) {
            let got = h_exact(x, l / 2, l).unwrap();
            let want = if l % 2 == 0 {
                l2
            } else {
                l2 - (PI * x).sin().powi(2) / (PI * (0.5 - x) / l as f64).cos().powi(2)
            };
            worst = worst.max((got - want).abs() / l2);
        }
    }
    report(
        Scope::Kernel,
        "half-window-closed-forms",
        format!("L in {widths:?}, 401-point x grid"),
        worst,
        1e-9,
    )
}

fn f_term_increasing_check() -> CheckReport {
    let widths = [8u64, 16, 31];
    let points = 96usize;
    let mut worst = f64::MIN;
    for &l in &widths {
        for z in 1..=l - 2 {
            let xs: Vec<f64> =
                (0..=points).map(|i| 0.01 + 0.48 * i as f64 / points as f64).collect();
            let vals: Vec<f64> = xs.iter().map(|&x| f_term(x, z, l).unwrap()).collect();
            for i in 1..points {
                let diff = (vals[i + 1] - vals[i - 1]) / (xs[i + 1] - xs[i - 1]);
                worst = worst.max(-diff);
            }
        }
    }
    report(
        Scope::Kernel,
        "summand-increasing-in-x",
        format!("L in {widths:?}, z in [1, L-2], central differences on [0.01, 0.49]"),
        worst,
        1e-8,
    )
}

fn h_bounds_check() -> CheckReport {
    let mut worst = f64::MIN;
    for &l in &[16u64, 32, 64, 128] {
        let l2 = (l * l) as f64;
        for m in [2u64, 3, l / 4, l / 2 - 1] {
            if m < 2 || 2 * m >= l {
                continue;
            }
            for x in x_grid(100) {
                let h = h_exact(x, m, l).unwrap();
                let lo = h_lower_bound(x, m, l).unwrap();
                let hi = h_upper_bound(x, m, l).unwrap();
                worst = worst.max((lo - h) / l2).max((h - hi) / l2);
            }
            let h0 = h_exact(0.0, m, l).unwrap();
            worst = worst.max((h0 - l2).abs() / l2);
        }
    }
    report(
        Scope::Kernel,
        "peak-mass-bounds-sandwich",
        "L in {16, 32, 64, 128}, M < L/2, 101-point x grid".into(),
        worst,
        1e-9,
    )
}

fn perturbation_check() -> CheckReport {
    let epsilons = [
        2f64.powi(-20),
        -(2f64.powi(-20)),
        2f64.powi(-10),
        -(2f64.powi(-10)),
        1.0 / 32.0,
        -1.0 / 32.0,
    ];
    let mut worst = f64::MIN;
    for &l in &[32u64, 64] {
        let l2 = (l * l) as f64;
        for &eps in &epsilons {
            let cap = (l as f64 / (2.0 * (1.0 + eps.abs()))).floor() as u64;
            for m in [2u64, 4, 8] {
                if m > cap {
                    continue;
                }
                let envelope = perturbation_envelope(m, l, eps).unwrap();
                for x in x_grid(100) {
                    let diff =
                        (h_perturbed(x, m, l, eps).unwrap() - h_exact(x, m, l).unwrap()).abs();
                    worst = worst.max((diff - envelope) / l2);
                }
            }
        }
    }
    report(
        Scope::Kernel,
        "perturbation-envelope",
        "L in {32, 64}, M in {2, 4, 8}, eps in {±2^-20, ±2^-10, ±1/32}, 101-point x grid".into(),
        worst,
        0.0,
    )
}

fn p3a_check() -> CheckReport {
    let mut worst = 0.0f64;
    for a in 1..=12u64 {
        for b in 1..=12u64 {
            for c in 1..=12u64 {
                let g = gcd(a, b);
                let rho = g * gcd(a / g, c);
                if rho > b {
                    continue;
                }
                let want = (b * c * c) as f64 / rho as f64;
                for &x in &[0.0, 0.25, 0.5, 0.9] {
                    let got = lemma_p3a_sum(a, b, c, x).unwrap();
                    worst = worst.max((got - want).abs() / want);
                }
            }
        }
    }
    report(
        Scope::Kernel,
        "lemma-p3a-identity",
        "a, b, c in [1, 12] with rho <= b, x in {0, 0.25, 0.5, 0.9}".into(),
        worst,
        1e-9,
    )
}

fn digamma_check() -> CheckReport {
    let n_max = 1_000_000u64;
    let mut worst = 0.0f64;
    for &x in &[0.1, 0.25, 0.37, 0.5] {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for n in 0..n_max {
            let nf = n as f64;
            let term = 1.0 / ((nf + x) * (nf + x)) + 1.0 / ((nf + 1.0 - x) * (nf + 1.0 - x));
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let closed = (PI / (PI * x).sin()).powi(2);
        worst = worst.max((sum - closed).abs());
    }
    report(
        Scope::Kernel,
        "mittag-leffler-digamma-partial-sums",
        format!("N = {n_max}, x in {{0.1, 0.25, 0.37, 0.5}}"),
        worst,
        2.0 / (n_max as f64 - 1.0),
    )
}

fn residue_distribution_check() -> CheckReport {
    let mismatches: u64 = (2..=4096u64)
        .into_par_iter()
        .map(|r| {
            let n = 2 * (64 - r.leading_zeros()) + 6;
            let dist = residue_distribution(r, n).unwrap();
            let mut hist = vec![0u64; dist.denominator as usize];
            for j in residues_bruteforce(r, n).unwrap() {
                hist[j as usize] += 1;
            }
            let mut bad = 0u64;
            for (j, &count) in hist.iter().enumerate() {
                if count != dist.frequency(j as u64) {
                    bad += 1;
                }
            }
            if dist.total() != r - 1 {
                bad += 1;
            }
            bad
        })
        .sum();
    report(
        Scope::NumberTheory,
        "residue-distribution-vs-bruteforce",
        "r in [2, 4096], n = 2 bitlen(r) + 6".into(),
        mismatches as f64,
        0.0,
    )
}

fn no_half_residue_check() -> CheckReport {
    let hits: u64 = (2..=4096u64)
        .into_par_iter()
        .map(|r| {
            let n = 2 * (64 - r.leading_zeros()) + 6;
            let p = split_odd_dyadic(r).unwrap().odd;
            residues_bruteforce(r, n).unwrap().iter().filter(|&&j| 2 * j == p).count() as u64
        })
        .sum();
    report(
        Scope::NumberTheory,
        "no-residue-equals-one-half",
        "r in [2, 4096], n = 2 bitlen(r) + 6".into(),
        hits as f64,
        0.0,
    )
}

fn convergent_structure_check() -> CheckReport {
    let mut bad = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases: Vec<(u128, u128)> = vec![(0, 1 << 22), (1, 2), (279_620, 1 << 22), (355, 452)];
    for _ in 0..2000 {
        let den = rng.random_range(1u64..=u64::MAX) as u128;
        let num = rng.random_range(0..=den as u64) as u128;
        cases.push((num, den));
    }
    for (num, den) in cases {
        let seq = convergents(num, den).unwrap();
        let mut prev = 0u128;
        for c in &seq {
            if c.denominator <= prev || gcd_u128(c.numerator, c.denominator) != 1 {
                bad += 1;
            }
            prev = c.denominator;
        }
        let last = seq.last().unwrap();
        let g = gcd_u128(num, den).max(1);
        if last.numerator != num / g || last.denominator != den / g {
            bad += 1;
        }
    }
    report(
        Scope::NumberTheory,
        "convergents-increasing-and-reduced",
        "2000 seeded fractions plus fixed cases".into(),
        bad as f64,
        0.0,
    )
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn cf_window_check() -> CheckReport {
    let instances: [(u32, u32, u64); 5] = [(5, 3, 5), (5, 3, 6), (5, 3, 12), (4, 2, 7), (8, 5, 15)];
    let mut mismatches = 0u64;
    for &(m, q, r) in &instances {
        let params = CircuitParams::new(m, q, r).unwrap();
        let tolerance = ToleranceM::new(&params, 1 << q).unwrap();
        let n = params.n;
        mismatches += (0..(1u64 << n))
            .into_par_iter()
            .filter(|&ell| {
                cf_postprocess(ell, n, m, r).is_success() != window_hit(ell, &params, tolerance)
            })
            .count() as u64;
    }
    report(
        Scope::NumberTheory,
        "cf-postprocess-matches-window",
        format!("exhaustive ell sweeps over {instances:?}"),
        mismatches as f64,
        0.0,
    )
}

fn oracle_equivalence_check() -> CheckReport {
    let worst = [3u32, 5]
        .par_iter()
        .flat_map(|&q| (2..=255u64).into_par_iter().map(move |r| (q, r)))
        .map(|(q, r)| {
            let params = CircuitParams::new(8, q, r).unwrap();
            let mut worst = 0.0f64;
            for shift in [0u32, 3] {
                let t = ToleranceM::new(&params, 1 << (q + shift)).unwrap();
                let exact = success_prob_exact(&params, t);
                let brute = success_prob_bruteforce(&params, t).unwrap();
                worst = worst.max((exact - brute).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    report(
        Scope::Probability,
        "closed-form-vs-bruteforce",
        "m = 8, q in {3, 5}, r in [2, 255], M in {2^q, 2^(q+3)}".into(),
        worst,
        1e-10,
    )
}

fn normalization_check() -> CheckReport {
    let instances: [(u32, u32, u64); 4] = [(4, 2, 3), (8, 3, 100), (8, 5, 3), (8, 5, 255)];
    let mut worst = 0.0f64;
    for &(m, q, r) in &instances {
        let params = CircuitParams::new(m, q, r).unwrap();
        let mut total = 0.0;
        let mut comp = 0.0;
        for ell in 0..params.modulus() as u64 {
            let y = measure_prob(ell, &params).unwrap() - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        worst = worst.max((total - 1.0).abs());
    }
    report(
        Scope::Probability,
        "measurement-normalization",
        format!("sum over all ell for {instances:?}"),
        worst,
        1e-9,
    )
}

fn phi_bound_check() -> CheckReport {
    let mut worst = f64::MIN;
    for r in (2..=1024u64).step_by(2) {
        let m = (64 - r.leading_zeros()).max(4);
        let params = CircuitParams::new(m, 5, r).unwrap();
        let Ok(t) = ToleranceM::new(&params, 32) else { continue };
        let phi = phi_term(&params, t);
        let cap = (r as f64 / params.modulus() as f64).powi(2);
        let cap2 = 2f64.powi(-2 * (m as i32 + 5 + 1));
        worst = worst.max(-phi).max(phi - cap).max(phi - cap2);
    }
    report(
        Scope::Probability,
        "phi-within-analytic-caps",
        "even r in [2, 1024], m = bitlen(r), q = 5, M = 32".into(),
        worst,
        0.0,
    )
}

fn power_of_two_check() -> CheckReport {
    let mut worst = 0.0f64;
    for s in 1..=10u32 {
        let r = 1u64 << s;
        let m = s + 1;
        let params = CircuitParams::new(m, 5, r).unwrap();
        let Ok(t) = ToleranceM::new(&params, 32.min(params.max_tolerance())) else { continue };
        let exact = success_prob_exact(&params, t);
        worst = worst.max((exact - (1.0 - 1.0 / r as f64)).abs());
    }
    report(
        Scope::Probability,
        "power-of-two-order-is-deterministic",
        "r = 2^s, s in [1, 10], q = 5".into(),
        worst,
        1e-12,
    )
}

fn table_grid_sandwich_check() -> CheckReport {
    let mut worst = f64::MIN;
    for &r in &[3u64, 15, 63, 255] {
        let params = CircuitParams::new(8, 5, r).unwrap();
        for &m_val in &[32u64, 256] {
            let t = ToleranceM::new(&params, m_val).unwrap();
            let exact = success_prob_exact(&params, t);
            let lower = qpf_lower_bound(&params, t).unwrap();
            let upper = qpf_upper_bound(&params, t).unwrap();
            worst = worst.max(lower - exact).max(exact - upper);
        }
    }
    report(
        Scope::Bounds,
        "sandwich-on-table-grid",
        "m = 8, q = 5, r in {3, 15, 63, 255}, M in {32, 256}".into(),
        worst,
        1e-9,
    )
}

fn lower_vs_ekera_check() -> CheckReport {
    let mut worst = f64::MIN;
    for &r in &[3u64, 15, 63, 255] {
        let params = CircuitParams::new(8, 5, r).unwrap();
        for &m_val in &[32u64, 256] {
            let t = ToleranceM::new(&params, m_val).unwrap();
            worst = worst.max(ekera_bound(&params, m_val) - qpf_lower_bound(&params, t).unwrap());
        }
    }
    report(
        Scope::Bounds,
        "lower-bound-dominates-prior-work",
        "the full table grid".into(),
        worst,
        0.0,
    )
}

/// Deterministic sweep of valid instances; orders that are powers of two are
/// excluded (the circuit is deterministic there and the upper bound does not
/// apply).
fn random_sweep_sandwich_check() -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut instances = Vec::new();
    while instances.len() < 500 {
        let m = rng.random_range(4..=12u32);
        let r = rng.random_range(3..(1u64 << m));
        if r.is_power_of_two() {
            continue;
        }
        let q = *[3u32, 5, 7].get(rng.random_range(0..3usize)).unwrap();
        let params = CircuitParams::new(m, q, r).unwrap();
        let wish = *[1u64 << q, 1 << (q + 3), 13, 97].get(rng.random_range(0..4usize)).unwrap();
        let m_val = wish.min(params.max_tolerance());
        if m_val < 2 {
            continue;
        }
        instances.push((params, m_val));
    }
    let worst = instances
        .par_iter()
        .map(|&(params, m_val)| {
            let t = ToleranceM::new(&params, m_val).unwrap();
            let exact = success_prob_exact(&params, t);
            let lower = qpf_lower_bound(&params, t).unwrap();
            let upper = qpf_upper_bound(&params, t).unwrap();
            (lower - exact).max(exact - upper)
        })
        .reduce(|| f64::MIN, f64::max);
    report(
        Scope::Bounds,
        "sandwich-on-random-sweep",
        "500 seeded instances, m in [4, 12], q in {3, 5, 7}, odd-part r >= 3".into(),
        worst,
        1e-9,
    )
}

fn leading_term_monotone_check() -> CheckReport {
    let mut worst = f64::MIN;
    for m_val in 2..=4096u64 {
        let here = crate::bounds::lower_leading_term(5, m_val);
        let next = crate::bounds::lower_leading_term(5, m_val + 1);
        worst = worst.max(here - next);
    }
    report(
        Scope::Bounds,
        "lower-leading-term-increasing-in-m",
        "integer M in [2, 4096]".into(),
        worst,
        0.0,
    )
}

fn sum_sin_check() -> CheckReport {
    let worst = (2..=4096u64)
        .into_par_iter()
        .map(|r| {
            let mut sum = 0.0;
            let mut comp = 0.0;
            for k in 1..r {
                let term = (PI * k as f64 / r as f64).sin().powi(2);
                let y = term - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            (sum - r as f64 / 2.0).abs()
        })
        .reduce(|| 0.0, f64::max);
    report(Scope::Bounds, "roots-of-unity-sine-sum", "r in [2, 4096]".into(), worst, 1e-9)
}

fn qpe_dominance_check() -> CheckReport {
    let mut worst = f64::MIN;
    for b in 1..=8u64 {
        let bound = qpe_lower_bound(b, 10).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            worst = worst.max(bound - qpe_exact_prob(x, b, 10).unwrap());
        }
    }
    report(
        Scope::Bounds,
        "qpe-bound-below-exact",
        "t = 10, B in [1, 8], 1001-point x grid".into(),
        worst,
        0.0,
    )
}

fn qpe_value_check() -> CheckReport {
    let worst = (qpe_lower_bound(2, 10).unwrap() - (1.0 - 4.0 / (3.0 * PI * PI))).abs();
    report(Scope::Bounds, "qpe-bound-value-at-b2", "B = 2".into(), worst, 1e-12)
}

fn sampler_normalization_check() -> CheckReport {
    let mut failures = 0u64;
    for &(m, q, r) in &[(4u32, 2u32, 3u64), (5, 3, 11), (8, 5, 15)] {
        let params = CircuitParams::new(m, q, r).unwrap();
        if Sampler::build(&params).is_err() {
            failures += 1;
        }
    }
    report(
        Scope::Simulator,
        "sampler-cdf-normalization",
        "(m, q, r) in {(4,2,3), (5,3,11), (8,5,15)}".into(),
        failures as f64,
        0.0,
    )
}

fn sampler_histogram_check() -> CheckReport {
    let params = CircuitParams::new(4, 2, 3).unwrap();
    let sampler = Sampler::build(&params).unwrap();
    let draws = 1_000_000u64;
    let mut counts = vec![0u64; sampler.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..draws {
        counts[sampler.sample(rng.random::<f64>()) as usize] += 1;
    }
    let mut probs: Vec<(u64, f64)> =
        (0..sampler.len() as u64).map(|ell| (ell, measure_prob(ell, &params).unwrap())).collect();
    probs.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut worst = 0.0f64;
    for &(ell, p) in probs.iter().take(20) {
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        worst = worst.max((counts[ell as usize] as f64 - mean).abs() / sigma);
    }
    report(
        Scope::Simulator,
        "histogram-matches-distribution",
        "m = 4, q = 2, r = 3; 1e6 seeded draws, top-20 states, sigma units".into(),
        worst,
        4.0,
    )
}

fn worker_independence_check() -> CheckReport {
    let params = CircuitParams::new(5, 3, 11).unwrap();
    let tolerance = ToleranceM::new(&params, 8).unwrap();
    let base = SimulationConfig { params, tolerance, trials: 5000, seed: 7, workers: 1 };
    let reference = run_simulation(&base).unwrap();
    let mut worst = 0.0f64;
    for workers in [4usize, 8] {
        let got = run_simulation(&SimulationConfig { workers, ..base }).unwrap();
        worst = worst.max((got.estimate - reference.estimate).abs());
        if got.successes != reference.successes || got.cf_successes != reference.cf_successes {
            worst = worst.max(1.0);
        }
    }
    report(
        Scope::Simulator,
        "worker-count-independence",
        "m = 5, q = 3, r = 11, 5000 trials, workers in {1, 4, 8}".into(),
        worst,
        0.0,
    )
}

fn binomial_sanity_check() -> CheckReport {
    let params = CircuitParams::new(5, 3, 11).unwrap();
    let tolerance = ToleranceM::new(&params, 8).unwrap();
    let p = success_prob_exact(&params, tolerance);
    let trials = 500u64;
    let mut chi2 = 0.0;
    for seed in 0..40u64 {
        let cfg = SimulationConfig { params, tolerance, trials, seed: 1000 + seed, workers: 1 };
        let got = run_simulation(&cfg).unwrap();
        let dev = got.successes as f64 - trials as f64 * p;
        chi2 += dev * dev / (trials as f64 * p * (1.0 - p));
    }
    // 0.999 quantile of chi-square with 40 degrees of freedom
    report(
        Scope::Simulator,
        "binomial-stderr-sanity",
        "40 seeded runs of 500 trials, chi-square statistic".into(),
        chi2,
        73.402,
    )
}
