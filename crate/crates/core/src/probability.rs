//! The headline quantities: the measurement distribution of the upper
//! register, the exact success probability (closed form and brute-force
//! oracle), and the boundary-state correction term.

use crate::error::{capacity, domain, internal, Result};
use crate::kernel;
use crate::number_theory::{split_odd_dyadic, OddDyadicSplit};
use std::f64::consts::PI;

/// Brute-force enumeration is a desk-scale verification tool; larger
/// registers are rejected.
pub const MAX_BRUTEFORCE_QUBITS: u32 = 28;

/// One period-finding instance: the register sizes and the order, with the
/// derived peak geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Bit-length bound on the order: `r < 2^m`.
    pub m: u32,
    /// Extra qubits in the upper register.
    pub q: u32,
    /// Upper register width, `n = 2m + q + 1`.
    pub n: u32,
    /// The order.
    pub r: u64,
    /// Peak width `L = floor(2^n / r)`.
    pub peak_width: u64,
    /// Relative perturbation `r L / 2^n - 1`, in `(-r/2^n, 0]`.
    pub epsilon: f64,
    /// Odd/dyadic split `r = odd * 2^pow2`.
    pub split: OddDyadicSplit,
    /// Number of zero residues, `2^pow2 - 1`.
    pub tau: u64,
}

impl CircuitParams {
    /// Validate and derive an instance. Requires `2 <= r < 2^m` and
    /// `n = 2m + q + 1 <= 64`.
    pub fn new(m: u32, q: u32, r: u64) -> Result<Self> {
        if m < 1 {
            return Err(domain("m must be >= 1"));
        }
        let n = 2 * m + q + 1;
        if n > 64 {
            return Err(domain(format!("n = 2m + q + 1 = {n} exceeds the supported 64 qubits")));
        }
        if r < 2 || (m < 64 && r >= (1u64 << m)) {
            return Err(domain(format!("r must lie in [2, 2^m - 1], got r = {r}, m = {m}")));
        }
        let modulus = 1u128 << n;
        let peak_width = (modulus / r as u128) as u64;
        // r * L - 2^n is an exact small integer; epsilon inherits one rounding
        let num = (r as u128 * peak_width as u128) as i128 - modulus as i128;
        let epsilon = num as f64 / modulus as f64;
        let split = split_odd_dyadic(r)?;
        let tau = (1u64 << split.pow2) - 1;
        Ok(CircuitParams { m, q, n, r, peak_width, epsilon, split, tau })
    }

    /// `2^n` as a wide integer.
    pub fn modulus(&self) -> u128 {
        1u128 << self.n
    }

    /// Largest admissible post-processing tolerance,
    /// `floor(L / (2 (1 + |eps|)))`.
    pub fn max_tolerance(&self) -> u64 {
        (self.peak_width as f64 / (2.0 * (1.0 + self.epsilon.abs()))).floor() as u64
    }
}

/// Post-processing tolerance `M`, validated against an instance:
/// `2 <= M <= floor(L / (2 (1 + |eps|)))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToleranceM {
    pub value: u64,
}

impl ToleranceM {
    pub fn new(params: &CircuitParams, value: u64) -> Result<Self> {
        let cap = params.max_tolerance();
        if value < 2 || value > cap {
            return Err(domain(format!(
                "tolerance M must lie in [2, {cap}] for r = {}, n = {}; got {value}",
                params.r, params.n
            )));
        }
        Ok(ToleranceM { value })
    }
}

/// Probability of measuring `ell` on the upper register,
/// `(1/(2^n L)) sin^2(pi ell r L / 2^n) / sin^2(pi ell r / 2^n)`.
///
/// The sine arguments are reduced to their distance from the nearest integer
/// in exact integer arithmetic before evaluation; at exact peak centers
/// (`sin^2(pi ell r / 2^n) = 0`) the ratio takes its limit `L^2`, giving
/// probability `L / 2^n`.
pub fn measure_prob(ell: u64, params: &CircuitParams) -> Result<f64> {
    let modulus = params.modulus();
    if ell as u128 >= modulus {
        return Err(domain(format!("ell = {ell} out of range [0, 2^{} - 1]", params.n)));
    }
    let n_f = modulus as f64;
    let l_f = params.peak_width as f64;
    let b = ell as u128 * params.r as u128 % modulus;
    if b == 0 {
        return Ok(l_f / n_f);
    }
    let a = b * params.peak_width as u128 % modulus;
    let num = (PI * frac_dist(a, modulus)).sin();
    let den = (PI * frac_dist(b, modulus)).sin();
    Ok((num * num) / (den * den) / (n_f * l_f))
}

/// Distance of `v / modulus` from the nearest integer, for `0 <= v < modulus`.
#[inline]
fn frac_dist(v: u128, modulus: u128) -> f64 {
    v.min(modulus - v) as f64 / modulus as f64
}

/// Brute-force success probability: enumerates, for every `k in [1, r-1]`,
/// the window of measurements within tolerance of `k 2^n / r` and sums their
/// probabilities. The oracle against which the closed form is checked.
///
/// Windows are `[u_k - M, u_k + M]` when the residue is zero and
/// `[u_k - (M-1), u_k + M]` otherwise; they are asserted pairwise disjoint.
pub fn success_prob_bruteforce(params: &CircuitParams, tolerance: ToleranceM) -> Result<f64> {
    if params.n > MAX_BRUTEFORCE_QUBITS {
        return Err(capacity(format!(
            "brute-force enumeration is capped at n <= {MAX_BRUTEFORCE_QUBITS}, got n = {}",
            params.n
        )));
    }
    let modulus = params.modulus();
    let m_tol = tolerance.value as i128;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut prev_hi: Option<i128> = None;
    for k in 1..params.r {
        let y = k as u128 * modulus;
        let u_k = (y / params.r as u128) as i128;
        let lo = if y.is_multiple_of(params.r as u128) { u_k - m_tol } else { u_k - (m_tol - 1) };
        let hi = u_k + m_tol;
        if lo <= prev_hi.unwrap_or(-1) {
            return Err(internal(format!("overlapping windows at k = {k} (r = {})", params.r)));
        }
        prev_hi = Some(hi);
        if lo < 0 || hi as u128 >= modulus {
            return Err(internal(format!("window [{lo}, {hi}] escapes the register at k = {k}")));
        }
        for ell in lo..=hi {
            let term = measure_prob(ell as u64, params)?;
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    Ok(sum)
}

/// Exact success probability via the residue distribution:
/// `(1/(2^n L)) sum_j (2^s - [j = 0]) H_L(j/p; M, eps) + phi`.
pub fn success_prob_exact(params: &CircuitParams, tolerance: ToleranceM) -> f64 {
    let p = params.split.odd;
    let weight_full = (1u64 << params.split.pow2) as f64;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for j in 0..p {
        let weight = if j == 0 { weight_full - 1.0 } else { weight_full };
        if weight == 0.0 {
            continue;
        }
        let h = kernel::h_perturbed(
            j as f64 / p as f64,
            tolerance.value,
            params.peak_width,
            params.epsilon,
        )
        .expect("ToleranceM keeps the kernel arguments in range");
        let y = weight * h - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let scale = params.modulus() as f64 * params.peak_width as f64;
    sum / scale + phi_term(params, tolerance)
}

/// Boundary-state correction
/// `phi = (tau/(2^n L)) sin^2(pi M eps) / sin^2(pi M (1 + eps) / L)`;
/// zero when `r` is odd (`tau = 0`) or `r L = 2^n` (`eps = 0`).
pub fn phi_term(params: &CircuitParams, tolerance: ToleranceM) -> f64 {
    if params.tau == 0 || params.epsilon == 0.0 {
        return 0.0;
    }
    let m_f = tolerance.value as f64;
    let num = (PI * m_f * params.epsilon).sin();
    let den = (PI * m_f * (1.0 + params.epsilon) / params.peak_width as f64).sin();
    let scale = params.modulus() as f64 * params.peak_width as f64;
    params.tau as f64 / scale * (num * num) / (den * den)
}
