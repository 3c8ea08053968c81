//! Exact integer machinery: the odd/dyadic decomposition of the order, the
//! residue distribution of the peak offsets, and continued-fraction
//! convergents with the exact stopping rule used by the post-processor.

use crate::error::{domain, Result};

/// Greatest common divisor.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Decomposition `r = odd * 2^pow2` with `odd` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OddDyadicSplit {
    /// The odd factor (`p` in the residue distribution).
    pub odd: u64,
    /// The dyadic exponent (`s`).
    pub pow2: u32,
}

impl OddDyadicSplit {
    /// Reconstruct the original integer.
    pub fn value(&self) -> u64 {
        self.odd << self.pow2
    }
}

/// Split `r >= 2` into its odd part and dyadic exponent.
pub fn split_odd_dyadic(r: u64) -> Result<OddDyadicSplit> {
    if r < 2 {
        return Err(domain(format!("split_odd_dyadic requires r >= 2, got {r}")));
    }
    let pow2 = r.trailing_zeros();
    Ok(OddDyadicSplit { odd: r >> pow2, pow2 })
}

/// Closed-form frequency table of the residues `delta_k = k*2^n/r mod 1`.
///
/// Every residue is `j/p` for the odd part `p` of `r`; `j = 0` occurs
/// `2^s - 1` times and every `j in [1, p-1]` occurs `2^s` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueDistribution {
    /// Common denominator `p` (odd part of `r`).
    pub denominator: u64,
    pow2: u32,
}

impl ResidueDistribution {
    /// Count of `k in [1, r-1]` with residue `j / denominator`.
    pub fn frequency(&self, j: u64) -> u64 {
        assert!(j < self.denominator, "residue index out of range");
        let full = 1u64 << self.pow2;
        if j == 0 { full - 1 } else { full }
    }

    /// Total number of residues, `r - 1`.
    pub fn total(&self) -> u64 {
        (self.denominator << self.pow2) - 1
    }
}

/// Residue numerators `j_k` (over the odd part `p` of `r`) of
/// `delta_k = k*2^n/r - floor(k*2^n/r)` for `k = 1..r-1`, computed in exact
/// integer arithmetic as `j_k = (k * 2^(n-s)) mod p`.
pub fn residues_bruteforce(r: u64, n: u32) -> Result<Vec<u64>> {
    let split = split_odd_dyadic(r)?;
    if split.pow2 >= n {
        return Err(domain(format!(
            "residues require the dyadic exponent of r below n (s = {}, n = {n})",
            split.pow2
        )));
    }
    let p = split.odd;
    let pow = pow2_mod(n - split.pow2, p);
    Ok((1..r)
        .map(|k| ((k as u128 * pow as u128) % p as u128) as u64)
        .collect())
}

/// Closed form of the residue frequency table, without enumeration.
pub fn residue_distribution(r: u64, n: u32) -> Result<ResidueDistribution> {
    let split = split_odd_dyadic(r)?;
    if split.pow2 >= n {
        return Err(domain(format!(
            "residue distribution requires the dyadic exponent of r below n (s = {}, n = {n})",
            split.pow2
        )));
    }
    Ok(ResidueDistribution { denominator: split.odd, pow2: split.pow2 })
}

/// `2^e mod p` by binary exponentiation.
fn pow2_mod(e: u32, p: u64) -> u64 {
    if p == 1 {
        return 0;
    }
    let mut result = 1u128;
    let mut base = 2u128 % p as u128;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    result as u64
}

/// One convergent `numerator/denominator` of a continued-fraction expansion,
/// always in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergent {
    pub numerator: u128,
    pub denominator: u128,
}

/// Convergent sequence of `numerator/denominator`, ending at the fraction
/// itself in lowest terms. Requires `0 <= numerator <= denominator`.
///
/// Denominators strictly increase: for fractions above one half the zeroth
/// convergent 0/1 shares its denominator with 1/1 and is dropped. The
/// post-processing stopping rule can never trigger on that head, so the
/// verdicts are unaffected.
pub fn convergents(numerator: u128, denominator: u128) -> Result<Vec<Convergent>> {
    if denominator == 0 {
        return Err(domain("convergents require a nonzero denominator"));
    }
    if numerator > denominator {
        return Err(domain(format!(
            "convergents require numerator <= denominator, got {numerator}/{denominator}"
        )));
    }
    let mut seq: Vec<Convergent> = ConvergentIter::new(numerator, denominator).collect();
    if seq.len() >= 2 && seq[0].denominator == seq[1].denominator {
        seq.remove(0);
    }
    Ok(seq)
}

/// Lazily yields convergents via the Euclidean recurrence
/// `p_i = a_i p_(i-1) + p_(i-2)`, `q_i = a_i q_(i-1) + q_(i-2)`.
struct ConvergentIter {
    // p_(i-1), p_(i-2) and q_(i-1), q_(i-2)
    p_prev: u128,
    p_prev2: u128,
    q_prev: u128,
    q_prev2: u128,
    a: u128,
    b: u128,
    done: bool,
}

impl ConvergentIter {
    fn new(numerator: u128, denominator: u128) -> Self {
        ConvergentIter {
            p_prev: 1,
            p_prev2: 0,
            q_prev: 0,
            q_prev2: 1,
            a: numerator,
            b: denominator,
            done: false,
        }
    }
}

impl Iterator for ConvergentIter {
    type Item = Convergent;

    fn next(&mut self) -> Option<Convergent> {
        if self.done {
            return None;
        }
        let digit = self.a / self.b;
        let rem = self.a - digit * self.b;
        let p = digit * self.p_prev + self.p_prev2;
        let q = digit * self.q_prev + self.q_prev2;
        self.p_prev2 = self.p_prev;
        self.p_prev = p;
        self.q_prev2 = self.q_prev;
        self.q_prev = q;
        self.a = self.b;
        self.b = rem;
        if rem == 0 {
            self.done = true;
        }
        Some(Convergent { numerator: p, denominator: q })
    }
}

/// Outcome of the continued-fraction post-processing of one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A non-trivial divisor of the order was recovered.
    Success { divisor: u64 },
    Failure,
}

impl Verdict {
    pub fn is_success(&self) -> bool {
        matches!(self, Verdict::Success { .. })
    }
}

/// Continued-fraction post-processing of a measured `ell_hat`.
///
/// Walks the convergents `p_k/q_k` of `ell_hat / 2^n` and stops at the first
/// one with `q_k >= 2^m` or `|p_k/q_k - ell_hat/2^n| <= 1/2^(2m+1)`; succeeds
/// iff the stopping convergent has `1 < q_k < 2^m` and `q_k` divides `r`.
///
/// The approximation test is evaluated exactly: with `n = 2m + q + 1` it is
/// equivalent to `|p_k 2^n - ell_hat q_k| <= q_k 2^(n-2m-1)`, which fits in
/// 128-bit integers for every supported instance (`n <= 64`).
pub fn cf_postprocess(ell_hat: u64, n: u32, m: u32, r: u64) -> Verdict {
    assert!(n <= 64, "cf_postprocess supports n <= 64");
    assert!(n > 2 * m, "cf_postprocess requires n >= 2m + 1");
    let modulus = 1u128 << n;
    let ell = ell_hat as u128;
    assert!(ell < modulus, "ell_hat out of range");
    let denom_cap = 1u128 << m;
    let shift = n - 2 * m - 1; // = q
    for c in ConvergentIter::new(ell, modulus) {
        let lhs = (c.numerator * modulus).abs_diff(ell * c.denominator);
        let close = lhs <= (c.denominator << shift);
        if c.denominator >= denom_cap || close {
            if close && c.denominator > 1 && c.denominator < denom_cap {
                let q = c.denominator as u64;
                if r.is_multiple_of(q) {
                    return Verdict::Success { divisor: q };
                }
            }
            return Verdict::Failure;
        }
    }
    Verdict::Failure
}
