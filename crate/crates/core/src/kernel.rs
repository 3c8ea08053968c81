//! Numerically robust evaluation of the sinusoid-ratio kernel and of the
//! aggregate peak-mass functions `H_L(x; M)` and `H_L(x; M, eps)`.
//!
//! Every ratio is of the form `sin^2(pi u) / sin^2(pi u / L)`. Both sine
//! arguments are reduced to the nearest integer before evaluation (the
//! functions are 1-periodic in the reduced phase and squaring removes the
//! sign), which avoids catastrophic cancellation for large `u`. A scaled
//! phase within [`SINGULARITY_TOL`] of an integer marks a removable
//! singularity where the ratio is replaced by its analytic limit `L^2`.

use crate::error::{domain, Result};
use crate::number_theory::gcd;
use std::f64::consts::PI;

/// Distance of the scaled phase from an integer below which the ratio is
/// treated as sitting on a peak center and replaced by its limit.
pub const SINGULARITY_TOL: f64 = 1e-12;

/// `t - round(t)`, in [-1/2, 1/2].
#[inline]
fn reduce(t: f64) -> f64 {
    t - t.round()
}

/// `sin^2(pi num) / sin^2(pi den)` with the singular case filled by
/// `width^2`. Both arguments are reduced before evaluation.
#[inline]
fn sin_sq_ratio(num: f64, den: f64, width: f64) -> f64 {
    let den_red = reduce(den);
    if den_red.abs() < SINGULARITY_TOL {
        return width * width;
    }
    let s_num = (PI * reduce(num)).sin();
    let s_den = (PI * den_red).sin();
    (s_num * s_num) / (s_den * s_den)
}

/// The two mirrored summands of the perturbed kernel at offset `x` and index
/// `z`: the ratios at phases `(z + x)(1 + eps)` and `(z + 1 - x)(1 + eps)`.
///
/// The numerator phases are accumulated as `x + (z + x) eps` and
/// `(z + 1 - x) eps - x` so that the integer part never enters the floating
/// subtraction; at `eps = 0` this reproduces the unperturbed summand bit for
/// bit.
#[inline]
fn pair_term(x: f64, z: f64, width: f64, eps: f64) -> f64 {
    let v1 = z + x;
    let v2 = z + 1.0 - x;
    let scale = (1.0 + eps) / width;
    sin_sq_ratio(x + v1 * eps, v1 * scale, width) + sin_sq_ratio(v2 * eps - x, v2 * scale, width)
}

/// `sin^2(pi u) / sin^2(pi u / width)` with the removable singularity at
/// `u = 0 (mod width)` filled by its limit `width^2`.
pub fn sinc_ratio(u: f64, width: u64) -> Result<f64> {
    if width < 2 {
        return Err(domain(format!("sinc_ratio requires width >= 2, got {width}")));
    }
    if !u.is_finite() {
        return Err(domain("sinc_ratio requires a finite argument"));
    }
    let w = width as f64;
    Ok(sin_sq_ratio(u, u / w, w))
}

/// Summand `f(x; z)` of `H_L(x; M)`: the pair of sinusoid ratios at `z + x`
/// and `z + 1 - x`. At `x in {0, 1}` with `z = 0` the singular ratio
/// contributes the limit `width^2`.
pub fn f_term(x: f64, z: u64, width: u64) -> Result<f64> {
    if width < 2 {
        return Err(domain(format!("f_term requires width >= 2, got {width}")));
    }
    if z >= width {
        return Err(domain(format!("f_term requires z in [0, width - 1], got z = {z}")));
    }
    check_offset(x)?;
    Ok(pair_term(x, z as f64, width as f64, 0.0))
}

/// `H_L(x; M)`: total peak mass within tolerance `terms` at offset `x`,
/// the sum of `2 * terms` sinusoid ratios. Exactly `width^2` at `x in {0, 1}`.
pub fn h_exact(x: f64, terms: u64, width: u64) -> Result<f64> {
    if width < 2 {
        return Err(domain(format!("h_exact requires width >= 2, got {width}")));
    }
    if terms < 1 || terms > width {
        return Err(domain(format!(
            "h_exact requires 1 <= terms <= width, got terms = {terms}, width = {width}"
        )));
    }
    check_offset(x)?;
    Ok(h_sum(x, terms, width as f64, 0.0))
}

/// `H_L(x; M, eps)`: the perturbed peak mass, with every phase scaled by
/// `1 + eps`. Reduces exactly to [`h_exact`] when `eps = 0`.
pub fn h_perturbed(x: f64, terms: u64, width: u64, epsilon: f64) -> Result<f64> {
    if width < 2 {
        return Err(domain(format!("h_perturbed requires width >= 2, got {width}")));
    }
    check_offset(x)?;
    check_epsilon(epsilon)?;
    let cap = width as f64 / (2.0 * (1.0 + epsilon.abs()));
    if terms < 1 || terms as f64 > cap {
        return Err(domain(format!(
            "h_perturbed requires 1 <= terms <= width/(2(1+|eps|)) = {cap:.3}, got {terms}"
        )));
    }
    Ok(h_sum(x, terms, width as f64, epsilon))
}

#[inline]
fn h_sum(x: f64, terms: u64, width: f64, eps: f64) -> f64 {
    (0..terms).map(|z| pair_term(x, z as f64, width, eps)).sum()
}

fn check_offset(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("offset x must lie in [0, 1], got {x}")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon.abs() > 0.5 {
        return Err(domain(format!("perturbation must satisfy |eps| <= 1/2, got {epsilon}")));
    }
    Ok(())
}

/// Validated argument bundle for the kernel functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    /// Peak width `L >= 2` (number of summed phases).
    pub width: u64,
    /// Window half-width `M >= 1` (number of summand pairs).
    pub terms: u64,
    /// Fractional offset in [0, 1].
    pub x: f64,
    /// Relative phase perturbation, |epsilon| <= 1/2.
    pub epsilon: f64,
}

impl KernelArgs {
    pub fn new(width: u64, terms: u64, x: f64, epsilon: f64) -> Result<Self> {
        if width < 2 {
            return Err(domain(format!("kernel width must be >= 2, got {width}")));
        }
        if terms < 1 {
            return Err(domain("kernel terms must be >= 1"));
        }
        check_offset(x)?;
        check_epsilon(epsilon)?;
        Ok(KernelArgs { width, terms, x, epsilon })
    }

    /// `H_L(x; M)`, ignoring the stored perturbation.
    pub fn h_exact(&self) -> Result<f64> {
        h_exact(self.x, self.terms, self.width)
    }

    /// `H_L(x; M, eps)` at the stored perturbation.
    pub fn h_perturbed(&self) -> Result<f64> {
        h_perturbed(self.x, self.terms, self.width, self.epsilon)
    }
}

/// Direct evaluation of `sum_z sin^2(pi (z+x) a/b) / sin^2(pi (z+x) a/(bc))`
/// over `z = 0 .. bc/rho - 1` with `rho = gcd(a,b) * gcd(a/gcd(a,b), c)`.
/// Callers assert the identity: the sum equals `b c^2 / rho`.
pub fn lemma_p3a_sum(a: u64, b: u64, c: u64, x: f64) -> Result<f64> {
    if a == 0 || b == 0 || c == 0 {
        return Err(domain("lemma_p3a_sum requires positive integers a, b, c"));
    }
    let g = gcd(a, b);
    let rho = g * gcd(a / g, c);
    if rho > b {
        return Err(domain(format!(
            "lemma_p3a_sum requires b/rho >= 1 (equivalently c <= bc/rho), got rho = {rho} > b = {b}"
        )));
    }
    let len = b * c / rho;
    let (af, bf, cf) = (a as f64, b as f64, c as f64);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for z in 0..len {
        let zx = z as f64 + x;
        let term = sin_sq_ratio(zx * af / bf, zx * af / (bf * cf), cf);
        // Kahan: the sum can span several orders of magnitude
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}


#[cfg(test)]
mod tests {
    use super::reference::{h_direct, kahan};
    use super::*;

    #[test]
    fn sinc_ratio_examples() {
        assert_eq!(sinc_ratio(0.0, 8).unwrap(), 64.0);
        assert_eq!(sinc_ratio(1.0, 8).unwrap(), 0.0);
        assert!((sinc_ratio(0.5, 2).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(sinc_ratio(16.0, 8).unwrap(), 64.0);
        assert!(sinc_ratio(f64::NAN, 8).is_err());
        assert!(sinc_ratio(f64::INFINITY, 8).is_err());
        assert!(sinc_ratio(0.3, 1).is_err());
    }

    #[test]
    fn f_term_examples() {
        assert_eq!(f_term(0.0, 1, 16).unwrap(), 0.0);
        // frozen from the compensated direct-formula reference
        let got = f_term(0.3, 2, 32).unwrap();
        assert!((got - 22.593_682_179_916_1).abs() < 1e-11, "got {got}");
        // limit at the endpoints with z = 0
        assert_eq!(f_term(0.0, 0, 16).unwrap(), 256.0);
        assert_eq!(f_term(1.0, 0, 16).unwrap(), 256.0);
        assert!(f_term(0.5, 16, 16).is_err());
        assert!(f_term(1.5, 0, 16).is_err());
    }

    /// f(x; L - i) = f(x; i - 1) for i in [1, L-1].
    #[test]
    fn f_term_reflection_symmetry() {
        for &width in &[8u64, 16, 31] {
            for i in 1..width {
                for &x in &[0.1, 0.37, 0.5, 0.93] {
                    let lhs = f_term(x, width - i, width).unwrap();
                    let rhs = f_term(x, i - 1, width).unwrap();
                    assert!(
                        (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                        "width {width}, i {i}, x {x}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn h_exact_examples() {
        assert_eq!(h_exact(0.0, 4, 64).unwrap(), 4096.0);
        // M = L/2 with even L: constant L^2
        for &x in &[0.0, 0.125, 0.5, 0.777, 1.0] {
            let got = h_exact(x, 16, 32).unwrap();
            assert!((got - 1024.0).abs() < 1e-9 * 1024.0, "x = {x}: {got}");
        }
        // frozen from the compensated direct-formula reference
        let got = h_exact(0.5, 2, 32).unwrap();
        assert!((got - 923.584_485_532_754_2).abs() < 1e-9, "got {got}");
        assert!(h_exact(0.5, 0, 32).is_err());
        assert!(h_exact(0.5, 33, 32).is_err());
    }

    #[test]
    fn h_exact_matches_reference_path() {
        for &(x, m, l) in &[(0.5, 2u64, 32u64), (0.3, 5, 31), (0.05, 8, 64), (0.99, 3, 16)] {
            let got = h_exact(x, m, l).unwrap();
            let want = h_direct(x, m, l);
            assert!((got - want).abs() <= 1e-10 * want, "x={x} M={m} L={l}: {got} vs {want}");
        }
    }

    #[test]
    fn h_perturbed_reduces_to_h_exact() {
        for &(x, m, l) in &[(0.25, 4u64, 32u64), (0.0, 3, 64), (0.7, 10, 100)] {
            assert_eq!(h_perturbed(x, m, l, 0.0).unwrap(), h_exact(x, m, l).unwrap());
        }
    }

    #[test]
    fn h_perturbed_endpoint_limit() {
        assert!(h_perturbed(0.0, 4, 64, 1.0 / 1024.0).unwrap() >= 4096.0 - 1.0);
        // the z = 0 ratio hits the removable singularity exactly at x = 0
        let got = h_perturbed(0.0, 1, 64, 0.01).unwrap();
        assert!((got - 4096.0).abs() < 1.0, "got {got}");
    }

    #[test]
    fn h_perturbed_domain_checks() {
        assert!(h_perturbed(0.5, 16, 32, 0.0).is_ok());
        assert!(h_perturbed(0.5, 17, 32, 0.0).is_err()); // 17 > 32/2
        assert!(h_perturbed(0.5, 16, 32, 0.01).is_err()); // 16 > 32/(2*1.01)
        assert!(h_perturbed(0.5, 2, 32, 0.7).is_err());
        assert!(h_perturbed(-0.1, 2, 32, 0.0).is_err());
    }

    /// Perturbed curve at L = 32, M = 2: for eps = -0.30 the midpoint is the
    /// global maximum, for eps = -0.05 the derivative changes sign inside
    /// (0, 1/2).
    #[test]
    fn h_perturbed_nontrivial_critical_points() {
        let h = |x: f64, eps: f64| h_perturbed(x, 2, 32, eps).unwrap();
        let grid_max = (0..=500)
            .map(|i| h(i as f64 / 1000.0, -0.30))
            .fold(f64::MIN, f64::max);
        assert!(h(0.5, -0.30) >= grid_max);
        assert!(h(0.5, -0.05) < h(0.495, -0.05));
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 400.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&x| h(x, -0.05)).collect();
        let mut increasing = 0;
        let mut decreasing = 0;
        for w in vals.windows(2) {
            if w[1] > w[0] {
                increasing += 1;
            } else {
                decreasing += 1;
            }
        }
        assert!(increasing > 0 && decreasing > 0, "expected an interior critical point");
    }

    #[test]
    fn kernel_args_validation() {
        assert!(KernelArgs::new(32, 2, 0.5, -0.05).is_ok());
        assert!(KernelArgs::new(1, 2, 0.5, 0.0).is_err());
        assert!(KernelArgs::new(32, 0, 0.5, 0.0).is_err());
        assert!(KernelArgs::new(32, 2, 1.5, 0.0).is_err());
        assert!(KernelArgs::new(32, 2, 0.5, 0.6).is_err());
        let args = KernelArgs::new(32, 2, 0.5, 0.0).unwrap();
        assert_eq!(args.h_exact().unwrap(), args.h_perturbed().unwrap());
    }

    #[test]
    fn lemma_p3a_examples() {
        let got = lemma_p3a_sum(1, 1, 16, 0.37).unwrap();
        assert!((got - 256.0).abs() < 1e-9 * 256.0, "got {got}");
        // rho = gcd(2,4) * gcd(1,6) = 2: sum = 4 * 36 / 2 = 72
        let got = lemma_p3a_sum(2, 4, 6, 0.2).unwrap();
        assert!((got - 72.0).abs() < 1e-9 * 72.0, "got {got}");
        // rho = 1: sum = 5 * 49 = 245
        let got = lemma_p3a_sum(3, 5, 7, 0.5).unwrap();
        assert!((got - 245.0).abs() < 1e-9 * 245.0, "got {got}");
        assert!(lemma_p3a_sum(0, 1, 2, 0.5).is_err());
        // rho = 6 > b = 3
        assert!(lemma_p3a_sum(6, 3, 2, 0.5).is_err());
    }

    /// Mittag-Leffler / DiGamma partial sums: truncating
    /// sum 1/(n+x)^2 + 1/(n+1-x)^2 at N leaves a tail below 2/(N-1).
    #[test]
    fn digamma_partial_sum_tail() {
        let n_max = 100_000u64;
        for &x in &[0.1, 0.25, 0.37, 0.5] {
            let partial = kahan((0..n_max).map(|n| {
                let nf = n as f64;
                1.0 / (nf + x).powi(2) + 1.0 / (nf + 1.0 - x).powi(2)
            }));
            let closed = (PI / (PI * x).sin()).powi(2);
            let tail = 2.0 / (n_max as f64 - 1.0);
            assert!(
                (partial - closed).abs() <= tail,
                "x = {x}: |{partial} - {closed}| > {tail}"
            );
        }
    }
}
