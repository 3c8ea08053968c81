//! Closed-form bounds: the peak-mass envelope, the perturbation envelope,
//! the tight lower/upper bounds on the success probability, the adapted
//! prior-work bound, and the phase-estimation bound.

use crate::error::{domain, Result};
use crate::kernel;
use crate::probability::{success_prob_exact, CircuitParams, ToleranceM};
use std::f64::consts::PI;

/// All methods evaluated on one `(r, M)` cell. Values are reported raw,
/// without clamping to [0, 1]: the prior-work bound can leave that range
/// and the comparison depends on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub r: u64,
    pub tolerance: u64,
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
    pub ekera: f64,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
}

impl BoundReport {
    /// Evaluate lower/exact/upper/ekera on one cell. Monte Carlo fields are
    /// left empty; the caller may attach them.
    pub fn compute(params: &CircuitParams, tolerance: ToleranceM) -> Result<BoundReport> {
        Ok(BoundReport {
            r: params.r,
            tolerance: tolerance.value,
            lower: qpf_lower_bound(params, tolerance)?,
            exact: success_prob_exact(params, tolerance),
            upper: qpf_upper_bound(params, tolerance)?,
            ekera: ekera_bound(params, tolerance.value),
            mc_estimate: None,
            mc_stderr: None,
        })
    }

    /// `lower <= exact <= upper` within the stated slack.
    pub fn sandwich_holds(&self, slack: f64) -> bool {
        self.lower <= self.exact + slack && self.exact <= self.upper + slack
    }
}

/// Lower bound on the peak mass `H_L(x; M)` for `M < L/2`:
/// `L^2 (1 - min{4/(pi^2(2M-1)), sin^2(pi x)(2M-1)/(pi^2 M(M-1))})`.
/// Equality (value `L^2`) at `x in {0, 1}`.
pub fn h_lower_bound(x: f64, terms: u64, width: u64) -> Result<f64> {
    check_h_bound_args(x, terms, width)?;
    let w = width as f64;
    if x == 0.0 || x == 1.0 {
        return Ok(w * w);
    }
    let m = terms as f64;
    let pi2 = PI * PI;
    let first = 4.0 / (pi2 * (2.0 * m - 1.0));
    let second = if terms >= 2 {
        (PI * x).sin().powi(2) * (2.0 * m - 1.0) / (pi2 * m * (m - 1.0))
    } else {
        f64::INFINITY
    };
    Ok(w * w * (1.0 - first.min(second)))
}

/// Upper bound on the peak mass `H_L(x; M)` for `M < L/2`:
/// `L^2 (1 - 4 sin^2(pi x)/(pi^2(2M+1))) + 4 L sin^2(pi x)/pi^2`.
pub fn h_upper_bound(x: f64, terms: u64, width: u64) -> Result<f64> {
    check_h_bound_args(x, terms, width)?;
    let w = width as f64;
    if x == 0.0 || x == 1.0 {
        return Ok(w * w);
    }
    let m = terms as f64;
    let pi2 = PI * PI;
    let sin2 = (PI * x).sin().powi(2);
    Ok(w * w * (1.0 - 4.0 * sin2 / (pi2 * (2.0 * m + 1.0))) + 4.0 * w * sin2 / pi2)
}

fn check_h_bound_args(x: f64, terms: u64, width: u64) -> Result<()> {
    if width < 2 || terms < 1 {
        return Err(domain("peak-mass bounds require width >= 2 and terms >= 1"));
    }
    if 2 * terms >= width {
        return Err(domain(format!(
            "peak-mass bounds require terms < width/2, got terms = {terms}, width = {width}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("offset x must lie in [0, 1], got {x}")));
    }
    Ok(())
}

/// Envelope on `|H_L(x; M, eps) - H_L(x; M)|`:
/// `2 pi L^2 |eps| (1/3 + (log2 M + pi^2/6) / (4 (1 - |eps|)^3))`.
pub fn perturbation_envelope(terms: u64, width: u64, epsilon: f64) -> Result<f64> {
    if width < 2 || terms < 1 {
        return Err(domain("perturbation envelope requires width >= 2 and terms >= 1"));
    }
    if !epsilon.is_finite() || epsilon.abs() > 0.5 {
        return Err(domain(format!("perturbation must satisfy |eps| <= 1/2, got {epsilon}")));
    }
    let cap = width as f64 / (2.0 * (1.0 + epsilon.abs()));
    if terms as f64 > cap {
        return Err(domain(format!(
            "perturbation envelope requires terms <= width/(2(1+|eps|)) = {cap:.3}, got {terms}"
        )));
    }
    let w = width as f64;
    let e = epsilon.abs();
    let m = terms as f64;
    Ok(2.0 * PI * w * w * e * (1.0 / 3.0 + (m.log2() + PI * PI / 6.0) / (4.0 * (1.0 - e).powi(3))))
}

/// Tight lower bound on the success probability:
/// `(1 - 1/r - (M - 1/2)/(pi^2 M (M-1))) - r (2 log2 M + 7)/2^n`.
/// Requires `m >= 4`.
pub fn qpf_lower_bound(params: &CircuitParams, tolerance: ToleranceM) -> Result<f64> {
    if params.m < 4 {
        return Err(domain(format!("the success-probability bounds require m >= 4, got {}", params.m)));
    }
    Ok(lower_leading_term(params.r, tolerance.value) - error_term(params, tolerance.value, 0.0))
}

/// Leading term of the lower bound, exposed for the monotonicity check.
pub(crate) fn lower_leading_term(r: u64, tolerance: u64) -> f64 {
    let m = tolerance as f64;
    1.0 - 1.0 / r as f64 - (m - 0.5) / (PI * PI * m * (m - 1.0))
}

fn error_term(params: &CircuitParams, tolerance: u64, extra: f64) -> f64 {
    params.r as f64 * (2.0 * (tolerance as f64).log2() + 7.0 + extra) / params.modulus() as f64
}

/// Tight upper bound on the success probability:
/// `(1 - 1/r - (M - 1/2)/(kappa pi^2 M (M-1))) + r (2 log2 M + 7 + 2/pi^2 + 2^-(m+q+1))/2^n`
/// with `kappa = 1 + (M - 1/4)/(M (M-1))`.
///
/// Requires `m >= 4` and an order with odd part at least 3: when `r` is a
/// power of two the circuit is deterministic (`r L = 2^n`) and the bound's
/// derivation does not apply.
pub fn qpf_upper_bound(params: &CircuitParams, tolerance: ToleranceM) -> Result<f64> {
    if params.m < 4 {
        return Err(domain(format!("the success-probability bounds require m >= 4, got {}", params.m)));
    }
    if params.split.odd < 3 {
        return Err(domain(format!(
            "the upper bound requires an order with odd part >= 3; r = {} is a power of two",
            params.r
        )));
    }
    let m = tolerance.value as f64;
    let pi2 = PI * PI;
    let kappa = 1.0 + (m - 0.25) / (m * (m - 1.0));
    let leading = 1.0 - 1.0 / params.r as f64 - (m - 0.5) / (kappa * pi2 * m * (m - 1.0));
    let extra = 2.0 / pi2 + 2f64.powi(-((params.m + params.q + 1) as i32));
    Ok(leading + error_term(params, tolerance.value, extra))
}

/// The simpler intermediate lower bound
/// `(rL/2^n)(1 - 1/r)(1 - 4/(pi^2(2M-1)))` minus the same error envelope
/// as [`qpf_lower_bound`].
pub fn qpf_lower_bound_simple(params: &CircuitParams, tolerance: ToleranceM) -> Result<f64> {
    if params.m < 4 {
        return Err(domain(format!("the success-probability bounds require m >= 4, got {}", params.m)));
    }
    let m = tolerance.value as f64;
    let r = params.r as f64;
    let ratio = r * params.peak_width as f64 / params.modulus() as f64;
    let leading = ratio * (1.0 - 1.0 / r) * (1.0 - 4.0 / (PI * PI * (2.0 * m - 1.0)));
    Ok(leading - error_term(params, tolerance.value, 0.0))
}

/// Adapted prior-work bound with `B = M`:
/// `((r-1)/r)(1 - (2/M + 1/M^2 + 1/M^3)/pi^2) - pi^2 (r-1)(2M+1)/2^n`.
/// Reported raw; it can decrease in `M` and go negative.
pub fn ekera_bound(params: &CircuitParams, tolerance: u64) -> f64 {
    assert!(tolerance >= 1, "ekera_bound requires M >= 1");
    let r = params.r as f64;
    let b = tolerance as f64;
    let pi2 = PI * PI;
    let circuit = (r - 1.0) / r * (1.0 - (2.0 / b + 1.0 / (b * b) + 1.0 / (b * b * b)) / pi2);
    circuit - pi2 * (r - 1.0) * (2.0 * b + 1.0) / params.modulus() as f64
}

/// Prior-work bound including the smoothness post-processing factor:
/// the circuit term over an `m + ell` bit register times
/// `(1 - 1/(c ln(c m)) - 1/r)`. Requires `2^m > r` and `2^(m+ell) > r^2`.
pub fn ekera_bound_with_smoothness(r: u64, m: u32, ell: u32, b: u64, c: f64) -> Result<f64> {
    if b < 1 {
        return Err(domain("the smoothness bound requires B >= 1"));
    }
    if c < 1.0 {
        return Err(domain(format!("the smoothness bound requires c >= 1, got {c}")));
    }
    if m >= 64 || r >= (1u64 << m) {
        return Err(domain(format!("the smoothness bound requires 2^m > r, got m = {m}, r = {r}")));
    }
    let total_bits = m as u64 + ell as u64;
    if total_bits < 128 && (r as u128 * r as u128) >= (1u128 << total_bits) {
        return Err(domain(format!(
            "the smoothness bound requires 2^(m+ell) > r^2, got m+ell = {total_bits}, r = {r}"
        )));
    }
    let rf = r as f64;
    let bf = b as f64;
    let pi2 = PI * PI;
    let register = (total_bits as f64).exp2();
    let circuit = (rf - 1.0) / rf * (1.0 - (2.0 / bf + 1.0 / (bf * bf) + 1.0 / (bf * bf * bf)) / pi2)
        - pi2 * (rf - 1.0) * (2.0 * bf + 1.0) / register;
    let smooth = 1.0 - 1.0 / (c * (c * m as f64).ln()) - 1.0 / rf;
    Ok(circuit * smooth)
}

/// Phase-estimation lower bound `1 - 4/(pi^2 (2B - 1))` on the probability
/// of estimating the phase within `(B + 1)/2^t`. Requires `1 <= B < 2^(t-1)`.
pub fn qpe_lower_bound(b: u64, t: u32) -> Result<f64> {
    check_qpe_args(b, t)?;
    Ok(1.0 - 4.0 / (PI * PI * (2.0 * b as f64 - 1.0)))
}

/// Exact phase-estimation success probability `H_(2^t)(x; B) / 2^(2t)` at
/// truncation offset `x`.
pub fn qpe_exact_prob(x: f64, b: u64, t: u32) -> Result<f64> {
    check_qpe_args(b, t)?;
    let width = 1u64 << t;
    let h = kernel::h_exact(x, b, width)?;
    Ok(h / (width as f64 * width as f64))
}

fn check_qpe_args(b: u64, t: u32) -> Result<()> {
    if !(2..=31).contains(&t) {
        return Err(domain(format!("phase estimation supports 2 <= t <= 31, got {t}")));
    }
    if b < 1 || b >= (1u64 << (t - 1)) {
        return Err(domain(format!("phase estimation requires 1 <= B < 2^(t-1), got B = {b}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::h_exact;

    fn cell(r: u64, m_val: u64) -> (CircuitParams, ToleranceM) {
        let p = CircuitParams::new(8, 5, r).unwrap();
        let t = ToleranceM::new(&p, m_val).unwrap();
        (p, t)
    }

    #[test]
    fn h_bounds_equality_at_endpoints() {
        for &x in &[0.0, 1.0] {
            assert_eq!(h_lower_bound(x, 4, 64).unwrap(), 4096.0);
            assert_eq!(h_upper_bound(x, 4, 64).unwrap(), 4096.0);
        }
    }

    #[test]
    fn h_bounds_sandwich_h_exact() {
        for &(x, m, l) in &[(0.5f64, 8u64, 128u64), (0.25, 2, 32), (0.9, 5, 64), (0.01, 3, 100)] {
            let lo = h_lower_bound(x, m, l).unwrap();
            let hi = h_upper_bound(x, m, l).unwrap();
            let h = h_exact(x, m, l).unwrap();
            assert!(lo <= h + 1e-9 * h && h <= hi + 1e-9 * h, "x={x} M={m} L={l}: {lo} {h} {hi}");
        }
        // frozen from direct formula evaluation
        let lo = h_lower_bound(0.5, 8, 128).unwrap();
        let hi = h_upper_bound(0.5, 8, 128).unwrap();
        assert!((lo - 15_941.320_993_921_05).abs() < 1e-8);
        assert!((hi - 16_045.277_323_014_04).abs() < 1e-8);
    }

    #[test]
    fn h_lower_bound_min_branch_selection() {
        // at x = 0.25, M = 2, L = 32 the sin^2-scaled branch is smaller
        let x = 0.25f64;
        let pi2 = PI * PI;
        let first = 4.0 / (pi2 * 3.0);
        let second = (PI * x).sin().powi(2) * 3.0 / (pi2 * 2.0);
        let want = 1024.0 * (1.0 - first.min(second));
        assert_eq!(h_lower_bound(x, 2, 32).unwrap(), want);
        assert!(second < first);
        assert!(h_lower_bound(0.5, 16, 32).is_err());
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(perturbation_envelope(4, 64, 0.0).unwrap(), 0.0);
        let got = perturbation_envelope(2, 32, 1.0 / 32.0).unwrap();
        let pi2 = PI * PI;
        let want = 2.0 * PI * 1024.0 * (1.0 / 32.0)
            * (1.0 / 3.0 + (1.0 + pi2 / 6.0) / (4.0 * (31.0f64 / 32.0).powi(3)));
        assert_eq!(got, want);
        assert!((got - 213.255_047_196_965_08).abs() < 1e-10);
        assert!(perturbation_envelope(16, 32, 0.01).is_err());
    }

    #[test]
    fn envelope_dominates_observed_perturbation() {
        let p = CircuitParams::new(8, 5, 15).unwrap();
        let (m_val, l) = (32u64, p.peak_width);
        let env = perturbation_envelope(m_val, l, p.epsilon).unwrap();
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            let diff = (kernel::h_perturbed(x, m_val, l, p.epsilon).unwrap()
                - kernel::h_exact(x, m_val, l).unwrap())
            .abs();
            assert!(diff <= env, "x = {x}: diff {diff} > envelope {env}");
        }
    }

    #[test]
    fn qpf_lower_table_cells() {
        let (p, t) = cell(63, 32);
        let got = qpf_lower_bound(&p, t).unwrap();
        assert!((got - 0.980_654_281_694_962_4).abs() < 1e-12, "got {got}");
        let (p, t) = cell(255, 32);
        let got = qpf_lower_bound(&p, t).unwrap();
        assert!((got - 0.991_827_530_698_339_7).abs() < 1e-12, "got {got}");
        let (p, t) = cell(15, 256);
        let got = qpf_lower_bound(&p, t).unwrap();
        assert!((got - 0.932_854_516_999_207_9).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn qpf_upper_table_cells() {
        let (p, t) = cell(3, 32);
        let got = qpf_upper_bound(&p, t).unwrap();
        assert!((got - 0.663_561_396_117_669_7).abs() < 1e-12, "got {got}");
        let (p, t) = cell(255, 256);
        let got = qpf_upper_bound(&p, t).unwrap();
        assert!((got - 0.997_094_065_683_384_2).abs() < 1e-12, "got {got}");
        // sandwich consistency across the grid
        for &r in &[3u64, 15, 63, 255] {
            for &m_val in &[32u64, 256] {
                let (p, t) = cell(r, m_val);
                assert!(qpf_lower_bound(&p, t).unwrap() <= qpf_upper_bound(&p, t).unwrap());
            }
        }
    }

    #[test]
    fn qpf_upper_rejects_power_of_two_orders() {
        let p = CircuitParams::new(8, 5, 16).unwrap();
        let t = ToleranceM::new(&p, 32).unwrap();
        assert!(qpf_upper_bound(&p, t).is_err());
        assert!(qpf_lower_bound(&p, t).is_ok());
    }

    #[test]
    fn qpf_bounds_require_m_at_least_4() {
        let p = CircuitParams::new(3, 5, 5).unwrap();
        let t = ToleranceM::new(&p, 8).unwrap();
        assert!(qpf_lower_bound(&p, t).is_err());
        assert!(qpf_upper_bound(&p, t).is_err());
    }

    #[test]
    fn qpf_lower_simple_is_below_tight_lower() {
        let (p, t) = cell(63, 32);
        let simple = qpf_lower_bound_simple(&p, t).unwrap();
        assert!((simple - 0.977_536_929_364_058).abs() < 1e-12, "got {simple}");
        assert!(simple <= qpf_lower_bound(&p, t).unwrap());
    }

    #[test]
    fn ekera_table_cells() {
        let (p, _) = cell(3, 32);
        let got = ekera_bound(&p, 32);
        assert!((got - 0.662_071_022_367_055_4).abs() < 1e-12, "got {got}");
        let (p, _) = cell(63, 32);
        let got = ekera_bound(&p, 32);
        assert!((got - 0.968_311_527_168_379_9).abs() < 1e-12, "got {got}");
        // the non-monotone cell: larger M gives a smaller bound
        let (p, _) = cell(255, 32);
        let at_32 = ekera_bound(&p, 32);
        let at_256 = ekera_bound(&p, 256);
        assert!((at_256 - 0.688_675_165_037_382_4).abs() < 1e-12, "got {at_256}");
        assert!(at_256 < at_32);
    }

    #[test]
    fn ekera_smoothness_factor() {
        // matches the plain circuit bound when ell = m + q + 1 and B = M
        let (p, _) = cell(255, 32);
        let with = ekera_bound_with_smoothness(255, 8, 14, 32, 1.0).unwrap();
        assert!((with - 0.489_843_229_158_407).abs() < 1e-12, "got {with}");
        let circuit = ekera_bound(&p, 32);
        let smooth = 1.0 - 1.0 / (8.0f64).ln() - 1.0 / 255.0;
        assert!((with - circuit * smooth).abs() < 1e-12);
        // c -> infinity: the smoothness factor tends to 1 - 1/r
        let huge_c = ekera_bound_with_smoothness(255, 8, 14, 32, 1e18).unwrap();
        assert!((huge_c / circuit - (1.0 - 1.0 / 255.0)).abs() < 1e-9);
        assert!(ekera_bound_with_smoothness(255, 8, 2, 32, 1.0).is_err());
        assert!(ekera_bound_with_smoothness(255, 7, 14, 32, 1.0).is_err());
    }

    #[test]
    fn qpe_bound_examples() {
        let got = qpe_lower_bound(2, 10).unwrap();
        assert!((got - (1.0 - 4.0 / (3.0 * PI * PI))).abs() < 1e-15);
        assert!((got - 0.864_905_088_476_883).abs() < 1e-12);
        // exact value dominates the bound on a grid
        for b in 1..=8u64 {
            let bound = qpe_lower_bound(b, 10).unwrap();
            for i in 0..=100 {
                let x = i as f64 / 100.0;
                let exact = qpe_exact_prob(x, b, 10).unwrap();
                assert!(exact >= bound, "B = {b}, x = {x}: {exact} < {bound}");
            }
        }
        // no truncation error: the estimate is deterministic
        assert_eq!(qpe_exact_prob(0.0, 2, 10).unwrap(), 1.0);
        assert!(qpe_lower_bound(512, 10).is_err());
        assert!(qpe_lower_bound(0, 10).is_err());
    }

    #[test]
    fn bound_report_sandwich() {
        let (p, t) = cell(15, 32);
        let report = BoundReport::compute(&p, t).unwrap();
        assert!(report.sandwich_holds(1e-9));
        assert!(report.lower <= report.exact && report.exact <= report.upper);
        assert!(report.lower >= report.ekera);
        assert!(report.mc_estimate.is_none());
    }
}
