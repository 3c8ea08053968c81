//! Success probability of quantum period finding.
//!
//! Evaluates the measurement distribution of the period-finding circuit, the
//! exact success probability of continued-fraction post-processing (closed
//! form and brute-force oracle), tight lower and upper bounds, the adapted
//! prior-work bound, the phase-estimation bound, and a reproducible parallel
//! Monte Carlo simulation — together with a verification suite that checks
//! every supporting identity numerically.
//!
//! The instance is described by [`CircuitParams`]: an order `r` of bit
//! length at most `m`, measured through an upper register of
//! `n = 2m + q + 1` qubits. Post-processing succeeds when the measurement
//! lies within a tolerance `M` of a positive multiple of `2^n / r`.
//!
//! ```
//! use qpf::{CircuitParams, ToleranceM};
//!
//! let params = CircuitParams::new(8, 5, 15).unwrap();
//! let tolerance = ToleranceM::new(&params, 32).unwrap();
//! let exact = qpf::success_prob_exact(&params, tolerance);
//! let lower = qpf::qpf_lower_bound(&params, tolerance).unwrap();
//! let upper = qpf::qpf_upper_bound(&params, tolerance).unwrap();
//! assert!(lower <= exact && exact <= upper);
//! ```

pub mod bounds;
pub mod error;
pub mod kernel;
pub mod number_theory;
pub mod probability;
pub mod simulator;
pub mod verify;

pub use bounds::{
    ekera_bound, ekera_bound_with_smoothness, h_lower_bound, h_upper_bound,
    perturbation_envelope, qpe_exact_prob, qpe_lower_bound, qpf_lower_bound,
    qpf_lower_bound_simple, qpf_upper_bound, BoundReport,
};
pub use error::{Error, Result};
pub use kernel::{f_term, h_exact, h_perturbed, lemma_p3a_sum, sinc_ratio, KernelArgs};
pub use number_theory::{
    cf_postprocess, convergents, residue_distribution, residues_bruteforce, split_odd_dyadic,
    Convergent, OddDyadicSplit, ResidueDistribution, Verdict,
};
pub use probability::{
    measure_prob, phi_term, success_prob_bruteforce, success_prob_exact, CircuitParams, ToleranceM,
};
pub use simulator::{
    run_simulation, simulate_trials, window_hit, Sampler, SimulationConfig, SimulationResult,
    TrialRecord,
};
pub use verify::{CheckReport, Scope};
