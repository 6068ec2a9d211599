//! # renyi-core
//!
//! Numerical toolkit for quantum Renyi information quantities and the strong
//! converse exponents of three operational tasks: smoothing of the
//! max-relative entropy, privacy amplification against quantum adversaries,
//! and quantum information decoupling.
//!
//! Everything works on explicit dense complex matrices (total dimension up to
//! a few dozen) and is organized so that each computed quantity can be checked
//! against an independent route:
//!
//! - [`linalg`] / [`state`] / [`random`]: Hermitian linear algebra, density
//!   matrices, classical-quantum states, seeded generators.
//! - [`divergence`]: Umegaki, sandwiched, Petz, log-Euclidean and max
//!   relative entropies, with explicit support-case handling.
//! - [`optimize`]: a mirror-descent engine over density matrices (full or
//!   block-diagonal), used by every minimization in the crate.
//! - [`entropic`]: conditional Renyi entropies and the four Renyi mutual
//!   informations defined by minimization, plus finite-block estimates of the
//!   regularized mutual information.
//! - [`exponent`]: exponent curves `sup_alpha (1-alpha)/alpha * payoff(alpha)`
//!   and their variational (hinge) duals.
//! - [`smoothing`]: the smoothing quantity of the max-relative entropy,
//!   exact in the commutative case, bracket-certified in the general case.
//! - [`types`]: exact finite-blocklength computations via the method of types.
//! - [`protocol`]: Monte Carlo simulators for privacy amplification and
//!   decoupling, plus the one-shot Haar decoupling inequality.
//! - [`suite`]: randomized verification suites over all module invariants.
//!
//! All logarithms are base 2; entropies and divergences are in bits.

pub mod divergence;
pub mod entropic;
pub mod error;
pub mod exponent;
pub mod linalg;
pub mod optimize;
pub mod protocol;
pub mod random;
pub mod smoothing;
pub mod state;
pub mod suite;
pub mod types;

pub use divergence::{divergence, DivergenceKind, DivergenceSpec, DivergenceValue, SupportCase};
pub use entropic::{conditional_entropy, mutual_information, EntropicValue, MiVariant};
pub use error::CoreError;
pub use exponent::{exponent_dec, exponent_dmax, exponent_pa, ExponentCurve, VariationalDual};

pub use linalg::CMatrix;
pub use optimize::OptimizerConfig;
pub use smoothing::{smooth_classical, smooth_quantum, SmoothingResult};

pub use state::{CqState, DensityMatrix, HermitianObservable, SpectralDecomposition};
