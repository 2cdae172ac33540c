//! Error-probability bounds for target detection with Gaussian-state
//! transmitters.
//!
//! The crate compares an entangled (two-mode squeezed vacuum) transmitter that
//! keeps its idler for a joint measurement against a coherent-state
//! transmitter, and against the perfect-measurement lower bound that covers
//! every classical-state transmitter. All error probabilities are carried as
//! natural logarithms so that very large mode counts do not underflow.
//!
//! Modules:
//!
//! - [`symplectic`]: symplectic form, Williamson diagonalization, covariance validation.
//! - [`states`]: scenario parameters and the Gaussian states under both hypotheses.
//! - [`bounds`]: Gaussian s-overlaps, quantum Chernoff/Bhattacharyya bounds, exponents.
//! - [`fock_oracle`]: truncated number-basis simulation used to cross-check the Gaussian path.
//! - [`cli`]: the `qi-bounds` command-line front end.
//!
//! Quadrature convention throughout: `q = (a + a†)/2`, `p = (a − a†)/2i`, so the
//! vacuum covariance is `¼·I` and a coherent amplitude `α` has mean `(Re α, Im α)`.

pub mod bounds;
pub mod cli;
mod error;
pub mod fock_oracle;
pub mod optimize;
pub mod states;
pub mod symplectic;

pub use bounds::{
    chernoff_bound, classical_perfect_measurement_lower, cs_closed_form, exponent_advantage, ln_q_s,
    BoundSet, ChernoffProfile, CsClosedForm, ExponentAdvantage, OverlapEvaluator,
};
pub use error::{Error, Result};
pub use states::{
    classicality_margin, scenario_states, tmsv_covariance, ClassicalityMargin, GaussianState, HypothesisPair,
    ScenarioParams, Transmitter,
};
pub use symplectic::{qi_h1_closed_form, symplectic_form, williamson, CovarianceMatrix, SymplecticDecomposition};
