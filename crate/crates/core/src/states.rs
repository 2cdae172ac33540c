//! Gaussian states of the detection scenario.
//!
//! The signal/idler pair is a two-mode squeezed vacuum with `N_S` mean photons
//! per mode. Under H0 the return mode is pure background with `N_B` mean
//! photons; under H1 it is `√κ·a_S + √(1−κ)·a_B` with the bath brightened to
//! `N_B/(1−κ)` so the received background is `N_B` either way.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::CovarianceMatrix;

/// Physical knobs of one detection problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    n_s: f64,
    n_b: f64,
    kappa: f64,
    m: u64,
}

impl ScenarioParams {
    pub fn new(n_s: f64, n_b: f64, kappa: f64, m: u64) -> Result<Self> {
        if !(n_s > 0.0 && n_s.is_finite()) {
            return Err(Error::InvalidParameter(format!("n_s must be > 0, got {n_s}")));
        }
        if !(n_b >= 0.0 && n_b.is_finite()) {
            return Err(Error::InvalidParameter(format!("n_b must be >= 0, got {n_b}")));
        }
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::InvalidParameter(format!("kappa must lie in (0, 1), got {kappa}")));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("M must be ≥ 1".into()));
        }
        Ok(Self { n_s, n_b, kappa, m })
    }

    /// Mean signal photons per mode.
    pub fn n_s(&self) -> f64 {
        self.n_s
    }

    /// Mean received background photons per mode.
    pub fn n_b(&self) -> f64 {
        self.n_b
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Number of transmitted mode pairs.
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn with_modes(self, m: u64) -> Result<Self> {
        Self::new(self.n_s, self.n_b, self.kappa, m)
    }

    /// Bath brightness injected under H1, `N_B/(1−κ)`.
    pub fn h1_bath_mean(&self) -> f64 {
        self.n_b / (1.0 - self.kappa)
    }

    /// `S = 2N_S + 1`.
    pub fn signal_variance(&self) -> f64 {
        2.0 * self.n_s + 1.0
    }

    /// `B = 2N_B + 1`.
    pub fn background_variance(&self) -> f64 {
        2.0 * self.n_b + 1.0
    }

    /// `A = 2κN_S + B`.
    pub fn return_variance(&self) -> f64 {
        2.0 * self.kappa * self.n_s + self.background_variance()
    }

    /// `C_q = 2√(N_S(N_S+1))`.
    pub fn quantum_correlation(&self) -> f64 {
        quantum_correlation(self.n_s)
    }
}

fn quantum_correlation(n_s: f64) -> f64 {
    2.0 * (n_s * (n_s + 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transmitter {
    QuantumIllumination,
    CoherentState,
}

impl Transmitter {
    pub fn label(&self) -> &'static str {
        match self {
            Transmitter::QuantumIllumination => "qi",
            Transmitter::CoherentState => "cs",
        }
    }
}

/// Mean vector plus covariance of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: CovarianceMatrix,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: CovarianceMatrix) -> Result<Self> {
        if mean.len() != 2 * cov.dim_modes() {
            return Err(Error::DimensionMismatch(mean.len(), 2 * cov.dim_modes()));
        }
        Ok(Self { mean, cov })
    }

    pub fn zero_mean(cov: CovarianceMatrix) -> Self {
        Self {
            mean: DVector::zeros(2 * cov.dim_modes()),
            cov,
        }
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &CovarianceMatrix {
        &self.cov
    }

    pub fn dim_modes(&self) -> usize {
        self.cov.dim_modes()
    }
}

/// The two conditional states a receiver has to tell apart.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisPair {
    /// Target absent.
    pub rho0: GaussianState,
    /// Target present.
    pub rho1: GaussianState,
    pub transmitter: Transmitter,
}

/// Covariance of the two-mode squeezed vacuum, modes ordered (signal, idler).
pub fn tmsv_covariance(n_s: f64) -> Result<CovarianceMatrix> {
    if !(n_s > 0.0 && n_s.is_finite()) {
        return Err(Error::InvalidParameter(format!("n_s must be > 0, got {n_s}")));
    }
    let s = 2.0 * n_s + 1.0;
    CovarianceMatrix::new(correlated_pair(s, s, quantum_correlation(n_s)))
}

/// `¼·[[a,0,c,0],[0,a,0,−c],[c,0,b,0],[0,−c,0,b]]`.
fn correlated_pair(a: f64, b: f64, c: f64) -> DMatrix<f64> {
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        a,   0.0, c,   0.0,
        0.0, a,   0.0, -c,
        c,   0.0, b,   0.0,
        0.0, -c,  0.0, b,
    ]);
    m * 0.25
}

/// Return/idler covariance under H0.
pub fn qi_h0_covariance(params: &ScenarioParams) -> Result<CovarianceMatrix> {
    CovarianceMatrix::new(correlated_pair(
        params.background_variance(),
        params.signal_variance(),
        0.0,
    ))
}

/// Return/idler covariance under H1.
pub fn qi_h1_covariance(params: &ScenarioParams) -> Result<CovarianceMatrix> {
    CovarianceMatrix::new(correlated_pair(
        params.return_variance(),
        params.signal_variance(),
        params.kappa().sqrt() * params.quantum_correlation(),
    ))
}

/// Conditional states for the chosen transmitter.
///
/// Quantum illumination yields zero-mean two-mode (return, idler) states; the
/// coherent-state transmitter yields single-mode thermal states of covariance
/// `B/4·I`, displaced by `√(κN_S)` along q when the target is present.
pub fn scenario_states(params: &ScenarioParams, transmitter: Transmitter) -> Result<HypothesisPair> {
    let (rho0, rho1) = match transmitter {
        Transmitter::QuantumIllumination => (
            GaussianState::zero_mean(qi_h0_covariance(params)?),
            GaussianState::zero_mean(qi_h1_covariance(params)?),
        ),
        Transmitter::CoherentState => {
            let b = params.background_variance();
            let cov = CovarianceMatrix::new(DMatrix::identity(2, 2) * (b / 4.0))?;
            let amplitude = (params.kappa() * params.n_s()).sqrt();
            (
                GaussianState::zero_mean(cov.clone()),
                GaussianState::new(DVector::from_vec(vec![amplitude, 0.0]), cov)?,
            )
        }
    };
    Ok(HypothesisPair {
        rho0,
        rho1,
        transmitter,
    })
}

/// Cross-correlation headroom relative to the classical (proper-P) limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalityMargin {
    /// `C_q − 2N_S`; positive means the transmitted pair is entangled.
    pub input_margin: f64,
    /// `√κ·C_q − 2√(N_S(κN_S + N_B))`; positive means the H1 return/idler pair
    /// is entangled, which happens iff `N_B < κ`.
    pub output_margin: f64,
}

pub fn classicality_margin(params: &ScenarioParams) -> ClassicalityMargin {
    let n_s = params.n_s();
    let cq = params.quantum_correlation();
    ClassicalityMargin {
        input_margin: cq - 2.0 * n_s,
        output_margin: params.kappa().sqrt() * cq
            - 2.0 * (n_s * (params.kappa() * n_s + params.n_b())).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig1() -> ScenarioParams {
        ScenarioParams::new(0.01, 20.0, 0.01, 1).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ScenarioParams::new(0.0, 1.0, 0.1, 1).is_err());
        assert!(ScenarioParams::new(0.1, -0.1, 0.1, 1).is_err());
        assert!(ScenarioParams::new(0.1, 1.0, 0.0, 1).is_err());
        assert!(ScenarioParams::new(0.1, 1.0, 1.0, 1).is_err());
        assert!(ScenarioParams::new(f64::NAN, 1.0, 0.5, 1).is_err());
        let err = ScenarioParams::new(0.1, 1.0, 0.5, 0).unwrap_err();
        assert!(err.to_string().contains("M must be ≥ 1"));
        assert!(ScenarioParams::new(0.1, 0.0, 0.5, 1).is_ok());
    }

    #[test]
    fn tmsv_entries() {
        let cov = tmsv_covariance(0.01).unwrap();
        let m = cov.as_matrix();
        let cq = 2.0 * (0.01f64 * 1.01).sqrt();
        assert_abs_diff_eq!(cq, 0.2009975, epsilon = 1e-7);
        for i in 0..4 {
            assert_abs_diff_eq!(m[(i, i)], 0.255, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(m[(0, 2)], cq / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 3)], -cq / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn tmsv_rejects_non_positive_brightness() {
        assert!(tmsv_covariance(0.0).is_err());
        assert!(tmsv_covariance(-1.0).is_err());
    }

    #[test]
    fn tmsv_dim_limit_is_vacuum() {
        let cov = tmsv_covariance(1e-14).unwrap();
        assert!((cov.as_matrix() - DMatrix::identity(4, 4) * 0.25).amax() < 1e-6);
    }

    #[test]
    fn fig1_h1_entries() {
        let pair = scenario_states(&fig1(), Transmitter::QuantumIllumination).unwrap();
        let m = pair.rho1.cov().as_matrix();
        assert_abs_diff_eq!(m[(0, 0)], 41.0002 / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(2, 2)], 0.255, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(0, 2)], 0.00502494, epsilon = 1e-8);
        assert_abs_diff_eq!(m[(1, 3)], -0.00502494, epsilon = 1e-8);
        assert_eq!(pair.rho0.mean().amax(), 0.0);
        assert_eq!(pair.rho1.mean().amax(), 0.0);
    }

    #[test]
    fn coherent_state_means() {
        let pair = scenario_states(&fig1(), Transmitter::CoherentState).unwrap();
        assert_eq!(pair.rho0.mean().as_slice(), &[0.0, 0.0]);
        assert_abs_diff_eq!(pair.rho1.mean()[0], 0.01, epsilon = 1e-15);
        assert_eq!(pair.rho1.mean()[1], 0.0);
        assert_eq!(pair.rho0.cov(), pair.rho1.cov());
        assert_abs_diff_eq!(pair.rho0.cov().as_matrix()[(0, 0)], 41.0 / 4.0);
    }

    #[test]
    fn lossless_noiseless_channel_returns_the_signal() {
        let p = ScenarioParams::new(0.3, 0.0, 1.0 - 1e-12, 1).unwrap();
        let h1 = qi_h1_covariance(&p).unwrap();
        let tmsv = tmsv_covariance(0.3).unwrap();
        assert!((h1.as_matrix() - tmsv.as_matrix()).amax() < 1e-5);
    }

    #[test]
    fn h1_reduces_to_h0_without_reflection() {
        let p = ScenarioParams::new(0.2, 3.0, 1e-15, 1).unwrap();
        let diff = qi_h1_covariance(&p).unwrap().into_inner() - qi_h0_covariance(&p).unwrap().into_inner();
        assert!(diff.amax() < 1e-7);
    }

    #[test]
    fn margins_at_fig1_point() {
        let m = classicality_margin(&fig1());
        assert_abs_diff_eq!(m.input_margin, 0.1809975, epsilon = 1e-7);
        let expected = 0.1 * 0.2009975 - 2.0 * (0.01f64 * (1e-4 + 20.0)).sqrt();
        assert_abs_diff_eq!(m.output_margin, expected, epsilon = 1e-7);
        assert!(m.output_margin < 0.0);
    }

    #[test]
    fn margin_vanishes_at_threshold() {
        for n_s in [1e-3, 0.01, 0.5, 3.0] {
            let p = ScenarioParams::new(n_s, 0.2, 0.2, 1).unwrap();
            assert!(classicality_margin(&p).output_margin.abs() < 1e-15);
        }
    }

    #[test]
    fn low_noise_output_is_entangled() {
        let p = ScenarioParams::new(0.01, 0.0, 0.5, 1).unwrap();
        assert!(classicality_margin(&p).output_margin > 0.0);
    }

    #[test]
    fn quantum_correlation_dominates_classical_at_low_brightness() {
        let cq = quantum_correlation(1e-3);
        assert!(cq / (2.0 * 1e-3) > 10.0);
    }
}
