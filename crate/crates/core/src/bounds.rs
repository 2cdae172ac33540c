//! s-overlaps of Gaussian states and the error-probability bounds built on them.
//!
//! For two `K`-mode Gaussian states the overlap `Q_s = tr(ρ₀ˢ ρ₁¹⁻ˢ)` has a
//! closed form in terms of their Williamson decompositions. In the
//! unit-vacuum convention (`V = 4·cov`, symplectic eigenvalues `α = 4ν`,
//! mean difference `δ = 2(μ₁ − μ₀)`):
//!
//! ```text
//! Q_s = 2^K ∏ G_s(α⁰_k) G_{1−s}(α¹_k) / √det Σ_s · exp(−½ δᵀ Σ_s⁻¹ δ)
//! G_p(x) = 2^p / [(x+1)^p − (x−1)^p]
//! Λ_p(x) = [(x+1)^p + (x−1)^p] / [(x+1)^p − (x−1)^p]
//! Σ_s    = S₀ Λ_s(α⁰) S₀ᵀ + S₁ Λ_{1−s}(α¹) S₁ᵀ
//! ```
//!
//! Everything is returned as natural logarithms; with `M` copies the Chernoff
//! bound is `½ Q_{s*}^M`, the Bhattacharyya bound `½ Q_{1/2}^M`, and the lower
//! bound `½(1 − √(1 − Q_{1/2}^{2M}))`.

use std::f64::consts::LN_2;

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::golden_section;
use crate::states::{scenario_states, GaussianState, HypothesisPair, ScenarioParams, Transmitter};
use crate::symplectic::williamson;

/// Largest condition number of `Σ_s` accepted before reporting a singular overlap.
pub const MAX_CONDITION: f64 = 1e12;
/// Bracket width at which the Chernoff search stops.
pub const S_TOLERANCE: f64 = 1e-9;
/// Contraction cap for the Chernoff search.
pub const MAX_ITERATIONS: usize = 200;

/// Offset used for `s ∈ {0, 1}` when the state raised to the zeroth power is
/// rank deficient (its support projector is not the identity).
const ENDPOINT_OFFSET: f64 = 1e-9;

/// `(ln G_p(x), Λ_p(x))` for `0 < p < 1`, written so that neither small `p`
/// nor `x → 1` cancels catastrophically.
fn power_terms(x: f64, p: f64) -> (f64, f64) {
    let x = x.max(1.0);
    // ratio = ((x−1)/(x+1))^p
    let ln_base = if x > 1.0 { -(2.0 / (x - 1.0)).ln_1p() } else { f64::NEG_INFINITY };
    let ratio = (p * ln_base).exp();
    let one_minus = -(p * ln_base).exp_m1();
    let ln_g = p * LN_2 - p * (x + 1.0).ln() - one_minus.ln();
    let lambda = (1.0 + ratio) / one_minus;
    (ln_g, lambda)
}

/// Precomputed Williamson data for repeated overlap evaluations on one pair.
#[derive(Debug, Clone)]
pub struct OverlapEvaluator {
    modes: usize,
    s0: DMatrix<f64>,
    alpha0: Vec<f64>,
    s1: DMatrix<f64>,
    alpha1: Vec<f64>,
    delta: DVector<f64>,
    same_covariance: bool,
}

impl OverlapEvaluator {
    pub fn new(rho0: &GaussianState, rho1: &GaussianState) -> Result<Self> {
        if rho0.dim_modes() != rho1.dim_modes() {
            return Err(Error::DimensionMismatch(rho0.dim_modes(), rho1.dim_modes()));
        }
        let d0 = williamson(rho0.cov())?;
        let d1 = williamson(rho1.cov())?;
        Ok(Self {
            modes: rho0.dim_modes(),
            s0: d0.s_matrix,
            alpha0: d0.spectrum.iter().map(|nu| 4.0 * nu).collect(),
            s1: d1.s_matrix,
            alpha1: d1.spectrum.iter().map(|nu| 4.0 * nu).collect(),
            delta: (rho1.mean() - rho0.mean()) * 2.0,
            same_covariance: rho0.cov() == rho1.cov(),
        })
    }

    pub fn for_pair(pair: &HypothesisPair) -> Result<Self> {
        Self::new(&pair.rho0, &pair.rho1)
    }

    /// `ln tr(ρ₀ˢ ρ₁¹⁻ˢ)`.
    pub fn ln_q(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::SOutOfRange(s));
        }
        let full_rank = |alpha: &[f64]| alpha.iter().all(|&a| a > 1.0 + 1e-12);
        let s = if s == 0.0 {
            if full_rank(&self.alpha0) {
                return Ok(0.0);
            }
            ENDPOINT_OFFSET
        } else if s == 1.0 {
            if full_rank(&self.alpha1) {
                return Ok(0.0);
            }
            1.0 - ENDPOINT_OFFSET
        } else {
            s
        };

        let mut ln_prefactor = self.modes as f64 * LN_2;
        let mut diag0 = Vec::with_capacity(2 * self.modes);
        let mut diag1 = Vec::with_capacity(2 * self.modes);
        for (&a0, &a1) in self.alpha0.iter().zip(&self.alpha1) {
            let (ln_g0, l0) = power_terms(a0, s);
            let (ln_g1, l1) = power_terms(a1, 1.0 - s);
            ln_prefactor += ln_g0 + ln_g1;
            diag0.extend([l0, l0]);
            diag1.extend([l1, l1]);
        }

        let sigma = &self.s0 * DMatrix::from_diagonal(&diag0.into()) * self.s0.transpose()
            + &self.s1 * DMatrix::from_diagonal(&diag1.into()) * self.s1.transpose();
        let sigma = (&sigma + sigma.transpose()) * 0.5;

        let eig = sigma.clone().symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            return Err(Error::SingularOverlap(condition));
        }
        let chol = sigma
            .cholesky()
            .ok_or(Error::SingularOverlap(condition))?;
        let ln_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let quad = self.delta.dot(&chol.solve(&self.delta));

        // Identical covariances make the Gaussian prefactor exactly one (the
        // overlap reduces to tr ρ); skipping it keeps tiny exponents exact.
        let ln_cov_part = if self.same_covariance {
            0.0
        } else {
            ln_prefactor - 0.5 * ln_det
        };
        Ok((ln_cov_part - 0.5 * quad).min(0.0))
    }
}

/// `ln Q_s` for a pair of Gaussian states.
pub fn ln_q_s(rho0: &GaussianState, rho1: &GaussianState, s: f64) -> Result<f64> {
    OverlapEvaluator::new(rho0, rho1)?.ln_q(s)
}

/// Natural-log error-probability bounds for `M` copies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSet {
    pub ln_upper_chernoff: f64,
    pub ln_upper_bhattacharyya: f64,
    pub ln_lower: f64,
    pub s_star: f64,
    /// `−ln Q_{s*}`.
    pub exponent_per_mode: f64,
}

/// `ln[½(1 − √(1 − x))]` with `x = Q_{1/2}^{2M}`, via `1 − √(1−x) = x/(1 + √(1−x))`.
pub fn ln_lower_bound(ln_q_half: f64, m: u64) -> f64 {
    let ln_x = 2.0 * m as f64 * ln_q_half;
    let root = (-ln_x.exp_m1()).max(0.0).sqrt();
    ln_x - root.ln_1p() - LN_2
}

/// Per-mode overlaps that determine every bound, independent of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffProfile {
    pub s_star: f64,
    pub ln_q_star: f64,
    pub ln_q_half: f64,
}

impl ChernoffProfile {
    pub fn bounds(&self, m: u64) -> BoundSet {
        let m_f = m as f64;
        BoundSet {
            ln_upper_chernoff: m_f * self.ln_q_star - LN_2,
            ln_upper_bhattacharyya: m_f * self.ln_q_half - LN_2,
            ln_lower: ln_lower_bound(self.ln_q_half, m),
            s_star: self.s_star,
            exponent_per_mode: -self.ln_q_star,
        }
    }

    /// `−ln Q_{1/2}`.
    pub fn bhattacharyya_exponent(&self) -> f64 {
        -self.ln_q_half
    }
}

/// Minimizes `ln Q_s` over `[0, 1]` by golden-section search.
pub fn chernoff_profile(pair: &HypothesisPair) -> Result<ChernoffProfile> {
    let eval = OverlapEvaluator::for_pair(pair)?;
    let ln_q_half = eval.ln_q(0.5)?;
    let min = golden_section(|s| eval.ln_q(s), 0.0, 1.0, S_TOLERANCE, MAX_ITERATIONS)?;
    debug!(
        "chernoff search for {:?}: s* = {}, ln Q = {:e} after {} iterations",
        pair.transmitter, min.x, min.value, min.iterations
    );
    let (s_star, ln_q_star) = if min.value <= ln_q_half {
        (min.x, min.value)
    } else {
        (0.5, ln_q_half)
    };
    Ok(ChernoffProfile {
        s_star,
        ln_q_star,
        ln_q_half,
    })
}

/// Chernoff, Bhattacharyya and lower bounds for `m` copies of `pair`.
pub fn chernoff_bound(pair: &HypothesisPair, m: u64) -> Result<BoundSet> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be ≥ 1".into()));
    }
    Ok(chernoff_profile(pair)?.bounds(m))
}

/// Per-mode coherent-state exponent `κN_S(√(N_B+1) − √N_B)²`.
pub fn cs_exponent(params: &ScenarioParams) -> f64 {
    let n_b = params.n_b();
    let root_sum = (n_b + 1.0).sqrt() + n_b.sqrt();
    params.kappa() * params.n_s() / (root_sum * root_sum)
}

/// Exact coherent-state bounds plus their bright-background approximations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CsClosedForm {
    pub bounds: BoundSet,
    /// `ln[exp(−MκN_S/4N_B)/2]`.
    pub ln_upper_asymptotic: f64,
    /// `ln[exp(−MκN_S/2N_B)/4]`.
    pub ln_lower_asymptotic: f64,
}

pub fn cs_closed_form(params: &ScenarioParams) -> CsClosedForm {
    let m = params.m();
    let profile = ChernoffProfile {
        s_star: 0.5,
        ln_q_star: -cs_exponent(params),
        ln_q_half: -cs_exponent(params),
    };
    let snr = m as f64 * params.kappa() * params.n_s() / params.n_b();
    CsClosedForm {
        bounds: profile.bounds(m),
        ln_upper_asymptotic: -snr / 4.0 - LN_2,
        ln_lower_asymptotic: -snr / 2.0 - 2.0 * LN_2,
    }
}

/// Perfect-measurement lower bound on the error probability of any
/// classical-state transmitter with `M·N_S` total mean signal photons.
///
/// Granting the receiver the transmitted coherent amplitudes turns any
/// proper-P transmitter into a mixture of coherent-state transmitters, so the
/// coherent-state lower bound applies to all of them.
pub fn classical_perfect_measurement_lower(params: &ScenarioParams) -> f64 {
    ln_lower_bound(-cs_exponent(params), params.m())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentAdvantage {
    /// Bhattacharyya exponent of the entangled transmitter.
    pub qi_exponent: f64,
    /// Chernoff exponent of the coherent-state transmitter.
    pub cs_exponent: f64,
    pub ratio: f64,
    pub ratio_db: f64,
}

pub fn exponent_advantage(params: &ScenarioParams) -> Result<ExponentAdvantage> {
    let pair = scenario_states(params, Transmitter::QuantumIllumination)?;
    let qi_exponent = -OverlapEvaluator::for_pair(&pair)?.ln_q(0.5)?;
    let cs_exponent = cs_exponent(params);
    let ratio = qi_exponent / cs_exponent;
    Ok(ExponentAdvantage {
        qi_exponent,
        cs_exponent,
        ratio,
        ratio_db: 10.0 * ratio.log10(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::CovarianceMatrix;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(n_s: f64, n_b: f64, kappa: f64) -> ScenarioParams {
        ScenarioParams::new(n_s, n_b, kappa, 1).unwrap()
    }

    #[test]
    fn power_terms_match_direct_formula() {
        for &(x, p) in &[(3.0, 0.3), (41.0, 0.5), (1.02, 0.7), (2.5, 0.01)] {
            let (ln_g, lambda) = power_terms(x, p);
            let plus = (x + 1.0f64).powf(p);
            let minus = (x - 1.0f64).powf(p);
            assert_relative_eq!(ln_g, (2f64.powf(p) / (plus - minus)).ln(), max_relative = 1e-10);
            assert_relative_eq!(lambda, (plus + minus) / (plus - minus), max_relative = 1e-10);
        }
        assert_eq!(power_terms(1.0, 0.4), (0.0, 1.0));
    }

    #[test]
    fn identical_states_have_unit_overlap() {
        let rho = GaussianState::zero_mean(crate::states::tmsv_covariance(0.3).unwrap());
        let thermal = GaussianState::zero_mean(CovarianceMatrix::new(DMatrix::identity(2, 2) * 1.3).unwrap());
        for s in [0.1, 0.5, 0.9] {
            assert_eq!(ln_q_s(&thermal, &thermal, s).unwrap(), 0.0);
            assert_eq!(ln_q_s(&rho, &rho, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn coherent_bhattacharyya_matches_closed_form() {
        let p = params(0.01, 20.0, 0.01);
        let pair = scenario_states(&p, Transmitter::CoherentState).unwrap();
        let ln_q = ln_q_s(&pair.rho0, &pair.rho1, 0.5).unwrap();
        assert_relative_eq!(-ln_q, cs_exponent(&p), max_relative = 1e-12);
        assert_abs_diff_eq!(cs_exponent(&p), 1.2196937e-6, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_s_and_mismatched_modes() {
        let p = params(0.1, 1.0, 0.2);
        let qi = scenario_states(&p, Transmitter::QuantumIllumination).unwrap();
        let cs = scenario_states(&p, Transmitter::CoherentState).unwrap();
        assert!(matches!(ln_q_s(&qi.rho0, &qi.rho1, 1.5), Err(Error::SOutOfRange(_))));
        assert!(matches!(ln_q_s(&qi.rho0, &qi.rho1, f64::NAN), Err(Error::SOutOfRange(_))));
        assert!(matches!(ln_q_s(&qi.rho0, &cs.rho1, 0.5), Err(Error::DimensionMismatch(2, 1))));
    }

    #[test]
    fn endpoints_are_trace_one_for_full_rank_states() {
        let p = params(0.01, 20.0, 0.01);
        let qi = scenario_states(&p, Transmitter::QuantumIllumination).unwrap();
        assert_eq!(ln_q_s(&qi.rho0, &qi.rho1, 0.0).unwrap(), 0.0);
        assert_eq!(ln_q_s(&qi.rho0, &qi.rho1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn rank_deficient_endpoint_is_the_one_sided_limit() {
        // N_B = 0 leaves the H0 return mode in vacuum.
        let p = params(0.1, 0.0, 0.3);
        let qi = scenario_states(&p, Transmitter::QuantumIllumination).unwrap();
        let at_zero = ln_q_s(&qi.rho0, &qi.rho1, 0.0).unwrap();
        let near_zero = ln_q_s(&qi.rho0, &qi.rho1, 1e-6).unwrap();
        assert!(at_zero < 0.0);
        assert!((at_zero - near_zero).abs() < 1e-4);
    }

    #[test]
    fn identical_pair_bounds_are_one_half() {
        let cov = CovarianceMatrix::new(DMatrix::identity(2, 2)).unwrap();
        let pair = HypothesisPair {
            rho0: GaussianState::zero_mean(cov.clone()),
            rho1: GaussianState::zero_mean(cov),
            transmitter: Transmitter::CoherentState,
        };
        let b = chernoff_bound(&pair, 7).unwrap();
        for v in [b.ln_upper_chernoff, b.ln_upper_bhattacharyya, b.ln_lower] {
            assert_abs_diff_eq!(v, -LN_2, epsilon = 1e-15);
        }
        assert_eq!(b.exponent_per_mode, 0.0);
    }

    #[test]
    fn zero_modes_is_rejected() {
        let pair = scenario_states(&params(0.1, 1.0, 0.1), Transmitter::CoherentState).unwrap();
        assert!(chernoff_bound(&pair, 0).is_err());
    }

    #[test]
    fn lower_bound_small_and_large_overlap_regimes() {
        // x = Q^{2M} tiny: 1 − √(1−x) ≈ x/2, so ln_lower ≈ ln x − 2 ln 2.
        let ln_q = -0.01;
        let m = 10_000;
        assert_relative_eq!(ln_lower_bound(ln_q, m), -200.0 - 2.0 * LN_2, max_relative = 1e-12);
        // Direct evaluation where no cancellation occurs.
        let x: f64 = (2.0 * 3.0 * -0.2f64).exp();
        let direct = (0.5 * (1.0 - (1.0 - x).sqrt())).ln();
        assert_relative_eq!(ln_lower_bound(-0.2, 3), direct, max_relative = 1e-12);
    }

    #[test]
    fn cs_closed_form_asymptotics() {
        let c = cs_closed_form(&params(0.01, 20.0, 0.01));
        assert_relative_eq!(c.bounds.exponent_per_mode, 1.2196937e-6, max_relative = 1e-7);
        let approx_exponent = -(c.ln_upper_asymptotic + LN_2);
        assert_relative_eq!(approx_exponent, 1.25e-6, max_relative = 1e-12);
        assert!((approx_exponent / c.bounds.exponent_per_mode - 1.0).abs() < 0.025);
        assert_eq!(c.bounds.ln_upper_chernoff, c.bounds.ln_upper_bhattacharyya);
    }

    #[test]
    fn classical_lower_equals_cs_lower() {
        for (n_s, n_b, kappa, m) in [(0.01, 20.0, 0.01, 1), (0.3, 0.5, 0.2, 40), (1e-3, 50.0, 0.9, 1_000_000)] {
            let p = ScenarioParams::new(n_s, n_b, kappa, m).unwrap();
            assert_eq!(classical_perfect_measurement_lower(&p), cs_closed_form(&p).bounds.ln_lower);
        }
        let p = params(0.01, 20.0, 0.01);
        assert!(classical_perfect_measurement_lower(&p) <= -LN_2);
    }

    #[test]
    fn classical_lower_approaches_bright_background_form() {
        // MκN_S/2N_B = 50.
        let p = ScenarioParams::new(0.01, 20.0, 0.01, 20_000_000).unwrap();
        let c = cs_closed_form(&p);
        let exact = classical_perfect_measurement_lower(&p);
        let two_m_eps = 2.0 * 20_000_000.0 * cs_exponent(&p);
        assert_relative_eq!(exact, -two_m_eps - 2.0 * LN_2, max_relative = 1e-9);
        // The remaining gap is the N_B ≫ 1 approximation of the exponent itself.
        assert!((exact / c.ln_lower_asymptotic - 1.0).abs() < 0.03);
    }
}
