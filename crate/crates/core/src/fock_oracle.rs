//! Brute-force number-basis simulation of the detection scenario.
//!
//! This path shares no code with the Gaussian formulas: it builds the
//! two-mode squeezed vacuum as a ket, pushes the signal through a truncated
//! beamsplitter with a thermal bath, and evaluates Helstrom errors and
//! s-overlaps by dense Hermitian eigendecomposition. It is only feasible for
//! dim backgrounds, so requests with `N_B > 2` are refused.

use log::debug;
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::states::ScenarioParams;

pub type C64 = Complex<f64>;

/// Bose-Einstein tail mass targeted when cutoffs are chosen automatically.
pub const DEFAULT_TAIL: f64 = 1e-8;
/// Largest truncation deficit accepted for the squeezed-vacuum input.
pub const TMSV_THRESHOLD: f64 = 1e-9;
/// Largest truncation deficit accepted after the target channel.
pub const CHANNEL_THRESHOLD: f64 = 1e-6;
/// Background brightness above which the oracle refuses to run.
pub const MAX_ORACLE_NB: f64 = 2.0;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Hypothesis selector for [`apply_target_channel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Truncated number-basis density matrix over one or more modes.
///
/// Basis index is row-major in the mode order: mode 0 is the most significant
/// digit.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    cutoffs: Vec<usize>,
    matrix: DMatrix<C64>,
    truncation_deficit: f64,
}

impl FockDensityMatrix {
    /// Wraps a matrix, renormalizing it to unit trace. `prior_deficit` is the
    /// probability mass already lost before `matrix` was formed.
    fn normalized(cutoffs: Vec<usize>, mut matrix: DMatrix<C64>, prior_deficit: f64) -> Result<Self> {
        let trace = matrix.trace().re;
        if !(trace > 0.0) {
            return Err(Error::Numerical(format!("density matrix has trace {trace}")));
        }
        matrix /= C64::from(trace);
        Ok(Self {
            cutoffs,
            matrix,
            truncation_deficit: 1.0 - (1.0 - prior_deficit) * trace,
        })
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `1 − trace` before renormalization, accumulated over every truncation.
    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        hermitian_part(&self.matrix).symmetric_eigenvalues()
    }

    /// Reduced state of a single mode.
    pub fn marginal(&self, mode: usize) -> FockDensityMatrix {
        let c = self.cutoffs[mode];
        let inner: usize = self.cutoffs[mode + 1..].iter().product();
        let outer: usize = self.cutoffs[..mode].iter().product();
        let mut out = DMatrix::from_element(c, c, ZERO);
        for o in 0..outer {
            for i in 0..inner {
                for a in 0..c {
                    let row = (o * c + a) * inner + i;
                    for b in 0..c {
                        out[(a, b)] += self.matrix[(row, (o * c + b) * inner + i)];
                    }
                }
            }
        }
        FockDensityMatrix {
            cutoffs: vec![c],
            matrix: out,
            truncation_deficit: self.truncation_deficit,
        }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &FockDensityMatrix) -> FockDensityMatrix {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        FockDensityMatrix {
            cutoffs,
            matrix: self.matrix.kronecker(&other.matrix),
            truncation_deficit: 1.0 - (1.0 - self.truncation_deficit) * (1.0 - other.truncation_deficit),
        }
    }

    /// First and second quadrature moments in the `q = (a+a†)/2` convention:
    /// mean vector `(⟨q₁⟩, ⟨p₁⟩, …)` and symmetrized covariance.
    pub fn quadrature_moments(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.cutoffs.len();
        let half = C64::new(0.5, 0.0);
        let minus_half_i = C64::new(0.0, -0.5);
        let quads: Vec<DMatrix<C64>> = (0..n)
            .flat_map(|k| {
                let a = self.annihilation(k);
                let ad = a.adjoint();
                [(&a + &ad) * half, (&a - &ad) * minus_half_i]
            })
            .collect();

        let expect = |op: &DMatrix<C64>| -> f64 { (&self.matrix * op).trace().re };
        let mean = DVector::from_iterator(2 * n, quads.iter().map(expect));
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            for j in i..2 * n {
                let sym = (&quads[i] * &quads[j] + &quads[j] * &quads[i]) * half;
                let v = expect(&sym) - mean[i] * mean[j];
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        (mean, cov)
    }

    /// Truncated annihilation operator of `mode` on the full space.
    fn annihilation(&self, mode: usize) -> DMatrix<C64> {
        let c = self.cutoffs[mode];
        let single = DMatrix::from_fn(c, c, |r, col| {
            if col == r + 1 {
                C64::from((col as f64).sqrt())
            } else {
                ZERO
            }
        });
        let outer: usize = self.cutoffs[..mode].iter().product();
        let inner: usize = self.cutoffs[mode + 1..].iter().product();
        DMatrix::<C64>::identity(outer, outer)
            .kronecker(&single)
            .kronecker(&DMatrix::<C64>::identity(inner, inner))
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::from(0.5)
}

/// Bose-Einstein probabilities `n^k/(n+1)^{k+1}` for `k < cutoff`, unnormalized.
pub fn bose_einstein_probs(mean: f64, cutoff: usize) -> Vec<f64> {
    let ratio = mean / (mean + 1.0);
    let mut p = 1.0 / (mean + 1.0);
    (0..cutoff)
        .map(|_| {
            let cur = p;
            p *= ratio;
            cur
        })
        .collect()
}

/// Smallest cutoff whose Bose-Einstein tail mass `(n/(n+1))^cutoff` is at most `tail`.
pub fn bose_einstein_cutoff(mean: f64, tail: f64) -> usize {
    if mean <= 0.0 {
        return 1;
    }
    let ln_ratio = (mean / (mean + 1.0)).ln();
    ((tail.ln() / ln_ratio).ceil() as usize).max(1)
}

/// Single-mode thermal state truncated at `cutoff`.
pub fn thermal_fock(mean: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    if !(mean >= 0.0 && mean.is_finite()) || cutoff == 0 {
        return Err(Error::InvalidParameter(format!(
            "thermal state needs mean >= 0 and cutoff >= 1, got {mean}, {cutoff}"
        )));
    }
    let probs = bose_einstein_probs(mean, cutoff);
    let diag = DVector::from_iterator(cutoff, probs.iter().map(|&p| C64::from(p)));
    FockDensityMatrix::normalized(vec![cutoff], DMatrix::from_diagonal(&diag), 0.0)
}

/// Two-mode squeezed vacuum `Σ √(N_S^n/(N_S+1)^{n+1}) |n⟩|n⟩`, truncated at
/// `cutoff` photons per mode, with the default deficit threshold.
pub fn build_tmsv_fock(n_s: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    build_tmsv_fock_with_threshold(n_s, cutoff, TMSV_THRESHOLD)
}

pub fn build_tmsv_fock_with_threshold(n_s: f64, cutoff: usize, threshold: f64) -> Result<FockDensityMatrix> {
    if !(n_s > 0.0 && n_s.is_finite()) {
        return Err(Error::InvalidParameter(format!("n_s must be > 0, got {n_s}")));
    }
    if cutoff < 2 {
        return Err(Error::InvalidParameter(format!("cutoff must be >= 2, got {cutoff}")));
    }
    let probs = bose_einstein_probs(n_s, cutoff);
    let kept: f64 = probs.iter().sum();
    let deficit = 1.0 - kept;
    if deficit > threshold {
        return Err(Error::Truncation { deficit, threshold });
    }
    let mut psi = DVector::from_element(cutoff * cutoff, ZERO);
    for (n, p) in probs.iter().enumerate() {
        psi[n * cutoff + n] = C64::from(p.sqrt());
    }
    let rho = &psi * psi.adjoint();
    FockDensityMatrix::normalized(vec![cutoff, cutoff], rho, 0.0)
}

/// Beamsplitter `exp(θ(a_S†a_B − a_S a_B†))` restricted to total photon
/// number `total`, in the basis `|m, total−m⟩`, `m = 0..=total`.
fn beamsplitter_block(theta: f64, total: usize) -> DMatrix<f64> {
    let dim = total + 1;
    let mut generator = DMatrix::zeros(dim, dim);
    for m in 0..total {
        let amp = (((m + 1) * (total - m)) as f64).sqrt();
        generator[(m + 1, m)] = amp;
        generator[(m, m + 1)] = -amp;
    }
    (generator * theta).exp()
}

/// Sends the signal mode of a (signal, idler) state to the target region.
///
/// Under H0 the return is background alone, `thermal(N_B) ⊗ ρ_I`. Under H1 a
/// bath mode of mean `N_B/(1−κ)` truncated at `bath_cutoff` is mixed in on a
/// beamsplitter with `cos θ = √κ` and the leak port is traced out. The return
/// mode keeps `signal_cutoff + bath_cutoff − 1` levels under both hypotheses,
/// enough to hold every photon-number sector the truncated inputs populate,
/// so the beamsplitter itself introduces no truncation error.
pub fn apply_target_channel(
    input: &FockDensityMatrix,
    params: &ScenarioParams,
    hypothesis: Hypothesis,
    bath_cutoff: usize,
) -> Result<FockDensityMatrix> {
    apply_target_channel_with_threshold(input, params, hypothesis, bath_cutoff, CHANNEL_THRESHOLD)
}

pub fn apply_target_channel_with_threshold(
    input: &FockDensityMatrix,
    params: &ScenarioParams,
    hypothesis: Hypothesis,
    bath_cutoff: usize,
    threshold: f64,
) -> Result<FockDensityMatrix> {
    check_feasible(params)?;
    if input.cutoffs.len() != 2 {
        return Err(Error::DimensionMismatch(input.cutoffs.len(), 2));
    }
    if bath_cutoff == 0 {
        return Err(Error::InvalidParameter("bath cutoff must be >= 1".into()));
    }
    let (cs, ci) = (input.cutoffs[0], input.cutoffs[1]);
    let cr = cs + bath_cutoff - 1;

    let output = match hypothesis {
        Hypothesis::H0 => thermal_fock(params.n_b(), cr)?.tensor(&input.marginal(1)),
        Hypothesis::H1 => {
            let bath = bose_einstein_probs(params.h1_bath_mean(), bath_cutoff);
            let theta = params.kappa().sqrt().acos();
            let blocks: Vec<DMatrix<f64>> = (0..cs + bath_cutoff - 1)
                .map(|total| beamsplitter_block(theta, total))
                .collect();

            let rho = &input.matrix;
            let mut out = DMatrix::from_element(cr * ci, cr * ci, ZERO);
            let mut kraus: Vec<(usize, usize, f64)> = Vec::with_capacity(cs);
            for (k, &pk) in bath.iter().enumerate() {
                // Kraus operator for bath |k⟩ → leak |j⟩ maps |n⟩ to |n + k − j⟩.
                for j in 0..cs + k {
                    kraus.clear();
                    for n in 0..cs {
                        let total = n + k;
                        if total < j {
                            continue;
                        }
                        let m = total - j;
                        let amp = blocks[total][(m, n)];
                        if amp != 0.0 {
                            kraus.push((n, m, amp));
                        }
                    }
                    for &(n, m, a) in &kraus {
                        for &(n2, m2, a2) in &kraus {
                            let w = pk * a * a2;
                            for i in 0..ci {
                                for i2 in 0..ci {
                                    out[(m * ci + i, m2 * ci + i2)] += rho[(n * ci + i, n2 * ci + i2)] * w;
                                }
                            }
                        }
                    }
                }
            }
            FockDensityMatrix::normalized(vec![cr, ci], out, input.truncation_deficit)?
        }
    };
    debug!(
        "target channel {:?}: cutoffs {:?}, deficit {:e}",
        hypothesis, output.cutoffs, output.truncation_deficit
    );
    if output.truncation_deficit > threshold {
        return Err(Error::Truncation {
            deficit: output.truncation_deficit,
            threshold,
        });
    }
    Ok(output)
}

fn check_feasible(params: &ScenarioParams) -> Result<()> {
    if params.n_b() > MAX_ORACLE_NB {
        return Err(Error::Infeasible(format!(
            "n_b = {} exceeds {MAX_ORACLE_NB}; the truncated Fock space would be too large, \
             bright backgrounds are covered by the Gaussian formulas only",
            params.n_b()
        )));
    }
    Ok(())
}

/// Conditional (return, idler) states for the entangled transmitter, with
/// cutoffs chosen so every Bose-Einstein tail is below `tail`.
pub fn qi_oracle_pair(params: &ScenarioParams, tail: f64) -> Result<(FockDensityMatrix, FockDensityMatrix)> {
    check_feasible(params)?;
    let signal_cutoff = bose_einstein_cutoff(params.n_s(), tail.min(TMSV_THRESHOLD)).max(2);
    let bath_cutoff = bose_einstein_cutoff(params.h1_bath_mean(), tail);
    debug!("oracle cutoffs: signal/idler {signal_cutoff}, bath {bath_cutoff}");
    let input = build_tmsv_fock(params.n_s(), signal_cutoff)?;
    let rho0 = apply_target_channel(&input, params, Hypothesis::H0, bath_cutoff)?;
    let rho1 = apply_target_channel(&input, params, Hypothesis::H1, bath_cutoff)?;
    Ok((rho0, rho1))
}

fn check_dims(rho0: &FockDensityMatrix, rho1: &FockDensityMatrix) -> Result<()> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch(rho0.dim(), rho1.dim()));
    }
    Ok(())
}

/// Minimum error probability `(1 − Σ γ⁺)/2` for equally likely states, where
/// `γ⁺` are the positive eigenvalues of `ρ₁ − ρ₀`.
pub fn helstrom_error(rho0: &FockDensityMatrix, rho1: &FockDensityMatrix) -> Result<f64> {
    check_dims(rho0, rho1)?;
    let diff = hermitian_part(&(&rho1.matrix - &rho0.matrix));
    let positive: f64 = diff.symmetric_eigenvalues().iter().filter(|&&g| g > 0.0).sum();
    Ok(((1.0 - positive) / 2.0).clamp(0.0, 0.5))
}

/// `ρ^p` through the Hermitian eigendecomposition, flooring eigenvalues at zero.
fn hermitian_power(rho: &DMatrix<C64>, p: f64) -> DMatrix<C64> {
    let eig = hermitian_part(rho).symmetric_eigen();
    let powered = eig
        .eigenvalues
        .map(|l| if l > 0.0 { C64::from(l.powf(p)) } else { ZERO });
    &eig.eigenvectors * DMatrix::from_diagonal(&powered) * eig.eigenvectors.adjoint()
}

/// `tr(ρ₀ˢ ρ₁¹⁻ˢ)` by brute force.
pub fn q_s_oracle(rho0: &FockDensityMatrix, rho1: &FockDensityMatrix, s: f64) -> Result<f64> {
    check_dims(rho0, rho1)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::SOutOfRange(s));
    }
    let a = hermitian_power(&rho0.matrix, s);
    let b = hermitian_power(&rho1.matrix, 1.0 - s);
    // tr(AB) without forming the product.
    Ok(a.component_mul(&b.transpose()).iter().map(|z| z.re).sum())
}
