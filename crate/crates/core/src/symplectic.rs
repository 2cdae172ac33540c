//! Symplectic linear algebra on real `2K × 2K` quadrature covariance matrices.
//!
//! Quadratures are ordered `(q₁, p₁, q₂, p₂, …)` and the vacuum covariance is
//! `¼·I`. A covariance `V` is diagonalized as `V = S · diag(ν₁, ν₁, …, ν_K, ν_K) · Sᵀ`
//! with `S Ω Sᵀ = Ω`; the `ν_k` form the symplectic spectrum and satisfy
//! `ν_k ≥ ¼` for physical states.

use nalgebra::{linalg::Schur, DMatrix};

use crate::error::{Error, Result};
use crate::states::ScenarioParams;

/// Smallest symplectic eigenvalue allowed by the uncertainty principle.
pub const VACUUM_NU: f64 = 0.25;
/// Slack on [`VACUUM_NU`] accepted during validation.
pub const UNCERTAINTY_TOL: f64 = 1e-9;
/// Relative asymmetry accepted when validating a covariance.
pub const SYMMETRY_TOL: f64 = 1e-12;

const TIE_TOL: f64 = 1e-12;

/// `Ω = ⊕ [[0, 1], [−1, 0]]` over `dim_modes` modes.
pub fn symplectic_form(dim_modes: usize) -> DMatrix<f64> {
    let n = 2 * dim_modes;
    let mut omega = DMatrix::zeros(n, n);
    for k in 0..dim_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// A validated quadrature covariance matrix.
///
/// Construction checks symmetry, positive definiteness and the uncertainty
/// bound on the symplectic spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let decomposition = decompose(&matrix)?;
        if let Some(&nu) = decomposition
            .spectrum
            .iter()
            .find(|&&nu| nu < VACUUM_NU - UNCERTAINTY_TOL)
        {
            return Err(Error::UncertaintyViolation(nu));
        }
        Ok(Self { matrix })
    }

    /// Vacuum covariance `¼·I` on `dim_modes` modes.
    pub fn vacuum(dim_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * dim_modes, 2 * dim_modes) * VACUUM_NU,
        }
    }

    pub fn dim_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn symplectic_spectrum(&self) -> Vec<f64> {
        // Validated at construction, so the decomposition cannot fail.
        decompose(&self.matrix)
            .map(|d| d.spectrum)
            .unwrap_or_default()
    }

    /// `det(4·V)`, equal to one exactly for pure states.
    pub fn purity_determinant(&self) -> f64 {
        (&self.matrix * 4.0).determinant()
    }
}

/// Symplectic matrix and spectrum of a covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticDecomposition {
    pub s_matrix: DMatrix<f64>,
    /// One entry per mode, sorted descending.
    pub spectrum: Vec<f64>,
}

impl SymplecticDecomposition {
    pub fn dim_modes(&self) -> usize {
        self.spectrum.len()
    }

    /// `diag(ν₁, ν₁, …, ν_K, ν_K)`.
    pub fn diagonal(&self) -> DMatrix<f64> {
        let d: Vec<f64> = self.spectrum.iter().flat_map(|&nu| [nu, nu]).collect();
        DMatrix::from_diagonal(&d.into())
    }

    /// `S · diag(ν) · Sᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.s_matrix * self.diagonal() * self.s_matrix.transpose()
    }

    /// `max |S Ω Sᵀ − Ω|`.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(self.dim_modes());
        (&self.s_matrix * &omega * self.s_matrix.transpose() - omega).amax()
    }
}

/// Williamson diagonalization of a validated covariance matrix.
///
/// With `R = V^{1/2}`, the matrix `R Ω R` is real antisymmetric, so its real
/// Schur form is block diagonal with blocks `[[0, ν_k], [−ν_k, 0]]`. Collecting
/// the Schur vectors into `O` (oriented so every block has a positive upper
/// entry) gives `S = R · O · diag(ν)^{-1/2}`, which satisfies `Sᵀ Ω S = Ω` and
/// hence `S Ω Sᵀ = Ω`. Degenerate spectra yield some valid symplectic basis of
/// the degenerate subspace.
pub fn williamson(cov: &CovarianceMatrix) -> Result<SymplecticDecomposition> {
    decompose(&cov.matrix)
}

fn check_symmetric(matrix: &DMatrix<f64>) -> Result<()> {
    let (rows, cols) = matrix.shape();
    if rows != cols || rows == 0 || rows % 2 != 0 {
        return Err(Error::BadShape(rows, cols));
    }
    let scale = matrix.amax().max(f64::MIN_POSITIVE);
    let asym = (matrix - matrix.transpose()).amax() / scale;
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

fn decompose(matrix: &DMatrix<f64>) -> Result<SymplecticDecomposition> {
    check_symmetric(matrix)?;
    let n = matrix.nrows();
    let modes = n / 2;
    let sym = (matrix + matrix.transpose()) * 0.5;

    let eigen = sym.clone().symmetric_eigen();
    let min_eig = eigen.eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(Error::NonPositiveDefinite(min_eig));
    }
    let sqrt_vals = eigen.eigenvalues.map(f64::sqrt);
    let root = &eigen.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eigen.eigenvectors.transpose();

    let omega = symplectic_form(modes);
    let skew = &root * &omega * &root;
    let skew = (&skew - skew.transpose()) * 0.5;

    let schur = Schur::try_new(skew.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("real Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();

    let scale = t.amax().max(f64::MIN_POSITIVE);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(modes);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > 1e-10 * scale {
            pairs.push((i, i + 1));
            i += 2;
        } else {
            return Err(Error::Numerical(format!(
                "antisymmetric form has a real eigenvalue block at index {i}"
            )));
        }
    }

    let mut o = DMatrix::zeros(n, n);
    let mut spectrum = Vec::with_capacity(modes);
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let qa = q.column(a);
        let qb = q.column(b);
        let upper = (qa.transpose() * &skew * qb)[(0, 0)];
        let (first, second) = if upper >= 0.0 { (qa, qb) } else { (qb, qa) };
        o.set_column(2 * k, &first);
        o.set_column(2 * k + 1, &second);
        spectrum.push(upper.abs());
    }

    let inv_sqrt: Vec<f64> = spectrum.iter().flat_map(|&nu| [nu.powf(-0.5); 2]).collect();
    let s_matrix = root * o * DMatrix::from_diagonal(&inv_sqrt.into());

    Ok(sort_modes(SymplecticDecomposition { s_matrix, spectrum }))
}

/// Weight of mode `k`'s q-column on the q-quadrature rows.
fn q_weight(s_matrix: &DMatrix<f64>, k: usize) -> f64 {
    (0..s_matrix.nrows() / 2)
        .map(|j| s_matrix[(2 * j, 2 * k)].powi(2))
        .sum()
}

/// Orders modes by descending symplectic eigenvalue; near-ties go to the mode
/// with the larger q-quadrature weight. Permuting whole mode blocks keeps `S`
/// symplectic.
fn sort_modes(decomposition: SymplecticDecomposition) -> SymplecticDecomposition {
    let SymplecticDecomposition { s_matrix, spectrum } = decomposition;
    let modes = spectrum.len();
    let mut order: Vec<usize> = (0..modes).collect();
    order.sort_by(|&a, &b| spectrum[b].total_cmp(&spectrum[a]));

    let mut start = 0;
    while start < modes {
        let mut end = start + 1;
        while end < modes && (spectrum[order[start]] - spectrum[order[end]]).abs() <= TIE_TOL {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| q_weight(&s_matrix, b).total_cmp(&q_weight(&s_matrix, a)));
        start = end;
    }

    let mut sorted_s = DMatrix::zeros(s_matrix.nrows(), s_matrix.ncols());
    for (new, &old) in order.iter().enumerate() {
        sorted_s.set_column(2 * new, &s_matrix.column(2 * old));
        sorted_s.set_column(2 * new + 1, &s_matrix.column(2 * old + 1));
    }
    SymplecticDecomposition {
        s_matrix: sorted_s,
        spectrum: order.iter().map(|&k| spectrum[k]).collect(),
    }
}

/// Closed-form diagonalization of the target-present return/idler covariance.
///
/// `S = [[X₊, X₋], [X₋, X₊]]` with `X± = diag(x±, ±x±)` and
/// `x± = sqrt((A+S ± D) / 2D)`, `D = sqrt((A+S)² − 4κC_q²)`; the spectrum is
/// `[(−1)ᵏ(S − A) + D]/8`. The result is sorted like [`williamson`].
pub fn qi_h1_closed_form(params: &ScenarioParams) -> Result<SymplecticDecomposition> {
    qi_h1_decomposition(params.n_s(), params.n_b(), params.kappa())
}

/// [`qi_h1_closed_form`] on raw parameters, accepting the closed interval
/// `0 ≤ κ ≤ 1` so the no-target limit can be evaluated directly.
pub fn qi_h1_decomposition(n_s: f64, n_b: f64, kappa: f64) -> Result<SymplecticDecomposition> {
    if !(n_s > 0.0 && n_s.is_finite()) {
        return Err(Error::InvalidParameter(format!("n_s must be positive, got {n_s}")));
    }
    if !(n_b >= 0.0 && n_b.is_finite()) {
        return Err(Error::InvalidParameter(format!("n_b must be non-negative, got {n_b}")));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidParameter(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    let s = 2.0 * n_s + 1.0;
    let b = 2.0 * n_b + 1.0;
    let a = 2.0 * kappa * n_s + b;
    let cq = 2.0 * (n_s * (n_s + 1.0)).sqrt();

    let disc = (a + s).powi(2) - 4.0 * kappa * cq * cq;
    if disc < 0.0 {
        return Err(Error::DomainError(format!("negative discriminant {disc:e}")));
    }
    let d = disc.sqrt();
    let x_plus = ((a + s + d) / (2.0 * d)).sqrt();
    // a + s − d loses precision for small κ; use (a+s)² − d² = 4κC_q² instead.
    let x_minus = (2.0 * kappa * cq * cq / (d * (a + s + d))).sqrt();

    #[rustfmt::skip]
    let s_matrix = DMatrix::from_row_slice(4, 4, &[
        x_plus,  0.0,     x_minus,  0.0,
        0.0,     x_plus,  0.0,     -x_minus,
        x_minus, 0.0,     x_plus,   0.0,
        0.0,    -x_minus, 0.0,      x_plus,
    ]);
    let spectrum = vec![(-(s - a) + d) / 8.0, ((s - a) + d) / 8.0];
    Ok(sort_modes(SymplecticDecomposition { s_matrix, spectrum }))
}
