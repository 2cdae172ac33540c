#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

/// Phase rotation on one mode.
pub fn rotation(modes: usize, k: usize, phi: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    let (sin, cos) = phi.sin_cos();
    s[(2 * k, 2 * k)] = cos;
    s[(2 * k, 2 * k + 1)] = sin;
    s[(2 * k + 1, 2 * k)] = -sin;
    s[(2 * k + 1, 2 * k + 1)] = cos;
    s
}

/// Single-mode squeezer `diag(e^r, e^{−r})` on mode `k`.
pub fn squeezer(modes: usize, k: usize, r: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    s[(2 * k, 2 * k)] = r.exp();
    s[(2 * k + 1, 2 * k + 1)] = (-r).exp();
    s
}

/// Beamsplitter between modes `a` and `b`.
pub fn beamsplitter(modes: usize, a: usize, b: usize, theta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    let (sin, cos) = theta.sin_cos();
    for q in 0..2 {
        s[(2 * a + q, 2 * a + q)] = cos;
        s[(2 * a + q, 2 * b + q)] = sin;
        s[(2 * b + q, 2 * a + q)] = -sin;
        s[(2 * b + q, 2 * b + q)] = cos;
    }
    s
}

/// Product of random rotations, squeezers and beamsplitters.
pub fn random_symplectic<R: Rng>(rng: &mut R, modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * modes, 2 * modes);
    for _ in 0..3 {
        for k in 0..modes {
            s = rotation(modes, k, rng.random_range(0.0..std::f64::consts::TAU)) * s;
            s = squeezer(modes, k, rng.random_range(-1.0..1.0)) * s;
        }
        for a in 0..modes {
            for b in a + 1..modes {
                s = beamsplitter(modes, a, b, rng.random_range(0.0..std::f64::consts::PI)) * s;
            }
        }
    }
    s
}

/// Random valid covariance together with the spectrum it was built from.
pub fn random_covariance<R: Rng>(rng: &mut R, modes: usize) -> (DMatrix<f64>, Vec<f64>) {
    let s = random_symplectic(rng, modes);
    let nus: Vec<f64> = (0..modes).map(|_| 0.25 + rng.random_range(0.0..5.0)).collect();
    let d: Vec<f64> = nus.iter().flat_map(|&n| [n, n]).collect();
    let v = &s * DMatrix::from_diagonal(&d.into()) * s.transpose();
    let v = (&v + v.transpose()) * 0.5;
    (v, nus)
}
