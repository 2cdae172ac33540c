//! Bracketing scalar minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `tol` or after `max_iter`
/// contractions. Errors from `f` are propagated immediately.
pub fn golden_section<F, E>(mut f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Result<Minimum, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut iterations = 0;

    while (b - a) > tol && iterations < max_iter {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
        iterations += 1;
    }

    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(Minimum { x, value, iterations })
}
