use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of a scalar multiplier solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MultiplierSolve {
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Accepted multipliers must satisfy `|λ − 1| < MULTIPLIER_WINDOW`.
pub const MULTIPLIER_WINDOW: f64 = 0.5;

/// Newton's method on `g`, where `eval(x)` returns `(g(x), g'(x))`.
///
/// Stops as soon as `|g(x)| ≤ tol·scale`; the returned iteration count is
/// the number of Newton updates taken, so an initial guess that already
/// satisfies the test reports zero.
pub fn newton_scalar<F>(mut eval: F, x0: f64, tol: f64, scale: f64, max_iter: usize) -> Result<MultiplierSolve>
where
    F: FnMut(f64) -> (f64, f64),
{
    let threshold = tol * scale;
    let mut x = x0;
    let mut residual = f64::NAN;
    for it in 0..=max_iter {
        let (g, dg) = eval(x);
        residual = g;
        if !g.is_finite() {
            break;
        }
        if g.abs() <= threshold {
            return Ok(MultiplierSolve {
                lambda: x,
                iterations: it,
                residual: g,
                converged: true,
            });
        }
        if it == max_iter {
            break;
        }
        if !(dg.abs() >= 1e-300) {
            return Err(Error::DerivativeUnderflow { x, derivative: dg });
        }
        x -= g / dg;
    }
    Err(Error::MultiplierNonConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Rejects converged roots outside the window around 1.
pub fn accept_multiplier(solve: MultiplierSolve) -> Result<MultiplierSolve> {
    if !solve.lambda.is_finite() || (solve.lambda - 1.0).abs() >= MULTIPLIER_WINDOW {
        return Err(Error::MultiplierOutOfRange { lambda: solve.lambda });
    }
    Ok(solve)
}
