//! Bracketed scalar root finding shared by the interaction thresholds,
//! fan inversion and the characteristic foot-point solves.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Bisection for a root of `g` on `[lo, hi]`.
///
/// Requires a sign change (or an exact zero at an end point). Stops once the
/// bracket is narrower than `x_tol` or the residual is below `g_tol`.
pub fn bisect<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, x_tol: f64, g_tol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut ga = g(a);
    let gb = g(b);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if !(ga.is_finite() && gb.is_finite()) || ga.signum() == gb.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{a}, {b}] (g = {ga:e}, {gb:e})"
        )));
    }
    for _ in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 || gm.abs() <= g_tol || (b - a) <= x_tol {
            return Ok(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn reversed_bracket_is_accepted() {
        let r = bisect(|x| x - 0.25, 1.0, 0.0, 1e-14, 0.0).unwrap();
        assert!((r - 0.25).abs() < 1e-13);
    }

    #[test]
    fn missing_sign_change_is_an_error() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0),
            Err(Error::NoRoot(_))
        ));
    }
}
