//! Scalar root bracketing and maximization.

use crate::error::{Error, Result};

/// Golden ratio conjugate, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

pub fn central_difference<F>(f: &F, x: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((f(x + step)? - f(x - step)?) / (2.0 * step))
}

/// Bisects `[lo, hi]`, whose endpoint values `flo` and `fhi` differ in sign,
/// until the bracket is narrower than `tol`.
pub fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, mut flo: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::numerical(format!(
            "empty bisection bracket [{lo}, {hi}]"
        )));
    }
    // 200 halvings exhaust any f64 bracket.
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fmid = f(mid)?;
        if fmid == 0.0 {
            return Ok(mid);
        }
        if (fmid > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
/// Returns the best abscissa seen and its value.
pub fn golden_section_max<F>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let root = bisect(&f, 0.0, 2.0, -2.0, 1e-12).unwrap();
        assert!((root - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn golden_section_on_parabola_and_cusp() {
        let f = |x: f64| Ok(-(x - 0.3).powi(2));
        let (x, _) = golden_section_max(&f, -1.0, 2.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        let cusp = |x: f64| Ok(1.0 - (x - 0.7).abs());
        let (x, v) = golden_section_max(&cusp, 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.7).abs() < 1e-11 && (v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn central_difference_of_sine() {
        let f = |x: f64| Ok(x.sin());
        let d = central_difference(&f, 0.4, 1e-6).unwrap();
        assert!((d - 0.4f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn empty_bracket_rejected() {
        let f = |x: f64| Ok(x);
        assert!(bisect(&f, 1.0, 1.0, 1.0, 1e-9).is_err());
    }
}
