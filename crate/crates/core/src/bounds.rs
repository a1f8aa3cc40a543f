//! Closed-form bounds on the first eigenvalue of rectangles and
//! quadrilaterals, and the first eigenvalue of the one-dimensional Dirac
//! operator on an interval.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Root of `tan(ν)/ν = -1/m` in `[π/2, π)`, with `ν₁(0) = π/2`.
///
/// Solved as `m tan ν + ν = 0`, whose left side increases strictly from
/// `-∞` to `π` across the interval, by bisection to `1e-14`.
pub fn nu1(m_scaled: f64) -> Result<f64> {
    if !(m_scaled >= 0.0) || m_scaled.is_nan() {
        return Err(Error::Domain {
            function: "nu1",
            value: m_scaled,
            requirement: "m >= 0",
        });
    }
    if m_scaled == 0.0 {
        return Ok(FRAC_PI_2);
    }
    if m_scaled.is_infinite() {
        return Ok(PI);
    }
    let g = |nu: f64| m_scaled * nu.tan() + nu;
    let (mut lo, mut hi) = (FRAC_PI_2 + 1e-12, PI - 1e-12);
    if g(lo) >= 0.0 {
        return Ok(lo);
    }
    if g(hi) <= 0.0 {
        return Ok(hi);
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bounds on `λ₁² - m²` for the rectangle with sides `a`, `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangleBounds {
    pub lower_sq: f64,
    pub upper_simple_sq: f64,
    pub upper_refined_sq: f64,
}

impl RectangleBounds {
    /// Bounds on `λ₁` itself: `√(bound + m²)` for the lower and refined
    /// upper bounds.
    pub fn lambda_range(&self, mass: f64) -> (f64, f64) {
        let m2 = mass * mass;
        ((self.lower_sq + m2).sqrt(), (self.upper_refined_sq + m2).sqrt())
    }
}

fn check_side(name: &'static str, s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function: name,
            value: s,
            requirement: "side length > 0",
        })
    }
}

fn check_mass(function: &'static str, m: f64) -> Result<()> {
    if m >= 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: m,
            requirement: "m >= 0",
        })
    }
}

/// `(π/s) max{1/(1 + (m s)⁻¹), 1/2}`, squared; `1/(1 + (m s)⁻¹) = ms/(1+ms)`
/// vanishes at `m = 0`.
fn lower_term(s: f64, m: f64) -> f64 {
    let ms = m * s;
    let factor = (ms / (1.0 + ms)).max(0.5);
    (PI / s * factor).powi(2)
}

/// Lower, simple upper and refined upper bounds on `λ₁² - m²`.
pub fn rect_bounds(a: f64, b: f64, m: f64) -> Result<RectangleBounds> {
    check_side("rect_bounds", a)?;
    check_side("rect_bounds", b)?;
    check_mass("rect_bounds", m)?;
    let (pa, pb) = ((PI / a).powi(2), (PI / b).powi(2));
    let refined_a = (nu1(m * a)? / a).powi(2) + pb;
    let refined_b = pa + (nu1(m * b)? / b).powi(2);
    Ok(RectangleBounds {
        lower_sq: lower_term(a, m) + lower_term(b, m),
        upper_simple_sq: pa + pb,
        upper_refined_sq: refined_a.min(refined_b),
    })
}

/// First positive eigenvalue of the Dirac operator with infinite-mass
/// conditions on an interval of length `a`: `√(m² + (ν₁(ma)/a)²)`.
pub fn dirac_1d_lambda1(a: f64, m: f64) -> Result<f64> {
    check_side("dirac_1d_lambda1", a)?;
    check_mass("dirac_1d_lambda1", m)?;
    Ok((m * m + (nu1(m * a)? / a).powi(2)).sqrt())
}

/// Sides of the rectangle with the given area and perimeter:
/// `a, b = (P ± √(P² - 16A))/4`.
pub fn equivalent_rectangle(area: f64, perimeter: f64) -> Result<(f64, f64)> {
    let disc = perimeter * perimeter - 16.0 * area;
    if !(area > 0.0 && perimeter > 0.0 && disc >= 0.0) || !disc.is_finite() {
        return Err(Error::InvalidIsoperimetricData { area, perimeter });
    }
    let root = disc.sqrt();
    Ok(((perimeter + root) / 4.0, (perimeter - root) / 4.0))
}

/// Conjectured upper bound on `λ₁² - m²` for a quadrilateral: the refined
/// rectangle bound at the rectangle with the same area and perimeter.
pub fn quad_bound(area: f64, perimeter: f64, m: f64) -> Result<f64> {
    let (a, b) = equivalent_rectangle(area, perimeter)?;
    Ok(rect_bounds(a, b, m)?.upper_refined_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent root of `tan ν + ν = 0` by Newton's method from a
    /// bracketing start.
    fn newton_tan_plus_nu() -> f64 {
        let mut nu: f64 = 2.0;
        for _ in 0..50 {
            let f = nu.tan() + nu;
            let df = 1.0 / nu.cos().powi(2) + 1.0;
            nu -= f / df;
        }
        nu
    }

    #[test]
    fn nu1_examples() {
        assert_eq!(nu1(0.0).unwrap(), FRAC_PI_2);
        let root = newton_tan_plus_nu();
        assert!((root - 2.028757838110434).abs() < 1e-13);
        assert!((nu1(1.0).unwrap() - root).abs() < 1e-13);
        assert!((nu1(1e6).unwrap() - PI).abs() < 1e-3);
        assert!(nu1(-1.0).is_err());
        assert!(nu1(f64::NAN).is_err());
    }

    #[test]
    fn nu1_residual_and_monotonicity() {
        for m in [0.1, 1.0, 10.0] {
            let nu = nu1(m).unwrap();
            assert!((nu.tan() / nu + 1.0 / m).abs() < 1e-10);
            assert!((FRAC_PI_2..PI).contains(&nu));
        }
        let grid = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
        let values: Vec<f64> = grid.iter().map(|&m| nu1(m).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unit_square_without_mass() {
        let b = rect_bounds(1.0, 1.0, 0.0).unwrap();
        let pi2 = PI * PI;
        assert!((b.lower_sq - pi2 / 2.0).abs() < 1e-12);
        assert!((b.upper_refined_sq - 1.25 * pi2).abs() < 1e-12);
        assert!((b.upper_simple_sq - 2.0 * pi2).abs() < 1e-12);
    }

    #[test]
    fn large_mass_limit() {
        let b = rect_bounds(1.3, 0.8, 1e9).unwrap();
        assert!((b.upper_refined_sq - b.upper_simple_sq).abs() < 1e-6 * b.upper_simple_sq);
    }

    #[test]
    fn one_dimensional_eigenvalue() {
        assert!((dirac_1d_lambda1(1.0, 0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((dirac_1d_lambda1(2.0, 0.0).unwrap() - PI / 4.0).abs() < 1e-15);
        let want = (1.0 + newton_tan_plus_nu().powi(2)).sqrt();
        assert!((dirac_1d_lambda1(1.0, 1.0).unwrap() - want).abs() < 1e-12);
        assert!((want - 2.261826334114651).abs() < 1e-12);
        assert!(dirac_1d_lambda1(0.0, 1.0).is_err());
    }

    #[test]
    fn quadrilateral_bound() {
        for m in [0.0, 1.0, 5.0] {
            let sq = rect_bounds(1.0, 1.0, m).unwrap().upper_refined_sq;
            assert!((quad_bound(1.0, 4.0, m).unwrap() - sq).abs() < 1e-12);
            let r = rect_bounds(2.0, 0.5, m).unwrap().upper_refined_sq;
            assert!((quad_bound(1.0, 5.0, m).unwrap() - r).abs() < 1e-12);
        }
        assert!(matches!(
            quad_bound(1.0, 3.0, 1.0),
            Err(Error::InvalidIsoperimetricData { .. })
        ));
    }

    #[test]
    fn lambda_range_is_ordered() {
        let b = rect_bounds(2.0, 0.5, 1.0).unwrap();
        let (lo, hi) = b.lambda_range(1.0);
        assert!(1.0 < lo && lo < hi);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn bound_ordering(a in 0.1f64..10.0, b in 0.1f64..10.0, m in 0.0f64..10.0) {
            let r = rect_bounds(a, b, m).unwrap();
            prop_assert!(r.lower_sq <= r.upper_refined_sq);
            prop_assert!(r.upper_refined_sq <= r.upper_simple_sq);
            let s = rect_bounds(b, a, m).unwrap();
            prop_assert!((r.lower_sq - s.lower_sq).abs() <= 1e-12 * r.lower_sq);
            prop_assert!((r.upper_refined_sq - s.upper_refined_sq).abs() <= 1e-12 * r.upper_refined_sq);
            prop_assert!((r.upper_simple_sq - s.upper_simple_sq).abs() <= 1e-12 * r.upper_simple_sq);
        }

        #[test]
        fn nu1_stays_in_interval(m in 0.0f64..1e4) {
            let nu = nu1(m).unwrap();
            prop_assert!((FRAC_PI_2..PI).contains(&nu));
        }
    }
}
