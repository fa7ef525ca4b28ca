use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{perp, unit, Jet, Vec2};

use super::param::{CurveSource, ParamCurve, Parametrization};

/// Highest harmonic accepted in a support-function spec.
pub const MAX_HARMONIC: usize = 64;
/// Default number of grid points for the convexity check.
pub const DEFAULT_GRID: usize = 1024;

/// Strictly convex curve given by a truncated Fourier support function
///
/// `h(psi) = mean + sum_n cos[n-1] cos(n psi) + sin[n-1] sin(n psi)`,
/// parametrized by the outer-normal angle `psi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportCurve {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    grid_size: usize,
}

impl SupportCurve {
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::with_grid(mean, cos, sin, DEFAULT_GRID)
    }

    pub fn with_grid(
        mean: f64,
        mut cos: Vec<f64>,
        mut sin: Vec<f64>,
        grid_size: usize,
    ) -> Result<Self> {
        let order = cos.len().max(sin.len());
        if order > MAX_HARMONIC {
            return Err(Error::TruncationTooLarge {
                order,
                max: MAX_HARMONIC,
            });
        }
        if grid_size < 8 {
            return Err(Error::InvalidArgument(format!(
                "grid_size {grid_size} is too small"
            )));
        }
        if !mean.is_finite() || cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
            return Err(Error::Spec("support coefficients must be finite".into()));
        }
        cos.resize(order, 0.0);
        sin.resize(order, 0.0);
        let curve = SupportCurve {
            mean,
            cos,
            sin,
            grid_size,
        };
        let (margin, psi) = curve.convexity_margin();
        if margin <= 0.0 {
            return Err(Error::NotConvex { margin, psi });
        }
        Ok(curve)
    }

    /// Coefficients validated for size and finiteness only; `h + h''` may change sign.
    pub(crate) fn support_data(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        match Self::new(mean, cos.clone(), sin.clone()) {
            Err(Error::NotConvex { .. }) => {
                let order = cos.len().max(sin.len());
                let (mut cos, mut sin) = (cos, sin);
                cos.resize(order, 0.0);
                sin.resize(order, 0.0);
                Ok(SupportCurve {
                    mean,
                    cos,
                    sin,
                    grid_size: DEFAULT_GRID,
                })
            }
            other => other,
        }
    }

    /// Circle of the given radius centred at the origin.
    pub fn circle(radius: f64) -> Self {
        SupportCurve {
            mean: radius,
            cos: Vec::new(),
            sin: Vec::new(),
            grid_size: DEFAULT_GRID,
        }
    }

    /// `h = mean + amplitude * cos(harmonic * psi)`.
    pub fn single_harmonic(mean: f64, amplitude: f64, harmonic: usize) -> Result<Self> {
        if harmonic == 0 {
            return Self::new(mean + amplitude, Vec::new(), Vec::new());
        }
        let mut cos = vec![0.0; harmonic];
        cos[harmonic - 1] = amplitude;
        Self::new(mean, cos, Vec::new())
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn order(&self) -> usize {
        self.cos.len()
    }

    pub fn is_circle(&self) -> bool {
        self.cos.iter().chain(self.sin.iter()).all(|c| *c == 0.0)
    }

    pub fn h(&self, psi: f64) -> f64 {
        self.derivatives(psi)[0]
    }

    /// `[h, h', h'', h''']` at `psi`, from the Fourier coefficients.
    pub fn derivatives(&self, psi: f64) -> [f64; 4] {
        let mut out = [self.mean, 0.0, 0.0, 0.0];
        let (s1, c1) = psi.sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        for (i, (a, b)) in self.cos.iter().zip(self.sin.iter()).enumerate() {
            // (c, s) <- (cos((i+1) psi), sin((i+1) psi)) by angle addition
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            let n = (i + 1) as f64;
            let n2 = n * n;
            out[0] += a * c + b * s;
            out[1] += n * (-a * s + b * c);
            out[2] += -n2 * (a * c + b * s);
            out[3] += n2 * n * (a * s - b * c);
        }
        out
    }

    /// Radius of curvature `h + h''`.
    pub fn curvature_radius(&self, psi: f64) -> f64 {
        let d = self.derivatives(psi);
        d[0] + d[2]
    }

    /// Minimum of `h + h''` over the grid and the angle where it occurs.
    pub fn convexity_margin(&self) -> (f64, f64) {
        (0..self.grid_size)
            .map(|i| {
                let psi = 2.0 * PI * i as f64 / self.grid_size as f64;
                (self.curvature_radius(psi), psi)
            })
            .fold(
                (f64::INFINITY, 0.0),
                |acc, v| if v.0 < acc.0 { v } else { acc },
            )
    }

    /// Minimum of `h` over the grid; positive iff the origin is interior.
    pub fn min_support(&self) -> f64 {
        (0..self.grid_size)
            .map(|i| self.h(2.0 * PI * i as f64 / self.grid_size as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Boundary point with outer normal `(cos psi, sin psi)`.
    pub fn point(&self, psi: f64) -> Vec2 {
        let d = self.derivatives(psi);
        let n = unit(psi);
        n * d[0] + perp(&n) * d[1]
    }

    pub fn width(&self, theta: f64) -> f64 {
        self.h(theta) + self.h(theta + PI)
    }

    /// The curve parametrized by normal angle, period `2 pi`.
    pub fn param_curve(&self) -> ParamCurve {
        ParamCurve::new(
            std::sync::Arc::new(self.clone()),
            2.0 * PI,
            Parametrization::NormalAngle,
        )
    }
}

impl CurveSource for SupportCurve {
    fn jet(&self, psi: f64) -> Jet {
        let [h, h1, h2, h3] = self.derivatives(psi);
        let n = unit(psi);
        let t = perp(&n);
        Jet {
            pos: n * h + t * h1,
            d1: t * (h + h2),
            d2: t * (h1 + h3) - n * (h + h2),
        }
    }
}

/// `gamma(psi) = h(psi) n(psi) + h'(psi) n'(psi)`.
pub fn eval_support_curve(curve: &SupportCurve, psi: f64) -> Vec2 {
    curve.point(psi)
}

/// Width in direction `theta`: `h(theta) + h(theta + pi)`.
pub fn width(curve: &SupportCurve, theta: f64) -> f64 {
    curve.width(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cos8() -> SupportCurve {
        SupportCurve::support_data(1.0, [vec![0.0; 7], vec![0.05]].concat(), vec![]).unwrap()
    }

    #[test]
    fn unit_circle_points() {
        let c = SupportCurve::circle(1.0);
        assert!((c.point(PI / 2.0) - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        assert!((c.point(0.0) - Vec2::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cos8_support_value_and_normal() {
        let c = cos8();
        let p = c.point(0.0);
        assert!((p.dot(&Vec2::new(1.0, 0.0)) - 1.05).abs() < 1e-15);
        // tangent by central differences is orthogonal to n(0)
        let eps = 1e-6;
        let tangent = (c.point(eps) - c.point(-eps)) / (2.0 * eps);
        assert!(tangent.x.abs() < 1e-9);
        // h + h'' < 0 here, so the envelope runs backwards
        assert_eq!(tangent.y.signum(), c.curvature_radius(0.0).signum());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = SupportCurve::new(1.0, vec![0.0, 0.03, 0.01], vec![0.02, 0.0, 0.005]).unwrap();
        let eps = 1e-5;
        for &psi in &[0.1, 1.3, 2.9, 5.0] {
            let d = c.derivatives(psi);
            let dp = c.derivatives(psi + eps);
            let dm = c.derivatives(psi - eps);
            for k in 0..3 {
                let fd = (dp[k] - dm[k]) / (2.0 * eps);
                assert!(
                    (fd - d[k + 1]).abs() < 1e-8,
                    "order {k}: {fd} vs {}",
                    d[k + 1]
                );
            }
        }
    }

    #[test]
    fn widths() {
        assert!((SupportCurve::circle(1.0).width(0.7) - 2.0).abs() < 1e-15);
        let reuleaux_like = SupportCurve::single_harmonic(1.0, 0.1, 3).unwrap();
        for i in 0..16 {
            assert!((reuleaux_like.width(i as f64 * 0.4) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cos8_with_amplitude_005_is_not_convex() {
        // h + h'' = 1 - 3.15 cos 8 psi
        let err = SupportCurve::single_harmonic(1.0, 0.05, 8).unwrap_err();
        match err {
            Error::NotConvex { margin, .. } => assert!((margin + 2.15).abs() < 1e-12),
            e => panic!("{e}"),
        }
        assert!(SupportCurve::single_harmonic(1.0, 1.0 / 63.0 - 1e-6, 8).is_ok());
    }

    #[test]
    fn rejects_nonconvex_and_oversized() {
        let err = SupportCurve::single_harmonic(1.0, 0.9, 2).unwrap_err();
        assert!(matches!(err, Error::NotConvex { .. }));
        let err = SupportCurve::new(1.0, vec![0.0; 65], vec![]).unwrap_err();
        assert!(matches!(err, Error::TruncationTooLarge { order: 65, .. }));
    }

    proptest! {
        #[test]
        fn support_identity(psi in -10.0..10.0f64) {
            let c = SupportCurve::new(1.0, vec![0.02, 0.0, 0.01], vec![0.0, 0.015]).unwrap();
            let n = unit(psi);
            prop_assert!((c.point(psi).dot(&n) - c.h(psi)).abs() < 1e-10);
        }

        #[test]
        fn curvature_positive_on_accepted(a in -0.03..0.03f64, b in -0.03..0.03f64) {
            let c = SupportCurve::new(1.0, vec![0.0, a, 0.0, b], vec![]).unwrap();
            prop_assert!(c.convexity_margin().0 > 0.0);
        }
    }
}
