use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle_between, det, perp, Jet, Mat2, Vec2};
use crate::numeric::safeguarded_newton;

use super::ode::PeriodicSolution;

/// Anything that can evaluate a curve and its first two derivatives.
pub trait CurveSource: Send + Sync + fmt::Debug {
    fn jet(&self, t: f64) -> Jet;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parametrization {
    NormalAngle,
    EuclideanArc,
    AffineNormalized,
    GaugeArc,
    Custom,
}

impl fmt::Display for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Parametrization::NormalAngle => "normal-angle",
            Parametrization::EuclideanArc => "euclidean-arc",
            Parametrization::AffineNormalized => "affine-normalized",
            Parametrization::GaugeArc => "gauge-arc",
            Parametrization::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Closed, positively oriented curve with period `L` and a parametrization tag.
#[derive(Debug, Clone)]
pub struct ParamCurve {
    source: Arc<dyn CurveSource>,
    period: f64,
    kind: Parametrization,
}

impl ParamCurve {
    pub fn new(source: Arc<dyn CurveSource>, period: f64, kind: Parametrization) -> Self {
        assert!(
            period > 0.0 && period.is_finite(),
            "curve period must be positive"
        );
        ParamCurve {
            source,
            period,
            kind,
        }
    }

    /// `(a cos t, b sin t)`, period `2 pi`.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Spec(format!(
                "ellipse semi-axes must be positive, got ({a}, {b})"
            )));
        }
        let kind = if a == 1.0 && b == 1.0 {
            Parametrization::NormalAngle
        } else {
            Parametrization::Custom
        };
        Ok(ParamCurve::new(
            Arc::new(EllipseArc { a, b }),
            2.0 * PI,
            kind,
        ))
    }

    /// Unit circle by angle; the angle is simultaneously normal angle and arc length.
    pub fn unit_circle() -> Self {
        ParamCurve::new(
            Arc::new(EllipseArc { a: 1.0, b: 1.0 }),
            2.0 * PI,
            Parametrization::NormalAngle,
        )
    }

    /// Unit circle of the `l^p` norm in polar parametrization (`p >= 2`).
    pub fn lp_circle(p: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::Spec(format!(
                "lp_ball requires finite p >= 2, got {p}"
            )));
        }
        Ok(ParamCurve::new(
            Arc::new(LpBoundary { p }),
            2.0 * PI,
            Parametrization::Custom,
        ))
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn kind(&self) -> Parametrization {
        self.kind
    }

    pub fn source(&self) -> &Arc<dyn CurveSource> {
        &self.source
    }

    /// Same curve with a different tag; the caller vouches for the tag.
    pub fn with_kind(&self, kind: Parametrization) -> Self {
        ParamCurve {
            source: self.source.clone(),
            period: self.period,
            kind,
        }
    }

    pub fn jet(&self, t: f64) -> Jet {
        self.source.jet(t)
    }

    pub fn position(&self, t: f64) -> Vec2 {
        self.jet(t).pos
    }

    pub fn velocity(&self, t: f64) -> Vec2 {
        self.jet(t).d1
    }

    pub fn acceleration(&self, t: f64) -> Vec2 {
        self.jet(t).d2
    }

    /// `n` equally spaced parameters and their positions.
    pub fn samples(&self, n: usize) -> Vec<(f64, Vec2)> {
        (0..n)
            .map(|i| {
                let t = self.period * i as f64 / n as f64;
                (t, self.position(t))
            })
            .collect()
    }

    /// Image under a linear map with positive determinant.
    pub fn linear_image(&self, m: &Mat2) -> Result<Self> {
        let d = m.determinant();
        if !(d > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "linear map must preserve orientation, det = {d:.3e}"
            )));
        }
        let kind = if is_rotation(m) {
            self.kind
        } else {
            Parametrization::Custom
        };
        let kind = match kind {
            Parametrization::AffineNormalized if (d - 1.0).abs() > 1e-12 => Parametrization::Custom,
            k => k,
        };
        Ok(ParamCurve::new(
            Arc::new(Linear {
                inner: self.clone(),
                matrix: *m,
            }),
            self.period,
            kind,
        ))
    }

    /// `s -> scale * gamma(time_scale * s)`, period `L / time_scale`.
    pub fn rescaled(&self, scale: f64, time_scale: f64, kind: Parametrization) -> Self {
        let source = Rescaled {
            inner: self.clone(),
            scale,
            time_scale,
        };
        ParamCurve::new(Arc::new(source), self.period / time_scale, kind)
    }

    /// `s -> gamma(f(s))` for an increasing lift `f` with `f(s + P) = f(s) + P`.
    pub fn reparametrized(&self, map: PeriodicSolution, kind: Parametrization) -> Self {
        let period = map.period();
        ParamCurve::new(
            Arc::new(Reparametrized {
                inner: self.clone(),
                map,
            }),
            period,
            kind,
        )
    }

    /// Same curve with the parameter origin moved to `t0`.
    pub fn shifted(&self, t0: f64) -> Self {
        ParamCurve::new(
            Arc::new(Shifted {
                inner: self.clone(),
                offset: t0,
            }),
            self.period,
            self.kind,
        )
    }

    /// Smallest `det(gamma', gamma'')` and smallest `det(gamma, gamma')` over `n` samples.
    pub fn convexity_margins(&self, n: usize) -> (f64, f64) {
        let mut turning = f64::INFINITY;
        let mut star = f64::INFINITY;
        for i in 0..n {
            let j = self.jet(self.period * i as f64 / n as f64);
            turning = turning.min(j.turning());
            star = star.min(det(&j.pos, &j.d1));
        }
        (turning, star)
    }

    /// Checks periodicity and positive orientation on `n` samples.
    pub fn validate(&self, n: usize) -> Result<()> {
        let scale = self
            .samples(n)
            .iter()
            .map(|(_, p)| p.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        for i in 0..n {
            let t = self.period * i as f64 / n as f64;
            let gap = (self.position(t + self.period) - self.position(t)).norm();
            if gap > 1e-8 * scale {
                return Err(Error::InvalidArgument(format!(
                    "curve is not periodic: gap {gap:.3e} at t = {t:.6}"
                )));
            }
        }
        let (turning, _) = self.convexity_margins(n);
        if turning < -1e-12 * scale {
            return Err(Error::NotConvex {
                margin: turning,
                psi: f64::NAN,
            });
        }
        Ok(())
    }

    /// Enclosed area, `(1/2) * integral of det(gamma, gamma')`.
    pub fn area(&self) -> f64 {
        0.5 * crate::numeric::integrate(
            |t| {
                let j = self.jet(t);
                det(&j.pos, &j.d1)
            },
            0.0,
            self.period,
            64,
        )
    }

    /// Euclidean length.
    pub fn length(&self) -> f64 {
        crate::numeric::integrate(|t| self.velocity(t).norm(), 0.0, self.period, 64)
    }

    pub fn radial(&self) -> Result<RadialLocator> {
        RadialLocator::new(self.clone())
    }
}

fn is_rotation(m: &Mat2) -> bool {
    let mtm = m.transpose() * m;
    (mtm - Mat2::identity()).norm() < 1e-12 && m.determinant() > 0.0
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EllipseArc {
    a: f64,
    b: f64,
}

impl CurveSource for EllipseArc {
    fn jet(&self, t: f64) -> Jet {
        let (s, c) = t.sin_cos();
        let pos = Vec2::new(self.a * c, self.b * s);
        Jet {
            pos,
            d1: Vec2::new(-self.a * s, self.b * c),
            d2: -pos,
        }
    }
}

/// `|x|^p + |y|^p = 1` as `rho(theta) u(theta)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LpBoundary {
    pub(crate) p: f64,
}

impl CurveSource for LpBoundary {
    fn jet(&self, theta: f64) -> Jet {
        let p = self.p;
        let (s, c) = theta.sin_cos();
        let (ac, as_) = (c.abs(), s.abs());
        let (cp2, sp2) = (ac.powf(p - 2.0), as_.powf(p - 2.0));
        let w = ac.powf(p) + as_.powf(p);
        let x = sp2 - cp2;
        let w1 = p * c * s * x;
        let w2 = p * ((c * c - s * s) * x + (p - 2.0) * (c * c * sp2 + s * s * cp2));
        let e = -1.0 / p;
        let rho = w.powf(e);
        let rho1 = e * w.powf(e - 1.0) * w1;
        let rho2 = e * ((e - 1.0) * w.powf(e - 2.0) * w1 * w1 + w.powf(e - 1.0) * w2);
        let u = Vec2::new(c, s);
        let v = perp(&u);
        Jet {
            pos: u * rho,
            d1: u * rho1 + v * rho,
            d2: u * (rho2 - rho) + v * (2.0 * rho1),
        }
    }
}

#[derive(Debug, Clone)]
struct Linear {
    inner: ParamCurve,
    matrix: Mat2,
}

impl CurveSource for Linear {
    fn jet(&self, t: f64) -> Jet {
        self.inner.jet(t).transformed(&self.matrix)
    }
}

#[derive(Debug, Clone)]
struct Rescaled {
    inner: ParamCurve,
    scale: f64,
    time_scale: f64,
}

impl CurveSource for Rescaled {
    fn jet(&self, s: f64) -> Jet {
        let j = self.inner.jet(self.time_scale * s);
        let (c, k) = (self.scale, self.time_scale);
        Jet {
            pos: j.pos * c,
            d1: j.d1 * (c * k),
            d2: j.d2 * (c * k * k),
        }
    }
}

#[derive(Debug, Clone)]
struct Shifted {
    inner: ParamCurve,
    offset: f64,
}

impl CurveSource for Shifted {
    fn jet(&self, s: f64) -> Jet {
        self.inner.jet(s + self.offset)
    }
}

#[derive(Debug, Clone)]
struct Reparametrized {
    inner: ParamCurve,
    map: PeriodicSolution,
}

impl CurveSource for Reparametrized {
    fn jet(&self, s: f64) -> Jet {
        let (f, f1, f2) = self.map.jet(s);
        let j = self.inner.jet(f);
        Jet {
            pos: j.pos,
            d1: j.d1 * f1,
            d2: j.d2 * (f1 * f1) + j.d1 * f2,
        }
    }
}

/// Polar-angle lookup for a curve around an interior origin.
///
/// Gives the parameter of the boundary point in a given direction and hence
/// the gauge of the region the curve encloses.
#[derive(Debug, Clone)]
pub struct RadialLocator {
    curve: ParamCurve,
    params: Vec<f64>,
    angles: Vec<f64>,
}

const RADIAL_TABLE: usize = 512;

impl RadialLocator {
    pub fn new(curve: ParamCurve) -> Result<Self> {
        let n = RADIAL_TABLE;
        let l = curve.period();
        let mut params = Vec::with_capacity(n + 1);
        let mut angles = Vec::with_capacity(n + 1);
        let mut prev = curve.position(0.0);
        if prev.norm() == 0.0 {
            return Err(Error::OriginNotInterior("origin lies on the curve".into()));
        }
        let mut acc = prev.y.atan2(prev.x);
        params.push(0.0);
        angles.push(acc);
        for i in 1..=n {
            let t = l * i as f64 / n as f64;
            let p = curve.position(t);
            let step = angle_between(&prev, &p);
            if !(step > 0.0) || det(&p, &curve.velocity(t)) <= 0.0 {
                return Err(Error::OriginNotInterior(format!(
                    "polar angle not increasing near t = {t:.6}"
                )));
            }
            acc += step;
            params.push(t);
            angles.push(acc);
            prev = p;
        }
        let total = acc - angles[0];
        if (total - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::OriginNotInterior(format!(
                "curve winds {total:.6} radians around the origin"
            )));
        }
        // pin the closing angle exactly
        angles[n] = angles[0] + 2.0 * PI;
        Ok(RadialLocator {
            curve,
            params,
            angles,
        })
    }

    pub fn curve(&self) -> &ParamCurve {
        &self.curve
    }

    /// Parameter in `[0, L)` of the boundary point on the ray through `x`.
    pub fn locate(&self, x: &Vec2) -> Result<f64> {
        if x.norm() == 0.0 {
            return Err(Error::GaugeAtOrigin);
        }
        let a0 = self.angles[0];
        let mut theta = x.y.atan2(x.x);
        theta = a0 + (theta - a0).rem_euclid(2.0 * PI);
        let j = match self.angles.partition_point(|a| *a <= theta) {
            0 => 0,
            k => (k - 1).min(self.params.len() - 2),
        };
        let (lo, hi) = (self.params[j], self.params[j + 1]);
        let base = self.curve.position(lo);
        let a_lo = self.angles[j];
        let f = |t: f64| {
            let jet = self.curve.jet(t);
            let val = a_lo + angle_between(&base, &jet.pos) - theta;
            (val, det(&jet.pos, &jet.d1) / jet.pos.norm_squared())
        };
        // rays through a table node round to either side of it
        if f(lo).0 >= 0.0 {
            return Ok(lo.rem_euclid(self.curve.period()));
        }
        if f(hi).0 <= 0.0 {
            return Ok(hi.rem_euclid(self.curve.period()));
        }
        let t = safeguarded_newton(f, lo, hi, 1e-15, 1e-15 * self.curve.period())?;
        Ok(t.rem_euclid(self.curve.period()))
    }

    /// Gauge of the enclosed region: `|x| / |gamma(t)|` on the ray through `x`.
    pub fn gauge(&self, x: &Vec2) -> Result<f64> {
        if x.norm() == 0.0 {
            return Ok(0.0);
        }
        let t = self.locate(x)?;
        Ok(x.norm() / self.curve.position(t).norm())
    }
}
