use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{angle_between, det, perp, unit, Jet, Mat2, Vec2};
use crate::numeric::safeguarded_newton;

use super::param::{CurveSource, ParamCurve, Parametrization};
use super::support::SupportCurve;
use super::wulff::WulffBody;

/// Where the ray through `x` leaves the body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    Smooth,
    /// Interior of polygon edge `i` (from vertex `i` to vertex `i + 1`).
    Edge(usize),
    /// Polygon vertex `i`; the derivative is one-sided.
    Vertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Differential {
    pub value: f64,
    pub contact: Contact,
}

/// Convex polygon, counterclockwise, origin strictly inside.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    normals: Vec<Vec2>,
    offsets: Vec<f64>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {n}"
            )));
        }
        if vertices
            .iter()
            .any(|v| !v.x.is_finite() || !v.y.is_finite())
        {
            return Err(Error::InvalidPolygon(
                "vertex coordinates must be finite".into(),
            ));
        }
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        let mut turning = 0.0;
        for i in 0..n {
            let e = vertices[(i + 1) % n] - vertices[i];
            let next = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            if e.norm() == 0.0 {
                return Err(Error::InvalidPolygon(format!("repeated vertex {i}")));
            }
            if det(&e, &next) <= 0.0 {
                return Err(Error::InvalidPolygon(format!(
                    "not strictly convex and counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
            turning += angle_between(&e, &next);
            let u = Vec2::new(e.y, -e.x) / e.norm();
            let h = u.dot(&vertices[i]);
            if h <= 0.0 {
                return Err(Error::OriginNotInterior(format!(
                    "edge {i} has support {h:.3e}"
                )));
            }
            normals.push(u);
            offsets.push(h);
        }
        if (turning - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::InvalidPolygon(format!(
                "boundary turns {turning:.6} radians, not once"
            )));
        }
        Ok(Polygon {
            vertices,
            normals,
            offsets,
        })
    }

    /// Regular `n`-gon with the given circumradius and first vertex at angle `phase`.
    pub fn regular(n: usize, circumradius: f64, phase: f64) -> Result<Self> {
        let vertices = (0..n)
            .map(|i| unit(phase + 2.0 * PI * i as f64 / n as f64) * circumradius)
            .collect();
        Polygon::new(vertices)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn normals(&self) -> &[Vec2] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn gauge(&self, x: &Vec2) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(u, h)| u.dot(x) / h)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }

    /// One-sided directional derivative of the gauge at `x` in direction `v`.
    pub fn differential(&self, x: &Vec2, v: &Vec2) -> Result<Differential> {
        if x.norm() == 0.0 {
            return Err(Error::GaugeAtOrigin);
        }
        let g = self.gauge(x);
        let tol = 1e-12 * g.max(1e-300);
        let active: Vec<usize> = (0..self.len())
            .filter(|&i| (self.normals[i].dot(x) / self.offsets[i] - g).abs() <= tol)
            .collect();
        let value = active
            .iter()
            .map(|&i| self.normals[i].dot(v) / self.offsets[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let n = self.len();
        let contact = match active.as_slice() {
            [i] => Contact::Edge(*i),
            [0, j] if *j == n - 1 => Contact::Vertex(0),
            [i, _] => Contact::Vertex(i + 1),
            _ => Contact::Vertex(active[0]),
        };
        Ok(Differential { value, contact })
    }

    pub fn support(&self, psi: f64) -> f64 {
        let n = unit(psi);
        self.vertices
            .iter()
            .map(|v| v.dot(&n))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| (self.vertices[(i + 1) % n] - self.vertices[i]).norm())
            .sum()
    }

    /// Exterior angle at vertex `i`, from normal `i - 1` to normal `i`.
    fn exterior_angle(&self, i: usize) -> f64 {
        let n = self.len();
        angle_between(&self.normals[(i + n - 1) % n], &self.normals[i])
    }
}

/// Minkowski sum of a convex polygon with a disc of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundedPolygon {
    base: Polygon,
    radius: f64,
}

enum Piece {
    Edge(usize),
    Vertex(usize),
}

impl RoundedPolygon {
    pub fn new(base: Polygon, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Spec(format!(
                "rounding radius must be positive, got {radius}"
            )));
        }
        Ok(RoundedPolygon { base, radius })
    }

    pub fn base(&self) -> &Polygon {
        &self.base
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Largest `s` with `s x` in the body, and the boundary piece it lies on.
    fn exit(&self, x: &Vec2) -> (f64, Piece) {
        let p = &self.base;
        let rho = self.radius;
        let xx = x.norm_squared();
        let mut best = (0.0, Piece::Edge(0));
        for i in 0..p.len() {
            let u = p.normals[i];
            let ux = u.dot(x);
            if ux > 0.0 {
                let s = (p.offsets[i] + rho) / ux;
                let foot = s * x - rho * u;
                let a = p.vertices[i];
                let b = p.vertices[(i + 1) % p.len()];
                let e = b - a;
                let along = (foot - a).dot(&e) / e.norm_squared();
                if (-1e-14..=1.0 + 1e-14).contains(&along) && s > best.0 {
                    best = (s, Piece::Edge(i));
                }
            }
            // larger root of |s x - v|^2 = rho^2
            let v = p.vertices[i];
            let bx = v.dot(x);
            let disc = bx * bx - xx * (v.norm_squared() - rho * rho);
            if disc >= 0.0 {
                let s = (bx + disc.sqrt()) / xx;
                if s > best.0 {
                    best = (s, Piece::Vertex(i));
                }
            }
        }
        best
    }

    pub fn gauge(&self, x: &Vec2) -> f64 {
        if x.norm() == 0.0 {
            return 0.0;
        }
        1.0 / self.exit(x).0
    }

    /// Outer unit normal at the boundary point on the ray through `x`.
    fn normal(&self, x: &Vec2) -> (f64, Vec2) {
        let (s, piece) = self.exit(x);
        let n = match piece {
            Piece::Edge(i) => self.base.normals[i],
            Piece::Vertex(i) => (s * x - self.base.vertices[i]) / self.radius,
        };
        (1.0 / s, n)
    }

    pub fn support(&self, psi: f64) -> f64 {
        self.base.support(psi) + self.radius
    }

    pub fn perimeter(&self) -> f64 {
        self.base.perimeter() + 2.0 * PI * self.radius
    }

    pub fn boundary_curve(&self) -> ParamCurve {
        let source = RoundedBoundary::new(self.clone());
        let period = source.length();
        ParamCurve::new(Arc::new(source), period, Parametrization::EuclideanArc)
    }
}

/// Arc-length parametrization of a rounded polygon, starting at the arc around vertex 0.
#[derive(Debug, Clone)]
struct RoundedBoundary {
    body: RoundedPolygon,
    /// Start of the arc around vertex `i` is `starts[2i]`, of edge `i` is `starts[2i + 1]`.
    starts: Vec<f64>,
}

impl RoundedBoundary {
    fn new(body: RoundedPolygon) -> Self {
        let p = &body.base;
        let n = p.len();
        let mut starts = Vec::with_capacity(2 * n + 1);
        let mut s = 0.0;
        for i in 0..n {
            starts.push(s);
            s += body.radius * p.exterior_angle(i);
            starts.push(s);
            s += (p.vertices[(i + 1) % n] - p.vertices[i]).norm();
        }
        starts.push(s);
        RoundedBoundary { body, starts }
    }

    fn length(&self) -> f64 {
        *self.starts.last().unwrap()
    }
}

impl CurveSource for RoundedBoundary {
    fn jet(&self, s: f64) -> Jet {
        let p = &self.body.base;
        let n = p.len();
        let rho = self.body.radius;
        let s = s.rem_euclid(self.length());
        let k = (self.starts.partition_point(|v| *v <= s).max(1) - 1).min(2 * n - 1);
        let i = k / 2;
        let ds = s - self.starts[k];
        if k % 2 == 0 {
            let prev = p.normals[(i + n - 1) % n];
            let phi = prev.y.atan2(prev.x) + ds / rho;
            let u = unit(phi);
            Jet {
                pos: p.vertices[i] + u * rho,
                d1: perp(&u),
                d2: -u / rho,
            }
        } else {
            let e = (p.vertices[(i + 1) % n] - p.vertices[i]).normalize();
            Jet {
                pos: p.vertices[i] + p.normals[i] * rho + e * ds,
                d1: e,
                d2: Vec2::zeros(),
            }
        }
    }
}

/// Convex body with the origin in its interior, evaluated through its gauge.
#[derive(Debug, Clone)]
pub enum GaugeBody {
    Smooth(SupportCurve),
    /// Support data with `h + h''` changing sign: the intersection of the support half-planes.
    Wulff(WulffBody),
    Ellipse {
        a: f64,
        b: f64,
    },
    LpBall {
        p: f64,
    },
    Polygon(Polygon),
    RoundedPolygon(RoundedPolygon),
    Linear {
        inner: Box<GaugeBody>,
        matrix: Mat2,
        inverse: Mat2,
    },
}

impl GaugeBody {
    pub fn smooth(curve: SupportCurve) -> Result<Self> {
        let m = curve.min_support();
        if m <= 0.0 {
            return Err(Error::OriginNotInterior(format!("min support {m:.3e}")));
        }
        Ok(GaugeBody::Smooth(curve))
    }

    /// Body cut out by the half-planes `<x, n(psi)> <= h(psi)`; exact support
    /// function when `h + h'' > 0`, otherwise a body with corners.
    pub fn from_support_data(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        match SupportCurve::new(mean, cos.clone(), sin.clone()) {
            Ok(c) => GaugeBody::smooth(c),
            Err(Error::NotConvex { .. }) => Ok(GaugeBody::Wulff(WulffBody::new(mean, cos, sin)?)),
            Err(e) => Err(e),
        }
    }

    pub fn disc() -> Self {
        GaugeBody::Ellipse { a: 1.0, b: 1.0 }
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Spec(format!(
                "ellipse semi-axes must be positive, got ({a}, {b})"
            )));
        }
        Ok(GaugeBody::Ellipse { a, b })
    }

    pub fn lp_ball(p: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::Spec(format!(
                "lp_ball requires finite p >= 2, got {p}"
            )));
        }
        Ok(GaugeBody::LpBall { p })
    }

    pub fn polygon(vertices: Vec<Vec2>) -> Result<Self> {
        Ok(GaugeBody::Polygon(Polygon::new(vertices)?))
    }

    pub fn rounded_polygon(base: Polygon, radius: f64) -> Result<Self> {
        Ok(GaugeBody::RoundedPolygon(RoundedPolygon::new(
            base, radius,
        )?))
    }

    /// The body `M K`.
    pub fn linear_image(self, matrix: Mat2) -> Result<Self> {
        let inverse = matrix
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular linear map".into()))?;
        Ok(GaugeBody::Linear {
            inner: Box::new(self),
            matrix,
            inverse,
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GaugeBody::Smooth(_) => "support_fourier",
            GaugeBody::Wulff(_) => "support_fourier_hull",
            GaugeBody::Ellipse { .. } => "ellipse",
            GaugeBody::LpBall { .. } => "lp_ball",
            GaugeBody::Polygon(_) => "polygon",
            GaugeBody::RoundedPolygon(_) => "rounded_polygon",
            GaugeBody::Linear { .. } => "linear_image",
        }
    }

    /// True for bodies whose gauge is differentiable away from the origin.
    pub fn is_smooth(&self) -> bool {
        match self {
            GaugeBody::Polygon(_) | GaugeBody::Wulff(_) => false,
            GaugeBody::Linear { inner, .. } => inner.is_smooth(),
            _ => true,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        match self {
            GaugeBody::Ellipse { a, b } => *a == 1.0 && *b == 1.0,
            GaugeBody::Smooth(c) => c.is_circle() && c.mean() == 1.0,
            GaugeBody::LpBall { p } => *p == 2.0,
            _ => false,
        }
    }

    pub fn gauge(&self, x: &Vec2) -> f64 {
        if x.norm() == 0.0 {
            return 0.0;
        }
        match self {
            GaugeBody::Smooth(c) => smooth_contact(c, x).0,
            GaugeBody::Wulff(w) => w.gauge(x),
            GaugeBody::Ellipse { a, b } => (x.x / a).hypot(x.y / b),
            GaugeBody::LpBall { p } => lp_norm(x, *p),
            GaugeBody::Polygon(poly) => poly.gauge(x),
            GaugeBody::RoundedPolygon(r) => r.gauge(x),
            GaugeBody::Linear { inner, inverse, .. } => inner.gauge(&(inverse * x)),
        }
    }

    /// Directional derivative `dg_x(v)`; one-sided for polygons.
    pub fn gauge_differential(&self, x: &Vec2, v: &Vec2) -> Result<Differential> {
        if x.norm() == 0.0 {
            return Err(Error::GaugeAtOrigin);
        }
        let smooth = |value| {
            Ok(Differential {
                value,
                contact: Contact::Smooth,
            })
        };
        match self {
            GaugeBody::Polygon(poly) => poly.differential(x, v),
            GaugeBody::Linear { inner, inverse, .. } => {
                inner.gauge_differential(&(inverse * x), &(inverse * v))
            }
            GaugeBody::RoundedPolygon(r) => {
                let (g, n) = r.normal(x);
                smooth(n.dot(v) / (n.dot(x) / g))
            }
            _ => smooth(self.gradient(x)?.dot(v)),
        }
    }

    /// Gradient of the gauge at `x`; smooth bodies only.
    pub fn gradient(&self, x: &Vec2) -> Result<Vec2> {
        if x.norm() == 0.0 {
            return Err(Error::GaugeAtOrigin);
        }
        match self {
            GaugeBody::Smooth(c) => {
                let (_, psi) = smooth_contact(c, x);
                Ok(unit(psi) / c.h(psi))
            }
            GaugeBody::Wulff(w) => Ok(w.gradient(x)),
            GaugeBody::Ellipse { a, b } => {
                let g = (x.x / a).hypot(x.y / b);
                Ok(Vec2::new(x.x / (a * a), x.y / (b * b)) / g)
            }
            GaugeBody::LpBall { p } => {
                let g = lp_norm(x, *p);
                let f = |c: f64| c.signum() * (c.abs() / g).powf(p - 1.0);
                Ok(Vec2::new(f(x.x), f(x.y)))
            }
            GaugeBody::RoundedPolygon(r) => {
                let (g, n) = r.normal(x);
                Ok(n / (n.dot(x) / g))
            }
            GaugeBody::Polygon(_) => Err(Error::NonSmoothBody("polygon")),
            GaugeBody::Linear { inner, inverse, .. } => {
                Ok(inverse.transpose() * inner.gradient(&(inverse * x))?)
            }
        }
    }

    /// Support function `max_{y in K} <y, n(psi)>`.
    pub fn support(&self, psi: f64) -> f64 {
        self.support_vec(&unit(psi))
    }

    fn support_vec(&self, v: &Vec2) -> f64 {
        let r = v.norm();
        if r == 0.0 {
            return 0.0;
        }
        let psi = v.y.atan2(v.x);
        match self {
            GaugeBody::Smooth(c) => r * c.h(psi),
            GaugeBody::Wulff(w) => r * w.support(psi),
            GaugeBody::Ellipse { a, b } => (a * v.x).hypot(b * v.y),
            GaugeBody::LpBall { p } => lp_norm(v, p / (p - 1.0)),
            GaugeBody::Polygon(poly) => r * poly.support(psi),
            GaugeBody::RoundedPolygon(rp) => r * rp.support(psi),
            GaugeBody::Linear { inner, matrix, .. } => inner.support_vec(&(matrix.transpose() * v)),
        }
    }

    /// Boundary point on the ray through `direction`.
    pub fn boundary_point(&self, direction: &Vec2) -> Vec2 {
        direction / self.gauge(direction)
    }

    /// `n` boundary points at equally spaced polar angles.
    pub fn boundary_samples(&self, n: usize) -> Vec<Vec2> {
        (0..n)
            .map(|i| self.boundary_point(&unit(2.0 * PI * i as f64 / n as f64)))
            .collect()
    }

    /// Boundary as a positively oriented parametrized curve.
    pub fn boundary_curve(&self) -> Result<ParamCurve> {
        match self {
            GaugeBody::Smooth(c) => Ok(c.param_curve()),
            GaugeBody::Wulff(w) => Ok(w.boundary_curve()),
            GaugeBody::Ellipse { a, b } => ParamCurve::ellipse(*a, *b),
            GaugeBody::LpBall { p } => ParamCurve::lp_circle(*p),
            GaugeBody::Polygon(_) => Err(Error::NonSmoothBody("polygon")),
            GaugeBody::RoundedPolygon(r) => Ok(r.boundary_curve()),
            GaugeBody::Linear { inner, matrix, .. } => inner.boundary_curve()?.linear_image(matrix),
        }
    }
}

fn lp_norm(x: &Vec2, p: f64) -> f64 {
    let m = x.x.abs().max(x.y.abs());
    if m == 0.0 {
        return 0.0;
    }
    m * ((x.x.abs() / m).powf(p) + (x.y.abs() / m).powf(p)).powf(1.0 / p)
}

/// Gauge of `x` and the normal angle of the boundary point on its ray.
fn smooth_contact(c: &SupportCurve, x: &Vec2) -> (f64, f64) {
    let theta = x.y.atan2(x.x);
    let f = |psi: f64| {
        let [h, h1, h2, _] = c.derivatives(psi);
        let n = unit(psi);
        let p = n * h + perp(&n) * h1;
        (angle_between(x, &p), h * (h + h2) / p.norm_squared())
    };
    let half = 0.5 * PI;
    let psi = safeguarded_newton(f, theta - half, theta + half, 1e-15, 1e-15)
        .expect("support curve with positive support brackets every direction");
    (x.dot(&unit(psi)) / c.h(psi), psi)
}
