//! Birkhoff, outer, symplectic and Minkowski billiards as twist systems,
//! with the direct geometric maps used to cross-check them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curves::{
    arc_length_reparametrize, gauge_arc_reparametrize, GaugeBody, ParamCurve, Parametrization,
    ShapeSpec,
};
use crate::error::{Error, Result};
use crate::geom::{det, Mat2, Vec2};
use crate::numeric::{bracketed_root, integrate, safeguarded_newton};
use crate::symmetry::FiniteOrderLinearMap;
use crate::twistmaps::{PeriodicOrbit, PhasePoint, TwistSystem};

/// Tangent-line intersections farther out than this (relative to the curve size) are treated as parallel.
const HORIZON: f64 = 1e9;
const TANGENT_SCAN: usize = 512;

/// Parameter of the next point (forward or backward from `t`) whose tangent is parallel to the one at `t`.
pub fn parallel_tangent(curve: &ParamCurve, t: f64, forward: bool) -> Result<f64> {
    let l = curve.period();
    let v = curve.velocity(t);
    let dir = if forward { 1.0 } else { -1.0 };
    let f = |s: f64| dir * det(&v, &curve.velocity(s));
    let mut prev = t;
    for j in 1..TANGENT_SCAN {
        let s = t + dir * l * j as f64 / TANGENT_SCAN as f64;
        if f(s) <= 0.0 {
            let (a, b) = if forward { (prev, s) } else { (s, prev) };
            return bracketed_root(f, a, b, 1e-15 * l);
        }
        prev = s;
    }
    Err(Error::InvalidArgument(format!(
        "no parallel tangent found from t = {t:.6}"
    )))
}

fn check_origin_inside(curve: &ParamCurve) -> Result<()> {
    curve.radial().map(|_| ())
}

/// Inner billiard: `S(s, s') = |gamma(s') - gamma(s)|` in arc length.
#[derive(Debug, Clone)]
pub struct BirkhoffSystem {
    curve: ParamCurve,
}

pub fn birkhoff_system(curve: &ParamCurve) -> Result<BirkhoffSystem> {
    if curve.kind() != Parametrization::EuclideanArc {
        return Err(Error::WrongParametrization {
            expected: Parametrization::EuclideanArc.to_string(),
            found: curve.kind().to_string(),
        });
    }
    Ok(BirkhoffSystem {
        curve: curve.clone(),
    })
}

impl BirkhoffSystem {
    pub fn curve(&self) -> &ParamCurve {
        &self.curve
    }

    fn chord(&self, q: f64, qq: f64) -> Result<(Vec2, f64)> {
        let d = self.curve.position(qq) - self.curve.position(q);
        let n = d.norm();
        if n == 0.0 {
            return Err(Error::Tangency(format!("degenerate chord at s = {q:.6}")));
        }
        Ok((d / n, n))
    }
}

impl TwistSystem for BirkhoffSystem {
    fn name(&self) -> &'static str {
        "birkhoff"
    }

    fn period(&self) -> f64 {
        self.curve.period()
    }

    fn band(&self, _q: f64) -> Result<(f64, f64)> {
        Ok((0.0, self.curve.period()))
    }

    fn generating(&self, q: f64, qq: f64) -> Result<f64> {
        Ok((self.curve.position(qq) - self.curve.position(q)).norm())
    }

    fn partials(&self, q: f64, qq: f64) -> Result<(f64, f64)> {
        let (u, _) = self.chord(q, qq)?;
        Ok((
            -u.dot(&self.curve.velocity(q)),
            u.dot(&self.curve.velocity(qq)),
        ))
    }

    fn second_partials(&self, q: f64, qq: f64) -> Result<[f64; 3]> {
        let (u, n) = self.chord(q, qq)?;
        let (a, b) = (self.curve.jet(q), self.curve.jet(qq));
        let (ua, ub) = (u.dot(&a.d1), u.dot(&b.d1));
        Ok([
            (a.d1.norm_squared() - ua * ua) / n - u.dot(&a.d2),
            -(a.d1.dot(&b.d1) - ua * ub) / n,
            (b.d1.norm_squared() - ub * ub) / n + u.dot(&b.d2),
        ])
    }
}

/// Birkhoff coordinates: outer normal angle of the bounce point and the angle
/// `delta` from the tangent to the outgoing ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffPhase {
    pub psi: f64,
    pub delta: f64,
}

impl BirkhoffSystem {
    pub fn to_angles(&self, x: PhasePoint) -> BirkhoffPhase {
        let v = self.curve.velocity(x.q);
        BirkhoffPhase {
            psi: (-v.x).atan2(v.y).rem_euclid(2.0 * PI),
            delta: x.p.clamp(-1.0, 1.0).acos(),
        }
    }

    /// Phase point leaving the bounce at `s` with angle `delta` to the tangent.
    pub fn from_angle(&self, s: f64, delta: f64) -> Result<PhasePoint> {
        if !(delta > 0.0 && delta < PI) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, pi), got {delta}"
            )));
        }
        Ok(PhasePoint::new(s, delta.cos()))
    }
}

/// Reflects `incoming` about the tangent line at `gamma(t)`.
pub fn birkhoff_reflect(curve: &ParamCurve, incoming: &Vec2, t: f64) -> Result<Vec2> {
    let tangent = curve.velocity(t).normalize();
    let d = incoming.normalize();
    if det(&tangent, &d).abs() < 1e-8 {
        return Err(Error::Tangency(format!(
            "tangential incidence at t = {t:.6}"
        )));
    }
    Ok((tangent * (2.0 * d.dot(&tangent)) - d) * incoming.norm())
}

/// Outer billiard: `S(t, t1) = Area(conv(gamma ∪ {x}))`, `x` the intersection
/// of the tangent lines at `t` (ahead of `gamma(t)`) and `t1` (behind `gamma(t1)`).
///
/// The twist map moves tangency parameters forward, so it is the inverse of
/// [`outer_map`].
#[derive(Debug, Clone)]
pub struct OuterSystem {
    curve: ParamCurve,
    area: f64,
    size: f64,
}

pub fn outer_system(curve: &ParamCurve) -> Result<OuterSystem> {
    check_origin_inside(curve)?;
    let size = curve
        .samples(64)
        .iter()
        .map(|(_, p)| p.norm())
        .fold(0.0, f64::max);
    Ok(OuterSystem {
        curve: curve.clone(),
        area: curve.area(),
        size,
    })
}

/// Tangent-line coordinates `(lambda, lambda1)` of the intersection point.
fn tangent_intersection(curve: &ParamCurve, t: f64, t1: f64, size: f64) -> Result<(f64, f64)> {
    let (v, v1) = (curve.velocity(t), curve.velocity(t1));
    let d = curve.position(t1) - curve.position(t);
    let w = det(&v, &v1);
    if !(w > 0.0) {
        return Err(Error::ParallelTangents);
    }
    let (lam, lam1) = (det(&d, &v1) / w, det(&v, &d) / w);
    if lam * v.norm() > HORIZON * size || lam1 * v1.norm() > HORIZON * size {
        return Err(Error::ParallelTangents);
    }
    Ok((lam, lam1))
}

impl OuterSystem {
    pub fn curve(&self) -> &ParamCurve {
        &self.curve
    }

    /// Exterior point of a phase point.
    pub fn point(&self, x: PhasePoint) -> Result<Vec2> {
        let j = self.curve.jet(x.q);
        let lam = self.lambda(x)?;
        Ok(j.pos + j.d1 * lam)
    }

    /// `lambda` of a phase point, from `p = lambda^2 det(gamma', gamma'') / 2`.
    pub fn lambda(&self, x: PhasePoint) -> Result<f64> {
        let k = self.curve.jet(x.q).turning();
        if !(x.p > 0.0 && k > 0.0) {
            return Err(Error::OutsideBand {
                q: x.q,
                momentum: x.p,
                low: 0.0,
                high: f64::INFINITY,
            });
        }
        Ok((2.0 * x.p / k).sqrt())
    }

    pub fn phase(&self, o: OuterPhase) -> PhasePoint {
        PhasePoint::new(
            o.t,
            0.5 * o.lambda * o.lambda * self.curve.jet(o.t).turning(),
        )
    }
}

impl TwistSystem for OuterSystem {
    fn name(&self) -> &'static str {
        "outer"
    }

    fn period(&self) -> f64 {
        self.curve.period()
    }

    fn band(&self, q: f64) -> Result<(f64, f64)> {
        Ok((0.0, parallel_tangent(&self.curve, q, true)? - q))
    }

    fn back_band(&self, qq: f64) -> Result<(f64, f64)> {
        Ok((0.0, qq - parallel_tangent(&self.curve, qq, false)?))
    }

    fn generating(&self, q: f64, qq: f64) -> Result<f64> {
        let (lam, lam1) = tangent_intersection(&self.curve, q, qq, self.size)?;
        let (a, b) = (self.curve.jet(q), self.curve.jet(qq));
        let arc = integrate(
            |s| {
                let j = self.curve.jet(s);
                det(&j.pos, &j.d1)
            },
            q,
            qq,
            16,
        );
        Ok(self.area + 0.5 * (lam * det(&a.pos, &a.d1) + lam1 * det(&b.pos, &b.d1) - arc))
    }

    fn partials(&self, q: f64, qq: f64) -> Result<(f64, f64)> {
        let (lam, lam1) = tangent_intersection(&self.curve, q, qq, self.size)?;
        let (a, b) = (self.curve.jet(q), self.curve.jet(qq));
        Ok((
            -0.5 * lam * lam * a.turning(),
            0.5 * lam1 * lam1 * b.turning(),
        ))
    }
}

/// Tangent-line coordinates of an exterior point: `x = gamma(t) + lambda gamma'(t)`, `lambda > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterPhase {
    pub t: f64,
    pub lambda: f64,
}

/// The tangency parameter `t` with `x = gamma(t) + lambda gamma'(t)`, `lambda > 0`.
pub fn outer_tangency(curve: &ParamCurve, x: &Vec2) -> Result<OuterPhase> {
    let loc = curve.radial()?;
    if loc.gauge(x)? <= 1.0 + 1e-12 {
        return Err(Error::NotExterior);
    }
    let l = curve.period();
    let phi = |t: f64| {
        let j = curve.jet(t);
        (det(&j.d1, &(x - j.pos)), det(&j.d2, &(x - j.pos)))
    };
    let n = TANGENT_SCAN;
    let mut prev = phi(0.0).0;
    for i in 1..=n {
        let (a, b) = (l * (i - 1) as f64 / n as f64, l * i as f64 / n as f64);
        let cur = phi(b).0;
        if prev * cur <= 0.0 {
            let t = safeguarded_newton(phi, a, b, 0.0, 1e-16 * l)?;
            let j = curve.jet(t);
            let lambda = (x - j.pos).dot(&j.d1) / j.d1.norm_squared();
            if lambda > 0.0 {
                return Ok(OuterPhase {
                    t: t.rem_euclid(l),
                    lambda,
                });
            }
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        what: "outer tangency",
        iterations: n,
        residual: f64::NAN,
    })
}

/// Reflects the exterior point `x` through its tangency point `gamma(t)`, with
/// `x = gamma(t) + lambda gamma'(t)`, `lambda > 0`.
pub fn outer_map(curve: &ParamCurve, x: &Vec2) -> Result<(Vec2, f64)> {
    let o = outer_tangency(curve, x)?;
    Ok((curve.position(o.t) * 2.0 - x, o.t))
}

/// Value of the outer generating function for a pair of tangency parameters.
pub fn outer_generating(curve: &ParamCurve, t: f64, t1: f64) -> Result<f64> {
    outer_system(curve)?.generating(t, t1)
}

/// Symplectic billiard: `S(t, t1) = det(gamma(t), gamma(t1))`.
#[derive(Debug, Clone)]
pub struct SymplecticSystem {
    curve: ParamCurve,
}

pub fn symplectic_system(curve: &ParamCurve) -> Result<SymplecticSystem> {
    Ok(SymplecticSystem {
        curve: curve.clone(),
    })
}

impl SymplecticSystem {
    pub fn curve(&self) -> &ParamCurve {
        &self.curve
    }
}

impl TwistSystem for SymplecticSystem {
    fn name(&self) -> &'static str {
        "symplectic"
    }

    fn period(&self) -> f64 {
        self.curve.period()
    }

    fn band(&self, q: f64) -> Result<(f64, f64)> {
        Ok((0.0, parallel_tangent(&self.curve, q, true)? - q))
    }

    fn back_band(&self, qq: f64) -> Result<(f64, f64)> {
        Ok((0.0, qq - parallel_tangent(&self.curve, qq, false)?))
    }

    fn generating(&self, q: f64, qq: f64) -> Result<f64> {
        Ok(det(&self.curve.position(q), &self.curve.position(qq)))
    }

    fn partials(&self, q: f64, qq: f64) -> Result<(f64, f64)> {
        let (a, b) = (self.curve.jet(q), self.curve.jet(qq));
        Ok((det(&a.d1, &b.pos), det(&a.pos, &b.d1)))
    }

    fn second_partials(&self, q: f64, qq: f64) -> Result<[f64; 3]> {
        let (a, b) = (self.curve.jet(q), self.curve.jet(qq));
        Ok([det(&a.d2, &b.pos), det(&a.d1, &b.d1), det(&a.pos, &b.d2)])
    }
}

/// Third point of the symplectic billiard: the tangent at `gamma(t1)` is
/// parallel to `gamma(t2) - gamma(t)`.
pub fn symplectic_next(curve: &ParamCurve, t: f64, t1: f64) -> Result<f64> {
    let star = parallel_tangent(curve, t, true)?;
    let l = curve.period();
    // bring t1 into (t, t + L)
    let t1 = t + (t1 - t).rem_euclid(l);
    if !(t1 > t && t1 < star) {
        return Err(Error::OutsideSymplecticBand);
    }
    let sys = SymplecticSystem {
        curve: curve.clone(),
    };
    let p = sys.partials(t, t1)?.1;
    let next = crate::twistmaps::twist_step(&sys, PhasePoint::new(t1, p))?;
    let v = curve.velocity(t1);
    let chord = curve.position(next.q) - curve.position(t);
    let residual = det(&chord, &v) / v.norm();
    if residual.abs() > 1e-11 * chord.norm().max(1.0) {
        return Err(Error::NoConvergence {
            what: "symplectic next point",
            iterations: 1,
            residual,
        });
    }
    Ok(next.q)
}

/// Minkowski billiard: `S(t, t1) = g_K(gamma(t1) - gamma(t))`.
#[derive(Debug, Clone)]
pub struct MinkowskiSystem {
    curve: ParamCurve,
    body: GaugeBody,
}

pub fn minkowski_system(curve: &ParamCurve, body: &GaugeBody) -> Result<MinkowskiSystem> {
    if matches!(body, GaugeBody::Polygon(_)) {
        return Err(Error::NonSmoothBody("polygon"));
    }
    let ok = curve.kind() == Parametrization::GaugeArc
        || (curve.kind() == Parametrization::EuclideanArc && body.is_euclidean());
    if !ok {
        return Err(Error::WrongParametrization {
            expected: Parametrization::GaugeArc.to_string(),
            found: curve.kind().to_string(),
        });
    }
    Ok(MinkowskiSystem {
        curve: curve.clone(),
        body: body.clone(),
    })
}

impl MinkowskiSystem {
    pub fn curve(&self) -> &ParamCurve {
        &self.curve
    }

    pub fn body(&self) -> &GaugeBody {
        &self.body
    }
}

impl TwistSystem for MinkowskiSystem {
    fn name(&self) -> &'static str {
        "minkowski"
    }

    fn period(&self) -> f64 {
        self.curve.period()
    }

    fn band(&self, _q: f64) -> Result<(f64, f64)> {
        Ok((0.0, self.curve.period()))
    }

    fn generating(&self, q: f64, qq: f64) -> Result<f64> {
        Ok(self
            .body
            .gauge(&(self.curve.position(qq) - self.curve.position(q))))
    }

    fn partials(&self, q: f64, qq: f64) -> Result<(f64, f64)> {
        let d = self.curve.position(qq) - self.curve.position(q);
        let g = self.body.gradient(&d)?;
        Ok((
            -g.dot(&self.curve.velocity(q)),
            g.dot(&self.curve.velocity(qq)),
        ))
    }
}

/// `|f'(t)|` for `f(tau) = g_K(B gamma(t) - gamma(tau)) + g_K(gamma(tau) - B^{-1} gamma(t))`,
/// with the tangent normalized to unit Euclidean length.
pub fn minkowski_criticality(
    curve: &ParamCurve,
    body: &GaugeBody,
    b: &FiniteOrderLinearMap,
    t: f64,
) -> Result<f64> {
    let x = curve.position(t);
    let v = curve.velocity(t).normalize();
    let ahead = b.apply(&x) - x;
    let behind = x - b.inverse() * x;
    if ahead.norm() == 0.0 || behind.norm() == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "symmetry fixes gamma({t:.6})"
        )));
    }
    let d1 = body.gauge_differential(&ahead, &-v)?.value;
    let d2 = body.gauge_differential(&behind, &v)?.value;
    Ok((d1 + d2).abs())
}

/// Parameters of `M gamma(t_i)`, lifted so they increase like the originals.
pub fn symmetry_image(curve: &ParamCurve, orbit: &PeriodicOrbit, m: &Mat2) -> Result<Vec<f64>> {
    let loc = curve.radial()?;
    let l = curve.period();
    let mut out: Vec<f64> = Vec::with_capacity(orbit.k());
    for &t in &orbit.params {
        let s = loc.locate(&(m * curve.position(t)))?;
        // consecutive links span less than one period
        let lifted = match out.last() {
            None => s,
            Some(&prev) => prev + (s - prev).rem_euclid(l),
        };
        out.push(lifted);
    }
    Ok(out)
}

/// Names accepted by [`Billiard::build`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Birkhoff,
    Outer,
    Symplectic,
    Minkowski,
}

impl std::str::FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "birkhoff" => Ok(SystemKind::Birkhoff),
            "outer" => Ok(SystemKind::Outer),
            "symplectic" => Ok(SystemKind::Symplectic),
            "minkowski" => Ok(SystemKind::Minkowski),
            other => Err(Error::Spec(format!("unknown system {other:?}"))),
        }
    }
}

/// Any of the four systems.
#[derive(Debug, Clone)]
pub enum Billiard {
    Birkhoff(BirkhoffSystem),
    Outer(OuterSystem),
    Symplectic(SymplecticSystem),
    Minkowski(MinkowskiSystem),
}

impl Billiard {
    /// Builds a system from shape specs. The Minkowski table is the boundary of
    /// the table body, and its gauge body defaults to that body.
    pub fn build(kind: SystemKind, table: &ShapeSpec, body: Option<&ShapeSpec>) -> Result<Self> {
        Ok(match kind {
            SystemKind::Birkhoff => Billiard::Birkhoff(birkhoff_system(
                &arc_length_reparametrize(&table.to_curve()?)?,
            )?),
            SystemKind::Outer => Billiard::Outer(outer_system(&table.to_curve()?)?),
            SystemKind::Symplectic => Billiard::Symplectic(symplectic_system(&table.to_curve()?)?),
            SystemKind::Minkowski => {
                let table_body = table.to_body()?;
                let body = match body {
                    Some(spec) => spec.to_body()?,
                    None => table_body.clone(),
                };
                if matches!(body, GaugeBody::Polygon(_)) {
                    return Err(Error::NonSmoothBody("polygon"));
                }
                let curve = gauge_arc_reparametrize(&table_body.boundary_curve()?, &body)?;
                Billiard::Minkowski(minkowski_system(&curve, &body)?)
            }
        })
    }

    pub fn curve(&self) -> &ParamCurve {
        match self {
            Billiard::Birkhoff(s) => s.curve(),
            Billiard::Outer(s) => s.curve(),
            Billiard::Symplectic(s) => s.curve(),
            Billiard::Minkowski(s) => s.curve(),
        }
    }

    pub fn system(&self) -> &dyn TwistSystem {
        match self {
            Billiard::Birkhoff(s) => s,
            Billiard::Outer(s) => s,
            Billiard::Symplectic(s) => s,
            Billiard::Minkowski(s) => s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{Polygon, SupportCurve};
    use crate::geom::{rotation, unit};
    use crate::symmetry::make_rotation;
    use crate::twistmaps::{inverse_step, iterate, periodic_orbit_solve, twist_step, uniform_init};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn circle() -> ParamCurve {
        arc_length_reparametrize(&ParamCurve::unit_circle()).unwrap()
    }

    fn ellipse_arc() -> ParamCurve {
        arc_length_reparametrize(&ParamCurve::ellipse(2.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn birkhoff_generating_values() {
        let s = birkhoff_system(&circle()).unwrap();
        assert_abs_diff_eq!(s.generating(0.0, PI).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            s.generating(0.0, 2.0 * PI / 3.0).unwrap(),
            3f64.sqrt(),
            epsilon = 1e-12
        );
        let e = birkhoff_system(&ellipse_arc()).unwrap();
        let l = e.period();
        assert_abs_diff_eq!(e.generating(0.0, 0.5 * l).unwrap(), 4.0, epsilon = 1e-10);
        assert!(birkhoff_system(&ParamCurve::ellipse(2.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn birkhoff_steps_on_circle() {
        let s = birkhoff_system(&circle()).unwrap();
        let x = twist_step(&s, s.from_angle(0.0, PI / 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(x.q, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(x.p, 0.0, epsilon = 1e-12);
        let x = twist_step(&s, s.from_angle(0.0, PI / 3.0).unwrap()).unwrap();
        assert_abs_diff_eq!(x.q, 2.0 * PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.to_angles(x).delta, PI / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn birkhoff_step_matches_reflection_on_ellipse() {
        let c = ellipse_arc();
        let s = birkhoff_system(&c).unwrap();
        let x0 = s.from_angle(0.0, 0.3).unwrap();
        let x1 = twist_step(&s, x0).unwrap();
        let x2 = twist_step(&s, x1).unwrap();
        // incoming chord reflected at gamma(s1) points along the next chord
        let incoming = c.position(x1.q) - c.position(x0.q);
        let out = birkhoff_reflect(&c, &incoming, x1.q).unwrap();
        let next = c.position(x2.q) - c.position(x1.q);
        assert!(det(&out.normalize(), &next.normalize()).abs() < 1e-9);
        assert!(out.dot(&next) > 0.0);
        // momentum is the cosine of the angle to the tangent
        let t = c.velocity(x1.q);
        assert_abs_diff_eq!(x1.p, next.normalize().dot(&t.normalize()), epsilon = 1e-9);
    }

    #[test]
    fn reflection_examples() {
        let c = ParamCurve::unit_circle();
        let out = birkhoff_reflect(&c, &Vec2::new(1.0, 0.0), 0.0).unwrap();
        assert!((out - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
        let out = birkhoff_reflect(&c, &Vec2::new(1.0, 1.0), 0.0).unwrap();
        assert!((out - Vec2::new(-1.0, 1.0)).norm() < 1e-15);
        assert!(birkhoff_reflect(&c, &Vec2::new(0.0, 1.0), 0.0).is_err());
        // equal angles on an ellipse against a finite-difference tangent
        let e = ParamCurve::ellipse(2.0, 1.0).unwrap();
        let t = 0.8;
        let h = 1e-6;
        let tan = ((e.position(t + h) - e.position(t - h)) / (2.0 * h)).normalize();
        let d = Vec2::new(0.3, 1.0);
        let o = birkhoff_reflect(&e, &d, t).unwrap();
        let a_in = crate::geom::angle_between(&tan, &d.normalize());
        let a_out = crate::geom::angle_between(&o.normalize(), &tan);
        assert!((a_in - a_out).abs() < 1e-8);
    }

    #[test]
    fn outer_generating_values() {
        let c = ParamCurve::unit_circle();
        assert_abs_diff_eq!(
            outer_generating(&c, 0.0, PI / 2.0).unwrap(),
            1.0 + 0.75 * PI,
            epsilon = 1e-12
        );
        let want = PI + 3f64.sqrt() - PI / 3.0;
        assert_abs_diff_eq!(
            outer_generating(&c, 0.0, 2.0 * PI / 3.0).unwrap(),
            want,
            epsilon = 1e-12
        );
        assert!(matches!(
            outer_generating(&c, 0.0, PI - 1e-12),
            Err(Error::ParallelTangents)
        ));
    }

    #[test]
    fn outer_map_on_circle() {
        let c = ParamCurve::unit_circle();
        let x = Vec2::new(2f64.sqrt(), 0.0);
        let (y, t) = outer_map(&c, &x).unwrap();
        assert_abs_diff_eq!(y.norm(), 2f64.sqrt(), epsilon = 1e-14);
        let g = c.jet(t);
        assert!(((x + y) * 0.5 - g.pos).norm() < 1e-15);
        assert!(det(&g.d1, &(x - g.pos)).abs() < 1e-14);
        let (z, _) = outer_map(&c, &y).unwrap();
        assert!((z - Vec2::new(-(2f64.sqrt()), 0.0)).norm() < 1e-14);
        assert!(matches!(
            outer_map(&c, &Vec2::new(0.5, 0.0)),
            Err(Error::NotExterior)
        ));
    }

    #[test]
    fn outer_twist_step_inverts_the_reflection() {
        let c = SupportCurve::single_harmonic(1.0, 0.02, 3)
            .unwrap()
            .param_curve();
        let s = outer_system(&c).unwrap();
        let x = s.phase(OuterPhase {
            t: 0.4,
            lambda: 0.7,
        });
        let y = twist_step(&s, x).unwrap();
        let (px, py) = (s.point(x).unwrap(), s.point(y).unwrap());
        let (back, t) = outer_map(&c, &py).unwrap();
        assert!((back - px).norm() < 1e-10);
        assert_abs_diff_eq!(t, y.q.rem_euclid(2.0 * PI), epsilon = 1e-10);
    }

    #[test]
    fn outer_partials_match_finite_differences() {
        let c = SupportCurve::new(1.0, vec![0.0, 0.03, 0.01], vec![0.02])
            .unwrap()
            .param_curve();
        let s = outer_system(&c).unwrap();
        let h = 1e-5;
        for &(t, t1) in &[(0.1, 1.2), (2.0, 3.9), (4.0, 6.5)] {
            let (s1, s2) = s.partials(t, t1).unwrap();
            let f1 =
                (s.generating(t + h, t1).unwrap() - s.generating(t - h, t1).unwrap()) / (2.0 * h);
            let f2 =
                (s.generating(t, t1 + h).unwrap() - s.generating(t, t1 - h).unwrap()) / (2.0 * h);
            assert!(
                (s1 - f1).abs() < 1e-6 && (s2 - f2).abs() < 1e-6,
                "{s1} {f1} {s2} {f2}"
            );
            assert!(s.second_partials(t, t1).unwrap()[1] < 0.0);
        }
    }

    #[test]
    fn outer_preserves_circles() {
        let c = ParamCurve::unit_circle();
        let mut x = Vec2::new(1.3, 0.4);
        let r = x.norm();
        for _ in 0..1000 {
            x = outer_map(&c, &x).unwrap().0;
        }
        assert!((x.norm() - r).abs() < 1e-10);
    }

    #[test]
    fn symplectic_examples() {
        let c = ParamCurve::unit_circle();
        let s = symplectic_system(&c).unwrap();
        assert_abs_diff_eq!(s.generating(0.0, PI / 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.generating(0.7, 0.7).unwrap(), 0.0, epsilon = 1e-15);
        let e = symplectic_system(&ParamCurve::ellipse(2.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(e.generating(0.0, PI / 2.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            symplectic_next(&c, 0.0, PI / 3.0).unwrap(),
            2.0 * PI / 3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            symplectic_next(&c, 0.0, PI / 2.0).unwrap(),
            PI,
            epsilon = 1e-12
        );
        assert!(matches!(
            symplectic_next(&c, 0.0, PI + 0.1),
            Err(Error::OutsideSymplecticBand)
        ));
    }

    #[test]
    fn symplectic_is_affinely_equivariant() {
        // the ellipse (2 cos t, sin t) is diag(2, 1) applied to the circle, same parameter
        let e = ParamCurve::ellipse(2.0, 1.0).unwrap();
        let c = ParamCurve::unit_circle();
        for &(t, t1) in &[(0.0, 0.9), (1.0, 2.5), (3.0, 3.4)] {
            let a = symplectic_next(&e, t, t1).unwrap();
            let b = symplectic_next(&c, t, t1).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn minkowski_with_disc_is_birkhoff() {
        let c = circle();
        let m = minkowski_system(&c, &GaugeBody::disc()).unwrap();
        let b = birkhoff_system(&c).unwrap();
        for i in 0..20 {
            let q = 0.3 * i as f64;
            let qq = q + 0.1 + 0.29 * i as f64;
            assert!((m.generating(q, qq).unwrap() - b.generating(q, qq).unwrap()).abs() < 1e-12);
        }
        assert!(minkowski_system(&ParamCurve::unit_circle(), &GaugeBody::disc()).is_err());
    }

    #[test]
    fn minkowski_square_gauge_chord() {
        let square = GaugeBody::polygon(vec![
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(square.gauge(&Vec2::new(-1.0, 1.0)), 1.0, epsilon = 1e-15);
        assert!(matches!(
            minkowski_system(&circle(), &square),
            Err(Error::NonSmoothBody(_))
        ));
    }

    #[test]
    fn rounded_hexagon_edge_chord() {
        let hex = Polygon::regular(6, 1.0, 0.0).unwrap();
        let body = GaugeBody::rounded_polygon(hex.clone(), 0.02).unwrap();
        let v = hex.vertices();
        let (a, b) = (body.boundary_point(&v[0]), body.boundary_point(&v[1]));
        assert!((body.gauge(&(b - a)) - 1.0).abs() < 0.02);
    }

    #[test]
    fn criticality_on_disc_and_symmetric_bodies() {
        let disc = GaugeBody::disc();
        let c = circle();
        let b = make_rotation(5, 2).unwrap();
        for i in 0..10 {
            assert!(minkowski_criticality(&c, &disc, &b, 0.6 * i as f64).unwrap() < 1e-12);
        }
        let body = GaugeBody::smooth(SupportCurve::single_harmonic(1.0, 0.01, 8).unwrap()).unwrap();
        let curve = gauge_arc_reparametrize(&body.boundary_curve().unwrap(), &body).unwrap();
        let quarter = make_rotation(4, 1).unwrap();
        let l = curve.period();
        let worst = (0..100)
            .map(|i| {
                minkowski_criticality(&curve, &body, &quarter, l * (i as f64 + 0.5) / 100.0)
                    .unwrap()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        let body4 =
            GaugeBody::smooth(SupportCurve::single_harmonic(1.0, 0.05, 4).unwrap()).unwrap();
        let curve4 = gauge_arc_reparametrize(&body4.boundary_curve().unwrap(), &body4).unwrap();
        let l4 = curve4.period();
        let worst4 = (0..100)
            .map(|i| {
                minkowski_criticality(&curve4, &body4, &quarter, l4 * (i as f64 + 0.5) / 100.0)
                    .unwrap()
            })
            .fold(0.0, f64::max);
        assert!(worst4 > 1e-3, "{worst4}");
    }

    #[test]
    fn all_systems_commute_with_the_table_symmetry() {
        let table = ShapeSpec::harmonic(1.0, 0.02, 3);
        let third = rotation(2.0 * PI / 3.0);
        for kind in [
            SystemKind::Birkhoff,
            SystemKind::Outer,
            SystemKind::Symplectic,
            SystemKind::Minkowski,
        ] {
            let bil = Billiard::build(kind, &table, None).unwrap();
            let sys = bil.system();
            let l = sys.period();
            let init: Vec<f64> = uniform_init(0.3, 5, 2, l)
                .iter()
                .enumerate()
                .map(|(i, t)| t + 0.01 * i as f64)
                .collect();
            let orbit =
                periodic_orbit_solve(sys, 5, 2, &init).unwrap_or_else(|e| panic!("{kind:?}: {e}"));
            let image = symmetry_image(bil.curve(), &orbit, &third).unwrap();
            let res = crate::twistmaps::gradient_residual(sys, &image, 2).unwrap();
            assert!(res < 1e-8, "{kind:?}: {res}");
        }
    }

    #[test]
    fn parallel_tangent_on_ellipse() {
        let e = ParamCurve::ellipse(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            parallel_tangent(&e, 0.3, true).unwrap(),
            0.3 + PI,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            parallel_tangent(&e, 0.3, false).unwrap(),
            0.3 - PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn symplectic_iteration_on_circle_doubles_arcs() {
        let c = ParamCurve::unit_circle();
        let s = symplectic_system(&c).unwrap();
        let x = PhasePoint::from_pair(&s, 0.0, 0.8).unwrap();
        let pts = iterate(&s, x, 5).unwrap();
        for (i, p) in pts.iter().enumerate() {
            assert_abs_diff_eq!(p.q, 0.8 * i as f64, epsilon = 1e-10);
        }
        let back = inverse_step(&s, pts[1]).unwrap();
        assert_abs_diff_eq!(back.q, 0.0, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn birkhoff_momentum_is_cosine(s in 0.0..6.0f64, d in 0.05..6.0f64) {
            let c = ellipse_arc();
            let sys = birkhoff_system(&c).unwrap();
            let l = sys.period();
            let (q, qq) = (s, s + d * l / 6.3);
            let u = (c.position(qq) - c.position(q)).normalize();
            let p = -sys.partials(q, qq).unwrap().0;
            prop_assert!((p - u.dot(&c.velocity(q))).abs() < 1e-9);
        }

        #[test]
        fn symplectic_circle_doubling(t in -3.0..3.0f64, d in 0.01..3.1f64) {
            let c = ParamCurve::unit_circle();
            let t2 = symplectic_next(&c, t, t + d).unwrap();
            prop_assert!((t2 - t - 2.0 * d).abs() < 1e-10);
        }

        #[test]
        fn outer_midpoint_property(r in 1.05..3.0f64, a in 0.0..6.2f64) {
            let c = SupportCurve::single_harmonic(1.0, 0.03, 2).unwrap().param_curve();
            let x = unit(a) * r * 1.1;
            let (y, t) = outer_map(&c, &x).unwrap();
            prop_assert!(((x + y) * 0.5 - c.position(t)).norm() < 1e-10);
        }
    }
}
