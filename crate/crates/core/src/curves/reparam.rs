use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::det;

use super::gauge::GaugeBody;
use super::ode::solve_periodic_ode_with_derivative;
use super::param::{ParamCurve, Parametrization};

const SIGN_SAMPLES: usize = 1024;

/// Result of [`affine_normalize`]: the new curve and the homothety factor applied.
#[derive(Debug, Clone)]
pub struct AffineNormalization {
    pub curve: ParamCurve,
    pub scale: f64,
}

/// Reparametrizes and rescales so that `det(gamma, gamma') = 1` with period `2 pi`.
///
/// Solves `a f' = 1 / D(f)` with `D = det(gamma, gamma')`; then `gamma o f` has
/// constant `det = 1/a` and a homothety by `sqrt(2 pi a / L)` fixes both constants.
pub fn affine_normalize(curve: &ParamCurve) -> Result<AffineNormalization> {
    let l = curve.period();
    let min = (0..SIGN_SAMPLES)
        .map(|i| {
            let j = curve.jet(l * i as f64 / SIGN_SAMPLES as f64);
            det(&j.pos, &j.d1)
        })
        .fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::OriginNotInterior(format!(
            "det(gamma, gamma') reaches {min:.3e}"
        )));
    }
    let (c1, c2) = (curve.clone(), curve.clone());
    let g = move |t: f64| {
        let j = c1.jet(t);
        1.0 / det(&j.pos, &j.d1)
    };
    let dg = move |t: f64| {
        let j = c2.jet(t);
        let d = det(&j.pos, &j.d1);
        -det(&j.pos, &j.d2) / (d * d)
    };
    let sol = solve_periodic_ode_with_derivative(g, dg, l)?;
    let scale = (2.0 * PI * sol.a() / l).sqrt();
    let mu = curve.reparametrized(sol, Parametrization::Custom);
    let normalized = mu.rescaled(scale, l / (2.0 * PI), Parametrization::AffineNormalized);
    Ok(AffineNormalization {
        curve: normalized,
        scale,
    })
}

/// Reparametrizes so that `g_K(gamma') = 1`; the new period is the gauge perimeter.
pub fn gauge_arc_reparametrize(curve: &ParamCurve, body: &GaugeBody) -> Result<ParamCurve> {
    let (c1, c2) = (curve.clone(), curve.clone());
    let (b1, b2) = (body.clone(), body.clone());
    let g = move |t: f64| 1.0 / b1.gauge(&c1.velocity(t));
    let dg = move |t: f64| {
        let j = c2.jet(t);
        let n = b2.gauge(&j.d1);
        let d = b2
            .gauge_differential(&j.d1, &j.d2)
            .map(|d| d.value)
            .unwrap_or(f64::NAN);
        -d / (n * n)
    };
    let sol = solve_periodic_ode_with_derivative(g, dg, curve.period())?;
    let a = sol.a();
    let kind = if body.is_euclidean() {
        Parametrization::EuclideanArc
    } else {
        Parametrization::GaugeArc
    };
    Ok(curve
        .reparametrized(sol, Parametrization::Custom)
        .rescaled(1.0, a, kind))
}

/// Arc-length parametrization.
pub fn arc_length_reparametrize(curve: &ParamCurve) -> Result<ParamCurve> {
    if curve.kind() == Parametrization::EuclideanArc {
        return Ok(curve.clone());
    }
    gauge_arc_reparametrize(curve, &GaugeBody::disc())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{Polygon, SupportCurve};
    use crate::geom::Vec2;

    fn max_det_error(c: &ParamCurve) -> f64 {
        (0..200)
            .map(|i| {
                let j = c.jet(c.period() * (i as f64 + 0.5) / 200.0);
                (det(&j.pos, &j.d1) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn circle_is_fixed() {
        let n = affine_normalize(&ParamCurve::unit_circle()).unwrap();
        assert!((n.scale - 1.0).abs() < 1e-12);
        for i in 0..10 {
            let t = i as f64 * 0.6;
            assert!((n.curve.position(t) - ParamCurve::unit_circle().position(t)).norm() < 1e-10);
        }
    }

    #[test]
    fn ellipse_normalization() {
        let n = affine_normalize(&ParamCurve::ellipse(2.0, 1.0).unwrap()).unwrap();
        assert!((n.scale - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((n.curve.period() - 2.0 * PI).abs() < 1e-15);
        assert!(max_det_error(&n.curve) < 1e-10);
        // the normalized ellipse is (sqrt2 cos t, sin t / sqrt2)
        let p = n.curve.position(0.8);
        assert!(
            (p - Vec2::new(2f64.sqrt() * 0.8f64.cos(), 0.8f64.sin() / 2f64.sqrt())).norm() < 1e-10
        );
    }

    #[test]
    fn radius_two_circle_and_idempotence() {
        let c = SupportCurve::circle(2.0).param_curve();
        let n = affine_normalize(&c).unwrap();
        assert!(max_det_error(&n.curve) < 1e-10);
        let wavy = SupportCurve::new(1.0, vec![0.0, 0.04, 0.02], vec![0.03])
            .unwrap()
            .param_curve();
        let once = affine_normalize(&wavy).unwrap().curve;
        assert!(max_det_error(&once) < 1e-9);
        let twice = affine_normalize(&once).unwrap().curve;
        for i in 0..50 {
            let t = i as f64 * 0.125;
            assert!((once.position(t) - twice.position(t)).norm() < 1e-9);
        }
    }

    #[test]
    fn gauge_arc_of_circle_in_disc() {
        let c = gauge_arc_reparametrize(&ParamCurve::unit_circle(), &GaugeBody::disc()).unwrap();
        assert_eq!(c.kind(), Parametrization::EuclideanArc);
        assert!((c.period() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gauge_arc_of_circle_in_square_norm() {
        let square = GaugeBody::polygon(vec![
            Vec2::new(1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
        ])
        .unwrap();
        let c = gauge_arc_reparametrize(&ParamCurve::unit_circle(), &square).unwrap();
        // oracle: integral of max(|sin t|, |cos t|) over a period
        let want = crate::numeric::integrate(
            |t: f64| t.sin().abs().max(t.cos().abs()),
            0.0,
            2.0 * PI,
            512,
        );
        assert!((c.period() - want).abs() < 1e-6, "{} vs {want}", c.period());
        for i in 0..64 {
            let v = c.velocity(c.period() * (i as f64 + 0.3) / 64.0);
            assert!((square.gauge(&v) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rounded_square_self_perimeter_is_near_eight() {
        let base = Polygon::regular(4, 2f64.sqrt(), PI / 4.0).unwrap();
        let body = GaugeBody::rounded_polygon(base, 0.05).unwrap();
        let c = gauge_arc_reparametrize(&body.boundary_curve().unwrap(), &body).unwrap();
        assert!((c.period() - 8.0).abs() < 0.16, "{}", c.period());
    }

    #[test]
    fn ellipse_arc_length_period() {
        let c = arc_length_reparametrize(&ParamCurve::ellipse(2.0, 1.0).unwrap()).unwrap();
        let want = ParamCurve::ellipse(2.0, 1.0).unwrap().length();
        assert!((c.period() - want).abs() < 1e-10);
        for i in 0..32 {
            assert!((c.velocity(i as f64 * 0.3).norm() - 1.0).abs() < 1e-10);
        }
    }
}
