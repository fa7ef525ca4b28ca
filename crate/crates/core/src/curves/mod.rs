//! Convex curves: support functions, parametrized curves, gauge bodies and reparametrizations.

mod gauge;
mod ode;
mod param;
mod reparam;
mod spec;
mod support;
mod wulff;

pub use gauge::{Contact, Differential, GaugeBody, Polygon, RoundedPolygon};
pub use ode::{
    harmonic_constant, solve_periodic_ode, solve_periodic_ode_with_derivative, PeriodicSolution,
    ScalarFn, ODE_STEPS,
};
pub use param::{CurveSource, ParamCurve, Parametrization, RadialLocator};
pub use reparam::{
    affine_normalize, arc_length_reparametrize, gauge_arc_reparametrize, AffineNormalization,
};
pub use spec::ShapeSpec;
pub use support::{eval_support_curve, width, SupportCurve, DEFAULT_GRID, MAX_HARMONIC};
pub use wulff::WulffBody;

/// Gauge of `body` at `x`.
pub fn gauge(body: &GaugeBody, x: &crate::geom::Vec2) -> f64 {
    body.gauge(x)
}

/// Directional derivative of the gauge of `body` at `x` along `v`.
pub fn gauge_differential(
    body: &GaugeBody,
    x: &crate::geom::Vec2,
    v: &crate::geom::Vec2,
) -> crate::error::Result<Differential> {
    body.gauge_differential(x, v)
}
