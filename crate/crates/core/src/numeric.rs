//! Scalar root finding and quadrature.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const ROOT_MAX_ITER: usize = 200;

/// Bracketed Newton iteration with bisection fallback.
///
/// `f` returns the value and derivative. The bracket `[lo, hi]` must contain a
/// sign change. Iterates until `|f| <= ftol` or the bracket shrinks below
/// `xtol`.
pub fn safeguarded_newton<F>(mut f: F, lo: f64, hi: f64, ftol: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo, hi);
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "root not bracketed: f({a:.6e}) = {fa:.3e}, f({b:.6e}) = {fb:.3e}"
        )));
    }
    // orient so that f(a) < 0 < f(b)
    let flip = fa > 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..ROOT_MAX_ITER {
        let (mut fx, dfx) = f(x);
        if flip {
            fx = -fx;
        }
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if (b - a).abs() <= xtol {
            return Ok(0.5 * (a + b));
        }
        let slope = if flip { -dfx } else { dfx };
        let newton = x - fx / slope;
        let next = if slope.is_finite() && slope != 0.0 && newton > a.min(b) && newton < a.max(b) {
            newton
        } else {
            0.5 * (a + b)
        };
        if next == x {
            // no representable progress left
            return Ok(x);
        }
        x = next;
    }
    let (fx, _) = f(x);
    Err(Error::NoConvergence {
        what: "bracketed root solve",
        iterations: ROOT_MAX_ITER,
        residual: fx.abs(),
    })
}

/// Bracketed root without derivatives (Illinois false position with bisection guard).
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidArgument(format!(
            "root not bracketed on [{a:.6e}, {b:.6e}]"
        )));
    }
    let mut side = 0i8;
    for it in 0..ROOT_MAX_ITER {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) || it % 8 == 7 {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 || (b - a).abs() <= xtol {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section minimization on `[lo, hi]`.
pub fn golden_min<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn legendre16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(16).unwrap()))
}

/// Composite 16-point Gauss-Legendre on `panels` equal panels.
pub fn integrate<F>(mut f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: FnMut(f64) -> f64,
{
    let rule = legendre16();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            rule.integrate(lo, lo + h, &mut f)
        })
        .sum()
}

/// Trapezoid rule on one period of a periodic integrand; spectrally accurate for smooth input.
pub fn periodic_trapezoid<F>(mut f: F, period: f64, nodes: usize) -> f64
where
    F: FnMut(f64) -> f64,
{
    let h = period / nodes as f64;
    (0..nodes).map(|i| f(i as f64 * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn newton_finds_cube_root() {
        let r =
            safeguarded_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-15, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_rejects_missing_bracket() {
        assert!(safeguarded_newton(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12, 1e-12).is_err());
    }

    #[test]
    fn false_position_handles_flat_tail() {
        let r = bracketed_root(|x| x.powi(9) - 1e-9, 0.0, 1.0, 1e-15).unwrap();
        assert!((r - 1e-1).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, _) = golden_min(|x| (x - 0.3).powi(2), -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn quadrature_rules() {
        let v = integrate(|x| x.sin(), 0.0, PI, 4);
        assert!((v - 2.0).abs() < 1e-14);
        let p = periodic_trapezoid(|t| 1.0 / (2.0 + t.cos()), 2.0 * PI, 64);
        assert!((p - 2.0 * PI / 3f64.sqrt()).abs() < 1e-13);
    }
}
