use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{perp, unit, Jet, Vec2};
use crate::numeric::safeguarded_newton;

use super::param::{CurveSource, ParamCurve, Parametrization};
use super::support::SupportCurve;

const TABLE: usize = 2048;
const SCAN: usize = 4096;
const LOCAL_SCAN: usize = 24;

/// Convex body `{x : <x, n(psi)> <= h(psi) for all psi}` for a positive
/// trigonometric polynomial `h`.
///
/// When `h + h''` changes sign the boundary consists of envelope arcs joined
/// at corners, and the true support function of the body is smaller than `h`
/// near those corners. The gauge is `max_psi <x, n(psi)> / h(psi)`.
#[derive(Debug, Clone)]
pub struct WulffBody {
    data: SupportCurve,
    /// Maximizing normal angle for the polar angles `2 pi i / TABLE`, unwrapped.
    table: Vec<f64>,
}

impl WulffBody {
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let data = SupportCurve::support_data(mean, cos, sin)?;
        let min = data.min_support();
        if min <= 0.0 {
            return Err(Error::OriginNotInterior(format!("min support {min:.3e}")));
        }
        let hs: Vec<f64> = (0..SCAN)
            .map(|j| data.h(2.0 * PI * j as f64 / SCAN as f64))
            .collect();
        let mut body = WulffBody {
            data,
            table: Vec::with_capacity(TABLE + 1),
        };
        for i in 0..TABLE {
            let theta = 2.0 * PI * i as f64 / TABLE as f64;
            let x = unit(theta);
            let j = (0..SCAN)
                .map(|j| ((2.0 * PI * j as f64 / SCAN as f64 - theta).cos() / hs[j], j))
                .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
                .1;
            let guess = 2.0 * PI * j as f64 / SCAN as f64;
            let (_, psi) = body.local_max(&x, guess, 2.0 * PI / SCAN as f64);
            // keep psi within a quarter turn of theta so the table is monotone
            let psi = theta + (psi - theta + PI).rem_euclid(2.0 * PI) - PI;
            body.table.push(psi);
        }
        let first = body.table[0];
        body.table.push(first + 2.0 * PI);
        Ok(body)
    }

    pub fn data(&self) -> &SupportCurve {
        &self.data
    }

    fn phi(&self, x: &Vec2, psi: f64) -> f64 {
        x.dot(&unit(psi)) / self.data.h(psi)
    }

    /// Local maximum of `<x, n(psi)> / h(psi)` within `radius` of `guess`.
    fn local_max(&self, x: &Vec2, guess: f64, radius: f64) -> (f64, f64) {
        let step = 2.0 * radius / LOCAL_SCAN as f64;
        let (mut best, mut arg) = (f64::NEG_INFINITY, guess);
        for k in 0..=LOCAL_SCAN {
            let psi = guess - radius + k as f64 * step;
            let v = self.phi(x, psi);
            if v > best {
                best = v;
                arg = psi;
            }
        }
        let (lo, hi) = (arg - step, arg + step);
        if self.dphi(x, lo).0 > 0.0 && self.dphi(x, hi).0 < 0.0 {
            if let Ok(psi) =
                safeguarded_newton(|p| self.dphi(x, p), lo, hi, 1e-15 * x.norm(), 1e-15)
            {
                let v = self.phi(x, psi);
                if v >= best {
                    return (v, psi);
                }
            }
        }
        (best, arg)
    }

    /// First and second derivative of `phi` in `psi`.
    fn dphi(&self, x: &Vec2, psi: f64) -> (f64, f64) {
        let [h, h1, h2, _] = self.data.derivatives(psi);
        let n = unit(psi);
        let (a, a1) = (x.dot(&n), x.dot(&perp(&n)));
        let d1 = (a1 * h - a * h1) / (h * h);
        let d2 = ((-a * h - a * h2) * h - 2.0 * h1 * (a1 * h - a * h1)) / (h * h * h);
        (d1, d2)
    }

    /// Maximum near a sampled peak: Newton inside the bracket of its neighbours,
    /// with a local rescan when the bracket does not hold a sign change.
    fn polish(&self, x: &Vec2, center: f64, step: f64) -> (f64, f64) {
        let (lo, hi) = (center - step, center + step);
        if self.dphi(x, lo).0 > 0.0 && self.dphi(x, hi).0 < 0.0 {
            if let Ok(psi) =
                safeguarded_newton(|p| self.dphi(x, p), lo, hi, 1e-15 * x.norm(), 1e-15)
            {
                let v = self.phi(x, psi);
                if v >= self.phi(x, center) {
                    return (v, psi);
                }
            }
        }
        self.local_max(x, center, step)
    }

    /// Gauge of `x` and the normal angle of the supporting line at `x / g(x)`.
    pub fn contact(&self, x: &Vec2) -> (f64, f64) {
        let theta = x.y.atan2(x.x).rem_euclid(2.0 * PI);
        let i = ((theta / (2.0 * PI) * TABLE as f64) as usize).min(TABLE - 1);
        // the maximizer is monotone in theta, so it lies between the two table entries
        let (a, b) = (self.table[i], self.table[i + 1]);
        let pad = 4.0 * PI / TABLE as f64;
        let (lo, hi) = (a.min(b) - pad, a.max(b) + pad);
        let n = (((hi - lo) / (PI / TABLE as f64)).ceil() as usize).max(16);
        let step = (hi - lo) / n as f64;
        let vals: Vec<f64> = (0..=n).map(|k| self.phi(x, lo + k as f64 * step)).collect();
        let mut peaks: Vec<usize> = (0..=n)
            .filter(|&k| (k == 0 || vals[k] >= vals[k - 1]) && (k == n || vals[k] >= vals[k + 1]))
            .collect();
        peaks.sort_by(|p, q| vals[*q].total_cmp(&vals[*p]));
        // a sampled peak is within ~1e-6 |x| of its maximum at this spacing,
        // so a clearly lower second peak cannot win
        let top = vals[peaks[0]];
        peaks
            .iter()
            .take(2)
            .filter(|&&k| vals[k] >= top - 1e-4 * top.abs())
            .map(|&k| self.polish(x, lo + k as f64 * step, step))
            .fold(
                (f64::NEG_INFINITY, 0.0),
                |acc, c| if c.0 > acc.0 { c } else { acc },
            )
    }

    pub fn gauge(&self, x: &Vec2) -> f64 {
        if x.norm() == 0.0 {
            return 0.0;
        }
        self.contact(x).0
    }

    pub fn gradient(&self, x: &Vec2) -> Vec2 {
        let (_, psi) = self.contact(x);
        unit(psi) / self.data.h(psi)
    }

    /// Support function of the body (not of the data where they differ).
    pub fn support(&self, psi: f64) -> f64 {
        // the boundary is sampled densely enough that the max over the
        // polar table, polished locally, is exact
        let n = unit(psi);
        let best = (0..TABLE)
            .map(|i| {
                let u = unit(2.0 * PI * i as f64 / TABLE as f64);
                (u.dot(&n) / self.gauge(&u), i)
            })
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
        let c = 2.0 * PI * best.1 as f64 / TABLE as f64;
        let step = 2.0 * PI / TABLE as f64;
        let (_, v) = crate::numeric::golden_min(
            |t| -unit(t).dot(&n) / self.gauge(&unit(t)),
            c - step,
            c + step,
            1e-12,
        );
        -v
    }

    /// Boundary in polar parametrization, period `2 pi`.
    pub fn boundary_curve(&self) -> ParamCurve {
        ParamCurve::new(
            Arc::new(WulffBoundary(self.clone())),
            2.0 * PI,
            Parametrization::Custom,
        )
    }
}

#[derive(Debug, Clone)]
struct WulffBoundary(WulffBody);

impl CurveSource for WulffBoundary {
    fn jet(&self, theta: f64) -> Jet {
        let u = unit(theta);
        let (g, psi) = self.0.contact(&u);
        let rho = 1.0 / g;
        let [h, h1, h2, _] = self.0.data.derivatives(psi);
        let n = unit(psi);
        let nt = perp(&n);
        let r2h = rho * rho / h;
        let psi_t = r2h / (h + h2);
        let rho_t = r2h * nt.dot(&u);
        let dd = 2.0 * rho * rho_t / h - rho * rho * h1 * psi_t / (h * h);
        Jet {
            pos: u * rho,
            d1: nt * r2h,
            d2: nt * dd - n * (r2h * psi_t),
        }
    }
}
