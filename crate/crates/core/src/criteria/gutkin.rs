//! Constant reflection angle and `tan(n x) = n tan(x)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::SupportCurve;
use crate::error::{Error, Result};
use crate::geom::{angle_between, gcd, perp, rotation, unit};
use crate::symmetry::{detect_invariance, INVARIANCE_THRESHOLD};

/// Samples of `psi` used for the deviation of the angle profile.
pub const PROFILE_SAMPLES: usize = 1024;
const POLE_TOL: f64 = 1e-9;

/// Angle between the tangent at `gamma(psi)` and the chord to `gamma(psi + 2 pi r / k)`.
#[derive(Debug, Clone)]
pub struct AngleProfile {
    curve: SupportCurve,
    shift: f64,
    pub target: f64,
    pub deviation: f64,
}

impl AngleProfile {
    pub fn angle(&self, psi: f64) -> f64 {
        let chord = self.curve.point(psi + self.shift) - self.curve.point(psi);
        angle_between(&perp(&unit(psi)), &chord)
    }

    /// Angle at the far end, between the chord and the tangent there.
    pub fn far_angle(&self, psi: f64) -> f64 {
        let chord = self.curve.point(psi + self.shift) - self.curve.point(psi);
        angle_between(&chord, &perp(&unit(psi + self.shift)))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GutkinReport {
    pub r: usize,
    pub k: usize,
    pub target: f64,
    pub deviation: f64,
    pub symmetry_residual: f64,
    pub constant: bool,
}

fn check_rk(r: usize, k: usize) -> Result<()> {
    if k < 2 || r == 0 || r >= k || gcd(r as i64, k as i64) != 1 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < r < k, gcd(r, k) = 1, got ({r}, {k})"
        )));
    }
    Ok(())
}

/// The profile `d(psi)` and `max |d(psi) - pi r / k|`.
pub fn gutkin_angle_profile(curve: &SupportCurve, r: usize, k: usize) -> Result<AngleProfile> {
    check_rk(r, k)?;
    let residual = detect_invariance(&curve.param_curve(), &rotation(2.0 * PI / k as f64))?;
    if residual > INVARIANCE_THRESHOLD {
        return Err(Error::NotSymmetric { residual });
    }
    let mut profile = AngleProfile {
        curve: curve.clone(),
        shift: 2.0 * PI * r as f64 / k as f64,
        target: PI * r as f64 / k as f64,
        deviation: 0.0,
    };
    profile.deviation = (0..PROFILE_SAMPLES)
        .into_par_iter()
        .map(|i| {
            (profile.angle(2.0 * PI * i as f64 / PROFILE_SAMPLES as f64) - profile.target).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(profile)
}

pub fn gutkin_report(curve: &SupportCurve, r: usize, k: usize) -> Result<GutkinReport> {
    let profile = gutkin_angle_profile(curve, r, k)?;
    let symmetry_residual =
        detect_invariance(&curve.param_curve(), &rotation(2.0 * PI / k as f64))?;
    Ok(GutkinReport {
        r,
        k,
        target: profile.target,
        deviation: profile.deviation,
        symmetry_residual,
        constant: profile.deviation < 1e-8,
    })
}

/// `tan(n x) - n tan(x)`.
pub fn gutkin_equation_residual(n: i64, x: f64) -> Result<f64> {
    if (n as f64 * x).cos().abs() < POLE_TOL || x.cos().abs() < POLE_TOL {
        return Err(Error::Pole(x));
    }
    Ok((n as f64 * x).tan() - n as f64 * x.tan())
}

/// Smallest `|tan(n x) - n tan x|` over reduced `x = p pi / q` in `(0, pi/2)`, `q <= q_max`.
/// Poles of `tan(n x)` are skipped.
pub fn rational_pi_root_scan(n: i64, q_max: i64) -> Result<f64> {
    if n < 2 || q_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 and q_max >= 2, got ({n}, {q_max})"
        )));
    }
    let best = (2..=q_max)
        .into_par_iter()
        .flat_map_iter(|q| {
            (1..)
                .take_while(move |p| 2 * p < q)
                .filter(move |p| gcd(*p, q) == 1)
                .map(move |p| (p, q))
        })
        .filter_map(|(p, q)| gutkin_equation_residual(n, PI * p as f64 / q as f64).ok())
        .map(f64::abs)
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// Smallest `|n| |sin x| - |sin n x|` over `samples` points of `[0, 2 pi)` with `|sin x| > 1e-3`.
pub fn sine_inequality_check(n: i64, samples: usize) -> Result<f64> {
    if n.abs() < 2 || samples == 0 {
        return Err(Error::InvalidArgument(format!(
            "need |n| >= 2 and samples > 0, got ({n}, {samples})"
        )));
    }
    let nf = n as f64;
    Ok((0..samples)
        .map(|j| 2.0 * PI * j as f64 / samples as f64)
        .filter(|x| x.sin().abs() > 1e-3)
        .map(|x| nf.abs() * x.sin().abs() - (nf * x).sin().abs())
        .fold(f64::INFINITY, f64::min))
}
