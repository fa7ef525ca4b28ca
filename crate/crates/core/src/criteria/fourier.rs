//! Fourier-coefficient conditions for invariant curves of outer and symplectic billiards.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::curves::{affine_normalize, solve_periodic_ode, ParamCurve, Parametrization};
use crate::error::{Error, Result};
use crate::geom::{det, gcd, Mat2};
use crate::symmetry::conjugate_to_rotation;

/// Harmonics kept in the reports.
pub const HARMONICS: usize = 64;
/// Quadrature nodes for the coefficients.
pub const FOURIER_NODES: usize = 4096;
/// Relative size above which a harmonic counts as present.
pub const HARMONIC_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-8;
const CHECK_SAMPLES: usize = 1024;

/// Coefficients `c_n`, `|n| <= n_max`, of `gamma(t) = sum c_n e^{i n t}` viewed as a complex function.
#[derive(Debug, Clone, Serialize)]
pub struct FourierSeries {
    pub n_max: usize,
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n + self.n_max as i64) as usize]
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let n = self.n_max as i64;
        -n..=n
    }
}

/// Trapezoid rule on [`FOURIER_NODES`] points; spectrally accurate for smooth curves.
pub fn fourier_coefficients(curve: &ParamCurve, n_max: usize) -> Result<FourierSeries> {
    if (curve.period() - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::PeriodNot2Pi(curve.period()));
    }
    let m = FOURIER_NODES.max(4 * n_max + 1);
    let samples: Vec<(f64, Complex64)> = (0..m)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / m as f64;
            let p = curve.position(t);
            (t, Complex64::new(p.x, p.y))
        })
        .collect();
    let coeffs = (-(n_max as i64)..=n_max as i64)
        .map(|n| {
            samples
                .iter()
                .map(|(t, z)| z * Complex64::cis(-(n as f64) * t))
                .sum::<Complex64>()
                / m as f64
        })
        .collect();
    Ok(FourierSeries { n_max, coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FourierKind {
    Outer,
    Symplectic,
}

#[derive(Debug, Clone, Serialize)]
pub struct OffendingHarmonic {
    pub n: i64,
    /// `|c_n| / (|c_1| + |c_{-1}|)`.
    pub relative_size: f64,
    /// `|tan(pi r n / k) - n tan(pi r / k)|` or `|sin(2 pi r n / k) - n sin(2 pi r / k)|`.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FourierReport {
    pub kind: FourierKind,
    pub r: usize,
    pub k: usize,
    pub verdict: String,
    pub lambda_expected: f64,
    pub lambda_fourier: f64,
    pub lambda_fourier_imag: f64,
    pub lambda_ode: f64,
    /// Largest `|c_n| / (|c_1| + |c_{-1}|)` over `|n| >= 2`.
    pub max_higher_harmonic: f64,
    pub c0: f64,
    pub c1: f64,
    pub c_minus1: f64,
    pub offending: Vec<OffendingHarmonic>,
    /// `max |nu(t + 2 pi r / k) - B nu(t)|` in the affine-normalized parametrization.
    pub symmetry_residual: f64,
    /// Spread of `|C^{-1} mu(t)|` with `B = C R C^{-1}`.
    pub conjugated_radius_spread: f64,
    pub matrix: [[f64; 2]; 2],
}

impl FourierReport {
    pub fn consistent(&self) -> bool {
        self.offending.is_empty()
    }
}

fn harmonic_residual(kind: FourierKind, r: usize, k: usize, n: i64) -> f64 {
    let x = PI * r as f64 / k as f64;
    let nf = n as f64;
    match kind {
        FourierKind::Outer => ((nf * x).tan() - nf * x.tan()).abs(),
        FourierKind::Symplectic => ((2.0 * nf * x).sin() - nf * (2.0 * x).sin()).abs(),
    }
}

/// Outer billiard: `tan(pi r n / k) = lambda n` for every harmonic present.
pub fn outer_fourier_check(curve: &ParamCurve, r: usize, k: usize) -> Result<FourierReport> {
    fourier_check(FourierKind::Outer, curve, r, k)
}

/// Symplectic billiard: `2 sin(2 pi r n / k) = lambda n` for every harmonic present.
pub fn symplectic_fourier_check(curve: &ParamCurve, r: usize, k: usize) -> Result<FourierReport> {
    fourier_check(FourierKind::Symplectic, curve, r, k)
}

fn fourier_check(
    kind: FourierKind,
    curve: &ParamCurve,
    r: usize,
    k: usize,
) -> Result<FourierReport> {
    if k < 3 || r == 0 || 2 * r >= k || gcd(r as i64, k as i64) != 1 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < r < k/2, gcd(r, k) = 1, got ({r}, {k})"
        )));
    }
    let nu = affine_normalize(curve)?.curve;
    let theta = 2.0 * PI * r as f64 / k as f64;

    // B is pinned down by two pairs of points; the relation is then checked everywhere.
    let from = Mat2::from_columns(&[nu.position(0.0), nu.position(PI / 2.0)]);
    let to = Mat2::from_columns(&[nu.position(theta), nu.position(PI / 2.0 + theta)]);
    let inv = from
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("degenerate sample points".into()))?;
    let b = to * inv;
    let symmetry_residual = (0..CHECK_SAMPLES)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / CHECK_SAMPLES as f64;
            (nu.position(t + theta) - b * nu.position(t)).norm()
        })
        .fold(0.0, f64::max);
    if symmetry_residual > SYMMETRY_TOL {
        return Err(Error::NotSymmetric {
            residual: symmetry_residual,
        });
    }
    let map = conjugate_to_rotation(&b, k)?;

    let nu_g = nu.clone();
    let g: Box<dyn Fn(f64) -> f64 + Send + Sync> = match kind {
        FourierKind::Outer => Box::new(move |t| {
            let j = nu_g.jet(t);
            det(&(b * j.pos - j.pos), &j.d1) / det(&(b * j.d1), &j.d1)
        }),
        FourierKind::Symplectic => {
            Box::new(move |t| -2.0 * det(&(b * nu_g.position(t)), &nu_g.position(t)))
        }
    };
    let g_min = (0..CHECK_SAMPLES)
        .map(|i| g(2.0 * PI * i as f64 / CHECK_SAMPLES as f64))
        .fold(f64::INFINITY, f64::min);
    if !(g_min > 0.0) {
        return Err(Error::NonPositive(g_min));
    }
    let sol = solve_periodic_ode(g, 2.0 * PI)?;
    let lambda_ode = sol.a();
    let mu = nu.reparametrized(sol, Parametrization::Custom);

    let series = fourier_coefficients(&mu, HARMONICS)?;
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for n in series.indices() {
        let c = series.get(n);
        let e = Complex64::cis(theta * n as f64);
        let i_n = Complex64::new(0.0, n as f64);
        let (a_n, b_n) = match kind {
            FourierKind::Outer => (c * (e - 1.0), i_n * c * (e + 1.0)),
            FourierKind::Symplectic => (c * (e - e.conj()), i_n * c),
        };
        num += b_n.conj() * a_n;
        den += b_n.norm_sqr();
    }
    let lambda = num / den;

    let base = series.get(1).norm() + series.get(-1).norm();
    let mut max_higher: f64 = 0.0;
    let mut offending = Vec::new();
    for n in series.indices().filter(|n| n.abs() >= 2) {
        let rel = series.get(n).norm() / base;
        max_higher = max_higher.max(rel);
        if rel > HARMONIC_TOL {
            offending.push(OffendingHarmonic {
                n,
                relative_size: rel,
                residual: harmonic_residual(kind, r, k, n),
            });
        }
    }

    let c_inv = map
        .conjugator()
        .try_inverse()
        .expect("conjugator is invertible");
    let radii: Vec<f64> = (0..CHECK_SAMPLES)
        .map(|i| (c_inv * mu.position(2.0 * PI * i as f64 / CHECK_SAMPLES as f64)).norm())
        .collect();
    let spread = radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - radii.iter().cloned().fold(f64::INFINITY, f64::min);

    let lambda_expected = match kind {
        FourierKind::Outer => (theta / 2.0).tan(),
        FourierKind::Symplectic => 2.0 * theta.sin(),
    };
    let verdict = if offending.is_empty() {
        "ellipse-consistent"
    } else {
        "not-ellipse-consistent"
    };
    Ok(FourierReport {
        kind,
        r,
        k,
        verdict: verdict.into(),
        lambda_expected,
        lambda_fourier: lambda.re,
        lambda_fourier_imag: lambda.im,
        lambda_ode,
        max_higher_harmonic: max_higher,
        c0: series.get(0).norm(),
        c1: series.get(1).norm(),
        c_minus1: series.get(-1).norm(),
        offending,
        symmetry_residual,
        conjugated_radius_spread: spread,
        matrix: [[b[(0, 0)], b[(0, 1)]], [b[(1, 0)], b[(1, 1)]]],
    })
}
