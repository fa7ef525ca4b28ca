//! Exact twist maps given by a generating function: stepping, orbits,
//! rotation numbers and the variational solver for periodic orbits.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::gcd;
use crate::numeric::{bracketed_root, safeguarded_newton};

/// Relative offset from the band ends where `S_1` is sampled to bracket a step.
const BAND_EPS: f64 = 1e-8;
/// Gradient residual required of every member in [`mather_constancy`].
pub const MEMBER_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 80;

/// A cylinder map `(q, p) -> (Q, P)` with `p = -S_1(q, Q)` and `P = S_2(q, Q)`.
///
/// Parameters are lifts to the real line; `S(q + L, Q + L) = S(q, Q)`.
pub trait TwistSystem: Send + Sync {
    fn name(&self) -> &'static str;

    /// Horizontal period `L`.
    fn period(&self) -> f64;

    /// Open interval of admissible `Q - q` for a given `q`.
    fn band(&self, q: f64) -> Result<(f64, f64)>;

    /// Open interval of admissible `Q - q` for a given `Q`.
    fn back_band(&self, qq: f64) -> Result<(f64, f64)> {
        self.band(qq)
    }

    fn generating(&self, q: f64, qq: f64) -> Result<f64>;

    /// `(S_1, S_2)`.
    fn partials(&self, q: f64, qq: f64) -> Result<(f64, f64)>;

    /// `(S_11, S_12, S_22)`; central differences of [`TwistSystem::partials`] by default.
    fn second_partials(&self, q: f64, qq: f64) -> Result<[f64; 3]> {
        let h = 1e-6 * self.period();
        let (a1, _) = self.partials(q + h, qq)?;
        let (b1, _) = self.partials(q - h, qq)?;
        let (c1, c2) = self.partials(q, qq + h)?;
        let (d1, d2) = self.partials(q, qq - h)?;
        Ok([
            (a1 - b1) / (2.0 * h),
            (c1 - d1) / (2.0 * h),
            (c2 - d2) / (2.0 * h),
        ])
    }
}

/// Point of the phase cylinder; `q` is kept as a lift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        PhasePoint { q, p }
    }

    /// Phase point leaving `q` towards `qq`.
    pub fn from_pair(sys: &dyn TwistSystem, q: f64, qq: f64) -> Result<Self> {
        Ok(PhasePoint {
            q,
            p: -sys.partials(q, qq)?.0,
        })
    }
}

fn inside(low: f64, high: f64) -> (f64, f64) {
    let eps = BAND_EPS * (high - low).min(1e3);
    (low + eps, high - eps)
}

/// One application of the map.
pub fn twist_step(sys: &dyn TwistSystem, x: PhasePoint) -> Result<PhasePoint> {
    let PhasePoint { q, p } = x;
    let (low, high) = sys.band(q)?;
    let (lo, hi) = inside(low, high);
    let m_lo = -sys.partials(q, q + lo)?.0;
    let m_hi = -sys.partials(q, q + hi)?.0;
    if !((p - m_lo) * (p - m_hi) < 0.0) {
        return Err(Error::OutsideBand {
            q,
            momentum: p,
            low: m_lo.min(m_hi),
            high: m_lo.max(m_hi),
        });
    }
    let sign = (m_lo - m_hi).signum();
    // a missing derivative makes the root finder bisect
    let f = |d: f64| match sys.partials(q, q + d) {
        Ok((s1, _)) => (
            s1 + p,
            sys.second_partials(q, q + d).map_or(f64::NAN, |h| h[1]),
        ),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let d = safeguarded_newton(f, lo, hi, 1e-15 * (1.0 + p.abs()), 1e-16 * sys.period())?;
    let qq = q + d;
    if sys.second_partials(q, qq).is_ok_and(|h| h[1] * sign <= 0.0) {
        return Err(Error::TwistViolated { q, q_next: qq });
    }
    Ok(PhasePoint {
        q: qq,
        p: sys.partials(q, qq)?.1,
    })
}

/// Inverse of [`twist_step`]: solves `S_2(q, Q) = P` for `q`.
pub fn inverse_step(sys: &dyn TwistSystem, x: PhasePoint) -> Result<PhasePoint> {
    let PhasePoint { q: qq, p: pp } = x;
    let (low, high) = sys.back_band(qq)?;
    let (lo, hi) = inside(low, high);
    // d = Q - q
    let m_lo = sys.partials(qq - lo, qq)?.1;
    let m_hi = sys.partials(qq - hi, qq)?.1;
    if !((pp - m_lo) * (pp - m_hi) < 0.0) {
        return Err(Error::OutsideBand {
            q: qq,
            momentum: pp,
            low: m_lo.min(m_hi),
            high: m_lo.max(m_hi),
        });
    }
    let f = |d: f64| match sys.partials(qq - d, qq) {
        Ok((_, s2)) => (
            s2 - pp,
            sys.second_partials(qq - d, qq).map_or(f64::NAN, |h| -h[1]),
        ),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let d = safeguarded_newton(f, lo, hi, 1e-15 * (1.0 + pp.abs()), 1e-16 * sys.period())?;
    let q = qq - d;
    Ok(PhasePoint {
        q,
        p: -sys.partials(q, qq)?.0,
    })
}

/// The start followed by `n` successive images.
pub fn iterate(sys: &dyn TwistSystem, x: PhasePoint, n: usize) -> Result<Vec<PhasePoint>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(x);
    let mut cur = x;
    for step in 1..=n {
        cur = twist_step(sys, cur).map_err(|e| e.at_step(step))?;
        out.push(cur);
    }
    Ok(out)
}

/// Rotation number estimate and its error bound.
///
/// The estimate is `(q_n - q_0) / (n L)`. A lift of a monotone circle map
/// satisfies `|q_n - q_0 - n rho L| < L`, so the bound is `1 / n`.
pub fn rotation_number(sys: &dyn TwistSystem, x: PhasePoint, n: usize) -> Result<(f64, f64)> {
    if n < 100 {
        return Err(Error::InvalidArgument(format!(
            "rotation number needs n >= 100, got {n}"
        )));
    }
    let l = sys.period();
    let mut cur = x;
    for step in 1..=n {
        cur = twist_step(sys, cur).map_err(|e| e.at_step(step))?;
    }
    Ok(((cur.q - x.q) / (n as f64 * l), 1.0 / n as f64))
}

/// A `(k, r)`-periodic configuration `t_0 < ... < t_{k-1}`, `t_{i+k} = t_i + r L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub params: Vec<f64>,
    pub winding: i64,
    pub period: f64,
    pub action: f64,
    pub gradient_residual: f64,
    /// `S(t_i, t_{i+1})` for each link.
    pub chord_values: Vec<f64>,
}

impl PeriodicOrbit {
    /// Evaluates action and residual of a configuration without solving.
    pub fn evaluate(sys: &dyn TwistSystem, params: Vec<f64>, winding: i64) -> Result<Self> {
        let period = sys.period();
        let chord_values = links(&params, winding, period)
            .map(|(a, b)| sys.generating(a, b))
            .collect::<Result<Vec<_>>>()?;
        let gradient_residual = gradient(sys, &params, winding)?.amax();
        Ok(PeriodicOrbit {
            action: chord_values.iter().sum(),
            params,
            winding,
            period,
            gradient_residual,
            chord_values,
        })
    }

    pub fn k(&self) -> usize {
        self.params.len()
    }

    /// Lifted parameter `t_i` for any integer `i`.
    pub fn lifted(&self, i: i64) -> f64 {
        let k = self.k() as i64;
        let (turns, j) = (i.div_euclid(k), i.rem_euclid(k));
        self.params[j as usize] + (turns * self.winding) as f64 * self.period
    }

    /// Phase point at the `i`-th bounce.
    pub fn phase_point(&self, sys: &dyn TwistSystem, i: i64) -> Result<PhasePoint> {
        PhasePoint::from_pair(sys, self.lifted(i), self.lifted(i + 1))
    }

    /// Same orbit starting from its `j`-th point.
    pub fn relabeled(&self, j: usize) -> PeriodicOrbit {
        let k = self.k();
        let mut out = self.clone();
        out.params = (0..k).map(|i| self.lifted((i + j) as i64)).collect();
        out.chord_values = (0..k).map(|i| self.chord_values[(i + j) % k]).collect();
        out
    }
}

fn links(params: &[f64], winding: i64, period: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let k = params.len();
    (0..k).map(move |i| {
        let next = if i + 1 < k {
            params[i + 1]
        } else {
            params[0] + winding as f64 * period
        };
        (params[i], next)
    })
}

fn neighbours(params: &[f64], winding: i64, period: f64, i: usize) -> (f64, f64, f64) {
    let k = params.len();
    let shift = winding as f64 * period;
    let prev = if i == 0 {
        params[k - 1] - shift
    } else {
        params[i - 1]
    };
    let next = if i + 1 == k {
        params[0] + shift
    } else {
        params[i + 1]
    };
    (prev, params[i], next)
}

/// `F_i = S_2(t_{i-1}, t_i) + S_1(t_i, t_{i+1})`, the gradient of the periodic action.
pub fn gradient(sys: &dyn TwistSystem, params: &[f64], winding: i64) -> Result<DVector<f64>> {
    let l = sys.period();
    let mut out = DVector::zeros(params.len());
    for i in 0..params.len() {
        let (a, b, c) = neighbours(params, winding, l, i);
        out[i] = sys.partials(a, b)?.1 + sys.partials(b, c)?.0;
    }
    Ok(out)
}

/// `max_i |F_i|`.
pub fn gradient_residual(sys: &dyn TwistSystem, params: &[f64], winding: i64) -> Result<f64> {
    Ok(gradient(sys, params, winding)?.amax())
}

/// Sum of `S` over the links of the configuration.
pub fn action(sys: &dyn TwistSystem, orbit: &PeriodicOrbit) -> Result<f64> {
    links(&orbit.params, orbit.winding, sys.period())
        .map(|(a, b)| sys.generating(a, b))
        .sum()
}

fn hessian(sys: &dyn TwistSystem, params: &[f64], winding: i64) -> Result<DMatrix<f64>> {
    let k = params.len();
    let l = sys.period();
    let mut j = DMatrix::zeros(k, k);
    for i in 0..k {
        let (a, b, c) = neighbours(params, winding, l, i);
        let [_, p12, p22] = sys.second_partials(a, b)?;
        let [n11, n12, _] = sys.second_partials(b, c)?;
        j[(i, (i + k - 1) % k)] += p12;
        j[(i, i)] += p22 + n11;
        j[(i, (i + 1) % k)] += n12;
    }
    Ok(j)
}

fn admissible(sys: &dyn TwistSystem, params: &[f64], winding: i64) -> bool {
    links(params, winding, sys.period()).all(|(a, b)| match sys.band(a) {
        Ok((lo, hi)) => b - a > lo && b - a < hi,
        Err(_) => false,
    })
}

const SVD_CUTOFFS: [f64; 4] = [1e-10, 1e-7, 1e-4, 1e-2];

/// Uniformly spaced start `t_i = t_0 + i r L / k`.
pub fn uniform_init(t0: f64, k: usize, winding: i64, period: f64) -> Vec<f64> {
    (0..k)
        .map(|i| t0 + i as f64 * winding as f64 * period / k as f64)
        .collect()
}

/// Newton iteration on the cyclic critical-point equations of `sum S(t_i, t_{i+1})`.
///
/// Steps use the pseudo-inverse of the cyclic tridiagonal Hessian (the
/// Hessian is singular along invariant families) with backtracking on
/// `|F|^2`. When no Newton step stays in the monotone cone, a projected
/// gradient step on `|F|^2` is tried instead.
pub fn periodic_orbit_solve(
    sys: &dyn TwistSystem,
    k: usize,
    winding: i64,
    init: &[f64],
) -> Result<PeriodicOrbit> {
    if k < 2 || winding < 1 || gcd(winding, k as i64) != 1 {
        return Err(Error::InvalidArgument(format!(
            "need k >= 2, r >= 1 and gcd(r, k) = 1, got ({k}, {winding})"
        )));
    }
    if init.len() != k {
        return Err(Error::InvalidArgument(format!(
            "init has {} entries, expected {k}",
            init.len()
        )));
    }
    let mut t: Vec<f64> = init.to_vec();
    if !admissible(sys, &t, winding) {
        return Err(Error::LostMonotonicity(
            "initial configuration is not admissible".into(),
        ));
    }
    let norm2 = |v: &DVector<f64>| v.norm_squared();
    let mut f = gradient(sys, &t, winding)?;
    let mut iterations = 0;
    while f.amax() > 1e-13 && iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let j = hessian(sys, &t, winding)?;
        let svd = j.clone().svd(true, true);
        let smax = svd.singular_values.max();
        // Coarser truncations drop the soft mode along a nearly invariant family,
        // whose huge pseudo-inverse component would otherwise force tiny steps.
        let mut directions = Vec::with_capacity(SVD_CUTOFFS.len() + 1);
        for cutoff in SVD_CUTOFFS {
            let delta = svd
                .solve(&(-&f), cutoff * smax)
                .map_err(|e| Error::InvalidArgument(format!("pseudo-inverse failed: {e}")))?;
            directions.push(delta);
        }
        directions.push(-(j.transpose() * &f));
        let mut accepted: Option<(Vec<f64>, DVector<f64>)> = None;
        let mut blocked = true;
        for direction in directions {
            let mut alpha = 1.0;
            for _ in 0..40 {
                let trial: Vec<f64> = t
                    .iter()
                    .zip(direction.iter())
                    .map(|(a, d)| a + alpha * d)
                    .collect();
                if admissible(sys, &trial, winding) {
                    blocked = false;
                    if let Ok(ft) = gradient(sys, &trial, winding) {
                        if norm2(&ft) < norm2(&f) {
                            if accepted
                                .as_ref()
                                .is_none_or(|(_, best)| norm2(&ft) < norm2(best))
                            {
                                accepted = Some((trial, ft));
                            }
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
        }
        match accepted {
            Some((trial, ft)) => {
                t = trial;
                f = ft;
            }
            None if f.amax() <= 1e-11 => break,
            None if blocked => {
                return Err(Error::LostMonotonicity(format!(
                    "residual {:.3e}",
                    f.amax()
                )))
            }
            None => break,
        }
    }
    if f.amax() > 1e-10 {
        if let Ok((tr, fr)) = reduced_solve(sys, winding, &t) {
            if fr.amax() < f.amax() {
                t = tr;
                f = fr;
            }
        }
    }
    let residual = f.amax();
    if residual > 1e-10 {
        return Err(Error::NoConvergence {
            what: "periodic orbit Newton",
            iterations,
            residual,
        });
    }
    let l = sys.period();
    let turns = (t[0] / l).floor();
    for v in t.iter_mut() {
        *v -= turns * l;
    }
    PeriodicOrbit::evaluate(sys, t, winding)
}

/// Newton on `F_1 .. F_{k-1}` with `t_0` held fixed. Returns the remaining
/// component `F_0`, which is the derivative of the reduced action in `t_0`.
fn pinned_solve(sys: &dyn TwistSystem, winding: i64, t: &mut [f64]) -> Result<f64> {
    let k = t.len();
    let mut f = gradient(sys, t, winding)?;
    let tail = |v: &DVector<f64>| v.rows(1, k - 1).norm_squared();
    for _ in 0..NEWTON_MAX_ITER {
        if f.rows(1, k - 1).amax() <= 1e-13 {
            break;
        }
        let j = hessian(sys, t, winding)?;
        let sub = j.view((1, 1), (k - 1, k - 1)).clone_owned();
        let Some(delta) = sub.lu().solve(&(-f.rows(1, k - 1).clone_owned())) else {
            break;
        };
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let mut trial = t.to_vec();
            for (x, d) in trial[1..].iter_mut().zip(delta.iter()) {
                *x += alpha * d;
            }
            if admissible(sys, &trial, winding) {
                if let Ok(ft) = gradient(sys, &trial, winding) {
                    if tail(&ft) < tail(&f) {
                        t.copy_from_slice(&trial);
                        f = ft;
                        moved = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let rest = f.rows(1, k - 1).amax();
    if rest > 1e-11 {
        return Err(Error::NoConvergence {
            what: "pinned periodic orbit",
            iterations: NEWTON_MAX_ITER,
            residual: rest,
        });
    }
    Ok(f[0])
}

/// Fallback for nearly degenerate orbits: slides `t_0` across one point
/// spacing, locates a sign change of the reduced action derivative and
/// brackets it.
fn reduced_solve(
    sys: &dyn TwistSystem,
    winding: i64,
    start: &[f64],
) -> Result<(Vec<f64>, DVector<f64>)> {
    const HALF: usize = 8;
    let k = start.len();
    let width = sys.period() / k as f64;
    let mut centre = start.to_vec();
    let f_centre = pinned_solve(sys, winding, &mut centre)?;
    let mut samples = vec![(0.0, f_centre, centre.clone())];
    for dir in [-1.0, 1.0] {
        let mut t = centre.clone();
        for i in 1..=HALF {
            let shift = dir * width * i as f64 / HALF as f64;
            let mut trial = t
                .iter()
                .map(|x| x + width * dir / HALF as f64)
                .collect::<Vec<_>>();
            trial[0] = centre[0] + shift;
            match pinned_solve(sys, winding, &mut trial) {
                Ok(f0) => {
                    samples.push((shift, f0, trial.clone()));
                    t = trial;
                }
                Err(_) => break,
            }
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let bracket = samples
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .min_by(|a, b| {
            a[0].0
                .abs()
                .min(a[1].0.abs())
                .total_cmp(&b[0].0.abs().min(b[1].0.abs()))
        })
        .ok_or(Error::NoConvergence {
            what: "reduced periodic orbit",
            iterations: 0,
            residual: f_centre.abs(),
        })?;
    let (lo, hi) = (bracket[0].0, bracket[1].0);
    let mut warm = bracket[0].2.clone();
    let root = bracketed_root(
        |s| {
            let mut trial = warm.clone();
            let d = centre[0] + s - trial[0];
            trial.iter_mut().for_each(|x| *x += d);
            match pinned_solve(sys, winding, &mut trial) {
                Ok(f0) => {
                    warm = trial;
                    f0
                }
                Err(_) => f64::NAN,
            }
        },
        lo,
        hi,
        1e-15 * width.max(1.0),
    )?;
    let mut t = warm.clone();
    let d = centre[0] + root - t[0];
    t.iter_mut().for_each(|x| *x += d);
    pinned_solve(sys, winding, &mut t)?;
    let f = gradient(sys, &t, winding)?;
    Ok((t, f))
}

/// Largest action difference across `samples` members `family(t)`, `t` in `[0, L)`.
pub fn mather_constancy<F>(sys: &dyn TwistSystem, family: F, samples: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<PeriodicOrbit> + Sync,
{
    let l = sys.period();
    let actions = (0..samples)
        .into_par_iter()
        .map(|j| {
            let t = l * j as f64 / samples as f64;
            let orbit = family(t)?;
            let residual = gradient_residual(sys, &orbit.params, orbit.winding)?;
            if residual > MEMBER_TOL {
                return Err(Error::MemberUnsolved { t, residual });
            }
            action(sys, &orbit)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max = actions.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = actions.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

const SHIFT_SAMPLES: usize = 256;
const SHIFT_TOL: f64 = 1e-9;

/// For an increasing lift `f`: checks `f(t + L/k) = f(t) + L/k` and
/// `f^k(t) = t + L` on samples, and returns whether `f(t) = t + L/k` follows.
///
/// False when either hypothesis fails on the samples.
pub fn verify_shift_property(f: &dyn Fn(f64) -> f64, period: f64, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let step = period / k as f64;
    let ts: Vec<f64> = (0..=SHIFT_SAMPLES)
        .map(|i| period * i as f64 / SHIFT_SAMPLES as f64)
        .collect();
    let fs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    if fs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NotIncreasing);
    }
    let tol = SHIFT_TOL * period.max(1.0);
    let equivariant = ts
        .iter()
        .zip(&fs)
        .all(|(&t, &ft)| (f(t + step) - ft - step).abs() < tol);
    let closes = ts.iter().all(|&t| {
        let end = (0..k).fold(t, |x, _| f(x));
        (end - t - period).abs() < tol
    });
    if !(equivariant && closes) {
        return Ok(false);
    }
    Ok(ts
        .iter()
        .zip(&fs)
        .all(|(&t, &ft)| (ft - t - step).abs() < tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Billiard in the unit circle with arc-length parameter: `S = 2 sin((Q - q)/2)`.
    struct Circle;

    impl TwistSystem for Circle {
        fn name(&self) -> &'static str {
            "circle"
        }
        fn period(&self) -> f64 {
            2.0 * PI
        }
        fn band(&self, _q: f64) -> Result<(f64, f64)> {
            Ok((0.0, 2.0 * PI))
        }
        fn generating(&self, q: f64, qq: f64) -> Result<f64> {
            Ok(2.0 * (0.5 * (qq - q)).sin())
        }
        fn partials(&self, q: f64, qq: f64) -> Result<(f64, f64)> {
            let c = (0.5 * (qq - q)).cos();
            Ok((-c, c))
        }
    }

    /// `S = (Q - q)^2 / 2 + (K / 2 pi) cos(q)`, the standard map.
    struct Standard(f64);

    impl TwistSystem for Standard {
        fn name(&self) -> &'static str {
            "standard"
        }
        fn period(&self) -> f64 {
            2.0 * PI
        }
        fn band(&self, _q: f64) -> Result<(f64, f64)> {
            Ok((-1e3, 1e3))
        }
        fn generating(&self, q: f64, qq: f64) -> Result<f64> {
            Ok(0.5 * (qq - q).powi(2) + self.0 / (2.0 * PI) * q.cos())
        }
        fn partials(&self, q: f64, qq: f64) -> Result<(f64, f64)> {
            Ok((-(qq - q) - self.0 / (2.0 * PI) * q.sin(), qq - q))
        }
    }

    #[test]
    fn circle_steps_rotate_chords() {
        // angle pi/3 with the tangent: p = cos(pi/3), next point at 2 pi / 3
        let x = twist_step(&Circle, PhasePoint::new(0.0, (PI / 3.0).cos())).unwrap();
        assert!((x.q - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((x.p - 0.5).abs() < 1e-12);
        let y = twist_step(&Circle, PhasePoint::new(0.3, 0.0)).unwrap();
        assert!((y.q - 0.3 - PI).abs() < 1e-12);
    }

    #[test]
    fn iterate_closes_periodic_orbits() {
        let pts = iterate(&Circle, PhasePoint::new(0.0, (PI / 4.0).cos()), 4).unwrap();
        assert_eq!(pts.len(), 5);
        assert!((pts[4].q - 2.0 * PI).abs() < 1e-12);
        let pts = iterate(&Circle, PhasePoint::new(0.0, 1f64.cos()), 100).unwrap();
        assert!((pts[100].q - 200.0).abs() < 1e-8);
    }

    #[test]
    fn rotation_number_of_rigid_rotation() {
        let (rho, bound) =
            rotation_number(&Circle, PhasePoint::new(0.0, (PI / 7.0).cos()), 10_000).unwrap();
        assert!((rho - 1.0 / 7.0).abs() <= bound);
        assert!(rotation_number(&Circle, PhasePoint::new(0.0, 0.5), 10).is_err());
    }

    #[test]
    fn outside_band_is_rejected() {
        assert!(matches!(
            twist_step(&Circle, PhasePoint::new(0.0, 1.5)),
            Err(Error::OutsideBand { .. })
        ));
        let e = iterate(&Circle, PhasePoint::new(0.0, -1.0), 3).unwrap_err();
        assert!(matches!(e, Error::AtStep { step: 1, .. }));
    }

    #[test]
    fn solver_finds_regular_polygons() {
        let init = [0.1, 2.0, 4.5];
        let o = periodic_orbit_solve(&Circle, 3, 1, &init).unwrap();
        assert!((o.action - 3.0 * 3f64.sqrt()).abs() < 1e-10);
        assert!(o.gradient_residual < 1e-10);
        let init = [0.0, 1.7, 3.6, 5.4, 7.2, 9.0, 10.8];
        let o = periodic_orbit_solve(&Circle, 7, 2, &init).unwrap();
        assert!((o.action - 14.0 * (2.0 * PI / 7.0).sin()).abs() < 1e-10);
    }

    #[test]
    fn solver_validates_input() {
        assert!(periodic_orbit_solve(&Circle, 4, 2, &uniform_init(0.0, 4, 2, 2.0 * PI)).is_err());
        assert!(matches!(
            periodic_orbit_solve(&Circle, 3, 1, &[0.0, 3.0, 2.0]),
            Err(Error::LostMonotonicity(_))
        ));
    }

    #[test]
    fn standard_map_fixed_points() {
        // (k, r) = (2, 1): minimax and minimizing orbits at q = 0 and q = pi
        let sys = Standard(0.8);
        let o = periodic_orbit_solve(&sys, 2, 1, &[0.2, 3.3]).unwrap();
        assert!(o.gradient_residual < 1e-10);
        let pts = iterate(&sys, o.phase_point(&sys, 0).unwrap(), 2).unwrap();
        assert!((pts[2].q - o.params[0] - 2.0 * PI).abs() < 1e-9);
        assert!((pts[2].p - pts[0].p).abs() < 1e-9);
    }

    #[test]
    fn constancy_on_the_circle() {
        let dev = mather_constancy(
            &Circle,
            |t| PeriodicOrbit::evaluate(&Circle, uniform_init(t, 5, 1, 2.0 * PI), 1),
            16,
        )
        .unwrap();
        assert!(dev < 1e-12);
        let bad = mather_constancy(
            &Circle,
            |t| PeriodicOrbit::evaluate(&Circle, vec![t, t + 1.0, t + 3.0], 1),
            4,
        );
        assert!(matches!(bad, Err(Error::MemberUnsolved { .. })));
    }

    #[test]
    fn shift_property() {
        let l = 2.0 * PI;
        assert!(verify_shift_property(&|t| t + l / 5.0, l, 5).unwrap());
        assert!(!verify_shift_property(&|t| t + l / 5.0 + 0.01 * (5.0 * t).sin(), l, 5).unwrap());
        assert!(!verify_shift_property(&|t| t + l / 10.0, l, 5).unwrap());
        assert!(matches!(
            verify_shift_property(&|t| -t, l, 5),
            Err(Error::NotIncreasing)
        ));
    }

    proptest! {
        #[test]
        fn step_then_inverse_returns(q in -10.0..10.0f64, p in -0.99..0.99f64, k in 0.0..0.9f64) {
            for sys in [&Circle as &dyn TwistSystem, &Standard(k)] {
                let x = PhasePoint::new(q, p);
                let y = twist_step(sys, x).unwrap();
                prop_assert!((sys.partials(q, y.q).unwrap().0 + p).abs() < 1e-11);
                let z = inverse_step(sys, y).unwrap();
                prop_assert!((z.q - q).abs() < 1e-9 && (z.p - p).abs() < 1e-9);
            }
        }

        #[test]
        fn image_is_monotone_in_momentum(q in -3.0..3.0f64, p in -0.9..0.89f64) {
            let a = twist_step(&Circle, PhasePoint::new(q, p)).unwrap();
            let b = twist_step(&Circle, PhasePoint::new(q, p + 0.01)).unwrap();
            prop_assert!(b.q < a.q);
        }

        #[test]
        fn action_is_invariant_under_relabeling(t0 in 0.0..6.0f64, j in 0usize..5) {
            let o = periodic_orbit_solve(&Circle, 5, 2, &uniform_init(t0, 5, 2, 2.0 * PI)).unwrap();
            let r = o.relabeled(j);
            prop_assert!((action(&Circle, &r).unwrap() - o.action).abs() < 1e-12);
            prop_assert!(gradient_residual(&Circle, &r.params, 2).unwrap() < 1e-10);
        }
    }
}
