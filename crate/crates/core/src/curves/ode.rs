use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{periodic_trapezoid, safeguarded_newton};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of fixed RK4 steps per period.
pub const ODE_STEPS: usize = 4096;
const MAX_QUAD_NODES: usize = 1 << 20;

/// Solution of `a f'(s) = G(f(s))` with `f(0) = 0` and `f(s + P) = f(s) + P`.
#[derive(Clone)]
pub struct PeriodicSolution {
    a: f64,
    period: f64,
    step: f64,
    nodes: Vec<f64>,
    /// `f'` and `f''` at the nodes, for quintic Hermite interpolation.
    slopes: Vec<(f64, f64)>,
    end_defect: f64,
    g: ScalarFn,
    dg: Option<ScalarFn>,
}

impl fmt::Debug for PeriodicSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicSolution")
            .field("a", &self.a)
            .field("period", &self.period)
            .field("steps", &(self.nodes.len() - 1))
            .field("end_defect", &self.end_defect)
            .finish()
    }
}

/// Solves `a f' = G(f)` for the constant `a` and the increasing lift `f`.
pub fn solve_periodic_ode<G>(g: G, period: f64) -> Result<PeriodicSolution>
where
    G: Fn(f64) -> f64 + Send + Sync + 'static,
{
    PeriodicSolution::solve(Arc::new(g), None, period)
}

/// As [`solve_periodic_ode`], with `G'` supplied for the second derivative of `f`.
pub fn solve_periodic_ode_with_derivative<G, D>(
    g: G,
    dg: D,
    period: f64,
) -> Result<PeriodicSolution>
where
    G: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
{
    PeriodicSolution::solve(Arc::new(g), Some(Arc::new(dg)), period)
}

/// `P / integral_0^P dt / G`, with trapezoid nodes doubled until the value settles.
pub fn harmonic_constant(g: &dyn Fn(f64) -> f64, period: f64) -> f64 {
    let mut nodes = ODE_STEPS;
    let mut prev = periodic_trapezoid(|t| 1.0 / g(t), period, nodes);
    let mut last_change = f64::INFINITY;
    while nodes < MAX_QUAD_NODES {
        nodes *= 2;
        let next = periodic_trapezoid(|t| 1.0 / g(t), period, nodes);
        let change = (next - prev).abs();
        prev = next;
        // stop once settled, or once convergence is merely algebraic (a kink in G):
        // the shooting step in the solver then fixes the constant
        if change <= 1e-15 * next.abs() || change > 1e-2 * last_change {
            break;
        }
        last_change = change;
    }
    period / prev
}

impl PeriodicSolution {
    fn solve(g: ScalarFn, dg: Option<ScalarFn>, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "period must be positive, got {period}"
            )));
        }
        let min = (0..ODE_STEPS)
            .map(|i| g(period * i as f64 / ODE_STEPS as f64))
            .fold(f64::INFINITY, |m, v| {
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    m.min(v)
                }
            });
        if !(min > 0.0) || !min.is_finite() {
            return Err(Error::NonPositive(min));
        }
        let mut a = harmonic_constant(g.as_ref(), period);
        let step = period / ODE_STEPS as f64;
        let mut nodes = integrate(g.as_ref(), a, step);
        // The quadrature gives `a` to spectral accuracy; a Newton step on the
        // end condition absorbs the residual integration error.
        for _ in 0..3 {
            let end = nodes[ODE_STEPS];
            let e = end - period;
            if e.abs() <= 1e-15 * period {
                break;
            }
            a += e * a * a / (g(end) * period);
            nodes = integrate(g.as_ref(), a, step);
        }
        let end_defect = (nodes[ODE_STEPS] - period).abs();
        let mut sol = PeriodicSolution {
            a,
            period,
            step,
            nodes,
            slopes: Vec::new(),
            end_defect,
            g,
            dg,
        };
        sol.slopes = sol
            .nodes
            .iter()
            .map(|&x| {
                let f1 = (sol.g)(x) / a;
                (f1, sol.g_prime(x) * f1 / a)
            })
            .collect();
        Ok(sol)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// `|f(P) - P|` of the raw integration before periodic extension.
    pub fn end_defect(&self) -> f64 {
        self.end_defect
    }

    pub fn rhs(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let turns = (s / self.period).floor();
        let r = s - turns * self.period;
        let j = ((r / self.step) as usize).min(ODE_STEPS - 1);
        let h = self.step;
        let t = (r - j as f64 * h) / h;
        let (y0, y1) = (self.nodes[j], self.nodes[j + 1]);
        let ((p0, q0), (p1, q1)) = (self.slopes[j], self.slopes[j + 1]);
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
        h0 * y0
            + h1 * h * p0
            + h2 * h * h * q0
            + h3 * y1
            + h4 * h * p1
            + h5 * h * h * q1
            + turns * self.period
    }

    pub fn derivative(&self, s: f64) -> f64 {
        (self.g)(self.eval(s)) / self.a
    }

    fn g_prime(&self, x: f64) -> f64 {
        match &self.dg {
            Some(dg) => dg(x),
            None => {
                let h = 1e-3 * self.period / std::f64::consts::TAU;
                let g = &self.g;
                (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h)
            }
        }
    }

    /// `(f, f', f'')` at `s`; `f'` and `f''` follow from the equation itself.
    pub fn jet(&self, s: f64) -> (f64, f64, f64) {
        let f = self.eval(s);
        let f1 = (self.g)(f) / self.a;
        let f2 = self.g_prime(f) * f1 / self.a;
        (f, f1, f2)
    }

    /// `f^{-1}(y)`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let turns = (y / self.period).floor();
        let y0 = y - turns * self.period;
        let j = self.nodes.partition_point(|v| *v <= y0).clamp(1, ODE_STEPS) - 1;
        let lo = (j as f64 - 1.0) * self.step;
        let hi = (j as f64 + 2.0) * self.step;
        let s = safeguarded_newton(
            |s| (self.eval(s) - y0, self.derivative(s)),
            lo,
            hi,
            1e-15,
            1e-16,
        )?;
        Ok(s + turns * self.period)
    }

    /// Largest `|a f'(s) - G(f(s))|` over `samples` points, with `f'` from a
    /// difference quotient of the interpolant.
    pub fn residual(&self, samples: usize) -> f64 {
        let h = self.step * 0.5;
        (0..samples)
            .map(|i| {
                let s = self.period * (i as f64 + 0.37) / samples as f64;
                let d = (-self.eval(s + 2.0 * h) + 8.0 * self.eval(s + h) - 8.0 * self.eval(s - h)
                    + self.eval(s - 2.0 * h))
                    / (12.0 * h);
                (self.a * d - (self.g)(self.eval(s))).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `|a * integral_0^P dt/G - P|` with an independent quadrature.
    pub fn identity_defect(&self) -> f64 {
        let integral = periodic_trapezoid(|t| 1.0 / (self.g)(t), self.period, 2 * ODE_STEPS + 1);
        (self.a * integral - self.period).abs()
    }
}

fn rk4(g: &dyn Fn(f64) -> f64, a: f64, x: f64, h: f64) -> f64 {
    if h == 0.0 {
        return x;
    }
    let k1 = g(x) / a;
    let k2 = g(x + 0.5 * h * k1) / a;
    let k3 = g(x + 0.5 * h * k2) / a;
    let k4 = g(x + h * k3) / a;
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn integrate(g: &dyn Fn(f64) -> f64, a: f64, step: f64) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(ODE_STEPS + 1);
    let mut x = 0.0;
    nodes.push(x);
    for _ in 0..ODE_STEPS {
        x = rk4(g, a, x, step);
        nodes.push(x);
    }
    nodes
}
