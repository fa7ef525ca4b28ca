//! Planar vector helpers shared by every module.

use nalgebra::{Matrix2, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Determinant `[u, v]` of two planar vectors.
#[inline]
pub fn det(u: &Vec2, v: &Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

/// Counterclockwise quarter turn.
#[inline]
pub fn perp(u: &Vec2) -> Vec2 {
    Vec2::new(-u.y, u.x)
}

#[inline]
pub fn unit(angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c, s)
}

#[inline]
pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Signed angle from `u` to `v` in `(-pi, pi]`.
#[inline]
pub fn angle_between(u: &Vec2, v: &Vec2) -> f64 {
    det(u, v).atan2(u.dot(v))
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat2) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Position and first two derivatives of a parametrized curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub pos: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

impl Jet {
    pub fn transformed(&self, m: &Mat2) -> Jet {
        Jet {
            pos: m * self.pos,
            d1: m * self.d1,
            d2: m * self.d2,
        }
    }

    /// `det(d1, d2)`; positive for a counterclockwise convex curve.
    pub fn turning(&self) -> f64 {
        det(&self.d1, &self.d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_and_perp_agree() {
        let v = Vec2::new(0.3, -1.2);
        let r = rotation(PI / 2.0) * v;
        assert!((r - perp(&v)).norm() < 1e-15);
    }

    #[test]
    fn angle_between_is_signed() {
        let a = angle_between(&Vec2::new(1.0, 0.0), &Vec2::new(0.0, -1.0));
        assert!((a + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(-5, 3), 1);
        assert_eq!(gcd(0, 7), 7);
    }
}
