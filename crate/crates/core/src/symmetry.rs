//! Finite-order linear maps of the plane, conjugation to rotations and symmetry detection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curves::ParamCurve;
use crate::error::{Error, Result};
use crate::geom::{gcd, max_abs, rotation, Mat2, Vec2};
use crate::numeric::golden_min;

/// Number of boundary samples in [`detect_invariance`].
pub const INVARIANCE_SAMPLES: usize = 256;
/// Residual below which a curve is declared invariant.
pub const INVARIANCE_THRESHOLD: f64 = 1e-8;

/// `M = C R(2 pi m / k) C^{-1}` with `M^k = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteOrderLinearMap {
    matrix: Mat2,
    order: usize,
    rotation_index: usize,
    conjugator: Mat2,
}

impl FiniteOrderLinearMap {
    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rotation_index(&self) -> usize {
        self.rotation_index
    }

    pub fn conjugator(&self) -> &Mat2 {
        &self.conjugator
    }

    /// Angle `2 pi m / k` of the conjugate rotation.
    pub fn angle(&self) -> f64 {
        2.0 * PI * self.rotation_index as f64 / self.order as f64
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        self.matrix * v
    }

    pub fn power(&self, j: i64) -> Mat2 {
        let c = &self.conjugator;
        let ci = c.try_inverse().expect("conjugator is invertible");
        c * rotation(self.angle() * j as f64) * ci
    }

    pub fn inverse(&self) -> Mat2 {
        self.power(-1)
    }

    /// `max |C R C^{-1} - M|`.
    pub fn conjugation_defect(&self) -> f64 {
        max_abs(&(self.power(1) - self.matrix))
    }
}

/// Rotation by `2 pi m / k`.
pub fn make_rotation(k: usize, m: i64) -> Result<FiniteOrderLinearMap> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "order must be at least 2, got {k}"
        )));
    }
    let mm = m.rem_euclid(k as i64);
    if gcd(mm, k as i64) != 1 {
        return Err(Error::InvalidArgument(format!("gcd({m}, {k}) != 1")));
    }
    Ok(FiniteOrderLinearMap {
        matrix: rotation(2.0 * PI * mm as f64 / k as f64),
        order: k,
        rotation_index: mm as usize,
        conjugator: Mat2::identity(),
    })
}

fn mat_pow(m: &Mat2, j: usize) -> Mat2 {
    (0..j).fold(Mat2::identity(), |acc, _| acc * m)
}

/// Finds `C` (det `C` = 1) and `m` with `M = C R(2 pi m / k) C^{-1}`.
pub fn conjugate_to_rotation(m: &Mat2, k: usize) -> Result<FiniteOrderLinearMap> {
    let fail = |reason: String| Error::NotFiniteOrder { order: k, reason };
    if k < 2 {
        return Err(fail("order must be at least 2".into()));
    }
    let scale = max_abs(m).max(1.0).powi(k as i32);
    let dk = max_abs(&(mat_pow(m, k) - Mat2::identity()));
    if dk > 1e-10 * scale {
        return Err(fail(format!("|M^k - I| = {dk:.3e}")));
    }
    for j in 1..k {
        let dj = max_abs(&(mat_pow(m, j) - Mat2::identity()));
        if dj <= 1e-6 {
            return Err(fail(format!("M^{j} = I already (distance {dj:.3e})")));
        }
    }
    if m.determinant() <= 0.0 {
        return Err(fail(format!(
            "det M = {:.6} is not positive",
            m.determinant()
        )));
    }
    if k == 2 {
        // the only orientation-preserving involution is -I
        return Ok(FiniteOrderLinearMap {
            matrix: *m,
            order: 2,
            rotation_index: 1,
            conjugator: Mat2::identity(),
        });
    }
    let tr = m.trace();
    let det = m.determinant();
    let disc = det - 0.25 * tr * tr;
    if disc <= 0.0 {
        return Err(fail("eigenvalues are real".into()));
    }
    let (re, im) = (0.5 * tr, disc.sqrt());
    // eigenvector v = a + i b for re + i im
    let (a, b) = if m[(0, 1)].abs() >= m[(1, 0)].abs() {
        (Vec2::new(m[(0, 1)], re - m[(0, 0)]), Vec2::new(0.0, im))
    } else {
        (Vec2::new(re - m[(1, 1)], m[(1, 0)]), Vec2::new(im, 0.0))
    };
    let theta = im.atan2(re);
    let mut c = Mat2::from_columns(&[a, -b]);
    let mut angle = theta;
    if c.determinant() < 0.0 {
        c = Mat2::from_columns(&[a, b]);
        angle = 2.0 * PI - theta;
    }
    c /= c.determinant().sqrt();
    if c.trace() < 0.0 {
        c = -c;
    }
    let mf = angle * k as f64 / (2.0 * PI);
    let idx = mf.round();
    if (mf - idx).abs() > 1e-6 {
        return Err(fail(format!(
            "rotation angle {angle:.6} is not a multiple of 2 pi / {k}"
        )));
    }
    let idx = (idx as i64).rem_euclid(k as i64);
    if gcd(idx, k as i64) != 1 {
        return Err(fail(format!("rotation index {idx} is not coprime to {k}")));
    }
    let out = FiniteOrderLinearMap {
        matrix: *m,
        order: k,
        rotation_index: idx as usize,
        conjugator: c,
    };
    let defect = out.conjugation_defect();
    if defect > 1e-9 * max_abs(m).max(1.0) {
        return Err(fail(format!("conjugation defect {defect:.3e}")));
    }
    Ok(out)
}

/// Largest `|g_C(M gamma(t)) - 1|` over the curve, `g_C` the gauge of the region it bounds.
///
/// Sampled at [`INVARIANCE_SAMPLES`] points and refined around the worst one,
/// so the value does not depend on how the curve is parametrized.
pub fn detect_invariance(curve: &ParamCurve, map: &Mat2) -> Result<f64> {
    let loc = curve.radial()?;
    let l = curve.period();
    let dev = |t: f64| -> f64 {
        let y = map * curve.position(t);
        loc.gauge(&y)
            .map(|g| (g - 1.0).abs())
            .unwrap_or(f64::INFINITY)
    };
    let n = INVARIANCE_SAMPLES;
    let (worst, i) = (0..n)
        .map(|i| (dev(l * i as f64 / n as f64), i))
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
    let h = l / n as f64;
    let t0 = l * i as f64 / n as f64;
    let (_, neg) = golden_min(|t| -dev(t), t0 - h, t0 + h, 1e-10 * l);
    Ok(worst.max(-neg))
}

/// Rotation orders `k` in `2..=max_order` under which the curve is invariant.
pub fn symmetry_orders(curve: &ParamCurve, max_order: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for k in 2..=max_order {
        let r = make_rotation(k, 1)?;
        if detect_invariance(curve, r.matrix())? < INVARIANCE_THRESHOLD {
            out.push(k);
        }
    }
    Ok(out)
}

/// `a = 1` for `k = 2 mod 4`, `2` for `k = 0 mod 4`, `4` for odd `k`.
pub fn a_factor(k: usize) -> Result<usize> {
    match k {
        0 | 1 => Err(Error::InvalidArgument(format!(
            "order must be at least 2, got {k}"
        ))),
        k if k % 2 == 1 => Ok(4),
        k if k % 4 == 0 => Ok(2),
        _ => Ok(1),
    }
}

/// JSON description of a symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SymmetrySpec {
    Rotation { k: usize, m: i64 },
    Matrix { entries: [[f64; 2]; 2], k: usize },
}

impl SymmetrySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn to_map(&self) -> Result<FiniteOrderLinearMap> {
        match self {
            SymmetrySpec::Rotation { k, m } => make_rotation(*k, *m),
            SymmetrySpec::Matrix { entries, k } => {
                let m = Mat2::new(entries[0][0], entries[0][1], entries[1][0], entries[1][1]);
                conjugate_to_rotation(&m, *k)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{arc_length_reparametrize, SupportCurve};
    use proptest::prelude::*;

    #[test]
    fn rotations() {
        let r = make_rotation(4, 1).unwrap();
        assert!(max_abs(&(r.matrix() - Mat2::new(0.0, -1.0, 1.0, 0.0))) < 1e-15);
        let r = make_rotation(2, 1).unwrap();
        assert!(max_abs(&(r.matrix() + Mat2::identity())) < 1e-15);
        let r = make_rotation(6, 5).unwrap();
        assert!(max_abs(&(r.matrix() - rotation(5.0 * PI / 3.0))) < 1e-15);
        assert!(make_rotation(6, 2).is_err());
    }

    #[test]
    fn conjugation_of_plain_rotation() {
        let f = conjugate_to_rotation(&rotation(2.0 * PI / 5.0), 5).unwrap();
        assert_eq!(f.rotation_index(), 1);
        assert!(max_abs(&(f.conjugator() - Mat2::identity())) < 1e-12);
    }

    #[test]
    fn conjugation_recovers_index_from_skewed_map() {
        let d = Mat2::new(2.0, 0.0, 0.0, 1.0);
        let m = d * rotation(2.0 * PI / 3.0) * d.try_inverse().unwrap();
        let f = conjugate_to_rotation(&m, 3).unwrap();
        assert_eq!(f.rotation_index(), 1);
        assert!(f.conjugation_defect() < 1e-9);
        assert!((f.conjugator().determinant() - 1.0).abs() < 1e-12);
        // clockwise version gets the complementary index
        let g = conjugate_to_rotation(&m.try_inverse().unwrap(), 3).unwrap();
        assert_eq!(g.rotation_index(), 2);
    }

    #[test]
    fn conjugation_failures() {
        let hyperbolic = Mat2::new(2.0, 0.0, 0.0, 0.5);
        assert!(matches!(
            conjugate_to_rotation(&hyperbolic, 4),
            Err(Error::NotFiniteOrder { .. })
        ));
        // order 2 rotation passed as k = 4 has a smaller power equal to I
        let half = rotation(PI);
        assert!(conjugate_to_rotation(&half, 4).is_err());
        let quarter = rotation(PI / 2.0);
        assert!(conjugate_to_rotation(&quarter, 3).is_err());
        let reflection = Mat2::new(1.0, 0.0, 0.0, -1.0);
        assert!(conjugate_to_rotation(&reflection, 2).is_err());
    }

    #[test]
    fn invariance_residuals() {
        let circle = ParamCurve::unit_circle();
        assert!(detect_invariance(&circle, &rotation(0.77)).unwrap() < 1e-12);
        // cos 8 psi at the largest convex amplitude used in the tests
        let c = SupportCurve::single_harmonic(1.0, 0.015, 8)
            .unwrap()
            .param_curve();
        let r = detect_invariance(&c, &rotation(PI / 4.0)).unwrap();
        assert!(r < 1e-10, "{r}");
        assert!(detect_invariance(&c, &rotation(PI / 3.0)).unwrap() > 1e-3);
        assert_eq!(symmetry_orders(&c, 16).unwrap(), vec![2, 4, 8]);
        let e = ParamCurve::ellipse(2.0, 1.0).unwrap();
        assert_eq!(symmetry_orders(&e, 16).unwrap(), vec![2]);
    }

    #[test]
    fn invariance_is_parametrization_free() {
        let c = SupportCurve::new(1.0, vec![0.0, 0.0, 0.02], vec![0.0, 0.01])
            .unwrap()
            .param_curve();
        let arc = arc_length_reparametrize(&c).unwrap();
        for angle in [2.0 * PI / 3.0, 0.5, PI] {
            let a = detect_invariance(&c, &rotation(angle)).unwrap();
            let b = detect_invariance(&arc, &rotation(angle)).unwrap();
            assert!((a - b).abs() < 1e-9, "{angle}: {a} vs {b}");
        }
    }

    #[test]
    fn a_factor_table() {
        assert_eq!(a_factor(6).unwrap(), 1);
        assert_eq!(a_factor(8).unwrap(), 2);
        assert_eq!(a_factor(5).unwrap(), 4);
        assert!(a_factor(1).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let s = SymmetrySpec::from_json(r#"{"type":"rotation","k":4,"m":1}"#).unwrap();
        assert_eq!(s.to_map().unwrap().order(), 4);
        let s = SymmetrySpec::from_json(r#"{"type":"matrix","entries":[[0,-2],[0.5,0]],"k":4}"#)
            .unwrap();
        let f = s.to_map().unwrap();
        assert_eq!(f.rotation_index(), 1);
    }

    proptest! {
        #[test]
        fn constructed_maps_have_unit_determinant(k in 3usize..20, m in 1i64..40, sx in 0.2..5.0f64, sh in -2.0..2.0f64) {
            prop_assume!(gcd(m, k as i64) == 1);
            let r = make_rotation(k, m).unwrap();
            prop_assert!(max_abs(&(mat_pow(r.matrix(), k) - Mat2::identity())) < 1e-12);
            let d = Mat2::new(sx, sh, 0.0, 1.0);
            let mm = d * r.matrix() * d.try_inverse().unwrap();
            let f = conjugate_to_rotation(&mm, k).unwrap();
            prop_assert!((f.matrix().determinant() - 1.0).abs() < 1e-12);
            prop_assert_eq!(f.rotation_index() as i64, m.rem_euclid(k as i64));
            prop_assert!(f.conjugation_defect() < 1e-9 * max_abs(&mm).max(1.0));
        }
    }
}
