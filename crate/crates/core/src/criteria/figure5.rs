//! Gauge perimeters of the symmetric orbits in a square and a regular hexagon.

use serde::Serialize;

use crate::curves::{GaugeBody, Polygon, RoundedPolygon};
use crate::error::Result;
use crate::geom::Vec2;
use crate::twistmaps::{gradient_residual, periodic_orbit_solve, PeriodicOrbit, MEMBER_TOL};

use super::minkowski::{locate_points, minkowski_table};

#[derive(Debug, Clone, Serialize)]
pub struct Figure5Row {
    pub name: &'static str,
    pub k: usize,
    pub expected: f64,
    /// Perimeter in the gauge of the exact polygon.
    pub exact: f64,
    /// Action of the corresponding orbit in the rounded polygon, when requested.
    pub rounded: Option<f64>,
}

struct Case {
    name: &'static str,
    hexagon: bool,
    points: Vec<Vec2>,
    expected: f64,
}

fn square() -> Polygon {
    Polygon::new(vec![
        Vec2::new(1.0, -1.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(-1.0, 1.0),
        Vec2::new(-1.0, -1.0),
    ])
    .expect("square is a valid polygon")
}

fn hexagon() -> Polygon {
    Polygon::regular(6, 1.0, 0.0).expect("hexagon is a valid polygon")
}

fn cases() -> Vec<Case> {
    let sq = [
        Vec2::new(1.0, 1.0),
        Vec2::new(-1.0, 1.0),
        Vec2::new(-1.0, -1.0),
        Vec2::new(1.0, -1.0),
    ];
    let sq_mid = [
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(-1.0, 0.0),
        Vec2::new(0.0, -1.0),
    ];
    let hex = hexagon();
    let v: Vec<Vec2> = hex.vertices().to_vec();
    let m: Vec<Vec2> = (0..6).map(|j| (v[j] + v[(j + 1) % 6]) / 2.0).collect();
    let every_other = |p: &[Vec2]| vec![p[0], p[2], p[4]];
    vec![
        Case {
            name: "square-corner-4",
            hexagon: false,
            points: sq.to_vec(),
            expected: 8.0,
        },
        Case {
            name: "square-midpoint-4",
            hexagon: false,
            points: sq_mid.to_vec(),
            expected: 4.0,
        },
        Case {
            name: "hexagon-vertex-6",
            hexagon: true,
            points: v.clone(),
            expected: 6.0,
        },
        Case {
            name: "hexagon-midpoint-6",
            hexagon: true,
            points: m.clone(),
            expected: 6.0,
        },
        Case {
            name: "hexagon-vertex-3",
            hexagon: true,
            points: every_other(&v),
            expected: 6.0,
        },
        Case {
            name: "hexagon-midpoint-3",
            hexagon: true,
            points: every_other(&m),
            expected: 4.5,
        },
    ]
}

fn perimeter(body: &GaugeBody, points: &[Vec2]) -> f64 {
    let k = points.len();
    (0..k)
        .map(|i| body.gauge(&(points[(i + 1) % k] - points[i])))
        .sum()
}

/// The six perimeters: square corner and midpoint 4-orbits, hexagon vertex and
/// midpoint 6-orbits, hexagon vertex and midpoint 3-orbits.
pub fn figure5_perimeters() -> Vec<Figure5Row> {
    let (sq, hex) = (GaugeBody::Polygon(square()), GaugeBody::Polygon(hexagon()));
    cases()
        .into_iter()
        .map(|c| {
            let body = if c.hexagon { &hex } else { &sq };
            Figure5Row {
                name: c.name,
                k: c.points.len(),
                expected: c.expected,
                exact: perimeter(body, &c.points),
                rounded: None,
            }
        })
        .collect()
}

/// As [`figure5_perimeters`], adding the actions of the matching orbits of the
/// Minkowski billiard in the polygons enlarged by a disc of radius `radius`.
pub fn figure5_rounded(radius: f64) -> Result<Vec<Figure5Row>> {
    let sq = GaugeBody::RoundedPolygon(RoundedPolygon::new(square(), radius)?);
    let hex = GaugeBody::RoundedPolygon(RoundedPolygon::new(hexagon(), radius)?);
    let (sq_sys, hex_sys) = (minkowski_table(&sq)?, minkowski_table(&hex)?);
    let (sq_loc, hex_loc) = (sq_sys.curve().radial()?, hex_sys.curve().radial()?);
    let mut rows = figure5_perimeters();
    for (row, case) in rows.iter_mut().zip(cases()) {
        let (body, sys, loc) = if case.hexagon {
            (&hex, &hex_sys, &hex_loc)
        } else {
            (&sq, &sq_sys, &sq_loc)
        };
        let points: Vec<Vec2> = case.points.iter().map(|p| body.boundary_point(p)).collect();
        let init = locate_points(loc, &points)?;
        let orbit = if gradient_residual(sys, &init, 1)? < MEMBER_TOL {
            PeriodicOrbit::evaluate(sys, init, 1)?
        } else {
            periodic_orbit_solve(sys, case.points.len(), 1, &init)?
        };
        row.rounded = Some(orbit.action);
    }
    Ok(rows)
}
