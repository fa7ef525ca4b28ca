use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

use super::gauge::{GaugeBody, Polygon};
use super::param::ParamCurve;
use super::support::{SupportCurve, DEFAULT_GRID};

/// JSON description of a curve or body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeSpec {
    SupportFourier {
        mean: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_size: Option<usize>,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    RoundedPolygon {
        base: Box<ShapeSpec>,
        radius: f64,
    },
    LpBall {
        p: f64,
    },
}

impl ShapeSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("shape specs serialize")
    }

    /// `h = mean + amplitude cos(harmonic psi)`.
    pub fn harmonic(mean: f64, amplitude: f64, harmonic: usize) -> Self {
        let mut cos = vec![0.0; harmonic];
        if harmonic > 0 {
            cos[harmonic - 1] = amplitude;
        }
        ShapeSpec::SupportFourier {
            mean,
            cos,
            sin: Vec::new(),
            grid_size: None,
        }
    }

    pub fn support_curve(&self) -> Result<Option<SupportCurve>> {
        match self {
            ShapeSpec::SupportFourier {
                mean,
                cos,
                sin,
                grid_size,
            } => Ok(Some(SupportCurve::with_grid(
                *mean,
                cos.clone(),
                sin.clone(),
                grid_size.unwrap_or(DEFAULT_GRID),
            )?)),
            _ => Ok(None),
        }
    }

    fn polygon(&self) -> Result<Polygon> {
        match self {
            ShapeSpec::Polygon { vertices } => {
                Polygon::new(vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect())
            }
            _ => Err(Error::Spec("rounded_polygon base must be a polygon".into())),
        }
    }

    pub fn to_body(&self) -> Result<GaugeBody> {
        match self {
            ShapeSpec::SupportFourier { mean, cos, sin, .. } => {
                GaugeBody::from_support_data(*mean, cos.clone(), sin.clone())
            }
            ShapeSpec::Ellipse { a, b } => GaugeBody::ellipse(*a, *b),
            ShapeSpec::Polygon { .. } => Ok(GaugeBody::Polygon(self.polygon()?)),
            ShapeSpec::RoundedPolygon { base, radius } => {
                GaugeBody::rounded_polygon(base.polygon()?, *radius)
            }
            ShapeSpec::LpBall { p } => GaugeBody::lp_ball(*p),
        }
    }

    /// Boundary curve in the natural parametrization of the representation.
    ///
    /// Support data must define a strictly convex curve here; as a body the
    /// same data may be non-smooth (see [`GaugeBody::from_support_data`]).
    pub fn to_curve(&self) -> Result<ParamCurve> {
        match self.support_curve()? {
            Some(c) => Ok(c.param_curve()),
            None => self.to_body()?.boundary_curve(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::Parametrization;

    #[test]
    fn parses_all_kinds() {
        let docs = [
            r#"{"type":"support_fourier","mean":1.0,"cos":[0,0,0,0,0,0,0,0.01],"sin":[]}"#,
            r#"{"type":"ellipse","a":2,"b":1}"#,
            r#"{"type":"polygon","vertices":[[1,-1],[1,1],[-1,1],[-1,-1]]}"#,
            r#"{"type":"rounded_polygon","base":{"type":"polygon","vertices":[[1,-1],[1,1],[-1,1],[-1,-1]]},"radius":0.05}"#,
            r#"{"type":"lp_ball","p":4}"#,
        ];
        for d in docs {
            let s = ShapeSpec::from_json(d).unwrap();
            s.to_body().unwrap();
            assert_eq!(ShapeSpec::from_json(&s.to_json()).unwrap(), s);
        }
        let c = ShapeSpec::from_json(docs[0]).unwrap().to_curve().unwrap();
        assert_eq!(c.kind(), Parametrization::NormalAngle);
    }

    #[test]
    fn errors_are_classified() {
        assert!(matches!(
            ShapeSpec::from_json("{\"type\":\"blob\"}"),
            Err(Error::Spec(_))
        ));
        let bad = ShapeSpec::harmonic(1.0, 0.9, 2);
        assert!(matches!(bad.to_curve(), Err(Error::NotConvex { .. })));
        assert!(matches!(bad.to_body(), Ok(GaugeBody::Wulff(_))));
        let through_origin = ShapeSpec::harmonic(1.0, 1.5, 3);
        assert!(matches!(
            through_origin.to_body(),
            Err(Error::OriginNotInterior(_))
        ));
        let poly =
            ShapeSpec::from_json(r#"{"type":"polygon","vertices":[[1,-1],[1,1],[-1,1],[-1,-1]]}"#)
                .unwrap();
        assert!(matches!(poly.to_curve(), Err(Error::NonSmoothBody(_))));
    }
}
