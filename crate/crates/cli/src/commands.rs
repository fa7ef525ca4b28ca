use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use billiard_core::billiards::{Billiard, SystemKind};
use billiard_core::criteria::{
    body_invariance, constancy_profile, construct_invariant_family, extra_symmetry_equivalence,
    figure5_perimeters, figure5_rounded, gutkin_angle_profile, gutkin_report, minkowski_constancy,
    outer_fourier_check, symmetric_candidates, symplectic_fourier_check,
};
use billiard_core::curves::{GaugeBody, ShapeSpec};
use billiard_core::geom::rotation;
use billiard_core::symmetry::{symmetry_orders, INVARIANCE_THRESHOLD};
use billiard_core::twistmaps::{periodic_orbit_solve, uniform_init};
use billiard_core::Error;

use crate::output::{emit, float, is_csv, Table};
use crate::{CriteriaArgs, CriterionKind, OrbitArgs, PlotArgs, PlotKind};

const MAX_ORDER: usize = 16;
const WIDTH_SAMPLES: usize = 1024;

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn io(what: &str, e: std::io::Error) -> Self {
        CliError::new(6, format!("{what}: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Spec(_)
            | Error::InvalidPolygon(_)
            | Error::TruncationTooLarge { .. }
            | Error::OriginNotInterior(_) => 2,
            Error::NotConvex { .. } => 3,
            Error::NoConvergence { .. }
            | Error::LostMonotonicity(_)
            | Error::MemberUnsolved { .. }
            | Error::TwistViolated { .. }
            | Error::OutsideBand { .. }
            | Error::AtStep { .. }
            | Error::Tangency(_)
            | Error::ParallelTangents
            | Error::NotExterior
            | Error::OutsideSymplecticBand => 4,
            _ => 5,
        };
        CliError::new(code, e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// A spec given inline (`{...}`) or as a path to a JSON file.
fn load_spec(arg: &str) -> Result<ShapeSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::io(arg, e))?
    };
    Ok(ShapeSpec::from_json(&text)?)
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| CliError::new(5, format!("missing --{flag}")))
}

fn print_json(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("reports serialize")
    );
}

fn widths(body: &GaugeBody) -> (f64, f64) {
    (0..WIDTH_SAMPLES)
        .map(|i| {
            let th = PI * i as f64 / WIDTH_SAMPLES as f64;
            body.support(th) + body.support(th + PI)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
            (lo.min(w), hi.max(w))
        })
}

pub fn curve(arg: &str) -> Result<()> {
    let spec = load_spec(arg)?;
    let body = spec.to_body()?;
    let (period, parametrization, margin, orders, area, length) = match &body {
        GaugeBody::Polygon(p) => {
            let orders: Vec<usize> = (2..=MAX_ORDER)
                .filter(|k| {
                    body_invariance(&body, &rotation(2.0 * PI / *k as f64)) < INVARIANCE_THRESHOLD
                })
                .collect();
            (
                p.perimeter(),
                "euclidean_arc".to_string(),
                0.0,
                orders,
                None,
                p.perimeter(),
            )
        }
        _ => {
            let curve = spec.to_curve()?;
            let margin = match spec.support_curve()? {
                Some(s) => s.convexity_margin().0,
                None => curve.convexity_margins(4096).0,
            };
            if margin <= 0.0 {
                return Err(Error::NotConvex { margin, psi: 0.0 }.into());
            }
            (
                curve.period(),
                curve.kind().to_string(),
                margin,
                symmetry_orders(&curve, MAX_ORDER)?,
                Some(curve.area()),
                curve.length(),
            )
        }
    };
    let (wmin, wmax) = widths(&body);
    print_json(&json!({
        "kind": body.kind_name(),
        "parametrization": parametrization,
        "period": period,
        "convexity_margin": margin,
        "symmetry_orders": orders,
        "width_min": wmin,
        "width_max": wmax,
        "area": area,
        "length": length,
    }));
    Ok(())
}

fn build(system: SystemKind, curve: &str, body: Option<&str>) -> Result<Billiard> {
    let table = load_spec(curve)?;
    let body = body.map(load_spec).transpose()?;
    Ok(Billiard::build(system, &table, body.as_ref())?)
}

pub fn orbit(a: &OrbitArgs) -> Result<()> {
    let s = &a.sys;
    let billiard = build(s.system, &s.curve, s.body.as_deref())?;
    let sys = billiard.system();
    let init = match a.init.len() {
        0 => uniform_init(0.0, s.k, s.r, sys.period()),
        1 => uniform_init(a.init[0], s.k, s.r, sys.period()),
        n if n == s.k => a.init.clone(),
        n => {
            return Err(CliError::new(
                5,
                format!("--init needs 1 or k = {} values, got {n}", s.k),
            ))
        }
    };
    let orbit = periodic_orbit_solve(sys, s.k, s.r, &init)?;
    let curve = billiard.curve();
    let points: Vec<[f64; 2]> = orbit
        .params
        .iter()
        .map(|t| {
            let p = curve.position(*t);
            [p.x, p.y]
        })
        .collect();
    let record = json!({
        "system": sys.name(),
        "k": s.k,
        "r": s.r,
        "period": orbit.period,
        "params": orbit.params,
        "action": orbit.action,
        "gradient_residual": orbit.gradient_residual,
        "chord_values": orbit.chord_values,
        "points": points,
    });
    match &a.out {
        Some(path) if is_csv(path) => {
            let mut t = Table::new(
                format!("billiard-lab orbit {}", sys.name()),
                vec!["i", "t", "x", "y"],
                "t curve parameter, x and y lengths (dimensionless)",
            )
            .meta("k", s.k)
            .meta("r", s.r)
            .meta("action", float(orbit.action))
            .meta("gradient_residual", float(orbit.gradient_residual));
            t.rows = orbit
                .params
                .iter()
                .zip(&points)
                .enumerate()
                .map(|(i, (t, p))| vec![i as f64, *t, p[0], p[1]])
                .collect();
            emit(Some(path), &t.render()).map_err(|e| CliError::io("writing orbit", e))?;
        }
        Some(path) => {
            let text = serde_json::to_string_pretty(&record).expect("orbit serializes");
            emit(Some(path), &text).map_err(|e| CliError::io("writing orbit", e))?;
        }
        None => {}
    }
    print_json(&record);
    Ok(())
}

pub fn criteria(a: &CriteriaArgs) -> Result<()> {
    let curve_arg = || required(a.curve.as_deref(), "curve");
    let r = a.r.or(a.m).unwrap_or(1);
    let report = match a.kind {
        CriterionKind::Gutkin => {
            let spec = load_spec(curve_arg()?)?;
            let support = spec
                .support_curve()?
                .ok_or_else(|| CliError::new(5, "gutkin check needs a support_fourier curve"))?;
            let rep = gutkin_report(&support, r, a.k)?;
            let mut v = serde_json::to_value(&rep).expect("report serializes");
            v["constant"] = json!(rep.deviation < a.tol);
            v["verdict"] = json!(if rep.deviation < a.tol {
                "constant"
            } else {
                "not-constant"
            });
            v
        }
        CriterionKind::OuterFourier | CriterionKind::SymplecticFourier => {
            let curve = load_spec(curve_arg()?)?.to_curve()?;
            let rep = if a.kind == CriterionKind::OuterFourier {
                outer_fourier_check(&curve, r, a.k)?
            } else {
                symplectic_fourier_check(&curve, r, a.k)?
            };
            let lambda_error = (rep.lambda_fourier - rep.lambda_expected).abs();
            let mut v = serde_json::to_value(&rep).expect("report serializes");
            v["lambda_error"] = json!(lambda_error);
            v["within_tol"] =
                json!(rep.consistent() && lambda_error < a.tol && rep.max_higher_harmonic < a.tol);
            v
        }
        CriterionKind::Minkowski => {
            let arg = a.body.as_deref().or(a.curve.as_deref());
            let body = load_spec(required(arg, "body")?)?.to_body()?;
            let m = a.m.or(a.r).unwrap_or(1);
            let mut rep = extra_symmetry_equivalence(&body, a.k, m)?;
            let small = [
                rep.constancy_max_dev,
                rep.quarter_turn_residual,
                rep.order_ak_residual,
            ]
            .map(|v| v < a.tol);
            rep.equivalent = small[0] == small[1] && small[1] == small[2];
            rep.verdict = if small.iter().all(|s| *s) {
                "passes"
            } else if small.iter().all(|s| !*s) {
                "fails"
            } else {
                "inconsistent"
            }
            .into();
            serde_json::to_value(&rep).expect("report serializes")
        }
    };
    let mut report = report;
    report["tol"] = json!(a.tol);
    print_json(&report);
    Ok(())
}

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        pass,
        detail,
    }
}

pub fn examples(rounded: Option<f64>, lp: f64) -> Result<()> {
    let mut checks = Vec::new();

    let rows = match rounded {
        Some(radius) => figure5_rounded(radius)?,
        None => figure5_perimeters(),
    };
    for row in &rows {
        let mut line = format!(
            "figure5 {} k={} expected={} exact={}",
            row.name,
            row.k,
            row.expected,
            float(row.exact)
        );
        if let Some(v) = row.rounded {
            line += &format!(" rounded={}", float(v));
        }
        println!("{line}");
    }
    let worst = rows
        .iter()
        .map(|r| (r.exact - r.expected).abs())
        .fold(0.0, f64::max);
    checks.push(check(
        "criterion 1: polygon gauge perimeters",
        worst < 1e-9,
        format!("max error {}", float(worst)),
    ));
    if let Some(radius) = rounded {
        let worst = rows
            .iter()
            .filter_map(|r| r.rounded.map(|v| (v - r.expected).abs()))
            .fold(0.0, f64::max);
        checks.push(check(
            format!("criterion 1: rounded polygons (radius {radius})"),
            worst < 0.15,
            format!("max error {}", float(worst)),
        ));
    }

    let cos8 = ShapeSpec::harmonic(1.0, 0.05, 8).to_body()?;
    let (dev, _) = minkowski_constancy(&cos8, 4, 1)?;
    let family = construct_invariant_family(&cos8, 4, 1)?;
    let ret = family.return_defect()?;
    println!(
        "family cos8 k=4 r=1 constancy={} criticality={} action_deviation={} return={} action={}",
        float(dev),
        float(family.max_criticality),
        float(family.action_deviation),
        float(ret),
        float(family.action)
    );
    checks.push(check(
        "criterion 2: invariant family for h = 1 + 0.05 cos 8psi",
        dev < 1e-8 && family.max_criticality < 1e-8 && family.action_deviation < 1e-8 && ret < 1e-7,
        format!(
            "constancy {}, criticality {}, action {}, return {}",
            float(dev),
            float(family.max_criticality),
            float(family.action_deviation),
            float(ret)
        ),
    ));

    let bodies = [
        (
            "h = 1 + 0.05 cos 4psi".to_string(),
            ShapeSpec::harmonic(1.0, 0.05, 4),
        ),
        (format!("L^{lp} ball"), ShapeSpec::LpBall { p: lp }),
    ];
    for (name, spec) in bodies {
        let body = spec.to_body()?;
        let (dev, _) = minkowski_constancy(&body, 4, 1)?;
        let cand = symmetric_candidates(&body, 4)?;
        println!(
            "necessity {name} k=4 constancy={} vertex_action={} midpoint_action={}{}",
            float(dev),
            float(cand.vertex_type.action),
            float(cand.midpoint_type.action),
            if dev > 1e-2 {
                " (constancy fails: no invariant family)"
            } else {
                ""
            }
        );
        checks.push(check(
            format!("criterion 3: no invariant family for {name}"),
            dev > 1e-2 && cand.action_gap() > 0.01,
            format!(
                "constancy {}, action gap {}",
                float(dev),
                float(cand.action_gap())
            ),
        ));
    }

    for c in &checks {
        println!(
            "{} {} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(
            1,
            format!("failed checks: {}", failed.join("; ")),
        ))
    }
}

pub fn plot_data(a: &PlotArgs) -> Result<()> {
    let table = match a.what {
        PlotKind::Curve => {
            let spec = load_spec(required(a.curve.as_deref(), "curve")?)?;
            let curve = spec.to_curve()?;
            let mut t = Table::new(
                "billiard-lab plot-data curve",
                vec!["t", "x", "y"],
                "t curve parameter, x and y lengths (dimensionless)",
            )
            .meta("parametrization", curve.kind())
            .meta("period", float(curve.period()));
            t.rows = curve
                .samples(a.samples)
                .into_iter()
                .map(|(s, p)| vec![s, p.x, p.y])
                .collect();
            t
        }
        PlotKind::Orbit => {
            let system = required(a.system, "system")?;
            let (k, r) = (required(a.k, "k")?, a.r.unwrap_or(1));
            let billiard = build(
                system,
                required(a.curve.as_deref(), "curve")?,
                a.body.as_deref(),
            )?;
            let sys = billiard.system();
            let orbit = periodic_orbit_solve(sys, k, r, &uniform_init(0.0, k, r, sys.period()))?;
            let mut t = Table::new(
                format!("billiard-lab plot-data orbit {}", sys.name()),
                vec!["i", "t", "x", "y"],
                "t curve parameter, x and y lengths (dimensionless)",
            )
            .meta("action", float(orbit.action));
            // Closed polyline: the first point is repeated at the end.
            t.rows = (0..=k)
                .map(|i| {
                    let s = orbit.params[i % k];
                    let p = billiard.curve().position(s);
                    vec![i as f64, s, p.x, p.y]
                })
                .collect();
            t
        }
        PlotKind::AngleProfile => {
            let spec = load_spec(required(a.curve.as_deref(), "curve")?)?;
            let support = spec
                .support_curve()?
                .ok_or_else(|| CliError::new(5, "angle profile needs a support_fourier curve"))?;
            let (k, r) = (required(a.k, "k")?, a.r.unwrap_or(1));
            let r = usize::try_from(r).map_err(|_| CliError::new(5, "--r must be positive"))?;
            let profile = gutkin_angle_profile(&support, r, k)?;
            let mut t = Table::new(
                "billiard-lab plot-data angle-profile",
                vec!["psi", "d"],
                "psi and d in radians",
            )
            .meta("target", float(profile.target))
            .meta("deviation", float(profile.deviation));
            t.rows = (0..a.samples)
                .map(|i| {
                    let psi = 2.0 * PI * i as f64 / a.samples as f64;
                    vec![psi, profile.angle(psi)]
                })
                .collect();
            t
        }
        PlotKind::Constancy => {
            let arg = a.body.as_deref().or(a.curve.as_deref());
            let body = load_spec(required(arg, "body")?)?.to_body()?;
            let k = required(a.k, "k")?;
            let m = a.m.unwrap_or(1);
            let mut t = Table::new(
                "billiard-lab plot-data constancy",
                vec!["theta", "g"],
                "theta polar angle in radians, g gauge value (dimensionless)",
            )
            .meta("k", k)
            .meta("m", m);
            t.rows = constancy_profile(&body, k, m, a.samples)
                .into_iter()
                .map(|(th, g)| vec![th, g])
                .collect();
            t
        }
    };
    emit(a.out.as_deref().map(Path::new), &table.render())
        .map_err(|e| CliError::io("writing plot data", e))
}
