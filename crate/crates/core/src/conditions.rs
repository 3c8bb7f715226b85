//! Checkers for the curvature ordering hypothesis and the geometric
//! conditions on vertical tangent planes and cylinders.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::sample_at_cell;
use crate::curve::{self, ClosedCurve};
use crate::error::{Error, Result};
use crate::region::{GridRegion, Vec2};
use crate::surface::DoubleGraphSurface;

const MAX_WITNESSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub points: Vec<[f64; 2]>,
    pub values: BTreeMap<String, f64>,
    pub margin: f64,
}

/// Outcome of one check. `pass ⇔ worst_margin ≥ −tolerance`; witnesses are
/// the tightest samples, sorted by margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub condition: String,
    pub pass: bool,
    pub worst_margin: f64,
    pub witnesses: Vec<Witness>,
    pub tolerance: f64,
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn verdict(
    condition: &str,
    mut samples: Vec<Witness>,
    tolerance: f64,
    params: &[(&str, f64)],
    mut notes: Vec<String>,
) -> ConditionVerdict {
    samples.sort_by(|a, b| a.margin.total_cmp(&b.margin));
    let worst_margin = match samples.first() {
        Some(w) => w.margin,
        None => {
            notes.push("no samples".into());
            0.0
        }
    };
    samples.truncate(MAX_WITNESSES);
    ConditionVerdict {
        condition: condition.into(),
        pass: worst_margin >= -tolerance,
        worst_margin,
        witnesses: samples,
        tolerance,
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        notes,
    }
}

fn witness(points: &[Vec2], values: &[(&str, f64)], margin: f64) -> Witness {
    Witness {
        points: points.iter().map(|p| [p.x, p.y]).collect(),
        values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        margin,
    }
}

const TWO_SHEET_NOTE: &str = "two-sheet specialization: pairs (f2(x'), f1(x')) over R_delta";

fn curvature_margins(surface: &DoubleGraphSurface, delta: f64) -> Result<Vec<(Vec2, f64, f64)>> {
    let region = surface.region();
    if delta < 2.0 * region.h() - 1e-12 {
        return Err(Error::InvalidParameter(format!("delta_eval {delta} < 2h")));
    }
    let cells: Vec<usize> = region
        .inside_cells()
        .filter(|&k| region.dist(k) > delta)
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|k| {
            let c = sample_at_cell(surface, k);
            (region.cell_center(k), c.h_upper, c.h_lower)
        })
        .collect())
}

/// Upper point's mean curvature must not exceed the lower point's:
/// margin `H_lower − H_upper` on every cell of `R_δ`.
pub fn check_main_assumption(
    surface: &DoubleGraphSurface,
    delta_eval: f64,
    tol: f64,
) -> Result<ConditionVerdict> {
    let samples = curvature_margins(surface, delta_eval)?
        .into_iter()
        .map(|(p, hu, hl)| witness(&[p], &[("h_upper", hu), ("h_lower", hl)], hl - hu))
        .collect();
    Ok(verdict(
        "main_assumption",
        samples,
        tol,
        &[("delta_eval", delta_eval), ("h", surface.h())],
        vec![TWO_SHEET_NOTE.into()],
    ))
}

/// Equality mode: margin `−|H_upper − H_lower|`.
pub fn check_curvature_equality(
    surface: &DoubleGraphSurface,
    delta_eval: f64,
    tol: f64,
) -> Result<ConditionVerdict> {
    let samples = curvature_margins(surface, delta_eval)?
        .into_iter()
        .map(|(p, hu, hl)| witness(&[p], &[("h_upper", hu), ("h_lower", hl)], -(hl - hu).abs()))
        .collect();
    Ok(verdict(
        "curvature_equality",
        samples,
        tol,
        &[("delta_eval", delta_eval), ("h", surface.h())],
        vec![TWO_SHEET_NOTE.into()],
    ))
}

/// Convex hull (counter-clockwise, Andrew's monotone chain).
fn convex_hull(mut pts: Vec<Vec2>) -> Vec<Vec2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Vec2, a: Vec2, b: Vec2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Every vertical tangent plane keeps `R` (hence the surface) on one side:
/// margin `−max_{y' ∈ R} ν₀'·(y' − x₀')` per boundary sample.
pub fn check_condition_s(surface: &DoubleGraphSurface, tol: f64) -> ConditionVerdict {
    check_condition_s_region(surface.region(), tol)
}

pub fn check_condition_s_region(region: &GridRegion, tol: f64) -> ConditionVerdict {
    let hull = convex_hull(
        region
            .inside_cells()
            .map(|k| region.cell_center(k))
            .collect(),
    );
    let tie = 2.0 * region.h() * (1.0 + region.max_normal_turn());
    let samples = region
        .boundary()
        .par_iter()
        .map(|b| {
            let reach = hull
                .iter()
                .map(|y| b.normal.dot(&(y - b.position)))
                .fold(f64::MIN, f64::max);
            witness(
                &[b.position],
                &[("normal_x", b.normal.x), ("normal_y", b.normal.y)],
                -reach,
            )
        })
        .collect();
    verdict(
        "condition_s",
        samples,
        tol.max(tie),
        &[("h", region.h())],
        vec![],
    )
}

/// The solid vertical cylinder of radius `r` pushed out along each
/// horizontal normal must miss the enclosed region; its projection is the
/// disk `B(x₀' + rν₀', r)`, and the margin is `dist(center, R) − r`.
pub fn check_condition_sprime(
    surface: &DoubleGraphSurface,
    r: f64,
    tol: f64,
) -> Result<ConditionVerdict> {
    check_condition_sprime_region(surface.region(), r, tol)
}

pub fn check_condition_sprime_region(
    region: &GridRegion,
    r: f64,
    tol: f64,
) -> Result<ConditionVerdict> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cylinder radius must be positive, got {r}"
        )));
    }
    let samples = region
        .boundary()
        .par_iter()
        .map(|b| {
            let c = b.position + r * b.normal;
            let margin = -region.signed_distance(c) - r;
            witness(
                &[b.position, c],
                &[("normal_x", b.normal.x), ("normal_y", b.normal.y)],
                margin,
            )
        })
        .collect();
    Ok(verdict(
        "condition_sprime",
        samples,
        tol.max(2.0 * region.h()),
        &[("r", r), ("h", region.h())],
        vec![],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SprimeRadius {
    pub radius: f64,
    /// The condition holds up to the region diameter: the Condition S limit.
    pub capped: bool,
    pub tolerance: f64,
}

fn bisect_radius(
    lo: f64,
    cap: f64,
    tol: f64,
    passes: impl Fn(f64) -> Result<bool>,
) -> Result<SprimeRadius> {
    if !passes(lo)? {
        return Err(Error::NoSprimeRadius);
    }
    if passes(cap)? {
        return Ok(SprimeRadius {
            radius: cap,
            capped: true,
            tolerance: tol,
        });
    }
    let (mut a, mut b) = (lo, cap);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if passes(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(SprimeRadius {
        radius: a,
        capped: false,
        tolerance: tol,
    })
}

/// Largest passing cylinder radius by bisection, capped at the region diameter.
pub fn max_sprime_radius(surface: &DoubleGraphSurface, tol: f64) -> Result<SprimeRadius> {
    let region = surface.region();
    let h = region.h();
    bisect_radius(h, region.diameter(), tol, |r| {
        Ok(check_condition_sprime_region(region, r, 0.0)?.pass)
    })
}

/// Point of a curve whose outer normal is horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizontalPoint {
    pub s: f64,
    pub point: [f64; 2],
    /// `±1`, the direction of the normal.
    pub direction: f64,
}

fn normal_tilt(c: &dyn ClosedCurve, s: f64) -> f64 {
    let j = c.jet(s.rem_euclid(c.period()));
    j.d1.x.abs() / j.d1.norm()
}

/// Local minima of `|x'|/|r'|` refined by golden-section search and kept
/// when below 1e-6.
pub fn horizontal_normal_points(c: &dyn ClosedCurve) -> Vec<HorizontalPoint> {
    let n = 24_000;
    let l = c.period();
    let ds = l / n as f64;
    let vals: Vec<f64> = (0..n).map(|k| normal_tilt(c, k as f64 * ds)).collect();
    let mut out: Vec<HorizontalPoint> = Vec::new();
    for k in 0..n {
        let (a, b, m) = (vals[(k + n - 1) % n], vals[(k + 1) % n], vals[k]);
        if !(m <= a && m < b && m < 1e-2) {
            continue;
        }
        let (mut lo, mut hi) = (k as f64 * ds - ds, k as f64 * ds + ds);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..120 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if normal_tilt(c, x1) <= normal_tilt(c, x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let s = (0.5 * (lo + hi)).rem_euclid(l);
        if normal_tilt(c, s) < 1e-6 {
            let p = curve::point(c, s);
            let nx = curve::outer_normal(c, s).x.signum();
            if !out
                .iter()
                .any(|q| (Vec2::new(q.point[0], q.point[1]) - p).norm() < 1e-6)
            {
                out.push(HorizontalPoint {
                    s,
                    point: [p.x, p.y],
                    direction: nx,
                });
            }
        }
    }
    out
}

fn x_range(poly: &[Vec2]) -> (f64, f64) {
    poly.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p.x), hi.max(p.x))
    })
}

/// Condition S for a plane curve: each vertical tangent line keeps the
/// curve on one side.
pub fn check_condition_s_curve(c: &dyn ClosedCurve, tol: f64) -> ConditionVerdict {
    let poly = curve::polygon(c, 24_000);
    let samples = horizontal_normal_points(c)
        .into_iter()
        .map(|hp| {
            let reach = poly
                .iter()
                .map(|y| hp.direction * (y.x - hp.point[0]))
                .fold(f64::MIN, f64::max);
            let p = Vec2::new(hp.point[0], hp.point[1]);
            witness(&[p], &[("s", hp.s), ("direction", hp.direction)], -reach)
        })
        .collect();
    verdict("condition_s", samples, tol, &[], vec![])
}

/// Condition S′ for a plane curve: the interval `(x₀ + rν − r, x₀ + rν + r)`
/// must miss the open projection `(x_min, x_max)`.
pub fn check_condition_sprime_curve(
    c: &dyn ClosedCurve,
    r: f64,
    tol: f64,
) -> Result<ConditionVerdict> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cylinder radius must be positive, got {r}"
        )));
    }
    let (xmin, xmax) = x_range(&curve::polygon(c, 24_000));
    let samples = horizontal_normal_points(c)
        .into_iter()
        .map(|hp| {
            let center = hp.point[0] + r * hp.direction;
            let margin = (center - r - xmax).max(xmin - center - r);
            let p = Vec2::new(hp.point[0], hp.point[1]);
            witness(&[p], &[("s", hp.s), ("direction", hp.direction)], margin)
        })
        .collect();
    Ok(verdict(
        "condition_sprime",
        samples,
        tol,
        &[("r", r)],
        vec![],
    ))
}

pub fn max_sprime_radius_curve(c: &dyn ClosedCurve, tol: f64) -> Result<SprimeRadius> {
    let (xmin, xmax) = x_range(&curve::polygon(c, 24_000));
    let width = xmax - xmin;
    let step = width / 24_000.0;
    bisect_radius(step, width, tol, |r| {
        Ok(check_condition_sprime_curve(c, r, step)?.pass)
    })
}

/// Options for the vertical-chord comparison on curves.
#[derive(Debug, Clone, Copy)]
pub struct PairwiseOptions {
    pub lines: usize,
    pub samples: usize,
    pub equality: bool,
}

impl Default for PairwiseOptions {
    fn default() -> Self {
        PairwiseOptions {
            lines: 400,
            samples: 24_000,
            equality: false,
        }
    }
}

/// For every sampled vertical line, pairs consecutive crossings whose
/// connecting segment lies inside the curve and compares curvatures: the
/// upper point's curvature must not exceed the lower point's.
pub fn check_pairwise_main_assumption(
    c: &dyn ClosedCurve,
    tol: f64,
    opts: PairwiseOptions,
) -> ConditionVerdict {
    let l = c.period();
    let ds = l / opts.samples as f64;
    let poly = curve::polygon(c, opts.samples);
    let (xmin, xmax) = x_range(&poly);
    let per_line: Vec<(Vec<Witness>, bool)> = (0..opts.lines)
        .into_par_iter()
        .map(|k| {
            let x = xmin + (k as f64 + 0.5) * (xmax - xmin) / opts.lines as f64;
            let mut roots = Vec::new();
            for i in 0..opts.samples {
                let (a, b) = (poly[i].x - x, poly[(i + 1) % opts.samples].x - x);
                if a == 0.0 || a * b < 0.0 {
                    let (mut lo, mut hi) = (i as f64 * ds, (i + 1) as f64 * ds);
                    let f = |s: f64| curve::point(c, s).x - x;
                    let flo = f(lo);
                    for _ in 0..80 {
                        let m = 0.5 * (lo + hi);
                        if (f(m) < 0.0) == (flo < 0.0) {
                            lo = m;
                        } else {
                            hi = m;
                        }
                    }
                    roots.push(0.5 * (lo + hi));
                }
            }
            let tangential = roots.iter().any(|&s| normal_tilt(c, s) < 1e-6);
            if tangential || roots.len() % 2 == 1 {
                return (Vec::new(), true);
            }
            let mut pts: Vec<(f64, Vec2)> =
                roots.iter().map(|&s| (s, curve::point(c, s))).collect();
            pts.sort_by(|a, b| a.1.y.total_cmp(&b.1.y));
            let mut out = Vec::new();
            for w in pts.windows(2) {
                let ((sa, a), (sb, b)) = (w[0], w[1]);
                if curve::winding_number(&poly, 0.5 * (a + b)) == 0 {
                    continue;
                }
                let (ka, kb) = (curve::curvature(c, sa), curve::curvature(c, sb));
                let margin = if opts.equality {
                    -(ka - kb).abs()
                } else {
                    ka - kb
                };
                out.push(witness(
                    &[a, b],
                    &[("kappa_lower", ka), ("kappa_upper", kb)],
                    margin,
                ));
            }
            (out, false)
        })
        .collect();
    let skipped = per_line.iter().filter(|(_, s)| *s).count();
    let samples: Vec<Witness> = per_line.into_iter().flat_map(|(w, _)| w).collect();
    let notes = vec![format!(
        "skipped {skipped} tangential or odd vertical lines"
    )];
    verdict(
        if opts.equality {
            "pairwise_curvature_equality"
        } else {
            "pairwise_main_assumption"
        },
        samples,
        tol,
        &[
            ("lines", opts.lines as f64),
            ("skipped_lines", skipped as f64),
        ],
        notes,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{perturbed_sphere, sphere, torus};
    use crate::curve::{Circle, Ellipse, ForkTube};

    #[test]
    fn sphere_conditions() {
        let s = sphere(1.0, 0.0, 0.02).unwrap();
        let v = check_main_assumption(&s, 0.1, 1e-6).unwrap();
        assert!(v.pass && v.worst_margin.abs() < 1e-6, "{v:?}");
        assert!(check_condition_s(&s, 0.0).pass);
        for r in [0.1, 1.0, 5.0] {
            assert!(check_condition_sprime(&s, r, 0.0).unwrap().pass);
        }
        assert!(max_sprime_radius(&s, 0.01).unwrap().capped);
    }

    #[test]
    fn torus_ladder() {
        let t = torus(2.0, 0.5, 0.0, 0.02).unwrap();
        for r in [0.5, 1.0, 1.4] {
            assert!(check_condition_sprime(&t, r, 0.0).unwrap().pass, "r = {r}");
        }
        for r in [1.6, 2.0] {
            assert!(!check_condition_sprime(&t, r, 0.0).unwrap().pass, "r = {r}");
        }
        let s = check_condition_s(&t, 0.0);
        assert!(!s.pass);
        let w = &s.witnesses[0].points[0];
        assert!(((w[0] * w[0] + w[1] * w[1]).sqrt() - 1.5).abs() < 0.05);
        let r = max_sprime_radius(&t, 0.005).unwrap();
        assert!((r.radius - 1.5).abs() < 0.04, "{r:?}");
    }

    #[test]
    fn perturbed_sphere_violates_ordering() {
        let s = perturbed_sphere(0.1, 0.02).unwrap();
        assert!(!check_main_assumption(&s, 0.1, 1e-6).unwrap().pass);
    }

    #[test]
    fn curves() {
        let circle = Circle {
            center: Vec2::zeros(),
            radius: 1.0,
        };
        let eq = PairwiseOptions {
            equality: true,
            ..Default::default()
        };
        let v = check_pairwise_main_assumption(&circle, 1e-9, eq);
        assert!(v.pass, "{v:?}");
        assert!(check_condition_s_curve(&circle, 1e-6).pass);
        let e = Ellipse { a: 2.0, b: 1.0 };
        assert!(check_pairwise_main_assumption(&e, 1e-9, eq).pass);

        let fork = ForkTube::default();
        let v = check_pairwise_main_assumption(&fork, 1e-3, eq);
        assert!(v.pass, "{v:?}");
        assert!(v.witnesses.len() >= 10);
        assert!(!check_condition_s_curve(&fork, 1e-6).pass);
        assert_eq!(
            max_sprime_radius_curve(&fork, 1e-3).unwrap_err(),
            Error::NoSprimeRadius
        );
        assert!(max_sprime_radius_curve(&circle, 1e-3).unwrap().capped);
    }

    #[test]
    fn hull_of_square() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, 0.5),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert_eq!(convex_hull(pts).len(), 4);
    }
}
