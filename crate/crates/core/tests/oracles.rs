//! Closed-form values computed independently of the library's formulas.

use std::f64::consts::PI;

use hyposym::corpus;
use hyposym::curvature::{curve_curvature, mean_curvature_pair};
use hyposym::curve::{Circle, Ellipse};
use hyposym::region::Vec2;
use hyposym::surface::area;
use hyposym::variation::claim2_bound;

/// Mean curvature of `z = g(r)` from the meridian and parallel curvatures of
/// a surface of revolution.
fn revolution_mean_curvature(g1: f64, g2: f64, r: f64) -> f64 {
    let w = 1.0 + g1 * g1;
    let meridian = g2 / w.powf(1.5);
    let parallel = g1 / (r * w.sqrt());
    -(meridian + parallel) / 2.0
}

#[test]
fn ellipsoid_curvature_matches_revolution_formula() {
    let (a, c) = (1.0, 0.5);
    let s = corpus::ellipsoid(a, c, 0.0, 0.02).unwrap();
    for &(x, y) in &[(0.1, 0.2), (0.5, -0.3), (-0.7, 0.1), (0.0, 0.85)] {
        let r: f64 = f64::hypot(x, y);
        let q = (1.0 - r * r / (a * a)).sqrt();
        let g1 = -c * r / (a * a * q);
        let g2 = -c / (a * a * q) - c * r * r / (a.powi(4) * q.powi(3));
        let exact = revolution_mean_curvature(g1, g2, r);
        let got = mean_curvature_pair(&s, Vec2::new(x, y)).unwrap();
        assert!(
            (got.h_upper - exact).abs() < 1e-9,
            "{x},{y}: {} vs {exact}",
            got.h_upper
        );
        assert!((got.h_lower - exact).abs() < 1e-9);
    }
}

#[test]
fn torus_curvature_matches_principal_curvatures() {
    let (big, small) = (2.0, 0.5);
    let s = corpus::torus(big, small, 0.0, 0.02).unwrap();
    for &r in &[1.6, 1.8, 2.0, 2.2, 2.4] {
        let cos_t = (r - big) / small;
        let exact = 0.5 * (1.0 / small + cos_t / (big + small * cos_t));
        let p = Vec2::new(r * 0.6, r * 0.8);
        let got = mean_curvature_pair(&s, p).unwrap();
        assert!(
            (got.h_upper - exact).abs() < 1e-9,
            "r={r}: {} vs {exact}",
            got.h_upper
        );
        assert!((got.h_lower - exact).abs() < 1e-9);
    }
}

#[test]
fn areas_match_closed_forms() {
    let (a, c) = (1.0f64, 0.5f64);
    let e = (1.0 - c * c / (a * a)).sqrt();
    let spheroid = 2.0 * PI * a * a * (1.0 + (1.0 - e * e) / e * e.atanh());
    let cases = [
        (corpus::sphere(1.0, 0.0, 0.01).unwrap(), 4.0 * PI),
        (corpus::ellipsoid(a, c, 0.0, 0.01).unwrap(), spheroid),
        (
            corpus::torus(2.0, 0.5, 0.0, 0.01).unwrap(),
            4.0 * PI * PI * 2.0 * 0.5,
        ),
    ];
    for (s, exact) in cases {
        let got = area(&s, 0.1).unwrap().total;
        assert!(
            (got - exact).abs() < 1e-3 * exact,
            "{}: {got} vs {exact}",
            s.label()
        );
    }
}

#[test]
fn curve_curvatures() {
    let circle = Circle {
        center: Vec2::new(0.3, -0.2),
        radius: 2.0,
    };
    for s in [0.0, 1.0, 5.0] {
        assert!((curve_curvature(&circle, s) - 0.5).abs() < 1e-12);
    }
    let (a, b) = (2.0, 0.5);
    let ellipse = Ellipse { a, b };
    // vertex curvatures a/b² and b/a²
    assert!((curve_curvature(&ellipse, 0.0) - a / (b * b)).abs() < 1e-9);
    let quarter = 0.25 * hyposym::curve::ClosedCurve::period(&ellipse);
    assert!((curve_curvature(&ellipse, quarter) - b / (a * a)).abs() < 1e-9);
}

#[test]
fn alignment_bound_formula() {
    for &(rho, r, d) in &[
        (0.5f64, 1.5f64, 0.2f64),
        (1.0, 1.0, 0.05),
        (0.25, 3.0, 0.01),
    ] {
        let exact = 2.0 * (2.0 * (rho + r) * d / (rho * r)).sqrt();
        assert!((claim2_bound(rho, r, d) - exact).abs() < 1e-14);
    }
    assert!((claim2_bound(0.5, 1.5, 0.2) - 2.0 * (16.0f64 / 3.0 * 0.2).sqrt()).abs() < 1e-14);
}
