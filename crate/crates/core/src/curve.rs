//! Closed plane curves, the one-dimensional analogue of the double-graph
//! surfaces. Curves are traversed counter-clockwise so the outer normal is
//! the tangent rotated clockwise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::region::Vec2;

/// Position with first and second derivatives at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub point: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

pub trait ClosedCurve: Send + Sync {
    /// Parameter period `L`; the parameter is not required to be arclength.
    fn period(&self) -> f64;

    /// Jet at `s ∈ [0, L]`; both endpoints must be accepted.
    fn jet(&self, s: f64) -> Jet;

    fn label(&self) -> &str;
}

fn wrap(curve: &dyn ClosedCurve, s: f64) -> f64 {
    s.rem_euclid(curve.period())
}

pub fn point(curve: &dyn ClosedCurve, s: f64) -> Vec2 {
    curve.jet(wrap(curve, s)).point
}

/// Signed curvature `(x'y'' − y'x'')/|r'|³`, positive for a counter-clockwise circle.
pub fn curvature(curve: &dyn ClosedCurve, s: f64) -> f64 {
    let j = curve.jet(wrap(curve, s));
    (j.d1.x * j.d2.y - j.d1.y * j.d2.x) / j.d1.norm().powi(3)
}

pub fn outer_normal(curve: &dyn ClosedCurve, s: f64) -> Vec2 {
    let t = curve.jet(wrap(curve, s)).d1;
    Vec2::new(t.y, -t.x) / t.norm()
}

pub fn arclength(curve: &dyn ClosedCurve) -> f64 {
    integrate(|s| curve.jet(s).d1.norm(), 0.0, curve.period(), 512)
}

/// Polygonal sample `r(s_k)` with `n` equal parameter steps.
pub fn polygon(curve: &dyn ClosedCurve, n: usize) -> Vec<Vec2> {
    let l = curve.period();
    (0..n)
        .map(|k| curve.jet(l * k as f64 / n as f64).point)
        .collect()
}

/// Winding number of the sampled polygon around `p`.
pub fn winding_number(poly: &[Vec2], p: Vec2) -> i32 {
    let mut w = 0;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && cross > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Checks closure of the jet, regularity, finite curvature and simplicity of
/// an `n`-point sample.
pub fn validate_curve(curve: &dyn ClosedCurve, n: usize) -> Result<()> {
    let l = curve.period();
    if !(l > 0.0) {
        return Err(Error::InvalidCurve("period must be positive".into()));
    }
    let (a, b) = (curve.jet(0.0), curve.jet(l));
    for (what, u, v) in [
        ("position", a.point, b.point),
        ("tangent", a.d1, b.d1),
        ("acceleration", a.d2, b.d2),
    ] {
        if (u - v).norm() > 1e-9 {
            return Err(Error::InvalidCurve(format!(
                "{what} does not close: {u:?} vs {v:?}"
            )));
        }
    }
    for k in 0..n {
        let s = l * k as f64 / n as f64;
        let j = curve.jet(s);
        if !(j.d1.norm() > 1e-12) || !curvature(curve, s).is_finite() {
            return Err(Error::InvalidCurve(format!("singular at s = {s}")));
        }
    }
    let poly = polygon(curve, n);
    if let Some((i, j)) = self_intersection(&poly) {
        return Err(Error::InvalidCurve(format!(
            "segments {i} and {j} intersect"
        )));
    }
    // counter-clockwise orientation
    let area2: f64 = (0..n)
        .map(|k| {
            let (p, q) = (poly[k], poly[(k + 1) % n]);
            p.x * q.y - q.x * p.y
        })
        .sum();
    if area2 <= 0.0 {
        return Err(Error::InvalidCurve(
            "curve must be counter-clockwise".into(),
        ));
    }
    Ok(())
}

fn self_intersection(poly: &[Vec2]) -> Option<(usize, usize)> {
    let n = poly.len();
    let seg = |k: usize| (poly[k], poly[(k + 1) % n]);
    let orient = |a: Vec2, b: Vec2, c: Vec2| (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    // sort segments by min x and sweep
    let mut order: Vec<usize> = (0..n).collect();
    let lo = |k: usize| {
        let (a, b) = seg(k);
        a.x.min(b.x)
    };
    let hi = |k: usize| {
        let (a, b) = seg(k);
        a.x.max(b.x)
    };
    order.sort_by(|&a, &b| lo(a).total_cmp(&lo(b)));
    for (oi, &i) in order.iter().enumerate() {
        let (p1, p2) = seg(i);
        for &j in &order[oi + 1..] {
            if lo(j) > hi(i) {
                break;
            }
            if i.abs_diff(j) <= 1 || i.abs_diff(j) == n - 1 {
                continue;
            }
            let (q1, q2) = seg(j);
            let d1 = orient(p1, p2, q1);
            let d2 = orient(p1, p2, q2);
            let d3 = orient(q1, q2, p1);
            let d4 = orient(q1, q2, p2);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

/// Circle of the given radius, parametrized by arclength.
#[derive(Debug, Clone)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl ClosedCurve for Circle {
    fn period(&self) -> f64 {
        2.0 * PI * self.radius
    }

    fn jet(&self, s: f64) -> Jet {
        let r = self.radius;
        let (sn, cs) = (s / r).sin_cos();
        Jet {
            point: self.center + Vec2::new(r * cs, r * sn),
            d1: Vec2::new(-sn, cs),
            d2: Vec2::new(-cs, -sn) / r,
        }
    }

    fn label(&self) -> &str {
        "circle"
    }
}

/// Axis-aligned ellipse `(a cos s, b sin s)`.
#[derive(Debug, Clone)]
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
}

impl ClosedCurve for Ellipse {
    fn period(&self) -> f64 {
        2.0 * PI
    }

    fn jet(&self, s: f64) -> Jet {
        let (sn, cs) = s.sin_cos();
        Jet {
            point: Vec2::new(self.a * cs, self.b * sn),
            d1: Vec2::new(-self.a * sn, self.b * cs),
            d2: Vec2::new(-self.a * cs, -self.b * sn),
        }
    }

    fn label(&self) -> &str {
        "ellipse"
    }
}

/// One arm of the fork: `x = root ± len·((2σ − σ²)³)`, `y = mid ± t(σ)` with
/// `t = u·(A + Bu² + Cu⁴)`, `u = 1 − σ`. `σ = 0` is the junction, `σ = 1` the
/// rounded tip where the two sides meet with a vertical tangent.
#[derive(Debug, Clone, Copy)]
struct Arm {
    dir: f64,
    len: f64,
    mid: f64,
    coef: [f64; 3],
}

impl Arm {
    /// `half` is the half-width at the junction and `slope` the value of
    /// `−dt/du` there; the coefficients make `d²t/du²` vanish at the junction.
    fn new(dir: f64, len: f64, mid: f64, half: f64, slope: f64) -> Self {
        let c = 3.0 * (half + slope) / 8.0;
        let b = -10.0 * c / 3.0;
        let a = half - b - c;
        Arm {
            dir,
            len,
            mid,
            coef: [a, b, c],
        }
    }

    /// `(x, x', x'')` in σ.
    fn x(&self, sig: f64) -> [f64; 3] {
        let w = 2.0 * sig - sig * sig;
        let dw = 2.0 - 2.0 * sig;
        let k = self.dir * self.len;
        [
            k * w.powi(3),
            k * 3.0 * w * w * dw,
            k * (6.0 * w * dw * dw - 6.0 * w * w),
        ]
    }

    /// `(t, t', t'')` in σ.
    fn t(&self, sig: f64) -> [f64; 3] {
        let u = 1.0 - sig;
        let [a, b, c] = self.coef;
        let t = u * (a + b * u * u + c * u.powi(4));
        let dt = a + 3.0 * b * u * u + 5.0 * c * u.powi(4);
        let ddt = 6.0 * b * u + 20.0 * c * u.powi(3);
        [t, -dt, ddt]
    }

    /// Upper (`side = 1`) or lower (`side = -1`) side, traversed with σ
    /// increasing (`forward`) or decreasing.
    fn jet(&self, side: f64, sig: f64, forward: bool) -> Jet {
        let x = self.x(sig);
        let t = self.t(sig);
        let v = if forward { 1.0 } else { -1.0 };
        Jet {
            point: Vec2::new(x[0], self.mid + side * t[0]),
            d1: v * Vec2::new(x[1], side * t[1]),
            d2: Vec2::new(x[2], side * t[2]),
        }
    }
}

/// An asymmetric C² closed curve whose vertical chords pair points of equal
/// curvature: a handle on `x < 0` splits at `x = 0` into two prongs of
/// different lengths and heights. Each arm is mirror-symmetric about its own
/// midline, while the whole curve is symmetric about no horizontal line.
#[derive(Debug, Clone)]
pub struct ForkTube {
    handle: Arm,
    upper: Arm,
    lower: Arm,
}

impl Default for ForkTube {
    fn default() -> Self {
        ForkTube {
            handle: Arm::new(-1.0, 1.0, 0.0, 0.5, 0.25),
            upper: Arm::new(1.0, 0.8, 0.3, 0.2, -0.25),
            lower: Arm::new(1.0, 1.2, -0.2, 0.3, -0.25),
        }
    }
}

impl ForkTube {
    /// Parameter values of the notch between the prongs and the two
    /// junction points on the outer sides.
    pub fn junction_parameters(&self) -> [f64; 3] {
        [2.0, 4.0, 0.0]
    }
}

impl ClosedCurve for ForkTube {
    fn period(&self) -> f64 {
        6.0
    }

    fn jet(&self, s: f64) -> Jet {
        let piece = (s.floor() as i64).clamp(0, 5);
        let f = s - piece as f64;
        match piece {
            0 => self.lower.jet(-1.0, f, true),
            1 => self.lower.jet(1.0, 1.0 - f, false),
            2 => self.upper.jet(-1.0, f, true),
            3 => self.upper.jet(1.0, 1.0 - f, false),
            4 => self.handle.jet(1.0, f, true),
            _ => self.handle.jet(-1.0, 1.0 - f, false),
        }
    }

    fn label(&self) -> &str {
        "slanted_tube"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_curvature_and_length() {
        for r in [1.0, 2.0] {
            let c = Circle {
                center: Vec2::zeros(),
                radius: r,
            };
            validate_curve(&c, 2000).unwrap();
            for s in [0.0, 0.7, 3.0] {
                assert!((curvature(&c, s) - 1.0 / r).abs() < 1e-9);
            }
            assert!((arclength(&c) - 2.0 * PI * r).abs() < 1e-9);
            assert!((outer_normal(&c, 0.0) - Vec2::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fork_is_a_valid_c2_curve() {
        let c = ForkTube::default();
        validate_curve(&c, 6000).unwrap();
        // derivative continuity across every piece boundary
        for k in 1..6 {
            let s = k as f64;
            let (a, b) = (c.jet(s - 1e-12), c.jet(s));
            assert!((a.point - b.point).norm() < 1e-9, "piece {k}");
            assert!(
                (a.d1 - b.d1).norm() < 1e-9,
                "piece {k}: {:?} {:?}",
                a.d1,
                b.d1
            );
            assert!(
                (a.d2 - b.d2).norm() < 1e-9,
                "piece {k}: {:?} {:?}",
                a.d2,
                b.d2
            );
        }
    }

    #[test]
    fn fork_mirror_pairs_share_curvature() {
        let c = ForkTube::default();
        for f in [0.1, 0.37, 0.8, 0.99] {
            let lower = curvature(&c, f);
            let upper = curvature(&c, 2.0 - f);
            assert!((lower - upper).abs() < 1e-12);
            assert!((point(&c, f).x - point(&c, 2.0 - f).x).abs() < 1e-12);
        }
    }

    #[test]
    fn fork_notch_has_horizontal_normal() {
        let c = ForkTube::default();
        let s = c.junction_parameters()[0];
        assert!((point(&c, s) - Vec2::new(0.0, 0.1)).norm() < 1e-12);
        assert!((outer_normal(&c, s) - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn winding_of_circle() {
        let poly = polygon(
            &Circle {
                center: Vec2::zeros(),
                radius: 1.0,
            },
            200,
        );
        assert_eq!(winding_number(&poly, Vec2::zeros()), 1);
        assert_eq!(winding_number(&poly, Vec2::new(2.0, 0.0)), 0);
    }

    #[test]
    fn clockwise_is_rejected() {
        struct Cw;
        impl ClosedCurve for Cw {
            fn period(&self) -> f64 {
                2.0 * PI
            }
            fn jet(&self, s: f64) -> Jet {
                let (sn, cs) = s.sin_cos();
                Jet {
                    point: Vec2::new(cs, -sn),
                    d1: Vec2::new(-sn, -cs),
                    d2: Vec2::new(-cs, sn),
                }
            }
            fn label(&self) -> &str {
                "cw"
            }
        }
        assert!(validate_curve(&Cw, 500).is_err());
    }
}
