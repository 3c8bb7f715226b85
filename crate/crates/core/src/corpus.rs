//! Named test surfaces and curves with analytic derivatives and exact collar
//! areas.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::{validate_curve, Circle, ClosedCurve, Ellipse, ForkTube};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::region::{build_region, Bounds, GridRegion, Vec2};
use crate::surface::{make_double_graph, DoubleGraphSurface, HeightFunction, Mat2};

/// `r ↦ (F, F', F'')` for a rotationally symmetric height function.
pub type Profile = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// Height function `F(|x' − center|)`.
pub struct RadialSheet {
    pub center: Vec2,
    pub profile: Profile,
}

impl RadialSheet {
    pub fn new(profile: Profile) -> Self {
        RadialSheet {
            center: Vec2::zeros(),
            profile,
        }
    }
}

impl HeightFunction for RadialSheet {
    fn value(&self, p: Vec2) -> f64 {
        (self.profile)((p - self.center).norm())[0]
    }

    fn gradient(&self, p: Vec2) -> Option<Vec2> {
        let d = p - self.center;
        let r = d.norm();
        if r < 1e-14 {
            return Some(Vec2::zeros());
        }
        Some((self.profile)(r)[1] * d / r)
    }

    fn hessian(&self, p: Vec2) -> Option<Mat2> {
        let d = p - self.center;
        let r = d.norm();
        let [_, f1, f2] = (self.profile)(r);
        if r < 1e-14 {
            return Some(Mat2::identity() * f2);
        }
        let e = d / r;
        let radial = e * e.transpose();
        Some(radial * f2 + (Mat2::identity() - radial) * (f1 / r))
    }
}

/// `sign·scale·√(a² − r²) + shift` with derivatives.
fn cap_profile(a: f64, scale: f64, sign: f64, shift: f64) -> Profile {
    Arc::new(move |r| {
        let q = (a * a - r * r).max(0.0);
        let s = q.sqrt();
        let k = sign * scale;
        [k * s + shift, -k * r / s, -k * a * a / (q * s)]
    })
}

/// Graph area of both sheets over `a − δ < r < a`, using `r = a sin θ` to
/// remove the square-root singularity at the rim.
fn disk_collar(a: f64, slopes: [Profile; 2]) -> impl Fn(f64) -> f64 + Send + Sync {
    move |delta: f64| {
        let theta0 = ((a - delta).max(0.0) / a).asin();
        slopes
            .iter()
            .map(|prof| {
                integrate(
                    |th| {
                        let (sn, cs) = th.sin_cos();
                        let slope = prof(a * sn)[1];
                        2.0 * PI * a * a * sn * (cs * cs + (slope * cs).powi(2)).sqrt()
                    },
                    theta0,
                    0.5 * PI,
                    64,
                )
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    /// Sphere radius.
    pub radius: f64,
    /// Ellipsoid equatorial semi-axis.
    pub a: f64,
    /// Ellipsoid polar semi-axis.
    pub c: f64,
    /// Torus center-circle radius.
    pub major: f64,
    /// Torus tube radius.
    pub minor: f64,
    /// Perturbation amplitude.
    pub eps: f64,
    /// Vertical offset added to both sheets.
    pub lift: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            radius: 1.0,
            a: 1.0,
            c: 0.5,
            major: 2.0,
            minor: 0.5,
            eps: 0.1,
            lift: 0.0,
        }
    }
}

pub const SURFACE_NAMES: [&str; 4] = ["sphere", "ellipsoid", "torus", "perturbed_sphere"];
pub const CURVE_NAMES: [&str; 3] = ["slanted_tube", "circle", "ellipse"];

#[derive(Clone)]
pub enum CorpusEntry {
    Surface(DoubleGraphSurface),
    Curve(Arc<dyn ClosedCurve>),
}

impl CorpusEntry {
    pub fn surface(self) -> Option<DoubleGraphSurface> {
        match self {
            CorpusEntry::Surface(s) => Some(s),
            CorpusEntry::Curve(_) => None,
        }
    }

    pub fn curve(self) -> Option<Arc<dyn ClosedCurve>> {
        match self {
            CorpusEntry::Curve(c) => Some(c),
            CorpusEntry::Surface(_) => None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn disk(radius: f64, h: f64) -> Result<Arc<GridRegion>> {
    let half = radius + 0.1 * radius.max(1.0);
    Ok(Arc::new(build_region(
        |p| p.norm() <= radius,
        Bounds::square(half),
        h,
    )?))
}

pub fn sphere(radius: f64, lift: f64, h: f64) -> Result<DoubleGraphSurface> {
    let r = positive("radius", radius)?;
    let up = cap_profile(r, 1.0, 1.0, lift);
    let down = cap_profile(r, 1.0, -1.0, lift);
    let collar = disk_collar(r, [up.clone(), down.clone()]);
    Ok(make_double_graph(
        disk(r, h)?,
        Arc::new(RadialSheet::new(up)),
        Arc::new(RadialSheet::new(down)),
        0.0,
        "sphere",
    )?
    .with_collar(Arc::new(collar)))
}

/// Ellipsoid of revolution with semi-axes `(a, a, c)`.
pub fn ellipsoid(a: f64, c: f64, lift: f64, h: f64) -> Result<DoubleGraphSurface> {
    let a = positive("a", a)?;
    let c = positive("c", c)?;
    let up = cap_profile(a, c / a, 1.0, lift);
    let down = cap_profile(a, c / a, -1.0, lift);
    let collar = disk_collar(a, [up.clone(), down.clone()]);
    Ok(make_double_graph(
        disk(a, h)?,
        Arc::new(RadialSheet::new(up)),
        Arc::new(RadialSheet::new(down)),
        0.0,
        "ellipsoid",
    )?
    .with_collar(Arc::new(collar)))
}

/// Torus of revolution about the vertical axis with center-circle radius
/// `major` and tube radius `minor`.
pub fn torus(major: f64, minor: f64, lift: f64, h: f64) -> Result<DoubleGraphSurface> {
    let big = positive("major radius", major)?;
    let rho = positive("minor radius", minor)?;
    if rho >= big {
        return Err(Error::InvalidParameter(
            "tube radius must be below the center radius".into(),
        ));
    }
    let tube = move |sign: f64| -> Profile {
        Arc::new(move |r| {
            let d = r - big;
            let q = (rho * rho - d * d).max(0.0);
            let s = q.sqrt();
            [sign * s + lift, -sign * d / s, -sign * rho * rho / (q * s)]
        })
    };
    let region = Arc::new(build_region(
        |p| (p.norm() - big).abs() <= rho,
        Bounds::square(big + rho + 0.1),
        h,
    )?);
    // per sheet, the graph over |r − big| ∈ (ρ − δ, ρ) is the tube surface
    // for θ with |sin θ| > (ρ − δ)/ρ, area element 2πρ(big + ρ sin θ) dθ
    let collar = move |delta: f64| {
        let t0 = ((rho - delta).max(0.0) / rho).asin();
        let prim = |t: f64| 2.0 * PI * rho * (big * t - rho * t.cos());
        let outer = prim(0.5 * PI) - prim(t0);
        let inner = prim(-t0) - prim(-0.5 * PI);
        2.0 * (outer + inner)
    };
    Ok(make_double_graph(
        region,
        Arc::new(RadialSheet::new(tube(1.0))),
        Arc::new(RadialSheet::new(tube(-1.0))),
        0.0,
        "torus",
    )?
    .with_collar(Arc::new(collar)))
}

/// Unit sphere whose upper sheet is raised by `eps·(1 − |x'|²)²`.
pub fn perturbed_sphere(eps: f64, h: f64) -> Result<DoubleGraphSurface> {
    let eps = positive("eps", eps)?;
    let base = cap_profile(1.0, 1.0, 1.0, 0.0);
    let up: Profile = Arc::new(move |r| {
        let [f, df, ddf] = base(r);
        let w = 1.0 - r * r;
        [
            f + eps * w * w,
            df - 4.0 * eps * r * w,
            ddf - 4.0 * eps + 12.0 * eps * r * r,
        ]
    });
    let down = cap_profile(1.0, 1.0, -1.0, 0.0);
    let collar = disk_collar(1.0, [up.clone(), down.clone()]);
    Ok(make_double_graph(
        disk(1.0, h)?,
        Arc::new(RadialSheet::new(up)),
        Arc::new(RadialSheet::new(down)),
        0.0,
        "perturbed_sphere",
    )?
    .with_collar(Arc::new(collar)))
}

/// Builds a corpus entry by name. Surfaces are sampled on a grid of spacing `h`.
pub fn corpus(name: &str, params: &CorpusParams, h: f64) -> Result<CorpusEntry> {
    positive("h", h)?;
    let p = params;
    let entry = match name {
        "sphere" => CorpusEntry::Surface(sphere(p.radius, p.lift, h)?),
        "ellipsoid" => CorpusEntry::Surface(ellipsoid(p.a, p.c, p.lift, h)?),
        "torus" => CorpusEntry::Surface(torus(p.major, p.minor, p.lift, h)?),
        "perturbed_sphere" => CorpusEntry::Surface(perturbed_sphere(p.eps, h)?),
        "slanted_tube" => CorpusEntry::Curve(Arc::new(ForkTube::default())),
        "circle" => CorpusEntry::Curve(Arc::new(Circle {
            center: Vec2::zeros(),
            radius: positive("radius", p.radius)?,
        })),
        "ellipse" => CorpusEntry::Curve(Arc::new(Ellipse {
            a: positive("a", p.a)?,
            b: positive("c", p.c)?,
        })),
        other => return Err(Error::UnknownCorpus(other.to_string())),
    };
    if let CorpusEntry::Curve(c) = &entry {
        validate_curve(c.as_ref(), 4000)?;
    }
    Ok(entry)
}

/// Radius of the largest ball inside the solid touching every boundary
/// point, known in closed form for corpus surfaces.
pub fn interior_ball_radius(name: &str, params: &CorpusParams) -> Option<f64> {
    match name {
        "sphere" => Some(params.radius),
        "torus" => Some(params.minor),
        // smallest principal radius of curvature, attained at the equator
        "ellipsoid" => Some((params.c * params.c / params.a).min(params.a)),
        _ => None,
    }
}

/// What each corpus entry is expected to do under the checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedProfile {
    pub main_assumption: bool,
    /// Vertically aligned points have equal curvature.
    pub curvature_equality: bool,
    pub condition_s: bool,
    pub condition_sprime: bool,
    pub symmetric: bool,
}

pub fn expected_profile(name: &str) -> Option<ExpectedProfile> {
    let p = |main_assumption, curvature_equality, condition_s, condition_sprime, symmetric| {
        ExpectedProfile {
            main_assumption,
            curvature_equality,
            condition_s,
            condition_sprime,
            symmetric,
        }
    };
    match name {
        "sphere" | "ellipsoid" | "circle" | "ellipse" => Some(p(true, true, true, true, true)),
        "torus" => Some(p(true, true, false, true, true)),
        "perturbed_sphere" => Some(p(false, false, true, true, false)),
        "slanted_tube" => Some(p(true, true, false, false, false)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{area, outer_normal, Sheet};

    #[test]
    fn radial_hessian_matches_differences() {
        let s = RadialSheet::new(cap_profile(1.0, 1.0, 1.0, 0.0));
        let p = Vec2::new(0.3, -0.4);
        let fd = crate::surface::fd_hessian(&s, p, 1e-5);
        assert!((s.hessian(p).unwrap() - fd).norm() < 1e-6);
    }

    #[test]
    fn sphere_normals() {
        let s = sphere(1.0, 0.0, 0.02).unwrap();
        let n = outer_normal(&s, Vec2::zeros(), Sheet::Upper).unwrap();
        assert!((n.normal - crate::surface::Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        let n = outer_normal(&s, Vec2::new(0.6, 0.0), Sheet::Upper).unwrap();
        assert!((n.normal - crate::surface::Vec3::new(0.6, 0.0, 0.8)).norm() < 1e-12);
    }

    #[test]
    fn corpus_areas() {
        let s = sphere(1.0, 0.0, 0.01).unwrap();
        let a = area(&s, 0.02).unwrap();
        assert!((a.total - 4.0 * PI).abs() < 0.01 * 4.0 * PI, "{a:?}");
        let t = torus(2.0, 0.5, 0.0, 0.01).unwrap();
        let a = area(&t, 0.02).unwrap();
        let exact = 4.0 * PI * PI * 2.0 * 0.5;
        assert!((a.total - exact).abs() < 0.01 * exact, "{a:?}");
    }

    #[test]
    fn collar_of_full_disk_is_whole_sphere() {
        let up = cap_profile(1.0, 1.0, 1.0, 0.0);
        let down = cap_profile(1.0, 1.0, -1.0, 0.0);
        let c = disk_collar(1.0, [up, down]);
        assert!((c(1.0) - 4.0 * PI).abs() < 1e-10);
        // each sheet is a spherical zone of height √(1 − (1 − δ)²)
        let d: f64 = 0.1;
        let exact = 4.0 * PI * (1.0 - (1.0 - d).powi(2)).sqrt();
        assert!((c(d) - exact).abs() < 1e-10, "{} vs {}", c(d), exact);
    }

    #[test]
    fn unknown_and_bad_parameters() {
        let p = CorpusParams::default();
        assert!(matches!(
            corpus("cube", &p, 0.05),
            Err(Error::UnknownCorpus(_))
        ));
        let bad = CorpusParams { radius: -1.0, ..p };
        assert!(matches!(
            corpus("sphere", &bad, 0.05),
            Err(Error::InvalidParameter(_))
        ));
        assert!(corpus("slanted_tube", &p, 0.05).unwrap().curve().is_some());
    }

    #[test]
    fn perturbed_sum_of_sheets() {
        let s = perturbed_sphere(0.1, 0.05).unwrap();
        for r in [0.0, 0.3, 0.7] {
            let p = Vec2::new(r, 0.0);
            let sum = s.height(Sheet::Upper, p) + s.height(Sheet::Lower, p);
            assert!((sum - 0.1 * (1.0 - r * r).powi(2)).abs() < 1e-14);
        }
    }
}
