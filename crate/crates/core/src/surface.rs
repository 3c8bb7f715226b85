//! Closed hypersurfaces in ℝ³ represented as double graphs over the
//! projection region: an upper sheet `f1` and a lower sheet `f2` with
//! `f1 > f2` on `R°`, plus the constant area `Ŝ` of the part lying over `∂R`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector3};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::region::{GridRegion, Vec2};

pub type Vec3 = Vector3<f64>;
pub type Mat2 = Matrix2<f64>;

/// A height function on `R°` with optional analytic derivatives. Missing
/// derivatives are replaced by second-order central differences.
pub trait HeightFunction: Send + Sync {
    fn value(&self, p: Vec2) -> f64;

    fn gradient(&self, _p: Vec2) -> Option<Vec2> {
        None
    }

    fn hessian(&self, _p: Vec2) -> Option<Mat2> {
        None
    }
}

/// Adapts a plain closure; derivatives come from finite differences.
pub struct FnHeight<F>(pub F);

impl<F: Fn(Vec2) -> f64 + Send + Sync> HeightFunction for FnHeight<F> {
    fn value(&self, p: Vec2) -> f64 {
        (self.0)(p)
    }
}

/// Graph area of both sheets over the collar `{x ∈ R : dist(x, ∂R) ≤ δ}`.
pub type CollarArea = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sheet {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
    Boundary,
}

/// Unit outer normal at a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalSample {
    pub base: Vec3,
    pub normal: Vec3,
    pub side: Side,
}

impl NormalSample {
    /// Horizontal part `ν'`.
    pub fn horizontal(&self) -> Vec2 {
        Vec2::new(self.normal.x, self.normal.y)
    }

    pub fn vertical(&self) -> f64 {
        self.normal.z
    }
}

/// `M = M₁ ∪ M₂ ∪ M̂` with `M₁, M₂` the graphs of `f1 > f2` over `R°`.
#[derive(Clone)]
pub struct DoubleGraphSurface {
    region: Arc<GridRegion>,
    upper: Arc<dyn HeightFunction>,
    lower: Arc<dyn HeightFunction>,
    hat_area: f64,
    label: String,
    collar: Option<CollarArea>,
    fd_step: f64,
}

impl fmt::Debug for DoubleGraphSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DoubleGraphSurface")
            .field("label", &self.label)
            .field("h", &self.region.h())
            .field("hat_area", &self.hat_area)
            .field("analytic_collar", &self.collar.is_some())
            .finish()
    }
}

/// Validates and assembles a double-graph surface. `hat_area` is `Ŝ`.
pub fn make_double_graph(
    region: Arc<GridRegion>,
    upper: Arc<dyn HeightFunction>,
    lower: Arc<dyn HeightFunction>,
    hat_area: f64,
    label: impl Into<String>,
) -> Result<DoubleGraphSurface> {
    if region.dim() != 2 {
        return Err(Error::InvalidParameter(
            "double graphs need a two-dimensional region".into(),
        ));
    }
    if !(hat_area >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "hat area {hat_area} must be >= 0"
        )));
    }
    // h/4 keeps the O(step²) truncation error on R_{0.1} of the unit sphere below 1e-3
    let fd_step = 0.25 * region.h();
    let surface = DoubleGraphSurface {
        region,
        upper,
        lower,
        hat_area,
        label: label.into(),
        collar: None,
        fd_step,
    };
    surface.check_ordering()?;
    surface.check_suppliers()?;
    Ok(surface)
}

impl DoubleGraphSurface {
    /// Attaches an exact collar-area supplier (used by `area`).
    pub fn with_collar(mut self, collar: CollarArea) -> Self {
        self.collar = Some(collar);
        self
    }

    pub fn region(&self) -> &Arc<GridRegion> {
        &self.region
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn hat_area(&self) -> f64 {
        self.hat_area
    }

    pub fn h(&self) -> f64 {
        self.region.h()
    }

    pub fn collar(&self) -> Option<&CollarArea> {
        self.collar.as_ref()
    }

    pub(crate) fn sheet_fn(&self, sheet: Sheet) -> &Arc<dyn HeightFunction> {
        match sheet {
            Sheet::Upper => &self.upper,
            Sheet::Lower => &self.lower,
        }
    }

    /// Same region, label and `Ŝ`, new sheets. Validated like a fresh surface.
    pub(crate) fn with_sheets(
        &self,
        upper: Arc<dyn HeightFunction>,
        lower: Arc<dyn HeightFunction>,
    ) -> Result<DoubleGraphSurface> {
        let s = DoubleGraphSurface {
            upper,
            lower,
            ..self.clone()
        };
        s.check_ordering()?;
        Ok(s)
    }

    /// True when both sheets supply analytic gradients and Hessians.
    pub fn has_analytic_derivatives(&self) -> bool {
        let p = self
            .region
            .inside_cells()
            .max_by(|&a, &b| self.region.dist(a).total_cmp(&self.region.dist(b)))
            .map(|k| self.region.cell_center(k))
            .unwrap_or_else(Vec2::zeros);
        [&self.upper, &self.lower]
            .iter()
            .all(|f| f.gradient(p).is_some() && f.hessian(p).is_some())
    }

    pub fn height(&self, sheet: Sheet, p: Vec2) -> f64 {
        self.sheet_fn(sheet).value(p)
    }

    /// `∇fᵢ(p)`. Finite differences need `dist(p, ∂R) ≥ 2h`.
    pub fn gradient(&self, sheet: Sheet, p: Vec2) -> Result<Vec2> {
        let d = self.require_inside(p)?;
        let f = self.sheet_fn(sheet);
        if let Some(g) = f.gradient(p) {
            return Ok(g);
        }
        if d < 2.0 * self.h() {
            return Err(Error::Derivative(format!(
                "finite differences need dist >= 2h, got {d}"
            )));
        }
        Ok(fd_gradient(f.as_ref(), p, self.fd_step))
    }

    /// `∇²fᵢ(p)`, same availability rules as [`Self::gradient`].
    pub fn hessian(&self, sheet: Sheet, p: Vec2) -> Result<Mat2> {
        let d = self.require_inside(p)?;
        let f = self.sheet_fn(sheet);
        if let Some(hs) = f.hessian(p) {
            return Ok(hs);
        }
        if f.gradient(p).is_none() && d < 2.0 * self.h() {
            return Err(Error::Derivative(format!(
                "finite differences need dist >= 2h, got {d}"
            )));
        }
        Ok(fd_hessian(f.as_ref(), p, self.fd_step))
    }

    /// Gradient at a cell center with known boundary distance; the
    /// finite-difference step shrinks to stay inside `R`.
    pub(crate) fn gradient_at_cell(&self, sheet: Sheet, idx: usize) -> Vec2 {
        let p = self.region.cell_center(idx);
        let f = self.sheet_fn(sheet);
        f.gradient(p).unwrap_or_else(|| {
            let step = self.fd_step.min(0.5 * self.region.dist(idx));
            fd_gradient(f.as_ref(), p, step)
        })
    }

    pub(crate) fn hessian_at_cell(&self, sheet: Sheet, idx: usize) -> Mat2 {
        let p = self.region.cell_center(idx);
        let f = self.sheet_fn(sheet);
        f.hessian(p).unwrap_or_else(|| {
            let step = self.fd_step.min(0.5 * self.region.dist(idx));
            fd_hessian(f.as_ref(), p, step)
        })
    }

    fn require_inside(&self, p: Vec2) -> Result<f64> {
        if !self.region.contains_point(p) {
            return Err(Error::OutsideRegion);
        }
        let d = self.region.signed_distance(p);
        if d <= 0.0 {
            return Err(Error::OutsideRegion);
        }
        Ok(d)
    }

    /// `(x', y) ∈ G ⇔ x' ∈ R° and f2(x') < y < f1(x')`.
    pub fn contains(&self, point: Vec3) -> bool {
        let p = Vec2::new(point.x, point.y);
        if !self.region.contains_point(p) || self.region.signed_distance(p) <= 0.0 {
            return false;
        }
        self.lower.value(p) < point.z && point.z < self.upper.value(p)
    }

    fn check_ordering(&self) -> Result<()> {
        let bad = self
            .region
            .inside_cells()
            .collect::<Vec<_>>()
            .into_par_iter()
            .find_first(|&k| {
                let p = self.region.cell_center(k);
                !(self.upper.value(p) > self.lower.value(p))
            });
        match bad {
            Some(k) => {
                let p = self.region.cell_center(k);
                Err(Error::GraphsCross {
                    x: p.x,
                    y: p.y,
                    gap: self.upper.value(p) - self.lower.value(p),
                })
            }
            None => Ok(()),
        }
    }

    /// Spot-checks analytic suppliers against finite differences on 100
    /// seeded cells away from the boundary.
    fn check_suppliers(&self) -> Result<()> {
        let deep = 0.25 * self.region.inradius();
        let cells: Vec<usize> = self
            .region
            .inside_cells()
            .filter(|&k| self.region.dist(k) >= deep)
            .collect();
        if cells.is_empty() {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let picks = sample(&mut rng, cells.len(), cells.len().min(100));
        let step = 1e-5 * self.region.diameter().max(1.0);
        for n in picks.iter() {
            let p = self.region.cell_center(cells[n]);
            for (name, f) in [("f1", &self.upper), ("f2", &self.lower)] {
                if let Some(g) = f.gradient(p) {
                    let fd = fd_gradient(f.as_ref(), p, step);
                    if (g - fd).norm() > 1e-3 * (1.0 + g.norm()) {
                        return Err(Error::BadDerivatives(format!(
                            "{name} gradient at ({}, {}): supplied {g:?}, differenced {fd:?}",
                            p.x, p.y
                        )));
                    }
                }
                if let Some(hs) = f.hessian(p) {
                    let fd = fd_hessian(
                        f.as_ref(),
                        p,
                        if f.gradient(p).is_some() {
                            step
                        } else {
                            1e2 * step
                        },
                    );
                    if (hs - fd).norm() > 1e-3 * (1.0 + hs.norm()) {
                        return Err(Error::BadDerivatives(format!(
                            "{name} Hessian at ({}, {})",
                            p.x, p.y
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn fd_gradient(f: &dyn HeightFunction, p: Vec2, step: f64) -> Vec2 {
    let ex = Vec2::new(step, 0.0);
    let ey = Vec2::new(0.0, step);
    Vec2::new(
        (f.value(p + ex) - f.value(p - ex)) / (2.0 * step),
        (f.value(p + ey) - f.value(p - ey)) / (2.0 * step),
    )
}

pub(crate) fn fd_hessian(f: &dyn HeightFunction, p: Vec2, step: f64) -> Mat2 {
    if f.gradient(p).is_some() {
        let ex = Vec2::new(step, 0.0);
        let ey = Vec2::new(0.0, step);
        let g = |q: Vec2| f.gradient(q).unwrap_or_else(|| fd_gradient(f, q, step));
        let dx = (g(p + ex) - g(p - ex)) / (2.0 * step);
        let dy = (g(p + ey) - g(p - ey)) / (2.0 * step);
        let off = 0.5 * (dx.y + dy.x);
        return Mat2::new(dx.x, off, off, dy.y);
    }
    let v = |dx: f64, dy: f64| f.value(p + Vec2::new(dx * step, dy * step));
    let c = v(0.0, 0.0);
    let fxx = (v(1.0, 0.0) - 2.0 * c + v(-1.0, 0.0)) / (step * step);
    let fyy = (v(0.0, 1.0) - 2.0 * c + v(0.0, -1.0)) / (step * step);
    let fxy = (v(1.0, 1.0) - v(1.0, -1.0) - v(-1.0, 1.0) + v(-1.0, -1.0)) / (4.0 * step * step);
    Mat2::new(fxx, fxy, fxy, fyy)
}

/// Unit outer normal of the upper or lower sheet from a gradient:
/// `(-∇f1, 1)/√(1+|∇f1|²)` or `(∇f2, -1)/√(1+|∇f2|²)`.
pub fn sheet_normal(sheet: Sheet, grad: Vec2) -> Vec3 {
    let a = (1.0 + grad.norm_squared()).sqrt();
    match sheet {
        Sheet::Upper => Vec3::new(-grad.x, -grad.y, 1.0) / a,
        Sheet::Lower => Vec3::new(grad.x, grad.y, -1.0) / a,
    }
}

/// Outer normal at `(x', fᵢ(x'))`.
pub fn outer_normal(surface: &DoubleGraphSurface, p: Vec2, side: Sheet) -> Result<NormalSample> {
    let g = surface.gradient(side, p)?;
    Ok(NormalSample {
        base: Vec3::new(p.x, p.y, surface.height(side, p)),
        normal: sheet_normal(side, g),
        side: match side {
            Sheet::Upper => Side::Upper,
            Sheet::Lower => Side::Lower,
        },
    })
}

/// Horizontal outer normal `(ν₀', 0)` at a point within `h` of `∂R`.
pub fn boundary_normal(surface: &DoubleGraphSurface, p: Vec2) -> Result<NormalSample> {
    let region = surface.region();
    let (b, d) = region.nearest_boundary(p).ok_or(Error::NotBoundary)?;
    if d > region.h() {
        return Err(Error::NotBoundary);
    }
    // height of M̂ at this boundary point: midpoint of the sheets just inside
    let q = b.position - 0.5 * region.h() * b.normal;
    let z = 0.5 * (surface.height(Sheet::Upper, q) + surface.height(Sheet::Lower, q));
    Ok(NormalSample {
        base: Vec3::new(b.position.x, b.position.y, z),
        normal: Vec3::new(b.normal.x, b.normal.y, 0.0),
        side: Side::Boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollarMethod {
    /// Exact or frozen collar attached to the surface.
    Supplied,
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AreaReport {
    /// Midpoint sum of `Σᵢ √(1+|∇fᵢ|²)` over `R_{δ_cut}`.
    pub inner: f64,
    pub collar: f64,
    pub collar_method: CollarMethod,
    /// `inner + collar`, the graph area over `R°`.
    pub core: f64,
    pub hat: f64,
    pub total: f64,
    pub delta_cut: f64,
}

/// Midpoint sum of the two sheets' area elements over cells with boundary
/// distance above `delta`; cells straddling the cut get a linear partial
/// weight so the sum is smooth in `delta`.
pub(crate) fn inner_area(surface: &DoubleGraphSurface, delta: f64) -> f64 {
    let region = surface.region();
    let h = region.h();
    let terms: Vec<f64> = (0..region.len())
        .into_par_iter()
        .map(|k| {
            let d = region.dist(k);
            let w = ((d - delta) / h + 0.5).clamp(0.0, 1.0);
            if w == 0.0 {
                return 0.0;
            }
            let a1 = (1.0 + surface.gradient_at_cell(Sheet::Upper, k).norm_squared()).sqrt();
            let a2 = (1.0 + surface.gradient_at_cell(Sheet::Lower, k).norm_squared()).sqrt();
            w * (a1 + a2)
        })
        .collect();
    terms.iter().sum::<f64>() * h * h
}

/// Surface area `Σᵢ ∫_{R°} √(1+|∇fᵢ|²) + Ŝ`.
///
/// The integrand is singular at `∂R`, so quadrature runs over `R_{δ_cut}` only.
/// The collar is taken from the surface's analytic supplier when present,
/// otherwise extrapolated from cuts `δ_cut·{1,2,4,8}` using the expansion
/// `S − a√δ − bδ − cδ^{3/2}`.
pub fn area(surface: &DoubleGraphSurface, delta_cut: f64) -> Result<AreaReport> {
    let h = surface.h();
    if delta_cut < 2.0 * h - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "delta_cut {delta_cut} < 2h"
        )));
    }
    let (inner, collar, method) = match &surface.collar {
        Some(c) => (
            inner_area(surface, delta_cut),
            c(delta_cut),
            CollarMethod::Supplied,
        ),
        None => {
            let (inner, collar) = inner_area_richardson(surface, delta_cut);
            (inner, collar, CollarMethod::Richardson)
        }
    };
    let core = inner + collar;
    Ok(AreaReport {
        inner,
        collar,
        collar_method: method,
        core,
        hat: surface.hat_area,
        total: core + surface.hat_area,
        delta_cut,
    })
}

/// Inner sum at `delta_cut` and the collar extrapolated from cuts
/// `delta_cut·{1,2,4,8}`.
pub(crate) fn inner_area_richardson(surface: &DoubleGraphSurface, delta_cut: f64) -> (f64, f64) {
    let cuts = [1.0, 2.0, 4.0, 8.0].map(|m| m * delta_cut);
    let values: Vec<f64> = cuts.iter().map(|&d| inner_area(surface, d)).collect();
    let s = richardson_sqrt(&cuts, &values);
    (values[0], s - values[0])
}

/// Constant term of the fit `g(δ) = S + a√δ + bδ + cδ^{3/2}` through four samples.
fn richardson_sqrt(deltas: &[f64; 4], values: &[f64]) -> f64 {
    let m = nalgebra::Matrix4::from_fn(|i, j| deltas[i].powf(0.5 * j as f64));
    let rhs = nalgebra::Vector4::from_iterator(values.iter().copied());
    m.lu().solve(&rhs).map(|x| x[0]).unwrap_or(f64::NAN)
}
