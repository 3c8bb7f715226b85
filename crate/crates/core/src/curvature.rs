//! Mean curvature of the two sheets with respect to the outer normal.
//! Convention: the unit sphere has `H = +1`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::region::Vec2;
use crate::surface::{DoubleGraphSurface, Mat2, Sheet};

/// Dimension of the hypersurface for double graphs over planar regions.
pub const SURFACE_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: [f64; 2],
    pub h_upper: f64,
    pub h_lower: f64,
    pub h_sum_upper: f64,
    pub h_sum_lower: f64,
}

/// `div(∇f/√(1+|∇f|²)) = ((1+|∇f|²)Δf − ∇fᵀ∇²f∇f)/(1+|∇f|²)^{3/2}`.
pub fn graph_divergence(grad: Vec2, hess: &Mat2) -> f64 {
    let w = 1.0 + grad.norm_squared();
    (w * hess.trace() - grad.dot(&(hess * grad))) / (w * w.sqrt())
}

fn sample(p: Vec2, g1: Vec2, h1: &Mat2, g2: Vec2, h2: &Mat2) -> CurvatureSample {
    let n = SURFACE_DIM as f64;
    let su = -graph_divergence(g1, h1);
    let sl = graph_divergence(g2, h2);
    CurvatureSample {
        point: [p.x, p.y],
        h_upper: su / n,
        h_lower: sl / n,
        h_sum_upper: su,
        h_sum_lower: sl,
    }
}

/// Curvatures of both sheets above `p`.
pub fn mean_curvature_pair(surface: &DoubleGraphSurface, p: Vec2) -> Result<CurvatureSample> {
    let g1 = surface.gradient(Sheet::Upper, p)?;
    let h1 = surface.hessian(Sheet::Upper, p)?;
    let g2 = surface.gradient(Sheet::Lower, p)?;
    let h2 = surface.hessian(Sheet::Lower, p)?;
    let s = sample(p, g1, &h1, g2, &h2);
    if ![s.h_sum_upper, s.h_sum_lower].iter().all(|v| v.is_finite()) {
        return Err(Error::Derivative(format!(
            "non-finite curvature at ({}, {})",
            p.x, p.y
        )));
    }
    Ok(s)
}

pub(crate) fn sample_at_cell(surface: &DoubleGraphSurface, idx: usize) -> CurvatureSample {
    let p = surface.region().cell_center(idx);
    sample(
        p,
        surface.gradient_at_cell(Sheet::Upper, idx),
        &surface.hessian_at_cell(Sheet::Upper, idx),
        surface.gradient_at_cell(Sheet::Lower, idx),
        &surface.hessian_at_cell(Sheet::Lower, idx),
    )
}

/// Samples on every cell of `R_δ`, in cell order. Requires `δ ≥ 2h`.
pub fn curvature_field(
    surface: &DoubleGraphSurface,
    delta: f64,
) -> Result<Vec<(usize, CurvatureSample)>> {
    let region = surface.region();
    if delta < 2.0 * region.h() - 1e-12 {
        return Err(Error::InvalidParameter(format!("delta {delta} < 2h")));
    }
    let cells: Vec<usize> = region
        .inside_cells()
        .filter(|&k| region.dist(k) > delta)
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|k| (k, sample_at_cell(surface, k)))
        .collect())
}

/// Writes `x1,x2,h_upper,h_lower,h_sum_upper,h_sum_lower`.
pub fn write_curvature_csv(
    path: &Path,
    surface: &DoubleGraphSurface,
    samples: &[(usize, CurvatureSample)],
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# surface={} h={}", surface.label(), surface.h())?;
    writeln!(out, "x1,x2,h_upper,h_lower,h_sum_upper,h_sum_lower")?;
    for (_, s) in samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.point[0], s.point[1], s.h_upper, s.h_lower, s.h_sum_upper, s.h_sum_lower
        )?;
    }
    out.flush()
}

/// Signed curvature of a counter-clockwise curve, positive on circles.
pub fn curve_curvature(curve: &dyn ClosedCurve, s: f64) -> f64 {
    crate::curve::curvature(curve, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ellipsoid, sphere, torus};

    #[test]
    fn sphere_is_plus_one() {
        let s = sphere(1.0, 0.0, 0.02).unwrap();
        for p in [Vec2::zeros(), Vec2::new(0.5, 0.3), Vec2::new(-0.85, 0.1)] {
            let c = mean_curvature_pair(&s, p).unwrap();
            assert!(
                (c.h_upper - 1.0).abs() < 1e-9 && (c.h_lower - 1.0).abs() < 1e-9,
                "{c:?}"
            );
            assert_eq!(c.h_sum_upper, 2.0 * c.h_upper);
        }
    }

    #[test]
    fn ellipsoid_pole_and_torus_rim() {
        let e = ellipsoid(1.0, 0.5, 0.0, 0.02).unwrap();
        let c = mean_curvature_pair(&e, Vec2::zeros()).unwrap();
        assert!((c.h_upper - 0.5).abs() < 1e-3);
        let t = torus(2.0, 0.5, 0.0, 0.02).unwrap();
        let c = mean_curvature_pair(&t, Vec2::new(2.5 - 1e-3, 0.0)).unwrap();
        assert!((c.h_upper - 1.2).abs() < 0.05, "{c:?}");
    }

    #[test]
    fn divergence_of_tilted_plane_vanishes() {
        let g = Vec2::new(0.3, -2.0);
        assert_eq!(graph_divergence(g, &Mat2::zeros()), 0.0);
    }
}
