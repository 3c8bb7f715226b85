//! Quantitative bounds on the bulk and collar terms, and the symmetry test
//! that concludes the argument.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{self, ClosedCurve};
use crate::error::{Error, Result};
use crate::region::{PointIndex, Vec2};
use crate::surface::{sheet_normal, DoubleGraphSurface, Sheet};

/// Lower bound `a₀ = (1+b₂²)^{−3/2}·b₁²·|B_ε(x̄)|` for the bulk term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkBound {
    pub a0: f64,
    pub center: [f64; 2],
    pub eps: f64,
    pub b1: f64,
    pub b2: f64,
    /// Midpoint measure of the ball: cell count times `h²`.
    pub ball_measure: f64,
    pub ball_cells: usize,
    /// The ball lies in `R_δ` for this `δ`.
    pub delta: f64,
}

const SEARCH_DEPTH: f64 = 0.2;

pub fn claim1_bound(surface: &DoubleGraphSurface, delta: f64) -> Result<BulkBound> {
    let region = surface.region();
    let h = region.h();
    let grad_sum = |k: usize| {
        (surface.gradient_at_cell(Sheet::Upper, k) + surface.gradient_at_cell(Sheet::Lower, k))
            .norm()
    };
    let deep: Vec<usize> = region
        .inside_cells()
        .filter(|&k| region.dist(k) > SEARCH_DEPTH)
        .collect();
    let mags: Vec<f64> = deep.par_iter().map(|&k| grad_sum(k)).collect();
    let (best, peak) =
        mags.iter().enumerate().fold(
            (usize::MAX, f64::MIN),
            |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc },
        );
    // below the accuracy of the gradients the sum is indistinguishable from zero
    let floor = if surface.has_analytic_derivatives() {
        1e-8
    } else {
        1e-4
    };
    if best == usize::MAX || peak <= floor {
        return Err(Error::SymmetricSurface);
    }
    let center_idx = deep[best];
    let center = region.cell_center(center_idx);
    let b1 = 0.5 * peak;
    let cells_within = |eps: f64| -> Vec<usize> {
        let reach = (eps / h).floor() as i64 + 1;
        let [nx, ny] = region.extents();
        let (ci, cj) = ((center_idx % nx) as i64, (center_idx / nx) as i64);
        let mut out = Vec::new();
        for j in cj - reach..=cj + reach {
            for i in ci - reach..=ci + reach {
                if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
                    continue;
                }
                let k = j as usize * nx + i as usize;
                if (region.cell_center(k) - center).norm() <= eps + 1e-12 * h {
                    out.push(k);
                }
            }
        }
        out
    };
    let ok = |cells: &[usize]| {
        cells
            .iter()
            .all(|&k| region.is_inside(k) && region.dist(k) > delta && grad_sum(k) >= b1)
    };
    if !ok(&[center_idx]) {
        return Err(Error::InvalidParameter(format!(
            "steepest point ({}, {}) is not in R_{delta}",
            center.x, center.y
        )));
    }
    let mut steps = 0usize;
    while ok(&cells_within((steps + 1) as f64 * h)) {
        steps += 1;
    }
    let eps = steps as f64 * h;
    let ball = cells_within(eps);
    let b2 = ball
        .iter()
        .map(|&k| {
            surface.gradient_at_cell(Sheet::Upper, k).norm()
                + surface.gradient_at_cell(Sheet::Lower, k).norm()
        })
        .fold(0.0, f64::max);
    let ball_measure = ball.len() as f64 * h * h;
    Ok(BulkBound {
        a0: (1.0 + b2 * b2).powf(-1.5) * b1 * b1 * ball_measure,
        center: [center.x, center.y],
        eps,
        b1,
        b2,
        ball_measure,
        ball_cells: ball.len(),
        delta,
    })
}

/// One row of the collar-alignment table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub delta: f64,
    /// `max |Σᵢ ∇fᵢ/√(1+|∇fᵢ|²)|` over `R° ∖ R_δ`.
    pub t3_sum: f64,
    /// `max |ν₁' − ν₂'|` over the same cells.
    pub t3_normals: f64,
    pub identity_gap: f64,
    /// `2√(2(ρ+r)δ/(ρr))`.
    pub bound: f64,
    pub cells: usize,
    pub pass: bool,
}

pub fn claim2_bound(rho: f64, r: f64, delta: f64) -> f64 {
    2.0 * (2.0 * (rho + r) * delta / (rho * r)).sqrt()
}

pub fn claim2_check(
    surface: &DoubleGraphSurface,
    rho: f64,
    r: f64,
    deltas: &[f64],
) -> Result<Vec<AlignmentRow>> {
    if !(rho > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} and r = {r} must be positive"
        )));
    }
    let region = surface.region();
    deltas
        .iter()
        .map(|&delta| {
            let cells: Vec<usize> = region
                .inside_cells()
                .filter(|&k| region.dist(k) <= delta)
                .collect();
            let vals: Vec<(f64, f64)> = cells
                .par_iter()
                .map(|&k| {
                    let g1 = surface.gradient_at_cell(Sheet::Upper, k);
                    let g2 = surface.gradient_at_cell(Sheet::Lower, k);
                    let a1 = (1.0 + g1.norm_squared()).sqrt();
                    let a2 = (1.0 + g2.norm_squared()).sqrt();
                    let sum = (g1 / a1 + g2 / a2).norm();
                    let n1 = sheet_normal(Sheet::Upper, g1);
                    let n2 = sheet_normal(Sheet::Lower, g2);
                    let normals = Vec2::new(n1.x - n2.x, n1.y - n2.y).norm();
                    (sum, normals)
                })
                .collect();
            let t3_sum = vals.iter().map(|v| v.0).fold(0.0, f64::max);
            let t3_normals = vals.iter().map(|v| v.1).fold(0.0, f64::max);
            let identity_gap = vals.iter().map(|v| (v.0 - v.1).abs()).fold(0.0, f64::max);
            let bound = claim2_bound(rho, r, delta);
            Ok(AlignmentRow {
                delta,
                t3_sum,
                t3_normals,
                identity_gap,
                bound,
                cells: cells.len(),
                pass: t3_sum.max(t3_normals) <= bound,
            })
        })
        .collect()
}

/// Outcome of the horizontal-symmetry test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Symmetry {
    pub symmetric: bool,
    /// Height `c₀/2` of the mirror plane when symmetric.
    pub midplane: Option<f64>,
    pub max_deviation: f64,
    /// Where the deviation is largest.
    pub witness: [f64; 2],
    pub tolerance: f64,
}

/// Symmetric about `x₃ = c₀/2` iff `f1 + f2 ≡ c₀` on `R_{2h}` within `tol`.
pub fn detect_symmetry(surface: &DoubleGraphSurface, tol: f64) -> Symmetry {
    let region = surface.region();
    let cells: Vec<usize> = region
        .inside_cells()
        .filter(|&k| region.dist(k) > 2.0 * region.h())
        .collect();
    let sums: Vec<f64> = cells
        .par_iter()
        .map(|&k| {
            let p = region.cell_center(k);
            surface.height(Sheet::Upper, p) + surface.height(Sheet::Lower, p)
        })
        .collect();
    let mean = sums.iter().sum::<f64>() / sums.len().max(1) as f64;
    let (arg, dev) = sums
        .iter()
        .enumerate()
        .map(|(i, s)| (i, (s - mean).abs()))
        .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
    let w = cells
        .get(arg)
        .map(|&k| region.cell_center(k))
        .unwrap_or_else(Vec2::zeros);
    let symmetric = dev <= tol;
    Symmetry {
        symmetric,
        midplane: symmetric.then_some(0.5 * mean),
        max_deviation: dev.max(0.0),
        witness: [w.x, w.y],
        tolerance: tol,
    }
}

/// A curve is symmetric about a horizontal line only if that line is halfway
/// between its extreme heights; the deviation is the largest distance from a
/// reflected sample to the curve.
pub fn detect_symmetry_curve(c: &dyn ClosedCurve, tol: f64) -> Symmetry {
    let poly = curve::polygon(c, 24_000);
    let (lo, hi) = poly.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p.y), hi.max(p.y))
    });
    let mid = 0.5 * (lo + hi);
    let spacing = (0..poly.len())
        .map(|k| (poly[(k + 1) % poly.len()] - poly[k]).norm())
        .fold(0.0, f64::max);
    let index = PointIndex::new(poly.clone(), (hi - lo).max(1e-9) / 64.0);
    let (arg, dev) = poly
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q = Vec2::new(p.x, 2.0 * mid - p.y);
            (
                i,
                index.nearest(&q).map(|(_, d)| d).unwrap_or(f64::INFINITY),
            )
        })
        .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
    // the nearest sample can be half a chord away even for an exact mirror
    let tolerance = tol.max(spacing);
    let symmetric = dev <= tolerance;
    Symmetry {
        symmetric,
        midplane: symmetric.then_some(mid),
        max_deviation: dev,
        witness: [poly[arg].x, poly[arg].y],
        tolerance,
    }
}
