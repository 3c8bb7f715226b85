//! First variation of area under vertical fields, its bulk/collar split, and
//! the convexity facts about `A(q) = √(1+|q|²)` behind the sign of the bulk term.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::sample_at_cell;
use crate::error::{Error, Result};
use crate::region::Vec2;
use crate::surface::{area, DoubleGraphSurface, Sheet};
use crate::variation::cutoff::CutoffField;
use crate::variation::fields::{deform, VerticalField};

/// Central-difference rate of `S(t)` with a half-step consistency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdVariation {
    pub step: f64,
    /// `(t, S(t))` for `t ∈ {−2, −1, −½, 0, ½, 1, 2}·step`.
    pub samples: Vec<(f64, f64)>,
    pub rate: f64,
    pub rate_half_step: f64,
    pub richardson: f64,
}

/// `(S(h_t) − S(−h_t))/(2h_t)` with `S` the area of the deformed snapshot.
pub fn first_variation_fd(
    surface: &DoubleGraphSurface,
    field: Arc<dyn VerticalField>,
    step: f64,
) -> Result<FdVariation> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "h_t must be positive, got {step}"
        )));
    }
    let cut = 2.0 * surface.h();
    let ts = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0].map(|m| m * step);
    let samples = ts
        .par_iter()
        .map(|&t| Ok((t, area(&deform(surface, field.clone(), t)?, cut)?.total)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let s = |i: usize| samples[i].1;
    let rate = (s(5) - s(1)) / (2.0 * step);
    let rate_half_step = (s(4) - s(2)) / step;
    Ok(FdVariation {
        step,
        samples,
        rate,
        rate_half_step,
        richardson: (4.0 * rate_half_step - rate) / 3.0,
    })
}

/// `∫ v·(H_sum_upper − H_sum_lower) dx'` by the midpoint rule. With outer
/// normals and the sphere-positive convention this is `dS/dt` at `t = 0`.
pub fn first_variation_analytic(
    surface: &DoubleGraphSurface,
    field: &dyn VerticalField,
) -> Result<f64> {
    let region = surface.region();
    let h = region.h();
    let terms: Vec<Result<f64>> = region
        .inside_cells()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let v = field.value(region.cell_center(k));
            if v == 0.0 {
                return Ok(0.0);
            }
            if region.dist(k) <= 2.0 * h {
                return Err(Error::SupportViolation {
                    value: v,
                    dist: region.dist(k),
                });
            }
            let c = sample_at_cell(surface, k);
            Ok(v * (c.h_sum_upper - c.h_sum_lower))
        })
        .collect();
    let mut total = 0.0;
    for t in terms {
        total += t?;
    }
    Ok(total * h * h)
}

/// `F = Σᵢ ∇fᵢ·∇(f1+f2)/√(1+|∇fᵢ|²)` with its lower bound
/// `(1+(|q₁|+|q₂|)²)^{−3/2}|q₁−q₂|²`, `q₁ = ∇f1`, `q₂ = −∇f2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FValue {
    pub value: f64,
    pub lower_bound: f64,
}

pub fn f_from_gradients(g1: Vec2, g2: Vec2) -> FValue {
    let a1 = (1.0 + g1.norm_squared()).sqrt();
    let a2 = (1.0 + g2.norm_squared()).sqrt();
    let gs = g1 + g2;
    let value = g1.dot(&gs) / a1 + g2.dot(&gs) / a2;
    let b = g1.norm() + g2.norm();
    FValue {
        value,
        lower_bound: (1.0 + b * b).powf(-1.5) * gs.norm_squared(),
    }
}

pub fn f_field(surface: &DoubleGraphSurface, p: Vec2) -> Result<FValue> {
    Ok(f_from_gradients(
        surface.gradient(Sheet::Upper, p)?,
        surface.gradient(Sheet::Lower, p)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianA {
    pub matrix: DMatrix<f64>,
    pub lambda_min: f64,
    /// Unit eigenvector of the smallest eigenvalue.
    pub direction: DVector<f64>,
    /// `(1+|q|²)^{−3/2}`.
    pub bound: f64,
}

/// `∇²A(q) = (1+|q|²)^{−3/2}((1+|q|²)I − qqᵀ)` and its smallest eigenpair.
pub fn hessian_a(q: &[f64]) -> HessianA {
    let n = q.len();
    let q = DVector::from_column_slice(q);
    let w = 1.0 + q.norm_squared();
    let scale = w.powf(-1.5);
    let matrix = (DMatrix::identity(n, n) * w - &q * q.transpose()) * scale;
    let eig = matrix.clone().symmetric_eigen();
    let (i, &lambda_min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    HessianA {
        direction: eig.eigenvectors.column(i).into_owned(),
        matrix,
        lambda_min,
        bound: scale,
    }
}

/// `I = I_δ¹ + I_δ²` for the shear `v = (f1+f2)φ_δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub delta: f64,
    /// Direct quadrature of `Σᵢ ∇fᵢ·∇v/√(1+|∇fᵢ|²)`.
    pub i_total: f64,
    /// `∫ F·φ_δ`.
    pub i_bulk: f64,
    /// `∫ Σᵢ ∇fᵢ·∇φ_δ (f1+f2)/√(1+|∇fᵢ|²)` over `R_{δ/3} ∖ R_δ`.
    pub i_collar: f64,
    pub f_min: f64,
    pub f_integral: f64,
    /// Smallest `F − lower bound` over the support.
    pub f_bound_slack: f64,
    pub collar_cells: usize,
}

impl Decomposition {
    pub fn split_error(&self) -> f64 {
        (self.i_total - (self.i_bulk + self.i_collar)).abs()
    }
}

pub fn decompose_i(surface: &DoubleGraphSurface, cutoff: &CutoffField) -> Result<Decomposition> {
    let region = surface.region();
    let h = region.h();
    let delta = cutoff.delta();
    if (2.0 * delta / 3.0) < 3.0 * h {
        return Err(Error::CollarResolution(format!(
            "collar width {} is under three cells",
            2.0 * delta / 3.0
        )));
    }
    struct Cell {
        total: f64,
        bulk: f64,
        collar: f64,
        f: f64,
        slack: f64,
        in_collar: bool,
    }
    let cells: Vec<Cell> = region
        .inside_cells()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter_map(|k| {
            let phi = cutoff.value_at_cell(k);
            let dphi = cutoff.gradient_at_cell(k);
            if phi == 0.0 {
                return None;
            }
            let p = region.cell_center(k);
            let g1 = surface.gradient_at_cell(Sheet::Upper, k);
            let g2 = surface.gradient_at_cell(Sheet::Lower, k);
            let s = surface.height(Sheet::Upper, p) + surface.height(Sheet::Lower, p);
            let (a1, a2) = (
                (1.0 + g1.norm_squared()).sqrt(),
                (1.0 + g2.norm_squared()).sqrt(),
            );
            let dv = phi * (g1 + g2) + s * dphi;
            let fv = f_from_gradients(g1, g2);
            Some(Cell {
                total: g1.dot(&dv) / a1 + g2.dot(&dv) / a2,
                bulk: fv.value * phi,
                collar: s * (g1.dot(&dphi) / a1 + g2.dot(&dphi) / a2),
                f: fv.value,
                slack: fv.value - fv.lower_bound,
                in_collar: dphi != Vec2::zeros(),
            })
        })
        .collect();
    let w = h * h;
    let mut d = Decomposition {
        delta,
        i_total: 0.0,
        i_bulk: 0.0,
        i_collar: 0.0,
        f_min: f64::INFINITY,
        f_integral: 0.0,
        f_bound_slack: f64::INFINITY,
        collar_cells: 0,
    };
    for c in &cells {
        d.i_total += c.total * w;
        d.i_bulk += c.bulk * w;
        d.i_collar += c.collar * w;
        d.f_integral += c.f * w;
        d.f_min = d.f_min.min(c.f);
        d.f_bound_slack = d.f_bound_slack.min(c.slack);
        d.collar_cells += c.in_collar as usize;
    }
    if cells.is_empty() {
        d.f_min = 0.0;
        d.f_bound_slack = 0.0;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hessian_examples() {
        let h0 = hessian_a(&[0.0, 0.0]);
        assert!((h0.lambda_min - 1.0).abs() < 1e-15 && (h0.bound - 1.0).abs() < 1e-15);
        let h1 = hessian_a(&[1.0, 0.0]);
        assert!((h1.lambda_min - 2f64.powf(-1.5)).abs() < 1e-14);
        assert!((h1.direction[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_vanishes_for_opposite_gradients() {
        let g = Vec2::new(0.4, -1.3);
        let f = f_from_gradients(g, -g);
        assert_eq!(f.value, 0.0);
        assert_eq!(f.lower_bound, 0.0);
    }
}
