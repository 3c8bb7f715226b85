//! Mollifier kernel and the smooth cut-off obtained by convolving the
//! indicator of an erosion with it.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{GridRegion, Vec2};

/// Unnormalized bump `exp(−1/(1−|u|²))` on the unit ball.
fn bump(u2: f64) -> f64 {
    if u2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u2)).exp()
    }
}

/// Radial bump of support radius `a`, scaled so that its midpoint sum over
/// the lattice `hℤ²` is exactly one.
#[derive(Debug, Clone, Serialize)]
pub struct MollifierKernel {
    pub radius: f64,
    pub h: f64,
    norm: f64,
    reach: i64,
}

impl MollifierKernel {
    pub fn new(radius: f64, h: f64) -> Result<Self> {
        if radius < 3.0 * h * (1.0 - 1e-12) {
            return Err(Error::KernelUnderresolved {
                radius,
                min: 3.0 * h,
            });
        }
        let reach = (radius / h).ceil() as i64;
        let mut norm = 0.0;
        for j in -reach..=reach {
            for i in -reach..=reach {
                norm += bump(((i * i + j * j) as f64) * (h / radius).powi(2));
            }
        }
        Ok(MollifierKernel {
            radius,
            h,
            norm: norm * h * h,
            reach,
        })
    }

    pub fn value(&self, x: Vec2) -> f64 {
        bump(x.norm_squared() / (self.radius * self.radius)) / self.norm
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let a = self.radius;
        let u2 = x.norm_squared() / (a * a);
        if u2 >= 1.0 {
            return Vec2::zeros();
        }
        let e = bump(u2) / self.norm;
        -2.0 * e * x / (a * a * (1.0 - u2).powi(2))
    }

    /// Offsets `(i, j)` of lattice points that can lie inside the support.
    pub(crate) fn reach(&self) -> i64 {
        self.reach
    }

    /// Midpoint sum of the kernel over lattice offsets.
    pub fn mass(&self) -> f64 {
        self.lattice_sum(|x| self.value(x))
    }

    /// Midpoint sum of `|∇η_a|`, which scales like `1/a`.
    pub fn gradient_l1(&self) -> f64 {
        self.lattice_sum(|x| self.gradient(x).norm())
    }

    fn lattice_sum(&self, f: impl Fn(Vec2) -> f64) -> f64 {
        let mut s = 0.0;
        for j in -self.reach..=self.reach {
            for i in -self.reach..=self.reach {
                s += f(Vec2::new(i as f64, j as f64) * self.h);
            }
        }
        s * self.h * self.h
    }
}

pub fn mollifier_kernel(radius: f64, h: f64) -> Result<MollifierKernel> {
    MollifierKernel::new(radius, h)
}

/// Cut-off `φ_δ`: the indicator of `R_{2δ/3}` smoothed by the kernel of
/// radius `δ/3`. Evaluated as the ratio of the kernel sum over lattice
/// points in `R_{2δ/3}` to the sum over all lattice points, which is smooth,
/// lies in `[0, 1]`, and equals the plain convolution at cell centers.
#[derive(Debug, Clone)]
pub struct CutoffField {
    region: Arc<GridRegion>,
    delta: f64,
    kernel: MollifierKernel,
    core: Vec<bool>,
    values: Vec<f64>,
    gradients: Vec<Vec2>,
    sup_gradient: f64,
    degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSummary {
    pub delta: f64,
    pub sup_gradient: f64,
    pub sup_gradient_times_delta: f64,
    pub degenerate: bool,
}

pub fn build_cutoff(region: &Arc<GridRegion>, delta: f64) -> Result<CutoffField> {
    let h = region.h();
    if delta < 9.0 * h * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} must be >= 9h = {}",
            9.0 * h
        )));
    }
    let kernel = MollifierKernel::new(delta / 3.0, h)?;
    let core: Vec<bool> = (0..region.len())
        .map(|k| region.is_inside(k) && region.dist(k) > 2.0 * delta / 3.0)
        .collect();
    let degenerate = !core.iter().any(|&c| c);
    let mut field = CutoffField {
        region: region.clone(),
        delta,
        kernel,
        core,
        values: Vec::new(),
        gradients: Vec::new(),
        sup_gradient: 0.0,
        degenerate,
    };
    let evals: Vec<(f64, Vec2)> = (0..region.len())
        .into_par_iter()
        .map(|k| field.eval_uncached(region.cell_center(k)))
        .collect();
    field.values = evals.iter().map(|e| e.0).collect();
    field.gradients = evals.iter().map(|e| e.1).collect();
    field.sup_gradient = field.gradients.iter().map(|g| g.norm()).fold(0.0, f64::max);
    Ok(field)
}

impl CutoffField {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn region(&self) -> &Arc<GridRegion> {
        &self.region
    }

    pub fn kernel(&self) -> &MollifierKernel {
        &self.kernel
    }

    /// `R_{2δ/3}` is empty, so `φ ≡ 0`.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at_cell(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn gradient_at_cell(&self, idx: usize) -> Vec2 {
        self.gradients[idx]
    }

    pub fn sup_gradient(&self) -> f64 {
        self.sup_gradient
    }

    pub fn summary(&self) -> CutoffSummary {
        CutoffSummary {
            delta: self.delta,
            sup_gradient: self.sup_gradient,
            sup_gradient_times_delta: self.sup_gradient * self.delta,
            degenerate: self.degenerate,
        }
    }

    /// `(φ(p), ∇φ(p))` at any point.
    pub fn eval(&self, p: Vec2) -> (f64, Vec2) {
        if !self.values.is_empty() {
            if let Some(k) = self.region.locate(p) {
                if (self.region.cell_center(k) - p).norm() < 1e-12 {
                    return (self.values[k], self.gradients[k]);
                }
            }
        }
        self.eval_uncached(p)
    }

    fn eval_uncached(&self, p: Vec2) -> (f64, Vec2) {
        let h = self.region.h();
        let origin = self.region.origin();
        let [nx, ny] = self.region.extents();
        let ci = ((p.x - origin.x) / h - 0.5).round() as i64;
        let cj = ((p.y - origin.y) / h - 0.5).round() as i64;
        let reach = self.kernel.reach() + 1;
        let (mut s_in, mut s_all) = (0.0, 0.0);
        let (mut g_in, mut g_all) = (Vec2::zeros(), Vec2::zeros());
        let mut any_out = false;
        for j in cj - reach..=cj + reach {
            for i in ci - reach..=ci + reach {
                let y = origin + Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let w = self.kernel.value(p - y);
                if w == 0.0 {
                    continue;
                }
                let dw = self.kernel.gradient(p - y);
                let on_grid = i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny;
                let inside = on_grid && self.core[j as usize * nx + i as usize];
                s_all += w;
                g_all += dw;
                if inside {
                    s_in += w;
                    g_in += dw;
                } else {
                    any_out = true;
                }
            }
        }
        if s_in == 0.0 {
            return (0.0, Vec2::zeros());
        }
        if !any_out {
            return (1.0, Vec2::zeros());
        }
        let phi = s_in / s_all;
        (phi, (g_in - phi * g_all) / s_all)
    }

    /// Writes `x1,x2,value` for every cell.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x1,x2,value")?;
        for k in 0..self.region.len() {
            let c = self.region.cell_center(k);
            writeln!(w, "{},{},{}", c.x, c.y, self.values[k])?;
        }
        Ok(())
    }
}
