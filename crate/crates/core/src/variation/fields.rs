//! Vertical deformation fields `V = v·e₃` and the deformed surfaces they
//! generate.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::region::Vec2;
use crate::surface::{inner_area_richardson, DoubleGraphSurface, HeightFunction, Mat2, Sheet};
use crate::variation::cutoff::CutoffField;

/// Scalar `v` of a vertical field, with its gradient, at any point of `R`.
pub trait VerticalField: Send + Sync {
    fn value(&self, p: Vec2) -> f64;
    fn gradient(&self, p: Vec2) -> Vec2;
}

/// `V = c·e₃`, a rigid vertical translation.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub f64);

impl VerticalField for ConstantField {
    fn value(&self, _p: Vec2) -> f64 {
        self.0
    }
    fn gradient(&self, _p: Vec2) -> Vec2 {
        Vec2::zeros()
    }
}

/// `v = (f1 + f2)·φ_δ`, which vanishes outside `R_{δ/3}`.
pub struct ShearField {
    surface: DoubleGraphSurface,
    cutoff: Arc<CutoffField>,
}

impl ShearField {
    pub fn new(surface: &DoubleGraphSurface, cutoff: Arc<CutoffField>) -> Self {
        ShearField {
            surface: surface.clone(),
            cutoff,
        }
    }

    pub fn cutoff(&self) -> &CutoffField {
        &self.cutoff
    }

    fn sum_and_gradient(&self, p: Vec2) -> (f64, Vec2) {
        let s = self.surface.height(Sheet::Upper, p) + self.surface.height(Sheet::Lower, p);
        let g = |sheet| {
            let f = self.surface.sheet_fn(sheet);
            f.gradient(p).unwrap_or_else(|| {
                crate::surface::fd_gradient(f.as_ref(), p, 0.25 * self.surface.h())
            })
        };
        (s, g(Sheet::Upper) + g(Sheet::Lower))
    }
}

impl VerticalField for ShearField {
    fn value(&self, p: Vec2) -> f64 {
        let (phi, _) = self.cutoff.eval(p);
        if phi == 0.0 {
            return 0.0;
        }
        self.sum_and_gradient(p).0 * phi
    }

    fn gradient(&self, p: Vec2) -> Vec2 {
        let (phi, dphi) = self.cutoff.eval(p);
        if phi == 0.0 {
            return Vec2::zeros();
        }
        let (s, ds) = self.sum_and_gradient(p);
        phi * ds + s * dphi
    }
}

/// Sum of smooth bumps `aₖ·exp(−1/(1−|x−cₖ|²/ρₖ²))`.
#[derive(Debug, Clone)]
pub struct BumpField {
    pub bumps: Vec<(Vec2, f64, f64)>,
}

impl VerticalField for BumpField {
    fn value(&self, p: Vec2) -> f64 {
        self.bumps
            .iter()
            .map(|&(c, rho, amp)| {
                let u2 = (p - c).norm_squared() / (rho * rho);
                if u2 >= 1.0 {
                    0.0
                } else {
                    amp * (-1.0 / (1.0 - u2)).exp()
                }
            })
            .sum()
    }

    fn gradient(&self, p: Vec2) -> Vec2 {
        self.bumps
            .iter()
            .map(|&(c, rho, amp)| {
                let d = p - c;
                let u2 = d.norm_squared() / (rho * rho);
                if u2 >= 1.0 {
                    Vec2::zeros()
                } else {
                    -2.0 * amp * (-1.0 / (1.0 - u2)).exp() * d / (rho * rho * (1.0 - u2).powi(2))
                }
            })
            .sum()
    }
}

/// `count` seeded fields, each a sum of three bumps supported in `R_δ`.
pub fn random_fields(
    surface: &DoubleGraphSurface,
    delta: f64,
    count: usize,
    seed: u64,
) -> Vec<BumpField> {
    let region = surface.region();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<usize> = region.inside_cells().collect();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut bumps = Vec::new();
        let mut tries = 0;
        while bumps.len() < 3 && tries < 10_000 {
            tries += 1;
            let k = cells[rng.gen_range(0..cells.len())];
            let room = region.dist(k) - delta;
            if room < 6.0 * region.h() {
                continue;
            }
            let rho = rng.gen_range(6.0 * region.h()..=room.min(0.5));
            let amp = rng.gen_range(-1.0..1.0);
            bumps.push((region.cell_center(k), rho, amp));
        }
        if bumps.is_empty() {
            break;
        }
        out.push(BumpField { bumps });
    }
    out
}

/// `f ↦ f + t·v`.
struct Shifted {
    base: Arc<dyn HeightFunction>,
    field: Arc<dyn VerticalField>,
    t: f64,
}

impl HeightFunction for Shifted {
    fn value(&self, p: Vec2) -> f64 {
        self.base.value(p) + self.t * self.field.value(p)
    }

    fn gradient(&self, p: Vec2) -> Option<Vec2> {
        self.base
            .gradient(p)
            .map(|g| g + self.t * self.field.gradient(p))
    }

    fn hessian(&self, p: Vec2) -> Option<Mat2> {
        if self.t == 0.0 {
            self.base.hessian(p)
        } else {
            None
        }
    }
}

/// Snapshot of `M(t) = {x + tV(x)}`: both sheets move by `t·v`. The area
/// over the collar is taken from the undeformed surface, which is exact
/// when `v` vanishes there or is constant.
pub fn deform(
    surface: &DoubleGraphSurface,
    field: Arc<dyn VerticalField>,
    t: f64,
) -> Result<DoubleGraphSurface> {
    if t == 0.0 {
        return Ok(surface.clone());
    }
    let up = Arc::new(Shifted {
        base: surface.sheet_fn(Sheet::Upper).clone(),
        field: field.clone(),
        t,
    });
    let low = Arc::new(Shifted {
        base: surface.sheet_fn(Sheet::Lower).clone(),
        field,
        t,
    });
    let moved = surface.with_sheets(up, low).map_err(|e| match e {
        Error::GraphsCross { .. } => Error::Tolerance(format!("shear made the graphs cross: {e}")),
        other => other,
    })?;
    let collar = match surface.collar() {
        Some(c) => c.clone(),
        None => {
            let base = surface.clone();
            Arc::new(move |d: f64| inner_area_richardson(&base, d).1)
        }
    };
    Ok(moved.with_collar(collar))
}
