//! Vertical shear deformations: the cut-off, first variation of area, its
//! decomposition, and the bounds on each part.

pub mod claims;
pub mod cutoff;
pub mod fields;
pub mod first;

pub use claims::{
    claim1_bound, claim2_bound, claim2_check, detect_symmetry, detect_symmetry_curve, AlignmentRow,
    BulkBound, Symmetry,
};
pub use cutoff::{build_cutoff, mollifier_kernel, CutoffField, CutoffSummary, MollifierKernel};
pub use fields::{deform, random_fields, BumpField, ConstantField, ShearField, VerticalField};
pub use first::{
    decompose_i, f_field, f_from_gradients, first_variation_analytic, first_variation_fd,
    hessian_a, Decomposition, FValue, FdVariation, HessianA,
};
