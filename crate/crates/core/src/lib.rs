//! Construction, extension and certification of nested spherical designs.
//!
//! A point set `X ⊂ S^d` is a spherical `t`-design when its equal-weight
//! average integrates every polynomial of degree at most `t` exactly. This
//! crate measures that property through the reproducing-kernel residual,
//! extends a fixed point set to a design by descent on a product of spheres,
//! and exposes the supporting machinery (point-count bounds, equal-area
//! partitions, Marcinkiewicz-Zygmund checks and the gradient flow used in
//! existence arguments) as executable operations.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod designs;
pub mod error;
pub mod flow;
pub mod harmonics;
pub mod mz;
pub mod optimizer;
pub mod partition;
pub mod point;
pub mod pointset;
pub mod residual;

pub use error::{Error, Result};
pub use harmonics::{dim_harmonic, dim_space, legendre_eval, surface_area, KernelSpec};
pub use point::{Point, Rotation, SphereDim};
pub use residual::{
    certify_design, monomial_integral, nested_residual, residual_gradient, weyl_residual,
    Configuration, DesignCertificate,
};
