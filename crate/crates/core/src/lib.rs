//! Geometric multipole expansion for two-dimensional conductivity inclusions.
//!
//! An inclusion is described by the exterior conformal map of its core and
//! optional confocal coatings. From that the crate computes Grunsky
//! coefficients, Faber polynomial polarization tensors (FPTs), the layer by
//! layer potential for polynomial loadings, and coating conductivities that
//! make low-order FPTs vanish (neutral inclusions).
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the command
//! line live in the `fptf` crate.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod conformal;
pub mod design;
pub mod error;
pub mod field;
pub mod fpt;
pub mod linalg;
pub mod stripes;
pub mod structure;

pub use conformal::{ConformalMap, GrunskyMatrix};
pub use design::{DesignMode, DesignOptions, DesignProblem, DesignResult, DesignStatus};
pub use error::{Error, Result};
pub use field::{FieldSample, LayerCoefficients, Loading};
pub use fpt::{fpt_ellipse_oracle, fpt_multicoated, fpt_multicoated_with, fpt_single, fpt_single_tau, FptTable};
pub use structure::{LayeredStructure, TransferDiagonals};

pub use num_complex::Complex64;
