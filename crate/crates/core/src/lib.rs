//! Design and verification of sampled-data observers for one-dimensional
//! parabolic PDEs with non-local outputs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod grid;
pub mod linalg;
pub mod observer_design;
pub mod pde_simulator;
pub mod profile;
pub mod quadrature;
pub mod sturm_liouville;
