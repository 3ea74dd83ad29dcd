//! Numerical workbench for spectral invariance on finite models.
//!
//! Dense complex matrices stand in for bounded operators; discretized
//! groupoids, half-line grids and circle grids stand in for the geometric
//! models. Every analytic statement is turned into a tolerance-controlled
//! check that returns data rather than panicking.

pub mod error;
pub mod groupoid;
pub mod holocalc;
pub mod opcore;
pub mod psistar;
pub mod rng;
pub mod schwartz;
pub mod smoothkernel;
pub mod symbols;

pub use error::{Error, Result};
pub use opcore::{BaseNorm, NormSeq, Op, C64};
