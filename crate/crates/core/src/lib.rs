//! # qfim
//!
//! Classical Fisher information, the Hermitian pullback of the Fubini–Study
//! tensor for parametrized pure states, and the quantum Fisher information
//! built from the symmetric logarithmic derivative (SLD), together with the
//! identities that tie them together:
//!
//! - `4·Re H = F` when the phase of ψ does not depend on θ,
//! - `Re H − ¼F = Cov(dα) ⪰ 0` in general,
//! - `Tr[ρ L_j L_k] = 4·Tr[ρ ∂_jρ ∂_kρ] = 4·H_jk` for pure states.
//!
//! Sample spaces are finite grids with quadrature weights and Hilbert spaces
//! are finite dimensional.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod classical;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod numdiff;
pub mod report;
pub mod sld;
pub mod space;
pub mod tolerance;

pub use error::{Error, Result};
pub use geometry::{HermitianTensor, PullbackDecomposition};
pub use model::{
    CMatrix, CVector, DensityModel, DerivativeMode, Model, ProbabilityModel, PureStateModel,
    RVector, RealMatrix,
};
pub use numdiff::{Differential, LogDifferentialPair};
pub use sld::{QfiTensor, SldSet};
pub use space::{ParameterVector, SampleSpace};
pub use tolerance::Tolerances;
