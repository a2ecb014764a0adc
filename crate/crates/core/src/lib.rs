//! Eigenvalue counting for Schrödinger operators with oscillating radial
//! potentials `V(r) = λ r^β sin(μ r^α)`.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asympt;
pub mod error;
pub mod gsrep;
pub mod hardy;
pub mod harness;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod oscint;
pub mod pruefer;
pub mod quad;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type PotentialSpec64 = model::PotentialSpec<f64>;
pub type AngularChannel64 = model::AngularChannel<f64>;
pub type ChannelOperator64 = model::ChannelOperator<f64>;
pub type GroundStateData64 = gsrep::GroundStateData<f64>;
pub type WeightedOperator64 = gsrep::WeightedOperator<f64>;
pub type CountPolicy64 = pruefer::CountPolicy<f64>;
pub type CountResult64 = pruefer::CountResult<f64>;
pub type OraclePolicy64 = oracle::OraclePolicy<f64>;
pub type TridiagonalOperator64 = oracle::TridiagonalOperator<f64>;
pub type Classification64 = asympt::Classification<f64>;
pub type SlopeFit64 = asympt::SlopeFit<f64>;
pub type TestFunction64 = hardy::TestFunction<f64>;
