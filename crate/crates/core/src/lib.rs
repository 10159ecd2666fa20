//! Expected search times for a diffusive searcher that resets to the origin.
//!
//! Three reset mechanisms are covered: Poissonian jumps back to the origin,
//! periodic jumps every `T` time units, and Brownian-bridge returns of period
//! `T`. Targets are either fixed points or drawn from a centered Gaussian.
//!
//! The crate is organized bottom-up:
//!
//! - [`specfun`]: error functions and the modified Bessel functions needed by
//!   the closed forms.
//! - [`quad`]: adaptive quadrature for finite intervals with endpoint
//!   singularities and for Gaussian-weighted half-lines.
//! - [`analytic`]: every expected hitting time formula, fixed and Gaussian
//!   targets, in one, two and three dimensions.
//! - [`optimize`]: bracketed golden-section minimization over the
//!   dimensionless rate `s` or period `𝒯`.
//! - [`mc`]: Monte Carlo simulation of the search processes, used as an
//!   independent check of the formulas.
//!
//! All numerical code is generic over [`Real`]; the aliases at the crate root
//! fix the scalar to `f64`, which is what the command line tool uses.
//!
//! ```
//! use reset_search::analytic;
//!
//! // 1D Brownian-bridge resetting, Gaussian target, dimensionless period 8.
//! let value = analytic::gauss_bridge_1d(8.0_f64).unwrap();
//! assert!((value.finite().unwrap() - 4.970562748477141).abs() < 1e-12);
//! ```

pub mod analytic;
pub mod error;
pub mod mc;
pub mod model;
pub mod optimize;
pub mod quad;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SearchSpec = model::SearchSpec<f64>;
pub type TargetSpec = model::TargetSpec<f64>;
pub type Mechanism = model::Mechanism<f64>;
pub type DimensionlessParams = model::DimensionlessParams<f64>;
pub type ExpectedTime = model::ExpectedTime<f64>;
pub type QuadResult = model::QuadResult<f64>;
pub type QuadSettings = quad::QuadSettings<f64>;
pub type FixedTargetQuery = analytic::FixedTargetQuery<f64>;
pub type FixedOutcome = analytic::FixedOutcome<f64>;
pub type GaussQuery = analytic::GaussQuery<f64>;
pub type GaussOutcome = analytic::GaussOutcome<f64>;
pub type BridgeBounds = analytic::BridgeBounds<f64>;
pub type Optimum = optimize::Optimum<f64>;

pub use mc::{McEstimate, SimSettings};
pub use model::{Dimension, MechanismKind};
