//! Counterfactual prediction on panel (time-series cross-section) data.
//!
//! Treated units' unobserved no-treatment outcomes are imputed by
//! nuclear-norm-regularized matrix completion and six benchmark estimators;
//! causal effects are then quantified with randomization inference and block
//! bootstraps.
//!
//! All numerics are generic over the scalar type through [`scalar::Scalar`]
//! (`f32` or `f64`); the type aliases at the crate root fix `f64` for
//! ordinary use.

pub mod covariates;
pub mod error;
pub mod linalg;
pub mod mcnnm;
pub mod metrics;
pub mod panel;
pub mod preprocess;
pub mod rng;
pub mod scalar;

pub use covariates::CovariateSet;
pub use error::{Error, Result};
pub use panel::{build_mask, Mask, PanelMatrix, TreatmentPlan};
pub use preprocess::{preprocess, LongRecord, PreprocessConfig, PreprocessReport};
pub use scalar::Scalar;

/// Crate version, embedded in emitted reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Double-precision panel.
pub type Panel = PanelMatrix<f64>;
/// Double-precision covariate set.
pub type Covariates = CovariateSet<f64>;
