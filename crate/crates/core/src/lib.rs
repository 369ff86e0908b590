//! Random projection ensemble quadratic discriminant analysis (RPE-QDA).
//!
//! The classifier draws `B` random `d × p` matrices, fits a Gaussian QDA model
//! on the training data projected through each of them, and classifies by the
//! average of the `B` projected discriminant functions. Only `d × d` covariance
//! matrices are ever factored, so the cost of fitting is `O(B (d p n + d^3))`.
//!
//! Module map:
//!
//! * [`linalg`]: dense kernels (Cholesky, quadratic forms, QR, sample covariance).
//! * [`randproj`]: seedable Gaussian and sparse three-point projection matrices.
//! * [`qda`]: Gaussian class models and the classical QDA rule.
//! * [`rpe`]: the ensemble classifier, in sample and known-parameter modes.
//! * [`schemes`]: structured covariances, simulation schemes and KL divergences.
//! * [`eval`]: replicated experiments, LOOCV and the KL lower-bound diagnostic.
//! * [`data`]: labelled datasets and their CSV format.
//! * [`model_file`]: JSON persistence of fitted ensembles.

pub mod data;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod model_file;
pub mod qda;
pub mod randproj;
pub mod rng;
pub mod rpe;
pub mod schemes;

pub use data::Dataset;
pub use error::{Error, Result};
pub use linalg::{CholeskyFactor, Matrix, SymmetricMatrix};
pub use qda::{GaussianClassModel, QdaModel};
pub use randproj::{ProjectionFamily, ProjectionMatrix};
pub use rpe::{RpeConfig, RpeModel};
pub use schemes::{SchemeId, SchemeSpec, StructuredCovariance};

/// Version string embedded in every artifact written by this crate.
pub const VERSION: &str = concat!("rpeqda ", env!("CARGO_PKG_VERSION"));
