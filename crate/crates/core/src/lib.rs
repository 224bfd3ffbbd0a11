//! Exact p-adic Weyl pseudo-differential calculus and C*-deformation at desk
//! scale: Bruhat–Schwartz functions on Q_p^n, the symplectic Fourier
//! transform and Haran operators, Weyl quantization and the Moyal product,
//! coherent states, Rieffel-type deformation of spectral algebras, and the
//! twisted group algebra.

pub mod bruhat;
pub mod config;
pub mod deform;
pub mod error;
pub mod fourier;
pub mod padic;
pub mod report;
pub mod scalars;
pub mod suites;
pub mod twisted;
pub mod weyl;

pub use bruhat::SBFunction;
pub use config::Tolerances;
pub use deform::{deform_sc, DeformedAlgebra, SpectralAlgebra};
pub use error::{Error, Result};
pub use padic::{GridPoint, Resolution, Root, Theta, Q};
pub use report::{CheckRecord, Status, VerificationReport};
pub use scalars::{Backend, CycScalar, Mat, Scalar};
pub use suites::SuiteParams;
pub use weyl::{CellBasis, LinOperator};
