//! Multi-task and lifelong linear bandits with a shared low-rank
//! representation.
//!
//! Every algorithm is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the `*64` aliases below fix the common case.
//!
//! * [`linalg`]: dense kernels (truncated SVD, least squares, projections,
//!   subspace distance, sphere sampling).
//! * [`env`]: synthetic instances, noisy rewards and expected-regret ledgers.
//! * [`mtrl`]: the concurrent three-stage explore-then-commit algorithm.
//! * [`baselines`]: independent per-task ETC and the squared-covariance
//!   (E2TC-style) variant.
//! * [`lll`]: the lifelong learner with incremental basis growth.

pub mod baselines;
pub mod env;
pub mod error;
pub mod linalg;
pub mod lll;
pub mod mtrl;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Basis64 = linalg::OrthonormalBasis<f64>;
pub type InstanceSpec64 = env::InstanceSpec<f64>;
pub type Instance64 = env::BanditInstance<f64>;
pub type Ledger64 = env::RegretLedger<f64>;
pub type LllConfig64 = lll::LllConfig<f64>;
pub type LllOutcome64 = lll::LllOutcome<f64>;
pub type MtrlDiagnostics64 = mtrl::MtrlDiagnostics<f64>;

pub type Matrix32 = linalg::Matrix<f32>;
pub type Instance32 = env::BanditInstance<f32>;
pub type InstanceSpec32 = env::InstanceSpec<f32>;
