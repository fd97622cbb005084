//! Two-qubit simulator and analysis toolkit for the coherence /
//! predictability / concurrence ("triality") relation.
//!
//! The numerical core (`linalg`, `state`, `metrics`, `noise`, `tomography`)
//! is generic over [`Real`]; the experiment harness and CLI run in `f64`.

// Range checks are written as `!(x <= tol)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod scalar;
pub mod seed;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{hermitian_eigen, kron, sqrt_psd, Eigen, Matrix, Pauli};
pub use metrics::{
    c_max, coherence, concurrence_mixed, concurrence_pure, evaluate, evaluate_pure, predictability,
    TrialityRecord,
};
pub use noise::{CountsTable, NoiseModel, Target};
pub use scalar::Real;
pub use state::{DensityMatrix, PrepParams, PureTwoQubitState, Subsystem};
pub use tomography::{BasisSetting, ExpectationSet};

pub type ComplexMatrix = Matrix<f64>;
pub type ComplexMatrix32 = Matrix<f32>;
pub type Density = DensityMatrix<f64>;
pub type Density32 = DensityMatrix<f32>;
pub type PureState = PureTwoQubitState<f64>;
pub type PureState32 = PureTwoQubitState<f32>;
pub type Record = TrialityRecord<f64>;
pub type Record32 = TrialityRecord<f32>;
