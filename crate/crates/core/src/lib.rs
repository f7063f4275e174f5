//! Total-variation regularized sparse Bayesian learning (TV-SBL) for
//! block-sparse multiple-measurement-vector recovery.
//!
//! The model is `Y = AX + N` with i.i.d. Gaussian noise of variance λ and a
//! zero-mean Gaussian prior on each row of `X` with variance `γᵢ`. The
//! hyperparameters are estimated by minimizing
//!
//! ```text
//! L·log|Σ_y| + Σ_l y_lᵀ Σ_y⁻¹ y_l + β·T(γ),    Σ_y = λI + A·diag(γ)·Aᵀ
//! ```
//!
//! where `T` is a total-variation penalty on consecutive entries of γ
//! ([`TvRegularizer`]). [`tv_sbl`] minimizes it by majorization-minimization,
//! [`msbl_em`] is the unregularized baseline.
//!
//! ```
//! use tvsbl::{tv_sbl, SolverOptions, TrialSpec, SparsityClass, TvRegularizer};
//!
//! let spec = TrialSpec { n: 40, ..TrialSpec::reference(SparsityClass::Homogeneous, 20.0) };
//! let trial = spec.generate(7, 8).unwrap();
//! let report = tv_sbl(
//!     &trial.dictionary,
//!     &trial.measurements,
//!     &TvRegularizer::log(1.0, 0.01).unwrap(),
//!     &SolverOptions::default(),
//! )
//! .unwrap();
//! assert_eq!(report.gamma_final.len(), 40);
//! ```

pub mod baselines;
pub mod bench;
pub mod error;
pub mod inner;
pub mod io;
pub mod metrics;
pub mod mm;
pub mod model;
pub mod regularizers;
pub mod signal_gen;
pub mod tridiag;

pub use baselines::msbl_em;
pub use error::{Error, Result};
pub use inner::{InnerOptions, SubproblemDiagnostics};
pub use metrics::{f1_score, nmse, top_k_support};
pub use mm::{tv_sbl, GammaInit, SolveReport, SolverOptions};
pub use model::{posterior, sbl_cost, Dictionary, Hyperparameters, MeasurementSet, Posterior};
pub use regularizers::TvRegularizer;
pub use signal_gen::{SparsityClass, SparsityPattern, TrialSpec};
