//! Disturbance-aware state prediction for discrete-time input-delayed
//! linear systems.
//!
//! The crate covers the whole design loop:
//!
//! * [`model`]: plant `(A, B_u, B_w, C, D_w, d)` and the augmented system
//!   that stacks the disturbance and its forward differences;
//! * [`finite`]: binomials, forward differences and the Newton series;
//! * [`predictors`]: exact, classical, observer-based and Wu–Wang
//!   prediction laws;
//! * [`observer`]: the high-order extended observer and its error dynamics;
//! * [`lmi`]: LMI synthesis and certification of the observer gain;
//! * [`bounds`]: analytical prediction-error bounds;
//! * [`sim`]: closed-loop simulation and method comparison.
//!
//! ```
//! use delaypred::prelude::*;
//!
//! let plant = PlantModel::new(
//!     Matrix::from_row_slice(2, 2, &[0.0, 1.0, 3.2, -1.4]),
//!     Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
//!     Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
//!     Matrix::identity(2, 2),
//!     Matrix::zeros(2, 1),
//!     5,
//! )?;
//! let aug = build_augmented(&plant, 4)?;
//! assert_eq!(aug.n(), 7);
//! # Ok::<(), delaypred::Error>(())
//! ```

pub mod bounds;
pub mod disturbance;
mod error;
pub mod finite;
pub mod linalg;
pub mod lmi;
pub mod model;
pub mod observer;
pub mod predictors;
pub mod sim;

pub use error::{Error, Result};

/// Common imports.
pub mod prelude {
    pub use crate::bounds::{composite_bound, compute_mu, compute_phi_j, compute_yj, truncation_error, BoundReport, RunningL2};
    pub use crate::disturbance::{make_disturbance, DisturbanceKind, DisturbanceSignal, DisturbanceSpec};
    pub use crate::finite::{forward_difference, newton_binomial, newton_series_eval};
    pub use crate::linalg::{Matrix, Vector};
    pub use crate::lmi::{
        assemble_theorem1, assemble_theorem1_fixed_gain, solve_design, verify_certificate, DesignCertificate,
    };
    pub use crate::model::{build_augmented, AugmentedModel, PlantModel};
    pub use crate::observer::{observer_step, ObserverGain, ObserverState};
    pub use crate::predictors::{compute_gains, GainForm, InputHistory, Method, PredictorGains};
    pub use crate::sim::{run_closed_loop, run_comparison, SimConfig, SimTrace};
    pub use crate::{Error, Result};
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/newton-series.md")]
    mod newton_series {}
    #[doc = include_str!("../../../book/src/predictors.md")]
    mod predictors {}
    #[doc = include_str!("../../../book/src/observer-design.md")]
    mod observer_design {}
    #[doc = include_str!("../../../book/src/error-bounds.md")]
    mod error_bounds {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
