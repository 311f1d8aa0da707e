//! High-order extended Luenberger observer and the true augmented dynamics.

use crate::disturbance::DisturbanceSignal;
use crate::error::{dim_err, Result};
use crate::linalg::{Matrix, Vector};
use crate::model::AugmentedModel;
use crate::predictors::PredictorGains;

/// `η̂(k) = [x̂(k); ŵ(k); Δŵ(k); ...; Δ^r ŵ(k)]` at time `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub etahat: Vector,
    pub k: i64,
}

impl ObserverState {
    /// `η̂(0) = [x̂(0); 0]`, with `x̂(0) = x(0)` when the initial state is
    /// measured and zero otherwise.
    pub fn initial(aug: &AugmentedModel, measured_x0: Option<&Vector>) -> Result<Self> {
        let mut etahat = Vector::zeros(aug.n());
        if let Some(x0) = measured_x0 {
            if x0.len() != aug.n_p {
                return Err(dim_err("x0", "A", format!("x0 has {} entries, n_p = {}", x0.len(), aug.n_p)));
            }
            etahat.rows_mut(0, aug.n_p).copy_from(x0);
        }
        Ok(Self { etahat, k: 0 })
    }

    pub fn state_estimate(&self, n_p: usize) -> Vector {
        self.etahat.rows(0, n_p).into_owned()
    }
}

/// Observer gain `L` (`n × m_y`).
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGain(pub Matrix);

impl ObserverGain {
    pub fn new(l: Matrix, aug: &AugmentedModel) -> Result<Self> {
        if l.nrows() != aug.n() || l.ncols() != aug.m_y() {
            return Err(dim_err(
                "L",
                "augmented model",
                format!("L is {}x{}, expected {}x{}", l.nrows(), l.ncols(), aug.n(), aug.m_y()),
            ));
        }
        Ok(Self(l))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// `Ā - L C̄`.
    pub fn error_matrix(&self, aug: &AugmentedModel) -> Matrix {
        &aug.a - &self.0 * &aug.c
    }
}

/// `η̂(k+1) = Ā η̂(k) + B̄_u u(k-d) + L (y(k) - C̄ η̂(k))`.
pub fn observer_step(
    aug: &AugmentedModel,
    gain: &ObserverGain,
    state: &ObserverState,
    u_delayed: &Vector,
    y_k: &Vector,
) -> Result<ObserverState> {
    if state.etahat.len() != aug.n() {
        return Err(dim_err("etahat", "augmented model", format!("{} vs n = {}", state.etahat.len(), aug.n())));
    }
    if u_delayed.len() != aug.b_u.ncols() {
        return Err(dim_err("u", "B_u", format!("u has {} entries, B_u has {} columns", u_delayed.len(), aug.b_u.ncols())));
    }
    if y_k.len() != aug.m_y() {
        return Err(dim_err("y", "C", format!("y has {} entries, C has {} rows", y_k.len(), aug.m_y())));
    }
    if gain.0.nrows() != aug.n() || gain.0.ncols() != aug.m_y() {
        return Err(dim_err("L", "augmented model", "gain shape does not match (n, m_y)"));
    }
    let e_y = y_k - &aug.c * &state.etahat;
    let next = &aug.a * &state.etahat + &aug.b_u * u_delayed + &gain.0 * e_y;
    Ok(ObserverState {
        etahat: next,
        k: state.k + 1,
    })
}

/// Output innovation `e_y(k) = y(k) - C̄ η̂(k)`.
pub fn output_error(aug: &AugmentedModel, state: &ObserverState, y_k: &Vector) -> Vector {
    y_k - &aug.c * &state.etahat
}

/// True augmented dynamics `η(k+1) = Ā η(k) + B̄_u u(k-d) + B̄_w Δ^{r+1} w(k)`.
pub fn augmented_step(aug: &AugmentedModel, eta: &Vector, u_delayed: &Vector, residual: &Vector) -> Vector {
    &aug.a * eta + &aug.b_u * u_delayed + &aug.b_w * residual
}

/// `η(k) = [x(k); w(k); Δw(k); ...; Δ^r w(k)]` from the plant state and the
/// disturbance by direct differencing.
pub fn true_augmented_state(aug: &AugmentedModel, x_k: &Vector, w: &DisturbanceSignal, k: usize) -> Vector {
    let mut eta = Vector::zeros(aug.n());
    eta.rows_mut(0, aug.n_p).copy_from(x_k);
    for (m, diff) in w.differences(k, aug.order).iter().enumerate() {
        eta.rows_mut(aug.n_p + m * aug.q, aug.q).copy_from(diff);
    }
    eta
}

/// `e_η(k+1) = (Ā - L C̄) e_η(k) + B̄_w Δ^{r+1} w(k)`.
pub fn error_dynamics_step(aug: &AugmentedModel, gain: &ObserverGain, e_eta: &Vector, residual: &Vector) -> Vector {
    gain.error_matrix(aug) * e_eta + &aug.b_w * residual
}

/// Observation part of the prediction error, `E_ô(k) = Γ(d) e_η(k)`.
pub fn observation_error_output(gains: &PredictorGains, e_eta: &Vector) -> Vector {
    &gains.gamma * e_eta
}
