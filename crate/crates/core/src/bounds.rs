//! Analytical prediction-error bounds.
//!
//! The prediction error splits into an observation part `E_ô = Γ e_η` and a
//! truncation part `E_r`, the Newton-series tail the observer cannot see:
//!
//! ```text
//! E_r(k) = Σ_{j=1}^{d} A^{j-1} B_w Σ_{m=r+1}^{d-j} C(d-j, m) Δ^m w(k)
//! ```
//!
//! The tail is finite because `C(d-j, m) = 0` for `m > d-j`. With
//! `‖Δ^{r+1} w‖ <= δ`, each `Δ^m w` with `m = l+r+1` is an alternating
//! binomial combination of `l+1` residual samples, so `‖Δ^m w‖ <= 2^l δ`.
//! That gives `‖E_r(k)‖ <= δ d μ` with
//!
//! ```text
//! φ_j = Σ_{l=0}^{d-j-r-1} C(d-j, l+r+1) 2^l
//! Y_j = (A^{j-1} B_w)ᵀ (A^{j-1} B_w)
//! μ   = max_j sqrt(λ_max(Y_j)) φ_j
//! ```
//!
//! and, combined with the observer's l2 gain `γ`, the running l2 norm of
//! the full prediction error stays below `(γ + d μ) δ sqrt(k+1) + sqrt(ε)`
//! where `ε = e_η(0)ᵀ P e_η(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::binomial_f64;
use crate::linalg::{matrix_powers, max_symmetric_eigenvalue, Matrix, Vector};
use crate::model::PlantModel;

/// `Y_j = B_wᵀ (A^{j-1})ᵀ A^{j-1} B_w` for `1 <= j <= d`.
pub fn compute_yj(plant: &PlantModel, j: usize) -> Result<Matrix> {
    if j == 0 || j > plant.delay {
        return Err(Error::OutOfRange(format!("j = {j} outside 1..={}", plant.delay)));
    }
    let g = &matrix_powers(&plant.a, j - 1)[j - 1] * &plant.b_w;
    Ok(g.transpose() * g)
}

/// Largest singular value of `Y^{1/2}` for PSD `Y`, i.e. `sqrt(λ_max(Y))`.
pub fn sigma_max_sqrt(y: &Matrix) -> f64 {
    max_symmetric_eigenvalue(y).max(0.0).sqrt()
}

/// `φ_j`; zero when `d - j - r - 1 < 0`.
pub fn compute_phi_j(d: usize, j: usize, r: usize) -> f64 {
    let Some(upper) = (d as i64 - j as i64 - r as i64 - 1).try_into().ok() else {
        return 0.0;
    };
    let upper: usize = upper;
    (0..=upper)
        .map(|l| binomial_f64(d - j, l + r + 1) * 2f64.powi(l as i32))
        .sum()
}

/// Per-`j` ingredients of `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub j: usize,
    pub sigma_max_sqrt_yj: f64,
    pub phi_j: f64,
}

pub fn bound_terms(plant: &PlantModel, r: usize) -> Vec<BoundTerm> {
    let d = plant.delay;
    (1..=d)
        .map(|j| BoundTerm {
            j,
            sigma_max_sqrt_yj: sigma_max_sqrt(&compute_yj(plant, j).expect("j in range")),
            phi_j: compute_phi_j(d, j, r),
        })
        .collect()
}

/// `μ = max_j σ_max(Y_j^{1/2}) φ_j`.
pub fn compute_mu(plant: &PlantModel, r: usize) -> f64 {
    bound_terms(plant, r)
        .iter()
        .map(|t| t.sigma_max_sqrt_yj * t.phi_j)
        .fold(0.0, f64::max)
}

/// `(γ + d μ) δ sqrt(k+1) + sqrt(ε)`.
pub fn composite_bound(gamma: f64, delta: f64, d: usize, mu: f64, epsilon: f64, k: usize) -> f64 {
    (gamma + d as f64 * mu) * delta * ((k + 1) as f64).sqrt() + epsilon.sqrt()
}

/// Direct evaluation of `E_r(k)` from `diffs = [Δ^0 w(k), ..., Δ^{M} w(k)]`,
/// `M >= d-1`.
pub fn truncation_error(plant: &PlantModel, r: usize, diffs: &[Vector]) -> Result<Vector> {
    let d = plant.delay;
    if diffs.len() < d {
        return Err(Error::OutOfRange(format!(
            "truncation error needs differences up to order {}, got {}",
            d - 1,
            diffs.len().saturating_sub(1)
        )));
    }
    let powers = matrix_powers(&plant.a, d - 1);
    let mut out = Vector::zeros(plant.n_p());
    for j in 1..=d {
        let s = d - j;
        let mut tail = Vector::zeros(plant.q());
        for (m, diff) in diffs.iter().enumerate().take(s + 1).skip(r + 1) {
            tail.axpy(binomial_f64(s, m), diff, 1.0);
        }
        out += &powers[j - 1] * (&plant.b_w * tail);
    }
    Ok(out)
}

/// Incremental `sqrt(Σ_{τ<=k} ‖f(τ)‖²)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningL2 {
    sum_sq: f64,
}

impl RunningL2 {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `‖v‖²` and returns the updated norm.
    pub fn push(&mut self, v: &Vector) -> f64 {
        self.sum_sq += v.norm_squared();
        self.value()
    }

    pub fn push_norm(&mut self, norm: f64) -> f64 {
        self.sum_sq += norm * norm;
        self.value()
    }

    pub fn value(&self) -> f64 {
        self.sum_sq.sqrt()
    }
}

/// Running l2 norms of a whole sequence.
pub fn running_l2(seq: &[Vector]) -> Vec<f64> {
    let mut acc = RunningL2::new();
    seq.iter().map(|v| acc.push(v)).collect()
}

/// Everything needed to draw the composite bound curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub mu: f64,
    pub per_j: Vec<BoundTerm>,
    pub delta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub d: usize,
    pub r: usize,
}

impl BoundReport {
    pub fn new(plant: &PlantModel, r: usize, gamma: f64, delta: f64, epsilon: f64) -> Self {
        let per_j = bound_terms(plant, r);
        let mu = per_j
            .iter()
            .map(|t| t.sigma_max_sqrt_yj * t.phi_j)
            .fold(0.0, f64::max);
        Self {
            mu,
            per_j,
            delta,
            gamma,
            epsilon,
            d: plant.delay,
            r,
        }
    }

    pub fn bound_at(&self, k: usize) -> f64 {
        composite_bound(self.gamma, self.delta, self.d, self.mu, self.epsilon, k)
    }

    /// Per-step bound on `‖E_r(k)‖`, `δ d μ`.
    pub fn truncation_step_bound(&self) -> f64 {
        self.delta * self.d as f64 * self.mu
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
