use crate::error::{dim_err, Error, Result};
use crate::linalg::Matrix;
use crate::model::AugmentedModel;
use crate::predictors::PredictorGains;

use super::problem::{AffineLmi, Decision, DecisionLayout, LmiProblem};

/// The observer-design block matrix
///
/// ```text
/// [ P - ΓᵀΓ     0       ĀᵀP - C̄ᵀWᵀ ]
/// [   ⋆       γ̄ I        B̄_wᵀP    ]
/// [   ⋆        ⋆           P       ]
/// ```
///
/// evaluated at `(P, W, γ̄)`. Positive definiteness certifies that
/// `L = P⁻¹W` gives an l2 gain of at most `sqrt(γ̄)` from `Δ^{r+1} w` to
/// `Γ e_η`.
pub fn theorem1_matrix(aug: &AugmentedModel, gamma: &Matrix, p: &Matrix, w: &Matrix, gamma_bar: f64) -> Matrix {
    let n = aug.n();
    let q = aug.q;
    let size = 2 * n + q;
    let mut m = Matrix::zeros(size, size);
    let top_left = p - gamma.transpose() * gamma;
    let coupling = aug.a.transpose() * p - aug.c.transpose() * w.transpose();
    let dist = aug.b_w.transpose() * p;
    m.view_mut((0, 0), (n, n)).copy_from(&top_left);
    m.view_mut((0, n + q), (n, n)).copy_from(&coupling);
    m.view_mut((n + q, 0), (n, n)).copy_from(&coupling.transpose());
    m.view_mut((n, n), (q, q)).copy_from(&(Matrix::identity(q, q) * gamma_bar));
    m.view_mut((n, n + q), (q, n)).copy_from(&dist);
    m.view_mut((n + q, n), (n, q)).copy_from(&dist.transpose());
    m.view_mut((n + q, n + q), (n, n)).copy_from(p);
    m
}

/// `ĀᵀP - C̄ᵀWᵀ + PĀ - WC̄ - 2ζP`.
pub fn dstability_matrix(aug: &AugmentedModel, p: &Matrix, w: &Matrix, zeta: f64) -> Matrix {
    let s = aug.a.transpose() * p - aug.c.transpose() * w.transpose();
    &s + s.transpose() - p * (2.0 * zeta)
}

fn check_gamma(aug: &AugmentedModel, gains: &PredictorGains) -> Result<()> {
    if gains.gamma.ncols() != aug.n() {
        return Err(dim_err(
            "Gamma",
            "augmented model",
            format!("Gamma has {} columns, n = {}", gains.gamma.ncols(), aug.n()),
        ));
    }
    Ok(())
}

fn theorem1_lmi(aug: &AugmentedModel, gains: &PredictorGains, layout: &DecisionLayout) -> Result<AffineLmi> {
    let gamma = gains.gamma.clone();
    AffineLmi::from_map("theorem1", layout, |d: &Decision| {
        theorem1_matrix(aug, &gamma, &d.p, &d.w, d.gamma_bar)
    })
}

/// Observer-design LMI in `(P, W, γ̄)`.
pub fn assemble_theorem1(aug: &AugmentedModel, gains: &PredictorGains) -> Result<LmiProblem> {
    check_gamma(aug, gains)?;
    let layout = DecisionLayout::free(aug.n(), aug.m_y());
    let mut problem = LmiProblem::new(layout);
    let lmi = theorem1_lmi(aug, gains, &problem.layout)?;
    problem.push(lmi)?;
    Ok(problem)
}

/// Same LMI with the gain `L` fixed (`W = P L`): certifies a given observer
/// and finds its smallest provable `γ̄`.
pub fn assemble_theorem1_fixed_gain(aug: &AugmentedModel, gains: &PredictorGains, l: &Matrix) -> Result<LmiProblem> {
    check_gamma(aug, gains)?;
    if l.nrows() != aug.n() || l.ncols() != aug.m_y() {
        return Err(dim_err("L", "augmented model", format!("L is {}x{}", l.nrows(), l.ncols())));
    }
    let layout = DecisionLayout::with_fixed_gain(l.clone());
    let mut problem = LmiProblem::new(layout);
    let lmi = theorem1_lmi(aug, gains, &problem.layout)?;
    problem.push(lmi)?;
    Ok(problem)
}

/// The pair of band constraints confining `Re λ(Ā - LC̄)` to `(ζ_b, ζ_a)`,
/// both normalized to `≻ 0`:
///
/// * upper: `-(ĀᵀP - C̄ᵀWᵀ + PĀ - WC̄ - 2ζ_a P) ≻ 0`
/// * lower: `ĀᵀP - C̄ᵀWᵀ + PĀ - WC̄ - 2ζ_b P ≻ 0`
pub fn assemble_dstability(
    aug: &AugmentedModel,
    layout: &DecisionLayout,
    zeta_a: f64,
    zeta_b: f64,
) -> Result<[AffineLmi; 2]> {
    if !(zeta_a.is_finite() && zeta_b.is_finite()) || zeta_b >= zeta_a || zeta_b < -1.0 || zeta_a > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "band needs -1 <= zeta_b < zeta_a <= 1, got zeta_a = {zeta_a}, zeta_b = {zeta_b}"
        )));
    }
    if layout.n != aug.n() || layout.m_y != aug.m_y() {
        return Err(dim_err("layout", "augmented model", "decision layout does not match (n, m_y)"));
    }
    let upper = AffineLmi::from_map("dstab_upper", layout, |d: &Decision| {
        -dstability_matrix(aug, &d.p, &d.w, zeta_a)
    })?;
    let lower = AffineLmi::from_map("dstab_lower", layout, |d: &Decision| {
        dstability_matrix(aug, &d.p, &d.w, zeta_b)
    })?;
    Ok([upper, lower])
}

impl LmiProblem {
    /// Appends the band constraints and records the region.
    pub fn add_dstability(&mut self, aug: &AugmentedModel, zeta_a: f64, zeta_b: f64) -> Result<()> {
        let [upper, lower] = assemble_dstability(aug, &self.layout, zeta_a, zeta_b)?;
        self.push(upper)?;
        self.push(lower)?;
        self.region = Some((zeta_a, zeta_b));
        Ok(())
    }
}
