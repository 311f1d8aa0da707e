use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{
    eigenvalues, max_symmetric_eigenvalue, min_symmetric_eigenvalue, spd_solve, spectral_radius, Matrix,
};
use crate::model::AugmentedModel;
use crate::predictors::PredictorGains;

use super::assemble::{dstability_matrix, theorem1_matrix};
use super::backend::{ClarabelBackend, SdpBackend};
use super::problem::{AffineLmi, LmiProblem};

/// Relative tolerance on `‖P L - W‖`.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Observer-design certificate `(P, W, γ̄)` with `L = P⁻¹ W`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignCertificate {
    pub p: Matrix,
    pub w: Matrix,
    pub gamma_bar: f64,
    pub l: Matrix,
    pub region: Option<(f64, f64)>,
}

impl DesignCertificate {
    /// Builds the certificate, recovering `L` by a Cholesky solve of
    /// `P L = W` (never an explicit inverse).
    pub fn from_parts(p: Matrix, w: Matrix, gamma_bar: f64, region: Option<(f64, f64)>) -> Result<Self> {
        if p.nrows() != p.ncols() || w.nrows() != p.nrows() {
            return Err(dim_err("P", "W", format!("P is {}x{}, W is {}x{}", p.nrows(), p.ncols(), w.nrows(), w.ncols())));
        }
        let l = spd_solve(&p, &w)?;
        Ok(Self {
            p,
            w,
            gamma_bar,
            l,
            region,
        })
    }

    /// l2 gain bound `γ = sqrt(γ̄)`.
    pub fn gamma(&self) -> f64 {
        self.gamma_bar.max(0.0).sqrt()
    }

    /// `V(e) = eᵀ P e`.
    pub fn lyapunov(&self, e: &nalgebra::DVector<f64>) -> f64 {
        e.dot(&(&self.p * e))
    }
}

/// Solves the problem with the default interior-point backend.
pub fn solve_design(problem: &LmiProblem, minimize_gamma: bool) -> Result<DesignCertificate> {
    solve_design_with(&ClarabelBackend::default(), problem, minimize_gamma)
}

/// Relative slack on the optimal `γ̄` granted to the centering stage.
pub const GAMMA_BACKOFF: f64 = 1e-3;

/// Solves `problem`. When minimizing, the optimum found first sits on the
/// boundary of the feasible set up to solver tolerance, so a second
/// feasibility solve under the cap `γ̄ <= (1 + GAMMA_BACKOFF) γ̄*` returns a
/// strictly interior point instead.
pub fn solve_design_with<B: SdpBackend>(
    backend: &B,
    problem: &LmiProblem,
    minimize_gamma: bool,
) -> Result<DesignCertificate> {
    let mut outcome = backend.solve(problem, minimize_gamma)?;
    if minimize_gamma {
        let optimum = outcome.x[problem.layout.gamma_index()];
        let cap = optimum.max(0.0) * (1.0 + GAMMA_BACKOFF) + GAMMA_BACKOFF;
        let mut centered = problem.clone();
        centered.push(AffineLmi::from_map("gamma_cap", &problem.layout, |d| {
            Matrix::from_element(1, 1, cap - d.gamma_bar)
        })?)?;
        // On failure the boundary point stands and verification decides.
        if let Ok(inner) = backend.solve(&centered, false) {
            outcome = inner;
        }
    }
    let d = problem.layout.unpack(&outcome.x)?;
    if min_symmetric_eigenvalue(&d.p) <= 0.0 {
        return Err(Error::Solver(format!(
            "backend returned P that is not positive definite (status {})",
            outcome.status
        )));
    }
    let cert = DesignCertificate::from_parts(d.p, d.w, d.gamma_bar, problem.region)?;
    Ok(match &problem.layout.fixed_gain {
        // W = P L exactly; keep the supplied gain rather than the re-solve.
        Some(l) => DesignCertificate { l: l.clone(), ..cert },
        None => cert,
    })
}

/// Eigenvalue facts about `Ā - L C̄`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub spectral_radius: f64,
    pub region: Option<(f64, f64)>,
    /// Every eigenvalue strictly inside `ζ_b < Re λ < ζ_a`.
    pub in_band: Option<bool>,
}

pub fn gain_report(aug: &AugmentedModel, l: &Matrix, region: Option<(f64, f64)>) -> GainReport {
    let a_o = &aug.a - l * &aug.c;
    let eigenvalues = eigenvalues(&a_o);
    let in_band = region.map(|(za, zb)| eigenvalues.iter().all(|(re, _)| *re > zb && *re < za));
    GainReport {
        spectral_radius: spectral_radius(&a_o),
        eigenvalues,
        region,
        in_band,
    }
}

/// Condensed form of the design LMI after substituting `W = P L` and
/// eliminating the last block row:
///
/// ```text
/// [ A_oᵀ P A_o + ΓᵀΓ - P     A_oᵀ P B̄_w       ]
/// [        ⋆               B̄_wᵀ P B̄_w - γ̄ I  ]  ≺ 0,   A_o = Ā - L C̄
/// ```
pub fn condensed_matrix(aug: &AugmentedModel, gamma: &Matrix, p: &Matrix, l: &Matrix, gamma_bar: f64) -> Matrix {
    let n = aug.n();
    let q = aug.q;
    let a_o = &aug.a - l * &aug.c;
    let mut m = Matrix::zeros(n + q, n + q);
    let tl = a_o.transpose() * p * &a_o + gamma.transpose() * gamma - p;
    let tr = a_o.transpose() * p * &aug.b_w;
    let br = aug.b_w.transpose() * p * &aug.b_w - Matrix::identity(q, q) * gamma_bar;
    m.view_mut((0, 0), (n, n)).copy_from(&tl);
    m.view_mut((0, n), (n, q)).copy_from(&tr);
    m.view_mut((n, 0), (q, n)).copy_from(&tr.transpose());
    m.view_mut((n, n), (q, q)).copy_from(&br);
    m
}

/// Outcome of checking a certificate against the design conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub p_min_eigenvalue: f64,
    /// `‖P L - W‖ / max(1, ‖W‖)`.
    pub reconstruction_residual: f64,
    /// Smallest eigenvalue of the 3×3 block matrix (must be > 0).
    pub theorem1_margin: f64,
    /// `-λ_max` of the condensed matrix (must be > 0).
    pub condensed_margin: f64,
    /// Smallest eigenvalues of the two band LMIs, when a region is set.
    pub dstability_margins: Option<(f64, f64)>,
    pub gamma_bar: f64,
    pub gamma: f64,
    pub gain: GainReport,
    pub passed: bool,
}

pub fn verify_certificate(aug: &AugmentedModel, gains: &PredictorGains, cert: &DesignCertificate) -> Result<VerificationReport> {
    let n = aug.n();
    if cert.p.nrows() != n || cert.p.ncols() != n {
        return Err(dim_err("P", "augmented model", format!("P is {}x{}, n = {n}", cert.p.nrows(), cert.p.ncols())));
    }
    if cert.w.shape() != (n, aug.m_y()) || cert.l.shape() != (n, aug.m_y()) {
        return Err(dim_err("W/L", "augmented model", "gain shapes must be n x m_y"));
    }
    if gains.gamma.ncols() != n {
        return Err(dim_err("Gamma", "augmented model", "Gamma column count differs from n"));
    }
    let p_min_eigenvalue = min_symmetric_eigenvalue(&cert.p);
    let reconstruction_residual = (&cert.p * &cert.l - &cert.w).norm() / cert.w.norm().max(1.0);
    let theorem1_margin = min_symmetric_eigenvalue(&theorem1_matrix(aug, &gains.gamma, &cert.p, &cert.w, cert.gamma_bar));
    let condensed_margin = -max_symmetric_eigenvalue(&condensed_matrix(aug, &gains.gamma, &cert.p, &cert.l, cert.gamma_bar));
    let dstability_margins = cert.region.map(|(za, zb)| {
        (
            min_symmetric_eigenvalue(&-dstability_matrix(aug, &cert.p, &cert.w, za)),
            min_symmetric_eigenvalue(&dstability_matrix(aug, &cert.p, &cert.w, zb)),
        )
    });
    let gain = gain_report(aug, &cert.l, cert.region);
    let passed = p_min_eigenvalue > 0.0
        && reconstruction_residual <= RECONSTRUCTION_TOL
        && theorem1_margin > 0.0
        && condensed_margin > 0.0
        && gain.in_band.unwrap_or(true);
    Ok(VerificationReport {
        p_min_eigenvalue,
        reconstruction_residual,
        theorem1_margin,
        condensed_margin,
        dstability_margins,
        gamma_bar: cert.gamma_bar,
        gamma: cert.gamma(),
        gain,
        passed,
    })
}
