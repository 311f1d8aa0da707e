//! Semidefinite backends.
//!
//! A backend receives constraints of the form `F_0 + Σ_i x_i F_i ⪰ m I`
//! (with `m` the strictness margin of each constraint) and a linear
//! objective, and returns a decision vector.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

// Links the system OpenBLAS/LAPACK that clarabel's PSD cone calls into.
extern crate openblas_src as _;

use crate::error::{Error, Result};

use super::problem::LmiProblem;

/// Raw backend result.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub status: String,
    pub iterations: u32,
}

pub trait SdpBackend {
    fn solve(&self, problem: &LmiProblem, minimize_gamma: bool) -> Result<SolveOutcome>;
}

/// Interior-point backend on clarabel's PSD-triangle cone.
#[derive(Debug, Clone)]
pub struct ClarabelBackend {
    pub tolerance: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iter: 300,
            verbose: false,
        }
    }
}

/// Scaled upper-triangle vectorization used by the PSD-triangle cone:
/// column by column, off-diagonals multiplied by `sqrt(2)`.
fn svec_len(m: usize) -> usize {
    m * (m + 1) / 2
}

fn svec_into(m: &nalgebra::DMatrix<f64>, out: &mut Vec<f64>) {
    let s2 = std::f64::consts::SQRT_2;
    for j in 0..m.ncols() {
        for i in 0..=j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            out.push(if i == j { v } else { s2 * v });
        }
    }
}

impl SdpBackend for ClarabelBackend {
    fn solve(&self, problem: &LmiProblem, minimize_gamma: bool) -> Result<SolveOutcome> {
        let nvars = problem.layout.len();
        let nrows: usize = problem.constraints.iter().map(|c| svec_len(c.size())).sum();

        // s = b - A x must lie in the cone; s = svec(F_0 - m I + Σ x_i F_i).
        let mut b = Vec::with_capacity(nrows);
        let mut cones = Vec::with_capacity(problem.constraints.len());
        for c in &problem.constraints {
            let margin = c.strict_margin();
            let shifted = &c.constant - nalgebra::DMatrix::<f64>::identity(c.size(), c.size()) * margin;
            svec_into(&shifted, &mut b);
            cones.push(SupportedConeT::PSDTriangleConeT(c.size()));
        }

        let mut colptr = Vec::with_capacity(nvars + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        let mut scratch = Vec::new();
        for var in 0..nvars {
            let mut row_off = 0;
            for c in &problem.constraints {
                scratch.clear();
                svec_into(&c.coefficients[var], &mut scratch);
                for (r, v) in scratch.iter().enumerate() {
                    if *v != 0.0 {
                        rowval.push(row_off + r);
                        nzval.push(-v);
                    }
                }
                row_off += svec_len(c.size());
            }
            colptr.push(rowval.len());
        }
        let a = CscMatrix::new(nrows, nvars, colptr, rowval, nzval);
        let p = CscMatrix::<f64>::zeros((nvars, nvars));
        let mut q = vec![0.0; nvars];
        if minimize_gamma {
            q[problem.layout.gamma_index()] = 1.0;
        }

        let settings = DefaultSettingsBuilder::default()
            .verbose(self.verbose)
            .max_iter(self.max_iter)
            .tol_gap_abs(self.tolerance)
            .tol_gap_rel(self.tolerance)
            .tol_feas(self.tolerance)
            .build()
            .map_err(|e| Error::Solver(format!("settings: {e}")))?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| Error::Solver(format!("setup: {e:?}")))?;
        solver.solve();

        let status = solver.solution.status;
        let label = format!("{status:?}");
        match status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(SolveOutcome {
                x: solver.solution.x.clone(),
                status: label,
                iterations: solver.solution.iterations,
            }),
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                Err(Error::Infeasible { status: label })
            }
            _ => Err(Error::Solver(format!("backend stopped with status {label}"))),
        }
    }
}
