//! LMI-based observer design.
//!
//! [`assemble_theorem1`] builds the bounded-l2-gain condition on
//! `(P, W, γ̄)`, [`LmiProblem::add_dstability`] appends the eigenvalue band,
//! [`solve_design`] hands the problem to a semidefinite backend and
//! [`verify_certificate`] re-checks the result without going through the
//! affine encoding.

mod assemble;
mod backend;
mod certificate;
mod interchange;
mod problem;

pub use assemble::{
    assemble_dstability, assemble_theorem1, assemble_theorem1_fixed_gain, dstability_matrix, theorem1_matrix,
};
pub use backend::{ClarabelBackend, SdpBackend, SolveOutcome};
pub use certificate::{
    condensed_matrix, gain_report, solve_design, solve_design_with, verify_certificate, DesignCertificate,
    GainReport, VerificationReport, RECONSTRUCTION_TOL,
};
pub use interchange::{
    certificate_from_json, certificate_to_json, export_certificate, export_problem, import_certificate,
    import_problem, problem_from_json, problem_to_json, CertificateDoc, ConstraintDoc, ProblemDoc, VariablesDoc,
    PROBLEM_FORMAT,
};
pub use problem::{AffineLmi, Decision, DecisionLayout, LmiProblem, Objective, STRICT_MARGIN, SYMMETRY_TOL};
