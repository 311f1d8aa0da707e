//! JSON interchange for LMI problems and certificates, so that an external
//! solver can stand in for the built-in backend.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matrix_from_rows, matrix_to_rows};

use super::certificate::DesignCertificate;
use super::problem::{AffineLmi, DecisionLayout, LmiProblem, Objective};

pub const PROBLEM_FORMAT: &str = "delaypred-lmi/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariablesDoc {
    /// Order of the symmetric variable `P`.
    #[serde(rename = "P")]
    pub p: usize,
    /// `[rows, cols]` of `W`, absent when the gain is fixed.
    #[serde(rename = "W")]
    pub w: Option<[usize; 2]>,
    /// Fixed observer gain (then `W = P L`).
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub fixed_gain: Option<Vec<Vec<f64>>>,
    pub gamma_bar: usize,
    /// Total scalar decision variables.
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub name: String,
    pub size: usize,
    pub constant: Vec<Vec<f64>>,
    /// One coefficient matrix per scalar decision variable.
    pub coefficients: Vec<Vec<Vec<f64>>>,
    /// Margin `m` such that the constraint is imposed as `F(x) ⪰ m I`.
    pub strict_margin: f64,
}

/// On-disk LMI problem.
///
/// The decision vector lists the upper triangle of `P` column by column
/// (`i <= j`), then `W` row-major, then `γ̄`. Each constraint reads
/// `constant + Σ_i x_i coefficients[i] ≻ 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub format: String,
    pub variables: VariablesDoc,
    pub objective: String,
    pub region: Option<[f64; 2]>,
    pub constraints: Vec<ConstraintDoc>,
}

fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::MinimizeGammaBar => "minimize_gamma_bar",
        Objective::Feasibility => "feasibility",
    }
}

pub fn export_problem(problem: &LmiProblem) -> ProblemDoc {
    let l = &problem.layout;
    ProblemDoc {
        format: PROBLEM_FORMAT.to_string(),
        variables: VariablesDoc {
            p: l.n,
            w: l.fixed_gain.is_none().then_some([l.n, l.m_y]),
            fixed_gain: l.fixed_gain.as_ref().map(matrix_to_rows),
            gamma_bar: 1,
            count: l.len(),
        },
        objective: objective_name(problem.objective).to_string(),
        region: problem.region.map(|(a, b)| [a, b]),
        constraints: problem
            .constraints
            .iter()
            .map(|c| ConstraintDoc {
                name: c.name.clone(),
                size: c.size(),
                constant: matrix_to_rows(&c.constant),
                coefficients: c.coefficients.iter().map(matrix_to_rows).collect(),
                strict_margin: c.strict_margin(),
            })
            .collect(),
    }
}

pub fn import_problem(doc: &ProblemDoc) -> Result<LmiProblem> {
    if doc.format != PROBLEM_FORMAT {
        return Err(Error::Parse(format!("unsupported problem format `{}`", doc.format)));
    }
    let layout = match &doc.variables.fixed_gain {
        Some(rows) => DecisionLayout::with_fixed_gain(matrix_from_rows("L", rows)?),
        None => {
            let [n, m_y] = doc
                .variables
                .w
                .ok_or_else(|| Error::Parse("variables.W missing for a free-gain problem".into()))?;
            DecisionLayout::free(n, m_y)
        }
    };
    if layout.n != doc.variables.p || layout.len() != doc.variables.count {
        return Err(Error::Parse("variable counts inconsistent with layout".into()));
    }
    let mut problem = LmiProblem::new(layout);
    problem.objective = match doc.objective.as_str() {
        "minimize_gamma_bar" => Objective::MinimizeGammaBar,
        "feasibility" => Objective::Feasibility,
        other => return Err(Error::Parse(format!("unknown objective `{other}`"))),
    };
    problem.region = doc.region.map(|[a, b]| (a, b));
    for c in &doc.constraints {
        let lmi = AffineLmi {
            name: c.name.clone(),
            constant: matrix_from_rows(&c.name, &c.constant)?,
            coefficients: c
                .coefficients
                .iter()
                .map(|m| matrix_from_rows(&c.name, m))
                .collect::<Result<_>>()?,
        };
        problem.push(lmi)?;
    }
    Ok(problem)
}

/// On-disk certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDoc {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub gamma_bar: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Recomputed from `P` and `W` when absent.
    #[serde(rename = "L", default)]
    pub l: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub region: Option<[f64; 2]>,
}

pub fn export_certificate(cert: &DesignCertificate) -> CertificateDoc {
    CertificateDoc {
        p: matrix_to_rows(&cert.p),
        w: matrix_to_rows(&cert.w),
        gamma_bar: cert.gamma_bar,
        gamma: Some(cert.gamma()),
        l: Some(matrix_to_rows(&cert.l)),
        region: cert.region.map(|(a, b)| [a, b]),
    }
}

pub fn import_certificate(doc: &CertificateDoc) -> Result<DesignCertificate> {
    let p = matrix_from_rows("P", &doc.p)?;
    let w = matrix_from_rows("W", &doc.w)?;
    if !doc.gamma_bar.is_finite() {
        return Err(Error::Parse("gamma_bar must be finite".into()));
    }
    let region = doc.region.map(|[a, b]| (a, b));
    match &doc.l {
        Some(rows) => {
            let l = matrix_from_rows("L", rows)?;
            Ok(DesignCertificate {
                p,
                w,
                gamma_bar: doc.gamma_bar,
                l,
                region,
            })
        }
        None => DesignCertificate::from_parts(p, w, doc.gamma_bar, region),
    }
}

pub fn certificate_to_json(cert: &DesignCertificate) -> Result<String> {
    Ok(serde_json::to_string_pretty(&export_certificate(cert))?)
}

pub fn certificate_from_json(text: &str) -> Result<DesignCertificate> {
    let doc: CertificateDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    import_certificate(&doc)
}

pub fn problem_to_json(problem: &LmiProblem) -> Result<String> {
    Ok(serde_json::to_string_pretty(&export_problem(problem))?)
}

pub fn problem_from_json(text: &str) -> Result<LmiProblem> {
    let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    import_problem(&doc)
}
