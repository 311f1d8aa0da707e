use crate::error::{dim_err, Error, Result};
use crate::linalg::{symmetric_norm, Matrix};

/// Symmetry tolerance for assembled constraint blocks.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// One point in decision space.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub p: Matrix,
    pub w: Matrix,
    pub gamma_bar: f64,
}

/// Vectorization of `(P, W, γ̄)`.
///
/// `P` occupies the first `n(n+1)/2` slots (upper triangle, column by
/// column, `i <= j`; the basis element for an off-diagonal slot sets both
/// `P[i,j]` and `P[j,i]`). `W` follows row-major, then `γ̄` last. When the
/// gain is fixed, `W = P L` is not a variable and its slots are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionLayout {
    pub n: usize,
    pub m_y: usize,
    pub fixed_gain: Option<Matrix>,
}

impl DecisionLayout {
    pub fn free(n: usize, m_y: usize) -> Self {
        Self {
            n,
            m_y,
            fixed_gain: None,
        }
    }

    pub fn with_fixed_gain(l: Matrix) -> Self {
        Self {
            n: l.nrows(),
            m_y: l.ncols(),
            fixed_gain: Some(l),
        }
    }

    pub fn p_len(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn w_len(&self) -> usize {
        if self.fixed_gain.is_some() {
            0
        } else {
            self.n * self.m_y
        }
    }

    pub fn len(&self) -> usize {
        self.p_len() + self.w_len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn gamma_index(&self) -> usize {
        self.len() - 1
    }

    /// `(i, j)` with `i <= j` for each P slot.
    pub fn p_slots(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..n).flat_map(|j| (0..=j).map(move |i| (i, j)))
    }

    pub fn unpack(&self, x: &[f64]) -> Result<Decision> {
        if x.len() != self.len() {
            return Err(dim_err(
                "decision vector",
                "layout",
                format!("got {} entries, layout has {}", x.len(), self.len()),
            ));
        }
        let mut p = Matrix::zeros(self.n, self.n);
        for ((i, j), v) in self.p_slots().zip(x.iter()) {
            p[(i, j)] = *v;
            p[(j, i)] = *v;
        }
        let w = match &self.fixed_gain {
            Some(l) => &p * l,
            None => {
                let off = self.p_len();
                Matrix::from_fn(self.n, self.m_y, |i, j| x[off + i * self.m_y + j])
            }
        };
        Ok(Decision {
            p,
            w,
            gamma_bar: x[self.gamma_index()],
        })
    }

    pub fn pack(&self, d: &Decision) -> Vec<f64> {
        let mut x: Vec<f64> = self.p_slots().map(|(i, j)| d.p[(i, j)]).collect();
        if self.fixed_gain.is_none() {
            for i in 0..self.n {
                for j in 0..self.m_y {
                    x.push(d.w[(i, j)]);
                }
            }
        }
        x.push(d.gamma_bar);
        x
    }

    fn unit(&self, idx: usize) -> Decision {
        let mut x = vec![0.0; self.len()];
        x[idx] = 1.0;
        self.unpack(&x).expect("unit vector has layout length")
    }
}

/// Affine matrix inequality `F(x) = F_0 + Σ_i x_i F_i ≻ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLmi {
    pub name: String,
    pub constant: Matrix,
    /// One symmetric coefficient matrix per scalar decision variable.
    pub coefficients: Vec<Matrix>,
}

impl AffineLmi {
    /// Samples an affine symmetric-matrix map at the origin and at every
    /// basis direction.
    pub fn from_map<F>(name: impl Into<String>, layout: &DecisionLayout, map: F) -> Result<Self>
    where
        F: Fn(&Decision) -> Matrix,
    {
        let name = name.into();
        let zero = layout.unpack(&vec![0.0; layout.len()])?;
        let constant = map(&zero);
        let coefficients: Vec<Matrix> = (0..layout.len())
            .map(|i| map(&layout.unit(i)) - &constant)
            .collect();
        let lmi = Self {
            name,
            constant,
            coefficients,
        };
        lmi.check_symmetric()?;
        Ok(lmi)
    }

    pub fn size(&self) -> usize {
        self.constant.nrows()
    }

    pub fn check_symmetric(&self) -> Result<()> {
        for (idx, m) in std::iter::once(&self.constant).chain(&self.coefficients).enumerate() {
            if m.nrows() != m.ncols() || m.nrows() != self.size() {
                return Err(dim_err("constraint block", "constraint", format!("{}: block {idx} has wrong shape", self.name)));
            }
            let asym = (m - m.transpose()).amax();
            if asym > SYMMETRY_TOL * (1.0 + m.amax()) {
                return Err(Error::InvalidParameter(format!(
                    "{}: block {idx} not symmetric (max asymmetry {asym:e})",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Matrix {
        let mut out = self.constant.clone();
        for (xi, fi) in x.iter().zip(&self.coefficients) {
            if *xi != 0.0 {
                out += fi * *xi;
            }
        }
        out
    }

    /// Strictness margin used when handing `≻ 0` to a non-strict cone.
    pub fn strict_margin(&self) -> f64 {
        STRICT_MARGIN * (1.0 + symmetric_norm(&self.constant))
    }
}

/// Relative margin turning `≻ 0` into `⪰ margin · I`.
pub const STRICT_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinimizeGammaBar,
    Feasibility,
}

/// A set of LMIs over a common decision layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem {
    pub layout: DecisionLayout,
    pub constraints: Vec<AffineLmi>,
    pub objective: Objective,
    /// Vertical eigenvalue band `(ζ_a, ζ_b)` when D-stability is imposed.
    pub region: Option<(f64, f64)>,
}

impl LmiProblem {
    pub fn new(layout: DecisionLayout) -> Self {
        Self {
            layout,
            constraints: Vec::new(),
            objective: Objective::MinimizeGammaBar,
            region: None,
        }
    }

    pub fn push(&mut self, lmi: AffineLmi) -> Result<()> {
        if lmi.coefficients.len() != self.layout.len() {
            return Err(dim_err(
                "constraint",
                "layout",
                format!("{} has {} coefficients, layout has {}", lmi.name, lmi.coefficients.len(), self.layout.len()),
            ));
        }
        lmi.check_symmetric()?;
        self.constraints.push(lmi);
        Ok(())
    }

    /// Smallest eigenvalue of each constraint at `x`.
    pub fn margins(&self, x: &[f64]) -> Vec<(String, f64)> {
        self.constraints
            .iter()
            .map(|c| (c.name.clone(), crate::linalg::min_symmetric_eigenvalue(&c.evaluate(x))))
            .collect()
    }
}
