//! Plant and augmented-system data model.
//!
//! The plant is the input-delayed LTI system
//!
//! ```text
//! x(k+1) = A x(k) + B_u u(k-d) + B_w w(k)
//! y(k)   = C x(k) + D_w w(k)
//! ```
//!
//! and the augmented model stacks the plant state with the disturbance and
//! its forward differences up to order `r`:
//! `eta = [x; w; Δw; ...; Δ^r w]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{matrix_from_rows, matrix_to_rows, Matrix};

/// Delayed LTI plant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub a: Matrix,
    pub b_u: Matrix,
    pub b_w: Matrix,
    pub c: Matrix,
    pub d_w: Matrix,
    /// Input delay in samples, at least one.
    pub delay: usize,
}

impl PlantModel {
    pub fn new(
        a: Matrix,
        b_u: Matrix,
        b_w: Matrix,
        c: Matrix,
        d_w: Matrix,
        delay: usize,
    ) -> Result<Self> {
        let plant = Self {
            a,
            b_u,
            b_w,
            c,
            d_w,
            delay,
        };
        plant.validate()?;
        Ok(plant)
    }

    /// Checks the mutual consistency of all dimensions and `d >= 1`.
    pub fn validate(&self) -> Result<()> {
        let n_p = self.a.nrows();
        if self.a.ncols() != n_p {
            return Err(dim_err(
                "A",
                "A",
                format!("A must be square, got {}x{}", n_p, self.a.ncols()),
            ));
        }
        if self.b_u.nrows() != n_p {
            return Err(dim_err(
                "A",
                "B_u",
                format!("B_u has {} rows, A has {n_p}", self.b_u.nrows()),
            ));
        }
        if self.b_w.nrows() != n_p {
            return Err(dim_err(
                "A",
                "B_w",
                format!("B_w has {} rows, A has {n_p}", self.b_w.nrows()),
            ));
        }
        if self.c.ncols() != n_p {
            return Err(dim_err(
                "A",
                "C",
                format!("C has {} columns, A has {n_p} rows", self.c.ncols()),
            ));
        }
        if self.d_w.nrows() != self.c.nrows() {
            return Err(dim_err(
                "C",
                "D_w",
                format!(
                    "D_w has {} rows, C has {}",
                    self.d_w.nrows(),
                    self.c.nrows()
                ),
            ));
        }
        if self.d_w.ncols() != self.b_w.ncols() {
            return Err(dim_err(
                "B_w",
                "D_w",
                format!(
                    "D_w has {} columns, B_w has {}",
                    self.d_w.ncols(),
                    self.b_w.ncols()
                ),
            ));
        }
        if self.delay == 0 {
            return Err(Error::InvalidParameter("delay d must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_p(&self) -> usize {
        self.a.nrows()
    }

    pub fn m_u(&self) -> usize {
        self.b_u.ncols()
    }

    pub fn q(&self) -> usize {
        self.b_w.ncols()
    }

    pub fn m_y(&self) -> usize {
        self.c.nrows()
    }

    /// True when `C = I` and `D_w = 0`, i.e. the output is the full state.
    pub fn measures_state(&self) -> bool {
        self.c.nrows() == self.c.ncols()
            && self.c == Matrix::identity(self.n_p(), self.n_p())
            && self.d_w.iter().all(|v| *v == 0.0)
    }
}

/// Extended system driving the high-order observer.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedModel {
    pub a: Matrix,
    pub b_u: Matrix,
    pub b_w: Matrix,
    pub c: Matrix,
    /// Highest difference order carried in the state.
    pub order: usize,
    pub n_p: usize,
    pub q: usize,
}

impl AugmentedModel {
    /// `n = n_p + (r+1) q`.
    pub fn n(&self) -> usize {
        self.n_p + (self.order + 1) * self.q
    }

    pub fn m_y(&self) -> usize {
        self.c.nrows()
    }

    /// The bidiagonal difference-propagation block in the lower right of `Ā`.
    pub fn pi(&self) -> Matrix {
        let n = self.n();
        self.a
            .view((self.n_p, self.n_p), (n - self.n_p, n - self.n_p))
            .into_owned()
    }
}

/// Assembles `(Ā, B̄_u, B̄_w, C̄)` for difference order `r`.
pub fn build_augmented(plant: &PlantModel, r: usize) -> Result<AugmentedModel> {
    plant.validate()?;
    let n_p = plant.n_p();
    let q = plant.q();
    let m_u = plant.m_u();
    let m_y = plant.m_y();
    let stack = (r + 1) * q;
    let n = n_p + stack;

    let mut a = Matrix::zeros(n, n);
    a.view_mut((0, 0), (n_p, n_p)).copy_from(&plant.a);
    a.view_mut((0, n_p), (n_p, q)).copy_from(&plant.b_w);
    for block in 0..=r {
        let off = n_p + block * q;
        for i in 0..q {
            a[(off + i, off + i)] = 1.0;
            if block < r {
                a[(off + i, off + q + i)] = 1.0;
            }
        }
    }

    let mut b_u = Matrix::zeros(n, m_u);
    b_u.view_mut((0, 0), (n_p, m_u)).copy_from(&plant.b_u);

    let mut b_w = Matrix::zeros(n, q);
    for i in 0..q {
        b_w[(n - q + i, i)] = 1.0;
    }

    let mut c = Matrix::zeros(m_y, n);
    c.view_mut((0, 0), (m_y, n_p)).copy_from(&plant.c);
    c.view_mut((0, n_p), (m_y, q)).copy_from(&plant.d_w);

    Ok(AugmentedModel {
        a,
        b_u,
        b_w,
        c,
        order: r,
        n_p,
        q,
    })
}

/// JSON plant/experiment definition: `{A, B_u, B_w, C, D_w, d, r}` with
/// matrices as row-major nested arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantDocument {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B_u")]
    pub b_u: Vec<Vec<f64>>,
    #[serde(rename = "B_w")]
    pub b_w: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D_w")]
    pub d_w: Vec<Vec<f64>>,
    pub d: usize,
    #[serde(default)]
    pub r: usize,
}

impl PlantDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_plant(plant: &PlantModel, r: usize) -> Self {
        Self {
            a: matrix_to_rows(&plant.a),
            b_u: matrix_to_rows(&plant.b_u),
            b_w: matrix_to_rows(&plant.b_w),
            c: matrix_to_rows(&plant.c),
            d_w: matrix_to_rows(&plant.d_w),
            d: plant.delay,
            r,
        }
    }

    /// Converts to a validated plant. Empty `B_w`/`D_w` rows are allowed
    /// for a disturbance-free plant.
    pub fn to_plant(&self) -> Result<PlantModel> {
        let a = matrix_from_rows("A", &self.a)?;
        let n_p = a.nrows();
        let b_u = matrix_from_rows("B_u", &self.b_u)?;
        let b_w = pad_rows(matrix_from_rows("B_w", &self.b_w)?, n_p);
        let c = matrix_from_rows("C", &self.c)?;
        let d_w = pad_rows(matrix_from_rows("D_w", &self.d_w)?, c.nrows());
        PlantModel::new(a, b_u, b_w, c, d_w, self.d)
    }
}

// `[]` parses as 0x0; treat it as rows x 0 so q = 0 plants are expressible.
fn pad_rows(m: Matrix, rows: usize) -> Matrix {
    if m.nrows() == 0 && m.ncols() == 0 {
        Matrix::zeros(rows, 0)
    } else {
        m
    }
}
