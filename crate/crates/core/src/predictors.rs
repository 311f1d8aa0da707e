//! Prediction laws for `x(k+d)`.
//!
//! | method      | uses                                   |
//! |-------------|----------------------------------------|
//! | `exact`     | `x(k)` and future `w(k..k+d-1)` (oracle) |
//! | `classical` | `x(k)`, ignores the disturbance         |
//! | `proposed`  | observer state `η̂(k)`                  |
//! | `modified`  | `y(k) = x(k)` plus `η̂(k)`               |
//! | `wu1`/`wu2` | `x(k)` plus retained past predictions   |

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::finite::binomial_f64;
use crate::linalg::{matrix_powers, Matrix, Vector};
use crate::model::PlantModel;

/// Prediction method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Classical,
    Proposed,
    Modified,
    Wu1,
    Wu2,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Exact,
        Method::Classical,
        Method::Proposed,
        Method::Modified,
        Method::Wu1,
        Method::Wu2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Classical => "classical",
            Method::Proposed => "proposed",
            Method::Modified => "modified",
            Method::Wu1 => "wu1",
            Method::Wu2 => "wu2",
        }
    }

    /// Whether the method reads the observer state.
    pub fn uses_observer(self) -> bool {
        matches!(self, Method::Proposed | Method::Modified)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown prediction method `{s}`")))
    }
}

/// Fixed-length FIFO of vectors, zero-filled on creation. Pushing returns the
/// value that was `len` pushes old.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    buf: VecDeque<Vector>,
}

impl DelayLine {
    pub fn zeros(len: usize, dim: usize) -> Self {
        Self {
            buf: std::iter::repeat_n(Vector::zeros(dim), len).collect(),
        }
    }

    /// Oldest value, the one the next push evicts.
    pub fn oldest(&self) -> &Vector {
        self.buf.front().expect("delay line has positive length")
    }

    pub fn push(&mut self, v: Vector) -> Vector {
        self.buf.push_back(v);
        self.buf.pop_front().expect("delay line has positive length")
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}

/// The last `d` applied inputs `u(k-1), ..., u(k-d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputHistory {
    // front = u(k-d), back = u(k-1)
    buf: VecDeque<Vector>,
    k: i64,
}

impl InputHistory {
    /// Zero initial history `θ(k) = 0`.
    pub fn zeros(delay: usize, m_u: usize) -> Self {
        Self {
            buf: std::iter::repeat_n(Vector::zeros(m_u), delay).collect(),
            k: 0,
        }
    }

    /// History from `θ(-d), ..., θ(-1)` in time order.
    pub fn from_theta(theta: Vec<Vector>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidParameter("initial input history must be non-empty".into()));
        }
        let m = theta[0].len();
        if theta.iter().any(|v| v.len() != m) {
            return Err(dim_err("theta", "theta", "initial inputs differ in dimension"));
        }
        Ok(Self {
            buf: theta.into(),
            k: 0,
        })
    }

    pub fn delay(&self) -> usize {
        self.buf.len()
    }

    /// Current time index `k`.
    pub fn k(&self) -> i64 {
        self.k
    }

    /// `u(k-j)` for `1 <= j <= d`.
    pub fn recent(&self, j: usize) -> &Vector {
        assert!(j >= 1 && j <= self.buf.len(), "lag {j} outside 1..=d");
        &self.buf[self.buf.len() - j]
    }

    /// `u(k-d)`, the input reaching the plant at time `k`.
    pub fn delayed(&self) -> &Vector {
        self.recent(self.buf.len())
    }

    /// Records `u(k)` and advances to `k+1`; returns `u(k-d)`.
    pub fn push(&mut self, u: Vector) -> Vector {
        self.buf.push_back(u);
        self.k += 1;
        self.buf.pop_front().expect("history has positive length")
    }
}

/// Standard `Γ = [A^d T]` or modified `Γ = [0 T]` prediction gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainForm {
    Standard,
    Modified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorGains {
    pub gamma: Matrix,
    pub t: Matrix,
    pub form: GainForm,
    /// `A^d`.
    pub a_pow_d: Matrix,
    /// `A^{j-1} B_u` for `j = 1..=d`.
    input_terms: Vec<Matrix>,
}

impl PredictorGains {
    /// `Σ_{j=1}^{d} A^{j-1} B_u u(k-j)`.
    pub fn input_contribution(&self, history: &InputHistory) -> Vector {
        let mut out = Vector::zeros(self.a_pow_d.nrows());
        for (idx, term) in self.input_terms.iter().enumerate() {
            out.gemv(1.0, term, history.recent(idx + 1), 1.0);
        }
        out
    }

    pub fn delay(&self) -> usize {
        self.input_terms.len()
    }
}

/// Builds `T(d) = Σ_j A^{j-1} B_w [C(d-j,0) I, ..., C(d-j,r) I]` and `Γ(d)`.
pub fn compute_gains(plant: &PlantModel, r: usize, form: GainForm) -> PredictorGains {
    let d = plant.delay;
    let n_p = plant.n_p();
    let q = plant.q();
    let powers = matrix_powers(&plant.a, d);
    let mut t = Matrix::zeros(n_p, (r + 1) * q);
    for j in 1..=d {
        let aw = &powers[j - 1] * &plant.b_w;
        for m in 0..=r {
            let c = binomial_f64(d - j, m);
            if c != 0.0 {
                let mut block = t.view_mut((0, m * q), (n_p, q));
                block += &aw * c;
            }
        }
    }
    let mut gamma = Matrix::zeros(n_p, n_p + (r + 1) * q);
    if form == GainForm::Standard {
        gamma.view_mut((0, 0), (n_p, n_p)).copy_from(&powers[d]);
    }
    gamma.view_mut((0, n_p), (n_p, (r + 1) * q)).copy_from(&t);
    let input_terms = powers[..d].iter().map(|p| p * &plant.b_u).collect();
    PredictorGains {
        gamma,
        t,
        form,
        a_pow_d: powers[d].clone(),
        input_terms,
    }
}

fn classical_sum(plant: &PlantModel, x_k: &Vector, history: &InputHistory) -> Vector {
    // Horner form of A^d x + Σ_j A^{j-1} B_u u(k-j): iterate the
    // undisturbed plant forward d steps.
    let mut x = x_k.clone();
    for j in (1..=plant.delay).rev() {
        x = &plant.a * x + &plant.b_u * history.recent(j);
    }
    x
}

/// Exact `x(k+d)` from the current state, the input history and the future
/// disturbance window `w(k), ..., w(k+d-1)`. Not causal; for testing and
/// benchmarking only.
pub fn predict_exact_oracle(
    plant: &PlantModel,
    x_k: &Vector,
    history: &InputHistory,
    future_w: &[Vector],
) -> Result<Vector> {
    let d = plant.delay;
    if future_w.len() < d {
        return Err(Error::OutOfRange(format!(
            "exact prediction needs {d} future disturbance samples, got {}",
            future_w.len()
        )));
    }
    let powers = matrix_powers(&plant.a, d);
    let mut out = &powers[d] * x_k;
    for j in 1..=d {
        out += &powers[j - 1] * (&plant.b_u * history.recent(j));
        out += &powers[j - 1] * (&plant.b_w * &future_w[d - j]);
    }
    Ok(out)
}

/// `x_p(k) = A^d x(k) + Σ A^{j-1} B_u u(k-j)`.
pub fn predict_classical(plant: &PlantModel, x_k: &Vector, history: &InputHistory) -> Vector {
    classical_sum(plant, x_k, history)
}

/// Observer-based prediction. The standard form takes no output; the
/// modified form needs `y(k)` (valid when `y = x`).
pub fn predict_proposed(
    gains: &PredictorGains,
    etahat: &Vector,
    history: &InputHistory,
    y_k: Option<&Vector>,
) -> Result<Vector> {
    if etahat.len() != gains.gamma.ncols() {
        return Err(dim_err(
            "Gamma",
            "etahat",
            format!("Gamma has {} columns, etahat has {}", gains.gamma.ncols(), etahat.len()),
        ));
    }
    if history.delay() != gains.delay() {
        return Err(dim_err(
            "gains",
            "history",
            format!("gains built for d={}, history has {}", gains.delay(), history.delay()),
        ));
    }
    let mut out = &gains.gamma * etahat + gains.input_contribution(history);
    match (gains.form, y_k) {
        (GainForm::Standard, None) => {}
        (GainForm::Modified, Some(y)) => {
            if y.len() != gains.a_pow_d.ncols() {
                return Err(dim_err("A^d", "y", "modified form needs y(k) = x(k)"));
            }
            out += &gains.a_pow_d * y;
        }
        (GainForm::Standard, Some(_)) => {
            return Err(Error::Usage("standard-form prediction does not take y(k)".into()))
        }
        (GainForm::Modified, None) => {
            return Err(Error::Usage("modified-form prediction requires y(k)".into()))
        }
    }
    Ok(out)
}

/// `x_p1(k) = x_p(k) + x(k) - x_p(k-d)`.
pub fn predict_wu1(
    plant: &PlantModel,
    x_k: &Vector,
    history: &InputHistory,
    past_xp: &Vector,
) -> Vector {
    predict_classical(plant, x_k, history) + x_k - past_xp
}

/// `x_p2(k) = x_p1(k) + x(k) - x_p1(k-d)`; `x_p1(k)` itself needs `x_p(k-d)`.
pub fn predict_wu2(
    plant: &PlantModel,
    x_k: &Vector,
    history: &InputHistory,
    past_xp: &Vector,
    past_xp1: &Vector,
) -> Vector {
    predict_wu1(plant, x_k, history, past_xp) + x_k - past_xp1
}

/// Retains `x_p` and `x_p1` for `d` steps to drive the Wu–Wang corrections.
/// Values before `k = 0` are zero.
#[derive(Debug, Clone)]
pub struct WuWangState {
    xp: DelayLine,
    xp1: DelayLine,
}

impl WuWangState {
    pub fn new(delay: usize, n_p: usize) -> Self {
        Self {
            xp: DelayLine::zeros(delay, n_p),
            xp1: DelayLine::zeros(delay, n_p),
        }
    }

    /// Computes `(x_p1(k), x_p2(k))` and retains the step's values.
    pub fn step(&mut self, plant: &PlantModel, x_k: &Vector, history: &InputHistory) -> (Vector, Vector) {
        let xp = predict_classical(plant, x_k, history);
        let xp1 = &xp + x_k - self.xp.oldest();
        let xp2 = &xp1 + x_k - self.xp1.oldest();
        self.xp.push(xp);
        self.xp1.push(xp1.clone());
        (xp1, xp2)
    }
}

/// One emitted prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub k: i64,
    pub xhat_future: Vector,
    pub method: Method,
}

/// Writes records as CSV with columns `k, method, xhat_0, ..., xhat_{n-1}`.
pub fn write_predictions_csv<W: Write>(records: &[PredictionRecord], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let width = records.first().map_or(0, |r| r.xhat_future.len());
    let mut header = vec!["k".to_string(), "method".to_string()];
    header.extend((0..width).map(|i| format!("xhat_{i}")));
    wtr.write_record(&header)?;
    for rec in records {
        let mut row = vec![rec.k.to_string(), rec.method.to_string()];
        row.extend(rec.xhat_future.iter().map(|v| crate::fmt_f64(*v)));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::example_plant;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn history_order_and_eviction() {
        let mut h = InputHistory::zeros(3, 1);
        for i in 1..=3 {
            h.push(v(&[i as f64]));
        }
        // u(k-1) = 3, u(k-2) = 2, u(k-3) = 1
        assert_eq!(h.recent(1)[0], 3.0);
        assert_eq!(h.recent(3)[0], 1.0);
        assert_eq!(h.delayed()[0], 1.0);
        assert_eq!(h.push(v(&[4.0]))[0], 1.0);
        assert_eq!(h.k(), 4);
        assert_eq!(h.delay(), 3);
    }

    #[test]
    fn classical_uses_inputs_in_order() {
        // Distinguishable unit inputs in different channels.
        let plant = PlantModel::new(
            Matrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 2.0]),
            Matrix::identity(2, 2),
            Matrix::zeros(2, 1),
            Matrix::identity(2, 2),
            Matrix::zeros(2, 1),
            2,
        )
        .unwrap();
        let mut h = InputHistory::zeros(2, 2);
        h.push(v(&[1.0, 0.0])); // u(k-2)
        h.push(v(&[0.0, 1.0])); // u(k-1)
        let got = predict_classical(&plant, &v(&[0.0, 0.0]), &h);
        // A u(k-2) + u(k-1) = [0.5, 0] + [0, 1]
        assert_eq!(got, v(&[0.5, 1.0]));
    }

    #[test]
    fn gains_for_unit_delay() {
        let plant = example_plant(1);
        let g = compute_gains(&plant, 3, GainForm::Standard);
        let mut want_t = Matrix::zeros(2, 4);
        want_t.view_mut((0, 0), (2, 1)).copy_from(&plant.b_w);
        assert_eq!(g.t, want_t);
        assert_eq!(g.gamma.view((0, 0), (2, 2)), plant.a.view((0, 0), (2, 2)));
        assert_eq!(g.gamma.view((0, 2), (2, 4)), want_t.view((0, 0), (2, 4)));
    }

    #[test]
    fn gains_d5_r0_direct_sum() {
        let plant = example_plant(5);
        let g = compute_gains(&plant, 0, GainForm::Standard);
        let mut want = Matrix::zeros(2, 1);
        let mut p = Matrix::identity(2, 2);
        for _ in 0..5 {
            want += &p * &plant.b_w;
            p = &p * &plant.a;
        }
        assert!((g.t - want).norm() < 1e-12);
    }

    #[test]
    fn modified_form_has_zero_state_block() {
        let plant = example_plant(5);
        let g = compute_gains(&plant, 2, GainForm::Modified);
        assert!(g.gamma.view((0, 0), (2, 2)).iter().all(|x| *x == 0.0));
        assert_eq!(g.gamma.view((0, 2), (2, 3)), g.t.view((0, 0), (2, 3)));
    }

    #[test]
    fn exact_oracle_simple_cases() {
        let plant = example_plant(1);
        let mut h = InputHistory::zeros(1, 1);
        h.push(v(&[0.7]));
        let x = v(&[1.0, -2.0]);
        let got = predict_exact_oracle(&plant, &x, &h, &[v(&[0.3])]).unwrap();
        let want = &plant.a * &x + &plant.b_u * v(&[0.7]) + &plant.b_w * v(&[0.3]);
        assert!((got - want).norm() < 1e-15);

        let plant5 = example_plant(5);
        let h0 = InputHistory::zeros(5, 1);
        let zero = predict_exact_oracle(&plant5, &v(&[0.0, 0.0]), &h0, &vec![v(&[0.0]); 5]).unwrap();
        assert_eq!(zero.norm(), 0.0);
        assert!(predict_exact_oracle(&plant5, &x, &h0, &vec![v(&[0.0]); 4]).is_err());
    }

    #[test]
    fn classical_equals_exact_without_disturbance() {
        let plant = example_plant(4);
        let mut h = InputHistory::zeros(4, 1);
        for u in [0.1, -0.4, 0.9, 0.2] {
            h.push(v(&[u]));
        }
        let x = v(&[0.3, 0.8]);
        let exact = predict_exact_oracle(&plant, &x, &h, &vec![v(&[0.0]); 4]).unwrap();
        let classical = predict_classical(&plant, &x, &h);
        assert!((exact - &classical).norm() <= 1e-12 * classical.norm());
        assert_eq!(predict_classical(&plant, &v(&[0.0, 0.0]), &InputHistory::zeros(4, 1)).norm(), 0.0);
    }

    #[test]
    fn proposed_form_mismatch_is_usage_error() {
        let plant = example_plant(2);
        let h = InputHistory::zeros(2, 1);
        let std = compute_gains(&plant, 0, GainForm::Standard);
        let modi = compute_gains(&plant, 0, GainForm::Modified);
        let eta = Vector::zeros(3);
        let y = Vector::zeros(2);
        assert!(matches!(predict_proposed(&std, &eta, &h, Some(&y)), Err(Error::Usage(_))));
        assert!(matches!(predict_proposed(&modi, &eta, &h, None), Err(Error::Usage(_))));
        assert_eq!(predict_proposed(&modi, &eta, &h, Some(&y)).unwrap().norm(), 0.0);
        assert_eq!(predict_proposed(&std, &eta, &h, None).unwrap().norm(), 0.0);
        assert!(predict_proposed(&std, &Vector::zeros(4), &h, None).is_err());
    }

    #[test]
    fn wu_startup_convention() {
        let plant = example_plant(3);
        let h = InputHistory::zeros(3, 1);
        let x = v(&[1.5, 1.0]);
        let mut st = WuWangState::new(3, 2);
        let (p1, p2) = st.step(&plant, &x, &h);
        let xp = predict_classical(&plant, &x, &h);
        assert_eq!(p1, &xp + &x);
        assert_eq!(p2, &p1 + &x);
        assert_eq!(predict_wu1(&plant, &x, &h, &Vector::zeros(2)), p1);
        assert_eq!(predict_wu2(&plant, &x, &h, &Vector::zeros(2), &Vector::zeros(2)), p2);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("wu2".parse::<Method>().unwrap(), Method::Wu2);
        assert_eq!(" Proposed ".parse::<Method>().unwrap(), Method::Proposed);
        assert!("smith".parse::<Method>().is_err());
    }

    #[test]
    fn prediction_csv_columns() {
        let recs = vec![PredictionRecord {
            k: 3,
            xhat_future: v(&[0.1, 2.0]),
            method: Method::Modified,
        }];
        let mut buf = Vec::new();
        write_predictions_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k,method,xhat_0,xhat_1");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "3");
        assert_eq!(row[1], "modified");
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.1);
    }
}
