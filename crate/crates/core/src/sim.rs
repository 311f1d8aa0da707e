//! Closed-loop simulation of `u(k) = K x̂(k+d)` with a chosen predictor.
//!
//! Step `k` (for `k = 0..=horizon`):
//!
//! 1. `y(k) = C x(k) + D_w w(k)`;
//! 2. prediction `x̂(k+d)` by the selected method;
//! 3. `u(k) = K x̂(k+d)`;
//! 4. plant update with the delayed input `u(k-d)`;
//! 5. observer update with `(u(k-d), y(k))`.
//!
//! The prediction error of row `k` is `x(k+d) - x̂(k+d)` and is available for
//! `k <= horizon - d`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::disturbance::DisturbanceSignal;
use crate::error::{dim_err, Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::model::{build_augmented, PlantModel};
use crate::observer::{observer_step, ObserverGain, ObserverState};
use crate::predictors::{
    compute_gains, predict_classical, predict_exact_oracle, predict_proposed, GainForm, InputHistory, Method,
    WuWangState,
};

pub const DEFAULT_HORIZON: usize = 200;

/// State norm above which a run is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Fraction of the horizon used for steady-state metrics.
pub const STEADY_FRACTION: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub plant: PlantModel,
    /// Order of the disturbance model (the observer tracks `Δ^0 .. Δ^r`).
    pub r: usize,
    /// State feedback `K` (`m_u × n_p`).
    pub k_gain: Matrix,
    /// Observer gain `L` (`n × m_y`); needed by observer-based methods.
    pub l: Option<Matrix>,
    pub method: Method,
    pub disturbance: DisturbanceSignal,
    pub horizon: usize,
    pub x0: Vector,
    /// Initial input history `u(-d) .. u(-1)`; zero when absent.
    pub theta: Option<Vec<Vector>>,
    /// Initial observer state; `[x0; 0]` when the state is measured, else zero.
    pub etahat0: Option<Vector>,
}

impl SimConfig {
    pub fn new(plant: PlantModel, k_gain: Matrix, x0: Vector, disturbance: DisturbanceSignal) -> Self {
        Self {
            plant,
            r: 0,
            k_gain,
            l: None,
            method: Method::Proposed,
            disturbance,
            horizon: DEFAULT_HORIZON,
            x0,
            theta: None,
            etahat0: None,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_observer(mut self, r: usize, l: Matrix) -> Self {
        self.r = r;
        self.l = Some(l);
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.plant;
        p.validate()?;
        if self.horizon < p.delay {
            return Err(Error::InvalidParameter(format!(
                "horizon {} shorter than the delay {}",
                self.horizon, p.delay
            )));
        }
        if self.k_gain.shape() != (p.m_u(), p.n_p()) {
            return Err(dim_err(
                "K",
                "plant",
                format!("K is {}x{}, expected {}x{}", self.k_gain.nrows(), self.k_gain.ncols(), p.m_u(), p.n_p()),
            ));
        }
        if self.x0.len() != p.n_p() {
            return Err(dim_err("x0", "A", format!("x0 has {} entries, n_p = {}", self.x0.len(), p.n_p())));
        }
        if self.disturbance.dim() != p.q() {
            return Err(dim_err(
                "disturbance",
                "B_w",
                format!("w has {} entries, q = {}", self.disturbance.dim(), p.q()),
            ));
        }
        if let Some(theta) = &self.theta {
            if theta.len() != p.delay || theta.iter().any(|u| u.len() != p.m_u()) {
                return Err(dim_err("theta", "B_u", format!("theta must hold {} vectors of length {}", p.delay, p.m_u())));
            }
        }
        if self.method == Method::Modified && !p.measures_state() {
            return Err(Error::InvalidParameter(
                "the modified predictor needs C = I and D_w = 0".into(),
            ));
        }
        if self.method.uses_observer() {
            let n = p.n_p() + (self.r + 1) * p.q();
            let l = self
                .l
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter(format!("method {} needs an observer gain", self.method)))?;
            if l.shape() != (n, p.m_y()) {
                return Err(dim_err(
                    "L",
                    "augmented model",
                    format!("L is {}x{}, expected {}x{}", l.nrows(), l.ncols(), n, p.m_y()),
                ));
            }
            if let Some(e) = &self.etahat0 {
                if e.len() != n {
                    return Err(dim_err("etahat0", "augmented model", format!("{} entries, n = {n}", e.len())));
                }
            }
        }
        Ok(())
    }
}

/// One simulated instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub x: Vector,
    pub u: Vector,
    pub w: Vector,
    pub y: Vector,
    /// Prediction `x̂(k+d)` made at time `k`.
    pub xhat_future: Vector,
    /// Observer state; empty for methods without an observer.
    pub etahat: Vector,
    /// Output innovation `y - C̄ η̂`; empty without an observer.
    pub e_y: Vector,
    /// `x(k+d) - x̂(k+d)`, once `x(k+d)` is known.
    pub prediction_error: Option<Vector>,
}

impl TraceRow {
    pub fn state_norm(&self) -> f64 {
        self.x.norm()
    }

    pub fn prediction_error_norm(&self) -> Option<f64> {
        self.prediction_error.as_ref().map(|e| e.norm())
    }
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub method: Method,
    pub delay: usize,
    pub horizon: usize,
    pub rows: Vec<TraceRow>,
    /// Set when the state left the finite range; rows stop there.
    pub diverged: bool,
}

pub fn run_closed_loop(config: &SimConfig) -> Result<SimTrace> {
    config.validate()?;
    let plant = &config.plant;
    let d = plant.delay;
    let method = config.method;

    let mut history = match &config.theta {
        Some(theta) => InputHistory::from_theta(theta.clone())?,
        None => InputHistory::zeros(d, plant.m_u()),
    };
    let mut wu = WuWangState::new(d, plant.n_p());

    let observer = if method.uses_observer() {
        let aug = build_augmented(plant, config.r)?;
        let form = if method == Method::Modified { GainForm::Modified } else { GainForm::Standard };
        let gains = compute_gains(plant, config.r, form);
        let gain = ObserverGain::new(config.l.clone().expect("validated"), &aug)?;
        let state = match &config.etahat0 {
            Some(e) => ObserverState { etahat: e.clone(), k: 0 },
            None => ObserverState::initial(&aug, plant.measures_state().then_some(&config.x0))?,
        };
        Some((aug, gains, gain, state))
    } else {
        None
    };
    let mut observer = observer;

    let mut x = config.x0.clone();
    let mut rows = Vec::with_capacity(config.horizon + 1);
    let mut diverged = false;
    for k in 0..=config.horizon {
        let w = config.disturbance.at(k);
        let y = &plant.c * &x + &plant.d_w * &w;
        let xhat = match method {
            Method::Exact => predict_exact_oracle(plant, &x, &history, &config.disturbance.window(k, d))?,
            Method::Classical => predict_classical(plant, &x, &history),
            Method::Proposed | Method::Modified => {
                let (_, gains, _, state) = observer.as_ref().expect("observer built");
                let y_arg = (method == Method::Modified).then_some(&y);
                predict_proposed(gains, &state.etahat, &history, y_arg)?
            }
            Method::Wu1 => wu.step(plant, &x, &history).0,
            Method::Wu2 => wu.step(plant, &x, &history).1,
        };
        let u = &config.k_gain * &xhat;
        let u_delayed = history.delayed().clone();

        let (etahat, e_y) = match &mut observer {
            Some((aug, _, gain, state)) => {
                let e_y = &y - &aug.c * &state.etahat;
                let etahat = state.etahat.clone();
                *state = observer_step(aug, gain, state, &u_delayed, &y)?;
                (etahat, e_y)
            }
            None => (Vector::zeros(0), Vector::zeros(0)),
        };

        let x_next = &plant.a * &x + &plant.b_u * &u_delayed + &plant.b_w * &w;
        history.push(u.clone());
        rows.push(TraceRow {
            k,
            x: x.clone(),
            u,
            w,
            y,
            xhat_future: xhat,
            etahat,
            e_y,
            prediction_error: None,
        });
        if !x_next.iter().all(|v| v.is_finite()) || x_next.norm() > DIVERGENCE_THRESHOLD {
            diverged = true;
            break;
        }
        x = x_next;
    }

    for k in 0..rows.len().saturating_sub(d) {
        let e = &rows[k + d].x - &rows[k].xhat_future;
        rows[k].prediction_error = Some(e);
    }

    Ok(SimTrace {
        method,
        delay: d,
        horizon: config.horizon,
        rows,
        diverged,
    })
}

/// Summary numbers for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub method: Method,
    pub steps: usize,
    pub diverged: bool,
    pub peak_state_norm: f64,
    pub peak_prediction_error: f64,
    /// RMS of `‖x‖` over the last 20% of the rows.
    pub steady_rms_state_norm: f64,
    /// RMS of `‖x(k+d) - x̂(k+d)‖` over the last 20% of the available errors.
    pub steady_rms_prediction_error: f64,
    pub final_prediction_error: f64,
}

fn tail_rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let count = ((values.len() as f64 * STEADY_FRACTION).floor() as usize).max(1);
    let tail = &values[values.len() - count..];
    (tail.iter().map(|v| v * v).sum::<f64>() / count as f64).sqrt()
}

impl SimTrace {
    pub fn states(&self) -> Vec<Vector> {
        self.rows.iter().map(|r| r.x.clone()).collect()
    }

    /// `(k, x(k+d) - x̂(k+d))` for every row where it is known.
    pub fn prediction_errors(&self) -> Vec<(usize, Vector)> {
        self.rows
            .iter()
            .filter_map(|r| r.prediction_error.clone().map(|e| (r.k, e)))
            .collect()
    }

    pub fn prediction_error_norms(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.prediction_error_norm()).collect()
    }

    pub fn metrics(&self) -> SimMetrics {
        let state: Vec<f64> = self.rows.iter().map(|r| r.state_norm()).collect();
        let err = self.prediction_error_norms();
        SimMetrics {
            method: self.method,
            steps: self.rows.len(),
            diverged: self.diverged,
            peak_state_norm: state.iter().cloned().fold(0.0, f64::max),
            peak_prediction_error: err.iter().cloned().fold(0.0, f64::max),
            steady_rms_state_norm: tail_rms(&state),
            steady_rms_prediction_error: tail_rms(&err),
            final_prediction_error: err.last().copied().unwrap_or(f64::NAN),
        }
    }

    /// CSV header, in column order: `k, method, x_i, u_i, w_i, y_i,
    /// xhat_i, etahat_i, ey_i, pred_err_i, state_norm, pred_err_norm`.
    pub fn csv_header(&self) -> Vec<String> {
        let first = self.rows.first();
        let len = |f: fn(&TraceRow) -> usize| first.map(f).unwrap_or(0);
        let mut h = vec!["k".to_string(), "method".to_string()];
        let groups: [(&str, usize); 8] = [
            ("x", len(|r| r.x.len())),
            ("u", len(|r| r.u.len())),
            ("w", len(|r| r.w.len())),
            ("y", len(|r| r.y.len())),
            ("xhat", len(|r| r.xhat_future.len())),
            ("etahat", len(|r| r.etahat.len())),
            ("ey", len(|r| r.e_y.len())),
            ("pred_err", len(|r| r.x.len())),
        ];
        for (name, count) in groups {
            h.extend((0..count).map(|i| format!("{name}_{i}")));
        }
        h.push("state_norm".into());
        h.push("pred_err_norm".into());
        h
    }

    /// Writes the trace as CSV; unknown prediction errors are empty cells.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        let n_p = self.rows.first().map(|r| r.x.len()).unwrap_or(0);
        for r in &self.rows {
            let mut rec = vec![r.k.to_string(), self.method.to_string()];
            for v in [&r.x, &r.u, &r.w, &r.y, &r.xhat_future, &r.etahat, &r.e_y] {
                rec.extend(v.iter().map(|x| crate::fmt_f64(*x)));
            }
            match &r.prediction_error {
                Some(e) => rec.extend(e.iter().map(|x| crate::fmt_f64(*x))),
                None => rec.extend(std::iter::repeat_n(String::new(), n_p)),
            }
            rec.push(crate::fmt_f64(r.state_norm()));
            rec.push(r.prediction_error_norm().map(crate::fmt_f64).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the same experiment once per method.
pub fn run_comparison(config: &SimConfig, methods: &[Method]) -> Result<Vec<SimTrace>> {
    if methods.is_empty() {
        return Err(Error::Usage("no methods selected".into()));
    }
    methods
        .iter()
        .map(|m| run_closed_loop(&config.clone().with_method(*m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disturbance::DisturbanceKind;
    use crate::testing::{example_plant, reference_gain_r0};

    #[allow(clippy::approx_constant)]
    fn config(method: Method) -> SimConfig {
        let plant = example_plant(5);
        let w = DisturbanceSignal::new(DisturbanceKind::Constant(Vector::from_element(1, 1.6))).unwrap();
        SimConfig::new(
            plant,
            Matrix::from_row_slice(1, 2, &[-3.14, 1.5]),
            Vector::from_row_slice(&[1.5, 1.0]),
            w,
        )
        .with_observer(0, reference_gain_r0())
        .with_method(method)
    }

    #[test]
    fn exact_prediction_has_zero_error() {
        let trace = run_closed_loop(&config(Method::Exact)).unwrap();
        assert!(!trace.diverged);
        for (_, e) in trace.prediction_errors() {
            assert!(e.norm() < 1e-9 * (1.0 + trace.metrics().peak_state_norm));
        }
    }

    #[test]
    fn rows_and_errors_line_up() {
        let trace = run_closed_loop(&config(Method::Proposed).with_horizon(30)).unwrap();
        assert_eq!(trace.rows.len(), 31);
        assert_eq!(trace.prediction_errors().len(), 26);
        assert_eq!(trace.rows[0].etahat.len(), 3);
    }

    #[test]
    fn horizon_shorter_than_delay_rejected() {
        assert!(run_closed_loop(&config(Method::Classical).with_horizon(3)).is_err());
    }

    #[test]
    fn missing_observer_gain_rejected() {
        let mut c = config(Method::Proposed);
        c.l = None;
        assert!(matches!(run_closed_loop(&c), Err(Error::InvalidParameter(_))));
        c.method = Method::Classical;
        assert!(run_closed_loop(&c).is_ok());
    }

    #[test]
    fn divergence_is_flagged() {
        let mut c = config(Method::Classical).with_horizon(2000);
        c.k_gain = Matrix::from_row_slice(1, 2, &[10.0, 10.0]);
        let t = run_closed_loop(&c).unwrap();
        assert!(t.diverged);
        assert!(t.rows.len() < 2001);
    }

    #[test]
    fn csv_has_documented_columns() {
        let trace = run_closed_loop(&config(Method::Proposed).with_horizon(10)).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("k,method,x_0,x_1,u_0,w_0,y_0,y_1,xhat_0,xhat_1,etahat_0"));
        assert!(header.ends_with("pred_err_0,pred_err_1,state_norm,pred_err_norm"));
        assert_eq!(text.lines().count(), 12);
    }

    #[test]
    fn comparison_needs_methods() {
        assert!(run_comparison(&config(Method::Proposed), &[]).is_err());
        let runs = run_comparison(&config(Method::Proposed), &[Method::Wu1, Method::Wu2]).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[1].method, Method::Wu2);
    }
}
