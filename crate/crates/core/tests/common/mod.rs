#![allow(dead_code)]

use delaypred::disturbance::{DisturbanceKind, DisturbanceSignal};
use delaypred::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Unstable second-order benchmark plant with a matched disturbance.
pub fn benchmark_plant() -> PlantModel {
    PlantModel::new(
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, 3.2, -1.4]),
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        Matrix::identity(2, 2),
        Matrix::zeros(2, 1),
        5,
    )
    .unwrap()
}

#[allow(clippy::approx_constant)]
pub fn benchmark_feedback() -> Matrix {
    Matrix::from_row_slice(1, 2, &[-3.14, 1.5])
}

pub fn benchmark_x0() -> Vector {
    Vector::from_row_slice(&[1.5, 1.0])
}

/// Reference observer gain for `r = 0` (3x2).
pub fn reference_gain_r0() -> Matrix {
    Matrix::from_row_slice(2, 3, &[-0.3899, 3.2000, -0.0000, 1.0000, -0.7314, 0.8621]).transpose()
}

/// Reference observer gain for `r = 4` (7x2).
pub fn reference_gain_r4() -> Matrix {
    Matrix::from_row_slice(
        2,
        7,
        &[
            -0.3901, 3.1998, -0.0005, -0.0006, -0.0005, -0.0003, -0.0001, //
            1.0000, 1.6621, 7.8420, 8.5803, 5.5770, 2.0116, 0.3137,
        ],
    )
    .transpose()
}

pub fn constant(v: f64) -> DisturbanceSignal {
    DisturbanceSignal::new(DisturbanceKind::Constant(Vector::from_element(1, v))).unwrap()
}

pub fn sinusoid() -> DisturbanceSignal {
    DisturbanceSignal::new(DisturbanceKind::Sinusoid {
        amplitude: Vector::from_element(1, 0.6),
        rate: 1.35 / (2.0 * std::f64::consts::PI),
        phase: 0.0,
    })
    .unwrap()
}

pub fn ramp(offset: f64, slope: f64) -> DisturbanceSignal {
    DisturbanceSignal::new(DisturbanceKind::Polynomial(vec![
        Vector::from_element(1, offset),
        Vector::from_element(1, slope),
    ]))
    .unwrap()
}

pub fn benchmark_config(method: Method, r: usize, l: Matrix, w: DisturbanceSignal) -> SimConfig {
    SimConfig::new(benchmark_plant(), benchmark_feedback(), benchmark_x0(), w)
        .with_observer(r, l)
        .with_method(method)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
}

pub fn random_vector(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vector {
    Vector::from_fn(len, |_, _| rng.gen_range(-scale..scale))
}

/// Random plant with `n_p <= 4`, `m_u, q <= 2`, `m_y <= 3`, `d <= max_delay`.
pub fn random_plant(rng: &mut ChaCha8Rng, max_delay: usize) -> PlantModel {
    let n_p = rng.gen_range(1..=4);
    let m_u = rng.gen_range(1..=2);
    let q = rng.gen_range(1..=2);
    let m_y = rng.gen_range(1..=3);
    let d = rng.gen_range(1..=max_delay);
    PlantModel::new(
        random_matrix(rng, n_p, n_p, 1.0),
        random_matrix(rng, n_p, m_u, 1.0),
        random_matrix(rng, n_p, q, 1.0),
        random_matrix(rng, m_y, n_p, 1.0),
        random_matrix(rng, m_y, q, 1.0),
        d,
    )
    .unwrap()
}

/// `‖a - b‖ / max(1, ‖b‖)`.
pub fn rel_err(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// `d`-step recursion of `x(k+1) = A x + B_u u(k-d) + B_w w(k)`, given
/// `u(k-d), ..., u(k-1)` and `w(k), ..., w(k+d-1)`.
pub fn recurse_forward(plant: &PlantModel, x: &Vector, inputs: &[Vector], ws: &[Vector]) -> Vector {
    let mut x = x.clone();
    for i in 0..plant.delay {
        x = &plant.a * &x + &plant.b_u * &inputs[i] + &plant.b_w * &ws[i];
    }
    x
}

/// Forward differences by the textbook recursion, independent of the
/// library: returns `Δ^0 s(0), ..., Δ^{len-1} s(0)`.
pub fn naive_differences(samples: &[Vector]) -> Vec<Vector> {
    let mut level = samples.to_vec();
    let mut out = Vec::new();
    while !level.is_empty() {
        out.push(level[0].clone());
        level = level.windows(2).map(|p| &p[1] - &p[0]).collect();
    }
    out
}

pub fn binomial(s: usize, m: usize) -> f64 {
    if m > s {
        return 0.0;
    }
    (0..m).fold(1.0, |acc, i| acc * (s - i) as f64 / (i + 1) as f64)
}

/// Minimum-`γ̄` design for the benchmark plant with eigenvalues in the band
/// `0 < Re λ < 1`, using the output-injected prediction form.
pub fn benchmark_design(r: usize) -> (AugmentedModel, PredictorGains, DesignCertificate) {
    let plant = benchmark_plant();
    let aug = build_augmented(&plant, r).unwrap();
    let gains = compute_gains(&plant, r, GainForm::Modified);
    let mut problem = assemble_theorem1(&aug, &gains).unwrap();
    problem.add_dstability(&aug, 1.0, 0.0).unwrap();
    let cert = solve_design(&problem, true).unwrap();
    (aug, gains, cert)
}

/// Smallest certified `γ̄` for a given gain on the benchmark plant.
pub fn benchmark_certify(r: usize, l: &Matrix) -> (AugmentedModel, PredictorGains, DesignCertificate) {
    let plant = benchmark_plant();
    let aug = build_augmented(&plant, r).unwrap();
    let gains = compute_gains(&plant, r, GainForm::Modified);
    let problem = assemble_theorem1_fixed_gain(&aug, &gains, l).unwrap();
    let cert = solve_design(&problem, true).unwrap();
    (aug, gains, cert)
}
