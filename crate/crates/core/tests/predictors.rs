mod common;

use common::*;
use delaypred::bounds::truncation_error;
use delaypred::disturbance::{DisturbanceKind, DisturbanceSignal};
use delaypred::observer::true_augmented_state;
use delaypred::predictors::{
    predict_classical, predict_exact_oracle, predict_proposed, predict_wu1, predict_wu2, write_predictions_csv,
    PredictionRecord, WuWangState,
};
use delaypred::prelude::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_minus_classical_is_disturbance_sum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plant = random_plant(&mut rng, 8);
        let d = plant.delay;
        let x = random_vector(&mut rng, plant.n_p(), 2.0);
        let inputs: Vec<Vector> = (0..d).map(|_| random_vector(&mut rng, plant.m_u(), 2.0)).collect();
        let ws: Vec<Vector> = (0..d).map(|_| random_vector(&mut rng, plant.q(), 2.0)).collect();
        let history = InputHistory::from_theta(inputs).unwrap();
        let gap = predict_exact_oracle(&plant, &x, &history, &ws).unwrap() - predict_classical(&plant, &x, &history);
        let mut want = Vector::zeros(plant.n_p());
        let mut power = Matrix::identity(plant.n_p(), plant.n_p());
        for j in 1..=d {
            want += &power * (&plant.b_w * &ws[d - j]);
            power = &plant.a * power;
        }
        prop_assert!(rel_err(&gap, &want) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exact_minus_proposed_is_truncation_error(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plant = random_plant(&mut rng, 7);
        let d = plant.delay;
        let r = rng.gen_range(0..d + 2);
        let aug = build_augmented(&plant, r).unwrap();
        let gains = compute_gains(&plant, r, GainForm::Standard);
        let samples: Vec<Vector> = (0..30).map(|_| random_vector(&mut rng, plant.q(), 1.0)).collect();
        let w = DisturbanceSignal::new(DisturbanceKind::Samples(samples)).unwrap();
        let x = random_vector(&mut rng, plant.n_p(), 1.0);
        let history = InputHistory::from_theta(
            (0..d).map(|_| random_vector(&mut rng, plant.m_u(), 1.0)).collect(),
        ).unwrap();
        let k = rng.gen_range(0..10);
        let eta = true_augmented_state(&aug, &x, &w, k);
        let proposed = predict_proposed(&gains, &eta, &history, None).unwrap();
        let exact = predict_exact_oracle(&plant, &x, &history, &w.window(k, d)).unwrap();
        let diffs = naive_differences(&w.window(k, d.max(r + 1)));
        let e_r = truncation_error(&plant, r, &diffs).unwrap();
        prop_assert!(((exact - proposed) - &e_r).norm() <= 1e-9 * (1.0 + e_r.norm()));
    }

    #[test]
    fn modified_form_matches_standard_when_state_measured(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plant = benchmark_plant();
        let r = rng.gen_range(0..6);
        let standard = compute_gains(&plant, r, GainForm::Standard);
        let modified = compute_gains(&plant, r, GainForm::Modified);
        let etahat = random_vector(&mut rng, 2 + (r + 1), 1.0);
        let history = InputHistory::from_theta((0..5).map(|_| random_vector(&mut rng, 1, 1.0)).collect()).unwrap();
        let y = etahat.rows(0, 2).into_owned();
        let a = predict_proposed(&standard, &etahat, &history, None).unwrap();
        let b = predict_proposed(&modified, &etahat, &history, Some(&y)).unwrap();
        prop_assert!(rel_err(&a, &b) <= 1e-12);
    }
}

#[test]
fn history_is_used_in_delay_order() {
    // Unit inputs at distinct positions identify which A^{j-1} B_u each one meets.
    let plant = PlantModel::new(
        Matrix::from_row_slice(1, 1, &[2.0]),
        Matrix::from_row_slice(1, 1, &[1.0]),
        Matrix::from_row_slice(1, 1, &[0.0]),
        Matrix::identity(1, 1),
        Matrix::zeros(1, 1),
        4,
    )
    .unwrap();
    let mut history = InputHistory::zeros(4, 1);
    for i in 0..4 {
        history.push(Vector::from_element(1, 10f64.powi(i)));
    }
    // u(k-1) = 1000, u(k-2) = 100, u(k-3) = 10, u(k-4) = 1.
    assert_eq!(history.recent(1)[0], 1000.0);
    assert_eq!(history.delayed()[0], 1.0);
    let xp = predict_classical(&plant, &Vector::zeros(1), &history);
    assert_eq!(xp[0], 1000.0 + 2.0 * 100.0 + 4.0 * 10.0 + 8.0 * 1.0);
}

#[test]
fn wu_wang_retention_matches_definition() {
    let plant = benchmark_plant();
    let d = plant.delay;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut state = WuWangState::new(d, 2);
    let mut history = InputHistory::zeros(d, 1);
    let mut xp_log: Vec<Vector> = Vec::new();
    let mut xp1_log: Vec<Vector> = Vec::new();
    for k in 0..30 {
        let x = random_vector(&mut rng, 2, 1.0);
        let (xp1, xp2) = state.step(&plant, &x, &history);
        let zero = Vector::zeros(2);
        let past_xp = if k >= d { &xp_log[k - d] } else { &zero };
        let past_xp1 = if k >= d { &xp1_log[k - d] } else { &zero };
        assert!(rel_err(&xp1, &predict_wu1(&plant, &x, &history, past_xp)) < 1e-14);
        assert!(rel_err(&xp2, &predict_wu2(&plant, &x, &history, past_xp, past_xp1)) < 1e-14);
        xp_log.push(predict_classical(&plant, &x, &history));
        xp1_log.push(xp1);
        history.push(random_vector(&mut rng, 1, 1.0));
    }
}

#[test]
fn prediction_csv_columns() {
    let records = vec![PredictionRecord {
        k: 3,
        xhat_future: Vector::from_row_slice(&[0.1, -2.0]),
        method: Method::Proposed,
    }];
    let mut buf = Vec::new();
    write_predictions_csv(&records, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,method,xhat_0,xhat_1");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "3");
    assert_eq!(row[1], "proposed");
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.1);
}
