mod common;

use common::{affine_transducer, default_transducer, max_abs, random_dataset};
use ftcal::data::{Dataset, RawSample, Wrench};
use ftcal::features::Column;
use ftcal::metrics::{best_fit, evaluate, report, rmse, EvalReport};
use ftcal::model::{CalibrationModel, FitOptions, History, ModelSpec, EFFECTIVE_THRESHOLD};
use ftcal::Error;

fn options() -> FitOptions {
    FitOptions {
        record_time: false,
        ..FitOptions::default()
    }
}

/// Prediction rebuilt from raw-unit coefficients and power products.
fn oracle_predict(model: &CalibrationModel, input: &[f64]) -> Vec<f64> {
    model
        .original_coefficients()
        .iter()
        .map(|x| {
            model
                .layout()
                .columns()
                .iter()
                .zip(x.iter())
                .map(|(column, c)| match column {
                    Column::Constant => *c,
                    Column::Input { lag: 0, monomial } => {
                        c * monomial
                            .exponents()
                            .iter()
                            .zip(input)
                            .map(|(&e, &v)| v.powi(e as i32))
                            .product::<f64>()
                    }
                    other => panic!("static model has {other:?}"),
                })
                .sum()
        })
        .collect()
}

#[test]
fn prediction_matches_term_by_term_oracle() {
    let t = default_transducer();
    let train = random_dataset(&t, 400, 1);
    let model = CalibrationModel::fit_dataset(&ModelSpec::new(2, 7, 6), &train, &options()).unwrap();
    let val = random_dataset(&t, 50, 2);
    for sample in val.samples() {
        let input = sample.to_input(7).unwrap();
        let got = model.predict(&input, None).unwrap();
        let expected = oracle_predict(&model, &input);
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() <= 1e-7 * (1.0 + e.abs()), "{g} vs {e}");
        }
    }
}

#[test]
fn noiseless_affine_data_is_fit_exactly() {
    let t = affine_transducer();
    let train = random_dataset(&t, 300, 3);
    let model = CalibrationModel::fit_dataset(&ModelSpec::new(1, 6, 6), &train, &options()).unwrap();
    let val = random_dataset(&t, 200, 4);
    let r = evaluate(&model, &val).unwrap();
    assert!(max_abs(r.channel_rmse.iter().copied()) <= 1e-6);
    assert!(r.channel_best_fit.iter().all(|b| b.unwrap() > 0.99));
}

#[test]
fn arx_recovers_a_first_order_system() {
    // y(k) = 0.5·y(k-1) + 2·u(k) − u(k-1)
    let u: Vec<Vec<f64>> = (0..80).map(|k| vec![((k * 37) % 11) as f64 - 5.0]).collect();
    let mut y = vec![vec![0.0]];
    for k in 1..u.len() {
        y.push(vec![0.5 * y[k - 1][0] + 2.0 * u[k][0] - u[k - 1][0]]);
    }
    let spec = ModelSpec::new(1, 1, 1).with_lags(1, 1);
    let model = CalibrationModel::fit(&spec, &u, &y, &options()).unwrap();
    let raw = &model.original_coefficients()[0];
    let expected = [0.0, 2.0, -1.0, 0.5];
    for (c, e) in raw.iter().zip(expected) {
        assert!((c - e).abs() < 1e-9, "{raw:?}");
    }
    let history = History {
        inputs: vec![u[9].clone()],
        outputs: vec![y[9].clone()],
    };
    let next = model.predict(&u[10], Some(&history)).unwrap();
    assert!((next[0] - y[10][0]).abs() < 1e-8);
    assert!(matches!(
        model.predict(&u[10], None),
        Err(Error::InsufficientHistory { needed: 1, got: 0 })
    ));
}

#[test]
fn pruning_at_the_effective_threshold_changes_nothing_visible() {
    let t = default_transducer();
    let train = random_dataset(&t, 600, 5);
    let spec = ModelSpec::new(3, 7, 6).with_lambda(10.0);
    let model = CalibrationModel::fit_dataset(&spec, &train, &options()).unwrap();
    let pruned = model.prune(EFFECTIVE_THRESHOLD);
    assert_eq!(pruned.count_effective(EFFECTIVE_THRESHOLD), model.count_effective(EFFECTIVE_THRESHOLD));
    assert!(model.count_effective(EFFECTIVE_THRESHOLD) < model.total_coefficients());
    let val = random_dataset(&t, 100, 6);
    let (_, a) = model.predict_dataset(&val).unwrap();
    let (_, b) = pruned.predict_dataset(&val).unwrap();
    for (p, q) in a.iter().zip(&b) {
        let d = max_abs(p.to_array().iter().zip(q.to_array()).map(|(x, y)| x - y));
        assert!(d <= 1e-6);
    }
    let listing = pruned.inspect(EFFECTIVE_THRESHOLD);
    assert_eq!(listing.len(), pruned.count_effective(EFFECTIVE_THRESHOLD));
    assert!(listing.windows(2).all(|w| w[0].normalized.abs() >= w[1].normalized.abs()));
}

#[test]
fn fitted_models_round_trip_bit_exact() {
    let t = default_transducer();
    let train = random_dataset(&t, 300, 7);
    for spec in [
        ModelSpec::new(2, 7, 6),
        ModelSpec::new(2, 6, 6).with_lambda(5.0),
        ModelSpec::new(1, 7, 6).with_lags(1, 2),
    ] {
        let model = CalibrationModel::fit_dataset(&spec, &train, &FitOptions::default()).unwrap();
        let text = model.to_json();
        let back = CalibrationModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json(), text);
        for (x, y) in back.coefficients().iter().zip(model.coefficients()) {
            assert!(x.iter().zip(y.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}

#[test]
fn temperature_free_datasets_reject_seven_input_models() {
    let samples = vec![RawSample::new([1.0; 6], None); 4];
    let wrenches = vec![Wrench::new([0.0; 3], [0.0; 3]); 4];
    let d = Dataset::new(samples, wrenches, None).unwrap();
    assert!(matches!(
        CalibrationModel::fit_dataset(&ModelSpec::new(1, 7, 6), &d, &options()),
        Err(Error::Schema(c)) if c == "temp"
    ));
}

#[test]
fn metric_hand_values() {
    assert_eq!(rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5f64.sqrt());
    assert_eq!(best_fit(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 0.0);
    assert!(matches!(best_fit(&[1.0; 3], &[0.0; 3]), Err(Error::UndefinedMetric(_))));
}

#[test]
fn report_matches_independent_recompute() {
    let t = default_transducer();
    let train = random_dataset(&t, 300, 8);
    let model = CalibrationModel::fit_dataset(&ModelSpec::new(2, 7, 6), &train, &options()).unwrap();
    let val = random_dataset(&t, 120, 9);
    let r: EvalReport = evaluate(&model, &val).unwrap();

    let predicted: Vec<[f64; 6]> = val
        .samples()
        .iter()
        .map(|s| {
            let y = oracle_predict(&model, &s.to_input(7).unwrap());
            std::array::from_fn(|i| y[i])
        })
        .collect();
    let expected: Vec<[f64; 6]> = val.wrenches().iter().map(|w| w.to_array()).collect();
    let n = expected.len() as f64;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let force_rmse = (expected
        .iter()
        .zip(&predicted)
        .map(|(e, p)| (norm(&e[..3]) - norm(&p[..3])).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let torque_max = expected
        .iter()
        .zip(&predicted)
        .map(|(e, p)| (norm(&e[3..]) - norm(&p[3..])).abs())
        .fold(0.0, f64::max);
    assert!((r.force_norm_rmse - force_rmse).abs() <= 1e-9 * force_rmse);
    assert!((r.max_torque_norm_error - torque_max).abs() <= 1e-9 * torque_max.max(1e-12));
    for c in 0..6 {
        let mse = expected.iter().zip(&predicted).map(|(e, p)| (e[c] - p[c]).powi(2)).sum::<f64>() / n;
        assert!((r.channel_rmse[c] - mse.sqrt()).abs() <= 1e-9 * mse.sqrt());
        let mean = expected.iter().map(|e| e[c]).sum::<f64>() / n;
        let var = expected.iter().map(|e| (e[c] - mean).powi(2)).sum::<f64>() / n;
        let bf = 1.0 - (mse / var).sqrt();
        assert!((r.channel_best_fit[c].unwrap() - bf).abs() <= 1e-9);
    }
    assert_eq!(r.total_coefficients, 6 * 36);
    assert_eq!(r.samples, 120);

    let direct = report(val.wrenches(), &model.predict_dataset(&val).unwrap().1, 0, 0).unwrap();
    assert_eq!(direct.channel_rmse, r.channel_rmse);
}
