//! Dynamic (ARX) model: the current output depends on past outputs and on
//! current and past inputs. Identifies a sensor whose reading lags the
//! load through a first-order filter.

use ftcal::model::{CalibrationModel, FitOptions, History, ModelSpec};

fn main() -> ftcal::Result<()> {
    // y(k) = 0.8·y(k-1) + 0.3·u(k) − 0.1·u(k-1) + 0.05·u(k)²
    let u: Vec<Vec<f64>> = (0..400)
        .map(|k| vec![(k as f64 * 0.13).sin() + 0.5 * (k as f64 * 0.031).cos()])
        .collect();
    let mut y = vec![vec![0.0]];
    for k in 1..u.len() {
        let (uk, up) = (u[k][0], u[k - 1][0]);
        y.push(vec![0.8 * y[k - 1][0] + 0.3 * uk - 0.1 * up + 0.05 * uk * uk]);
    }

    let spec = ModelSpec::new(2, 1, 1).with_lags(1, 1);
    let model = CalibrationModel::fit(&spec, &u, &y, &FitOptions::default())?;
    let raw = &model.original_coefficients()[0];
    for (j, c) in raw.iter().enumerate() {
        println!("{:<10} {:>10.6}", model.term_name(j), c);
    }

    // One-step-ahead prediction needs the previous sample.
    let history = History {
        inputs: vec![u[199].clone()],
        outputs: vec![y[199].clone()],
    };
    let next = model.predict(&u[200], Some(&history))?;
    println!("\npredicted y(200) = {:.9}, actual {:.9}", next[0], y[200][0]);
    Ok(())
}
