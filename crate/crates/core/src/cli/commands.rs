use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{EvalArgs, FitArgs, InspectArgs, PredictArgs, ReportFormat, SimulateArgs, TrajectoryKind};
use crate::data::{
    grid_trajectory, lifting_trajectory, load_dataset, random_trajectory, simulate, split_dataset,
    write_dataset, write_wrenches, Dataset, DatasetMetadata, GridTrajectory, GroundTruthTransducer,
    LiftingTrajectory, TransducerConfig,
};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, EvalReport};
use crate::model::{CalibrationModel, FitOptions};

/// Opens `path` for writing, or stdout when absent.
pub(super) fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub(super) fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<()> {
    w.flush()
        .map_err(|e| Error::io(path.unwrap_or(Path::new("<stdout>")), e))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut w = output(path)?;
    w.write_all(text.as_bytes())
        .map_err(|e| Error::io(path.unwrap_or(Path::new("<stdout>")), e))?;
    finish(w, path)
}

/// Training and validation sets named by `--train/--val` or `--data/--split`.
pub(super) fn training_data(args: &FitArgs) -> Result<(Dataset, Option<Dataset>)> {
    match (&args.train, &args.data) {
        (Some(train), _) => {
            let val = args.val.as_ref().map(load_dataset).transpose()?;
            Ok((load_dataset(train)?, val))
        }
        (None, Some(data)) => {
            let all = load_dataset(data)?;
            match args.split {
                Some(fraction) => {
                    let (t, v) = split_dataset(&all, fraction, args.split_mode())?;
                    Ok((t, Some(v)))
                }
                None => {
                    let val = args.val.as_ref().map(load_dataset).transpose()?;
                    Ok((all, val))
                }
            }
        }
        (None, None) => Err(Error::InvalidSpec("fit needs --train or --data".into())),
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    model: &'a Path,
    training: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<EvalReport>,
}

pub(super) fn cmd_fit(args: &FitArgs) -> Result<()> {
    let spec = args.spec.spec()?;
    let (train, val) = training_data(args)?;
    let options = FitOptions {
        record_time: !args.deterministic,
        ..FitOptions::default()
    };
    let mut model = CalibrationModel::fit_dataset(&spec, &train, &options)?;
    for w in &model.metadata.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(threshold) = args.prune {
        let metadata = model.metadata.clone();
        model = model.prune(threshold);
        model.metadata = metadata;
    }
    let out: PathBuf = args.out.clone().expect("validated");
    model.save(&out)?;

    let report = FitReport {
        model: &out,
        training: evaluate(&model, &train)?,
        validation: val.as_ref().map(|v| evaluate(&model, v)).transpose()?,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_text(None, &text)
}

pub(super) fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let model = CalibrationModel::load(&args.model)?;
    let data = load_dataset(&args.data)?;
    let report = evaluate(&model, &data)?;
    let text = match args.format {
        ReportFormat::Json => report.to_json() + "\n",
        ReportFormat::Csv => format!("{}\n{}\n", EvalReport::CSV_HEADER, report.csv_row()),
    };
    write_text(args.out.as_deref(), &text)
}

pub(super) fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = CalibrationModel::load(&args.model)?;
    let data = load_dataset(&args.data)?;
    let (first, predicted) = model.predict_dataset(&data)?;
    let times = data.timestamps().map(|t| &t[first..]);
    let out = args.out.as_deref();
    let mut w = output(out)?;
    write_wrenches(&predicted, times, &mut w)?;
    finish(w, out)
}

pub(super) fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            TransducerConfig::from_toml(&text)?
        }
        None => TransducerConfig::default(),
    };
    let transducer = GroundTruthTransducer::from_config(&config)?;
    let envelope = &transducer.envelope;
    let trajectory = match args.trajectory {
        TrajectoryKind::Random => random_trajectory(envelope, args.samples, args.seed),
        TrajectoryKind::Grid => grid_trajectory(&GridTrajectory::default(), envelope)?,
        TrajectoryKind::Lifting => lifting_trajectory(&LiftingTrajectory::default(), envelope)?,
    };
    // Trajectory and noise draw from distinct streams of the same seed.
    let dataset = simulate(&transducer, &trajectory, args.seed ^ 0x9e37_79b9_7f4a_7c15)?
        .with_metadata(DatasetMetadata {
            source: "simulate".into(),
            label: None,
        });
    let out = args.out.as_deref();
    let mut w = output(out)?;
    write_dataset(&dataset, &mut w)?;
    finish(w, out)
}

pub(super) fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    let model = CalibrationModel::load(&args.model)?;
    let spec = model.spec();
    let entries = model.inspect(args.prune);
    let mut text = format!(
        "degree {}  inputs {}  lambda {}  na {}  nb {}\n{} of {} coefficients above {:e}\n\n",
        spec.degree,
        spec.inputs,
        spec.lambda,
        spec.output_lags,
        spec.input_lags,
        entries.len(),
        model.total_coefficients(),
        args.prune
    );
    text.push_str(&format!(
        "{:<6} {:<28} {:>16} {:>16}\n",
        "output", "term", "normalized", "original"
    ));
    for e in &entries {
        text.push_str(&format!(
            "{:<6} {:<28} {:>16.9e} {:>16.9e}\n",
            model.output_names()[e.output],
            e.term,
            e.normalized,
            e.original
        ));
    }
    write_text(args.out.as_deref(), &text)
}
