//! CSV dataset format.
//!
//! A header row is mandatory. Columns are matched by name, in any order:
//! `u1`..`u6` (counts), `fx fy fz` (N) and `tx ty tz` (Nm) are required;
//! `temp` (°C) and `time` (s) are optional. Unknown columns are ignored.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, DatasetMetadata, RawSample, Wrench, INPUT_NAMES, OUTPUT_NAMES};
use crate::error::{Error, Result};

const GAUGE_COLUMNS: [&str; 6] = ["u1", "u2", "u3", "u4", "u5", "u6"];

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let dataset = read_dataset(file)?;
    Ok(dataset.with_metadata(DatasetMetadata {
        source: path.display().to_string(),
        label: None,
    }))
}

/// Parses a dataset from any reader. Reported row numbers count data rows
/// from 1, excluding the header.
pub fn read_dataset(reader: impl Read) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let require = |name: &str| find(name).ok_or_else(|| Error::Schema(name.to_string()));

    let gauges: Vec<usize> = GAUGE_COLUMNS.iter().map(|c| require(c)).collect::<Result<_>>()?;
    let outputs: Vec<usize> = OUTPUT_NAMES.iter().map(|c| require(c)).collect::<Result<_>>()?;
    let temp = find(INPUT_NAMES[6]);
    let time = find("time");

    let mut samples = Vec::new();
    let mut wrenches = Vec::new();
    let mut times = time.map(|_| Vec::new());
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let cell = |index: usize| -> Result<f64> {
            let name = headers.get(index).unwrap_or_default();
            let text = record.get(index).ok_or_else(|| Error::Parse {
                row,
                column: name.to_string(),
                message: "missing cell".into(),
            })?;
            let value: f64 = text.parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                message: format!("\"{text}\" is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::data(row, format!("{name} is not finite")));
            }
            Ok(value)
        };
        let g: [f64; 6] = {
            let v: Vec<f64> = gauges.iter().map(|&c| cell(c)).collect::<Result<_>>()?;
            std::array::from_fn(|k| v[k])
        };
        let w: Vec<f64> = outputs.iter().map(|&c| cell(c)).collect::<Result<_>>()?;
        let t = temp.map(&cell).transpose()?;
        if let (Some(col), Some(times)) = (time, times.as_mut()) {
            times.push(cell(col)?);
        }
        samples.push(RawSample::new(g, t));
        wrenches.push(Wrench::from_slice(&w)?);
    }
    Dataset::new(samples, wrenches, times).map_err(|e| match e {
        // Dataset rows are 0-based; report them like the parser does.
        Error::Data { row, message } => Error::Data {
            row: row + 1,
            message,
        },
        other => other,
    })
}

fn fmt(v: f64) -> String {
    // `Display` for f64 prints the shortest string that parses back to the
    // same value.
    format!("{v}")
}

/// Writes `dataset` with columns `time?, u1..u6, temp?, fx..tz`.
pub fn write_dataset(dataset: &Dataset, writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = Vec::new();
    if dataset.timestamps().is_some() {
        header.push("time");
    }
    header.extend(GAUGE_COLUMNS);
    if dataset.has_temperature() {
        header.push(INPUT_NAMES[6]);
    }
    header.extend(OUTPUT_NAMES);
    csv.write_record(&header).map_err(csv_error)?;
    for (k, (s, w)) in dataset.samples().iter().zip(dataset.wrenches()).enumerate() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        if let Some(t) = dataset.timestamps() {
            record.push(fmt(t[k]));
        }
        record.extend(s.gauges.iter().map(|&v| fmt(v)));
        if let Some(t) = s.temperature {
            record.push(fmt(t));
        }
        record.extend(w.to_array().iter().map(|&v| fmt(v)));
        csv.write_record(&record).map_err(csv_error)?;
    }
    csv.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Writes predicted wrenches as `time?, fx..tz`.
pub fn write_wrenches(wrenches: &[Wrench], times: Option<&[f64]>, writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = Vec::new();
    if times.is_some() {
        header.push("time");
    }
    header.extend(OUTPUT_NAMES);
    csv.write_record(&header).map_err(csv_error)?;
    for (k, w) in wrenches.iter().enumerate() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        if let Some(t) = times {
            record.push(fmt(t[k]));
        }
        record.extend(w.to_array().iter().map(|&v| fmt(v)));
        csv.write_record(&record).map_err(csv_error)?;
    }
    csv.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Numerical(format!("csv write failed: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
time,u1,u2,u3,u4,u5,u6,temp,fx,fy,fz,tx,ty,tz
0.00,1,2,3,4,5,6,25.5,0.1,0.2,0.3,0.01,0.02,0.03
0.01,2,3,4,5,6,7,25.6,1.1,1.2,1.3,1.01,1.02,1.03
0.02,3,4,5,6,7,8,25.7,2.1,2.2,2.3,2.01,2.02,2.03
";

    #[test]
    fn well_formed_file() {
        let d = read_dataset(GOOD.as_bytes()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.samples()[1].gauges, [2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(d.samples()[2].temperature, Some(25.7));
        assert_eq!(d.wrenches()[0].torque, [0.01, 0.02, 0.03]);
        assert_eq!(d.timestamps().unwrap(), &[0.0, 0.01, 0.02]);
    }

    #[test]
    fn columns_in_any_order() {
        let text = "fz,fy,fx,tz,ty,tx,u6,u5,u4,u3,u2,u1\n3,2,1,6,5,4,60,50,40,30,20,10\n";
        let d = read_dataset(text.as_bytes()).unwrap();
        assert_eq!(d.samples()[0].gauges, [10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
        assert_eq!(d.wrenches()[0].to_array(), [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(!d.has_temperature());
        assert!(d.timestamps().is_none());
    }

    #[test]
    fn missing_column_is_named() {
        let text = GOOD.replace(",fz,", ",force_z,");
        match read_dataset(text.as_bytes()) {
            Err(Error::Schema(c)) => assert_eq!(c, "fz"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn bad_cell_reports_location() {
        let text = GOOD.replace("25.6", "warm");
        match read_dataset(text.as_bytes()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "temp");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_monotone_time() {
        let text = GOOD.replace("0.02,3", "0.005,3");
        assert!(matches!(
            read_dataset(text.as_bytes()),
            Err(Error::Data { row: 3, .. })
        ));
    }

    #[test]
    fn write_then_read() {
        let d = read_dataset(GOOD.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, d);
    }
}
