//! Drive and initial-state parsing for the command line.
//!
//! Drive grammar:
//! - `zero`
//! - `sin:amp=A,freq=W,phase=P,channels=1+3` where every key is optional
//!   (`amp`, `freq` default 1, `phase` defaults 0, `channels` defaults to
//!   every input entry). `freq` is angular. Channel indices are 1-based
//!   positions in the `2M`-entry input vector, joined with `+`.
//! - `table:PATH` pointing at a CSV whose rows are `t,u_1,…,u_2M`; a header
//!   line is skipped, values are linearly interpolated, zero outside the
//!   listed range.

use darklab_core::{DriveSignal, Error};
use nalgebra::DVector;
use std::path::Path;

pub fn parse_drive(s: &str, input_dim: usize) -> darklab_core::Result<DriveSignal> {
    if s == "zero" {
        return Ok(DriveSignal::Zero);
    }
    if let Some(rest) = s.strip_prefix("sin:") {
        return parse_sin(rest, input_dim);
    }
    if s == "sin" {
        return parse_sin("", input_dim);
    }
    if let Some(path) = s.strip_prefix("table:") {
        return parse_table(Path::new(path));
    }
    Err(Error::MalformedSpec(format!(
        "unknown drive '{s}' (expected zero, sin:..., or table:PATH)"
    )))
}

fn parse_sin(params: &str, input_dim: usize) -> darklab_core::Result<DriveSignal> {
    let mut amplitude = 1.0;
    let mut frequency = 1.0;
    let mut phase = 0.0;
    let mut channels = None;
    for part in params.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            Error::MalformedSpec(format!("drive parameter '{part}' is not key=value"))
        })?;
        let num = || {
            value.parse::<f64>().map_err(|_| {
                Error::MalformedSpec(format!("drive parameter '{key}' has non-numeric value '{value}'"))
            })
        };
        match key {
            "amp" => amplitude = num()?,
            "freq" => frequency = num()?,
            "phase" => phase = num()?,
            "channels" => {
                let mut list = Vec::new();
                for tok in value.split('+') {
                    let idx: usize = tok.parse().map_err(|_| {
                        Error::MalformedSpec(format!("channel index '{tok}' is not a number"))
                    })?;
                    if idx == 0 || idx > input_dim {
                        return Err(Error::MalformedSpec(format!(
                            "channel index {idx} out of range 1..={input_dim}"
                        )));
                    }
                    list.push(idx - 1);
                }
                channels = Some(list);
            }
            other => {
                return Err(Error::MalformedSpec(format!(
                    "unknown drive parameter '{other}' (expected amp, freq, phase, channels)"
                )))
            }
        }
    }
    Ok(DriveSignal::Sinusoid {
        amplitude,
        frequency,
        phase,
        channels,
    })
}

fn parse_table(path: &Path) -> darklab_core::Result<DriveSignal> {
    let text = std::fs::read_to_string(path)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match fields {
            Ok(row) if row.len() >= 2 => {
                times.push(row[0]);
                values.push(row[1..].to_vec());
            }
            Ok(_) => {
                return Err(Error::MalformedSpec(format!(
                    "{}:{}: a drive row needs a time and at least one value",
                    path.display(),
                    lineno + 1
                )))
            }
            Err(_) if lineno == 0 => continue, // header
            Err(_) => {
                return Err(Error::MalformedSpec(format!(
                    "{}:{}: non-numeric drive row",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(DriveSignal::Piecewise { times, values })
}

pub fn parse_x0(s: &str, dim: usize) -> darklab_core::Result<DVector<f64>> {
    let parsed: Result<Vec<f64>, _> = s.split(',').map(|f| f.trim().parse::<f64>()).collect();
    let entries = parsed
        .map_err(|_| Error::MalformedSpec(format!("initial state '{s}' is not a comma-separated number list")))?;
    if entries.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} entries, phase space needs {dim}",
            entries.len()
        )));
    }
    if !entries.iter().all(|v| v.is_finite()) {
        return Err(Error::MalformedSpec("initial state must be finite".into()));
    }
    Ok(DVector::from_vec(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_defaults() {
        assert!(matches!(parse_drive("zero", 4).unwrap(), DriveSignal::Zero));
        match parse_drive("sin", 4).unwrap() {
            DriveSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
                channels,
            } => {
                assert_eq!(amplitude, 1.0);
                assert_eq!(frequency, 1.0);
                assert_eq!(phase, 0.0);
                assert!(channels.is_none());
            }
            d => panic!("unexpected drive {d:?}"),
        }
    }

    #[test]
    fn sin_with_parameters_and_channel_list() {
        match parse_drive("sin:amp=2.5,freq=0.7,phase=1.1,channels=1+3", 4).unwrap() {
            DriveSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
                channels,
            } => {
                assert_eq!(amplitude, 2.5);
                assert_eq!(frequency, 0.7);
                assert_eq!(phase, 1.1);
                assert_eq!(channels, Some(vec![0, 2]));
            }
            d => panic!("unexpected drive {d:?}"),
        }
    }

    #[test]
    fn sin_rejections() {
        assert!(parse_drive("sin:amp", 4).is_err());
        assert!(parse_drive("sin:amp=x", 4).is_err());
        assert!(parse_drive("sin:gain=2", 4).is_err());
        assert!(parse_drive("sin:channels=0", 4).is_err());
        assert!(parse_drive("sin:channels=5", 4).is_err());
        assert!(parse_drive("ramp:slope=1", 4).is_err());
    }

    #[test]
    fn table_parsing_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        std::fs::write(&path, "t,u_1,u_2\n0.0,1.0,0.0\n1.0,0.0,2.0\n").unwrap();
        match parse_drive(&format!("table:{}", path.display()), 2).unwrap() {
            DriveSignal::Piecewise { times, values } => {
                assert_eq!(times, vec![0.0, 1.0]);
                assert_eq!(values, vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
            }
            d => panic!("unexpected drive {d:?}"),
        }
        std::fs::write(&path, "0.0,1.0\nbroken,row\n").unwrap();
        assert!(parse_drive(&format!("table:{}", path.display()), 1).is_err());
        assert!(parse_drive("table:/does/not/exist.csv", 1).is_err());
    }

    #[test]
    fn x0_parsing() {
        let x = parse_x0("1.0, -2.5,0", 3).unwrap();
        assert_eq!(x, DVector::from_column_slice(&[1.0, -2.5, 0.0]));
        assert!(parse_x0("1.0,2.0", 3).is_err());
        assert!(parse_x0("1.0,abc", 2).is_err());
        assert!(parse_x0("1.0,inf", 2).is_err());
    }
}
