//! Series and estimator files.
//!
//! A series is a CSV `i,T,Y,increment` (1-based row index, observation
//! time, observed value, increment in units of ε) plus a JSON sidecar with
//! the same stem holding `eps`, `horizon` and `y0`. Numbers are written in
//! shortest round-trip form, so ingesting and rewriting a file reproduces it
//! byte for byte.

use std::path::{Path, PathBuf};

use levyhit::estimators::StepFunction;
use levyhit::simulation::ObservationSeries;
use levyhit::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SERIES_HEADER: [&str; 4] = ["i", "T", "Y", "increment"];

/// Tolerance on `|increment| ≥ 1` and on `Y_i - Y_{i-1} = ε·increment`.
pub const INCREMENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub eps: f64,
    pub horizon: f64,
    #[serde(default)]
    pub y0: f64,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn series_csv(s: &ObservationSeries<f64>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SERIES_HEADER).expect("in-memory write");
    for k in 0..s.len() {
        w.write_record([
            (k + 1).to_string(),
            s.times[k].to_string(),
            s.values[k].to_string(),
            s.increments[k].to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii output")
}

pub fn sidecar_json(s: &ObservationSeries<f64>) -> String {
    let sc = Sidecar {
        eps: s.eps,
        horizon: s.horizon,
        y0: s.y0,
    };
    serde_json::to_string_pretty(&sc).expect("sidecar serialization") + "\n"
}

/// Parses a series from CSV text and its sidecar. Rows are 1-based data rows.
pub fn parse_series(csv_text: &str, sidecar: &str) -> Result<ObservationSeries<f64>> {
    let sc: Sidecar = serde_json::from_str(sidecar).map_err(|e| Error::Schema(format!("sidecar: {e}")))?;
    if !(sc.eps > 0.0 && sc.eps.is_finite()) || !(sc.horizon > 0.0) || !sc.y0.is_finite() {
        return Err(Error::Schema("sidecar needs eps > 0, horizon > 0 and a finite y0".into()));
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_text.as_bytes());
    let header = r.headers().map_err(|e| Error::Schema(e.to_string()))?;
    if header.iter().ne(SERIES_HEADER) {
        return Err(Error::Schema(format!(
            "header must be `{}`, got `{}`",
            SERIES_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut s = ObservationSeries::empty(sc.eps, sc.horizon);
    s.y0 = sc.y0;
    for (k, rec) in r.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| Error::Schema(format!("row {row}: {e}")))?;
        let num = |j: usize| -> Result<f64> {
            rec[j]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Schema(format!("row {row}: `{}` is not a finite number in column {}", &rec[j], SERIES_HEADER[j])))
        };
        if rec[0].trim().parse::<usize>() != Ok(row) {
            return Err(Error::Schema(format!("row {row}: index column must read {row}, got `{}`", &rec[0])));
        }
        let (t, y, d) = (num(1)?, num(2)?, num(3)?);
        let prev_t = s.times.last().copied().unwrap_or(0.0);
        if !(t > prev_t) {
            return Err(Error::Monotonicity { row });
        }
        if !(d.abs() >= 1.0 - INCREMENT_TOL) {
            return Err(Error::BarrierViolation { row, value: d });
        }
        let prev_y = s.values.last().copied().unwrap_or(s.y0);
        if ((y - prev_y) - sc.eps * d).abs() > INCREMENT_TOL * y.abs().max(1.0) {
            return Err(Error::Schema(format!("row {row}: Y - Y_prev differs from eps * increment")));
        }
        s.times.push(t);
        s.values.push(y);
        s.increments.push(d);
    }
    s.validate()?;
    Ok(s)
}

/// Reads `path` and its sidecar.
pub fn ingest_series(path: &Path) -> Result<ObservationSeries<f64>> {
    let csv_text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let sp = sidecar_path(path);
    let sidecar = std::fs::read_to_string(&sp).map_err(|e| io_err(&sp, e))?;
    parse_series(&csv_text, &sidecar)
}

/// Writes the series CSV and its sidecar; returns both paths.
pub fn write_series(path: &Path, s: &ObservationSeries<f64>) -> Result<(PathBuf, PathBuf)> {
    std::fs::write(path, series_csv(s)).map_err(|e| io_err(path, e))?;
    let sp = sidecar_path(path);
    std::fs::write(&sp, sidecar_json(s)).map_err(|e| io_err(&sp, e))?;
    Ok((path.to_path_buf(), sp))
}

/// Estimator path as CSV `t,value`.
pub fn step_csv(f: &StepFunction<f64>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "value"]).expect("in-memory write");
    for (t, v) in f.times().iter().zip(f.values()) {
        w.write_record([t.to_string(), v.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand() -> ObservationSeries<f64> {
        ObservationSeries::from_increments(0.1, 1.0, vec![0.2, 0.5, 0.9], vec![1.5, -2.0, 1.0]).unwrap()
    }

    #[test]
    fn text_round_trip() {
        let s = hand();
        let (c, j) = (series_csv(&s), sidecar_json(&s));
        let back = parse_series(&c, &j).unwrap();
        assert_eq!(series_csv(&back), c);
        assert_eq!(sidecar_json(&back), j);
        assert_eq!(back, s);
    }

    fn rows(times: &[f64], incs: &[f64]) -> String {
        let mut s = String::from("i,T,Y,increment\n");
        let mut y = 0.0;
        for (k, (t, d)) in times.iter().zip(incs).enumerate() {
            y += 0.1 * d;
            s += &format!("{},{},{},{}\n", k + 1, t, y, d);
        }
        s
    }

    const SIDE: &str = r#"{"eps":0.1,"horizon":10.0,"y0":0.0}"#;

    #[test]
    fn row_level_errors() {
        let mut t: Vec<f64> = (1..=9).map(|k| k as f64 * 0.1).collect();
        t[6] = 0.55;
        assert_eq!(parse_series(&rows(&t, &[1.0; 9]), SIDE), Err(Error::Monotonicity { row: 7 }));
        let mut d = vec![1.0; 5];
        d[2] = 0.4;
        let t: Vec<f64> = (1..=5).map(|k| k as f64).collect();
        assert_eq!(
            parse_series(&rows(&t, &d), SIDE),
            Err(Error::BarrierViolation { row: 3, value: 0.4 })
        );
        assert!(matches!(parse_series("a,b\n", SIDE), Err(Error::Schema(_))));
        assert!(matches!(parse_series("i,T,Y,increment\n1,x,0.1,1\n", SIDE), Err(Error::Schema(_))));
        assert!(matches!(parse_series("i,T,Y,increment\n1,0.1,0.5,1\n", SIDE), Err(Error::Schema(_))));
        assert!(matches!(parse_series(&rows(&[0.1], &[1.0]), "{}"), Err(Error::Schema(_))));
    }
}
