//! Distribution and dispersion CSV files.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use qwalk_core::spectral::DispersionPoint;
use qwalk_core::{ProbabilityDistribution, WalkerState};

use crate::error::{CliError, Result};

pub const DISTRIBUTION_HEADER: [&str; 6] = ["x", "P", "re_R", "im_R", "re_L", "im_L"];
pub const DISPERSION_HEADER: [&str; 3] = ["k", "omega", "vg"];

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Schema {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Writes one row per site; amplitude columns stay empty when `state` is `None`.
pub fn write_distribution(path: &Path, dist: &ProbabilityDistribution, state: Option<&WalkerState>) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_distribution_to(file, dist, state).map_err(|e| csv_error(path, e))
}

pub fn write_distribution_to<W: Write>(
    out: W,
    dist: &ProbabilityDistribution,
    state: Option<&WalkerState>,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DISTRIBUTION_HEADER)?;
    for (x, p) in dist.iter() {
        let mut record = vec![x.to_string(), num(p)];
        match state {
            Some(s) => {
                let (r, l) = s.amplitude(x);
                record.extend([r.re, r.im, l.re, l.im].map(num));
            }
            None => record.resize(DISTRIBUTION_HEADER.len(), String::new()),
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a distribution CSV; sites must be consecutive.
pub fn read_distribution(path: &Path) -> Result<ProbabilityDistribution> {
    let schema = |message: String| CliError::Schema {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(DISTRIBUTION_HEADER) {
        return Err(schema(format!(
            "header {:?} is not {}",
            header.iter().collect::<Vec<_>>(),
            DISTRIBUTION_HEADER.join(",")
        )));
    }
    let mut x_min = None;
    let mut p = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let x: i64 = record[0]
            .parse()
            .map_err(|_| schema(format!("row {}: bad site {:?}", row + 1, &record[0])))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| schema(format!("row {}: bad probability {:?}", row + 1, &record[1])))?;
        let first = *x_min.get_or_insert(x);
        if x != first + row as i64 {
            return Err(schema(format!("row {}: site {x} is not consecutive", row + 1)));
        }
        p.push(value);
    }
    let x_min = x_min.ok_or_else(|| schema("no rows".into()))?;
    ProbabilityDistribution::new(0, x_min, p).map_err(|e| schema(e.to_string()))
}

pub fn write_dispersion_to<W: Write>(out: W, curve: &[DispersionPoint]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DISPERSION_HEADER)?;
    for point in curve {
        w.write_record([num(point.k), num(point.omega), num(point.vg)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dispersion(path: &Path, curve: &[DispersionPoint]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_dispersion_to(file, curve).map_err(|e| csv_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qwalk_core::walk::{evolve, probability};
    use qwalk_core::{CoinParameter, Complex64};

    #[test]
    fn round_trip_is_exact() {
        let coin = CoinParameter::new(0.3).unwrap();
        let start = WalkerState::localized(3, [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let state = evolve(&start, coin, 37).unwrap();
        let dist = probability(&state);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_distribution(&path, &dist, Some(&state)).unwrap();
        let back = read_distribution(&path).unwrap();
        assert_eq!(back.x_min, dist.x_min);
        assert_eq!(back.p, dist.p);
    }

    #[test]
    fn empty_amplitudes_and_format() {
        let dist = ProbabilityDistribution::new(0, -1, vec![0.25, 0.5, 0.25]).unwrap();
        let mut buf = Vec::new();
        write_distribution_to(&mut buf, &dist, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,P,re_R,im_R,re_L,im_L");
        assert_eq!(lines[1], "-1,2.5000000000000000e-1,,,,");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn rejects_wrong_header_and_gaps() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,p\n0,1\n").unwrap();
        assert!(matches!(read_distribution(&path), Err(CliError::Schema { .. })));
        std::fs::write(&path, "x,P,re_R,im_R,re_L,im_L\n0,0.5,,,,\n2,0.5,,,,\n").unwrap();
        assert!(matches!(read_distribution(&path), Err(CliError::Schema { .. })));
    }
}
