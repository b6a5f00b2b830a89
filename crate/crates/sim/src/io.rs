//! CSV persistence of aggregate rows.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use subgroup_ofdm::config::ChannelKind;
use subgroup_ofdm::estimators::Method;

use crate::harness::AggregateRow;

pub const COLUMNS: [&str; 12] = [
    "channel",
    "estimator",
    "d",
    "snr_db",
    "trials",
    "mean_mse",
    "stderr_mse",
    "mean_ser",
    "stderr_ser",
    "mean_ber",
    "mean_throughput",
    "mean_chosen_d",
];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("line {line}: bad value {value:?} in column `{column}`")]
    BadValue {
        line: u64,
        column: &'static str,
        value: String,
    },
}

// 17 significant digits round-trips every f64.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_rows<W: Write>(rows: &[AggregateRow], out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.channel.as_str().to_string(),
            r.estimator.as_str().to_string(),
            r.d.to_string(),
            float(r.snr_db),
            r.trials.to_string(),
            float(r.mean_mse),
            float(r.stderr_mse),
            float(r.mean_ser),
            float(r.stderr_ser),
            float(r.mean_ber),
            float(r.mean_throughput),
            r.mean_chosen_d.map(float).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv(rows: &[AggregateRow], path: &Path) -> Result<(), CsvError> {
    let file = File::create(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_rows(rows, file)
}

fn parse_channel(s: &str) -> Option<ChannelKind> {
    [ChannelKind::Tdl, ChannelKind::Itu].into_iter().find(|c| c.as_str() == s)
}

fn parse_method(s: &str) -> Option<Method> {
    [Method::Ls, Method::Lmmse, Method::Subgroup].into_iter().find(|m| m.as_str() == s)
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<AggregateRow>, CsvError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let mut index = [0usize; COLUMNS.len()];
    for (slot, &name) in index.iter_mut().zip(&COLUMNS) {
        *slot = header.iter().position(|h| h == name).ok_or(CsvError::MissingColumn(name))?;
    }

    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(index[i]).unwrap_or("");
        let bad = |i: usize| CsvError::BadValue {
            line,
            column: COLUMNS[i],
            value: field(i).to_string(),
        };
        let f = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let u = |i: usize| field(i).parse::<usize>().map_err(|_| bad(i));
        rows.push(AggregateRow {
            channel: parse_channel(field(0)).ok_or_else(|| bad(0))?,
            estimator: parse_method(field(1)).ok_or_else(|| bad(1))?,
            d: u(2)?,
            snr_db: f(3)?,
            trials: u(4)?,
            mean_mse: f(5)?,
            stderr_mse: f(6)?,
            mean_ser: f(7)?,
            stderr_ser: f(8)?,
            mean_ber: f(9)?,
            mean_throughput: f(10)?,
            mean_chosen_d: match field(11) {
                "" => None,
                _ => Some(f(11)?),
            },
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<AggregateRow>, CsvError> {
    let file = File::open(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_rows(file)
}
