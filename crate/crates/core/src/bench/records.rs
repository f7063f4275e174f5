use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_gen::SparsityClass;

/// Outcome of one algorithm on one trial. Score fields are empty when the
/// solver failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    #[serde(with = "class_tag")]
    pub class: SparsityClass,
    pub snr_db: f64,
    pub algorithm: String,
    pub trial: usize,
    pub seed: u64,
    pub nmse: Option<f64>,
    pub f1: Option<f64>,
    pub outer_iters: Option<usize>,
    pub failed: bool,
    pub wall_time_seconds: Option<f64>,
}

/// Summary of one (class, SNR, algorithm) cell over its non-failed trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    #[serde(with = "class_tag")]
    pub class: SparsityClass,
    pub snr_db: f64,
    pub algorithm: String,
    pub trials: usize,
    pub failed: usize,
    pub nmse_mean: Option<f64>,
    pub nmse_median: Option<f64>,
    pub f1_mean: Option<f64>,
}

mod class_tag {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::signal_gen::SparsityClass;

    pub fn serialize<S: Serializer>(c: &SparsityClass, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(c.tag())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SparsityClass, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        a.class
            .cmp(&b.class)
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then_with(|| a.algorithm.cmp(&b.algorithm))
            .then(a.trial.cmp(&b.trial))
    });
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    })
}

/// Groups records by (class, SNR, algorithm), in sorted order.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut rows = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let head = &sorted[start];
        let end = start
            + sorted[start..]
                .iter()
                .take_while(|r| {
                    r.class == head.class
                        && r.snr_db == head.snr_db
                        && r.algorithm == head.algorithm
                })
                .count();
        let group = &sorted[start..end];
        let ok: Vec<&TrialRecord> = group.iter().filter(|r| !r.failed).collect();
        let mut nmse: Vec<f64> = ok.iter().filter_map(|r| r.nmse).collect();
        let f1: Vec<f64> = ok.iter().filter_map(|r| r.f1).collect();
        rows.push(AggregateRow {
            class: head.class,
            snr_db: head.snr_db,
            algorithm: head.algorithm.clone(),
            trials: group.len(),
            failed: group.len() - ok.len(),
            nmse_mean: mean(&nmse),
            nmse_median: median(&mut nmse),
            f1_mean: mean(&f1),
        });
        start = end;
    }
    rows
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(file, rows, header).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Serializes rows, writing the header even when there are none.
pub(crate) fn write_csv_to<W: Write, T: Serialize>(
    out: W,
    rows: &[T],
    header: &[&str],
) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    r.deserialize()
        .collect::<csv::Result<Vec<T>>>()
        .map_err(wrap)
}

pub(crate) const RECORD_HEADER: [&str; 10] = [
    "class",
    "snr_db",
    "algorithm",
    "trial",
    "seed",
    "nmse",
    "f1",
    "outer_iters",
    "failed",
    "wall_time_seconds",
];

pub(crate) const AGGREGATE_HEADER: [&str; 8] = [
    "class",
    "snr_db",
    "algorithm",
    "trials",
    "failed",
    "nmse_mean",
    "nmse_median",
    "f1_mean",
];

pub fn write_records(path: impl AsRef<Path>, records: &[TrialRecord]) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    write_csv(path.as_ref(), &sorted, &RECORD_HEADER)
}

pub fn write_aggregate(path: impl AsRef<Path>, rows: &[AggregateRow]) -> Result<()> {
    write_csv(path.as_ref(), rows, &AGGREGATE_HEADER)
}

/// Writes the aggregated table to any writer, e.g. standard output.
pub fn write_aggregate_to<W: Write>(out: W, rows: &[AggregateRow]) -> csv::Result<()> {
    write_csv_to(out, rows, &AGGREGATE_HEADER)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    read_csv(path.as_ref())
}

pub fn read_aggregate(path: impl AsRef<Path>) -> Result<Vec<AggregateRow>> {
    read_csv(path.as_ref())
}
