//! Observable tables and their CSV form.
//!
//! Every table has numeric key columns followed by value columns. Floats
//! are written with `Display`, the shortest decimal that parses back to
//! the same `f64`.

use std::path::Path;

use crate::error::{Result, RunError};

/// One observable of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub keys: Vec<String>,
    pub rows: Vec<(Vec<f64>, f64)>,
}

impl Table {
    pub fn new(name: &str, keys: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            keys: keys.iter().map(|k| k.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &[f64], value: f64) {
        debug_assert_eq!(key.len(), self.keys.len());
        self.rows.push((key.to_vec(), value));
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut header = self.keys.clone();
        header.push("value".into());
        write_rows(path, &header, self.rows.iter().map(|(k, v)| {
            let mut r = k.clone();
            r.push(*v);
            r
        }))
    }

    pub fn read_csv(name: &str, path: &Path) -> Result<Self> {
        let (header, rows) = read_rows(path)?;
        if header.last().map(String::as_str) != Some("value") {
            return Err(RunError::data(path, "last column must be `value`"));
        }
        let nk = header.len() - 1;
        Ok(Self {
            name: name.to_string(),
            keys: header[..nk].to_vec(),
            rows: rows
                .into_iter()
                .map(|mut r| {
                    let v = r.pop().expect("width checked");
                    (r, v)
                })
                .collect(),
        })
    }

    /// Value at an exact key.
    pub fn get(&self, key: &[f64]) -> Option<f64> {
        self.rows.iter().find(|(k, _)| k == key).map(|r| r.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Standard error of the mean; 0 for a single sample.
    pub std_error: f64,
    pub count: usize,
}

/// Pointwise ensemble average of one observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Averaged {
    pub name: String,
    pub keys: Vec<String>,
    pub rows: Vec<(Vec<f64>, Stats)>,
}

/// Averages tables with identical keys, accumulating in the given order.
pub fn average(tables: &[&Table]) -> Result<Averaged> {
    let first = tables
        .first()
        .ok_or_else(|| RunError::data("", "nothing to average"))?;
    for t in tables {
        if t.keys != first.keys || t.rows.len() != first.rows.len() || t.rows.iter().zip(&first.rows).any(|(a, b)| a.0 != b.0) {
            return Err(RunError::data(&first.name, "realizations disagree on table layout"));
        }
    }
    let n = tables.len();
    let rows = first
        .rows
        .iter()
        .enumerate()
        .map(|(i, (key, _))| {
            let mean = tables.iter().map(|t| t.rows[i].1).sum::<f64>() / n as f64;
            let std_error = if n > 1 {
                let var = tables.iter().map(|t| (t.rows[i].1 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            (key.clone(), Stats { mean, std_error, count: n })
        })
        .collect();
    Ok(Averaged {
        name: first.name.clone(),
        keys: first.keys.clone(),
        rows,
    })
}

impl Averaged {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut header = self.keys.clone();
        header.extend(["mean", "std_error", "count"].map(String::from));
        write_rows(path, &header, self.rows.iter().map(|(k, s)| {
            let mut r = k.clone();
            r.extend([s.mean, s.std_error, s.count as f64]);
            r
        }))
    }

    pub fn read_csv(name: &str, path: &Path) -> Result<Self> {
        let (header, rows) = read_rows(path)?;
        let nk = header.len().checked_sub(3).ok_or_else(|| RunError::data(path, "too few columns"))?;
        if header[nk..] != ["mean", "std_error", "count"] {
            return Err(RunError::data(path, "expected trailing columns mean,std_error,count"));
        }
        Ok(Self {
            name: name.to_string(),
            keys: header[..nk].to_vec(),
            rows: rows
                .into_iter()
                .map(|r| {
                    let s = Stats {
                        mean: r[nk],
                        std_error: r[nk + 1],
                        count: r[nk + 2] as usize,
                    };
                    (r[..nk].to_vec(), s)
                })
                .collect(),
        })
    }

    /// Rows whose key column `column` equals `value`, as (remaining key, mean).
    pub fn select(&self, column: &str, value: f64) -> Vec<(Vec<f64>, f64)> {
        let Some(c) = self.keys.iter().position(|k| k == column) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|(k, _)| k[c] == value)
            .map(|(k, s)| {
                let mut rest = k.clone();
                rest.remove(c);
                (rest, s.mean)
            })
            .collect()
    }

    /// Distinct values of a key column in first-seen order.
    pub fn distinct(&self, column: &str) -> Vec<f64> {
        let Some(c) = self.keys.iter().position(|k| k == column) else {
            return Vec::new();
        };
        let mut out: Vec<f64> = Vec::new();
        for (k, _) in &self.rows {
            if !out.contains(&k[c]) {
                out.push(k[c]);
            }
        }
        out
    }
}

pub(crate) fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let err = |e: csv::Error| RunError::data(path, e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(err)?;
    }
    w.flush().map_err(RunError::io(path))
}

pub(crate) fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let err = |e: csv::Error| RunError::data(path, e);
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let header: Vec<String> = r.headers().map_err(err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| RunError::data(path, format!("`{s}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(RunError::data(path, "ragged row"));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("x", &["t", "r"]);
        t.push(&[1.0, 3.0], 0.1 + 0.2);
        t.push(&[2.0, 5.0], 1e-300);
        t.push(&[3.0, 7.0], -2.5e17);
        let p = dir.path().join("x.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(Table::read_csv("x", &p).unwrap(), t);
    }

    #[test]
    fn mean_and_error() {
        let mut a = Table::new("x", &["k"]);
        a.push(&[0.0], 1.0);
        let mut b = a.clone();
        b.rows[0].1 = 3.0;
        let avg = average(&[&a, &b]).unwrap();
        assert_eq!(avg.rows[0].1.mean, 2.0);
        assert!((avg.rows[0].1.std_error - 1.0).abs() < 1e-15);
        b.rows[0].0[0] = 1.0;
        assert!(average(&[&a, &b]).is_err());
    }
}
