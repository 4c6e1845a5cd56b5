//! Parallel ensemble driver.
//!
//! Workers pull realization indices from a shared counter and send their
//! tables to the coordinating thread, which is the only writer. Each
//! finished realization is stored under `raw/rNNNNN/` (written to a
//! temporary directory, then renamed), so an interrupted run resumes where
//! it stopped. Averages are accumulated in realization order, which makes
//! the output independent of the worker count.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::error::{Result, RunError};
use crate::table::{average, Averaged, Table};

/// Counts and averages of one ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleOutcome {
    pub requested: usize,
    pub succeeded: usize,
    pub failed: usize,
    /// `(realization, reason)` of each failure.
    pub failures: Vec<(usize, String)>,
    /// Averaged tables sorted by name.
    pub averages: Vec<Averaged>,
    /// Per-realization tables of the successful realizations, in index order.
    pub raw: BTreeMap<usize, Vec<Table>>,
}

fn realization_dir(raw: &Path, index: usize) -> PathBuf {
    raw.join(format!("r{index:05}"))
}

fn load_realization(dir: &Path) -> Result<Vec<Table>> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(RunError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    names.sort();
    names
        .iter()
        .map(|p| {
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            Table::read_csv(name, p)
        })
        .collect()
}

fn store_realization(raw: &Path, index: usize, tables: &[Table]) -> Result<()> {
    let tmp = raw.join(format!("r{index:05}.tmp"));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(RunError::io(&tmp))?;
    }
    fs::create_dir_all(&tmp).map_err(RunError::io(&tmp))?;
    for t in tables {
        t.write_csv(&tmp.join(format!("{}.csv", t.name)))?;
    }
    let dest = realization_dir(raw, index);
    fs::rename(&tmp, &dest).map_err(RunError::io(&dest))
}

/// Guards `raw/` against mixing realizations of different configurations.
fn claim_raw_dir(raw: &Path, fingerprint: &str) -> Result<()> {
    fs::create_dir_all(raw).map_err(RunError::io(raw))?;
    let path = raw.join("fingerprint.json");
    match fs::read_to_string(&path) {
        Ok(existing) if existing != fingerprint => Err(RunError::Config(format!(
            "{} holds realizations of a different configuration; use another output directory",
            raw.display()
        ))),
        Ok(_) => Ok(()),
        Err(_) => fs::write(&path, fingerprint).map_err(RunError::io(&path)),
    }
}

/// Runs `realizations` trajectories of `work` and writes raw and averaged
/// CSVs under `dir`. A `DegenerateState` error marks a realization failed;
/// any other error aborts the run.
pub fn run_ensemble<F>(
    dir: &Path,
    fingerprint: &str,
    realizations: usize,
    workers: usize,
    work: F,
) -> Result<EnsembleOutcome>
where
    F: Fn(u64) -> ffcirc::Result<Vec<Table>> + Sync,
{
    let raw_dir = dir.join("raw");
    claim_raw_dir(&raw_dir, fingerprint)?;
    let mut raw: BTreeMap<usize, Vec<Table>> = BTreeMap::new();
    let mut pending = Vec::new();
    for i in 0..realizations {
        let d = realization_dir(&raw_dir, i);
        if d.is_dir() {
            raw.insert(i, load_realization(&d)?);
        } else {
            pending.push(i);
        }
    }

    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let mut failures = Vec::new();
    let mut fatal: Option<RunError> = None;
    std::thread::scope(|s| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..workers.max(1).min(pending.len().max(1)) {
            let tx = tx.clone();
            let (next, stop, pending, work) = (&next, &stop, &pending, &work);
            s.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= pending.len() || stop.load(Ordering::Relaxed) {
                    break;
                }
                let index = pending[k];
                if tx.send((index, work(index as u64))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (index, result) in rx {
            match result {
                Ok(mut tables) => {
                    tables.sort_by(|a, b| a.name.cmp(&b.name));
                    if let Err(e) = store_realization(&raw_dir, index, &tables) {
                        fatal.get_or_insert(e);
                        stop.store(true, Ordering::Relaxed);
                    }
                    raw.insert(index, tables);
                }
                Err(e @ ffcirc::Error::DegenerateState { .. }) => failures.push((index, e.to_string())),
                Err(e) => {
                    fatal.get_or_insert(RunError::from(e));
                    stop.store(true, Ordering::Relaxed);
                }
            }
        }
    });
    if let Some(e) = fatal {
        return Err(e);
    }
    failures.sort();
    let failed = failures.len();
    if failed * 100 > realizations {
        return Err(RunError::TooManyFailures {
            failed,
            requested: realizations,
        });
    }

    let mut by_name: BTreeMap<&str, Vec<&Table>> = BTreeMap::new();
    for tables in raw.values() {
        for t in tables {
            by_name.entry(t.name.as_str()).or_default().push(t);
        }
    }
    let averages = by_name
        .values()
        .map(|ts| average(ts))
        .collect::<Result<Vec<_>>>()?;
    for a in &averages {
        a.write_csv(&dir.join(format!("{}.csv", a.name)))?;
    }
    Ok(EnsembleOutcome {
        requested: realizations,
        succeeded: raw.len(),
        failed,
        failures,
        averages,
        raw,
    })
}

impl EnsembleOutcome {
    pub fn table(&self, name: &str) -> Option<&Averaged> {
        self.averages.iter().find(|a| a.name == name)
    }
}

/// Reads back the averaged tables (every `*.csv` in `dir` with averaged
/// columns) and the stored realizations of a finished point.
pub fn load_point(dir: &Path) -> Result<(Vec<Averaged>, BTreeMap<usize, Vec<Table>>)> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(RunError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut averages = Vec::new();
    for p in files {
        let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if let Ok(a) = Averaged::read_csv(&name, &p) {
            averages.push(a);
        }
    }
    let raw_dir = dir.join("raw");
    let mut raw = BTreeMap::new();
    if raw_dir.is_dir() {
        for e in fs::read_dir(&raw_dir).map_err(RunError::io(&raw_dir))? {
            let p = e.map_err(RunError::io(&raw_dir))?.path();
            let Some(index) = p
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_prefix('r'))
                .and_then(|n| n.parse::<usize>().ok())
            else {
                continue;
            };
            if p.is_dir() {
                raw.insert(index, load_realization(&p)?);
            }
        }
    }
    Ok((averages, raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(i: u64) -> ffcirc::Result<Vec<Table>> {
        let mut t = Table::new("toy", &["k"]);
        for k in 0..3 {
            t.push(&[k as f64], (i as f64 + 1.0).sqrt() * k as f64);
        }
        Ok(vec![t])
    }

    #[test]
    fn worker_count_does_not_matter() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_ensemble(a.path(), "x", 37, 1, toy).unwrap();
        run_ensemble(b.path(), "x", 37, 5, toy).unwrap();
        let read = |d: &Path| fs::read(d.join("toy.csv")).unwrap();
        assert_eq!(read(a.path()), read(b.path()));
    }

    #[test]
    fn failures_are_counted() {
        let dir = tempfile::tempdir().unwrap();
        let flaky = |i: u64| {
            if i == 3 {
                Err(ffcirc::Error::DegenerateState {
                    step: Some(1),
                    reason: "test".into(),
                })
            } else {
                toy(i)
            }
        };
        let out = run_ensemble(dir.path(), "x", 200, 2, flaky).unwrap();
        assert_eq!((out.succeeded, out.failed), (199, 1));
        let dir = tempfile::tempdir().unwrap();
        let r = run_ensemble(dir.path(), "x", 50, 2, flaky);
        assert!(matches!(r, Err(RunError::TooManyFailures { failed: 1, requested: 50 })));
    }

    #[test]
    fn resumes_and_guards_fingerprint() {
        let dir = tempfile::tempdir().unwrap();
        run_ensemble(dir.path(), "x", 4, 1, toy).unwrap();
        let first = fs::read(dir.path().join("toy.csv")).unwrap();
        fs::remove_dir_all(dir.path().join("raw/r00002")).unwrap();
        let out = run_ensemble(dir.path(), "x", 4, 1, |i| {
            assert_eq!(i, 2, "only the missing realization is recomputed");
            toy(i)
        })
        .unwrap();
        assert_eq!(out.succeeded, 4);
        assert_eq!(fs::read(dir.path().join("toy.csv")).unwrap(), first);
        assert!(matches!(run_ensemble(dir.path(), "y", 4, 1, toy), Err(RunError::Config(_))));
    }
}
