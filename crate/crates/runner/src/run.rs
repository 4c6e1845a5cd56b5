//! Executes a [`Plan`] and writes its outputs.
//!
//! Layout under the output directory:
//!
//! * `manifest.json`: resolved configuration, seed, versions, wall time and
//!   failure counts.
//! * Circuit experiments: one directory per parameter point (`beta_0.5/`)
//!   with averaged tables, `fits.csv`, `values.csv` and `raw/`.
//! * `master`: `snapshots.csv` (t, n, value = f_n), `collapse.csv`
//!   (t, phi, value = t²f_n at n = phi·t), fits and values.
//! * `lightcone`: `lightcone.csv` (beta, mutual_information, ratio).
//! * `brownian`: averaged `weights.csv` (t, n) plus fits and values.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use ffcirc::{
    collapse_transform, integrate, light_cone_protocol, mutual_information_14, steady_state_check, unitary_sequence,
    Circuit, MasterState,
};
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_circuit, analyze_with_bootstrap, Analysis};
use crate::config::{BrownianPlan, CircuitPlan, Experiment, LightconePlan, MasterPlan, Plan, Work};
use crate::ensemble::{load_point, run_ensemble};
use crate::error::{Result, RunError};
use crate::fits::{collapse_spread, fit_exponential, fit_power_law, Curve};
use crate::observe::{brownian_realization, circuit_realization, sample_quadruples};
use crate::table::{write_rows, Table};

/// Realization bookkeeping of one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub label: String,
    pub requested: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub failures: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub runner_version: String,
    pub core_version: String,
    pub experiment: Experiment,
    pub seed: u64,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub points: Vec<PointSummary>,
    pub config: Plan,
}

impl Manifest {
    pub fn load(out: &Path) -> Result<Self> {
        let path = out.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(RunError::io(&path))?;
        serde_json::from_str(&text).map_err(|e| RunError::data(&path, e))
    }
}

/// Everything one run produced, for callers that want the numbers
/// without reading the files back.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub manifest: Manifest,
    /// `(label, analysis)` per parameter point.
    pub analyses: Vec<(String, Analysis)>,
}

fn fingerprint(plan: &Plan, point: &CircuitPlan) -> String {
    // Ensemble size does not change what a realization records.
    let key = CircuitPlan {
        realizations: 0,
        ..point.clone()
    };
    serde_json::json!({
        "experiment": plan.common.experiment,
        "seed": plan.common.seed,
        "point": key,
    })
    .to_string()
}

fn point_dir(out: &Path, label: &str) -> PathBuf {
    out.join(label)
}

/// Runs one circuit parameter point.
pub fn run_circuit_point(plan: &Plan, point: &CircuitPlan) -> Result<(PointSummary, Analysis)> {
    let seed = plan.common.seed;
    let dir = point_dir(&plan.common.out, &point.label());
    fs::create_dir_all(&dir).map_err(RunError::io(&dir))?;
    let circuit = Circuit::new(point.params(seed))?.with_renormalization(point.renormalization());
    let quads = if point.quadruples > 0 && point.mi_realizations > 0 {
        sample_quadruples(point.sites, point.quadruples, point.min_separation, seed)
    } else {
        Vec::new()
    };
    let outcome = run_ensemble(&dir, &fingerprint(plan, point), point.realizations, plan.common.workers, |r| {
        circuit_realization(point, &circuit, &quads, r)
    })?;
    let analysis = analyze_with_bootstrap(plan.common.experiment, point, &outcome.averages, &outcome.raw, seed);
    analysis.write(&dir)?;
    Ok((
        PointSummary {
            label: point.label(),
            requested: outcome.requested,
            succeeded: outcome.succeeded,
            failed: outcome.failed,
            failures: outcome.failures,
        },
        analysis,
    ))
}

fn master_analysis(plan: &MasterPlan, snapshots: &[MasterState<f64>]) -> Analysis {
    let mut out = Analysis::default();
    let mut curves: Vec<Curve> = Vec::new();
    for s in snapshots.iter().filter(|s| s.t > 0.0) {
        match steady_state_check(s) {
            Ok(r) => out.fits.push((format!("steady_t{}", s.t), r)),
            Err(e) => out.skipped.push((format!("steady_t{}", s.t), e.to_string())),
        }
        curves.push(collapse_transform(s).unwrap_or_default());
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = curves.iter().flatten().filter(|p| p.1 > 0.0).copied().unzip();
    match fit_exponential(&xs, &ys, (plan.tail_window[0], plan.tail_window[1])) {
        Ok(r) => out.fits.push(("tail".into(), r)),
        Err(e) => out.skipped.push(("tail".into(), e.to_string())),
    }
    match collapse_spread(&curves, (plan.collapse_window[0], plan.collapse_window[1])) {
        Ok(s) => out.values.push(("collapse_spread".into(), s, None)),
        Err(e) => out.skipped.push(("collapse_spread".into(), e.to_string())),
    }
    if let [.., a, b] = snapshots {
        let (ta, tb) = (a.total(), b.total());
        out.values.push(("total_change".into(), ((tb - ta) / tb).abs(), None));
    }
    out
}

fn master_tables(snapshots: &[MasterState<f64>]) -> (Table, Table) {
    let mut snap = Table::new("snapshots", &["t", "n"]);
    let mut coll = Table::new("collapse", &["t", "phi"]);
    for s in snapshots {
        for n in 1..=s.n_max() {
            snap.push(&[s.t, n as f64], s.get(n));
        }
        for (phi, v) in collapse_transform(s).unwrap_or_default() {
            coll.push(&[s.t, phi], v);
        }
    }
    (snap, coll)
}

/// Integrates the master equation and writes snapshots and fits.
pub fn run_master(plan: &MasterPlan, out: &Path) -> Result<Analysis> {
    let state = MasterState::new(plan.n_max, plan.mu, plan.theta)?;
    let snapshots = integrate(state, plan.dt, plan.t_end, &plan.sample_times)?;
    let (snap, coll) = master_tables(&snapshots);
    snap.write_csv(&out.join("snapshots.csv"))?;
    coll.write_csv(&out.join("collapse.csv"))?;
    let mut analysis = master_analysis(plan, &snapshots);
    if let Some(last) = snapshots.last() {
        analysis.values.push(("clipped_entries".into(), last.clipped as f64, None));
        analysis.values.push(("worst_undershoot".into(), last.worst_undershoot, None));
    }
    analysis.write(out)?;
    Ok(analysis)
}

/// Mutual information of the four-site protocol for each β.
pub fn run_lightcone(plan: &LightconePlan, out: &Path) -> Result<Analysis> {
    let mut rows = Vec::new();
    for &b in &plan.betas {
        let i = mutual_information_14(&light_cone_protocol(b)?);
        rows.push(vec![b, i, i / (b * b)]);
    }
    let path = out.join("lightcone.csv");
    write_rows(&path, &["beta", "mutual_information", "ratio"].map(String::from), rows.into_iter())?;
    let mut analysis = Analysis::default();
    analysis
        .values
        .push(("unitary_mutual_information".into(), mutual_information_14(&unitary_sequence::<f64>()), None));
    analysis.write(out)?;
    Ok(analysis)
}

fn brownian_analysis(plan: &BrownianPlan, avg: Option<&crate::table::Averaged>) -> Analysis {
    let mut out = Analysis::default();
    let (Some(avg), Some(&t)) = (avg, plan.sample_times.last()) else {
        return out;
    };
    let (ns, fs): (Vec<f64>, Vec<f64>) = avg
        .rows
        .iter()
        .filter(|(k, _)| k[0] == t && k[1] >= 1.0)
        .map(|(k, s)| (k[1], s.mean))
        .unzip();
    let window = (3.0, (plan.sites / 8).max(4) as f64);
    match fit_power_law(&ns, &fs, window) {
        Ok(r) => out.fits.push(("weights_tail".into(), r)),
        Err(e) => out.skipped.push(("weights_tail".into(), e.to_string())),
    }
    out
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Runs every part of `plan` and writes the manifest last.
pub fn run(plan: &Plan) -> Result<RunOutput> {
    let started = Instant::now();
    let started_unix = now_unix();
    let out = &plan.common.out;
    fs::create_dir_all(out).map_err(RunError::io(out))?;
    let mut points = Vec::new();
    let mut analyses = Vec::new();
    match &plan.work {
        Work::Circuit { points: ps } => {
            for p in ps {
                let (summary, analysis) = run_circuit_point(plan, p)?;
                analyses.push((summary.label.clone(), analysis));
                points.push(summary);
            }
        }
        Work::Master(m) => analyses.push(("master".into(), run_master(m, out)?)),
        Work::Lightcone(l) => analyses.push(("lightcone".into(), run_lightcone(l, out)?)),
        Work::Brownian(b) => {
            let fp = serde_json::json!({ "seed": plan.common.seed, "plan": BrownianPlan { realizations: 0, ..b.clone() } })
                .to_string();
            let outcome = run_ensemble(out, &fp, b.realizations, plan.common.workers, |r| {
                brownian_realization(b, plan.common.seed, r)
            })?;
            let analysis = brownian_analysis(b, outcome.table("weights"));
            analysis.write(out)?;
            analyses.push(("brownian".into(), analysis));
            points.push(PointSummary {
                label: "brownian".into(),
                requested: outcome.requested,
                succeeded: outcome.succeeded,
                failed: outcome.failed,
                failures: outcome.failures,
            });
        }
    }
    let manifest = Manifest {
        tool: "ffcirc".into(),
        runner_version: env!("CARGO_PKG_VERSION").into(),
        core_version: ffcirc::VERSION.into(),
        experiment: plan.common.experiment,
        seed: plan.common.seed,
        started_unix,
        wall_time_s: started.elapsed().as_secs_f64(),
        points,
        config: plan.clone(),
    };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::data(&path, e))?;
    fs::write(&path, text).map_err(RunError::io(&path))?;
    Ok(RunOutput { manifest, analyses })
}

/// Recomputes `fits.csv` and `values.csv` of a finished run from its
/// stored tables.
pub fn refit(out: &Path) -> Result<Vec<(String, Analysis)>> {
    let manifest = Manifest::load(out)?;
    let plan = &manifest.config;
    let mut analyses = Vec::new();
    match &plan.work {
        Work::Circuit { points } => {
            for p in points {
                let dir = point_dir(out, &p.label());
                let (averages, raw) = load_point(&dir)?;
                let a = if raw.is_empty() {
                    analyze_circuit(plan.common.experiment, p, &averages)
                } else {
                    analyze_with_bootstrap(plan.common.experiment, p, &averages, &raw, plan.common.seed)
                };
                a.write(&dir)?;
                analyses.push((p.label(), a));
            }
        }
        Work::Master(m) => {
            let path = out.join("snapshots.csv");
            let snap = Table::read_csv("snapshots", &path)?;
            let mut states: Vec<MasterState<f64>> = Vec::new();
            for (k, v) in &snap.rows {
                if states.last().map_or(true, |s| s.t != k[0]) {
                    let mut s = MasterState::new(m.n_max, m.mu, m.theta)?;
                    s.t = k[0];
                    states.push(s);
                }
                let s = states.last_mut().expect("pushed");
                let n = k[1] as usize;
                if n == 0 || n > m.n_max {
                    return Err(RunError::data(&path, format!("n = {n} outside 1..={}", m.n_max)));
                }
                s.f[n - 1] = *v;
            }
            let a = master_analysis(m, &states);
            a.write(out)?;
            analyses.push(("master".into(), a));
        }
        Work::Lightcone(l) => analyses.push(("lightcone".into(), run_lightcone(l, out)?)),
        Work::Brownian(b) => {
            let (averages, _) = load_point(out)?;
            let a = brownian_analysis(b, averages.iter().find(|a| a.name == "weights"));
            a.write(out)?;
            analyses.push(("brownian".into(), a));
        }
    }
    Ok(analyses)
}
