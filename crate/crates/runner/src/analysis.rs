//! Per-experiment fits of ensemble averages, with bootstrap errors.
//!
//! Output of one parameter point:
//!
//! * `fits.csv`: `name,slope,intercept,r_squared,window_lo,window_hi,points,realizations,std_error`
//! * `values.csv`: `name,value,std_error` for derived scalars.

use std::collections::BTreeMap;
use std::path::Path;

use ffcirc::{cross_ratio_periodic, linear_fit, FitReport, RectangleMap};

use crate::config::{CircuitPlan, Experiment};
use crate::error::{Result, RunError};
use crate::fits::{
    binned_collapse_spread, binned_log_scatter, bootstrap_indices, early_time_collapse, fit_entropy_scaling,
    fit_power_law, scan_collapse_parameter, std_dev, Curve, EntropyPoint, ScalingGeometry, BOOTSTRAP_RESAMPLES,
};
use crate::table::{average, Averaged, Table};

/// Fits and derived values of one parameter point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Analysis {
    pub fits: Vec<(String, FitReport)>,
    pub values: Vec<(String, f64, Option<f64>)>,
    /// Analyses that could not be carried out, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl Analysis {
    pub fn fit(&self, name: &str) -> Option<&FitReport> {
        self.fits.iter().find(|f| f.0 == name).map(|f| &f.1)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.0 == name).map(|v| v.1)
    }

    fn push_fit(&mut self, name: String, r: ffcirc::Result<FitReport>) -> Option<FitReport> {
        match r {
            Ok(r) => {
                self.fits.push((name, r.clone()));
                Some(r)
            }
            Err(e) => {
                self.skipped.push((name, e.to_string()));
                None
            }
        }
    }

    fn push_value(&mut self, name: impl Into<String>, v: f64) {
        self.values.push((name.into(), v, None));
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("fits.csv");
        let err = |p: &Path| {
            let p = p.to_path_buf();
            move |e: csv::Error| RunError::data(&p, e)
        };
        let mut w = csv::Writer::from_path(&path).map_err(err(&path))?;
        w.write_record([
            "name", "slope", "intercept", "r_squared", "window_lo", "window_hi", "points", "realizations", "std_error",
        ])
        .map_err(err(&path))?;
        for (name, r) in &self.fits {
            w.write_record([
                name.clone(),
                r.slope.to_string(),
                r.intercept.to_string(),
                r.r_squared.to_string(),
                r.window.0.to_string(),
                r.window.1.to_string(),
                r.points.to_string(),
                r.realizations.map_or_else(String::new, |n| n.to_string()),
                r.std_error.to_string(),
            ])
            .map_err(err(&path))?;
        }
        w.flush().map_err(RunError::io(&path))?;

        let path = dir.join("values.csv");
        let mut w = csv::Writer::from_path(&path).map_err(err(&path))?;
        w.write_record(["name", "value", "std_error"]).map_err(err(&path))?;
        for (name, v, e) in &self.values {
            w.write_record([name.clone(), v.to_string(), e.map_or_else(String::new, |e| e.to_string())])
                .map_err(err(&path))?;
        }
        w.flush().map_err(RunError::io(&path))
    }
}

fn table<'a>(avgs: &'a [Averaged], name: &str) -> Option<&'a Averaged> {
    avgs.iter().find(|a| a.name == name)
}

/// Means of rows whose leading key columns equal `prefix`, keyed by the
/// remaining columns.
fn rows(avg: &Averaged, prefix: &[f64]) -> Vec<(Vec<f64>, f64)> {
    avg.rows
        .iter()
        .filter(|(k, _)| k.starts_with(prefix))
        .map(|(k, s)| (k[prefix.len()..].to_vec(), s.mean))
        .collect()
}

fn within(x: f64, w: [f64; 2]) -> bool {
    x >= w[0] && x <= w[1]
}

fn entropy_points(avg: &Averaged, t: f64, n: f64, window: [f64; 2]) -> Vec<EntropyPoint> {
    rows(avg, &[t, n])
        .into_iter()
        .filter(|(k, _)| within(k[0], window))
        .map(|(k, s)| EntropyPoint { t, l_a: k[0], s })
        .collect()
}

fn correlation_curve(avg: &Averaged, t: f64) -> Curve {
    rows(avg, &[t]).into_iter().map(|(k, v)| (k[0], v)).collect()
}

fn steps_in(plan: &CircuitPlan, range: [usize; 2]) -> Vec<f64> {
    plan.sample_steps
        .iter()
        .filter(|&&t| t >= range[0] && t <= range[1])
        .map(|&t| t as f64)
        .collect()
}

/// Fits of one circuit parameter point from its averaged tables.
pub fn analyze_circuit(experiment: Experiment, plan: &CircuitPlan, avgs: &[Averaged]) -> Analysis {
    let mut out = Analysis::default();
    let l = plan.sites as f64;
    let last = *plan.sample_steps.last().expect("validated") as f64;
    let entropy = table(avgs, "entropy");
    let correlation = table(avgs, "correlation");
    let half = (plan.sites / 2) as f64;
    match experiment {
        Experiment::Beta0 => {
            if let Some(e) = entropy {
                for &n in &plan.renyi {
                    let (ts, ss): (Vec<f64>, Vec<f64>) = plan
                        .sample_steps
                        .iter()
                        .filter_map(|&t| e.rows.iter().find(|(k, _)| k[..] == [t as f64, n, half]).map(|r| (t as f64, r.1.mean)))
                        .unzip();
                    let w = plan.growth_window;
                    out.push_fit(format!("entropy_growth_n{n}"), fit_power_law(&ts, &ss, (w[0], w[1])));
                }
            }
            if let Some(c) = correlation {
                let ts = steps_in(plan, plan.collapse_steps);
                for (name, power) in [("collapse_spread_sqrt_t", 0.5), ("collapse_spread_t2", 2.0)] {
                    let curves: Vec<Curve> = ts
                        .iter()
                        .map(|&t| correlation_curve(c, t).iter().map(|&(r, v)| (r * r / t, t.powf(power) * v)).collect())
                        .collect();
                    match binned_collapse_spread(&curves, (plan.collapse_window[0], plan.collapse_window[1]), 8) {
                        Ok(s) => out.push_value(name, s),
                        Err(e) => out.skipped.push((name.into(), e.to_string())),
                    }
                }
            }
        }
        Experiment::SteadyState => {
            if let Some(c) = correlation {
                let (xs, ys): (Vec<f64>, Vec<f64>) = correlation_curve(c, last)
                    .into_iter()
                    .filter(|p| within(p.0, plan.correlation_window))
                    .map(|(r, v)| ((std::f64::consts::PI * r / l).sin(), v))
                    .unzip();
                let fit = fit_power_law(&xs, &ys, (0.0, 1.0)).map(|mut r| {
                    r.window = (plan.correlation_window[0], plan.correlation_window[1].min(half));
                    r
                });
                out.push_fit("correlation".into(), fit);
            }
            if let Some(e) = entropy {
                let mut slopes = BTreeMap::new();
                for &n in &plan.renyi {
                    let pts = entropy_points(e, last, n, plan.entropy_window);
                    match fit_entropy_scaling(&pts, n, ScalingGeometry::Periodic { sites: l }) {
                        Ok(s) => {
                            out.push_value(format!("c1_n{n}"), s.c1);
                            slopes.insert(n.to_bits(), s.report.slope);
                            out.fits.push((format!("entropy_n{n}"), s.report));
                        }
                        Err(err) => out.skipped.push((format!("entropy_n{n}"), err.to_string())),
                    }
                }
                if let (Some(s1), Some(s2)) = (slopes.get(&1f64.to_bits()), slopes.get(&2f64.to_bits())) {
                    out.push_value("renyi_slope_ratio", s2 / s1);
                }
                if plan.sample_steps.len() >= 2 {
                    let prev = plan.sample_steps[plan.sample_steps.len() - 2] as f64;
                    let at = |t: f64| e.rows.iter().find(|(k, _)| k[..] == [t, 1.0, half]).map(|r| r.1.mean);
                    if let (Some(a), Some(b)) = (at(prev), at(last)) {
                        out.push_value("half_chain_drift", ((b - a) / b).abs());
                    }
                }
            }
            if let Some(mi) = table(avgs, "mutual_information") {
                let pts: Vec<(f64, f64)> = rows(mi, &[last, 1.0])
                    .into_iter()
                    .filter_map(|(q, v)| cross_ratio_periodic(q[0], q[1], q[2], q[3], l).ok().map(|eta| (eta, v)))
                    .collect();
                mutual_information_fits(&mut out, "mi", &pts);
            }
        }
        Experiment::Dynamics => {
            if let Some(c) = correlation {
                let tables: Vec<(f64, Curve)> =
                    steps_in(plan, plan.collapse_steps).into_iter().map(|t| (t, correlation_curve(c, t))).collect();
                let w = |w: [f64; 2]| (w[0], w[1]);
                match early_time_collapse(&tables, w(plan.collapse_window), w(plan.tail_window), None, 1e-300) {
                    Ok(rep) => {
                        out.push_value("collapse_spread", rep.spread);
                        out.fits.push(("correlation_tail".into(), rep.tail));
                    }
                    Err(e) => out.skipped.push(("correlation_tail".into(), e.to_string())),
                }
                let (xs, ys): (Vec<f64>, Vec<f64>) = steps_in(plan, plan.small_r_steps)
                    .into_iter()
                    .flat_map(|t| correlation_curve(c, t).into_iter().map(move |(r, v)| (r / t, t * t * v)))
                    .unzip();
                out.push_fit("correlation_small_r".into(), fit_power_law(&xs, &ys, w(plan.small_r_window)));
            }
            if let Some(e) = entropy {
                for &n in &plan.renyi {
                    let (lt, ss): (Vec<f64>, Vec<f64>) = plan
                        .sample_steps
                        .iter()
                        .filter(|&&t| within(t as f64, plan.growth_window))
                        .filter_map(|&t| {
                            e.rows.iter().find(|(k, _)| k[..] == [t as f64, n, half]).map(|r| ((t as f64).ln(), r.1.mean))
                        })
                        .unzip();
                    if let Some(r) = out.push_fit(format!("entropy_time_n{n}"), linear_fit(&lt, &ss)) {
                        out.push_value(format!("c1_time_n{n}"), 2.0 * r.slope / (1.0 + 1.0 / n));
                    }
                    let pts: Vec<EntropyPoint> = plan
                        .sample_steps
                        .iter()
                        .flat_map(|&t| entropy_points(e, t as f64, n, [0.0, f64::INFINITY]))
                        .collect();
                    match scan_collapse_parameter(&pts, n, l, plan.a_scan) {
                        Ok((a, s)) => {
                            out.push_value(format!("best_a_n{n}"), a);
                            out.push_value(format!("c1_rectangle_n{n}"), s.c1);
                            out.fits.push((format!("rectangle_entropy_n{n}"), s.report));
                        }
                        Err(err) => out.skipped.push((format!("rectangle_entropy_n{n}"), err.to_string())),
                    }
                }
            }
            if let (Some(mi), Some(a)) = (table(avgs, "edge_mutual_information"), out.value("best_a_n1")) {
                let mut pts = Vec::new();
                for t in mi.distinct("t") {
                    let Ok(map) = RectangleMap::new(l, t, a) else { continue };
                    for (k, v) in rows(mi, &[t, 1.0]) {
                        if let Ok(eta) = map.eta(k[0], k[1]) {
                            pts.push((eta, v));
                        }
                    }
                }
                mutual_information_fits(&mut out, "edge_mi", &pts);
            }
        }
        _ => {}
    }
    out
}

fn mutual_information_fits(out: &mut Analysis, prefix: &str, pts: &[(f64, f64)]) {
    match binned_log_scatter(pts, 10, 10) {
        Ok(s) => out.push_value(format!("{prefix}_scatter"), s),
        Err(e) => out.skipped.push((format!("{prefix}_scatter"), e.to_string())),
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().filter(|p| p.0 <= 0.1).copied().unzip();
    out.push_fit(format!("{prefix}_small_eta"), fit_power_law(&xs, &ys, (0.0, 0.1)));
}

/// Averages the realizations picked by `indices` (repeats allowed).
fn resample(raw: &[&Vec<Table>], indices: &[usize]) -> Vec<Averaged> {
    let mut by_name: BTreeMap<&str, Vec<&Table>> = BTreeMap::new();
    for &i in indices {
        for t in raw[i] {
            by_name.entry(t.name.as_str()).or_default().push(t);
        }
    }
    by_name.values().filter_map(|ts| average(ts).ok()).collect()
}

/// [`analyze_circuit`] on the full ensemble, with standard errors from
/// `BOOTSTRAP_RESAMPLES` resamples of the realizations.
pub fn analyze_with_bootstrap(
    experiment: Experiment,
    plan: &CircuitPlan,
    averages: &[Averaged],
    raw: &BTreeMap<usize, Vec<Table>>,
    seed: u64,
) -> Analysis {
    let mut base = analyze_circuit(experiment, plan, averages);
    let reals: Vec<&Vec<Table>> = raw.values().collect();
    for (_, r) in &mut base.fits {
        r.realizations = Some(reals.len());
    }
    if reals.len() < 2 {
        return base;
    }
    let mut slopes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for round in 0..BOOTSTRAP_RESAMPLES {
        let idx = bootstrap_indices(seed, round, reals.len());
        let a = analyze_circuit(experiment, plan, &resample(&reals, &idx));
        for (name, r) in a.fits {
            slopes.entry(name).or_default().push(r.slope);
        }
        for (name, v, _) in a.values {
            values.entry(name).or_default().push(v);
        }
    }
    for (name, r) in &mut base.fits {
        if let Some(s) = slopes.get(name.as_str()).and_then(|s| std_dev(s)) {
            r.std_error = s;
        }
    }
    for (name, _, e) in &mut base.values {
        *e = values.get(name.as_str()).and_then(|s| std_dev(s));
    }
    base
}
