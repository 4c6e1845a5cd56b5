//! Fits and collapse measures applied to ensemble averages.

use std::f64::consts::PI;

use ffcirc::circuit::{stream, Purpose};
use ffcirc::{fit_log_log, linear_fit, Error, FitReport, RectangleMap};
use rand::Rng;

pub const BOOTSTRAP_RESAMPLES: usize = 200;

type CoreResult<T> = ffcirc::Result<T>;

/// Log-log least squares over `x ∈ window`.
pub fn fit_power_law(xs: &[f64], ys: &[f64], window: (f64, f64)) -> CoreResult<FitReport> {
    fit_log_log(xs, ys, window)
}

/// Least squares of `ln y` on `x` over `x ∈ window`: `y ∝ exp(slope·x)`.
pub fn fit_exponential(xs: &[f64], ys: &[f64], window: (f64, f64)) -> CoreResult<FitReport> {
    let (mut fx, mut fy) = (Vec::new(), Vec::new());
    for (&x, &y) in xs.iter().zip(ys) {
        if x < window.0 || x > window.1 {
            continue;
        }
        if !(y > 0.0) {
            return Err(Error::InvalidArgument(format!("non-positive value {y} at x = {x}")));
        }
        fx.push(x);
        fy.push(y.ln());
    }
    linear_fit(&fx, &fy)
}

/// Resampling indices for bootstrap round `round`.
pub fn bootstrap_indices(seed: u64, round: usize, count: usize) -> Vec<usize> {
    let mut rng = stream(seed, round as u64, Purpose::Bootstrap, 0);
    (0..count).map(|_| rng.gen_range(0..count)).collect()
}

/// Sample standard deviation, `None` below two values.
pub fn std_dev(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Where an entropy sample sits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPoint {
    pub t: f64,
    pub l_a: f64,
    pub s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalingGeometry {
    /// Ring of `sites`: abscissa `ln[(L/π) sin(πL_A/L)]`.
    Periodic { sites: f64 },
    /// Open chain after time `t` with aspect parameter `a`: abscissa `ln ξ`.
    Rectangle { sites: f64, a: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyScaling {
    pub report: FitReport,
    pub c1: f64,
}

/// Linear fit of `S_n` against the log of the conformal length; the slope
/// is `c₁(1+1/n)` on a ring and `−(c₁/2)(1+1/n)` for the rectangle.
pub fn fit_entropy_scaling(points: &[EntropyPoint], n: f64, geometry: ScalingGeometry) -> CoreResult<EntropyScaling> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!("{} entropy points, need 4", points.len())));
    }
    let xs = match geometry {
        ScalingGeometry::Periodic { sites } => points
            .iter()
            .map(|p| ((sites / PI) * (PI * p.l_a / sites).sin()).ln())
            .collect::<Vec<f64>>(),
        ScalingGeometry::Rectangle { sites, a } => {
            let mut maps: Vec<(f64, RectangleMap<f64>)> = Vec::new();
            let mut xs = Vec::with_capacity(points.len());
            for p in points {
                let map = match maps.iter().find(|(t, _)| *t == p.t) {
                    Some((_, m)) => m,
                    None => {
                        maps.push((p.t, RectangleMap::new(sites, p.t, a)?));
                        &maps.last().expect("just pushed").1
                    }
                };
                xs.push(map.xi(p.l_a)?.ln());
            }
            xs
        }
    };
    let ys: Vec<f64> = points.iter().map(|p| p.s).collect();
    let mut report = linear_fit(&xs, &ys)?;
    let lo = points.iter().map(|p| p.l_a).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.l_a).fold(f64::NEG_INFINITY, f64::max);
    report.window = (lo, hi);
    let factor = 1.0 + 1.0 / n;
    let c1 = match geometry {
        ScalingGeometry::Periodic { .. } => report.slope / factor,
        ScalingGeometry::Rectangle { .. } => -2.0 * report.slope / factor,
    };
    Ok(EntropyScaling { report, c1 })
}

/// Values `first, first+step, …` up to `last` inclusive.
pub fn scan_values(a_scan: [f64; 3]) -> Vec<f64> {
    let [first, last, step] = a_scan;
    if !(step > 0.0) || last < first {
        return Vec::new();
    }
    let count = ((last - first) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| first + step * k as f64).collect()
}

/// Scans the rectangle aspect parameter and keeps the value whose pooled
/// `S` vs `ln ξ` fit has the largest R².
pub fn scan_collapse_parameter(
    points: &[EntropyPoint],
    n: f64,
    sites: f64,
    a_scan: [f64; 3],
) -> CoreResult<(f64, EntropyScaling)> {
    let values = scan_values(a_scan);
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty a range".into()));
    }
    let mut best: Option<(f64, EntropyScaling)> = None;
    for a in values {
        let Ok(fit) = fit_entropy_scaling(points, n, ScalingGeometry::Rectangle { sites, a }) else {
            continue;
        };
        if best.as_ref().map_or(true, |b| fit.report.r_squared > b.1.report.r_squared) {
            best = Some((a, fit));
        }
    }
    best.ok_or_else(|| Error::InsufficientData("no a value admitted a fit".into()))
}

/// A curve `y(x)` sampled at increasing `x`.
pub type Curve = Vec<(f64, f64)>;

fn interpolate(curve: &[(f64, f64)], x: f64) -> f64 {
    let k = curve.partition_point(|p| p.0 < x);
    if k == 0 {
        return curve[0].1;
    }
    if k == curve.len() {
        return curve[k - 1].1;
    }
    let ((x0, y0), (x1, y1)) = (curve[k - 1], curve[k]);
    let w = (x - x0) / (x1 - x0);
    if y0 > 0.0 && y1 > 0.0 {
        (y0.ln() * (1.0 - w) + y1.ln() * w).exp()
    } else {
        y0 * (1.0 - w) + y1 * w
    }
}

/// Largest relative spread `(max − min)/mean` across curves, evaluated at
/// every sample abscissa inside `window` that all curves cover. Curves
/// are interpolated linearly in `ln y`.
pub fn collapse_spread(curves: &[Curve], window: (f64, f64)) -> CoreResult<f64> {
    if curves.len() < 2 {
        return Err(Error::InsufficientData("need at least two curves".into()));
    }
    let mut sorted: Vec<Curve> = curves.to_vec();
    for c in &mut sorted {
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        if c.is_empty() {
            return Err(Error::InsufficientData("empty curve".into()));
        }
    }
    let lo = sorted.iter().map(|c| c[0].0).fold(window.0, f64::max);
    let hi = sorted.iter().map(|c| c[c.len() - 1].0).fold(window.1, f64::min);
    let mut worst: Option<f64> = None;
    for c in &sorted {
        for &(x, _) in c.iter().filter(|p| p.0 >= lo && p.0 <= hi) {
            let ys: Vec<f64> = sorted.iter().map(|c| interpolate(c, x)).collect();
            let mean = ys.iter().sum::<f64>() / ys.len() as f64;
            let (mn, mx) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
            let s = (mx - mn) / mean.abs();
            worst = Some(worst.map_or(s, |w: f64| w.max(s)));
        }
    }
    worst.ok_or_else(|| Error::InsufficientData("curves share no abscissa inside the window".into()))
}

/// Averages a curve inside `bins` log-spaced bins of `x` over `window`;
/// empty bins come out as `None`.
pub fn log_bin(curve: &[(f64, f64)], window: (f64, f64), bins: usize) -> Vec<Option<(f64, f64)>> {
    let (lo, hi) = (window.0.ln(), window.1.ln());
    let width = (hi - lo) / bins as f64;
    let mut acc = vec![(0.0, 0.0, 0usize); bins];
    for &(x, y) in curve {
        if !(x >= window.0 && x <= window.1) {
            continue;
        }
        let b = (((x.ln() - lo) / width) as usize).min(bins - 1);
        acc[b].0 += x.ln();
        acc[b].1 += y;
        acc[b].2 += 1;
    }
    acc.into_iter()
        .map(|(sx, sy, n)| (n > 0).then(|| ((sx / n as f64).exp(), sy / n as f64)))
        .collect()
}

/// [`collapse_spread`] of the curves after averaging each within
/// log-spaced bins of `x`; suppresses point-to-point noise.
pub fn binned_collapse_spread(curves: &[Curve], window: (f64, f64), bins: usize) -> CoreResult<f64> {
    if bins == 0 || !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::InvalidArgument("need bins > 0 and a positive window".into()));
    }
    let binned: Vec<Curve> = curves
        .iter()
        .map(|c| log_bin(c, window, bins).into_iter().flatten().collect())
        .collect();
    collapse_spread(&binned, window)
}

/// Early-time correlation data after the `(r/T, T²|C|²)` transform.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseReport {
    pub spread: f64,
    /// Pooled `ln(T²|C|²)` vs `r/T` over the tail window; `slope` is minus
    /// the decay rate.
    pub tail: FitReport,
    /// Pooled log-log fit of `T²|C|²` vs `r/T` over the small-`r/T` window.
    pub small_r: Option<FitReport>,
}

/// Transforms `(T, [(r, |C|²)])` tables to `(r/T, T²|C|²)` curves.
pub fn ballistic_curves(tables: &[(f64, Curve)]) -> Vec<Curve> {
    tables
        .iter()
        .map(|(t, c)| c.iter().map(|&(r, v)| (r / t, t * t * v)).collect())
        .collect()
}

/// Collapse report of open-chain correlation data. Points below `floor`
/// are left out of the tail fit.
pub fn early_time_collapse(
    tables: &[(f64, Curve)],
    spread_window: (f64, f64),
    tail_window: (f64, f64),
    small_r_window: Option<(f64, f64)>,
    floor: f64,
) -> CoreResult<CollapseReport> {
    if tables.len() < 2 {
        return Err(Error::InsufficientData("need at least two times".into()));
    }
    let curves = ballistic_curves(tables);
    let spread = binned_collapse_spread(&curves, spread_window, 8)?;
    let pooled: Vec<(f64, f64)> = curves.iter().flatten().copied().collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pooled.iter().filter(|p| p.1 > floor).copied().unzip();
    let tail = fit_exponential(&xs, &ys, tail_window)?;
    let small_r = match small_r_window {
        Some(w) => Some(fit_power_law(&xs, &ys, w)?),
        None => None,
    };
    Ok(CollapseReport { spread, tail, small_r })
}

/// Scatter of `ln y` about a straight line in `(ln x, ln y)`, computed in
/// log-spaced bins of `x`: the largest RMS residual over bins holding at
/// least `min_points`. A perfect single curve gives 0.
pub fn binned_log_scatter(points: &[(f64, f64)], bins: usize, min_points: usize) -> CoreResult<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pts.len() < min_points.max(3) || bins == 0 {
        return Err(Error::InsufficientData("too few positive points".into()));
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut worst: Option<f64> = None;
    for b in 0..bins {
        let (a, z) = (lo + width * b as f64, lo + width * (b + 1) as f64);
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts
            .iter()
            .filter(|p| p.0 >= a && (p.0 < z || (b + 1 == bins && p.0 <= z)))
            .copied()
            .unzip();
        if xs.len() < min_points.max(3) {
            continue;
        }
        let Ok(fit) = linear_fit(&xs, &ys) else { continue };
        let rms = (xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - fit.slope * x - fit.intercept).powi(2))
            .sum::<f64>()
            / xs.len() as f64)
            .sqrt();
        worst = Some(worst.map_or(rms, |w: f64| w.max(rms)));
    }
    worst.ok_or_else(|| Error::InsufficientData("no populated bin".into()))
}
