//! Experiment configuration.
//!
//! A config file is flat TOML: one `key = value` per line, values being
//! numbers, strings or arrays of numbers. Every key is optional except
//! that the experiment must be known from the file or the CLI subcommand.
//!
//! ```toml
//! experiment = "steady_state"
//! sites = 200
//! beta = [0.4, 0.8, 1.6]
//! realizations = 100
//! ```
//!
//! Unknown keys are rejected. [`ExperimentConfig::resolve`] fills in the
//! per-experiment defaults and validates the result into a [`Plan`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ffcirc::{Boundary, BrownianParams, CircuitParams, Renormalization};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Beta0,
    SteadyState,
    Dynamics,
    Master,
    Lightcone,
    Brownian,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Beta0 => "beta0",
            Experiment::SteadyState => "steady_state",
            Experiment::Dynamics => "dynamics",
            Experiment::Master => "master",
            Experiment::Lightcone => "lightcone",
            Experiment::Brownian => "brownian",
        }
    }
}

/// A number or a list of numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Contents of a config file, before defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,

    pub sites: Option<usize>,
    pub particles: Option<usize>,
    pub tau: Option<f64>,
    /// Imaginary time per step; a list runs one parameter point per value.
    pub beta: Option<OneOrMany>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub boundary: Option<String>,
    pub steps: Option<usize>,
    /// `every_step` or `adaptive`.
    pub renormalization: Option<String>,
    pub sample_steps: Option<Vec<usize>>,
    pub subsystem_sizes: Option<Vec<usize>>,
    pub renyi: Option<Vec<f64>>,
    /// Number of evenly spaced interval positions averaged on a ring.
    pub interval_starts: Option<usize>,
    pub quadruples: Option<usize>,
    /// Smallest allowed distance between neighbouring quadruple endpoints.
    pub min_separation: Option<usize>,
    /// Mutual information is measured on the first this-many realizations.
    pub mi_realizations: Option<usize>,
    /// Interval lengths paired up for edge-anchored mutual information.
    pub mi_sizes: Option<Vec<usize>>,
    /// `[first, last, step]` of the rectangle aspect parameter scan.
    pub a_scan: Option<[f64; 3]>,
    pub correlation_window: Option<[f64; 2]>,
    pub entropy_window: Option<[f64; 2]>,
    pub growth_window: Option<[f64; 2]>,
    pub collapse_steps: Option<[usize; 2]>,
    pub small_r_steps: Option<[usize; 2]>,

    pub n_max: Option<usize>,
    pub mu: Option<f64>,
    pub theta: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_times: Option<Vec<f64>>,
    pub collapse_window: Option<[f64; 2]>,
    pub tail_window: Option<[f64; 2]>,
    pub small_r_window: Option<[f64; 2]>,

    pub noise_a: Option<f64>,
    pub noise_b: Option<f64>,
}

/// Settings shared by every experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Common {
    pub experiment: Experiment,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
}

/// One circuit parameter point and what to measure on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitPlan {
    pub sites: usize,
    pub particles: usize,
    pub tau: f64,
    pub beta: f64,
    pub p1: f64,
    pub p2: f64,
    pub boundary: String,
    pub steps: usize,
    pub renormalization: String,
    pub realizations: usize,
    pub sample_steps: Vec<usize>,
    pub subsystem_sizes: Vec<usize>,
    pub renyi: Vec<f64>,
    pub interval_starts: usize,
    pub quadruples: usize,
    pub min_separation: usize,
    pub mi_realizations: usize,
    pub mi_sizes: Vec<usize>,
    pub a_scan: [f64; 3],
    pub correlation_window: [f64; 2],
    pub entropy_window: [f64; 2],
    pub growth_window: [f64; 2],
    pub collapse_steps: [usize; 2],
    pub small_r_steps: [usize; 2],
    pub collapse_window: [f64; 2],
    pub tail_window: [f64; 2],
    pub small_r_window: [f64; 2],
}

impl CircuitPlan {
    pub fn boundary(&self) -> Boundary {
        self.boundary.parse().expect("validated")
    }

    pub fn params(&self, seed: u64) -> CircuitParams<f64> {
        let mut p = CircuitParams::new(self.sites, self.particles);
        p.tau = self.tau;
        p.beta = self.beta;
        p.p1 = self.p1;
        p.p2 = self.p2;
        p.boundary = self.boundary();
        p.steps = self.steps;
        p.seed = seed;
        p
    }

    pub fn renormalization(&self) -> Renormalization {
        match self.renormalization.as_str() {
            "every_step" => Renormalization::EveryStep,
            _ => Renormalization::adaptive(),
        }
    }

    /// Directory name of this parameter point.
    pub fn label(&self) -> String {
        format!("beta_{}", self.beta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasterPlan {
    pub n_max: usize,
    pub mu: f64,
    pub theta: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_times: Vec<f64>,
    pub collapse_window: [f64; 2],
    pub tail_window: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightconePlan {
    pub betas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianPlan {
    pub sites: usize,
    pub particles: usize,
    pub noise_a: f64,
    pub noise_b: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_times: Vec<f64>,
    pub realizations: usize,
}

impl BrownianPlan {
    pub fn params(&self) -> BrownianParams<f64> {
        BrownianParams {
            a: self.noise_a,
            b: self.noise_b,
            dt: self.dt,
        }
    }
}

/// A validated, fully defaulted configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Work {
    Circuit { points: Vec<CircuitPlan> },
    Master(MasterPlan),
    Lightcone(LightconePlan),
    Brownian(BrownianPlan),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub common: Common,
    pub work: Work,
}

fn bad(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

impl FromStr for ExperimentConfig {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| bad(e.to_string()))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    pub fn resolve(self) -> Result<Plan> {
        let experiment = self
            .experiment
            .ok_or_else(|| bad("no experiment given"))?;
        if self.realizations == Some(0) {
            return Err(bad("realizations must be at least 1"));
        }
        let workers = match self.workers {
            Some(0) => return Err(bad("workers must be at least 1")),
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let common = Common {
            experiment,
            seed: self.seed.unwrap_or(0),
            workers,
            out: self
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("runs").join(experiment.name())),
        };
        let work = match experiment {
            Experiment::Master => Work::Master(self.master()?),
            Experiment::Lightcone => Work::Lightcone(LightconePlan {
                betas: self.beta.clone().map_or_else(
                    || vec![0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0],
                    OneOrMany::into_vec,
                ),
            }),
            Experiment::Brownian => Work::Brownian(self.brownian()?),
            _ => Work::Circuit {
                points: self.circuit(experiment)?,
            },
        };
        if let Work::Lightcone(p) = &work {
            if p.betas.is_empty() || p.betas.iter().any(|b| !b.is_finite()) {
                return Err(bad("beta values must be finite"));
            }
        }
        Ok(Plan { common, work })
    }

    fn circuit(&self, experiment: Experiment) -> Result<Vec<CircuitPlan>> {
        let (l_default, boundary, beta, realizations) = match experiment {
            Experiment::Beta0 => (512, "open", 0.0, 100),
            Experiment::SteadyState => (200, "periodic", 0.5, 200),
            _ => (400, "open", 0.8, 300),
        };
        let l = self.sites.unwrap_or(l_default);
        if l < 8 {
            return Err(bad("at least 8 sites are required"));
        }
        let steps = self.steps.unwrap_or(match experiment {
            Experiment::Beta0 => 200,
            Experiment::SteadyState => 4 * l,
            _ => 100,
        });
        let sample_steps = self.sample_steps.clone().unwrap_or_else(|| match experiment {
            Experiment::Beta0 => [5, 10, 15, 20, 30, 40, 50, 60, 70, 80, 90, 100, 120, 140, 160, 180, 200]
                .into_iter()
                .filter(|&t| t <= steps)
                .collect(),
            Experiment::SteadyState => vec![steps.saturating_sub(l).max(1), steps],
            _ => (2..=10).map(|k| 10 * k).filter(|&t| t <= steps).collect(),
        });
        let subsystem_sizes = self.subsystem_sizes.clone().unwrap_or_else(|| match experiment {
            Experiment::Beta0 => vec![l / 2],
            Experiment::SteadyState => (1..=l / 2).collect(),
            _ => (1..l / 20).map(|k| 20 * k).collect(),
        });
        let boundary = self.boundary.clone().unwrap_or_else(|| boundary.to_string());
        let parsed: Boundary = boundary.parse().map_err(|e: ffcirc::Error| bad(e.to_string()))?;
        let renormalization = self.renormalization.clone().unwrap_or_else(|| "adaptive".into());
        if !matches!(renormalization.as_str(), "every_step" | "adaptive") {
            return Err(bad(format!("unknown renormalization `{renormalization}`")));
        }
        let betas = self.beta.clone().map_or_else(|| vec![beta], OneOrMany::into_vec);
        if betas.is_empty() {
            return Err(bad("beta list is empty"));
        }
        let half = l as f64 / 2.0;
        let base = CircuitPlan {
            sites: l,
            particles: self.particles.unwrap_or(l / 2),
            tau: self.tau.unwrap_or(1.0),
            beta,
            p1: self.p1.unwrap_or(0.5),
            p2: self.p2.unwrap_or(0.5),
            boundary,
            steps,
            renormalization,
            realizations: self.realizations.unwrap_or(realizations),
            sample_steps,
            subsystem_sizes,
            renyi: self.renyi.clone().unwrap_or_else(|| vec![1.0, 2.0]),
            interval_starts: self.interval_starts.unwrap_or(4),
            quadruples: self.quadruples.unwrap_or(if experiment == Experiment::SteadyState { 2000 } else { 0 }),
            min_separation: self.min_separation.unwrap_or(4),
            mi_realizations: self.mi_realizations.unwrap_or(20),
            mi_sizes: self.mi_sizes.clone().unwrap_or_else(|| match experiment {
                Experiment::Dynamics => vec![10, 20, 40, 80, 120, 160],
                _ => Vec::new(),
            }),
            a_scan: self.a_scan.unwrap_or([1.0, 10.0, 0.1]),
            correlation_window: self.correlation_window.unwrap_or([10.0, half]),
            entropy_window: self.entropy_window.unwrap_or([5.0, half]),
            growth_window: self.growth_window.unwrap_or([20.0, steps as f64]),
            collapse_steps: self.collapse_steps.unwrap_or(match experiment {
                Experiment::Dynamics => [20, 60],
                _ => [20, 100],
            }),
            small_r_steps: self.small_r_steps.unwrap_or([50, 100]),
            collapse_window: self.collapse_window.unwrap_or(match experiment {
                Experiment::Beta0 => [0.5, 50.0],
                Experiment::Dynamics => [0.5, 3.0],
                _ => [0.05, 3.0],
            }),
            tail_window: self.tail_window.unwrap_or([2.0, 5.0]),
            small_r_window: self.small_r_window.unwrap_or([0.05, 0.3]),
        };
        let points: Vec<CircuitPlan> = betas
            .into_iter()
            .map(|beta| CircuitPlan { beta, ..base.clone() })
            .collect();
        for p in &points {
            p.validate(parsed)?;
        }
        Ok(points)
    }

    fn master(&self) -> Result<MasterPlan> {
        let plan = MasterPlan {
            n_max: self.n_max.unwrap_or(1000),
            mu: self.mu.unwrap_or(1.0),
            theta: self.theta.unwrap_or(0.0),
            dt: self.dt.unwrap_or(0.01),
            t_end: self.t_end.unwrap_or(400.0),
            sample_times: self.sample_times.clone().unwrap_or_else(|| vec![100.0, 200.0, 400.0]),
            collapse_window: self.collapse_window.unwrap_or([0.2, 3.0]),
            tail_window: self.tail_window.unwrap_or([1.0, 3.0]),
        };
        if plan.n_max < 2 || !(plan.dt > 0.0) || !(plan.t_end > 0.0) || !(plan.mu >= 0.0) || !(plan.theta >= 0.0) {
            return Err(bad("master parameters need n_max ≥ 2, dt > 0, t_end > 0, mu ≥ 0, theta ≥ 0"));
        }
        if plan.sample_times.iter().any(|&t| !(0.0..=plan.t_end).contains(&t)) {
            return Err(bad("sample times must lie in [0, t_end]"));
        }
        Ok(plan)
    }

    fn brownian(&self) -> Result<BrownianPlan> {
        let (a, b) = (self.noise_a.unwrap_or(1.0), self.noise_b.unwrap_or(1.0));
        let l = self.sites.unwrap_or(200);
        let plan = BrownianPlan {
            sites: l,
            particles: self.particles.unwrap_or(l / 2),
            noise_a: a,
            noise_b: b,
            dt: self.dt.unwrap_or_else(|| BrownianParams::new(a, b).dt),
            t_end: self.t_end.unwrap_or(100.0),
            sample_times: self.sample_times.clone().unwrap_or_else(|| vec![10.0, 25.0, 50.0, 100.0]),
            realizations: self.realizations.unwrap_or(50),
        };
        plan.params().validate().map_err(|e| bad(e.to_string()))?;
        if plan.particles == 0 || plan.particles >= l {
            return Err(bad("particle count must satisfy 0 < N < L"));
        }
        if plan.sample_times.iter().any(|&t| !(0.0..=plan.t_end).contains(&t)) {
            return Err(bad("sample times must lie in [0, t_end]"));
        }
        Ok(plan)
    }
}

impl CircuitPlan {
    fn validate(&self, boundary: Boundary) -> Result<()> {
        self.params(0).validate().map_err(|e| bad(e.to_string()))?;
        let l = self.sites;
        if self.sample_steps.is_empty() || self.sample_steps.iter().any(|&t| t == 0 || t > self.steps) {
            return Err(bad(format!("sample steps must lie in [1, {}]", self.steps)));
        }
        if self.sample_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("sample steps must be strictly increasing"));
        }
        if self.subsystem_sizes.iter().chain(&self.mi_sizes).any(|&s| s == 0 || s >= l) {
            return Err(bad(format!("subsystem sizes must lie in [1, {l})")));
        }
        if self.renyi.is_empty() || self.renyi.iter().any(|&n| !(n > 0.0)) {
            return Err(bad("Rényi indices must be positive"));
        }
        if self.interval_starts == 0 {
            return Err(bad("interval_starts must be at least 1"));
        }
        if self.quadruples > 0 && (boundary != Boundary::Periodic || 4 * self.min_separation >= l) {
            return Err(bad("quadruple sampling needs a periodic chain longer than 4·min_separation"));
        }
        let [a0, a1, da] = self.a_scan;
        if !(a0 > 0.0 && a1 >= a0 && da > 0.0) {
            return Err(bad("a_scan must be [first > 0, last ≥ first, step > 0]"));
        }
        for w in [
            self.correlation_window,
            self.entropy_window,
            self.growth_window,
            self.collapse_window,
            self.tail_window,
            self.small_r_window,
        ] {
            if !(w[0] > 0.0 && w[1] >= w[0]) {
                return Err(bad("fit windows must be [lo > 0, hi ≥ lo]"));
            }
        }
        Ok(())
    }
}

/// Values given on the command line; they override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Applies CLI overrides. A file naming a different experiment than
    /// the subcommand is an error.
    pub fn with_overrides(mut self, experiment: Experiment, o: &Overrides) -> Result<Self> {
        match self.experiment {
            Some(e) if e != experiment => {
                return Err(bad(format!(
                    "config is for `{}` but the subcommand is `{}`",
                    e.name(),
                    experiment.name()
                )))
            }
            _ => self.experiment = Some(experiment),
        }
        self.seed = o.seed.or(self.seed);
        self.workers = o.workers.or(self.workers);
        self.out = o.out.clone().or(self.out);
        Ok(self)
    }
}
