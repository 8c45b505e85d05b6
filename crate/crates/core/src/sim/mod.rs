//! Monte-Carlo photon-counting experiment built on the compiled netlist.
//!
//! Every trial owns an independent ChaCha stream keyed by `(seed, trial)`, so
//! results do not depend on how trials are split across worker threads.

mod report;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrimination::optimal_probability;
use crate::error::{Error, Result};
use crate::optics::{click_probabilities, compile_full, lower, Mode, ModeMap, OpticalNetlist, Polarization};
use crate::scalar::Real;
use crate::states::{coefficients_from_angles, AngleVector};

pub use report::{summarize, Outcome, RateEstimate, SimReport, Tally, TrialRecord};

/// Monte-Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Prior over the prepared index; `None` means uniform.
    #[serde(default)]
    pub source: Option<Vec<f64>>,
    /// PBS extinction ratio as a power ratio (1000 means 1,000:1); `None` is ideal.
    #[serde(default)]
    pub pbs_extinction: Option<f64>,
    /// Standard deviation (radians) of the phase error on each beam-splitter arm.
    #[serde(default)]
    pub phase_noise_sigma: f64,
    pub detector_efficiency: f64,
    pub heralding_efficiency: f64,
    /// Worker threads; 0 uses the global pool. Does not affect results.
    #[serde(skip)]
    pub threads: usize,
}

impl SimConfig {
    pub fn ideal(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            source: None,
            pbs_extinction: None,
            phase_noise_sigma: 0.0,
            detector_efficiency: 1.0,
            heralding_efficiency: 1.0,
            threads: 0,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Some(e) = self.pbs_extinction {
            if !(e >= 1.0) {
                return bad(format!("pbs_extinction must be >= 1, got {e}"));
            }
        }
        if !(self.phase_noise_sigma >= 0.0) || !self.phase_noise_sigma.is_finite() {
            return bad(format!("phase_noise_sigma must be >= 0, got {}", self.phase_noise_sigma));
        }
        for (name, v) in [
            ("detector_efficiency", self.detector_efficiency),
            ("heralding_efficiency", self.heralding_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        if let Some(src) = &self.source {
            if src.len() != dim {
                return bad(format!("source has {} weights for dimension {dim}", src.len()));
            }
            let total: f64 = src.iter().sum();
            if src.iter().any(|&w| !(w >= 0.0)) || !(total > 0.0) {
                return bad("source weights must be non-negative with positive sum".into());
            }
        }
        Ok(())
    }

    /// Power fraction routed to the wrong PBS port.
    pub fn pbs_leakage(&self) -> f64 {
        self.pbs_extinction.map_or(0.0, |e| 1.0 / e)
    }

    fn source_cdf(&self, dim: usize) -> Vec<f64> {
        let weights = self.source.clone().unwrap_or_else(|| vec![1.0; dim]);
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect()
    }
}

/// Random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Lowers `netlist` with the PBS leakage of `config` and, when
/// `phase_noise_sigma > 0`, a Gaussian phase error on every beam-splitter arm
/// drawn from `rng`.
pub fn imperfect_netlist<T: Real, R: Rng + ?Sized>(
    netlist: &OpticalNetlist<T>,
    config: &SimConfig,
    rng: &mut R,
) -> Result<ModeMap<T>> {
    let leakage = T::of(config.pbs_leakage());
    if config.phase_noise_sigma > 0.0 {
        let sigma = config.phase_noise_sigma;
        let mut draw = || {
            let z: f64 = rng.sample(StandardNormal);
            T::of(sigma * z)
        };
        lower(netlist, leakage, Some(&mut draw))
    } else {
        lower(netlist, leakage, None)
    }
}

#[derive(Debug, Clone, Copy)]
enum Role {
    Conclusive(usize),
    Inconclusive,
}

/// Compiled setup for each prepared index with its detector roles.
struct Bench<T> {
    netlists: Vec<OpticalNetlist<T>>,
    roles: Vec<Role>,
    /// Click distributions per prepared index when they do not vary between trials.
    fixed: Option<Vec<Vec<f64>>>,
}

impl<T: Real> Bench<T> {
    fn new(angles: &AngleVector<T>, config: &SimConfig) -> Result<Self> {
        let n = angles.dim().get();
        let netlists = (0..n)
            .map(|l| compile_full(angles, l))
            .collect::<Result<Vec<_>>>()?;
        let roles = netlists[0]
            .detectors()
            .iter()
            .map(|(label, _)| match label.strip_prefix('D').and_then(|s| s.parse::<usize>().ok()) {
                Some(k) if k >= 1 => Role::Conclusive(k - 1),
                _ => Role::Inconclusive,
            })
            .collect();
        let mut bench = Self {
            netlists,
            roles,
            fixed: None,
        };
        if config.phase_noise_sigma == 0.0 {
            let mut unused = trial_rng(config.seed, 0);
            let fixed = (0..n)
                .map(|l| bench.clicks(l, config, &mut unused))
                .collect::<Result<Vec<_>>>()?;
            bench.fixed = Some(fixed);
        }
        Ok(bench)
    }

    fn clicks<R: Rng + ?Sized>(&self, l: usize, config: &SimConfig, rng: &mut R) -> Result<Vec<f64>> {
        let net = &self.netlists[l];
        let map = imperfect_netlist(net, config, rng)?;
        let out = map.output_for(Mode::new(0, Polarization::H));
        Ok(click_probabilities(net, &out)
            .into_iter()
            .map(|p| p.to_f64_lossy())
            .collect())
    }

    fn sample(&self, clicks: &[f64], u: f64) -> Option<Role> {
        let mut acc = 0.0;
        for (p, role) in clicks.iter().zip(&self.roles) {
            acc += p;
            if u < acc {
                return Some(*role);
            }
        }
        None
    }
}

fn run_one<T: Real>(bench: &Bench<T>, config: &SimConfig, cdf: &[f64], trial: u64) -> Result<TrialRecord> {
    let mut rng = trial_rng(config.seed, trial);
    let u_source: f64 = rng.random();
    let prepared = cdf.iter().position(|&c| u_source < c).unwrap_or(cdf.len() - 1);
    let heralded = rng.random::<f64>() < config.heralding_efficiency;
    let u_click: f64 = rng.random();
    let detected = rng.random::<f64>() < config.detector_efficiency;

    // Noise draws come last so that runs differing only in sigma share the draws above.
    let owned;
    let clicks = match &bench.fixed {
        Some(fixed) => &fixed[prepared],
        None => {
            owned = bench.clicks(prepared, config, &mut rng)?;
            &owned
        }
    };

    let outcome = match (heralded, bench.sample(clicks, u_click)) {
        (false, _) | (_, None) => Outcome::Discarded,
        (true, Some(_)) if !detected => Outcome::Discarded,
        (true, Some(Role::Conclusive(k))) => Outcome::Conclusive(k),
        (true, Some(Role::Inconclusive)) => Outcome::Inconclusive,
    };
    Ok(TrialRecord {
        trial,
        prepared,
        outcome,
    })
}

const CHUNK: u64 = 4096;

/// Runs the experiment and aggregates the outcomes.
pub fn run_trials<T: Real>(config: &SimConfig, angles: &AngleVector<T>) -> Result<SimReport> {
    let dim = angles.dim().get();
    config.validate(dim)?;
    let bench = Bench::new(angles, config)?;
    let cdf = config.source_cdf(dim);
    let analytic = optimal_probability(&coefficients_from_angles(angles)?).to_f64_lossy();

    let chunks = config.trials.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut tally = Tally::new(dim);
                for trial in c * CHUNK..((c + 1) * CHUNK).min(config.trials) {
                    let r = run_one(&bench, config, &cdf, trial)?;
                    tally.record(r.prepared, r.outcome);
                }
                Ok(tally)
            })
            .try_reduce(|| Tally::new(dim), |a, b| Ok(a.merge(b)))
    };
    let tally = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(work)?
    } else {
        work()?
    };
    Ok(tally.into_report(analytic))
}

/// Trial-by-trial records, for inspection and for [`summarize`].
pub fn trial_records<T: Real>(config: &SimConfig, angles: &AngleVector<T>) -> Result<Vec<TrialRecord>> {
    let dim = angles.dim().get();
    config.validate(dim)?;
    let bench = Bench::new(angles, config)?;
    let cdf = config.source_cdf(dim);
    (0..config.trials)
        .into_par_iter()
        .map(|t| run_one(&bench, config, &cdf, t))
        .collect()
}

/// Exact per-index click distributions of the (deterministically) imperfect
/// setup: `result[l][d]` is the probability that detector `d` fires for
/// prepared index `l`. Phase noise is ignored.
pub fn exact_click_table<T: Real>(angles: &AngleVector<T>, config: &SimConfig) -> Result<Vec<Vec<f64>>> {
    let n = angles.dim().get();
    let leakage = T::of(config.pbs_leakage());
    (0..n)
        .map(|l| {
            let net = compile_full(angles, l)?;
            let u = lower(&net, leakage, None)?.to_matrix();
            let out = u.column(Mode::new(0, Polarization::H).index());
            Ok(click_probabilities(&net, &out)
                .into_iter()
                .map(|p| p.to_f64_lossy())
                .collect())
        })
        .collect()
}
