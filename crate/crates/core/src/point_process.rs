//! Poisson, Matérn hardcore (type II) and simple sequential inhibition
//! patterns on a disk, with Rayleigh-faded marks, and the shot-noise power
//! they produce at the disk centre.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::EmpiricalSample;

/// Points closer than this to the measuring point are redrawn.
pub const MIN_DISTANCE_M: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Ppp,
    Mhc,
    Ssi,
}

impl ProcessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProcessKind::Ppp => "ppp",
            ProcessKind::Mhc => "mhc",
            ProcessKind::Ssi => "ssi",
        }
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ppp" => Ok(ProcessKind::Ppp),
            "mhc" | "matern" => Ok(ProcessKind::Mhc),
            "ssi" => Ok(ProcessKind::Ssi),
            other => Err(Error::Parse(format!("unknown point process `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedPoint {
    pub x: f64,
    pub y: f64,
    /// Faded transmit power in watts.
    pub mark: f64,
}

impl MarkedPoint {
    pub fn distance_to(&self, other: (f64, f64)) -> f64 {
        (self.x - other.0).hypot(self.y - other.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    pub points: Vec<MarkedPoint>,
    pub center: (f64, f64),
    pub radius_m: f64,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest distance between two retained points, `inf` for fewer than two.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min((a.x - b.x).hypot(a.y - b.y));
            }
        }
        best
    }

    /// Number of points within `radius_m` of the centre.
    pub fn count_within(&self, radius_m: f64) -> usize {
        self.points
            .iter()
            .filter(|p| p.distance_to(self.center) <= radius_m)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub process: ProcessKind,
    pub lambda: f64,
    pub exclusion_m: f64,
    pub region_radius_m: f64,
    pub tx_power_w: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl MonteCarloConfig {
    /// Disk of radius 282 m, exclusion radius 70 m, 1 mW, 100 000 iterations.
    pub fn reference_disk(process: ProcessKind, lambda: f64, seed: u64) -> Self {
        MonteCarloConfig {
            process,
            lambda,
            exclusion_m: 70.0,
            region_radius_m: 282.0,
            tx_power_w: 1e-3,
            iterations: 100_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.exclusion_m >= 0.0 && self.exclusion_m.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "exclusion_m must be nonnegative, got {}",
                self.exclusion_m
            )));
        }
        if !(self.region_radius_m > 0.0 && self.region_radius_m.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "region_radius_m must be positive, got {}",
                self.region_radius_m
            )));
        }
        if !(self.tx_power_w > 0.0 && self.tx_power_w.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tx_power_w must be positive, got {}",
                self.tx_power_w
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        Ok(())
    }

    /// Independent random stream for one iteration.
    pub fn iteration_rng(&self, iteration: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(iteration);
        rng
    }
}

fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, center: (f64, f64), radius: f64) -> (f64, f64) {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    (center.0 + r * theta.cos(), center.1 + r * theta.sin())
}

/// Homogeneous PPP on the configured disk, centred at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(cfg: &MonteCarloConfig, rng: &mut R) -> PointPattern {
    let center = (0.0, 0.0);
    let mean = cfg.lambda * PI * cfg.region_radius_m.powi(2);
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    } else {
        0
    };
    let fading = Exp::new(1.0 / cfg.tx_power_w).expect("positive power");
    let points = (0..count)
        .map(|_| {
            let (x, y) = uniform_in_disk(rng, center, cfg.region_radius_m);
            MarkedPoint {
                x,
                y,
                mark: fading.sample(rng),
            }
        })
        .collect();
    PointPattern {
        points,
        center,
        radius_m: cfg.region_radius_m,
    }
}

/// Matérn type II thinning: each point gets a uniform age and survives iff
/// no other initial point within the exclusion radius is older.
pub fn sample_mhc<R: Rng + ?Sized>(cfg: &MonteCarloConfig, rng: &mut R) -> PointPattern {
    let mut pattern = sample_ppp(cfg, rng);
    let ages: Vec<f64> = (0..pattern.len()).map(|_| rng.random::<f64>()).collect();
    let r = cfg.exclusion_m;
    let pts = &pattern.points;
    let keep: Vec<bool> = (0..pts.len())
        .map(|i| {
            !(0..pts.len()).any(|j| {
                j != i && ages[j] < ages[i] && (pts[i].x - pts[j].x).hypot(pts[i].y - pts[j].y) < r
            })
        })
        .collect();
    let mut k = keep.iter();
    pattern.points.retain(|_| *k.next().unwrap());
    pattern
}

/// Simple sequential inhibition: the PPP-drawn candidates are offered in
/// draw order and each is accepted iff it keeps the exclusion distance to
/// every point accepted before it.
pub fn sample_ssi<R: Rng + ?Sized>(cfg: &MonteCarloConfig, rng: &mut R) -> PointPattern {
    let candidates = sample_ppp(cfg, rng);
    let r = cfg.exclusion_m;
    let mut accepted: Vec<MarkedPoint> = Vec::with_capacity(candidates.len());
    for c in candidates.points {
        if accepted.iter().all(|a| (a.x - c.x).hypot(a.y - c.y) >= r) {
            accepted.push(c);
        }
    }
    PointPattern {
        points: accepted,
        center: candidates.center,
        radius_m: candidates.radius_m,
    }
}

pub fn sample_pattern<R: Rng + ?Sized>(cfg: &MonteCarloConfig, rng: &mut R) -> PointPattern {
    match cfg.process {
        ProcessKind::Ppp => sample_ppp(cfg, rng),
        ProcessKind::Mhc => sample_mhc(cfg, rng),
        ProcessKind::Ssi => sample_ssi(cfg, rng),
    }
}

/// A point sat (numerically) on top of the measuring point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TooClose {
    pub index: usize,
    pub distance_m: f64,
}

/// Shot-noise sum `sum mark_i / d_i^4` at `origin`.
pub fn measure_aggregate(
    pattern: &PointPattern,
    origin: (f64, f64),
) -> std::result::Result<f64, TooClose> {
    let mut total = 0.0;
    for (index, p) in pattern.points.iter().enumerate() {
        let d = p.distance_to(origin);
        if d < MIN_DISTANCE_M {
            return Err(TooClose {
                index,
                distance_m: d,
            });
        }
        total += p.mark / d.powi(4);
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct MonteCarloRun {
    pub sample: EmpiricalSample,
    /// Mean number of retained points per pattern.
    pub mean_count: f64,
    /// Retained density measured in the disk of radius `R - r`, which is
    /// free of edge effects from the truncated exclusion neighbourhoods.
    pub inner_density: f64,
    /// Patterns redrawn because a point fell on the measuring point.
    pub resampled: usize,
}

/// Runs `iterations` independent sample-and-measure rounds.
///
/// Each iteration draws from its own stream derived from `(seed, index)`,
/// so the output does not depend on how iterations are scheduled.
pub fn monte_carlo_interference(cfg: &MonteCarloConfig) -> Result<EmpiricalSample> {
    Ok(monte_carlo_run(cfg)?.sample)
}

pub fn monte_carlo_run(cfg: &MonteCarloConfig) -> Result<MonteCarloRun> {
    cfg.validate()?;
    let inner_radius = (cfg.region_radius_m - cfg.exclusion_m).max(0.0);
    let results: Vec<(f64, usize, usize, usize)> = (0..cfg.iterations as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.iteration_rng(i);
            let mut resampled = 0;
            loop {
                let pattern = sample_pattern(cfg, &mut rng);
                match measure_aggregate(&pattern, pattern.center) {
                    Ok(power) => {
                        return (
                            power,
                            pattern.len(),
                            pattern.count_within(inner_radius),
                            resampled,
                        )
                    }
                    Err(_) => resampled += 1,
                }
            }
        })
        .collect();
    let n = results.len() as f64;
    let mean_count = results.iter().map(|r| r.1 as f64).sum::<f64>() / n;
    let inner_area = PI * inner_radius * inner_radius;
    let inner_density = if inner_area > 0.0 {
        results.iter().map(|r| r.2 as f64).sum::<f64>() / n / inner_area
    } else {
        f64::NAN
    };
    let resampled = results.iter().map(|r| r.3).sum();
    let sample = EmpiricalSample::from_values(results.into_iter().map(|r| r.0))?;
    Ok(MonteCarloRun {
        sample,
        mean_count,
        inner_density,
        resampled,
    })
}
