//! Stochastic carrier sensing under Rayleigh fading and its deterministic
//! equivalent range.

use std::f64::consts::PI;

use crate::config::PhyMacConfig;
use crate::error::{invalid, Error, Result};
use crate::numerics;

/// Effective carrier-sensing range: the radius of the disk whose area equals
/// the mean area over which a single transmitter is sensed as busy.
pub fn effective_cs_range(cfg: &PhyMacConfig) -> Result<f64> {
    let margin = cfg.cs_threshold_w - cfg.noise_w;
    if !(margin > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "carrier-sense threshold {} W does not exceed noise {} W",
            cfg.cs_threshold_w, cfg.noise_w
        )));
    }
    Ok((PI * cfg.tx_power_w / margin).powf(0.25) / 2f64.sqrt())
}

/// Probability that a lone transmitter at `distance_m` drives the sensed
/// power above the threshold, with an exponentially distributed received
/// power of mean `p / r^4`.
pub fn cs_busy_probability(distance_m: f64, cfg: &PhyMacConfig) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(invalid(
            "distance_m",
            format!("must be positive, got {distance_m}"),
        ));
    }
    let margin = cfg.cs_threshold_w - cfg.noise_w;
    if margin <= 0.0 {
        return Ok(1.0);
    }
    Ok((-margin * distance_m.powi(4) / cfg.tx_power_w).exp())
}

/// Closed form of the mean sensing area, `pi^(3/2) / (2 sqrt((gamma - nu) / p))`.
pub fn mean_sensing_area(cfg: &PhyMacConfig) -> f64 {
    let margin = cfg.cs_threshold_w - cfg.noise_w;
    PI.powf(1.5) / (2.0 * (margin / cfg.tx_power_w).sqrt())
}

/// Mean number of nodes in a sharing area (disk of radius R/2).
pub fn sharing_area_mean(lambda: f64, cs_range_m: f64) -> f64 {
    lambda * PI * (cs_range_m / 2.0).powi(2)
}

/// Poisson probability of `n` deployed nodes in the sharing area.
pub fn sharing_count_pmf(lambda: f64, cs_range_m: f64, n: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    if !(cs_range_m > 0.0) {
        return Err(invalid(
            "cs_range_m",
            format!("must be positive, got {cs_range_m}"),
        ));
    }
    let mu = sharing_area_mean(lambda, cs_range_m);
    let ln = n as f64 * mu.ln() - mu - numerics::ln_factorial(n);
    Ok(ln.exp())
}
