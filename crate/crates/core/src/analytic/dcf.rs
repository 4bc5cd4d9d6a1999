//! Saturated DCF fixed point inside a sharing area where every node senses
//! every other node.

use serde::{Deserialize, Serialize};

use crate::config::PhyMacConfig;
use crate::error::{invalid, Error, Result};
use crate::numerics;

const RESIDUAL_TOL: f64 = 1e-10;

/// Per-slot transmission probability and conditional collision probability
/// for `active_count` contending nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcfFixedPoint {
    pub active_count: usize,
    pub tau: f64,
    pub p_coll: f64,
}

/// Backoff parameters entering the transmission-probability map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffParams {
    pub w0: u32,
    pub max_stage: u32,
    pub retry_limit: u32,
}

impl From<&PhyMacConfig> for BackoffParams {
    fn from(cfg: &PhyMacConfig) -> Self {
        BackoffParams {
            w0: cfg.w0,
            max_stage: cfg.max_backoff_stage,
            retry_limit: cfg.retry_limit,
        }
    }
}

/// `sum_{i < n} x^i`, which is the removable-singularity-free form of
/// `(1 - x^n) / (1 - x)`.
fn geometric_sum(x: f64, n: u32) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for _ in 0..n {
        sum += term;
        term *= x;
    }
    sum
}

/// Transmission probability `tau` as a function of the collision probability.
///
/// The ratios `(1 - (2p)^m) / (1 - 2p)` and `(1 - p) / (1 - p^K)` are
/// evaluated as finite geometric sums, so `p = 1/2` and `p -> 1` need no
/// special casing.
pub fn tau_of_pcoll(p_coll: f64, params: BackoffParams) -> f64 {
    let w0 = params.w0 as f64;
    let m = params.max_stage;
    let k = params.retry_limit;
    let stages_low = geometric_sum(2.0 * p_coll, m);
    let all_stages = geometric_sum(p_coll, k);
    let stages_high = 2f64.powi(m as i32) * p_coll.powi(m as i32) * geometric_sum(p_coll, k - m);
    let mean_slots = w0 * (stages_low + stages_high) / (2.0 * all_stages) - 0.5;
    1.0 / mean_slots
}

fn coupling(tau: f64, active_count: usize) -> f64 {
    1.0 - (1.0 - tau).powi(active_count as i32 - 1)
}

/// Solves the `(tau, p_c)` pair for `active_count` saturated nodes.
pub fn solve_dcf(active_count: usize, cfg: &PhyMacConfig) -> Result<DcfFixedPoint> {
    solve_dcf_with(active_count, BackoffParams::from(cfg))
}

pub fn solve_dcf_with(active_count: usize, params: BackoffParams) -> Result<DcfFixedPoint> {
    if active_count == 0 {
        return Err(invalid("active_count", "must be at least 1"));
    }
    if params.retry_limit <= params.max_stage || params.w0 < 3 {
        return Err(Error::InvalidConfig(format!(
            "unusable backoff parameters {params:?}"
        )));
    }
    if active_count == 1 {
        return Ok(DcfFixedPoint {
            active_count,
            tau: tau_of_pcoll(0.0, params),
            p_coll: 0.0,
        });
    }
    // h(0) >= 0 and h(1) < 0; the composed map is decreasing in p.
    let h = |p: f64| coupling(tau_of_pcoll(p, params), active_count) - p;
    const MAX_ITER: usize = 200;
    let p_coll = numerics::bisect(h, 0.0, 1.0, 1e-16, MAX_ITER);
    let tau = tau_of_pcoll(p_coll, params);
    let residual = (coupling(tau, active_count) - p_coll).abs();
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::NoConvergence {
            what: "DCF fixed point",
            iterations: MAX_ITER,
            residual,
        });
    }
    Ok(DcfFixedPoint {
        active_count,
        tau,
        p_coll,
    })
}

/// PMF of the number of nodes transmitting in a slot, Binomial(a, tau).
pub fn concurrent_tx_pmf(active_count: usize, tau: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid("tau", format!("must lie in [0, 1], got {tau}")));
    }
    Ok(numerics::binomial_pmf(active_count, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AccessMode;

    fn reference() -> PhyMacConfig {
        PhyMacConfig::reference(AccessMode::Basic, 500)
    }

    /// The transmission-probability map written exactly as the closed form,
    /// valid away from p = 1/2.
    fn tau_closed_form(p: f64, w0: f64, m: i32, k: i32) -> f64 {
        let t1 = (1.0 - p) * w0 * (1.0 - (2.0 * p).powi(m))
            / (2.0 * (1.0 - p.powi(k)) * (1.0 - 2.0 * p));
        let t2 = 2f64.powi(m) * w0 * (p.powi(m) - p.powi(k)) / (2.0 * (1.0 - p.powi(k)));
        1.0 / (t1 + t2 - 0.5)
    }

    #[test]
    fn single_node_never_collides() {
        let fp = solve_dcf(1, &reference()).unwrap();
        assert_eq!(fp.p_coll, 0.0);
        assert_eq!(fp.tau, 2.0 / 15.0);
    }

    #[test]
    fn geometric_form_agrees_with_closed_form() {
        let params = BackoffParams::from(&reference());
        for i in 1..100 {
            let p = i as f64 / 100.0;
            if (p - 0.5).abs() < 1e-9 {
                continue;
            }
            let a = tau_of_pcoll(p, params);
            let b = tau_closed_form(p, 16.0, 6, 7);
            assert!(((a - b) / b).abs() < 1e-12, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn half_is_a_removable_singularity() {
        let params = BackoffParams::from(&reference());
        let at = tau_of_pcoll(0.5, params);
        let left = tau_closed_form(0.5 - 1e-7, 16.0, 6, 7);
        let right = tau_closed_form(0.5 + 1e-7, 16.0, 6, 7);
        assert!(at.is_finite());
        assert!((at - left).abs() < 1e-6 && (at - right).abs() < 1e-6);
    }

    #[test]
    fn two_nodes_match_bisection_oracle() {
        // With two nodes p_c = tau, so p solves p = tau(p).
        let (mut lo, mut hi) = (1e-6, 0.49);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tau_closed_form(mid, 16.0, 6, 7) - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let fp = solve_dcf(2, &reference()).unwrap();
        assert!((fp.p_coll - fp.tau).abs() < 1e-10);
        assert!((fp.tau - oracle).abs() < 1e-10, "{} vs {oracle}", fp.tau);
    }

    #[test]
    fn residuals_and_monotonicity_up_to_50() {
        let cfg = reference();
        let params = BackoffParams::from(&cfg);
        let mut prev: Option<DcfFixedPoint> = None;
        for a in 1..=50 {
            let fp = solve_dcf(a, &cfg).unwrap();
            assert!(fp.tau > 0.0 && fp.tau <= 1.0);
            assert!((0.0..1.0).contains(&fp.p_coll));
            assert!((tau_of_pcoll(fp.p_coll, params) - fp.tau).abs() < 1e-10);
            assert!((coupling(fp.tau, a) - fp.p_coll).abs() < 1e-10);
            if let Some(prev) = prev {
                assert!(fp.tau <= prev.tau);
                assert!(fp.p_coll >= prev.p_coll);
            }
            prev = Some(fp);
        }
    }

    #[test]
    fn rejects_zero_nodes() {
        assert!(solve_dcf(0, &reference()).is_err());
    }

    #[test]
    fn binomial_slot_pmf() {
        let pmf = concurrent_tx_pmf(2, 0.1).unwrap();
        assert!(
            (pmf[0] - 0.81).abs() < 1e-15
                && (pmf[1] - 0.18).abs() < 1e-15
                && (pmf[2] - 0.01).abs() < 1e-15
        );
        assert_eq!(
            concurrent_tx_pmf(5, 0.0).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        let pmf = concurrent_tx_pmf(17, 0.37).unwrap();
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(concurrent_tx_pmf(3, 1.5).is_err());
    }
}
