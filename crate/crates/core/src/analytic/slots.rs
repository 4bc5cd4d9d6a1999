//! Virtual-slot durations and the time-weighted distribution of the number
//! of simultaneous transmitters in a sharing area.

use serde::{Deserialize, Serialize};

use crate::analytic::dcf::{concurrent_tx_pmf, solve_dcf};
use crate::config::{AccessMode, PhyMacConfig};
use crate::error::{Error, Result};

/// Durations (µs) of the three virtual-slot types, each split into the
/// part during which somebody transmits and the silent remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotDurations {
    pub mode: AccessMode,
    pub idle_us: u64,
    /// PHY header plus the MAC frame rounded up to whole symbols.
    pub ppdu_us: u64,
    pub success_us: u64,
    pub collision_us: u64,
    /// One transmitter on air during a successful slot.
    pub success_busy_us: u64,
    pub success_quiet_us: u64,
    /// All colliding transmitters on air during a collision slot.
    pub collision_busy_us: u64,
    pub collision_quiet_us: u64,
}

impl SlotDurations {
    /// Complete RTS/CTS/DATA/ACK exchange including the trailing DIFS.
    pub fn rts_success_cycle_us(cfg: &PhyMacConfig) -> Result<u64> {
        let ppdu = ppdu_us(cfg)?;
        Ok(cfg.rts_us + cfg.cts_us + ppdu + cfg.ack_us + 3 * cfg.sifs_us + cfg.difs_us)
    }
}

pub fn ppdu_us(cfg: &PhyMacConfig) -> Result<u64> {
    if cfg.symbol_rate == 0 {
        return Err(Error::InvalidConfig("symbol rate must be positive".into()));
    }
    let symbols = (cfg.mac_header_bits + cfg.payload_bits).div_ceil(cfg.symbol_rate);
    Ok(cfg.phy_header_us + symbols * cfg.symbol_us)
}

pub fn slot_durations(cfg: &PhyMacConfig) -> Result<SlotDurations> {
    let ppdu = ppdu_us(cfg)?;
    let (success_busy, success_quiet, collision_busy, collision_quiet) = match cfg.mode {
        AccessMode::Basic => (
            ppdu + cfg.ack_us,
            cfg.sifs_us + cfg.difs_us,
            ppdu,
            cfg.difs_us,
        ),
        AccessMode::RtsCts => (
            cfg.rts_us + cfg.cts_us + ppdu + cfg.ack_us,
            3 * cfg.sifs_us + cfg.difs_us,
            cfg.rts_us,
            cfg.difs_us,
        ),
    };
    Ok(SlotDurations {
        mode: cfg.mode,
        idle_us: cfg.slot_us,
        ppdu_us: ppdu,
        success_us: success_busy + success_quiet,
        collision_us: collision_busy + collision_quiet,
        success_busy_us: success_busy,
        success_quiet_us: success_quiet,
        collision_busy_us: collision_busy,
        collision_quiet_us: collision_quiet,
    })
}

/// Mean virtual-slot length for `active_count` nodes each transmitting with
/// probability `tau`.
pub fn mean_virtual_slot(active_count: usize, tau: f64, d: &SlotDurations) -> Result<f64> {
    let pmf = concurrent_tx_pmf(active_count, tau)?;
    Ok(mean_slot_from_pmf(&pmf, d))
}

fn mean_slot_from_pmf(pmf: &[f64], d: &SlotDurations) -> f64 {
    let p0 = pmf[0];
    let p1 = pmf.get(1).copied().unwrap_or(0.0);
    let pc = (1.0 - p0 - p1).max(0.0);
    d.idle_us as f64 * p0 + d.success_us as f64 * p1 + d.collision_us as f64 * pc
}

/// Time-weighted PMF `B_a(j)`, `j = 0..=a`, of the number of nodes on air in
/// a sharing area with `active_count` contenders.
pub fn power_distribution(active_count: usize, tau: f64, d: &SlotDurations) -> Result<Vec<f64>> {
    if active_count == 0 {
        return Ok(vec![1.0]);
    }
    let pmf = concurrent_tx_pmf(active_count, tau)?;
    let p0 = pmf[0];
    let p1 = pmf[1];
    let pc = (1.0 - p0 - p1).max(0.0);
    let mean = mean_slot_from_pmf(&pmf, d);
    let mut b = Vec::with_capacity(active_count + 1);
    b.push(
        (d.idle_us as f64 * p0 + d.success_quiet_us as f64 * p1 + d.collision_quiet_us as f64 * pc)
            / mean,
    );
    b.push(d.success_busy_us as f64 * p1 / mean);
    for &pj in &pmf[2..] {
        b.push(d.collision_busy_us as f64 * pj / mean);
    }
    Ok(b)
}

/// [`power_distribution`] after solving the DCF fixed point for `active_count`.
pub fn power_distribution_for(active_count: usize, cfg: &PhyMacConfig) -> Result<Vec<f64>> {
    if active_count == 0 {
        return Ok(vec![1.0]);
    }
    let fp = solve_dcf(active_count, cfg)?;
    power_distribution(active_count, fp.tau, &slot_durations(cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn durations(mode: AccessMode) -> SlotDurations {
        slot_durations(&PhyMacConfig::reference(mode, 500)).unwrap()
    }

    #[test]
    fn reference_frame_times() {
        let cfg = PhyMacConfig::reference(AccessMode::Basic, 500);
        assert_eq!(ppdu_us(&cfg).unwrap(), 728);
        assert_eq!(
            ppdu_us(&cfg.clone().with_payload_bytes(1000)).unwrap(),
            1396
        );
        let bas = durations(AccessMode::Basic);
        assert_eq!(bas.success_us, 822);
        assert_eq!(bas.collision_us, 762);
        let rts = durations(AccessMode::RtsCts);
        assert_eq!(rts.collision_us, 86);
        assert_eq!(rts.success_us, 950);
        assert_eq!(SlotDurations::rts_success_cycle_us(&cfg).unwrap(), 950);
    }

    #[test]
    fn sub_durations_partition_slots() {
        for mode in AccessMode::ALL {
            for payload in [0, 500, 1000] {
                let d = slot_durations(&PhyMacConfig::reference(mode, payload)).unwrap();
                assert_eq!(d.success_busy_us + d.success_quiet_us, d.success_us);
                assert_eq!(d.collision_busy_us + d.collision_quiet_us, d.collision_us);
                if mode == AccessMode::Basic && payload > 0 {
                    assert!(d.success_us > d.collision_us && d.collision_us > d.idle_us);
                }
            }
        }
    }

    #[test]
    fn zero_payload_frame() {
        let cfg = PhyMacConfig::reference(AccessMode::Basic, 0);
        assert_eq!(ppdu_us(&cfg).unwrap(), 20 + 246u64.div_ceil(24) * 4);
    }

    #[test]
    fn zero_symbol_rate_rejected() {
        let mut cfg = PhyMacConfig::reference(AccessMode::Basic, 500);
        cfg.symbol_rate = 0;
        assert!(slot_durations(&cfg).is_err());
    }

    #[test]
    fn mean_slot_examples() {
        let d = durations(AccessMode::Basic);
        assert_eq!(mean_virtual_slot(3, 0.0, &d).unwrap(), 9.0);
        let tau = 0.2;
        let one = mean_virtual_slot(1, tau, &d).unwrap();
        assert!((one - (9.0 * (1.0 - tau) + 822.0 * tau)).abs() < 1e-12);
        let two = mean_virtual_slot(2, 0.1, &d).unwrap();
        assert!((two - 162.87).abs() < 1e-10, "{two}");
    }

    #[test]
    fn power_distribution_sums_to_one() {
        for mode in AccessMode::ALL {
            let cfg = PhyMacConfig::reference(mode, 500);
            for a in 1..=20 {
                let b = power_distribution_for(a, &cfg).unwrap();
                assert_eq!(b.len(), a + 1);
                assert!(b.iter().all(|&x| x >= 0.0));
                assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn silent_nodes_mean_silent_medium() {
        let d = durations(AccessMode::RtsCts);
        let b = power_distribution(4, 1e-12, &d).unwrap();
        assert!(b[0] > 1.0 - 1e-9);
    }

    /// Slot-by-slot time accounting: walk the three slot types with their
    /// probabilities and accumulate how long each concurrency level lasts.
    #[test]
    fn rts_two_nodes_matches_time_accounting() {
        let (tau, a) = (0.1f64, 2usize);
        // Slot outcomes for two nodes: (probability, [(level, duration)]).
        let slots: [(f64, Vec<(usize, f64)>); 3] = [
            ((1.0 - tau).powi(2), vec![(0, 9.0)]),
            (
                2.0 * tau * (1.0 - tau),
                vec![
                    (1, 52.0),
                    (0, 16.0),
                    (1, 44.0),
                    (0, 16.0),
                    (1, 728.0),
                    (0, 16.0),
                    (1, 44.0),
                    (0, 34.0),
                ],
            ),
            (tau * tau, vec![(2, 52.0), (0, 34.0)]),
        ];
        let mut time = vec![0.0; a + 1];
        let mut total = 0.0;
        for (prob, pieces) in &slots {
            for &(level, dur) in pieces {
                time[level] += prob * dur;
                total += prob * dur;
            }
        }
        let got = power_distribution(a, tau, &durations(AccessMode::RtsCts)).unwrap();
        for j in 0..=a {
            assert!((got[j] - time[j] / total).abs() < 1e-14, "j={j}");
        }
    }
}
