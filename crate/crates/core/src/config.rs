//! PHY/MAC/channel parameters shared by the analysis and the simulator.
//!
//! Units are fixed throughout the crate: watts, meters, microseconds and
//! nodes per square meter.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Channel access mode of the DCF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessMode {
    Basic,
    #[serde(rename = "rts")]
    RtsCts,
}

impl AccessMode {
    pub const ALL: [AccessMode; 2] = [AccessMode::Basic, AccessMode::RtsCts];

    pub fn as_str(self) -> &'static str {
        match self {
            AccessMode::Basic => "basic",
            AccessMode::RtsCts => "rts",
        }
    }
}

impl fmt::Display for AccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "basic" | "bas" => Ok(AccessMode::Basic),
            "rts" | "rtscts" | "rts-cts" | "rts_cts" => Ok(AccessMode::RtsCts),
            other => Err(Error::Parse(format!("unknown access mode `{other}`"))),
        }
    }
}

/// All PHY, MAC and channel constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhyMacConfig {
    pub tx_power_w: f64,
    pub noise_w: f64,
    pub cs_threshold_w: f64,
    pub path_loss_exponent: f64,
    pub slot_us: u64,
    pub sifs_us: u64,
    pub difs_us: u64,
    pub phy_header_us: u64,
    /// MAC header plus service and tail bits.
    pub mac_header_bits: u64,
    pub payload_bits: u64,
    /// Data bits carried per OFDM symbol.
    pub symbol_rate: u64,
    pub symbol_us: u64,
    pub rts_us: u64,
    pub cts_us: u64,
    pub ack_us: u64,
    pub w0: u32,
    pub max_backoff_stage: u32,
    /// Retry limit K used by the backoff analysis, and by the simulator for
    /// frames governed by the short retry counter (basic data, RTS).
    pub retry_limit: u32,
    /// Simulator-only retry limit for data frames sent after a successful
    /// RTS/CTS handshake.
    pub long_retry_limit: u32,
    pub mode: AccessMode,
}

impl PhyMacConfig {
    /// The 802.11a parameter set used throughout the experiments (6 Mb/s
    /// BPSK 1/2, 4 µs OFDM symbols carrying 24 bits, 20 µs PLCP overhead,
    /// 246 bits of MAC header + service + tail).
    ///
    /// The carrier-sense threshold is set so that the effective sensing
    /// range is 70 m.
    pub fn reference(mode: AccessMode, payload_bytes: u64) -> Self {
        let mut cfg = PhyMacConfig {
            tx_power_w: 1e-3,
            noise_w: 1e-12,
            cs_threshold_w: 0.0,
            path_loss_exponent: 4.0,
            slot_us: 9,
            sifs_us: 16,
            difs_us: 34,
            phy_header_us: 20,
            mac_header_bits: 246,
            payload_bits: payload_bytes * 8,
            symbol_rate: 24,
            symbol_us: 4,
            rts_us: 52,
            cts_us: 44,
            ack_us: 44,
            w0: 16,
            max_backoff_stage: 6,
            retry_limit: 7,
            long_retry_limit: 4,
            mode,
        };
        cfg.cs_threshold_w = cfg.threshold_for_range(70.0);
        cfg
    }

    /// Carrier-sense threshold whose effective sensing range equals `range_m`.
    pub fn threshold_for_range(&self, range_m: f64) -> f64 {
        self.noise_w + PI * self.tx_power_w / (4.0 * range_m.powi(4))
    }

    /// Returns a copy with the threshold re-tuned for the given effective range.
    pub fn with_cs_range(mut self, range_m: f64) -> Result<Self> {
        if !(range_m.is_finite() && range_m > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "carrier-sense range must be positive, got {range_m}"
            )));
        }
        self.cs_threshold_w = self.threshold_for_range(range_m);
        Ok(self)
    }

    pub fn with_mode(mut self, mode: AccessMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_payload_bytes(mut self, bytes: u64) -> Self {
        self.payload_bits = bytes * 8;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, v) in [
            ("tx_power_w", self.tx_power_w),
            ("noise_w", self.noise_w),
            ("cs_threshold_w", self.cs_threshold_w),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.cs_threshold_w <= self.noise_w {
            return bad(format!(
                "cs_threshold_w ({}) must exceed noise_w ({})",
                self.cs_threshold_w, self.noise_w
            ));
        }
        if self.path_loss_exponent != 4.0 {
            return bad(format!(
                "only path_loss_exponent = 4 is supported, got {}",
                self.path_loss_exponent
            ));
        }
        for (name, v) in [
            ("slot_us", self.slot_us),
            ("sifs_us", self.sifs_us),
            ("difs_us", self.difs_us),
            ("phy_header_us", self.phy_header_us),
            ("symbol_rate", self.symbol_rate),
            ("symbol_us", self.symbol_us),
            ("rts_us", self.rts_us),
            ("cts_us", self.cts_us),
            ("ack_us", self.ack_us),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.mac_header_bits + self.payload_bits == 0 {
            return bad("frame carries no bits".into());
        }
        // tau(0) = 2 / (W0 - 1) must stay a probability.
        if self.w0 < 3 {
            return bad(format!("w0 must be at least 3, got {}", self.w0));
        }
        if self.max_backoff_stage > 20 {
            return bad(format!(
                "max_backoff_stage {} is unreasonably large",
                self.max_backoff_stage
            ));
        }
        if self.retry_limit <= self.max_backoff_stage {
            return bad(format!(
                "retry_limit ({}) must exceed max_backoff_stage ({})",
                self.retry_limit, self.max_backoff_stage
            ));
        }
        if self.long_retry_limit == 0 {
            return bad("long_retry_limit must be positive".into());
        }
        Ok(())
    }

    /// Plain-text `key = value` form.
    pub fn to_kv(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let cfg: PhyMacConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
