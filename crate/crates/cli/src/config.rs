//! Flat key-value experiment configuration.
//!
//! Every key is optional; missing keys take the defaults below, which
//! describe the full parameter sweep (5 densities x 3 ranges x 2 payloads x
//! 2 access modes) with the reference PHY/MAC timing. List-valued keys
//! define the sweep; the cartesian product is evaluated.

use std::path::{Path, PathBuf};

use aggint::des::SensingModel;
use aggint::point_process::ProcessKind;
use aggint::{AccessMode, PhyMacConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Poisson number of transmitters placed uniformly on the grid.
    Poisson,
    /// Regular `grid_rows x grid_cols` lattice at `grid_spacing_m`.
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    // Sweep.
    pub lambdas: Vec<f64>,
    pub cs_ranges_m: Vec<f64>,
    pub payloads_bytes: Vec<u64>,
    pub modes: Vec<AccessMode>,

    // PHY / MAC. The carrier-sense threshold is derived from each range.
    pub tx_power_w: f64,
    pub noise_w: f64,
    pub path_loss_exponent: f64,
    pub slot_us: u64,
    pub sifs_us: u64,
    pub difs_us: u64,
    pub phy_header_us: u64,
    pub mac_header_bits: u64,
    pub symbol_rate: u64,
    pub symbol_us: u64,
    pub rts_us: u64,
    pub cts_us: u64,
    pub ack_us: u64,
    pub w0: u32,
    pub max_backoff_stage: u32,
    pub retry_limit: u32,
    pub long_retry_limit: u32,

    // Point-process oracles. The hardcore distance equals the sweep range.
    pub processes: Vec<ProcessKind>,
    pub iterations: usize,
    pub region_radius_m: f64,

    // Packet-level simulation.
    pub layout: Layout,
    pub grid_m: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub grid_spacing_m: f64,
    pub duration_us: u64,
    pub repetitions: usize,
    pub write_traces: bool,
    /// `aggregate` (sum of all frames) or `per_signal` (strongest frame).
    pub sensing: SensingModel,
    /// Never corrupt frames by interference.
    pub ideal_reception: bool,

    // Law sampling and binning.
    pub law_t_min_w: f64,
    pub law_t_max_w: f64,
    pub law_points_per_decade: usize,
    pub bins_per_decade: usize,

    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let base = PhyMacConfig::reference(AccessMode::RtsCts, 500);
        ExperimentConfig {
            lambdas: vec![1e-4, 2e-4, 3e-4, 4e-4, 5e-4],
            cs_ranges_m: vec![50.0, 70.0, 100.0],
            payloads_bytes: vec![500, 1000],
            modes: vec![AccessMode::Basic, AccessMode::RtsCts],
            tx_power_w: base.tx_power_w,
            noise_w: base.noise_w,
            path_loss_exponent: base.path_loss_exponent,
            slot_us: base.slot_us,
            sifs_us: base.sifs_us,
            difs_us: base.difs_us,
            phy_header_us: base.phy_header_us,
            mac_header_bits: base.mac_header_bits,
            symbol_rate: base.symbol_rate,
            symbol_us: base.symbol_us,
            rts_us: base.rts_us,
            cts_us: base.cts_us,
            ack_us: base.ack_us,
            w0: base.w0,
            max_backoff_stage: base.max_backoff_stage,
            retry_limit: base.retry_limit,
            long_retry_limit: base.long_retry_limit,
            processes: vec![ProcessKind::Ppp, ProcessKind::Mhc, ProcessKind::Ssi],
            iterations: 100_000,
            region_radius_m: 282.0,
            layout: Layout::Poisson,
            grid_m: 500.0,
            grid_rows: 9,
            grid_cols: 9,
            grid_spacing_m: 50.0,
            duration_us: 30_000_000,
            repetitions: 50,
            write_traces: false,
            sensing: SensingModel::Aggregate,
            ideal_reception: false,
            law_t_min_w: 1e-14,
            law_t_max_w: 1e-6,
            law_points_per_decade: 20,
            bins_per_decade: 10,
            seed: 1,
            out_dir: PathBuf::from("results"),
        }
    }
}

/// One `(lambda, R, payload, mode)` combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub cs_range_m: f64,
    pub payload_bytes: u64,
    pub mode: AccessMode,
}

impl SweepPoint {
    /// Leading CSV columns shared by every per-point file.
    pub const CSV_HEADER: &'static str = "lambda,cs_range_m,mode,payload_bytes";

    pub fn csv_prefix(&self) -> String {
        format!(
            "{:e},{},{},{}",
            self.lambda, self.cs_range_m, self.mode, self.payload_bytes
        )
    }

    /// Directory-safe label.
    pub fn label(&self) -> String {
        format!(
            "lambda{:e}_r{}_{}_{}B",
            self.lambda, self.cs_range_m, self.mode, self.payload_bytes
        )
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Canonical serialisation; its hash identifies the run.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> CliResult<()> {
        let empty = |name: &str, len: usize| {
            if len == 0 {
                Err(CliError::Config(format!("sweep list `{name}` is empty")))
            } else {
                Ok(())
            }
        };
        empty("lambdas", self.lambdas.len())?;
        empty("cs_ranges_m", self.cs_ranges_m.len())?;
        empty("payloads_bytes", self.payloads_bytes.len())?;
        empty("modes", self.modes.len())?;
        if let Some(l) = self.lambdas.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(CliError::Config(format!(
                "lambda must be positive, got {l}"
            )));
        }
        if let Some(r) = self
            .cs_ranges_m
            .iter()
            .find(|&&r| !(r > 0.0 && r.is_finite()))
        {
            return Err(CliError::Config(format!(
                "cs range must be positive, got {r}"
            )));
        }
        if self.iterations == 0 {
            return Err(CliError::Config("iterations must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(CliError::Config("repetitions must be at least 1".into()));
        }
        if self.duration_us == 0 {
            return Err(CliError::Config("duration_us must be positive".into()));
        }
        if !(self.law_t_min_w > 0.0 && self.law_t_max_w > self.law_t_min_w) {
            return Err(CliError::Config(format!(
                "law grid needs 0 < law_t_min_w < law_t_max_w, got [{}, {}]",
                self.law_t_min_w, self.law_t_max_w
            )));
        }
        if self.law_points_per_decade == 0 || self.bins_per_decade == 0 {
            return Err(CliError::Config(
                "points and bins per decade must be positive".into(),
            ));
        }
        for point in self.sweep() {
            self.phy_mac(&point)?;
        }
        Ok(())
    }

    /// Cartesian product in a fixed order: mode, payload, range, density.
    pub fn sweep(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &payload_bytes in &self.payloads_bytes {
                for &cs_range_m in &self.cs_ranges_m {
                    for &lambda in &self.lambdas {
                        out.push(SweepPoint {
                            lambda,
                            cs_range_m,
                            payload_bytes,
                            mode,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn phy_mac(&self, point: &SweepPoint) -> CliResult<PhyMacConfig> {
        let mut cfg = PhyMacConfig {
            tx_power_w: self.tx_power_w,
            noise_w: self.noise_w,
            path_loss_exponent: self.path_loss_exponent,
            slot_us: self.slot_us,
            sifs_us: self.sifs_us,
            difs_us: self.difs_us,
            phy_header_us: self.phy_header_us,
            mac_header_bits: self.mac_header_bits,
            symbol_rate: self.symbol_rate,
            symbol_us: self.symbol_us,
            rts_us: self.rts_us,
            cts_us: self.cts_us,
            ack_us: self.ack_us,
            w0: self.w0,
            max_backoff_stage: self.max_backoff_stage,
            retry_limit: self.retry_limit,
            long_retry_limit: self.long_retry_limit,
            ..PhyMacConfig::reference(point.mode, point.payload_bytes)
        };
        cfg.cs_threshold_w = cfg.threshold_for_range(point.cs_range_m);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_has_sixty_points() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.sweep().len(), 60);
    }

    #[test]
    fn partial_file_overrides_defaults() {
        let cfg =
            ExperimentConfig::from_toml("lambdas = [2e-4]\nmodes = [\"rts\"]\nseed = 9\n").unwrap();
        assert_eq!(cfg.lambdas, vec![2e-4]);
        assert_eq!(cfg.modes, vec![AccessMode::RtsCts]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.iterations, 100_000);
        assert_eq!(cfg.sensing, SensingModel::Aggregate);
        let alt = ExperimentConfig::from_toml("sensing = \"per_signal\"\nideal_reception = true")
            .unwrap();
        assert_eq!(alt.sensing, SensingModel::PerSignal);
        assert!(alt.ideal_reception);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ExperimentConfig::from_toml("lambdas = []").is_err());
        assert!(ExperimentConfig::from_toml("iterations = 0").is_err());
        assert!(ExperimentConfig::from_toml("unknown_key = 1").is_err());
        assert!(ExperimentConfig::from_toml("modes = [\"pcf\"]").is_err());
    }

    #[test]
    fn round_trip_and_hash() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        let other = ExperimentConfig {
            seed: 2,
            ..cfg.clone()
        };
        assert_ne!(other.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn range_sets_threshold() {
        let cfg = ExperimentConfig::default();
        let point = SweepPoint {
            lambda: 1e-4,
            cs_range_m: 70.0,
            payload_bytes: 500,
            mode: AccessMode::RtsCts,
        };
        let phy = cfg.phy_mac(&point).unwrap();
        assert_eq!(phy, PhyMacConfig::reference(AccessMode::RtsCts, 500));
    }
}
