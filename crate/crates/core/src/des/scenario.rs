use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::config::PhyMacConfig;
use crate::error::{Error, Result};

/// Receiver placement relative to its transmitter.
pub const RECEIVER_OFFSET_M: (f64, f64) = (5.0, 5.0);

/// A deployment to simulate: transmitters, their receivers and the point
/// where aggregate power is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub transmitters: Vec<(f64, f64)>,
    pub receivers: Vec<(f64, f64)>,
    pub cfg: PhyMacConfig,
    pub grid_m: f64,
    pub duration_us: u64,
    pub seed: u64,
    pub measuring_point: (f64, f64),
}

impl Scenario {
    /// Poisson number of transmitters with mean `lambda * grid_m^2`, placed
    /// uniformly on the square grid.
    pub fn poisson(
        lambda: f64,
        cfg: PhyMacConfig,
        grid_m: f64,
        duration_us: u64,
        seed: u64,
    ) -> Result<Self> {
        check_common(&cfg, grid_m, duration_us)?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        // The topology stream is separate from the simulation stream so
        // that run options never change the deployment.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let mean = lambda * grid_m * grid_m;
        let count = if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
        } else {
            0
        };
        let transmitters = (0..count)
            .map(|_| (rng.random::<f64>() * grid_m, rng.random::<f64>() * grid_m))
            .collect();
        Ok(Self::from_transmitters(
            transmitters,
            cfg,
            grid_m,
            duration_us,
            seed,
        ))
    }

    /// Regular `rows x cols` grid with the given spacing, centred on the
    /// square.
    pub fn grid(
        rows: usize,
        cols: usize,
        spacing_m: f64,
        cfg: PhyMacConfig,
        grid_m: f64,
        duration_us: u64,
        seed: u64,
    ) -> Result<Self> {
        check_common(&cfg, grid_m, duration_us)?;
        let width = spacing_m * (cols.max(1) - 1) as f64;
        let height = spacing_m * (rows.max(1) - 1) as f64;
        if width > grid_m || height > grid_m {
            return Err(Error::InvalidConfig(format!(
                "{rows}x{cols} grid at {spacing_m} m does not fit in {grid_m} m"
            )));
        }
        let x0 = 0.5 * (grid_m - width);
        let y0 = 0.5 * (grid_m - height);
        let mut transmitters = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                transmitters.push((x0 + c as f64 * spacing_m, y0 + r as f64 * spacing_m));
            }
        }
        Ok(Self::from_transmitters(
            transmitters,
            cfg,
            grid_m,
            duration_us,
            seed,
        ))
    }

    /// Attaches a receiver at the fixed offset from each transmitter; when
    /// that would leave the grid, the offset is mirrored on that axis.
    pub fn from_transmitters(
        transmitters: Vec<(f64, f64)>,
        cfg: PhyMacConfig,
        grid_m: f64,
        duration_us: u64,
        seed: u64,
    ) -> Self {
        let receivers = transmitters
            .iter()
            .map(|&(x, y)| {
                let (dx, dy) = RECEIVER_OFFSET_M;
                let rx = if x + dx <= grid_m { x + dx } else { x - dx };
                let ry = if y + dy <= grid_m { y + dy } else { y - dy };
                (rx, ry)
            })
            .collect();
        Scenario {
            transmitters,
            receivers,
            cfg,
            grid_m,
            duration_us,
            seed,
            measuring_point: (0.5 * grid_m, 0.5 * grid_m),
        }
    }

    pub fn link_count(&self) -> usize {
        self.transmitters.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_common(&self.cfg, self.grid_m, self.duration_us)?;
        if self.receivers.len() != self.transmitters.len() {
            return Err(Error::InvalidConfig(
                "every transmitter needs one receiver".into(),
            ));
        }
        let inside = |&(x, y): &(f64, f64)| {
            (0.0..=self.grid_m).contains(&x) && (0.0..=self.grid_m).contains(&y)
        };
        if !self.receivers.iter().all(inside) {
            return Err(Error::InvalidConfig("receiver outside the grid".into()));
        }
        Ok(())
    }

    /// Plain-text `key = value` form.
    pub fn to_kv(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}

fn check_common(cfg: &PhyMacConfig, grid_m: f64, duration_us: u64) -> Result<()> {
    cfg.validate()?;
    if !(grid_m > 0.0 && grid_m.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "grid must have positive area, got side {grid_m}"
        )));
    }
    if duration_us == 0 {
        return Err(Error::InvalidConfig("duration_us must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AccessMode;

    fn cfg() -> PhyMacConfig {
        PhyMacConfig::reference(AccessMode::RtsCts, 500)
    }

    #[test]
    fn poisson_count_has_expected_mean() {
        let n: usize = (0..2000)
            .map(|seed| {
                Scenario::poisson(1e-4, cfg(), 500.0, 1_000, seed)
                    .unwrap()
                    .link_count()
            })
            .sum();
        let mean = n as f64 / 2000.0;
        // sd of the mean is 5 / sqrt(2000) ~ 0.11
        assert!((mean - 25.0).abs() < 0.5, "{mean}");
    }

    #[test]
    fn grid_positions_are_exact() {
        let s = Scenario::grid(9, 9, 50.0, cfg(), 500.0, 1_000, 0).unwrap();
        assert_eq!(s.link_count(), 81);
        assert_eq!(s.transmitters[0], (50.0, 50.0));
        assert_eq!(s.transmitters[40], (250.0, 250.0));
        assert_eq!(s.receivers[40], (255.0, 255.0));
        s.validate().unwrap();
    }

    #[test]
    fn same_seed_same_topology() {
        let a = Scenario::poisson(3e-4, cfg(), 500.0, 1_000, 9).unwrap();
        let b = Scenario::poisson(3e-4, cfg(), 500.0, 1_000, 9).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(Scenario::poisson(1e-4, cfg(), 0.0, 1_000, 0).is_err());
        assert!(Scenario::poisson(1e-4, cfg(), 500.0, 0, 0).is_err());
        assert!(Scenario::grid(20, 20, 50.0, cfg(), 500.0, 1_000, 0).is_err());
    }

    #[test]
    fn receivers_mirror_at_the_edge() {
        let s = Scenario::from_transmitters(vec![(498.0, 10.0)], cfg(), 500.0, 10, 0);
        assert_eq!(s.receivers[0], (493.0, 15.0));
    }

    #[test]
    fn kv_round_trip() {
        let s = Scenario::grid(2, 2, 50.0, cfg(), 500.0, 3_000_000, 4).unwrap();
        assert_eq!(Scenario::from_kv(&s.to_kv()).unwrap(), s);
    }
}
