//! Aggregate-interference law of a Poisson field of transmitters with
//! fourth-power path loss and Rayleigh fading.
//!
//! With `c = lambda pi^2 sqrt(p) / 4` the CDF is `erfc(c / sqrt(t))`, a
//! Lévy distribution with scale `2 c^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::{erfc, erfc_inv};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceLaw {
    pub lambda_eff: f64,
    pub tx_power_w: f64,
}

impl InterferenceLaw {
    pub fn new(lambda_eff: f64, tx_power_w: f64) -> Result<Self> {
        if !(lambda_eff >= 0.0 && lambda_eff.is_finite()) {
            return Err(invalid(
                "lambda_eff",
                format!("must be nonnegative, got {lambda_eff}"),
            ));
        }
        if !(tx_power_w > 0.0 && tx_power_w.is_finite()) {
            return Err(invalid(
                "tx_power_w",
                format!("must be positive, got {tx_power_w}"),
            ));
        }
        Ok(InterferenceLaw {
            lambda_eff,
            tx_power_w,
        })
    }

    /// `c` such that `F(t) = erfc(c / sqrt(t))`.
    pub fn scale(&self) -> f64 {
        self.lambda_eff * PI * PI * self.tx_power_w.sqrt() / 4.0
    }

    pub fn cdf(&self, t_watts: f64) -> Result<f64> {
        check_t(t_watts)?;
        Ok(self.cdf_unchecked(t_watts))
    }

    pub(crate) fn cdf_unchecked(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return 1.0;
        }
        erfc(self.scale() / t.sqrt())
    }

    pub fn pdf(&self, t_watts: f64) -> Result<f64> {
        check_t(t_watts)?;
        Ok(self.pdf_unchecked(t_watts))
    }

    pub(crate) fn pdf_unchecked(&self, t: f64) -> f64 {
        let lambda = self.lambda_eff;
        let p = self.tx_power_w;
        let exponent = -PI.powi(4) * lambda * lambda * p / (16.0 * t);
        exponent.exp() * PI.powf(1.5) * (lambda / p) / (4.0 * (t / p).powf(1.5))
    }

    /// Value `t` with `F(t) = u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(invalid("u", format!("must lie in (0, 1), got {u}")));
        }
        let x = erfc_inv(u);
        Ok((self.scale() / x).powi(2))
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid level")
    }

    /// Location of the density maximum, `pi^4 lambda^2 p / 24`.
    pub fn mode(&self) -> f64 {
        PI.powi(4) * self.lambda_eff.powi(2) * self.tx_power_w / 24.0
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(invalid("t_watts", format!("must be positive, got {t}")));
    }
    Ok(())
}

/// Samples the CDF and PDF on a log-spaced grid, returning `(t, cdf, pdf)`.
pub fn sample_law_log_grid(
    law: &InterferenceLaw,
    t_min: f64,
    t_max: f64,
    points_per_decade: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(invalid(
            "range",
            format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]"),
        ));
    }
    let decades = (t_max / t_min).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize).max(1);
    Ok((0..=n)
        .map(|i| {
            let t = t_min * 10f64.powf(decades * i as f64 / n as f64);
            (t, law.cdf_unchecked(t), law.pdf_unchecked(t))
        })
        .collect())
}
