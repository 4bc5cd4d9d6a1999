//! Distribution of the number of active nodes in a sharing area.
//!
//! The area around a sharing area is quantised into eight sectors. With
//! `D` of them busy, the weights `O[eta][D]` spread the configuration over
//! `eta`, the level at which each node is active with probability `eta / 8`.
//! The default table puts all weight on `eta = 8 - D`: a node is active
//! with probability equal to the fraction of idle sectors. Other tables can
//! be supplied as long as each column sums to `C(8, D)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::binomial_coefficient;

pub const SECTORS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorModel {
    /// `coefficients[eta][d]`.
    coefficients: [[f64; SECTORS + 1]; SECTORS + 1],
}

impl Default for SectorModel {
    fn default() -> Self {
        let mut coefficients = [[0.0; SECTORS + 1]; SECTORS + 1];
        for d in 0..=SECTORS {
            coefficients[SECTORS - d][d] = binomial_coefficient(SECTORS as u64, d as u64);
        }
        SectorModel { coefficients }
    }
}

impl SectorModel {
    pub fn new(coefficients: [[f64; SECTORS + 1]; SECTORS + 1]) -> Result<Self> {
        let model = SectorModel { coefficients };
        model.validate()?;
        Ok(model)
    }

    pub fn coefficients(&self) -> &[[f64; SECTORS + 1]; SECTORS + 1] {
        &self.coefficients
    }

    pub fn validate(&self) -> Result<()> {
        for d in 0..=SECTORS {
            let mut column = 0.0;
            for eta in 0..=SECTORS {
                let w = self.coefficients[eta][d];
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "sector weight O[{eta}][{d}] = {w} is not a nonnegative number"
                    )));
                }
                column += w;
            }
            let want = binomial_coefficient(SECTORS as u64, d as u64);
            if (column - want).abs() > 1e-9 * want {
                return Err(Error::InvalidConfig(format!(
                    "sector weights for D = {d} sum to {column}, expected {want}"
                )));
            }
        }
        Ok(())
    }

    /// `p_eta` for `eta = 0..=8` given the busy probability of one sector.
    pub fn eta_probabilities(&self, p_on: f64) -> [f64; SECTORS + 1] {
        let mut out = [0.0; SECTORS + 1];
        for (eta, row) in self.coefficients.iter().enumerate() {
            out[eta] = row
                .iter()
                .enumerate()
                .map(|(d, &w)| w * p_on.powi(d as i32) * (1.0 - p_on).powi((SECTORS - d) as i32))
                .sum();
        }
        out
    }
}

/// `P[N_a = a | N = n]` for `a = 0..=n`.
pub fn active_node_pmf(n: usize, p_on: f64, model: &SectorModel) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p_on) {
        return Err(invalid("p_on", format!("must lie in [0, 1], got {p_on}")));
    }
    model.validate()?;
    Ok(active_node_pmf_unchecked(n, p_on, model))
}

pub(crate) fn active_node_pmf_unchecked(n: usize, p_on: f64, model: &SectorModel) -> Vec<f64> {
    let p_eta = model.eta_probabilities(p_on);
    let mut pmf = vec![0.0; n + 1];
    for (eta, &weight) in p_eta.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let q = eta as f64 / SECTORS as f64;
        for (a, slot) in pmf.iter_mut().enumerate() {
            *slot += binomial_coefficient(n as u64, a as u64)
                * q.powi(a as i32)
                * (1.0 - q).powi((n - a) as i32)
                * weight;
        }
    }
    pmf
}
