//! Busy probability of a sharing area, the number of simultaneous
//! transmitters in it, and the resulting effective active node density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::dcf::solve_dcf;
use crate::analytic::sector::{active_node_pmf_unchecked, SectorModel};
use crate::analytic::sensing::{effective_cs_range, sharing_area_mean};
use crate::analytic::slots::{power_distribution, slot_durations};
use crate::config::PhyMacConfig;
use crate::error::{invalid, Result};
use crate::numerics;

/// Poisson tail mass below which the sum over deployed nodes is cut.
pub const POISSON_TAIL_TOL: f64 = 1e-12;
pub const P_ON_TOL: f64 = 1e-9;

/// Everything about one sharing area that does not depend on `p_on`.
#[derive(Debug, Clone)]
pub struct SharingAreaModel {
    pub lambda: f64,
    pub cs_range_m: f64,
    /// Poisson mean of the deployed count.
    pub mean_count: f64,
    /// `P[N = n]` for `n = 0..=n_max`.
    pub count_pmf: Vec<f64>,
    /// `B_a(j)` for `a = 0..=n_max`.
    pub power: Vec<Vec<f64>>,
    pub sector: SectorModel,
}

impl SharingAreaModel {
    pub fn new(lambda: f64, cfg: &PhyMacConfig, sector: &SectorModel) -> Result<Self> {
        Self::with_tail_tolerance(lambda, cfg, sector, POISSON_TAIL_TOL)
    }

    pub fn with_tail_tolerance(
        lambda: f64,
        cfg: &PhyMacConfig,
        sector: &SectorModel,
        tail_tol: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be positive, got {lambda}")));
        }
        cfg.validate()?;
        sector.validate()?;
        let cs_range_m = effective_cs_range(cfg)?;
        let mean_count = sharing_area_mean(lambda, cs_range_m);
        let n_max = numerics::poisson_truncation(mean_count, tail_tol);
        let durations = slot_durations(cfg)?;
        let mut power = vec![vec![1.0]];
        for a in 1..=n_max {
            let fp = solve_dcf(a, cfg)?;
            power.push(power_distribution(a, fp.tau, &durations)?);
        }
        Ok(SharingAreaModel {
            lambda,
            cs_range_m,
            mean_count,
            count_pmf: numerics::poisson_pmf(mean_count, n_max),
            power,
            sector: sector.clone(),
        })
    }

    pub fn n_max(&self) -> usize {
        self.count_pmf.len() - 1
    }

    /// Right-hand side of the self-consistency equation for `p_on`: the
    /// probability that the sharing area is busy when each surrounding
    /// sector is busy with probability `p_on`.
    pub fn busy_probability(&self, p_on: f64) -> f64 {
        let mut total = 0.0;
        for (n, &pn) in self.count_pmf.iter().enumerate().skip(1) {
            let active = active_node_pmf_unchecked(n, p_on, &self.sector);
            let inner: f64 = active
                .iter()
                .enumerate()
                .skip(1)
                .map(|(a, &pa)| pa * (1.0 - self.power[a][0]))
                .sum();
            total += pn * inner;
        }
        total
    }

    /// `P[Z = z]` for `z = 0..=n_max`.
    pub fn tx_count_pmf(&self, p_on: f64) -> Vec<f64> {
        let n_max = self.n_max();
        // Mixture over n of P[N_a = a | N = n], then push through B_a.
        let mut active_mix = vec![0.0; n_max + 1];
        for (n, &pn) in self.count_pmf.iter().enumerate() {
            for (a, pa) in active_node_pmf_unchecked(n, p_on, &self.sector)
                .into_iter()
                .enumerate()
            {
                active_mix[a] += pn * pa;
            }
        }
        let mut z_pmf = vec![0.0; n_max + 1];
        for (a, &weight) in active_mix.iter().enumerate() {
            for (z, &b) in self.power[a].iter().enumerate() {
                z_pmf[z] += weight * b;
            }
        }
        z_pmf
    }
}

/// Outcome of the `p_on` root search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PonSolution {
    pub p_on: f64,
    /// `|busy_probability(p_on) - p_on|`.
    pub residual: f64,
    /// False when `g(p) = busy_probability(p) - p` has no sign change on
    /// [0, 1]; `p_on` is then the endpoint with the smaller `|g|`.
    pub bracketed: bool,
}

pub fn solve_p_on(lambda: f64, cfg: &PhyMacConfig, sector: &SectorModel) -> Result<PonSolution> {
    let model = SharingAreaModel::new(lambda, cfg, sector)?;
    Ok(solve_p_on_model(&model))
}

pub fn solve_p_on_model(model: &SharingAreaModel) -> PonSolution {
    let g = |p: f64| model.busy_probability(p) - p;
    let g0 = g(0.0);
    let g1 = g(1.0);
    if g0 == 0.0 {
        return PonSolution {
            p_on: 0.0,
            residual: 0.0,
            bracketed: true,
        };
    }
    if g1 == 0.0 {
        return PonSolution {
            p_on: 1.0,
            residual: 0.0,
            bracketed: true,
        };
    }
    if (g0 > 0.0) == (g1 > 0.0) {
        let (p_on, residual) = if g0.abs() <= g1.abs() {
            (0.0, g0.abs())
        } else {
            (1.0, g1.abs())
        };
        return PonSolution {
            p_on,
            residual,
            bracketed: false,
        };
    }
    let p_on = numerics::bisect(g, 0.0, 1.0, 1e-14, 200);
    PonSolution {
        p_on,
        residual: g(p_on).abs(),
        bracketed: true,
    }
}

/// Full sharing-area analysis for one `(lambda, cfg)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingAreaAnalysis {
    pub lambda_init: f64,
    pub cs_range_m: f64,
    pub p_on_star: f64,
    pub p_on_residual: f64,
    pub p_on_bracketed: bool,
    pub z_pmf: Vec<f64>,
    pub e_z: f64,
    pub lambda_eff: f64,
}

impl SharingAreaAnalysis {
    pub fn to_kv(&self) -> String {
        toml::to_string(self).expect("analysis serializes")
    }
}

pub fn analyze(
    lambda: f64,
    cfg: &PhyMacConfig,
    sector: &SectorModel,
) -> Result<SharingAreaAnalysis> {
    let model = SharingAreaModel::new(lambda, cfg, sector)?;
    let sol = solve_p_on_model(&model);
    let z_pmf = model.tx_count_pmf(sol.p_on);
    let (e_z, lambda_eff) = effective_density(&z_pmf, model.cs_range_m);
    Ok(SharingAreaAnalysis {
        lambda_init: lambda,
        cs_range_m: model.cs_range_m,
        p_on_star: sol.p_on,
        p_on_residual: sol.residual,
        p_on_bracketed: sol.bracketed,
        z_pmf,
        e_z,
        lambda_eff,
    })
}

/// `P[Z = z]` at a given `p_on`.
pub fn tx_count_distribution(
    lambda: f64,
    cfg: &PhyMacConfig,
    sector: &SectorModel,
    p_on: f64,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p_on) {
        return Err(invalid("p_on", format!("must lie in [0, 1], got {p_on}")));
    }
    Ok(SharingAreaModel::new(lambda, cfg, sector)?.tx_count_pmf(p_on))
}

/// Returns `(E[Z], lambda')`.
pub fn effective_density(z_pmf: &[f64], cs_range_m: f64) -> (f64, f64) {
    let e_z: f64 = z_pmf.iter().enumerate().map(|(z, &p)| z as f64 * p).sum();
    (e_z, e_z / (PI * (cs_range_m / 2.0).powi(2)))
}

/// Closed-form density of a Matérn hardcore process with exclusion
/// distance `exclusion_m`, `(1 - exp(-lambda pi D^2)) / (pi D^2)`.
pub fn mhc_density_baseline(lambda: f64, exclusion_m: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(invalid(
            "lambda",
            format!("must be nonnegative, got {lambda}"),
        ));
    }
    if !(exclusion_m > 0.0) {
        return Err(invalid(
            "exclusion_m",
            format!("must be positive, got {exclusion_m}"),
        ));
    }
    let area = PI * exclusion_m * exclusion_m;
    Ok(-(-lambda * area).exp_m1() / area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AccessMode;

    fn rts500() -> PhyMacConfig {
        PhyMacConfig::reference(AccessMode::RtsCts, 500)
    }

    #[test]
    fn sparse_network_is_idle() {
        // With almost no neighbours, p_on is the chance that one node
        // exists (mean lambda pi R^2) times its own busy fraction.
        let model = SharingAreaModel::new(1e-9, &rts500(), &SectorModel::default()).unwrap();
        let sol = solve_p_on_model(&model);
        let expected = model.mean_count * (1.0 - model.power[1][0]);
        assert!(
            (sol.p_on / expected - 1.0).abs() < 1e-3,
            "{} vs {expected}",
            sol.p_on
        );
        let z = tx_count_distribution(1e-9, &rts500(), &SectorModel::default(), sol.p_on).unwrap();
        assert!(z[0] > 1.0 - 1e-5, "{}", z[0]);
    }

    #[test]
    fn root_finder_agrees_with_damped_iteration() {
        let model = SharingAreaModel::new(1e-4, &rts500(), &SectorModel::default()).unwrap();
        let sol = solve_p_on_model(&model);
        assert!(sol.bracketed);
        assert!(sol.residual < P_ON_TOL);
        let mut p = 0.5;
        for _ in 0..10_000 {
            let next = 0.5 * p + 0.5 * model.busy_probability(p);
            if (next - p).abs() < 1e-15 {
                break;
            }
            p = next;
        }
        assert!((p - sol.p_on).abs() < 1e-6, "{p} vs {}", sol.p_on);
    }

    #[test]
    fn z_pmf_normalised_and_density_bounded() {
        let a = analyze(1e-4, &rts500(), &SectorModel::default()).unwrap();
        let total: f64 = a.z_pmf.iter().sum();
        assert!((1.0 - 1e-6..=1.0 + 1e-12).contains(&total));
        assert!(a.lambda_eff <= a.lambda_init);
        let area = PI * (a.cs_range_m / 2.0).powi(2);
        assert!((a.lambda_eff - a.e_z / area).abs() < 1e-18);
    }

    #[test]
    fn density_arithmetic() {
        let (_, l) = effective_density(&[0.9, 0.1], 70.0);
        assert!((l - 0.1 / (PI * 35.0 * 35.0)).abs() < 1e-18);
        assert!((l - 2.598e-5).abs() < 1e-8);
    }

    #[test]
    fn mhc_baseline_values() {
        let v = mhc_density_baseline(1e-4, 70.0).unwrap();
        assert!((v - 5.102e-5).abs() < 1e-8, "{v}");
        let sat = mhc_density_baseline(1e3, 70.0).unwrap();
        assert!((sat - 1.0 / (PI * 4900.0)).abs() < 1e-15);
        assert!((sat - 6.496e-5).abs() < 1e-8);
        let tiny = mhc_density_baseline(1e-12, 70.0).unwrap();
        assert!((tiny / 1e-12 - 1.0).abs() < 1e-6);
        assert!(mhc_density_baseline(1e-4, 0.0).is_err());
    }

    #[test]
    fn kv_form_has_fields() {
        let a = analyze(2e-4, &rts500(), &SectorModel::default()).unwrap();
        let text = a.to_kv();
        for key in [
            "lambda_init",
            "cs_range_m",
            "p_on_star",
            "z_pmf",
            "e_z",
            "lambda_eff",
        ] {
            assert!(text.contains(key), "{text}");
        }
        let back: SharingAreaAnalysis = toml::from_str(&text).unwrap();
        assert_eq!(back, a);
    }
}
