//! Weighted empirical distributions and distances between them.

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use crate::analytic::InterferenceLaw;
use crate::error::{invalid, Error, Result};

/// Weighted observations of aggregate power: `(value_watts, weight)`.
///
/// Weights are dwell times in µs for simulator output and 1 for Monte Carlo
/// draws.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    observations: Vec<(f64, f64)>,
}

impl EmpiricalSample {
    pub fn new(observations: Vec<(f64, f64)>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        for &(v, w) in &observations {
            if !v.is_finite() {
                return Err(invalid("value_watts", format!("not finite: {v}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid("weight", format!("must be positive, got {w}")));
            }
        }
        Ok(EmpiricalSample { observations })
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        Self::new(values.into_iter().map(|v| (v, 1.0)).collect())
    }

    pub fn observations(&self) -> &[(f64, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.observations.iter().map(|o| o.1).sum()
    }

    pub fn mean(&self) -> f64 {
        let w = self.total_weight();
        self.observations.iter().map(|&(v, wi)| v * wi).sum::<f64>() / w
    }

    /// Concatenation; associative, and order-independent up to the order
    /// of observations, which no statistic here depends on.
    pub fn merge(mut self, other: EmpiricalSample) -> EmpiricalSample {
        self.observations.extend(other.observations);
        self
    }

    pub fn merge_all(
        samples: impl IntoIterator<Item = EmpiricalSample>,
    ) -> Result<EmpiricalSample> {
        samples
            .into_iter()
            .reduce(EmpiricalSample::merge)
            .ok_or(Error::EmptySample)
    }

    /// Splits off the mass at exactly zero (idle medium). Returns the
    /// fraction of total weight at zero and the remaining positive part,
    /// if any.
    pub fn split_zero_atom(&self) -> (f64, Option<EmpiricalSample>) {
        let total = self.total_weight();
        let positive: Vec<_> = self
            .observations
            .iter()
            .copied()
            .filter(|o| o.0 > 0.0)
            .collect();
        let pos_weight: f64 = positive.iter().map(|o| o.1).sum();
        let atom = ((total - pos_weight) / total).max(0.0);
        let rest = if positive.is_empty() {
            None
        } else {
            Some(EmpiricalSample {
                observations: positive,
            })
        };
        (atom, rest)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "value_watts,weight")?;
        for &(v, w) in &self.observations {
            writeln!(out, "{v:e},{w}")?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv). Lines
    /// starting with `#` are ignored.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut observations = Vec::new();
        let mut seen_header = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                seen_header = true;
                if line.starts_with("value_watts") {
                    continue;
                }
            }
            let (v, w) = line.split_once(',').ok_or_else(|| {
                Error::Parse(format!("line {}: expected two columns", lineno + 1))
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            observations.push((parse(v)?, parse(w)?));
        }
        Self::new(observations)
    }
}

/// Right-continuous step CDF of a weighted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    breakpoints: Vec<f64>,
    cumulative: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `F(x) = P[X <= x]`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// `F(x-) = P[X < x]`.
    pub fn eval_left(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b < x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "value_watts,cum_prob")?;
        for (x, c) in self.breakpoints.iter().zip(&self.cumulative) {
            writeln!(out, "{x:e},{c}")?;
        }
        Ok(())
    }
}

pub fn empirical_cdf(sample: &EmpiricalSample) -> Result<EmpiricalCdf> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut obs = sample.observations.clone();
    obs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let total: f64 = obs.iter().map(|o| o.1).sum();
    let mut breakpoints = Vec::with_capacity(obs.len());
    let mut cumulative = Vec::with_capacity(obs.len());
    let mut running = 0.0;
    for (v, w) in obs {
        running += w;
        if breakpoints.last() == Some(&v) {
            *cumulative.last_mut().unwrap() = running / total;
        } else {
            breakpoints.push(v);
            cumulative.push(running / total);
        }
    }
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }
    Ok(EmpiricalCdf {
        breakpoints,
        cumulative,
    })
}

/// Kolmogorov–Smirnov distance between two step CDFs.
pub fn ks_distance(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    // Both are constant between consecutive points of the merged breakpoint
    // set, so the supremum is attained at one of them.
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.breakpoints.len() || j < b.breakpoints.len() {
        let x = match (a.breakpoints.get(i), b.breakpoints.get(j)) {
            (Some(&xa), Some(&xb)) => xa.min(xb),
            (Some(&xa), None) => xa,
            (None, Some(&xb)) => xb,
            (None, None) => unreachable!(),
        };
        while i < a.breakpoints.len() && a.breakpoints[i] <= x {
            i += 1;
        }
        while j < b.breakpoints.len() && b.breakpoints[j] <= x {
            j += 1;
        }
        let fa = if i == 0 { 0.0 } else { a.cumulative[i - 1] };
        let fb = if j == 0 { 0.0 } else { b.cumulative[j - 1] };
        best = best.max((fa - fb).abs());
    }
    best
}

/// Kolmogorov–Smirnov distance between a step CDF and the analytic law,
/// checking both one-sided limits at every breakpoint.
pub fn ks_distance_to_law(cdf: &EmpiricalCdf, law: &InterferenceLaw) -> f64 {
    let mut best: f64 = 0.0;
    let mut prev = 0.0;
    for (&x, &c) in cdf.breakpoints.iter().zip(&cdf.cumulative) {
        let f = if x > 0.0 { law.cdf_unchecked(x) } else { 0.0 };
        best = best.max((prev - f).abs()).max((c - f).abs());
        prev = c;
    }
    best
}

/// Log-binned density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct LogHistogram {
    /// `(bin_left, bin_right, density)`.
    pub bins: Vec<(f64, f64, f64)>,
    /// Weight fraction at exactly zero.
    pub zero_atom: f64,
    /// Weight fraction of positive values outside the binned range.
    pub out_of_range: f64,
}

impl LogHistogram {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bin_left,bin_right,density")?;
        for &(l, r, d) in &self.bins {
            writeln!(out, "{l:e},{r:e},{d:e}")?;
        }
        Ok(())
    }
}

pub fn log_histogram_pdf(
    sample: &EmpiricalSample,
    bins_per_decade: usize,
    range: (f64, f64),
) -> Result<LogHistogram> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(invalid(
            "range",
            format!("need 0 < lo < hi, got ({lo}, {hi})"),
        ));
    }
    if bins_per_decade == 0 {
        return Err(invalid("bins_per_decade", "must be positive"));
    }
    let decades = (hi / lo).log10();
    let nbins = ((decades * bins_per_decade as f64).round() as usize).max(1);
    let step = decades / nbins as f64;
    let edges: Vec<f64> = (0..=nbins)
        .map(|i| lo * 10f64.powf(step * i as f64))
        .collect();
    let total = sample.total_weight();
    let mut mass = vec![0.0; nbins];
    let mut zero = 0.0;
    let mut outside = 0.0;
    for &(v, w) in sample.observations() {
        if v <= 0.0 {
            zero += w;
            continue;
        }
        if v < lo || v > hi {
            outside += w;
            continue;
        }
        let k = (((v / lo).log10() / step).floor() as usize).min(nbins - 1);
        // Guard against rounding at bin edges.
        let k = if v < edges[k] {
            k.saturating_sub(1)
        } else if v >= edges[k + 1] && k + 1 < nbins {
            k + 1
        } else {
            k
        };
        mass[k] += w;
    }
    let bins = mass
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            (
                edges[k],
                edges[k + 1],
                m / total / (edges[k + 1] - edges[k]),
            )
        })
        .collect();
    Ok(LogHistogram {
        bins,
        zero_atom: zero / total,
        out_of_range: outside / total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cdf_of(obs: &[(f64, f64)]) -> EmpiricalCdf {
        empirical_cdf(&EmpiricalSample::new(obs.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn single_observation_steps_to_one() {
        let c = cdf_of(&[(3.0, 2.5)]);
        assert_eq!(c.eval(2.999), 0.0);
        assert_eq!(c.eval(3.0), 1.0);
        assert_eq!(c.eval_left(3.0), 0.0);
    }

    #[test]
    fn weighted_steps() {
        let c = cdf_of(&[(1.0, 1.0), (2.0, 1.0)]);
        assert_eq!(c.cumulative(), &[0.5, 1.0]);
        let c = cdf_of(&[(2.0, 3.0), (1.0, 1.0)]);
        assert_eq!(c.breakpoints(), &[1.0, 2.0]);
        assert_eq!(c.cumulative(), &[0.25, 1.0]);
        let c = cdf_of(&[(1.0, 1.0), (1.0, 1.0), (2.0, 2.0)]);
        assert_eq!(c.breakpoints(), &[1.0, 2.0]);
        assert_eq!(c.cumulative(), &[0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_samples() {
        assert_eq!(EmpiricalSample::new(vec![]), Err(Error::EmptySample));
        assert!(EmpiricalSample::new(vec![(1.0, 0.0)]).is_err());
        assert!(EmpiricalSample::new(vec![(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn ks_basics() {
        let a = cdf_of(&[(1.0, 1.0), (2.0, 1.0)]);
        assert_eq!(ks_distance(&a, &a), 0.0);
        let x = cdf_of(&[(1.0, 1.0)]);
        let y = cdf_of(&[(2.0, 1.0)]);
        assert_eq!(ks_distance(&x, &y), 1.0);
        let b = cdf_of(&[(1.5, 1.0)]);
        assert_eq!(ks_distance(&a, &b), 0.5);
        assert_eq!(ks_distance(&b, &a), 0.5);
    }

    #[test]
    fn zero_atom_split() {
        let s = EmpiricalSample::new(vec![(0.0, 3.0), (1e-9, 1.0)]).unwrap();
        let (atom, rest) = s.split_zero_atom();
        assert!((atom - 0.75).abs() < 1e-15);
        assert_eq!(rest.unwrap().observations(), &[(1e-9, 1.0)]);
        let all_zero = EmpiricalSample::new(vec![(0.0, 1.0)]).unwrap();
        assert_eq!(all_zero.split_zero_atom(), (1.0, None));
    }

    #[test]
    fn histogram_single_bin_and_atom() {
        let s = EmpiricalSample::new(vec![(1.5e-10, 2.0), (0.0, 2.0)]).unwrap();
        let h = log_histogram_pdf(&s, 10, (1e-12, 1e-8)).unwrap();
        assert_eq!(h.bins.len(), 40);
        assert!((h.zero_atom - 0.5).abs() < 1e-15);
        let (l, r, d) = h.bins.iter().copied().find(|b| b.2 > 0.0).unwrap();
        assert!(l <= 1.5e-10 && 1.5e-10 < r);
        assert!((d - 0.5 / (r - l)).abs() < 1e-9 * d);
        let integral: f64 = h.bins.iter().map(|&(l, r, d)| d * (r - l)).sum();
        assert!((integral - (1.0 - h.zero_atom)).abs() < 1e-12);
        assert!(log_histogram_pdf(&s, 10, (0.0, 1.0)).is_err());
    }

    #[test]
    fn histogram_of_log_uniform_is_flat_per_decade() {
        // Deterministic log-uniform grid over four decades.
        let n = 40_000;
        let s = EmpiricalSample::from_values(
            (0..n).map(|i| 1e-12 * 10f64.powf(4.0 * (i as f64 + 0.5) / n as f64)),
        )
        .unwrap();
        let h = log_histogram_pdf(&s, 5, (1e-12, 1e-8)).unwrap();
        let masses: Vec<f64> = h.bins.iter().map(|&(l, r, d)| d * (r - l)).collect();
        for m in &masses {
            assert!((m - 1.0 / 20.0).abs() < 1e-3, "{masses:?}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = EmpiricalSample::new(vec![(1.25e-11, 3.0), (0.0, 16.0)]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("value_watts,weight\n"));
        let back = EmpiricalSample::read_csv(format!("# comment\n{text}").as_bytes()).unwrap();
        assert_eq!(back, s);
    }
}
