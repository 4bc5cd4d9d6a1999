//! The four subcommands. Each writes plot-ready CSV files under the
//! configured output directory and returns the list of files it wrote.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use aggint::analytic::{
    analyze, mhc_density_baseline, sample_law_log_grid, InterferenceLaw, SectorModel,
};
use aggint::des::{
    concurrent_tx_histogram, run_des_with, time_window, trace_to_samples, write_trace_csv,
    DesOptions, Scenario,
};
use aggint::point_process::{monte_carlo_run, MonteCarloConfig, ProcessKind};
use aggint::stats::{
    empirical_cdf, ks_distance, ks_distance_to_law, log_histogram_pdf, EmpiricalSample,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Layout, SweepPoint};
use crate::error::{CliError, CliResult};
use crate::output::{stamp, write_file, write_rows};

#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Human-readable remarks: skipped runs, unbracketed roots, and so on.
    pub notes: Vec<String>,
}

fn csv_text(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

// ---------------------------------------------------------------- analyze

pub fn cmd_analyze(cfg: &ExperimentConfig) -> CliResult<RunSummary> {
    cfg.validate()?;
    let sector = SectorModel::default();
    let points = cfg.sweep();
    let results: Vec<_> = points
        .par_iter()
        .map(|point| {
            let phy = cfg.phy_mac(point)?;
            Ok(analyze(point.lambda, &phy, &sector)?)
        })
        .collect::<Vec<CliResult<_>>>();

    let stamp = stamp(cfg);
    let dir = &cfg.out_dir;
    let mut summary = RunSummary::default();
    let (mut pon, mut density, mut cdf, mut pdf) = (vec![], vec![], vec![], vec![]);
    for (point, result) in points.iter().zip(&results) {
        let prefix = point.csv_prefix();
        let lambda_mhc = mhc_density_baseline(point.lambda, point.cs_range_m)?;
        match result {
            Ok(a) => {
                let status = if a.p_on_bracketed {
                    "ok"
                } else {
                    "unbracketed"
                };
                if !a.p_on_bracketed {
                    summary
                        .notes
                        .push(format!("{}: p_on root not bracketed", point.label()));
                }
                pon.push(format!(
                    "{prefix},{},{:e},{},{status},",
                    a.p_on_star, a.p_on_residual, a.p_on_bracketed
                ));
                density.push(format!(
                    "{prefix},{},{:e},{:e},{status}",
                    a.e_z, a.lambda_eff, lambda_mhc
                ));
                let law = InterferenceLaw::new(a.lambda_eff, cfg.tx_power_w)?;
                for (t, c, f) in sample_law_log_grid(
                    &law,
                    cfg.law_t_min_w,
                    cfg.law_t_max_w,
                    cfg.law_points_per_decade,
                )? {
                    cdf.push(format!("{prefix},{t:e},{c:e}"));
                    pdf.push(format!("{prefix},{t:e},{f:e}"));
                }
            }
            Err(e) => {
                summary.notes.push(format!("{}: {e}", point.label()));
                pon.push(format!("{prefix},,,,error,{}", csv_text(&e.to_string())));
                density.push(format!("{prefix},,,{:e},error", lambda_mhc));
            }
        }
    }
    let h = SweepPoint::CSV_HEADER;
    summary.files.push(write_rows(
        &dir.join("pon.csv"),
        &stamp,
        &format!("{h},p_on,residual,bracketed,status,message"),
        &pon,
    )?);
    summary.files.push(write_rows(
        &dir.join("density.csv"),
        &stamp,
        &format!("{h},e_z,lambda_eff,lambda_mhc,status"),
        &density,
    )?);
    summary.files.push(write_rows(
        &dir.join("law_cdf.csv"),
        &stamp,
        &format!("{h},t_watts,cdf"),
        &cdf,
    )?);
    summary.files.push(write_rows(
        &dir.join("law_pdf.csv"),
        &stamp,
        &format!("{h},t_watts,pdf"),
        &pdf,
    )?);
    Ok(summary)
}

// ----------------------------------------------------------------- sample

/// Distinct `(lambda, range)` pairs of the sweep, in sweep order.
fn density_range_pairs(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &r in &cfg.cs_ranges_m {
        for &l in &cfg.lambdas {
            if !out.contains(&(l, r)) {
                out.push((l, r));
            }
        }
    }
    out
}

pub fn sample_dir(
    cfg: &ExperimentConfig,
    process: ProcessKind,
    lambda: f64,
    exclusion_m: f64,
) -> PathBuf {
    cfg.out_dir
        .join("sample")
        .join(format!("{process}_lambda{lambda:e}_r{exclusion_m}"))
}

pub fn des_dir(cfg: &ExperimentConfig, point: &SweepPoint) -> PathBuf {
    cfg.out_dir.join("des").join(point.label())
}

fn write_distribution(
    dir: &Path,
    stamp: &str,
    sample: &EmpiricalSample,
    cfg: &ExperimentConfig,
) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    files.push(write_file(&dir.join("samples.csv"), stamp, |out| {
        sample.write_csv(out)
    })?);
    let cdf = empirical_cdf(sample)?;
    files.push(write_file(&dir.join("cdf.csv"), stamp, |out| {
        cdf.write_csv(out)
    })?);
    let hist = log_histogram_pdf(
        sample,
        cfg.bins_per_decade,
        (cfg.law_t_min_w, cfg.law_t_max_w),
    )?;
    files.push(write_file(&dir.join("pdf.csv"), stamp, |out| {
        writeln!(
            out,
            "# zero_atom={} out_of_range={}",
            hist.zero_atom, hist.out_of_range
        )?;
        hist.write_csv(out)
    })?);
    Ok(files)
}

pub fn cmd_sample(cfg: &ExperimentConfig) -> CliResult<RunSummary> {
    cfg.validate()?;
    let stamp = stamp(cfg);
    let mut summary = RunSummary::default();
    let mut rows = Vec::new();
    for (lambda, exclusion_m) in density_range_pairs(cfg) {
        for &process in &cfg.processes {
            let mc = MonteCarloConfig {
                process,
                lambda,
                exclusion_m,
                region_radius_m: cfg.region_radius_m,
                tx_power_w: cfg.tx_power_w,
                iterations: cfg.iterations,
                seed: cfg.seed,
            };
            let run = monte_carlo_run(&mc)?;
            let (zero_atom, _) = run.sample.split_zero_atom();
            rows.push(format!(
                "{process},{lambda:e},{exclusion_m},{},{:e},{},{:e},{:e},{},{zero_atom}",
                cfg.iterations,
                run.sample.mean(),
                run.mean_count,
                run.inner_density,
                mhc_density_baseline(lambda, exclusion_m)?,
                run.resampled,
            ));
            let dir = sample_dir(cfg, process, lambda, exclusion_m);
            summary
                .files
                .extend(write_distribution(&dir, &stamp, &run.sample, cfg)?);
        }
    }
    summary.files.push(write_rows(
        &cfg.out_dir.join("sample_summary.csv"),
        &stamp,
        "process,lambda,exclusion_m,iterations,mean_w,mean_count,inner_density,lambda_mhc,resampled,zero_atom",
        &rows,
    )?);
    Ok(summary)
}

// -------------------------------------------------------------------- des

/// Transmitter subsets of the lattice experiment: the sharing-area pair
/// (set B) and the sensing disk of the centre node (set C).
pub fn lattice_sets(scenario: &Scenario, cs_range_m: f64) -> (Vec<usize>, Vec<usize>) {
    let tx = &scenario.transmitters;
    let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    let nearest_to = |p: (f64, f64), skip: Option<usize>| {
        (0..tx.len())
            .filter(|&i| Some(i) != skip)
            .min_by(|&i, &j| dist(tx[i], p).total_cmp(&dist(tx[j], p)))
    };
    let grid_centre = (0.5 * scenario.grid_m, 0.5 * scenario.grid_m);
    let Some(centre) = nearest_to(grid_centre, None) else {
        return (vec![], vec![]);
    };
    let within = |p: (f64, f64), r: f64| {
        (0..tx.len())
            .filter(|&i| dist(tx[i], p) <= r + 1e-9)
            .collect::<Vec<_>>()
    };
    let set_c = within(tx[centre], cs_range_m);
    let set_b = match nearest_to(tx[centre], Some(centre)) {
        Some(nb) => {
            let mid = (
                0.5 * (tx[centre].0 + tx[nb].0),
                0.5 * (tx[centre].1 + tx[nb].1),
            );
            within(mid, cs_range_m / 2.0)
        }
        None => vec![centre],
    };
    (set_b, set_c)
}

struct DesRun {
    sample: Option<EmpiricalSample>,
    window_us: u64,
    links: usize,
    /// Time-weighted concurrency counts for sets B and C (lattice only).
    concurrency: Option<(Vec<f64>, Vec<f64>)>,
    skipped: Option<String>,
    trace_file: Option<PathBuf>,
}

fn build_scenario(cfg: &ExperimentConfig, point: &SweepPoint, seed: u64) -> CliResult<Scenario> {
    let phy = cfg.phy_mac(point)?;
    Ok(match cfg.layout {
        Layout::Poisson => Scenario::poisson(point.lambda, phy, cfg.grid_m, cfg.duration_us, seed)?,
        Layout::Lattice => {
            let mut s = Scenario::grid(
                cfg.grid_rows,
                cfg.grid_cols,
                cfg.grid_spacing_m,
                phy,
                cfg.grid_m,
                cfg.duration_us,
                seed,
            )?;
            // An odd lattice puts a transmitter on the grid centre; measure
            // in the middle of the adjacent cell instead.
            let half = 0.5 * cfg.grid_spacing_m;
            s.measuring_point = (s.measuring_point.0 + half, s.measuring_point.1 + half);
            s
        }
    })
}

/// Seed of repetition `rep`; repetitions of different sweep points share
/// seeds so that their topologies are coupled.
pub fn repetition_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    cfg.seed.wrapping_add(rep as u64)
}

fn des_one(
    cfg: &ExperimentConfig,
    point: &SweepPoint,
    rep: usize,
    stamp: &str,
) -> CliResult<DesRun> {
    let scenario = build_scenario(cfg, point, repetition_seed(cfg, rep))?;
    let options = DesOptions {
        log_backoff: cfg.write_traces,
        sensing: cfg.sensing,
        ideal_reception: cfg.ideal_reception,
        ..DesOptions::default()
    };
    let trace = run_des_with(&scenario, options)?;
    let trace_file = if cfg.write_traces {
        let path = des_dir(cfg, point).join(format!("trace_rep{rep}.csv"));
        Some(write_file(&path, stamp, |out| {
            write_trace_csv(&trace, out)
        })?)
    } else {
        None
    };
    let window = match time_window(&trace) {
        Ok(w) => w,
        Err(e) => {
            return Ok(DesRun {
                sample: None,
                window_us: 0,
                links: scenario.link_count(),
                concurrency: None,
                skipped: Some(e.to_string()),
                trace_file,
            })
        }
    };
    let concurrency = (cfg.layout == Layout::Lattice).then(|| {
        let (b, c) = lattice_sets(&scenario, point.cs_range_m);
        let weight = window.len_us() as f64;
        let scale = |h: Vec<f64>| h.into_iter().map(|x| x * weight).collect::<Vec<_>>();
        (
            scale(concurrent_tx_histogram(&trace, &b, window)),
            scale(concurrent_tx_histogram(&trace, &c, window)),
        )
    });
    Ok(DesRun {
        sample: Some(trace_to_samples(&trace, window)?),
        window_us: window.len_us(),
        links: scenario.link_count(),
        concurrency,
        skipped: None,
        trace_file,
    })
}

fn add_into(acc: &mut Vec<f64>, h: &[f64]) {
    if acc.len() < h.len() {
        acc.resize(h.len(), 0.0);
    }
    acc.iter_mut().zip(h).for_each(|(a, b)| *a += b);
}

pub fn cmd_des(cfg: &ExperimentConfig) -> CliResult<RunSummary> {
    cfg.validate()?;
    let stamp = stamp(cfg);
    let points = cfg.sweep();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.repetitions).map(move |r| (p, r)))
        .collect();
    let runs: Vec<CliResult<DesRun>> = jobs
        .par_iter()
        .map(|&(p, r)| des_one(cfg, &points[p], r, &stamp))
        .collect();

    let mut summary = RunSummary::default();
    let mut by_point: BTreeMap<usize, Vec<DesRun>> = BTreeMap::new();
    for (&(p, _), run) in jobs.iter().zip(runs) {
        by_point.entry(p).or_default().push(run?);
    }
    let mut rows = Vec::new();
    let mut conc_rows = Vec::new();
    for (p, runs) in by_point {
        let point = &points[p];
        let dir = des_dir(cfg, point);
        let mut samples = Vec::new();
        let (mut set_b, mut set_c) = (Vec::new(), Vec::new());
        let (mut window_total, mut links_total, mut skipped) = (0u64, 0usize, 0usize);
        for (rep, run) in runs.into_iter().enumerate() {
            links_total += run.links;
            summary.files.extend(run.trace_file);
            if let Some(reason) = run.skipped {
                skipped += 1;
                summary.notes.push(format!(
                    "{} repetition {rep} skipped: {reason}",
                    point.label()
                ));
                continue;
            }
            window_total += run.window_us;
            samples.extend(run.sample);
            if let Some((b, c)) = run.concurrency {
                add_into(&mut set_b, &b);
                add_into(&mut set_c, &c);
            }
        }
        let ok = cfg.repetitions - skipped;
        let mean_links = links_total as f64 / cfg.repetitions as f64;
        if samples.is_empty() {
            rows.push(format!(
                "{},{},{ok},{skipped},{mean_links},0,,",
                point.csv_prefix(),
                cfg.repetitions
            ));
            continue;
        }
        let pooled = EmpiricalSample::merge_all(samples)?;
        let (zero_atom, _) = pooled.split_zero_atom();
        rows.push(format!(
            "{},{},{ok},{skipped},{mean_links},{window_total},{:e},{zero_atom}",
            point.csv_prefix(),
            cfg.repetitions,
            pooled.mean()
        ));
        summary
            .files
            .extend(write_distribution(&dir, &stamp, &pooled, cfg)?);
        if cfg.layout == Layout::Lattice && window_total > 0 {
            for (name, hist) in [("B", &set_b), ("C", &set_c)] {
                for (level, t) in hist.iter().enumerate() {
                    conc_rows.push(format!(
                        "{},{name},{level},{}",
                        point.csv_prefix(),
                        t / window_total as f64
                    ));
                }
            }
        }
    }
    summary.files.push(write_rows(
        &cfg.out_dir.join("des_summary.csv"),
        &stamp,
        &format!(
            "{},repetitions,runs_ok,runs_skipped,mean_links,window_us,mean_w,zero_atom",
            SweepPoint::CSV_HEADER
        ),
        &rows,
    )?);
    if cfg.layout == Layout::Lattice {
        summary.files.push(write_rows(
            &cfg.out_dir.join("concurrency.csv"),
            &stamp,
            &format!("{},set,level,fraction", SweepPoint::CSV_HEADER),
            &conc_rows,
        )?);
    }
    Ok(summary)
}

// ---------------------------------------------------------------- compare

fn read_sample(path: &Path) -> CliResult<Option<EmpiricalSample>> {
    if !path.exists() {
        return Ok(None);
    }
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(Some(EmpiricalSample::read_csv(BufReader::new(file))?))
}

/// KS distances of the DES result (zero atom removed) to the analytic law
/// at `lambda'` and at `lambda`, and to the MHC / SSI Monte Carlo samples
/// (zero atoms removed as well).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub des_zero_atom: f64,
    pub lambda_eff: f64,
    pub ks_analytic_eff: f64,
    pub ks_analytic_lambda: f64,
    pub ks_mhc: Option<f64>,
    pub ks_ssi: Option<f64>,
}

pub fn compare_samples(
    des: &EmpiricalSample,
    lambda: f64,
    lambda_eff: f64,
    tx_power_w: f64,
    mhc: Option<&EmpiricalSample>,
    ssi: Option<&EmpiricalSample>,
) -> CliResult<Comparison> {
    let (des_zero_atom, positive) = des.split_zero_atom();
    let positive = positive.ok_or_else(|| {
        CliError::MissingInput("simulation sample has no positive interference".into())
    })?;
    let des_cdf = empirical_cdf(&positive)?;
    let against = |s: Option<&EmpiricalSample>| -> CliResult<Option<f64>> {
        match s.map(|s| s.split_zero_atom().1) {
            Some(Some(pos)) => Ok(Some(ks_distance(&des_cdf, &empirical_cdf(&pos)?))),
            _ => Ok(None),
        }
    };
    Ok(Comparison {
        des_zero_atom,
        lambda_eff,
        ks_analytic_eff: ks_distance_to_law(
            &des_cdf,
            &InterferenceLaw::new(lambda_eff, tx_power_w)?,
        ),
        ks_analytic_lambda: ks_distance_to_law(
            &des_cdf,
            &InterferenceLaw::new(lambda, tx_power_w)?,
        ),
        ks_mhc: against(mhc)?,
        ks_ssi: against(ssi)?,
    })
}

pub fn cmd_compare(cfg: &ExperimentConfig) -> CliResult<RunSummary> {
    cfg.validate()?;
    let stamp = stamp(cfg);
    let sector = SectorModel::default();
    let mut summary = RunSummary::default();
    let mut rows = Vec::new();
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for point in cfg.sweep() {
        let des_path = des_dir(cfg, &point).join("samples.csv");
        let des = read_sample(&des_path)?.ok_or_else(|| {
            CliError::MissingInput(format!(
                "{} (run `des` with the same config first)",
                des_path.display()
            ))
        })?;
        let load = |process| {
            read_sample(
                &sample_dir(cfg, process, point.lambda, point.cs_range_m).join("samples.csv"),
            )
        };
        let (mhc, ssi) = (load(ProcessKind::Mhc)?, load(ProcessKind::Ssi)?);
        if mhc.is_none() && ssi.is_none() {
            summary.notes.push(format!(
                "{}: no Monte Carlo samples; only analytic columns filled",
                point.label()
            ));
        }
        let phy = cfg.phy_mac(&point)?;
        let analysis = analyze(point.lambda, &phy, &sector)?;
        let c = compare_samples(
            &des,
            point.lambda,
            analysis.lambda_eff,
            cfg.tx_power_w,
            mhc.as_ref(),
            ssi.as_ref(),
        )?;
        rows.push(format!(
            "{},{:e},{},{},{},{},{}",
            point.csv_prefix(),
            c.lambda_eff,
            c.des_zero_atom,
            c.ks_analytic_eff,
            c.ks_analytic_lambda,
            opt(c.ks_mhc),
            opt(c.ks_ssi)
        ));
    }
    summary.files.push(write_rows(
        &cfg.out_dir.join("compare.csv"),
        &stamp,
        &format!(
            "{},lambda_eff,des_zero_atom,ks_analytic_eff,ks_analytic_lambda,ks_mhc,ks_ssi",
            SweepPoint::CSV_HEADER
        ),
        &rows,
    )?);
    Ok(summary)
}
