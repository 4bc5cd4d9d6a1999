//! Post-processing of simulator traces.

use std::io::Write;

use crate::des::engine::{DesTrace, FrameKind};
use crate::error::{Error, Result};
use crate::stats::EmpiricalSample;

/// Steady-state window `[start_us, end_us)`: from the moment every
/// transmitter has started at least one transmission to the moment the
/// first transmitter finished its last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub start_us: u64,
    pub end_us: u64,
}

impl TimeWindow {
    pub fn len_us(&self) -> u64 {
        self.end_us - self.start_us
    }
}

pub fn time_window(trace: &DesTrace) -> Result<TimeWindow> {
    let n = trace.link_count;
    if n == 0 {
        return Err(Error::DegenerateWindow("no transmitters deployed".into()));
    }
    let mut first = vec![None; n];
    let mut last = vec![None; n];
    for f in trace
        .frames
        .iter()
        .filter(|f| matches!(f.kind, FrameKind::Rts | FrameKind::Data))
    {
        let node = f.emitter;
        if first[node].is_none() {
            first[node] = Some(f.start_us);
        }
        if f.end_us <= trace.duration_us {
            last[node] = Some(f.end_us);
        }
    }
    let mut start = 0;
    let mut end = u64::MAX;
    for node in 0..n {
        match (first[node], last[node]) {
            (Some(a), Some(b)) => {
                start = start.max(a);
                end = end.min(b);
            }
            _ => {
                return Err(Error::DegenerateWindow(format!(
                    "transmitter {node} never completed a transmission"
                )))
            }
        }
    }
    if start >= end {
        return Err(Error::DegenerateWindow(format!(
            "window [{start}, {end}) is empty"
        )));
    }
    Ok(TimeWindow {
        start_us: start,
        end_us: end,
    })
}

/// Aggregate power at the measuring point, weighted by dwell time within
/// the window; the weights sum to the window length in microseconds.
pub fn trace_to_samples(trace: &DesTrace, window: TimeWindow) -> Result<EmpiricalSample> {
    let observations = clipped(trace, window)
        .map(|(i, dwell)| (trace.intervals[i].power_w, dwell as f64))
        .collect();
    EmpiricalSample::new(observations)
}

/// Fraction of window time during which exactly `k` of the given radios
/// were transmitting, for `k = 0..=radios.len()`.
pub fn concurrent_tx_histogram(trace: &DesTrace, radios: &[usize], window: TimeWindow) -> Vec<f64> {
    let mut member = vec![false; 2 * trace.link_count];
    for &r in radios {
        member[r] = true;
    }
    let mut hist = vec![0.0; radios.len() + 1];
    for (i, dwell) in clipped(trace, window) {
        let k = trace.intervals[i]
            .active_frames
            .iter()
            .filter(|&&f| member[trace.frames[f].emitter])
            .count();
        hist[k] += dwell as f64;
    }
    let total = window.len_us() as f64;
    hist.iter_mut().for_each(|h| *h /= total);
    hist
}

fn clipped(trace: &DesTrace, window: TimeWindow) -> impl Iterator<Item = (usize, u64)> + '_ {
    trace
        .intervals
        .iter()
        .enumerate()
        .filter_map(move |(i, iv)| {
            let a = iv.start_us.max(window.start_us);
            let b = iv.end_us.min(window.end_us);
            (b > a).then(|| (i, b - a))
        })
}

/// Event log as `time_us,node_id,event`.
pub fn write_trace_csv<W: Write>(trace: &DesTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "time_us,node_id,event")?;
    for e in &trace.events {
        writeln!(out, "{},{},{}", e.time_us, e.node_id, e.event)?;
    }
    Ok(())
}
