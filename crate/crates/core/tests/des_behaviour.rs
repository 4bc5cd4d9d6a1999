use std::collections::HashMap;

use aggint::des::{
    concurrent_tx_histogram, run_des, run_des_with, time_window, trace_to_samples, DesOptions,
    DesTrace, EventKind, FrameKind, FrameRecord, PowerInterval, Scenario, TimeWindow,
};
use aggint::{AccessMode, PhyMacConfig};

fn cfg(mode: AccessMode) -> PhyMacConfig {
    PhyMacConfig::reference(mode, 500)
}

#[test]
fn lone_node_period_is_success_slot_plus_mean_backoff() {
    let s = Scenario::from_transmitters(
        vec![(250.0, 250.0)],
        cfg(AccessMode::Basic),
        500.0,
        2_000_000,
        11,
    );
    let trace = run_des(&s).unwrap();
    let stats = trace.link_stats[0];
    assert_eq!(stats.collisions + stats.retry_drops, 0);
    let ends: Vec<u64> = trace
        .events
        .iter()
        .filter(|e| e.event == EventKind::Success)
        .map(|e| e.time_us)
        .collect();
    let period = (ends[ends.len() - 1] - ends[0]) as f64 / (ends.len() - 1) as f64;
    // 822 us success slot plus (W0 - 1) / 2 slots of 9 us.
    let expected = 822.0 + 7.5 * 9.0;
    // ~2200 cycles, backoff sd ~41 us per cycle.
    assert!(
        (period / expected - 1.0).abs() < 0.01,
        "{period} vs {expected}"
    );
}

#[test]
fn two_mutually_sensing_nodes_sometimes_collide() {
    let s = Scenario::from_transmitters(
        vec![(240.0, 240.0), (260.0, 250.0)],
        cfg(AccessMode::Basic),
        500.0,
        2_000_000,
        2,
    );
    let trace = run_des(&s).unwrap();
    let (mut attempts, mut collisions) = (0, 0);
    for st in &trace.link_stats {
        attempts += st.attempts;
        collisions += st.collisions + st.retry_drops;
    }
    let frac = collisions as f64 / attempts as f64;
    assert!(frac > 0.0 && frac < 1.0, "{frac}");
}

fn busy_trace(mode: AccessMode, seed: u64) -> (Scenario, DesTrace) {
    let s = Scenario::poisson(4e-4, cfg(mode), 500.0, 400_000, seed).unwrap();
    let t = run_des(&s).unwrap();
    (s, t)
}

#[test]
fn power_signal_is_the_shot_noise_sum() {
    for mode in AccessMode::ALL {
        let (s, trace) = busy_trace(mode, 21);
        let n = s.link_count();
        let gain = |radio: usize| {
            let (x, y) = if radio < n {
                s.transmitters[radio]
            } else {
                s.receivers[radio - n]
            };
            let d = (x - s.measuring_point.0).hypot(y - s.measuring_point.1);
            d.powf(-4.0)
        };
        for iv in &trace.intervals {
            let active: Vec<usize> = trace
                .frames
                .iter()
                .enumerate()
                .filter(|(_, f)| f.start_us <= iv.start_us && iv.start_us < f.end_us)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(active, iv.active_frames);
            let power: f64 = active
                .iter()
                .map(|&i| trace.frames[i].mark * gain(trace.frames[i].emitter))
                .sum();
            assert_eq!(power, iv.power_w);
        }
    }
}

#[test]
fn events_are_ordered_balanced_and_conserved() {
    for mode in AccessMode::ALL {
        let (_, trace) = busy_trace(mode, 8);
        assert!(trace
            .events
            .windows(2)
            .all(|w| w[0].time_us <= w[1].time_us));
        let mut open: HashMap<usize, i64> = HashMap::new();
        for e in &trace.events {
            match e.event {
                EventKind::TxStart => *open.entry(e.node_id).or_default() += 1,
                EventKind::TxEnd => {
                    let c = open.entry(e.node_id).or_default();
                    *c -= 1;
                    assert!(*c >= 0);
                }
                _ => {}
            }
        }
        // Anything still open is a frame cut by the end of the run.
        assert!(open.values().all(|&c| c == 0 || c == 1));
        for (link, st) in trace.link_stats.iter().enumerate() {
            let resolved = st.successes + st.collisions + st.retry_drops;
            assert_eq!(
                resolved + u64::from(st.in_flight),
                st.attempts,
                "link {link}"
            );
        }
        let total: u64 = trace.link_stats.iter().map(|s| s.collisions).sum();
        assert!(total > 0, "a dense network should see collisions");
    }
}

#[test]
fn retry_limit_drops_are_logged_instead_of_collisions() {
    // Two nodes that cannot sense each other but whose receivers hear both:
    // every overlap is lost. Disable sensing to force steady collisions.
    let s = Scenario::from_transmitters(
        vec![(240.0, 250.0), (250.0, 250.0)],
        cfg(AccessMode::Basic),
        500.0,
        3_000_000,
        1,
    );
    let options = DesOptions {
        carrier_sensing: false,
        ..DesOptions::default()
    };
    let trace = run_des_with(&s, options).unwrap();
    let drops: u64 = trace.link_stats.iter().map(|s| s.retry_drops).sum();
    assert!(drops > 0);
    for st in &trace.link_stats {
        // K - 1 collisions precede every drop at most.
        assert!(st.collisions >= st.retry_drops);
    }
}

#[test]
fn without_sensing_or_collisions_nodes_transmit_independently() {
    let s = Scenario::poisson(8e-5, cfg(AccessMode::Basic), 500.0, 3_000_000, 4).unwrap();
    let n = s.link_count();
    assert!(n >= 10);
    let options = DesOptions {
        carrier_sensing: false,
        ideal_reception: true,
        log_backoff: false,
        ..DesOptions::default()
    };
    let trace = run_des_with(&s, options).unwrap();
    let w = time_window(&trace).unwrap();
    let radios: Vec<usize> = (0..n).collect();
    let hist = concurrent_tx_histogram(&trace, &radios, w);
    let mean: f64 = hist.iter().enumerate().map(|(k, &h)| k as f64 * h).sum();
    let duty = 728.0 / (822.0 + 7.5 * 9.0);
    assert!(
        (mean / (n as f64 * duty) - 1.0).abs() < 0.02,
        "{mean} vs {}",
        n as f64 * duty
    );
}

#[test]
fn identical_seed_identical_trace() {
    let (_, a) = busy_trace(AccessMode::RtsCts, 99);
    let (_, b) = busy_trace(AccessMode::RtsCts, 99);
    assert_eq!(a, b);
    let (_, c) = busy_trace(AccessMode::RtsCts, 100);
    assert_ne!(a, c);
}

fn frame(emitter: usize, start_us: u64, end_us: u64, mark: f64) -> FrameRecord {
    FrameRecord {
        link: emitter,
        emitter,
        kind: FrameKind::Data,
        start_us,
        end_us,
        mark,
        corrupted: false,
    }
}

fn synthetic(
    frames: Vec<FrameRecord>,
    intervals: Vec<PowerInterval>,
    links: usize,
    duration_us: u64,
) -> DesTrace {
    DesTrace {
        link_count: links,
        duration_us,
        events: vec![],
        frames,
        intervals,
        link_stats: vec![Default::default(); links],
        measuring_gain: vec![1.0; 2 * links],
    }
}

#[test]
fn window_uses_latest_start_and_earliest_end() {
    let frames = vec![
        frame(0, 0, 100, 1.0),
        frame(1, 10, 110, 1.0),
        frame(2, 20, 120, 1.0),
    ];
    let t = synthetic(frames, vec![], 3, 200);
    assert_eq!(
        time_window(&t).unwrap(),
        TimeWindow {
            start_us: 20,
            end_us: 100
        }
    );
    let silent = synthetic(vec![frame(0, 0, 100, 1.0)], vec![], 2, 200);
    assert!(time_window(&silent).is_err());
}

#[test]
fn samples_are_dwell_weighted() {
    let d: f64 = 30.0;
    let x = 2e-3;
    let iv = |a, b, p, f: Vec<usize>| PowerInterval {
        start_us: a,
        end_us: b,
        power_w: p,
        active_frames: f,
    };
    let intervals = vec![
        iv(0, 50, 0.0, vec![]),
        iv(50, 778, x / d.powi(4), vec![0]),
        iv(778, 1000, 0.0, vec![]),
    ];
    let t = synthetic(vec![frame(0, 50, 778, x)], intervals, 1, 1000);
    let s = trace_to_samples(
        &t,
        TimeWindow {
            start_us: 0,
            end_us: 1000,
        },
    )
    .unwrap();
    assert_eq!(
        s.observations(),
        &[(0.0, 50.0), (x / d.powi(4), 728.0), (0.0, 222.0)]
    );
    let quiet = trace_to_samples(
        &t,
        TimeWindow {
            start_us: 800,
            end_us: 900,
        },
    )
    .unwrap();
    assert_eq!(quiet.observations(), &[(0.0, 100.0)]);
    let h = concurrent_tx_histogram(
        &t,
        &[0],
        TimeWindow {
            start_us: 0,
            end_us: 1000,
        },
    );
    assert_eq!(h, vec![0.272, 0.728]);
}
