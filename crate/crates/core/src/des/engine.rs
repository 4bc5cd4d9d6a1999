//! Integer-microsecond event loop of the DCF over a planar topology.
//!
//! Every timestamp is processed in three phases so that simultaneous events
//! resolve the same way regardless of heap order:
//!
//! 1. frames ending now are removed and their outcome is handled;
//! 2. expired backoff timers and scheduled SIFS responses start new frames;
//! 3. every contending node re-evaluates its carrier sense and freezes or
//!    resumes its countdown.
//!
//! A node that finds the medium idle waits DIFS, then counts down one slot
//! per `slot_us`. A busy medium freezes the counter at the number of whole
//! slots already elapsed.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::analytic::slots::ppdu_us;
use crate::config::AccessMode;
use crate::des::scenario::Scenario;
use crate::error::{Error, Result};
use crate::point_process::MIN_DISTANCE_M;

/// Generous bound on queued events per link; stale backoff expiries are the
/// only thing that accumulates, and only over one contention window.
const MAX_PENDING_PER_LINK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Rts,
    Cts,
    Data,
    Ack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TxStart,
    TxEnd,
    BackoffFreeze,
    BackoffResume,
    Success,
    Collision,
    RetryDrop,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        EventKind::TxStart,
        EventKind::TxEnd,
        EventKind::BackoffFreeze,
        EventKind::BackoffResume,
        EventKind::Success,
        EventKind::Collision,
        EventKind::RetryDrop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::TxStart => "tx_start",
            EventKind::TxEnd => "tx_end",
            EventKind::BackoffFreeze => "backoff_freeze",
            EventKind::BackoffResume => "backoff_resume",
            EventKind::Success => "success",
            EventKind::Collision => "collision",
            EventKind::RetryDrop => "retry_drop",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown trace event '{s}'")))
    }
}

/// One logged event. `node_id` is a radio id: transmitters are
/// `0..link_count`, receivers `link_count..2 * link_count`. Outcome events
/// (`success`, `collision`, `retry_drop`) carry the transmitter id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time_us: u64,
    pub node_id: usize,
    pub event: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub link: usize,
    pub emitter: usize,
    pub kind: FrameKind,
    pub start_us: u64,
    pub end_us: u64,
    /// Received-power mark `p * Exp(1)`, shared by every receiver of the
    /// frame.
    pub mark: f64,
    pub corrupted: bool,
}

/// Span of constant aggregate power at the measuring point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerInterval {
    pub start_us: u64,
    pub end_us: u64,
    pub power_w: f64,
    /// Indices into [`DesTrace::frames`], ascending.
    pub active_frames: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStats {
    /// First frames (RTS or basic DATA) sent.
    pub attempts: u64,
    pub successes: u64,
    pub collisions: u64,
    pub retry_drops: u64,
    /// Attempt still unresolved when the run stopped.
    pub in_flight: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesTrace {
    pub link_count: usize,
    pub duration_us: u64,
    pub events: Vec<TraceEvent>,
    pub frames: Vec<FrameRecord>,
    /// Contiguous cover of `[0, duration_us)`.
    pub intervals: Vec<PowerInterval>,
    pub link_stats: Vec<LinkStats>,
    /// Path gain from every radio to the measuring point.
    pub measuring_gain: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesOptions {
    /// When false the medium always looks idle to the sender.
    pub carrier_sensing: bool,
    /// When true no frame is ever corrupted by interference.
    pub ideal_reception: bool,
    /// Record `backoff_freeze` / `backoff_resume` events.
    pub log_backoff: bool,
    pub sensing: SensingModel,
}

/// What a radio compares against the carrier-sense threshold, both when
/// deferring and when deciding whether an overlapping frame corrupts the
/// one it is receiving.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingModel {
    /// Sum of the powers of all frames on the air plus noise.
    #[default]
    Aggregate,
    /// Strongest single frame plus noise; weak frames never add up.
    PerSignal,
}

impl Default for DesOptions {
    fn default() -> Self {
        DesOptions {
            carrier_sensing: true,
            ideal_reception: false,
            log_backoff: true,
            sensing: SensingModel::Aggregate,
        }
    }
}

pub fn run_des(scenario: &Scenario) -> Result<DesTrace> {
    run_des_with(scenario, DesOptions::default())
}

pub fn run_des_with(scenario: &Scenario, options: DesOptions) -> Result<DesTrace> {
    scenario.validate()?;
    Engine::new(scenario, options)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pending {
    FrameEnd(usize),
    Expire { link: usize, generation: u64 },
    Send { link: usize, kind: FrameKindKey },
}

// `FrameKind` order only matters for heap tie-breaking, which the sequence
// number already fixes; this wrapper keeps serde types free of `Ord`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct FrameKindKey(u8);

impl From<FrameKind> for FrameKindKey {
    fn from(k: FrameKind) -> Self {
        FrameKindKey(k as u8)
    }
}

impl From<FrameKindKey> for FrameKind {
    fn from(k: FrameKindKey) -> Self {
        match k.0 {
            0 => FrameKind::Rts,
            1 => FrameKind::Cts,
            2 => FrameKind::Data,
            _ => FrameKind::Ack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LinkState {
    Contending {
        idle_since: Option<u64>,
        fresh: bool,
    },
    Exchange,
}

#[derive(Debug, Clone)]
struct Link {
    stage: u32,
    short_retries: u32,
    long_retries: u32,
    counter: u64,
    generation: u64,
    state: LinkState,
}

struct Engine<'a> {
    scenario: &'a Scenario,
    options: DesOptions,
    n: usize,
    /// `gain[emitter * 2n + receiver]`.
    gain: Vec<f64>,
    measuring_gain: Vec<f64>,
    frame_us: [u64; 4],
    rng: ChaCha8Rng,
    heap: BinaryHeap<Reverse<(u64, u64, Pending)>>,
    seq: u64,
    links: Vec<Link>,
    stats: Vec<LinkStats>,
    frames: Vec<FrameRecord>,
    active: Vec<usize>,
    events: Vec<TraceEvent>,
    intervals: Vec<PowerInterval>,
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario, options: DesOptions) -> Result<Self> {
        let cfg = &scenario.cfg;
        let n = scenario.link_count();
        let positions: Vec<(f64, f64)> = scenario
            .transmitters
            .iter()
            .chain(scenario.receivers.iter())
            .copied()
            .collect();
        let path_gain = |a: (f64, f64), b: (f64, f64)| {
            let d = (a.0 - b.0).hypot(a.1 - b.1).max(MIN_DISTANCE_M);
            d.powf(-cfg.path_loss_exponent)
        };
        let mut gain = vec![0.0; 4 * n * n];
        for (i, &a) in positions.iter().enumerate() {
            for (j, &b) in positions.iter().enumerate() {
                if i != j {
                    gain[i * 2 * n + j] = path_gain(a, b);
                }
            }
        }
        let measuring_gain = positions
            .iter()
            .map(|&a| path_gain(a, scenario.measuring_point))
            .collect();
        let ppdu = ppdu_us(cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        rng.set_stream(0);
        Ok(Engine {
            scenario,
            options,
            n,
            gain,
            measuring_gain,
            frame_us: [cfg.rts_us, cfg.cts_us, ppdu, cfg.ack_us],
            rng,
            heap: BinaryHeap::new(),
            seq: 0,
            links: Vec::with_capacity(n),
            stats: vec![LinkStats::default(); n],
            frames: Vec::new(),
            active: Vec::new(),
            events: Vec::new(),
            intervals: Vec::new(),
        })
    }

    fn run(mut self) -> Result<DesTrace> {
        let duration = self.scenario.duration_us;
        for _ in 0..self.n {
            let counter = self.rng.random_range(0..u64::from(self.scenario.cfg.w0));
            self.links.push(Link {
                stage: 0,
                short_retries: 0,
                long_retries: 0,
                counter,
                generation: 0,
                state: LinkState::Contending {
                    idle_since: None,
                    fresh: true,
                },
            });
        }
        self.sense(0);
        self.open_interval(0);

        let mut batch = Vec::new();
        let queue_limit = MAX_PENDING_PER_LINK * (self.n + 1);
        while let Some(&Reverse((t, _, _))) = self.heap.peek() {
            if t >= duration {
                break;
            }
            if self.heap.len() > queue_limit {
                return Err(Error::Simulation(format!(
                    "event queue overflow at t = {t} us: {} pending events",
                    self.heap.len()
                )));
            }
            batch.clear();
            while let Some(&Reverse((t2, _, ev))) = self.heap.peek() {
                if t2 != t {
                    break;
                }
                self.heap.pop();
                batch.push(ev);
            }
            let before = self.active.clone();

            for ev in &batch {
                if let Pending::FrameEnd(f) = *ev {
                    self.end_frame(t, f);
                }
            }
            let first_new = self.frames.len();
            for ev in &batch {
                match *ev {
                    Pending::Expire { link, generation } => self.expire(t, link, generation),
                    Pending::Send { link, kind } => {
                        self.start_frame(t, link, kind.into());
                    }
                    Pending::FrameEnd(_) => {}
                }
            }
            if self.frames.len() > first_new && !self.options.ideal_reception {
                self.check_reception();
            }
            self.sense(t);

            if self.active != before {
                self.close_interval(t);
                self.open_interval(t);
            }
        }
        self.close_interval(duration);
        for (link, state) in self.links.iter().enumerate() {
            self.stats[link].in_flight = state.state == LinkState::Exchange;
        }
        Ok(DesTrace {
            link_count: self.n,
            duration_us: duration,
            events: self.events,
            frames: self.frames,
            intervals: self.intervals,
            link_stats: self.stats,
            measuring_gain: self.measuring_gain,
        })
    }

    fn push(&mut self, t: u64, ev: Pending) {
        self.heap.push(Reverse((t, self.seq, ev)));
        self.seq += 1;
    }

    fn log(&mut self, time_us: u64, node_id: usize, event: EventKind) {
        self.events.push(TraceEvent {
            time_us,
            node_id,
            event,
        });
    }

    fn gain(&self, from: usize, to: usize) -> f64 {
        self.gain[from * 2 * self.n + to]
    }

    /// Power at radio `to` from every active frame except `skip`.
    fn received(&self, to: usize, skip: Option<usize>) -> f64 {
        let powers = self
            .active
            .iter()
            .filter(|&&f| Some(f) != skip)
            .map(|&f| self.frames[f].mark * self.gain(self.frames[f].emitter, to));
        match self.options.sensing {
            SensingModel::Aggregate => powers.sum(),
            SensingModel::PerSignal => powers.fold(0.0, f64::max),
        }
    }

    fn start_frame(&mut self, t: u64, link: usize, kind: FrameKind) {
        let emitter = match kind {
            FrameKind::Rts | FrameKind::Data => link,
            FrameKind::Cts | FrameKind::Ack => self.n + link,
        };
        let exp: f64 = Exp1.sample(&mut self.rng);
        let idx = self.frames.len();
        let end = t + self.frame_us[kind as usize];
        self.frames.push(FrameRecord {
            link,
            emitter,
            kind,
            start_us: t,
            end_us: end,
            mark: self.scenario.cfg.tx_power_w * exp,
            corrupted: false,
        });
        self.active.push(idx);
        self.log(t, emitter, EventKind::TxStart);
        self.push(end, Pending::FrameEnd(idx));
    }

    /// Interference only grows when frames start, so checking after each
    /// batch of starts catches every overlap.
    fn check_reception(&mut self) {
        let noise = self.scenario.cfg.noise_w;
        let threshold = self.scenario.cfg.cs_threshold_w;
        for i in 0..self.active.len() {
            let f = self.active[i];
            let frame = &self.frames[f];
            if frame.corrupted || !matches!(frame.kind, FrameKind::Rts | FrameKind::Data) {
                continue;
            }
            let target = self.n + frame.link;
            if self.received(target, Some(f)) + noise >= threshold {
                self.frames[f].corrupted = true;
            }
        }
    }

    fn end_frame(&mut self, t: u64, f: usize) {
        self.active.retain(|&g| g != f);
        let frame = self.frames[f].clone();
        self.log(t, frame.emitter, EventKind::TxEnd);
        let sifs = self.scenario.cfg.sifs_us;
        let link = frame.link;
        match (frame.kind, self.scenario.cfg.mode) {
            (FrameKind::Rts, _) if !frame.corrupted => {
                self.push(
                    t + sifs,
                    Pending::Send {
                        link,
                        kind: FrameKind::Cts.into(),
                    },
                );
            }
            (FrameKind::Rts, _) => self.fail(t, link, false),
            (FrameKind::Cts, _) => {
                self.push(
                    t + sifs,
                    Pending::Send {
                        link,
                        kind: FrameKind::Data.into(),
                    },
                );
            }
            (FrameKind::Data, _) if !frame.corrupted => {
                self.push(
                    t + sifs,
                    Pending::Send {
                        link,
                        kind: FrameKind::Ack.into(),
                    },
                );
            }
            (FrameKind::Data, AccessMode::Basic) => self.fail(t, link, false),
            (FrameKind::Data, AccessMode::RtsCts) => self.fail(t, link, true),
            (FrameKind::Ack, _) => {
                self.stats[link].successes += 1;
                self.log(t, link, EventKind::Success);
                let l = &mut self.links[link];
                l.stage = 0;
                l.short_retries = 0;
                l.long_retries = 0;
                self.contend(link);
            }
        }
    }

    fn fail(&mut self, t: u64, link: usize, long: bool) {
        let cfg = &self.scenario.cfg;
        let l = &mut self.links[link];
        let exhausted = if long {
            l.long_retries += 1;
            l.long_retries >= cfg.long_retry_limit
        } else {
            l.short_retries += 1;
            l.short_retries >= cfg.retry_limit
        };
        if exhausted {
            l.stage = 0;
            l.short_retries = 0;
            l.long_retries = 0;
            self.stats[link].retry_drops += 1;
            self.log(t, link, EventKind::RetryDrop);
        } else {
            l.stage += 1;
            self.stats[link].collisions += 1;
            self.log(t, link, EventKind::Collision);
        }
        self.contend(link);
    }

    fn contend(&mut self, link: usize) {
        let cfg = &self.scenario.cfg;
        let l = &mut self.links[link];
        let cw = u64::from(cfg.w0) << l.stage.min(cfg.max_backoff_stage);
        l.counter = self.rng.random_range(0..cw);
        l.generation += 1;
        l.state = LinkState::Contending {
            idle_since: None,
            fresh: true,
        };
    }

    fn expire(&mut self, t: u64, link: usize, generation: u64) {
        let l = &mut self.links[link];
        if l.generation != generation || !matches!(l.state, LinkState::Contending { .. }) {
            return;
        }
        l.state = LinkState::Exchange;
        l.counter = 0;
        self.stats[link].attempts += 1;
        let kind = match self.scenario.cfg.mode {
            AccessMode::Basic => FrameKind::Data,
            AccessMode::RtsCts => FrameKind::Rts,
        };
        self.start_frame(t, link, kind);
    }

    fn sense(&mut self, t: u64) {
        let cfg = &self.scenario.cfg;
        let (difs, slot, noise, threshold) =
            (cfg.difs_us, cfg.slot_us, cfg.noise_w, cfg.cs_threshold_w);
        for link in 0..self.n {
            let LinkState::Contending { idle_since, fresh } = self.links[link].state else {
                continue;
            };
            let busy =
                self.options.carrier_sensing && self.received(link, None) + noise >= threshold;
            match (idle_since, busy) {
                (Some(since), true) => {
                    let l = &mut self.links[link];
                    let elapsed = t.saturating_sub(since + difs) / slot;
                    l.counter = l.counter.saturating_sub(elapsed);
                    l.generation += 1;
                    l.state = LinkState::Contending {
                        idle_since: None,
                        fresh: false,
                    };
                    if self.options.log_backoff {
                        self.log(t, link, EventKind::BackoffFreeze);
                    }
                }
                (None, false) => {
                    let l = &mut self.links[link];
                    l.generation += 1;
                    l.state = LinkState::Contending {
                        idle_since: Some(t),
                        fresh: false,
                    };
                    let (expiry, generation) = (t + difs + l.counter * slot, l.generation);
                    self.push(expiry, Pending::Expire { link, generation });
                    if self.options.log_backoff && !fresh {
                        self.log(t, link, EventKind::BackoffResume);
                    }
                }
                (None, true) if fresh => {
                    self.links[link].state = LinkState::Contending {
                        idle_since: None,
                        fresh: false,
                    };
                }
                _ => {}
            }
        }
    }

    fn open_interval(&mut self, t: u64) {
        let power_w = self
            .active
            .iter()
            .map(|&f| self.frames[f].mark * self.measuring_gain[self.frames[f].emitter])
            .sum();
        self.intervals.push(PowerInterval {
            start_us: t,
            end_us: t,
            power_w,
            active_frames: self.active.clone(),
        });
    }

    fn close_interval(&mut self, t: u64) {
        let last = self
            .intervals
            .last_mut()
            .expect("an interval is always open");
        last.end_us = t;
        if last.end_us == last.start_us {
            self.intervals.pop();
        }
    }
}
