//! Packet-level simulation of 802.11 DCF over a random topology, recording
//! the aggregate power seen at a fixed measuring point.

pub mod engine;
pub mod scenario;
pub mod trace;

pub use engine::{
    run_des, run_des_with, DesOptions, DesTrace, EventKind, FrameKind, FrameRecord, LinkStats,
    PowerInterval, SensingModel, TraceEvent,
};
pub use scenario::Scenario;
pub use trace::{
    concurrent_tx_histogram, time_window, trace_to_samples, write_trace_csv, TimeWindow,
};
