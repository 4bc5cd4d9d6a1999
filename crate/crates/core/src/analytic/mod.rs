//! Closed-form and fixed-point analysis: from PHY/MAC parameters to the
//! effective active node density and the aggregate-interference law.

pub mod dcf;
pub mod law;
pub mod sector;
pub mod sensing;
pub mod sharing;
pub mod slots;

pub use dcf::{concurrent_tx_pmf, solve_dcf, tau_of_pcoll, BackoffParams, DcfFixedPoint};
pub use law::{sample_law_log_grid, InterferenceLaw};
pub use sector::{active_node_pmf, SectorModel};
pub use sensing::{cs_busy_probability, effective_cs_range, mean_sensing_area, sharing_count_pmf};
pub use sharing::{
    analyze, effective_density, mhc_density_baseline, solve_p_on, tx_count_distribution,
    PonSolution, SharingAreaAnalysis, SharingAreaModel,
};
pub use slots::{
    mean_virtual_slot, power_distribution, power_distribution_for, slot_durations, SlotDurations,
};
