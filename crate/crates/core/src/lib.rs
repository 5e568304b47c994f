//! Packing co-located SDN data-plane and SDR baseband processes onto a shared
//! pool of CPU cores, and measuring what that saves in cores and watts
//! against running each class on its own cores.

pub mod allocator;
pub mod error;
pub mod experiments;
pub mod measurements;
pub mod power;
pub mod stats;
pub mod workload;

pub use allocator::{
    allocate_separate, allocate_shared, allocate_shared_with_occupancy, brute_force_min_cores,
    validate_allocation, Allocation, CoreAssignment, Scheme, SeparateSdn, Violation,
};
pub use error::{Error, Result};
pub use experiments::{
    export_report, run_trials, run_trials_with, run_usecase, ComparisonReport, ReportFormat,
    TrialConfig, TrialResult,
};
pub use measurements::{
    fit_sdn_rate_model, predict_sdn_utilization, sdr_measurement_lookup, MeasurementTable,
    Protocol, SdnRateModel, SdrMeasurement,
};
pub use power::{
    load_power_profile, power_at_load, savings_percent, total_power, PowerReport, Provisioning,
    ServerProfile,
};
pub use stats::{boxplot_stats, BoxplotStats};
pub use workload::{
    aggregate_sdn, generate_workload, usecase_spec, Process, ProcessKind, UtilRange, Workload,
    WorkloadSpec,
};
